//! Interactive sessions: HTTP API, per-session locking, and log-replay persistence.
//!
//! The graph and corpus are loaded once and shared read-only. Every
//! acknowledged create or response is appended to the session's log before
//! the reply goes out, and a session missing from memory is rebuilt by
//! replaying its log through the same deterministic selection.

mod http;
mod session;
mod store;

pub use http::router;
pub use session::{
    CompletePayload, Engine, MaterialPayload, NextPayload, ServiceError, SessionDescriptor, SessionManager, StateView,
    Summary,
};
pub use store::{LogEvent, SessionStore};
