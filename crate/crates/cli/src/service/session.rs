//! Session lifecycle over a shared read-only graph.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use zpdrec_core::selector::{next_material, turn_rng, Exhausted};
use zpdrec_core::student::{StateSnapshot, StatusCounts, StudentError};
use zpdrec_core::{init_state, Corpus, Heuristic, Media, Mode, PoGraph, SelectionResult, SelectorConfig, StudentState};

use super::store::{valid_session_id, LogEvent, SessionStore};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    Validation(String),
    #[error("unknown session {0:?}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Usage(String),
    #[error("session log: {0}")]
    Storage(#[from] std::io::Error),
    #[error("session {session}: log does not replay: {message}")]
    Replay { session: String, message: String },
}

/// Corpus plus its graph, node-aligned.
#[derive(Debug)]
pub struct Engine {
    corpus: Corpus,
    graph: PoGraph,
}

impl Engine {
    pub fn new(corpus: Corpus, graph: PoGraph) -> Result<Self, ServiceError> {
        let aligned = corpus.len() == graph.len() && corpus.ids().zip(graph.node_ids()).all(|(a, b)| a == b);
        if !aligned {
            return Err(ServiceError::Validation("graph does not match corpus".into()));
        }
        Ok(Engine { corpus, graph })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn graph(&self) -> &PoGraph {
        &self.graph
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    pub session_id: String,
    pub config: SelectorConfig,
    pub state: StudentState,
    pending: Option<SelectionResult>,
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDescriptor {
    pub session_id: String,
    pub mode: Mode,
    pub m: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialPayload {
    pub material_id: String,
    pub title: String,
    pub content: String,
    pub media: Media,
    pub heuristic: Heuristic,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speaking_rate: Option<f64>,
    pub subtitles: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletePayload {
    pub complete: bool,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NextPayload {
    Material(MaterialPayload),
    Complete(CompletePayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub counts: StatusCounts,
    pub presented: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub session_id: String,
    pub mode: Mode,
    pub m: u32,
    pub pending: Option<String>,
    pub created_at: u64,
    pub updated_at: u64,
    #[serde(flatten)]
    pub snapshot: StateSnapshot,
    pub counts: StatusCounts,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Session {
    fn new(session_id: String, config: SelectorConfig, graph: &PoGraph, created_at: u64) -> Self {
        Session {
            session_id,
            state: init_state(graph, config.seed()),
            config,
            pending: None,
            created_at,
            updated_at: created_at,
        }
    }

    fn summary(&self) -> Summary {
        Summary {
            counts: self.state.counts(),
            presented: self.state.problems_seen(),
        }
    }

    /// Selects (or re-returns) the pending material.
    fn next(&mut self, graph: &PoGraph) -> Result<Option<SelectionResult>, StudentError> {
        if let Some(sel) = self.pending {
            return Ok(Some(sel));
        }
        let turn = self.state.problems_seen() as u64;
        match next_material(
            &self.state,
            graph,
            &self.config,
            &mut turn_rng(self.config.seed(), turn),
        ) {
            Ok(sel) => {
                self.state.present(sel.material)?;
                self.pending = Some(sel);
                Ok(Some(sel))
            }
            Err(Exhausted) => Ok(None),
        }
    }

    fn respond(&mut self, graph: &PoGraph, material_id: &str, understood: bool) -> Result<(), ServiceError> {
        let Some(sel) = self.pending else {
            return Err(ServiceError::Usage("no material is awaiting a response".into()));
        };
        if graph.id(sel.material) != material_id {
            return Err(ServiceError::Conflict(format!(
                "material {material_id:?} is not pending (pending: {:?})",
                graph.id(sel.material)
            )));
        }
        self.state
            .record_response(graph, sel.material, understood)
            .map_err(|e| ServiceError::Usage(e.to_string()))?;
        self.pending = None;
        Ok(())
    }

    /// Rebuilds a session by re-running selection and each logged response.
    fn replay(events: &[LogEvent], graph: &PoGraph) -> Result<Self, String> {
        let Some(LogEvent::Created {
            session_id,
            mode,
            m,
            seed,
            created_at,
        }) = events.first()
        else {
            return Err("log does not start with a created event".into());
        };
        let config = SelectorConfig::new(*mode, *m, *seed).map_err(|e| e.to_string())?;
        let mut session = Session::new(session_id.clone(), config, graph, *created_at);
        for ev in &events[1..] {
            let LogEvent::Response {
                material_id,
                understood,
                at,
            } = ev
            else {
                return Err("duplicate created event".into());
            };
            let selected = session
                .next(graph)
                .map_err(|e| e.to_string())?
                .ok_or("response logged after exhaustion")?;
            if graph.id(selected.material) != material_id {
                return Err(format!(
                    "logged response for {material_id:?} but selection replays to {:?}",
                    graph.id(selected.material)
                ));
            }
            session
                .respond(graph, material_id, *understood)
                .map_err(|e| e.to_string())?;
            session.updated_at = *at;
        }
        Ok(session)
    }
}

/// All sessions of one service instance.
///
/// Sessions are locked individually; the map lock is only held to look up
/// or insert a session handle.
pub struct SessionManager {
    engine: Arc<Engine>,
    store: Option<SessionStore>,
    default_m: u32,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionManager {
    pub fn new(engine: Arc<Engine>, store: Option<SessionStore>, default_m: u32) -> Self {
        SessionManager {
            engine,
            store,
            default_m,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn default_m(&self) -> u32 {
        self.default_m
    }

    pub fn create_session(
        &self,
        mode: &str,
        m: Option<i64>,
        seed: Option<u64>,
    ) -> Result<SessionDescriptor, ServiceError> {
        let mode: Mode = mode
            .parse()
            .map_err(|e: zpdrec_core::selector::ConfigError| ServiceError::Validation(e.to_string()))?;
        let m = m.unwrap_or(self.default_m as i64);
        let m = u32::try_from(m).map_err(|_| ServiceError::Validation(format!("invalid M {m}")))?;
        let seed = seed.unwrap_or_else(rand::random);
        let config = SelectorConfig::new(mode, m, seed).map_err(|e| ServiceError::Validation(e.to_string()))?;
        let session_id = uuid::Uuid::new_v4().simple().to_string();
        let created_at = now();
        if let Some(store) = &self.store {
            store.append(
                &session_id,
                &LogEvent::Created {
                    session_id: session_id.clone(),
                    mode,
                    m,
                    seed,
                    created_at,
                },
            )?;
        }
        let session = Session::new(session_id.clone(), config, self.engine.graph(), created_at);
        self.sessions
            .lock()
            .expect("session map poisoned")
            .insert(session_id.clone(), Arc::new(Mutex::new(session)));
        Ok(SessionDescriptor {
            session_id,
            mode,
            m,
            seed,
        })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        let mut map = self.sessions.lock().expect("session map poisoned");
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let not_found = || ServiceError::NotFound(id.to_owned());
        let store = self.store.as_ref().ok_or_else(not_found)?;
        if !valid_session_id(id) {
            return Err(not_found());
        }
        let events = store.load(id)?.ok_or_else(not_found)?;
        let session = Session::replay(&events, self.engine.graph()).map_err(|message| ServiceError::Replay {
            session: id.to_owned(),
            message,
        })?;
        log::info!(
            "session {id}: restored {} responses from log",
            session.state.problems_seen()
        );
        let handle = Arc::new(Mutex::new(session));
        map.insert(id.to_owned(), handle.clone());
        Ok(handle)
    }

    pub fn get_next(&self, id: &str) -> Result<NextPayload, ServiceError> {
        let handle = self.session(id)?;
        let mut session = handle.lock().expect("session poisoned");
        let graph = self.engine.graph();
        let sel = session.next(graph).map_err(|e| ServiceError::Usage(e.to_string()))?;
        Ok(match sel {
            Some(sel) => {
                let m = self.engine.corpus().get(sel.material);
                NextPayload::Material(MaterialPayload {
                    material_id: m.id().to_owned(),
                    title: m.title().to_owned(),
                    content: m.content().to_owned(),
                    media: m.media(),
                    heuristic: sel.heuristic,
                    speaking_rate: m.speaking_rate(),
                    subtitles: m.has_subtitles(),
                })
            }
            None => NextPayload::Complete(CompletePayload {
                complete: true,
                summary: session.summary(),
            }),
        })
    }

    pub fn post_response(&self, id: &str, material_id: &str, understood: bool) -> Result<Summary, ServiceError> {
        let handle = self.session(id)?;
        let mut session = handle.lock().expect("session poisoned");
        let graph = self.engine.graph();
        // Validate against a copy so a failed append leaves the session untouched.
        let mut updated = session.clone();
        updated.respond(graph, material_id, understood)?;
        updated.updated_at = now();
        if let Some(store) = &self.store {
            store.append(
                id,
                &LogEvent::Response {
                    material_id: material_id.to_owned(),
                    understood,
                    at: updated.updated_at,
                },
            )?;
        }
        *session = updated;
        Ok(session.summary())
    }

    pub fn get_state(&self, id: &str) -> Result<StateView, ServiceError> {
        let handle = self.session(id)?;
        let session = handle.lock().expect("session poisoned");
        let graph = self.engine.graph();
        Ok(StateView {
            session_id: session.session_id.clone(),
            mode: session.config.mode(),
            m: session.config.horizon(),
            pending: session.pending.map(|s| graph.id(s.material).to_owned()),
            created_at: session.created_at,
            updated_at: session.updated_at,
            snapshot: session.state.snapshot(graph),
            counts: session.state.counts(),
        })
    }
}
