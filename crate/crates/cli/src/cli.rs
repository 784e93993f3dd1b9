//! Subcommand parsing and dispatch.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;
use zpdrec_core::selector::DEFAULT_BALANCE_HORIZON;
use zpdrec_core::simulate::{
    evaluate, gen_synthetic_corpus, simulate_batch, BatchParams, SimError, SynthParams, TurnRecord,
};
use zpdrec_core::{corpus_digest, density_sweep, Corpus, GraphConfig, GraphFile, Mode, PoGraph};

use crate::service::{router, Engine, SessionManager, SessionStore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "zpdrec",
    version,
    about = "Fuzzy partial-ordering graphs and adaptive material recommendation"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the graph for a corpus and write it as JSON.
    BuildGraph {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = zpdrec_core::pograph::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relation/edge/class counts for several alphas, as CSV.
    Sweep {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated, e.g. 1.0,0.9,0.8
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run simulated students through sessions and write a JSON report.
    Simulate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = zpdrec_core::pograph::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value = "adaptive")]
        mode: String,
        #[arg(long, default_value_t = 100)]
        students: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "M", default_value_t = DEFAULT_BALANCE_HORIZON)]
        m: u32,
        /// Student comprehension threshold.
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        /// Response flip probability.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        max_turns: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-turn records as JSON lines.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long = "M", default_value_t = DEFAULT_BALANCE_HORIZON)]
        m: u32,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        store: PathBuf,
    },
    /// Generate a synthetic Zipfian corpus.
    GenCorpus {
        /// JSON file with generator parameters; missing fields use defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            EXIT_DATA
        }
    }
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(msg.to_string())
}

fn read_corpus(path: &Path) -> anyhow::Result<(Corpus, String)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let corpus = Corpus::from_bytes(&bytes).with_context(|| format!("loading {}", path.display()))?;
    Ok((corpus, corpus_digest(&bytes)))
}

fn write_file(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::BuildGraph { corpus, alpha, out } => {
            let config = GraphConfig::new(alpha).map_err(usage)?;
            let (corpus, digest) = read_corpus(&corpus)?;
            let graph = PoGraph::build(&corpus, config);
            let file = GraphFile::from_graph(&graph, digest);
            write_file(&out, file.to_json().as_bytes())?;
            let s = graph.stats();
            log::info!("{} nodes, {} classes, {} edges", s.nodes, s.classes, s.edges);
        }
        Command::Sweep { corpus, alphas, out } => {
            for &a in &alphas {
                GraphConfig::new(a).map_err(usage)?;
            }
            let (corpus, _) = read_corpus(&corpus)?;
            let rows = density_sweep(&corpus, &alphas).map_err(anyhow::Error::from)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(anyhow::Error::from)?;
            }
            let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
            write_file(&out, &bytes)?;
        }
        Command::Simulate {
            corpus,
            alpha,
            mode,
            students,
            seed,
            m,
            beta,
            noise,
            max_turns,
            out,
            traces,
        } => {
            let config = GraphConfig::new(alpha).map_err(usage)?;
            let mode: Mode = mode.parse().map_err(usage)?;
            if m == 0 {
                return Err(usage("--M must be at least 1"));
            }
            if students == 0 {
                return Err(usage("--students must be at least 1"));
            }
            if max_turns == Some(0) {
                return Err(usage("--max-turns must be at least 1"));
            }
            let (corpus, _) = read_corpus(&corpus)?;
            let graph = PoGraph::build(&corpus, config);
            let params = BatchParams {
                mode,
                horizon: m,
                n_students: students,
                seed,
                beta,
                noise,
                max_turns,
            };
            let (runs, latent) = simulate_batch(&graph, &corpus, &params).map_err(|e| match e {
                SimError::Params(_) => usage(e),
                other => Failure::Data(other.into()),
            })?;
            let report = evaluate(&runs, &latent, &corpus).map_err(anyhow::Error::from)?;
            let mut json = serde_json::to_string_pretty(&report[0]).map_err(anyhow::Error::from)?;
            json.push('\n');
            write_file(&out, json.as_bytes())?;
            if let Some(path) = traces {
                #[derive(Serialize)]
                struct Line<'a> {
                    session: usize,
                    #[serde(flatten)]
                    record: &'a TurnRecord,
                }
                let mut buf = Vec::new();
                for (session, t) in runs.iter().enumerate() {
                    for record in &t.records {
                        serde_json::to_writer(&mut buf, &Line { session, record }).map_err(anyhow::Error::from)?;
                        buf.write_all(b"\n").map_err(anyhow::Error::from)?;
                    }
                }
                write_file(&path, &buf)?;
            }
        }
        Command::Serve {
            graph,
            corpus,
            m,
            port,
            store,
        } => {
            if m == 0 {
                return Err(usage("--M must be at least 1"));
            }
            let (corpus, digest) = read_corpus(&corpus)?;
            let text = fs::read_to_string(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let graph = GraphFile::parse(&text)
                .and_then(|f| f.into_graph(&corpus, &digest))
                .map_err(anyhow::Error::from)?;
            let engine = Engine::new(corpus, graph).map_err(anyhow::Error::from)?;
            let store = SessionStore::open(&store).with_context(|| format!("opening store {}", store.display()))?;
            let manager = Arc::new(SessionManager::new(Arc::new(engine), Some(store), m));
            serve(manager, port)?;
        }
        Command::GenCorpus { params, out } => {
            let params: SynthParams = match params {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => SynthParams::default(),
            };
            let corpus = gen_synthetic_corpus(&params).map_err(anyhow::Error::from)?;
            write_file(&out, corpus.to_jsonl().as_bytes())?;
        }
    }
    Ok(())
}

fn serve(manager: Arc<SessionManager>, port: u16) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
        log::info!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(manager))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
