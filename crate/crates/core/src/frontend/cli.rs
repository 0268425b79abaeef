//! `winmdp` command-line interface.
//!
//! Exit codes: 0 yes or success, 1 no, 2 usage, parse or solver error,
//! 3 inconclusive (mean-payoff bounded window cap exhausted).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::document::{export_strategy, import_strategy, mec_report, model_hash, ResultDocument, StateValue};
use super::parse::parse_model;
use crate::classify::{classify_bounded, classify_fixed, EcStatus};
use crate::graph::mec_decomposition;
use crate::model::{restrict_mapped, Kind, Mdp, WindowSpec};
use crate::numeric::{format_rational, parse_rational, Rational};
use crate::oracle::{brute_force_value, monte_carlo, Estimate};
use crate::solver::{decide_threshold, solve, DecisionError};

const EXIT_YES: i32 = 0;
const EXIT_NO: i32 = 1;
const EXIT_ERROR: i32 = 2;
const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "winmdp", version, about = "Exact model checker for window objectives on MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ObjectiveArgs {
    /// Objective as <variant>-<kind>, e.g. dfw-par, fw-mp, bw-par.
    #[arg(long)]
    objective: String,
    /// Window size (DFW and FW only).
    #[arg(long)]
    lambda: Option<u32>,
    /// Largest window size searched for bounded window mean-payoff objectives.
    #[arg(long)]
    cap: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an objective and optionally decide a threshold query.
    Check {
        file: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[arg(long)]
        state: String,
        /// Threshold as num/den.
        #[arg(long)]
        threshold: Option<String>,
        /// Write the witness strategy document to this file.
        #[arg(long)]
        strategy_out: Option<PathBuf>,
        /// Include the witness strategy in the result document.
        #[arg(long)]
        emit_strategy: bool,
    },
    /// Classify the maximal end-components of a model.
    Classify {
        file: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long, conflicts_with = "bounded")]
        lambda: Option<u32>,
        #[arg(long)]
        bounded: bool,
        #[arg(long)]
        cap: Option<u32>,
    },
    /// Estimate the value of a strategy by sampling runs.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[arg(long)]
        state: String,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        seed: u64,
        /// Strategy document to simulate; defaults to the solver's strategy.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Optimal values by brute-force enumeration (small models only).
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
    },
}

#[derive(Serialize)]
struct ClassifyDocument {
    model_hash: String,
    kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<u32>,
    bounded: bool,
    mec_report: Vec<super::document::MecReportEntry>,
    timing_ms: f64,
}

#[derive(Serialize)]
struct SimulateDocument {
    model_hash: String,
    objective: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<u32>,
    state: String,
    #[serde(flatten)]
    estimate: Estimate,
    timing_ms: f64,
}

#[derive(Serialize)]
struct OracleDocument {
    model_hash: String,
    objective: String,
    lambda: Option<u32>,
    values: Vec<StateValue>,
    agrees_with_solver: bool,
    timing_ms: f64,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("WINMDP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A pool that already exists keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Documents go to `out`, diagnostics to `err`.
pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_YES };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    configure_threads();
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn load(path: &Path) -> Result<Mdp, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn state_of(m: &Mdp, name: &str) -> Result<usize, Failure> {
    m.state_index(name).ok_or_else(|| Failure(format!("unknown state `{name}`")))
}

fn warnings(m: &Mdp, spec: &WindowSpec) -> Vec<String> {
    let mut w = Vec::new();
    if let Some(l) = spec.lambda {
        if l as usize > 10 * m.num_states() {
            w.push(format!("window size {l} exceeds ten times the number of states ({})", m.num_states()));
        }
    }
    if m.kind() == Kind::Par && m.max_priority() as usize > m.num_states() + 1 {
        w.push(format!("largest priority {} exceeds the number of states plus one", m.max_priority()));
    }
    w
}

fn emit<T: Serialize>(out: &mut dyn Write, doc: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc)?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let start = Instant::now();
    match command {
        Command::Check { file, objective, state, threshold, strategy_out, emit_strategy } => {
            let m = load(&file)?;
            let spec = WindowSpec::parse_objective(&objective.objective, objective.lambda)?;
            m.check_kind(spec.kind)?;
            let s = state_of(&m, &state)?;
            let alpha = match &threshold {
                Some(t) => Some(parse_rational(t).ok_or_else(|| Failure(format!("malformed threshold `{t}`")))?),
                None => None,
            };
            let warns = warnings(&m, &spec);
            for w in &warns {
                writeln!(err, "warning: {w}")?;
            }
            let verdict = solve(&m, &spec, objective.cap)?;
            let (decision, code) = match &alpha {
                None => (None, EXIT_YES),
                Some(a) => match decide_threshold(&verdict, s, a) {
                    Ok(true) => (Some("yes"), EXIT_YES),
                    Ok(false) => (Some("no"), EXIT_NO),
                    Err(DecisionError::UnsoundForCap) => (Some("inconclusive"), EXIT_INCONCLUSIVE),
                    Err(e) => return Err(e.into()),
                },
            };
            let strategy_doc = export_strategy(&m, &verdict.strategy);
            if let Some(path) = &strategy_out {
                std::fs::write(path, serde_json::to_string_pretty(&strategy_doc)?)
                    .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            }
            let doc = ResultDocument {
                model_hash: model_hash(&m),
                objective: format!("{}-{}", spec.variant, spec.kind),
                lambda: spec.lambda,
                cap: objective.cap,
                state,
                value: format_rational(&verdict.values[s]),
                threshold: alpha.as_ref().map(format_rational),
                decision: decision.map(str::to_string),
                confidence: verdict.confidence,
                values: values_doc(&m, &verdict.values),
                mec_report: mec_report(&m, &verdict.mec_report),
                strategy: emit_strategy.then_some(strategy_doc),
                warnings: warns,
                timing_ms: elapsed_ms(start),
            };
            emit(out, &doc)?;
            Ok(code)
        }
        Command::Classify { file, kind, lambda, bounded, cap } => {
            let m = load(&file)?;
            let kind: Kind = kind.parse()?;
            m.check_kind(kind)?;
            if !bounded && lambda.is_none() {
                return Err(Failure("classify needs --lambda N or --bounded".into()));
            }
            if lambda == Some(0) {
                return Err(Failure("window size must be at least 1".into()));
            }
            let dec = mec_decomposition(&m);
            let mut report: Vec<EcStatus> = Vec::new();
            for (i, mec) in dec.mecs.iter().enumerate() {
                let (sub, parent) = restrict_mapped(&m, &mec.selection)?;
                let mut st = match lambda {
                    Some(l) => classify_fixed(&sub, kind, l)?,
                    None => classify_bounded(&sub, kind, cap)?,
                };
                st.mec = i;
                st.states = parent;
                report.push(st);
            }
            let doc = ClassifyDocument {
                model_hash: model_hash(&m),
                kind,
                lambda,
                bounded,
                mec_report: mec_report(&m, &report),
                timing_ms: elapsed_ms(start),
            };
            emit(out, &doc)?;
            Ok(EXIT_YES)
        }
        Command::Simulate { file, objective, state, samples, horizon, seed, strategy } => {
            let m = load(&file)?;
            let spec = WindowSpec::parse_objective(&objective.objective, objective.lambda)?;
            m.check_kind(spec.kind)?;
            let s = state_of(&m, &state)?;
            let sigma = match &strategy {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                    import_strategy(&m, &serde_json::from_str(&text)?)?
                }
                None => solve(&m, &spec, objective.cap)?.strategy,
            };
            let estimate = monte_carlo(&m, &sigma, &spec, s, samples, horizon, seed)?;
            let doc = SimulateDocument {
                model_hash: model_hash(&m),
                objective: format!("{}-{}", spec.variant, spec.kind),
                lambda: spec.lambda,
                state,
                estimate,
                timing_ms: elapsed_ms(start),
            };
            emit(out, &doc)?;
            Ok(EXIT_YES)
        }
        Command::Oracle { file, objective } => {
            let m = load(&file)?;
            let spec = WindowSpec::parse_objective(&objective.objective, objective.lambda)?;
            m.check_kind(spec.kind)?;
            let values = brute_force_value(&m, &spec)?;
            let solved = solve(&m, &spec, objective.cap)?;
            let doc = OracleDocument {
                model_hash: model_hash(&m),
                objective: format!("{}-{}", spec.variant, spec.kind),
                lambda: spec.lambda,
                values: values_doc(&m, &values),
                agrees_with_solver: solved.values == values,
                timing_ms: elapsed_ms(start),
            };
            emit(out, &doc)?;
            Ok(EXIT_YES)
        }
    }
}

fn values_doc(m: &Mdp, values: &[Rational]) -> Vec<StateValue> {
    values
        .iter()
        .enumerate()
        .map(|(s, v)| StateValue { state: m.state_name(s).to_string(), value: format_rational(v) })
        .collect()
}
