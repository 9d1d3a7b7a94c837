//! Command-line front end.
//!
//! Exit codes: 0 success or all properties hold, 1 a property or scenario
//! fails, 2 usage or input error, 3 completion backend error, 4 state,
//! time or cancellation limit.

mod commands;
mod repl;

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::agent::{AgentConfig, BackendKind, ConfigFile};
use crate::checker::Limits;
use crate::diag::{render_diagnostics, Audience, Diagnostics};
use crate::lang::{parse_asm, AsmSpecification, Logic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Failure = 1,
    Usage = 2,
    Backend = 3,
    Limit = 4,
}

/// An error already rendered for stderr.
#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        CliError { exit, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new(Exit::Usage, message)
    }

    fn diagnostics(d: &Diagnostics, source: Option<&str>) -> Self {
        CliError::usage(render_diagnostics(d, Audience::Human, source).trim_end().to_string())
    }
}

pub type CliResult = Result<Exit, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogicArg {
    Ctl,
    Ltl,
}

impl From<LogicArg> for Logic {
    fn from(l: LogicArg) -> Logic {
        match l {
            LogicArg::Ctl => Logic::Ctl,
            LogicArg::Ltl => Logic::Ltl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Live,
    Replay,
}

#[derive(Debug, Parser)]
#[command(name = "asmprop", version, about = "Check, formalize and explain temporal properties of AsmetaL specifications")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Print structured JSON records on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Configuration file (default: ./asmprop.toml when present).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Replay fixture directory (implies --backend replay).
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    #[arg(long, global = true)]
    pub max_iterations: Option<u32>,
    /// Request timeout in seconds.
    #[arg(long, global = true)]
    pub timeout: Option<u64>,
    /// Directory for agent transcripts.
    #[arg(long, global = true, default_value = "transcripts")]
    pub transcripts: PathBuf,
    #[arg(long, global = true)]
    pub limit_states: Option<usize>,
    /// Time limit for building and checking, in seconds.
    #[arg(long, global = true)]
    pub limit_time: Option<u64>,
    /// Bound for LTL properties.
    #[arg(long, global = true)]
    pub ltl_bound: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Model-check every property embedded in a specification.
    Check { spec: PathBuf },
    /// Turn a natural-language requirement into a validated property.
    Formalize {
        spec: PathBuf,
        /// Requirement text, or @file to read it from a file.
        #[arg(long)]
        req: String,
        #[arg(long, value_enum)]
        logic: LogicArg,
        /// Where to write the enriched specification.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        semantic_repair: bool,
    },
    /// List the most important properties of a specification.
    Elicit {
        spec: PathBuf,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Explain a property in natural language.
    ExplainProp {
        spec: PathBuf,
        #[arg(long, conflicts_with = "index", required_unless_present = "index")]
        formula: Option<String>,
        /// 1-based index of an embedded property.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, value_enum)]
        logic: Option<LogicArg>,
    },
    /// Explain an Avalla scenario in natural language.
    ExplainScenario { spec: PathBuf, scenario: PathBuf },
    /// Export a counterexample (or witness) of an embedded property as a scenario.
    ExportCex {
        spec: PathBuf,
        /// 1-based index of an embedded property.
        #[arg(long)]
        property_index: usize,
        #[arg(long)]
        out: PathBuf,
        /// Export the witness of a holding existential property instead.
        #[arg(long)]
        witness: bool,
    },
    /// Translate a specification to NuSMV.
    EmitSmv {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an Avalla scenario.
    RunScenario { spec: PathBuf, scenario: PathBuf },
    /// Interactive session on a loaded specification.
    Repl { spec: PathBuf },
}

pub struct Context<'a> {
    pub json: bool,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub agent: AgentConfig,
    pub limits: Limits,
    pub transcripts: PathBuf,
}

impl Context<'_> {
    pub(crate) fn say(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", text.as_ref());
    }

    pub(crate) fn warn(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.err, "{}", text.as_ref());
    }

    pub(crate) fn record(&mut self, value: serde_json::Value) {
        let _ = writeln!(self.out, "{value}");
    }
}

pub struct LoadedSpec {
    pub path: PathBuf,
    pub source: String,
    pub spec: AsmSpecification,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let source = read_file(path)?;
    let spec = parse_asm(&source).map_err(|d| {
        let mut e = CliError::diagnostics(&d, Some(&source));
        e.message = format!("{}:\n{}", path.display(), e.message);
        e
    })?;
    Ok(LoadedSpec { path: path.to_path_buf(), source, spec })
}

static CANCEL: OnceLock<Arc<AtomicBool>> = OnceLock::new();

fn cancel_flag() -> Arc<AtomicBool> {
    CANCEL.get_or_init(|| Arc::new(AtomicBool::new(false))).clone()
}

/// First interrupt cancels the running check; a second one exits.
#[cfg(unix)]
extern "C" fn on_interrupt(_: libc::c_int) {
    if let Some(flag) = CANCEL.get() {
        if flag.swap(true, std::sync::atomic::Ordering::SeqCst) {
            // SAFETY: `_exit` is async-signal-safe.
            unsafe { libc::_exit(130) }
        }
    }
}

/// Routes SIGINT to the checker's cancellation flag.
fn install_interrupt_hook() -> Arc<AtomicBool> {
    let flag = cancel_flag();
    #[cfg(unix)]
    // SAFETY: the handler only touches an initialized atomic and `_exit`.
    unsafe {
        libc::signal(libc::SIGINT, on_interrupt as extern "C" fn(libc::c_int) as libc::sighandler_t);
    }
    flag
}

fn build_context<'a>(g: &GlobalArgs, out: &'a mut dyn Write, err: &'a mut dyn Write) -> Result<Context<'a>, CliError> {
    let file = match &g.config {
        Some(p) => Some(ConfigFile::load(p).map_err(|e| CliError::usage(e.to_string()))?),
        None => {
            let default = Path::new("asmprop.toml");
            if default.exists() {
                Some(ConfigFile::load(default).map_err(|e| CliError::usage(e.to_string()))?)
            } else {
                None
            }
        }
    };
    let mut agent = AgentConfig::layered(file.as_ref(), |k| std::env::var(k).ok());
    if let Some(v) = &g.endpoint {
        agent.endpoint = v.clone();
    }
    if let Some(v) = &g.model {
        agent.model = v.clone();
    }
    if let Some(v) = g.temperature {
        agent.temperature = v;
    }
    if let Some(v) = g.max_iterations {
        agent.max_iterations = v;
    }
    if let Some(v) = g.timeout {
        agent.timeout = Duration::from_secs(v);
    }
    match (g.backend, &g.fixtures) {
        (Some(BackendArg::Live), _) => agent.backend = BackendKind::Live,
        (_, Some(dir)) => agent.backend = BackendKind::Replay(dir.clone()),
        (Some(BackendArg::Replay), None) => {
            if !matches!(agent.backend, BackendKind::Replay(_)) {
                return Err(CliError::usage("--backend replay needs --fixtures <dir>"));
            }
        }
        (None, None) => {}
    }

    let mut limits = Limits::default();
    if let Some(f) = &file {
        if let Some(v) = f.max_states {
            limits.max_states = v;
        }
        if let Some(v) = f.max_time_secs {
            limits.max_time = Duration::from_secs(v);
        }
        if let Some(v) = f.ltl_bound {
            limits.ltl_bound = v;
        }
    }
    if let Some(v) = g.limit_states {
        limits.max_states = v;
    }
    if let Some(v) = g.limit_time {
        limits.max_time = Duration::from_secs(v);
    }
    if let Some(v) = g.ltl_bound {
        limits.ltl_bound = v;
    }
    limits.cancel = Some(install_interrupt_hook());
    Ok(Context { json: g.json, out, err, agent, limits, transcripts: g.transcripts.clone() })
}

fn dispatch(ctx: &mut Context<'_>, command: CommandArgs, input: &mut dyn BufRead) -> CliResult {
    use commands::*;
    match command {
        CommandArgs::Check { spec } => check(ctx, &load_spec(&spec)?),
        CommandArgs::Formalize { spec, req, logic, out, semantic_repair } => {
            let requirement = match req.strip_prefix('@') {
                Some(file) => read_file(Path::new(file))?.trim().to_string(),
                None => req,
            };
            ctx.agent.semantic_repair |= semantic_repair;
            let loaded = load_spec(&spec)?;
            formalize(ctx, &loaded, &requirement, logic.into(), out.as_deref()).map(|(exit, _)| exit)
        }
        CommandArgs::Elicit { spec, count } => elicit(ctx, &load_spec(&spec)?, count),
        CommandArgs::ExplainProp { spec, formula, index, logic } => {
            let target = match (formula, index) {
                (Some(f), _) => PropertyRef::Text(f, logic.map(Logic::from)),
                (None, Some(i)) => PropertyRef::Index(i),
                (None, None) => return Err(CliError::usage("give --formula or --index")),
            };
            explain_prop(ctx, &load_spec(&spec)?, target)
        }
        CommandArgs::ExplainScenario { spec, scenario } => explain_scenario(ctx, &load_spec(&spec)?, &scenario),
        CommandArgs::ExportCex { spec, property_index, out, witness } => {
            export_cex(ctx, &load_spec(&spec)?, property_index, &out, witness)
        }
        CommandArgs::EmitSmv { spec, out } => emit_smv(ctx, &load_spec(&spec)?, &out),
        CommandArgs::RunScenario { spec, scenario } => run_scenario(ctx, &load_spec(&spec)?, &scenario),
        CommandArgs::Repl { spec } => repl::run(ctx, load_spec(&spec)?, input),
    }
}

/// Runs the command line with explicit streams and returns the exit code.
pub fn run_with<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage as i32 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let mut ctx = match build_context(&cli.global, out, err) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            return e.exit as i32;
        }
    };
    match dispatch(&mut ctx, cli.command, input) {
        Ok(exit) => exit as i32,
        Err(e) => {
            if ctx.json {
                let rec = serde_json::json!({"error": e.message, "exit": e.exit as i32});
                ctx.record(rec);
            }
            ctx.warn(format!("error: {}", e.message));
            e.exit as i32
        }
    }
}

/// Entry point of the `asmprop` binary.
pub fn main() -> i32 {
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    run_with(std::env::args_os(), &mut input, &mut out, &mut err)
}
