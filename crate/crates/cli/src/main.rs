//! `gnet`: batch front end over the gnet library.
//!
//! Exit codes: 0 success, 1 semantic failure, 2 input error, 3 step limit,
//! 4 truncated state space.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gnet::analysis::{analyze, flatten_method, inline_isps, FlatNet, Limits};
use gnet::dsl::{eval_expr, parse_expr};
use gnet::model::{validate, WebService};
use gnet::prodexport::{export_dot, export_prod};
use gnet::registry::{read_block, read_service, write_service, Registry};
use gnet::sim::{Outcome, Policy, Simulator};
use gnet::value::Value;

const SEMANTIC: u8 = 1;
const STEP_LIMIT: u8 = 3;
const TRUNCATED: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "gnet", version, about = "Compose, simulate and verify G-Net service models")]
struct Cli {
    /// Directory of service (*.json) and block (*.block.json) files. Repeatable.
    #[arg(long, global = true, env = "GNET_REGISTRY", value_delimiter = ':')]
    registry: Vec<PathBuf>,
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    depth_limit: u64,
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    #[arg(long, global = true, value_enum, default_value_t = PolicyArg::Det)]
    policy: PolicyArg,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Det,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Prod,
    Dot,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a service file against the meta-model.
    Validate { model: PathBuf },
    /// Evaluate a composition expression file and write the result to --out.
    Compose { expr: PathBuf },
    /// Play the token game of one method.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        method: Option<String>,
        /// Method arguments as a JSON array, e.g. `[1, true]`.
        #[arg(long)]
        args: Option<String>,
        /// Also write the firing trace as JSON to this file.
        #[arg(long)]
        trace_json: Option<PathBuf>,
    },
    /// Inline, flatten and explore the reachable markings.
    Analyze {
        model: PathBuf,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        args: Option<String>,
    },
    /// Render a service (or an already flattened net, for prod) as text.
    Export {
        model: PathBuf,
        #[arg(value_enum)]
        format: Format,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        args: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // library errors already print their source; skip repeats
            let mut msg = e.to_string();
            for cause in e.chain().skip(1).map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    msg = format!("{msg}: {cause}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Errors returned from here are input errors; semantic failures are
/// reported by the commands themselves.
fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate { model } => {
            let ws = read_service(model)?;
            let report = validate(&ws);
            emit(cli, &report.to_string())?;
            Ok(if report.is_ok() { 0 } else { SEMANTIC })
        }
        Command::Compose { expr } => compose(cli, expr),
        Command::Simulate { model, method, args, trace_json } => {
            simulate(cli, model, method.as_deref(), args.as_deref(), trace_json.as_deref())
        }
        Command::Analyze { model, method, args } => {
            let ws = read_service(model)?;
            let reg = registry(cli, model, Some(&ws))?;
            let args = parse_args(args.as_deref())?;
            let flat = match flat_net(cli, &ws, &reg, method.as_deref(), &args) {
                Ok(f) => f,
                Err(e) => return semantic(e),
            };
            let limits = Limits { max_states: cli.max_states as usize, ..Limits::default() };
            let report = match analyze(&flat, limits) {
                Ok(r) => r,
                Err(e) => return semantic(e),
            };
            emit(cli, &report.to_string())?;
            Ok(if report.truncated {
                TRUNCATED
            } else if !report.deadlocks.is_empty() || !report.goal_reachable {
                SEMANTIC
            } else {
                0
            })
        }
        Command::Export { model, format, method, args } => {
            export(cli, model, *format, method.as_deref(), args.as_deref())
        }
    }
}

fn semantic(e: impl std::fmt::Display) -> Result<u8> {
    eprintln!("error: {e}");
    Ok(SEMANTIC)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_args(args: Option<&str>) -> Result<Vec<Value>> {
    match args {
        None => Ok(Vec::new()),
        Some(text) => serde_json::from_str(text).context("--args must be a JSON array of scalars"),
    }
}

/// The --registry directories, then the model's own directory. Files in
/// the model's directory that are not services or blocks are skipped, as
/// are services clashing with ones already known.
fn registry(cli: &Cli, model: &Path, own: Option<&WebService>) -> Result<Registry> {
    let mut reg = Registry::new();
    if let Some(ws) = own {
        reg.insert(ws.clone())?;
    }
    for dir in &cli.registry {
        reg.merge(&Registry::load_dir(dir)?)?;
    }
    let dir = match model.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json") && p != model)
        .collect();
    paths.sort();
    for path in paths {
        let is_block = path.to_string_lossy().ends_with(".block.json");
        let added = if is_block {
            read_block(&path).ok().map(|b| reg.block(&b.name).is_ok() || reg.insert_block(b).is_ok())
        } else {
            read_service(&path).ok().map(|s| reg.contains(&s.name) || reg.insert(s).is_ok())
        };
        if added.is_none() {
            eprintln!("note: skipping {}", path.display());
        }
    }
    Ok(reg)
}

fn compose(cli: &Cli, expr_path: &Path) -> Result<u8> {
    let text = fs::read_to_string(expr_path).with_context(|| format!("reading {}", expr_path.display()))?;
    let Some(out) = &cli.out else { bail!("compose needs --out") };
    let reg = registry(cli, expr_path, None)?;
    let expr = match parse_expr(text.trim()) {
        Ok(e) => e,
        Err(e) => return semantic(e),
    };
    let comp = match eval_expr(&expr, &reg) {
        Ok(c) => c,
        Err(e) => return semantic(e),
    };
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    for part in &comp.parts {
        write_service(&dir.join(format!("{}.json", file_stem(&part.name))), part)?;
    }
    write_service(out, &comp.service)?;
    println!("{} ({} intermediate service(s))", comp.service.name, comp.parts.len());
    Ok(0)
}

/// Composite names contain parentheses and commas; keep file names tame.
fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn method_name(ws: &WebService, method: Option<&str>) -> Option<String> {
    method.map(str::to_string).or_else(|| ws.main_method().map(|m| m.name.clone()))
}

fn simulate(
    cli: &Cli,
    model: &Path,
    method: Option<&str>,
    args: Option<&str>,
    trace_json: Option<&Path>,
) -> Result<u8> {
    let ws = read_service(model)?;
    let reg = registry(cli, model, Some(&ws))?;
    let args = parse_args(args)?;
    let Some(method) = method_name(&ws, method) else {
        return semantic(format!("service `{}` declares no method", ws.name));
    };
    let policy = match cli.policy {
        PolicyArg::Det => Policy::Deterministic,
        PolicyArg::Random => Policy::Random(cli.seed),
    };
    let sim = Simulator::new(&reg).with_depth_limit(cli.depth_limit as usize);
    let result = sim.init_state(&ws, &method, &args, policy).and_then(|st| sim.run(st, cli.max_steps as usize));
    let (state, outcome) = match result {
        Ok(r) => r,
        Err(e) => return semantic(e),
    };
    let mut text = String::new();
    for e in &state.trace {
        let binding: Vec<String> = e.binding.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text.push_str(&format!("{}{} {} {{{}}}\n", "  ".repeat(e.depth), e.service, e.transition, binding.join(", ")));
    }
    text.push_str(&format!("outcome: {outcome:?}\n"));
    emit(cli, &text)?;
    if let Some(path) = trace_json {
        let json = serde_json::to_string_pretty(&state.trace)?;
        fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(match outcome {
        Outcome::Goal => 0,
        Outcome::Deadlock => SEMANTIC,
        Outcome::StepLimit => STEP_LIMIT,
    })
}

fn flat_net(
    cli: &Cli,
    ws: &WebService,
    reg: &Registry,
    method: Option<&str>,
    args: &[Value],
) -> Result<FlatNet, gnet::analysis::AnalysisError> {
    let inlined = inline_isps(ws, reg, cli.depth_limit as usize)?;
    let method =
        method_name(&inlined, method).ok_or_else(|| gnet::analysis::AnalysisError::NoMethod(ws.name.clone()))?;
    flatten_method(&inlined, &method, args)
}

fn export(cli: &Cli, model: &Path, format: Format, method: Option<&str>, args: Option<&str>) -> Result<u8> {
    let text = fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
    let ws = match WebService::from_json(&text) {
        Ok(ws) => ws,
        Err(e) => {
            // an already flattened net can still go to prod
            let flat: FlatNet = match (format, serde_json::from_str(&text)) {
                (Format::Prod, Ok(f)) => f,
                _ => return Err(e).with_context(|| format!("parsing {}", model.display())),
            };
            return match export_prod(&flat) {
                Ok(out) => emit(cli, &out).map(|_| 0),
                Err(e) => semantic(e),
            };
        }
    };
    let out = match format {
        Format::Dot => export_dot(&ws),
        Format::Prod => {
            let reg = registry(cli, model, Some(&ws))?;
            let args = parse_args(args)?;
            let flat = match flat_net(cli, &ws, &reg, method, &args) {
                Ok(f) => f,
                Err(e) => return semantic(e),
            };
            match export_prod(&flat) {
                Ok(out) => out,
                Err(e) => return semantic(e),
            }
        }
    };
    emit(cli, &out)?;
    Ok(0)
}
