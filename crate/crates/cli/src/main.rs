use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use massgeom_cli::profile::{profile_csv, radii, Quantity};
use massgeom_cli::registry::parse_instances;
use massgeom_cli::suites::registry_for;
use massgeom_cli::{describe, run, CliError, CliResult, Format, SuiteConfig, SuiteId};

/// Verify mass functionals and geometric inequalities on metric instances.
#[derive(Parser)]
#[command(name = "massgeom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write its report.
    Run(RunArgs),
    /// Summarize an instance file with its closed-form data.
    Describe { file: PathBuf },
    /// List the registered instances.
    List {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write a CSV profile of a radial quantity for an instance (registry id or file).
    Profile(ProfileArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    suite: Option<SuiteId>,
    /// TOML (or .json) config; defaults to $MASSGEOM_CONFIG_DIR/massgeom.toml when present.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Tolerance applied to every check without a per-check override.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ProfileArgs {
    instance: String,
    #[arg(long, value_enum, default_value = "partial-mass")]
    quantity: Quantity,
    #[arg(long, default_value_t = 1.0)]
    r_min: f64,
    #[arg(long, default_value_t = 100.0)]
    r_max: f64,
    #[arg(long, default_value_t = 40)]
    points: usize,
    #[arg(long, default_value_t = 8)]
    degree: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<bool> {
    match cmd {
        Command::Run(args) => run_command(args),
        Command::Describe { file } => {
            emit(&describe::describe_file(&file)?, None)?;
            Ok(true)
        }
        Command::List { config } => {
            let cfg = SuiteConfig::load(config.as_deref())?;
            let mut text = String::new();
            for inst in registry_for(&cfg)?.instances() {
                let family = serde_json::to_value(inst.family()).ok();
                let family = family.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
                text.push_str(&format!("{}\t{family}\tn={}\n", inst.id, inst.n()));
            }
            emit(&text, None)?;
            Ok(true)
        }
        Command::Profile(args) => {
            let cfg = SuiteConfig::load(args.config.as_deref())?;
            let path = Path::new(&args.instance);
            let inst = if path.is_file() {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                parse_instances(&args.instance, &text)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| CliError::UnknownInstance(args.instance.clone()))?
            } else {
                registry_for(&cfg)?
                    .get(&args.instance)
                    .cloned()
                    .ok_or_else(|| CliError::UnknownInstance(args.instance.clone()))?
            };
            let csv = profile_csv(&inst, args.quantity, &radii(args.r_min, args.r_max, args.points)?, args.degree)?;
            emit(&csv, args.out.as_deref())?;
            Ok(true)
        }
    }
}

fn run_command(args: RunArgs) -> CliResult<bool> {
    let mut cfg = SuiteConfig::load(args.config.as_deref())?;
    if let Some(s) = args.suite {
        cfg.suite = s;
    }
    if let Some(n) = args.n {
        cfg.dims = n.clone();
        cfg.lam_dims = n;
    }
    if let Some(t) = args.tol {
        cfg.tolerance = Some(t);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(o) = args.out {
        cfg.out = Some(o);
    }
    cfg.validate()?;
    let report = run(&cfg)?;
    emit(&report.render(cfg.format)?, cfg.out.as_deref())?;
    if cfg.out.is_some() || cfg.format != Format::Table {
        eprintln!("{}", report.summary_line());
    }
    Ok(report.all_pass())
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
            _ => Ok(()),
        },
    }
}
