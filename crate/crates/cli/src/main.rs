use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hasimoto::harness::{load_tangent_file, run_experiment, Preset, RunConfig};
use log::info;
use toml::{Table, Value};

#[derive(Parser, Debug)]
#[command(
    name = "hasimoto",
    version,
    about = "Schrödinger map experiments via the Hasimoto transform"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate to t_end and write the final state and invariants.
    Simulate(RunArgs),
    /// Step-size sweep against a reference solution.
    Converge(RunArgs),
    /// Time series of E, I, mass and frame defects.
    Conserve(RunArgs),
    /// Reconstruct the vortex filament X(t, x).
    Filament(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML file with RunConfig keys; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// smooth, rough, circle or file
    #[arg(long)]
    preset: Option<String>,
    /// Tangent samples (x y z per line) for `--preset file`.
    #[arg(long)]
    input_file: Option<PathBuf>,
    /// scheme_a_2, scheme_a_4 or scheme_b
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    n_modes: Option<usize>,
    /// Time step; the largest step of a convergence sweep.
    #[arg(long)]
    step: Option<f64>,
    /// Number of halvings of `--step` in converge mode.
    #[arg(long)]
    sweep: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Write every k-th time level of time series.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    ref_step: Option<f64>,
    #[arg(long)]
    ref_scheme: Option<String>,
    #[arg(long)]
    ref_n_modes: Option<usize>,
    /// Fixed-point tolerance of the low-regularity scheme.
    #[arg(long)]
    fp_tol: Option<f64>,
    #[arg(long)]
    fp_max_iters: Option<usize>,
    /// Worker threads (0 or unset: all cores).
    #[arg(long, env = "HASIMOTO_THREADS")]
    threads: Option<usize>,
}

fn set(table: &mut Table, key: &str, value: Option<Value>) {
    if let Some(v) = value {
        table.insert(key.to_string(), v);
    }
}

fn int(n: Option<usize>) -> Option<Value> {
    n.map(|n| Value::Integer(n as i64))
}

fn path(p: &Option<PathBuf>) -> Option<Value> {
    p.as_ref()
        .map(|p| Value::String(p.to_string_lossy().into_owned()))
}

fn build_config(mode: &str, args: &RunArgs) -> Result<RunConfig> {
    let mut table = match &args.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            text.parse::<Table>()
                .with_context(|| format!("parsing {}", p.display()))?
        }
        None => Table::new(),
    };
    if let Some(m) = table.get("mode").and_then(Value::as_str) {
        if m != mode {
            log::warn!("config file mode `{m}` overridden by subcommand `{mode}`");
        }
    }
    table.insert("mode".into(), Value::String(mode.into()));
    set(&mut table, "preset", args.preset.clone().map(Value::String));
    set(&mut table, "input_file", path(&args.input_file));
    set(&mut table, "scheme", args.scheme.clone().map(Value::String));
    set(&mut table, "n_modes", int(args.n_modes));
    set(&mut table, "step", args.step.map(Value::Float));
    set(&mut table, "sweep", int(args.sweep));
    set(&mut table, "t_end", args.t_end.map(Value::Float));
    set(&mut table, "out", path(&args.out));
    set(&mut table, "format", args.format.clone().map(Value::String));
    set(&mut table, "stride", int(args.stride));
    set(&mut table, "fp_tol", args.fp_tol.map(Value::Float));
    set(&mut table, "fp_max_iters", int(args.fp_max_iters));

    let reference = table
        .entry("reference")
        .or_insert_with(|| Value::Table(Table::new()))
        .as_table_mut()
        .context("`reference` must be a table")?;
    set(reference, "step", args.ref_step.map(Value::Float));
    set(
        reference,
        "scheme",
        args.ref_scheme.clone().map(Value::String),
    );
    set(reference, "n_modes", int(args.ref_n_modes));

    let mut cfg: RunConfig = Value::Table(table.clone())
        .try_into()
        .context("invalid configuration")?;
    if cfg.preset == Preset::File && !table.contains_key("n_modes") {
        if let Some(p) = &cfg.input_file {
            // The grid size of a sample file is its row count.
            cfg.n_modes = load_tangent_file(p)?.len();
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(feature = "parallel")]
fn init_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_threads(n: Option<usize>) -> Result<()> {
    if n.is_some_and(|n| n > 1) {
        log::warn!("built without the `parallel` feature; running on one thread");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (mode, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Converge(a) => ("converge", a),
        Command::Conserve(a) => ("conserve", a),
        Command::Filament(a) => ("filament", a),
    };
    init_threads(args.threads)?;
    let cfg = build_config(mode, args)?;
    info!(
        "{mode}: preset {} scheme {} N = {} h = {}",
        cfg.preset,
        cfg.scheme.name(),
        cfg.n_modes,
        cfg.step
    );
    let summary = run_experiment(&cfg)?;
    for f in &summary.files {
        println!("{}", f.display());
    }
    println!("{}", summary.manifest_path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
