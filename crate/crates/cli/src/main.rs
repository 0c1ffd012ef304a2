mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use biharm_core::experiment::simulate;
use biharm_core::formats::{noisy_name, read_farfield, write_farfield, write_outcome};
use biharm_core::{
    add_noise, builtin_example, run_experiment_with, ExperimentConfig, Method, Residuals, ShapeKind,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biharm", version, about = "Biharmonic obstacle scattering and shape reconstruction")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config: a TOML file, or `builtin:N` for N in 1..=4.
    #[arg(long)]
    config: String,
    /// Directory for outputs (overrides the config).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the far-field matrix of the configured scene.
    Simulate(Common),
    /// Compute an indicator field from simulated or supplied far-field data.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Far-field file to use instead of simulating.
        #[arg(long)]
        farfield: Option<PathBuf>,
        /// Indicator method (overrides the config).
        #[arg(long)]
        method: Option<Method>,
    },
    /// Run the built-in invariant checks.
    Validate {
        #[arg(long, value_enum, default_value = "quick")]
        level: validate::Level,
    },
    /// List the shape library.
    Shapes,
}

fn load_config(spec: &str) -> Result<ExperimentConfig> {
    let cfg = match spec.strip_prefix("builtin:") {
        Some(n) => builtin_example(n.parse().with_context(|| format!("bad builtin index {n:?}"))?)?,
        None => ExperimentConfig::load(Path::new(spec)).with_context(|| format!("loading {spec}"))?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common.output_dir.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

fn cmd_simulate(common: &Common) -> Result<()> {
    let cfg = load_config(&common.config)?;
    let dir = output_dir(common, &cfg);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let clean = simulate(&cfg)?;
    let res = Residuals::of(&clean);
    let path = dir.join(&cfg.output.farfield);
    write_farfield(&path, &clean)?;
    println!("wrote {}", path.display());
    println!("unitarity residual   {:.3e}", res.unitarity);
    println!("far-field identity   {:.3e}", res.far_identity);
    if cfg.noise.delta > 0.0 {
        let noisy = add_noise(&clean, cfg.noise.delta, cfg.noise.seed)?;
        let path = dir.join(noisy_name(&cfg.output.farfield));
        write_farfield(&path, &noisy)?;
        println!("wrote {} (delta = {}, seed = {})", path.display(), cfg.noise.delta, cfg.noise.seed);
    }
    Ok(())
}

fn cmd_reconstruct(common: &Common, farfield: Option<&Path>, method: Option<Method>) -> Result<()> {
    let mut cfg = load_config(&common.config)?;
    if let Some(m) = method {
        cfg.reconstruct.method = m;
    }
    let data = farfield
        .map(|p| read_farfield(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let outcome = run_experiment_with(&cfg, data)?;
    let dir = output_dir(common, &cfg);
    let paths = write_outcome(&dir, &outcome)?;
    for p in [&paths.field, &paths.heatmap, &paths.spectrum, &paths.manifest] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_validate(level: validate::Level) -> Result<()> {
    let checks = validate::run(level)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        bail!("{failed} validation check(s) failed");
    }
    Ok(())
}

fn cmd_shapes() {
    for kind in ShapeKind::ALL {
        println!("{:<17} {}", kind.name(), kind.formula());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Simulate(common) => cmd_simulate(common),
        Command::Reconstruct { common, farfield, method } => {
            cmd_reconstruct(common, farfield.as_deref(), *method)
        }
        Command::Validate { level } => cmd_validate(*level),
        Command::Shapes => {
            cmd_shapes();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
