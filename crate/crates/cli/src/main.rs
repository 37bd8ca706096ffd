use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use chronocycle_cli::config::{parse_policy, PipelineConfig, SynthKind, TauGrid};
use chronocycle_cli::pipeline::{self, Complex, DIAGRAM_FILE, EMBEDDING_FILE, REPRESENTATIVES_FILE};
use chronocycle_cli::{exit_code, synth, UsageError};
use clap::{Args, Parser, Subcommand};

/// Time-optimal persistent homology representatives for time series.
#[derive(Parser, Debug)]
#[command(name = "chronocycle", version)]
struct Cli {
    /// TOML configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic series to <out-dir>/series.csv.
    Synth(SynthArgs),
    /// Choose embedding parameters and write <out-dir>/embedding.json.
    Embed(EmbedArgs),
    /// Persistence diagram of the embedding, written to <out-dir>/diagram.json.
    Ph(ComplexArgs),
    /// Optimized representatives, written to <out-dir>/representatives.json.
    Optimize(OptimizeArgs),
    /// Plot tables (diagram.csv, pca.csv, overlay_*.csv) from earlier outputs.
    Export(EmbedArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// noisy_sine or double_sine
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    periods: Option<f64>,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// Series CSV with columns t,value.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    threshold_fraction: Option<f64>,
    /// Number of candidate delays.
    #[arg(long)]
    tau_count: Option<usize>,
}

#[derive(Args, Debug)]
struct ComplexArgs {
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    max_radius: Option<f64>,
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long)]
    max_simplices: Option<usize>,
    #[arg(long)]
    significance: Option<f64>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[command(flatten)]
    complex: ComplexArgs,
    /// full, fraction:<rho> or bound:<eps>
    #[arg(long)]
    policy: Option<String>,
    /// Comma-separated weight kinds: vertex, simplex, length, euclidean.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    /// Comma-separated homology dimensions to optimize.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn apply_complex(cfg: &mut PipelineConfig, a: &ComplexArgs, optimizing: bool) {
    set(&mut cfg.max_dim, a.max_dim);
    if a.max_radius.is_some() {
        cfg.max_radius = a.max_radius;
    }
    if optimizing {
        set(&mut cfg.optimize_subsample, a.subsample);
    } else {
        set(&mut cfg.ph_subsample, a.subsample);
    }
    set(&mut cfg.max_simplices, a.max_simplices);
    if a.significance.is_some() {
        cfg.significance = a.significance;
    }
}

fn apply_embed(cfg: &mut PipelineConfig, a: &EmbedArgs) {
    if a.input.is_some() {
        cfg.input = a.input.clone();
    }
    set(&mut cfg.threshold_fraction, a.threshold_fraction);
    if let Some(n) = a.tau_count {
        cfg.tau_grid = TauGrid::Count(n);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.out_dir, cli.out_dir.clone());
    match &cli.command {
        Command::Synth(a) => {
            if let Some(kind) = &a.kind {
                cfg.synth.kind = match kind.as_str() {
                    "noisy_sine" => SynthKind::NoisySine,
                    "double_sine" => SynthKind::DoubleSine,
                    other => return Err(UsageError(format!("unknown series kind {other:?}")).into()),
                };
            }
            if a.samples.is_some() {
                cfg.synth.samples = a.samples;
            }
            set(&mut cfg.synth.sigma, a.sigma);
            set(&mut cfg.synth.periods, a.periods);
        }
        Command::Embed(a) | Command::Export(a) => apply_embed(&mut cfg, a),
        Command::Ph(a) => apply_complex(&mut cfg, a, false),
        Command::Optimize(a) => {
            apply_complex(&mut cfg, &a.complex, true);
            if let Some(p) = &a.policy {
                cfg.policy = parse_policy(p)?;
            }
            set(&mut cfg.kinds, a.kinds.clone());
            set(&mut cfg.dims, a.dims.clone());
        }
    }
    cfg.validate()?;

    let dir = cfg.out_dir.clone();
    match cli.command {
        Command::Synth(_) => {
            let ts = synth::generate(&cfg.synth, cfg.seed)?;
            let path = dir.join("series.csv");
            pipeline::write_series(&ts, &path)?;
            println!("{}", path.display());
        }
        Command::Embed(_) => {
            let ts = pipeline::read_series(&cfg.input_path())?;
            let report = pipeline::embed(&cfg, &ts)?;
            let path = dir.join(EMBEDDING_FILE);
            pipeline::write_json(&report, &path)?;
            println!("d = {}, tau = {}, {} points -> {}", report.d, report.tau, report.points.len(), path.display());
        }
        Command::Ph(_) => {
            let emb = pipeline::read_json(&dir.join(EMBEDDING_FILE))?;
            let complex = Complex::build(&emb, cfg.ph_subsample, &cfg)?;
            let report = complex.report(&cfg)?;
            let path = dir.join(DIAGRAM_FILE);
            pipeline::write_json(&report, &path)?;
            for s in &report.summary {
                println!(
                    "H{}: {} pairs, {} significant (threshold {})",
                    s.dim, s.pairs, s.significant, s.significance_threshold
                );
            }
        }
        Command::Optimize(_) => {
            let emb = pipeline::read_json(&dir.join(EMBEDDING_FILE))?;
            let complex = Complex::build(&emb, cfg.optimize_subsample, &cfg)?;
            let report = pipeline::representatives(&complex, &cfg)?;
            let path = dir.join(REPRESENTATIVES_FILE);
            pipeline::write_json(&report, &path)?;
            for c in &report.classes {
                println!(
                    "H{} ({}, {}) {}: dispersion {} (initial {}), objective {}{}",
                    c.pair.dim,
                    c.pair.birth,
                    c.pair.death.map_or("inf".into(), |d| d.to_string()),
                    c.kind,
                    c.dispersion,
                    c.initial_dispersion,
                    c.objective,
                    if c.fractional { ", fractional" } else { "" }
                );
            }
        }
        Command::Export(_) => {
            for path in pipeline::export(&cfg)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}
