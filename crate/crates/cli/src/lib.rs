//! The `gameseg` command line: configuration, stage orchestration and run
//! artifacts. Everything here is thin plumbing over `gameseg-core`.

pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gameseg_core::glasso::Symmetrization;

pub use config::{KChoice, PipelineConfig};
pub use error::{CliError, Stage};
pub use output::{OutputDir, Run, RunReport};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "GAMESEG_OUT";
pub const DEFAULT_OUT: &str = "gameseg-out";
pub const CONFIG_ECHO_FILE: &str = "config.toml";

#[derive(Debug, Parser)]
#[command(
    name = "gameseg",
    version,
    about = "Segmentation analysis of occupant energy-usage data"
)]
pub struct Cli {
    /// TOML pipeline configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: config `output_dir`, then $GAMESEG_OUT, then ./gameseg-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset CSV file(s); replaces `input` from the config.
    #[arg(long)]
    pub input: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic three-class dataset.
    Synth {
        #[arg(long)]
        players_per_class: Option<usize>,
        #[arg(long)]
        days: Option<usize>,
    },
    /// Validate dataset CSVs and write a canonical copy.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Classes, PCA + k-means clusters, cluster labelling and proportions.
    Segment {
        #[command(flatten)]
        input: InputArgs,
        /// Cluster the rows of a generic numeric CSV instead (no classes or labelling).
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Cluster count or "auto".
        #[arg(long)]
        k: Option<KChoice>,
    },
    /// Sparse dependency graph by neighborhood lasso.
    Glasso {
        #[command(flatten)]
        input: InputArgs,
        /// Generic numeric CSV (header of column names) instead of a dataset.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// `or` or `and`.
        #[arg(long, value_parser = parse_symmetrization)]
        symmetrization: Option<Symmetrization>,
    },
    /// Granger-causality grid per class (and t-tests when configured).
    Causality {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        lag: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Test first differences.
        #[arg(long)]
        difference: bool,
    },
    /// Full pipeline: segment, glasso and causality in one run directory.
    Report {
        #[command(flatten)]
        input: InputArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Ingest { .. } => "ingest",
            Command::Segment { .. } => "segment",
            Command::Glasso { .. } => "glasso",
            Command::Causality { .. } => "causality",
            Command::Report { .. } => "report",
        }
    }
}

fn parse_symmetrization(s: &str) -> Result<Symmetrization, String> {
    match s {
        "or" => Ok(Symmetrization::Or),
        "and" => Ok(Symmetrization::And),
        _ => Err(format!("expected `or` or `and`, got `{s}`")),
    }
}

/// Config file, then flags, then the glasso seed tied to the run seed.
pub fn effective_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let input = match &cli.command {
        Command::Synth {
            players_per_class,
            days,
        } => {
            if let Some(n) = players_per_class {
                cfg.synth.players_per_class = [*n; 3];
            }
            if let Some(d) = days {
                cfg.synth.days = *d;
            }
            None
        }
        Command::Ingest { input } | Command::Report { input } => Some(input),
        Command::Segment { input, matrix, k } => {
            if let Some(k) = k {
                cfg.clustering.k = *k;
            }
            if matrix.is_some() {
                cfg.matrix = matrix.clone();
            }
            Some(input)
        }
        Command::Glasso {
            input,
            matrix,
            symmetrization,
        } => {
            if matrix.is_some() {
                cfg.matrix = matrix.clone();
            }
            if let Some(s) = symmetrization {
                cfg.glasso.options.symmetrization = *s;
            }
            Some(input)
        }
        Command::Causality {
            input,
            lag,
            alpha,
            difference,
        } => {
            if let Some(l) = lag {
                cfg.causality.lag = *l;
            }
            if let Some(a) = alpha {
                cfg.causality.alpha = *a;
            }
            cfg.causality.difference |= *difference;
            Some(input)
        }
    };
    if let Some(input) = input {
        if !input.input.is_empty() {
            cfg.input = input.input.clone();
        }
    }
    cfg.output_dir = Some(match (&cli.out, &cfg.output_dir) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => dir.clone(),
        (None, None) => {
            std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
        }
    });
    cfg.glasso.options.seed = cfg.seed;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one subcommand and returns its report (also written as `report.json`).
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let cfg = effective_config(cli)?;
    let out = OutputDir::create(cfg.output_dir.clone().expect("resolved above"))?;
    let mut run = Run::new(cli.command.name(), cfg.seed, out);
    run.out
        .write_text(Stage::Config, CONFIG_ECHO_FILE, &cfg.to_toml()?)?;

    match &cli.command {
        Command::Synth { .. } => {
            pipeline::synth(&cfg, &mut run)?;
        }
        Command::Ingest { .. } => {
            pipeline::ingest(&cfg, &mut run)?;
        }
        Command::Segment { .. } if cfg.matrix.is_some() => {
            pipeline::segment_matrix(&cfg, &mut run)?;
        }
        Command::Segment { .. } => {
            let table = pipeline::load(&cfg, &mut run, Stage::Segment)?;
            pipeline::segment(&cfg, &table, &mut run)?;
        }
        Command::Glasso { .. } => {
            let table = match cfg.matrix {
                Some(_) => None,
                None => Some(pipeline::load(&cfg, &mut run, Stage::Glasso)?),
            };
            pipeline::glasso(&cfg, table.as_ref(), &mut run)?;
        }
        Command::Causality { .. } => {
            let table = pipeline::load(&cfg, &mut run, Stage::Causality)?;
            let classes =
                gameseg_core::segmentation::assign_classes(&table, cfg.segmentation.orientation)
                    .map_err(|e| CliError::new(Stage::Causality, "assign_classes", e.into()))?;
            pipeline::causality(&cfg, &table, &classes.classes, &mut run)?;
        }
        Command::Report { .. } => {
            let table = pipeline::load(&cfg, &mut run, Stage::Report)?;
            let seg = pipeline::segment(&cfg, &table, &mut run)?;
            pipeline::glasso(&cfg, Some(&table), &mut run)?;
            pipeline::causality(&cfg, &table, &seg.classes.classes, &mut run)?;
        }
    }
    run.finish()
}
