use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use eigenbeam::{parse_config, ExperimentConfig};
use eigenbeam_cli::{run_all, run_equivalence, run_patterns, run_sinr_map, run_svd_report};

#[derive(Parser)]
#[command(name = "eigenbeam", version, about = "Eigenbeam experiments for coherent hybrid massive MIMO")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Rank budget t (overrides the config).
    #[arg(long, global = true)]
    rank: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Singular values and cumulative power of the long-term channel.
    SvdReport,
    /// Digital vs hybrid downlink residuals per subband.
    Equivalence {
        /// Zero the first eigenbeam to check that the gate fails.
        #[arg(long)]
        perturb_beams: bool,
    },
    /// Eigenbeam patterns and element power maps.
    Patterns,
    /// Network SINR map.
    SinrMap,
    /// Run every command.
    All,
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.channel.seed = seed;
    }
    if let Some(rank) = cli.rank {
        cfg.analysis.rank_budget = rank;
    }
    if let Command::Equivalence { perturb_beams: true } = cli.command {
        cfg.analysis.perturb_beams = true;
    }
    cfg.validate()?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    Ok((cfg, out))
}

fn run(cli: &Cli) -> Result<bool> {
    let (cfg, out) = load(cli)?;
    let passed = match cli.command {
        Command::SvdReport => {
            let r = run_svd_report(&cfg, &out)?;
            println!("L = {}, N = {}", r.locations, r.elements);
            for t in eigenbeam_cli::REPORT_RANKS {
                if let Some(f) = r.profile.at_rank(t) {
                    println!("power captured by rank {t}: {f:.4}");
                }
            }
            r.passed
        }
        Command::Equivalence { .. } => {
            let r = run_equivalence(&cfg, &out)?;
            for o in &r.sweep {
                println!("t = {}: max residual {:.3e}", o.rank, o.max_residual);
            }
            println!(
                "rank {}: max residual {:.3e} -> {}",
                r.primary.rank,
                r.primary.max_residual,
                if r.passed { "PASS" } else { "FAIL" }
            );
            r.passed
        }
        Command::Patterns => {
            let r = run_patterns(&cfg, &out)?;
            for (j, (az, el)) in r.peaks.iter().enumerate() {
                println!("beam {}: peak at azimuth {az}°, elevation {el}°", j + 1);
            }
            r.passed
        }
        Command::SinrMap => {
            let r = run_sinr_map(&cfg, &out)?;
            println!("{} points, max SINR - SNR = {:.3e} dB", r.points, r.max_sinr_minus_snr);
            r.passed
        }
        Command::All => run_all(&cfg, &out)?,
    };
    println!("outputs in {}", out.display());
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
