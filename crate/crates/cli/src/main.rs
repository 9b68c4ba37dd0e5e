//! `hartogs`: verification suites, phase scans and witnesses on generalized
//! Hartogs triangles.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! configuration or I/O errors. Reports are only written once a command has run to
//! completion.

mod config;
mod output;
mod probes;
mod scan;
mod verify;
mod witness;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Rat, RunConfig};
use output::Outputs;

#[derive(Parser, Debug)]
#[command(name = "hartogs", version, about = "Bergman kernels and Toeplitz phase diagrams on generalized Hartogs triangles")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report files.
    #[arg(long, global = true, default_value = "hartogs-out")]
    out: PathBuf,
    /// Seed for every stochastic step (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "HARTOGS_THREADS")]
    threads: Option<usize>,
    /// Per-suite tolerance override, `suite=value`; repeatable.
    #[arg(long = "tolerance", global = true, value_name = "SUITE=VALUE")]
    tolerances: Vec<String>,
    /// Ball block sizes, comma separated (overrides the config).
    #[arg(long, global = true, value_delimiter = ',')]
    partition: Option<Vec<usize>>,
    /// Dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Exponent of the Hartogs condition.
    #[arg(long, global = true)]
    b: Option<i64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the basis, kernel, Green-function and integral-estimate suites.
    Verify,
    /// Scan a (p, q, t) grid and compare with the exact verdict.
    PhaseScan {
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<Rat>>,
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<Rat>>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<Rat>>,
        /// Minimum agreement fraction for exit status 0.
        #[arg(long)]
        agreement: Option<f64>,
    },
    /// Regime-1 inner-product table or regime-3 shell sequence.
    Witness {
        /// `1` or `3`.
        #[arg(long)]
        regime: Option<String>,
        #[arg(long)]
        p: Option<Rat>,
        #[arg(long)]
        q: Option<Rat>,
        #[arg(long)]
        t: Option<Rat>,
        /// Last index of the shell sequence.
        #[arg(long)]
        j: Option<usize>,
    },
    /// Evaluate the Bergman kernel in closed form and by its series.
    Kernel {
        /// Point of the domain, e.g. `0.1,0.5` or `0.1+0.2i,0.5`.
        #[arg(long)]
        z: String,
        /// Second point; defaults to `z`.
        #[arg(long)]
        w: Option<String>,
        #[arg(long, default_value_t = 60)]
        bound: u32,
    },
    /// Export a quadrature or Monte Carlo sample set on the product domain.
    Samples {
        /// `grid` or `montecarlo`.
        #[arg(long, default_value = "grid")]
        kind: String,
        #[arg(long, default_value_t = 8)]
        radial: usize,
        #[arg(long, default_value_t = 16)]
        angular: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
}

fn prepare(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = &cli.partition {
        cfg.domain.partition = p.clone();
    }
    if let Some(n) = cli.n {
        cfg.domain.n = n;
    }
    if let Some(b) = cli.b {
        cfg.domain.b = b;
    }
    cfg.apply_tolerances(&cli.tolerances)?;
    match &cli.command {
        Command::PhaseScan { p, q, t, agreement } => {
            let s = &mut cfg.phase_scan;
            if let Some(v) = p {
                s.ps = v.clone();
            }
            if let Some(v) = q {
                s.qs = v.clone();
            }
            if let Some(v) = t {
                s.ts = v.clone();
            }
            if let Some(a) = agreement {
                s.agreement = *a;
            }
            scan::scan_config(&cfg)?;
        }
        Command::Witness { regime, p, q, t, j } => {
            let w = &mut cfg.witness;
            if let Some(r) = regime {
                w.regime = r.clone();
            }
            if let Some(v) = p {
                w.p = *v;
            }
            if let Some(v) = q {
                w.q = *v;
            }
            if let Some(v) = t {
                w.t = *v;
            }
            if let Some(v) = j {
                w.j_max = *v;
            }
            witness::parse_regime(&w.regime)?;
        }
        _ => {}
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            anyhow::bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = prepare(cli)?;
    let spec = cfg.domain.build()?;
    let mut out = Outputs::default();
    let pass = match &cli.command {
        Command::Verify => verify::run(&spec, &cfg, &mut out),
        Command::PhaseScan { .. } => scan::run(&spec, &cfg, &mut out),
        Command::Witness { .. } => witness::run(&spec, &cfg, &mut out),
        Command::Kernel { z, w, bound } => probes::kernel(&spec, z, w.as_deref(), *bound, &mut out),
        Command::Samples { kind, radial, angular, count } => probes::samples(&spec, kind, *radial, *angular, *count, cfg.seed, &mut out),
    }?;
    out.commit(&cli.out)?;
    for name in out.names() {
        println!("wrote {}", cli.out.join(name).display());
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
