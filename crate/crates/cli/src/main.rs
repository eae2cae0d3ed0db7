//! `talbot`: spectra, modes, propagation, carpets and revival analysis for
//! the quartic-anharmonic waveguide.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use talbot_core::io::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "talbot", version, about, long_about = None)]
#[command(after_help = DEFAULTS_HELP)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (default: `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Reserved; all computations are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cap on worker threads for parallel sweeps and carpet rows.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

const DEFAULTS_HELP: &str = "\
Configuration keys and defaults (set in --config or with the matching flag):
  lambda = 0.01            alpha = 0+4i           n_max = 128 (or auto)
  tol = 1e-9               spatial_extent = 12    spatial_points = 512
  phase_points = 512       t_max = 600            dt = 0.05
  lambda_max = 0.5         lambda_steps = 51      levels = 12
  modes = 0,1,2,3          normalization = per-frame
  collapse_threshold = 0.1 revival_threshold = 0.5
  polar_size = 1024        out = out";

/// Physics and grid settings shared by the subcommands.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Anharmonicity λ ≥ 0.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Coherent amplitude, e.g. `0+4i`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Basis size, or `auto` to converge it.
    #[arg(long)]
    n_max: Option<String>,
    /// Energy tolerance for `n_max = auto`.
    #[arg(long)]
    tol: Option<String>,
    /// Final propagation time.
    #[arg(long)]
    t_max: Option<String>,
    /// Time step.
    #[arg(long)]
    dt: Option<String>,
    /// Spatial grid half-width.
    #[arg(long)]
    spatial_extent: Option<String>,
    /// Spatial grid points.
    #[arg(long)]
    spatial_points: Option<String>,
    /// Phase grid points M.
    #[arg(long)]
    phase_points: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        [
            ("lambda", &self.lambda),
            ("alpha", &self.alpha),
            ("n_max", &self.n_max),
            ("tol", &self.tol),
            ("t_max", &self.t_max),
            ("dt", &self.dt),
            ("spatial_extent", &self.spatial_extent),
            ("spatial_points", &self.spatial_points),
            ("phase_points", &self.phase_points),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest eigenvalues over a λ sweep (spectrum.csv).
    Spectrum {
        #[command(flatten)]
        common: Overrides,
        /// Largest λ of the sweep (the sweep starts at 0).
        #[arg(long)]
        lambda_max: Option<String>,
        /// Number of λ points.
        #[arg(long)]
        lambda_steps: Option<String>,
        /// Number of levels per λ.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Eigenmodes in space and phase for selected k.
    Modes {
        #[command(flatten)]
        common: Overrides,
        /// Comma-separated mode indices.
        #[arg(long)]
        modes: Option<String>,
    },
    /// ⟨x(t)⟩, its envelope and the revival report.
    Propagate {
        #[command(flatten)]
        common: Overrides,
        #[arg(long)]
        collapse_threshold: Option<String>,
        #[arg(long)]
        revival_threshold: Option<String>,
    },
    /// Density carpets as CSV, PGM and PPM.
    Carpet {
        #[command(flatten)]
        common: Overrides,
        #[arg(long, value_enum, default_value_t = Domain::Both)]
        domain: Domain,
        /// Also render the phase carpet over [0, t_max] on a disk.
        #[arg(long)]
        polar: bool,
        /// Time window `START,STOP`; repeatable. Defaults to the start, the
        /// half revival and the full revival.
        #[arg(long, value_name = "START,STOP")]
        window: Vec<String>,
        /// Row normalization: none, per-frame, global.
        #[arg(long)]
        normalization: Option<String>,
        /// Polar image side length in pixels.
        #[arg(long)]
        polar_size: Option<String>,
    },
    /// Fidelity of the dispersive model against full evolution.
    Dispersive {
        #[command(flatten)]
        common: Overrides,
    },
    /// Runs the built-in oracle checks.
    Selftest,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    Spatial,
    Phase,
    Both,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            talbot_core::io::parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    let extra: Vec<(&str, &Option<String>)> = match &cli.command {
        Command::Spectrum {
            common: c,
            lambda_max,
            lambda_steps,
            levels,
        } => {
            pairs.extend(c.pairs());
            vec![
                ("lambda_max", lambda_max),
                ("lambda_steps", lambda_steps),
                ("levels", levels),
            ]
        }
        Command::Modes { common: c, modes } => {
            pairs.extend(c.pairs());
            vec![("modes", modes)]
        }
        Command::Propagate {
            common: c,
            collapse_threshold,
            revival_threshold,
        } => {
            pairs.extend(c.pairs());
            vec![
                ("collapse_threshold", collapse_threshold),
                ("revival_threshold", revival_threshold),
            ]
        }
        Command::Carpet {
            common: c,
            normalization,
            polar_size,
            ..
        } => {
            pairs.extend(c.pairs());
            vec![("normalization", normalization), ("polar_size", polar_size)]
        }
        Command::Dispersive { common: c } => {
            pairs.extend(c.pairs());
            vec![]
        }
        Command::Selftest => vec![],
    };
    pairs.extend(extra.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))));
    for (key, value) in pairs {
        cfg.set(key, value)
            .map_err(|m| anyhow::anyhow!("--{}: {m}", key.replace('_', "-")))?;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.validate().map_err(|e| match e {
        talbot_core::Error::Parse { key, message, .. } => {
            anyhow::anyhow!("invalid `{key}`: {message}")
        }
        other => other.into(),
    })?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    if matches!(cli.command, Command::Selftest) {
        return commands::selftest();
    }
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Spectrum { .. } => commands::spectrum(&cfg)?,
        Command::Modes { .. } => commands::modes(&cfg)?,
        Command::Propagate { .. } => commands::propagate(&cfg)?,
        Command::Carpet {
            domain,
            polar,
            window,
            ..
        } => {
            let windows = window
                .iter()
                .map(|w| commands::parse_window(w))
                .collect::<Result<Vec<_>>>()?;
            if *polar && *domain == Domain::Spatial {
                bail!("--polar needs the phase domain");
            }
            let domains: &[commands::CarpetKind] = match domain {
                Domain::Spatial => &[commands::CarpetKind::Spatial],
                Domain::Phase => &[commands::CarpetKind::Phase],
                Domain::Both => &[commands::CarpetKind::Spatial, commands::CarpetKind::Phase],
            };
            commands::carpet(&cfg, domains, &windows, *polar)?
        }
        Command::Dispersive { .. } => commands::dispersive(&cfg)?,
        Command::Selftest => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
