use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use talbot_core::dispersive::{dispersive_coefficients, model_fidelity_series, DispersiveCoefficients};
use talbot_core::fock::{build_hamiltonian, TruncationSpec};
use talbot_core::io::csv::{
    carpet_axis_table, carpet_rows_table, carpet_table, revival_table, series_table, spectrum_table,
    write_atomic,
};
use talbot_core::io::raster::{write_polar_raster, write_raster, Colormap, PolarOptions};
use talbot_core::io::{write_csv, RunConfig, Table};
use talbot_core::projections::{to_phase, to_spatial, PhaseGrid, SpatialGrid};
use talbot_core::propagation::{
    carpet as build_carpet, coherent_basis_size, coherent_state, position_series, time_grid, CarpetDomain,
    StateVector,
};
use talbot_core::spectral::{converge_spectrum, diagonalize, spectrum_sweep};
use talbot_core::talbot::{detect_revival, envelope};
use talbot_core::{selftest as checks, EigenDecomposition};

/// Half-width of the default carpet windows around the (half) revival.
const WINDOW_HALF_WIDTH: f64 = 12.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarpetKind {
    Spatial,
    Phase,
}

impl CarpetKind {
    fn name(self) -> &'static str {
        match self {
            CarpetKind::Spatial => "spatial",
            CarpetKind::Phase => "phase",
        }
    }
}

pub fn parse_window(text: &str) -> Result<(f64, f64)> {
    let parsed = text
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)));
    match parsed {
        Some((a, b)) if a.is_finite() && b.is_finite() && a <= b => Ok((a, b)),
        _ => bail!("--window expects START,STOP with START <= STOP (got `{text}`)"),
    }
}

fn write_table(table: &Table, dir: &Path, name: &str) -> Result<()> {
    let path = dir.join(name);
    write_csv(table, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_text(text: &str, dir: &Path, name: &str) -> Result<()> {
    let path = dir.join(name);
    write_atomic(&path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Eigendecomposition at the configured size, or converged for levels `0..=k_max`.
fn decomposition(cfg: &RunConfig, k_max: usize) -> Result<EigenDecomposition> {
    Ok(match cfg.n_max {
        Some(n) => diagonalize(&build_hamiltonian(TruncationSpec::new(n)?, cfg.lambda)?, cfg.lambda)?,
        None => converge_spectrum(cfg.lambda, k_max, cfg.tol)?.decomposition,
    })
}

fn initial_state(cfg: &RunConfig) -> Result<(EigenDecomposition, StateVector)> {
    let decomp = decomposition(cfg, coherent_basis_size(cfg.alpha))?;
    let psi0 = coherent_state(cfg.alpha, decomp.dim())?;
    Ok((decomp, psi0))
}

fn run_header(cfg: &RunConfig, n_max: usize) -> String {
    format!(
        "lambda = {:?}\nalpha = {}{:+}i\nn_max = {n_max}\n",
        cfg.lambda, cfg.alpha.re, cfg.alpha.im
    )
}

pub fn spectrum(cfg: &RunConfig) -> Result<()> {
    let steps = cfg.lambda_steps;
    let grid: Vec<f64> = (0..steps)
        .map(|i| cfg.lambda_max * i as f64 / (steps - 1) as f64)
        .collect();
    let sweep = spectrum_sweep(&grid, cfg.levels, cfg.tol)?;
    write_table(&spectrum_table(&sweep), &cfg.out, "spectrum.csv")?;
    let largest = sweep.n_max.iter().max().copied().unwrap_or(0);
    println!("{} lambda points, {} levels, largest basis {largest}", grid.len(), cfg.levels);
    Ok(())
}

pub fn modes(cfg: &RunConfig) -> Result<()> {
    let k_max = cfg.modes.iter().copied().max().unwrap_or(0);
    let decomp = decomposition(cfg, k_max)?;
    if k_max >= decomp.dim() {
        bail!("mode {k_max} is outside the basis of {} states", decomp.dim());
    }
    let spatial = SpatialGrid::uniform(cfg.spatial_extent, cfg.spatial_points)?;
    let phase = PhaseGrid::new(cfg.phase_points)?;

    let mut sp_header = vec!["x".to_string()];
    let mut ph_header = vec!["theta".to_string()];
    let mut energies = Table::new(["k", "E"]);
    let mut sp_cols = Vec::new();
    let mut ph_cols = Vec::new();
    for &k in &cfg.modes {
        let amps: Vec<Complex64> = decomp
            .coefficients
            .column(k)
            .iter()
            .map(|&c| Complex64::new(c, 0.0))
            .collect();
        sp_header.push(format!("phi{k}"));
        ph_header.push(format!("re{k}"));
        ph_header.push(format!("im{k}"));
        sp_cols.push(to_spatial(&amps, &spatial).samples);
        ph_cols.push(to_phase(&amps, phase)?.samples);
        energies.push_numbers([k as f64, decomp.energies[k]]);
    }

    let mut sp = Table::new(sp_header);
    for (i, x) in spatial.points().iter().enumerate() {
        let mut row = vec![*x];
        row.extend(sp_cols.iter().map(|c| c[i].re));
        sp.push_numbers(row);
    }
    let mut ph = Table::new(ph_header);
    for (j, theta) in phase.points().iter().enumerate() {
        let mut row = vec![*theta];
        for c in &ph_cols {
            row.push(c[j].re);
            row.push(c[j].im);
        }
        ph.push_numbers(row);
    }
    write_table(&energies, &cfg.out, "modes_energies.csv")?;
    write_table(&sp, &cfg.out, "modes_spatial.csv")?;
    write_table(&ph, &cfg.out, "modes_phase.csv")?;
    Ok(())
}

pub fn propagate(cfg: &RunConfig) -> Result<()> {
    let (decomp, psi0) = initial_state(cfg)?;
    let coeffs = dispersive_coefficients(cfg.lambda)?;
    let t = time_grid(0.0, cfg.t_max, cfg.dt)?;
    let series = position_series(&decomp, &psi0, &t)?;
    let env = envelope(&series, coeffs.a1)?;
    let report = detect_revival(&series, &coeffs, cfg.thresholds)?;

    write_table(&series_table(&series, "x_expect"), &cfg.out, "x_expect.csv")?;
    write_table(&series_table(&env, "envelope"), &cfg.out, "envelope.csv")?;
    let text = run_header(cfg, decomp.dim()) + &report.to_key_value();
    write_text(&text, &cfg.out, "revival_report.txt")?;
    write_table(&revival_table(&report), &cfg.out, "revival_report.csv")?;

    println!("initial amplitude {:.6}", report.amplitude0);
    match report.collapse_window {
        Some((a, b)) => println!("collapse window [{a:.2}, {b:.2}]"),
        None => println!("no collapse detected"),
    }
    match (report.first_revival(), report.revival_fidelities.first()) {
        (Some(t), Some(f)) => println!("first revival t = {t:.2} (envelope {:.1}% of initial)", 100.0 * f),
        _ => println!("no revival detected"),
    }
    if let Some(p) = report.predicted_t_rev {
        println!("dispersive-model revival period {p:.2}");
    }
    Ok(())
}

fn default_windows(coeffs: &DispersiveCoefficients) -> Vec<(f64, f64)> {
    let mut windows = vec![(0.0, 2.0 * WINDOW_HALF_WIDTH)];
    if let Some(p) = coeffs.revival_period() {
        for centre in [0.5 * p, p] {
            windows.push((centre - WINDOW_HALF_WIDTH, centre + WINDOW_HALF_WIDTH));
        }
    }
    windows
}

pub fn carpet(cfg: &RunConfig, kinds: &[CarpetKind], windows: &[(f64, f64)], polar: bool) -> Result<()> {
    let (decomp, psi0) = initial_state(cfg)?;
    let coeffs = dispersive_coefficients(cfg.lambda)?;
    let windows = if windows.is_empty() {
        default_windows(&coeffs)
    } else {
        windows.to_vec()
    };
    let out = &cfg.out;
    let mut summary = run_header(cfg, decomp.dim());

    for &kind in kinds {
        let domain = match kind {
            CarpetKind::Spatial => {
                CarpetDomain::Spatial(SpatialGrid::uniform(cfg.spatial_extent, cfg.spatial_points)?)
            }
            CarpetKind::Phase => CarpetDomain::Phase(PhaseGrid::new(cfg.phase_points)?),
        };
        for (i, &(start, stop)) in windows.iter().enumerate() {
            let t = time_grid(start, stop, cfg.dt)?;
            let c = build_carpet(&decomp, &psi0, &domain, &t, cfg.normalization)
                .with_context(|| format!("{} carpet on [{start}, {stop}]", kind.name()))?;
            let stem = format!("carpet_{}_w{i}", kind.name());
            if i == 0 {
                write_table(&carpet_axis_table(&c.axis), out, &format!("carpet_{}_axis.csv", kind.name()))?;
            }
            write_table(&carpet_table(&c), out, &format!("{stem}.csv"))?;
            write_table(&carpet_rows_table(&c), out, &format!("{stem}_rows.csv"))?;
            for cmap in [Colormap::Gray, Colormap::Viridis] {
                let path = out.join(format!("{stem}.{}", cmap.extension()));
                write_raster(&c, &path, cmap)?;
                println!("wrote {}", path.display());
            }
            let _ = writeln!(summary, "{stem} = {start:?},{stop:?}");
        }
    }

    if polar {
        let domain = CarpetDomain::Phase(PhaseGrid::new(cfg.phase_points)?);
        let radius_px = (cfg.polar_size / 2).max(1);
        let step = cfg.dt.max(cfg.t_max / radius_px as f64);
        let rows = (cfg.t_max / step + 1e-9).floor() as usize;
        let t: Vec<f64> = (0..=rows).map(|k| k as f64 * step).collect();
        let c = build_carpet(&decomp, &psi0, &domain, &t, cfg.normalization)?;
        write_table(&carpet_table(&c), out, "carpet_phase_polar.csv")?;
        write_table(&carpet_rows_table(&c), out, "carpet_phase_polar_rows.csv")?;
        let options = PolarOptions { size: cfg.polar_size };
        for cmap in [Colormap::Gray, Colormap::Viridis] {
            let path = out.join(format!("carpet_phase_polar.{}", cmap.extension()));
            write_polar_raster(&c, &path, options, cmap)?;
            println!("wrote {}", path.display());
        }
        let _ = writeln!(summary, "carpet_phase_polar = 0.0,{:?}", t.last().copied().unwrap_or(0.0));
    }
    write_text(&summary, out, "carpet_windows.txt")?;
    Ok(())
}

pub fn dispersive(cfg: &RunConfig) -> Result<()> {
    let (decomp, psi0) = initial_state(cfg)?;
    let coeffs = dispersive_coefficients(cfg.lambda)?;
    let t = time_grid(0.0, cfg.t_max, cfg.dt)?;
    let fid = model_fidelity_series(&decomp, &psi0, &coeffs, &t)?;
    let mut table = Table::new(["t", "fidelity"]);
    for (a, b) in t.iter().zip(&fid) {
        table.push_numbers([*a, *b]);
    }
    write_table(&table, &cfg.out, "dispersive.csv")?;
    let mut text = run_header(cfg, decomp.dim());
    let _ = writeln!(text, "a1 = {:?}", coeffs.a1);
    let _ = writeln!(text, "a2 = {:?}", coeffs.a2);
    let _ = writeln!(text, "constant_offset = {:?}", coeffs.constant_offset);
    let period = coeffs.revival_period();
    let _ = writeln!(text, "t_rev = {}", period.map_or("none".into(), |p| format!("{p:?}")));
    write_text(&text, &cfg.out, "dispersive_coefficients.txt")?;

    let worst = fid.iter().copied().fold(1.0, f64::min);
    println!("a1 = {}, a2 = {}", coeffs.a1, coeffs.a2);
    println!("fidelity at t = {}: {:.6}; minimum {:.6}", t.last().unwrap(), fid.last().unwrap(), worst);
    Ok(())
}

/// Prints one line per check; `Ok(false)` if any failed.
pub fn selftest() -> Result<bool> {
    let results = checks::run()?;
    let mut ok = true;
    for c in &results {
        println!("{c}");
        ok &= c.passed();
    }
    println!("{} of {} checks passed", results.iter().filter(|c| c.passed()).count(), results.len());
    Ok(ok)
}
