//! Input states, exact spectral evolution, observables and density carpets.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fock::SymmetricBandMatrix;
use crate::projections::{to_phase_with, PhaseGrid, SpatialBasis, SpatialGrid};
use crate::spectral::EigenDecomposition;

/// Largest Poisson weight a coherent state may lose to truncation.
pub const MAX_TRUNCATION_LOSS: f64 = 1e-12;

/// Fock amplitudes d_n of the field at one propagation distance.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub label: String,
    /// Weight discarded by truncating the basis before renormalisation.
    pub truncation_loss: f64,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, label: impl Into<String>) -> Self {
        StateVector {
            amplitudes,
            label: label.into(),
            truncation_loss: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Σ n |d_n|².
    pub fn mean_mode_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Config(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// ln n! for n = 0..len.
fn log_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 0 {
            acc += (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// Coherent state |α⟩ truncated to `n_max` levels and renormalised.
///
/// Amplitudes are formed in log space; the discarded Poisson tail must stay
/// below [`MAX_TRUNCATION_LOSS`].
pub fn coherent_state(alpha: Complex64, n_max: usize) -> Result<StateVector> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::Domain(format!("alpha = {alpha} is not finite")));
    }
    if n_max == 0 {
        return Err(Error::Config("n_max must be positive".into()));
    }
    let mod_sq = alpha.norm_sqr();
    let label = format!("coherent alpha={alpha}");
    if mod_sq == 0.0 {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_max];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        return Ok(StateVector::new(amplitudes, label));
    }
    let log_mod = alpha.norm().ln();
    let arg = alpha.arg();
    let log_weight = |n: usize, log_fact: f64| -mod_sq + 2.0 * n as f64 * log_mod - log_fact;

    // Poisson tail beyond the basis; terms decay monotonically once n > |α|²
    let mut tail = 0.0;
    let mut log_fact: f64 = log_factorials(n_max + 1)[n_max];
    let mut n = n_max;
    loop {
        let w = log_weight(n, log_fact).exp();
        tail += w;
        if n as f64 > mod_sq && (w == 0.0 || w < 1e-20 * tail) {
            break;
        }
        n += 1;
        log_fact += (n as f64).ln();
    }
    if tail > MAX_TRUNCATION_LOSS {
        return Err(Error::Truncation {
            tail,
            n_max,
            suggested: coherent_basis_size(alpha),
        });
    }

    let log_facts = log_factorials(n_max);
    let mut amplitudes: Vec<Complex64> = (0..n_max)
        .map(|n| Complex64::from_polar((0.5 * log_weight(n, log_facts[n])).exp(), n as f64 * arg))
        .collect();
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amplitudes {
        *a /= norm;
    }
    Ok(StateVector {
        amplitudes,
        label,
        truncation_loss: tail,
    })
}

/// Smallest basis whose coherent-state tail is below [`MAX_TRUNCATION_LOSS`].
pub fn coherent_basis_size(alpha: Complex64) -> usize {
    let mod_sq = alpha.norm_sqr();
    if mod_sq == 0.0 {
        return crate::fock::MIN_N_MAX;
    }
    let log_mod = alpha.norm().ln();
    let upper = mod_sq.ceil() as usize + 64 + (40.0 * alpha.norm()) as usize;
    let log_facts = log_factorials(upper + 1);
    // accumulate the tail from the far end until it becomes significant
    let mut tail = 0.0;
    for k in (0..=upper).rev() {
        tail += (-mod_sq + 2.0 * k as f64 * log_mod - log_facts[k]).exp();
        if tail > MAX_TRUNCATION_LOSS {
            return (k + 1).max(crate::fock::MIN_N_MAX);
        }
    }
    crate::fock::MIN_N_MAX
}

/// Unit vector e_n in an `n_max`-level basis.
pub fn fock_state(n: usize, n_max: usize) -> Result<StateVector> {
    if n >= n_max {
        return Err(Error::Domain(format!(
            "Fock level {n} is outside the basis 0..{n_max}"
        )));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_max];
    amplitudes[n] = Complex64::new(1.0, 0.0);
    Ok(StateVector::new(amplitudes, format!("fock n={n}")))
}

/// Spectral propagator for one initial state: caches the modal amplitudes
/// b_k = Σ_n c_n^(k) d_n(0) so each time sample costs one real-by-complex
/// matrix-vector product.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    decomp: &'a EigenDecomposition,
    modal: Vec<Complex64>,
    label: String,
}

impl<'a> Propagator<'a> {
    pub fn new(decomp: &'a EigenDecomposition, psi0: &StateVector) -> Result<Self> {
        let n = decomp.dim();
        check_dims(n, psi0.dim())?;
        let c = &decomp.coefficients;
        let mut modal = vec![Complex64::new(0.0, 0.0); n];
        for (row, d) in c.rows().into_iter().zip(&psi0.amplitudes) {
            for (b, &ck) in modal.iter_mut().zip(row.iter()) {
                *b += ck * d;
            }
        }
        Ok(Propagator {
            decomp,
            modal,
            label: psi0.label.clone(),
        })
    }

    /// d(t) = C e^{−iEt} Cᵀ d(0).
    pub fn state_at(&self, t: f64) -> StateVector {
        let phased: Vec<Complex64> = self
            .modal
            .iter()
            .zip(&self.decomp.energies)
            .map(|(b, &e)| b * Complex64::from_polar(1.0, -e * t))
            .collect();
        let amplitudes = self
            .decomp
            .coefficients
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(&phased).map(|(&c, p)| p * c).sum())
            .collect();
        StateVector::new(amplitudes, format!("{} t={t}", self.label))
    }
}

pub fn evolve(decomp: &EigenDecomposition, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Ok(Propagator::new(decomp, psi0)?.state_at(t))
}

/// dᴴ A d for a real symmetric operator.
pub fn expectation(psi: &StateVector, op: &SymmetricBandMatrix) -> Result<f64> {
    check_dims(psi.dim(), op.dim())?;
    let d = &psi.amplitudes;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &v) in op.diagonal(0).iter().enumerate() {
        acc += d[i].conj() * d[i] * v;
    }
    for k in 1..=op.bandwidth() {
        for (i, &v) in op.diagonal(k).iter().enumerate() {
            acc += (d[i].conj() * d[i + k] + d[i + k].conj() * d[i]) * v;
        }
    }
    let scale = acc.re.abs().max(1.0);
    debug_assert!(acc.im.abs() <= 1e-12 * scale, "imaginary residue {}", acc.im);
    Ok(acc.re)
}

/// ⟨x̂⟩ for an operator from [`crate::fock::position_operator`].
pub fn position_expectation(psi: &StateVector, x_op: &SymmetricBandMatrix) -> Result<f64> {
    expectation(psi, x_op)
}

/// ⟨x̂(t)⟩ samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(t_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_dims(t_grid.len(), values.len())?;
        if t_grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Config("series contains non-finite values".into()));
        }
        Ok(ObservableSeries { t_grid, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// ⟨x̂(t)⟩ over a time grid, evaluated in parallel.
pub fn position_series(
    decomp: &EigenDecomposition,
    psi0: &StateVector,
    t_grid: &[f64],
) -> Result<ObservableSeries> {
    check_time_grid(t_grid)?;
    let prop = Propagator::new(decomp, psi0)?;
    let x_op = crate::fock::position_operator(decomp.dim())?;
    let values = t_grid
        .par_iter()
        .map(|&t| expectation(&prop.state_at(t), &x_op))
        .collect::<Result<Vec<f64>>>()?;
    ObservableSeries::new(t_grid.to_vec(), values)
}

fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("time grid must be non-empty and finite".into()));
    }
    Ok(())
}

/// `count` samples `start, start + dt, …` (inclusive of `stop` up to rounding).
pub fn time_grid(start: f64, stop: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Config(format!(
            "invalid time range [{start}, {stop}] with step {dt}"
        )));
    }
    let steps = ((stop - start) / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| start + dt * i as f64).collect())
}

/// ‖a − e^{iφ} b‖ with the global phase φ = arg⟨b|a⟩ divided out.
pub fn phase_aligned_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = b.inner(a)?;
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Domain of a carpet.
#[derive(Debug, Clone)]
pub enum CarpetDomain {
    Spatial(SpatialGrid),
    Phase(PhaseGrid),
}

/// Axis metadata stored with a carpet.
#[derive(Debug, Clone, PartialEq)]
pub enum CarpetAxis {
    Spatial(Vec<f64>),
    Phase(PhaseGrid),
}

impl CarpetAxis {
    pub fn name(&self) -> &'static str {
        match self {
            CarpetAxis::Spatial(_) => "x",
            CarpetAxis::Phase(_) => "theta",
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match self {
            CarpetAxis::Spatial(p) => p.clone(),
            CarpetAxis::Phase(g) => g.points(),
        }
    }
}

/// Row scaling applied after the densities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Raw |field|².
    None,
    /// Each row scaled to peak 1.
    #[default]
    PerFrame,
    /// Whole carpet scaled to peak 1.
    Global,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::None => "none",
            Normalization::PerFrame => "per-frame",
            Normalization::Global => "global",
        })
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Normalization::None),
            "per-frame" | "frame" => Ok(Normalization::PerFrame),
            "global" => Ok(Normalization::Global),
            other => Err(format!("unknown normalization `{other}` (none, per-frame, global)")),
        }
    }
}

/// Density map over (time, space) or (time, phase); row `j` is time `t_grid[j]`.
#[derive(Debug, Clone)]
pub struct Carpet {
    pub values: Array2<f64>,
    pub t_grid: Vec<f64>,
    pub axis: CarpetAxis,
    pub normalization: Normalization,
    /// ∫|field|² per row before normalisation.
    pub row_integrals: Vec<f64>,
    /// Per-row factor that was applied (value = raw × scale).
    pub row_scales: Vec<f64>,
}

/// Evolves `psi0` to each time and records |ψ(x,t)|² or |φ(θ,t)|².
pub fn carpet(
    decomp: &EigenDecomposition,
    psi0: &StateVector,
    domain: &CarpetDomain,
    t_grid: &[f64],
    normalization: Normalization,
) -> Result<Carpet> {
    check_time_grid(t_grid)?;
    let prop = Propagator::new(decomp, psi0)?;
    let (rows, weights, axis): (Vec<Vec<f64>>, Vec<f64>, CarpetAxis) = match domain {
        CarpetDomain::Spatial(grid) => {
            let basis = SpatialBasis::new(grid.clone(), decomp.dim());
            let rows = t_grid
                .par_iter()
                .map(|&t| basis.project(&prop.state_at(t).amplitudes).density())
                .collect();
            (rows, grid.weights(), CarpetAxis::Spatial(grid.points().to_vec()))
        }
        CarpetDomain::Phase(grid) => {
            grid.check_alias_free(decomp.dim())?;
            let rows = t_grid
                .par_iter()
                .map_init(FftPlanner::new, |planner, &t| {
                    to_phase_with(&prop.state_at(t).amplitudes, *grid, planner).map(|f| f.density())
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, vec![grid.spacing(); grid.len()], CarpetAxis::Phase(*grid))
        }
    };

    let row_integrals: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(&weights).map(|(v, w)| v * w).sum())
        .collect();
    let peak = |r: &[f64]| r.iter().copied().fold(0.0, f64::max);
    let global_peak = rows.iter().map(|r| peak(r)).fold(0.0, f64::max);
    let row_scales: Vec<f64> = rows
        .iter()
        .map(|r| {
            let p = match normalization {
                Normalization::None => 1.0,
                Normalization::PerFrame => peak(r),
                Normalization::Global => global_peak,
            };
            if p > 0.0 {
                1.0 / p
            } else {
                1.0
            }
        })
        .collect();

    let cols = weights.len();
    let mut values = Array2::zeros((t_grid.len(), cols));
    for (j, (row, s)) in rows.iter().zip(&row_scales).enumerate() {
        for (i, v) in row.iter().enumerate() {
            values[[j, i]] = v * s;
        }
    }
    Ok(Carpet {
        values,
        t_grid: t_grid.to_vec(),
        axis,
        normalization,
        row_integrals,
        row_scales,
    })
}
