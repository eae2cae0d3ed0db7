//! Spatial (Hermite–Gauss) and phase (Hardy boundary) views of Fock
//! amplitude vectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Extra half-width beyond the classical turning point √(2 n_max).
pub const SPATIAL_MARGIN: f64 = 8.0;

/// Ascending sample positions in oscillator units.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    points: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config("spatial grid needs at least 2 points".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("spatial grid has non-finite points".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("spatial grid must be strictly ascending".into()));
        }
        Ok(SpatialGrid { points })
    }

    /// `count` equispaced points on `[-extent, extent]`.
    pub fn uniform(extent: f64, count: usize) -> Result<Self> {
        if !(extent > 0.0) || count < 2 {
            return Err(Error::Config(format!(
                "uniform grid needs extent > 0 and count >= 2 (got {extent}, {count})"
            )));
        }
        let step = 2.0 * extent / (count - 1) as f64;
        Self::new((0..count).map(|i| -extent + step * i as f64).collect())
    }

    /// Domain wide enough to hold every mode below `n_max`.
    pub fn for_basis(n_max: usize, count: usize) -> Result<Self> {
        Self::uniform((2.0 * n_max as f64).sqrt() + SPATIAL_MARGIN, count)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let x = &self.points;
        let n = x.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }
}

/// θ_j = 2πj/M, j = 0..M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid {
    count: usize,
}

impl PhaseGrid {
    pub fn new(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Config("phase grid needs at least 2 points".into()));
        }
        Ok(PhaseGrid { count })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.count as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.theta(j)).collect()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.count as f64
    }

    /// Rejects grids too coarse for an `n_terms` one-sided series.
    pub fn check_alias_free(&self, n_terms: usize) -> Result<()> {
        if self.count < 2 * n_terms {
            return Err(Error::Config(format!(
                "phase grid of {} points aliases a {n_terms}-term series (need >= {})",
                self.count,
                2 * n_terms
            )));
        }
        Ok(())
    }
}

/// Complex samples on a grid with per-sample quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub samples: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl ComplexField {
    /// ∫|f|² by the stored quadrature.
    pub fn norm_sqr(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| s.norm_sqr() * w)
            .sum()
    }

    pub fn density(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }
}

/// ψ_n(x) = H_n(x) e^{−x²/2} / √(2ⁿ n! √π).
///
/// The normalised three-term recurrence is run on rescaled values with the
/// Gaussian factor applied in log space at the end, so large `n` and `|x|`
/// neither overflow nor underflow prematurely.
pub fn hermite_gauss(n: usize, x: f64) -> f64 {
    *hermite_gauss_all(n + 1, x).last().unwrap()
}

/// ψ_0(x), …, ψ_{count−1}(x).
pub fn hermite_gauss_all(count: usize, x: f64) -> Vec<f64> {
    const RESCALE: f64 = 1e150;
    let log_ground = -0.25 * PI.ln() - 0.5 * x * x;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    // p_k = ψ_k / exp(log_ground + log_scale)
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut raw = Vec::with_capacity(count);
    raw.push((cur, log_scale));
    for k in 0..count - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        raw.push((cur, log_scale));
    }
    for (p, scale) in raw {
        out.push(p * (log_ground + scale).exp());
    }
    out
}

/// Hermite–Gauss table for repeated projection onto one grid; row `j` holds
/// ψ_0..ψ_{n−1} at `x_j`.
#[derive(Debug, Clone)]
pub struct SpatialBasis {
    grid: SpatialGrid,
    n_modes: usize,
    table: Vec<Vec<f64>>,
}

impl SpatialBasis {
    pub fn new(grid: SpatialGrid, n_modes: usize) -> Self {
        let table = grid
            .points()
            .iter()
            .map(|&x| hermite_gauss_all(n_modes, x))
            .collect();
        SpatialBasis {
            grid,
            n_modes,
            table,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn project(&self, amplitudes: &[Complex64]) -> ComplexField {
        assert!(
            amplitudes.len() <= self.n_modes,
            "basis holds {} modes, got {}",
            self.n_modes,
            amplitudes.len()
        );
        let samples = self
            .table
            .iter()
            .map(|row| amplitudes.iter().zip(row).map(|(a, psi)| a * psi).sum())
            .collect();
        ComplexField {
            samples,
            weights: self.grid.weights(),
        }
    }
}

/// ψ(x_j) = Σ_n a_n ψ_n(x_j).
pub fn to_spatial(amplitudes: &[Complex64], grid: &SpatialGrid) -> ComplexField {
    SpatialBasis::new(grid.clone(), amplitudes.len()).project(amplitudes)
}

/// φ(θ_j) = (2π)^{−1/2} Σ_{n≥0} a_n e^{inθ_j}, evaluated as a zero-padded
/// inverse FFT.
pub fn to_phase(amplitudes: &[Complex64], grid: PhaseGrid) -> Result<ComplexField> {
    let mut planner = FftPlanner::new();
    to_phase_with(amplitudes, grid, &mut planner)
}

/// As [`to_phase`], reusing an FFT planner across calls.
pub fn to_phase_with(
    amplitudes: &[Complex64],
    grid: PhaseGrid,
    planner: &mut FftPlanner<f64>,
) -> Result<ComplexField> {
    grid.check_alias_free(amplitudes.len())?;
    let m = grid.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..amplitudes.len()].copy_from_slice(amplitudes);
    planner.plan_fft_inverse(m).process(&mut buf);
    let norm = 1.0 / (2.0 * PI).sqrt();
    for v in &mut buf {
        *v *= norm;
    }
    Ok(ComplexField {
        samples: buf,
        weights: vec![grid.spacing(); m],
    })
}

/// Real and imaginary boundary fields locked by the Hilbert transform.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertPair {
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

/// Builds φ_R = a_0 + Σ a_k cos kθ − Σ b_k sin kθ and its partner
/// φ_I = a_I0 + Σ b_k cos kθ + Σ a_k sin kθ (sums over k ≥ 1).
///
/// `cosine[k]` and `sine[k]` are indexed by harmonic; `sine[0]` multiplies
/// sin 0 = 0 and is ignored. The imaginary constant is not fixed by φ_R and
/// is passed in as `free_constant`.
pub fn hilbert_partner(
    cosine: &[f64],
    sine: &[f64],
    free_constant: f64,
    grid: PhaseGrid,
) -> Result<HilbertPair> {
    if cosine.len() != sine.len() {
        return Err(Error::Config(format!(
            "cosine and sine coefficient lists differ in length ({} vs {})",
            cosine.len(),
            sine.len()
        )));
    }
    if cosine.iter().chain(sine).any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite Fourier coefficient".into()));
    }
    let mut real = Vec::with_capacity(grid.len());
    let mut imag = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let theta = grid.theta(j);
        let mut re = cosine.first().copied().unwrap_or(0.0);
        let mut im = free_constant;
        for k in 1..cosine.len() {
            let (s, c) = (k as f64 * theta).sin_cos();
            re += cosine[k] * c - sine[k] * s;
            im += sine[k] * c + cosine[k] * s;
        }
        real.push(re);
        imag.push(im);
    }
    Ok(HilbertPair { real, imag })
}

/// Recovers (a_k, b_k), k = 0..=k_max, from samples of φ_R on a full phase
/// grid, in the sign convention of [`hilbert_partner`].
pub fn real_part_coefficients(real: &[f64], k_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = real.len();
    if m < 2 * k_max + 1 {
        return Err(Error::Config(format!(
            "{m} samples cannot resolve harmonics up to {k_max}"
        )));
    }
    let mut buf: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let mut a = Vec::with_capacity(k_max + 1);
    let mut b = Vec::with_capacity(k_max + 1);
    a.push(buf[0].re * scale);
    b.push(0.0);
    for c in &buf[1..=k_max] {
        a.push(2.0 * c.re * scale);
        b.push(2.0 * c.im * scale);
    }
    Ok((a, b))
}

/// The imaginary boundary field implied by a real one: φ_I from φ_R alone.
pub fn imaginary_from_real(real: &[f64], free_constant: f64) -> Result<Vec<f64>> {
    let m = real.len();
    let grid = PhaseGrid::new(m)?;
    let (a, b) = real_part_coefficients(real, (m - 1) / 2)?;
    Ok(hilbert_partner(&a, &b, free_constant, grid)?.imag)
}

/// Tail threshold for [`analytic_extension`].
pub const EXTENSION_TAIL_TOL: f64 = 1e-14;

/// Φ(re^{iθ}) = (2π)^{−1/2} Σ a_n rⁿ e^{inθ} inside the unit disk.
pub fn analytic_extension(amplitudes: &[Complex64], r: f64, theta: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!(
            "radius {r} is outside the open unit disk [0, 1)"
        )));
    }
    // suffix[n] = Σ_{m ≥ n} |a_m|
    let mut suffix = vec![0.0; amplitudes.len() + 1];
    for n in (0..amplitudes.len()).rev() {
        suffix[n] = suffix[n + 1] + amplitudes[n].norm();
    }
    let z = Complex64::from_polar(r, theta);
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, a) in amplitudes.iter().enumerate() {
        sum += a * power;
        power *= z;
        // bound on the remaining terms n+1..
        if suffix[n + 1] * r.powi(n as i32 + 1) / (1.0 - r) < EXTENSION_TAIL_TOL {
            break;
        }
    }
    Ok(sum / (2.0 * PI).sqrt())
}
