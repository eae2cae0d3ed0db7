//! Fast consistency checks against the independent routes in [`crate::oracle`].

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::dispersive::{dispersive_coefficients, evolve_dispersive};
use crate::error::Result;
use crate::fock::{build_hamiltonian, TruncationSpec};
use crate::oracle;
use crate::projections::{hilbert_partner, hermite_gauss, to_phase, PhaseGrid};
use crate::propagation::{coherent_state, position_series};
use crate::spectral::diagonalize;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

/// Runs every check; each reports its measured error against its tolerance.
pub fn run() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut add = |name, value, tolerance| checks.push(Check { name, value, tolerance });

    // quartic matrix against a brute-force ladder expansion
    let spec = TruncationSpec::new(24)?;
    let x4 = crate::fock::build_quartic(spec)?.to_dense();
    let brute = oracle::ladder_quartic(24);
    add("quartic-ladder", max_abs_diff(x4.iter(), brute.iter()), 1e-12);

    // harmonic limit
    let d0 = diagonalize(&build_hamiltonian(TruncationSpec::new(64)?, 0.0)?, 0.0)?;
    let harm = d0
        .energies
        .iter()
        .enumerate()
        .map(|(k, e)| (e - (k as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    add("harmonic-spectrum", harm, 1e-10);

    // band solver against dense Jacobi
    let lambda = 0.05;
    let h = build_hamiltonian(TruncationSpec::new(40)?, lambda)?;
    let d = diagonalize(&h, lambda)?;
    let (jac, _) = oracle::jacobi_eigen(&oracle::dense_hamiltonian(40, lambda));
    add("band-vs-jacobi", max_abs_diff(d.energies.iter(), jac.iter()), 1e-9);
    let residual = (0..d.dim()).map(|k| d.residual(&h, k)).fold(0.0, f64::max);
    add("eigen-residual", residual, 1e-9);
    add("orthonormality", d.orthogonality_defect(), 1e-10);

    // weak coupling against second-order perturbation theory; the third-order
    // remainder is about 3e-7 at k = 10
    let lambda = 1e-4;
    let d = diagonalize(&build_hamiltonian(TruncationSpec::new(64)?, lambda)?, lambda)?;
    let pert = (0..=10)
        .map(|k| (d.energies[k] - oracle::perturbative_energy(k, lambda, 2)).abs())
        .fold(0.0, f64::max);
    add("perturbation-2nd-order", pert, 5e-7);

    // Hermite-Gauss recurrence against explicit polynomials
    let hg = (0..12)
        .flat_map(|n| [-3.1, -0.4, 0.0, 1.7, 4.2].map(move |x| (n, x)))
        .map(|(n, x)| (hermite_gauss(n, x) - oracle::hermite_gauss_explicit(n, x)).abs())
        .fold(0.0, f64::max);
    add("hermite-gauss", hg, 1e-12);

    // FFT phase projection against direct summation
    let psi = coherent_state(Complex64::new(0.0, 4.0), 96)?;
    let grid = PhaseGrid::new(256)?;
    let fft = to_phase(&psi.amplitudes, grid)?;
    let direct = oracle::phase_direct(&psi.amplitudes, 256);
    add("phase-fft", max_abs_diff_c(&fft.samples, &direct), 1e-12);

    // Hilbert partner has a one-sided spectrum
    let cos: Vec<f64> = (0..9).map(|k| ((k * 7 % 5) as f64 - 2.0) / 3.0).collect();
    let sin: Vec<f64> = (0..9).map(|k| ((k * 3 % 7) as f64 - 3.0) / 4.0).collect();
    let pair = hilbert_partner(&cos, &sin, 0.0, PhaseGrid::new(64)?)?;
    let field: Vec<Complex64> = pair.real.iter().zip(&pair.imag).map(|(r, i)| Complex64::new(*r, *i)).collect();
    add("hilbert-leakage", oracle::negative_frequency_leakage(&field), 1e-12);

    // harmonic <x(t)>
    let t: Vec<f64> = (0..=200).map(|k| k as f64 * 0.1).collect();
    let series = position_series(&d0, &coherent_state(Complex64::new(0.0, 4.0), 64)?, &t)?;
    let amp = 4.0 * 2f64.sqrt();
    let dx = series
        .t_grid
        .iter()
        .zip(&series.values)
        .map(|(t, x)| (x - amp * t.sin()).abs())
        .fold(0.0, f64::max);
    add("harmonic-position", dx, 1e-8);

    // dispersive revival
    let coeffs = dispersive_coefficients(0.01)?;
    let period = 2.0 * PI / coeffs.a2;
    let back = evolve_dispersive(&psi, &coeffs, period);
    let rotated = evolve_dispersive(
        &psi,
        &crate::dispersive::DispersiveCoefficients { a2: 0.0, ..coeffs },
        period,
    );
    let drift = back
        .amplitudes
        .iter()
        .zip(&rotated.amplitudes)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    add("dispersive-revival", drift, 1e-10);

    Ok(checks)
}

fn max_abs_diff<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs_diff_c(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
