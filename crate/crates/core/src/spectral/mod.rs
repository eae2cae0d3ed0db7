//! Diagonalisation of the truncated Hamiltonian, truncation convergence
//! control, and spectrum sweeps over the anharmonicity.

mod tridiag;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{build_hamiltonian, check_lambda, SymmetricBandMatrix, TruncationSpec};

/// Default energy tolerance for [`converge_spectrum`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest basis [`converge_spectrum`] will try.
pub const DEFAULT_N_MAX_CAP: usize = 4096;
/// Rows at the top of the basis whose weight must vanish.
pub const BOUNDARY_ROWS: usize = 8;
/// Bound on the summed weight on the boundary rows.
pub const BOUNDARY_SUPPORT_TOL: f64 = 1e-12;

/// Energies E_k and mixing coefficients c_n^(k) = ⟨n|φ_k⟩.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub lambda: f64,
    pub n_max: usize,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Column `k` is eigenvector `k`; entry `[n, k]` is c_n^(k).
    pub coefficients: Array2<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Σ_{n ≥ n_max − rows} |c_n^(k)|².
    pub fn boundary_support(&self, k: usize, rows: usize) -> f64 {
        let n = self.dim();
        let col = self.coefficients.column(k);
        col.iter().skip(n.saturating_sub(rows)).map(|c| c * c).sum()
    }

    /// ‖H v_k − E_k v_k‖₂.
    pub fn residual(&self, h: &SymmetricBandMatrix, k: usize) -> f64 {
        let v = self.coefficients.column(k).to_vec();
        let hv = h.matvec(&v);
        hv.iter()
            .zip(&v)
            .map(|(a, b)| (a - self.energies[k] * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest off-diagonal entry of CᵀC.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.coefficients.t().dot(&self.coefficients);
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[[i, j]] - target).abs());
            }
        }
        worst
    }

    /// ℓ² mass of eigenvector `k` on the index parity opposite to its
    /// dominant entry.
    pub fn minority_parity_mass(&self, k: usize) -> f64 {
        let col = self.coefficients.column(k);
        let dominant = dominant_index(col.iter().copied());
        col.iter()
            .enumerate()
            .filter(|(n, _)| (n + dominant) % 2 == 1)
            .map(|(_, c)| c * c)
            .sum()
    }
}

fn dominant_index(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, -1.0);
    for (i, v) in values.enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best.0
}

/// Full eigendecomposition of a symmetric band matrix.
///
/// When every odd-offset diagonal is exactly zero the index parities decouple;
/// the even and odd sublattices are then solved separately, which halves the
/// work and makes parity exact.
pub fn diagonalize(h: &SymmetricBandMatrix, lambda: f64) -> Result<EigenDecomposition> {
    let n = h.dim();
    let mut pairs: Vec<(f64, Vec<f64>)> = if parity_decoupled(h) {
        let mut out = Vec::with_capacity(n);
        for parity in 0..2 {
            let block = sublattice(h, parity);
            let eig = tridiag::band_eigen(&block)?;
            for (value, sub) in eig.values.into_iter().zip(eig.vectors) {
                let mut full = vec![0.0; n];
                for (i, v) in sub.into_iter().enumerate() {
                    full[2 * i + parity] = v;
                }
                out.push((value, full));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    } else {
        let eig = tridiag::band_eigen(h)?;
        eig.values.into_iter().zip(eig.vectors).collect()
    };

    let mut coefficients = Array2::zeros((n, n));
    let mut energies = Vec::with_capacity(n);
    for (k, (value, vector)) in pairs.iter_mut().enumerate() {
        let sign = vector[dominant_index(vector.iter().copied())].signum();
        for (i, v) in vector.iter().enumerate() {
            coefficients[[i, k]] = sign * v;
        }
        energies.push(*value);
    }
    Ok(EigenDecomposition {
        lambda,
        n_max: n,
        energies,
        coefficients,
    })
}

fn parity_decoupled(h: &SymmetricBandMatrix) -> bool {
    h.dim() >= 2
        && h.bandwidth() >= 1
        && (1..=h.bandwidth())
            .step_by(2)
            .all(|d| h.diagonal(d).iter().all(|&v| v == 0.0))
}

/// Restriction to indices `parity, parity + 2, …`.
fn sublattice(h: &SymmetricBandMatrix, parity: usize) -> SymmetricBandMatrix {
    let dim = (h.dim() + 1 - parity) / 2;
    let mut block = SymmetricBandMatrix::zeros(dim, h.bandwidth() / 2);
    for d in 0..=block.bandwidth() {
        for i in 0..dim - d {
            block.set(i + d, i, h.get(2 * (i + d) + parity, 2 * i + parity));
        }
    }
    block
}

/// Convergence report attached to [`converge_spectrum`] results.
#[derive(Debug, Clone)]
pub struct Converged {
    pub decomposition: EigenDecomposition,
    /// max_{k ≤ k_max} |ΔE_k| against the doubled basis.
    pub energy_residual: f64,
    /// max_{k ≤ k_max} boundary support.
    pub boundary_support: f64,
}

/// Tuning for [`converge_spectrum_with`].
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceOptions {
    pub cap: usize,
    pub guard: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            cap: DEFAULT_N_MAX_CAP,
            guard: crate::fock::DEFAULT_GUARD,
        }
    }
}

/// Doubles the basis from max(64, 4·k_max) until levels `0..=k_max` change by
/// less than `tol` and have negligible weight on the top rows. Returns the
/// smaller of the two bases that passed the comparison.
pub fn converge_spectrum(lambda: f64, k_max: usize, tol: f64) -> Result<Converged> {
    converge_spectrum_with(lambda, k_max, tol, ConvergenceOptions::default())
}

pub fn converge_spectrum_with(
    lambda: f64,
    k_max: usize,
    tol: f64,
    options: ConvergenceOptions,
) -> Result<Converged> {
    check_lambda(lambda)?;
    if k_max < 1 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tolerance {tol} must be positive")));
    }
    let solve = |n: usize| -> Result<EigenDecomposition> {
        let spec = TruncationSpec::with_guard(n, options.guard)?;
        diagonalize(&build_hamiltonian(spec, lambda)?, lambda)
    };

    let mut n = 64.max(4 * k_max);
    if n > options.cap {
        return Err(Error::Convergence {
            n_max: n,
            cap: options.cap,
            energy_residual: f64::INFINITY,
            boundary_support: f64::INFINITY,
        });
    }
    let mut current = solve(n)?;
    loop {
        let boundary = (0..=k_max)
            .map(|k| current.boundary_support(k, BOUNDARY_ROWS))
            .fold(0.0, f64::max);
        let next_n = 2 * n;
        if next_n > options.cap {
            return Err(Error::Convergence {
                n_max: n,
                cap: options.cap,
                energy_residual: f64::NAN,
                boundary_support: boundary,
            });
        }
        let next = solve(next_n)?;
        let residual = (0..=k_max)
            .map(|k| (next.energies[k] - current.energies[k]).abs())
            .fold(0.0, f64::max);
        if residual < tol && boundary < BOUNDARY_SUPPORT_TOL {
            return Ok(Converged {
                decomposition: current,
                energy_residual: residual,
                boundary_support: boundary,
            });
        }
        n = next_n;
        current = next;
    }
}

/// Converged energies E_k(λ), k < levels, over a λ grid (one row per λ).
#[derive(Debug, Clone)]
pub struct SpectrumSweep {
    pub lambda_grid: Vec<f64>,
    pub levels: usize,
    pub table: Vec<Vec<f64>>,
    /// Basis size used at each grid point.
    pub n_max: Vec<usize>,
}

/// Grid points are independent and evaluated on the current rayon pool.
pub fn spectrum_sweep(lambda_grid: &[f64], levels: usize, tol: f64) -> Result<SpectrumSweep> {
    if levels < 1 {
        return Err(Error::Config("levels must be at least 1".into()));
    }
    if lambda_grid.is_empty() || lambda_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("lambda grid must be non-empty and strictly ascending".into()));
    }
    let k_max = (levels - 1).max(1);
    let rows: Vec<Result<(Vec<f64>, usize)>> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            converge_spectrum(lambda, k_max, tol)
                .map(|c| {
                    (
                        c.decomposition.energies[..levels].to_vec(),
                        c.decomposition.n_max,
                    )
                })
                .map_err(|e| Error::AtLambda {
                    lambda,
                    source: Box::new(e),
                })
        })
        .collect();
    let mut table = Vec::with_capacity(rows.len());
    let mut n_max = Vec::with_capacity(rows.len());
    for row in rows {
        let (energies, n) = row?;
        table.push(energies);
        n_max.push(n);
    }
    Ok(SpectrumSweep {
        lambda_grid: lambda_grid.to_vec(),
        levels,
        table,
        n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn decompose(n: usize, lambda: f64) -> (SymmetricBandMatrix, EigenDecomposition) {
        let h = build_hamiltonian(TruncationSpec::new(n).unwrap(), lambda).unwrap();
        let d = diagonalize(&h, lambda).unwrap();
        (h, d)
    }

    #[test]
    fn harmonic_limit_is_exact() {
        let (_, d) = decompose(32, 0.0);
        for (k, e) in d.energies.iter().enumerate() {
            assert!((e - (k as f64 + 0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn second_order_perturbation_oracle() {
        let (_, d) = decompose(64, 1e-4);
        for k in 0..=10 {
            let e2 = oracle::perturbative_energy(k, 1e-4, 2);
            assert!((d.energies[k] - e2).abs() < 5e-7, "k={k}");
        }
        for k in 0..=5 {
            let e1 = oracle::perturbative_energy(k, 1e-4, 1);
            assert!((d.energies[k] - e1).abs() <= 1e-5, "k={k}");
        }
    }

    #[test]
    fn ground_state_matches_large_dense_basis() {
        let (_, d) = decompose(128, 0.05);
        let (reference, _) = oracle::jacobi_eigen(&oracle::dense_hamiltonian(256, 0.05));
        assert!((d.energies[0] - reference[0]).abs() < 1e-8);
    }

    #[test]
    fn matches_jacobi_oracle() {
        for &lambda in &[0.01, 0.3, 2.0] {
            let (_, d) = decompose(48, lambda);
            let (reference, vectors) = oracle::jacobi_eigen(&oracle::dense_hamiltonian(48, lambda));
            for k in 0..48 {
                assert!((d.energies[k] - reference[k]).abs() < 1e-9 * reference[k].abs().max(1.0));
            }
            for k in 0..12 {
                let overlap: f64 = (0..48).map(|n| d.coefficients[[n, k]] * vectors[[n, k]]).sum();
                assert!((overlap.abs() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn structural_invariants() {
        let (h, d) = decompose(96, 0.05);
        assert!(d.orthogonality_defect() <= 1e-10);
        for k in 0..96 {
            assert!(d.residual(&h, k) <= 1e-9 * d.energies[k].abs().max(1.0));
            assert!(d.minority_parity_mass(k) <= 1e-20);
            let col = d.coefficients.column(k);
            let dom = dominant_index(col.iter().copied());
            assert!(col[dom] > 0.0);
        }
        assert!(d.energies.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dense_input_without_parity_structure() {
        let mut m = SymmetricBandMatrix::zeros(10, 3);
        for i in 0..10 {
            m.set(i, i, i as f64);
            if i + 1 < 10 {
                m.set(i, i + 1, 0.3);
            }
            if i + 3 < 10 {
                m.set(i, i + 3, -0.2);
            }
        }
        let d = diagonalize(&m, 0.0).unwrap();
        let (reference, _) = oracle::jacobi_eigen(&m.to_dense());
        for k in 0..10 {
            assert!((d.energies[k] - reference[k]).abs() < 1e-12);
            assert!(d.residual(&m, k) < 1e-12);
        }
    }

    #[test]
    fn convergence_harmonic_returns_initial_size() {
        let c = converge_spectrum(0.0, 10, 1e-10).unwrap();
        assert_eq!(c.decomposition.n_max, 64);
        assert_eq!(c.energy_residual, 0.0);
    }

    #[test]
    fn convergence_steep_potential() {
        let c = converge_spectrum(0.5, 12, 1e-9).unwrap();
        assert!(c.boundary_support < BOUNDARY_SUPPORT_TOL);
        assert!(c.energy_residual < 1e-9);
        assert!(c.decomposition.n_max <= 512);
    }

    #[test]
    fn convergence_self_consistent_under_larger_cap() {
        let a = converge_spectrum(0.01, 40, 1e-9).unwrap();
        let b = converge_spectrum_with(
            0.01,
            40,
            1e-9,
            ConvergenceOptions {
                cap: 2 * DEFAULT_N_MAX_CAP,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.decomposition.n_max, b.decomposition.n_max);
        for k in 0..=40 {
            assert!((a.decomposition.energies[k] - b.decomposition.energies[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn convergence_cap_reports_error() {
        let err = converge_spectrum_with(
            0.01,
            40,
            1e-9,
            ConvergenceOptions {
                cap: 200,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
        assert!(converge_spectrum(0.1, 0, 1e-9).is_err());
        assert!(converge_spectrum(0.1, 4, 0.0).is_err());
    }

    #[test]
    fn sweep_harmonic_column() {
        let s = spectrum_sweep(&[0.0], 12, 1e-9).unwrap();
        for k in 0..12 {
            assert!((s.table[0][k] - (k as f64 + 0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn sweep_shift_grows_with_level() {
        let s = spectrum_sweep(&[0.0, 0.05, 0.5], 12, 1e-9).unwrap();
        let shift = |k: usize| s.table[2][k] - s.table[1][k];
        assert!(shift(11) > shift(1));
        for k in 0..12 {
            assert!(s.table[0][k] <= s.table[1][k] && s.table[1][k] <= s.table[2][k]);
        }
        for row in &s.table {
            assert!(row.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn sweep_first_order_small_lambda() {
        let s = spectrum_sweep(&[1e-4], 6, 1e-9).unwrap();
        for k in 0..6 {
            assert!((s.table[0][k] - oracle::perturbative_energy(k, 1e-4, 1)).abs() <= 1e-5);
        }
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        assert!(spectrum_sweep(&[0.1, 0.05], 4, 1e-9).is_err());
        assert!(spectrum_sweep(&[], 4, 1e-9).is_err());
        assert!(spectrum_sweep(&[0.1], 0, 1e-9).is_err());
        let err = spectrum_sweep(&[-0.1], 4, 1e-9).unwrap_err();
        assert!(matches!(err, Error::AtLambda { .. }));
    }
}
