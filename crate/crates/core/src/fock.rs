//! Ladder, position, quartic and Hamiltonian operators in a truncated Fock
//! basis, in oscillator units (ω = m = ħ = 1).
//!
//! Operator products are formed on a guarded basis of `n_max + guard` levels
//! and cropped afterwards. A product of `k` ladder steps reaches `k / 2`
//! levels past the row it lands on, so a naive truncated product corrupts the
//! top rows; with `guard >= 2` every retained entry of x̂⁴ is exact.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Smallest admissible basis dimension.
pub const MIN_N_MAX: usize = 8;
/// Guard levels used when none are requested.
pub const DEFAULT_GUARD: usize = 8;
/// Minimum guard for quartic products.
pub const MIN_QUARTIC_GUARD: usize = 4;

/// Basis size `n_max` (states |0⟩..|n_max−1⟩) plus internal guard levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub n_max: usize,
    pub guard: usize,
}

impl TruncationSpec {
    pub fn new(n_max: usize) -> Result<Self> {
        Self::with_guard(n_max, DEFAULT_GUARD)
    }

    pub fn with_guard(n_max: usize, guard: usize) -> Result<Self> {
        let spec = TruncationSpec { n_max, guard };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < MIN_N_MAX {
            return Err(Error::Config(format!(
                "n_max = {} is below the minimum basis size {MIN_N_MAX}",
                self.n_max
            )));
        }
        Ok(())
    }

    /// Dimension of the guarded working basis.
    pub fn guarded_dim(&self) -> usize {
        self.n_max + self.guard
    }
}

/// Real symmetric matrix storing only the diagonals `0..=bandwidth`.
///
/// `diags[d][i]` holds entry `(i + d, i)` (equivalently `(i, i + d)`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBandMatrix {
    dim: usize,
    bandwidth: usize,
    diags: Vec<Vec<f64>>,
}

impl SymmetricBandMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(dim.saturating_sub(1));
        let diags = (0..=bandwidth).map(|d| vec![0.0; dim - d]).collect();
        SymmetricBandMatrix {
            dim,
            bandwidth,
            diags,
        }
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), 0);
        m.diags[0].copy_from_slice(diag);
        m
    }

    /// Builds a band matrix from the lower triangle of a dense matrix, keeping
    /// offsets up to `bandwidth`. Entries outside the band are ignored.
    pub fn from_dense_lower(dense: &Array2<f64>, bandwidth: usize) -> Self {
        let dim = dense.nrows();
        let mut m = Self::zeros(dim, bandwidth);
        for d in 0..=m.bandwidth {
            for i in 0..dim - d {
                m.diags[d][i] = dense[[i + d, i]];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        let (lo, d) = if i <= j { (i, j - i) } else { (j, i - j) };
        if d > self.bandwidth {
            0.0
        } else {
            self.diags[d][lo]
        }
    }

    /// Sets entries `(i, j)` and `(j, i)` together.
    ///
    /// Panics if `|i − j|` exceeds the bandwidth.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (lo, d) = if i <= j { (i, j - i) } else { (j, i - j) };
        assert!(
            d <= self.bandwidth,
            "offset {d} outside bandwidth {}",
            self.bandwidth
        );
        self.diags[d][lo] = value;
    }

    /// The `d`-th diagonal, `d <= bandwidth`.
    pub fn diagonal(&self, d: usize) -> &[f64] {
        &self.diags[d]
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for (d, diag) in self.diags.iter().enumerate() {
            for (i, &v) in diag.iter().enumerate() {
                out[[i + d, i]] = v;
                out[[i, i + d]] = v;
            }
        }
        out
    }

    /// Leading `n × n` block.
    pub fn crop(&self, n: usize) -> Self {
        assert!(n <= self.dim, "cannot crop {} to {n}", self.dim);
        let mut out = Self::zeros(n, self.bandwidth);
        for d in 0..=out.bandwidth {
            out.diags[d].copy_from_slice(&self.diags[d][..n - d]);
        }
        out
    }

    /// `y = A x` for real `x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y: Vec<f64> = self.diags[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, diag) in self.diags.iter().enumerate().skip(1) {
            for (i, &v) in diag.iter().enumerate() {
                y[i + d] += v * x[i];
                y[i] += v * x[i + d];
            }
        }
        y
    }

    /// `self + factor * other`, widening the band as needed.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zeros(self.dim, self.bandwidth.max(other.bandwidth));
        for (d, diag) in self.diags.iter().enumerate() {
            out.diags[d].copy_from_slice(diag);
        }
        for (d, diag) in other.diags.iter().enumerate() {
            for (o, v) in out.diags[d].iter_mut().zip(diag) {
                *o += factor * v;
            }
        }
        out
    }

    /// Integer matrix power. Products of powers of one matrix commute, so the
    /// result is symmetric and the band widens to `exp * bandwidth`.
    pub fn pow(&self, exp: u32) -> Self {
        if exp == 0 {
            return Self::from_diagonal(&vec![1.0; self.dim]);
        }
        let mut acc = self.clone();
        for _ in 1..exp {
            acc = acc.band_product(self);
        }
        acc
    }

    /// Lower band of `self · other`; only valid when the product is symmetric.
    fn band_product(&self, other: &Self) -> Self {
        let n = self.dim;
        let (ba, bb) = (self.bandwidth as isize, other.bandwidth as isize);
        let mut out = Self::zeros(n, (ba + bb) as usize);
        for d in 0..=out.bandwidth {
            for j in 0..n - d {
                let i = j + d;
                // row i of self meets column j of other on m with |i−m| ≤ ba, |m−j| ≤ bb
                let lo = (i as isize - ba).max(j as isize - bb).max(0) as usize;
                let hi = ((i as isize + ba).min(j as isize + bb)).min(n as isize - 1);
                if hi < lo as isize {
                    continue;
                }
                let mut s = 0.0;
                for m in lo..=hi as usize {
                    s += self.get(i, m) * other.get(m, j);
                }
                out.diags[d][j] = s;
            }
        }
        out
    }
}

/// x̂ = (â + â†)/√2 on the guarded dimension `n_max + guard`.
pub fn build_position(spec: TruncationSpec) -> Result<SymmetricBandMatrix> {
    spec.validate()?;
    let dim = spec.guarded_dim();
    let mut x = SymmetricBandMatrix::zeros(dim, 1);
    for n in 1..dim {
        x.set(n - 1, n, (n as f64 / 2.0).sqrt());
    }
    Ok(x)
}

/// x̂⁴ formed on the guarded basis, cropped to `n_max × n_max`.
pub fn build_quartic(spec: TruncationSpec) -> Result<SymmetricBandMatrix> {
    if spec.guard < MIN_QUARTIC_GUARD {
        return Err(Error::Config(format!(
            "guard = {} is below {MIN_QUARTIC_GUARD}, required for quartic products",
            spec.guard
        )));
    }
    let x = build_position(spec)?;
    Ok(x.pow(4).crop(spec.n_max))
}

/// H = diag(n + 1/2) + λ x̂⁴ on `n_max` levels.
pub fn build_hamiltonian(spec: TruncationSpec, lambda: f64) -> Result<SymmetricBandMatrix> {
    check_lambda(lambda)?;
    let harmonic: Vec<f64> = (0..spec.n_max).map(|n| n as f64 + 0.5).collect();
    let h0 = SymmetricBandMatrix::from_diagonal(&harmonic);
    if lambda == 0.0 {
        // keep the quartic band so the shape does not depend on λ
        spec.validate()?;
        return Ok(h0.add_scaled(&SymmetricBandMatrix::zeros(spec.n_max, 4), 1.0));
    }
    Ok(h0.add_scaled(&build_quartic(spec)?, lambda))
}

/// x̂ restricted to the first `n_max` levels, for expectation values.
pub fn position_operator(n_max: usize) -> Result<SymmetricBandMatrix> {
    let spec = TruncationSpec::with_guard(n_max, 0)?;
    build_position(spec)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda = {lambda} is not finite")));
    }
    if lambda < 0.0 {
        return Err(Error::Domain(format!(
            "lambda = {lambda} < 0 gives an unbounded potential"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> TruncationSpec {
        TruncationSpec::new(n).unwrap()
    }

    #[test]
    fn position_entries() {
        let x = build_position(spec(8)).unwrap();
        assert_eq!(x.dim(), 16);
        assert!((x.get(0, 1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((x.get(3, 4) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(x.get(0, 2), 0.0);
        assert_eq!(x.get(4, 3), x.get(3, 4));
    }

    #[test]
    fn small_basis_rejected() {
        assert!(matches!(TruncationSpec::new(7), Err(Error::Config(_))));
        let bad = TruncationSpec { n_max: 4, guard: 8 };
        assert!(build_position(bad).is_err());
    }

    #[test]
    fn quartic_needs_guard() {
        let s = TruncationSpec::with_guard(16, 2).unwrap();
        assert!(matches!(build_quartic(s), Err(Error::Config(_))));
    }

    #[test]
    fn quartic_low_entries() {
        let q = build_quartic(spec(16)).unwrap();
        assert_eq!(q.bandwidth(), 4);
        assert!((q.get(0, 0) - 0.75).abs() < 1e-14);
        assert!((q.get(1, 1) - 3.75).abs() < 1e-14);
        assert_eq!(q.get(0, 1), 0.0);
        for n in 0..16 {
            let nf = n as f64;
            let expected = 0.75 * (2.0 * nf * nf + 2.0 * nf + 1.0);
            assert!((q.get(n, n) - expected).abs() < 1e-11, "n = {n}");
        }
    }

    #[test]
    fn hamiltonian_values() {
        let h0 = build_hamiltonian(spec(16), 0.0).unwrap();
        for n in 0..16 {
            assert_eq!(h0.get(n, n), n as f64 + 0.5);
            for m in 0..16 {
                if m != n {
                    assert_eq!(h0.get(n, m), 0.0);
                }
            }
        }
        let h = build_hamiltonian(spec(16), 0.05).unwrap();
        assert!((h.get(0, 0) - 0.5375).abs() < 1e-14);
        assert_eq!(h.get(0, 1), 0.0);
    }

    #[test]
    fn negative_lambda_rejected() {
        let err = build_hamiltonian(spec(16), -1.0).unwrap_err();
        assert!(err.to_string().contains("unbounded potential"));
        assert!(build_hamiltonian(spec(16), f64::NAN).is_err());
    }

    #[test]
    fn pentadiagonal_parity_structure() {
        for &lambda in &[0.0, 1e-4, 0.05, 0.5, 3.0] {
            let h = build_hamiltonian(spec(32), lambda).unwrap();
            for i in 0..32usize {
                for j in 0..32 {
                    let d = i.abs_diff(j);
                    if !matches!(d, 0 | 2 | 4) {
                        assert_eq!(h.get(i, j), 0.0, "λ={lambda} ({i},{j})");
                    }
                    assert_eq!(h.get(i, j), h.get(j, i));
                }
            }
        }
    }

    #[test]
    fn guard_band_stability() {
        for g in [4, 8] {
            let n = 24;
            let a = build_quartic(TruncationSpec::with_guard(n, g).unwrap()).unwrap();
            let b = build_quartic(TruncationSpec::with_guard(n, 2 * g).unwrap()).unwrap();
            for i in 0..n - g {
                for j in 0..n - g {
                    assert!((a.get(i, j) - b.get(i, j)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn dense_view_and_matvec_agree() {
        let h = build_hamiltonian(spec(12), 0.3).unwrap();
        let dense = h.to_dense();
        let v: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let y = h.matvec(&v);
        for i in 0..12 {
            let expected: f64 = (0..12).map(|j| dense[[i, j]] * v[j]).sum();
            assert!((y[i] - expected).abs() < 1e-12);
        }
        let back = SymmetricBandMatrix::from_dense_lower(&dense, 4);
        assert_eq!(back, h);
    }
}
