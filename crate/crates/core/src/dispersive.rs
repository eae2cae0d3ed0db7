//! Weak-anharmonicity model: H ≈ a₁ n̂ + a₂ n̂² + (1/2 + 3λ/4), with
//! a₁ = 1 + 3λ/2 and a₂ = 3λ/2.
//!
//! In the phase representation n̂ acts as −i∂_θ, so the model is a transport
//! plus dispersion equation on the circle. It is solved here exactly in mode
//! space: each amplitude picks up e^{−i(a₁n + a₂n²)t}. Projecting n̂² → −∂²_θ
//! gives i∂_tφ = −ia₁∂_θφ − a₂∂²_θφ; the mode-space phases are the ones used.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::check_lambda;
use crate::propagation::{Propagator, StateVector};
use crate::spectral::EigenDecomposition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveCoefficients {
    pub lambda: f64,
    /// Linear (rotation) coefficient.
    pub a1: f64,
    /// Quadratic (dispersion) coefficient.
    pub a2: f64,
    /// Global energy offset, dropped from the dynamics.
    pub constant_offset: f64,
}

impl DispersiveCoefficients {
    /// Model energy a₁n + a₂n² + offset.
    pub fn energy(&self, n: usize) -> f64 {
        let n = n as f64;
        self.a1 * n + self.a2 * n * n + self.constant_offset
    }

    /// Revival period 2π/a₂, or `None` in the harmonic limit.
    pub fn revival_period(&self) -> Option<f64> {
        (self.a2 > 0.0).then(|| 2.0 * std::f64::consts::PI / self.a2)
    }
}

pub fn dispersive_coefficients(lambda: f64) -> Result<DispersiveCoefficients> {
    check_lambda(lambda)?;
    Ok(DispersiveCoefficients {
        lambda,
        a1: 1.0 + 1.5 * lambda,
        a2: 1.5 * lambda,
        constant_offset: 0.5 + 0.75 * lambda,
    })
}

/// d_n(t) = d_n(0) e^{−i(a₁n + a₂n²)t}.
pub fn evolve_dispersive(psi0: &StateVector, coeffs: &DispersiveCoefficients, t: f64) -> StateVector {
    let amplitudes = psi0
        .amplitudes
        .iter()
        .enumerate()
        .map(|(n, d)| {
            let nf = n as f64;
            d * Complex64::from_polar(1.0, -(coeffs.a1 * nf + coeffs.a2 * nf * nf) * t)
        })
        .collect();
    StateVector {
        amplitudes,
        label: format!("{} dispersive t={t}", psi0.label),
        truncation_loss: psi0.truncation_loss,
    }
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Config(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.inner(b)?.norm_sqr())
}

/// Fidelity between full and model evolution at each time.
pub fn model_fidelity_series(
    decomp: &EigenDecomposition,
    psi0: &StateVector,
    coeffs: &DispersiveCoefficients,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    let prop = Propagator::new(decomp, psi0)?;
    t_grid
        .iter()
        .map(|&t| fidelity(&prop.state_at(t), &evolve_dispersive(psi0, coeffs, t)))
        .collect()
}
