//! Independent reference computations.
//!
//! Everything here deliberately avoids the production code paths: dense
//! storage instead of band storage, cyclic Jacobi instead of band reduction
//! plus QL, direct sums instead of FFTs, a Taylor matrix exponential instead
//! of the spectral propagator. The test suites and the `selftest` command
//! compare the two routes.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

/// ⟨row| (â + â†)⁴ / 4 |col⟩ by expanding all sixteen ladder words and applying
/// them to basis kets of the untruncated oscillator.
pub fn ladder_quartic(n: usize) -> Array2<f64> {
    let mut out = Array2::zeros((n, n));
    for col in 0..n {
        for word in 0..16u32 {
            // bit set → creation operator; operators applied right to left
            let mut level = col as i64;
            let mut amp = 1.0f64;
            for pos in 0..4 {
                if word >> pos & 1 == 1 {
                    level += 1;
                    amp *= (level as f64).sqrt();
                } else {
                    if level == 0 {
                        amp = 0.0;
                        break;
                    }
                    amp *= (level as f64).sqrt();
                    level -= 1;
                }
            }
            if amp != 0.0 && (level as usize) < n {
                out[[level as usize, col]] += amp / 4.0;
            }
        }
    }
    out
}

/// Dense x̂ on `dim` levels.
pub fn dense_position(dim: usize) -> Array2<f64> {
    let mut x = Array2::zeros((dim, dim));
    for n in 1..dim {
        let v = (n as f64 / 2.0).sqrt();
        x[[n - 1, n]] = v;
        x[[n, n - 1]] = v;
    }
    x
}

/// Dense H = diag(n + 1/2) + λ x̂⁴, with x̂⁴ taken from the ladder expansion.
pub fn dense_hamiltonian(n: usize, lambda: f64) -> Array2<f64> {
    let mut h = ladder_quartic(n) * lambda;
    for i in 0..n {
        h[[i, i]] += i as f64 + 0.5;
    }
    h
}

/// Cyclic Jacobi eigensolver for a dense symmetric matrix. Returns ascending
/// eigenvalues and the matching eigenvectors as columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]));
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (k, &i) in order.iter().enumerate() {
        vectors.column_mut(k).assign(&v.column(i));
    }
    (values, vectors)
}

/// Rayleigh–Schrödinger energies through second order for λ x̂⁴.
pub fn perturbative_energy(k: usize, lambda: f64, order: u32) -> f64 {
    let n = k as f64;
    let mut e = n + 0.5;
    if order >= 1 {
        e += 0.75 * lambda * (2.0 * n * n + 2.0 * n + 1.0);
    }
    if order >= 2 {
        e -= lambda * lambda / 8.0 * (34.0 * n.powi(3) + 51.0 * n * n + 59.0 * n + 21.0);
    }
    e
}

/// Hermite–Gauss function from the physicists' polynomial recurrence and an
/// explicit factorial normalisation. Only usable for small `n`.
pub fn hermite_gauss_explicit(n: usize, x: f64) -> f64 {
    let mut h_prev = 1.0;
    let mut h = 2.0 * x;
    if n == 0 {
        h = 1.0;
    } else {
        for k in 1..n {
            let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
            h_prev = h;
            h = next;
        }
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let norm = (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt();
    h * (-x * x / 2.0).exp() / norm
}

/// φ(θ_j) = (2π)^{-1/2} Σ a_n e^{inθ_j} by direct summation on θ_j = 2πj/M.
pub fn phase_direct(amplitudes: &[Complex64], m: usize) -> Vec<Complex64> {
    let norm = 1.0 / (2.0 * PI).sqrt();
    (0..m)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / m as f64;
            amplitudes
                .iter()
                .enumerate()
                .map(|(n, a)| a * Complex64::from_polar(1.0, n as f64 * theta))
                .sum::<Complex64>()
                * norm
        })
        .collect()
}

/// Forward DFT coefficients c_k = (1/M) Σ_j f_j e^{-2πi jk/M}, indexed by
/// frequency k in `0..M` (negative frequencies at the top).
pub fn dft(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    (0..m)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    let ang = -2.0 * PI * ((j * k) % m) as f64 / m as f64;
                    f * Complex64::from_polar(1.0, ang)
                })
                .sum::<Complex64>()
                / m as f64
        })
        .collect()
}

/// Largest |c_k| over strictly negative frequencies k ∈ [M − M/2 + 1, M).
pub fn negative_frequency_leakage(samples: &[Complex64]) -> f64 {
    let c = dft(samples);
    let m = c.len();
    c[m / 2 + 1..].iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// exp(−i H t) by scaling and squaring a truncated Taylor series.
pub fn expm_minus_i(h: &Array2<f64>, t: f64) -> Array2<Complex64> {
    let n = h.nrows();
    let a: Array2<Complex64> = h.mapv(|v| Complex64::new(0.0, -v * t));
    let norm = a
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * Complex64::new(scale, 0.0);
    let eye = Array2::<Complex64>::eye(n);
    let mut term = eye.clone();
    let mut sum = eye;
    for k in 1..30 {
        term = term.dot(&a) / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

/// Coherent amplitudes by the forward product recurrence d_n = d_{n−1} α/√n.
pub fn coherent_recurrence(alpha: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut d = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for k in 0..n {
        if k > 0 {
            d = d * alpha / (k as f64).sqrt();
        }
        out.push(d);
    }
    out
}

/// Position density of the harmonic coherent state |α⟩.
pub fn coherent_position_density(alpha: Complex64, x: f64) -> f64 {
    let centre = 2f64.sqrt() * alpha.re;
    (-(x - centre).powi(2)).exp() / PI.sqrt()
}

/// Composite trapezoid rule on uniform samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    dx * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}
