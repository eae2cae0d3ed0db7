//! Symmetric band eigensolver: Givens band-to-tridiagonal reduction with bulge
//! chasing, followed by implicit-shift QL on the tridiagonal matrix.
//!
//! Transformations are accumulated in `qt`, whose *rows* are the columns of
//! the orthogonal factor, so every rotation touches two contiguous rows.

use crate::error::{Error, Result};
use crate::fock::SymmetricBandMatrix;

/// Iteration budget per eigenvalue in the QL phase.
const MAX_QL_ITERATIONS: usize = 60;

/// Row-major square scratch matrix.
struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Square { n, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Rows `p < q` ← (c·p + s·q, −s·p + c·q).
    fn rotate_rows(&mut self, p: usize, q: usize, c: f64, s: f64, cols: std::ops::Range<usize>) {
        let n = self.n;
        let (head, tail) = self.data.split_at_mut(q * n);
        let rp = &mut head[p * n..p * n + n];
        let rq = &mut tail[..n];
        for j in cols {
            let (a, b) = (rp[j], rq[j]);
            rp[j] = c * a + s * b;
            rq[j] = -s * a + c * b;
        }
    }
}

/// Eigenpairs of a symmetric band matrix; vectors are returned as rows.
pub(crate) struct BandEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub(crate) fn band_eigen(m: &SymmetricBandMatrix) -> Result<BandEigen> {
    let n = m.dim();
    if n == 0 {
        return Ok(BandEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let (mut diag, off, mut qt) = reduce_to_tridiagonal(m);
    tridiagonal_ql(&mut diag, &off, &mut qt)?;
    let vectors = (0..n).map(|i| qt.data[i * n..(i + 1) * n].to_vec()).collect();
    Ok(BandEigen {
        values: diag,
        vectors,
    })
}

/// Returns (diagonal, sub-diagonal, Qᵀ) with A = Q T Qᵀ.
fn reduce_to_tridiagonal(m: &SymmetricBandMatrix) -> (Vec<f64>, Vec<f64>, Square) {
    let n = m.dim();
    let b = m.bandwidth();
    let mut a = Square {
        n,
        data: vec![0.0; n * n],
    };
    for d in 0..=b {
        for (i, &v) in m.diagonal(d).iter().enumerate() {
            a.set(i + d, i, v);
            a.set(i, i + d, v);
        }
    }
    let mut qt = Square::identity(n);

    // peel one diagonal at a time, outermost first
    for d in (2..=b).rev() {
        for k in 0..n - d {
            let (mut row, mut col) = (k + d, k);
            loop {
                let target = a.at(row, col);
                if target != 0.0 {
                    let p = row - 1;
                    let pivot = a.at(p, col);
                    let r = pivot.hypot(target);
                    let (c, s) = (pivot / r, target / r);
                    let lo = p.saturating_sub(d + 1);
                    let hi = (row + d + 2).min(n);
                    a.rotate_rows(p, row, c, s, lo..hi);
                    for i in lo..hi {
                        let (x, y) = (a.at(i, p), a.at(i, row));
                        a.set(i, p, c * x + s * y);
                        a.set(i, row, -s * x + c * y);
                    }
                    a.set(row, col, 0.0);
                    a.set(col, row, 0.0);
                    qt.rotate_rows(p, row, c, s, 0..n);
                }
                // rotation in plane (row−1, row) pushes a bulge to (row + d, row − 1)
                if row + d >= n {
                    break;
                }
                col = row - 1;
                row += d;
            }
        }
    }

    let diag = (0..n).map(|i| a.at(i, i)).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a.at(i + 1, i)).collect();
    (diag, off, qt)
}

/// Implicit-shift QL on (diag, off). On return `diag` holds ascending
/// eigenvalues and the rows of `qt` the matching eigenvectors.
fn tridiagonal_ql(diag: &mut [f64], off: &[f64], qt: &mut Square) -> Result<()> {
    let n = diag.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    iterations,
                    index: l,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                // eigenvector columns i, i+1 ↔ rows of qt
                qt.rotate_rows(i, i + 1, c, -s, 0..n);
            }
            if deflated_early {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // selection sort keeps the row swaps in qt cheap to reason about
    for i in 0..n {
        let mut k = i;
        for j in i + 1..n {
            if diag[j] < diag[k] {
                k = j;
            }
        }
        if k != i {
            diag.swap(i, k);
            for col in 0..n {
                qt.data.swap(i * n + col, k * n + col);
            }
        }
    }
    Ok(())
}
