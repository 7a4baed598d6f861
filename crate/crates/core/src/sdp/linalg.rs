//! Minimal dense linear algebra for the SDP solver: cyclic Jacobi
//! eigendecomposition of symmetric matrices and a Cholesky factorization.
//! Matrices are row-major `Vec<S>`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigendecomposition of a symmetric `n x n` matrix by cyclic Jacobi
/// rotations. Returns `(eigenvalues, v)` with eigenvector `k` stored in
/// column `k` of `v` (`v[i * n + k]`), so `a = v * diag(vals) * v^T`.
pub fn symmetric_eigen<S: Scalar>(a: &[S], n: usize) -> (Vec<S>, Vec<S>) {
    let mut m = a.to_vec();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    if n <= 1 {
        return (m, v);
    }
    let eps = S::from_f64(1e-30);
    let max_sweeps = 64;
    for _sweep in 0..max_sweeps {
        let mut off = S::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + m[p * n + q] * m[p * n + q];
            }
        }
        if off <= eps {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == S::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let tau = (aqq - app) / (S::from_f64(2.0) * apq);
                let t = if tau >= S::zero() {
                    S::one() / (tau + (S::one() + tau * tau).sqrt())
                } else {
                    -S::one() / (-tau + (S::one() + tau * tau).sqrt())
                };
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = t * c;
                // rotate rows/cols p and q
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals: Vec<S> = (0..n).map(|i| m[i * n + i]).collect();
    (vals, v)
}

/// Project onto the positive semidefinite cone (within symmetric matrices,
/// under the Frobenius inner product): symmetrize, then clamp negative
/// eigenvalues to zero. The explicit symmetrization also removes any skew
/// component of the input, which iterative callers rely on.
pub fn project_psd<S: Scalar>(a: &mut [S], n: usize) {
    let half = S::from_f64(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (a[i * n + j] + a[j * n + i]) * half;
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
    let (vals, v) = symmetric_eigen(a, n);
    if vals.iter().all(|&l| l >= S::zero()) {
        return;
    }
    for x in a.iter_mut() {
        *x = S::zero();
    }
    for k in 0..n {
        let l = vals[k];
        if l <= S::zero() {
            continue;
        }
        for i in 0..n {
            let vik = v[i * n + k] * l;
            if vik == S::zero() {
                continue;
            }
            for j in 0..n {
                a[i * n + j] = a[i * n + j] + vik * v[j * n + k];
            }
        }
    }
    // re-symmetrize against rounding drift
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (a[i * n + j] + a[j * n + i]) * S::from_f64(0.5);
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
}

/// In-place lower Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky<S: Scalar> {
    l: Vec<S>,
    n: usize,
}

impl<S: Scalar> Cholesky<S> {
    pub fn factor(a: &[S], n: usize) -> Result<Self> {
        let mut l = vec![S::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum = sum - l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= S::zero() {
                        return Err(Error::DegenerateConstraints {
                            pivot: sum.to_f64(),
                        });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { l, n })
    }

    /// Solve `L L^T x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut sum = y[i];
            for k in 0..i {
                sum = sum - self.l[i * n + k] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum = sum - self.l[k * n + i] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_reconstructs() {
        let n = 4;
        let a: Vec<f64> = vec![
            4.0, 1.0, 0.5, 0.0, //
            1.0, 3.0, 0.2, 0.1, //
            0.5, 0.2, 2.0, 0.3, //
            0.0, 0.1, 0.3, 1.0,
        ];
        let (vals, v) = symmetric_eigen(&a, n);
        for i in 0..n {
            for j in 0..n {
                let mut r = 0.0;
                for k in 0..n {
                    r += v[i * n + k] * vals[k] * v[j * n + k];
                }
                assert!((r - a[i * n + j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn psd_projection_clamps() {
        let n = 2;
        // eigenvalues 1 and -1
        let mut a = vec![0.0f64, 1.0, 1.0, 0.0];
        project_psd(&mut a, n);
        let (vals, _) = symmetric_eigen(&a, n);
        assert!(vals.iter().all(|&l| l >= -1e-12));
        assert!((a[0] - 0.5).abs() < 1e-12 && (a[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_solves() {
        let n = 3;
        let a = vec![4.0f64, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0];
        let chol = Cholesky::factor(&a, n).unwrap();
        let b = vec![1.0f64, 2.0, 3.0];
        let x = chol.solve(&b);
        for i in 0..n {
            let mut r = 0.0;
            for j in 0..n {
                r += a[i * n + j] * x[j];
            }
            assert!((r - b[i]).abs() < 1e-10);
        }
    }
}
