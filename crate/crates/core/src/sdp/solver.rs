//! Numerical core of the SDP relaxation.
//!
//! The Gram matrix of a feasible vector family is singular by construction:
//! for every variable `x` the combination `sum_a x_a - v0` must be the zero
//! vector. We therefore optimize over `H` in the reduced coordinates
//! `G = W H W^T`, where the columns of `W` span the orthogonal complement of
//! those forced null vectors (one per-block Helmert basis per variable plus a
//! shared column). The sum-to-`v0` identities then hold to machine precision
//! for every PSD `H`, and the remaining constraints are small:
//!
//! - `G[v0, v0] = 1` and per-variable orthogonality entries (equalities),
//! - cross-variable entries `>= 0` (inequalities, given slack variables).
//!
//! The problem `min <c, H>` over that set is solved by three-way consensus
//! splitting (projection onto the PSD cone by eigendecomposition, a cached
//! affine projection, and a slack clamp) with over-relaxation and residual
//! balancing.

use super::linalg::{project_psd, symmetric_eigen, Cholesky};
use crate::csp::Instance;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues below this are treated as zero when recovering vectors.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Consensus residual target.
    pub tol: f64,
    /// Residual still accepted when the iteration cap is reached.
    pub accept_tol: f64,
    pub rho: f64,
    pub over_relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 10_000,
            tol: 1e-9,
            accept_tol: 1e-7,
            rho: 1.0,
            over_relaxation: 1.0,
        }
    }
}

/// Sparse linear functional on the reduced matrix `H` (indices into the
/// row-major `m x m` storage).
struct Functional<S> {
    entries: Vec<(u32, S)>,
}

impl<S: Scalar> Functional<S> {
    fn apply(&self, h: &[S]) -> S {
        self.entries
            .iter()
            .map(|&(idx, coeff)| coeff * h[idx as usize])
            .sum()
    }

    fn add_scaled(&self, h: &mut [S], scale: S) {
        for &(idx, coeff) in &self.entries {
            h[idx as usize] = h[idx as usize] + coeff * scale;
        }
    }

    fn dot(&self, other: &Functional<S>) -> S {
        // entries are sorted by index
        let mut sum = S::zero();
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum = sum + self.entries[i].1 * other.entries[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// The reduced formulation of one instance's relaxation.
pub(super) struct Reduced<S: Scalar> {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub num_vars: usize,
    /// Sparse rows of `W`: `w_rows[i]` lists `(column, value)`.
    w_rows: Vec<Vec<(usize, S)>>,
    equalities: Vec<Functional<S>>,
    eq_rhs: Vec<S>,
    inequalities: Vec<Functional<S>>,
    objective: Vec<S>,
}

fn vec_index(x: usize, a: usize, d: usize) -> usize {
    1 + x * d + a
}

impl<S: Scalar> Reduced<S> {
    pub fn build(instance: &Instance<S>) -> Result<Self> {
        let d = instance.domain.size();
        let num_vars = instance.num_vars;
        let n = num_vars * d + 1;
        let m = 1 + num_vars * (d - 1);

        // shared column: e_{v0} + (1/d) * sum of all value coordinates
        let gamma = S::one() / (S::one() + S::from_usize(num_vars) / S::from_usize(d)).sqrt();
        let mut w_rows: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
        w_rows[0].push((0, gamma));
        // per-variable Helmert columns spanning the sum-zero subspace
        for x in 0..num_vars {
            for a in 0..d {
                w_rows[vec_index(x, a, d)].push((0, gamma / S::from_usize(d)));
            }
            for j in 1..d {
                let col = 1 + x * (d - 1) + (j - 1);
                let s = S::one() / (S::from_usize(j) * S::from_usize(j + 1)).sqrt();
                for a in 0..j {
                    w_rows[vec_index(x, a, d)].push((col, s));
                }
                w_rows[vec_index(x, j, d)].push((col, -S::from_usize(j) * s));
            }
        }

        let functional = |i: usize, j: usize| -> Functional<S> {
            let mut acc: std::collections::BTreeMap<u32, S> = Default::default();
            let half = S::from_f64(0.5);
            for &(p, wp) in &w_rows[i] {
                for &(q, wq) in &w_rows[j] {
                    let v = wp * wq * half;
                    let e1 = acc.entry((p * m + q) as u32).or_insert_with(S::zero);
                    *e1 = *e1 + v;
                    let e2 = acc.entry((q * m + p) as u32).or_insert_with(S::zero);
                    *e2 = *e2 + v;
                }
            }
            Functional {
                entries: acc.into_iter().collect(),
            }
        };

        let mut equalities = Vec::new();
        let mut eq_rhs = Vec::new();
        equalities.push(functional(0, 0));
        eq_rhs.push(S::one());
        for x in 0..num_vars {
            for a in 0..d {
                for b in (a + 1)..d {
                    equalities.push(functional(vec_index(x, a, d), vec_index(x, b, d)));
                    eq_rhs.push(S::zero());
                }
            }
        }

        let mut inequalities = Vec::new();
        for x in 0..num_vars {
            for y in (x + 1)..num_vars {
                for a in 0..d {
                    for b in 0..d {
                        inequalities.push(functional(vec_index(x, a, d), vec_index(y, b, d)));
                    }
                }
            }
        }

        let mut objective = vec![S::zero(); m * m];
        for c in &instance.constraints {
            if c.arity() > 2 {
                return Err(Error::ArityUnsupported { arity: c.arity() });
            }
            let (x, y) = if c.arity() == 2 {
                (c.scope[0], c.scope[1])
            } else {
                (c.scope[0], c.scope[0])
            };
            for a in 0..d {
                for b in 0..d {
                    let excluded = if c.arity() == 2 {
                        !c.relation.contains(&[a, b])
                    } else {
                        a != b || !c.relation.contains(&[a])
                    };
                    if excluded {
                        let f = functional(vec_index(x, a, d), vec_index(y, b, d));
                        f.add_scaled(&mut objective, c.weight);
                    }
                }
            }
        }

        Ok(Reduced {
            n,
            m,
            d,
            num_vars,
            w_rows,
            equalities,
            eq_rhs,
            inequalities,
            objective,
        })
    }

    /// Strictly feasible start: every value gets mass `1/d` plus a simplex
    /// spread in its own block, so cross entries are `1/d^2 > 0`, same-block
    /// entries are exactly orthogonal, and the reduced matrix has full rank.
    fn interior_start(&self) -> Vec<S> {
        let (n, m, d) = (self.n, self.m, self.d);
        // start vectors, as columns over R^n
        let inv_d = S::one() / S::from_usize(d);
        let spread = S::one() / S::from_usize(d).sqrt();
        let mut vectors: Vec<Vec<S>> = Vec::with_capacity(n);
        let mut v0 = vec![S::zero(); n];
        v0[0] = S::one();
        vectors.push(v0);
        for x in 0..self.num_vars {
            for a in 0..d {
                let mut v = vec![S::zero(); n];
                v[0] = inv_d;
                for b in 0..d {
                    let delta = if a == b { S::one() } else { S::zero() };
                    v[vec_index(x, b, d)] = spread * (delta - inv_d);
                }
                vectors.push(v);
            }
        }
        let mut gram = vec![S::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut dot = S::zero();
                for k in 0..n {
                    dot = dot + vectors[i][k] * vectors[j][k];
                }
                gram[i * n + j] = dot;
            }
        }
        // H0 = W^T G0 W via the sparse rows of W
        let mut b = vec![S::zero(); m * n]; // b[p][j] = sum_i W[i][p] G0[i][j]
        for (i, row) in self.w_rows.iter().enumerate() {
            for &(p, wip) in row {
                for j in 0..n {
                    b[p * n + j] = b[p * n + j] + wip * gram[i * n + j];
                }
            }
        }
        let mut h0 = vec![S::zero(); m * m];
        for (j, row) in self.w_rows.iter().enumerate() {
            for &(q, wjq) in row {
                for p in 0..m {
                    h0[p * m + q] = h0[p * m + q] + b[p * n + j] * wjq;
                }
            }
        }
        h0
    }

    /// Recover the vector family from a PSD reduced matrix.
    pub fn extract(&self, h: &[S]) -> (Vec<S>, Vec<Vec<S>>) {
        let (n, m) = (self.n, self.m);
        let (vals, q) = symmetric_eigen(h, m);
        let clamp = S::from_f64(EIGENVALUE_CLAMP);
        let roots: Vec<S> = vals
            .iter()
            .map(|&l| if l < clamp { S::zero() } else { l.sqrt() })
            .collect();
        let mut vectors = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = vec![S::zero(); n];
            for k in 0..m {
                if roots[k] == S::zero() {
                    continue;
                }
                let mut pik = S::zero();
                for &(p, wip) in &self.w_rows[i] {
                    pik = pik + wip * q[p * m + k];
                }
                v[k] = roots[k] * pik;
            }
            vectors.push(v);
        }
        let v0 = vectors.remove(0);
        (v0, vectors)
    }

}

struct Point<S> {
    h: Vec<S>,
    s: Vec<S>,
}

impl<S: Scalar> Point<S> {
    fn zero(m: usize, q: usize) -> Self {
        Point {
            h: vec![S::zero(); m * m],
            s: vec![S::zero(); q],
        }
    }

    fn clone_from_point(&mut self, other: &Point<S>) {
        self.h.copy_from_slice(&other.h);
        self.s.copy_from_slice(&other.s);
    }

    fn max_abs_diff(&self, other: &Point<S>) -> S {
        let mut r = S::zero();
        for (a, b) in self.h.iter().zip(&other.h) {
            r = r.max((*a - *b).abs());
        }
        for (a, b) in self.s.iter().zip(&other.s) {
            r = r.max((*a - *b).abs());
        }
        r
    }
}

pub(super) struct AdmmOutcome<S> {
    pub h: Vec<S>,
    pub iterations: usize,
    #[allow(dead_code)]
    pub consensus_residual: S,
}

/// Two-block splitting over `(H, s)`: alternate the affine projection (with
/// the linear objective folded in) against the cone projection
/// (PSD eigenvalue clamp on `H`, nonnegativity clamp on `s`), with
/// over-relaxation, scaled duals, and residual balancing of the penalty.
pub(super) fn solve_reduced<S: Scalar>(
    red: &Reduced<S>,
    options: &SolverOptions,
) -> Result<AdmmOutcome<S>> {
    let m = red.m;
    let q = red.inequalities.len();
    let n_eq = red.equalities.len();
    let n_rows = n_eq + q;

    // Constant Gram matrix of the stacked constraint rows (with slacks).
    let mut gram = vec![S::zero(); n_rows * n_rows];
    for i in 0..n_rows {
        let fi = if i < n_eq {
            &red.equalities[i]
        } else {
            &red.inequalities[i - n_eq]
        };
        for j in 0..=i {
            let fj = if j < n_eq {
                &red.equalities[j]
            } else {
                &red.inequalities[j - n_eq]
            };
            let mut v = fi.dot(fj);
            if i == j && i >= n_eq {
                v = v + S::one();
            }
            gram[i * n_rows + j] = v;
            gram[j * n_rows + i] = v;
        }
    }
    let chol = Cholesky::factor(&gram, n_rows)?;

    let mut rho = S::from_f64(options.rho);
    let alpha = S::from_f64(options.over_relaxation);
    let one_minus_alpha = S::one() - alpha;
    let tol = S::from_f64(options.tol);

    let h0 = red.interior_start();
    let mut z = Point::<S>::zero(m, q);
    z.h.copy_from_slice(&h0);
    for (j, f) in red.inequalities.iter().enumerate() {
        z.s[j] = f.apply(&z.h);
    }

    let mut u = Point::<S>::zero(m, q);
    let mut x = Point::<S>::zero(m, q);
    let mut x_hat = Point::<S>::zero(m, q);
    let mut z_prev = Point::<S>::zero(m, q);
    let mut rhs = vec![S::zero(); n_rows];

    let mut iterations = 0;
    let mut residual = S::infinity();
    while iterations < options.max_iter {
        iterations += 1;
        z_prev.clone_from_point(&z);

        // affine + objective step: project z - u - c/rho onto the constraints
        for i in 0..m * m {
            x.h[i] = z.h[i] - u.h[i] - red.objective[i] / rho;
        }
        for j in 0..q {
            x.s[j] = z.s[j] - u.s[j];
        }
        for (t, f) in red.equalities.iter().enumerate() {
            rhs[t] = f.apply(&x.h) - red.eq_rhs[t];
        }
        for (j, f) in red.inequalities.iter().enumerate() {
            rhs[n_eq + j] = f.apply(&x.h) - x.s[j];
        }
        let lambda = chol.solve(&rhs);
        for (t, f) in red.equalities.iter().enumerate() {
            f.add_scaled(&mut x.h, -lambda[t]);
        }
        for (j, f) in red.inequalities.iter().enumerate() {
            f.add_scaled(&mut x.h, -lambda[n_eq + j]);
            x.s[j] = x.s[j] + lambda[n_eq + j];
        }

        // cone step on the over-relaxed point
        for i in 0..m * m {
            x_hat.h[i] = alpha * x.h[i] + one_minus_alpha * z.h[i];
            z.h[i] = x_hat.h[i] + u.h[i];
        }
        for j in 0..q {
            x_hat.s[j] = alpha * x.s[j] + one_minus_alpha * z.s[j];
            z.s[j] = x_hat.s[j] + u.s[j];
        }
        project_psd(&mut z.h, m);
        for v in z.s.iter_mut() {
            *v = (*v).max(S::zero());
        }

        // scaled dual step
        for i in 0..m * m {
            u.h[i] = u.h[i] + x_hat.h[i] - z.h[i];
        }
        for j in 0..q {
            u.s[j] = u.s[j] + x_hat.s[j] - z.s[j];
        }

        if iterations % 25 == 0 || iterations == options.max_iter {
            let primal = x.max_abs_diff(&z);
            let dual = rho * z.max_abs_diff(&z_prev);
            residual = primal.max(dual);
            if std::env::var_os("ROBUST_CSP_SDP_TRACE").is_some() {
                eprintln!(
                    "iter {iterations}: primal {:.3e} dual {:.3e} rho {:.3e}",
                    primal.to_f64(),
                    dual.to_f64(),
                    rho.to_f64()
                );
            }
            if residual < tol {
                break;
            }
            // residual balancing
            let ten = S::from_f64(10.0);
            if primal > ten * dual && rho.to_f64() < 1e4 {
                rho = rho * S::from_f64(2.0);
                for v in u.h.iter_mut() {
                    *v = *v * S::from_f64(0.5);
                }
                for v in u.s.iter_mut() {
                    *v = *v * S::from_f64(0.5);
                }
            } else if dual > ten * primal && rho.to_f64() > 1e-4 {
                rho = rho * S::from_f64(0.5);
                for v in u.h.iter_mut() {
                    *v = *v * S::from_f64(2.0);
                }
                for v in u.s.iter_mut() {
                    *v = *v * S::from_f64(2.0);
                }
            }
        }
    }

    if residual.to_f64() > options.accept_tol {
        return Err(Error::SolverFailure {
            residual: residual.to_f64(),
            iterations,
        });
    }

    // The cone-step output is exactly PSD; rescale so G[v0,v0] is exactly 1.
    let mut h = z.h.clone();
    let f00 = red.equalities[0].apply(&h);
    if f00.to_f64() > 0.5 {
        let inv = S::one() / f00;
        for v in h.iter_mut() {
            *v = *v * inv;
        }
    }
    Ok(AdmmOutcome {
        h,
        iterations,
        consensus_residual: residual,
    })
}
