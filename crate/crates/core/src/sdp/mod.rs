//! The standard vector relaxation of a binary CSP instance and its solver.
//!
//! Variables get one vector per (variable, value) pair plus a special unit
//! vector `v0`; the objective charges, per constraint, the total inner-product
//! mass on value pairs outside the constraint relation.

pub mod linalg;
mod solver;

use serde::{Deserialize, Serialize};

pub use solver::SolverOptions;

use crate::csp::{Assignment, Constraint, Instance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Feasibility tolerance used throughout.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// The relaxation of one instance.
pub struct SdpProblem<S: Scalar> {
    pub instance: Instance<S>,
}

/// Build the relaxation. All constraints must be unary or binary; unary
/// constraints are folded as diagonal binary ones in the objective.
pub fn build_relaxation<S: Scalar>(instance: &Instance<S>) -> Result<SdpProblem<S>> {
    if let Some(c) = instance.constraints.iter().find(|c| c.arity() > 2) {
        return Err(Error::ArityUnsupported { arity: c.arity() });
    }
    Ok(SdpProblem {
        instance: instance.clone(),
    })
}

impl<S: Scalar> SdpProblem<S> {
    /// `num_vars * |D| + 1`
    pub fn dimension(&self) -> usize {
        self.instance.num_vars * self.instance.domain.size() + 1
    }

    /// The pairs `(a, b)` outside the constraint relation, as charged by the
    /// objective (diagonal pairs only, for unary constraints).
    pub fn excluded_pairs(&self, c: &Constraint<S>) -> Vec<(usize, usize)> {
        let d = self.instance.domain.size();
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let excluded = if c.arity() == 2 {
                    !c.relation.contains(&[a, b])
                } else {
                    a != b || !c.relation.contains(&[a])
                };
                if excluded {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// A solved relaxation: the vector family, its Gram matrix, and bookkeeping.
#[derive(Clone, Debug)]
pub struct SdpSolution<S: Scalar> {
    pub num_vars: usize,
    pub domain_size: usize,
    /// Ambient dimension `num_vars * |D| + 1`; all vectors have this length.
    pub dim: usize,
    pub v0: Vec<S>,
    /// `vectors[x * |D| + a]` is the vector for value `a` of variable `x`.
    pub vectors: Vec<Vec<S>>,
    /// Row-major `dim x dim` Gram matrix (index 0 is `v0`).
    gram: Vec<S>,
    /// Objective value of this solution.
    pub objective: S,
    pub iterations: usize,
    /// Maximum feasibility violation over the base conditions.
    pub feasibility_residual: S,
}

impl<S: Scalar> SdpSolution<S> {
    pub fn from_vectors(
        num_vars: usize,
        domain_size: usize,
        v0: Vec<S>,
        vectors: Vec<Vec<S>>,
    ) -> Self {
        let dim = v0.len();
        let mut sol = SdpSolution {
            num_vars,
            domain_size,
            dim,
            v0,
            vectors,
            gram: Vec::new(),
            objective: S::zero(),
            iterations: 0,
            feasibility_residual: S::zero(),
        };
        sol.rebuild_gram();
        sol
    }

    /// The exact relaxation of an assignment: `x_{s(x)} = v0`, others zero.
    pub fn integral(instance: &Instance<S>, s: &Assignment) -> Self {
        let d = instance.domain.size();
        let dim = instance.num_vars * d + 1;
        let mut v0 = vec![S::zero(); dim];
        v0[0] = S::one();
        let mut vectors = vec![vec![S::zero(); dim]; instance.num_vars * d];
        for x in 0..instance.num_vars {
            vectors[x * d + s.values[x]][0] = S::one();
        }
        let mut sol = SdpSolution::from_vectors(instance.num_vars, d, v0, vectors);
        sol.objective = S::one() - instance.evaluate(s).expect("assignment fits instance");
        sol
    }

    fn rebuild_gram(&mut self) {
        let dim1 = self.num_vars * self.domain_size + 1;
        let mut gram = vec![S::zero(); dim1 * dim1];
        let dot = |a: &[S], b: &[S]| -> S { a.iter().zip(b).map(|(&x, &y)| x * y).sum() };
        for i in 0..dim1 {
            let vi = if i == 0 { &self.v0 } else { &self.vectors[i - 1] };
            for j in 0..=i {
                let vj = if j == 0 { &self.v0 } else { &self.vectors[j - 1] };
                let g = dot(vi, vj);
                gram[i * dim1 + j] = g;
                gram[j * dim1 + i] = g;
            }
        }
        self.gram = gram;
    }

    #[inline]
    fn gidx(&self, x: usize, a: usize) -> usize {
        1 + x * self.domain_size + a
    }

    /// `x_a . y_b`
    pub fn pair(&self, x: usize, a: usize, y: usize, b: usize) -> S {
        let n = self.num_vars * self.domain_size + 1;
        self.gram[self.gidx(x, a) * n + self.gidx(y, b)]
    }

    /// `x_a . v0`
    pub fn dot_v0(&self, x: usize, a: usize) -> S {
        let n = self.num_vars * self.domain_size + 1;
        self.gram[self.gidx(x, a) * n]
    }

    pub fn norm_sq(&self, x: usize, a: usize) -> S {
        self.pair(x, a, x, a)
    }

    /// `||x_A||^2` for a value subset given as a bitmask.
    pub fn norm_sq_subset(&self, x: usize, mask: u64) -> S {
        let mut total = S::zero();
        for a in 0..self.domain_size {
            if mask & (1 << a) == 0 {
                continue;
            }
            for b in 0..self.domain_size {
                if mask & (1 << b) != 0 {
                    total = total + self.pair(x, a, x, b);
                }
            }
        }
        total
    }

    /// `x_A . y_B` for value subsets.
    pub fn pair_subsets(&self, x: usize, mask_a: u64, y: usize, mask_b: u64) -> S {
        let mut total = S::zero();
        for a in 0..self.domain_size {
            if mask_a & (1 << a) == 0 {
                continue;
            }
            for b in 0..self.domain_size {
                if mask_b & (1 << b) != 0 {
                    total = total + self.pair(x, a, y, b);
                }
            }
        }
        total
    }

    /// The ambient vector `x_A = sum_{a in A} x_a`.
    pub fn subset_vector(&self, x: usize, mask: u64) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim];
        for a in 0..self.domain_size {
            if mask & (1 << a) != 0 {
                for (vi, xi) in v.iter_mut().zip(&self.vectors[x * self.domain_size + a]) {
                    *vi = *vi + *xi;
                }
            }
        }
        v
    }

    pub fn vector(&self, x: usize, a: usize) -> &[S] {
        &self.vectors[x * self.domain_size + a]
    }
}

/// `loss(C) = sum over excluded pairs of x_a . y_b`.
pub fn loss<S: Scalar>(c: &Constraint<S>, sol: &SdpSolution<S>) -> S {
    let d = sol.domain_size;
    let (x, y) = if c.arity() == 2 {
        (c.scope[0], c.scope[1])
    } else {
        (c.scope[0], c.scope[0])
    };
    let mut total = S::zero();
    for a in 0..d {
        for b in 0..d {
            let excluded = if c.arity() == 2 {
                !c.relation.contains(&[a, b])
            } else {
                a != b || !c.relation.contains(&[a])
            };
            if excluded {
                total = total + sol.pair(x, a, y, b);
            }
        }
    }
    total
}

/// Solve the relaxation to additive error `delta` with default options.
pub fn solve<S: Scalar>(problem: &SdpProblem<S>, delta: f64) -> Result<SdpSolution<S>> {
    solve_with_options(problem, delta, &SolverOptions::default())
}

pub fn solve_with_options<S: Scalar>(
    problem: &SdpProblem<S>,
    delta: f64,
    options: &SolverOptions,
) -> Result<SdpSolution<S>> {
    if delta <= 0.0 {
        return Err(Error::InvalidConfig("delta must be positive".into()));
    }
    let mut options = options.clone();
    options.tol = options.tol.min(delta * 1e-2).max(1e-11);
    let red = solver::Reduced::build(&problem.instance)?;
    let outcome = solver::solve_reduced(&red, &options)?;
    let (v0, vectors) = red.extract(&outcome.h);
    let mut sol = SdpSolution::from_vectors(
        problem.instance.num_vars,
        problem.instance.domain.size(),
        v0,
        vectors,
    );
    sol.iterations = outcome.iterations;
    sol.objective = problem
        .instance
        .constraints
        .iter()
        .map(|c| c.weight * loss(c, &sol))
        .sum();
    let report = validate_feasibility(&sol, FEASIBILITY_TOL);
    sol.feasibility_residual = S::from_f64(report.max_residual());
    Ok(sol)
}

/// Residuals of the feasibility conditions and the derived identities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Most negative cross inner product (condition: all pairs nonnegative).
    pub pair_nonneg: f64,
    /// Largest `|x_a . x_b|` for distinct values of one variable.
    pub orthogonality: f64,
    /// Largest `||sum_a x_a - v0||`.
    pub sum_to_v0: f64,
    /// `| ||v0|| - 1 |`.
    pub v0_unit: f64,
    /// Largest `| ||x_a||^2 - x_a . v0 |`.
    pub norm_is_dot_v0: f64,
    /// Largest positive `x_a . y_b - ||x_a||^2`.
    pub pair_le_norm: f64,
    /// Largest positive `||x_a||^2 - ||y_b||^2 - ||x_a - y_b||^2`.
    pub norm_diff_le_dist: f64,
    /// Most negative `(v0 - x_a) . (v0 - y_b)`.
    pub complement_nonneg: f64,
    pub tol: f64,
}

impl FeasibilityReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.pair_nonneg,
            self.orthogonality,
            self.sum_to_v0,
            self.v0_unit,
            self.norm_is_dot_v0,
            self.pair_le_norm,
            self.norm_diff_le_dist,
            self.complement_nonneg,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn within_tol(&self) -> bool {
        self.max_residual() <= self.tol
    }
}

/// Check the base conditions and the derived inequalities; report-only.
pub fn validate_feasibility<S: Scalar>(sol: &SdpSolution<S>, tol: f64) -> FeasibilityReport {
    let d = sol.domain_size;
    let nv = sol.num_vars;
    let mut pair_nonneg = 0.0f64;
    let mut orthogonality = 0.0f64;
    let mut pair_le_norm = 0.0f64;
    let mut norm_diff_le_dist = 0.0f64;
    let mut complement_nonneg = 0.0f64;
    let mut norm_is_dot_v0 = 0.0f64;

    let v0_norm_sq: S = sol.v0.iter().map(|&v| v * v).sum();
    let v0_unit = (v0_norm_sq.to_f64().sqrt() - 1.0).abs();

    let mut sum_to_v0 = 0.0f64;
    for x in 0..nv {
        let sum = sol.subset_vector(x, (1u64 << d) - 1);
        let err: S = sum
            .iter()
            .zip(&sol.v0)
            .map(|(&s, &v)| (s - v) * (s - v))
            .sum();
        sum_to_v0 = sum_to_v0.max(err.to_f64().sqrt());
    }

    for x in 0..nv {
        for a in 0..d {
            let nsq = sol.norm_sq(x, a).to_f64();
            norm_is_dot_v0 = norm_is_dot_v0.max((nsq - sol.dot_v0(x, a).to_f64()).abs());
            for b in 0..d {
                if a < b {
                    orthogonality = orthogonality.max(sol.pair(x, a, x, b).to_f64().abs());
                }
            }
            for y in 0..nv {
                if y == x {
                    continue;
                }
                for b in 0..d {
                    let g = sol.pair(x, a, y, b).to_f64();
                    pair_nonneg = pair_nonneg.max(-g);
                    let nsq_b = sol.norm_sq(y, b).to_f64();
                    pair_le_norm = pair_le_norm.max(g - nsq);
                    let dist_sq = nsq + nsq_b - 2.0 * g;
                    norm_diff_le_dist = norm_diff_le_dist.max(nsq - nsq_b - dist_sq);
                    // (v0 - x_a).(v0 - y_b) = 1 - x_a.v0 - y_b.v0 + x_a.y_b
                    let comp = v0_norm_sq.to_f64() - sol.dot_v0(x, a).to_f64()
                        - sol.dot_v0(y, b).to_f64()
                        + g;
                    complement_nonneg = complement_nonneg.max(-comp);
                }
            }
        }
    }

    FeasibilityReport {
        pair_nonneg,
        orthogonality,
        sum_to_v0,
        v0_unit,
        norm_is_dot_v0,
        pair_le_norm,
        norm_diff_le_dist,
        complement_nonneg,
        tol,
    }
}

/// Outcome of the heavy-prefix preprocessing pass.
pub enum Preprocess1Outcome {
    /// A satisfying assignment of a heavy satisfiable prefix.
    Solved(Assignment),
    /// No heavy satisfiable prefix; continue with the SDP.
    PassThrough,
}

/// Sort constraints by weight (descending, ties by input order), find the
/// largest satisfiable prefix, and return its satisfying assignment when the
/// prefix carries weight at least `1 - 1/m`.
///
/// Expects a normalized instance. `exact_solver` decides satisfiability of
/// sub-instances and produces witnesses.
pub fn preprocess1<S: Scalar, F>(
    instance: &Instance<S>,
    mut exact_solver: F,
) -> Result<Preprocess1Outcome>
where
    F: FnMut(&Instance<S>) -> Option<Assignment>,
{
    let m = instance.num_constraints();
    if m == 0 {
        return Ok(Preprocess1Outcome::Solved(Assignment::new(vec![
            0;
            instance.num_vars
        ])));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        instance.constraints[j]
            .weight
            .partial_cmp(&instance.constraints[i].weight)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    // satisfiability of prefixes is monotone, so bisect for the largest j
    let mut lo = 0usize;
    let mut hi = m;
    let mut witness_at_lo: Option<Assignment> = exact_solver(&instance.restrict_to(&[]));
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        match exact_solver(&instance.restrict_to(&order[..mid])) {
            Some(w) => {
                lo = mid;
                witness_at_lo = Some(w);
            }
            None => hi = mid - 1,
        }
    }
    let prefix_weight: S = order[..lo]
        .iter()
        .map(|&i| instance.constraints[i].weight)
        .sum();
    let threshold = S::one() - S::one() / S::from_usize(m);
    if prefix_weight.to_f64() + 1e-12 >= threshold.to_f64() {
        let witness = witness_at_lo.expect("empty prefix is satisfiable");
        Ok(Preprocess1Outcome::Solved(witness))
    } else {
        Ok(Preprocess1Outcome::PassThrough)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::exact_solve;
    use crate::csp::{Constraint, Domain, Relation};
    use std::sync::Arc;

    fn contradictory_two_sat() -> Instance<f64> {
        let d = 2;
        let clauses = [
            vec![(1, 0), (0, 1), (1, 1)],
            vec![(0, 0), (0, 1), (1, 1)],
            vec![(1, 0), (0, 0), (1, 1)],
            vec![(0, 0), (0, 1), (1, 0)],
        ];
        let constraints = clauses
            .iter()
            .map(|pairs| {
                Constraint::new(
                    vec![0, 1],
                    Arc::new(Relation::binary(d, pairs).unwrap()),
                    0.25,
                )
            })
            .collect();
        Instance::new(Domain::new(d).unwrap(), 2, constraints).unwrap()
    }

    #[test]
    fn dimension_matches() {
        let inst = contradictory_two_sat();
        let problem = build_relaxation(&inst).unwrap();
        assert_eq!(problem.dimension(), 5);
    }

    #[test]
    fn integral_solution_objective() {
        let inst = contradictory_two_sat();
        let s = Assignment::new(vec![0, 0]);
        let sol = SdpSolution::integral(&inst, &s);
        let report = validate_feasibility(&sol, FEASIBILITY_TOL);
        assert!(report.within_tol(), "integral solution feasible: {report:?}");
        assert!((sol.objective - 0.25).abs() < 1e-12);
        let total: f64 = inst
            .constraints
            .iter()
            .map(|c| c.weight * loss(c, &sol))
            .sum();
        assert!((total - sol.objective).abs() < 1e-12);
    }

    #[test]
    fn loss_on_integral_constraints() {
        let inst = contradictory_two_sat();
        let s = Assignment::new(vec![1, 1]);
        let sol = SdpSolution::integral(&inst, &s);
        // clause !x or !y is violated by (1,1); the others are satisfied
        assert!((loss(&inst.constraints[3], &sol) - 1.0).abs() < 1e-12);
        assert!(loss(&inst.constraints[0], &sol).abs() < 1e-12);
    }

    #[test]
    fn solve_contradictory_two_sat() {
        let inst = contradictory_two_sat();
        let problem = build_relaxation(&inst).unwrap();
        let delta = 1e-3;
        let sol = solve(&problem, delta).unwrap();
        let report = validate_feasibility(&sol, FEASIBILITY_TOL);
        assert!(report.within_tol(), "feasibility: {report:?}");
        assert!(
            sol.objective <= 0.25 + delta,
            "objective {} above integral bound",
            sol.objective
        );
        assert!(sol.objective >= -1e-9);
    }

    #[test]
    fn solve_satisfiable_reaches_zero() {
        let lang = crate::csp::generate::two_sat_language();
        let (inst, _) =
            crate::csp::generate::generate_planted::<f64>(&lang, 5, 12, 0.0, 11).unwrap();
        let problem = build_relaxation(&inst).unwrap();
        let sol = solve(&problem, 1e-4).unwrap();
        assert!(sol.objective <= 1e-4, "objective {}", sol.objective);
    }

    #[test]
    fn corrupted_v0_flagged() {
        let inst = contradictory_two_sat();
        let s = Assignment::new(vec![0, 0]);
        let mut sol = SdpSolution::integral(&inst, &s);
        for v in sol.v0.iter_mut() {
            *v *= 2.0;
        }
        sol.rebuild_gram();
        let report = validate_feasibility(&sol, FEASIBILITY_TOL);
        assert!((report.v0_unit - 1.0).abs() < 1e-12);
        assert!(!report.within_tol());
    }

    #[test]
    fn subset_identities() {
        let lang = crate::csp::generate::two_sat_language();
        let (inst, _) =
            crate::csp::generate::generate_planted::<f64>(&lang, 4, 10, 0.2, 5).unwrap();
        let problem = build_relaxation(&inst).unwrap();
        let sol = solve(&problem, 1e-4).unwrap();
        let d = sol.domain_size;
        let full = (1u64 << d) - 1;
        for c in &inst.constraints {
            let l = loss(c, &sol);
            assert!((-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&l));
        }
        for x in 0..sol.num_vars {
            for y in 0..sol.num_vars {
                if x == y {
                    continue;
                }
                for mask_a in 0..=full {
                    // ||x_A||^2 = x_A . y_D
                    let lhs = sol.norm_sq_subset(x, mask_a);
                    let rhs = sol.pair_subsets(x, mask_a, y, full);
                    assert!(
                        (lhs - rhs).abs() < FEASIBILITY_TOL,
                        "norm/pair identity failed: {lhs} vs {rhs}"
                    );
                    for mask_b in 0..=full {
                        // ||y_B - x_A||^2 = x_{D\A} . y_B + x_A . y_{D\B}
                        let diff: f64 = sol
                            .subset_vector(y, mask_b)
                            .iter()
                            .zip(&sol.subset_vector(x, mask_a))
                            .map(|(&b, &a)| (b - a) * (b - a))
                            .sum();
                        let rhs = sol.pair_subsets(x, full & !mask_a, y, mask_b)
                            + sol.pair_subsets(x, mask_a, y, full & !mask_b);
                        assert!(
                            (diff - rhs).abs() < FEASIBILITY_TOL,
                            "difference identity failed: {diff} vs {rhs}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn preprocess1_satisfiable_returns_full_assignment() {
        let lang = crate::csp::generate::two_sat_language();
        let (inst, _) =
            crate::csp::generate::generate_planted::<f64>(&lang, 5, 14, 0.0, 3).unwrap();
        match preprocess1(&inst, exact_solve).unwrap() {
            Preprocess1Outcome::Solved(s) => {
                assert!((inst.evaluate(&s).unwrap() - 1.0).abs() < 1e-12);
            }
            Preprocess1Outcome::PassThrough => panic!("satisfiable instance must short-circuit"),
        }
    }

    #[test]
    fn preprocess1_boundary_case() {
        // the largest satisfiable prefix of the contradictory instance has
        // weight exactly 1 - 1/m, which is inside the acceptance threshold
        let inst = contradictory_two_sat();
        match preprocess1(&inst, exact_solve).unwrap() {
            Preprocess1Outcome::Solved(s) => {
                assert!((inst.evaluate(&s).unwrap() - 0.75).abs() < 1e-12);
            }
            Preprocess1Outcome::PassThrough => panic!("boundary case returns the assignment"),
        }
    }

    #[test]
    fn preprocess1_heavy_prefix() {
        // one heavy satisfiable constraint plus tiny contradictions
        let d = 2;
        let eq = Arc::new(Relation::binary(d, &[(0, 0), (1, 1)]).unwrap());
        let ne = Arc::new(Relation::binary(d, &[(0, 1), (1, 0)]).unwrap());
        let mut constraints = vec![Constraint::new(vec![0, 1], eq.clone(), 0.991)];
        for i in 0..9 {
            let rel = if i % 2 == 0 { ne.clone() } else { eq.clone() };
            constraints.push(Constraint::new(vec![0, 1], rel, 0.001));
        }
        let inst = Instance::new(Domain::new(d).unwrap(), 2, constraints)
            .unwrap()
            .normalize_weights()
            .unwrap();
        let m = inst.num_constraints() as f64;
        match preprocess1(&inst, exact_solve).unwrap() {
            Preprocess1Outcome::Solved(s) => {
                assert!(inst.evaluate(&s).unwrap() >= 1.0 - 1.0 / m - 1e-12);
            }
            Preprocess1Outcome::PassThrough => panic!("heavy prefix exists"),
        }
    }
}
