//! Rounding pipeline for languages preserved by the dual discriminator.
//!
//! Every binary relation in such a language decomposes into disjunction,
//! permutation (unique-games), and unary pieces. After solving the
//! relaxation, variables are partitioned by a random threshold on
//! `x_a . v0` into fixed / two-valued / spread groups; the two-valued part
//! is labeled consistently with one random hyperplane, its relaxation is
//! transformed onto the restricted domains and rounded as a Boolean 2-CSP,
//! and the spread part is rounded with a unique-games scheme (unary pieces
//! become dummy variables with truncated vectors).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{classify_01all, Classification};
use crate::consistency::exact_solve;
use crate::csp::{Assignment, Constraint, Instance, Relation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sdp::{self, Preprocess1Outcome, SdpSolution, SolverOptions};

/// One piece of the converted instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `(x = a) or (y = b)` on scope `(x, y)`.
    Disjunction { a: usize, b: usize },
    /// `x = perm[y]` on scope `(x, y)`.
    UniqueGame { perm: Vec<usize> },
    /// `x in P` (mask) on scope `(x,)`.
    Unary { values: u64 },
    /// Piece with an empty relation; no assignment satisfies it.
    AlwaysViolated,
}

/// The instance rewritten over the three constraint kinds. Piece weights sum
/// to the originating constraint's weight, so totals are preserved.
#[derive(Clone, Debug)]
pub struct TriagedInstance<S: Scalar> {
    pub instance: Instance<S>,
    pub kinds: Vec<ConstraintKind>,
    /// Index of the original constraint each piece came from.
    pub origin: Vec<usize>,
}

fn two_fan_relation(d: usize, a: usize, b: usize) -> Relation {
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|u| (0..d).map(move |v| (u, v)))
        .filter(|&(u, v)| u == a || v == b)
        .collect();
    Relation::binary(d, &pairs).expect("two-fan relation")
}

fn perm_relation(d: usize, perm: &[usize]) -> Relation {
    let pairs: Vec<(usize, usize)> = (0..d).map(|v| (perm[v], v)).collect();
    Relation::binary(d, &pairs).expect("permutation relation")
}

fn mask_relation(d: usize, mask: u64) -> Relation {
    let values: Vec<usize> = (0..d).filter(|&v| mask & (1 << v) != 0).collect();
    Relation::unary(d, &values).expect("unary relation")
}

fn values_to_mask(values: &[usize]) -> u64 {
    values.iter().fold(0u64, |m, &v| m | (1 << v))
}

/// Decompose every constraint into the three kinds. Fails if some binary
/// relation is not preserved by the dual discriminator.
pub fn triage<S: Scalar>(instance: &Instance<S>) -> Result<TriagedInstance<S>> {
    let d = instance.domain.size();
    let mut constraints = Vec::new();
    let mut kinds = Vec::new();
    let mut origin = Vec::new();
    let mut push = |scope: Vec<usize>, rel: Relation, weight: S, kind: ConstraintKind, oi: usize| {
        constraints.push(Constraint::new(scope, Arc::new(rel), weight));
        kinds.push(kind);
        origin.push(oi);
    };
    for (oi, c) in instance.constraints.iter().enumerate() {
        match c.arity() {
            1 => {
                let mask = c.relation.projection_mask(0);
                if mask == 0 {
                    push(
                        c.scope.clone(),
                        mask_relation(d, 0),
                        c.weight,
                        ConstraintKind::AlwaysViolated,
                        oi,
                    );
                } else {
                    push(
                        c.scope.clone(),
                        mask_relation(d, mask),
                        c.weight,
                        ConstraintKind::Unary { values: mask },
                        oi,
                    );
                }
            }
            2 => {
                let (x, y) = (c.scope[0], c.scope[1]);
                if c.relation.is_empty() {
                    push(
                        vec![x],
                        mask_relation(d, 0),
                        c.weight,
                        ConstraintKind::AlwaysViolated,
                        oi,
                    );
                    continue;
                }
                match classify_01all(&c.relation) {
                    Classification::Type1 { a, b } => push(
                        vec![x, y],
                        two_fan_relation(d, a, b),
                        c.weight,
                        ConstraintKind::Disjunction { a, b },
                        oi,
                    ),
                    Classification::Type2 { perm } => push(
                        vec![x, y],
                        perm_relation(d, &perm),
                        c.weight,
                        ConstraintKind::UniqueGame { perm },
                        oi,
                    ),
                    Classification::Type3 { p, q } => {
                        let half = c.weight / S::from_f64(2.0);
                        let pm = values_to_mask(&p);
                        let qm = values_to_mask(&q);
                        push(
                            vec![x],
                            mask_relation(d, pm),
                            half,
                            ConstraintKind::Unary { values: pm },
                            oi,
                        );
                        push(
                            vec![y],
                            mask_relation(d, qm),
                            half,
                            ConstraintKind::Unary { values: qm },
                            oi,
                        );
                    }
                    Classification::Type4 { base, p, q } => {
                        let third = c.weight / S::from_f64(3.0);
                        match *base {
                            Classification::Type1 { a, b } => push(
                                vec![x, y],
                                two_fan_relation(d, a, b),
                                third,
                                ConstraintKind::Disjunction { a, b },
                                oi,
                            ),
                            Classification::Type2 { perm } => push(
                                vec![x, y],
                                perm_relation(d, &perm),
                                third,
                                ConstraintKind::UniqueGame { perm },
                                oi,
                            ),
                            _ => unreachable!("type-4 base is type 1 or 2"),
                        }
                        let pm = values_to_mask(&p);
                        let qm = values_to_mask(&q);
                        push(
                            vec![x],
                            mask_relation(d, pm),
                            third,
                            ConstraintKind::Unary { values: pm },
                            oi,
                        );
                        push(
                            vec![y],
                            mask_relation(d, qm),
                            third,
                            ConstraintKind::Unary { values: qm },
                            oi,
                        );
                    }
                    Classification::None => return Err(Error::NotDualDiscriminatorClosed),
                }
            }
            arity => return Err(Error::ArityUnsupported { arity }),
        }
    }
    Ok(TriagedInstance {
        instance: Instance::new(instance.domain, instance.num_vars, constraints)?,
        kinds,
        origin,
    })
}

/// Variable groups after threshold partitioning.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarGroup {
    /// Dominant value; assigned immediately.
    Fixed(usize),
    /// Exactly two candidate values.
    Two,
    /// No value clears the threshold; domain left unrestricted.
    Spread,
}

#[derive(Clone, Debug)]
pub struct Partition {
    pub r: f64,
    pub group: Vec<VarGroup>,
    /// Candidate mask per variable (`D_x`).
    pub dx: Vec<u64>,
}

/// Threshold partitioning: `D_x = { a : x_a . v0 > 1/2 - r }`.
pub fn partition_variables<S: Scalar>(sol: &SdpSolution<S>, r: f64) -> Result<Partition> {
    let d = sol.domain_size;
    let threshold = S::from_f64(0.5 - r);
    let upper = S::from_f64(0.5 + r);
    let mut group = Vec::with_capacity(sol.num_vars);
    let mut dx = Vec::with_capacity(sol.num_vars);
    for x in 0..sol.num_vars {
        let mut mask = 0u64;
        for a in 0..d {
            if sol.dot_v0(x, a) > threshold {
                mask |= 1 << a;
            }
        }
        let g = match mask.count_ones() {
            0 => VarGroup::Spread,
            1 => VarGroup::Fixed(mask.trailing_zeros() as usize),
            2 => VarGroup::Two,
            count => {
                return Err(Error::PartitionTooWide {
                    var: x,
                    count: count as usize,
                })
            }
        };
        // a value above 1/2 + r forces the fixed group
        for a in 0..d {
            if sol.dot_v0(x, a) > upper + S::from_f64(1e-9)
                && !matches!(g, VarGroup::Fixed(_))
            {
                return Err(Error::PartitionTooWide { var: x, count: 2 });
            }
        }
        group.push(g);
        dx.push(mask);
    }
    Ok(Partition { r, group, dx })
}

/// Destination of each piece after partitioning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceFate {
    /// Satisfied by every admissible assignment.
    Satisfied,
    /// Conservatively counted as violated.
    Violated,
    /// Two-valued sub-instance (disjunctions and matched unique games).
    InstanceOne,
    /// Spread sub-instance (unique games and unary pieces).
    InstanceTwo,
}

pub fn split_constraints<S: Scalar>(
    triaged: &TriagedInstance<S>,
    partition: &Partition,
) -> Vec<PieceFate> {
    let mut fates = Vec::with_capacity(triaged.kinds.len());
    for (ci, kind) in triaged.kinds.iter().enumerate() {
        let scope = &triaged.instance.constraints[ci].scope;
        let fate = match kind {
            ConstraintKind::AlwaysViolated => PieceFate::Violated,
            ConstraintKind::Unary { values } => {
                let x = scope[0];
                match &partition.group[x] {
                    VarGroup::Fixed(v) => {
                        if values & (1 << v) != 0 {
                            PieceFate::Satisfied
                        } else {
                            PieceFate::Violated
                        }
                    }
                    VarGroup::Two => {
                        if partition.dx[x] & !values == 0 {
                            PieceFate::Satisfied
                        } else {
                            PieceFate::Violated
                        }
                    }
                    VarGroup::Spread => PieceFate::InstanceTwo,
                }
            }
            ConstraintKind::Disjunction { a, b } => {
                let (x, y) = (scope[0], scope[1]);
                let x_fixed_sat = matches!(partition.group[x], VarGroup::Fixed(v) if v == *a);
                let y_fixed_sat = matches!(partition.group[y], VarGroup::Fixed(v) if v == *b);
                if x_fixed_sat || y_fixed_sat {
                    PieceFate::Satisfied
                } else if partition.group[x] == VarGroup::Two
                    && partition.group[y] == VarGroup::Two
                    && partition.dx[x] & (1 << a) != 0
                    && partition.dx[y] & (1 << b) != 0
                {
                    PieceFate::InstanceOne
                } else {
                    PieceFate::Violated
                }
            }
            ConstraintKind::UniqueGame { perm } => {
                let (x, y) = (scope[0], scope[1]);
                match (&partition.group[x], &partition.group[y]) {
                    (VarGroup::Fixed(vx), VarGroup::Fixed(vy)) => {
                        if *vx == perm[*vy] {
                            PieceFate::Satisfied
                        } else {
                            PieceFate::Violated
                        }
                    }
                    (VarGroup::Fixed(_), _) | (_, VarGroup::Fixed(_)) => PieceFate::Violated,
                    (VarGroup::Two, VarGroup::Two) => {
                        let image = (0..triaged.instance.domain.size())
                            .filter(|&v| partition.dx[y] & (1 << v) != 0)
                            .fold(0u64, |m, v| m | (1 << perm[v]));
                        if image == partition.dx[x] {
                            PieceFate::InstanceOne
                        } else {
                            PieceFate::Violated
                        }
                    }
                    (VarGroup::Spread, VarGroup::Spread) => PieceFate::InstanceTwo,
                    _ => PieceFate::Violated,
                }
            }
        };
        fates.push(fate);
    }
    fates
}

/// Consistent two-valued labeling produced by one random hyperplane.
#[derive(Clone, Debug)]
pub struct UgLabeling {
    /// For each two-valued variable: the value whose difference direction
    /// landed in the chosen half-space, and the other one.
    pub alpha_val: Vec<Option<usize>>,
    pub beta_val: Vec<Option<usize>>,
    /// Unique-game pieces of the two-valued sub-instance whose labels ended
    /// up inconsistent under the hyperplane.
    pub c_bad: Vec<usize>,
}

pub fn gw_round_ug<S: Scalar, R: Rng>(
    triaged: &TriagedInstance<S>,
    partition: &Partition,
    fates: &[PieceFate],
    sol: &SdpSolution<S>,
    rng: &mut R,
) -> Result<UgLabeling> {
    let g: Vec<S> = (0..sol.dim).map(|_| S::sample_standard_normal(rng)).collect();
    let mut alpha_val = vec![None; sol.num_vars];
    let mut beta_val = vec![None; sol.num_vars];
    for x in 0..sol.num_vars {
        if partition.group[x] != VarGroup::Two {
            continue;
        }
        let vals: Vec<usize> = (0..sol.domain_size)
            .filter(|&a| partition.dx[x] & (1 << a) != 0)
            .collect();
        let (a, b) = (vals[0], vals[1]);
        let diff_norm_sq = sol.norm_sq(x, a) + sol.norm_sq(x, b)
            - S::from_f64(2.0) * sol.pair(x, a, x, b);
        if diff_norm_sq <= S::from_f64(1e-18) {
            return Err(Error::DegenerateVector { var: x, value: a });
        }
        let side: S = g
            .iter()
            .zip(sol.vector(x, a).iter().zip(sol.vector(x, b)))
            .map(|(&gi, (&va, &vb))| gi * (va - vb))
            .sum();
        if side >= S::zero() {
            alpha_val[x] = Some(a);
            beta_val[x] = Some(b);
        } else {
            alpha_val[x] = Some(b);
            beta_val[x] = Some(a);
        }
    }
    let mut c_bad = Vec::new();
    for (ci, fate) in fates.iter().enumerate() {
        if *fate != PieceFate::InstanceOne {
            continue;
        }
        if let ConstraintKind::UniqueGame { perm } = &triaged.kinds[ci] {
            let scope = &triaged.instance.constraints[ci].scope;
            let (x, y) = (scope[0], scope[1]);
            let ax = alpha_val[x].expect("labeled");
            let ay = alpha_val[y].expect("labeled");
            if ax != perm[ay] {
                c_bad.push(ci);
            }
        }
    }
    Ok(UgLabeling {
        alpha_val,
        beta_val,
        c_bad,
    })
}

/// The two labeled values of a two-valued variable with their vectors.
pub type LabeledPair<S> = [(usize, Vec<S>); 2];

/// The transformed relaxation on the two-valued variables:
/// `x~_alpha = x_alpha`, `x~_beta = v0 - x_alpha`.
#[derive(Clone, Debug)]
pub struct TransformedSdp<S: Scalar> {
    /// Per variable: the two labeled values and their vectors.
    pub tilde: Vec<Option<LabeledPair<S>>>,
}

impl<S: Scalar> TransformedSdp<S> {
    pub fn vector(&self, x: usize, value: usize) -> Option<&[S]> {
        self.tilde[x].as_ref().and_then(|pair| {
            pair.iter()
                .find(|(v, _)| *v == value)
                .map(|(_, vec)| vec.as_slice())
        })
    }
}

fn dist_sq<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Per-piece relaxation costs before/after the transformation, for the
/// dominance checks.
#[derive(Clone, Debug)]
pub struct TransformCosts<S: Scalar> {
    pub piece: usize,
    pub old_cost: S,
    pub new_cost: S,
    pub is_unique_game: bool,
}

pub fn transform_sdp<S: Scalar>(
    triaged: &TriagedInstance<S>,
    partition: &Partition,
    labeling: &UgLabeling,
    fates: &[PieceFate],
    sol: &SdpSolution<S>,
) -> (TransformedSdp<S>, Vec<TransformCosts<S>>) {
    let mut tilde: Vec<Option<LabeledPair<S>>> = vec![None; sol.num_vars];
    for x in 0..sol.num_vars {
        if partition.group[x] != VarGroup::Two {
            continue;
        }
        let av = labeling.alpha_val[x].expect("two-valued variables are labeled");
        let bv = labeling.beta_val[x].expect("two-valued variables are labeled");
        let alpha_vec = sol.vector(x, av).to_vec();
        let beta_vec: Vec<S> = sol
            .v0
            .iter()
            .zip(&alpha_vec)
            .map(|(&v, &a)| v - a)
            .collect();
        tilde[x] = Some([(av, alpha_vec), (bv, beta_vec)]);
    }
    let transformed = TransformedSdp { tilde };

    let mut costs = Vec::new();
    for (ci, fate) in fates.iter().enumerate() {
        if *fate != PieceFate::InstanceOne || labeling.c_bad.contains(&ci) {
            continue;
        }
        let scope = &triaged.instance.constraints[ci].scope;
        match &triaged.kinds[ci] {
            ConstraintKind::Disjunction { a, b } => {
                let (x, y) = (scope[0], scope[1]);
                let old = complement_product(sol, sol.vector(x, *a), sol.vector(y, *b));
                let new = complement_product(
                    sol,
                    transformed.vector(x, *a).expect("a in D_x"),
                    transformed.vector(y, *b).expect("b in D_y"),
                );
                costs.push(TransformCosts {
                    piece: ci,
                    old_cost: old,
                    new_cost: new,
                    is_unique_game: false,
                });
            }
            ConstraintKind::UniqueGame { perm } => {
                let (x, y) = (scope[0], scope[1]);
                let half = S::from_f64(0.5);
                let d = sol.domain_size;
                let old: S = (0..d)
                    .map(|v| dist_sq(sol.vector(x, perm[v]), sol.vector(y, v)))
                    .sum::<S>()
                    * half;
                let new: S = (0..d)
                    .filter(|&v| partition.dx[y] & (1 << v) != 0)
                    .map(|v| {
                        dist_sq(
                            transformed.vector(x, perm[v]).expect("matched domains"),
                            transformed.vector(y, v).expect("v in D_y"),
                        )
                    })
                    .sum::<S>()
                    * half;
                costs.push(TransformCosts {
                    piece: ci,
                    old_cost: old,
                    new_cost: new,
                    is_unique_game: true,
                });
            }
            _ => {}
        }
    }
    (transformed, costs)
}

/// `(v0 - u) . (v0 - w)`
fn complement_product<S: Scalar>(sol: &SdpSolution<S>, u: &[S], w: &[S]) -> S {
    sol.v0
        .iter()
        .zip(u)
        .zip(sol.v0.iter().zip(w))
        .map(|((&v1, &ui), (&v2, &wi))| (v1 - ui) * (v2 - wi))
        .sum()
}

/// Round the two-valued variables with one random hyperplane against the
/// transformed vectors.
pub fn round_boolean_2csp<S: Scalar, R: Rng>(
    partition: &Partition,
    labeling: &UgLabeling,
    transformed: &TransformedSdp<S>,
    sol: &SdpSolution<S>,
    rng: &mut R,
) -> Vec<Option<usize>> {
    let g: Vec<S> = (0..sol.dim).map(|_| S::sample_standard_normal(rng)).collect();
    (0..sol.num_vars)
        .map(|x| {
            if partition.group[x] != VarGroup::Two {
                return None;
            }
            let av = labeling.alpha_val[x].expect("labeled");
            let bv = labeling.beta_val[x].expect("labeled");
            let va = transformed.vector(x, av).expect("alpha vector");
            let vb = transformed.vector(x, bv).expect("beta vector");
            let side: S = g
                .iter()
                .zip(va.iter().zip(vb))
                .map(|(&gi, (&ai, &bi))| gi * (ai - bi))
                .sum();
            Some(if side >= S::zero() { av } else { bv })
        })
        .collect()
}

/// Round the spread variables: unary pieces become dummy variables with
/// vectors zeroed outside their set, every variable picks the candidate
/// (`||x_a||^2 >= 1/(2|D|)`) maximizing `g . x_a / ||x_a||`, falling back to
/// the heaviest value.
pub fn round_unique_games<S: Scalar, R: Rng>(
    triaged: &TriagedInstance<S>,
    partition: &Partition,
    fates: &[PieceFate],
    sol: &SdpSolution<S>,
    rng: &mut R,
) -> Vec<Option<usize>> {
    let g: Vec<S> = (0..sol.dim).map(|_| S::sample_standard_normal(rng)).collect();
    let d = sol.domain_size;
    let threshold = S::one() / S::from_usize(2 * d);

    let round_var = |masks: u64, norms: &[S], projections: &[S]| -> usize {
        let mut best: Option<(usize, S)> = None;
        for a in 0..d {
            if masks & (1 << a) == 0 {
                continue;
            }
            if norms[a] < threshold {
                continue;
            }
            let score = projections[a] / norms[a].sqrt();
            match best {
                Some((_, s)) if s >= score => {}
                _ => best = Some((a, score)),
            }
        }
        if let Some((a, _)) = best {
            return a;
        }
        // fallback: heaviest value within the mask (smallest id on ties)
        let mut heaviest = None;
        for a in 0..d {
            if masks & (1 << a) == 0 {
                continue;
            }
            match heaviest {
                Some((_, n)) if n >= norms[a] => {}
                _ => heaviest = Some((a, norms[a])),
            }
        }
        heaviest.map(|(a, _)| a).unwrap_or(0)
    };

    let mut out = vec![None; sol.num_vars];
    for x in 0..sol.num_vars {
        if partition.group[x] != VarGroup::Spread {
            continue;
        }
        let norms: Vec<S> = (0..d).map(|a| sol.norm_sq(x, a)).collect();
        let projections: Vec<S> = (0..d)
            .map(|a| {
                g.iter()
                    .zip(sol.vector(x, a))
                    .map(|(&gi, &vi)| gi * vi)
                    .sum()
            })
            .collect();
        let full = (1u64 << d) - 1;
        out[x] = Some(round_var(full, &norms, &projections));
    }
    // dummy variables for unary pieces: same scheme on truncated vectors
    // (their values do not feed the final assignment; rounding them keeps the
    // scheme faithful to the dummy-variable reduction)
    for (ci, fate) in fates.iter().enumerate() {
        if *fate != PieceFate::InstanceTwo {
            continue;
        }
        if let ConstraintKind::Unary { values } = &triaged.kinds[ci] {
            let x = triaged.instance.constraints[ci].scope[0];
            let norms: Vec<S> = (0..d)
                .map(|a| {
                    if values & (1 << a) != 0 {
                        sol.norm_sq(x, a)
                    } else {
                        S::zero()
                    }
                })
                .collect();
            let projections: Vec<S> = (0..d)
                .map(|a| {
                    if values & (1 << a) != 0 {
                        g.iter()
                            .zip(sol.vector(x, a))
                            .map(|(&gi, &vi)| gi * vi)
                            .sum()
                    } else {
                        S::zero()
                    }
                })
                .collect();
            let _dummy_value = round_var(*values, &norms, &projections);
        }
    }
    out
}

/// Everything observable about one run.
#[derive(Clone, Debug)]
pub struct DdReport<S: Scalar> {
    pub r: f64,
    pub sdp_objective: S,
    pub early_exit: bool,
    pub group_sizes: [usize; 3],
    pub weight_satisfied_by_partition: S,
    pub weight_conservatively_violated: S,
    pub weight_instance_one: S,
    pub weight_instance_two: S,
    pub weight_bad_labeling: S,
    /// Worst `new - old` over disjunction pieces and `new - 2 old` over kept
    /// unique-game pieces (nonpositive up to rounding).
    pub disjunction_dominance_gap: S,
    pub unique_game_dominance_gap: S,
    /// Violated weight among the two-valued sub-instance's pieces.
    pub instance_one_loss: S,
    /// Violated weight among the spread sub-instance's pieces.
    pub instance_two_loss: S,
    /// Satisfied weight on the original (normalized) instance.
    pub satisfied_weight: S,
    /// Satisfied weight on the converted instance.
    pub converted_satisfied_weight: S,
    /// All pieces marked satisfied-by-partition were indeed satisfied.
    pub admissible_pieces_ok: bool,
}

#[derive(Clone, Debug, Default)]
pub struct DdOptions {
    pub solver: SolverOptions,
    pub delta: Option<f64>,
}

pub fn run_dd<S: Scalar>(instance: &Instance<S>, seed: u64) -> Result<(Assignment, DdReport<S>)> {
    run_dd_with_options(instance, seed, &DdOptions::default())
}

pub fn run_dd_with_options<S: Scalar>(
    instance: &Instance<S>,
    seed: u64,
    options: &DdOptions,
) -> Result<(Assignment, DdReport<S>)> {
    if instance.domain.size() < 2 {
        return Err(Error::DomainTooSmall {
            min: 2,
            got: instance.domain.size(),
        });
    }
    let normalized = instance.clone().normalize_weights()?;
    let triaged = triage(&normalized)?;
    let m = triaged.instance.num_constraints();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut report = DdReport {
        r: 0.0,
        sdp_objective: S::zero(),
        early_exit: false,
        group_sizes: [0; 3],
        weight_satisfied_by_partition: S::zero(),
        weight_conservatively_violated: S::zero(),
        weight_instance_one: S::zero(),
        weight_instance_two: S::zero(),
        weight_bad_labeling: S::zero(),
        disjunction_dominance_gap: S::neg_infinity(),
        unique_game_dominance_gap: S::neg_infinity(),
        instance_one_loss: S::zero(),
        instance_two_loss: S::zero(),
        satisfied_weight: S::zero(),
        converted_satisfied_weight: S::zero(),
        admissible_pieces_ok: true,
    };

    if let Preprocess1Outcome::Solved(s) = sdp::preprocess1(&triaged.instance, exact_solve)? {
        report.early_exit = true;
        report.satisfied_weight = normalized.evaluate(&s)?;
        report.converted_satisfied_weight = triaged.instance.evaluate(&s)?;
        return Ok((s, report));
    }

    let problem = sdp::build_relaxation(&triaged.instance)?;
    let delta = options
        .delta
        .unwrap_or_else(|| 1.0 / (m as f64 * m as f64));
    let sol = sdp::solve_with_options(&problem, delta, &options.solver)?;
    report.sdp_objective = sol.objective;

    // randomness order: threshold, labeling hyperplane, boolean hyperplane,
    // spread hyperplane
    let mut r = rng.gen::<f64>() / 6.0;
    while r == 0.0 {
        r = rng.gen::<f64>() / 6.0;
    }
    report.r = r;
    let partition = partition_variables(&sol, r)?;
    for g in &partition.group {
        match g {
            VarGroup::Fixed(_) => report.group_sizes[0] += 1,
            VarGroup::Two => report.group_sizes[1] += 1,
            VarGroup::Spread => report.group_sizes[2] += 1,
        }
    }

    let fates = split_constraints(&triaged, &partition);
    for (ci, fate) in fates.iter().enumerate() {
        let w = triaged.instance.constraints[ci].weight;
        match fate {
            PieceFate::Satisfied => {
                report.weight_satisfied_by_partition = report.weight_satisfied_by_partition + w
            }
            PieceFate::Violated => {
                report.weight_conservatively_violated =
                    report.weight_conservatively_violated + w
            }
            PieceFate::InstanceOne => {
                report.weight_instance_one = report.weight_instance_one + w
            }
            PieceFate::InstanceTwo => {
                report.weight_instance_two = report.weight_instance_two + w
            }
        }
    }

    let labeling = gw_round_ug(&triaged, &partition, &fates, &sol, &mut rng)?;
    report.weight_bad_labeling = labeling
        .c_bad
        .iter()
        .map(|&ci| triaged.instance.constraints[ci].weight)
        .sum();

    let (transformed, costs) = transform_sdp(&triaged, &partition, &labeling, &fates, &sol);
    for c in &costs {
        if c.is_unique_game {
            let gap = c.new_cost - S::from_f64(2.0) * c.old_cost;
            report.unique_game_dominance_gap = report.unique_game_dominance_gap.max(gap);
        } else {
            let gap = c.new_cost - c.old_cost;
            report.disjunction_dominance_gap = report.disjunction_dominance_gap.max(gap);
        }
    }

    let two_valued = round_boolean_2csp(&partition, &labeling, &transformed, &sol, &mut rng);
    let spread = round_unique_games(&triaged, &partition, &fates, &sol, &mut rng);

    let values: Vec<usize> = (0..normalized.num_vars)
        .map(|x| match &partition.group[x] {
            VarGroup::Fixed(v) => *v,
            VarGroup::Two => two_valued[x].expect("two-valued variables rounded"),
            VarGroup::Spread => spread[x].expect("spread variables rounded"),
        })
        .collect();
    let assignment = Assignment::new(values);

    for (ci, fate) in fates.iter().enumerate() {
        let satisfied = triaged.instance.constraints[ci].satisfied_by(&assignment.values);
        let w = triaged.instance.constraints[ci].weight;
        match fate {
            PieceFate::Satisfied if !satisfied => report.admissible_pieces_ok = false,
            PieceFate::InstanceOne if !satisfied => {
                report.instance_one_loss = report.instance_one_loss + w;
            }
            PieceFate::InstanceTwo if !satisfied => {
                report.instance_two_loss = report.instance_two_loss + w;
            }
            _ => {}
        }
    }
    report.satisfied_weight = normalized.evaluate(&assignment)?;
    report.converted_satisfied_weight = triaged.instance.evaluate(&assignment)?;
    Ok((assignment, report))
}
