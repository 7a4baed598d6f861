//! Randomized rounding pipeline for languages with a near-unanimity
//! polymorphism: solve the relaxation, build nested per-variable level sets
//! from vector norms, then remove constraints through six filters (loss
//! threshold, two randomly shifted norm grids, and three hyperplane-cut
//! tests) so that the surviving instance becomes satisfiable and is finished
//! off by the exact solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::binarize_unary;
use crate::consistency::{exact_solve, LevelSets};
use crate::csp::{Assignment, Instance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sdp::{self, Preprocess1Outcome, SdpSolution, SolverOptions};

/// `k = 6|D| + 7` for binary languages over `D`.
pub fn loss_exponent_k(domain_size: usize) -> usize {
    6 * domain_size + 7
}

/// Grid spacing at level `l`: `alpha^((6l + 4) * kappa)`.
pub fn spacing<S: Scalar>(alpha: S, kappa: f64, l: usize) -> S {
    alpha.powf(S::from_f64((6 * l + 4) as f64 * kappa))
}

/// Randomness and derived quantities driving one pipeline run.
#[derive(Clone, Debug)]
pub struct PipelineParams<S: Scalar> {
    /// NU polymorphism arity minus one.
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    pub alpha: S,
    /// Coarse-grid modulus `floor(alpha^(-2 kappa))`, at least 1.
    pub m0: usize,
    /// Per level `l`: grid shift in `(0, spacing_l)`.
    pub r_shift: Vec<S>,
    /// Per level `l`: coarse-grid offset in `{0, ..., m0 - 1}`.
    pub s_offset: Vec<usize>,
    /// Per level `l`: number of random unit vectors.
    pub m_ell: Vec<usize>,
    /// Per level `l`: the sampled unit vectors (shared by the cut steps).
    pub cut_vectors: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> PipelineParams<S> {
    /// Sample all randomness from one seeded generator, in a fixed order:
    /// grid shifts by level, then coarse offsets by level, then unit vectors
    /// by level.
    pub fn sample(
        domain_size: usize,
        dim: usize,
        n: usize,
        alpha: S,
        seed: u64,
    ) -> PipelineParams<S> {
        let k = loss_exponent_k(domain_size);
        let kappa = 1.0 / k as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m0 = (alpha.powf(S::from_f64(-2.0 * kappa)).to_f64().floor() as usize).max(1);
        let r_shift: Vec<S> = (1..=domain_size)
            .map(|l| {
                let sp = spacing(alpha, kappa, l);
                S::sample_unit(&mut rng) * sp
            })
            .collect();
        let s_offset: Vec<usize> = (1..=domain_size)
            .map(|_| rng.gen_range(0..m0))
            .collect();
        let m_ell: Vec<usize> = (1..=domain_size)
            .map(|l| {
                let exp = -((3 * l + 1) as f64) * kappa;
                (alpha.powf(S::from_f64(exp)).to_f64().ceil() as usize).max(1)
            })
            .collect();
        let cut_vectors: Vec<Vec<Vec<S>>> = m_ell
            .iter()
            .map(|&count| (0..count).map(|_| random_unit_vector(dim, &mut rng)).collect())
            .collect();
        PipelineParams {
            n,
            k,
            kappa,
            alpha,
            m0,
            r_shift,
            s_offset,
            m_ell,
            cut_vectors,
        }
    }
}

fn random_unit_vector<S: Scalar, R: Rng>(dim: usize, rng: &mut R) -> Vec<S> {
    loop {
        let v: Vec<S> = (0..dim).map(|_| S::sample_standard_normal(rng)).collect();
        let norm: S = v.iter().map(|&x| x * x).sum::<S>().sqrt();
        if norm > S::from_f64(1e-12) {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Build the nested level sets from vector norms: the level-`l` threshold is
/// the smallest `alpha^(3 l kappa) (2|D|)^(i/2)` whose gap band
/// `[r / sqrt(2|D|), r)` contains no vector norm of the variable.
///
/// The output is structurally validated (nonempty sets, chain inclusion);
/// at large `alpha` the chain can fail, which is reported as an error so the
/// caller can fall back to the heaviest-value assignment.
pub fn preprocess2<S: Scalar>(
    sol: &SdpSolution<S>,
    alpha: S,
    kappa: f64,
) -> Result<LevelSets> {
    let d = sol.domain_size;
    let full = (1u64 << d) - 1;
    let band_factor = S::from_usize(2 * d).sqrt();
    let mut sets = Vec::with_capacity(sol.num_vars);
    for x in 0..sol.num_vars {
        let norms: Vec<S> = (0..d).map(|a| sol.norm_sq(x, a).sqrt()).collect();
        let mut chain = Vec::with_capacity(d + 1);
        for l in 1..=d {
            let base = alpha.powf(S::from_f64(3.0 * l as f64 * kappa));
            let mut threshold = None;
            for i in 0..=d {
                let r = base * band_factor.powi(i as i32);
                let lo = r / band_factor;
                if norms.iter().all(|&nm| !(nm >= lo && nm < r)) {
                    threshold = Some(r);
                    break;
                }
            }
            // the bands are disjoint, so one of |D| + 1 of them is empty
            let r = threshold.expect("an empty gap band always exists");
            let mask = (0..d)
                .filter(|&a| norms[a] >= r)
                .fold(0u64, |m, a| m | (1 << a));
            chain.push(mask);
        }
        chain.push(full);
        sets.push(chain);
    }
    LevelSets::new(d, sets).map_err(|e| Error::AlphaTooLarge {
        alpha: alpha.to_f64(),
        reason: e.to_string(),
    })
}

/// The guaranteed norm-separation properties of the level sets, checked in
/// tests: members are heavy, non-members light (factor `c = (2|D|)^(|D|/2)`),
/// and each member outweighs the combined non-members.
pub fn level_set_conditions<S: Scalar>(
    sol: &SdpSolution<S>,
    levels: &LevelSets,
    alpha: S,
    kappa: f64,
) -> bool {
    let d = sol.domain_size;
    let c = S::from_usize(2 * d).powf(S::from_usize(d) / S::from_f64(2.0));
    let tol = S::from_f64(1e-9);
    for x in 0..sol.num_vars {
        for l in 1..=d {
            let mask = levels.level(x, l);
            let base = alpha.powf(S::from_f64(3.0 * l as f64 * kappa));
            let outside_sq = sol.norm_sq_subset(x, ((1u64 << d) - 1) & !mask);
            for a in 0..d {
                let norm = sol.norm_sq(x, a).sqrt();
                if mask & (1 << a) != 0 {
                    if norm < base - tol {
                        return false;
                    }
                    if sol.norm_sq(x, a) < S::from_f64(2.0) * outside_sq - tol {
                        return false;
                    }
                } else if norm > c * base + tol {
                    return false;
                }
            }
        }
    }
    true
}

/// The fine-grid comparison: true iff no grid point `r + j * spacing`
/// separates the two squared norms (lands in `(dst, src]`).
pub fn preceq<S: Scalar>(src_norm_sq: S, dst_norm_sq: S, r_shift: S, spacing: S) -> bool {
    if dst_norm_sq >= src_norm_sq {
        return true;
    }
    let j = ((dst_norm_sq - r_shift) / spacing).floor() + S::one();
    let grid = r_shift + j * spacing;
    grid > src_norm_sq
}

/// The coarse-grid comparison on the subgrid `r + (s + j m0) * spacing`.
pub fn preceq_weak<S: Scalar>(
    src_norm_sq: S,
    dst_norm_sq: S,
    r_shift: S,
    s_offset: usize,
    m0: usize,
    spacing: S,
) -> bool {
    preceq(
        src_norm_sq,
        dst_norm_sq,
        r_shift + S::from_usize(s_offset) * spacing,
        S::from_usize(m0) * spacing,
    )
}

/// Sign test for one unit vector: the pair is cut when the signs of
/// `u . (x_A - x_{D\A})` and `u . (y_B - y_{D\B})` differ (zero counts as
/// positive).
pub fn cut_by<S: Scalar>(
    u: &[S],
    sol: &SdpSolution<S>,
    x: usize,
    mask_a: u64,
    y: usize,
    mask_b: u64,
) -> bool {
    signed_balance(u, sol, x, mask_a) != signed_balance(u, sol, y, mask_b)
}

fn signed_balance<S: Scalar>(u: &[S], sol: &SdpSolution<S>, x: usize, mask: u64) -> bool {
    let d = sol.domain_size;
    let mut total = S::zero();
    for a in 0..d {
        let dot: S = u
            .iter()
            .zip(sol.vector(x, a))
            .map(|(&ui, &vi)| ui * vi)
            .sum();
        if mask & (1 << a) != 0 {
            total = total + dot;
        } else {
            total = total - dot;
        }
    }
    total >= S::zero()
}

/// True iff at least one of the level's sampled vectors cuts the pair.
pub fn ell_cut<S: Scalar>(
    vectors: &[Vec<S>],
    sol: &SdpSolution<S>,
    x: usize,
    mask_a: u64,
    y: usize,
    mask_b: u64,
) -> bool {
    vectors
        .iter()
        .any(|u| cut_by(u, sol, x, mask_a, y, mask_b))
}

/// Why the pipeline finished before the removal steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EarlyExit {
    /// Ran the full removal pipeline.
    None,
    /// A heavy satisfiable prefix already gives the guarantee.
    HeavyPrefix,
    /// Level-set structure failed at this `alpha`; fell back to the
    /// heaviest-value assignment.
    LargeEpsRegime,
}

/// Everything observable about one pipeline run.
#[derive(Clone, Debug)]
pub struct RemovalReport<S: Scalar> {
    pub k: usize,
    pub kappa: f64,
    pub alpha: S,
    pub m0: usize,
    pub m_ell: Vec<usize>,
    pub sdp_objective: S,
    pub early_exit: EarlyExit,
    /// Removed constraint indices, per step.
    pub removed: [Vec<usize>; 6],
    /// Removed weight, per step.
    pub removed_weight: [S; 6],
    /// Surviving constraint indices after all steps.
    pub survivor: Vec<usize>,
    pub satisfied_weight: S,
}

impl<S: Scalar> RemovalReport<S> {
    pub fn total_removed_weight(&self) -> S {
        self.removed_weight.iter().copied().sum()
    }
}

struct StepContext<'a, S: Scalar> {
    instance: &'a Instance<S>,
    sol: &'a SdpSolution<S>,
    levels: &'a LevelSets,
    params: &'a PipelineParams<S>,
    /// Per (level, variable, value-subset): the sign pattern over the
    /// level's cut vectors, packed into words.
    sign_tables: Vec<Vec<Vec<Vec<u64>>>>,
}

impl<'a, S: Scalar> StepContext<'a, S> {
    fn new(
        instance: &'a Instance<S>,
        sol: &'a SdpSolution<S>,
        levels: &'a LevelSets,
        params: &'a PipelineParams<S>,
    ) -> Self {
        let d = sol.domain_size;
        let masks = 1usize << d;
        let mut sign_tables = Vec::with_capacity(d);
        for vectors in &params.cut_vectors {
            let words = vectors.len().div_ceil(64);
            let mut per_var = Vec::with_capacity(sol.num_vars);
            for x in 0..sol.num_vars {
                // dot products of each cut vector with each value vector
                let dots: Vec<Vec<S>> = vectors
                    .iter()
                    .map(|u| {
                        (0..d)
                            .map(|a| {
                                u.iter()
                                    .zip(sol.vector(x, a))
                                    .map(|(&ui, &vi)| ui * vi)
                                    .sum()
                            })
                            .collect()
                    })
                    .collect();
                let mut per_mask = Vec::with_capacity(masks);
                for mask in 0..masks as u64 {
                    let mut bits = vec![0u64; words];
                    for (ui, du) in dots.iter().enumerate() {
                        let mut total = S::zero();
                        for (a, &dot) in du.iter().enumerate() {
                            if mask & (1 << a) != 0 {
                                total = total + dot;
                            } else {
                                total = total - dot;
                            }
                        }
                        if total >= S::zero() {
                            bits[ui / 64] |= 1 << (ui % 64);
                        }
                    }
                    per_mask.push(bits);
                }
                per_var.push(per_mask);
            }
            sign_tables.push(per_var);
        }
        StepContext {
            instance,
            sol,
            levels,
            params,
            sign_tables,
        }
    }

    fn d(&self) -> usize {
        self.sol.domain_size
    }

    fn cut(&self, l: usize, x: usize, mask_a: u64, y: usize, mask_b: u64) -> bool {
        self.sign_tables[l - 1][x][mask_a as usize] != self.sign_tables[l - 1][y][mask_b as usize]
    }

    /// `B = A +^l (x, R, y)` through one constraint, by row masks.
    fn step_propagate(&self, rows: &[u64], x: usize, a_mask: u64, y: usize, l: usize) -> u64 {
        let src = a_mask & self.levels.level(x, l + 1);
        let mut out = 0u64;
        for a in 0..self.d() {
            if src & (1 << a) != 0 {
                out |= rows[a];
            }
        }
        out & self.levels.level(y, l + 1)
    }

    /// Minimum squared mass a subset must carry to participate in a cut
    /// test at level `l`. Sets reachable by the recurrence keep at least the
    /// tree-loss mass scale; lighter sets never occur there, and comparing
    /// them produces spurious cuts against mass-bearing images.
    fn cut_mass_floor(&self, l: usize) -> S {
        self.params
            .alpha
            .powf(S::from_f64((6 * l + 2) as f64 * self.params.kappa))
    }

    fn diff_norm_sq(&self, x: usize, mask_a: u64, mask_b: u64) -> S {
        self.sol.norm_sq_subset(x, mask_a) + self.sol.norm_sq_subset(x, mask_b)
            - S::from_f64(2.0) * self.sol.pair_subsets(x, mask_a, x, mask_b)
    }

    /// The grid predicate a surviving constraint must satisfy at every level
    /// and every source subset, in both directions.
    fn step1_ok(&self, ci: usize) -> bool {
        let c = &self.instance.constraints[ci];
        let (x, y) = (c.scope[0], c.scope[1]);
        let rows = c.relation.row_masks();
        let cols = c.relation.col_masks();
        let d = self.d();
        for l in 1..=d {
            let sp = spacing(self.params.alpha, self.params.kappa, l);
            let shift = self.params.r_shift[l - 1];
            for a_mask in 0..(1u64 << d) {
                let b = self.step_propagate(&rows, x, a_mask, y, l);
                if !preceq(
                    self.sol.norm_sq_subset(x, a_mask),
                    self.sol.norm_sq_subset(y, b),
                    shift,
                    sp,
                ) {
                    return false;
                }
                let b_rev = self.step_propagate(&cols, y, a_mask, x, l);
                if !preceq(
                    self.sol.norm_sq_subset(y, a_mask),
                    self.sol.norm_sq_subset(x, b_rev),
                    shift,
                    sp,
                ) {
                    return false;
                }
            }
        }
        true
    }
}

fn remove_constraints_of_var<S: Scalar>(
    instance: &Instance<S>,
    alive: &mut [bool],
    x: usize,
    removed: &mut Vec<usize>,
) {
    for (ci, c) in instance.constraints.iter().enumerate() {
        if alive[ci] && c.scope.contains(&x) {
            alive[ci] = false;
            removed.push(ci);
        }
    }
}

fn var_has_alive<S: Scalar>(instance: &Instance<S>, alive: &[bool], x: usize) -> bool {
    instance
        .constraints
        .iter()
        .enumerate()
        .any(|(ci, c)| alive[ci] && c.scope.contains(&x))
}

/// Step 0: drop every constraint whose relaxation loss exceeds
/// `alpha^(1 - kappa)`.
pub fn step0<S: Scalar>(
    instance: &Instance<S>,
    sol: &SdpSolution<S>,
    alpha: S,
    kappa: f64,
    alive: &mut [bool],
) -> Vec<usize> {
    let threshold = alpha.powf(S::from_f64(1.0 - kappa));
    let mut removed = Vec::new();
    for (ci, c) in instance.constraints.iter().enumerate() {
        if alive[ci] && sdp::loss(c, sol) > threshold {
            alive[ci] = false;
            removed.push(ci);
        }
    }
    removed
}

fn step1<S: Scalar>(ctx: &StepContext<S>, alive: &mut [bool]) -> Vec<usize> {
    let mut removed = Vec::new();
    for ci in 0..ctx.instance.constraints.len() {
        if alive[ci] && !ctx.step1_ok(ci) {
            alive[ci] = false;
            removed.push(ci);
        }
    }
    removed
}

fn step2<S: Scalar>(ctx: &StepContext<S>, alive: &mut [bool]) -> Vec<usize> {
    let d = ctx.d();
    let two_n_minus_3 = S::from_usize(2 * ctx.params.n - 3);
    let mut removed = Vec::new();
    for x in 0..ctx.instance.num_vars {
        if !var_has_alive(ctx.instance, alive, x) {
            continue;
        }
        'var: for l in 1..=d {
            let sp = spacing(ctx.params.alpha, ctx.params.kappa, l);
            let bound = two_n_minus_3 * sp;
            let allowed = ctx.levels.level(x, l + 1);
            // A subset of B subset of the level-(l+1) set
            let mut b_mask = allowed;
            loop {
                let mut a_mask = b_mask;
                loop {
                    if ctx.diff_norm_sq(x, b_mask, a_mask) <= bound
                        && !preceq_weak(
                            ctx.sol.norm_sq_subset(x, b_mask),
                            ctx.sol.norm_sq_subset(x, a_mask),
                            ctx.params.r_shift[l - 1],
                            ctx.params.s_offset[l - 1],
                            ctx.params.m0,
                            sp,
                        )
                    {
                        remove_constraints_of_var(ctx.instance, alive, x, &mut removed);
                        break 'var;
                    }
                    if a_mask == 0 {
                        break;
                    }
                    a_mask = (a_mask - 1) & b_mask;
                }
                if b_mask == 0 {
                    break;
                }
                b_mask = (b_mask - 1) & allowed;
            }
        }
    }
    removed
}

fn step3<S: Scalar>(ctx: &StepContext<S>, alive: &mut [bool]) -> Vec<usize> {
    let d = ctx.d();
    let mut removed = Vec::new();
    for x in 0..ctx.instance.num_vars {
        if !var_has_alive(ctx.instance, alive, x) {
            continue;
        }
        'var: for l in 1..=d {
            let level_mask = ctx.levels.level(x, l);
            for a_mask in 0..(1u64 << d) {
                for b_mask in 0..(1u64 << d) {
                    if a_mask & level_mask == b_mask & level_mask {
                        continue;
                    }
                    if !ctx.cut(l, x, a_mask, x, b_mask) {
                        remove_constraints_of_var(ctx.instance, alive, x, &mut removed);
                        break 'var;
                    }
                }
            }
        }
    }
    removed
}

fn step4<S: Scalar>(ctx: &StepContext<S>, alive: &mut [bool]) -> Vec<usize> {
    let d = ctx.d();
    let mut removed = Vec::new();
    for (ci, c) in ctx.instance.constraints.iter().enumerate() {
        if !alive[ci] {
            continue;
        }
        let (x, y) = (c.scope[0], c.scope[1]);
        let rows = c.relation.row_masks();
        let cols = c.relation.col_masks();
        'constraint: for l in 1..=d {
            let floor = ctx.cut_mass_floor(l);
            for a_mask in 0..(1u64 << d) {
                let b = ctx.step_propagate(&rows, x, a_mask, y, l);
                if ctx.sol.norm_sq_subset(x, a_mask) >= floor
                    && ctx.sol.norm_sq_subset(y, b) >= floor
                    && ctx.cut(l, x, a_mask, y, b)
                {
                    alive[ci] = false;
                    removed.push(ci);
                    break 'constraint;
                }
                let b_rev = ctx.step_propagate(&cols, y, a_mask, x, l);
                if ctx.sol.norm_sq_subset(y, a_mask) >= floor
                    && ctx.sol.norm_sq_subset(x, b_rev) >= floor
                    && ctx.cut(l, y, a_mask, x, b_rev)
                {
                    alive[ci] = false;
                    removed.push(ci);
                    break 'constraint;
                }
            }
        }
    }
    removed
}

fn step5<S: Scalar>(ctx: &StepContext<S>, alive: &mut [bool]) -> Vec<usize> {
    let d = ctx.d();
    let two_n_minus_3 = S::from_usize(2 * ctx.params.n - 3);
    let mut removed = Vec::new();
    for x in 0..ctx.instance.num_vars {
        if !var_has_alive(ctx.instance, alive, x) {
            continue;
        }
        'var: for l in 1..=d {
            let bound = two_n_minus_3 * spacing(ctx.params.alpha, ctx.params.kappa, l);
            let floor = ctx.cut_mass_floor(l);
            let allowed = ctx.levels.level(x, l + 1);
            let mut a_mask = allowed;
            loop {
                if ctx.sol.norm_sq_subset(x, a_mask) >= floor {
                    let mut b_mask = allowed;
                    loop {
                        if ctx.sol.norm_sq_subset(x, b_mask) >= floor
                            && ctx.diff_norm_sq(x, b_mask, a_mask) <= bound
                            && ctx.cut(l, x, a_mask, x, b_mask)
                        {
                            remove_constraints_of_var(ctx.instance, alive, x, &mut removed);
                            break 'var;
                        }
                        if b_mask == 0 {
                            break;
                        }
                        b_mask = (b_mask - 1) & allowed;
                    }
                }
                if a_mask == 0 {
                    break;
                }
                a_mask = (a_mask - 1) & allowed;
            }
        }
    }
    removed
}

/// Heaviest-value assignment (ties to the smallest value id).
fn heaviest_assignment<S: Scalar>(sol: &SdpSolution<S>) -> Assignment {
    let d = sol.domain_size;
    let values = (0..sol.num_vars)
        .map(|x| {
            let mut best = 0usize;
            for a in 1..d {
                if sol.norm_sq(x, a) > sol.norm_sq(x, best) {
                    best = a;
                }
            }
            best
        })
        .collect();
    Assignment::new(values)
}

#[derive(Clone, Debug)]
pub struct NuOptions {
    /// NU polymorphism arity minus one (majority: 2).
    pub n: usize,
    pub solver: SolverOptions,
    /// Override the relaxation accuracy (default `1/m^2`).
    pub delta: Option<f64>,
}

impl Default for NuOptions {
    fn default() -> Self {
        NuOptions {
            n: 2,
            solver: SolverOptions::default(),
            delta: None,
        }
    }
}

/// Run the full pipeline on a unary/binary instance.
pub fn run_nu<S: Scalar>(
    instance: &Instance<S>,
    seed: u64,
) -> Result<(Assignment, RemovalReport<S>)> {
    run_nu_with_options(instance, seed, &NuOptions::default())
}

pub fn run_nu_with_options<S: Scalar>(
    instance: &Instance<S>,
    seed: u64,
    options: &NuOptions,
) -> Result<(Assignment, RemovalReport<S>)> {
    if instance.domain.size() < 2 {
        return Err(Error::DomainTooSmall {
            min: 2,
            got: instance.domain.size(),
        });
    }
    if instance.max_arity() > 2 {
        return Err(Error::ArityUnsupported {
            arity: instance.max_arity(),
        });
    }
    let normalized = instance.clone().normalize_weights()?;
    let binary = binarize_unary(&normalized);
    let d = binary.domain.size();
    let m = binary.num_constraints();
    let k = loss_exponent_k(d);
    let kappa = 1.0 / k as f64;

    let mut report = RemovalReport {
        k,
        kappa,
        alpha: S::zero(),
        m0: 0,
        m_ell: Vec::new(),
        sdp_objective: S::zero(),
        early_exit: EarlyExit::None,
        removed: Default::default(),
        removed_weight: [S::zero(); 6],
        survivor: Vec::new(),
        satisfied_weight: S::zero(),
    };

    if let Preprocess1Outcome::Solved(s) = sdp::preprocess1(&binary, exact_solve)? {
        report.early_exit = EarlyExit::HeavyPrefix;
        report.survivor = (0..m).collect();
        report.satisfied_weight = normalized.evaluate(&s)?;
        return Ok((s, report));
    }

    let problem = sdp::build_relaxation(&binary)?;
    let delta = options
        .delta
        .unwrap_or_else(|| 1.0 / (m as f64 * m as f64));
    let sol = sdp::solve_with_options(&problem, delta, &options.solver)?;
    report.sdp_objective = sol.objective;
    let alpha = sol
        .objective
        .max(S::one() / (S::from_usize(m) * S::from_usize(m)));
    report.alpha = alpha;

    let levels = match preprocess2(&sol, alpha, kappa) {
        Ok(levels) => levels,
        Err(Error::AlphaTooLarge { .. }) => {
            let s = heaviest_assignment(&sol);
            report.early_exit = EarlyExit::LargeEpsRegime;
            report.survivor = (0..m).collect();
            report.satisfied_weight = normalized.evaluate(&s)?;
            return Ok((s, report));
        }
        Err(e) => return Err(e),
    };

    let params = PipelineParams::sample(d, sol.dim, options.n, alpha, seed);
    report.m0 = params.m0;
    report.m_ell = params.m_ell.clone();

    let mut alive = vec![true; m];
    report.removed[0] = step0(&binary, &sol, alpha, kappa, &mut alive);
    let ctx = StepContext::new(&binary, &sol, &levels, &params);
    report.removed[1] = step1(&ctx, &mut alive);
    report.removed[2] = step2(&ctx, &mut alive);
    report.removed[3] = step3(&ctx, &mut alive);
    report.removed[4] = step4(&ctx, &mut alive);
    report.removed[5] = step5(&ctx, &mut alive);
    for (step, removed) in report.removed.iter().enumerate() {
        report.removed_weight[step] = removed
            .iter()
            .map(|&ci| binary.constraints[ci].weight)
            .sum();
    }
    debug_assert!(
        report.removed_weight[0].to_f64() <= alpha.powf(S::from_f64(kappa)).to_f64() + 1e-12,
        "step-0 weight bound must hold deterministically"
    );

    report.survivor = (0..m).filter(|&ci| alive[ci]).collect();
    let survivor_instance = binary.restrict_to(&report.survivor);
    let solved = match exact_solve(&survivor_instance) {
        Some(s) => s,
        None => {
            return Err(Error::PipelineContractViolation {
                survivor_constraints: report.survivor.len(),
            })
        }
    };
    // variables with no surviving constraint get the heaviest value
    let heavy = heaviest_assignment(&sol);
    let mut values = solved.values;
    for x in 0..binary.num_vars {
        if !var_has_alive(&binary, &alive, x) {
            values[x] = heavy.values[x];
        }
    }
    let assignment = Assignment::new(values);
    report.satisfied_weight = normalized.evaluate(&assignment)?;
    Ok((assignment, report))
}

/// Re-scan the survivors against the step-1 predicate (used by tests: the
/// removal step is a fixpoint of its own predicate).
pub fn verify_step1_fixpoint<S: Scalar>(
    instance: &Instance<S>,
    sol: &SdpSolution<S>,
    levels: &LevelSets,
    params: &PipelineParams<S>,
    survivors: &[usize],
) -> bool {
    let binary = binarize_unary(instance);
    let ctx = StepContext::new(&binary, sol, levels, params);
    survivors.iter().all(|&ci| ctx.step1_ok(ci))
}

/// Rebuild the deterministic parts of a run for inspection (the SDP solve is
/// re-run; randomness is resampled from the seed exactly as `run_nu` does).
pub struct RunArtifacts<S: Scalar> {
    pub binary: Instance<S>,
    pub sol: SdpSolution<S>,
    pub levels: LevelSets,
    pub params: PipelineParams<S>,
}

pub fn rebuild_artifacts<S: Scalar>(
    instance: &Instance<S>,
    seed: u64,
    options: &NuOptions,
) -> Result<RunArtifacts<S>> {
    let normalized = instance.clone().normalize_weights()?;
    let binary = binarize_unary(&normalized);
    let m = binary.num_constraints();
    let d = binary.domain.size();
    let kappa = 1.0 / loss_exponent_k(d) as f64;
    let problem = sdp::build_relaxation(&binary)?;
    let delta = options
        .delta
        .unwrap_or_else(|| 1.0 / (m as f64 * m as f64));
    let sol = sdp::solve_with_options(&problem, delta, &options.solver)?;
    let alpha = sol
        .objective
        .max(S::one() / (S::from_usize(m) * S::from_usize(m)));
    let levels = preprocess2(&sol, alpha, kappa)?;
    let params = PipelineParams::sample(d, sol.dim, options.n, alpha, seed);
    Ok(RunArtifacts {
        binary,
        sol,
        levels,
        params,
    })
}
