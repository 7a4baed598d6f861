//! Planted-instance generator.
//!
//! Produces instances that are `(1 - eps)`-satisfiable by construction: a
//! random planted assignment, constraints sampled consistent with it, and a
//! `floor(eps * m)`-sized subset re-sampled so the planted tuple is excluded.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, Constraint, Domain, Instance, Relation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SCOPE_RETRIES: usize = 1000;

/// Generate a planted instance. Weights are uniform (`1/m` each), so the
/// corrupted fraction is exactly `floor(eps * m) / m <= eps`.
///
/// Deterministic for a fixed seed.
pub fn generate_planted<S: Scalar>(
    language: &[Arc<Relation>],
    num_vars: usize,
    num_constraints: usize,
    eps: f64,
    seed: u64,
) -> Result<(Instance<S>, Assignment)> {
    if language.is_empty() {
        return Err(Error::InvalidConfig("empty language".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidConfig(format!("eps {eps} outside [0,1)")));
    }
    let domain_size = language[0].domain_size();
    if language.iter().any(|r| r.domain_size() != domain_size) {
        return Err(Error::InvalidConfig(
            "language relations over different domains".into(),
        ));
    }
    let domain = Domain::new(domain_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let planted = Assignment::new(
        (0..num_vars)
            .map(|_| rng.gen_range(0..domain_size))
            .collect(),
    );

    let weight = S::one() / S::from_usize(num_constraints.max(1));
    let mut constraints = Vec::with_capacity(num_constraints);
    for _ in 0..num_constraints {
        let (scope, relation) = sample_satisfied(language, &planted, num_vars, &mut rng)?;
        constraints.push(Constraint::new(scope, relation, weight));
    }

    let num_corrupt = (eps * num_constraints as f64).floor() as usize;
    if num_corrupt > 0 {
        let mut order: Vec<usize> = (0..num_constraints).collect();
        order.shuffle(&mut rng);
        for &idx in order.iter().take(num_corrupt) {
            let scope = constraints[idx].scope.clone();
            let corrupted = corrupt(language, &planted, &scope, num_vars, &mut rng)?;
            let (scope, relation) = corrupted;
            constraints[idx] = Constraint::new(scope, relation, weight);
        }
    }

    let instance = Instance::new(domain, num_vars, constraints)?.normalize_weights()?;
    Ok((instance, planted))
}

fn random_scope<R: Rng>(arity: usize, num_vars: usize, rng: &mut R) -> Result<Vec<usize>> {
    match arity {
        1 => Ok(vec![rng.gen_range(0..num_vars)]),
        2 => {
            if num_vars < 2 {
                return Err(Error::InvalidConfig(
                    "binary constraints need at least 2 variables".into(),
                ));
            }
            let x = rng.gen_range(0..num_vars);
            let mut y = rng.gen_range(0..num_vars - 1);
            if y >= x {
                y += 1;
            }
            Ok(vec![x, y])
        }
        r => {
            if num_vars < r {
                return Err(Error::InvalidConfig(format!(
                    "arity-{r} constraints need at least {r} variables"
                )));
            }
            let mut vars: Vec<usize> = (0..num_vars).collect();
            vars.shuffle(rng);
            vars.truncate(r);
            Ok(vars)
        }
    }
}

/// Rejection-sample a (scope, relation) pair whose relation contains the
/// planted tuple on that scope.
fn sample_satisfied<R: Rng>(
    language: &[Arc<Relation>],
    planted: &Assignment,
    num_vars: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Arc<Relation>)> {
    for _ in 0..SCOPE_RETRIES {
        let rel = language[rng.gen_range(0..language.len())].clone();
        let scope = random_scope(rel.arity(), num_vars, rng)?;
        let tuple: Vec<usize> = scope.iter().map(|&x| planted.value(x)).collect();
        if rel.contains(&tuple) {
            return Ok((scope, rel));
        }
    }
    Err(Error::InvalidConfig(
        "language admits no constraint satisfied by the planted assignment".into(),
    ))
}

/// Replace the relation (keeping arity and, when possible, the scope) with a
/// language relation that excludes the planted tuple.
fn corrupt<R: Rng>(
    language: &[Arc<Relation>],
    planted: &Assignment,
    scope: &[usize],
    num_vars: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Arc<Relation>)> {
    let mut scope = scope.to_vec();
    for attempt in 0..SCOPE_RETRIES {
        if attempt > 0 {
            // the original scope may be uncorruptible; try fresh ones
            let arity = scope.len();
            scope = random_scope(arity, num_vars, rng)?;
        }
        let tuple: Vec<usize> = scope.iter().map(|&x| planted.value(x)).collect();
        let candidates: Vec<&Arc<Relation>> = language
            .iter()
            .filter(|r| r.arity() == scope.len() && !r.contains(&tuple))
            .collect();
        if let Some(rel) = candidates.choose(rng) {
            return Ok((scope, (*rel).clone()));
        }
        if attempt == 0 && language.iter().all(|r| r.arity() != scope.len()) {
            break;
        }
    }
    Err(Error::UncorruptibleLanguage)
}

/// The four OR-clause relations on the Boolean domain (the two-fan relations
/// `({a} x D) u (D x {b})`).
pub fn two_sat_language() -> Vec<Arc<Relation>> {
    let d = 2usize;
    let mut rels = Vec::new();
    for a in 0..d {
        for b in 0..d {
            let pairs: Vec<(usize, usize)> = (0..d)
                .flat_map(|u| (0..d).map(move |v| (u, v)))
                .filter(|&(u, v)| u == a || v == b)
                .collect();
            rels.push(Arc::new(Relation::binary(d, &pairs).unwrap()));
        }
    }
    rels
}

/// All permutation-graph relations `{(pi(a), a)}` on a domain of size `d`.
pub fn unique_games_language(d: usize) -> Vec<Arc<Relation>> {
    let mut perms = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    permute(&mut cur, 0, &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let pairs: Vec<(usize, usize)> = (0..d).map(|a| (p[a], a)).collect();
            Arc::new(Relation::binary(d, &pairs).unwrap())
        })
        .collect()
}

fn permute(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        permute(cur, k + 1, out);
        cur.swap(k, i);
    }
}

/// Two-fan relations `({a} x D) u (D x {b})` on a domain of size `d`.
pub fn two_fan_language(d: usize) -> Vec<Arc<Relation>> {
    let mut rels = Vec::new();
    for a in 0..d {
        for b in 0..d {
            let pairs: Vec<(usize, usize)> = (0..d)
                .flat_map(|u| (0..d).map(move |v| (u, v)))
                .filter(|&(u, v)| u == a || v == b)
                .collect();
            rels.push(Arc::new(Relation::binary(d, &pairs).unwrap()));
        }
    }
    rels
}

/// A dual-discriminator-closed mix: two-fans plus permutation graphs.
/// Preserved by every majority operation that the dual discriminator induces,
/// so it is also a majority-closed language.
pub fn implicational_language(d: usize) -> Vec<Arc<Relation>> {
    let mut rels = two_fan_language(d);
    rels.extend(unique_games_language(d));
    rels
}
