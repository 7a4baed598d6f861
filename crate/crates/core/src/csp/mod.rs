//! Weighted CSP instances over a fixed finite domain.
//!
//! An [`Instance`] is a list of weighted unary/binary (and, before
//! binarization, higher-arity) constraints. Weights are normalized to sum to
//! one, so [`evaluate`](Instance::evaluate) returns the satisfied fraction.

pub mod generate;
pub mod json;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance for the "weights sum to one" invariant.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Default cap on `|D|^num_vars` for exhaustive search.
pub const BRUTE_FORCE_CAP: f64 = 1e7;

/// A fixed finite domain; values are `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Domain {
    size: usize,
}

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::DomainTooSmall { min: 1, got: 0 });
        }
        Ok(Domain { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    /// Full domain as a bitmask.
    pub fn full_mask(&self) -> u64 {
        debug_assert!(self.size <= 64);
        if self.size == 64 {
            u64::MAX
        } else {
            (1u64 << self.size) - 1
        }
    }
}

/// An extensional relation: a duplicate-free, lexicographically sorted set of
/// tuples over the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    domain_size: usize,
    tuples: Vec<Vec<usize>>,
}

impl Relation {
    pub fn new(arity: usize, domain_size: usize, mut tuples: Vec<Vec<usize>>) -> Result<Self> {
        if arity == 0 || domain_size == 0 {
            return Err(Error::InvalidRelationTuple {
                tuple: vec![],
                arity,
                domain_size,
            });
        }
        for t in &tuples {
            if t.len() != arity || t.iter().any(|&v| v >= domain_size) {
                return Err(Error::InvalidRelationTuple {
                    tuple: t.clone(),
                    arity,
                    domain_size,
                });
            }
        }
        tuples.sort();
        tuples.dedup();
        Ok(Relation {
            arity,
            domain_size,
            tuples,
        })
    }

    /// Binary relation from `(a, b)` pairs.
    pub fn binary(domain_size: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Relation::new(
            2,
            domain_size,
            pairs.iter().map(|&(a, b)| vec![a, b]).collect(),
        )
    }

    /// Unary relation from a set of values.
    pub fn unary(domain_size: usize, values: &[usize]) -> Result<Self> {
        Relation::new(1, domain_size, values.iter().map(|&a| vec![a]).collect())
    }

    /// Full binary relation `D x D`.
    pub fn full_binary(domain_size: usize) -> Self {
        let pairs: Vec<(usize, usize)> = (0..domain_size)
            .flat_map(|a| (0..domain_size).map(move |b| (a, b)))
            .collect();
        Relation::binary(domain_size, &pairs).expect("full relation is valid")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }

    /// The inverse of a binary relation: `{(b, a) : (a, b) in R}`.
    pub fn inverse(&self) -> Result<Relation> {
        if self.arity != 2 {
            return Err(Error::ArityUnsupported { arity: self.arity });
        }
        Relation::new(
            2,
            self.domain_size,
            self.tuples.iter().map(|t| vec![t[1], t[0]]).collect(),
        )
    }

    /// Projection onto coordinates `(i, j)`.
    pub fn projection(&self, i: usize, j: usize) -> Relation {
        let pairs: Vec<Vec<usize>> = self.tuples.iter().map(|t| vec![t[i], t[j]]).collect();
        Relation::new(2, self.domain_size, pairs).expect("projection of valid relation")
    }

    /// Projection onto a single coordinate, as a bitmask.
    pub fn projection_mask(&self, i: usize) -> u64 {
        let mut m = 0u64;
        for t in &self.tuples {
            m |= 1 << t[i];
        }
        m
    }

    /// For a binary relation: per-value rows `rows[a] = { b : (a, b) in R }`
    /// as bitmasks. Fast form used by propagation and arc consistency.
    pub fn row_masks(&self) -> Vec<u64> {
        debug_assert_eq!(self.arity, 2);
        let mut rows = vec![0u64; self.domain_size];
        for t in &self.tuples {
            rows[t[0]] |= 1 << t[1];
        }
        rows
    }

    /// Column form of [`row_masks`](Self::row_masks): `cols[b] = { a : (a, b) in R }`.
    pub fn col_masks(&self) -> Vec<u64> {
        debug_assert_eq!(self.arity, 2);
        let mut cols = vec![0u64; self.domain_size];
        for t in &self.tuples {
            cols[t[1]] |= 1 << t[0];
        }
        cols
    }
}

/// A weighted constraint: a scope and a shared relation.
#[derive(Clone, Debug)]
pub struct Constraint<S: Scalar> {
    pub scope: Vec<usize>,
    pub relation: Arc<Relation>,
    pub weight: S,
}

impl<S: Scalar> Constraint<S> {
    pub fn new(scope: Vec<usize>, relation: Arc<Relation>, weight: S) -> Self {
        debug_assert_eq!(scope.len(), relation.arity());
        Constraint {
            scope,
            relation,
            weight,
        }
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn satisfied_by(&self, values: &[usize]) -> bool {
        let tuple: Vec<usize> = self.scope.iter().map(|&x| values[x]).collect();
        self.relation.contains(&tuple)
    }
}

/// A weighted CSP instance.
#[derive(Clone, Debug)]
pub struct Instance<S: Scalar> {
    pub domain: Domain,
    pub num_vars: usize,
    pub constraints: Vec<Constraint<S>>,
}

/// A total assignment of domain values to variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<usize>,
}

impl Assignment {
    pub fn new(values: Vec<usize>) -> Self {
        Assignment { values }
    }

    pub fn value(&self, var: usize) -> usize {
        self.values[var]
    }
}

impl<S: Scalar> Instance<S> {
    pub fn new(domain: Domain, num_vars: usize, constraints: Vec<Constraint<S>>) -> Result<Self> {
        for c in &constraints {
            if c.scope.iter().any(|&x| x >= num_vars) {
                return Err(Error::ScopeOutOfRange {
                    scope: c.scope.clone(),
                    num_vars,
                });
            }
            if c.relation.domain_size() != domain.size() {
                return Err(Error::InvalidRelationTuple {
                    tuple: vec![],
                    arity: c.relation.arity(),
                    domain_size: c.relation.domain_size(),
                });
            }
        }
        Ok(Instance {
            domain,
            num_vars,
            constraints,
        })
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn max_arity(&self) -> usize {
        self.constraints.iter().map(|c| c.arity()).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> S {
        self.constraints.iter().map(|c| c.weight).sum()
    }

    fn check_assignment(&self, s: &Assignment) -> Result<()> {
        if s.values.len() != self.num_vars {
            return Err(Error::AssignmentLength {
                got: s.values.len(),
                want: self.num_vars,
            });
        }
        for (var, &v) in s.values.iter().enumerate() {
            if v >= self.domain.size() {
                return Err(Error::AssignmentValue {
                    var,
                    value: v,
                    domain_size: self.domain.size(),
                });
            }
        }
        Ok(())
    }

    /// Total weight of the constraints satisfied by `s`.
    pub fn evaluate(&self, s: &Assignment) -> Result<S> {
        self.check_assignment(s)?;
        Ok(self
            .constraints
            .iter()
            .filter(|c| c.satisfied_by(&s.values))
            .map(|c| c.weight)
            .sum())
    }

    /// Rescale weights to sum to one. Constraint order is preserved.
    pub fn normalize_weights(mut self) -> Result<Self> {
        let total = self.total_weight();
        if total <= S::zero() {
            return Err(Error::ZeroTotalWeight);
        }
        for c in &mut self.constraints {
            c.weight = c.weight / total;
        }
        Ok(self)
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_weight().to_f64() - 1.0).abs() <= WEIGHT_SUM_TOL
    }

    /// Exact optimum by exhaustive search, with an arg-max witness.
    pub fn opt_bruteforce(&self) -> Result<(S, Assignment)> {
        self.opt_bruteforce_capped(BRUTE_FORCE_CAP)
    }

    pub fn opt_bruteforce_capped(&self, cap: f64) -> Result<(S, Assignment)> {
        let d = self.domain.size();
        let space = (d as f64).powi(self.num_vars as i32);
        if space > cap {
            return Err(Error::BruteForceCapExceeded { space, cap });
        }
        let mut best_val = S::neg_infinity();
        let mut best = vec![0usize; self.num_vars];
        let mut cur = vec![0usize; self.num_vars];
        loop {
            let val: S = self
                .constraints
                .iter()
                .filter(|c| c.satisfied_by(&cur))
                .map(|c| c.weight)
                .sum();
            if val > best_val {
                best_val = val;
                best.copy_from_slice(&cur);
            }
            // odometer increment
            let mut i = 0;
            loop {
                if i == self.num_vars {
                    return Ok((best_val, Assignment::new(best)));
                }
                cur[i] += 1;
                if cur[i] < d {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    /// A sub-instance keeping the constraints at the given indices.
    pub fn restrict_to(&self, keep: &[usize]) -> Instance<S> {
        Instance {
            domain: self.domain,
            num_vars: self.num_vars,
            constraints: keep.iter().map(|&i| self.constraints[i].clone()).collect(),
        }
    }
}
