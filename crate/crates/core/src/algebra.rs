//! Finite operation tables, polymorphism checks, the four implicational
//! (0/1/all) relation templates, 2-decomposability, a backtracking search for
//! majority polymorphisms, subuniverse closure, and the arity-reduction
//! transforms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csp::{Assignment, Constraint, Domain, Instance, Relation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on `|D|` for the majority-polymorphism search.
pub const MAJORITY_SEARCH_DOMAIN_CAP: usize = 4;

/// A total finitary operation `D^arity -> D`, stored row-major: the index of
/// `f(a_1, ..., a_k)` is `a_1 * d^(k-1) + ... + a_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationTable {
    domain_size: usize,
    arity: usize,
    table: Vec<usize>,
}

impl OperationTable {
    pub fn new(domain_size: usize, arity: usize, table: Vec<usize>) -> Result<Self> {
        let want = domain_size.pow(arity as u32);
        if table.len() != want || table.iter().any(|&v| v >= domain_size) {
            return Err(Error::InvalidConfig(format!(
                "operation table needs {want} entries < {domain_size}"
            )));
        }
        Ok(OperationTable {
            domain_size,
            arity,
            table,
        })
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    fn index(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        args.iter().fold(0, |acc, &a| acc * self.domain_size + a)
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        self.table[self.index(args)]
    }

    /// `f(x, ..., x, y, x, ..., x) = x` for all positions of the single `y`.
    pub fn is_nu(&self) -> Result<bool> {
        if self.arity < 3 {
            return Err(Error::ArityTooSmall {
                min: 3,
                got: self.arity,
            });
        }
        let d = self.domain_size;
        let mut args = vec![0usize; self.arity];
        for x in 0..d {
            for y in 0..d {
                for pos in 0..self.arity {
                    args.iter_mut().for_each(|a| *a = x);
                    args[pos] = y;
                    if self.apply(&args) != x {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// True iff the componentwise image of every choice of `arity` tuples from
    /// `rel` lies in `rel`.
    pub fn preserves(&self, rel: &Relation) -> bool {
        let tuples = rel.tuples();
        if tuples.is_empty() {
            return true;
        }
        let k = self.arity;
        let r = rel.arity();
        let mut choice = vec![0usize; k];
        let mut image = vec![0usize; r];
        let mut args = vec![0usize; k];
        loop {
            for coord in 0..r {
                for (i, &ti) in choice.iter().enumerate() {
                    args[i] = tuples[ti][coord];
                }
                image[coord] = self.apply(&args);
            }
            if !rel.contains(&image) {
                return false;
            }
            let mut i = 0;
            loop {
                if i == k {
                    return true;
                }
                choice[i] += 1;
                if choice[i] < tuples.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
}

/// Serialized form: row-major table.
#[derive(Serialize, Deserialize)]
pub struct OperationTableJson {
    pub domain_size: usize,
    pub arity: usize,
    pub table: Vec<usize>,
}

impl OperationTable {
    pub fn to_json(&self) -> OperationTableJson {
        OperationTableJson {
            domain_size: self.domain_size,
            arity: self.arity,
            table: self.table.clone(),
        }
    }

    pub fn from_json(json: &OperationTableJson) -> Result<Self> {
        OperationTable::new(json.domain_size, json.arity, json.table.clone())
    }
}

/// The dual discriminator: first argument on pairwise-distinct triples,
/// majority value otherwise.
pub fn dual_discriminator(domain: Domain) -> OperationTable {
    let d = domain.size();
    let mut table = Vec::with_capacity(d * d * d);
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                let v = if x == y || x == z {
                    x
                } else if y == z {
                    y
                } else {
                    x
                };
                table.push(v);
            }
        }
    }
    OperationTable::new(d, 3, table).expect("dual discriminator table is total")
}

/// Classification of a binary relation into the implicational templates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    /// `({a} x D) u (D x {b})`
    Type1 { a: usize, b: usize },
    /// Graph of a permutation: `{(pi(a), a) : a in D}`; `perm[a] = pi(a)`.
    Type2 { perm: Vec<usize> },
    /// `P x Q`
    Type3 { p: Vec<usize>, q: Vec<usize> },
    /// Intersection of a type-1 or type-2 relation with a product.
    Type4 {
        base: Box<Classification>,
        p: Vec<usize>,
        q: Vec<usize>,
    },
    None,
}

impl Classification {
    pub fn is_none(&self) -> bool {
        matches!(self, Classification::None)
    }
}

fn two_fan(d: usize, a: usize, b: usize) -> Vec<Vec<usize>> {
    let mut pairs = Vec::new();
    for u in 0..d {
        for v in 0..d {
            if u == a || v == b {
                pairs.push(vec![u, v]);
            }
        }
    }
    pairs
}

fn mask_to_values(mask: u64, d: usize) -> Vec<usize> {
    (0..d).filter(|&v| mask & (1 << v) != 0).collect()
}

/// Classify a binary relation as one of the four templates preserved by the
/// dual discriminator. Matching order is fixed (type 1, 2, 3, 4) so the
/// output is deterministic when templates overlap. The empty relation is
/// `P x Q` with `P = Q = {}`.
pub fn classify_01all(rel: &Relation) -> Classification {
    assert_eq!(rel.arity(), 2, "classify_01all needs a binary relation");
    let d = rel.domain_size();

    // type 1: two-fan
    for a in 0..d {
        for b in 0..d {
            let fan = two_fan(d, a, b);
            if rel.tuples() == fan.as_slice() {
                return Classification::Type1 { a, b };
            }
        }
    }

    // type 2: permutation graph {(pi(a), a)}
    if rel.len() == d {
        let mut perm = vec![usize::MAX; d];
        let mut seen_first = 0u64;
        let mut ok = true;
        for t in rel.tuples() {
            let (x, y) = (t[0], t[1]);
            if perm[y] != usize::MAX || seen_first & (1 << x) != 0 {
                ok = false;
                break;
            }
            perm[y] = x;
            seen_first |= 1 << x;
        }
        if ok && perm.iter().all(|&v| v != usize::MAX) {
            return Classification::Type2 { perm };
        }
    }

    // type 3: product of the coordinate projections
    let p_mask = rel.projection_mask(0);
    let q_mask = rel.projection_mask(1);
    let p = mask_to_values(p_mask, d);
    let q = mask_to_values(q_mask, d);
    if rel.len() == p.len() * q.len() {
        return Classification::Type3 { p, q };
    }

    // type 4: T n (P x Q) for a type-1 or type-2 relation T containing R,
    // with P, Q the projections of R.
    let restrict =
        |t: &[Vec<usize>]| -> Vec<Vec<usize>> {
            t.iter()
                .filter(|pair| {
                    p_mask & (1 << pair[0]) != 0 && q_mask & (1 << pair[1]) != 0
                })
                .cloned()
                .collect()
        };
    for a in 0..d {
        for b in 0..d {
            let fan = two_fan(d, a, b);
            if restrict(&fan) == rel.tuples() {
                return Classification::Type4 {
                    base: Box::new(Classification::Type1 { a, b }),
                    p: p.clone(),
                    q: q.clone(),
                };
            }
        }
    }
    let mut perm: Vec<usize> = (0..d).collect();
    let mut perms = Vec::new();
    collect_perms(&mut perm, 0, &mut perms);
    for pi in perms {
        let graph: Vec<Vec<usize>> = {
            let mut g: Vec<Vec<usize>> = (0..d).map(|a| vec![pi[a], a]).collect();
            g.sort();
            g
        };
        if rel.tuples().iter().all(|t| graph.contains(t)) && restrict(&graph) == rel.tuples() {
            return Classification::Type4 {
                base: Box::new(Classification::Type2 { perm: pi }),
                p: p.clone(),
                q: q.clone(),
            };
        }
    }

    Classification::None
}

fn collect_perms(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        collect_perms(cur, k + 1, out);
        cur.swap(k, i);
    }
}

/// True iff `rel` equals the set of tuples all of whose pairwise projections
/// lie in the corresponding projection of `rel`.
pub fn is_2decomposable(rel: &Relation) -> bool {
    let r = rel.arity();
    assert!(r >= 2, "2-decomposability needs arity >= 2");
    let d = rel.domain_size();
    let mut projections = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            projections.push((i, j, rel.projection(i, j)));
        }
    }
    let mut tuple = vec![0usize; r];
    loop {
        let in_all = projections
            .iter()
            .all(|(i, j, pr)| pr.contains(&[tuple[*i], tuple[*j]]));
        if in_all != rel.contains(&tuple) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == r {
                return true;
            }
            tuple[i] += 1;
            if tuple[i] < d {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// Backtracking search for a ternary majority operation preserving every
/// relation in the language. The near-unanimity rows are pre-filled; only the
/// pairwise-distinct argument triples are searched.
pub fn find_majority(language: &[Arc<Relation>], domain: Domain) -> Result<Option<OperationTable>> {
    let d = domain.size();
    if d > MAJORITY_SEARCH_DOMAIN_CAP {
        return Err(Error::SearchCapExceeded {
            cap: MAJORITY_SEARCH_DOMAIN_CAP,
            got: d,
        });
    }
    let mut table = vec![usize::MAX; d * d * d];
    let mut free = Vec::new();
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                let idx = (x * d + y) * d + z;
                if x == y || x == z {
                    table[idx] = x;
                } else if y == z {
                    table[idx] = y;
                } else {
                    free.push(idx);
                }
            }
        }
    }
    if search_majority(&mut table, &free, 0, d, language) {
        Ok(Some(OperationTable::new(d, 3, table)?))
    } else {
        Ok(None)
    }
}

fn search_majority(
    table: &mut [usize],
    free: &[usize],
    pos: usize,
    d: usize,
    language: &[Arc<Relation>],
) -> bool {
    if !partial_preserves(table, d, language) {
        return false;
    }
    if pos == free.len() {
        return true;
    }
    for v in 0..d {
        table[free[pos]] = v;
        if search_majority(table, free, pos + 1, d, language) {
            return true;
        }
    }
    table[free[pos]] = usize::MAX;
    false
}

/// Preservation check over a partially filled ternary table: only triples of
/// tuples whose componentwise application is fully determined are tested.
fn partial_preserves(table: &[usize], d: usize, language: &[Arc<Relation>]) -> bool {
    for rel in language {
        let tuples = rel.tuples();
        let r = rel.arity();
        let mut image = vec![0usize; r];
        for t1 in tuples {
            for t2 in tuples {
                for t3 in tuples {
                    let mut defined = true;
                    for coord in 0..r {
                        let idx = (t1[coord] * d + t2[coord]) * d + t3[coord];
                        let v = table[idx];
                        if v == usize::MAX {
                            defined = false;
                            break;
                        }
                        image[coord] = v;
                    }
                    if defined && !rel.contains(&image) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Smallest superset of `seed` closed under all the provided operations.
pub fn subuniverse_closure(seed: u64, ops: &[OperationTable], domain: Domain) -> u64 {
    let d = domain.size();
    let mut set = seed;
    loop {
        let mut grown = false;
        for op in ops {
            let members: Vec<usize> = (0..d).filter(|&v| set & (1 << v) != 0).collect();
            if members.is_empty() {
                continue;
            }
            let k = op.arity();
            let mut choice = vec![0usize; k];
            let mut args = vec![0usize; k];
            'outer: loop {
                for (i, &ci) in choice.iter().enumerate() {
                    args[i] = members[ci];
                }
                let out = op.apply(&args);
                if set & (1 << out) == 0 {
                    set |= 1 << out;
                    grown = true;
                }
                let mut i = 0;
                loop {
                    if i == k {
                        break 'outer;
                    }
                    choice[i] += 1;
                    if choice[i] < members.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
            }
        }
        if !grown {
            return set;
        }
    }
}

/// Summary of a language's polymorphism structure.
#[derive(Clone, Debug)]
pub struct LanguageProfile {
    pub relations: Vec<Arc<Relation>>,
    pub max_arity: usize,
    pub has_majority: bool,
    /// Arity of a found near-unanimity polymorphism (the search covers
    /// ternary tables, so this is `Some(3)` or `None`).
    pub has_nu: Option<usize>,
    pub has_dual_discriminator: bool,
}

pub fn analyze_language(relations: &[Arc<Relation>], domain: Domain) -> Result<LanguageProfile> {
    let dd = dual_discriminator(domain);
    let has_dual_discriminator = relations.iter().all(|r| dd.preserves(r));
    let majority = find_majority(relations, domain)?;
    let has_majority = majority.is_some();
    Ok(LanguageProfile {
        relations: relations.to_vec(),
        max_arity: relations.iter().map(|r| r.arity()).max().unwrap_or(0),
        has_majority,
        has_nu: majority.map(|m| m.arity()),
        has_dual_discriminator,
    })
}

/// Replace every unary constraint `(x, R)` by the binary diagonal constraint
/// `((x, x), {(a, a) : a in R})`. Satisfaction is unchanged.
pub fn binarize_unary<S: Scalar>(instance: &Instance<S>) -> Instance<S> {
    let d = instance.domain.size();
    let constraints = instance
        .constraints
        .iter()
        .map(|c| {
            if c.arity() == 1 {
                let pairs: Vec<(usize, usize)> = c
                    .relation
                    .tuples()
                    .iter()
                    .map(|t| (t[0], t[0]))
                    .collect();
                Constraint::new(
                    vec![c.scope[0], c.scope[0]],
                    Arc::new(Relation::binary(d, &pairs).expect("diagonal relation")),
                    c.weight,
                )
            } else {
                c.clone()
            }
        })
        .collect();
    Instance {
        domain: instance.domain,
        num_vars: instance.num_vars,
        constraints,
    }
}

/// Recovers an assignment for the original instance from an assignment for
/// the binarized one: the original variables sit first and their value is the
/// first coordinate of their tuple value.
#[derive(Clone, Debug)]
pub struct BackMap {
    pub original_num_vars: usize,
    pub original_domain: Domain,
    pub tuple_arity: usize,
}

impl BackMap {
    pub fn recover(&self, s: &Assignment) -> Assignment {
        let d = self.original_domain.size();
        let mut values = Vec::with_capacity(self.original_num_vars);
        for x in 0..self.original_num_vars {
            let tuple_value = s.values[x];
            // first coordinate is the most significant digit
            let first = tuple_value / d.pow((self.tuple_arity - 1) as u32);
            values.push(first);
        }
        Assignment::new(values)
    }
}

fn encode_tuple(tuple: &[usize], d: usize, arity: usize) -> usize {
    debug_assert!(tuple.len() <= arity);
    let mut v = 0usize;
    for i in 0..arity {
        v = v * d + tuple.get(i).copied().unwrap_or(0);
    }
    v
}

/// Reduce an instance of arbitrary arity to a unary/binary instance over the
/// tuple domain `D^r`, where `r` is the maximum constraint arity.
///
/// Constraints of arity <= 2 are lifted coordinate-wise (the new relation
/// depends only on the first coordinate of each tuple value), so their count,
/// weights, and optimum value carry over exactly. A constraint of arity
/// `q >= 3` becomes one hidden variable holding the padded scope tuple plus
/// `q` coordinate-match constraints, with the original weight split equally
/// over the `q + 1` pieces; this preserves satisfiability exactly and the
/// optimum up to the standard two-sided bounds.
pub fn binarize<S: Scalar>(instance: &Instance<S>) -> Result<(Instance<S>, BackMap)> {
    let d = instance.domain.size();
    let r = instance.max_arity().max(1);
    let new_d = d.pow(r as u32);
    let new_domain = Domain::new(new_d)?;

    let lift_binary = |rel: &Relation| -> Relation {
        // (t, u) allowed iff (t_1, u_1) in rel
        let mut pairs = Vec::new();
        let block = new_d / d; // number of tuples sharing a first coordinate
        for t in rel.tuples() {
            let (a, b) = (t[0], t[1]);
            for i in 0..block {
                for j in 0..block {
                    pairs.push(vec![a * block + i, b * block + j]);
                }
            }
        }
        Relation::new(2, new_d, pairs).expect("lifted relation")
    };
    let lift_unary_to_diag = |rel: &Relation| -> Relation {
        let block = new_d / d;
        let mut pairs = Vec::new();
        for t in rel.tuples() {
            for i in 0..block {
                let v = t[0] * block + i;
                pairs.push(vec![v, v]);
            }
        }
        Relation::new(2, new_d, pairs).expect("lifted diagonal relation")
    };

    let mut num_vars = instance.num_vars;
    let mut constraints: Vec<Constraint<S>> = Vec::new();
    for c in &instance.constraints {
        match c.arity() {
            1 => constraints.push(Constraint::new(
                vec![c.scope[0], c.scope[0]],
                Arc::new(lift_unary_to_diag(&c.relation)),
                c.weight,
            )),
            2 => constraints.push(Constraint::new(
                c.scope.clone(),
                Arc::new(lift_binary(&c.relation)),
                c.weight,
            )),
            q => {
                let hidden = num_vars;
                num_vars += 1;
                let piece = c.weight / S::from_usize(q + 1);
                // membership: the hidden variable holds a padded tuple of R
                let member_values: Vec<usize> = c
                    .relation
                    .tuples()
                    .iter()
                    .map(|t| encode_tuple(t, d, r))
                    .collect();
                let member_pairs: Vec<(usize, usize)> =
                    member_values.iter().map(|&v| (v, v)).collect();
                constraints.push(Constraint::new(
                    vec![hidden, hidden],
                    Arc::new(Relation::binary(new_d, &member_pairs)?),
                    piece,
                ));
                // coordinate matches: hidden tuple coordinate i == first
                // coordinate of the i-th scope variable
                for (i, &x) in c.scope.iter().enumerate() {
                    let mut pairs = Vec::new();
                    for &hv in &member_values {
                        let coord = (hv / d.pow((r - 1 - i) as u32)) % d;
                        let block = new_d / d;
                        for j in 0..block {
                            pairs.push((hv, coord * block + j));
                        }
                    }
                    constraints.push(Constraint::new(
                        vec![hidden, x],
                        Arc::new(Relation::binary(new_d, &pairs)?),
                        piece,
                    ));
                }
            }
        }
    }

    let out = Instance::new(new_domain, num_vars, constraints)?;
    Ok((
        out,
        BackMap {
            original_num_vars: instance.num_vars,
            original_domain: instance.domain,
            tuple_arity: r,
        },
    ))
}

/// Forward-encode an original assignment into the binarized instance's
/// variables (used by tests to check weight preservation on the image).
pub fn binarize_image<S: Scalar>(
    original: &Instance<S>,
    binarized: &Instance<S>,
    back: &BackMap,
    s: &Assignment,
) -> Assignment {
    let d = back.original_domain.size();
    let r = back.tuple_arity;
    let mut values = vec![0usize; binarized.num_vars];
    for x in 0..back.original_num_vars {
        values[x] = encode_tuple(&[s.values[x]], d, r);
    }
    let mut hidden = back.original_num_vars;
    for c in &original.constraints {
        if c.arity() >= 3 {
            let tuple: Vec<usize> = c.scope.iter().map(|&x| s.values[x]).collect();
            if c.relation.contains(&tuple) {
                values[hidden] = encode_tuple(&tuple, d, r);
            } else {
                // pick any member tuple; the membership piece stays satisfied
                // while the mismatched coordinate pieces are charged
                if let Some(t) = c.relation.tuples().first() {
                    values[hidden] = encode_tuple(t, d, r);
                }
            }
            hidden += 1;
        }
    }
    Assignment::new(values)
}
