//! JSON instance format.
//!
//! ```json
//! { "domain_size": 2, "num_vars": 2,
//!   "constraints": [ { "scope": [0, 1], "tuples": [[0, 0]], "weight": 1.0 } ] }
//! ```
//!
//! Serialization is canonical: tuples are emitted in lexicographic order
//! (which [`Relation`] maintains internally).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Constraint, Domain, Instance, Relation};
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
pub struct InstanceJson {
    pub domain_size: usize,
    pub num_vars: usize,
    pub constraints: Vec<ConstraintJson>,
}

#[derive(Serialize, Deserialize)]
pub struct ConstraintJson {
    pub scope: Vec<usize>,
    pub tuples: Vec<Vec<usize>>,
    pub weight: f64,
}

pub fn to_json<S: Scalar>(instance: &Instance<S>) -> InstanceJson {
    InstanceJson {
        domain_size: instance.domain.size(),
        num_vars: instance.num_vars,
        constraints: instance
            .constraints
            .iter()
            .map(|c| ConstraintJson {
                scope: c.scope.clone(),
                tuples: c.relation.tuples().to_vec(),
                weight: c.weight.to_f64(),
            })
            .collect(),
    }
}

pub fn from_json<S: Scalar>(json: &InstanceJson) -> Result<Instance<S>> {
    let domain = Domain::new(json.domain_size)?;
    let constraints = json
        .constraints
        .iter()
        .map(|c| {
            let rel = Relation::new(c.scope.len(), json.domain_size, c.tuples.clone())?;
            Ok(Constraint::new(
                c.scope.clone(),
                Arc::new(rel),
                S::from_f64(c.weight),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(domain, json.num_vars, constraints)
}

pub fn to_string<S: Scalar>(instance: &Instance<S>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_json(instance))?)
}

pub fn from_str<S: Scalar>(s: &str) -> Result<Instance<S>> {
    from_json(&serde_json::from_str(s)?)
}

/// Language file format: a list of relations over one domain.
#[derive(Serialize, Deserialize)]
pub struct LanguageJson {
    pub domain_size: usize,
    pub relations: Vec<RelationJson>,
}

#[derive(Serialize, Deserialize)]
pub struct RelationJson {
    pub arity: usize,
    pub tuples: Vec<Vec<usize>>,
}

pub fn language_from_str(s: &str) -> Result<Vec<Arc<Relation>>> {
    language_with_domain_from_str(s).map(|(_, relations)| relations)
}

pub fn language_with_domain_from_str(s: &str) -> Result<(usize, Vec<Arc<Relation>>)> {
    let json: LanguageJson = serde_json::from_str(s)?;
    let relations = json
        .relations
        .iter()
        .map(|r| Ok(Arc::new(Relation::new(r.arity, json.domain_size, r.tuples.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((json.domain_size, relations))
}

pub fn language_to_string(relations: &[Arc<Relation>]) -> Result<String> {
    let domain_size = relations.first().map(|r| r.domain_size()).unwrap_or(2);
    let json = LanguageJson {
        domain_size,
        relations: relations
            .iter()
            .map(|r| RelationJson {
                arity: r.arity(),
                tuples: r.tuples().to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&json)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rel = Arc::new(Relation::binary(2, &[(1, 0), (0, 1)]).unwrap());
        let inst = Instance::<f64>::new(
            Domain::new(2).unwrap(),
            3,
            vec![Constraint::new(vec![0, 2], rel, 1.0)],
        )
        .unwrap();
        let s = to_string(&inst).unwrap();
        let back: Instance<f64> = from_str(&s).unwrap();
        assert_eq!(back.num_vars, 3);
        assert_eq!(back.constraints[0].scope, vec![0, 2]);
        assert_eq!(
            back.constraints[0].relation.tuples(),
            inst.constraints[0].relation.tuples()
        );
    }

    #[test]
    fn canonical_tuple_order() {
        let rel = Arc::new(Relation::binary(3, &[(2, 1), (0, 2), (1, 0)]).unwrap());
        assert_eq!(
            rel.tuples(),
            &[vec![0, 2], vec![1, 0], vec![2, 1]],
            "tuples stored lexicographically"
        );
    }
}
