//! Property tests for the algebraic invariants.

use std::sync::Arc;

use proptest::prelude::*;

use robust_csp::algebra::{dual_discriminator, subuniverse_closure};
use robust_csp::consistency::{propagate, Pattern};
use robust_csp::csp::{json, Assignment, Constraint, Domain, Instance, Relation};
use robust_csp::nu::{preceq, preceq_weak};

fn arb_relation(d: usize) -> impl Strategy<Value = Relation> {
    proptest::collection::vec((0..d, 0..d), 0..=d * d)
        .prop_map(move |pairs| Relation::binary(d, &pairs).unwrap())
}

fn arb_instance() -> impl Strategy<Value = Instance<f64>> {
    (2usize..=3).prop_flat_map(|d| {
        (2usize..=4, 1usize..=5).prop_flat_map(move |(nv, m)| {
            proptest::collection::vec(
                ((0..nv, 0..nv), arb_relation(d), 0.05f64..1.0),
                m..=m,
            )
            .prop_map(move |specs| {
                let constraints = specs
                    .into_iter()
                    .map(|((x, y), rel, w)| Constraint::new(vec![x, y], Arc::new(rel), w))
                    .collect();
                Instance::new(Domain::new(d).unwrap(), nv, constraints).unwrap()
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluate_stays_in_unit_interval(inst in arb_instance(), values in proptest::collection::vec(0usize..3, 4)) {
        let inst = inst.normalize_weights().unwrap();
        let d = inst.domain.size();
        let s = Assignment::new(values.iter().take(inst.num_vars).map(|&v| v % d).collect());
        let v = inst.evaluate(&s).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        // exactly 1 iff every constraint satisfied
        let all = inst.constraints.iter().all(|c| c.satisfied_by(&s.values));
        prop_assert_eq!(all, (v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalize_is_idempotent(inst in arb_instance()) {
        let once = inst.normalize_weights().unwrap();
        let twice = once.clone().normalize_weights().unwrap();
        for (a, b) in once.constraints.iter().zip(&twice.constraints) {
            prop_assert!((a.weight - b.weight).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip(inst in arb_instance()) {
        let text = json::to_string(&inst).unwrap();
        let back: Instance<f64> = json::from_str(&text).unwrap();
        prop_assert_eq!(inst.num_vars, back.num_vars);
        prop_assert_eq!(inst.num_constraints(), back.num_constraints());
        for (a, b) in inst.constraints.iter().zip(&back.constraints) {
            prop_assert_eq!(&a.scope, &b.scope);
            prop_assert_eq!(a.relation.tuples(), b.relation.tuples());
            prop_assert!((a.weight - b.weight).abs() < 1e-15);
        }
    }

    #[test]
    fn closure_is_extensive_monotone_idempotent(seed1 in 0u64..8, seed2 in 0u64..8) {
        let domain = Domain::new(3).unwrap();
        let ops = [dual_discriminator(domain)];
        let seed1 = seed1 & 0b111;
        let seed2 = seed2 & 0b111;
        let c1 = subuniverse_closure(seed1, &ops, domain);
        prop_assert_eq!(seed1 & !c1, 0, "extensive");
        prop_assert_eq!(c1, subuniverse_closure(c1, &ops, domain), "idempotent");
        if seed1 & !seed2 == 0 {
            let c2 = subuniverse_closure(seed2, &ops, domain);
            prop_assert_eq!(c1 & !c2, 0, "monotone");
        }
    }

    #[test]
    fn propagation_is_monotone_and_respects_addition(
        rel1 in arb_relation(3),
        rel2 in arb_relation(3),
        a in 0u64..8,
        b in 0u64..8,
    ) {
        let d = 3;
        let p = Pattern::single_edge(0, 1, Arc::new(rel1));
        let q = Pattern::single_edge(1, 2, Arc::new(rel2));
        let pq = p.add(&q).unwrap();
        // (A + p) + q = A + (p + q)
        let via_parts = propagate(&q, propagate(&p, a, d).unwrap(), d).unwrap();
        let via_sum = propagate(&pq, a, d).unwrap();
        prop_assert_eq!(via_parts, via_sum);
        // monotone
        if a & !b == 0 {
            let pa = propagate(&pq, a, d).unwrap();
            let pb = propagate(&pq, b, d).unwrap();
            prop_assert_eq!(pa & !pb, 0);
        }
    }

    #[test]
    fn fine_grid_comparison_implies_coarse(
        src in 0.0f64..1.0,
        dst in 0.0f64..1.0,
        spacing in 1e-3f64..0.3,
        shift_frac in 0.0f64..1.0,
        s_offset in 0usize..4,
        m0 in 1usize..5,
    ) {
        let shift = shift_frac * spacing;
        if preceq(src, dst, shift, spacing) {
            prop_assert!(preceq_weak(src, dst, shift, s_offset % m0, m0, spacing));
        }
    }
}
