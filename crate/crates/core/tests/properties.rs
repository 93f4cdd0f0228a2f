//! Randomized invariants: parser round trips, operator closure, partition
//! soundness, degree coherence, and the lexicographic reduction axioms.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use dpl_core::equivalence::dynamic_equivalence;
use dpl_core::formula::{self, Formula};
use dpl_core::harness::{random_formula, random_model, random_propositional};
use dpl_core::postulates::{check_schema, SchemaId};
use dpl_core::semantics::{self, valid_in_model};
use dpl_core::DynamicModel;

fn atoms() -> Vec<String> {
    vec!["p".to_string(), "q".to_string()]
}

fn ops() -> Vec<String> {
    vec!["rev".to_string(), "ctr".to_string(), "id".to_string()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_render_round_trip(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let f = random_formula(&atoms(), &ops(), depth, &mut rng);
        let text = formula::render(&f);
        prop_assert_eq!(formula::parse(&text).unwrap(), f);
    }

    #[test]
    fn operators_preserve_carrier_and_valuation(
        seed in any::<u64>(),
        n in 1usize..6,
        op_idx in 0usize..3,
    ) {
        let m = random_model(n, &atoms(), seed).unwrap();
        let op = &ops()[op_idx];
        let d = DynamicModel::new(m.clone(), op.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e3779b9);
        let phi = random_propositional(&atoms(), 3, &mut rng);
        let out = d.step(&phi).unwrap().base;
        prop_assert!(out.validate().is_empty());
        prop_assert_eq!(out.worlds(), m.worlds());
        for a in m.atoms() {
            prop_assert_eq!(out.atom_extension(a).unwrap(), m.atom_extension(a).unwrap());
        }
        // Contraction always yields a total preorder; revision preserves
        // totality.
        if op == "ctr" || (op == "rev" && m.is_total()) {
            prop_assert!(out.is_total());
        }
    }

    #[test]
    fn partition_separators_define_their_blocks(seed in any::<u64>(), n in 1usize..5) {
        let m = random_model(n, &atoms(), seed).unwrap();
        let d = DynamicModel::new(m.clone(), "rev");
        let partition = dynamic_equivalence(&d).unwrap();
        let mut covered = BTreeSet::new();
        for (block, sep) in partition.blocks.iter().zip(&partition.separators) {
            for w in 0..m.n() {
                let holds = semantics::satisfies(&d, m.world_name(w), sep).unwrap();
                prop_assert_eq!(holds, block.contains(w));
            }
            for w in block.iter() {
                prop_assert!(covered.insert(w));
            }
        }
        prop_assert_eq!(covered.len(), m.n());
    }

    #[test]
    fn mu_picks_exactly_the_minimal_worlds(seed in any::<u64>(), n in 1usize..6) {
        let m = random_model(n, &atoms(), seed).unwrap();
        let d = DynamicModel::new(m.clone(), "id");
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x517cc1b7);
        let phi = random_propositional(&atoms(), 3, &mut rng);
        let ext = m.extension(&phi).unwrap();
        let minima = m.min_worlds(ext);
        let mu = formula::mu(phi);
        for w in 0..m.n() {
            let holds = semantics::satisfies(&d, m.world_name(w), &mu).unwrap();
            prop_assert_eq!(holds, minima.contains(w));
        }
    }

    #[test]
    fn lexicographic_reduction_axioms_hold(seed in any::<u64>(), n in 1usize..5) {
        let m = random_model(n, &atoms(), seed).unwrap();
        let d = DynamicModel::new(m, "rev");
        prop_assert!(check_schema(&d, SchemaId::LexRevReduction, None).unwrap().holds());
    }

    #[test]
    fn dynamic_argument_must_be_propositional(seed in any::<u64>()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let body = random_formula(&atoms(), &ops(), 3, &mut rng);
        let bad = Formula::box_leq(Formula::atom("p"));
        prop_assert!(Formula::dynamic("rev", bad, body).is_err());
    }

    #[test]
    fn validity_is_stable_under_reachable_necessitation(seed in any::<u64>()) {
        // A formula valid on every reachable model stays valid under any
        // dynamic prefix.
        let m = random_model(3, &atoms(), seed).unwrap();
        let d = DynamicModel::new(m, "rev");
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x2545f491);
        let xi = random_formula(&atoms(), &ops(), 2, &mut rng);
        let phi = random_propositional(&atoms(), 2, &mut rng);
        let everywhere = semantics::reachable_models(&d)
            .unwrap()
            .into_iter()
            .all(|r| valid_in_model(&d.rebase(r), &xi).unwrap().0);
        if everywhere {
            let boxed = Formula::dynamic("rev", phi, xi).unwrap();
            prop_assert!(valid_in_model(&d, &boxed).unwrap().0);
        }
    }
}
