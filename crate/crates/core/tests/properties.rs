//! Invariants that hold for every valid model: catalog cases and 50 random models per property.

use coindex_core::selfcheck::{self, random_model};
use coindex_core::Tolerances;
use proptest::prelude::*;

#[test]
fn catalog_cases_satisfy_all_properties() {
    for (id, m) in selfcheck::catalog_models() {
        if let Err(e) = selfcheck::all(&m, 7, &Tolerances::default()) {
            panic!("{id}: {e}");
        }
    }
}

fn holds(name: &str, r: selfcheck::Outcome) -> Result<(), TestCaseError> {
    r.map_err(|e| TestCaseError::fail(format!("{name}: {e}")))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn jacobi_holds(seed in any::<u64>()) {
        let (name, m) = random_model(seed);
        holds(&name, selfcheck::jacobi(&m, &Tolerances::default()))?;
    }

    #[test]
    fn killing_nabla_is_q_skew(seed in any::<u64>()) {
        let (name, m) = random_model(seed);
        holds(&name, selfcheck::killing_nabla_skew(&m, seed))?;
    }

    #[test]
    fn killing_nabla_ignores_the_lift(seed in any::<u64>()) {
        let (name, m) = random_model(seed);
        holds(&name, selfcheck::lift_independence(&m, seed))?;
    }

    #[test]
    fn curvature_has_its_symmetries(seed in any::<u64>()) {
        let (name, m) = random_model(seed);
        holds(&name, selfcheck::curvature_symmetries(&m))?;
    }

    #[test]
    fn symmetry_structure_is_consistent(seed in any::<u64>()) {
        let (name, m) = random_model(seed);
        holds(&name, selfcheck::symmetry_structure(&m, &Tolerances::default()))?;
    }

    #[test]
    fn isotropy_blocks_are_orthogonal(seed in any::<u64>()) {
        let (name, m) = random_model(seed);
        holds(&name, selfcheck::isotropy_blocks(&m, seed))?;
    }

    #[test]
    fn sampled_metrics_are_invariant(seed in any::<u64>()) {
        let (name, m) = random_model(seed);
        holds(&name, selfcheck::sampled_metric_invariance(&m, seed))?;
    }
}

#[test]
fn generator_covers_every_family() {
    let mut kinds: Vec<String> = (0..200).map(|s| random_model(s).0.split(" [").next().unwrap().to_string()).collect();
    kinds.sort();
    kinds.dedup();
    assert_eq!(kinds.len(), 8, "{kinds:?}");
}
