//! Finite-difference oracle against the algebraic covariant derivative of Killing fields.

use coindex_core::catalog::su2_left_invariant;
use coindex_core::geometry::oracle::{fd_oracle, fd_oracle_with, MatrixRealization, DEFAULT_STEP};
use coindex_core::geometry::BracketConvention;

#[test]
fn su2_metrics_agree() {
    let r = MatrixRealization::su2();
    for (l, m, n) in [(1.0, 1.0, 1.0), (3.0, 2.0, 1.0), (2.0, 1.0, 1.0), (1.0, 1.0, 0.5)] {
        let model = su2_left_invariant(l, m, n).unwrap();
        let rep = fd_oracle(&model, &r, DEFAULT_STEP).unwrap();
        assert!(rep.passed && rep.max_deviation <= 1e-5, "({l},{m},{n}): {rep:?}");
    }
}

#[test]
fn flipped_bracket_is_caught() {
    let r = MatrixRealization::su2();
    for (l, m, n) in [(3.0, 2.0, 1.0), (2.0, 1.0, 1.0)] {
        let model = su2_left_invariant(l, m, n).unwrap();
        let rep = fd_oracle_with(&model, &r, DEFAULT_STEP, BracketConvention::Flipped).unwrap();
        assert!(!rep.passed && rep.max_deviation > 1e-2, "({l},{m},{n}): {rep:?}");
    }
}
