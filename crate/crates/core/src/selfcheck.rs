//! Structural invariants every valid model must satisfy, and a seeded generator of
//! valid models from several families. Used by the property and acceptance suites.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog;
use crate::geometry::{curvature, killing_nabla, killing_nabla_via_lift};
use crate::isotropy::{decompose_irreducibles, fixed_subspace, form_invariance_residual, invariant_metric_space, sample_invariant_metric};
use crate::lie::{so_vector, LieAlgebra};
use crate::linalg::max_abs;
use crate::symmetry::{strongly_symmetric_check, symmetry_data};
use crate::tolerance::Tolerances;
use crate::{IsometryModel, Subspace};

/// `Err` carries a description of the violated invariant.
pub type Outcome = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e2s<T>(r: crate::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn jacobi(m: &IsometryModel, tol: &Tolerances) -> Outcome {
    let r = m.algebra().jacobi_residual_normalized();
    ensure!(r <= tol.jacobi, "Jacobi residual {r:e}");
    Ok(())
}

/// `Q N + N^T Q = 0` for `N = killing_nabla(Z)` at random `Z`.
pub fn killing_nabla_skew(m: &IsometryModel, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = m.metric();
    for _ in 0..3 {
        let z = DVector::from_fn(m.algebra_dim(), |_, _| rng.gen_range(-1.0..1.0));
        let n = e2s(killing_nabla(m, &z))?;
        let r = max_abs(&(q * &n + n.transpose() * q));
        ensure!(r <= 1e-10 * max_abs(q) * max_abs(&n).max(1.0), "Q N + N^T Q = {r:e}");
    }
    Ok(())
}

/// `killing_nabla` is unchanged when the lift of `ev` is shifted by `h`-valued terms.
pub fn lift_independence(m: &IsometryModel, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    let h = e2s(m.isotropy_subalgebra())?;
    let base = m.lift();
    let mut other = base.clone();
    if !h.is_zero() {
        other += h.matrix() * DMatrix::from_fn(h.dim(), m.tangent_dim(), |_, _| rng.gen_range(-2.0..2.0));
    }
    for _ in 0..3 {
        let z = DVector::from_fn(m.algebra_dim(), |_, _| rng.gen_range(-1.0..1.0));
        let a = e2s(killing_nabla_via_lift(m, &z, &base))?;
        let b = e2s(killing_nabla_via_lift(m, &z, &other))?;
        let d = max_abs(&(&a - &b));
        ensure!(d <= 1e-9 * max_abs(&a).max(1.0), "lift dependence {d:e}");
    }
    Ok(())
}

/// Antisymmetries, pair symmetry and both Bianchi identities.
pub fn curvature_symmetries(m: &IsometryModel) -> Outcome {
    let m = if m.complement().is_some() { m.clone() } else { e2s(m.clone().with_default_complement())? };
    let r = e2s(curvature(&m))?;
    let s = r.symmetry_residuals();
    ensure!(s.max() <= 1e-9 * r.max_abs_r().max(1.0), "curvature symmetries {s:?}");
    Ok(())
}

/// `g^q` closed, `k^q` in `h`, `ev` injective on `p^q`, `s_o` invariant, autoparallel and strongly symmetric.
pub fn symmetry_structure(m: &IsometryModel, tol: &Tolerances) -> Outcome {
    let rep = e2s(symmetry_data(m, None, tol))?;
    ensure!(!rep.rank_inconclusive, "rank decision inside the tolerance band");
    ensure!(rep.gq_closed, "g^q not closed ({:e})", rep.gq_residual);
    ensure!(rep.k_in_h, "k^q not in h ({:e})", rep.k_in_h_residual);
    ensure!(rep.ev_injective_on_p, "ev not injective on p^q");
    ensure!(rep.s_o_invariant, "s_o not isotropy invariant");
    ensure!(rep.s_o_autoparallel, "s_o not autoparallel ({:e})", rep.autoparallel_residual);
    ensure!(rep.index + rep.coindex == m.tangent_dim(), "index + coindex != dim M");
    let st = e2s(strongly_symmetric_check(m, &rep.s_o, tol))?;
    ensure!(st.holds && !st.inconclusive, "s_o not strongly symmetric ({st:?})");
    Ok(())
}

/// Blocks cover the tangent space, are Q-orthogonal, and the trivial ones span the fixed subspace.
pub fn isotropy_blocks(m: &IsometryModel, seed: u64) -> Outcome {
    let dec = e2s(decompose_irreducibles(m, seed))?;
    ensure!(dec.dims().iter().sum::<usize>() == m.tangent_dim(), "block dims {:?} do not cover", dec.dims());
    let fixed = e2s(fixed_subspace(m))?.dim();
    ensure!(fixed == dec.trivial_dim(), "fixed dim {fixed} vs trivial blocks {}", dec.trivial_dim());
    let q = m.metric();
    for (i, a) in dec.blocks.iter().enumerate() {
        for b in &dec.blocks[i + 1..] {
            let c = max_abs(&(a.subspace.matrix().transpose() * q * b.subspace.matrix()));
            ensure!(c <= 1e-8 * max_abs(q), "blocks not Q-orthogonal ({c:e})");
        }
    }
    Ok(())
}

/// Sampled invariant metrics are invariant.
pub fn sampled_metric_invariance(m: &IsometryModel, seed: u64) -> Outcome {
    let space = e2s(invariant_metric_space(m))?;
    let metric = e2s(sample_invariant_metric(&space, seed, 0.3))?;
    let r = e2s(form_invariance_residual(m, &metric))?;
    ensure!(r <= 1e-10, "sampled metric invariance residual {r:e}");
    Ok(())
}

/// Every check above, stopping at the first violation.
pub fn all(m: &IsometryModel, seed: u64, tol: &Tolerances) -> Outcome {
    let checks: [(&str, Outcome); 7] = [
        ("jacobi", jacobi(m, tol)),
        ("killing_nabla_skew", killing_nabla_skew(m, seed)),
        ("lift_independence", lift_independence(m, seed)),
        ("curvature_symmetries", curvature_symmetries(m)),
        ("symmetry_structure", symmetry_structure(m, tol)),
        ("isotropy_blocks", isotropy_blocks(m, seed)),
        ("sampled_metric_invariance", sampled_metric_invariance(m, seed)),
    ];
    for (name, r) in checks {
        r.map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a.transpose() * &a + DMatrix::identity(n, n) * 0.3
}

fn so5_coset(pairs: &[(usize, usize)], rng: &mut ChaCha8Rng) -> IsometryModel {
    let g = LieAlgebra::so(5).expect("so(5)");
    let h = Subspace::from_span(&DMatrix::from_columns(&pairs.iter().map(|&(i, j)| so_vector(5, i, j)).collect::<Vec<_>>()));
    let b = -g.killing_form();
    let m = h.complement_wrt(&b).matrix();
    let q = m.transpose() * &b * &m;
    let normal = IsometryModel::coset(&g, &h, &m, &q, "so(5) coset").expect("standard subalgebra");
    let space = invariant_metric_space(&normal).expect("isotropy of a standard subalgebra");
    let metric = sample_invariant_metric(&space, rng.gen(), 0.4).expect("spread 0.4 is small enough");
    normal.with_metric(&metric).expect("sampled metric is invariant")
}

/// A valid model drawn from one of eight structurally different families.
pub fn random_model(seed: u64) -> (String, IsometryModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = |alg: &LieAlgebra, q: &DMatrix<f64>| IsometryModel::left_invariant(alg, q).expect("positive definite metric");
    match rng.gen_range(0..8) {
        0 => {
            let q = random_spd(&mut rng, 3);
            ("su2 left-invariant".into(), left(&LieAlgebra::su2(), &q))
        }
        1 => {
            let q = random_spd(&mut rng, 6);
            ("so4 left-invariant".into(), left(&LieAlgebra::so(4).expect("so(4)"), &q))
        }
        2 => {
            let q = random_spd(&mut rng, 4);
            ("su2 + R left-invariant".into(), left(&LieAlgebra::direct_sum(&LieAlgebra::su2(), &LieAlgebra::abelian(1)), &q))
        }
        3 => {
            // [e1, e2] = e2, [e1, e3] = t e3
            let t: f64 = rng.gen_range(-2.0..2.0);
            let alg = LieAlgebra::from_triples(vec!["e1".into(), "e2".into(), "e3".into()], &[(0, 1, 1, 1.0), (0, 2, 2, t)])
                .expect("valid constants");
            let q = random_spd(&mut rng, 3);
            ("solvable left-invariant".into(), left(&alg, &q))
        }
        4 => {
            let l: f64 = rng.gen_range(1.1..4.0);
            let q = DMatrix::from_diagonal(&DVector::from_vec(vec![l, 1.0, 1.0]));
            let x1 = Subspace::from_span(&DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));
            ("Berger two-sided".into(), IsometryModel::two_sided(&LieAlgebra::su2(), &q, &x1).expect("Berger metric"))
        }
        5 => {
            let choices: [&[(usize, usize)]; 5] = [
                &[(0, 1)],
                &[(0, 1), (0, 2), (1, 2)],
                &[(0, 1), (2, 3)],
                &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
                &[(0, 1), (0, 2), (1, 2), (3, 4)],
            ];
            let pairs = choices[rng.gen_range(0..choices.len())];
            (format!("so5 coset {pairs:?}"), so5_coset(pairs, &mut rng))
        }
        6 => loop {
            let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let lambda = rng.gen_range(0.5..2.0);
            if catalog::su2_cubed_determinant(v[0], v[1], v[2], v[3]).abs() > 0.1 {
                let m = catalog::su2_cubed_model(v[0], v[1], v[2], v[3], lambda).expect("determinant checked");
                return ("su2^3/diag".into(), m);
            }
        },
        _ => {
            let a = random_spd(&mut rng, 3);
            let b = random_spd(&mut rng, 3);
            let m = IsometryModel::product(&left(&LieAlgebra::su2(), &a), &left(&LieAlgebra::su2(), &b)).expect("product");
            ("su2 x su2 product".into(), m)
        }
    }
}

/// Every catalog case at its default parameters.
pub fn catalog_models() -> Vec<(String, IsometryModel)> {
    catalog::list()
        .into_iter()
        .map(|c| (c.id.to_string(), catalog::build_default(c.id).expect("defaults are in domain").model))
        .collect()
}
