//! Named spaces with parameter validation and expected invariants.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lie::{so_pairs, so_vector, LieAlgebra};
use crate::linalg::Subspace;
use crate::model::{Expectations, IsometryModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictSource {
    /// The expectations are reproduced by computation.
    Computed,
    /// The verdict rests on a theorem; computation supplies consistency evidence only.
    PaperTheorem,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub domain: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseInfo {
    pub id: &'static str,
    pub summary: &'static str,
    pub params: Vec<ParamSpec>,
    /// Built on a left-invariant group model, so the finite-difference oracle applies.
    pub group_case: bool,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub title: String,
    pub params: BTreeMap<String, f64>,
    pub model: IsometryModel,
    pub expectations: Expectations,
    pub verdict_source: VerdictSource,
    pub notes: Vec<String>,
}

pub type Params = BTreeMap<String, f64>;

const P_POS: &str = "> 0";

fn p(name: &'static str, default: f64, domain: &'static str) -> ParamSpec {
    ParamSpec { name, default, domain }
}

fn su2_params(suffix: &'static [&'static str; 3], d: [f64; 3]) -> Vec<ParamSpec> {
    vec![p(suffix[0], d[0], "lambda >= mu >= nu > 0"), p(suffix[1], d[1], P_POS), p(suffix[2], d[2], P_POS)]
}

/// Every case id with its parameters, sorted by id.
pub fn list() -> Vec<CaseInfo> {
    let mut v = vec![
        CaseInfo {
            id: "so3-cubed",
            summary: "bi-invariant SO(3) x SU(2)_{l2,m2,n2} x SU(2)_{l3,m3,n3}; index 5, co-index 4",
            params: [
                su2_params(&["lambda2", "mu2", "nu2"], [3.0, 2.0, 1.0]),
                su2_params(&["lambda3", "mu3", "nu3"], [1.0, 1.0, 0.5]),
            ]
            .concat(),
            group_case: false,
        },
        CaseInfo {
            id: "so4-product",
            summary: "SU(2)_{l,m,n} x SU(2)_{l2,m2,n2} with two co-index 2 factors; co-index 4",
            params: [
                su2_params(&["lambda", "mu", "nu"], [3.0, 2.0, 1.0]),
                su2_params(&["lambda2", "mu2", "nu2"], [2.0, 1.0, 1.0]),
            ]
            .concat(),
            group_case: false,
        },
        CaseInfo {
            id: "so5-so2",
            summary: "SO(5)/SO(2) with the circle E12 + weight * E34; invariant-metric sampling harness",
            params: vec![p("weight", 0.0, "any real")],
            group_case: false,
        },
        CaseInfo {
            id: "so5-so2so2",
            summary: "SO(5) > SO(4) > SO(2)xSO(2) double symmetric pair; leaf S^2 x S^2, co-index 4",
            params: vec![],
            group_case: false,
        },
        CaseInfo {
            id: "so5-so3",
            summary: "SO(5) > SO(4) > SO(3) double symmetric pair; leaf S^3, co-index 4",
            params: vec![],
            group_case: false,
        },
        CaseInfo {
            id: "so5-so3so2",
            summary: "SO(5)/(SO(3)xSO(2)) with its unique invariant metric (symmetric)",
            params: vec![],
            group_case: false,
        },
        CaseInfo {
            id: "so5-so4",
            summary: "SO(5)/SO(4) = S^4, isotropy irreducible (symmetric)",
            params: vec![],
            group_case: false,
        },
        CaseInfo {
            id: "su2",
            summary: "left-invariant metric M(lambda, mu, nu) on SU(2), with Berger or bi-invariant extra isometries",
            params: su2_params(&["lambda", "mu", "nu"], [3.0, 2.0, 1.0]),
            group_case: true,
        },
        CaseInfo {
            id: "su2-cubed-diag",
            summary: "SU(2)^3 / diagonal SU(2) with the naturally reductive metric of parameters a, b, c, d, lambda",
            params: vec![
                p("a", 2.0, "(a-1)(d-1) - (b-1)(c-1) != 0"),
                p("b", 3.0, "any real"),
                p("c", 5.0, "any real"),
                p("d", 7.0, "any real"),
                p("lambda", 2.0, P_POS),
            ],
            group_case: false,
        },
    ];
    v.sort_by_key(|c| c.id);
    v
}

pub fn info(id: &str) -> Result<CaseInfo> {
    list().into_iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCase(id.into()))
}

/// Fills in defaults and rejects unknown parameter names.
pub fn resolve_params(id: &str, given: &Params) -> Result<Params> {
    let info = info(id)?;
    for k in given.keys() {
        if !info.params.iter().any(|p| p.name == k) {
            let names: Vec<_> = info.params.iter().map(|p| p.name).collect();
            return Err(invalid(format!("case `{id}` has no parameter `{k}` (parameters: {names:?})")));
        }
    }
    let mut out = Params::new();
    for ps in &info.params {
        let v = given.get(ps.name).copied().unwrap_or(ps.default);
        if !v.is_finite() {
            return Err(invalid(format!("parameter `{}` must be finite", ps.name)));
        }
        out.insert(ps.name.to_string(), v);
    }
    Ok(out)
}

/// Builds a case by id.
pub fn build(id: &str, given: &Params) -> Result<CatalogEntry> {
    let params = resolve_params(id, given)?;
    let g = |k: &str| params[k];
    let mut entry = match id {
        "su2" => entry_su2(g("lambda"), g("mu"), g("nu"))?,
        "so5-so3" => entry_so5_so3_double_pair()?,
        "so5-so2so2" => entry_so5_so2so2_double_pair()?,
        "su2-cubed-diag" => entry_su2_cubed_diag(g("a"), g("b"), g("c"), g("d"), g("lambda"))?,
        "so4-product" => entry_product([g("lambda"), g("mu"), g("nu")], [g("lambda2"), g("mu2"), g("nu2")])?,
        "so3-cubed" => entry_so3_cubed([g("lambda2"), g("mu2"), g("nu2")], [g("lambda3"), g("mu3"), g("nu3")])?,
        "so5-so3so2" => entry_so5_so3so2()?,
        "so5-so4" => entry_so5_so4()?,
        "so5-so2" => entry_so5_so2(g("weight"))?,
        other => return Err(Error::UnknownCase(other.into())),
    };
    entry.params = params;
    Ok(entry)
}

pub fn build_default(id: &str) -> Result<CatalogEntry> {
    build(id, &Params::new())
}

/// Which of the co-index 2 families (up to scale) a diagonal metric belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Su2Family {
    Round,
    /// `M(lambda, 1, 1)`, `lambda > 1`.
    BergerOblate,
    /// `M(1, 1, nu)`, `nu < 1`.
    BergerProlate,
    /// `M(lambda, lambda - 1, 1)`, `lambda > 2`.
    Milnor,
    Generic,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

pub fn su2_family(l: f64, m: f64, n: f64) -> Result<Su2Family> {
    if !(l >= m && m >= n && n > 0.0) {
        return Err(invalid(format!("su2 parameters need lambda >= mu >= nu > 0, got ({l}, {m}, {n})")));
    }
    Ok(match (close(l, m), close(m, n)) {
        (true, true) => Su2Family::Round,
        (false, true) => Su2Family::BergerOblate,
        (true, false) => Su2Family::BergerProlate,
        _ if close(l, m + n) => Su2Family::Milnor,
        _ => Su2Family::Generic,
    })
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_row_slice(v))
}

fn axis(i: usize) -> Subspace {
    let mut e = DVector::zeros(3);
    e[i] = 1.0;
    Subspace::from_span(&DMatrix::from_columns(&[e]))
}

/// Plain left-invariant model `M(lambda, mu, nu)` (no extra isometries).
pub fn su2_left_invariant(l: f64, m: f64, n: f64) -> Result<IsometryModel> {
    su2_family(l, m, n)?;
    Ok(IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&[l, m, n]))?
        .with_description(format!("SU(2)_{{{l},{m},{n}}} left-invariant")))
}

fn su2_model(l: f64, m: f64, n: f64) -> Result<(IsometryModel, Su2Family)> {
    let fam = su2_family(l, m, n)?;
    let q = diag(&[l, m, n]);
    let alg = LieAlgebra::su2();
    let model = match fam {
        Su2Family::Round => IsometryModel::two_sided(&alg, &q, &Subspace::full(3))?,
        Su2Family::BergerOblate => IsometryModel::two_sided(&alg, &q, &axis(0))?,
        Su2Family::BergerProlate => IsometryModel::two_sided(&alg, &q, &axis(2))?,
        _ => IsometryModel::left_invariant(&alg, &q)?,
    };
    Ok((model.with_description(format!("SU(2)_{{{l},{m},{n}}}")), fam))
}

fn su2_index(fam: Su2Family) -> Option<usize> {
    match fam {
        Su2Family::Round => Some(3),
        Su2Family::Generic => None,
        _ => Some(1),
    }
}

pub fn entry_su2(l: f64, m: f64, n: f64) -> Result<CatalogEntry> {
    let (model, fam) = su2_model(l, m, n)?;
    let index = su2_index(fam);
    let source = match fam {
        Su2Family::Round => "round sphere: bi-invariant metric, symmetric",
        Su2Family::BergerOblate => "co-index 2 family M(lambda, 1, 1), lambda > 1 (Berger sphere)",
        Su2Family::BergerProlate => "co-index 2 family M(1, 1, nu), 0 < nu < 1 (Berger sphere)",
        Su2Family::Milnor => "co-index 2 family M(lambda, lambda - 1, 1), lambda > 2",
        Su2Family::Generic => "outside the co-index 2 families; no expectation",
    };
    let mut notes = vec![];
    match fam {
        Su2Family::BergerOblate => notes.push("extra right isometries along the circle through X1".into()),
        Su2Family::BergerProlate => notes.push("extra right isometries along the circle through X3".into()),
        Su2Family::Round => notes.push("Killing algebra su(2) + su(2) acting on both sides".into()),
        _ => {}
    }
    Ok(CatalogEntry {
        id: "su2".into(),
        title: format!("SU(2)_{{{l},{m},{n}}}"),
        params: Params::new(),
        expectations: Expectations {
            expected_index: index,
            expected_coindex: index.map(|i| 3 - i),
            expect_locally_symmetric: match fam {
                Su2Family::Round => Some(true),
                Su2Family::Generic => None,
                _ => Some(false),
            },
            leaf_description: match fam {
                Su2Family::Round => "S^3".into(),
                Su2Family::Generic => String::new(),
                _ => "line (flat)".into(),
            },
            source: source.into(),
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::Computed,
        notes,
    })
}

fn so5_span(pairs: &[(usize, usize)]) -> Subspace {
    Subspace::from_span(&DMatrix::from_columns(&pairs.iter().map(|&(i, j)| so_vector(5, i, j)).collect::<Vec<_>>()))
}

/// `so(3)` on the first three coordinates of `R^5`; it annihilates `e4`, `e5`.
pub fn so3_block() -> Subspace {
    so5_span(&[(0, 1), (0, 2), (1, 2)])
}

pub fn so4_block() -> Subspace {
    so5_span(&so_pairs(4))
}

pub fn entry_so5_so3_double_pair() -> Result<CatalogEntry> {
    let g = LieAlgebra::so(5)?;
    let model = IsometryModel::double_symmetric_pair(&g, &so4_block(), &so3_block(), None)?
        .with_description("SO(5) > SO(4) > SO(3), metric doubled on p'");
    Ok(CatalogEntry {
        id: "so5-so3".into(),
        title: "SO(5)/SO(3)".into(),
        params: Params::new(),
        expectations: Expectations {
            expected_index: Some(3),
            expected_coindex: Some(4),
            expect_locally_symmetric: Some(false),
            leaf_description: "S^3 = SO(4)/SO(3), constant curvature".into(),
            source: "double symmetric pair SO(5) > SO(4) > SO(3)".into(),
            transitive_summand: Some(Subspace::full(10)),
            expected_isotropy_blocks: Some(vec![3, 3, 1]),
            expected_fixed_dim: Some(1),
            expected_leaf_blocks: Some(vec![3]),
            expect_leaf_generator_equal: true,
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::Computed,
        notes: vec!["isotropy decomposes as two copies of the adjoint representation of so(3) plus a fixed line".into()],
    })
}

pub fn entry_so5_so2so2_double_pair() -> Result<CatalogEntry> {
    let g = LieAlgebra::so(5)?;
    let model = IsometryModel::double_symmetric_pair(&g, &so4_block(), &so5_span(&[(0, 1), (2, 3)]), None)?
        .with_description("SO(5) > SO(4) > SO(2)xSO(2), metric doubled on p'");
    Ok(CatalogEntry {
        id: "so5-so2so2".into(),
        title: "SO(5)/(SO(2)xSO(2))".into(),
        params: Params::new(),
        expectations: Expectations {
            expected_index: Some(4),
            expected_coindex: Some(4),
            expect_locally_symmetric: Some(false),
            leaf_description: "G2+(R^4) = S^2 x S^2, equal curvatures".into(),
            source: "double symmetric pair SO(5) > SO(4) > SO(2) x SO(2)".into(),
            transitive_summand: Some(Subspace::full(10)),
            expected_leaf_blocks: Some(vec![2, 2]),
            expect_leaf_equal_curvatures: Some(true),
            expect_leaf_generator_equal: true,
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::Computed,
        notes: vec![],
    })
}

/// `(a-1)(d-1) - (b-1)(c-1)`, nonzero exactly when `h + m1 + m2` is all of `su(2)^3`.
pub fn su2_cubed_determinant(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (a - 1.0) * (d - 1.0) - (b - 1.0) * (c - 1.0)
}

pub fn su2_cubed_model(a: f64, b: f64, c: f64, d: f64, lambda: f64) -> Result<IsometryModel> {
    let det = su2_cubed_determinant(a, b, c, d);
    if det.abs() <= 1e-8 {
        return Err(invalid(format!("need (a-1)(d-1) - (b-1)(c-1) != 0, got {det:.3e}")));
    }
    if !(lambda > 0.0) {
        return Err(invalid("lambda must be positive"));
    }
    let su2 = LieAlgebra::su2();
    let g = LieAlgebra::direct_sum(&LieAlgebra::direct_sum(&su2, &su2), &su2);
    let triple = |i: usize, w: [f64; 3]| {
        let mut v = DVector::zeros(9);
        for (k, wk) in w.iter().enumerate() {
            v[3 * k + i] = *wk;
        }
        v
    };
    let h = Subspace::from_span(&DMatrix::from_columns(&(0..3).map(|i| triple(i, [1.0, 1.0, 1.0])).collect::<Vec<_>>()));
    let mut cols = Vec::new();
    for i in 0..3 {
        cols.push(triple(i, [1.0, a, b]));
    }
    for i in 0..3 {
        cols.push(triple(i, [1.0, c, d]));
    }
    let m = DMatrix::from_columns(&cols);
    // -1/2 tr(X1 X2) = |x|^2 / 4 in the basis X_i; the second summand is scaled by 1/lambda^2
    let mut q = DMatrix::zeros(6, 6);
    for i in 0..3 {
        q[(i, i)] = 0.25;
        q[(i + 3, i + 3)] = 0.25 / (lambda * lambda);
    }
    Ok(IsometryModel::coset(&g, &h, &m, &q, "SU(2)^3 / diagonal SU(2)")?
        .with_description(format!("SU(2)^3/diag at a={a}, b={b}, c={c}, d={d}, lambda={lambda}")))
}

pub fn entry_su2_cubed_diag(a: f64, b: f64, c: f64, d: f64, lambda: f64) -> Result<CatalogEntry> {
    let model = su2_cubed_model(a, b, c, d, lambda)?;
    Ok(CatalogEntry {
        id: "su2-cubed-diag".into(),
        title: "SU(2)^3/diag SU(2)".into(),
        params: Params::new(),
        expectations: Expectations {
            expected_index: Some(2),
            expected_coindex: Some(4),
            expect_locally_symmetric: Some(false),
            expect_naturally_reductive: Some(true),
            expected_fixed_dim: Some(2),
            leaf_description: "2-dimensional".into(),
            source: "naturally reductive SU(2)^3/diag family, generic parameters".into(),
            transitive_summand: Some(Subspace::full(9)),
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::Computed,
        notes: vec![format!("determinant condition (a-1)(d-1) - (b-1)(c-1) = {}", su2_cubed_determinant(a, b, c, d))],
    })
}

fn coindex_two_factor(spec: [f64; 3]) -> Result<(IsometryModel, usize)> {
    let (model, fam) = su2_model(spec[0], spec[1], spec[2])?;
    match fam {
        Su2Family::Round | Su2Family::Generic => Err(invalid(format!(
            "factor {spec:?} is not in a co-index 2 family (lambda = mu + nu, mu = nu < lambda, or lambda = mu > nu)"
        ))),
        _ => Ok((model, 1)),
    }
}

/// Subspace spanned by the given coordinate indices.
fn coordinate_span(dim: usize, idx: impl IntoIterator<Item = usize>) -> Subspace {
    let cols: Vec<DVector<f64>> = idx
        .into_iter()
        .map(|i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            e
        })
        .collect();
    Subspace::from_span(&DMatrix::from_columns(&cols))
}

pub fn entry_product(first: [f64; 3], second: [f64; 3]) -> Result<CatalogEntry> {
    let (m1, i1) = coindex_two_factor(first)?;
    let (m2, i2) = coindex_two_factor(second)?;
    let g1 = m1.algebra_dim();
    let model = IsometryModel::product(&m1, &m2)?;
    let total = model.algebra_dim();
    let index = i1 + i2;
    Ok(CatalogEntry {
        id: "so4-product".into(),
        title: format!("SU(2)_{{{},{},{}}} x SU(2)_{{{},{},{}}}", first[0], first[1], first[2], second[0], second[1], second[2]),
        params: Params::new(),
        expectations: Expectations {
            expected_index: Some(index),
            expected_coindex: Some(6 - index),
            expect_locally_symmetric: Some(false),
            leaf_description: "product of the factor leaves (flat 2-torus directions)".into(),
            source: "products of two co-index 2 left-invariant metrics on SU(2)".into(),
            transitive_summand: Some(coordinate_span(total, (0..3).chain(g1..g1 + 3))),
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::Computed,
        notes: vec!["Riemannian product without a symmetric de Rham factor".into()],
    })
}

pub fn entry_so3_cubed(second: [f64; 3], third: [f64; 3]) -> Result<CatalogEntry> {
    let so3 = LieAlgebra::so(3)?;
    let bi = IsometryModel::two_sided(&so3, &DMatrix::identity(3, 3), &Subspace::full(3))?
        .with_description("bi-invariant SO(3)");
    let (m2, i2) = coindex_two_factor(second)?;
    let (m3, i3) = coindex_two_factor(third)?;
    let rest = IsometryModel::product(&m2, &m3)?;
    let model = IsometryModel::product(&bi, &rest)?.with_description("bi-invariant SO(3) x co-index 4 product");
    let index = 3 + i2 + i3;
    Ok(CatalogEntry {
        id: "so3-cubed".into(),
        title: "SO(3)^3".into(),
        params: Params::new(),
        expectations: Expectations {
            expected_index: Some(index),
            expected_coindex: Some(9 - index),
            expect_locally_symmetric: Some(false),
            leaf_description: "S^3 (symmetric factor) x flat directions of the other factors".into(),
            source: "product of the bi-invariant metric on SO(3) with a co-index 4 product".into(),
            skip_dim_bound: true,
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::Computed,
        notes: vec!["splits off a symmetric de Rham factor, so the dimension bound does not apply; the check is skipped".into()],
    })
}

fn normal_coset(h: &Subspace, description: &str) -> Result<IsometryModel> {
    let g = LieAlgebra::so(5)?;
    let b = -g.killing_form();
    let m = h.complement_wrt(&b).matrix();
    let q = m.transpose() * &b * &m;
    IsometryModel::coset(&g, h, &m, &q, description)
}

pub fn entry_so5_so3so2() -> Result<CatalogEntry> {
    let h = so5_span(&[(0, 1), (0, 2), (1, 2), (3, 4)]);
    let model = normal_coset(&h, "SO(5)/(SO(3)xSO(2)), -Killing metric")?;
    Ok(CatalogEntry {
        id: "so5-so3so2".into(),
        title: "SO(5)/(SO(3)xSO(2))".into(),
        params: Params::new(),
        expectations: Expectations {
            expected_index: Some(6),
            expected_coindex: Some(0),
            expect_locally_symmetric: Some(true),
            expected_invariant_metric_dim: Some(1),
            leaf_description: "whole space (oriented real Grassmannian of 2-planes in R^5)".into(),
            source: "no invariant metric of co-index 4 (theorem); unique invariant metric is symmetric".into(),
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::PaperTheorem,
        notes: vec!["evidence only: the invariant metric is unique up to scale and symmetric".into()],
    })
}

pub fn entry_so5_so4() -> Result<CatalogEntry> {
    let model = normal_coset(&so4_block(), "SO(5)/SO(4) = S^4, -Killing metric")?;
    Ok(CatalogEntry {
        id: "so5-so4".into(),
        title: "SO(5)/SO(4)".into(),
        params: Params::new(),
        expectations: Expectations {
            expected_index: Some(4),
            expected_coindex: Some(0),
            expect_locally_symmetric: Some(true),
            expected_isotropy_blocks: Some(vec![4]),
            expected_invariant_metric_dim: Some(1),
            leaf_description: "whole space (round S^4)".into(),
            source: "isotropy irreducible; the only invariant metric on S^4 is the round one up to scale".into(),
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::PaperTheorem,
        notes: vec!["SO(5)/SO(4) is the 4-sphere S^4".into()],
    })
}

/// `so(5)/so(2)` for the circle generated by `E12 + weight * E34`.
pub fn so5_so2_model(weight: f64) -> Result<IsometryModel> {
    let z = so_vector(5, 0, 1) + so_vector(5, 2, 3) * weight;
    let h = Subspace::from_span(&DMatrix::from_columns(&[z]));
    normal_coset(&h, &format!("SO(5)/SO(2), circle E12 + {weight} E34, -Killing metric"))
}

pub fn entry_so5_so2(weight: f64) -> Result<CatalogEntry> {
    let model = so5_so2_model(weight)?;
    Ok(CatalogEntry {
        id: "so5-so2".into(),
        title: "SO(5)/SO(2)".into(),
        params: Params::new(),
        expectations: Expectations {
            leaf_description: "sampled: no invariant metric with co-index 4 expected".into(),
            source: "no invariant metric of co-index 4 for any circle (theorem); sampling gives evidence only".into(),
            ..Default::default()
        },
        model,
        verdict_source: VerdictSource::PaperTheorem,
        notes: vec![
            "sampling covers only the supplied circle (E12 + weight * E34), never all circles in SO(5); evidence is partial".into(),
        ],
    })
}
