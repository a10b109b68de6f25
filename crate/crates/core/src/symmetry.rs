//! Transvections, index and co-index of symmetry, the leaf of symmetry, and related checks.
//!
//! All invariants are relative to the Killing algebra supplied with the model.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    self, curvature, is_autoparallel, isotropy_invariance_residual, killing_nabla_lifted, BracketConvention,
    CurvatureTensor,
};
use crate::isotropy::decompose_skew;
use crate::linalg::{cholesky_lower, max_abs, rank_and_kernel, Subspace};
use crate::model::{Expectations, IsometryModel};
use crate::tolerance::{classify, Band, Tolerances};

/// Default seed for every randomized step.
pub const DEFAULT_SEED: u64 = 0x5EED;
/// Sampling limits for the symmetry ideal.
pub const IDEAL_MAX_SAMPLES: usize = 200;
pub const IDEAL_STABLE_RUN: usize = 10;
const MAX_FACTORS: usize = 4;

pub const RELATIVE_LABEL: &str = "relative to supplied isometry algebra";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Inconclusive,
    Failed,
}

impl Status {
    /// Worst of two statuses: failed beats inconclusive beats verified.
    pub fn combine(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Verified
        } else {
            Status::Failed
        }
    }
}

/// One expectation compared against a computed value.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub status: Status,
}

impl Check {
    pub fn new(name: &str, expected: impl ToString, observed: impl ToString, status: Status) -> Self {
        Self { name: name.into(), expected: expected.to_string(), observed: observed.to_string(), status }
    }
}

/// The stacked map `Z -> vec(killing_nabla(Z))` (`n^2 x dim g`).
pub fn killing_nabla_map(model: &IsometryModel) -> DMatrix<f64> {
    let n = model.tangent_dim();
    let g = model.algebra_dim();
    let lift = model.lift();
    let mut m = DMatrix::zeros(n * n, g);
    for z in 0..g {
        let mut e = DVector::zeros(g);
        e[z] = 1.0;
        let nz = killing_nabla_lifted(model, &e, &lift, BracketConvention::LeftAction);
        m.set_column(z, &DVector::from_column_slice(nz.as_slice()));
    }
    m
}

#[derive(Debug, Clone, Serialize)]
pub struct CartanSubspace {
    pub p: Subspace,
    /// Singular values of the stacked map, descending.
    pub singular_values: Vec<f64>,
    pub inconclusive: bool,
}

/// Transvections at the base point: the kernel of `Z -> (nabla Z*)_o`.
pub fn cartan_subspace(model: &IsometryModel, tau_rank: f64) -> CartanSubspace {
    let d = rank_and_kernel(&killing_nabla_map(model), tau_rank);
    CartanSubspace { p: d.kernel, singular_values: d.singular_values, inconclusive: d.inconclusive }
}

/// `k = span [p, p]`.
pub fn symmetric_isotropy_algebra(model: &IsometryModel, p: &Subspace) -> Result<Subspace> {
    model.algebra().bracket_span(p, p)
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafBlock {
    pub dim: usize,
    /// Constant sectional curvature of the block, if it has one.
    pub curvature: Option<f64>,
    pub constant: bool,
    /// Max deviation from the constant-curvature tensor, relative to `1 + |kappa|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafData {
    pub dim: usize,
    /// Blocks in decreasing dimension; flat directions are collected into one block of curvature 0.
    pub curvature_profile: Vec<LeafBlock>,
    pub splits_as_product: bool,
    /// How far curvature operators of `s_o` leave `s_o` (zero for a totally geodesic leaf).
    pub invariance_residual: f64,
}

impl LeafData {
    fn empty() -> Self {
        Self { dim: 0, curvature_profile: vec![], splits_as_product: false, invariance_residual: 0.0 }
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.curvature_profile.iter().map(|b| b.dim).collect()
    }
}

/// Q-orthonormal basis (columns) of a subspace of the tangent space.
fn q_orthonormal(q: &DMatrix<f64>, s: &Subspace) -> Result<DMatrix<f64>> {
    let b = s.matrix();
    let g = b.transpose() * q * &b;
    let c = cholesky_lower(&g)?;
    let c_inv_t = c.try_inverse().ok_or_else(|| invalid("degenerate subspace"))?.transpose();
    Ok(b * c_inv_t)
}

/// Curvature profile of the leaf through `o` tangent to `s`.
pub fn leaf_data(model: &IsometryModel, s: &Subspace, tau_curv: f64) -> Result<LeafData> {
    let c = curvature(&complete(model)?)?;
    leaf_from(model, &c, s, tau_curv)
}

fn leaf_from(model: &IsometryModel, c: &CurvatureTensor, s: &Subspace, tau_curv: f64) -> Result<LeafData> {
    let d = s.dim();
    if d == 0 {
        return Ok(LeafData::empty());
    }
    let n = model.tangent_dim();
    let q = model.metric();
    let w = q_orthonormal(q, s)?;
    let coords = w.transpose() * q;
    let r_of = |a: usize, b: usize| {
        let mut m = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                let f = w[(x, a)] * w[(y, b)];
                if f != 0.0 {
                    m += c.endomorphism(x, y) * f;
                }
            }
        }
        m
    };
    let scale = 1.0 + c.max_abs_r();
    let mut ops = Vec::new();
    let mut restricted = vec![DMatrix::zeros(d, d); d * d];
    let mut invariance_residual = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            let r = r_of(a, b) * &w;
            for col in 0..d {
                invariance_residual = invariance_residual.max(s.distance(&r.column(col).into_owned()) / scale);
            }
            let local = &coords * r;
            if a < b {
                ops.push(local.clone());
            }
            restricted[a * d + b] = local;
        }
    }
    let (raw, _) = decompose_skew(&ops, d, DEFAULT_SEED)?;
    let mut profile = Vec::new();
    let mut flat = 0usize;
    for block in &raw {
        if block.trivial {
            flat += block.basis.ncols();
            continue;
        }
        profile.push(fit_constant_curvature(&restricted, d, &block.basis, tau_curv));
    }
    profile.sort_by_key(|b| std::cmp::Reverse(b.dim));
    if flat > 0 {
        profile.push(LeafBlock { dim: flat, curvature: Some(0.0), constant: true, residual: 0.0 });
    }
    Ok(LeafData { dim: d, splits_as_product: profile.len() > 1, curvature_profile: profile, invariance_residual })
}

/// Least-squares constant curvature `kappa` with `R(x,y)z = kappa (<y,z>x - <x,z>y)` on the block.
fn fit_constant_curvature(restricted: &[DMatrix<f64>], d: usize, u: &DMatrix<f64>, tau: f64) -> LeafBlock {
    let k = u.ncols();
    let r = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let f = u[(a, i)] * u[(b, j)];
                if f != 0.0 {
                    m += &restricted[a * d + b] * f;
                }
            }
        }
        u.transpose() * m * u
    };
    let mats: Vec<DMatrix<f64>> = (0..k * k).map(|ij| r(ij / k, ij % k)).collect();
    let mut sum = 0.0;
    let mut count = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            // <R(u_i,u_j)u_j, u_i>
            sum += mats[i * k + j][(i, j)];
            count += 1.0;
        }
    }
    let kappa = if count > 0.0 { sum / count } else { 0.0 };
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let m = &mats[i * k + j];
            for z in 0..k {
                for l in 0..k {
                    // <R(u_i,u_j)u_z, u_l> = kappa (d_jz d_il - d_iz d_jl)
                    let model = kappa * (delta(j, z) * delta(i, l) - delta(i, z) * delta(j, l));
                    worst = worst.max((m[(l, z)] - model).abs());
                }
            }
        }
    }
    let residual = worst / (1.0 + kappa.abs());
    let constant = residual <= tau;
    LeafBlock { dim: k, curvature: constant.then_some(kappa), constant, residual }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Dimension bound on a declared transitive summand `g'`: `dim g' <= k(k+1)/2` for co-index `k`.
#[derive(Debug, Clone, Serialize)]
pub struct DimBound {
    pub summand_dim: usize,
    pub bound: usize,
    pub transitive: bool,
    /// At equality, whether `g'` looks like `so(k+1)` (compact semisimple of matching rank).
    pub so_type: Option<bool>,
    pub ok: bool,
}

pub fn dim_bound(model: &IsometryModel, summand: &Subspace, coindex: usize) -> Result<DimBound> {
    let bound = coindex * (coindex + 1) / 2;
    let sd = summand.dim();
    let transitive = rank_and_kernel(&(model.ev() * summand.matrix()), crate::tolerance::TAU_RANK).rank
        == model.tangent_dim();
    let so_type = if sd == bound {
        let sub = model.algebra().subalgebra(summand)?;
        Some(sub.is_compact_semisimple() && sub.rank() == coindex.div_ceil(2))
    } else {
        None
    };
    let ok = transitive && sd <= bound && so_type.unwrap_or(true);
    Ok(DimBound { summand_dim: sd, bound, transitive, so_type, ok })
}

/// `s_o = ev(p')` check for models carrying a leaf generator.
#[derive(Debug, Clone, Serialize)]
pub struct LeafGeneratorCheck {
    pub generator_dim: usize,
    /// `ev(p')` inside `s_o`.
    pub contained_residual: f64,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub relative_to: &'static str,
    pub description: String,
    pub tangent_dim: usize,
    pub algebra_dim: usize,
    pub p_basis: Subspace,
    pub k_basis: Subspace,
    pub s_o: Subspace,
    pub index: usize,
    pub coindex: usize,
    pub rank_inconclusive: bool,
    pub gq_closed: bool,
    pub gq_residual: f64,
    pub k_in_h: bool,
    pub k_in_h_residual: f64,
    pub ev_injective_on_p: bool,
    pub s_o_invariant: bool,
    pub s_o_autoparallel: bool,
    pub autoparallel_residual: f64,
    pub locally_symmetric: bool,
    pub nabla_r_residual: f64,
    pub naturally_reductive: bool,
    pub naturally_reductive_residual: f64,
    pub curvature_symmetry_residual: f64,
    pub leaf: LeafData,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf_generator: Option<LeafGeneratorCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_bound: Option<DimBound>,
    pub dim_bound_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectations: Option<Expectations>,
    pub checks: Vec<Check>,
    pub status: Status,
}

impl SymmetryReport {
    /// Adds a check and folds its status into the report.
    pub fn push_check(&mut self, c: Check) {
        self.status = self.status.combine(c.status);
        self.checks.push(c);
    }
}

/// The model with a reductive complement (the default one if none was supplied).
fn complete(model: &IsometryModel) -> Result<IsometryModel> {
    if model.complement().is_some() {
        Ok(model.clone())
    } else {
        model.clone().with_default_complement()
    }
}

fn band_status(band: Band) -> Status {
    match band {
        Band::Below => Status::Verified,
        Band::Inside => Status::Inconclusive,
        Band::Above => Status::Failed,
    }
}

/// Computes every symmetry invariant of `model` and compares with `expectations` when given.
pub fn symmetry_data(model: &IsometryModel, expectations: Option<&Expectations>, tol: &Tolerances) -> Result<SymmetryReport> {
    if let Some(e) = expectations {
        e.validate(model.tangent_dim())?;
    }
    let model = complete(model)?;
    let alg = model.algebra();
    let n = model.tangent_dim();
    let cartan = cartan_subspace(&model, tol.rank);
    let p = cartan.p.clone();
    let k = symmetric_isotropy_algebra(&model, &p)?;
    let h = model.isotropy_subalgebra()?;
    let ev = model.ev();
    let s_o = p.image(ev);
    let index = s_o.dim();
    let coindex = n - index;

    let scale = alg.max_structure_constant().max(1.0);
    let gq_residual = [
        alg.bracket_containment_residual(&k, &k, &k),
        alg.bracket_containment_residual(&k, &p, &p),
        alg.bracket_containment_residual(&p, &p, &k),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / scale;
    let k_in_h_residual = h.containment_residual(&k);
    let ev_rank = if p.is_zero() { rank_and_kernel(&DMatrix::zeros(0, 0), tol.rank) } else { rank_and_kernel(&(ev * p.matrix()), tol.rank) };
    let ev_injective_on_p = p.is_zero() || ev_rank.rank == p.dim();
    let rank_inconclusive = cartan.inconclusive || (!p.is_zero() && ev_rank.inconclusive);

    let s_o_invariant = isotropy_invariance_residual(&model, &s_o)? <= 1e-9;
    let (s_o_autoparallel, autoparallel_residual) = if s_o_invariant {
        let a = is_autoparallel(&model, &s_o, tol.curv)?;
        (a.holds, a.residual)
    } else {
        (false, f64::INFINITY)
    };

    let c = curvature(&model)?;
    let locsym = geometry::locally_symmetric_from(&c, tol.curv);
    let nr = geometry::is_naturally_reductive(&model, tol.curv)?;
    let leaf = leaf_from(&model, &c, &s_o, tol.curv)?;

    let leaf_generator = model.leaf_generator().map(|pp| {
        let img = pp.image(ev);
        LeafGeneratorCheck {
            generator_dim: pp.dim(),
            contained_residual: s_o.containment_residual(&img),
            equal: img.same_as(&s_o, 1e-8),
        }
    });

    let mut report = SymmetryReport {
        relative_to: RELATIVE_LABEL,
        description: model.description().to_string(),
        tangent_dim: n,
        algebra_dim: model.algebra_dim(),
        p_basis: p,
        k_basis: k,
        s_o,
        index,
        coindex,
        rank_inconclusive,
        gq_closed: gq_residual <= 1e-9,
        gq_residual,
        k_in_h: k_in_h_residual <= 1e-9,
        k_in_h_residual,
        ev_injective_on_p,
        s_o_invariant,
        s_o_autoparallel,
        autoparallel_residual,
        locally_symmetric: locsym.holds,
        nabla_r_residual: locsym.residual,
        naturally_reductive: nr.holds,
        naturally_reductive_residual: nr.residual,
        curvature_symmetry_residual: c.symmetry_residuals().max(),
        leaf,
        leaf_generator,
        dim_bound: None,
        dim_bound_ok: true,
        expectations: expectations.cloned(),
        checks: vec![],
        status: Status::Verified,
    };

    let structural = [
        ("gq_closed", report.gq_closed),
        ("k_in_h", report.k_in_h),
        ("ev_injective_on_p", report.ev_injective_on_p),
        ("s_o_autoparallel", report.s_o_autoparallel),
        ("curvature_symmetries", report.curvature_symmetry_residual <= tol.curv),
    ];
    for (name, ok) in structural {
        report.push_check(Check::new(name, true, ok, Status::from_bool(ok)));
    }
    let rank_status = |ok: bool| if rank_inconclusive { Status::Inconclusive } else { Status::from_bool(ok) };

    if let Some(e) = expectations {
        if let Some(i) = e.expected_index {
            report.push_check(Check::new("index", i, index, rank_status(i == index)));
        }
        if let Some(ci) = e.expected_coindex {
            report.push_check(Check::new("coindex", ci, coindex, rank_status(ci == coindex)));
        }
        if let Some(ls) = e.expect_locally_symmetric {
            // the residual must clear the decision band on the side of the expectation
            let band = classify(locsym.residual, tol.curv);
            let status = match (ls, band) {
                (_, Band::Inside) => Status::Inconclusive,
                (true, b) => band_status(b),
                (false, Band::Above) => Status::Verified,
                (false, _) => Status::Failed,
            };
            report.push_check(Check::new("locally_symmetric", ls, locsym.holds, status));
        }
        if let Some(nr_exp) = e.expect_naturally_reductive {
            let status = if nr.inconclusive { Status::Inconclusive } else { Status::from_bool(nr.holds == nr_exp) };
            report.push_check(Check::new("naturally_reductive", nr_exp, nr.holds, status));
        }
        if let Some(blocks) = &e.expected_leaf_blocks {
            let got = report.leaf.block_dims();
            let all_constant = report.leaf.curvature_profile.iter().all(|b| b.constant);
            report.push_check(Check::new(
                "leaf_blocks",
                format!("{blocks:?} constant"),
                format!("{got:?}{}", if all_constant { " constant" } else { " non-constant" }),
                rank_status(&got == blocks && all_constant),
            ));
        }
        if let Some(eq) = e.expect_leaf_equal_curvatures {
            let ks: Vec<f64> = report.leaf.curvature_profile.iter().filter_map(|b| b.curvature).collect();
            let equal = ks.len() == report.leaf.curvature_profile.len()
                && ks.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-8 * (1.0 + w[0].abs()));
            report.push_check(Check::new("leaf_equal_curvatures", eq, equal, Status::from_bool(eq == equal)));
        }
        if e.expect_leaf_generator_equal {
            let ok = report.leaf_generator.as_ref().is_some_and(|l| l.equal);
            report.push_check(Check::new("s_o_equals_ev_leaf_generator", true, ok, rank_status(ok)));
        }
        if let (Some(summand), false) = (&e.transitive_summand, e.skip_dim_bound) {
            if coindex >= 2 {
                let b = dim_bound(&model, summand, coindex)?;
                report.dim_bound_ok = b.ok;
                report.push_check(Check::new(
                    "dim_bound",
                    format!("dim <= {}", b.bound),
                    b.summand_dim,
                    rank_status(b.ok),
                ));
                report.dim_bound = Some(b);
            }
        }
    }
    if let Some(l) = &report.leaf_generator {
        let ok = l.contained_residual <= 1e-8;
        report.push_check(Check::new("ev_leaf_generator_in_s_o", true, ok, rank_status(ok)));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealResult {
    pub ideal: Subspace,
    pub samples_used: usize,
    pub converged: bool,
    /// Largest component of `[g, ideal]` outside the ideal.
    pub ideal_residual: f64,
    pub status: Status,
}

/// `g^s = {X : X* stays tangent to the symmetry distribution}`, by intersecting the
/// conditions `ev(Ad(g) X) in s_o` over seeded random group elements `g`.
pub fn symmetry_ideal(model: &IsometryModel, s_o: &Subspace, max_samples: usize, seed: u64) -> Result<IdealResult> {
    let n = model.tangent_dim();
    if s_o.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s_o.ambient_dim() });
    }
    let alg = model.algebra();
    let g = alg.dim();
    let ev = model.ev();
    let perp = DMatrix::identity(n, n) - s_o.projector();
    let ad: Vec<DMatrix<f64>> = (0..g).map(|i| alg.ad_basis(i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = Subspace::full(g);
    let mut stable = 0usize;
    let mut used = 0usize;
    let mut inconclusive = false;
    let mut converged = false;

    let mut restrict = |adg: &DMatrix<f64>, current: &Subspace| -> Subspace {
        if current.is_zero() {
            return current.clone();
        }
        let b = current.matrix();
        let cons = &perp * ev * adg * &b;
        let d = rank_and_kernel(&cons, crate::tolerance::TAU_RANK);
        inconclusive |= d.inconclusive && max_abs(&cons) > 1e-12;
        if d.kernel.is_zero() {
            Subspace::zero(g)
        } else {
            Subspace::from_span(&(&b * d.kernel.matrix()))
        }
    };

    current = restrict(&DMatrix::identity(g, g), &current);
    while used < max_samples {
        let factors = rng.gen_range(1..=MAX_FACTORS);
        let mut adg = DMatrix::identity(g, g);
        for _ in 0..factors {
            let i = rng.gen_range(0..g);
            let t: f64 = rng.gen_range(-1.0..=1.0);
            adg = (&ad[i] * t).exp() * adg;
        }
        used += 1;
        let next = restrict(&adg, &current);
        if next.dim() == current.dim() {
            stable += 1;
        } else {
            stable = 0;
        }
        current = next;
        if stable >= IDEAL_STABLE_RUN || current.is_zero() {
            converged = true;
            break;
        }
    }
    let ideal_residual = if current.is_zero() {
        0.0
    } else {
        alg.bracket_containment_residual(&Subspace::full(g), &current, &current) / alg.max_structure_constant().max(1.0)
    };
    let status = if !converged || inconclusive {
        Status::Inconclusive
    } else {
        Status::from_bool(ideal_residual <= 1e-9)
    };
    Ok(IdealResult { ideal: current, samples_used: used, converged, ideal_residual, status })
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongSymmetry {
    pub holds: bool,
    /// Largest distance of a basis vector of `D` from `ev(ker)`.
    pub residual: f64,
    /// Corank `k` of `D` and the matching bound `k(k+1)/2`.
    pub corank: usize,
    pub bound: usize,
    pub inconclusive: bool,
}

/// Checks `D subset ev(ker(Z -> P_D (nabla Z*)_o |_D))` for an invariant autoparallel `D`.
pub fn strongly_symmetric_check(model: &IsometryModel, d: &Subspace, tol: &Tolerances) -> Result<StrongSymmetry> {
    let model = complete(model)?;
    let n = model.tangent_dim();
    if d.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.ambient_dim() });
    }
    let ap = is_autoparallel(&model, d, tol.curv)?;
    if !ap.holds {
        return Err(invalid(format!("distribution is not autoparallel (residual {:.3e})", ap.residual)));
    }
    let corank = n - d.dim();
    let bound = corank * (corank + 1) / 2;
    if d.is_zero() {
        return Ok(StrongSymmetry { holds: true, residual: 0.0, corank, bound, inconclusive: false });
    }
    let q = model.metric();
    let b = d.matrix();
    let gram_inv = (b.transpose() * q * &b)
        .try_inverse()
        .ok_or_else(|| invalid("degenerate distribution"))?;
    let coord = gram_inv * b.transpose() * q;
    let g = model.algebra_dim();
    let lift = model.lift();
    let k = d.dim();
    let mut stacked = DMatrix::zeros(k * k, g);
    for z in 0..g {
        let mut e = DVector::zeros(g);
        e[z] = 1.0;
        let nz = killing_nabla_lifted(&model, &e, &lift, BracketConvention::LeftAction);
        let local = &coord * nz * &b;
        stacked.set_column(z, &DVector::from_column_slice(local.as_slice()));
    }
    let dec = rank_and_kernel(&stacked, tol.rank);
    let image = dec.kernel.image(model.ev());
    let residual = image.containment_residual(d);
    Ok(StrongSymmetry { holds: residual <= 1e-8, residual, corank, bound, inconclusive: dec.inconclusive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::LieAlgebra;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn round_sphere_is_symmetric() {
        let m = IsometryModel::two_sided(&LieAlgebra::su2(), &diag(&[1., 1., 1.]), &Subspace::full(3)).unwrap();
        let r = symmetry_data(&m, None, &tol()).unwrap();
        assert_eq!((r.index, r.coindex), (3, 0));
        assert_eq!(r.k_basis.dim(), 3);
        assert!(r.locally_symmetric && r.gq_closed && r.k_in_h && r.ev_injective_on_p);
        assert_eq!(r.leaf.block_dims(), vec![3]);
        assert!((r.leaf.curvature_profile[0].curvature.unwrap() - 0.25).abs() < 1e-12);
        let ideal = symmetry_ideal(&m, &r.s_o, 200, DEFAULT_SEED).unwrap();
        assert_eq!(ideal.ideal.dim(), 6);
    }

    #[test]
    fn milnor_family_has_index_one() {
        let m = IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&[3., 2., 1.])).unwrap();
        let r = symmetry_data(&m, None, &tol()).unwrap();
        assert_eq!((r.index, r.coindex), (1, 2));
        assert_eq!(r.k_basis.dim(), 0);
        assert!(!r.rank_inconclusive);
        assert_eq!(r.leaf.block_dims(), vec![1]);
        let ideal = symmetry_ideal(&m, &r.s_o, 200, DEFAULT_SEED).unwrap();
        assert_eq!(ideal.ideal.dim(), 0);
        assert_eq!(ideal.status, Status::Verified);
        let strong = strongly_symmetric_check(&m, &r.s_o, &tol()).unwrap();
        assert!(strong.holds);
        assert_eq!((strong.corank, strong.bound), (2, 3));
    }

    #[test]
    fn generic_metric_has_index_zero() {
        let m = IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&[5., 2., 1.])).unwrap();
        assert_eq!(symmetry_data(&m, None, &tol()).unwrap().index, 0);
    }

    #[test]
    fn torus_is_flat_and_symmetric() {
        let m = IsometryModel::left_invariant(&LieAlgebra::abelian(3), &diag(&[1., 2., 3.])).unwrap();
        let r = symmetry_data(&m, None, &tol()).unwrap();
        assert_eq!(r.p_basis.dim(), 3);
        assert_eq!(r.leaf.curvature_profile.len(), 1);
        assert_eq!(r.leaf.curvature_profile[0].curvature, Some(0.0));
    }

    #[test]
    fn berger_spheres() {
        let x1 = Subspace::from_span(&DMatrix::from_column_slice(3, 1, &[1., 0., 0.]));
        let x3 = Subspace::from_span(&DMatrix::from_column_slice(3, 1, &[0., 0., 1.]));
        for (q, n) in [([2., 1., 1.], &x1), ([1., 1., 0.5], &x3)] {
            let left = IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&q)).unwrap();
            let two = IsometryModel::two_sided(&LieAlgebra::su2(), &diag(&q), n).unwrap();
            let a = symmetry_data(&left, None, &tol()).unwrap();
            let b = symmetry_data(&two, None, &tol()).unwrap();
            assert_eq!(b.index, 1, "{q:?}");
            assert!(a.index <= b.index);
        }
    }

    #[test]
    fn expectations_are_checked() {
        let m = IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&[3., 2., 1.])).unwrap();
        let good = Expectations {
            expected_index: Some(1),
            expected_coindex: Some(2),
            expect_locally_symmetric: Some(false),
            ..Default::default()
        };
        assert_eq!(symmetry_data(&m, Some(&good), &tol()).unwrap().status, Status::Verified);
        let bad = Expectations { expected_index: Some(2), expected_coindex: Some(1), ..Default::default() };
        assert_eq!(symmetry_data(&m, Some(&bad), &tol()).unwrap().status, Status::Failed);
        let loose = Tolerances { rank: 1e-2, ..tol() };
        let _ = symmetry_data(&m, Some(&good), &loose).unwrap();
    }

    #[test]
    fn non_invariant_distribution_is_rejected() {
        let m = IsometryModel::two_sided(&LieAlgebra::su2(), &diag(&[2., 1., 1.]), &Subspace::from_span(&DMatrix::from_column_slice(3, 1, &[1., 0., 0.]))).unwrap();
        let plane = Subspace::from_span(&DMatrix::from_column_slice(3, 2, &[1., 1., 0., 0., 0., 1.]));
        assert!(strongly_symmetric_check(&m, &plane, &tol()).is_err());
    }
}
