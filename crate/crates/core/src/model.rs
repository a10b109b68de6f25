//! Homogeneous Riemannian spaces presented by a Killing algebra, an evaluation
//! map at the base point and an invariant inner product.
//!
//! Killing fields act by a left action, so the value map `ev` is the
//! differential of the orbit map at the base point `o` and the bracket of
//! Killing vector fields is the negative of the algebra bracket.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lie::LieAlgebra;
use crate::linalg::{check_spd, max_abs, pseudo_inverse, rank_and_kernel, Subspace};
use crate::tolerance::TAU_RANK;

/// Scaled tolerance used for structural checks on models.
const MODEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct IsometryModel {
    algebra: LieAlgebra,
    ev: DMatrix<f64>,
    metric: DMatrix<f64>,
    complement: Option<Subspace>,
    description: String,
    leaf_generator: Option<Subspace>,
}

/// JSON layout of a model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub algebra: LieAlgebra,
    /// Row-major `n_M x dim(g)` matrix.
    pub ev: Vec<Vec<f64>>,
    /// Row-major `n_M x n_M` matrix.
    pub metric: Vec<Vec<f64>>,
    /// Basis vectors of the reductive complement, one per entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub description: String,
    /// Subspace of the algebra whose values generate the expected leaf (double symmetric pairs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf_generator: Option<Vec<Vec<f64>>>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    for r in rows {
        if r.len() != ncols {
            return Err(invalid(format!("{what}: expected rows of length {ncols}, got {}", r.len())));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn subspace_from_columns(cols: &[Vec<f64>], dim: usize, what: &str) -> Result<Subspace> {
    let m = matrix_from_rows(cols, dim, what)?;
    Ok(Subspace::from_basis_or_span(&m.transpose()))
}

fn columns_of(s: &Subspace) -> Vec<Vec<f64>> {
    s.vectors().map(|v| v.iter().copied().collect()).collect()
}

impl From<IsometryModel> for ModelDoc {
    fn from(m: IsometryModel) -> Self {
        ModelDoc {
            ev: rows_of(&m.ev),
            metric: rows_of(&m.metric),
            complement: m.complement.as_ref().map(columns_of),
            leaf_generator: m.leaf_generator.as_ref().map(columns_of),
            description: m.description,
            algebra: m.algebra,
        }
    }
}

impl TryFrom<ModelDoc> for IsometryModel {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        let g = doc.algebra.dim();
        let ev = matrix_from_rows(&doc.ev, g, "ev")?;
        let n = ev.nrows();
        let metric = matrix_from_rows(&doc.metric, n, "metric")?;
        if metric.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: metric.nrows() });
        }
        let complement = doc
            .complement
            .as_deref()
            .map(|c| subspace_from_columns(c, g, "complement"))
            .transpose()?;
        let leaf_generator = doc
            .leaf_generator
            .as_deref()
            .map(|c| subspace_from_columns(c, g, "leaf_generator"))
            .transpose()?;
        let mut model = IsometryModel::new(doc.algebra, ev, metric, complement, doc.description)?;
        model.leaf_generator = leaf_generator;
        Ok(model)
    }
}

impl IsometryModel {
    /// Validates and assembles a model. `complement`, when given, must be a reductive complement.
    pub fn new(
        algebra: LieAlgebra,
        ev: DMatrix<f64>,
        metric: DMatrix<f64>,
        complement: Option<Subspace>,
        description: impl Into<String>,
    ) -> Result<Self> {
        let model = Self {
            algebra,
            ev,
            metric,
            complement,
            description: description.into(),
            leaf_generator: None,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let g = self.algebra.dim();
        let n = self.ev.nrows();
        if self.ev.ncols() != g {
            return Err(Error::DimensionMismatch { expected: g, got: self.ev.ncols() });
        }
        if self.metric.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: self.metric.nrows() });
        }
        check_spd(&self.metric, 0.0)?;
        if n > 0 && rank_and_kernel(&self.ev, TAU_RANK).rank != n {
            return Err(Error::ModelInvalid("evaluation map is not surjective".into()));
        }
        let h = self.isotropy_subalgebra()?;
        let scale = max_abs(&self.metric).max(f64::MIN_POSITIVE) * self.algebra.max_structure_constant().max(1.0);
        for z in h.vectors() {
            let a = self.isotropy_operator_unchecked(&z);
            let r = max_abs(&(&self.metric * &a + a.transpose() * &self.metric));
            if r > MODEL_TOL * scale {
                return Err(Error::ModelInvalid(format!(
                    "metric is not invariant under the isotropy algebra (skewness residual {r:.3e})"
                )));
            }
        }
        if let Some(m) = &self.complement {
            if m.ambient_dim() != g || m.dim() != n {
                return Err(Error::ModelInvalid(format!(
                    "complement has dim {} in ambient {}, expected dim {n} in ambient {g}",
                    m.dim(),
                    m.ambient_dim()
                )));
            }
            if rank_and_kernel(&(&self.ev * m.matrix()), TAU_RANK).rank != n {
                return Err(Error::ModelInvalid("complement meets the isotropy algebra".into()));
            }
            let r = self.algebra.bracket_containment_residual(&h, m, m);
            if r > MODEL_TOL * self.algebra.max_structure_constant().max(1.0) {
                return Err(Error::ModelInvalid(format!("complement is not ad(h)-invariant (residual {r:.3e})")));
            }
        }
        Ok(())
    }

    /// Left-invariant metric `q` on a Lie group: Killing fields are left translations, no isotropy.
    pub fn left_invariant(alg: &LieAlgebra, q: &DMatrix<f64>) -> Result<Self> {
        let n = alg.dim();
        if q.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: q.nrows() });
        }
        check_spd(q, 0.0)?;
        Self::new(
            alg.clone(),
            DMatrix::identity(n, n),
            q.clone(),
            Some(Subspace::full(n)),
            "left-invariant metric",
        )
    }

    /// Left-invariant metric enlarged by right translations through the subalgebra `n_sub`.
    ///
    /// The Killing algebra is `alg (+) n_sub` acting by `x . g = a g b^-1`, so `ev(A, B) = A - B`.
    pub fn two_sided(alg: &LieAlgebra, q: &DMatrix<f64>, n_sub: &Subspace) -> Result<Self> {
        if n_sub.is_zero() {
            return Self::left_invariant(alg, q);
        }
        let dim = alg.dim();
        if n_sub.ambient_dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: n_sub.ambient_dim() });
        }
        check_spd(q, 0.0)?;
        if !alg.is_subalgebra(n_sub, MODEL_TOL) {
            return Err(Error::Precondition("right-translation span is not a subalgebra".into()));
        }
        let scale = max_abs(q) * alg.max_structure_constant().max(1.0);
        for (idx, b) in n_sub.vectors().enumerate() {
            let ad = alg.ad(&b);
            let r = max_abs(&(q * &ad + ad.transpose() * q));
            if r > MODEL_TOL * scale {
                return Err(Error::Precondition(format!(
                    "ad({}) is not skew for the metric (residual {r:.3e}); right translations along it are not isometries",
                    describe_vector(alg, &b, idx)
                )));
            }
        }
        let n_alg = alg.subalgebra(n_sub)?;
        let total = LieAlgebra::direct_sum(alg, &n_alg);
        let mut ev = DMatrix::zeros(dim, dim + n_sub.dim());
        ev.view_mut((0, 0), (dim, dim)).copy_from(&DMatrix::identity(dim, dim));
        ev.view_mut((0, dim), (dim, n_sub.dim())).copy_from(&(-n_sub.matrix()));
        let mut model = Self {
            algebra: total,
            ev,
            metric: q.clone(),
            complement: None,
            description: format!("left-invariant metric with {} extra right isometries", n_sub.dim()),
            leaf_generator: None,
        };
        model.validate()?;
        model = model.with_default_complement()?;
        Ok(model)
    }

    /// Reductive coset space `g / h` with tangent space identified with `m` (columns of `m_basis`).
    ///
    /// `metric_m` is the Gram matrix of the inner product in the `m_basis` basis.
    pub fn coset(
        g: &LieAlgebra,
        h: &Subspace,
        m_basis: &DMatrix<f64>,
        metric_m: &DMatrix<f64>,
        description: impl Into<String>,
    ) -> Result<Self> {
        let dim = g.dim();
        if h.ambient_dim() != dim || m_basis.nrows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m_basis.nrows() });
        }
        let n = m_basis.ncols();
        if h.dim() + n != dim {
            return Err(Error::Precondition(format!(
                "dim h + dim m = {} + {n} does not equal dim g = {dim}",
                h.dim()
            )));
        }
        if !g.is_subalgebra(h, MODEL_TOL) {
            return Err(Error::Precondition("isotropy span is not a subalgebra".into()));
        }
        let mut basis = DMatrix::zeros(dim, dim);
        if h.dim() > 0 {
            basis.columns_mut(0, h.dim()).copy_from(&h.matrix());
        }
        if n > 0 {
            basis.columns_mut(h.dim(), n).copy_from(m_basis);
        }
        let inv = basis
            .try_inverse()
            .ok_or_else(|| Error::Precondition("g is not the direct sum of h and m".into()))?;
        let ev = inv.rows(h.dim(), n).into_owned();
        let m = Subspace::from_span(m_basis);
        if m.dim() != n {
            return Err(Error::Precondition("m basis is not linearly independent".into()));
        }
        let r = g.bracket_containment_residual(h, &m, &m);
        if r > MODEL_TOL * g.max_structure_constant().max(1.0) {
            return Err(Error::Precondition(format!("[h, m] is not contained in m (residual {r:.3e})")));
        }
        if metric_m.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: metric_m.nrows() });
        }
        check_spd(metric_m, 0.0)?;
        Self::new(g.clone(), ev, metric_m.clone(), Some(m), description).map_err(|e| match e {
            Error::ModelInvalid(msg) => Error::Precondition(msg),
            other => other,
        })
    }

    /// Riemannian product; algebras, evaluation maps and metrics are block sums.
    pub fn product(a: &IsometryModel, b: &IsometryModel) -> Result<Self> {
        let alg = LieAlgebra::direct_sum(&a.algebra, &b.algebra);
        let (ga, gb) = (a.algebra.dim(), b.algebra.dim());
        let ev = block_diag(&a.ev, &b.ev);
        let metric = block_diag(&a.metric, &b.metric);
        let embed = |s: Option<&Subspace>, t: Option<&Subspace>, da: usize, db: usize| -> Option<Subspace> {
            let sa = s.map(|x| x.matrix()).unwrap_or_else(|| DMatrix::zeros(da, 0));
            let sb = t.map(|x| x.matrix()).unwrap_or_else(|| DMatrix::zeros(db, 0));
            Some(Subspace::from_span(&block_diag(&sa, &sb)))
        };
        let complement = match (&a.complement, &b.complement) {
            (Some(x), Some(y)) => embed(Some(x), Some(y), ga, gb),
            _ => None,
        };
        let leaf_generator = match (&a.leaf_generator, &b.leaf_generator) {
            (None, None) => None,
            (x, y) => embed(x.as_ref(), y.as_ref(), ga, gb),
        };
        let mut model = Self::new(
            alg,
            ev,
            metric,
            complement,
            format!("({}) x ({})", a.description, b.description),
        )?;
        model.leaf_generator = leaf_generator;
        if model.complement.is_none() {
            model = model.with_default_complement()?;
        }
        Ok(model)
    }

    /// Double symmetric pair `g > g_sub > k_sub` with metric `q_bi` on `m'` and `2 q_bi` on `p'`.
    pub fn double_symmetric_pair(
        g: &LieAlgebra,
        g_sub: &Subspace,
        k_sub: &Subspace,
        q_bi: Option<&DMatrix<f64>>,
    ) -> Result<Self> {
        Self::double_symmetric_pair_scaled(g, g_sub, k_sub, q_bi, 2.0)
    }

    /// As [`Self::double_symmetric_pair`] with an arbitrary scale on `p'` (1 gives the normal metric).
    pub fn double_symmetric_pair_scaled(
        g: &LieAlgebra,
        g_sub: &Subspace,
        k_sub: &Subspace,
        q_bi: Option<&DMatrix<f64>>,
        scale: f64,
    ) -> Result<Self> {
        let dim = g.dim();
        if !(scale > 0.0) {
            return Err(invalid("scale on p' must be positive"));
        }
        let q_bi = match q_bi {
            Some(q) => q.clone(),
            None => -g.killing_form(),
        };
        check_spd(&q_bi, 0.0).map_err(|_| Error::Precondition("ad-invariant product is not positive definite".into()))?;
        let inv_res = g.invariance_residual(&q_bi);
        if inv_res > MODEL_TOL * max_abs(&q_bi) * g.max_structure_constant().max(1.0) {
            return Err(Error::Precondition(format!("inner product is not ad-invariant (residual {inv_res:.3e})")));
        }
        for (name, s) in [("g'", g_sub), ("k'", k_sub)] {
            if s.ambient_dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: s.ambient_dim() });
            }
            if !g.is_subalgebra(s, MODEL_TOL) {
                return Err(Error::Precondition(format!("{name} is not a subalgebra")));
            }
        }
        if !g_sub.contains(k_sub, 1e-10) {
            return Err(Error::Precondition("k' is not contained in g'".into()));
        }

        // proportionality of q_bi|g' and the Killing form of g'
        let b = g_sub.matrix();
        let restricted = b.transpose() * &q_bi * &b;
        let killing_sub = g.subalgebra(g_sub)?.killing_form();
        check_proportional(&restricted, &killing_sub)?;

        // p' = q_bi-complement of k' inside g'
        let kq = k_sub.matrix().transpose() * &q_bi * &b;
        let p_coords = rank_and_kernel(&kq, TAU_RANK).kernel;
        let p_prime = Subspace::from_span(&(&b * p_coords.matrix()));
        let r = g.bracket_containment_residual(&p_prime, &p_prime, k_sub);
        if r > MODEL_TOL * g.max_structure_constant().max(1.0) {
            return Err(Error::Precondition(format!("(g', k') is not a symmetric pair: [p', p'] leaves k' (residual {r:.3e})")));
        }

        let m = k_sub.complement_wrt(&q_bi);
        let m_prime = {
            let both = p_prime.sum(k_sub)?;
            both.complement_wrt(&q_bi)
        };
        let mut m_basis = DMatrix::zeros(dim, p_prime.dim() + m_prime.dim());
        if p_prime.dim() > 0 {
            m_basis.columns_mut(0, p_prime.dim()).copy_from(&p_prime.matrix());
        }
        if m_prime.dim() > 0 {
            m_basis.columns_mut(p_prime.dim(), m_prime.dim()).copy_from(&m_prime.matrix());
        }
        debug_assert!(m.same_as(&Subspace::from_span(&m_basis), 1e-9));
        let mut metric = m_basis.transpose() * &q_bi * &m_basis;
        let np = p_prime.dim();
        for i in 0..np {
            for j in 0..np {
                metric[(i, j)] *= scale;
            }
        }
        let mut model = Self::coset(g, k_sub, &m_basis, &metric, "double symmetric pair")?;
        model.leaf_generator = Some(p_prime);
        Ok(model)
    }

    /// Installs the complement orthogonal to `h` for `-B + (center part)`.
    pub fn with_default_complement(mut self) -> Result<Self> {
        let h = self.isotropy_subalgebra()?;
        let form = self.algebra.invariant_inner_product()?;
        let m = h.complement_wrt(&form);
        self.complement = Some(m);
        self.validate()?;
        Ok(self)
    }

    /// Same presentation with a different invariant metric.
    pub fn with_metric(&self, metric: &DMatrix<f64>) -> Result<Self> {
        let mut m = self.clone();
        m.metric = metric.clone();
        m.validate()?;
        Ok(m)
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn ev(&self) -> &DMatrix<f64> {
        &self.ev
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn complement(&self) -> Option<&Subspace> {
        self.complement.as_ref()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `p'` for double symmetric pair models.
    pub fn leaf_generator(&self) -> Option<&Subspace> {
        self.leaf_generator.as_ref()
    }

    pub fn tangent_dim(&self) -> usize {
        self.ev.nrows()
    }

    pub fn algebra_dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Is the model a Lie group with a left-invariant metric (`ev` = identity)?
    pub fn is_left_invariant_group(&self) -> bool {
        let n = self.tangent_dim();
        self.algebra.dim() == n && self.ev == DMatrix::identity(n, n)
    }

    /// `h = ker(ev)`, verified to be closed under the bracket.
    pub fn isotropy_subalgebra(&self) -> Result<Subspace> {
        let h = rank_and_kernel(&self.ev, TAU_RANK).kernel;
        if !self.algebra.is_subalgebra(&h, MODEL_TOL) {
            return Err(Error::ModelInvalid("kernel of the evaluation map is not a subalgebra".into()));
        }
        Ok(h)
    }

    /// Some right inverse of `ev` (`ev * lift = I`).
    pub fn lift(&self) -> DMatrix<f64> {
        pseudo_inverse(&self.ev)
    }

    /// Right inverse of `ev` with columns in the reductive complement.
    pub fn complement_lift(&self) -> Result<DMatrix<f64>> {
        let m = self.complement.as_ref().ok_or(Error::MissingComplement)?.matrix();
        let em = &self.ev * &m;
        let inv = em.try_inverse().ok_or_else(|| Error::ModelInvalid("complement meets h".into()))?;
        Ok(m * inv)
    }

    /// Linear isotropy action `v -> ev([Z, V])` of `Z` in `h`.
    pub fn isotropy_operator(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        if z.len() != self.algebra.dim() {
            return Err(Error::DimensionMismatch { expected: self.algebra.dim(), got: z.len() });
        }
        let scale = z.norm().max(f64::MIN_POSITIVE) * max_abs(&self.ev).max(1.0);
        if (&self.ev * z).norm() > 1e-10 * scale {
            return Err(invalid("element is not in the isotropy algebra"));
        }
        Ok(self.isotropy_operator_unchecked(z))
    }

    pub(crate) fn isotropy_operator_unchecked(&self, z: &DVector<f64>) -> DMatrix<f64> {
        &self.ev * self.algebra.ad(z) * self.lift()
    }

    /// Isotropy operators for the canonical basis of `h`.
    pub fn isotropy_operators(&self) -> Result<Vec<DMatrix<f64>>> {
        let h = self.isotropy_subalgebra()?;
        Ok(h.vectors().map(|z| self.isotropy_operator_unchecked(&z)).collect())
    }
}

fn describe_vector(alg: &LieAlgebra, v: &DVector<f64>, idx: usize) -> String {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i].abs() > 1e-12).collect();
    if nz.len() == 1 {
        alg.labels()[nz[0]].clone()
    } else {
        format!("basis element {idx} of the right-translation span")
    }
}

pub(crate) fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    m
}

/// Errors unless `a = r * b` for some scalar `r` (reporting the spread of entrywise ratios).
fn check_proportional(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let bb = b.dot(b);
    if bb == 0.0 {
        return Err(Error::Precondition("g' has vanishing Killing form; proportionality undefined".into()));
    }
    let r = a.dot(b) / bb;
    let resid = max_abs(&(a - b * r));
    if resid > 1e-9 * max_abs(a) {
        let floor = 1e-6 * max_abs(b);
        let ratios: Vec<f64> = a
            .iter()
            .zip(b.iter())
            .filter(|(_, y)| y.abs() > floor)
            .map(|(x, y)| x / y)
            .collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Precondition(format!(
            "inner product on g' is not proportional to its Killing form (ratio spread [{lo:.6}, {hi:.6}], residual {resid:.3e})"
        )));
    }
    Ok(r)
}

/// Paper-anchored expectations attached to a catalog entry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub expected_index: Option<usize>,
    pub expected_coindex: Option<usize>,
    pub expect_locally_symmetric: Option<bool>,
    pub leaf_description: String,
    pub source: String,
    /// Semisimple ideal of the Killing algebra declared to act transitively (dimension-bound check).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitive_summand: Option<Subspace>,
    /// Skip the dimension bound (the space is outside the bound's hypotheses).
    #[serde(default)]
    pub skip_dim_bound: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_naturally_reductive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_fixed_dim: Option<usize>,
    /// Multiset of isotropy block dimensions, in decreasing order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_isotropy_blocks: Option<Vec<usize>>,
    /// Dimensions of the constant-curvature blocks of the leaf, in decreasing order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_leaf_blocks: Option<Vec<usize>>,
    /// All leaf blocks share one curvature value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_leaf_equal_curvatures: Option<bool>,
    /// `s_o` equals `ev(p')` for the recorded leaf generator `p'`.
    #[serde(default)]
    pub expect_leaf_generator_equal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_invariant_metric_dim: Option<usize>,
}

impl Expectations {
    pub fn validate(&self, tangent_dim: usize) -> Result<()> {
        if let (Some(i), Some(c)) = (self.expected_index, self.expected_coindex) {
            if i + c != tangent_dim {
                return Err(invalid(format!(
                    "expected index {i} + coindex {c} does not equal dim M = {tangent_dim}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{so_pairs, so_vector};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    fn so_span(n_amb: usize, pairs: &[(usize, usize)]) -> Subspace {
        Subspace::from_span(&DMatrix::from_columns(
            &pairs.iter().map(|&(i, j)| so_vector(n_amb, i, j)).collect::<Vec<_>>(),
        ))
    }

    #[test]
    fn left_invariant_has_trivial_isotropy() {
        let m = IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&[3., 2., 1.])).unwrap();
        assert_eq!(m.isotropy_subalgebra().unwrap().dim(), 0);
        assert!(m.is_left_invariant_group());
        assert!(IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&[1., 0., 1.])).is_err());
        assert!(IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(&[1., -1., 1.])).is_err());
    }

    #[test]
    fn two_sided_berger() {
        let su2 = LieAlgebra::su2();
        let x1 = Subspace::from_span(&DMatrix::from_column_slice(3, 1, &[1., 0., 0.]));
        let m = IsometryModel::two_sided(&su2, &diag(&[2., 1., 1.]), &x1).unwrap();
        assert_eq!(m.algebra_dim(), 4);
        assert_eq!(m.isotropy_subalgebra().unwrap().dim(), 1);
        // X1 is not skew for a metric that is round on a different plane
        let err = IsometryModel::two_sided(&su2, &diag(&[1., 1., 0.5]), &x1).unwrap_err();
        assert!(err.to_string().contains("X1"), "{err}");
    }

    #[test]
    fn two_sided_round_and_trivial() {
        let su2 = LieAlgebra::su2();
        let m = IsometryModel::two_sided(&su2, &DMatrix::identity(3, 3), &Subspace::full(3)).unwrap();
        assert_eq!(m.algebra_dim(), 6);
        let h = m.isotropy_subalgebra().unwrap();
        assert_eq!(h.dim(), 3);
        // kernel of ev(A, B) = A - B is the diagonal
        let mut d = DVector::zeros(6);
        d[0] = 1.0;
        d[3] = 1.0;
        assert!(h.distance(&d) < 1e-12);
        let q = diag(&[3., 2., 1.]);
        let a = IsometryModel::two_sided(&su2, &q, &Subspace::zero(3)).unwrap();
        let b = IsometryModel::left_invariant(&su2, &q).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn isotropy_operator_lift_independent_and_skew() {
        let su2 = LieAlgebra::su2();
        let m = IsometryModel::two_sided(&su2, &DMatrix::identity(3, 3), &Subspace::full(3)).unwrap();
        let h = m.isotropy_subalgebra().unwrap();
        let z = h.vector(0);
        let a = m.isotropy_operator(&z).unwrap();
        assert!(max_abs(&(&a + a.transpose())) < 1e-12);
        // a different lift: add an h component
        let lift2 = m.lift() + h.matrix() * DMatrix::from_element(h.dim(), 3, 0.37);
        let a2 = m.ev() * m.algebra().ad(&z) * lift2;
        assert!(max_abs(&(&a - a2)) < 1e-10);
        assert_eq!(max_abs(&m.isotropy_operator(&DVector::zeros(6)).unwrap()), 0.0);
        let mut not_h = DVector::zeros(6);
        not_h[0] = 1.0;
        assert!(m.isotropy_operator(&not_h).is_err());
    }

    #[test]
    fn coset_so5_so3_has_seven_dims() {
        let g = LieAlgebra::so(5).unwrap();
        let h = so_span(5, &[(0, 1), (0, 2), (1, 2)]);
        let m = h.complement_wrt(&(-g.killing_form()));
        let q = DMatrix::identity(7, 7);
        let model = IsometryModel::coset(&g, &h, &m.matrix(), &q, "so5/so3").unwrap();
        assert_eq!(model.tangent_dim(), 7);
        let hh = model.isotropy_subalgebra().unwrap();
        assert_eq!(hh.dim(), 3);
        let sub = g.subalgebra(&hh).unwrap();
        assert!(sub.is_compact_semisimple());
    }

    #[test]
    fn coset_rejects_non_invariant_metric() {
        let g = LieAlgebra::so(4).unwrap();
        let h = so_span(4, &[(0, 1), (0, 2), (1, 2)]);
        let m = so_span(4, &[(0, 3), (1, 3), (2, 3)]);
        assert!(IsometryModel::coset(&g, &h, &m.matrix(), &DMatrix::identity(3, 3), "S3").is_ok());
        assert!(IsometryModel::coset(&g, &h, &m.matrix(), &diag(&[1., 2., 3.]), "bad").is_err());
    }

    #[test]
    fn double_pairs() {
        let g = LieAlgebra::so(5).unwrap();
        let so4 = so_span(5, &so_pairs(4));
        let so3 = so_span(5, &[(0, 1), (0, 2), (1, 2)]);
        let m = IsometryModel::double_symmetric_pair(&g, &so4, &so3, None).unwrap();
        assert_eq!(m.tangent_dim(), 7);
        let p = m.leaf_generator().unwrap();
        assert_eq!(p.dim(), 3);
        // <m', p'> = 0 and <x, x> = 2 q_bi(x, x) on p'
        let qb = -g.killing_form();
        for x in p.vectors() {
            let v = m.ev() * &x;
            let want = 2.0 * x.dot(&(&qb * &x));
            assert!((v.dot(&(m.metric() * &v)) - want).abs() < 1e-10);
        }
        let mprime = p.sum(&so3).unwrap().complement_wrt(&qb);
        for y in mprime.vectors() {
            for x in p.vectors() {
                let (vx, vy) = (m.ev() * &x, m.ev() * &y);
                assert!(vx.dot(&(m.metric() * vy)).abs() < 1e-12);
            }
        }
        let so2so2 = so_span(5, &[(0, 1), (2, 3)]);
        let m2 = IsometryModel::double_symmetric_pair(&g, &so4, &so2so2, None).unwrap();
        assert_eq!(m2.tangent_dim(), 8);
        assert_eq!(m2.leaf_generator().unwrap().dim(), 4);
    }

    #[test]
    fn double_pair_rejects_non_symmetric_and_non_proportional() {
        let g = LieAlgebra::so(5).unwrap();
        let so4 = so_span(5, &so_pairs(4));
        // (so(4), so(2)) is not a symmetric pair
        let so2 = so_span(5, &[(0, 1)]);
        assert!(IsometryModel::double_symmetric_pair(&g, &so4, &so2, None).is_err());
        // a non-proportional invariant product: distort the two su(2) ideals of so(4) inside so(4)+so(1)
        let g4 = LieAlgebra::so(4).unwrap();
        let full = Subspace::full(6);
        let so3 = so_span(4, &[(0, 1), (0, 2), (1, 2)]);
        let mut q = -g4.killing_form();
        // self-dual / anti-self-dual weighting keeps ad-invariance but breaks proportionality
        let sd = [so_vector(4, 0, 1) + so_vector(4, 2, 3), so_vector(4, 0, 2) - so_vector(4, 1, 3), so_vector(4, 0, 3) + so_vector(4, 1, 2)];
        for v in &sd {
            q += v * v.transpose();
        }
        assert!(g4.invariance_residual(&q) < 1e-12);
        let err = IsometryModel::double_symmetric_pair(&g4, &full, &so3, Some(&q)).unwrap_err();
        assert!(err.to_string().contains("ratio spread"), "{err}");
    }

    #[test]
    fn normal_metric_when_scale_is_one() {
        let g = LieAlgebra::so(4).unwrap();
        let so3 = so_span(4, &[(0, 1), (0, 2), (1, 2)]);
        let m = IsometryModel::double_symmetric_pair_scaled(&g, &Subspace::full(6), &so3, None, 1.0).unwrap();
        let l = m.complement_lift().unwrap();
        let qb = -g.killing_form();
        assert!(max_abs(&(l.transpose() * qb * &l - m.metric())) < 1e-12);
    }

    #[test]
    fn product_models() {
        let su2 = LieAlgebra::su2();
        let a = IsometryModel::left_invariant(&su2, &diag(&[3., 2., 1.])).unwrap();
        let b = IsometryModel::two_sided(&su2, &DMatrix::identity(3, 3), &Subspace::full(3)).unwrap();
        let p = IsometryModel::product(&a, &b).unwrap();
        assert_eq!(p.tangent_dim(), 6);
        assert_eq!(p.isotropy_subalgebra().unwrap().dim(), 3);
        // a point: so(3)/so(3)
        let so3 = LieAlgebra::so(3).unwrap();
        let point = IsometryModel::coset(&so3, &Subspace::full(3), &DMatrix::zeros(3, 0), &DMatrix::zeros(0, 0), "point").unwrap();
        let q = IsometryModel::product(&a, &point).unwrap();
        assert_eq!(q.tangent_dim(), 3);
        assert!(max_abs(&(q.metric() - a.metric())) == 0.0);
    }

    #[test]
    fn json_round_trip() {
        let su2 = LieAlgebra::su2();
        let x1 = Subspace::from_span(&DMatrix::from_column_slice(3, 1, &[1., 0., 0.]));
        let m = IsometryModel::two_sided(&su2, &diag(&[2., 1., 1.]), &x1).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: IsometryModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let mut doc: serde_json::Value = serde_json::from_str(&s).unwrap();
        doc["metric"][0][0] = serde_json::json!(-1.0);
        assert!(serde_json::from_value::<IsometryModel>(doc).is_err());
    }

    #[test]
    fn expectations_must_add_up() {
        let e = Expectations { expected_index: Some(1), expected_coindex: Some(2), ..Default::default() };
        assert!(e.validate(3).is_ok());
        assert!(e.validate(4).is_err());
    }
}
