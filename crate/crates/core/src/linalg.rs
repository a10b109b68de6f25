//! Rank-revealing helpers and the canonical [`Subspace`] type.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tolerance::{BAND_FACTOR, TAU_RANK};

/// Result of a relative-threshold rank decision.
#[derive(Debug, Clone)]
pub struct RankDecision {
    pub rank: usize,
    /// Orthonormal basis of the numerical kernel, canonicalized.
    pub kernel: Subspace,
    /// Singular values in descending order (padded with zeros up to the column count).
    pub singular_values: Vec<f64>,
    /// Some singular value sits in `[tau, 10 tau] * sigma_max`.
    pub inconclusive: bool,
}

impl RankDecision {
    pub fn nullity(&self) -> usize {
        self.kernel.dim()
    }
}

/// Numerical rank and kernel of `a`, with singular values compared against `tau * sigma_max`.
pub fn rank_and_kernel(a: &DMatrix<f64>, tau: f64) -> RankDecision {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return RankDecision {
            rank: 0,
            kernel: Subspace::zero(0),
            singular_values: vec![],
            inconclusive: false,
        };
    }
    if a.iter().any(|x| !x.is_finite()) || a.iter().all(|&x| x == 0.0) || rows == 0 {
        return RankDecision {
            rank: 0,
            kernel: Subspace::full(cols),
            singular_values: vec![0.0; cols],
            inconclusive: false,
        };
    }
    // Pad to at least square so the SVD yields a full right basis.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv[0];
    let cut = tau * smax;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let inconclusive = sv.iter().any(|&s| s >= cut && s <= BAND_FACTOR * cut);

    let null_idx: Vec<usize> = order[rank..].to_vec();
    let mut ker = DMatrix::zeros(cols, null_idx.len());
    for (c, &i) in null_idx.iter().enumerate() {
        ker.set_column(c, &v_t.row(i).transpose());
    }
    RankDecision {
        rank,
        kernel: Subspace::from_orthonormal(ker),
        singular_values: sv,
        inconclusive,
    }
}

/// Moore-Penrose pseudo-inverse with a relative cutoff.
pub fn pseudo_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max();
    let eps = TAU_RANK * smax.max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps).expect("u and v_t were computed")
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Cholesky factor `L` of an SPD matrix, or an error if it is not positive definite.
pub fn cholesky_lower(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(q.clone())
        .ok_or_else(|| invalid("metric matrix is not positive definite"))?;
    Ok(chol.l())
}

/// Checks symmetry and positive definiteness (min eigenvalue > `rel` * max eigenvalue).
pub fn check_spd(q: &DMatrix<f64>, rel: f64) -> Result<()> {
    let n = q.nrows();
    if q.ncols() != n {
        return Err(invalid("metric matrix must be square"));
    }
    if n == 0 {
        return Ok(());
    }
    let scale = max_abs(q).max(f64::MIN_POSITIVE);
    if max_abs(&(q - q.transpose())) > 1e-12 * scale {
        return Err(invalid("metric matrix is not symmetric"));
    }
    let eig = SymmetricEigen::new(q.clone());
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    if !(lo > 0.0 && lo > rel * hi) {
        return Err(invalid(format!(
            "metric matrix is not positive definite (eigenvalues in [{lo:.3e}, {hi:.3e}])"
        )));
    }
    Ok(())
}

/// A linear subspace of `R^n`, stored as a canonical orthonormal basis.
///
/// The basis depends only on the subspace: it is obtained by pivoted
/// Gram-Schmidt on the columns of the orthogonal projector, with the largest
/// residual norm chosen first and ties broken by lowest index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    ambient_dim: usize,
    /// Column-major list of basis vectors.
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Self { ambient_dim: n, basis: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Self::from_orthonormal(DMatrix::identity(n, n))
    }

    /// Span of the columns of `span`, rank decided at the default relative tolerance.
    pub fn from_span(span: &DMatrix<f64>) -> Self {
        Self::from_span_tol(span, TAU_RANK)
    }

    pub fn from_span_tol(span: &DMatrix<f64>, tau: f64) -> Self {
        let n = span.nrows();
        if span.ncols() == 0 || max_abs(span) == 0.0 {
            return Self::zero(n);
        }
        let svd = SVD::new(span.clone(), true, false);
        let u = svd.u.expect("requested U");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tau * smax)
            .collect();
        let mut b = DMatrix::zeros(n, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            b.set_column(c, &u.column(i));
        }
        Self::from_orthonormal(b)
    }

    /// Canonicalizes an orthonormal basis given as matrix columns.
    pub fn from_orthonormal(b: DMatrix<f64>) -> Self {
        let n = b.nrows();
        let r = b.ncols();
        if r == 0 {
            return Self::zero(n);
        }
        let p = &b * b.transpose();
        let mut cols: Vec<DVector<f64>> = (0..n).map(|j| p.column(j).into_owned()).collect();
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(r);
        let mut used = vec![false; n];
        for _ in 0..r {
            let mut best = None;
            let mut best_norm = -1.0;
            for (j, c) in cols.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let nn = c.norm();
                // strict comparison keeps the lowest index on ties
                if nn > best_norm * (1.0 + 1e-12) {
                    best_norm = nn;
                    best = Some(j);
                }
            }
            let j = best.expect("rank does not exceed ambient dimension");
            used[j] = true;
            let q = &cols[j] / best_norm;
            for (k, c) in cols.iter_mut().enumerate() {
                if !used[k] {
                    let d = q.dot(c);
                    *c -= &q * d;
                }
            }
            out.push(q.iter().copied().collect());
        }
        // re-orthonormalize once more against round-off
        let mut m = DMatrix::from_fn(n, r, |i, j| out[j][i]);
        for j in 0..r {
            for k in 0..j {
                let d = m.column(k).dot(&m.column(j));
                let ck = m.column(k).into_owned();
                m.column_mut(j).axpy(-d, &ck, 1.0);
            }
            let nn = m.column(j).norm();
            m.column_mut(j).unscale_mut(nn);
        }
        // flush round-off noise so that reports are stable across platforms
        m.iter_mut().filter(|x| x.abs() < 1e-15).for_each(|x| *x = 0.0);
        Self {
            ambient_dim: n,
            basis: (0..r).map(|j| m.column(j).iter().copied().collect()).collect(),
        }
    }

    /// Takes an already orthonormal basis verbatim (columns within `1e-13` of orthonormal),
    /// otherwise canonicalizes its span.
    pub fn from_basis_or_span(b: &DMatrix<f64>) -> Self {
        let gram = b.transpose() * b;
        let r = b.ncols();
        if r > 0 && (gram - DMatrix::identity(r, r)).amax() < 1e-13 {
            return Self {
                ambient_dim: b.nrows(),
                basis: (0..r).map(|j| b.column(j).iter().copied().collect()).collect(),
            };
        }
        Self::from_span(b)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Basis as an `ambient_dim x dim` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.ambient_dim, self.dim(), |i, j| self.basis[j][i])
    }

    pub fn vector(&self, j: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.basis[j])
    }

    pub fn vectors(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        (0..self.dim()).map(|j| self.vector(j))
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        let b = self.matrix();
        &b * b.transpose()
    }

    /// Norm of the component of `v` orthogonal to the subspace.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        if self.is_zero() {
            return v.norm();
        }
        let b = self.matrix();
        (v - &b * (b.transpose() * v)).norm()
    }

    /// Largest distance of a basis vector of `other` from `self`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        other.vectors().map(|v| self.distance(&v)).fold(0.0, f64::max)
    }

    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        self.containment_residual(other) <= tol
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains(other, tol) && other.contains(self, tol)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let mut span = DMatrix::zeros(self.ambient_dim, self.dim() + other.dim());
        if self.dim() > 0 {
            span.columns_mut(0, self.dim()).copy_from(&self.matrix());
        }
        if other.dim() > 0 {
            span.columns_mut(self.dim(), other.dim()).copy_from(&other.matrix());
        }
        Ok(Subspace::from_span(&span))
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.ambient_dim));
        }
        // x in self with (I - P_other) x = 0
        let b = self.matrix();
        let a = (DMatrix::identity(self.ambient_dim, self.ambient_dim) - other.projector()) * &b;
        let ker = rank_and_kernel(&a, TAU_RANK).kernel;
        Ok(Subspace::from_span(&(&b * ker.matrix())))
    }

    /// Euclidean orthogonal complement.
    pub fn orthogonal_complement(&self) -> Subspace {
        let p = self.projector();
        let n = self.ambient_dim;
        if self.is_zero() {
            return Subspace::full(n);
        }
        rank_and_kernel(&p, TAU_RANK).kernel
    }

    /// Complement with respect to the symmetric form `form` (assumed nondegenerate on the ambient space).
    pub fn complement_wrt(&self, form: &DMatrix<f64>) -> Subspace {
        if self.is_zero() {
            return Subspace::full(self.ambient_dim);
        }
        let constraints = self.matrix().transpose() * form;
        rank_and_kernel(&constraints, TAU_RANK).kernel
    }

    /// Image under a linear map.
    pub fn image(&self, map: &DMatrix<f64>) -> Subspace {
        if self.is_zero() {
            return Subspace::zero(map.nrows());
        }
        Subspace::from_span(&(map * self.matrix()))
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, got: other.ambient_dim });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_has_full_rank() {
        let d = rank_and_kernel(&DMatrix::identity(3, 3), TAU_RANK);
        assert_eq!(d.rank, 3);
        assert_eq!(d.nullity(), 0);
        assert!(!d.inconclusive);
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let d = rank_and_kernel(&DMatrix::zeros(3, 3), TAU_RANK);
        assert_eq!(d.rank, 0);
        assert_eq!(d.nullity(), 3);
    }

    #[test]
    fn wide_matrix_kernel_is_complete() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let d = rank_and_kernel(&a, TAU_RANK);
        assert_eq!(d.rank, 1);
        assert_eq!(d.nullity(), 2);
        for v in d.kernel.vectors() {
            assert!((&a * v).norm() < 1e-14);
        }
    }

    #[test]
    fn rank_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let r = rng.gen_range(1..5);
            let u = DMatrix::from_fn(6, r, |_, _| rng.gen_range(-1.0..1.0));
            let v = DMatrix::from_fn(r, 5, |_, _| rng.gen_range(-1.0..1.0));
            let a = u * v;
            let expected = rank_and_kernel(&a, TAU_RANK).rank;
            for s in [1e-3, 1.0, 1e3] {
                assert_eq!(rank_and_kernel(&(&a * s), TAU_RANK).rank, expected);
            }
            assert_eq!(expected, r.min(5));
        }
    }

    #[test]
    fn near_threshold_is_inconclusive() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 5e-9]));
        assert!(rank_and_kernel(&a, TAU_RANK).inconclusive);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-3]));
        assert!(!rank_and_kernel(&b, TAU_RANK).inconclusive);
    }

    #[test]
    fn canonical_basis_ignores_spanning_set() {
        let a = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let mut mix = DMatrix::zeros(4, 3);
        mix.set_column(0, &(a.column(0) * 2.0 - a.column(1)));
        mix.set_column(1, &(a.column(1) * 3.0));
        mix.set_column(2, &(a.column(0) + a.column(1)));
        let s1 = Subspace::from_span(&a);
        let s2 = Subspace::from_span(&mix);
        assert_eq!(s1.dim(), 2);
        assert!(max_abs(&(s1.matrix() - s2.matrix())) < 1e-12);
    }

    #[test]
    fn intersection_and_complement() {
        let xy = Subspace::from_span(&DMatrix::from_column_slice(3, 2, &[1., 0., 0., 0., 1., 0.]));
        let yz = Subspace::from_span(&DMatrix::from_column_slice(3, 2, &[0., 1., 0., 0., 0., 1.]));
        let y = xy.intersection(&yz).unwrap();
        assert_eq!(y.dim(), 1);
        assert!(y.distance(&DVector::from_vec(vec![0., 1., 0.])) < 1e-12);
        assert_eq!(xy.orthogonal_complement().dim(), 1);
        assert_eq!(xy.sum(&yz).unwrap().dim(), 3);
    }
}
