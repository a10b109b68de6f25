//! Finite-dimensional real Lie algebras given by structure constants.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{max_abs, rank_and_kernel, Subspace};
use crate::tolerance::{TAU_JACOBI, TAU_RANK};

/// A real Lie algebra with basis `e_0..e_{n-1}` and `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LieAlgebraDoc", into = "LieAlgebraDoc")]
pub struct LieAlgebra {
    labels: Vec<String>,
    /// Dense `dim^3` array indexed `(i * dim + j) * dim + k`.
    structure: Vec<f64>,
}

/// On-disk form: only nonzero constants with `i < j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LieAlgebraDoc {
    pub dim: usize,
    pub labels: Vec<String>,
    pub structure: Vec<(usize, usize, usize, f64)>,
}

impl From<LieAlgebra> for LieAlgebraDoc {
    fn from(a: LieAlgebra) -> Self {
        let n = a.dim();
        let mut structure = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let c = a.c(i, j, k);
                    if c != 0.0 {
                        structure.push((i, j, k, c));
                    }
                }
            }
        }
        LieAlgebraDoc { dim: n, labels: a.labels, structure }
    }
}

impl TryFrom<LieAlgebraDoc> for LieAlgebra {
    type Error = Error;

    fn try_from(doc: LieAlgebraDoc) -> Result<Self> {
        if doc.labels.len() != doc.dim {
            return Err(invalid(format!(
                "algebra has dim {} but {} labels",
                doc.dim,
                doc.labels.len()
            )));
        }
        let alg = LieAlgebra::from_triples(doc.labels, &doc.structure)?;
        let res = alg.jacobi_residual_normalized();
        if res > TAU_JACOBI {
            return Err(invalid(format!("structure constants violate Jacobi (residual {res:.3e})")));
        }
        Ok(alg)
    }
}

impl LieAlgebra {
    /// Builds an algebra from constants `[e_i, e_j] = value * e_k` with `i < j`.
    pub fn from_triples(labels: Vec<String>, triples: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let n = labels.len();
        let mut structure = vec![0.0; n * n * n];
        for &(i, j, k, v) in triples {
            if i >= j || j >= n || k >= n {
                return Err(invalid(format!("bad structure index ({i}, {j}, {k}) for dim {n}")));
            }
            if !v.is_finite() {
                return Err(invalid("non-finite structure constant"));
            }
            structure[(i * n + j) * n + k] = v;
            structure[(j * n + i) * n + k] = -v;
        }
        Ok(Self { labels, structure })
    }

    /// Builds an algebra from a dense array; rejects non-antisymmetric input.
    pub fn from_dense(labels: Vec<String>, structure: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if structure.len() != n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n, got: structure.len() });
        }
        let alg = Self { labels, structure };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if alg.c(i, j, k) != -alg.c(j, i, k) {
                        return Err(invalid(format!("structure constants not antisymmetric at ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(alg)
    }

    pub fn abelian(n: usize) -> Self {
        let labels = (1..=n).map(|i| format!("T{i}")).collect();
        Self { labels, structure: vec![0.0; n * n * n] }
    }

    /// su(2) in the basis `X_k = (1/2) * (i sigma-like matrices)` with `[X1, X2] = X3` cyclically.
    pub fn su2() -> Self {
        let labels = vec!["X1".into(), "X2".into(), "X3".into()];
        Self::from_triples(labels, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)])
            .expect("valid su(2) constants")
    }

    /// so(n) in the basis `E_ij` (`i < j`, lexicographic) with `+1` at `(i, j)` and `-1` at `(j, i)`.
    pub fn so(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("so(n) needs n >= 2, got {n}")));
        }
        let pairs = so_pairs(n);
        let index = |a: usize, b: usize| pairs.iter().position(|&p| p == (a, b));
        let labels = pairs.iter().map(|(i, j)| format!("E{}{}", i + 1, j + 1)).collect();
        let mut triples = Vec::new();
        for (p, &(i, j)) in pairs.iter().enumerate() {
            for (q, &(k, l)) in pairs.iter().enumerate().skip(p + 1) {
                let comm = &so_matrix(n, i, j) * &so_matrix(n, k, l) - &so_matrix(n, k, l) * &so_matrix(n, i, j);
                for a in 0..n {
                    for b in a + 1..n {
                        let v = comm[(a, b)];
                        if v != 0.0 {
                            triples.push((p, q, index(a, b).expect("pair exists"), v));
                        }
                    }
                }
            }
        }
        Self::from_triples(labels, &triples)
    }

    /// Direct sum; cross brackets vanish. Colliding labels from `b` get primes appended.
    pub fn direct_sum(a: &LieAlgebra, b: &LieAlgebra) -> LieAlgebra {
        let (na, nb) = (a.dim(), b.dim());
        let n = na + nb;
        let mut labels = a.labels.clone();
        for l in &b.labels {
            let mut l = l.clone();
            while labels.contains(&l) {
                l.push('\'');
            }
            labels.push(l);
        }
        let mut structure = vec![0.0; n * n * n];
        for i in 0..na {
            for j in 0..na {
                for k in 0..na {
                    structure[(i * n + j) * n + k] = a.c(i, j, k);
                }
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                for k in 0..nb {
                    structure[((na + i) * n + na + j) * n + na + k] = b.c(i, j, k);
                }
            }
        }
        LieAlgebra { labels, structure }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.structure[(i * n + j) * n + k]
    }

    pub fn max_structure_constant(&self) -> f64 {
        self.structure.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    fn check_len(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += w * self.structure[base + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad(x)`: column `j` holds `[x, e_j]`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let base = (i * n + j) * n;
                for k in 0..n {
                    m[(k, j)] += x[i] * self.structure[base + k];
                }
            }
        }
        m
    }

    pub fn ad_basis(&self, i: usize) -> DMatrix<f64> {
        let mut e = DVector::zeros(self.dim());
        e[i] = 1.0;
        self.ad(&e)
    }

    /// `B_ij = trace(ad(e_i) ad(e_j))`.
    pub fn killing_form(&self) -> DMatrix<f64> {
        let n = self.dim();
        let ads: Vec<DMatrix<f64>> = (0..n).map(|i| self.ad_basis(i)).collect();
        let mut b = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let t = (&ads[i] * &ads[j]).trace();
                b[(i, j)] = t;
                b[(j, i)] = t;
            }
        }
        b
    }

    /// Max-norm of the Jacobiator over all basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for out in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c(i, j, m) * self.c(m, l, out)
                                + self.c(j, l, m) * self.c(m, i, out)
                                + self.c(l, i, m) * self.c(m, j, out);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Jacobi residual after rescaling so that max |c| = 1.
    pub fn jacobi_residual_normalized(&self) -> f64 {
        let m = self.max_structure_constant();
        if m == 0.0 {
            0.0
        } else {
            self.jacobi_residual() / (m * m)
        }
    }

    /// Max of `|B([z,x],y) + B(x,[z,y])|` over basis vectors for the given bilinear form.
    pub fn invariance_residual(&self, form: &DMatrix<f64>) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for z in 0..n {
            let ad = self.ad_basis(z);
            let r = ad.transpose() * form + form * &ad;
            worst = worst.max(max_abs(&r));
        }
        worst
    }

    /// Span of all brackets `[u, v]` with `u` in `u_sp`, `v` in `v_sp`.
    pub fn bracket_span(&self, u_sp: &Subspace, v_sp: &Subspace) -> Result<Subspace> {
        for s in [u_sp, v_sp] {
            if s.ambient_dim() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: s.ambient_dim() });
            }
        }
        let mut cols = Vec::new();
        for u in u_sp.vectors() {
            for v in v_sp.vectors() {
                cols.push(self.bracket_unchecked(&u, &v));
            }
        }
        if cols.is_empty() {
            return Ok(Subspace::zero(self.dim()));
        }
        Ok(Subspace::from_span(&DMatrix::from_columns(&cols)))
    }

    /// Largest component of `[a, b]` outside `target`, over basis pairs of `a` and `b`.
    pub fn bracket_containment_residual(&self, a: &Subspace, b: &Subspace, target: &Subspace) -> f64 {
        let mut worst = 0.0f64;
        for u in a.vectors() {
            for v in b.vectors() {
                worst = worst.max(target.distance(&self.bracket_unchecked(&u, &v)));
            }
        }
        worst
    }

    pub fn is_subalgebra(&self, s: &Subspace, tol: f64) -> bool {
        self.bracket_containment_residual(s, s, s) <= tol * self.max_structure_constant().max(1.0)
    }

    /// Structure constants of a subalgebra in the (orthonormal) basis of `s`.
    pub fn subalgebra(&self, s: &Subspace) -> Result<LieAlgebra> {
        let b = s.matrix();
        self.subalgebra_in_basis(&b, None)
    }

    /// Structure constants of the subalgebra spanned by the independent columns of `basis`.
    pub fn subalgebra_in_basis(&self, basis: &DMatrix<f64>, labels: Option<Vec<String>>) -> Result<LieAlgebra> {
        let r = basis.ncols();
        if basis.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: basis.nrows() });
        }
        let gram = basis.transpose() * basis;
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| invalid("subalgebra basis is not linearly independent"))?;
        let coords = &gram_inv * basis.transpose();
        let mut triples = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i + 1..r {
                let br = self.bracket_unchecked(&basis.column(i).into_owned(), &basis.column(j).into_owned());
                let c = &coords * &br;
                worst = worst.max((basis * &c - &br).norm());
                for (k, &v) in c.iter().enumerate() {
                    if v.abs() > 1e-14 * self.max_structure_constant().max(1.0) {
                        triples.push((i, j, k, v));
                    }
                }
            }
        }
        if worst > 1e-9 * self.max_structure_constant().max(1.0) {
            return Err(invalid(format!("span is not closed under the bracket (residual {worst:.3e})")));
        }
        let labels = labels.unwrap_or_else(|| (1..=r).map(|i| format!("Y{i}")).collect());
        LieAlgebra::from_triples(labels, &triples)
    }

    /// Center `{x : [x, g] = 0}`.
    pub fn center(&self) -> Subspace {
        let n = self.dim();
        let mut stack = DMatrix::zeros(n * n, n);
        for j in 0..n {
            // [x, e_j] = -ad(e_j) x
            stack.view_mut((j * n, 0), (n, n)).copy_from(&self.ad_basis(j));
        }
        rank_and_kernel(&stack, TAU_RANK).kernel
    }

    pub fn derived_algebra(&self) -> Subspace {
        let full = Subspace::full(self.dim());
        self.bracket_span(&full, &full).expect("matching dims")
    }

    /// Positive definite ad-invariant form `-B + (center projection)^2` for compact reductive algebras.
    pub fn invariant_inner_product(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let z = self.center();
        let d = self.derived_algebra();
        if z.dim() + d.dim() != n {
            return Err(invalid("algebra is not reductive (center + derived algebra != g)"));
        }
        let mut basis = DMatrix::zeros(n, n);
        if z.dim() > 0 {
            basis.columns_mut(0, z.dim()).copy_from(&z.matrix());
        }
        if d.dim() > 0 {
            basis.columns_mut(z.dim(), d.dim()).copy_from(&d.matrix());
        }
        let inv = basis
            .try_inverse()
            .ok_or_else(|| invalid("center meets the derived algebra"))?;
        let pz = inv.rows(0, z.dim()).into_owned();
        let form = -self.killing_form() + pz.transpose() * pz;
        let eig = SymmetricEigen::new(form.clone());
        if eig.eigenvalues.min() <= 1e-10 * eig.eigenvalues.max().max(1.0) {
            return Err(invalid("algebra is not of compact type (-Killing form is not positive on [g, g])"));
        }
        Ok(form)
    }

    /// Compact semisimple: Killing form negative definite.
    pub fn is_compact_semisimple(&self) -> bool {
        if self.dim() == 0 {
            return false;
        }
        let eig = SymmetricEigen::new(self.killing_form());
        eig.eigenvalues.max() < -1e-10 * eig.eigenvalues.amax()
    }

    /// Rank as the dimension of the centralizer of a fixed pseudo-random element.
    pub fn rank(&self) -> usize {
        let n = self.dim();
        let x = DVector::from_fn(n, |i, _| ((i as f64 + 1.0) * 0.7548776662466927).fract() - 0.5);
        rank_and_kernel(&self.ad(&x), 1e-8).nullity()
    }
}

/// `(i, j)` pairs with `i < j` in lexicographic order.
pub fn so_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

/// The skew matrix `E_ij` (0-based) in `gl(n)`.
pub fn so_matrix(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m[(j, i)] = -1.0;
    m
}

/// Index of `E_ij` (0-based, any order) in the so(n) basis, with its sign.
pub fn so_index(n: usize, i: usize, j: usize) -> (usize, f64) {
    let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
    let idx = so_pairs(n).iter().position(|&p| p == (a, b)).expect("valid pair");
    (idx, s)
}

/// Basis vector of so(n) for `E_ij` (0-based, `i != j`).
pub fn so_vector(n: usize, i: usize, j: usize) -> DVector<f64> {
    let (idx, s) = so_index(n, i, j);
    let mut v = DVector::zeros(n * (n - 1) / 2);
    v[idx] = s;
    v
}
