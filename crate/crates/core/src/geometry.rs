//! Invariant Riemannian geometry at the base point.
//!
//! Tangent vectors are written in the coordinates fixed by the model's `ev`
//! map. The Levi-Civita connection is realized by the Nomizu operator
//! `L(X)Y = 1/2 [X,Y]_m + U(X,Y)` on the reductive complement, and curvature by
//! `R(X,Y) = [L(X), L(Y)] - L([X,Y]_m) - ad([X,Y]_h)` (convention
//! `R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`).

pub mod oracle;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{max_abs, Subspace};
use crate::model::IsometryModel;
use crate::tolerance::{classify, Band};

/// `L(X)Y = lambda[x] * y`.
#[derive(Debug, Clone)]
pub struct NomizuOperator {
    lambda: Vec<DMatrix<f64>>,
    /// The symmetric part `U(e_x, e_y)` stored as `u[x]` columns.
    u: Vec<DMatrix<f64>>,
}

impl NomizuOperator {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Matrix of `L(e_x)`.
    pub fn matrix(&self, x: usize) -> &DMatrix<f64> {
        &self.lambda[x]
    }

    /// `L(v)` for an arbitrary tangent vector.
    pub fn apply(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (x, l) in self.lambda.iter().enumerate() {
            if v[x] != 0.0 {
                m += l * v[x];
            }
        }
        m
    }

    /// Max-norm of the symmetric part `U`; zero exactly for naturally reductive data.
    pub fn u_norm(&self) -> f64 {
        self.u.iter().map(max_abs).fold(0.0, f64::max)
    }
}

/// `r[x][y][z][w] = Q(R(e_x, e_y) e_z, e_w)` and `nabla_r[v][x][y][z][w] = Q((nabla_v R)(e_x, e_y) e_z, e_w)`.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    n: usize,
    r: Vec<f64>,
    nabla_r: Vec<f64>,
    /// `R(e_x, e_y)` as endomorphisms, index `x * n + y`.
    endo: Vec<DMatrix<f64>>,
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn r(&self, x: usize, y: usize, z: usize, w: usize) -> f64 {
        let n = self.n;
        self.r[((x * n + y) * n + z) * n + w]
    }

    pub fn nabla_r(&self, v: usize, x: usize, y: usize, z: usize, w: usize) -> f64 {
        let n = self.n;
        self.nabla_r[(((v * n + x) * n + y) * n + z) * n + w]
    }

    /// Row-major `[x][y][z][w]` array.
    pub fn r_array(&self) -> &[f64] {
        &self.r
    }

    /// Row-major `[v][x][y][z][w]` array.
    pub fn nabla_r_array(&self) -> &[f64] {
        &self.nabla_r
    }

    pub fn endomorphism(&self, x: usize, y: usize) -> &DMatrix<f64> {
        &self.endo[x * self.n + y]
    }

    pub fn max_abs_r(&self) -> f64 {
        self.r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_nabla_r(&self) -> f64 {
        self.nabla_r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Residuals of the classical symmetries, each relative to `1 + max|R|`.
    pub fn symmetry_residuals(&self) -> CurvatureSymmetries {
        let n = self.n;
        let scale = 1.0 + self.max_abs_r();
        let mut s = CurvatureSymmetries::default();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        let r = self.r(x, y, z, w);
                        s.antisym_xy = s.antisym_xy.max((r + self.r(y, x, z, w)).abs());
                        s.antisym_zw = s.antisym_zw.max((r + self.r(x, y, w, z)).abs());
                        s.pair = s.pair.max((r - self.r(z, w, x, y)).abs());
                        s.bianchi = s.bianchi.max((r + self.r(y, z, x, w) + self.r(z, x, y, w)).abs());
                        for v in 0..n {
                            let d = self.nabla_r(v, x, y, z, w);
                            s.nabla_antisym = s
                                .nabla_antisym
                                .max((d + self.nabla_r(v, y, x, z, w)).abs())
                                .max((d + self.nabla_r(v, x, y, w, z)).abs());
                        }
                    }
                }
            }
        }
        s.antisym_xy /= scale;
        s.antisym_zw /= scale;
        s.pair /= scale;
        s.bianchi /= scale;
        s.nabla_antisym /= scale;
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CurvatureSymmetries {
    pub antisym_xy: f64,
    pub antisym_zw: f64,
    pub pair: f64,
    pub bianchi: f64,
    pub nabla_antisym: f64,
}

impl CurvatureSymmetries {
    pub fn max(&self) -> f64 {
        [self.antisym_xy, self.antisym_zw, self.pair, self.bianchi, self.nabla_antisym]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Bracket data of the reductive decomposition in tangent coordinates.
struct Reductive {
    n: usize,
    metric: DMatrix<f64>,
    metric_inv: DMatrix<f64>,
    /// `[e_x, e_y]_m`, index `x * n + y`.
    br_m: Vec<DVector<f64>>,
    /// isotropy action of `[e_x, e_y]_h`, index `x * n + y`.
    br_h: Vec<DMatrix<f64>>,
}

impl Reductive {
    fn new(model: &IsometryModel) -> Result<Self> {
        let lift = model.complement_lift()?;
        let alg = model.algebra();
        let ev = model.ev();
        let n = model.tangent_dim();
        let metric = model.metric().clone();
        let metric_inv = metric
            .clone()
            .try_inverse()
            .ok_or_else(|| invalid("metric is singular"))?;
        let cols: Vec<DVector<f64>> = (0..n).map(|x| lift.column(x).into_owned()).collect();
        let mut br_m = Vec::with_capacity(n * n);
        let mut br_h = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let b = alg.bracket_unchecked(&cols[x], &cols[y]);
                let bm = ev * &b;
                let bh = &b - &lift * &bm;
                br_h.push(ev * alg.ad(&bh) * &lift);
                br_m.push(bm);
            }
        }
        Ok(Self { n, metric, metric_inv, br_m, br_h })
    }

    fn bm(&self, x: usize, y: usize) -> &DVector<f64> {
        &self.br_m[x * self.n + y]
    }

    fn nomizu(&self) -> NomizuOperator {
        let n = self.n;
        let q = &self.metric;
        let mut lambda = Vec::with_capacity(n);
        let mut u_all = Vec::with_capacity(n);
        for x in 0..n {
            let mut l = DMatrix::zeros(n, n);
            let mut u_cols = DMatrix::zeros(n, n);
            for y in 0..n {
                // 2 Q(U(X,Y), Z) = Q([Z,X]_m, Y) + Q(X, [Z,Y]_m)
                let rhs = DVector::from_fn(n, |z, _| {
                    let a = (q * self.bm(z, x))[y];
                    let b = (q * self.bm(z, y))[x];
                    a + b
                });
                let u = &self.metric_inv * rhs * 0.5;
                let col = self.bm(x, y) * 0.5 + &u;
                l.set_column(y, &col);
                u_cols.set_column(y, &u);
            }
            lambda.push(l);
            u_all.push(u_cols);
        }
        NomizuOperator { lambda, u: u_all }
    }
}

/// The Nomizu operator of the model's reductive decomposition.
pub fn nomizu(model: &IsometryModel) -> Result<NomizuOperator> {
    Ok(Reductive::new(model)?.nomizu())
}

/// Curvature tensor and its covariant derivative at the base point.
pub fn curvature(model: &IsometryModel) -> Result<CurvatureTensor> {
    let red = Reductive::new(model)?;
    let nom = red.nomizu();
    Ok(curvature_from(&red, &nom))
}

fn curvature_from(red: &Reductive, nom: &NomizuOperator) -> CurvatureTensor {
    let n = red.n;
    let q = &red.metric;
    let mut endo = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let lx = nom.matrix(x);
            let ly = nom.matrix(y);
            let r = lx * ly - ly * lx - nom.apply(red.bm(x, y)) - &red.br_h[x * n + y];
            endo.push(r);
        }
    }
    // lowered: Q(R(x,y)z, w)
    let lowered: Vec<DMatrix<f64>> = endo.iter().map(|r| (q * r).transpose()).collect();
    let mut r = vec![0.0; n * n * n * n];
    for x in 0..n {
        for y in 0..n {
            let l = &lowered[x * n + y];
            for z in 0..n {
                for w in 0..n {
                    r[((x * n + y) * n + z) * n + w] = l[(z, w)];
                }
            }
        }
    }

    // R(a, b) for arbitrary tangent vectors, bilinear in (a, b)
    let r_of = |a: &DVector<f64>, b: &DVector<f64>| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for x in 0..n {
            if a[x] == 0.0 {
                continue;
            }
            for y in 0..n {
                let w = a[x] * b[y];
                if w != 0.0 {
                    m += &endo[x * n + y] * w;
                }
            }
        }
        m
    };

    let basis: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect();
    let mut nabla_r = vec![0.0; n.pow(5)];
    for v in 0..n {
        let lv = nom.matrix(v);
        for x in 0..n {
            let lvx = lv.column(x).into_owned();
            for y in 0..n {
                let lvy = lv.column(y).into_owned();
                let rxy = &endo[x * n + y];
                // (nabla_v R)(x,y) = [L(v), R(x,y)] - R(L(v)x, y) - R(x, L(v)y)
                let d = lv * rxy - rxy * lv - r_of(&lvx, &basis[y]) - r_of(&basis[x], &lvy);
                let dl = (q * d).transpose();
                for z in 0..n {
                    for w in 0..n {
                        nabla_r[(((v * n + x) * n + y) * n + z) * n + w] = dl[(z, w)];
                    }
                }
            }
        }
    }
    CurvatureTensor { n, r, nabla_r, endo }
}

/// Covariant derivative of the curvature tensor, row-major `[v][x][y][z][w]`.
pub fn nabla_curvature(model: &IsometryModel) -> Result<Vec<f64>> {
    Ok(curvature(model)?.nabla_r)
}

/// Outcome of a thresholded geometric predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predicate {
    pub holds: bool,
    pub residual: f64,
    /// Residual within `(tau, 10 tau]`.
    pub inconclusive: bool,
}

impl Predicate {
    fn from_residual(residual: f64, tau: f64) -> Self {
        let band = classify(residual, tau);
        Self { holds: band == Band::Below, residual, inconclusive: band == Band::Inside }
    }
}

/// `max |nabla R| <= tau (1 + max |R|)`; the reported residual is the ratio.
pub fn is_locally_symmetric(model: &IsometryModel, tau: f64) -> Result<Predicate> {
    let c = curvature(model)?;
    Ok(locally_symmetric_from(&c, tau))
}

pub(crate) fn locally_symmetric_from(c: &CurvatureTensor, tau: f64) -> Predicate {
    Predicate::from_residual(c.max_abs_nabla_r() / (1.0 + c.max_abs_r()), tau)
}

/// `Q([X,Y]_m, Z) + Q(Y, [X,Z]_m) = 0` on basis triples, relative to the bracket scale.
pub fn is_naturally_reductive(model: &IsometryModel, tau: f64) -> Result<Predicate> {
    let red = Reductive::new(model)?;
    let n = red.n;
    let q = &red.metric;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let qb = q * red.bm(x, y);
            scale = scale.max(qb.amax());
            for z in 0..n {
                let a = qb[z];
                let b = (q * red.bm(x, z))[y];
                worst = worst.max((a + b).abs());
            }
        }
    }
    let residual = if scale == 0.0 { 0.0 } else { worst / scale };
    Ok(Predicate::from_residual(residual, tau))
}

/// Sign convention relating Killing vector field brackets to algebra brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketConvention {
    /// Left action: `[X*, Y*] = -[X, Y]*`.
    LeftAction,
    /// Deliberately wrong sign, kept for mutation testing of the oracles.
    Flipped,
}

/// `(nabla Z*)_o` for the Killing field induced by `z`, as a matrix on tangent coordinates.
pub fn killing_nabla(model: &IsometryModel, z: &DVector<f64>) -> Result<DMatrix<f64>> {
    killing_nabla_with(model, z, BracketConvention::LeftAction)
}

pub fn killing_nabla_with(
    model: &IsometryModel,
    z: &DVector<f64>,
    convention: BracketConvention,
) -> Result<DMatrix<f64>> {
    if z.len() != model.algebra_dim() {
        return Err(Error::DimensionMismatch { expected: model.algebra_dim(), got: z.len() });
    }
    Ok(killing_nabla_lifted(model, z, &model.lift(), convention))
}

/// `killing_nabla` computed through a caller-chosen right inverse `lift` of `ev`.
/// The result does not depend on that choice.
pub fn killing_nabla_via_lift(model: &IsometryModel, z: &DVector<f64>, lift: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, g) = (model.tangent_dim(), model.algebra_dim());
    if z.len() != g {
        return Err(Error::DimensionMismatch { expected: g, got: z.len() });
    }
    if lift.shape() != (g, n) {
        return Err(Error::DimensionMismatch { expected: g * n, got: lift.len() });
    }
    let resid = crate::linalg::max_abs(&(model.ev() * lift - DMatrix::identity(n, n)));
    if resid > 1e-9 * crate::linalg::max_abs(lift).max(1.0) {
        return Err(crate::error::invalid(format!("lift is not a right inverse of ev (residual {resid:.3e})")));
    }
    Ok(killing_nabla_lifted(model, z, lift, BracketConvention::LeftAction))
}

pub(crate) fn killing_nabla_lifted(
    model: &IsometryModel,
    z: &DVector<f64>,
    lift: &DMatrix<f64>,
    convention: BracketConvention,
) -> DMatrix<f64> {
    let alg = model.algebra();
    let ev = model.ev();
    let q = model.metric();
    let n = model.tangent_dim();
    let sign = match convention {
        BracketConvention::LeftAction => -1.0,
        BracketConvention::Flipped => 1.0,
    };
    let zv = ev * z;
    let qz = q * &zv;
    let ad_z = alg.ad(z);
    let lifts: Vec<DVector<f64>> = (0..n).map(|i| lift.column(i).into_owned()).collect();
    // ev([Z, W]) for each tangent basis vector w
    let zw: Vec<DVector<f64>> = lifts.iter().map(|w| ev * (&ad_z * w)).collect();
    // m[(i, j)] = 2 Q(N e_i, e_j)
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let vz = ev * alg.bracket_unchecked(&lifts[i], z);
        let qvz = q * &vz;
        for j in 0..n {
            let vw = ev * alg.bracket_unchecked(&lifts[i], &lifts[j]);
            let t1 = qvz[j];
            let t2 = vw.dot(&qz);
            let t3 = (q * &zw[j])[i];
            m[(i, j)] = sign * (t1 + t2 + t3);
        }
    }
    // Q N = m^T / 2
    let q_inv = q.clone().try_inverse().expect("metric validated as positive definite");
    q_inv * m.transpose() * 0.5
}

/// Checks that `d` (in tangent coordinates) is isotropy-invariant and totally geodesic at `o`.
pub fn is_autoparallel(model: &IsometryModel, d: &Subspace, tau: f64) -> Result<Predicate> {
    let n = model.tangent_dim();
    if d.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.ambient_dim() });
    }
    let inv = isotropy_invariance_residual(model, d)?;
    if inv > 1e-9 {
        return Err(invalid(format!("distribution is not isotropy-invariant (residual {inv:.3e})")));
    }
    let nom = nomizu(model)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for x in d.vectors() {
        let lx = nom.apply(&x);
        scale = scale.max(max_abs(&lx));
        for y in d.vectors() {
            worst = worst.max(d.distance(&(&lx * &y)));
        }
    }
    let residual = if scale == 0.0 { 0.0 } else { worst / scale };
    Ok(Predicate::from_residual(residual, tau))
}

/// Largest component of `A d` outside `d` over isotropy operators `A` (relative to `|A|`).
pub fn isotropy_invariance_residual(model: &IsometryModel, d: &Subspace) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in model.isotropy_operators()? {
        let s = max_abs(&a);
        if s == 0.0 {
            continue;
        }
        for v in d.vectors() {
            worst = worst.max(d.distance(&(&a * &v)) / s);
        }
    }
    Ok(worst)
}

/// `Q(R(v,w)w, v) / (Q(v,v)Q(w,w) - Q(v,w)^2)`.
pub fn sectional_curvature(model: &IsometryModel, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    let c = curvature(model)?;
    sectional_from(&c, model.metric(), v, w)
}

pub(crate) fn sectional_from(c: &CurvatureTensor, q: &DMatrix<f64>, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    let n = c.dim();
    if v.len() != n || w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let qvv = v.dot(&(q * v));
    let qww = w.dot(&(q * w));
    let qvw = v.dot(&(q * w));
    let area = qvv * qww - qvw * qvw;
    if area <= 1e-12 * qvv * qww {
        return Err(invalid("degenerate plane for sectional curvature"));
    }
    let mut num = 0.0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for t in 0..n {
                    let coef = v[x] * w[y] * w[z] * v[t];
                    if coef != 0.0 {
                        num += coef * c.r(x, y, z, t);
                    }
                }
            }
        }
    }
    Ok(num / area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{so_vector, LieAlgebra};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    fn su2_model(q: &[f64]) -> IsometryModel {
        IsometryModel::left_invariant(&LieAlgebra::su2(), &diag(q)).unwrap()
    }

    /// Milnor's frame: for [e2,e3] = l1 e1 etc. (orthonormal e_i), the principal Ricci
    /// curvatures are 2 mu_j mu_k with mu_i = (l1+l2+l3)/2 - l_i, and the sectional
    /// curvature of the plane (e_i, e_j) follows from the three Ricci values.
    fn milnor_sectional(q: [f64; 3]) -> [[f64; 3]; 3] {
        let s = [q[0].sqrt(), q[1].sqrt(), q[2].sqrt()];
        // e_i = X_i / s_i ; [e2,e3] = X1/(s2 s3) = (s1/(s2 s3)) e1
        let l = [s[0] / (s[1] * s[2]), s[1] / (s[0] * s[2]), s[2] / (s[0] * s[1])];
        let half = (l[0] + l[1] + l[2]) / 2.0;
        let mu = [half - l[0], half - l[1], half - l[2]];
        let ric = [2.0 * mu[1] * mu[2], 2.0 * mu[0] * mu[2], 2.0 * mu[0] * mu[1]];
        // ric_i = K_ij + K_ik
        let total = (ric[0] + ric[1] + ric[2]) / 2.0;
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let other = 3 - i - j;
                    k[i][j] = total - ric[other];
                }
            }
        }
        k
    }

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn bi_invariant_nomizu_is_half_bracket() {
        let m = su2_model(&[1., 1., 1.]);
        let nom = nomizu(&m).unwrap();
        assert!(nom.u_norm() < 1e-15);
        let l1 = nom.matrix(0);
        // L(X1) X2 = 1/2 X3
        assert!((l1[(2, 1)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn generic_left_invariant_has_nonzero_u() {
        assert!(nomizu(&su2_model(&[3., 2., 1.])).unwrap().u_norm() > 0.1);
    }

    #[test]
    fn round_su2_has_curvature_quarter() {
        let m = su2_model(&[1., 1., 1.]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let v = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let w = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            assert!((sectional_curvature(&m, &v, &w).unwrap() - 0.25).abs() < 1e-12);
        }
        assert!(sectional_curvature(&m, &e(3, 0), &(e(3, 0) * 2.0)).is_err());
    }

    #[test]
    fn left_invariant_sectional_curvature_matches_milnor() {
        for q in [[3.0, 2.0, 1.0], [2.0, 1.0, 1.0], [1.0, 1.0, 0.5], [5.0, 0.7, 0.2]] {
            let m = su2_model(&q);
            let want = milnor_sectional(q);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        let k = sectional_curvature(&m, &e(3, i), &e(3, j)).unwrap();
                        assert!((k - want[i][j]).abs() < 1e-12, "{q:?} ({i},{j}): {k} vs {}", want[i][j]);
                    }
                }
            }
        }
    }

    #[test]
    fn flat_torus() {
        let m = IsometryModel::left_invariant(&LieAlgebra::abelian(3), &diag(&[1., 2., 3.])).unwrap();
        let c = curvature(&m).unwrap();
        assert_eq!(c.max_abs_r(), 0.0);
        assert_eq!(sectional_curvature(&m, &e(3, 0), &e(3, 1)).unwrap(), 0.0);
    }

    #[test]
    fn curvature_symmetries_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let q = &a * a.transpose() + DMatrix::identity(3, 3) * 0.5;
            let m = IsometryModel::left_invariant(&LieAlgebra::su2(), &q).unwrap();
            let s = curvature(&m).unwrap().symmetry_residuals();
            assert!(s.max() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn so4_mod_torus_is_product_of_spheres() {
        let g = LieAlgebra::so(4).unwrap();
        let h = Subspace::from_span(&DMatrix::from_columns(&[so_vector(4, 0, 1), so_vector(4, 2, 3)]));
        let m = h.complement_wrt(&(-g.killing_form()));
        let mb = m.matrix();
        let q = mb.transpose() * (-g.killing_form()) * &mb;
        let model = IsometryModel::coset(&g, &h, &mb, &q, "G2(R4)").unwrap();
        assert!(is_locally_symmetric(&model, 1e-8).unwrap().holds);
        // curvature operator on 2-vectors has a 2-dim kernel complement structure: two S^2 factors
        let c = curvature(&model).unwrap();
        let ric: Vec<f64> = (0..4)
            .map(|x| (0..4).map(|y| c.r(y, x, x, y)).sum::<f64>())
            .collect();
        // Einstein with equal curvature on both factors
        for r in &ric {
            assert!((r - ric[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn killing_nabla_is_isotropy_part_on_h() {
        let m = IsometryModel::two_sided(&LieAlgebra::su2(), &DMatrix::identity(3, 3), &Subspace::full(3)).unwrap();
        let h = m.isotropy_subalgebra().unwrap();
        for z in h.vectors() {
            let n = killing_nabla(&m, &z).unwrap();
            let a = m.isotropy_operator(&z).unwrap();
            assert!(max_abs(&(n - a)) < 1e-12);
        }
        // diagonal transvection (X1, -X1)
        let mut t = DVector::zeros(6);
        t[0] = 1.0;
        t[3] = -1.0;
        assert!(max_abs(&killing_nabla(&m, &t).unwrap()) < 1e-14);
    }

    #[test]
    fn killing_nabla_is_skew_and_nonzero_for_generic_metric() {
        let m = su2_model(&[3., 2., 1.]);
        let z = DVector::from_vec(vec![0.3, -0.8, 0.5]);
        let n = killing_nabla(&m, &z).unwrap();
        let q = m.metric();
        assert!(max_abs(&(q * &n + n.transpose() * q)) < 1e-12);
        assert!(max_abs(&n) > 0.1);
        // the transvection of M(3,2,1) is X1
        assert!(max_abs(&killing_nabla(&m, &e(3, 0)).unwrap()) < 1e-14);
    }

    #[test]
    fn killing_nabla_agrees_with_nomizu() {
        // nabla_v Z* = L(v) ev(Z) + ev([Z, V]) for V the complement lift of v
        let g = LieAlgebra::so(5).unwrap();
        let so4 = Subspace::from_span(&DMatrix::from_columns(
            &crate::lie::so_pairs(4).iter().map(|&(i, j)| so_vector(5, i, j)).collect::<Vec<_>>(),
        ));
        let so3 = Subspace::from_span(&DMatrix::from_columns(&[so_vector(5, 0, 1), so_vector(5, 0, 2), so_vector(5, 1, 2)]));
        let models = vec![
            IsometryModel::double_symmetric_pair(&g, &so4, &so3, None).unwrap(),
            su2_model(&[3., 2., 1.]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in models {
            let nom = nomizu(&m).unwrap();
            let lift = m.complement_lift().unwrap();
            for _ in 0..4 {
                let z = DVector::from_fn(m.algebra_dim(), |_, _| rng.gen_range(-1.0..1.0));
                let n = killing_nabla(&m, &z).unwrap();
                let zv = m.ev() * &z;
                for i in 0..m.tangent_dim() {
                    let v = e(m.tangent_dim(), i);
                    let want = nom.apply(&v) * &zv + m.ev() * m.algebra().bracket(&z, &lift.column(i).into_owned()).unwrap();
                    assert!((n.column(i) - want).amax() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn naturally_reductive_checks() {
        assert!(is_naturally_reductive(&su2_model(&[1., 1., 1.]), 1e-8).unwrap().holds);
        assert!(!is_naturally_reductive(&su2_model(&[3., 2., 1.]), 1e-8).unwrap().holds);
    }

    #[test]
    fn local_symmetry_of_round_and_generic() {
        assert!(is_locally_symmetric(&su2_model(&[1., 1., 1.]), 1e-8).unwrap().holds);
        let p = is_locally_symmetric(&su2_model(&[3., 2., 1.]), 1e-8).unwrap();
        assert!(!p.holds && !p.inconclusive);
    }

    #[test]
    fn autoparallel_checks() {
        let m = su2_model(&[3., 2., 1.]);
        assert!(is_autoparallel(&m, &Subspace::full(3), 1e-8).unwrap().holds);
        let berger = IsometryModel::two_sided(
            &LieAlgebra::su2(),
            &diag(&[2., 1., 1.]),
            &Subspace::from_span(&DMatrix::from_column_slice(3, 1, &[1., 0., 0.])),
        )
        .unwrap();
        // a plane not containing the X1 axis is not isotropy-invariant
        let plane = Subspace::from_span(&DMatrix::from_column_slice(3, 2, &[1., 1., 0., 0., 0., 1.]));
        assert!(is_autoparallel(&berger, &plane, 1e-8).is_err());
    }
}
