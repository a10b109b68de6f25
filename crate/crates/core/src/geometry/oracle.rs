//! Finite-difference check of `killing_nabla` on left-invariant metrics.
//!
//! The group is realized by matrices, coordinates are exponential coordinates
//! `x -> exp(sum x_i A_i)` around the identity, and the metric is pulled back
//! through the Maurer-Cartan form. Christoffel symbols at the origin come from
//! central differences of the pulled-back metric, and the Killing fields are the
//! right-invariant fields `Z * phi`, differentiated in the same coordinates.
//! Both derivatives use Richardson extrapolation over steps `h` and `h / 2`.

use nalgebra::{Complex, DMatrix, DVector, Matrix2};
use serde::Serialize;

use super::{killing_nabla_with, BracketConvention};
use crate::error::{invalid, Error, Result};
use crate::lie::{so_matrix, so_pairs, LieAlgebra};
use crate::model::IsometryModel;

/// Default exponential-coordinate step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Agreement threshold is `max(FLOOR, C * h^2)`.
pub const AGREEMENT_FLOOR: f64 = 1e-5;
pub const AGREEMENT_CONSTANT: f64 = 1e3;

/// Matrices `A_i` whose commutators reproduce an algebra's structure constants.
#[derive(Debug, Clone)]
pub struct MatrixRealization {
    mats: Vec<DMatrix<f64>>,
    gram_inv: DMatrix<f64>,
}

impl MatrixRealization {
    /// Checks `[A_i, A_j] = sum_k c_ijk A_k` to round-off.
    pub fn new(alg: &LieAlgebra, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        if mats.len() != alg.dim() {
            return Err(Error::DimensionMismatch { expected: alg.dim(), got: mats.len() });
        }
        let size = mats.first().map_or(0, |m| m.nrows());
        if mats.iter().any(|m| m.nrows() != size || m.ncols() != size) {
            return Err(invalid("realization matrices must be square of equal size"));
        }
        let d = alg.dim();
        let gram = DMatrix::from_fn(d, d, |a, b| mats[a].dot(&mats[b]));
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| invalid("realization matrices are linearly dependent"))?;
        let r = Self { mats, gram_inv };
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let comm = &r.mats[i] * &r.mats[j] - &r.mats[j] * &r.mats[i];
                let mut want = DMatrix::zeros(size, size);
                for k in 0..d {
                    want += &r.mats[k] * alg.c(i, j, k);
                }
                worst = worst.max((comm - want).amax());
            }
        }
        if worst > 1e-12 * (1.0 + alg.max_structure_constant()) {
            return Err(invalid(format!("matrices do not realize the algebra (residual {worst:.3e})")));
        }
        Ok(r)
    }

    /// su(2) as 2x2 anti-Hermitian matrices `X1 = i/2 diag(1,-1)`, `X2 = 1/2 [[0,-1],[1,0]]`,
    /// `X3 = -i/2 [[0,1],[1,0]]`, embedded as real 4x4 matrices.
    pub fn su2() -> Self {
        let i = Complex::new(0.0, 1.0);
        let o = Complex::new(0.0, 0.0);
        let one = Complex::new(1.0, 0.0);
        let h = Complex::new(0.5, 0.0);
        let x = [
            Matrix2::new(i, o, o, -i) * h,
            Matrix2::new(o, -one, one, o) * h,
            Matrix2::new(o, -i, -i, o) * h,
        ];
        let mats = x.iter().map(realify).collect();
        Self::new(&LieAlgebra::su2(), mats).expect("su(2) matrices realize su(2)")
    }

    /// so(n) by its defining `E_ij` matrices.
    pub fn so(n: usize) -> Result<Self> {
        let alg = LieAlgebra::so(n)?;
        let mats = so_pairs(n).into_iter().map(|(i, j)| so_matrix(n, i, j)).collect();
        Self::new(&alg, mats)
    }

    /// Picks a known realization whose commutators match `alg`.
    pub fn for_algebra(alg: &LieAlgebra) -> Option<Self> {
        let mut candidates = Vec::new();
        if alg.dim() == 3 {
            candidates.push(Self::su2().mats);
        }
        for n in 2..=6 {
            if n * (n - 1) / 2 == alg.dim() {
                candidates.push(so_pairs(n).into_iter().map(|(i, j)| so_matrix(n, i, j)).collect());
            }
        }
        candidates.into_iter().find_map(|m| Self::new(alg, m).ok())
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    fn combine(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let s = self.mats[0].nrows();
        let mut m = DMatrix::zeros(s, s);
        for (a, xa) in self.mats.iter().zip(x.iter()) {
            m += a * *xa;
        }
        m
    }

    /// Frobenius least-squares coordinates of `m` in the basis.
    fn coords(&self, m: &DMatrix<f64>) -> DVector<f64> {
        let b = DVector::from_iterator(self.dim(), self.mats.iter().map(|a| a.dot(m)));
        &self.gram_inv * b
    }
}

fn realify(z: &Matrix2<Complex<f64>>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for r in 0..2 {
        for c in 0..2 {
            let v = z[(r, c)];
            m[(2 * r, 2 * c)] = v.re;
            m[(2 * r, 2 * c + 1)] = -v.im;
            m[(2 * r + 1, 2 * c)] = v.im;
            m[(2 * r + 1, 2 * c + 1)] = v.re;
        }
    }
    m
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub step: f64,
    /// Max entry deviation between oracle and algebraic matrices, per basis Killing field.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// `|D(h) - D(h/2)|` over all finite-difference quantities.
    pub error_estimate: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub warning: Option<String>,
}

/// Frame data at coordinates `x`: `phi`, `phi^-1`, and the Maurer-Cartan matrix `Omega`.
struct Frame {
    phi: DMatrix<f64>,
    phi_inv: DMatrix<f64>,
    omega: DMatrix<f64>,
}

fn frame(r: &MatrixRealization, x: &DVector<f64>) -> Frame {
    let d = r.dim();
    let xm = r.combine(x);
    let s = xm.nrows();
    let phi = xm.clone().exp();
    let phi_inv = (-&xm).exp();
    let mut omega = DMatrix::zeros(d, d);
    for i in 0..d {
        // d/dt exp(X + t A_i) is the upper-right block of exp([[X, A_i], [0, X]])
        let mut big = DMatrix::zeros(2 * s, 2 * s);
        big.view_mut((0, 0), (s, s)).copy_from(&xm);
        big.view_mut((s, s), (s, s)).copy_from(&xm);
        big.view_mut((0, s), (s, s)).copy_from(&r.mats[i]);
        let dphi = big.exp().view((0, s), (s, s)).into_owned();
        omega.set_column(i, &r.coords(&(&phi_inv * dphi)));
    }
    Frame { phi, phi_inv, omega }
}

fn pulled_metric(f: &Frame, q: &DMatrix<f64>) -> DMatrix<f64> {
    f.omega.transpose() * q * &f.omega
}

fn killing_fields(r: &MatrixRealization, f: &Frame) -> DMatrix<f64> {
    let d = r.dim();
    let omega_inv = f.omega.clone().try_inverse().expect("exponential chart is regular near 0");
    let mut xi = DMatrix::zeros(d, d);
    for z in 0..d {
        let ad = r.coords(&(&f.phi_inv * &r.mats[z] * &f.phi));
        xi.set_column(z, &(&omega_inv * ad));
    }
    xi
}

/// Central difference of `f` along coordinate `i`, Richardson-extrapolated; returns (value, |D(h)-D(h/2)|).
fn derivative<F>(d: usize, i: usize, h: f64, f: F) -> (DMatrix<f64>, f64)
where
    F: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let central = |step: f64| {
        let mut p = DVector::zeros(d);
        p[i] = step;
        (f(&p) - f(&(-p))) / (2.0 * step)
    };
    let dh = central(h);
    let dh2 = central(h / 2.0);
    let est = (&dh - &dh2).amax();
    ((dh2 * 4.0 - dh) / 3.0, est)
}

/// Finite-difference approximation of `(nabla Z*)_e` for each basis `Z`, as matrices indexed `[k][i]`.
pub fn fd_nabla(model: &IsometryModel, r: &MatrixRealization, h: f64) -> Result<(Vec<DMatrix<f64>>, f64)> {
    if !model.is_left_invariant_group() {
        return Err(Error::Precondition("finite-difference oracle needs a left-invariant group model".into()));
    }
    if r.dim() != model.algebra_dim() {
        return Err(Error::DimensionMismatch { expected: model.algebra_dim(), got: r.dim() });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("step must be positive"));
    }
    let d = r.dim();
    let q = model.metric();
    let mut est = 0.0f64;
    // dg[l] = d g / d x_l at 0; dxi[i] = d xi / d x_i at 0 (columns indexed by Z)
    let mut dg = Vec::with_capacity(d);
    let mut dxi = Vec::with_capacity(d);
    for l in 0..d {
        let (g, e1) = derivative(d, l, h, |x| pulled_metric(&frame(r, x), q));
        let (k, e2) = derivative(d, l, h, |x| killing_fields(r, &frame(r, x)));
        est = est.max(e1).max(e2);
        dg.push(g);
        dxi.push(k);
    }
    let q_inv = q.clone().try_inverse().expect("metric validated as positive definite");
    // gamma[k][(i, j)]
    let mut gamma = vec![DMatrix::zeros(d, d); d];
    for i in 0..d {
        for j in 0..d {
            let lowered = DVector::from_fn(d, |l, _| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]));
            let up = &q_inv * lowered;
            for k in 0..d {
                gamma[k][(i, j)] = up[k];
            }
        }
    }
    // xi(0) is the identity: the field of basis element z has value e_z
    let mut out = Vec::with_capacity(d);
    for z in 0..d {
        let mut n = DMatrix::zeros(d, d);
        for i in 0..d {
            for k in 0..d {
                n[(k, i)] = dxi[i][(k, z)] + gamma[k][(i, z)];
            }
        }
        out.push(n);
    }
    Ok((out, est))
}

/// Compares the finite-difference oracle with `killing_nabla` under the given bracket convention.
pub fn fd_oracle_with(
    model: &IsometryModel,
    r: &MatrixRealization,
    h: f64,
    convention: BracketConvention,
) -> Result<OracleReport> {
    let (fd, est) = fd_nabla(model, r, h)?;
    let d = r.dim();
    let mut deviations = Vec::with_capacity(d);
    for (z, n_fd) in fd.iter().enumerate() {
        let mut e = DVector::zeros(d);
        e[z] = 1.0;
        let n = killing_nabla_with(model, &e, convention)?;
        deviations.push((n - n_fd).amax());
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let tolerance = AGREEMENT_FLOOR.max(AGREEMENT_CONSTANT * h * h);
    let cancellation = f64::EPSILON * metric_condition(model) / h;
    let warning = (cancellation > 0.1 * tolerance || est > tolerance).then(|| {
        format!("step {h:.1e} is dominated by cancellation or truncation: estimated error {:.3e}", est.max(cancellation))
    });
    Ok(OracleReport {
        step: h,
        deviations,
        max_deviation,
        error_estimate: est,
        tolerance,
        passed: max_deviation <= tolerance,
        warning,
    })
}

pub fn fd_oracle(model: &IsometryModel, r: &MatrixRealization, h: f64) -> Result<OracleReport> {
    fd_oracle_with(model, r, h, BracketConvention::LeftAction)
}

/// Round-off amplification of the Christoffel solve: `(1 + |Q|)(1 + |Q^-1|)`.
fn metric_condition(model: &IsometryModel) -> f64 {
    let q = model.metric();
    let inv = q.clone().try_inverse().map_or(f64::INFINITY, |m| m.amax());
    (1.0 + q.amax()) * (1.0 + inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2_model(q: [f64; 3]) -> IsometryModel {
        let m = DMatrix::from_diagonal(&DVector::from_row_slice(&q));
        IsometryModel::left_invariant(&LieAlgebra::su2(), &m).unwrap()
    }

    #[test]
    fn realizations_are_checked() {
        assert_eq!(MatrixRealization::su2().dim(), 3);
        assert!(MatrixRealization::so(3).is_ok());
        let wrong: Vec<_> = MatrixRealization::so(3).unwrap().mats;
        assert!(MatrixRealization::new(&LieAlgebra::abelian(3), wrong).is_err());
        assert!(MatrixRealization::for_algebra(&LieAlgebra::so(3).unwrap()).is_some());
        assert!(MatrixRealization::for_algebra(&LieAlgebra::abelian(2)).is_none());
    }

    #[test]
    fn identity_chart_at_origin() {
        let r = MatrixRealization::su2();
        let f = frame(&r, &DVector::zeros(3));
        assert!((f.omega - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn oracle_agrees_on_su2() {
        let r = MatrixRealization::su2();
        for q in [[1., 1., 1.], [3., 2., 1.], [2., 1., 1.], [1., 1., 0.5]] {
            let rep = fd_oracle(&su2_model(q), &r, DEFAULT_STEP).unwrap();
            assert!(rep.passed, "{q:?}: {rep:?}");
            assert!(rep.warning.is_none());
        }
    }

    #[test]
    fn oracle_agrees_on_so3_generic_metric() {
        let r = MatrixRealization::so(3).unwrap();
        let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 0.8]);
        let m = IsometryModel::left_invariant(&LieAlgebra::so(3).unwrap(), &q).unwrap();
        let rep = fd_oracle(&m, &r, DEFAULT_STEP).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn flipped_convention_is_caught() {
        let r = MatrixRealization::su2();
        let rep = fd_oracle_with(&su2_model([3., 2., 1.]), &r, DEFAULT_STEP, BracketConvention::Flipped).unwrap();
        assert!(!rep.passed);
        assert!(rep.max_deviation > 1e-2);
    }

    #[test]
    fn tiny_step_warns() {
        let r = MatrixRealization::su2();
        let rep = fd_oracle(&su2_model([3., 2., 1.]), &r, 1e-9).unwrap();
        assert!(rep.warning.is_some());
    }

    #[test]
    fn coset_models_are_rejected() {
        let m = IsometryModel::two_sided(&LieAlgebra::su2(), &DMatrix::identity(3, 3), &crate::linalg::Subspace::full(3)).unwrap();
        assert!(matches!(fd_oracle(&m, &MatrixRealization::su2(), DEFAULT_STEP), Err(Error::Precondition(_))));
    }
}
