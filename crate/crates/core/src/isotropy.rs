//! The isotropy representation: commutant, irreducible decomposition, invariant metrics.
//!
//! Decompositions are computed in Q-orthonormal coordinates `y = L^T x`
//! (`Q = L L^T`), where isotropy operators are skew-symmetric, and mapped back
//! to tangent coordinates on output.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_lower, max_abs, rank_and_kernel, Subspace};
use crate::model::IsometryModel;
use crate::tolerance::{BAND_FACTOR, TAU_RANK};

/// Relative eigenvalue gap that separates clusters when splitting.
pub const CLUSTER_GAP: f64 = 1e-6;
const MAX_REDRAWS: usize = 16;
const MAX_PD_RETRIES: usize = 100;

/// Real type of an irreducible block, read off from the dimension of its commutant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Real,
    Complex,
    Quaternionic,
}

#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub dim: usize,
    pub kind: BlockKind,
    /// The operators act as zero on this block.
    pub trivial: bool,
    pub subspace: Subspace,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    /// Blocks sorted by decreasing dimension; non-trivial before trivial.
    pub blocks: Vec<Block>,
    /// Pairs of block indices admitting a nonzero intertwiner.
    pub equivalent_pairs: Vec<(usize, usize)>,
    /// A rank decision fell inside the tolerance band.
    pub inconclusive: bool,
}

impl Decomposition {
    /// Block dimensions in report order.
    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn trivial_dim(&self) -> usize {
        self.blocks.iter().filter(|b| b.trivial).map(|b| b.dim).sum()
    }
}

/// Invariant symmetric bilinear forms on the tangent space, as `Q S` for `S` in the basis.
#[derive(Debug, Clone)]
pub struct InvariantMetricSpace {
    pub background: DMatrix<f64>,
    /// Q-symmetric intertwiners `S`; the corresponding forms are `background * S`.
    pub sym_commutant_basis: Vec<DMatrix<f64>>,
    pub dim: usize,
}

impl InvariantMetricSpace {
    /// Bilinear form represented by the intertwiner `s`.
    pub fn form(&self, s: &DMatrix<f64>) -> DMatrix<f64> {
        let f = &self.background * s;
        (&f + f.transpose()) * 0.5
    }
}

/// Linear constraints `X A - A X = 0` on column-major `vec(X)`, stacked over `ops`.
fn commutation_system(ops: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(n, n);
    let mut sys = DMatrix::zeros(n * n * ops.len().max(1), n * n);
    for (k, a) in ops.iter().enumerate() {
        let block = a.transpose().kronecker(&id) - id.kronecker(a);
        sys.view_mut((k * n * n, 0), (n * n, n * n)).copy_from(&block);
    }
    sys
}

/// Constraints `X - X^T = 0`.
fn symmetry_system(n: usize) -> DMatrix<f64> {
    let mut sys = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            sys[(j * n + i, j * n + i)] += 1.0;
            sys[(j * n + i, i * n + j)] -= 1.0;
        }
    }
    sys
}

fn unvec(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v)
}

struct Kernel {
    mats: Vec<DMatrix<f64>>,
    inconclusive: bool,
}

fn commutant_kernel(ops: &[DMatrix<f64>], n: usize, symmetric: bool) -> Kernel {
    if n == 0 {
        return Kernel { mats: vec![], inconclusive: false };
    }
    let mut sys = commutation_system(ops, n);
    if ops.is_empty() || ops.iter().all(|a| max_abs(a) == 0.0) {
        sys.fill(0.0);
    }
    if symmetric {
        let s = symmetry_system(n);
        let mut both = DMatrix::zeros(sys.nrows() + s.nrows(), n * n);
        // scale the symmetry rows like the commutation rows so the rank decision is balanced
        let scale = ops.iter().map(max_abs).fold(1.0, f64::max);
        both.view_mut((0, 0), sys.shape()).copy_from(&sys);
        both.view_mut((sys.nrows(), 0), s.shape()).copy_from(&(s * scale));
        sys = both;
    }
    let d = rank_and_kernel(&sys, TAU_RANK);
    Kernel {
        mats: d.kernel.vectors().map(|v| unvec(v.as_slice(), n)).collect(),
        inconclusive: d.inconclusive,
    }
}

/// Basis of the commutant `{A : A T = T A for all isotropy operators T}` in tangent coordinates.
pub fn commutant(model: &IsometryModel) -> Result<Vec<DMatrix<f64>>> {
    let ops = model.isotropy_operators()?;
    Ok(commutant_kernel(&ops, model.tangent_dim(), false).mats)
}

/// Commutant of an arbitrary family of `n x n` operators.
pub fn commutant_of(ops: &[DMatrix<f64>], n: usize) -> Vec<DMatrix<f64>> {
    commutant_kernel(ops, n, false).mats
}

/// Cholesky factor `L` of the metric and the isotropy operators in orthonormal coordinates.
fn orthonormal_ops(model: &IsometryModel) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let l = cholesky_lower(model.metric())?;
    let l_inv = l.clone().try_inverse().ok_or_else(|| invalid("metric is singular"))?;
    let ops = model
        .isotropy_operators()?
        .into_iter()
        .map(|a| l.transpose() * a * l_inv.transpose())
        .collect();
    Ok((l, l_inv, ops))
}

/// Irreducible blocks of skew-symmetric operators on `R^n`, as orthonormal bases (columns).
pub(crate) struct RawBlock {
    pub basis: DMatrix<f64>,
    pub kind: BlockKind,
    pub trivial: bool,
}

pub(crate) fn decompose_skew(ops: &[DMatrix<f64>], n: usize, seed: u64) -> Result<(Vec<RawBlock>, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut inconclusive = false;
    if n > 0 {
        split(ops, DMatrix::identity(n, n), &mut rng, &mut out, &mut inconclusive)?;
    }
    Ok((out, inconclusive))
}

fn restrict(ops: &[DMatrix<f64>], u: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    ops.iter().map(|a| u.transpose() * a * u).collect()
}

fn split(
    ops: &[DMatrix<f64>],
    u: DMatrix<f64>,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<RawBlock>,
    inconclusive: &mut bool,
) -> Result<()> {
    let d = u.ncols();
    let local = restrict(ops, &u);
    let sym = commutant_kernel(&local, d, true);
    *inconclusive |= sym.inconclusive;
    if sym.mats.len() <= 1 {
        let full = commutant_kernel(&local, d, false);
        *inconclusive |= full.inconclusive;
        let kind = match full.mats.len() {
            1 => BlockKind::Real,
            2 => BlockKind::Complex,
            4 => BlockKind::Quaternionic,
            k => return Err(Error::Inconclusive(format!("irreducible block of dim {d} has commutant of dim {k}"))),
        };
        let scale = ops.iter().map(max_abs).fold(0.0, f64::max);
        let trivial = local.iter().all(|a| max_abs(a) <= 1e-9 * scale.max(1.0));
        out.push(RawBlock { basis: u, kind, trivial });
        return Ok(());
    }
    for _ in 0..MAX_REDRAWS {
        let mut s = DMatrix::zeros(d, d);
        for m in &sym.mats {
            s += m * rng.gen_range(-1.0..1.0);
        }
        let s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let spread = eig.eigenvalues.amax();
        if spread == 0.0 {
            continue;
        }
        let mut clusters: Vec<Vec<usize>> = vec![vec![idx[0]]];
        let mut borderline = false;
        for w in idx.windows(2) {
            let gap = (eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]]) / spread;
            if gap > CLUSTER_GAP {
                if gap <= BAND_FACTOR * CLUSTER_GAP {
                    borderline = true;
                }
                clusters.push(vec![w[1]]);
            } else {
                clusters.last_mut().expect("non-empty").push(w[1]);
            }
        }
        if clusters.len() < 2 || borderline {
            continue;
        }
        for c in clusters {
            let mut v = DMatrix::zeros(d, c.len());
            for (k, &i) in c.iter().enumerate() {
                v.set_column(k, &eig.eigenvectors.column(i));
            }
            split(ops, &u * v, rng, out, inconclusive)?;
        }
        return Ok(());
    }
    Err(Error::Inconclusive(format!(
        "could not separate eigenvalue clusters of a {d}-dimensional block after {MAX_REDRAWS} draws"
    )))
}

fn intertwiner_exists(ops: &[DMatrix<f64>], a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    // T: block a -> block b with T A_a = A_b T
    let (da, db) = (a.ncols(), b.ncols());
    let ia = DMatrix::<f64>::identity(da, da);
    let ib = DMatrix::<f64>::identity(db, db);
    let mut sys = DMatrix::zeros(db * da * ops.len(), db * da);
    for (k, op) in ops.iter().enumerate() {
        let aa = a.transpose() * op * a;
        let bb = b.transpose() * op * b;
        let block = aa.transpose().kronecker(&ib) - ia.kronecker(&bb);
        sys.view_mut((k * da * db, 0), (da * db, da * db)).copy_from(&block);
    }
    if ops.is_empty() {
        return true;
    }
    rank_and_kernel(&sys, TAU_RANK).nullity() > 0
}

/// Decomposition of the isotropy representation into irreducible, mutually Q-orthogonal blocks.
pub fn decompose_irreducibles(model: &IsometryModel, seed: u64) -> Result<Decomposition> {
    let n = model.tangent_dim();
    let (_, l_inv, ops) = orthonormal_ops(model)?;
    let (mut raw, inconclusive) = decompose_skew(&ops, n, seed)?;
    raw.sort_by(|a, b| a.trivial.cmp(&b.trivial).then(b.basis.ncols().cmp(&a.basis.ncols())));
    let mut equivalent_pairs = Vec::new();
    for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            if raw[i].basis.ncols() == raw[j].basis.ncols()
                && raw[i].trivial == raw[j].trivial
                && intertwiner_exists(&ops, &raw[i].basis, &raw[j].basis)
            {
                equivalent_pairs.push((i, j));
            }
        }
    }
    let back = l_inv.transpose();
    let blocks = raw
        .into_iter()
        .map(|r| Block {
            dim: r.basis.ncols(),
            kind: r.kind,
            trivial: r.trivial,
            subspace: Subspace::from_span(&(&back * &r.basis)),
        })
        .collect();
    Ok(Decomposition { blocks, equivalent_pairs, inconclusive })
}

/// Q-symmetric intertwiners; every invariant metric is `Q S` for some `S` in their span.
pub fn invariant_metric_space(model: &IsometryModel) -> Result<InvariantMetricSpace> {
    let n = model.tangent_dim();
    let (l, l_inv, ops) = orthonormal_ops(model)?;
    let sym = commutant_kernel(&ops, n, true);
    if sym.inconclusive {
        return Err(Error::Inconclusive("symmetric commutant rank is inside the tolerance band".into()));
    }
    let basis: Vec<DMatrix<f64>> = sym
        .mats
        .iter()
        .map(|s| l_inv.transpose() * s * l.transpose())
        .collect();
    Ok(InvariantMetricSpace { background: model.metric().clone(), dim: basis.len(), sym_commutant_basis: basis })
}

/// `background + sum c_i background S_i` with `c_i ~ U[-spread, spread]`, redrawn until positive definite.
pub fn sample_invariant_metric(space: &InvariantMetricSpace, seed: u64, spread: f64) -> Result<DMatrix<f64>> {
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(invalid("spread must be a finite non-negative number"));
    }
    if spread == 0.0 || space.dim == 0 {
        return Ok(space.background.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_PD_RETRIES {
        let mut m = space.background.clone();
        for s in &space.sym_commutant_basis {
            let c: f64 = rng.gen_range(-spread..=spread);
            m += space.form(s) * c;
        }
        let eig = SymmetricEigen::new(m.clone());
        let max = eig.eigenvalues.max();
        if eig.eigenvalues.min() > 1e-6 * max && max > 0.0 {
            return Ok(m);
        }
    }
    Err(invalid(format!(
        "{MAX_PD_RETRIES} consecutive draws were not positive definite; try a spread smaller than {spread}"
    )))
}

/// Joint kernel of the isotropy operators.
pub fn fixed_subspace(model: &IsometryModel) -> Result<Subspace> {
    let n = model.tangent_dim();
    let ops = model.isotropy_operators()?;
    if ops.is_empty() {
        return Ok(Subspace::full(n));
    }
    let mut stacked = DMatrix::zeros(n * ops.len(), n);
    for (k, a) in ops.iter().enumerate() {
        stacked.view_mut((k * n, 0), (n, n)).copy_from(a);
    }
    Ok(rank_and_kernel(&stacked, TAU_RANK).kernel)
}

/// Largest `|A^T F + F A|` over isotropy operators `A`, relative to `|F|`.
pub fn form_invariance_residual(model: &IsometryModel, form: &DMatrix<f64>) -> Result<f64> {
    let scale = max_abs(form).max(f64::MIN_POSITIVE);
    Ok(model
        .isotropy_operators()?
        .iter()
        .map(|a| max_abs(&(a.transpose() * form + form * a)) / (scale * max_abs(a).max(1.0)))
        .fold(0.0, f64::max))
}
