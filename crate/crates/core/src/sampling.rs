//! Seeded sampling of invariant metrics and their relative symmetry invariants.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::isotropy::{invariant_metric_space, sample_invariant_metric, InvariantMetricSpace};
use crate::model::IsometryModel;
use crate::symmetry::{cartan_subspace, Status};
use crate::tolerance::Tolerances;
use crate::Result;

pub const DEFAULT_SPREAD: f64 = 0.5;

/// Per-sample seed: SplitMix64 of `master + i`.
pub fn sample_seed(master: u64, i: usize) -> u64 {
    let mut z = master.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub case: String,
    pub sample: usize,
    pub seed: u64,
    pub spread: f64,
    pub index: Option<usize>,
    pub coindex: Option<usize>,
    pub leaf_dim: Option<usize>,
    /// The sampled metric is a multiple of the background metric.
    pub proportional_to_background: Option<bool>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn proportional(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    let r = a.dot(b) / b.dot(b);
    (a - b * r).amax() <= 1e-10 * a.amax()
}

/// One sample: draws an invariant metric and computes the relative index.
pub fn sample_one(
    case: &str,
    model: &IsometryModel,
    space: &InvariantMetricSpace,
    sample: usize,
    master_seed: u64,
    spread: f64,
    tol: &Tolerances,
) -> SampleRecord {
    let seed = sample_seed(master_seed, sample);
    let mut rec = SampleRecord {
        case: case.into(),
        sample,
        seed,
        spread,
        index: None,
        coindex: None,
        leaf_dim: None,
        proportional_to_background: None,
        status: Status::Failed,
        error: None,
    };
    let run = || -> Result<(usize, bool, bool)> {
        let metric = sample_invariant_metric(space, seed, spread)?;
        let m = model.with_metric(&metric)?;
        let c = cartan_subspace(&m, tol.rank);
        let index = c.p.image(m.ev()).dim();
        Ok((index, c.inconclusive, proportional(&metric, &space.background)))
    };
    match run() {
        Ok((index, inconclusive, prop)) => {
            rec.index = Some(index);
            rec.coindex = Some(model.tangent_dim() - index);
            rec.leaf_dim = Some(index);
            rec.proportional_to_background = Some(prop);
            rec.status = if inconclusive { Status::Inconclusive } else { Status::Verified };
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplingSummary {
    pub case: String,
    pub samples: usize,
    pub seed: u64,
    pub spread: f64,
    pub invariant_metric_dim: usize,
    /// Co-index value to number of samples.
    pub coindex_histogram: BTreeMap<usize, usize>,
    /// Samples with co-index 4 and a 5-dimensional leaf.
    pub coindex4_leaf5: usize,
    pub proportional_to_background: usize,
    pub inconclusive: usize,
    pub errors: usize,
    pub note: String,
}

pub fn summarize(case: &str, records: &[SampleRecord], seed: u64, spread: f64, space_dim: usize) -> SamplingSummary {
    let mut hist = BTreeMap::new();
    for r in records {
        if let Some(c) = r.coindex {
            *hist.entry(c).or_insert(0) += 1;
        }
    }
    SamplingSummary {
        case: case.into(),
        samples: records.len(),
        seed,
        spread,
        invariant_metric_dim: space_dim,
        coindex_histogram: hist,
        coindex4_leaf5: records.iter().filter(|r| r.coindex == Some(4) && r.leaf_dim == Some(5)).count(),
        proportional_to_background: records.iter().filter(|r| r.proportional_to_background == Some(true)).count(),
        inconclusive: records.iter().filter(|r| r.status == Status::Inconclusive).count(),
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        note: "evidence from sampled invariant metrics of the supplied presentation only; not a proof".into(),
    }
}

/// Sequential run over `n` samples.
pub fn run_sampling(case: &str, model: &IsometryModel, n: usize, seed: u64, spread: f64, tol: &Tolerances) -> Result<(Vec<SampleRecord>, SamplingSummary)> {
    let space = invariant_metric_space(model)?;
    let records: Vec<SampleRecord> = (0..n).map(|i| sample_one(case, model, &space, i, seed, spread, tol)).collect();
    let summary = summarize(case, &records, seed, spread, space.dim);
    Ok((records, summary))
}
