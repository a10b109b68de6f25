//! Full verification of a model against its expectations, and the admissibility table.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::catalog::{self, CatalogEntry, Params, VerdictSource};
use crate::isotropy::{decompose_irreducibles, fixed_subspace, invariant_metric_space, BlockKind};
use crate::model::{Expectations, IsometryModel};
use crate::sampling::{run_sampling, SampleRecord, SamplingSummary, DEFAULT_SPREAD};
use crate::symmetry::{
    strongly_symmetric_check, symmetry_data, symmetry_ideal, Check, IdealResult, Status, StrongSymmetry,
    SymmetryReport, DEFAULT_SEED, IDEAL_MAX_SAMPLES,
};
use crate::tolerance::Tolerances;
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyConfig {
    pub tol: Tolerances,
    pub seed: u64,
    /// Metric samples drawn for cases that carry a sampling plan.
    pub samples: usize,
    pub spread: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { tol: Tolerances::default(), seed: DEFAULT_SEED, samples: DEFAULT_SAMPLES, spread: DEFAULT_SPREAD }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotropySummary {
    pub block_dims: Vec<usize>,
    pub block_kinds: Vec<BlockKind>,
    pub trivial_blocks: usize,
    pub equivalent_pairs: Vec<(usize, usize)>,
    pub fixed_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_metric_dim: Option<usize>,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub case: String,
    pub title: String,
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict_source: Option<VerdictSource>,
    pub notes: Vec<String>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub symmetry: SymmetryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<IsotropySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry_ideal: Option<IdealResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strongly_symmetric: Option<StrongSymmetry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSummary>,
    /// Checks beyond those in `symmetry.checks`.
    pub checks: Vec<Check>,
    pub status: Status,
}

impl VerifyReport {
    fn push(&mut self, c: Check) {
        self.status = self.status.combine(c.status);
        self.checks.push(c);
    }

    /// Every check, the symmetry-level ones first.
    pub fn all_checks(&self) -> impl Iterator<Item = &Check> {
        self.symmetry.checks.iter().chain(self.checks.iter())
    }
}

fn sorted_desc(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn fmt_dims(v: &[usize]) -> String {
    format!("{v:?}")
}

/// Runs every computation on `model` and folds all expectation checks into one status.
pub fn verify_model(case: &str, model: &IsometryModel, exp: Option<&Expectations>, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let symmetry = symmetry_data(model, exp, &cfg.tol)?;
    let mut rep = VerifyReport {
        schema: SCHEMA_VERSION,
        case: case.into(),
        title: model.description().into(),
        params: Params::new(),
        verdict_source: None,
        notes: Vec::new(),
        seed: cfg.seed,
        tolerances: cfg.tol,
        status: symmetry.status,
        symmetry,
        isotropy: None,
        symmetry_ideal: None,
        strongly_symmetric: None,
        sampling: None,
        checks: Vec::new(),
    };
    let model = if model.complement().is_some() { model.clone() } else { model.clone().with_default_complement()? };

    match isotropy_summary(&model, cfg.seed) {
        Ok(iso) => {
            if let Some(e) = exp {
                if let Some(want) = e.expected_fixed_dim {
                    rep.push(Check::new("fixed_dim", want, iso.fixed_dim, Status::from_bool(want == iso.fixed_dim)));
                }
                if let Some(want) = &e.expected_isotropy_blocks {
                    let got = sorted_desc(iso.block_dims.clone());
                    let status = if iso.inconclusive { Status::Inconclusive } else { Status::from_bool(sorted_desc(want.clone()) == got) };
                    rep.push(Check::new("isotropy_blocks", fmt_dims(want), fmt_dims(&got), status));
                }
                if let Some(want) = e.expected_invariant_metric_dim {
                    let (obs, status) = match iso.invariant_metric_dim {
                        Some(d) => (d.to_string(), Status::from_bool(d == want)),
                        None => ("undetermined".to_string(), Status::Inconclusive),
                    };
                    rep.push(Check::new("invariant_metric_dim", want, obs, status));
                }
            }
            rep.isotropy = Some(iso);
        }
        Err(err) => rep.push(Check::new("isotropy_decomposition", "computed", err.to_string(), Status::Inconclusive)),
    }

    let s_o = rep.symmetry.s_o.clone();
    match symmetry_ideal(&model, &s_o, IDEAL_MAX_SAMPLES, cfg.seed) {
        Ok(ideal) => {
            rep.push(Check::new("symmetry_ideal", "ideal, converged", format!("dim {}, converged {}", ideal.ideal.dim(), ideal.converged), ideal.status));
            rep.symmetry_ideal = Some(ideal);
        }
        Err(err) => rep.push(Check::new("symmetry_ideal", "ideal, converged", err.to_string(), Status::Failed)),
    }

    match strongly_symmetric_check(&model, &s_o, &cfg.tol) {
        Ok(st) => {
            let status = if st.inconclusive { Status::Inconclusive } else { Status::from_bool(st.holds) };
            rep.push(Check::new("s_o_strongly_symmetric", true, st.holds, status));
            rep.strongly_symmetric = Some(st);
        }
        Err(err) => rep.push(Check::new("s_o_strongly_symmetric", true, err.to_string(), Status::Failed)),
    }
    Ok(rep)
}

pub fn isotropy_summary(model: &IsometryModel, seed: u64) -> Result<IsotropySummary> {
    let dec = decompose_irreducibles(model, seed)?;
    let fixed = fixed_subspace(model)?.dim();
    let (metric_dim, metric_inconclusive) = match invariant_metric_space(model) {
        Ok(s) => (Some(s.dim), false),
        Err(crate::Error::Inconclusive(_)) => (None, true),
        Err(e) => return Err(e),
    };
    Ok(IsotropySummary {
        block_dims: dec.dims(),
        block_kinds: dec.blocks.iter().map(|b| b.kind).collect(),
        trivial_blocks: dec.blocks.iter().filter(|b| b.trivial).count(),
        equivalent_pairs: dec.equivalent_pairs.clone(),
        fixed_dim: fixed,
        invariant_metric_dim: metric_dim,
        inconclusive: dec.inconclusive || metric_inconclusive,
    })
}

/// Catalog cases that carry a sampling plan over invariant metrics.
pub fn has_sampling_plan(id: &str) -> bool {
    id == "so5-so2"
}

/// Verifies a catalog entry, running its sampling plan when it has one.
pub fn verify_entry(entry: &CatalogEntry, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut rep = verify_model(&entry.id, &entry.model, Some(&entry.expectations), cfg)?;
    rep.title = entry.title.clone();
    rep.params = entry.params.clone();
    rep.verdict_source = Some(entry.verdict_source);
    rep.notes = entry.notes.clone();
    if has_sampling_plan(&entry.id) {
        let (_, summary) = sampling_records(entry, cfg)?;
        let clean = summary.errors == 0;
        let status = if !clean {
            Status::Failed
        } else if summary.inconclusive > 0 {
            Status::Inconclusive
        } else {
            Status::from_bool(summary.coindex4_leaf5 == 0)
        };
        rep.push(Check::new(
            "sampled_coindex4_leaf5",
            0,
            format!("{} of {} samples", summary.coindex4_leaf5, summary.samples),
            status,
        ));
        rep.sampling = Some(summary);
    }
    Ok(rep)
}

pub fn sampling_records(entry: &CatalogEntry, cfg: &VerifyConfig) -> Result<(Vec<SampleRecord>, SamplingSummary)> {
    run_sampling(&entry.id, &entry.model, cfg.samples, cfg.seed, cfg.spread, &cfg.tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub manifold: &'static str,
    pub verdict: &'static str,
    pub verdict_source: VerdictSource,
    pub witness: String,
    pub witness_params: Params,
    pub index: Option<usize>,
    pub coindex: Option<usize>,
    pub evidence: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityTable {
    pub schema: u32,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub samples: usize,
    pub relative_to: &'static str,
    pub rows: Vec<TableRow>,
    pub yes: usize,
    pub no: usize,
    pub status: Status,
}

struct RowPlan {
    manifold: &'static str,
    yes: bool,
    case: &'static str,
    params: &'static [(&'static str, f64)],
}

const ROWS: [RowPlan; 7] = [
    RowPlan { manifold: "SO(5)/SO(2)", yes: false, case: "so5-so2", params: &[] },
    RowPlan { manifold: "SO(5)/SO(3)", yes: true, case: "so5-so3", params: &[] },
    RowPlan { manifold: "SO(5)/(SO(2)xSO(2))", yes: true, case: "so5-so2so2", params: &[] },
    RowPlan { manifold: "SO(5)/(SO(3)xSO(2))", yes: false, case: "so5-so3so2", params: &[] },
    RowPlan { manifold: "SO(5)/SO(4)", yes: false, case: "so5-so4", params: &[] },
    RowPlan { manifold: "SO(4)", yes: true, case: "so4-product", params: &[] },
    RowPlan { manifold: "SO(3)^3", yes: true, case: "so3-cubed", params: &[] },
];

fn table_row(plan: &RowPlan, cfg: &VerifyConfig) -> TableRow {
    let given: Params = plan.params.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    let mut row = TableRow {
        manifold: plan.manifold,
        verdict: if plan.yes { "yes" } else { "no" },
        verdict_source: if plan.yes { VerdictSource::Computed } else { VerdictSource::PaperTheorem },
        witness: plan.case.into(),
        witness_params: given.clone(),
        index: None,
        coindex: None,
        evidence: String::new(),
        status: Status::Failed,
        error: None,
    };
    let run = || -> Result<(CatalogEntry, VerifyReport)> {
        let e = catalog::build(plan.case, &given)?;
        let r = verify_entry(&e, cfg)?;
        Ok((e, r))
    };
    match run() {
        Ok((entry, rep)) => {
            row.verdict_source = entry.verdict_source;
            row.witness_params = entry.params.clone();
            row.index = Some(rep.symmetry.index);
            row.coindex = Some(rep.symmetry.coindex);
            row.status = rep.status;
            if plan.yes && rep.symmetry.coindex != 4 {
                row.status = Status::Failed;
            }
            row.evidence = if plan.yes {
                format!("computed witness with coindex {}", rep.symmetry.coindex)
            } else if let Some(s) = &rep.sampling {
                format!(
                    "{} sampled invariant metrics, {} with coindex 4 and a 5-dimensional leaf",
                    s.samples, s.coindex4_leaf5
                )
            } else {
                let dim = rep.isotropy.as_ref().and_then(|i| i.invariant_metric_dim);
                format!(
                    "invariant metrics: {}; coindex of the background metric {}",
                    dim.map_or("undetermined".into(), |d| d.to_string()),
                    rep.symmetry.coindex
                )
            };
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// The seven candidate manifolds with their verdicts and witnesses or evidence.
pub fn admissibility_table(cfg: &VerifyConfig) -> AdmissibilityTable {
    assemble_table(cfg, ROWS.iter().map(|p| table_row(p, cfg)).collect())
}

/// Row count, used by callers that compute rows in parallel with [`admissibility_row`].
pub const TABLE_ROWS: usize = 7;

pub fn admissibility_row(i: usize, cfg: &VerifyConfig) -> TableRow {
    table_row(&ROWS[i], cfg)
}

pub fn assemble_table(cfg: &VerifyConfig, rows: Vec<TableRow>) -> AdmissibilityTable {
    let status = rows.iter().fold(Status::Verified, |s, r| s.combine(r.status));
    AdmissibilityTable {
        schema: SCHEMA_VERSION,
        seed: cfg.seed,
        tolerances: cfg.tol,
        samples: cfg.samples,
        relative_to: crate::symmetry::RELATIVE_LABEL,
        yes: rows.iter().filter(|r| r.verdict == "yes").count(),
        no: rows.iter().filter(|r| r.verdict == "no").count(),
        rows,
        status,
    }
}

/// Per-check status counts, keyed by status name.
pub fn status_counts(rep: &VerifyReport) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for c in rep.all_checks() {
        let k = match c.status {
            Status::Verified => "verified",
            Status::Inconclusive => "inconclusive",
            Status::Failed => "failed",
        };
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so5_so3_verifies() {
        let e = catalog::build_default("so5-so3").unwrap();
        let r = verify_entry(&e, &VerifyConfig::default()).unwrap();
        for c in r.all_checks() {
            assert_eq!(c.status, Status::Verified, "{c:?}");
        }
        assert_eq!(r.isotropy.as_ref().unwrap().block_dims, vec![3, 3, 1]);
    }

    #[test]
    fn sampling_plan_runs() {
        let e = catalog::build_default("so5-so2").unwrap();
        let cfg = VerifyConfig { samples: 5, ..Default::default() };
        let r = verify_entry(&e, &cfg).unwrap();
        assert_eq!(r.sampling.as_ref().unwrap().samples, 5);
        assert!(r.checks.iter().any(|c| c.name == "sampled_coindex4_leaf5"));
    }
}
