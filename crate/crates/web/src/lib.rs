//! Three engine operations for the static demo page in `www/`.
//!
//! Each returns a JSON string; the page parses it. The plain functions are usable
//! natively and are what the tests exercise.

use std::collections::BTreeMap;

use coindex_core::catalog;
use coindex_core::report::to_json_line;
use coindex_core::sampling::{run_sampling, DEFAULT_SPREAD};
use coindex_core::symmetry::{symmetry_data, Status};
use coindex_core::verify::{verify_entry, VerifyConfig};
use coindex_core::Tolerances;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Su2Result {
    family: String,
    index: usize,
    coindex: usize,
    locally_symmetric: bool,
    leaf_dim: usize,
    expected_index: Option<usize>,
    status: Status,
    relative_to: &'static str,
}

pub fn su2_index_json(lambda: f64, mu: f64, nu: f64) -> Result<String, String> {
    let fam = catalog::su2_family(lambda, mu, nu).map_err(|e| e.to_string())?;
    let e = catalog::entry_su2(lambda, mu, nu).map_err(|e| e.to_string())?;
    let r = symmetry_data(&e.model, Some(&e.expectations), &Tolerances::default()).map_err(|e| e.to_string())?;
    Ok(to_json_line(&Su2Result {
        family: format!("{fam:?}"),
        index: r.index,
        coindex: r.coindex,
        locally_symmetric: r.locally_symmetric,
        leaf_dim: r.leaf.dim,
        expected_index: e.expectations.expected_index,
        status: r.status,
        relative_to: r.relative_to,
    }))
}

#[derive(Serialize)]
struct CheckLine {
    name: String,
    expected: String,
    observed: String,
    status: Status,
}

#[derive(Serialize)]
struct CaseResult {
    case: String,
    title: String,
    index: usize,
    coindex: usize,
    checks: Vec<CheckLine>,
    notes: Vec<String>,
    status: Status,
}

/// Case ids for the page's selector.
pub fn case_ids() -> Vec<&'static str> {
    catalog::list().into_iter().map(|c| c.id).collect()
}

pub fn verify_case_json(id: &str, samples: usize) -> Result<String, String> {
    let e = catalog::build_default(id).map_err(|e| e.to_string())?;
    let cfg = VerifyConfig { samples, ..VerifyConfig::default() };
    let r = verify_entry(&e, &cfg).map_err(|e| e.to_string())?;
    Ok(to_json_line(&CaseResult {
        case: r.case.clone(),
        title: r.title.clone(),
        index: r.symmetry.index,
        coindex: r.symmetry.coindex,
        checks: r
            .all_checks()
            .map(|c| CheckLine { name: c.name.clone(), expected: c.expected.clone(), observed: c.observed.clone(), status: c.status })
            .collect(),
        notes: r.notes.clone(),
        status: r.status,
    }))
}

#[derive(Serialize)]
struct Histogram {
    samples: usize,
    seed: u64,
    invariant_metric_dim: usize,
    coindex_histogram: BTreeMap<usize, usize>,
    coindex4_leaf5: usize,
    errors: usize,
}

pub fn so5_so2_histogram_json(samples: usize, seed: u64, weight: f64) -> Result<String, String> {
    let m = catalog::so5_so2_model(weight).map_err(|e| e.to_string())?;
    let (_, s) = run_sampling("so5-so2", &m, samples, seed, DEFAULT_SPREAD, &Tolerances::default()).map_err(|e| e.to_string())?;
    Ok(to_json_line(&Histogram {
        samples: s.samples,
        seed: s.seed,
        invariant_metric_dim: s.invariant_metric_dim,
        coindex_histogram: s.coindex_histogram,
        coindex4_leaf5: s.coindex4_leaf5,
        errors: s.errors,
    }))
}

#[wasm_bindgen]
pub fn su2_index(lambda: f64, mu: f64, nu: f64) -> Result<String, JsError> {
    su2_index_json(lambda, mu, nu).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn verify_case(id: &str) -> Result<String, JsError> {
    verify_case_json(id, 20).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cases() -> String {
    to_json_line(&case_ids())
}

/// `seed` arrives as a double from JavaScript; it is truncated to an integer.
#[wasm_bindgen]
pub fn so5_so2_histogram(samples: usize, seed: f64, weight: f64) -> Result<String, JsError> {
    so5_so2_histogram_json(samples, seed as u64, weight).map_err(|e| JsError::new(&e))
}
