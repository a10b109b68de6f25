use std::path::Path;

use coindex_core::catalog::{self, CatalogEntry, Params};
use coindex_core::geometry::oracle::{fd_oracle, MatrixRealization};
use coindex_core::isotropy::invariant_metric_space;
use coindex_core::report::{to_json, to_json_line};
use coindex_core::sampling::{sample_one, summarize, SampleRecord, SamplingSummary};
use coindex_core::symmetry::Status;
use coindex_core::verify::{
    admissibility_row, assemble_table, verify_entry, verify_model, AdmissibilityTable, VerifyConfig, VerifyReport,
    SCHEMA_VERSION, TABLE_ROWS,
};
use coindex_core::{Error, IsometryModel, Tolerances};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{CaseArgs, Cli, Command, Format, Global, OracleArgs, SampleArgs};
use crate::output::{csv_text, emit, opt, write_atomic};
use crate::{EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILED, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownCase(_) | Error::InvalidInput(_) | Error::Precondition(_) => EXIT_USAGE,
            Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
            _ => EXIT_FAILED,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult = Result<u8, CliError>;

fn status_code(s: Status) -> u8 {
    match s {
        Status::Verified => EXIT_OK,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
        Status::Failed => EXIT_FAILED,
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::Inconclusive => "inconclusive",
        Status::Failed => "failed",
    }
}

fn config(g: &Global) -> Result<VerifyConfig, CliError> {
    for (name, v) in [("--tol-rank", g.tol_rank), ("--tol-curv", g.tol_curv)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::usage(format!("{name} must be a positive number, got {v}")));
        }
    }
    Ok(VerifyConfig {
        tol: Tolerances { rank: g.tol_rank, curv: g.tol_curv, ..Tolerances::default() },
        seed: g.seed(),
        samples: g.samples,
        ..VerifyConfig::default()
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::io(format!("cannot start worker threads: {e}")))
}

pub fn dispatch(cli: &Cli) -> CliResult {
    let g = &cli.global;
    match &cli.command {
        Command::List => cmd_list(g),
        Command::Show(c) => cmd_show(g, c),
        Command::Verify(c) => cmd_verify(g, c),
        Command::VerifyAll => cmd_verify_all(g),
        Command::Table => cmd_table(g),
        Command::Sample(s) => cmd_sample(g, s),
        Command::Oracle(o) => cmd_oracle(g, o),
    }
}

/// A catalog entry or a model read from a file.
enum Source {
    Catalog(Box<CatalogEntry>),
    File { label: String, model: IsometryModel },
}

impl Source {
    fn label(&self) -> &str {
        match self {
            Source::Catalog(e) => &e.id,
            Source::File { label, .. } => label,
        }
    }

    fn model(&self) -> &IsometryModel {
        match self {
            Source::Catalog(e) => &e.model,
            Source::File { model, .. } => model,
        }
    }
}

fn looks_like_file(case: &str) -> bool {
    case.ends_with(".json") || case.contains(std::path::MAIN_SEPARATOR) || Path::new(case).is_file()
}

fn load(c: &CaseArgs) -> Result<Source, CliError> {
    let params = c.params.to_params();
    if looks_like_file(&c.case) {
        if !params.is_empty() {
            return Err(CliError::usage("parameters apply to catalog cases, not model files"));
        }
        let text = std::fs::read_to_string(&c.case)
            .map_err(|e| CliError::usage(format!("cannot read model file {}: {e}", c.case)))?;
        let model: IsometryModel = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid model file {}: {e}", c.case)))?;
        return Ok(Source::File { label: c.case.clone(), model });
    }
    Ok(Source::Catalog(Box::new(catalog::build(&c.case, &params)?)))
}

#[derive(Serialize)]
struct CaseList {
    schema: u32,
    cases: Vec<catalog::CaseInfo>,
}

fn cmd_list(g: &Global) -> CliResult {
    let cases = catalog::list();
    let text = match g.format {
        Format::Json => to_json(&CaseList { schema: SCHEMA_VERSION, cases }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = cases
                .iter()
                .map(|c| {
                    let ps: Vec<String> = c.params.iter().map(|p| format!("{}={}", p.name, p.default)).collect();
                    vec![c.id.into(), ps.join(" "), c.group_case.to_string(), c.summary.into()]
                })
                .collect();
            csv_text(&["id", "params", "group_case", "summary"], &rows)
        }
        Format::Text => {
            let mut s = String::new();
            for c in &cases {
                s += &format!("{:<16} {}\n", c.id, c.summary);
                for p in &c.params {
                    s += &format!("{:<16}   --param {}={} ({})\n", "", p.name, p.default, p.domain);
                }
            }
            s
        }
    };
    emit(g.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ShowDoc<'a> {
    schema: u32,
    id: &'a str,
    title: &'a str,
    params: &'a Params,
    verdict_source: catalog::VerdictSource,
    notes: &'a [String],
    expectations: &'a coindex_core::Expectations,
    model: &'a IsometryModel,
}

fn cmd_show(g: &Global, c: &CaseArgs) -> CliResult {
    let e = match load(c)? {
        Source::Catalog(e) => e,
        Source::File { model, label } => {
            let text = match g.format {
                Format::Json => to_json(&model),
                _ => format!(
                    "{label}: {}\nalgebra dim {}, tangent dim {}\n",
                    model.description(),
                    model.algebra_dim(),
                    model.tangent_dim()
                ),
            };
            emit(g.output.as_deref(), &text)?;
            return Ok(EXIT_OK);
        }
    };
    let text = match g.format {
        Format::Json => to_json(&ShowDoc {
            schema: SCHEMA_VERSION,
            id: &e.id,
            title: &e.title,
            params: &e.params,
            verdict_source: e.verdict_source,
            notes: &e.notes,
            expectations: &e.expectations,
            model: &e.model,
        }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = e.params.iter().map(|(k, v)| vec![e.id.clone(), k.clone(), v.to_string()]).collect();
            csv_text(&["id", "param", "value"], &rows)
        }
        Format::Text => {
            let x = &e.expectations;
            let mut s = format!("{} ({})\n", e.title, e.id);
            for (k, v) in &e.params {
                s += &format!("  {k} = {v}\n");
            }
            s += &format!(
                "  algebra dim {}, tangent dim {}\n  expected index {}, coindex {}, locally symmetric {}\n",
                e.model.algebra_dim(),
                e.model.tangent_dim(),
                opt(x.expected_index),
                opt(x.expected_coindex),
                opt(x.expect_locally_symmetric)
            );
            if !x.source.is_empty() {
                s += &format!("  source: {}\n", x.source);
            }
            for n in &e.notes {
                s += &format!("  note: {n}\n");
            }
            s
        }
    };
    emit(g.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn verify_source(src: &Source, cfg: &VerifyConfig) -> Result<VerifyReport, Error> {
    match src {
        Source::Catalog(e) => verify_entry(e, cfg),
        Source::File { label, model } => verify_model(label, model, None, cfg),
    }
}

fn report_text(r: &VerifyReport) -> String {
    let s = &r.symmetry;
    let mut t = format!(
        "{} [{}]\n  index {}  coindex {}  ({})\n  locally symmetric {} (nabla R residual {:.3e})\n  naturally reductive {} (residual {:.3e})\n",
        r.case, r.title, s.index, s.coindex, s.relative_to, s.locally_symmetric, s.nabla_r_residual, s.naturally_reductive,
        s.naturally_reductive_residual
    );
    let blocks: Vec<String> = s
        .leaf
        .curvature_profile
        .iter()
        .map(|b| match b.curvature {
            Some(k) => format!("{}-dim K={k:.6}", b.dim),
            None => format!("{}-dim non-constant", b.dim),
        })
        .collect();
    t += &format!("  leaf {}: {}\n", s.leaf.dim, blocks.join(", "));
    if let Some(iso) = &r.isotropy {
        t += &format!(
            "  isotropy blocks {:?}, fixed dim {}, invariant metrics {}\n",
            iso.block_dims,
            iso.fixed_dim,
            opt(iso.invariant_metric_dim)
        );
    }
    if let Some(sm) = &r.sampling {
        t += &format!("  sampled co-index histogram {:?} over {} samples\n", sm.coindex_histogram, sm.samples);
    }
    for c in r.all_checks() {
        t += &format!("  [{:<12}] {}: expected {}, observed {}\n", status_name(c.status), c.name, c.expected, c.observed);
    }
    for n in &r.notes {
        t += &format!("  note: {n}\n");
    }
    t += &format!("  status: {}\n", status_name(r.status));
    t
}

fn report_rows(r: &VerifyReport) -> Vec<Vec<String>> {
    r.all_checks()
        .map(|c| vec![r.case.clone(), c.name.clone(), c.expected.clone(), c.observed.clone(), status_name(c.status).into()])
        .collect()
}

fn cmd_verify(g: &Global, c: &CaseArgs) -> CliResult {
    let cfg = config(g)?;
    let src = load(c)?;
    let r = verify_source(&src, &cfg)?;
    let text = match g.format {
        Format::Json => to_json(&r),
        Format::Csv => csv_text(&["case", "check", "expected", "observed", "status"], &report_rows(&r)),
        Format::Text => report_text(&r),
    };
    emit(g.output.as_deref(), &text)?;
    Ok(status_code(r.status))
}

#[derive(Serialize)]
struct CaseOutcome {
    case: String,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<VerifyReport>,
}

#[derive(Serialize)]
struct AllReports {
    schema: u32,
    seed: u64,
    tolerances: Tolerances,
    cases: Vec<CaseOutcome>,
    status: Status,
}

fn cmd_verify_all(g: &Global) -> CliResult {
    let cfg = config(g)?;
    let ids: Vec<&'static str> = catalog::list().into_iter().map(|c| c.id).collect();
    let outcomes: Vec<CaseOutcome> = pool(g.jobs)?.install(|| {
        ids.par_iter()
            .map(|id| match catalog::build_default(id).and_then(|e| verify_entry(&e, &cfg)) {
                Ok(r) => CaseOutcome { case: id.to_string(), status: r.status, error: None, report: Some(r) },
                Err(e) => CaseOutcome { case: id.to_string(), status: Status::Failed, error: Some(e.to_string()), report: None },
            })
            .collect()
    });
    let status = outcomes.iter().fold(Status::Verified, |s, o| s.combine(o.status));
    let text = match g.format {
        Format::Json => to_json(&AllReports { schema: SCHEMA_VERSION, seed: cfg.seed, tolerances: cfg.tol, cases: outcomes, status }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| {
                    let r = o.report.as_ref();
                    let failing: Vec<String> = r
                        .map(|r| r.all_checks().filter(|c| c.status != Status::Verified).map(|c| c.name.clone()).collect())
                        .unwrap_or_default();
                    vec![
                        o.case.clone(),
                        opt(r.map(|r| r.symmetry.index)),
                        opt(r.map(|r| r.symmetry.coindex)),
                        status_name(o.status).into(),
                        failing.join(" "),
                        o.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            csv_text(&["case", "index", "coindex", "status", "unverified_checks", "error"], &rows)
        }
        Format::Text => {
            let mut s = String::new();
            for o in &outcomes {
                match &o.report {
                    Some(r) => {
                        s += &format!("{:<16} index {:>2}  coindex {:>2}  {}", o.case, r.symmetry.index, r.symmetry.coindex, status_name(o.status));
                        for c in r.all_checks().filter(|c| c.status != Status::Verified) {
                            s += &format!("  [{} expected {} observed {}]", c.name, c.expected, c.observed);
                        }
                        s.push('\n');
                    }
                    None => s += &format!("{:<16} failed: {}\n", o.case, o.error.as_deref().unwrap_or("")),
                }
            }
            s += &format!("status: {}\n", status_name(status));
            s
        }
    };
    emit(g.output.as_deref(), &text)?;
    Ok(status_code(status))
}

fn table_text(t: &AdmissibilityTable) -> String {
    let mut s = format!("{:<21} {:<7} {:<13} {:<14} {:>5} {:>7}  {:<12} evidence\n", "manifold", "verdict", "source", "witness", "index", "coindex", "status");
    for r in &t.rows {
        let src = match r.verdict_source {
            catalog::VerdictSource::Computed => "computed",
            catalog::VerdictSource::PaperTheorem => "paper-theorem",
        };
        s += &format!(
            "{:<21} {:<7} {:<13} {:<14} {:>5} {:>7}  {:<12} {}\n",
            r.manifold,
            r.verdict,
            src,
            r.witness,
            opt(r.index),
            opt(r.coindex),
            status_name(r.status),
            r.error.as_deref().unwrap_or(&r.evidence)
        );
    }
    s += &format!("{} yes / {} no; status {} ({})\n", t.yes, t.no, status_name(t.status), t.relative_to);
    s
}

fn cmd_table(g: &Global) -> CliResult {
    let cfg = config(g)?;
    let rows = pool(g.jobs)?.install(|| (0..TABLE_ROWS).into_par_iter().map(|i| admissibility_row(i, &cfg)).collect());
    let t = assemble_table(&cfg, rows);
    let text = match g.format {
        Format::Json => to_json(&t),
        Format::Csv => {
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.manifold.into(),
                        r.verdict.into(),
                        to_json_line(&r.verdict_source).trim_matches('"').into(),
                        r.witness.clone(),
                        opt(r.index),
                        opt(r.coindex),
                        status_name(r.status).into(),
                        r.error.clone().unwrap_or_else(|| r.evidence.clone()),
                    ]
                })
                .collect();
            csv_text(&["manifold", "verdict", "verdict_source", "witness", "index", "coindex", "status", "evidence"], &rows)
        }
        Format::Text => table_text(&t),
    };
    emit(g.output.as_deref(), &text)?;
    Ok(status_code(t.status))
}

fn summary_text(s: &SamplingSummary) -> String {
    format!(
        "{}: {} samples (seed {}, spread {}), invariant metric space dim {}, co-index histogram {:?}, co-index 4 with 5-dim leaf: {}, proportional to background: {}, inconclusive {}, errors {}\n",
        s.case,
        s.samples,
        s.seed,
        s.spread,
        s.invariant_metric_dim,
        s.coindex_histogram,
        s.coindex4_leaf5,
        s.proportional_to_background,
        s.inconclusive,
        s.errors
    )
}

fn cmd_sample(g: &Global, a: &SampleArgs) -> CliResult {
    let cfg = config(g)?;
    if !(a.spread.is_finite() && a.spread >= 0.0) {
        return Err(CliError::usage(format!("--spread must be a non-negative number, got {}", a.spread)));
    }
    let src = load(&a.case)?;
    let label = src.label().to_string();
    let model = src.model();
    let space = invariant_metric_space(model)?;
    let records: Vec<SampleRecord> = pool(g.jobs)?.install(|| {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| sample_one(&label, model, &space, i, cfg.seed, a.spread, &cfg.tol))
            .collect()
    });
    let summary = summarize(&label, &records, cfg.seed, a.spread, space.dim);
    let text = match g.format {
        Format::Json => records.iter().map(|r| to_json_line(r) + "\n").collect(),
        Format::Csv => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    vec![
                        r.sample.to_string(),
                        r.seed.to_string(),
                        opt(r.index),
                        opt(r.coindex),
                        opt(r.leaf_dim),
                        opt(r.proportional_to_background),
                        status_name(r.status).into(),
                        r.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            if rows.is_empty() {
                String::new()
            } else {
                csv_text(&["sample", "seed", "index", "coindex", "leaf_dim", "proportional", "status", "error"], &rows)
            }
        }
        Format::Text => records
            .iter()
            .map(|r| {
                format!(
                    "sample {:>4} seed {:>20} index {:>2} coindex {:>2} {}{}\n",
                    r.sample,
                    r.seed,
                    opt(r.index),
                    opt(r.coindex),
                    status_name(r.status),
                    r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
                )
            })
            .collect(),
    };
    emit(g.output.as_deref(), &text)?;
    eprint!("{}", summary_text(&summary));
    if let Some(p) = &a.summary {
        write_atomic(p, to_json(&summary).as_bytes()).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display())))?;
    }
    let code = if summary.errors > 0 {
        EXIT_FAILED
    } else if summary.inconclusive > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    Ok(code)
}

/// The left-invariant group model the oracle runs on.
fn oracle_model(src: &Source) -> Result<IsometryModel, CliError> {
    if let Source::Catalog(e) = src {
        if e.id == "su2" {
            // the catalog may enlarge the Killing algebra; the oracle needs the plain group model
            let p = &e.params;
            return Ok(catalog::su2_left_invariant(p["lambda"], p["mu"], p["nu"])?);
        }
    }
    let m = src.model();
    if !m.is_left_invariant_group() {
        return Err(CliError::usage(format!("`{}` is not a left-invariant metric on a group; the oracle needs one", src.label())));
    }
    Ok(m.clone())
}

fn cmd_oracle(g: &Global, a: &OracleArgs) -> CliResult {
    config(g)?;
    if !(a.step.is_finite() && a.step > 0.0) {
        return Err(CliError::usage(format!("--step must be positive, got {}", a.step)));
    }
    let src = load(&a.case)?;
    let model = oracle_model(&src)?;
    let r = MatrixRealization::for_algebra(model.algebra())
        .ok_or_else(|| CliError::usage("no matrix realization is known for this algebra (supported: su(2), so(n))"))?;
    let rep = fd_oracle(&model, &r, a.step)?;
    let text = match g.format {
        Format::Json => to_json(&rep),
        Format::Csv => csv_text(
            &["case", "step", "max_deviation", "tolerance", "error_estimate", "passed"],
            &[vec![
                src.label().into(),
                rep.step.to_string(),
                rep.max_deviation.to_string(),
                rep.tolerance.to_string(),
                rep.error_estimate.to_string(),
                rep.passed.to_string(),
            ]],
        ),
        Format::Text => format!(
            "{}: max deviation {:.3e} (tolerance {:.3e}, step {:e}, estimated error {:.3e}) {}{}\n",
            src.label(),
            rep.max_deviation,
            rep.tolerance,
            rep.step,
            rep.error_estimate,
            if rep.passed { "passed" } else { "FAILED" },
            rep.warning.as_deref().map(|w| format!("\n  warning: {w}")).unwrap_or_default()
        ),
    };
    emit(g.output.as_deref(), &text)?;
    if let Some(w) = &rep.warning {
        eprintln!("coindex-lab: warning: {w}");
    }
    Ok(if rep.passed { EXIT_OK } else { EXIT_FAILED })
}
