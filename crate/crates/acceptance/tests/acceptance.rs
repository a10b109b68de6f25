//! The ten acceptance criteria. Prints one pass/fail line per criterion and exits
//! non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use coindex_core::catalog::{self, Params};
use coindex_core::geometry::oracle::{fd_oracle, fd_oracle_with, MatrixRealization, DEFAULT_STEP};
use coindex_core::geometry::{is_naturally_reductive, BracketConvention};
use coindex_core::isotropy::{decompose_irreducibles, fixed_subspace, invariant_metric_space};
use coindex_core::symmetry::{symmetry_data, SymmetryReport, DEFAULT_SEED};
use coindex_core::tolerance::{Tolerances, BAND_FACTOR, TAU_CURV};
use coindex_core::{selfcheck, IsometryModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn entry(id: &str, kv: &[(&str, f64)]) -> Result<catalog::CatalogEntry, String> {
    catalog::build(id, &params(kv)).map_err(|e| format!("{id}: {e}"))
}

fn report(m: &IsometryModel) -> Result<SymmetryReport, String> {
    symmetry_data(m, None, &Tolerances::default()).map_err(|e| e.to_string())
}

/// Runs the command-line front end in-process with `--output` pointed at a scratch file
/// and returns the exit code with the file contents.
fn lab(args: &[&str]) -> Result<(u8, Vec<u8>), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let out_arg = out.to_str().ok_or("scratch path is not utf-8")?;
    let mut argv = vec!["coindex-lab"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--output", out_arg]);
    let code = coindex_lab::run(argv);
    let bytes = std::fs::read(&out).unwrap_or_default();
    Ok((code, bytes))
}

fn round_su2() -> Outcome {
    let e = entry("su2", &[("lambda", 1.0), ("mu", 1.0), ("nu", 1.0)])?;
    let r = report(&e.model)?;
    ensure!(r.index == 3 && r.coindex == 0, "index {} coindex {}", r.index, r.coindex);
    ensure!(r.locally_symmetric, "not locally symmetric (residual {:e})", r.nabla_r_residual);
    Ok("index 3, coindex 0, locally symmetric".into())
}

fn su2_families() -> Outcome {
    let mut seen = vec![];
    for (l, m, n) in [(3.0, 2.0, 1.0), (2.0, 1.0, 1.0), (1.0, 1.0, 0.5)] {
        let t = Instant::now();
        let e = entry("su2", &[("lambda", l), ("mu", m), ("nu", n)])?;
        let r = report(&e.model)?;
        ensure!(r.index == 1 && r.coindex == 2, "({l},{m},{n}): index {} coindex {}", r.index, r.coindex);
        ensure!(t.elapsed() < Duration::from_secs(1), "({l},{m},{n}) took {:?}", t.elapsed());
        seen.push(format!("({l},{m},{n})"));
    }
    Ok(format!("index 1, coindex 2 for {}", seen.join(" ")))
}

fn so5_so3() -> Outcome {
    let e = entry("so5-so3", &[])?;
    let m = &e.model;
    ensure!(m.tangent_dim() == 7, "n_M = {}", m.tangent_dim());
    let r = report(m)?;
    ensure!(r.index == 3 && r.coindex == 4, "index {} coindex {}", r.index, r.coindex);
    let leaf = &r.leaf.curvature_profile;
    ensure!(leaf.len() == 1 && leaf[0].dim == 3 && leaf[0].constant, "leaf profile {leaf:?}");
    let gen = m.leaf_generator().ok_or("no leaf generator recorded")?;
    let ev_gen = gen.image(m.ev());
    let dist = ev_gen.containment_residual(&r.s_o).max(r.s_o.containment_residual(&ev_gen));
    ensure!(ev_gen.dim() == r.s_o.dim() && dist <= 1e-8, "s_o vs ev(p'): dims {} {}, distance {dist:e}", r.s_o.dim(), ev_gen.dim());
    ensure!(r.nabla_r_residual > BAND_FACTOR * TAU_CURV, "nabla R residual {:e}", r.nabla_r_residual);
    let dec = decompose_irreducibles(m, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let mut dims = dec.dims();
    dims.sort_unstable_by(|a, b| b.cmp(a));
    ensure!(dims == vec![3, 3, 1], "isotropy blocks {dims:?}");
    Ok(format!(
        "n_M 7, index 3, coindex 4, leaf K={:.6}, |s_o - ev(p')| {dist:.1e}, nabla R {:.3e}, blocks [3,3,1]",
        leaf[0].curvature.unwrap_or(f64::NAN),
        r.nabla_r_residual
    ))
}

fn so5_so2so2() -> Outcome {
    let e = entry("so5-so2so2", &[])?;
    let m = &e.model;
    ensure!(m.tangent_dim() == 8, "n_M = {}", m.tangent_dim());
    let r = report(m)?;
    ensure!(r.index == 4 && r.coindex == 4, "index {} coindex {}", r.index, r.coindex);
    let leaf = &r.leaf.curvature_profile;
    ensure!(leaf.len() == 2 && leaf.iter().all(|b| b.dim == 2 && b.constant), "leaf profile {leaf:?}");
    let (k1, k2) = (leaf[0].curvature.unwrap_or(f64::NAN), leaf[1].curvature.unwrap_or(f64::NAN));
    ensure!((k1 - k2).abs() <= 1e-8 * k1.abs().max(1.0) && k1 > 0.0, "curvatures {k1} {k2}");
    ensure!(r.nabla_r_residual > BAND_FACTOR * TAU_CURV, "nabla R residual {:e}", r.nabla_r_residual);
    Ok(format!("n_M 8, index 4, coindex 4, leaf 2+2 with K={k1:.6} each, nabla R {:.3e}", r.nabla_r_residual))
}

fn su2_cubed() -> Outcome {
    let e = entry("su2-cubed-diag", &[("a", 2.0), ("b", 3.0), ("c", 5.0), ("d", 7.0), ("lambda", 2.0)])?;
    let m = &e.model;
    let nr = is_naturally_reductive(m, TAU_CURV).map_err(|e| e.to_string())?;
    let fixed = fixed_subspace(m).map_err(|e| e.to_string())?.dim();
    let r = report(m)?;
    let mut problems = vec![];
    if nr.residual > TAU_CURV {
        problems.push(format!("naturally-reductive residual {:.3e} > {TAU_CURV:e}", nr.residual));
    }
    if fixed != 2 {
        problems.push(format!("fixed subspace dim {fixed} (expected 2)"));
    }
    if r.index != 2 || r.coindex != 4 {
        problems.push(format!("index {} coindex {} (expected 2, 4)", r.index, r.coindex));
    }
    ensure!(problems.is_empty(), "{}", problems.join("; "));
    Ok("naturally reductive, fixed dim 2, index 2, coindex 4".into())
}

fn products() -> Outcome {
    let a = report(&entry("so4-product", &[("lambda", 3.0), ("mu", 2.0), ("nu", 1.0), ("lambda2", 2.0), ("mu2", 1.0), ("nu2", 1.0)])?.model)?;
    ensure!(a.index == 2 && a.coindex == 4, "SU(2)_(3,2,1) x SU(2)_(2,1,1): index {} coindex {}", a.index, a.coindex);
    let b = report(&entry("so3-cubed", &[])?.model)?;
    ensure!(b.index == 5 && b.coindex == 4, "triple product: index {} coindex {}", b.index, b.coindex);
    Ok("product index 2 / coindex 4; triple product index 5 / coindex 4".into())
}

fn inadmissible() -> Outcome {
    let g = entry("so5-so3so2", &[])?;
    let dim = invariant_metric_space(&g.model).map_err(|e| e.to_string())?.dim;
    let r = report(&g.model)?;
    ensure!(dim == 1, "so5/(so3+so2) invariant metric space dim {dim}");
    ensure!(r.nabla_r_residual <= TAU_CURV, "so5/(so3+so2) nabla R residual {:e}", r.nabla_r_residual);
    ensure!(r.index == 6 && r.coindex == 0, "so5/(so3+so2) index {} coindex {}", r.index, r.coindex);

    let s4 = entry("so5-so4", &[])?;
    let dec = decompose_irreducibles(&s4.model, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let dim4 = invariant_metric_space(&s4.model).map_err(|e| e.to_string())?.dim;
    ensure!(dec.dims() == vec![4] && dim4 == 1, "so5/so4 blocks {:?}, invariant metric space dim {dim4}", dec.dims());

    let (code, out) = lab(&["sample", "so5-so2", "-n", "100", "--seed", "1", "--format", "json"])?;
    ensure!(code == 0, "sample exited with {code}");
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    let records: Vec<serde_json::Value> = text.lines().map(serde_json::from_str).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure!(records.len() == 100, "{} sample records", records.len());
    let hits = records.iter().filter(|r| r["coindex"] == 4 && r["leaf_dim"] == 5).count();
    let errors = records.iter().filter(|r| r["status"] != "verified").count();
    ensure!(hits == 0 && errors == 0, "{hits} samples with coindex 4 and 5-dim leaf, {errors} not verified");
    Ok("so5/(so3+so2): 1 metric, symmetric, index 6; so5/so4: one 4-block, 1 metric; so5/so2: 0 of 100 samples with coindex 4".into())
}

fn oracle() -> Outcome {
    let real = MatrixRealization::su2();
    let mut worst: f64 = 0.0;
    for (l, m, n) in [(1.0, 1.0, 1.0), (3.0, 2.0, 1.0), (2.0, 1.0, 1.0)] {
        let model = catalog::su2_left_invariant(l, m, n).map_err(|e| e.to_string())?;
        let rep = fd_oracle(&model, &real, DEFAULT_STEP).map_err(|e| e.to_string())?;
        ensure!(rep.max_deviation <= 1e-5, "({l},{m},{n}): deviation {:e}", rep.max_deviation);
        worst = worst.max(rep.max_deviation);
        if (l, m, n) != (1.0, 1.0, 1.0) {
            let flipped = fd_oracle_with(&model, &real, DEFAULT_STEP, BracketConvention::Flipped).map_err(|e| e.to_string())?;
            ensure!(flipped.max_deviation > 1e-2, "({l},{m},{n}): flipped bracket deviation only {:e}", flipped.max_deviation);
        }
    }
    Ok(format!("max deviation {worst:.1e}; flipped bracket detected"))
}

fn properties() -> Outcome {
    let tol = Tolerances::default();
    let mut models = selfcheck::catalog_models();
    let n_catalog = models.len();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for _ in 0..50 {
        models.push(selfcheck::random_model(rng.gen()));
    }
    for (i, (name, m)) in models.iter().enumerate() {
        selfcheck::all(m, i as u64, &tol).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{n_catalog} catalog cases and 50 random models"))
}

fn table() -> Outcome {
    let first = lab(&["table", "--format", "json", "--seed", "1"])?;
    let second = lab(&["table", "--format", "json", "--seed", "1"])?;
    ensure!(first.0 == 0 && second.0 == 0, "table exited with {} and {}", first.0, second.0);
    ensure!(first.1 == second.1, "table JSON differs between runs");
    let v: serde_json::Value = serde_json::from_slice(&first.1).map_err(|e| e.to_string())?;
    let want = [
        ("SO(5)/SO(2)", "no"),
        ("SO(5)/SO(3)", "yes"),
        ("SO(5)/(SO(2)xSO(2))", "yes"),
        ("SO(5)/(SO(3)xSO(2))", "no"),
        ("SO(5)/SO(4)", "no"),
        ("SO(4)", "yes"),
        ("SO(3)^3", "yes"),
    ];
    let rows = v["rows"].as_array().ok_or("no rows")?;
    ensure!(rows.len() == 7, "{} rows", rows.len());
    for (row, (name, verdict)) in rows.iter().zip(want) {
        ensure!(row["manifold"] == name && row["verdict"] == verdict, "row {row}");
        ensure!(row["status"] == "verified", "{name}: status {}", row["status"]);
    }
    Ok("7 rows, 4 yes / 3 no, all verified, identical JSON across runs".into())
}

struct Criterion {
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { title: "round SU(2)", limit: Duration::from_secs(1), run: round_su2 },
        Criterion { title: "SU(2) co-index 2 families", limit: Duration::from_secs(3), run: su2_families },
        Criterion { title: "so(5) > so(4) > so(3) witness", limit: Duration::from_secs(5), run: so5_so3 },
        Criterion { title: "so(5) > so(4) > so(2)+so(2) witness", limit: Duration::from_secs(5), run: so5_so2so2 },
        Criterion { title: "SU(2)^3/diag at (2,3,5,7,2)", limit: Duration::from_secs(5), run: su2_cubed },
        Criterion { title: "product witnesses", limit: Duration::from_secs(5), run: products },
        Criterion { title: "inadmissibility evidence", limit: Duration::from_secs(60), run: inadmissible },
        Criterion { title: "finite-difference oracle", limit: Duration::from_secs(30), run: oracle },
        Criterion { title: "property suites", limit: Duration::from_secs(120), run: properties },
        Criterion { title: "admissibility table", limit: Duration::from_secs(120), run: table },
    ];
    // keep panic messages out of the summary lines; they are reported as failures
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = t.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.limit => Err(format!("took {elapsed:.2?}, limit {:?}", c.limit)),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {} ({elapsed:.2?}): {detail}", i + 1, c.title),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {} ({elapsed:.2?}): {why}", i + 1, c.title);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
