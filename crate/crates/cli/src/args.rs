use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coindex_core::catalog::Params;
use coindex_core::symmetry::DEFAULT_SEED;
use coindex_core::tolerance::{TAU_CURV, TAU_RANK};

#[derive(Debug, Parser)]
#[command(name = "coindex-lab", version, about = "Index and co-index of symmetry of homogeneous spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every randomized step (decimal or 0x-prefixed hex)
    #[arg(long, global = true, env = "COINDEX_LAB_SEED", value_parser = parse_seed)]
    pub seed: Option<u64>,

    /// Number of sampled metrics (sampling plans and `sample`)
    #[arg(long = "samples", short = 'n', global = true, default_value_t = 100)]
    pub samples: usize,

    /// Relative singular-value threshold for rank decisions
    #[arg(long, global = true, default_value_t = TAU_RANK)]
    pub tol_rank: f64,

    /// Relative threshold for curvature predicates
    #[arg(long, global = true, default_value_t = TAU_CURV)]
    pub tol_curv: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the report here (atomically) instead of stdout
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for independent cases or samples
    #[arg(long, short = 'j', global = true, default_value_t = 1)]
    pub jobs: usize,
}

impl Global {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog cases
    List,
    /// Show a case: parameters, expectations and the model as JSON
    Show(CaseArgs),
    /// Verify a catalog case or a model file
    Verify(CaseArgs),
    /// Verify every catalog case at default parameters
    VerifyAll,
    /// The admissibility table of the seven candidate spaces
    Table,
    /// Sample invariant metrics and record the relative index of each
    Sample(SampleArgs),
    /// Compare the algebraic covariant derivative of Killing fields with finite differences
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Catalog case id, or a path to a model JSON file
    pub case: String,

    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Any case parameter, as key=value (repeatable)
    #[arg(long = "param", short = 'p', value_parser = parse_kv)]
    pub extra: Vec<(String, f64)>,
}

impl ParamArgs {
    pub fn to_params(&self) -> Params {
        let mut p: Params = self.extra.iter().cloned().collect();
        for (k, v) in [("lambda", self.lambda), ("mu", self.mu), ("nu", self.nu)] {
            if let Some(v) = v {
                p.insert(k.into(), v);
            }
        }
        p
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub case: CaseArgs,

    /// Half-width of the uniform coefficients around the background metric
    #[arg(long, default_value_t = coindex_core::sampling::DEFAULT_SPREAD)]
    pub spread: f64,

    /// Also write the summary (JSON) to this file
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub case: CaseArgs,

    /// Finite-difference step
    #[arg(long, default_value_t = coindex_core::geometry::oracle::DEFAULT_STEP)]
    pub step: f64,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("parameter `{k}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}
