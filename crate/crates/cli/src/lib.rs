//! Building blocks of the `slpcc` command-line tool: solving problem files,
//! generating benchmark suites, running them and the augmented-Lagrangian
//! demonstration.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use slpcc::auglag::{auglag_solve, AuglagConfig, AuglagReport, GeneralMpcc, Nash1};
use slpcc::bench::{generate_quadratic, CatalogProblem, Family, SpectrumClass};
use slpcc::{
    project_feasible, slpcc_solve, MpccProblem, PartitionedPoint, ProblemFile, SolveReport,
    SolveStatus, SolverConfig,
};

/// Loads a problem file and returns the problem with its projected start.
///
/// Without `x_init` the start is the projection of zero, or of a random
/// point when `seed` is given.
pub fn load_problem(path: &Path, seed: Option<u64>) -> Result<(MpccProblem, PartitionedPoint)> {
    let file = ProblemFile::load(path)?;
    let (prob, x) = file.to_problem()?;
    let x = match (x, seed) {
        (Some(x), _) => x,
        (None, Some(seed)) => random_start(&prob, seed),
        (None, None) => PartitionedPoint::zeros(prob.n0(), prob.n1()),
    };
    let x = project_feasible(&x, &prob)?;
    Ok((prob, x))
}

/// `x0` uniform on its box (clipped to `[-10, 10]`), pair entries uniform on
/// `[0, 1]` before projection.
pub fn random_start(prob: &MpccProblem, seed: u64) -> PartitionedPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Vec::with_capacity(prob.dim());
    for i in 0..prob.n0() {
        let l = prob.lower()[i].max(-10.0);
        let u = prob.upper()[i].min(10.0).max(l);
        v.push(l + (u - l) * rng.random::<f64>());
    }
    for _ in 0..2 * prob.n1() {
        v.push(rng.random::<f64>());
    }
    PartitionedPoint::from_flat(prob.n0(), prob.n1(), v).expect("dimensions match")
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub fval: f64,
    pub chi: f64,
    pub delta: f64,
    pub step_type: &'static str,
    pub inner_iters: usize,
    pub bqp_iters: usize,
}

pub fn trace_rows(rep: &SolveReport) -> Vec<TraceRow> {
    rep.iterates
        .iter()
        .map(|r| TraceRow {
            iter: r.iter,
            fval: r.fval,
            chi: r.chi,
            delta: r.delta,
            step_type: r.step.name(),
            inner_iters: r.inner_iters,
            bqp_iters: r.bqp_iters,
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Text report with the counters of a solve.
pub fn format_report(name: &str, rep: &SolveReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "problem      {name}");
    let _ = writeln!(s, "status       {}", rep.status.name());
    let _ = writeln!(s, "objective    {:.10e}", rep.final_f);
    let _ = writeln!(s, "chi          {:.3e}", rep.final_chi);
    let _ = writeln!(s, "outer iters  {}", rep.outer_iters);
    let _ = writeln!(s, "inner iters  {}", rep.total_inner_iters);
    let _ = writeln!(s, "bqp iters    {}", rep.bqp_iters);
    s
}

fn write_problem(path: &Path, file: &ProblemFile) -> Result<()> {
    file.save(path)
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Writes `count` random quadratic instances named `{n}-{class}-{k}.json`.
/// Instance `k` uses seed `seed + k`; both `n0` and `n1` equal `n`.
pub fn generate_quad_suite(
    dir: &Path,
    n: usize,
    class: SpectrumClass,
    count: usize,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let inst = generate_quadratic(n, n, class, seed.wrapping_add(k as u64))?;
        let path = dir.join(format!("{n}-{}-{k}.json", class.tag()));
        write_problem(&path, &ProblemFile::from_quadratic(&inst))?;
        out.push(path);
    }
    Ok(out)
}

/// Writes one catalog instance named `{n}-{family}{class}.json`.
pub fn generate_catalog_file(dir: &Path, family: Family, n: usize, class: u8) -> Result<PathBuf> {
    let c = CatalogProblem::new(family, class, n)?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(format!("{}.json", c.name()));
    write_problem(&path, &ProblemFile::from_catalog(&c))?;
    Ok(path)
}

/// Result of one solve in a benchmark suite.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub variant: &'static str,
    pub status: String,
    pub objective: Option<f64>,
    pub chi: Option<f64>,
    pub outer_iters: Option<usize>,
    pub inner_iters: Option<usize>,
    pub bqp_iters: Option<usize>,
    /// `stall` when the trust region collapsed, empty otherwise.
    pub flag: &'static str,
    pub error: String,
}

impl BenchRow {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::BStationary.name()
            || self.status == SolveStatus::ToleranceReached.name()
    }
}

/// JSON files of a suite directory, sorted by name.
pub fn suite_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read suite directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn bench_one(path: &Path, cfg: &SolverConfig) -> BenchRow {
    let instance = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let variant = cfg.variant.name();
    let run = || -> Result<SolveReport> {
        let (prob, x) = load_problem(path, None)?;
        Ok(slpcc_solve(&prob, &x, cfg)?)
    };
    match run() {
        Ok(rep) => BenchRow {
            instance,
            variant,
            status: rep.status.name().to_string(),
            objective: Some(rep.final_f),
            chi: Some(rep.final_chi),
            outer_iters: Some(rep.outer_iters),
            inner_iters: Some(rep.total_inner_iters),
            bqp_iters: Some(rep.bqp_iters),
            flag: if rep.status == SolveStatus::InnerLoopStall {
                "stall"
            } else {
                ""
            },
            error: String::new(),
        },
        Err(e) => BenchRow {
            instance,
            variant,
            status: "error".to_string(),
            objective: None,
            chi: None,
            outer_iters: None,
            inner_iters: None,
            bqp_iters: None,
            flag: "",
            error: format!("{e:#}"),
        },
    }
}

/// Solves every instance with every configuration. Rows come back in
/// (instance, configuration) order whatever the number of jobs.
pub fn run_bench(
    files: &[PathBuf],
    configs: &[SolverConfig],
    jobs: usize,
) -> Result<Vec<BenchRow>> {
    let tasks: Vec<(&PathBuf, &SolverConfig)> = files
        .iter()
        .flat_map(|f| configs.iter().map(move |c| (f, c)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?;
    Ok(pool.install(|| tasks.par_iter().map(|(f, c)| bench_one(f, c)).collect()))
}

/// Per-variant aggregate over the solved rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub variant: &'static str,
    pub runs: usize,
    pub solved: usize,
    pub stalls: usize,
    pub mean_outer: f64,
    pub mean_inner: f64,
    pub mean_bqp: f64,
}

pub fn summarize(rows: &[BenchRow]) -> Vec<BenchSummary> {
    let mut variants: Vec<&'static str> = rows.iter().map(|r| r.variant).collect();
    variants.dedup();
    variants.sort_unstable();
    variants.dedup();
    variants
        .into_iter()
        .map(|v| {
            let all: Vec<&BenchRow> = rows.iter().filter(|r| r.variant == v).collect();
            let ok: Vec<&BenchRow> = all.iter().copied().filter(|r| r.solved()).collect();
            let mean = |get: fn(&BenchRow) -> Option<usize>| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().filter_map(|r| get(r)).sum::<usize>() as f64 / ok.len() as f64
                }
            };
            BenchSummary {
                variant: v,
                runs: all.len(),
                solved: ok.len(),
                stalls: all.iter().filter(|r| r.flag == "stall").count(),
                mean_outer: mean(|r| r.outer_iters),
                mean_inner: mean(|r| r.inner_iters),
                mean_bqp: mean(|r| r.bqp_iters),
            }
        })
        .collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_sci(v: Option<f64>, digits: usize) -> String {
    v.map(|v| format!("{v:.digits$e}")).unwrap_or_default()
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn bench_markdown(rows: &[BenchRow]) -> String {
    let mut s = String::from(
        "| instance | variant | status | objective | chi | outer | inner | bqp | flag |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        let status = if r.error.is_empty() {
            r.status.clone()
        } else {
            format!("error: {}", r.error.replace('|', "/"))
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            r.instance,
            r.variant,
            status,
            opt_sci(r.objective, 6),
            opt_sci(r.chi, 1),
            opt(r.outer_iters),
            opt(r.inner_iters),
            opt(r.bqp_iters),
            r.flag
        );
    }
    s
}

pub fn summary_markdown(summary: &[BenchSummary]) -> String {
    let mut s = String::from(
        "| variant | runs | solved | stalls | mean outer | mean inner | mean bqp |\n\
         |---|---|---|---|---|---|---|\n",
    );
    for a in summary {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.2} | {:.2} | {:.2} |",
            a.variant, a.runs, a.solved, a.stalls, a.mean_outer, a.mean_inner, a.mean_bqp
        );
    }
    s
}

/// Built-in general MPCCs for the augmented-Lagrangian command.
pub fn builtin_general(name: &str) -> Result<(Arc<dyn GeneralMpcc>, Vec<f64>)> {
    match name {
        "nash1" => Ok((Arc::new(Nash1), slpcc::auglag::NASH1_START.to_vec())),
        other => bail!("unknown built-in problem '{other}' (available: nash1)"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuglagTraceRow {
    pub iteration: usize,
    pub violation: f64,
    pub stationarity: f64,
    pub rho: f64,
}

pub fn auglag_trace(rep: &AuglagReport) -> Vec<AuglagTraceRow> {
    rep.iterations
        .iter()
        .map(|r| AuglagTraceRow {
            iteration: r.iter,
            violation: r.violation,
            stationarity: r.stationarity,
            rho: r.rho,
        })
        .collect()
}

pub fn run_auglag(name: &str, start: Option<Vec<f64>>, cfg: &AuglagConfig) -> Result<AuglagReport> {
    let (gp, default_start) = builtin_general(name)?;
    let start = start.unwrap_or(default_start);
    let len = gp.n() + 2 * gp.p();
    if start.len() != len {
        bail!("start point has {} entries, expected {len}", start.len());
    }
    Ok(auglag_solve(gp, Some(start), cfg)?)
}

pub fn format_auglag(name: &str, rep: &AuglagReport) -> String {
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.8}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut s = String::new();
    let _ = writeln!(s, "problem      {name}");
    let _ = writeln!(s, "status       {:?}", rep.status);
    let _ = writeln!(s, "iterations   {}", rep.iterations.len());
    let _ = writeln!(s, "penalty      {:e}", rep.state.rho);
    let _ = writeln!(s, "objective    {:.10e}", rep.f);
    let _ = writeln!(s, "x            [{}]", fmt(&rep.x));
    let _ = writeln!(s, "s_g          [{}]", fmt(&rep.s_g));
    let _ = writeln!(s, "s_h          [{}]", fmt(&rep.s_h));
    let _ = writeln!(s, "exact compl. {}", rep.complementarity_exact);
    s
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
