use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use slpcc::auglag::{AuglagConfig, AuglagStatus};
use slpcc::bench::{Family, SpectrumClass};
use slpcc::{slpcc_solve, SolverConfig, Variant};
use slpcc_cli::*;

/// Trust-region solver for bound-constrained MPCCs.
#[derive(Parser)]
#[command(name = "slpcc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem file.
    Solve(SolveArgs),
    /// Write benchmark problem files.
    #[command(subcommand)]
    Generate(GenerateCommand),
    /// Run a suite of problem files with several variants.
    Bench(BenchArgs),
    /// Solve a built-in general MPCC with the augmented Lagrangian method.
    Auglag(AuglagArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    FirstOrder,
    Plain,
    Cauchy,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::FirstOrder => Variant::FirstOrder,
            VariantArg::Plain => Variant::Plain,
            VariantArg::Cauchy => Variant::Cauchy,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Sufficient-decrease ratio.
    #[arg(long)]
    sigma: Option<f64>,
    /// Lower limit of the reset radius.
    #[arg(long)]
    delta_min: Option<f64>,
    /// Initial upper limit of the reset radius.
    #[arg(long)]
    delta_bar0: Option<f64>,
    /// Stationarity tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum number of outer iterations.
    #[arg(long)]
    max_outer: Option<usize>,
}

impl SolverArgs {
    fn config(&self, variant: Variant) -> SolverConfig {
        let mut c = SolverConfig::default().with_variant(variant);
        if let Some(v) = self.sigma {
            c.sigma = v;
        }
        if let Some(v) = self.delta_min {
            c.delta_min = v;
        }
        if let Some(v) = self.delta_bar0 {
            c.delta_bar0 = v;
        }
        if let Some(v) = self.tol {
            c.stationarity_tol = v;
        }
        if let Some(v) = self.max_outer {
            c.max_outer = v;
        }
        c
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (JSON).
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "first-order")]
    variant: VariantArg,
    #[command(flatten)]
    solver: SolverArgs,
    /// Random start when the file has no `x_init`.
    #[arg(long, env = "MPCC_SEED")]
    seed: Option<u64>,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// Random quadratic instances.
    Quad(QuadArgs),
    /// One instance of a catalog family.
    Catalog(CatalogArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Ind,
    Psd,
}

#[derive(Args)]
struct QuadArgs {
    /// Size of each block (`n0 = n1 = n`).
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    class: ClassArg,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Base seed; instance `k` uses `seed + k`.
    #[arg(long, env = "MPCC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    family: Family,
    /// Number of complementarity pairs.
    #[arg(long)]
    n: usize,
    /// Pairing scheme, 0 or 1.
    #[arg(long, default_value_t = 0)]
    class: u8,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Markdown,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite directories or problem files.
    paths: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["plain", "cauchy"])]
    variants: Vec<VariantArg>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "markdown")]
    format: TableFormat,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuglagArgs {
    /// Built-in problem name.
    #[arg(long, default_value = "nash1")]
    problem: String,
    /// Comma-separated start point `(x, s_g, s_h)`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    start: Option<Vec<f64>>,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Write violation, stationarity and penalty per iteration as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let (prob, x) = load_problem(&a.problem, a.seed)?;
    let cfg = a.solver.config(a.variant.into());
    let rep = slpcc_solve(&prob, &x, &cfg)?;
    if let Some(t) = &a.trace {
        write_csv(t, &trace_rows(&rep))?;
    }
    let name = a.problem.display().to_string();
    print!("{}", format_report(&name, &rep));
    Ok(if rep.status.is_success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn generate(g: GenerateCommand) -> Result<ExitCode> {
    let written = match g {
        GenerateCommand::Quad(q) => {
            let class = match q.class {
                ClassArg::Ind => SpectrumClass::Indefinite,
                ClassArg::Psd => SpectrumClass::Psd,
            };
            generate_quad_suite(&q.out, q.n, class, q.count, q.seed)?
        }
        GenerateCommand::Catalog(c) => vec![generate_catalog_file(&c.out, c.family, c.n, c.class)?],
    };
    for p in written {
        println!("{}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            files.extend(suite_files(p)?);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            bail!("no such file or directory: {}", p.display());
        }
    }
    Ok(files)
}

fn bench(b: BenchArgs) -> Result<ExitCode> {
    let files = collect_files(&b.paths)?;
    let configs: Vec<SolverConfig> = b
        .variants
        .iter()
        .map(|v| b.solver.config((*v).into()))
        .collect();
    let jobs = if b.jobs == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        b.jobs
    };
    let rows = run_bench(&files, &configs, jobs)?;
    let summary = summarize(&rows);
    let text = match b.format {
        TableFormat::Csv => bench_csv(&rows)?,
        TableFormat::Markdown => {
            format!("{}\n{}", bench_markdown(&rows), summary_markdown(&summary))
        }
    };
    emit(b.out.as_deref(), &text)?;
    if b.out.is_some() || matches!(b.format, TableFormat::Csv) {
        eprint!("{}", summary_markdown(&summary));
    }
    Ok(ExitCode::SUCCESS)
}

fn auglag(a: AuglagArgs) -> Result<ExitCode> {
    let mut cfg = AuglagConfig::default();
    if let Some(m) = a.max_outer {
        cfg.max_outer = m;
    }
    let rep = run_auglag(&a.problem, a.start, &cfg)?;
    if let Some(t) = &a.trace {
        write_csv(t, &auglag_trace(&rep))?;
    }
    print!("{}", format_auglag(&a.problem, &rep));
    Ok(if rep.status == AuglagStatus::Converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::Generate(g) => generate(g),
        Command::Bench(b) => bench(b),
        Command::Auglag(a) => auglag(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
