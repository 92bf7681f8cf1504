//! `kmpp`: generate data, cluster, run the exact oracles, the bound suite and
//! the convergence study, and render Voronoi figures.
//!
//! Exit codes: 0 success, 2 usage, 3 validation, 4 size limit, 5 I/O.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kmpp::experiments::{self, BoundStatus, ConvergenceStudySpec};
use kmpp::report::{self, PlotSpec};
use kmpp::{oracle, CenterSet, Dataset, Error, LloydConfig, MixtureSpec, Strategy};
use serde::Serialize;

use crate::config::{parse_grid, StudyFile};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "KMPP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "kmpp",
    version,
    about = "k-means++ seeding, exact oracles and consistency experiments"
)]
struct Cli {
    /// Output directory (overridden by KMPP_OUT_DIR).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample points from a Gaussian mixture.
    Generate(GenerateArgs),
    /// Seed (and optionally refine) a clustering of a CSV dataset.
    Cluster(ClusterArgs),
    /// Enumerate every k-means++ seeding of a small dataset.
    Enumerate(EnumerateArgs),
    /// Brute-force optimal clustering of a small dataset.
    Optimum(OptimumArgs),
    /// Check the k-means++ approximation bound on small instances.
    BoundSuite(BoundArgs),
    /// Sample-size convergence study against a large reference sample.
    Converge(ConvergeArgs),
    /// Draw a clustering with its Voronoi diagram.
    Render(RenderArgs),
}

#[derive(Debug, Args, Serialize)]
struct MixtureArgs {
    /// Grid layout ROWSxCOLS.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    stdev: Option<f64>,
    /// TOML mixture file (grid fields or a component list).
    #[arg(long)]
    mixture: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    #[command(flatten)]
    mixture: MixtureArgs,
    /// Number of points.
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args, Serialize)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "plusplus")]
    strategy: Strategy,
    #[arg(long)]
    seed: u64,
    /// Run Lloyd refinement after seeding.
    #[arg(long)]
    refine: bool,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct EnumerateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Also report the expectation after Lloyd refinement of every outcome.
    #[arg(long)]
    refine: bool,
    /// Cross-check the exact expectation with this many Monte Carlo seedings.
    #[arg(long, requires = "seed")]
    mc_reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct OptimumArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
}

#[derive(Debug, Args, Serialize)]
struct BoundArgs {
    /// Instance generator; only "small-random" exists.
    #[arg(long, conflicts_with = "input")]
    preset: Option<String>,
    #[arg(long, default_value_t = 50)]
    instances: usize,
    #[arg(long, required_unless_present = "input")]
    seed: Option<u64>,
    /// Single CSV instance instead of a preset.
    #[arg(long, requires = "k")]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct ConvergeArgs {
    /// TOML study file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    mixture: MixtureArgs,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Seedings per fresh sample.
    #[arg(long)]
    seedings_per_sample: Option<usize>,
    /// Reference sample size.
    #[arg(long = "ref")]
    ref_size: Option<usize>,
    /// Seedings on the reference sample.
    #[arg(long)]
    ref_reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record Lloyd-refined tracks as well.
    #[arg(long)]
    refine: bool,
    /// Comma-separated strategies (plusplus, random).
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<Strategy>>,
    /// Skip the per-size SVG figures.
    #[arg(long)]
    no_figures: bool,
}

#[derive(Debug, Args, Serialize)]
struct RenderArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    centers: PathBuf,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "clustering.svg")]
    name: String,
    #[arg(long, default_value_t = 600)]
    width: u32,
    #[arg(long, default_value_t = 600)]
    height: u32,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::SizeLimit { .. }) => 4,
            CliError::Core(Error::Io(_)) => 5,
            CliError::Core(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    argv: Vec<String>,
    subcommand: &'static str,
    resolved: &'a C,
}

fn write_manifest<C: Serialize>(out: &Path, subcommand: &'static str, resolved: &C) -> CliResult<()> {
    let manifest = Manifest {
        tool: "kmpp",
        version: env!("CARGO_PKG_VERSION"),
        argv: std::env::args().skip(1).collect(),
        subcommand,
        resolved,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(out.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn resolve_mixture(args: &MixtureArgs) -> CliResult<kmpp::dataset::MixtureConfig> {
    use kmpp::dataset::MixtureConfig;
    if let Some(path) = &args.mixture {
        if args.grid.is_some() || args.spacing.is_some() || args.stdev.is_some() {
            return Err(CliError::Usage(
                "--mixture cannot be combined with --grid/--spacing/--stdev".into(),
            ));
        }
        return Ok(MixtureConfig::from_toml(&fs::read_to_string(path)?)?);
    }
    let MixtureConfig::Grid {
        rows,
        cols,
        spacing,
        stdev,
    } = MixtureConfig::default()
    else {
        unreachable!("default mixture is a grid")
    };
    let (rows, cols) = match &args.grid {
        Some(g) => parse_grid(g).map_err(CliError::Usage)?,
        None => (rows, cols),
    };
    Ok(MixtureConfig::Grid {
        rows,
        cols,
        spacing: args.spacing.unwrap_or(spacing),
        stdev: args.stdev.unwrap_or(stdev),
    })
}

fn generate(out: &Path, args: &GenerateArgs) -> CliResult<()> {
    let mixture = resolve_mixture(&args.mixture)?;
    let spec: MixtureSpec = mixture.build()?;
    let data: Dataset<f64> = spec.sample(args.m, args.seed)?;
    data.save_csv(out.join("points.csv"))?;
    #[derive(Serialize)]
    struct Resolved<'a> {
        mixture: &'a kmpp::dataset::MixtureConfig,
        m: usize,
        seed: u64,
    }
    write_manifest(
        out,
        "generate",
        &Resolved {
            mixture: &mixture,
            m: args.m,
            seed: args.seed,
        },
    )?;
    println!("wrote {} points to {}", data.len(), out.join("points.csv").display());
    Ok(())
}

fn write_labels(path: &Path, labels: &[usize]) -> CliResult<()> {
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn cluster(out: &Path, args: &ClusterArgs) -> CliResult<()> {
    let data = Dataset::<f64>::load_csv(&args.input)?;
    let cfg = kmpp::SeedingConfig {
        k: args.k,
        strategy: args.strategy,
        seed: args.seed,
    };
    let seeded = cfg.run(&data)?;
    let seeded_cost = kmpp::cost_empirical(&data, &seeded)?;
    let (centers, final_cost) = if args.refine {
        let trace = kmpp::lloyd_refine(
            &data,
            &seeded,
            &LloydConfig {
                max_iters: args.max_iters,
                tol: args.tol,
            },
        )?;
        let mut text = String::from("iteration,cost,moved\n");
        text.push_str(&format!("0,{},0\n", trace.initial_cost));
        for (i, it) in trace.iterations.iter().enumerate() {
            text.push_str(&format!("{},{},{}\n", i + 1, it.cost, it.moved));
        }
        fs::write(out.join("trace.csv"), text)?;
        let cost = trace.final_cost();
        (trace.final_centers, cost)
    } else {
        (seeded, seeded_cost)
    };
    let assignment = kmpp::assign(&data, &centers)?;
    Dataset::from_flat(centers.dim(), centers.as_flat().to_vec())?.save_csv(out.join("centers.csv"))?;
    write_labels(&out.join("assignment.csv"), assignment.labels())?;
    if data.dim() == 2 {
        let mut plot = PlotSpec::new(&data, &centers, &assignment);
        plot.title = Some(format!("{} k={} seed={}", args.strategy, args.k, args.seed));
        report::render_clustering_svg(&plot, out.join("clustering.svg"))?;
    }
    write_manifest(out, "cluster", args)?;
    println!("seeded cost {seeded_cost}");
    println!("final cost {final_cost}");
    Ok(())
}

fn enumerate(out: &Path, args: &EnumerateArgs) -> CliResult<()> {
    let data = Dataset::<f64>::load_csv(&args.input)?;
    let outcomes = oracle::enumerate_seedings(&data, args.k)?;
    let mut buf = Vec::new();
    oracle::write_outcomes_csv(&outcomes, &mut buf)?;
    fs::write(out.join("outcomes.csv"), buf)?;
    let expected: f64 = outcomes.iter().map(|o| o.probability * o.cost).sum();
    let refined = if args.refine {
        Some(oracle::exact_expected_cost_with(
            &data,
            args.k,
            Some(&LloydConfig::default()),
        )?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct MonteCarlo {
        reps: usize,
        seed: u64,
        mean: f64,
        stderr: f64,
        /// |mean - exact| in standard errors.
        z: f64,
    }
    let mc = match args.mc_reps {
        Some(reps) => {
            let seed = args.seed.expect("clap requires seed");
            let est = experiments::mc_expected_cost(&data, args.k, reps, seed, false)?;
            let mut text = String::from("cost\n");
            for c in &est.samples {
                text.push_str(&format!("{c}\n"));
            }
            fs::write(out.join("mc_samples.csv"), text)?;
            let z = if est.stderr > 0.0 {
                (est.mean - expected).abs() / est.stderr
            } else {
                0.0
            };
            println!(
                "monte carlo mean {} (se {}), {z:.2} se from exact",
                est.mean, est.stderr
            );
            Some(MonteCarlo {
                reps,
                seed,
                mean: est.mean,
                stderr: est.stderr,
                z,
            })
        }
        None => None,
    };
    #[derive(Serialize)]
    struct Summary {
        outcomes: usize,
        probability_total: f64,
        expected_cost: f64,
        expected_refined_cost: Option<f64>,
        prefix_expected_costs: Vec<f64>,
        monte_carlo: Option<MonteCarlo>,
    }
    let summary = Summary {
        outcomes: outcomes.len(),
        probability_total: outcomes.iter().map(|o| o.probability).sum(),
        expected_cost: expected,
        expected_refined_cost: refined,
        prefix_expected_costs: oracle::expected_prefix_costs(&data, args.k)?,
        monte_carlo: mc,
    };
    fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("serializes") + "\n",
    )?;
    write_manifest(out, "enumerate", args)?;
    println!("{} outcomes, expected cost {expected}", outcomes.len());
    if let Some(r) = refined {
        println!("expected refined cost {r}");
    }
    Ok(())
}

fn optimum(out: &Path, args: &OptimumArgs) -> CliResult<()> {
    let data = Dataset::<f64>::load_csv(&args.input)?;
    let opt = oracle::brute_force_optimum(&data, args.k)?;
    #[derive(Serialize)]
    struct Report<'a> {
        best_cost: f64,
        labels: &'a [usize],
        centers: Vec<Vec<f64>>,
        per_prefix: &'a [f64],
    }
    let rep = Report {
        best_cost: opt.best_cost,
        labels: opt.best_partition.labels(),
        centers: opt.centers.to_rows(),
        per_prefix: &opt.per_prefix,
    };
    fs::write(
        out.join("optimum.json"),
        serde_json::to_string_pretty(&rep).expect("serializes") + "\n",
    )?;
    write_manifest(out, "optimum", args)?;
    println!("optimal cost {}", opt.best_cost);
    Ok(())
}

fn bound_suite(out: &Path, args: &BoundArgs) -> CliResult<()> {
    let instances = match (&args.input, &args.preset) {
        (Some(path), _) => vec![(Dataset::<f64>::load_csv(path)?, args.k.expect("clap requires k"))],
        (None, Some(p)) if p == "small-random" => {
            experiments::small_random_instances(args.instances, args.seed.expect("clap requires seed"))
        }
        (None, Some(p)) => return Err(CliError::Usage(format!("unknown preset {p:?} (expected small-random)"))),
        (None, None) => return Err(CliError::Usage("either --preset or --input is required".into())),
    };
    let checks = experiments::run_bound_suite(&instances);
    let mut buf = Vec::new();
    report::write_bound_csv_to(&checks, &mut buf)?;
    fs::write(out.join("bounds.csv"), buf)?;
    write_manifest(out, "bound-suite", args)?;
    let count = |want: fn(&BoundStatus) -> bool| checks.iter().filter(|c| want(&c.status)).count();
    println!(
        "{} instances: {} pass, {} fail, {} degenerate, {} errors",
        checks.len(),
        count(|s| *s == BoundStatus::Pass),
        count(|s| *s == BoundStatus::Fail),
        count(|s| *s == BoundStatus::Degenerate),
        count(|s| matches!(s, BoundStatus::Error(_)))
    );
    Ok(())
}

fn resolve_study(args: &ConvergeArgs) -> CliResult<ConvergenceStudySpec> {
    let file = match &args.config {
        Some(path) => StudyFile::from_toml(&fs::read_to_string(path)?)?,
        None => StudyFile::default(),
    };
    let mixture_flags = args.mixture.grid.is_some()
        || args.mixture.spacing.is_some()
        || args.mixture.stdev.is_some()
        || args.mixture.mixture.is_some();
    let seed = args
        .seed
        .or(file.master_seed)
        .ok_or_else(|| CliError::Usage("converge requires --seed (or master_seed in the config)".into()))?;
    let mut spec = ConvergenceStudySpec::grid_figure(seed);
    file.apply(&mut spec);
    if mixture_flags {
        spec.mixture = resolve_mixture(&args.mixture)?;
    }
    if let Some(k) = args.k {
        spec.k = k;
    }
    if let Some(s) = &args.sizes {
        spec.sample_sizes = s.clone();
    }
    if let Some(r) = args.reps {
        spec.reps = r;
    }
    if let Some(s) = args.seedings_per_sample {
        spec.seedings_per_sample = s;
    }
    if let Some(r) = args.ref_size {
        spec.ref_size = r;
    }
    if let Some(r) = args.ref_reps {
        spec.ref_reps = r;
    }
    if args.refine {
        spec.refine = true;
    }
    if let Some(s) = &args.strategy {
        spec.strategies = s.clone();
    }
    Ok(spec)
}

fn converge(out: &Path, args: &ConvergeArgs) -> CliResult<()> {
    let spec = resolve_study(args)?;
    spec.validate()?;
    write_manifest(out, "converge", &spec)?;
    let result = experiments::run_convergence_study(&spec)?;
    report::write_study_csv(&result, out.join("study.csv"))?;
    report::write_study_json(&result, out.join("study.json"))?;
    if !args.no_figures {
        if result.exemplars.iter().any(|e| e.dataset.dim() != 2) {
            eprintln!("note: data is not 2-D, skipping figures");
        } else {
            for ex in &result.exemplars {
                let tag = if ex.refined { "_refined" } else { "" };
                let name = format!("clusters_{}{}_m{}.svg", ex.strategy, tag, ex.m);
                let mut plot = PlotSpec::new(&ex.dataset, &ex.centers, &ex.assignment);
                plot.title = Some(format!("{}{} k={} m={}", ex.strategy, tag, spec.k, ex.m));
                report::render_clustering_svg(&plot, out.join(name))?;
            }
        }
    }
    for t in &result.tracks {
        println!(
            "{} refined={} reference expectation {:.6} (se {:.6})",
            t.strategy, t.refined, t.ref_expectation, t.ref_expectation_stderr
        );
        for s in &t.per_m {
            println!(
                "  m={:>7} mean {:.6} (se {:.6})  on reference {:.6}  gap {:.6}",
                s.m, s.mean_cost, s.stderr, s.mean_ref_cost, s.gap
            );
        }
        println!(
            "  trend: final/initial gap {:.3}, rank correlation {:.3} -> {}",
            t.trend.final_over_initial,
            t.trend.rank_correlation,
            if t.trend.passes { "decreasing" } else { "not decreasing" }
        );
    }
    println!("note: {}", experiments::TREND_NOTE);
    Ok(())
}

fn render(out: &Path, args: &RenderArgs) -> CliResult<()> {
    let data = Dataset::<f64>::load_csv(&args.input)?;
    let c = Dataset::<f64>::load_csv(&args.centers)?;
    let centers = CenterSet::from_flat(c.dim(), c.as_flat().to_vec())?;
    let assignment = kmpp::assign(&data, &centers)?;
    let mut plot = PlotSpec::new(&data, &centers, &assignment);
    plot.width = args.width;
    plot.height = args.height;
    report::render_clustering_svg(&plot, out.join(&args.name))?;
    write_manifest(out, "render", args)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or(cli.out);
    fs::create_dir_all(&out)?;
    match &cli.command {
        Command::Generate(a) => generate(&out, a),
        Command::Cluster(a) => cluster(&out, a),
        Command::Enumerate(a) => enumerate(&out, a),
        Command::Optimum(a) => optimum(&out, a),
        Command::BoundSuite(a) => bound_suite(&out, a),
        Command::Converge(a) => converge(&out, a),
        Command::Render(a) => render(&out, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
