use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cluster_describe::datagen::{extend_pairs, gen_synthetic, merge_clusters};
use cluster_describe::exact::ExactOptions;
use cluster_describe::experiment::{
    approx_ratio, cost_vs_coverage, coverage_vs_cost, grid, to_csv, SweepOptions, COST_HEADER,
    COVERAGE_HEADER, RATIO_HEADER,
};
use cluster_describe::io::{read_instance, serialize_instance, serialize_solution, InstanceFile};
use cluster_describe::lp::{build_overlap_lp, build_relaxation, write_lp_format};
use cluster_describe::report::{solve, Method, SolveSettings};
use cluster_describe::{stats, Error, Instance, Requirements};

/// Disjoint tag descriptors for clustered objects.
#[derive(Parser)]
#[command(name = "cluster-describe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one method and write a report.
    Solve(SolveArgs),
    /// Run a parameter sweep and write CSV.
    Experiment(ExperimentArgs),
    /// Generate a synthetic instance.
    Gen(GenArgs),
    /// Print instance statistics.
    Stats(StatsArgs),
    /// Rewrite an instance (pair extension, cluster merging).
    Transform(TransformArgs),
    /// Write the LP relaxation in CPLEX LP format.
    ExportLp(ExportArgs),
}

#[derive(Args)]
struct Targets {
    /// Per-cluster coverage targets, comma separated.
    #[arg(long, value_delimiter = ',')]
    coverage: Option<Vec<usize>>,
    /// Coverage target as a fraction of each cluster's size.
    #[arg(long)]
    coverage_frac: Option<f64>,
}

impl Targets {
    fn resolve(&self, inst: &Instance) -> Result<Requirements, Failure> {
        match (&self.coverage, self.coverage_frac) {
            (Some(c), _) => Ok(Requirements::new(c.clone())),
            (None, Some(f)) if (0.0..=1.0).contains(&f) => Ok(Requirements::from_fraction(inst, f)),
            (None, Some(f)) => Err(Failure::usage(format!(
                "--coverage-frac {f} outside [0, 1]"
            ))),
            (None, None) => Err(Failure::usage("missing --coverage or --coverage-frac")),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ilp,
    Round,
    RoundGeneral,
    RoundOverlap,
    Dp,
    Greedy,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ilp => Method::Ilp,
            MethodArg::Round => Method::Round,
            MethodArg::RoundGeneral => Method::RoundGeneral,
            MethodArg::RoundOverlap => Method::RoundOverlap,
            MethodArg::Dp => Method::Dp,
            MethodArg::Greedy => Method::Greedy,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[command(flatten)]
    targets: Targets,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    overlap_budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rounding retries [default: max(8, ⌈4 ln n⌉)]
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Fraction of the targets the greedy budget search must reach.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = ExactOptions::default().node_limit)]
    node_limit: u64,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the solution file here.
    #[arg(long)]
    solution_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    CoverageVsCost,
    CostVsCoverage,
    ApproxRatio,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    sweep: Sweep,
    #[arg(long)]
    instance: PathBuf,
    /// Budget grid as START:END:STEP.
    #[arg(long, default_value = "0:10:1")]
    grid: String,
    /// Coverage fractions for cost-vs-coverage.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7"
    )]
    fractions: Vec<f64>,
    #[command(flatten)]
    targets: Targets,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, env = "CLUSTER_DESCRIBE_JOBS")]
    jobs: Option<usize>,
    #[arg(long, default_value_t = ExactOptions::default().node_limit)]
    node_limit: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    instance: PathBuf,
    /// `extend-pairs`, or `merge-clusters SPEC` with SPEC like `1,2|3,4`.
    #[arg(long, num_args = 1..=2, value_names = ["OP", "SPEC"])]
    op: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    targets: Targets,
    #[arg(long)]
    budget: Option<usize>,
    /// Export the overlap LP instead of the plain relaxation.
    #[arg(long)]
    overlap_budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A message plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SolverStall { .. } | Error::Numerical(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(a: SolveArgs) -> Result<u8, Failure> {
    let file = read_instance(&a.instance)?;
    let inst = &file.instance;
    let mut req = a.targets.resolve(inst)?;
    req.budget = a.budget;
    req.overlap_budget = a.overlap_budget;
    let settings = SolveSettings {
        seed: a.seed,
        rounds: a.rounds,
        epsilon: a.epsilon,
        alpha: a.alpha,
        node_limit: a.node_limit,
        timing: a.timing,
    };
    let report = solve(a.method.into(), inst, &req, &settings)?;
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(a.out.as_deref(), &text)?;
    if let (Some(p), Some(s)) = (&a.solution_out, &report.solution) {
        emit(Some(p), &serialize_solution(s))?;
    }
    Ok(report.exit_code() as u8)
}

fn parse_grid(spec: &str) -> Result<Vec<usize>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Option<Vec<usize>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
    match nums.as_deref() {
        Some(&[a, b, s]) => Ok(grid(a, b, s)?),
        Some(&[a, b]) => Ok(grid(a, b, 1)?),
        _ => Err(Failure::usage(format!(
            "--grid {spec:?}: expected START:END:STEP"
        ))),
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Result<u8, Failure> {
    let file = read_instance(&a.instance)?;
    let inst = &file.instance;
    let opts = SweepOptions {
        jobs: a.jobs,
        exact: ExactOptions {
            node_limit: a.node_limit,
        },
    };
    let seed = a.seeds.first().copied().unwrap_or(0);
    let text = match a.sweep {
        Sweep::CoverageVsCost => {
            let targets = match (&a.targets.coverage, a.targets.coverage_frac) {
                (None, None) => inst.cluster_sizes().to_vec(),
                _ => a.targets.resolve(inst)?.coverage,
            };
            let rows = coverage_vs_cost(inst, &parse_grid(&a.grid)?, &targets, seed, &opts)?;
            to_csv(&rows, COVERAGE_HEADER)?
        }
        Sweep::CostVsCoverage => {
            if let Some(f) = a.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
                return Err(Failure::usage(format!("--fractions: {f} outside [0, 1]")));
            }
            to_csv(
                &cost_vs_coverage(inst, &a.fractions, seed, &opts)?,
                COST_HEADER,
            )?
        }
        Sweep::ApproxRatio => {
            let req = a.targets.resolve(inst)?;
            let rows = approx_ratio(inst, &req, &parse_grid(&a.grid)?, &a.seeds, &opts)?;
            to_csv(&rows, RATIO_HEADER)?
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_gen(a: GenArgs) -> Result<u8, Failure> {
    let inst = gen_synthetic(a.n, a.m, a.k, a.p, a.seed)?;
    emit(
        a.out.as_deref(),
        &serialize_instance(&InstanceFile::from_instance(inst)),
    )?;
    Ok(0)
}

fn cmd_stats(a: StatsArgs) -> Result<u8, Failure> {
    let inst = read_instance(&a.instance)?.instance;
    let s = stats(&inst);
    let cells = inst.n() * inst.m();
    let density = if cells == 0 {
        0.0
    } else {
        inst.incidences() as f64 / cells as f64
    };
    if a.json {
        let v = serde_json::json!({
            "n": inst.n(),
            "m": inst.m(),
            "k": inst.k(),
            "cluster_sizes": inst.cluster_sizes(),
            "eta": s.eta,
            "gamma": s.gamma,
            "delta": s.delta,
            "density": density,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("plain json"));
    } else {
        println!("n: {}", inst.n());
        println!("m: {}", inst.m());
        println!("k: {}", inst.k());
        let sizes: Vec<String> = inst.cluster_sizes().iter().map(|c| c.to_string()).collect();
        println!("cluster sizes: {}", sizes.join(", "));
        println!("eta: {}", s.eta);
        println!("gamma: {}", s.gamma);
        println!("delta: {}", s.delta);
        println!("density: {density:.6}");
    }
    Ok(0)
}

fn merge_spec(file: &InstanceFile, spec: &str) -> Result<(Vec<Vec<usize>>, Vec<String>), Failure> {
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    for part in spec.split('|') {
        let mut group = Vec::new();
        for label in part.split(',').map(str::trim) {
            let l = file.cluster_index(label).ok_or_else(|| {
                Failure::usage(format!("merge spec: unknown cluster label {label:?}"))
            })?;
            group.push(l);
        }
        labels.push(part.split(',').map(str::trim).collect::<Vec<_>>().join("+"));
        groups.push(group);
    }
    Ok((groups, labels))
}

fn cmd_transform(a: TransformArgs) -> Result<u8, Failure> {
    let file = read_instance(&a.instance)?;
    let out = match a
        .op
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .as_slice()
    {
        ["extend-pairs"] => {
            let (inst, map) = extend_pairs(&file.instance)?;
            InstanceFile {
                instance: inst,
                tag_labels: Some(map.labels(file.tag_labels.as_deref())),
                ..file
            }
        }
        ["merge-clusters", spec] => {
            let (groups, labels) = merge_spec(&file, spec)?;
            InstanceFile {
                instance: merge_clusters(&file.instance, &groups)?,
                cluster_labels: labels,
                ..file
            }
        }
        ["merge-clusters"] => {
            return Err(Failure::usage(
                "merge-clusters needs a SPEC such as 1,2|3,4",
            ))
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown --op {:?}; expected extend-pairs or merge-clusters SPEC",
                other.join(" ")
            )))
        }
    };
    emit(a.out.as_deref(), &serialize_instance(&out))?;
    Ok(0)
}

fn cmd_export(a: ExportArgs) -> Result<u8, Failure> {
    let file = read_instance(&a.instance)?;
    let inst = &file.instance;
    let mut req = a.targets.resolve(inst)?;
    req.budget = a.budget;
    req.overlap_budget = a.overlap_budget;
    let model = match a.overlap_budget {
        Some(_) if a.budget.is_none() => {
            return Err(Failure::usage("the overlap LP needs --budget"))
        }
        Some(_) => build_overlap_lp(inst, &req)?,
        None => build_relaxation(inst, &req)?,
    };
    let mut buf = Vec::new();
    write_lp_format(&model, &mut buf)?;
    emit(
        a.out.as_deref(),
        &String::from_utf8(buf).expect("LP text is utf-8"),
    )?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Transform(a) => cmd_transform(a),
        Command::ExportLp(a) => cmd_export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
