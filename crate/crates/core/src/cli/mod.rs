//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a simulation ends
//! in a state that prevents completing the request (the population died).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::branching::{
    classify, derive_child_dist, extinction_probability, mu_closed_form, run_ensemble, Caps,
    DerivedChildDist, EnsembleSummary, ProcessKind,
};
use crate::graph::{build_network, compute_metrics, export_network, ExportFormat};
use crate::netgen::{run_policy_experiment, sample_population, ExperimentError, GenerationRecord};
use crate::policy::{
    builtin_distribution, dist_config_string, expected_population_ratio, parse_dist_config,
    resolve_dist, ChildCountDist, MarriageRatio, NamedDist, BUILTIN_DISTRIBUTIONS,
};
use crate::{rng, VERSION};

mod config;
mod report;

pub use config::{ExperimentConfig, PolicySpec};
pub use report::{AnalyzeReport, GwReport, SimulationReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Simulation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "strongties",
    version,
    about = "Fragmentation of strong-ties social networks under population control policies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived offspring law, mean, criticality and extinction probability.
    Analyze(AnalyzeArgs),
    /// Generate populations and write their networks and metrics.
    Simulate {
        #[command(subcommand)]
        mode: SimulateMode,
    },
    /// Monte Carlo branching runs compared against the analytic prediction.
    Gw(GwArgs),
    /// Print the built-in national distributions as a config document.
    Builtins,
}

/// Where the family-size distribution comes from.
#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// Built-in policy (1C, 0/2C, 2C, 0/3C, C++) or inline weights.
    #[arg(long, conflicts_with = "dist", allow_hyphen_values = true)]
    pub policy: Option<String>,
    /// Built-in distribution (china, india), policy, or inline weights such
    /// as "0.5,0.25,0.25". With --dist-file, the section to read.
    #[arg(long, allow_hyphen_values = true)]
    pub dist: Option<String>,
    /// Distribution config document to read --dist from.
    #[arg(long, requires = "dist")]
    pub dist_file: Option<PathBuf>,
}

struct ResolvedDist {
    label: String,
    dist: ChildCountDist,
    default_alpha: Option<MarriageRatio>,
}

impl DistArgs {
    fn resolve(&self) -> Result<ResolvedDist, CliError> {
        if let Some(path) = &self.dist_file {
            let name = self.dist.as_deref().unwrap_or_default();
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let found = parse_dist_config(&text)
                .map_err(input)?
                .into_iter()
                .find(|d| d.name == name)
                .ok_or_else(|| {
                    CliError::Input(format!("no section `{name}` in {}", path.display()))
                })?;
            return Ok(ResolvedDist {
                label: name.to_string(),
                dist: found.weights,
                default_alpha: Some(found.alpha),
            });
        }
        let spec = self
            .policy
            .as_deref()
            .or(self.dist.as_deref())
            .ok_or_else(|| CliError::Input("one of --policy or --dist is required".into()))?;
        let dist = resolve_dist(spec).map_err(|e| CliError::Input(format!("distribution: {e}")))?;
        let default_alpha = builtin_distribution(spec).ok().map(|d| d.alpha);
        Ok(ResolvedDist {
            label: spec.to_string(),
            dist,
            default_alpha,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Print the structured document instead of a summary.
    #[arg(long)]
    pub json: bool,
    /// Seed for every random draw; generated and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct CapArgs {
    #[arg(long, default_value_t = 500)]
    pub max_levels: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_nodes: u64,
    /// Worker threads for Monte Carlo runs (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Marriage ratio; defaults to the built-in value for named distributions.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Also estimate the survival frequency from this many runs.
    #[arg(long, default_value_t = 0)]
    pub runs: u64,
    #[command(flatten)]
    pub caps: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Directory to write analysis.json into.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateMode {
    /// Sample one generation from a family-size distribution.
    Sample(SampleArgs),
    /// Evolve generations under a policy.
    Evolve(EvolveArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Dot,
    Graphml,
    EdgeCsv,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Dot => ExportFormat::Dot,
            FormatArg::Graphml => ExportFormat::Graphml,
            FormatArg::EdgeCsv => ExportFormat::EdgeCsv,
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Target number of persons.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "edge-csv")]
    pub format: FormatArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Experiment config document; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in policy or inline weights.
    #[arg(long)]
    pub policy: Option<String>,
    /// Number of founders.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub generations: Option<u32>,
    /// Probability that each allowed child is born.
    #[arg(long)]
    pub utilization: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GwArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// With a marriage ratio the input is a family-size distribution and the
    /// strong-ties process is run; without one the input is used directly
    /// as the offspring law of a plain Galton-Watson process.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub runs: u64,
    #[command(flatten)]
    pub caps: CapArgs,
    /// Levels of mean Z_t to report.
    #[arg(long, default_value_t = 10)]
    pub report_levels: usize,
    /// Include every run's level sizes in the document.
    #[arg(long)]
    pub trajectories: bool,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Directory to write gw.json into.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate { mode } => match mode {
            SimulateMode::Sample(args) => cmd_sample(args),
            SimulateMode::Evolve(args) => cmd_evolve(args),
        },
        Command::Gw(args) => cmd_gw(args),
        Command::Builtins => {
            let all: Vec<NamedDist> = BUILTIN_DISTRIBUTIONS
                .iter()
                .map(|n| builtin_distribution(n).expect("built-in exists"))
                .collect();
            print!("{}", dist_config_string(&all));
            Ok(())
        }
    }
}

fn alpha_or_default(
    alpha: Option<f64>,
    resolved: &ResolvedDist,
) -> Result<MarriageRatio, CliError> {
    match (alpha, resolved.default_alpha) {
        (Some(a), _) => MarriageRatio::new(a).map_err(input),
        (None, Some(a)) => Ok(a),
        (None, None) => Err(CliError::Input(format!(
            "--alpha is required for `{}`",
            resolved.label
        ))),
    }
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(input)?;
            Ok(pool.install(f))
        }
    }
}

fn caps_from(args: &CapArgs) -> Result<Caps, CliError> {
    Caps::new(args.max_levels, args.max_nodes).map_err(input)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let resolved = args.dist.resolve()?;
    let alpha = alpha_or_default(args.alpha, &resolved)?;
    let caps = caps_from(&args.caps)?;
    let seed = args.output.seed.unwrap_or_else(rng::fresh_seed);
    let derived = derive_child_dist(&resolved.dist, alpha);
    let crit = classify(&derived);
    let q = extinction_probability(&derived).ok();
    let survival = if args.runs > 0 {
        let summary = in_pool(args.caps.threads, || {
            run_ensemble(&derived, ProcessKind::StrongTies, args.runs, caps, seed, 0, false)
        })?
        .map_err(input)?;
        Some(summary.survival_frequency)
    } else {
        None
    };
    let report = AnalyzeReport {
        tool: "strongties".into(),
        version: VERSION.into(),
        command: "analyze".into(),
        input: resolved.label.clone(),
        weights: resolved.dist.weights().to_vec(),
        alpha: alpha.value(),
        seed,
        runs: args.runs,
        caps,
        mean_children: resolved.dist.mean(),
        expected_population_ratio: expected_population_ratio(&resolved.dist, alpha),
        a: derived.a().to_vec(),
        residual_folded: derived.residual_folded(),
        mu: derived.mu(),
        mu_closed_form: mu_closed_form(&resolved.dist, alpha),
        classification: crit.class,
        degenerate: crit.degenerate,
        extinction_probability_single: q,
        predicted_survival: q.map(|q| 1.0 - q * q),
        survival_frequency: survival,
    };
    let doc = to_json(&report);
    if let Some(dir) = &args.out {
        write_file(dir, "analysis.json", doc.as_bytes())?;
    }
    if args.output.json {
        print!("{doc}");
    } else {
        print!("{}", report.summary());
    }
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let resolved = args.dist.resolve()?;
    let alpha = alpha_or_default(args.alpha, &resolved)?;
    let seed = args.output.seed.unwrap_or_else(rng::fresh_seed);
    let format = ExportFormat::from(args.format);
    let pop = sample_population(&resolved.dist, alpha, args.n, &mut rng::seeded(seed)).map_err(input)?;
    let network = build_network(&pop);
    let metrics = compute_metrics(&network);
    let graph_file = format!("sample.{}", format.extension());
    write_file(&args.out, &graph_file, &export_network(&network, format))?;
    let report = SimulationReport {
        tool: "strongties".into(),
        version: VERSION.into(),
        command: "simulate sample".into(),
        config: serde_json::json!({
            "dist": resolved.label,
            "weights": resolved.dist.weights(),
            "alpha": alpha.value(),
            "n": args.n,
            "seed": seed,
            "format": format,
            "output_dir": args.out,
        }),
        seed,
        status: "complete".into(),
        generations: vec![report::GenerationSummary::new(
            0,
            pop.len(),
            pop.couples().len(),
            pop.alpha_realized,
            graph_file,
            metrics,
        )],
    };
    finish_simulation(&report, &args.out, args.output.json)
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig {
            initial_n: args
                .n
                .ok_or_else(|| CliError::Input("--n is required without --config".into()))?,
            alpha: args
                .alpha
                .ok_or_else(|| CliError::Input("--alpha is required without --config".into()))?,
            policy: PolicySpec::Named(args.policy.clone().ok_or_else(|| {
                CliError::Input("--policy is required without --config".into())
            })?),
            generations: 1,
            seed: None,
            utilization: 1.0,
            output_dir: PathBuf::from("out"),
            format: ExportFormat::EdgeCsv,
        },
    };
    if let Some(p) = &args.policy {
        config.policy = PolicySpec::Named(p.clone());
    }
    if let Some(n) = args.n {
        config.initial_n = n;
    }
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    if let Some(g) = args.generations {
        config.generations = g;
    }
    if let Some(u) = args.utilization {
        config.utilization = u;
    }
    if let Some(f) = args.format {
        config.format = f.into();
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = args.output.seed {
        config.seed = Some(seed);
    }
    let seed = *config.seed.get_or_insert_with(rng::fresh_seed);
    let (policy, alpha) = config.validate()?;
    let out_dir = config.output_dir.clone();

    let result = run_policy_experiment(
        config.initial_n,
        &policy,
        alpha,
        config.generations,
        config.utilization,
        &mut rng::seeded(seed),
    );
    let (records, died_at) = match result {
        Ok(records) => (records, None),
        Err(ExperimentError::PopulationDied {
            generation,
            partial,
        }) => (partial, Some(generation)),
        Err(e) => return Err(input(e)),
    };
    let generations = write_generations(&records, config.format, &out_dir)?;
    let report = SimulationReport {
        tool: "strongties".into(),
        version: VERSION.into(),
        command: "simulate evolve".into(),
        config: serde_json::to_value(&config).expect("config serializes"),
        seed,
        status: match died_at {
            None => "complete".into(),
            Some(g) => format!("population died at generation {g}"),
        },
        generations,
    };
    finish_simulation(&report, &out_dir, args.output.json)?;
    match died_at {
        None => Ok(()),
        Some(g) => Err(CliError::Simulation(format!(
            "population died: generation {g} is empty (partial outputs kept in {})",
            out_dir.display()
        ))),
    }
}

fn write_generations(
    records: &[GenerationRecord],
    format: ExportFormat,
    out_dir: &Path,
) -> Result<Vec<report::GenerationSummary>, CliError> {
    fs::create_dir_all(out_dir)?;
    records
        .iter()
        .map(|r| {
            let g = r.population.generation_index;
            let graph_file = format!("generation_{g:03}.{}", format.extension());
            write_file(out_dir, &graph_file, &export_network(&r.network, format))?;
            Ok(report::GenerationSummary::new(
                g,
                r.population.len(),
                r.population.couples().len(),
                r.population.alpha_realized,
                graph_file,
                r.metrics.clone(),
            ))
        })
        .collect()
}

fn finish_simulation(report: &SimulationReport, out_dir: &Path, json: bool) -> Result<(), CliError> {
    let doc = to_json(report);
    write_file(out_dir, "metrics.json", doc.as_bytes())?;
    if json {
        print!("{doc}");
    } else {
        print!("{}", report.summary());
    }
    Ok(())
}

fn cmd_gw(args: GwArgs) -> Result<(), CliError> {
    let resolved = args.dist.resolve()?;
    let caps = caps_from(&args.caps)?;
    let seed = args.output.seed.unwrap_or_else(rng::fresh_seed);
    let (derived, process, alpha) = match args.alpha {
        Some(a) => {
            let alpha = MarriageRatio::new(a).map_err(input)?;
            (
                derive_child_dist(&resolved.dist, alpha),
                ProcessKind::StrongTies,
                Some(a),
            )
        }
        None => (
            DerivedChildDist::from_offspring(resolved.dist.weights()).map_err(input)?,
            ProcessKind::GaltonWatson,
            None,
        ),
    };
    let summary: EnsembleSummary = in_pool(args.caps.threads, || {
        run_ensemble(
            &derived,
            process,
            args.runs,
            caps,
            seed,
            args.report_levels,
            args.trajectories,
        )
    })?
    .map_err(input)?;
    let crit = classify(&derived);
    let q = extinction_probability(&derived).ok();
    let predicted_survival = q.map(|q| match process {
        ProcessKind::GaltonWatson => 1.0 - q,
        ProcessKind::StrongTies => 1.0 - q * q,
    });
    let report = GwReport {
        tool: "strongties".into(),
        version: VERSION.into(),
        command: "gw".into(),
        input: resolved.label,
        weights: resolved.dist.weights().to_vec(),
        alpha,
        seed,
        a: derived.a().to_vec(),
        mu: derived.mu(),
        classification: crit.class,
        degenerate: crit.degenerate,
        extinction_probability_single: q,
        predicted_survival,
        summary,
    };
    let doc = to_json(&report);
    if let Some(dir) = &args.out {
        write_file(dir, "gw.json", doc.as_bytes())?;
    }
    if args.output.json {
        print!("{doc}");
    } else {
        print!("{}", report.summary());
    }
    Ok(())
}
