use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use clusterbound::clustering::ExactLimits;
use clusterbound::generators::{
    epsilon_partition, planted_instance, tight_instance, uniform_random_instance, uniformize, PlantedSpec,
    TightInstanceSpec, WeightedFiniteSpace,
};
use clusterbound::rational::{self, Rational};
use clusterbound::verify::{GeneratorMix, SuiteConfig};
use clusterbound::{report, FiniteSemimetricSpace, ScaleParams};

/// Largest uniformized space written out point by point.
const EXPAND_LIMIT: u64 = 5_000;

#[derive(Parser, Debug)]
#[command(name = "clusterbound", version, about = "Cluster structures and measure bounds for finite semimetric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Observed parameters, greedy and exact structures, and the bounds.
    Analyze(ScaleArgs),
    /// The greedy cluster decomposition.
    Greedy(ScaleArgs),
    /// An optimal cluster structure by exhaustive search.
    Exact(ScaleArgs),
    /// Write a generated space.
    Generate(GenerateArgs),
    /// Uniformize a weighted space over an eps-partition.
    Discretize(DiscretizeArgs),
    /// Run the proposition checks on seeded random instances.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Same flags as [`Output`], defaulting to the space text format.
#[derive(Args, Debug)]
struct SpaceOutput {
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct ScaleArgs {
    /// Space file, text or JSON.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    r: Rational,
    #[arg(long)]
    k: usize,
    /// Largest space the exact search accepts.
    #[arg(long, default_value_t = ExactLimits::default().max_points)]
    exact_limit: usize,
    /// Search nodes before the exact search gives up.
    #[arg(long, default_value_t = ExactLimits::default().node_budget)]
    node_budget: u64,
    #[command(flatten)]
    out: Output,
}

impl ScaleArgs {
    fn limits(&self) -> ExactLimits {
        ExactLimits { max_points: self.exact_limit, node_budget: self.node_budget }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GeneratorKind {
    Tight,
    Planted,
    Uniform,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Generator; may come from `--config` instead.
    #[arg(value_enum)]
    kind: Option<GeneratorKind>,
    /// JSON generator spec with a "kind" field; flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    r: Rational,
    /// Tight: number of blocks besides B_0.
    #[arg(long)]
    k: Option<usize>,
    /// Tight: size of B_1..B_k.
    #[arg(long)]
    m: Option<usize>,
    /// Tight: size of B_0.
    #[arg(long)]
    m0: Option<usize>,
    /// Planted: comma-separated block sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Planted: fraction of pairs turned into medium edges.
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    noise: Rational,
    /// Uniform: number of points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: SpaceOutput,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GeneratorConfig {
    Tight(TightInstanceSpec),
    Planted(PlantedSpec),
    Uniform {
        n: usize,
        #[serde(with = "rational::serde_pq")]
        r: Rational,
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct DiscretizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Point weights, whitespace separated, in point order.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    eps: Rational,
    #[command(flatten)]
    out: SpaceOutput,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    #[arg(long, default_value_t = 1)]
    k_min: usize,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    #[arg(long, default_value_t = ExactLimits::default().max_points)]
    exact_limit: usize,
    #[arg(long, default_value_t = ExactLimits::default().node_budget)]
    node_budget: u64,
    #[command(flatten)]
    out: Output,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn load_space(path: &Path) -> Result<FiniteSemimetricSpace> {
    FiniteSemimetricSpace::parse_any(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_weights(path: &Path) -> Result<Vec<Rational>> {
    let mut weights = Vec::new();
    for (i, line) in read(path)?.lines().enumerate() {
        for token in line.split_whitespace() {
            let w = rational::parse(token).with_context(|| format!("{}: line {}", path.display(), i + 1))?;
            weights.push(w);
        }
    }
    Ok(weights)
}

fn emit(output: &Option<PathBuf>, body: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, body).with_context(|| format!("{}: cannot write", path.display())),
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_space(out: &SpaceOutput, space: &FiniteSemimetricSpace) -> Result<()> {
    match out.format {
        Format::Text => emit(&out.output, &space.to_text()),
        Format::Json => emit(&out.output, &report::canonical_json(&space.to_doc())?),
    }
}

fn params(r: &Rational, k: usize) -> Result<ScaleParams> {
    Ok(ScaleParams::new(r.clone(), k)?)
}

fn analyze(args: &ScaleArgs) -> Result<()> {
    let space = load_space(&args.input)?;
    let options = clusterbound::CertificateOptions { exact: true, limits: args.limits() };
    let cert = clusterbound::build_certificate(&space, &params(&args.r, args.k)?, &options);
    match args.out.format {
        Format::Json => emit(&args.out.output, &report::canonical_json(&cert)?),
        Format::Text => emit(&args.out.output, &report::certificate_table(&cert)),
    }
}

fn greedy(args: &ScaleArgs) -> Result<()> {
    let space = load_space(&args.input)?;
    let decomp = clusterbound::greedy_decomposition(&space, &params(&args.r, args.k)?);
    match args.out.format {
        Format::Json => emit(&args.out.output, &report::canonical_json(&decomp)?),
        Format::Text => emit(&args.out.output, &report::decomposition_table(&decomp)),
    }
}

fn exact(args: &ScaleArgs) -> Result<()> {
    let space = load_space(&args.input)?;
    let search = clusterbound::exact_structure(&space, &params(&args.r, args.k)?, &args.limits())
        .with_context(|| format!("{}", args.input.display()))?;
    match args.out.format {
        Format::Json => emit(&args.out.output, &report::canonical_json(&search)?),
        Format::Text => emit(&args.out.output, &report::exact_table(&search)),
    }
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let config = match (&args.config, args.kind) {
        (Some(path), _) => serde_json::from_str(&read(path)?).with_context(|| format!("{}", path.display()))?,
        (None, Some(GeneratorKind::Tight)) => GeneratorConfig::Tight(TightInstanceSpec {
            k: args.k.context("tight needs --k")?,
            m: args.m.context("tight needs --m")?,
            m0: args.m0.context("tight needs --m0")?,
            r: args.r.clone(),
        }),
        (None, Some(GeneratorKind::Planted)) => GeneratorConfig::Planted(PlantedSpec {
            block_sizes: args.sizes.clone(),
            noise: args.noise.clone(),
            r: args.r.clone(),
            seed: args.seed,
        }),
        (None, Some(GeneratorKind::Uniform)) => {
            GeneratorConfig::Uniform { n: args.n.context("uniform needs --n")?, r: args.r.clone(), seed: args.seed }
        }
        (None, None) => bail!("generate needs a generator kind or --config"),
    };
    let space = match &config {
        GeneratorConfig::Tight(spec) => tight_instance(spec)?,
        GeneratorConfig::Planted(spec) => planted_instance(spec)?,
        GeneratorConfig::Uniform { n, r, seed } => uniform_random_instance(*n, r, *seed)?,
    };
    emit_space(&args.out, &space)
}

#[derive(Serialize)]
struct DiscretizeDoc {
    partition: Vec<Vec<usize>>,
    part_measures: Vec<String>,
    q: Vec<String>,
    multiplicities: Vec<u64>,
    total: u64,
    blocks: clusterbound::space::SpaceDoc,
}

fn discretize(args: &DiscretizeArgs) -> Result<()> {
    let space = load_space(&args.input)?;
    let weights = load_weights(&args.weights)?;
    let weighted = WeightedFiniteSpace::new(space, weights).with_context(|| format!("{}", args.weights.display()))?;
    let partition = epsilon_partition(&weighted, &args.eps)?;
    let uniform = uniformize(&weighted, &partition, &args.eps)?;
    match args.out.format {
        Format::Text => {
            if uniform.total() > EXPAND_LIMIT {
                bail!(
                    "uniformized space has {} points, more than {EXPAND_LIMIT} to write out; use --format json",
                    uniform.total()
                );
            }
            emit(&args.out.output, &uniform.expand()?.to_text())
        }
        Format::Json => {
            let doc = DiscretizeDoc {
                partition,
                part_measures: uniform.part_measures.iter().map(rational::to_pq).collect(),
                q: uniform.q.iter().map(rational::to_pq).collect(),
                multiplicities: uniform.multiplicities.clone(),
                total: uniform.total(),
                blocks: uniform.blocks.to_doc(),
            };
            emit(&args.out.output, &report::canonical_json(&doc)?)
        }
    }
}

fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let config = SuiteConfig {
        seed: args.seed,
        trials: args.trials,
        max_n: args.max_n,
        k_min: args.k_min,
        k_max: args.k_max,
        mix: GeneratorMix::default(),
        limits: ExactLimits { max_points: args.exact_limit, node_budget: args.node_budget },
    };
    let report = clusterbound::run_suite(&config)?;
    match args.out.format {
        Format::Json => emit(&args.out.output, &report::canonical_json(&report)?)?,
        Format::Text => emit(&args.out.output, &report::report_table(&report))?,
    }
    if report.failed() > 0 {
        eprintln!("{} check(s) failed", report.failed());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Analyze(a) => analyze(a)?,
        Command::Greedy(a) => greedy(a)?,
        Command::Exact(a) => exact(a)?,
        Command::Generate(a) => generate(a)?,
        Command::Discretize(a) => discretize(a)?,
        Command::Verify(a) => return verify(a),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
