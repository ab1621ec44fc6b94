//! Subcommands of the `lukmlp` binary. Each `cmd_*` function does the work
//! and returns a report; [`run`] prints it and picks the exit code.

use std::fmt;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lukmlp_core::dataset::{gen_two_moons, scale_unit, split, Scaling};
use lukmlp_core::formula::{extract, extract_aggregate, extract_all, parse, print, simplify};
use lukmlp_core::num::fnv1a64;
use lukmlp_core::selftest::{run_suite, Standard, SuiteReport, UnclampedOplus, DEFAULT_SAMPLES};
use lukmlp_core::trace::{check_summary_trace, check_trace, symbolic_train_loop, Violation};
use lukmlp_core::training::{accuracy, train, EpochRecord, EtaCombine, UpdateMode};
use lukmlp_core::{
    Aggregator, Axiom, Configuration, Digest, Formula, NetworkState, Prng, Sample, TrainConfig,
    TraceStep, UnitValue, TAU,
};

use crate::csv_io::{read_csv, write_csv, write_history};
use crate::manifest::{default_manifest_path, Artifacts, ConfigRecord, DataRecord, InitRecord, RunManifest, SampleRecord, VERSION};
use crate::model_io::{load_model, save_model};
use crate::trace_io::{read_trace, write_trace};

/// Bad flag combinations or values discovered after parsing; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 2 for usage errors, 1 for everything else.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "LUKMLP_SEED";
/// Salt for the split stream of `gen-data`, so it differs from generation.
const SPLIT_SALT: u64 = 0x5350_4c49_545f_5345;

/// `LUKMLP_SEED` if set, else 42.
pub fn env_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(usage(format!("{SEED_ENV}: {e}"))),
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("{s:?} is not a finite number")),
    }
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0,1]"))
    }
}

fn parse_open_fraction(s: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not strictly between 0 and 1"))
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("{x} is negative"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not positive"))
    }
}

fn parse_mode(s: &str) -> Result<UpdateMode, String> {
    UpdateMode::from_name(s).ok_or_else(|| format!("{s:?} is not one of lukasiewicz, clipped_gd"))
}

fn parse_combine(s: &str) -> Result<EtaCombine, String> {
    EtaCombine::from_name(s).ok_or_else(|| format!("{s:?} is not one of lukasiewicz_product, real_product"))
}

fn parse_aggregator(s: &str) -> Result<Aggregator, String> {
    Aggregator::from_name(s).ok_or_else(|| format!("{s:?} is not one of max, min, sum"))
}

fn unit(x: f64) -> UnitValue {
    UnitValue::saturating(x)
}

#[derive(Parser, Debug)]
#[command(name = "lukmlp", version, about = "Perceptrons trained in Łukasiewicz arithmetic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a two-moons pool, split it, scale both sides with the
    /// training min/max and write train.csv and test.csv
    GenData(GenDataArgs),
    /// Train a network and write model, history, manifest and optionally a
    /// per-epoch trace
    Train(TrainArgs),
    /// Report accuracy of a model on CSV data
    Eval(EvalArgs),
    /// Run a model on one input
    Predict(PredictArgs),
    /// Print the formula computed by each output of a model
    Extract(ExtractArgs),
    /// Simplify a formula with the constant-folding rewrites
    Simplify(FormulaArgs),
    /// Evaluate a formula at an assignment
    EvalFormula(EvalFormulaArgs),
    /// Run the single-sample training loop and write its trace
    Trace(TraceArgs),
    /// Replay a trace against its manifest
    CheckTrace(CheckTraceArgs),
    /// Check the MV-algebra equations on random samples
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    /// Points per class in the pool before splitting
    #[arg(long, default_value_t = 4000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_per_class: u64,
    /// Standard deviation of the Gaussian noise on each coordinate
    #[arg(long, default_value_t = 0.1, value_parser = parse_nonnegative)]
    pub noise: f64,
    /// Seed [default: $LUKMLP_SEED, else 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of the pool used for training
    #[arg(long, default_value_t = 0.75, value_parser = parse_open_fraction)]
    pub train_frac: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Default, Clone)]
pub struct TrainArgs {
    /// Training CSV [default: train.csv, or the manifest's data]
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Optional test CSV, reported after training
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Layer widths, input first [default: 2,32,32,1]
    #[arg(long, value_delimiter = ',')]
    pub arch: Option<Vec<usize>>,
    /// Learning rate in [0,1] [default: 1]
    #[arg(long, value_parser = parse_unit)]
    pub eta: Option<f64>,
    /// Stop once the epoch mean distance is at most this [default: 0]
    #[arg(long, value_parser = parse_unit)]
    pub eps: Option<f64>,
    /// Maximum number of epochs [default: 250]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: Option<u32>,
    /// Mini-batch size [default: 128]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: Option<u64>,
    /// lukasiewicz or clipped_gd [default: lukasiewicz]
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<UpdateMode>,
    /// lukasiewicz_product or real_product [default: lukasiewicz_product]
    #[arg(long, value_parser = parse_combine)]
    pub eta_combine: Option<EtaCombine>,
    /// Added to the gradient norm before normalizing [default: 1e-8]
    #[arg(long, value_parser = parse_positive)]
    pub norm_eps: Option<f64>,
    /// Output aggregation: max, min or sum [default: max]
    #[arg(long, value_parser = parse_aggregator)]
    pub aggregator: Option<Aggregator>,
    /// Seed for initialization and shuffling [default: manifest, then
    /// $LUKMLP_SEED, then 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Load settings from a manifest; flags given here take precedence
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    /// Directory for model.txt, history.csv and manifest.json [default: .,
    /// or the manifest's artifact paths]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Model path, overriding --out-dir
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// History CSV path, overriding --out-dir
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Manifest path, overriding --out-dir
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Also write the per-epoch trace here
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("data").required(true).multiple(true).args(["train", "test"]))]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value = "max", value_parser = parse_aggregator)]
    pub aggregator: Aggregator,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated input values in [0,1]
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_unit)]
    pub input: Vec<f64>,
    #[arg(long, default_value = "max", value_parser = parse_aggregator)]
    pub aggregator: Aggregator,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Only this output (0-based)
    #[arg(long, conflicts_with = "aggregate")]
    pub output: Option<usize>,
    /// One formula for the aggregated output
    #[arg(long)]
    pub aggregate: bool,
    #[arg(long, default_value = "max", value_parser = parse_aggregator)]
    pub aggregator: Aggregator,
    /// Simplify before printing
    #[arg(long)]
    pub simplify: bool,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["formula", "file"]))]
pub struct FormulaArgs {
    /// Formula text
    pub formula: Option<String>,
    /// Read the formula from a file instead
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalFormulaArgs {
    #[command(flatten)]
    pub source: FormulaArgs,
    /// Comma-separated values of x0, x1, …
    #[arg(long, value_delimiter = ',', value_parser = parse_unit)]
    pub at: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct TraceArgs {
    /// Initial network
    #[arg(long, required_unless_present = "example", conflicts_with = "example")]
    pub model: Option<PathBuf>,
    /// Use the built-in two-neuron example network; input and target then
    /// default to (0.2,0.3) and 0.8
    #[arg(long)]
    pub example: bool,
    /// Comma-separated input values in [0,1]
    #[arg(long, value_delimiter = ',', value_parser = parse_unit, required_unless_present = "example")]
    pub input: Vec<f64>,
    #[arg(long, value_parser = parse_unit, required_unless_present = "example")]
    pub target: Option<f64>,
    #[arg(long, default_value_t = 0.1, value_parser = parse_unit)]
    pub eps: f64,
    /// Epoch limit E
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: u32,
    #[arg(long, default_value_t = 1.0, value_parser = parse_unit)]
    pub eta: f64,
    #[arg(long, default_value = "lukasiewicz", value_parser = parse_mode)]
    pub mode: UpdateMode,
    #[arg(long, default_value = "lukasiewicz_product", value_parser = parse_combine)]
    pub eta_combine: EtaCombine,
    #[arg(long, default_value_t = 1e-8, value_parser = parse_positive)]
    pub norm_eps: f64,
    #[arg(long, default_value = "max", value_parser = parse_aggregator)]
    pub aggregator: Aggregator,
    #[arg(long, default_value = "trace.jsonl")]
    pub out: PathBuf,
    /// Manifest path [default: <out> with extension .manifest.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckTraceArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Manifest written with the trace [default: <trace> with extension
    /// .manifest.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Samples per equation
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = TAU, value_parser = parse_positive)]
    pub tolerance: f64,
    /// Run against a model whose ⊕ does not truncate (suite sanity check)
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GenDataReport {
    pub train: PathBuf,
    pub test: PathBuf,
    pub train_rows: usize,
    pub test_rows: usize,
    pub scaling: Scaling,
}

pub fn cmd_gen_data(a: &GenDataArgs) -> Result<GenDataReport> {
    let seed = match a.seed {
        Some(s) => s,
        None => env_seed()?,
    };
    let n = usize::try_from(a.n_per_class).map_err(|_| usage("--n-per-class too large"))?;
    let pool = gen_two_moons(n, a.noise, seed);
    let (train, test) = split(&pool, a.train_frac, seed ^ SPLIT_SALT)?;
    let (train, scaling) = scale_unit(&train)?;
    let test = scaling.apply(&test);
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let train_path = a.out_dir.join("train.csv");
    let test_path = a.out_dir.join("test.csv");
    write_csv(&train, &train_path).with_context(|| format!("writing {}", train_path.display()))?;
    write_csv(&test, &test_path).with_context(|| format!("writing {}", test_path.display()))?;
    Ok(GenDataReport {
        train: train_path,
        test: test_path,
        train_rows: train.len(),
        test_rows: test.len(),
        scaling,
    })
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: PathBuf,
    pub history_path: PathBuf,
    pub manifest: PathBuf,
    pub trace: Option<PathBuf>,
    pub history: Vec<EpochRecord>,
    pub stopped_early: bool,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
}

pub const DEFAULT_ARCH: [usize; 4] = [2, 32, 32, 1];

fn load_samples(path: &Path) -> Result<Vec<Sample>> {
    let ds = read_csv(path).with_context(|| format!("reading {}", path.display()))?;
    if ds.is_empty() {
        bail!("{} contains no rows", path.display());
    }
    Ok(ds.to_samples())
}

pub fn cmd_train(a: &TrainArgs) -> Result<TrainReport> {
    let base = a.from_manifest.as_deref().map(RunManifest::load).transpose()?;
    if let Some(m) = &base {
        if m.command != "train" {
            return Err(usage(format!("manifest was written by {:?}, not train", m.command)));
        }
    }
    let mut cfg = match &base {
        Some(m) => m.config.to_config()?,
        None => TrainConfig {
            seed: env_seed()?,
            ..TrainConfig::default()
        },
    };
    if let Some(x) = a.eta {
        cfg.eta = unit(x);
    }
    if let Some(x) = a.eps {
        cfg.eps = unit(x);
    }
    if let Some(x) = a.epochs {
        cfg.max_epochs = x;
    }
    if let Some(x) = a.batch {
        cfg.batch_size = usize::try_from(x).map_err(|_| usage("--batch too large"))?;
    }
    if let Some(x) = a.mode {
        cfg.update_mode = x;
    }
    if let Some(x) = a.eta_combine {
        cfg.eta_combine = x;
    }
    if let Some(x) = a.norm_eps {
        cfg.norm_eps = x;
    }
    if let Some(x) = a.aggregator {
        cfg.aggregator = x;
    }
    if let Some(x) = a.seed {
        cfg.seed = x;
    }
    cfg.validate()?;

    let arch = a
        .arch
        .clone()
        .or_else(|| base.as_ref().map(|m| m.init.arch.clone()))
        .unwrap_or_else(|| DEFAULT_ARCH.to_vec());
    if arch.len() < 2 || arch.contains(&0) {
        return Err(usage("--arch needs at least two positive widths"));
    }
    if arch[0] != 2 {
        bail!("architecture input width {} does not match the 2-dimensional data", arch[0]);
    }

    let base_data = base.as_ref().and_then(|m| m.data.as_ref());
    let train_path = a
        .train
        .clone()
        .or_else(|| base_data.map(|d| d.path.clone()))
        .unwrap_or_else(|| PathBuf::from("train.csv"));
    let bytes = fs::read(&train_path).with_context(|| format!("reading {}", train_path.display()))?;
    let fnv = format!("{:016x}", fnv1a64(&bytes));
    if let (Some(d), None) = (base_data, &a.train) {
        if d.fnv != fnv {
            bail!("{} changed since the manifest was written", train_path.display());
        }
    }
    let ds = crate::csv_io::read_dataset(bytes.as_slice())
        .with_context(|| format!("reading {}", train_path.display()))?;
    if ds.is_empty() {
        bail!("{} contains no rows", train_path.display());
    }
    let samples = ds.to_samples();

    let out_dir = a.out_dir.clone();
    let base_art = base.as_ref().map(|m| &m.artifacts);
    let pick = |explicit: &Option<PathBuf>, from_base: Option<&PathBuf>, name: &str| -> PathBuf {
        explicit
            .clone()
            .or_else(|| if out_dir.is_none() { from_base.cloned() } else { None })
            .unwrap_or_else(|| out_dir.clone().unwrap_or_else(|| PathBuf::from(".")).join(name))
    };
    let model_path = pick(&a.model, base_art.and_then(|x| x.model.as_ref()), "model.txt");
    let history_path = pick(&a.history, base_art.and_then(|x| x.history.as_ref()), "history.csv");
    let manifest_path = pick(&a.manifest, a.from_manifest.as_ref(), "manifest.json");
    let trace_path = match (&a.trace, base_art.and_then(|x| x.trace.as_ref())) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(p)) => Some(pick(&None, Some(p), "trace.jsonl")),
        (None, None) => None,
    };

    let init = NetworkState::random(&arch, &mut Prng::new(cfg.seed))?;
    let outcome = train(&init, &samples, &cfg)?;
    let train_accuracy = accuracy(&outcome.net, &samples, cfg.aggregator)?;
    let test_accuracy = match &a.test {
        Some(p) => Some(accuracy(&outcome.net, &load_samples(p)?, cfg.aggregator)?),
        None => None,
    };

    for p in [&model_path, &history_path, &manifest_path].into_iter().chain(trace_path.as_ref()) {
        create_parent(p)?;
    }
    save_model(&outcome.net, &model_path)?;
    write_history(&outcome.history, &history_path)
        .with_context(|| format!("writing {}", history_path.display()))?;
    if let Some(p) = &trace_path {
        let f = fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
        write_trace(BufWriter::new(f), &outcome.trace)?;
    }
    let manifest = RunManifest {
        version: VERSION.into(),
        command: "train".into(),
        config: ConfigRecord::from_config(&cfg),
        init: InitRecord {
            arch,
            scheme: "fan_in_uniform".into(),
            digest: init.digest().to_string(),
            network: None,
        },
        data: Some(DataRecord {
            path: train_path,
            fnv,
            rows: samples.len(),
        }),
        sample: None,
        artifacts: Artifacts {
            model: Some(model_path.clone()),
            history: Some(history_path.clone()),
            trace: trace_path.clone(),
        },
    };
    manifest.save(&manifest_path)?;
    Ok(TrainReport {
        model: model_path,
        history_path,
        manifest: manifest_path,
        trace: trace_path,
        history: outcome.history,
        stopped_early: outcome.stopped_early,
        train_accuracy,
        test_accuracy,
    })
}

fn check_width(net: &NetworkState, width: usize, what: &str) -> Result<()> {
    if net.input_width() != width {
        bail!("model expects {} inputs but {what} has {width}", net.input_width());
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Vec<(&'static str, f64)>> {
    let net = load_model(&a.model)?;
    check_width(&net, 2, "the data")?;
    let mut out = Vec::new();
    for (name, path) in [("train_accuracy", &a.train), ("test_accuracy", &a.test)] {
        if let Some(p) = path {
            out.push((name, accuracy(&net, &load_samples(p)?, a.aggregator)?));
        }
    }
    Ok(out)
}

pub fn cmd_predict(a: &PredictArgs) -> Result<(Vec<UnitValue>, UnitValue)> {
    let net = load_model(&a.model)?;
    check_width(&net, a.input.len(), "--input")?;
    let x: Vec<UnitValue> = a.input.iter().map(|&v| unit(v)).collect();
    let cache = net.forward_with(&x, a.aggregator)?;
    Ok((cache.output().to_vec(), cache.yhat))
}

pub fn cmd_extract(a: &ExtractArgs) -> Result<Vec<Formula>> {
    let net = load_model(&a.model)?;
    let formulas = if a.aggregate {
        vec![extract_aggregate(&net, a.aggregator)?]
    } else if let Some(j) = a.output {
        vec![extract(&net, j)?]
    } else {
        extract_all(&net)?
    };
    Ok(if a.simplify {
        formulas.iter().map(simplify).collect()
    } else {
        formulas
    })
}

fn read_formula(src: &FormulaArgs) -> Result<Formula> {
    let text = match (&src.formula, &src.file) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        (None, None) => return Err(usage("give a formula or --file")),
    };
    Ok(parse(text.trim())?)
}

pub fn cmd_simplify(a: &FormulaArgs) -> Result<Formula> {
    Ok(simplify(&read_formula(a)?))
}

pub fn cmd_eval_formula(a: &EvalFormulaArgs) -> Result<UnitValue> {
    let phi = read_formula(&a.source)?;
    let env: Vec<UnitValue> = a.at.iter().map(|&v| unit(v)).collect();
    Ok(phi.eval(&env)?)
}

const EXAMPLE_INPUT: [f64; 2] = [0.2, 0.3];
const EXAMPLE_TARGET: f64 = 0.8;

#[derive(Debug, Clone)]
pub struct TraceReport {
    pub trace: Vec<TraceStep>,
    pub out: PathBuf,
    pub manifest: PathBuf,
}

pub fn cmd_trace(a: &TraceArgs) -> Result<TraceReport> {
    let net = match &a.model {
        Some(p) => load_model(p)?,
        None => NetworkState::worked_example(),
    };
    let input = if a.input.is_empty() && a.example {
        EXAMPLE_INPUT.to_vec()
    } else {
        a.input.clone()
    };
    let target = a.target.unwrap_or(EXAMPLE_TARGET);
    check_width(&net, input.len(), "--input")?;
    let cfg = TrainConfig {
        eta: unit(a.eta),
        eps: unit(a.eps),
        max_epochs: a.epochs,
        batch_size: 1,
        update_mode: a.mode,
        eta_combine: a.eta_combine,
        norm_eps: a.norm_eps,
        seed: 0,
        aggregator: a.aggregator,
    };
    let x: Vec<UnitValue> = input.iter().map(|&v| unit(v)).collect();
    let init = Configuration::new(net);
    let trace = symbolic_train_loop(&init, &x, unit(target), cfg.eps, cfg.max_epochs, &cfg)?;
    let manifest_path = a.manifest.clone().unwrap_or_else(|| default_manifest_path(&a.out));
    create_parent(&a.out)?;
    create_parent(&manifest_path)?;
    let f = fs::File::create(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    write_trace(BufWriter::new(f), &trace)?;
    let manifest = RunManifest {
        version: VERSION.into(),
        command: "trace".into(),
        config: ConfigRecord::from_config(&cfg),
        init: InitRecord {
            arch: init.net.dims(),
            scheme: "given".into(),
            digest: init.digest().to_string(),
            network: Some(init.net.to_canonical_text()),
        },
        data: None,
        sample: Some(SampleRecord { input, target }),
        artifacts: Artifacts {
            model: a.model.clone(),
            history: None,
            trace: Some(a.out.clone()),
        },
    };
    manifest.save(&manifest_path)?;
    Ok(TraceReport {
        trace,
        out: a.out.clone(),
        manifest: manifest_path,
    })
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub steps: usize,
    pub violations: Vec<Violation>,
}

pub fn cmd_check_trace(a: &CheckTraceArgs) -> Result<CheckReport> {
    let manifest_path = a.manifest.clone().unwrap_or_else(|| default_manifest_path(&a.trace));
    let m = RunManifest::load(&manifest_path)?;
    let f = fs::File::open(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let trace = read_trace(BufReader::new(f)).with_context(|| format!("parsing {}", a.trace.display()))?;
    let cfg = m.config.to_config()?;
    let initial = Digest::from_hex(&m.init.digest).ok_or_else(|| anyhow!("manifest digest is not 16 hex digits"))?;
    let verdict = if m.command == "trace" {
        let text = m.init.network.as_deref().ok_or_else(|| anyhow!("manifest lacks the initial network"))?;
        let net = NetworkState::from_canonical_text(text).context("manifest network")?;
        if net.digest() != initial {
            bail!("manifest network does not match its digest");
        }
        let s = m.sample.as_ref().ok_or_else(|| anyhow!("manifest lacks the sample"))?;
        let sample = Sample {
            input: s.input.iter().map(|&v| UnitValue::new(v)).collect::<Result<_, _>>()?,
            target: UnitValue::new(s.target)?,
        };
        check_trace(&trace, &Configuration::new(net), &sample, &cfg)
    } else {
        check_summary_trace(&trace, initial, &cfg)
    };
    Ok(CheckReport {
        steps: trace.len(),
        violations: verdict.err().unwrap_or_default(),
    })
}

pub fn cmd_selftest(a: &SelftestArgs) -> SuiteReport {
    if a.inject_fault {
        run_suite(&UnclampedOplus, a.samples, a.seed, a.tolerance)
    } else {
        run_suite(&Standard, a.samples, a.seed, a.tolerance)
    }
}

fn axiom_summary(trace: &[TraceStep]) -> String {
    trace.iter().map(|s| s.axiom.name()).collect::<Vec<_>>().join(",")
}

/// Runs one parsed command, printing its report to stdout.
pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenData(a) => {
            let r = cmd_gen_data(&a)?;
            println!("{} {} rows", r.train.display(), r.train_rows);
            println!("{} {} rows", r.test.display(), r.test_rows);
            println!(
                "scaling min {},{} range {},{}",
                r.scaling.min[0], r.scaling.min[1], r.scaling.range[0], r.scaling.range[1]
            );
        }
        Command::Train(a) => {
            let r = cmd_train(&a)?;
            let last = r.history.last().expect("at least one epoch");
            println!("epochs {}{}", r.history.len(), if r.stopped_early { " (stopped early)" } else { "" });
            println!("final_mean_loss {}", last.mean_loss);
            println!("train_accuracy {}", r.train_accuracy);
            if let Some(t) = r.test_accuracy {
                println!("test_accuracy {t}");
            }
            println!("model {}", r.model.display());
            println!("history {}", r.history_path.display());
            if let Some(t) = &r.trace {
                println!("trace {}", t.display());
            }
            println!("manifest {}", r.manifest.display());
        }
        Command::Eval(a) => {
            for (name, acc) in cmd_eval(&a)? {
                println!("{name} {acc}");
            }
        }
        Command::Predict(a) => {
            let (out, yhat) = cmd_predict(&a)?;
            let out: Vec<String> = out.iter().map(|v| v.to_string()).collect();
            println!("outputs {}", out.join(","));
            println!("yhat {yhat}");
            println!("label {}", (yhat.get() >= 0.5) as u8);
        }
        Command::Extract(a) => {
            for phi in cmd_extract(&a)? {
                println!("{}", print(&phi));
            }
        }
        Command::Simplify(a) => println!("{}", print(&cmd_simplify(&a)?)),
        Command::EvalFormula(a) => println!("{}", cmd_eval_formula(&a)?),
        Command::Trace(a) => {
            let r = cmd_trace(&a)?;
            println!("{} steps: {}", r.trace.len(), axiom_summary(&r.trace));
            let last = r.trace.last().expect("nonempty trace");
            if last.axiom == Axiom::N3 {
                println!("stopped by N3 at r = {}", last.r);
            } else {
                println!("epoch limit reached (N0E)");
            }
            println!("trace {}", r.out.display());
            println!("manifest {}", r.manifest.display());
        }
        Command::CheckTrace(a) => {
            let r = cmd_check_trace(&a)?;
            if r.violations.is_empty() {
                println!("accepted ({} steps)", r.steps);
            } else {
                println!("rejected ({} violations)", r.violations.len());
                for v in &r.violations {
                    println!("{v}");
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Selftest(a) => {
            let report = cmd_selftest(&a);
            for r in &report.results {
                let verdict = if r.failures == 0 { "pass" } else { "FAIL" };
                println!(
                    "{:<5} {verdict} {}/{} max_err {:e}",
                    r.name,
                    r.samples - r.failures,
                    r.samples,
                    r.max_error
                );
            }
            println!("passed {}/{}", report.passed(), report.results.len());
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
