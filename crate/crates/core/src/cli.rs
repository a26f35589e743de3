//! Command-line driver: `synth`, `train`, `eval`, `search`, `compare` and
//! `stats`. Settings come from defaults, then an optional JSON config file,
//! then flags.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{McrParams, OptimizerHyper};
use crate::block::{BlockMetaParams, TauMode, TrainOptions, UpdateOrder};
use crate::dataset::{combine, load_csv, save_csv, synthesize_weld, Dataset};
use crate::error::{Error, Result};
use crate::experiment::{compare, fit_method_traced, Method, MethodSettings};
use crate::metrics::{linear_fit, CorrelationRow, MetricsReport};
use crate::model::{load, save, FitConfig};
use crate::search::{grid_search, SearchSpace, DEFAULT_FOLDS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "weldnet", version, about = "Multi-block neural regression for weld geometry")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving every output file.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// JSON experiment config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Feed raw, unstandardized features to the models.
    #[arg(long, global = true)]
    pub no_standardize: bool,
    /// Adjust hidden-layer width during training.
    #[arg(long, global = true)]
    pub dynamic_width: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic weld dataset.
    Synth(SynthArgs),
    /// Train a model and write it with its training traces.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Eval(EvalArgs),
    /// Grid-search block meta-parameters per target.
    Search(SearchArgs),
    /// Train and score several methods over several seeds.
    Compare(CompareArgs),
    /// Correlations and pairwise linear fits between targets.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub rows: Option<usize>,
    /// Standard deviation of the additive target noise.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// One or more CSV files; several are concatenated.
    #[arg(long, value_delimiter = ',')]
    pub data: Vec<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct MetaArgs {
    /// Best-parameters file written by `search`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub neurons: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// `weighted` or `off`.
    #[arg(long)]
    pub tau: Option<String>,
    /// `sequential` or `simultaneous`.
    #[arg(long)]
    pub update_order: Option<String>,
    /// Polynomial degree for `ner` and `mcr`.
    #[arg(long)]
    pub linear_degree: Option<usize>,
    /// Learning rate for one method, as `method=value`; repeatable.
    #[arg(long = "alpha-for", value_parser = parse_alpha_for)]
    pub alpha_for: Vec<(Method, f64)>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub meta: MetaArgs,
    #[arg(long, default_value = "nrn")]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Target name; all targets when omitted.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Evaluate at most this many grid points (seeded subsample).
    #[arg(long)]
    pub max_points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub neurons: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub depth: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub degree: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub iterations: Vec<usize>,
    /// `weighted` or `off`.
    #[arg(long)]
    pub tau: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub meta: MetaArgs,
    /// Comma-separated subset of nrn,ann,adagrad,rmsprop,nesterov,ner,mcr.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

fn parse_alpha_for(s: &str) -> std::result::Result<(Method, f64), String> {
    let (m, v) = s.split_once('=').ok_or("expected method=value")?;
    let method: Method = m.parse().map_err(|e: Error| e.to_string())?;
    let value: f64 = v.parse().map_err(|_| format!("bad learning rate `{v}`"))?;
    Ok((method, value))
}

/// Values a JSON config file may set. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub standardize: Option<bool>,
    pub dynamic_width: Option<bool>,
    pub metas: Option<Vec<BlockMetaParams>>,
    pub options: Option<TrainOptions>,
    pub optimizer: Option<OptimizerHyper>,
    pub linear_degree: Option<usize>,
    pub mcr: Option<McrParams>,
    pub alpha_overrides: BTreeMap<Method, f64>,
    pub space: Option<SearchSpace>,
    pub folds: Option<usize>,
    pub max_points: Option<usize>,
    pub methods: Option<Vec<Method>>,
    pub seeds: Option<Vec<u64>>,
    pub test_fraction: Option<f64>,
    pub rows: Option<usize>,
    pub noise: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))
    }
}

/// Contents of `best_params.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestParams {
    pub targets: Vec<String>,
    pub metas: Vec<BlockMetaParams>,
    pub cv_rmse: Vec<f64>,
}

impl BestParams {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let p: BestParams = serde_json::from_str(&text)
            .map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))?;
        for m in &p.metas {
            m.validate()?;
        }
        Ok(p)
    }
}

/// Resolved global settings.
struct Context {
    seed: u64,
    out_dir: PathBuf,
    standardize: bool,
    dynamic_width: bool,
    config: ExperimentConfig,
}

impl Context {
    fn new(g: &GlobalArgs) -> Result<Self> {
        let config = match &g.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let out_dir = g
            .out_dir
            .clone()
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Context {
            seed: g.seed.or(config.seed).unwrap_or(0),
            standardize: !g.no_standardize && config.standardize.unwrap_or(true),
            dynamic_width: g.dynamic_width || config.dynamic_width.unwrap_or(false),
            out_dir,
            config,
        })
    }

    fn out(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))?;
        Ok(self.out_dir.join(name))
    }

    fn data(&self, args: &DataArgs) -> Result<Dataset> {
        let paths = if args.data.is_empty() {
            &self.config.data
        } else {
            &args.data
        };
        if paths.is_empty() {
            return Err(Error::ConfigError("no --data given".into()));
        }
        let sets = paths.iter().map(load_csv).collect::<Result<Vec<_>>>()?;
        if sets.len() == 1 {
            Ok(sets.into_iter().next().unwrap())
        } else {
            combine(&sets)
        }
    }

    fn settings(&self, meta: &MetaArgs) -> Result<MethodSettings> {
        let c = &self.config;
        let mut metas = match &meta.params {
            Some(p) => BestParams::load(p)?.metas,
            None => c.metas.clone().unwrap_or_else(|| vec![BlockMetaParams::default()]),
        };
        for m in &mut metas {
            if let Some(v) = meta.neurons {
                m.neurons = v;
            }
            if let Some(v) = meta.depth {
                m.depth = v;
            }
            if let Some(v) = meta.degree {
                m.degree = v;
            }
            if let Some(v) = meta.alpha {
                m.alpha = v;
            }
            if let Some(v) = meta.gamma {
                m.gamma = v;
            }
            if let Some(v) = meta.lambda {
                m.lambda = v;
            }
            if let Some(v) = meta.iterations {
                m.iterations = v;
            }
            m.validate()?;
        }
        let mut options = c.options.unwrap_or_default();
        if let Some(t) = &meta.tau {
            options.tau = parse_tau(t)?;
        }
        if let Some(o) = &meta.update_order {
            options.order = match o.as_str() {
                "sequential" => UpdateOrder::Sequential,
                "simultaneous" => UpdateOrder::Simultaneous,
                other => return Err(Error::ConfigError(format!("unknown update order `{other}`"))),
            };
        }
        let mut alpha_overrides = c.alpha_overrides.clone();
        alpha_overrides.extend(meta.alpha_for.iter().copied());
        Ok(MethodSettings {
            metas,
            options,
            standardize: self.standardize,
            dynamic_width: self.dynamic_width,
            optimizer: c.optimizer.unwrap_or_default(),
            linear_degree: meta.linear_degree.or(c.linear_degree).unwrap_or(1),
            mcr: c.mcr.unwrap_or_default(),
            alpha_overrides,
        })
    }
}

fn parse_tau(s: &str) -> Result<TauMode> {
    match s {
        "weighted" => Ok(TauMode::Weighted),
        "off" => Ok(TauMode::Off),
        other => Err(Error::ConfigError(format!("unknown tau mode `{other}`"))),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// File-name-safe version of a column name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn cmd_synth(ctx: &Context, a: &SynthArgs) -> Result<String> {
    let rows = a.rows.or(ctx.config.rows).unwrap_or(200);
    let noise = a.noise.or(ctx.config.noise).unwrap_or(0.02);
    let data = synthesize_weld(rows, noise, ctx.seed)?;
    save_csv(&data, &a.out)?;
    Ok(format!("wrote {} rows to {}\n", rows, a.out.display()))
}

fn cmd_train(ctx: &Context, a: &TrainArgs) -> Result<String> {
    let data = ctx.data(&a.data)?;
    let settings = ctx.settings(&a.meta)?;
    let (model, traces) = fit_method_traced(a.method, &settings, &data, ctx.seed)?;
    let model_path = ctx.out("model.json")?;
    save(&model, &model_path)?;
    let mut msg = format!("wrote {}\n", model_path.display());
    for (name, trace) in data.target_names.iter().zip(&traces) {
        let p = ctx.out(&format!("trace_{}.csv", file_stem(name)))?;
        trace.write_csv(&p)?;
        let _ = writeln!(
            msg,
            "{name}: {} iterations, final cost {:.6e}",
            trace.len(),
            trace.last_cost().unwrap_or(f64::NAN)
        );
    }
    Ok(msg)
}

fn cmd_eval(ctx: &Context, a: &EvalArgs) -> Result<String> {
    let model = load(&a.model)?;
    let data = ctx.data(&a.data)?;
    if model.target_names() != data.target_names.as_slice() {
        return Err(Error::SchemaMismatch);
    }
    let pred = model.predict(&data.features)?;
    let report = MetricsReport::from_predictions(&data.target_names, &data.targets, &pred)?;
    let text = report.to_text();
    write(&ctx.out("report.txt")?, &text)?;
    write(&ctx.out("report.csv")?, &report.to_csv())?;
    Ok(text)
}

fn cmd_search(ctx: &Context, a: &SearchArgs) -> Result<String> {
    let data = ctx.data(&a.data)?;
    let mut space = ctx.config.space.clone().unwrap_or_default();
    macro_rules! take {
        ($f:ident) => {
            if !a.$f.is_empty() {
                space.$f = a.$f.clone();
            }
        };
    }
    take!(neurons);
    take!(depth);
    take!(degree);
    take!(alpha);
    take!(gamma);
    take!(lambda);
    take!(iterations);
    space.validate()?;
    let mut options = ctx.config.options.unwrap_or_default();
    if let Some(t) = &a.tau {
        options.tau = parse_tau(t)?;
    }
    let cfg = FitConfig {
        trainer: crate::model::BlockTrainer::Reinforced(options),
        standardize: ctx.standardize,
        dynamic_width: ctx.dynamic_width,
    };
    let folds = a.folds.or(ctx.config.folds).unwrap_or(DEFAULT_FOLDS);
    let max_points = a.max_points.or(ctx.config.max_points);
    let targets: Vec<usize> = match &a.target {
        Some(t) => vec![data
            .target_names
            .iter()
            .position(|n| n == t)
            .ok_or_else(|| Error::ConfigError(format!("unknown target `{t}`")))?],
        None => (0..data.n_targets()).collect(),
    };
    let mut best = BestParams {
        targets: Vec::new(),
        metas: Vec::new(),
        cv_rmse: Vec::new(),
    };
    let mut msg = String::new();
    for k in targets {
        let name = &data.target_names[k];
        let (meta, board) = grid_search(&space, &data, k, folds, ctx.seed, &cfg, max_points)?;
        board.write_csv(ctx.out(&format!("leaderboard_{}.csv", file_stem(name)))?)?;
        let score = board.best().map_or(f64::INFINITY, |r| r.mean_cv_rmse);
        let _ = writeln!(
            msg,
            "{name}: {} points, best cv rmse {score:.6} with neurons={} depth={} degree={} alpha={} gamma={} lambda={} iterations={}",
            board.rows.len(),
            meta.neurons,
            meta.depth,
            meta.degree,
            meta.alpha,
            meta.gamma,
            meta.lambda,
            meta.iterations
        );
        best.targets.push(name.clone());
        best.metas.push(meta);
        best.cv_rmse.push(score);
    }
    let mut json = serde_json::to_string_pretty(&best)?;
    json.push('\n');
    write(&ctx.out("best_params.json")?, &json)?;
    Ok(msg)
}

fn cmd_compare(ctx: &Context, a: &CompareArgs) -> Result<String> {
    let data = ctx.data(&a.data)?;
    let settings = ctx.settings(&a.meta)?;
    let methods = match &a.methods {
        Some(s) => Method::parse_list(s)?,
        None => ctx
            .config
            .methods
            .clone()
            .unwrap_or_else(|| vec![Method::Nrn, Method::Ann, Method::Ner, Method::Mcr]),
    };
    let seeds = if a.seeds.is_empty() {
        ctx.config
            .seeds
            .clone()
            .unwrap_or_else(|| (ctx.seed..ctx.seed + 5).collect())
    } else {
        a.seeds.clone()
    };
    let frac = a.test_fraction.or(ctx.config.test_fraction).unwrap_or(0.2);
    let cmp = compare(&methods, &settings, &data, frac, &seeds)?;
    let text = cmp.to_text();
    write(&ctx.out("comparison.txt")?, &text)?;
    write(&ctx.out("comparison.csv")?, &cmp.to_csv())?;
    Ok(text)
}

fn cmd_stats(ctx: &Context, a: &StatsArgs) -> Result<String> {
    let data = ctx.data(&a.data)?;
    let names = &data.target_names;
    if names.len() < 2 {
        return Err(Error::ConfigError("stats needs at least two target columns".into()));
    }
    let mut report = MetricsReport::default();
    let mut fits = String::from("a,b,slope,intercept\n");
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let x = data.targets.column(i).to_vec();
            let y = data.targets.column(j).to_vec();
            report.correlations.push(CorrelationRow::compute(&names[i], &names[j], &x, &y)?);
            let (slope, intercept) = linear_fit(&x, &y)?;
            let _ = writeln!(fits, "{},{},{slope},{intercept}", names[i], names[j]);
            let mut points = format!("{},{},fitted\n", names[i], names[j]);
            for (xv, yv) in x.iter().zip(&y) {
                let _ = writeln!(points, "{xv},{yv},{}", slope * xv + intercept);
            }
            let file = format!("fit_{}_{}.csv", file_stem(&names[i]), file_stem(&names[j]));
            write(&ctx.out(&file)?, &points)?;
        }
    }
    let mut text = report.to_text();
    text.push('\n');
    text.push_str(&fits.replace(',', "  "));
    write(&ctx.out("stats.txt")?, &text)?;
    write(&ctx.out("stats.csv")?, &report.to_csv())?;
    write(&ctx.out("fits.csv")?, &fits)?;
    Ok(text)
}

/// Runs a parsed command, returning what should be printed on success.
pub fn execute(cli: &Cli) -> Result<String> {
    let ctx = Context::new(&cli.global)?;
    match &cli.command {
        Command::Synth(a) => cmd_synth(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Search(a) => cmd_search(&ctx, a),
        Command::Compare(a) => cmd_compare(&ctx, a),
        Command::Stats(a) => cmd_stats(&ctx, a),
    }
}

/// Exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigError(_) | Error::InvalidMeta(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args`, runs the command and reports to stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(msg) => {
            print!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
