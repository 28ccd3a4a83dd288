use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contextst::config::RunConfig;
use contextst::{app, Result};

#[derive(Parser)]
#[command(name = "contextst", version, about = "Context-anchored cross-domain forecasting")]
struct Cli {
    /// Flat `section.key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed (train.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 also makes history logs reproducible bytewise.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV (or `synthetic:a` / `synthetic:b`).
    #[arg(long)]
    data: Option<String>,
    /// Anchor JSON for the dataset.
    #[arg(long)]
    anchors: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Detrend and split lookback windows into frequency bands.
    Decompose {
        #[command(flatten)]
        data: DataArgs,
        /// Also write one CSV per window.
        #[arg(long)]
        csv: bool,
    },
    /// Train a model and keep the best-validation checkpoint.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// Zero the context anchors.
        #[arg(long)]
        no_context: bool,
        /// Keep only the raw window (no frequency bands).
        #[arg(long)]
        no_coordinator: bool,
        /// Replace the routed experts by one dense feed-forward network.
        #[arg(long)]
        dense: bool,
    },
    /// Score a checkpoint on the dataset's test split.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        checkpoint: Option<String>,
        /// Comma-separated horizons, e.g. 96,192.
        #[arg(long)]
        horizons: Option<String>,
    },
    /// Score a checkpoint on another dataset without any training.
    Zeroshot {
        #[arg(long)]
        checkpoint: Option<String>,
        /// Target dataset.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        target_anchors: Option<String>,
        #[arg(long)]
        horizons: Option<String>,
    },
    /// Gramian angular field and forecastability of a window.
    Analyze {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Write an anchor file for a dataset.
    MakeAnchors {
        #[arg(long)]
        data: Option<String>,
        /// Validate and normalize an existing anchor file instead of generating one.
        #[arg(long)]
        from: Option<PathBuf>,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let mut kv: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.push((k.to_string(), v));
        }
    };
    put("train.seed", cli.seed.map(|s| s.to_string()));
    put("run.threads", cli.threads.map(|t| t.to_string()));
    put("run.out", cli.out.clone());
    let data = |put: &mut dyn FnMut(&str, Option<String>), d: &DataArgs| {
        put("data.path", d.data.clone());
        put("data.anchors", d.anchors.clone());
    };
    match &cli.command {
        Command::Decompose { data: d, csv } => {
            data(&mut put, d);
            put("decompose.csv", csv.then(|| "true".into()));
        }
        Command::Train {
            data: d,
            no_context,
            no_coordinator,
            dense,
        } => {
            data(&mut put, d);
            put("model.context", no_context.then(|| "false".into()));
            put("model.coordinator", no_coordinator.then(|| "false".into()));
            put("model.moe", dense.then(|| "false".into()));
        }
        Command::Eval {
            data: d,
            checkpoint,
            horizons,
        } => {
            data(&mut put, d);
            put("eval.checkpoint", checkpoint.clone());
            put("eval.horizons", horizons.clone());
        }
        Command::Zeroshot {
            checkpoint,
            target,
            target_anchors,
            horizons,
        } => {
            put("eval.checkpoint", checkpoint.clone());
            put("data.target", target.clone());
            put("data.target_anchors", target_anchors.clone());
            put("eval.horizons", horizons.clone());
        }
        Command::Analyze { data: d } => data(&mut put, d),
        Command::MakeAnchors { data: d, .. } => put("data.path", d.clone()),
    }
    for s in &cli.set {
        kv.push(RunConfig::parse_override(s)?);
    }
    cfg.apply_all(&kv)?;
    if cfg.threads == 1 {
        cfg.train.deterministic = true;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    let cfg = resolve(cli)?;
    if cfg.threads > 0 {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match &cli.command {
        Command::Decompose { .. } => app::run_decompose(&cfg),
        Command::Train { .. } => app::run_train(&cfg),
        Command::Eval { .. } => app::run_eval(&cfg),
        Command::Zeroshot { .. } => app::run_zeroshot(&cfg),
        Command::Analyze { .. } => app::run_analyze(&cfg),
        Command::MakeAnchors { from, .. } => app::run_make_anchors(&cfg, from.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("{}: {line}", e.kind());
            ExitCode::FAILURE
        }
    }
}
