use std::collections::BTreeMap;
use std::error::Error;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tartarus_bench::budget::CountMode;
use tartarus_bench::dataset::{load_dataset, Dataset};
use tartarus_bench::evaluator::Evaluator;
use tartarus_bench::oracle::TaskScorer;
use tartarus_bench::params::Params;
use tartarus_bench::provider::{NullProvider, Provider};
use tartarus_bench::run::{format_table, proposal_diversity, run_benchmark, to_csv_row, BenchmarkConfig, OptimizerKind, CSV_HEADER};
use tartarus_bench::spectrum::{am15g, load_spectrum};
use tartarus_bench::store::{CACHE_DIR_ENV, STORE_FILE_NAME};
use tartarus_bench::subprocess::{SubprocessConfig, SubprocessProvider, PROVIDER_CMD_ENV};
use tartarus_bench::timing::{format_timing, run_timing, TimingConfig};
use tartarus_core::mol::{parse_smiles, write_smiles};
use tartarus_core::objectives::{
    fit_outlier_envelope, property_unit, task_by_name, OutlierEnvelope, Quantity, TaskContext,
    TaskDefinition, PAPER_CONTAMINATION,
};
use tartarus_core::pattern::{apply_filter_bank, docking_bank, emitter_bank, reactivity_bank, FilterBank, TpsaMode};
use tartarus_core::selfies::{expand_dataset, ExpandConfig};

type AnyResult<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "bench", version, about = "Inverse molecular design benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run optimizers on a task and report best fitness, success rate and diversity.
    Run(Box<RunArgs>),
    /// Time preconditioning and unique-sample generation of the generators.
    Timing(TimingArgs),
    /// Mean pairwise Tanimoto distance of a SMILES file.
    Diversity {
        #[arg(long = "in", alias = "input")]
        input: PathBuf,
    },
    /// Dataset utilities.
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
    /// Filter bank utilities.
    Filters {
        #[command(subcommand)]
        command: FiltersCommand,
    },
    /// Fit and freeze objective parameters.
    Params {
        #[command(subcommand)]
        command: ParamsCommand,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Grow a dataset around one seed molecule by SELFIES mutation.
    Expand {
        #[arg(long)]
        seed_smiles: String,
        /// Built-in bank name (docking, emitter, reactivity) or bank file.
        #[arg(long, default_value = "reactivity")]
        bank: String,
        #[arg(long, default_value_t = 1000)]
        target: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FiltersCommand {
    /// Report pass/fail and violations for every molecule of a file.
    Check {
        #[arg(long)]
        bank: String,
        /// SMILES file; tab-separated columns under a header supply
        /// descriptors the bank cannot compute itself.
        #[arg(long = "in", alias = "input")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TpsaArg::AsWritten)]
        tpsa_mode: TpsaArg,
    },
}

#[derive(Subcommand)]
enum ParamsCommand {
    /// Fit the short-circuit current surrogate (and optionally the
    /// reaction-energy envelope) and write a parameter file.
    Fit {
        #[arg(long)]
        spectrum: Option<PathBuf>,
        /// Dataset with dE_rxn_kcal and dE_act_kcal columns.
        #[arg(long)]
        envelope_from: Option<PathBuf>,
        #[arg(long, default_value_t = PAPER_CONTAMINATION)]
        contamination: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TpsaArg {
    AsWritten,
    Inverted,
}

impl From<TpsaArg> for TpsaMode {
    fn from(t: TpsaArg) -> TpsaMode {
        match t {
            TpsaArg::AsWritten => TpsaMode::AsWritten,
            TpsaArg::Inverted => TpsaMode::Inverted,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    task: String,
    #[arg(long)]
    dataset: PathBuf,
    /// ga or markov-hc; repeat for several report rows.
    #[arg(long = "optimizer", default_values_t = vec![OptimizerKind::Ga])]
    optimizers: Vec<OptimizerKind>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    budget: u64,
    /// Charge only the first proposal of each molecule.
    #[arg(long)]
    unique_budget: bool,
    /// Wall-clock limit per repetition, in seconds.
    #[arg(long)]
    wall_limit: Option<f64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Provider command speaking the JSON-lines protocol.
    #[arg(long, env = PROVIDER_CMD_ENV)]
    provider_cmd: Option<String>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Per-request provider timeout, in seconds.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
    /// Without a provider command, values come from this file (dataset
    /// format), the dataset's own columns, and --default.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Fallback property value, NAME=VALUE.
    #[arg(long = "default")]
    defaults: Vec<String>,
    /// Directory of the persistent evaluation store.
    #[arg(long, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TpsaArg::AsWritten)]
    tpsa_mode: TpsaArg,
    /// Directory for report.jsonl, report.csv and wall_times.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print CSV instead of the table.
    #[arg(long)]
    csv: bool,
    /// Run repetitions concurrently, each with its own in-memory cache.
    #[arg(long)]
    parallel_reps: bool,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long = "optimizer", default_values_t = OptimizerKind::ALL.to_vec())]
    optimizers: Vec<OptimizerKind>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    precondition_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print JSON lines instead of the table.
    #[arg(long)]
    json: bool,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(*args),
        Command::Timing(args) => cmd_timing(args),
        Command::Diversity { input } => cmd_diversity(&input),
        Command::Dataset {
            command: DatasetCommand::Expand {
                seed_smiles,
                bank,
                target,
                seed,
                out,
            },
        } => cmd_expand(&seed_smiles, &bank, target, seed, out.as_deref()),
        Command::Filters {
            command: FiltersCommand::Check { bank, input, tpsa_mode },
        } => cmd_filters_check(&bank, &input, tpsa_mode.into()),
        Command::Params {
            command: ParamsCommand::Fit {
                spectrum,
                envelope_from,
                contamination,
                out,
            },
        } => cmd_params_fit(spectrum.as_deref(), envelope_from.as_deref(), contamination, &out),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn resolve_bank(name: &str, tpsa: TpsaMode) -> AnyResult<FilterBank> {
    Ok(match name {
        "docking" => docking_bank(tpsa),
        "emitter" => emitter_bank(),
        "reactivity" => reactivity_bank(),
        path => FilterBank::parse(&std::fs::read_to_string(path)?)?,
    })
}

fn envelope_points(d: &Dataset) -> Option<Vec<[f64; 2]>> {
    let rxn = d.column_index("dE_rxn_kcal")?;
    let act = d.column_index("dE_act_kcal")?;
    Some(d.entries.iter().map(|e| [e.values[rxn], e.values[act]]).collect())
}

fn build_context(args: &RunArgs, task: &TaskDefinition, dataset: &Dataset) -> AnyResult<TaskContext> {
    let params = match &args.params {
        Some(p) => Params::load(p)?,
        None => Params::from_spectrum(&am15g())?,
    };
    let mut envelope: Option<OutlierEnvelope> = params.outlier_envelope();
    if task.uses_envelope && envelope.is_none() {
        match envelope_points(dataset).map(|p| fit_outlier_envelope(&p, PAPER_CONTAMINATION)) {
            Some(Ok(e)) => envelope = Some(e),
            Some(Err(e)) => log::warn!("no outlier envelope: {e}"),
            None => log::warn!("no outlier envelope: dataset lacks dE_rxn_kcal/dE_act_kcal"),
        }
    }
    Ok(TaskContext::new(params.scharber_config(), envelope, args.tpsa_mode.into()))
}

fn null_provider(args: &RunArgs, dataset: &Dataset) -> AnyResult<NullProvider> {
    fn add(mut p: NullProvider, d: &Dataset) -> AnyResult<NullProvider> {
        for i in 0..d.len() {
            let values = d.property_map(i);
            if !values.is_empty() {
                p = p.with_fixture(&d.entries[i].canonical_key, values)?;
            }
        }
        Ok(p)
    }
    let mut p = add(NullProvider::new(), dataset)?;
    if let Some(f) = &args.fixtures {
        p = add(p, &load_dataset(f)?)?;
    }
    for d in &args.defaults {
        let (name, value) = d
            .split_once('=')
            .ok_or_else(|| format!("--default expects NAME=VALUE, got '{d}'"))?;
        let unit = property_unit(name).ok_or_else(|| format!("unknown property '{name}'"))?;
        p = p.with_default(name, Quantity::new(value.parse()?, unit));
    }
    Ok(p)
}

fn cmd_run(args: RunArgs) -> AnyResult<()> {
    let task = task_by_name(&args.task).ok_or_else(|| format!("unknown task '{}'", args.task))?;
    let dataset = load_dataset(&args.dataset)?;
    let ctx = build_context(&args, &task, &dataset)?;
    let provider: Arc<dyn Provider> = match &args.provider_cmd {
        Some(cmd) => {
            let mut cfg = SubprocessConfig::new(cmd.clone());
            cfg.instances = args.workers.max(1);
            cfg.request_timeout = Duration::from_secs_f64(args.timeout);
            Arc::new(SubprocessProvider::spawn(cfg)?)
        }
        None => Arc::new(null_provider(&args, &dataset)?),
    };
    let mut evaluator = Evaluator::new(provider, args.workers);
    if let Some(dir) = &args.cache_dir {
        let (e, old) = evaluator.with_store(dir.join(STORE_FILE_NAME))?;
        log::info!("loaded {} stored evaluations", old.len());
        evaluator = e;
    }
    let scorer = TaskScorer::new(task, ctx);
    let mut reports = Vec::new();
    let mut walls = BTreeMap::new();
    for &opt in &args.optimizers {
        let mut cfg = BenchmarkConfig::new(opt);
        cfg.repetitions = args.reps;
        cfg.base_seed = args.seed;
        cfg.max_proposals = args.budget;
        cfg.max_wall = args.wall_limit.map(Duration::from_secs_f64);
        cfg.count_mode = if args.unique_budget {
            CountMode::UniqueOnly
        } else {
            CountMode::AllProposals
        };
        cfg.population = args.population;
        cfg.iterations = args.iterations;
        cfg.parallel_reps = args.parallel_reps;
        let outcome = run_benchmark(&scorer, &dataset, &evaluator, &cfg)?;
        walls.insert(opt.as_str(), outcome.wall_seconds);
        reports.push(outcome.report);
    }
    if args.csv {
        println!("{CSV_HEADER}");
        for r in &reports {
            println!("{}", to_csv_row(r));
        }
    } else {
        print!("{}", format_table(&reports));
    }
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        let jsonl: String = reports.iter().map(|r| r.to_json_line() + "\n").collect();
        std::fs::write(out.join("report.jsonl"), jsonl)?;
        let csv: String = std::iter::once(CSV_HEADER.to_string())
            .chain(reports.iter().map(to_csv_row))
            .map(|l| l + "\n")
            .collect();
        std::fs::write(out.join("report.csv"), csv)?;
        std::fs::write(out.join("wall_times.json"), serde_json::to_string_pretty(&walls)? + "\n")?;
    }
    Ok(())
}

fn cmd_timing(args: TimingArgs) -> AnyResult<()> {
    let dataset = load_dataset(&args.dataset)?;
    let cfg = TimingConfig {
        repetitions: args.reps,
        precondition_size: args.precondition_size,
        samples: args.samples,
        base_seed: args.seed,
        ..TimingConfig::default()
    };
    let rows: Vec<_> = args.optimizers.iter().map(|&o| run_timing(&dataset, o, &cfg)).collect();
    if args.json {
        for r in &rows {
            println!("{}", serde_json::to_string(r)?);
        }
    } else {
        print!("{}", format_timing(&rows));
    }
    Ok(())
}

fn cmd_diversity(input: &Path) -> AnyResult<()> {
    let d = load_dataset(input)?;
    let keys: Vec<&str> = d.entries.iter().map(|e| e.canonical_key.as_str()).collect();
    if keys.len() < 2 {
        return Err("diversity needs at least two distinct molecules".into());
    }
    println!("{:.6}", proposal_diversity(keys.into_iter()));
    Ok(())
}

fn cmd_expand(seed_smiles: &str, bank: &str, target: usize, seed: u64, out: Option<&Path>) -> AnyResult<()> {
    let bank = resolve_bank(bank, TpsaMode::AsWritten)?;
    if !bank.external_descriptors().is_empty() {
        return Err(format!(
            "bank '{}' needs provider descriptors ({}); expansion only supports structural banks",
            bank.name,
            bank.external_descriptors().join(", ")
        )
        .into());
    }
    let parent = parse_smiles(seed_smiles)?;
    let cfg = ExpandConfig {
        target_size: target,
        ..ExpandConfig::default()
    };
    let empty = BTreeMap::new();
    let keep = |m: &_| apply_filter_bank(m, &bank, &empty).map(|v| v.pass).unwrap_or(false);
    let mols = expand_dataset(&parent, keep, &cfg, seed)?;
    let text: String = mols.iter().map(|m| write_smiles(m) + "\n").collect();
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    eprintln!("{} molecules", mols.len());
    Ok(())
}

fn cmd_filters_check(bank: &str, input: &Path, tpsa: TpsaMode) -> AnyResult<()> {
    let bank = resolve_bank(bank, tpsa)?;
    let d = load_dataset(input)?;
    let mut passed = 0usize;
    for (i, e) in d.entries.iter().enumerate() {
        let values: BTreeMap<String, f64> = d
            .columns
            .iter()
            .cloned()
            .zip(d.entries[i].values.iter().copied())
            .collect();
        match apply_filter_bank(&e.molecule, &bank, &values) {
            Ok(v) => {
                passed += v.pass as usize;
                println!(
                    "{}\t{}\t{}",
                    e.canonical_key,
                    if v.pass { "pass" } else { "fail" },
                    v.violations.join("; ")
                );
            }
            Err(err) => println!("{}\terror\t{err}", e.canonical_key),
        }
    }
    eprintln!("{passed}/{} pass {}", d.len(), bank.name);
    Ok(())
}

fn cmd_params_fit(spectrum: Option<&Path>, envelope_from: Option<&Path>, contamination: f64, out: &Path) -> AnyResult<()> {
    let s = match spectrum {
        Some(p) => load_spectrum(p)?,
        None => am15g(),
    };
    let mut params = Params::from_spectrum(&s)?;
    eprintln!(
        "J_SC fit: A = {:.4}, B = {:.4}, max relative error {:.1} %",
        params.scharber.a,
        params.scharber.b,
        100.0 * params.scharber.max_rel_error
    );
    if let Some(path) = envelope_from {
        let d = load_dataset(path)?;
        let pts = envelope_points(&d).ok_or("dataset lacks dE_rxn_kcal/dE_act_kcal columns")?;
        params.set_envelope(&fit_outlier_envelope(&pts, contamination)?);
    }
    params.save(out)?;
    Ok(())
}
