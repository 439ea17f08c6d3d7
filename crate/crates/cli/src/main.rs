use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use opinion_attack::harness::{
    benchmark, generate, rows_to_csv, rows_to_json, run_ablation, run_comparison, LeaderSpec, ResultRow,
    RowStatus, Scenario, Strategy, Topology,
};
use opinion_attack::io::{
    load_network, load_params, params_to_json, round_sig, AttackConfigFile, PlanReport, TrajectoryFile,
};
use opinion_attack::recovery::{recover, recovery_robustness, RecoveryProblem};
use opinion_attack::{
    adversarial_outcome, closed_form_outcome, count_configurations, follower_subproblem_bound, simulate,
    simulate_adversarial, solve_attack_with, Error, FjParameters, FollowerMode, LeaderSizes, SolveOptions,
    DEFAULT_P,
};
use serde_json::json;

/// Exit status for runs where exact-mode work was skipped.
const SKIPPED: u8 = 3;

#[derive(Parser)]
#[command(name = "opinion-attack", version, about = "Opinion dynamics attack planning and parameter recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write result files here instead of printing to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Output format. With --out-dir and no format, both are written.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a network with sampled parameters.
    GenNetwork(ScenarioArgs),
    /// Run the dynamics, optionally under an attack.
    Simulate(SimulateArgs),
    /// Plan the strongest attack on one instance.
    AttackPlan(PlanArgs),
    /// Recover stubbornness and weights from trajectories.
    Recover(RecoverArgs),
    /// Score every strategy on the scenario's instances.
    Compare(CompareArgs),
    /// Score the planner with parts of the attack model removed.
    Ablate(ScenarioArgs),
    /// Time the approximate planner.
    Benchmark(BenchArgs),
    /// Size of the naive configuration space.
    Count(CountArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyKind {
    Complete,
    Ring,
    Star,
    ErdosRenyi,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "scenario")]
    topology: Option<TopologyKind>,
    /// Number of agents.
    #[arg(long, conflicts_with = "scenario")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
    /// Hub of a star topology.
    #[arg(long, default_value_t = 0)]
    center: usize,
    #[arg(long)]
    instances: Option<usize>,
    /// Influence increment per adversarial edge.
    #[arg(long)]
    p: Option<f64>,
    /// Number of adversaries, or `budget`.
    #[arg(long)]
    leader_size: Option<LeaderSpec>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    /// Attack configuration JSON; adversaries are pinned at 1.
    #[arg(long)]
    attack: Option<PathBuf>,
    /// Accept attack configurations that exceed the budgets.
    #[arg(long)]
    no_budget: bool,
    /// Initial opinions, comma separated; defaults to the intrinsic opinions.
    #[arg(long, value_delimiter = ',')]
    z0: Option<Vec<f64>>,
}

#[derive(Args)]
struct PlanArgs {
    /// Parameter file; alternatively describe a scenario.
    #[arg(long, conflicts_with_all = ["scenario", "topology"])]
    params: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value = "approx")]
    mode: Mode,
    /// Search every adversary count up to the leader size.
    #[arg(long)]
    all_leader_sizes: bool,
    /// Omit wall time so reports compare byte for byte.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Approx,
    Exact,
}

#[derive(Args)]
struct RecoverArgs {
    /// Network JSON (a parameter file also works).
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    trajectories: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Ground-truth parameters; enables the noise robustness table.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.05")]
    noise_levels: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    noise_seeds: u64,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma separated; defaults to the scenario's list, or all strategies.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, conflicts_with_all = ["scenario", "topology"])]
    params: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
}

/// Bad command-line input that clap cannot catch on its own.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.downcast_ref::<Usage>().is_some()
                || e.downcast_ref::<Error>().is_some_and(Error::is_validation)
                || e.downcast_ref::<serde_json::Error>().is_some();
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::GenNetwork(args) => gen_network(cli, args),
        Command::Simulate(args) => simulate_cmd(cli, args),
        Command::AttackPlan(args) => attack_plan(cli, args),
        Command::Recover(args) => recover_cmd(cli, args),
        Command::Compare(args) => compare(cli, args),
        Command::Ablate(args) => {
            let rows = run_ablation(&args.resolve(cli.seed)?)?;
            emit_rows(cli, "ablate", &rows)
        }
        Command::Benchmark(args) => bench(cli, args),
        Command::Count(args) => count(cli, args),
    }
}

impl ScenarioArgs {
    fn resolve(&self, seed: Option<u64>) -> Result<Scenario> {
        let mut sc = match (&self.scenario, self.topology, self.n) {
            (Some(path), _, _) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<Scenario>(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(kind), Some(n)) => {
                let topology = match kind {
                    TopologyKind::Complete => Topology::Complete,
                    TopologyKind::Ring => Topology::Ring,
                    TopologyKind::Star => Topology::Star { center: self.center },
                    TopologyKind::ErdosRenyi => Topology::ErdosRenyi { edge_prob: self.edge_prob },
                };
                Scenario::new("cli", topology, n, 0)
            }
            _ => return Err(usage("give either --scenario or both --topology and --n")),
        };
        if let Some(s) = seed {
            sc.seed = s;
        }
        if let Some(k) = self.instances {
            sc.instances = k;
        }
        if let Some(p) = self.p {
            sc.p = p;
        }
        if let Some(l) = self.leader_size {
            sc.leader_size = l;
        }
        sc.validate()?;
        Ok(sc)
    }
}

/// Prints or writes one document in the requested formats.
fn emit(cli: &Cli, stem: &str, json: &str, csv: Option<&str>) -> Result<()> {
    let formats: Vec<Format> = match (cli.format, &cli.out_dir) {
        (Some(f), _) => vec![f],
        (None, Some(_)) => vec![Format::Csv, Format::Json],
        (None, None) => vec![Format::Json],
    };
    for format in formats {
        let (ext, text) = match format {
            Format::Json => ("json", json),
            Format::Csv => match csv {
                Some(text) => ("csv", text),
                None if cli.format == Some(Format::Csv) => {
                    return Err(usage(format!("{stem} has no CSV form")));
                }
                None => continue,
            },
        };
        match &cli.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join(format!("{stem}.{ext}"));
                write(&path, text)?;
                eprintln!("wrote {}", path.display());
            }
            None => print!("{}", with_newline(text)),
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, with_newline(text)).with_context(|| format!("writing {}", path.display()))
}

fn with_newline(text: &str) -> String {
    if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    }
}

fn emit_rows(cli: &Cli, stem: &str, rows: &[ResultRow]) -> Result<u8> {
    emit(cli, stem, &rows_to_json(rows), Some(&rows_to_csv(rows)?))?;
    let skipped = rows.iter().filter(|r| r.status == RowStatus::Skipped).count();
    if skipped > 0 {
        eprintln!("{skipped} exact-mode rows skipped: configuration space above the cap");
        return Ok(SKIPPED);
    }
    Ok(0)
}

fn gen_network(cli: &Cli, args: &ScenarioArgs) -> Result<u8> {
    let sc = args.resolve(cli.seed)?;
    let instances = sc.instance_list();
    match &cli.out_dir {
        None if instances.len() > 1 => Err(usage("several instances need --out-dir")),
        None => {
            print!("{}", with_newline(&params_to_json(&generate(&instances[0])?.1)));
            Ok(0)
        }
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for inst in instances {
                let path = dir.join(format!("{}.json", inst.id));
                write(&path, &params_to_json(&generate(&inst)?.1))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn load(path: &Path) -> Result<FjParameters> {
    load_params(path).with_context(|| format!("loading {}", path.display()))
}

fn simulate_cmd(cli: &Cli, args: &SimulateArgs) -> Result<u8> {
    let params = load(&args.params)?;
    let z0 = args.z0.clone().unwrap_or_else(|| params.intrinsic().to_vec());
    let (traj, g_closed) = match &args.attack {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: AttackConfigFile = serde_json::from_str(&text)?;
            let cfg = if args.no_budget {
                file.into_unbudgeted_config(params.network())?
            } else {
                file.into_config(params.network())?
            };
            let g = adversarial_outcome(&params, &cfg)?.g;
            (simulate_adversarial(&params, &cfg, &z0, args.rounds)?, g)
        }
        None => {
            let g = closed_form_outcome(&params)?.g;
            (simulate(&params, &z0, args.rounds, &Default::default(), 1.0)?, g)
        }
    };
    let g_final: f64 = traj.last().iter().sum();
    let mut doc = serde_json::to_value(TrajectoryFile::from_trajectories(std::slice::from_ref(&traj)))?;
    doc["g_final"] = json!(round_sig(g_final, 12));
    doc["g_equilibrium"] = json!(round_sig(g_closed, 12));
    let n = traj.agent_count();
    let mut csv = String::from("round");
    for i in 0..n {
        csv.push_str(&format!(",z{i}"));
    }
    csv.push('\n');
    for (t, row) in traj.rows().iter().enumerate() {
        csv.push_str(&t.to_string());
        for z in row {
            csv.push_str(&format!(",{}", round_sig(*z, 6)));
        }
        csv.push('\n');
    }
    emit(cli, "trajectory", &serde_json::to_string_pretty(&doc)?, Some(&csv))?;
    Ok(0)
}

fn attack_plan(cli: &Cli, args: &PlanArgs) -> Result<u8> {
    let (id, params, p, leader) = match &args.params {
        Some(path) => {
            let id = path.file_stem().map_or("params".into(), |s| s.to_string_lossy().into_owned());
            let leader = args.scenario.leader_size.unwrap_or_default();
            (id, load(path)?, args.scenario.p.unwrap_or(DEFAULT_P), leader)
        }
        None => {
            let sc = args.scenario.resolve(cli.seed)?;
            if sc.instances > 1 {
                return Err(usage("attack-plan works on one instance; drop --instances"));
            }
            let params = generate(&sc)?.1;
            (sc.id.clone(), params, sc.p, sc.leader_size)
        }
    };
    let k = leader.resolve(params.agent_count());
    let opts = SolveOptions {
        p,
        leader_sizes: if args.all_leader_sizes {
            LeaderSizes::UpTo(k)
        } else {
            LeaderSizes::Exactly(k)
        },
        mode: match args.mode {
            Mode::Approx => FollowerMode::Approx,
            Mode::Exact => FollowerMode::Exact,
        },
        ..SolveOptions::new(p, k, FollowerMode::Approx)
    };
    let plan = match solve_attack_with(&params, &opts) {
        Ok(plan) => plan,
        Err(e @ Error::EnumerationCap { .. }) => {
            eprintln!("skipped: {e}");
            return Ok(SKIPPED);
        }
        Err(e) => return Err(e.into()),
    };
    let report = PlanReport::new(&plan, !args.no_timing);
    let csv = format!("{}\n{}\n", PlanReport::CSV_HEADER, PlanReport::csv_row(&plan, &id));
    emit(cli, "plan", &report.to_json(), Some(&csv))?;
    Ok(0)
}

fn recover_cmd(cli: &Cli, args: &RecoverArgs) -> Result<u8> {
    let network = load_network(&args.network).with_context(|| format!("loading {}", args.network.display()))?;
    let text = fs::read_to_string(&args.trajectories)
        .with_context(|| format!("reading {}", args.trajectories.display()))?;
    let file: TrajectoryFile = serde_json::from_str(&text)?;
    let mut problem = RecoveryProblem::new(network, file.trajectories()?, args.ridge)?;
    if let Some(s) = file.s.clone() {
        problem = problem.with_intrinsic(s)?;
    }
    let result = recover(&problem)?;
    let robustness = match &args.truth {
        Some(path) => Some(recovery_robustness(&problem, &load(path)?, &args.noise_levels, args.noise_seeds)?),
        None => None,
    };

    let params_json: serde_json::Value = serde_json::from_str(&params_to_json(&result.params))?;
    let residuals: Vec<f64> = result.per_agent_residual.iter().map(|r| round_sig(*r, 12)).collect();
    let mut doc = json!({
        "params": params_json,
        "per_agent_residual": residuals,
        "identifiability_flags": result.identifiability_flags,
    });
    if let Some(table) = &robustness {
        let r = |x: f64| round_sig(x, 12);
        doc["robustness"] = table
            .iter()
            .map(|row| {
                json!({
                    "noise": row.noise,
                    "theta_error": r(row.theta_error),
                    "weight_error": r(row.weight_error),
                    "g_error": r(row.g_error),
                })
            })
            .collect();
    }
    let mut csv = String::from("agent,theta,residual,flagged\n");
    for i in 0..result.params.agent_count() {
        csv.push_str(&format!(
            "{i},{},{},{}\n",
            round_sig(result.params.stubbornness()[i], 6),
            round_sig(result.per_agent_residual[i], 6),
            result.identifiability_flags[i]
        ));
    }
    emit(cli, "recovery", &serde_json::to_string_pretty(&doc)?, Some(&csv))?;
    if let Some(dir) = &cli.out_dir {
        let path = dir.join("recovered_params.json");
        write(&path, &params_to_json(&result.params))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(0)
}

fn compare(cli: &Cli, args: &CompareArgs) -> Result<u8> {
    let sc = args.scenario.resolve(cli.seed)?;
    let strategies = match &args.strategies {
        Some(list) => list.clone(),
        None if sc.strategies.is_empty() => Strategy::ALL.to_vec(),
        None => sc.strategies.clone(),
    };
    let rows = run_comparison(&sc, &strategies)?;
    emit_rows(cli, "compare", &rows)
}

fn bench(cli: &Cli, args: &BenchArgs) -> Result<u8> {
    let sc = args.scenario.resolve(cli.seed)?;
    let report = benchmark(&sc, args.repeats)?;
    let csv = format!(
        "scenario,n,leader_size,repeats,mean_solve_seconds,mean_leader_eval_seconds,leader_evaluations,config_count\n{},{},{},{},{},{},{},{}\n",
        report.scenario,
        report.n,
        report.leader_size,
        report.repeats,
        round_sig(report.mean_solve_seconds, 6),
        round_sig(report.mean_leader_eval_seconds, 6),
        report.leader_evaluations,
        report.config_count
    );
    emit(cli, "benchmark", &serde_json::to_string_pretty(&report)?, Some(&csv))?;
    Ok(0)
}

fn count(cli: &Cli, args: &CountArgs) -> Result<u8> {
    let (params, leader) = match &args.params {
        Some(path) => (load(path)?, args.scenario.leader_size.unwrap_or_default()),
        None => {
            let sc = args.scenario.resolve(cli.seed)?;
            (generate(&sc.instance(0))?.1, sc.leader_size)
        }
    };
    let n = params.agent_count();
    let k = leader.resolve(n);
    let total = count_configurations(params.network(), k);
    let doc = json!({
        "n": n,
        "leader_size": k,
        "configurations": total.to_string(),
        "follower_bound": follower_subproblem_bound(n),
    });
    let csv = format!("n,leader_size,configurations,follower_bound\n{n},{k},{total},{}\n", follower_subproblem_bound(n));
    emit(cli, "count", &serde_json::to_string_pretty(&doc)?, Some(&csv))?;
    Ok(0)
}
