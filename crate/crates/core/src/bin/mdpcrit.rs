//! Command-line entry point: generate environments, classify models,
//! evaluate policies under every criterion, solve for optimal policy sets,
//! estimate critical discount factors, convert between episodic encodings,
//! train tabular learners, and sweep landscapes and families. Every file
//! output is accompanied by a manifest recording the command, configuration,
//! seed, tool version, and input hashes, so runs are reproducible.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use mdpcrit::chain::classify_mdp;
use mdpcrit::envs;
use mdpcrit::error::Error;
use mdpcrit::eval;
use mdpcrit::learn::{self, LearnerConfig};
use mdpcrit::mdp::{parse_mdp, serialize_mdp, Mdp, ParsedMdp, PolicyTable};
use mdpcrit::solve::{self, BlackwellConfig, GainThresholdConfig, OptimalityResult};
use mdpcrit::transform::{to_absorbing_model, to_reset_model, AbsorbingModel, ResetModel};

#[derive(Parser)]
#[command(name = "mdpcrit", version, about = "Finite-MDP optimality-criteria toolkit")]
struct Cli {
    /// Seed for the operations that sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel sweeps (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Output file; structured results print to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an environment model as MDP JSON.
    Gen(GenArgs),
    /// Classify a model: chain pattern and accessibility.
    Classify(ClassifyArgs),
    /// Evaluate a fixed policy under every criterion.
    Eval(EvalArgs),
    /// Compute an optimal policy set under one criterion.
    Solve(SolveArgs),
    /// Estimate the critical discount factor.
    Blackwell(BlackwellArgs),
    /// Convert between absorbing-terminal ("zrat") and resetting ("rst")
    /// encodings of an episodic model.
    Convert(ConvertArgs),
    /// Train a tabular Q-learner and write its learning curve as CSV.
    Train(TrainArgs),
    /// Exact policy-value landscape over a two-parameter softmax family
    /// (CSV: theta1,theta2,key,value).
    Landscape(LandscapeArgs),
    /// Critical-discount-factor sweep across an environment family
    /// (CSV: knob,gamma_bw,bracket_lo,bracket_hi).
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Gridnav,
    Taxi,
    Chain,
    Torus,
    Access,
    Loop,
}

#[derive(Args)]
struct GenArgs {
    /// Environment family.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Size knob: grid side (gridnav/taxi), states (chain/torus), servers
    /// (access).
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Intended-move probability where the family has one.
    #[arg(long, default_value_t = 0.9)]
    slip: f64,
    /// Reward constant where the family has one (torus opposite site, loop
    /// reward).
    #[arg(long, default_value_t = 1.0)]
    reward: f64,
}

#[derive(Args)]
struct ClassifyArgs {
    /// MDP JSON file.
    model: PathBuf,
    /// Deterministic-policy enumeration cap; overrides MDPCRIT_MAX_ENUM and
    /// the built-in default.
    #[arg(long)]
    max_enum: Option<u128>,
}

#[derive(Args)]
struct EvalArgs {
    /// MDP JSON file.
    model: PathBuf,
    /// Policy JSON file ({"actions": [...]} or {"probs": [[...]]}).
    #[arg(long)]
    policy: PathBuf,
    /// Discount factor for the discounted criterion.
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Highest Laurent coefficient order to report.
    #[arg(long, default_value_t = 1)]
    n_max: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Discounted,
    Gain,
    Ndiscount,
    Total,
}

#[derive(Args)]
struct SolveArgs {
    /// MDP JSON file.
    model: PathBuf,
    #[arg(long, value_enum)]
    criterion: CriterionArg,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Order for the n-discount criterion.
    #[arg(long, default_value_t = 1)]
    n: i32,
    /// Materialization cap for product-form policy sets in the output.
    #[arg(long, default_value_t = 64)]
    set_cap: u128,
    #[arg(long)]
    max_enum: Option<u128>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    /// Argmax-set stability (exact, desk-scale).
    Set,
    /// Gain-optimality of the greedy policy (robust at scale).
    Gain,
}

#[derive(Args)]
struct BlackwellArgs {
    /// MDP JSON file.
    model: PathBuf,
    /// Bracket width.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Sweep grid size.
    #[arg(long, default_value_t = 40)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Set)]
    estimator: EstimatorArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Rst,
    Zrat,
}

#[derive(Args)]
struct ConvertArgs {
    /// MDP JSON file carrying a `distinguished` marker.
    model: PathBuf,
    /// Target encoding.
    #[arg(long, value_enum)]
    to: KindArg,
    /// Skip the inevitable-termination check (deterministic-movement
    /// environments where some stationary policies never terminate).
    #[arg(long, default_value_t = false)]
    force: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Qgamma,
    Qb,
    Qtot,
}

#[derive(Args)]
struct TrainArgs {
    /// MDP JSON file (qtot expects a "zrat" distinguished marker; qb is
    /// meant for resetting/continuing models).
    model: PathBuf,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    #[arg(long, default_value_t = 1.0)]
    q_init: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1_000)]
    episode_cap: u64,
    /// Checkpoint cadence in steps (0 = budget / 100).
    #[arg(long, default_value_t = 0)]
    eval_every: u64,
    /// Reference state of the average-reward learner.
    #[arg(long, default_value_t = 0)]
    ref_state: usize,
}

#[derive(Args)]
struct LandscapeArgs {
    /// MDP JSON file.
    model: PathBuf,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 41)]
    grid: usize,
    /// Comma-separated discount factors.
    #[arg(long, default_value = "0,0.35,0.5,0.7,0.85,0.95", value_delimiter = ',')]
    gammas: Vec<f64>,
    /// Parameter range as lo,hi for both axes.
    #[arg(long, default_value = "-5,5", value_delimiter = ',')]
    theta_range: Vec<f64>,
    /// Action whose logit the two parameters control.
    #[arg(long, default_value_t = 0)]
    action: usize,
    /// Start state for the discounted surfaces.
    #[arg(long, default_value_t = 0)]
    s0: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Comma-separated knob values.
    #[arg(long, value_delimiter = ',')]
    knobs: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 40)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Set)]
    estimator: EstimatorArg,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let started = Instant::now();
    match run(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = match &err {
                Error::Io(_) => ("io", 1u8),
                Error::Json(_) => ("schema", 2),
                _ => ("validation", 2),
            };
            eprintln!(
                "{}",
                json!({
                    "error": kind,
                    "message": err.to_string(),
                    "elapsed_ms": started.elapsed().as_millis() as u64,
                })
            );
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli, argv: &[String]) -> Result<(), Error> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(cli, argv, args),
        Command::Classify(args) => cmd_classify(cli, argv, args),
        Command::Eval(args) => cmd_eval(cli, argv, args),
        Command::Solve(args) => cmd_solve(cli, argv, args),
        Command::Blackwell(args) => cmd_blackwell(cli, argv, args),
        Command::Convert(args) => cmd_convert(cli, argv, args),
        Command::Train(args) => cmd_train(cli, argv, args),
        Command::Landscape(args) => cmd_landscape(cli, argv, args),
        Command::Sweep(args) => cmd_sweep(cli, argv, args),
    }
}

// --------------------------------------------------------------- helpers

fn enumeration_cap(flag: Option<u128>) -> u128 {
    flag.or_else(|| {
        std::env::var("MDPCRIT_MAX_ENUM")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(mdpcrit::mdp::DEFAULT_ENUM_CAP)
}

fn read_model(path: &Path) -> Result<ParsedMdp, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_mdp(&text)
}

fn read_policy(path: &Path, mdp: &Mdp) -> Result<PolicyTable, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc: Value = serde_json::from_str(&text)?;
    if let Some(actions) = doc.get("actions") {
        let actions: Vec<usize> = serde_json::from_value(actions.clone())?;
        let policy = PolicyTable::from_actions(&actions, mdp.num_actions())?;
        policy.validate_against(mdp)?;
        return Ok(policy);
    }
    if let Some(probs) = doc.get("probs") {
        let rows: Vec<Vec<f64>> = serde_json::from_value(probs.clone())?;
        let n = rows.len();
        let m = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut arr = ndarray::Array2::zeros((n, m));
        for (s, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension("ragged policy rows".into()));
            }
            for (a, &p) in row.iter().enumerate() {
                arr[[s, a]] = p;
            }
        }
        let policy = PolicyTable::new(arr)?;
        policy.validate_against(mdp)?;
        return Ok(policy);
    }
    Err(Error::Validation(
        "policy document needs `actions` or `probs`".into(),
    ))
}

/// Write `content` to `--out` (atomically, with a manifest) or stdout.
fn emit(
    cli: &Cli,
    argv: &[String],
    config: Value,
    inputs: &[&Path],
    content: &str,
) -> Result<(), Error> {
    match &cli.out {
        None => {
            println!("{content}");
            Ok(())
        }
        Some(out) => {
            write_atomic(out, content)?;
            let mut hashes = BTreeMap::new();
            for path in inputs {
                let bytes = std::fs::read(path)?;
                let digest = Sha256::digest(&bytes);
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                hashes.insert(path.display().to_string(), hex);
            }
            let manifest = json!({
                "command": argv.join(" "),
                "config": config,
                "seed": cli.seed,
                "version": env!("CARGO_PKG_VERSION"),
                "input_hashes": hashes,
                "wall_clock_unix_ms": std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis() as u64)
                    .unwrap_or(0),
            });
            let mut manifest_path = out.as_os_str().to_owned();
            manifest_path.push(".manifest.json");
            write_atomic(
                Path::new(&manifest_path),
                &format!("{}\n", serde_json::to_string_pretty(&manifest)?),
            )
        }
    }
}

fn write_atomic(path: &Path, content: &str) -> Result<(), Error> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn vec_json(v: &Array1<f64>) -> Value {
    json!(v.to_vec())
}

fn result_json(res: &OptimalityResult, set_cap: u128) -> Value {
    let policies = res.policy_set.materialize(set_cap).ok().map(|p| json!(p));
    json!({
        "criterion": res.criterion,
        "optimal_value": res.optimal_value.to_vec(),
        "policy_set": res.policy_set,
        "policies": policies,
        "policy_count": res.policy_set.count().to_string(),
        "iterations": res.iterations,
        "residual": res.residual,
    })
}

// ------------------------------------------------------------- commands

fn cmd_gen(cli: &Cli, argv: &[String], args: &GenArgs) -> Result<(), Error> {
    let (text, config) = match args.family {
        FamilyArg::Gridnav => {
            let model = envs::gridnav(args.n, args.slip)?;
            (
                serialize_mdp(model.mdp(), Some(&model.distinguished())),
                json!({"family": "gridnav", "n": args.n, "slip": args.slip}),
            )
        }
        FamilyArg::Taxi => {
            let model = envs::taxi(args.n)?;
            (
                serialize_mdp(model.mdp(), Some(&model.distinguished())),
                json!({"family": "taxi", "n": args.n}),
            )
        }
        FamilyArg::Chain => {
            let mdp = envs::chain_env(args.n, envs::ChainParams::default())?;
            (
                serialize_mdp(&mdp, None),
                json!({"family": "chain", "n": args.n}),
            )
        }
        FamilyArg::Torus => {
            let mdp = envs::torus_env(envs::TorusParams {
                num_states: args.n.max(4),
                opposite_reward: args.reward,
                ..envs::TorusParams::default()
            })?;
            (
                serialize_mdp(&mdp, None),
                json!({"family": "torus", "n": args.n, "reward": args.reward}),
            )
        }
        FamilyArg::Access => {
            let mdp = envs::access_control(args.n, envs::AccessControlParams::default())?;
            (
                serialize_mdp(&mdp, None),
                json!({"family": "access", "n": args.n}),
            )
        }
        FamilyArg::Loop => {
            let mdp = mdpcrit::fixtures::single_loop(args.reward);
            (
                serialize_mdp(&mdp, None),
                json!({"family": "loop", "reward": args.reward}),
            )
        }
    };
    emit(cli, argv, config, &[], &text)
}

fn cmd_classify(cli: &Cli, argv: &[String], args: &ClassifyArgs) -> Result<(), Error> {
    let parsed = read_model(&args.model)?;
    let cap = enumeration_cap(args.max_enum);
    let report = classify_mdp(&parsed.mdp, cap);
    let out = json!({
        "num_states": parsed.mdp.num_states(),
        "num_actions": parsed.mdp.num_actions(),
        "chain_pattern": report.chain_pattern,
        "accessibility": report.accessibility,
        "method": report.method,
    });
    emit(
        cli,
        argv,
        json!({"max_enum": cap.to_string()}),
        &[&args.model],
        &format!("{}\n", serde_json::to_string_pretty(&out)?),
    )
}

fn cmd_eval(cli: &Cli, argv: &[String], args: &EvalArgs) -> Result<(), Error> {
    let parsed = read_model(&args.model)?;
    let mdp = &parsed.mdp;
    let policy = read_policy(&args.policy, mdp)?;
    let chain = mdpcrit::induce_chain(mdp, &policy)?;
    let v_gamma = eval::discounted_values(&chain, args.gamma)?;
    let coeffs = eval::laurent_coefficients(&chain, args.n_max.max(1))?;
    let v_total = eval::total_values(&chain).ok();
    let truncation = eval::truncation_residual(&chain, args.gamma)?;
    // Residual of the discounted evaluation equation.
    let bellman = {
        let backup = chain.r() + &(chain.p().dot(&v_gamma) * args.gamma);
        mdpcrit::linalg::inf_norm_vec(&(&backup - &v_gamma))
    };
    // Worst residual of the chained coefficient equations.
    let nested = {
        let p = chain.p();
        let mut worst: f64 =
            mdpcrit::linalg::inf_norm_vec(&(p.dot(coeffs.v(-1)) - coeffs.v(-1)));
        let r0 = chain.r() - coeffs.v(-1) + p.dot(coeffs.v(0)) - coeffs.v(0);
        worst = worst.max(mdpcrit::linalg::inf_norm_vec(&r0));
        for n in 0..coeffs.n_max() {
            let rn = p.dot(coeffs.v(n + 1)) - coeffs.v(n) - coeffs.v(n + 1);
            worst = worst.max(mdpcrit::linalg::inf_norm_vec(&rn));
        }
        worst
    };
    let v_n: Vec<Value> = (1..=coeffs.n_max()).map(|n| vec_json(coeffs.v(n))).collect();
    let out = json!({
        "gamma": args.gamma,
        "v_gamma": v_gamma.to_vec(),
        "v_gain": vec_json(coeffs.v(-1)),
        "v_bias": vec_json(coeffs.v(0)),
        "v_n": v_n,
        "v_total": v_total.map(|v| v.to_vec()),
        "residuals": {
            "bellman": bellman,
            "nested_coefficients": nested,
            "truncation": truncation.to_vec(),
        },
    });
    emit(
        cli,
        argv,
        json!({"gamma": args.gamma, "n_max": args.n_max}),
        &[&args.model, &args.policy],
        &format!("{}\n", serde_json::to_string_pretty(&out)?),
    )
}

fn cmd_solve(cli: &Cli, argv: &[String], args: &SolveArgs) -> Result<(), Error> {
    let parsed = read_model(&args.model)?;
    let mdp = &parsed.mdp;
    let cap = enumeration_cap(args.max_enum);
    let out = match args.criterion {
        CriterionArg::Discounted => {
            let res = solve::policy_iteration_discounted(mdp, args.gamma)?;
            result_json(&res, args.set_cap)
        }
        CriterionArg::Gain => {
            let res = solve::policy_iteration_average(mdp)?;
            result_json(&res, args.set_cap)
        }
        CriterionArg::Ndiscount => {
            let sets = solve::n_discount_optimal_sets(mdp, args.n, cap)?;
            let last = sets.last().expect("n >= -1 yields at least one result");
            let mut v = result_json(last, args.set_cap);
            v["all_orders"] = json!(sets
                .iter()
                .map(|r| result_json(r, args.set_cap))
                .collect::<Vec<_>>());
            v
        }
        CriterionArg::Total => {
            let res = solve::total_optimal_set(mdp, cap)?;
            result_json(&res, args.set_cap)
        }
    };
    emit(
        cli,
        argv,
        json!({"criterion": format!("{:?}", args.criterion), "gamma": args.gamma, "n": args.n}),
        &[&args.model],
        &format!("{}\n", serde_json::to_string_pretty(&out)?),
    )
}

fn cmd_blackwell(cli: &Cli, argv: &[String], args: &BlackwellArgs) -> Result<(), Error> {
    let parsed = read_model(&args.model)?;
    let out = match args.estimator {
        EstimatorArg::Set => {
            let est = solve::blackwell_gamma(
                &parsed.mdp,
                BlackwellConfig {
                    tol: args.tol,
                    grid_size: args.grid,
                    ..BlackwellConfig::default()
                },
            )?;
            json!({
                "estimator": "set",
                "gamma_bw": est.gamma_bw,
                "bracket": est.bracket,
                "tolerance_warning": est.tolerance_warning,
                "blackwell_set": est.blackwell_set,
                "sweep": est.sweep_log,
            })
        }
        EstimatorArg::Gain => {
            let est = solve::gain_threshold_gamma(
                &parsed.mdp,
                None,
                GainThresholdConfig {
                    tol: args.tol,
                    grid_size: args.grid,
                    ..GainThresholdConfig::default()
                },
            )?;
            json!({
                "estimator": "gain",
                "gamma_bw": est.gamma_threshold,
                "bracket": est.bracket,
                "optimal_gain": est.optimal_gain,
                "sweep": est.sweep_log,
            })
        }
    };
    emit(
        cli,
        argv,
        json!({"tol": args.tol, "grid": args.grid}),
        &[&args.model],
        &format!("{}\n", serde_json::to_string_pretty(&out)?),
    )
}

fn cmd_convert(cli: &Cli, argv: &[String], args: &ConvertArgs) -> Result<(), Error> {
    let parsed = read_model(&args.model)?;
    let marker = parsed.distinguished.clone().ok_or_else(|| {
        Error::Validation("conversion needs a `distinguished` marker in the document".into())
    })?;
    let text = match (marker.kind.as_str(), args.to) {
        ("zrat", KindArg::Rst) => {
            let model = AbsorbingModel::new(parsed.mdp, marker.state, marker.action)?;
            let reset = if args.force {
                mdpcrit::transform::to_reset_model_unchecked(&model)?
            } else {
                to_reset_model(&model)?
            };
            serialize_mdp(reset.mdp(), Some(&reset.distinguished()))
        }
        ("rst", KindArg::Zrat) => {
            let model = ResetModel::new(parsed.mdp, marker.state, marker.action)?;
            let absorbing = to_absorbing_model(&model)?;
            serialize_mdp(absorbing.mdp(), Some(&absorbing.distinguished()))
        }
        (kind, _) => {
            return Err(Error::Validation(format!(
                "cannot convert a '{kind}' model to the requested encoding"
            )))
        }
    };
    emit(
        cli,
        argv,
        json!({"to": format!("{:?}", args.to), "force": args.force}),
        &[&args.model],
        &text,
    )
}

fn cmd_train(cli: &Cli, argv: &[String], args: &TrainArgs) -> Result<(), Error> {
    let parsed = read_model(&args.model)?;
    let mdp = parsed.mdp;
    let mut cfg = LearnerConfig::new(args.alpha, args.q_init, args.steps, cli.seed);
    cfg.epsilon_greedy = args.epsilon;
    cfg.episode_cap = args.episode_cap;
    cfg.ref_state = args.ref_state;
    if args.eval_every > 0 {
        cfg.eval_every = args.eval_every;
    }
    // An absorbing marker supplies the terminal state for episodic training.
    if let Some(d) = &parsed.distinguished {
        if d.kind == "zrat" {
            cfg.terminal_state = Some(d.state);
        }
    }
    let curve = match args.algo {
        AlgoArg::Qgamma => learn::q_gamma_learning(&mdp, args.gamma, &cfg)?.1,
        AlgoArg::Qb => {
            if cfg.ref_state == 0 {
                if let Some(d) = &parsed.distinguished {
                    if d.kind == "rst" {
                        cfg.ref_state = d.state;
                    }
                }
            }
            cfg.terminal_state = None;
            learn::q_b_learning(&mdp, &cfg)?.2
        }
        AlgoArg::Qtot => {
            let d = parsed
                .distinguished
                .as_ref()
                .filter(|d| d.kind == "zrat")
                .ok_or_else(|| {
                    Error::Validation(
                        "total-reward training needs a 'zrat' distinguished marker".into(),
                    )
                })?;
            let model = AbsorbingModel::new(mdp.clone(), d.state, d.action)?;
            learn::q_tot_learning(&model, &cfg)?.1
        }
    };
    let mut csv = String::from("steps,metric,gain_estimate\n");
    for c in &curve.checkpoints {
        match c.gain_estimate {
            Some(g) => csv.push_str(&format!("{},{},{}\n", c.steps, c.metric, g)),
            None => csv.push_str(&format!("{},{},\n", c.steps, c.metric)),
        }
    }
    emit(
        cli,
        argv,
        json!({
            "algo": format!("{:?}", args.algo),
            "gamma": args.gamma,
            "alpha": args.alpha,
            "steps": args.steps,
            "q_init": args.q_init,
            "epsilon": args.epsilon,
            "episode_cap": args.episode_cap,
            "ref_state": args.ref_state,
        }),
        &[&args.model],
        &csv,
    )
}

fn cmd_landscape(cli: &Cli, argv: &[String], args: &LandscapeArgs) -> Result<(), Error> {
    let parsed = read_model(&args.model)?;
    let mdp = &parsed.mdp;
    if args.theta_range.len() != 2 {
        return Err(Error::Domain("theta range must be lo,hi".into()));
    }
    let feat = envs::half_split_featurizer(mdp, args.action)?;
    let grid = envs::GridSpec {
        theta1: (args.theta_range[0], args.theta_range[1]),
        theta2: (args.theta_range[0], args.theta_range[1]),
        resolution: args.grid,
    };
    let land = envs::landscape_grid(mdp, &feat, grid, &args.gammas, args.s0)?;
    emit(
        cli,
        argv,
        json!({
            "grid": args.grid,
            "gammas": args.gammas,
            "theta_range": args.theta_range,
            "action": args.action,
            "s0": args.s0,
        }),
        &[&args.model],
        &land.to_csv(),
    )
}

fn cmd_sweep(cli: &Cli, argv: &[String], args: &SweepArgs) -> Result<(), Error> {
    let family = match args.family {
        FamilyArg::Chain => envs::Family::Chain,
        FamilyArg::Torus => envs::Family::Torus,
        FamilyArg::Access => envs::Family::AccessControl,
        FamilyArg::Gridnav => envs::Family::Gridnav,
        FamilyArg::Loop => envs::Family::Loop,
        FamilyArg::Taxi => {
            return Err(Error::Domain(
                "the taxi family is not part of the sweep (episodic sizes are fixed)".into(),
            ))
        }
    };
    let mut csv = String::from("knob,gamma_bw,bracket_lo,bracket_hi\n");
    match args.estimator {
        EstimatorArg::Set => {
            let cfg = BlackwellConfig {
                tol: args.tol,
                grid_size: args.grid,
                ..BlackwellConfig::default()
            };
            for (knob, est) in envs::gamma_bw_family_sweep(family, &args.knobs, cfg)? {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    knob, est.gamma_bw, est.bracket.0, est.bracket.1
                ));
            }
        }
        EstimatorArg::Gain => {
            let cfg = GainThresholdConfig {
                tol: args.tol,
                grid_size: args.grid,
                ..GainThresholdConfig::default()
            };
            for &knob in &args.knobs {
                let mdp = envs::family_instance(family, knob)?;
                let est = solve::gain_threshold_gamma(&mdp, None, cfg)?;
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    knob, est.gamma_threshold, est.bracket.0, est.bracket.1
                ));
            }
        }
    }
    emit(
        cli,
        argv,
        json!({"family": format!("{:?}", args.family), "knobs": args.knobs, "tol": args.tol}),
        &[],
        &csv,
    )
}
