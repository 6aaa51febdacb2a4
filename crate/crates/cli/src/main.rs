use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::info;

use slicekit::export::{to_json, write_json, write_trajectory_csv, ModelSummary, SimulationSummary, VerdictReport};
use slicekit::scenario::{builtin, builtin_names, load_config, ConfigError, Scenario};
use slicekit::verify::{verify_all, VerifyOptions};
use slicekit::{SliceError, SliceModel, Verdict};

const EXIT_CONFIG: u8 = 1;
const EXIT_MODEL: u8 = 2;
const EXIT_DYNAMICS: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Build the slice model and write model.json.
    BuildSlice,
    /// Integrate the reconstruction equations; write trajectory.csv and simulation.json.
    Simulate,
    /// Decide whether the action is tubewise Hamiltonian; write verdict.json.
    CheckTubewise,
    /// Run the invariant suite on the config and every built-in scenario.
    Verify,
    /// Print the built-in scenarios.
    ListScenarios,
}

/// Slice models, reconstruction equations and tubewise Hamiltonian checks.
#[derive(Debug, Parser)]
#[command(name = "slicekit", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config file, or the name of a built-in scenario.
    #[arg(long)]
    config: Option<String>,
    /// Output directory; defaults to the config's output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Seed for the states sampled by `verify`.
    #[arg(long)]
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }
}

fn model_failure(e: SliceError) -> Failure {
    Failure::new(EXIT_MODEL, format!("model: {e}"))
}

fn dynamics_failure(e: SliceError) -> Failure {
    Failure::new(EXIT_DYNAMICS, format!("dynamics: {e}"))
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_CONFIG, format!("cannot write {}: {e}", path.display()))
}

struct Context {
    cli: Cli,
}

impl Context {
    fn scenario(&self) -> Result<Scenario, Failure> {
        let Some(path) = &self.cli.config else {
            return Err(Failure::new(EXIT_CONFIG, "--config is required for this command"));
        };
        let mut sc = load_config(path)?;
        if let Some(dt) = self.cli.dt {
            sc.config.integrator.dt = dt;
        }
        if let Some(t) = self.cli.t_end {
            sc.config.integrator.t_end = t;
        }
        let opts = &sc.config.integrator;
        if opts.dt.is_nan() || opts.dt <= 0.0 || opts.t_end.is_nan() || opts.t_end < 0.0 {
            return Err(Failure::new(EXIT_CONFIG, "dt must be positive and t-end nonnegative"));
        }
        Ok(sc)
    }

    fn out_dir(&self, sc: Option<&Scenario>) -> Result<Option<PathBuf>, Failure> {
        let dir = self
            .cli
            .out
            .clone()
            .or_else(|| sc.and_then(|s| s.config.output.dir.clone()).map(PathBuf::from));
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| io_failure(d, e))?;
        }
        Ok(dir)
    }

    fn model(&self, sc: &Scenario) -> Result<SliceModel, Failure> {
        let model = sc.build_model().map_err(model_failure)?;
        sc.check_hamiltonian(&model).map_err(model_failure)?;
        info!(
            "{}: dim k = {}, h = {}, m = {}, q = {}, V = {}",
            sc.name(),
            model.dim_k(),
            model.dim_h(),
            model.dim_m(),
            model.dim_q(),
            model.dim_v()
        );
        Ok(model)
    }
}

fn emit<T: serde::Serialize>(dir: Option<&Path>, file: &str, value: &T) -> Result<(), Failure> {
    match dir {
        Some(d) => {
            let path = d.join(file);
            write_json(&path, value).map_err(|e| io_failure(&path, e))?;
            println!("wrote {}", path.display());
        }
        None => print!("{}", to_json(value)),
    }
    Ok(())
}

fn build_slice(ctx: &Context) -> Result<(), Failure> {
    let sc = ctx.scenario()?;
    let model = ctx.model(&sc)?;
    let dir = ctx.out_dir(Some(&sc))?;
    emit(dir.as_deref(), "model.json", &ModelSummary::new(sc.name(), &model))
}

fn simulate(ctx: &Context) -> Result<(), Failure> {
    let sc = ctx.scenario()?;
    let model = ctx.model(&sc)?;
    let dir = ctx.out_dir(Some(&sc))?;
    let verdict = sc.verdict(&model).map_err(model_failure)?;
    let theta = sc.theta(&model, &verdict).map_err(model_failure)?;
    let opts = &sc.config.integrator;
    let traj = sc.simulate(&model, opts, theta.as_ref()).map_err(dynamics_failure)?;
    if let Some(d) = &dir {
        let path = d.join("trajectory.csv");
        let file = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
        write_trajectory_csv(file, &model, &traj).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
        println!("wrote {}", path.display());
    }
    let summary = SimulationSummary::new(sc.name(), &model, &traj, opts.dt, opts.t_end);
    emit(dir.as_deref(), "simulation.json", &summary)
}

fn check_tubewise(ctx: &Context) -> Result<(), Failure> {
    let sc = ctx.scenario()?;
    let model = ctx.model(&sc)?;
    let dir = ctx.out_dir(Some(&sc))?;
    let verdict = sc.verdict(&model).map_err(model_failure)?;
    let report =
        VerdictReport::new(sc.name(), &model, &verdict, &sc.config.tubewise.loops).map_err(model_failure)?;
    emit(dir.as_deref(), "verdict.json", &report)?;
    println!("verdict: {}", verdict.label());
    if let Verdict::Inconclusive(why) = &verdict {
        return Err(Failure::new(EXIT_INCONCLUSIVE, format!("inconclusive: {why}")));
    }
    Ok(())
}

fn verify(ctx: &Context) -> Result<(), Failure> {
    let mut scenarios = Vec::new();
    let own = match &ctx.cli.config {
        Some(_) => Some(ctx.scenario()?),
        None => None,
    };
    let dir = ctx.out_dir(own.as_ref())?;
    if let Some(sc) = own {
        scenarios.push(sc);
    }
    for name in builtin_names() {
        let cfg = builtin(name).expect("listed builtin");
        if scenarios.iter().any(|s| s.config.name == cfg.name) {
            continue;
        }
        scenarios.push(Scenario::from_config(cfg)?);
    }
    let mut opts = VerifyOptions::default();
    if let Some(dt) = ctx.cli.dt {
        opts.dt = dt;
    }
    if let Some(t) = ctx.cli.t_end {
        opts.t_end = t;
    }
    if let Some(seed) = ctx.cli.seed {
        opts.seed = seed;
    }
    let report = verify_all(&scenarios, &opts);
    for r in &report.scenarios {
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        match (&r.error, r.passed) {
            (_, true) => println!("PASS {}", r.scenario),
            (Some(e), _) => println!("FAIL {}: {e}", r.scenario),
            (None, false) => println!("FAIL {}: {}", r.scenario, failed.join(", ")),
        }
    }
    if let Some(d) = &dir {
        let path = d.join("verify.json");
        write_json(&path, &report).map_err(|e| io_failure(&path, e))?;
        println!("wrote {}", path.display());
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, "verification failed"))
    }
}

fn list_scenarios(ctx: &Context) -> Result<(), Failure> {
    let dir = ctx.out_dir(None)?;
    for name in builtin_names() {
        let cfg = builtin(name).expect("listed builtin");
        println!("{name}\t{}", cfg.description);
        if let Some(d) = &dir {
            let path = d.join(format!("{name}.json"));
            write_json(&path, &cfg).map_err(|e| io_failure(&path, e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SLICEKIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = Context { cli };
    let result = match ctx.cli.command {
        Command::BuildSlice => build_slice(&ctx),
        Command::Simulate => simulate(&ctx),
        Command::CheckTubewise => check_tubewise(&ctx),
        Command::Verify => verify(&ctx),
        Command::ListScenarios => list_scenarios(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
