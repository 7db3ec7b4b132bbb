use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mariomix_core::playstyle::{run_policy, CHARACTERIZE_MAX_TICKS};
use mariomix_core::solver::SolverConfig;
use mariomix_core::{
    build_dataset, builtin_reward_specs, bundled_levels, extract_clip, load_dataset, load_level_dir,
    run_mixed, save_dataset, segment_boundaries, AssignmentFile, BuildConfig, Level, PolicyDataset,
    ReplayFile, Resolution,
};
use serde::Serialize;

mod error;

use error::CliError;

#[derive(Parser)]
#[command(name = "mariomix", version, about = "Author platformer bot behaviour by mixing solved playstyles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore the levels, solve every built-in reward spec and write the dataset.
    BuildDataset(BuildArgs),
    /// Play one policy, or a per-segment assignment, and write the replay.
    Simulate(SimulateArgs),
    /// Cut the frames of one segment out of a replay.
    Clip(ClipArgs),
    /// Serve the HTTP and websocket API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct LevelsArg {
    /// Directory of `*.txt` level files. Defaults to the bundled levels.
    #[arg(long)]
    levels: Option<PathBuf>,
}

impl LevelsArg {
    fn load(&self) -> Result<Vec<Level>, CliError> {
        match &self.levels {
            Some(dir) => Ok(load_level_dir(dir)?),
            None => Ok(bundled_levels()),
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    levels: LevelsArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Completed actions to explore per level.
    #[arg(long, default_value_t = 200_000)]
    explore_budget: u64,
    /// Characterization runs per level.
    #[arg(long, default_value_t = 10)]
    runs: u32,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    levels: LevelsArg,
    /// Level id. Taken from the assignment file when one is given.
    #[arg(long, required_unless_present = "assignment")]
    level: Option<String>,
    #[arg(long, conflicts_with = "assignment", required_unless_present = "assignment")]
    policy: Option<String>,
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = CHARACTERIZE_MAX_TICKS)]
    max_ticks: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClipArgs {
    #[arg(long)]
    replay: PathBuf,
    #[command(flatten)]
    levels: LevelsArg,
    #[arg(long)]
    resolution: Resolution,
    #[arg(long)]
    segment: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    levels: LevelsArg,
    #[arg(long, env = "MARIOMIX_PORT", default_value_t = 8080)]
    port: u16,
    /// Directory of UI assets served at `/`.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            error::report(&CliError::Usage(first.to_string()));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::BuildDataset(args) => cmd_build_dataset(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Clip(args) => cmd_clip(args),
        Command::Serve(args) => cmd_serve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error::report(&e);
            ExitCode::FAILURE
        }
    }
}

fn print_line(value: &impl Serialize) {
    println!("{}", serde_json::to_string(value).expect("report line serializes"));
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn open_dataset(path: &Path) -> Result<PolicyDataset, CliError> {
    load_dataset(path).map_err(|source| CliError::Dataset {
        path: path.to_path_buf(),
        source,
    })
}

fn find_level(levels: Vec<Level>, id: &str) -> Result<Level, CliError> {
    levels
        .into_iter()
        .find(|l| l.id == id)
        .ok_or_else(|| CliError::UnknownLevel(id.to_string()))
}

fn cmd_build_dataset(args: BuildArgs) -> Result<(), CliError> {
    if args.explore_budget == 0 {
        return Err(CliError::Invalid("--explore-budget must be positive".into()));
    }
    if args.runs == 0 {
        return Err(CliError::Invalid("--runs must be positive".into()));
    }
    let solver = SolverConfig {
        gamma: args.gamma,
        epsilon: args.epsilon,
        ..SolverConfig::default()
    };
    solver.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    let levels = args.levels.load()?;
    let config = BuildConfig {
        seed: args.seed,
        explore_budget: args.explore_budget,
        runs_per_level: args.runs,
        solver,
    };
    let (dataset, report) = build_dataset(&levels, &builtin_reward_specs(), &config)?;
    save_dataset(&dataset, &args.out).map_err(|source| CliError::Dataset {
        path: args.out.clone(),
        source,
    })?;
    for line in &report {
        print_line(line);
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.max_ticks == 0 {
        return Err(CliError::Invalid("--max-ticks must be positive".into()));
    }
    let dataset = open_dataset(&args.dataset)?;
    let levels = args.levels.load()?;
    let replay = match (&args.policy, &args.assignment) {
        (Some(name), _) => {
            let level = find_level(levels, args.level.as_deref().expect("clap requires --level"))?;
            let entry = dataset
                .get(name)
                .ok_or_else(|| CliError::UnknownPolicy(name.clone()))?;
            run_policy(&entry.policy, &level, args.seed, args.max_ticks)
        }
        (None, Some(path)) => {
            let file: AssignmentFile = serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Parse {
                path: path.clone(),
                message: e.to_string(),
            })?;
            if let Some(id) = args.level.as_deref().filter(|id| *id != file.level_id) {
                return Err(CliError::Invalid(format!(
                    "--level {id} does not match the assignment's level `{}`",
                    file.level_id
                )));
            }
            let level = find_level(levels, &file.level_id)?;
            let assignment = file.into_assignment(&level)?;
            assignment.check_names(&dataset)?;
            run_mixed(&level, &assignment, &dataset, args.seed, args.max_ticks)?
        }
        (None, None) => unreachable!("clap requires --policy or --assignment"),
    };
    let file = ReplayFile::from_replay(&replay);
    write_file(&args.out, &file.to_json())?;
    let last = replay.final_state();
    print_line(&serde_json::json!({
        "event": "simulated",
        "level_id": replay.level_id,
        "outcome": last.outcome,
        "ticks": last.tick,
        "checksum": file.checksum,
    }));
    Ok(())
}

fn cmd_clip(args: ClipArgs) -> Result<(), CliError> {
    let text = read_file(&args.replay)?;
    let file = ReplayFile::from_json(&text).map_err(|e| CliError::Parse {
        path: args.replay.clone(),
        message: e.to_string(),
    })?;
    let level = find_level(args.levels.load()?, &file.level_id)?;
    let replay = file.into_replay(&level)?;
    let seg = segment_boundaries(&level, args.resolution)?;
    let clip = extract_clip(&replay, &seg, args.segment)?;
    write_file(&args.out, &serde_json::to_string(&clip).expect("clip serializes"))?;
    print_line(&serde_json::json!({
        "event": "clip",
        "segment_index": clip.segment_index,
        "start_tick": clip.start_tick,
        "frames": clip.frames.len(),
        "duration_seconds": clip.duration_seconds,
    }));
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let dataset = open_dataset(&args.dataset)?;
    let levels = args.levels.load()?;
    let state = mariomix_service::AppState::new(levels, Some(dataset), mariomix_service::ServiceConfig::default());
    let app = mariomix_service::app(state, args.static_dir.as_deref());
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::Runtime)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", args.port))
            .await
            .map_err(CliError::Runtime)?;
        let addr = listener.local_addr().map_err(CliError::Runtime)?;
        print_line(&serde_json::json!({"event": "listening", "addr": addr.to_string()}));
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        mariomix_service::serve(listener, app, shutdown)
            .await
            .map_err(CliError::Runtime)?;
        print_line(&serde_json::json!({"event": "stopped"}));
        Ok(())
    })
}
