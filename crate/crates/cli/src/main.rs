//! `cuspidal-kit`: cuspidality identification, path planning, workpiece
//! placement and workspace maps from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 identification undetermined,
//! 4 path infeasible, 5 no feasible optimizer start.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cuspidal_core::io::{
    count_map_csv, history_csv, joint_path_csv, read_json, to_json, write_text, Frame, IdentifyRecord, OptimizeRecord,
    PathFile, PlanRecord, ResultFile, RobotFile, StartRecord,
};
use cuspidal_core::planner::PlanOutcome;
use cuspidal_core::scenarios::{self, HelixOrientation};
use cuspidal_core::workpiece::OptimizerConfig;
use cuspidal_core::{
    analyze_repeatability, identify_cuspidal, optimize_workpiece_pose, plan_path, solution_count_map, Config, Error,
    Path64, PlanResult, Planner, Robot,
};

const EXIT_INPUT: u8 = 2;
const EXIT_UNDETERMINED: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_NO_START: u8 = 5;
const THREADS_ENV: &str = "CUSPIDAL_KIT_THREADS";

#[derive(Parser)]
#[command(name = "cuspidal-kit", version, about = "Cuspidal robot analysis, path planning and placement")]
struct Cli {
    /// Worker threads for per-sample IK; overridden by CUSPIDAL_KIT_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a nonsingular change of solution.
    Identify {
        /// Robot JSON file or built-in name.
        #[arg(long)]
        robot: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_poses: usize,
        /// Determinant samples along each candidate segment.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal joint path for a base-frame task path.
    Plan {
        #[arg(long)]
        robot: String,
        /// Path JSON file or built-in name.
        #[arg(long)]
        path: String,
        #[arg(long)]
        eps0: Option<f64>,
        #[arg(long, default_value_t = 2)]
        skip_depth: usize,
        /// Only join solutions with equal sign of det J.
        #[arg(long)]
        nonsingular: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write lambda, q and det J per sample as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Workpiece placement minimizing the joint path cost of a toolpath.
    Optimize {
        #[arg(long)]
        robot: String,
        /// Workpiece-frame path JSON file or built-in name.
        #[arg(long)]
        toolpath: String,
        #[arg(long, default_value_t = 2)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Objective evaluations per start.
        #[arg(long)]
        max_evals: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the best-so-far histories as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// IK solution counts over the (rho, z) half-plane of a 3R arm.
    Map {
        #[arg(long)]
        robot: String,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
        rho_range: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
        z_range: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["N", "M"])]
        grid: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a helical toolpath in the workpiece frame.
    Helix {
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        pitch: f64,
        #[arg(long, default_value_t = 2.0)]
        turns: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Orientation::Fixed)]
        orientation: Orientation,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Orientation {
    Fixed,
    Tangent,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::NoFeasibleStart { .. }) { EXIT_NO_START } else { EXIT_INPUT };
        Self { code, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads(cli.threads) {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Failure::input(format!("{THREADS_ENV} must be a count, got {v:?}")))?,
        ),
        Err(_) => flag,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::input(format!("cannot start {n} threads: {e}")))?;
    }
    Ok(())
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Identify { robot, seed, max_poses, samples, out } => {
            let robot = load_robot(&robot)?;
            let verdict = identify_cuspidal(&robot, seed, max_poses, samples, &Config::default())?;
            let record = IdentifyRecord::new(robot.name(), seed, max_poses, &verdict);
            emit(&ResultFile::Identify(record), out.as_deref())?;
            Ok(if verdict.is_cuspidal() { 0 } else { EXIT_UNDETERMINED })
        }
        Command::Plan { robot, path, eps0, skip_depth, nonsingular, out, csv } => {
            let robot = load_robot(&robot)?;
            let (path, frame) = load_path(&path)?;
            if frame != Frame::Base {
                return Err(Failure::input("plan needs a path in the base frame"));
            }
            let cfg = Planner { eps0, skip_depth, nonsingular_only: nonsingular, ..Planner::default() };
            let ik = Config::default();
            let result = plan_path(&robot, &path, &cfg, &ik)?;
            let repeat = if path.is_closed() && result.is_feasible() {
                match analyze_repeatability(&robot, &path, &cfg, &ik) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        eprintln!("warning: repeatability analysis skipped: {e}");
                        None
                    }
                }
            } else {
                None
            };
            let record = PlanRecord::new(robot.name(), &result, repeat.as_ref());
            emit(&ResultFile::Plan(record), out.as_deref())?;
            match result.path() {
                Some(p) => {
                    if let Some(csv) = csv {
                        write_text(csv, &joint_path_csv(p))?;
                    }
                    Ok(0)
                }
                None => {
                    let counts = &result.layer_counts;
                    let empty = counts.iter().filter(|&&c| c == 0).count();
                    let (last, first) = infeasible_span(&result);
                    let show = |l: Option<usize>| l.map_or_else(|| "none".to_string(), |k| k.to_string());
                    eprintln!(
                        "infeasible: last layer reached {}, first layer unreached {}; {empty} of {} layers empty",
                        show(last),
                        show(first),
                        counts.len()
                    );
                    Ok(EXIT_INFEASIBLE)
                }
            }
        }
        Command::Optimize { robot, toolpath, starts, seed, max_evals, out, csv } => {
            let robot = load_robot(&robot)?;
            let (toolpath, frame) = load_path(&toolpath)?;
            if frame != Frame::Workpiece {
                return Err(Failure::input("optimize needs a toolpath in the workpiece frame"));
            }
            let mut cfg = OptimizerConfig { n_starts: starts, seed, ..OptimizerConfig::default() };
            if let Some(m) = max_evals {
                cfg.nelder_mead.max_evals = m;
            }
            let results = optimize_workpiece_pose(&robot, &toolpath, &cfg)?;
            let record = OptimizeRecord {
                robot: robot.name().to_string(),
                seed,
                starts: results.iter().map(StartRecord::from_result).collect(),
            };
            emit(&ResultFile::Optimize(record), out.as_deref())?;
            if let Some(csv) = csv {
                write_text(csv, &history_csv(&results))?;
            }
            Ok(0)
        }
        Command::Map { robot, rho_range, z_range, grid, out } => {
            let robot = load_robot(&robot)?;
            let (rho, z) = ((rho_range[0], rho_range[1]), (z_range[0], z_range[1]));
            let cfg = Config { include_approximate: false, ..Config::default() };
            let counts = solution_count_map(&robot, rho, z, (grid[0], grid[1]), &cfg)?;
            let text = count_map_csv(&counts, rho, z);
            match out {
                Some(p) => write_text(p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Helix { radius, pitch, turns, samples, orientation, out } => {
            let mode = match orientation {
                Orientation::Fixed => HelixOrientation::Fixed,
                Orientation::Tangent => HelixOrientation::TangentFollowing,
            };
            let path = scenarios::generate_helix(radius, pitch, turns, samples, mode)?;
            let file = PathFile::from_task_path(&path, Frame::Workpiece, matches!(orientation, Orientation::Tangent));
            let text = to_json(&file);
            match out {
                Some(p) => write_text(p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn infeasible_span(r: &PlanResult<f64>) -> (Option<usize>, Option<usize>) {
    match &r.outcome {
        PlanOutcome::Infeasible(i) => (i.last_reached, i.first_unreached),
        PlanOutcome::Feasible(_) => (None, None),
    }
}

/// Prints the result JSON and writes it to `out` when given.
fn emit(result: &ResultFile, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_json(result);
    print!("{text}");
    if let Some(p) = out {
        write_text(p, &text)?;
    }
    Ok(())
}

/// A path to an existing file is read as JSON; anything else must name a
/// built-in scenario.
fn load_robot(spec: &str) -> Result<Robot, Failure> {
    if Path::new(spec).is_file() {
        let file: RobotFile = read_json(spec)?;
        let (robot, warnings) = file.to_robot()?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        return Ok(robot);
    }
    scenarios::robot_by_name(spec).ok_or_else(|| {
        Failure::input(format!(
            "no robot file {spec:?} and no built-in robot of that name (built-ins: {})",
            scenarios::ROBOT_NAMES.join(", ")
        ))
    })
}

fn load_path(spec: &str) -> Result<(Path64, Frame), Failure> {
    if Path::new(spec).is_file() {
        let file: PathFile = read_json(spec)?;
        return Ok((file.to_task_path()?, file.frame));
    }
    match scenarios::path_by_name(spec) {
        Some((p, workpiece)) => Ok((p, if workpiece { Frame::Workpiece } else { Frame::Base })),
        None => Err(Failure::input(format!(
            "no path file {spec:?} and no built-in path of that name (built-ins: {})",
            scenarios::PATH_NAMES.join(", ")
        ))),
    }
}
