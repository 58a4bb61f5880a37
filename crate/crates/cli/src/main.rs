//! `slzero`: eigenvalues, eigenfunction zeros, zero velocities, the
//! eigenvalues function and boundary-angle sweeps for `-y'' + q y = mu y`
//! on `[0, pi]`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 solver error.

mod parse;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slzero::oscillation;
use slzero::sweep::{self, DEFAULT_GRID_POINTS};
use slzero::verify::{self, Battery, TestMatrix};
use slzero::{BoundaryParams, EvfCoordinates, Execution, Potential, Solver, SweepPlan, Vary, DEFAULT_CELLS};

use table::{Format, Table};

#[derive(Parser, Debug)]
#[command(name = "slzero", version, about = "Sturm-Liouville eigenvalues and eigenfunction zeros on [0, pi]")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Print the column schema of every table and exit.
    #[arg(long, global = true)]
    schema: bool,

    /// Integration cells.
    #[arg(long, env = "SL_CELLS", global = true, default_value_t = DEFAULT_CELLS)]
    cells: usize,

    #[arg(long, value_enum, global = true, default_value = "json")]
    format: Format,

    /// Output file (directory for `sweep`); standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Reserved; no computation is randomised.
    #[arg(long, global = true, hide = true)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct Problem {
    /// Potential: JSON document, @file, or shorthand such as `constant:5`.
    #[arg(long, default_value = "zero")]
    q: String,

    /// Left boundary angle in (0, pi]; accepts `pi`, `pi/2`, `3pi/4`, numbers.
    #[arg(long, default_value = "pi", value_parser = parse::angle, allow_hyphen_values = true)]
    alpha: f64,

    /// Right boundary angle in [0, pi).
    #[arg(long, default_value = "0", value_parser = parse::angle, allow_hyphen_values = true)]
    beta: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues with interior zero counts and proportionality constants.
    Eigen {
        #[command(flatten)]
        problem: Problem,
        /// Single eigenvalue index.
        #[arg(long, conflicts_with = "n_range")]
        n: Option<usize>,
        /// Inclusive index range, e.g. `0..3`.
        #[arg(long, value_parser = parse::index_range)]
        n_range: Option<std::ops::RangeInclusive<usize>>,
    },
    /// Zeros of both launched eigenfunctions.
    Zeros {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        n: usize,
    },
    /// Analytic zero velocities d x / d mu.
    Velocities {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        n: usize,
    },
    /// Eigenvalues function on a grid of chart coordinates.
    Evf {
        #[arg(long, default_value = "zero")]
        q: String,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_parser = parse::angle, value_delimiter = ',', allow_hyphen_values = true)]
        gamma: Vec<f64>,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_parser = parse::angle, value_delimiter = ',', allow_hyphen_values = true)]
        delta: Vec<f64>,
    },
    /// Track zeros while one boundary angle varies; writes CSV files into --out.
    Sweep {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = |s: &str| s.parse::<Vary>().map_err(|e| e.to_string()))]
        vary: Vary,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
    },
    /// Run an invariant battery over the test matrix.
    Verify {
        #[arg(long, value_parser = |s: &str| s.parse::<Battery>().map_err(|e| e.to_string()))]
        battery: Battery,
        /// Restrict to one potential (default: cos 2x).
        #[arg(long, conflicts_with = "all_potentials")]
        q: Option<String>,
        /// All five matrix potentials.
        #[arg(long)]
        all_potentials: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Solver(slzero::Error),
    Verification(String),
}

impl From<slzero::Error> for Failure {
    fn from(e: slzero::Error) -> Self {
        if e.is_user_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Solver(e)
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

type Outcome = Result<(), Failure>;

const SCHEMAS: &[(&str, &[&str])] = &[
    ("eigen", EIGEN_COLUMNS),
    ("zeros", ZERO_COLUMNS),
    ("velocities", VELOCITY_COLUMNS),
    ("evf", EVF_COLUMNS),
    ("sweep path.csv", PATH_COLUMNS),
    ("sweep events.csv", EVENT_COLUMNS),
    ("sweep zero_<id>.csv", TRAJECTORY_COLUMNS),
    ("verify", VERIFY_COLUMNS),
];

const EIGEN_COLUMNS: &[&str] = &["n", "mu", "interior_zero_count", "c_n"];
const ZERO_COLUMNS: &[&str] = &["side", "k", "x", "slope"];
const VELOCITY_COLUMNS: &[&str] = &["side", "k", "x", "velocity"];
const EVF_COLUMNS: &[&str] = &["gamma", "delta", "mu"];
const PATH_COLUMNS: &[&str] = &["angle", "mu"];
const EVENT_COLUMNS: &[&str] = &["event", "angle_lo", "angle_hi"];
const TRAJECTORY_COLUMNS: &[&str] = &["angle", "x"];
const VERIFY_COLUMNS: &[&str] = &["case", "passed", "residual", "tolerance"];

fn print_schema() {
    for (name, cols) in SCHEMAS {
        println!("{name}: {}", cols.join(","));
    }
}

fn emit(table: &Table, format: Format, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            table.write(format, &mut w)?;
            w.flush()
        }
        None => table.write(format, &mut io::stdout().lock()),
    }
}

fn solver(q: &str, cells: usize) -> Result<Solver, Failure> {
    let q = parse::potential(q)?;
    Ok(Solver::new(q, cells)?)
}

fn boundary(p: &Problem) -> Result<BoundaryParams, Failure> {
    Ok(BoundaryParams::new(p.alpha, p.beta)?)
}

fn cmd_eigen(cli: &Cli, problem: &Problem, range: std::ops::RangeInclusive<usize>) -> Outcome {
    let solver = solver(&problem.q, cli.cells)?;
    let bc = boundary(problem)?;
    let ns: Vec<usize> = range.collect();
    let pairs = slzero::exec::map(Execution::available(), &ns, |&n| solver.find_eigenvalue(n, bc));
    let mut t = Table::new(EIGEN_COLUMNS);
    for pair in pairs {
        let pair = pair?;
        t.push(vec![pair.n.into(), pair.mu.into(), pair.interior_zero_count().into(), pair.c_n.into()]);
    }
    Ok(emit(&t, cli.format, cli.out.as_deref())?)
}

fn cmd_zeros(cli: &Cli, problem: &Problem, n: usize, velocities: bool) -> Outcome {
    let solver = solver(&problem.q, cli.cells)?;
    let pair = solver.find_eigenvalue(n, boundary(problem)?)?;
    let (zeros, cols) = if velocities {
        let mut z = oscillation::phi_velocities(&pair)?;
        z.extend(oscillation::psi_velocities(&pair)?);
        (z, VELOCITY_COLUMNS)
    } else {
        let mut z = pair.phi_zeros()?;
        z.extend(pair.psi_zeros()?);
        (z, ZERO_COLUMNS)
    };
    let mut t = Table::new(cols);
    for z in zeros {
        let side = match z.side {
            slzero::FormulaSide::Phi => "phi",
            slzero::FormulaSide::Psi => "psi",
        };
        let last = if velocities { z.velocity.unwrap_or(f64::NAN) } else { z.slope };
        t.push(vec![side.into(), z.k.into(), z.x.into(), last.into()]);
    }
    Ok(emit(&t, cli.format, cli.out.as_deref())?)
}

fn cmd_evf(cli: &Cli, q: &str, gammas: &[f64], deltas: &[f64]) -> Outcome {
    if gammas.is_empty() || deltas.is_empty() {
        return Err(Failure::Config("evf needs --gamma and --delta lists".into()));
    }
    for &g in gammas {
        EvfCoordinates::new(g, deltas[0])?;
    }
    let solver = solver(q, cli.cells)?;
    let m = solver.evf_grid(gammas, deltas, Execution::available())?;
    let mut t = Table::new(EVF_COLUMNS);
    for (i, &g) in gammas.iter().enumerate() {
        for (j, &d) in deltas.iter().enumerate() {
            t.push(vec![g.into(), d.into(), m[i][j].into()]);
        }
    }
    Ok(emit(&t, cli.format, cli.out.as_deref())?)
}

fn cmd_sweep(cli: &Cli, problem: &Problem, n: usize, vary: Vary, grid: usize) -> Outcome {
    let dir = cli.out.as_deref().ok_or_else(|| Failure::Config("sweep needs --out <directory>".into()))?;
    let q: Potential = parse::potential(&problem.q)?;
    let fixed = match vary {
        Vary::Beta => problem.alpha,
        Vary::Alpha => problem.beta,
    };
    let plan = SweepPlan::uniform(q, n, vary, fixed, grid)?.with_cells(cli.cells);
    let res = sweep::run_sweep(&plan)?;
    std::fs::create_dir_all(dir)?;
    let ext = cli.format.extension();

    let mut path = Table::new(PATH_COLUMNS);
    for (a, mu) in res.angles.iter().zip(&res.mu) {
        path.push(vec![(*a).into(), (*mu).into()]);
    }
    emit(&path, cli.format, Some(&dir.join(format!("path.{ext}"))))?;

    let mut events = Table::new(EVENT_COLUMNS);
    for ev in &res.events {
        let br = sweep::detect_transition(&plan, ev)?;
        events.push(vec![ev.kind.name().into(), br.angle_lo.into(), br.angle_hi.into()]);
    }
    emit(&events, cli.format, Some(&dir.join(format!("events.{ext}"))))?;

    for tr in &res.trajectories {
        let mut t = Table::new(TRAJECTORY_COLUMNS);
        for &(a, x) in &tr.points {
            t.push(vec![a.into(), x.into()]);
        }
        emit(&t, cli.format, Some(&dir.join(format!("zero_{}.{ext}", tr.identity))))?;
    }
    if !res.mu_monotone {
        eprintln!("warning: eigenvalue path is not strictly monotone");
    }
    eprintln!(
        "{} angles, {} zero trajectories, {} events written to {}",
        res.angles.len(),
        res.trajectories.len(),
        res.events.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_verify(cli: &Cli, battery: Battery, q: Option<&str>, all: bool) -> Outcome {
    let potentials = if all {
        TestMatrix::standard_potentials()
    } else {
        vec![parse::potential(q.unwrap_or("cosine:1,2"))?]
    };
    let matrix = TestMatrix::for_potentials(potentials, cli.cells);
    let report = verify::run(battery, &matrix, Execution::available())?;
    let mut t = Table::new(VERIFY_COLUMNS);
    for c in &report.cases {
        t.push(vec![c.case.clone().into(), c.passed.into(), c.residual.into(), c.tolerance.into()]);
    }
    emit(&t, cli.format, cli.out.as_deref())?;
    let summary = format!(
        "{}: {}/{} cases passed, max residual {}",
        battery.name(),
        report.cases.len() - report.failures(),
        report.cases.len(),
        table::float(report.max_residual())
    );
    eprintln!("{summary}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verification(summary))
    }
}

fn run(cli: &Cli) -> Outcome {
    if cli.schema {
        print_schema();
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(Failure::Config("no command given (see --help)".into()));
    };
    match command {
        Command::Eigen { problem, n, n_range } => {
            let range = match (n, n_range) {
                (Some(n), _) => *n..=*n,
                (None, Some(r)) => r.clone(),
                (None, None) => return Err(Failure::Config("eigen needs --n or --n-range".into())),
            };
            cmd_eigen(cli, problem, range)
        }
        Command::Zeros { problem, n } => cmd_zeros(cli, problem, *n, false),
        Command::Velocities { problem, n } => cmd_zeros(cli, problem, *n, true),
        Command::Evf { q, gamma, delta } => cmd_evf(cli, q, gamma, delta),
        Command::Sweep { problem, n, vary, grid } => cmd_sweep(cli, problem, *n, *vary, *grid),
        Command::Verify { battery, q, all_potentials } => cmd_verify(cli, *battery, q.as_deref(), *all_potentials),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e}");
            ExitCode::from(3)
        }
    }
}
