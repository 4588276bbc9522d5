//! Batch front end: single evolutions, convergence hierarchies and the
//! cost-evaluation-count study, persisted as CSV for plotting.

mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_equation, parse_method, Equation, Method, Settings};
use vqivp::{
    build_domain, convergence_factors, evolve_classical, evolve_vqa, exact_advection, exact_wave,
    self_convergence_factors, Domain, EngineMode, Field, Problem, SimplexOptions, Trajectory,
};

#[derive(Parser)]
#[command(
    name = "vqivp",
    version,
    about = "Variational and classical time stepping of periodic 1+1D initial value problems",
    after_help = "Exit codes: 0 success, 2 configuration error, 3 numerical abort.\n\
                  The environment variable VQIVP_RNG_SEED overrides any configured rng_seed."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one evolution; writes snapshots.csv and stats.csv
    Run(CommonArgs),
    /// Run a hierarchy of resolutions; writes convergence.csv
    Converge(ConvergeArgs),
    /// Sweep mode counts and Courant factors; writes evalcount.csv
    Evalcount(EvalcountArgs),
    /// Reshape a snapshots.csv into gnuplot-ready space-time blocks
    Heatmap(HeatmapArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Plain-text config file of `key = value` lines; `#` starts a comment
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// advection, wave or burgers
    #[arg(long)]
    equation: Option<String>,
    /// classical, svf or sef
    #[arg(long)]
    method: Option<String>,
    /// Number of qubits n; the grid has 2^n points
    #[arg(short = 'n', long)]
    n_qubits: Option<u32>,
    /// Fourier mode cutoff M (default: per-equation policy)
    #[arg(long)]
    modes: Option<usize>,
    /// Courant factor, dt = cfl * dx
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Advection speed
    #[arg(long)]
    v: Option<f64>,
    /// Burgers viscosity
    #[arg(long)]
    nu: Option<f64>,
    /// Center of the initial pulse
    #[arg(long)]
    x0: Option<f64>,
    /// Width of the initial pulse
    #[arg(long)]
    sigma: Option<f64>,
    /// Measurements per sampled product (sef only)
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Output directory for the CSV artifacts
    #[arg(short = 'o', long, value_name = "DIR")]
    outdir: Option<PathBuf>,
    /// Keep every k-th snapshot (the final one is always kept)
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Consecutive qubit counts, e.g. 3,4,5,6
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
}

#[derive(Args)]
struct EvalcountArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Mode-register exponents m (cutoff M = 2^m - 1), e.g. 2,3,4,5
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<u32>>,
    /// Courant factors to sweep, e.g. 0.25,0.5,1.0
    #[arg(long, value_delimiter = ',')]
    cfl_list: Option<Vec<f64>>,
}

#[derive(Args)]
struct HeatmapArgs {
    /// A snapshots.csv produced by `run`
    #[arg(long, value_name = "FILE")]
    snapshots: PathBuf,
    /// Field column to extract: u, P, Q or phi
    #[arg(long, default_value = "u")]
    field: String,
    /// Output file of `t x value` blocks
    #[arg(short = 'o', long, default_value = "heatmap.dat")]
    output: PathBuf,
}

enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Config(msg) => {
                eprintln!("configuration error: {msg}");
                ExitCode::from(2)
            }
            CliError::Numerical(msg) => {
                eprintln!("numerical abort: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

/// Configuration-flavored library failures exit 2, runtime failures exit 3.
fn classify(e: vqivp::Error) -> CliError {
    use vqivp::Error::*;
    match e {
        Config(_)
        | Capacity(_)
        | ModeOverflow { .. }
        | Shape(_)
        | MissingField(_)
        | UnsupportedNonlinearity
        | Parameter(_)
        | Alignment(_) => CliError::Config(e.to_string()),
        Solver(_) | Instability { .. } | DegenerateState | NonFiniteCost { .. } => {
            CliError::Numerical(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Converge(args) => cmd_converge(args),
        Cmd::Evalcount(args) => cmd_evalcount(args),
        Cmd::Heatmap(args) => cmd_heatmap(args),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}

/// Defaults, then config file, then flags, then the seed environment
/// override.
fn resolve(args: &CommonArgs) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &args.config {
        s.load_file(path).map_err(CliError::Config)?;
    }
    if let Some(v) = &args.equation {
        s.equation = parse_equation(v).map_err(CliError::Config)?;
    }
    if let Some(v) = &args.method {
        s.method = parse_method(v).map_err(CliError::Config)?;
    }
    if let Some(v) = args.n_qubits {
        s.n_qubits = v;
    }
    if let Some(v) = args.modes {
        s.modes = Some(v);
    }
    if let Some(v) = args.cfl {
        s.cfl = v;
    }
    if let Some(v) = args.t_final {
        s.t_final = v;
    }
    if let Some(v) = args.v {
        s.v = v;
    }
    if let Some(v) = args.nu {
        s.nu = v;
    }
    if let Some(v) = args.x0 {
        s.x0 = v;
    }
    if let Some(v) = args.sigma {
        s.sigma = v;
    }
    if let Some(v) = args.shots {
        s.shots = v;
    }
    if let Some(v) = args.rng_seed {
        s.rng_seed = v;
    }
    if let Some(v) = &args.outdir {
        s.outdir = v.clone();
    }
    if let Some(v) = args.stride {
        s.stride = v;
    }
    s.apply_env().map_err(CliError::Config)?;
    s.validate().map_err(CliError::Config)?;
    Ok(s)
}

fn evolve_one(
    settings: &Settings,
    problem: &Problem,
    domain: &Domain,
    seed: u64,
) -> Result<Trajectory, CliError> {
    let modes = settings.modes_for(problem, domain.n_qubits);
    match settings.method {
        Method::Classical => evolve_classical(problem, domain).map_err(classify),
        Method::Svf => evolve_vqa(
            problem,
            domain,
            modes,
            EngineMode::Svf,
            &SimplexOptions::svf_default(2 * modes + 1),
        )
        .map_err(classify),
        Method::Sef => evolve_vqa(
            problem,
            domain,
            modes,
            EngineMode::Sef {
                shots: settings.shots,
                seed,
            },
            &SimplexOptions::sef_default(2 * modes + 1),
        )
        .map_err(classify),
    }
}

fn cmd_run(args: CommonArgs) -> Result<(), CliError> {
    let settings = resolve(&args)?;
    let problem = settings.problem().map_err(CliError::Config)?;
    let domain = build_domain(settings.n_qubits, 0.0, 1.0, settings.cfl, settings.t_final)
        .map_err(classify)?;
    let traj = evolve_one(&settings, &problem, &domain, settings.rng_seed)?;

    let snapshots = settings.outdir.join("snapshots.csv");
    let stats = settings.outdir.join("stats.csv");
    output::write_snapshots(&snapshots, &traj, settings.stride).map_err(CliError::Config)?;
    output::write_stats(&stats, &traj).map_err(CliError::Config)?;
    println!(
        "wrote {} ({} time levels x {} points) and {}",
        snapshots.display(),
        traj.snapshots.len(),
        domain.n,
        stats.display()
    );
    Ok(())
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), CliError> {
    let mut settings = resolve(&args.common)?;
    if let Some(list) = args.n_list {
        settings.n_list = list;
    }
    let n_list = settings.n_list.clone();
    let self_convergence = settings.equation == Equation::Burgers;
    let needed = if self_convergence { 3 } else { 2 };
    if n_list.len() < needed {
        return Err(CliError::Config(format!(
            "n_list needs at least {needed} consecutive entries, got {n_list:?}"
        )));
    }
    if !n_list.windows(2).all(|w| w[1] == w[0] + 1) {
        return Err(CliError::Config(format!(
            "n_list must be consecutive ascending, got {n_list:?}"
        )));
    }

    let problem = settings.problem().map_err(CliError::Config)?;
    let mut trajs: BTreeMap<u32, Trajectory> = BTreeMap::new();
    for &n in &n_list {
        let domain = build_domain(n, 0.0, 1.0, settings.cfl, settings.t_final).map_err(classify)?;
        let modes = settings.modes_for(&problem, n);
        if 2 * modes + 1 > domain.n {
            return Err(CliError::Config(format!(
                "mode overflow at n = {n}: 2M+1 = {} exceeds N = {}",
                2 * modes + 1,
                domain.n
            )));
        }
        // independent stream per hierarchy member
        let seed = settings.rng_seed.wrapping_add(n as u64);
        trajs.insert(n, evolve_one(&settings, &problem, &domain, seed)?);
    }

    let path = settings.outdir.join("convergence.csv");
    if self_convergence {
        let report = self_convergence_factors(&trajs, Field::U).map_err(classify)?;
        output::write_self_convergence(&path, &report).map_err(CliError::Config)?;
    } else {
        let (field, exact): (Field, Box<dyn Fn(f64, f64) -> f64>) = match settings.equation {
            Equation::Advection => (
                Field::U,
                Box::new(move |x, t| exact_advection(&problem, x, t)),
            ),
            Equation::Wave => (Field::Phi, Box::new(move |x, t| exact_wave(&problem, x, t))),
            Equation::Burgers => unreachable!("handled by the self-convergence branch"),
        };
        let report = convergence_factors(&trajs, field, exact).map_err(classify)?;
        output::write_convergence(&path, &report).map_err(CliError::Config)?;
    }
    println!("wrote {} for n = {:?}", path.display(), n_list);
    Ok(())
}

fn cmd_evalcount(args: EvalcountArgs) -> Result<(), CliError> {
    let mut settings = resolve(&args.common)?;
    if let Some(list) = args.m_list {
        settings.m_list = list;
    }
    if let Some(list) = args.cfl_list {
        settings.cfl_list = list;
    }
    if settings.method == Method::Classical {
        return Err(CliError::Config(
            "evalcount needs a variational method (svf or sef); classical steps cost no evaluations"
                .into(),
        ));
    }
    if settings.m_list.is_empty() || settings.cfl_list.is_empty() {
        return Err(CliError::Config(
            "m_list and cfl_list must be non-empty".into(),
        ));
    }
    let problem = settings.problem().map_err(CliError::Config)?;

    let mut rows = Vec::new();
    for &m in &settings.m_list {
        let modes = (1usize << m) - 1;
        for &cfl in &settings.cfl_list {
            let domain = build_domain(settings.n_qubits, 0.0, 1.0, cfl, settings.t_final)
                .map_err(classify)?;
            if 2 * modes + 1 > domain.n {
                return Err(CliError::Config(format!(
                    "mode overflow at m = {m}: 2M+1 = {} exceeds N = {}",
                    2 * modes + 1,
                    domain.n
                )));
            }
            let mut member = settings.clone();
            member.modes = Some(modes);
            let traj = evolve_one(&member, &problem, &domain, settings.rng_seed)?;
            rows.push((m, modes, cfl, traj.avg_evals_per_step()));
        }
    }

    let path = settings.outdir.join("evalcount.csv");
    output::write_evalcount(&path, &rows).map_err(CliError::Config)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<(), CliError> {
    let field = match args.field.as_str() {
        "u" => Field::U,
        "P" => Field::P,
        "Q" => Field::Q,
        "phi" => Field::Phi,
        other => {
            return Err(CliError::Config(format!(
                "unknown field {other:?} (expected u, P, Q or phi)"
            )))
        }
    };
    output::write_heatmap(&args.snapshots, field, &args.output).map_err(CliError::Config)?;
    println!("wrote {}", args.output.display());
    Ok(())
}
