//! Command-line front end: scene synthesis, corridor generation, degree
//! sweeps and corridor checking.
//!
//! Exit codes: 0 success, 1 bad input, 2 solver failure, 3 corridor
//! violation found by `check`. The machine-readable summary is one JSON
//! line on stdout; everything else goes to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;

use corrgen::io::{self, CorridorDoc};
use corrgen::opt::backend::ClarabelBackend;
use corrgen::projection::{
    apply_wrapper, apply_wrapper_planar, project_cloud, split_planar, WrapperConfig,
};
use corrgen::scene::{default_scene_waypoints, generate_scene, Extent, SceneKind, SceneSpec};
use corrgen::{
    degree_sweep, solve_2d, solve_3d, EigenBoundConfig, Error, Formulation, ParametricPath,
    ProblemSpec, Result,
};

#[derive(Parser)]
#[command(
    name = "corrgen",
    about = "Parametric corridor generation around a reference path"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corridor from a point cloud and a reference path.
    Generate(GenerateArgs),
    /// Solve the same scene across a range of degrees; write a CSV table.
    Sweep(SweepArgs),
    /// Verify a stored corridor against a cloud: exit 3 on any violation.
    Check(CheckArgs),
    /// Synthesize a test scene cloud (and optionally its default path).
    Synth(SynthArgs),
}

#[derive(Args)]
struct SolverOpts {
    /// Polynomial degree of the corridor coefficients.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Discretization grid size.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// "dd-lp" (LP relaxation) or "exact-cone".
    #[arg(long, default_value = "dd-lp")]
    formulation: String,
    /// Definiteness/strictness margin.
    #[arg(long, default_value_t = 1e-6)]
    pd_epsilon: f64,
    /// Point-feasibility tolerance of the post-solve verification.
    #[arg(long, default_value_t = 1e-6)]
    feas_tol: f64,
    /// Eigenvalue bounds "lo:hi" on the ellipse matrix (alternative to
    /// the wrapper for boundedness).
    #[arg(long)]
    eigen_bounds: Option<String>,
    /// Pin the ellipse offset to zero (centered ablation).
    #[arg(long)]
    centered: bool,
}

#[derive(Args)]
struct WrapperOpts {
    /// Wrapper shell radius; drops farther points and adds a synthetic
    /// bounding shell. Required for the spatial problem unless eigenvalue
    /// bounds are given.
    #[arg(long)]
    wrapper_radius: Option<f64>,
    #[arg(long, default_value_t = 100)]
    wrapper_stations: usize,
    #[arg(long, default_value_t = 16)]
    wrapper_ring_points: usize,
    /// Keep points whose closest path point is a domain boundary.
    #[arg(long)]
    include_end_caps: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Point cloud (CSV `x,y,z` / `x,y`, or the binary format).
    #[arg(long)]
    cloud: PathBuf,
    /// Reference path JSON (`waypoints` or `stations`).
    #[arg(long)]
    path: PathBuf,
    /// 3 for elliptical cross-sections, 2 for planar bounds.
    #[arg(long, default_value_t = 3)]
    dim: u8,
    /// Output corridor JSON.
    #[arg(long, short)]
    output: PathBuf,
    /// Optional boundary mesh output (OBJ, spatial corridors only).
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    mesh_stations: usize,
    #[arg(long, default_value_t = 32)]
    mesh_ring: usize,
    #[command(flatten)]
    solver: SolverOpts,
    #[command(flatten)]
    wrapper: WrapperOpts,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    cloud: PathBuf,
    #[arg(long)]
    path: PathBuf,
    /// Degrees: comma list ("3,6,9") or inclusive range ("3:15").
    #[arg(long)]
    degrees: String,
    /// Comma list of formulations to compare.
    #[arg(long, default_value = "dd-lp,exact-cone")]
    formulations: String,
    /// Output CSV.
    #[arg(long, short)]
    output: PathBuf,
    /// Worker threads; rows stay in input order regardless.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    solver: SolverOpts,
    #[command(flatten)]
    wrapper: WrapperOpts,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    corridor: PathBuf,
    #[arg(long)]
    cloud: PathBuf,
    #[arg(long)]
    path: PathBuf,
    /// Violation tolerance on the corridor inequality.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long)]
    include_end_caps: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// columns | rings | channel | cylinder
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 40)]
    density: usize,
    /// Extent "x0,y0,z0,x1,y1,z1".
    #[arg(long, default_value = "0,-2,-2,10,2,2")]
    extent: String,
    /// Obstacle size "lo" or "lo:hi".
    #[arg(long, default_value = "0.2:0.6")]
    size: String,
    /// Output cloud file; `.pcd` extension selects the binary format.
    #[arg(long, short)]
    output: PathBuf,
    /// Also write the default straight path for the scene.
    #[arg(long)]
    path_output: Option<PathBuf>,
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let err = || Error::InvalidInput(format!("{what} must be 'lo:hi', got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(err)?;
    Ok((
        a.trim().parse().map_err(|_| err())?,
        b.trim().parse().map_err(|_| err())?,
    ))
}

fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    let err = |t: &str| Error::InvalidInput(format!("bad degree '{t}' in '{s}'"));
    if let Some((a, b)) = s.split_once(':') {
        let lo: usize = a.trim().parse().map_err(|_| err(a))?;
        let hi: usize = b.trim().parse().map_err(|_| err(b))?;
        if hi < lo {
            return Err(Error::InvalidInput(format!("empty degree range '{s}'")));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| err(t)))
        .collect()
}

fn solver_spec(opts: &SolverOpts, dim: u8) -> Result<ProblemSpec> {
    let eigen_bounds = match &opts.eigen_bounds {
        Some(s) => {
            let (lo, hi) = parse_pair(s, "--eigen-bounds")?;
            Some(EigenBoundConfig {
                lambda_min: lo,
                lambda_max: hi,
            })
        }
        None => None,
    };
    Ok(ProblemSpec {
        dimension: dim,
        degree: opts.degree,
        samples: opts.samples,
        formulation: Formulation::from_str(&opts.formulation)?,
        pd_epsilon: opts.pd_epsilon,
        eigen_bounds,
        feas_tol: opts.feas_tol,
        offset_enabled: !opts.centered,
    })
}

fn backend_from_env() -> Result<ClarabelBackend> {
    let mut backend = ClarabelBackend::default();
    if let Ok(v) = std::env::var("CORRGEN_SOLVER_TOL") {
        let tol: f64 = v.parse().map_err(|_| {
            Error::InvalidInput(format!("CORRGEN_SOLVER_TOL = '{v}' is not a number"))
        })?;
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::InvalidInput(
                "CORRGEN_SOLVER_TOL must be positive".into(),
            ));
        }
        backend.tolerance = Some(tol);
    }
    Ok(backend)
}

/// Project, optionally drop end caps, optionally wrap.
fn prepare_cloud(
    cloud_file: &Path,
    path: &ParametricPath,
    wrapper: &WrapperOpts,
    dim: u8,
    needs_bound: bool,
) -> Result<corrgen::ProjectedCloud> {
    let cloud = io::load_cloud(cloud_file)?;
    let mut projected = project_cloud(path, &cloud);
    if !wrapper.include_end_caps {
        projected = projected.drop_end_caps();
    }
    match wrapper.wrapper_radius {
        Some(radius) if dim == 3 => {
            let cfg = WrapperConfig {
                radius,
                ring_points: wrapper.wrapper_ring_points,
                stations: wrapper.wrapper_stations,
            };
            apply_wrapper(&projected, &cfg, path)
        }
        Some(radius) => apply_wrapper_planar(&projected, radius, wrapper.wrapper_stations, path),
        None if needs_bound => Err(Error::InvalidInput(
            "spatial generation needs --wrapper-radius or --eigen-bounds".into(),
        )),
        None => Ok(projected),
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let path = io::load_path(&args.path)?;
    let spec = solver_spec(&args.solver, args.dim)?;
    let backend = backend_from_env()?;
    let needs_bound = args.dim == 3 && spec.eigen_bounds.is_none();
    let projected = prepare_cloud(&args.cloud, &path, &args.wrapper, args.dim, needs_bound)?;

    let report = match args.dim {
        3 => {
            let (corridor, report) = solve_3d(&spec, &projected, path.xi_range(), &backend)?;
            if let Some(mesh_file) = &args.mesh {
                let mesh =
                    corridor.sample_boundary_mesh(&path, args.mesh_stations, args.mesh_ring)?;
                io::save_mesh_obj(mesh_file, &mesh)?;
            }
            io::save_corridor(&args.output, &CorridorDoc::Spatial(corridor))?;
            report
        }
        2 => {
            if args.mesh.is_some() {
                return Err(Error::InvalidInput(
                    "--mesh applies to spatial corridors only".into(),
                ));
            }
            let (pos, neg) = split_planar(&projected);
            let (corridor, report) = solve_2d(&spec, &pos, &neg, path.xi_range(), &backend)?;
            io::save_corridor(&args.output, &CorridorDoc::Planar(corridor))?;
            report
        }
        d => return Err(Error::InvalidInput(format!("unsupported --dim {d}"))),
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let path = io::load_path(&args.path)?;
    let template = solver_spec(&args.solver, 3)?;
    let backend = backend_from_env()?;
    let degrees = parse_degrees(&args.degrees)?;
    let formulations: Vec<Formulation> = args
        .formulations
        .split(',')
        .map(|s| Formulation::from_str(s.trim()))
        .collect::<Result<_>>()?;
    if degrees.is_empty() || formulations.is_empty() {
        return Err(Error::InvalidInput("nothing to sweep".into()));
    }
    let needs_bound = template.eigen_bounds.is_none();
    let projected = prepare_cloud(&args.cloud, &path, &args.wrapper, 3, needs_bound)?;

    let rows = if args.jobs <= 1 {
        degree_sweep(
            &template,
            &projected,
            path.xi_range(),
            &degrees,
            &formulations,
            &backend,
        )
    } else {
        // Work-stealing over the task grid; rows are written back by
        // index so the output order matches the single-threaded one.
        let tasks: Vec<(usize, Formulation)> = degrees
            .iter()
            .flat_map(|&d| formulations.iter().map(move |&f| (d, f)))
            .collect();
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<corrgen::SweepRow>>> =
            tasks.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..args.jobs.min(tasks.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks.len() {
                        break;
                    }
                    let (degree, formulation) = tasks[i];
                    let row = degree_sweep(
                        &template,
                        &projected,
                        path.xi_range(),
                        &[degree],
                        &[formulation],
                        &backend,
                    )
                    .pop()
                    .expect("one task yields one row");
                    *slots[i].lock().unwrap() = Some(row);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("all tasks completed"))
            .collect()
    };

    io::save_sweep_csv(&args.output, &rows)?;
    let ok = rows.iter().filter(|r| r.error.is_none()).count();
    println!(
        "{}",
        serde_json::json!({ "rows": rows.len(), "solved": ok, "output": args.output })
    );
    if ok == 0 {
        return Err(Error::SolverFailure("every sweep task failed".into()));
    }
    Ok(())
}

/// Ok(true) when the corridor is clear of the cloud, Ok(false) otherwise.
fn cmd_check(args: &CheckArgs) -> Result<bool> {
    let doc = io::load_corridor(&args.corridor)?;
    let path = io::load_path(&args.path)?;
    let cloud = io::load_cloud(&args.cloud)?;
    let mut projected = project_cloud(&path, &cloud);
    if !args.include_end_caps {
        projected = projected.drop_end_caps();
    }

    let mut violations = 0usize;
    let mut worst: f64 = 0.0;
    for i in 0..projected.len() {
        let xi = projected.par[i];
        let slack = match &doc {
            CorridorDoc::Spatial(c) => c.eval_inequality(xi, &projected.ortho[i])?,
            CorridorDoc::Planar(c) => {
                let (lo, hi) = c.bounds_at(xi)?;
                let x = projected.ortho[i].x;
                // Positive outside: distance to the nearer violated bound.
                if x >= 0.0 {
                    x - hi
                } else {
                    lo - x
                }
            }
        };
        if slack < -args.tolerance {
            violations += 1;
            worst = worst.min(slack);
        }
    }
    println!(
        "{}",
        serde_json::json!({
            "points": projected.len(),
            "violations": violations,
            "worst_slack": worst,
            "tolerance": args.tolerance,
        })
    );
    Ok(violations == 0)
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let kind = SceneKind::from_str(&args.kind)?;
    let nums: Vec<f64> = args
        .extent
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad extent component '{t}'")))
        })
        .collect::<Result<_>>()?;
    if nums.len() != 6 {
        return Err(Error::InvalidInput(
            "--extent needs 6 comma-separated numbers".into(),
        ));
    }
    let extent = Extent {
        min: [nums[0], nums[1], nums[2]],
        max: [nums[3], nums[4], nums[5]],
    };
    let size_range = if args.size.contains(':') {
        parse_pair(&args.size, "--size")?
    } else {
        let v: f64 = args
            .size
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad --size '{}'", args.size)))?;
        (v, v)
    };
    let spec = SceneSpec {
        kind,
        seed: args.seed,
        count: args.count,
        density: args.density,
        extent,
        size_range,
    };
    let cloud = generate_scene(&spec)?;
    let binary = args.output.extension().is_some_and(|e| e == "pcd");
    if binary {
        io::save_cloud_binary(&args.output, &cloud)?;
    } else {
        io::save_cloud_csv(&args.output, &cloud, kind == SceneKind::Channel)?;
    }
    if let Some(path_file) = &args.path_output {
        let waypoints: Vec<Vector3<f64>> = default_scene_waypoints(&extent);
        io::save_waypoints(path_file, &waypoints)?;
    }
    println!(
        "{}",
        serde_json::json!({ "points": cloud.len(), "output": args.output })
    );
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::Domain { .. }
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::Json(_) => 1,
        Error::Degenerate { .. }
        | Error::Unbounded(_)
        | Error::Infeasible(_)
        | Error::SolverFailure(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Check(args) => cmd_check(args).map(|clear| {
            if !clear {
                std::process::exit(3);
            }
        }),
        Command::Synth(args) => cmd_synth(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
