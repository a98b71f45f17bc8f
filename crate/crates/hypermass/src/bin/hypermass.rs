//! Batch driver: run the full construction from a scenario file, or the
//! individual stages against each other's CSV dumps.

use clap::{Args, Parser, Subcommand};
use hypermass::error::Error;
use hypermass::exterior::{build_distance_foliation, solve_exterior_v};
use hypermass::geometry::RadialSurface;
use hypermass::icf::{run_icf, select_t, CollarFoliation, FlowControls};
use hypermass::lapse::{
    compute_barriers, solve_lapse, verify_hu_evolution, LapseField, LapseOptions,
};
use hypermass::mass::{final_mass, mass_series, test_zeta_set, MassTolerances};
use hypermass::minkowski::AmbientSpace;
use hypermass::pipeline::{boundary_u0, run_pipeline_to_dir};
use hypermass::scenario::{fnv1a64, parse_surface_spec, BoundarySection, Scenario, SurfaceSection};
use hypermass::transport::{solve_exterior_w, solve_interior_w};
use hypermass::{io, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hypermass",
    version,
    about = "Quasi-local mass in hyperbolic background: expanding collars, scalar-curvature extensions, and mass monotonicity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the expanding flow and dump the collar foliation.
    Flow(FlowArgs),
    /// Solve the interior lapse equation on a collar dump.
    Lapse(LapseArgs),
    /// Build the distance foliation and solve the exterior extension.
    Exterior(ExteriorArgs),
    /// Transport the Lorentz-vector weight down the exterior and the collar.
    Transport(TransportArgs),
    /// Assemble mass series and the final report from stage dumps.
    Mass(MassArgs),
    /// Run every stage from a scenario file.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct FlowArgs {
    /// Initial surface: sphere:r0=<r> | perturbed_sphere:r0=<r>,amp=<a>,mode=<m> | profile:@<file>
    #[arg(long)]
    surface: String,
    /// Ambient dimension.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Curvature scale.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Angular cells.
    #[arg(long, default_value_t = 128)]
    cells: usize,
    #[arg(long = "t-end")]
    t_end: f64,
    #[arg(long)]
    dt: f64,
    /// Convexity margin checked on the final slice.
    #[arg(long = "delta-convex", default_value_t = 0.5)]
    delta_convex: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LapseArgs {
    #[arg(long)]
    collar: PathBuf,
    /// Boundary mean curvature as a fraction of H_0.
    #[arg(long, conflicts_with = "boundary_profile")]
    alpha: Option<f64>,
    /// Or an explicit per-cell profile file for H.
    #[arg(long = "boundary-profile")]
    boundary_profile: Option<PathBuf>,
    #[arg(long = "dt-factor", default_value_t = 1.0)]
    dt_factor: f64,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExteriorArgs {
    #[arg(long)]
    collar: PathBuf,
    #[arg(long)]
    lapse: PathBuf,
    #[arg(long = "rho-max")]
    rho_max: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransportArgs {
    #[arg(long)]
    collar: PathBuf,
    #[arg(long)]
    lapse: PathBuf,
    #[arg(long)]
    exterior: PathBuf,
    #[arg(long = "eps-causal", default_value_t = 1e-8)]
    eps_causal: f64,
    #[arg(long = "out-interior")]
    out_interior: PathBuf,
    #[arg(long = "out-exterior")]
    out_exterior: PathBuf,
}

#[derive(Args)]
struct MassArgs {
    #[arg(long)]
    collar: PathBuf,
    #[arg(long)]
    lapse: PathBuf,
    #[arg(long)]
    exterior: PathBuf,
    #[arg(long = "transport-interior")]
    transport_interior: PathBuf,
    #[arg(long = "transport-exterior")]
    transport_exterior: PathBuf,
    #[arg(long = "zeta-seed", default_value_t = 7)]
    zeta_seed: u64,
    #[arg(long = "zeta-count", default_value_t = 8)]
    zeta_count: usize,
    #[arg(long = "out-series")]
    out_series: PathBuf,
    #[arg(long = "out-report")]
    out_report: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to output.dir from the config or `out`.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Flow(args) => cmd_flow(args),
        Command::Lapse(args) => cmd_lapse(args),
        Command::Exterior(args) => cmd_exterior(args),
        Command::Transport(args) => cmd_transport(args),
        Command::Mass(args) => cmd_mass(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e @ (Error::Config(_) | Error::Parse { .. })) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn stage_hash(parts: &[&str]) -> String {
    format!("{:016x}", fnv1a64(parts.join("|").as_bytes()))
}

fn build_surface(spec: &SurfaceSection, amb: AmbientSpace, cells: usize) -> Result<RadialSurface> {
    match spec.kind.as_str() {
        "sphere" => RadialSurface::sphere(amb, cells, spec.r0.unwrap()),
        "perturbed_sphere" => RadialSurface::perturbed_sphere(
            amb,
            cells,
            spec.r0.unwrap(),
            spec.amp.unwrap(),
            spec.mode.unwrap(),
        ),
        "profile" => {
            let (n, k, radii) =
                hypermass::scenario::read_profile_file(spec.path.as_ref().unwrap())?;
            let amb_file = AmbientSpace::new(n, k)?;
            RadialSurface::profile(amb_file, radii)
        }
        _ => unreachable!("parse_surface_spec validated the kind"),
    }
}

fn cmd_flow(args: FlowArgs) -> Result<ExitCode> {
    let spec = parse_surface_spec(&args.surface)?;
    let amb = AmbientSpace::new(args.n, args.k)?;
    let surface = build_surface(&spec, amb, args.cells)?;
    let collar = run_icf(&surface, args.t_end, args.dt, FlowControls::default())?;
    let t_convex = select_t(&collar, args.delta_convex)?;
    let hash = stage_hash(&[
        "flow",
        &args.surface,
        &args.n.to_string(),
        &format!("{:.16e}", args.k),
        &args.cells.to_string(),
        &format!("{:.16e}", args.t_end),
        &format!("{:.16e}", args.dt),
    ]);
    io::write_collar_csv(&args.out, &collar, &hash)?;
    let last = collar.slices.last().unwrap();
    println!(
        "flow: {} slices, final max radius {:.6}, first delta-convex slice at t = {t_convex}",
        collar.n_slices(),
        last.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    );
    Ok(ExitCode::SUCCESS)
}

fn read_collar(path: &std::path::Path) -> Result<(CollarFoliation, String)> {
    io::read_collar_csv(path)
}

fn cmd_lapse(args: LapseArgs) -> Result<ExitCode> {
    let (collar, collar_hash) = read_collar(&args.collar)?;
    if args.alpha.is_none() && args.boundary_profile.is_none() {
        return Err(Error::Config(
            "provide --alpha or --boundary-profile".into(),
        ));
    }
    let boundary = BoundarySection {
        mode: if args.boundary_profile.is_some() {
            "profile".into()
        } else {
            "scale".into()
        },
        alpha: args.alpha,
        profile_file: args.boundary_profile.clone(),
    };
    let u0 = boundary_u0(&boundary, &collar)?;
    let lapse = solve_lapse(
        &collar,
        &u0,
        LapseOptions {
            dt_factor: args.dt_factor,
            tolerance: args.tolerance,
        },
    )?;
    let (max_resid, residual) = verify_hu_evolution(&collar, &lapse);
    let hash = stage_hash(&[
        "lapse",
        &collar_hash,
        &format!("{:?}", args.alpha),
        &format!("{:?}", args.boundary_profile),
    ]);
    io::write_lapse_csv(&args.out, &collar, &lapse.u, &residual, &hash)?;
    println!(
        "lapse: barriers C = {:.6}, beta = {:.6}, gamma = {:.6}{}; max evolution residual {max_resid:.3e}",
        lapse.barriers.c_upper,
        lapse.barriers.beta,
        lapse.barriers.gamma,
        if lapse.barriers.gamma_clamped { " (clamped)" } else { "" },
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_exterior(args: ExteriorArgs) -> Result<ExitCode> {
    let (collar, _) = read_collar(&args.collar)?;
    let (u, lapse_hash) = io::read_lapse_csv(&args.lapse, &collar)?;
    let k = collar.amb.k;
    let rho_max = args.rho_max.unwrap_or(10.0 / k);
    let stiffness = (collar.amb.n as f64 * k / 3.0).max(1.0);
    let levels = args
        .levels
        .unwrap_or(((80.0 * rho_max * stiffness).ceil() as usize).max(8));
    let fol = build_distance_foliation(&collar, rho_max, levels)?;
    let last = collar.n_slices() - 1;
    let v0: Vec<f64> = (0..collar.n_cells())
        .map(|j| fol.levels[0].h_mean[j] * u[last][j] / collar.h_one[last][j])
        .collect();
    let ext = solve_exterior_v(&fol, &v0)?;
    let hash = stage_hash(&[
        "exterior",
        &lapse_hash,
        &format!("{rho_max:.16e}"),
        &levels.to_string(),
    ]);
    io::write_exterior_csv(&args.out, &ext, &hash)?;
    println!(
        "exterior: {} levels to rho = {rho_max}, v range [{:.6}, {:.6}] at the junction",
        ext.fol.n_levels(),
        ext.v[0].iter().cloned().fold(f64::INFINITY, f64::min),
        ext.v[0].iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_transport(args: TransportArgs) -> Result<ExitCode> {
    let (collar, _) = read_collar(&args.collar)?;
    let (u, _) = io::read_lapse_csv(&args.lapse, &collar)?;
    let (ext, ext_hash) = io::read_exterior_csv(&args.exterior, &collar.amb, collar.n_cells())?;
    let w_ext = solve_exterior_w(&ext, args.eps_causal)?;
    let barriers = compute_barriers(&collar, &u[0])?;
    let lapse = LapseField {
        u: u.clone(),
        u0: u[0].clone(),
        barriers,
        max_solve_residual: 0.0,
    };
    let w_int = solve_interior_w(&collar, &lapse, &w_ext.slices[0].clone(), args.eps_causal)?;
    let hash = stage_hash(&["transport", &ext_hash, &format!("{:.16e}", args.eps_causal)]);
    io::write_transport_csv(
        &args.out_exterior,
        &ext.fol.rho,
        &ext.fol.grid.centers,
        &w_ext,
        args.eps_causal,
        &hash,
    )?;
    io::write_transport_csv(
        &args.out_interior,
        &collar.times,
        &collar.grid.centers,
        &w_int,
        args.eps_causal,
        &hash,
    )?;
    println!(
        "transport: causal margins {:.3e} (exterior), {:.3e} (interior)",
        w_ext.causal_margin, w_int.causal_margin
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_mass(args: MassArgs) -> Result<ExitCode> {
    let (collar, _) = read_collar(&args.collar)?;
    let (u, _) = io::read_lapse_csv(&args.lapse, &collar)?;
    let (ext, _) = io::read_exterior_csv(&args.exterior, &collar.amb, collar.n_cells())?;
    let (w_int, _) = io::read_transport_csv(
        &args.transport_interior,
        &collar.grid,
        collar.amb.n,
        collar.n_slices(),
    )?;
    let (w_ext, w_hash) = io::read_transport_csv(
        &args.transport_exterior,
        &collar.grid,
        collar.amb.n,
        ext.fol.n_levels(),
    )?;
    let barriers = compute_barriers(&collar, &u[0])?;
    let lapse = LapseField {
        u: u.clone(),
        u0: u[0].clone(),
        barriers,
        max_solve_residual: 0.0,
    };
    let zetas = test_zeta_set(collar.amb.n, args.zeta_seed, args.zeta_count);
    let hash = stage_hash(&[
        "mass",
        &w_hash,
        &args.zeta_seed.to_string(),
        &args.zeta_count.to_string(),
    ]);
    let report = final_mass(
        &collar,
        &lapse,
        &w_int,
        &ext,
        &w_ext,
        &zetas,
        MassTolerances::default(),
        &hash,
    )?;
    let series: Vec<_> = zetas
        .iter()
        .map(|z| mass_series(&collar, &lapse, &w_int, &ext, &w_ext, z))
        .collect::<Result<_>>()?;
    io::write_mass_series_csv(&args.out_series, &series, &hash)?;
    io::write_report_json(&args.out_report, &report)?;
    println!(
        "mass: vector = {:?}, class = {}, passed = {}",
        report.mass_vector, report.causal_class, report.passed
    );
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_pipeline(args: PipelineArgs) -> Result<ExitCode> {
    let scenario = Scenario::from_file(&args.config)?;
    let out_dir = args
        .out_dir
        .or_else(|| scenario.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = run_pipeline_to_dir(&scenario, &out_dir)?;
    println!(
        "pipeline: mass vector = {:?}, class = {}, passed = {}",
        out.report.mass_vector, out.report.causal_class, out.report.passed
    );
    for note in &out.report.notes {
        println!("  note: {note}");
    }
    println!("artifacts in {}", out_dir.display());
    Ok(if out.report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
