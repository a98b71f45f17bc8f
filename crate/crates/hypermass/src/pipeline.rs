//! End-to-end orchestration: surface -> expanding flow -> interior lapse ->
//! exterior extension -> weight transport -> mass report, with artifact
//! dumps for every stage.

use crate::error::{Error, Result};
use crate::exterior::{build_distance_foliation, solve_exterior_v, ExteriorFoliation};
use crate::geometry::{compute_geometry, scalar_condition_check};
use crate::icf::{run_icf, select_t, CollarFoliation, FlowControls};
use crate::lapse::{solve_lapse, verify_hu_evolution, LapseField, LapseOptions};
use crate::mass::{final_mass, mass_series, test_zeta_set, MassReport, MassSeries};
use crate::scenario::{read_profile_file, Scenario};
use crate::transport::{solve_exterior_w, solve_interior_w, TransportField};
use crate::{grid::ls_slope, io};
use std::path::Path;

/// Everything one run produces, kept in memory for inspection.
pub struct PipelineOutput {
    pub scenario: Scenario,
    pub config_hash: String,
    pub collar: CollarFoliation,
    pub lapse: LapseField,
    pub exterior: ExteriorFoliation,
    pub w_interior: TransportField,
    pub w_exterior: TransportField,
    pub series: Vec<MassSeries>,
    pub report: MassReport,
    /// First slice time at which the collar is delta-convex.
    pub first_convex_time: f64,
}

/// Boundary data H on the initial surface: from the scale mode H = alpha
/// H_0, or a per-cell profile file.
pub fn boundary_u0(
    boundary: &crate::scenario::BoundarySection,
    collar: &CollarFoliation,
) -> Result<Vec<f64>> {
    match boundary.mode.as_str() {
        // u0 = eta H_eta / (alpha H_eta) = eta / alpha, keeping alpha = 1 an
        // exact fixed point.
        "scale" => {
            let alpha = boundary
                .alpha
                .ok_or_else(|| Error::Config("boundary.alpha must be set in scale mode".into()))?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::Config(format!(
                    "boundary.alpha = {alpha} must be in (0, 1]"
                )));
            }
            Ok(collar.eta[0].iter().map(|e| e / alpha).collect())
        }
        "profile" => {
            let path = boundary.profile_file.as_ref().ok_or_else(|| {
                Error::Config("boundary.profile_file must be set in profile mode".into())
            })?;
            let (n, k, h) = read_profile_file(path)?;
            if n != collar.amb.n || (k - collar.amb.k).abs() > 1e-14 * collar.amb.k {
                return Err(Error::Config(format!(
                    "boundary profile has n = {n}, k = {k}; scenario says n = {}, k = {}",
                    collar.amb.n, collar.amb.k
                )));
            }
            if h.len() != collar.n_cells() {
                return Err(Error::GridMismatch {
                    left: "boundary profile",
                    right: "collar",
                    detail: format!("{} values vs {} cells", h.len(), collar.n_cells()),
                });
            }
            if let Some((j, &v)) = h.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
                return Err(Error::Config(format!(
                    "boundary H must be positive, got {v} at cell {j}"
                )));
            }
            Ok((0..collar.n_cells())
                .map(|j| collar.eta[0][j] * collar.slices[0].h_mean[j] / h[j])
                .collect())
        }
        other => Err(Error::Config(format!(
            "boundary.mode must be scale | profile, got {other}"
        ))),
    }
}

/// Run every stage of the construction for one scenario.
pub fn run_pipeline(scenario: &Scenario) -> Result<PipelineOutput> {
    scenario.validate()?;
    let config_hash = scenario.config_hash();

    // Initial surface must satisfy the admissibility hypotheses.
    let surface = scenario.build_surface()?;
    let geo0 = compute_geometry(&surface)?;
    if let Some(j) = scalar_condition_check(&geo0).iter().position(|ok| !ok) {
        return Err(Error::InvalidSurface(format!(
            "H^2 - |A|^2 = {} <= 0 at cell {j}: outside the admissible cone",
            geo0.h_mean[j] * geo0.h_mean[j] - geo0.a_norm_sq[j]
        )));
    }

    // Expanding collar over [0, t_end]; the final slice is the exterior
    // matching surface and must be strictly delta-convex.
    let collar = run_icf(
        &surface,
        scenario.flow.t_end,
        scenario.flow.dt,
        FlowControls::default(),
    )?;
    let first_convex_time = select_t(&collar, scenario.flow.delta_convex)?;

    // Interior lapse with the prescribed boundary mean curvature.
    let u0 = boundary_u0(&scenario.boundary, &collar)?;
    let lapse = solve_lapse(
        &collar,
        &u0,
        LapseOptions {
            dt_factor: scenario.lapse.dt_factor,
            tolerance: scenario.lapse.tolerance,
        },
    )?;

    // Exterior distance foliation and extension factor, matched to the
    // interior mean curvature across the junction.
    let fol = build_distance_foliation(&collar, scenario.rho_max(), scenario.levels())?;
    let last = collar.n_slices() - 1;
    let v0: Vec<f64> = (0..collar.n_cells())
        .map(|j| fol.levels[0].h_mean[j] * lapse.u[last][j] / collar.h_one[last][j])
        .collect();
    let exterior = solve_exterior_v(&fol, &v0)?;

    // Weight transport: from infinity down the exterior, then the collar.
    let tols = scenario.tolerances.mass_tolerances();
    let w_exterior = solve_exterior_w(&exterior, tols.eps_causal)?;
    let w_interior = solve_interior_w(
        &collar,
        &lapse,
        &w_exterior.slices[0].clone(),
        tols.eps_causal,
    )?;

    // Mass series and final report over the test directions.
    let zetas = test_zeta_set(scenario.ambient.n, scenario.zeta.seed, scenario.zeta.count);
    let mut report = final_mass(
        &collar,
        &lapse,
        &w_interior,
        &exterior,
        &w_exterior,
        &zetas,
        tols,
        &config_hash,
    )?;
    let series: Vec<MassSeries> = zetas
        .iter()
        .map(|z| mass_series(&collar, &lapse, &w_interior, &exterior, &w_exterior, z))
        .collect::<Result<_>>()?;

    // rho_max adequacy: over the last quarter the exterior series must have
    // settled, up to the accumulated discretization allowance (a decreasing
    // tail masked by the per-level drift still counts as settled).
    let mut worst_tail: f64 = 0.0;
    let mut worst_threshold = f64::INFINITY;
    for s in &series {
        let start = s.exterior.len() - s.exterior.len() / 4;
        let tail = &s.exterior[start.min(s.exterior.len() - 2)..];
        let xs: Vec<f64> = tail.iter().map(|(r, _)| *r).collect();
        let ys: Vec<f64> = tail.iter().map(|(_, v)| *v).collect();
        let slope = ls_slope(&xs, &ys);
        let change = (ys.last().unwrap() - ys.first().unwrap()).abs();
        let scale = 1.0 + ys.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        let drho = scenario.rho_max() / (scenario.levels() as f64);
        let allowance =
            report.tolerances.mono_tol(drho, collar.n_cells()) * scale * tail.len() as f64;
        let threshold = (scenario.tolerances.tail_tol * scale).max(allowance);
        if slope > 0.0 && change > threshold {
            worst_tail = worst_tail.max(change);
            worst_threshold = worst_threshold.min(threshold);
        }
    }
    if worst_tail > 0.0 {
        report.notes.push(format!(
            "exterior series still changes by up to {worst_tail:.3e} (allowance {worst_threshold:.3e}) over the last quarter; consider a larger rho_max"
        ));
    }
    report.notes.insert(
        0,
        format!("first delta-convex slice at t = {first_convex_time}"),
    );

    Ok(PipelineOutput {
        scenario: scenario.clone(),
        config_hash,
        collar,
        lapse,
        exterior,
        w_interior,
        w_exterior,
        series,
        report,
        first_convex_time,
    })
}

/// Run the pipeline and dump every artifact into `dir`.
pub fn run_pipeline_to_dir(scenario: &Scenario, dir: &Path) -> Result<PipelineOutput> {
    let out = run_pipeline(scenario)?;
    write_artifacts(&out, dir)?;
    Ok(out)
}

pub fn write_artifacts(out: &PipelineOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let hash = &out.config_hash;
    io::write_collar_csv(&dir.join("collar.csv"), &out.collar, hash)?;
    let (_, residual) = verify_hu_evolution(&out.collar, &out.lapse);
    io::write_lapse_csv(
        &dir.join("lapse.csv"),
        &out.collar,
        &out.lapse.u,
        &residual,
        hash,
    )?;
    io::write_exterior_csv(&dir.join("exterior.csv"), &out.exterior, hash)?;
    let eps = out.report.tolerances.eps_causal;
    io::write_transport_csv(
        &dir.join("transport_interior.csv"),
        &out.collar.times,
        &out.collar.grid.centers,
        &out.w_interior,
        eps,
        hash,
    )?;
    io::write_transport_csv(
        &dir.join("transport_exterior.csv"),
        &out.exterior.fol.rho,
        &out.exterior.fol.grid.centers,
        &out.w_exterior,
        eps,
        hash,
    )?;
    io::write_mass_series_csv(&dir.join("mass_series.csv"), &out.series, hash)?;
    io::write_report_json(&dir.join("report.json"), &out.report)?;
    Ok(())
}
