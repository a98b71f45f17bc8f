//! The unbounded region outside the final convex slice: geodesic distance
//! foliation and the exterior prescribed-scalar-curvature equation.
//!
//! The distance spheres are generated by unit-speed normal flow of the
//! radial profile in the hyperbolic metric. On them,
//!   2 H_rho dv/drho = 2 v^2 Lap v + (v - v^3)(R_rho + n(n-1)k^2)
//! produces the conformal-lapse factor v of the exterior metric
//! v^2 drho^2 + g_rho with scalar curvature -n(n-1)k^2. The factor v = 1
//! (the hyperbolic metric itself) is an exact fixed point of the stepper,
//! and spherically symmetric data reproduce a closed-form solution used as
//! the solver oracle.

use crate::error::{Error, Result};
use crate::geometry::{compute_geometry_profile, SurfaceGeometry};
use crate::grid::{ls_slope, ThetaGrid};
use crate::icf::CollarFoliation;
use crate::minkowski::AmbientSpace;
use crate::solver::imex_midpoint_step;

/// The geometry of the distance spheres, before the extension is solved.
#[derive(Debug, Clone)]
pub struct DistanceFoliation {
    pub amb: AmbientSpace,
    pub grid: ThetaGrid,
    /// Level values 0 = rho_0 < ... < rho_max, uniformly spaced.
    pub rho: Vec<f64>,
    pub levels: Vec<SurfaceGeometry>,
}

impl DistanceFoliation {
    pub fn n_levels(&self) -> usize {
        self.rho.len()
    }

    pub fn n_cells(&self) -> usize {
        self.grid.n_cells
    }
}

/// The solved exterior: distance-sphere geometry plus the factor v and the
/// mean curvature H_v = H_rho / v of the extension metric.
///
/// The solver marches the shifted variable w = v - 1, which keeps relative
/// precision in the exponentially decaying tail where v itself is
/// indistinguishable from 1 in floating point; mass integrands use
/// H_rho - H_v = H_rho w/(1+w) through [`ExteriorFoliation::h_defect`].
#[derive(Debug, Clone)]
pub struct ExteriorFoliation {
    pub fol: DistanceFoliation,
    /// v per (level, cell).
    pub v: Vec<Vec<f64>>,
    /// v - 1 per (level, cell), accurate in the tail.
    pub v_minus_one: Vec<Vec<f64>>,
    /// H_v = H_rho / v per (level, cell).
    pub h_v: Vec<Vec<f64>>,
    /// Largest linear residual across implicit stages.
    pub max_solve_residual: f64,
}

impl ExteriorFoliation {
    /// H_rho - H_v at a grid point, evaluated cancellation-free.
    pub fn h_defect(&self, level: usize, cell: usize) -> f64 {
        let w = self.v_minus_one[level][cell];
        self.fol.levels[level].h_mean[cell] * w / (1.0 + w)
    }
}

/// Build the distance foliation of the region outside the collar's final
/// slice by unit-speed normal flow, storing geometry at `n_levels` + 1
/// uniformly spaced levels up to `rho_max`.
pub fn build_distance_foliation(
    c: &CollarFoliation,
    rho_max: f64,
    n_levels: usize,
) -> Result<DistanceFoliation> {
    if !(rho_max > 0.0) || n_levels < 8 {
        return Err(Error::Config(format!(
            "exterior needs rho_max > 0 and at least 8 levels, got {rho_max}, {n_levels}"
        )));
    }
    let start = c.slices.last().unwrap();
    if !(start.min_principal() > 0.0) {
        return Err(Error::ConvexityLost {
            level: 0,
            rho: 0.0,
            cell: 0,
            kappa: start.min_principal(),
        });
    }
    let amb = c.amb;
    let grid = c.grid.clone();
    let d_rho = rho_max / n_levels as f64;

    let mut radii = start.r.clone();
    let mut levels = vec![start.clone()];
    let mut rho = vec![0.0];
    for l in 1..=n_levels {
        // Heun step of dr/drho = v(r, r').
        let geo = levels.last().unwrap();
        let k1 = geo.graph_v.clone();
        let predictor: Vec<f64> = radii.iter().zip(&k1).map(|(r, s)| r + d_rho * s).collect();
        let geo_pred = compute_geometry_profile(&amb, &grid, &predictor)?;
        let new_radii: Vec<f64> = radii
            .iter()
            .zip(k1.iter().zip(&geo_pred.graph_v))
            .map(|(r, (a, b))| r + 0.5 * d_rho * (a + b))
            .collect();
        let geo_new = compute_geometry_profile(&amb, &grid, &new_radii)?;
        let rho_new = l as f64 * d_rho;
        for j in 0..geo_new.n_cells() {
            let kappa = geo_new.kappa_theta[j].min(geo_new.kappa_phi[j]);
            if !(kappa > 0.0) {
                return Err(Error::ConvexityLost {
                    level: l,
                    rho: rho_new,
                    cell: j,
                    kappa,
                });
            }
            if !(geo_new.h_mean[j] > 0.0) {
                return Err(Error::ConvexityLost {
                    level: l,
                    rho: rho_new,
                    cell: j,
                    kappa: geo_new.h_mean[j],
                });
            }
        }
        radii = new_radii;
        levels.push(geo_new);
        rho.push(rho_new);
    }
    Ok(DistanceFoliation {
        amb,
        grid,
        rho,
        levels,
    })
}

/// Abort threshold of the extension solve, relative to the initial data.
fn blow_up_limit(v0: &[f64]) -> f64 {
    10.0 * v0.iter().cloned().fold(0.0f64, f64::max).max(1.0)
}

/// Solve the exterior extension equation outward from v(., 0) = v0.
pub fn solve_exterior_v(fol: &DistanceFoliation, v0: &[f64]) -> Result<ExteriorFoliation> {
    if v0.len() != fol.n_cells() {
        return Err(Error::GridMismatch {
            left: "v0",
            right: "exterior foliation",
            detail: format!("{} cells vs {}", v0.len(), fol.n_cells()),
        });
    }
    if let Some((j, &v)) = v0.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::Config(format!(
            "v0 must be positive, got {v} at cell {j}"
        )));
    }
    let nf = fol.amb.n as f64;
    let k = fol.amb.k;
    let n_const = nf * (nf - 1.0) * k * k;
    let limit = blow_up_limit(v0);

    // March w = v - 1:
    //   dw/drho = ((1+w)^2/H_rho) Lap w - w(1+w)(2+w)(R_rho + n(n-1)k^2)/(2 H_rho)
    //             + drift dw/dtheta,
    // the reaction carrying an explicit factor w so the hyperbolic fixed
    // point w = 0 is bit-exact and the tail never loses relative accuracy;
    // the drift term converts the normal-gauge equation to the theta-fixed
    // grid (zero on geodesic spheres).
    let grid = &fol.grid;
    let coeffs = |w: &[f64], h: &[f64], rt: &[f64], drift: &[f64]| {
        let n = w.len();
        let dw = grid.d1_even(w);
        let mut a = vec![0.0; n];
        let mut g = vec![0.0; n];
        for j in 0..n {
            let v = 1.0 + w[j];
            a[j] = v * v / h[j];
            g[j] = -w[j] * v * (2.0 + w[j]) * (rt[j] + n_const) / (2.0 * h[j]) + drift[j] * dw[j];
        }
        (a, g)
    };

    // v0 - 1 is exact for v0 in [1/2, 2] and harmless otherwise.
    let mut w: Vec<f64> = v0.iter().map(|v| v - 1.0).collect();
    let mut field_w = vec![w.clone()];
    let mut max_resid: f64 = 0.0;
    let drift: Vec<Vec<f64>> = fol
        .levels
        .iter()
        .map(crate::geometry::drift_coefficient)
        .collect();
    for l in 0..fol.n_levels() - 1 {
        let d_rho = fol.rho[l + 1] - fol.rho[l];
        let g0 = &fol.levels[l];
        let g1 = &fol.levels[l + 1];
        let lap_mid = g0.laplacian.lerp(&g1.laplacian, 0.5);
        let h_mid: Vec<f64> = g0
            .h_mean
            .iter()
            .zip(&g1.h_mean)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let rt_mid: Vec<f64> = g0
            .r_intrinsic
            .iter()
            .zip(&g1.r_intrinsic)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let drift_mid: Vec<f64> = drift[l]
            .iter()
            .zip(&drift[l + 1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let resid = imex_midpoint_step(
            &mut w,
            d_rho,
            &g0.laplacian,
            &lap_mid,
            |state| coeffs(state, &g0.h_mean, &g0.r_intrinsic, &drift[l]),
            |state| coeffs(state, &h_mid, &rt_mid, &drift_mid),
            "exterior",
            l,
        )?;
        max_resid = max_resid.max(resid);
        let v_max = w.iter().map(|w| 1.0 + w).fold(0.0f64, f64::max);
        if v_max > limit {
            return Err(Error::BlowUp {
                stage: "exterior",
                max_abs: v_max,
                limit,
            });
        }
        if let Some(&bad) = w.iter().find(|&&w| !(1.0 + w > 0.0)) {
            return Err(Error::BlowUp {
                stage: "exterior",
                max_abs: 1.0 + bad,
                limit: 0.0,
            });
        }
        field_w.push(w.clone());
    }

    let field: Vec<Vec<f64>> = field_w
        .iter()
        .map(|ws| ws.iter().map(|w| 1.0 + w).collect())
        .collect();
    let h_v: Vec<Vec<f64>> = fol
        .levels
        .iter()
        .zip(&field)
        .map(|(geo, vs)| geo.h_mean.iter().zip(vs).map(|(h, v)| h / v).collect())
        .collect();

    Ok(ExteriorFoliation {
        fol: fol.clone(),
        v: field,
        v_minus_one: field_w,
        h_v,
        max_solve_residual: max_resid,
    })
}

/// Fitted decay rate of max_cell |v - 1| over the outer half of the
/// foliation (ignoring levels already at roundoff); +infinity if v is
/// exactly hyperbolic there.
pub fn v_tail_rate(ext: &ExteriorFoliation) -> f64 {
    let n = ext.fol.n_levels();
    let mut rhos = Vec::new();
    let mut logs = Vec::new();
    for l in n / 2..n {
        let d = ext.v_minus_one[l]
            .iter()
            .map(|w| w.abs())
            .fold(0.0f64, f64::max);
        if d > 1e-300 {
            rhos.push(ext.fol.rho[l]);
            logs.push(d.ln());
        }
    }
    if rhos.len() < 2 {
        f64::INFINITY
    } else {
        -ls_slope(&rhos, &logs)
    }
}

/// Closed-form rotationally symmetric extension factor
///   v(s) = sqrt((1 + k^2 s^2)/(1 + k^2 s^2 - 2m/s))
/// with s the area radius of the level sphere. Solves the angle-free
/// reduction of the extension equation for every mass parameter m.
pub fn symmetric_v(k: f64, s: f64, m_param: f64) -> f64 {
    let p = 1.0 + k * k * s * s;
    (p / (p - 2.0 * m_param / s)).sqrt()
}

/// Exact rho-derivative of [`symmetric_v`] along the geodesic foliation
/// (ds/drho = sqrt(1 + k^2 s^2)), for substitution residual checks.
pub fn symmetric_v_drho(k: f64, s: f64, m_param: f64) -> f64 {
    let p = 1. + k * k * s * s;
    let q = p - 2.0 * m_param / s;
    let v = (p / q).sqrt();
    let dv_ds = -m_param * (3.0 * k * k * s * s + 1.0) / (v * q * q * s * s);
    dv_ds * p.sqrt()
}
