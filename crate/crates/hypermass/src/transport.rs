//! Backward transport of the Lorentz-vector weight: from the prescribed
//! behavior at infinity down the exterior foliation, then down the collar.
//!
//! The weight W: surface x parameter -> R^{n,1} obeys, componentwise in the
//! Lorentz components,
//!   exterior:  (H_rho / v) dW/drho = -Lap W + (n-1) k^2 W,
//!   interior:  -(H_1 / (u eta)) dW/dt = Lap W - (n-1) k^2 W,
//! both integrated in their stable direction (decreasing rho, decreasing
//! t). Axisymmetry reduces the components to three meridian profiles: the
//! first-spatial amplitude p (W_x = p sin theta, solved with the amplitude
//! operator), the axis component, and the time component (scalars). The
//! remaining spatial components vanish identically for equivariant data
//! and are carried as exact zeros.
//!
//! Past-directed non-spacelike data stay past-directed non-spacelike (the
//! maximum principle); the discrete solution is checked for this at every
//! level against a relative tolerance.

use crate::error::{Error, Result};
use crate::exterior::ExteriorFoliation;
use crate::geometry::SurfaceGeometry;
use crate::grid::ThetaGrid;
use crate::icf::CollarFoliation;
use crate::lapse::LapseField;
use crate::minkowski::LorentzVector;
use crate::solver::{imex_midpoint_step, lerp_field};

/// Meridian data of the weight on one slice or level.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSlice {
    /// Amplitude p of the first spatial component: W_x = p sin(theta).
    pub amp_x: Vec<f64>,
    /// Component along the symmetry axis.
    pub w_axis: Vec<f64>,
    /// Time component.
    pub w_time: Vec<f64>,
}

impl WeightSlice {
    pub fn zero(n_cells: usize) -> Self {
        WeightSlice {
            amp_x: vec![0.0; n_cells],
            w_axis: vec![0.0; n_cells],
            w_time: vec![0.0; n_cells],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightSlice {
            amp_x: self.amp_x.iter().map(|x| c * x).collect(),
            w_axis: self.w_axis.iter().map(|x| c * x).collect(),
            w_time: self.w_time.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        WeightSlice {
            amp_x: mix(&self.amp_x, &other.amp_x),
            w_axis: mix(&self.w_axis, &other.w_axis),
            w_time: mix(&self.w_time, &other.w_time),
        }
    }
}

/// The weight solved on a foliation (exterior levels or collar slices),
/// indexed like the underlying foliation.
#[derive(Debug, Clone)]
pub struct TransportField {
    pub slices: Vec<WeightSlice>,
    /// Polar angles of the cells (to reconstruct W_x = p sin theta).
    pub sin_theta: Vec<f64>,
    /// Spatial dimension n of the ambient space.
    pub dim: usize,
    /// min over the grid of -inner(W,W)/|W|^2; nonnegative iff the field is
    /// non-spacelike everywhere (up to the check tolerance).
    pub causal_margin: f64,
}

impl TransportField {
    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    /// The meridian value of W at (slice, cell) as a full Lorentz vector.
    pub fn vector(&self, slice: usize, cell: usize) -> LorentzVector {
        let w = &self.slices[slice];
        let mut spatial = vec![0.0; self.dim];
        spatial[0] = w.amp_x[cell] * self.sin_theta[cell];
        spatial[self.dim - 1] = w.w_axis[cell];
        LorentzVector::new(spatial, w.w_time[cell])
    }

    /// inner(W, W) at a grid point.
    pub fn norm_sq(&self, slice: usize, cell: usize) -> f64 {
        let w = &self.slices[slice];
        let wx = w.amp_x[cell] * self.sin_theta[cell];
        wx * wx + w.w_axis[cell] * w.w_axis[cell] - w.w_time[cell] * w.w_time[cell]
    }

    /// Minimum over the azimuth of W . zeta at a grid point: the pointwise
    /// quantity controlled by the maximum principle for null pairings.
    pub fn min_pairing(&self, slice: usize, cell: usize, zeta: &LorentzVector) -> f64 {
        let w = &self.slices[slice];
        let wx = w.amp_x[cell] * self.sin_theta[cell];
        let zeta_perp: f64 = zeta.spatial[..self.dim - 1]
            .iter()
            .map(|z| z * z)
            .sum::<f64>()
            .sqrt();
        w.w_axis[cell] * zeta.spatial[self.dim - 1]
            - w.w_time[cell] * zeta.time
            - wx.abs() * zeta_perp
    }
}

/// Terminal data of the exterior transport: W = -k X on the outermost
/// level, the finite-radius stand-in for the prescribed limit at infinity.
pub fn asymptotic_terminal(ext: &ExteriorFoliation) -> WeightSlice {
    let k = ext.fol.amb.k;
    let geo = ext.fol.levels.last().unwrap();
    terminal_from_position(geo, k)
}

fn terminal_from_position(geo: &SurfaceGeometry, k: f64) -> WeightSlice {
    let nc = geo.n_cells();
    // W_x = -k lam sin(theta), so the amplitude is -k lam = -k pos_x / sin.
    let mut amp_x = vec![0.0; nc];
    let mut w_axis = vec![0.0; nc];
    let mut w_time = vec![0.0; nc];
    for j in 0..nc {
        let lam = (k * geo.r[j]).sinh() / k;
        amp_x[j] = -k * lam;
        w_axis[j] = -k * geo.pos_axis[j];
        w_time[j] = -k * geo.pos_time[j];
    }
    WeightSlice {
        amp_x,
        w_axis,
        w_time,
    }
}

/// Relative causal check of a solved field; errors with the offending
/// point, otherwise returns the margin min(-q/|W|^2).
fn check_causal(field: &TransportField, eps: f64, stage: &'static str) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for l in 0..field.n_slices() {
        for j in 0..field.sin_theta.len() {
            let w = &field.slices[l];
            let wx = w.amp_x[j] * field.sin_theta[j];
            let scale = wx * wx + w.w_axis[j] * w.w_axis[j] + w.w_time[j] * w.w_time[j];
            if scale == 0.0 {
                continue;
            }
            let q = field.norm_sq(l, j);
            let ratio = -q / scale;
            margin = margin.min(ratio);
            if ratio < -eps || w.w_time[j] > eps * scale.sqrt() {
                return Err(Error::CausalViolation {
                    stage,
                    level: l,
                    cell: j,
                    ratio,
                    time: w.w_time[j],
                });
            }
        }
    }
    Ok(if margin.is_finite() { margin } else { 0.0 })
}

/// March the three meridian components down a foliation.
///
/// `levels[l]` is the geometry at parameter `params[l]`; `b[l]` the
/// per-cell factor multiplying (Lap - (n-1)k^2) in the stable-direction
/// form dW/dtau = b (Lap W - (n-1)k^2 W) - drift dW/dtheta, where `drift`
/// converts the normal-gauge equation to the theta-fixed grid. For the
/// amplitude p of W_x = p sin(theta) the advection picks up the extra term
/// drift cot(theta) p, regular at the poles. Integration runs from the
/// last index down to 0; the returned vector is indexed like `levels`.
#[allow(clippy::too_many_arguments)]
fn march_backward(
    grid: &ThetaGrid,
    levels: &[SurfaceGeometry],
    params: &[f64],
    b: &[Vec<f64>],
    drift: &[Vec<f64>],
    terminal: &WeightSlice,
    nf: f64,
    k: f64,
    stage: &'static str,
) -> Result<Vec<WeightSlice>> {
    let n_levels = levels.len();
    let nc = terminal.amp_x.len();
    let decay = (nf - 1.0) * k * k;
    let coeffs_scalar = |w: &[f64], b_at: &[f64], drift_at: &[f64]| {
        let dw = grid.d1_even(w);
        let a = b_at.to_vec();
        let g = (0..nc)
            .map(|j| -b_at[j] * decay * w[j] - drift_at[j] * dw[j])
            .collect();
        (a, g)
    };
    let cot: Vec<f64> = grid.centers.iter().map(|t| t.cos() / t.sin()).collect();
    let coeffs_amp = |p: &[f64], b_at: &[f64], drift_at: &[f64]| {
        let dp = grid.d1_even(p);
        let a = b_at.to_vec();
        let g = (0..nc)
            .map(|j| -b_at[j] * decay * p[j] - drift_at[j] * (dp[j] + cot[j] * p[j]))
            .collect();
        (a, g)
    };

    let mut out = vec![WeightSlice::zero(nc); n_levels];
    out[n_levels - 1] = terminal.clone();
    let mut amp = terminal.amp_x.clone();
    let mut axis = terminal.w_axis.clone();
    let mut time = terminal.w_time.clone();

    for l in (0..n_levels - 1).rev() {
        let dt = params[l + 1] - params[l];
        let b_hi = &b[l + 1];
        let b_mid = lerp_field(&b[l], &b[l + 1], 0.5);
        let drift_hi = &drift[l + 1];
        let drift_mid = lerp_field(&drift[l], &drift[l + 1], 0.5);
        let lap_mid = levels[l].laplacian.lerp(&levels[l + 1].laplacian, 0.5);
        let amp_mid = levels[l]
            .amp_laplacian
            .lerp(&levels[l + 1].amp_laplacian, 0.5);

        imex_midpoint_step(
            &mut amp,
            dt,
            &levels[l + 1].amp_laplacian,
            &amp_mid,
            |w| coeffs_amp(w, b_hi, drift_hi),
            |w| coeffs_amp(w, &b_mid, &drift_mid),
            stage,
            l,
        )?;
        for f in [&mut axis, &mut time] {
            imex_midpoint_step(
                f,
                dt,
                &levels[l + 1].laplacian,
                &lap_mid,
                |w| coeffs_scalar(w, b_hi, drift_hi),
                |w| coeffs_scalar(w, &b_mid, &drift_mid),
                stage,
                l,
            )?;
        }
        out[l] = WeightSlice {
            amp_x: amp.clone(),
            w_axis: axis.clone(),
            w_time: time.clone(),
        };
    }
    Ok(out)
}

/// Solve the exterior weight equation down from `terminal` at rho_max.
pub fn solve_exterior_weight(
    ext: &ExteriorFoliation,
    terminal: &WeightSlice,
    eps_causal: f64,
) -> Result<TransportField> {
    let nf = ext.fol.amb.n as f64;
    let k = ext.fol.amb.k;
    // b = v / H_rho per (level, cell)
    let b: Vec<Vec<f64>> = ext
        .v
        .iter()
        .zip(&ext.fol.levels)
        .map(|(vs, geo)| vs.iter().zip(&geo.h_mean).map(|(v, h)| v / h).collect())
        .collect();
    // unit-speed distance foliation: drift coefficient of each level
    let drift: Vec<Vec<f64>> = ext
        .fol
        .levels
        .iter()
        .map(crate::geometry::drift_coefficient)
        .collect();
    let slices = march_backward(
        &ext.fol.grid,
        &ext.fol.levels,
        &ext.fol.rho,
        &b,
        &drift,
        terminal,
        nf,
        k,
        "transport-exterior",
    )?;
    let mut field = TransportField {
        slices,
        sin_theta: ext.fol.grid.centers.iter().map(|t| t.sin()).collect(),
        dim: ext.fol.amb.n,
        causal_margin: 0.0,
    };
    field.causal_margin = check_causal(&field, eps_causal, "transport-exterior")?;
    Ok(field)
}

/// Exterior weight with the asymptotic terminal data W = -kX.
pub fn solve_exterior_w(ext: &ExteriorFoliation, eps_causal: f64) -> Result<TransportField> {
    solve_exterior_weight(ext, &asymptotic_terminal(ext), eps_causal)
}

/// Solve the interior weight equation down the collar from W(., T) =
/// `terminal` (the exterior solution at rho = 0).
pub fn solve_interior_w(
    c: &CollarFoliation,
    lapse: &LapseField,
    terminal: &WeightSlice,
    eps_causal: f64,
) -> Result<TransportField> {
    if terminal.amp_x.len() != c.n_cells() {
        return Err(Error::GridMismatch {
            left: "terminal weight",
            right: "collar",
            detail: format!("{} cells vs {}", terminal.amp_x.len(), c.n_cells()),
        });
    }
    let nf = c.amb.n as f64;
    let k = c.amb.k;
    // b = u eta / H_1 per (slice, cell)
    let b: Vec<Vec<f64>> = (0..c.n_slices())
        .map(|i| {
            (0..c.n_cells())
                .map(|j| lapse.u[i][j] * c.eta[i][j] / c.h_one[i][j])
                .collect()
        })
        .collect();
    let slices = march_backward(
        &c.grid,
        &c.slices,
        &c.times,
        &b,
        &c.drift,
        terminal,
        nf,
        k,
        "transport-interior",
    )?;
    let mut field = TransportField {
        slices,
        sin_theta: c.grid.centers.iter().map(|t| t.sin()).collect(),
        dim: c.amb.n,
        causal_margin: 0.0,
    };
    field.causal_margin = check_causal(&field, eps_causal, "transport-interior")?;
    Ok(field)
}
