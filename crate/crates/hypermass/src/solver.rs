//! Shared semi-implicit stepper for the quasilinear reaction-diffusion
//! equations of the collar, the exterior extension, and the weight
//! transport:
//!
//!   df/ds = a(f; fields) * L f + g(f; fields),
//!
//! with L a [`ModeLaplacian`] and a > 0. The diffusion term is implicit
//! (trapezoidal, coefficient frozen at the predictor state), the reaction
//! explicit at the midpoint: a one-step second-order IMEX midpoint scheme.
//!
//! All implicit solves are performed in increment form, so exact fixed
//! points (zero right sides) are preserved bit-for-bit.

use crate::error::{Error, Result};
use crate::grid::ModeLaplacian;

/// Per-cell coefficients of one stage: diffusion a_j and reaction g_j,
/// both evaluated from the supplied state.
pub type StageCoeffs = (Vec<f64>, Vec<f64>);

/// Advance `f` by one IMEX midpoint step of size `dt`.
///
/// `lap_begin` / `lap_mid` are the operators at the step start and
/// midpoint; `coeffs_begin(f)` and `coeffs_mid(f_star)` supply (a, g) at
/// the respective states. Returns the largest linear-solve residual of the
/// two implicit stages.
#[allow(clippy::too_many_arguments)]
pub fn imex_midpoint_step(
    f: &mut [f64],
    dt: f64,
    lap_begin: &ModeLaplacian,
    lap_mid: &ModeLaplacian,
    coeffs_begin: impl FnOnce(&[f64]) -> StageCoeffs,
    coeffs_mid: impl FnOnce(&[f64]) -> StageCoeffs,
    stage: &'static str,
    step: usize,
) -> Result<f64> {
    let n = f.len();
    let mut lf = vec![0.0; n];
    let mut delta = vec![0.0; n];

    // Predictor: backward-Euler half step.
    let (a0, g0) = coeffs_begin(f);
    lap_begin.apply(f, &mut lf);
    let rhs: Vec<f64> = (0..n).map(|j| 0.5 * dt * (a0[j] * lf[j] + g0[j])).collect();
    let alpha: Vec<f64> = a0.iter().map(|a| 0.5 * dt * a).collect();
    lap_begin.solve_shifted(&alpha, &rhs, &mut delta);
    let mut resid = solve_residual(lap_begin, &alpha, &delta, &rhs);
    let f_star: Vec<f64> = f.iter().zip(&delta).map(|(x, d)| x + d).collect();

    // Corrector: trapezoidal diffusion, midpoint reaction and coefficient.
    let (a1, g1) = coeffs_mid(&f_star);
    lap_mid.apply(f, &mut lf);
    let rhs2: Vec<f64> = (0..n).map(|j| dt * (a1[j] * lf[j] + g1[j])).collect();
    let alpha2: Vec<f64> = a1.iter().map(|a| 0.5 * dt * a).collect();
    lap_mid.solve_shifted(&alpha2, &rhs2, &mut delta);
    resid = resid.max(solve_residual(lap_mid, &alpha2, &delta, &rhs2));

    for j in 0..n {
        f[j] += delta[j];
        if !f[j].is_finite() {
            return Err(Error::NonFinite { stage, step });
        }
    }
    Ok(resid)
}

/// Residual of (I - diag(alpha) L) delta = rhs in the max norm.
fn solve_residual(lap: &ModeLaplacian, alpha: &[f64], delta: &[f64], rhs: &[f64]) -> f64 {
    let n = delta.len();
    let mut ld = vec![0.0; n];
    lap.apply(delta, &mut ld);
    let mut r: f64 = 0.0;
    for j in 0..n {
        r = r.max((delta[j] - alpha[j] * ld[j] - rhs[j]).abs());
    }
    r
}

/// Linear interpolation of a per-cell field.
pub fn lerp_field(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
}
