//! Cell-centered polar grid on [0, pi] and the discrete operators built on
//! it: reflection-ghost derivatives, cell-integrated quadrature weights, a
//! finite-volume mode Laplacian, and a tridiagonal (Thomas) solver.
//!
//! The grid places cells at theta_j = (j + 1/2) pi / N, so no node sits on
//! either pole; axisymmetric regularity is enforced by even reflection
//! ghosts for profile derivatives and by exactly zero fluxes through the
//! pole faces of the finite-volume Laplacian.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Cell-centered angular grid over the polar angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGrid {
    pub n_cells: usize,
    pub d_theta: f64,
    pub centers: Vec<f64>,
}

impl ThetaGrid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 16 || !n_cells.is_multiple_of(2) {
            return Err(Error::GridTooCoarse { n_cells });
        }
        let d_theta = PI / n_cells as f64;
        let centers = (0..n_cells).map(|j| (j as f64 + 0.5) * d_theta).collect();
        Ok(ThetaGrid {
            n_cells,
            d_theta,
            centers,
        })
    }

    /// Face angle theta_{j-1/2}; j runs 0..=n_cells.
    pub fn face(&self, j: usize) -> f64 {
        j as f64 * self.d_theta
    }

    /// First derivative of an even (axisymmetric) profile, second-order
    /// central differences with even reflection across both poles.
    pub fn d1_even(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n_cells;
        let h2 = 2.0 * self.d_theta;
        (0..n)
            .map(|j| {
                let fm = if j == 0 { f[0] } else { f[j - 1] };
                let fp = if j == n - 1 { f[n - 1] } else { f[j + 1] };
                (fp - fm) / h2
            })
            .collect()
    }

    /// Second derivative of an even profile, same ghost convention.
    pub fn d2_even(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n_cells;
        let h2 = self.d_theta * self.d_theta;
        (0..n)
            .map(|j| {
                let fm = if j == 0 { f[0] } else { f[j - 1] };
                let fp = if j == n - 1 { f[n - 1] } else { f[j + 1] };
                (fp - 2.0 * f[j] + fm) / h2
            })
            .collect()
    }

    /// Exact integrals of sin^m(theta) over each cell, for the round part
    /// of area elements. Keeps geodesic-sphere areas exact to roundoff.
    pub fn sin_power_cell_integrals(&self, m: usize) -> Vec<f64> {
        (0..self.n_cells)
            .map(|j| {
                let a = self.face(j);
                let b = self.face(j + 1);
                sin_power_antiderivative(m, b) - sin_power_antiderivative(m, a)
            })
            .collect()
    }
}

/// Antiderivative of sin^m evaluated at x, by the standard reduction
/// I_m = -cos x sin^{m-1} x / m + (m-1)/m I_{m-2}.
fn sin_power_antiderivative(m: usize, x: f64) -> f64 {
    match m {
        0 => x,
        1 => -x.cos(),
        _ => {
            let lower = sin_power_antiderivative(m - 2, x);
            -x.cos() * x.sin().powi(m as i32 - 1) / m as f64 + (m as f64 - 1.0) / m as f64 * lower
        }
    }
}

/// Solve a tridiagonal system in place. `lower[j]` couples row j to j-1
/// (lower[0] unused), `upper[j]` couples row j to j+1 (upper[n-1] unused).
/// Rows are assumed diagonally dominant; no pivoting.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    let mut scratch = vec![0.0; n];
    let mut d = diag[0];
    rhs[0] /= d;
    for j in 1..n {
        scratch[j] = upper[j - 1] / d;
        d = diag[j] - lower[j] * scratch[j];
        rhs[j] = (rhs[j] - lower[j] * rhs[j - 1]) / d;
    }
    for j in (0..n - 1).rev() {
        rhs[j] -= scratch[j + 1] * rhs[j + 1];
    }
}

/// Finite-volume elliptic operator on an axisymmetric surface:
///   L f = (1/W) d/dtheta ( C df/dtheta ) + zeroth * f,
/// with W the cell-integrated weight and C the face conductance. Pole
/// fluxes are exactly zero.
///
/// Two instances cover the fields that arise here: the scalar
/// Laplace-Beltrami operator of the slice metric (zeroth = 0), and the
/// operator acting on the regular amplitude p of first-azimuthal-mode
/// fields f = p(theta) sin(theta), for which the mode sink and the
/// sin-substitution combine into a smooth zeroth-order coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLaplacian {
    /// Cell weights W_j (weight density integrated over the cell, without
    /// the S^{n-2} volume factor).
    pub cell_weight: Vec<f64>,
    /// Face conductances C_{j-1/2} / d_theta for j = 0..=N; entries 0 and N
    /// are exactly zero.
    pub face_coef: Vec<f64>,
    /// Per-cell zeroth-order coefficient.
    pub zeroth: Vec<f64>,
}

impl ModeLaplacian {
    /// Apply L to a field.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        debug_assert_eq!(n, self.cell_weight.len());
        for j in 0..n {
            let flux_hi = if j + 1 < n {
                self.face_coef[j + 1] * (f[j + 1] - f[j])
            } else {
                0.0
            };
            let flux_lo = if j > 0 {
                self.face_coef[j] * (f[j] - f[j - 1])
            } else {
                0.0
            };
            out[j] = (flux_hi - flux_lo) / self.cell_weight[j] + self.zeroth[j] * f[j];
        }
    }

    /// Solve (I - diag(alpha) L) delta = rhs for delta.
    ///
    /// alpha_j >= 0 is the per-cell implicit coefficient (diffusion
    /// coefficient times the implicit step fraction). Solving for the
    /// increment keeps exact fixed points bit-exact: a zero rhs yields a
    /// zero delta with no rounding.
    pub fn solve_shifted(&self, alpha: &[f64], rhs: &[f64], out: &mut [f64]) {
        let n = rhs.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for j in 0..n {
            let w = self.cell_weight[j];
            let c_lo = if j > 0 { self.face_coef[j] } else { 0.0 };
            let c_hi = if j + 1 < n {
                self.face_coef[j + 1]
            } else {
                0.0
            };
            let lo = alpha[j] * c_lo / w;
            let hi = alpha[j] * c_hi / w;
            lower[j] = -lo;
            upper[j] = -hi;
            diag[j] = 1.0 + lo + hi - alpha[j] * self.zeroth[j];
        }
        out.copy_from_slice(rhs);
        solve_tridiagonal(&lower, &diag, &upper, out);
    }

    /// Linear interpolation between two operators on the same grid.
    pub fn lerp(&self, other: &ModeLaplacian, w: f64) -> ModeLaplacian {
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
        };
        ModeLaplacian {
            cell_weight: mix(&self.cell_weight, &other.cell_weight),
            face_coef: mix(&self.face_coef, &other.face_coef),
            zeroth: mix(&self.zeroth, &other.zeroth),
        }
    }
}

/// Three-point derivative of a (possibly non-uniformly) sampled series:
/// second-order centered in the interior, one-sided at both ends.
pub fn deriv3(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    debug_assert_eq!(n, values.len());
    assert!(
        n >= 3,
        "need at least 3 samples for a second-order derivative"
    );
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (i0, i1, i2) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (t0, t1, t2) = (times[i0], times[i1], times[i2]);
        let t = times[i];
        // Derivative of the quadratic through the three samples.
        let c0 = (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
        let c1 = (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
        let c2 = (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
        out[i] = c0 * values[i0] + c1 * values[i1] + c2 * values[i2];
    }
    out
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
