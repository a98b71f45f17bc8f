//! Axisymmetric star-shaped hypersurfaces in hyperbolic space and their
//! extrinsic/intrinsic geometry.
//!
//! A surface is a radial graph r = u(theta) over geodesic spheres about a
//! fixed origin, written in geodesic polar coordinates where the ambient
//! metric is dr^2 + lambda(r)^2 (dtheta^2 + sin^2 theta dOmega^2) with
//! lambda(r) = sinh(kr)/k. Exact geodesic spheres are supported in every
//! dimension n >= 3; genuinely angle-dependent profiles are n = 3 only.
//!
//! The intrinsic scalar curvature is defined through the traced Gauss
//! equation R = H^2 - |A|^2 - (n-1)(n-2)k^2, which is algebraic in the
//! extrinsic data and exact for spheres; an independent intrinsic
//! computation exists as a test-side diagnostic.

use crate::error::{Error, Result};
use crate::grid::{ModeLaplacian, ThetaGrid};
use crate::minkowski::{AmbientSpace, LorentzVector};

/// How the radial profile is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceMode {
    /// Geodesic sphere of radius r about the origin (any n >= 3).
    ExactSphere(f64),
    /// Cell-centered radial profile over the polar angle (n = 3 only).
    Profile(Vec<f64>),
}

/// An axisymmetric star-shaped hypersurface, as a radial graph.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSurface {
    pub amb: AmbientSpace,
    pub grid: ThetaGrid,
    pub mode: SurfaceMode,
}

impl RadialSurface {
    pub fn sphere(amb: AmbientSpace, n_cells: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidSurface(format!(
                "sphere radius {r} must be positive"
            )));
        }
        Ok(RadialSurface {
            amb,
            grid: ThetaGrid::new(n_cells)?,
            mode: SurfaceMode::ExactSphere(r),
        })
    }

    pub fn profile(amb: AmbientSpace, radii: Vec<f64>) -> Result<Self> {
        if amb.n != 3 {
            return Err(Error::InvalidSurface(format!(
                "profile surfaces require n = 3, got n = {}",
                amb.n
            )));
        }
        let grid = ThetaGrid::new(radii.len())?;
        if let Some((j, &r)) = radii.iter().enumerate().find(|(_, &r)| !(r > 0.0)) {
            return Err(Error::InvalidSurface(format!(
                "radius {r} at cell {j} violates star-shapedness (all radii must be > 0)"
            )));
        }
        Ok(RadialSurface {
            amb,
            grid,
            mode: SurfaceMode::Profile(radii),
        })
    }

    /// Perturbed sphere r_j = r0 (1 + amp P_mode(cos theta_j)).
    pub fn perturbed_sphere(
        amb: AmbientSpace,
        n_cells: usize,
        r0: f64,
        amp: f64,
        mode: usize,
    ) -> Result<Self> {
        let grid = ThetaGrid::new(n_cells)?;
        let radii: Vec<f64> = grid
            .centers
            .iter()
            .map(|t| r0 * (1.0 + amp * legendre_p(mode, t.cos())))
            .collect();
        RadialSurface::profile(amb, radii)
    }

    /// The radial profile sampled on the grid (constant for exact spheres).
    pub fn radii(&self) -> Vec<f64> {
        match &self.mode {
            SurfaceMode::ExactSphere(r) => vec![*r; self.grid.n_cells],
            SurfaceMode::Profile(radii) => radii.clone(),
        }
    }
}

/// Legendre polynomial P_m(x) by the three-term recurrence.
pub fn legendre_p(m: usize, x: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p_prev = 1.0;
            let mut p = x;
            for l in 1..m {
                let next = ((2 * l + 1) as f64 * x * p - l as f64 * p_prev) / (l as f64 + 1.0);
                p_prev = p;
                p = next;
            }
            p
        }
    }
}

/// Per-cell geometry of one surface (or one flow slice / distance level):
/// induced metric, shape operator eigenvalues, curvatures, area weights,
/// position and normal in R^{n,1}, and the assembled Laplacian pieces.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    pub amb: AmbientSpace,
    /// Radial profile r_j.
    pub r: Vec<f64>,
    /// Profile derivative dr/dtheta.
    pub dr: Vec<f64>,
    /// Graph factor v = sqrt(1 + (dr/lambda)^2).
    pub graph_v: Vec<f64>,
    /// Induced metric g_theta_theta.
    pub g_theta: Vec<f64>,
    /// Induced metric warping g_phi_phi = (lambda sin theta)^2.
    pub g_phi: Vec<f64>,
    /// Principal curvature along the meridian direction.
    pub kappa_theta: Vec<f64>,
    /// Principal curvature along the rotational directions (multiplicity n-2).
    pub kappa_phi: Vec<f64>,
    /// Mean curvature H = kappa_theta + (n-2) kappa_phi.
    pub h_mean: Vec<f64>,
    /// |A|^2 = kappa_theta^2 + (n-2) kappa_phi^2.
    pub a_norm_sq: Vec<f64>,
    /// Intrinsic scalar curvature from the traced Gauss equation.
    pub r_intrinsic: Vec<f64>,
    /// Per-cell area (sums to the total surface area).
    pub area: Vec<f64>,
    /// Finite-volume Laplace-Beltrami operator for axisymmetric scalars.
    pub laplacian: ModeLaplacian,
    /// Operator acting on the regular amplitude p of first-azimuthal-mode
    /// fields f = p(theta) sin(theta) (the transported x-components), with
    /// the mode sink folded into a smooth zeroth-order coefficient.
    pub amp_laplacian: ModeLaplacian,
    /// Meridian position components: spatial (x, axis) and time.
    pub pos_x: Vec<f64>,
    pub pos_axis: Vec<f64>,
    pub pos_time: Vec<f64>,
    /// Outward unit normal components, same layout.
    pub normal_x: Vec<f64>,
    pub normal_axis: Vec<f64>,
    pub normal_time: Vec<f64>,
}

impl SurfaceGeometry {
    pub fn n_cells(&self) -> usize {
        self.r.len()
    }

    pub fn total_area(&self) -> f64 {
        self.area.iter().sum()
    }

    /// Position vector of cell j as a full Lorentz vector, meridian plane
    /// (first spatial component, rotational components zero, axis last).
    pub fn position(&self, j: usize) -> LorentzVector {
        let n = self.amb.n;
        let mut spatial = vec![0.0; n];
        spatial[0] = self.pos_x[j];
        spatial[n - 1] = self.pos_axis[j];
        LorentzVector::new(spatial, self.pos_time[j])
    }

    pub fn normal(&self, j: usize) -> LorentzVector {
        let n = self.amb.n;
        let mut spatial = vec![0.0; n];
        spatial[0] = self.normal_x[j];
        spatial[n - 1] = self.normal_axis[j];
        LorentzVector::new(spatial, self.normal_time[j])
    }

    /// Principal curvature tuple of cell j with multiplicities expanded.
    pub fn principal(&self, j: usize) -> Vec<f64> {
        let mut p = vec![self.kappa_theta[j]];
        p.extend(std::iter::repeat_n(self.kappa_phi[j], self.amb.n - 2));
        p
    }

    pub fn min_principal(&self) -> f64 {
        let mut m = f64::INFINITY;
        for j in 0..self.n_cells() {
            m = m.min(self.kappa_theta[j]).min(self.kappa_phi[j]);
        }
        m
    }
}

/// Compute the full geometry of a surface from its radial profile.
///
/// For exact spheres the finite differences vanish identically and the
/// closed forms kappa_i = k coth(kr), H = (n-1) k coth(kr) emerge exactly.
pub fn compute_geometry(s: &RadialSurface) -> Result<SurfaceGeometry> {
    compute_geometry_profile(&s.amb, &s.grid, &s.radii())
}

/// Geometry from an explicit profile on a grid. Internal entry point shared
/// by the flow and the exterior foliation; accepts any n >= 3 (the caller
/// guarantees angle-dependent profiles only occur for n = 3).
pub fn compute_geometry_profile(
    amb: &AmbientSpace,
    grid: &ThetaGrid,
    radii: &[f64],
) -> Result<SurfaceGeometry> {
    let n = amb.n;
    let k = amb.k;
    let nc = grid.n_cells;
    if radii.len() != nc {
        return Err(Error::GridMismatch {
            left: "profile",
            right: "grid",
            detail: format!("{} radii vs {} cells", radii.len(), nc),
        });
    }
    if let Some((j, &r)) = radii
        .iter()
        .enumerate()
        .find(|(_, &r)| !(r > 0.0) || !r.is_finite())
    {
        return Err(Error::InvalidSurface(format!(
            "non-positive radius {r} at cell {j}"
        )));
    }

    let u = radii;
    let du = grid.d1_even(u);
    let ddu = grid.d2_even(u);

    let mut geo = SurfaceGeometry {
        amb: *amb,
        r: u.to_vec(),
        dr: du.clone(),
        graph_v: vec![0.0; nc],
        g_theta: vec![0.0; nc],
        g_phi: vec![0.0; nc],
        kappa_theta: vec![0.0; nc],
        kappa_phi: vec![0.0; nc],
        h_mean: vec![0.0; nc],
        a_norm_sq: vec![0.0; nc],
        r_intrinsic: vec![0.0; nc],
        area: vec![0.0; nc],
        laplacian: ModeLaplacian {
            cell_weight: vec![0.0; nc],
            face_coef: vec![0.0; nc + 1],
            zeroth: vec![0.0; nc],
        },
        amp_laplacian: ModeLaplacian {
            cell_weight: vec![0.0; nc],
            face_coef: vec![0.0; nc + 1],
            zeroth: vec![0.0; nc],
        },
        pos_x: vec![0.0; nc],
        pos_axis: vec![0.0; nc],
        pos_time: vec![0.0; nc],
        normal_x: vec![0.0; nc],
        normal_axis: vec![0.0; nc],
        normal_time: vec![0.0; nc],
    };

    let m = n - 2; // rotational multiplicity and sin exponent
    let mi = m as i32;
    let omega = AmbientSpace::unit_sphere_area(m); // volume of the unit S^{n-2}
    let sints = grid.sin_power_cell_integrals(m);
    let sints_amp = grid.sin_power_cell_integrals(m + 2);

    let nf = n as f64;
    // a_j = lam^m / sqrt(E): the smooth even factor whose log-derivative
    // enters the amplitude operator's zeroth coefficient.
    let mut a_factor = vec![0.0; nc];

    for j in 0..nc {
        let theta = grid.centers[j];
        let (sin_t, cos_t) = theta.sin_cos();
        let lam = (k * u[j]).sinh() / k;
        let dlam = (k * u[j]).cosh();
        let g_tt = lam * lam + du[j] * du[j];
        let v = g_tt.sqrt() / lam;

        let kappa_t = (-ddu[j] + lam * dlam + 2.0 * dlam / lam * du[j] * du[j]) / (v * g_tt);
        let kappa_p = (lam * dlam - cos_t / sin_t * du[j]) / (v * lam * lam);
        let h = kappa_t + (nf - 2.0) * kappa_p;
        let a2 = kappa_t * kappa_t + (nf - 2.0) * kappa_p * kappa_p;

        geo.graph_v[j] = v;
        geo.g_theta[j] = g_tt;
        geo.g_phi[j] = (lam * sin_t) * (lam * sin_t);
        geo.kappa_theta[j] = kappa_t;
        geo.kappa_phi[j] = kappa_p;
        geo.h_mean[j] = h;
        geo.a_norm_sq[j] = a2;
        geo.r_intrinsic[j] = h * h - a2 - (nf - 1.0) * (nf - 2.0) * k * k;
        // Area density sqrt(det g) = sqrt(E) lam^m sin^m; the sin power is
        // integrated exactly over the cell so sphere areas are exact.
        let sqrt_e = g_tt.sqrt();
        geo.area[j] = omega * sqrt_e * lam.powi(mi) * sints[j];
        geo.laplacian.cell_weight[j] = sqrt_e * lam.powi(mi) * sints[j];
        geo.amp_laplacian.cell_weight[j] = sqrt_e * lam.powi(mi) * sints_amp[j];
        a_factor[j] = lam.powi(mi) / sqrt_e;

        // Meridian position X = (lam sin, 0.., lam cos ; cosh(ku)/k) and
        // outward normal nu = (1/v)(cosh(ku) dir - (u'/lam) dtheta_dir ; sinh(ku)).
        geo.pos_x[j] = lam * sin_t;
        geo.pos_axis[j] = lam * cos_t;
        geo.pos_time[j] = dlam / k;
        geo.normal_x[j] = (dlam * sin_t - du[j] / lam * cos_t) / v;
        geo.normal_axis[j] = (dlam * cos_t + du[j] / lam * sin_t) / v;
        geo.normal_time[j] = (k * u[j]).sinh() / v;
    }

    // Face conductances, evaluated at the face from midpoint-interpolated
    // profile data: scalar C = (lam sin)^m / sqrt(E) and amplitude
    // C~ = C sin^2. Pole faces carry no flux.
    for f in 1..nc {
        let theta_f = grid.face(f);
        let sin_f = theta_f.sin();
        let u_f = 0.5 * (u[f - 1] + u[f]);
        let du_f = (u[f] - u[f - 1]) / grid.d_theta;
        let lam_f = (k * u_f).sinh() / k;
        let sqrt_e = (lam_f * lam_f + du_f * du_f).sqrt();
        let c_scalar = (lam_f * sin_f).powi(mi) / sqrt_e;
        geo.laplacian.face_coef[f] = c_scalar / grid.d_theta;
        geo.amp_laplacian.face_coef[f] = c_scalar * sin_f * sin_f / grid.d_theta;
    }

    // Zeroth-order coefficient of the amplitude operator:
    //   c = a' cos / (sqrt(E) lam^m sin) - (m/E)(1 + (u'/(lam sin))^2) - 1/E,
    // all pieces smooth and even across the poles.
    let da = grid.d1_even(&a_factor);
    for j in 0..nc {
        let theta = grid.centers[j];
        let (sin_t, cos_t) = theta.sin_cos();
        let lam = (k * u[j]).sinh() / k;
        let e_metric = geo.g_theta[j];
        let ratio = du[j] / (lam * sin_t);
        geo.amp_laplacian.zeroth[j] = da[j] * cos_t / (e_metric.sqrt() * lam.powi(mi) * sin_t)
            - (m as f64) / e_metric * (1.0 + ratio * ratio)
            - 1.0 / e_metric;
    }

    Ok(geo)
}

/// Angular drift rate of normal-flow trajectories per unit normal speed:
/// a point moving normally off the surface changes its polar coordinate at
/// rate -speed * drift with drift = u' / (v lam^2). Grid-fixed time
/// derivatives convert to the normal-Lagrangian gauge of the collar
/// coordinates through this coefficient; it vanishes on spheres.
pub fn drift_coefficient(geo: &SurfaceGeometry) -> Vec<f64> {
    (0..geo.n_cells())
        .map(|j| geo.dr[j] * geo.graph_v[j] / geo.g_theta[j])
        .collect()
}

/// Membership of a principal-curvature tuple in the Gamma_2 cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma2 {
    Inside,
    Boundary(f64),
    Outside,
}

/// Evaluate sigma_1 = sum kappa_i and sigma_2 = sum_{i<j} kappa_i kappa_j
/// and classify against the open cone {sigma_1 > 0, sigma_2 > 0}.
pub fn gamma2_membership(principal: &[f64], eps: f64) -> Gamma2 {
    let sigma1: f64 = principal.iter().sum();
    let sum_sq: f64 = principal.iter().map(|x| x * x).sum();
    let sigma2 = 0.5 * (sigma1 * sigma1 - sum_sq);
    let scale = sum_sq.max(1.0);
    let margin = eps * scale;
    if sigma1 > margin && sigma2 > margin {
        Gamma2::Inside
    } else if sigma1 < -margin || sigma2 < -margin {
        Gamma2::Outside
    } else {
        Gamma2::Boundary(margin)
    }
}

/// Elementary symmetric polynomials sigma_1, sigma_2 of a slice cell.
pub fn sigma12(geo: &SurfaceGeometry, j: usize) -> (f64, f64) {
    let sigma1 = geo.h_mean[j];
    let sigma2 = 0.5 * (geo.h_mean[j] * geo.h_mean[j] - geo.a_norm_sq[j]);
    (sigma1, sigma2)
}

/// Per-cell check of the scalar-curvature condition R > -(n-1)(n-2)k^2,
/// evaluated through both equivalent forms; the two must agree in sign.
pub fn scalar_condition_check(geo: &SurfaceGeometry) -> Vec<bool> {
    let k = geo.amb.k;
    let nf = geo.amb.n as f64;
    (0..geo.n_cells())
        .map(|j| {
            let lhs = geo.r_intrinsic[j] + (nf - 1.0) * (nf - 2.0) * k * k;
            let rhs = geo.h_mean[j] * geo.h_mean[j] - geo.a_norm_sq[j];
            debug_assert_eq!(
                lhs > 0.0,
                rhs > 0.0,
                "traced Gauss identity broke at cell {j}"
            );
            lhs > 0.0 && rhs > 0.0
        })
        .collect()
}
