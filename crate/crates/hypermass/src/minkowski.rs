//! Lorentzian linear algebra on R^{n,1} and the hyperboloid model of
//! hyperbolic space with sectional curvature -k^2.
//!
//! Coordinate convention: n spatial components followed by one time
//! component, metric signature (+,...,+,-). The hyperboloid is the upper
//! sheet inner(X,X) = -1/k^2, t > 0, so "future-directed" means a positive
//! time component.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ambient hyperbolic space H^n_{-k^2}, realized as a hyperboloid in R^{n,1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    /// Dimension n of the hyperbolic space (>= 3).
    pub n: usize,
    /// Curvature scale k > 0; sectional curvature is -k^2.
    pub k: f64,
}

impl AmbientSpace {
    pub fn new(n: usize, k: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!(
                "ambient dimension n = {n} must be >= 3"
            )));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Config(format!(
                "curvature scale k = {k} must be positive"
            )));
        }
        Ok(AmbientSpace { n, k })
    }

    /// Area of the unit sphere S^d in R^{d+1}.
    pub fn unit_sphere_area(d: usize) -> f64 {
        // omega_d = 2 pi^{(d+1)/2} / Gamma((d+1)/2), evaluated by the
        // half-integer Gamma recurrence.
        let a = (d as f64 + 1.0) / 2.0;
        2.0 * std::f64::consts::PI.powf(a) / gamma_half_integer(d + 1)
    }
}

/// Gamma(m/2) for integer m >= 1.
fn gamma_half_integer(m: usize) -> f64 {
    let mut x = m as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.0 {
        x -= 1.0;
        acc *= x;
    }
    // x is now 1/2 or 1
    if (x - 0.5).abs() < 1e-12 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc
    }
}

/// A vector in Minkowski space R^{n,1}: n spatial components plus one time
/// component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzVector {
    pub spatial: Vec<f64>,
    pub time: f64,
}

impl LorentzVector {
    pub fn new(spatial: Vec<f64>, time: f64) -> Self {
        LorentzVector { spatial, time }
    }

    pub fn zero(n: usize) -> Self {
        LorentzVector {
            spatial: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.spatial.len()
    }

    /// Euclidean norm squared of all n+1 components, the scale used by the
    /// relative tolerances below.
    pub fn euclidean_norm_sq(&self) -> f64 {
        self.spatial.iter().map(|x| x * x).sum::<f64>() + self.time * self.time
    }

    pub fn scaled(&self, c: f64) -> Self {
        LorentzVector {
            spatial: self.spatial.iter().map(|x| c * x).collect(),
            time: c * self.time,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        LorentzVector {
            spatial: self
                .spatial
                .iter()
                .zip(&other.spatial)
                .map(|(a, b)| a + b)
                .collect(),
            time: self.time + other.time,
        }
    }
}

/// Lorentz inner product: sum of spatial products minus the time product.
pub fn lorentz_inner(x: &LorentzVector, y: &LorentzVector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let spatial: f64 = x.spatial.iter().zip(&y.spatial).map(|(a, b)| a * b).sum();
    Ok(spatial - x.time * y.time)
}

/// Causal kind of a Lorentz vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalKind {
    FutureTimelike,
    FutureNull,
    PastTimelike,
    PastNull,
    Spacelike,
    Zero,
}

impl CausalKind {
    /// The kind of -x given the kind of x.
    pub fn time_reflected(self) -> Self {
        match self {
            CausalKind::FutureTimelike => CausalKind::PastTimelike,
            CausalKind::FutureNull => CausalKind::PastNull,
            CausalKind::PastTimelike => CausalKind::FutureTimelike,
            CausalKind::PastNull => CausalKind::FutureNull,
            other => other,
        }
    }

    pub fn is_future_nonspacelike(self) -> bool {
        matches!(self, CausalKind::FutureTimelike | CausalKind::FutureNull)
    }

    pub fn is_past_nonspacelike(self) -> bool {
        matches!(self, CausalKind::PastTimelike | CausalKind::PastNull)
    }
}

impl std::fmt::Display for CausalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CausalKind::FutureTimelike => "FutureTimelike",
            CausalKind::FutureNull => "FutureNull",
            CausalKind::PastTimelike => "PastTimelike",
            CausalKind::PastNull => "PastNull",
            CausalKind::Spacelike => "Spacelike",
            CausalKind::Zero => "Zero",
        };
        f.write_str(s)
    }
}

/// Causal classification together with the tolerance it was made at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalClass {
    pub kind: CausalKind,
    pub eps: f64,
}

/// Classify a Lorentz vector with a relative tolerance.
///
/// The quadratic form q = inner(x,x) is compared against eps * |x|^2 with
/// |x| the Euclidean norm, so the classification is invariant under
/// rescaling x.
pub fn classify_causal(x: &LorentzVector, eps: f64) -> CausalClass {
    debug_assert!(eps >= 0.0);
    let q = {
        let spatial: f64 = x.spatial.iter().map(|a| a * a).sum();
        spatial - x.time * x.time
    };
    let scale = x.euclidean_norm_sq();
    let kind = if q.abs() <= eps * scale && scale.sqrt() <= eps {
        CausalKind::Zero
    } else if q < -eps * scale {
        if x.time > 0.0 {
            CausalKind::FutureTimelike
        } else {
            CausalKind::PastTimelike
        }
    } else if q.abs() <= eps * scale {
        if x.time > 0.0 {
            CausalKind::FutureNull
        } else {
            CausalKind::PastNull
        }
    } else {
        CausalKind::Spacelike
    };
    CausalClass { kind, eps }
}

/// Position vector on the hyperboloid: X = (sinh(kr)/k * dir ; cosh(kr)/k)
/// for a unit direction dir in R^n and geodesic radius r >= 0.
///
/// Satisfies inner(X,X) = -1/k^2 identically.
pub fn hyperboloid_point(amb: &AmbientSpace, unit_dir: &[f64], r: f64) -> Result<LorentzVector> {
    if unit_dir.len() != amb.n {
        return Err(Error::DimensionMismatch {
            expected: amb.n,
            got: unit_dir.len(),
        });
    }
    let norm = unit_dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitDirection { norm });
    }
    if !(r >= 0.0) {
        return Err(Error::Config(format!(
            "geodesic radius r = {r} must be >= 0"
        )));
    }
    let k = amb.k;
    let radial = (k * r).sinh() / k;
    Ok(LorentzVector {
        spatial: unit_dir.iter().map(|d| radial * d).collect(),
        time: (k * r).cosh() / k,
    })
}

/// Squared-norm weight of the hyperbolic Killing spinor attached to a
/// future-null direction: -2k X.zeta, positive for every hyperboloid point.
pub fn spinor_weight(amb: &AmbientSpace, x: &LorentzVector, zeta: &LorentzVector) -> Result<f64> {
    let k = amb.k;
    let q = lorentz_inner(x, x)?;
    let expected = -1.0 / (k * k);
    // Conditioning of q degrades like |X|^2 eps, so tolerate relative error.
    let tol = 1e-8 * (1.0 + x.euclidean_norm_sq());
    if (q - expected).abs() > tol {
        return Err(Error::OffHyperboloid { inner: q, expected });
    }
    let class = classify_causal(zeta, 1e-10);
    if class.kind != CausalKind::FutureNull {
        return Err(Error::NotFutureNull {
            class: class.kind.to_string(),
        });
    }
    Ok(-2.0 * k * lorentz_inner(x, zeta)?)
}
