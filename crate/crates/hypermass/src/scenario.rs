//! Scenario configuration: the declarative description of one end-to-end
//! run, loaded from a TOML file, validated, and hashed for provenance.

use crate::error::{Error, Result};
use crate::geometry::RadialSurface;
use crate::mass::MassTolerances;
use crate::minkowski::AmbientSpace;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub ambient: AmbientSection,
    pub surface: SurfaceSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub exterior: ExteriorSection,
    #[serde(default)]
    pub lapse: LapseSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub zeta: ZetaSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AmbientSection {
    pub n: usize,
    pub k: f64,
}

impl Default for AmbientSection {
    fn default() -> Self {
        AmbientSection { n: 3, k: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub kind: String,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub amp: Option<f64>,
    #[serde(default)]
    pub mode: Option<usize>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn default_cells() -> usize {
    128
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub mode: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub profile_file: Option<PathBuf>,
}

impl Default for BoundarySection {
    fn default() -> Self {
        BoundarySection {
            mode: "scale".into(),
            alpha: Some(0.9),
            profile_file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub t_end: f64,
    pub dt: f64,
    pub delta_convex: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            t_end: 1.0,
            dt: 1e-3,
            delta_convex: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ExteriorSection {
    /// Outer radius of the exterior foliation; defaults to 10/k.
    #[serde(default)]
    pub rho_max: Option<f64>,
    /// Number of levels; defaults to 80 per unit rho.
    #[serde(default)]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LapseSection {
    pub dt_factor: f64,
    pub tolerance: f64,
}

impl Default for LapseSection {
    fn default() -> Self {
        LapseSection {
            dt_factor: 1.0,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    pub mono_base: f64,
    pub mono_allowance_coeff: f64,
    pub junction: f64,
    pub class_eps: f64,
    pub eps_causal: f64,
    /// Tail criterion of the exterior series: fitted slope must be
    /// negative or the change over the last quarter below this.
    pub tail_tol: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        let m = MassTolerances::default();
        ToleranceSection {
            mono_base: m.mono_base,
            mono_allowance_coeff: m.mono_allowance_coeff,
            junction: m.junction,
            class_eps: m.class_eps,
            eps_causal: m.eps_causal,
            tail_tol: 1e-6,
        }
    }
}

impl ToleranceSection {
    pub fn mass_tolerances(&self) -> MassTolerances {
        MassTolerances {
            mono_base: self.mono_base,
            mono_allowance_coeff: self.mono_allowance_coeff,
            junction: self.junction,
            class_eps: self.class_eps,
            eps_causal: self.eps_causal,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ZetaSection {
    pub seed: u64,
    pub count: usize,
}

impl Default for ZetaSection {
    fn default() -> Self {
        ZetaSection { seed: 7, count: 8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        let s: Scenario =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Scenario::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient.n < 3 {
            return Err(Error::Config(format!(
                "ambient.n = {} must be >= 3",
                self.ambient.n
            )));
        }
        if !(self.ambient.k > 0.0) {
            return Err(Error::Config(format!(
                "ambient.k = {} must be > 0",
                self.ambient.k
            )));
        }
        match self.surface.kind.as_str() {
            "sphere" => {
                if !self.surface.r0.map(|r| r > 0.0).unwrap_or(false) {
                    return Err(Error::Config("surface.r0 must be set and positive".into()));
                }
            }
            "perturbed_sphere" => {
                if !self.surface.r0.map(|r| r > 0.0).unwrap_or(false)
                    || self.surface.amp.is_none()
                    || self.surface.mode.is_none()
                {
                    return Err(Error::Config(
                        "perturbed_sphere needs surface.r0, surface.amp, surface.mode".into(),
                    ));
                }
            }
            "profile" => {
                let Some(path) = &self.surface.path else {
                    return Err(Error::Config(
                        "surface.path must be set for profiles".into(),
                    ));
                };
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "surface profile {} does not exist",
                        path.display()
                    )));
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "surface.kind must be sphere | perturbed_sphere | profile, got {other}"
                )))
            }
        }
        match self.boundary.mode.as_str() {
            "scale" => {
                let Some(a) = self.boundary.alpha else {
                    return Err(Error::Config(
                        "boundary.alpha must be set in scale mode".into(),
                    ));
                };
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::Config(format!(
                        "boundary.alpha = {a} must be in (0, 1]"
                    )));
                }
            }
            "profile" => {
                let Some(path) = &self.boundary.profile_file else {
                    return Err(Error::Config("boundary.profile_file must be set".into()));
                };
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "boundary profile {} does not exist",
                        path.display()
                    )));
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "boundary.mode must be scale | profile, got {other}"
                )))
            }
        }
        if !(self.flow.t_end > 0.0 && self.flow.dt > 0.0 && self.flow.delta_convex > 0.0) {
            return Err(Error::Config(
                "flow.t_end, flow.dt, flow.delta_convex must be > 0".into(),
            ));
        }
        if let Some(r) = self.exterior.rho_max {
            if !(r > 0.0) {
                return Err(Error::Config(format!("exterior.rho_max = {r} must be > 0")));
            }
        }
        if !(self.lapse.dt_factor > 0.0 && self.lapse.dt_factor <= 1.0) {
            return Err(Error::Config("lapse.dt_factor must be in (0, 1]".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("mono_base", t.mono_base),
            ("mono_allowance_coeff", t.mono_allowance_coeff),
            ("junction", t.junction),
            ("class_eps", t.class_eps),
            ("eps_causal", t.eps_causal),
            ("tail_tol", t.tail_tol),
            ("lapse.tolerance", self.lapse.tolerance),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("tolerance {name} = {v} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn ambient_space(&self) -> Result<AmbientSpace> {
        AmbientSpace::new(self.ambient.n, self.ambient.k)
    }

    /// Build the initial surface; a profile file must agree with the
    /// configured ambient data.
    pub fn build_surface(&self) -> Result<RadialSurface> {
        let amb = self.ambient_space()?;
        match self.surface.kind.as_str() {
            "sphere" => RadialSurface::sphere(amb, self.surface.cells, self.surface.r0.unwrap()),
            "perturbed_sphere" => RadialSurface::perturbed_sphere(
                amb,
                self.surface.cells,
                self.surface.r0.unwrap(),
                self.surface.amp.unwrap(),
                self.surface.mode.unwrap(),
            ),
            "profile" => {
                let (n, k, radii) = read_profile_file(self.surface.path.as_ref().unwrap())?;
                if n != amb.n || (k - amb.k).abs() > 1e-14 * amb.k {
                    return Err(Error::Config(format!(
                        "profile file has n = {n}, k = {k}; scenario says n = {}, k = {}",
                        amb.n, amb.k
                    )));
                }
                RadialSurface::profile(amb, radii)
            }
            _ => unreachable!("validated"),
        }
    }

    /// Effective outer radius of the exterior foliation.
    pub fn rho_max(&self) -> f64 {
        self.exterior.rho_max.unwrap_or(10.0 / self.ambient.k)
    }

    /// Effective number of exterior levels: 80 per unit rho, scaled up
    /// when the extension decay rate n k is stiffer than the n = 3, k = 1
    /// reference.
    pub fn levels(&self) -> usize {
        self.exterior.levels.unwrap_or_else(|| {
            let stiffness = (self.ambient.n as f64 * self.ambient.k / 3.0).max(1.0);
            ((80.0 * self.rho_max() * stiffness).ceil() as usize).max(8)
        })
    }

    /// Stable hash of the canonical serialized scenario.
    pub fn config_hash(&self) -> String {
        let canonical = toml::to_string(self).expect("scenario serializes");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

/// Parse an inline surface spec: `sphere:r0=<r>`, `profile:@<file>`, or
/// `perturbed_sphere:r0=<r>,amp=<a>,mode=<m>`.
pub fn parse_surface_spec(spec: &str) -> Result<SurfaceSection> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("surface spec needs kind:args, got `{spec}`")))?;
    let mut section = SurfaceSection {
        kind: kind.to_string(),
        r0: None,
        amp: None,
        mode: None,
        path: None,
        cells: default_cells(),
    };
    match kind {
        "profile" => {
            let path = rest.strip_prefix('@').ok_or_else(|| {
                Error::Config(format!("profile spec is profile:@<file>, got `{spec}`"))
            })?;
            section.path = Some(PathBuf::from(path));
        }
        "sphere" | "perturbed_sphere" => {
            for kv in rest.split(',') {
                let (key, value) = kv.split_once('=').ok_or_else(|| {
                    Error::Config(format!("bad key=value `{kv}` in surface spec"))
                })?;
                match key.trim() {
                    "r0" => section.r0 = Some(parse_num(value)?),
                    "amp" => section.amp = Some(parse_num(value)?),
                    "mode" => {
                        section.mode = Some(parse_num(value)? as usize);
                    }
                    other => return Err(Error::Config(format!("unknown surface key `{other}`"))),
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "surface kind must be sphere | perturbed_sphere | profile, got `{other}`"
            )))
        }
    }
    Ok(section)
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("bad number `{s}`: {e}")))
}

/// Read a plain-text profile file: a header line `n k N` followed by N
/// positive radii (whitespace separated).
pub fn read_profile_file(path: &Path) -> Result<(usize, f64, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut tokens = text.split_whitespace();
    let bad = |what: &str| Error::Parse {
        path: path.display().to_string(),
        detail: format!("missing or malformed {what}"),
    };
    let n: usize = tokens
        .next()
        .ok_or_else(|| bad("n"))?
        .parse()
        .map_err(|_| bad("n"))?;
    let k: f64 = tokens
        .next()
        .ok_or_else(|| bad("k"))?
        .parse()
        .map_err(|_| bad("k"))?;
    let count: usize = tokens
        .next()
        .ok_or_else(|| bad("N"))?
        .parse()
        .map_err(|_| bad("N"))?;
    let radii: Vec<f64> = tokens
        .map(|t| t.parse::<f64>().map_err(|_| bad(&format!("radius `{t}`"))))
        .collect::<Result<_>>()?;
    if radii.len() != count {
        return Err(Error::Parse {
            path: path.display().to_string(),
            detail: format!("header says {count} radii, found {}", radii.len()),
        });
    }
    Ok((n, k, radii))
}

/// Write a profile file in the same format.
pub fn write_profile_file(path: &Path, n: usize, k: f64, radii: &[f64]) -> Result<()> {
    let mut text = format!("{n} {k:.16e} {}\n", radii.len());
    for r in radii {
        text.push_str(&format!("{r:.16e}\n"));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
