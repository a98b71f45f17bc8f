//! CSV and JSON artifacts: every stage dumps its fields with 17
//! significant digits (exact f64 round-trip) behind a comment line that
//! embeds the configuration hash, and every stage can be rebuilt from the
//! upstream dumps for stage-wise runs.

use crate::error::{Error, Result};
use crate::exterior::{DistanceFoliation, ExteriorFoliation};
use crate::geometry::compute_geometry_profile;
use crate::grid::ThetaGrid;
use crate::icf::{eta_from_geometry, CollarFoliation};
use crate::mass::{MassReport, MassSeries};
use crate::minkowski::{classify_causal, AmbientSpace};
use crate::transport::{TransportField, WeightSlice};
use std::fmt::Write as _;
use std::path::Path;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Split a CSV text into the comment header (first `#` line) and data rows.
fn read_csv(path: &Path, expect_header: &str) -> Result<(String, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut comment = String::new();
    let mut header_seen = false;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') {
            comment.push_str(line);
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if !line.starts_with(expect_header) {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    detail: format!("expected header `{expect_header}`, got `{line}`"),
                });
            }
            header_seen = true;
            continue;
        }
        rows.push(line.split(',').map(|s| s.trim().to_string()).collect());
    }
    if !header_seen {
        return Err(Error::Parse {
            path: path.display().to_string(),
            detail: "missing header row".to_string(),
        });
    }
    Ok((comment, rows))
}

fn parse_f64(path: &Path, token: &str) -> Result<f64> {
    token.parse::<f64>().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        detail: format!("bad float `{token}`"),
    })
}

fn comment_field(comment: &str, key: &str) -> Option<String> {
    comment
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")).map(|v| v.to_string()))
}

pub fn embedded_hash(comment: &str) -> Option<String> {
    comment_field(comment, "config_hash")
}

// ---------------------------------------------------------------- collar

pub fn write_collar_csv(path: &Path, c: &CollarFoliation, config_hash: &str) -> Result<()> {
    let mut text = format!(
        "# config_hash={config_hash} n={} k={} N={} M={}\n",
        c.amb.n,
        fmt(c.amb.k),
        c.n_cells(),
        c.n_slices()
    );
    text.push_str("t,theta,r,eta,H_eta,kappa1,kappa2,R_t,area_element\n");
    for (i, geo) in c.slices.iter().enumerate() {
        for j in 0..c.n_cells() {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{},{}",
                fmt(c.times[i]),
                fmt(c.grid.centers[j]),
                fmt(geo.r[j]),
                fmt(c.eta[i][j]),
                fmt(geo.h_mean[j]),
                fmt(geo.kappa_theta[j]),
                fmt(geo.kappa_phi[j]),
                fmt(geo.r_intrinsic[j]),
                fmt(geo.area[j]),
            );
        }
    }
    write_file(path, &text)
}

/// Rebuild a collar from its dump: radii and times round-trip exactly, and
/// all derived fields are recomputed from them.
pub fn read_collar_csv(path: &Path) -> Result<(CollarFoliation, String)> {
    let (comment, rows) = read_csv(path, "t,theta,r,")?;
    let bad = |detail: String| Error::Parse {
        path: path.display().to_string(),
        detail,
    };
    let n: usize = comment_field(&comment, "n")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing n=".into()))?;
    let k: f64 = comment_field(&comment, "k")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing k=".into()))?;
    let n_cells: usize = comment_field(&comment, "N")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing N=".into()))?;
    let hash = embedded_hash(&comment).ok_or_else(|| bad("missing config_hash=".into()))?;
    if rows.is_empty() || rows.len() % n_cells != 0 {
        return Err(bad(format!(
            "{} rows not a multiple of N = {n_cells}",
            rows.len()
        )));
    }

    let amb = AmbientSpace::new(n, k)?;
    let grid = ThetaGrid::new(n_cells)?;
    let n_slices = rows.len() / n_cells;
    let mut times = Vec::with_capacity(n_slices);
    let mut slices = Vec::with_capacity(n_slices);
    for i in 0..n_slices {
        let chunk = &rows[i * n_cells..(i + 1) * n_cells];
        times.push(parse_f64(path, &chunk[0][0])?);
        let radii: Vec<f64> = chunk
            .iter()
            .map(|row| parse_f64(path, &row[2]))
            .collect::<Result<_>>()?;
        slices.push(compute_geometry_profile(&amb, &grid, &radii)?);
    }
    let eta: Vec<Vec<f64>> = slices.iter().map(eta_from_geometry).collect();
    // sanity: the stored eta column must match the recomputed flow lapse
    for (i, e) in eta.iter().enumerate() {
        let stored = parse_f64(path, &rows[i * n_cells][3])?;
        if (stored - e[0]).abs() > 1e-10 * (1.0 + stored.abs()) {
            return Err(bad(format!(
                "slice {i}: stored eta {stored} disagrees with recomputed {}",
                e[0]
            )));
        }
    }
    let h_one: Vec<Vec<f64>> = slices
        .iter()
        .zip(&eta)
        .map(|(geo, e)| (0..n_cells).map(|j| e[j] * geo.h_mean[j]).collect())
        .collect();
    let a_one_sq: Vec<Vec<f64>> = slices
        .iter()
        .zip(&eta)
        .map(|(geo, e)| {
            (0..n_cells)
                .map(|j| e[j] * e[j] * geo.a_norm_sq[j])
                .collect()
        })
        .collect();
    let drift: Vec<Vec<f64>> = slices
        .iter()
        .zip(&eta)
        .map(|(geo, e)| {
            crate::geometry::drift_coefficient(geo)
                .iter()
                .zip(e)
                .map(|(d, eta)| eta * d)
                .collect()
        })
        .collect();
    let dt_h_one = crate::icf::compute_dt_h_one(&grid, &times, &h_one, &drift);
    Ok((
        CollarFoliation {
            amb,
            grid,
            times,
            slices,
            eta,
            h_one,
            a_one_sq,
            dt_h_one,
            drift,
        },
        hash,
    ))
}

// ----------------------------------------------------------------- lapse

pub fn write_lapse_csv(
    path: &Path,
    c: &CollarFoliation,
    u: &[Vec<f64>],
    residual: &[Vec<f64>],
    config_hash: &str,
) -> Result<()> {
    let mut text = format!("# config_hash={config_hash}\n");
    text.push_str("t,theta,u,H_u,residual\n");
    for i in 0..c.n_slices() {
        for j in 0..c.n_cells() {
            let _ = writeln!(
                text,
                "{},{},{},{},{}",
                fmt(c.times[i]),
                fmt(c.grid.centers[j]),
                fmt(u[i][j]),
                fmt(c.h_one[i][j] / u[i][j]),
                fmt(residual[i][j]),
            );
        }
    }
    write_file(path, &text)
}

/// Read the lapse values back, validated against the collar's shape.
pub fn read_lapse_csv(path: &Path, c: &CollarFoliation) -> Result<(Vec<Vec<f64>>, String)> {
    let (comment, rows) = read_csv(path, "t,theta,u,")?;
    let hash = embedded_hash(&comment).ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        detail: "missing config_hash=".into(),
    })?;
    let (n_cells, n_slices) = (c.n_cells(), c.n_slices());
    if rows.len() != n_cells * n_slices {
        return Err(Error::GridMismatch {
            left: "lapse csv",
            right: "collar",
            detail: format!("{} rows vs {} expected", rows.len(), n_cells * n_slices),
        });
    }
    let mut u = vec![vec![0.0; n_cells]; n_slices];
    for i in 0..n_slices {
        let t = parse_f64(path, &rows[i * n_cells][0])?;
        if t != c.times[i] {
            return Err(Error::GridMismatch {
                left: "lapse csv",
                right: "collar",
                detail: format!("slice {i}: t = {t} vs collar {}", c.times[i]),
            });
        }
        for j in 0..n_cells {
            u[i][j] = parse_f64(path, &rows[i * n_cells + j][2])?;
        }
    }
    Ok((u, hash))
}

// -------------------------------------------------------------- exterior

pub fn write_exterior_csv(path: &Path, ext: &ExteriorFoliation, config_hash: &str) -> Result<()> {
    let k = ext.fol.amb.k;
    let mut text = format!("# config_hash={config_hash}\n");
    text.push_str("rho,theta,s,v,H_rho,H_v,R_rho,v_minus_one\n");
    for (l, geo) in ext.fol.levels.iter().enumerate() {
        for j in 0..geo.n_cells() {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{}",
                fmt(ext.fol.rho[l]),
                fmt(ext.fol.grid.centers[j]),
                fmt((k * geo.r[j]).sinh() / k),
                fmt(ext.v[l][j]),
                fmt(geo.h_mean[j]),
                fmt(ext.h_v[l][j]),
                fmt(geo.r_intrinsic[j]),
                fmt(ext.v_minus_one[l][j]),
            );
        }
    }
    write_file(path, &text)
}

/// Rebuild the exterior foliation from its dump; level geometry is
/// recomputed from the area radii, the extension factor is taken from the
/// v_minus_one column to preserve tail accuracy.
pub fn read_exterior_csv(
    path: &Path,
    amb: &AmbientSpace,
    n_cells: usize,
) -> Result<(ExteriorFoliation, String)> {
    let (comment, rows) = read_csv(path, "rho,theta,s,")?;
    let bad = |detail: String| Error::Parse {
        path: path.display().to_string(),
        detail,
    };
    let hash = embedded_hash(&comment).ok_or_else(|| bad("missing config_hash=".into()))?;
    if rows.is_empty() || rows.len() % n_cells != 0 {
        return Err(bad(format!(
            "{} rows not a multiple of N = {n_cells}",
            rows.len()
        )));
    }
    let grid = ThetaGrid::new(n_cells)?;
    let n_levels = rows.len() / n_cells;
    let k = amb.k;
    let mut rho = Vec::with_capacity(n_levels);
    let mut levels = Vec::with_capacity(n_levels);
    let mut v = Vec::with_capacity(n_levels);
    let mut w = Vec::with_capacity(n_levels);
    for l in 0..n_levels {
        let chunk = &rows[l * n_cells..(l + 1) * n_cells];
        rho.push(parse_f64(path, &chunk[0][0])?);
        let radii: Vec<f64> = chunk
            .iter()
            .map(|row| Ok((k * parse_f64(path, &row[2])?).asinh() / k))
            .collect::<Result<_>>()?;
        levels.push(compute_geometry_profile(amb, &grid, &radii)?);
        v.push(
            chunk
                .iter()
                .map(|row| parse_f64(path, &row[3]))
                .collect::<Result<Vec<f64>>>()?,
        );
        w.push(
            chunk
                .iter()
                .map(|row| parse_f64(path, &row[7]))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let h_v: Vec<Vec<f64>> = levels
        .iter()
        .zip(&v)
        .map(|(geo, vs)| geo.h_mean.iter().zip(vs).map(|(h, v)| h / v).collect())
        .collect();
    let fol = DistanceFoliation {
        amb: *amb,
        grid,
        rho,
        levels,
    };
    Ok((
        ExteriorFoliation {
            fol,
            v,
            v_minus_one: w,
            h_v,
            max_solve_residual: 0.0,
        },
        hash,
    ))
}

// ------------------------------------------------------------- transport

pub fn write_transport_csv(
    path: &Path,
    params: &[f64],
    thetas: &[f64],
    field: &TransportField,
    eps_causal: f64,
    config_hash: &str,
) -> Result<()> {
    let n = field.dim;
    let mut text = format!("# config_hash={config_hash}\n");
    text.push_str("param,theta");
    for i in 1..=n {
        let _ = write!(text, ",w_{i}");
    }
    text.push_str(",w_t,inner,causal_class\n");
    for (l, &param) in params.iter().enumerate() {
        for j in 0..field.sin_theta.len() {
            let vec = field.vector(l, j);
            let _ = write!(text, "{},{}", fmt(param), fmt(thetas[j]));
            for comp in &vec.spatial {
                let _ = write!(text, ",{}", fmt(*comp));
            }
            let q = field.norm_sq(l, j);
            let class = classify_causal(&vec, eps_causal);
            let _ = writeln!(text, ",{},{},{}", fmt(vec.time), fmt(q), class.kind);
        }
    }
    write_file(path, &text)
}

/// Read a transport dump back into a field on `params.len()` levels.
pub fn read_transport_csv(
    path: &Path,
    grid: &ThetaGrid,
    dim: usize,
    n_levels: usize,
) -> Result<(TransportField, String)> {
    let (comment, rows) = read_csv(path, "param,theta,")?;
    let bad = |detail: String| Error::Parse {
        path: path.display().to_string(),
        detail,
    };
    let hash = embedded_hash(&comment).ok_or_else(|| bad("missing config_hash=".into()))?;
    let n_cells = grid.n_cells;
    if rows.len() != n_levels * n_cells {
        return Err(bad(format!(
            "{} rows, expected {} levels x {} cells",
            rows.len(),
            n_levels,
            n_cells
        )));
    }
    let sin_theta: Vec<f64> = grid.centers.iter().map(|t| t.sin()).collect();
    let mut slices = Vec::with_capacity(n_levels);
    for l in 0..n_levels {
        let chunk = &rows[l * n_cells..(l + 1) * n_cells];
        let mut slice = WeightSlice::zero(n_cells);
        for (j, row) in chunk.iter().enumerate() {
            // columns: param, theta, w_1..w_n, w_t, inner, class
            let w_x = parse_f64(path, &row[2])?;
            slice.amp_x[j] = w_x / sin_theta[j];
            slice.w_axis[j] = parse_f64(path, &row[1 + dim])?;
            slice.w_time[j] = parse_f64(path, &row[2 + dim])?;
        }
        slices.push(slice);
    }
    Ok((
        TransportField {
            slices,
            sin_theta,
            dim,
            causal_margin: 0.0,
        },
        hash,
    ))
}

// ------------------------------------------------------------ mass series

pub fn write_mass_series_csv(path: &Path, series: &[MassSeries], config_hash: &str) -> Result<()> {
    let mut text = format!("# config_hash={config_hash}\n");
    text.push_str("zeta_index,series,param,value\n");
    for (idx, s) in series.iter().enumerate() {
        for (name, values) in [
            ("interior", &s.interior),
            ("exterior", &s.exterior),
            ("limit", &s.limit),
        ] {
            for &(param, value) in values.iter() {
                let _ = writeln!(text, "{idx},{name},{},{}", fmt(param), fmt(value));
            }
        }
    }
    write_file(path, &text)
}

pub fn write_report_json(path: &Path, report: &MassReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}

pub fn read_report_json(path: &Path) -> Result<MassReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}
