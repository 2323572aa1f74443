//! Parsers for the short textual forms accepted on the command line.

use std::path::Path;

use discrepancy_core::erdos_turan::RRule;
use discrepancy_core::experiment::{Family, RChoice};
use discrepancy_core::pointsets::named_constant;
use discrepancy_core::sphere::Cap;
use discrepancy_core::{PointSet, PointSpec, SetSpec};

pub fn list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("bad {what} entry `{v}`")))
        .collect()
}

/// A number or one of the named irrationals (`sqrt2-1`, `sqrt3-1`, `sqrt5-2`, `golden-1`).
pub fn real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    named_constant(t)
        .or_else(|| t.parse().ok())
        .ok_or_else(|| format!("`{t}` is neither a number nor a named constant"))
}

/// Inline JSON (starting with `{`) or a path to a JSON file.
pub fn set(text: &str) -> Result<SetSpec, String> {
    let body = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        std::fs::read_to_string(text).map_err(|e| format!("cannot read set file {text}: {e}"))?
    };
    serde_json::from_str(&body).map_err(|e| format!("bad set JSON: {e}"))
}

/// `lattice:<m>`, `kronecker:<x1,..>:<m>`, `korobov:<g1,..>:<m>`, or a CSV
/// file of points. `d` is the dimension of the set, used for lattices.
pub fn points(text: &str, d: usize) -> Result<PointSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["lattice", m] => Ok(PointSpec::Lattice {
            d,
            m: m.parse().map_err(|_| format!("bad lattice size `{m}`"))?,
        }),
        ["kronecker", x, m] => Ok(PointSpec::Kronecker {
            x: x.split(',').map(real).collect::<Result<_, _>>()?,
            m: m.parse().map_err(|_| format!("bad point count `{m}`"))?,
        }),
        ["korobov", g, m] => Ok(PointSpec::Korobov {
            g: list(g, "generator")?,
            m: m.parse().map_err(|_| format!("bad modulus `{m}`"))?,
        }),
        _ if Path::new(text).is_file() => {
            let body = std::fs::read_to_string(text).map_err(|e| format!("cannot read {text}: {e}"))?;
            let ps = PointSet::from_csv(&body).map_err(|e| e.to_string())?;
            Ok(ps.spec)
        }
        _ => Err(format!("unrecognized point descriptor `{text}`")),
    }
}

fn rule(name: &str, epsilon: f64) -> Result<RRule, String> {
    match name {
        "lattice" => Ok(RRule::Lattice),
        "kronecker" => Ok(RRule::Kronecker { epsilon }),
        "glp" => Ok(RRule::Glp),
        _ => Err(format!("unknown R rule `{name}` (lattice, kronecker, glp)")),
    }
}

/// `<value>`, `auto:<rule>` or `search:<rule>`.
pub fn r_choice(text: &str, alpha: f64, beta: f64, epsilon: f64) -> Result<RChoice, String> {
    if let Some(name) = text.strip_prefix("auto:") {
        return Ok(RChoice::Auto {
            rule: rule(name, epsilon)?,
            alpha,
            beta,
        });
    }
    if let Some(name) = text.strip_prefix("search:") {
        return Ok(RChoice::Search {
            rule: rule(name, epsilon)?,
            alpha,
            beta,
            grid: discrepancy_core::erdos_turan::default_r_grid(),
        });
    }
    let r: f64 = text.parse().map_err(|_| format!("bad R `{text}`"))?;
    Ok(RChoice::Value { r })
}

/// `coordinate` (with `d`) or a JSON file / inline JSON array of vertices.
pub fn family(text: &str, d: usize) -> Result<Family, String> {
    if text == "coordinate" {
        return Ok(Family::Coordinate { d });
    }
    let body = if text.trim_start().starts_with('[') {
        text.to_string()
    } else {
        std::fs::read_to_string(text).map_err(|e| format!("cannot read {text}: {e}"))?
    };
    let vertices = serde_json::from_str(&body).map_err(|e| format!("bad vertex JSON: {e}"))?;
    Ok(Family::Polytope { vertices })
}

pub fn vector3(text: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = list(text, "coordinate")?;
    <[f64; 3]>::try_from(v).map_err(|_| format!("`{text}` needs three coordinates"))
}

/// `px,py,pz,theta`.
pub fn cap(text: &str) -> Result<Cap, String> {
    let v: Vec<f64> = list(text, "cap")?;
    if v.len() != 4 {
        return Err(format!("cap `{text}` needs pole x,y,z and an angle"));
    }
    Cap::new([v[0], v[1], v[2]], v[3]).map_err(|e| e.to_string())
}
