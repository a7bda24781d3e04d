//! Initial tangent fields.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FrameRoute, PhaseMode};
use crate::spectral::{norm, TorusGrid, VectorField3};

/// Largest `|‖T‖ − 1|` accepted from a tangent file before normalisation.
const FILE_UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `(cos 2x sin x, sin 2x sin x, cos x)`.
    Smooth,
    /// Planar stadium-like curve: two straight pieces joined by half circles.
    Rough,
    /// Great circle `(cos x, sin x, 0)`.
    Circle,
    /// Tangent samples read from `input_file`.
    File,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Smooth => "smooth",
            Preset::Rough => "rough",
            Preset::Circle => "circle",
            Preset::File => "file",
        }
    }

    /// Tangent field on `n` nodes. `File` needs [`load_tangent_file`] instead.
    pub fn tangent(self, n: usize) -> Result<VectorField3> {
        match self {
            Preset::Smooth => preset_smooth(n),
            Preset::Rough => preset_rough(n),
            Preset::Circle => preset_circle(n),
            Preset::File => Err(Error::InvalidConfig(
                "the file preset needs an input file".into(),
            )),
        }
    }

    /// Frame construction that suits the preset.
    pub fn frame_route(self) -> FrameRoute {
        match self {
            Preset::Rough => FrameRoute::Flat([0.0, 0.0, 1.0]),
            _ => FrameRoute::Frenet(PhaseMode::General),
        }
    }

    /// Spatial offset at which the preset is sampled on an `n`-node grid,
    /// i.e. node `x_j` carries the value at `x_j + offset`.
    pub fn sample_offset(self, n: usize) -> f64 {
        match self {
            Preset::Rough => PI / n as f64,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(Preset::Smooth),
            "rough" => Ok(Preset::Rough),
            "circle" => Ok(Preset::Circle),
            "file" => Ok(Preset::File),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

pub fn preset_smooth(n: usize) -> Result<VectorField3> {
    let grid = TorusGrid::new(n)?;
    Ok(VectorField3::from_fn(grid, |x| {
        [
            (2.0 * x).cos() * x.sin(),
            (2.0 * x).sin() * x.sin(),
            x.cos(),
        ]
    }))
}

pub fn preset_circle(n: usize) -> Result<VectorField3> {
    let grid = TorusGrid::new(n)?;
    Ok(VectorField3::from_fn(grid, |x| [x.cos(), x.sin(), 0.0]))
}

/// Piecewise tangent on `[−π, π)`.
pub fn rough_tangent(x: f64) -> [f64; 3] {
    // Wrap into [−π, π).
    let x = (x + PI).rem_euclid(2.0 * PI) - PI;
    if x < -FRAC_PI_2 {
        [(2.0 * x + PI).cos(), (2.0 * x + PI).sin(), 0.0]
    } else if x < 0.0 {
        [1.0, 0.0, 0.0]
    } else if x < FRAC_PI_2 {
        [(2.0 * x).cos(), (2.0 * x).sin(), 0.0]
    } else {
        [-1.0, 0.0, 0.0]
    }
}

/// The kinks sit at multiples of `π/2`; sampling half a cell off the nodes
/// keeps them strictly between grid points.
pub fn preset_rough(n: usize) -> Result<VectorField3> {
    if n % 4 != 0 {
        return Err(Error::InvalidConfig(format!(
            "the rough preset needs a mode count divisible by 4, got {n}"
        )));
    }
    let grid = TorusGrid::new(n)?;
    let offset = Preset::Rough.sample_offset(n);
    Ok(VectorField3::from_fn(grid, |x| rough_tangent(x + offset)))
}

/// Reads `x y z` rows (whitespace or comma separated, `#` comments) and
/// normalises them; the row count sets the grid size.
pub fn load_tangent_file(path: &Path) -> Result<VectorField3> {
    let text = std::fs::read_to_string(path)?;
    parse_tangent_samples(&text)
}

pub fn parse_tangent_samples(text: &str) -> Result<VectorField3> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected 3 values, found {}",
                lineno + 1,
                vals.len()
            )));
        }
        let v = [vals[0], vals[1], vals[2]];
        let r = norm(v);
        if (r - 1.0).abs() > FILE_UNIT_TOL {
            return Err(Error::NonUnitTangent((r - 1.0).abs()));
        }
        points.push([v[0] / r, v[1] / r, v[2] / r]);
    }
    let grid = TorusGrid::new(points.len())?;
    VectorField3::from_points(grid, &points)
}
