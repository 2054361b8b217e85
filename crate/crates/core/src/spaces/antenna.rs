use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::mmgraph::{Coord, MMGraph, ScalarField};
use crate::scalar::Real;

/// How the infinite antenna is cut down to a finite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Vertices with `|m| + |n| <= max_radius`; the ball of that radius at
    /// the origin.
    Diamond { max_radius: i64 },
    /// Arms `|m| <= arm_extent` on every row `|n| <= spine_extent`.
    Rect { arm_extent: i64, spine_extent: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntennaSpec {
    pub truncation: Truncation,
}

impl AntennaSpec {
    pub fn diamond(max_radius: i64) -> Self {
        AntennaSpec {
            truncation: Truncation::Diamond { max_radius },
        }
    }

    pub fn rect(arm_extent: i64, spine_extent: i64) -> Self {
        AntennaSpec {
            truncation: Truncation::Rect {
                arm_extent,
                spine_extent,
            },
        }
    }

    /// Smallest diamond truncation that keeps `B(0, 3 R)` unclipped.
    pub fn guarded_for_radius(max_ball_radius: i64) -> Self {
        Self::diamond(3 * max_ball_radius + 1)
    }

    fn contains(&self, m: i64, n: i64) -> bool {
        match self.truncation {
            Truncation::Diamond { max_radius } => m.abs() + n.abs() <= max_radius,
            Truncation::Rect {
                arm_extent,
                spine_extent,
            } => m.abs() <= arm_extent && n.abs() <= spine_extent,
        }
    }
}

/// The antenna graph: a vertical spine `m = 0` with a horizontal arm on
/// every integer row, under the counting measure.
///
/// Vertex `(m, n)` carries coordinate `[m, n, 0]`. Vertical edges exist only
/// on the spine.
pub fn antenna_graph<T: Real>(spec: &AntennaSpec) -> Result<MMGraph<T>> {
    let (rows, arm_of) = match spec.truncation {
        Truncation::Diamond { max_radius } => {
            if max_radius < 1 {
                return param("antenna max_radius must be >= 1");
            }
            (max_radius, None)
        }
        Truncation::Rect {
            arm_extent,
            spine_extent,
        } => {
            if arm_extent < 1 || spine_extent < 1 {
                return param("antenna extents must be >= 1");
            }
            (spine_extent, Some(arm_extent))
        }
    };
    let arm_len = |n: i64| match arm_of {
        Some(a) => a,
        None => rows - n.abs(),
    };

    let mut coords: Vec<Coord> = Vec::new();
    let mut row_start = Vec::with_capacity((2 * rows + 1) as usize);
    for n in -rows..=rows {
        row_start.push(coords.len());
        let a = arm_len(n);
        for m in -a..=a {
            coords.push([m, n, 0]);
        }
    }
    let id = |m: i64, n: i64| -> usize {
        let a = arm_len(n);
        row_start[(n + rows) as usize] + (m + a) as usize
    };

    let mut edges = Vec::with_capacity(coords.len() + 2 * rows as usize);
    for n in -rows..=rows {
        let a = arm_len(n);
        for m in -a..a {
            edges.push((id(m, n), id(m + 1, n)));
        }
        if n < rows {
            edges.push((id(0, n), id(0, n + 1)));
        }
    }
    let frontier: Vec<bool> = coords
        .iter()
        .map(|&[m, n, _]| {
            let horizontal_clipped = !spec.contains(m + 1, n) || !spec.contains(m - 1, n);
            let vertical_clipped = m == 0 && (!spec.contains(0, n + 1) || !spec.contains(0, n - 1));
            horizontal_clipped || vertical_clipped
        })
        .collect();

    let label = match spec.truncation {
        Truncation::Diamond { max_radius } => format!("antenna(diamond {max_radius})"),
        Truncation::Rect {
            arm_extent,
            spine_extent,
        } => format!("antenna(rect {arm_extent}x{spine_extent})"),
    };
    MMGraph::from_edges(coords.len(), &edges, None, label)?
        .with_frontier(frontier)?
        .with_coords(coords)
}

/// The height field `u(m, n) = n`.
pub fn antenna_height_field<T: Real>(g: &MMGraph<T>) -> ScalarField<T> {
    ScalarField::from_fn(g, |v| T::lit(g.coord(v).map_or(0, |c| c[1]) as f64))
}

/// Closed forms for the height field on antenna balls centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaOracles {
    pub radius: i64,
    /// `sum_{B(R)} |u - u_R|^sigma = 2 sum_{n=1}^{R} (2(R-n)+1) n^sigma`.
    pub numerator: f64,
    /// `sum_{B(C R)} (delta u)^sigma = (2 floor(C R) + 1) 2^{sigma/2}`.
    pub gradient_mass: f64,
    /// `int_0^R (2x+1)(R-x)^sigma dx`; the numerator is about twice this.
    pub integral_comparison: f64,
    /// `numerator / (R^beta gradient_mass)`.
    pub ratio: f64,
    /// Ball volume `2R^2 + 2R + 1`.
    pub volume: i64,
}

/// Independent closed-form reference values for antenna Poincaré tests.
pub fn antenna_oracles(radius: i64, sigma: f64, beta: f64, outer_factor: f64) -> Result<AntennaOracles> {
    if radius < 1 {
        return param("antenna oracle radius must be >= 1");
    }
    let r = radius as f64;
    let numerator = 2.0
        * (1..=radius)
            .map(|n| (2 * (radius - n) + 1) as f64 * (n as f64).powf(sigma))
            .sum::<f64>();
    let spine = 2.0 * (outer_factor * r).floor() + 1.0;
    let gradient_mass = spine * 2f64.powf(sigma / 2.0);
    let integral_comparison =
        (2.0 * r + 1.0) * r.powf(sigma + 1.0) / (sigma + 1.0) - 2.0 * r.powf(sigma + 2.0) / (sigma + 2.0);
    Ok(AntennaOracles {
        radius,
        numerator,
        gradient_mass,
        integral_comparison,
        ratio: numerator / (r.powf(beta) * gradient_mass),
        volume: 2 * radius * radius + 2 * radius + 1,
    })
}
