//! Point-cloud text format.
//!
//! ```text
//! # optional comment lines
//! weighted
//! 0.0 0.0 0.5
//! 1.0 0.0 0.5
//! ```
//!
//! One point per line, whitespace-separated coordinates. With the
//! `weighted` header the last column is the sample weight; without it every
//! point has weight 1.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Metric, PointCloud};

/// Raw coordinates and weights, before a metric is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPoints<T> {
    pub dim: usize,
    pub coords: Vec<T>,
    pub weights: Option<Vec<T>>,
}

/// Metric oracle selected by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricChoice<T> {
    Euclidean,
    Horospherical { scale: T },
    TubeGraphAmbient { link_radius: T },
}

impl<T: Real> RawPoints<T> {
    pub fn into_cloud(self, metric: MetricChoice<T>) -> Result<PointCloud<T>> {
        match metric {
            MetricChoice::Euclidean => PointCloud::new(self.dim, self.coords, self.weights, Metric::Euclidean),
            MetricChoice::Horospherical { scale } => {
                PointCloud::new(self.dim, self.coords, self.weights, Metric::Horospherical { scale })
            }
            MetricChoice::TubeGraphAmbient { link_radius } => {
                PointCloud::with_link_graph(self.dim, self.coords, self.weights, link_radius)
            }
        }
    }
}

pub fn parse_point_cloud<T: Real>(text: &str) -> Result<RawPoints<T>> {
    let mut weighted: Option<bool> = None;
    let mut columns: Option<usize> = None;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if weighted.is_none() {
            if line == "weighted" {
                weighted = Some(true);
                continue;
            }
            weighted = Some(false);
        }
        let row: Vec<T> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map(T::lit).map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("invalid number '{tok}'"),
                })
            })
            .collect::<Result<_>>()?;
        match columns {
            None => columns = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {c} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        values.push(row);
    }
    let weighted = weighted.unwrap_or(false);
    let columns = columns.ok_or(Error::Parse {
        line: 0,
        msg: "no points".into(),
    })?;
    let dim = if weighted { columns - 1 } else { columns };
    if dim == 0 {
        return Err(Error::Parse {
            line: 0,
            msg: "points need at least one coordinate".into(),
        });
    }
    let mut coords = Vec::with_capacity(values.len() * dim);
    let mut weights = weighted.then(|| Vec::with_capacity(values.len()));
    for row in values {
        coords.extend_from_slice(&row[..dim]);
        if let Some(w) = weights.as_mut() {
            w.push(row[dim]);
        }
    }
    Ok(RawPoints { dim, coords, weights })
}

pub fn write_point_cloud<T: Real>(cloud: &PointCloud<T>) -> String {
    let mut out = String::from("weighted\n");
    for i in 0..cloud.len() {
        for x in cloud.point(i) {
            let _ = write!(out, "{x} ");
        }
        let _ = writeln!(out, "{}", cloud.weight(i));
    }
    out
}
