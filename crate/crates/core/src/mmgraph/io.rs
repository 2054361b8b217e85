//! Edge-list text format.
//!
//! ```text
//! # comment
//! vertices 3
//! 0 1
//! 1 2
//! measure
//! 0 1.5
//! 1 2
//! 2 1
//! ```
//!
//! The `measure` block is optional (counting measure otherwise); when
//! present it must list every vertex exactly once.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::MMGraph;

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn parse_tok<V: FromStr>(tok: &str, line: usize, what: &str) -> Result<V> {
    tok.parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("invalid {what} '{tok}'"),
        })
}

pub fn parse_edge_list<T: Real>(text: &str, label: &str) -> Result<MMGraph<T>> {
    let mut vertex_count: Option<usize> = None;
    let mut edges = Vec::new();
    let mut measure: Option<Vec<Option<T>>> = None;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(n) = vertex_count else {
            if toks.len() != 2 || toks[0] != "vertices" {
                return perr(lineno, "expected header 'vertices N'");
            }
            vertex_count = Some(parse_tok(toks[1], lineno, "vertex count")?);
            continue;
        };
        if toks == ["measure"] {
            if measure.is_some() {
                return perr(lineno, "duplicate measure block");
            }
            measure = Some(vec![None; n]);
            continue;
        }
        if toks.len() != 2 {
            return perr(lineno, format!("expected two fields, found {}", toks.len()));
        }
        let a: usize = parse_tok(toks[0], lineno, "vertex index")?;
        if a >= n {
            return perr(lineno, format!("vertex {a} out of range (N = {n})"));
        }
        match measure.as_mut() {
            None => {
                let b: usize = parse_tok(toks[1], lineno, "vertex index")?;
                if b >= n {
                    return perr(lineno, format!("vertex {b} out of range (N = {n})"));
                }
                edges.push((a, b));
            }
            Some(m) => {
                let w: f64 = parse_tok(toks[1], lineno, "measure")?;
                if m[a].is_some() {
                    return perr(lineno, format!("measure of vertex {a} given twice"));
                }
                m[a] = Some(T::lit(w));
            }
        }
    }

    let Some(n) = vertex_count else {
        return perr(0, "missing 'vertices N' header");
    };
    let measure = match measure {
        None => None,
        Some(m) => {
            if let Some(v) = m.iter().position(Option::is_none) {
                return perr(0, format!("measure block misses vertex {v}"));
            }
            Some(m.into_iter().map(Option::unwrap).collect())
        }
    };
    MMGraph::from_edges(n, &edges, measure, label)
}

pub fn write_edge_list<T: Real>(g: &MMGraph<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", g.label());
    let _ = writeln!(out, "vertices {}", g.vertex_count());
    for (a, b) in g.edges() {
        let _ = writeln!(out, "{} {}", a.0, b.0);
    }
    if g.measures().iter().any(|&m| m != T::one()) {
        out.push_str("measure\n");
        for v in g.vertices() {
            let _ = writeln!(out, "{} {}", v.0, g.measure(v));
        }
    }
    out
}
