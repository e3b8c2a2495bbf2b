//! Plain-text waypoint traces, one line per node.
//!
//! Each non-comment line holds whitespace-separated `t x y` triples with
//! strictly increasing `t`. Lines starting with `#` and blank lines are
//! skipped. This matches the movements files emitted by common mobility
//! generators, which place nodes in `[0, 2w]^2`; ingestion therefore takes an
//! origin shift.

use std::fmt::Write as _;

use super::{MobilityError, Trajectory, Waypoint};
use crate::geometry::Point2;

/// Parsed trace, in file coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub nodes: Vec<Vec<Waypoint>>,
}

impl TraceFile {
    pub fn parse(text: &str) -> Result<Self, MobilityError> {
        let mut nodes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let values = trimmed
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| MobilityError::Parse { line: line_no, reason: format!("`{tok}` is not a finite number") })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if values.len() % 3 != 0 {
                return Err(MobilityError::Parse {
                    line: line_no,
                    reason: format!("{} numbers do not form `t x y` triples", values.len()),
                });
            }
            let waypoints: Vec<Waypoint> = values
                .chunks_exact(3)
                .map(|c| Waypoint { t: c[0], p: Point2::new(c[1], c[2]) })
                .collect();
            if let Some(w) = waypoints.windows(2).find(|w| w[1].t <= w[0].t) {
                return Err(MobilityError::NonMonotone { line: line_no, t: w[1].t });
            }
            nodes.push(waypoints);
        }
        Ok(Self { nodes })
    }

    /// Convert to trajectories, checking the node count and adding `shift`
    /// to every position.
    pub fn into_trajectories(self, expected_nodes: usize, shift: Point2<f64>) -> Result<Vec<Trajectory>, MobilityError> {
        if self.nodes.len() != expected_nodes {
            return Err(MobilityError::NodeCount { expected: expected_nodes, found: self.nodes.len() });
        }
        Ok(self
            .nodes
            .into_iter()
            .map(|wps| {
                Trajectory::new(
                    wps.into_iter()
                        .map(|w| Waypoint { t: w.t, p: Point2::new(w.p.x + shift.x, w.p.y + shift.y) })
                        .collect(),
                )
            })
            .collect())
    }
}

/// Render a trace with one line per node.
pub fn format_trace(nodes: &[Vec<Waypoint>]) -> String {
    let mut out = String::new();
    for wps in nodes {
        let mut first = true;
        for w in wps {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{} {} {}", w.t, w.p.x, w.p.y).unwrap();
        }
        out.push('\n');
    }
    out
}
