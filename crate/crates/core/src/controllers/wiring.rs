use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::numerics::{max_abs, Matrix, STRUCTURAL_ZERO};

/// Direction of an edge inside a controller relative to the sensing-to-actuation flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Sensing side toward actuation side.
    Forward,
    /// Actuation side back toward the sensing side (internal feedback, DPF).
    Feedback,
    /// Within one stage, e.g. estimator self-dynamics.
    Lateral,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Feedback => "feedback",
            Direction::Lateral => "lateral",
        })
    }
}

/// A wire in the controller block diagram. `gain` is the linear map applied
/// to `source` (delayed by `delay_steps`) on its way to `dest`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: String,
    pub dest: String,
    pub gain: Matrix,
    pub direction: Direction,
    pub delay_steps: usize,
}

impl Edge {
    pub fn new(source: &str, dest: &str, gain: Matrix, direction: Direction, delay_steps: usize) -> Self {
        Edge {
            source: source.to_string(),
            dest: dest.to_string(),
            gain,
            direction,
            delay_steps,
        }
    }

    /// Dimension of the signal carried on this wire.
    pub fn width(&self) -> usize {
        self.gain.ncols()
    }

    pub fn is_structural_zero(&self) -> bool {
        max_abs(&self.gain) < STRUCTURAL_ZERO
    }
}

/// Sizes of the forward and internal-feedback signals of a controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DimensionReport {
    pub forward_dim: usize,
    pub feedback_dim: usize,
}

impl DimensionReport {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"forward_dim\": {}, \"feedback_dim\": {}}}",
            self.forward_dim, self.feedback_dim
        )
    }
}

/// Forward dimension: distinct signals feeding actuation outputs along
/// forward edges. Feedback dimension: every feedback or lateral wire.
pub(crate) fn signal_dims(wiring: &[Edge], actuation: &[String]) -> DimensionReport {
    let mut forward: BTreeMap<&str, usize> = BTreeMap::new();
    let mut feedback_dim = 0;
    for e in wiring {
        match e.direction {
            Direction::Forward if actuation.contains(&e.dest) => {
                let w = forward.entry(e.source.as_str()).or_default();
                *w = (*w).max(e.width());
            }
            Direction::Forward => {}
            Direction::Feedback | Direction::Lateral => feedback_dim += e.width(),
        }
    }
    DimensionReport {
        forward_dim: forward.values().sum(),
        feedback_dim,
    }
}

fn gain_label(m: &Matrix) -> String {
    if m.shape() == (1, 1) {
        format!("{:.4}", m[(0, 0)])
    } else {
        format!("[{}x{}]", m.nrows(), m.ncols())
    }
}

/// Graphviz rendering of a wiring list. Feedback edges are blue, lateral
/// edges gray and dashed.
pub fn wiring_to_dot(name: &str, wiring: &[Edge]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=box];");
    for e in wiring {
        let mut label = gain_label(&e.gain);
        if e.delay_steps > 0 {
            let _ = write!(label, " z^-{}", e.delay_steps);
        }
        let style = match e.direction {
            Direction::Forward => "color=black",
            Direction::Feedback => "color=blue, fontcolor=blue",
            Direction::Lateral => "color=gray40, style=dashed",
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\", {}, class=\"{}\"];",
            e.source, e.dest, label, style, e.direction
        );
    }
    out.push_str("}\n");
    out
}
