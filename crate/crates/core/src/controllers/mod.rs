//! Executable controller realizations and their block-diagram structure.
//!
//! Every controller carries a wiring list whose edges are classified as
//! forward, feedback (internal feedback running from the actuation side back
//! toward the sensing side) or lateral. [`extract_dpf`] returns the feedback
//! edges and [`report_signal_dims`] sizes the forward and feedback signals.

mod gains;
mod wiring;

use std::collections::VecDeque;

pub use gains::{scalar_delay_gains, DelayGains};
pub use wiring::{wiring_to_dot, DimensionReport, Direction, Edge};

use crate::error::{Error, Result};
use crate::numerics::{solve_dare, solve_filter_dare, Matrix, Vector};
use crate::plant::{LabeledPlant, SignalRole, StateSpace};
use crate::sls::SlsResponse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    StateFeedback,
    FullControl,
    OutputFeedback,
    Sls,
}

impl ControllerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::StateFeedback => "sf",
            ControllerKind::FullControl => "fc",
            ControllerKind::OutputFeedback => "of",
            ControllerKind::Sls => "sls",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sf" => Some(ControllerKind::StateFeedback),
            "fc" => Some(ControllerKind::FullControl),
            "of" => Some(ControllerKind::OutputFeedback),
            "sls" => Some(ControllerKind::Sls),
            _ => None,
        }
    }
}

/// Parameters that fully determine a controller's input-output behavior.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerParams {
    /// `u = gain * y`.
    StaticGain { gain: Matrix },
    /// Predictor-form observer with certainty-equivalent feedback:
    /// `xhat(t+1) = (A - LC) xhat(t) + B u(t) + L y(t)`, `u(t) = -K xhat(t)`.
    Observer {
        a: Matrix,
        b: Matrix,
        c: Matrix,
        k: Matrix,
        l: Matrix,
    },
    /// State-feedback SLS controller driven by FIR closed-loop responses.
    Sls(SlsResponse),
}

#[derive(Debug, Clone, PartialEq)]
enum InternalState {
    None,
    Estimate(Vector),
    Sls {
        /// `delta_hat(t-1), delta_hat(t-2), ...`, newest first, length `T - 1`.
        history: VecDeque<Vector>,
        xhat: Vector,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfOptions {
    /// How the `A - LC` estimator self-loop is classified.
    pub estimator_dynamics: Direction,
}

impl Default for OfOptions {
    fn default() -> Self {
        OfOptions {
            estimator_dynamics: Direction::Lateral,
        }
    }
}

/// State-space form of a controller: `xi(t+1) = Ac xi + Bc y`, `u = Cc xi + Dc y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRealization {
    pub ac: Matrix,
    pub bc: Matrix,
    pub cc: Matrix,
    pub dc: Matrix,
}

/// A controller that can be stepped against a plant, plus its labeled wiring.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerRealization {
    kind: ControllerKind,
    params: ControllerParams,
    state: InternalState,
    wiring: Vec<Edge>,
    actuation: Vec<String>,
    internal_names: Vec<String>,
    internal_values: Vec<f64>,
    options: OfOptions,
    control_p: Option<Matrix>,
    filter_p: Option<Matrix>,
}

impl ControllerRealization {
    /// Build a controller from its parameters. `input_roles` decides which
    /// rows of a full-control gain are forward (external inputs) and which
    /// are internal feedback (internal wires); absent roles mean all external.
    pub fn from_params(
        kind: ControllerKind,
        params: ControllerParams,
        input_roles: Option<&[SignalRole]>,
        opts: OfOptions,
    ) -> Result<Self> {
        let (wiring, actuation, internal_names, state) = match (&kind, &params) {
            (ControllerKind::StateFeedback, ControllerParams::StaticGain { gain }) => {
                let wiring = vec![Edge::new("y", "u", gain.clone(), Direction::Forward, 0)];
                (wiring, vec!["u".to_string()], Vec::new(), InternalState::None)
            }
            (ControllerKind::FullControl, ControllerParams::StaticGain { gain }) => {
                let m = gain.nrows();
                if let Some(roles) = input_roles {
                    if roles.len() != m {
                        return Err(Error::dim(format!(
                            "{} input roles for a gain with {m} rows",
                            roles.len()
                        )));
                    }
                }
                let actuation: Vec<String> = (1..=m).map(|i| format!("u_{i}")).collect();
                let wiring = (0..m)
                    .map(|i| {
                        let internal = input_roles.is_some_and(|r| r[i] == SignalRole::InternalWire);
                        let dir = if internal {
                            Direction::Feedback
                        } else {
                            Direction::Forward
                        };
                        Edge::new("y", &actuation[i], gain.rows(i, 1).into_owned(), dir, 0)
                    })
                    .collect();
                (wiring, actuation, Vec::new(), InternalState::None)
            }
            (ControllerKind::OutputFeedback, ControllerParams::Observer { a, b, c, k, l }) => {
                let n = a.nrows();
                if b.nrows() != n || c.ncols() != n || k.ncols() != n || l.nrows() != n {
                    return Err(Error::dim("observer matrices have inconsistent shapes"));
                }
                let wiring = vec![
                    Edge::new("y", "xhat", l.clone(), Direction::Forward, 0),
                    Edge::new("xhat", "u", -k, Direction::Forward, 0),
                    Edge::new("u", "xhat", b.clone(), Direction::Feedback, 0),
                    Edge::new("xhat", "xhat", a - l * c, opts.estimator_dynamics, 1),
                ];
                let names = (1..=n).map(|i| format!("xhat_{i}")).collect();
                (wiring, vec!["u".to_string()], names, InternalState::Estimate(Vector::zeros(n)))
            }
            (ControllerKind::Sls, ControllerParams::Sls(resp)) => {
                let n = resp.n();
                let mut wiring = vec![Edge::new("x", "delta_hat", Matrix::identity(n, n), Direction::Forward, 0)];
                for (k, phi_u) in resp.phi_u.iter().enumerate() {
                    wiring.push(Edge::new("delta_hat", "u", phi_u.clone(), Direction::Forward, k));
                }
                // x_hat(t) = sum_{k>=2} Phi_x^(k) delta_hat(t+1-k) is subtracted at the sensor
                for (k, phi_x) in resp.phi_x.iter().enumerate().skip(1) {
                    wiring.push(Edge::new("delta_hat", "delta_hat", -phi_x, Direction::Feedback, k));
                }
                let mut names: Vec<String> = (1..=n).map(|i| format!("xhat_{i}")).collect();
                names.extend((1..=n).map(|i| format!("delta_hat_{i}")));
                let state = InternalState::Sls {
                    history: (1..resp.horizon()).map(|_| Vector::zeros(n)).collect(),
                    xhat: Vector::zeros(n),
                };
                (wiring, vec!["u".to_string()], names, state)
            }
            _ => {
                return Err(Error::input(format!(
                    "parameters do not describe a {} controller",
                    kind.as_str()
                )))
            }
        };
        let wiring = wiring.into_iter().filter(|e| !e.is_structural_zero()).collect();
        let internal_values = vec![0.0; internal_names.len()];
        Ok(ControllerRealization {
            kind,
            params,
            state,
            wiring,
            actuation,
            internal_names,
            internal_values,
            options: opts,
            control_p: None,
            filter_p: None,
        })
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn params(&self) -> &ControllerParams {
        &self.params
    }

    pub fn wiring(&self) -> &[Edge] {
        &self.wiring
    }

    pub fn options(&self) -> OfOptions {
        self.options
    }

    /// Control Riccati solution behind `K` (SF, OF).
    pub fn control_p(&self) -> Option<&Matrix> {
        self.control_p.as_ref()
    }

    /// Filter Riccati solution behind `L` (FC, OF).
    pub fn filter_p(&self) -> Option<&Matrix> {
        self.filter_p.as_ref()
    }

    /// Attach the Riccati solutions the gains were computed from, for audits.
    pub fn with_riccati(mut self, control_p: Option<Matrix>, filter_p: Option<Matrix>) -> Self {
        self.control_p = control_p;
        self.filter_p = filter_p;
        self
    }

    pub fn input_dim(&self) -> usize {
        match &self.params {
            ControllerParams::StaticGain { gain } => gain.ncols(),
            ControllerParams::Observer { l, .. } => l.ncols(),
            ControllerParams::Sls(resp) => resp.n(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match &self.params {
            ControllerParams::StaticGain { gain } => gain.nrows(),
            ControllerParams::Observer { k, .. } => k.nrows(),
            ControllerParams::Sls(resp) => resp.m(),
        }
    }

    /// Names of the internal signals recorded at each step.
    pub fn internal_names(&self) -> &[String] {
        &self.internal_names
    }

    /// Internal signal values used in the most recent [`step`](Self::step).
    pub fn internal_values(&self) -> &[f64] {
        &self.internal_values
    }

    pub fn reset(&mut self) {
        match &mut self.state {
            InternalState::None => {}
            InternalState::Estimate(x) => x.fill(0.0),
            InternalState::Sls { history, xhat } => {
                history.iter_mut().for_each(|h| h.fill(0.0));
                xhat.fill(0.0);
            }
        }
        self.internal_values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Consume the measurement `y(t)`, return the actuation `u(t)` and
    /// advance the internal state to `t + 1`.
    pub fn step(&mut self, y: &Vector) -> Vector {
        match (&self.params, &mut self.state) {
            (ControllerParams::StaticGain { gain }, InternalState::None) => gain * y,
            (ControllerParams::Observer { a, b, c, k, l }, InternalState::Estimate(xhat)) => {
                let u = -(k * &*xhat);
                self.internal_values.copy_from_slice(xhat.as_slice());
                let next = (a - l * c) * &*xhat + b * &u + l * y;
                *xhat = next;
                u
            }
            (ControllerParams::Sls(resp), InternalState::Sls { history, xhat }) => {
                let n = resp.n();
                let delta = y - &*xhat;
                let mut u = &resp.phi_u[0] * &delta;
                for (k, past) in history.iter().enumerate() {
                    u += &resp.phi_u[k + 1] * past;
                }
                self.internal_values[..n].copy_from_slice(xhat.as_slice());
                self.internal_values[n..].copy_from_slice(delta.as_slice());
                if !history.is_empty() {
                    history.pop_back();
                    history.push_front(delta);
                }
                let mut next = Vector::zeros(n);
                for (k, past) in history.iter().enumerate() {
                    next += &resp.phi_x[k + 1] * past;
                }
                *xhat = next;
                u
            }
            _ => unreachable!("state always matches parameters"),
        }
    }

    /// `xi(t+1) = Ac xi + Bc y`, `u = Cc xi + Dc y`, with `xi` the internal state.
    pub fn linear_realization(&self) -> LinearRealization {
        match &self.params {
            ControllerParams::StaticGain { gain } => LinearRealization {
                ac: Matrix::zeros(0, 0),
                bc: Matrix::zeros(0, gain.ncols()),
                cc: Matrix::zeros(gain.nrows(), 0),
                dc: gain.clone(),
            },
            ControllerParams::Observer { a, b, c, k, l } => LinearRealization {
                ac: a - l * c - b * k,
                bc: l.clone(),
                cc: -k,
                dc: Matrix::zeros(k.nrows(), l.ncols()),
            },
            ControllerParams::Sls(resp) => {
                // xi = [delta_hat(t-1); ...; delta_hat(t-T+1)]
                let n = resp.n();
                let m = resp.m();
                let taps = resp.horizon() - 1;
                let dim = n * taps;
                let mut hx = Matrix::zeros(n, dim);
                let mut hu = Matrix::zeros(m, dim);
                for k in 0..taps {
                    hx.view_mut((0, k * n), (n, n)).copy_from(&resp.phi_x[k + 1]);
                    hu.view_mut((0, k * n), (m, n)).copy_from(&resp.phi_u[k + 1]);
                }
                let mut ac = Matrix::zeros(dim, dim);
                let mut bc = Matrix::zeros(dim, n);
                if taps > 0 {
                    ac.view_mut((0, 0), (n, dim)).copy_from(&(-&hx));
                    bc.view_mut((0, 0), (n, n)).copy_from(&Matrix::identity(n, n));
                    for k in 1..taps {
                        ac.view_mut((k * n, (k - 1) * n), (n, n))
                            .copy_from(&Matrix::identity(n, n));
                    }
                }
                LinearRealization {
                    ac,
                    bc,
                    cc: hu - &resp.phi_u[0] * hx,
                    dc: resp.phi_u[0].clone(),
                }
            }
        }
    }

    pub fn to_dot(&self) -> String {
        wiring_to_dot(self.kind.as_str(), &self.wiring)
    }
}

/// Static state feedback `u = -K C^-1 y` from the control DARE. Requires
/// noise-free sensing with an invertible `C`.
pub fn make_sf(plant: &StateSpace, q: &Matrix, r: &Matrix) -> Result<ControllerRealization> {
    if !plant.has_perfect_sensing() {
        return Err(Error::Precondition(
            "SF requires perfect sensing (V = 0); use the FC or OF controller".into(),
        ));
    }
    let c_inv = if plant.c.is_square() {
        plant.c.clone().try_inverse()
    } else {
        None
    }
    .ok_or_else(|| Error::Precondition("SF requires a square invertible C (full state measurement)".into()))?;
    let sol = solve_dare(&plant.a, &plant.b, q, r)?;
    let gain = -(&sol.gain * c_inv);
    Ok(ControllerRealization::from_params(
        ControllerKind::StateFeedback,
        ControllerParams::StaticGain { gain },
        None,
        OfOptions::default(),
    )?
    .with_riccati(Some(sol.p), None))
}

/// Full-control gain `u = -L y`, with `L` the filter-DARE gain. Requires
/// `B = I`. Rows of `L` driving internal wires are internal feedback.
pub fn make_fc(plant: &LabeledPlant) -> Result<ControllerRealization> {
    let p = &plant.plant;
    if !p.has_full_actuation() {
        return Err(Error::Precondition(
            "FC requires full actuation (B = I); reformulate the plant with internal inputs".into(),
        ));
    }
    let sol = solve_filter_dare(&p.a, &p.c, &p.w, &p.v)?;
    let gain = -&sol.gain;
    Ok(ControllerRealization::from_params(
        ControllerKind::FullControl,
        ControllerParams::StaticGain { gain },
        Some(&plant.input_roles),
        OfOptions::default(),
    )?
    .with_riccati(None, Some(sol.p)))
}

pub fn make_of(plant: &StateSpace, q: &Matrix, r: &Matrix) -> Result<ControllerRealization> {
    make_of_with(plant, q, r, OfOptions::default())
}

/// Output feedback: control DARE gain `K` and filter DARE gain `L` combined
/// by certainty equivalence.
pub fn make_of_with(plant: &StateSpace, q: &Matrix, r: &Matrix, opts: OfOptions) -> Result<ControllerRealization> {
    let control = solve_dare(&plant.a, &plant.b, q, r).map_err(|e| match e {
        Error::Synthesis(msg) | Error::InvalidInput(msg) => Error::Synthesis(format!("control side: {msg}")),
        Error::NonConvergence { .. } => Error::Synthesis(format!("control side: (A, B) not stabilizable ({e})")),
        other => other,
    })?;
    let filter = solve_filter_dare(&plant.a, &plant.c, &plant.w, &plant.v).map_err(|e| match e {
        Error::Synthesis(msg) | Error::InvalidInput(msg) => Error::Synthesis(format!("estimator side: {msg}")),
        Error::NonConvergence { .. } => Error::Synthesis(format!("estimator side: (C, A) not detectable ({e})")),
        other => other,
    })?;
    let params = ControllerParams::Observer {
        a: plant.a.clone(),
        b: plant.b.clone(),
        c: plant.c.clone(),
        k: control.gain.clone(),
        l: filter.gain.clone(),
    };
    Ok(ControllerRealization::from_params(ControllerKind::OutputFeedback, params, None, opts)?
        .with_riccati(Some(control.p), Some(filter.p)))
}

/// The internal-feedback edges of a controller.
pub fn extract_dpf(ctrl: &ControllerRealization) -> Vec<Edge> {
    ctrl.wiring
        .iter()
        .filter(|e| e.direction == Direction::Feedback)
        .cloned()
        .collect()
}

/// Forward and feedback signal sizes computed from the wiring: the forward
/// size counts each distinct signal feeding an actuation output along
/// forward edges; the feedback size counts every feedback or lateral wire.
pub fn report_signal_dims(ctrl: &ControllerRealization) -> DimensionReport {
    wiring::signal_dims(&ctrl.wiring, &ctrl.actuation)
}
