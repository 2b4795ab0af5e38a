//! Closed-loop simulation of a controller against a plant.
//!
//! Gaussian noise comes from ChaCha8 streams (`seed_from_u64(seed)`, stream
//! per rollout) and ziggurat normal sampling, so runs are reproducible across
//! threads and platforms.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::controllers::ControllerRealization;
use crate::error::{Error, Result};
use crate::numerics::{block_diag, psd_sqrt, solve_discrete_lyapunov, spectral_radius, Matrix, Vector};
use crate::plant::StateSpace;

pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_ROLLOUTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    /// `w ~ N(0, W)`, `v ~ N(0, V)` drawn from stream `stream` of `seed`.
    Gaussian { seed: u64, stream: u64 },
    /// `w(time) = e_channel`, everything else zero.
    Impulse { channel: usize, time: usize },
    Zero,
}

impl Noise {
    pub fn gaussian(seed: u64) -> Self {
        Noise::Gaussian { seed, stream: 0 }
    }
}

/// Recorded closed-loop run. Entry `t` of each series is the value at time
/// `t`, starting from `x(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub horizon: usize,
    pub x: Vec<Vector>,
    pub u: Vec<Vector>,
    pub y: Vec<Vector>,
    pub internal_names: Vec<String>,
    pub internal: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    /// First step whose state was not finite; the series stop before it.
    pub diverged: Option<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let dim = |v: &[Vector]| v.first().map_or(0, |x| x.len());
        let mut h = vec!["t".to_string()];
        h.extend((1..=dim(&self.x)).map(|i| format!("x_{i}")));
        h.extend((1..=dim(&self.u)).map(|i| format!("u_{i}")));
        h.extend((1..=dim(&self.y)).map(|i| format!("y_{i}")));
        h.extend(self.internal_names.iter().cloned());
        h
    }

    /// Columns `t, x_1.., u_1.., y_1..` then internal signals by name.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for t in 0..self.len() {
            let mut row = vec![t.to_string()];
            for series in [&self.x[t], &self.u[t], &self.y[t]] {
                row.extend(series.iter().map(|v| crate::format::fmt_f64(*v)));
            }
            row.extend(self.internal[t].iter().map(|v| crate::format::fmt_f64(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct NoiseSource {
    kind: Noise,
    rng: Option<ChaCha8Rng>,
    w_sqrt: Matrix,
    v_sqrt: Matrix,
}

impl NoiseSource {
    fn new(plant: &StateSpace, kind: Noise) -> Result<Self> {
        let rng = match kind {
            Noise::Gaussian { seed, stream } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                Some(rng)
            }
            Noise::Impulse { channel, .. } if channel >= plant.n() => {
                return Err(Error::input(format!(
                    "impulse channel {channel} out of range for {} states",
                    plant.n()
                )))
            }
            _ => None,
        };
        Ok(NoiseSource {
            kind,
            rng,
            w_sqrt: psd_sqrt(&plant.w),
            v_sqrt: psd_sqrt(&plant.v),
        })
    }

    fn gaussian(rng: &mut ChaCha8Rng, sqrt: &Matrix) -> Vector {
        let z = Vector::from_fn(sqrt.ncols(), |_, _| StandardNormal.sample(rng));
        sqrt * z
    }

    /// Sensor noise for step `t`, then process noise for step `t`.
    fn draw(&mut self, t: usize, n: usize, p: usize) -> (Vector, Vector) {
        match (self.kind, self.rng.as_mut()) {
            (Noise::Gaussian { .. }, Some(rng)) => {
                let v = Self::gaussian(rng, &self.v_sqrt);
                let w = Self::gaussian(rng, &self.w_sqrt);
                (v, w)
            }
            (Noise::Impulse { channel, time }, _) => {
                let mut w = Vector::zeros(n);
                if t == time {
                    w[channel] = 1.0;
                }
                (Vector::zeros(p), w)
            }
            _ => (Vector::zeros(p), Vector::zeros(n)),
        }
    }
}

fn check_dims(plant: &StateSpace, ctrl: &ControllerRealization) -> Result<()> {
    if ctrl.input_dim() != plant.p() || ctrl.output_dim() != plant.m() {
        return Err(Error::dim(format!(
            "controller maps {} measurements to {} inputs; plant has p={}, m={}",
            ctrl.input_dim(),
            ctrl.output_dim(),
            plant.p(),
            plant.m()
        )));
    }
    Ok(())
}

/// Drive the loop for `horizon` steps, calling `visit(t, x, u, y, ctrl)` after
/// each controller step. Returns the first non-finite step, if any.
fn run<F>(plant: &StateSpace, ctrl: &mut ControllerRealization, horizon: usize, noise: Noise, mut visit: F) -> Result<Option<usize>>
where
    F: FnMut(usize, &Vector, &Vector, &Vector, &ControllerRealization),
{
    let (n, p) = (plant.n(), plant.p());
    let mut src = NoiseSource::new(plant, noise)?;
    let mut x = Vector::zeros(n);
    for t in 0..horizon {
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(Some(t));
        }
        let (v, w) = src.draw(t, n, p);
        let y = &plant.c * &x + v;
        let u = ctrl.step(&y);
        visit(t, &x, &u, &y, ctrl);
        x = &plant.a * &x + &plant.b * &u + w;
    }
    Ok(None)
}

/// Simulate from `x(0) = 0` with a fresh copy of `ctrl` (its state is reset).
pub fn simulate(plant: &StateSpace, ctrl: &ControllerRealization, horizon: usize, noise: Noise) -> Result<Trajectory> {
    check_dims(plant, ctrl)?;
    let mut ctrl = ctrl.clone();
    ctrl.reset();
    let mut traj = Trajectory {
        horizon,
        x: Vec::with_capacity(horizon),
        u: Vec::with_capacity(horizon),
        y: Vec::with_capacity(horizon),
        internal_names: ctrl.internal_names().to_vec(),
        internal: Vec::with_capacity(horizon),
        seed: match noise {
            Noise::Gaussian { seed, .. } => Some(seed),
            _ => None,
        },
        diverged: None,
    };
    traj.diverged = run(plant, &mut ctrl, horizon, noise, |_, x, u, y, c| {
        traj.x.push(x.clone());
        traj.u.push(u.clone());
        traj.y.push(y.clone());
        traj.internal.push(c.internal_values().to_vec());
    })?;
    Ok(traj)
}

/// One noiseless run per disturbance channel with `w(0) = e_j`.
pub fn impulse_response(plant: &StateSpace, ctrl: &ControllerRealization, steps: usize) -> Result<Vec<Trajectory>> {
    (0..plant.n())
        .map(|j| simulate(plant, ctrl, steps, Noise::Impulse { channel: j, time: 0 }))
        .collect()
}

/// Plant and controller as one linear system with state `z = [x; xi]`
/// driven by `[w; v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    pub a: Matrix,
    /// Noise input map for `[w; v]`.
    pub g: Matrix,
    /// `u = f z + dv v`.
    pub f: Matrix,
    pub dv: Matrix,
}

pub fn closed_loop(plant: &StateSpace, ctrl: &ControllerRealization) -> Result<ClosedLoop> {
    check_dims(plant, ctrl)?;
    let lin = ctrl.linear_realization();
    let (n, p) = (plant.n(), plant.p());
    let k = lin.ac.nrows();
    let (a, b, c) = (&plant.a, &plant.b, &plant.c);

    let mut acl = Matrix::zeros(n + k, n + k);
    acl.view_mut((0, 0), (n, n)).copy_from(&(a + b * &lin.dc * c));
    acl.view_mut((0, n), (n, k)).copy_from(&(b * &lin.cc));
    acl.view_mut((n, 0), (k, n)).copy_from(&(&lin.bc * c));
    acl.view_mut((n, n), (k, k)).copy_from(&lin.ac);

    let mut g = Matrix::zeros(n + k, n + p);
    g.view_mut((0, 0), (n, n)).copy_from(&Matrix::identity(n, n));
    g.view_mut((0, n), (n, p)).copy_from(&(b * &lin.dc));
    g.view_mut((n, n), (k, p)).copy_from(&lin.bc);

    let mut f = Matrix::zeros(plant.m(), n + k);
    f.view_mut((0, 0), (plant.m(), n)).copy_from(&(&lin.dc * c));
    f.view_mut((0, n), (plant.m(), k)).copy_from(&lin.cc);

    Ok(ClosedLoop { a: acl, g, f, dv: lin.dc })
}

pub fn closed_loop_radius(plant: &StateSpace, ctrl: &ControllerRealization) -> Result<f64> {
    spectral_radius(&closed_loop(plant, ctrl)?.a)
}

/// Stationary `E[x'Qx + u'Ru]` from the closed-loop Lyapunov equation.
pub fn lyapunov_cost(plant: &StateSpace, ctrl: &ControllerRealization, q: &Matrix, r: &Matrix) -> Result<f64> {
    let cl = closed_loop(plant, ctrl)?;
    let rho = spectral_radius(&cl.a)?;
    if rho >= 1.0 {
        return Err(Error::Unstable { spectral_radius: rho });
    }
    let n = plant.n();
    let noise = block_diag(&[&plant.w, &plant.v]);
    let sigma = solve_discrete_lyapunov(&cl.a, &(&cl.g * noise * cl.g.transpose()))?;
    let sxx = sigma.view((0, 0), (n, n));
    let suu = &cl.f * &sigma * cl.f.transpose() + &cl.dv * &plant.v * cl.dv.transpose();
    Ok((q * sxx).trace() + (r * suu).trace())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub rollouts: usize,
}

/// Monte Carlo average of `x'Qx + u'Ru` over `[horizon / 5, horizon)`, one
/// Gaussian stream per rollout. The standard error is taken across the
/// per-rollout time averages. Refuses unstable loops.
pub fn lqg_cost(
    plant: &StateSpace,
    ctrl: &ControllerRealization,
    q: &Matrix,
    r: &Matrix,
    horizon: usize,
    n_rollouts: usize,
    seed: u64,
) -> Result<CostEstimate> {
    let rho = closed_loop_radius(plant, ctrl)?;
    if rho >= 1.0 {
        return Err(Error::Unstable { spectral_radius: rho });
    }
    let burn_in = horizon / 5;
    if horizon <= burn_in || n_rollouts == 0 {
        return Err(Error::input("need a positive horizon and at least one rollout"));
    }
    let averages: Vec<f64> = (0..n_rollouts as u64)
        .into_par_iter()
        .map(|stream| -> Result<f64> {
            let mut c = ctrl.clone();
            c.reset();
            let mut total = 0.0;
            run(plant, &mut c, horizon, Noise::Gaussian { seed, stream }, |t, x, u, _, _| {
                if t >= burn_in {
                    total += x.dot(&(q * x)) + u.dot(&(r * u));
                }
            })?;
            Ok(total / (horizon - burn_in) as f64)
        })
        .collect::<Result<_>>()?;
    let k = averages.len() as f64;
    let mean = averages.iter().sum::<f64>() / k;
    let var = if averages.len() > 1 {
        averages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(CostEstimate {
        mean,
        std_err: (var / k).sqrt(),
        rollouts: averages.len(),
    })
}
