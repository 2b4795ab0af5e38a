//! Plant models: the scalar plant, the delay-chain augmentation and its
//! full-actuation reformulation.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, ensure_shape, ensure_square, is_psd, Matrix};

/// Weight on internal (communication-wire) inputs in the default control cost.
/// Small but nonzero so `R` stays positive definite.
pub const INTERNAL_INPUT_WEIGHT: f64 = 1e-8;

/// Discrete LTI plant
///
/// ```text
/// x(t+1) = A x(t) + B u(t) + w(t),   w ~ N(0, W)
///   y(t) = C x(t) + v(t),            v ~ N(0, V)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub w: Matrix,
    pub v: Matrix,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, w: Matrix, v: Matrix) -> Result<Self> {
        ensure_square(&a, "A")?;
        let n = a.nrows();
        ensure_shape(&b, n, b.ncols(), "B")?;
        ensure_shape(&c, c.nrows(), n, "C")?;
        ensure_shape(&w, n, n, "W")?;
        ensure_shape(&v, c.nrows(), c.nrows(), "V")?;
        for (m, name) in [(&a, "A"), (&b, "B"), (&c, "C"), (&w, "W"), (&v, "V")] {
            ensure_finite(m, name)?;
        }
        if !is_psd(&w) {
            return Err(Error::input("disturbance covariance W must be symmetric PSD"));
        }
        if !is_psd(&v) {
            return Err(Error::input("sensor-noise covariance V must be symmetric PSD"));
        }
        Ok(StateSpace { a, b, c, w, v })
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn has_perfect_sensing(&self) -> bool {
        self.v.iter().all(|&x| x == 0.0)
    }

    pub fn has_full_actuation(&self) -> bool {
        self.b.is_square() && self.b == Matrix::identity(self.n(), self.n())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalRole {
    External,
    InternalDelay,
    InternalWire,
}

impl fmt::Display for SignalRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalRole::External => "external",
            SignalRole::InternalDelay => "internal-delay",
            SignalRole::InternalWire => "internal-wire",
        })
    }
}

/// Parameters of a scalar plant seen through a chain of `net_delay_steps`
/// one-step delay states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySpec {
    pub net_delay_steps: usize,
    pub base_a: f64,
    pub sigma_w: f64,
    pub sigma_v: f64,
    pub disturbance_on_external_only: bool,
    /// Actuate every delay state (`B = I`) instead of only the external one.
    pub full_actuation: bool,
}

impl DelaySpec {
    pub fn new(net_delay_steps: usize, base_a: f64, sigma_w: f64, sigma_v: f64) -> Self {
        DelaySpec {
            net_delay_steps,
            base_a,
            sigma_w,
            sigma_v,
            disturbance_on_external_only: true,
            full_actuation: true,
        }
    }

    pub fn with_full_actuation(mut self, full: bool) -> Self {
        self.full_actuation = full;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_noise(self.base_a, self.sigma_w, self.sigma_v)
    }
}

fn check_noise(a: f64, sigma_w: f64, sigma_v: f64) -> Result<()> {
    if !(a.is_finite() && sigma_w.is_finite() && sigma_v.is_finite()) {
        return Err(Error::input("plant parameters must be finite"));
    }
    if sigma_w < 0.0 || sigma_v < 0.0 {
        return Err(Error::input("noise standard deviations must be nonnegative"));
    }
    Ok(())
}

/// A plant together with the role of each state and input.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPlant {
    pub plant: StateSpace,
    pub state_roles: Vec<SignalRole>,
    pub input_roles: Vec<SignalRole>,
}

impl LabeledPlant {
    /// Unit weight on external states and inputs, zero on delay states and
    /// [`INTERNAL_INPUT_WEIGHT`] on internal wires.
    pub fn default_weights(&self) -> (Matrix, Matrix) {
        let q = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.state_roles.len(),
            self.state_roles
                .iter()
                .map(|r| if *r == SignalRole::External { 1.0 } else { 0.0 }),
        ));
        let r = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.input_roles.len(),
            self.input_roles.iter().map(|r| {
                if *r == SignalRole::External {
                    1.0
                } else {
                    INTERNAL_INPUT_WEIGHT
                }
            }),
        ));
        (q, r)
    }

    pub fn external_states(&self) -> usize {
        self.state_roles
            .iter()
            .filter(|r| **r == SignalRole::External)
            .count()
    }
}

/// `x(t+1) = a x(t) + u(t) + w(t)`, `y(t) = x(t) + v(t)`.
pub fn scalar_plant(a: f64, sigma_w: f64, sigma_v: f64) -> Result<StateSpace> {
    check_noise(a, sigma_w, sigma_v)?;
    let s = |x: f64| Matrix::from_element(1, 1, x);
    StateSpace::new(s(a), s(1.0), s(1.0), s(sigma_w * sigma_w), s(sigma_v * sigma_v))
}

/// Scalar plant followed by `Td` one-step delay states:
///
/// ```text
/// x_1(t+1) = a x_1(t) + u_1(t) + w(t)
/// x_i(t+1) = x_{i-1}(t) [+ u_i(t)]        i = 2..Td+1
///     y(t) = x_{Td+1}(t) + v(t)
/// ```
///
/// With `full_actuation` every state gets an input (`B = I`); the inputs on
/// delay states are internal wires. Otherwise `B = e_1`.
pub fn delay_chain_plant(spec: &DelaySpec) -> Result<LabeledPlant> {
    spec.validate()?;
    let n = spec.net_delay_steps + 1;
    let mut a = Matrix::zeros(n, n);
    a[(0, 0)] = spec.base_a;
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let b = if spec.full_actuation {
        Matrix::identity(n, n)
    } else {
        let mut b = Matrix::zeros(n, 1);
        b[(0, 0)] = 1.0;
        b
    };
    let mut c = Matrix::zeros(1, n);
    c[(0, n - 1)] = 1.0;
    let sw2 = spec.sigma_w * spec.sigma_w;
    let w = if spec.disturbance_on_external_only {
        let mut w = Matrix::zeros(n, n);
        w[(0, 0)] = sw2;
        w
    } else {
        Matrix::identity(n, n) * sw2
    };
    let v = Matrix::from_element(1, 1, spec.sigma_v * spec.sigma_v);

    let state_roles = (0..n)
        .map(|i| if i == 0 { SignalRole::External } else { SignalRole::InternalDelay })
        .collect();
    let input_roles = (0..b.ncols())
        .map(|i| if i == 0 { SignalRole::External } else { SignalRole::InternalWire })
        .collect();

    Ok(LabeledPlant {
        plant: StateSpace::new(a, b, c, w, v)?,
        state_roles,
        input_roles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{is_observable, spectral_radius};

    #[test]
    fn scalar_construction() {
        let p = scalar_plant(0.9, 1.0, 0.0).unwrap();
        assert_eq!(p.a[(0, 0)], 0.9);
        assert!(p.has_perfect_sensing());
        assert!(p.has_full_actuation());
        let z = scalar_plant(0.0, 0.0, 0.0).unwrap();
        assert_eq!(z.a[(0, 0)], 0.0);
        assert_eq!(z.w[(0, 0)], 0.0);
        let u = scalar_plant(1.5, 1.0, 1.0).unwrap();
        assert!(u.a[(0, 0)].abs() > 1.0);
        assert!(!u.has_perfect_sensing());
    }

    #[test]
    fn negative_noise_rejected() {
        assert!(matches!(scalar_plant(1.0, -1.0, 0.0), Err(Error::InvalidInput(_))));
        assert!(delay_chain_plant(&DelaySpec::new(1, 1.0, 1.0, -0.1)).is_err());
    }

    #[test]
    fn one_step_chain_matches_reformulated_matrices() {
        let lp = delay_chain_plant(&DelaySpec::new(1, 0.7, 1.0, 1.0)).unwrap();
        let p = &lp.plant;
        assert_eq!(p.a, Matrix::from_row_slice(2, 2, &[0.7, 0.0, 1.0, 0.0]));
        assert_eq!(p.b, Matrix::identity(2, 2));
        assert_eq!(p.c, Matrix::from_row_slice(1, 2, &[0.0, 1.0]));
        assert_eq!(p.w, Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(lp.input_roles, vec![SignalRole::External, SignalRole::InternalWire]);
        assert_eq!(lp.state_roles, vec![SignalRole::External, SignalRole::InternalDelay]);
    }

    #[test]
    fn zero_delay_is_scalar_plant() {
        let lp = delay_chain_plant(&DelaySpec::new(0, 1.3, 0.5, 2.0)).unwrap();
        assert_eq!(lp.plant, scalar_plant(1.3, 0.5, 2.0).unwrap());
    }

    #[test]
    fn two_step_chain() {
        let spec = DelaySpec::new(2, 1.2, 1.0, 1.0).with_full_actuation(false);
        let lp = delay_chain_plant(&spec).unwrap();
        let expected = Matrix::from_row_slice(3, 3, &[1.2, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(lp.plant.a, expected);
        assert_eq!(lp.plant.b.shape(), (3, 1));
        assert_eq!(lp.plant.c, Matrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]));
        assert_eq!(lp.external_states(), 1);
    }

    #[test]
    fn delay_states_only_add_zero_eigenvalues() {
        for td in 0..6 {
            for a in [-2.0, -0.3, 0.0, 0.8, 1.7] {
                let lp = delay_chain_plant(&DelaySpec::new(td, a, 1.0, 1.0)).unwrap();
                let rho = spectral_radius(&lp.plant.a).unwrap();
                assert!((rho - f64::abs(a)).abs() < 1e-12, "td={td} a={a} rho={rho}");
            }
        }
    }

    #[test]
    fn chain_is_observable_for_nonzero_pole() {
        for td in 0..8 {
            for a in [-3.0, -1.0, 0.2, 2.5] {
                let lp = delay_chain_plant(&DelaySpec::new(td, a, 1.0, 1.0)).unwrap();
                assert!(is_observable(&lp.plant.a, &lp.plant.c));
            }
        }
    }

    #[test]
    fn default_weights_penalize_external_signals() {
        let lp = delay_chain_plant(&DelaySpec::new(2, 1.0, 1.0, 1.0)).unwrap();
        let (q, r) = lp.default_weights();
        assert_eq!(q, Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0])));
        assert_eq!(r[(0, 0)], 1.0);
        assert_eq!(r[(1, 1)], INTERNAL_INPUT_WEIGHT);
    }
}
