use crate::error::{Error, Result};
use crate::numerics::solve_filter_dare;
use crate::plant::{delay_chain_plant, DelaySpec};

/// Optimal full-control gains for the scalar plant behind one delay step,
/// with the filter Riccati entries they come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGains {
    pub l1: f64,
    pub l2: f64,
    /// Off-diagonal Riccati entry.
    pub p2: f64,
    /// Delay-state Riccati entry, `p2 / a` away from `a = 0`.
    pub p22: f64,
    /// `None` when `a = 0`, where the closed form is undefined.
    pub beta: Option<f64>,
    /// Set when the gains come from the Riccati iteration instead of the closed form.
    pub limit_case: bool,
}

/// Closed-form filter gains for
///
/// ```text
/// x_1(t+1) = a x_1(t) + u_1(t) + w(t)
/// x_2(t+1) = x_1(t) + u_2(t)
///     y(t) = x_2(t) + v(t)
/// ```
///
/// with `P = [[p11, p2], [p2, p22]]`:
///
/// ```text
/// beta = (1/a - a) sv^2 - sw^2 / a
///   p2 = (a^2 / 2) (-beta + sgn(a) sqrt(beta^2 + (2 sw sv / a)^2))
///  p22 = p2 / a
///   l2 = p2 / (p22 + sv^2),   l1 = a l2
/// ```
///
/// The `sgn(a)` branch is the one giving `P >= 0`. When the two terms
/// cancel, the bracket is evaluated as `c / (beta + sgn(a) sqrt(...))`.
/// At `a = 0` the Riccati iteration is used instead and `limit_case` is set.
/// For `|a| = 1, sw = 0` this returns the minimal solution `p2 = 0`, which
/// does not stabilize the estimator.
pub fn scalar_delay_gains(a: f64, sigma_w: f64, sigma_v: f64) -> Result<DelayGains> {
    if !(a.is_finite() && sigma_w.is_finite() && sigma_v.is_finite()) {
        return Err(Error::input("plant parameters must be finite"));
    }
    if sigma_w < 0.0 || sigma_v < 0.0 {
        return Err(Error::input("noise standard deviations must be nonnegative"));
    }
    if sigma_w == 0.0 && sigma_v == 0.0 {
        return Err(Error::input("sigma_w and sigma_v cannot both be zero"));
    }
    if a == 0.0 {
        let lp = delay_chain_plant(&DelaySpec::new(1, 0.0, sigma_w, sigma_v))?;
        let p = &lp.plant;
        let sol = solve_filter_dare(&p.a, &p.c, &p.w, &p.v)?;
        return Ok(DelayGains {
            l1: sol.gain[(0, 0)],
            l2: sol.gain[(1, 0)],
            p2: sol.p[(0, 1)],
            p22: sol.p[(1, 1)],
            beta: None,
            limit_case: true,
        });
    }
    let sv2 = sigma_v * sigma_v;
    let s = a.signum();
    let beta = (1.0 / a - a) * sv2 - sigma_w * sigma_w / a;
    let c = (2.0 * sigma_w * sigma_v / a).powi(2);
    let root = beta.hypot(2.0 * sigma_w * sigma_v / a);
    let bracket = if s * beta > 0.0 {
        c / (beta + s * root)
    } else {
        -beta + s * root
    };
    let p2 = 0.5 * a * a * bracket;
    let p22 = p2 / a;
    let l2 = p2 / (p22 + sv2);
    Ok(DelayGains {
        l1: a * l2,
        l2,
        p2,
        p22,
        beta: Some(beta),
        limit_case: false,
    })
}
