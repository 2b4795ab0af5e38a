//! Consistency checks on saved controller artifacts.

use std::fmt;

use crate::controllers::ControllerParams;
use crate::error::Result;
use crate::format::ControllerArtifact;
use crate::numerics::{dare_residual, max_abs, riccati_gain, Matrix};
use crate::sim::closed_loop_radius;
use crate::sls::check_achievability;

/// Relative tolerance for Riccati residuals and gain reconstruction.
pub const RICCATI_TOL: f64 = 1e-9;
/// Absolute tolerance for SLS achievability residuals.
pub const ACHIEVABILITY_TOL: f64 = 1e-9;
/// Largest spectral radius accepted as stable.
pub const STABLE_RADIUS: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditItem {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl AuditItem {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

impl fmt::Display for AuditItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub items: Vec<AuditItem>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(AuditItem::passed)
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64) {
        self.items.push(AuditItem {
            name: name.to_string(),
            value,
            tolerance,
        });
    }
}

/// Riccati residuals and gain reconstruction for stored `P` matrices,
/// achievability for SLS responses, and closed-loop stability.
pub fn audit(art: &ControllerArtifact) -> Result<AuditReport> {
    let p = &art.plant.plant;
    let ctrl = &art.controller;
    let mut rep = AuditReport::default();

    let control_k = match ctrl.control_p() {
        Some(pc) => {
            let tol = RICCATI_TOL * max_abs(pc).max(1.0);
            rep.push("control DARE residual", dare_residual(&p.a, &p.b, &art.q, &art.r, pc)?, tol);
            Some((riccati_gain(&p.a, &p.b, &art.q, &art.r, pc)?, tol))
        }
        None => None,
    };
    let filter_l = match ctrl.filter_p() {
        Some(pf) => {
            let (at, ct) = (p.a.transpose(), p.c.transpose());
            let tol = RICCATI_TOL * max_abs(pf).max(1.0);
            rep.push("filter DARE residual", dare_residual(&at, &ct, &p.w, &p.v, pf)?, tol);
            Some((riccati_gain(&at, &ct, &p.w, &p.v, pf)?.transpose(), tol))
        }
        None => None,
    };

    match ctrl.params() {
        ControllerParams::StaticGain { gain } => {
            if let Some((k, tol)) = &control_k {
                if let Some(c_inv) = p.c.clone().try_inverse() {
                    let expected: Matrix = -(k * c_inv);
                    rep.push("gain matches control DARE", max_abs(&(gain - expected)), *tol);
                }
            }
            if let Some((l, tol)) = &filter_l {
                rep.push("gain matches filter DARE", max_abs(&(gain + l)), *tol);
            }
        }
        ControllerParams::Observer { k, l, .. } => {
            if let Some((kk, tol)) = &control_k {
                rep.push("K matches control DARE", max_abs(&(k - kk)), *tol);
            }
            if let Some((ll, tol)) = &filter_l {
                rep.push("L matches filter DARE", max_abs(&(l - ll)), *tol);
            }
        }
        ControllerParams::Sls(resp) => {
            let ach = check_achievability(resp, p)?;
            rep.push("phi_x.1 = I", ach.identity, ACHIEVABILITY_TOL);
            let rec = ach.recursion.iter().copied().fold(0.0, f64::max);
            rep.push("achievability recursion", rec, ACHIEVABILITY_TOL);
            rep.push("terminal condition", ach.terminal, ACHIEVABILITY_TOL);
            rep.push("masked entries", ach.mask, 0.0);
        }
    }

    let rho = closed_loop_radius(p, ctrl)?;
    rep.push("closed-loop spectral radius", rho, STABLE_RADIUS);
    Ok(rep)
}
