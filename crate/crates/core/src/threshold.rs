//! Threshold `(ε*, y*)` of the regular ensemble and the finite-length scaling
//! parameter `α`.
//!
//! At the threshold the degree-one fraction `x (y - 1 + (1-x)^(d-1))` touches
//! zero tangentially at a nonzero `y*`. Parametrized by `x*` the two conditions
//! become `y* = 1 - (1-x*)^(d-1)` and `y* = (b-1)(d-1) x* (1-x*)^(d-2)`.

use crate::analytic::delta_rr;
use crate::ensemble::{ipow, state_point, EnsembleParams};
use crate::error::{Error, Result};

const SCAN_POINTS: usize = 1024;
const BISECT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// Tangential zero of the degree-one fraction at `y* > 0`.
    Critical,
    /// `b = 2`: the threshold is the stability limit `1/(d-1)` and the
    /// critical point collapses to `y* -> 0`. `y_star` and `x_star` are 0.
    StabilityLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub eps_star: f64,
    pub y_star: f64,
    pub x_star: f64,
    pub x_tilde_star: f64,
    pub kind: ThresholdKind,
}

impl ThresholdPoint {
    /// Residuals of the two critical-point conditions.
    pub fn residuals(&self, params: EnsembleParams) -> (f64, f64) {
        let (b, d) = (f64::from(params.b()), params.d());
        let r1 = self.y_star - (1.0 - ipow(self.x_tilde_star, d - 1));
        let r2 = self.y_star - (b - 1.0) * f64::from(d - 1) * self.x_star * ipow(self.x_tilde_star, d - 2);
        (r1, r2)
    }

    fn require_critical(&self, what: &'static str) -> Result<()> {
        match self.kind {
            ThresholdKind::Critical => Ok(()),
            ThresholdKind::StabilityLimit => Err(Error::DegenerateThreshold { what }),
        }
    }
}

fn critical_gap(b: u32, d: u32, x: f64) -> f64 {
    let xt = 1.0 - x;
    f64::from(b - 1) * f64::from(d - 1) * x * ipow(xt, d - 2) - (1.0 - ipow(xt, d - 1))
}

pub fn solve_threshold(params: EnsembleParams) -> Result<ThresholdPoint> {
    let (b, d) = (params.b(), params.d());
    if b == 2 {
        return Ok(ThresholdPoint {
            eps_star: 1.0 / f64::from(d - 1),
            y_star: 0.0,
            x_star: 0.0,
            x_tilde_star: 1.0,
            kind: ThresholdKind::StabilityLimit,
        });
    }
    let f = |x: f64| critical_gap(b, d, x);
    let grid = |i: usize| i as f64 / SCAN_POINTS as f64;
    let (mut lo, mut hi) = (1..SCAN_POINTS)
        .map(|i| (grid(i), grid(i + 1)))
        .find(|&(a, c)| f(a) > 0.0 && f(c) <= 0.0)
        .ok_or(Error::NoRoot { b, d })?;
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_star = 0.5 * (lo + hi);
    let x_tilde_star = 1.0 - x_star;
    let y_star = 1.0 - ipow(x_tilde_star, d - 1);
    let eps_star = x_star / ipow(y_star, b - 1);
    if !(eps_star > 0.0 && eps_star < 1.0) {
        return Err(Error::NoRoot { b, d });
    }
    Ok(ThresholdPoint { eps_star, y_star, x_star, x_tilde_star, kind: ThresholdKind::Critical })
}

/// `δ^{r_1,r_1}(ε*, y*) = x* y* (y* - x*) / (b-1)`.
pub fn delta_r1r1_at_threshold(tp: &ThresholdPoint, params: EnsembleParams) -> Result<f64> {
    tp.require_critical("delta_r1r1 at threshold")?;
    Ok(tp.x_star * tp.y_star * (tp.y_star - tp.x_star) / f64::from(params.b() - 1))
}

/// `∂e_{r_1}/∂ε` at `(ε*, y*)`: `-x* y* / (ε* (b-1))`.
pub fn dr1_deps_at_threshold(tp: &ThresholdPoint, params: EnsembleParams) -> Result<f64> {
    tp.require_critical("d r_1 / d epsilon at threshold")?;
    Ok(-tp.x_star * tp.y_star / (tp.eps_star * f64::from(params.b() - 1)))
}

/// Scaling parameter `α = ε* sqrt((b-1)/b (1/x* - 1/y*))`.
pub fn scaling_alpha(params: EnsembleParams) -> Result<f64> {
    let tp = solve_threshold(params)?;
    tp.require_critical("alpha")?;
    let b = f64::from(params.b());
    Ok(tp.eps_star * ((b - 1.0) / b * (1.0 / tp.x_star - 1.0 / tp.y_star)).sqrt())
}

/// `α` assembled from its definition,
/// `-sqrt(δ^{r_1,r_1}(ε*,y*)) / (sqrt(ξ/n) ∂e_{r_1}/∂ε)`, with the variance
/// taken from the full closed-form covariance at the threshold point.
pub fn alpha_from_definition(params: EnsembleParams, tp: &ThresholdPoint) -> Result<f64> {
    tp.require_critical("alpha")?;
    let sp = state_point(params, tp.eps_star, tp.y_star)?;
    let var = delta_rr(params, 1, 1, &sp)?;
    let slope = dr1_deps_at_threshold(tp, params)?;
    Ok(-var.sqrt() / (params.edges_per_variable().sqrt() * slope))
}
