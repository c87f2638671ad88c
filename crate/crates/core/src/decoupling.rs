//! Conditions under which exergy consumption falls while production grows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_time, zero_growth, Scenario};
use crate::numeric::{bisect, growth_integral, BISECTION_MAX_ITER, BISECTION_TOL};

/// Shock contribution below which a growth trajectory is reported as asymptotic.
pub const ASYMPTOTIC_SHOCK_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// At the policy onset.
    Initial,
    /// The policy shock still shapes the cost trajectory.
    Transient,
    /// The shock has decayed (growth only).
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub t: f64,
    /// Growth rate of the learning part of exergy consumption, per year.
    /// Has the sign of `dE/dt`.
    pub lhs: f64,
    pub decreasing: bool,
    pub regime: Regime,
    /// Set when `r = 0` and `lhs` comes from the zero-growth closed form.
    pub zero_growth: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationDemand {
    pub t: f64,
    /// Exogenous innovation rate that keeps exergy consumption constant at `t`.
    pub h_required: f64,
    pub t_infinity: f64,
}

/// `p r_b e^{rt} / (1 + p r_b G(r,t))`, the rate at which experience erodes cost,
/// divided by λ. Written so that it stays finite through `r = 0` and for `r < 0`.
fn experience_rate(r: f64, p: f64, r_b: f64, t: f64) -> f64 {
    p * r_b * (r * t).exp() / (1.0 + p * r_b * growth_integral(r, t))
}

/// `θ / (1 − θ)`, i.e. `(θ⁻¹ − 1)⁻¹`, which is 0 at θ = 0.
fn floor_share(theta: f64) -> f64 {
    theta / (1.0 - theta)
}

/// The decoupling left-hand side for explicitly supplied `h` and floor ratio `θ_t`:
///
/// `r − h − λ r ([p⁻¹ r/r_b − 1] e^{−rt} + 1)⁻¹ + r (θ_t⁻¹ − 1)⁻¹`.
pub fn condition_value(r: f64, h: f64, lambda: f64, p: f64, r_b: f64, theta_t: f64, t: f64) -> f64 {
    r - h - lambda * experience_rate(r, p, r_b, t) + r * floor_share(theta_t)
}

/// Sign test for `dE/dt` at time `t`.
pub fn decoupling_lhs(scn: &Scenario, t: f64) -> Result<DecouplingReport> {
    let t = check_time(t)?;
    let r = scn.r;
    let lambda = scn.learning.lambda;
    let h = scn.learning.h;
    let p = scn.policy.p;
    let r_b = scn.policy.r_b;

    let regime = if t == 0.0 {
        Regime::Initial
    } else if r > 0.0 && ((r / (p * r_b) - 1.0) * (-r * t).exp()).abs() <= ASYMPTOTIC_SHOCK_FRACTION {
        Regime::Asymptotic
    } else {
        Regime::Transient
    };

    if r == 0.0 {
        // dε/dt / (ε − θ₀) of the zero-growth form: −h − λ p r_b / (1 + p r_b t).
        let lhs = -h - lambda * p * r_b / (1.0 + p * r_b * t);
        return Ok(DecouplingReport {
            t,
            lhs,
            decreasing: lhs < 0.0,
            regime,
            zero_growth: true,
        });
    }

    // c_f / (c_t − c_f) without the cancellation of forming θ_t first.
    let share = scn.learning.c_f / scn.learning_component(t);
    let lhs = r - h - lambda * experience_rate(r, p, r_b, t) + r * share;
    Ok(DecouplingReport {
        t,
        lhs,
        decreasing: lhs < 0.0,
        regime,
        zero_growth: false,
    })
}

/// The decoupling condition at the policy onset: `r − h − λ r_b p + r (θ₀⁻¹ − 1)⁻¹`.
pub fn initial_condition(scn: &Scenario) -> f64 {
    let r = scn.r;
    r - scn.learning.h - scn.learning.lambda * scn.policy.r_b * scn.policy.p + r * floor_share(scn.policy.theta0)
}

fn check_theta(key: &str, theta: f64) -> Result<()> {
    if (0.0..1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::domain(key, format!("must lie in [0, 1), got {theta}")))
    }
}

/// The decoupling condition once the shock has decayed: `r(1 − λ) − h + r (θ⁻¹ − 1)⁻¹`.
pub fn asymptotic_condition(theta: f64, r: f64, lambda: f64, h: f64) -> Result<f64> {
    check_theta("theta", theta)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("r", format!("asymptotic regime needs r > 0, got {r}")));
    }
    Ok(r * (1.0 - lambda) - h + r * floor_share(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Breakeven {
    Rate(f64),
    /// `h = 0`: the asymptotic condition is positive for every `r > 0`.
    NoPositiveRate,
}

impl Breakeven {
    pub fn rate(self) -> Option<f64> {
        match self {
            Breakeven::Rate(r) => Some(r),
            Breakeven::NoPositiveRate => None,
        }
    }
}

fn check_breakeven_inputs(lambda: f64, h: f64, theta: f64) -> Result<()> {
    check_theta("theta", theta)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain("lambda", format!("must lie in (0, 1), got {lambda}")));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::domain("h", format!("must be finite and ≥ 0, got {h}")));
    }
    Ok(())
}

/// Root of [`asymptotic_condition`] found by bisection on `(0, h/(1 − λ)]`.
pub fn breakeven_rate_bisection(lambda: f64, h: f64, theta: f64) -> Result<Breakeven> {
    check_breakeven_inputs(lambda, h, theta)?;
    if h == 0.0 {
        return Ok(Breakeven::NoPositiveRate);
    }
    let f = |r: f64| r * (1.0 - lambda) - h + r * floor_share(theta);
    let root = bisect(f, 0.0, h / (1.0 - lambda), BISECTION_TOL, BISECTION_MAX_ITER)?;
    Ok(Breakeven::Rate(root))
}

/// Growth rate at which exergy consumption is stationary in the asymptotic regime,
/// `r* = h / (1 − λ + (θ⁻¹ − 1)⁻¹)`, cross-checked against bisection.
pub fn breakeven_rate(lambda: f64, h: f64, theta: f64) -> Result<Breakeven> {
    check_breakeven_inputs(lambda, h, theta)?;
    if h == 0.0 {
        return Ok(Breakeven::NoPositiveRate);
    }
    let closed = h / (1.0 - lambda + floor_share(theta));
    let Breakeven::Rate(bisected) = breakeven_rate_bisection(lambda, h, theta)? else {
        unreachable!("h > 0 always brackets a root");
    };
    let residual = closed * (1.0 - lambda) - h + closed * floor_share(theta);
    if (closed - bisected).abs() > BISECTION_TOL || residual.abs() >= BISECTION_TOL {
        return Err(Error::NoConvergence {
            routine: "breakeven verification",
            iterations: BISECTION_MAX_ITER,
        });
    }
    Ok(Breakeven::Rate(closed))
}

/// Time after which no finite innovation rate keeps exergy constant: `−ln(θ₀)/r`.
/// Infinite when `θ₀ = 0`.
pub fn critical_time(theta0: f64, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&theta0) {
        return Err(Error::domain("theta0", format!("must lie in [0, 1), got {theta0}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("r", format!("needs r > 0, got {r}")));
    }
    if theta0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-theta0.ln() / r)
}

/// Innovation rate needed for constant exergy consumption, with `θ_t = θ₀ e^{rt}`.
pub fn required_h(scn: &Scenario, t: f64) -> Result<InnovationDemand> {
    let t = check_time(t)?;
    let r = scn.r;
    let theta0 = scn.policy.theta0;
    let t_infinity = critical_time(theta0, r)?;
    if t >= t_infinity {
        return Err(Error::domain(
            "t",
            format!("t = {t} ≥ t_infinity = {t_infinity}: no finite innovation rate suffices"),
        ));
    }
    let theta_t = theta0 * (r * t).exp();
    let h_required = condition_value(
        r,
        0.0,
        scn.learning.lambda,
        scn.policy.p,
        scn.policy.r_b,
        theta_t,
        t,
    );
    Ok(InnovationDemand {
        t,
        h_required,
        t_infinity,
    })
}

/// Post-shock form `r(1 − λ) + r (θ₀⁻¹ e^{−rt} − 1)⁻¹`.
pub fn required_h_asymptotic(theta0: f64, r: f64, lambda: f64, t: f64) -> Result<f64> {
    let t = check_time(t)?;
    let t_infinity = critical_time(theta0, r)?;
    if t >= t_infinity {
        return Err(Error::domain("t", format!("t = {t} ≥ t_infinity = {t_infinity}")));
    }
    Ok(r * (1.0 - lambda) + r * floor_share(theta0 * (r * t).exp()))
}

/// First time at which the required innovation rate reaches `factor` times its
/// value at the onset.
pub fn innovation_multiple_time(scn: &Scenario, factor: f64) -> Result<f64> {
    if !(factor > 1.0) || !factor.is_finite() {
        return Err(Error::domain("factor", format!("must be finite and > 1, got {factor}")));
    }
    let start = required_h(scn, 0.0)?;
    if start.h_required <= 0.0 {
        return Err(Error::domain(
            "h_required",
            format!("onset requirement {} is not positive", start.h_required),
        ));
    }
    let target = factor * start.h_required;
    let f = |t: f64| match required_h(scn, t) {
        Ok(d) => d.h_required - target,
        Err(_) => f64::INFINITY,
    };
    let hi = if start.t_infinity.is_finite() {
        start.t_infinity * (1.0 - 1e-12)
    } else {
        let mut hi = 1.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::domain("factor", "multiple not reached within 10^6 years"));
            }
        }
        hi
    };
    // scan for the first sign change, then refine
    let steps = 1000;
    let mut lo = 0.0;
    for i in 1..=steps {
        let t = hi * i as f64 / steps as f64;
        if f(t) >= 0.0 {
            return bisect(f, lo, t, BISECTION_TOL, BISECTION_MAX_ITER);
        }
        lo = t;
    }
    Err(Error::domain("factor", "multiple not reached before t_infinity"))
}

/// `dε/dt` for zero growth, re-exported for callers that want the unnormalized slope.
pub fn zero_growth_slope(scn: &Scenario, t: f64) -> Result<f64> {
    zero_growth::exergy_ratio_slope(scn, t)
}
