//! Learning-curve family and closed-form cost / exergy trajectories.
//!
//! Cost of one unit of product follows
//!
//! ```text
//! c(t) = c_f + a · (Q₀ᵉ + [Q(t) − Q₀])^(−λ) · e^(−h t)
//! ```
//!
//! where production grows as `y(t) = y₀ e^{rt}` from the policy onset `t = 0`
//! and `Q₀ᵉ = Q₀ / p` is the effective experience after the policy shock.
//! Everything here is evaluated in closed form; nothing is time-stepped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, growth_integral, BISECTION_MAX_ITER, BISECTION_TOL};

pub const LAMBDA_RANGE: (f64, f64) = (0.0, 1.0);
pub const H_RANGE: (f64, f64) = (0.0, 1.0);
pub const P_RANGE: (f64, f64) = (1.0, 100.0);
pub const THETA0_RANGE: (f64, f64) = (0.0, 0.999);
pub const R_RANGE: (f64, f64) = (-0.2, 0.2);

/// Whether plausibility ranges are enforced on top of the hard invariants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bounds {
    #[default]
    Strict,
    /// Relax the plausibility ranges; hard invariants (a > 0, p ≥ 1, ...) still apply.
    Override,
}

impl Bounds {
    pub fn from_override(override_bounds: bool) -> Self {
        if override_bounds {
            Bounds::Override
        } else {
            Bounds::Strict
        }
    }

    fn strict(self) -> bool {
        self == Bounds::Strict
    }
}

fn finite(key: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::validation(key, format!("must be finite, got {value}")))
    }
}

fn check_range(key: &str, value: f64, (lo, hi): (f64, f64), open_lo: bool, open_hi: bool) -> Result<()> {
    let below = if open_lo { value <= lo } else { value < lo };
    let above = if open_hi { value >= hi } else { value > hi };
    if below || above {
        let l = if open_lo { '(' } else { '[' };
        let r = if open_hi { ')' } else { ']' };
        return Err(Error::validation(
            key,
            format!("{value} outside default range {l}{lo}, {hi}{r} (use override to relax)"),
        ));
    }
    Ok(())
}

pub(crate) fn check_time(t: f64) -> Result<f64> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(Error::domain(
            "t",
            format!("time is measured from policy onset and must be finite and ≥ 0, got {t}"),
        ))
    }
}

/// Parameters of the learning-curve family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    /// Curve scale, cost × (production units)^λ.
    pub a: f64,
    /// Endogenous learning exponent.
    pub lambda: f64,
    /// Exogenous innovation rate, per year.
    pub h: f64,
    /// Floor thermodynamic cost.
    pub c_f: f64,
}

impl LearningParams {
    pub fn new(a: f64, lambda: f64, h: f64, c_f: f64, bounds: Bounds) -> Result<Self> {
        let params = LearningParams { a, lambda, h, c_f };
        params.validate(bounds)?;
        Ok(params)
    }

    pub fn validate(&self, bounds: Bounds) -> Result<()> {
        finite("a", self.a)?;
        finite("lambda", self.lambda)?;
        finite("h", self.h)?;
        finite("c_f", self.c_f)?;
        if self.a <= 0.0 {
            return Err(Error::validation("a", format!("must be > 0, got {}", self.a)));
        }
        if self.h < 0.0 {
            return Err(Error::validation("h", format!("must be ≥ 0, got {}", self.h)));
        }
        if self.c_f < 0.0 {
            return Err(Error::validation("c_f", format!("must be ≥ 0, got {}", self.c_f)));
        }
        if bounds.strict() {
            check_range("lambda", self.lambda, LAMBDA_RANGE, true, true)?;
            check_range("h", self.h, H_RANGE, false, false)?;
        }
        Ok(())
    }
}

/// Member of the learning-curve family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    /// `a Q^-λ`
    Wright,
    /// `a e^-ht`
    Moore,
    /// `a Q^-λ e^-ht`
    Combined,
    /// `c_f + a Q^-λ e^-ht`
    Floor,
}

impl CurveKind {
    pub const ALL: [CurveKind; 4] = [
        CurveKind::Wright,
        CurveKind::Moore,
        CurveKind::Combined,
        CurveKind::Floor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Wright => "wright",
            CurveKind::Moore => "moore",
            CurveKind::Combined => "combined",
            CurveKind::Floor => "floor",
        }
    }

    /// Number of free parameters when fitted.
    pub fn parameter_count(self) -> usize {
        match self {
            CurveKind::Wright | CurveKind::Moore => 2,
            CurveKind::Combined => 3,
            CurveKind::Floor => 4,
        }
    }

    pub(crate) fn uses_q(self) -> bool {
        self != CurveKind::Moore
    }

    pub(crate) fn uses_t(self) -> bool {
        self != CurveKind::Wright
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wright" => Ok(CurveKind::Wright),
            "moore" => Ok(CurveKind::Moore),
            "combined" | "nordhaus" => Ok(CurveKind::Combined),
            "floor" => Ok(CurveKind::Floor),
            other => Err(Error::validation(
                "kind",
                format!("unknown curve kind `{other}` (expected wright|moore|combined|floor)"),
            )),
        }
    }
}

/// Evaluate one member of the curve family at cumulative production `q` and time `t`.
///
/// Factors the selected kind does not use are dropped; `c_f` is added only for
/// [`CurveKind::Floor`].
pub fn eval_curve(kind: CurveKind, params: &LearningParams, q: f64, t: f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::domain("Q", format!("cumulative production must be > 0, got {q}")));
    }
    if !t.is_finite() {
        return Err(Error::domain("t", format!("must be finite, got {t}")));
    }
    let mut cost = params.a;
    if kind.uses_q() {
        cost *= q.powf(-params.lambda);
    }
    if kind.uses_t() {
        cost *= (-params.h * t).exp();
    }
    if kind == CurveKind::Floor {
        cost += params.c_f;
    }
    Ok(cost)
}

/// Cost of a unit of product saved by the policy shock relative to the pre-shock curve,
/// inverted for the policy coefficient: `p = (1 − γ/(1 − θ₀))^(−1/λ)`.
pub fn policy_coefficient_from_gamma(gamma: f64, theta0: f64, lambda: f64) -> Result<f64> {
    finite("gamma", gamma)?;
    finite("theta0", theta0)?;
    finite("lambda", lambda)?;
    if !(0.0..1.0).contains(&theta0) {
        return Err(Error::validation("theta0", format!("must lie in [0, 1), got {theta0}")));
    }
    if lambda <= 0.0 {
        return Err(Error::validation("lambda", format!("must be > 0, got {lambda}")));
    }
    if gamma < 0.0 {
        return Err(Error::validation("gamma", format!("must be ≥ 0, got {gamma}")));
    }
    let margin = 1.0 - theta0;
    if gamma >= margin {
        return Err(Error::validation(
            "gamma",
            format!("policy savings exceed physical margin: gamma = {gamma} ≥ 1 − theta0 = {margin}"),
        ));
    }
    Ok((1.0 - gamma / margin).powf(-1.0 / lambda))
}

/// State of the sector at the policy onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyContext {
    /// Policy impact coefficient `Q₀ / Q₀ᵉ`.
    pub p: f64,
    /// Pre-policy integrated growth rate `y₀ / Q₀`, per year.
    pub r_b: f64,
    pub y0: f64,
    pub q0: f64,
    pub q0_eff: f64,
    pub c0: f64,
    pub theta0: f64,
}

pub fn derive_policy_context(
    learning: &LearningParams,
    y0: f64,
    r_b: f64,
    p: f64,
    bounds: Bounds,
) -> Result<PolicyContext> {
    finite("y0", y0)?;
    finite("r_b", r_b)?;
    finite("p", p)?;
    if y0 <= 0.0 {
        return Err(Error::validation("y0", format!("must be > 0, got {y0}")));
    }
    if r_b <= 0.0 {
        return Err(Error::validation("r_b", format!("must be > 0, got {r_b}")));
    }
    if p < 1.0 {
        return Err(Error::validation(
            "p",
            format!("must be ≥ 1 (effective experience Q0_eff ≤ Q0), got {p}"),
        ));
    }
    if bounds.strict() {
        check_range("p", p, P_RANGE, false, false)?;
    }
    let q0 = y0 / r_b;
    let q0_eff = y0 / (p * r_b);
    let c0 = learning.c_f + learning.a * q0_eff.powf(-learning.lambda);
    let theta0 = learning.c_f / c0;
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(Error::validation("a", format!("initial cost is not positive and finite: {c0}")));
    }
    if bounds.strict() {
        check_range("theta0", theta0, THETA0_RANGE, false, false)?;
    }
    Ok(PolicyContext {
        p,
        r_b,
        y0,
        q0,
        q0_eff,
        c0,
        theta0,
    })
}

/// Scenario in relative form: `c₀ = 1` and `y₀ = 1` are implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeParams {
    pub theta0: f64,
    pub lambda: f64,
    pub h: f64,
    pub p: f64,
    pub r_b: f64,
    pub r: f64,
}

/// Scenario in absolute form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteParams {
    pub a: f64,
    pub c_f: f64,
    pub lambda: f64,
    pub h: f64,
    pub y0: f64,
    pub r_b: f64,
    pub p: f64,
    pub r: f64,
}

/// Learning parameters, policy state and post-policy growth rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub learning: LearningParams,
    pub policy: PolicyContext,
    /// Post-policy production growth rate, per year.
    pub r: f64,
}

/// One sample of a scenario trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub y: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub c: f64,
    pub c_ratio: f64,
    pub theta: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub epsilon: f64,
}

/// Uniform time grid `0, dt, 2dt, ...` up to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub t_max: f64,
    pub dt: f64,
}

impl Sampling {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        let s = Sampling { t_max, dt };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        finite("sampling.dt", self.dt)?;
        finite("sampling.t_max", self.t_max)?;
        if self.dt <= 0.0 {
            return Err(Error::validation("sampling.dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.t_max < self.dt {
            return Err(Error::validation(
                "sampling.t_max",
                format!("must be ≥ dt ({}), got {}", self.dt, self.t_max),
            ));
        }
        if self.t_max / self.dt > 1e7 {
            return Err(Error::validation("sampling.dt", "more than 10^7 samples requested"));
        }
        Ok(())
    }

    /// Sample times `i·dt` for `i = 0..=⌊t_max/dt⌋`, tolerant to rounding in the quotient.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.dt).collect()
    }
}

impl Scenario {
    pub fn new(learning: LearningParams, policy: PolicyContext, r: f64, bounds: Bounds) -> Result<Self> {
        learning.validate(bounds)?;
        finite("r", r)?;
        if bounds.strict() {
            check_range("r", r, R_RANGE, false, false)?;
        }
        Ok(Scenario { learning, policy, r })
    }

    /// Build from the relative parameter set, normalizing `c₀ = 1`, `y₀ = 1`.
    pub fn relative(params: RelativeParams, bounds: Bounds) -> Result<Self> {
        let RelativeParams { theta0, lambda, h, p, r_b, r } = params;
        finite("theta0", theta0)?;
        finite("p", p)?;
        finite("r_b", r_b)?;
        if !(0.0..1.0).contains(&theta0) {
            return Err(Error::validation("theta0", format!("must lie in [0, 1), got {theta0}")));
        }
        if bounds.strict() {
            check_range("theta0", theta0, THETA0_RANGE, false, false)?;
        }
        if p < 1.0 {
            return Err(Error::validation(
                "p",
                format!("must be ≥ 1 (effective experience Q0_eff ≤ Q0), got {p}"),
            ));
        }
        if r_b <= 0.0 {
            return Err(Error::validation("r_b", format!("must be > 0, got {r_b}")));
        }
        finite("lambda", lambda)?;
        let q0_eff = 1.0 / (p * r_b);
        let a = (1.0 - theta0) * q0_eff.powf(lambda);
        let learning = LearningParams::new(a, lambda, h, theta0, bounds)?;
        let policy = derive_policy_context(&learning, 1.0, r_b, p, bounds)?;
        Scenario::new(learning, policy, r, bounds)
    }

    pub fn absolute(params: AbsoluteParams, bounds: Bounds) -> Result<Self> {
        let AbsoluteParams { a, c_f, lambda, h, y0, r_b, p, r } = params;
        let learning = LearningParams::new(a, lambda, h, c_f, bounds)?;
        let policy = derive_policy_context(&learning, y0, r_b, p, bounds)?;
        Scenario::new(learning, policy, r, bounds)
    }

    /// The relative parameter set describing this scenario.
    pub fn relative_params(&self) -> RelativeParams {
        RelativeParams {
            theta0: self.policy.theta0,
            lambda: self.learning.lambda,
            h: self.learning.h,
            p: self.policy.p,
            r_b: self.policy.r_b,
            r: self.r,
        }
    }

    /// Same scenario with a different post-policy growth rate.
    pub fn with_growth(&self, r: f64) -> Self {
        Scenario { r, ..*self }
    }

    fn g(&self, t: f64) -> f64 {
        growth_integral(self.r, t)
    }

    /// `y₀ e^{rt}`.
    pub fn production_at(&self, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        Ok(self.policy.y0 * (self.r * t).exp())
    }

    /// `Q₀ + y₀ (e^{rt} − 1)/r`, which is `Q₀ + y₀ t` at zero growth.
    pub fn cumulative_production(&self, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        Ok(self.policy.q0 + self.policy.y0 * self.g(t))
    }

    /// Cost above the floor: `a (Q₀ᵉ + y₀ G(r,t))^(−λ) e^(−ht)`.
    pub(crate) fn learning_component(&self, t: f64) -> f64 {
        let LearningParams { a, lambda, h, .. } = self.learning;
        let experience = self.policy.q0_eff + self.policy.y0 * self.g(t);
        a * experience.powf(-lambda) * (-h * t).exp()
    }

    pub fn cost_at(&self, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        Ok(self.learning.c_f + self.learning_component(t))
    }

    /// `c_t / c₀ = θ₀ + (1 − θ₀)(1 + p r_b G(r,t))^(−λ) e^(−ht)`.
    pub fn cost_ratio(&self, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        let PolicyContext { p, r_b, theta0, .. } = self.policy;
        let shock = (1.0 + p * r_b * self.g(t)).powf(-self.learning.lambda);
        Ok(theta0 + (1.0 - theta0) * shock * (-self.learning.h * t).exp())
    }

    /// Exergy consumption `E = c · y`.
    pub fn exergy_at(&self, t: f64) -> Result<f64> {
        Ok(self.cost_at(t)? * self.production_at(t)?)
    }

    /// Exergy consumption from its expanded closed form
    /// `c_f y₀ e^{rt} + a y₀^{1−λ} ((p r_b)⁻¹ + G(r,t))^(−λ) e^{(r−h)t}`.
    pub fn exergy_expanded(&self, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        let LearningParams { a, lambda, h, c_f } = self.learning;
        let PolicyContext { p, r_b, y0, .. } = self.policy;
        let floor = c_f * y0 * (self.r * t).exp();
        let learning =
            a * y0.powf(1.0 - lambda) * (1.0 / (p * r_b) + self.g(t)).powf(-lambda) * ((self.r - h) * t).exp();
        Ok(floor + learning)
    }

    /// `ε_t = E_t / E₀ = θ₀ e^{rt} + (1 − θ₀)(1 + p r_b G(r,t))^(−λ) e^{(r−h)t}`.
    pub fn exergy_ratio(&self, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        let PolicyContext { p, r_b, theta0, .. } = self.policy;
        let growth = (self.r * t).exp();
        let shock = (1.0 + p * r_b * self.g(t)).powf(-self.learning.lambda);
        Ok(theta0 * growth + (1.0 - theta0) * shock * ((self.r - self.learning.h) * t).exp())
    }

    /// Long-run form once the policy shock has decayed, as `(E, ε)`. Defined for `r > 0` only.
    pub fn asymptotic_exergy(&self, t: f64) -> Result<(f64, f64)> {
        let t = check_time(t)?;
        if self.r <= 0.0 {
            return Err(Error::domain(
                "r",
                format!("asymptotic form needs growth r > 0, got {}", self.r),
            ));
        }
        let LearningParams { a, lambda, h, c_f } = self.learning;
        let PolicyContext { p, r_b, y0, theta0, .. } = self.policy;
        let r = self.r;
        let decay = (((1.0 - lambda) * r - h) * t).exp();
        let e = c_f * y0 * (r * t).exp() + a * y0.powf(1.0 - lambda) * r.powf(lambda) * decay;
        let eps = theta0 * (r * t).exp() + (1.0 - theta0) * (p * r_b / r).powf(-lambda) * decay;
        Ok((e, eps))
    }

    pub fn point(&self, t: f64) -> Result<TrajectoryPoint> {
        let y = self.production_at(t)?;
        let q = self.cumulative_production(t)?;
        let c = self.cost_at(t)?;
        let e = c * y;
        let e0 = self.policy.c0 * self.policy.y0;
        Ok(TrajectoryPoint {
            t,
            y,
            q,
            c,
            c_ratio: c / self.policy.c0,
            theta: self.learning.c_f / c,
            e,
            epsilon: e / e0,
        })
    }

    pub fn trajectory(&self, sampling: &Sampling) -> Result<Vec<TrajectoryPoint>> {
        sampling.validate()?;
        sampling.times().into_iter().map(|t| self.point(t)).collect()
    }

    /// Time at which `c_t / c₀` first falls to `target`, for non-negative growth.
    pub fn time_to_cost_ratio(&self, target: f64) -> Result<f64> {
        if self.r < 0.0 {
            return Err(Error::domain("r", "cost is not monotone under negative growth"));
        }
        let theta0 = self.policy.theta0;
        if !(target > theta0 && target <= 1.0) {
            return Err(Error::domain(
                "target",
                format!("cost ratio target must lie in (theta0, 1] = ({theta0}, 1], got {target}"),
            ));
        }
        if target == 1.0 {
            return Ok(0.0);
        }
        let f = |t: f64| self.cost_ratio(t).unwrap_or(f64::NAN) - target;
        let mut hi = 1.0;
        while f(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::domain("target", "cost ratio not reached within 10^6 years"));
            }
        }
        bisect(f, 0.0, hi, BISECTION_TOL, BISECTION_MAX_ITER)
    }
}

/// Closed forms for zero growth, kept separate from the general path as a cross-check.
pub mod zero_growth {
    use super::*;

    /// `c_t = c_f + a y₀^(−λ) ((p r_b)⁻¹ + t)^(−λ) e^(−ht)`.
    pub fn cost(scn: &Scenario, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        let LearningParams { a, lambda, h, c_f } = scn.learning;
        let PolicyContext { p, r_b, y0, .. } = scn.policy;
        Ok(c_f + a * y0.powf(-lambda) * (1.0 / (p * r_b) + t).powf(-lambda) * (-h * t).exp())
    }

    /// `ε_t = θ₀ + (1 − θ₀)(1 + p r_b t)^(−λ) e^(−ht)`.
    pub fn exergy_ratio(scn: &Scenario, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        let PolicyContext { p, r_b, theta0, .. } = scn.policy;
        let LearningParams { lambda, h, .. } = scn.learning;
        Ok(theta0 + (1.0 - theta0) * (1.0 + p * r_b * t).powf(-lambda) * (-h * t).exp())
    }

    /// `dε/dt` of [`exergy_ratio`]; never positive for λ, h ≥ 0.
    pub fn exergy_ratio_slope(scn: &Scenario, t: f64) -> Result<f64> {
        let t = check_time(t)?;
        let PolicyContext { p, r_b, theta0, .. } = scn.policy;
        let LearningParams { lambda, h, .. } = scn.learning;
        let x = 1.0 + p * r_b * t;
        let excess = (1.0 - theta0) * x.powf(-lambda) * (-h * t).exp();
        Ok(-excess * (h + lambda * p * r_b / x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(r: f64) -> Scenario {
        Scenario::relative(
            RelativeParams {
                theta0: 0.2,
                lambda: 1.0 / 3.0,
                h: 0.01,
                p: 2.6,
                r_b: 0.025,
                r,
            },
            Bounds::Strict,
        )
        .unwrap()
    }

    #[test]
    fn curve_examples() {
        let p = LearningParams::new(1.0, 1.0 / 3.0, 0.01, 0.0, Bounds::Strict).unwrap();
        assert!((eval_curve(CurveKind::Wright, &p, 8.0, 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(eval_curve(CurveKind::Moore, &p, 8.0, 0.0).unwrap(), 1.0);
        let f = LearningParams::new(0.8, 1.0 / 3.0, 0.0, 0.2, Bounds::Strict).unwrap();
        let mut prev = f64::INFINITY;
        for q in [1e3, 1e6, 1e9, 1e12] {
            let c = eval_curve(CurveKind::Floor, &f, q, 0.0).unwrap();
            assert!(c > 0.2 && c < prev);
            prev = c;
        }
        assert!(prev - 0.2 < 1e-4);
    }

    #[test]
    fn curve_rejects_nonpositive_q() {
        let p = LearningParams::new(1.0, 0.3, 0.0, 0.0, Bounds::Strict).unwrap();
        assert!(matches!(eval_curve(CurveKind::Wright, &p, 0.0, 0.0), Err(Error::Domain { .. })));
        assert!(eval_curve(CurveKind::Floor, &p, -1.0, 0.0).is_err());
    }

    #[test]
    fn learning_param_validation() {
        assert!(LearningParams::new(0.0, 0.3, 0.0, 0.0, Bounds::Strict).is_err());
        assert!(LearningParams::new(1.0, 1.0, 0.0, 0.0, Bounds::Strict).is_err());
        assert!(LearningParams::new(1.0, 0.0, 0.0, 0.0, Bounds::Strict).is_err());
        assert!(LearningParams::new(1.0, 1.2, 0.0, 0.0, Bounds::Override).is_ok());
        assert!(LearningParams::new(1.0, 0.3, -0.01, 0.0, Bounds::Override).is_err());
        assert!(LearningParams::new(1.0, 0.3, 0.0, -1.0, Bounds::Override).is_err());
        let err = LearningParams::new(1.0, 0.3, 2.0, 0.0, Bounds::Strict).unwrap_err();
        assert_eq!(err.key().as_deref(), Some("h"));
    }

    #[test]
    fn gamma_to_p() {
        let p = policy_coefficient_from_gamma(0.22, 0.2, 1.0 / 3.0).unwrap();
        assert!((p - 2.624).abs() < 1e-3);
        assert_eq!(policy_coefficient_from_gamma(0.0, 0.5, 0.3).unwrap(), 1.0);
        let p0 = policy_coefficient_from_gamma(0.22, 0.0, 1.0 / 3.0).unwrap();
        assert!((p0 - 0.78f64.powi(-3)).abs() < 1e-12);
        assert!((p0 - 2.108).abs() < 1e-3);
        let err = policy_coefficient_from_gamma(0.8, 0.2, 1.0 / 3.0).unwrap_err();
        assert!(err.to_string().contains("physical margin"));
    }

    #[test]
    fn policy_context_without_shock_or_floor() {
        let l = LearningParams::new(3.0, 0.25, 0.0, 0.0, Bounds::Strict).unwrap();
        let ctx = derive_policy_context(&l, 2.0, 0.05, 1.0, Bounds::Strict).unwrap();
        assert_eq!(ctx.q0_eff, ctx.q0);
        assert_eq!(ctx.theta0, 0.0);
        assert!(derive_policy_context(&l, 2.0, 0.05, 0.9, Bounds::Strict).is_err());
        assert!(derive_policy_context(&l, 0.0, 0.05, 1.0, Bounds::Strict).is_err());
        assert!(derive_policy_context(&l, 1.0, -0.05, 1.0, Bounds::Strict).is_err());
    }

    #[test]
    fn relative_form_normalizes_initial_cost() {
        let s = fig1(0.025);
        assert!((s.policy.c0 - 1.0).abs() < 1e-15);
        assert!((s.policy.theta0 - 0.2).abs() < 1e-15);
        assert_eq!(s.policy.y0, 1.0);
        assert!(s.policy.q0_eff <= s.policy.q0);
    }

    #[test]
    fn production_examples() {
        let l = LearningParams::new(1.0, 0.3, 0.0, 0.0, Bounds::Strict).unwrap();
        let ctx = derive_policy_context(&l, 1.0, 0.025, 1.0, Bounds::Strict).unwrap();
        assert_eq!(ctx.q0, 40.0);
        let flat = Scenario::new(l, ctx, 0.0, Bounds::Strict).unwrap();
        assert_eq!(flat.production_at(50.0).unwrap(), 1.0);
        assert_eq!(flat.cumulative_production(50.0).unwrap(), 90.0);
        let grow = flat.with_growth(0.025);
        assert_eq!(grow.cumulative_production(0.0).unwrap(), 40.0);
        let q = grow.cumulative_production(50.0).unwrap();
        assert!((q - 139.613_718_298_473_66).abs() < 1e-9, "{q}");
        assert!(grow.production_at(-1.0).is_err());
    }

    #[test]
    fn fig1_cost_checkpoints() {
        let s = fig1(0.025);
        assert!((s.cost_ratio(5.0).unwrap() - 0.889).abs() < 1e-3);
        assert!((s.cost_ratio(50.0).unwrap() - 0.448).abs() < 1e-3);
        assert!((s.time_to_cost_ratio(0.78).unwrap() - 11.45).abs() < 0.05);
        assert_eq!(s.cost_ratio(0.0).unwrap(), 1.0);
    }

    #[test]
    fn pure_wright_growth() {
        let s = Scenario::relative(
            RelativeParams { theta0: 0.0, lambda: 0.3, h: 0.0, p: 1.0, r_b: 0.03, r: 0.03 },
            Bounds::Strict,
        )
        .unwrap();
        for t in [0.0f64, 1.0, 10.0, 80.0] {
            let expected = (-0.3 * 0.03 * t).exp();
            assert!((s.cost_ratio(t).unwrap() / expected - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn cost_pinned_near_floor() {
        let s = Scenario::relative(
            RelativeParams { theta0: 1.0 - 1e-12, lambda: 0.3, h: 0.01, p: 2.0, r_b: 0.02, r: 0.02 },
            Bounds::Override,
        )
        .unwrap();
        for t in [0.0, 10.0, 100.0] {
            let c = s.cost_at(t).unwrap();
            assert!((c - s.learning.c_f).abs() < 1e-11);
        }
    }

    #[test]
    fn fig1_exergy_at_fifty_years() {
        let cases = [(0.025, 1.56), (0.01, 0.79), (0.0, 0.50), (-0.01, 0.31)];
        for (r, expected) in cases {
            let eps = fig1(r).exergy_ratio(50.0).unwrap();
            assert!((eps - expected).abs() < 0.01, "r = {r}: {eps}");
        }
    }

    #[test]
    fn zero_growth_paths_agree() {
        let s = fig1(0.0);
        for t in [0.0, 1.0, 10.0, 50.0] {
            let a = s.exergy_ratio(t).unwrap();
            let b = zero_growth::exergy_ratio(&s, t).unwrap();
            assert!((a - b).abs() < 1e-15);
            let c = zero_growth::cost(&s, t).unwrap();
            assert!((c / s.cost_at(t).unwrap() - 1.0).abs() < 1e-14);
            assert!(zero_growth::exergy_ratio_slope(&s, t).unwrap() < 0.0);
        }
    }

    #[test]
    fn degenerate_constant_cost() {
        let s = Scenario::relative(
            RelativeParams { theta0: 0.2, lambda: 0.0, h: 0.0, p: 2.0, r_b: 0.02, r: 0.0 },
            Bounds::Override,
        )
        .unwrap();
        for t in [0.0, 5.0, 500.0] {
            assert!((s.exergy_ratio(t).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn asymptotic_form() {
        let s = fig1(0.025);
        let (_, eps0) = s.asymptotic_exergy(0.0).unwrap();
        assert!((eps0 - 1.0).abs() > 0.1);
        let (e100, eps100) = s.asymptotic_exergy(100.0).unwrap();
        let exact = s.exergy_ratio(100.0).unwrap();
        assert!((eps100 / exact - 1.0).abs() < 0.01);
        assert!((e100 / (eps100 * s.exergy_at(0.0).unwrap()) - 1.0).abs() < 1e-12);
        assert!(fig1(0.0).asymptotic_exergy(1.0).is_err());
        assert!(fig1(-0.01).asymptotic_exergy(1.0).is_err());
    }

    #[test]
    fn sampling_grid() {
        let s = Sampling::new(50.0, 0.5).unwrap();
        let ts = s.times();
        assert_eq!(ts.len(), 101);
        assert_eq!(*ts.last().unwrap(), 50.0);
        assert_eq!(Sampling::new(50.0, 0.1).unwrap().times().len(), 501);
        assert!(Sampling::new(1.0, 0.0).is_err());
        assert!(Sampling::new(0.1, 0.5).is_err());
    }

    #[test]
    fn trajectory_origin_is_exact() {
        let pts = fig1(0.025).trajectory(&Sampling::new(10.0, 1.0).unwrap()).unwrap();
        assert_eq!(pts[0].c_ratio, 1.0);
        assert_eq!(pts[0].epsilon, 1.0);
        for pt in &pts {
            assert_eq!(pt.e, pt.c * pt.y);
            assert!(pt.theta > 0.0 && pt.theta <= 1.0);
        }
    }

    #[test]
    fn strict_bounds_reject_implausible_growth() {
        let mut params = fig1(0.025).relative_params();
        params.r = 0.5;
        assert!(Scenario::relative(params, Bounds::Strict).is_err());
        assert!(Scenario::relative(params, Bounds::Override).is_ok());
        params.r = 0.025;
        params.p = 0.5;
        assert!(Scenario::relative(params, Bounds::Override).is_err());
    }
}
