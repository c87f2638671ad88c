//! Temperature response to the cumulative carbon emitted by a sector's exergy use.
//!
//! Carbon intensity of supply drifts exponentially, `κ(t) = κ₀ e^{ηt}`, and warming
//! is proportional to cumulative emissions through the TCRE `ρ`. Units follow the
//! caller; the defaults assume exergy in EJ, κ in PgC/EJ and ρ in °C per PgC.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_time, Bounds, Scenario};
use crate::numeric::{growth_integral, integrate};

/// Default plausibility band for `ρ`, °C per PgC (0.8–2.5 °C per 1000 PgC).
pub const RHO_RANGE: (f64, f64) = (0.8e-3, 2.5e-3);

const QUAD_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClimateParams {
    /// Initial carbon intensity of the energy supply.
    pub kappa0: f64,
    /// Drift rate of carbon intensity, per year.
    pub eta: f64,
    /// Transient climate response to cumulative emissions.
    pub rho: f64,
}

impl ClimateParams {
    pub fn new(kappa0: f64, eta: f64, rho: f64, bounds: Bounds) -> Result<Self> {
        for (key, v) in [("kappa0", kappa0), ("eta", eta), ("rho", rho)] {
            if !v.is_finite() {
                return Err(Error::validation(key, format!("must be finite, got {v}")));
            }
        }
        if kappa0 < 0.0 {
            return Err(Error::validation("kappa0", format!("must be ≥ 0, got {kappa0}")));
        }
        if rho < 0.0 {
            return Err(Error::validation("rho", format!("must be ≥ 0, got {rho}")));
        }
        if bounds == Bounds::Strict && !(RHO_RANGE.0..=RHO_RANGE.1).contains(&rho) {
            return Err(Error::validation(
                "rho",
                format!(
                    "{rho} °C/PgC outside default band [{}, {}] (use override to relax)",
                    RHO_RANGE.0, RHO_RANGE.1
                ),
            ));
        }
        Ok(ClimateParams { kappa0, eta, rho })
    }

    pub fn intensity(&self, t: f64) -> f64 {
        self.kappa0 * (self.eta * t).exp()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmissionsMode {
    /// Integral of the long-run exergy form, in closed form.
    #[default]
    Asymptotic,
    /// Adaptive quadrature of the full exergy trajectory.
    Exact,
    /// The closed form with `+1` shifts in exponents and denominators, kept only
    /// for comparison; it is not an integral of the emission rate.
    Printed,
}

impl fmt::Display for EmissionsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmissionsMode::Asymptotic => "asymptotic",
            EmissionsMode::Exact => "exact",
            EmissionsMode::Printed => "printed",
        })
    }
}

impl FromStr for EmissionsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "asymptotic" => Ok(EmissionsMode::Asymptotic),
            "exact" => Ok(EmissionsMode::Exact),
            "printed" => Ok(EmissionsMode::Printed),
            other => Err(Error::validation(
                "mode",
                format!("unknown emissions mode `{other}` (expected asymptotic|exact|printed)"),
            )),
        }
    }
}

/// Exponents of the floor and learning terms of the long-run carbon emission rate.
fn exponents(scn: &Scenario, cp: &ClimateParams) -> (f64, f64) {
    let r = scn.r;
    let lambda = scn.learning.lambda;
    (r + cp.eta, (1.0 - lambda) * r - scn.learning.h + cp.eta)
}

/// Coefficients of the floor and learning terms of the long-run exergy form.
fn coefficients(scn: &Scenario) -> (f64, f64) {
    let lambda = scn.learning.lambda;
    let y0 = scn.policy.y0;
    (
        scn.learning.c_f * y0,
        scn.learning.a * y0.powf(1.0 - lambda) * scn.r.powf(lambda),
    )
}

/// Carbon emission rate implied by the long-run exergy form at `t`.
pub fn asymptotic_emission_rate(scn: &Scenario, cp: &ClimateParams, t: f64) -> Result<f64> {
    let t = check_time(t)?;
    let (e, _) = scn.asymptotic_exergy(t)?;
    Ok(cp.intensity(t) * e)
}

/// Carbon emitted over `[0, t]`.
pub fn cumulative_emissions(scn: &Scenario, cp: &ClimateParams, t: f64, mode: EmissionsMode) -> Result<f64> {
    let t = check_time(t)?;
    match mode {
        EmissionsMode::Asymptotic | EmissionsMode::Printed => {
            if scn.r <= 0.0 {
                return Err(Error::domain(
                    "r",
                    format!("{mode} emissions need growth r > 0, got {}", scn.r),
                ));
            }
            let (floor, learning) = coefficients(scn);
            let (x_floor, x_learning) = exponents(scn, cp);
            if mode == EmissionsMode::Asymptotic {
                Ok(cp.kappa0 * (floor * growth_integral(x_floor, t) + learning * growth_integral(x_learning, t)))
            } else {
                let (u, v) = (x_floor + 1.0, x_learning + 1.0);
                Ok(cp.kappa0 * (floor / u * (u * t).exp() + learning / v * (v * t).exp()))
            }
        }
        EmissionsMode::Exact => {
            if cp.kappa0 == 0.0 || t == 0.0 {
                return Ok(0.0);
            }
            integrate(
                |s| cp.intensity(s) * scn.exergy_at(s).unwrap_or(f64::NAN),
                0.0,
                t,
                QUAD_REL_TOL,
                0.0,
            )
        }
    }
}

/// Warming attributable to the sector since the policy onset, `ρ ×` cumulative emissions.
pub fn delta_t(scn: &Scenario, cp: &ClimateParams, t: f64, mode: EmissionsMode) -> Result<f64> {
    Ok(cp.rho * cumulative_emissions(scn, cp, t, mode)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClimatePoint {
    pub t: f64,
    pub emissions: f64,
    pub delta_t: f64,
}

pub fn climate_trajectory(
    scn: &Scenario,
    cp: &ClimateParams,
    times: &[f64],
    mode: EmissionsMode,
) -> Result<Vec<ClimatePoint>> {
    times
        .iter()
        .map(|&t| {
            let emissions = cumulative_emissions(scn, cp, t, mode)?;
            Ok(ClimatePoint {
                t,
                emissions,
                delta_t: cp.rho * emissions,
            })
        })
        .collect()
}
