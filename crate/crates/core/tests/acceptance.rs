//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p thermocost --test acceptance`. Exits non-zero if any
//! criterion fails.

use std::process::ExitCode;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use thermocost::calibration::{fit, hindcast_compare, CostSeries};
use thermocost::climate::{asymptotic_emission_rate, cumulative_emissions, ClimateParams, EmissionsMode};
use thermocost::decoupling::{
    breakeven_rate, breakeven_rate_bisection, critical_time, decoupling_lhs, innovation_multiple_time,
    required_h, Breakeven,
};
use thermocost::model::{
    policy_coefficient_from_gamma, AbsoluteParams, Bounds, CurveKind, LearningParams, RelativeParams, Scenario,
};
use thermocost::scenario_io::preset;

const SCENARIOS: usize = 1000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

/// Collects the failed checks of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn within(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{name} = {got:.6} (want {want} ± {tol})"));
    }

    fn outcome(self) -> Outcome {
        if self.failures.is_empty() {
            Outcome { ok: true, detail: self.notes.join("; ") }
        } else {
            Outcome { ok: false, detail: self.failures.join("; ") }
        }
    }
}

fn guard(f: impl FnOnce(&mut Checks) -> Result<(), String>) -> Outcome {
    let mut checks = Checks::default();
    match f(&mut checks) {
        Ok(()) => checks.outcome(),
        Err(e) => Outcome { ok: false, detail: format!("error: {e}") },
    }
}

fn scenario(name: &str) -> Result<Scenario, String> {
    preset(name)
        .and_then(|s| s.build(Bounds::Strict))
        .map_err(|e| e.to_string())
}

fn growth_scenario() -> Outcome {
    guard(|c| {
        let s = scenario("fig1-growth")?;
        let eps = |t| s.exergy_ratio(t).map_err(|e| e.to_string());
        c.within("eps(5)", eps(5.0)?, 1.008, 0.002);
        c.within("eps(25)", eps(25.0)?, 1.16, 0.005);
        c.within("eps(50)", eps(50.0)?, 1.564, 0.005);
        c.within("c(50)/c0", s.cost_ratio(50.0).map_err(|e| e.to_string())?, 0.448, 0.005);
        let t78 = s.time_to_cost_ratio(0.78).map_err(|e| e.to_string())?;
        c.within("t(c/c0 = 0.78)", t78, 11.45, 0.05);
        Ok(())
    })
}

fn other_scenarios() -> Outcome {
    guard(|c| {
        let low = scenario("fig1-low")?;
        c.within("low eps(50)", low.exergy_ratio(50.0).map_err(|e| e.to_string())?, 0.791, 0.005);
        let lhs = decoupling_lhs(&low, 50.0).map_err(|e| e.to_string())?.lhs;
        c.check(lhs > 0.0, format!("low lhs(50) = {lhs:.3e} > 0"));
        let zero = scenario("fig1-zero")?;
        c.within("zero eps(50)", zero.exergy_ratio(50.0).map_err(|e| e.to_string())?, 0.500, 0.005);
        let neg = scenario("fig1-negative")?;
        c.within("negative eps(50)", neg.exergy_ratio(50.0).map_err(|e| e.to_string())?, 0.314, 0.005);
        Ok(())
    })
}

fn innovation_demand() -> Outcome {
    guard(|c| {
        let t_inf = critical_time(0.2, 0.025).map_err(|e| e.to_string())?;
        c.within("t_infinity", t_inf, 64.38, 0.02);
        let s = scenario("fig2")?;
        let doubling = innovation_multiple_time(&s, 2.0).map_err(|e| e.to_string())?;
        c.check(
            (13.0..=15.0).contains(&doubling),
            format!("required_h doubles at t = {doubling:.4} (want within [13, 15])"),
        );
        let mut smallest = f64::INFINITY;
        for k in 0..=100 {
            let t = t_inf - 0.1 + 0.1 * k as f64 / 101.0;
            smallest = smallest.min(required_h(&s, t).map_err(|e| e.to_string())?.h_required);
        }
        c.check(smallest > 10.0, format!("min required_h within 0.1 y of t_infinity = {smallest:.3} > 10"));
        Ok(())
    })
}

fn breakeven() -> Outcome {
    guard(|c| {
        let limit = breakeven_rate(1.0 / 3.0, 0.01, 0.0).map_err(|e| e.to_string())?;
        c.check(limit == Breakeven::Rate(0.015), format!("r*(theta = 0) = {limit:?} (want exactly 0.015)"));
        let closed = breakeven_rate(1.0 / 3.0, 0.01, 0.2).map_err(|e| e.to_string())?;
        let bisected = breakeven_rate_bisection(1.0 / 3.0, 0.01, 0.2).map_err(|e| e.to_string())?;
        match (closed.rate(), bisected.rate()) {
            (Some(a), Some(b)) => {
                c.check((a - b).abs() <= 1e-12, format!("|closed - bisection| = {:.1e} ≤ 1e-12", (a - b).abs()));
                c.check(a > 0.0 && a < 0.015, format!("r*(theta = 0.2) = {a:.10} in (0, 0.015)"));
            }
            other => c.check(false, format!("no rate for theta = 0.2: {other:?}")),
        }
        Ok(())
    })
}

fn policy_coefficient() -> Outcome {
    guard(|c| {
        let p = policy_coefficient_from_gamma(0.22, 0.2, 1.0 / 3.0).map_err(|e| e.to_string())?;
        c.within("p(gamma = 0.22)", p, 2.62, 0.01);
        Ok(())
    })
}

fn random_absolute(rng: &mut StdRng) -> Scenario {
    loop {
        let lambda: f64 = rng.random_range(0.05..0.95);
        let a = rng.random_range(0.1..10.0);
        let y0: f64 = rng.random_range(0.1..10.0);
        let r_b = rng.random_range(0.005..0.08);
        let p = rng.random_range(1.0..6.0);
        let learning_at_onset = a * (y0 / (p * r_b)).powf(-lambda);
        let theta0 = rng.random_range(0.0..0.95);
        let c_f = learning_at_onset * theta0 / (1.0 - theta0);
        let params = AbsoluteParams {
            a,
            c_f,
            lambda,
            h: rng.random_range(0.0..0.05),
            y0,
            r_b,
            p,
            r: rng.random_range(-0.08..0.08),
        };
        if let Ok(s) = Scenario::absolute(params, Bounds::Strict) {
            return s;
        }
    }
}

fn relative_error(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn property_suite() -> Outcome {
    guard(|c| {
        let mut rng = StdRng::seed_from_u64(0x5eed_0001);
        let (mut worst_ratio, mut sign_mismatch, mut sign_checked) = (0.0f64, 0usize, 0usize);
        let (mut negative_violations, mut worst_wright) = (0usize, 0.0f64);
        for _ in 0..SCENARIOS {
            let s = random_absolute(&mut rng);
            let t = rng.random_range(0.0..100.0);
            let e0 = s.policy.c0 * s.policy.y0;
            let eps_abs = s.exergy_at(t).map_err(|e| e.to_string())? / e0;
            let c_abs = s.cost_at(t).map_err(|e| e.to_string())? / s.policy.c0;
            worst_ratio = worst_ratio
                .max(relative_error(s.exergy_ratio(t).map_err(|e| e.to_string())?, eps_abs))
                .max(relative_error(s.cost_ratio(t).map_err(|e| e.to_string())?, c_abs));

            let lhs = decoupling_lhs(&s, t).map_err(|e| e.to_string())?.lhs;
            if lhs.abs() >= 1e-7 {
                let dt = 1e-4;
                let lo = (t - dt).max(0.0);
                let slope = (s.exergy_at(t + dt).map_err(|e| e.to_string())?
                    - s.exergy_at(lo).map_err(|e| e.to_string())?)
                    / (t + dt - lo);
                sign_checked += 1;
                if (slope > 0.0) != (lhs > 0.0) {
                    sign_mismatch += 1;
                }
            }
            if s.r < 0.0 && lhs >= 0.0 {
                negative_violations += 1;
            }

            let rp = s.relative_params();
            let r = rng.random_range(0.001..0.1);
            let wright = Scenario::relative(
                RelativeParams { theta0: 0.0, lambda: rp.lambda, h: 0.0, p: 1.0, r_b: r, r },
                Bounds::Strict,
            )
            .map_err(|e| e.to_string())?;
            let eps = wright.exergy_ratio(t).map_err(|e| e.to_string())?;
            worst_wright = worst_wright.max(relative_error(eps, (r * (1.0 - rp.lambda) * t).exp()));
        }
        c.check(worst_ratio <= 1e-12, format!("(a) ratio vs absolute: worst {worst_ratio:.1e} ≤ 1e-12"));
        c.check(
            sign_mismatch == 0,
            format!("(b) lhs sign vs dE/dt: {sign_mismatch} mismatches of {sign_checked}"),
        );
        c.check(negative_violations == 0, format!("(c) r < 0 with lhs ≥ 0: {negative_violations}"));
        c.check(worst_wright <= 1e-12, format!("(d) pure Wright: worst {worst_wright:.1e} ≤ 1e-12"));
        Ok(())
    })
}

/// Composite Simpson rule on `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn quadrature_oracles() -> Outcome {
    guard(|c| {
        let mut rng = StdRng::seed_from_u64(0x5eed_0002);
        let (mut worst_q, mut worst_climate) = (0.0f64, 0.0f64);
        for _ in 0..200 {
            let s = random_absolute(&mut rng);
            let t = rng.random_range(0.5..100.0);
            let integral = simpson(|u| s.production_at(u).unwrap(), 0.0, t, 4000);
            let q = s.cumulative_production(t).map_err(|e| e.to_string())? - s.policy.q0;
            worst_q = worst_q.max(relative_error(q, integral));

            if s.r > 0.0 {
                let cp = ClimateParams::new(
                    rng.random_range(0.1..2.0),
                    rng.random_range(-0.03..0.01),
                    1.5e-3,
                    Bounds::Strict,
                )
                .map_err(|e| e.to_string())?;
                let integral = simpson(|u| asymptotic_emission_rate(&s, &cp, u).unwrap(), 0.0, t, 4000);
                let closed = cumulative_emissions(&s, &cp, t, EmissionsMode::Asymptotic).map_err(|e| e.to_string())?;
                worst_climate = worst_climate.max(relative_error(closed, integral));
            }
        }
        c.check(worst_q <= 1e-9, format!("cumulative production: worst {worst_q:.1e} ≤ 1e-9"));
        c.check(worst_climate <= 1e-9, format!("climate closed form: worst {worst_climate:.1e} ≤ 1e-9"));
        Ok(())
    })
}

fn calibration() -> Outcome {
    guard(|c| {
        // Q grows polynomially, so ln Q and t are not collinear
        let points: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 10.0 + 4.0 * (i as f64).powf(1.6))).collect();
        let truth = LearningParams::new(2.0, 1.0 / 3.0, 0.01, 0.0, Bounds::Strict).map_err(|e| e.to_string())?;
        let series = CostSeries::from_model("combined", CurveKind::Combined, &truth, &points).map_err(|e| e.to_string())?;
        let est = fit(&series, CurveKind::Combined).map_err(|e| e.to_string())?;
        let worst = [
            relative_error(est.params.ln_a.exp(), 2.0),
            relative_error(est.params.lambda.unwrap_or(f64::NAN), 1.0 / 3.0),
            relative_error(est.params.h.unwrap_or(f64::NAN), 0.01),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        c.check(worst <= 1e-6, format!("round trip: worst {worst:.1e} ≤ 1e-6"));

        // Sahal: under exponential Q, Wright's and Moore's laws are the same curve
        let g = 0.07;
        let sahal: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 50.0 * (g * i as f64).exp())).collect();
        let wright_truth = LearningParams::new(3.0, 0.3, 0.0, 0.0, Bounds::Strict).map_err(|e| e.to_string())?;
        let sahal_series =
            CostSeries::from_model("sahal", CurveKind::Wright, &wright_truth, &sahal).map_err(|e| e.to_string())?;
        let w = fit(&sahal_series, CurveKind::Wright).map_err(|e| e.to_string())?;
        let m = fit(&sahal_series, CurveKind::Moore).map_err(|e| e.to_string())?;
        let mut worst_sahal = 0.0f64;
        for i in 0..40 {
            let t = 0.5 * i as f64;
            let q = 50.0 * (g * t).exp();
            let (pw, pm) = (w.predict(t, q).map_err(|e| e.to_string())?, m.predict(t, q).map_err(|e| e.to_string())?);
            worst_sahal = worst_sahal.max(relative_error(pw, pm));
        }
        c.check(worst_sahal <= 1e-9, format!("Sahal equivalence: worst {worst_sahal:.1e} ≤ 1e-9"));

        let generators = [
            (CurveKind::Wright, LearningParams::new(2.0, 0.35, 0.0, 0.0, Bounds::Strict)),
            (CurveKind::Moore, LearningParams::new(2.0, 0.0, 0.03, 0.0, Bounds::Override)),
            (CurveKind::Combined, LearningParams::new(2.0, 0.3, 0.02, 0.0, Bounds::Strict)),
            (CurveKind::Floor, LearningParams::new(3.0, 0.5, 0.02, 0.4, Bounds::Strict)),
        ];
        let hindcast_points: Vec<(f64, f64)> =
            (0..30).map(|i| (i as f64, 5.0 + 3.0 * (i as f64).powf(1.7))).collect();
        for (kind, params) in generators {
            let params = params.map_err(|e| e.to_string())?;
            let s = CostSeries::from_model(kind.as_str(), kind, &params, &hindcast_points).map_err(|e| e.to_string())?;
            let ranking = hindcast_compare(&s, &CurveKind::ALL, 0.7).map_err(|e| e.to_string())?;
            c.check(ranking.best() == kind, format!("hindcast on {kind} data ranks {} first", ranking.best()));
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 growth scenario trajectory", growth_scenario),
        ("2 low, zero and negative growth at t = 50", other_scenarios),
        ("3 critical time and innovation demand", innovation_demand),
        ("4 breakeven growth rate", breakeven),
        ("5 policy coefficient from savings", policy_coefficient),
        ("6 randomized property suite", property_suite),
        ("7 quadrature oracles", quadrature_oracles),
        ("8 calibration round trip, Sahal, hindcast", calibration),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = run();
        let status = if outcome.ok { "PASS" } else { "FAIL" };
        println!("{status} criterion {name}: {}", outcome.detail);
        if !outcome.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
