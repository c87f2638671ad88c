//! Fitting the learning-curve family to observed `(t, Q, c)` series.
//!
//! All fits minimize squared residuals of `ln c`. Wright, Moore and the combined
//! model are linear in log space and solved by ordinary least squares; the
//! floor model is solved by Levenberg-Marquardt from a fixed grid of starts.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eval_curve, CurveKind, LearningParams, H_RANGE, LAMBDA_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub t: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSeries {
    pub label: String,
    pub records: Vec<CostRecord>,
}

impl CostSeries {
    pub fn new(label: impl Into<String>, records: Vec<CostRecord>) -> Result<Self> {
        let series = CostSeries {
            label: label.into(),
            records,
        };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::validation("records", "series is empty"));
        }
        for (i, rec) in self.records.iter().enumerate() {
            let row = i + 1;
            if !rec.t.is_finite() {
                return Err(Error::validation(format!("row {row}.t"), "must be finite"));
            }
            if !(rec.q.is_finite() && rec.q > 0.0) {
                return Err(Error::validation(format!("row {row}.Q"), format!("must be > 0, got {}", rec.q)));
            }
            if !(rec.c.is_finite() && rec.c > 0.0) {
                return Err(Error::validation(format!("row {row}.c"), format!("must be > 0, got {}", rec.c)));
            }
            if i > 0 {
                let prev = &self.records[i - 1];
                if rec.t <= prev.t {
                    return Err(Error::validation(format!("row {row}.t"), "t must be strictly increasing"));
                }
                if rec.q < prev.q {
                    return Err(Error::validation(format!("row {row}.Q"), "Q must be non-decreasing"));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Noiseless series generated by one member of the curve family at the given `(t, Q)` pairs.
    pub fn from_model(
        label: impl Into<String>,
        kind: CurveKind,
        params: &LearningParams,
        points: &[(f64, f64)],
    ) -> Result<Self> {
        let records = points
            .iter()
            .map(|&(t, q)| Ok(CostRecord { t, q, c: eval_curve(kind, params, q, t)? }))
            .collect::<Result<Vec<_>>>()?;
        CostSeries::new(label, records)
    }

    fn prefix(&self, n: usize) -> CostSeries {
        CostSeries {
            label: self.label.clone(),
            records: self.records[..n].to_vec(),
        }
    }
}

/// Minimum series length for fitting `kind`: one residual degree of freedom.
pub fn min_points(kind: CurveKind) -> usize {
    kind.parameter_count() + 1
}

/// Estimated parameters; entries the kind does not use are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub ln_a: f64,
    pub lambda: Option<f64>,
    pub h: Option<f64>,
    pub c_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: CurveKind,
    pub label: String,
    pub n: usize,
    pub params: FitParams,
    pub std_errors: FitParams,
    /// Residual sum of squares of `ln c`.
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Parameters outside the default plausibility ranges, e.g. `lambda`.
    pub out_of_range: Vec<String>,
}

impl FitResult {
    pub fn learning_params(&self) -> LearningParams {
        LearningParams {
            a: self.params.ln_a.exp(),
            lambda: self.params.lambda.unwrap_or(0.0),
            h: self.params.h.unwrap_or(0.0),
            c_f: self.params.c_f.unwrap_or(0.0),
        }
    }

    pub fn predict(&self, t: f64, q: f64) -> Result<f64> {
        eval_curve(self.kind, &self.learning_params(), q, t)
    }

    fn flag_ranges(&mut self) {
        let mut flags = Vec::new();
        if let Some(l) = self.params.lambda {
            // estimates within rounding of an open endpoint count as on it
            let inside = l > LAMBDA_RANGE.0 + BOUNDARY_TOL && l < LAMBDA_RANGE.1 - BOUNDARY_TOL;
            if !inside {
                flags.push("lambda".to_string());
            }
        }
        if let Some(h) = self.params.h {
            if !(H_RANGE.0..=H_RANGE.1).contains(&h) {
                flags.push("h".to_string());
            }
        }
        self.out_of_range = flags;
    }
}

/// Absolute tolerance for treating an estimate as sitting on a range boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Columns of the log-linear design, named for rank-deficiency reports.
struct Design {
    names: Vec<&'static str>,
    columns: Vec<Vec<f64>>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_identifiable(kind: CurveKind, t: &[f64], ln_q: &[f64]) -> Result<()> {
    if kind.uses_q() {
        let mq = mean(ln_q);
        let spread = ln_q.iter().map(|v| (v - mq).abs()).fold(0.0, f64::max);
        if spread <= 1e-12 * (1.0 + mq.abs()) {
            return Err(Error::RankDeficient { first: "ln_Q", second: "intercept" });
        }
        if kind.uses_t() {
            // ln Q affine in t: regress and inspect the residual
            let mt = mean(t);
            let sxx: f64 = t.iter().map(|v| (v - mt).powi(2)).sum();
            let sxy: f64 = t.iter().zip(ln_q).map(|(a, b)| (a - mt) * (b - mq)).sum();
            let syy: f64 = ln_q.iter().map(|v| (v - mq).powi(2)).sum();
            let slope = sxy / sxx;
            let resid: f64 = t
                .iter()
                .zip(ln_q)
                .map(|(a, b)| (b - mq - slope * (a - mt)).powi(2))
                .sum();
            if resid <= 1e-18 * syy {
                return Err(Error::RankDeficient { first: "ln_Q", second: "t" });
            }
        }
    }
    Ok(())
}

/// OLS on centered columns. Returns `(intercept, slopes, covariance of
/// [intercept, slopes...] in uncentered coordinates, rss)`.
fn ols(design: &Design, y: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>, f64)> {
    let n = y.len();
    let k = design.columns.len() + 1;
    let means: Vec<f64> = design.columns.iter().map(|c| mean(c)).collect();
    let x = DMatrix::from_fn(n, k, |i, j| {
        if j == 0 {
            1.0
        } else {
            design.columns[j - 1][i] - means[j - 1]
        }
    });
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        let name = design.names.first().copied().unwrap_or("design");
        return Err(Error::RankDeficient { first: name, second: "intercept" });
    }
    let beta_c = svd
        .solve(&yv, 0.0)
        .map_err(|m| Error::validation("design", m.to_string()))?;
    let resid = &yv - &x * &beta_c;
    let rss = resid.norm_squared();
    let dof = n.saturating_sub(k).max(1) as f64;
    let s2 = rss / dof;
    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or(Error::RankDeficient { first: design.names[0], second: "intercept" })?;
    // intercept_uncentered = b0 − Σ b_j m_j
    let mut transform = DMatrix::<f64>::identity(k, k);
    for j in 1..k {
        transform[(0, j)] = -means[j - 1];
    }
    let beta = &transform * &beta_c;
    let cov = &transform * (xtx_inv * s2) * transform.transpose();
    Ok((beta.iter().copied().collect(), cov, rss))
}

fn fit_linear(series: &CostSeries, kind: CurveKind) -> Result<FitResult> {
    let t: Vec<f64> = series.records.iter().map(|r| r.t).collect();
    let ln_q: Vec<f64> = series.records.iter().map(|r| r.q.ln()).collect();
    let ln_c: Vec<f64> = series.records.iter().map(|r| r.c.ln()).collect();
    let mut design = Design { names: Vec::new(), columns: Vec::new() };
    if kind.uses_q() {
        design.names.push("ln_Q");
        design.columns.push(ln_q.clone());
    }
    if kind.uses_t() {
        design.names.push("t");
        design.columns.push(t.clone());
    }
    let (beta, cov, rss) = ols(&design, &ln_c)?;
    let se = |i: usize| cov[(i, i)].max(0.0).sqrt();
    let (lambda, lambda_se, h, h_se) = match kind {
        CurveKind::Wright => (Some(-beta[1]), Some(se(1)), None, None),
        CurveKind::Moore => (None, None, Some(-beta[1]), Some(se(1))),
        _ => (Some(-beta[1]), Some(se(1)), Some(-beta[2]), Some(se(2))),
    };
    let mut result = FitResult {
        kind,
        label: series.label.clone(),
        n: series.len(),
        params: FitParams { ln_a: beta[0], lambda, h, c_f: None },
        std_errors: FitParams { ln_a: se(0), lambda: lambda_se, h: h_se, c_f: None },
        rss,
        converged: true,
        iterations: 1,
        out_of_range: Vec::new(),
    };
    result.flag_ranges();
    Ok(result)
}

pub const FLOOR_MAX_ITER: usize = 500;
pub const FLOOR_REL_TOL: f64 = 1e-12;
/// Starting floor costs, as fractions of the smallest observed cost.
pub const FLOOR_START_GRID: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

/// Floor model in centered coordinates: `c = c_f + exp(b − λ (ln Q − μ_q) − h (t − μ_t))`.
struct FloorProblem {
    dq: Vec<f64>,
    dt: Vec<f64>,
    ln_c: Vec<f64>,
    mu_q: f64,
    mu_t: f64,
    c_f_max: f64,
}

struct LmOutcome {
    theta: [f64; 4],
    cost: f64,
    iterations: usize,
    converged: bool,
}

impl FloorProblem {
    fn new(series: &CostSeries) -> Self {
        let ln_q: Vec<f64> = series.records.iter().map(|r| r.q.ln()).collect();
        let t: Vec<f64> = series.records.iter().map(|r| r.t).collect();
        let mu_q = mean(&ln_q);
        let mu_t = mean(&t);
        let c_min = series.records.iter().map(|r| r.c).fold(f64::INFINITY, f64::min);
        FloorProblem {
            dq: ln_q.iter().map(|v| v - mu_q).collect(),
            dt: t.iter().map(|v| v - mu_t).collect(),
            ln_c: series.records.iter().map(|r| r.c.ln()).collect(),
            mu_q,
            mu_t,
            c_f_max: c_min * (1.0 - 1e-9),
        }
    }

    fn residuals(&self, th: &[f64; 4]) -> DVector<f64> {
        DVector::from_iterator(
            self.ln_c.len(),
            (0..self.ln_c.len()).map(|i| {
                let learn = (th[0] - th[1] * self.dq[i] - th[2] * self.dt[i]).exp();
                (th[3] + learn).ln() - self.ln_c[i]
            }),
        )
    }

    fn jacobian(&self, th: &[f64; 4]) -> DMatrix<f64> {
        let n = self.ln_c.len();
        let mut j = DMatrix::zeros(n, 4);
        for i in 0..n {
            let learn = (th[0] - th[1] * self.dq[i] - th[2] * self.dt[i]).exp();
            let m = th[3] + learn;
            j[(i, 0)] = learn / m;
            j[(i, 1)] = -self.dq[i] * learn / m;
            j[(i, 2)] = -self.dt[i] * learn / m;
            j[(i, 3)] = 1.0 / m;
        }
        j
    }

    fn clamp(&self, th: &mut [f64; 4]) {
        th[3] = th[3].clamp(0.0, self.c_f_max);
    }

    /// Combined-model OLS of `ln(c − c_f)` for a fixed starting floor.
    fn start(&self, c_f: f64) -> Option<[f64; 4]> {
        let n = self.ln_c.len();
        let y: Vec<f64> = self.ln_c.iter().map(|v| (v.exp() - c_f).ln()).collect();
        let x = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => -self.dq[i],
            _ => -self.dt[i],
        });
        let beta = x.svd(true, true).solve(&DVector::from_vec(y), 1e-14).ok()?;
        Some([beta[0], beta[1], beta[2], c_f])
    }

    fn levenberg_marquardt(&self, mut th: [f64; 4]) -> LmOutcome {
        self.clamp(&mut th);
        let mut r = self.residuals(&th);
        let mut cost = r.norm_squared();
        let mut mu = 1e-3;
        for it in 1..=FLOOR_MAX_ITER {
            if !cost.is_finite() {
                return LmOutcome { theta: th, cost, iterations: it, converged: false };
            }
            if cost < 1e-28 {
                return LmOutcome { theta: th, cost, iterations: it, converged: true };
            }
            let jac = self.jacobian(&th);
            let jtj = jac.transpose() * &jac;
            let grad = jac.transpose() * &r;
            let mut improved = false;
            while mu < 1e20 {
                let mut a = jtj.clone();
                for d in 0..4 {
                    a[(d, d)] += mu * jtj[(d, d)].max(1e-12);
                }
                let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                    mu *= 10.0;
                    continue;
                };
                let mut trial = [th[0] + step[0], th[1] + step[1], th[2] + step[2], th[3] + step[3]];
                self.clamp(&mut trial);
                let r_trial = self.residuals(&trial);
                let c_trial = r_trial.norm_squared();
                if c_trial.is_finite() && c_trial < cost {
                    let rel = (cost - c_trial) / cost;
                    th = trial;
                    r = r_trial;
                    cost = c_trial;
                    mu = (mu / 3.0).max(1e-15);
                    improved = true;
                    if rel < FLOOR_REL_TOL {
                        return LmOutcome { theta: th, cost, iterations: it, converged: true };
                    }
                    break;
                }
                mu *= 4.0;
            }
            if !improved {
                // No descent at any damping: stationary to working precision.
                let scale = (cost + 1e-300).sqrt();
                let converged = grad.amax() <= 1e-8 * scale.max(1e-12);
                return LmOutcome { theta: th, cost, iterations: it, converged };
            }
        }
        LmOutcome { theta: th, cost, iterations: FLOOR_MAX_ITER, converged: false }
    }
}

fn fit_floor(series: &CostSeries) -> Result<FitResult> {
    let t: Vec<f64> = series.records.iter().map(|r| r.t).collect();
    let ln_q: Vec<f64> = series.records.iter().map(|r| r.q.ln()).collect();
    check_identifiable(CurveKind::Floor, &t, &ln_q)?;
    let problem = FloorProblem::new(series);
    let c_min = series.records.iter().map(|r| r.c).fold(f64::INFINITY, f64::min);

    let mut best: Option<LmOutcome> = None;
    let mut total_iterations = 0;
    for frac in FLOOR_START_GRID {
        let Some(start) = problem.start(frac * c_min) else {
            continue;
        };
        let outcome = problem.levenberg_marquardt(start);
        total_iterations += outcome.iterations;
        if !outcome.converged {
            continue;
        }
        if best.as_ref().is_none_or(|b| outcome.cost < b.cost) {
            best = Some(outcome);
        }
    }
    let Some(best) = best else {
        return Err(Error::NoConvergence {
            routine: "floor-model fit",
            iterations: total_iterations,
        });
    };

    let th = best.theta;
    let ln_a = th[0] + th[1] * problem.mu_q + th[2] * problem.mu_t;
    let n = series.len();
    let jac = problem.jacobian(&th);
    let s2 = best.cost / (n.saturating_sub(4).max(1)) as f64;
    let cov_c = (jac.transpose() * &jac)
        .pseudo_inverse(1e-300)
        .unwrap_or_else(|_| DMatrix::from_element(4, 4, f64::NAN))
        * s2;
    let mut transform = DMatrix::<f64>::identity(4, 4);
    transform[(0, 1)] = problem.mu_q;
    transform[(0, 2)] = problem.mu_t;
    let cov = &transform * cov_c * transform.transpose();
    let se = |i: usize| cov[(i, i)].max(0.0).sqrt();

    let mut result = FitResult {
        kind: CurveKind::Floor,
        label: series.label.clone(),
        n,
        params: FitParams { ln_a, lambda: Some(th[1]), h: Some(th[2]), c_f: Some(th[3]) },
        std_errors: FitParams { ln_a: se(0), lambda: Some(se(1)), h: Some(se(2)), c_f: Some(se(3)) },
        rss: best.cost,
        converged: true,
        iterations: total_iterations,
        out_of_range: Vec::new(),
    };
    result.flag_ranges();
    Ok(result)
}

/// Fit one member of the curve family to `series`.
pub fn fit(series: &CostSeries, kind: CurveKind) -> Result<FitResult> {
    series.validate()?;
    let need = min_points(kind);
    if series.len() < need {
        return Err(Error::validation(
            "records",
            format!("{kind} fit needs at least {need} points, got {}", series.len()),
        ));
    }
    if kind == CurveKind::Floor {
        return fit_floor(series);
    }
    let t: Vec<f64> = series.records.iter().map(|r| r.t).collect();
    let ln_q: Vec<f64> = series.records.iter().map(|r| r.q.ln()).collect();
    check_identifiable(kind, &t, &ln_q)?;
    fit_linear(series, kind)
}

/// Scores below this mean squared log error are treated as exact fits, and ties
/// are broken by parameter count.
pub const SCORE_RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HindcastEntry {
    pub kind: CurveKind,
    /// Mean squared error of `ln c` on the held-out segment.
    pub score: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HindcastRanking {
    pub n_train: usize,
    pub n_test: usize,
    /// Best first.
    pub entries: Vec<HindcastEntry>,
}

impl HindcastRanking {
    pub fn best(&self) -> CurveKind {
        self.entries[0].kind
    }
}

/// Fit each kind on the first `⌈split·n⌉` points and score it on the rest.
pub fn hindcast_compare(series: &CostSeries, kinds: &[CurveKind], split: f64) -> Result<HindcastRanking> {
    series.validate()?;
    if !(split > 0.3 && split < 0.9) {
        return Err(Error::validation("split", format!("must lie in (0.3, 0.9), got {split}")));
    }
    if kinds.is_empty() {
        return Err(Error::validation("kinds", "no model kinds given"));
    }
    let n = series.len();
    let n_train = (split * n as f64).ceil() as usize;
    let n_test = n.saturating_sub(n_train);
    if n_test == 0 {
        return Err(Error::validation("records", format!("no held-out points with {n} records")));
    }
    for &kind in kinds {
        if n_train < min_points(kind) {
            return Err(Error::validation(
                "records",
                format!("{kind} needs {} training points, split leaves {n_train}", min_points(kind)),
            ));
        }
    }
    let train = series.prefix(n_train);
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();
    let mut entries = kinds
        .iter()
        .map(|&kind| {
            let fit = fit(&train, kind)?;
            let mut sq = 0.0;
            for rec in &series.records[n_train..] {
                let pred = fit.predict(rec.t, rec.q)?;
                sq += (rec.c.ln() - pred.ln()).powi(2);
            }
            Ok(HindcastEntry { kind, score: sq / n_test as f64, fit })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| rank_key(a).partial_cmp(&rank_key(b)).unwrap_or(Ordering::Equal));
    Ok(HindcastRanking { n_train, n_test, entries })
}

fn rank_key(e: &HindcastEntry) -> (f64, usize, CurveKind) {
    let score = if e.score < SCORE_RESOLUTION { 0.0 } else { e.score };
    (score, e.kind.parameter_count(), e.kind)
}

pub const REFERENCE_MEAN_LAMBDA: f64 = 1.0 / 3.0;
pub const SECTOR_MEAN_RANGE: (f64, f64) = (0.27, 0.47);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEntry {
    pub index: usize,
    pub label: String,
    pub kind: CurveKind,
    pub lambda: f64,
    /// Cost retained per doubling of cumulative production, `2^−λ`.
    pub progress_ratio: f64,
    /// E.g. `95% curve`.
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaAudit {
    pub count: usize,
    pub mean_lambda: f64,
    pub entries: Vec<LambdaEntry>,
    /// Fits with `λ ≥ 1` or `λ ≤ 0`.
    pub violations: Vec<LambdaEntry>,
    pub deviation_from_reference: f64,
    pub mean_in_sector_range: bool,
}

pub fn progress_ratio(lambda: f64) -> f64 {
    2f64.powf(-lambda)
}

pub fn lambda_from_progress_ratio(ratio: f64) -> f64 {
    -ratio.log2()
}

/// Summarize the learning exponents of a set of fits; kinds without λ are skipped.
pub fn lambda_audit(results: &[FitResult]) -> Result<LambdaAudit> {
    if results.is_empty() {
        return Err(Error::validation("results", "no fits to audit"));
    }
    let entries: Vec<LambdaEntry> = results
        .iter()
        .enumerate()
        .filter_map(|(index, fit)| {
            fit.params.lambda.map(|lambda| {
                let ratio = progress_ratio(lambda);
                LambdaEntry {
                    index,
                    label: fit.label.clone(),
                    kind: fit.kind,
                    lambda,
                    progress_ratio: ratio,
                    regime: format!("{:.0}% curve", 100.0 * ratio),
                }
            })
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::validation("results", "no fit carries a learning exponent"));
    }
    let mean_lambda = entries.iter().map(|e| e.lambda).sum::<f64>() / entries.len() as f64;
    let violations = entries
        .iter()
        .filter(|e| !(e.lambda > 0.0 && e.lambda < 1.0))
        .cloned()
        .collect();
    Ok(LambdaAudit {
        count: entries.len(),
        mean_lambda,
        entries,
        violations,
        deviation_from_reference: mean_lambda - REFERENCE_MEAN_LAMBDA,
        mean_in_sector_range: (SECTOR_MEAN_RANGE.0..=SECTOR_MEAN_RANGE.1).contains(&mean_lambda),
    })
}
