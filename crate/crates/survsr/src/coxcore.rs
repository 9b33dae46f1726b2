//! Survival statistics engine: Kaplan-Meier, Cox partial likelihood with
//! analytic gradient, elastic-net coordinate descent, regularization paths,
//! Breslow baseline hazard, survival prediction, and the IPCW concordance
//! index.
//!
//! Conventions used throughout: Breslow handling of tied event times (the
//! risk set at t_i is {j : t_j >= t_i}); the negative log partial likelihood
//! is normalized by the number of events so penalty strengths are comparable
//! across datasets.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoxError {
    #[error("design matrix contains non-finite values")]
    NonFinite,
    #[error("no events in the data; partial likelihood is undefined")]
    NoEvents,
}

/// Right-continuous step function, e.g. a survival curve or cumulative
/// hazard.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunction {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub left_value: f64,
}

impl StepFunction {
    pub fn constant(v: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
            left_value: v,
        }
    }

    /// Value at `t`; right-continuous, so at a breakpoint the new value
    /// applies.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 {
            self.left_value
        } else {
            self.values[idx - 1]
        }
    }

    /// Serialize as two-column CSV text (breakpoint, value) for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            out.push_str(&format!("{b},{v}\n"));
        }
        out
    }
}

/// Sort indices by time ascending, stable.
fn order_ascending(times: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    idx
}

/// Product-limit estimator. With `censoring_distribution` the event
/// indicator is swapped so the curve estimates the censoring distribution
/// G-hat. Equal times are grouped; at a tied time, events reduce survival
/// while censorings only leave the risk set.
pub fn kaplan_meier(times: &[f64], events: &[bool], censoring_distribution: bool) -> StepFunction {
    let n = times.len();
    assert!(n >= 1);
    let order = order_ascending(times);
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    let mut surv = 1.0f64;
    let mut at_risk = n as f64;
    let mut i = 0;
    while i < n {
        let t = times[order[i]];
        let mut d = 0usize;
        let mut group = 0usize;
        while i + group < n && times[order[i + group]] == t {
            let is_event = events[order[i + group]] ^ censoring_distribution;
            if is_event {
                d += 1;
            }
            group += 1;
        }
        if d > 0 {
            surv *= 1.0 - d as f64 / at_risk;
            breakpoints.push(t);
            values.push(surv);
        }
        at_risk -= group as f64;
        i += group;
    }
    StepFunction {
        breakpoints,
        values,
        left_value: 1.0,
    }
}

/// Preprocessed ordering for repeated partial-likelihood evaluations on the
/// same (times, events).
#[derive(Debug, Clone)]
pub struct RiskOrder {
    /// Indices sorted by time descending (risk sets grow as we walk).
    desc: Vec<usize>,
    n_events: usize,
}

impl RiskOrder {
    pub fn new(times: &[f64], events: &[bool]) -> Self {
        let mut desc: Vec<usize> = (0..times.len()).collect();
        desc.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
        let n_events = events.iter().filter(|&&e| e).count();
        Self { desc, n_events }
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }
}

/// Negative log partial likelihood, normalized by the number of events.
/// Log-sum-exp stabilized by the global maximum of eta.
pub fn neg_log_partial_likelihood_eta(
    eta: &Array1<f64>,
    times: &[f64],
    events: &[bool],
    order: &RiskOrder,
) -> f64 {
    let n = eta.len();
    if order.n_events == 0 {
        return 0.0;
    }
    let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0f64; // sum exp(eta - m) over the risk set
    let mut loss = 0.0;
    let mut i = 0;
    while i < n {
        let t = times[order.desc[i]];
        let mut group_end = i;
        while group_end < n && times[order.desc[group_end]] == t {
            let idx = order.desc[group_end];
            s += (eta[idx] - m).exp();
            group_end += 1;
        }
        for &idx in &order.desc[i..group_end] {
            if events[idx] {
                loss -= eta[idx] - (m + s.ln());
            }
        }
        i = group_end;
    }
    loss / order.n_events as f64
}

/// Value and analytic gradient of the normalized negative log partial
/// likelihood with respect to theta.
pub fn neg_log_partial_likelihood_with_gradient(
    theta: &Array1<f64>,
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
) -> Result<(f64, Array1<f64>), CoxError> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(CoxError::NonFinite);
    }
    let order = RiskOrder::new(times, events);
    if order.n_events == 0 {
        return Err(CoxError::NoEvents);
    }
    let eta = z.dot(theta);
    let p = z.ncols();
    let n = eta.len();
    let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0f64;
    let mut sg = vec![0.0f64; p];
    let mut loss = 0.0;
    let mut grad = vec![0.0f64; p];
    let mut i = 0;
    while i < n {
        let t = times[order.desc[i]];
        let mut group_end = i;
        while group_end < n && times[order.desc[group_end]] == t {
            let idx = order.desc[group_end];
            let w = (eta[idx] - m).exp();
            s += w;
            for k in 0..p {
                sg[k] += w * z[[idx, k]];
            }
            group_end += 1;
        }
        for &idx in &order.desc[i..group_end] {
            if events[idx] {
                loss -= eta[idx] - (m + s.ln());
                for k in 0..p {
                    grad[k] -= z[[idx, k]] - sg[k] / s;
                }
            }
        }
        i = group_end;
    }
    let ne = order.n_events as f64;
    Ok((loss / ne, Array1::from(grad) / ne))
}

/// Convenience wrapper returning only the loss.
pub fn neg_log_partial_likelihood(
    theta: &Array1<f64>,
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
) -> Result<f64, CoxError> {
    let order = RiskOrder::new(times, events);
    if order.n_events == 0 {
        return Err(CoxError::NoEvents);
    }
    let eta = z.dot(theta);
    Ok(neg_log_partial_likelihood_eta(&eta, times, events, &order))
}

/// Partial derivative and curvature of the normalized loss along coordinate
/// `k`, given the current linear predictor.
fn grad_hess_coord(
    k: usize,
    eta: &Array1<f64>,
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
    order: &RiskOrder,
) -> (f64, f64) {
    let n = eta.len();
    let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0f64;
    let mut sg = 0.0f64;
    let mut sh = 0.0f64;
    let mut grad = 0.0;
    let mut hess = 0.0;
    let mut i = 0;
    while i < n {
        let t = times[order.desc[i]];
        let mut group_end = i;
        while group_end < n && times[order.desc[group_end]] == t {
            let idx = order.desc[group_end];
            let w = (eta[idx] - m).exp();
            let zk = z[[idx, k]];
            s += w;
            sg += w * zk;
            sh += w * zk * zk;
            group_end += 1;
        }
        for &idx in &order.desc[i..group_end] {
            if events[idx] {
                let mean = sg / s;
                grad -= z[[idx, k]] - mean;
                hess += sh / s - mean * mean;
            }
        }
        i = group_end;
    }
    let ne = order.n_events as f64;
    (grad / ne, hess / ne)
}

/// Elastic-net Cox fit result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoxFit {
    pub theta: Array1<f64>,
    pub lambda: f64,
    pub l1_ratio: f64,
    pub converged: bool,
    pub n_iter: usize,
}

impl CoxFit {
    pub fn n_nonzero(&self) -> usize {
        self.theta.iter().filter(|&&t| t != 0.0).count()
    }
}

fn soft_threshold(u: f64, threshold: f64) -> f64 {
    if u > threshold {
        u - threshold
    } else if u < -threshold {
        u + threshold
    } else {
        0.0
    }
}

fn penalty(theta: &Array1<f64>, lambda: f64, l1_ratio: f64) -> f64 {
    let l1: f64 = theta.iter().map(|t| t.abs()).sum();
    let l2: f64 = theta.iter().map(|t| t * t).sum();
    lambda * (l1_ratio * l1 + 0.5 * (1.0 - l1_ratio) * l2)
}

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Minimize the penalized negative log partial likelihood by cyclic
/// coordinate descent with Newton steps and soft-thresholding. Each
/// coordinate step is safeguarded by halving so the penalized objective
/// never increases.
pub fn fit_coxnet_warm(
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
    lambda: f64,
    l1_ratio: f64,
    tol: f64,
    max_iter: usize,
    warm_start: Option<&Array1<f64>>,
) -> Result<CoxFit, CoxError> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(CoxError::NonFinite);
    }
    assert!(lambda >= 0.0);
    assert!((0.0..=1.0).contains(&l1_ratio));
    let p = z.ncols();
    let order = RiskOrder::new(times, events);
    if order.n_events == 0 {
        return Err(CoxError::NoEvents);
    }
    let mut theta = match warm_start {
        Some(w) => {
            assert_eq!(w.len(), p);
            w.clone()
        }
        None => Array1::zeros(p),
    };
    let mut eta = z.dot(&theta);
    let mut obj = neg_log_partial_likelihood_eta(&eta, times, events, &order)
        + penalty(&theta, lambda, l1_ratio);
    let mut converged = false;
    let mut n_iter = 0;
    for iter in 0..max_iter {
        n_iter = iter + 1;
        let mut max_delta = 0.0f64;
        for k in 0..p {
            let (g, h) = grad_hess_coord(k, &eta, z, times, events, &order);
            if !(h > 0.0) {
                continue; // zero-variance column within every risk set
            }
            let old = theta[k];
            let u = h * old - g;
            let mut new = soft_threshold(u, lambda * l1_ratio) / (h + lambda * (1.0 - l1_ratio));
            if new == old {
                continue;
            }
            // Newton steps on a non-quadratic loss can overshoot; halve
            // toward the old value until the penalized objective does not
            // increase.
            let mut accepted = false;
            for _ in 0..30 {
                let mut cand_eta = eta.clone();
                let delta = new - old;
                for (e, zv) in cand_eta.iter_mut().zip(z.column(k)) {
                    *e += delta * zv;
                }
                let mut cand_theta_k = theta.clone();
                cand_theta_k[k] = new;
                let cand_obj = neg_log_partial_likelihood_eta(&cand_eta, times, events, &order)
                    + penalty(&cand_theta_k, lambda, l1_ratio);
                if cand_obj <= obj + 1e-12 {
                    theta[k] = new;
                    eta = cand_eta;
                    obj = cand_obj;
                    accepted = true;
                    break;
                }
                new = old + (new - old) * 0.5;
                if new == old {
                    break;
                }
            }
            if accepted {
                max_delta = max_delta.max((theta[k] - old).abs());
            }
        }
        if max_delta < tol {
            converged = true;
            break;
        }
    }
    Ok(CoxFit {
        theta,
        lambda,
        l1_ratio,
        converged,
        n_iter,
    })
}

pub fn fit_coxnet(
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
    lambda: f64,
    l1_ratio: f64,
) -> Result<CoxFit, CoxError> {
    fit_coxnet_warm(
        z,
        times,
        events,
        lambda,
        l1_ratio,
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
        None,
    )
}

/// Smallest lambda for which the elastic-net solution is exactly zero,
/// computed from the gradient at theta = 0.
pub fn lambda_max(
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
    l1_ratio: f64,
) -> Result<f64, CoxError> {
    let p = z.ncols();
    let theta = Array1::zeros(p);
    let (_, grad) = neg_log_partial_likelihood_with_gradient(&theta, z, times, events)?;
    let g_max = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    Ok(g_max / l1_ratio.max(1e-3))
}

pub const LAMBDA_PATH_RATIO: f64 = 1e-3;

/// Log-spaced regularization path from lambda_max down to
/// lambda_max * 1e-3, warm-started in descending order.
pub fn lambda_path(
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
    l1_ratio: f64,
    n_lambdas: usize,
) -> Result<Vec<(f64, CoxFit)>, CoxError> {
    assert!(n_lambdas >= 2);
    let lmax = lambda_max(z, times, events, l1_ratio)?;
    // Degenerate design (e.g. no informative columns): keep the path shape.
    let lmax = if lmax > 0.0 { lmax } else { 1.0 };
    let lmin = lmax * LAMBDA_PATH_RATIO;
    let log_max = lmax.ln();
    let log_min = lmin.ln();
    let mut out = Vec::with_capacity(n_lambdas);
    let mut warm: Option<Array1<f64>> = None;
    for i in 0..n_lambdas {
        let frac = i as f64 / (n_lambdas - 1) as f64;
        let lambda = (log_max + frac * (log_min - log_max)).exp();
        let fit = fit_coxnet_warm(
            z,
            times,
            events,
            lambda,
            l1_ratio,
            DEFAULT_TOL,
            DEFAULT_MAX_ITER,
            warm.as_ref(),
        )?;
        warm = Some(fit.theta.clone());
        out.push((lambda, fit));
    }
    Ok(out)
}

/// Breslow estimator of the cumulative baseline hazard H0(t) given fitted
/// risk scores.
pub fn breslow_baseline(eta: &Array1<f64>, times: &[f64], events: &[bool]) -> StepFunction {
    let n = times.len();
    let order = order_ascending(times);
    let m = eta
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    // suffix sums of exp(eta - m) over the ascending order
    let mut tail = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + (eta[order[i]] - m).exp();
    }
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    let mut h = 0.0f64;
    let mut i = 0;
    while i < n {
        let t = times[order[i]];
        let mut d = 0usize;
        let mut group = 0usize;
        while i + group < n && times[order[i + group]] == t {
            if events[order[i + group]] {
                d += 1;
            }
            group += 1;
        }
        if d > 0 {
            // denominator = sum over {j : t_j >= t} of exp(eta_j)
            let log_denom = m + tail[i].ln();
            h += ((d as f64).ln() - log_denom).exp();
            breakpoints.push(t);
            values.push(h);
        }
        i += group;
    }
    StepFunction {
        breakpoints,
        values,
        left_value: 0.0,
    }
}

/// Subject-level survival curve S(t | x) = exp(-H0(t) * exp(eta)).
pub fn predict_survival(eta_i: f64, h0: &StepFunction) -> StepFunction {
    let scale = eta_i.exp();
    StepFunction {
        breakpoints: h0.breakpoints.clone(),
        values: h0.values.iter().map(|&h| (-h * scale).exp()).collect(),
        left_value: (-h0.left_value * scale).exp(),
    }
}

/// IPCW concordance result. `degenerate` is set when no comparable pairs
/// exist, in which case the index defaults to 0.5.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Concordance {
    pub value: f64,
    pub n_pairs: usize,
    pub degenerate: bool,
}

/// Small left shift used to evaluate G-hat just before an event time.
pub const IPCW_LEFT_SHIFT: f64 = 1e-12;

/// Uno-style IPCW concordance index. Comparable pairs (i, j) have
/// delta_i = 1, t_i < t_j, and t_i < tau; each is weighted by
/// G-hat(t_i-)^-2 where G-hat is the Kaplan-Meier censoring distribution of
/// the training split. `tau` defaults to the largest training event time.
pub fn concordance_ipcw(
    train_times: &[f64],
    train_events: &[bool],
    test_times: &[f64],
    test_events: &[bool],
    test_eta: &[f64],
    tau: Option<f64>,
) -> Concordance {
    let g_hat = kaplan_meier(train_times, train_events, true);
    let tau = tau.unwrap_or_else(|| {
        train_times
            .iter()
            .zip(train_events)
            .filter(|(_, &e)| e)
            .map(|(&t, _)| t)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let tau = if tau.is_finite() { tau } else { f64::INFINITY };
    let n = test_times.len();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    let mut n_pairs = 0usize;
    for i in 0..n {
        // t_i == tau is kept so the last training event time stays usable
        if !test_events[i] || test_times[i] > tau {
            continue;
        }
        let g = g_hat.eval(test_times[i] - IPCW_LEFT_SHIFT);
        if !(g > 0.0) {
            continue;
        }
        let w = 1.0 / (g * g);
        for j in 0..n {
            if test_times[j] > test_times[i] {
                n_pairs += 1;
                den += w;
                if test_eta[i] > test_eta[j] {
                    num += w;
                } else if test_eta[i] == test_eta[j] {
                    num += 0.5 * w;
                }
            }
        }
    }
    if den == 0.0 {
        Concordance {
            value: 0.5,
            n_pairs: 0,
            degenerate: true,
        }
    } else {
        Concordance {
            value: num / den,
            n_pairs,
            degenerate: false,
        }
    }
}
