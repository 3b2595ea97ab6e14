//! Minimal regression engine: OLS and binary logistic regression with
//! coefficient standard errors, serving the CIO and pMSE metrics.
//!
//! Fitting is deterministic; no randomness is used anywhere in this module.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::tabular::{ColumnKind, DesignMatrix};

pub const DEFAULT_MAX_ITER: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Coefficient magnitude on an indicator column above which complete
/// separation is assumed.
const SEPARATION_BETA: f64 = 15.0;
/// Clamp bounds for fitted probabilities used downstream.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Linear,
    Logistic,
}

#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub kind: FitKind,
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub kinds: Vec<ColumnKind>,
    pub converged: bool,
    pub iterations: usize,
    pub separation_detected: bool,
    pub n: usize,
    pub p: usize,
    /// Fitted probabilities (logistic only), clamped away from 0 and 1.
    pub fitted: Option<Vec<f64>>,
}

/// Ordinary least squares via QR, standard errors from s^2 (X'X)^-1.
pub fn fit_linear(dm: &DesignMatrix) -> Result<RegressionFit> {
    let (n, p) = (dm.n(), dm.p());
    if n <= p {
        return Err(Error::TooFewRows { n, p });
    }
    let qr = dm.x.clone().qr();
    let r = qr.r();
    let max_diag = (0..p).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    let offending: Vec<String> = (0..p)
        .filter(|&i| r[(i, i)].abs() <= 1e-10 * max_diag.max(1.0))
        .map(|i| dm.names[i].clone())
        .collect();
    if !offending.is_empty() {
        return Err(Error::RankDeficient(offending));
    }

    // least squares: solve R beta = Q' y on the top p rows
    let mut qty = dm.y.clone();
    qr.q_tr_mul(&mut qty);
    let beta = r
        .solve_upper_triangular(&qty.rows(0, p).into_owned())
        .ok_or_else(|| Error::RankDeficient(dm.names.clone()))?;
    let resid = &dm.y - &dm.x * &beta;
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let sigma2 = rss / (n - p) as f64;

    // (X'X)^-1 = R^-1 R^-T from the triangular factor.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::RankDeficient(dm.names.clone()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let se: Vec<f64> = (0..p).map(|i| (sigma2 * xtx_inv[(i, i)]).max(0.0).sqrt()).collect();

    Ok(RegressionFit {
        kind: FitKind::Linear,
        names: dm.names.clone(),
        coef: beta.iter().copied().collect(),
        se,
        kinds: dm.kinds.clone(),
        converged: true,
        iterations: 1,
        separation_detected: false,
        n,
        p,
        fitted: None,
    })
}

fn logistic_penalized_loglik(y: &DVector<f64>, eta: &DVector<f64>, beta: &DVector<f64>, ridge: f64) -> f64 {
    let mut ll = 0.0;
    for i in 0..y.len() {
        let e = eta[i].clamp(-30.0, 30.0);
        // log(1 + exp(e)) computed stably
        let log1pe = if e > 0.0 {
            e + (-e).exp().ln_1p()
        } else {
            e.exp().ln_1p()
        };
        ll += y[i] * e - log1pe;
    }
    ll - 0.5 * ridge * beta.iter().map(|b| b * b).sum::<f64>()
}

/// Binary logistic regression by Newton/IRLS on a ridge-stabilized
/// log-likelihood. Standard errors come from the inverse of the
/// ridge-augmented observed information.
pub fn fit_logistic(
    dm: &DesignMatrix,
    max_iter: usize,
    tol: f64,
    ridge: f64,
) -> Result<RegressionFit> {
    let (n, p) = (dm.n(), dm.p());
    if dm.y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::NotBinaryResponse);
    }
    if n < p {
        return Err(Error::TooFewRows { n, p });
    }

    let mut beta = DVector::zeros(p);
    let mut converged = false;
    let mut iterations = 0;
    let mut info = DMatrix::zeros(p, p);
    for iter in 1..=max_iter {
        iterations = iter;
        let eta = &dm.x * &beta;
        let prob = eta.map(|e| 1.0 / (1.0 + (-e.clamp(-30.0, 30.0)).exp()));
        let score = dm.x.transpose() * (&dm.y - &prob) - ridge * &beta;
        if score.amax() < tol {
            converged = true;
            // information at the solution for standard errors
            info = information(&dm.x, &prob, ridge);
            break;
        }
        info = information(&dm.x, &prob, ridge);
        let chol = info
            .clone()
            .cholesky()
            .ok_or_else(|| Error::RankDeficient(dm.names.clone()))?;
        let delta = chol.solve(&score);

        // Newton step with halving when the penalized likelihood worsens.
        // The acceptance test tolerates rounding noise: near the optimum the
        // true improvement is below float precision and must not be rejected.
        let ll_old = logistic_penalized_loglik(&dm.y, &eta, &beta, ridge);
        let ll_slack = 1e-10 * (1.0 + ll_old.abs());
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand = &beta + step * &delta;
            let eta_c = &dm.x * &cand;
            if logistic_penalized_loglik(&dm.y, &eta_c, &cand, ridge) >= ll_old - ll_slack {
                beta = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // stalled: accept the tiny step and let the score check decide
            beta += step * &delta;
        }
    }

    let eta = &dm.x * &beta;
    let prob: Vec<f64> = eta
        .iter()
        .map(|&e| (1.0 / (1.0 + (-e.clamp(-30.0, 30.0)).exp())).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))
        .collect();
    if !converged {
        info = information(
            &dm.x,
            &DVector::from_iterator(n, prob.iter().copied()),
            ridge,
        );
    }
    let se = match info.clone().cholesky() {
        Some(chol) => {
            let inv = chol.inverse();
            (0..p).map(|i| inv[(i, i)].max(0.0).sqrt()).collect()
        }
        None => vec![f64::NAN; p],
    };
    let separation_detected = (0..p)
        .any(|i| dm.kinds[i] == ColumnKind::Indicator && beta[i].abs() > SEPARATION_BETA);

    Ok(RegressionFit {
        kind: FitKind::Logistic,
        names: dm.names.clone(),
        coef: beta.iter().copied().collect(),
        se,
        kinds: dm.kinds.clone(),
        converged,
        iterations,
        separation_detected,
        n,
        p,
        fitted: Some(prob),
    })
}

pub fn fit_logistic_default(dm: &DesignMatrix) -> Result<RegressionFit> {
    fit_logistic(dm, DEFAULT_MAX_ITER, DEFAULT_TOL, DEFAULT_RIDGE)
}

fn information(x: &DMatrix<f64>, prob: &DVector<f64>, ridge: f64) -> DMatrix<f64> {
    let p = x.ncols();
    let w = prob.map(|pi| pi * (1.0 - pi));
    let mut xw = x.clone();
    for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    x.transpose() * xw + ridge * DMatrix::identity(p, p)
}

/// Per-coefficient Wald confidence intervals using normal quantiles.
pub fn confint(fit: &RegressionFit, level: f64) -> Result<Vec<(f64, f64)>> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    if !fit.converged {
        return Err(Error::NotConverged);
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + level / 2.0);
    Ok(fit
        .coef
        .iter()
        .zip(&fit.se)
        .map(|(&b, &s)| (b - z * s, b + z * s))
        .collect())
}
