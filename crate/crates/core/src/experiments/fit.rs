use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    /// Converged with the parameter clamped to its admissible range.
    AtBound,
    MaxIterations,
    /// The data do not determine every parameter.
    DegenerateJacobian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    /// Absent when there are no residual degrees of freedom or the fit is degenerate.
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: FitStatus,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value)
    }
}

const MAX_ITERATIONS: usize = 500;
const PARAM_TOL: f64 = 1e-10;

/// Residuals and Jacobian of the joint model `P1 = A exp(-t/T1) + B`, `P0 = B`.
fn model(times: &[f64], p1: &[f64], p0: &[f64], theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let (a, b, t1) = (theta[0], theta[1], theta[2]);
    let n = times.len();
    let mut r = DVector::zeros(2 * n);
    let mut j = DMatrix::zeros(2 * n, 3);
    for (i, &t) in times.iter().enumerate() {
        let e = (-t / t1).exp();
        r[i] = p1[i] - (a * e + b);
        j[(i, 0)] = e;
        j[(i, 1)] = 1.0;
        j[(i, 2)] = a * e * t / (t1 * t1);
        r[n + i] = p0[i] - b;
        j[(n + i, 1)] = 1.0;
    }
    (r, j)
}

/// Least-squares joint fit of `P1(t) = A exp(-t/T1) + B` and `P0(t) = B`
/// (Levenberg-Marquardt with an analytic Jacobian).
///
/// Standard errors come from `s^2 (J^T J)^-1` at the optimum with
/// `s^2 = RSS / (2n - 3)`.
pub fn fit_t1(times: &[f64], p1: &[f64], p0: &[f64]) -> Result<FitResult> {
    let n = times.len();
    if n < 4 {
        return Err(Error::invalid(format!("T1 fit needs at least 4 points per curve, got {n}")));
    }
    if p1.len() != n || p0.len() != n {
        return Err(Error::invalid("time and probability series differ in length"));
    }
    if times.iter().chain(p1).chain(p0).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in fit input".into()));
    }
    let span = times.iter().copied().fold(f64::NEG_INFINITY, f64::max) - times.iter().copied().fold(f64::INFINITY, f64::min);
    if !(span > 0.0) {
        return Err(Error::invalid("T1 fit needs distinct times"));
    }

    let b0 = p0.iter().sum::<f64>() / n as f64;
    // Log-linear start from points where P1 - B is positive.
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &v) in times.iter().zip(p1) {
        if v - b0 > 0.0 {
            let y = (v - b0).ln();
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
            m += 1.0;
        }
    }
    let slope = if m >= 2.0 { (m * sxy - sx * sy) / (m * sxx - sx * sx) } else { f64::NAN };
    let t1_start = if slope < 0.0 && slope.is_finite() { -1.0 / slope } else { 10.0 * span };
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let a_start = (p1.iter().zip(times).find(|(_, &t)| t == t_min).map_or(0.0, |(&v, _)| v) - b0)
        * (t_min / t1_start).exp();
    let mut theta = DVector::from_vec(vec![a_start, b0, t1_start]);

    let data_scale = p1.iter().chain(p0).fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let (mut r, mut j) = model(times, p1, p0, &theta);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut status = FitStatus::MaxIterations;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut improved = false;
        let mut converged = false;
        for _ in 0..60 {
            let mut damped = jtj.clone();
            for d in 0..3 {
                damped[(d, d)] += mu * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
                mu *= 10.0;
                continue;
            };
            let candidate = &theta + &step;
            if !(candidate[2] > 0.0) {
                mu *= 10.0;
                continue;
            }
            let (rc, jc) = model(times, p1, p0, &candidate);
            let c = rc.norm_squared();
            let small_step = (0..3).all(|k| step[k].abs() <= PARAM_TOL * (candidate[k].abs() + PARAM_TOL));
            if c <= cost {
                theta = candidate;
                r = rc;
                j = jc;
                converged = small_step || cost - c <= 1e-30 * (1.0 + cost);
                cost = c;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            if small_step {
                converged = true;
                break;
            }
            mu *= 4.0;
        }
        if converged || !improved {
            status = FitStatus::Converged;
            break;
        }
    }

    // Identifiability: the amplitude must be visible above the data scale and
    // the scaled normal matrix well conditioned.
    let jtj = j.transpose() * &j;
    let scale: Vec<f64> = (0..3).map(|k| jtj[(k, k)].sqrt()).collect();
    let degenerate = theta[0].abs() <= 1e-9 * data_scale || scale.iter().any(|&s| !(s > 0.0)) || {
        let corr = DMatrix::from_fn(3, 3, |a, b| jtj[(a, b)] / (scale[a] * scale[b]));
        let eig = corr.symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        lo <= 1e-14 * hi
    };
    let dof = 2 * n - 3;
    let covariance = if degenerate {
        None
    } else {
        jtj.try_inverse().map(|inv| inv * (cost / dof as f64))
    };
    if degenerate {
        status = FitStatus::DegenerateJacobian;
    }
    let names = ["A", "B", "T1"];
    Ok(FitResult {
        parameters: (0..3)
            .map(|k| FitParameter {
                name: names[k].to_string(),
                value: theta[k],
                stderr: covariance.as_ref().map(|c| c[(k, k)].max(0.0).sqrt()),
            })
            .collect(),
        residual_norm: cost.sqrt(),
        iterations,
        status,
    })
}

/// Least-squares preparation error `eta` in `eps_exp = (1 - 2 eta) eps_sim + eta`.
///
/// The estimate is clamped to `[0, 1/2)`.
pub fn fit_preparation_error(eps_experiment: &[f64], eps_simulated: &[f64]) -> Result<FitResult> {
    if eps_experiment.is_empty() || eps_experiment.len() != eps_simulated.len() {
        return Err(Error::invalid("error curves must be non-empty and of equal length"));
    }
    if let Some(&bad) = eps_simulated.iter().find(|&&e| !(e < 0.5)) {
        return Err(Error::invalid(format!("simulated error rate {bad} is not below 1/2")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &s) in eps_experiment.iter().zip(eps_simulated) {
        let slope = 1.0 - 2.0 * s;
        num += (x - s) * slope;
        den += slope * slope;
    }
    let raw = num / den;
    let upper = 0.5 - f64::EPSILON;
    let eta = raw.clamp(0.0, upper);
    let rss: f64 = eps_experiment
        .iter()
        .zip(eps_simulated)
        .map(|(&x, &s)| (x - ((1.0 - 2.0 * eta) * s + eta)).powi(2))
        .sum();
    let n = eps_experiment.len();
    let stderr = (n > 1).then(|| (rss / (n - 1) as f64 / den).sqrt());
    Ok(FitResult {
        parameters: vec![FitParameter {
            name: "eta".into(),
            value: eta,
            stderr,
        }],
        residual_norm: rss.sqrt(),
        iterations: 0,
        status: if eta == raw { FitStatus::Converged } else { FitStatus::AtBound },
    })
}
