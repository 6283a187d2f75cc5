//! Noise-grid sweeps and the linear fit of fidelity on discord and EoF.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{damped_bell_pair, NoiseParams};
use crate::error::{Error, Result};
use crate::metrics::CorrelationReport;
use crate::optimize::linspace;
use crate::protocol::channel_capacity;

/// Default grid points per axis (step 0.05 on the unit square).
pub const DEFAULT_STEPS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub p: f64,
    pub q: f64,
    pub fidelity: f64,
    pub qd: f64,
    pub eof: f64,
    pub capacity: f64,
}

/// All record fields for the damped `Φ⁺` at `(p, q)`.
pub fn evaluate_point(p: f64, q: f64) -> Result<ExperimentRecord> {
    let rho = damped_bell_pair(NoiseParams::new(p, q)?)?;
    let report = CorrelationReport::compute(&rho)?;
    Ok(ExperimentRecord {
        p,
        q,
        fidelity: report.fidelity,
        qd: report.qd,
        eof: report.eof,
        capacity: channel_capacity(&rho)?,
    })
}

/// Records on `p_values x q_values`, `p` outer.
pub fn sweep_grid(p_values: &[f64], q_values: &[f64]) -> Result<Vec<ExperimentRecord>> {
    let points: Vec<(f64, f64)> = p_values
        .iter()
        .flat_map(|&p| q_values.iter().map(move |&q| (p, q)))
        .collect();
    points.par_iter().map(|&(p, q)| evaluate_point(p, q)).collect()
}

/// Uniform `p_steps x q_steps` sweep of `[0, 1]²`.
pub fn sweep_noise_grid(p_steps: usize, q_steps: usize) -> Result<Vec<ExperimentRecord>> {
    if p_steps < 2 || q_steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2 steps per axis, got {p_steps}x{q_steps}"
        )));
    }
    sweep_grid(&linspace(0.0, 1.0, p_steps), &linspace(0.0, 1.0, q_steps))
}

/// `fidelity ≈ alpha + beta_qd·QD + beta_eof·EoF`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub alpha: f64,
    pub beta_qd: f64,
    pub beta_eof: f64,
    pub r2: f64,
    pub mse: f64,
    pub samples: usize,
}

impl RegressionFit {
    pub fn predict(&self, qd: f64, eof: f64) -> f64 {
        self.alpha + self.beta_qd * qd + self.beta_eof * eof
    }
}

/// Relative determinant below which the regressors count as collinear.
const RANK_TOL: f64 = 1e-12;

/// Ordinary least squares via centered normal equations.
///
/// A constant target gives zero slopes and `r2 = 1`.
pub fn fit_regression(records: &[ExperimentRecord]) -> Result<RegressionFit> {
    let n = records.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "regression needs at least 3 records, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = |f: fn(&ExperimentRecord) -> f64| records.iter().map(f).sum::<f64>() / nf;
    let (m1, m2, my) = (mean(|r| r.qd), mean(|r| r.eof), mean(|r| r.fidelity));

    let (mut s11, mut s12, mut s22, mut s1y, mut s2y, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for r in records {
        let (x1, x2, y) = (r.qd - m1, r.eof - m2, r.fidelity - my);
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * y;
        s2y += x2 * y;
        syy += y * y;
    }
    let det = s11 * s22 - s12 * s12;
    if s11 <= 0.0 || s22 <= 0.0 || det <= RANK_TOL * s11 * s22 {
        return Err(Error::RankDeficient);
    }
    let beta_qd = (s22 * s1y - s12 * s2y) / det;
    let beta_eof = (s11 * s2y - s12 * s1y) / det;
    let alpha = my - beta_qd * m1 - beta_eof * m2;

    let ss_res: f64 = records
        .iter()
        .map(|r| (r.fidelity - (alpha + beta_qd * r.qd + beta_eof * r.eof)).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RegressionFit {
        alpha,
        beta_qd,
        beta_eof,
        r2,
        mse: ss_res / nf,
        samples: n,
    })
}
