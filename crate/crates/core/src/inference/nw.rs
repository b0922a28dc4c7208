//! Normal-Wishart posteriors over a 2-D Gaussian location model.
//!
//! Parameterisation follows the usual conjugate form: Λ ~ Wishart(W, ν),
//! μ | Λ ~ N(m, (βΛ)⁻¹).

use std::f64::consts::{LN_2, PI};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma};

const DIM: f64 = 2.0;

/// Below this responsibility mass the posterior is left at the prior.
pub const MIN_MASS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "NwRecord", try_from = "NwRecord")]
pub struct NormalWishart {
    pub mean: Vector2<f64>,
    /// Wishart scale matrix W (E[Λ] = νW).
    pub scale: Matrix2<f64>,
    pub beta: f64,
    pub dof: f64,
}

#[derive(Serialize, Deserialize)]
struct NwRecord {
    mean: [f64; 2],
    scale: [[f64; 2]; 2],
    beta: f64,
    dof: f64,
}

impl From<NormalWishart> for NwRecord {
    fn from(nw: NormalWishart) -> Self {
        let s = nw.scale;
        NwRecord {
            mean: [nw.mean[0], nw.mean[1]],
            scale: [[s[(0, 0)], s[(0, 1)]], [s[(1, 0)], s[(1, 1)]]],
            beta: nw.beta,
            dof: nw.dof,
        }
    }
}

impl TryFrom<NwRecord> for NormalWishart {
    type Error = Error;

    fn try_from(r: NwRecord) -> Result<Self> {
        NormalWishart::new(
            Vector2::new(r.mean[0], r.mean[1]),
            Matrix2::new(r.scale[0][0], r.scale[0][1], r.scale[1][0], r.scale[1][1]),
            r.beta,
            r.dof,
        )
    }
}

/// True when `m` is symmetric and its Cholesky factorisation succeeds.
pub fn is_spd(m: &Matrix2<f64>) -> bool {
    let tol = 1e-12 * m.abs().max().max(1e-300);
    m.iter().all(|x| x.is_finite()) && (m[(0, 1)] - m[(1, 0)]).abs() <= tol && m.cholesky().is_some()
}

fn symmetrise(m: Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}

fn spd_inverse(m: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let chol = m.cholesky().ok_or(Error::NotSpd)?;
    Ok(symmetrise(chol.inverse()))
}

impl NormalWishart {
    pub fn new(mean: Vector2<f64>, scale: Matrix2<f64>, beta: f64, dof: f64) -> Result<Self> {
        if !is_spd(&scale) {
            return Err(Error::NotSpd);
        }
        if !(beta > 0.0 && beta.is_finite()) || !(dof > DIM - 1.0 && dof.is_finite()) {
            return Err(Error::Config(format!(
                "Normal-Wishart needs beta > 0 and dof > 1 (got beta {beta}, dof {dof})"
            )));
        }
        if !mean.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical("non-finite Normal-Wishart mean".into()));
        }
        Ok(Self { mean, scale, beta, dof })
    }

    /// E[Σ] = W⁻¹ / (ν − D − 1); requires ν > 3.
    pub fn expected_covariance(&self) -> Result<Matrix2<f64>> {
        if self.dof <= DIM + 1.0 {
            return Err(Error::Config(format!(
                "posterior-mean covariance needs dof > 3, got {}",
                self.dof
            )));
        }
        Ok(spd_inverse(&self.scale)? / (self.dof - DIM - 1.0))
    }

    /// Covariance (νW)⁻¹ implied by the expected precision.
    pub fn precision_mean_covariance(&self) -> Result<Matrix2<f64>> {
        spd_inverse(&(self.scale * self.dof))
    }

    /// E[ln |Λ|].
    pub fn expected_log_det(&self) -> f64 {
        digamma(0.5 * self.dof) + digamma(0.5 * (self.dof - 1.0)) + DIM * LN_2 + self.scale.determinant().ln()
    }

    /// E[ln N(l | μ, Λ⁻¹)] under this distribution.
    pub fn expected_log_gaussian(&self, loc: Vector2<f64>) -> f64 {
        let d = loc - self.mean;
        let maha = (d.transpose() * self.scale * d)[(0, 0)];
        0.5 * self.expected_log_det() - DIM * 0.5 * (2.0 * PI).ln() - 0.5 * (DIM / self.beta + self.dof * maha)
    }

    /// Log density of the Student-t posterior predictive at `loc`.
    pub fn predictive_log_density(&self, loc: Vector2<f64>) -> f64 {
        let nu = self.dof + 1.0 - DIM;
        let c = nu * self.beta / (1.0 + self.beta);
        let d = loc - self.mean;
        let maha = c * (d.transpose() * self.scale * d)[(0, 0)];
        let log_det_l = DIM * c.ln() + self.scale.determinant().ln();
        ln_gamma(0.5 * (nu + DIM)) - ln_gamma(0.5 * nu) + 0.5 * log_det_l
            - 0.5 * DIM * (nu * PI).ln()
            - 0.5 * (nu + DIM) * (maha / nu).ln_1p()
    }

    /// KL(self ‖ prior).
    pub fn kl_from(&self, prior: &NormalWishart) -> f64 {
        let e_logdet = self.expected_log_det();
        let dm = self.mean - prior.mean;
        let prior_inv = spd_inverse(&prior.scale).expect("prior scale is SPD");
        let e_log_p = 0.5
            * (DIM * (prior.beta / (2.0 * PI)).ln() + e_logdet
                - DIM * prior.beta / self.beta
                - prior.beta * self.dof * (dm.transpose() * self.scale * dm)[(0, 0)])
            + ln_wishart_norm(&prior.scale, prior.dof)
            + 0.5 * (prior.dof - DIM - 1.0) * e_logdet
            - 0.5 * self.dof * (prior_inv * self.scale).trace();
        let e_log_q = 0.5 * e_logdet + 0.5 * DIM * (self.beta / (2.0 * PI)).ln() - 0.5 * DIM
            + ln_wishart_norm(&self.scale, self.dof)
            + 0.5 * (self.dof - DIM - 1.0) * e_logdet
            - 0.5 * self.dof * DIM;
        e_log_q - e_log_p
    }
}

/// ln B(W, ν), the Wishart log normaliser for D = 2.
fn ln_wishart_norm(scale: &Matrix2<f64>, dof: f64) -> f64 {
    -0.5 * dof * scale.determinant().ln()
        - 0.5 * dof * DIM * LN_2
        - 0.5 * PI.ln() // D(D-1)/4 ln π
        - ln_gamma(0.5 * dof)
        - ln_gamma(0.5 * (dof - 1.0))
}

/// Student-t predictive density of a location under `nw`.
pub fn spatial_predictive(loc: [f64; 2], nw: &NormalWishart) -> Result<f64> {
    if !is_spd(&nw.scale) {
        return Err(Error::NotSpd);
    }
    Ok(nw.predictive_log_density(Vector2::new(loc[0], loc[1])).exp())
}

/// Conjugate update of `prior` with weighted 2-D points.
pub fn update_nw(prior: &NormalWishart, points: &[[f64; 2]], weights: &[f64]) -> Result<NormalWishart> {
    debug_assert_eq!(points.len(), weights.len());
    let mut n = 0.0;
    let mut sum = Vector2::zeros();
    for (p, &r) in points.iter().zip(weights) {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(Error::Numerical(format!("non-finite location {p:?}")));
        }
        n += r;
        sum += Vector2::new(p[0], p[1]) * r;
    }
    if n < MIN_MASS {
        return Ok(*prior);
    }
    let xbar = sum / n;
    let mut scatter = Matrix2::zeros();
    for (p, &r) in points.iter().zip(weights) {
        let d = Vector2::new(p[0], p[1]) - xbar;
        scatter += d * d.transpose() * r;
    }
    let beta = prior.beta + n;
    let dof = prior.dof + n;
    let mean = (prior.mean * prior.beta + xbar * n) / beta;
    let dm = xbar - prior.mean;
    let scale_inv = spd_inverse(&prior.scale)? + scatter + dm * dm.transpose() * (prior.beta * n / (prior.beta + n));
    let scale = spd_inverse(&symmetrise(scale_inv))?;
    NormalWishart::new(mean, scale, beta, dof)
}
