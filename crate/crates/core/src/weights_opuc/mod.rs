//! Hua–Pickrell weights on the line and circle, orthogonal polynomials for them,
//! Christoffel–Darboux sums and the Golinskii envelope.

mod line;
mod opuc;

pub use line::{build_monic_line, MonicLineBasis};
pub use opuc::{build_opuc, cd_identity_residual, cd_sum_circle, szego_extremal, OPUCBasis, DEGREE_CAP};

use crate::error::{HpkError, Result};
use crate::specfun::ln_gamma;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ensemble parameter with the shift bookkeeping for s ≤ -1/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPParam {
    pub s: f64,
    pub n_s: usize,
    pub s_prime: f64,
}

impl HPParam {
    pub fn new(s: f64) -> Result<HPParam> {
        if !s.is_finite() {
            return Err(HpkError::Domain(format!("s must be finite, got {s}")));
        }
        let mut n_s = 0usize;
        while s + (n_s as f64) <= -0.5 {
            n_s += 1;
        }
        Ok(HPParam {
            s,
            n_s,
            s_prime: s + n_s as f64,
        })
    }

    /// N' = N - n_s.
    pub fn n_prime(&self, n: usize) -> Result<usize> {
        n.checked_sub(self.n_s)
            .filter(|&v| v >= 1)
            .ok_or_else(|| HpkError::Domain(format!("N = {n} must exceed n_s = {}", self.n_s)))
    }

    pub fn is_probability(&self) -> bool {
        self.s > -0.5
    }

    pub(crate) fn require_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(HpkError::Domain(format!("requires s > -1/2, got {}", self.s)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// (2 + 2cos θ)^s, singular at θ = ±π.
    Lambda,
    /// λ(-e^{iθ}) = (2 - 2cos θ)^s, singular at θ = 0.
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleWeight {
    pub param: HPParam,
    pub kind: WeightKind,
}

impl CircleWeight {
    pub fn lambda(param: HPParam) -> CircleWeight {
        CircleWeight {
            param,
            kind: WeightKind::Lambda,
        }
    }

    pub fn w(param: HPParam) -> CircleWeight {
        CircleWeight {
            param,
            kind: WeightKind::W,
        }
    }

    /// (1/2π)∫ weight dθ = Γ(2s+1)/Γ(s+1)².
    pub fn normalization(&self) -> Result<f64> {
        self.param.require_probability()?;
        let s = self.param.s;
        Ok((ln_gamma(2.0 * s + 1.0)? - 2.0 * ln_gamma(s + 1.0)?).exp())
    }

    /// Trigonometric moments c_k = (1/2π)∫e^{-ikθ} weight dθ of the probability-normalized weight.
    pub fn normalized_moments(&self, count: usize) -> Result<Vec<f64>> {
        self.param.require_probability()?;
        let s = self.param.s;
        let mut c = Vec::with_capacity(count);
        let mut v = 1.0;
        for k in 0..count {
            let signed = match self.kind {
                WeightKind::Lambda => v,
                WeightKind::W if k % 2 == 1 => -v,
                WeightKind::W => v,
            };
            c.push(signed);
            v *= (s - k as f64) / (s + k as f64 + 1.0);
        }
        Ok(c)
    }

    /// Distance-based evaluation: |2 cos(θ/2)|^{2s} or |2 sin(θ/2)|^{2s}.
    fn base(&self, theta: f64) -> f64 {
        match self.kind {
            WeightKind::Lambda => (2.0 * (0.5 * theta).cos()).abs(),
            WeightKind::W => (2.0 * (0.5 * theta).sin()).abs(),
        }
    }
}

/// (1 + x²)^{-s-N}.
pub fn eval_line_weight(param: &HPParam, n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(HpkError::Domain("N must be at least 1".into()));
    }
    Ok((1.0 + x * x).powf(-(param.s + n as f64)))
}

/// Unnormalized circle weight at θ ∈ (-π, π).
pub fn eval_circle_weight(w: &CircleWeight, theta: f64) -> Result<f64> {
    if !(theta > -PI && theta < PI) && !(theta == PI && w.kind == WeightKind::W) {
        return Err(HpkError::Domain(format!("theta = {theta} outside (-π, π)")));
    }
    let s = w.param.s;
    if s == 0.0 {
        return Ok(1.0);
    }
    let b = w.base(theta);
    if b == 0.0 && s < 0.0 {
        return Err(HpkError::Domain(format!("singular angle {theta} for s = {s}")));
    }
    Ok(b.powf(2.0 * s))
}

/// Probability-normalized circle weight.
pub fn eval_circle_weight_normalized(w: &CircleWeight, theta: f64) -> Result<f64> {
    Ok(eval_circle_weight(w, theta)? / w.normalization()?)
}

/// |(1+e^{iθ})^{s̄}|² for complex s: |2cos(θ/2)|^{2ℜs}·e^{ℑs·θ}.
pub fn eval_circle_weight_complex(s: Complex64, theta: f64) -> Result<f64> {
    if !(theta > -PI && theta < PI) {
        return Err(HpkError::Domain(format!("theta = {theta} outside (-π, π)")));
    }
    let r = (2.0 * (0.5 * theta).cos()).abs();
    Ok(r.powf(2.0 * s.re) * (s.im * theta).exp())
}

/// Certified C with λ^{(a)}/C ≤ λ^{(s)} ≤ C λ^{(a)}, a = ℜs, checked on a grid.
pub fn weight_ratio_bound(s: Complex64, a: f64) -> Result<f64> {
    if !(a > -0.5) {
        return Err(HpkError::Domain(format!("Re s = {a} must exceed -1/2")));
    }
    if (s.re - a).abs() > 1e-12 * (1.0 + a.abs()) {
        return Err(HpkError::Domain(format!("a = {a} must equal Re s = {}", s.re)));
    }
    let c = (PI * s.im.abs()).exp();
    let real = Complex64::new(a, 0.0);
    let m = 10_000;
    for i in 0..m {
        let theta = -PI + 2.0 * PI * (i as f64 + 0.5) / m as f64;
        let ratio = eval_circle_weight_complex(s, theta)? / eval_circle_weight_complex(real, theta)?;
        if ratio > c * (1.0 + 1e-12) || ratio < (1.0 - 1e-12) / c {
            return Err(HpkError::IllConditioned {
                what: format!("weight ratio bound violated at θ = {theta}"),
                residual: ratio,
            });
        }
    }
    Ok(c)
}

/// (|1 + e^{iθ}| + 1/(n+1))^{-s}.
pub fn golinskii_envelope(param: &HPParam, n: usize, theta: f64) -> f64 {
    let d = (2.0 * (0.5 * theta).cos()).abs();
    (d + 1.0 / (n as f64 + 1.0)).powf(-param.s)
}
