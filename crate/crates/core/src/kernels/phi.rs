use super::circle::CirclePolys;
use crate::error::{HpkError, Result};
use crate::weights_opuc::{eval_circle_weight, CircleWeight, HPParam};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Rescaled Christoffel–Darboux kernel Φ_n for the weight w = λ(-·).
#[derive(Clone, Debug)]
pub struct RescaledCircleKernel {
    pub param: HPParam,
    pub n: usize,
    polys: CirclePolys,
}

impl RescaledCircleKernel {
    pub fn new(param: HPParam, n: usize) -> Result<RescaledCircleKernel> {
        param.require_probability()?;
        if n == 0 {
            return Err(HpkError::Domain("n must be positive".into()));
        }
        Ok(RescaledCircleKernel {
            param,
            n,
            polys: CirclePolys::new(CircleWeight::w(param), n)?,
        })
    }

    /// φ_k(θ) = √(w(θ)/2π) q_k(e^{iθ}) for k < n.
    fn phis(&self, theta: f64) -> Result<Vec<Complex64>> {
        let w = eval_circle_weight(&self.polys.weight, theta)? / self.polys.normalization();
        let amp = (w / (2.0 * PI)).sqrt();
        Ok(self.polys.eval_all(theta).into_iter().map(|q| q * amp).collect())
    }
}

/// Φ_n(α, β) = (1/n) e^{-i(n-1)α/2n} Σ φ_k(α/n) conj φ_k(β/n) e^{i(n-1)β/2n}.
pub fn eval_phi_n(k: &RescaledCircleKernel, alpha: f64, beta: f64) -> Result<Complex64> {
    let nf = k.n as f64;
    for v in [alpha, beta] {
        if !(v.abs() < nf * PI) {
            return Err(HpkError::Domain(format!("{v} outside (-nπ, nπ) for n = {}", k.n)));
        }
    }
    let a = k.phis(alpha / nf)?;
    let b = if alpha == beta { a.clone() } else { k.phis(beta / nf)? };
    let sum: Complex64 = a.iter().zip(&b).map(|(u, v)| u * v.conj()).sum();
    let phase = Complex64::from_polar(1.0, (nf - 1.0) / (2.0 * nf) * (beta - alpha));
    Ok(sum * phase / nf)
}
