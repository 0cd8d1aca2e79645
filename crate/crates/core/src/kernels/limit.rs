use super::nonzero;
use crate::error::{HpkError, Result};
use crate::specfun::{bessel_j, gamma_fn, AccuracyPolicy};
use crate::weights_opuc::HPParam;

pub const DEFAULT_H_DIAG: f64 = 1e-5;

/// Π∞(x, y) = (F(x)G(y) - F(y)G(x))/(x - y).
#[derive(Clone, Copy, Debug)]
pub struct LimitKernel {
    pub param: HPParam,
    pub h_diag: f64,
    policy: AccuracyPolicy,
}

impl LimitKernel {
    pub fn new(param: HPParam) -> Result<LimitKernel> {
        LimitKernel::with_step(param, DEFAULT_H_DIAG)
    }

    pub fn with_step(param: HPParam, h_diag: f64) -> Result<LimitKernel> {
        param.require_probability()?;
        if !(h_diag > 0.0 && h_diag < 1e-2) {
            return Err(HpkError::Domain(format!("h_diag = {h_diag} out of range")));
        }
        Ok(LimitKernel {
            param,
            h_diag,
            policy: AccuracyPolicy::default(),
        })
    }

    /// F(x) = J_{s-1/2}(1/|x|) / (2√|x|).
    pub fn f(&self, x: f64) -> Result<f64> {
        nonzero(x)?;
        let a = x.abs();
        Ok(bessel_j(self.param.s - 0.5, 1.0 / a, &self.policy)? / (2.0 * a.sqrt()))
    }

    /// G(x) = sgn(x) J_{s+1/2}(1/|x|) / √|x|.
    pub fn g(&self, x: f64) -> Result<f64> {
        nonzero(x)?;
        let a = x.abs();
        Ok(x.signum() * bessel_j(self.param.s + 0.5, 1.0 / a, &self.policy)? / a.sqrt())
    }

    /// Central difference with Richardson extrapolation, step h_diag·|x|.
    fn derivative(&self, x: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let h = self.h_diag * x.abs();
        let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
        let (d1, d2) = (d(h)?, d(2.0 * h)?);
        Ok((4.0 * d1 - d2) / 3.0)
    }

    /// F'G - FG' at m: the removable-singularity value on the diagonal.
    pub fn diagonal(&self, m: f64) -> Result<f64> {
        nonzero(m)?;
        let fp = self.derivative(m, |t| self.f(t))?;
        let gp = self.derivative(m, |t| self.g(t))?;
        Ok(fp * self.g(m)? - self.f(m)? * gp)
    }
}

pub fn eval_limit_kernel(k: &LimitKernel, x: f64, y: f64) -> Result<f64> {
    nonzero(x)?;
    nonzero(y)?;
    if (x - y).abs() < k.h_diag * x.abs().max(y.abs()) {
        return k.diagonal(0.5 * (x + y));
    }
    // order the arguments so that swapping them gives a bitwise identical result
    let (a, b) = if x < y { (x, y) } else { (y, x) };
    Ok((k.f(a)? * k.g(b)? - k.f(b)? * k.g(a)?) / (a - b))
}

/// sgn(x) 2^{s+1/2} Γ(s+3/2) J_{s+1/2}(1/|x|) / √|x|.
pub(crate) fn v_limit(param: &HPParam, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    nonzero(x)?;
    let s = param.s;
    let a = x.abs();
    let c = 2f64.powf(s + 0.5) * gamma_fn(s + 1.5, policy)?;
    Ok(x.signum() * c * bessel_j(s + 0.5, 1.0 / a, policy)? / a.sqrt())
}
