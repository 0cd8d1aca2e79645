use super::limit::v_limit;
use super::nonzero;
use crate::error::{HpkError, Result};
use crate::specfun::{gamma_fn, AccuracyPolicy};
use crate::weights_opuc::{build_monic_line, HPParam, MonicLineBasis};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VFlavor {
    Limit,
    Prelimit { n: usize },
}

#[derive(Clone, Debug)]
pub struct VFunction {
    pub param: HPParam,
    pub flavor: VFlavor,
    basis: Option<MonicLineBasis>,
    policy: AccuracyPolicy,
}

impl VFunction {
    pub fn limit(param: HPParam) -> Result<VFunction> {
        param.require_probability()?;
        Ok(VFunction {
            param,
            flavor: VFlavor::Limit,
            basis: None,
            policy: AccuracyPolicy::default(),
        })
    }

    /// V_{s,N}; uses the direct line basis, so N is bounded by its conditioning cap.
    pub fn prelimit(param: HPParam, n: usize) -> Result<VFunction> {
        param.require_probability()?;
        if n < 2 {
            return Err(HpkError::Domain(format!("prelimit V needs N >= 2, got {n}")));
        }
        Ok(VFunction {
            param,
            flavor: VFlavor::Prelimit { n },
            basis: Some(build_monic_line(&param, n, n - 1)?),
            policy: AccuracyPolicy::default(),
        })
    }

    /// Closed-form ‖V‖² on L²(ℝ).
    pub fn norm_sq(&self) -> Result<f64> {
        let s = self.param.s;
        match (&self.flavor, &self.basis) {
            (VFlavor::Prelimit { n }, Some(b)) => Ok((*n as f64).powf(1.0 + 2.0 * s) * b.norms_sq[n - 1]),
            _ => {
                let g = gamma_fn(s + 0.5, &self.policy)?;
                Ok(2f64.powf(2.0 * s + 1.0) * g * g * (s + 0.5))
            }
        }
    }
}

#[allow(non_snake_case)]
pub fn eval_V(v: &VFunction, x: f64) -> Result<f64> {
    nonzero(x)?;
    match (&v.flavor, &v.basis) {
        (VFlavor::Prelimit { n }, Some(b)) => {
            let nf = *n as f64;
            let psi = b.orthonormal_weighted(nf * x)[n - 1];
            let sign = if n % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 };
            Ok(sign * nf.powf(1.0 + v.param.s) * psi * b.norms_sq[n - 1].sqrt())
        }
        _ => v_limit(&v.param, x, &v.policy),
    }
}
