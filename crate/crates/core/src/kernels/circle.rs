use crate::error::Result;
use crate::weights_opuc::{build_opuc, CircleWeight, OPUCBasis};
use num_complex::Complex64;

/// Orthonormal circle polynomials, with the s = 0 case served by exact monomials
/// so it is not subject to the builder degree cap.
#[derive(Clone, Debug)]
pub(crate) struct CirclePolys {
    pub weight: CircleWeight,
    pub count: usize,
    basis: Option<OPUCBasis>,
    norm: f64,
}

impl CirclePolys {
    pub fn new(weight: CircleWeight, count: usize) -> Result<CirclePolys> {
        if weight.param.s == 0.0 {
            return Ok(CirclePolys {
                weight,
                count,
                basis: None,
                norm: 1.0,
            });
        }
        let basis = build_opuc(&weight, count)?;
        let norm = basis.normalization();
        Ok(CirclePolys {
            weight,
            count,
            basis: Some(basis),
            norm,
        })
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn eval_all(&self, theta: f64) -> Vec<Complex64> {
        match &self.basis {
            Some(b) => b.eval_all(self.count, theta),
            None => (0..self.count)
                .map(|k| Complex64::from_polar(1.0, k as f64 * theta))
                .collect(),
        }
    }
}
