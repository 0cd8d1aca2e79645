mod damped;
mod grid;

pub use damped::{
    choose_proxy_size, contraction_norm, damped_dpp_diagonal, damped_projection, read_projection_binary,
    write_projection_binary, ContractionReport, DampedProjectionGrid, DiagonalTable, ProjectionHeader,
};
pub use grid::{GridSpec, RealGrid};

use crate::error::{HpkError, Result};
use crate::kernels::{eval_V, VFunction};
use crate::quad::GaussLegendre;
use crate::sampling::Configuration;
use crate::weights_opuc::HPParam;
use serde::Serialize;

/// v_k(x) = x^k V_{s′}(x), k = 1..n_s.
#[derive(Clone, Debug)]
pub struct VBasis {
    pub param: HPParam,
    v: VFunction,
}

impl VBasis {
    pub fn new(param: HPParam) -> Result<VBasis> {
        let v = VFunction::limit(HPParam::new(param.s_prime)?)?;
        Ok(VBasis { param, v })
    }

    pub fn count(&self) -> usize {
        self.param.n_s
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.param.n_s {
            return Err(HpkError::Domain(format!(
                "v-index {k} outside 1..={} for s = {}",
                self.param.n_s, self.param.s
            )));
        }
        Ok(())
    }
}

pub fn eval_v_basis(vb: &VBasis, k: usize, x: f64) -> Result<f64> {
    vb.check_index(k)?;
    Ok(x.powi(k as i32) * eval_V(&vb.v, x)?)
}

/// Square-integrability at infinity of a function growing like |x|^exponent.
pub fn square_integrable_at_infinity(exponent: f64) -> bool {
    exponent < -0.5
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthCertificate {
    pub k: usize,
    pub exponent: f64,
    pub square_integrable: bool,
    /// Fitted log-log slope of |v_k| on [10², 10⁶].
    pub pointwise_slope: f64,
    /// Fitted log-log slope of T ↦ ∫_1^T v_k² on [10⁴, 10⁹].
    pub integral_slope: f64,
    /// 2·exponent + 1.
    pub integral_slope_target: f64,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn growth_certificate(vb: &VBasis, k: usize) -> Result<GrowthCertificate> {
    vb.check_index(k)?;
    let exponent = k as f64 - 1.0 - vb.param.s_prime;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for i in 0..=40 {
        let x = 10f64.powf(2.0 + 0.1 * i as f64);
        lx.push(x.ln());
        ly.push(eval_v_basis(vb, k, x)?.abs().ln());
    }
    let pointwise_slope = slope(&lx, &ly);

    let gl = GaussLegendre::new(16);
    let mut acc = 0.0;
    let (mut lt, mut li) = (Vec::new(), Vec::new());
    let mut a = 1.0f64;
    for _ in 0..30 {
        let b = 2.0 * a;
        let mut err = None;
        acc += gl.integrate(
            |x| match eval_v_basis(vb, k, x) {
                Ok(v) => v * v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            a,
            b,
        );
        if let Some(e) = err {
            return Err(e);
        }
        if b >= 1e4 {
            lt.push(b.ln());
            li.push(acc.ln());
        }
        a = b;
    }
    Ok(GrowthCertificate {
        k,
        exponent,
        square_integrable: square_integrable_at_infinity(exponent),
        pointwise_slope,
        integral_slope: slope(&lt, &li),
        integral_slope_target: 2.0 * exponent + 1.0,
    })
}

/// (S₂, e^{-σ S₂}) with S₂ = Σ x².
pub fn s2_functional(config: &Configuration, sigma: f64) -> (f64, f64) {
    let s2 = config.s2();
    (s2, (-sigma * s2).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn vb(s: f64) -> VBasis {
        VBasis::new(HPParam::new(s).unwrap()).unwrap()
    }

    #[test]
    fn v1_at_s_minus_one_is_x_sin_inverse() {
        let b = vb(-1.0);
        assert!((eval_v_basis(&b, 1, 2.0 / PI).unwrap() - 2.0 / PI).abs() < 1e-14);
        for x in [0.03f64, 0.4, 1.7, 25.0] {
            let want = x * (1.0 / x).sin();
            assert!((eval_v_basis(&b, 1, x).unwrap() - want).abs() < 1e-13 * want.abs().max(1.0));
            assert_eq!(eval_v_basis(&b, 1, x).unwrap(), eval_v_basis(&b, 1, -x).unwrap());
        }
        assert!(eval_v_basis(&b, 1, 0.0).is_err());
        assert!(eval_v_basis(&b, 2, 1.0).is_err());
    }

    #[test]
    fn v1_bounded_near_infinity() {
        let b = vb(-1.0);
        let sup = (0..=90)
            .map(|i| eval_v_basis(&b, 1, 10.0 + i as f64).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(sup < 1.0 && sup > 0.99, "{sup}");
    }

    #[test]
    fn growth_exponents() {
        let c = growth_certificate(&vb(-1.0), 1).unwrap();
        assert_eq!(c.exponent, 0.0);
        assert!(!c.square_integrable);
        assert!((c.integral_slope - 1.0).abs() < 0.1, "{c:?}");
        let c = growth_certificate(&vb(-0.6), 1).unwrap();
        assert!((c.exponent + 0.4).abs() < 1e-12);
        assert!((c.integral_slope - 0.2).abs() < 0.1, "{c:?}");
        assert!((c.pointwise_slope + 0.4).abs() < 1e-3, "{c:?}");
        assert!(square_integrable_at_infinity(-0.7));
        assert!(!square_integrable_at_infinity(-0.5));
    }

    #[test]
    fn s2_examples() {
        assert_eq!(s2_functional(&Configuration::empty(), 1.0), (0.0, 1.0));
        let c = Configuration::new(vec![1.0, -2.0]).unwrap();
        let (s2, w) = s2_functional(&c, 0.5);
        assert_eq!(s2, 5.0);
        assert!((w - (-2.5f64).exp()).abs() < 1e-16);
    }
}
