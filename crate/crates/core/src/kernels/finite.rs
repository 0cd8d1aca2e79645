use super::circle::CirclePolys;
use super::{cayley, nonzero};
use crate::error::{HpkError, Result};
use crate::weights_opuc::{build_monic_line, CircleWeight, HPParam, MonicLineBasis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest N served by the direct line basis; beyond it the Hankel moment
/// matrix loses too much accuracy and the circle route takes over.
pub const LINE_DIRECT_MAX_N: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LineDirect,
    CircleCayley,
}

#[derive(Clone, Debug)]
enum Basis {
    Line(MonicLineBasis),
    Circle(CirclePolys),
}

/// Correlation kernel K_N(x, y) = N·K(Nx, Ny) of the rescaled pseudo-Jacobi ensemble.
#[derive(Clone, Debug)]
pub struct FiniteKernel {
    pub param: HPParam,
    pub n: usize,
    pub provenance: Provenance,
    basis: Basis,
}

impl FiniteKernel {
    pub fn new(param: HPParam, n: usize) -> Result<FiniteKernel> {
        let prov = if n <= LINE_DIRECT_MAX_N {
            Provenance::LineDirect
        } else {
            Provenance::CircleCayley
        };
        FiniteKernel::with_provenance(param, n, prov)
    }

    pub fn with_provenance(param: HPParam, n: usize, provenance: Provenance) -> Result<FiniteKernel> {
        param.require_probability()?;
        if n == 0 {
            return Err(HpkError::Domain("N must be at least 1".into()));
        }
        let basis = match provenance {
            Provenance::LineDirect => Basis::Line(build_monic_line(&param, n, n - 1)?),
            Provenance::CircleCayley => Basis::Circle(CirclePolys::new(CircleWeight::lambda(param), n)?),
        };
        Ok(FiniteKernel {
            param,
            n,
            provenance,
            basis,
        })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// Orthonormal eigenfunctions ψ_0..ψ_{N-1} at x (real for the line route).
    pub fn eigenfunctions(&self, x: f64) -> Vec<Complex64> {
        let nf = self.n as f64;
        let xs = nf * x;
        match &self.basis {
            Basis::Line(b) => b
                .orthonormal_weighted(xs)
                .into_iter()
                .map(|v| Complex64::new(v * nf.sqrt(), 0.0))
                .collect(),
            Basis::Circle(c) => {
                let r2 = 1.0 + xs * xs;
                let s = self.param.s;
                // normalized λ at the Cayley angle, written in x to avoid cancellation near ±π
                let lam = if s == 0.0 {
                    1.0
                } else {
                    (4.0 / r2).powf(s) / c.normalization()
                };
                let amp = (lam * 2.0 / r2 / (2.0 * PI) * nf).sqrt();
                let gauge = Complex64::from_polar(amp, (nf - 1.0) * 1f64.atan2(xs));
                c.eval_all(cayley(xs)).into_iter().map(|p| gauge * p).collect()
            }
        }
    }

    /// Kernel value without the ℝ* restriction.
    pub fn eval_raw(&self, x: f64, y: f64) -> f64 {
        let px = self.eigenfunctions(x);
        if x == y {
            return px.iter().map(|p| p.norm_sqr()).sum();
        }
        let py = self.eigenfunctions(y);
        px.iter().zip(&py).map(|(a, b)| (a * b.conj()).re).sum()
    }

    /// ρ₁(x) = K_N(x, x).
    pub fn density(&self, x: f64) -> f64 {
        self.eval_raw(x, x)
    }

    /// (sgn x sgn y)^N K_N(x, y).
    pub fn eval_sign_corrected(&self, x: f64, y: f64) -> Result<f64> {
        let v = eval_finite_kernel(self, x, y)?;
        let flip = self.n % 2 == 1 && (x < 0.0) != (y < 0.0);
        Ok(if flip { -v } else { v })
    }
}

pub fn eval_finite_kernel(k: &FiniteKernel, x: f64, y: f64) -> Result<f64> {
    nonzero(x)?;
    nonzero(y)?;
    Ok(k.eval_raw(x, y))
}
