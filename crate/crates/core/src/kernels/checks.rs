use super::finite::FiniteKernel;
use super::limit::{eval_limit_kernel, LimitKernel};
use super::vfunc::{eval_V, VFunction};
use crate::error::{HpkError, Result};
use crate::quad::{graded_toward_left, GaussLegendre};
use crate::specfun::{bessel_j, AccuracyPolicy};
use crate::weights_opuc::HPParam;
use serde::Serialize;
use std::f64::consts::PI;

/// Quadrature for the projection integral, carried out in t = 1/|γ| on each half-line.
#[derive(Clone, Copy, Debug)]
pub struct ProjectionQuad {
    pub order: usize,
    pub panel_width: f64,
    /// Geometric refinement levels toward t = 0 (γ = ±∞).
    pub levels: usize,
}

impl Default for ProjectionQuad {
    fn default() -> Self {
        ProjectionQuad {
            order: 20,
            panel_width: 0.5,
            levels: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProjectionReport {
    pub integral: f64,
    pub target: f64,
    pub residual: f64,
    /// Cauchy–Schwarz estimate of the discarded part, from the mean of Π(x,γ)² near γ = 0.
    pub truncation_bound: f64,
}

/// Reproducing identity for Π∞ with the window |γ'| ≤ R taken in the angular variable
/// γ' = -2/γ of Φ∞, i.e. the integral runs over |γ| ≥ 2/R.
pub fn check_projection(
    k: &LimitKernel,
    x: f64,
    y: f64,
    r_trunc: f64,
    quad: &ProjectionQuad,
) -> Result<ProjectionReport> {
    if k.param.s < -0.49 {
        return Err(HpkError::Domain(format!(
            "projection check needs s >= -0.49, got {}",
            k.param.s
        )));
    }
    let (ax, ay) = (2.0 / x.abs(), 2.0 / y.abs());
    if !(r_trunc > ax.max(ay)) {
        return Err(HpkError::Domain(format!(
            "R = {r_trunc} must exceed the angular positions {ax}, {ay}"
        )));
    }
    if !(quad.order >= 2 && quad.panel_width > 0.0) {
        return Err(HpkError::Domain(format!("invalid quadrature spec {quad:?}")));
    }
    let target = eval_limit_kernel(k, x, y)?;
    let gl = GaussLegendre::new(quad.order);

    let t_end = 0.5 * r_trunc;
    let mut br = graded_toward_left(0.0, 1.0f64.min(t_end), 0.25, quad.levels);
    let mut t = 1.0;
    while t + quad.panel_width < t_end {
        t += quad.panel_width;
        br.push(t);
    }
    if t_end > 1.0 {
        br.push(t_end);
    }

    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        for w in br.windows(2) {
            for (t, wt) in gl.mapped(w[0], w[1]) {
                if t <= 0.0 {
                    continue;
                }
                let g = sign / t;
                let v = eval_limit_kernel(k, x, g)? * eval_limit_kernel(k, g, y)?;
                if !v.is_finite() {
                    return Err(HpkError::QuadFailure(format!("non-finite integrand at γ = {g}")));
                }
                total += wt * v / (t * t);
            }
        }
    }

    // F(γ)² and G(γ)² average to 1/(4π) and 1/π as γ → 0
    let tail = |p: f64| -> Result<f64> {
        let (f, g) = (k.f(p)?, k.g(p)?);
        Ok(4.0 * (f * f / PI + g * g / (4.0 * PI)) / (p * p * r_trunc))
    };
    let bound = (tail(x)? * tail(y)?).sqrt();
    Ok(ProjectionReport {
        integral: total,
        target,
        residual: (total - target).abs(),
        truncation_bound: bound,
    })
}

/// |Π^(s) - sgn sgn Π^(s+1) - sgn sgn (s+1/2)/√|xy| J_{s+1/2}(1/|x|) J_{s+1/2}(1/|y|)|.
pub fn check_limit_recurrence(s: f64, x: f64, y: f64) -> Result<f64> {
    let p = HPParam::new(s)?;
    p.require_probability()?;
    let k0 = LimitKernel::new(p)?;
    let k1 = LimitKernel::new(HPParam::new(s + 1.0)?)?;
    let pol = AccuracyPolicy::default();
    let sg = x.signum() * y.signum();
    let rank_one = (s + 0.5) / (x * y).abs().sqrt()
        * bessel_j(s + 0.5, 1.0 / x.abs(), &pol)?
        * bessel_j(s + 0.5, 1.0 / y.abs(), &pol)?;
    let lhs = eval_limit_kernel(&k0, x, y)?;
    let rhs = sg * eval_limit_kernel(&k1, x, y)? + sg * rank_one;
    Ok((lhs - rhs).abs())
}

/// Residual of Π_N^(s)(x,y) = sgn sgn N/(N-1) Π_{N-1}^(s+1)(Nx/(N-1), Ny/(N-1)) + V V/‖V‖².
pub fn check_finite_recurrence(s: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    if n < 2 {
        return Err(HpkError::Domain(format!("N must be at least 2, got {n}")));
    }
    let p = HPParam::new(s)?;
    let k0 = FiniteKernel::new(p, n)?;
    let k1 = FiniteKernel::new(HPParam::new(s + 1.0)?, n - 1)?;
    let v = VFunction::prelimit(p, n)?;
    let r = n as f64 / (n as f64 - 1.0);
    let sg = x.signum() * y.signum();
    let lhs = k0.eval_sign_corrected(x, y)?;
    let rhs = sg * r * k1.eval_sign_corrected(r * x, r * y)? + eval_V(&v, x)? * eval_V(&v, y)? / v.norm_sq()?;
    Ok((lhs - rhs).abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceProfile {
    pub s: f64,
    pub n: Vec<usize>,
    pub gaps: Vec<f64>,
    /// Each gap at most 1.2× the previous one.
    pub non_increasing_within_slack: bool,
    pub strictly_decreasing: bool,
}

pub fn convergence_profile(s: f64, n_list: &[usize], grid: &[f64]) -> Result<ConvergenceProfile> {
    let p = HPParam::new(s)?;
    let lim = LimitKernel::new(p)?;
    let mut target = Vec::with_capacity(grid.len() * grid.len());
    for &x in grid {
        for &y in grid {
            target.push(eval_limit_kernel(&lim, x, y)?);
        }
    }
    let mut gaps = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let k = FiniteKernel::new(p, n)?;
        let mut gap = 0.0f64;
        let mut idx = 0;
        for &x in grid {
            for &y in grid {
                gap = gap.max((k.eval_sign_corrected(x, y)? - target[idx]).abs());
                idx += 1;
            }
        }
        gaps.push(gap);
    }
    let non_inc = gaps.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    let strict = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceProfile {
        s,
        n: n_list.to_vec(),
        gaps,
        non_increasing_within_slack: non_inc,
        strictly_decreasing: strict,
    })
}
