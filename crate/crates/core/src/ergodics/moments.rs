use crate::error::{HpkError, Result};
use crate::kernels::{FiniteKernel, LimitKernel};
use crate::quad::{graded_toward_left, uniform, GaussLegendre};
use crate::sampling::Configuration;
use crate::weights_opuc::{build_opuc, cd_sum_circle, CircleWeight, HPParam};
use serde::Serialize;
use std::f64::consts::PI;

fn check_positive(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HpkError::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Panels resolving the 1/N oscillation scale of the rescaled kernel on an interval of length `len`.
fn panel_count(n: usize, len: f64) -> usize {
    (2.0 * n as f64 * len).ceil() as usize + 2
}

/// ∫_{-ε}^{ε} x² K_N(x, x) dx.
pub fn rho1_second_moment(param: HPParam, n: usize, eps: f64) -> Result<f64> {
    check_positive(eps, "epsilon")?;
    let k = FiniteKernel::new(param, n)?;
    let gl = GaussLegendre::new(24);
    let br = uniform(0.0, eps, panel_count(n, eps));
    Ok(2.0 * gl.integrate_panels(|x| x * x * k.density(x), &br))
}

/// (1/N²) ∫_{|θ| ≤ 2 arctan(Nε)} tan²(θ/2) ρ₁^T(θ) dθ/2π, with ρ₁^T the diagonal
/// of the circle Christoffel–Darboux kernel for λ.
pub fn circle_moment_jn(param: HPParam, n: usize, eps: f64) -> Result<f64> {
    check_positive(eps, "epsilon")?;
    param.require_probability()?;
    let basis = build_opuc(&CircleWeight::lambda(param), n)?;
    let nf = n as f64;
    let tmax = 2.0 * (nf * eps).atan();
    let gl = GaussLegendre::new(24);
    let br = uniform(0.0, tmax, panel_count(n, tmax / PI));
    let mut err = None;
    let v = gl.integrate_panels(
        |t| {
            let tn = (0.5 * t).tan();
            match cd_sum_circle(&basis, n, t, t) {
                Ok(r) => tn * tn * r.re,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        },
        &br,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(2.0 * v / (nf * nf) / (2.0 * PI))
}

/// ∫_{|x| ≥ R} f, computed as 2∫_0^1 f(R/u) R/u² du with panels graded toward u = 0.
fn even_tail(mut f: impl FnMut(f64) -> Result<f64>, r: f64) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let br = graded_toward_left(0.0, 1.0, 0.5, 60);
    let mut total = 0.0;
    for w in br.windows(2) {
        for (u, wt) in gl.mapped(w[0], w[1]) {
            let x = r / u;
            total += wt * f(x)? * r / (u * u);
        }
    }
    Ok(2.0 * total)
}

/// ∫_{|x| ≥ R} K_N(x, x) dx.
pub fn tail_mass(param: HPParam, n: usize, r: f64) -> Result<f64> {
    check_positive(r, "R")?;
    let k = FiniteKernel::new(param, n)?;
    even_tail(|x| Ok(k.density(x)), r)
}

/// ∫_{|x| ≥ R} Π∞(x, x) dx.
pub fn tail_mass_limit(param: HPParam, r: f64) -> Result<f64> {
    check_positive(r, "R")?;
    let k = LimitKernel::new(param)?;
    even_tail(|x| k.diagonal(x), r)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VarianceCheck {
    /// ∫ x² 1_{|x|≤ε} K_N(x, x) dx.
    pub diag_term: f64,
    /// ∫ x 1_{|x|≤ε} K_N(x, x) dx; T₂ is its square.
    pub first_moment: f64,
    /// ∫∫ x y 1 1 det[[K(x,x), K(x,y)], [K(y,x), K(y,y)]].
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// T = diag_term + t1 = E(Σ x 1_{|x|≤ε})².
    pub t: f64,
    pub bound: f64,
    pub holds: bool,
}

/// T for the window |x| ≤ ε by double quadrature, against the bound 2∫x²1K.
pub fn variance_bound_check(param: HPParam, n: usize, eps: f64) -> Result<VarianceCheck> {
    check_positive(eps, "epsilon")?;
    let k = FiniteKernel::new(param, n)?;
    let gl = GaussLegendre::new(16);
    // the two half-windows use different panel counts so evenness is not built into the rule
    let p = panel_count(n, eps);
    let mut br = uniform(-eps, 0.0, p);
    br.pop();
    br.extend(uniform(0.0, eps, p + 1));
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for w in br.windows(2) {
        for (x, wt) in gl.mapped(w[0], w[1]) {
            xs.push(x);
            ws.push(wt);
        }
    }
    let psi: Vec<_> = xs.iter().map(|&x| k.eigenfunctions(x)).collect();
    let m = xs.len();
    let mut kk = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v: f64 = psi[i].iter().zip(&psi[j]).map(|(a, b)| (a * b.conj()).re).sum();
            kk[i * m + j] = v;
            kk[j * m + i] = v;
        }
    }
    let diag: Vec<f64> = (0..m).map(|i| kk[i * m + i]).collect();
    let diag_term: f64 = (0..m).map(|i| ws[i] * xs[i] * xs[i] * diag[i]).sum();
    let first_moment: f64 = (0..m).map(|i| ws[i] * xs[i] * diag[i]).sum();
    let (mut t1, mut t3) = (0.0, 0.0);
    for i in 0..m {
        let wi = ws[i] * xs[i];
        let (mut a1, mut a3) = (0.0, 0.0);
        for j in 0..m {
            let wj = ws[j] * xs[j];
            let kij = kk[i * m + j];
            a1 += wj * (diag[i] * diag[j] - kij * kk[j * m + i]);
            a3 += wj * kij * kij;
        }
        t1 += wi * a1;
        t3 += wi * a3;
    }
    let t = diag_term + t1;
    let bound = 2.0 * diag_term;
    Ok(VarianceCheck {
        diag_term,
        first_moment,
        t1,
        t2: first_moment * first_moment,
        t3,
        t,
        bound,
        holds: t <= bound && t >= -1e-12,
    })
}

/// Mean of (Σ x 1_{|x|≤ε})² over configurations and its standard error.
pub fn variance_monte_carlo(configs: &[Configuration], eps: f64) -> (f64, f64) {
    let v: Vec<f64> = configs
        .iter()
        .map(|c| {
            let s: f64 = c.points().iter().filter(|x| x.abs() <= eps).sum();
            s * s
        })
        .collect();
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}
