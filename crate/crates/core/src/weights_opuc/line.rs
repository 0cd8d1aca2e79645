use super::HPParam;
use crate::dd::{cholesky, lower_inverse, DD};
use crate::error::{HpkError, Result};
use crate::specfun::{gamma_fn, ln_beta, AccuracyPolicy};
use serde_json::{json, Value};

/// Monic orthogonal polynomials for (1 + x²)^{-s-N} on the line.
#[derive(Clone, Debug)]
pub struct MonicLineBasis {
    pub param: HPParam,
    pub n: usize,
    pub degree_count: usize,
    /// Monic coefficients, low to high degree.
    pub coeffs: Vec<Vec<f64>>,
    /// h_k = ∫ p_k² φ_N dx.
    pub norms_sq: Vec<f64>,
    /// b_k = h_k / h_{k-1} with p_{k+1} = x p_k - b_k p_{k-1}; b_0 = 0.
    pub recurrence: Vec<f64>,
    pub orth_residual: f64,
    coeffs_dd: Vec<Vec<DD>>,
}

/// Even moments ∫x^{2k}(1+x²)^{-a}dx divided by the zeroth one.
fn normalized_even_moments(a: f64, count: usize) -> Vec<DD> {
    let mut out = Vec::with_capacity(count);
    let mut v = DD::ONE;
    let ad = DD::new(a);
    for k in 0..count {
        out.push(v);
        let kf = DD::new(k as f64);
        v = v * (kf + DD::new(0.5)) / (ad - kf - DD::new(1.5));
    }
    out
}

pub fn build_monic_line(param: &HPParam, n: usize, max_degree: usize) -> Result<MonicLineBasis> {
    param.require_probability()?;
    if n == 0 {
        return Err(HpkError::Domain("N must be at least 1".into()));
    }
    if max_degree >= n {
        return Err(HpkError::MomentDivergence { degree: max_degree, n });
    }
    let d = max_degree + 1;
    let a = param.s + n as f64;
    let even = normalized_even_moments(a, d);
    let mom = |k: usize| if k % 2 == 1 { DD::ZERO } else { even[k / 2] };
    let h: Vec<Vec<DD>> = (0..d).map(|i| (0..d).map(|j| mom(i + j)).collect()).collect();
    let l = cholesky(&h).ok_or_else(|| HpkError::IllConditioned {
        what: format!("Hankel Cholesky breakdown at N = {n}"),
        residual: f64::INFINITY,
    })?;
    let li = lower_inverse(&l);
    let coeffs_dd: Vec<Vec<DD>> = (0..d)
        .map(|k| li[k][..=k].iter().map(|v| *v * l[k][k]).collect())
        .collect();
    let m0 = if a < 160.0 {
        let p = AccuracyPolicy::default();
        gamma_fn(0.5, &p)? * gamma_fn(a - 0.5, &p)? / gamma_fn(a, &p)?
    } else {
        ln_beta(0.5, a - 0.5)?.exp()
    };
    let hn: Vec<DD> = (0..d).map(|k| l[k][k] * l[k][k]).collect();

    let mut resid = 0.0f64;
    for i in 0..d {
        for j in 0..=i {
            let mut acc = DD::ZERO;
            for (p, ci) in coeffs_dd[i].iter().enumerate() {
                for (q, cj) in coeffs_dd[j].iter().enumerate() {
                    if (p + q) % 2 == 0 {
                        acc += *ci * *cj * mom(p + q);
                    }
                }
            }
            let target = if i == j { hn[i] } else { DD::ZERO };
            let r = ((acc - target) / (hn[i] * hn[j]).sqrt()).abs().to_f64();
            resid = resid.max(r);
        }
    }
    if resid > 1e-8 || coeffs_dd.iter().any(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(HpkError::IllConditioned {
            what: format!("monic line basis for s = {}, N = {n}", param.s),
            residual: resid,
        });
    }
    let mut recurrence = vec![0.0; d];
    for k in 1..d {
        recurrence[k] = (hn[k] / hn[k - 1]).to_f64();
    }
    Ok(MonicLineBasis {
        param: *param,
        n,
        degree_count: d,
        coeffs: coeffs_dd
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64()).collect())
            .collect(),
        norms_sq: hn.iter().map(|v| v.to_f64() * m0).collect(),
        recurrence,
        orth_residual: resid,
        coeffs_dd,
    })
}

impl MonicLineBasis {
    /// Monic p_k(x) by the three-term recurrence.
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        let mut p0 = 0.0;
        let mut p1 = 1.0;
        for j in 0..k {
            let p2 = x * p1 - self.recurrence[j] * p0;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    /// p_k(x) from the coefficient table.
    pub fn eval_coeffs(&self, k: usize, x: f64) -> f64 {
        self.coeffs[k].iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// ψ_k(x) = p_k(x)·√φ_N(x)/√h_k for k < degree_count, evaluated without overflow.
    pub fn orthonormal_weighted(&self, x: f64) -> Vec<f64> {
        let d = self.degree_count;
        let r2 = 1.0 + x * x;
        let r = r2.sqrt();
        let xr = x / r;
        let mut q = Vec::with_capacity(d);
        let q0 = 1.0 / self.norms_sq[0].sqrt();
        q.push(q0);
        if d > 1 {
            q.push(xr * q0 / self.recurrence[1].sqrt());
        }
        for k in 1..d.saturating_sub(1) {
            let v = (xr * q[k] - self.recurrence[k].sqrt() * q[k - 1] / r2) / self.recurrence[k + 1].sqrt();
            q.push(v);
        }
        let base = -(self.param.s + self.n as f64);
        q.iter()
            .enumerate()
            .map(|(k, qk)| qk * r.powf(k as f64 + base))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Vec<String>> = self
            .coeffs_dd
            .iter()
            .map(|row| row.iter().map(|v| v.to_sci_string(25)).collect())
            .collect();
        json!({
            "s": self.param.s,
            "N": self.n,
            "degree_count": self.degree_count,
            "coefficients": coeffs,
            "norms_sq": self.norms_sq,
            "orth_residual": self.orth_residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degrees() {
        let p = HPParam::new(0.0).unwrap();
        let b = build_monic_line(&p, 3, 2).unwrap();
        assert_eq!(b.coeffs[0], vec![1.0]);
        assert_eq!(b.coeffs[1], vec![0.0, 1.0]);
        // s=0, N=1: h_0 = π
        let b1 = build_monic_line(&p, 1, 0).unwrap();
        assert!((b1.norms_sq[0] - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn rejects_divergent_degree() {
        let p = HPParam::new(0.5).unwrap();
        assert!(matches!(
            build_monic_line(&p, 4, 4),
            Err(HpkError::MomentDivergence { .. })
        ));
    }

    #[test]
    fn recurrence_matches_coefficients() {
        let p = HPParam::new(0.25).unwrap();
        let b = build_monic_line(&p, 8, 7).unwrap();
        for k in 0..8 {
            for x in [-1.3, 0.2, 0.9] {
                let (u, v) = (b.eval(k, x), b.eval_coeffs(k, x));
                assert!((u - v).abs() < 1e-12 * (1.0 + u.abs()));
            }
        }
    }

    #[test]
    fn weighted_eval_matches_direct() {
        let p = HPParam::new(0.5).unwrap();
        let b = build_monic_line(&p, 6, 5).unwrap();
        let x = 1.7;
        let psi = b.orthonormal_weighted(x);
        let w = (1.0 + x * x).powf(-(0.5 + 6.0) / 2.0);
        for k in 0..6 {
            let direct = b.eval(k, x) * w / b.norms_sq[k].sqrt();
            assert!((psi[k] - direct).abs() < 1e-13 * (1.0 + direct.abs()));
        }
    }
}
