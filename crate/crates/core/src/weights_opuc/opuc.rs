use super::{eval_circle_weight, CircleWeight, HPParam};
use crate::dd::{cholesky, lower_inverse, DD};
use crate::error::{HpkError, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

pub const DEGREE_CAP: usize = 120;

/// Orthonormal polynomials p_0..p_{n-1} for the probability-normalized circle weight.
#[derive(Clone, Debug)]
pub struct OPUCBasis {
    pub weight: CircleWeight,
    pub degree_count: usize,
    /// p_k coefficients, low to high degree.
    pub coeffs: Vec<Vec<Complex64>>,
    pub leading: Vec<f64>,
    pub gram_residual: f64,
    coeffs_dd: Vec<Vec<DD>>,
    /// Verblunsky coefficients α_0..α_{n-2} read off the built polynomials.
    verblunsky: Vec<f64>,
    norm_const: f64,
}

fn moments_dd(w: &CircleWeight, count: usize) -> Vec<DD> {
    let s = DD::new(w.param.s);
    let mut out = Vec::with_capacity(count);
    let mut v = DD::ONE;
    for k in 0..count {
        let kf = DD::new(k as f64);
        let signed = if w.kind == super::WeightKind::W && k % 2 == 1 {
            -v
        } else {
            v
        };
        out.push(signed);
        v = v * (s - kf) / (s + kf + DD::ONE);
    }
    out
}

pub fn build_opuc(w: &CircleWeight, n: usize) -> Result<OPUCBasis> {
    w.param.require_probability()?;
    if n == 0 {
        return Err(HpkError::Domain("degree count must be positive".into()));
    }
    if n > DEGREE_CAP {
        return Err(HpkError::Degree {
            requested: n,
            available: DEGREE_CAP,
        });
    }
    let c = moments_dd(w, n);
    let t: Vec<Vec<DD>> = (0..n).map(|i| (0..n).map(|j| c[i.abs_diff(j)]).collect()).collect();
    let l = cholesky(&t).ok_or_else(|| HpkError::IllConditioned {
        what: "Toeplitz Cholesky breakdown".into(),
        residual: f64::INFINITY,
    })?;
    let li = lower_inverse(&l);
    let coeffs_dd: Vec<Vec<DD>> = (0..n).map(|k| li[k][..=k].to_vec()).collect();
    let coeffs: Vec<Vec<Complex64>> = coeffs_dd
        .iter()
        .map(|row| row.iter().map(|v| Complex64::new(v.to_f64(), 0.0)).collect())
        .collect();
    let leading: Vec<f64> = coeffs_dd.iter().map(|row| row[row.len() - 1].to_f64()).collect();
    let verblunsky: Vec<f64> = (1..n).map(|k| -(coeffs_dd[k][0] / coeffs_dd[k][k]).to_f64()).collect();

    let tf: Vec<f64> = c.iter().map(|v| v.to_f64()).collect();
    let mut resid = 0.0f64;
    for i in 0..n {
        let tci: Vec<f64> = (0..n)
            .map(|b| {
                coeffs[i]
                    .iter()
                    .enumerate()
                    .map(|(a, ca)| ca.re * tf[a.abs_diff(b)])
                    .sum()
            })
            .collect();
        for j in 0..=i {
            let g: f64 = coeffs[j].iter().enumerate().map(|(b, cb)| tci[b] * cb.re).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            resid = resid.max((g - target).abs());
        }
    }
    if resid > 1e-8 {
        return Err(HpkError::IllConditioned {
            what: format!("OPUC Gram residual for n = {n}"),
            residual: resid,
        });
    }
    Ok(OPUCBasis {
        weight: *w,
        degree_count: n,
        coeffs,
        leading,
        gram_residual: resid,
        coeffs_dd,
        verblunsky,
        norm_const: w.normalization()?,
    })
}

impl OPUCBasis {
    pub fn param(&self) -> HPParam {
        self.weight.param
    }

    pub fn normalization(&self) -> f64 {
        self.norm_const
    }

    pub fn verblunsky(&self) -> &[f64] {
        &self.verblunsky
    }

    /// p_k(z) by Horner on the coefficient table.
    pub fn eval(&self, k: usize, z: Complex64) -> Complex64 {
        self.coeffs[k]
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// p_0..p_{count-1} at e^{iθ} via the Szegő recursion.
    pub fn eval_all(&self, count: usize, theta: f64) -> Vec<Complex64> {
        let z = Complex64::from_polar(1.0, theta);
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        let mut p = Complex64::new(self.leading[0], 0.0);
        let mut ps = p;
        out.push(p);
        for k in 0..count - 1 {
            let a = self.verblunsky[k];
            let rho = (1.0 - a * a).sqrt();
            let np = (z * p - a * ps) / rho;
            let nps = (ps - a * z * p) / rho;
            p = np;
            ps = nps;
            out.push(p);
        }
        out
    }

    /// Probability-normalized weight at θ.
    pub fn weight_at(&self, theta: f64) -> Result<f64> {
        Ok(eval_circle_weight(&self.weight, theta)? / self.norm_const)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Vec<String>> = self
            .coeffs_dd
            .iter()
            .map(|row| row.iter().map(|v| v.to_sci_string(25)).collect())
            .collect();
        let leading: Vec<String> = self
            .coeffs_dd
            .iter()
            .map(|row| row[row.len() - 1].to_sci_string(25))
            .collect();
        json!({
            "kind": self.weight.kind,
            "s": self.weight.param.s,
            "degree_count": self.degree_count,
            "normalization": self.norm_const,
            "leading": leading,
            "coefficients": coeffs,
            "gram_residual": self.gram_residual,
        })
    }
}

/// √(λ(α)λ(β)) Σ_{k<N} p_k(e^{iα}) conj p_k(e^{iβ}) against dθ/2π.
pub fn cd_sum_circle(basis: &OPUCBasis, n: usize, alpha: f64, beta: f64) -> Result<Complex64> {
    if n > basis.degree_count {
        return Err(HpkError::Degree {
            requested: n,
            available: basis.degree_count,
        });
    }
    let wa = basis.weight_at(alpha)?;
    let wb = basis.weight_at(beta)?;
    let pa = basis.eval_all(n, alpha);
    let pb = if alpha == beta {
        pa.clone()
    } else {
        basis.eval_all(n, beta)
    };
    let s: Complex64 = pa.iter().zip(&pb).map(|(a, b)| a * b.conj()).sum();
    Ok(s * (wa * wb).sqrt())
}

/// Residual of the Christoffel–Darboux identity at (e^{iθ}, e^{iτ}).
pub fn cd_identity_residual(basis: &OPUCBasis, n: usize, theta: f64, tau: f64) -> Result<f64> {
    if n + 1 > basis.degree_count {
        return Err(HpkError::Degree {
            requested: n + 1,
            available: basis.degree_count,
        });
    }
    let z = Complex64::from_polar(1.0, theta);
    let w = Complex64::from_polar(1.0, tau);
    let denom = Complex64::new(1.0, 0.0) - z * w.conj();
    if denom.norm() < 1e-12 {
        return Err(HpkError::Domain("coincident angles".into()));
    }
    let pz = basis.eval_all(n + 1, theta);
    let pw = basis.eval_all(n + 1, tau);
    let lhs: Complex64 = (0..n).map(|k| pz[k] * pw[k].conj()).sum();
    let nf = n as f64;
    let star = |p: Complex64, t: f64| Complex64::from_polar(1.0, nf * t) * p.conj();
    let rhs = (star(pz[n], theta) * star(pw[n], tau).conj() - pz[n] * pw[n].conj()) / denom;
    Ok((lhs - rhs).norm())
}

/// Lower bound on max |P(e^{iθ})|²/‖P‖² over deg P < N, from the reproducing-kernel
/// trial and `trial_count` random trials; norms come from the moment matrix.
pub fn szego_extremal(w: &CircleWeight, n: usize, theta: f64, trial_count: usize) -> Result<f64> {
    let basis = build_opuc(w, n)?;
    let c: Vec<f64> = moments_dd(w, n).iter().map(|v| v.to_f64()).collect();
    let z = Complex64::from_polar(1.0, theta);
    let pows: Vec<Complex64> = (0..n as i32).map(|j| z.powi(j)).collect();
    let ratio = |b: &[Complex64]| -> f64 {
        let val: Complex64 = b.iter().zip(&pows).map(|(bj, zj)| bj * zj).sum();
        let mut norm = Complex64::new(0.0, 0.0);
        for (i, bi) in b.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                norm += bi.conj() * bj * c[i.abs_diff(j)];
            }
        }
        val.norm_sqr() / norm.re
    };
    let pz = basis.eval_all(n, theta);
    let mut rk = vec![Complex64::new(0.0, 0.0); n];
    for (k, p) in pz.iter().enumerate() {
        for (j, ckj) in basis.coeffs[k].iter().enumerate() {
            rk[j] += p.conj() * ckj;
        }
    }
    let attained = ratio(&rk);
    let diag: f64 = pz.iter().map(|p| p.norm_sqr()).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e60 ^ n as u64);
    let mut best = attained;
    for _ in 0..trial_count {
        let b: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        best = best.max(ratio(&b));
    }
    if best > diag * (1.0 + 1e-8) {
        return Err(HpkError::IllConditioned {
            what: "trial polynomial exceeded the Christoffel diagonal".into(),
            residual: best / diag - 1.0,
        });
    }
    Ok(best)
}
