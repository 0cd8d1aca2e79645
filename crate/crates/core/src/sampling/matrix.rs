use super::SamplerConfig;
use crate::error::{HpkError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const MAX_RESAMPLES: usize = 16;
/// Entries of (1 - U)^{-1}(1 + U) beyond this are treated as a singular Cayley transform.
const SINGULAR_ENTRY: f64 = 1e12;

/// Spectral summary of one N×N corner, eigenvalues divided by N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerSummary {
    pub n: usize,
    pub a_plus: Vec<f64>,
    pub a_minus: Vec<f64>,
    /// tr(X_N)/N.
    pub c: f64,
    /// tr(X_N²)/N².
    pub d: f64,
}

fn haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..m {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// X = i(1 + U)(1 - U)^{-1} for Haar U, symmetrized to be exactly Hermitian;
/// resamples U when 1 - U is numerically singular.
pub fn hp_matrix_s0_with_rng<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    if m == 0 {
        return Err(HpkError::Domain("matrix size must be at least 1".into()));
    }
    let id = DMatrix::<Complex64>::identity(m, m);
    for _ in 0..MAX_RESAMPLES {
        let u = haar_unitary(m, rng);
        let a = &id - &u;
        let b = &id + &u;
        // (1+U) and (1-U) commute, so right division equals left division
        let y = match a.lu().solve(&b) {
            Some(y) => y,
            None => continue,
        };
        if y.iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > SINGULAR_ENTRY)
        {
            continue;
        }
        let x = y * Complex64::i();
        let xh = x.adjoint();
        return Ok((x + xh) * Complex64::new(0.5, 0.0));
    }
    Err(HpkError::SingularCayley)
}

/// One matrix from stream 0 of the configured seed.
pub fn sample_hp_matrix_s0(m: usize, cfg: &SamplerConfig) -> Result<DMatrix<Complex64>> {
    hp_matrix_s0_with_rng(m, &mut cfg.rng(0))
}

/// Eigenvalues of the upper-left N×N corner, ascending, not rescaled.
pub fn corner_spectrum(x: &DMatrix<Complex64>, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > x.nrows() || n > x.ncols() {
        return Err(HpkError::Domain(format!(
            "corner size {n} outside 1..={}",
            x.nrows().min(x.ncols())
        )));
    }
    let corner = x.view((0, 0), (n, n)).into_owned();
    let eig = SymmetricEigen::try_new(corner, 1e-15, 10_000)
        .ok_or_else(|| HpkError::EigenFailure(format!("no convergence for corner {n}")))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(HpkError::EigenFailure(format!("non-finite eigenvalue in corner {n}")));
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn corner_summaries(x: &DMatrix<Complex64>, n_list: &[usize]) -> Result<Vec<CornerSummary>> {
    n_list
        .iter()
        .map(|&n| {
            let ev = corner_spectrum(x, n)?;
            let nf = n as f64;
            let mut a_plus: Vec<f64> = ev.iter().filter(|v| **v > 0.0).map(|v| v / nf).collect();
            let mut a_minus: Vec<f64> = ev.iter().filter(|v| **v < 0.0).map(|v| -v / nf).collect();
            a_plus.sort_by(|a, b| b.total_cmp(a));
            a_minus.sort_by(|a, b| b.total_cmp(a));
            let corner = x.view((0, 0), (n, n));
            let tr: f64 = (0..n).map(|i| corner[(i, i)].re).sum();
            let fro: f64 = corner.iter().map(|z| z.norm_sqr()).sum();
            Ok(CornerSummary {
                n,
                a_plus,
                a_minus,
                c: tr / nf,
                d: fro / (nf * nf),
            })
        })
        .collect()
}
