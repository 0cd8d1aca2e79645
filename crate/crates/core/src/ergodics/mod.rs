//! Pickrell parameters, the ergodic characteristic function, cutoff sums and the
//! quantitative moment/tail experiments on the finite ensembles.

mod experiments;
mod moments;

pub use experiments::{
    gamma1_balance_experiment, gamma1_gaps_for_matrix, second_moment_shadow, tail_shadow, ExperimentCell,
    ExperimentReport, Gamma1Params,
};
pub use moments::{
    circle_moment_jn, rho1_second_moment, tail_mass, tail_mass_limit, variance_bound_check, variance_monte_carlo,
    VarianceCheck,
};

use crate::error::{HpkError, Result};
use crate::sampling::Configuration;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Point (α⁺, α⁻, γ₁, δ) of the Pickrell set with finitely many nonzero α.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaPoint {
    pub alpha_plus: Vec<f64>,
    pub alpha_minus: Vec<f64>,
    pub gamma1: f64,
    pub delta: f64,
}

fn check_alpha(a: &[f64], name: &str) -> Result<()> {
    if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(HpkError::Domain(format!(
            "{name} entries must be finite and nonnegative"
        )));
    }
    if a.windows(2).any(|w| w[1] > w[0]) {
        return Err(HpkError::Domain(format!("{name} must be weakly decreasing")));
    }
    Ok(())
}

impl OmegaPoint {
    pub fn new(alpha_plus: Vec<f64>, alpha_minus: Vec<f64>, gamma1: f64, delta: f64) -> Result<OmegaPoint> {
        check_alpha(&alpha_plus, "alpha_plus")?;
        check_alpha(&alpha_minus, "alpha_minus")?;
        if !gamma1.is_finite() || !(delta.is_finite() && delta >= 0.0) {
            return Err(HpkError::Domain("gamma1 must be finite and delta nonnegative".into()));
        }
        let w = OmegaPoint {
            alpha_plus,
            alpha_minus,
            gamma1,
            delta,
        };
        let sq = w.alpha_sq_sum();
        if sq > delta * (1.0 + 1e-14) {
            return Err(HpkError::Domain(format!("Σα² = {sq} exceeds delta = {delta}")));
        }
        Ok(w)
    }

    fn alpha_sq_sum(&self) -> f64 {
        self.alpha_plus.iter().chain(&self.alpha_minus).map(|a| a * a).sum()
    }

    /// γ₂ = δ - Σ(α⁺)² - Σ(α⁻)², clamped at 0 against rounding.
    pub fn gamma2(&self) -> f64 {
        (self.delta - self.alpha_sq_sum()).max(0.0)
    }

    /// x_ℓ: α⁺_ℓ for ℓ > 0 and -α⁻_{-ℓ} for ℓ < 0; zero entries are dropped.
    pub fn x_points(&self) -> Vec<f64> {
        self.alpha_plus
            .iter()
            .copied()
            .chain(self.alpha_minus.iter().map(|a| -a))
            .filter(|x| *x != 0.0)
            .collect()
    }

    /// Normal form with γ₂ = 0 and γ₁ equal to the principal value of the configuration.
    pub fn from_configuration(c: &Configuration) -> OmegaPoint {
        let mut ap: Vec<f64> = c.points().iter().filter(|x| **x > 0.0).copied().collect();
        let mut am: Vec<f64> = c.points().iter().filter(|x| **x < 0.0).map(|x| -x).collect();
        ap.sort_by(|a, b| b.total_cmp(a));
        am.sort_by(|a, b| b.total_cmp(a));
        let delta = ap.iter().chain(&am).map(|a| a * a).sum();
        OmegaPoint {
            gamma1: c.sum(),
            alpha_plus: ap,
            alpha_minus: am,
            delta,
        }
    }
}

/// Π_j e^{iγ₁r_j - γ₂r_j²} Π_ℓ e^{-ix_ℓ r_j}/(1 - i x_ℓ r_j).
pub fn char_function(omega: &OmegaPoint, r: &[f64]) -> Result<Complex64> {
    let g2 = omega.gamma2();
    let xs = omega.x_points();
    let mut out = Complex64::new(1.0, 0.0);
    for &rj in r {
        out *= Complex64::from_polar((-g2 * rj * rj).exp(), omega.gamma1 * rj);
        for &x in &xs {
            let den = Complex64::new(1.0, -x * rj);
            if den.norm() == 0.0 {
                return Err(HpkError::Pole(x * rj));
            }
            out *= Complex64::from_polar(1.0, -x * rj) / den;
        }
    }
    Ok(out)
}

/// φ_n: 0 on |x| ≤ 1/(2n²), 1 on |x| ≥ 1/n², linear in between.
pub fn tent(n: usize, x: f64) -> f64 {
    let n2 = (n * n) as f64;
    let a = x.abs();
    if a >= 1.0 / n2 {
        1.0
    } else if a <= 0.5 / n2 {
        0.0
    } else {
        2.0 * n2 * a - 1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub n_max: usize,
    /// Σ x 1_{|x| > 1/n²} for n = 1..=n_max.
    pub hard: Vec<f64>,
    /// Σ x φ_n(x) for n = 1..=n_max.
    pub tent: Vec<f64>,
    pub hard_diffs: Vec<f64>,
    pub tent_diffs: Vec<f64>,
    /// No point lies in the tent ramp [1/(2n²), 1/n²].
    pub ramp_empty: Vec<bool>,
    /// First n from which both sums equal the full sum.
    pub stabilized_at: Option<usize>,
}

pub fn principal_value_sums(config: &Configuration, n_max: usize) -> BalanceReport {
    let mut hard = Vec::with_capacity(n_max);
    let mut tents = Vec::with_capacity(n_max);
    let mut ramp_empty = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let cut = 1.0 / (n * n) as f64;
        let pts = config.points();
        hard.push(pts.iter().filter(|x| x.abs() > cut).sum());
        tents.push(pts.iter().map(|x| x * tent(n, *x)).sum());
        ramp_empty.push(!pts.iter().any(|x| x.abs() >= 0.5 * cut && x.abs() <= cut));
    }
    let diffs = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>();
    let min_abs = config.points().iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let stabilized_at = (1..=n_max).find(|&n| 1.0 / ((n * n) as f64) < min_abs);
    BalanceReport {
        n_max,
        hard_diffs: diffs(&hard),
        tent_diffs: diffs(&tents),
        hard,
        tent: tents,
        ramp_empty,
        stabilized_at,
    }
}
