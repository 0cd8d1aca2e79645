use super::{Configuration, SamplerConfig};
use crate::error::{HpkError, Result};
use crate::weights_opuc::HPParam;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

const TARGET_ACCEPTANCE: f64 = 0.3;
const ADAPT_WINDOW: usize = 20;

/// Unnormalized log-density Σ_{j<k} 2 log|x_j - x_k| - (s + N) Σ log(1 + x_j²)
/// of the unscaled ensemble.
pub fn log_pseudo_jacobi(s: f64, x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mut v = 0.0;
    for (j, a) in x.iter().enumerate() {
        for b in &x[j + 1..] {
            v += 2.0 * (a - b).abs().ln();
        }
        v -= (s + n) * a.mul_add(*a, 1.0).ln();
    }
    v
}

fn wrap(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Random-walk Metropolis chain on ℝᴺ, run in the Cayley angles θ_j = 2 arctan x_j
/// with single-site updates; the target carries the Jacobian Π dx_j/dθ_j.
/// Emits states rescaled by 1/N.
#[derive(Clone, Debug)]
pub struct McmcChain {
    pub param: HPParam,
    pub n: usize,
    theta: Vec<f64>,
    step: f64,
    thinning: usize,
    rng: ChaCha8Rng,
    accepted: u64,
    proposed: u64,
}

impl McmcChain {
    pub fn new(param: HPParam, n: usize, cfg: &SamplerConfig) -> Result<McmcChain> {
        param.require_probability()?;
        cfg.validate()?;
        if n == 0 {
            return Err(HpkError::Domain("N must be at least 1".into()));
        }
        let h = 2.0 * PI / n as f64;
        Ok(McmcChain {
            param,
            n,
            theta: (0..n).map(|j| -PI + (j as f64 + 0.37) * h).collect(),
            step: cfg.step_scale,
            thinning: cfg.thinning,
            rng: cfg.rng(0),
            accepted: 0,
            proposed: 0,
        })
    }

    /// Log-target change when θ_j moves to `t`: line log-density plus log dx/dθ,
    /// written through sin/cos of half-angles to stay finite near the point at infinity.
    pub(crate) fn delta(&self, j: usize, t: f64) -> f64 {
        let old = self.theta[j];
        let mut d = 0.0;
        for (k, &tk) in self.theta.iter().enumerate() {
            if k != j {
                d += 2.0 * ((0.5 * (t - tk)).sin().abs().ln() - (0.5 * (old - tk)).sin().abs().ln());
            }
        }
        // |x_j - x_k| carries 1/|cos(θ_j/2)| for each k ≠ j, (1 + x²) = cos(θ/2)^{-2},
        // dx/dθ = cos(θ/2)^{-2}/2
        let n = self.n as f64;
        let lc = |a: f64| (0.5 * a).cos().abs().ln();
        let coef = -2.0 * (n - 1.0) + 2.0 * (self.param.s + n) - 2.0;
        d + coef * (lc(t) - lc(old))
    }

    fn sweep(&mut self) {
        for j in 0..self.n {
            let z: f64 = self.rng.sample(StandardNormal);
            let t = wrap(self.theta[j] + self.step * z);
            self.proposed += 1;
            let d = self.delta(j, t);
            if d >= 0.0 || self.rng.random::<f64>().ln() < d {
                self.theta[j] = t;
                self.accepted += 1;
            }
        }
    }

    /// Burn-in with step adaptation toward 0.3 acceptance; the step is frozen afterwards.
    pub fn burn_in(&mut self, sweeps: usize) {
        let mut done = 0;
        while done < sweeps {
            let (a0, p0) = (self.accepted, self.proposed);
            let m = ADAPT_WINDOW.min(sweeps - done);
            for _ in 0..m {
                self.sweep();
            }
            done += m;
            let rate = (self.accepted - a0) as f64 / (self.proposed - p0) as f64;
            self.step = (self.step * (rate - TARGET_ACCEPTANCE).exp()).clamp(1e-6, 2.0 * PI);
        }
        self.accepted = 0;
        self.proposed = 0;
    }

    pub fn step_scale(&self) -> f64 {
        self.step
    }

    /// Acceptance since the end of burn-in.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn acceptance_in_range(&self) -> bool {
        let r = self.acceptance_rate();
        (0.1..=0.6).contains(&r)
    }

    pub fn state(&self) -> Result<Configuration> {
        let n = self.n as f64;
        Configuration::new(self.theta.iter().map(|t| (0.5 * t).tan() / n).collect())
    }

    /// Advances by `thinning` sweeps and returns the rescaled state.
    pub fn next_state(&mut self) -> Result<Configuration> {
        for _ in 0..self.thinning {
            self.sweep();
        }
        self.state()
    }
}

impl Iterator for McmcChain {
    type Item = Result<Configuration>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_state())
    }
}

/// Chain after burn-in, ready to stream thinned states.
pub fn sample_pseudo_jacobi_mcmc(param: HPParam, n: usize, cfg: &SamplerConfig) -> Result<McmcChain> {
    let mut chain = McmcChain::new(param, n, cfg)?;
    chain.burn_in(cfg.burn_in);
    // probe the frozen step to report the post-adaptation acceptance
    for _ in 0..ADAPT_WINDOW {
        chain.sweep();
    }
    if !chain.acceptance_in_range() {
        log::warn!(
            "{}",
            HpkError::NonConvergence(format!(
                "acceptance {:.3} outside [0.1, 0.6] after adaptation (step {:.3e})",
                chain.acceptance_rate(),
                chain.step
            ))
        );
    }
    Ok(chain)
}
