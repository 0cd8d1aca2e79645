//! Samplers for the rescaled pseudo-Jacobi ensembles: sequential conditioning for
//! the projection DPP, a Metropolis chain, and the s = 0 Cayley matrix model.

mod dpp;
mod matrix;
mod mcmc;
pub mod stats;

pub use dpp::{sample_projection_dpp, sample_projection_dpp_batch, ProjectionBasis, SpectralSampler};
pub use matrix::{corner_spectrum, corner_summaries, hp_matrix_s0_with_rng, sample_hp_matrix_s0, CornerSummary};
pub use mcmc::{log_pseudo_jacobi, sample_pseudo_jacobi_mcmc, McmcChain};

use crate::error::{HpkError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Finite configuration of nonzero reals, kept sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<f64>,
}

impl Configuration {
    pub fn new(mut points: Vec<f64>) -> Result<Configuration> {
        if let Some(p) = points.iter().find(|p| **p == 0.0 || !p.is_finite()) {
            return Err(HpkError::Domain(format!(
                "configuration point {p} is not a finite nonzero real"
            )));
        }
        points.sort_by(f64::total_cmp);
        Ok(Configuration { points })
    }

    pub fn empty() -> Configuration {
        Configuration { points: Vec::new() }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// S₂ = Σx².
    pub fn s2(&self) -> f64 {
        self.points.iter().map(|x| x * x).sum()
    }

    pub fn max(&self) -> Option<f64> {
        self.points.last().copied()
    }

    pub fn min(&self) -> Option<f64> {
        self.points.first().copied()
    }

    pub fn sum(&self) -> f64 {
        self.points.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    SpectralDpp,
    Mcmc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Uniform cells in the Cayley angle before refinement.
    pub grid_points: usize,
    /// Restricts the spectral grid to |x| ≤ R; `None` covers the whole line through the angle.
    pub truncation: Option<f64>,
    pub method: SamplerMethod,
    pub step_scale: f64,
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            grid_points: 4096,
            truncation: None,
            method: SamplerMethod::SpectralDpp,
            step_scale: 0.5,
            burn_in: 2000,
            thinning: 10,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> SamplerConfig {
        SamplerConfig {
            seed,
            ..SamplerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 8 {
            return Err(HpkError::Domain(format!(
                "grid_points must be at least 8, got {}",
                self.grid_points
            )));
        }
        if let Some(r) = self.truncation {
            if !(r > 0.0 && r.is_finite()) {
                return Err(HpkError::Domain(format!("truncation must be positive, got {r}")));
            }
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(HpkError::Domain(format!(
                "step scale must be positive, got {}",
                self.step_scale
            )));
        }
        if self.burn_in == 0 || self.thinning == 0 {
            return Err(HpkError::Domain("burn_in and thinning must be positive".into()));
        }
        Ok(())
    }

    /// Independent stream `index` of the configured seed.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// JSON sidecar stored next to a sample CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub sampler: String,
    pub s: f64,
    pub n: usize,
    pub count: usize,
    pub config: SamplerConfig,
}

/// One configuration per row, comma separated; an empty configuration is an empty row.
/// Readers skip lines starting with '#'.
pub fn write_samples_csv<W: Write>(out: &mut W, samples: &[Configuration]) -> Result<()> {
    for c in samples {
        let row: Vec<String> = c.points.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_samples_csv<R: BufRead>(input: R) -> Result<Vec<Configuration>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            out.push(Configuration::empty());
            continue;
        }
        let pts = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| HpkError::Format(format!("row {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Configuration::new(pts)?);
    }
    Ok(out)
}

pub fn write_sidecar<W: Write>(out: &mut W, sidecar: &SampleSidecar) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, sidecar)?;
    writeln!(out)?;
    Ok(())
}
