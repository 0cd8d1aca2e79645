use crate::report::create_parent;
use crate::runspec::{RunSpec, SpecError, SpecResult};
use anyhow::{Context, Result};
use hpk_core::kernels::FiniteKernel;
use hpk_core::sampling::{
    sample_projection_dpp_batch, sample_pseudo_jacobi_mcmc, write_samples_csv, Configuration, SampleSidecar,
    SamplerConfig, SamplerMethod,
};
use hpk_core::weights_opuc::HPParam;
use serde_json::{json, Value};
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct Plan {
    pub sidecar: SampleSidecar,
    pub csv: PathBuf,
}

pub fn plan(spec: &RunSpec) -> SpecResult<Plan> {
    let method = match spec.str_or("method", "spectral") {
        "spectral" => SamplerMethod::SpectralDpp,
        "mcmc" => SamplerMethod::Mcmc,
        other => return Err(SpecError(format!("unknown method '{other}'"))),
    };
    let s = spec.f64_or("s", 0.0)?;
    if s <= -0.5 {
        return Err(SpecError(format!("sampling needs s > -1/2, got {s}")));
    }
    let n = spec.positive_usize_or("N", 4)?;
    if n > 120 && s != 0.0 && method == SamplerMethod::SpectralDpp {
        return Err(SpecError(format!("N = {n} exceeds the supported 120")));
    }
    let count = spec.usize_or("draws", 100)?;
    let config = SamplerConfig {
        seed: spec.u64_or("seed", 0)?,
        method,
        truncation: spec.f64_opt("R")?,
        ..SamplerConfig::default()
    };
    config.validate().map_err(|e| SpecError(e.to_string()))?;
    let sampler = match method {
        SamplerMethod::SpectralDpp => "spectral_dpp",
        SamplerMethod::Mcmc => "mcmc",
    };
    Ok(Plan {
        sidecar: SampleSidecar {
            sampler: sampler.into(),
            s,
            n,
            count,
            config,
        },
        csv: spec.out_path("samples.csv"),
    })
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Draws the archive described by a sidecar; returns the MCMC acceptance rate when relevant.
pub fn draw(sc: &SampleSidecar) -> Result<(Vec<Configuration>, Option<f64>)> {
    let param = HPParam::new(sc.s)?;
    match sc.config.method {
        SamplerMethod::SpectralDpp => {
            let k = FiniteKernel::new(param, sc.n)?;
            Ok((sample_projection_dpp_batch(&k, &sc.config, sc.count)?, None))
        }
        SamplerMethod::Mcmc => {
            let mut chain = sample_pseudo_jacobi_mcmc(param, sc.n, &sc.config)?;
            let draws = (0..sc.count)
                .map(|_| chain.next_state())
                .collect::<hpk_core::Result<Vec<_>>>()?;
            Ok((draws, Some(chain.acceptance_rate())))
        }
    }
}

fn write_archive(csv: &Path, provenance: &Value, draws: &[Configuration]) -> Result<()> {
    create_parent(csv)?;
    let mut f = fs::File::create(csv).with_context(|| format!("creating {}", csv.display()))?;
    writeln!(f, "# runspec: {provenance}")?;
    write_samples_csv(&mut f, draws)?;
    Ok(())
}

/// Writes the archive and its sidecar; returns a summary for stdout.
pub fn run(p: &Plan, spec: &RunSpec) -> Result<Value> {
    let (draws, acceptance) = draw(&p.sidecar)?;
    let prov = spec.provenance();
    write_archive(&p.csv, &prov, &draws)?;
    let mut side = serde_json::to_value(&p.sidecar)?;
    side["runspec"] = prov;
    if let Some(a) = acceptance {
        side["acceptance_rate"] = json!(a);
    }
    let sp = sidecar_path(&p.csv);
    let mut f = fs::File::create(&sp).with_context(|| format!("creating {}", sp.display()))?;
    serde_json::to_writer_pretty(&mut f, &side)?;
    writeln!(f)?;
    Ok(json!({
        "archive": p.csv,
        "sidecar": sp,
        "draws": draws.len(),
        "acceptance_rate": acceptance,
    }))
}

/// Re-draws the archive recorded by a sidecar into `out`.
pub fn replay(sidecar: &Path, out: &Path) -> Result<()> {
    let f = fs::File::open(sidecar).with_context(|| format!("opening {}", sidecar.display()))?;
    let side: Value = serde_json::from_reader(BufReader::new(f))?;
    let sc: SampleSidecar = serde_json::from_value(side.clone())?;
    let prov = side.get("runspec").cloned().unwrap_or(Value::Null);
    let (draws, _) = draw(&sc)?;
    write_archive(out, &prov, &draws)
}
