use crate::runspec::{RunSpec, SpecError, SpecResult};
use anyhow::{anyhow, Result};
use hpk_core::ergodics::{
    gamma1_balance_experiment, second_moment_shadow, tail_shadow, variance_bound_check, ExperimentCell,
    ExperimentReport, Gamma1Params,
};
use hpk_core::infmeasures::{choose_proxy_size, contraction_norm, GridSpec};
use hpk_core::weights_opuc::HPParam;
use serde_json::json;

#[derive(Clone, Debug)]
pub enum Plan {
    Gamma2 {
        s: Vec<f64>,
        n: Vec<usize>,
        eps: Vec<f64>,
        jobs: usize,
    },
    Tails {
        s: Vec<f64>,
        n: Vec<usize>,
        r: Vec<f64>,
        jobs: usize,
    },
    Variance {
        s: f64,
        n: usize,
        eps: Vec<f64>,
    },
    Gamma1(Gamma1Params),
    Contraction {
        sprime: f64,
        sigma: f64,
        proxy: Option<usize>,
    },
}

impl Plan {
    /// Whether failing cells make the command fail.
    pub fn asserted(&self) -> bool {
        !matches!(self, Plan::Gamma1(_))
    }
}

fn s_list(spec: &RunSpec, default: &[f64]) -> SpecResult<Vec<f64>> {
    let s = match spec.f64_opt("s")? {
        Some(s) => vec![s],
        None => default.to_vec(),
    };
    if let Some(bad) = s.iter().find(|s| **s <= -0.5) {
        return Err(SpecError(format!("experiment needs s > -1/2, got {bad}")));
    }
    Ok(s)
}

fn n_list(spec: &RunSpec, default: &[usize]) -> SpecResult<Vec<usize>> {
    match spec.usize_opt("N")? {
        Some(n) if n <= 10 => Err(SpecError(format!("--N must exceed the fit size 10, got {n}"))),
        Some(n) if n > 120 => Err(SpecError(format!("N = {n} exceeds the supported 120"))),
        Some(n) => Ok(vec![n]),
        None => Ok(default.to_vec()),
    }
}

pub fn plan(name: &str, spec: &RunSpec) -> SpecResult<Plan> {
    let jobs = spec.jobs()?;
    Ok(match name {
        "gamma2" => Plan::Gamma2 {
            s: s_list(spec, &[-0.3, 0.0, 0.5, 1.0])?,
            n: n_list(spec, &[20, 50, 100])?,
            eps: match spec.f64_opt("eps")? {
                Some(e) if e > 0.0 => vec![e],
                Some(e) => return Err(SpecError(format!("--eps must be positive, got {e}"))),
                None => vec![0.025, 0.05, 0.1],
            },
            jobs,
        },
        "tails" => Plan::Tails {
            s: s_list(spec, &[-0.3, 0.0, 1.0])?,
            n: n_list(spec, &[20, 50])?,
            r: match spec.f64_opt("R")? {
                Some(r) if r > 0.0 => vec![r],
                Some(r) => return Err(SpecError(format!("--R must be positive, got {r}"))),
                None => vec![5.0, 10.0, 20.0],
            },
            jobs,
        },
        "variance" => {
            let s = spec.f64_or("s", 0.0)?;
            if s <= -0.5 {
                return Err(SpecError(format!("experiment needs s > -1/2, got {s}")));
            }
            let n = spec.positive_usize_or("N", 6)?;
            if n > 80 {
                return Err(SpecError("variance experiment needs N <= 80".into()));
            }
            Plan::Variance {
                s,
                n,
                eps: match spec.f64_opt("eps")? {
                    Some(e) if e > 0.0 => vec![e],
                    Some(e) => return Err(SpecError(format!("--eps must be positive, got {e}"))),
                    None => vec![0.1, 0.2, 0.4],
                },
            }
        }
        "gamma1" => {
            let d = Gamma1Params::default();
            let m = spec.positive_usize_or("M", d.m)?;
            Plan::Gamma1(Gamma1Params {
                m,
                corners: vec![m / 4, m / 2, m].into_iter().filter(|c| *c >= 1).collect(),
                draws: spec.positive_usize_or("draws", d.draws)?,
                seed: spec.u64_or("seed", d.seed)?,
                truncation: spec.f64_opt("R")?,
                ..d
            })
        }
        "contraction" => {
            let sprime = spec.f64_or("sprime", 0.5)?;
            if !(sprime > -0.5) {
                return Err(SpecError(format!("--sprime must exceed -1/2, got {sprime}")));
            }
            let proxy = spec.usize_opt("N")?;
            if matches!(proxy, Some(n) if n == 0 || n > 80) {
                return Err(SpecError("contraction proxy size must lie in 1..=80".into()));
            }
            Plan::Contraction {
                sprime,
                sigma: spec.positive_f64_or("sigma", 1.0)?,
                proxy,
            }
        }
        other => return Err(SpecError(format!("unknown experiment '{other}'"))),
    })
}

/// Runs `f` for each s on up to `jobs` threads; reports are merged in s order.
fn per_s(
    s: &[f64],
    jobs: usize,
    f: impl Fn(f64) -> hpk_core::Result<ExperimentReport> + Sync,
) -> Result<ExperimentReport> {
    let mut parts: Vec<Option<hpk_core::Result<ExperimentReport>>> = (0..s.len()).map(|_| None).collect();
    for (chunk_s, chunk_out) in s.chunks(jobs).zip(parts.chunks_mut(jobs)) {
        std::thread::scope(|sc| {
            let f = &f;
            let handles: Vec<_> = chunk_s.iter().map(|&v| sc.spawn(move || f(v))).collect();
            for (h, slot) in handles.into_iter().zip(chunk_out.iter_mut()) {
                *slot = Some(
                    h.join()
                        .unwrap_or_else(|_| Err(hpk_core::HpkError::NonConvergence("worker panicked".into()))),
                );
            }
        });
    }
    let mut merged: Option<ExperimentReport> = None;
    for p in parts {
        let r = p.ok_or_else(|| anyhow!("missing cell"))??;
        match &mut merged {
            None => merged = Some(r),
            Some(m) => m.cells.extend(r.cells),
        }
    }
    let mut m = merged.ok_or_else(|| anyhow!("no cells"))?;
    m.params["s"] = json!(s);
    Ok(m)
}

pub fn run(p: &Plan) -> Result<ExperimentReport> {
    Ok(match p {
        Plan::Gamma2 { s, n, eps, jobs } => per_s(s, *jobs, |v| second_moment_shadow(&[v], 10, n, eps))?,
        Plan::Tails { s, n, r, jobs } => per_s(s, *jobs, |v| tail_shadow(&[v], 10, n, r))?,
        Plan::Variance { s, n, eps } => {
            let param = HPParam::new(*s)?;
            let mut cells = Vec::new();
            for &e in eps {
                let v = variance_bound_check(param, *n, e)?;
                cells.push(ExperimentCell {
                    inputs: json!({"s": s, "n": n, "eps": e, "diag_term": v.diag_term, "first_moment": v.first_moment,
                        "t1": v.t1, "t2": v.t2, "t3": v.t3}),
                    value: v.t,
                    bound: Some(v.bound),
                    pass: Some(v.holds),
                });
            }
            ExperimentReport {
                experiment: "variance".into(),
                params: json!({"s": s, "n": n, "eps": eps}),
                cells,
            }
        }
        Plan::Gamma1(params) => gamma1_balance_experiment(params)?,
        Plan::Contraction { sprime, sigma, proxy } => {
            let (n, gap) = match proxy {
                Some(n) => (*n, None),
                None => {
                    let (n, g) = choose_proxy_size(*sprime, 1e-3)?;
                    (n, Some(g))
                }
            };
            let r = contraction_norm(*sprime, *sigma, &GridSpec::with_tail(n), n)?;
            ExperimentReport {
                experiment: "contraction".into(),
                params: json!({"sprime": sprime, "sigma": sigma, "proxy_n": n, "proxy_gap": gap}),
                cells: vec![
                    ExperimentCell {
                        inputs: json!({"cell": "norm", "top_eigenvalues": &r.eigenvalues[..r.eigenvalues.len().min(5)]}),
                        value: r.norm,
                        bound: Some(1.0),
                        pass: Some(r.norm < 1.0),
                    },
                    ExperimentCell {
                        inputs: json!({"cell": "trace_vs_quadrature", "trace_grid": r.trace_grid,
                            "trace_quadrature": r.trace_quadrature}),
                        value: (r.trace_grid - r.trace_quadrature).abs(),
                        bound: Some(1e-6),
                        pass: Some((r.trace_grid - r.trace_quadrature).abs() < 1e-6),
                    },
                ],
            }
        }
    })
}
