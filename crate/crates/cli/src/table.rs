use crate::report::{create_parent, csv_provenance};
use crate::runspec::{RunSpec, SpecError, SpecResult};
use anyhow::{Context, Result};
use hpk_core::kernels::{
    eval_V, eval_limit_kernel, eval_phi_n, FiniteKernel, LimitKernel, RescaledCircleKernel, VFunction,
};
use hpk_core::weights_opuc::{eval_line_weight, HPParam};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Kernel,
    Weight,
    VFunction,
    PhiN,
}

#[derive(Clone, Debug)]
pub struct Plan {
    kind: Kind,
    param: HPParam,
    n: Option<usize>,
    grid: Vec<f64>,
    out: PathBuf,
}

pub fn plan(kind: &str, spec: &RunSpec) -> SpecResult<Plan> {
    let kind = match kind {
        "kernel" => Kind::Kernel,
        "weight" => Kind::Weight,
        "vfunction" => Kind::VFunction,
        "phi_n" => Kind::PhiN,
        other => return Err(SpecError(format!("unknown table kind '{other}'"))),
    };
    let s = spec.f64_or("s", 0.0)?;
    let param = HPParam::new(s).map_err(|e| SpecError(e.to_string()))?;
    let n = spec.usize_opt("N")?;
    if n == Some(0) {
        return Err(SpecError("--N must be at least 1".into()));
    }
    let needs_probability = kind != Kind::Weight;
    if needs_probability && !param.is_probability() {
        return Err(SpecError(format!("table {kind:?} needs s > -1/2, got {s}")));
    }
    match (kind, n) {
        (Kind::PhiN | Kind::Weight, None) => {
            return Err(SpecError(format!("table {kind:?} needs --N")));
        }
        (Kind::VFunction, Some(1)) => return Err(SpecError("prelimit V needs N >= 2".into())),
        (Kind::VFunction, Some(n)) if n > 80 => {
            return Err(SpecError("prelimit V is limited to N <= 80".into()));
        }
        (Kind::Kernel | Kind::PhiN, Some(n)) if n > 120 && s != 0.0 => {
            return Err(SpecError(format!("N = {n} exceeds the supported 120")));
        }
        _ => {}
    }
    let default_grid = if kind == Kind::PhiN { "-3:3:24" } else { "0.1:3:30" };
    let grid = spec.grid_or(default_grid)?;
    if let (Kind::PhiN, Some(n)) = (kind, n) {
        let lim = n as f64 * std::f64::consts::PI;
        if grid.iter().any(|a| a.abs() >= lim) {
            return Err(SpecError(format!("phi_n grid must lie in (-Nπ, Nπ) = ±{lim}")));
        }
    }
    let name = match kind {
        Kind::Kernel => "kernel",
        Kind::Weight => "weight",
        Kind::VFunction => "vfunction",
        Kind::PhiN => "phi_n",
    };
    Ok(Plan {
        kind,
        param,
        n,
        grid,
        out: spec.out_path(&format!("table-{name}.csv")),
    })
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn run(p: &Plan, spec: &RunSpec) -> Result<PathBuf> {
    let mut rows: Vec<String> = Vec::new();
    let header = match p.kind {
        Kind::Kernel => {
            let eval: Box<dyn Fn(f64, f64) -> hpk_core::Result<f64>> = match p.n {
                Some(n) => {
                    let k = FiniteKernel::new(p.param, n)?;
                    Box::new(move |x, y| k.eval_sign_corrected(x, y))
                }
                None => {
                    let k = LimitKernel::new(p.param)?;
                    Box::new(move |x, y| eval_limit_kernel(&k, x, y))
                }
            };
            for &x in &p.grid {
                for &y in &p.grid {
                    rows.push(format!("{},{},{}", f(x), f(y), f(eval(x, y)?)));
                }
            }
            "x,y,value"
        }
        Kind::Weight => {
            let n = p.n.expect("validated");
            for &x in &p.grid {
                rows.push(format!("{},{}", f(x), f(eval_line_weight(&p.param, n, x)?)));
            }
            "x,weight"
        }
        Kind::VFunction => {
            let v = match p.n {
                Some(n) => VFunction::prelimit(p.param, n)?,
                None => VFunction::limit(p.param)?,
            };
            for &x in &p.grid {
                rows.push(format!("{},{}", f(x), f(eval_V(&v, x)?)));
            }
            "x,v"
        }
        Kind::PhiN => {
            let k = RescaledCircleKernel::new(p.param, p.n.expect("validated"))?;
            for &a in &p.grid {
                for &b in &p.grid {
                    let z = eval_phi_n(&k, a, b)?;
                    rows.push(format!("{},{},{},{}", f(a), f(b), f(z.re), f(z.im)));
                }
            }
            "alpha,beta,re,im"
        }
    };
    create_parent(&p.out)?;
    let file = fs::File::create(&p.out).with_context(|| format!("creating {}", p.out.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", csv_provenance(spec))?;
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(p.out.clone())
}
