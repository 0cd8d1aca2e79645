use crate::report::Check;
use crate::runspec::{RunSpec, SpecError, SpecResult};
use anyhow::Result;
use hpk_core::infmeasures::{
    choose_proxy_size, contraction_norm, damped_projection, growth_certificate, GridSpec, VBasis,
};
use hpk_core::kernels::{
    check_finite_recurrence, check_limit_recurrence, check_projection, convergence_profile, LimitKernel, ProjectionQuad,
};
use hpk_core::specfun::{bessel_j, gamma_fn, watson_integral, AccuracyPolicy};
use hpk_core::weights_opuc::{build_opuc, cd_identity_residual, CircleWeight, HPParam};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Specfun,
    Opuc,
    Kernels,
    Infinite,
}

/// Suite inputs, validated before anything is computed.
#[derive(Clone, Debug)]
pub struct Plan {
    suite: Suite,
    s: f64,
    n: usize,
    sigma: f64,
    m: usize,
}

pub fn plan(suite: &str, spec: &RunSpec) -> SpecResult<Plan> {
    let suite = match suite {
        "specfun" => Suite::Specfun,
        "opuc" => Suite::Opuc,
        "kernels" => Suite::Kernels,
        "infinite" => Suite::Infinite,
        other => return Err(SpecError(format!("unknown suite '{other}'"))),
    };
    let default_s = if suite == Suite::Infinite { -1.0 } else { 0.0 };
    let s = spec.f64_or("s", default_s)?;
    let n = spec.positive_usize_or("N", 10)?;
    let sigma = spec.positive_f64_or("sigma", 1.0)?;
    let m = spec.positive_usize_or("n", 20)?;
    match suite {
        Suite::Opuc | Suite::Kernels if s <= -0.5 => {
            return Err(SpecError(format!("suite needs s > -1/2, got {s}")));
        }
        Suite::Kernels if n < 2 => return Err(SpecError("kernels suite needs N >= 2".into())),
        Suite::Infinite if s > -0.5 => {
            return Err(SpecError(format!("infinite suite needs s <= -1/2, got {s}")));
        }
        Suite::Infinite if m > 80 => return Err(SpecError("infinite suite needs n <= 80".into())),
        _ => {}
    }
    if n > 120 {
        return Err(SpecError(format!("N = {n} exceeds the supported 120")));
    }
    Ok(Plan { suite, s, n, sigma, m })
}

pub fn run(p: &Plan) -> Result<Vec<Check>> {
    match p.suite {
        Suite::Specfun => specfun(),
        Suite::Opuc => opuc(p.s, p.n),
        Suite::Kernels => kernels(p.s, p.n),
        Suite::Infinite => infinite(p.s, p.sigma, p.m),
    }
}

fn specfun() -> Result<Vec<Check>> {
    let pol = AccuracyPolicy::default();
    let mut out = Vec::new();
    for s in [0.0, 0.5, 1.3] {
        let v = watson_integral(s + 0.5, &pol)?;
        let want = gamma_fn(s + 0.5, &pol)? / (2.0 * gamma_fn(s + 1.5, &pol)?);
        out.push(Check::below(format!("watson s={s}"), (v - want).abs(), 1e-8));
    }
    for z in [0.3, 0.5, 1.1, 2.4] {
        let lhs = gamma_fn(z, &pol)? * gamma_fn(z + 0.5, &pol)?;
        let g2 = gamma_fn(2.0 * z, &pol)?;
        let rhs = 2f64.powf(1.0 - 2.0 * z) * PI.sqrt() * g2;
        out.push(Check::below(
            format!("duplication z={z}"),
            (lhs - rhs).abs() / g2.abs(),
            1e-11,
        ));
    }
    let (mut e12, mut e32) = (0.0f64, 0.0f64);
    for i in 0..=1000 {
        let x = 0.1 + 49.9 * i as f64 / 1000.0;
        let c = (2.0 / (PI * x)).sqrt();
        e12 = e12.max((bessel_j(0.5, x, &pol)? - c * x.sin()).abs());
        e32 = e32.max((bessel_j(1.5, x, &pol)? - c * (x.sin() / x - x.cos())).abs());
    }
    out.push(Check::below("half-order J_1/2 on [0.1, 50]", e12, 1e-12));
    out.push(Check::below("half-order J_3/2 on [0.1, 50]", e32, 1e-12));
    Ok(out)
}

fn opuc(s: f64, n: usize) -> Result<Vec<Check>> {
    let w = CircleWeight::lambda(HPParam::new(s)?);
    let b = build_opuc(&w, n)?;
    let mut out = vec![Check::below("gram residual", b.gram_residual, 1e-8)];
    let max_alpha = b.verblunsky().iter().fold(0.0f64, |m, a| m.max(a.abs()));
    out.push(Check::below("max |verblunsky|", max_alpha, 1.0));
    for (t, u) in [(0.5, -0.5), (2.0, 0.1), (-2.8, 1.3)] {
        out.push(Check::below(
            format!("christoffel-darboux θ={t} τ={u}"),
            cd_identity_residual(&b, n, t, u)?,
            1e-9,
        ));
    }
    Ok(out)
}

fn kernels(s: f64, n: usize) -> Result<Vec<Check>> {
    let p = HPParam::new(s)?;
    let mut out = Vec::new();
    let pts = [0.2, 0.7, 1.4, 3.0];
    let mut worst = 0.0f64;
    for &x in &pts {
        for &y in &pts {
            worst = worst
                .max(check_limit_recurrence(s, x, -y)?)
                .max(check_limit_recurrence(s, x, y)?);
        }
    }
    out.push(Check::below("limit recurrence", worst, 1e-10));
    let mut worst = 0.0f64;
    for &x in &pts {
        for &y in &pts {
            worst = worst.max(check_finite_recurrence(s, n, x, -y)?);
        }
    }
    out.push(Check::below(format!("finite recurrence N={n}"), worst, 1e-8));
    let k = LimitKernel::new(p)?;
    for (x, y) in [(1.5, 2.0), (-2.5, 1.8), (3.0, -3.0)] {
        let r = check_projection(&k, x, y, 100.0, &ProjectionQuad::default())?;
        out.push(Check::below(format!("projection x={x} y={y} R=100"), r.residual, 1e-3));
    }
    let prof = convergence_profile(s, &[10, 20, 40], &[-2.0, -0.5, 0.5, 1.0, 2.0])?;
    out.push(Check {
        name: "finite-N convergence gaps non-increasing".into(),
        value: *prof.gaps.last().expect("non-empty"),
        bound: prof.gaps[0],
        pass: prof.non_increasing_within_slack,
    });
    Ok(out)
}

fn infinite(s: f64, sigma: f64, m: usize) -> Result<Vec<Check>> {
    let p = HPParam::new(s)?;
    let vb = VBasis::new(p)?;
    let mut out = Vec::new();
    for k in 1..=vb.count() {
        let c = growth_certificate(&vb, k)?;
        out.push(Check::below(
            format!("v_{k} pointwise slope vs {}", c.exponent),
            (c.pointwise_slope - c.exponent).abs(),
            0.1,
        ));
        out.push(Check::below(
            format!("v_{k} integral slope vs {}", c.integral_slope_target),
            (c.integral_slope - c.integral_slope_target).abs(),
            0.1,
        ));
        out.push(Check {
            name: format!("v_{k} not square-integrable"),
            value: c.exponent,
            bound: -0.5,
            pass: !c.square_integrable,
        });
    }
    let (proxy, _) = choose_proxy_size(p.s_prime, 1e-3)?;
    let c = contraction_norm(p.s_prime, sigma, &GridSpec::with_tail(proxy), proxy)?;
    out.push(Check::below(
        format!("contraction norm s'={} σ={sigma}", p.s_prime),
        c.norm,
        1.0,
    ));
    out.push(Check::below(
        "contraction trace vs quadrature",
        (c.trace_grid - c.trace_quadrature).abs(),
        1e-6,
    ));
    let d = damped_projection(p, sigma, &GridSpec::damped(m, sigma), m)?;
    out.push(Check::below("idempotency residual", d.idempotency_residual, 1e-8));
    out.push(Check::below("symmetry residual", d.symmetry_residual, 1e-8));
    out.push(Check::below(
        format!("trace vs rank {}", m + vb.count()),
        (d.trace - (m + vb.count()) as f64).abs(),
        0.05,
    ));
    for (j, t) in d.transversality.iter().enumerate() {
        out.push(Check::below(format!("transversality v_{}", j + 1), *t, 1.0));
    }
    Ok(out)
}
