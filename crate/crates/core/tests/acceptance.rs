//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any fails.

use hpk_core::ergodics::{
    gamma1_balance_experiment, second_moment_shadow, tail_shadow, variance_bound_check, variance_monte_carlo,
    Gamma1Params,
};
use hpk_core::infmeasures::{contraction_norm, damped_projection, growth_certificate, GridSpec, VBasis};
use hpk_core::kernels::{
    check_limit_recurrence, check_projection, convergence_profile, eval_V, eval_limit_kernel, eval_phi_n, FiniteKernel,
    LimitKernel, ProjectionQuad, RescaledCircleKernel, VFunction,
};
use hpk_core::quad::{uniform, GaussLegendre};
use hpk_core::sampling::stats::{cauchy_cdf, ks_one_sample, ks_two_sample};
use hpk_core::sampling::{
    corner_summaries, hp_matrix_s0_with_rng, sample_projection_dpp_batch, sample_pseudo_jacobi_mcmc, SamplerConfig,
    SamplerMethod,
};
use hpk_core::specfun::{bessel_j, gamma_fn, watson_integral, AccuracyPolicy};
use hpk_core::weights_opuc::HPParam;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

type Outcome = (bool, String);

fn p(s: f64) -> HPParam {
    HPParam::new(s).unwrap()
}

fn pol() -> AccuracyPolicy {
    AccuracyPolicy::default()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn c1_special_functions() -> Outcome {
    // Γ(s+1/2)/(2Γ(s+3/2)) = 1/(2s+1)
    let watson = [0.0, 0.5, 1.3]
        .iter()
        .map(|&s| (watson_integral(s + 0.5, &pol()).unwrap() - 1.0 / (2.0 * s + 1.0)).abs())
        .fold(0.0, f64::max);
    let dup = [0.3, 0.5, 1.1, 2.4]
        .iter()
        .map(|&z| {
            let g2 = gamma_fn(2.0 * z, &pol()).unwrap();
            let lhs = gamma_fn(z, &pol()).unwrap() * gamma_fn(z + 0.5, &pol()).unwrap();
            (lhs - 2f64.powf(1.0 - 2.0 * z) * PI.sqrt() * g2).abs() / g2
        })
        .fold(0.0, f64::max);
    let mut half = 0.0f64;
    for x in linspace(0.1, 50.0, 700) {
        let c = (2.0 / (PI * x)).sqrt();
        half = half.max((bessel_j(0.5, x, &pol()).unwrap() - c * x.sin()).abs());
        half = half.max((bessel_j(1.5, x, &pol()).unwrap() - c * (x.sin() / x - x.cos())).abs());
    }
    (
        watson < 1e-8 && dup < 1e-11 && half < 1e-12,
        format!("watson {watson:.1e}, duplication {dup:.1e}, half-order {half:.1e}"),
    )
}

/// ‖V_s‖² in t = 1/|x|: 2∫_0^T V(1/t)²/t² dt plus the tail m/T, with m the mean of V² over whole periods past T.
fn v_norm_quadrature(s: f64) -> f64 {
    let v = VFunction::limit(p(s)).unwrap();
    let gl = GaussLegendre::new(20);
    let f = |t: f64| eval_V(&v, 1.0 / t).unwrap().powi(2);
    let t_max = 4000.0;
    let body = gl.integrate_panels(|t| f(t) / (t * t), &uniform(0.0, t_max, 8000));
    let periods = 20.0 * PI;
    let mean = gl.integrate_panels(f, &uniform(t_max, t_max + periods, 200)) / periods;
    2.0 * (body + mean / t_max)
}

fn c2_v_norms() -> Outcome {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (s, want) in [(0.0, PI), (0.5, 4.0), (1.0, 3.0 * PI)] {
        let q = v_norm_quadrature(s);
        let closed = VFunction::limit(p(s)).unwrap().norm_sq().unwrap();
        let rel = ((q - want) / want).abs().max(((closed - want) / want).abs());
        worst = worst.max(rel);
        detail.push(format!("s={s}: {q:.9}"));
    }
    (worst < 1e-6, format!("{}; max rel err {worst:.1e}", detail.join(", ")))
}

fn c3_limit_recurrence() -> Outcome {
    let grid = linspace(0.2, 3.0, 20);
    let mut worst = 0.0f64;
    for s in [0.0, 0.25, 0.8] {
        for &x in &grid {
            for &y in &grid {
                worst = worst.max(check_limit_recurrence(s, x, y).unwrap());
            }
        }
    }
    (worst < 1e-10, format!("max residual {worst:.1e} over 3 x 400 points"))
}

fn c4_projection() -> Outcome {
    let pairs = [
        (1.5, 1.5),
        (1.5, -2.0),
        (2.0, 2.5),
        (-1.8, 3.0),
        (2.2, -2.2),
        (3.0, 3.0),
        (-1.5, -2.7),
        (1.7, 2.9),
        (-2.4, 1.6),
        (2.6, -3.0),
    ];
    let q = ProjectionQuad::default();
    let (mut worst, mut lo, mut hi) = (0.0f64, f64::INFINITY, 0.0f64);
    for s in [0.0, 0.5] {
        let k = LimitKernel::new(p(s)).unwrap();
        for &(x, y) in &pairs {
            let a = check_projection(&k, x, y, 100.0, &q).unwrap().residual;
            let b = check_projection(&k, x, y, 200.0, &q).unwrap().residual;
            worst = worst.max(a);
            lo = lo.min(b / a);
            hi = hi.max(b / a);
        }
    }
    (
        worst < 1e-3 && lo >= 0.35 && hi <= 0.65,
        format!("max residual at R=100 {worst:.2e}; R-doubling ratio in [{lo:.3}, {hi:.3}]"),
    )
}

/// s = 0 oracle: K_N is the transported Dirichlet kernel and Π∞ the transported sine kernel.
fn s0_gap_oracle(n: usize, grid: &[f64]) -> f64 {
    let nf = n as f64;
    let mut gap = 0.0f64;
    for &x in grid {
        for &y in grid {
            let d = 2.0 * ((nf * x).atan() - (nf * y).atan());
            let dirichlet = if d == 0.0 {
                nf
            } else {
                (nf * d / 2.0).sin() / (d / 2.0).sin()
            };
            let kn = nf * dirichlet / (2.0 * PI) * 2.0 / ((1.0 + nf * nf * x * x) * (1.0 + nf * nf * y * y)).sqrt();
            let u = 1.0 / y - 1.0 / x;
            let sinc = if u == 0.0 { 1.0 } else { u.sin() / u };
            gap = gap.max((kn - sinc / (PI * x * y)).abs());
        }
    }
    gap
}

fn c5_finite_convergence() -> Outcome {
    let grid = linspace(0.5, 3.0, 26);
    let ns = [4, 8, 16, 32];
    let prof = convergence_profile(0.0, &ns, &grid).unwrap();
    let oracle: Vec<f64> = ns.iter().map(|&n| s0_gap_oracle(n, &grid)).collect();
    let agree = prof
        .gaps
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let last = prof.gaps[3];
    (
        prof.strictly_decreasing && last < 1e-2 && agree < 1e-10,
        format!(
            "gaps [{}]; oracle agreement {agree:.1e}",
            prof.gaps
                .iter()
                .map(|g| format!("{g:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn c6_s0_degenerations() -> Outcome {
    let mut phi = 0.0f64;
    for n in [3, 17, 200] {
        let k = RescaledCircleKernel::new(p(0.0), n).unwrap();
        let nf = n as f64;
        for (a, b) in [(0.4, -1.3), (2.5, 2.0), (-7.0, 1.0), (1.0, 1.0)] {
            let v = eval_phi_n(&k, a, b).unwrap();
            let want = if a == b {
                1.0 / (2.0 * PI)
            } else {
                ((a - b) / 2.0).sin() / (2.0 * PI * nf * ((a - b) / (2.0 * nf)).sin())
            };
            phi = phi.max((v.re - want).abs()).max(v.im.abs());
        }
    }
    let lim = LimitKernel::new(p(0.0)).unwrap();
    let diag = (0..20)
        .map(|i| {
            let x = if i % 2 == 0 {
                0.25 + 0.4 * i as f64
            } else {
                -0.3 - 0.37 * i as f64
            };
            (eval_limit_kernel(&lim, x, x).unwrap() - 1.0 / (PI * x * x)).abs()
        })
        .fold(0.0, f64::max);
    (
        phi < 1e-12 && diag < 1e-10,
        format!("Φ_n closed form {phi:.1e}, Π∞ diagonal {diag:.1e}"),
    )
}

fn c7_gamma2_shadow() -> Outcome {
    let r = second_moment_shadow(&[-0.3, 0.0, 1.0], 10, &[20, 50, 100], &[0.025, 0.05, 0.1]).unwrap();
    let failing: Vec<String> = r
        .cells
        .iter()
        .filter(|c| c.pass != Some(true))
        .map(|c| format!("(s={}, N={}, ε={})", c.inputs["s"], c.inputs["n"], c.inputs["eps"]))
        .collect();
    let gap = r
        .cells
        .iter()
        .map(|c| c.inputs["line_circle_gap"].as_f64().unwrap())
        .fold(0.0, f64::max);
    (
        r.all_pass(),
        format!(
            "{} of {} cells fail {}; line/circle gap {gap:.1e}",
            failing.len(),
            r.cells.len(),
            failing.join(" ")
        ),
    )
}

fn c8_tail_shadow() -> Outcome {
    let r = tail_shadow(&[-0.3, 0.0, 1.0], 10, &[20, 50], &[5.0, 10.0, 20.0]).unwrap();
    let worst = r.cells.iter().map(|c| c.value / c.bound.unwrap()).fold(0.0, f64::max);
    (
        r.all_pass(),
        format!("{} cells, max value/bound {worst:.3}", r.cells.len()),
    )
}

fn c9_variance() -> Outcome {
    let mut ok = true;
    let (mut t2, mut z) = (0.0f64, 0.0f64);
    for (i, s) in [0.0, 0.5].into_iter().enumerate() {
        for (j, n) in [6usize, 12].into_iter().enumerate() {
            let k = FiniteKernel::new(p(s), n).unwrap();
            let cfg = SamplerConfig::with_seed(100 + 10 * i as u64 + j as u64);
            let draws = sample_projection_dpp_batch(&k, &cfg, 10_000).unwrap();
            for eps in [0.2, 0.4] {
                let v = variance_bound_check(p(s), n, eps).unwrap();
                let (mean, se) = variance_monte_carlo(&draws, eps);
                let zi = (mean - v.t).abs() / se;
                ok &= v.holds && v.t2 < 1e-10 && zi < 3.0;
                t2 = t2.max(v.t2);
                z = z.max(zi);
            }
        }
    }
    (
        ok,
        format!("8 cells; max |T₂| {t2:.1e}; max Monte-Carlo deviation {z:.2}σ"),
    )
}

fn c10_samplers() -> Outcome {
    let mut card = true;
    for (s, n) in [(-0.3, 5), (0.0, 1), (0.5, 4), (1.0, 9)] {
        let k = FiniteKernel::new(p(s), n).unwrap();
        let d = sample_projection_dpp_batch(&k, &SamplerConfig::with_seed(21), 500).unwrap();
        card &= d.iter().all(|c| c.len() == n);
    }

    let k1 = FiniteKernel::new(p(0.0), 1).unwrap();
    let xs: Vec<f64> = sample_projection_dpp_batch(&k1, &SamplerConfig::with_seed(22), 100_000)
        .unwrap()
        .iter()
        .map(|c| c.points()[0])
        .collect();
    let cauchy = ks_one_sample(&xs, cauchy_cdf).p_value;

    let m = 5000;
    let k4 = FiniteKernel::new(p(0.5), 4).unwrap();
    let spec: Vec<f64> = sample_projection_dpp_batch(&k4, &SamplerConfig::with_seed(23), m)
        .unwrap()
        .iter()
        .map(|c| c.max().unwrap())
        .collect();
    let mc = SamplerConfig {
        seed: 24,
        method: SamplerMethod::Mcmc,
        burn_in: 2000,
        thinning: 20,
        ..SamplerConfig::default()
    };
    let chain = sample_pseudo_jacobi_mcmc(p(0.5), 4, &mc).unwrap();
    let mcmc: Vec<f64> = chain.take(m).map(|c| c.unwrap().max().unwrap()).collect();
    let two = ks_two_sample(&spec, &mcmc).p_value;

    // corners of an s = 0 matrix are s = 0 matrices, so tr(X_n)/n is the sum of n rescaled points
    let (size, corners, count) = (8, [4usize, 8], 4000);
    let cfg = SamplerConfig::with_seed(25);
    let mut traces = vec![Vec::with_capacity(count); corners.len()];
    for i in 0..count as u64 {
        let x = hp_matrix_s0_with_rng(size, &mut cfg.rng(i)).unwrap();
        for (t, c) in traces.iter_mut().zip(corner_summaries(&x, &corners).unwrap()) {
            t.push(c.c);
        }
    }
    let mut corner_p = f64::INFINITY;
    for (t, &n) in traces.iter().zip(&corners) {
        let k = FiniteKernel::new(p(0.0), n).unwrap();
        let sums: Vec<f64> = sample_projection_dpp_batch(&k, &SamplerConfig::with_seed(26 + n as u64), count)
            .unwrap()
            .iter()
            .map(|c| c.sum())
            .collect();
        corner_p = corner_p.min(ks_two_sample(t, &sums).p_value);
    }
    (
        card && cauchy > 0.01 && two > 0.01 && corner_p > 0.01,
        format!(
            "cardinality {}; KS p-values: Cauchy {cauchy:.3}, spectral/MCMC {two:.3}, corner trace {corner_p:.3}",
            if card { "exact" } else { "WRONG" }
        ),
    )
}

fn c11_gamma1() -> Outcome {
    let r = gamma1_balance_experiment(&Gamma1Params::default()).unwrap();
    let cell = |name: &str| r.cells.iter().find(|c| c.inputs["cell"] == name).unwrap();
    let trend = cell("trend");
    let exact = cell("stabilization_exact");
    let last = *Gamma1Params::default().cutoffs.last().unwrap();
    let medians: Vec<String> = r
        .cells
        .iter()
        .filter(|c| c.inputs["cell"] == "median_gap" && c.inputs["cutoff"] == last)
        .map(|c| format!("{:.3e}", c.value))
        .collect();
    (
        trend.pass == Some(true) && exact.pass == Some(true),
        format!(
            "median gaps over N = 64, 128, 256: [{}]; stabilization {}",
            medians.join(", "),
            if exact.pass == Some(true) { "exact" } else { "NOT exact" }
        ),
    )
}

fn c12_infinite() -> Outcome {
    let mut ok = true;
    let mut norms = Vec::new();
    for (sp, sigma) in [(0.5, 1.0), (0.2, 0.5)] {
        let r = contraction_norm(sp, sigma, &GridSpec::with_tail(80), 80).unwrap();
        ok &= r.norm < 1.0;
        norms.push(format!("{:.3}", r.norm));
    }
    let d = damped_projection(p(-1.0), 1.0, &GridSpec::damped(20, 1.0), 20).unwrap();
    let rank = 21.0;
    ok &= d.idempotency_residual < 1e-8 && (d.trace - rank).abs() < 0.05;
    let mut slope_err = 0.0f64;
    for s in [-1.0, -0.6] {
        let c = growth_certificate(&VBasis::new(p(s)).unwrap(), 1).unwrap();
        slope_err = slope_err.max((c.pointwise_slope - c.exponent).abs());
    }
    ok &= slope_err < 0.1;
    (
        ok,
        format!(
            "contraction norms [{}]; idempotency {:.1e}, trace {:.4} (rank 21); slope error {slope_err:.3}",
            norms.join(", "),
            d.idempotency_residual,
            d.trace
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Outcome); 12] = [
        ("special functions", 5.0, c1_special_functions),
        ("V_s norms", 10.0, c2_v_norms),
        ("limit-kernel recurrence", 5.0, c3_limit_recurrence),
        ("projection property", 60.0, c4_projection),
        ("finite-N convergence", 120.0, c5_finite_convergence),
        ("s=0 degenerations", 5.0, c6_s0_degenerations),
        ("gamma2 shadow", 600.0, c7_gamma2_shadow),
        ("tail shadow", 300.0, c8_tail_shadow),
        ("variance bound", 600.0, c9_variance),
        ("sampler correctness", 900.0, c10_samplers),
        ("gamma1 experiment", 1200.0, c11_gamma1),
        ("infinite regime", 300.0, c12_infinite),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let pass = pass && secs < *budget;
        if !pass {
            failed += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {tag} {name}: {detail} [{secs:.1} s / {budget:.0} s]",
            i + 1
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
