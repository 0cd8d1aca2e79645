use hpk_core::quad::{adaptive, AdaptiveOpts, GaussLegendre};
use hpk_core::specfun::{bessel_j, gamma_fn, hyp1f1, ln_gamma, watson_integral, AccuracyPolicy};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn pol() -> AccuracyPolicy {
    AccuracyPolicy::default()
}

// (nu, x, J_nu(x)) at 30 digits
const BESSEL_TABLE: &[(f64, f64, f64)] = &[
    (-0.3, 0.01, 3.7757243639057988708),
    (-0.3, 3.0, -0.40675205644906690959),
    (-0.3, 11.9, 0.12740910606091058189),
    (-0.3, 12.5, 0.20894083770080038041),
    (-0.3, 15.0, -0.10649162798247485685),
    (-0.3, 20.0, 0.12009245322630804249),
    (-0.3, 34.0, -0.087810257104285209768),
    (-0.3, 60.0, -0.10300360538806237673),
    (-0.3, 200.0, 0.01089374832757780406),
    (0.0, 0.01, 0.99997500015624956597),
    (0.0, 3.0, -0.26005195490193343762),
    (0.0, 11.9, 0.025049441699589563728),
    (0.0, 12.5, 0.14688405470042110231),
    (0.0, 15.0, -0.014224472826780773234),
    (0.0, 20.0, 0.16702466434058315473),
    (0.0, 34.0, -0.030421191021792652072),
    (0.0, 60.0, -0.091471804089061869531),
    (0.0, 200.0, -0.015437439930565091592),
    (0.5, 0.01, 0.079787126279334219655),
    (0.5, 3.0, 0.065008182877375778114),
    (0.5, 11.9, -0.14297213406708074617),
    (0.5, 12.5, -0.014967249458668382989),
    (0.5, 15.0, 0.13396768882243934618),
    (0.5, 20.0, 0.16288076385502987091),
    (0.5, 34.0, 0.072397597211608508177),
    (0.5, 60.0, -0.031397461182520413009),
    (0.5, 200.0, -0.049270523842854474976),
    (1.3, 0.01, 0.00087436477991821323698),
    (1.3, 3.0, 0.43968760239415816418),
    (1.3, 11.9, -0.22207405105838154795),
    (1.3, 12.5, -0.21573732075667729605),
    (1.3, 15.0, 0.19412126738301367131),
    (1.3, 20.0, -0.012530333619979299761),
    (1.3, 34.0, 0.13351378961535060862),
    (1.3, 60.0, 0.082880989862679679182),
    (1.3, 200.0, -0.041504978007371093309),
    (2.5, 0.01, 5.3191924109550804572e-7),
    (2.5, 3.0, 0.41271003220971599344),
    (2.5, 11.9, 0.094107747102813585977),
    (2.5, 12.5, -0.03936307170800345359),
    (2.5, 15.0, -0.10088034979001177408),
    (2.5, 20.0, -0.17258019384387642416),
    (2.5, 34.0, -0.061964270852596136178),
    (2.5, 60.0, 0.036276530818286875105),
    (2.5, 200.0, 0.048854529236358557442),
    (7.2, 0.01, 3.5803829323566088495e-21),
    (7.2, 3.0, 0.0018543585041757799298),
    (7.2, 11.9, -0.11529042776808653357),
    (7.2, 12.5, -0.20249097275436354093),
    (7.2, 15.0, -0.012696382807237516331),
    (7.2, 20.0, -0.1802898641481456448),
    (7.2, 34.0, -0.10806139383383552252),
    (7.2, 60.0, -0.03636407643932133912),
    (7.2, 200.0, 0.050527902352193340906),
    (30.5, 0.01, 4.4770812626446303634e-104),
    (30.5, 3.0, 1.4864091501318922356e-28),
    (30.5, 11.9, 9.0831576130997020185e-11),
    (30.5, 12.5, 3.6088752333944433008e-10),
    (30.5, 15.0, 5.287686557982600514e-8),
    (30.5, 20.0, 0.000075160071195069533213),
    (30.5, 34.0, 0.19701864909715010053),
    (30.5, 60.0, 0.10283912486460043133),
    (30.5, 200.0, -0.054162718502243433236),
];

/// Stirling series at a large shifted argument, then divided back down.
fn gamma_oracle(x: f64) -> f64 {
    let shift = 60;
    let z = x + shift as f64;
    let b = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0];
    let mut series = 0.0;
    for (k, c) in b.iter().enumerate() {
        series += c / z.powi(2 * k as i32 + 1);
    }
    let mut lg = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    for k in 0..shift {
        lg -= (x + k as f64).ln();
    }
    lg.exp()
}

/// Bessel's integral for non-integer order.
fn bessel_integral_oracle(nu: f64, x: f64) -> f64 {
    let opts = AdaptiveOpts {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_intervals: 5000,
    };
    let (a, _) = adaptive(|t| (nu * t - x * t.sin()).cos(), 0.0, PI, opts).unwrap();
    let (b, _) = adaptive(|t| (-x * t.sinh() - nu * t).exp(), 0.0, 20.0, opts).unwrap();
    a / PI - (nu * PI).sin() / PI * b
}

/// Euler integral for 1F1 with the substitution t = sin²φ.
fn hyp1f1_integral_oracle(z: Complex64) -> Complex64 {
    // a = 3/2, c = 3: Γ(3)/(Γ(3/2)²) = 8/π
    let gl = GaussLegendre::new(40);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in hpk_core::quad::uniform(0.0, PI / 2.0, 8).windows(2) {
        for (phi, wt) in gl.mapped(w[0], w[1]) {
            let (s, c) = phi.sin_cos();
            acc += (z * s * s).exp() * (2.0 * s * s * c * c * wt);
        }
    }
    acc * (8.0 / PI)
}

#[test]
fn gamma_3_7_matches_oracle() {
    let frozen = 4.170_651_783_796_603_165_4;
    let v = gamma_fn(3.7, &pol()).unwrap();
    assert!((v - frozen).abs() / frozen < 1e-14, "{v}");
    assert!((gamma_oracle(3.7) - frozen).abs() / frozen < 1e-12);
}

#[test]
fn bessel_1_3_at_2_matches_oracle() {
    let frozen = 0.536_739_419_989_952_965_72;
    let v = bessel_j(1.3, 2.0, &pol()).unwrap();
    assert!((v - frozen).abs() < 1e-14, "{v}");
    assert!((bessel_integral_oracle(1.3, 2.0) - frozen).abs() < 1e-12);
}

#[test]
fn hyp1f1_at_2i_matches_oracle() {
    let frozen = Complex64::new(0.475_520_692_353_226_223_79, 0.740_579_599_504_161_819_33);
    let z = Complex64::new(0.0, 2.0);
    let v = hyp1f1(Complex64::new(1.5, 0.0), Complex64::new(3.0, 0.0), z, &pol()).unwrap();
    assert!((v - frozen).norm() < 1e-14, "{v}");
    assert!((hyp1f1_integral_oracle(z) - frozen).norm() < 1e-12);
}

#[test]
fn bessel_reference_table() {
    for &(nu, x, want) in BESSEL_TABLE {
        let got = bessel_j(nu, x, &pol()).unwrap();
        let amp = (2.0 / (PI * x)).sqrt().min(1.0);
        let err = (got - want).abs();
        assert!(
            err <= 1e-12 * want.abs() + 1e-14 * amp,
            "J_{nu}({x}) = {got}, want {want}, err {err:e}"
        );
    }
}

#[test]
fn bessel_continuous_across_switchovers() {
    for nu in [-0.3, 0.0, 0.7, 2.2, 9.5] {
        for x0 in [12.0, 2.0 * nu] {
            if x0 < 12.0 {
                continue;
            }
            let a = bessel_j(nu, x0, &pol()).unwrap();
            let b = bessel_j(nu, x0 * (1.0 + 1e-14), &pol()).unwrap();
            assert!((a - b).abs() < 1e-13, "nu={nu} x0={x0}");
        }
    }
}

#[test]
fn duplication_formula() {
    for z in [0.3, 0.5, 1.1, 2.4] {
        let lhs = gamma_fn(z, &pol()).unwrap() * gamma_fn(z + 0.5, &pol()).unwrap();
        let g2 = gamma_fn(2.0 * z, &pol()).unwrap();
        let rhs = 2f64.powf(1.0 - 2.0 * z) * PI.sqrt() * g2;
        assert!((lhs - rhs).abs() / g2.abs() < 1e-11);
    }
}

#[test]
fn half_order_closed_forms() {
    let mut x = 0.1;
    while x <= 50.0 {
        let j12 = (2.0 / (PI * x)).sqrt() * x.sin();
        let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
        assert!((bessel_j(0.5, x, &pol()).unwrap() - j12).abs() < 1e-12, "x={x}");
        assert!((bessel_j(1.5, x, &pol()).unwrap() - j32).abs() < 1e-12, "x={x}");
        x += 0.0731;
    }
}

#[test]
fn watson_integral_values() {
    for s in [0.0, 0.5, 1.3] {
        let v = watson_integral(s + 0.5, &pol()).unwrap();
        let want = gamma_fn(s + 0.5, &pol()).unwrap() / (2.0 * gamma_fn(s + 1.5, &pol()).unwrap());
        assert!((v - want).abs() < 1e-8, "s={s}: {v} vs {want}");
    }
}

#[test]
fn kummer_transformation() {
    let p = pol();
    for a in [0.3, 1.5, -0.7] {
        for c in [0.6, 2.0, 3.5] {
            for z in [
                Complex64::new(0.5, 0.0),
                Complex64::new(-1.2, 0.7),
                Complex64::new(0.0, 2.0),
                Complex64::new(2.5, -1.0),
            ] {
                let a = Complex64::new(a, 0.0);
                let c = Complex64::new(c, 0.0);
                let lhs = hyp1f1(a, c, z, &p).unwrap();
                let rhs = z.exp() * hyp1f1(c - a, c, -z, &p).unwrap();
                assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
            }
        }
    }
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.05f64..60.0) {
        let g = gamma_fn(x, &pol()).unwrap();
        let g1 = gamma_fn(x + 1.0, &pol()).unwrap();
        prop_assert!((g1 - x * g).abs() <= 1e-13 * g1.abs());
        prop_assert!((ln_gamma(x).unwrap() - g.ln()).abs() < 1e-12 * g.ln().abs().max(1.0));
    }

    #[test]
    fn bessel_three_term_recurrence(nu in 0.0f64..6.0, x in 0.05f64..80.0) {
        let p = pol();
        let jm = bessel_j(nu, x, &p).unwrap();
        let j = bessel_j(nu + 1.0, x, &p).unwrap();
        let jp = bessel_j(nu + 2.0, x, &p).unwrap();
        let scale = jm.abs().max(jp.abs()).max(1e-300);
        prop_assert!((jm + jp - 2.0 * (nu + 1.0) / x * j).abs() <= 1e-11 * scale.max(2.0 * (nu + 1.0) / x * j.abs()));
    }
}
