use hpk_core::error::HpkError;
use hpk_core::infmeasures::*;
use hpk_core::kernels::FiniteKernel;
use hpk_core::quad::{uniform, GaussLegendre};
use hpk_core::sampling::{Configuration, SamplerConfig, SpectralSampler};
use hpk_core::weights_opuc::HPParam;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn p(s: f64) -> HPParam {
    HPParam::new(s).unwrap()
}

#[test]
fn contraction_is_strict_and_monotone_in_sigma() {
    for sp in [0.5, 0.2] {
        let (n, _) = choose_proxy_size(sp, 1e-3).unwrap();
        let mut prev = 0.0;
        for sigma in [0.25, 0.5, 1.0, 2.0] {
            let r = contraction_norm(sp, sigma, &GridSpec::with_tail(n), n).unwrap();
            assert!(r.norm > prev && r.norm < 1.0, "s' = {sp}, σ = {sigma}: {}", r.norm);
            assert!(!r.near_one);
            assert!((r.trace_grid - r.trace_quadrature).abs() < 1e-6, "{r:?}");
            prev = r.norm;
        }
    }
}

#[test]
fn contraction_stable_in_proxy_size() {
    let a = contraction_norm(0.5, 1.0, &GridSpec::with_tail(40), 40).unwrap();
    let b = contraction_norm(0.5, 1.0, &GridSpec::with_tail(80), 80).unwrap();
    assert!((a.norm - b.norm).abs() < 0.01, "{} vs {}", a.norm, b.norm);
}

#[test]
fn damped_projection_s_minus_one() {
    let d = damped_projection(p(-1.0), 1.0, &GridSpec::damped(20, 1.0), 20).unwrap();
    assert!(d.idempotency_residual < 1e-8, "{}", d.idempotency_residual);
    assert!(d.symmetry_residual < 1e-8);
    assert!((d.trace - 21.0).abs() < 0.05, "{}", d.trace);
    assert!(d.transversality[0] < 0.99, "{:?}", d.transversality);
    let t = d.diagonal();
    assert!(t.diagonal.iter().all(|v| *v >= 0.0));
    assert!((t.integral - 21.0).abs() < 0.05);
}

#[test]
fn two_v_functions_at_s_minus_1_6() {
    let d = damped_projection(p(-1.6), 0.5, &GridSpec::damped(10, 0.5), 10).unwrap();
    assert_eq!(d.transversality.len(), 2);
    assert!(d.idempotency_residual < 1e-8);
    assert!((d.trace - 12.0).abs() < 0.05);
}

/// √D Π (I + (D - I)Π)⁻¹ Π √D on the grid, with Π from pointwise kernel values.
fn direct_q(k: &FiniteKernel, sigma: f64, grid: &RealGrid) -> DMatrix<f64> {
    let n = grid.len();
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let pi = DMatrix::from_fn(n, n, |i, j| {
        sw[i] * sw[j] * k.eval_sign_corrected(grid.nodes[i], grid.nodes[j]).unwrap()
    });
    let g: Vec<f64> = grid.nodes.iter().map(|x| (-sigma * x * x).exp()).collect();
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += (g[i] - 1.0) * pi[(i, j)];
        }
    }
    let inv = a.lu().try_inverse().unwrap();
    let mut q = &pi * inv * &pi;
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] *= (g[i] * g[j]).sqrt();
        }
    }
    q
}

#[test]
fn degenerate_case_matches_direct_formula() {
    let (sigma, m) = (1.0, 8);
    // Π is a projection on the grid only if the slow x^{-1-2s′} tails are included
    let spec = GridSpec {
        t_max: 20.0,
        tail: true,
        ..GridSpec::damped(m, sigma)
    };
    let d = damped_projection(p(-0.4), sigma, &spec, m).unwrap();
    assert!(d.transversality.is_empty());
    assert!((d.trace - m as f64).abs() < 1e-9);
    let q = direct_q(&FiniteKernel::new(p(-0.4), m).unwrap(), sigma, &d.grid);
    let gap = (&q - &d.matrix).abs().max();
    assert!(gap < 1e-8, "{gap}");
}

#[test]
fn degenerate_diagonal_converges_in_m() {
    let sigma = 1.0;
    let xs: Vec<f64> = (0..=10).map(|i| 0.5 + 0.25 * i as f64).collect();
    let diag = |m: usize| -> Vec<f64> {
        let d = damped_projection(p(-0.4), sigma, &GridSpec::damped(m, sigma), m).unwrap();
        xs.iter().map(|x| d.basis.kernel(*x, *x).unwrap()).collect()
    };
    let reference = diag(80);
    let gaps: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|m| {
            diag(*m)
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn near_singular_for_extreme_damping() {
    let r = damped_projection(p(-0.4), 1e6, &GridSpec::damped(20, 1e6), 20);
    assert!(matches!(r, Err(HpkError::NearSingular(_))), "{r:?}");
}

#[test]
fn damped_samples_follow_diagonal() {
    let d = damped_projection(p(-1.0), 1.0, &GridSpec::damped(10, 1.0), 10).unwrap();
    let cfg = SamplerConfig::with_seed(12);
    let sampler = SpectralSampler::new(&d.basis, &cfg).unwrap();
    let draws = 400;
    let mut pts = Vec::new();
    for i in 0..draws {
        let c = sampler.draw(&mut cfg.rng(i)).unwrap();
        assert_eq!(c.len(), 11);
        pts.extend_from_slice(c.points());
    }
    let edges = [-8.0, -2.0, -1.0, -0.4, 0.0, 0.4, 1.0, 2.0, 8.0];
    let gl = GaussLegendre::new(8);
    for w in edges.windows(2) {
        let mass = gl.integrate_panels(|x| d.basis.kernel(x, x).unwrap_or(0.0), &uniform(w[0], w[1], 200));
        let expected = mass * draws as f64;
        let got = pts.iter().filter(|x| **x >= w[0] && **x < w[1]).count() as f64;
        assert!(
            (got - expected).abs() < 3.0 * expected.sqrt(),
            "{w:?}: {got} vs {expected}"
        );
    }
}

#[test]
fn binary_export_file_round_trip() {
    let d = damped_projection(p(-1.0), 2.0, &GridSpec::damped(6, 2.0), 6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.bin");
    write_projection_binary(&mut std::fs::File::create(&path).unwrap(), &d).unwrap();
    let (h, m) = read_projection_binary(&mut std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!((h.s, h.sigma, h.m), (-1.0, 2.0, 6));
    assert_eq!(h.grid.nodes.len(), m.nrows());
    assert!(m.iter().zip(d.matrix.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn growth_certificates() {
    for s in [-1.0, -0.6] {
        let vb = VBasis::new(p(s)).unwrap();
        let c = growth_certificate(&vb, 1).unwrap();
        assert!(!c.square_integrable);
        assert!((c.pointwise_slope - c.exponent).abs() < 0.1, "{c:?}");
        assert!((c.integral_slope - c.integral_slope_target).abs() < 0.1, "{c:?}");
    }
    // s = -1.6, s' = 0.4: v_1 ~ x^{-0.4}, v_2 ~ x^{0.6}
    let vb = VBasis::new(p(-1.6)).unwrap();
    for (k, e) in [(1, -0.4), (2, 0.6)] {
        let c = growth_certificate(&vb, k).unwrap();
        assert!((c.exponent - e).abs() < 1e-12 && !c.square_integrable);
        assert!((c.integral_slope - (2.0 * e + 1.0)).abs() < 0.1, "{c:?}");
    }
}

proptest! {
    #[test]
    fn s2_weight_in_unit_interval(pts in proptest::collection::vec(0.01f64..50.0, 0..20), sigma in 0.001f64..10.0) {
        let c = Configuration::new(pts).unwrap();
        let (s2, w) = s2_functional(&c, sigma);
        prop_assert!(s2 >= 0.0);
        prop_assert!((0.0..=1.0).contains(&w));
        if sigma * s2 < 700.0 {
            prop_assert!(w > 0.0);
        }
    }

    #[test]
    fn v_basis_parity(x in 0.05f64..20.0) {
        let vb = VBasis::new(p(-1.6)).unwrap();
        // V is odd, so v_k has parity (-1)^{k+1}
        prop_assert_eq!(eval_v_basis(&vb, 1, -x).unwrap(), eval_v_basis(&vb, 1, x).unwrap());
        prop_assert_eq!(eval_v_basis(&vb, 2, -x).unwrap(), -eval_v_basis(&vb, 2, x).unwrap());
    }
}
