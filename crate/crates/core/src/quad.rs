//! Gauss–Legendre rules, adaptive Gauss–Kronrod and graded panel helpers.

use crate::error::{HpkError, Result};
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> GaussLegendre {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_pd(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_pd(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Sum of the rule over consecutive panels given by `breaks`.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, mut f: F, breaks: &[f64]) -> f64 {
        breaks.windows(2).map(|p| self.integrate(&mut f, p[0], p[1])).sum()
    }
}

fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[7] * fc;
    let mut rg = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOpts {
    fn default() -> Self {
        AdaptiveOpts {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

/// Globally adaptive G7K15 on [a, b]; returns (value, error estimate).
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: AdaptiveOpts) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    segs.push((a, b, v, e));
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(HpkError::QuadFailure("non-finite integrand".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if segs.len() >= opts.max_intervals {
            return Err(HpkError::QuadFailure(format!(
                "error estimate {err:.3e} after {} intervals",
                segs.len()
            )));
        }
        let (imax, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (sa, sb, _, _) = segs.swap_remove(imax);
        let m = 0.5 * (sa + sb);
        if m <= sa || m >= sb {
            return Err(HpkError::QuadFailure("interval underflow".into()));
        }
        let (v1, e1) = gk15(&mut f, sa, m);
        let (v2, e2) = gk15(&mut f, m, sb);
        segs.push((sa, m, v1, e1));
        segs.push((m, sb, v2, e2));
    }
}

/// Breakpoints on [a, b] refined geometrically toward `b` (ratio in (0,1)).
/// For endpoint singularities prefer a distance coordinate graded toward 0.
pub fn graded_toward_right(a: f64, b: f64, ratio: f64, levels: usize) -> Vec<f64> {
    let mut pts = vec![a];
    let mut len = b - a;
    for _ in 0..levels {
        len *= ratio;
        pts.push(b - len);
    }
    pts.push(b);
    pts
}

/// Breakpoints on [a, b] refined geometrically toward `a`.
pub fn graded_toward_left(a: f64, b: f64, ratio: f64, levels: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = graded_toward_right(-b, -a, ratio, levels)
        .into_iter()
        .map(|x| -x)
        .collect();
    pts.reverse();
    pts
}

/// Breakpoints refined toward both ends.
pub fn graded_both(a: f64, b: f64, ratio: f64, levels: usize) -> Vec<f64> {
    let m = 0.5 * (a + b);
    let mut left = graded_toward_left(a, m, ratio, levels);
    let right = graded_toward_right(m, b, ratio, levels);
    left.pop();
    left.extend(right);
    left
}

/// Uniform breakpoints.
pub fn uniform(a: f64, b: f64, panels: usize) -> Vec<f64> {
    (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect()
}
