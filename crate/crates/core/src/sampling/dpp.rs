use super::{Configuration, SamplerConfig};
use crate::error::{HpkError, Result};
use crate::kernels::FiniteKernel;
use crate::quad::{graded_toward_left, GaussLegendre};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

const NODES_PER_CELL: usize = 2;
const MAX_CELLS: usize = 1 << 18;
const DEFICIT_TOL: f64 = 1e-4;
const MASS_SLACK: f64 = 0.01;

/// Cell of the angular grid. `side == 0`: θ ∈ [a, b]. `side == ±1`: distance
/// u = π ∓ θ to the point at infinity lies in [a, b].
#[derive(Clone, Copy, Debug)]
struct Cell {
    a: f64,
    b: f64,
    side: i8,
}

impl Cell {
    /// Point x = tan(θ/2)/n and dx/dθ at parameter value t ∈ [a, b].
    fn point(&self, t: f64, n: f64) -> (f64, f64) {
        if self.side == 0 {
            let c = (0.5 * t).cos();
            ((0.5 * t).tan() / n, 0.5 / (n * c * c))
        } else {
            let sn = (0.5 * t).sin();
            (self.side as f64 / ((0.5 * t).tan() * n), 0.5 / (n * sn * sn))
        }
    }
}

fn build_cells(n: f64, g: usize, truncation: Option<f64>) -> Vec<Cell> {
    match truncation {
        Some(r) => {
            let tmax = 2.0 * (n * r).atan();
            let h = 2.0 * tmax / g as f64;
            (0..g)
                .map(|i| Cell {
                    a: -tmax + i as f64 * h,
                    b: -tmax + (i + 1) as f64 * h,
                    side: 0,
                })
                .collect()
        }
        None => {
            let h = 2.0 * PI / g as f64;
            let edge = graded_toward_left(0.0, h, 0.5, 30);
            let mut cells = Vec::with_capacity(g + 60);
            for w in edge.windows(2).rev() {
                cells.push(Cell {
                    a: w[0],
                    b: w[1],
                    side: -1,
                });
            }
            for i in 1..g - 1 {
                cells.push(Cell {
                    a: -PI + i as f64 * h,
                    b: -PI + (i + 1) as f64 * h,
                    side: 0,
                });
            }
            for w in edge.windows(2) {
                cells.push(Cell {
                    a: w[0],
                    b: w[1],
                    side: 1,
                });
            }
            cells
        }
    }
}

/// Rank-N projection kernel given by orthonormal eigenfunctions, sampled on the
/// angle θ = 2 arctan(scale·x).
pub trait ProjectionBasis {
    fn rank(&self) -> usize;
    fn eigenfunctions(&self, x: f64) -> Vec<Complex64>;
    /// Length scale of the point cloud: the grid resolves x on scale 1/scale.
    fn angular_scale(&self) -> f64;
}

impl ProjectionBasis for FiniteKernel {
    fn rank(&self) -> usize {
        FiniteKernel::rank(self)
    }

    fn eigenfunctions(&self, x: f64) -> Vec<Complex64> {
        FiniteKernel::eigenfunctions(self, x)
    }

    fn angular_scale(&self) -> f64 {
        self.n as f64
    }
}

/// Sequential-conditioning sampler for the projection DPP of a finite kernel.
/// Eigenfunctions are tabulated on Gauss nodes of an angular grid; each conditional
/// draw picks a cell by inverse CDF of the residual diagonal, then a uniform angle in it.
#[derive(Clone, Debug)]
pub struct SpectralSampler<K: ProjectionBasis = FiniteKernel> {
    kernel: K,
    cells: Vec<Cell>,
    /// Node-major table of √(dx/dθ)·ψ_k at the nodes.
    table: Vec<Complex64>,
    weights: Vec<f64>,
    /// Cumulative cell masses of the unconditioned diagonal.
    first_cdf: Vec<f64>,
    pub mass: f64,
}

impl<K: ProjectionBasis + Clone> SpectralSampler<K> {
    pub fn new(k: &K, cfg: &SamplerConfig) -> Result<SpectralSampler<K>> {
        cfg.validate()?;
        let n = k.rank();
        if n == 0 {
            return Err(HpkError::Domain("kernel rank must be positive".into()));
        }
        let nf = n as f64;
        let scale = k.angular_scale();
        let gl = GaussLegendre::new(NODES_PER_CELL);
        let mut g = cfg.grid_points;
        let mut prev_mass = f64::NAN;
        loop {
            let cells = build_cells(scale, g, cfg.truncation);
            let mut table = Vec::with_capacity(cells.len() * NODES_PER_CELL * n);
            let mut weights = Vec::with_capacity(cells.len() * NODES_PER_CELL);
            for c in &cells {
                for (t, w) in gl.mapped(c.a, c.b) {
                    let (x, jac) = c.point(t, scale);
                    let sj = jac.sqrt();
                    table.extend(k.eigenfunctions(x).into_iter().map(|p| p * sj));
                    weights.push(w);
                }
            }
            let mut first_cdf = Vec::with_capacity(cells.len());
            let mut acc = 0.0;
            for (ci, _) in cells.iter().enumerate() {
                for j in 0..NODES_PER_CELL {
                    let node = ci * NODES_PER_CELL + j;
                    let d: f64 = table[node * n..(node + 1) * n].iter().map(|p| p.norm_sqr()).sum();
                    acc += weights[node] * d;
                }
                first_cdf.push(acc);
            }
            let deficit = (nf - acc).abs();
            let stalled = (acc - prev_mass).abs() < 1e-9 * nf;
            if deficit < DEFICIT_TOL || stalled || 2 * g > MAX_CELLS {
                if acc < nf - MASS_SLACK {
                    return Err(HpkError::GridTooCoarse {
                        mass: acc,
                        needed: nf - MASS_SLACK,
                    });
                }
                if deficit >= DEFICIT_TOL {
                    log::warn!("spectral grid mass {acc} differs from N = {n} by {deficit:.2e}");
                }
                return Ok(SpectralSampler {
                    kernel: k.clone(),
                    cells,
                    table,
                    weights,
                    first_cdf,
                    mass: acc,
                });
            }
            prev_mass = acc;
            g *= 2;
        }
    }

    pub fn cells(&self) -> usize {
        self.cells.len()
    }

    fn draw_in_cell<R: Rng + ?Sized>(&self, rng: &mut R, ci: usize) -> (f64, Vec<Complex64>) {
        let c = self.cells[ci];
        let scale = self.kernel.angular_scale();
        loop {
            let t = c.a + (c.b - c.a) * rng.random::<f64>();
            let (x, jac) = c.point(t, scale);
            if x == 0.0 || !x.is_finite() {
                continue;
            }
            let sj = jac.sqrt();
            let v = self.kernel.eigenfunctions(x).into_iter().map(|p| p * sj).collect();
            return (x, v);
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Configuration> {
        let n = self.kernel.rank();
        let nodes = self.weights.len();
        let mut resid: Vec<f64> = if n > 1 {
            (0..nodes)
                .map(|i| self.table[i * n..(i + 1) * n].iter().map(|p| p.norm_sqr()).sum())
                .collect()
        } else {
            Vec::new()
        };
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        let mut cdf = vec![0.0; self.cells.len()];
        for step in 0..n {
            let cum: &[f64] = if step == 0 {
                &self.first_cdf
            } else {
                let mut acc = 0.0;
                for (ci, slot) in cdf.iter_mut().enumerate() {
                    for j in 0..NODES_PER_CELL {
                        let node = ci * NODES_PER_CELL + j;
                        acc += self.weights[node] * resid[node];
                    }
                    *slot = acc;
                }
                &cdf
            };
            let total = *cum.last().unwrap();
            let needed = (n - step) as f64 - MASS_SLACK;
            if total < needed {
                return Err(HpkError::GridTooCoarse { mass: total, needed });
            }
            let (x, mut v) = loop {
                let u = total * rng.random::<f64>();
                let ci = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
                let (x, mut v) = self.draw_in_cell(rng, ci);
                for _ in 0..2 {
                    for e in &basis {
                        let dot: Complex64 = e.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                        for (vi, ei) in v.iter_mut().zip(e) {
                            *vi -= dot * ei;
                        }
                    }
                }
                let nv: f64 = v.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
                if nv > 1e-150 {
                    v.iter_mut().for_each(|p| *p /= nv);
                    break (x, v);
                }
            };
            points.push(x);
            if step + 1 < n {
                for (node, r) in resid.iter_mut().enumerate() {
                    let row = &self.table[node * n..(node + 1) * n];
                    let dot: Complex64 = v.iter().zip(row).map(|(a, b)| a.conj() * b).sum();
                    *r = (*r - dot.norm_sqr()).max(0.0);
                }
            }
            basis.push(std::mem::take(&mut v));
        }
        Configuration::new(points)
    }
}

/// One draw from stream 0 of the configured seed.
pub fn sample_projection_dpp<K: ProjectionBasis + Clone>(k: &K, cfg: &SamplerConfig) -> Result<Configuration> {
    let sampler = SpectralSampler::new(k, cfg)?;
    sampler.draw(&mut cfg.rng(0))
}

/// `count` draws; draw i uses stream i, so any prefix is reproducible on its own.
pub fn sample_projection_dpp_batch<K: ProjectionBasis + Clone>(
    k: &K,
    cfg: &SamplerConfig,
    count: usize,
) -> Result<Vec<Configuration>> {
    let sampler = SpectralSampler::new(k, cfg)?;
    (0..count as u64).map(|i| sampler.draw(&mut cfg.rng(i))).collect()
}
