use crate::error::{HpkError, Result};
use crate::quad::{graded_toward_left, GaussLegendre};
use serde::{Deserialize, Serialize};

/// Layout of a symmetric quadrature grid on ℝ*.
///
/// On (0, R] panels have width min(x² + h², 1) with h = 1/max(resolution, t_max):
/// this resolves both the kernel oscillation near 0 (spacing ~ π(x² + N⁻²)) and
/// the sin(1/x)-type oscillation of the v-functions, which is uniform in t = 1/x.
/// With `tail`, [R, ∞) is added through x = R·u⁻⁴, which keeps x^{-1-2s′} tails
/// integrable with a regular integrand for every s′ > -1/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    pub t_max: f64,
    pub r_trunc: f64,
    pub tail: bool,
    pub order: usize,
}

impl GridSpec {
    /// Grid for Gaussian-damped functions: truncation where e^{-σx²} < e^{-80}.
    pub fn damped(resolution: usize, sigma: f64) -> GridSpec {
        GridSpec {
            resolution,
            t_max: 60.0,
            r_trunc: (80.0 / sigma).sqrt().max(2.0),
            tail: false,
            order: 8,
        }
    }

    /// Grid for undamped kernels with slowly decaying diagonal.
    pub fn with_tail(resolution: usize) -> GridSpec {
        GridSpec {
            resolution,
            t_max: 60.0,
            r_trunc: 10.0,
            tail: true,
            order: 8,
        }
    }

    pub fn build(&self) -> Result<RealGrid> {
        if self.resolution == 0 || !(self.t_max >= 1.0) || !(self.r_trunc > 1.0) || self.order < 2 {
            return Err(HpkError::Domain(format!("bad grid spec {self:?}")));
        }
        let gl = GaussLegendre::new(self.order);
        let h = 1.0 / (self.resolution as f64).max(self.t_max);
        let mut pos: Vec<(f64, f64)> = Vec::new();
        let mut a = 0.0;
        while a < self.r_trunc {
            let b = (a + (a * a + h * h).min(1.0)).min(self.r_trunc);
            pos.extend(gl.mapped(a, b));
            a = b;
        }
        if self.tail {
            let r = self.r_trunc;
            let br = graded_toward_left(0.0, 1.0, 0.5, 40);
            for w in br.windows(2) {
                for (u, wu) in gl.mapped(w[0], w[1]) {
                    let u4 = u.powi(4);
                    pos.push((r / u4, wu * 4.0 * r / (u4 * u)));
                }
            }
        }
        pos.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut nodes = Vec::with_capacity(2 * pos.len());
        let mut weights = Vec::with_capacity(2 * pos.len());
        for &(x, w) in pos.iter().rev() {
            nodes.push(-x);
            weights.push(w);
        }
        for &(x, w) in &pos {
            nodes.push(x);
            weights.push(w);
        }
        Ok(RealGrid {
            spec: self.clone(),
            nodes,
            weights,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub spec: GridSpec,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RealGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}
