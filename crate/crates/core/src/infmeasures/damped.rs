use super::grid::{GridSpec, RealGrid};
use super::{eval_v_basis, VBasis};
use crate::error::{HpkError, Result};
use crate::kernels::{convergence_profile, FiniteKernel, Provenance, LINE_DIRECT_MAX_N};
use crate::quad::{adaptive, AdaptiveOpts};
use crate::sampling::ProjectionBasis;
use crate::weights_opuc::HPParam;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

const NEAR_ONE: f64 = 1e-3;
const MIN_GRAM_EIG: f64 = 1e-10;
const MAGIC: &[u8; 4] = b"HPKM";

fn proxy_kernel(s_prime: f64, n: usize) -> Result<FiniteKernel> {
    if n == 0 || n > LINE_DIRECT_MAX_N {
        return Err(HpkError::Domain(format!(
            "proxy size {n} outside 1..={LINE_DIRECT_MAX_N}"
        )));
    }
    let p = HPParam::new(s_prime)?;
    p.require_probability()?;
    FiniteKernel::with_provenance(p, n, Provenance::LineDirect)
}

/// Real orthonormal eigenfunctions of the sign-corrected kernel (sgn x sgn y)^N K_N.
fn real_eigenfunctions(k: &FiniteKernel, x: f64) -> Vec<f64> {
    let sign = if k.n % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 };
    k.eigenfunctions(x).into_iter().map(|p| sign * p.re).collect()
}

fn gaussian_damping(sigma: f64, x: f64) -> f64 {
    (-sigma * x * x).exp()
}

/// Smallest proxy size from {10, 20, 40, 80} whose sup-gap to Π^(s′) on a
/// probe grid is below `tol`; the largest size when none is.
pub fn choose_proxy_size(s_prime: f64, tol: f64) -> Result<(usize, f64)> {
    let sizes = [10, 20, 40, LINE_DIRECT_MAX_N];
    let probe = [-2.0, -0.5, 0.5, 1.0, 2.0];
    let prof = convergence_profile(s_prime, &sizes, &probe)?;
    for (n, g) in prof.n.iter().zip(&prof.gaps) {
        if *g < tol {
            return Ok((*n, *g));
        }
    }
    let g = *prof.gaps.last().expect("non-empty");
    log::warn!("proxy gap {g:.3e} at N = {LINE_DIRECT_MAX_N} exceeds {tol:.1e}");
    Ok((LINE_DIRECT_MAX_N, g))
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub s_prime: f64,
    pub sigma: f64,
    pub proxy_n: usize,
    pub grid_nodes: usize,
    /// Largest eigenvalue of √(1-g)Π√(1-g).
    pub norm: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub trace_grid: f64,
    /// ∫(1 - e^{-σx²}) K_N(x, x) dx by adaptive quadrature.
    pub trace_quadrature: f64,
    pub near_one: bool,
}

/// The nonzero spectrum of √(1-g)Π√(1-g) equals that of the N×N matrix
/// ∫(1-g)ψ_kψ_l for the proxy eigenfunctions ψ_k.
pub fn contraction_norm(s_prime: f64, sigma: f64, spec: &GridSpec, proxy_n: usize) -> Result<ContractionReport> {
    if !(sigma > 0.0) {
        return Err(HpkError::Domain(format!("σ must be positive, got {sigma}")));
    }
    let k = proxy_kernel(s_prime, proxy_n)?;
    let grid = spec.build()?;
    let n = proxy_n;
    let mut b = DMatrix::<f64>::zeros(n, n);
    for (&x, &w) in grid.nodes.iter().zip(&grid.weights) {
        let psi = real_eigenfunctions(&k, x);
        let c = w * (1.0 - gaussian_damping(sigma, x));
        for i in 0..n {
            let ci = c * psi[i];
            for j in 0..=i {
                b[(i, j)] += ci * psi[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            b[(j, i)] = b[(i, j)];
        }
    }
    let trace_grid = b.trace();
    let mut eigenvalues: Vec<f64> = SymmetricEigen::try_new(b, 1e-15, 10_000)
        .ok_or_else(|| HpkError::EigenFailure("contraction matrix".into()))?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let norm = eigenvalues[0];

    let opts = AdaptiveOpts {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    };
    let f = |x: f64| (1.0 - gaussian_damping(sigma, x)) * k.density(x);
    let (inner, _) = adaptive(f, 0.0, 1.0, opts)?;
    let (outer, _) = adaptive(
        |u: f64| if u == 0.0 { 0.0 } else { f(1.0 / u) / (u * u) },
        0.0,
        1.0,
        opts,
    )?;
    let near_one = norm > 1.0 - NEAR_ONE;
    if near_one {
        log::warn!("contraction norm {norm} within {NEAR_ONE:.0e} of 1 (s' = {s_prime}, σ = {sigma})");
    }
    Ok(ContractionReport {
        s_prime,
        sigma,
        proxy_n,
        grid_nodes: grid.len(),
        norm,
        eigenvalues,
        trace_grid,
        trace_quadrature: 2.0 * (inner + outer),
        near_one,
    })
}

/// Orthonormal basis of the damped subspace as functions on ℝ*:
/// f_a(x) = e^{-σx²/2} Σ_c C[c, a] φ_c(x), with φ = (proxy eigenfunctions, v_1..v_{n_s}).
#[derive(Clone, Debug)]
pub struct DampedBasis {
    pub param: HPParam,
    pub sigma: f64,
    pub m: usize,
    kernel: FiniteKernel,
    vb: VBasis,
    coeffs: DMatrix<f64>,
}

impl DampedBasis {
    fn raw(&self, x: f64) -> Result<Vec<f64>> {
        let mut phi = real_eigenfunctions(&self.kernel, x);
        for k in 1..=self.vb.count() {
            phi.push(eval_v_basis(&self.vb, k, x)?);
        }
        let d = gaussian_damping(self.sigma, x).sqrt();
        phi.iter_mut().for_each(|p| *p *= d);
        Ok(phi)
    }

    pub fn eval_all(&self, x: f64) -> Result<Vec<f64>> {
        let phi = DVector::from_vec(self.raw(x)?);
        Ok((self.coeffs.transpose() * phi).iter().copied().collect())
    }

    pub fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        let (fx, fy) = (self.eval_all(x)?, self.eval_all(y)?);
        Ok(fx.iter().zip(&fy).map(|(a, b)| a * b).sum())
    }
}

impl ProjectionBasis for DampedBasis {
    fn rank(&self) -> usize {
        self.coeffs.ncols()
    }

    fn eigenfunctions(&self, x: f64) -> Vec<Complex64> {
        // x = 0 has zero weight in every quadrature that reaches this point
        match self.eval_all(x) {
            Ok(v) => v.into_iter().map(|a| Complex64::new(a, 0.0)).collect(),
            Err(_) => vec![Complex64::new(0.0, 0.0); self.rank()],
        }
    }

    fn angular_scale(&self) -> f64 {
        self.sigma.sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct DampedProjectionGrid {
    pub basis: DampedBasis,
    pub grid: RealGrid,
    /// P[i, j] = √w_i K(x_i, x_j) √w_j.
    pub matrix: DMatrix<f64>,
    pub idempotency_residual: f64,
    pub symmetry_residual: f64,
    pub trace: f64,
    /// Smallest eigenvalue of the m×m matrix 1 + (g-1)Π in the proxy eigenbasis.
    pub min_gram_eigenvalue: f64,
    /// ‖Q ṽ_k‖ / ‖ṽ_k‖ for each damped v-function ṽ_k.
    pub transversality: Vec<f64>,
}

/// Orthogonal projection onto e^{-σx²/2}·(span of m proxy eigenfunctions + v-basis).
///
/// The L^(s′) block is Q = √g Π(1 + (g-1)Π)⁻¹ Π √g with the inverse taken on the
/// m×m Gram matrix; the damped v-functions are then Gram–Schmidt orthogonalized against it.
pub fn damped_projection(param: HPParam, sigma: f64, spec: &GridSpec, m: usize) -> Result<DampedProjectionGrid> {
    if !(sigma > 0.0) {
        return Err(HpkError::Domain(format!("σ must be positive, got {sigma}")));
    }
    let kernel = proxy_kernel(param.s_prime, m)?;
    let vb = VBasis::new(param)?;
    let ns = vb.count();
    let grid = spec.build()?;
    let r = m + ns;
    let mut basis = DampedBasis {
        param,
        sigma,
        m,
        kernel,
        vb,
        coeffs: DMatrix::identity(r, r),
    };
    // √w_i φ_c(x_i), damped
    let mut phi = DMatrix::<f64>::zeros(grid.len(), r);
    for (i, (&x, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let sw = w.sqrt();
        for (c, v) in basis.raw(x)?.into_iter().enumerate() {
            phi[(i, c)] = sw * v;
        }
    }
    let gram = phi.transpose() * &phi;

    let g_ll = gram.view((0, 0), (m, m)).clone_owned();
    let eig = SymmetricEigen::try_new(g_ll.clone(), 1e-15, 10_000)
        .ok_or_else(|| HpkError::EigenFailure("damped Gram matrix".into()))?;
    let min_eig = eig.eigenvalues.min();
    if !(min_eig > MIN_GRAM_EIG) {
        return Err(HpkError::NearSingular(1.0 - min_eig));
    }
    // Q-block orthonormal functions: coefficients G^{-1/2}
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let mut coeffs = DMatrix::<f64>::zeros(r, r);
    coeffs.view_mut((0, 0), (m, m)).copy_from(&inv_sqrt);

    let inner = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &gram * b)[(0, 0)];
    let mut transversality = Vec::with_capacity(ns);
    for j in 0..ns {
        let mut e = DVector::<f64>::zeros(r);
        e[m + j] = 1.0;
        let norm0 = inner(&e, &e).sqrt();
        let mut q_sq = 0.0;
        for a in 0..m {
            let ca = coeffs.column(a).clone_owned();
            let p = inner(&ca, &e);
            q_sq += p * p;
        }
        transversality.push(q_sq.sqrt() / norm0);
        let mut v = e;
        for _ in 0..2 {
            for a in 0..m + j {
                let ca = coeffs.column(a).clone_owned();
                let p = inner(&ca, &v);
                v -= ca * p;
            }
        }
        let nv = inner(&v, &v).sqrt();
        if !(nv > 1e-8 * norm0) {
            return Err(HpkError::NearSingular(1.0 - nv / norm0));
        }
        coeffs.set_column(m + j, &(v / nv));
    }

    let f = &phi * &coeffs;
    let matrix = &f * f.transpose();
    let pnorm = matrix.norm();
    let idempotency_residual = (&matrix * &matrix - &matrix).norm() / pnorm;
    let symmetry_residual = (&matrix - matrix.transpose()).norm() / pnorm;
    let trace = matrix.trace();
    basis.coeffs = coeffs;
    Ok(DampedProjectionGrid {
        basis,
        grid,
        matrix,
        idempotency_residual,
        symmetry_residual,
        trace,
        min_gram_eigenvalue: min_eig,
        transversality,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalTable {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub integral: f64,
    pub rank: usize,
}

impl DampedProjectionGrid {
    pub fn diagonal(&self) -> DiagonalTable {
        let diagonal: Vec<f64> = (0..self.grid.len())
            .map(|i| self.matrix[(i, i)] / self.grid.weights[i])
            .collect();
        DiagonalTable {
            nodes: self.grid.nodes.clone(),
            weights: self.grid.weights.clone(),
            integral: self.trace,
            diagonal,
            rank: self.basis.rank(),
        }
    }
}

pub fn damped_dpp_diagonal(param: HPParam, sigma: f64, spec: &GridSpec, m: usize) -> Result<DiagonalTable> {
    Ok(damped_projection(param, sigma, spec, m)?.diagonal())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionHeader {
    pub rows: usize,
    pub cols: usize,
    pub s: f64,
    pub sigma: f64,
    pub m: usize,
    pub grid: RealGrid,
}

/// "HPKM", header length (u64 LE), JSON header, then rows·cols f64 LE in row-major order.
pub fn write_projection_binary<W: Write>(out: &mut W, p: &DampedProjectionGrid) -> Result<()> {
    let header = ProjectionHeader {
        rows: p.matrix.nrows(),
        cols: p.matrix.ncols(),
        s: p.basis.param.s,
        sigma: p.basis.sigma,
        m: p.basis.m,
        grid: p.grid.clone(),
    };
    let h = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(h.len() as u64).to_le_bytes())?;
    out.write_all(&h)?;
    let mut buf = Vec::with_capacity(8 * header.rows * header.cols);
    for i in 0..header.rows {
        for j in 0..header.cols {
            buf.extend_from_slice(&p.matrix[(i, j)].to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_projection_binary<R: Read>(input: &mut R) -> Result<(ProjectionHeader, DMatrix<f64>)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(HpkError::Format("not a projection matrix file".into()));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len =
        usize::try_from(u64::from_le_bytes(len)).map_err(|_| HpkError::Format("header length overflow".into()))?;
    let mut h = vec![0u8; len];
    input.read_exact(&mut h)?;
    let header: ProjectionHeader = serde_json::from_slice(&h)?;
    let mut data = vec![0u8; 8 * header.rows * header.cols];
    input.read_exact(&mut data)?;
    let vals: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let m = DMatrix::from_row_slice(header.rows, header.cols, &vals);
    Ok((header, m))
}
