//! Finite-N kernels on the line and circle, the rescaled circle kernel Φ_n,
//! the Bessel limit kernel Π∞, V-functions and residual checks.

mod checks;
mod circle;
mod finite;
mod limit;
mod phi;
mod vfunc;

pub use checks::{
    check_finite_recurrence, check_limit_recurrence, check_projection, convergence_profile, ConvergenceProfile,
    ProjectionQuad, ProjectionReport,
};
pub use finite::{eval_finite_kernel, FiniteKernel, Provenance, LINE_DIRECT_MAX_N};
pub use limit::{eval_limit_kernel, LimitKernel, DEFAULT_H_DIAG};
pub use phi::{eval_phi_n, RescaledCircleKernel};
pub use vfunc::{eval_V, VFlavor, VFunction};

use crate::error::{HpkError, Result};
use std::f64::consts::PI;
use std::io::Write;

/// Angle θ with e^{iθ} = (i - x)/(i + x), i.e. θ = 2 arctan x.
pub fn cayley(x: f64) -> f64 {
    2.0 * x.atan()
}

/// x = tan(θ/2); θ = ±π corresponds to the point at infinity.
pub fn cayley_inverse(theta: f64) -> Result<f64> {
    if !(theta > -PI && theta < PI) {
        return Err(HpkError::SingularCayley);
    }
    Ok((0.5 * theta).tan())
}

/// dθ/dx = 2/(1 + x²).
pub fn cayley_jacobian(x: f64) -> f64 {
    2.0 / (1.0 + x * x)
}

pub(crate) fn nonzero(x: f64) -> Result<()> {
    if x == 0.0 || !x.is_finite() {
        Err(HpkError::Domain(format!("argument {x} must be a finite nonzero real")))
    } else {
        Ok(())
    }
}

/// Writes `x,y,value` rows with 17 significant digits.
pub fn write_kernel_csv<W: Write>(out: &mut W, rows: &[(f64, f64, f64)]) -> Result<()> {
    writeln!(out, "x,y,value")?;
    for (x, y, v) in rows {
        writeln!(out, "{x:.16e},{y:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Evaluates `f` on grid × grid.
pub fn kernel_table(grid: &[f64], mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<Vec<(f64, f64, f64)>> {
    let mut rows = Vec::with_capacity(grid.len() * grid.len());
    for &x in grid {
        for &y in grid {
            rows.push((x, y, f(x, y)?));
        }
    }
    Ok(rows)
}
