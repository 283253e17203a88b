//! Decide whether a finite family can be written as the orbit `{T^n f_1}`
//! of a bounded operator, and reconstruct the unique candidate operator.
//!
//! The candidate is the mixed frame operator `T f = sum_k <f, g_k> f_{k+1}`
//! built from a dual family `{g_k}`. At a finite truncation the sum stops at
//! `k = N-1` because `f_{N+1}` does not exist; the omitted term is controlled
//! by `|f_N| |g_N|`, which decays geometrically for the spectral model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::VectorFamily;
use crate::frames::{self, frame_bounds};
use crate::linalg::{self, cr, operator_norm, CMatrix, Tolerance};

#[derive(Debug, Clone, Serialize)]
pub struct RepresentabilityVerdict {
    pub representable: bool,
    pub max_shift_residual: f64,
    pub kernel_invariance_residual: f64,
    #[serde(rename = "norm_T")]
    pub norm_t: f64,
    /// Lower norm bound for the representing operator of an infinite frame;
    /// reported, and meaningful only for certified-tail truncations.
    pub norm_lo: f64,
    /// `sqrt(B/A)` from the frame bounds of the family.
    pub norm_hi: f64,
    #[serde(rename = "residuals")]
    pub shift_residuals: Vec<f64>,
    #[serde(skip)]
    pub candidate_t: CMatrix,
}

/// The truncated mixed frame operator `T = sum_{k<N} f_{k+1} g_k^H`.
///
/// `dual` must be a validated dual of `family` (see
/// [`frames::alternate_dual`] and [`frames::canonical_dual`]); this
/// constructor checks shapes only.
pub fn candidate_operator(family: &VectorFamily, dual: &VectorFamily) -> Result<CMatrix> {
    if dual.dim() != family.dim() || dual.len() != family.len() {
        return Err(Error::LengthMismatch(format!(
            "family is {} vectors in C^{}, dual is {} vectors in C^{}",
            family.len(),
            family.dim(),
            dual.len(),
            dual.dim()
        )));
    }
    let n = family.len();
    if n < 2 {
        return Err(Error::InsufficientTruncation {
            len: n,
            required: 2,
        });
    }
    let d = family.dim();
    let mut t = CMatrix::zeros(d, d);
    for k in 0..n - 1 {
        t += family.vector(k + 1) * dual.vector(k).adjoint();
    }
    Ok(t)
}

/// Check the shift property `T f_j = f_{j+1}` for all `j < N` and assemble
/// the full verdict (residuals, kernel test, norm bounds).
pub fn check_shift_property(
    family: &VectorFamily,
    t: &CMatrix,
    tol: &Tolerance,
) -> Result<RepresentabilityVerdict> {
    if t.nrows() != family.dim() || t.ncols() != family.dim() {
        return Err(Error::LengthMismatch(format!(
            "operator is {}x{}, family lives in C^{}",
            t.nrows(),
            t.ncols(),
            family.dim()
        )));
    }
    let n = family.len();
    if n < 2 {
        return Err(Error::InsufficientTruncation {
            len: n,
            required: 2,
        });
    }
    let report = frame_bounds(family, tol)?;
    if report.span_dim == 0 {
        return Err(Error::DegenerateFamily);
    }
    let mut shift_residuals = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        shift_residuals.push((t * family.vector(j) - family.vector(j + 1)).norm());
    }
    let max_shift_residual = shift_residuals.iter().cloned().fold(0.0_f64, f64::max);
    let representable = max_shift_residual <= tol.residual_atol * family.max_norm();
    Ok(RepresentabilityVerdict {
        representable,
        max_shift_residual,
        kernel_invariance_residual: kernel_shift_invariance(family, tol)?,
        norm_t: operator_norm(t),
        norm_lo: 1.0,
        norm_hi: (report.upper_bound_b / report.lower_bound_a).sqrt(),
        shift_residuals,
        candidate_t: t.clone(),
    })
}

/// How far the synthesis kernel is from being invariant under the right
/// shift `(c_1, c_2, ...) -> (0, c_1, c_2, ...)`.
///
/// Only kernel vectors with negligible last coordinate take part (their
/// shift does not reference the missing `f_{N+1}`); they are exactly the
/// kernel `K` of the synthesis matrix augmented with the row `e_N^T`. The
/// residual is the scale-invariant operator norm `|U Shift P_K| / max_k
/// |f_k|` with `P_K` the orthogonal projector onto `K`; it is `0` exactly
/// when the shifted kernel stays inside the kernel (and when `K` is empty).
///
/// `U Shift` is the synthesis of the left-shifted family `f_2, .., f_N, 0`,
/// and `P_K = I - W W^H` over a row-space basis `W` of the augmented
/// matrix, so the cost stays linear in the family length; the kernel basis
/// itself (dimension `N - rank`) is never materialized.
pub fn kernel_shift_invariance(family: &VectorFamily, tol: &Tolerance) -> Result<f64> {
    let n = family.len();
    if n < 2 {
        return Err(Error::InsufficientTruncation {
            len: n,
            required: 2,
        });
    }
    let max_norm = family.max_norm();
    if max_norm == 0.0 {
        return Ok(0.0);
    }
    let d = family.dim();
    let mut augmented = CMatrix::zeros(d + 1, n);
    augmented
        .view_mut((0, 0), (d, n))
        .copy_from(&family.synthesis_matrix());
    augmented[(d, n - 1)] = cr(1.0);
    let f = linalg::svd(&augmented)?;
    let rank = f.rank(tol.rank_rtol);
    if rank == n {
        return Ok(0.0);
    }
    let w = f.v.columns(0, rank).into_owned();
    let mut shifted = CMatrix::zeros(d, n);
    for k in 1..n {
        shifted.set_column(k - 1, family.vector(k));
    }
    let projected = &shifted * &w * w.adjoint();
    Ok(operator_norm(&(shifted - projected)) / max_norm)
}

/// Orthonormal basis of the synthesis-kernel vectors whose last coordinate
/// vanishes. Combinations `g'_k = g_k + conj(c_k) w` over these vectors give
/// the alternate duals whose candidate operators are free of the truncation
/// term `c_{N-1} f_N w^H`.
pub fn restricted_kernel_basis(family: &VectorFamily, tol: &Tolerance) -> Result<CMatrix> {
    let n = family.len();
    if n < 2 {
        return Err(Error::InsufficientTruncation {
            len: n,
            required: 2,
        });
    }
    let d = family.dim();
    let mut augmented = CMatrix::zeros(d + 1, n);
    augmented
        .view_mut((0, 0), (d, n))
        .copy_from(&family.synthesis_matrix());
    augmented[(d, n - 1)] = cr(1.0);
    linalg::nullspace_basis(&augmented, tol)
}

/// Operator-norm gap between the candidate operators built from two duals.
/// A gap above `residual_atol` certifies that no bounded representation
/// exists; for representable families all duals give the same candidate.
pub fn dual_falsification(
    family: &VectorFamily,
    dual1: &VectorFamily,
    dual2: &VectorFamily,
    tol: &Tolerance,
) -> Result<f64> {
    for dual in [dual1, dual2] {
        let residual = frames::duality_residual(family, dual, tol)?;
        if residual > tol.residual_atol {
            return Err(Error::NotADual {
                residual,
                allowed: tol.residual_atol,
            });
        }
    }
    let t1 = candidate_operator(family, dual1)?;
    let t2 = candidate_operator(family, dual2)?;
    Ok(operator_norm(&(t1 - t2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSandwich {
    pub lo_ok: bool,
    pub hi_ok: bool,
    #[serde(rename = "norm_T")]
    pub norm_t: f64,
    pub hi_bound: f64,
}

/// Check `1 <= |T| <= sqrt(B/A)` for a full-span frame.
///
/// The upper bound holds for any representing operator of a frame; the lower
/// bound is a statement about infinite families, so `lo_ok` is reported for
/// the caller to interpret (certified-tail truncations) rather than
/// enforced.
pub fn norm_sandwich(family: &VectorFamily, t: &CMatrix, tol: &Tolerance) -> Result<NormSandwich> {
    let report = frame_bounds(family, tol)?;
    if !report.is_frame {
        return Err(Error::InvalidInput(
            "norm sandwich needs a full-span frame".into(),
        ));
    }
    let norm_t = operator_norm(t);
    let hi_bound = (report.upper_bound_b / report.lower_bound_a).sqrt();
    Ok(NormSandwich {
        lo_ok: norm_t >= 1.0 - tol.equality_atol,
        hi_ok: norm_t <= hi_bound + tol.equality_atol,
        norm_t,
        hi_bound,
    })
}
