//! Frame diagnostics: bounds, excess, duals, tight frames, frame operators.
//!
//! A family "is a frame" here means frame for the full space `C^d`; the
//! frame-sequence bounds (relative to the span) are what the report carries
//! when the span is deficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::VectorFamily;
use crate::linalg::{
    self, inv_sqrt_psd, numerical_rank, operator_norm, pinv, spectral_factorization, sqrt_psd,
    CMatrix, Tolerance,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    #[serde(rename = "lower_bound_A")]
    pub lower_bound_a: f64,
    #[serde(rename = "upper_bound_B")]
    pub upper_bound_b: f64,
    pub is_frame: bool,
    pub is_tight: bool,
    pub is_riesz_basis: bool,
    pub excess: usize,
    pub span_dim: usize,
}

/// Frame bounds and rank diagnostics of a family.
///
/// `upper_bound_B` is the largest squared singular value of the synthesis
/// matrix; `lower_bound_A` is the smallest squared singular value above the
/// rank threshold, i.e. the frame-sequence bound on the span.
pub fn frame_bounds(family: &VectorFamily, tol: &Tolerance) -> Result<FrameReport> {
    let u = family.synthesis_matrix();
    let sv = linalg::svd(&u)?.singular_values;
    let rank = numerical_rank(&sv, tol.rank_rtol);
    let upper = sv.first().map(|s| s * s).unwrap_or(0.0);
    let lower = if rank == 0 {
        0.0
    } else {
        sv[rank - 1] * sv[rank - 1]
    };
    let is_frame = rank == family.dim();
    let is_tight = rank > 0 && (upper - lower).abs() <= tol.equality_atol * upper;
    Ok(FrameReport {
        lower_bound_a: lower,
        upper_bound_b: upper,
        is_frame,
        is_tight,
        is_riesz_basis: is_frame && family.len() == rank,
        excess: family.len() - rank,
        span_dim: rank,
    })
}

/// `S = U U^H`, built from the synthesis matrix with no shortcut.
pub fn frame_operator(family: &VectorFamily) -> CMatrix {
    let u = family.synthesis_matrix();
    &u * u.adjoint()
}

/// Residual of the duality identity `sum_k <f, g_k> f_k = f` on `span(F)`,
/// measured as an operator norm.
pub fn duality_residual(
    family: &VectorFamily,
    dual: &VectorFamily,
    tol: &Tolerance,
) -> Result<f64> {
    if dual.dim() != family.dim() || dual.len() != family.len() {
        return Err(Error::LengthMismatch(format!(
            "family is {} vectors in C^{}, proposed dual is {} vectors in C^{}",
            family.len(),
            family.dim(),
            dual.len(),
            dual.dim()
        )));
    }
    let uf = family.synthesis_matrix();
    let ug = dual.synthesis_matrix();
    let span = linalg::orthonormal_range(&uf, tol)?;
    let projector = &span * span.adjoint();
    let d = family.dim();
    let mixed = &uf * ug.adjoint();
    Ok(operator_norm(&((mixed - CMatrix::identity(d, d)) * projector)))
}

/// Canonical dual `g_k = S^+ f_k` (pseudo-inverse on the span).
pub fn canonical_dual(family: &VectorFamily, tol: &Tolerance) -> Result<VectorFamily> {
    let u = family.synthesis_matrix();
    let sv = linalg::svd(&u)?.singular_values;
    if numerical_rank(&sv, tol.rank_rtol) == 0 {
        return Err(Error::DegenerateFamily);
    }
    let s = frame_operator(family);
    let dual_matrix = pinv(&s, tol)? * &u;
    VectorFamily::from_columns(
        &dual_matrix,
        format!("canonical dual of {}", family.label()),
    )
}

/// Checked constructor for a non-canonical dual: validates the duality
/// identity on the span and returns the proposal as a family.
pub fn alternate_dual(
    family: &VectorFamily,
    proposal: &CMatrix,
    tol: &Tolerance,
) -> Result<VectorFamily> {
    if proposal.nrows() != family.dim() || proposal.ncols() != family.len() {
        return Err(Error::LengthMismatch(format!(
            "family synthesis is {}x{}, proposal is {}x{}",
            family.dim(),
            family.len(),
            proposal.nrows(),
            proposal.ncols()
        )));
    }
    let candidate =
        VectorFamily::from_columns(proposal, format!("alternate dual of {}", family.label()))?;
    let residual = duality_residual(family, &candidate, tol)?;
    if residual > tol.residual_atol {
        return Err(Error::NotADual {
            residual,
            allowed: tol.residual_atol,
        });
    }
    Ok(candidate)
}

/// Canonical tight frame `{S^{-1/2} f_k}` of a full-span frame.
pub fn canonical_tight(family: &VectorFamily, tol: &Tolerance) -> Result<VectorFamily> {
    let s = frame_operator(family);
    let root = inv_sqrt_psd(&s, tol)?;
    let u = family.synthesis_matrix();
    VectorFamily::from_columns(&(root * u), format!("canonical tight of {}", family.label()))
}

/// Factor a Hermitian positive definite matrix as the frame operator of a
/// family (columns of the principal square root).
pub fn frame_operator_factorization(t: &CMatrix, tol: &Tolerance) -> Result<VectorFamily> {
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    let (values, _) = spectral_factorization(t, tol).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::NotAFrameOperator(msg),
        other => other,
    })?;
    let largest = values.first().cloned().unwrap_or(0.0);
    let smallest = values.last().cloned().unwrap_or(0.0);
    if smallest <= tol.rank_rtol * largest.max(0.0) {
        return Err(Error::NotAFrameOperator(format!(
            "not positive definite: smallest eigenvalue {smallest:.3e} with largest {largest:.3e}"
        )));
    }
    let root = sqrt_psd(t, tol)?;
    VectorFamily::from_columns(&root, "frame operator square-root factor")
}
