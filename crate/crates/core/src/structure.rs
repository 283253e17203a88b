//! Structure of the representing operator: image/null chains, tail-space
//! stabilization, block removal, direct sums, and index swaps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::VectorFamily;
use crate::frames::{canonical_dual, frame_bounds, FrameReport};
use crate::linalg::{self, cr, operator_norm, CMatrix, Tolerance};
use crate::represent::{candidate_operator, check_shift_property, RepresentabilityVerdict};
use crate::spectral::DiagonalModel;

/// Largest principal-angle sine two computed subspaces may differ by and
/// still count as equal.
pub const SUBSPACE_ANGLE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    /// `rank T^k` for `k = 0..=q_T`.
    pub image_ranks: Vec<usize>,
    /// First `k` with `rank T^k == rank T^{k+1}`.
    #[serde(rename = "q_T")]
    pub q_t: usize,
    /// `dim ker T^k` for `k = 0..=null_length`.
    pub null_dims: Vec<usize>,
    /// First `k` with `dim ker T^k == dim ker T^{k+1}`.
    pub null_length: usize,
}

/// Stabilization indices of the image chain `ran T ⊇ ran T² ⊇ ...` and the
/// null chain `ker T ⊆ ker T² ⊆ ...`.
///
/// The two chains are computed by independent routes: image ranks by
/// re-orthonormalizing `T · (basis of ran T^k)`, null dimensions by taking
/// kernels of `(I - P_k) T` where `P_k` projects onto `ker T^k`. For a
/// square matrix both stabilize at the same index.
pub fn chain_report(t: &CMatrix, tol: &Tolerance, max_k: usize) -> Result<ChainReport> {
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput(format!(
            "chain analysis needs a square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    if max_k == 0 {
        return Err(Error::InvalidParams("max_k must be at least 1".into()));
    }
    let d = t.nrows();
    // iterated products of a nilpotent direction end up as pure rounding
    // noise; a rank cut relative only to each product's own largest singular
    // value would resurrect that noise as rank 1, so the cut is floored at
    // the operator's scale
    let scale = operator_norm(t);
    let floored_rank = |singular_values: &[f64]| -> usize {
        let smax = singular_values.iter().cloned().fold(0.0_f64, f64::max);
        if smax <= 0.0 {
            return 0;
        }
        let cut = (tol.rank_rtol * smax).max(tol.rank_rtol * scale);
        singular_values.iter().filter(|&&s| s > cut).count()
    };

    let mut image_ranks = vec![d];
    let mut range_basis = CMatrix::identity(d, d);
    let mut q_t = None;
    for k in 1..=max_k {
        let f = linalg::svd(&(t * &range_basis))?;
        let rank = floored_rank(&f.singular_values);
        range_basis = f.u.columns(0, rank).into_owned();
        if rank == *image_ranks.last().unwrap() {
            q_t = Some(k - 1);
            break;
        }
        image_ranks.push(rank);
    }

    let mut null_dims = vec![0usize];
    let mut kernel_basis = CMatrix::zeros(d, 0);
    let mut null_length = None;
    let eye = CMatrix::identity(d, d);
    for k in 1..=max_k {
        // ker T^{k+1} = { x : T x in ker T^k }
        let restricted = (&eye - &kernel_basis * kernel_basis.adjoint()) * t;
        let f = linalg::svd(&restricted)?;
        let rank = floored_rank(&f.singular_values);
        let row_space = f.v.columns(0, rank).into_owned();
        kernel_basis = linalg::orthonormal_complement(&row_space)?;
        let dim = kernel_basis.ncols();
        if dim == *null_dims.last().unwrap() {
            null_length = Some(k - 1);
            break;
        }
        null_dims.push(dim);
    }

    match (q_t, null_length) {
        (Some(q_t), Some(null_length)) => Ok(ChainReport {
            image_ranks,
            q_t,
            null_dims,
            null_length,
        }),
        _ => Err(Error::NoStabilization {
            max_k,
            image_ranks,
            null_dims,
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailSpaceReport {
    #[serde(rename = "start_index_N")]
    pub start_index_n: usize,
    /// Dimension of `V = span { f_k : k > N }` (0-based: vectors `N..`).
    #[serde(rename = "V_dim")]
    pub v_dim: usize,
    pub codim: usize,
    /// `(A, B)` of the tail family `{ f_k : k > N + shift }` as a frame for
    /// `V`, for `shift = 0..=l`; `A = 0` when the shifted tail fails to
    /// span `V`.
    pub per_shift_frame_bounds: Vec<(f64, f64)>,
    /// All `l` shifted tails span the same `V` with positive lower bound.
    pub stable: bool,
}

/// Examine whether the tail spaces of an orbit family have stabilized after
/// index `n` (0-based): the spans of `{f_k : k >= n + shift}` must agree for
/// `shift = 0..=l` and each must be a frame for the common space.
pub fn tail_space_report(
    family: &VectorFamily,
    t: &CMatrix,
    n: usize,
    l: usize,
    tol: &Tolerance,
) -> Result<TailSpaceReport> {
    if l == 0 {
        return Err(Error::InvalidParams("l must be at least 1".into()));
    }
    let len = family.len();
    let required = n + l + family.dim();
    if len < required {
        return Err(Error::InsufficientTruncation { len, required });
    }
    if t.nrows() != family.dim() || t.ncols() != family.dim() {
        return Err(Error::LengthMismatch(format!(
            "operator is {}x{}, family lives in C^{}",
            t.nrows(),
            t.ncols(),
            family.dim()
        )));
    }
    let max_norm = family.max_norm();
    for j in 0..len - 1 {
        let residual = (t * family.vector(j) - family.vector(j + 1)).norm();
        if residual > tol.residual_atol * max_norm.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "family is not the orbit of the supplied operator (residual {residual:.3e} at index {j})"
            )));
        }
    }

    let tail_synthesis = |shift: usize| -> CMatrix {
        let cols = len - n - shift;
        let mut m = CMatrix::zeros(family.dim(), cols);
        for (c, k) in (n + shift..len).enumerate() {
            m.set_column(c, family.vector(k));
        }
        m
    };

    let base_basis = linalg::orthonormal_range(&tail_synthesis(0), tol)?;
    let v_dim = base_basis.ncols();
    let mut per_shift_frame_bounds = Vec::with_capacity(l + 1);
    let mut stable = true;
    for shift in 0..=l {
        let synthesis = tail_synthesis(shift);
        let svd = linalg::svd(&synthesis)?;
        let rank = linalg::numerical_rank(&svd.singular_values, tol.rank_rtol);
        let b = svd.singular_values.first().map_or(0.0, |s| s * s);
        let a = if rank == v_dim && v_dim > 0 {
            let s = svd.singular_values[rank - 1];
            s * s
        } else {
            0.0
        };
        per_shift_frame_bounds.push((a, b));
        if a <= 0.0 {
            stable = false;
        }
        if shift > 0 {
            let basis = linalg::orthonormal_range(&synthesis, tol)?;
            if basis.ncols() != v_dim
                || linalg::subspace_sine(&base_basis, &basis) > SUBSPACE_ANGLE_TOL
            {
                stable = false;
            }
        }
    }
    Ok(TailSpaceReport {
        start_index_n: n,
        v_dim,
        codim: family.dim() - v_dim,
        per_shift_frame_bounds,
        stable,
    })
}

/// Smallest `n` whose tail report is stable, scanning while the truncation
/// supports the check. `None` when no admissible `n` stabilizes.
pub fn tail_stabilization_index(
    family: &VectorFamily,
    t: &CMatrix,
    l: usize,
    tol: &Tolerance,
) -> Result<Option<usize>> {
    let mut n = 0;
    while n + l + family.dim() <= family.len() {
        if tail_space_report(family, t, n, l, tol)?.stable {
            return Ok(Some(n));
        }
        n += 1;
    }
    Ok(None)
}

/// Frame report of the family with the 1-based block `n+1 ..= n+l-1`
/// removed, i.e. keeping indices `1..=n` and `n+l..`. With `l = 1` nothing
/// is removed.
pub fn block_removal_check(
    family: &VectorFamily,
    n: usize,
    l: usize,
    tol: &Tolerance,
) -> Result<FrameReport> {
    if n == 0 || l == 0 {
        return Err(Error::InvalidParams(
            "block removal needs n >= 1 and l >= 1".into(),
        ));
    }
    if n + l > family.len() {
        return Err(Error::IndexOutOfRange {
            index: n + l,
            len: family.len(),
        });
    }
    let label = format!("{} minus block {}..{}", family.label(), n + 1, n + l - 1);
    let kept = family.filtered(|k| k < n || k >= n + l - 1, &label)?;
    frame_bounds(&kept, tol)
}

/// Concatenate two families inside `C^(r+dH)` where `r = dim span E`: the
/// first family re-expressed in an orthonormal basis of its span, padded
/// with zeros, followed by the second family padded on the left.
///
/// The first family must be a basis of its span.
pub fn direct_sum_construct(e: &VectorFamily, h: &VectorFamily) -> Result<VectorFamily> {
    let tol = Tolerance::default();
    if e.is_empty() || h.is_empty() {
        return Err(Error::InvalidInput("both summands must be nonempty".into()));
    }
    let u_e = e.synthesis_matrix();
    let svd = linalg::svd(&u_e)?;
    let rank = linalg::numerical_rank(&svd.singular_values, tol.rank_rtol);
    if rank != e.len() {
        return Err(Error::InvalidInput(format!(
            "first family must be a basis of its span (rank {rank} for {} vectors)",
            e.len()
        )));
    }
    let basis = linalg::orthonormal_range(&u_e, &tol)?;
    let coords = basis.adjoint() * &u_e; // rank x N_E
    let dim = rank + h.dim();
    let mut vectors = Vec::with_capacity(e.len() + h.len());
    for k in 0..e.len() {
        let mut v = crate::linalg::CVector::zeros(dim);
        v.rows_mut(0, rank).copy_from(&coords.column(k));
        vectors.push(v);
    }
    for k in 0..h.len() {
        let mut v = crate::linalg::CVector::zeros(dim);
        v.rows_mut(rank, h.dim()).copy_from(h.vector(k));
        vectors.push(v);
    }
    let label = format!("{} (+) {}", e.label(), h.label());
    VectorFamily::new(dim, &label, vectors)
}

/// Build the orbit of the block operator that walks a scaled shift through
/// `basis_dim` coordinates, hands the last one to the model generator, and
/// then acts diagonally: the orbit is a finite linearly independent head
/// followed by a frame tail.
///
/// Returns the orbit family, the operator, and the depth used. The depth
/// adds `basis_dim` head steps to the model's certified depth; the tail
/// certificate is scaled by `basis_scale^(2(basis_dim-1))`.
pub fn direct_sum_orbit(
    basis_dim: usize,
    basis_scale: f64,
    model: &DiagonalModel,
    tail_tol: f64,
    label: &str,
) -> Result<(VectorFamily, CMatrix, usize)> {
    if basis_dim == 0 {
        return Err(Error::InvalidParams("basis_dim must be at least 1".into()));
    }
    if !(basis_scale > 0.0) || !basis_scale.is_finite() {
        return Err(Error::InvalidParams(format!(
            "basis_scale must be positive and finite, got {basis_scale}"
        )));
    }
    let dim = basis_dim + model.dim();
    let mut t = CMatrix::zeros(dim, dim);
    for k in 0..basis_dim - 1 {
        t[(k + 1, k)] = cr(basis_scale);
    }
    let phi_model = model.generator();
    for i in 0..model.dim() {
        t[(basis_dim + i, basis_dim - 1)] = phi_model[i];
        t[(basis_dim + i, basis_dim + i)] = model.lambdas()[i];
    }
    let depth = basis_dim + model.certified_depth(tail_tol)?;
    let mut phi = crate::linalg::CVector::zeros(dim);
    phi[0] = cr(1.0);
    let family = VectorFamily::orbit(&t, &phi, depth, label)?;
    Ok((family, t, depth))
}

/// Swap the 1-based entries `l` and `lp` of the family, recompute the
/// canonical dual and candidate operator, and decide representability.
///
/// The falsification criterion additionally needs the untouched vectors
/// `{f_k : k != l-1, l, lp-1, lp}` to span; when they do not, the verdict
/// is still computed and returned inside [`Error::SpanConditionFailed`]
/// so the caller can inspect the unsupported case.
pub fn swap_experiment(
    family: &VectorFamily,
    l: usize,
    lp: usize,
    tol: &Tolerance,
) -> Result<RepresentabilityVerdict> {
    let swapped = family.swapped(l, lp)?;
    let dual = canonical_dual(&swapped, tol)?;
    let t = candidate_operator(&swapped, &dual)?;
    let verdict = check_shift_property(&swapped, &t, tol)?;

    let excluded = [l.wrapping_sub(1), l, lp.wrapping_sub(1), lp];
    let kept = family.filtered(
        |k| !excluded.contains(&(k + 1)),
        &format!("{} span probe", family.label()),
    )?;
    let span_dim = if kept.is_empty() {
        0
    } else {
        let svd = linalg::svd(&kept.synthesis_matrix())?;
        linalg::numerical_rank(&svd.singular_values, tol.rank_rtol)
    };
    if span_dim < family.dim() {
        return Err(Error::SpanConditionFailed {
            span_dim,
            dim: family.dim(),
            verdict: Box::new(verdict),
        });
    }
    Ok(verdict)
}

/// Whether `T` restricted to the invariant subspace spanned by the
/// orthonormal columns of `v_basis` is surjective and injective.
///
/// Returns `(invariant, surjective, injective)`; the last two are computed
/// from the rank of the compressed matrix `V^H T V`, which represents the
/// restriction when the subspace is invariant.
pub fn surjectivity_injectivity_on_tail(
    t: &CMatrix,
    v_basis: &CMatrix,
    tol: &Tolerance,
) -> Result<(bool, bool, bool)> {
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput(format!(
            "restriction analysis needs a square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    if v_basis.nrows() != t.nrows() {
        return Err(Error::LengthMismatch(format!(
            "subspace basis lives in C^{}, operator acts on C^{}",
            v_basis.nrows(),
            t.nrows()
        )));
    }
    let m = v_basis.ncols();
    if m == 0 {
        return Ok((true, true, true));
    }
    let gram_residual =
        operator_norm(&(v_basis.adjoint() * v_basis - CMatrix::identity(m, m)));
    if gram_residual > tol.residual_atol {
        return Err(Error::InvalidInput(format!(
            "subspace basis is not orthonormal (residual {gram_residual:.3e})"
        )));
    }
    let eye = CMatrix::identity(t.nrows(), t.nrows());
    let leak = operator_norm(&((&eye - v_basis * v_basis.adjoint()) * t * v_basis));
    let invariant = leak <= tol.residual_atol * operator_norm(t).max(1.0);
    let compressed = v_basis.adjoint() * t * v_basis;
    let svd = linalg::svd(&compressed)?;
    let rank = linalg::numerical_rank(&svd.singular_values, tol.rank_rtol);
    Ok((invariant, rank == m, rank == m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVector, C64};
    use crate::spectral::sample_carleson_sequence;

    fn e(dim: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        v[k] = cr(1.0);
        v
    }

    fn jordan_nilpotent(dim: usize) -> CMatrix {
        let mut t = CMatrix::zeros(dim, dim);
        for k in 0..dim - 1 {
            t[(k + 1, k)] = cr(1.0);
        }
        t
    }

    #[test]
    fn invertible_operator_has_zero_chain_indices() {
        let tol = Tolerance::default();
        let mut t = CMatrix::identity(3, 3);
        t[(0, 2)] = C64::new(0.3, -0.2);
        let report = chain_report(&t, &tol, 8).unwrap();
        assert_eq!(report.q_t, 0);
        assert_eq!(report.null_length, 0);
        assert_eq!(report.image_ranks, vec![3]);
        assert_eq!(report.null_dims, vec![0]);
    }

    #[test]
    fn nilpotent_jordan_block_chains() {
        let tol = Tolerance::default();
        let report = chain_report(&jordan_nilpotent(3), &tol, 8).unwrap();
        assert_eq!(report.image_ranks, vec![3, 2, 1, 0]);
        assert_eq!(report.q_t, 3);
        assert_eq!(report.null_dims, vec![0, 1, 2, 3]);
        assert_eq!(report.null_length, 3);
    }

    #[test]
    fn rank_deficient_diagonal_stabilizes_at_one() {
        let tol = Tolerance::default();
        let t = CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.5), cr(0.25), cr(0.0)]));
        let report = chain_report(&t, &tol, 8).unwrap();
        assert_eq!(report.q_t, 1);
        assert_eq!(report.null_length, 1);
        assert_eq!(report.image_ranks, vec![3, 2]);
        assert_eq!(report.null_dims, vec![0, 1]);
    }

    #[test]
    fn chain_report_errors_when_budget_too_small() {
        let tol = Tolerance::default();
        let err = chain_report(&jordan_nilpotent(4), &tol, 2).unwrap_err();
        assert!(matches!(err, Error::NoStabilization { max_k: 2, .. }));
    }

    #[test]
    fn q_equals_null_length_on_mixed_blocks() {
        let tol = Tolerance::default();
        // direct sum of a 2-step nilpotent block and an invertible one
        let mut t = CMatrix::zeros(5, 5);
        t[(1, 0)] = cr(1.0);
        t[(2, 1)] = cr(1.0);
        t[(3, 3)] = cr(0.7);
        t[(4, 4)] = C64::new(0.0, 0.9);
        let report = chain_report(&t, &tol, 16).unwrap();
        assert_eq!(report.q_t, report.null_length);
        assert_eq!(report.q_t, 3);
    }

    #[test]
    fn deep_head_chains_survive_degenerate_products() {
        // iterated products of a depth-5 head carry repeated singular
        // values, which used to trip the svd backend into a mispaired
        // factorization and truncate the image chain two steps early
        let tol = Tolerance::default();
        for alpha in [2.0, 3.0] {
            let model = sample_carleson_sequence(alpha, 2).unwrap();
            let (family, t, _) = direct_sum_orbit(5, 1.0, &model, 1e-10, "deep head").unwrap();
            let report = chain_report(&t, &tol, 24).unwrap();
            assert_eq!(report.q_t, 5);
            assert_eq!(report.null_length, 5);
            assert_eq!(
                tail_stabilization_index(&family, &t, 1, &tol).unwrap(),
                Some(5)
            );
        }
    }

    #[test]
    fn spectral_orbit_tail_is_stable_from_the_start() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 3).unwrap();
        let (family, _) = model.orbit(1e-8, "orbit").unwrap();
        let t = model.operator_matrix();
        let report = tail_space_report(&family, &t, 0, 2, &tol).unwrap();
        assert!(report.stable);
        assert_eq!(report.v_dim, 3);
        assert_eq!(report.codim, 0);
        for (a, b) in &report.per_shift_frame_bounds {
            assert!(*a > 0.0 && b >= a);
        }
        assert_eq!(
            tail_stabilization_index(&family, &t, 2, &tol).unwrap(),
            Some(0)
        );
    }

    #[test]
    fn nilpotent_head_delays_stabilization() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 2).unwrap();
        let (family, t, _) = direct_sum_orbit(3, 1.0, &model, 1e-8, "head plus tail").unwrap();
        // heads still inside the shift part keep shrinking the span
        let early = tail_space_report(&family, &t, 0, 1, &tol).unwrap();
        assert!(!early.stable);
        assert_eq!(tail_stabilization_index(&family, &t, 1, &tol).unwrap(), Some(3));
        let chain = chain_report(&t, &tol, 12).unwrap();
        assert_eq!(chain.q_t, 3);
    }

    #[test]
    fn tail_report_rejects_foreign_operator() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 3).unwrap();
        let (family, _) = model.orbit(1e-8, "orbit").unwrap();
        let wrong = CMatrix::identity(3, 3);
        assert!(matches!(
            tail_space_report(&family, &wrong, 0, 1, &tol),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn tail_report_needs_enough_vectors() {
        let tol = Tolerance::default();
        let family =
            VectorFamily::new(3, "basis", vec![e(3, 0), e(3, 1), e(3, 2)]).unwrap();
        let t = CMatrix::identity(3, 3);
        // a basis orbit can never satisfy len >= n + l + dim
        assert!(matches!(
            tail_space_report(&family, &t, 0, 1, &tol),
            Err(Error::InsufficientTruncation { len: 3, required: 4 })
        ));
    }

    #[test]
    fn removing_no_block_changes_nothing() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 3).unwrap();
        let (family, _) = model.orbit(1e-8, "orbit").unwrap();
        let full = frame_bounds(&family, &tol).unwrap();
        let trivially_removed = block_removal_check(&family, 2, 1, &tol).unwrap();
        assert_eq!(full, trivially_removed);
    }

    #[test]
    fn removing_a_tail_block_keeps_the_frame() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 3).unwrap();
        let (family, _) = model.orbit(1e-8, "orbit").unwrap();
        // drop vectors 9..=13 (1-based), well past the stabilization index
        let report = block_removal_check(&family, 8, 7, &tol).unwrap();
        assert!(report.is_frame);
        assert!(report.lower_bound_a > 0.0);
    }

    #[test]
    fn removing_a_head_vector_breaks_the_span() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 2).unwrap();
        let (family, _t, _) = direct_sum_orbit(3, 1.0, &model, 1e-8, "head plus tail").unwrap();
        // vector 2 (1-based) is the only one with weight on the second head
        // coordinate; removing it kills the span
        let report = block_removal_check(&family, 1, 2, &tol).unwrap();
        assert!(!report.is_frame);
        assert_eq!(report.span_dim, family.dim() - 1);
    }

    #[test]
    fn direct_sum_embeds_excess_and_kernel() {
        let e_part = VectorFamily::new(2, "plane onb", vec![e(2, 0), e(2, 1)]).unwrap();
        let h_part =
            VectorFamily::new(2, "doubled", vec![e(2, 0), e(2, 0), e(2, 1)]).unwrap();
        let sum = direct_sum_construct(&e_part, &h_part).unwrap();
        assert_eq!(sum.dim(), 4);
        assert_eq!(sum.len(), 5);
        let tol = Tolerance::default();
        let report = frame_bounds(&sum, &tol).unwrap();
        assert!(report.is_frame);
        assert_eq!(report.excess, 1);
        let kernel = linalg::nullspace_basis(&sum.synthesis_matrix(), &tol).unwrap();
        assert_eq!(kernel.ncols(), 1);
        // kernel coefficients live entirely on the second summand
        assert!(kernel.column(0).rows(0, 2).norm() <= 1e-10);
    }

    #[test]
    fn direct_sum_requires_independent_first_family() {
        let e_part = VectorFamily::new(2, "dependent", vec![e(2, 0), e(2, 0)]).unwrap();
        let h_part = VectorFamily::new(2, "onb", vec![e(2, 0), e(2, 1)]).unwrap();
        assert!(direct_sum_construct(&e_part, &h_part).is_err());
    }

    #[test]
    fn swap_needs_distinct_indices() {
        let family = VectorFamily::new(3, "onb", vec![e(3, 0), e(3, 1), e(3, 2)]).unwrap();
        let tol = Tolerance::default();
        assert!(matches!(
            swap_experiment(&family, 2, 2, &tol),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn swapping_deep_spectral_vectors_breaks_representability() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 2).unwrap();
        let (family, _) = model.orbit(1e-6, "orbit").unwrap();
        assert!(family.len() >= 10);
        let verdict = swap_experiment(&family, 3, 7, &tol).unwrap();
        assert!(!verdict.representable);
        assert!(verdict.max_shift_residual > tol.residual_atol * family.max_norm());
    }

    #[test]
    fn head_swap_fails_span_condition_but_carries_verdict() {
        let tol = Tolerance::default();
        let model = sample_carleson_sequence(2.0, 2).unwrap();
        let (family, _t, _) = direct_sum_orbit(3, 1.0, &model, 1e-10, "head plus tail").unwrap();
        // swapping inside the independent head: the span probe must fail,
        // and the swapped family is still an orbit (of a different operator)
        let err = swap_experiment(&family, 1, 2, &tol).unwrap_err();
        match err {
            Error::SpanConditionFailed {
                span_dim,
                dim,
                verdict,
            } => {
                assert!(span_dim < dim);
                assert!(verdict.representable);
            }
            other => panic!("expected span condition failure, got {other:?}"),
        }
    }

    #[test]
    fn restriction_flags_on_whole_space() {
        let tol = Tolerance::default();
        let mut t = CMatrix::identity(3, 3);
        t[(0, 1)] = cr(0.5);
        let v = CMatrix::identity(3, 3);
        assert_eq!(
            surjectivity_injectivity_on_tail(&t, &v, &tol).unwrap(),
            (true, true, true)
        );
    }

    #[test]
    fn zero_kernel_coordinate_gives_bijective_tail() {
        let tol = Tolerance::default();
        // lambda_1 = 0: T kills e1 but is bijective on span{e2, e3}
        let t = CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.0), cr(0.5), cr(0.75)]));
        let mut v = CMatrix::zeros(3, 2);
        v.set_column(0, &e(3, 1));
        v.set_column(1, &e(3, 2));
        assert_eq!(
            surjectivity_injectivity_on_tail(&t, &v, &tol).unwrap(),
            (true, true, true)
        );
        let svd = linalg::svd(&t).unwrap();
        assert_eq!(linalg::numerical_rank(&svd.singular_values, tol.rank_rtol), 2);
    }

    #[test]
    fn nilpotent_restriction_to_range_is_not_bijective() {
        let tol = Tolerance::default();
        let t = jordan_nilpotent(3);
        // V = ran T = span{e2, e3}: invariant, but the restriction drops rank
        let mut v = CMatrix::zeros(3, 2);
        v.set_column(0, &e(3, 1));
        v.set_column(1, &e(3, 2));
        assert_eq!(
            surjectivity_injectivity_on_tail(&t, &v, &tol).unwrap(),
            (true, false, false)
        );
        // V = ran T^q = {0}: vacuously bijective
        let empty = CMatrix::zeros(3, 0);
        assert_eq!(
            surjectivity_injectivity_on_tail(&t, &empty, &tol).unwrap(),
            (true, true, true)
        );
    }

    #[test]
    fn restriction_rejects_skew_basis() {
        let tol = Tolerance::default();
        let t = CMatrix::identity(2, 2);
        let mut v = CMatrix::zeros(2, 1);
        v[(0, 0)] = cr(2.0);
        assert!(surjectivity_injectivity_on_tail(&t, &v, &tol).is_err());
    }
}
