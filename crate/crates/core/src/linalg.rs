//! Dense complex linear algebra with one explicit rank threshold.
//!
//! Every rank decision in the crate (kernel dimensions, chain lengths,
//! subspace dimensions, frame verdicts) routes through [`numerical_rank`]
//! with the `rank_rtol` field of [`Tolerance`], so verdicts are reproducible
//! and tunable from a single knob.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Real scalar promoted to a complex one.
pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The three floating-point decision thresholds used across the crate.
///
/// `rank_rtol` is relative to the largest singular value, `residual_atol`
/// bounds identity residuals (duality, shift property, invariance),
/// `equality_atol` bounds scalar equality checks (tightness, norm bounds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rank_rtol: f64,
    pub residual_atol: f64,
    pub equality_atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rtol: 1e-9,
            residual_atol: 1e-8,
            equality_atol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rtol: f64, residual_atol: f64, equality_atol: f64) -> Result<Self> {
        let tol = Self {
            rank_rtol,
            residual_atol,
            equality_atol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rank_rtol", self.rank_rtol),
            ("residual_atol", self.residual_atol),
            ("equality_atol", self.equality_atol),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie strictly between 0 and 1, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Thin singular value decomposition `M = U diag(s) V^H` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m x p` with orthonormal columns, `p = min(m, n)`.
    pub u: CMatrix,
    /// Descending, nonnegative, length `p`.
    pub singular_values: Vec<f64>,
    /// `n x p` with orthonormal columns.
    pub v: CMatrix,
}

impl Svd {
    pub fn rank(&self, rank_rtol: f64) -> usize {
        numerical_rank(&self.singular_values, rank_rtol)
    }
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Backward-error budget for accepting a computed factorization, relative
/// to the factor scale.
fn defect_budget(rows: usize, cols: usize) -> f64 {
    100.0 * f64::EPSILON * rows.max(cols) as f64
}

/// Worst normalized defect of `M = U diag(s) V^H`: reconstruction error
/// relative to the largest singular value, plus orthonormality of both
/// factors. A correct factorization sits orders of magnitude below
/// [`defect_budget`]; a mispaired one is visible at unit scale.
fn factorization_defect(m: &CMatrix, f: &Svd) -> f64 {
    let p = f.singular_values.len();
    let mut scaled = f.u.clone();
    for (i, s) in f.singular_values.iter().enumerate() {
        scaled.column_mut(i).scale_mut(*s);
    }
    let smax = f.singular_values.first().copied().unwrap_or(0.0);
    let recon = (scaled * f.v.adjoint() - m).norm() / smax.max(f64::MIN_POSITIVE);
    let eye = CMatrix::identity(p, p);
    let u_ortho = (f.u.adjoint() * &f.u - &eye).norm();
    let v_ortho = (f.v.adjoint() * &f.v - &eye).norm();
    recon.max(u_ortho).max(v_ortho)
}

fn backend_svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let f = m.clone().svd(true, true);
    let u = f.u.expect("svd requested u");
    let v_t = f.v_t.expect("svd requested v_t");
    let p = f.singular_values.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        f.singular_values[b]
            .partial_cmp(&f.singular_values[a])
            .expect("singular values are finite")
    });
    let mut u_sorted = CMatrix::zeros(rows, p);
    let mut v_sorted = CMatrix::zeros(cols, p);
    let mut s_sorted = Vec::with_capacity(p);
    let v = v_t.adjoint();
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v.column(src));
        s_sorted.push(f.singular_values[src]);
    }
    Svd {
        u: u_sorted,
        singular_values: s_sorted,
        v: v_sorted,
    }
}

/// One-sided Jacobi svd: rotate column pairs of `W` until they are mutually
/// orthogonal, then read off `sigma_k = |w_k|`, `u_k = w_k / sigma_k`.
///
/// `W = M V` is a loop invariant, so the result reconstructs `M` no matter
/// when the sweeps stop; orthonormality of `U` is what convergence buys and
/// the caller verifies it. Slower than the backend but immune to its
/// vector-pairing failures on degenerate spectra. Wide inputs go through
/// the adjoint.
fn jacobi_svd(m: &CMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows < cols {
        let f = jacobi_svd(&m.adjoint())?;
        return Ok(Svd {
            u: f.v,
            singular_values: f.singular_values,
            v: f.u,
        });
    }
    const SKIP: f64 = 1e-15;
    const MAX_SWEEPS: usize = 60;
    let mut w = m.clone();
    let mut v = CMatrix::identity(cols, cols);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let a = w.column(i).norm_squared();
                let b = w.column(j).norm_squared();
                let g = w.column(i).dotc(&w.column(j));
                let r = g.norm();
                if r <= SKIP * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                // unitary 2x2 diagonalizing [[a, g], [conj(g), b]]: peel the
                // phase of g, then a real Jacobi rotation with tan(2 theta)
                // = 2|g| / (b - a); divide by |g| component-wise so subnormal
                // overlaps cannot underflow the denominator
                let em = g.unscale(r).conj();
                let tau = (b - a) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + 1.0_f64.hypot(tau));
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                for row in 0..rows {
                    let wi = w[(row, i)];
                    let wj = w[(row, j)];
                    w[(row, i)] = wi * cr(cs) - wj * em * cr(sn);
                    w[(row, j)] = wi * cr(sn) + wj * em * cr(cs);
                }
                for row in 0..cols {
                    let vi = v[(row, i)];
                    let vj = v[(row, j)];
                    v[(row, i)] = vi * cr(cs) - vj * em * cr(sn);
                    v[(row, j)] = vi * cr(sn) + vj * em * cr(cs);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let p = cols;
    let norms: Vec<f64> = (0..p).map(|i| w.column(i).norm()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("norms are finite"));
    let mut u = CMatrix::zeros(rows, p);
    let mut v_sorted = CMatrix::zeros(cols, p);
    let mut s_sorted = Vec::with_capacity(p);
    let mut kept = 0usize;
    for (dst, &src) in order.iter().enumerate() {
        s_sorted.push(norms[src]);
        v_sorted.set_column(dst, &v.column(src));
        if norms[src] > 0.0 {
            let mut col = w.column(src).into_owned();
            col.unscale_mut(norms[src]);
            u.set_column(dst, &col);
            kept = dst + 1;
        }
    }
    if kept < p {
        // exactly-zero columns: complete u to orthonormal columns
        let fill = orthonormal_complement(&u.columns(0, kept).into_owned())?;
        for extra in kept..p {
            u.set_column(extra, &fill.column(extra - kept));
        }
    }
    Ok(Svd {
        u,
        singular_values: s_sorted,
        v: v_sorted,
    })
}

/// Thin svd, validated. The backend qr iteration occasionally returns
/// singular vectors that do not pair up on degenerate spectra (the values
/// are right, `U diag(s) V^H` is not `M`); every factorization is therefore
/// checked against [`defect_budget`] and recomputed by [`jacobi_svd`] when
/// it fails.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: CMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(cols, 0),
        });
    }
    let budget = defect_budget(rows, cols);
    let fast = backend_svd(m);
    if factorization_defect(m, &fast) <= budget {
        return Ok(fast);
    }
    let repaired = jacobi_svd(m)?;
    let defect = factorization_defect(m, &repaired);
    if defect <= budget {
        return Ok(repaired);
    }
    Err(Error::FactorizationFailure {
        defect,
        allowed: budget,
    })
}

/// Count of singular values above `rank_rtol` times the largest one.
pub fn numerical_rank(singular_values: &[f64], rank_rtol: f64) -> usize {
    let smax = singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if smax <= 0.0 {
        return 0;
    }
    singular_values
        .iter()
        .filter(|&&s| s > rank_rtol * smax)
        .count()
}

/// Orthonormal basis of the column space of `m`.
pub fn orthonormal_range(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let f = svd(m)?;
    let r = f.rank(tol.rank_rtol);
    Ok(f.u.columns(0, r).into_owned())
}

/// Orthonormal basis of `{c : Mc = 0}` (numerical kernel).
///
/// The kernel is the orthogonal complement of the numerical row space.
pub fn nullspace_basis(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let f = svd(m)?;
    let r = f.rank(tol.rank_rtol);
    let row_space = f.v.columns(0, r).into_owned();
    orthonormal_complement(&row_space)
}

/// Orthonormal basis of the orthogonal complement of `span(basis)`.
///
/// `basis` must have orthonormal columns. Built by completing the basis
/// with greedily pivoted, re-orthogonalized coordinate vectors: the trace
/// of the residual projector guarantees the best candidate always has
/// squared norm at least `(missing dimensions) / n`, so the completion
/// never stalls. (An svd of the projector `I - BB^H` would be the obvious
/// route, but its spectrum is maximally degenerate and the svd backend
/// loses orthogonality there.)
pub fn orthonormal_complement(basis: &CMatrix) -> Result<CMatrix> {
    let n = basis.nrows();
    let r = basis.ncols();
    if r == 0 {
        return Ok(CMatrix::identity(n, n));
    }
    if r >= n {
        return Ok(CMatrix::zeros(n, 0));
    }
    let mut q = CMatrix::zeros(n, n - r);
    let mut residuals: Vec<CVector> = (0..n)
        .map(|i| {
            let mut e = CVector::zeros(n);
            e[i] = cr(1.0);
            let coeff = basis.adjoint() * &e;
            e - basis * coeff
        })
        .collect();
    for accepted in 0..n - r {
        let best = residuals
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.norm()
                    .partial_cmp(&b.1.norm())
                    .expect("residual norms are finite")
            })
            .map(|(i, _)| i)
            .expect("candidate list is nonempty");
        let mut w = residuals[best].clone();
        // re-orthogonalize: once against everything, then once more
        for _ in 0..2 {
            let cb = basis.adjoint() * &w;
            w -= basis * cb;
            if accepted > 0 {
                let qs = q.columns(0, accepted);
                let cq = qs.adjoint() * &w;
                w -= qs * cq;
            }
        }
        let norm = w.norm();
        if norm < 1e-8 {
            return Err(Error::InvalidInput(
                "complement completion stalled; the supplied basis is not orthonormal".into(),
            ));
        }
        w /= cr(norm);
        q.set_column(accepted, &w);
        for e in residuals.iter_mut() {
            let c = w.dotc(e);
            *e -= &w * c;
        }
    }
    Ok(q)
}

/// Moore-Penrose pseudo-inverse; singular values below the rank threshold
/// are treated as zero.
pub fn pinv(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let f = svd(m)?;
    let r = f.rank(tol.rank_rtol);
    let mut result = CMatrix::zeros(m.ncols(), m.nrows());
    for i in 0..r {
        let vi = f.v.column(i);
        let ui = f.u.column(i);
        result += (vi * ui.adjoint()) * cr(1.0 / f.singular_values[i]);
    }
    Ok(result)
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

/// Eigendecomposition `M = V diag(w) V^H` of a Hermitian matrix, eigenvalues
/// descending. Rejects visibly non-Hermitian input.
pub fn spectral_factorization(m: &CMatrix, tol: &Tolerance) -> Result<(Vec<f64>, CMatrix)> {
    check_finite(m)?;
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.norm().max(1.0);
    let skew = (m - m.adjoint()).norm();
    if skew > tol.residual_atol * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian: asymmetry {skew:.3e} exceeds {:.3e}",
            tol.residual_atol * scale
        )));
    }
    let sym = (m + m.adjoint()) * cr(0.5);
    let eig = SymmetricEigen::new(sym.clone());
    let p = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let mut values = Vec::with_capacity(p);
    let mut vectors = CMatrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let budget = defect_budget(p, p);
    if hermitian_defect(&sym, &values, &vectors) <= budget {
        return Ok((values, vectors));
    }
    // the symmetric qr backend shares the svd backend's degenerate-spectrum
    // hazard; shift the (normalized) matrix to positive definite, where the
    // validated svd is the eigendecomposition, and shift back
    let fro = sym.norm();
    let unit = &sym * cr(1.0 / fro);
    let shifted = &unit + CMatrix::identity(p, p) * cr(2.0);
    let f = svd(&shifted)?;
    let values: Vec<f64> = f.singular_values.iter().map(|s| (s - 2.0) * fro).collect();
    let vectors = f.u;
    let defect = hermitian_defect(&sym, &values, &vectors);
    if defect <= budget {
        return Ok((values, vectors));
    }
    Err(Error::FactorizationFailure {
        defect,
        allowed: budget,
    })
}

/// Worst normalized defect of `M = V diag(w) V^H` for Hermitian `M`.
fn hermitian_defect(m: &CMatrix, values: &[f64], vectors: &CMatrix) -> f64 {
    let p = values.len();
    let mut scaled = vectors.clone();
    for (i, w) in values.iter().enumerate() {
        scaled.column_mut(i).scale_mut(*w);
    }
    let scale = values.iter().fold(0.0_f64, |acc, w| acc.max(w.abs()));
    let recon = (scaled * vectors.adjoint() - m).norm() / scale.max(f64::MIN_POSITIVE);
    let eye = CMatrix::identity(p, p);
    let ortho = (vectors.adjoint() * vectors - eye).norm();
    recon.max(ortho)
}

/// Hermitian inverse square root `S^{-1/2}` of a positive definite matrix.
pub fn inv_sqrt_psd(s: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let (values, vectors) = spectral_factorization(s, tol)?;
    let largest = values.first().cloned().unwrap_or(0.0);
    let threshold = tol.rank_rtol * largest.max(0.0);
    let smallest = values.last().cloned().unwrap_or(0.0);
    if smallest <= threshold {
        return Err(Error::SingularOperator {
            smallest,
            threshold,
        });
    }
    let mut result = CMatrix::zeros(s.nrows(), s.ncols());
    for (i, w) in values.iter().enumerate() {
        let vi = vectors.column(i);
        result += (vi * vi.adjoint()) * cr(1.0 / w.sqrt());
    }
    Ok(result)
}

/// Hermitian principal square root of a positive semidefinite matrix;
/// eigenvalues below the rank threshold are clamped to zero.
pub fn sqrt_psd(s: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let (values, vectors) = spectral_factorization(s, tol)?;
    let largest = values.first().cloned().unwrap_or(0.0);
    let threshold = tol.rank_rtol * largest.max(0.0);
    let mut result = CMatrix::zeros(s.nrows(), s.ncols());
    for (i, w) in values.iter().enumerate() {
        if *w > threshold {
            let vi = vectors.column(i);
            result += (vi * vi.adjoint()) * cr(w.sqrt());
        }
    }
    Ok(result)
}

/// Sine of the largest principal angle between the spans of two orthonormal
/// bases, measured in both directions (so equality of subspaces of the same
/// dimension is detected by a single small value).
pub fn subspace_sine(b0: &CMatrix, b1: &CMatrix) -> f64 {
    if b0.ncols() == 0 && b1.ncols() == 0 {
        return 0.0;
    }
    let n = b0.nrows();
    let eye = CMatrix::identity(n, n);
    let p0 = &eye - b0 * b0.adjoint();
    let p1 = &eye - b1 * b1.adjoint();
    let forward = operator_norm(&(&p0 * b1));
    let backward = operator_norm(&(&p1 * b0));
    forward.max(backward)
}
