//! Frame-preserving perturbations of an orbit generator inside an invariant
//! subspace on which the operator is a contraction, and the no-go trend for
//! compactly supported generator unions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::VectorFamily;
use crate::frames::{frame_bounds, FrameReport};
use crate::generate::random_unit_vector;
use crate::linalg::{self, operator_norm, CMatrix, CVector, Tolerance};
use crate::spectral::certified_depth_for;

/// Certified data for perturbing the generator of `{T^n phi}` by vectors in
/// an invariant subspace `V` with `|T|_V| = mu < 1`.
#[derive(Debug, Clone)]
pub struct PerturbationSetup {
    t: CMatrix,
    phi: CVector,
    v_basis: CMatrix,
    mu: f64,
    lower_bound_a: f64,
    radius: f64,
}

impl PerturbationSetup {
    /// Certify the geometry: `v_basis` must be orthonormal and `T`-invariant
    /// with contractive restriction, and `lower_bound_a` must be a positive
    /// frame bound of the unperturbed orbit.
    pub fn new(
        t: &CMatrix,
        phi: &CVector,
        v_basis: &CMatrix,
        lower_bound_a: f64,
        tol: &Tolerance,
    ) -> Result<Self> {
        if t.nrows() != t.ncols() {
            return Err(Error::InvalidInput(format!(
                "perturbation setup needs a square operator, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        let dim = t.nrows();
        if phi.len() != dim || v_basis.nrows() != dim {
            return Err(Error::LengthMismatch(format!(
                "operator acts on C^{dim}, generator has length {}, subspace basis lives in C^{}",
                phi.len(),
                v_basis.nrows()
            )));
        }
        let m = v_basis.ncols();
        if m > 0 {
            let gram_residual =
                operator_norm(&(v_basis.adjoint() * v_basis - CMatrix::identity(m, m)));
            if gram_residual > tol.residual_atol {
                return Err(Error::InvalidInput(format!(
                    "subspace basis is not orthonormal (residual {gram_residual:.3e})"
                )));
            }
            let eye = CMatrix::identity(dim, dim);
            let leak = operator_norm(&((&eye - v_basis * v_basis.adjoint()) * t * v_basis));
            if leak > tol.residual_atol * operator_norm(t).max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "subspace is not invariant under the operator (leak {leak:.3e})"
                )));
            }
        }
        let mu = if m == 0 {
            0.0
        } else {
            operator_norm(&(v_basis.adjoint() * t * v_basis))
        };
        if !(mu < 1.0) {
            return Err(Error::InvalidContraction { mu });
        }
        let radius = perturbation_radius(lower_bound_a, mu)?;
        Ok(Self {
            t: t.clone(),
            phi: phi.clone(),
            v_basis: v_basis.clone(),
            mu,
            lower_bound_a,
            radius,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound_a
    }

    /// Perturbations with `|phi~| < radius` keep the orbit a frame for its
    /// span.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn operator(&self) -> &CMatrix {
        &self.t
    }

    pub fn generator(&self) -> &CVector {
        &self.phi
    }

    fn require_in_subspace(&self, phi_tilde: &CVector, tol: &Tolerance) -> Result<()> {
        if phi_tilde.len() != self.phi.len() {
            return Err(Error::LengthMismatch(format!(
                "perturbation has length {}, generator has length {}",
                phi_tilde.len(),
                self.phi.len()
            )));
        }
        let projected = &self.v_basis * (self.v_basis.adjoint() * phi_tilde);
        let residual = (phi_tilde - projected).norm();
        let allowed = tol.residual_atol * phi_tilde.norm().max(1.0);
        if residual > allowed {
            return Err(Error::NotInSubspace { residual, allowed });
        }
        Ok(())
    }
}

/// `sqrt(A (1 - mu^2))`: perturbations below this norm keep the orbit a
/// frame.
pub fn perturbation_radius(lower_bound_a: f64, mu: f64) -> Result<f64> {
    if !(lower_bound_a > 0.0) || !lower_bound_a.is_finite() {
        return Err(Error::InvalidParams(format!(
            "lower frame bound must be positive and finite, got {lower_bound_a}"
        )));
    }
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidContraction { mu });
    }
    Ok((lower_bound_a * (1.0 - mu * mu)).sqrt())
}

/// How deep to expand a perturbed orbit.
#[derive(Debug, Clone, Copy)]
pub enum OrbitDepth {
    /// Choose the depth so the dropped tail energy of the perturbed
    /// generator is below `tail_tol`; requires `|T| < 1`.
    Certified { tail_tol: f64 },
    Fixed(usize),
}

/// Expand the orbit of the perturbed generator `phi + phi_tilde` and report
/// its frame bounds. The perturbation must lie in the certified subspace.
pub fn perturbed_orbit_test(
    setup: &PerturbationSetup,
    phi_tilde: &CVector,
    depth: OrbitDepth,
    tol: &Tolerance,
) -> Result<FrameReport> {
    setup.require_in_subspace(phi_tilde, tol)?;
    let psi = &setup.phi + phi_tilde;
    let n = match depth {
        OrbitDepth::Certified { tail_tol } => {
            let rho = operator_norm(&setup.t);
            certified_depth_for(psi.norm_squared(), rho, tail_tol)?
        }
        OrbitDepth::Fixed(n) => {
            if n == 0 {
                return Err(Error::InvalidParams("orbit depth must be at least 1".into()));
            }
            n
        }
    };
    let family = VectorFamily::orbit(&setup.t, &psi, n, "perturbed orbit")?;
    frame_bounds(&family, tol)
}

/// `sum_{n < depth} |T^n phi_tilde|^2`, the Bessel energy the perturbation
/// feeds into the orbit. Bounded by `|phi_tilde|^2 / (1 - mu^2)` when the
/// perturbation lies in the certified subspace.
pub fn perturbation_energy(
    setup: &PerturbationSetup,
    phi_tilde: &CVector,
    depth: usize,
    tol: &Tolerance,
) -> Result<f64> {
    setup.require_in_subspace(phi_tilde, tol)?;
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be at least 1".into()));
    }
    let mut current = phi_tilde.clone();
    let mut energy = 0.0;
    for _ in 0..depth {
        energy += current.norm_squared();
        current = &setup.t * current;
    }
    Ok(energy)
}

/// Upper frame (Bessel) bound `sigma_max^2` of the depth-`n` orbit of `psi`.
pub fn bessel_bound_of_orbit(t: &CMatrix, psi: &CVector, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be at least 1".into()));
    }
    let family = VectorFamily::orbit(t, psi, depth, "bessel probe")?;
    let svd = linalg::svd(&family.synthesis_matrix())?;
    Ok(svd.singular_values.first().map_or(0.0, |s| s * s))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrendRow {
    pub d: usize,
    pub j: usize,
    pub depth: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Frame bounds of the union of `j` random-generator orbits of
/// `T = diag(decay[..d])` as `d` grows: with `j` fixed the raw lower bound
/// `sigma_d^2` collapses, while the upper bound stays bounded.
///
/// `decay` supplies the diagonal for the largest requested dimension;
/// smaller dimensions use its prefix. Depth per dimension is certified from
/// the largest generator norm. Deterministic in `seed`.
pub fn compact_nogo_trend(
    decay: &[f64],
    j: usize,
    dims: &[usize],
    tail_tol: f64,
    seed: u64,
) -> Result<Vec<TrendRow>> {
    if j == 0 {
        return Err(Error::InvalidParams("need at least one generator".into()));
    }
    if dims.is_empty() {
        return Err(Error::InvalidParams("need at least one dimension".into()));
    }
    let max_dim = *dims.iter().max().unwrap();
    if decay.len() < max_dim {
        return Err(Error::InvalidParams(format!(
            "decay profile has {} entries, largest dimension is {max_dim}",
            decay.len()
        )));
    }
    for (k, value) in decay.iter().enumerate() {
        if !(value.abs() < 1.0) {
            return Err(Error::ModulusOutOfRange {
                index: k,
                modulus: value.abs(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(dims.len());
    for &d in dims {
        if d == 0 {
            return Err(Error::InvalidParams("dimensions must be positive".into()));
        }
        let generators: Vec<CVector> =
            (0..j).map(|_| random_unit_vector(d, &mut rng)).collect();
        let rho = decay[..d]
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let depth = certified_depth_for(1.0, rho, tail_tol)?;
        let t = CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                linalg::cr(decay[r])
            } else {
                linalg::cr(0.0)
            }
        });
        let mut synthesis = CMatrix::zeros(d, j * depth);
        for (g, psi) in generators.iter().enumerate() {
            let mut current = psi.clone();
            for n in 0..depth {
                synthesis.set_column(g * depth + n, &current);
                current = &t * current;
            }
        }
        let svd = linalg::svd(&synthesis)?;
        let upper_bound = svd.singular_values.first().map_or(0.0, |s| s * s);
        // raw d-th singular value, deliberately not snapped to a rank
        // threshold: the collapse of this number is the observable
        let lower_bound = svd
            .singular_values
            .get(d - 1)
            .map_or(0.0, |s| s * s);
        rows.push(TrendRow {
            d,
            j,
            depth,
            lower_bound,
            upper_bound,
        });
    }
    Ok(rows)
}
