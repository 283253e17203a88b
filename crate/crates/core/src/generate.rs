//! Seeded random inputs and the named example families used by the CLI and
//! the test corpus.

use rand::Rng;

use crate::error::{Error, Result};
use crate::family::VectorFamily;
use crate::linalg::{self, cr, CMatrix, CVector, C64};
use crate::spectral::sample_carleson_sequence;
use crate::structure::direct_sum_orbit;

/// Uniform direction: independent complex-normal-ish entries (uniform on
/// `[-1,1]^2` per coordinate), normalized. Resamples the measure-zero zero
/// vector.
pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / cr(norm);
        }
    }
}

pub fn random_complex_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
    })
}

/// Random square matrix resampled until its condition number is at most
/// `max_condition`; errors after 64 attempts.
pub fn random_invertible<R: Rng>(
    dim: usize,
    max_condition: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParams("dimension must be positive".into()));
    }
    if !(max_condition >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "condition cap must be at least 1, got {max_condition}"
        )));
    }
    for _ in 0..64 {
        let m = random_complex_matrix(dim, dim, rng);
        let svd = linalg::svd(&m)?;
        let largest = svd.singular_values[0];
        let smallest = svd.singular_values[dim - 1];
        if smallest > 0.0 && largest / smallest <= max_condition {
            return Ok(m);
        }
    }
    Err(Error::InvalidParams(format!(
        "no matrix with condition <= {max_condition} found in 64 draws"
    )))
}

/// `dim` points in the open unit disc with moduli at most `rho_max` and
/// pairwise distance at least `min_separation`.
pub fn separated_disc_lambdas<R: Rng>(
    dim: usize,
    rho_max: f64,
    min_separation: f64,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(Error::InvalidParams(format!(
            "rho_max must lie in (0, 1), got {rho_max}"
        )));
    }
    if !(min_separation >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "min_separation must be nonnegative, got {min_separation}"
        )));
    }
    let mut accepted: Vec<C64> = Vec::with_capacity(dim);
    let mut attempts = 0usize;
    while accepted.len() < dim {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::InvalidParams(format!(
                "could not place {dim} separated points with rho_max {rho_max} and separation {min_separation}"
            )));
        }
        let z = C64::new(
            rng.gen_range(-rho_max..=rho_max),
            rng.gen_range(-rho_max..=rho_max),
        );
        if z.norm() > rho_max {
            continue;
        }
        if accepted.iter().all(|w| (z - w).norm() >= min_separation) {
            accepted.push(z);
        }
    }
    Ok(accepted)
}

/// Named family constructions exposed through the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenerateSpec {
    /// Standard basis of `C^dim`.
    Onb { dim: usize },
    /// Columns of a random well-conditioned invertible matrix.
    RieszRandom { dim: usize },
    /// `{e1, e1, e2, ..., e_(count-1)}` in `C^(count-1)`: one vector of
    /// excess, not representable.
    DuplicatedFirst { count: usize },
    /// Certified-depth orbit of the diagonal model with
    /// `lambda_k = 1 - alpha^-k`.
    SpectralOrbit {
        alpha: f64,
        dim: usize,
        tail_tol: f64,
    },
    /// Orbit of a scaled shift on `basis_dim` head coordinates feeding a
    /// spectral block: linearly independent head, frame tail.
    DirectSum {
        basis_dim: usize,
        basis_scale: f64,
        alpha: f64,
        orbit_dim: usize,
        tail_tol: f64,
    },
}

pub fn generate<R: Rng>(spec: GenerateSpec, rng: &mut R) -> Result<VectorFamily> {
    match spec {
        GenerateSpec::Onb { dim } => {
            if dim == 0 {
                return Err(Error::InvalidParams("dimension must be positive".into()));
            }
            VectorFamily::from_columns(&CMatrix::identity(dim, dim), &format!("onb d={dim}"))
        }
        GenerateSpec::RieszRandom { dim } => {
            let m = random_invertible(dim, 1e6, rng)?;
            VectorFamily::from_columns(&m, &format!("riesz_random d={dim}"))
        }
        GenerateSpec::DuplicatedFirst { count } => {
            if count < 2 {
                return Err(Error::InvalidParams(
                    "duplicated_first needs at least 2 vectors".into(),
                ));
            }
            let dim = count - 1;
            let mut columns = CMatrix::zeros(dim, count);
            columns[(0, 0)] = cr(1.0);
            for k in 0..dim {
                columns[(k, k + 1)] = cr(1.0);
            }
            VectorFamily::from_columns(&columns, &format!("duplicated_first n={count} d={dim}"))
        }
        GenerateSpec::SpectralOrbit {
            alpha,
            dim,
            tail_tol,
        } => {
            let model = sample_carleson_sequence(alpha, dim)?;
            let label = format!("spectral_orbit alpha={alpha} d={dim} tail={tail_tol:e}");
            let (family, depth) = model.orbit(tail_tol, &label)?;
            Ok(family.with_label(&format!("{label} depth={depth}")))
        }
        GenerateSpec::DirectSum {
            basis_dim,
            basis_scale,
            alpha,
            orbit_dim,
            tail_tol,
        } => {
            let model = sample_carleson_sequence(alpha, orbit_dim)?;
            let label = format!(
                "direct_sum head={basis_dim} scale={basis_scale} alpha={alpha} d={orbit_dim} tail={tail_tol:e}"
            );
            let (family, _t, depth) =
                direct_sum_orbit(basis_dim, basis_scale, &model, tail_tol, &label)?;
            Ok(family.with_label(&format!("{label} depth={depth}")))
        }
    }
}
