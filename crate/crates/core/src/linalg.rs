//! Dense linear algebra over real and complex matrices: eigendecomposition of
//! the dynamics, convergence check, Hermitian extreme eigenvalues and the
//! inverse Gram matrix of the eigenvector basis.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Reconstruction tolerance for accepted decompositions.
pub const TOL_RECON: f64 = 1e-9;
/// A decomposition is rejected when `cond(U) > 1 / TOL_DIAG`.
pub const TOL_DIAG: f64 = 1e-10;
/// `rho < 1 - TOL_RHO` is required for convergence.
pub const TOL_RHO: f64 = 1e-12;
/// Hermitian symmetry tolerance, relative to `1 + ||B||_inf`.
pub const TOL_HERMITIAN: f64 = 1e-9;

const TOL_CLUSTER: f64 = 1e-9;
const TOL_NULLSPACE: f64 = 1e-7;

/// `A = U diag(D) U^{-1}` with eigenvalues ordered by decreasing modulus, then
/// decreasing real part, then decreasing imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub u: ComplexMatrix,
    pub eigenvalues: Vec<C64>,
    pub u_inv: ComplexMatrix,
    pub rho: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(D)^k U^{-1}` evaluated in complex arithmetic.
    pub fn power(&self, k: u32) -> ComplexMatrix {
        let mut ud = self.u.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            let p = lambda.powu(k);
            for z in ud.column_mut(j).iter_mut() {
                *z *= p;
            }
        }
        ud * &self.u_inv
    }
}

pub fn to_complex(a: &DMatrix<f64>) -> ComplexMatrix {
    a.map(|x| C64::new(x, 0.0))
}

pub fn norm_inf_real(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn norm_inf(a: &ComplexMatrix) -> f64 {
    a.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Total order used for the deterministic eigenvalue listing.
fn eigen_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im))
}

/// Scales `v` so its first maximal-modulus component equals one.
fn normalize_eigenvector(v: &mut DVector<C64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let s = v[pivot];
    for z in v.iter_mut() {
        *z /= s;
    }
}

/// Condition number `sigma_max / sigma_min` of a complex matrix.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigendecomposition of a real square matrix over the complex field.
pub fn eig_decompose(a: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let (n, m) = a.shape();
    if n != m {
        return Err(Error::NonSquare { rows: n, cols: m });
    }
    if n == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInstance("matrix has non-finite entries".into()));
    }

    let scale = 1.0 + norm_inf_real(a);
    let mut eigenvalues: Vec<C64> = a.clone().complex_eigenvalues().iter().cloned().collect();
    eigenvalues.sort_by(eigen_order);

    let ac = to_complex(a);
    let mut u = ComplexMatrix::zeros(n, n);

    // Eigenvalues are grouped into numerically repeated clusters; each cluster of
    // multiplicity m must have an m-dimensional null space of A - lambda I.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[end] - eigenvalues[start]).norm() <= TOL_CLUSTER * scale {
            end += 1;
        }
        let mult = end - start;
        let mean = eigenvalues[start..end].iter().sum::<C64>() / C64::new(mult as f64, 0.0);

        let shifted = &ac - ComplexMatrix::identity(n, n) * mean;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let largest_null = svd.singular_values[order[mult - 1]];
        if largest_null > TOL_NULLSPACE * scale {
            return Err(Error::NotDiagonalizable {
                reason: format!(
                    "eigenvalue {mean} has algebraic multiplicity {mult} but a smaller eigenspace \
                     (singular value {largest_null:e})"
                ),
            });
        }
        for (slot, &idx) in order.iter().take(mult).enumerate() {
            let mut v: DVector<C64> = v_t.row(idx).adjoint();
            if mult == 1 {
                normalize_eigenvector(&mut v);
            }
            u.set_column(start + slot, &v);
        }
        start = end;
    }

    let cond = condition_number(&u);
    if !cond.is_finite() || cond > 1.0 / TOL_DIAG {
        return Err(Error::NotDiagonalizable {
            reason: format!("eigenvector matrix condition number {cond:e} exceeds {:e}", 1.0 / TOL_DIAG),
        });
    }
    let u_inv = u
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotDiagonalizable { reason: "eigenvector matrix is singular".into() })?;

    let rho = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dec = SpectralDecomposition { u, eigenvalues, u_inv, rho };

    let recon = dec.power(1);
    let err = norm_inf(&(&ac - &recon));
    if err > TOL_RECON * scale {
        return Err(Error::NotDiagonalizable { reason: format!("reconstruction error {err:e} exceeds tolerance") });
    }
    let ident_err = norm_inf(&(&dec.u * &dec.u_inv - ComplexMatrix::identity(n, n)));
    if ident_err > TOL_RECON {
        return Err(Error::NotDiagonalizable { reason: format!("U U^-1 deviates from identity by {ident_err:e}") });
    }
    Ok(dec)
}

/// `true` iff `rho < 1 - TOL_RHO`.
pub fn spectral_radius_check(dec: &SpectralDecomposition) -> bool {
    dec.rho < 1.0 - TOL_RHO
}

fn hermitian_part(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !b.is_square() {
        return Err(Error::NonSquare { rows: b.nrows(), cols: b.ncols() });
    }
    let asym = norm_inf(&(b - b.adjoint()));
    if asym > TOL_HERMITIAN * (1.0 + norm_inf(b)) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok((b + b.adjoint()).map(|z| z * 0.5))
}

/// Largest eigenvalue of a Hermitian matrix, refined by the Rayleigh
/// quotient of its eigenvector.
pub fn hermitian_lambda_max(b: &ComplexMatrix) -> Result<f64> {
    let h = hermitian_part(b)?;
    let eig = SymmetricEigen::new(h.clone());
    let Some((i, &lmax)) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return Ok(f64::NEG_INFINITY);
    };
    let v = eig.eigenvectors.column(i);
    let rayleigh = (v.adjoint() * &h * v)[(0, 0)].re / v.norm_squared();
    Ok(if rayleigh.is_finite() { rayleigh } else { lmax })
}

/// Smallest and largest eigenvalue of a real symmetric matrix (symmetrized first).
pub fn symmetric_eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let s = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// `(U U^*)^{-1} = U^{-*} U^{-1}`, symmetrized.
pub fn gram_inverse(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !u.is_square() {
        return Err(Error::NonSquare { rows: u.nrows(), cols: u.ncols() });
    }
    let u_inv = u.clone().try_inverse().ok_or(Error::Singular)?;
    let g = u_inv.adjoint() * &u_inv;
    Ok((&g + g.adjoint()).map(|z| z * 0.5))
}

/// One step of the power recurrence: `A * P_k`.
pub fn matrix_power_step(p_k: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    a * p_k
}
