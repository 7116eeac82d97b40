//! Spectral upper envelope of the value sequence and the stopping rank.
//!
//! With `A = U D U^{-1}`, every term of the value sequence is bounded by
//! `(sqrt(lmax * mu) + V)^2 - V^2`, where `lmax = |lambda_max(U^* Q U)|`,
//! `mu = max_{x in X} x^* (U U^*)^{-1} x` and `V = ||U^* q|| / (2 sqrt(lmax))`.
//! The same quantities give the rank past which no term can exceed a given
//! positive value.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mu, Polytope};
use crate::linalg::{gram_inverse, hermitian_lambda_max, to_complex, SpectralDecomposition, C64};

/// `|lambda_max(U^* Q U)|` at or below this violates the nonzero-eigenvalue assumption.
pub const TOL_LMAX: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub dec: SpectralDecomposition,
    pub mu_gram: f64,
    pub lmax_abs: f64,
    pub v_diag: f64,
    pub envelope: f64,
}

/// The scalar part of [`SpectralData`], for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub mu_gram: f64,
    pub lmax_abs: f64,
    pub v_diag: f64,
    pub envelope: f64,
    pub rho: f64,
}

impl SpectralData {
    pub fn summary(&self) -> EnvelopeSummary {
        EnvelopeSummary {
            mu_gram: self.mu_gram,
            lmax_abs: self.lmax_abs,
            v_diag: self.v_diag,
            envelope: self.envelope,
            rho: self.dec.rho,
        }
    }
}

/// `q` is the linear coefficient of the working (reduced) objective and
/// `x_work` the working initial set.
pub fn build_spectral_data(
    dec: &SpectralDecomposition,
    q_mat: &DMatrix<f64>,
    q_vec: &DVector<f64>,
    x_work: &Polytope,
) -> Result<SpectralData> {
    let d = dec.dim();
    if q_mat.nrows() != d || q_mat.ncols() != d || q_vec.len() != d || x_work.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "decomposition of dimension {d} against Q {}x{}, q of length {}, set of dimension {}",
            q_mat.nrows(),
            q_mat.ncols(),
            q_vec.len(),
            x_work.dim()
        )));
    }
    let u = &dec.u;
    let pulled = u.adjoint() * to_complex(q_mat) * u;
    let lmax_abs = hermitian_lambda_max(&pulled)?.abs();
    if lmax_abs <= TOL_LMAX {
        return Err(Error::AssumptionViolated(format!("largest eigenvalue of U^* Q U vanishes ({lmax_abs:e})")));
    }
    let mu_gram = mu(&gram_inverse(u)?, x_work)?;
    let uq = u.adjoint() * q_vec.map(|x| C64::new(x, 0.0));
    let v_diag = uq.norm() / (2.0 * lmax_abs.sqrt());
    let envelope = ((lmax_abs * mu_gram).sqrt() + v_diag).powi(2) - v_diag * v_diag;
    Ok(SpectralData { dec: dec.clone(), mu_gram, lmax_abs, v_diag, envelope })
}

/// `nu0 >= envelope`: the first term is already the supremum.
pub fn corollary_one_holds(sd: &SpectralData, nu0: f64) -> bool {
    nu0 >= sd.envelope
}

/// Rank from which every term is at most `nu_j`.
///
/// `floor(ln(r) / ln(rho)) + 1` with `r = (sqrt(nu_j + V^2) - V) / sqrt(lmax * mu)`,
/// `r` clamped to at most 1. Saturates at `usize::MAX` when `rho` is so close
/// to 1 that the rank is not representable.
pub fn k_diag(sd: &SpectralData, nu_j: f64) -> Result<usize> {
    if nu_j.is_nan() || nu_j <= 0.0 {
        return Err(Error::NonPositiveNu(nu_j));
    }
    let rho = sd.dec.rho;
    if rho == 0.0 {
        return Ok(1);
    }
    let v = sd.v_diag;
    // sqrt(nu + V^2) - V without cancellation.
    let num = nu_j / ((nu_j + v * v).sqrt() + v);
    let r = (num / (sd.lmax_abs * sd.mu_gram).sqrt()).min(1.0);
    let k = (r.ln() / rho.ln()).floor() + 1.0;
    if !k.is_finite() || k >= usize::MAX as f64 {
        Ok(usize::MAX)
    } else {
        Ok(k.max(1.0) as usize)
    }
}
