//! Single-vector Krylov matrices as non-sparsification certificates.

use itertools::Itertools;
use rand::seq::index::sample;

use super::bounds::{certificate_eta, certificate_norm_bound};
use super::model::{SpectrumModel, VandermondeKrylov};
use super::pv::complement_basis;
use crate::dense::{sigma_max, sigma_min, Mat};
use crate::error::{Error, Result};
use crate::random::rng_for;

/// Largest `k` for which every support is enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 16;
/// Supports drawn when `k` exceeds [`EXHAUSTIVE_LIMIT`].
pub const SAMPLED_SUPPORTS: usize = 2000;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// `Γ = diag(g_i) V` checked as an `(s, η, M)` certificate for `Q_j`.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub gamma: Mat,
    pub s: usize,
    pub eta: f64,
    pub m_bound: f64,
    /// `‖Γ‖₂`.
    pub norm: f64,
    /// `‖ΓᵀQ_j‖_max`.
    pub orthogonality_residual: f64,
    /// Smallest `σ_min(Γ_S)` over the checked row supports `|S| = s`.
    pub min_sparse_singular: f64,
    pub supports_checked: usize,
    pub exhaustive: bool,
    pub q: Mat,
}

impl Certificate {
    pub fn orthogonal(&self) -> bool {
        self.orthogonality_residual <= ORTHOGONALITY_TOL
    }

    pub fn norm_bounded(&self) -> bool {
        self.norm <= self.m_bound
    }

    pub fn injective(&self) -> bool {
        self.min_sparse_singular >= self.eta
    }

    pub fn validated(&self) -> bool {
        self.orthogonal() && self.norm_bounded() && self.injective()
    }
}

/// Builds `Γ = diag(g_i)V` for `Q_j` and checks all three properties.
/// `sample_seed` drives support sampling when `k > 16`.
pub fn certify(
    kry: &VandermondeKrylov,
    spectrum: &SpectrumModel,
    j: usize,
    i: usize,
    delta: f64,
    sample_seed: u64,
) -> Result<Certificate> {
    if i == j {
        return Err(Error::config("certificate block i must differ from j"));
    }
    if i >= kry.b || j >= kry.b {
        return Err(Error::config(format!("block indices must be below b = {}", kry.b)));
    }
    let comp = complement_basis(kry, j)?;
    if comp.degenerate {
        return Err(Error::Singular(format!("leave-one-out matrix for block {j} is rank deficient")));
    }
    let (k, t) = (kry.k, kry.t);
    let gamma = kry.block(i);
    let orthogonality_residual = gamma.tr_mul(&comp.q).amax();
    let norm = sigma_max(&gamma)?;

    let sparse_min = |rows: &[usize]| -> Result<f64> {
        let sub = Mat::from_fn(rows.len(), t, |r, c| gamma[(rows[r], c)]);
        sigma_min(&sub)
    };
    let (mut min_sparse_singular, mut supports_checked) = (f64::INFINITY, 0);
    let exhaustive = k <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        for rows in (0..k).combinations(t) {
            min_sparse_singular = min_sparse_singular.min(sparse_min(&rows)?);
            supports_checked += 1;
        }
    } else {
        let mut rng = rng_for(sample_seed, 0);
        for _ in 0..SAMPLED_SUPPORTS {
            let mut rows = sample(&mut rng, k, t).into_vec();
            rows.sort_unstable();
            min_sparse_singular = min_sparse_singular.min(sparse_min(&rows)?);
            supports_checked += 1;
        }
    }

    Ok(Certificate {
        gamma,
        s: t,
        eta: certificate_eta(spectrum, t, delta),
        m_bound: certificate_norm_bound(k, delta),
        norm,
        orthogonality_residual,
        min_sparse_singular,
        supports_checked,
        exhaustive,
        q: comp.q,
    })
}

/// Entry size `γ = η/(3M√k)` that a validated certificate guarantees for
/// at least `s + 1` entries of `Q x`.
pub fn abstract_nonsparse_bound(cert: &Certificate, k: usize) -> Result<f64> {
    if cert.eta > cert.m_bound {
        return Err(Error::config(format!(
            "eta = {} exceeds M = {}; no certificate can satisfy both",
            cert.eta, cert.m_bound
        )));
    }
    Ok(cert.eta / (3.0 * cert.m_bound * (k as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::model::sample_krylov;

    #[test]
    fn small_certificate() {
        let s = SpectrumModel::geometric(12, 0.81).unwrap();
        let kry = sample_krylov(&s, 4, 17).unwrap();
        let c = certify(&kry, &s, 0, 1, 0.1, 0).unwrap();
        assert!(c.orthogonal());
        assert!(c.exhaustive);
        assert_eq!(c.supports_checked, 220);
        assert!(certify(&kry, &s, 2, 2, 0.1, 0).is_err());
    }

    #[test]
    fn gamma_formula() {
        let s = SpectrumModel::geometric(12, 0.81).unwrap();
        let kry = sample_krylov(&s, 4, 17).unwrap();
        let mut c = certify(&kry, &s, 0, 1, 0.1, 0).unwrap();
        c.eta = c.m_bound;
        let g = abstract_nonsparse_bound(&c, 12).unwrap();
        assert!((g - 1.0 / (3.0 * 12f64.sqrt())).abs() < 1e-15);
        c.eta = 1.0;
        let g1 = abstract_nonsparse_bound(&c, 12).unwrap();
        c.m_bound *= 2.0;
        assert!((abstract_nonsparse_bound(&c, 12).unwrap() - g1 / 2.0).abs() < 1e-15);
        c.eta = 2.0 * c.m_bound;
        assert!(abstract_nonsparse_bound(&c, 12).is_err());
    }
}
