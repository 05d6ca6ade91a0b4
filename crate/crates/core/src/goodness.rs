//! Overlap of a start block with the top singular subspace.

use crate::dense::{orthonormalize, singular_values, Mat, EPS};
use crate::error::{Error, Result};

/// `(k, L)`-goodness bound derived from `σ_min(U_kᵀB)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessEstimate {
    pub k: usize,
    /// Depth `t` of the simulated block (its width divided by `b`).
    pub t: usize,
    pub n: usize,
    pub delta: f64,
    pub sigma_min: f64,
    /// `5·max{kn, t·ln(1/δ)} / σ_min²`, or `+∞` when `U_kᵀB` is rank deficient.
    pub l: f64,
}

impl GoodnessEstimate {
    pub fn is_finite(&self) -> bool {
        self.l.is_finite()
    }
}

/// Goodness of `block` (`n x ℓ`, `ℓ ≥ k`) with respect to `u_k` (`n x k`,
/// orthonormal, taken from `A` scaled to `σ_1 = 1`).
pub fn goodness_estimate(u_k: &Mat, block: &Mat, t: usize, delta: f64) -> Result<GoodnessEstimate> {
    let (n, k) = u_k.shape();
    if block.nrows() != n {
        return Err(Error::dim(format!(
            "block has {} rows, subspace has {n}",
            block.nrows()
        )));
    }
    if k == 0 || k > block.ncols() {
        return Err(Error::config(format!(
            "need 1 <= k <= block columns, got k = {k}, columns = {}",
            block.ncols()
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!("delta = {delta} must lie in (0, 1)")));
    }
    let overlap = u_k.tr_mul(block);
    let s = singular_values(&overlap)?;
    let sigma_min = s[k - 1];
    let sigma_max = s[0];
    let numerator = 5.0 * ((k * n) as f64).max(t as f64 * (1.0 / delta).ln());
    let deficient = sigma_max == 0.0 || sigma_min <= EPS * (block.ncols().max(k) as f64) * sigma_max;
    let l = if deficient {
        f64::INFINITY
    } else {
        numerator / (sigma_min * sigma_min)
    };
    Ok(GoodnessEstimate {
        k,
        t,
        n,
        delta,
        sigma_min,
        l,
    })
}

/// `‖(U_kᵀQ)⁻¹‖²` for square `U_kᵀQ`; `+∞` when singular.
pub fn inverse_overlap_sq(u_k: &Mat, q: &Mat) -> Result<f64> {
    if u_k.nrows() != q.nrows() || u_k.ncols() != q.ncols() {
        return Err(Error::dim("overlap needs equally shaped bases"));
    }
    let s = singular_values(&u_k.tr_mul(q))?;
    let smin = *s.last().expect("nonempty");
    Ok(if smin > 0.0 { 1.0 / (smin * smin) } else { f64::INFINITY })
}

/// Rank-`k` subspace `Q = Q′V` of `range(Q′)` whose overlap with `U_k` is at
/// least as well conditioned as that of `Q′` with `U_{k′}`.
///
/// `V` spans the first `k` columns of `(U_{k′}ᵀQ′)⁻¹`.
pub fn goodness_restrict(q_prime: &Mat, u_kprime: &Mat, k: usize) -> Result<Mat> {
    let kp = q_prime.ncols();
    if u_kprime.shape() != q_prime.shape() {
        return Err(Error::dim(format!(
            "Q' is {:?} but U_k' is {:?}",
            q_prime.shape(),
            u_kprime.shape()
        )));
    }
    if k == 0 || k > kp {
        return Err(Error::config(format!("need 1 <= k <= k' = {kp}, got {k}")));
    }
    let x = u_kprime.tr_mul(q_prime);
    let s = singular_values(&x)?;
    if !(s[kp - 1] > EPS * kp as f64 * s[0]) {
        return Err(Error::Singular("U_k'ᵀQ' is not invertible".into()));
    }
    let inv = x
        .try_inverse()
        .ok_or_else(|| Error::Singular("U_k'ᵀQ' is not invertible".into()))?;
    let c = inv.columns(0, k).into_owned();
    let (v, rank) = orthonormalize(&c, 0.0)?;
    if rank < k {
        return Err(Error::Singular("leading columns of the inverse are dependent".into()));
    }
    Ok(q_prime * v)
}
