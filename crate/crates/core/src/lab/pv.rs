//! Splitting the Vandermonde-form Krylov matrix into per-block pieces.
//!
//! For block `j`, `Q_j` spans the orthogonal complement of the other blocks'
//! columns, and `σ_min(K) ≥ min_j σ_min(Q_jᵀ diag(g_j) V) / √b`.

use super::model::VandermondeKrylov;
use crate::dense::{singular_values, svd, Mat, VandermondeMatrix, Vector, EPS};
use crate::error::{Error, Result};

/// Relative singular value cutoff for the rank of a leave-one-out matrix.
pub fn rank_tolerance(k: usize, sigma_max: f64) -> f64 {
    k as f64 * EPS * sigma_max * 1e3
}

/// Orthonormal basis of the complement of the leave-one-out span.
#[derive(Debug, Clone)]
pub struct Complement {
    pub q: Mat,
    /// Numerical rank of the leave-one-out matrix.
    pub rank: usize,
    /// `true` when that rank is below `k − t`.
    pub degenerate: bool,
}

pub fn complement_basis(kry: &VandermondeKrylov, j: usize) -> Result<Complement> {
    if j >= kry.b {
        return Err(Error::config(format!("block index {j} out of range 0..{}", kry.b)));
    }
    let k = kry.k;
    if kry.b == 1 {
        return Ok(Complement {
            q: Mat::identity(k, k),
            rank: 0,
            degenerate: false,
        });
    }
    let mut padded = Mat::zeros(k, k);
    padded.columns_mut(0, k - kry.t).copy_from(&kry.leave_one_out(j));
    let f = svd(&padded)?;
    let rank = f.rank(rank_tolerance(k, f.sigma_max()));
    Ok(Complement {
        q: f.left_vectors.columns(rank, k - rank).into_owned(),
        rank,
        degenerate: rank < k - kry.t,
    })
}

#[derive(Debug, Clone)]
pub struct PVPiece {
    pub j: usize,
    pub q: Mat,
    /// `σ_min(Q_jᵀ diag(g_j) V)`.
    pub sigma_min: f64,
    /// `max_{i≠j} ‖Q_jᵀ diag(g_i) V‖_max`.
    pub orthogonality_residual: f64,
}

#[derive(Debug, Clone)]
pub struct PVDecomposition {
    pub pieces: Vec<PVPiece>,
    /// Blocks whose leave-one-out matrix was numerically rank deficient.
    pub degenerate: Vec<usize>,
}

impl PVDecomposition {
    pub fn is_degenerate(&self) -> bool {
        !self.degenerate.is_empty()
    }

    /// `min_j σ_min(Q_jᵀ diag(g_j) V) / √b`.
    pub fn lower_bound(&self, b: usize) -> f64 {
        let m = self.pieces.iter().map(|p| p.sigma_min).fold(f64::INFINITY, f64::min);
        m / (b as f64).sqrt()
    }

    pub fn max_orthogonality_residual(&self) -> f64 {
        self.pieces.iter().map(|p| p.orthogonality_residual).fold(0.0, f64::max)
    }
}

pub fn pv_decompose(kry: &VandermondeKrylov) -> Result<PVDecomposition> {
    let mut pieces = Vec::with_capacity(kry.b);
    let mut degenerate = Vec::new();
    for j in 0..kry.b {
        let c = complement_basis(kry, j)?;
        if c.degenerate {
            degenerate.push(j);
            continue;
        }
        let z = c.q.tr_mul(&kry.block(j));
        let sigma_min = *singular_values(&z)?.last().expect("nonempty");
        let orthogonality_residual = if kry.b > 1 {
            c.q.tr_mul(&kry.leave_one_out(j)).amax()
        } else {
            0.0
        };
        pieces.push(PVPiece {
            j,
            q: c.q,
            sigma_min,
            orthogonality_residual,
        });
    }
    Ok(PVDecomposition { pieces, degenerate })
}

/// Both sides of the decomposition inequality for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PVInequality {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub lower_bound: f64,
}

impl PVInequality {
    /// `σ_min(K) ≥ bound − slack·σ_max(K)`.
    pub fn holds(&self, slack: f64) -> bool {
        self.sigma_min >= self.lower_bound - slack * self.sigma_max
    }
}

/// `None` when the instance is degenerate.
pub fn pv_inequality(kry: &VandermondeKrylov, pv: &PVDecomposition) -> Result<Option<PVInequality>> {
    if pv.is_degenerate() {
        return Ok(None);
    }
    let s = singular_values(&kry.k_mat)?;
    Ok(Some(PVInequality {
        sigma_min: *s.last().expect("nonempty"),
        sigma_max: s[0],
        lower_bound: pv.lower_bound(kry.b),
    }))
}

/// `Σ_i (Q_j x)_i² (V y)_i²`: the variance of `xᵀ Q_jᵀ diag(g) V y` over
/// Gaussian `g`.
pub fn bilinear_variance(q_j: &Mat, v: &VandermondeMatrix, x: &Vector, y: &Vector) -> Result<f64> {
    for (name, u) in [("x", x), ("y", y)] {
        if (u.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::config(format!("{name} must be a unit vector, has norm {}", u.norm())));
        }
    }
    if q_j.ncols() != x.len() || q_j.nrows() != v.nrows() {
        return Err(Error::dim(format!(
            "Q_j is {}x{}, x has {} entries, V has {} rows",
            q_j.nrows(),
            q_j.ncols(),
            x.len(),
            v.nrows()
        )));
    }
    let qx = q_j * x;
    let vy = v.apply(y.as_slice())?;
    Ok(qx.iter().zip(&vy).map(|(a, b)| a * a * b * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::model::{sample_krylov, SpectrumModel};

    #[test]
    fn single_block_uses_whole_space() {
        let s = SpectrumModel::geometric(6, 0.7).unwrap();
        let kry = sample_krylov(&s, 1, 3).unwrap();
        let pv = pv_decompose(&kry).unwrap();
        assert_eq!(pv.pieces[0].q, Mat::identity(6, 6));
        let ineq = pv_inequality(&kry, &pv).unwrap().unwrap();
        assert!((ineq.sigma_min - ineq.lower_bound).abs() <= 1e-12 * ineq.sigma_max);
    }

    #[test]
    fn complements_have_t_columns_and_are_orthogonal() {
        let s = SpectrumModel::geometric(12, 0.8).unwrap();
        let kry = sample_krylov(&s, 4, 9).unwrap();
        let pv = pv_decompose(&kry).unwrap();
        assert!(!pv.is_degenerate());
        assert!(pv.pieces.iter().all(|p| p.q.ncols() == 3));
        assert!(pv.max_orthogonality_residual() <= 1e-10);
        assert!(pv_inequality(&kry, &pv).unwrap().unwrap().holds(1e-10));
    }

    #[test]
    fn variance_of_constant_polynomial_is_one() {
        let s = SpectrumModel::geometric(8, 0.6).unwrap();
        let kry = sample_krylov(&s, 2, 1).unwrap();
        let q = complement_basis(&kry, 0).unwrap().q;
        let x = Vector::from_fn(4, |i, _| if i == 1 { 1.0 } else { 0.0 });
        let y = Vector::from_fn(4, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let v = bilinear_variance(&q, &kry.v, &x, &y).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(bilinear_variance(&q, &kry.v, &(x * 2.0), &y).is_err());
    }
}
