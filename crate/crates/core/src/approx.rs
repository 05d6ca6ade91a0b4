//! Rank-`k` approximation from a Krylov basis, and its accuracy measured
//! against an exact reference SVD.

use std::time::Instant;

use nalgebra::SymmetricEigen;

use crate::dense::{svd, Mat, SvdResult};
use crate::error::{Error, Result};
use crate::krylov::{build_with_image, gaussian_start_block, KrylovBasis, KrylovBuilder, KrylovConfig};
use crate::operator::{LinearOperator, Tally};
use crate::random::{gaussian_matrix, rng_for, streams};

/// Which space the basis `Z` lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSide {
    /// `Z ⊂ R^d`, `Â = [[AZ]]_k Zᵀ`.
    Right,
    /// `Z ⊂ R^n`, `Â = Z [[ZᵀA]]_k`.
    Left,
}

/// Factored approximation `Â = left · diag(s) · rightᵀ`.
#[derive(Debug, Clone)]
pub struct LowRankApprox {
    pub basis: KrylovBasis,
    pub side: BasisSide,
    /// Truncated SVD of the projected matrix (`AZ` or `ZᵀA`).
    pub core: SvdResult,
    pub left_vectors: Mat,
    /// The `q_i`: right singular vectors of `Â`.
    pub right_vectors: Mat,
    pub k: usize,
    /// All products with `A`/`Aᵀ`, including forming the projection.
    pub matvec_cost: u64,
    /// `b·q`, the customary cost proxy.
    pub proxy_cost: u64,
}

impl LowRankApprox {
    fn from_projection(
        basis: KrylovBasis,
        side: BasisSide,
        projected: &Mat,
        k: usize,
        matvec_cost: u64,
    ) -> Result<Self> {
        let (n_out, d_out) = match side {
            BasisSide::Right => (projected.nrows(), basis.z.nrows()),
            BasisSide::Left => (basis.z.nrows(), projected.ncols()),
        };
        let proxy_cost = (basis.block_size * basis.iterations) as u64;
        if projected.nrows() == 0 || projected.ncols() == 0 {
            return Ok(Self {
                core: SvdResult {
                    left_vectors: Mat::zeros(projected.nrows(), 0),
                    singular_values: Vec::new(),
                    right_vectors: Mat::zeros(projected.ncols(), 0),
                },
                left_vectors: Mat::zeros(n_out, 0),
                right_vectors: Mat::zeros(d_out, 0),
                basis,
                side,
                k,
                matvec_cost,
                proxy_cost,
            });
        }
        let core = svd(projected)?.truncate(k);
        let (left_vectors, right_vectors) = match side {
            BasisSide::Right => (core.left_vectors.clone(), &basis.z * &core.right_vectors),
            BasisSide::Left => (&basis.z * &core.left_vectors, core.right_vectors.clone()),
        };
        Ok(Self {
            basis,
            side,
            core,
            left_vectors,
            right_vectors,
            k,
            matvec_cost,
            proxy_cost,
        })
    }

    pub fn rank(&self) -> usize {
        self.core.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.core.singular_values
    }

    /// `‖Â q_i‖²`, i.e. the squared core singular values.
    pub fn estimates_squared(&self) -> Vec<f64> {
        self.core.singular_values.iter().map(|s| s * s).collect()
    }

    /// `Â` as a dense matrix.
    pub fn to_dense(&self) -> Mat {
        let mut us = self.left_vectors.clone();
        for (j, s) in self.core.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.right_vectors.transpose()
    }

    /// `Â X` without materializing `Â`.
    pub fn apply(&self, x: &Mat) -> Mat {
        let mut c = self.right_vectors.tr_mul(x);
        for (i, s) in self.core.singular_values.iter().enumerate() {
            c.row_mut(i).scale_mut(*s);
        }
        &self.left_vectors * c
    }
}

/// Randomized block Krylov iteration with a Gaussian start block drawn from
/// `cfg.seed`.
pub fn rbki(op: &dyn LinearOperator, cfg: &KrylovConfig) -> Result<LowRankApprox> {
    cfg.validate(op.nrows(), op.ncols())?;
    let g = gaussian_start_block(op.nrows(), cfg.b, cfg.seed)?;
    rbki_with_start(op, &g, cfg.k, cfg.q, cfg.drop_tol, Some(cfg.seed))
}

/// RBKI from an explicit start block.
pub fn rbki_with_start(
    op: &dyn LinearOperator,
    g: &Mat,
    k: usize,
    q: usize,
    drop_tol: f64,
    seed: Option<u64>,
) -> Result<LowRankApprox> {
    let (basis, image, total) = build_with_image(op, g, q, drop_tol, seed)?;
    LowRankApprox::from_projection(basis, BasisSide::Right, &image, k, total)
}

/// Left-side variant: `basis.z ⊂ R^n`, projection `ZᵀA = (AᵀZ)ᵀ`.
pub(crate) fn approx_from_left_basis(
    op: &dyn LinearOperator,
    basis: KrylovBasis,
    k: usize,
) -> Result<LowRankApprox> {
    let op = Tally::new(op);
    let projected = if basis.z.ncols() == 0 {
        Mat::zeros(0, op.ncols())
    } else {
        op.apply_transpose(&basis.z).transpose()
    };
    let cost = basis.matvec_cost + op.matvecs();
    LowRankApprox::from_projection(basis, BasisSide::Left, &projected, k, cost)
}

/// Rank-k accuracy of an approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMetrics {
    pub frobenius_error: f64,
    pub frobenius_optimal: f64,
    pub frobenius_ratio: f64,
    pub spectral_error: f64,
    pub spectral_optimal: f64,
    pub spectral_ratio: f64,
    /// `|‖A q_i‖² − σ_i²| / σ_k²` for `i = 1..k`.
    pub index_residuals: Vec<f64>,
}

impl ErrorMetrics {
    pub fn max_index_residual(&self) -> f64 {
        self.index_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Both rank-k accuracy conditions in the Frobenius norm.
    pub fn solves(&self, epsilon: f64) -> bool {
        self.frobenius_ratio <= 1.0 + epsilon && self.max_index_residual() <= epsilon
    }
}

fn ratio(error: f64, optimal: f64, scale: f64) -> f64 {
    if optimal <= 1e-14 * scale {
        if error <= 1e-8 * scale {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        error / optimal
    }
}

/// Largest singular value of `e` by power iteration on `eᵀe`, stopping at
/// relative change `tol` or after `cap` iterations.
pub(crate) fn spectral_norm_dense(e: &Mat, tol: f64, cap: usize, seed: u64) -> f64 {
    let mut x = gaussian_matrix(e.ncols(), 1, &mut rng_for(seed, streams::POWER_ITERATION));
    let mut prev = 0.0;
    for _ in 0..cap.max(1) {
        let nx = x.norm();
        if nx == 0.0 {
            return 0.0;
        }
        x /= nx;
        let y = e * &x;
        let est = y.norm();
        if (est - prev).abs() <= tol * est {
            return est;
        }
        prev = est;
        x = e.tr_mul(&y);
    }
    prev
}

/// Compares `approx` with the exact SVD of `A`.
///
/// `A` is read through [`LinearOperator::dense`] when available and
/// otherwise materialized column by column.
pub fn error_metrics(op: &dyn LinearOperator, approx: &LowRankApprox, reference: &SvdResult) -> Result<ErrorMetrics> {
    let k = approx.k;
    if approx.rank() > k {
        return Err(Error::config(format!(
            "approximation has rank {} > k = {k}",
            approx.rank()
        )));
    }
    if reference.singular_values.len() < k {
        return Err(Error::dim(format!(
            "reference SVD has {} values, need at least k = {k}",
            reference.singular_values.len()
        )));
    }
    let owned;
    let a = match op.dense() {
        Some(m) => m,
        None => {
            owned = op.apply(&Mat::identity(op.ncols(), op.ncols()));
            &owned
        }
    };
    let sv = &reference.singular_values;
    let scale = sv.iter().map(|s| s * s).sum::<f64>().sqrt();

    let e = a - approx.to_dense();
    let frobenius_error = e.norm();
    let frobenius_optimal = sv[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
    let cap = (10.0 * (a.nrows().max(a.ncols()) as f64).ln()).ceil() as usize;
    let spectral_error = spectral_norm_dense(&e, 1e-6, cap.max(10), 0x5eed);
    let spectral_optimal = sv.get(k).copied().unwrap_or(0.0);

    let sk2 = sv[k - 1] * sv[k - 1];
    let aq = a * &approx.right_vectors;
    let index_residuals = (0..k)
        .map(|i| {
            let est = if i < aq.ncols() { aq.column(i).norm_squared() } else { 0.0 };
            let diff = (est - sv[i] * sv[i]).abs();
            if sk2 > 0.0 {
                diff / sk2
            } else if diff <= 1e-12 * sv[0] * sv[0] {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();

    Ok(ErrorMetrics {
        frobenius_error,
        frobenius_optimal,
        frobenius_ratio: ratio(frobenius_error, frobenius_optimal, scale),
        spectral_error,
        spectral_optimal,
        spectral_ratio: ratio(spectral_error, spectral_optimal, scale),
        index_residuals,
    })
}

/// One checkpoint of an accuracy-versus-cost run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub iterations: usize,
    pub basis_columns: usize,
    pub matvecs: u64,
    pub frobenius_ratio: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    pub max_iterations: usize,
    /// Stop after the first checkpoint with ratio at or below this value.
    pub target_ratio: Option<f64>,
    pub drop_tol: f64,
}

/// Frobenius error ratio of the best rank-`k` approximation in the growing
/// Krylov space, evaluated after every block.
///
/// The error uses `‖A − [[AZ]]_k Zᵀ‖_F² = ‖A‖_F² − Σ_{i≤k} σ_i(AZ)²`, so each
/// checkpoint costs only the products that extend the basis.
pub fn error_trajectory(
    op: &dyn LinearOperator,
    g: &Mat,
    k: usize,
    reference_singular_values: &[f64],
    opts: &TrajectoryOptions,
) -> Result<Vec<TrajectoryPoint>> {
    let sv = reference_singular_values;
    if sv.len() < k || k == 0 {
        return Err(Error::config(format!("need k in 1..={} reference values", sv.len())));
    }
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let optimal: f64 = sv[k..].iter().map(|s| s * s).sum();
    let started = Instant::now();
    let mut builder = KrylovBuilder::start(op, g, opts.drop_tol)?;
    let mut points = Vec::new();
    loop {
        let image = builder.image();
        let gram = image.tr_mul(image);
        let mut eig: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let captured: f64 = eig.iter().take(k).sum();
        let err2 = (total - captured).max(0.0);
        let ratio = if optimal > 0.0 {
            (err2 / optimal).sqrt()
        } else if err2 <= 1e-16 * total {
            1.0
        } else {
            f64::INFINITY
        };
        points.push(TrajectoryPoint {
            iterations: builder.blocks(),
            basis_columns: builder.basis().ncols(),
            matvecs: builder.matvecs(),
            frobenius_ratio: ratio,
            seconds: started.elapsed().as_secs_f64(),
        });
        let reached = opts.target_ratio.is_some_and(|t| ratio <= t);
        if reached || builder.blocks() >= opts.max_iterations || !builder.step() {
            break;
        }
    }
    Ok(points)
}

/// Products needed to first reach `target_ratio`, if it was reached.
pub fn matvecs_to_target(points: &[TrajectoryPoint], target_ratio: f64) -> Option<u64> {
    points.iter().find(|p| p.frobenius_ratio <= target_ratio).map(|p| p.matvecs)
}
