//! Diagonal perturbation `AAᵀ + D` that forces a positive eigenvalue gap.

use rand::Rng;

use crate::approx::{approx_from_left_basis, LowRankApprox};
use crate::dense::{Mat, Vector};
use crate::error::{Error, Result};
use crate::krylov::{build_symmetric_krylov, gaussian_start_block, KrylovConfig};
use crate::operator::{LinearOperator, MatvecCounter, Tally};
use crate::random::{rng_for, streams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConfig {
    pub gamma: f64,
    pub seed: u64,
}

impl PerturbationConfig {
    /// `0 < γ ≤ ‖A‖₂`.
    pub fn validate(&self, spectral_norm: f64) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::config(format!("gamma = {} must be positive", self.gamma)));
        }
        if self.gamma > spectral_norm {
            return Err(Error::config(format!(
                "gamma = {} exceeds the spectral norm estimate {spectral_norm}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// `v ↦ AAᵀv + Dv`, `D = diag(d_i)` with `d_i` uniform on `[−γ, γ]`.
///
/// The own counter tallies applications of the shifted operator; the inner
/// operator's counter keeps tallying products with `A` and `Aᵀ`.
pub struct SmoothedOperator<'a> {
    inner: &'a dyn LinearOperator,
    shift: Vector,
    counter: MatvecCounter,
}

pub fn smooth_perturb<'a>(
    op: &'a dyn LinearOperator,
    pcfg: &PerturbationConfig,
    spectral_norm: f64,
) -> Result<SmoothedOperator<'a>> {
    pcfg.validate(spectral_norm)?;
    let mut rng = rng_for(pcfg.seed, streams::PERTURBATION);
    let n = op.nrows();
    let g = pcfg.gamma;
    let shift = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-g..=g)));
    Ok(SmoothedOperator {
        inner: op,
        shift,
        counter: MatvecCounter::new(),
    })
}

impl SmoothedOperator<'_> {
    pub fn shift(&self) -> &Vector {
        &self.shift
    }

    /// `AAᵀ + D` as an explicit matrix (desk scale).
    pub fn to_dense(&self) -> Mat {
        let a = match self.inner.dense() {
            Some(a) => a * a.transpose(),
            None => {
                let eye = Mat::identity(self.inner.nrows(), self.inner.nrows());
                self.inner.apply(&self.inner.apply_transpose(&eye))
            }
        };
        a + Mat::from_diagonal(&self.shift)
    }
}

impl LinearOperator for SmoothedOperator<'_> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.nrows()
    }

    fn apply(&self, x: &Mat) -> Mat {
        self.counter.add(x.ncols());
        let mut y = self.inner.apply(&self.inner.apply_transpose(x));
        for (mut col, xcol) in y.column_iter_mut().zip(x.column_iter()) {
            col += self.shift.component_mul(&xcol);
        }
        y
    }

    fn apply_transpose(&self, y: &Mat) -> Mat {
        self.apply(y)
    }

    fn matvecs(&self) -> u64 {
        self.counter.get()
    }
}

/// RBKI on the shifted operator: the Krylov basis comes from
/// `K_q(AAᵀ + D, G)` and the approximation is `Z [[ZᵀA]]_k` with the
/// original `A`. `matvec_cost` counts products with `A` and `Aᵀ`.
pub fn rbki_smoothed(
    op: &dyn LinearOperator,
    cfg: &KrylovConfig,
    pcfg: &PerturbationConfig,
    spectral_norm: f64,
) -> Result<LowRankApprox> {
    cfg.validate(op.nrows(), op.ncols())?;
    let tally = Tally::new(op);
    let smoothed = smooth_perturb(&tally, pcfg, spectral_norm)?;
    let g = gaussian_start_block(op.nrows(), cfg.b, cfg.seed)?;
    let mut basis = build_symmetric_krylov(&smoothed, &g, cfg.q, cfg.drop_tol)?;
    basis.matvec_cost = tally.matvecs();
    basis.seed = Some(cfg.seed);
    approx_from_left_basis(op, basis, cfg.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DenseOperator;
    use crate::random::gaussian_matrix;

    #[test]
    fn perturbation_is_bounded() {
        let a = gaussian_matrix(8, 6, &mut rng_for(1, 0));
        let op = DenseOperator::new(a.clone()).unwrap();
        let pcfg = PerturbationConfig { gamma: 1e-6, seed: 3 };
        let s = smooth_perturb(&op, &pcfg, 10.0).unwrap();
        assert!(s.shift().amax() <= 1e-6);
        let x = gaussian_matrix(8, 1, &mut rng_for(2, 0));
        let diff = s.apply(&x) - &a * a.tr_mul(&x);
        assert!(diff.amax() <= 1e-6 * x.amax());
    }

    #[test]
    fn rejects_bad_gamma() {
        let op = DenseOperator::new(Mat::identity(3, 3)).unwrap();
        assert!(smooth_perturb(&op, &PerturbationConfig { gamma: 0.0, seed: 0 }, 1.0).is_err());
        assert!(smooth_perturb(&op, &PerturbationConfig { gamma: 2.0, seed: 0 }, 1.0).is_err());
    }

    #[test]
    fn smoothed_counts_inner_products() {
        let a = gaussian_matrix(20, 15, &mut rng_for(4, 0));
        let op = DenseOperator::new(a).unwrap();
        let cfg = KrylovConfig::new(4, 2, 3, 9);
        let pcfg = PerturbationConfig { gamma: 1e-3, seed: 1 };
        let approx = rbki_smoothed(&op, &cfg, &pcfg, 1.0).unwrap();
        assert_eq!(approx.basis.matvec_cost, 2 * 2 * 2);
        assert_eq!(approx.matvec_cost, 8 + 6);
        assert_eq!(approx.rank(), 4);
    }
}
