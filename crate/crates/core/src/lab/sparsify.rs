//! Counting large entries of `Vy` and `Q_j x`.

use super::bounds::{subspace_log_threshold, vandermonde_log_threshold};
use super::model::SpectrumModel;
use crate::dense::{Mat, VandermondeMatrix, Vector};
use crate::error::{Error, Result};

/// Number of entries at or above a threshold given as a natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonsparseCount {
    pub count: usize,
    pub log_threshold: f64,
}

impl NonsparseCount {
    pub fn threshold(&self) -> f64 {
        self.log_threshold.exp()
    }
}

fn count_above(values: impl IntoIterator<Item = f64>, log_threshold: f64) -> usize {
    values.into_iter().filter(|v| v.abs().ln() >= log_threshold).count()
}

/// Entries of `Vy` of magnitude at least `‖y‖_∞(Δ/(6κ))^{2(t−1)}`; at least
/// `k − (t−1)` of them always exist.
pub fn vandermonde_nonsparse_count(v: &VandermondeMatrix, y: &[f64], spectrum: &SpectrumModel) -> Result<NonsparseCount> {
    let y_inf = y.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if !(y_inf > 0.0) {
        return Err(Error::config("coefficient vector y must be nonzero"));
    }
    let log_threshold = vandermonde_log_threshold(spectrum, y_inf, v.degree());
    let values = v.apply(y)?;
    Ok(NonsparseCount {
        count: count_above(values, log_threshold),
        log_threshold,
    })
}

/// Monomial coefficients (lowest degree first) of `∏ (x − r)` over `roots`.
pub fn root_polynomial(roots: &[f64]) -> Vec<f64> {
    let mut poly = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; poly.len() + 1];
        for (d, c) in poly.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= c * r;
        }
        poly = next;
    }
    poly
}

/// Entries of `Q_j x` above the subspace threshold; the statistical claim
/// is at least `t + 1` of them.
pub fn subspace_nonsparse_check(q_j: &Mat, x: &Vector, spectrum: &SpectrumModel, delta: f64) -> Result<NonsparseCount> {
    if q_j.nrows() != spectrum.k() || q_j.ncols() != x.len() {
        return Err(Error::dim(format!(
            "Q_j is {}x{} but k = {} and x has {} entries",
            q_j.nrows(),
            q_j.ncols(),
            spectrum.k(),
            x.len()
        )));
    }
    let log_threshold = subspace_log_threshold(spectrum, q_j.ncols(), delta);
    let u = q_j * x;
    Ok(NonsparseCount {
        count: count_above(u.iter().copied(), log_threshold),
        log_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_counts_everything() {
        let s = SpectrumModel::geometric(7, 0.5).unwrap();
        let v = s.vandermonde(1).unwrap();
        let c = vandermonde_nonsparse_count(&v, &[-2.0], &s).unwrap();
        assert_eq!(c.count, 7);
        assert!((c.threshold() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adversarial_roots_leave_k_minus_t_plus_one() {
        let s = SpectrumModel::geometric(10, 0.7).unwrap();
        let t = 4;
        let y = root_polynomial(&s.eigenvalues()[1..t]);
        assert_eq!(y.len(), t);
        let v = s.vandermonde(t).unwrap();
        let c = vandermonde_nonsparse_count(&v, &y, &s).unwrap();
        assert!(c.count >= 10 - (t - 1));
    }

    #[test]
    fn zero_y_rejected() {
        let s = SpectrumModel::geometric(3, 0.5).unwrap();
        assert!(vandermonde_nonsparse_count(&s.vandermonde(2).unwrap(), &[0.0, 0.0], &s).is_err());
    }
}
