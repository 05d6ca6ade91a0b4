//! Extended-precision `σ_min(K)` for instances whose smallest singular value
//! lies below double-precision resolution.
//!
//! `K` is rebuilt from the exact `f64` values of `H` and the nodes, inverted by
//! Gauss–Jordan elimination at increasing working precision, and `σ_min(K)` is
//! read off as `1/σ_max(K⁻¹)`. The result is accepted once two consecutive
//! precisions agree.

use std::f64::consts::LN_2;

use dashu_float::ops::{Abs, EstimatedLog2};
use dashu_float::FBig;

/// Binary floating point with the default rounding mode.
type Real = FBig;

use super::model::VandermondeKrylov;
use crate::dense::{sigma_max, Mat};
use crate::error::{Error, Result};

const PRECISIONS: [usize; 5] = [256, 512, 1024, 2048, 4096];
/// Agreement of `ln σ_min` between consecutive precisions.
const AGREEMENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedSigmaMin {
    pub log_sigma_min: f64,
    /// Working precision in bits at which the value settled.
    pub precision: usize,
}

fn lift(x: f64, precision: usize) -> Real {
    Real::try_from(x)
        .expect("finite input")
        .with_precision(precision)
        .value()
}

/// Row-major entries `g_{ij} λ_i^d` in the column layout of `kry.k_mat`.
fn krylov_entries(kry: &VandermondeKrylov, precision: usize) -> Vec<Vec<Real>> {
    let nodes = kry.v.nodes();
    (0..kry.k)
        .map(|i| {
            let lambda = lift(nodes[i], precision);
            let mut powers = Vec::with_capacity(kry.t);
            let mut p = lift(1.0, precision);
            for _ in 0..kry.t {
                powers.push(p.clone());
                p = &p * &lambda;
            }
            (0..kry.b)
                .flat_map(|j| {
                    let g = lift(kry.h[(i, j)], precision);
                    powers.iter().map(move |p| &g * p).collect::<Vec<_>>()
                })
                .collect()
        })
        .collect()
}

fn inverse(mut a: Vec<Vec<Real>>, precision: usize) -> Result<Vec<Vec<Real>>> {
    let n = a.len();
    let mut inv: Vec<Vec<Real>> = (0..n)
        .map(|i| (0..n).map(|j| lift(if i == j { 1.0 } else { 0.0 }, precision)).collect())
        .collect();
    for c in 0..n {
        let pivot = (c..n)
            .max_by(|&x, &y| a[x][c].clone().abs().cmp(&a[y][c].clone().abs()))
            .expect("nonempty range");
        if a[pivot][c] == Real::ZERO {
            return Err(Error::Singular(format!("exact pivot {c} vanished")));
        }
        a.swap(c, pivot);
        inv.swap(c, pivot);
        let (pivot_row, pivot_inv) = (a[c].clone(), inv[c].clone());
        for r in (0..n).filter(|&r| r != c) {
            if a[r][c] == Real::ZERO {
                continue;
            }
            let f = &a[r][c] / &pivot_row[c];
            for (x, p) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                *x = &*x - &f * p;
            }
            for (x, p) in inv[r].iter_mut().zip(&pivot_inv) {
                *x = &*x - &f * p;
            }
        }
    }
    for (r, row) in inv.iter_mut().enumerate() {
        for x in row.iter_mut() {
            *x = &*x / &a[r][r];
        }
    }
    Ok(inv)
}

fn log_sigma_min_at(kry: &VandermondeKrylov, precision: usize) -> Result<f64> {
    let inv = inverse(krylov_entries(kry, precision), precision)?;
    let scale = inv
        .iter()
        .flatten()
        .filter(|x| **x != Real::ZERO)
        .map(|x| x.log2_bounds().1.ceil() as isize)
        .max()
        .ok_or_else(|| Error::Singular("inverse is zero".into()))?;
    let k = inv.len();
    let scaled = Mat::from_fn(k, k, |i, j| (inv[i][j].clone() >> scale).to_f64().value());
    Ok(-(sigma_max(&scaled)?.ln() + scale as f64 * LN_2))
}

/// `ln σ_min(K)`, refined until two working precisions agree.
pub fn log_sigma_min_extended(kry: &VandermondeKrylov) -> Result<ExtendedSigmaMin> {
    let mut previous: Option<f64> = None;
    for precision in PRECISIONS {
        let value = log_sigma_min_at(kry, precision)?;
        if let Some(p) = previous {
            if (value - p).abs() <= AGREEMENT * value.abs().max(1.0) {
                return Ok(ExtendedSigmaMin { log_sigma_min: value, precision });
            }
        }
        previous = Some(value);
    }
    Err(Error::config(format!(
        "sigma_min did not settle at {} bits of precision",
        PRECISIONS[PRECISIONS.len() - 1]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::sigma_min;
    use crate::lab::model::{sample_krylov, SpectrumModel};

    #[test]
    fn agrees_with_double_precision_when_well_conditioned() {
        let s = SpectrumModel::geometric(6, 0.5).unwrap();
        let kry = sample_krylov(&s, 3, 4).unwrap();
        let ext = log_sigma_min_extended(&kry).unwrap();
        let direct = sigma_min(&kry.k_mat).unwrap().ln();
        assert!((ext.log_sigma_min - direct).abs() < 1e-8, "{} vs {direct}", ext.log_sigma_min);
    }

    #[test]
    fn resolves_values_below_double_resolution() {
        let s = SpectrumModel::geometric(24, 0.81).unwrap();
        let kry = sample_krylov(&s, 1, 2).unwrap();
        let ext = log_sigma_min_extended(&kry).unwrap();
        let sigma_max = sigma_max(&kry.k_mat).unwrap();
        assert!(ext.log_sigma_min < (1e-16 * sigma_max).ln());
        assert!(ext.log_sigma_min.is_finite());
    }
}
