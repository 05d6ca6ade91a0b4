//! Closed-form thresholds, all evaluated as natural logarithms.

use super::model::SpectrumModel;
use crate::error::{Error, Result};

fn depth(spectrum: &SpectrumModel, b: usize) -> Result<usize> {
    let k = spectrum.k();
    if b == 0 || !k.is_multiple_of(b) {
        return Err(Error::config(format!("block size b = {b} must divide k = {k}")));
    }
    Ok(k / b)
}

/// `(t−1)·ln(Δ/(cκ))`, zero for `t = 1` and `−∞` if the gap vanishes.
fn gap_term(spectrum: &SpectrumModel, t: usize, c: f64) -> f64 {
    if t <= 1 {
        return 0.0;
    }
    (t - 1) as f64 * spectrum.log_gap_ratio(c)
}

/// `ln( C·δ⁵/k¹⁴·(Δ_k/(6κ_k))^{6(t−1)} )`, the high-probability lower bound on
/// `σ_min(K)`.
pub fn sigma_min_log_bound(spectrum: &SpectrumModel, b: usize, delta: f64, calibration: f64) -> Result<f64> {
    let t = depth(spectrum, b)?;
    if !(delta > 0.0 && delta < 1.0) || !(calibration > 0.0) {
        return Err(Error::config("need 0 < delta < 1 and a positive calibration constant"));
    }
    let gap = 6.0 * gap_term(spectrum, t, 6.0);
    if gap == f64::NEG_INFINITY {
        log::warn!("minimum relative gap is zero; the bound degenerates to 0");
    }
    let k = spectrum.k() as f64;
    Ok(calibration.ln() + 5.0 * delta.ln() - 14.0 * k.ln() + gap)
}

/// `ln( ‖y‖_∞ (Δ/(6κ))^{2(t−1)} )`.
pub fn vandermonde_log_threshold(spectrum: &SpectrumModel, y_inf: f64, t: usize) -> f64 {
    y_inf.ln() + 2.0 * gap_term(spectrum, t, 6.0)
}

/// `ln( δ·ln^{−1/2}(2/δ)/(14k³) · (Δ/(2κ))^{t−1} )`.
pub fn subspace_log_threshold(spectrum: &SpectrumModel, t: usize, delta: f64) -> f64 {
    let k = spectrum.k() as f64;
    delta.ln() - 0.5 * (2.0 / delta).ln().ln() - 14f64.ln() - 3.0 * k.ln() + gap_term(spectrum, t, 2.0)
}

/// Injective-RIP constant `η = δ/(2k^{3/2})·(Δ/(2κ))^{t−1}` of a single-vector
/// certificate.
pub fn certificate_eta(spectrum: &SpectrumModel, t: usize, delta: f64) -> f64 {
    let k = spectrum.k() as f64;
    (delta.ln() - 2f64.ln() - 1.5 * k.ln() + gap_term(spectrum, t, 2.0)).exp()
}

/// Norm bound `M = √5·k^{3/2}·√ln(2/δ)`.
pub fn certificate_norm_bound(k: usize, delta: f64) -> f64 {
    5f64.sqrt() * (k as f64).powf(1.5) * (2.0 / delta).ln().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_depth_has_no_gap_term() {
        let s = SpectrumModel::geometric(6, 0.5).unwrap();
        let v = sigma_min_log_bound(&s, 6, 0.1, 2.0).unwrap();
        let expected = 2f64.ln() + 5.0 * 0.1f64.ln() - 14.0 * 6f64.ln();
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn gap_term_is_linear_in_depth() {
        let s = SpectrumModel::geometric(12, 0.8).unwrap();
        let base = sigma_min_log_bound(&s, 12, 0.1, 1.0).unwrap();
        let one = sigma_min_log_bound(&s, 6, 0.1, 1.0).unwrap() - base;
        let two = sigma_min_log_bound(&s, 4, 0.1, 1.0).unwrap() - base;
        assert!((two - 2.0 * one).abs() < 1e-10 * two.abs());
    }

    #[test]
    fn subspace_threshold_monotone_in_delta() {
        let s = SpectrumModel::geometric(24, 0.81).unwrap();
        let a = subspace_log_threshold(&s, 6, 0.1);
        let b = subspace_log_threshold(&s, 6, 0.01);
        assert!(b < a);
    }

    #[test]
    fn no_underflow_in_log_space() {
        let s = SpectrumModel::geometric(200, 0.99).unwrap();
        let v = sigma_min_log_bound(&s, 8, 0.1, 1.0).unwrap();
        assert!(v.is_finite() && v < f64::MIN_POSITIVE.ln());
    }
}
