//! Gap statistics of a spectrum and the iteration-count recommendation built
//! on them.
//!
//! All statistics are computed on the squared singular values
//! `λ_i = σ_i²` (the eigenvalues of `AAᵀ`).

use crate::error::{Error, Result};

/// Minimum relative gap `Δ_k`, rank-`k` condition number `κ_k` and the
/// minimum additive gap over the leading `k` eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub k: usize,
    /// `min_{i<k} (λ_i − λ_{i+1}) / λ_i`, in `[0, 1]`.
    pub min_relative_gap: f64,
    /// `λ_1 / λ_{k−1}`, at least 1.
    pub condition_number: f64,
    /// `min_{i<k} (λ_i − λ_{i+1})`, in units of `λ`.
    pub additive_gap: f64,
    eigenvalues: Vec<f64>,
}

/// `GapStats` from singular values (squared internally).
pub fn gap_stats(singular_values: &[f64], k: usize) -> Result<GapStats> {
    GapStats::from_singular_values(singular_values, k)
}

impl GapStats {
    pub fn from_singular_values(singular_values: &[f64], k: usize) -> Result<Self> {
        let eigs: Vec<f64> = singular_values.iter().map(|s| s * s).collect();
        for w in singular_values.windows(2) {
            if w[1] > w[0] {
                return Err(Error::config("singular values must be nonincreasing"));
            }
        }
        Self::from_eigenvalues(&eigs, k)
    }

    /// Eigenvalues of `AAᵀ`, nonincreasing.
    pub fn from_eigenvalues(eigenvalues: &[f64], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("rank k must be at least 1"));
        }
        if eigenvalues.len() < k {
            return Err(Error::config(format!(
                "need at least k = {k} spectrum values, got {}",
                eigenvalues.len()
            )));
        }
        for (i, w) in eigenvalues.windows(2).enumerate() {
            if !(w[1] <= w[0]) {
                return Err(Error::config(format!(
                    "spectrum must be nonincreasing (index {} then {})",
                    i,
                    i + 1
                )));
            }
        }
        let lead = &eigenvalues[..k];
        if lead[..k.saturating_sub(1).max(1)].iter().any(|l| !(*l > 0.0)) {
            return Err(Error::config(
                "leading k-1 spectrum values must be positive",
            ));
        }

        let (mut rel, mut add) = (1.0_f64, lead[0]);
        for i in 0..k.saturating_sub(1) {
            let diff = lead[i] - lead[i + 1];
            rel = rel.min(diff / lead[i]);
            add = add.min(diff);
        }
        let condition_number = if k >= 2 { lead[0] / lead[k - 2] } else { 1.0 };
        let stats = GapStats {
            k,
            min_relative_gap: rel,
            condition_number,
            additive_gap: add,
            eigenvalues: eigenvalues.to_vec(),
        };
        // Additive gaps dominate the relative-gap / condition-number ratio.
        debug_assert!(
            stats.additive_gap >= lead[0] * rel / condition_number * (1.0 - 1e-12),
            "additive gap below λ₁Δ/κ"
        );
        Ok(stats)
    }

    /// Same spectrum, statistics recomputed at another rank.
    pub fn at_rank(&self, k: usize) -> Result<GapStats> {
        Self::from_eigenvalues(&self.eigenvalues, k)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `additive_gap / λ_1`.
    pub fn normalized_additive_gap(&self) -> f64 {
        self.additive_gap / self.eigenvalues[0]
    }

    /// `(λ_k − λ_ℓ) / λ_k` with 1-based `k < ℓ`.
    pub fn pairwise_gap(&self, k: usize, ell: usize) -> Result<f64> {
        if k == 0 || ell <= k || ell > self.eigenvalues.len() {
            return Err(Error::config(format!(
                "pairwise gap needs 1 <= k < l <= {}, got k = {k}, l = {ell}",
                self.eigenvalues.len()
            )));
        }
        let lk = self.eigenvalues[k - 1];
        if !(lk > 0.0) {
            return Err(Error::config("pairwise gap undefined for λ_k = 0"));
        }
        Ok((lk - self.eigenvalues[ell - 1]) / lk)
    }

    /// `ln(κ / Δ)`; infinite when the relative gap vanishes.
    pub fn log_condition_over_gap(&self) -> f64 {
        (self.condition_number / self.min_relative_gap).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QMode {
    GapIndependent,
    /// Uses `gap_{k→ℓ}` in place of `ε` and `ℓ` in place of `k` for the depth.
    GapDependent { ell: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRequest {
    pub k: usize,
    pub b: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
    /// Multiplier standing in for the unspecified universal constant.
    pub calibration: f64,
    pub mode: QMode,
}

impl QRequest {
    pub fn new(k: usize, b: usize, epsilon: f64, delta: f64, n: usize) -> Self {
        Self {
            k,
            b,
            epsilon,
            delta,
            n,
            calibration: 1.0,
            mode: QMode::GapIndependent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRecommendation {
    /// Recommended iteration count, never below the depth `t`.
    pub q: usize,
    /// `⌈k/b⌉` (or `⌈ℓ/b⌉` in gap-dependent mode).
    pub t: usize,
    /// `b·t`, the rank whose gap statistics enter the formula.
    pub k_prime: usize,
    /// `c1 · t/√ε · ln(κ/Δ)`.
    pub depth_term: f64,
    /// `c1 · 1/√ε · ln(n/(δε))`.
    pub confidence_term: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl QRecommendation {
    pub fn unrounded(&self) -> f64 {
        self.depth_term + self.confidence_term
    }
}

/// Clamps `ε` and `δ` to at most 1, warning when it does.
pub fn clamp_accuracy(epsilon: f64, delta: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0) || !(delta > 0.0) {
        return Err(Error::config(format!(
            "epsilon and delta must be positive, got {epsilon} and {delta}"
        )));
    }
    let mut out = (epsilon, delta);
    if epsilon > 1.0 {
        log::warn!("epsilon = {epsilon} >= 1 clamped to 1");
        out.0 = 1.0;
    }
    if delta > 1.0 {
        log::warn!("delta = {delta} >= 1 clamped to 1");
        out.1 = 1.0;
    }
    Ok(out)
}

/// Iteration count `q` sufficient (up to the calibration constant) for the
/// block Krylov method to reach accuracy `ε` with probability `1 − δ`.
pub fn recommend_q(spectrum: &GapStats, req: &QRequest) -> Result<QRecommendation> {
    if req.k == 0 || req.b == 0 || req.b > req.k {
        return Err(Error::config(format!(
            "need 1 <= b <= k, got b = {}, k = {}",
            req.b, req.k
        )));
    }
    if req.n == 0 {
        return Err(Error::config("dimension n must be positive"));
    }
    if !(req.calibration > 0.0) {
        return Err(Error::config("calibration constant must be positive"));
    }
    let (epsilon, delta) = clamp_accuracy(req.epsilon, req.delta)?;

    let (rank, rate) = match req.mode {
        QMode::GapIndependent => (req.k, epsilon),
        QMode::GapDependent { ell } => {
            if ell <= req.k {
                return Err(Error::config(format!("gap-dependent mode needs l > k, got l = {ell}")));
            }
            let gap = spectrum.pairwise_gap(req.k, ell)?;
            if !(gap > 0.0) {
                return Err(Error::config("gap_{k->l} must be positive"));
            }
            (ell, gap)
        }
    };
    let t = rank.div_ceil(req.b);
    let k_prime = req.b * t;
    let stats = spectrum.at_rank(k_prime)?;
    if !(stats.min_relative_gap > 0.0) {
        return Err(Error::ZeroGap);
    }
    let root = rate.sqrt();
    let depth_term = req.calibration * (t as f64 / root) * stats.log_condition_over_gap();
    let confidence_term =
        req.calibration * (1.0 / root) * (req.n as f64 / (delta * epsilon)).ln();
    let q = ((depth_term + confidence_term).ceil() as usize).max(t);
    Ok(QRecommendation {
        q,
        t,
        k_prime,
        depth_term,
        confidence_term,
        epsilon,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvalue_example() {
        let g = GapStats::from_eigenvalues(&[1.0, 0.5, 0.25], 3).unwrap();
        assert_relative_eq!(g.min_relative_gap, 0.5);
        assert_relative_eq!(g.condition_number, 2.0);
        assert_relative_eq!(g.additive_gap, 0.25);
    }

    #[test]
    fn equal_values_have_zero_gap() {
        let g = gap_stats(&[1.0, 0.7, 0.7, 0.2], 4).unwrap();
        assert_eq!(g.min_relative_gap, 0.0);
    }

    #[test]
    fn geometric_singular_values() {
        let s: Vec<f64> = (0..25).map(|i| 0.9f64.powi(i)).collect();
        let g = gap_stats(&s, 20).unwrap();
        assert_relative_eq!(g.min_relative_gap, 1.0 - 0.81, epsilon = 1e-12);
        assert_relative_eq!(g.condition_number, 0.81f64.powi(-18), max_relative = 1e-12);
    }

    #[test]
    fn rejects_short_or_unsorted() {
        assert!(gap_stats(&[1.0, 0.5], 3).is_err());
        assert!(gap_stats(&[0.5, 1.0], 2).is_err());
    }

    #[test]
    fn pairwise_gap_definition() {
        let g = GapStats::from_eigenvalues(&[1.0, 0.8, 0.5, 0.1], 2).unwrap();
        assert_relative_eq!(g.pairwise_gap(2, 4).unwrap(), (0.8 - 0.1) / 0.8);
        assert!(g.pairwise_gap(2, 2).is_err());
    }

    #[test]
    fn recommend_q_single_depth() {
        let s: Vec<f64> = (0..50).map(|i| 0.9f64.powi(i)).collect();
        let g = gap_stats(&s, 10).unwrap();
        let mut req = QRequest::new(10, 10, 1.0, 0.1, 200);
        let r = recommend_q(&g, &req).unwrap();
        let expected = g.log_condition_over_gap() + (200.0f64 / 0.1).ln();
        assert_eq!(r.q, expected.ceil() as usize);
        req.epsilon = 3.0;
        assert_eq!(recommend_q(&g, &req).unwrap().q, r.q);
    }

    #[test]
    fn recommend_q_zero_gap_points_to_smoothing() {
        let g = gap_stats(&[1.0, 1.0, 0.5, 0.1], 3).unwrap();
        let req = QRequest::new(3, 1, 0.5, 0.1, 10);
        assert!(matches!(recommend_q(&g, &req), Err(Error::ZeroGap)));
    }
}
