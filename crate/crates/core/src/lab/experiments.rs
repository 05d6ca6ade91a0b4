//! Seeded trial sweeps over random Vandermonde-form Krylov matrices.

use super::bounds::sigma_min_log_bound;
use super::model::{sample_krylov, SpectrumModel, VandermondeKrylov};
use super::precise::log_sigma_min_extended;
use super::pv::{pv_decompose, pv_inequality, rank_tolerance, PVInequality};
use crate::dense::{singular_values, Mat, EPS};
use crate::error::Result;
use crate::par::{try_map_trials, Execution};
use crate::random::derive_seed;
use crate::records::TrialRecord;

/// Slack of the decomposition inequality, relative to `σ_max(K)`.
pub const PV_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMinTrial {
    pub trial: usize,
    pub seed: u64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub log_sigma_min: f64,
    pub log_bound: f64,
    /// `None` for degenerate instances.
    pub pv: Option<PVInequality>,
    pub degenerate: bool,
    /// `σ_min` was below double-precision resolution and was recomputed in
    /// extended precision.
    pub extended: bool,
}

impl SigmaMinTrial {
    pub fn below_bound(&self) -> bool {
        !(self.log_sigma_min >= self.log_bound)
    }

    pub fn pv_violated(&self) -> bool {
        self.pv.is_some_and(|p| !p.holds(PV_SLACK))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMinSummary {
    pub k: usize,
    pub b: usize,
    pub t: usize,
    pub trials: usize,
    pub below_bound: usize,
    pub degenerate: usize,
    pub pv_violations: usize,
    pub extended: usize,
    pub log_bound: f64,
    /// 5%, 50% and 95% quantiles of `ln σ_min(K)`.
    pub log_sigma_min_quantiles: [f64; 3],
}

impl SigmaMinSummary {
    pub fn failure_fraction(&self) -> f64 {
        self.below_bound as f64 / self.trials as f64
    }

    /// `ln(median σ_min) − ln(bound)`.
    pub fn median_log_slack(&self) -> f64 {
        self.log_sigma_min_quantiles[1] - self.log_bound
    }
}

#[derive(Debug, Clone)]
pub struct SigmaMinReport {
    pub trials: Vec<SigmaMinTrial>,
    pub summary: SigmaMinSummary,
}

impl SigmaMinReport {
    pub fn records(&self, experiment: &str, delta: f64) -> Vec<TrialRecord> {
        let s = &self.summary;
        self.trials
            .iter()
            .map(|tr| {
                let mut r = TrialRecord::new(experiment, tr.seed, tr.trial as u64);
                r.k = s.k;
                r.b = s.b;
                r.t = s.t;
                r.delta = delta;
                r.sigma_min = tr.sigma_min;
                r.log_sigma_min = tr.log_sigma_min;
                r.log_bound = tr.log_bound;
                r.degenerate = tr.degenerate;
                r.pass = !tr.below_bound() && !tr.pv_violated();
                r
            })
            .collect()
    }
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    let w = pos - lo as f64;
    if w == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

/// `trials` independent draws of `K`; trial `i` uses `derive_seed(seed, i)`.
pub fn sigma_min_experiment(
    spectrum: &SpectrumModel,
    b: usize,
    trials: usize,
    seed: u64,
    delta: f64,
    calibration: f64,
    exec: Execution,
) -> Result<SigmaMinReport> {
    let log_bound = sigma_min_log_bound(spectrum, b, delta, calibration)?;
    let rows = try_map_trials(trials, exec, |i| -> Result<SigmaMinTrial> {
        let trial_seed = derive_seed(seed, i as u64);
        let kry = sample_krylov(spectrum, b, trial_seed)?;
        let pv = pv_decompose(&kry)?;
        let ineq = pv_inequality(&kry, &pv)?;
        let s = singular_values(&kry.k_mat)?;
        let (sigma_min, sigma_max) = (*s.last().expect("nonempty"), s[0]);
        let extended = sigma_min <= rank_tolerance(kry.k, sigma_max);
        let log_sigma_min = if extended {
            log_sigma_min_extended(&kry)?.log_sigma_min
        } else {
            sigma_min.ln()
        };
        Ok(SigmaMinTrial {
            trial: i,
            seed: trial_seed,
            sigma_min: log_sigma_min.exp(),
            sigma_max,
            log_sigma_min,
            log_bound,
            pv: ineq,
            degenerate: pv.is_degenerate(),
            extended,
        })
    })?;

    let mut logs: Vec<f64> = rows.iter().map(|r| r.log_sigma_min).collect();
    logs.sort_by(f64::total_cmp);
    let summary = SigmaMinSummary {
        k: spectrum.k(),
        b,
        t: spectrum.k() / b,
        trials,
        below_bound: rows.iter().filter(|r| r.below_bound()).count(),
        degenerate: rows.iter().filter(|r| r.degenerate).count(),
        pv_violations: rows.iter().filter(|r| r.pv_violated()).count(),
        extended: rows.iter().filter(|r| r.extended).count(),
        log_bound,
        log_sigma_min_quantiles: [quantile(&logs, 0.05), quantile(&logs, 0.5), quantile(&logs, 0.95)],
    };
    Ok(SigmaMinReport { trials: rows, summary })
}

/// Rank decision `σ_min > k·ε·σ_max·10³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTest {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub full_rank: bool,
}

pub fn rank_test(m: &Mat) -> Result<RankTest> {
    let s = singular_values(m)?;
    let (sigma_min, sigma_max) = (*s.last().expect("nonempty"), s[0]);
    let k = m.nrows().max(m.ncols());
    Ok(RankTest {
        sigma_min,
        sigma_max,
        full_rank: sigma_min > k as f64 * EPS * sigma_max * 1e3,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonsingularityReport {
    pub trials: usize,
    /// Trial indices whose `K` failed the rank test.
    pub rank_failures: Vec<usize>,
    /// Smallest `σ_min/σ_max` seen.
    pub min_relative_sigma: f64,
}

pub fn nonsingularity_check(
    spectrum: &SpectrumModel,
    b: usize,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<NonsingularityReport> {
    let tests = try_map_trials(trials, exec, |i| {
        let kry = sample_krylov(spectrum, b, derive_seed(seed, i as u64))?;
        rank_test(&kry.k_mat)
    })?;
    Ok(NonsingularityReport {
        trials,
        rank_failures: tests.iter().enumerate().filter(|(_, r)| !r.full_rank).map(|(i, _)| i).collect(),
        min_relative_sigma: tests.iter().map(|r| r.sigma_min / r.sigma_max).fold(f64::INFINITY, f64::min),
    })
}

/// `Ĥ` with column `i` the indicator of rows `it..(i+1)t`: `K` becomes block
/// diagonal with square Vandermonde blocks on disjoint node groups.
pub fn witness_block(k: usize, b: usize) -> Mat {
    let t = k / b;
    Mat::from_fn(k, b, |r, c| if r / t == c { 1.0 } else { 0.0 })
}

/// Rank test of the deterministic witness for `(k, b)`.
pub fn block_diagonal_witness(spectrum: &SpectrumModel, b: usize) -> Result<(VandermondeKrylov, RankTest)> {
    let h = witness_block(spectrum.k(), b);
    let kry = VandermondeKrylov::from_block(spectrum, h, 0)?;
    let test = rank_test(&kry.k_mat)?;
    Ok((kry, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_and_slope() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!((fit_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn witness_has_full_rank() {
        let s = SpectrumModel::geometric(9, 0.7).unwrap();
        let (_, test) = block_diagonal_witness(&s, 3).unwrap();
        assert!(test.full_rank);
    }

    #[test]
    fn repeated_eigenvalue_is_singular() {
        let s = SpectrumModel::with_repeats(vec![1.0, 0.6, 0.6, 0.2], "rep").unwrap();
        let kry = sample_krylov(&s, 1, 3).unwrap();
        assert!(!rank_test(&kry.k_mat).unwrap().full_rank);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let s = SpectrumModel::geometric(8, 0.8).unwrap();
        let a = sigma_min_experiment(&s, 2, 6, 1, 0.1, 1.0, Execution::Sequential).unwrap();
        let b = sigma_min_experiment(&s, 2, 6, 1, 0.1, 1.0, Execution::Parallel).unwrap();
        assert_eq!(a.trials, b.trials);
    }
}
