//! `rbki lab`: conditioning of square random block Krylov matrices.

use rbki::lab::{
    certify, complement_basis, nonsingularity_check, root_polynomial, sample_krylov, sigma_min_experiment,
    subspace_nonsparse_check, vandermonde_nonsparse_count, SpectrumModel,
};
use rbki::par::try_map_trials;
use rbki::random::{derive_seed, rng_for, unit_vector};
use rbki::records::float;
use rbki::{Error, SpectrumKind};

use crate::config::LabConfig;
use crate::exit::Failure;
use crate::output::{write_csv, Context};

const SUMMARY_COLUMNS: &[&str] = &[
    "k",
    "b",
    "t",
    "trials",
    "log_bound",
    "below_bound",
    "failure_fraction",
    "log_sigma_min_q05",
    "log_sigma_min_q50",
    "log_sigma_min_q95",
    "extended_precision",
    "degenerate",
    "pv_violations",
    "rank_failures",
    "vandermonde_violations",
    "subspace_sparse",
    "certificates_validated",
];

/// Per-block-size tallies beyond the `σ_min` summary.
struct Extra {
    rank_failures: usize,
    vandermonde_violations: usize,
    subspace_sparse: Option<usize>,
    certificates_validated: Option<usize>,
}

pub fn run(ctx: &Context, cfg: LabConfig) -> Result<(), Failure> {
    let kind: SpectrumKind = cfg.spectrum.parse()?;
    let spectrum = SpectrumModel::from_singular(&kind, cfg.k)?;
    ctx.prepare("lab", &cfg)?;

    let mut records = Vec::new();
    let mut summary_rows = Vec::new();
    let mut violations = 0;
    println!("lab {} k = {}, {} trials per block size", spectrum.tag(), cfg.k, cfg.trials);
    for &b in &cfg.b {
        let seed = derive_seed(ctx.common.seed, b as u64);
        let report = sigma_min_experiment(&spectrum, b, cfg.trials, seed, cfg.delta, cfg.calibration_c, ctx.exec)?;
        let extra = side_checks(ctx, &cfg, &spectrum, b, seed)?;
        let s = &report.summary;
        violations += s.pv_violations + extra.vandermonde_violations;
        records.extend(report.records("lab_sigma_min", cfg.delta));

        println!(
            "  b = {b:>3}  t = {:>3}  bound ln = {:>10.3}  median ln sigma_min = {:>10.3}  below bound {}/{}  \
             pv violations {}  vandermonde violations {}  sparse Q_j x {}",
            s.t,
            s.log_bound,
            s.log_sigma_min_quantiles[1],
            s.below_bound,
            s.trials,
            s.pv_violations,
            extra.vandermonde_violations,
            extra.subspace_sparse.map_or("n/a".into(), |c| format!("{c}/{}", s.trials)),
        );
        let [q05, q50, q95] = s.log_sigma_min_quantiles;
        summary_rows.push(vec![
            s.k.to_string(),
            s.b.to_string(),
            s.t.to_string(),
            s.trials.to_string(),
            float(s.log_bound),
            s.below_bound.to_string(),
            float(s.failure_fraction()),
            float(q05),
            float(q50),
            float(q95),
            s.extended.to_string(),
            s.degenerate.to_string(),
            s.pv_violations.to_string(),
            extra.rank_failures.to_string(),
            extra.vandermonde_violations.to_string(),
            extra.subspace_sparse.map(|c| c.to_string()).unwrap_or_default(),
            extra.certificates_validated.map(|c| c.to_string()).unwrap_or_default(),
        ]);
    }
    rbki::emit_records(&records, &ctx.path("lab_trials.csv"))?;
    write_csv(&ctx.path("lab_summary.csv"), SUMMARY_COLUMNS, &summary_rows)?;
    if violations > 0 {
        return Err(Failure::numerical(format!(
            "{violations} deterministic inequality violations; see lab_summary.csv"
        )));
    }
    Ok(())
}

fn side_checks(ctx: &Context, cfg: &LabConfig, spectrum: &SpectrumModel, b: usize, seed: u64) -> Result<Extra, Failure> {
    let k = cfg.k;
    let t = k / b;
    let rank = nonsingularity_check(spectrum, b, cfg.trials, seed, ctx.exec)?;

    let v = spectrum.vandermonde(t)?;
    let need = k - (t - 1);
    let mut vandermonde_violations = try_map_trials(cfg.trials, ctx.exec, |i| -> Result<usize, Error> {
        let y = unit_vector(t, &mut rng_for(derive_seed(seed, i as u64), 7));
        Ok(usize::from(vandermonde_nonsparse_count(&v, y.as_slice(), spectrum)?.count < need))
    })?
    .into_iter()
    .sum::<usize>();
    let adversarial = root_polynomial(&spectrum.eigenvalues()[1..t]);
    vandermonde_violations += usize::from(vandermonde_nonsparse_count(&v, &adversarial, spectrum)?.count < need);

    // With a single block the complement is the whole space and neither
    // check applies.
    if b < 2 {
        return Ok(Extra {
            rank_failures: rank.rank_failures.len(),
            vandermonde_violations,
            subspace_sparse: None,
            certificates_validated: None,
        });
    }
    let per_trial = try_map_trials(cfg.trials, ctx.exec, |i| -> Result<(bool, bool), Error> {
        let trial_seed = derive_seed(seed, i as u64);
        let kry = sample_krylov(spectrum, b, trial_seed)?;
        let comp = complement_basis(&kry, 0)?;
        let sparse = !comp.degenerate && {
            let x = unit_vector(t, &mut rng_for(trial_seed, 9));
            subspace_nonsparse_check(&comp.q, &x, spectrum, cfg.delta)?.count < t + 1
        };
        let validated = match certify(&kry, spectrum, 0, 1, cfg.delta, trial_seed) {
            Ok(c) => c.validated(),
            Err(Error::Singular(_)) => false,
            Err(e) => return Err(e),
        };
        Ok((sparse, validated))
    })?;

    Ok(Extra {
        rank_failures: rank.rank_failures.len(),
        vandermonde_violations,
        subspace_sparse: Some(per_trial.iter().filter(|(s, _)| *s).count()),
        certificates_validated: Some(per_trial.iter().filter(|(_, v)| *v).count()),
    })
}
