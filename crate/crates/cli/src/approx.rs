//! `rbki approx`: factor a matrix and report Rank-k accuracy.

use std::time::Instant;

use rbki::dense::singular_values;
use rbki::krylov::DEFAULT_DROP_TOL;
use rbki::par::try_map_trials;
use rbki::random::derive_seed;
use rbki::{
    build_symmetric_krylov, error_metrics, gaussian_start_block, rbki, rbki_smoothed, recommend_q,
    smooth_perturb, write_matrix, ErrorMetrics, GapStats, KrylovConfig, LinearOperator, LowRankApprox, Mat,
    MatrixFormat, OuterGram, PerturbationConfig, QRequest, Tally, TrialRecord,
};

use crate::config::{ApproxConfig, QChoice};
use crate::exit::Failure;
use crate::output::{median, Context};
use crate::source::{load, Loaded};

/// Depth of the Rayleigh–Ritz pilot that estimates the leading eigenvalues.
const PILOT_DEPTH: usize = 4;

pub fn run(ctx: &Context, cfg: ApproxConfig) -> Result<(), Failure> {
    let loaded = load(&cfg.source)?;
    let (n, d) = loaded.shape();
    for &b in &cfg.b {
        KrylovConfig::new(cfg.k, b, cfg.k.div_ceil(b.max(1)), 0).validate(n, d)?;
    }
    ctx.prepare("approx", &cfg)?;

    let norm = loaded.spectral_norm(ctx.common.seed);
    let mut records = Vec::new();
    println!("approx {}: k = {}", loaded.label, cfg.k);
    for &b in &cfg.b {
        let q = choose_q(ctx, &cfg, &loaded, b, norm)?;
        let rows = try_map_trials(cfg.trials, ctx.exec, |i| -> Result<_, rbki::Error> {
            let seed = derive_seed(ctx.common.seed, i as u64);
            let kc = KrylovConfig {
                epsilon: cfg.epsilon,
                delta: cfg.delta,
                ..KrylovConfig::new(cfg.k, b, q, seed)
            };
            let started = Instant::now();
            let approx = match cfg.gamma {
                Some(gamma) => rbki_smoothed(&loaded.op, &kc, &PerturbationConfig { gamma, seed }, norm)?,
                None => rbki(&loaded.op, &kc)?,
            };
            let seconds = started.elapsed().as_secs_f64();
            let metrics = loaded
                .reference
                .as_ref()
                .map(|r| error_metrics(&loaded.op, &approx, r))
                .transpose()?;
            let record = record(ctx, &cfg, &approx, metrics.as_ref(), seed, i, seconds);
            Ok((record, (i == 0).then_some(approx)))
        })?;

        let mut batch = Vec::with_capacity(rows.len());
        for (record, approx) in rows {
            if let Some(approx) = approx {
                write_factors(ctx, b, &approx)?;
            }
            batch.push(record);
        }
        summarize(b, q, &cfg, &batch, loaded.reference.is_some());
        records.extend(batch);
    }
    let path = ctx.path("records.csv");
    rbki::emit_records(&records, &path)?;
    Ok(())
}

fn record(
    ctx: &Context,
    cfg: &ApproxConfig,
    approx: &LowRankApprox,
    metrics: Option<&ErrorMetrics>,
    seed: u64,
    trial: usize,
    seconds: f64,
) -> TrialRecord {
    let mut r = TrialRecord::new("approx", seed, trial as u64);
    r.k = cfg.k;
    r.b = approx.basis.block_size;
    r.q = approx.basis.iterations;
    r.t = cfg.k.div_ceil(r.b);
    r.epsilon = cfg.epsilon;
    r.delta = cfg.delta;
    r.gamma = cfg.gamma.unwrap_or(f64::NAN);
    r.matvec_count = approx.matvec_cost;
    r.proxy_cost = approx.proxy_cost;
    r.wall_time = ctx.wall_time(seconds);
    if let Some(m) = metrics {
        r.frobenius_ratio = m.frobenius_ratio;
        r.spectral_ratio = m.spectral_ratio;
        r.max_index_residual = m.max_index_residual();
        r.pass = m.solves(cfg.epsilon);
    }
    r
}

/// Fixed `q`, or the recommendation computed from the known spectrum. When
/// the spectrum is unknown or smoothing is on, the leading eigenvalues come
/// from a short Rayleigh–Ritz pilot.
fn choose_q(ctx: &Context, cfg: &ApproxConfig, loaded: &Loaded, b: usize, norm: f64) -> Result<usize, Failure> {
    if let QChoice::Fixed(q) = cfg.q {
        return Ok(q);
    }
    let (n, d) = loaded.shape();
    let k_prime = (b * cfg.k.div_ceil(b)).min(n.min(d));
    let req = QRequest::new(cfg.k, b, cfg.epsilon, cfg.delta, n);
    let stats = match (&loaded.reference, cfg.gamma) {
        (Some(r), None) => GapStats::from_singular_values(&r.singular_values, k_prime)?,
        (_, gamma) => {
            let seed = derive_seed(ctx.common.seed, 0);
            let eig = pilot_eigenvalues(&loaded.op, k_prime, gamma, seed, norm)?;
            GapStats::from_eigenvalues(&eig, k_prime)?
        }
    };
    let rec = recommend_q(&stats, &req)?;
    log::info!(
        "b = {b}: q = {} (depth term {:.1}, confidence term {:.1})",
        rec.q,
        rec.depth_term,
        rec.confidence_term
    );
    Ok(rec.q)
}

/// Ritz estimates of the `count` largest eigenvalues of `AAᵀ` or `AAᵀ + D`.
fn pilot_eigenvalues(
    op: &dyn LinearOperator,
    count: usize,
    gamma: Option<f64>,
    seed: u64,
    norm: f64,
) -> Result<Vec<f64>, Failure> {
    let tally = Tally::new(op);
    let gram = OuterGram::new(&tally);
    let smoothed;
    let m: &dyn LinearOperator = match gamma {
        Some(gamma) => {
            smoothed = smooth_perturb(&tally, &PerturbationConfig { gamma, seed }, norm)?;
            &smoothed
        }
        None => &gram,
    };
    let g = gaussian_start_block(m.nrows(), count, seed)?;
    let basis = build_symmetric_krylov(m, &g, PILOT_DEPTH, DEFAULT_DROP_TOL)?;
    let projected = basis.z.tr_mul(&m.apply(&basis.z));
    let symmetric = (&projected + projected.transpose()) * 0.5;
    let mut eig = singular_values(&symmetric)?;
    eig.truncate(count);
    log::info!("pilot spent {} products with A", tally.matvecs());
    if eig.len() < count {
        return Err(Failure::numerical(format!(
            "pilot found only {} of {count} leading eigenvalues",
            eig.len()
        )));
    }
    Ok(eig)
}

fn write_factors(ctx: &Context, b: usize, approx: &LowRankApprox) -> Result<(), Failure> {
    let sigma = Mat::from_column_slice(approx.rank(), 1, approx.singular_values());
    for (part, m) in [("left", &approx.left_vectors), ("right", &approx.right_vectors), ("sigma", &sigma)] {
        let path = ctx.path(&format!("factors_b{b}_{part}.bin"));
        write_matrix(&path, m, MatrixFormat::RawBinary)?;
    }
    Ok(())
}

fn summarize(b: usize, q: usize, cfg: &ApproxConfig, batch: &[TrialRecord], has_reference: bool) {
    let cost = batch.first().map_or(0, |r| r.matvec_count);
    if !has_reference {
        println!("  b = {b:>3}  q = {q:>4}  matvecs = {cost}  (no reference; pass --exact-reference for accuracy)");
        return;
    }
    let mut ratios: Vec<f64> = batch.iter().map(|r| r.frobenius_ratio).collect();
    let solved = batch.iter().filter(|r| r.pass).count();
    println!(
        "  b = {b:>3}  q = {q:>4}  matvecs = {cost}  median frobenius ratio = {:.6}  solved {solved}/{} at eps = {}",
        median(&mut ratios),
        batch.len(),
        cfg.epsilon
    );
}
