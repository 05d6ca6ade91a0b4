//! `rbki bench`: error against matvecs (and seconds) for several block sizes
//! on paired start seeds.

use std::fs;

use rbki::krylov::DEFAULT_DROP_TOL;
use rbki::par::try_map_trials;
use rbki::random::derive_seed;
use rbki::records::float;
use rbki::{error_trajectory, gaussian_start_block, matvecs_to_target, TrajectoryOptions, TrajectoryPoint, TrialRecord};

use crate::config::BenchConfig;
use crate::exit::Failure;
use crate::output::{median, write_csv, Context};
use crate::source::load;

const TRAJECTORY_COLUMNS: &[&str] =
    &["b", "trial", "seed", "iterations", "basis_columns", "matvecs", "frobenius_ratio", "seconds"];

pub fn run(ctx: &Context, cfg: BenchConfig) -> Result<(), Failure> {
    let loaded = load(&cfg.source)?;
    let (n, d) = loaded.shape();
    let Some(reference) = &loaded.reference else {
        return Err(Failure::config("bench needs a reference spectrum: use --spec or --exact-reference"));
    };
    if cfg.k == 0 || cfg.k > n.min(d) {
        return Err(Failure::config(format!("need 1 <= k <= min(n, d) = {}, got k = {}", n.min(d), cfg.k)));
    }
    if let Some(b) = cfg.b.iter().find(|b| **b > n) {
        return Err(Failure::config(format!("block size {b} exceeds n = {n}")));
    }
    ctx.prepare("bench", &cfg)?;

    let sv = &reference.singular_values;
    let mut records = Vec::new();
    let mut trajectory_rows = Vec::new();
    let mut reached: Vec<(usize, Vec<Option<u64>>)> = Vec::new();
    println!("bench {}: k = {}, target ratio {}", loaded.label, cfg.k, cfg.target);
    for &b in &cfg.b {
        let max_iterations = match cfg.max_matvecs {
            Some(m) => ((m / (2 * b as u64)) as usize).max(1),
            None => d.div_ceil(b) + 1,
        };
        let opts = TrajectoryOptions {
            max_iterations,
            target_ratio: Some(cfg.target),
            drop_tol: DEFAULT_DROP_TOL,
        };
        let runs = try_map_trials(cfg.trials, ctx.exec, |i| -> Result<Vec<TrajectoryPoint>, rbki::Error> {
            let g = gaussian_start_block(n, b, derive_seed(ctx.common.seed, i as u64))?;
            error_trajectory(&loaded.op, &g, cfg.k, sv, &opts)
        })?;

        let mut hits = Vec::with_capacity(runs.len());
        for (i, points) in runs.iter().enumerate() {
            let seed = derive_seed(ctx.common.seed, i as u64);
            let last = points.last().copied().expect("trajectory has a first checkpoint");
            let hit = matvecs_to_target(points, cfg.target);
            let mut r = TrialRecord::new("bench", seed, i as u64);
            r.k = cfg.k;
            r.b = b;
            r.q = last.iterations;
            r.t = cfg.k.div_ceil(b);
            r.matvec_count = hit.unwrap_or(last.matvecs);
            r.proxy_cost = (b * last.iterations) as u64;
            r.wall_time = ctx.wall_time(last.seconds);
            r.frobenius_ratio = last.frobenius_ratio;
            r.pass = hit.is_some();
            records.push(r);
            hits.push(hit);
            for p in points {
                trajectory_rows.push(vec![
                    b.to_string(),
                    i.to_string(),
                    seed.to_string(),
                    p.iterations.to_string(),
                    p.basis_columns.to_string(),
                    p.matvecs.to_string(),
                    float(p.frobenius_ratio),
                    ctx.wall_time(p.seconds).map(float).unwrap_or_default(),
                ]);
            }
        }
        let mut costs: Vec<f64> = hits.iter().flatten().map(|&m| m as f64).collect();
        println!(
            "  b = {b:>3}  reached {}/{}  median matvecs to target = {}",
            costs.len(),
            hits.len(),
            median(&mut costs)
        );
        reached.push((b, hits));
    }

    let single = reached.iter().find(|(b, _)| *b == 1);
    let full = reached.iter().find(|(b, _)| *b == cfg.k);
    if let (Some((_, s)), Some((_, f))) = (single, full) {
        let wins = s
            .iter()
            .zip(f)
            .filter(|(s, f)| match (s, f) {
                (Some(s), Some(f)) => s <= f,
                (Some(_), None) => true,
                _ => false,
            })
            .count();
        println!("  b = 1 needed no more matvecs than b = {} on {wins}/{} paired seeds", cfg.k, s.len());
    }

    rbki::emit_records(&records, &ctx.path("bench.csv"))?;
    write_csv(&ctx.path("bench_trajectory.csv"), TRAJECTORY_COLUMNS, &trajectory_rows)?;
    let script = ctx.path("bench.gp");
    fs::write(&script, plot_script(&cfg.b, !ctx.common.strict)).map_err(|e| Failure::io(&script, e))?;
    Ok(())
}

/// Gnuplot script for `bench_trajectory.csv`; run it from the output directory.
fn plot_script(blocks: &[usize], with_seconds: bool) -> String {
    let series = |x_column: usize| -> String {
        blocks
            .iter()
            .map(|b| {
                format!(
                    "'bench_trajectory.csv' using ($1 == {b} ? ${x_column} : 1/0):7 with lines title 'b = {b}'"
                )
            })
            .collect::<Vec<_>>()
            .join(", \\\n     ")
    };
    let mut s = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset logscale y\nset ylabel 'Frobenius error ratio'\n",
    );
    s.push_str("set terminal pngcairo size 1200,500\nset output 'bench.png'\n");
    if with_seconds {
        s.push_str("set multiplot layout 1,2\n");
    }
    s.push_str(&format!("set xlabel 'matvecs'\nplot {}\n", series(6)));
    if with_seconds {
        s.push_str(&format!("set xlabel 'seconds'\nplot {}\nunset multiplot\n", series(8)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_script_has_one_series_per_block() {
        let s = plot_script(&[1, 4], true);
        assert_eq!(s.matches("title 'b = ").count(), 4);
        assert!(s.contains("multiplot"));
        assert!(!plot_script(&[1], false).contains("seconds"));
    }
}
