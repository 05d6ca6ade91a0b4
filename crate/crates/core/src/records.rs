//! Per-trial result rows and their CSV serialization.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{io_at, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of the CSV output. `log_` columns hold natural logarithms.
pub const COLUMNS: [&str; 22] = [
    "schema_version",
    "experiment",
    "seed",
    "trial",
    "k",
    "b",
    "q",
    "t",
    "epsilon",
    "delta",
    "gamma",
    "matvec_count",
    "proxy_cost",
    "wall_time_s",
    "frobenius_ratio",
    "spectral_ratio",
    "max_index_residual",
    "sigma_min",
    "log_sigma_min",
    "log_bound",
    "degenerate",
    "pass",
];

/// One seeded experiment outcome. Fields that do not apply to an experiment
/// are `NaN` (numeric) and serialize as `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: String,
    pub seed: u64,
    pub trial: u64,
    pub k: usize,
    pub b: usize,
    pub q: usize,
    pub t: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub matvec_count: u64,
    pub proxy_cost: u64,
    /// `None` in strict-deterministic output.
    pub wall_time: Option<f64>,
    pub frobenius_ratio: f64,
    pub spectral_ratio: f64,
    pub max_index_residual: f64,
    pub sigma_min: f64,
    pub log_sigma_min: f64,
    pub log_bound: f64,
    pub degenerate: bool,
    pub pass: bool,
}

impl TrialRecord {
    pub fn new(experiment: impl Into<String>, seed: u64, trial: u64) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            trial,
            k: 0,
            b: 0,
            q: 0,
            t: 0,
            epsilon: f64::NAN,
            delta: f64::NAN,
            gamma: f64::NAN,
            matvec_count: 0,
            proxy_cost: 0,
            wall_time: None,
            frobenius_ratio: f64::NAN,
            spectral_ratio: f64::NAN,
            max_index_residual: f64::NAN,
            sigma_min: f64::NAN,
            log_sigma_min: f64::NAN,
            log_bound: f64::NAN,
            degenerate: false,
            pass: false,
        }
    }

    fn fields(&self) -> Vec<String> {
        vec![
            SCHEMA_VERSION.to_string(),
            self.experiment.clone(),
            self.seed.to_string(),
            self.trial.to_string(),
            self.k.to_string(),
            self.b.to_string(),
            self.q.to_string(),
            self.t.to_string(),
            float(self.epsilon),
            float(self.delta),
            float(self.gamma),
            self.matvec_count.to_string(),
            self.proxy_cost.to_string(),
            self.wall_time.map(float).unwrap_or_default(),
            float(self.frobenius_ratio),
            float(self.spectral_ratio),
            float(self.max_index_residual),
            float(self.sigma_min),
            float(self.log_sigma_min),
            float(self.log_bound),
            self.degenerate.to_string(),
            self.pass.to_string(),
        ]
    }
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes records sorted by `(experiment, seed, trial)`.
pub fn write_records<W: Write>(records: &[TrialRecord], out: W) -> csv::Result<()> {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.experiment.as_str(), a.seed, a.trial).cmp(&(b.experiment.as_str(), b.seed, b.trial))
    });
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in sorted {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_records(records: &[TrialRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_at(path, e))?;
    write_records(records, file).map_err(|e| {
        let source = match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        };
        io_at(path, source).into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_records(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn rows_sorted_and_quoted() {
        let mut a = TrialRecord::new("b,quoted", 2, 0);
        a.wall_time = Some(0.5);
        let b = TrialRecord::new("a", 9, 0);
        let c = TrialRecord::new("b,quoted", 1, 0);
        let mut buf = Vec::new();
        write_records(&[a, b, c], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("1,a,9,"));
        assert!(lines[2].starts_with("1,\"b,quoted\",1,"));
        assert!(lines[3].starts_with("1,\"b,quoted\",2,"));
    }
}
