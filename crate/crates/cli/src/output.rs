//! Output directory, resolved-config echo and CSV helpers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Common;
use crate::exit::Failure;
use rbki::Execution;

pub struct Context {
    pub common: Common,
    pub exec: Execution,
}

impl Context {
    pub fn new(common: Common) -> Self {
        let exec = if common.strict {
            Execution::Sequential
        } else {
            Execution::Parallel
        };
        Self { common, exec }
    }

    /// Creates the output directory and writes `config.toml` with every
    /// resolved setting.
    pub fn prepare<T: Serialize>(&self, command: &str, settings: &T) -> Result<(), Failure> {
        let out = &self.common.out;
        fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
        let mut table = toml::Table::new();
        table.insert("command".into(), toml::Value::String(command.into()));
        table.insert("common".into(), to_value(&self.common)?);
        table.insert(command.into(), to_value(settings)?);
        let text = toml::to_string(&table).map_err(|e| Failure::Numerical(e.into()))?;
        let path = self.path("config.toml");
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.common.out.join(name)
    }

    /// `None` in strict mode.
    pub fn wall_time(&self, seconds: f64) -> Option<f64> {
        (!self.common.strict).then_some(seconds)
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<toml::Value, Failure> {
    toml::Value::try_from(v).map_err(|e| Failure::Numerical(anyhow::anyhow!("cannot echo configuration: {e}")))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::io(path, e))?;
    w.write_record(header).map_err(|e| Failure::io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| Failure::io(path, e))?;
    }
    w.flush().map_err(|e| Failure::io(path, e))
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }
}
