//! Append-only CSV metrics with a fixed column schema.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

pub const METRIC_COLUMNS: [&str; 11] = [
    "step",
    "eval_return_mean",
    "eval_return_std",
    "critic_kl",
    "critic_ce",
    "baseline_loss",
    "policy_loss_on",
    "policy_loss_off",
    "entropy",
    "mean_abs_residual",
    "mean_pos_adv",
];

/// One metrics row, written at every evaluation interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsRow {
    pub step: usize,
    pub eval_return_mean: f64,
    pub eval_return_std: f64,
    pub critic_kl: f64,
    pub critic_ce: f64,
    pub baseline_loss: f64,
    pub policy_loss_on: f64,
    pub policy_loss_off: f64,
    pub entropy: f64,
    pub mean_abs_residual: f64,
    pub mean_pos_adv: f64,
}

impl MetricsRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.eval_return_mean,
            self.eval_return_std,
            self.critic_kl,
            self.critic_ce,
            self.baseline_loss,
            self.policy_loss_on,
            self.policy_loss_off,
            self.entropy,
            self.mean_abs_residual,
            self.mean_pos_adv
        )
    }
}

/// Writes the header eagerly and flushes after every row, so a crash
/// leaves a readable file.
pub struct MetricsWriter {
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path)?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", METRIC_COLUMNS.join(","))?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn write_row(&mut self, row: &MetricsRow) -> Result<()> {
        writeln!(self.out, "{}", row.to_csv())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Parses a metrics CSV back into rows (used by the diagnostics command).
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| crate::error::Error::Parse("empty metrics file".into()))?;
    if header != METRIC_COLUMNS.join(",") {
        return Err(crate::error::Error::Parse(format!(
            "unexpected metrics header '{header}'"
        )));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != METRIC_COLUMNS.len() {
            return Err(crate::error::Error::Parse(format!(
                "metrics row has {} fields",
                fields.len()
            )));
        }
        let f = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|e| crate::error::Error::Parse(format!("bad metrics value: {e}")))
        };
        rows.push(MetricsRow {
            step: fields[0]
                .parse()
                .map_err(|e| crate::error::Error::Parse(format!("bad step: {e}")))?,
            eval_return_mean: f(1)?,
            eval_return_std: f(2)?,
            critic_kl: f(3)?,
            critic_ce: f(4)?,
            baseline_loss: f(5)?,
            policy_loss_on: f(6)?,
            policy_loss_off: f(7)?,
            entropy: f(8)?,
            mean_abs_residual: f(9)?,
            mean_pos_adv: f(10)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_through_the_file() {
        let dir = std::env::temp_dir().join("dpo_metrics_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("metrics.csv");
        let rows = vec![
            MetricsRow {
                step: 4096,
                eval_return_mean: -12.25,
                eval_return_std: 0.5,
                critic_kl: 0.001953125,
                ..Default::default()
            },
            MetricsRow {
                step: 8192,
                eval_return_mean: -7.0,
                entropy: 1.375,
                ..Default::default()
            },
        ];
        let mut writer = MetricsWriter::create(&path).unwrap();
        for row in &rows {
            writer.write_row(row).unwrap();
        }
        drop(writer);
        let read = read_metrics(&path).unwrap();
        assert_eq!(read, rows);
        std::fs::remove_dir_all(&dir).ok();
    }
}
