//! CSV readers and writers.

use std::collections::HashMap;
use std::io::{Read, Write};

use testroll_core::priors::{ArmSummary, PastExperiment};
use testroll_core::sim::SimResult;

use crate::error::{AppError, AppResult};

/// Marker written for values that are not available.
pub const NA: &str = "NA";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| x.to_string())
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// One summary row per policy.
pub fn write_sim_summary<W: Write>(results: &[SimResult], out: W) -> AppResult<()> {
    let mut w = writer(out);
    w.write_record([
        "policy",
        "replicates",
        "mean_profit",
        "mc_standard_error",
        "mean_regret",
        "regret_standard_error",
        "relative_regret",
        "pi_reference",
        "error_frequency",
        "capped",
    ])?;
    for r in results {
        w.write_record([
            r.policy.clone(),
            r.replicates.to_string(),
            r.mean_profit.to_string(),
            opt(r.mc_standard_error),
            r.mean_regret.to_string(),
            opt(r.regret_standard_error),
            r.relative_regret.to_string(),
            r.pi_reference.to_string(),
            opt(r.error_frequency),
            r.capped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-replicate draws: `policy, replicate, profit, regret, relative_regret`.
pub fn write_draws<W: Write>(results: &[SimResult], out: W) -> AppResult<()> {
    let mut w = writer(out);
    w.write_record(["policy", "replicate", "profit", "regret", "relative_regret"])?;
    for r in results {
        for (i, ((p, g), rel)) in r
            .per_replicate_profit
            .iter()
            .zip(&r.per_replicate_regret)
            .zip(&r.per_replicate_relative_regret)
            .enumerate()
        {
            w.write_record([r.policy.clone(), i.to_string(), p.to_string(), g.to_string(), rel.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `(key, value)` pairs as a header row and a single data row.
pub fn write_flat_row<W: Write>(fields: &[(String, String)], out: W) -> AppResult<()> {
    let mut w = writer(out);
    w.write_record(fields.iter().map(|(k, _)| k.as_str()))?;
    w.write_record(fields.iter().map(|(_, v)| v.as_str()))?;
    w.flush()?;
    Ok(())
}

pub fn write_rows<W: Write>(header: &[&str], rows: &[Vec<String>], out: W) -> AppResult<()> {
    let mut w = writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads past experiments from CSV with columns `experiment_id, arm_id, n,
/// mean` and an optional `sd`. Rows are grouped by `experiment_id` in order
/// of first appearance.
pub fn read_experiments<R: Read>(input: R) -> AppResult<Vec<PastExperiment>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let required = |name: &str| {
        column(name).ok_or_else(|| AppError::Parse {
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let id_col = required("experiment_id")?;
    let arm_col = required("arm_id")?;
    let n_col = required("n")?;
    let mean_col = required("mean")?;
    let sd_col = column("sd");

    let mut experiments: Vec<PastExperiment> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut seen_arms: HashMap<(String, String), u64> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize, name: &str| {
            record.get(col).ok_or_else(|| AppError::Parse {
                line,
                message: format!("missing value for `{name}`"),
            })
        };
        let parse_err = |name: &str, value: &str| AppError::Parse {
            line,
            message: format!("cannot parse `{name}` value {value:?}"),
        };
        let id = field(id_col, "experiment_id")?.to_string();
        let arm = field(arm_col, "arm_id")?.to_string();
        let n_text = field(n_col, "n")?;
        let n: u64 = n_text.parse().map_err(|_| parse_err("n", n_text))?;
        if n == 0 {
            return Err(AppError::Parse {
                line,
                message: "arm size `n` must be at least 1".into(),
            });
        }
        let mean_text = field(mean_col, "mean")?;
        let mean: f64 = mean_text.parse().map_err(|_| parse_err("mean", mean_text))?;
        if !mean.is_finite() {
            return Err(parse_err("mean", mean_text));
        }
        let sd = match sd_col.and_then(|c| record.get(c)).filter(|s| !s.is_empty()) {
            Some(text) => Some(
                text.parse::<f64>()
                    .ok()
                    .filter(|s| *s >= 0.0 && s.is_finite())
                    .ok_or_else(|| parse_err("sd", text))?,
            ),
            None => None,
        };
        if let Some(first) = seen_arms.insert((id.clone(), arm.clone()), line) {
            return Err(AppError::Parse {
                line,
                message: format!("arm {arm:?} of experiment {id:?} already given on line {first}"),
            });
        }
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            experiments.push(PastExperiment {
                experiment_id: id.clone(),
                arms: Vec::new(),
            });
            experiments.len() - 1
        });
        experiments[slot].arms.push(ArmSummary { n, mean, sd });
    }
    Ok(experiments)
}
