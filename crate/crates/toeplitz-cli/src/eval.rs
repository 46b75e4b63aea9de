//! Join reports with ground truth into CSV rows.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toeplitz_lowrank::io::read_json;
use toeplitz_lowrank::sfft::FrequencyList;
use toeplitz_lowrank::toeplitz::{FourierToeplitz, SymToeplitz};
use toeplitz_lowrank::Result;

use crate::commands::Report;
use crate::plant::Truth;

pub const HEADER: &str = "report,command,seed,d,k,reads,degraded,error_rel,error_truth,planted,hits,success";

fn truth_error(report: &Report, truth: &Truth) -> Result<Option<f64>> {
    if truth.kind != "matrix" {
        return Ok(None);
    }
    let output: FourierToeplitz = serde_json::from_value(report.result["output"].clone())?;
    let planted = FourierToeplitz::new(truth.d, truth.freqs.clone(), truth.weights.clone())?.to_toeplitz();
    let mut col = planted.col().to_vec();
    col[0] += truth.noise;
    let t = SymToeplitz::new(col)?;
    let diff: Vec<f64> = output.first_column().iter().zip(t.col()).map(|(a, b)| a - b).collect();
    Ok(Some(toeplitz_lowrank::toeplitz::frobenius_from_column(&diff) / t.frobenius().max(f64::MIN_POSITIVE)))
}

fn hits(report: &Report, truth: &Truth) -> Result<Option<usize>> {
    if report.command != "sfft" || truth.kind != "signal" {
        return Ok(None);
    }
    let list: FrequencyList = serde_json::from_value(report.result.clone())?;
    Ok(Some(truth.freqs.iter().filter(|f| list.hits(**f)).count()))
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// CSV over `reports`; `tolerance` bounds the relative error counted as success.
pub fn eval(reports: &[PathBuf], truth: Option<&Path>, tolerance: f64) -> Result<String> {
    let truth: Option<Truth> = truth.map(read_json).transpose()?;
    let mut csv = format!("{HEADER}\n");
    for path in reports {
        let r: Report = read_json(path)?;
        let error_truth = match &truth {
            Some(t) if r.command != "sfft" => truth_error(&r, t)?,
            _ => None,
        };
        let hit = truth.as_ref().map(|t| hits(&r, t)).transpose()?.flatten();
        let planted = truth.as_ref().filter(|t| t.kind == "signal").map(|t| t.freqs.len());
        let err = error_truth.or(r.error_rel);
        let success = !r.degraded
            && err.is_none_or(|e| e <= tolerance)
            && match (hit, planted) {
                (Some(h), Some(p)) => h == p,
                _ => true,
            };
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            path.display(),
            r.command,
            r.seed,
            r.config.d,
            r.config.k,
            r.reads,
            r.degraded,
            opt(r.error_rel),
            opt(error_truth),
            opt(planted),
            opt(hit),
            success
        )
        .expect("writing to a String");
    }
    Ok(csv)
}
