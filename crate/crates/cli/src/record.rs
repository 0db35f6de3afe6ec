//! Output rows and their CSV / JSON encodings.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use stabapprox::ApproximationResult;

use crate::error::CliError;

/// Significant digits kept in every emitted number.
pub const SIG_DIGITS: usize = 12;

/// Rounds to [`SIG_DIGITS`] significant digits. Idempotent, so values read
/// back from a file re-serialize to the same text.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// One solved (target, model) pair. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub target_kind: String,
    pub param_gamma: Option<f64>,
    pub param_phi: Option<f64>,
    pub param_p: Option<f64>,
    pub model: String,
    pub constraint: String,
    pub distance: Option<f64>,
    pub f_target: Option<f64>,
    pub f_model: Option<f64>,
    pub support: String,
    pub converged: bool,
    pub restarts_used: usize,
    pub seed: Option<u64>,
    pub channel_index: Option<usize>,
    pub target_distance_to_identity: Option<f64>,
}

/// Target description shared by all rows of one target.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TargetInfo {
    pub kind: String,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub channel_index: Option<usize>,
    pub distance_to_identity: Option<f64>,
}

pub fn support_string(result: &ApproximationResult) -> String {
    result
        .support
        .iter()
        .map(|(g, p)| format!("{g}={}", round_sig(*p)))
        .collect::<Vec<_>>()
        .join(";")
}

impl RunRecord {
    pub fn new(target: &TargetInfo, model: &str, constraint: &str) -> Self {
        Self {
            target_kind: target.kind.clone(),
            param_gamma: target.gamma.map(round_sig),
            param_phi: target.phi.map(round_sig),
            param_p: target.p.map(round_sig),
            model: model.to_string(),
            constraint: constraint.to_string(),
            distance: None,
            f_target: None,
            f_model: None,
            support: String::new(),
            converged: false,
            restarts_used: 0,
            seed: target.seed,
            channel_index: target.channel_index,
            target_distance_to_identity: target.distance_to_identity.map(round_sig),
        }
    }

    pub fn from_result(target: &TargetInfo, result: &ApproximationResult) -> Self {
        let mut rec = Self::new(target, result.model().name(), result.constraint.name());
        rec.distance = Some(round_sig(result.distance));
        rec.f_target = Some(round_sig(result.f_target));
        rec.f_model = Some(round_sig(result.f_model));
        rec.support = support_string(result);
        rec.converged = result.diagnostics.converged;
        rec.restarts_used = result.diagnostics.restarts;
        rec
    }
}

pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Header row; also written when there are no records.
pub const CSV_HEADER: [&str; 15] = [
    "target_kind",
    "param_gamma",
    "param_phi",
    "param_p",
    "model",
    "constraint",
    "distance",
    "f_target",
    "f_model",
    "support",
    "converged",
    "restarts_used",
    "seed",
    "channel_index",
    "target_distance_to_identity",
];

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Per-model distance statistics of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub mean: f64,
    pub median: f64,
    /// Population variance.
    pub variance: f64,
    #[serde(rename = "frac_below_1e-3")]
    pub frac_below_1e_3: f64,
    pub count: usize,
}

impl ModelSummary {
    /// `None` when there are no distances.
    pub fn of(distances: &[f64]) -> Option<Self> {
        if distances.is_empty() {
            return None;
        }
        let n = distances.len() as f64;
        let mean = distances.iter().sum::<f64>() / n;
        let variance = distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = distances.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            0.5 * (sorted[mid - 1] + sorted[mid])
        } else {
            sorted[mid]
        };
        let below = distances.iter().filter(|&&d| d < 1e-3).count() as f64 / n;
        Some(Self {
            mean: round_sig(mean),
            median: round_sig(median),
            variance: round_sig(variance),
            frac_below_1e_3: round_sig(below),
            count: distances.len(),
        })
    }
}

/// Summary keyed by model name, over the rows that produced a distance.
pub fn summarize(records: &[RunRecord]) -> BTreeMap<String, ModelSummary> {
    let mut by_model: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(d) = r.distance {
            by_model.entry(r.model.clone()).or_default().push(d);
        }
    }
    by_model
        .into_iter()
        .filter_map(|(m, d)| ModelSummary::of(&d).map(|s| (m, s)))
        .collect()
}
