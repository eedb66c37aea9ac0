// SPDX-License-Identifier: Apache-2.0

//! Dominance, Pareto fronts, candidate selection and percentage deltas.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::QorRecord;
use crate::grid::QorVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParetoError {
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("objective keys must be distinct and non-empty")]
    BadSpec,
    #[error("no ok records to select from")]
    NoCandidates,
    #[error("delta is undefined for baseline {0}")]
    UndefinedDelta(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKey {
    GrWl,
    GrVc,
    GrTwl,
    GrRt,
    DrWl,
    DrVc,
    DrTwl,
    DrRt,
    Mo,
    To,
}

impl MetricKey {
    pub const ALL: [MetricKey; 10] = [
        MetricKey::GrWl,
        MetricKey::GrVc,
        MetricKey::GrTwl,
        MetricKey::GrRt,
        MetricKey::DrWl,
        MetricKey::DrVc,
        MetricKey::DrTwl,
        MetricKey::DrRt,
        MetricKey::Mo,
        MetricKey::To,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKey::GrWl => "gr-wl",
            MetricKey::GrVc => "gr-vc",
            MetricKey::GrTwl => "gr-twl",
            MetricKey::GrRt => "gr-rt",
            MetricKey::DrWl => "dr-wl",
            MetricKey::DrVc => "dr-vc",
            MetricKey::DrTwl => "dr-twl",
            MetricKey::DrRt => "dr-rt",
            MetricKey::Mo => "mo",
            MetricKey::To => "to",
        }
    }

    pub fn get(self, q: &QorVector) -> f64 {
        match self {
            MetricKey::GrWl => q.gr_wl,
            MetricKey::GrVc => q.gr_vc,
            MetricKey::GrTwl => q.gr_twl,
            MetricKey::GrRt => q.gr_rt,
            MetricKey::DrWl => q.dr_wl,
            MetricKey::DrVc => q.dr_vc,
            MetricKey::DrTwl => q.dr_twl,
            MetricKey::DrRt => q.dr_rt,
            MetricKey::Mo => q.mo as f64,
            MetricKey::To => q.to as f64,
        }
    }
}

impl fmt::Display for MetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKey {
    type Err = ParetoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        MetricKey::ALL.into_iter().find(|k| k.name() == norm).ok_or_else(|| ParetoError::UnknownMetric(s.to_string()))
    }
}

impl Serialize for MetricKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for MetricKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Prioritized objective keys, all minimized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MetricKey>", into = "Vec<MetricKey>")]
pub struct ObjectiveSpec(Vec<MetricKey>);

impl ObjectiveSpec {
    pub fn new(keys: Vec<MetricKey>) -> Result<Self, ParetoError> {
        let mut seen = keys.clone();
        seen.sort();
        seen.dedup();
        if keys.is_empty() || seen.len() != keys.len() {
            return Err(ParetoError::BadSpec);
        }
        Ok(Self(keys))
    }

    pub fn keys(&self) -> &[MetricKey] {
        &self.0
    }

    /// Lexicographic comparison along the hierarchy.
    pub fn compare(&self, a: &QorVector, b: &QorVector) -> Ordering {
        self.0.iter().map(|k| k.get(a).total_cmp(&k.get(b))).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    }
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        Self(vec![MetricKey::DrWl, MetricKey::DrVc, MetricKey::GrRt])
    }
}

impl TryFrom<Vec<MetricKey>> for ObjectiveSpec {
    type Error = ParetoError;

    fn try_from(v: Vec<MetricKey>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ObjectiveSpec> for Vec<MetricKey> {
    fn from(s: ObjectiveSpec) -> Self {
        s.0
    }
}

/// Keys of the plotted fronts.
pub const PLOT_KEYS: [MetricKey; 2] = [MetricKey::DrWl, MetricKey::GrRt];

/// `a` is no worse on every key and strictly better on one.
pub fn dominates(a: &QorVector, b: &QorVector, keys: &[MetricKey]) -> bool {
    let mut strict = false;
    for k in keys {
        let (x, y) = (k.get(a), k.get(b));
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Ok records not dominated by any other ok record, ordered by iteration.
pub fn front<'a>(records: &'a [QorRecord], keys: &[MetricKey]) -> Vec<&'a QorRecord> {
    let ok: Vec<(&QorRecord, &QorVector)> = records.iter().filter_map(|r| Some((r, r.qor.as_ref()?))).filter(|(r, _)| r.is_ok()).collect();
    let mut out: Vec<&QorRecord> = ok.iter().filter(|(_, q)| !ok.iter().any(|(_, p)| dominates(p, q, keys))).map(|(r, _)| *r).collect();
    out.sort_by_key(|r| r.iteration);
    out
}

/// Picks the candidate that improves both detailed wirelength and global
/// runtime over `baseline`, best along `spec`; when none does, the ok record
/// with the least detailed wirelength. Ties go to the earliest iteration.
pub fn select<'a>(records: &'a [QorRecord], baseline: &QorRecord, spec: &ObjectiveSpec) -> Result<&'a QorRecord, ParetoError> {
    let ok: Vec<(&QorRecord, &QorVector)> = records.iter().filter(|r| r.is_ok()).filter_map(|r| Some((r, r.qor.as_ref()?))).collect();
    let base = baseline.qor.as_ref().filter(|_| baseline.is_ok()).ok_or(ParetoError::NoCandidates)?;
    let by_spec =
        |a: &(&QorRecord, &QorVector), b: &(&QorRecord, &QorVector)| spec.compare(a.1, b.1).then(a.0.iteration.cmp(&b.0.iteration));
    let improving = ok.iter().filter(|(_, q)| q.dr_wl < base.dr_wl && q.gr_rt < base.gr_rt).min_by(|a, b| by_spec(a, b));
    if let Some((r, _)) = improving {
        return Ok(r);
    }
    ok.iter().min_by(|a, b| a.1.dr_wl.total_cmp(&b.1.dr_wl).then_with(|| by_spec(a, b))).map(|(r, _)| *r).ok_or(ParetoError::NoCandidates)
}

/// Percentage reduction of `ours` relative to `baseline`.
pub fn delta(baseline: f64, ours: f64) -> Result<f64, ParetoError> {
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(ParetoError::UndefinedDelta(baseline));
    }
    Ok((baseline - ours) / baseline * 100.0)
}
