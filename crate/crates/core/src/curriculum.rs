//! Easy-to-hard ordering of training edges and pacing functions.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, SignedEdge};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacingKind {
    Linear,
    Root,
    Geometric,
}

impl FromStr for PacingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PacingKind::Linear),
            "root" => Ok(PacingKind::Root),
            "geometric" => Ok(PacingKind::Geometric),
            other => Err(Error::InvalidParam(format!(
                "unknown pacing kind {other:?} (expected linear, root or geometric)"
            ))),
        }
    }
}

impl fmt::Display for PacingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PacingKind::Linear => "linear",
            PacingKind::Root => "root",
            PacingKind::Geometric => "geometric",
        })
    }
}

/// Pacing function `g(t)`: the fraction of the sorted training set that is
/// available at epoch `t`. Starts at `lambda0` and reaches 1 at epoch `T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacingParams {
    pub kind: PacingKind,
    pub lambda0: f64,
    #[serde(rename = "T")]
    pub full_at: usize,
}

impl Default for PacingParams {
    fn default() -> Self {
        PacingParams {
            kind: PacingKind::Linear,
            lambda0: 0.25,
            full_at: 20,
        }
    }
}

impl PacingParams {
    pub fn new(kind: PacingKind, lambda0: f64, full_at: usize) -> Result<PacingParams> {
        let p = PacingParams { kind, lambda0, full_at };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0 && self.lambda0 <= 1.0) {
            return Err(Error::InvalidParam(format!("lambda0 must be in (0, 1], got {}", self.lambda0)));
        }
        if self.full_at == 0 {
            return Err(Error::InvalidParam("T must be at least 1".into()));
        }
        Ok(())
    }

    /// `g(t)`, in `[lambda0, 1]`.
    ///
    /// * linear: `lambda0 + (1 - lambda0) * t/T`
    /// * root: `sqrt(lambda0^2 + (1 - lambda0^2) * t/T)`
    /// * geometric: `lambda0^(1 - t/T)`, slowest at the start.
    pub fn value(&self, t: usize) -> f64 {
        if t >= self.full_at {
            return 1.0;
        }
        let frac = t as f64 / self.full_at as f64;
        let l0 = self.lambda0;
        let g = match self.kind {
            PacingKind::Linear => l0 + (1.0 - l0) * frac,
            PacingKind::Root => (l0 * l0 + (1.0 - l0 * l0) * frac).sqrt(),
            PacingKind::Geometric => l0.powf(1.0 - frac),
        };
        g.min(1.0)
    }
}

/// Training edges sorted by `(score, u, v)` plus the pacing function that
/// gates how much of the prefix each epoch sees.
#[derive(Clone, Debug, PartialEq)]
pub struct CurriculumSchedule {
    ordered: Vec<SignedEdge>,
    params: PacingParams,
}

/// Sorts `train_edges` ascending by score, breaking ties by `(u, v)`.
pub fn build_schedule<S: Ord + Copy>(
    train_edges: &[SignedEdge],
    scores: &HashMap<(NodeId, NodeId), S>,
    params: PacingParams,
) -> Result<CurriculumSchedule> {
    params.validate()?;
    let mut keyed = train_edges
        .iter()
        .map(|e| scores.get(&e.key()).map(|&s| (s, *e)).ok_or(Error::MissingScore(e.u, e.v)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.key().cmp(&b.1.key())));
    Ok(CurriculumSchedule {
        ordered: keyed.into_iter().map(|(_, e)| e).collect(),
        params,
    })
}

impl CurriculumSchedule {
    pub fn ordered_edges(&self) -> &[SignedEdge] {
        &self.ordered
    }

    pub fn params(&self) -> &PacingParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    /// `ceil(g(t) * |E|)`, capped at `|E|`.
    pub fn prefix_len(&self, t: usize) -> usize {
        let n = self.ordered.len();
        ((self.params.value(t) * n as f64).ceil() as usize).min(n)
    }

    pub fn subset_at(&self, t: usize) -> &[SignedEdge] {
        &self.ordered[..self.prefix_len(t)]
    }

    /// `epoch,prefix_len,g_value` rows for `t = 0..epochs`.
    pub fn dump(&self, epochs: usize) -> String {
        let mut s = String::from("epoch,prefix_len,g_value\n");
        for t in 0..epochs {
            s.push_str(&format!("{},{},{}\n", t, self.prefix_len(t), self.params.value(t)));
        }
        s
    }
}
