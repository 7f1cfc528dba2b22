use std::collections::HashMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, SignedEdge, SignedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.85,
            val: 0.05,
            test: 0.10,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let f = [self.train, self.val, self.test];
        if f.iter().any(|&x| x.is_nan() || x < 0.0) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParam(format!(
                "split fractions must be non-negative and sum to 1, got {:?}",
                f
            )));
        }
        Ok(())
    }
}

/// Largest-remainder allocation of `n` items; ties in the remainder go to
/// the earlier split (train, then val, then test).
pub fn split_sizes(n: usize, spec: &SplitSpec) -> Result<[usize; 3]> {
    spec.validate()?;
    let exact = [spec.train * n as f64, spec.val * n as f64, spec.test * n as f64];
    let mut sizes = exact.map(|x| x.floor() as usize);
    let mut left = n.saturating_sub(sizes.iter().sum());
    let mut by_remainder = [0usize, 1, 2];
    by_remainder.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - sizes[a] as f64, exact[b] - sizes[b] as f64);
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in by_remainder.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    Ok(sizes)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSplit {
    pub train: Vec<SignedEdge>,
    pub val: Vec<SignedEdge>,
    pub test: Vec<SignedEdge>,
}

/// Uniform random partition of the edges, each part sorted by `(u, v)`.
pub fn split_edges(g: &SignedGraph, spec: &SplitSpec, seed: u64) -> Result<EdgeSplit> {
    let n = g.edge_count();
    let [n_train, n_val, _] = split_sizes(n, spec)?;
    let mut edges = g.edges().to_vec();
    edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = edges.split_off(n_train + n_val);
    let mut val = edges.split_off(n_train);
    let mut train = edges;
    for (name, part, frac) in [("train", &train, spec.train), ("val", &val, spec.val), ("test", &test, spec.test)] {
        // Only complain when the graph is big enough to expect an edge here.
        if part.is_empty() && frac > 0.0 && n as f64 >= (1.0 / frac).ceil() {
            return Err(Error::EmptySplit(name));
        }
    }
    if train.is_empty() {
        return Err(Error::EmptySplit("train"));
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(EdgeSplit { train, val, test })
}

/// Hard edges sit in at least one unbalanced triangle (score > 0).
pub fn easy_hard_split(
    edges: &[SignedEdge],
    scores: &HashMap<(NodeId, NodeId), Ratio<u64>>,
) -> Result<(Vec<SignedEdge>, Vec<SignedEdge>)> {
    let mut easy = Vec::new();
    let mut hard = Vec::new();
    for e in edges {
        let s = scores.get(&e.key()).ok_or(Error::MissingScore(e.u, e.v))?;
        if *s > Ratio::from_integer(0) {
            hard.push(*e);
        } else {
            easy.push(*e);
        }
    }
    Ok((easy, hard))
}
