use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Sign, SignedEdge, SignedGraph};

/// Planted-partition signed graph parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthParams {
    pub n: usize,
    pub communities: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n: 500,
            communities: 2,
            p_in: 0.1,
            p_out: 0.02,
            noise: 0.1,
            seed: 0,
        }
    }
}

impl SynthParams {
    /// Community of node `v`: contiguous blocks of (near-)equal size.
    pub fn community(&self, v: usize) -> usize {
        v * self.communities / self.n
    }
}

/// Intra-community edges are positive, inter-community edges negative, and
/// each sign is flipped with probability `noise`.
pub fn synth_benchmark(p: &SynthParams) -> Result<SignedGraph> {
    let prob = |x: f64| (0.0..=1.0).contains(&x);
    if p.n < 2 || p.communities == 0 || p.communities > p.n || !prob(p.p_in) || !prob(p.p_out) || !prob(p.noise) {
        return Err(Error::InvalidParam(format!("invalid synthetic benchmark parameters {p:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut edges = Vec::new();
    for u in 0..p.n {
        for v in u + 1..p.n {
            let same = p.community(u) == p.community(v);
            if !rng.random_bool(if same { p.p_in } else { p.p_out }) {
                continue;
            }
            let mut sign = if same { Sign::Positive } else { Sign::Negative };
            if rng.random_bool(p.noise) {
                sign = sign.flip();
            }
            edges.push(SignedEdge { u, v, sign });
        }
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    SignedGraph::from_edges(p.n, edges)
}
