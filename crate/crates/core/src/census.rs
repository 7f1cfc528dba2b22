//! Triangle enumeration, short-cycle census and triangle-based edge difficulty.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, SignedEdge, SignedGraph};

/// A triangle `i < j < k` with signs `(s_ij, s_jk, s_ik)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle {
    pub nodes: [NodeId; 3],
    pub signs: [Sign; 3],
}

impl Triangle {
    /// Balanced iff the number of negative edges is even.
    pub fn is_balanced(&self) -> bool {
        (self.signs[0] * self.signs[1] * self.signs[2]).is_positive()
    }

    pub fn edges(&self) -> [(NodeId, NodeId); 3] {
        let [i, j, k] = self.nodes;
        [(i, j), (j, k), (i, k)]
    }
}

/// Triangles in `(i, j, k)` order, each found once from its smallest edge
/// `(i, j)` by merging the two neighbor lists above `j`.
pub fn triangles(g: &SignedGraph) -> impl Iterator<Item = Triangle> + '_ {
    g.edges().iter().flat_map(move |e| {
        let above = |u: NodeId| {
            let nb = g.neighbors(u);
            &nb[nb.partition_point(|&(w, _)| w <= e.v)..]
        };
        let (a, b) = (above(e.u), above(e.v));
        let mut out = Vec::new();
        let (mut x, mut y) = (0, 0);
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    out.push(Triangle {
                        nodes: [e.u, e.v, a[x].0],
                        signs: [e.sign, b[y].1, a[x].1],
                    });
                    x += 1;
                    y += 1;
                }
            }
        }
        out
    })
}

pub fn enumerate_triangles(g: &SignedGraph) -> Vec<Triangle> {
    triangles(g).collect()
}

/// Triangle membership of one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDifficulty {
    pub edge: SignedEdge,
    pub balanced_triangles: u64,
    pub total_triangles: u64,
}

impl EdgeDifficulty {
    /// Local balance degree: balanced / total, and 1 for edges in no triangle.
    pub fn d3(&self) -> Ratio<u64> {
        if self.total_triangles == 0 {
            Ratio::from_integer(1)
        } else {
            Ratio::new(self.balanced_triangles, self.total_triangles)
        }
    }

    /// `1 - d3`.
    pub fn score(&self) -> Ratio<u64> {
        if self.total_triangles == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(self.total_triangles - self.balanced_triangles, self.total_triangles)
        }
    }

    pub fn unbalanced_triangles(&self) -> u64 {
        self.total_triangles - self.balanced_triangles
    }
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn local_balance_degree(g: &SignedGraph, u: NodeId, v: NodeId) -> Result<Ratio<u64>> {
    let sign = g.sign(u, v).ok_or(Error::MissingEdge(u, v))?;
    let common = g.common_neighbors(u, v);
    let balanced = common.iter().filter(|c| (sign * c.to_u * c.to_v).is_positive()).count();
    Ok(EdgeDifficulty {
        edge: SignedEdge::new(u, v, sign).unwrap(),
        balanced_triangles: balanced as u64,
        total_triangles: common.len() as u64,
    }
    .d3())
}

/// Per-edge difficulty, aligned with `g.edges()`. One pass over all
/// triangles; each bumps the counters of its three edges.
pub fn difficulty_scores(g: &SignedGraph) -> Vec<EdgeDifficulty> {
    let index: HashMap<(NodeId, NodeId), usize> = g.edges().iter().enumerate().map(|(i, e)| (e.key(), i)).collect();
    let mut out: Vec<EdgeDifficulty> = g
        .edges()
        .iter()
        .map(|&edge| EdgeDifficulty {
            edge,
            balanced_triangles: 0,
            total_triangles: 0,
        })
        .collect();
    for t in triangles(g) {
        let balanced = t.is_balanced() as u64;
        for key in t.edges() {
            let d = &mut out[index[&key]];
            d.total_triangles += 1;
            d.balanced_triangles += balanced;
        }
    }
    out
}

pub fn score_map(difficulties: &[EdgeDifficulty]) -> HashMap<(NodeId, NodeId), Ratio<u64>> {
    difficulties.iter().map(|d| (d.edge.key(), d.score())).collect()
}

pub const SCORES_HEADER: &str = "u,v,sign,total_triangles,balanced_triangles,score";

/// `scores.csv` body; rows follow the input order, which is `(u, v)` order
/// for output of [`difficulty_scores`].
pub fn scores_csv(difficulties: &[EdgeDifficulty]) -> String {
    let mut s = String::from(SCORES_HEADER);
    s.push('\n');
    for d in difficulties {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d.edge.u,
            d.edge.v,
            d.edge.sign.value(),
            d.total_triangles,
            d.balanced_triangles,
            ratio_to_f64(d.score())
        ));
    }
    s
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCounts {
    pub total: u64,
    pub balanced: u64,
    pub unbalanced: u64,
}

impl std::ops::AddAssign for CycleCounts {
    fn add_assign(&mut self, o: CycleCounts) {
        self.total += o.total;
        self.balanced += o.balanced;
        self.unbalanced += o.unbalanced;
    }
}

/// Simple-cycle counts keyed by cycle length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCensus {
    pub counts: BTreeMap<usize, CycleCounts>,
}

impl CycleCensus {
    pub fn get(&self, n: usize) -> CycleCounts {
        self.counts.get(&n).copied().unwrap_or_default()
    }

    /// `{"3": {"total": .., "balanced": .., "unbalanced": ..}, ...}`
    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, CycleCounts> = self.counts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        serde_json::to_string_pretty(&map).expect("census serializes")
    }
}

impl fmt::Display for CycleCensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in &self.counts {
            writeln!(f, "n={} total {} balanced {} unbalanced {}", n, c.total, c.balanced, c.unbalanced)?;
        }
        Ok(())
    }
}

pub const MAX_CYCLE_LEN: usize = 6;

/// Counts simple cycles of length `3..=max_n`.
///
/// Each cycle is found from its smallest node `s`, walking only through
/// nodes larger than `s`, and kept in the direction whose second node is
/// smaller than its last. Start nodes are processed in parallel and the
/// per-start counts summed.
pub fn census(g: &SignedGraph, max_n: usize) -> Result<CycleCensus> {
    if !(3..=MAX_CYCLE_LEN).contains(&max_n) {
        return Err(Error::InvalidParam(format!("max_n must be in 3..=6, got {}", max_n)));
    }
    let per_len = (0..g.node_count())
        .into_par_iter()
        .map(|s| {
            let mut acc = [CycleCounts::default(); MAX_CYCLE_LEN + 1];
            let mut path = Vec::with_capacity(max_n);
            path.push(s);
            cycles_from(g, s, max_n, &mut path, Sign::Positive, &mut acc);
            acc
        })
        .reduce(
            || [CycleCounts::default(); MAX_CYCLE_LEN + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(CycleCensus {
        counts: (3..=max_n).map(|n| (n, per_len[n])).collect(),
    })
}

fn cycles_from(
    g: &SignedGraph,
    start: NodeId,
    max_n: usize,
    path: &mut Vec<NodeId>,
    sign: Sign,
    acc: &mut [CycleCounts; MAX_CYCLE_LEN + 1],
) {
    let cur = *path.last().unwrap();
    let len = path.len();
    for &(w, s) in g.neighbors(cur) {
        if w == start {
            if len >= 3 && path[1] < path[len - 1] {
                let c = &mut acc[len];
                c.total += 1;
                if (sign * s).is_positive() {
                    c.balanced += 1;
                } else {
                    c.unbalanced += 1;
                }
            }
        } else if w > start && len < max_n && !path.contains(&w) {
            path.push(w);
            cycles_from(g, start, max_n, path, sign * s, acc);
            path.pop();
        }
    }
}

/// Balanced and unbalanced triangle counts of a subgraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceRatio {
    pub balanced: u64,
    pub unbalanced: u64,
}

impl BalanceRatio {
    /// `None` when there are no unbalanced triangles.
    pub fn ratio(&self) -> Option<f64> {
        (self.unbalanced > 0).then(|| self.balanced as f64 / self.unbalanced as f64)
    }
}

impl fmt::Display for BalanceRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio() {
            Some(r) => write!(f, "B={} U={} R={:.1}", self.balanced, self.unbalanced, r),
            None => write!(f, "B={} U={} R=inf", self.balanced, self.unbalanced),
        }
    }
}

/// Triangle balance counts on the subgraph formed by `subset`.
pub fn balance_ratio_report(g: &SignedGraph, subset: &[SignedEdge]) -> Result<BalanceRatio> {
    let sub = g.subgraph(subset)?;
    let (mut balanced, mut unbalanced) = (0, 0);
    for t in triangles(&sub) {
        if t.is_balanced() {
            balanced += 1;
        } else {
            unbalanced += 1;
        }
    }
    Ok(BalanceRatio { balanced, unbalanced })
}
