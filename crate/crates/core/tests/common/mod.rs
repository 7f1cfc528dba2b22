//! Brute-force oracles shared by the integration tests and the acceptance
//! runner. Deliberately naive: dense matrices, exhaustive enumeration.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signed_curriculum::{Sign, SignedEdge, SignedGraph};

pub fn e(u: usize, v: usize, s: i8) -> SignedEdge {
    SignedEdge::new(u, v, if s > 0 { Sign::Positive } else { Sign::Negative }).unwrap()
}

pub fn random_graph(seed: u64, n: usize, p: f64) -> SignedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push(e(u, v, if rng.random_bool(0.5) { 1 } else { -1 }));
            }
        }
    }
    SignedGraph::from_edges(n, edges).unwrap()
}

/// Six nodes, mixed signs, one triangle and a 4-cycle.
pub fn six_node() -> SignedGraph {
    SignedGraph::from_edges(
        6,
        [e(0, 1, 1), e(0, 2, -1), e(1, 2, 1), e(2, 3, -1), e(3, 4, 1), e(1, 4, -1), e(4, 5, 1), e(0, 5, 1)],
    )
    .unwrap()
}

/// Dense `n x n` sign matrix with entries in {-1, 0, 1}.
pub fn dense(g: &SignedGraph) -> Vec<Vec<i8>> {
    let n = g.node_count();
    let mut a = vec![vec![0i8; n]; n];
    for ed in g.edges() {
        a[ed.u][ed.v] = ed.sign.value();
        a[ed.v][ed.u] = ed.sign.value();
    }
    a
}

/// Every `i < j < k` triple checked directly: `(i, j, k, product of signs)`.
pub fn cubic_triangles(g: &SignedGraph) -> Vec<(usize, usize, usize, i8)> {
    let a = dense(g);
    let n = g.node_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] == 0 {
                continue;
            }
            for k in j + 1..n {
                if a[j][k] != 0 && a[i][k] != 0 {
                    out.push((i, j, k, a[i][j] * a[j][k] * a[i][k]));
                }
            }
        }
    }
    out
}

/// Per edge `(u, v)`: `(balanced, total)` triangle counts, by scanning all
/// third nodes.
pub fn cubic_difficulty(g: &SignedGraph) -> BTreeMap<(usize, usize), (u64, u64)> {
    let a = dense(g);
    g.edges()
        .iter()
        .map(|ed| {
            let (mut bal, mut tot) = (0, 0);
            for w in 0..g.node_count() {
                if a[ed.u][w] != 0 && a[ed.v][w] != 0 {
                    tot += 1;
                    if a[ed.u][ed.v] * a[ed.u][w] * a[ed.v][w] > 0 {
                        bal += 1;
                    }
                }
            }
            ((ed.u, ed.v), (bal, tot))
        })
        .collect()
}

/// All simple cycles of length 3..=max_n: every start, every direction,
/// deduplicated by a rotation- and reflection-normalized key.
pub fn cycle_oracle(g: &SignedGraph, max_n: usize) -> BTreeMap<usize, (u64, u64)> {
    let a = dense(g);
    let n = g.node_count();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out: BTreeMap<usize, (u64, u64)> = (3..=max_n).map(|k| (k, (0, 0))).collect();

    fn normalize(c: &[usize]) -> Vec<usize> {
        let len = c.len();
        let mut best: Option<Vec<usize>> = None;
        for start in 0..len {
            for dir in [1isize, -1] {
                let v: Vec<usize> = (0..len)
                    .map(|i| c[((start as isize + dir * i as isize).rem_euclid(len as isize)) as usize])
                    .collect();
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
        }
        best.unwrap()
    }

    fn dfs(
        a: &[Vec<i8>],
        path: &mut Vec<usize>,
        max_n: usize,
        seen: &mut HashSet<Vec<usize>>,
        out: &mut BTreeMap<usize, (u64, u64)>,
    ) {
        let cur = *path.last().unwrap();
        for w in 0..a.len() {
            if a[cur][w] == 0 {
                continue;
            }
            if w == path[0] && path.len() >= 3 {
                let key = normalize(path);
                if seen.insert(key) {
                    let mut prod = 1i8;
                    for i in 0..path.len() {
                        prod *= a[path[i]][path[(i + 1) % path.len()]];
                    }
                    let slot = out.get_mut(&path.len()).unwrap();
                    slot.1 += 1;
                    if prod > 0 {
                        slot.0 += 1;
                    }
                }
            } else if !path.contains(&w) && path.len() < max_n {
                path.push(w);
                dfs(a, path, max_n, seen, out);
                path.pop();
            }
        }
    }

    for s in 0..n {
        let mut path = vec![s];
        dfs(&a, &mut path, max_n, &mut seen, &mut out);
    }
    out
}

pub fn pairwise_auc(labels: &[bool], scores: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                den += 1.0;
                num += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / den
}

/// F1 from precision and recall of the positive class.
pub fn confusion_f1(labels: &[bool], predicted: &[bool]) -> f64 {
    let tp = labels.iter().zip(predicted).filter(|(l, p)| **l && **p).count() as f64;
    let pp = predicted.iter().filter(|p| **p).count() as f64;
    let ap = labels.iter().filter(|l| **l).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / pp;
    let recall = tp / ap;
    2.0 * precision * recall / (precision + recall)
}

/// Per parameter tensor: the largest elementwise relative error between the
/// analytic gradient and a central finite difference,
/// `|a - n| / max(|a|, |n|, floor)`. The floor keeps entries whose true
/// gradient is ~0 from dividing rounding noise by zero.
pub fn finite_difference_errors(
    g: &SignedGraph,
    model: &signed_curriculum::sgnn::SgnnModel,
    x: &signed_curriculum::sgnn::FeatureMatrix,
    batch: &[SignedEdge],
    step: f64,
    floor: f64,
) -> Vec<(String, f64)> {
    use signed_curriculum::sgnn::loss_and_gradients;
    let (_, grads) = loss_and_gradients(g, model, x, batch).unwrap();
    let analytic = grads.tensors();
    let loss_at = |m: &signed_curriculum::sgnn::SgnnModel| loss_and_gradients(g, m, x, batch).unwrap().0;
    let mut out = Vec::new();
    for (t, (name, a)) in analytic.iter().enumerate() {
        let mut worst = 0.0f64;
        for (i, &ai) in a.iter().enumerate() {
            let mut plus = model.clone();
            plus.tensors_mut()[t].1[i] += step;
            let mut minus = model.clone();
            minus.tensors_mut()[t].1[i] -= step;
            let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * step);
            let rel = (ai - numeric).abs() / ai.abs().max(numeric.abs()).max(floor);
            worst = worst.max(rel);
        }
        out.push((name.clone(), worst));
    }
    out
}
