//! Undirected signed graphs with sorted, sign-labelled adjacency.
//!
//! A [`SignedGraph`] is immutable once built. Neighbor lists are stored in a
//! single CSR buffer of `(neighbor, sign)` pairs sorted by neighbor id, so
//! common-neighbor queries are a linear merge.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::ops::Mul;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `0..n`.
pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    /// Signum of a weight; zero (and NaN) has no sign.
    pub fn from_weight(w: f64) -> Option<Sign> {
        if w > 0.0 {
            Some(Sign::Positive)
        } else if w < 0.0 {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Positive => f.write_str("+"),
            Sign::Negative => f.write_str("-"),
        }
    }
}

/// An edge in canonical orientation (`u < v`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub sign: Sign,
}

impl SignedEdge {
    /// Builds a canonical edge from either orientation. Self-loops are rejected.
    pub fn new(a: NodeId, b: NodeId, sign: Sign) -> Option<SignedEdge> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(SignedEdge { u: a, v: b, sign }),
            std::cmp::Ordering::Greater => Some(SignedEdge { u: b, v: a, sign }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn key(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }
}

/// A node shared by `u` and `v`, with the sign of its edge to each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommonNeighbor {
    pub node: NodeId,
    pub to_u: Sign,
    pub to_v: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    offsets: Vec<usize>,
    adj: Vec<(NodeId, Sign)>,
    edges: Vec<SignedEdge>,
}

impl SignedGraph {
    /// Builds a graph on `n` nodes. Edges may arrive in any order or
    /// orientation; duplicates and self-loops are errors.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = SignedEdge>) -> Result<SignedGraph> {
        let mut edges: Vec<SignedEdge> = edges
            .into_iter()
            .map(|e| SignedEdge::new(e.u, e.v, e.sign).ok_or(Error::InvalidParam(format!("self-loop on node {}", e.u))))
            .collect::<Result<_>>()?;
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0].key() == w[1].key() {
                return Err(Error::InvalidParam(format!("duplicate edge ({}, {})", w[0].u, w[0].v)));
            }
        }
        if let Some(e) = edges.iter().find(|e| e.v >= n) {
            return Err(Error::NodeOutOfRange(e.v, n));
        }

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adj = vec![(0, Sign::Positive); offsets[n]];
        for e in &edges {
            adj[fill[e.u]] = (e.v, e.sign);
            fill[e.u] += 1;
            adj[fill[e.v]] = (e.u, e.sign);
            fill[e.v] += 1;
        }
        for u in 0..n {
            adj[offsets[u]..offsets[u + 1]].sort_unstable_by_key(|&(v, _)| v);
        }
        Ok(SignedGraph {
            n,
            offsets,
            adj,
            edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edges sorted by `(u, v)`.
    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, Sign)] {
        &self.adj[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn positive_neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors(u).iter().filter(|(_, s)| s.is_positive()).map(|&(v, _)| v)
    }

    pub fn negative_neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors(u).iter().filter(|(_, s)| !s.is_positive()).map(|&(v, _)| v)
    }

    pub fn sign(&self, u: NodeId, v: NodeId) -> Option<Sign> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let nb = self.neighbors(u);
        nb.binary_search_by_key(&v, |&(w, _)| w).ok().map(|i| nb[i].1)
    }

    /// `(total, positive, negative)`.
    pub fn edge_counts(&self) -> (usize, usize, usize) {
        let pos = self.edges.iter().filter(|e| e.sign.is_positive()).count();
        (self.edges.len(), pos, self.edges.len() - pos)
    }

    /// Sorted merge of the two neighbor lists; linear in the longer list.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> Vec<CommonNeighbor> {
        let mut out = Vec::new();
        merge_common(self.neighbors(u), self.neighbors(v), |node, to_u, to_v| {
            out.push(CommonNeighbor { node, to_u, to_v })
        });
        out
    }

    /// Same node set, restricted to the given edges (which must exist here).
    pub fn subgraph(&self, edges: &[SignedEdge]) -> Result<SignedGraph> {
        for e in edges {
            if self.sign(e.u, e.v) != Some(e.sign) {
                return Err(Error::MissingEdge(e.u, e.v));
            }
        }
        SignedGraph::from_edges(self.n, edges.iter().copied())
    }

    /// Every sign negated.
    pub fn flipped(&self) -> SignedGraph {
        SignedGraph::from_edges(self.n, self.edges.iter().map(|e| SignedEdge { sign: e.sign.flip(), ..*e }))
            .expect("flipping preserves validity")
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn relabeled(&self, perm: &[NodeId]) -> Result<SignedGraph> {
        if perm.len() != self.n {
            return Err(Error::Shape(format!("permutation of length {} for {} nodes", perm.len(), self.n)));
        }
        SignedGraph::from_edges(
            self.n,
            self.edges.iter().map(|e| SignedEdge::new(perm[e.u], perm[e.v], e.sign).unwrap()),
        )
    }

    /// Canonical text form: a `# nodes N edges M` header, then `u v sign`
    /// lines with `u < v` in lexicographic order.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# nodes {} edges {}\n", self.n, self.edges.len());
        for e in &self.edges {
            s.push_str(&format!("{} {} {}\n", e.u, e.v, e.sign.value()));
        }
        s
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }

    /// Reads the canonical form written by [`to_edge_list`](Self::to_edge_list),
    /// keeping node ids as given.
    pub fn parse_edge_list(text: &str) -> Result<SignedGraph> {
        let records = parse_records(text)?;
        let declared = declared_node_count(text);
        Ok(ingest(&records, IdPolicy::Preserve { nodes: declared })?.graph)
    }

    pub fn read_edge_list(path: &Path) -> Result<SignedGraph> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SignedGraph::parse_edge_list(&text)
    }
}

fn merge_common(a: &[(NodeId, Sign)], b: &[(NodeId, Sign)], mut f: impl FnMut(NodeId, Sign, Sign)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i].0, a[i].1, b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
}

fn declared_node_count(text: &str) -> Option<usize> {
    text.lines().find_map(|l| {
        let mut it = l.trim().strip_prefix('#')?.split_whitespace();
        (it.next()? == "nodes").then_some(())?;
        it.next()?.parse().ok()
    })
}

/// One raw input line: `src dst weight [ignored...]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawRecord {
    pub src: i64,
    pub dst: i64,
    pub weight: f64,
}

/// Parses whitespace- or comma-separated records. Blank lines and lines
/// starting with `#` are skipped; extra trailing columns (timestamps) are
/// ignored.
pub fn parse_records(text: &str) -> Result<Vec<RawRecord>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: idx + 1, msg };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() < 3 {
            return Err(err(format!("expected `src dst weight`, got {:?}", line)));
        }
        let src = fields[0].parse().map_err(|_| err(format!("bad source id {:?}", fields[0])))?;
        let dst = fields[1].parse().map_err(|_| err(format!("bad target id {:?}", fields[1])))?;
        let weight: f64 = fields[2].parse().map_err(|_| err(format!("bad weight {:?}", fields[2])))?;
        if !weight.is_finite() {
            return Err(err(format!("non-finite weight {:?}", fields[2])));
        }
        out.push(RawRecord { src, dst, weight });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdPolicy {
    /// Dense ids in order of first appearance.
    Remap,
    /// Ids are already dense; `nodes` overrides `max id + 1`.
    Preserve { nodes: Option<usize> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub edges_in: usize,
    pub dropped_zero_weight: usize,
    pub dropped_self_loops: usize,
    pub duplicates: usize,
    pub conflicts: usize,
    pub nodes: usize,
    pub edges: usize,
    pub positive: usize,
    pub negative: usize,
}

impl IngestReport {
    pub fn to_text(&self) -> String {
        format!(
            "edges_in={}\ndropped_zero_weight={}\ndropped_self_loops={}\nduplicates={}\nconflicts={}\nnodes={}\nedges={}\npositive={}\nnegative={}\n",
            self.edges_in,
            self.dropped_zero_weight,
            self.dropped_self_loops,
            self.duplicates,
            self.conflicts,
            self.nodes,
            self.edges,
            self.positive,
            self.negative
        )
    }
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub graph: SignedGraph,
    /// `original_ids[dense]` is the id the node had in the input.
    pub original_ids: Vec<i64>,
    pub report: IngestReport,
}

impl Ingested {
    /// `original dense` lines, sorted by dense id.
    pub fn id_map_text(&self) -> String {
        self.original_ids
            .iter()
            .enumerate()
            .map(|(dense, orig)| format!("{} {}\n", orig, dense))
            .collect()
    }
}

/// Turns raw directed, weighted records into an undirected signed graph.
///
/// Weights map to their signum and zero weights are dropped, as are
/// self-loops. Repeated records for the same unordered pair collapse to one
/// edge when their signs agree; any disagreement drops the pair and counts
/// it as a conflict.
pub fn ingest(records: &[RawRecord], policy: IdPolicy) -> Result<Ingested> {
    let mut report = IngestReport {
        edges_in: records.len(),
        ..Default::default()
    };
    let mut dense: HashMap<i64, NodeId> = HashMap::new();
    let mut original_ids: Vec<i64> = Vec::new();
    let mut pair_signs: HashMap<(NodeId, NodeId), Option<Sign>> = HashMap::new();
    let mut pair_order: Vec<(NodeId, NodeId)> = Vec::new();

    for r in records {
        let Some(sign) = Sign::from_weight(r.weight) else {
            report.dropped_zero_weight += 1;
            continue;
        };
        if r.src == r.dst {
            report.dropped_self_loops += 1;
            continue;
        }
        let (a, b) = match policy {
            IdPolicy::Remap => {
                let mut id = |x: i64| {
                    *dense.entry(x).or_insert_with(|| {
                        original_ids.push(x);
                        original_ids.len() - 1
                    })
                };
                (id(r.src), id(r.dst))
            }
            IdPolicy::Preserve { .. } => {
                if r.src < 0 || r.dst < 0 {
                    return Err(Error::InvalidParam(format!("negative node id in ({}, {})", r.src, r.dst)));
                }
                (r.src as NodeId, r.dst as NodeId)
            }
        };
        let key = (a.min(b), a.max(b));
        match pair_signs.get_mut(&key) {
            None => {
                pair_signs.insert(key, Some(sign));
                pair_order.push(key);
            }
            Some(slot) => {
                report.duplicates += 1;
                if *slot != Some(sign) {
                    *slot = None;
                }
            }
        }
    }

    let mut edges = Vec::with_capacity(pair_order.len());
    for key in pair_order {
        match pair_signs[&key] {
            Some(sign) => edges.push(SignedEdge {
                u: key.0,
                v: key.1,
                sign,
            }),
            None => report.conflicts += 1,
        }
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let n = match policy {
        IdPolicy::Remap => original_ids.len(),
        IdPolicy::Preserve { nodes } => {
            let max_id = edges.iter().map(|e| e.v).max().unwrap_or(0);
            let n = nodes.unwrap_or(max_id + 1);
            if max_id >= n {
                return Err(Error::NodeOutOfRange(max_id, n));
            }
            original_ids = (0..n as i64).collect();
            n
        }
    };
    let graph = SignedGraph::from_edges(n, edges)?;
    let (total, pos, neg) = graph.edge_counts();
    report.nodes = n;
    report.edges = total;
    report.positive = pos;
    report.negative = neg;
    Ok(Ingested {
        graph,
        original_ids,
        report,
    })
}

/// Reads a raw dataset file and writes the canonical graph, the id map
/// (`<out>.idmap`) and the report (`<out>.report`).
pub fn ingest_file(input: &Path, output: &Path) -> Result<Ingested> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let ingested = ingest(&parse_records(&text)?, IdPolicy::Remap)?;
    ingested.graph.write_edge_list(output)?;
    let sidecar = |ext: &str| {
        let mut p = output.as_os_str().to_owned();
        p.push(ext);
        std::path::PathBuf::from(p)
    };
    let idmap = sidecar(".idmap");
    std::fs::File::create(&idmap)
        .and_then(|mut f| f.write_all(ingested.id_map_text().as_bytes()))
        .map_err(|e| Error::io(&idmap, e))?;
    let report = sidecar(".report");
    std::fs::write(&report, ingested.report.to_text()).map_err(|e| Error::io(&report, e))?;
    Ok(ingested)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rec(src: i64, dst: i64, weight: f64) -> RawRecord {
        RawRecord { src, dst, weight }
    }

    fn e(u: NodeId, v: NodeId, s: i8) -> SignedEdge {
        SignedEdge::new(u, v, if s > 0 { Sign::Positive } else { Sign::Negative }).unwrap()
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SignedGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push(e(u, v, if rng.random_bool(0.7) { 1 } else { -1 }));
                }
            }
        }
        SignedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn symmetrized_duplicates_collapse() {
        let out = ingest(&[rec(0, 1, 3.0), rec(1, 0, 5.0)], IdPolicy::Remap).unwrap();
        assert_eq!(out.graph.edges(), &[e(0, 1, 1)]);
        assert_eq!(out.report.duplicates, 1);
        assert_eq!(out.report.conflicts, 0);
    }

    #[test]
    fn conflicting_orientations_are_dropped() {
        let err = ingest(&[rec(0, 1, 2.0), rec(1, 0, -4.0)], IdPolicy::Remap).unwrap_err();
        assert!(matches!(err, Error::EmptyGraph));

        let out = ingest(&[rec(0, 1, 2.0), rec(1, 0, -4.0), rec(1, 2, 1.0)], IdPolicy::Remap).unwrap();
        assert_eq!(out.report.conflicts, 1);
        assert_eq!(out.graph.edge_count(), 1);
    }

    #[test]
    fn zero_weights_and_self_loops_dropped() {
        let out = ingest(&[rec(5, 5, 1.0), rec(5, 9, 0.0), rec(9, 7, -2.0)], IdPolicy::Remap).unwrap();
        assert_eq!(out.report.dropped_self_loops, 1);
        assert_eq!(out.report.dropped_zero_weight, 1);
        // 9 appears first among usable records.
        assert_eq!(out.original_ids, vec![9, 7]);
        assert_eq!(out.graph.edges(), &[e(0, 1, -1)]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse_records("# header\n1 2 1\n3 x 1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_records("1 2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_with_timestamps() {
        let recs = parse_records("7188,1,10,1407470400\n430,1,-1,1376539200\n").unwrap();
        assert_eq!(recs[1], rec(430, 1, -1.0));
    }

    #[test]
    fn common_neighbor_examples() {
        let tri = SignedGraph::from_edges(3, [e(0, 1, 1), e(1, 2, 1), e(0, 2, 1)]).unwrap();
        assert_eq!(
            tri.common_neighbors(0, 1),
            vec![CommonNeighbor {
                node: 2,
                to_u: Sign::Positive,
                to_v: Sign::Positive
            }]
        );
        let path = SignedGraph::from_edges(3, [e(0, 1, 1), e(1, 2, 1)]).unwrap();
        assert_eq!(path.common_neighbors(0, 2).len(), 1);
        assert_eq!(path.common_neighbors(0, 2)[0].node, 1);
    }

    #[test]
    fn common_neighbors_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_graph(&mut rng, 200, 0.05);
        for u in 0..g.node_count() {
            for v in u + 1..g.node_count() {
                let brute: Vec<CommonNeighbor> = (0..g.node_count())
                    .filter_map(|w| {
                        Some(CommonNeighbor {
                            node: w,
                            to_u: g.sign(u, w)?,
                            to_v: g.sign(v, w)?,
                        })
                    })
                    .collect();
                assert_eq!(g.common_neighbors(u, v), brute);
            }
        }
    }

    #[test]
    fn edge_count_examples() {
        let empty = SignedGraph::from_edges(4, []).unwrap();
        assert_eq!(empty.edge_counts(), (0, 0, 0));
        let g = SignedGraph::from_edges(3, [e(0, 1, 1), e(1, 2, -1)]).unwrap();
        assert_eq!(g.edge_counts(), (2, 1, 1));
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(SignedGraph::from_edges(3, [e(0, 1, 1), e(1, 0, -1)]).is_err());
        assert!(matches!(SignedGraph::from_edges(2, [e(0, 2, 1)]), Err(Error::NodeOutOfRange(2, 2))));
    }

    #[test]
    fn isolated_nodes_survive_round_trip() {
        let g = SignedGraph::from_edges(6, [e(0, 3, -1), e(1, 3, 1)]).unwrap();
        assert_eq!(SignedGraph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    proptest! {
        #[test]
        fn adjacency_invariants(seed in 0u64..1000, n in 2usize..40, p in 0.05f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, p);
            let mut half_degree = 0;
            for u in 0..n {
                let nb = g.neighbors(u);
                prop_assert!(nb.windows(2).all(|w| w[0].0 < w[1].0));
                for &(v, s) in nb {
                    prop_assert!(v != u);
                    prop_assert_eq!(g.sign(v, u), Some(s));
                }
                half_degree += nb.len();
            }
            prop_assert_eq!(half_degree, 2 * g.edge_count());
            let (t, pos, neg) = g.edge_counts();
            prop_assert_eq!(pos + neg, t);
        }

        #[test]
        fn canonical_text_round_trips(seed in 0u64..1000, n in 2usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, 0.2);
            prop_assume!(g.edge_count() > 0);
            let back = SignedGraph::parse_edge_list(&g.to_edge_list()).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
