//! Why edges in unbalanced cycles are hard for message passing, as code.
//!
//! Reach sets, a two-channel (balanced / unbalanced) Weisfeiler-Lehman
//! refinement, signed ego-trees with a canonical-encoding isomorphism test,
//! an adequacy checker for node embeddings, and a harness that runs all of
//! it against small unbalanced cycle fixtures.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, SignedEdge, SignedGraph};
use crate::sgnn::{FeatureMatrix, SgnnModel};

/// `balanced[l-1]` / `unbalanced[l-1]` are the nodes reachable from the
/// source by a walk of length `l` with an even / odd number of negative edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachSets {
    pub source: NodeId,
    pub balanced: Vec<BTreeSet<NodeId>>,
    pub unbalanced: Vec<BTreeSet<NodeId>>,
}

impl ReachSets {
    pub fn balanced_at(&self, l: usize) -> &BTreeSet<NodeId> {
        &self.balanced[l - 1]
    }

    pub fn unbalanced_at(&self, l: usize) -> &BTreeSet<NodeId> {
        &self.unbalanced[l - 1]
    }
}

pub fn reach_sets(g: &SignedGraph, v: NodeId, max_len: usize) -> Result<ReachSets> {
    if max_len == 0 {
        return Err(Error::InvalidParam("reach sets need max_len >= 1".into()));
    }
    if v >= g.node_count() {
        return Err(Error::NodeOutOfRange(v, g.node_count()));
    }
    let mut balanced = vec![g.positive_neighbors(v).collect::<BTreeSet<_>>()];
    let mut unbalanced = vec![g.negative_neighbors(v).collect::<BTreeSet<_>>()];
    for _ in 1..max_len {
        let (b, u) = (balanced.last().unwrap(), unbalanced.last().unwrap());
        let mut nb = BTreeSet::new();
        let mut nu = BTreeSet::new();
        for &k in b {
            nb.extend(g.positive_neighbors(k));
            nu.extend(g.negative_neighbors(k));
        }
        for &k in u {
            nb.extend(g.negative_neighbors(k));
            nu.extend(g.positive_neighbors(k));
        }
        balanced.push(nb);
        unbalanced.push(nu);
    }
    Ok(ReachSets {
        source: v,
        balanced,
        unbalanced,
    })
}

/// Interns label signatures; distinct signatures always get distinct ids.
/// Share one dictionary between graphs to make their labels comparable.
#[derive(Clone, Debug, Default)]
pub struct WlDictionary {
    ids: HashMap<String, u32>,
    signatures: Vec<String>,
}

impl WlDictionary {
    pub fn new() -> WlDictionary {
        WlDictionary::default()
    }

    pub fn intern(&mut self, signature: String) -> u32 {
        if let Some(&id) = self.ids.get(&signature) {
            return id;
        }
        let id = self.signatures.len() as u32;
        self.signatures.push(signature.clone());
        self.ids.insert(signature, id);
        id
    }

    pub fn signature(&self, id: u32) -> &str {
        &self.signatures[id as usize]
    }

    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }
}

fn multiset(labels: impl Iterator<Item = u32>) -> String {
    let mut v: Vec<u32> = labels.collect();
    v.sort_unstable();
    let parts: Vec<String> = v.iter().map(u32::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// `labels[l][v] = (X_v(B), X_v(U))` after `l` iterations; iteration 0 is
/// the uniform initial label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WlLabeling {
    pub labels: Vec<Vec<(u32, u32)>>,
}

impl WlLabeling {
    pub fn iterations(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn at(&self, iteration: usize) -> &[(u32, u32)] {
        &self.labels[iteration]
    }

    /// Sorted label pairs: equal for isomorphic graphs.
    pub fn histogram(&self, iteration: usize) -> Vec<(u32, u32)> {
        let mut h = self.labels[iteration].clone();
        h.sort_unstable();
        h
    }

    /// Per-channel node partitions at an iteration, as canonical class ids
    /// (first-appearance order) so partitions can be compared directly.
    pub fn partition(&self, iteration: usize) -> (Vec<usize>, Vec<usize>) {
        fn canon(xs: impl Iterator<Item = u32>) -> Vec<usize> {
            let mut seen = HashMap::new();
            xs.map(|x| {
                let next = seen.len();
                *seen.entry(x).or_insert(next)
            })
            .collect()
        }
        let l = &self.labels[iteration];
        (canon(l.iter().map(|p| p.0)), canon(l.iter().map(|p| p.1)))
    }
}

pub fn signed_wl(g: &SignedGraph, iterations: usize) -> Result<WlLabeling> {
    signed_wl_with(g, iterations, &mut WlDictionary::new())
}

/// First iteration: each channel sees its own sign's neighbors.
/// Later iterations: the balanced channel collects balanced labels over
/// positive edges and unbalanced labels over negative edges; the unbalanced
/// channel the reverse.
pub fn signed_wl_with(g: &SignedGraph, iterations: usize, dict: &mut WlDictionary) -> Result<WlLabeling> {
    if iterations == 0 {
        return Err(Error::InvalidParam("signed WL needs at least one iteration".into()));
    }
    let n = g.node_count();
    let init = dict.intern("init".into());
    let mut labels = vec![vec![(init, init); n]];
    for it in 1..=iterations {
        let prev = &labels[it - 1];
        let next: Vec<(u32, u32)> = (0..n)
            .map(|v| {
                let (b, u) = prev[v];
                if it == 1 {
                    let pos = multiset(g.positive_neighbors(v).map(|j| prev[j].0));
                    let neg = multiset(g.negative_neighbors(v).map(|j| prev[j].0));
                    (dict.intern(format!("1|{b}|{pos}")), dict.intern(format!("1|{u}|{neg}")))
                } else {
                    let bp = multiset(g.positive_neighbors(v).map(|j| prev[j].0));
                    let un = multiset(g.negative_neighbors(v).map(|j| prev[j].1));
                    let up = multiset(g.positive_neighbors(v).map(|j| prev[j].1));
                    let bn = multiset(g.negative_neighbors(v).map(|j| prev[j].0));
                    (dict.intern(format!("x|{b}|{bp}|{un}")), dict.intern(format!("x|{u}|{up}|{bn}")))
                }
            })
            .collect();
        labels.push(next);
    }
    Ok(WlLabeling { labels })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Graph node this copy stands for.
    pub origin: NodeId,
    /// Sign of the edge from the parent; `None` at the root.
    pub sign: Option<Sign>,
    pub level: usize,
    pub children: Vec<usize>,
}

/// Rooted k-hop signed ego-tree; `nodes[0]` is the root. Every tree node at
/// level `l < k` gets one child per graph neighbor, including the node it
/// was expanded from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EgoTree {
    pub depth: usize,
    pub nodes: Vec<TreeNode>,
}

pub const MAX_EGO_DEPTH: usize = 2;

pub fn build_ego_tree(g: &SignedGraph, v: NodeId, k: usize) -> Result<EgoTree> {
    if k > MAX_EGO_DEPTH {
        return Err(Error::DepthLimit(k));
    }
    if v >= g.node_count() {
        return Err(Error::NodeOutOfRange(v, g.node_count()));
    }
    let mut nodes = vec![TreeNode {
        origin: v,
        sign: None,
        level: 0,
        children: Vec::new(),
    }];
    let mut frontier = vec![0usize];
    for level in 1..=k {
        let mut next = Vec::new();
        for parent in frontier {
            for &(w, s) in g.neighbors(nodes[parent].origin) {
                let id = nodes.len();
                nodes.push(TreeNode {
                    origin: w,
                    sign: Some(s),
                    level,
                    children: Vec::new(),
                });
                nodes[parent].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(EgoTree { depth: k, nodes })
}

impl EgoTree {
    pub fn root(&self) -> NodeId {
        self.nodes[0].origin
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.nodes.iter().filter(|n| n.level == level).count()
    }

    /// Canonical string of the subtree at `idx`: incoming sign followed by
    /// the sorted encodings of its children.
    pub fn encode(&self, idx: usize) -> String {
        let node = &self.nodes[idx];
        let mut kids: Vec<String> = node.children.iter().map(|&c| self.encode(c)).collect();
        kids.sort_unstable();
        let sign = match node.sign {
            None => "r".to_string(),
            Some(s) => s.to_string(),
        };
        format!("({sign}{})", kids.concat())
    }
}

/// Isomorphism of rooted signed trees. The witness maps tree-node indices
/// of `t1` to those of `t2` and preserves parent links and edge signs.
pub fn ego_tree_isomorphic(t1: &EgoTree, t2: &EgoTree) -> (bool, Option<Vec<usize>>) {
    if t1.nodes.len() != t2.nodes.len() || t1.encode(0) != t2.encode(0) {
        return (false, None);
    }
    let mut witness = vec![usize::MAX; t1.nodes.len()];
    fn pair(t1: &EgoTree, a: usize, t2: &EgoTree, b: usize, out: &mut Vec<usize>) {
        out[a] = b;
        let sorted = |t: &EgoTree, i: usize| {
            let mut kids: Vec<(String, usize)> = t.nodes[i].children.iter().map(|&c| (t.encode(c), c)).collect();
            kids.sort();
            kids
        };
        for ((_, ca), (_, cb)) in sorted(t1, a).into_iter().zip(sorted(t2, b)) {
            pair(t1, ca, t2, cb, out);
        }
    }
    pair(t1, 0, t2, 0, &mut witness);
    (true, Some(witness))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdequacyReport {
    pub epsilon: f64,
    /// Negative edges `(i, j)`, `i < j`, whose endpoints are within epsilon.
    pub violations_a: Vec<(NodeId, NodeId)>,
    /// `(i, j, k)` with `j` a positive and `k` a negative neighbor of `i`,
    /// yet `dist(H_i, H_j) >= dist(H_i, H_k)`.
    pub violations_b: Vec<(NodeId, NodeId, NodeId)>,
    /// Every node taking part in a violation.
    pub improper_nodes: BTreeSet<NodeId>,
    /// Edges with at least one improper endpoint.
    pub inadequate_edges: Vec<(NodeId, NodeId)>,
}

impl AdequacyReport {
    pub fn is_adequate(&self) -> bool {
        self.violations_a.is_empty() && self.violations_b.is_empty()
    }
}

pub const DEFAULT_EPSILON: f64 = 1e-6;

fn dist(h: &Array2<f64>, a: usize, b: usize) -> f64 {
    h.row(a)
        .iter()
        .zip(h.row(b).iter())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Exhaustive check of both adequacy conditions under Euclidean distance.
/// `h` has one row per node.
pub fn check_adequacy(g: &SignedGraph, h: &Array2<f64>, epsilon: f64) -> Result<AdequacyReport> {
    if h.nrows() != g.node_count() {
        return Err(Error::Shape(format!("{} embeddings for {} nodes", h.nrows(), g.node_count())));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParam(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut violations_a = Vec::new();
    let mut violations_b = Vec::new();
    for e in g.edges() {
        if e.sign == Sign::Negative && dist(h, e.u, e.v) <= epsilon {
            violations_a.push((e.u, e.v));
        }
    }
    for i in 0..g.node_count() {
        for j in g.positive_neighbors(i) {
            let dj = dist(h, i, j);
            for k in g.negative_neighbors(i) {
                if dj >= dist(h, i, k) {
                    violations_b.push((i, j, k));
                }
            }
        }
    }
    let mut improper_nodes = BTreeSet::new();
    improper_nodes.extend(violations_a.iter().flat_map(|&(a, b)| [a, b]));
    improper_nodes.extend(violations_b.iter().flat_map(|&(a, b, c)| [a, b, c]));
    let inadequate_edges = g
        .edges()
        .iter()
        .filter(|e| improper_nodes.contains(&e.u) || improper_nodes.contains(&e.v))
        .map(SignedEdge::key)
        .collect();
    Ok(AdequacyReport {
        epsilon,
        violations_a,
        violations_b,
        improper_nodes,
        inadequate_edges,
    })
}

/// A small cycle with three named nodes: `twin` is joined to `root` by a
/// negative edge yet has an isomorphic 2-hop ego-tree; `other` is a positive
/// neighbor of `root` whose ego-tree differs.
#[derive(Clone, Debug)]
pub struct TheoryFixture {
    pub name: &'static str,
    pub graph: SignedGraph,
    pub root: NodeId,
    pub twin: NodeId,
    pub other: NodeId,
    /// Balanced control: no violation is forced.
    pub control: bool,
}

fn cycle(name: &'static str, signs: &[i8], root: NodeId, twin: NodeId, other: NodeId, control: bool) -> TheoryFixture {
    let n = signs.len();
    let edges = (0..n).map(|a| {
        let sign = if signs[a] > 0 { Sign::Positive } else { Sign::Negative };
        SignedEdge::new(a, (a + 1) % n, sign).expect("cycle edge")
    });
    TheoryFixture {
        name,
        graph: SignedGraph::from_edges(n, edges).expect("valid fixture"),
        root,
        twin,
        other,
        control,
    }
}

/// Unbalanced 3-, 4-, 5- and 6-cycles with a single negative edge, plus an
/// all-positive triangle as control. Edge `a` joins nodes `a` and `a+1`.
pub fn theory_fixtures() -> Vec<TheoryFixture> {
    vec![
        // i=0, j=1, k=2: ij negative, jk and ki positive.
        cycle("unbalanced 3-cycle", &[-1, 1, 1], 0, 1, 2, false),
        // i=0, j=1, l=2, k=3.
        cycle("unbalanced 4-cycle", &[-1, 1, 1, 1], 0, 1, 3, false),
        // i=0, k=1 (negative), j=4 (positive).
        cycle("unbalanced 5-cycle", &[-1, 1, 1, 1, 1], 0, 1, 4, false),
        cycle("unbalanced 6-cycle", &[-1, 1, 1, 1, 1, 1], 0, 1, 5, false),
        cycle("balanced 3-cycle (control)", &[1, 1, 1], 0, 1, 2, true),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Claim {
    pub text: String,
    pub passed: bool,
    /// Counterexample data when the claim fails.
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureReport {
    pub name: String,
    pub claims: Vec<Claim>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryReport {
    pub fixtures: Vec<FixtureReport>,
}

impl TheoryReport {
    pub fn passed(&self) -> bool {
        self.fixtures.iter().all(|f| f.claims.iter().all(|c| c.passed))
    }

    pub fn claim_count(&self) -> usize {
        self.fixtures.iter().map(|f| f.claims.len()).sum()
    }
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fx in &self.fixtures {
            writeln!(f, "fixture: {}", fx.name)?;
            for c in &fx.claims {
                writeln!(f, "  [{}] {}", if c.passed { "PASS" } else { "FAIL" }, c.text)?;
                if !c.passed {
                    writeln!(f, "         counterexample: {}", c.detail)?;
                }
            }
        }
        let failed = self.fixtures.iter().flat_map(|f| &f.claims).filter(|c| !c.passed).count();
        write!(f, "{} claims, {} failed: {}", self.claim_count(), failed, if failed == 0 { "OK" } else { "FAILED" })
    }
}

pub struct TheoryOptions {
    pub draws: usize,
    pub seed: u64,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub tolerance: f64,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions {
            draws: 10,
            seed: 0,
            input_dim: 8,
            hidden_dim: 8,
            tolerance: 1e-6,
        }
    }
}

fn claim(text: impl Into<String>, passed: bool, detail: impl Into<String>) -> Claim {
    Claim {
        text: text.into(),
        passed,
        detail: detail.into(),
    }
}

/// Identical features on every node, so only structure separates them.
fn shared_features(n: usize, d: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    let row: Array1<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut data = Array2::zeros((n, d));
    for mut r in data.rows_mut() {
        r.assign(&row);
    }
    FeatureMatrix { data, seed: 0 }
}

pub fn verify_fixture(fx: &TheoryFixture, opts: &TheoryOptions) -> Result<FixtureReport> {
    let g = &fx.graph;
    let (r, t, o) = (fx.root, fx.twin, fx.other);
    let mut claims = Vec::new();
    let tree = |v| build_ego_tree(g, v, 2);
    let (tr, tt, to) = (tree(r)?, tree(t)?, tree(o)?);

    let (iso_rt, _) = ego_tree_isomorphic(&tr, &tt);
    claims.push(claim(
        format!("ego-tree({r}) isomorphic to ego-tree({t})"),
        iso_rt,
        format!("{} vs {}", tr.encode(0), tt.encode(0)),
    ));
    if !fx.control {
        let (iso_ro, _) = ego_tree_isomorphic(&tr, &to);
        claims.push(claim(
            format!("ego-tree({r}) not isomorphic to ego-tree({o})"),
            !iso_ro,
            format!("both encode as {}", tr.encode(0)),
        ));
    }
    let wl = signed_wl(g, 2)?;
    claims.push(claim(
        format!("signed WL labels of {r} and {t} agree at iteration 2"),
        wl.at(2)[r] == wl.at(2)[t],
        format!("{:?} vs {:?}", wl.at(2)[r], wl.at(2)[t]),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    let mut first_report = None;
    let mut adequacy_failures = Vec::new();
    for draw in 0..opts.draws {
        let model = SgnnModel::new(opts.input_dim, opts.hidden_dim, 2, rng.random())?;
        let x = shared_features(g.node_count(), opts.input_dim, &mut rng);
        let h = model.forward(g, &x)?.matrix();
        worst = worst.max(dist(&h, r, t));
        let report = check_adequacy(g, &h, DEFAULT_EPSILON)?;
        let exhibited = report.violations_a.contains(&(r.min(t), r.max(t)))
            && report.violations_b.contains(&(r, o, t))
            && [r, t, o].iter().all(|v| report.improper_nodes.contains(v));
        let ok = if fx.control { report.is_adequate() } else { exhibited };
        if !ok {
            adequacy_failures.push(format!("draw {draw}: {report:?}"));
        }
        first_report.get_or_insert(report);
    }
    claims.push(claim(
        format!("H_{r} = H_{t} within {:e} at {} parameter draws", opts.tolerance, opts.draws),
        worst <= opts.tolerance,
        format!("max distance {worst:e}"),
    ));
    let adequacy_text = if fx.control {
        "no adequacy violation is forced".to_string()
    } else {
        let rep = first_report.as_ref().expect("at least one draw");
        format!(
            "adequacy violated: negative edge ({r},{t}) collapsed, dist(H_{r},H_{o}) >= dist(H_{r},H_{t}); {} inadequate edges",
            rep.inadequate_edges.len()
        )
    };
    claims.push(claim(adequacy_text, adequacy_failures.is_empty(), adequacy_failures.join("; ")));
    Ok(FixtureReport {
        name: fx.name.to_string(),
        claims,
    })
}

pub fn verify_theorems(opts: &TheoryOptions) -> Result<TheoryReport> {
    if opts.draws == 0 {
        return Err(Error::InvalidParam("need at least one parameter draw".into()));
    }
    let fixtures = theory_fixtures()
        .iter()
        .map(|fx| verify_fixture(fx, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoryReport { fixtures })
}

/// Canonical-encoding summary of every node's 2-hop ego-tree, grouped by
/// isomorphism class; handy for eyeballing fixtures.
pub fn ego_classes(g: &SignedGraph) -> Result<String> {
    let mut classes: HashMap<String, Vec<NodeId>> = HashMap::new();
    for v in 0..g.node_count() {
        classes.entry(build_ego_tree(g, v, 2)?.encode(0)).or_default().push(v);
    }
    let mut groups: Vec<Vec<NodeId>> = classes.into_values().collect();
    groups.sort();
    let mut s = String::new();
    for grp in groups {
        let _ = writeln!(s, "{grp:?}");
    }
    Ok(s)
}
