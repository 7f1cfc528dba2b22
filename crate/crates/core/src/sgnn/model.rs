use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::FeatureMatrix;
use crate::error::{Error, Result};
use crate::graph::{SignedEdge, SignedGraph};

/// Logits are clamped to `[-LOGIT_CLIP, LOGIT_CLIP]` before the sigmoid.
pub const LOGIT_CLIP: f64 = 30.0;

/// Per-layer channel weights. Each maps `[self || aggregate]` to the hidden
/// width, so layer 1 is `hidden x 2*input_dim` and later layers are
/// `hidden x 2*hidden`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelWeights {
    pub pos: Array2<f64>,
    pub neg: Array2<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnnModel {
    pub layers: Vec<ChannelWeights>,
    /// Over `[H_u || H_v]`, length `4 * hidden`.
    pub classifier: Array1<f64>,
    pub bias: f64,
    pub seed: u64,
}

/// Gradients share the model's layout.
pub type Gradients = SgnnModel;

/// Final-layer node representations.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    pub pos: Array2<f64>,
    pub neg: Array2<f64>,
}

impl Embeddings {
    pub fn node_count(&self) -> usize {
        self.pos.nrows()
    }

    /// `H_v = [h_v^pos || h_v^neg]`.
    pub fn node(&self, v: usize) -> Array1<f64> {
        concatenate![Axis(0), self.pos.row(v), self.neg.row(v)]
    }

    /// All `H_v` stacked, `n x 2*hidden`.
    pub fn matrix(&self) -> Array2<f64> {
        concatenate![Axis(1), self.pos, self.neg]
    }
}

struct LayerCache {
    pos_in: Array2<f64>,
    neg_in: Array2<f64>,
    pos_out: Array2<f64>,
    neg_out: Array2<f64>,
}

impl SgnnModel {
    /// Glorot-uniform weights, zero classifier bias.
    pub fn new(input_dim: usize, hidden: usize, layers: usize, seed: u64) -> Result<SgnnModel> {
        if input_dim == 0 || hidden == 0 || layers == 0 {
            return Err(Error::InvalidParam("model dimensions must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-a..=a))
        };
        let mut ls = Vec::with_capacity(layers);
        for l in 0..layers {
            let cols = 2 * if l == 0 { input_dim } else { hidden };
            ls.push(ChannelWeights {
                pos: glorot(hidden, cols),
                neg: glorot(hidden, cols),
            });
        }
        let classifier = glorot(1, 4 * hidden).row(0).to_owned();
        Ok(SgnnModel {
            layers: ls,
            classifier,
            bias: 0.0,
            seed,
        })
    }

    pub fn zeros_like(&self) -> SgnnModel {
        SgnnModel {
            layers: self
                .layers
                .iter()
                .map(|l| ChannelWeights {
                    pos: Array2::zeros(l.pos.raw_dim()),
                    neg: Array2::zeros(l.neg.raw_dim()),
                })
                .collect(),
            classifier: Array1::zeros(self.classifier.len()),
            bias: 0.0,
            seed: self.seed,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].pos.ncols() / 2
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers[0].pos.nrows()
    }

    /// Every parameter tensor as a flat slice, in a fixed order.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::new();
        for (l, w) in self.layers.iter_mut().enumerate() {
            out.push((format!("layer{l}.pos"), w.pos.as_slice_mut().expect("standard layout")));
            out.push((format!("layer{l}.neg"), w.neg.as_slice_mut().expect("standard layout")));
        }
        out.push(("classifier".into(), self.classifier.as_slice_mut().expect("contiguous")));
        out.push(("bias".into(), std::slice::from_mut(&mut self.bias)));
        out
    }

    pub fn tensors(&self) -> Vec<(String, Vec<f64>)> {
        let mut c = self.clone();
        c.tensors_mut().into_iter().map(|(n, t)| (n, t.to_vec())).collect()
    }

    fn check_shapes(&self) -> Result<()> {
        let h = self.hidden_dim();
        for (l, w) in self.layers.iter().enumerate() {
            let cols = if l == 0 { 2 * self.input_dim() } else { 2 * h };
            if w.pos.dim() != (h, cols) || w.neg.dim() != (h, cols) {
                return Err(Error::Shape(format!("layer {l} weights are not {h}x{cols}")));
            }
        }
        if self.classifier.len() != 4 * h {
            return Err(Error::Shape(format!("classifier has length {}, expected {}", self.classifier.len(), 4 * h)));
        }
        Ok(())
    }

    fn check_inputs(&self, g: &SignedGraph, x: &FeatureMatrix) -> Result<()> {
        self.check_shapes()?;
        if x.rows() != g.node_count() {
            return Err(Error::Shape(format!("{} feature rows for {} nodes", x.rows(), g.node_count())));
        }
        if x.dim() != self.input_dim() {
            return Err(Error::Shape(format!("feature dim {} but model expects {}", x.dim(), self.input_dim())));
        }
        Ok(())
    }

    pub fn forward(&self, g: &SignedGraph, x: &FeatureMatrix) -> Result<Embeddings> {
        self.check_inputs(g, x)?;
        let caches = self.forward_cached(g, x);
        let last = caches.into_iter().last().unwrap();
        Ok(Embeddings {
            pos: last.pos_out,
            neg: last.neg_out,
        })
    }

    fn forward_cached(&self, g: &SignedGraph, x: &FeatureMatrix) -> Vec<LayerCache> {
        let mut caches: Vec<LayerCache> = Vec::with_capacity(self.layers.len());
        for (l, w) in self.layers.iter().enumerate() {
            let (pos_in, neg_in) = match caches.last() {
                None => {
                    let (ap, an) = aggregate_first(g, &x.data);
                    (
                        concatenate![Axis(1), x.data, ap],
                        concatenate![Axis(1), x.data, an],
                    )
                }
                Some(prev) => {
                    let (ap, an) = aggregate_cross(g, &prev.pos_out, &prev.neg_out);
                    (
                        concatenate![Axis(1), prev.pos_out, ap],
                        concatenate![Axis(1), prev.neg_out, an],
                    )
                }
            };
            debug_assert_eq!(pos_in.ncols(), w.pos.ncols(), "layer {l}");
            let pos_out = pos_in.dot(&w.pos.t()).mapv_into(f64::tanh);
            let neg_out = neg_in.dot(&w.neg.t()).mapv_into(f64::tanh);
            caches.push(LayerCache {
                pos_in,
                neg_in,
                pos_out,
                neg_out,
            });
        }
        caches
    }

    fn logit(&self, h: &Embeddings, e: &SignedEdge) -> f64 {
        let k = 2 * self.hidden_dim();
        let w = self.classifier.view();
        edge_dot(w.slice(s![..k]), h, e.u) + edge_dot(w.slice(s![k..]), h, e.v) + self.bias
    }

    /// Probability that the edge is positive, fed in canonical `(u, v)` order.
    pub fn predict_edge(&self, h: &Embeddings, e: &SignedEdge) -> Result<f64> {
        if e.v >= h.node_count() {
            return Err(Error::NodeOutOfRange(e.v, h.node_count()));
        }
        Ok(sigmoid(self.logit(h, e).clamp(-LOGIT_CLIP, LOGIT_CLIP)))
    }

    pub fn predict_edges(&self, h: &Embeddings, edges: &[SignedEdge]) -> Result<Vec<f64>> {
        edges.iter().map(|e| self.predict_edge(h, e)).collect()
    }
}

fn edge_dot(w: ArrayView1<f64>, h: &Embeddings, v: usize) -> f64 {
    let k = h.pos.ncols();
    w.slice(s![..k]).dot(&h.pos.row(v)) + w.slice(s![k..]).dot(&h.neg.row(v))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Layer-1 aggregation: mean of positive-neighbor features and mean of
/// negative-neighbor features. Empty neighborhoods give zero rows.
fn aggregate_first(g: &SignedGraph, x: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let mut pos = Array2::zeros(x.raw_dim());
    let mut neg = Array2::zeros(x.raw_dim());
    for i in 0..g.node_count() {
        let (mut np, mut nn) = (0usize, 0usize);
        for &(j, s) in g.neighbors(i) {
            if s.is_positive() {
                pos.row_mut(i).scaled_add(1.0, &x.row(j));
                np += 1;
            } else {
                neg.row_mut(i).scaled_add(1.0, &x.row(j));
                nn += 1;
            }
        }
        if np > 0 {
            pos.row_mut(i).mapv_inplace(|v| v / np as f64);
        }
        if nn > 0 {
            neg.row_mut(i).mapv_inplace(|v| v / nn as f64);
        }
    }
    (pos, neg)
}

/// Later-layer aggregation over one multiset per channel: the positive
/// channel takes `h^pos` of positive neighbors and `h^neg` of negative
/// neighbors; the negative channel the reverse. Mean over the full degree.
fn aggregate_cross(g: &SignedGraph, hp: &Array2<f64>, hn: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let mut pos = Array2::zeros(hp.raw_dim());
    let mut neg = Array2::zeros(hp.raw_dim());
    for i in 0..g.node_count() {
        let deg = g.degree(i);
        if deg == 0 {
            continue;
        }
        for &(j, s) in g.neighbors(i) {
            let (to_pos, to_neg) = if s.is_positive() { (hp, hn) } else { (hn, hp) };
            pos.row_mut(i).scaled_add(1.0, &to_pos.row(j));
            neg.row_mut(i).scaled_add(1.0, &to_neg.row(j));
        }
        let inv = 1.0 / deg as f64;
        pos.row_mut(i).mapv_inplace(|v| v * inv);
        neg.row_mut(i).mapv_inplace(|v| v * inv);
    }
    (pos, neg)
}

/// Class-weighted binary cross-entropy over `batch` and the gradient of
/// every parameter.
///
/// Each class present in the batch gets total weight `1/K` (K = number of
/// classes present), split evenly among its edges, so the loss is a
/// weighted mean and equals plain mean cross-entropy on balanced batches.
pub fn loss_and_gradients(
    g: &SignedGraph,
    model: &SgnnModel,
    x: &FeatureMatrix,
    batch: &[SignedEdge],
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::InvalidParam("empty training batch".into()));
    }
    model.check_inputs(g, x)?;
    if let Some(e) = batch.iter().find(|e| e.v >= g.node_count()) {
        return Err(Error::NodeOutOfRange(e.v, g.node_count()));
    }

    let caches = model.forward_cached(g, x);
    let last = caches.last().unwrap();
    let h = Embeddings {
        pos: last.pos_out.clone(),
        neg: last.neg_out.clone(),
    };
    let hidden = model.hidden_dim();
    let k = 2 * hidden;

    let n_pos = batch.iter().filter(|e| e.sign.is_positive()).count();
    let n_neg = batch.len() - n_pos;
    let classes = (n_pos > 0) as usize + (n_neg > 0) as usize;
    let weight = |positive: bool| 1.0 / (classes * if positive { n_pos } else { n_neg }) as f64;

    let mut grads = model.zeros_like();
    let mut d_pos = Array2::<f64>::zeros(h.pos.raw_dim());
    let mut d_neg = Array2::<f64>::zeros(h.neg.raw_dim());
    let mut loss = 0.0;
    for e in batch {
        let y = e.sign.is_positive();
        let c = weight(y);
        let z = model.logit(&h, e);
        let zc = z.clamp(-LOGIT_CLIP, LOGIT_CLIP);
        loss += c * if y { softplus(-zc) } else { softplus(zc) };
        if z.abs() >= LOGIT_CLIP {
            continue;
        }
        let dz = c * (sigmoid(zc) - if y { 1.0 } else { 0.0 });
        grads.bias += dz;
        for (side, v) in [(0usize, e.u), (1, e.v)] {
            let w = model.classifier.slice(s![side * k..(side + 1) * k]);
            {
                let mut gw = grads.classifier.slice_mut(s![side * k..side * k + hidden]);
                gw.scaled_add(dz, &h.pos.row(v));
            }
            {
                let mut gw = grads.classifier.slice_mut(s![side * k + hidden..(side + 1) * k]);
                gw.scaled_add(dz, &h.neg.row(v));
            }
            d_pos.row_mut(v).scaled_add(dz, &w.slice(s![..hidden]));
            d_neg.row_mut(v).scaled_add(dz, &w.slice(s![hidden..]));
        }
    }

    for l in (0..model.layers.len()).rev() {
        let cache = &caches[l];
        let w = &model.layers[l];
        let dz_pos = d_pos * cache.pos_out.mapv(|t| 1.0 - t * t);
        let dz_neg = d_neg * cache.neg_out.mapv(|t| 1.0 - t * t);
        grads.layers[l].pos.assign(&dz_pos.t().dot(&cache.pos_in));
        grads.layers[l].neg.assign(&dz_neg.t().dot(&cache.neg_in));
        if l == 0 {
            break;
        }
        let din_pos = dz_pos.dot(&w.pos);
        let din_neg = dz_neg.dot(&w.neg);
        let mut prev_pos = din_pos.slice(s![.., ..hidden]).to_owned();
        let mut prev_neg = din_neg.slice(s![.., ..hidden]).to_owned();
        let agg_pos = din_pos.slice(s![.., hidden..]);
        let agg_neg = din_neg.slice(s![.., hidden..]);
        for i in 0..g.node_count() {
            let deg = g.degree(i);
            if deg == 0 {
                continue;
            }
            let inv = 1.0 / deg as f64;
            for &(j, s) in g.neighbors(i) {
                if s.is_positive() {
                    prev_pos.row_mut(j).scaled_add(inv, &agg_pos.row(i));
                    prev_neg.row_mut(j).scaled_add(inv, &agg_neg.row(i));
                } else {
                    prev_neg.row_mut(j).scaled_add(inv, &agg_pos.row(i));
                    prev_pos.row_mut(j).scaled_add(inv, &agg_neg.row(i));
                }
            }
        }
        d_pos = prev_pos;
        d_neg = prev_neg;
    }
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sign;
    use crate::sgnn::init_features;
    use rand::seq::SliceRandom;

    fn e(u: usize, v: usize, s: i8) -> SignedEdge {
        SignedEdge::new(u, v, if s > 0 { Sign::Positive } else { Sign::Negative }).unwrap()
    }

    fn six_node() -> SignedGraph {
        SignedGraph::from_edges(
            6,
            [
                e(0, 1, 1),
                e(0, 2, -1),
                e(1, 2, 1),
                e(2, 3, -1),
                e(3, 4, 1),
                e(1, 4, -1),
                e(4, 5, 1),
                e(0, 5, 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn isolated_node_sees_zero_aggregates() {
        let g = SignedGraph::from_edges(3, [e(0, 1, 1)]).unwrap();
        let x = init_features(3, 4, 1);
        let m = SgnnModel::new(4, 3, 1, 2).unwrap();
        let h = m.forward(&g, &x).unwrap();
        let self_and_zero = concatenate![Axis(0), x.data.row(2), Array1::<f64>::zeros(4)];
        let expect_pos = m.layers[0].pos.dot(&self_and_zero).mapv(f64::tanh);
        let expect_neg = m.layers[0].neg.dot(&self_and_zero).mapv(f64::tanh);
        assert!((&h.pos.row(2) - &expect_pos).iter().all(|d| d.abs() < 1e-14));
        assert!((&h.neg.row(2) - &expect_neg).iter().all(|d| d.abs() < 1e-14));
    }

    #[test]
    fn hand_computed_three_node_fixture() {
        // Path 0 -(+)- 1 -(-)- 2, scalar features 1, 2, 3, one hidden unit,
        // all weights 1 except the last layer-2 weight.
        let g = SignedGraph::from_edges(3, [e(0, 1, 1), e(1, 2, -1)]).unwrap();
        let x = FeatureMatrix {
            data: Array2::from_shape_vec((3, 1), vec![1.0, 2.0, 3.0]).unwrap(),
            seed: 0,
        };
        let mut m = SgnnModel::new(1, 1, 2, 0).unwrap();
        for w in &mut m.layers {
            w.pos.fill(1.0);
            w.neg.fill(1.0);
        }
        m.layers[1].pos[[0, 1]] = 0.5;
        m.layers[1].neg[[0, 1]] = -0.5;
        let h = m.forward(&g, &x).unwrap();

        let t = f64::tanh;
        // Layer 1: pos aggregates positive neighbours, neg the negative ones.
        let p1 = [t(1.0 + 2.0), t(2.0 + 1.0), t(3.0 + 0.0)];
        let n1 = [t(1.0 + 0.0), t(2.0 + 3.0), t(3.0 + 2.0)];
        // Layer 2 aggregates over the whole neighbourhood, crossing channels
        // over negative edges.
        let ap = [p1[1], (p1[0] + n1[2]) / 2.0, n1[1]];
        let an = [n1[1], (n1[0] + p1[2]) / 2.0, p1[1]];
        for i in 0..3 {
            assert!((h.pos[[i, 0]] - t(p1[i] + 0.5 * ap[i])).abs() < 1e-15);
            assert!((h.neg[[i, 0]] - t(n1[i] - 0.5 * an[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_copies_embed_identically() {
        let base = six_node();
        let n = base.node_count();
        let doubled = SignedGraph::from_edges(
            2 * n,
            base.edges()
                .iter()
                .flat_map(|e| [*e, SignedEdge::new(e.u + n, e.v + n, e.sign).unwrap()]),
        )
        .unwrap();
        let x = init_features(n, 5, 4);
        let x2 = FeatureMatrix {
            data: concatenate![Axis(0), x.data, x.data],
            seed: 4,
        };
        let m = SgnnModel::new(5, 4, 2, 9).unwrap();
        let h = m.forward(&doubled, &x2).unwrap();
        for v in 0..n {
            assert_eq!(h.node(v), h.node(v + n));
        }
    }

    #[test]
    fn permutation_equivariance() {
        let g = six_node();
        let x = init_features(6, 5, 1);
        let m = SgnnModel::new(5, 4, 2, 3).unwrap();
        let mut perm: Vec<usize> = (0..6).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
        let gp = g.relabeled(&perm).unwrap();
        let mut xp = x.clone();
        for (i, &p) in perm.iter().enumerate() {
            xp.data.row_mut(p).assign(&x.data.row(i));
        }
        let h = m.forward(&g, &x).unwrap();
        let hp = m.forward(&gp, &xp).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            let diff = (&h.node(i) - &hp.node(p)).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
            assert!(diff < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let g = six_node();
        let m = SgnnModel::new(5, 4, 2, 3).unwrap();
        assert!(matches!(m.forward(&g, &init_features(6, 4, 0)), Err(Error::Shape(_))));
        assert!(matches!(m.forward(&g, &init_features(5, 5, 0)), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_classifier_predicts_half() {
        let g = six_node();
        let x = init_features(6, 5, 1);
        let mut m = SgnnModel::new(5, 4, 2, 3).unwrap();
        m.classifier.fill(0.0);
        let h = m.forward(&g, &x).unwrap();
        for e in g.edges() {
            assert_eq!(m.predict_edge(&h, e).unwrap(), 0.5);
        }
    }

    #[test]
    fn clipped_logits_stay_inside_the_unit_interval() {
        let g = six_node();
        let x = init_features(6, 5, 1);
        let mut m = SgnnModel::new(5, 4, 2, 3).unwrap();
        m.classifier.fill(0.0);
        for bias in [1e6, -1e6] {
            m.bias = bias;
            let h = m.forward(&g, &x).unwrap();
            let p = m.predict_edge(&h, &g.edges()[0]).unwrap();
            assert!(p > 0.0 && p < 1.0);
            assert_eq!(p, if bias > 0.0 { sigmoid(30.0) } else { sigmoid(-30.0) });
        }
    }

    #[test]
    fn loss_at_the_extremes() {
        let g = six_node();
        let x = init_features(6, 5, 1);
        let mut m = SgnnModel::new(5, 4, 2, 3).unwrap();
        m.classifier.fill(0.0);
        let balanced = [e(0, 1, 1), e(0, 2, -1)];
        let (loss, _) = loss_and_gradients(&g, &m, &x, &balanced).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);

        m.bias = 1e3;
        let positives = [e(0, 1, 1), e(1, 2, 1)];
        let (loss, grads) = loss_and_gradients(&g, &m, &x, &positives).unwrap();
        assert!(loss < 1e-6);
        assert_eq!(grads.bias, 0.0);
    }

    #[test]
    fn batch_errors() {
        let g = six_node();
        let x = init_features(6, 5, 1);
        let m = SgnnModel::new(5, 4, 2, 3).unwrap();
        assert!(loss_and_gradients(&g, &m, &x, &[]).is_err());
        assert!(matches!(
            loss_and_gradients(&g, &m, &x, &[e(0, 9, 1)]),
            Err(Error::NodeOutOfRange(9, 6))
        ));
    }
}
