use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use super::model::{loss_and_gradients, Gradients, SgnnModel};
use crate::curriculum::CurriculumSchedule;
use crate::error::{Error, Result};
use crate::eval::metrics::auc;
use crate::graph::{SignedEdge, SignedGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub feature_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            feature_dim: 64,
            hidden_dim: 32,
            layers: 2,
            learning_rate: 0.05,
            momentum: 0.9,
            epochs: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.hidden_dim == 0 || self.layers == 0 || self.epochs == 0 {
            return Err(Error::InvalidParam("feature_dim, hidden_dim, layers and epochs must be positive".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParam("learning_rate must be > 0 and momentum in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub t: usize,
    pub g_t: f64,
    pub subset_size: usize,
    pub loss: f64,
    pub val_auc: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation AUC (the final
    /// parameters when validation AUC is never defined).
    pub model: SgnnModel,
    pub best_epoch: Option<usize>,
    pub log: Vec<EpochRecord>,
}

/// Curriculum training: epoch `t` takes one full-batch step on the
/// `g(t)` easiest fraction of the training edges.
///
/// `g` is the message-passing graph (the training graph); `val` edges are
/// only scored, never propagated over.
pub fn train_csg(
    g: &SignedGraph,
    schedule: &CurriculumSchedule,
    val: &[SignedEdge],
    x: &FeatureMatrix,
    init: SgnnModel,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if schedule.is_empty() || schedule.prefix_len(0) == 0 {
        return Err(Error::EmptySplit("curriculum subset at epoch 0"));
    }
    train_loop(g, val, x, init, cfg, |t| {
        (schedule.subset_at(t).to_vec(), schedule.params().value(t))
    })
}

/// Baseline: every epoch uses the full training set, with the edge order
/// reshuffled per epoch from `seed` unless `shuffle` is off.
#[allow(clippy::too_many_arguments)]
pub fn train_random(
    g: &SignedGraph,
    train_edges: &[SignedEdge],
    val: &[SignedEdge],
    x: &FeatureMatrix,
    init: SgnnModel,
    cfg: &TrainConfig,
    seed: u64,
    shuffle: bool,
) -> Result<TrainOutcome> {
    if train_edges.is_empty() {
        return Err(Error::EmptySplit("train"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = train_edges.to_vec();
    train_loop(g, val, x, init, cfg, |_| {
        if shuffle {
            order.shuffle(&mut rng);
        }
        (order.clone(), 1.0)
    })
}

fn train_loop(
    g: &SignedGraph,
    val: &[SignedEdge],
    x: &FeatureMatrix,
    mut model: SgnnModel,
    cfg: &TrainConfig,
    mut batch_at: impl FnMut(usize) -> (Vec<SignedEdge>, f64),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut velocity: Gradients = model.zeros_like();
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, SgnnModel)> = None;

    for t in 0..cfg.epochs {
        let (batch, g_t) = batch_at(t);
        let (loss, grads) = loss_and_gradients(g, &model, x, &batch)?;
        momentum_step(&mut model, &mut velocity, grads, cfg);

        let val_auc = validation_auc(g, &model, x, val)?;
        if let Some(a) = val_auc {
            if best.as_ref().is_none_or(|(b, _, _)| a > *b) {
                best = Some((a, t, model.clone()));
            }
        }
        log.push(EpochRecord {
            t,
            g_t,
            subset_size: batch.len(),
            loss,
            val_auc,
        });
    }

    Ok(match best {
        Some((_, epoch, m)) => TrainOutcome {
            model: m,
            best_epoch: Some(epoch),
            log,
        },
        None => TrainOutcome {
            model,
            best_epoch: None,
            log,
        },
    })
}

fn momentum_step(model: &mut SgnnModel, velocity: &mut Gradients, mut grads: Gradients, cfg: &TrainConfig) {
    let params = model.tensors_mut();
    let vel = velocity.tensors_mut();
    let grad = grads.tensors_mut();
    for (((_, p), (_, v)), (_, g)) in params.into_iter().zip(vel).zip(grad) {
        for ((p, v), g) in p.iter_mut().zip(v.iter_mut()).zip(g.iter()) {
            *v = cfg.momentum * *v - cfg.learning_rate * g;
            *p += *v;
        }
    }
}

fn validation_auc(g: &SignedGraph, model: &SgnnModel, x: &FeatureMatrix, val: &[SignedEdge]) -> Result<Option<f64>> {
    if val.is_empty() {
        return Ok(None);
    }
    let labels: Vec<bool> = val.iter().map(|e| e.sign.is_positive()).collect();
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Ok(None);
    }
    let h = model.forward(g, x)?;
    let scores = model.predict_edges(&h, val)?;
    auc(&labels, &scores).map(Some)
}
