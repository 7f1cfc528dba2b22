//! Multi-seed runs comparing curriculum training against random-order
//! training on the same splits, features and initial parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::{auc, f1_binary, mean_std, threshold};
use super::split::{easy_hard_split, split_edges, SplitSpec};
use crate::census::{difficulty_scores, score_map};
use crate::curriculum::{build_schedule, PacingParams};
use crate::error::{Error, Result};
use crate::graph::{SignedEdge, SignedGraph};
use crate::sgnn::{checkpoint_text, init_features, train_csg, train_random, EpochRecord, SgnnModel, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Where the graph came from; recorded in the snapshot only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub pacing: PacingParams,
    #[serde(default)]
    pub model: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: None,
            seeds: (0..5).collect(),
            split: SplitSpec::default(),
            pacing: PacingParams::default(),
            model: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::InvalidParam(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the TOML snapshot.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(hash)[..16].to_string()
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidParam("at least one seed is required".into()));
        }
        self.split.validate()?;
        self.pacing.validate()?;
        self.model.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Csg,
    Random,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Csg => "csg",
            Method::Random => "random",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub seed: u64,
    pub method: Method,
    pub auc: f64,
    pub f1_binary: f64,
    /// `None` when the subset lacks one of the two classes.
    pub auc_easy: Option<f64>,
    pub auc_hard: Option<f64>,
    pub n_easy: usize,
    pub n_hard: usize,
    pub best_epoch: Option<usize>,
    pub config_digest: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochLogLine {
    pub seed: u64,
    pub method: Method,
    #[serde(flatten)]
    pub record: EpochRecord,
}

pub struct SeedRun {
    pub seed: u64,
    pub records: [MetricsRecord; 2],
    pub logs: Vec<EpochLogLine>,
    pub csg_model: SgnnModel,
    pub schedule_dump: String,
}

pub struct RunOutput {
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
}

impl RunOutput {
    pub fn records(&self) -> Vec<MetricsRecord> {
        self.runs.iter().flat_map(|r| r.records.iter().cloned()).collect()
    }

    pub fn summary(&self) -> Summary {
        Summary::from_records(&self.records())
    }

    /// Writes `config.snapshot`, `schedule.csv`, `epochs.log`,
    /// `metrics.jsonl`, `summary.txt` and `model.ckpt` (the curriculum model
    /// of the first seed).
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: &str| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        write("config.snapshot", &self.config.to_toml())?;
        write("schedule.csv", &self.runs[0].schedule_dump)?;
        let mut epochs = String::new();
        for line in self.runs.iter().flat_map(|r| &r.logs) {
            epochs.push_str(&serde_json::to_string(line).expect("log serializes"));
            epochs.push('\n');
        }
        write("epochs.log", &epochs)?;
        write("metrics.jsonl", &metrics_jsonl(&self.records()))?;
        write("summary.txt", &self.summary().to_text())?;
        write("model.ckpt", &checkpoint_text(&self.runs[0].csg_model))
    }
}

pub fn metrics_jsonl(records: &[MetricsRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

pub fn parse_metrics_jsonl(text: &str) -> Result<Vec<MetricsRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

/// Per-metric mean and sample standard deviation, keyed `<method>_<metric>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: BTreeMap<String, (f64, f64, usize)>,
}

impl Summary {
    pub fn from_records(records: &[MetricsRecord]) -> Summary {
        let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in records {
            let m = r.method.name();
            let mut push = |k: &str, v: Option<f64>| {
                if let Some(v) = v {
                    columns.entry(format!("{m}_{k}")).or_default().push(v);
                }
            };
            push("auc", Some(r.auc));
            push("f1", Some(r.f1_binary));
            push("auc_easy", r.auc_easy);
            push("auc_hard", r.auc_hard);
        }
        Summary {
            rows: columns
                .into_iter()
                .map(|(k, v)| {
                    let (mean, std) = mean_std(&v).expect("non-empty column");
                    (k, (mean, std, v.len()))
                })
                .collect(),
        }
    }

    pub fn mean(&self, key: &str) -> Option<f64> {
        self.rows.get(key).map(|r| r.0)
    }

    pub fn std(&self, key: &str) -> Option<f64> {
        self.rows.get(key).map(|r| r.1)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("metric,mean,std,n\n");
        for (k, (mean, std, n)) in &self.rows {
            let _ = writeln!(s, "{k},{mean:.6},{std:.6},{n}");
        }
        s
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9)) ^ stream
}

fn subset_auc(labels_scores: &[(bool, f64)]) -> Option<f64> {
    let labels: Vec<bool> = labels_scores.iter().map(|p| p.0).collect();
    let scores: Vec<f64> = labels_scores.iter().map(|p| p.1).collect();
    auc(&labels, &scores).ok()
}

/// One seed: split, score the training graph, schedule, train both ways
/// from identical features and initial parameters, evaluate on test.
pub fn run_seed(g: &SignedGraph, cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let ctx = |e: Error| Error::InvalidParam(format!("seed {seed}: {e}"));
    let split = split_edges(g, &cfg.split, derive_seed(seed, 1)).map_err(ctx)?;
    if split.test.is_empty() {
        return Err(ctx(Error::EmptySplit("test")));
    }
    let train_graph = g.subgraph(&split.train)?;

    let train_scores = score_map(&difficulty_scores(&train_graph));
    let schedule = build_schedule(&split.train, &train_scores, cfg.pacing)?;
    let full_scores = score_map(&difficulty_scores(g));
    let (easy, hard) = easy_hard_split(&split.test, &full_scores)?;

    let m = &cfg.model;
    let x = init_features(g.node_count(), m.feature_dim, derive_seed(seed, 2));
    let init = SgnnModel::new(m.feature_dim, m.hidden_dim, m.layers, derive_seed(seed, 3))?;

    let csg = train_csg(&train_graph, &schedule, &split.val, &x, init.clone(), m).map_err(ctx)?;
    let rnd = train_random(&train_graph, &split.train, &split.val, &x, init, m, derive_seed(seed, 4), true).map_err(ctx)?;

    let digest = cfg.digest();
    let evaluate = |method: Method, model: &SgnnModel, best_epoch: Option<usize>| -> Result<MetricsRecord> {
        let h = model.forward(&train_graph, &x)?;
        let probs = model.predict_edges(&h, &split.test)?;
        let labels: Vec<bool> = split.test.iter().map(|e| e.sign.is_positive()).collect();
        let part = |subset: &[SignedEdge]| -> Result<Option<f64>> {
            let probs = model.predict_edges(&h, subset)?;
            let pairs: Vec<(bool, f64)> = subset.iter().map(|e| e.sign.is_positive()).zip(probs).collect();
            Ok(subset_auc(&pairs))
        };
        Ok(MetricsRecord {
            seed,
            method,
            auc: auc(&labels, &probs).map_err(ctx)?,
            f1_binary: f1_binary(&labels, &threshold(&probs)).map_err(ctx)?,
            auc_easy: part(&easy)?,
            auc_hard: part(&hard)?,
            n_easy: easy.len(),
            n_hard: hard.len(),
            best_epoch,
            config_digest: digest.clone(),
        })
    };

    let records = [
        evaluate(Method::Csg, &csg.model, csg.best_epoch)?,
        evaluate(Method::Random, &rnd.model, rnd.best_epoch)?,
    ];
    let logs = [(Method::Csg, csg.log), (Method::Random, rnd.log)]
        .into_iter()
        .flat_map(|(method, log)| log.into_iter().map(move |record| EpochLogLine { seed, method, record }))
        .collect();
    Ok(SeedRun {
        seed,
        records,
        logs,
        csg_model: csg.model,
        schedule_dump: schedule.dump(m.epochs),
    })
}

/// Runs every seed (in parallel) and returns results in seed-list order.
pub fn run_experiment(g: &SignedGraph, cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&s| run_seed(g, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        config: cfg.clone(),
        runs,
    })
}
