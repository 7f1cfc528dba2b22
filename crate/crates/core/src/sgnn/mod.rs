//! Two-channel signed GNN (positive/negative representations per node) with
//! hand-written backpropagation, and the curriculum and random-order trainers.

mod checkpoint;
mod features;
mod model;
mod train;

pub use checkpoint::{checkpoint_text, load_checkpoint, parse_checkpoint, save_checkpoint};
pub use features::{init_features, FeatureMatrix};
pub use model::{loss_and_gradients, Embeddings, Gradients, SgnnModel, LOGIT_CLIP};
pub use train::{train_csg, train_random, EpochRecord, TrainConfig, TrainOutcome};
