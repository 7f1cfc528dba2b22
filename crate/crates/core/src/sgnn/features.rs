use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random node features for featureless graphs: i.i.d. uniform in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub data: Array2<f64>,
    pub seed: u64,
}

impl FeatureMatrix {
    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }
}

pub fn init_features(n: usize, d: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = Array2::from_shape_simple_fn((n, d), || rng.random_range(-1.0..=1.0));
    FeatureMatrix { data, seed }
}
