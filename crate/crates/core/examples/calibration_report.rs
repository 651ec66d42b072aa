//! Reliability table and expected calibration error of a model on a dataset.
//!
//! cargo run --release --example calibration_report -- model.txt data.csv
//!
//! Without arguments, a network is trained on a synthetic task whose labels
//! are drawn from known probabilities, so a calibrated model is expected.

use lanefree::nn::{
    reliability_report, train, DatasetRow, MlpModel, TrainConfig, FEATURE_LEN,
};
use lanefree::traffic::ActionIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(n: usize, seed: u64) -> Vec<DatasetRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let cluster = rng.random_range(0..4usize);
            let mut features = [0.0; FEATURE_LEN];
            features[cluster] = 1.0;
            for f in features.iter_mut().skip(4).take(4) {
                *f = rng.random_range(-0.1..0.1);
            }
            let keep = [0.9, 0.75, 0.6, 0.45][cluster];
            let label = if rng.random::<f64>() < keep {
                cluster
            } else {
                4 + rng.random_range(0..11usize)
            };
            DatasetRow {
                features,
                label: ActionIndex::new(label).expect("label in range"),
            }
        })
        .collect()
}

fn main() -> lanefree::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (model, rows) = if let [model, data] = args.as_slice() {
        (
            MlpModel::load(model.as_ref())?,
            lanefree::nn::load_dataset(data.as_ref())?,
        )
    } else {
        let cfg = TrainConfig {
            hidden_layers: vec![32, 32],
            epochs: 10,
            dropout: 0.0,
            ..TrainConfig::default()
        };
        let model = train(&synthetic(5000, 1), &cfg)?.model;
        (model, synthetic(5000, 2))
    };
    let report = reliability_report(&model, &rows)?;
    print!("{}", report.to_table());
    Ok(())
}
