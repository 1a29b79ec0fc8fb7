use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::MlpModel;
use crate::error::{Error, Result};
use crate::rng::{derive_named, derive_seed, rng_from_seed};
use crate::types::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub step_size: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            step_size: 1e-3,
            max_epochs: 200,
            patience: 5,
            validation_fraction: 0.1,
            seed: 0,
            optimizer: Optimizer::Adam,
            beta1: 0.9,
            beta2: 0.999,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(
                "validation_fraction must lie in (0, 1)".into(),
            ));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Config("step_size must be positive".into()));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::Config("moment decays must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_ce: f64,
    pub validation_ce: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_validation_ce: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

const ADAM_EPS: f64 = 1e-8;

/// Rows per parallel chunk when scoring the validation split; partial sums
/// are reduced in chunk order.
const EVAL_CHUNK: usize = 256;

/// Mini-batch training with early stopping on validation cross-entropy.
/// Returns the parameters of the best validation epoch.
pub fn train(
    model: &MlpModel,
    dataset: &Dataset,
    tc: &TrainConfig,
) -> Result<(MlpModel, TrainLog)> {
    tc.validate()?;
    let m = dataset.config_set.subcarriers();
    if m != model.input_dim() {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: m,
        });
    }
    if dataset.config_set.len() != model.output_dim() {
        return Err(Error::Dimension {
            expected: model.output_dim(),
            got: dataset.config_set.len(),
        });
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Data(format!(
            "need at least 2 frames to train, got {n}"
        )));
    }

    let feats: Vec<Vec<f64>> = dataset
        .records()
        .par_iter()
        .map(|r| model.features(&r.sinr))
        .collect::<Result<_>>()?;
    let events: Vec<&[Option<bool>]> = dataset
        .records()
        .iter()
        .map(|r| r.events.as_slice())
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(derive_named(tc.seed, "split")));
    let n_val = ((n as f64 * tc.validation_fraction).round() as usize).clamp(1, n - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let val: Vec<(&[f64], &[Option<bool>])> = val_idx
        .iter()
        .map(|&i| (feats[i].as_slice(), events[i]))
        .collect();
    let mut train_idx = train_idx.to_vec();

    let mut current = model.clone();
    let mut best = model.clone();
    let mut best_ce = validation_loss(&current, &val);
    let mut best_epoch = 0;
    let mut log = Vec::new();
    let mut adam = Adam {
        m: vec![0.0; current.params().len()],
        v: vec![0.0; current.params().len()],
        t: 0,
    };
    let shuffle_seed = derive_named(tc.seed, "shuffle");

    for epoch in 1..=tc.max_epochs {
        train_idx.shuffle(&mut rng_from_seed(derive_seed(shuffle_seed, epoch as u64)));
        let mut weighted = 0.0;
        for batch in train_idx.chunks(tc.batch_size) {
            let samples: Vec<(&[f64], &[Option<bool>])> = batch
                .iter()
                .map(|&i| (feats[i].as_slice(), events[i]))
                .collect();
            let (loss, grad) = current.batch_loss_grad(&samples);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numeric(format!(
                    "training diverged at epoch {epoch}"
                )));
            }
            weighted += loss * batch.len() as f64;
            step(&mut current, &grad, &mut adam, tc);
            if current.params().iter().any(|p| !p.is_finite()) {
                return Err(Error::Numeric(format!(
                    "parameters became non-finite at epoch {epoch}"
                )));
            }
        }
        let train_ce = weighted / train_idx.len() as f64;
        let validation_ce = validation_loss(&current, &val);
        if !validation_ce.is_finite() {
            return Err(Error::Numeric(format!(
                "validation loss diverged at epoch {epoch}"
            )));
        }
        log.push(EpochLog {
            epoch,
            train_ce,
            validation_ce,
        });
        if validation_ce < best_ce {
            best_ce = validation_ce;
            best_epoch = epoch;
            best = current.clone();
        } else if epoch - best_epoch >= tc.patience {
            break;
        }
    }

    Ok((
        best,
        TrainLog {
            epochs: log,
            best_epoch,
            best_validation_ce: best_ce,
        },
    ))
}

fn validation_loss(model: &MlpModel, val: &[(&[f64], &[Option<bool>])]) -> f64 {
    let partial: Vec<f64> = val
        .par_chunks(EVAL_CHUNK)
        .map(|c| model.batch_loss(c) * c.len() as f64)
        .collect();
    partial.iter().sum::<f64>() / val.len() as f64
}

fn step(model: &mut MlpModel, grad: &[f64], adam: &mut Adam, tc: &TrainConfig) {
    let params = model.params_mut();
    match tc.optimizer {
        Optimizer::Sgd => {
            for (p, g) in params.iter_mut().zip(grad) {
                *p -= tc.step_size * g;
            }
        }
        Optimizer::Adam => {
            adam.t += 1;
            let c1 = 1.0 - tc.beta1.powi(adam.t);
            let c2 = 1.0 - tc.beta2.powi(adam.t);
            for (((p, g), m), v) in params
                .iter_mut()
                .zip(grad)
                .zip(&mut adam.m)
                .zip(&mut adam.v)
            {
                *m = tc.beta1 * *m + (1.0 - tc.beta1) * g;
                *v = tc.beta2 * *v + (1.0 - tc.beta2) * g * g;
                let mh = *m / c1;
                let vh = *v / c2;
                *p -= tc.step_size * mh / (vh.sqrt() + ADAM_EPS);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{Activation, InputNormalizer};
    use crate::types::{ConfigSet, FrameObservation, SinrVector};
    use rand::Rng;

    fn constant_label_dataset(n: usize) -> Dataset {
        let cs = ConfigSet::new(8, 4, 2, &[0.1, 0.2]).unwrap();
        let mut rng = rng_from_seed(3);
        let recs = (0..n)
            .map(|i| {
                let s = SinrVector::new(
                    (0..8)
                        .map(|_| 10f64.powf(rng.random_range(-1.0..2.0)))
                        .collect(),
                )
                .unwrap();
                FrameObservation::new(s, vec![Some(false); 2], i as u64, 0.0).unwrap()
            })
            .collect();
        Dataset::new(cs, recs).unwrap()
    }

    fn small_model(seed: u64) -> MlpModel {
        MlpModel::new_random(
            &[8, 6, 2],
            Activation::Relu,
            InputNormalizer::default(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_for_a_seed() {
        let ds = constant_label_dataset(200);
        let tc = TrainConfig {
            max_epochs: 5,
            seed: 4,
            ..TrainConfig::default()
        };
        let (a, la) = train(&small_model(1), &ds, &tc).unwrap();
        let (b, lb) = train(&small_model(1), &ds, &tc).unwrap();
        assert_eq!(a.params(), b.params());
        assert_eq!(la, lb);
    }

    #[test]
    fn constant_labels_drive_predictions_down() {
        let ds = constant_label_dataset(400);
        let tc = TrainConfig {
            max_epochs: 300,
            step_size: 1e-2,
            patience: 10,
            seed: 1,
            ..TrainConfig::default()
        };
        let (m, log) = train(&small_model(2), &ds, &tc).unwrap();
        for r in ds.records() {
            assert!(m.predict(&r.sinr).unwrap().iter().all(|p| *p < 0.05));
        }
        let best = log
            .epochs
            .iter()
            .find(|e| e.epoch == log.best_epoch)
            .unwrap();
        assert!(log
            .epochs
            .iter()
            .take(log.best_epoch)
            .all(|e| e.validation_ce >= best.validation_ce));
    }

    #[test]
    fn rejects_bad_inputs() {
        let ds = constant_label_dataset(10);
        let wrong = MlpModel::zeros(&[7, 2], Activation::Relu, InputNormalizer::default()).unwrap();
        assert!(train(&wrong, &ds, &TrainConfig::default()).is_err());
        let tc = TrainConfig {
            validation_fraction: 1.0,
            ..TrainConfig::default()
        };
        assert!(train(&small_model(0), &ds, &tc).is_err());
        let tiny = constant_label_dataset(1);
        assert!(train(&small_model(0), &tiny, &TrainConfig::default()).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let ds = constant_label_dataset(50);
        let mut m = small_model(0);
        m.params_mut().iter_mut().for_each(|p| *p = f64::MAX);
        let tc = TrainConfig {
            optimizer: Optimizer::Sgd,
            max_epochs: 3,
            ..TrainConfig::default()
        };
        match train(&m, &ds, &tc) {
            Err(Error::Numeric(msg)) => assert!(msg.contains("epoch"), "{msg}"),
            other => panic!("expected divergence, got {:?}", other.map(|(_, l)| l)),
        }
    }
}
