use rayon::prelude::*;

use super::tables::{DecisionRow, RmseRow, ThroughputRow};
use crate::channel::ChannelRealization;
use crate::eesm::EesmPredictor;
use crate::error::{Error, Result};
use crate::link::{estimate_fep_mc, LinkChain};
use crate::metrics::rmse;
use crate::neural::MlpModel;
use crate::oracle::{oracle_fep_all, OracleSpec};
use crate::rng::derive_seed;
use crate::selection::{genie_frame, select_rate};
use crate::types::{ConfigSet, Dataset, SinrVector};

/// Anything mapping a channel state to K frame error probabilities.
pub trait FepPredictor: Sync {
    fn num_configs(&self) -> usize;
    fn input_dim(&self) -> Option<usize>;
    fn predict_all(&self, sinr: &SinrVector) -> Result<Vec<f64>>;
}

impl FepPredictor for EesmPredictor {
    fn num_configs(&self) -> usize {
        EesmPredictor::num_configs(self)
    }
    fn input_dim(&self) -> Option<usize> {
        None
    }
    fn predict_all(&self, sinr: &SinrVector) -> Result<Vec<f64>> {
        Ok(EesmPredictor::predict_all(self, sinr))
    }
}

impl FepPredictor for MlpModel {
    fn num_configs(&self) -> usize {
        self.output_dim()
    }
    fn input_dim(&self) -> Option<usize> {
        Some(MlpModel::input_dim(self))
    }
    fn predict_all(&self, sinr: &SinrVector) -> Result<Vec<f64>> {
        self.predict(sinr)
    }
}

impl FepPredictor for OracleSpec {
    fn num_configs(&self) -> usize {
        OracleSpec::num_configs(self)
    }
    fn input_dim(&self) -> Option<usize> {
        None
    }
    fn predict_all(&self, sinr: &SinrVector) -> Result<Vec<f64>> {
        Ok(oracle_fep_all(self, sinr))
    }
}

/// How the true FEP of a test channel is obtained.
pub enum Reference<'a> {
    Oracle(&'a OracleSpec),
    MonteCarlo {
        chain: &'a LinkChain,
        trials: usize,
        seed: u64,
    },
}

impl Reference<'_> {
    fn fep(&self, cs: &ConfigSet, sinr: &SinrVector, frame_seed: u64) -> Result<Vec<f64>> {
        match self {
            Reference::Oracle(spec) => Ok(oracle_fep_all(spec, sinr)),
            Reference::MonteCarlo {
                chain,
                trials,
                seed,
            } => {
                let ch = ChannelRealization::from_sinrs(sinr);
                let base = derive_seed(*seed, frame_seed);
                cs.iter()
                    .map(|cfg| {
                        Ok(estimate_fep_mc(
                            chain,
                            cfg,
                            &ch,
                            *trials,
                            derive_seed(base, cfg.id as u64),
                        )?
                        .estimate)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluation {
    pub snr_db: f64,
    pub frames: usize,
    pub rmse_eesm: f64,
    pub rmse_nn: f64,
    pub tput_eesm: f64,
    pub tput_nn: f64,
    pub tput_genie: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEvaluation {
    pub points: Vec<PointEvaluation>,
    pub decisions: Vec<DecisionRow>,
}

impl SweepEvaluation {
    pub fn rmse_rows(&self) -> Vec<RmseRow> {
        self.points
            .iter()
            .map(|p| RmseRow {
                snr_db: p.snr_db,
                rmse_eesm: p.rmse_eesm,
                rmse_nn: p.rmse_nn,
                frames: p.frames,
            })
            .collect()
    }

    pub fn throughput_rows(&self) -> Vec<ThroughputRow> {
        self.points
            .iter()
            .map(|p| ThroughputRow {
                snr_db: p.snr_db,
                tput_eesm: p.tput_eesm,
                tput_nn: p.tput_nn,
                tput_genie: p.tput_genie,
            })
            .collect()
    }

    pub fn mean_rmse(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        (
            self.points.iter().map(|p| p.rmse_eesm).sum::<f64>() / n,
            self.points.iter().map(|p| p.rmse_nn).sum::<f64>() / n,
        )
    }
}

struct FrameResult {
    reference: Vec<f64>,
    eesm: Vec<f64>,
    nn: Vec<f64>,
    row: DecisionRow,
}

fn check_predictor(p: &dyn FepPredictor, cs: &ConfigSet) -> Result<()> {
    if p.num_configs() != cs.len() {
        return Err(Error::Dimension {
            expected: cs.len(),
            got: p.num_configs(),
        });
    }
    if let Some(m) = p.input_dim() {
        if m != cs.subcarriers() {
            return Err(Error::Dimension {
                expected: cs.subcarriers(),
                got: m,
            });
        }
    }
    Ok(())
}

/// FEP accuracy and rate-selection throughput of two predictors on the
/// test set of each sweep point. Frame indices in the decision log run
/// across all points.
pub fn evaluate_sweep(
    eesm: &dyn FepPredictor,
    nn: &dyn FepPredictor,
    tests: &[Dataset],
    cs: &ConfigSet,
    reference: &Reference<'_>,
) -> Result<SweepEvaluation> {
    check_predictor(eesm, cs)?;
    check_predictor(nn, cs)?;
    let payloads = cs.payloads();
    let mut points = Vec::with_capacity(tests.len());
    let mut decisions = Vec::new();
    for ds in tests {
        if ds.config_set.subcarriers() != cs.subcarriers() || ds.config_set.len() != cs.len() {
            return Err(Error::Data(
                "test dataset does not match the configuration set".into(),
            ));
        }
        if ds.is_empty() {
            return Err(Error::Data("test dataset is empty".into()));
        }
        let offset = decisions.len();
        let frames = ds
            .records()
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let events: Vec<bool> = r
                    .events
                    .iter()
                    .copied()
                    .collect::<Option<_>>()
                    .ok_or_else(|| {
                        Error::Data(format!(
                            "test frame {i} lacks events for some configurations"
                        ))
                    })?;
                let p_eesm = eesm.predict_all(&r.sinr)?;
                let p_nn = nn.predict_all(&r.sinr)?;
                let k_eesm = select_rate(&p_eesm, &payloads)?;
                let k_nn = select_rate(&p_nn, &payloads)?;
                let (k_genie, tput_genie) = genie_frame(&events, &payloads);
                let tput = |k: usize| {
                    if events[k - 1] {
                        0.0
                    } else {
                        payloads[k - 1] as f64
                    }
                };
                Ok(FrameResult {
                    reference: reference.fep(cs, &r.sinr, r.seed)?,
                    row: DecisionRow {
                        n: offset + i,
                        avg_snr_db: r.avg_snr_db,
                        k_eesm,
                        k_nn,
                        k_genie,
                        tput_eesm: tput(k_eesm),
                        tput_nn: tput(k_nn),
                        tput_genie,
                    },
                    eesm: p_eesm,
                    nn: p_nn,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let flat = |f: fn(&FrameResult) -> &Vec<f64>| {
            frames.iter().flat_map(f).copied().collect::<Vec<f64>>()
        };
        let reference_fep = flat(|f| &f.reference);
        let n = frames.len() as f64;
        let mean = |f: fn(&DecisionRow) -> f64| frames.iter().map(|x| f(&x.row)).sum::<f64>() / n;
        points.push(PointEvaluation {
            snr_db: ds.records()[0].avg_snr_db,
            frames: frames.len(),
            rmse_eesm: rmse(&flat(|f| &f.eesm), &reference_fep)?,
            rmse_nn: rmse(&flat(|f| &f.nn), &reference_fep)?,
            tput_eesm: mean(|r| r.tput_eesm),
            tput_nn: mean(|r| r.tput_nn),
            tput_genie: mean(|r| r.tput_genie),
        });
        decisions.extend(frames.into_iter().map(|f| f.row));
    }
    Ok(SweepEvaluation { points, decisions })
}
