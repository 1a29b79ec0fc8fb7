//! Synthetic event sources with known FEP.
//!
//! `InFamily` oracles are exactly an EESM followed by a logistic waterfall,
//! so EESM calibration can recover them. `OutFamily` oracles depend on the
//! dB spread of the SINRs in a way no single effective-SINR scalar can
//! represent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eesm::eesm_compress;
use crate::error::{Error, Result};
use crate::metrics::{bernoulli_cross_entropy, bernoulli_kl, binary_entropy};
use crate::rng::{derive_seed, rng_from_seed};
use crate::types::{linear_to_db, FrameObservation, SinrVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InFamilyParams {
    pub beta: f64,
    pub slope: f64,
    pub midpoint_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutFamilyParams {
    pub w_min: f64,
    pub w_mean: f64,
    pub w_spread: f64,
    pub slope: f64,
    pub midpoint_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "configs", rename_all = "snake_case")]
pub enum OracleSpec {
    InFamily(Vec<InFamilyParams>),
    OutFamily(Vec<OutFamilyParams>),
}

pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_SLOPE_PER_DB: f64 = 1.2;
pub const DEFAULT_MIDPOINT_STEP_DB: f64 = 0.8;
pub const DEFAULT_FIRST_MIDPOINT_DB: f64 = 0.0;

fn midpoint(k_index: usize) -> f64 {
    DEFAULT_FIRST_MIDPOINT_DB + DEFAULT_MIDPOINT_STEP_DB * k_index as f64
}

impl OracleSpec {
    pub fn default_in_family(num_configs: usize) -> Self {
        OracleSpec::InFamily(
            (0..num_configs)
                .map(|i| InFamilyParams {
                    beta: DEFAULT_BETA,
                    slope: DEFAULT_SLOPE_PER_DB,
                    midpoint_db: midpoint(i),
                })
                .collect(),
        )
    }

    pub fn default_out_family(num_configs: usize) -> Self {
        OracleSpec::OutFamily(
            (0..num_configs)
                .map(|i| OutFamilyParams {
                    w_min: 0.3,
                    w_mean: 0.7,
                    w_spread: 1.0,
                    slope: DEFAULT_SLOPE_PER_DB,
                    midpoint_db: midpoint(i),
                })
                .collect(),
        )
    }

    pub fn num_configs(&self) -> usize {
        match self {
            OracleSpec::InFamily(p) => p.len(),
            OracleSpec::OutFamily(p) => p.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            OracleSpec::InFamily(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if !(p.beta > 0.0 && p.slope > 0.0 && p.midpoint_db.is_finite()) {
                        return bad(format!("oracle config {}: need β > 0 and slope > 0", i + 1));
                    }
                }
            }
            OracleSpec::OutFamily(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    let finite = [p.w_min, p.w_mean, p.w_spread, p.midpoint_db]
                        .iter()
                        .all(|v| v.is_finite());
                    if !(p.slope > 0.0 && finite) {
                        return bad(format!(
                            "oracle config {}: need slope > 0 and finite weights",
                            i + 1
                        ));
                    }
                }
            }
        }
        if self.num_configs() == 0 {
            return bad("oracle lists no configurations".into());
        }
        Ok(())
    }

    /// FEP on a flat channel at linear SNR `snr`.
    pub fn flat_fep(&self, k: usize, snr: f64) -> f64 {
        oracle_fep(
            self,
            k,
            &SinrVector::new(vec![snr]).expect("valid flat SINR"),
        )
    }
}

fn logistic_tail(slope: f64, score_db: f64, midpoint_db: f64) -> f64 {
    1.0 / (1.0 + (slope * (score_db - midpoint_db)).exp())
}

/// Summary statistics of the dB SINRs: (min, mean, population std-dev).
pub fn db_features(sinr: &SinrVector) -> (f64, f64, f64) {
    let db = sinr.to_db();
    let n = db.len() as f64;
    let min = db.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = db.iter().sum::<f64>() / n;
    let var = db.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    (min, mean, var.sqrt())
}

/// True FEP of configuration `k` (1-based) at channel state `sinr`.
pub fn oracle_fep(spec: &OracleSpec, k: usize, sinr: &SinrVector) -> f64 {
    match spec {
        OracleSpec::InFamily(ps) => {
            let p = &ps[k - 1];
            let g = eesm_compress(sinr, p.beta);
            logistic_tail(p.slope, linear_to_db(g), p.midpoint_db)
        }
        OracleSpec::OutFamily(ps) => {
            let p = &ps[k - 1];
            let (min, mean, spread) = db_features(sinr);
            let score = p.w_min * min + p.w_mean * mean - p.w_spread * spread;
            logistic_tail(p.slope, score, p.midpoint_db)
        }
    }
}

pub fn oracle_fep_all(spec: &OracleSpec, sinr: &SinrVector) -> Vec<f64> {
    (1..=spec.num_configs())
        .map(|k| oracle_fep(spec, k, sinr))
        .collect()
}

/// Draws one error event per configuration, independently.
pub fn sample_events(spec: &OracleSpec, sinr: &SinrVector, seed: u64) -> Vec<bool> {
    let mut rng = rng_from_seed(seed);
    (1..=spec.num_configs())
        .map(|k| {
            let u: f64 = rng.random();
            u < oracle_fep(spec, k, sinr)
        })
        .collect()
}

pub fn sample_observation(
    spec: &OracleSpec,
    sinr: &SinrVector,
    seed: u64,
    avg_snr_db: f64,
) -> Result<FrameObservation> {
    let events = sample_events(spec, sinr, derive_seed(seed, 0))
        .into_iter()
        .map(Some)
        .collect();
    FrameObservation::new(sinr.clone(), events, seed, avg_snr_db)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlReport {
    pub per_config: Vec<f64>,
    pub average: f64,
}

fn per_config_mean(
    spec: &OracleSpec,
    predictor: &dyn Fn(&SinrVector) -> Vec<f64>,
    channels: &[SinrVector],
    term: impl Fn(f64, f64) -> f64,
) -> Result<KlReport> {
    if channels.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let k = spec.num_configs();
    let mut sums = vec![0.0; k];
    for g in channels {
        let pred = predictor(g);
        if pred.len() != k {
            return Err(Error::Dimension {
                expected: k,
                got: pred.len(),
            });
        }
        for (i, s) in sums.iter_mut().enumerate() {
            *s += term(oracle_fep(spec, i + 1, g), pred[i]);
        }
    }
    let per_config: Vec<f64> = sums.iter().map(|s| s / channels.len() as f64).collect();
    let average = per_config.iter().sum::<f64>() / k as f64;
    Ok(KlReport {
        per_config,
        average,
    })
}

/// Mean KL(true ‖ predicted) over the test channel states, per config and
/// averaged over configs.
pub fn kl_to_oracle(
    predictor: &dyn Fn(&SinrVector) -> Vec<f64>,
    spec: &OracleSpec,
    channels: &[SinrVector],
) -> Result<KlReport> {
    per_config_mean(spec, predictor, channels, bernoulli_kl)
}

/// Expected cross-entropy of the predictor under the oracle's event law.
pub fn expected_cross_entropy(
    predictor: &dyn Fn(&SinrVector) -> Vec<f64>,
    spec: &OracleSpec,
    channels: &[SinrVector],
) -> Result<KlReport> {
    per_config_mean(spec, predictor, channels, bernoulli_cross_entropy)
}

/// Mean binary entropy of the true FEP over the observed events of the
/// records — the cross-entropy floor no predictor can beat in expectation.
pub fn oracle_entropy(spec: &OracleSpec, records: &[FrameObservation]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for r in records {
        let observed: Vec<usize> = (1..=spec.num_configs())
            .filter(|k| r.event(*k).is_some())
            .collect();
        if observed.is_empty() {
            continue;
        }
        let h: f64 = observed
            .iter()
            .map(|k| binary_entropy(oracle_fep(spec, *k, &r.sinr)))
            .sum();
        total += h / observed.len() as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("no observed events".into()));
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eesm::compress_with;
    use crate::eesm::EesmSign;
    use crate::types::db_to_linear;
    use approx::assert_abs_diff_eq;

    fn sv(v: &[f64]) -> SinrVector {
        SinrVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn in_family_midpoint_and_tail() {
        let spec = OracleSpec::default_in_family(3);
        let c2 = DEFAULT_FIRST_MIDPOINT_DB + DEFAULT_MIDPOINT_STEP_DB;
        assert_abs_diff_eq!(
            oracle_fep(&spec, 2, &sv(&[db_to_linear(c2); 5])),
            0.5,
            epsilon = 1e-12
        );
        assert!(oracle_fep(&spec, 1, &sv(&[1e9; 5])) < 1e-12);
        assert!(oracle_fep(&spec, 1, &sv(&[1e-6; 5])) > 1.0 - 1e-12);
    }

    #[test]
    fn out_family_sees_spread_that_eesm_cannot() {
        let spec = OracleSpec::default_out_family(1);
        // Equal min and mean (in dB) but different spread.
        let a = sv(&[
            db_to_linear(0.0),
            db_to_linear(0.0),
            db_to_linear(8.0),
            db_to_linear(8.0),
        ]);
        let b = sv(&[
            db_to_linear(0.0),
            db_to_linear(16.0 / 3.0),
            db_to_linear(16.0 / 3.0),
            db_to_linear(16.0 / 3.0),
        ]);
        let (fa, fb) = (db_features(&a), db_features(&b));
        assert_abs_diff_eq!(fa.0, fb.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fa.1, fb.1, epsilon = 1e-12);
        assert!(fa.2 > fb.2 + 1.0);
        let (pa, pb) = (oracle_fep(&spec, 1, &a), oracle_fep(&spec, 1, &b));
        assert!((pa - pb).abs() > 0.05, "{pa} vs {pb}");

        // For a fixed β, build a channel with the same EESM as `a` but a
        // different out-of-family FEP: any predictor of the form curve(g_β)
        // must map both to the same value.
        let beta = 2.0;
        let ga = compress_with(&a, beta, EesmSign::Standard);
        let flat = sv(&[ga; 4]);
        assert_abs_diff_eq!(
            compress_with(&flat, beta, EesmSign::Standard),
            ga,
            epsilon = 1e-12
        );
        let pf = oracle_fep(&spec, 1, &flat);
        assert!((pa - pf).abs() > 0.05, "{pa} vs {pf}");
    }

    #[test]
    fn degenerate_probabilities() {
        let spec = OracleSpec::InFamily(vec![
            InFamilyParams {
                beta: 1.0,
                slope: 50.0,
                midpoint_db: -100.0,
            },
            InFamilyParams {
                beta: 1.0,
                slope: 50.0,
                midpoint_db: 100.0,
            },
        ]);
        let g = sv(&[1.0; 4]);
        assert_eq!(oracle_fep(&spec, 1, &g), 0.0);
        assert_eq!(oracle_fep(&spec, 2, &g), 1.0);
        for seed in 0..200 {
            let o = sample_observation(&spec, &g, seed, 0.0).unwrap();
            assert_eq!(o.events, vec![Some(false), Some(true)]);
        }
    }

    #[test]
    fn sampling_matches_probability() {
        // Midpoint chosen so a flat 0 dB channel has FEP 0.3.
        let mid = (0.3f64 / 0.7).ln();
        let spec = OracleSpec::InFamily(vec![InFamilyParams {
            beta: 1.0,
            slope: 1.0,
            midpoint_db: mid,
        }]);
        let g = sv(&[1.0; 3]);
        assert_abs_diff_eq!(oracle_fep(&spec, 1, &g), 0.3, epsilon = 1e-12);
        let n = 10_000;
        let hits = (0..n)
            .filter(|s| sample_events(&spec, &g, *s as u64)[0])
            .count();
        let mean = hits as f64 / n as f64;
        assert!(
            (mean - 0.3).abs() <= 3.0 * (0.3f64 * 0.7 / n as f64).sqrt(),
            "{mean}"
        );
        assert_eq!(
            sample_observation(&spec, &g, 5, 1.0).unwrap(),
            sample_observation(&spec, &g, 5, 1.0).unwrap()
        );
    }

    #[test]
    fn kl_examples() {
        let spec = OracleSpec::default_in_family(2);
        let chans: Vec<SinrVector> = (0..25)
            .map(|i| sv(&[0.2 + i as f64 * 0.3, 1.0 + i as f64]))
            .collect();
        let exact = |g: &SinrVector| oracle_fep_all(&spec, g);
        assert_eq!(kl_to_oracle(&exact, &spec, &chans).unwrap().average, 0.0);

        let mid = OracleSpec::InFamily(vec![InFamilyParams {
            beta: 1.0,
            slope: 1.0,
            midpoint_db: 0.0,
        }]);
        let half = |_: &SinrVector| vec![0.5];
        assert_abs_diff_eq!(
            kl_to_oracle(&half, &mid, &[sv(&[1.0])]).unwrap().average,
            0.0,
            epsilon = 1e-15
        );

        let nine = OracleSpec::InFamily(vec![InFamilyParams {
            beta: 1.0,
            slope: 1.0,
            midpoint_db: (0.9f64 / 0.1).ln(),
        }]);
        let kl = kl_to_oracle(&half, &nine, &[sv(&[1.0])]).unwrap().average;
        assert_abs_diff_eq!(kl, 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(kl, 0.368064, epsilon = 1e-6);
        assert!(kl_to_oracle(&half, &nine, &[]).is_err());
    }

    #[test]
    fn cross_entropy_is_entropy_plus_kl() {
        let spec = OracleSpec::default_out_family(3);
        let chans: Vec<SinrVector> = (0..40)
            .map(|i| sv(&[0.1 + i as f64 * 0.2, 3.0, 0.5 + (i % 7) as f64]))
            .collect();
        let crude = |g: &SinrVector| vec![0.3, (g.mean() / 10.0).min(0.9), 0.05];
        let ce = expected_cross_entropy(&crude, &spec, &chans).unwrap();
        let kl = kl_to_oracle(&crude, &spec, &chans).unwrap();
        let recs: Vec<FrameObservation> = chans
            .iter()
            .map(|g| FrameObservation::new(g.clone(), vec![Some(false); 3], 0, 0.0).unwrap())
            .collect();
        let h = oracle_entropy(&spec, &recs).unwrap();
        assert!((ce.average - (h + kl.average)).abs() < 1e-9);
        assert!(ce.average >= h - 1e-6);
    }

    #[test]
    fn spec_validation() {
        assert!(OracleSpec::default_in_family(2).validate().is_ok());
        let bad = OracleSpec::InFamily(vec![InFamilyParams {
            beta: -1.0,
            slope: 1.0,
            midpoint_db: 0.0,
        }]);
        assert!(bad.validate().is_err());
        assert!(OracleSpec::OutFamily(vec![]).validate().is_err());
    }
}
