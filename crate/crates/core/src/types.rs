//! Domain types shared by every stage: link configurations, per-subcarrier
//! SINR vectors, ACK/NACK observations and datasets.

use crate::error::{Error, Result};
use crate::textfmt::quantize_sig;

/// Lowest dB value reported for a SINR; zero linear SINRs map here.
pub const SINR_DB_FLOOR: f64 = -40.0;

/// Largest mother-code rate supported by the default codec.
pub const MAX_CODE_RATE: f64 = 1.0 / 3.0;

/// One transmission configuration: fixed resources, a code rate and the
/// payload size it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub id: usize,
    pub subcarriers: usize,
    pub frame_symbols: usize,
    pub bits_per_symbol: usize,
    pub code_rate: f64,
    pub payload_bits: usize,
}

impl LinkConfig {
    pub fn new(
        id: usize,
        subcarriers: usize,
        frame_symbols: usize,
        bits_per_symbol: usize,
        code_rate: f64,
    ) -> Result<Self> {
        if subcarriers == 0 || frame_symbols == 0 {
            return Err(Error::InvalidArgument(
                "subcarriers and frame symbols must be positive".into(),
            ));
        }
        if bits_per_symbol != 2 {
            return Err(Error::InvalidArgument(format!(
                "modulation order J = {bits_per_symbol} unsupported, only QPSK (J = 2)"
            )));
        }
        if !(code_rate.is_finite() && code_rate > 0.0 && code_rate <= MAX_CODE_RATE + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "code rate {code_rate} outside (0, 1/3]"
            )));
        }
        let capacity = subcarriers * frame_symbols * bits_per_symbol;
        let payload_bits = (capacity as f64 * code_rate).round() as usize;
        if payload_bits == 0 {
            return Err(Error::InvalidArgument(format!(
                "code rate {code_rate} leaves no payload bits in {capacity} positions"
            )));
        }
        Ok(Self {
            id,
            subcarriers,
            frame_symbols,
            bits_per_symbol,
            code_rate,
            payload_bits,
        })
    }

    /// Number of transmitted bit positions, M·S·J.
    pub fn capacity_bits(&self) -> usize {
        self.subcarriers * self.frame_symbols * self.bits_per_symbol
    }

    pub fn num_symbols(&self) -> usize {
        self.subcarriers * self.frame_symbols
    }
}

/// The K configurations under comparison, ordered by strictly increasing
/// code rate and sharing M, S and J. Config ids run 1..=K.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSet {
    configs: Vec<LinkConfig>,
}

impl ConfigSet {
    pub fn new(
        subcarriers: usize,
        frame_symbols: usize,
        bits_per_symbol: usize,
        rates: &[f64],
    ) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidArgument(
                "config set needs at least one rate".into(),
            ));
        }
        if rates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "code rates must be strictly increasing".into(),
            ));
        }
        let configs = rates
            .iter()
            .enumerate()
            .map(|(i, &r)| LinkConfig::new(i + 1, subcarriers, frame_symbols, bits_per_symbol, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { configs })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn subcarriers(&self) -> usize {
        self.configs[0].subcarriers
    }

    pub fn frame_symbols(&self) -> usize {
        self.configs[0].frame_symbols
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.configs[0].bits_per_symbol
    }

    /// Looks up a configuration by its 1-based id.
    pub fn get(&self, id: usize) -> Option<&LinkConfig> {
        id.checked_sub(1).and_then(|i| self.configs.get(i))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LinkConfig> {
        self.configs.iter()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.configs.iter().map(|c| c.code_rate).collect()
    }

    pub fn payloads(&self) -> Vec<usize> {
        self.configs.iter().map(|c| c.payload_bits).collect()
    }
}

/// Per-subcarrier SINRs in linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrVector {
    values: Vec<f64>,
}

impl SinrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty SINR vector".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "SINR entries must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_db(values_db: &[f64]) -> Result<Self> {
        Self::new(values_db.iter().map(|d| db_to_linear(*d)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn linear(&self) -> &[f64] {
        &self.values
    }

    /// dB view, with zero entries clamped to [`SINR_DB_FLOOR`].
    pub fn to_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| linear_to_db(*v)).collect()
    }

    pub fn sorted(&self) -> SinrVector {
        let mut values = self.values.clone();
        values.sort_by(f64::total_cmp);
        SinrVector { values }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Snaps every entry to the value its 6-significant-digit dB text
    /// decodes to, which makes the vector a fixed point of the dataset
    /// file format.
    pub fn quantized(&self) -> SinrVector {
        let values = self
            .values
            .iter()
            .map(|v| db_to_linear(quantize_sig(linear_to_db(*v), 6)))
            .collect();
        SinrVector { values }
    }
}

pub fn linear_to_db(v: f64) -> f64 {
    if v > 0.0 {
        (10.0 * v.log10()).max(SINR_DB_FLOOR)
    } else {
        SINR_DB_FLOOR
    }
}

pub fn db_to_linear(d: f64) -> f64 {
    10f64.powf(d / 10.0)
}

/// Ascending sort of the per-subcarrier SINRs.
pub fn sort_sinrs(sinr: &SinrVector) -> SinrVector {
    sinr.sorted()
}

/// One frame: the channel state and the error events observed for some or
/// all configurations (`Some(true)` = NACK, `Some(false)` = ACK, `None` =
/// not observed).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservation {
    pub sinr: SinrVector,
    pub events: Vec<Option<bool>>,
    pub seed: u64,
    pub avg_snr_db: f64,
}

impl FrameObservation {
    pub fn new(
        sinr: SinrVector,
        events: Vec<Option<bool>>,
        seed: u64,
        avg_snr_db: f64,
    ) -> Result<Self> {
        if events.iter().all(Option::is_none) {
            return Err(Error::InvalidArgument(
                "observation must carry at least one event".into(),
            ));
        }
        Ok(Self {
            sinr,
            events,
            seed,
            avg_snr_db,
        })
    }

    /// Event for 1-based config id `k`.
    pub fn event(&self, k: usize) -> Option<bool> {
        k.checked_sub(1)
            .and_then(|i| self.events.get(i))
            .copied()
            .flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config_set: ConfigSet,
    records: Vec<FrameObservation>,
}

impl Dataset {
    pub fn new(config_set: ConfigSet, records: Vec<FrameObservation>) -> Result<Self> {
        let m = config_set.subcarriers();
        let k = config_set.len();
        for r in &records {
            if r.sinr.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: r.sinr.len(),
                });
            }
            if r.events.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    got: r.events.len(),
                });
            }
        }
        Ok(Self {
            config_set,
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[FrameObservation] {
        &self.records
    }

    pub fn into_records(self) -> Vec<FrameObservation> {
        self.records
    }

    /// `(sinr, event)` pairs of the records that observed config `k`.
    pub fn observations_for(&self, k: usize) -> impl Iterator<Item = (&SinrVector, bool)> {
        self.records
            .iter()
            .filter_map(move |r| r.event(k).map(|e| (&r.sinr, e)))
    }
}
