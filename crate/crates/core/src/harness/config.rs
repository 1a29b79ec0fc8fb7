use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::awgn_ref::snr_grid;
use crate::channel::TapProfile;
use crate::eesm::{BetaSearch, EesmSign};
use crate::error::{Error, Result};
use crate::link::{LinkChain, CODEC_CONV_K7_R13};
use crate::neural::{TrainConfig, DEFAULT_HIDDEN};
use crate::oracle::OracleSpec;
use crate::rng::derive_named;
use crate::types::ConfigSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Link,
    Oracle,
}

impl FromStr for Source {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "link" => Ok(Source::Link),
            "oracle" => Ok(Source::Oracle),
            other => Err(Error::Config(format!(
                "unknown source `{other}` (link|oracle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleFamily {
    InFamily,
    OutFamily,
}

/// Either a full oracle specification or a family name that expands to the
/// default parameters for the configured K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleSetting {
    Full(OracleSpec),
    Preset(OraclePreset),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OraclePreset {
    pub family: OracleFamily,
}

impl OracleSetting {
    pub fn resolve(&self, num_configs: usize) -> OracleSpec {
        match self {
            OracleSetting::Full(spec) => spec.clone(),
            OracleSetting::Preset(OraclePreset {
                family: OracleFamily::InFamily,
            }) => OracleSpec::default_in_family(num_configs),
            OracleSetting::Preset(OraclePreset {
                family: OracleFamily::OutFamily,
            }) => OracleSpec::default_out_family(num_configs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub profile: TapProfile,
    pub subcarrier_spacing_hz: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            profile: TapProfile::epa(),
            subcarrier_spacing_hz: 140_625.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub subcarriers: usize,
    pub frame_symbols: usize,
    pub bits_per_symbol: usize,
    pub rates: Vec<f64>,
    pub codec: String,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            subcarriers: 64,
            frame_symbols: 4,
            bits_per_symbol: 2,
            rates: (1..=8).map(|i| 0.04 * i as f64).collect(),
            codec: CODEC_CONV_K7_R13.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub points: usize,
    pub min_db: f64,
    pub max_db: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            points: 10,
            min_db: -10.0,
            max_db: 20.0,
        }
    }
}

impl SweepSection {
    /// `points` evenly spaced values in `[min_db, max_db)`.
    pub fn snr_points(&self) -> Vec<f64> {
        let step = (self.max_db - self.min_db) / self.points as f64;
        (0..self.points)
            .map(|i| self.min_db + step * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub train_frames: usize,
    pub test_frames: usize,
}

impl Default for GenerateSection {
    fn default() -> Self {
        Self {
            train_frames: 20_000,
            test_frames: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvesSection {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
    pub frames_per_point: usize,
}

impl Default for CurvesSection {
    fn default() -> Self {
        Self {
            min_db: -10.0,
            max_db: 14.0,
            step_db: 0.5,
            frames_per_point: 2_000,
        }
    }
}

impl CurvesSection {
    pub fn grid(&self) -> Vec<f64> {
        snr_grid(self.min_db, self.max_db, self.step_db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EesmSection {
    pub sign: EesmSign,
    pub beta_min: f64,
    pub beta_max: f64,
    pub grid_points: usize,
}

impl Default for EesmSection {
    fn default() -> Self {
        let s = BetaSearch::default();
        Self {
            sign: EesmSign::Standard,
            beta_min: s.beta_min,
            beta_max: s.beta_max,
            grid_points: s.grid_points,
        }
    }
}

impl EesmSection {
    pub fn search(&self) -> BetaSearch {
        BetaSearch {
            beta_min: self.beta_min,
            beta_max: self.beta_max,
            grid_points: self.grid_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuralSection {
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub step_size: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub optimizer: crate::neural::Optimizer,
}

impl Default for NeuralSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden: DEFAULT_HIDDEN.to_vec(),
            batch_size: t.batch_size,
            step_size: t.step_size,
            max_epochs: t.max_epochs,
            patience: t.patience,
            validation_fraction: t.validation_fraction,
            optimizer: t.optimizer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    /// Monte Carlo repetitions per test channel for the link-sourced
    /// reference FEP.
    pub reference_trials: usize,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self {
            reference_trials: 200,
        }
    }
}

/// Seeds of the stochastic stages. Unset stages derive from `root`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub root: u64,
    pub generate: Option<u64>,
    pub curves: Option<u64>,
    pub init: Option<u64>,
    pub train: Option<u64>,
    pub evaluate: Option<u64>,
    pub interleaver: Option<u64>,
}

impl SeedSection {
    fn pick(&self, value: Option<u64>, label: &str) -> u64 {
        value.unwrap_or_else(|| derive_named(self.root, label))
    }
    pub fn generate(&self) -> u64 {
        self.pick(self.generate, "generate")
    }
    pub fn curves(&self) -> u64 {
        self.pick(self.curves, "curves")
    }
    pub fn init(&self) -> u64 {
        self.pick(self.init, "init")
    }
    pub fn train(&self) -> u64 {
        self.pick(self.train, "train")
    }
    pub fn evaluate(&self) -> u64 {
        self.pick(self.evaluate, "evaluate")
    }
    pub fn interleaver(&self) -> u64 {
        self.pick(self.interleaver, "interleaver")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "path_is_empty")]
    pub out_dir: PathBuf,
    /// Event source; defaults to `oracle` when an oracle is configured.
    pub source: Option<Source>,
    pub oracle: Option<OracleSetting>,
    pub seeds: SeedSection,
    pub channel: ChannelSection,
    pub link: LinkSection,
    pub sweep: SweepSection,
    pub generate: GenerateSection,
    pub curves: CurvesSection,
    pub eesm: EesmSection,
    pub neural: NeuralSection,
    pub evaluate: EvaluateSection,
}

fn path_is_empty(p: &Path) -> bool {
    p.as_os_str().is_empty()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn config_set(&self) -> Result<ConfigSet> {
        ConfigSet::new(
            self.link.subcarriers,
            self.link.frame_symbols,
            self.link.bits_per_symbol,
            &self.link.rates,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn effective_source(&self) -> Source {
        self.source.unwrap_or(if self.oracle.is_some() {
            Source::Oracle
        } else {
            Source::Link
        })
    }

    /// The oracle driving event generation, if the source is `oracle`.
    pub fn oracle_spec(&self) -> Result<Option<OracleSpec>> {
        if self.effective_source() == Source::Link {
            return Ok(None);
        }
        let k = self.link.rates.len();
        let setting = self
            .oracle
            .as_ref()
            .ok_or_else(|| Error::Config("source `oracle` needs an [oracle] section".into()))?;
        let spec = setting.resolve(k);
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        if spec.num_configs() != k {
            return Err(Error::Config(format!(
                "oracle describes {} configurations, link section has {k}",
                spec.num_configs()
            )));
        }
        Ok(Some(spec))
    }

    pub fn link_chain(&self) -> Result<LinkChain> {
        LinkChain::from_codec_name(&self.link.codec, self.seeds.interleaver())
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn train_config(&self) -> TrainConfig {
        let n = &self.neural;
        TrainConfig {
            batch_size: n.batch_size,
            step_size: n.step_size,
            max_epochs: n.max_epochs,
            patience: n.patience,
            validation_fraction: n.validation_fraction,
            seed: self.seeds.train(),
            optimizer: n.optimizer,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.config_set()?;
        if self.sweep.points == 0 || !(self.sweep.max_db > self.sweep.min_db) {
            return bad("sweep needs points >= 1 and max_db > min_db".into());
        }
        let c = &self.curves;
        if !(c.step_db > 0.0 && c.max_db > c.min_db) {
            return bad("curve grid needs step_db > 0 and max_db > min_db".into());
        }
        if !(self.channel.subcarrier_spacing_hz > 0.0
            && self.channel.subcarrier_spacing_hz.is_finite())
        {
            return bad("subcarrier_spacing_hz must be positive".into());
        }
        let s = &self.eesm;
        if !(s.beta_min > 0.0 && s.beta_max > s.beta_min && s.grid_points >= 2) {
            return bad("eesm search needs 0 < beta_min < beta_max and grid_points >= 2".into());
        }
        if self.neural.hidden.contains(&0) {
            return bad("hidden layer widths must be >= 1".into());
        }
        self.train_config().validate()?;
        if self.evaluate.reference_trials == 0 {
            return bad("reference_trials must be >= 1".into());
        }
        self.oracle_spec()?;
        self.link_chain()?;
        Ok(())
    }
}
