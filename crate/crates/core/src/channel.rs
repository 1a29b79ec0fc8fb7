//! Block-fading, frequency-selective channel realizations built from a
//! tapped-delay-line power profile.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::types::{db_to_linear, SinrVector};

/// Default OFDM subcarrier spacing.
pub const DEFAULT_SUBCARRIER_SPACING_HZ: f64 = 15e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTapProfile", into = "RawTapProfile")]
pub struct TapProfile {
    name: String,
    delays_ns: Vec<f64>,
    powers_db: Vec<f64>,
    powers_linear: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawTapProfile {
    Builtin(String),
    Table {
        name: String,
        delays_ns: Vec<f64>,
        powers_db: Vec<f64>,
    },
}

impl TryFrom<RawTapProfile> for TapProfile {
    type Error = Error;
    fn try_from(raw: RawTapProfile) -> Result<Self> {
        match raw {
            RawTapProfile::Builtin(name) => Self::builtin(&name)
                .ok_or_else(|| Error::Config(format!("unknown built-in tap profile `{name}`"))),
            RawTapProfile::Table {
                name,
                delays_ns,
                powers_db,
            } => TapProfile::new(name, delays_ns, powers_db),
        }
    }
}

impl From<TapProfile> for RawTapProfile {
    fn from(p: TapProfile) -> Self {
        if TapProfile::builtin(&p.name).as_ref() == Some(&p) {
            return RawTapProfile::Builtin(p.name);
        }
        RawTapProfile::Table {
            name: p.name,
            delays_ns: p.delays_ns,
            powers_db: p.powers_db,
        }
    }
}

impl TapProfile {
    pub fn new(name: impl Into<String>, delays_ns: Vec<f64>, powers_db: Vec<f64>) -> Result<Self> {
        if delays_ns.is_empty() || delays_ns.len() != powers_db.len() {
            return Err(Error::InvalidArgument(
                "tap profile needs equal, non-empty delay and power lists".into(),
            ));
        }
        if delays_ns.iter().chain(&powers_db).any(|v| !v.is_finite()) || delays_ns[0] < 0.0 {
            return Err(Error::InvalidArgument(
                "tap values must be finite, delays >= 0".into(),
            ));
        }
        if delays_ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "tap delays must be strictly increasing".into(),
            ));
        }
        let raw: Vec<f64> = powers_db.iter().map(|p| db_to_linear(*p)).collect();
        let total: f64 = raw.iter().sum();
        let powers_linear = raw.iter().map(|p| p / total).collect();
        Ok(Self {
            name: name.into(),
            delays_ns,
            powers_db,
            powers_linear,
        })
    }

    /// 3GPP Extended Pedestrian A.
    pub fn epa() -> Self {
        Self::new(
            "EPA",
            vec![0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0],
            vec![0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8],
        )
        .expect("EPA profile is valid")
    }

    /// One tap at zero delay (flat Rayleigh fading).
    pub fn single_tap() -> Self {
        Self::new("flat", vec![0.0], vec![0.0]).expect("single tap is valid")
    }

    /// Looks up a built-in profile by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "epa" => Some(Self::epa()),
            "flat" => Some(Self::single_tap()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_taps(&self) -> usize {
        self.delays_ns.len()
    }

    pub fn delays_ns(&self) -> &[f64] {
        &self.delays_ns
    }

    pub fn powers_db(&self) -> &[f64] {
        &self.powers_db
    }

    /// Tap powers normalized to unit sum.
    pub fn powers_linear(&self) -> &[f64] {
        &self.powers_linear
    }
}

/// Parses `name, delays_ns=[...], powers_db=[...]`, or a bare built-in name.
impl FromStr for TapProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = Self::builtin(s) {
            return Ok(p);
        }
        let bad = |msg: &str| Error::Config(format!("tap profile `{s}`: {msg}"));
        let (name, rest) = s
            .split_once(',')
            .ok_or_else(|| bad("expected `name, delays_ns=[..], powers_db=[..]`"))?;
        let list = |key: &str| -> Result<Vec<f64>> {
            let start = rest
                .find(&format!("{key}=["))
                .ok_or_else(|| bad(&format!("missing {key}")))?;
            let body = &rest[start + key.len() + 2..];
            let end = body
                .find(']')
                .ok_or_else(|| bad(&format!("unterminated {key}")))?;
            body[..end]
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(&format!("bad number `{}`", t.trim())))
                })
                .collect()
        };
        Self::new(name.trim(), list("delays_ns")?, list("powers_db")?)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

impl fmt::Display for TapProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "{}, delays_ns=[{}], powers_db=[{}]",
            self.name,
            join(&self.delays_ns),
            join(&self.powers_db)
        )
    }
}

/// Frequency-domain channel of one frame. The same `h` applies to every
/// OFDM symbol of the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub noise_variance: f64,
    pub profile: String,
}

impl ChannelRealization {
    pub fn new(h: Vec<Complex64>, noise_variance: f64, profile: impl Into<String>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidArgument(
                "channel needs at least one subcarrier".into(),
            ));
        }
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        if h.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument(
                "non-finite channel coefficient".into(),
            ));
        }
        Ok(Self {
            h,
            noise_variance,
            profile: profile.into(),
        })
    }

    /// Flat channel `h_m = 1` at linear SNR `snr`.
    pub fn flat(subcarriers: usize, snr: f64) -> Result<Self> {
        Self::new(
            vec![Complex64::new(1.0, 0.0); subcarriers],
            1.0 / snr,
            "awgn",
        )
    }

    /// A channel with real coefficients `sqrt(γ_m)` and unit noise. Every
    /// receiver statistic of the link depends on the channel only through
    /// `γ`, so this is statistically equivalent to any channel producing
    /// the same SINRs.
    pub fn from_sinrs(sinr: &SinrVector) -> Self {
        let h = sinr
            .linear()
            .iter()
            .map(|g| Complex64::new(g.sqrt(), 0.0))
            .collect();
        Self {
            h,
            noise_variance: 1.0,
            profile: "sinr".into(),
        }
    }

    pub fn subcarriers(&self) -> usize {
        self.h.len()
    }
}

pub fn draw_channel(
    profile: &TapProfile,
    subcarriers: usize,
    subcarrier_spacing_hz: f64,
    avg_snr_db: f64,
    seed: u64,
) -> Result<ChannelRealization> {
    if subcarriers == 0 {
        return Err(Error::InvalidArgument(
            "subcarrier count must be >= 1".into(),
        ));
    }
    if !(subcarrier_spacing_hz.is_finite() && subcarrier_spacing_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "subcarrier spacing must be positive, got {subcarrier_spacing_hz}"
        )));
    }
    if !avg_snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite SNR {avg_snr_db}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let taps: Vec<Complex64> = profile
        .powers_linear()
        .iter()
        .map(|p| {
            let sd = (p / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(sd * re, sd * im)
        })
        .collect();
    let h = (0..subcarriers)
        .map(|m| {
            let f = m as f64 * subcarrier_spacing_hz;
            taps.iter()
                .zip(profile.delays_ns())
                .map(|(a, tau)| a * Complex64::from_polar(1.0, -2.0 * PI * f * tau * 1e-9))
                .sum()
        })
        .collect();
    let snr = db_to_linear(avg_snr_db);
    ChannelRealization::new(h, 1.0 / snr, profile.name())
}

/// `γ_m = |h_m|² / σ²`.
pub fn compute_sinrs(ch: &ChannelRealization) -> SinrVector {
    let values =
        ch.h.iter()
            .map(|h| h.norm_sqr() / ch.noise_variance)
            .collect();
    SinrVector::new(values).expect("finite channel yields finite SINRs")
}
