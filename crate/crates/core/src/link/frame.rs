use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::codec::{codec_by_name, Codec};
use super::interleaver::Interleaver;
use super::qpsk::{demap_llr, modulate_qpsk};
use super::rate_match::{derate_match, rate_match};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::types::LinkConfig;

/// Transmitter/receiver pair: a codec and the experiment-wide interleaver
/// seed from which the permutation for each codeword length is derived.
pub struct LinkChain {
    codec: Box<dyn Codec>,
    interleaver_seed: u64,
}

impl std::fmt::Debug for LinkChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinkChain")
            .field("codec", &self.codec.name())
            .field("interleaver_seed", &self.interleaver_seed)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FepEstimate {
    pub estimate: f64,
    pub errors: usize,
    pub trials: usize,
}

impl LinkChain {
    pub fn new(codec: Box<dyn Codec>, interleaver_seed: u64) -> Self {
        Self {
            codec,
            interleaver_seed,
        }
    }

    pub fn from_codec_name(name: &str, interleaver_seed: u64) -> Result<Self> {
        Ok(Self::new(codec_by_name(name)?, interleaver_seed))
    }

    pub fn codec(&self) -> &dyn Codec {
        self.codec.as_ref()
    }

    pub fn interleaver(&self, coded_len: usize) -> Interleaver {
        Interleaver::from_seed(
            coded_len,
            derive_seed(self.interleaver_seed, coded_len as u64),
        )
    }

    /// Simulates one frame and returns the error event (`true` when the
    /// decoded payload differs from the transmitted one).
    pub fn simulate_frame(
        &self,
        cfg: &LinkConfig,
        ch: &ChannelRealization,
        seed: u64,
    ) -> Result<bool> {
        if cfg.subcarriers != ch.subcarriers() {
            return Err(Error::Dimension {
                expected: cfg.subcarriers,
                got: ch.subcarriers(),
            });
        }
        let mut rng = rng_from_seed(seed);
        let payload: Vec<u8> = (0..cfg.payload_bits)
            .map(|_| rng.random_range(0..2u8))
            .collect();

        let coded = self.codec.encode(&payload);
        let coded_len = coded.len();
        let interleaver = self.interleaver(coded_len);
        let interleaved = interleaver.interleave(&coded)?;
        let matched = rate_match(&interleaved, cfg.capacity_bits());
        let frame = modulate_qpsk(&matched)?;

        let llrs = match receive(&frame.symbols, ch, &mut rng) {
            Some(llrs) => llrs,
            None => return Ok(true),
        };

        let accumulated = derate_match(&llrs, coded_len);
        let deinterleaved = interleaver.deinterleave(&accumulated)?;
        let decoded = self.codec.decode(&deinterleaved, cfg.payload_bits);
        Ok(decoded != payload)
    }
}

/// Per-symbol complex Gaussian noise of variance `σ²` (σ²/2 per dimension).
fn noise(rng: &mut SimRng, sd: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(sd * re, sd * im)
}

/// Fading, noise, zero-forcing and demapping for a frame whose symbol `i`
/// sits on subcarrier `i mod M`. `None` when equalization blows up.
fn receive(symbols: &[Complex64], ch: &ChannelRealization, rng: &mut SimRng) -> Option<Vec<f64>> {
    let m = ch.subcarriers();
    let sd = (ch.noise_variance / 2.0).sqrt();
    let mut llrs = Vec::with_capacity(2 * symbols.len());
    for (i, x) in symbols.iter().enumerate() {
        let h = ch.h[i % m];
        let y = h * x + noise(rng, sd);
        let sinr = h.norm_sqr() / ch.noise_variance;
        let (li, lq) = if sinr == 0.0 {
            (0.0, 0.0)
        } else {
            let eq = y / h;
            if !(eq.re.is_finite() && eq.im.is_finite()) {
                return None;
            }
            demap_llr(eq, sinr)
        };
        if !(li.is_finite() && lq.is_finite()) {
            return None;
        }
        llrs.push(li);
        llrs.push(lq);
    }
    Some(llrs)
}

/// Monte Carlo FEP on a fixed channel: `trials` frames with fresh payload
/// and noise each.
pub fn estimate_fep_mc(
    chain: &LinkChain,
    cfg: &LinkConfig,
    ch: &ChannelRealization,
    trials: usize,
    seed: u64,
) -> Result<FepEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "Monte Carlo needs at least one trial".into(),
        ));
    }
    let mut errors = 0;
    for t in 0..trials {
        if chain.simulate_frame(cfg, ch, derive_seed(seed, t as u64))? {
            errors += 1;
        }
    }
    Ok(FepEstimate {
        estimate: errors as f64 / trials as f64,
        errors,
        trials,
    })
}

/// Uncoded QPSK over `ch`: sends `num_bits` random bits (rounded up to
/// whole symbols, cycling over subcarriers) and counts hard-decision
/// errors on the demapped LLRs. Returns `(errors, bits)`.
pub fn uncoded_bit_errors(
    ch: &ChannelRealization,
    num_bits: usize,
    seed: u64,
) -> Result<(usize, usize)> {
    let mut rng = rng_from_seed(seed);
    let n = num_bits + num_bits % 2;
    let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    let frame = modulate_qpsk(&bits)?;
    let llrs = receive(&frame.symbols, ch, &mut rng)
        .ok_or_else(|| Error::Numeric("zero-forcing produced a non-finite symbol".into()))?;
    let errors = bits
        .iter()
        .zip(&llrs)
        .filter(|(b, l)| (**l < 0.0) != (**b == 1))
        .count();
    Ok((errors, n))
}
