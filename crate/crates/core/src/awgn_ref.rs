//! AWGN reference curves: FEP versus SNR on a flat channel, one per
//! configuration, queried by logit-linear interpolation in dB.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::link::LinkChain;
use crate::rng::derive_seed;
use crate::textfmt::fmt_sig;
use crate::types::{db_to_linear, LinkConfig};

/// Probability clamp applied to curve knots before taking logits.
pub const CURVE_PROB_FLOOR: f64 = 1e-6;

/// Minimum Monte Carlo frames per grid point.
pub const MIN_FRAMES_PER_POINT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct AwgnCurve {
    pub config_id: usize,
    pub code_rate: f64,
    grid_snr_db: Vec<f64>,
    fep: Vec<f64>,
    pub frames_per_point: usize,
}

/// `start, start+step, ...` up to and including `stop` (within half a step).
pub fn snr_grid(start_db: f64, stop_db: f64, step_db: f64) -> Vec<f64> {
    let n = ((stop_db - start_db) / step_db + 0.5).floor() as i64;
    (0..=n.max(0))
        .map(|i| start_db + i as f64 * step_db)
        .collect()
}

/// −10 dB to 14 dB in 0.5 dB steps.
pub fn default_grid() -> Vec<f64> {
    snr_grid(-10.0, 14.0, 0.5)
}

/// Pool-adjacent-violators fit of a non-increasing sequence (weighted least
/// squares).
pub fn isotonic_non_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // Blocks of (mean, weight, count).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m1, w1, c1) = blocks[blocks.len() - 1];
            let (m0, w0, c0) = blocks[blocks.len() - 2];
            if m0 >= m1 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w0 + w1;
            blocks.push(((m0 * w0 + m1 * w1) / w, w, c0 + c1));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, c)| std::iter::repeat_n(m, c))
        .collect()
}

impl AwgnCurve {
    /// Builds a curve from knot values, applying the monotone projection.
    pub fn from_values(
        config_id: usize,
        code_rate: f64,
        grid_snr_db: Vec<f64>,
        fep: Vec<f64>,
        frames_per_point: usize,
    ) -> Result<Self> {
        if grid_snr_db.is_empty() || grid_snr_db.len() != fep.len() {
            return Err(Error::InvalidArgument(
                "curve needs equal, non-empty grid and FEP lists".into(),
            ));
        }
        if grid_snr_db.iter().any(|g| !g.is_finite())
            || grid_snr_db.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(
                "curve grid must be strictly ascending".into(),
            ));
        }
        if fep.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(
                "curve FEP values must lie in [0, 1]".into(),
            ));
        }
        let fep = isotonic_non_increasing(&fep, &vec![1.0; fep.len()]);
        Ok(Self {
            config_id,
            code_rate,
            grid_snr_db,
            fep,
            frames_per_point,
        })
    }

    pub fn grid_snr_db(&self) -> &[f64] {
        &self.grid_snr_db
    }

    pub fn fep(&self) -> &[f64] {
        &self.fep
    }

    /// FEP at effective SINR `gamma_eff` (linear).
    pub fn lookup(&self, gamma_eff: f64) -> f64 {
        let x = if gamma_eff > 0.0 {
            10.0 * gamma_eff.log10()
        } else {
            f64::NEG_INFINITY
        };
        let g = &self.grid_snr_db;
        let clamp = |p: f64| p.clamp(CURVE_PROB_FLOOR, 1.0 - CURVE_PROB_FLOOR);
        if x.is_nan() || x <= g[0] {
            return clamp(self.fep[0]);
        }
        let last = g.len() - 1;
        if x >= g[last] {
            return clamp(self.fep[last]);
        }
        let hi = g.partition_point(|v| *v <= x);
        let lo = hi - 1;
        let t = (x - g[lo]) / (g[hi] - g[lo]);
        let (a, b) = (logit(clamp(self.fep[lo])), logit(clamp(self.fep[hi])));
        sigmoid(a + t * (b - a))
    }
}

pub fn lookup_fep(curve: &AwgnCurve, gamma_eff: f64) -> f64 {
    curve.lookup(gamma_eff)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Monte Carlo curve over a flat channel at each grid SNR. Grid points run
/// in parallel with independent seeds.
pub fn build_awgn_curve(
    chain: &LinkChain,
    cfg: &LinkConfig,
    grid_snr_db: &[f64],
    frames_per_point: usize,
    seed: u64,
) -> Result<AwgnCurve> {
    if frames_per_point < MIN_FRAMES_PER_POINT {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_FRAMES_PER_POINT} frames per point, got {frames_per_point}"
        )));
    }
    if grid_snr_db.is_empty() || grid_snr_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "curve grid must be strictly ascending".into(),
        ));
    }
    let fep = grid_snr_db
        .par_iter()
        .enumerate()
        .map(|(i, snr_db)| {
            let ch = ChannelRealization::flat(cfg.subcarriers, db_to_linear(*snr_db))?;
            let point_seed = derive_seed(seed, i as u64);
            let mut errors = 0usize;
            for f in 0..frames_per_point {
                if chain.simulate_frame(cfg, &ch, derive_seed(point_seed, f as u64))? {
                    errors += 1;
                }
            }
            Ok(errors as f64 / frames_per_point as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    AwgnCurve::from_values(
        cfg.id,
        cfg.code_rate,
        grid_snr_db.to_vec(),
        fep,
        frames_per_point,
    )
}

/// Curve evaluated from a known flat-channel FEP function rather than by
/// simulation.
pub fn curve_from_fn(
    cfg: &LinkConfig,
    grid_snr_db: &[f64],
    fep_at_snr: impl Fn(f64) -> f64,
) -> Result<AwgnCurve> {
    let fep = grid_snr_db
        .iter()
        .map(|d| fep_at_snr(db_to_linear(*d)).clamp(0.0, 1.0))
        .collect();
    AwgnCurve::from_values(cfg.id, cfg.code_rate, grid_snr_db.to_vec(), fep, 0)
}

pub fn write_curve<W: Write>(curve: &AwgnCurve, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "#awgncurve v1 k={} rate={} frames={}",
        curve.config_id,
        fmt_sig(curve.code_rate, 9),
        curve.frames_per_point
    )?;
    for (s, p) in curve.grid_snr_db.iter().zip(&curve.fep) {
        writeln!(out, "{} {}", fmt_sig(*s, 6), fmt_sig(*p, 6))?;
    }
    out.flush()
}

pub fn read_curve<R: BufRead>(input: R) -> Result<AwgnCurve> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty curve file"))?
        .map_err(|e| Error::parse(1, e.to_string()))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("#awgncurve") || tok.next() != Some("v1") {
        return Err(Error::parse(1, "expected `#awgncurve v1` header"));
    }
    let (mut k, mut rate, mut frames) = (None, None, 0usize);
    for t in tok {
        let (key, v) = t
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header field `{t}`")))?;
        let bad = || Error::parse(1, format!("bad value for `{key}`: `{v}`"));
        match key {
            "k" => k = Some(v.parse::<usize>().map_err(|_| bad())?),
            "rate" => rate = Some(v.parse::<f64>().map_err(|_| bad())?),
            "frames" => frames = v.parse().map_err(|_| bad())?,
            _ => return Err(Error::parse(1, format!("unknown header key `{key}`"))),
        }
    }
    let k = k.ok_or_else(|| Error::parse(1, "header missing k"))?;
    let rate = rate.ok_or_else(|| Error::parse(1, "header missing rate"))?;
    let (mut grid, mut fep) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != 2 {
            return Err(Error::parse(line_no, "expected `snr_db fep`"));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(line_no, format!("bad number `{s}`")))
        };
        grid.push(num(vals[0])?);
        fep.push(num(vals[1])?);
    }
    AwgnCurve::from_values(k, rate, grid, fep, frames).map_err(|e| Error::Data(e.to_string()))
}

pub fn save_curve(curve: &AwgnCurve, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_curve(curve, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

pub fn load_curve(path: &Path) -> Result<AwgnCurve> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_curve(BufReader::new(f)).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Data(format!("{}:{line}: {msg}", path.display())),
        other => other,
    })
}

/// Effective SNR (dB) where the curve crosses `target` FEP, if it does.
pub fn snr_at_fep(curve: &AwgnCurve, target: f64) -> Option<f64> {
    let g = &curve.grid_snr_db;
    let p = &curve.fep;
    (1..g.len()).find_map(|i| {
        (p[i - 1] >= target && p[i] <= target && p[i - 1] > p[i]).then(|| {
            let t = (p[i - 1] - target) / (p[i - 1] - p[i]);
            g[i - 1] + t * (g[i] - g[i - 1])
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::CODEC_CONV_K7_R13;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn curve(grid: Vec<f64>, fep: Vec<f64>) -> AwgnCurve {
        AwgnCurve::from_values(1, 0.1, grid, fep, 0).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 49);
        assert_eq!(g[0], -10.0);
        assert_eq!(*g.last().unwrap(), 14.0);
    }

    #[test]
    fn pav_examples() {
        let mono = vec![0.9, 0.5, 0.5, 0.1];
        assert_eq!(isotonic_non_increasing(&mono, &[1.0; 4]), mono);
        let fixed = isotonic_non_increasing(&[0.5, 0.7, 0.2, 0.3, 0.0], &[1.0; 5]);
        assert_eq!(fixed.len(), 5);
        assert!(fixed.windows(2).all(|w| w[0] >= w[1]));
        assert_abs_diff_eq!(fixed[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(fixed[2], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn lookup_examples() {
        let c = curve(vec![0.0, 1.0, 2.0], vec![0.9, 0.1, 0.0]);
        assert_abs_diff_eq!(c.lookup(db_to_linear(0.0)), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(
            c.lookup(db_to_linear(2.0)),
            CURVE_PROB_FLOOR,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(c.lookup(db_to_linear(0.5)), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.lookup(db_to_linear(-7.0)), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(c.lookup(0.0), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(
            c.lookup(db_to_linear(30.0)),
            CURVE_PROB_FLOOR,
            epsilon = 1e-15
        );
        let single = curve(vec![3.0], vec![0.25]);
        assert_eq!(single.lookup(1.0), 0.25);
        assert_eq!(single.lookup(100.0), 0.25);
    }

    #[test]
    fn invalid_curves_rejected() {
        assert!(AwgnCurve::from_values(1, 0.1, vec![0.0, 0.0], vec![0.5, 0.4], 0).is_err());
        assert!(AwgnCurve::from_values(1, 0.1, vec![0.0], vec![1.5], 0).is_err());
        assert!(AwgnCurve::from_values(1, 0.1, vec![], vec![], 0).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let c = curve(vec![-1.0, 0.5, 2.0], vec![0.75, 0.125, 0.0]);
        let mut buf = Vec::new();
        write_curve(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#awgncurve v1 k=1 rate=0.1"));
        assert_eq!(read_curve(buf.as_slice()).unwrap(), c);
        assert!(read_curve("#awgncurve v1 k=1 rate=0.1\n1 x\n".as_bytes()).is_err());
    }

    #[test]
    fn monte_carlo_curve() {
        let chain = LinkChain::from_codec_name(CODEC_CONV_K7_R13, 1).unwrap();
        let cfg = LinkConfig::new(1, 16, 4, 2, 0.05).unwrap();
        let c1 = build_awgn_curve(&chain, &cfg, &[-20.0, 10.0], 100, 4).unwrap();
        let c2 = build_awgn_curve(&chain, &cfg, &[-20.0, 10.0], 100, 4).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(c1.fep()[1], 0.0);
        assert!(c1.fep()[0] > 0.5);
        let one = build_awgn_curve(&chain, &cfg, &[-3.0], 100, 4).unwrap();
        assert_eq!(one.fep().len(), 1);
        assert!(build_awgn_curve(&chain, &cfg, &[0.0], 50, 4).is_err());
        assert!(build_awgn_curve(&chain, &cfg, &[1.0, 0.0], 100, 4).is_err());
    }

    proptest! {
        #[test]
        fn lookup_is_monotone_and_bounded(
            raw in prop::collection::vec(0.0f64..=1.0, 2..12),
            a in -15.0f64..20.0,
            b in -15.0f64..20.0,
        ) {
            let grid: Vec<f64> = (0..raw.len()).map(|i| -10.0 + 2.0 * i as f64).collect();
            let c = curve(grid, raw);
            prop_assert!(c.fep().windows(2).all(|w| w[0] >= w[1]));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (pl, ph) = (c.lookup(db_to_linear(lo)), c.lookup(db_to_linear(hi)));
            prop_assert!((0.0..=1.0).contains(&pl) && (0.0..=1.0).contains(&ph));
            prop_assert!(ph <= pl + 1e-12);
        }
    }
}
