//! Exponential effective SINR mapping: compression of the SINR vector to a
//! scalar, FEP prediction through an AWGN reference curve, and per-config
//! calibration of β by least squares against observed error events.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::awgn_ref::{load_curve, save_curve, AwgnCurve};
use crate::error::{Error, Result};
use crate::textfmt::fmt_sig;
use crate::types::SinrVector;

/// Which form of the exponential mapping to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EesmSign {
    /// `g = −β·ln(mean(exp(−γ_m/β)))`, dominated by the weakest subcarriers.
    #[default]
    Standard,
    /// `g = β·ln(mean(exp(γ_m/β)))`, the optimistic soft maximum.
    AsPrinted,
}

impl std::str::FromStr for EesmSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(EesmSign::Standard),
            "as_printed" => Ok(EesmSign::AsPrinted),
            other => Err(Error::Config(format!("unknown eesm_sign `{other}`"))),
        }
    }
}

impl EesmSign {
    pub fn as_str(self) -> &'static str {
        match self {
            EesmSign::Standard => "standard",
            EesmSign::AsPrinted => "as_printed",
        }
    }
}

/// Standard EESM of `sinr` (linear), evaluated with the minimum factored
/// out so large `γ/β` cannot underflow. The result is clamped into
/// `[min γ, mean γ]` against rounding.
pub fn eesm_compress(sinr: &SinrVector, beta: f64) -> f64 {
    compress_with(sinr, beta, EesmSign::Standard)
}

pub fn compress_with(sinr: &SinrVector, beta: f64, sign: EesmSign) -> f64 {
    assert!(
        beta > 0.0 && beta.is_finite(),
        "β must be positive and finite"
    );
    let g = sinr.linear();
    let n = g.len() as f64;
    match sign {
        EesmSign::Standard => {
            let lo = sinr.min();
            let mean = sinr.mean();
            // mean(exp(-(γ-min)/β)) - 1, computed without cancellation.
            let s = g.iter().map(|v| (-(v - lo) / beta).exp_m1()).sum::<f64>() / n;
            (lo - beta * s.ln_1p()).clamp(lo, mean.max(lo))
        }
        EesmSign::AsPrinted => {
            let hi = sinr.max();
            let mean = sinr.mean();
            let s = g.iter().map(|v| ((v - hi) / beta).exp_m1()).sum::<f64>() / n;
            (hi + beta * s.ln_1p()).clamp(mean.min(hi), hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EesmEntry {
    pub beta: f64,
    pub curve: AwgnCurve,
}

/// One `(β_k, ρ_k^AWGN)` pair per configuration, indexed by 1-based id.
#[derive(Debug, Clone, PartialEq)]
pub struct EesmPredictor {
    pub sign: EesmSign,
    entries: Vec<EesmEntry>,
}

impl EesmPredictor {
    pub fn new(sign: EesmSign, entries: Vec<EesmEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument(
                "EESM predictor needs at least one config".into(),
            ));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(e.beta > 0.0 && e.beta.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "β for config {} must be positive",
                    i + 1
                )));
            }
            if e.curve.config_id != i + 1 {
                return Err(Error::InvalidArgument(format!(
                    "curve for config {} carries id {}",
                    i + 1,
                    e.curve.config_id
                )));
            }
        }
        Ok(Self { sign, entries })
    }

    pub fn num_configs(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, k: usize) -> Option<&EesmEntry> {
        k.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn betas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.beta).collect()
    }

    pub fn predict(&self, k: usize, sinr: &SinrVector) -> Result<f64> {
        let e = self
            .entry(k)
            .ok_or_else(|| Error::InvalidArgument(format!("no EESM entry for config {k}")))?;
        Ok(e.curve.lookup(compress_with(sinr, e.beta, self.sign)))
    }

    pub fn predict_all(&self, sinr: &SinrVector) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.curve.lookup(compress_with(sinr, e.beta, self.sign)))
            .collect()
    }
}

pub fn predict_fep_eesm(pred: &EesmPredictor, k: usize, sinr: &SinrVector) -> Result<f64> {
    pred.predict(k, sinr)
}

/// Search range for [`calibrate_beta`]: a log-spaced grid followed by
/// golden-section refinement around the best grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSearch {
    pub beta_min: f64,
    pub beta_max: f64,
    pub grid_points: usize,
}

impl Default for BetaSearch {
    fn default() -> Self {
        Self {
            beta_min: 0.05,
            beta_max: 200.0,
            grid_points: 40,
        }
    }
}

impl BetaSearch {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points.max(2);
        let (a, b) = (self.beta_min.ln(), self.beta_max.ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub beta: f64,
    pub objective: f64,
    /// Objective at each grid point, in grid order.
    pub grid: Vec<(f64, f64)>,
}

/// `Σ_n (ρ̂(γ_n; β) − e_n)²` over the given observations.
pub fn calibration_objective(
    samples: &[(&SinrVector, bool)],
    curve: &AwgnCurve,
    beta: f64,
    sign: EesmSign,
) -> f64 {
    samples
        .iter()
        .map(|(g, e)| {
            let p = curve.lookup(compress_with(g, beta, sign));
            let d = p - if *e { 1.0 } else { 0.0 };
            d * d
        })
        .sum()
}

const GOLDEN_ITERS: usize = 60;
const GOLDEN_TOL_LOG: f64 = 1e-5;

pub fn calibrate_beta(
    samples: &[(&SinrVector, bool)],
    curve: &AwgnCurve,
    sign: EesmSign,
    search: &BetaSearch,
) -> Result<Calibration> {
    if samples.is_empty() {
        return Err(Error::Data("no observations to calibrate β".into()));
    }
    if !(search.beta_min > 0.0 && search.beta_max > search.beta_min) {
        return Err(Error::Config(
            "β search range must satisfy 0 < min < max".into(),
        ));
    }
    let objective = |b: f64| calibration_objective(samples, curve, b, sign);
    let betas = search.grid();
    let grid: Vec<(f64, f64)> = betas.iter().map(|&b| (b, objective(b))).collect();

    let mut best = 0;
    for (i, (_, v)) in grid.iter().enumerate() {
        if *v < grid[best].1 {
            best = i;
        }
    }

    // Golden section on log β over the neighbours of the best grid point.
    let lo = betas[best.saturating_sub(1)].ln();
    let hi = betas[(best + 1).min(betas.len() - 1)].ln();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c.exp()), objective(d.exp()));
    for _ in 0..GOLDEN_ITERS {
        if b - a < GOLDEN_TOL_LOG {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d.exp());
        }
    }
    let (refined, f_refined) = if fc <= fd {
        (c.exp(), fc)
    } else {
        (d.exp(), fd)
    };

    let (beta, value) = grid[best];
    let pick_refined = f_refined < value || (f_refined == value && refined < beta);
    let (beta, objective) = if pick_refined {
        (refined, f_refined)
    } else {
        (beta, value)
    };
    Ok(Calibration {
        beta,
        objective,
        grid,
    })
}

/// Writes `#eesm v1 sign=...` followed by `k beta` lines.
pub fn write_betas<W: Write>(pred: &EesmPredictor, mut out: W) -> std::io::Result<()> {
    writeln!(out, "#eesm v1 sign={}", pred.sign.as_str())?;
    for (i, e) in pred.entries.iter().enumerate() {
        writeln!(out, "{} {}", i + 1, fmt_sig(e.beta, 9))?;
    }
    out.flush()
}

pub fn read_betas<R: BufRead>(input: R) -> Result<(EesmSign, Vec<f64>)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty EESM file"))?
        .map_err(|e| Error::parse(1, e.to_string()))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("#eesm") || tok.next() != Some("v1") {
        return Err(Error::parse(1, "expected `#eesm v1` header"));
    }
    let mut sign = EesmSign::Standard;
    for t in tok {
        match t.split_once('=') {
            Some(("sign", v)) => {
                sign = v
                    .parse()
                    .map_err(|_| Error::parse(1, format!("bad sign `{v}`")))?
            }
            _ => return Err(Error::parse(1, format!("unknown header field `{t}`"))),
        }
    }
    let mut betas = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let k: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(line_no, "bad config id"))?;
        let beta: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(line_no, "bad β value"))?;
        if k != betas.len() + 1 {
            return Err(Error::parse(
                line_no,
                format!("expected config {}, found {k}", betas.len() + 1),
            ));
        }
        betas.push(beta);
    }
    Ok((sign, betas))
}

/// Saves the β file next to one curve file per configuration and a manifest
/// (`#eesm-manifest v1`, then `betas <file>` and `k <curve file>` lines)
/// tying them together. Paths in the manifest are relative to its folder.
pub fn save_predictor(pred: &EesmPredictor, manifest: &Path) -> Result<()> {
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let stem = manifest
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("eesm")
        .to_string();
    let betas_name = format!("{stem}.betas");
    let betas_path = dir.join(&betas_name);
    let f = File::create(&betas_path).map_err(|e| Error::io(&betas_path, e))?;
    write_betas(pred, BufWriter::new(f)).map_err(|e| Error::io(&betas_path, e))?;

    let mut text = format!("#eesm-manifest v1\nbetas {betas_name}\n");
    for (i, e) in pred.entries.iter().enumerate() {
        let name = format!("{stem}_awgn_k{}.curve", i + 1);
        save_curve(&e.curve, &dir.join(&name))?;
        text.push_str(&format!("{} {name}\n", i + 1));
    }
    std::fs::write(manifest, text).map_err(|e| Error::io(manifest, e))
}

pub fn load_predictor(manifest: &Path) -> Result<EesmPredictor> {
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let ctx = |line: usize, msg: &str| Error::Data(format!("{}:{line}: {msg}", manifest.display()));
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("#eesm-manifest v1") {
        return Err(ctx(1, "expected `#eesm-manifest v1` header"));
    }
    let mut betas_file: Option<PathBuf> = None;
    let mut curves = Vec::new();
    for (i, line) in lines.enumerate() {
        let (key, value) = match line.split_once(' ') {
            Some(kv) => kv,
            None if line.trim().is_empty() => continue,
            None => return Err(ctx(i + 2, "expected `<key> <path>`")),
        };
        if key == "betas" {
            betas_file = Some(dir.join(value.trim()));
        } else {
            let k: usize = key.parse().map_err(|_| ctx(i + 2, "bad config id"))?;
            if k != curves.len() + 1 {
                return Err(ctx(i + 2, "curve entries must be listed in order 1..K"));
            }
            curves.push(load_curve(&dir.join(value.trim()))?);
        }
    }
    let betas_file = betas_file.ok_or_else(|| ctx(1, "manifest lists no β file"))?;
    let f = File::open(&betas_file).map_err(|e| Error::io(&betas_file, e))?;
    let (sign, betas) = read_betas(BufReader::new(f)).map_err(|e| match e {
        Error::Parse { line, msg } => {
            Error::Data(format!("{}:{line}: {msg}", betas_file.display()))
        }
        other => other,
    })?;
    if betas.len() != curves.len() {
        return Err(Error::Data(format!(
            "{} β values but {} curves",
            betas.len(),
            curves.len()
        )));
    }
    let entries = betas
        .into_iter()
        .zip(curves)
        .map(|(beta, curve)| EesmEntry { beta, curve })
        .collect();
    EesmPredictor::new(sign, entries)
}
