//! Line-oriented dataset files.
//!
//! ```text
//! #fepds v1 M=64 K=3 rates=0.04,0.08,0.12 S=4 J=2
//! 3.5 00000000deadbeef 01- -1.23457 4.5 ...
//! ```
//!
//! Each record line holds the average SNR (dB), the generating seed in hex,
//! one `0`/`1`/`-` character per configuration and the M per-subcarrier
//! SINRs in dB with 6 significant digits. `S` and `J` are optional trailing
//! header keys (defaults 1 and 2).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::textfmt::fmt_sig;
use crate::types::{ConfigSet, Dataset, FrameObservation, SinrVector};

const MAGIC: &str = "#fepds";
const VERSION: &str = "v1";

pub fn header_line(cs: &ConfigSet) -> String {
    let rates: Vec<String> = cs.rates().iter().map(|r| fmt_sig(*r, 9)).collect();
    format!(
        "{MAGIC} {VERSION} M={} K={} rates={} S={} J={}",
        cs.subcarriers(),
        cs.len(),
        rates.join(","),
        cs.frame_symbols(),
        cs.bits_per_symbol()
    )
}

pub fn record_line(rec: &FrameObservation) -> String {
    let events: String = rec
        .events
        .iter()
        .map(|e| match e {
            Some(true) => '1',
            Some(false) => '0',
            None => '-',
        })
        .collect();
    let mut line = format!(
        "{} {:016x} {}",
        fmt_sig(rec.avg_snr_db, 6),
        rec.seed,
        events
    );
    for db in rec.sinr.to_db() {
        line.push(' ');
        line.push_str(&fmt_sig(db, 6));
    }
    line
}

pub fn write_dataset<W: Write>(ds: &Dataset, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", header_line(&ds.config_set))?;
    for rec in ds.records() {
        writeln!(out, "{}", record_line(rec))?;
    }
    out.flush()
}

pub fn parse_header(line: &str) -> Result<ConfigSet> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(Error::parse(1, format!("expected `{MAGIC}` header")));
    }
    if tokens.next() != Some(VERSION) {
        return Err(Error::parse(1, "unsupported dataset version"));
    }
    let (mut m, mut k, mut rates) = (None, None, None);
    let (mut s, mut j) = (1usize, 2usize);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header field `{tok}`")))?;
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::parse(1, format!("bad integer for `{key}`: `{v}`")))
        };
        match key {
            "M" => m = Some(int(value)?),
            "K" => k = Some(int(value)?),
            "S" => s = int(value)?,
            "J" => j = int(value)?,
            "rates" => {
                let parsed = value
                    .split(',')
                    .map(|r| {
                        r.parse::<f64>()
                            .map_err(|_| Error::parse(1, format!("bad rate `{r}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                rates = Some(parsed);
            }
            _ => return Err(Error::parse(1, format!("unknown header key `{key}`"))),
        }
    }
    let m = m.ok_or_else(|| Error::parse(1, "header missing M"))?;
    let k = k.ok_or_else(|| Error::parse(1, "header missing K"))?;
    let rates = rates.ok_or_else(|| Error::parse(1, "header missing rates"))?;
    if rates.len() != k {
        return Err(Error::parse(
            1,
            format!("K={k} but {} rates listed", rates.len()),
        ));
    }
    ConfigSet::new(m, s, j, &rates).map_err(|e| Error::parse(1, e.to_string()))
}

pub fn parse_record(line: &str, line_no: usize, m: usize, k: usize) -> Result<FrameObservation> {
    let mut tokens = line.split_whitespace();
    let mut next = |what: &str| {
        tokens
            .next()
            .ok_or_else(|| Error::parse(line_no, format!("missing {what}")))
    };
    let snr_tok = next("average SNR")?;
    let avg_snr_db: f64 = snr_tok
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad average SNR `{snr_tok}`")))?;
    let seed_tok = next("seed")?;
    let seed = u64::from_str_radix(seed_tok, 16)
        .map_err(|_| Error::parse(line_no, format!("bad hex seed `{seed_tok}`")))?;
    let ev_tok = next("event string")?;
    if ev_tok.chars().count() != k {
        return Err(Error::parse(
            line_no,
            format!(
                "event string has {} entries, expected {k}",
                ev_tok.chars().count()
            ),
        ));
    }
    let events = ev_tok
        .chars()
        .map(|c| match c {
            '0' => Ok(Some(false)),
            '1' => Ok(Some(true)),
            '-' => Ok(None),
            other => Err(Error::parse(
                line_no,
                format!("bad event character `{other}`"),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut db = Vec::with_capacity(m);
    for (i, tok) in tokens.enumerate() {
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad SINR value #{} `{tok}`", i + 1)))?;
        db.push(v);
    }
    if db.len() != m {
        return Err(Error::parse(
            line_no,
            format!("expected {m} SINR values, found {}", db.len()),
        ));
    }
    let sinr = SinrVector::from_db(&db).map_err(|e| Error::parse(line_no, e.to_string()))?;
    FrameObservation::new(sinr, events, seed, avg_snr_db)
        .map_err(|e| Error::parse(line_no, e.to_string()))
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Dataset> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "empty dataset file")),
    };
    let cs = parse_header(&header)?;
    let (m, k) = (cs.subcarriers(), cs.len());
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_record(&line, line_no, m, k)?);
    }
    Dataset::new(cs, records)
}

pub fn save(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(ds, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file)).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Data(format!("{}:{line}: {msg}", path.display())),
        other => other,
    })
}
