//! Text model format:
//!
//! ```text
//! #fepmlp v1
//! dims 64 60 10 60 8
//! hidden relu
//! output sigmoid
//! normalizer 5 15
//! W1 60 64
//! <60 rows of 64 values>
//! b1 60
//! <60 values>
//! ...
//! ```
//!
//! Values carry 9 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::mlp::{Activation, InputNormalizer, MlpModel};
use crate::error::{Error, Result};
use crate::textfmt::fmt_sig;

const SIG: usize = 9;

fn join(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| fmt_sig(*v, SIG))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_model<W: Write>(model: &MlpModel, mut out: W) -> std::io::Result<()> {
    let dims: Vec<String> = model.dims().iter().map(|d| d.to_string()).collect();
    let n = model.normalizer();
    writeln!(out, "#fepmlp v1")?;
    writeln!(out, "dims {}", dims.join(" "))?;
    writeln!(out, "hidden {}", model.hidden_activation().as_str())?;
    writeln!(out, "output sigmoid")?;
    writeln!(
        out,
        "normalizer {} {}",
        fmt_sig(n.offset, SIG),
        fmt_sig(n.scale, SIG)
    )?;
    for l in 0..model.num_layers() {
        let (d_in, d_out) = (model.dims()[l], model.dims()[l + 1]);
        let (w, b) = model.layer(l);
        writeln!(out, "W{} {d_out} {d_in}", l + 1)?;
        for row in w.chunks(d_in) {
            writeln!(out, "{}", join(row))?;
        }
        writeln!(out, "b{} {d_out}", l + 1)?;
        writeln!(out, "{}", join(b))?;
    }
    out.flush()
}

struct Lines<I> {
    inner: I,
    line_no: usize,
}

impl<I: Iterator<Item = std::io::Result<String>>> Lines<I> {
    fn next_line(&mut self, what: &str) -> Result<String> {
        loop {
            self.line_no += 1;
            match self.inner.next() {
                Some(Ok(l)) if l.trim().is_empty() => continue,
                Some(Ok(l)) => return Ok(l),
                Some(Err(e)) => return Err(Error::parse(self.line_no, e.to_string())),
                None => {
                    return Err(Error::parse(
                        self.line_no,
                        format!("unexpected end of file, expected {what}"),
                    ))
                }
            }
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<String>> {
        let line = self.next_line(key)?;
        let mut tok = line.split_whitespace();
        if tok.next() != Some(key) {
            return Err(Error::parse(self.line_no, format!("expected `{key}`")));
        }
        Ok(tok.map(str::to_string).collect())
    }

    fn numbers(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let line = self.next_line(what)?;
        let vals = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(self.line_no, format!("bad number `{t}` in {what}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != count {
            return Err(Error::parse(
                self.line_no,
                format!("{what}: expected {count} values, found {}", vals.len()),
            ));
        }
        Ok(vals)
    }
}

pub fn read_model<R: BufRead>(input: R) -> Result<MlpModel> {
    let mut lines = Lines {
        inner: input.lines(),
        line_no: 0,
    };
    if lines.next_line("header")?.trim() != "#fepmlp v1" {
        return Err(Error::parse(lines.line_no, "expected `#fepmlp v1` header"));
    }
    let dims = lines
        .keyed("dims")?
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(lines.line_no, format!("bad dim `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let hidden_tok = lines.keyed("hidden")?;
    let hidden = hidden_tok
        .first()
        .and_then(|h| Activation::parse(h))
        .ok_or_else(|| Error::parse(lines.line_no, "unknown hidden activation"))?;
    if lines.keyed("output")?.first().map(String::as_str) != Some("sigmoid") {
        return Err(Error::parse(
            lines.line_no,
            "output activation must be sigmoid",
        ));
    }
    let norm = lines.keyed("normalizer")?;
    let nums: Vec<f64> = norm.iter().filter_map(|t| t.parse().ok()).collect();
    if nums.len() != 2 || norm.len() != 2 {
        return Err(Error::parse(
            lines.line_no,
            "normalizer needs `offset scale`",
        ));
    }
    let normalizer = InputNormalizer {
        offset: nums[0],
        scale: nums[1],
    };
    if dims.len() < 2 {
        return Err(Error::parse(2, "need at least two layer dims"));
    }

    let mut params = Vec::new();
    for l in 0..dims.len() - 1 {
        let (d_in, d_out) = (dims[l], dims[l + 1]);
        let wkey = format!("W{}", l + 1);
        let shape = lines.keyed(&wkey)?;
        if shape != [d_out.to_string(), d_in.to_string()] {
            return Err(Error::parse(
                lines.line_no,
                format!("{wkey} shape must be {d_out} {d_in}"),
            ));
        }
        for r in 0..d_out {
            params.extend(lines.numbers(d_in, &format!("{wkey} row {}", r + 1))?);
        }
        let bkey = format!("b{}", l + 1);
        if lines.keyed(&bkey)? != [d_out.to_string()] {
            return Err(Error::parse(
                lines.line_no,
                format!("{bkey} length must be {d_out}"),
            ));
        }
        params.extend(lines.numbers(d_out, &bkey)?);
    }
    MlpModel::from_parts(&dims, hidden, normalizer, params)
        .map_err(|e| Error::parse(lines.line_no, e.to_string()))
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(model, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(f)).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Data(format!("{}:{line}: {msg}", path.display())),
        other => other,
    })
}

impl MlpModel {
    /// Rounds every parameter to the 9 significant digits of the model
    /// file, so that a quantized model survives a save/load unchanged.
    pub fn quantized(&self) -> MlpModel {
        let mut q = self.clone();
        for p in q.params_mut() {
            *p = crate::textfmt::quantize_sig(*p, SIG);
        }
        q
    }
}
