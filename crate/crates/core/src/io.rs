//! Text formats: sampled functions as `t,re,im` CSV and Gram matrices as a
//! `k=<size>` header followed by rows of `re+imj` entries.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::separation::Gram;

/// 17 significant digits, enough to round-trip any f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_samples_csv<W: Write>(f: &SampledFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "re", "im"])?;
    for (t, v) in f.grid().points().zip(f.values()) {
        w.write_record([fmt_f64(t), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<SampledFunction> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["t", "re", "im"] {
        return Err(Error::Parse(format!(
            "expected header t,re,im, got {headers:?}"
        )));
    }
    let mut ts = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Parse("short row".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        };
        ts.push(num(0)?);
        values.push(Complex64::new(num(1)?, num(2)?));
    }
    if ts.len() < 2 {
        return Err(Error::Parse("need at least two samples".into()));
    }
    let n = ts.len();
    let dt = ts[1] - ts[0];
    let grid = Grid::new(dt * n as f64, n).map_err(|e| Error::Parse(e.to_string()))?;
    for (k, &t) in ts.iter().enumerate() {
        if (t - grid.point(k)).abs() > 1e-9 * dt.max(t.abs()) {
            return Err(Error::Parse(format!(
                "sample {k} at t = {t} is not on the centered grid (expected {})",
                grid.point(k)
            )));
        }
    }
    SampledFunction::from_values(grid, values)
}

pub fn save_samples_csv(f: &SampledFunction, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_samples_csv(f, std::io::BufWriter::new(file))
}

pub fn load_samples_csv(path: &Path) -> Result<SampledFunction> {
    read_samples_csv(std::fs::File::open(path)?)
}

fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", fmt_f64(z.re), sign, fmt_f64(z.im.abs()))
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let body = s
        .strip_suffix('j')
        .ok_or_else(|| Error::Parse(format!("complex entry {s:?} must end in j")))?;
    // the split is the last sign that is neither leading nor an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(|| Error::Parse(format!("complex entry {s:?} has no imaginary part")))?;
    let re = body[..split]
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    let im = body[split..]
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    Ok(Complex64::new(re, im))
}

pub fn write_gram_csv<W: Write>(gram: &Gram, mut out: W) -> Result<()> {
    let k = gram.nrows();
    writeln!(out, "k={k}")?;
    for i in 0..k {
        let row: Vec<String> = (0..k).map(|j| fmt_complex(gram[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_gram_csv<R: Read>(input: R) -> Result<Gram> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Gram file".into()))??;
    let k: usize = header
        .trim()
        .strip_prefix("k=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad Gram header {header:?}")))?;
    let mut gram = Gram::from_element(k, k, Complex64::new(0.0, 0.0));
    let mut rows = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if rows == k {
            return Err(Error::Parse(format!("more than {k} rows")));
        }
        let entries: Vec<&str> = line.split(',').collect();
        if entries.len() != k {
            return Err(Error::Parse(format!(
                "row {rows} has {} entries, expected {k}",
                entries.len()
            )));
        }
        for (j, e) in entries.iter().enumerate() {
            gram[(rows, j)] = parse_complex(e)?;
        }
        rows += 1;
    }
    if rows != k {
        return Err(Error::Parse(format!("expected {k} rows, got {rows}")));
    }
    Ok(gram)
}
