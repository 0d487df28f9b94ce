//! Spectrum CSV: `# key=value` metadata lines, a `frequency_hz,power_dbm`
//! header, then one row per bin.

use std::io::{Read, Write};
use std::path::Path;

use super::{keys, Spectrum};
use crate::error::{Error, Result};

const HEADER: [&str; 2] = ["frequency_hz", "power_dbm"];

/// Shortest round-trip text for a float, in exponent form when the plain
/// form would be long.
pub(crate) fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-3..1e9).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn write_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_spectrum_to(std::io::BufWriter::new(file), s).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn write_spectrum_to<W: Write>(mut w: W, s: &Spectrum) -> Result<()> {
    let io_err = |e| Error::io("<spectrum>", e);
    let mut meta = s.metadata.clone();
    meta.insert(keys::RBW.into(), format_f64(s.rbw));
    meta.insert(keys::F_START.into(), format_f64(s.f_start));
    meta.insert(keys::F_STEP.into(), format_f64(s.f_step));
    for (k, v) in &meta {
        writeln!(w, "# {k}={v}").map_err(io_err)?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(HEADER).map_err(|e| io_err(e.into()))?;
    for (i, p) in s.powers.iter().enumerate() {
        csv.write_record([format_f64(s.frequency(i)), format_f64(*p)])
            .map_err(|e| io_err(e.into()))?;
    }
    csv.flush().map_err(io_err)
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_spectrum_from(file, path)
}

pub fn read_spectrum_from<R: Read>(mut r: R, name: &Path) -> Result<Spectrum> {
    let mut text = String::new();
    r.read_to_string(&mut text)
        .map_err(|e| Error::io(name, e))?;
    let parse_err = |line: u64, message: String| Error::Parse {
        file: name.to_path_buf(),
        line,
        message,
    };

    let mut metadata = std::collections::BTreeMap::new();
    let mut body_start = 0;
    let mut meta_lines = 0u64;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.trim_start().strip_prefix('#') else {
            break;
        };
        meta_lines += 1;
        body_start += line.len();
        let rest = rest.trim();
        if rest.is_empty() {
            continue;
        }
        let (k, v) = rest
            .split_once('=')
            .ok_or_else(|| parse_err(meta_lines, format!("expected key=value, got {rest:?}")))?;
        metadata.insert(k.trim().to_string(), v.trim().to_string());
    }

    let missing: Vec<String> = [keys::RBW, keys::F_START, keys::F_STEP]
        .iter()
        .filter(|k| !metadata.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMetadata(missing));
    }
    let num = |key: &str| -> Result<f64> {
        let line = 1 + metadata.keys().position(|k| k == key).unwrap_or(0) as u64;
        metadata[key]
            .parse::<f64>()
            .map_err(|e| parse_err(line, format!("{key}: {e}")))
    };
    let (rbw, f_start, f_step) = (num(keys::RBW)?, num(keys::F_START)?, num(keys::F_STEP)?);

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(&text.as_bytes()[body_start..]);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(meta_lines + 1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(parse_err(
            meta_lines + 1,
            format!("expected header `{}`", HEADER.join(",")),
        ));
    }
    let mut powers = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(meta_lines + line, e.to_string())
        })?;
        let line = meta_lines + record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 columns, got {}", record.len()),
            ));
        }
        let field = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("{}: {e}", HEADER[i])))
        };
        let (f, p) = (field(0)?, field(1)?);
        let expected = f_start + f_step * powers.len() as f64;
        if (f - expected).abs() > 1e-3 * f_step {
            return Err(parse_err(
                line,
                format!("frequency {f} Hz off the grid (expected {expected} Hz)"),
            ));
        }
        powers.push(p);
    }
    let mut s = Spectrum::new(f_start, f_step, rbw, powers)
        .map_err(|e| parse_err(meta_lines + 1, e.to_string()))?;
    s.metadata = metadata;
    Ok(s)
}
