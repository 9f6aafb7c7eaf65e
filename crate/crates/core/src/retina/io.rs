use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::field::ScalarField;
use super::orientation::OrientationLift;
use crate::error::{Error, Result};

/// Binary PGM (`P5`) of the field, linearly mapping `[lo, hi]` (the declared
/// bounds, else the value range) onto `0..=maxval`; 16-bit samples are
/// big-endian. Row 0 is the top image row.
pub fn pgm_bytes(field: &ScalarField, sixteen_bit: bool) -> Vec<u8> {
    let maxval: u32 = if sixteen_bit { 65535 } else { 255 };
    let (lo, hi) = field.bounds().unwrap_or_else(|| field.range());
    let scale = if hi > lo { maxval as f64 / (hi - lo) } else { 0.0 };
    let mut out = format!("P5\n{} {}\n{maxval}\n", field.width(), field.height()).into_bytes();
    for &v in field.values() {
        let q = ((v - lo) * scale).round().clamp(0.0, maxval as f64) as u32;
        if sixteen_bit {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    out
}

pub fn write_pgm(field: &ScalarField, path: &Path, sixteen_bit: bool) -> Result<()> {
    fs::write(path, pgm_bytes(field, sixteen_bit)).map_err(|e| Error::io(path, e))
}

/// Parses `P5` (8- or 16-bit) or `P2` PGM into a field with values
/// `sample / maxval`, spacing 1 and bounds `[0, 1]`.
pub fn parse_pgm(bytes: &[u8], path: &Path) -> Result<ScalarField> {
    let fmt = |detail: &str| Error::Format {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    let mut pos = 0;
    let mut token = || -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token().ok_or_else(|| fmt("empty PGM"))?;
    let mut num = |what: &str| -> Result<usize> {
        token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| fmt(&format!("bad PGM header field {what}")))
    };
    let (w, h, maxval) = (num("width")?, num("height")?, num("maxval")?);
    if w == 0 || h == 0 || maxval == 0 || maxval > 65535 {
        return Err(fmt("PGM dimensions or maxval out of range"));
    }
    let count = w * h;
    let samples: Vec<u32> = match magic.as_str() {
        "P5" => {
            let data = &bytes[(pos + 1).min(bytes.len())..];
            let bps = if maxval > 255 { 2 } else { 1 };
            if data.len() < count * bps {
                return Err(Error::Truncated {
                    path: path.to_path_buf(),
                    detail: format!("{} pixel bytes for {w}x{h}", data.len()),
                });
            }
            if bps == 2 {
                data.chunks_exact(2).take(count).map(|c| u16::from_be_bytes([c[0], c[1]]) as u32).collect()
            } else {
                data[..count].iter().map(|&b| b as u32).collect()
            }
        }
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[pos..]);
            let s: Vec<u32> = text
                .split_ascii_whitespace()
                .map(|t| t.parse().map_err(|_| fmt("bad P2 sample")))
                .collect::<Result<_>>()?;
            if s.len() < count {
                return Err(Error::Truncated {
                    path: path.to_path_buf(),
                    detail: format!("{} samples for {w}x{h}", s.len()),
                });
            }
            s
        }
        other => return Err(fmt(&format!("unsupported PGM magic {other:?}"))),
    };
    if samples.iter().any(|&s| s > maxval as u32) {
        return Err(fmt("PGM sample exceeds maxval"));
    }
    let values = samples.iter().take(count).map(|&s| s as f64 / maxval as f64).collect();
    ScalarField::new(w, h, 1.0, values)?.with_bounds(0.0, 1.0)
}

pub fn read_pgm(path: &Path) -> Result<ScalarField> {
    parse_pgm(&fs::read(path).map_err(|e| Error::io(path, e))?, path)
}

/// One CSV line per grid row, values in shortest round-trip form.
pub fn field_csv(field: &ScalarField) -> String {
    let mut s = String::new();
    for i in 0..field.height() {
        for j in 0..field.width() {
            if j > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", field.get(i, j));
        }
        s.push('\n');
    }
    s
}

pub fn write_field_csv(field: &ScalarField, path: &Path) -> Result<()> {
    fs::write(path, field_csv(field)).map_err(|e| Error::io(path, e))
}

/// Inverse of [`field_csv`]; every row must have the same length.
pub fn parse_field_csv(text: &str, spacing: f64, path: &Path) -> Result<ScalarField> {
    let fmt = |detail: String| Error::Format {
        path: path.to_path_buf(),
        detail,
    };
    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| fmt(format!("line {}: bad number {t:?}", n + 1))))
            .collect::<Result<_>>()?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(fmt(format!("line {}: ragged row", n + 1)));
        }
        values.extend(row);
        height += 1;
    }
    ScalarField::new(width.unwrap_or(0), height, spacing, values)
}

pub fn read_field_csv(path: &Path, spacing: f64) -> Result<ScalarField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field_csv(&text, spacing, path)
}

pub fn lift_csv(lift: &OrientationLift) -> String {
    let mut s = String::from("x,y,theta\n");
    for (x, y, t) in &lift.points {
        let _ = writeln!(s, "{x},{y},{t}");
    }
    s
}

pub fn write_lift_csv(lift: &OrientationLift, path: &Path) -> Result<()> {
    fs::write(path, lift_csv(lift)).map_err(|e| Error::io(path, e))
}
