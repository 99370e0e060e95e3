//! JSON file formats and canonical serialization.
//!
//! Formats (all UTF-8 JSON, one object per file):
//! - channel: `{"input": n, "output": m, "rows": [[...], ...]}` with one row
//!   per input symbol;
//! - binary operation: `{"size": n, "table": [[...], ...]}`;
//! - measure: `{"alphabet": n, "atoms": [{"posterior": [...], "weight": w}, ...]}`,
//!   always written canonical.
//!
//! Writers are canonical: keys in a fixed (sorted) order, floats rendered
//! with 17 significant digits so every value round-trips bit-exactly, no
//! whitespace, one trailing newline. Parsing rejects non-finite numbers and
//! names the offending row on shape errors.

use serde::Deserialize;

use crate::channel::Channel;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::measure::BlackwellMeasure;
use crate::ops::BinaryOp;

#[derive(Deserialize)]
struct ChannelFile {
    input: usize,
    output: usize,
    rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct BinaryOpFile {
    size: usize,
    table: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct MeasureFile {
    alphabet: usize,
    atoms: Vec<MeasureAtomFile>,
}

#[derive(Deserialize)]
struct MeasureAtomFile {
    posterior: Vec<f64>,
    weight: f64,
}

fn reject_nonfinite(values: &[f64], what: &str) -> Result<()> {
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parse(format!(
            "{what} contains a non-finite number at position {idx}"
        )));
    }
    Ok(())
}

/// Parses a channel file, checking the declared shape against the rows.
pub fn parse_channel(text: &str) -> Result<Channel> {
    let file: ChannelFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel file: {e}")))?;
    if file.rows.len() != file.input {
        return Err(Error::Parse(format!(
            "channel file declares {} inputs but has {} rows",
            file.input,
            file.rows.len()
        )));
    }
    for (i, row) in file.rows.iter().enumerate() {
        if row.len() != file.output {
            return Err(Error::Parse(format!(
                "channel file row {i} has {} entries, expected {}",
                row.len(),
                file.output
            )));
        }
        reject_nonfinite(row, &format!("channel file row {i}"))?;
    }
    Channel::from_rows(&file.rows)
}

/// Canonical serialization of a channel.
pub fn write_channel(w: &Channel) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{{\"input\":{},\"output\":{},\"rows\":[",
        w.input_size(),
        w.output_size()
    ));
    for x in 0..w.input_size() {
        if x > 0 {
            out.push(',');
        }
        push_float_array(&mut out, w.row(x));
    }
    out.push_str("]}\n");
    out
}

/// Parses a binary-operation file; the table is validated for
/// uniformity preservation.
pub fn parse_binary_op(text: &str) -> Result<BinaryOp> {
    let file: BinaryOpFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("operation file: {e}")))?;
    if file.table.len() != file.size {
        return Err(Error::Parse(format!(
            "operation file declares size {} but has {} rows",
            file.size,
            file.table.len()
        )));
    }
    for (i, row) in file.table.iter().enumerate() {
        if row.len() != file.size {
            return Err(Error::Parse(format!(
                "operation file row {i} has {} entries, expected {}",
                row.len(),
                file.size
            )));
        }
    }
    BinaryOp::from_table(&file.table)
}

/// Canonical serialization of a binary operation.
pub fn write_binary_op(op: &BinaryOp) -> String {
    let mut out = format!("{{\"size\":{},\"table\":[", op.size());
    for a in 0..op.size() {
        if a > 0 {
            out.push(',');
        }
        out.push('[');
        for b in 0..op.size() {
            if b > 0 {
                out.push(',');
            }
            out.push_str(&op.apply(a, b).to_string());
        }
        out.push(']');
    }
    out.push_str("]}\n");
    out
}

/// Parses a measure file and canonicalizes its atoms.
pub fn parse_measure(text: &str) -> Result<BlackwellMeasure> {
    let file: MeasureFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("measure file: {e}")))?;
    let mut raw = Vec::with_capacity(file.atoms.len());
    for (i, atom) in file.atoms.iter().enumerate() {
        if atom.posterior.len() != file.alphabet {
            return Err(Error::Parse(format!(
                "measure file atom {i} has a posterior of length {}, expected {}",
                atom.posterior.len(),
                file.alphabet
            )));
        }
        reject_nonfinite(&atom.posterior, &format!("measure file atom {i}"))?;
        if !atom.weight.is_finite() {
            return Err(Error::Parse(format!(
                "measure file atom {i} has a non-finite weight"
            )));
        }
        raw.push((Distribution::new(atom.posterior.clone())?, atom.weight));
    }
    BlackwellMeasure::from_atoms(file.alphabet, raw)
}

/// Canonical serialization of a measure (atoms are already canonical).
pub fn write_measure(m: &BlackwellMeasure) -> String {
    let mut out = format!("{{\"alphabet\":{},\"atoms\":[", m.alphabet_size());
    for (i, atom) in m.atoms().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"posterior\":");
        push_float_array(&mut out, atom.posterior().weights());
        out.push_str(&format!(",\"weight\":{}}}", canonical_float(atom.weight())));
    }
    out.push_str("]}\n");
    out
}

fn push_float_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&canonical_float(v));
    }
    out.push(']');
}

/// 17 significant digits in scientific notation: enough to reproduce any
/// f64 bit-exactly on re-parse.
pub fn canonical_float(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Renders `x` with the given number of significant digits, preferring plain
/// decimal notation for moderate exponents. Used for display output.
pub fn format_significant(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let neg = x < 0.0;
    let rendered = format!("{:.*e}", sig - 1, x.abs());
    let (mantissa, exp) = rendered
        .split_once('e')
        .expect("scientific formatting always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp < -4 || exp >= sig as i32 + 4 {
        let head = &digits[..1];
        let tail = digits[1..].trim_end_matches('0');
        if tail.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{tail}e{exp}")
        }
    } else if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        let tail = digits.trim_end_matches('0');
        format!("0.{zeros}{tail}")
    } else {
        let point = exp as usize + 1;
        if point >= digits.len() {
            let pad = "0".repeat(point - digits.len());
            format!("{digits}{pad}")
        } else {
            let tail = digits[point..].trim_end_matches('0');
            if tail.is_empty() {
                digits[..point].to_string()
            } else {
                format!("{}.{tail}", &digits[..point])
            }
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;

    #[test]
    fn channel_file_round_trips_byte_identically() {
        let w = Channel::binary_symmetric(0.11).unwrap();
        let text = write_channel(&w);
        let reparsed = parse_channel(&text).unwrap();
        assert_eq!(w, reparsed);
        assert_eq!(text, write_channel(&reparsed));

        let w = random_channel(3, 5, 99);
        let text = write_channel(&w);
        assert_eq!(text, write_channel(&parse_channel(&text).unwrap()));
    }

    #[test]
    fn channel_parse_names_the_bad_row() {
        let text = r#"{"input":2,"output":2,"rows":[[1.0,0.0],[0.5]]}"#;
        let err = parse_channel(text).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("row 1")));

        let text = r#"{"input":3,"output":2,"rows":[[1.0,0.0],[0.5,0.5]]}"#;
        assert!(parse_channel(text).is_err());
    }

    #[test]
    fn channel_parse_rejects_nonfinite() {
        // JSON itself has no NaN/Infinity literals; serde_json reports them
        // as syntax errors, which we surface as parse errors.
        assert!(parse_channel(r#"{"input":1,"output":2,"rows":[[NaN,1.0]]}"#).is_err());
        assert!(parse_channel(r#"{"input":1,"output":2,"rows":[[Infinity,0.0]]}"#).is_err());
        assert!(parse_channel(r#"{"input":1,"output":2,"rows":[[1e999,0.0]]}"#).is_err());
    }

    #[test]
    fn binary_op_round_trip() {
        let op = BinaryOp::modular_add(3);
        let text = write_binary_op(&op);
        assert_eq!(op, parse_binary_op(&text).unwrap());
        assert_eq!(text, write_binary_op(&parse_binary_op(&text).unwrap()));
        assert!(parse_binary_op(r#"{"size":2,"table":[[0,0],[0,1]]}"#).is_err());
    }

    #[test]
    fn measure_round_trip() {
        let m = BlackwellMeasure::from_channel(&random_channel(2, 4, 7));
        let text = write_measure(&m);
        let reparsed = parse_measure(&text).unwrap();
        assert_eq!(text, write_measure(&reparsed));
        assert!(crate::measure::measures_equal(&m, &reparsed).unwrap());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(0.5, 12), "0.5");
        assert_eq!(format_significant(-0.5, 3), "-0.5");
        assert_eq!(format_significant(0.3466318436412792, 12), "0.346631843641");
        assert_eq!(format_significant(3.0f64.ln(), 12), "1.09861228867");
        assert_eq!(format_significant(1e-9, 12), "1e-9");
        assert_eq!(format_significant(1.25e-7, 3), "1.25e-7");
        assert_eq!(format_significant(123456.0, 12), "123456");
        assert_eq!(format_significant(2.0, 12), "2");
    }

    #[test]
    fn canonical_float_reparses_exactly() {
        for &x in &[0.11, 1.0 / 3.0, 2.0f64.ln(), f64::MIN_POSITIVE, 1e300] {
            let s = canonical_float(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(x, y);
        }
    }
}
