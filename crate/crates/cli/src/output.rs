//! Locale-independent number formatting and output sinks.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::value::RawValue;

/// Seventeen significant digits in scientific notation; round-trips every `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// [`fmt_num`] as a JSON number; non-finite values become `null`.
pub fn json_num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { fmt_num(x) } else { "null".into() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn json_opt(x: Option<f64>) -> Option<Box<RawValue>> {
    x.filter(|v| v.is_finite()).map(json_num)
}

/// Writes one CSV row terminated by LF.
pub fn write_row<I, S>(out: &mut dyn Write, fields: I) -> io::Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut first = true;
    for f in fields {
        if !first {
            out.write_all(b",")?;
        }
        out.write_all(f.as_ref().as_bytes())?;
        first = false;
    }
    out.write_all(b"\n")
}

/// Buffered writer to `path`, or to standard output when absent.
pub fn open_sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatted_numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5e-324, f64::MAX, -2.5, 0.0, 1.0 - f64::EPSILON] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let j: f64 = serde_json::from_str(json_num(x).get()).unwrap();
            assert_eq!(j.to_bits(), x.to_bits());
        }
        assert_eq!(fmt_num(0.25), "2.5000000000000000e-1");
        assert_eq!(json_num(f64::NAN).get(), "null");
    }

    #[test]
    fn rows_use_commas_and_lf() {
        let mut buf = Vec::new();
        write_row(&mut buf, ["a", "b"]).unwrap();
        write_row(&mut buf, [fmt_num(1.5)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.5000000000000000e0\n");
    }
}
