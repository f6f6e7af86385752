//! Byte-deterministic CSV emission and parsing.
//!
//! Floats are written with 17 significant digits in scientific notation,
//! which round-trips every f64 exactly and produces identical bytes across
//! runs and platforms. Comment lines start with '#'.

use std::str::FromStr;

use ulb_core::tprime::{Provenance, TSample, TTable};

use crate::errors::{CliError, CliResult};

/// 17-significant-digit scientific form, the canonical float encoding of
/// every CSV this tool writes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const TTABLE_HEADER: &str = "sigma,T,Tprime,b_final,n_final,newton_residual,provenance";

/// Render a T table with the documented column set.
pub fn ttable_to_csv(table: &TTable) -> String {
    let mut out = String::new();
    out.push_str(TTABLE_HEADER);
    out.push('\n');
    for s in table.samples() {
        out.push_str(&fmt_f64(s.sigma));
        out.push(',');
        out.push_str(&fmt_f64(s.t));
        out.push(',');
        out.push_str(&fmt_opt(s.tprime));
        out.push(',');
        out.push_str(&fmt_opt(s.b_final));
        out.push(',');
        if let Some(n) = s.n_final {
            out.push_str(&n.to_string());
        }
        out.push(',');
        out.push_str(&fmt_opt(s.newton_residual));
        out.push(',');
        out.push_str(&s.provenance.to_string());
        out.push('\n');
    }
    out
}

fn parse_field<T: FromStr>(field: &str, line_no: usize, name: &str) -> CliResult<T> {
    field.trim().parse().map_err(|_| {
        CliError::Io(format!("line {line_no}: cannot parse {name} from '{field}'"))
    })
}

fn parse_opt_f64(field: &str, line_no: usize, name: &str) -> CliResult<Option<f64>> {
    let t = field.trim();
    if t.is_empty() {
        Ok(None)
    } else {
        Ok(Some(parse_field(t, line_no, name)?))
    }
}

/// Parse a T table CSV. The header must carry the full column set; rows
/// with empty optional fields are allowed.
pub fn ttable_from_csv(text: &str) -> CliResult<TTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Io("empty table file".into()))?;
    if header.trim() != TTABLE_HEADER {
        return Err(CliError::Io(format!(
            "unexpected table header '{}' (want '{TTABLE_HEADER}')",
            header.trim()
        )));
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(CliError::Io(format!(
                "line {line_no}: expected 7 fields, got {}",
                fields.len()
            )));
        }
        let n_final = {
            let t = fields[4].trim();
            if t.is_empty() {
                None
            } else {
                Some(parse_field::<usize>(t, line_no, "n_final")?)
            }
        };
        samples.push(TSample {
            sigma: parse_field(fields[0], line_no, "sigma")?,
            t: parse_field(fields[1], line_no, "T")?,
            tprime: parse_opt_f64(fields[2], line_no, "Tprime")?,
            provenance: Provenance::from_str(fields[6].trim())
                .map_err(|e| CliError::Io(format!("line {line_no}: {e}")))?,
            b_final: parse_opt_f64(fields[3], line_no, "b_final")?,
            n_final,
            newton_residual: parse_opt_f64(fields[5], line_no, "newton_residual")?,
        });
    }
    if samples.is_empty() {
        return Err(CliError::Io("table has no data rows".into()));
    }
    TTable::new(samples).map_err(|e| CliError::Io(e.to_string()))
}

/// Generic numeric CSV: a header line, optional comment lines, then rows
/// of 17-digit floats.
pub fn columns_to_csv(header: &str, comments: &[String], columns: &[&[f64]]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(header);
    out.push('\n');
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        for (k, col) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(col[i]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_digit_scientific_and_round_trips() {
        assert_eq!(fmt_f64(0.085), "8.5000000000000006e-2");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-13.5), "-1.3500000000000000e1");
        for x in [0.1, std::f64::consts::PI, 2.0f64.sqrt(), 1e-11, -7.25e8] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn ttable_round_trips_through_csv() {
        let table = TTable::new(vec![
            TSample {
                sigma: 0.5,
                t: 0.777,
                tprime: Some(0.43),
                provenance: Provenance::Computed,
                b_final: Some(16.0),
                n_final: Some(135),
                newton_residual: Some(3.2e-15),
            },
            TSample::bare(1.0, 0.997, None, Provenance::Spline),
        ])
        .unwrap();
        let text = ttable_to_csv(&table);
        let back = ttable_from_csv(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.samples()[0].sigma.to_bits(), 0.5f64.to_bits());
        assert_eq!(back.samples()[0].n_final, Some(135));
        assert_eq!(back.samples()[1].tprime, None);
        assert_eq!(back.samples()[1].provenance, Provenance::Spline);
        // Re-rendering is byte-identical.
        assert_eq!(ttable_to_csv(&back), text);
    }

    #[test]
    fn bad_headers_and_rows_are_io_errors() {
        assert!(matches!(
            ttable_from_csv("sigma,T\n1,2\n"),
            Err(CliError::Io(_))
        ));
        assert!(matches!(
            ttable_from_csv(TTABLE_HEADER),
            Err(CliError::Io(_))
        ));
        let bad_row = format!("{TTABLE_HEADER}\nnot_a_number,1,,,,,computed\n");
        assert!(matches!(ttable_from_csv(&bad_row), Err(CliError::Io(_))));
    }
}
