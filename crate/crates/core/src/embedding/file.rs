//! Plain-text embedding file:
//!
//! ```text
//! #dim=3<TAB>kind=document
//! rec1<TAB>0.1<TAB>0.2<TAB>0.3
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{EmbeddingError, EmbeddingKind, EmbeddingMatrix};

/// Formats like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn parse_embeddings(text: &str) -> Result<EmbeddingMatrix, EmbeddingError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(EmbeddingError::FormatError {
        line: 1,
        reason: "missing header".to_string(),
    })?;
    let header = header.trim_start_matches('\u{feff}').trim_end_matches('\r');
    let (dim, kind) = parse_header(header)?;

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let id = fields.next().unwrap_or_default().to_string();
        if id.is_empty() {
            return Err(EmbeddingError::FormatError {
                line: lineno,
                reason: "empty id".to_string(),
            });
        }
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: dim,
                got: values.len(),
                line: lineno,
            });
        }
        let mut row = Vec::with_capacity(dim);
        for v in values {
            let x: f64 = v.trim().parse().map_err(|_| EmbeddingError::FormatError {
                line: lineno,
                reason: format!("`{v}` is not a number"),
            })?;
            if !x.is_finite() {
                return Err(EmbeddingError::NonFiniteValue { line: lineno });
            }
            row.push(x);
        }
        if !seen.insert(id.clone()) {
            return Err(EmbeddingError::DuplicateId(id));
        }
        ids.push(id);
        rows.push(row);
    }
    EmbeddingMatrix::new(ids, rows, dim, kind)
}

fn parse_header(header: &str) -> Result<(usize, EmbeddingKind), EmbeddingError> {
    let bad = |reason: &str| EmbeddingError::FormatError {
        line: 1,
        reason: reason.to_string(),
    };
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| bad("header must start with `#dim=`"))?;
    let mut dim = None;
    let mut kind = None;
    for part in body.split('\t') {
        match part.split_once('=') {
            Some(("dim", v)) => dim = Some(v.trim().parse::<usize>().map_err(|_| bad("invalid dim"))?),
            Some(("kind", v)) => kind = Some(v.trim().parse::<EmbeddingKind>().map_err(|e| bad(&e))?),
            _ => return Err(bad("unrecognized header field")),
        }
    }
    let dim = dim.filter(|d| *d >= 1).ok_or_else(|| bad("missing or zero dim"))?;
    Ok((dim, kind.ok_or_else(|| bad("missing kind"))?))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix, EmbeddingError> {
    parse_embeddings(&fs::read_to_string(path)?)
}

pub fn write_embeddings<W: Write>(m: &EmbeddingMatrix, mut w: W) -> std::io::Result<()> {
    writeln!(w, "#dim={}\tkind={}", m.dim(), m.kind())?;
    for (id, row) in m.ids().iter().zip(m.rows()) {
        w.write_all(id.as_bytes())?;
        for v in row {
            write!(w, "\t{}", format_sig9(*v))?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_embeddings(m: &EmbeddingMatrix, path: &Path) -> Result<(), EmbeddingError> {
    let mut buf = Vec::new();
    write_embeddings(m, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf() {
        // Expected strings from C printf("%.9g").
        let cases = [
            (0.1, "0.1"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (123456789.0, "123456789"),
            (1234567891.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (1.0 / 3.0, "0.333333333"),
            (9.9999999999, "10"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "{x}");
            let back: f64 = want.parse().unwrap();
            assert!((back - x).abs() <= x.abs() * 1e-8);
        }
    }

    #[test]
    fn two_rows_under_dim3() {
        let m = parse_embeddings("#dim=3\tkind=document\na\t1\t2\t3\nb\t4\t5\t6\n").unwrap();
        assert_eq!((m.len(), m.dim()), (2, 3));
        assert_eq!(m.row(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(
            parse_embeddings("#dim=3\tkind=word\na\t1\t2\n"),
            Err(EmbeddingError::DimensionMismatch {
                expected: 3,
                got: 2,
                line: 2
            })
        ));
        assert!(matches!(
            parse_embeddings("#dim=1\tkind=word\na\t1\na\t2\n"),
            Err(EmbeddingError::DuplicateId(id)) if id == "a"
        ));
        assert!(matches!(
            parse_embeddings("#dim=1\tkind=word\na\tinf\n"),
            Err(EmbeddingError::NonFiniteValue { line: 2 })
        ));
        assert!(matches!(
            parse_embeddings("#dim=1\tkind=word\na\tx\n"),
            Err(EmbeddingError::FormatError { line: 2, .. })
        ));
        assert!(parse_embeddings("dim=1\n").is_err());
        assert!(parse_embeddings("").is_err());
    }

    #[test]
    fn save_load_is_byte_identical() {
        let text = "#dim=2\tkind=word\nvirus\t0.123456789\t-1e-07\nplastic_waste\t3\t1.5e+10\n";
        let m = parse_embeddings(text).unwrap();
        let mut out = Vec::new();
        write_embeddings(&m, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
