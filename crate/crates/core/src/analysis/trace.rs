//! Two-column `(T_us, P)` traces in plain delimited text.
//!
//! Fields may be separated by commas, semicolons, tabs or spaces. Everything
//! after `#` is a comment. A single non-numeric line before the first data
//! row is accepted as a header.

use crate::error::{Error, Result};

pub fn parse_trace(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: Vec<Option<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        if rows.is_empty() && !header_seen && parsed.iter().all(Option::is_none) {
            header_seen = true;
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::Trace {
                line: line_no,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        match (parsed[0], parsed[1]) {
            (Some(t), Some(p)) if t.is_finite() && p.is_finite() => rows.push((t, p)),
            _ => {
                return Err(Error::Trace {
                    line: line_no,
                    message: format!("cannot parse '{content}' as two numbers"),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_csv_with_header_and_comments() {
        let text = "# generated\nT_us,P\n48,0.25\n48.1, 0.5 # note\n\n48.2\t0.75\n";
        assert_eq!(
            parse_trace(text).unwrap(),
            vec![(48.0, 0.25), (48.1, 0.5), (48.2, 0.75)]
        );
    }

    #[test]
    fn whitespace_and_semicolons() {
        assert_eq!(
            parse_trace("1 2\n3;4\n").unwrap(),
            vec![(1.0, 2.0), (3.0, 4.0)]
        );
    }

    #[test]
    fn reports_bad_line() {
        match parse_trace("T,P\n1,2\n3,x\n") {
            Err(Error::Trace { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_trace("1,2,3\n") {
            Err(Error::Trace { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        // a second header-like line is an error
        assert!(matches!(
            parse_trace("T,P\nT,P\n1,2\n"),
            Err(Error::Trace { line: 2, .. })
        ));
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_trace(""), Err(Error::EmptyTrace));
        assert_eq!(parse_trace("# nothing\nT_us,P\n"), Err(Error::EmptyTrace));
    }
}
