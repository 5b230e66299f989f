//! Report serialization and plain-text rendering.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

use crate::run::ReportBody;

/// The report file: a deterministic body plus wall-clock timings, kept apart
/// so that two runs with the same seed have byte-identical bodies.
#[derive(Serialize)]
pub struct Report<'a> {
    pub body: &'a ReportBody,
    pub timing: BTreeMap<String, f64>,
}

pub fn to_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// One line per check: name, headline value, bracket and verdict.
pub fn summary(body: &ReportBody) -> String {
    let mut out = String::new();
    for c in &body.checks {
        let value = match (c.value, &c.error) {
            (Some(v), _) => format!("{v:.6e}"),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "-".into(),
        };
        let bracket = c
            .bracket
            .map(|[lo, hi]| format!(" in [{lo}, {hi}]"))
            .unwrap_or_default();
        let verdict = if c.passed { "ok" } else { "FAIL" };
        out.push_str(&format!("{:<12} {value}{bracket}  {verdict}\n", c.name));
    }
    for w in &body.provenance.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}

/// Renders a CSV file as a table with columns padded to equal width.
pub fn render_csv<R: Read>(reader: R) -> csv::Result<String> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .from_reader(reader);
    let rows: Vec<Vec<String>> = rdr
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_owned).collect()))
        .collect::<csv::Result<_>>()?;
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; ncols];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_columns_align() {
        let text = render_csv("a,bbb\nlong,1\n".as_bytes()).unwrap();
        assert_eq!(text, "a     bbb\nlong  1\n");
    }
}
