use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::model::GWSpec;
use crate::numeric::sci;

/// One row of a curve: abscissa, value, optional reference and standard
/// error, and a free-form note (empty when nothing to flag).
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub x: f64,
    pub value: f64,
    pub reference: Option<f64>,
    pub std_err: Option<f64>,
    pub note: String,
}

impl CurveRow {
    pub fn new(x: f64, value: f64) -> Self {
        Self { x, value, reference: None, std_err: None, note: String::new() }
    }

    pub fn with_reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn with_std_err(mut self, s: f64) -> Self {
        self.std_err = Some(s);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// A labelled series of rows sorted by abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub label: String,
    rows: Vec<CurveRow>,
}

/// Provenance recorded at the top of every CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvHeader {
    pub config_digest: String,
    pub seed: Option<u64>,
    pub method: String,
    /// Extra `key=value` pairs such as tolerances in force.
    pub extra: Vec<(String, String)>,
}

impl CurveSeries {
    pub fn new(label: impl Into<String>, mut rows: Vec<CurveRow>) -> Self {
        rows.sort_by(|a, b| a.x.total_cmp(&b.x));
        Self { label: label.into(), rows }
    }

    pub fn rows(&self) -> &[CurveRow] {
        &self.rows
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn to_csv(&self, header: &CsvHeader) -> String {
        let mut out = String::new();
        writeln!(out, "# label={}", self.label).unwrap();
        writeln!(out, "# config_sha256={}", header.config_digest).unwrap();
        match header.seed {
            Some(s) => writeln!(out, "# seed={s}").unwrap(),
            None => writeln!(out, "# seed=none").unwrap(),
        }
        writeln!(out, "# method={}", header.method).unwrap();
        for (k, v) in &header.extra {
            writeln!(out, "# {k}={v}").unwrap();
        }
        writeln!(out, "x,value,reference,std_err,note").unwrap();
        let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", sci(r.x), sci(r.value), opt(r.reference), opt(r.std_err), r.note)
                .unwrap();
        }
        out
    }
}

/// Hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a canonical text rendering of the model (labels, root law and
/// every kernel entry at full precision).
pub fn spec_digest(spec: &GWSpec) -> String {
    let mut text = String::new();
    writeln!(text, "types {}", spec.alphabet().labels().join(" ")).unwrap();
    let root: Vec<String> = spec.root_dist().iter().map(|&p| sci(p)).collect();
    writeln!(text, "root {}", root.join(" ")).unwrap();
    for (a, row) in spec.kernel().rows().iter().enumerate() {
        for (c, p) in row {
            writeln!(text, "q {a} {c} {}", sci(*p)).unwrap();
        }
    }
    sha256_hex(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_sorted_and_rendered() {
        let s = CurveSeries::new("t", vec![CurveRow::new(2.0, 0.5), CurveRow::new(1.0, 0.25).with_reference(0.1)]);
        assert_eq!(s.rows()[0].x, 1.0);
        let csv = s.to_csv(&CsvHeader { config_digest: "abc".into(), seed: Some(7), method: "exact".into(), extra: vec![] });
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "# config_sha256=abc");
        assert_eq!(lines[4], "x,value,reference,std_err,note");
        assert!(lines[5].starts_with("1.00000000000000000e0,2.50000000000000000e-1,1.0"));
    }

    #[test]
    fn digest_is_known() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
