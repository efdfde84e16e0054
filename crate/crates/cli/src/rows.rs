//! CSV rows for certificate and numerical result files.

use std::io::{Read, Write};

use csv::{QuoteStyle, ReaderBuilder, WriterBuilder};
use rankone_core::bounds::{PlantSpec, ProblemShape};
use rankone_core::certify::Certificate;
use rankone_core::recover::RecoveryResult;
use rankone_core::Error;

use crate::CliError;

/// Shortest decimal that parses back to the same `f64`, switching to
/// exponent form outside `[1e-4, 1e16)`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 || (1e-4..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateRow {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub seed: u64,
    pub det: u64,
    pub rm_rows: Vec<usize>,
}

impl CertificateRow {
    pub fn from_certificate(c: &Certificate) -> Self {
        Self {
            m: c.shape.m(),
            n: c.shape.n(),
            r: c.spec.r(),
            s: c.spec.s(),
            seed: c.seed,
            det: c.det_mod_p,
            rm_rows: c.rm_rows.clone(),
        }
    }

    pub fn to_certificate(&self, p: u64, symmetric: bool) -> rankone_core::Result<Certificate> {
        Ok(Certificate {
            shape: ProblemShape::new(self.m, self.n, symmetric)?,
            spec: PlantSpec::new(self.s, self.r)?,
            seed: self.seed,
            p,
            det_mod_p: self.det,
            rm_rows: self.rm_rows.clone(),
        })
    }

    fn sort_key(&self) -> (usize, usize, usize, usize) {
        (self.m, self.n, self.s, self.r)
    }
}

pub fn certificate_header(p: u64) -> String {
    format!("m,n,R,s,seed,det_mod{p},rm_rows")
}

/// `[0 3 7]`.
pub fn fmt_rm_rows(rows: &[usize]) -> String {
    let inner: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
    format!("[{}]", inner.join(" "))
}

/// Accepts space- or comma-separated lists, with or without brackets.
pub fn parse_rm_rows(s: &str) -> Result<Vec<usize>, CliError> {
    let t = s.trim();
    let t = t.strip_prefix('[').unwrap_or(t);
    let t = t.strip_suffix(']').unwrap_or(t);
    t.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(|w| w.parse().map_err(|_| schema(format!("bad rm_rows entry {w:?}"))))
        .collect()
}

fn schema(msg: String) -> CliError {
    CliError::Core(Error::Schema(msg))
}

/// Writes rows sorted by `(m, n, s, R)`; `rm_rows` is always quoted.
pub fn write_certificates<W: Write>(mut w: W, p: u64, rows: &[CertificateRow]) -> Result<(), CliError> {
    writeln!(w, "{}", certificate_header(p))?;
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(CertificateRow::sort_key);
    let mut out = WriterBuilder::new()
        .has_headers(false)
        .quote_style(QuoteStyle::NonNumeric)
        .from_writer(w);
    for row in &sorted {
        out.write_record([
            row.m.to_string(),
            row.n.to_string(),
            row.r.to_string(),
            row.s.to_string(),
            row.seed.to_string(),
            row.det.to_string(),
            fmt_rm_rows(&row.rm_rows),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Returns the modulus named in the header and the rows.
pub fn read_certificates<R: Read>(r: R) -> Result<(u64, Vec<CertificateRow>), CliError> {
    let mut reader = ReaderBuilder::new().from_reader(r);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let p = headers
        .get(5)
        .and_then(|h| h.strip_prefix("det_mod"))
        .and_then(|q| q.parse::<u64>().ok())
        .ok_or_else(|| schema(format!("header {headers:?} lacks det_mod<p>")))?;
    if headers.join(",") != certificate_header(p) {
        return Err(schema(format!(
            "expected header {}, got {}",
            certificate_header(p),
            headers.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let num = |i: usize| -> Result<u64, CliError> {
            rec.get(i)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| schema(format!("line {line}: bad field {}", headers[i])))
        };
        rows.push(CertificateRow {
            m: num(0)? as usize,
            n: num(1)? as usize,
            r: num(2)? as usize,
            s: num(3)? as usize,
            seed: num(4)?,
            det: num(5)?,
            rm_rows: parse_rm_rows(rec.get(6).unwrap_or(""))?,
        });
    }
    Ok((p, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericalRow {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub seed: u64,
    pub ker_dim: usize,
    pub decomp_error: f64,
    pub s_val: f64,
    /// Empty when nothing was planted.
    pub w: Option<f64>,
}

pub const NUMERICAL_HEADER: &str = "m,n,R,s,seed,ker_dim,decomp_error,s_val,w";

impl NumericalRow {
    pub fn new(shape: &ProblemShape, spec: &PlantSpec, seed: u64, res: &RecoveryResult) -> Self {
        Self {
            m: shape.m(),
            n: shape.n(),
            r: spec.r(),
            s: spec.s(),
            seed,
            ker_dim: res.ker_dim,
            decomp_error: res.decomp_error,
            s_val: res.s_val,
            w: res.w,
        }
    }

    fn fields(&self) -> [String; 9] {
        [
            self.m.to_string(),
            self.n.to_string(),
            self.r.to_string(),
            self.s.to_string(),
            self.seed.to_string(),
            self.ker_dim.to_string(),
            fmt_float(self.decomp_error),
            fmt_float(self.s_val),
            self.w.map(fmt_float).unwrap_or_default(),
        ]
    }
}

/// Writes rows in the given order.
pub fn write_numerical<W: Write>(mut w: W, rows: &[NumericalRow]) -> Result<(), CliError> {
    writeln!(w, "{NUMERICAL_HEADER}")?;
    let mut out = WriterBuilder::new().has_headers(false).from_writer(w);
    for row in rows {
        out.write_record(row.fields())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_numerical<R: Read>(r: R) -> Result<Vec<NumericalRow>, CliError> {
    let mut reader = ReaderBuilder::new().from_reader(r);
    let headers = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if headers != NUMERICAL_HEADER {
        return Err(schema(format!("expected header {NUMERICAL_HEADER}, got {headers}")));
    }
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let field = |i: usize| rec.get(i).unwrap_or("").trim().to_owned();
        let bad = |i: usize| schema(format!("line {line}: bad field {i}"));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let float = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        rows.push(NumericalRow {
            m: int(0)? as usize,
            n: int(1)? as usize,
            r: int(2)? as usize,
            s: int(3)? as usize,
            seed: int(4)?,
            ker_dim: int(5)? as usize,
            decomp_error: float(6)?,
            s_val: float(7)?,
            w: if field(8).is_empty() { None } else { Some(float(8)?) },
        });
    }
    Ok(rows)
}

/// `<type>(_sym)_b(<lo>-)<hi>_p<prime>.csv`.
pub fn output_filename(test_type: &str, symmetric: bool, bound_min: u32, bound_max: u32, p: u64) -> String {
    let sym = if symmetric { "_sym" } else { "" };
    let lo = if bound_min == 0 { String::new() } else { format!("{bound_min}-") };
    format!("{test_type}{sym}_b{lo}{bound_max}_p{p}.csv")
}
