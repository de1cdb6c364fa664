//! File formats for coefficient vectors, operational matrices and sampled functions.
//!
//! JSON is canonical and round-trips every f64 bit-exactly. CSV is provided for
//! interoperability and carries 17 significant digits, which is also exact.
//!
//! * coefficients, JSON: `{"basis":{"a":..,"b":..,"beta":..,"gamma":..},"coeffs":[..]}`
//! * coefficients, CSV: optional header `# jacfrac coeffs a=.. b=.. beta=.. gamma=..`,
//!   then one `n,c_n` row per coefficient
//! * matrix, CSV: header `# jacfrac opmatrix a=.. b=.. beta=.. gamma=.. alpha=.. side=.. N=..`,
//!   then one comma-separated row per matrix row
//! * sampled function, CSV: `x,y` rows with an optional non-numeric header line

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::Side;
use crate::jacobi::JacobiBasis;
use crate::opmatrix::OpMatrix;
use crate::quadrature::{CoeffVector, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::domain(format!("format must be 'json' or 'csv', got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl From<&JacobiBasis> for BasisJson {
    fn from(b: &JacobiBasis) -> Self {
        BasisJson { a: b.a(), b: b.b(), beta: b.beta(), gamma: b.gamma() }
    }
}

impl BasisJson {
    pub fn to_basis(self) -> Result<JacobiBasis> {
        JacobiBasis::new(self.a, self.b, self.beta, self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffJson {
    pub basis: BasisJson,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub basis: BasisJson,
    pub alpha: f64,
    pub side: Side,
    #[serde(rename = "N")]
    pub n: usize,
    /// Row-major entries.
    pub entries: Vec<Vec<f64>>,
}

/// Shortest decimal form that parses back to the same f64 (17 significant digits at most).
pub fn fmt_f64(x: f64) -> String {
    let s = format!("{x:?}");
    debug_assert_eq!(s.parse::<f64>().ok(), Some(x));
    s
}

fn basis_header(b: &JacobiBasis) -> String {
    format!(
        "a={} b={} beta={} gamma={}",
        fmt_f64(b.a()),
        fmt_f64(b.b()),
        fmt_f64(b.beta()),
        fmt_f64(b.gamma())
    )
}

pub fn coeffs_to_json(c: &CoeffVector) -> String {
    let doc = CoeffJson { basis: c.basis().into(), coeffs: c.coeffs().to_vec() };
    serde_json::to_string(&doc).expect("finite values serialize")
}

pub fn coeffs_to_csv(c: &CoeffVector) -> String {
    let mut out = format!("# jacfrac coeffs {}\n", basis_header(c.basis()));
    for (n, v) in c.coeffs().iter().enumerate() {
        let _ = writeln!(out, "{n},{}", fmt_f64(*v));
    }
    out
}

pub fn write_coeffs(c: &CoeffVector, format: Format) -> String {
    match format {
        Format::Json => coeffs_to_json(c) + "\n",
        Format::Csv => coeffs_to_csv(c),
    }
}

/// Reads a coefficient file in either format (JSON when the first non-blank
/// character is `{`). A CSV file without a header takes its basis from `fallback`.
pub fn read_coeffs(text: &str, fallback: Option<&JacobiBasis>) -> Result<CoeffVector> {
    if text.trim_start().starts_with('{') {
        let doc: CoeffJson = serde_json::from_str(text).map_err(json_error)?;
        if doc.coeffs.is_empty() {
            return Err(Error::Parse { line: 1, message: "empty coefficient list".into() });
        }
        return CoeffVector::new(doc.basis.to_basis()?, doc.coeffs);
    }
    let mut basis = fallback.cloned();
    let mut coeffs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let fields = header_fields(rest, line_no)?;
            if let Some(kind) = rest.split_whitespace().nth(1) {
                if kind == "coeffs" {
                    basis = Some(basis_from_fields(&fields, line_no)?);
                }
            }
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 'n,value', found {} fields", cells.len()),
            });
        }
        let n: usize = cells[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid index '{}'", cells[0]),
        })?;
        if n != coeffs.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected index {}, found {n}", coeffs.len()),
            });
        }
        coeffs.push(parse_number(cells[1], line_no)?);
    }
    if coeffs.is_empty() {
        return Err(Error::Parse { line: 1, message: "empty coefficient list".into() });
    }
    let basis = basis.ok_or_else(|| Error::Parse {
        line: 1,
        message: "no basis header and no basis given".into(),
    })?;
    CoeffVector::new(basis, coeffs)
}

pub fn matrix_to_json(m: &OpMatrix) -> String {
    let e = m.entries();
    let doc = MatrixJson {
        basis: m.basis().into(),
        alpha: m.alpha(),
        side: m.side(),
        n: m.n(),
        entries: (0..e.nrows()).map(|i| e.row(i).iter().copied().collect()).collect(),
    };
    serde_json::to_string(&doc).expect("finite values serialize")
}

pub fn matrix_to_csv(m: &OpMatrix) -> String {
    let mut out = format!(
        "# jacfrac opmatrix {} alpha={} side={} N={}\n",
        basis_header(m.basis()),
        fmt_f64(m.alpha()),
        m.side(),
        m.n()
    );
    let e = m.entries();
    for i in 0..e.nrows() {
        let row: Vec<String> = e.row(i).iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(m: &OpMatrix, format: Format) -> String {
    match format {
        Format::Json => matrix_to_json(m) + "\n",
        Format::Csv => matrix_to_csv(m),
    }
}

pub fn read_matrix(text: &str) -> Result<OpMatrix> {
    if text.trim_start().starts_with('{') {
        let doc: MatrixJson = serde_json::from_str(text).map_err(json_error)?;
        let rows = doc.entries.len();
        let cols = doc.entries.first().map_or(0, Vec::len);
        if rows == 0 || doc.entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse { line: 1, message: "ragged or empty matrix".into() });
        }
        let flat: Vec<f64> = doc.entries.into_iter().flatten().collect();
        return OpMatrix::from_entries(
            doc.basis.to_basis()?,
            doc.alpha,
            doc.side,
            DMatrix::from_row_slice(rows, cols, &flat),
        );
    }
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            header = Some((header_fields(rest, line_no)?, line_no));
            continue;
        }
        let row = line
            .split(',')
            .map(|c| parse_number(c.trim(), line_no))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    let (fields, hline) = header.ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing '# jacfrac opmatrix' header".into(),
    })?;
    if rows.is_empty() {
        return Err(Error::Parse { line: hline, message: "matrix has no rows".into() });
    }
    let basis = basis_from_fields(&fields, hline)?;
    let alpha = parse_number(field(&fields, "alpha", hline)?, hline)?;
    let side: Side = field(&fields, "side", hline)?
        .parse()
        .map_err(|e: Error| Error::Parse { line: hline, message: e.to_string() })?;
    let cols = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    OpMatrix::from_entries(basis, alpha, side, DMatrix::from_row_slice(rows.len(), cols, &flat))
}

/// Reads `x,y` samples. A first line that does not parse as numbers is taken as a header.
pub fn read_grid(text: &str) -> Result<GridFunction> {
    let mut samples = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 'x,y', found {} fields", cells.len()),
            });
        }
        match (cells[0].parse::<f64>(), cells[1].parse::<f64>()) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => {
                samples.push((x, y));
                seen_data = true;
            }
            _ if !seen_data && samples.is_empty() && cells[0].parse::<f64>().is_err() => {
                // header row such as "x,y"
                seen_data = true;
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("invalid numeric row '{line}'"),
                })
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Parse { line: 1, message: "no samples".into() });
    }
    GridFunction::new(samples).map_err(|e| match e {
        Error::Interpolation(m) | Error::Domain(m) => Error::Parse { line: 0, message: m },
        other => other,
    })
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), message: e.to_string() }
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse { line, message: format!("invalid number '{s}'") }),
    }
}

fn header_fields(rest: &str, line: usize) -> Result<Vec<(String, String)>> {
    let mut words = rest.split_whitespace();
    if words.next() != Some("jacfrac") {
        return Ok(Vec::new());
    }
    let _kind = words.next();
    words
        .map(|w| {
            w.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse { line, message: format!("malformed header field '{w}'") })
        })
        .collect()
}

fn field<'a>(fields: &'a [(String, String)], key: &str, line: usize) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse { line, message: format!("header lacks '{key}='") })
}

fn basis_from_fields(fields: &[(String, String)], line: usize) -> Result<JacobiBasis> {
    let num = |k: &str| parse_number(field(fields, k, line)?, line);
    JacobiBasis::new(num("a")?, num("b")?, num("beta")?, num("gamma")?)
}
