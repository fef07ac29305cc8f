use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::config::Format;
use crate::error::{Error, Result};
use crate::report::Report;

pub const CSV_HEADER: &str = "scenario,N,j0,k,x,value_re,value_im,magnitude,ratio_log_n,walltime_ms";

/// The `x` column: a position, `inf` for `x = +inf`, or `sup` for a
/// supremum over `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Position {
    At(f64),
    Infinity,
    Sup,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::At(x) => write!(f, "{x:.16e}"),
            Position::Infinity => f.write_str("inf"),
            Position::Sup => f.write_str("sup"),
        }
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Position::At(x) => s.serialize_f64(*x),
            Position::Infinity => s.serialize_str("inf"),
            Position::Sup => s.serialize_str("sup"),
        }
    }
}

impl<'de> Deserialize<'de> for Position {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Position::At(x)),
            Raw::Text(t) if t == "inf" => Ok(Position::Infinity),
            Raw::Text(t) if t == "sup" => Ok(Position::Sup),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad x marker `{t}`"))),
        }
    }
}

/// One row of a growth table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub scenario: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub j0: i64,
    pub k: f64,
    pub x: Position,
    pub value_re: f64,
    pub value_im: f64,
    pub magnitude: f64,
    pub ratio_log_n: f64,
    pub walltime_ms: f64,
}

impl GrowthRecord {
    pub fn new(scenario: &str, n: u64, j0: i64, k: f64, x: Position, value: Complex64) -> Self {
        let magnitude = value.norm();
        Self {
            scenario: scenario.to_string(),
            n,
            j0,
            k,
            x,
            value_re: value.re,
            value_im: value.im,
            magnitude,
            ratio_log_n: magnitude / (n as f64).ln(),
            walltime_ms: 0.0,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }

    pub fn with_walltime(mut self, ms: f64) -> Self {
        self.walltime_ms = ms;
        self
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.scenario,
            self.n,
            self.j0,
            self.k,
            self.x,
            self.value_re,
            self.value_im,
            self.magnitude,
            self.ratio_log_n,
            self.walltime_ms
        )
    }
}

pub fn write_csv<W: Write>(records: &[GrowthRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

pub fn to_csv_string(records: &[GrowthRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

fn open(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write_to(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = open(p)?;
            f.write_all(body)
                .and_then(|_| f.flush())
                .map_err(|source| Error::Io { path: p.to_path_buf(), source })
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body)
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Writes records to `path`, or stdout when `None`.
pub fn emit(records: &[GrowthRecord], format: Format, path: Option<&Path>) -> Result<()> {
    let body = match format {
        Format::Csv => to_csv_string(records).into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    write_to(path, &body)
}

/// Writes reports as `PASS/FAIL` lines (csv format) or a JSON array.
pub fn emit_reports(reports: &[Report], format: Format, path: Option<&Path>) -> Result<()> {
    let body = match format {
        Format::Csv => reports.iter().map(|r| format!("{r}\n")).collect::<String>().into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(reports)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    write_to(path, &body)
}
