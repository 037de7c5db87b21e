//! Report assembly. Fractions are authoritative; decimals are for display.

use std::collections::BTreeMap;

use awpp_core::rational::{format_fraction, to_decimal, Rational};
use serde::Serialize;

pub const FORMAT_VERSION: u32 = 1;
pub const DECIMAL_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

pub fn fraction(value: &Rational) -> String {
    format_fraction(value)
}

pub fn decimal(value: &Rational) -> String {
    to_decimal(value, DECIMAL_DIGITS)
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<R: Serialize> {
    pub format_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub rows: Vec<R>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, String>,
}

impl<R: Serialize + Default> Report<R> {
    pub fn new(command: &str, source: Option<String>, rows: Vec<R>) -> Self {
        Report {
            format_version: FORMAT_VERSION,
            command: command.into(),
            source,
            rows,
            summary: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.summary.insert(key.into(), value.to_string());
        self
    }

    /// JSON is the whole report; CSV is the rows only, one header line
    /// even when there are no rows.
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => crate::formats::to_pretty_json(self),
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                if self.rows.is_empty() {
                    w.serialize(R::default()).expect("flat rows");
                }
                for row in &self.rows {
                    w.serialize(row).expect("flat rows");
                }
                let text = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8");
                if self.rows.is_empty() {
                    text.lines().next().map(|h| format!("{h}\n")).unwrap_or_default()
                } else {
                    text
                }
            }
        }
    }
}

/// One input of an affine run.
#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct RunRow {
    pub input: String,
    pub alpha: String,
    pub alpha_decimal: String,
    pub rho: String,
    pub acceptance: String,
    pub decision: String,
    pub branches: usize,
    /// Wall time; excluded when comparing reports.
    pub elapsed_us: u128,
}
