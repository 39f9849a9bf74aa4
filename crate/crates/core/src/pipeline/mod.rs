//! Ingestion, windowing and persistence.
//!
//! Prices and ticks share one long-format CSV schema:
//!
//! ```text
//! date,symbol,close
//! 2015-01-02,AAPL,109.33
//! ```
//!
//! Dates are ISO-8601 and closes positive decimals.

mod store;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alert::Tick;
use crate::coint::PriceSeries;
use crate::graph::GraphError;
use crate::stats::Series;

pub use store::{load_graph, read_reports, save_graph, write_reports};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{0}: no data rows")]
    EmptyInput(String),
    #[error("window {start}..{end} contains no usable dates")]
    EmptyWindow { start: NaiveDate, end: NaiveDate },
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Graph(GraphError),
}

impl From<GraphError> for PipelineError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::SchemaViolation { path, message } => {
                PipelineError::SchemaViolation { path, message }
            }
            other => PipelineError::Graph(other),
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Date x symbol matrix of closes with explicit gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub calendar: Vec<NaiveDate>,
    pub symbols: Vec<String>,
    /// `prices[date][symbol]`.
    pub prices: Vec<Vec<Option<f64>>>,
}

impl PriceTable {
    pub fn rows_present(&self) -> usize {
        self.prices.iter().flatten().filter(|p| p.is_some()).count()
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Keeps only the listed symbols, in the given order.
    pub fn restrict(&self, keep: &[String]) -> PriceTable {
        let cols: Vec<usize> = keep.iter().filter_map(|s| self.symbol_index(s)).collect();
        PriceTable {
            calendar: self.calendar.clone(),
            symbols: cols.iter().map(|&c| self.symbols[c].clone()).collect(),
            prices: self
                .prices
                .iter()
                .map(|row| cols.iter().map(|&c| row[c]).collect())
                .collect(),
        }
    }

    /// Writes the table in long format, skipping gaps.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "symbol", "close"])?;
        for (date, row) in self.calendar.iter().zip(&self.prices) {
            for (symbol, price) in self.symbols.iter().zip(row) {
                if let Some(p) = price {
                    w.write_record([date.to_string(), symbol.clone(), p.to_string()])?;
                }
            }
        }
        w.flush()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rejected: Vec<RejectedRow>,
}

#[derive(Debug, Deserialize)]
struct Row {
    date: String,
    symbol: String,
    close: String,
}

fn parse_row(row: &Row) -> Result<(NaiveDate, String, f64), String> {
    let date = NaiveDate::parse_from_str(row.date.trim(), "%Y-%m-%d")
        .map_err(|e| format!("bad date {:?}: {e}", row.date))?;
    let symbol = row.symbol.trim();
    if symbol.is_empty() {
        return Err("empty symbol".into());
    }
    let close: f64 = row
        .close
        .trim()
        .parse()
        .map_err(|_| format!("non-numeric close {:?}", row.close))?;
    if !(close.is_finite() && close > 0.0) {
        return Err(format!("close must be positive, got {close}"));
    }
    Ok((date, symbol.to_owned(), close))
}

/// Parses long-format CSV, collecting bad rows instead of failing.
///
/// Duplicate `(date, symbol)` rows keep the first occurrence and reject the
/// rest. `rows_read - rejected.len()` equals the table's present cells.
pub fn parse_prices_lenient<R: Read>(reader: R) -> Result<(PriceTable, LoadReport), csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut report = LoadReport::default();
    let mut cells: BTreeMap<NaiveDate, HashMap<String, f64>> = BTreeMap::new();
    let mut symbols = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        report.rows_read += 1;
        let parsed = rec
            .deserialize::<Row>(None)
            .map_err(|e| e.to_string())
            .and_then(|row| parse_row(&row));
        match parsed {
            Ok((date, symbol, close)) => {
                let day = cells.entry(date).or_default();
                if day.contains_key(&symbol) {
                    report.rejected.push(RejectedRow {
                        line,
                        reason: format!("duplicate {symbol} on {date}"),
                    });
                } else {
                    symbols.insert(symbol.clone());
                    day.insert(symbol, close);
                }
            }
            Err(reason) => report.rejected.push(RejectedRow { line, reason }),
        }
    }
    let symbols: Vec<String> = symbols.into_iter().collect();
    let calendar: Vec<NaiveDate> = cells.keys().copied().collect();
    let prices = cells
        .values()
        .map(|day| symbols.iter().map(|s| day.get(s).copied()).collect())
        .collect();
    Ok((
        PriceTable {
            calendar,
            symbols,
            prices,
        },
        report,
    ))
}

/// Strict variant: the first bad row is an error naming its line.
pub fn parse_prices<R: Read>(reader: R, name: &str) -> Result<PriceTable, PipelineError> {
    let (table, report) = parse_prices_lenient(reader).map_err(|e| PipelineError::Parse {
        path: name.to_owned(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    })?;
    if let Some(bad) = report.rejected.first() {
        return Err(PipelineError::Parse {
            path: name.to_owned(),
            line: bad.line,
            message: bad.reason.clone(),
        });
    }
    if report.rows_read == 0 {
        return Err(PipelineError::EmptyInput(name.to_owned()));
    }
    Ok(table)
}

pub fn load_prices(path: &Path) -> Result<PriceTable, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_prices(file, &path.display().to_string())
}

/// Loads a tick file: one [`Tick`] per distinct date, in date order.
pub fn load_ticks(path: &Path) -> Result<Vec<Tick>, PipelineError> {
    let table = load_prices(path)?;
    Ok(table_to_ticks(&table))
}

pub fn table_to_ticks(table: &PriceTable) -> Vec<Tick> {
    table
        .calendar
        .iter()
        .zip(&table.prices)
        .map(|(date, row)| {
            Tick::new(
                Some(*date),
                table
                    .symbols
                    .iter()
                    .zip(row)
                    .filter_map(|(s, p)| p.map(|p| (s.clone(), p))),
            )
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SliceOptions {
    /// Longest run of consecutive missing dates that is forward-filled.
    pub max_gap: usize,
    /// Symbols missing more than this fraction of the window are dropped.
    pub max_missing_fraction: f64,
}

impl Default for SliceOptions {
    fn default() -> Self {
        Self {
            max_gap: 3,
            max_missing_fraction: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub symbol: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillNote {
    pub symbol: String,
    pub dates: Vec<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSlice {
    pub dates: Arc<[NaiveDate]>,
    pub series: Vec<PriceSeries>,
    pub excluded: Vec<Exclusion>,
    pub filled: Vec<FillNote>,
}

/// Cuts `[start, end]` out of the table as aligned series, forward-filling
/// short gaps and dropping symbols that cannot be filled.
pub fn slice_window(
    table: &PriceTable,
    start: NaiveDate,
    end: NaiveDate,
    opts: &SliceOptions,
) -> Result<WindowSlice, PipelineError> {
    let rows: Vec<usize> = (0..table.calendar.len())
        .filter(|&i| (start..=end).contains(&table.calendar[i]))
        .collect();
    if start > end || rows.is_empty() {
        return Err(PipelineError::EmptyWindow { start, end });
    }
    let dates: Arc<[NaiveDate]> = rows.iter().map(|&i| table.calendar[i]).collect();
    let mut series = Vec::new();
    let mut excluded = Vec::new();
    let mut filled = Vec::new();

    'symbols: for (c, symbol) in table.symbols.iter().enumerate() {
        let raw: Vec<Option<f64>> = rows.iter().map(|&r| table.prices[r][c]).collect();
        let missing = raw.iter().filter(|p| p.is_none()).count();
        if missing as f64 > opts.max_missing_fraction * raw.len() as f64 {
            excluded.push(Exclusion {
                symbol: symbol.clone(),
                reason: format!("{missing} of {} dates missing", raw.len()),
            });
            continue;
        }
        let mut values = Vec::with_capacity(raw.len());
        let mut fill_dates = Vec::new();
        let mut gap = 0;
        for (t, p) in raw.iter().enumerate() {
            match (p, values.last()) {
                (Some(p), _) => {
                    gap = 0;
                    values.push(*p);
                }
                (None, Some(&prev)) if gap < opts.max_gap => {
                    gap += 1;
                    values.push(prev);
                    fill_dates.push(dates[t]);
                }
                (None, last) => {
                    let reason = if last.is_none() {
                        format!("no observation on or before {}", dates[t])
                    } else {
                        format!("gap longer than {} dates at {}", opts.max_gap, dates[t])
                    };
                    excluded.push(Exclusion {
                        symbol: symbol.clone(),
                        reason,
                    });
                    continue 'symbols;
                }
            }
        }
        if !fill_dates.is_empty() {
            filled.push(FillNote {
                symbol: symbol.clone(),
                dates: fill_dates,
            });
        }
        let values = Series::new(values).expect("parsed prices are finite");
        series.push(PriceSeries::new(symbol.clone(), dates.clone(), values));
    }
    Ok(WindowSlice {
        dates,
        series,
        excluded,
        filled,
    })
}
