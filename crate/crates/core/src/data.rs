//! Historian log ingestion and discretization.
//!
//! A historian log is a CSV table with one column per design parameter (DP).
//! Sensors carry real-valued readings and are cut into intervals; actuators
//! carry small integer codes that map onto named states. The result is a
//! [`DiscreteDataset`] of state indices which every learner and estimator in
//! the crate consumes.
//!
//! Interval convention: a sensor value equal to a bin edge belongs to the
//! upper interval, i.e. state `i` covers `[edges[i-1], edges[i])` with the
//! outermost bounds at minus and plus infinity.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("empty input: a header row and at least one record are required")]
    EmptyInput,
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: `{value}` is not a finite number")]
    NonNumericCell { line: usize, column: String, value: String },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("missing column `{0}` in log")]
    MissingColumn(String),
    #[error("degenerate column `{column}`: {reason}")]
    DegenerateColumn { column: String, reason: String },
    #[error("column `{column}`: raw value {value} does not map to a declared state")]
    UnmappedActuatorValue { column: String, value: f64 },
    #[error("invalid variable spec `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },
    #[error("spec file line {line}: {reason}")]
    SpecParse { line: usize, reason: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl DataError {
    pub fn code(&self) -> &'static str {
        match self {
            DataError::EmptyInput => "EmptyInput",
            DataError::RaggedRow { .. } => "RaggedRow",
            DataError::NonNumericCell { .. } => "NonNumericCell",
            DataError::InvalidHeader(_) => "InvalidHeader",
            DataError::UnknownColumn(_) => "UnknownColumn",
            DataError::MissingColumn(_) => "MissingColumn",
            DataError::DegenerateColumn { .. } => "DegenerateColumn",
            DataError::UnmappedActuatorValue { .. } => "UnmappedActuatorValue",
            DataError::InvalidSpec { .. } => "InvalidSpec",
            DataError::SpecParse { .. } => "SpecParse",
            DataError::InvalidDataset(_) => "InvalidDataset",
            DataError::Csv(_) => "CsvError",
        }
    }
}

/// Raw historian table: value columns plus an optional opaque timestamp column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLog {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    timestamps: Option<Vec<String>>,
}

impl RawLog {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, DataError> {
        check_header(&columns)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(DataError::RaggedRow {
                    line: i + 2,
                    expected: columns.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Self { columns, rows, timestamps: None })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All readings of one column, in record order.
    pub fn column(&self, name: &str) -> Result<Vec<f64>, DataError> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Render as comma-separated text with a header row.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so `parse_log(&log.to_csv())` reproduces the log exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.timestamps.is_some() {
            out.push_str("Timestamp,");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(ts) = &self.timestamps {
                out.push_str(&ts[i]);
                out.push(',');
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn check_header(columns: &[String]) -> Result<(), DataError> {
    let mut seen = HashSet::new();
    for c in columns {
        if c.is_empty() {
            return Err(DataError::InvalidHeader("empty column name".into()));
        }
        if !seen.insert(c.as_str()) {
            return Err(DataError::InvalidHeader(format!("duplicate column `{c}`")));
        }
    }
    Ok(())
}

/// Parse comma-delimited historian text with a header row.
///
/// A column named `Timestamp` (any case) is kept aside and never treated as a
/// value column. Empty cells are rejected: missing data is not supported.
pub fn parse_log(text: &str) -> Result<RawLog, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| DataError::Csv(e.to_string()))?,
        None => return Err(DataError::EmptyInput),
    };
    let header: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    if header.len() == 1 && header[0].is_empty() {
        return Err(DataError::EmptyInput);
    }
    let ts_col = header.iter().position(|h| h.eq_ignore_ascii_case("timestamp"));
    let columns: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != ts_col)
        .map(|(_, h)| h.clone())
        .collect();
    check_header(&columns)?;

    let mut rows = Vec::new();
    let mut timestamps = ts_col.map(|_| Vec::new());
    for (k, rec) in records.enumerate() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        let line = k + 2;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != header.len() {
            return Err(DataError::RaggedRow { line, expected: header.len(), found: rec.len() });
        }
        let mut row = Vec::with_capacity(columns.len());
        for (i, cell) in rec.iter().enumerate() {
            if Some(i) == ts_col {
                if let Some(ts) = timestamps.as_mut() {
                    ts.push(cell.to_string());
                }
                continue;
            }
            let v = f64::from_str(cell).ok().filter(|v| v.is_finite()).ok_or_else(|| {
                DataError::NonNumericCell {
                    line,
                    column: header[i].clone(),
                    value: cell.to_string(),
                }
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::EmptyInput);
    }
    Ok(RawLog { columns, rows, timestamps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMethod {
    EqualWidth,
    Quantile,
}

impl FromStr for BinMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal_width" | "equal-width" => Ok(BinMethod::EqualWidth),
            "quantile" => Ok(BinMethod::Quantile),
            other => Err(format!("unknown bin method `{other}` (expected equal_width|quantile)")),
        }
    }
}

/// Propose `n_bins - 1` cut points for a sensor column from its histogram.
///
/// Quantile edges use linear interpolation between order statistics, so the
/// single edge for two bins is the sample median.
pub fn suggest_bins(
    log: &RawLog,
    column: &str,
    n_bins: usize,
    method: BinMethod,
) -> Result<Vec<f64>, DataError> {
    let degenerate = |reason: &str| DataError::DegenerateColumn {
        column: column.to_string(),
        reason: reason.to_string(),
    };
    if n_bins < 2 {
        return Err(degenerate("at least two bins are required"));
    }
    let mut values = log.column(column)?;
    values.sort_by(f64::total_cmp);
    let (min, max) = (values[0], values[values.len() - 1]);
    if min == max {
        return Err(degenerate("column is constant"));
    }
    let edges: Vec<f64> = match method {
        BinMethod::EqualWidth => {
            let width = (max - min) / n_bins as f64;
            (1..n_bins).map(|k| min + width * k as f64).collect()
        }
        BinMethod::Quantile => {
            let mut distinct = values.clone();
            distinct.dedup();
            if distinct.len() < n_bins {
                return Err(degenerate("fewer distinct values than bins"));
            }
            let last = (values.len() - 1) as f64;
            (1..n_bins)
                .map(|k| {
                    let pos = last * k as f64 / n_bins as f64;
                    let lo = pos.floor() as usize;
                    let frac = pos - lo as f64;
                    if frac == 0.0 {
                        values[lo]
                    } else {
                        values[lo] + frac * (values[lo + 1] - values[lo])
                    }
                })
                .collect()
        }
    };
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(degenerate("bin edges collapse"));
    }
    Ok(edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Sensor,
    Actuator,
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableKind::Sensor => f.write_str("sensor"),
            VariableKind::Actuator => f.write_str("actuator"),
        }
    }
}

/// How one DP's readings map onto discrete states.
///
/// Sensors carry `bin_edges` (one fewer than states). Actuators may declare
/// `codes`, the raw log value of each state; without them the smallest value
/// observed in the column is taken as the code of the first state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bin_edges: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codes: Option<Vec<i64>>,
}

impl VariableSpec {
    pub fn sensor(name: &str, states: &[&str], bin_edges: &[f64]) -> Result<Self, DataError> {
        let spec = Self {
            name: name.to_string(),
            kind: VariableKind::Sensor,
            states: states.iter().map(|s| s.to_string()).collect(),
            bin_edges: bin_edges.to_vec(),
            codes: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn actuator(name: &str, states: &[&str], codes: Option<&[i64]>) -> Result<Self, DataError> {
        let spec = Self {
            name: name.to_string(),
            kind: VariableKind::Actuator,
            states: states.iter().map(|s| s.to_string()).collect(),
            bin_edges: Vec::new(),
            codes: codes.map(|c| c.to_vec()),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Actuator with states named `0`, `1`, ... and no declared codes.
    pub fn indexed(name: &str, card: usize) -> Self {
        Self {
            name: name.to_string(),
            kind: VariableKind::Actuator,
            states: (0..card).map(|i| i.to_string()).collect(),
            bin_edges: Vec::new(),
            codes: None,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |reason: String| DataError::InvalidSpec { name: self.name.clone(), reason };
        if self.name.is_empty() || self.name.chars().any(char::is_whitespace) {
            return Err(bad("name must be non-empty without whitespace".into()));
        }
        if self.states.len() < 2 {
            return Err(bad("at least two states are required".into()));
        }
        let mut seen = HashSet::new();
        for s in &self.states {
            if s.is_empty() || s.contains(',') || s.chars().any(char::is_whitespace) {
                return Err(bad(format!("invalid state label `{s}`")));
            }
            if !seen.insert(s) {
                return Err(bad(format!("duplicate state label `{s}`")));
            }
        }
        match self.kind {
            VariableKind::Sensor => {
                if self.codes.is_some() {
                    return Err(bad("sensors take bin edges, not codes".into()));
                }
                if self.bin_edges.len() + 1 != self.states.len() {
                    return Err(bad(format!(
                        "{} states need {} bin edges, found {}",
                        self.states.len(),
                        self.states.len() - 1,
                        self.bin_edges.len()
                    )));
                }
                if self.bin_edges.iter().any(|e| !e.is_finite())
                    || self.bin_edges.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(bad("bin edges must be finite and strictly increasing".into()));
                }
            }
            VariableKind::Actuator => {
                if !self.bin_edges.is_empty() {
                    return Err(bad("actuators take codes, not bin edges".into()));
                }
                if let Some(codes) = &self.codes {
                    if codes.len() != self.states.len() {
                        return Err(bad("one code per state is required".into()));
                    }
                    let distinct: HashSet<_> = codes.iter().collect();
                    if distinct.len() != codes.len() {
                        return Err(bad("duplicate actuator code".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// State index of a sensor reading (half-open intervals, upper owns the edge).
    pub fn bin_of(&self, value: f64) -> usize {
        self.bin_edges.partition_point(|&e| e <= value)
    }
}

/// Render specs in the line-oriented spec-file grammar:
///
/// ```text
/// # name  kind      states               [edges|codes]
/// LIT101  sensor    Low,Medium,High      210,750
/// MV101   actuator  Close,Open           1,2
/// P101    actuator  Off,On
/// ```
pub fn format_specs(specs: &[VariableSpec]) -> String {
    let mut out = String::new();
    for s in specs {
        out.push_str(&format!("{} {} {}", s.name, s.kind, s.states.join(",")));
        match s.kind {
            VariableKind::Sensor => {
                let edges: Vec<String> = s.bin_edges.iter().map(|e| format!("{e}")).collect();
                out.push(' ');
                out.push_str(&edges.join(","));
            }
            VariableKind::Actuator => {
                if let Some(codes) = &s.codes {
                    let codes: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
                    out.push(' ');
                    out.push_str(&codes.join(","));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Parse the spec-file grammar produced by [`format_specs`]. `#` starts a comment.
pub fn parse_specs(text: &str) -> Result<Vec<VariableSpec>, DataError> {
    let mut specs: Vec<VariableSpec> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |reason: String| DataError::SpecParse { line: line_no, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(perr(format!("expected `name kind states [edges|codes]`, got `{line}`")));
        }
        let kind = match fields[1] {
            "sensor" => VariableKind::Sensor,
            "actuator" => VariableKind::Actuator,
            other => return Err(perr(format!("unknown kind `{other}`"))),
        };
        let states: Vec<String> = fields[2].split(',').map(str::to_string).collect();
        let mut spec = VariableSpec {
            name: fields[0].to_string(),
            kind,
            states,
            bin_edges: Vec::new(),
            codes: None,
        };
        if let Some(extra) = fields.get(3) {
            match kind {
                VariableKind::Sensor => {
                    spec.bin_edges = extra
                        .split(',')
                        .map(|e| e.parse::<f64>().map_err(|_| perr(format!("bad edge `{e}`"))))
                        .collect::<Result<_, _>>()?;
                }
                VariableKind::Actuator => {
                    spec.codes = Some(
                        extra
                            .split(',')
                            .map(|c| c.parse::<i64>().map_err(|_| perr(format!("bad code `{c}`"))))
                            .collect::<Result<_, _>>()?,
                    );
                }
            }
        }
        spec.validate()?;
        if specs.iter().any(|s| s.name == spec.name) {
            return Err(perr(format!("duplicate variable `{}`", spec.name)));
        }
        specs.push(spec);
    }
    Ok(specs)
}

/// Records x variables table of state indices, stored column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetFile", into = "DatasetFile")]
pub struct DiscreteDataset {
    specs: Vec<VariableSpec>,
    columns: Vec<Vec<usize>>,
}

/// On-disk layout: the variable specs plus one row of state indices per record.
#[derive(Serialize, Deserialize)]
struct DatasetFile {
    variables: Vec<VariableSpec>,
    records: Vec<Vec<usize>>,
}

impl TryFrom<DatasetFile> for DiscreteDataset {
    type Error = DataError;

    fn try_from(f: DatasetFile) -> Result<Self, DataError> {
        let n_vars = f.variables.len();
        let mut columns = vec![Vec::with_capacity(f.records.len()); n_vars];
        for (r, rec) in f.records.iter().enumerate() {
            if rec.len() != n_vars {
                return Err(DataError::InvalidDataset(format!(
                    "record {r} has {} cells, expected {n_vars}",
                    rec.len()
                )));
            }
            for (c, &v) in rec.iter().enumerate() {
                columns[c].push(v);
            }
        }
        DiscreteDataset::new(f.variables, columns)
    }
}

impl From<DiscreteDataset> for DatasetFile {
    fn from(ds: DiscreteDataset) -> Self {
        let records = (0..ds.n_records()).map(|r| ds.record(r)).collect();
        DatasetFile { variables: ds.specs, records }
    }
}

impl DiscreteDataset {
    pub fn new(specs: Vec<VariableSpec>, columns: Vec<Vec<usize>>) -> Result<Self, DataError> {
        if specs.len() != columns.len() {
            return Err(DataError::InvalidDataset(format!(
                "{} specs but {} columns",
                specs.len(),
                columns.len()
            )));
        }
        let mut names = HashSet::new();
        for s in &specs {
            s.validate()?;
            if !names.insert(s.name.as_str()) {
                return Err(DataError::InvalidDataset(format!("duplicate variable `{}`", s.name)));
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(DataError::InvalidDataset("at least one record is required".into()));
        }
        for (s, col) in specs.iter().zip(&columns) {
            if col.len() != n {
                return Err(DataError::InvalidDataset(format!(
                    "column `{}` has {} records, expected {n}",
                    s.name,
                    col.len()
                )));
            }
            if let Some(&bad) = col.iter().find(|&&v| v >= s.cardinality()) {
                return Err(DataError::InvalidDataset(format!(
                    "column `{}` holds state index {bad} outside 0..{}",
                    s.name,
                    s.cardinality()
                )));
            }
        }
        Ok(Self { specs, columns })
    }

    pub fn specs(&self) -> &[VariableSpec] {
        &self.specs
    }

    pub fn names(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn n_records(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_vars(&self) -> usize {
        self.specs.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.specs[var].cardinality()
    }

    pub fn column(&self, var: usize) -> &[usize] {
        &self.columns[var]
    }

    pub fn record(&self, r: usize) -> Vec<usize> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Number of records per state of one variable.
    pub fn histogram(&self, var: usize) -> Vec<usize> {
        let mut h = vec![0; self.cardinality(var)];
        for &v in &self.columns[var] {
            h[v] += 1;
        }
        h
    }

    /// Column subset in the requested order, record order preserved.
    pub fn project(&self, names: &[&str]) -> Result<DiscreteDataset, DataError> {
        let mut specs = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let idx = self.index_of(name).ok_or_else(|| DataError::UnknownColumn(name.to_string()))?;
            specs.push(self.specs[idx].clone());
            columns.push(self.columns[idx].clone());
        }
        DiscreteDataset::new(specs, columns)
    }

    /// Labelled rendering, one CSV row of state labels per record.
    pub fn to_label_csv(&self) -> String {
        let mut out = self.names().join(",");
        out.push('\n');
        for r in 0..self.n_records() {
            let labels: Vec<&str> = self
                .specs
                .iter()
                .zip(&self.columns)
                .map(|(s, c)| s.states[c[r]].as_str())
                .collect();
            out.push_str(&labels.join(","));
            out.push('\n');
        }
        out
    }
}

/// Map raw readings onto states according to `specs`.
///
/// The dataset columns follow the order of `specs`, not of the log.
pub fn discretize(log: &RawLog, specs: &[VariableSpec]) -> Result<DiscreteDataset, DataError> {
    let mut columns = Vec::with_capacity(specs.len());
    for spec in specs {
        spec.validate()?;
        let idx = log
            .column_index(&spec.name)
            .ok_or_else(|| DataError::MissingColumn(spec.name.clone()))?;
        let raw: Vec<f64> = log.rows().iter().map(|r| r[idx]).collect();
        let col = match spec.kind {
            VariableKind::Sensor => raw.iter().map(|&v| spec.bin_of(v)).collect(),
            VariableKind::Actuator => map_actuator(spec, &raw)?,
        };
        columns.push(col);
    }
    DiscreteDataset::new(specs.to_vec(), columns)
}

fn map_actuator(spec: &VariableSpec, raw: &[f64]) -> Result<Vec<usize>, DataError> {
    let unmapped = |value: f64| DataError::UnmappedActuatorValue { column: spec.name.clone(), value };
    if let Some(&bad) = raw.iter().find(|v| v.fract() != 0.0) {
        return Err(unmapped(bad));
    }
    match &spec.codes {
        Some(codes) => raw
            .iter()
            .map(|&v| codes.iter().position(|&c| c as f64 == v).ok_or_else(|| unmapped(v)))
            .collect(),
        None => {
            let base = raw.iter().copied().fold(f64::INFINITY, f64::min);
            raw.iter()
                .map(|&v| {
                    let idx = v - base;
                    if idx < spec.cardinality() as f64 {
                        Ok(idx as usize)
                    } else {
                        Err(unmapped(v))
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit101() -> VariableSpec {
        VariableSpec::sensor("LIT101", &["Low", "Medium", "High"], &[210.0, 750.0]).unwrap()
    }

    #[test]
    fn parses_minimal_log() {
        let log = parse_log("LIT101,MV101\n500.5,1\n800,2\n").unwrap();
        assert_eq!(log.columns(), ["LIT101", "MV101"]);
        assert_eq!(log.rows().len(), 2);
        assert_eq!(log.rows()[1], vec![800.0, 2.0]);
    }

    #[test]
    fn timestamp_column_is_set_aside() {
        let log = parse_log(" Timestamp , LIT101 \n 22/12/2015 4:00:00 PM ,12.5\n").unwrap();
        assert_eq!(log.columns(), ["LIT101"]);
        assert_eq!(log.timestamps().unwrap(), ["22/12/2015 4:00:00 PM"]);
    }

    #[test]
    fn header_only_is_empty_input() {
        assert_eq!(parse_log("LIT101,MV101\n"), Err(DataError::EmptyInput));
        assert_eq!(parse_log(""), Err(DataError::EmptyInput));
    }

    #[test]
    fn ragged_and_non_numeric_rows() {
        assert!(matches!(
            parse_log("A,B\n1,2,3\n"),
            Err(DataError::RaggedRow { line: 2, expected: 2, found: 3 })
        ));
        assert!(matches!(parse_log("A,B\n1,x\n"), Err(DataError::NonNumericCell { .. })));
        assert!(matches!(parse_log("A,B\n1,\n"), Err(DataError::NonNumericCell { .. })));
        assert!(matches!(parse_log("A,B\n1,NaN\n"), Err(DataError::NonNumericCell { .. })));
        assert!(matches!(parse_log("A,A\n1,2\n"), Err(DataError::InvalidHeader(_))));
    }

    fn ten_values() -> RawLog {
        let rows = (0..10).map(|v| vec![v as f64]).collect();
        RawLog::new(vec!["X".into()], rows).unwrap()
    }

    #[test]
    fn equal_width_two_bins_is_midpoint() {
        assert_eq!(suggest_bins(&ten_values(), "X", 2, BinMethod::EqualWidth).unwrap(), vec![4.5]);
    }

    #[test]
    fn quantile_two_bins_is_median() {
        // Sorted 0..9: the median is the mean of the 5th and 6th order statistics.
        let mut v: Vec<f64> = (0..10).map(f64::from).collect();
        v.sort_by(f64::total_cmp);
        let median = (v[4] + v[5]) / 2.0;
        assert_eq!(suggest_bins(&ten_values(), "X", 2, BinMethod::Quantile).unwrap(), vec![median]);
    }

    #[test]
    fn degenerate_columns() {
        let log = RawLog::new(vec!["X".into()], vec![vec![3.0]; 5]).unwrap();
        assert!(matches!(
            suggest_bins(&log, "X", 2, BinMethod::EqualWidth),
            Err(DataError::DegenerateColumn { .. })
        ));
        let rows = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0].iter().map(|&v| vec![v]).collect();
        let skewed = RawLog::new(vec!["X".into()], rows).unwrap();
        assert!(matches!(
            suggest_bins(&skewed, "X", 3, BinMethod::Quantile),
            Err(DataError::DegenerateColumn { .. })
        ));
        assert!(matches!(
            suggest_bins(&skewed, "Y", 2, BinMethod::Quantile),
            Err(DataError::UnknownColumn(_))
        ));
    }

    #[test]
    fn sensor_bins_are_half_open() {
        let log = RawLog::new(
            vec!["LIT101".into()],
            vec![vec![100.0], vec![500.0], vec![900.0], vec![210.0], vec![750.0]],
        )
        .unwrap();
        let ds = discretize(&log, &[lit101()]).unwrap();
        assert_eq!(ds.column(0), [0, 1, 2, 1, 2]);
    }

    #[test]
    fn actuator_codes_map_to_states() {
        let log = RawLog::new(vec!["MV101".into()], vec![vec![1.0], vec![2.0], vec![1.0]]).unwrap();
        let declared = VariableSpec::actuator("MV101", &["Close", "Open"], Some(&[1, 2])).unwrap();
        let implicit = VariableSpec::actuator("MV101", &["Close", "Open"], None).unwrap();
        for spec in [declared, implicit] {
            let ds = discretize(&log, &[spec]).unwrap();
            assert_eq!(ds.column(0), [0, 1, 0]);
        }
        let with_zero = RawLog::new(vec!["MV101".into()], vec![vec![0.0], vec![2.0]]).unwrap();
        let spec = VariableSpec::actuator("MV101", &["Close", "Open"], Some(&[1, 2])).unwrap();
        assert!(matches!(
            discretize(&with_zero, &[spec]),
            Err(DataError::UnmappedActuatorValue { .. })
        ));
    }

    #[test]
    fn discretize_missing_column() {
        let log = parse_log("A\n1\n").unwrap();
        assert!(matches!(discretize(&log, &[lit101()]), Err(DataError::MissingColumn(_))));
    }

    #[test]
    fn project_subsets_and_identity() {
        let log = parse_log("LIT101,MV101\n100,1\n800,2\n").unwrap();
        let specs = vec![
            lit101(),
            VariableSpec::actuator("MV101", &["Close", "Open"], Some(&[1, 2])).unwrap(),
        ];
        let ds = discretize(&log, &specs).unwrap();
        assert_eq!(ds.project(&["LIT101", "MV101"]).unwrap(), ds);
        let sub = ds.project(&["MV101"]).unwrap();
        assert_eq!(sub.n_vars(), 1);
        assert_eq!(sub.n_records(), 2);
        assert!(matches!(ds.project(&["FIT101"]), Err(DataError::UnknownColumn(_))));
    }

    #[test]
    fn spec_file_round_trip() {
        let text = "# stage 1\nLIT101 sensor Low,Medium,High 210,750.25\nMV101 actuator Close,Open 1,2\nP101 actuator Off,On\n";
        let specs = parse_specs(text).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0].bin_edges, vec![210.0, 750.25]);
        assert_eq!(specs[1].codes, Some(vec![1, 2]));
        assert_eq!(specs[2].codes, None);
        assert_eq!(parse_specs(&format_specs(&specs)).unwrap(), specs);
    }

    #[test]
    fn spec_validation() {
        assert!(VariableSpec::sensor("X", &["a"], &[]).is_err());
        assert!(VariableSpec::sensor("X", &["a", "b"], &[]).is_err());
        assert!(VariableSpec::sensor("X", &["a", "b", "c"], &[2.0, 1.0]).is_err());
        assert!(VariableSpec::actuator("X", &["a", "a"], None).is_err());
        assert!(parse_specs("X gauge a,b\n").is_err());
        assert!(parse_specs("X sensor a,b 1\nX sensor a,b 1\n").is_err());
    }

    #[test]
    fn dataset_json_round_trip() {
        let ds = DiscreteDataset::new(
            vec![VariableSpec::indexed("A", 2), VariableSpec::indexed("B", 3)],
            vec![vec![0, 1, 1], vec![2, 0, 1]],
        )
        .unwrap();
        let json = serde_json::to_string(&ds).unwrap();
        assert!(json.contains("\"records\":[[0,2],[1,0],[1,1]]"));
        let back: DiscreteDataset = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ds);
        let bad = r#"{"variables":[{"name":"A","kind":"actuator","states":["0","1"]}],"records":[[2]]}"#;
        assert!(serde_json::from_str::<DiscreteDataset>(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn histogram_conserves_records(values in prop::collection::vec(-1e3f64..1e3, 1..200)) {
                let log = RawLog::new(vec!["LIT101".into()], values.iter().map(|&v| vec![v]).collect()).unwrap();
                let ds = discretize(&log, &[lit101()]).unwrap();
                prop_assert_eq!(ds.histogram(0).iter().sum::<usize>(), values.len());
            }

            #[test]
            fn relabelling_is_identity(values in prop::collection::vec(0u8..3, 1..100)) {
                // Pushing labelled output back through the spec's state index is the identity.
                let spec = lit101();
                let reps = [0.0, 500.0, 1000.0];
                let log = RawLog::new(vec!["LIT101".into()], values.iter().map(|&v| vec![reps[v as usize]]).collect()).unwrap();
                let ds = discretize(&log, &[spec.clone()]).unwrap();
                for (r, &v) in values.iter().enumerate() {
                    let label = &spec.states[ds.column(0)[r]];
                    prop_assert_eq!(spec.state_index(label), Some(v as usize));
                }
            }

            #[test]
            fn equal_width_edges_partition_range(
                values in prop::collection::vec(-1e4f64..1e4, 2..100),
                n_bins in 2usize..8,
            ) {
                let log = RawLog::new(vec!["X".into()], values.iter().map(|&v| vec![v]).collect()).unwrap();
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assume!(max - min > 1e-6);
                let edges = suggest_bins(&log, "X", n_bins, BinMethod::EqualWidth).unwrap();
                prop_assert_eq!(edges.len(), n_bins - 1);
                let width = (max - min) / n_bins as f64;
                let mut bounds = vec![min];
                bounds.extend(&edges);
                bounds.push(max);
                for w in bounds.windows(2) {
                    let got = w[1] - w[0];
                    prop_assert!((got - width).abs() <= 1e-12 * (max.abs().max(min.abs()).max(width)) * 4.0);
                }
            }

            #[test]
            fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..20)) {
                let log = RawLog::new(vec!["A".into(), "B".into(), "C".into()], rows).unwrap();
                prop_assert_eq!(parse_log(&log.to_csv()).unwrap(), log);
            }
        }
    }
}
