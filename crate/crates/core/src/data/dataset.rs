use std::fs::File;
use std::io::BufReader;
use std::ops::Range;
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};

const TIMESTAMP_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M",
    "%Y/%m/%d %H:%M",
];

/// A named multivariate series on a shared, strictly increasing time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub timestamps: Vec<NaiveDateTime>,
    pub variables: Vec<Variable>,
    pub frequency: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub values: Vec<f64>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        timestamps: Vec<NaiveDateTime>,
        variables: Vec<Variable>,
    ) -> Result<Self> {
        let len = timestamps.len();
        for v in &variables {
            if v.values.len() != len {
                return Err(Error::Shape(format!(
                    "variable `{}` has {} values, expected {len}",
                    v.name,
                    v.values.len()
                )));
            }
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        let frequency = infer_frequency(&timestamps);
        Ok(Dataset {
            name: name.into(),
            timestamps,
            variables,
            frequency,
        })
    }

    /// Build a dataset on a regular time axis starting at 2016-07-01 00:00.
    pub fn from_columns(
        name: impl Into<String>,
        step: Duration,
        columns: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        let len = columns.first().map_or(0, |c| c.1.len());
        let start = NaiveDate::from_ymd_opt(2016, 7, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid start date");
        let timestamps = (0..len).map(|i| start + step * i as i32).collect();
        let variables = columns
            .into_iter()
            .map(|(name, values)| Variable { name, values })
            .collect();
        Dataset::new(name, timestamps, variables)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Copy out the rows in `range`.
    pub fn slice(&self, range: Range<usize>) -> Result<Dataset> {
        if range.start > range.end || range.end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "row range {range:?} outside dataset of length {}",
                self.len()
            )));
        }
        Ok(Dataset {
            name: self.name.clone(),
            timestamps: self.timestamps[range.clone()].to_vec(),
            variables: self
                .variables
                .iter()
                .map(|v| Variable {
                    name: v.name.clone(),
                    values: v.values[range.clone()].to_vec(),
                })
                .collect(),
            frequency: self.frequency.clone(),
        })
    }
}

fn infer_frequency(timestamps: &[NaiveDateTime]) -> String {
    let Some(step) = timestamps.windows(2).map(|w| w[1] - w[0]).next() else {
        return "unknown".to_string();
    };
    let secs = step.num_seconds();
    match secs {
        s if s > 0 && s % 86_400 == 0 => format!("{}d", s / 86_400),
        s if s > 0 && s % 3_600 == 0 => format!("{}h", s / 3_600),
        s if s > 0 && s % 60 == 0 => format!("{}min", s / 60),
        s => format!("{s}s"),
    }
}

fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
        .or_else(|| {
            NaiveDate::parse_from_str(raw, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

/// Load a benchmark-style CSV: a `date` column followed by numeric columns.
///
/// Row numbers in errors are 1-based file lines (the header is line 1).
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    read_csv(BufReader::new(file), name)
}

pub fn read_csv(reader: impl std::io::Read, name: impl Into<String>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv {
            row: 1,
            column: "header".into(),
            message: e.to_string(),
        })?
        .clone();
    let first = headers.get(0).map(|h| h.trim_start_matches('\u{feff}'));
    if first != Some("date") {
        return Err(Error::Csv {
            row: 1,
            column: first.unwrap_or("").to_string(),
            message: "first column must be `date`".into(),
        });
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut timestamps: Vec<NaiveDateTime> = Vec::new();

    for record in rdr.records() {
        let record = record.map_err(|e| Error::Csv {
            row: e.position().map_or(0, |p| p.line() as usize),
            column: "?".into(),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(Error::Csv {
                row,
                column: "*".into(),
                message: format!(
                    "ragged row: {} fields, header has {}",
                    record.len(),
                    headers.len()
                ),
            });
        }
        let ts = parse_timestamp(&record[0]).ok_or_else(|| Error::Csv {
            row,
            column: "date".into(),
            message: format!("unparseable timestamp `{}`", &record[0]),
        })?;
        if let Some(prev) = timestamps.last() {
            if ts <= *prev {
                return Err(Error::Csv {
                    row,
                    column: "date".into(),
                    message: "timestamps must be strictly increasing".into(),
                });
            }
        }
        timestamps.push(ts);
        for (j, col) in columns.iter_mut().enumerate() {
            let cell = &record[j + 1];
            let value: f64 = cell.parse().map_err(|_| Error::Csv {
                row,
                column: names[j].clone(),
                message: format!("cannot parse `{cell}` as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Csv {
                    row,
                    column: names[j].clone(),
                    message: format!("non-finite value `{cell}`"),
                });
            }
            col.push(value);
        }
    }

    let variables = names
        .into_iter()
        .zip(columns)
        .map(|(name, values)| Variable { name, values })
        .collect();
    Dataset::new(name, timestamps, variables)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), "t")
    }

    #[test]
    fn three_rows_two_variables() {
        let ds = read("date,A,B\n2020-01-01 00:00:00,1,2\n2020-01-01 01:00:00,3,4\n2020-01-01 02:00:00,5,6\n")
            .unwrap();
        assert_eq!(ds.num_variables(), 2);
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.variables[1].values, vec![2.0, 4.0, 6.0]);
        assert_eq!(ds.frequency, "1h");
    }

    #[test]
    fn crlf_and_iso_timestamps() {
        let ds = read("date,A\r\n2020-01-01T00:00:00,1\r\n2020-01-01T00:15:00,2\r\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.frequency, "15min");
    }

    #[test]
    fn blank_cell_names_row_and_column() {
        let err = read("date,A,B\n2020-01-01 00:00:00,1,2\n2020-01-01 01:00:00,,4\n").unwrap_err();
        match err {
            Error::Csv { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "A");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_date_column() {
        assert!(matches!(read("time,A\n1,2\n"), Err(Error::Csv { row: 1, .. })));
    }

    #[test]
    fn non_monotone_timestamps() {
        let err = read("date,A\n2020-01-01 01:00:00,1\n2020-01-01 00:00:00,2\n").unwrap_err();
        assert!(matches!(err, Error::Csv { row: 3, ref column, .. } if column == "date"));
    }

    #[test]
    fn nan_and_ragged_rows() {
        let err = read("date,A\n2020-01-01 00:00:00,NaN\n").unwrap_err();
        assert!(matches!(err, Error::Csv { row: 2, .. }));
        let err = read("date,A,B\n2020-01-01 00:00:00,1\n").unwrap_err();
        assert!(matches!(err, Error::Csv { row: 2, ref column, .. } if column == "*"));
    }
}
