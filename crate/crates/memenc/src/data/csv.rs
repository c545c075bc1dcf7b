//! Tabular dataset ingestion: one record per row, one numeric column per
//! feature, one integral label column.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Which column carries the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    /// Header name (requires a header row).
    Name(String),
    /// 0-based column index.
    Index(usize),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

/// Load a CSV dataset. Row order is preserved; every row must have the same
/// width; labels must be non-negative integers. `classes` may widen the
/// label space beyond `max(label) + 1`.
pub fn load_csv_dataset(
    path: &Path,
    label: &LabelColumn,
    delimiter: u8,
    has_header: bool,
    classes: Option<usize>,
) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Format(format!("open {}: {e}", path.display())))?;

    let label_idx: usize = match label {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => {
            if !has_header {
                return Err(Error::invalid(format!(
                    "label column '{name}' needs a header row"
                )));
            }
            let headers = reader
                .headers()
                .map_err(|e| Error::Format(format!("bad header: {e}")))?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::invalid(format!("no column named '{name}'")))?
        }
    };

    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width: Option<usize> = None;

    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(format!("csv read: {e}")))?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(features.len() + 1);
        let w = record.len();
        match width {
            None => {
                if label_idx >= w {
                    return Err(Error::Parse {
                        line,
                        message: format!("label column {label_idx} out of range (width {w})"),
                    });
                }
                width = Some(w);
            }
            Some(expect) if expect != w => {
                return Err(Error::Parse {
                    line,
                    message: format!("ragged row: {w} fields, expected {expect}"),
                });
            }
            _ => {}
        }

        let mut row = Vec::with_capacity(w - 1);
        let mut label_value: Option<usize> = None;
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                let as_float: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric label '{cell}'"),
                })?;
                if as_float < 0.0 || as_float.fract() != 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("label '{cell}' is not a non-negative integer"),
                    });
                }
                label_value = Some(as_float as usize);
            } else {
                row.push(cell.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric cell '{cell}' in column {col}"),
                })?);
            }
        }
        features.push(row);
        labels.push(label_value.expect("label column checked in range"));
    }

    if features.is_empty() {
        return Err(Error::Empty("csv dataset"));
    }
    let max_label = labels.iter().copied().max().unwrap_or(0);
    let classes = classes.unwrap_or(0).max(max_label + 1);
    LabeledDataset::new(features, labels, classes)
}

/// Write a dataset as CSV with header `f0..f{q-1},label`, atomically.
pub fn save_csv_dataset(path: &Path, data: &LabeledDataset) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        let mut header: Vec<String> = (0..data.dim()).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        writer
            .write_record(&header)
            .map_err(|e| Error::Format(e.to_string()))?;
        for (x, y) in data.iter() {
            let mut row: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
            row.push(y.to_string());
            writer
                .write_record(&row)
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        writer.flush()?;
    }
    crate::checkpoint::atomic_write(path, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn header_file_with_two_features() {
        let f = write("a,b,label\n1,2,0\n3,4,1\n5,6,0\n");
        let d = load_csv_dataset(f.path(), &LabelColumn::default(), b',', true, None).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.feature(1), &[3.0, 4.0]);
        assert_eq!(d.labels(), &[0, 1, 0]);
        assert_eq!(d.classes(), 2);
    }

    #[test]
    fn ragged_row_names_the_line() {
        let f = write("a,b,label\n1,2,0\n3,4\n");
        let err =
            load_csv_dataset(f.path(), &LabelColumn::default(), b',', true, None).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("ragged"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_the_line() {
        let f = write("a,b,label\n1,x,0\n");
        let err =
            load_csv_dataset(f.path(), &LabelColumn::default(), b',', true, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn missing_label_column_rejected() {
        let f = write("a,b,c\n1,2,0\n");
        assert!(load_csv_dataset(f.path(), &LabelColumn::default(), b',', true, None).is_err());
    }

    #[test]
    fn label_by_index_without_header() {
        let f = write("0,1.5,2.5\n1,3.5,4.5\n");
        let d =
            load_csv_dataset(f.path(), &LabelColumn::Index(0), b',', false, None).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.labels(), &[0, 1]);
        assert_eq!(d.feature(0), &[1.5, 2.5]);
    }

    #[test]
    fn roundtrip_preserves_values() {
        let data = LabeledDataset::new(
            vec![vec![0.125, -3.75], vec![1e-9, 42.0]],
            vec![1, 0],
            2,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        save_csv_dataset(&path, &data).unwrap();
        let back = load_csv_dataset(&path, &LabelColumn::default(), b',', true, None).unwrap();
        assert_eq!(back, data);
    }
}
