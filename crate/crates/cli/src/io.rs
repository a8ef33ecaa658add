use std::fs::File;
use std::path::{Path, PathBuf};

use gameseg_core::data::{
    ingest_csv, CsvSchema, DataError, DatasetTable, FeatureMatrix, IngestReport,
};
use serde::Serialize;

use crate::error::{Attribute, CliError, Failure, Stage};

#[derive(Clone, Debug, Serialize)]
pub struct FileIngest {
    pub path: PathBuf,
    #[serde(flatten)]
    pub report: IngestReport,
}

fn open(path: &Path, stage: Stage) -> Result<File, CliError> {
    File::open(path).map_err(|source| {
        CliError::new(
            stage,
            "open_input",
            Failure::Io {
                path: path.to_path_buf(),
                source,
            },
        )
    })
}

/// Reads and merges dataset CSVs; duplicates across files are dropped.
pub fn load_table(
    paths: &[PathBuf],
    stage: Stage,
) -> Result<(DatasetTable, Vec<FileIngest>), CliError> {
    if paths.is_empty() {
        return Err(CliError::new(
            stage,
            "load_dataset",
            Failure::Config("no input dataset; pass --input or set `input` in the config".into()),
        ));
    }
    let schema = CsvSchema::standard();
    let mut records = Vec::new();
    let mut files = Vec::new();
    for path in paths {
        let ingested = ingest_csv(open(path, stage)?, &schema).at(stage, "ingest_csv")?;
        records.extend_from_slice(ingested.table.records());
        files.push(FileIngest {
            path: path.clone(),
            report: ingested.report,
        });
    }
    let (table, dropped) = DatasetTable::from_records(records);
    if dropped > 0 && paths.len() > 1 {
        log::warn!("{dropped} duplicate rows across input files dropped");
    }
    Ok((table, files))
}

/// Numeric CSV with a header of column names; every cell must parse.
pub fn read_matrix_csv(path: &Path, stage: Stage) -> Result<FeatureMatrix, CliError> {
    let mut reader = csv::Reader::from_reader(open(path, stage)?);
    let names: Vec<String> = reader
        .headers()
        .map_err(DataError::from)
        .at(stage, "read_matrix")?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut columns = vec![Vec::new(); names.len()];
    let mut total = 0;
    let mut bad: Option<String> = None;
    let mut malformed = 0;
    for (i, row) in reader.records().enumerate() {
        total += 1;
        let row = row.map_err(DataError::from).at(stage, "read_matrix")?;
        let parsed: Result<Vec<f64>, String> = row
            .iter()
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("row {}: `{c}` is not a number", i + 1))
            })
            .collect();
        match parsed {
            Ok(vals) if vals.len() == names.len() => {
                for (col, v) in columns.iter_mut().zip(vals) {
                    col.push(v);
                }
            }
            Ok(vals) => {
                malformed += 1;
                bad.get_or_insert(format!(
                    "row {}: {} fields, expected {}",
                    i + 1,
                    vals.len(),
                    names.len()
                ));
            }
            Err(msg) => {
                malformed += 1;
                bad.get_or_insert(msg);
            }
        }
    }
    if let Some(first) = bad {
        return Err(DataError::Parse {
            malformed,
            total,
            first,
        })
        .at(stage, "read_matrix");
    }
    if total == 0 {
        return Err(DataError::EmptyTable).at(stage, "read_matrix");
    }
    FeatureMatrix::from_columns(names, &columns).at(stage, "read_matrix")
}
