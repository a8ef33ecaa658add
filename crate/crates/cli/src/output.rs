use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{CliError, Failure, Stage};

pub const REPORT_FILE: &str = "report.json";

/// Run directory that remembers every file written into it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: BTreeSet<String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|source| {
            CliError::new(
                Stage::Config,
                "create_output_dir",
                Failure::Io {
                    path: root.clone(),
                    source,
                },
            )
        })?;
        Ok(OutputDir {
            root,
            written: BTreeSet::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Creates `name` (relative, `/`-separated) and hands a buffered writer to `fill`.
    pub fn write<F>(&mut self, stage: Stage, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), Failure>,
    {
        let path = self.root.join(name);
        let io = |source| {
            CliError::new(
                stage,
                "write_output",
                Failure::Io {
                    path: path.clone(),
                    source,
                },
            )
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        fill(&mut w).map_err(|f| CliError::new(stage, "write_output", f))?;
        w.flush().map_err(io)?;
        self.written.insert(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(
        &mut self,
        stage: Stage,
        name: &str,
        value: &T,
    ) -> Result<(), CliError> {
        self.write(stage, name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")
                .map_err(|e| Failure::Serialize(e.to_string()))
        })
    }

    pub fn write_text(&mut self, stage: Stage, name: &str, text: &str) -> Result<(), CliError> {
        self.write(stage, name, |w| {
            w.write_all(text.as_bytes())
                .map_err(|e| Failure::Serialize(e.to_string()))
        })
    }

    pub fn files(&self) -> Vec<String> {
        self.written.iter().cloned().collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub stage: String,
    pub summary: serde_json::Value,
}

/// `report.json`: what ran, with which seed, how long it took, and what it wrote.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub stages: Vec<StageSummary>,
    pub timings_ms: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    /// Every file in the run directory written by this run, including this report.
    pub outputs: Vec<String>,
}

/// Mutable state of one command invocation.
#[derive(Debug)]
pub struct Run {
    pub out: OutputDir,
    pub report: RunReport,
}

impl Run {
    pub fn new(command: &str, seed: u64, out: OutputDir) -> Self {
        let report = RunReport {
            command: command.to_string(),
            seed,
            output_dir: out.root().to_path_buf(),
            stages: Vec::new(),
            timings_ms: BTreeMap::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        };
        Run { out, report }
    }

    pub fn timed<T>(
        &mut self,
        stage: Stage,
        body: impl FnOnce(&mut Self) -> Result<T, CliError>,
    ) -> Result<T, CliError> {
        let start = Instant::now();
        let result = body(self);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        *self
            .report
            .timings_ms
            .entry(stage.to_string())
            .or_insert(0.0) += ms;
        result
    }

    pub fn summary(&mut self, stage: Stage, summary: serde_json::Value) {
        self.report.stages.push(StageSummary {
            stage: stage.to_string(),
            summary,
        });
    }

    pub fn warn(&mut self, stage: Stage, message: impl Into<String>) {
        let message = format!("{stage}: {}", message.into());
        log::warn!("{message}");
        self.report.warnings.push(message);
    }

    /// Records a warning that the library has already logged.
    pub fn record_warning(&mut self, stage: Stage, message: &str) {
        self.report.warnings.push(format!("{stage}: {message}"));
    }

    /// Writes `report.json` last so the inventory includes it.
    pub fn finish(mut self) -> Result<RunReport, CliError> {
        let mut outputs = self.out.files();
        outputs.push(REPORT_FILE.to_string());
        outputs.sort();
        outputs.dedup();
        self.report.outputs = outputs;
        let report = self.report;
        self.out.write_json(Stage::Report, REPORT_FILE, &report)?;
        Ok(report)
    }
}
