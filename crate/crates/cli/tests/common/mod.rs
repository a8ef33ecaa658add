#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use gameseg_cli::{run, Cli, CliError, RunReport};
use nalgebra::DMatrix;

/// Runs the pipeline in-process with the given arguments.
pub fn gameseg(args: &[&str]) -> Result<RunReport, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("gameseg").chain(args.iter().copied()))
        .expect("valid arguments");
    run(&cli)
}

/// Runs the built binary and returns its exit code and stderr.
pub fn gameseg_bin(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gameseg"))
        .args(args)
        .env_remove("GAMESEG_OUT")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Synthetic dataset written under `dir/name`; returns the dataset path.
pub fn synth(dir: &Path, name: &str, seed: u64, per_class: usize, days: usize) -> PathBuf {
    let out = dir.join(name);
    gameseg(&[
        "--out",
        s(&out),
        "--seed",
        &seed.to_string(),
        "synth",
        "--players-per-class",
        &per_class.to_string(),
        "--days",
        &days.to_string(),
    ])
    .expect("synth succeeds");
    out.join("dataset.csv")
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) {
    let mut text = (0..m.ncols())
        .map(|j| format!("v{j}"))
        .collect::<Vec<_>>()
        .join(",");
    text.push('\n');
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

/// Relative paths of every regular file under `root`.
pub fn files_on_disk(root: &Path) -> BTreeSet<String> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeSet<String>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, acc);
            } else {
                let rel = path.strip_prefix(root).unwrap();
                acc.insert(rel.to_string_lossy().replace('\\', "/"));
            }
        }
    }
    let mut acc = BTreeSet::new();
    walk(root, root, &mut acc);
    acc
}

/// Files whose content depends on more than config and seed.
pub const UNSTABLE: [&str; 2] = ["report.json", "config.toml"];

/// Names of numeric artifacts that differ between two run directories.
pub fn differing_artifacts(a: &Path, b: &Path) -> Vec<String> {
    let fa = files_on_disk(a);
    let fb = files_on_disk(b);
    let mut diff: Vec<String> = fa.symmetric_difference(&fb).cloned().collect();
    for f in fa.intersection(&fb) {
        if UNSTABLE.contains(&f.as_str()) {
            continue;
        }
        if fs::read(a.join(f)).unwrap() != fs::read(b.join(f)).unwrap() {
            diff.push(f.clone());
        }
    }
    diff
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

pub fn latent_classes(path: &Path) -> BTreeMap<String, String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[1].to_string())
        })
        .collect()
}

/// Latent class holding the most samples of each cluster.
pub fn majority_latent_class(
    player_proportions: &serde_json::Value,
    latent: &BTreeMap<String, String>,
    k: usize,
) -> Vec<String> {
    let mut mass: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new(); k];
    for (player, entry) in player_proportions.as_object().unwrap() {
        let samples = entry["samples"].as_f64().unwrap();
        for (c, p) in entry["proportions"].as_array().unwrap().iter().enumerate() {
            *mass[c].entry(latent[player].clone()).or_default() += p.as_f64().unwrap() * samples;
        }
    }
    mass.iter()
        .map(|m| {
            m.iter()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(class, _)| class.clone())
                .unwrap_or_default()
        })
        .collect()
}

pub struct LabelCheck {
    pub recovered: bool,
    /// Largest deviation of a player's proportion sum from one.
    pub max_sum_error: f64,
}

/// Compares the labelling of a segment run against the generator's classes.
pub fn check_labelling(run_dir: &Path, latent_csv: &Path) -> LabelCheck {
    let latent = latent_classes(latent_csv);
    let props = read_json(&run_dir.join("player_proportions.json"));
    let labelling = read_json(&run_dir.join("labelling.json"));
    let mapping: Vec<String> = labelling["mapping"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let majority = majority_latent_class(&props, &latent, mapping.len());
    let distinct: BTreeSet<&String> = majority.iter().collect();
    let recovered = distinct.len() == mapping.len() && majority == mapping;
    let max_sum_error = props
        .as_object()
        .unwrap()
        .values()
        .map(|e| {
            let sum: f64 = e["proportions"]
                .as_array()
                .unwrap()
                .iter()
                .map(|p| p.as_f64().unwrap())
                .sum();
            (sum - 1.0).abs()
        })
        .fold(0.0, f64::max);
    LabelCheck {
        recovered,
        max_sum_error,
    }
}

/// `(cause, effect) -> (reject, p_value)` rows of one class in causality.csv.
pub fn causality_rows(path: &Path, class: &str) -> BTreeMap<(String, String), (bool, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap())
        .filter(|rec| &rec[0] == class)
        .map(|rec| {
            let p = rec[4].parse::<f64>().unwrap_or(f64::NAN);
            (
                (rec[1].to_string(), rec[2].to_string()),
                (&rec[6] == "true", p),
            )
        })
        .collect()
}

/// Undirected edges `(a, b)` with `a < b`, as vertex indices `vN`.
pub fn read_edges(path: &Path) -> Vec<(usize, usize)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            let idx = |s: &str| s.trim_start_matches('v').parse::<usize>().unwrap();
            let (a, b) = (idx(&rec[0]), idx(&rec[1]));
            (a.min(b), a.max(b))
        })
        .collect()
}
