//! One function per stage. Each reads the effective config, writes its
//! artifacts through [`Run`] and returns what later stages need.

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime};
use gameseg_core::clustering::{elbow_curve, minibatch_kmeans, pca_fit, silhouette, ClusterModel};
use gameseg_core::data::{
    format_float, generate_synthetic, paired_day_series, pool_features, standardize, write_csv,
    CalendarFlag, DatasetTable, FeatureMatrix, ResourceKind, RowKey,
};
use gameseg_core::glasso::{graphical_lasso, GraphEstimate};
use gameseg_core::segmentation::{
    assign_classes, correlation_matrix, label_clusters, proportion_buckets, ClassAssignment,
    ClassLabel, ClusterLabelling, CorrelationMatrix, SegmentationError,
};
use gameseg_core::stats::{
    granger_test_segments, select_lag_bic, two_sample_ttest, write_causality_csv, CausalityResult,
    GrangerOptions, LagSelection, StatsError,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{CorrelationSource, KChoice, PipelineConfig};
use crate::error::{Attribute, CliError, Failure, Stage};
use crate::io::{load_table, read_matrix_csv};
use crate::output::Run;

pub const DATASET_FILE: &str = "dataset.csv";
pub const LATENT_FILE: &str = "latent.csv";
pub const CLASSES_FILE: &str = "classes.csv";
pub const CLUSTERS_FILE: &str = "clusters.json";
pub const ELBOW_FILE: &str = "elbow.csv";
pub const PCA_FILE: &str = "pca.json";
pub const LABELLING_FILE: &str = "labelling.json";
pub const PROPORTIONS_FILE: &str = "proportions.csv";
pub const PLAYER_PROPORTIONS_FILE: &str = "player_proportions.json";
pub const GRAPH_FILE: &str = "graph.json";
pub const EDGES_FILE: &str = "edges.csv";
pub const CAUSALITY_FILE: &str = "causality.csv";
pub const LAG_SELECTION_FILE: &str = "lag_selection.json";
pub const TTEST_FILE: &str = "ttest.csv";
pub const INGEST_FILE: &str = "ingest.json";

fn write_dataset(run: &mut Run, stage: Stage, table: &DatasetTable) -> Result<(), CliError> {
    run.out
        .write(stage, DATASET_FILE, |w| Ok(write_csv(table, w)?))
}

pub fn synth(cfg: &PipelineConfig, run: &mut Run) -> Result<DatasetTable, CliError> {
    run.timed(Stage::Synth, |run| {
        let ds = generate_synthetic(&cfg.synth, cfg.seed).at(Stage::Synth, "generate_synthetic")?;
        write_dataset(run, Stage::Synth, &ds.table)?;
        run.out.write(Stage::Synth, LATENT_FILE, |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["player_id", "class"])?;
            for (player, class) in &ds.latent_classes {
                csv.write_record([player.as_str(), class.as_str()])?;
            }
            csv.flush().map_err(csv::Error::from)?;
            Ok(())
        })?;
        run.summary(
            Stage::Synth,
            json!({
                "players": ds.latent_classes.len(),
                "days": cfg.synth.days,
                "rows": ds.table.len(),
            }),
        );
        Ok(ds.table)
    })
}

/// Loads the configured dataset files and records per-file ingest counts.
pub fn load(cfg: &PipelineConfig, run: &mut Run, stage: Stage) -> Result<DatasetTable, CliError> {
    run.timed(Stage::Ingest, |run| {
        let (table, files) = load_table(&cfg.input, stage)?;
        for f in &files {
            if f.report.dropped() > 0 {
                run.warn(
                    Stage::Ingest,
                    format!(
                        "{}: dropped {} malformed and {} duplicate rows",
                        f.path.display(),
                        f.report.malformed_rows,
                        f.report.duplicate_rows
                    ),
                );
            }
        }
        run.summary(
            Stage::Ingest,
            json!({ "files": files, "rows": table.len(), "players": table.players() }),
        );
        Ok(table)
    })
}

/// Re-emits the loaded dataset in canonical form.
pub fn ingest(cfg: &PipelineConfig, run: &mut Run) -> Result<DatasetTable, CliError> {
    let table = load(cfg, run, Stage::Ingest)?;
    write_dataset(run, Stage::Ingest, &table)?;
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct Clustering {
    pub model: ClusterModel,
    pub row_keys: Vec<RowKey>,
    pub suggested_k: Option<usize>,
    pub silhouette: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SegmentOutcome {
    pub classes: ClassAssignment,
    pub clustering: Clustering,
    pub labelling: Option<ClusterLabelling>,
}

/// Standardize, PCA, elbow curve and k-means; writes `pca.json`,
/// `elbow.csv` and `clusters.json`.
fn cluster_rows(
    cfg: &PipelineConfig,
    matrix: FeatureMatrix,
    run: &mut Run,
) -> Result<Clustering, CliError> {
    const S: Stage = Stage::Segment;
    let z = if cfg.standardize {
        standardize(&matrix).at(S, "standardize")?
    } else {
        matrix
    };
    for &j in z.constant_columns() {
        run.record_warning(S, &format!("feature {} is constant", z.column_names()[j]));
    }
    let pca = pca_fit(z.values(), cfg.clustering.pca).at(S, "pca_fit")?;
    let scores = pca.transform(z.values()).at(S, "pca_transform")?;
    let components: Vec<Vec<f64>> = pca
        .components
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    run.out.write_json(
        S,
        PCA_FILE,
        &json!({
            "features": z.column_names(),
            "components": components,
            "explained_variance_ratio": pca.explained_variance_ratio,
            "mean": pca.mean.iter().copied().collect::<Vec<f64>>(),
        }),
    )?;

    let params = &cfg.clustering.kmeans;
    let n = scores.nrows();
    let k_hi = cfg.clustering.k_max.min(n);
    let elbow = if k_hi >= 3 {
        let curve = elbow_curve(&scores, 1, k_hi, params, cfg.seed).at(S, "elbow_curve")?;
        run.out.write(S, ELBOW_FILE, |w| Ok(curve.write_csv(w)?))?;
        Some(curve)
    } else {
        run.warn(S, format!("only {n} samples; elbow curve skipped"));
        None
    };
    let k = match (cfg.clustering.k, &elbow) {
        (KChoice::Fixed(k), _) => k,
        (KChoice::Auto, Some(curve)) => curve.suggested_k,
        (KChoice::Auto, None) => {
            let msg = format!("k = \"auto\" needs at least 3 samples, got {n}");
            return Err(CliError::new(S, "choose_k", Failure::Config(msg)));
        }
    };
    let model = minibatch_kmeans(&scores, k, params, cfg.seed).at(S, "minibatch_kmeans")?;
    run.out.write_json(S, CLUSTERS_FILE, &model)?;
    let silhouette = if k >= 2 {
        silhouette(&scores, &model.assignments)
            .ok()
            .map(|s| s.mean_score)
    } else {
        None
    };
    run.summary(
        S,
        json!({
            "samples": n,
            "features": z.column_names(),
            "pca_dim": pca.dim(),
            "k": k,
            "suggested_k": elbow.as_ref().map(|c| c.suggested_k),
            "inertia": model.inertia,
            "silhouette": silhouette,
            "cluster_sizes": model.cluster_sizes(),
        }),
    );
    Ok(Clustering {
        model,
        row_keys: z.row_keys().to_vec(),
        suggested_k: elbow.map(|c| c.suggested_k),
        silhouette,
    })
}

/// Clustering only, on a generic numeric matrix.
pub fn segment_matrix(cfg: &PipelineConfig, run: &mut Run) -> Result<Clustering, CliError> {
    run.timed(Stage::Segment, |run| {
        let path = cfg.matrix.as_ref().expect("caller checks for a matrix");
        let matrix = read_matrix_csv(path, Stage::Segment)?;
        cluster_rows(cfg, matrix, run)
    })
}

pub fn segment(
    cfg: &PipelineConfig,
    table: &DatasetTable,
    run: &mut Run,
) -> Result<SegmentOutcome, CliError> {
    run.timed(Stage::Segment, |run| segment_inner(cfg, table, run))
}

fn segment_inner(
    cfg: &PipelineConfig,
    table: &DatasetTable,
    run: &mut Run,
) -> Result<SegmentOutcome, CliError> {
    const S: Stage = Stage::Segment;
    let seg = &cfg.segmentation;
    let pooled = pool_features(table, &cfg.features).at(S, "pool_features")?;
    let classes = assign_classes(table, seg.orientation).at(S, "assign_classes")?;
    run.out.write(S, CLASSES_FILE, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "player_id",
            "class",
            "low_count",
            "medium_count",
            "high_count",
        ])?;
        for (player, class) in &classes.classes {
            let c = classes.counts[player];
            csv.write_record([
                player.clone(),
                class.to_string(),
                c[0].to_string(),
                c[1].to_string(),
                c[2].to_string(),
            ])?;
        }
        csv.flush().map_err(csv::Error::from)?;
        Ok(())
    })?;

    let clustering = cluster_rows(cfg, pooled, run)?;
    let model = &clustering.model;
    let sample_players: Vec<String> = clustering
        .row_keys
        .iter()
        .map(|k| k.player_id.clone())
        .collect();
    let proportions = proportion_buckets(
        &classes.classes,
        &sample_players,
        &model.assignments,
        model.k,
        &seg.bucket_edges,
    )
    .at(S, "proportion_buckets")?;
    run.out
        .write(S, PROPORTIONS_FILE, |w| Ok(proportions.write_csv(w)?))?;
    run.out
        .write_json(S, PLAYER_PROPORTIONS_FILE, &proportions.per_player)?;

    let labelling = if model.k == 3 {
        let l = label(
            cfg,
            table,
            &classes.classes,
            &clustering.row_keys,
            &model.assignments,
            run,
        )?;
        run.out.write_json(S, LABELLING_FILE, &l)?;
        Some(l)
    } else {
        run.warn(
            S,
            format!(
                "cluster labelling needs k = 3, got k = {}; skipped",
                model.k
            ),
        );
        None
    };
    run.summary(
        S,
        json!({
            "rank_bands": classes.bands,
            "classes": classes.classes,
            "cluster_to_class": labelling.as_ref().map(|l| &l.mapping),
        }),
    );
    Ok(SegmentOutcome {
        classes,
        clustering,
        labelling,
    })
}

type RowLookup = BTreeMap<(String, NaiveDate, Option<NaiveDateTime>), usize>;

/// Cluster of a correlation-matrix row: exact key first, then its player-day.
fn cluster_of(lookup: &RowLookup, key: &RowKey) -> Option<usize> {
    let exact = (key.player_id.clone(), key.date, key.timestamp);
    lookup
        .get(&exact)
        .or_else(|| lookup.get(&(key.player_id.clone(), key.date, None)))
        .copied()
}

fn group_correlation(
    cfg: &PipelineConfig,
    matrix: &FeatureMatrix,
    rows: &[usize],
    group: &str,
) -> Result<CorrelationMatrix, CliError> {
    const S: Stage = Stage::Segment;
    if rows.len() < 2 {
        let msg = format!("group {group} has {} rows; need at least 2", rows.len());
        return Err(SegmentationError::Shape(msg)).at(S, "group_correlation");
    }
    let sub = matrix.select_rows(rows);
    let mut corr = correlation_matrix(&sub).at(S, "correlation_matrix")?;
    if cfg.segmentation.correlation_source == CorrelationSource::Glasso {
        let mut options = cfg.glasso.options.clone();
        options.seed = cfg.seed;
        let graph = graphical_lasso(&sub, &options).at(S, "graphical_lasso")?;
        let p = corr.values.nrows();
        for a in 0..p {
            for b in 0..p {
                if a != b && !graph.has_edge(a, b) {
                    corr.values[(a, b)] = 0.0;
                }
            }
        }
    }
    Ok(corr)
}

fn label(
    cfg: &PipelineConfig,
    table: &DatasetTable,
    class_map: &BTreeMap<String, ClassLabel>,
    cluster_keys: &[RowKey],
    assignments: &[usize],
    run: &mut Run,
) -> Result<ClusterLabelling, CliError> {
    const S: Stage = Stage::Segment;
    let matrix =
        pool_features(table, &cfg.segmentation.correlation_features).at(S, "pool_features")?;
    let lookup: RowLookup = cluster_keys
        .iter()
        .zip(assignments)
        .map(|(k, &a)| ((k.player_id.clone(), k.date, k.timestamp), a))
        .collect();
    let mut class_rows: [Vec<usize>; 3] = Default::default();
    let mut cluster_rows: [Vec<usize>; 3] = Default::default();
    for (i, key) in matrix.row_keys().iter().enumerate() {
        let cluster = cluster_of(&lookup, key).ok_or_else(|| {
            CliError::new(
                S,
                "label_clusters",
                Failure::Config(
                    "correlation features must be at the clustering granularity or finer".into(),
                ),
            )
        })?;
        cluster_rows[cluster].push(i);
        let class = class_map
            .get(&key.player_id)
            .ok_or_else(|| SegmentationError::UnknownPlayer(key.player_id.clone()))
            .at(S, "label_clusters")?;
        class_rows[class.index()].push(i);
    }

    let mut class_corrs = Vec::with_capacity(3);
    for class in ClassLabel::ALL {
        let corr = group_correlation(cfg, &matrix, &class_rows[class.index()], class.as_str())?;
        let name = format!("correlations/class_{class}.csv");
        run.out.write(S, &name, |w| Ok(corr.write_csv(w)?))?;
        class_corrs.push(corr);
    }
    let mut cluster_corrs = Vec::with_capacity(3);
    for (c, rows) in cluster_rows.iter().enumerate() {
        let corr = group_correlation(cfg, &matrix, rows, &format!("cluster {c}"))?;
        let name = format!("correlations/cluster_{c}.csv");
        run.out.write(S, &name, |w| Ok(corr.write_csv(w)?))?;
        cluster_corrs.push(corr);
    }
    let class_corrs: [CorrelationMatrix; 3] = class_corrs.try_into().expect("three classes");
    label_clusters(&cluster_corrs, &class_corrs, cfg.segmentation.similarity)
        .at(S, "label_clusters")
}

pub fn glasso(
    cfg: &PipelineConfig,
    table: Option<&DatasetTable>,
    run: &mut Run,
) -> Result<GraphEstimate, CliError> {
    run.timed(Stage::Glasso, |run| {
        const S: Stage = Stage::Glasso;
        let matrix = match (&cfg.matrix, table) {
            (Some(path), _) => read_matrix_csv(path, S)?,
            (None, Some(table)) => {
                let players = &cfg.glasso.players;
                let subset;
                let table = if players.is_empty() {
                    table
                } else {
                    subset = table.filter_players(|p| players.iter().any(|q| q == p));
                    &subset
                };
                pool_features(table, &cfg.glasso.features).at(S, "pool_features")?
            }
            (None, None) => unreachable!("caller loads a table when no matrix is given"),
        };
        let mut options = cfg.glasso.options.clone();
        options.seed = cfg.seed;
        let graph = graphical_lasso(&matrix, &options).at(S, "graphical_lasso")?;
        for w in &graph.warnings {
            run.record_warning(S, w);
        }
        run.out.write(S, GRAPH_FILE, |w| {
            serde_json::to_writer_pretty(&mut *w, &graph.to_json())?;
            std::io::Write::write_all(w, b"\n").map_err(|e| Failure::Serialize(e.to_string()))
        })?;
        run.out.write(S, EDGES_FILE, |w| Ok(graph.write_edges_csv(w)?))?;
        run.summary(
            S,
            json!({
                "samples": matrix.nrows(),
                "vertices": graph.vertex_names,
                "edges": graph.edges.len(),
                "symmetrization": graph.symmetrization,
                "lambda_per_vertex": graph.lambda_per_vertex(),
                "unconverged_vertices": graph.per_vertex_fits.iter().filter(|f| !f.converged).map(|f| f.vertex).collect::<Vec<_>>(),
            }),
        );
        Ok(graph)
    })
}

#[derive(Clone, Debug, Serialize)]
struct LagRow {
    player_type: String,
    cause: String,
    effect: String,
    #[serde(flatten)]
    selection: LagSelection,
}

/// Granger grid per supervised class. Singular pairs are reported as
/// inconclusive rows instead of failing the run.
pub fn causality(
    cfg: &PipelineConfig,
    table: &DatasetTable,
    classes: &BTreeMap<String, ClassLabel>,
    run: &mut Run,
) -> Result<Vec<(String, CausalityResult)>, CliError> {
    run.timed(Stage::Causality, |run| {
        const S: Stage = Stage::Causality;
        let c = &cfg.causality;
        let options = GrangerOptions {
            lag: c.lag,
            alpha: c.alpha,
            difference: c.difference,
        };
        let mut rows = Vec::new();
        let mut lag_rows = Vec::new();
        for class in ClassLabel::ALL {
            let players: Vec<&str> = classes
                .iter()
                .filter(|(_, &k)| k == class)
                .map(|(p, _)| p.as_str())
                .collect();
            if players.is_empty() {
                run.warn(S, format!("no {class} players; class skipped"));
                continue;
            }
            for pair in &c.pairs {
                let series = paired_day_series(table, &players, pair.cause, pair.effect)
                    .at(S, "build_series")?;
                let refs: Vec<(&[f64], &[f64])> = series
                    .iter()
                    .map(|(x, y)| (x.as_slice(), y.as_slice()))
                    .collect();
                let result = match granger_test_segments(&refs, &options) {
                    Ok(r) => r,
                    Err(StatsError::SingularDesign) => {
                        run.warn(
                            S,
                            format!(
                                "{class}: {} => {} is singular; reported inconclusive",
                                pair.cause, pair.effect
                            ),
                        );
                        let n = series
                            .iter()
                            .map(|(_, y)| y.len().saturating_sub(c.lag))
                            .sum();
                        CausalityResult::inconclusive(c.lag, c.alpha, n)
                    }
                    Err(e) => return Err(e).at(S, "granger_test"),
                };
                rows.push((
                    class.to_string(),
                    result.named(pair.cause.to_string(), pair.effect.to_string()),
                ));
                if let Some(max_lag) = c.bic_max_lag {
                    match select_lag_bic(&refs, max_lag, c.difference) {
                        Ok(selection) => lag_rows.push(LagRow {
                            player_type: class.to_string(),
                            cause: pair.cause.to_string(),
                            effect: pair.effect.to_string(),
                            selection,
                        }),
                        Err(StatsError::SingularDesign) => {}
                        Err(e) => return Err(e).at(S, "select_lag_bic"),
                    }
                }
            }
        }
        run.out
            .write(S, CAUSALITY_FILE, |w| Ok(write_causality_csv(&rows, w)?))?;
        if c.bic_max_lag.is_some() {
            run.out.write_json(S, LAG_SELECTION_FILE, &lag_rows)?;
        }
        run.summary(
            S,
            json!({
                "tests": rows.len(),
                "rejections": rows.iter().filter(|(_, r)| r.reject_h0).count(),
                "inconclusive": rows.iter().filter(|(_, r)| r.inconclusive).count(),
                "lag": c.lag,
                "alpha": c.alpha,
            }),
        );
        ttest(cfg, table, run)?;
        Ok(rows)
    })
}

/// Daily usage minutes per resource before and after `ttest.split_date`.
fn ttest(cfg: &PipelineConfig, table: &DatasetTable, run: &mut Run) -> Result<(), CliError> {
    const S: Stage = Stage::Causality;
    let Some(split) = cfg.ttest.split_date else {
        return Ok(());
    };
    let mut rows = Vec::new();
    for (period, weekend) in [("weekday", false), ("weekend", true)] {
        for r in ResourceKind::ALL {
            let (mut before, mut after) = (Vec::new(), Vec::new());
            for day in table.player_day_slices() {
                if day[0].flags.get(CalendarFlag::Weekend) != weekend {
                    continue;
                }
                let minutes = day.iter().map(|rec| rec.usage_today[r]).fold(0.0, f64::max);
                if day[0].date() < split {
                    before.push(minutes);
                } else {
                    after.push(minutes);
                }
            }
            if before.len() < 2 || after.len() < 2 {
                run.warn(
                    S,
                    format!(
                        "t-test for {} on {period}s skipped: {} days before, {} after",
                        r.key(),
                        before.len(),
                        after.len()
                    ),
                );
                continue;
            }
            let t = two_sample_ttest(&before, &after).at(S, "two_sample_ttest")?;
            rows.push((period, r, before.len(), after.len(), t));
        }
    }
    run.out.write(S, TTEST_FILE, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "period",
            "resource",
            "n_before",
            "n_after",
            "mean_before",
            "mean_after",
            "t_statistic",
            "degrees_of_freedom",
            "p_value",
            "percent_drop",
        ])?;
        for (period, r, nb, na, t) in &rows {
            csv.write_record([
                period.to_string(),
                r.key().to_string(),
                nb.to_string(),
                na.to_string(),
                format_float(t.mean_before),
                format_float(t.mean_after),
                format_float(t.t_statistic),
                format_float(t.degrees_of_freedom),
                format_float(t.p_value),
                t.percent_drop.map(format_float).unwrap_or_default(),
            ])?;
        }
        csv.flush().map_err(csv::Error::from)?;
        Ok(())
    })
}
