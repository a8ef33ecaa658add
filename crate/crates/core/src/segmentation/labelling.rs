use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::classes::ClassLabel;
use super::correlation::{CorrelationMatrix, SimilarityMethod};
use super::{Result, SegmentationError};
use crate::data::format_float;

/// Cluster-to-class matching.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterLabelling {
    /// `mapping[c]` is the class assigned to cluster `c`.
    pub mapping: Vec<ClassLabel>,
    /// `similarity_matrix[c][k]`: cluster `c` against class `k` (low, medium, high).
    pub similarity_matrix: Vec<[f64; 3]>,
    pub matched_similarities: Vec<f64>,
    pub total_similarity: f64,
    pub method: SimilarityMethod,
}

impl ClusterLabelling {
    pub fn class_of(&self, cluster: usize) -> ClassLabel {
        self.mapping[cluster]
    }
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Matches three cluster correlation matrices to the low, medium and high
/// class matrices by the bijection with the largest total similarity.
/// Exact ties keep the earlier permutation in lexicographic order.
pub fn label_clusters(
    cluster_corrs: &[CorrelationMatrix],
    class_corrs: &[CorrelationMatrix; 3],
    method: SimilarityMethod,
) -> Result<ClusterLabelling> {
    if cluster_corrs.len() != 3 {
        return Err(SegmentationError::GroupCount {
            expected: 3,
            got: cluster_corrs.len(),
        });
    }
    let names = &class_corrs[0].names;
    if cluster_corrs
        .iter()
        .chain(class_corrs.iter())
        .any(|m| &m.names != names)
    {
        return Err(SegmentationError::FeatureOrderMismatch);
    }
    let mut sim = vec![[0.0; 3]; 3];
    for (c, cluster) in cluster_corrs.iter().enumerate() {
        for (k, class) in class_corrs.iter().enumerate() {
            sim[c][k] = method.similarity(&cluster.values, &class.values)?;
        }
    }
    let total = |perm: &[usize; 3]| (0..3).map(|c| sim[c][perm[c]]).sum::<f64>();
    let mut best = PERMUTATIONS[0];
    let mut best_total = total(&best);
    for perm in &PERMUTATIONS[1..] {
        let t = total(perm);
        if t > best_total {
            best = *perm;
            best_total = t;
        }
    }
    Ok(ClusterLabelling {
        mapping: best.iter().map(|&k| ClassLabel::ALL[k]).collect(),
        matched_similarities: (0..3).map(|c| sim[c][best[c]]).collect(),
        similarity_matrix: sim,
        total_similarity: best_total,
        method,
    })
}

/// Bucket edges `0, 0.1, ..., 1.0`.
pub fn decile_edges() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) / 10.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerProportions {
    pub class: ClassLabel,
    pub samples: usize,
    /// Share of the player's samples in each cluster.
    pub proportions: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketCount {
    pub class: ClassLabel,
    pub cluster: usize,
    pub lower: f64,
    pub upper: f64,
    pub players: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionReport {
    pub k: usize,
    pub bucket_edges: Vec<f64>,
    pub per_player: BTreeMap<String, PlayerProportions>,
    /// One entry per (class, cluster, bucket), classes outermost.
    pub counts: Vec<BucketCount>,
}

impl ProportionReport {
    pub fn count(&self, class: ClassLabel, cluster: usize, bucket: usize) -> usize {
        let buckets = self.bucket_edges.len() - 1;
        self.counts[(class.index() * self.k + cluster) * buckets + bucket].players
    }

    /// `class,cluster,bucket_lower,bucket_upper,players`
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record([
            "class",
            "cluster",
            "bucket_lower",
            "bucket_upper",
            "players",
        ])?;
        for c in &self.counts {
            w.write_record([
                c.class.to_string(),
                c.cluster.to_string(),
                format_float(c.lower),
                format_float(c.upper),
                c.players.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Per player, the share of their samples falling in each cluster, and a
/// histogram of those shares per (class, cluster).
///
/// Buckets are half-open `[lo, hi)` except the last, which includes its
/// upper edge. Shares outside the edges are not counted.
pub fn proportion_buckets(
    class_map: &BTreeMap<String, ClassLabel>,
    sample_players: &[String],
    assignments: &[usize],
    k: usize,
    bucket_edges: &[f64],
) -> Result<ProportionReport> {
    let edges_ok = bucket_edges.len() >= 2
        && bucket_edges.iter().all(|e| e.is_finite())
        && bucket_edges.windows(2).all(|w| w[0] < w[1]);
    if !edges_ok {
        return Err(SegmentationError::EmptyBuckets(bucket_edges.to_vec()));
    }
    if sample_players.len() != assignments.len() {
        return Err(SegmentationError::Shape(format!(
            "{} sample players but {} assignments",
            sample_players.len(),
            assignments.len()
        )));
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
        return Err(SegmentationError::Shape(format!(
            "assignment {bad} out of range for k = {k}"
        )));
    }

    let mut tallies: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (player, &cluster) in sample_players.iter().zip(assignments) {
        tallies.entry(player.as_str()).or_insert_with(|| vec![0; k])[cluster] += 1;
    }
    let mut per_player = BTreeMap::new();
    for (player, counts) in tallies {
        let class = *class_map
            .get(player)
            .ok_or_else(|| SegmentationError::UnknownPlayer(player.to_string()))?;
        let samples: usize = counts.iter().sum();
        let proportions = counts.iter().map(|&c| c as f64 / samples as f64).collect();
        per_player.insert(
            player.to_string(),
            PlayerProportions {
                class,
                samples,
                proportions,
            },
        );
    }

    let buckets = bucket_edges.len() - 1;
    let bucket_of = |v: f64| -> Option<usize> {
        if v == bucket_edges[buckets] {
            return Some(buckets - 1);
        }
        bucket_edges.windows(2).position(|w| w[0] <= v && v < w[1])
    };
    let mut counts = Vec::with_capacity(3 * k * buckets);
    for class in ClassLabel::ALL {
        for cluster in 0..k {
            for b in 0..buckets {
                counts.push(BucketCount {
                    class,
                    cluster,
                    lower: bucket_edges[b],
                    upper: bucket_edges[b + 1],
                    players: 0,
                });
            }
        }
    }
    for pp in per_player.values() {
        for (cluster, &v) in pp.proportions.iter().enumerate() {
            if let Some(b) = bucket_of(v) {
                counts[(pp.class.index() * k + cluster) * buckets + b].players += 1;
            }
        }
    }
    Ok(ProportionReport {
        k,
        bucket_edges: bucket_edges.to_vec(),
        per_player,
        counts,
    })
}
