use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Result, SegmentationError};
use crate::data::{DatasetTable, OccupantRecord};

/// Energy-efficiency class, ordered `Low < Medium < High`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Low,
    Medium,
    High,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Low, ClassLabel::Medium, ClassLabel::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Low => "low",
            ClassLabel::Medium => "medium",
            ClassLabel::High => "high",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClassLabel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ClassLabel::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown class `{s}`"))
    }
}

/// Which end of the leaderboard is best.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOrientation {
    #[default]
    OneIsBest,
    OneIsWorst,
}

/// Three near-equal integer segments of the observed rank range.
///
/// Widths are listed best segment first and differ by at most one; any
/// remainder goes to the better segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankBands {
    pub rank_min: u32,
    pub rank_max: u32,
    pub orientation: RankOrientation,
    /// Widths of the high, medium and low bands.
    pub widths: [u32; 3],
}

impl RankBands {
    pub fn new(rank_min: u32, rank_max: u32, orientation: RankOrientation) -> Self {
        let span = rank_max - rank_min + 1;
        let base = span / 3;
        let rem = span % 3;
        let widths = [base + u32::from(rem >= 1), base + u32::from(rem == 2), base];
        RankBands {
            rank_min,
            rank_max,
            orientation,
            widths,
        }
    }

    /// Distance from the best observed rank.
    fn position(&self, rank: u32) -> u32 {
        match self.orientation {
            RankOrientation::OneIsBest => rank.saturating_sub(self.rank_min),
            RankOrientation::OneIsWorst => self.rank_max.saturating_sub(rank),
        }
    }

    pub fn band_of(&self, rank: u32) -> ClassLabel {
        let pos = self.position(rank);
        if pos < self.widths[0] {
            ClassLabel::High
        } else if pos < self.widths[0] + self.widths[1] {
            ClassLabel::Medium
        } else {
            ClassLabel::Low
        }
    }

    /// Last rank of the high band and of the medium band.
    pub fn cut_points(&self) -> [u32; 2] {
        let a = self.widths[0];
        let b = a + self.widths[1];
        match self.orientation {
            RankOrientation::OneIsBest => [
                (self.rank_min + a).saturating_sub(1),
                (self.rank_min + b).saturating_sub(1),
            ],
            RankOrientation::OneIsWorst => [self.rank_max + 1 - a, self.rank_max + 1 - b],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassAssignment {
    pub classes: BTreeMap<String, ClassLabel>,
    /// Per player, data points in the low, medium and high bands.
    pub counts: BTreeMap<String, [usize; 3]>,
    pub bands: RankBands,
}

/// Assigns every player to the class whose rank band holds most of their
/// data points; ties go to the more efficient class.
pub fn assign_classes(
    table: &DatasetTable,
    orientation: RankOrientation,
) -> Result<ClassAssignment> {
    assign_classes_from_records(table.records(), orientation)
}

pub fn assign_classes_from_records(
    records: &[OccupantRecord],
    orientation: RankOrientation,
) -> Result<ClassAssignment> {
    if records.is_empty() {
        return Err(SegmentationError::NoPlayers);
    }
    let mut ranks = Vec::with_capacity(records.len());
    for rec in records {
        let rank = rec.rank.ok_or_else(|| SegmentationError::MissingRank {
            player: rec.player_id.clone(),
            timestamp: rec.timestamp.to_string(),
        })?;
        ranks.push(rank);
    }
    let lo = *ranks.iter().min().expect("non-empty");
    let hi = *ranks.iter().max().expect("non-empty");
    let bands = RankBands::new(lo, hi, orientation);

    let mut counts: BTreeMap<String, [usize; 3]> = BTreeMap::new();
    for (rec, &rank) in records.iter().zip(&ranks) {
        counts.entry(rec.player_id.clone()).or_default()[bands.band_of(rank).index()] += 1;
    }
    let classes = counts
        .iter()
        .map(|(player, c)| {
            let mut best = ClassLabel::High;
            for label in [ClassLabel::Medium, ClassLabel::Low] {
                if c[label.index()] > c[best.index()] {
                    best = label;
                }
            }
            (player.clone(), best)
        })
        .collect();
    Ok(ClassAssignment {
        classes,
        counts,
        bands,
    })
}
