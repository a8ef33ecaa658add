use std::fmt;
use std::ops::{Index, IndexMut};

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Metered resources in a dorm room.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    CeilingLight,
    DeskLight,
    CeilingFan,
    AirCon,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 4] = [
        ResourceKind::CeilingLight,
        ResourceKind::DeskLight,
        ResourceKind::CeilingFan,
        ResourceKind::AirCon,
    ];

    /// Column suffix used in CSV headers and feature names.
    pub fn key(self) -> &'static str {
        match self {
            ResourceKind::CeilingLight => "ceiling_light",
            ResourceKind::DeskLight => "desk_light",
            ResourceKind::CeilingFan => "fan",
            ResourceKind::AirCon => "ac",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.key() == key)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// One value per [`ResourceKind`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerResource<T>(pub [T; 4]);

impl<T: Copy> PerResource<T> {
    pub fn splat(value: T) -> Self {
        PerResource([value; 4])
    }

    pub fn iter(&self) -> impl Iterator<Item = (ResourceKind, T)> + '_ {
        ResourceKind::ALL.into_iter().map(move |r| (r, self[r]))
    }
}

impl<T> Index<ResourceKind> for PerResource<T> {
    type Output = T;
    fn index(&self, r: ResourceKind) -> &T {
        &self.0[r.index()]
    }
}

impl<T> IndexMut<ResourceKind> for PerResource<T> {
    fn index_mut(&mut self, r: ResourceKind) -> &mut T {
        &mut self.0[r.index()]
    }
}

/// Binary calendar indicators attached to every record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalendarFlag {
    Weekend,
    Morning,
    Afternoon,
    Evening,
    Break,
    Midterm,
    Final,
}

impl CalendarFlag {
    pub const ALL: [CalendarFlag; 7] = [
        CalendarFlag::Weekend,
        CalendarFlag::Morning,
        CalendarFlag::Afternoon,
        CalendarFlag::Evening,
        CalendarFlag::Break,
        CalendarFlag::Midterm,
        CalendarFlag::Final,
    ];

    pub fn key(self) -> &'static str {
        match self {
            CalendarFlag::Weekend => "is_weekend",
            CalendarFlag::Morning => "is_morning",
            CalendarFlag::Afternoon => "is_afternoon",
            CalendarFlag::Evening => "is_evening",
            CalendarFlag::Break => "is_break",
            CalendarFlag::Midterm => "is_midterm",
            CalendarFlag::Final => "is_final",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.key() == key)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarFlags(pub [bool; 7]);

impl CalendarFlags {
    pub fn get(&self, flag: CalendarFlag) -> bool {
        self.0[flag as usize]
    }

    pub fn set(&mut self, flag: CalendarFlag, value: bool) {
        self.0[flag as usize] = value;
    }
}

/// One per-minute observation of a player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupantRecord {
    pub timestamp: NaiveDateTime,
    pub player_id: String,
    pub status: PerResource<bool>,
    /// Minutes of use accumulated since midnight, including this minute.
    pub usage_today: PerResource<f64>,
    pub baseline: PerResource<f64>,
    pub points_total: f64,
    /// 1 is the leaderboard top.
    pub rank: Option<u32>,
    pub portal_visits: u32,
    pub humidity: f64,
    pub temperature: f64,
    pub solar_radiation: f64,
    pub flags: CalendarFlags,
}

impl OccupantRecord {
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date()
    }

    pub fn minute_of_day(&self) -> u32 {
        self.timestamp.hour() * 60 + self.timestamp.minute()
    }

    /// Checks the per-record invariants; the message names the first violation.
    pub fn validate(&self) -> Result<(), String> {
        if self.timestamp.second() != 0 || self.timestamp.nanosecond() != 0 {
            return Err("timestamp is not at minute resolution".into());
        }
        let elapsed = f64::from(self.minute_of_day() + 1);
        for r in ResourceKind::ALL {
            let u = self.usage_today[r];
            if !u.is_finite() || u < 0.0 {
                return Err(format!("usage_{} = {u} is negative or not finite", r.key()));
            }
            if u > elapsed {
                return Err(format!(
                    "usage_{} = {u} exceeds the {elapsed} minutes elapsed that day",
                    r.key()
                ));
            }
            let b = self.baseline[r];
            if !(b.is_finite() && b > 0.0) {
                return Err(format!("baseline_{} = {b} is not positive", r.key()));
            }
        }
        if self.rank == Some(0) {
            return Err("rank must be >= 1".into());
        }
        if !(0.0..=100.0).contains(&self.humidity) {
            return Err(format!("humidity {} outside [0, 100]", self.humidity));
        }
        if !self.temperature.is_finite() {
            return Err("temperature is not finite".into());
        }
        if !(self.solar_radiation.is_finite() && self.solar_radiation >= 0.0) {
            return Err(format!(
                "solar_radiation {} is negative",
                self.solar_radiation
            ));
        }
        if !self.points_total.is_finite() {
            return Err("points_total is not finite".into());
        }
        Ok(())
    }
}

/// Records sorted by `(player_id, timestamp)` with no duplicate keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetTable {
    records: Vec<OccupantRecord>,
    pub schema_version: u32,
}

impl DatasetTable {
    /// Sorts the records and drops repeated `(player_id, timestamp)` keys,
    /// keeping the first occurrence. Returns the table and the number dropped.
    pub fn from_records(mut records: Vec<OccupantRecord>) -> (Self, usize) {
        // stable, so the first occurrence of a duplicate key survives
        records.sort_by(|a, b| {
            a.player_id
                .cmp(&b.player_id)
                .then(a.timestamp.cmp(&b.timestamp))
        });
        let before = records.len();
        records.dedup_by(|later, earlier| {
            later.player_id == earlier.player_id && later.timestamp == earlier.timestamp
        });
        let dropped = before - records.len();
        (
            DatasetTable {
                records,
                schema_version: SCHEMA_VERSION,
            },
            dropped,
        )
    }

    pub fn records(&self) -> &[OccupantRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct player ids in sorted order.
    pub fn players(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.records {
            if out.last() != Some(&r.player_id.as_str()) {
                out.push(&r.player_id);
            }
        }
        out
    }

    /// Contiguous record slices, one per player.
    pub fn player_slices(&self) -> impl Iterator<Item = &[OccupantRecord]> {
        self.records.chunk_by(|a, b| a.player_id == b.player_id)
    }

    /// Contiguous record slices, one per `(player, day)`.
    pub fn player_day_slices(&self) -> impl Iterator<Item = &[OccupantRecord]> {
        self.records
            .chunk_by(|a, b| a.player_id == b.player_id && a.date() == b.date())
    }

    /// Keeps the records whose player satisfies `keep`.
    pub fn filter_players(&self, mut keep: impl FnMut(&str) -> bool) -> DatasetTable {
        DatasetTable {
            records: self
                .records
                .iter()
                .filter(|r| keep(&r.player_id))
                .cloned()
                .collect(),
            schema_version: self.schema_version,
        }
    }
}
