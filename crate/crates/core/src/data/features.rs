use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::record::{CalendarFlag, DatasetTable, OccupantRecord, ResourceKind};
use super::{DataError, Result};

/// A named column that [`pool_features`] knows how to produce.
///
/// Raw fields are read from each record (and averaged over the day in daily
/// mode). Pooled fields summarize one player-day and are repeated on every
/// record of that day in per-minute mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureName {
    Status(ResourceKind),
    Usage(ResourceKind),
    Baseline(ResourceKind),
    PointsTotal,
    Rank,
    PortalVisits,
    Humidity,
    Temperature,
    SolarRadiation,
    Flag(CalendarFlag),
    /// Status transitions within the day.
    Switches(ResourceKind),
    /// Fraction of the day's observed minutes the resource was on.
    UsagePct(ResourceKind),
    /// Portal visits made during the day.
    PortalVisitsDaily,
}

impl FeatureName {
    pub fn is_pooled(self) -> bool {
        matches!(
            self,
            FeatureName::Switches(_) | FeatureName::UsagePct(_) | FeatureName::PortalVisitsDaily
        )
    }
}

impl FeatureName {
    /// Value on a single record; pooled features are rejected.
    pub fn record_value(self, rec: &OccupantRecord) -> Result<f64> {
        raw_value(rec, self)
    }
}

/// Per-record series of `x` and `y` for the given players, one pair of
/// vectors per player-day, in table order.
pub fn paired_day_series<S: AsRef<str>>(
    table: &DatasetTable,
    players: &[S],
    x: FeatureName,
    y: FeatureName,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut out = Vec::new();
    for day in table.player_day_slices() {
        if !players.iter().any(|p| p.as_ref() == day[0].player_id) {
            continue;
        }
        let xs = day
            .iter()
            .map(|r| raw_value(r, x))
            .collect::<Result<Vec<_>>>()?;
        let ys = day
            .iter()
            .map(|r| raw_value(r, y))
            .collect::<Result<Vec<_>>>()?;
        out.push((xs, ys));
    }
    Ok(out)
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureName::Status(r) => write!(f, "status_{}", r.key()),
            FeatureName::Usage(r) => write!(f, "usage_{}", r.key()),
            FeatureName::Baseline(r) => write!(f, "baseline_{}", r.key()),
            FeatureName::PointsTotal => f.write_str("points_total"),
            FeatureName::Rank => f.write_str("rank"),
            FeatureName::PortalVisits => f.write_str("portal_visits"),
            FeatureName::Humidity => f.write_str("humidity"),
            FeatureName::Temperature => f.write_str("temperature"),
            FeatureName::SolarRadiation => f.write_str("solar_radiation"),
            FeatureName::Flag(flag) => f.write_str(flag.key()),
            FeatureName::Switches(r) => write!(f, "switches_{}", r.key()),
            FeatureName::UsagePct(r) => write!(f, "usage_pct_{}", r.key()),
            FeatureName::PortalVisitsDaily => f.write_str("portal_visits_daily"),
        }
    }
}

impl FromStr for FeatureName {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || DataError::UnknownFeatureName(s.to_string());
        let simple = match s {
            "points_total" => Some(FeatureName::PointsTotal),
            "rank" => Some(FeatureName::Rank),
            "portal_visits" => Some(FeatureName::PortalVisits),
            "portal_visits_daily" => Some(FeatureName::PortalVisitsDaily),
            "humidity" => Some(FeatureName::Humidity),
            "temperature" => Some(FeatureName::Temperature),
            "solar_radiation" => Some(FeatureName::SolarRadiation),
            _ => CalendarFlag::from_key(s).map(FeatureName::Flag),
        };
        if let Some(name) = simple {
            return Ok(name);
        }
        // usage_pct_ must be tried before usage_
        type Ctor = fn(ResourceKind) -> FeatureName;
        let prefixed: [(&str, Ctor); 5] = [
            ("status_", FeatureName::Status),
            ("usage_pct_", FeatureName::UsagePct),
            ("usage_", FeatureName::Usage),
            ("baseline_", FeatureName::Baseline),
            ("switches_", FeatureName::Switches),
        ];
        prefixed
            .iter()
            .find_map(|(prefix, make)| {
                s.strip_prefix(prefix)
                    .and_then(ResourceKind::from_key)
                    .map(make)
            })
            .ok_or_else(unknown)
    }
}

impl Serialize for FeatureName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// One row per (player, day).
    #[default]
    Daily,
    /// One row per record.
    PerMinute,
}

/// Which columns to emit, in order, and at what granularity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub features: Vec<FeatureName>,
    pub granularity: Granularity,
}

impl FeatureSpec {
    pub fn new(features: Vec<FeatureName>, granularity: Granularity) -> Self {
        FeatureSpec {
            features,
            granularity,
        }
    }

    pub fn parse<S: AsRef<str>>(
        names: impl IntoIterator<Item = S>,
        granularity: Granularity,
    ) -> Result<Self> {
        let features = names
            .into_iter()
            .map(|n| n.as_ref().parse())
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureSpec {
            features,
            granularity,
        })
    }

    /// Behavioral features only: daily usage share, switch counts and portal
    /// visits. These are the occupant-controlled quantities.
    pub fn behavior() -> Self {
        let mut features: Vec<FeatureName> = ResourceKind::ALL.map(FeatureName::UsagePct).into();
        features.extend(ResourceKind::ALL.map(FeatureName::Switches));
        features.push(FeatureName::PortalVisitsDaily);
        FeatureSpec::new(features, Granularity::Daily)
    }

    /// Behavioral features plus weather and calendar context.
    pub fn with_context() -> Self {
        let mut spec = Self::behavior();
        spec.features.extend([
            FeatureName::Humidity,
            FeatureName::Temperature,
            FeatureName::SolarRadiation,
            FeatureName::Flag(CalendarFlag::Weekend),
            FeatureName::Flag(CalendarFlag::Break),
            FeatureName::Flag(CalendarFlag::Midterm),
            FeatureName::Flag(CalendarFlag::Final),
        ]);
        spec
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.to_string()).collect()
    }
}

/// Identifies the source of a feature-matrix row.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowKey {
    pub player_id: String,
    pub date: NaiveDate,
    /// Present for per-minute rows.
    pub timestamp: Option<NaiveDateTime>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns that had zero variance; they are all-zero after scaling.
    pub constant_columns: Vec<usize>,
}

/// N x p design matrix with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    values: DMatrix<f64>,
    column_names: Vec<String>,
    row_keys: Vec<RowKey>,
    scaling: Option<ColumnScaling>,
}

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        if values.ncols() != column_names.len() {
            return Err(DataError::Shape(format!(
                "{} columns but {} names",
                values.ncols(),
                column_names.len()
            )));
        }
        Ok(FeatureMatrix {
            values,
            column_names,
            row_keys: Vec::new(),
            scaling: None,
        })
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(column_names: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(DataError::Shape("columns differ in length".into()));
        }
        let values = DMatrix::from_iterator(n, columns.len(), columns.iter().flatten().copied());
        Self::new(values, column_names)
    }

    pub fn with_row_keys(mut self, row_keys: Vec<RowKey>) -> Result<Self> {
        if row_keys.len() != self.nrows() {
            return Err(DataError::Shape(format!(
                "{} rows but {} row keys",
                self.nrows(),
                row_keys.len()
            )));
        }
        self.row_keys = row_keys;
        Ok(self)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Column `j` as a contiguous slice.
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.nrows();
        &self.values.as_slice()[j * n..(j + 1) * n]
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Empty when the matrix was built without provenance.
    pub fn row_keys(&self) -> &[RowKey] {
        &self.row_keys
    }

    pub fn is_standardized(&self) -> bool {
        self.scaling.is_some()
    }

    pub fn scaling(&self) -> Option<&ColumnScaling> {
        self.scaling.as_ref()
    }

    pub fn column_means(&self) -> Option<&[f64]> {
        self.scaling.as_ref().map(|s| s.means.as_slice())
    }

    pub fn column_stds(&self) -> Option<&[f64]> {
        self.scaling.as_ref().map(|s| s.stds.as_slice())
    }

    pub fn constant_columns(&self) -> &[usize] {
        self.scaling
            .as_ref()
            .map_or(&[][..], |s| s.constant_columns.as_slice())
    }

    /// Row subset. The result is marked unstandardized since the subset no
    /// longer has zero-mean unit-variance columns.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let values = self.values.select_rows(rows.iter());
        let row_keys = if self.row_keys.is_empty() {
            Vec::new()
        } else {
            rows.iter().map(|&i| self.row_keys[i].clone()).collect()
        };
        FeatureMatrix {
            values,
            column_names: self.column_names.clone(),
            row_keys,
            scaling: None,
        }
    }

    /// Column subset by name, in the order given.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref())
                    .ok_or_else(|| DataError::UnknownFeatureName(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = self.values.select_columns(idx.iter());
        let scaling = self.scaling.as_ref().map(|s| ColumnScaling {
            means: idx.iter().map(|&j| s.means[j]).collect(),
            stds: idx.iter().map(|&j| s.stds[j]).collect(),
            constant_columns: idx
                .iter()
                .enumerate()
                .filter(|(_, j)| s.constant_columns.contains(j))
                .map(|(k, _)| k)
                .collect(),
        });
        Ok(FeatureMatrix {
            values,
            column_names: idx.iter().map(|&j| self.column_names[j].clone()).collect(),
            row_keys: self.row_keys.clone(),
            scaling,
        })
    }

    /// Undoes [`standardize`]. Constant columns come back as their mean.
    pub fn destandardize(&self) -> Option<DMatrix<f64>> {
        let s = self.scaling.as_ref()?;
        let mut out = self.values.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let scale = if s.constant_columns.contains(&j) {
                0.0
            } else {
                s.stds[j]
            };
            col.iter_mut().for_each(|v| *v = *v * scale + s.means[j]);
        }
        Some(out)
    }
}

/// Centers every column and divides by its sample standard deviation.
///
/// Zero-variance columns become all-zero and are listed in
/// [`FeatureMatrix::constant_columns`].
pub fn standardize(matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    if matrix.is_standardized() {
        return Err(DataError::AlreadyStandardized);
    }
    let n = matrix.nrows();
    if n < 2 {
        return Err(DataError::TooFewRows { needed: 2, got: n });
    }
    let p = matrix.ncols();
    let mut values = matrix.values.clone();
    let mut means = Vec::with_capacity(p);
    let mut stds = Vec::with_capacity(p);
    let mut constant_columns = Vec::new();
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let std = (ss / (n - 1) as f64).sqrt();
        let first = col[0];
        let constant = col.iter().all(|&v| v == first) || std <= 1e-12 * (1.0 + mean.abs());
        if constant {
            constant_columns.push(j);
            col.fill(0.0);
        } else {
            col.iter_mut().for_each(|v| *v = (*v - mean) / std);
        }
        means.push(mean);
        stds.push(std);
    }
    if !constant_columns.is_empty() {
        let names: Vec<&str> = constant_columns
            .iter()
            .map(|&j| matrix.column_names[j].as_str())
            .collect();
        log::warn!("constant column(s) zeroed during standardization: {names:?}");
    }
    Ok(FeatureMatrix {
        values,
        column_names: matrix.column_names.clone(),
        row_keys: matrix.row_keys.clone(),
        scaling: Some(ColumnScaling {
            means,
            stds,
            constant_columns,
        }),
    })
}

struct DaySummary {
    switches: [f64; 4],
    on_minutes: [f64; 4],
    minutes: f64,
    portal_delta: f64,
}

impl DaySummary {
    fn of(day: &[OccupantRecord]) -> Self {
        let mut switches = [0.0; 4];
        let mut on_minutes = [0.0; 4];
        for (k, r) in ResourceKind::ALL.into_iter().enumerate() {
            on_minutes[k] = day.iter().filter(|rec| rec.status[r]).count() as f64;
            switches[k] = day
                .windows(2)
                .filter(|w| w[0].status[r] != w[1].status[r])
                .count() as f64;
        }
        let first = day.first().map_or(0, |r| r.portal_visits);
        let last = day.last().map_or(0, |r| r.portal_visits);
        DaySummary {
            switches,
            on_minutes,
            minutes: day.len() as f64,
            portal_delta: f64::from(last.saturating_sub(first)),
        }
    }

    fn pooled(&self, feature: FeatureName) -> f64 {
        let k = |r: ResourceKind| ResourceKind::ALL.iter().position(|x| *x == r).unwrap();
        match feature {
            FeatureName::Switches(r) => self.switches[k(r)],
            FeatureName::UsagePct(r) => self.on_minutes[k(r)] / self.minutes,
            FeatureName::PortalVisitsDaily => self.portal_delta,
            _ => unreachable!("not a pooled feature"),
        }
    }
}

fn raw_value(rec: &OccupantRecord, feature: FeatureName) -> Result<f64> {
    if feature.is_pooled() {
        return Err(DataError::InvalidConfig(format!(
            "{feature} is a daily summary and has no per-record value"
        )));
    }
    let bit = |b: bool| if b { 1.0 } else { 0.0 };
    Ok(match feature {
        FeatureName::Status(r) => bit(rec.status[r]),
        FeatureName::Usage(r) => rec.usage_today[r],
        FeatureName::Baseline(r) => rec.baseline[r],
        FeatureName::PointsTotal => rec.points_total,
        FeatureName::Rank => f64::from(rec.rank.ok_or_else(|| DataError::MissingRank {
            player: rec.player_id.clone(),
            timestamp: rec.timestamp.to_string(),
        })?),
        FeatureName::PortalVisits => f64::from(rec.portal_visits),
        FeatureName::Humidity => rec.humidity,
        FeatureName::Temperature => rec.temperature,
        FeatureName::SolarRadiation => rec.solar_radiation,
        FeatureName::Flag(f) => bit(rec.flags.get(f)),
        FeatureName::Switches(_) | FeatureName::UsagePct(_) | FeatureName::PortalVisitsDaily => {
            unreachable!("rejected above")
        }
    })
}

/// Builds the design matrix described by `spec` from a table.
pub fn pool_features(table: &DatasetTable, spec: &FeatureSpec) -> Result<FeatureMatrix> {
    if table.is_empty() {
        return Err(DataError::EmptyTable);
    }
    let p = spec.features.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut keys = Vec::new();

    for day in table.player_day_slices() {
        let summary = DaySummary::of(day);
        let head = &day[0];
        match spec.granularity {
            Granularity::Daily => {
                keys.push(RowKey {
                    player_id: head.player_id.clone(),
                    date: head.date(),
                    timestamp: None,
                });
                for (col, &feature) in columns.iter_mut().zip(&spec.features) {
                    let v = if feature.is_pooled() {
                        summary.pooled(feature)
                    } else {
                        let mut sum = 0.0;
                        for rec in day {
                            sum += raw_value(rec, feature)?;
                        }
                        sum / day.len() as f64
                    };
                    col.push(v);
                }
            }
            Granularity::PerMinute => {
                for rec in day {
                    keys.push(RowKey {
                        player_id: rec.player_id.clone(),
                        date: rec.date(),
                        timestamp: Some(rec.timestamp),
                    });
                    for (col, &feature) in columns.iter_mut().zip(&spec.features) {
                        col.push(if feature.is_pooled() {
                            summary.pooled(feature)
                        } else {
                            raw_value(rec, feature)?
                        });
                    }
                }
            }
        }
    }
    FeatureMatrix::from_columns(spec.names(), &columns)?.with_row_keys(keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::record::tests::record;
    use crate::data::record::PerResource;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn day_of(
        player: &str,
        date: &str,
        minutes: usize,
        fan_on: impl Fn(usize) -> bool,
    ) -> Vec<OccupantRecord> {
        let start =
            NaiveDateTime::parse_from_str(&format!("{date}T00:00"), "%Y-%m-%dT%H:%M").unwrap();
        let mut used = 0.0;
        (0..minutes)
            .map(|m| {
                let mut r = record(player, "2024-01-01T00:00");
                r.timestamp = start + chrono::Duration::minutes(m as i64);
                r.status[ResourceKind::CeilingFan] = fan_on(m);
                if fan_on(m) {
                    used += 1.0;
                }
                r.usage_today = PerResource([0.0, 0.0, used, 0.0]);
                r
            })
            .collect()
    }

    #[test]
    fn feature_names_parse_and_print() {
        for name in [
            "status_fan",
            "usage_desk_light",
            "usage_pct_ceiling_light",
            "switches_ac",
            "baseline_fan",
            "is_evening",
            "rank",
            "portal_visits_daily",
        ] {
            let f: FeatureName = name.parse().unwrap();
            assert_eq!(f.to_string(), name);
        }
        assert!(matches!(
            FeatureSpec::parse(["humidity", "foo"], Granularity::Daily),
            Err(DataError::UnknownFeatureName(n)) if n == "foo"
        ));
    }

    #[test]
    fn switch_count_is_number_of_transitions() {
        let mut recs = day_of("p", "2024-01-08", 4, |_| false);
        for (i, on) in [false, true, false, true].into_iter().enumerate() {
            recs[i].status[ResourceKind::DeskLight] = on;
        }
        let (table, _) = DatasetTable::from_records(recs);
        let spec = FeatureSpec::parse(["switches_desk_light"], Granularity::Daily).unwrap();
        let m = pool_features(&table, &spec).unwrap();
        assert_eq!(m.values()[(0, 0)], 3.0);
    }

    #[test]
    fn usage_share_over_full_day() {
        let (table, _) = DatasetTable::from_records(day_of("p", "2024-01-08", 1440, |m| m < 360));
        let spec =
            FeatureSpec::parse(["usage_pct_fan", "switches_fan"], Granularity::Daily).unwrap();
        let m = pool_features(&table, &spec).unwrap();
        assert_eq!(m.nrows(), 1);
        assert_eq!(m.values()[(0, 0)], 0.25);
        assert_eq!(m.values()[(0, 1)], 1.0);
    }

    #[test]
    fn per_minute_rows_broadcast_pooled_values() {
        let (table, _) = DatasetTable::from_records(day_of("p", "2024-01-08", 10, |m| m % 2 == 0));
        let spec =
            FeatureSpec::parse(["status_fan", "switches_fan"], Granularity::PerMinute).unwrap();
        let m = pool_features(&table, &spec).unwrap();
        assert_eq!(m.nrows(), 10);
        assert_eq!(
            m.column(0),
            &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        );
        assert!(m.column(1).iter().all(|&v| v == 9.0));
        assert!(m.row_keys()[3].timestamp.is_some());
    }

    #[test]
    fn daily_rows_match_player_days() {
        let mut recs = day_of("a", "2024-01-08", 5, |_| true);
        recs.extend(day_of("a", "2024-01-09", 5, |_| true));
        recs.extend(day_of("b", "2024-01-08", 5, |_| false));
        let (table, _) = DatasetTable::from_records(recs);
        let m = pool_features(&table, &FeatureSpec::behavior()).unwrap();
        assert_eq!(m.nrows(), 3);
        assert_eq!(m.row_keys()[2].player_id, "b");
    }

    #[test]
    fn empty_table_and_missing_rank() {
        let (empty, _) = DatasetTable::from_records(vec![]);
        assert!(matches!(
            pool_features(&empty, &FeatureSpec::behavior()),
            Err(DataError::EmptyTable)
        ));
        let mut recs = day_of("a", "2024-01-08", 3, |_| true);
        recs[1].rank = None;
        let (table, _) = DatasetTable::from_records(recs);
        let spec = FeatureSpec::parse(["rank"], Granularity::Daily).unwrap();
        assert!(matches!(
            pool_features(&table, &spec),
            Err(DataError::MissingRank { .. })
        ));
    }

    #[test]
    fn standardize_examples() {
        let m = FeatureMatrix::from_columns(
            vec!["x".into(), "c".into()],
            &[vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]],
        )
        .unwrap();
        let s = standardize(&m).unwrap();
        assert_eq!(s.column(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(s.column(1), &[0.0, 0.0, 0.0]);
        assert_eq!(s.constant_columns(), &[1]);
        assert!(matches!(
            standardize(&s),
            Err(DataError::AlreadyStandardized)
        ));

        let one = FeatureMatrix::from_columns(vec!["x".into()], &[vec![1.0]]).unwrap();
        assert!(matches!(
            standardize(&one),
            Err(DataError::TooFewRows { .. })
        ));
    }

    fn matrix_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (2usize..30, 1usize..6)
            .prop_flat_map(|(n, p)| (Just(n), Just(p), prop::collection::vec(-1e3f64..1e3, n * p)))
    }

    proptest! {
        #[test]
        fn standardized_columns_have_unit_moments((n, p, data) in matrix_strategy()) {
            let names = (0..p).map(|j| format!("c{j}")).collect();
            let m = FeatureMatrix::new(DMatrix::from_vec(n, p, data), names).unwrap();
            let s = standardize(&m).unwrap();
            for j in 0..p {
                let col = s.column(j);
                let mean = col.iter().sum::<f64>() / n as f64;
                prop_assert!(mean.abs() < 1e-9);
                if !s.constant_columns().contains(&j) {
                    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
                }
            }
            let back = s.destandardize().unwrap();
            for j in 0..p {
                if s.constant_columns().contains(&j) {
                    continue;
                }
                for i in 0..n {
                    assert_abs_diff_eq!(back[(i, j)], m.values()[(i, j)], epsilon = 1e-9);
                }
            }
        }
    }
}
