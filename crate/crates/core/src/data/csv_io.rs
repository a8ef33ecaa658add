use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use chrono::NaiveDateTime;
use log::warn;
use serde::{Deserialize, Serialize};

use super::record::{
    CalendarFlag, CalendarFlags, DatasetTable, OccupantRecord, PerResource, ResourceKind,
};
use super::{DataError, Result};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

/// A field of [`OccupantRecord`] as it appears in CSV form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordField {
    Timestamp,
    PlayerId,
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
}

impl RecordField {
    /// All fields in canonical column order.
    pub fn all() -> Vec<RecordField> {
        let mut out = vec![RecordField::Timestamp, RecordField::PlayerId];
        out.extend(ResourceKind::ALL.map(RecordField::Status));
        out.extend(ResourceKind::ALL.map(RecordField::Usage));
        out.extend(ResourceKind::ALL.map(RecordField::Baseline));
        out.extend([
            RecordField::PointsTotal,
            RecordField::Rank,
            RecordField::PortalVisits,
            RecordField::Humidity,
            RecordField::Temperature,
            RecordField::SolarRadiation,
        ]);
        out.extend(CalendarFlag::ALL.map(RecordField::Flag));
        out
    }

    /// Canonical header name.
    pub fn header(self) -> String {
        match self {
            RecordField::Timestamp => "timestamp".into(),
            RecordField::PlayerId => "player_id".into(),
            RecordField::Status(r) => format!("status_{}", r.key()),
            RecordField::Usage(r) => format!("usage_{}", r.key()),
            RecordField::Baseline(r) => format!("baseline_{}", r.key()),
            RecordField::PointsTotal => "points_total".into(),
            RecordField::Rank => "rank".into(),
            RecordField::PortalVisits => "portal_visits".into(),
            RecordField::Humidity => "humidity".into(),
            RecordField::Temperature => "temperature".into(),
            RecordField::SolarRadiation => "solar_radiation".into(),
            RecordField::Flag(f) => f.key().into(),
        }
    }
}

impl fmt::Display for RecordField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.header())
    }
}

/// Maps record fields to CSV header names.
///
/// Every field is required unless marked optional. Missing optional columns
/// take defaults: `false`/`0` for statuses, usage, counters and weather,
/// `1.0` for baselines and no rank. Timestamp and player id are always
/// required.
#[derive(Clone, Debug)]
pub struct CsvSchema {
    headers: BTreeMap<RecordField, String>,
    optional: BTreeSet<RecordField>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self::standard()
    }
}

impl CsvSchema {
    pub fn standard() -> Self {
        CsvSchema {
            headers: RecordField::all()
                .into_iter()
                .map(|f| (f, f.header()))
                .collect(),
            optional: BTreeSet::new(),
        }
    }

    pub fn rename(mut self, field: RecordField, header: impl Into<String>) -> Self {
        self.headers.insert(field, header.into());
        self
    }

    pub fn optional(mut self, field: RecordField) -> Self {
        if !matches!(field, RecordField::Timestamp | RecordField::PlayerId) {
            self.optional.insert(field);
        }
        self
    }

    pub fn header_for(&self, field: RecordField) -> &str {
        &self.headers[&field]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub malformed_rows: usize,
    pub duplicate_rows: usize,
}

impl IngestReport {
    pub fn dropped(&self) -> usize {
        self.malformed_rows + self.duplicate_rows
    }
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub table: DatasetTable,
    pub report: IngestReport,
}

/// Parses a UTF-8 CSV with a header row into a sorted, deduplicated table.
///
/// Malformed rows are skipped and counted; the call fails only when more
/// than half of the data rows are malformed. Extra columns are ignored.
pub fn ingest_csv<R: Read>(source: R, schema: &CsvSchema) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();

    let mut positions: BTreeMap<RecordField, usize> = BTreeMap::new();
    let mut missing = Vec::new();
    for field in RecordField::all() {
        let name = schema.header_for(field);
        match header.iter().position(|h| h == name) {
            Some(i) => {
                positions.insert(field, i);
            }
            None if schema.optional.contains(&field) => {}
            None => missing.push(name.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(DataError::MissingColumn(missing));
    }

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let mut first_problem = None;
    for (line, row) in reader.records().enumerate() {
        report.rows_read += 1;
        let parsed = row
            .map_err(|e| e.to_string())
            .and_then(|row| parse_row(&row, &positions))
            .and_then(|rec| rec.validate().map(|_| rec));
        match parsed {
            Ok(rec) => records.push(rec),
            Err(msg) => {
                report.malformed_rows += 1;
                first_problem.get_or_insert_with(|| format!("data row {}: {msg}", line + 1));
            }
        }
    }
    if report.malformed_rows * 2 > report.rows_read {
        return Err(DataError::Parse {
            malformed: report.malformed_rows,
            total: report.rows_read,
            first: first_problem.unwrap_or_default(),
        });
    }
    if let Some(problem) = first_problem {
        warn!(
            "skipped {} malformed row(s); first: {problem}",
            report.malformed_rows
        );
    }

    let (table, duplicates) = DatasetTable::from_records(records);
    report.duplicate_rows = duplicates;
    Ok(Ingested { table, report })
}

fn parse_row(
    row: &csv::StringRecord,
    positions: &BTreeMap<RecordField, usize>,
) -> std::result::Result<OccupantRecord, String> {
    let get = |field: RecordField| -> std::result::Result<Option<&str>, String> {
        match positions.get(&field) {
            None => Ok(None),
            Some(&i) => row
                .get(i)
                .map(Some)
                .ok_or_else(|| format!("row is missing column {}", field.header())),
        }
    };
    let num = |field: RecordField, default: f64| -> std::result::Result<f64, String> {
        match get(field)? {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{}: `{s}` is not a finite number", field.header())),
        }
    };
    let bit = |field: RecordField| -> std::result::Result<bool, String> {
        match get(field)? {
            None => Ok(false),
            Some("0") => Ok(false),
            Some("1") => Ok(true),
            Some(s) => Err(format!("{}: `{s}` is not 0 or 1", field.header())),
        }
    };

    let ts_raw = get(RecordField::Timestamp)?.unwrap_or_default();
    let timestamp = parse_timestamp(ts_raw)?;
    let player_id = get(RecordField::PlayerId)?.unwrap_or_default().to_string();
    if player_id.is_empty() {
        return Err("empty player_id".into());
    }

    let mut status = PerResource::splat(false);
    let mut usage_today = PerResource::splat(0.0);
    let mut baseline = PerResource::splat(1.0);
    for r in ResourceKind::ALL {
        status[r] = bit(RecordField::Status(r))?;
        usage_today[r] = num(RecordField::Usage(r), 0.0)?;
        baseline[r] = num(RecordField::Baseline(r), 1.0)?;
    }
    let rank = match get(RecordField::Rank)? {
        None | Some("") => None,
        Some(s) => Some(
            s.parse::<u32>()
                .map_err(|_| format!("rank: `{s}` is not a positive integer"))?,
        ),
    };
    let portal_visits = match get(RecordField::PortalVisits)? {
        None => 0,
        Some(s) => s
            .parse::<u32>()
            .map_err(|_| format!("portal_visits: `{s}` is not a non-negative integer"))?,
    };
    let mut flags = CalendarFlags::default();
    for f in CalendarFlag::ALL {
        flags.set(f, bit(RecordField::Flag(f))?);
    }

    Ok(OccupantRecord {
        timestamp,
        player_id,
        status,
        usage_today,
        baseline,
        points_total: num(RecordField::PointsTotal, 0.0)?,
        rank,
        portal_visits,
        humidity: num(RecordField::Humidity, 0.0)?,
        temperature: num(RecordField::Temperature, 0.0)?,
        solar_radiation: num(RecordField::SolarRadiation, 0.0)?,
        flags,
    })
}

fn parse_timestamp(s: &str) -> std::result::Result<NaiveDateTime, String> {
    const FORMATS: [&str; 4] = [
        TIMESTAMP_FORMAT,
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%d %H:%M:%S",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .ok_or_else(|| format!("timestamp: `{s}` is not ISO-8601 at minute precision"))
}

/// Writes the table with the canonical header. Re-ingesting the output with
/// [`CsvSchema::standard`] reproduces the table.
/// Shortest round-trip text for a float; very small or large magnitudes use
/// exponent notation.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_csv<W: Write>(table: &DatasetTable, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    let fields = RecordField::all();
    writer.write_record(fields.iter().map(|f| f.header()))?;
    let mut row: Vec<String> = Vec::with_capacity(fields.len());
    for rec in table.records() {
        row.clear();
        for &field in &fields {
            row.push(format_field(rec, field));
        }
        writer.write_record(&row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn format_field(rec: &OccupantRecord, field: RecordField) -> String {
    let bit = |b: bool| if b { "1" } else { "0" }.to_string();
    match field {
        RecordField::Timestamp => rec.timestamp.format(TIMESTAMP_FORMAT).to_string(),
        RecordField::PlayerId => rec.player_id.clone(),
        RecordField::Status(r) => bit(rec.status[r]),
        RecordField::Usage(r) => rec.usage_today[r].to_string(),
        RecordField::Baseline(r) => rec.baseline[r].to_string(),
        RecordField::PointsTotal => rec.points_total.to_string(),
        RecordField::Rank => rec.rank.map(|r| r.to_string()).unwrap_or_default(),
        RecordField::PortalVisits => rec.portal_visits.to_string(),
        RecordField::Humidity => rec.humidity.to_string(),
        RecordField::Temperature => rec.temperature.to_string(),
        RecordField::SolarRadiation => rec.solar_radiation.to_string(),
        RecordField::Flag(f) => bit(rec.flags.get(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        RecordField::all()
            .iter()
            .map(|f| f.header())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn row(player: &str, ts: &str, rank: u32) -> String {
        // statuses, usages, baselines, points, rank, visits, weather, flags
        format!(
            "{ts},{player},1,0,1,0,1,0,1,0,300,300,600,240,2.5,{rank},3,71.5,29.1,120,0,0,0,1,0,0,0"
        )
    }

    #[test]
    fn parses_well_formed_rows() {
        let csv = format!(
            "{}\n{}\n{}\n{}\n",
            header(),
            row("p1", "2024-01-08T00:00", 1),
            row("p1", "2024-01-08T00:01", 1),
            row("p2", "2024-01-08T00:00", 2)
        );
        let out = ingest_csv(csv.as_bytes(), &CsvSchema::standard()).unwrap();
        assert_eq!(out.table.len(), 3);
        assert_eq!(out.report.dropped(), 0);
        let rec = &out.table.records()[2];
        assert_eq!(rec.player_id, "p2");
        assert!(rec.status[ResourceKind::CeilingLight]);
        assert!(!rec.status[ResourceKind::DeskLight]);
        assert_eq!(rec.rank, Some(2));
        assert!(rec.flags.get(CalendarFlag::Evening));
    }

    #[test]
    fn duplicate_key_keeps_first_row() {
        let csv = format!(
            "{}\n{}\n{}\n",
            header(),
            row("p1", "2024-01-08T00:00", 1),
            row("p1", "2024-01-08T00:00", 7)
        );
        let out = ingest_csv(csv.as_bytes(), &CsvSchema::standard()).unwrap();
        assert_eq!(out.table.len(), 1);
        assert_eq!(out.report.duplicate_rows, 1);
        assert_eq!(out.report.dropped(), 1);
        assert_eq!(out.table.records()[0].rank, Some(1));
    }

    #[test]
    fn missing_required_column() {
        let header = header().replace(",rank,", ",not_rank,");
        let csv = format!("{header}\n{}\n", row("p1", "2024-01-08T00:00", 1));
        match ingest_csv(csv.as_bytes(), &CsvSchema::standard()) {
            Err(DataError::MissingColumn(cols)) => assert_eq!(cols, vec!["rank".to_string()]),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
        // the same file is fine once rank is optional
        let schema = CsvSchema::standard().optional(RecordField::Rank);
        let out = ingest_csv(csv.as_bytes(), &schema).unwrap();
        assert_eq!(out.table.records()[0].rank, None);
    }

    #[test]
    fn malformed_rows_are_skipped_until_majority() {
        let good = row("p1", "2024-01-08T00:00", 1);
        let bad = row("p1", "2024-01-08T00:01", 1).replacen(",1,0,1,0,", ",2,0,1,0,", 1);
        let csv = format!("{}\n{good}\n{bad}\n", header());
        let out = ingest_csv(csv.as_bytes(), &CsvSchema::standard()).unwrap();
        assert_eq!(out.report.malformed_rows, 1);
        assert_eq!(out.table.len(), 1);

        let csv = format!("{}\n{good}\n{bad}\n{bad}\n", header());
        assert!(matches!(
            ingest_csv(csv.as_bytes(), &CsvSchema::standard()),
            Err(DataError::Parse {
                malformed: 2,
                total: 3,
                ..
            })
        ));
    }

    #[test]
    fn renamed_and_extra_columns() {
        let header = format!("{},extra", header().replace("humidity", "rh"));
        let csv = format!("{header}\n{},zzz\n", row("p1", "2024-01-08T00:00", 1));
        let schema = CsvSchema::standard().rename(RecordField::Humidity, "rh");
        let out = ingest_csv(csv.as_bytes(), &schema).unwrap();
        assert_eq!(out.table.records()[0].humidity, 71.5);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]

        #[test]
        fn write_then_ingest_is_identity(seed in 0u64..10_000) {
            let config = crate::data::SynthConfig {
                players_per_class: [1, 1, 1],
                days: 1,
                ..Default::default()
            };
            let table = crate::data::generate_synthetic(&config, seed).unwrap().table;
            let mut bytes = Vec::new();
            write_csv(&table, &mut bytes).unwrap();
            let back = ingest_csv(bytes.as_slice(), &CsvSchema::standard()).unwrap();
            proptest::prop_assert_eq!(back.report.dropped(), 0);
            proptest::prop_assert!(back.table == table);
        }
    }
}
