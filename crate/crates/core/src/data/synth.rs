use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::points::PointsConfig;
use super::record::{
    CalendarFlag, CalendarFlags, DatasetTable, OccupantRecord, PerResource, ResourceKind,
};
use super::{DataError, Result};
use crate::segmentation::ClassLabel;

const MINUTES_PER_DAY: usize = 1440;

/// Settings for [`generate_synthetic`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Player counts for the low, medium and high efficiency classes.
    pub players_per_class: [usize; 3],
    pub days: usize,
    pub start_date: NaiveDate,
    /// Standard deviation of each player's latent AR(1) behavior noise.
    pub noise: f64,
    /// Standard deviation of the humidity AR(1) and day-offset terms.
    pub weather_noise: f64,
    /// Nominal daily baseline minutes per resource.
    pub baseline: PerResource<f64>,
    /// Relative spread of per-player baselines around the nominal value.
    pub baseline_jitter: f64,
    pub points: PointsConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            players_per_class: [2, 2, 2],
            days: 7,
            start_date: NaiveDate::from_ymd_opt(2024, 1, 8).expect("valid date"),
            noise: 0.8,
            weather_noise: 3.0,
            baseline: PerResource([360.0, 300.0, 600.0, 240.0]),
            baseline_jitter: 0.1,
            points: PointsConfig::default(),
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.players_per_class.iter().sum::<usize>() == 0 {
            return Err(DataError::InvalidConfig("no players".into()));
        }
        if self.days == 0 {
            return Err(DataError::InvalidConfig("zero days".into()));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0)
            || !(self.weather_noise.is_finite() && self.weather_noise >= 0.0)
        {
            return Err(DataError::InvalidConfig("noise levels must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.baseline_jitter)
            || self
                .baseline
                .0
                .iter()
                .any(|b| !(b.is_finite() && *b >= 1.0))
        {
            return Err(DataError::InvalidConfig(
                "baselines must be >= 1 minute with jitter in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub table: DatasetTable,
    /// Ground-truth behavior class of every player.
    pub latent_classes: BTreeMap<String, ClassLabel>,
}

struct Weather {
    humidity: Vec<f64>,
    temperature: Vec<f64>,
    solar: Vec<f64>,
}

fn simulate_weather(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Weather {
    let total = cfg.days * MINUTES_PER_DAY;
    let phi: f64 = 0.98;
    let innovation = normal(cfg.weather_noise * (1.0 - phi * phi).sqrt());
    let offset = normal(cfg.weather_noise);
    let jitter = normal(0.2);
    let mut humidity = Vec::with_capacity(total);
    let mut temperature = Vec::with_capacity(total);
    let mut solar = Vec::with_capacity(total);
    let mut ar = 0.0;
    for _ in 0..cfg.days {
        let day_offset = offset.sample(rng);
        let cloud = rng.random_range(0.6..1.0);
        for m in 0..MINUTES_PER_DAY {
            ar = phi * ar + innovation.sample(rng);
            // most humid just before dawn
            let diurnal = 12.0 * (2.0 * PI * (m as f64 - 240.0) / MINUTES_PER_DAY as f64).cos();
            let h = (70.0 + diurnal + day_offset + ar).clamp(0.0, 100.0);
            humidity.push(h);
            temperature.push(30.0 - 0.3 * (h - 70.0) + jitter.sample(rng));
            let hour = m as f64 / 60.0;
            solar.push(if (7.0..19.0).contains(&hour) {
                900.0 * cloud * (PI * (hour - 7.0) / 12.0).sin()
            } else {
                0.0
            });
        }
    }
    Weather {
        humidity,
        temperature,
        solar,
    }
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite non-negative sd")
}

fn calendar(cfg: &SynthConfig, day: usize, minute: usize) -> CalendarFlags {
    let date = cfg.start_date + Duration::days(day as i64);
    let hour = minute / 60;
    let frac = day as f64 / cfg.days as f64;
    let mut flags = CalendarFlags::default();
    flags.set(
        CalendarFlag::Weekend,
        matches!(date.weekday(), Weekday::Sat | Weekday::Sun),
    );
    flags.set(CalendarFlag::Morning, (6..12).contains(&hour));
    flags.set(CalendarFlag::Afternoon, (12..18).contains(&hour));
    flags.set(CalendarFlag::Evening, hour >= 18);
    flags.set(CalendarFlag::Break, (0.30..0.35).contains(&frac));
    flags.set(CalendarFlag::Midterm, (0.45..0.55).contains(&frac));
    flags.set(CalendarFlag::Final, frac >= 0.9);
    flags
}

/// Two-state chain whose stationary on-probability is `p_on`; `rate` sets
/// how quickly it relaxes toward it.
fn sticky(rng: &mut ChaCha8Rng, prev: bool, p_on: f64, rate: f64) -> bool {
    let u: f64 = rng.random();
    if prev {
        u >= rate * (1.0 - p_on)
    } else {
        u < rate * p_on
    }
}

fn presence_target(weekend: bool, minute: usize) -> f64 {
    if weekend {
        return 0.8;
    }
    match minute / 60 {
        0..=7 => 0.95,
        8 => 0.6,
        9..=16 => 0.25,
        17 => 0.6,
        _ => 0.85,
    }
}

struct PlayerTrace {
    status: Vec<[bool; 4]>,
    usage: Vec<[f64; 4]>,
    points: Vec<f64>,
    portal: Vec<u32>,
    baseline: PerResource<f64>,
}

fn simulate_player(
    cfg: &SynthConfig,
    class: ClassLabel,
    weather: &Weather,
    flags: &[CalendarFlags],
    rng: &mut ChaCha8Rng,
) -> Result<PlayerTrace> {
    use ClassLabel::*;
    const CEIL: usize = 0;
    const DESK: usize = 1;
    const FAN: usize = 2;
    const AC: usize = 3;

    let total = cfg.days * MINUTES_PER_DAY;
    let mut baseline = cfg.baseline;
    for r in ResourceKind::ALL {
        let j = rng.random_range(-cfg.baseline_jitter..=cfg.baseline_jitter);
        baseline[r] = (baseline[r] * (1.0 + j)).round().max(1.0);
    }
    let phi: f64 = 0.95;
    let innovation = normal(cfg.noise * (1.0 - phi * phi).sqrt());
    let portal_rate = match class {
        Low => 0.0005,
        Medium => 0.002,
        High => 0.004,
    };

    let mut trace = PlayerTrace {
        status: Vec::with_capacity(total),
        usage: Vec::with_capacity(total),
        points: Vec::with_capacity(total),
        portal: Vec::with_capacity(total),
        baseline,
    };
    let mut s = [false; 4];
    let mut present = true;
    let mut latent = false;
    let mut e = normal(cfg.noise).sample(rng);
    let mut usage = [0.0; 4];
    let mut banked = 0.0;
    let mut visits = 0u32;

    for t in 0..total {
        let minute = t % MINUTES_PER_DAY;
        if minute == 0 {
            usage = [0.0; 4];
        }
        let lag = t.saturating_sub(1);
        let hum = weather.humidity[lag];
        let temp = weather.temperature[lag];
        let evening = flags[lag].get(CalendarFlag::Evening);
        let weekend = flags[t].get(CalendarFlag::Weekend);
        let prev = s;

        e = phi * e + innovation.sample(rng);
        present = sticky(rng, present, presence_target(weekend, minute), 0.05);
        match class {
            Low => {
                s[FAN] = (hum - 70.0) / 6.0 + 0.5 + e > 0.0;
                let p = if evening {
                    0.95
                } else if present {
                    0.25
                } else {
                    0.05
                };
                s[CEIL] = sticky(rng, prev[CEIL], p, 0.2);
                s[DESK] = sticky(rng, prev[DESK], if present { 0.45 } else { 0.1 }, 0.05);
                s[AC] = sticky(rng, prev[AC], if temp > 32.0 { 0.8 } else { 0.15 }, 0.05);
            }
            Medium => {
                s[FAN] = present && (hum - 70.0) / 6.0 - 0.3 + e > 0.0;
                let p = match (prev[FAN], evening) {
                    (true, true) => 0.9,
                    (false, true) => 0.5,
                    _ if present => 0.08,
                    _ => 0.02,
                };
                s[CEIL] = sticky(rng, prev[CEIL], p, 0.2);
                s[DESK] = sticky(rng, prev[DESK], if prev[CEIL] { 0.6 } else { 0.05 }, 0.2);
                s[AC] = sticky(rng, prev[AC], if temp > 32.0 { 0.3 } else { 0.03 }, 0.05);
            }
            High => {
                // clock- and weather-free activity drives every resource
                latent = sticky(rng, latent, 0.15, 0.15);
                s[FAN] = latent;
                s[CEIL] = sticky(rng, prev[CEIL], if prev[FAN] { 0.6 } else { 0.02 }, 0.5);
                s[DESK] = sticky(rng, prev[DESK], if s[FAN] { 0.5 } else { 0.02 }, 0.5);
                s[AC] = sticky(rng, prev[AC], 0.02, 0.05);
            }
        }
        for k in 0..4 {
            if s[k] {
                usage[k] += 1.0;
            }
        }
        if rng.random::<f64>() < portal_rate {
            visits += 1;
        }
        let today = cfg.points.daily_points(&baseline, &PerResource(usage))?;
        trace.points.push(banked + today);
        if minute == MINUTES_PER_DAY - 1 {
            banked += today;
        }
        trace.status.push(s);
        trace.usage.push(usage);
        trace.portal.push(visits);
    }
    Ok(trace)
}

/// Generates per-minute records for players drawn from three latent behavior
/// classes.
///
/// * Low efficiency: the fan follows lagged humidity, the ceiling light
///   follows the evening flag, heavy overall usage.
/// * Medium: humidity-driven fan while present, the fan and evening drive the
///   ceiling light, the ceiling light drives the desk light.
/// * High: one clock- and weather-independent activity state drives every
///   resource, light overall usage.
///
/// Points follow the daily points formula against per-player baselines
/// (completed days plus the running total for the current day); ranks are
/// recomputed every minute, 1 being the highest points.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<SyntheticDataset> {
    config.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut weather_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
    let weather = simulate_weather(config, &mut weather_rng);

    let total = config.days * MINUTES_PER_DAY;
    let flags: Vec<CalendarFlags> = (0..total)
        .map(|t| calendar(config, t / MINUTES_PER_DAY, t % MINUTES_PER_DAY))
        .collect();

    let mut classes: Vec<ClassLabel> = ClassLabel::ALL
        .iter()
        .zip(config.players_per_class)
        .flat_map(|(&c, n)| std::iter::repeat_n(c, n))
        .collect();
    classes.shuffle(&mut master);
    let width = classes.len().to_string().len().max(2);
    let ids: Vec<String> = (1..=classes.len())
        .map(|i| format!("P{i:0width$}"))
        .collect();

    let mut traces = Vec::with_capacity(classes.len());
    for &class in &classes {
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        traces.push(simulate_player(config, class, &weather, &flags, &mut rng)?);
    }

    let start = config
        .start_date
        .and_hms_opt(0, 0, 0)
        .expect("midnight is valid");
    let mut records = Vec::with_capacity(total * traces.len());
    for (p, (trace, id)) in traces.iter().zip(&ids).enumerate() {
        #[allow(clippy::needless_range_loop)]
        for t in 0..total {
            let mine = trace.points[t];
            let better = traces
                .iter()
                .enumerate()
                .filter(|&(q, other)| q != p && other.points[t] > mine)
                .count();
            records.push(OccupantRecord {
                timestamp: start + Duration::minutes(t as i64),
                player_id: id.clone(),
                status: PerResource(trace.status[t]),
                usage_today: PerResource(trace.usage[t]),
                baseline: trace.baseline,
                points_total: trace.points[t],
                rank: Some(better as u32 + 1),
                portal_visits: trace.portal[t],
                humidity: weather.humidity[t],
                temperature: weather.temperature[t],
                solar_radiation: weather.solar[t],
                flags: flags[t],
            });
        }
    }
    let (table, _) = DatasetTable::from_records(records);
    let latent_classes = ids.into_iter().zip(classes).collect();
    Ok(SyntheticDataset {
        table,
        latent_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        sxy / (sxx * syy).sqrt()
    }

    fn humidity_fan_corr(data: &SyntheticDataset, class: ClassLabel) -> Vec<f64> {
        data.table
            .player_slices()
            .filter(|recs| data.latent_classes[&recs[0].player_id] == class)
            .map(|recs| {
                let hum: Vec<f64> = recs.iter().map(|r| r.humidity).collect();
                let fan: Vec<f64> = recs
                    .iter()
                    .map(|r| f64::from(u8::from(r.status[ResourceKind::CeilingFan])))
                    .collect();
                pearson(&hum, &fan)
            })
            .collect()
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = SynthConfig::default();
        let a = generate_synthetic(&cfg, 42).unwrap();
        let b = generate_synthetic(&cfg, 42).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.latent_classes, b.latent_classes);
        let c = generate_synthetic(&cfg, 43).unwrap();
        assert_ne!(a.table, c.table);
    }

    #[test]
    fn shape_and_invariants() {
        let cfg = SynthConfig {
            players_per_class: [1, 2, 1],
            days: 2,
            ..SynthConfig::default()
        };
        let data = generate_synthetic(&cfg, 7).unwrap();
        assert_eq!(data.table.len(), 4 * 2 * 1440);
        assert_eq!(data.latent_classes.len(), 4);
        for rec in data.table.records() {
            rec.validate().unwrap();
            assert!((1..=4).contains(&rec.rank.unwrap()));
        }
    }

    #[test]
    fn rejects_empty_configs() {
        let zero_days = SynthConfig {
            days: 0,
            ..SynthConfig::default()
        };
        assert!(matches!(
            generate_synthetic(&zero_days, 1),
            Err(DataError::InvalidConfig(_))
        ));
        let nobody = SynthConfig {
            players_per_class: [0, 0, 0],
            ..SynthConfig::default()
        };
        assert!(matches!(
            generate_synthetic(&nobody, 1),
            Err(DataError::InvalidConfig(_))
        ));
    }

    #[test]
    fn humidity_drives_low_class_fan_only() {
        // 14 days = 20160 minutes per player
        let cfg = SynthConfig {
            days: 14,
            ..SynthConfig::default()
        };
        for seed in [42, 7, 2024] {
            let data = generate_synthetic(&cfg, seed).unwrap();
            for c in humidity_fan_corr(&data, ClassLabel::High) {
                assert!(c.abs() < 0.1, "high-efficiency corr {c} (seed {seed})");
            }
            for c in humidity_fan_corr(&data, ClassLabel::Low) {
                assert!(c > 0.3, "low-efficiency corr {c} (seed {seed})");
            }
        }
    }

    #[test]
    fn efficient_players_outrank_wasteful_ones() {
        let data = generate_synthetic(&SynthConfig::default(), 42).unwrap();
        let last_rank = |class: ClassLabel| -> Vec<u32> {
            data.table
                .player_slices()
                .filter(|recs| data.latent_classes[&recs[0].player_id] == class)
                .map(|recs| recs.last().unwrap().rank.unwrap())
                .collect()
        };
        let worst_high = *last_rank(ClassLabel::High).iter().max().unwrap();
        let best_low = *last_rank(ClassLabel::Low).iter().min().unwrap();
        assert!(worst_high < best_low);
    }
}
