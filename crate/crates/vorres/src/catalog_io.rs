//! Catalog CSV reading and writing.
//!
//! Catalogs are CSV files with header `t,x,y,mag`. `t` is either decimal
//! days from the declared epoch or an ISO-8601 timestamp (detected per
//! row); `mag` may be left blank or omitted entirely.

use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use rand::Rng as _;
use vorres_core::catalog::{Catalog, Event, TimeSpan};
use vorres_core::geometry::{Point, Window};
use vorres_core::seed::SeedStream;

use crate::error::{Error, Result};

const SECONDS_PER_DAY: f64 = 86_400.0;

/// Parses an ISO-8601 date or date-time. Offsets are converted to UTC;
/// timestamps without an offset are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt);
        }
    }
    let date = s.strip_suffix('Z').unwrap_or(s);
    NaiveDate::parse_from_str(date, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Decimal days from `epoch` to `at`.
pub fn days_between(epoch: NaiveDateTime, at: NaiveDateTime) -> f64 {
    let delta = at - epoch;
    let whole = delta.num_seconds();
    let sub = (delta - chrono::Duration::seconds(whole))
        .num_nanoseconds()
        .unwrap_or(0);
    (whole as f64 + sub as f64 * 1e-9) / SECONDS_PER_DAY
}

/// A time given either as decimal days or as a calendar timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeValue {
    Days(f64),
    Stamp(NaiveDateTime),
}

impl TimeValue {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(Self::Days(v)),
            Ok(_) => None,
            Err(_) => parse_timestamp(s).map(Self::Stamp),
        }
    }

    /// Converts to decimal days; timestamps need an epoch.
    pub fn to_days(self, epoch: Option<NaiveDateTime>) -> Option<f64> {
        match self {
            Self::Days(v) => Some(v),
            Self::Stamp(ts) => epoch.map(|e| days_between(e, ts)),
        }
    }
}

/// What the sidecar config declares about a catalog file.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogSpec {
    pub window: Window,
    /// Rows outside the span are dropped. When absent the span runs from
    /// the earlier of 0 and the first event to the next whole day after
    /// the last one.
    pub time_span: Option<TimeSpan>,
    /// Reference for ISO-8601 timestamps. When absent the first timestamp
    /// in the file is used.
    pub epoch: Option<NaiveDateTime>,
    /// Rows with a magnitude below this are dropped.
    pub mag_cutoff: Option<f64>,
}

impl CatalogSpec {
    pub fn new(window: Window) -> Self {
        Self {
            window,
            time_span: None,
            epoch: None,
            mag_cutoff: None,
        }
    }
}

/// A parsed catalog with a report of what was dropped or adjusted.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogLoad {
    pub catalog: Catalog,
    pub rows: usize,
    pub dropped_window: usize,
    pub dropped_time: usize,
    pub dropped_magnitude: usize,
    /// Events whose timestamps were nudged to break exact ties.
    pub ties_resolved: usize,
}

impl CatalogLoad {
    /// Human-readable notes for standard error; empty when nothing was
    /// dropped or adjusted.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut note = |count: usize, what: &str| {
            if count > 0 {
                out.push(format!("dropped {count} of {} rows {what}", self.rows));
            }
        };
        note(self.dropped_window, "outside the window");
        note(self.dropped_time, "outside the time span");
        note(self.dropped_magnitude, "below the magnitude cutoff");
        if self.ties_resolved > 0 {
            out.push(format!(
                "resolved {} tied timestamps by jittering",
                self.ties_resolved
            ));
        }
        out
    }
}

struct Row {
    line: u64,
    t: TimeValue,
    x: f64,
    y: f64,
    mag: Option<f64>,
}

fn parse_rows(text: &str, path: &Path) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let has_mag = match names.as_slice() {
        ["t", "x", "y", "mag"] => true,
        ["t", "x", "y"] => false,
        [] => return Ok(Vec::new()),
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header `t,x,y,mag`, found `{}`", names.join(",")),
            ))
        }
    };
    let width = if has_mag { 4 } else { 3 };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(Error::parse(
                path,
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let t = TimeValue::parse(&record[0])
            .ok_or_else(|| Error::parse(path, line, format!("bad time `{}`", &record[0])))?;
        let num = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, line, format!("bad {name} `{}`", &record[i])))
        };
        let x = num(1, "x")?;
        let y = num(2, "y")?;
        let mag = if has_mag && !record[3].is_empty() {
            Some(num(3, "mag")?)
        } else {
            None
        };
        rows.push(Row { line, t, x, y, mag });
    }
    Ok(rows)
}

/// Parses catalog CSV text. `path` is only used in error messages.
pub fn parse_catalog(text: &str, path: &Path, spec: &CatalogSpec) -> Result<CatalogLoad> {
    let rows = parse_rows(text, path)?;
    let epoch = spec.epoch.or_else(|| {
        rows.iter().find_map(|r| match r.t {
            TimeValue::Stamp(ts) => Some(ts),
            TimeValue::Days(_) => None,
        })
    });
    let mut events = Vec::with_capacity(rows.len());
    for r in &rows {
        let t = r.t.to_days(epoch).ok_or_else(|| {
            Error::parse(path, r.line, "timestamp given but no epoch is declared")
        })?;
        events.push(Event {
            t,
            x: r.x,
            y: r.y,
            mag: r.mag,
        });
    }

    let span = match spec.time_span {
        Some(span) => span,
        None => {
            let lo = events.iter().map(|e| e.t).fold(0.0, f64::min);
            let hi = events.iter().map(|e| e.t).fold(f64::NEG_INFINITY, f64::max);
            let end = if hi.is_finite() { hi.floor() + 1.0 } else { 1.0 };
            TimeSpan::new(lo, end.max(lo + 1.0))?
        }
    };
    let total = events.len();
    let mut load = CatalogLoad {
        catalog: Catalog::new(spec.window, span),
        rows: total,
        dropped_window: 0,
        dropped_time: 0,
        dropped_magnitude: 0,
        ties_resolved: 0,
    };
    load.catalog.mag_cutoff = spec.mag_cutoff;
    for e in events {
        if !spec.window.contains_strict(e.point()) {
            load.dropped_window += 1;
        } else if !span.contains(e.t) {
            load.dropped_time += 1;
        } else if matches!((e.mag, spec.mag_cutoff), (Some(m), Some(m0)) if m < m0) {
            load.dropped_magnitude += 1;
        } else {
            load.catalog.events.push(e);
        }
    }
    load.ties_resolved = load.catalog.sort_and_resolve_ties();
    Ok(load)
}

/// Reads a catalog file.
pub fn read_catalog(path: &Path, spec: &CatalogSpec) -> Result<CatalogLoad> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_catalog(&text, path, spec)
}

/// Formats a catalog as CSV with times in decimal days. Values are written
/// in shortest round-trip form, so reading the text back gives identical
/// events.
pub fn format_catalog(catalog: &Catalog) -> String {
    let mut out = String::from("t,x,y,mag\n");
    for e in &catalog.events {
        match e.mag {
            Some(m) => out.push_str(&format!("{},{},{},{}\n", e.t, e.x, e.y, m)),
            None => out.push_str(&format!("{},{},{},\n", e.t, e.x, e.y)),
        }
    }
    out
}

pub fn write_catalog(catalog: &Catalog, path: &Path) -> Result<()> {
    fs::write(path, format_catalog(catalog)).map_err(|e| Error::io(path, e))
}

/// Moves events that share a location with an earlier event by a uniform
/// offset of at most `1e-9` window widths (heights for y), keeping them
/// inside the window. Returns the number of events moved.
pub fn jitter_duplicates(catalog: &mut Catalog, seed: &SeedStream) -> usize {
    let w = catalog.window;
    let (dx, dy) = (1e-9 * w.width(), 1e-9 * w.height());
    let mut rng = seed.named("jitter", 0).rng();
    let mut moved = 0;
    loop {
        let mut order: Vec<usize> = (0..catalog.len()).collect();
        let key = |i: usize| (catalog.events[i].x, catalog.events[i].y);
        order.sort_by(|&a, &b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(&b))
        });
        let dupes: Vec<usize> = order
            .windows(2)
            .filter(|p| key(p[0]) == key(p[1]))
            .map(|p| p[1])
            .collect();
        if dupes.is_empty() {
            return moved;
        }
        for i in dupes {
            let e = &mut catalog.events[i];
            for _ in 0..64 {
                let p = Point::new(
                    e.x + dx * (2.0 * rng.random::<f64>() - 1.0),
                    e.y + dy * (2.0 * rng.random::<f64>() - 1.0),
                );
                if w.contains_strict(p) {
                    e.x = p.x;
                    e.y = p.y;
                    break;
                }
            }
            moved += 1;
        }
    }
}
