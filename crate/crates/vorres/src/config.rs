//! Flat `key = value` configuration files and the run configuration built
//! from them.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Relative paths are resolved against the working directory.
//!
//! ```text
//! window = -117, -116, 34, 35
//! time_span = 1999-10-16, 2000-12-23
//! mag_cutoff = 3
//! model = fitted.params
//! partition = voronoi, pixel(36)
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDateTime;
use vorres_core::catalog::TimeSpan;
use vorres_core::geometry::Window;
use vorres_core::inference::Partition;
use vorres_core::intensity::IntensityModel;
use vorres_core::simulate::MagnitudeLaw;

use crate::catalog_io::{CatalogSpec, TimeValue};
use crate::error::{Error, Result};
use crate::formats::{model_from_map, read_model, read_text};

/// Name of the resolved-config copy written to every output directory.
pub const RESOLVED_NAME: &str = "config.resolved";

/// Keys naming files that must exist when the config is loaded.
const PATH_KEYS: [&str; 4] = ["catalog", "model", "model.grid", "polygons"];

pub fn parse_key_values(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(path, line, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::parse(path, line, "empty key"));
        }
        if map
            .insert(key.to_owned(), value.trim().to_owned())
            .is_some()
        {
            return Err(Error::parse(path, line, format!("duplicate key `{key}`")));
        }
    }
    Ok(map)
}

/// Formats a map as `key = value` lines in key order.
pub fn format_key_values(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Settings for one run: a config file merged with command-line overrides
/// and the defaults of the subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        Ok(Self {
            values: parse_key_values(text, path)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path).map_err(|e| match e {
            Error::Io { path, source } => {
                Error::Usage(format!("cannot read config {}: {source}", path.display()))
            }
            other => other,
        })?;
        Self::from_text(&text, path)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_owned(), value.to_string());
    }

    /// Sets `key` unless it already has a value.
    pub fn set_default(&mut self, key: &str, value: impl Display) {
        self.values
            .entry(key.to_owned())
            .or_insert_with(|| value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// The resolved config as file text.
    pub fn to_text(&self) -> String {
        format_key_values(&self.values)
    }

    /// Fails if a key that names an input file points at nothing.
    pub fn check_paths(&self) -> Result<()> {
        for key in PATH_KEYS {
            if let Some(p) = self.get(key) {
                if !Path::new(p).is_file() {
                    return Err(Error::Usage(format!("{key}: no such file `{p}`")));
                }
            }
        }
        Ok(())
    }

    /// Parses `key` if present.
    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Usage(format!("bad value for `{key}`: `{v}`")))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?
            .ok_or_else(|| Error::Usage(format!("missing setting `{key}`")))
    }

    /// Parses a comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim().parse().map_err(|_| {
                            Error::Usage(format!("bad entry `{}` in `{key}`", s.trim()))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// `window = xmin, xmax, ymin, ymax`; defaults to the unit square.
    pub fn window(&self) -> Result<Window> {
        match self.list::<f64>("window")? {
            None => Ok(Window::unit()),
            Some(v) if v.len() == 4 => Window::new(v[0], v[1], v[2], v[3])
                .map_err(|e| Error::Usage(format!("window: {e}"))),
            Some(_) => Err(Error::Usage(
                "window needs four values: xmin, xmax, ymin, ymax".to_owned(),
            )),
        }
    }

    /// Reference time for ISO-8601 timestamps: `epoch`, or else the start of
    /// `time_span` when that is a timestamp.
    pub fn epoch(&self) -> Result<Option<NaiveDateTime>> {
        if let Some(v) = self.get("epoch") {
            return match TimeValue::parse(v) {
                Some(TimeValue::Stamp(ts)) => Ok(Some(ts)),
                _ => Err(Error::Usage(format!("bad epoch `{v}`"))),
            };
        }
        Ok(self.span_values()?.and_then(|(start, _)| match start {
            TimeValue::Stamp(ts) => Some(ts),
            TimeValue::Days(_) => None,
        }))
    }

    fn span_values(&self) -> Result<Option<(TimeValue, TimeValue)>> {
        let Some(v) = self.get("time_span") else {
            return Ok(None);
        };
        let parts: Vec<&str> = v.split(',').collect();
        let bad = || Error::Usage(format!("bad time_span `{v}`"));
        if parts.len() != 2 {
            return Err(bad());
        }
        let a = TimeValue::parse(parts[0]).ok_or_else(bad)?;
        let b = TimeValue::parse(parts[1]).ok_or_else(bad)?;
        Ok(Some((a, b)))
    }

    /// `time_span = t0, t1` in decimal days or ISO-8601 timestamps.
    pub fn time_span(&self) -> Result<Option<TimeSpan>> {
        let Some((a, b)) = self.span_values()? else {
            return Ok(None);
        };
        let epoch = self.epoch()?;
        let need = || Error::Usage("time_span uses timestamps but no epoch is set".to_owned());
        let start = a.to_days(epoch).ok_or_else(need)?;
        let end = b.to_days(epoch).ok_or_else(need)?;
        TimeSpan::new(start, end)
            .map(Some)
            .map_err(|e| Error::Usage(format!("time_span: {e}")))
    }

    pub fn catalog_spec(&self) -> Result<CatalogSpec> {
        Ok(CatalogSpec {
            window: self.window()?,
            time_span: self.time_span()?,
            epoch: self.epoch()?,
            mag_cutoff: self.parse("mag_cutoff")?,
        })
    }

    /// `partition = voronoi, pixel(36), ...`
    pub fn partitions(&self) -> Result<Vec<Partition>> {
        let list: Vec<Partition> = self
            .list("partition")?
            .unwrap_or_else(|| vec![Partition::Voronoi]);
        if list.is_empty() {
            return Err(Error::Usage("no partition given".to_owned()));
        }
        Ok(list)
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.parse("seed")?.unwrap_or(0))
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out").unwrap_or("vorres-out"))
    }

    /// The model: either `model = <parameter file>` or inline `model.kind`
    /// and `model.<param>` keys.
    pub fn model(&self) -> Result<IntensityModel> {
        let window = self.window()?;
        let span = self.time_span()?;
        if let Some(path) = self.get("model") {
            return read_model(Path::new(path), window, span);
        }
        let inline: BTreeMap<String, String> = self
            .values
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("model.").map(|k| (k.to_owned(), v.clone())))
            .collect();
        if inline.is_empty() {
            return Err(Error::Usage(
                "no model given: set `model` or `model.kind`".to_owned(),
            ));
        }
        model_from_map(&inline, window, span, Path::new("config"))
    }

    /// Gutenberg–Richter law above `m0` with `b_value` (default 1) and an
    /// optional `m_max`.
    pub fn mag_law(&self, m0: f64) -> Result<MagnitudeLaw> {
        let mut law = MagnitudeLaw::gutenberg_richter(m0).with_b(self.parse("b_value")?.unwrap_or(1.0));
        if let Some(m_max) = self.parse("m_max")? {
            law = law.truncated_at(m_max);
        }
        law.validate()
            .map_err(|e| Error::Usage(format!("magnitude law: {e}")))?;
        Ok(law)
    }

    /// Writes `config.resolved` into `dir`.
    pub fn write_resolved(&self, dir: &Path) -> Result<()> {
        crate::formats::write_text(&dir.join(RESOLVED_NAME), &self.to_text())
    }
}
