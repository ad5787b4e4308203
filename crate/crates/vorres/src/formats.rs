//! Text formats for results: residual, power, histogram and quantile CSV
//! files, the polygon export, model parameter files and user grids.
//!
//! Numbers are written in shortest round-trip form so that identical
//! results always produce identical bytes.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use vorres_core::catalog::TimeSpan;
use vorres_core::etas_fit::FitResult;
use vorres_core::geometry::{Point, VoronoiDiagram, Window};
use vorres_core::inference::{KsResult, Partition, PitHistogram, PowerResult};
use vorres_core::intensity::{GridIntensity, IntensityModel, ModelKind};
use vorres_core::residuals::{QuantilePlot, RegionKind, ResidualRecord};

use crate::config::{format_key_values, parse_key_values};
use crate::error::{Error, Result};

pub const RESIDUAL_HEADER: &str = "region_id,kind,count,integral,raw,pearson,pit,excluded";
pub const POWER_HEADER: &str = "design,partition,proposed_value,power,replicates,alpha,seed";
pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,count,band_lo,band_hi";
pub const QUANTILE_HEADER: &str = "theoretical,observed,lower,upper";
pub const KS_HEADER: &str = "partition,statistic,n,critical_value,alpha,reject,n_sim";
pub const GRID_HEADER: &str = "x_center,y_center,rate";

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &str, path: &Path) -> Result<()> {
    let found = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != expected {
        return Err(Error::parse(
            path,
            1,
            format!("expected header `{expected}`, found `{found}`"),
        ));
    }
    Ok(())
}

/// Iterates over CSV records, yielding `(line, fields)`.
fn records(text: &str, header: &str, path: &Path) -> Result<Vec<(u64, Vec<String>)>> {
    let mut reader = csv_reader(text);
    check_header(&mut reader, header, path)?;
    let width = header.split(',').count();
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            Error::parse(path, e.position().map_or(0, |p| p.line()), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(Error::parse(path, line, format!("expected {width} fields")));
        }
        out.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(value: &str, name: &str, path: &Path, line: u64) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(path, line, format!("bad {name} `{value}`")))
}

/// Formats residual records as CSV. A missing Pearson residual is left blank.
pub fn format_residuals(records: &[ResidualRecord]) -> String {
    let mut out = format!("{RESIDUAL_HEADER}\n");
    for r in records {
        let pearson = r.pearson.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.region_id,
            r.kind.as_str(),
            r.count,
            r.integral,
            r.raw,
            pearson,
            r.pit,
            r.excluded
        ));
    }
    out
}

pub fn parse_residuals(text: &str, path: &Path) -> Result<Vec<ResidualRecord>> {
    records(text, RESIDUAL_HEADER, path)?
        .into_iter()
        .map(|(line, f)| {
            let kind = match f[1].as_str() {
                "voronoi" => RegionKind::Voronoi,
                "pixel" => RegionKind::Pixel,
                other => return Err(Error::parse(path, line, format!("bad kind `{other}`"))),
            };
            Ok(ResidualRecord {
                region_id: field(&f[0], "region_id", path, line)?,
                kind,
                count: field(&f[2], "count", path, line)?,
                integral: field(&f[3], "integral", path, line)?,
                raw: field(&f[4], "raw", path, line)?,
                pearson: if f[5].is_empty() {
                    None
                } else {
                    Some(field(&f[5], "pearson", path, line)?)
                },
                pit: field(&f[6], "pit", path, line)?,
                excluded: field(&f[7], "excluded", path, line)?,
                converged: true,
            })
        })
        .collect()
}

/// One line per cell: `cell_index, generator_x, generator_y, area,
/// touches_boundary, v1x, v1y, v2x, v2y, ...`.
pub fn format_polygons(diagram: &VoronoiDiagram) -> String {
    let mut out = String::new();
    for (i, cell) in diagram.cells.iter().enumerate() {
        out.push_str(&format!(
            "{}, {}, {}, {}, {}",
            i, cell.generator.x, cell.generator.y, cell.area, cell.touches_boundary
        ));
        for v in &cell.vertices {
            out.push_str(&format!(", {}, {}", v.x, v.y));
        }
        out.push('\n');
    }
    out
}

/// A cell read back from a polygon export.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonRecord {
    pub index: usize,
    pub generator: Point,
    pub area: f64,
    pub touches_boundary: bool,
    pub vertices: Vec<Point>,
}

pub fn parse_polygons(text: &str, path: &Path) -> Result<Vec<PolygonRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split(',').map(str::trim).collect();
        if f.len() < 5 || (f.len() - 5) % 2 != 0 {
            return Err(Error::parse(path, line, "malformed polygon line"));
        }
        let num = |s: &str| field::<f64>(s, "coordinate", path, line);
        let vertices = f[5..]
            .chunks(2)
            .map(|c| Ok(Point::new(num(c[0])?, num(c[1])?)))
            .collect::<Result<Vec<_>>>()?;
        out.push(PolygonRecord {
            index: field(f[0], "cell_index", path, line)?,
            generator: Point::new(num(f[1])?, num(f[2])?),
            area: num(f[3])?,
            touches_boundary: field(f[4], "touches_boundary", path, line)?,
            vertices,
        });
    }
    Ok(out)
}

pub fn format_power(result: &PowerResult) -> String {
    let c = &result.config;
    let mut out = format!("{POWER_HEADER}\n");
    for row in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.design.name(),
            row.partition,
            row.proposed_value,
            row.power,
            c.replicates,
            c.alpha,
            c.seed
        ));
    }
    out
}

/// A row of a power CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLine {
    pub design: String,
    pub partition: Partition,
    pub proposed_value: f64,
    pub power: f64,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

pub fn parse_power(text: &str, path: &Path) -> Result<Vec<PowerLine>> {
    records(text, POWER_HEADER, path)?
        .into_iter()
        .map(|(line, f)| {
            Ok(PowerLine {
                design: f[0].clone(),
                partition: field(&f[1], "partition", path, line)?,
                proposed_value: field(&f[2], "proposed_value", path, line)?,
                power: field(&f[3], "power", path, line)?,
                replicates: field(&f[4], "replicates", path, line)?,
                alpha: field(&f[5], "alpha", path, line)?,
                seed: field(&f[6], "seed", path, line)?,
            })
        })
        .collect()
}

pub fn format_histogram(h: &PitHistogram) -> String {
    let mut out = format!("{HISTOGRAM_HEADER}\n");
    for b in 0..h.bins() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            h.edges[b], h.edges[b + 1], h.counts[b], h.band_lo[b], h.band_hi[b]
        ));
    }
    out
}

pub fn parse_histogram(text: &str, path: &Path) -> Result<PitHistogram> {
    let rows = records(text, HISTOGRAM_HEADER, path)?;
    let mut h = PitHistogram {
        edges: Vec::new(),
        counts: Vec::new(),
        band_lo: Vec::new(),
        band_hi: Vec::new(),
    };
    for (i, (line, f)) in rows.iter().enumerate() {
        if i == 0 {
            h.edges.push(field(&f[0], "bin_lo", path, *line)?);
        }
        h.edges.push(field(&f[1], "bin_hi", path, *line)?);
        h.counts.push(field(&f[2], "count", path, *line)?);
        h.band_lo.push(field(&f[3], "band_lo", path, *line)?);
        h.band_hi.push(field(&f[4], "band_hi", path, *line)?);
    }
    Ok(h)
}

pub fn format_quantiles(q: &QuantilePlot) -> String {
    let mut out = format!("{QUANTILE_HEADER}\n");
    for i in 0..q.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            q.theoretical[i], q.observed[i], q.lower[i], q.upper[i]
        ));
    }
    out
}

pub fn parse_quantiles(text: &str, path: &Path) -> Result<QuantilePlot> {
    let mut q = QuantilePlot {
        theoretical: Vec::new(),
        observed: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
    };
    for (line, f) in records(text, QUANTILE_HEADER, path)? {
        q.theoretical.push(field(&f[0], "theoretical", path, line)?);
        q.observed.push(field(&f[1], "observed", path, line)?);
        q.lower.push(field(&f[2], "lower", path, line)?);
        q.upper.push(field(&f[3], "upper", path, line)?);
    }
    Ok(q)
}

pub fn format_ks(results: &[(Partition, KsResult)]) -> String {
    let mut out = format!("{KS_HEADER}\n");
    for (p, r) in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p, r.statistic, r.n, r.critical_value, r.alpha, r.reject, r.n_sim
        ));
    }
    out
}

/// Formats a model as a flat `key = value` parameter file. A user grid is
/// referenced by the path it was loaded from.
pub fn format_model(kind: &ModelKind, grid_path: Option<&Path>) -> String {
    let mut map = BTreeMap::new();
    map.insert("kind".to_owned(), kind.name().to_owned());
    for (name, value) in kind.params() {
        map.insert(name.to_owned(), value.to_string());
    }
    if let (ModelKind::UserGrid(_), Some(p)) = (kind, grid_path) {
        map.insert("grid".to_owned(), p.display().to_string());
    }
    format_key_values(&map)
}

/// Builds a model from a parameter map with a `kind` entry. Keys the kind
/// does not use are ignored, so fit results can be read back directly.
pub fn model_from_map(
    map: &BTreeMap<String, String>,
    window: Window,
    time_span: Option<TimeSpan>,
    source: &Path,
) -> Result<IntensityModel> {
    let kind_name = map
        .get("kind")
        .ok_or_else(|| Error::Usage(format!("{}: model has no `kind`", source.display())))?;
    let kind = if kind_name == "user_grid" {
        let grid = map.get("grid").ok_or_else(|| {
            Error::Usage(format!("{}: user_grid model needs `grid`", source.display()))
        })?;
        ModelKind::UserGrid(read_grid(Path::new(grid))?)
    } else {
        let bad = RefCell::new(None);
        let get = |key: &str| {
            let v = map.get(key)?;
            match v.parse::<f64>() {
                Ok(x) => Some(x),
                Err(_) => {
                    bad.borrow_mut().get_or_insert_with(|| key.to_owned());
                    None
                }
            }
        };
        let kind = ModelKind::from_params(kind_name, get);
        if let Some(key) = bad.into_inner() {
            return Err(Error::Usage(format!(
                "{}: `{key}` is not a number",
                source.display()
            )));
        }
        kind.map_err(|e| match e {
            vorres_core::Error::UnsupportedModel { .. } => Error::Usage(format!(
                "{}: unknown model kind `{kind_name}`",
                source.display()
            )),
            vorres_core::Error::InvalidParameter { name, value } if value.is_nan() => {
                Error::Usage(format!("{}: missing parameter `{name}`", source.display()))
            }
            other => other.into(),
        })?
    };
    let model = match kind {
        ModelKind::Etas(params) => {
            let span = time_span.ok_or_else(|| {
                Error::Usage("an ETAS model needs a declared time_span".to_owned())
            })?;
            IntensityModel::etas(params, window, span)
        }
        other => IntensityModel::spatial(other, window),
    };
    model.validate()?;
    Ok(model)
}

/// Reads a model parameter file.
pub fn read_model(path: &Path, window: Window, time_span: Option<TimeSpan>) -> Result<IntensityModel> {
    let map = parse_key_values(&read_text(path)?, path)?;
    model_from_map(&map, window, time_span, path)
}

/// Writes a fit result as a model parameter file with fit diagnostics.
pub fn format_fit(fit: &FitResult) -> String {
    let mut text = format_model(&ModelKind::Etas(fit.params), None);
    let mut extra = BTreeMap::new();
    extra.insert("converged".to_owned(), fit.converged.to_string());
    extra.insert("evaluations".to_owned(), fit.evaluations.to_string());
    extra.insert("iterations".to_owned(), fit.iterations.to_string());
    extra.insert("loglik".to_owned(), fit.loglik.to_string());
    text.push_str(&format_key_values(&extra));
    text
}

/// The optimizer trace, one row per iteration.
pub fn format_fit_trace(fit: &FitResult) -> String {
    let mut out = String::from("iteration,mu,K,c,p,a,d,q,loglik\n");
    for (i, (p, ll)) in fit.trace.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            i, p.mu, p.k, p.c, p.p, p.a, p.d, p.q, ll
        ));
    }
    out
}

/// Reads a tabulated intensity with header `x_center,y_center,rate`.
pub fn read_grid(path: &Path) -> Result<GridIntensity> {
    parse_grid(&read_text(path)?, path)
}

pub fn parse_grid(text: &str, path: &Path) -> Result<GridIntensity> {
    let triples = records(text, GRID_HEADER, path)?
        .into_iter()
        .map(|(line, f)| {
            Ok((
                field(&f[0], "x_center", path, line)?,
                field(&f[1], "y_center", path, line)?,
                field(&f[2], "rate", path, line)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64, f64)>>>()?;
    Ok(GridIntensity::from_triples(&triples)?)
}
