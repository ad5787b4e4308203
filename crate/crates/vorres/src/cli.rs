//! The `vorres` command line.
//!
//! Every subcommand reads an optional config file (`--config`), applies the
//! command-line overrides and its own defaults, writes its artifacts into
//! the output directory and finishes with a `config.resolved` copy of the
//! settings it used.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use vorres_core::catalog::Catalog;
use vorres_core::etas_fit::{fit_mle_with, FitOptions};
use vorres_core::exec::{Executor, Sequential};
use vorres_core::geometry::{tessellate, PixelGrid, VoronoiDiagram};
use vorres_core::inference::{
    ks_test, pit_histogram, power_study, Partition, PowerConfig, PowerDesign, Scenario,
};
use vorres_core::intensity::{IntensityModel, ModelKind};
use vorres_core::residuals::{
    pixel_residuals, quantile_plot, voronoi_residuals_for, voronoi_residuals_with, ResidualRecord,
};
use vorres_core::seed::SeedStream;
use vorres_core::simulate::{sample_etas, sample_poisson, BufferedSample};

use crate::catalog_io::{jitter_duplicates, read_catalog, write_catalog};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::formats::{self, write_text};
use crate::parallel::RayonExecutor;
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "vorres", version, about = "Voronoi residual diagnostics for point process models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a catalog from the model.
    Simulate(CommonArgs),
    /// Tessellate a catalog and export the cells.
    Tessellate(CommonArgs),
    /// Residuals of a catalog under a model, with maps and quantile plots.
    Residuals(CommonArgs),
    /// PIT histograms and K–S tests with simulated critical values.
    Pit(CommonArgs),
    /// Power of the PIT K–S test across partitions.
    Power(CommonArgs),
    /// Fit ETAS by maximum likelihood.
    Fit(CommonArgs),
    /// Render SVG plots from CSV outputs.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Model parameter file (for example a fit result).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated partitions: voronoi, pixel(N).
    #[arg(long)]
    pub partition: Option<String>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Catalog CSV file.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Separate coincident events by a tiny seeded jitter before tessellating.
    #[arg(long)]
    pub jitter_duplicates: bool,
    /// Extra setting, as in the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV files to render (residual, histogram, quantile or power).
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Polygon export matching a Voronoi residual file.
    #[arg(long)]
    pub polygons: Option<PathBuf>,
}

/// Parses arguments and runs, returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let exec = RayonExecutor::from_env()?;
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Tessellate(a) => tessellate_cmd(&a),
        Command::Residuals(a) => residuals(&a, &exec),
        Command::Pit(a) => pit(&a, &exec),
        Command::Power(a) => power(&a, &exec),
        Command::Fit(a) => fit(&a, &exec),
        Command::Plot(a) => plot(&a),
    }
}

/// Builds the run config from a config file, flags and defaults, and
/// creates the output directory.
pub fn resolve(args: &CommonArgs, defaults: &[(&str, &str)]) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::new(),
    };
    let path = |p: &PathBuf| p.display().to_string();
    if let Some(v) = args.seed {
        cfg.set("seed", v);
    }
    if let Some(v) = &args.out {
        cfg.set("out", path(v));
    }
    if let Some(v) = &args.model {
        cfg.set("model", path(v));
    }
    if let Some(v) = &args.partition {
        cfg.set("partition", v);
    }
    if let Some(v) = args.replicates {
        cfg.set("replicates", v);
    }
    if let Some(v) = args.alpha {
        cfg.set("alpha", v);
    }
    if let Some(v) = &args.catalog {
        cfg.set("catalog", path(v));
    }
    if args.jitter_duplicates {
        cfg.set("jitter_duplicates", true);
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim());
    }
    cfg.set_default("seed", 0);
    cfg.set_default("out", "vorres-out");
    for (k, v) in defaults {
        cfg.set_default(k, v);
    }
    cfg.check_paths()?;
    let out = cfg.out_dir();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    Ok(cfg)
}

fn finish(cfg: &RunConfig, written: &[PathBuf]) -> Result<()> {
    let out = cfg.out_dir();
    cfg.write_resolved(&out)?;
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn save(out: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = out.join(name);
    write_text(&path, text)?;
    written.push(path);
    Ok(())
}

/// File-name form of a partition: `voronoi`, `pixel36`.
pub fn partition_stem(p: Partition) -> String {
    match p {
        Partition::Voronoi => "voronoi".to_owned(),
        Partition::Pixel(n) => format!("pixel{n}"),
    }
}

/// Loads the configured catalog. For ETAS models the magnitude cutoff
/// defaults to the model's reference magnitude.
fn load_catalog(cfg: &RunConfig, model: Option<&IntensityModel>) -> Result<Catalog> {
    let path = cfg
        .get("catalog")
        .ok_or_else(|| Error::Usage("no catalog given (--catalog)".to_owned()))?;
    let mut spec = cfg.catalog_spec()?;
    if let (None, Some(ModelKind::Etas(p))) = (spec.mag_cutoff, model.map(|m| &m.kind)) {
        spec.mag_cutoff = Some(p.m0);
    }
    let load = read_catalog(Path::new(path), &spec)?;
    for w in load.warnings() {
        eprintln!("warning: {path}: {w}");
    }
    let mut catalog = load.catalog;
    if cfg.parse::<bool>("jitter_duplicates")?.unwrap_or(false) {
        let moved = jitter_duplicates(&mut catalog, &SeedStream::new(cfg.seed()?));
        if moved > 0 {
            eprintln!("warning: jittered {moved} coincident events");
        }
    }
    Ok(catalog)
}

fn duplicate_hint(e: vorres_core::Error) -> Error {
    match e {
        vorres_core::Error::DuplicatePoint { .. } => {
            Error::Data(format!("{e}; rerun with --jitter-duplicates to separate them"))
        }
        other => other.into(),
    }
}

fn tessellate_catalog(catalog: &Catalog) -> Result<VoronoiDiagram> {
    tessellate(&catalog.points(), catalog.window).map_err(duplicate_hint)
}

fn scenario_for(cfg: &RunConfig, model: &IntensityModel, partitions: &[Partition]) -> Result<Scenario> {
    match &model.kind {
        ModelKind::Etas(p) => Ok(Scenario::etas(model.clone(), cfg.mag_law(p.m0)?)),
        _ => Ok(Scenario::new(model.clone(), model.window, 0.0).with_partitions(partitions)?),
    }
}

/// The observed catalog viewed as a sample whose every event is scored.
fn observed_sample(catalog: &Catalog) -> BufferedSample {
    BufferedSample {
        catalog: catalog.clone(),
        core: catalog.window,
        core_indices: (0..catalog.len()).collect(),
    }
}

/// Noise stream for the randomized PIT of observed pixel counts; partition
/// `k` uses child `k`, in `residuals` and `pit` alike.
fn observed_noise(seed: u64) -> SeedStream {
    SeedStream::new(seed).named("observed", 0)
}

fn simulate(args: &CommonArgs) -> Result<()> {
    let cfg = resolve(args, &[])?;
    let model = cfg.model()?;
    let mut rng = SeedStream::new(cfg.seed()?).named("simulate", 0).rng();
    let catalog = match &model.kind {
        ModelKind::Etas(p) => {
            let span = model.time_span.expect("ETAS models carry a time span");
            sample_etas(p, &model.window, &span, &cfg.mag_law(p.m0)?, &mut rng)?.catalog
        }
        _ => sample_poisson(&model, &model.window, &mut rng)?,
    };
    let out = cfg.out_dir();
    let path = out.join("catalog.csv");
    write_catalog(&catalog, &path)?;
    eprintln!("simulated {} events", catalog.len());
    finish(&cfg, &[path])
}

fn tessellate_cmd(args: &CommonArgs) -> Result<()> {
    let cfg = resolve(args, &[])?;
    let catalog = load_catalog(&cfg, None)?;
    let diagram = tessellate_catalog(&catalog)?;
    let mut written = Vec::new();
    save(&cfg.out_dir(), "cells.txt", &formats::format_polygons(&diagram), &mut written)?;
    finish(&cfg, &written)
}

/// Raw residuals of the scored, non-excluded cells of simulated patterns.
fn simulated_raw_residuals<E: Executor>(
    scenario: &Scenario,
    n_sim: usize,
    seed: &SeedStream,
    exec: &E,
) -> Result<Vec<Vec<f64>>> {
    exec.map_indexed(n_sim, |i| {
        let sample = scenario.simulate(&seed.named("quantile", i as u64))?;
        let diagram = tessellate(&sample.catalog.points(), sample.catalog.window)?;
        let records = voronoi_residuals_for(
            &sample.catalog,
            &scenario.model,
            &diagram,
            &sample.core_indices,
            &Sequential,
        )?;
        Ok(included_raw(&records))
    })
    .into_iter()
    .map(|r: vorres_core::Result<Vec<f64>>| r.map_err(Error::from))
    .collect()
}

fn included_raw(records: &[ResidualRecord]) -> Vec<f64> {
    records.iter().filter(|r| !r.excluded).map(|r| r.raw).collect()
}

fn residuals(args: &CommonArgs, exec: &RayonExecutor) -> Result<()> {
    let cfg = resolve(args, &[("partition", "voronoi"), ("quantile_sims", "99")])?;
    let model = cfg.model()?;
    let catalog = load_catalog(&cfg, Some(&model))?;
    let partitions = cfg.partitions()?;
    let seed = cfg.seed()?;
    let n_sim: usize = cfg.require("quantile_sims")?;
    let out = cfg.out_dir();
    let mut written = Vec::new();
    for (k, &partition) in partitions.iter().enumerate() {
        let stem = partition_stem(partition);
        let (records, regions) = match partition.grid(catalog.window)? {
            None => {
                let diagram = tessellate_catalog(&catalog)?;
                let records = voronoi_residuals_with(&catalog, &model, &diagram, exec)?;
                save(&out, "cells.txt", &formats::format_polygons(&diagram), &mut written)?;
                (records, svg::regions_from_diagram(&diagram))
            }
            Some(grid) => {
                let records = pixel_residuals(&catalog, &model, &grid, &observed_noise(seed).child(k as u64))?;
                (records, svg::regions_from_grid(&grid))
            }
        };
        save(&out, &format!("residuals_{stem}.csv"), &formats::format_residuals(&records), &mut written)?;
        let title = format!("{} residuals, {}", model.kind.name(), partition);
        let map = svg::residual_map(&regions, &records, &catalog.window, &title)?;
        save(&out, &format!("residual_map_{stem}.svg"), &map, &mut written)?;

        if partition == Partition::Voronoi && n_sim > 0 {
            let scenario = scenario_for(&cfg, &model, &[])?;
            let sims = simulated_raw_residuals(&scenario, n_sim, &SeedStream::new(seed), exec)?;
            let q = quantile_plot(&included_raw(&records), &sims, 0.95)?;
            save(&out, "quantiles_voronoi.csv", &formats::format_quantiles(&q), &mut written)?;
            let title = format!("Voronoi residual quantiles ({:.0}% inside envelope)", 100.0 * q.inside_fraction());
            save(&out, "quantile_voronoi.svg", &svg::quantile_plot(&q, &title), &mut written)?;
        }
    }
    finish(&cfg, &written)
}

fn pit(args: &CommonArgs, exec: &RayonExecutor) -> Result<()> {
    let cfg = resolve(
        args,
        &[
            ("partition", "voronoi"),
            ("n_sim", "999"),
            ("alpha", "0.05"),
            ("bins", "10"),
            ("coverage", "0.9"),
        ],
    )?;
    let model = cfg.model()?;
    let catalog = load_catalog(&cfg, Some(&model))?;
    let partitions = cfg.partitions()?;
    let seed = cfg.seed()?;
    let n_sim: usize = cfg.require("n_sim")?;
    let alpha: f64 = cfg.require("alpha")?;
    let bins: usize = cfg.require("bins")?;
    let coverage: f64 = cfg.require("coverage")?;
    if n_sim == 0 {
        return Err(Error::Usage("n_sim must be positive".to_owned()));
    }

    let scenario = scenario_for(&cfg, &model, &partitions)?;
    let observed = observed_sample(&catalog);
    let observed_pits = scenario
        .pits_for_all(&observed, &partitions, &observed_noise(seed))
        .map_err(duplicate_hint)?;
    let nulls = scenario.null_distributions(&partitions, n_sim, alpha, &SeedStream::new(seed), exec)?;

    let out = cfg.out_dir();
    let mut written = Vec::new();
    let mut tests = Vec::new();
    for ((partition, pits), null) in partitions.iter().zip(&observed_pits).zip(&nulls) {
        let stem = partition_stem(*partition);
        tests.push((*partition, ks_test(pits, null)?));
        let h = pit_histogram(pits, bins, &null.pit_sets, coverage)?;
        save(&out, &format!("histogram_{stem}.csv"), &formats::format_histogram(&h), &mut written)?;
        let title = format!("PIT histogram, {partition}");
        save(&out, &format!("histogram_{stem}.svg"), &svg::histogram(&h, &title), &mut written)?;
    }
    save(&out, "ks.csv", &formats::format_ks(&tests), &mut written)?;
    for (p, t) in &tests {
        eprintln!(
            "{p}: D = {:.4}, critical {:.4}, {}",
            t.statistic,
            t.critical_value,
            if t.reject { "reject" } else { "accept" }
        );
    }
    finish(&cfg, &written)
}

fn power(args: &CommonArgs, exec: &RayonExecutor) -> Result<()> {
    let mut cfg = resolve(
        args,
        &[
            ("design", "homogeneous"),
            ("partition", "voronoi, pixel(36), pixel(324), pixel(2500)"),
            ("replicates", "500"),
            ("n_sim", "999"),
            ("alpha", "0.05"),
            ("margin", "0.25"),
        ],
    )?;
    let design: PowerDesign = cfg
        .get("design")
        .unwrap_or_default()
        .parse()
        .map_err(|_| Error::Usage("design must be homogeneous or beta_family".to_owned()))?;
    let default_grid = match design {
        PowerDesign::Homogeneous => "375, 437, 500, 562, 625",
        PowerDesign::BetaFamily => "0.5, 2, 4, 7, 11",
    };
    cfg.set_default("proposed", default_grid);
    cfg.set_default("true_value", design.default_true_value());
    let config = PowerConfig {
        design,
        true_value: cfg.require("true_value")?,
        proposed: cfg.list("proposed")?.unwrap_or_default(),
        partitions: cfg.partitions()?,
        replicates: cfg.require("replicates")?,
        n_sim: cfg.require("n_sim")?,
        alpha: cfg.require("alpha")?,
        margin: cfg.require("margin")?,
        seed: cfg.seed()?,
    };
    let result = power_study(&config, exec)?;
    let out = cfg.out_dir();
    let mut written = Vec::new();
    let csv = formats::format_power(&result);
    save(&out, "power.csv", &csv, &mut written)?;
    let rows = formats::parse_power(&csv, Path::new("power.csv"))?;
    let xlabel = match design {
        PowerDesign::Homogeneous => "proposed rate",
        PowerDesign::BetaFamily => "proposed beta",
    };
    let title = format!("Power, {} design (true value {})", design.name(), config.true_value);
    save(&out, "power.svg", &svg::power_curves(&rows, &title, xlabel), &mut written)?;
    finish(&cfg, &written)
}

fn fit(args: &CommonArgs, exec: &RayonExecutor) -> Result<()> {
    let cfg = resolve(
        args,
        &[("starts", "8"), ("restarts", "1"), ("jitter", "1"), ("max_evals", "5000")],
    )?;
    let model = cfg.model()?;
    let ModelKind::Etas(init) = model.kind else {
        return Err(Error::Usage("fit needs an ETAS starting model".to_owned()));
    };
    let catalog = load_catalog(&cfg, Some(&model))?;
    let mut opts = FitOptions {
        starts: cfg.require("starts")?,
        restarts: cfg.require("restarts")?,
        jitter: cfg.require("jitter")?,
        seed: cfg.seed()?,
        ..FitOptions::default()
    };
    opts.nelder_mead.max_evals = cfg.require("max_evals")?;
    let result = fit_mle_with(&catalog, &init, &opts, exec)?;
    let out = cfg.out_dir();
    let mut written = Vec::new();
    save(&out, "fitted.params", &formats::format_fit(&result), &mut written)?;
    save(&out, "fit_trace.csv", &formats::format_fit_trace(&result), &mut written)?;
    eprintln!(
        "{} events, loglik {:.4}, {}",
        catalog.len(),
        result.loglik,
        if result.converged { "converged" } else { "not converged" }
    );
    finish(&cfg, &written)
}

fn plot(args: &PlotArgs) -> Result<()> {
    let mut common = args.common.clone();
    if let Some(p) = &args.polygons {
        common.set.push(format!("polygons={}", p.display()));
    }
    let cfg = resolve(&common, &[])?;
    let out = cfg.out_dir();
    let mut written = Vec::new();
    for input in &args.input {
        let text = formats::read_text(input)?;
        let header = text.lines().next().unwrap_or("").trim().replace(' ', "");
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "plot".to_owned());
        let svg_text = match header.as_str() {
            formats::RESIDUAL_HEADER => {
                let records = formats::parse_residuals(&text, input)?;
                let window = cfg.window()?;
                let regions = match records.first().map(|r| r.kind.as_str()) {
                    Some("pixel") => svg::regions_from_grid(&PixelGrid::square(window, records.len())?),
                    _ => {
                        let polygons = cfg.get("polygons").ok_or_else(|| {
                            Error::Usage("a Voronoi residual file needs --polygons".to_owned())
                        })?;
                        let p = Path::new(polygons);
                        svg::regions_from_polygons(&formats::parse_polygons(&formats::read_text(p)?, p)?)
                    }
                };
                svg::residual_map(&regions, &records, &window, &stem)?
            }
            formats::HISTOGRAM_HEADER => svg::histogram(&formats::parse_histogram(&text, input)?, &stem),
            formats::QUANTILE_HEADER => svg::quantile_plot(&formats::parse_quantiles(&text, input)?, &stem),
            formats::POWER_HEADER => svg::power_curves(&formats::parse_power(&text, input)?, &stem, "proposed value"),
            _ => {
                return Err(Error::Data(format!(
                    "{}: unrecognised CSV header `{header}`",
                    input.display()
                )))
            }
        };
        save(&out, &format!("{stem}.svg"), &svg_text, &mut written)?;
    }
    finish(&cfg, &written)
}
