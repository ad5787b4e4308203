//! Goodness-of-fit testing on PIT values: the K–S statistic with
//! Monte Carlo critical values, PIT histograms with simulated bands, and
//! the power-curve experiment.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::geometry::{tessellate, PixelGrid, VoronoiDiagram, Window};
use crate::intensity::{IntensityModel, ModelKind};
use crate::residuals::{
    included_pits, pixel_residuals_from_integrals, sorted_quantile, voronoi_residuals_for,
};
use crate::seed::SeedStream;
use crate::simulate::{buffered_sample, sample_etas, BufferedSample, MagnitudeLaw};

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `sample` and the standard uniform.
pub fn ks_statistic(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some((index, &value)) = sample
        .iter()
        .enumerate()
        .find(|(_, u)| !(0.0..=1.0).contains(*u))
    {
        return Err(Error::ValueOutOfRange { index, value });
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let above = (i + 1) as f64 / n - u;
            let below = u - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max))
}

/// The empirical (1 - alpha) quantile of simulated statistics: order
/// statistic ⌈(1 - alpha)(n + 1)⌉, clamped to the sample; 0 when that
/// index is 0.
pub fn empirical_critical_value(stats: &[f64], alpha: f64) -> f64 {
    if stats.is_empty() {
        return f64::INFINITY;
    }
    let mut sorted = stats.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((1.0 - alpha) * (sorted.len() + 1) as f64).ceil() as usize;
    if k == 0 {
        0.0
    } else {
        sorted[k.min(sorted.len()) - 1]
    }
}

/// How the window is divided into regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Voronoi,
    /// A √n × √n grid; `Pixel(1)` is the single-region count test.
    Pixel(usize),
}

impl Partition {
    pub fn grid(&self, window: Window) -> Result<Option<PixelGrid>> {
        match self {
            Self::Voronoi => Ok(None),
            Self::Pixel(n) => PixelGrid::square(window, *n).map(Some),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Voronoi => f.write_str("voronoi"),
            Self::Pixel(n) => write!(f, "pixel({n})"),
        }
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("voronoi") {
            return Ok(Self::Voronoi);
        }
        let inner = s
            .strip_prefix("pixel(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("pixel:"));
        let n: usize = inner
            .and_then(|n| n.trim().parse().ok())
            .ok_or(Error::InvalidPartition(0))?;
        let side = (n as f64).sqrt().round() as usize;
        if n == 0 || side * side != n {
            return Err(Error::InvalidPartition(n));
        }
        Ok(Self::Pixel(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n: usize,
    pub critical_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub n_sim: usize,
}

impl KsResult {
    pub fn new(statistic: f64, n: usize, null: &NullDistribution) -> Self {
        Self {
            statistic,
            n,
            critical_value: null.critical_value,
            alpha: null.alpha,
            reject: statistic > null.critical_value,
            n_sim: null.statistics.len(),
        }
    }
}

/// Simulated null distribution of the PIT K–S statistic for one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub partition: Partition,
    pub statistics: Vec<f64>,
    pub alpha: f64,
    pub critical_value: f64,
    /// PIT sets of every simulation, kept for histogram bands.
    pub pit_sets: Vec<Vec<f64>>,
}

/// A proposed model together with how patterns are drawn from it.
///
/// Spatial models are sampled on `core` expanded by `margin`; only points
/// inside `core` are scored, and with no margin boundary cells are
/// excluded instead. ETAS models are simulated on their own window and
/// time span with `mag_law`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: IntensityModel,
    pub core: Window,
    pub margin: f64,
    pub mag_law: Option<MagnitudeLaw>,
    pixel_integrals: Vec<(usize, Vec<f64>)>,
}

impl Scenario {
    pub fn new(model: IntensityModel, core: Window, margin: f64) -> Self {
        Self {
            model,
            core,
            margin,
            mag_law: None,
            pixel_integrals: Vec::new(),
        }
    }

    /// An ETAS scenario on the model's window.
    pub fn etas(model: IntensityModel, mag_law: MagnitudeLaw) -> Self {
        let core = model.window;
        Self {
            mag_law: Some(mag_law),
            ..Self::new(model, core, 0.0)
        }
    }

    /// Precomputes pixel integrals for the given partitions. History-free
    /// models integrate to the same values for every sample.
    pub fn with_partitions(mut self, partitions: &[Partition]) -> Result<Self> {
        if self.model.is_etas() {
            return Ok(self);
        }
        for p in partitions {
            if let Some(grid) = p.grid(self.core)? {
                let values = self
                    .model
                    .integrate_pixels(&grid, &[])?
                    .iter()
                    .map(|i| i.value)
                    .collect();
                self.pixel_integrals.push((grid.len(), values));
            }
        }
        Ok(self)
    }

    pub fn simulate(&self, seed: &SeedStream) -> Result<BufferedSample> {
        let mut rng = seed.rng();
        if let ModelKind::Etas(params) = &self.model.kind {
            let span = self.model.time_span.ok_or(Error::UnsupportedModel {
                kind: "etas",
                operation: "simulation without a time span",
            })?;
            let law = self
                .mag_law
                .unwrap_or_else(|| MagnitudeLaw::gutenberg_richter(params.m0));
            let catalog = sample_etas(params, &self.model.window, &span, &law, &mut rng)?.catalog;
            let core_indices = (0..catalog.len()).collect();
            return Ok(BufferedSample {
                catalog,
                core: self.model.window,
                core_indices,
            });
        }
        buffered_sample(&self.model, &self.core, self.margin, &mut rng)
    }

    /// PIT values of `sample` under this scenario's model. `diagram` must
    /// be the tessellation of the whole sample when given; `noise` seeds
    /// the randomized PIT of pixel counts.
    pub fn pits(
        &self,
        sample: &BufferedSample,
        diagram: Option<&VoronoiDiagram>,
        partition: Partition,
        noise: &SeedStream,
    ) -> Result<Vec<f64>> {
        match partition {
            Partition::Voronoi => {
                let owned;
                let diagram = match diagram {
                    Some(d) => d,
                    None => {
                        owned = tessellate(&sample.catalog.points(), sample.catalog.window)?;
                        &owned
                    }
                };
                let records = voronoi_residuals_for(
                    &sample.catalog,
                    &self.model,
                    diagram,
                    &sample.core_indices,
                    &Sequential,
                )?;
                Ok(included_pits(&records))
            }
            Partition::Pixel(n) => {
                let grid = PixelGrid::square(self.core, n)?;
                let counts = grid.counts(sample.core_points());
                let cached = self
                    .pixel_integrals
                    .iter()
                    .find(|(len, _)| *len == n)
                    .map(|(_, v)| v);
                let records = match cached {
                    Some(values) => pixel_residuals_from_integrals(&counts, values, noise)?,
                    None => {
                        let values: Vec<f64> = self
                            .model
                            .integrate_pixels(&grid, &sample.catalog.events)?
                            .iter()
                            .map(|i| i.value)
                            .collect();
                        pixel_residuals_from_integrals(&counts, &values, noise)?
                    }
                };
                Ok(included_pits(&records))
            }
        }
    }

    /// PIT values under each partition, tessellating at most once.
    pub fn pits_for_all(
        &self,
        sample: &BufferedSample,
        partitions: &[Partition],
        noise: &SeedStream,
    ) -> Result<Vec<Vec<f64>>> {
        let diagram = if partitions.contains(&Partition::Voronoi) {
            Some(tessellate(&sample.catalog.points(), sample.catalog.window)?)
        } else {
            None
        };
        partitions
            .iter()
            .enumerate()
            .map(|(k, &p)| self.pits(sample, diagram.as_ref(), p, &noise.child(k as u64)))
            .collect()
    }

    /// Simulates `n_sim` patterns from the model and returns the null
    /// distribution of the K–S statistic for each partition. Simulation
    /// `i` uses stream `seed.named("null", i)` whatever the executor.
    pub fn null_distributions<E: Executor>(
        &self,
        partitions: &[Partition],
        n_sim: usize,
        alpha: f64,
        seed: &SeedStream,
        exec: &E,
    ) -> Result<Vec<NullDistribution>> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
            });
        }
        let sims: Vec<Result<Vec<Vec<f64>>>> = exec.map_indexed(n_sim, |i| {
            let s = seed.named("null", i as u64);
            let sample = self.simulate(&s.child(0))?;
            self.pits_for_all(&sample, partitions, &s.child(1))
        });
        let sims: Vec<Vec<Vec<f64>>> = sims.into_iter().collect::<Result<_>>()?;
        partitions
            .iter()
            .enumerate()
            .map(|(k, &partition)| {
                let pit_sets: Vec<Vec<f64>> = sims.iter().map(|s| s[k].clone()).collect();
                let statistics = pit_sets
                    .iter()
                    .map(|p| if p.is_empty() { Ok(0.0) } else { ks_statistic(p) })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(NullDistribution {
                    partition,
                    critical_value: empirical_critical_value(&statistics, alpha),
                    statistics,
                    alpha,
                    pit_sets,
                })
            })
            .collect()
    }
}

/// Simulated critical value of the PIT K–S statistic for one partition.
pub fn simulated_critical_value<E: Executor>(
    scenario: &Scenario,
    partition: Partition,
    alpha: f64,
    n_sim: usize,
    seed: &SeedStream,
    exec: &E,
) -> Result<f64> {
    let null = scenario.null_distributions(&[partition], n_sim, alpha, seed, exec)?;
    Ok(null[0].critical_value)
}

/// Tests an observed PIT sample against a simulated null.
pub fn ks_test(pits: &[f64], null: &NullDistribution) -> Result<KsResult> {
    let statistic = if pits.is_empty() {
        0.0
    } else {
        ks_statistic(pits)?
    };
    Ok(KsResult::new(statistic, pits.len(), null))
}

/// PIT histogram with a pointwise simulation band.
#[derive(Debug, Clone, PartialEq)]
pub struct PitHistogram {
    /// `bins + 1` equally spaced edges on [0, 1].
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub band_lo: Vec<f64>,
    pub band_hi: Vec<f64>,
}

impl PitHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Indices of bins whose count falls outside the band.
    pub fn outside_bins(&self) -> Vec<usize> {
        (0..self.bins())
            .filter(|&b| {
                let c = self.counts[b] as f64;
                c < self.band_lo[b] || c > self.band_hi[b]
            })
            .collect()
    }
}

fn bin_counts(values: &[f64], bins: usize) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; bins];
    for &v in values {
        let b = ((v * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

/// Bins `pits` and attaches a band from the simulated PIT sets: for each
/// bin, the `(1 - coverage)/2` and `(1 + coverage)/2` quantiles of the
/// simulated counts, each rescaled to the observed sample size.
pub fn pit_histogram(
    pits: &[f64],
    bins: usize,
    simulated: &[Vec<f64>],
    coverage: f64,
) -> Result<PitHistogram> {
    if bins < 2 {
        return Err(Error::InvalidParameter {
            name: "bins",
            value: bins as f64,
        });
    }
    if let Some((index, &value)) = pits
        .iter()
        .enumerate()
        .find(|(_, u)| !(0.0..=1.0).contains(*u))
    {
        return Err(Error::ValueOutOfRange { index, value });
    }
    let n = pits.len() as f64;
    let scaled: Vec<Vec<f64>> = simulated
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let factor = n / s.len() as f64;
            bin_counts(s, bins)
                .into_iter()
                .map(|c| c as f64 * factor)
                .collect()
        })
        .collect();
    if scaled.is_empty() {
        return Err(Error::EmptySample);
    }
    let tail = 0.5 * (1.0 - coverage);
    let mut band_lo = Vec::with_capacity(bins);
    let mut band_hi = Vec::with_capacity(bins);
    let mut column = Vec::with_capacity(scaled.len());
    for b in 0..bins {
        column.clear();
        column.extend(scaled.iter().map(|s| s[b]));
        column.sort_by(f64::total_cmp);
        band_lo.push(sorted_quantile(&column, tail));
        band_hi.push(sorted_quantile(&column, 1.0 - tail));
    }
    Ok(PitHistogram {
        edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        counts: bin_counts(pits, bins),
        band_lo,
        band_hi,
    })
}

/// The two simulation designs of the power experiment, both on the unit
/// square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerDesign {
    /// Homogeneous Poisson; the parameter is the rate.
    Homogeneous,
    /// `100 + 200 c_β x̃^β ỹ^β`; the parameter is β.
    BetaFamily,
}

impl PowerDesign {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Homogeneous => "homogeneous",
            Self::BetaFamily => "beta_family",
        }
    }

    pub fn default_true_value(&self) -> f64 {
        match self {
            Self::Homogeneous => 500.0,
            Self::BetaFamily => 4.0,
        }
    }

    pub fn model(&self, value: f64) -> IntensityModel {
        let kind = match self {
            Self::Homogeneous => ModelKind::Homogeneous { rate: value },
            Self::BetaFamily => ModelKind::beta_family(value),
        };
        IntensityModel::spatial(kind, Window::unit())
    }
}

impl FromStr for PowerDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "homogeneous" => Ok(Self::Homogeneous),
            "beta_family" | "beta" => Ok(Self::BetaFamily),
            _ => Err(Error::UnsupportedModel {
                kind: "unknown",
                operation: "power design",
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerConfig {
    pub design: PowerDesign,
    pub true_value: f64,
    pub proposed: Vec<f64>,
    pub partitions: Vec<Partition>,
    pub replicates: usize,
    pub n_sim: usize,
    pub alpha: f64,
    pub margin: f64,
    pub seed: u64,
}

impl PowerConfig {
    pub fn new(design: PowerDesign, proposed: Vec<f64>, partitions: Vec<Partition>) -> Self {
        Self {
            design,
            true_value: design.default_true_value(),
            proposed,
            partitions,
            replicates: 500,
            n_sim: 999,
            alpha: 0.05,
            margin: crate::simulate::DEFAULT_MARGIN,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRow {
    pub partition: Partition,
    pub proposed_value: f64,
    pub critical_value: f64,
    pub rejections: usize,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub config: PowerConfig,
    /// One row per (proposed value, partition), proposed values outermost.
    pub rows: Vec<PowerRow>,
}

impl PowerResult {
    pub fn power(&self, partition: Partition, proposed: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.partition == partition && r.proposed_value == proposed)
            .map(|r| r.power)
    }
}

/// Estimates the rejection rate of the PIT K–S test for every proposed
/// value and partition. Replicate patterns come from the true model and are
/// shared across proposed values; critical values are simulated per
/// (proposed value, partition) from the proposed model.
pub fn power_study<E: Executor>(config: &PowerConfig, exec: &E) -> Result<PowerResult> {
    let root = SeedStream::new(config.seed);
    let core = Window::unit();
    let scenarios: Vec<Scenario> = config
        .proposed
        .iter()
        .map(|&v| {
            Scenario::new(config.design.model(v), core, config.margin)
                .with_partitions(&config.partitions)
        })
        .collect::<Result<_>>()?;

    let mut nulls = Vec::with_capacity(scenarios.len());
    for (j, scenario) in scenarios.iter().enumerate() {
        let mut null = scenario.null_distributions(
            &config.partitions,
            config.n_sim,
            config.alpha,
            &root.named("critical", j as u64),
            exec,
        )?;
        for n in &mut null {
            n.pit_sets = Vec::new();
        }
        nulls.push(null);
    }

    let truth = Scenario::new(config.design.model(config.true_value), core, config.margin);
    let replicate_stats: Vec<Result<Vec<f64>>> = exec.map_indexed(config.replicates, |r| {
        let s = root.named("replicate", r as u64);
        let sample = truth.simulate(&s.child(0))?;
        let diagram = if config.partitions.contains(&Partition::Voronoi) {
            Some(tessellate(&sample.catalog.points(), sample.catalog.window)?)
        } else {
            None
        };
        let mut stats = Vec::with_capacity(scenarios.len() * config.partitions.len());
        for (j, scenario) in scenarios.iter().enumerate() {
            let noise = s.child(1).child(j as u64);
            for (k, &p) in config.partitions.iter().enumerate() {
                let pits = scenario.pits(&sample, diagram.as_ref(), p, &noise.child(k as u64))?;
                stats.push(if pits.is_empty() { 0.0 } else { ks_statistic(&pits)? });
            }
        }
        Ok(stats)
    });
    let replicate_stats: Vec<Vec<f64>> = replicate_stats.into_iter().collect::<Result<_>>()?;

    let n_part = config.partitions.len();
    let mut rows = Vec::with_capacity(config.proposed.len() * n_part);
    for (j, &value) in config.proposed.iter().enumerate() {
        for (k, &partition) in config.partitions.iter().enumerate() {
            let critical_value = nulls[j][k].critical_value;
            let rejections = replicate_stats
                .iter()
                .filter(|stats| stats[j * n_part + k] > critical_value)
                .count();
            rows.push(PowerRow {
                partition,
                proposed_value: value,
                critical_value,
                rejections,
                power: rejections as f64 / config.replicates.max(1) as f64,
            });
        }
    }
    Ok(PowerResult {
        config: config.clone(),
        rows,
    })
}
