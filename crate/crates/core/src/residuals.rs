//! Voronoi and pixel residuals with their PIT values.
//!
//! Each Voronoi cell holds exactly one event, so its raw residual is
//! `1 - ∫λ`. Under a correct model the reduced area `∫λ` is approximately
//! Γ(3.569, 3.569); the PIT of a cell is the reference probability of a
//! residual at most as large as the observed one.

use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng as _;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::geometry::{PixelGrid, VoronoiDiagram};
use crate::intensity::IntensityModel;
use crate::seed::SeedStream;
use crate::special::{normal_quantile, poisson_cdf, Gamma};

pub const GAMMA_SHAPE: f64 = 3.569;

/// Approximate law of the reduced area of a Poisson–Voronoi cell.
pub const fn gamma_reference() -> Gamma {
    Gamma::new(GAMMA_SHAPE, GAMMA_SHAPE)
}

/// PIT of a Voronoi cell from its integrated intensity: P(1 - X ≤ raw).
pub fn voronoi_pit(integral: f64) -> f64 {
    gamma_reference().sf(integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    Voronoi,
    Pixel,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Voronoi => "voronoi",
            Self::Pixel => "pixel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRecord {
    pub region_id: usize,
    pub kind: RegionKind,
    pub count: u64,
    pub integral: f64,
    pub raw: f64,
    pub pearson: Option<f64>,
    pub pit: f64,
    /// Boundary cells are reported but left out of every summary.
    pub excluded: bool,
    /// False when the cell integral missed its error target.
    pub converged: bool,
}

/// Residuals for every cell of a diagram built from the catalog's points.
/// ETAS models are integrated over their whole time span with the full
/// catalog as history.
pub fn voronoi_residuals(
    catalog: &Catalog,
    model: &IntensityModel,
    diagram: &VoronoiDiagram,
) -> Result<Vec<ResidualRecord>> {
    voronoi_residuals_with(catalog, model, diagram, &Sequential)
}

pub fn voronoi_residuals_with<E: Executor>(
    catalog: &Catalog,
    model: &IntensityModel,
    diagram: &VoronoiDiagram,
    exec: &E,
) -> Result<Vec<ResidualRecord>> {
    if catalog.len() != diagram.len() {
        return Err(Error::SizeMismatch {
            expected: catalog.len(),
            found: diagram.len(),
        });
    }
    let all: Vec<usize> = (0..diagram.len()).collect();
    voronoi_residuals_for(catalog, model, diagram, &all, exec)
}

/// Residuals for a subset of cells, e.g. the cells of core-window points
/// in a buffered design.
pub fn voronoi_residuals_for<E: Executor>(
    catalog: &Catalog,
    model: &IntensityModel,
    diagram: &VoronoiDiagram,
    cells: &[usize],
    exec: &E,
) -> Result<Vec<ResidualRecord>> {
    model.validate()?;
    if let Some(&bad) = cells.iter().find(|&&i| i >= diagram.len()) {
        return Err(Error::SizeMismatch {
            expected: diagram.len(),
            found: bad + 1,
        });
    }
    exec.map_indexed(cells.len(), |k| {
        let i = cells[k];
        let cell = &diagram.cells[i];
        let integral = model.integrate_cell(cell, &catalog.events)?;
        Ok(ResidualRecord {
            region_id: i,
            kind: RegionKind::Voronoi,
            count: 1,
            integral: integral.value,
            raw: 1.0 - integral.value,
            pearson: None,
            pit: voronoi_pit(integral.value),
            excluded: cell.touches_boundary,
            converged: integral.converged,
        })
    })
    .into_iter()
    .collect()
}

/// Randomized PIT of a Poisson count:
/// F(k - 1) + v (F(k) - F(k - 1)), with F(-1) = 0.
pub fn randomized_pit(count: u64, mean: f64, v: f64) -> f64 {
    let upper = poisson_cdf(count, mean);
    let lower = if count == 0 {
        0.0
    } else {
        poisson_cdf(count - 1, mean)
    };
    (lower + v * (upper - lower)).clamp(0.0, 1.0)
}

/// Standard-normal score used to colour residual maps.
pub fn residual_color_scale(pit: f64) -> f64 {
    normal_quantile(pit.clamp(1e-10, 1.0 - 1e-10))
}

/// Builds a pixel record; the uniform `v` drives the randomized PIT.
pub fn pixel_record(region_id: usize, count: u64, integral: f64, v: f64) -> ResidualRecord {
    let raw = count as f64 - integral;
    ResidualRecord {
        region_id,
        kind: RegionKind::Pixel,
        count,
        integral,
        raw,
        pearson: (integral >= 1e-12).then(|| raw / integral.sqrt()),
        pit: randomized_pit(count, integral, v),
        excluded: false,
        converged: true,
    }
}

/// Pixel residuals from precomputed integrals. Region `i` draws its PIT
/// noise from child stream `i` of `seed`.
pub fn pixel_residuals_from_integrals(
    counts: &[u64],
    integrals: &[f64],
    seed: &SeedStream,
) -> Result<Vec<ResidualRecord>> {
    if counts.len() != integrals.len() {
        return Err(Error::SizeMismatch {
            expected: integrals.len(),
            found: counts.len(),
        });
    }
    Ok(counts
        .iter()
        .zip(integrals)
        .enumerate()
        .map(|(i, (&n, &m))| {
            let v: f64 = seed.child(i as u64).rng().random();
            pixel_record(i, n, m, v)
        })
        .collect())
}

/// Residuals on a pixel grid over the model's window.
pub fn pixel_residuals(
    catalog: &Catalog,
    model: &IntensityModel,
    grid: &PixelGrid,
    seed: &SeedStream,
) -> Result<Vec<ResidualRecord>> {
    let integrals = model.integrate_pixels(grid, &catalog.events)?;
    let counts = grid.counts(catalog.events.iter().map(|e| e.point()));
    let values: Vec<f64> = integrals.iter().map(|i| i.value).collect();
    let mut records = pixel_residuals_from_integrals(&counts, &values, seed)?;
    for (r, i) in records.iter_mut().zip(&integrals) {
        r.converged = i.converged;
    }
    Ok(records)
}

/// PIT values of the records that enter summaries.
pub fn included_pits(records: &[ResidualRecord]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| !r.excluded)
        .map(|r| r.pit)
        .collect()
}

/// Quantile plot of raw Voronoi residuals against the reference law, with a
/// pointwise envelope from simulated residual sets.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantilePlot {
    /// Reference quantiles of 1 - X at plotting positions (k - 0.5)/n.
    pub theoretical: Vec<f64>,
    pub observed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl QuantilePlot {
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// Fraction of order statistics inside the envelope.
    pub fn inside_fraction(&self) -> f64 {
        if self.is_empty() {
            return 1.0;
        }
        let inside = (0..self.len())
            .filter(|&k| self.observed[k] >= self.lower[k] && self.observed[k] <= self.upper[k])
            .count();
        inside as f64 / self.len() as f64
    }
}

/// Empirical quantile of a sorted sample, interpolating linearly between
/// order statistics placed at (k - 0.5)/n.
pub fn sorted_quantile(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (prob * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Builds the quantile plot; `level` is the envelope coverage (0.95 for
/// pointwise 95% limits). Simulated sets of different sizes are compared
/// at the observed plotting positions.
pub fn quantile_plot(observed_raw: &[f64], simulated_raw: &[Vec<f64>], level: f64) -> Result<QuantilePlot> {
    if observed_raw.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = observed_raw.len();
    let mut observed = observed_raw.to_vec();
    observed.sort_by(f64::total_cmp);
    let positions: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
    let reference = gamma_reference();
    let theoretical = positions
        .iter()
        .map(|&pr| 1.0 - reference.quantile(1.0 - pr))
        .collect();

    let sims: Vec<Vec<f64>> = simulated_raw
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let mut s = s.clone();
            s.sort_by(f64::total_cmp);
            positions.iter().map(|&pr| sorted_quantile(&s, pr)).collect()
        })
        .collect();
    if sims.is_empty() {
        return Err(Error::EmptySample);
    }
    let tail = 0.5 * (1.0 - level);
    let mut column = Vec::with_capacity(sims.len());
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for k in 0..n {
        column.clear();
        column.extend(sims.iter().map(|s| s[k]));
        column.sort_by(f64::total_cmp);
        lower.push(sorted_quantile(&column, tail));
        upper.push(sorted_quantile(&column, 1.0 - tail));
    }
    Ok(QuantilePlot {
        theoretical,
        observed,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{tessellate, Point, Window};
    use crate::intensity::ModelKind;
    use crate::simulate::buffered_sample;
    use crate::special::gamma_p;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn homogeneous(rate: f64) -> IntensityModel {
        IntensityModel::spatial(ModelKind::Homogeneous { rate }, Window::unit())
    }

    #[test]
    fn unit_integral_gives_zero_raw() {
        let pts = [Point::new(0.25, 0.5), Point::new(0.75, 0.5)];
        let catalog = Catalog::from_points(&pts, Window::unit());
        let diagram = tessellate(&pts, Window::unit()).unwrap();
        let records = voronoi_residuals(&catalog, &homogeneous(2.0), &diagram).unwrap();
        for r in &records {
            assert_eq!(r.raw, 0.0);
            assert_eq!(r.raw + r.integral, 1.0);
            assert!(r.excluded);
        }
        // 1 - G(1) for the reference gamma, pinned.
        let expected = 1.0 - gamma_p(GAMMA_SHAPE, GAMMA_SHAPE);
        assert_relative_eq!(records[0].pit, expected, max_relative = 1e-12);
        assert_relative_eq!(records[0].pit, 0.4295700469673484, max_relative = 1e-9);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let pts = [Point::new(0.25, 0.5), Point::new(0.75, 0.5)];
        let catalog = Catalog::from_points(&pts[..1], Window::unit());
        let diagram = tessellate(&pts, Window::unit()).unwrap();
        assert!(matches!(
            voronoi_residuals(&catalog, &homogeneous(2.0), &diagram),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn pearson_worked_example() {
        let occupied = pixel_record(0, 1, 0.01, 0.5);
        assert_relative_eq!(occupied.raw, 0.99, max_relative = 1e-15);
        assert_relative_eq!(occupied.pearson.unwrap(), 9.9, max_relative = 1e-14);
        let empty = pixel_record(1, 0, 0.01, 0.5);
        assert_relative_eq!(empty.raw, -0.01, max_relative = 1e-15);
        assert_relative_eq!(empty.pearson.unwrap(), -0.1, max_relative = 1e-14);
        let balanced = pixel_record(2, 4, 4.0, 0.5);
        assert_eq!(balanced.raw, 0.0);
        assert_eq!(balanced.pearson, Some(0.0));
        assert_eq!(pixel_record(3, 0, 0.0, 0.5).pearson, None);
    }

    #[test]
    fn randomized_pit_examples() {
        assert_relative_eq!(randomized_pit(0, 1.0, 0.5), 0.5 * (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(randomized_pit(1, 1.0, 0.0), (-1.0f64).exp(), max_relative = 1e-14);
        for mean in [0.0, 0.3, 7.0] {
            assert_eq!(randomized_pit(0, mean, 0.0), 0.0);
        }
    }

    #[test]
    fn color_scale_examples() {
        assert!(residual_color_scale(0.5).abs() < 1e-12);
        assert_relative_eq!(residual_color_scale(0.975), 1.959963984540054, max_relative = 1e-9);
        assert_relative_eq!(residual_color_scale(0.025), -1.959963984540054, max_relative = 1e-9);
        assert!(residual_color_scale(0.0).is_finite());
        assert!(residual_color_scale(1.0).is_finite());
    }

    #[test]
    fn pixel_noise_depends_only_on_region_index() {
        let seed = SeedStream::new(4);
        let a = pixel_residuals_from_integrals(&[1, 2, 3], &[1.0, 2.0, 3.0], &seed).unwrap();
        let b = pixel_residuals_from_integrals(&[1, 2], &[1.0, 2.0], &seed).unwrap();
        assert_eq!(a[..2], b[..]);
    }

    #[test]
    fn correct_homogeneous_model_has_reference_moments() {
        // Cells of unit-square points, with the process continued on a
        // buffer so no selected cell is cut by the window.
        let model = homogeneous(500.0);
        let root = SeedStream::new(31);
        let mut raws = Vec::new();
        for i in 0..40 {
            let s = buffered_sample(&model, &Window::unit(), 0.25, &mut root.child(i).rng()).unwrap();
            let d = tessellate(&s.catalog.points(), s.catalog.window).unwrap();
            let recs = voronoi_residuals_for(&s.catalog, &model, &d, &s.core_indices, &Sequential).unwrap();
            raws.extend(recs.iter().filter(|r| !r.excluded).map(|r| r.raw));
        }
        let n = raws.len() as f64;
        let mean = raws.iter().sum::<f64>() / n;
        let var = raws.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 0.28).abs() < 0.03, "var {var}");
    }

    #[test]
    fn quantile_plot_of_reference_draws_is_inside() {
        // Sets drawn from the reference law itself, by inverse transform on
        // a stratified grid, should track the theoretical quantiles.
        let g = gamma_reference();
        let set = |n: usize, shift: f64| -> Vec<f64> {
            (0..n)
                .map(|k| 1.0 - g.quantile(((k as f64 + shift) / n as f64).clamp(1e-9, 1.0 - 1e-9)))
                .collect()
        };
        let sims: Vec<Vec<f64>> = (0..20).map(|i| set(200 + i, 0.1 + 0.04 * i as f64)).collect();
        let plot = quantile_plot(&set(200, 0.5), &sims, 0.95).unwrap();
        assert_eq!(plot.len(), 200);
        for k in 0..200 {
            assert!((plot.observed[k] - plot.theoretical[k]).abs() < 1e-9);
        }
        assert!(plot.inside_fraction() > 0.9);
    }

    proptest! {
        #[test]
        fn randomized_pit_is_monotone(count in 0u64..40, mean in 0.001f64..30.0, v1 in 0.0f64..1.0, v2 in 0.0f64..1.0) {
            let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            let a = randomized_pit(count, mean, lo);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(a <= randomized_pit(count, mean, hi) + 1e-15);
            prop_assert!(randomized_pit(count, mean, 1.0) <= randomized_pit(count + 1, mean, 0.0) + 1e-12);
        }

        #[test]
        fn voronoi_pit_is_monotone_in_raw(a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // Larger integral means smaller raw residual and smaller PIT.
            prop_assert!(voronoi_pit(hi) <= voronoi_pit(lo));
        }
    }
}
