//! Conditional intensity models and their integrals over cells, pixels and
//! the whole window.

mod grid;
pub mod kernel;
pub mod quadrature;

pub use grid::GridIntensity;
pub use quadrature::{Integral, QuadratureOptions};

use alloc::vec::Vec;
use num_traits::Float;

use crate::catalog::{Event, TimeSpan};
use crate::error::{Error, Result};
use crate::geometry::{shoelace_area, ConvexCell, PixelGrid, Point, Window};
use kernel::{spatial_kernel_mass, temporal_kernel_mass};
use quadrature::{clip, integrate_polygon, split_polygon};

/// Relative accuracy of each per-event spatial kernel integral.
const KERNEL_REL_TOL: f64 = 1e-6;

/// ETAS parameters. The background density is uniform over the window, so
/// `rho = 1 / |S|` is implied by the model's window rather than stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtasParams {
    /// Background events per unit time.
    pub mu: f64,
    pub k: f64,
    pub c: f64,
    pub p: f64,
    /// Productivity per unit magnitude above the cutoff.
    pub a: f64,
    /// Magnitude cutoff of the catalog.
    pub m0: f64,
    /// Squared-distance offset of the spatial kernel.
    pub d: f64,
    pub q: f64,
}

impl EtasParams {
    /// Names of the fitted parameters, in optimiser order.
    pub const FREE_NAMES: [&'static str; 7] = ["mu", "K", "c", "p", "a", "d", "q"];

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 8] = [
            ("mu", self.mu, self.mu >= 0.0),
            ("K", self.k, self.k >= 0.0),
            ("c", self.c, self.c > 0.0),
            ("p", self.p, self.p > 1.0),
            ("a", self.a, self.a >= 0.0),
            ("M0", self.m0, true),
            ("d", self.d, self.d > 0.0),
            ("q", self.q, self.q > 1.0),
        ];
        for (name, value, ok) in checks {
            if !(ok && value.is_finite()) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// e^{a (M - M0)}; a missing magnitude counts as M0.
    pub fn productivity(&self, mag: Option<f64>) -> f64 {
        mag.map_or(1.0, |m| (self.a * (m - self.m0)).exp())
    }

    /// Triggering density g(dt, dx, dy; M) for dt > 0.
    pub fn triggering(&self, dt: f64, dist_sq: f64, mag: Option<f64>) -> f64 {
        self.k
            * self.productivity(mag)
            * (dt + self.c).powf(-self.p)
            * (dist_sq + self.d).powf(-self.q)
    }

    pub fn free_values(&self) -> [f64; 7] {
        [self.mu, self.k, self.c, self.p, self.a, self.d, self.q]
    }

    pub fn with_free_values(&self, v: &[f64]) -> Self {
        Self {
            mu: v[0],
            k: v[1],
            c: v[2],
            p: v[3],
            a: v[4],
            d: v[5],
            q: v[6],
            m0: self.m0,
        }
    }
}

/// c_β = ((β + 1) 2^β)², the constant making x̃^β ỹ^β c_β integrate to one
/// over the unit square.
pub fn beta_normalizer(beta: f64) -> f64 {
    let s = (beta + 1.0) * 2.0.powf(beta);
    s * s
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Constant rate.
    Homogeneous { rate: f64 },
    /// `scale · x² · |y|`.
    ProductXy { scale: f64 },
    /// `rate` where |x| > threshold and |y| > threshold, zero elsewhere.
    Indicator { rate: f64, threshold: f64 },
    /// `base + amplitude · c_β x̃^β ỹ^β` with x̃ = ½ − |x − ½| (clamped at
    /// zero outside the unit square, so the rate is `base` there).
    BetaFamily { beta: f64, base: f64, amplitude: f64 },
    Etas(EtasParams),
    UserGrid(GridIntensity),
}

impl ModelKind {
    pub fn beta_family(beta: f64) -> Self {
        Self::BetaFamily {
            beta,
            base: 100.0,
            amplitude: 200.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Homogeneous { .. } => "homogeneous",
            Self::ProductXy { .. } => "product_xy",
            Self::Indicator { .. } => "indicator",
            Self::BetaFamily { .. } => "beta_family",
            Self::Etas(_) => "etas",
            Self::UserGrid(_) => "user_grid",
        }
    }

    /// Named scalar parameters (empty for `user_grid`).
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Self::Homogeneous { rate } => alloc::vec![("rate", *rate)],
            Self::ProductXy { scale } => alloc::vec![("scale", *scale)],
            Self::Indicator { rate, threshold } => {
                alloc::vec![("rate", *rate), ("threshold", *threshold)]
            }
            Self::BetaFamily {
                beta,
                base,
                amplitude,
            } => alloc::vec![("beta", *beta), ("base", *base), ("amplitude", *amplitude)],
            Self::Etas(e) => alloc::vec![
                ("mu", e.mu),
                ("K", e.k),
                ("c", e.c),
                ("p", e.p),
                ("a", e.a),
                ("M0", e.m0),
                ("d", e.d),
                ("q", e.q),
            ],
            Self::UserGrid(_) => Vec::new(),
        }
    }

    /// Builds a scalar-parameter kind from a name and a parameter lookup.
    pub fn from_params<F>(name: &str, get: F) -> Result<Self>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let req = |key: &'static str| {
            get(key).ok_or(Error::InvalidParameter {
                name: key,
                value: f64::NAN,
            })
        };
        let kind = match name {
            "homogeneous" => Self::Homogeneous { rate: req("rate")? },
            "product_xy" => Self::ProductXy {
                scale: req("scale")?,
            },
            "indicator" => Self::Indicator {
                rate: req("rate")?,
                threshold: req("threshold")?,
            },
            "beta_family" => Self::BetaFamily {
                beta: req("beta")?,
                base: get("base").unwrap_or(100.0),
                amplitude: get("amplitude").unwrap_or(200.0),
            },
            "etas" => Self::Etas(EtasParams {
                mu: req("mu")?,
                k: req("K")?,
                c: req("c")?,
                p: req("p")?,
                a: req("a")?,
                m0: req("M0")?,
                d: req("d")?,
                q: req("q")?,
            }),
            _ => {
                return Err(Error::UnsupportedModel {
                    kind: "unknown",
                    operation: "construction from parameters",
                })
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &'static str, value: f64| {
            if value >= 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        match self {
            Self::Homogeneous { rate } => nonneg("rate", *rate),
            Self::ProductXy { scale } => nonneg("scale", *scale),
            Self::Indicator { rate, threshold } => {
                nonneg("rate", *rate)?;
                nonneg("threshold", *threshold)
            }
            Self::BetaFamily {
                beta,
                base,
                amplitude,
            } => {
                if !(*beta > 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "beta",
                        value: *beta,
                    });
                }
                nonneg("base", *base)?;
                nonneg("amplitude", *amplitude)
            }
            Self::Etas(e) => e.validate(),
            Self::UserGrid(_) => Ok(()),
        }
    }

    /// Lines along which the rate is not smooth; quadrature splits there.
    fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::ProductXy { .. } => (Vec::new(), alloc::vec![0.0]),
            Self::BetaFamily { .. } => (alloc::vec![0.0, 0.5, 1.0], alloc::vec![0.0, 0.5, 1.0]),
            Self::UserGrid(g) => (g.x_centers().to_vec(), g.y_centers().to_vec()),
            _ => (Vec::new(), Vec::new()),
        }
    }

    /// Spatial rate for the purely spatial kinds. ETAS returns its
    /// background component only.
    pub(crate) fn spatial_rate(&self, p: Point, window_area: f64) -> f64 {
        match self {
            Self::Homogeneous { rate } => *rate,
            Self::ProductXy { scale } => scale * p.x * p.x * p.y.abs(),
            Self::Indicator { rate, threshold } => {
                if p.x.abs() > *threshold && p.y.abs() > *threshold {
                    *rate
                } else {
                    0.0
                }
            }
            Self::BetaFamily {
                beta,
                base,
                amplitude,
            } => {
                let xt = (0.5 - (p.x - 0.5).abs()).max(0.0);
                let yt = (0.5 - (p.y - 0.5).abs()).max(0.0);
                base + amplitude * beta_normalizer(*beta) * (xt * yt).powf(*beta)
            }
            Self::Etas(e) => e.mu / window_area,
            Self::UserGrid(g) => g.evaluate(p),
        }
    }
}

/// A proposed (or generating) intensity model on an observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityModel {
    pub kind: ModelKind,
    pub window: Window,
    /// Integration time span; required for ETAS, ignored by spatial kinds.
    pub time_span: Option<TimeSpan>,
}

impl IntensityModel {
    pub fn spatial(kind: ModelKind, window: Window) -> Self {
        Self {
            kind,
            window,
            time_span: None,
        }
    }

    pub fn etas(params: EtasParams, window: Window, time_span: TimeSpan) -> Self {
        Self {
            kind: ModelKind::Etas(params),
            window,
            time_span: Some(time_span),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()
    }

    pub fn is_etas(&self) -> bool {
        matches!(self.kind, ModelKind::Etas(_))
    }

    /// λ(t, x, y | history). Only history events strictly before `t`
    /// contribute to the ETAS triggering sum.
    pub fn evaluate(&self, t: f64, p: Point, history: &[Event]) -> Result<f64> {
        self.validate()?;
        let background = self.kind.spatial_rate(p, self.window.area());
        let ModelKind::Etas(e) = &self.kind else {
            return Ok(background);
        };
        let triggered: f64 = history
            .iter()
            .filter(|ev| ev.t < t)
            .map(|ev| e.triggering(t - ev.t, p.dist_sq(ev.point()), ev.mag))
            .sum();
        Ok(background + triggered)
    }

    /// Finite upper bound of the spatial rate over `region`, for thinning.
    pub fn upper_bound(&self, region: &Window) -> Result<f64> {
        let bound = match &self.kind {
            ModelKind::Homogeneous { rate } => *rate,
            ModelKind::ProductXy { scale } => {
                let x2 = (region.xmin * region.xmin).max(region.xmax * region.xmax);
                let ay = region.ymin.abs().max(region.ymax.abs());
                scale * x2 * ay
            }
            ModelKind::Indicator { rate, .. } => *rate,
            ModelKind::BetaFamily {
                beta,
                base,
                amplitude,
            } => base + amplitude * (beta + 1.0) * (beta + 1.0),
            ModelKind::UserGrid(g) => g.max_rate(),
            ModelKind::Etas(_) => {
                return Err(Error::UnsupportedModel {
                    kind: "etas",
                    operation: "thinning-based Poisson sampling",
                })
            }
        };
        if bound.is_finite() {
            Ok(bound)
        } else {
            Err(Error::UnboundedIntensity)
        }
    }

    /// ∫ over a convex counterclockwise polygon (and, for ETAS, over the
    /// model's time span) of the intensity.
    pub fn integrate_polygon(
        &self,
        vertices: &[Point],
        history: &[Event],
        opts: &QuadratureOptions,
    ) -> Result<Integral> {
        self.validate()?;
        let area = shoelace_area(vertices);
        match &self.kind {
            ModelKind::Homogeneous { rate } => Ok(Integral::exact(rate * area)),
            ModelKind::Indicator { rate, threshold } => {
                Ok(Integral::exact(rate * indicator_area(vertices, *threshold)))
            }
            ModelKind::Etas(e) => self.integrate_etas(e, vertices, area, history),
            kind => {
                let window_area = self.window.area();
                let f = |p: Point| kind.spatial_rate(p, window_area);
                let (xs, ys) = kind.breakpoints();
                Ok(split_polygon(vertices, &xs, &ys)
                    .iter()
                    .map(|piece| integrate_polygon(&f, piece, opts))
                    .fold(Integral::zero(), Integral::combine))
            }
        }
    }

    fn integrate_etas(
        &self,
        e: &EtasParams,
        vertices: &[Point],
        area: f64,
        history: &[Event],
    ) -> Result<Integral> {
        let span = self.time_span.ok_or(Error::UnsupportedModel {
            kind: "etas",
            operation: "integration without a time span",
        })?;
        let background = e.mu * span.length() * area / self.window.area();
        let triggered: f64 = history
            .iter()
            .filter(|ev| ev.t < span.end)
            .map(|ev| {
                let tm = temporal_kernel_mass(ev.t, span.start, span.end, e.c, e.p);
                if tm == 0.0 || e.k == 0.0 {
                    return 0.0;
                }
                let sm = spatial_kernel_mass(ev.point(), vertices, e.d, e.q, KERNEL_REL_TOL);
                e.k * e.productivity(ev.mag) * tm * sm
            })
            .sum();
        let value = background + triggered;
        Ok(Integral {
            value,
            error: KERNEL_REL_TOL * triggered,
            converged: true,
        })
    }

    pub fn integrate_cell(&self, cell: &ConvexCell, history: &[Event]) -> Result<Integral> {
        let opts = self.default_options();
        self.integrate_polygon(&cell.vertices, history, &opts)
    }

    /// Per-pixel integrals, row-major in the grid's indexing.
    pub fn integrate_pixels(&self, grid: &PixelGrid, history: &[Event]) -> Result<Vec<Integral>> {
        let opts = self.default_options();
        (0..grid.len())
            .map(|i| self.integrate_polygon(&grid.pixel(i).corners(), history, &opts))
            .collect()
    }

    pub fn integrate_window(&self, history: &[Event]) -> Result<Integral> {
        let opts = self.default_options();
        self.integrate_polygon(&self.window.corners(), history, &opts)
    }

    pub fn default_options(&self) -> QuadratureOptions {
        if self.is_etas() {
            QuadratureOptions::etas()
        } else {
            QuadratureOptions::builtin()
        }
    }
}

/// Area of the polygon inside {|x| > h, |y| > h}.
fn indicator_area(vertices: &[Point], h: f64) -> f64 {
    let mut total = 0.0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        // Keep sx·x >= h, then sy·y >= h.
        clip(vertices, Point::new(-sx, 0.0), Point::new(sx * h, 0.0), &mut a);
        clip(&a, Point::new(0.0, -sy), Point::new(0.0, sy * h), &mut b);
        total += shoelace_area(&b).max(0.0);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn etas_params() -> EtasParams {
        EtasParams {
            mu: 0.3,
            k: 2e-4,
            c: 0.01,
            p: 1.2,
            a: 1.5,
            m0: 3.0,
            d: 1e-3,
            q: 1.8,
        }
    }

    #[test]
    fn beta_normalizer_closed_form_matches_quadrature() {
        for &beta in &[0.5, 1.0, 4.0, 11.0] {
            let f = |p: Point| {
                let xt = 0.5 - (p.x - 0.5).abs();
                let yt = 0.5 - (p.y - 0.5).abs();
                beta_normalizer(beta) * (xt * yt).powf(beta)
            };
            let opts = QuadratureOptions::builtin().with_rel_tol(1e-9);
            let total: f64 = split_polygon(&Window::unit().corners(), &[0.5], &[0.5])
                .iter()
                .map(|p| integrate_polygon(&f, p, &opts).value)
                .sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-6);
        }
        assert_eq!(beta_normalizer(1.0), 16.0);
    }

    #[test]
    fn beta_family_value_at_centre() {
        let m = IntensityModel::spatial(ModelKind::beta_family(1.0), Window::unit());
        assert_relative_eq!(m.evaluate(0.0, Point::new(0.5, 0.5), &[]).unwrap(), 900.0);
        // Outside the unit square only the base rate remains.
        assert_relative_eq!(m.evaluate(0.0, Point::new(1.2, 0.5), &[]).unwrap(), 100.0);
    }

    #[test]
    fn etas_empty_history_is_background() {
        let m = IntensityModel::etas(etas_params(), Window::unit(), TimeSpan::new(0.0, 10.0).unwrap());
        assert_relative_eq!(m.evaluate(3.0, Point::new(0.2, 0.9), &[]).unwrap(), 0.3);
    }

    #[test]
    fn etas_single_event_at_epicentre() {
        let e = etas_params();
        let m = IntensityModel::etas(e, Window::unit(), TimeSpan::new(0.0, 10.0).unwrap());
        let ev = Event::new(1.0, 0.4, 0.6, Some(3.0));
        let delta = 0.5;
        let expected = 0.3 + e.k * (delta + e.c).powf(-e.p) * e.d.powf(-e.q);
        let got = m.evaluate(1.0 + delta, Point::new(0.4, 0.6), &[ev]).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        // Events at or after t do not contribute.
        assert_relative_eq!(m.evaluate(1.0, Point::new(0.4, 0.6), &[ev]).unwrap(), 0.3);
    }

    #[test]
    fn invalid_parameters_are_named() {
        let mut e = etas_params();
        e.p = 0.9;
        let m = IntensityModel::etas(e, Window::unit(), TimeSpan::default());
        assert_eq!(
            m.evaluate(0.0, Point::new(0.5, 0.5), &[]),
            Err(Error::InvalidParameter { name: "p", value: 0.9 })
        );
        let m = IntensityModel::spatial(ModelKind::beta_family(-1.0), Window::unit());
        assert!(matches!(
            m.evaluate(0.0, Point::new(0.5, 0.5), &[]),
            Err(Error::InvalidParameter { name: "beta", .. })
        ));
    }

    #[test]
    fn homogeneous_cell_integral() {
        let m = IntensityModel::spatial(ModelKind::Homogeneous { rate: 100.0 }, Window::unit());
        let w = Window::new(0.2, 0.3, 0.5, 0.6).unwrap();
        let r = m.integrate_polygon(&w.corners(), &[], &QuadratureOptions::builtin()).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn product_xy_integrals_match_closed_form() {
        let m = IntensityModel::spatial(ModelKind::ProductXy { scale: 200.0 }, Window::symmetric_unit());
        assert_relative_eq!(m.integrate_window(&[]).unwrap().value, 400.0 / 3.0, max_relative = 1e-4);
        let unit = m
            .integrate_polygon(&Window::unit().corners(), &[], &QuadratureOptions::builtin())
            .unwrap();
        assert_relative_eq!(unit.value, 100.0 / 3.0, max_relative = 1e-4);
        let grid = PixelGrid::new(Window::symmetric_unit(), 2, 2).unwrap();
        for px in m.integrate_pixels(&grid, &[]).unwrap() {
            assert_relative_eq!(px.value, 100.0 / 3.0, max_relative = 1e-4);
        }
    }

    #[test]
    fn homogeneous_pixels_split_evenly() {
        let m = IntensityModel::spatial(ModelKind::Homogeneous { rate: 500.0 }, Window::unit());
        let grid = PixelGrid::square(Window::unit(), 36).unwrap();
        for px in m.integrate_pixels(&grid, &[]).unwrap() {
            assert_relative_eq!(px.value, 500.0 / 36.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn beta_family_total_is_300_on_any_grid() {
        for &beta in &[0.5, 2.0, 4.0, 7.0, 11.0] {
            let m = IntensityModel::spatial(ModelKind::beta_family(beta), Window::unit());
            for &(nx, ny) in &[(1, 1), (6, 6), (7, 3), (50, 50)] {
                let grid = PixelGrid::new(Window::unit(), nx, ny).unwrap();
                let total: f64 = m.integrate_pixels(&grid, &[]).unwrap().iter().map(|i| i.value).sum();
                assert_relative_eq!(total, 300.0, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn pixel_sum_matches_window_integral() {
        let m = IntensityModel::spatial(ModelKind::beta_family(4.0), Window::unit());
        let whole = m
            .integrate_polygon(&Window::unit().corners(), &[], &QuadratureOptions::builtin().with_rel_tol(1e-9))
            .unwrap()
            .value;
        let grid = PixelGrid::new(Window::unit(), 18, 18).unwrap();
        let opts = QuadratureOptions::builtin().with_rel_tol(1e-9);
        let sum: f64 = (0..grid.len())
            .map(|i| m.integrate_polygon(&grid.pixel(i).corners(), &[], &opts).unwrap().value)
            .sum();
        assert_relative_eq!(sum, whole, max_relative = 1e-6);
    }

    #[test]
    fn indicator_integral_is_exact() {
        let m = IntensityModel::spatial(
            ModelKind::Indicator { rate: 100.0, threshold: 0.35 },
            Window::symmetric_unit(),
        );
        let total = m.integrate_window(&[]).unwrap().value;
        assert_relative_eq!(total, 100.0 * 4.0 * 0.65 * 0.65, max_relative = 1e-12);
        let centre = Window::new(-0.3, 0.3, -0.3, 0.3).unwrap();
        let r = m.integrate_polygon(&centre.corners(), &[], &QuadratureOptions::builtin()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn etas_window_integral_decomposes() {
        let e = etas_params();
        let span = TimeSpan::new(0.0, 100.0).unwrap();
        let w = Window::unit();
        let m = IntensityModel::etas(e, w, span);
        let hist = [
            Event::new(10.0, 0.3, 0.3, Some(4.0)),
            Event::new(50.0, 0.95, 0.1, Some(3.2)),
        ];
        let total = m.integrate_window(&hist).unwrap().value;
        let grid = PixelGrid::new(w, 5, 4).unwrap();
        let px: f64 = m.integrate_pixels(&grid, &hist).unwrap().iter().map(|i| i.value).sum();
        assert_relative_eq!(total, px, max_relative = 1e-6);
        assert!(total > e.mu * 100.0);
    }

    #[test]
    fn user_grid_integrates_bilinear_exactly() {
        let g = GridIntensity::from_triples(&[
            (0.25, 0.25, 10.0),
            (0.75, 0.25, 30.0),
            (0.25, 0.75, 50.0),
            (0.75, 0.75, 70.0),
        ])
        .unwrap();
        let m = IntensityModel::spatial(ModelKind::UserGrid(g), Window::unit());
        // Symmetric clamped extension: the mean of the four corner rates.
        assert_relative_eq!(m.integrate_window(&[]).unwrap().value, 40.0, max_relative = 1e-10);
        assert_eq!(m.upper_bound(&Window::unit()).unwrap(), 70.0);
    }

    #[test]
    fn upper_bounds() {
        let m = IntensityModel::spatial(ModelKind::beta_family(4.0), Window::unit());
        assert_eq!(m.upper_bound(&Window::unit()).unwrap(), 100.0 + 200.0 * 25.0);
        let m = IntensityModel::spatial(ModelKind::ProductXy { scale: 200.0 }, Window::symmetric_unit());
        assert_eq!(m.upper_bound(&Window::symmetric_unit()).unwrap(), 200.0);
        let m = IntensityModel::etas(etas_params(), Window::unit(), TimeSpan::default());
        assert!(m.upper_bound(&Window::unit()).is_err());
    }

    #[test]
    fn etas_monotone_in_history() {
        let e = etas_params();
        let m = IntensityModel::etas(e, Window::unit(), TimeSpan::new(0.0, 10.0).unwrap());
        let mut hist = alloc::vec![Event::new(1.0, 0.2, 0.2, Some(3.5))];
        let p = Point::new(0.7, 0.1);
        let before = m.evaluate(5.0, p, &hist).unwrap();
        hist.push(Event::new(2.0, 0.9, 0.9, Some(3.0)));
        assert!(m.evaluate(5.0, p, &hist).unwrap() >= before);
    }
}
