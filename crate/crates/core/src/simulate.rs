//! Simulation of the builtin Poisson families (by thinning) and of ETAS
//! (by its branching construction).

use alloc::vec::Vec;
use core::f64::consts::{LN_10, PI};

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::catalog::{Catalog, Event, TimeSpan};
use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::intensity::kernel::{spatial_kernel_total, temporal_kernel_total};
use crate::intensity::{EtasParams, IntensityModel};

/// Gutenberg–Richter magnitudes: M0 plus an exponential excess with rate
/// b·ln 10, optionally truncated at `m_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnitudeLaw {
    pub b: f64,
    pub m0: f64,
    pub m_max: Option<f64>,
}

impl MagnitudeLaw {
    pub fn gutenberg_richter(m0: f64) -> Self {
        Self {
            b: 1.0,
            m0,
            m_max: None,
        }
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn truncated_at(mut self, m_max: f64) -> Self {
        self.m_max = Some(m_max);
        self
    }

    fn rate(&self) -> f64 {
        self.b * LN_10
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b",
                value: self.b,
            });
        }
        if let Some(m) = self.m_max {
            if !(m > self.m0 && m.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "m_max",
                    value: m,
                });
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let beta = self.rate();
        let u: f64 = rng.random();
        let mass = match self.m_max {
            Some(m) => 1.0 - (-beta * (m - self.m0)).exp(),
            None => 1.0,
        };
        self.m0 - (1.0 - u * mass).ln() / beta
    }

    /// E[exp(a (M - reference))]; infinite when the untruncated tail is too
    /// heavy for `a`.
    pub fn mean_productivity(&self, a: f64, reference: f64) -> f64 {
        let beta = self.rate();
        let shift = (a * (self.m0 - reference)).exp();
        let excess = match self.m_max {
            None if a >= beta => f64::INFINITY,
            None => beta / (beta - a),
            Some(m) => {
                let l = m - self.m0;
                let norm = 1.0 - (-beta * l).exp();
                if (beta - a).abs() < 1e-12 {
                    beta * l / norm
                } else {
                    beta / (beta - a) * (1.0 - (-(beta - a) * l).exp()) / norm
                }
            }
        };
        shift * excess
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| Error::InvalidParameter {
        name: "poisson_mean",
        value: mean,
    })?;
    Ok(dist.sample(rng) as u64)
}

/// A uniform point strictly inside the window.
fn uniform_point<R: Rng + ?Sized>(window: &Window, rng: &mut R) -> Point {
    loop {
        let x = window.xmin + window.width() * rng.random::<f64>();
        let y = window.ymin + window.height() * rng.random::<f64>();
        let p = Point::new(x, y);
        if window.contains_strict(p) {
            return p;
        }
    }
}

/// Samples the spatial Poisson process with the model's intensity on
/// `region` by thinning a homogeneous process at the rate's upper bound.
/// Event times are evenly spaced in [0, 1).
pub fn sample_poisson<R: Rng + ?Sized>(
    model: &IntensityModel,
    region: &Window,
    rng: &mut R,
) -> Result<Catalog> {
    model.validate()?;
    let bound = model.upper_bound(region)?;
    let window_area = model.window.area();
    let n = poisson_count(bound * region.area(), rng)?;
    let mut points = Vec::new();
    for _ in 0..n {
        let p = uniform_point(region, rng);
        let u: f64 = rng.random();
        if u * bound < model.kind.spatial_rate(p, window_area) {
            points.push(p);
        }
    }
    Ok(Catalog::from_points(&points, *region))
}

/// A pattern sampled on a buffered window, with the indices of the events
/// that fall inside the core window.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferedSample {
    pub catalog: Catalog,
    pub core: Window,
    pub core_indices: Vec<usize>,
}

impl BufferedSample {
    pub fn core_points(&self) -> Vec<Point> {
        self.core_indices
            .iter()
            .map(|&i| self.catalog.events[i].point())
            .collect()
    }
}

pub const DEFAULT_MARGIN: f64 = 0.25;

/// Samples on `core` expanded by `margin` on every side.
pub fn buffered_sample<R: Rng + ?Sized>(
    model: &IntensityModel,
    core: &Window,
    margin: f64,
    rng: &mut R,
) -> Result<BufferedSample> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "margin",
            value: margin,
        });
    }
    let region = core.expanded(margin);
    let catalog = sample_poisson(model, &region, rng)?;
    let core_indices = catalog
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| core.contains_strict(e.point()))
        .map(|(i, _)| i)
        .collect();
    Ok(BufferedSample {
        catalog,
        core: *core,
        core_indices,
    })
}

/// Expected number of direct offspring per event.
pub fn branching_ratio(params: &EtasParams, law: &MagnitudeLaw) -> f64 {
    params.k
        * temporal_kernel_total(params.c, params.p)
        * spatial_kernel_total(params.d, params.q)
        * law.mean_productivity(params.a, params.m0)
}

/// An ETAS realisation together with its family tree.
#[derive(Debug, Clone, PartialEq)]
pub struct EtasSample {
    pub catalog: Catalog,
    /// Index of each event's parent in `catalog.events`; `None` for
    /// background events and seeded ancestors.
    pub parents: Vec<Option<usize>>,
}

impl EtasSample {
    pub fn background_count(&self) -> usize {
        self.parents.iter().filter(|p| p.is_none()).count()
    }
}

/// Simulates ETAS on `window` × `span`. Offspring landing outside either
/// are discarded and do not reproduce.
pub fn sample_etas<R: Rng + ?Sized>(
    params: &EtasParams,
    window: &Window,
    span: &TimeSpan,
    law: &MagnitudeLaw,
    rng: &mut R,
) -> Result<EtasSample> {
    sample_etas_with_ancestors(params, window, span, law, &[], rng)
}

/// As [`sample_etas`], with extra generation-zero events that are kept in
/// the output and reproduce like background events.
pub fn sample_etas_with_ancestors<R: Rng + ?Sized>(
    params: &EtasParams,
    window: &Window,
    span: &TimeSpan,
    law: &MagnitudeLaw,
    ancestors: &[Event],
    rng: &mut R,
) -> Result<EtasSample> {
    params.validate()?;
    law.validate()?;
    let ratio = branching_ratio(params, law);
    if !(ratio < 1.0) {
        return Err(Error::Supercritical {
            branching_ratio: ratio,
        });
    }

    let mut events: Vec<Event> = ancestors.to_vec();
    let mut parents: Vec<Option<usize>> = alloc::vec![None; events.len()];
    let n_background = poisson_count(params.mu * span.length(), rng)?;
    for _ in 0..n_background {
        let t = span.start + span.length() * rng.random::<f64>();
        let p = uniform_point(window, rng);
        events.push(Event::new(t, p.x, p.y, Some(law.sample(rng))));
        parents.push(None);
    }

    let cluster_scale = params.k
        * temporal_kernel_total(params.c, params.p)
        * spatial_kernel_total(params.d, params.q);
    let time_exp = 1.0 / (1.0 - params.p);
    let space_exp = 1.0 / (1.0 - params.q);
    let mut next = 0;
    while next < events.len() {
        let parent = events[next];
        let n_children = poisson_count(cluster_scale * params.productivity(parent.mag), rng)?;
        for _ in 0..n_children {
            let u: f64 = rng.random();
            let dt = params.c * ((1.0 - u).powf(time_exp) - 1.0);
            let u: f64 = rng.random();
            let r = (params.d * ((1.0 - u).powf(space_exp) - 1.0)).sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            let mag = law.sample(rng);
            let t = parent.t + dt;
            let p = Point::new(parent.x + r * theta.cos(), parent.y + r * theta.sin());
            if t < span.end && window.contains_strict(p) {
                events.push(Event::new(t, p.x, p.y, Some(mag)));
                parents.push(Some(next));
            }
        }
        next += 1;
    }

    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by(|&i, &j| events[i].t.total_cmp(&events[j].t).then(i.cmp(&j)));
    let mut rank = alloc::vec![0; events.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let mut catalog = Catalog::new(*window, *span);
    catalog.mag_cutoff = Some(params.m0);
    catalog.events = order.iter().map(|&i| events[i]).collect();
    let parents = order.iter().map(|&i| parents[i].map(|p| rank[p])).collect();
    catalog.sort_and_resolve_ties();
    Ok(EtasSample { catalog, parents })
}
