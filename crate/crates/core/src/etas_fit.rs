//! Maximum likelihood fitting of ETAS with a uniform background.
//!
//! The log-likelihood is
//! `Σ_i log λ(t_i, x_i, y_i) − μ T − Σ_j K e^{a(M_j − M0)} τ_j σ_j`,
//! where τ_j is the closed-form time mass of event j's kernel inside the
//! span and σ_j its spatial mass inside the window. It is maximised by
//! multi-start Nelder–Mead over transformed parameters that map the box
//! constraints onto the real line.

use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng as _;

use crate::catalog::{Catalog, TimeSpan};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::geometry::{Point, Window};
use crate::intensity::kernel::{spatial_kernel_mass, temporal_kernel_mass};
use crate::intensity::EtasParams;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::seed::SeedStream;

const SPATIAL_REL_TOL: f64 = 1e-6;

/// Box constraints for the bounded parameters; μ and K only need to be
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitBounds {
    pub c: (f64, f64),
    pub p: (f64, f64),
    pub a: (f64, f64),
    pub d: (f64, f64),
    pub q: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        Self {
            c: (1e-6, 10.0),
            p: (1.001, 3.0),
            a: (0.01, 5.0),
            d: (1e-6, 10.0),
            q: (1.001, 3.0),
        }
    }
}

fn logit(u: f64) -> f64 {
    (u / (1.0 - u)).ln()
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn to_unit(v: f64, (lo, hi): (f64, f64)) -> f64 {
    ((v - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12)
}

impl FitBounds {
    pub fn contains(&self, p: &EtasParams) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v > lo && v < hi;
        p.mu > 0.0
            && p.k > 0.0
            && inside(p.c, self.c)
            && inside(p.p, self.p)
            && inside(p.a, self.a)
            && inside(p.d, self.d)
            && inside(p.q, self.q)
    }

    /// Parameters to unconstrained coordinates, in
    /// [`EtasParams::FREE_NAMES`] order. Scale parameters c and d are
    /// mapped on a log scale before the logit.
    pub fn to_free(&self, p: &EtasParams) -> [f64; 7] {
        let log_box = |v: f64, (lo, hi): (f64, f64)| {
            logit(to_unit(v.ln(), (lo.ln(), hi.ln())))
        };
        let lin_box = |v: f64, b: (f64, f64)| logit(to_unit(v, b));
        [
            p.mu.max(1e-300).ln(),
            p.k.max(1e-300).ln(),
            log_box(p.c, self.c),
            lin_box(p.p, self.p),
            lin_box(p.a, self.a),
            log_box(p.d, self.d),
            lin_box(p.q, self.q),
        ]
    }

    pub fn from_free(&self, z: &[f64], m0: f64) -> EtasParams {
        let log_box = |z: f64, (lo, hi): (f64, f64)| {
            let (l, h) = (lo.ln(), hi.ln());
            (l + (h - l) * logistic(z)).exp()
        };
        let lin_box = |z: f64, (lo, hi): (f64, f64)| lo + (hi - lo) * logistic(z);
        EtasParams {
            mu: z[0].exp(),
            k: z[1].exp(),
            c: log_box(z[2], self.c),
            p: lin_box(z[3], self.p),
            a: lin_box(z[4], self.a),
            d: log_box(z[5], self.d),
            q: lin_box(z[6], self.q),
            m0,
        }
    }
}

/// A catalog laid out for repeated likelihood evaluation.
#[derive(Debug, Clone)]
pub struct EtasLikelihood {
    t: Vec<f64>,
    pos: Vec<Point>,
    mag: Vec<Option<f64>>,
    window: Window,
    span: TimeSpan,
}

impl EtasLikelihood {
    /// The catalog must be time-ordered with every event inside its window
    /// and span.
    pub fn new(catalog: &Catalog) -> Result<Self> {
        for (index, e) in catalog.events.iter().enumerate() {
            if !catalog.window.contains(e.point()) {
                return Err(Error::PointOutsideWindow {
                    index,
                    x: e.x,
                    y: e.y,
                });
            }
            if !catalog.time_span.contains(e.t) {
                return Err(Error::ValueOutOfRange { index, value: e.t });
            }
            if index > 0 && e.t < catalog.events[index - 1].t {
                return Err(Error::ValueOutOfRange { index, value: e.t });
            }
        }
        Ok(Self {
            t: catalog.events.iter().map(|e| e.t).collect(),
            pos: catalog.events.iter().map(|e| e.point()).collect(),
            mag: catalog.events.iter().map(|e| e.mag).collect(),
            window: catalog.window,
            span: catalog.time_span,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Expected number of events in the window over the span given the
    /// catalog as history.
    pub fn expected_count(&self, params: &EtasParams) -> f64 {
        let corners = self.window.corners();
        let triggered: f64 = (0..self.len())
            .map(|j| {
                if params.k == 0.0 {
                    return 0.0;
                }
                let tm = temporal_kernel_mass(self.t[j], self.span.start, self.span.end, params.c, params.p);
                if tm == 0.0 {
                    return 0.0;
                }
                let sm = spatial_kernel_mass(self.pos[j], &corners, params.d, params.q, SPATIAL_REL_TOL);
                params.k * params.productivity(self.mag[j]) * tm * sm
            })
            .sum();
        params.mu * self.span.length() + triggered
    }

    pub fn log_likelihood(&self, params: &EtasParams) -> Result<f64> {
        params.validate()?;
        let background = params.mu / self.window.area();
        let log_k = params.k.ln();
        let log_prod: Vec<f64> = self
            .mag
            .iter()
            .map(|m| m.map_or(0.0, |m| params.a * (m - params.m0)))
            .collect();
        let mut sum_log = 0.0;
        for i in 0..self.len() {
            let (ti, pi) = (self.t[i], self.pos[i]);
            let mut rate = background;
            if params.k > 0.0 {
                for j in 0..i {
                    let dt = ti - self.t[j];
                    if dt <= 0.0 {
                        continue;
                    }
                    let r2 = pi.dist_sq(self.pos[j]);
                    rate += (log_k + log_prod[j]
                        - params.p * (dt + params.c).ln()
                        - params.q * (r2 + params.d).ln())
                    .exp();
                }
            }
            if !(rate > 0.0) {
                return Err(Error::NonPositiveIntensity { index: i });
            }
            sum_log += rate.ln();
        }
        Ok(sum_log - self.expected_count(params))
    }
}

/// Convenience wrapper around [`EtasLikelihood`].
pub fn log_likelihood(params: &EtasParams, catalog: &Catalog) -> Result<f64> {
    EtasLikelihood::new(catalog)?.log_likelihood(params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub bounds: FitBounds,
    /// Number of simplex runs; the first starts at the initial guess, the
    /// rest at seeded jitters of it.
    pub starts: usize,
    /// Half-width of the uniform jitter in transformed coordinates.
    pub jitter: f64,
    pub nelder_mead: NelderMeadOptions,
    /// Fresh-simplex restarts from each run's best point.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bounds: FitBounds::default(),
            starts: 8,
            jitter: 1.0,
            nelder_mead: NelderMeadOptions {
                initial_step: 0.5,
                ..NelderMeadOptions::default()
            },
            restarts: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: EtasParams,
    pub loglik: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// False only when every start stopped at the evaluation cap.
    pub converged: bool,
    /// Best parameters and log-likelihood after each iteration of the
    /// winning start.
    pub trace: Vec<(EtasParams, f64)>,
    /// Final log-likelihood of every start, in start order.
    pub start_logliks: Vec<f64>,
}

struct StartOutcome {
    z: Vec<f64>,
    loglik: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    trace: Vec<(Vec<f64>, f64)>,
}

fn run_start(lik: &EtasLikelihood, z0: Vec<f64>, m0: f64, opts: &FitOptions) -> StartOutcome {
    let objective = |z: &[f64]| {
        let p = opts.bounds.from_free(z, m0);
        match lik.log_likelihood(&p) {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    };
    let mut z = z0;
    let mut outcome = StartOutcome {
        z: Vec::new(),
        loglik: f64::NEG_INFINITY,
        iterations: 0,
        evaluations: 0,
        converged: false,
        trace: Vec::new(),
    };
    for round in 0..=opts.restarts {
        let r = nelder_mead(objective, &z, &opts.nelder_mead);
        outcome.iterations += r.iterations;
        outcome.evaluations += r.evals;
        outcome.converged = r.converged;
        outcome
            .trace
            .extend(r.trace.into_iter().map(|(x, f)| (x, -f)));
        let improved = -r.f - outcome.loglik;
        z = r.x;
        outcome.loglik = -r.f;
        outcome.z = z.clone();
        if round > 0 && improved.abs() <= opts.nelder_mead.f_tol {
            break;
        }
    }
    outcome
}

/// Fits ETAS by maximum likelihood. `init.m0` is kept fixed.
pub fn fit_mle(catalog: &Catalog, init: &EtasParams, opts: &FitOptions) -> Result<FitResult> {
    fit_mle_with(catalog, init, opts, &Sequential)
}

/// [`fit_mle`] with the starts distributed over an executor.
pub fn fit_mle_with<E: Executor>(
    catalog: &Catalog,
    init: &EtasParams,
    opts: &FitOptions,
    exec: &E,
) -> Result<FitResult> {
    init.validate()?;
    if !opts.bounds.contains(init) {
        return Err(Error::InvalidParameter {
            name: "init",
            value: f64::NAN,
        });
    }
    let lik = EtasLikelihood::new(catalog)?;
    let z_init = opts.bounds.to_free(init);
    let root = SeedStream::new(opts.seed);
    let starts = opts.starts.max(1);
    let outcomes = exec.map_indexed(starts, |s| {
        let z0: Vec<f64> = if s == 0 {
            z_init.to_vec()
        } else {
            let mut rng = root.named("start", s as u64).rng();
            z_init
                .iter()
                .map(|&z| z + opts.jitter * (2.0 * rng.random::<f64>() - 1.0))
                .collect()
        };
        run_start(&lik, z0, init.m0, opts)
    });
    let start_logliks: Vec<f64> = outcomes.iter().map(|o| o.loglik).collect();
    let converged = outcomes.iter().any(|o| o.converged);
    let best = outcomes
        .into_iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.loglik.total_cmp(&b.loglik).then(j.cmp(i)))
        .map(|(_, o)| o)
        .ok_or(Error::EmptySample)?;
    if !best.loglik.is_finite() {
        return Err(Error::NonPositiveIntensity { index: 0 });
    }
    let params = opts.bounds.from_free(&best.z, init.m0);
    Ok(FitResult {
        params,
        loglik: best.loglik,
        iterations: best.iterations,
        evaluations: best.evaluations,
        converged,
        trace: best
            .trace
            .iter()
            .map(|(z, l)| (opts.bounds.from_free(z, init.m0), *l))
            .collect(),
        start_logliks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Event;
    use crate::geometry::PixelGrid;
    use crate::intensity::IntensityModel;
    use crate::simulate::{sample_etas, MagnitudeLaw};
    use approx::assert_relative_eq;

    fn truth() -> EtasParams {
        EtasParams {
            mu: 0.5,
            k: 1.4e-5,
            c: 0.01,
            p: 1.2,
            a: 1.5,
            m0: 3.0,
            d: 0.001,
            q: 1.8,
        }
    }

    fn hector_window() -> Window {
        Window::new(-117.0, -116.0, 34.0, 35.0).unwrap()
    }

    fn simulated(seed: u64, params: &EtasParams, days: f64) -> Catalog {
        sample_etas(
            params,
            &hector_window(),
            &TimeSpan::new(0.0, days).unwrap(),
            &MagnitudeLaw::gutenberg_richter(3.0),
            &mut SeedStream::new(seed).rng(),
        )
        .unwrap()
        .catalog
    }

    #[test]
    fn empty_catalog_is_background_mass() {
        let c = Catalog::new(Window::unit(), TimeSpan::new(2.0, 12.0).unwrap());
        let ll = log_likelihood(&truth(), &c).unwrap();
        assert_relative_eq!(ll, -5.0, max_relative = 1e-14);
    }

    #[test]
    fn no_triggering_reduces_to_poisson() {
        let mut c = Catalog::new(Window::unit(), TimeSpan::new(0.0, 10.0).unwrap());
        for i in 0..7 {
            c.events.push(Event::new(i as f64 + 0.5, 0.1 * i as f64 + 0.05, 0.5, Some(3.2)));
        }
        let params = EtasParams { k: 0.0, mu: 0.8, ..truth() };
        let ll = log_likelihood(&params, &c).unwrap();
        assert_relative_eq!(ll, 7.0 * 0.8f64.ln() - 8.0, max_relative = 1e-13);
    }

    #[test]
    fn transforms_round_trip() {
        let b = FitBounds::default();
        let p = truth();
        let back = b.from_free(&b.to_free(&p), p.m0);
        for (x, y) in back.free_values().iter().zip(p.free_values()) {
            assert_relative_eq!(*x, y, max_relative = 1e-9);
        }
    }

    #[test]
    fn generating_params_beat_perturbations() {
        let c = simulated(1, &truth(), 434.0);
        let lik = EtasLikelihood::new(&c).unwrap();
        let base = lik.log_likelihood(&truth()).unwrap();
        let mut rng = SeedStream::new(2).rng();
        let mut wins = 0;
        for _ in 0..20 {
            let v: Vec<f64> = truth()
                .free_values()
                .iter()
                .map(|&x| x * if rng.random::<bool>() { 1.25 } else { 0.75 })
                .collect();
            let mut p = truth().with_free_values(&v);
            p.p = p.p.max(1.01);
            p.q = p.q.max(1.01);
            if base > lik.log_likelihood(&p).unwrap() {
                wins += 1;
            }
        }
        assert!(wins >= 18, "wins {wins}");
    }

    #[test]
    fn time_shift_invariance() {
        let c = simulated(3, &truth(), 100.0);
        let mut shifted = c.clone();
        shifted.time_span = TimeSpan::new(1000.0, 1100.0).unwrap();
        for e in &mut shifted.events {
            e.t += 1000.0;
        }
        let a = log_likelihood(&truth(), &c).unwrap();
        let b = log_likelihood(&truth(), &shifted).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn compensator_matches_pixel_integrals() {
        let c = simulated(4, &truth(), 200.0);
        let lik = EtasLikelihood::new(&c).unwrap();
        let model = IntensityModel::etas(truth(), c.window, c.time_span);
        let grid = PixelGrid::square(c.window, 16).unwrap();
        let pixels: f64 = model
            .integrate_pixels(&grid, &c.events)
            .unwrap()
            .iter()
            .map(|i| i.value)
            .sum();
        assert_relative_eq!(pixels, lik.expected_count(&truth()), max_relative = 1e-3);
    }

    #[test]
    fn background_only_catalog_fit_dominates_poisson() {
        // With K = 0 the nested Poisson model is the truth. The fit must do
        // at least as well as its MLE μ = n/T, account for every event, and
        // improve on it by no more than chance allows for the extra
        // parameters.
        let params = EtasParams { k: 0.0, mu: 0.8, ..truth() };
        let c = simulated(5, &params, 300.0);
        let n = c.len() as f64;
        let poisson = EtasParams { mu: n / 300.0, k: 1e-12, ..truth() };
        let poisson_ll = log_likelihood(&poisson, &c).unwrap();
        let init = EtasParams { k: 1e-6, ..truth() };
        let opts = FitOptions {
            starts: 2,
            ..FitOptions::default()
        };
        let fit = fit_mle(&c, &init, &opts).unwrap();
        assert!(fit.loglik >= poisson_ll - 1e-6);
        assert!(2.0 * (fit.loglik - poisson_ll) < 15.0, "{fit:?}");
        let lik = EtasLikelihood::new(&c).unwrap();
        assert_relative_eq!(lik.expected_count(&fit.params), n, max_relative = 1e-3);
        for w in fit.trace.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-9 || w[1].0 != w[0].0);
        }
    }

    #[test]
    fn fit_recovers_and_is_idempotent() {
        let c = simulated(6, &truth(), 434.0);
        let opts = FitOptions {
            starts: 2,
            ..FitOptions::default()
        };
        let fit = fit_mle(&c, &truth(), &opts).unwrap();
        assert!(fit.loglik >= log_likelihood(&truth(), &c).unwrap());
        assert!(fit.trace.iter().all(|(_, l)| *l <= fit.loglik));
        let again = fit_mle(&c, &fit.params, &FitOptions { starts: 1, ..opts }).unwrap();
        assert!((again.loglik - fit.loglik).abs() < 1e-4);
        for (a, b) in again.params.free_values().iter().zip(fit.params.free_values()) {
            assert!((a / b - 1.0).abs() < 1e-2, "{:?} vs {:?}", again.params, fit.params);
        }
    }
}
