//! Nelder–Mead simplex minimisation with dimension-adaptive coefficients.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Converged once the spread of function values across the simplex is
    /// below this.
    pub f_tol: f64,
    /// ...and every vertex is within `x_tol · max(1, |best|)` of the best.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-6,
            x_tol: 1e-8,
            max_evals: 5000,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best vertex and value after each iteration.
    pub trace: Vec<(Vec<f64>, f64)>,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(&a, &b)| a + t * (b - a)).collect()
}

/// Minimises `f` starting from a simplex around `x0`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    let nf = n.max(1) as f64;
    let reflect = 1.0;
    let expand = 1.0 + 2.0 / nf;
    let contract = 0.75 - 0.5 / nf;
    let shrink = 1.0 - 1.0 / nf;

    let mut f = Counted { f, evals: 0 };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = f.call(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = f.call(&x);
        simplex.push((x, v));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(simplex[0].clone());
        let best = &simplex[0];
        let worst_f = simplex[n].1;
        let f_spread = worst_f - best.1;
        let scale = best.0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread.is_finite() && f_spread <= opts.f_tol && x_spread <= opts.x_tol * scale {
            converged = true;
            break;
        }
        if f.evals >= opts.max_evals {
            break;
        }
        iterations += 1;

        let mut centroid = alloc::vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let worst = simplex[n].0.clone();
        let xr = affine(&centroid, &worst, -reflect);
        let fr = f.call(&xr);
        if fr < simplex[0].1 {
            let xe = affine(&centroid, &worst, -reflect * expand);
            let fe = f.call(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst_f {
            let xc = affine(&centroid, &xr, contract);
            let fc = f.call(&xc);
            (xc, fc)
        } else {
            let xc = affine(&centroid, &worst, contract);
            let fc = f.call(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst_f) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = affine(&best, &vertex.0, shrink);
            let v = f.call(&x);
            *vertex = (x, v);
        }
    }

    let (x, fbest) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f: fbest,
        evals: f.evals,
        iterations,
        converged,
        trace,
    }
}
