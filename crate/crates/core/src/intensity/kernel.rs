//! Integrals of the ETAS triggering kernel.
//!
//! The spatial factor (r² + d)^(-q) is integrated over a polygon by polar
//! decomposition about the kernel centre: each edge subtends an angular
//! range over which the radial integral has a closed form, leaving a smooth
//! one-dimensional angular integral done by adaptive Gauss–Kronrod.

use core::f64::consts::PI;
use num_traits::Float;

use crate::geometry::{shoelace_area, Point};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: (K15 estimate, |K15 - G7|).
pub(crate) fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive bisection on top of [`gk15`] until the panel error is below
/// `tol`. Returns (value, error estimate).
pub(crate) fn integrate_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let (v, e) = gk15(f, a, b);
    adapt(f, a, b, v, e, tol, depth)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, v: f64, e: f64, tol: f64, depth: u32) -> (f64, f64) {
    if e <= tol || depth == 0 {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let (vl, el) = gk15(f, a, m);
    let (vr, er) = gk15(f, m, b);
    let (l, le) = adapt(f, a, m, vl, el, 0.5 * tol, depth - 1);
    let (r, re) = adapt(f, m, b, vr, er, 0.5 * tol, depth - 1);
    (l + r, le + re)
}

struct EdgeView {
    sign: f64,
    h_sq: f64,
    phi_a: f64,
    phi_b: f64,
}

fn edge_views(center: Point, vertices: &[Point]) -> impl Iterator<Item = EdgeView> + '_ {
    let n = vertices.len();
    (0..n).filter_map(move |i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e = b - a;
        let len = libm::hypot(e.x, e.y);
        if len == 0.0 {
            return None;
        }
        let t = e * (1.0 / len);
        let u = a - center;
        let h = u.cross(t);
        let s_a = u.dot(t);
        let s_b = s_a + len;
        if h.abs() <= 1e-15 * (len + s_a.abs()) {
            return None;
        }
        let ah = h.abs();
        Some(EdgeView {
            sign: h.signum(),
            h_sq: h * h,
            phi_a: (s_a / ah).atan(),
            phi_b: (s_b / ah).atan(),
        })
    })
}

/// ∫ over a counterclockwise polygon of (|p - center|² + d)^(-q) dA, for
/// d > 0 and q > 1, to relative accuracy about `rel_tol`.
pub fn spatial_kernel_mass(center: Point, vertices: &[Point], d: f64, q: f64, rel_tol: f64) -> f64 {
    let e = 1.0 - q;
    let g = |h_sq: f64| move |phi: f64| {
        let c = phi.cos();
        (h_sq / (c * c) + d).powf(e)
    };

    // Coarse pass: one panel per edge, used to size the error budget.
    let mut winding_angle = 0.0;
    let mut coarse = 0.0;
    let mut coarse_err = 0.0;
    for v in edge_views(center, vertices) {
        let (val, err) = gk15(&g(v.h_sq), v.phi_a, v.phi_b);
        coarse += v.sign * val;
        coarse_err += err;
        winding_angle += v.sign * (v.phi_b - v.phi_a);
    }
    // Subtended angle: 2π inside, 0 outside, the interior angle on the boundary.
    let angle = if winding_angle.abs() < 1e-9 {
        0.0
    } else if (winding_angle - 2.0 * PI).abs() < 1e-9 {
        2.0 * PI
    } else {
        winding_angle
    };
    let full = angle * d.powf(e);
    let norm = 2.0 * (q - 1.0);

    let estimate = (full - coarse) / norm;
    // Floor the budget with a far-field bound so zero-ish masses terminate.
    let far = shoelace_area(vertices).abs() * (max_dist_sq(center, vertices) + d).powf(-q);
    let target = rel_tol * estimate.abs().max(far) * norm;
    if coarse_err <= target {
        return estimate.max(0.0);
    }

    let n_edges = vertices.len().max(1) as f64;
    let mut edge_sum = 0.0;
    for v in edge_views(center, vertices) {
        let (val, _) = integrate_1d(&g(v.h_sq), v.phi_a, v.phi_b, target / n_edges, 30);
        edge_sum += v.sign * val;
    }
    ((full - edge_sum) / norm).max(0.0)
}

fn max_dist_sq(center: Point, vertices: &[Point]) -> f64 {
    vertices
        .iter()
        .map(|v| center.dist_sq(*v))
        .fold(0.0, f64::max)
}

/// ∫ over the whole plane of (r² + d)^(-q) dA.
pub fn spatial_kernel_total(d: f64, q: f64) -> f64 {
    PI * d.powf(1.0 - q) / (q - 1.0)
}

/// ∫ over [lo, hi] ∩ (t_j, ∞) of (t - t_j + c)^(-p) dt, for p > 1.
pub fn temporal_kernel_mass(t_j: f64, lo: f64, hi: f64, c: f64, p: f64) -> f64 {
    let start = lo.max(t_j);
    if hi <= start {
        return 0.0;
    }
    let e = 1.0 - p;
    ((start - t_j + c).powf(e) - (hi - t_j + c).powf(e)) / (p - 1.0)
}

/// ∫ over [0, ∞) of (t + c)^(-p) dt.
pub fn temporal_kernel_total(c: f64, p: f64) -> f64 {
    c.powf(1.0 - p) / (p - 1.0)
}
