//! Error-controlled cubature over convex polygons.
//!
//! Polygons are fan-triangulated; each triangle is integrated with a
//! degree-2 (3-point) and a degree-5 (7-point Dunavant) rule, and the
//! disagreement drives dyadic refinement.

use alloc::vec::Vec;

use crate::geometry::{shoelace_area, triangulate_polygon, Point, Triangle};

/// Result of a numeric integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// False when the error target was not met at the maximum depth.
    pub converged: bool,
}

impl Integral {
    pub const fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            converged: true,
        }
    }

    pub fn zero() -> Self {
        Self::exact(0.0)
    }

    pub fn combine(self, other: Integral) -> Self {
        Self {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Self {
            value: self.value * s,
            error: self.error * s.abs(),
            converged: self.converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub min_depth: u32,
}

impl QuadratureOptions {
    pub const fn builtin() -> Self {
        Self {
            rel_tol: 1e-4,
            abs_tol: 1e-14,
            max_depth: 12,
            min_depth: 1,
        }
    }

    pub const fn etas() -> Self {
        Self {
            rel_tol: 1e-3,
            ..Self::builtin()
        }
    }

    pub const fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self::builtin()
    }
}

const LOW: [(f64, f64, f64); 3] = [
    (1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
    (2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
    (1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
];

const A1: f64 = 0.059_715_871_789_769_82;
const B1: f64 = 0.470_142_064_105_115_09;
const W1: f64 = 0.132_394_152_788_506_18;
const A2: f64 = 0.797_426_985_353_087_3;
const B2: f64 = 0.101_286_507_323_456_34;
const W2: f64 = 0.125_939_180_544_827_15;

const HIGH: [(f64, f64, f64); 7] = [
    (1.0 / 3.0, 1.0 / 3.0, 0.225),
    (A1, B1, W1),
    (B1, A1, W1),
    (B1, B1, W1),
    (A2, B2, W2),
    (B2, A2, W2),
    (B2, B2, W2),
];

fn apply_rule<F: Fn(Point) -> f64>(f: &F, t: &Triangle, rule: &[(f64, f64, f64)]) -> f64 {
    let area = t.area();
    rule.iter().map(|&(u, v, w)| w * f(t.map(u, v))).sum::<f64>() * area
}

fn estimate<F: Fn(Point) -> f64>(f: &F, t: &Triangle) -> (f64, f64) {
    let hi = apply_rule(f, t, &HIGH);
    let lo = apply_rule(f, t, &LOW);
    (hi, (hi - lo).abs())
}

fn refine<F: Fn(Point) -> f64>(
    f: &F,
    t: &Triangle,
    estimate_hi: f64,
    err: f64,
    tol: f64,
    depth: u32,
    opts: &QuadratureOptions,
) -> Integral {
    if depth >= opts.min_depth && err <= tol {
        return Integral {
            value: estimate_hi,
            error: err,
            converged: true,
        };
    }
    if depth >= opts.max_depth {
        return Integral {
            value: estimate_hi,
            error: err,
            converged: false,
        };
    }
    t.subdivide()
        .iter()
        .map(|child| {
            let (hi, e) = estimate(f, child);
            refine(f, child, hi, e, 0.25 * tol, depth + 1, opts)
        })
        .fold(Integral::zero(), Integral::combine)
}

/// Integrates `f` over a convex counterclockwise polygon.
pub fn integrate_polygon<F: Fn(Point) -> f64>(
    f: &F,
    vertices: &[Point],
    opts: &QuadratureOptions,
) -> Integral {
    let Ok(triangles) = triangulate_polygon(vertices) else {
        return Integral::zero();
    };
    let total_area = shoelace_area(vertices);
    let first: Vec<(f64, f64)> = triangles.iter().map(|t| estimate(f, t)).collect();
    let coarse: f64 = first.iter().map(|e| e.0).sum();
    let budget = (opts.rel_tol * coarse.abs()).max(opts.abs_tol * total_area);
    triangles
        .iter()
        .zip(&first)
        .map(|(t, &(hi, err))| refine(f, t, hi, err, budget * t.area() / total_area, 0, opts))
        .fold(Integral::zero(), Integral::combine)
}

/// Splits a convex polygon along the given vertical and horizontal lines.
pub(crate) fn split_polygon(vertices: &[Point], xs: &[f64], ys: &[f64]) -> Vec<Vec<Point>> {
    let mut pieces = alloc::vec![vertices.to_vec()];
    for (&cut, vertical) in xs.iter().map(|x| (x, true)).chain(ys.iter().map(|y| (y, false))) {
        let mut next = Vec::with_capacity(pieces.len() + 1);
        for piece in pieces {
            let coord = |p: &Point| if vertical { p.x } else { p.y };
            let lo = piece.iter().map(coord).fold(f64::INFINITY, f64::min);
            let hi = piece.iter().map(coord).fold(f64::NEG_INFINITY, f64::max);
            if cut <= lo || cut >= hi {
                next.push(piece);
                continue;
            }
            let normal = if vertical {
                Point::new(1.0, 0.0)
            } else {
                Point::new(0.0, 1.0)
            };
            let anchor = if vertical {
                Point::new(cut, 0.0)
            } else {
                Point::new(0.0, cut)
            };
            let mut below = Vec::new();
            let mut above = Vec::new();
            clip(&piece, normal, anchor, &mut below);
            clip(&piece, normal * -1.0, anchor, &mut above);
            for part in [below, above] {
                if part.len() >= 3 && shoelace_area(&part) > 0.0 {
                    next.push(part);
                }
            }
        }
        pieces = next;
    }
    pieces
}

/// Keeps the part of a convex polygon where `normal · (p - anchor) <= 0`.
pub(crate) fn clip(poly: &[Point], normal: Point, anchor: Point, out: &mut Vec<Point>) {
    out.clear();
    let n = poly.len();
    if n == 0 {
        return;
    }
    let side = |p: Point| normal.dot(p - anchor);
    let mut a = poly[n - 1];
    let mut sa = side(a);
    for &b in poly {
        let sb = side(b);
        if sa <= 0.0 {
            if sb <= 0.0 {
                out.push(b);
            } else {
                out.push(a + (b - a) * (sa / (sa - sb)));
            }
        } else if sb <= 0.0 {
            out.push(a + (b - a) * (sa / (sa - sb)));
            out.push(b);
        }
        a = b;
        sa = sb;
    }
    out.dedup_by(|b, a| a == b);
    while out.len() > 1 && out[0] == out[out.len() - 1] {
        out.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use approx::assert_relative_eq;

    #[test]
    fn high_rule_is_exact_for_quintics() {
        let t = Triangle([Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]);
        // ∫ x^a y^b over the reference triangle = a! b! / (a + b + 2)!
        let f = |p: Point| libm::pow(p.x, 3.0) * libm::pow(p.y, 2.0);
        assert_relative_eq!(apply_rule(&f, &t, &HIGH), 6.0 * 2.0 / 5040.0, max_relative = 1e-13);
    }

    #[test]
    fn smooth_integrand_over_square() {
        let sq = Window::unit().corners();
        let f = |p: Point| libm::exp(p.x) * libm::sin(p.y);
        let r = integrate_polygon(&f, &sq, &QuadratureOptions::builtin().with_rel_tol(1e-10));
        let exact = (core::f64::consts::E - 1.0) * (1.0 - libm::cos(1.0));
        assert!(r.converged);
        assert_relative_eq!(r.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn kinked_integrand_converges() {
        let sq = Window::symmetric_unit().corners();
        let f = |p: Point| p.y.abs();
        let r = integrate_polygon(&f, &sq, &QuadratureOptions::builtin());
        assert!(r.converged);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-4);
    }

    #[test]
    fn split_preserves_area() {
        let sq = Window::symmetric_unit().corners();
        let pieces = split_polygon(&sq, &[-0.5, 0.0, 3.0], &[0.25]);
        assert_eq!(pieces.len(), 6);
        let total: f64 = pieces.iter().map(|p| shoelace_area(p)).sum();
        assert_relative_eq!(total, 4.0, max_relative = 1e-14);
    }
}
