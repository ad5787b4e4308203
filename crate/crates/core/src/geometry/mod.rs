//! Planar geometry: windows, convex cells, pixel grids and Voronoi
//! tessellations clipped to a rectangular window.
//!
//! Geographic coordinates are treated as planar.

mod voronoi;

pub use voronoi::{tessellate, VoronoiDiagram};

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let all_finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !all_finite || xmin >= xmax || ymin >= ymax {
            return Err(Error::InvalidWindow {
                xmin,
                xmax,
                ymin,
                ymax,
            });
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
        })
    }

    /// The unit square [0, 1]².
    pub const fn unit() -> Self {
        Self {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    /// The square [-1, 1]².
    pub const fn symmetric_unit() -> Self {
        Self {
            xmin: -1.0,
            xmax: 1.0,
            ymin: -1.0,
            ymax: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Length of the diagonal; used to scale geometric tolerances.
    pub fn scale(&self) -> f64 {
        libm::hypot(self.width(), self.height())
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn contains_strict(&self, p: Point) -> bool {
        p.x > self.xmin && p.x < self.xmax && p.y > self.ymin && p.y < self.ymax
    }

    /// The window grown by `margin` on every side.
    pub fn expanded(&self, margin: f64) -> Self {
        Self {
            xmin: self.xmin - margin,
            xmax: self.xmax + margin,
            ymin: self.ymin - margin,
            ymax: self.ymax + margin,
        }
    }

    /// Corners in counterclockwise order starting at (xmin, ymin).
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmax, self.ymax),
            Point::new(self.xmin, self.ymax),
        ]
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.xmin + self.xmax),
            0.5 * (self.ymin + self.ymax),
        )
    }
}

/// Signed shoelace area; positive for counterclockwise vertices.
pub fn shoelace_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let origin = vertices[0];
    let mut twice = 0.0;
    for i in 1..n - 1 {
        twice += (vertices[i] - origin).cross(vertices[i + 1] - origin);
    }
    0.5 * twice
}

/// One Voronoi cell: a convex polygon owned by its generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCell {
    pub generator: Point,
    /// Counterclockwise vertices.
    pub vertices: Vec<Point>,
    pub area: f64,
    pub touches_boundary: bool,
}

impl ConvexCell {
    /// Builds a cell from counterclockwise vertices, computing its area.
    pub fn from_vertices(generator: Point, vertices: Vec<Point>, touches_boundary: bool) -> Self {
        let area = shoelace_area(&vertices);
        Self {
            generator,
            vertices,
            area,
            touches_boundary,
        }
    }

    /// The whole window as a single cell.
    pub fn from_window(window: &Window) -> Self {
        Self::from_vertices(window.center(), window.corners().to_vec(), true)
    }

    pub fn centroid(&self) -> Point {
        let origin = self.vertices[0];
        let mut acc = Point::default();
        let mut total = 0.0;
        for i in 1..self.vertices.len() - 1 {
            let a = (self.vertices[i] - origin).cross(self.vertices[i + 1] - origin);
            acc = acc + (origin + self.vertices[i] + self.vertices[i + 1]) * a;
            total += a;
        }
        acc * (1.0 / (3.0 * total))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle(pub [Point; 3]);

impl Triangle {
    pub fn area(&self) -> f64 {
        let [a, b, c] = self.0;
        0.5 * (b - a).cross(c - a)
    }

    /// Maps barycentric-style local coordinates (u, v) to the plane.
    pub fn map(&self, u: f64, v: f64) -> Point {
        let [a, b, c] = self.0;
        a + (b - a) * u + (c - a) * v
    }

    /// The four congruent children obtained by joining edge midpoints.
    pub fn subdivide(&self) -> [Triangle; 4] {
        let [a, b, c] = self.0;
        let ab = (a + b) * 0.5;
        let bc = (b + c) * 0.5;
        let ca = (c + a) * 0.5;
        [
            Triangle([a, ab, ca]),
            Triangle([ab, b, bc]),
            Triangle([ca, bc, c]),
            Triangle([ab, bc, ca]),
        ]
    }
}

/// Fan triangulation of a convex cell from its first vertex.
pub fn triangulate_cell(cell: &ConvexCell) -> Result<Vec<Triangle>> {
    triangulate_polygon(&cell.vertices)
}

pub(crate) fn triangulate_polygon(vertices: &[Point]) -> Result<Vec<Triangle>> {
    let area = shoelace_area(vertices);
    if vertices.len() < 3 || !(area > 0.0) {
        return Err(Error::DegenerateCell { area });
    }
    let v0 = vertices[0];
    Ok(vertices
        .windows(2)
        .skip(1)
        .map(|w| Triangle([v0, w[0], w[1]]))
        .collect())
}

const CONTAINS_SLACK: f64 = 1e-12;

/// True iff `p` lies inside or on the convex polygon, up to 1e-12 slack.
pub fn contains(cell: &ConvexCell, p: Point) -> bool {
    polygon_contains(&cell.vertices, p)
}

pub(crate) fn polygon_contains(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let edge = b - a;
        let len = libm::hypot(edge.x, edge.y);
        if len == 0.0 {
            return true;
        }
        edge.cross(p - a) / len >= -CONTAINS_SLACK
    })
}

/// Regular `nx` × `ny` pixel partition of a window, indexed row-major from
/// the (xmin, ymin) corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelGrid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
}

impl PixelGrid {
    pub fn new(window: Window, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidPartition(nx * ny));
        }
        Ok(Self { window, nx, ny })
    }

    /// A √n × √n grid; `n` must be a positive perfect square.
    pub fn square(window: Window, n: usize) -> Result<Self> {
        let side = integer_sqrt(n).ok_or(Error::InvalidPartition(n))?;
        Self::new(window, side, side)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel(&self, index: usize) -> Window {
        let (ix, iy) = (index % self.nx, index / self.nx);
        let dx = self.window.width() / self.nx as f64;
        let dy = self.window.height() / self.ny as f64;
        let xmax = if ix + 1 == self.nx {
            self.window.xmax
        } else {
            self.window.xmin + (ix + 1) as f64 * dx
        };
        let ymax = if iy + 1 == self.ny {
            self.window.ymax
        } else {
            self.window.ymin + (iy + 1) as f64 * dy
        };
        Window {
            xmin: self.window.xmin + ix as f64 * dx,
            xmax,
            ymin: self.window.ymin + iy as f64 * dy,
            ymax,
        }
    }

    /// Pixel containing `p`; points on the far edges belong to the last row/column.
    pub fn locate(&self, p: Point) -> Option<usize> {
        if !self.window.contains(p) {
            return None;
        }
        let fx = (p.x - self.window.xmin) / self.window.width() * self.nx as f64;
        let fy = (p.y - self.window.ymin) / self.window.height() * self.ny as f64;
        let ix = (fx as usize).min(self.nx - 1);
        let iy = (fy as usize).min(self.ny - 1);
        Some(iy * self.nx + ix)
    }

    /// Point counts per pixel; points outside the window are ignored.
    pub fn counts(&self, points: impl IntoIterator<Item = Point>) -> Vec<u64> {
        let mut counts = alloc::vec![0u64; self.len()];
        for p in points {
            if let Some(i) = self.locate(p) {
                counts[i] += 1;
            }
        }
        counts
    }
}

fn integer_sqrt(n: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}
