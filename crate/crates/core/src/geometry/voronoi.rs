use alloc::vec::Vec;

use num_traits::Float;

use super::{polygon_contains, shoelace_area, ConvexCell, Point, Window};
use crate::error::{Error, Result};

/// Voronoi cells of a point pattern, clipped to a window and index-aligned
/// with the input points.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiDiagram {
    pub window: Window,
    pub cells: Vec<ConvexCell>,
}

impl VoronoiDiagram {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of a cell containing `p` (linear scan).
    pub fn locate(&self, p: Point) -> Option<usize> {
        self.cells
            .iter()
            .position(|c| polygon_contains(&c.vertices, p))
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }
}

/// Tessellates `points` inside `window`.
///
/// Each cell is the window clipped successively by the bisector half-planes
/// of nearby generators, visited in rings of a bucket grid. Clipping stops
/// once every unvisited generator is farther than twice the cell's
/// circumradius about its own generator, since no such bisector can cut it.
pub fn tessellate(points: &[Point], window: Window) -> Result<VoronoiDiagram> {
    if points.is_empty() {
        return Err(Error::EmptyPattern);
    }
    for (index, p) in points.iter().enumerate() {
        if !window.contains_strict(*p) {
            return Err(Error::PointOutsideWindow {
                index,
                x: p.x,
                y: p.y,
            });
        }
    }
    check_distinct(points)?;

    let grid = BucketGrid::new(points, window);
    let tol = 1e-12 * window.scale();
    let mut scratch = Scratch::default();
    let cells = (0..points.len())
        .map(|i| build_cell(i, points, &grid, window, tol, &mut scratch))
        .collect::<Result<Vec<_>>>()?;
    Ok(VoronoiDiagram { window, cells })
}

fn check_distinct(points: &[Point]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicatePoint { first, second });
        }
    }
    Ok(())
}

struct BucketGrid {
    window: Window,
    nx: usize,
    ny: usize,
    bw: f64,
    bh: f64,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl BucketGrid {
    fn new(points: &[Point], window: Window) -> Self {
        // About two points per bucket, buckets roughly square.
        let n = points.len() as f64;
        let aspect = window.width() / window.height();
        let nx = (libm::sqrt(n * aspect / 2.0).ceil() as usize).clamp(1, 4096);
        let ny = (libm::sqrt(n / aspect / 2.0).ceil() as usize).clamp(1, 4096);
        let bw = window.width() / nx as f64;
        let bh = window.height() / ny as f64;
        let mut grid = Self {
            window,
            nx,
            ny,
            bw,
            bh,
            start: alloc::vec![0; nx * ny + 1],
            items: alloc::vec![0; points.len()],
        };
        let keys: Vec<usize> = points.iter().map(|p| grid.key(*p)).collect();
        for &k in &keys {
            grid.start[k + 1] += 1;
        }
        for b in 0..nx * ny {
            grid.start[b + 1] += grid.start[b];
        }
        let mut fill = grid.start.clone();
        for (i, &k) in keys.iter().enumerate() {
            grid.items[fill[k]] = i;
            fill[k] += 1;
        }
        grid
    }

    fn coords(&self, p: Point) -> (usize, usize) {
        let ix = ((p.x - self.window.xmin) / self.bw) as usize;
        let iy = ((p.y - self.window.ymin) / self.bh) as usize;
        (ix.min(self.nx - 1), iy.min(self.ny - 1))
    }

    fn key(&self, p: Point) -> usize {
        let (ix, iy) = self.coords(p);
        iy * self.nx + ix
    }

    fn bucket(&self, ix: usize, iy: usize) -> &[usize] {
        let k = iy * self.nx + ix;
        &self.items[self.start[k]..self.start[k + 1]]
    }

    /// Appends the members of ring `r` (Chebyshev distance r in buckets)
    /// around bucket (cx, cy). Returns false when the ring lies entirely
    /// outside the grid.
    fn ring(&self, cx: usize, cy: usize, r: usize, out: &mut Vec<usize>) -> bool {
        let (cx, cy, r) = (cx as isize, cy as isize, r as isize);
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        if cx - r < 0 && cy - r < 0 && cx + r >= nx && cy + r >= ny {
            return false;
        }
        let mut visit = |x: isize, y: isize| {
            if x >= 0 && y >= 0 && x < nx && y < ny {
                out.extend_from_slice(self.bucket(x as usize, y as usize));
            }
        };
        if r == 0 {
            visit(cx, cy);
            return true;
        }
        for x in cx - r..=cx + r {
            visit(x, cy - r);
            visit(x, cy + r);
        }
        for y in cy - r + 1..cy + r {
            visit(cx - r, y);
            visit(cx + r, y);
        }
        true
    }
}

#[derive(Default)]
struct Scratch {
    ring: Vec<(f64, usize)>,
    members: Vec<usize>,
    poly: Vec<Point>,
    next: Vec<Point>,
}

fn build_cell(
    i: usize,
    points: &[Point],
    grid: &BucketGrid,
    window: Window,
    tol: f64,
    s: &mut Scratch,
) -> Result<ConvexCell> {
    let g = points[i];
    s.poly.clear();
    s.poly.extend_from_slice(&window.corners());
    let mut radius_sq = circumradius_sq(g, &s.poly);
    let (cx, cy) = grid.coords(g);
    let step = grid.bw.min(grid.bh);

    let mut r = 0usize;
    loop {
        s.members.clear();
        if !grid.ring(cx, cy, r, &mut s.members) {
            break;
        }
        s.ring.clear();
        s.ring.extend(
            s.members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (g.dist_sq(points[j]), j)),
        );
        s.ring
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(d2, j) in &s.ring {
            if d2 >= 4.0 * radius_sq {
                break;
            }
            let other = points[j];
            let normal = other - g;
            let mid = (g + other) * 0.5;
            clip_half_plane(&s.poly, normal, mid, &mut s.next);
            core::mem::swap(&mut s.poly, &mut s.next);
            dedup_ring(&mut s.poly, tol);
            radius_sq = circumradius_sq(g, &s.poly);
        }
        // Unvisited generators sit in rings > r, at least r·step away.
        let reach = r as f64 * step;
        if reach * reach >= 4.0 * radius_sq {
            break;
        }
        r += 1;
    }

    let area = shoelace_area(&s.poly);
    if s.poly.len() < 3 || !(area > 0.0) {
        return Err(Error::DegenerateCell { area });
    }
    let touches_boundary = touches_window(&s.poly, &window, tol);
    Ok(ConvexCell {
        generator: g,
        vertices: s.poly.clone(),
        area,
        touches_boundary,
    })
}

fn circumradius_sq(g: Point, poly: &[Point]) -> f64 {
    poly.iter().map(|v| g.dist_sq(*v)).fold(0.0, f64::max)
}

/// Keeps the part of `poly` where `normal · (p - anchor) <= 0`.
fn clip_half_plane(poly: &[Point], normal: Point, anchor: Point, out: &mut Vec<Point>) {
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
}

fn dedup_ring(poly: &mut Vec<Point>, tol: f64) {
    let tol_sq = tol * tol;
    poly.dedup_by(|b, a| a.dist_sq(*b) <= tol_sq);
    while poly.len() > 1 && poly[0].dist_sq(poly[poly.len() - 1]) <= tol_sq {
        poly.pop();
    }
}

fn touches_window(poly: &[Point], w: &Window, tol: f64) -> bool {
    let n = poly.len();
    (0..n).any(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let on = |u: f64, v: f64, edge: f64| (u - edge).abs() <= tol && (v - edge).abs() <= tol;
        on(a.x, b.x, w.xmin) || on(a.x, b.x, w.xmax) || on(a.y, b.y, w.ymin) || on(a.y, b.y, w.ymax)
    })
}
