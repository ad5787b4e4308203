use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Tabulated intensity on a rectangular lattice of pixel centres, bilinearly
/// interpolated between centres and held constant beyond the outermost ones.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIntensity {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major: `rates[iy * xs.len() + ix]`.
    rates: Vec<f64>,
}

impl GridIntensity {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::InvalidGrid("no lattice points"));
        }
        if rates.len() != xs.len() * ys.len() {
            return Err(Error::InvalidGrid("rate count does not match lattice size"));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&xs) || !increasing(&ys) {
            return Err(Error::InvalidGrid("centres must be strictly increasing"));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidGrid("rates must be finite and nonnegative"));
        }
        Ok(Self { xs, ys, rates })
    }

    /// Builds the lattice from unordered `(x, y, rate)` triples, which must
    /// cover every combination of the distinct x and y values exactly once.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        let mut xs: Vec<f64> = triples.iter().map(|t| t.0).collect();
        let mut ys: Vec<f64> = triples.iter().map(|t| t.1).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        if xs.len() * ys.len() != triples.len() {
            return Err(Error::InvalidGrid("incomplete or duplicated lattice"));
        }
        let mut rates = alloc::vec![f64::NAN; triples.len()];
        for &(x, y, r) in triples {
            let ix = xs.binary_search_by(|v| v.total_cmp(&x)).unwrap_or(0);
            let iy = ys.binary_search_by(|v| v.total_cmp(&y)).unwrap_or(0);
            let slot = &mut rates[iy * xs.len() + ix];
            if !slot.is_nan() {
                return Err(Error::InvalidGrid("duplicated lattice point"));
            }
            *slot = r;
        }
        Self::new(xs, ys, rates)
    }

    pub fn x_centers(&self) -> &[f64] {
        &self.xs
    }

    pub fn y_centers(&self) -> &[f64] {
        &self.ys
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    fn rate(&self, ix: usize, iy: usize) -> f64 {
        self.rates[iy * self.xs.len() + ix]
    }

    pub fn evaluate(&self, p: Point) -> f64 {
        let (ix, fx) = locate(&self.xs, p.x);
        let (iy, fy) = locate(&self.ys, p.y);
        let ix1 = (ix + 1).min(self.xs.len() - 1);
        let iy1 = (iy + 1).min(self.ys.len() - 1);
        let r00 = self.rate(ix, iy);
        let r10 = self.rate(ix1, iy);
        let r01 = self.rate(ix, iy1);
        let r11 = self.rate(ix1, iy1);
        (1.0 - fy) * ((1.0 - fx) * r00 + fx * r10) + fy * ((1.0 - fx) * r01 + fx * r11)
    }
}

/// Index of the lower bracketing centre and the fractional offset in [0, 1].
fn locate(centers: &[f64], v: f64) -> (usize, f64) {
    let n = centers.len();
    if n == 1 || v <= centers[0] {
        return (0, 0.0);
    }
    if v >= centers[n - 1] {
        return (n - 1, 0.0);
    }
    let hi = centers.partition_point(|&c| c <= v);
    let lo = hi - 1;
    (lo, (v - centers[lo]) / (centers[hi] - centers[lo]))
}
