//! Event catalogs: time-ordered space-time points with optional magnitudes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub mag: Option<f64>,
}

impl Event {
    pub const fn new(t: f64, x: f64, y: f64, mag: Option<f64>) -> Self {
        Self { t, x, y, mag }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpan {
    pub start: f64,
    pub end: f64,
}

impl TimeSpan {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::InvalidParameter {
                name: "time_span",
                value: end - start,
            });
        }
        Ok(Self { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

impl Default for TimeSpan {
    fn default() -> Self {
        Self {
            start: 0.0,
            end: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub events: Vec<Event>,
    pub window: Window,
    pub time_span: TimeSpan,
    pub mag_cutoff: Option<f64>,
}

impl Catalog {
    pub fn new(window: Window, time_span: TimeSpan) -> Self {
        Self {
            events: Vec::new(),
            window,
            time_span,
            mag_cutoff: None,
        }
    }

    /// A purely spatial pattern: events get evenly spaced times in [0, 1).
    pub fn from_points(points: &[Point], window: Window) -> Self {
        let n = points.len().max(1) as f64;
        let events = points
            .iter()
            .enumerate()
            .map(|(i, p)| Event::new(i as f64 / n, p.x, p.y, None))
            .collect();
        Self {
            events,
            window,
            time_span: TimeSpan::default(),
            mag_cutoff: None,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.events.iter().map(Event::point).collect()
    }

    /// Sorts by time and nudges tied times apart by less than 1e-9 so the
    /// sequence is strictly increasing. Returns the number of ties resolved.
    pub fn sort_and_resolve_ties(&mut self) -> usize {
        self.events.sort_by(|a, b| a.t.total_cmp(&b.t));
        let mut ties = 0;
        for i in 1..self.events.len() {
            let prev = self.events[i - 1].t;
            if self.events[i].t <= prev {
                self.events[i].t = (prev + 1e-10).max(next_up(prev));
                ties += 1;
            }
        }
        ties
    }

    /// Events strictly before `t` (the history seen by the intensity at `t`).
    pub fn history_before(&self, t: f64) -> &[Event] {
        let end = self.events.partition_point(|e| e.t < t);
        &self.events[..end]
    }
}

fn next_up(x: f64) -> f64 {
    libm::nextafter(x, f64::INFINITY)
}
