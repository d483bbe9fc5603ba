//! Piecewise paths in the complex plane, parametrised per segment by `t ∈ [0, 1]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    Line { from: C64, to: C64 },
    /// Arc of `center + radius·e^{iθ}` for θ running from `theta0` to `theta1`.
    Arc { center: C64, radius: f64, theta0: f64, theta1: f64 },
}

impl Segment {
    pub fn point(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * t,
            Segment::Arc { center, radius, theta0, theta1 } => {
                center + C64::from_polar(radius, theta0 + (theta1 - theta0) * t)
            }
        }
    }

    /// Derivative of [`Segment::point`] with respect to `t`.
    pub fn velocity(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc { radius, theta0, theta1, .. } => {
                let th = theta0 + (theta1 - theta0) * t;
                C64::new(0.0, theta1 - theta0) * C64::from_polar(radius, th)
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, theta0, theta1, .. } => radius * (theta1 - theta0).abs(),
        }
    }

    /// Smallest distance from the segment to `p`.
    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let t = ((p - from) * d.conj()).re / len2;
                (p - self.point(t.clamp(0.0, 1.0))).norm()
            }
            Segment::Arc { center, radius, theta0, theta1 } => {
                let rel = p - center;
                let (lo, hi) = if theta0 <= theta1 { (theta0, theta1) } else { (theta1, theta0) };
                let ang = rel.arg();
                let on_arc = (-2..=2).any(|k| {
                    let a = ang + 2.0 * PI * k as f64;
                    a >= lo && a <= hi
                });
                let radial = (rel.norm() - radius).abs();
                let ends = (p - self.start()).norm().min((p - self.end()).norm());
                if on_arc { radial.min(ends) } else { ends }
            }
        }
    }
}

/// A chain of segments, each starting where the previous one ends.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Path {
    segments: Vec<Segment>,
}

impl Path {
    pub fn new() -> Self {
        Path { segments: Vec::new() }
    }

    /// Appends a segment; rejects gaps larger than `1e-12` relative.
    pub fn push(&mut self, seg: Segment) -> Result<()> {
        if let Some(prev) = self.segments.last() {
            let gap = (prev.end() - seg.start()).norm();
            if gap > 1e-12 * (1.0 + prev.end().norm()) {
                return Err(Error::Path(format!("segments are not contiguous (gap {gap:.3e})")));
            }
        }
        self.segments.push(seg);
        Ok(())
    }

    pub fn line(mut self, to: C64) -> Result<Self> {
        let from = self.end().ok_or_else(|| Error::Path("line needs a starting point".into()))?;
        self.push(Segment::Line { from, to })?;
        Ok(self)
    }

    pub fn starting_line(from: C64, to: C64) -> Self {
        Path { segments: vec![Segment::Line { from, to }] }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> Option<C64> {
        self.segments.first().map(Segment::start)
    }

    pub fn end(&self) -> Option<C64> {
        self.segments.last().map(Segment::end)
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn distance_to(&self, p: C64) -> f64 {
        self.segments.iter().map(|s| s.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// Fails when the path passes within `margin` of any point in `poles`.
    pub fn check_clearance(&self, poles: &[C64], margin: f64) -> Result<()> {
        for (k, p) in poles.iter().enumerate() {
            let d = self.distance_to(*p);
            if d <= margin {
                return Err(Error::Path(format!("path passes within {d:.3e} of singular point {k}")));
            }
        }
        Ok(())
    }
}
