//! Geodesic spaces: the real line and the Euclidean plane.
//!
//! Points carry their dimension so that mixing line and plane coordinates is
//! caught instead of silently truncated.

use crate::error::{Error, Result};
use std::fmt;

/// Absolute tolerance for geometric and temporal comparisons.
pub const EPS: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    dim: u8,
    xy: [f64; 2],
}

impl Point {
    pub fn line(x: f64) -> Self {
        Point { dim: 1, xy: [x, 0.0] }
    }

    pub fn plane(x: f64, y: f64) -> Self {
        Point { dim: 2, xy: [x, y] }
    }

    pub fn origin(kind: SpaceKind) -> Self {
        match kind {
            SpaceKind::Line => Point::line(0.0),
            SpaceKind::Plane => Point::plane(0.0, 0.0),
        }
    }

    /// Builds a point from a coordinate slice of length 1 or 2.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coordinates must be finite"));
        }
        match coords {
            [x] => Ok(Point::line(*x)),
            [x, y] => Ok(Point::plane(*x, *y)),
            _ => Err(Error::invalid(format!("expected 1 or 2 coordinates, got {}", coords.len()))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.xy[..self.dim as usize]
    }

    pub fn x(&self) -> f64 {
        self.xy[0]
    }

    pub fn y(&self) -> f64 {
        self.xy[1]
    }

    /// Multiplies every coordinate by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Point { dim: self.dim, xy: [self.xy[0] * c, self.xy[1] * c] }
    }

    /// Distance without a dimension check; both points must share a space.
    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        if self.dim == 1 {
            (self.xy[0] - other.xy[0]).abs()
        } else {
            (self.xy[0] - other.xy[0]).hypot(self.xy[1] - other.xy[1])
        }
    }

    /// Distance to the all-zero point.
    pub fn norm(&self) -> f64 {
        if self.dim == 1 {
            self.xy[0].abs()
        } else {
            self.xy[0].hypot(self.xy[1])
        }
    }

    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        self.dim == other.dim && self.dist(other) <= tol
    }

    /// Point at arc length `s` from `self` toward `to`, clamped to the segment.
    pub fn toward(&self, to: &Point, s: f64) -> Point {
        let d = self.dist(to);
        if d <= 0.0 || s <= 0.0 {
            return *self;
        }
        if s >= d {
            return *to;
        }
        let f = s / d;
        Point {
            dim: self.dim,
            xy: [
                self.xy[0] + (to.xy[0] - self.xy[0]) * f,
                self.xy[1] + (to.xy[1] - self.xy[1]) * f,
            ],
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Line,
    Plane,
}

impl SpaceKind {
    pub fn dim(self) -> usize {
        match self {
            SpaceKind::Line => 1,
            SpaceKind::Plane => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::Line => "line",
            SpaceKind::Plane => "plane",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(SpaceKind::Line),
            "plane" => Ok(SpaceKind::Plane),
            other => Err(Error::invalid(format!("unknown space kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub kind: SpaceKind,
}

impl Space {
    pub fn new(kind: SpaceKind) -> Self {
        Space { kind }
    }

    pub fn line() -> Self {
        Space::new(SpaceKind::Line)
    }

    pub fn plane() -> Self {
        Space::new(SpaceKind::Plane)
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn origin(&self) -> Point {
        Point::origin(self.kind)
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
    }

    fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "point {:?} has dimension {}, space {} needs {}",
                p,
                p.dim(),
                self.kind.as_str(),
                self.dim()
            )))
        }
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.dist(b))
    }

    /// Point on the segment from `a` to `b` at arc length `s` from `a`.
    pub fn interpolate(&self, a: &Point, b: &Point, s: f64) -> Result<Point> {
        let d = self.distance(a, b)?;
        if !(s >= -EPS && s <= d + EPS) {
            return Err(Error::invalid(format!("arc length {s} outside [0, {d}]")));
        }
        Ok(a.toward(b, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distances() {
        let l = Space::line();
        assert_eq!(l.distance(&Point::line(0.0), &Point::line(1.0)).unwrap(), 1.0);
        assert_eq!(l.distance(&Point::line(2.5), &Point::line(2.5)).unwrap(), 0.0);
        let p = Space::plane();
        assert_eq!(p.distance(&Point::plane(0.0, 0.0), &Point::plane(3.0, 4.0)).unwrap(), 5.0);
        assert!(matches!(
            p.distance(&Point::line(0.0), &Point::plane(1.0, 1.0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn interpolation() {
        let l = Space::line();
        let m = l.interpolate(&Point::line(0.0), &Point::line(2.0), 0.5).unwrap();
        assert_eq!(m, Point::line(0.5));
        let p = Space::plane();
        let m = p.interpolate(&Point::plane(0.0, 0.0), &Point::plane(0.0, 2.0), 1.0).unwrap();
        assert_eq!(m, Point::plane(0.0, 1.0));
        let a = Point::plane(1.0, -1.0);
        assert_eq!(p.interpolate(&a, &a, 0.0).unwrap(), a);
        assert!(l.interpolate(&Point::line(0.0), &Point::line(1.0), 1.5).is_err());
        assert!(l.interpolate(&Point::line(0.0), &Point::line(1.0), -0.5).is_err());
    }

    #[test]
    fn from_coords_rejects_bad_input() {
        assert!(Point::from_coords(&[]).is_err());
        assert!(Point::from_coords(&[1.0, 2.0, 3.0]).is_err());
        assert!(Point::from_coords(&[f64::NAN]).is_err());
        assert_eq!(Point::from_coords(&[1.0, 2.0]).unwrap(), Point::plane(1.0, 2.0));
    }

    fn plane_point() -> impl Strategy<Value = Point> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Point::plane(x, y))
    }

    proptest! {
        #[test]
        fn symmetric(a in plane_point(), b in plane_point()) {
            let s = Space::plane();
            prop_assert_eq!(s.distance(&a, &b).unwrap(), s.distance(&b, &a).unwrap());
        }

        #[test]
        fn triangle(a in plane_point(), b in plane_point(), c in plane_point()) {
            let s = Space::plane();
            let ac = s.distance(&a, &c).unwrap();
            let ab = s.distance(&a, &b).unwrap();
            let bc = s.distance(&b, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }

        #[test]
        fn interpolation_consistent(a in plane_point(), b in plane_point(), f in 0.0..=1.0f64) {
            let s = Space::plane();
            let d = s.distance(&a, &b).unwrap();
            let m = s.interpolate(&a, &b, f * d).unwrap();
            prop_assert!((s.distance(&a, &m).unwrap() - f * d).abs() <= 1e-12);
            prop_assert!((s.distance(&m, &b).unwrap() - (d - f * d)).abs() <= 1e-12);
        }
    }
}
