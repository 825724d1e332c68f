//! Planar points, the `REMOTE` padding sentinel and the orientation test.

use std::fmt;

/// A point in the plane. Data points live in `0 < x < 1`; anything with
/// `x > 1` is padding.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// Padding value for unused hood slots.
pub const REMOTE: Point2 = Point2 { x: 10.0, y: 0.0 };

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn is_remote(&self) -> bool {
        self.x > 1.0
    }

    /// The same point moved down by `dy`.
    #[inline]
    pub(crate) fn dropped(self, dy: f64) -> Self {
        Point2 {
            x: self.x,
            y: self.y - dy,
        }
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

#[inline]
pub fn is_remote(p: Point2) -> bool {
    p.is_remote()
}

#[inline]
pub fn make_remote() -> Point2 {
    REMOTE
}

/// `det(q - p, r - p)`: positive when `r` is strictly left of the directed
/// segment `p -> q`.
#[inline]
pub fn orientation(r: Point2, p: Point2, q: Point2) -> f64 {
    (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
}

/// True iff `r` lies strictly left of the directed segment `p -> q`.
/// Collinear triples report `false`.
#[inline]
pub fn left_of(r: Point2, p: Point2, q: Point2) -> bool {
    orientation(r, p, q) > 0.0
}
