//! Seeded generators for test and demo inputs.

use rand::Rng;

use crate::geom::{Point2, REMOTE};
use crate::hoodbuf::{validate_points, HoodBuffer, PointSet};
use crate::oracle::oracle_upper_hull;

/// `n` points uniform in the unit square, sorted by `x`. Draws that fail
/// validation (repeated `x`, near-collinear triples) are discarded.
pub fn uniform_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PointSet {
    loop {
        let mut pts: Vec<Point2> = (0..n)
            .map(|_| Point2::new(rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        if let Ok(ps) = validate_points(pts) {
            return ps;
        }
    }
}

/// `n` samples of `y = x (1 - x)` at `x = k / (n + 1)`: every point is a
/// hull corner.
pub fn cap_points(n: usize) -> Vec<Point2> {
    (1..=n)
        .map(|k| {
            let x = k as f64 / (n + 1) as f64;
            Point2::new(x, x * (1.0 - x))
        })
        .collect()
}

/// `n` samples of `y = (x - 1/2)^2`: only the endpoints are hull corners.
pub fn cup_points(n: usize) -> Vec<Point2> {
    (1..=n)
        .map(|k| {
            let x = k as f64 / (n + 1) as f64;
            Point2::new(x, (x - 0.5) * (x - 0.5))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStyle {
    /// Uniform in the unit square; small hulls.
    Uniform,
    /// On a circular arc; every point is a corner.
    Arc,
    /// Arc with downward jitter; hulls of every size in between.
    JitteredArc,
}

/// Jittered-grid `x` coordinates: strictly increasing with gaps of at least
/// `0.4 / m`, so nearby triples keep a healthy orientation margin.
fn grid_xs<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    (0..m)
        .map(|k| (k as f64 + 0.5 + rng.gen_range(-0.3..0.3)) / m as f64)
        .collect()
}

fn pair_points<R: Rng + ?Sized>(m: usize, style: PairStyle, rng: &mut R) -> Vec<Point2> {
    match style {
        PairStyle::Uniform => uniform_points(m, rng).into_points(),
        PairStyle::Arc | PairStyle::JitteredArc => {
            let radius = rng.gen_range(0.6..3.0);
            let depth = match style {
                PairStyle::Arc => 0.0,
                _ => rng.gen_range(0.0..0.05),
            };
            grid_xs(m, rng)
                .into_iter()
                .map(|x| {
                    let dx = x - 0.5;
                    let y = (radius * radius - dx * dx).sqrt() - radius + 0.5;
                    Point2::new(x, y - rng.gen_range(0.0..=depth))
                })
                .collect()
        }
    }
}

/// Lays out the hulls of `left` and `right` as two `d`-slot blocks.
pub fn hood_pair_buffer(left: &[Point2], right: &[Point2]) -> HoodBuffer {
    let d = left.len();
    assert_eq!(d, right.len());
    let mut slots = Vec::with_capacity(2 * d);
    for half in [left, right] {
        let hull = oracle_upper_hull(half);
        slots.extend_from_slice(&hull);
        slots.resize(slots.len() + d - hull.len(), REMOTE);
    }
    HoodBuffer::from_slots(slots, d).expect("2d slots in blocks of d")
}

/// A validated set of `2 d` points together with the two-block buffer that
/// holds the hulls of its halves.
pub fn random_hood_pair<R: Rng + ?Sized>(
    d: usize,
    style: PairStyle,
    rng: &mut R,
) -> (PointSet, HoodBuffer) {
    loop {
        let pts = pair_points(2 * d, style, rng);
        if let Ok(ps) = validate_points(pts) {
            let buf = hood_pair_buffer(&ps.points()[..d], &ps.points()[d..]);
            return (ps, buf);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hoodbuf::validate_hood;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_produce_valid_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(uniform_points(256, &mut rng).len(), 256);
        assert!(validate_points(cap_points(8)).is_ok());
        assert!(validate_points(cup_points(8)).is_ok());
        for style in [PairStyle::Uniform, PairStyle::Arc, PairStyle::JitteredArc] {
            for d in [2, 8, 64] {
                let (ps, buf) = random_hood_pair(d, style, &mut rng);
                assert_eq!(ps.len(), 2 * d);
                assert!(validate_hood(&buf).is_clean());
            }
        }
        let (_, arc) = random_hood_pair(32, PairStyle::Arc, &mut rng);
        assert_eq!(arc.block_corners(0).len(), 32);
    }
}
