//! Serial reference answers. Everything here is exhaustive or textbook and
//! shares no logic with the merge kernel.

use thiserror::Error;

use crate::geom::Point2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("expected exactly one tangent support, found {candidates}")]
    NoUniqueTangent { candidates: usize },
}

// Cross product of (a - o) and (b - o); positive when b is left of o -> a.
fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Monotone-chain upper hull of points sorted by strictly increasing `x`.
pub fn oracle_upper_hull(points: &[Point2]) -> Vec<Point2> {
    let mut hull: Vec<Point2> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let c = hull[hull.len() - 1];
            // keep c only if it is strictly above the chord a -> p
            if cross(a, p, c) > 0.0 {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Index of the corner of `hull` touched by the upper tangent from `p`,
/// where `p` lies left of every corner.
pub fn brute_tangent_to_right(p: Point2, hull: &[Point2]) -> Result<usize, OracleError> {
    let hits: Vec<usize> = (0..hull.len())
        .filter(|&t| {
            hull.iter()
                .enumerate()
                .all(|(k, &c)| k == t || cross(p, hull[t], c) < 0.0)
        })
        .collect();
    match hits[..] {
        [t] => Ok(t),
        _ => Err(OracleError::NoUniqueTangent {
            candidates: hits.len(),
        }),
    }
}

/// `(a, b)` such that every other corner of `left` and `right` lies strictly
/// below the line through `left[a]` and `right[b]`.
pub fn brute_common_tangent(
    left: &[Point2],
    right: &[Point2],
) -> Result<(usize, usize), OracleError> {
    let mut hits = Vec::new();
    for (a, &p) in left.iter().enumerate() {
        for (b, &q) in right.iter().enumerate() {
            let below = |(k, &c): (usize, &Point2), skip: usize| k == skip || cross(p, q, c) < 0.0;
            if left.iter().enumerate().all(|e| below(e, a))
                && right.iter().enumerate().all(|e| below(e, b))
            {
                hits.push((a, b));
            }
        }
    }
    match hits[..] {
        [pair] => Ok(pair),
        _ => Err(OracleError::NoUniqueTangent {
            candidates: hits.len(),
        }),
    }
}
