//! Validated input points and the padded block layout of intermediate hoods.
//!
//! A [`HoodBuffer`] of `n` slots is cut into `n / d` blocks of `d` slots.
//! Each block holds the upper hull of its input interval: corners packed to
//! the left in increasing `x`, the rest of the block filled with `REMOTE`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{left_of, orientation, Point2};

/// Smallest accepted `|det|` for any triple of input points.
pub const EPS_COLLINEAR: f64 = 1e-9;

/// Point sets up to this size get an exhaustive triple check.
pub const FULL_TRIPLE_CHECK_MAX: usize = 64;

/// Random triples sampled per point above [`FULL_TRIPLE_CHECK_MAX`].
pub const SAMPLED_TRIPLES_PER_POINT: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointError {
    #[error("count {0} is not a power of 2")]
    NotPowerOfTwo(usize),
    #[error("point {0}: x must lie strictly between 0 and 1")]
    XOutOfRange(usize),
    #[error("point {0}: y is not finite")]
    NonFiniteY(usize),
    #[error("point {0}: x is not strictly greater than its predecessor")]
    XNotIncreasing(usize),
    #[error("points {0}, {1}, {2} are collinear within the orientation margin")]
    DegenerateTriple(usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("buffer length {0} is not a power of 2 >= 2")]
    BadLength(usize),
    #[error("block size {block_size} does not divide buffer length {len}")]
    BadBlockSize { len: usize, block_size: usize },
}

/// Points that satisfy every precondition of the merge kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point2>,
}

impl PointSet {
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.points
    }
}

pub fn is_pos_power_of_two(n: usize) -> bool {
    n >= 2 && n.is_power_of_two()
}

fn check_triple(points: &[Point2], i: usize, j: usize, k: usize) -> Result<(), PointError> {
    if orientation(points[k], points[i], points[j]).abs() < EPS_COLLINEAR {
        Err(PointError::DegenerateTriple(i, j, k))
    } else {
        Ok(())
    }
}

pub fn validate_points(points: Vec<Point2>) -> Result<PointSet, PointError> {
    let n = points.len();
    if !is_pos_power_of_two(n) {
        return Err(PointError::NotPowerOfTwo(n));
    }
    for (idx, p) in points.iter().enumerate() {
        if !(p.x > 0.0 && p.x < 1.0) {
            return Err(PointError::XOutOfRange(idx));
        }
        if !p.y.is_finite() {
            return Err(PointError::NonFiniteY(idx));
        }
    }
    for idx in 1..n {
        if points[idx].x <= points[idx - 1].x {
            return Err(PointError::XNotIncreasing(idx));
        }
    }

    if n <= FULL_TRIPLE_CHECK_MAX {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    check_triple(&points, i, j, k)?;
                }
            }
        }
    } else {
        for i in 0..n - 2 {
            check_triple(&points, i, i + 1, i + 2)?;
        }
        // Seeded from n so validation is reproducible.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ n as u64);
        for _ in 0..SAMPLED_TRIPLES_PER_POINT * n {
            let mut t = [0usize; 3];
            loop {
                for slot in t.iter_mut() {
                    *slot = rng.gen_range(0..n);
                }
                t.sort_unstable();
                if t[0] < t[1] && t[1] < t[2] {
                    break;
                }
            }
            check_triple(&points, t[0], t[1], t[2])?;
        }
    }
    Ok(PointSet { points })
}

/// `n` slots split into blocks of `block_size`, each a left-packed,
/// `REMOTE`-padded corner list.
#[derive(Debug, Clone, PartialEq)]
pub struct HoodBuffer {
    slots: Vec<Point2>,
    block_size: usize,
}

impl HoodBuffer {
    pub fn from_slots(slots: Vec<Point2>, block_size: usize) -> Result<Self, LayoutError> {
        let len = slots.len();
        if !is_pos_power_of_two(len) {
            return Err(LayoutError::BadLength(len));
        }
        if block_size == 0 || !block_size.is_power_of_two() || !len.is_multiple_of(block_size) {
            return Err(LayoutError::BadBlockSize { len, block_size });
        }
        Ok(HoodBuffer { slots, block_size })
    }

    pub fn slots(&self) -> &[Point2] {
        &self.slots
    }

    pub fn into_slots(self) -> Vec<Point2> {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.slots.len() / self.block_size
    }

    pub fn block(&self, b: usize) -> &[Point2] {
        let d = self.block_size;
        &self.slots[b * d..(b + 1) * d]
    }

    /// The live (non-remote) prefix of block `b`.
    pub fn block_corners(&self, b: usize) -> &[Point2] {
        let block = self.block(b);
        let live = block.iter().take_while(|p| !p.is_remote()).count();
        &block[..live]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[Point2]> {
        self.slots.chunks(self.block_size)
    }
}

/// Starting layout: every pair of consecutive points is its own hood.
pub fn init_hood(ps: &PointSet) -> HoodBuffer {
    HoodBuffer {
        slots: ps.points.clone(),
        block_size: 2,
    }
}

pub fn block_corners(h: &HoodBuffer, b: usize) -> &[Point2] {
    h.block_corners(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A live corner follows a remote slot.
    RemoteBeforeLive,
    /// Block has no live corner.
    EmptyBlock,
    XNotIncreasing,
    /// Interior corner is not strictly above the chord of its neighbours.
    NotConcave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub block: usize,
    /// Absolute slot index in the buffer.
    pub slot: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConformanceReport {
    pub violations: Vec<Violation>,
}

impl ConformanceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every block of a buffer produced from data, where each block must
/// hold at least one corner.
pub fn validate_hood(h: &HoodBuffer) -> ConformanceReport {
    check_layout(h, false)
}

/// Like [`validate_hood`] but accepts all-`REMOTE` blocks.
pub fn validate_hood_allowing_empty(h: &HoodBuffer) -> ConformanceReport {
    check_layout(h, true)
}

fn check_layout(h: &HoodBuffer, allow_empty: bool) -> ConformanceReport {
    let d = h.block_size;
    let mut violations = Vec::new();
    for (b, block) in h.blocks().enumerate() {
        let base = b * d;
        let live = block.iter().take_while(|p| !p.is_remote()).count();
        if live == 0 && !allow_empty {
            violations.push(Violation {
                block: b,
                slot: base,
                kind: ViolationKind::EmptyBlock,
            });
        }
        for (k, p) in block.iter().enumerate().skip(live) {
            if !p.is_remote() {
                violations.push(Violation {
                    block: b,
                    slot: base + k,
                    kind: ViolationKind::RemoteBeforeLive,
                });
            }
        }
        let corners = &block[..live];
        for k in 1..corners.len() {
            if corners[k].x <= corners[k - 1].x {
                violations.push(Violation {
                    block: b,
                    slot: base + k,
                    kind: ViolationKind::XNotIncreasing,
                });
            }
        }
        for k in 1..corners.len().saturating_sub(1) {
            if !left_of(corners[k], corners[k - 1], corners[k + 1]) {
                violations.push(Violation {
                    block: b,
                    slot: base + k,
                    kind: ViolationKind::NotConcave,
                });
            }
        }
    }
    ConformanceReport { violations }
}
