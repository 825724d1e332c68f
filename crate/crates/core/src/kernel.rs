//! The merge kernel: tangent classifiers and the phase program that merges
//! two adjacent hoods `P` and `Q` into the hood of their union.
//!
//! One block of `d1 x d2` threads handles one window of `2d` slots starting at
//! `start`: `P` occupies `[start, start + d)` and `Q` occupies
//! `[start + d, start + 2d)`. The phases are:
//!
//! | phase | effect |
//! |-------|--------|
//! | mam0  | `scratch[window] = -1`, `i = start + d2 x` |
//! | mam1  | `scratch[start + x]` = last `Q` sample (stride `d1`) with `g(i_x, .) <= EQUAL` |
//! | mam2  | `scratch[start + d + x]` = the `Q` corner with `g(i_x, .) == EQUAL` |
//! | mam3  | `scratch[start]` = `k0`, last `P` sample with `f(i_x, j1(x)) <= EQUAL` |
//! | mam4  | `i = k0 + y`; `scratch[start + d + y]` = last `Q` sample (stride `d2`) with `g(i, .) <= EQUAL` |
//! | mam5  | `scratch[start], scratch[start + 1]` = the pair with `f == g == EQUAL` |
//! | mam6a | fill the whole `newhood` window with `REMOTE` |
//! | mam6b | copy `P` corners up to `pindex` |
//! | mam6c | copy `Q` corners from `qindex` on, shifted left by `qindex - pindex - 1` |

use std::fmt;

use thiserror::Error;

use crate::geom::{left_of, Point2, REMOTE};
use crate::hoodbuf::{HoodBuffer, LayoutError};
use crate::psim::{
    self, ArrayId, Conflict, ConflictReport, EvalOrder, LaunchOutcome, MergeArrays, Phase,
    PhaseKernel, PsimError, StepMetrics, ThreadCtx,
};

pub use crate::psim::{BlockDims, ThreadCoord};

/// Where a candidate corner sits relative to the corner supporting a tangent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(i8)]
pub enum Classification {
    Low = -1,
    Equal = 0,
    High = 1,
}

impl Classification {
    pub fn code(self) -> i8 {
        self as i8
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Low => "LOW",
            Classification::Equal => "EQUAL",
            Classification::High => "HIGH",
        })
    }
}

use Classification::{Equal, High, Low};

/// Read access to hood slots, so the classifiers run both on plain slices and
/// inside the audited engine.
pub trait HoodRead {
    fn point(&mut self, index: i64) -> Point2;
}

impl HoodRead for ThreadCtx<'_> {
    fn point(&mut self, index: i64) -> Point2 {
        self.hood(index)
    }
}

/// Plain slice view; indices must be in range.
pub struct SliceHood<'a>(pub &'a [Point2]);

impl HoodRead for SliceHood<'_> {
    fn point(&mut self, index: i64) -> Point2 {
        self.0[index as usize]
    }
}

/// Position of `Q` slot `j` relative to the corner of `H(Q)` that supports
/// the tangent from `p = hood[i]`.
pub fn classify_g_in<H: HoodRead + ?Sized>(
    hood: &mut H,
    i: i64,
    j: i64,
    start: i64,
    d: i64,
) -> Classification {
    if hood.point(j).is_remote() {
        return High;
    }
    let p = hood.point(i);
    let q = hood.point(j);

    // Past the last corner, the successor is a fictitious point right below q.
    let atend = j == start + 2 * d - 1 || hood.point(j + 1).is_remote();
    let q_next = hood
        .point(j + 1 - atend as i64)
        .dropped(atend as i64 as f64);
    if left_of(q_next, p, q) {
        return Low;
    }

    let atstart = j == start + d;
    let q_prev = hood
        .point(j + atstart as i64 - 1)
        .dropped(atstart as i64 as f64);
    if left_of(q_prev, p, q) {
        High
    } else {
        Equal
    }
}

/// Position of `P` slot `i` relative to the corner of `H(P)` that supports
/// the tangent from `q = hood[j]`.
pub fn classify_f_in<H: HoodRead + ?Sized>(
    hood: &mut H,
    i: i64,
    j: i64,
    start: i64,
    d: i64,
) -> Classification {
    if hood.point(i).is_remote() {
        return High;
    }
    let p = hood.point(i);
    let q = hood.point(j);

    let atend = i == start + d - 1 || hood.point(i + 1).is_remote();
    let p_next = hood
        .point(i + 1 - atend as i64)
        .dropped(atend as i64 as f64);
    if left_of(p_next, p, q) {
        return Low;
    }

    let atstart = i == start;
    let p_prev = hood
        .point(i + atstart as i64 - 1)
        .dropped(atstart as i64 as f64);
    if left_of(p_prev, p, q) {
        High
    } else {
        Equal
    }
}

pub fn classify_g(hood: &[Point2], i: usize, j: usize, start: usize, d: usize) -> Classification {
    classify_g_in(
        &mut SliceHood(hood),
        i as i64,
        j as i64,
        start as i64,
        d as i64,
    )
}

pub fn classify_f(hood: &[Point2], i: usize, j: usize, start: usize, d: usize) -> Classification {
    classify_f_in(
        &mut SliceHood(hood),
        i as i64,
        j as i64,
        start as i64,
        d as i64,
    )
}

/// Per-thread registers carried from phase to phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ThreadLocals {
    pub i: i64,
    pub j: i64,
    pub pindex: i64,
    pub qindex: i64,
    pub shift: i64,
    splice_ok: bool,
}

fn g(ctx: &mut ThreadCtx<'_>, i: i64, j: i64) -> Classification {
    let (start, d) = (ctx.start(), ctx.d());
    classify_g_in(ctx, i, j, start, d)
}

fn f(ctx: &mut ThreadCtx<'_>, i: i64, j: i64) -> Classification {
    let (start, d) = (ctx.start(), ctx.d());
    classify_f_in(ctx, i, j, start, d)
}

struct Geo {
    start: i64,
    d: i64,
    d1: i64,
    d2: i64,
    x: i64,
    y: i64,
    indx: i64,
}

fn geo(ctx: &ThreadCtx<'_>) -> Geo {
    let dims = ctx.dims();
    Geo {
        start: ctx.start(),
        d: ctx.d(),
        d1: dims.d1 as i64,
        d2: dims.d2 as i64,
        x: ctx.x() as i64,
        y: ctx.y() as i64,
        indx: ctx.indx(),
    }
}

fn mam0_init(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo {
        start,
        d,
        d2,
        x,
        indx,
        ..
    } = geo(ctx);
    t.pindex = -1;
    t.qindex = -1;
    ctx.set_scratch(start + indx, -1);
    ctx.set_scratch(start + indx + d, -1);
    t.i = start + d2 * x;
}

fn mam1_bracket_on_q(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo {
        start,
        d,
        d1,
        d2,
        x,
        y,
        ..
    } = geo(ctx);
    if ctx.hood(t.i).is_remote() {
        return;
    }
    t.j = start + d + d1 * y;
    if g(ctx, t.i, t.j) <= Equal
        && (y == d2 - 1 || ctx.hood(t.j + d1).is_remote() || g(ctx, t.i, t.j + d1) == High)
    {
        ctx.set_scratch(start + x, t.j as i32);
    }
}

fn mam2_refine_on_q(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo {
        start,
        d,
        d1,
        d2,
        x,
        y,
        ..
    } = geo(ctx);
    if ctx.hood(t.i).is_remote() {
        return;
    }
    t.j = ctx.scratch(start + x) as i64 + y;
    if g(ctx, t.i, t.j) == Equal {
        ctx.set_scratch(start + d + x, t.j as i32);
    } else if d2 < d1 && g(ctx, t.i, t.j + d2) == Equal {
        ctx.set_scratch(start + d + x, (t.j + d2) as i32);
    }
}

fn mam3_locate_k0(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo {
        start,
        d,
        d1,
        d2,
        x,
        y,
        ..
    } = geo(ctx);
    // Every thread of column x would evaluate the same test; only row 0 writes.
    if y != 0 {
        return;
    }
    t.j = ctx.scratch(start + d + x) as i64;
    if !ctx.hood(t.i).is_remote()
        && f(ctx, t.i, t.j) <= Equal
        && (x == d1 - 1 || ctx.hood(t.i + d2).is_remote() || {
            let next_j = ctx.scratch(start + d + x + 1) as i64;
            f(ctx, t.i + d2, next_j) == High
        })
    {
        ctx.set_scratch(start, t.i as i32);
    }
}

fn mam4_rebracket_on_q(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo {
        start,
        d,
        d1,
        d2,
        x,
        y,
        ..
    } = geo(ctx);
    t.i = ctx.scratch(start) as i64 + y;
    if ctx.hood(t.i).is_remote() {
        return;
    }
    t.j = start + d + x * d2;
    if g(ctx, t.i, t.j) <= Equal
        && (x == d1 - 1 || ctx.hood(t.j + d2).is_remote() || g(ctx, t.i, t.j + d2) == High)
    {
        ctx.set_scratch(start + d + y, t.j as i32);
    }
}

fn mam5_pinpoint(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo {
        start, d, d2, x, y, ..
    } = geo(ctx);
    // A remote candidate left scratch[start + d + y] untouched in mam4.
    if x >= d2 || ctx.hood(t.i).is_remote() {
        return;
    }
    t.j = ctx.scratch(start + d + y) as i64 + x;
    if g(ctx, t.i, t.j) == Equal && f(ctx, t.i, t.j) == Equal {
        ctx.set_scratch(start, t.i as i32);
        ctx.set_scratch(start + 1, t.j as i32);
    }
}

fn load_tangent(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo { start, d, .. } = geo(ctx);
    t.pindex = ctx.scratch(start) as i64;
    t.qindex = ctx.scratch(start + 1) as i64;
    t.shift = t.qindex - t.pindex - 1;
    t.splice_ok = start <= t.pindex
        && t.pindex < start + d
        && start + d <= t.qindex
        && t.qindex < start + 2 * d;
}

fn mam6a_fill(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo { start, d, indx, .. } = geo(ctx);
    load_tangent(ctx, t);
    ctx.set_newhood(start + indx, REMOTE);
    ctx.set_newhood(start + d + indx, REMOTE);
}

fn mam6b_copy_p(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo { start, indx, .. } = geo(ctx);
    if t.splice_ok && start + indx <= t.pindex {
        let p = ctx.hood(start + indx);
        ctx.set_newhood(start + indx, p);
    }
}

fn mam6c_copy_q(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo { start, d, indx, .. } = geo(ctx);
    if t.splice_ok && start + d + indx >= t.qindex {
        let q = ctx.hood(start + d + indx);
        ctx.set_newhood(start + d + indx - t.shift, q);
    }
}

// Copies all of P and pads only the Q half; stale P corners survive when the
// shift exceeds Q's padding.
fn mam6_half_fill(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let Geo { start, d, indx, .. } = geo(ctx);
    load_tangent(ctx, t);
    let p = ctx.hood(start + indx);
    ctx.set_newhood(start + indx, p);
    ctx.set_newhood(start + d + indx, REMOTE);
}

/// How the final phase assembles the merged window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splice {
    /// Pad the whole window, then copy `P[..=pindex]` and `Q[qindex..]`.
    #[default]
    FillFirst,
    /// Copy all of `P`, pad only the `Q` half, then copy `Q[qindex..]`.
    /// Leaves stale corners behind on some inputs; kept for comparison.
    HalfFill,
}

const TANGENT_SEARCH: [Phase<ThreadLocals>; 6] = [
    Phase {
        name: "mam0 init",
        run: mam0_init,
        required: &[],
    },
    Phase {
        name: "mam1 bracket on Q",
        run: mam1_bracket_on_q,
        required: &[],
    },
    Phase {
        name: "mam2 refine on Q",
        run: mam2_refine_on_q,
        required: &[],
    },
    Phase {
        name: "mam3 locate k0",
        run: mam3_locate_k0,
        required: &[(ArrayId::Scratch, 0)],
    },
    Phase {
        name: "mam4 rebracket on Q",
        run: mam4_rebracket_on_q,
        required: &[],
    },
    Phase {
        name: "mam5 pinpoint",
        run: mam5_pinpoint,
        required: &[(ArrayId::Scratch, 0), (ArrayId::Scratch, 1)],
    },
];

/// Index of the pinpoint phase in every kernel variant.
pub const PINPOINT_PHASE: usize = 5;

/// Barriers per launch of the default kernel.
pub const PHASE_COUNT: usize = 9;

pub fn match_and_merge_kernel(grid: usize, dims: BlockDims) -> PhaseKernel<ThreadLocals> {
    match_and_merge_kernel_with(grid, dims, Splice::FillFirst)
}

pub fn match_and_merge_kernel_with(
    grid: usize,
    dims: BlockDims,
    splice: Splice,
) -> PhaseKernel<ThreadLocals> {
    let mut phases = TANGENT_SEARCH.to_vec();
    match splice {
        Splice::FillFirst => phases.extend([
            Phase {
                name: "mam6a fill",
                run: mam6a_fill,
                required: &[],
            },
            Phase {
                name: "mam6b copy P",
                run: mam6b_copy_p,
                required: &[],
            },
            Phase {
                name: "mam6c copy Q",
                run: mam6c_copy_q,
                required: &[],
            },
        ]),
        Splice::HalfFill => phases.extend([
            Phase {
                name: "mam6 half fill",
                run: mam6_half_fill,
                required: &[],
            },
            Phase {
                name: "mam6c copy Q",
                run: mam6c_copy_q,
                required: &[],
            },
        ]),
    }
    PhaseKernel::new(phases, grid, dims)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MergeOptions {
    /// Evaluate blocks on the rayon pool.
    pub parallel: bool,
    pub order: EvalOrder,
    pub splice: Splice,
}

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("need at least two blocks of size >= 2, got {blocks} of size {block_size}")]
    NothingToMerge { blocks: usize, block_size: usize },
    #[error(transparent)]
    Launch(#[from] PsimError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("block {block}: no unique common tangent")]
    DegenerateTangent { block: usize },
}

/// One merge round over a whole buffer.
#[derive(Debug, Clone)]
pub struct MergeOutcome {
    /// Merged hoods in blocks of twice the input block size.
    pub hood: HoodBuffer,
    /// Scratch after the launch: `scratch[start]`, `scratch[start + 1]` hold
    /// each block's tangent corners.
    pub scratch: Vec<i32>,
    pub report: ConflictReport,
    pub metrics: StepMetrics,
}

impl MergeOutcome {
    /// `(pindex, qindex)` of block `b`, as absolute slot indices.
    pub fn tangent(&self, b: usize) -> (usize, usize) {
        let start = b * self.hood.block_size();
        (
            self.scratch[start] as usize,
            self.scratch[start + 1] as usize,
        )
    }
}

/// Merges blocks `2l` and `2l + 1` of `hood` for every `l`.
pub fn merge_round(hood: &HoodBuffer, opts: &MergeOptions) -> Result<MergeOutcome, MergeError> {
    let d = hood.block_size();
    let blocks = hood.block_count();
    if d < 2 || blocks < 2 {
        return Err(MergeError::NothingToMerge {
            blocks,
            block_size: d,
        });
    }
    let dims = BlockDims::for_round(d.trailing_zeros());
    let grid = blocks / 2;
    let kernel = match_and_merge_kernel_with(grid, dims, opts.splice);
    let arrays = MergeArrays::new(hood.slots().to_vec());
    let LaunchOutcome {
        arrays,
        report,
        metrics,
    } = if opts.parallel {
        psim::run_blocks_parallel(&kernel, arrays, opts.order)?
    } else {
        psim::launch(&kernel, arrays, opts.order)?
    };

    for block in 0..grid {
        let start = block * dims.window();
        let missed = report.conflicts.iter().any(|c| {
            matches!(c, Conflict::MissingWrite { phase, block: b, .. }
                if *b == block && phase.index == PINPOINT_PHASE)
        });
        let (p, q) = (
            arrays.scratch[start] as i64,
            arrays.scratch[start + 1] as i64,
        );
        let (s, d) = (start as i64, d as i64);
        let in_range = s <= p && p < s + d && s + d <= q && q < s + 2 * d;
        if missed || !in_range {
            return Err(MergeError::DegenerateTangent { block });
        }
    }

    Ok(MergeOutcome {
        hood: HoodBuffer::from_slots(arrays.newhood, dims.window())?,
        scratch: arrays.scratch,
        report,
        metrics,
    })
}

/// Merges the two `d`-slot hoods stored in `window` (length `2d`).
pub fn match_and_merge_block(
    window: &[Point2],
    opts: &MergeOptions,
) -> Result<MergeOutcome, MergeError> {
    let buf = HoodBuffer::from_slots(window.to_vec(), window.len() / 2)?;
    merge_round(&buf, opts)
}
