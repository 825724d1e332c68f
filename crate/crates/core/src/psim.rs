//! Barrier-synchronous execution of thread-block kernels.
//!
//! A [`PhaseKernel`] is a fixed list of phases. Between two phases sits a
//! barrier. Within a phase every thread reads the snapshot left by the
//! previous barrier and emits writes; the engine audits the phase's accesses
//! and then applies the writes at the barrier. Block `b` owns the window
//! `[2 d b, 2 d (b + 1))` of every array, where `d = d1 * d2` is the number
//! of threads in a block.
//!
//! The audit is strict: two distinct threads writing one cell in one phase is
//! a conflict even when the values agree, and so is a thread reading a cell
//! another thread writes in the same phase.

use std::fmt;
use std::ops::{Add, AddAssign};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::Point2;

/// Launch geometry of one thread block: `d1` threads along x, `d2` along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockDims {
    pub d1: usize,
    pub d2: usize,
}

impl BlockDims {
    pub const fn new(d1: usize, d2: usize) -> Self {
        BlockDims { d1, d2 }
    }

    /// Dimensions for merging hoods of size `2^r`: `d1 = 2^ceil(r/2)`,
    /// `d2 = 2^floor(r/2)`.
    pub fn for_round(r: u32) -> Self {
        BlockDims {
            d1: 1 << r.div_ceil(2),
            d2: 1 << (r / 2),
        }
    }

    /// Threads per block, which is also the hood interval length.
    pub const fn d(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn round(&self) -> u32 {
        self.d().trailing_zeros()
    }

    /// Length of the slot window one block owns.
    pub const fn window(&self) -> usize {
        2 * self.d()
    }
}

/// Position of a thread in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThreadCoord {
    pub block: usize,
    pub x: usize,
    pub y: usize,
}

impl ThreadCoord {
    pub fn start(&self, dims: BlockDims) -> usize {
        self.block * dims.window()
    }

    pub fn indx(&self, dims: BlockDims) -> usize {
        self.x + dims.d1 * self.y
    }

    fn from_global(gid: usize, dims: BlockDims) -> Self {
        let tpb = dims.d();
        let indx = gid % tpb;
        ThreadCoord {
            block: gid / tpb,
            x: indx % dims.d1,
            y: indx / dims.d1,
        }
    }
}

impl fmt::Display for ThreadCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {} thread ({}, {})", self.block, self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArrayId {
    Hood,
    NewHood,
    Scratch,
}

impl ArrayId {
    const fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub array: ArrayId,
    pub index: i64,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.array {
            ArrayId::Hood => "hood",
            ArrayId::NewHood => "newhood",
            ArrayId::Scratch => "scratch",
        };
        write!(f, "{name}[{}]", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue {
    Point(Point2),
    Index(i32),
}

/// The three arrays shared by a merge launch.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeArrays {
    pub hood: Vec<Point2>,
    pub newhood: Vec<Point2>,
    pub scratch: Vec<i32>,
}

impl MergeArrays {
    /// `newhood` and `scratch` start out zeroed, standing in for freshly
    /// allocated device memory.
    pub fn new(hood: Vec<Point2>) -> Self {
        let n = hood.len();
        MergeArrays {
            hood,
            newhood: vec![Point2::default(); n],
            scratch: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.hood.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hood.is_empty()
    }

    fn in_bounds(&self, index: i64) -> Option<usize> {
        usize::try_from(index).ok().filter(|&i| i < self.hood.len())
    }

    fn store(&mut self, cell: Cell, value: CellValue) {
        let Some(i) = self.in_bounds(cell.index) else {
            return;
        };
        match (cell.array, value) {
            (ArrayId::Hood, CellValue::Point(p)) => self.hood[i] = p,
            (ArrayId::NewHood, CellValue::Point(p)) => self.newhood[i] = p,
            (ArrayId::Scratch, CellValue::Index(v)) => self.scratch[i] = v,
            _ => unreachable!("typed writers never mix cell kinds"),
        }
    }
}

#[derive(Debug, Default, Clone)]
struct AccessLog {
    reads: Vec<Cell>,
    writes: Vec<(Cell, CellValue)>,
}

impl AccessLog {
    fn clear(&mut self) {
        self.reads.clear();
        self.writes.clear();
    }
}

/// What a thread function sees: its coordinates, the pre-phase snapshot and a
/// write buffer.
///
/// Reads outside the arrays return `REMOTE` (points) or `-1` (scratch) and
/// writes outside the arrays are dropped; both are reported as out-of-window
/// accesses.
pub struct ThreadCtx<'a> {
    arrays: &'a MergeArrays,
    coord: ThreadCoord,
    dims: BlockDims,
    log: &'a mut AccessLog,
}

impl ThreadCtx<'_> {
    pub fn coord(&self) -> ThreadCoord {
        self.coord
    }

    pub fn dims(&self) -> BlockDims {
        self.dims
    }

    pub fn x(&self) -> usize {
        self.coord.x
    }

    pub fn y(&self) -> usize {
        self.coord.y
    }

    pub fn start(&self) -> i64 {
        self.coord.start(self.dims) as i64
    }

    pub fn indx(&self) -> i64 {
        self.coord.indx(self.dims) as i64
    }

    pub fn d(&self) -> i64 {
        self.dims.d() as i64
    }

    fn read_point(&mut self, array: ArrayId, index: i64) -> Point2 {
        self.log.reads.push(Cell { array, index });
        let src = match array {
            ArrayId::Hood => &self.arrays.hood,
            ArrayId::NewHood => &self.arrays.newhood,
            ArrayId::Scratch => unreachable!(),
        };
        match self.arrays.in_bounds(index) {
            Some(i) => src[i],
            None => crate::geom::REMOTE,
        }
    }

    pub fn hood(&mut self, index: i64) -> Point2 {
        self.read_point(ArrayId::Hood, index)
    }

    pub fn newhood(&mut self, index: i64) -> Point2 {
        self.read_point(ArrayId::NewHood, index)
    }

    pub fn scratch(&mut self, index: i64) -> i32 {
        self.log.reads.push(Cell {
            array: ArrayId::Scratch,
            index,
        });
        match self.arrays.in_bounds(index) {
            Some(i) => self.arrays.scratch[i],
            None => -1,
        }
    }

    pub fn set_hood(&mut self, index: i64, p: Point2) {
        self.log.writes.push((
            Cell {
                array: ArrayId::Hood,
                index,
            },
            CellValue::Point(p),
        ));
    }

    pub fn set_newhood(&mut self, index: i64, p: Point2) {
        self.log.writes.push((
            Cell {
                array: ArrayId::NewHood,
                index,
            },
            CellValue::Point(p),
        ));
    }

    pub fn set_scratch(&mut self, index: i64, v: i32) {
        self.log.writes.push((
            Cell {
                array: ArrayId::Scratch,
                index,
            },
            CellValue::Index(v),
        ));
    }
}

pub type ThreadFn<L> = fn(&mut ThreadCtx<'_>, &mut L);

/// One barrier-terminated phase.
pub struct Phase<L> {
    pub name: &'static str,
    pub run: ThreadFn<L>,
    /// Cells (array, offset from the block's window start) that some thread
    /// of every block must write in this phase.
    pub required: &'static [(ArrayId, usize)],
}

impl<L> Clone for Phase<L> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<L> Copy for Phase<L> {}

impl<L> fmt::Debug for Phase<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Phase")
            .field("name", &self.name)
            .field("required", &self.required)
            .finish()
    }
}

/// A phase program plus its launch geometry. `L` holds per-thread registers
/// that persist from phase to phase within one launch.
#[derive(Debug, Clone)]
pub struct PhaseKernel<L> {
    phases: Vec<Phase<L>>,
    grid: usize,
    dims: BlockDims,
}

impl<L> PhaseKernel<L> {
    pub fn new(phases: Vec<Phase<L>>, grid: usize, dims: BlockDims) -> Self {
        PhaseKernel { phases, grid, dims }
    }

    pub fn phases(&self) -> &[Phase<L>] {
        &self.phases
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn dims(&self) -> BlockDims {
        self.dims
    }

    pub fn threads(&self) -> usize {
        self.grid * self.dims.d()
    }

    /// The same kernel stopped after its first `count` phases.
    pub fn truncated(&self, count: usize) -> Self {
        PhaseKernel {
            phases: self.phases[..count.min(self.phases.len())].to_vec(),
            grid: self.grid,
            dims: self.dims,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseRef {
    pub index: usize,
    pub name: &'static str,
}

impl fmt::Display for PhaseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phase {} ({})", self.index, self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Conflict {
    /// Two threads wrote the same cell in one phase.
    WriteWrite {
        phase: PhaseRef,
        cell: Cell,
        first: ThreadCoord,
        second: ThreadCoord,
        first_value: CellValue,
        second_value: CellValue,
    },
    /// A cell was read by one thread and written by another in one phase.
    ReadWrite {
        phase: PhaseRef,
        cell: Cell,
        reader: ThreadCoord,
        writer: ThreadCoord,
    },
    /// An access outside the thread's block window.
    OutOfWindow {
        phase: PhaseRef,
        cell: Cell,
        thread: ThreadCoord,
        access: Access,
    },
    /// A cell the phase promises to write was left untouched.
    MissingWrite {
        phase: PhaseRef,
        block: usize,
        cell: Cell,
    },
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conflict::WriteWrite {
                phase,
                cell,
                first,
                second,
                first_value,
                second_value,
            } => write!(
                f,
                "{phase}: write-write on {cell} by {first} ({first_value:?}) and {second} ({second_value:?})"
            ),
            Conflict::ReadWrite {
                phase,
                cell,
                reader,
                writer,
            } => write!(f, "{phase}: {cell} read by {reader} and written by {writer}"),
            Conflict::OutOfWindow {
                phase,
                cell,
                thread,
                access,
            } => write!(f, "{phase}: {access:?} of {cell} outside the window of {thread}"),
            Conflict::MissingWrite { phase, block, cell } => {
                write!(f, "{phase}: block {block} never wrote {cell}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConflictReport {
    pub conflicts: Vec<Conflict>,
}

impl ConflictReport {
    pub fn is_clean(&self) -> bool {
        self.conflicts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.conflicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conflicts.is_empty()
    }

    pub fn write_write(&self) -> usize {
        self.count(|c| matches!(c, Conflict::WriteWrite { .. }))
    }

    pub fn read_write(&self) -> usize {
        self.count(|c| matches!(c, Conflict::ReadWrite { .. }))
    }

    pub fn out_of_window(&self) -> usize {
        self.count(|c| matches!(c, Conflict::OutOfWindow { .. }))
    }

    pub fn missing_writes(&self) -> usize {
        self.count(|c| matches!(c, Conflict::MissingWrite { .. }))
    }

    fn count(&self, pred: impl Fn(&Conflict) -> bool) -> usize {
        self.conflicts.iter().filter(|c| pred(c)).count()
    }

    pub fn extend(&mut self, other: ConflictReport) {
        self.conflicts.extend(other.conflicts);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepMetrics {
    pub launches: u64,
    pub barriers: u64,
    /// Threads times phases, summed over launches.
    pub thread_steps: u64,
}

impl Add for StepMetrics {
    type Output = StepMetrics;

    fn add(self, rhs: Self) -> Self {
        StepMetrics {
            launches: self.launches + rhs.launches,
            barriers: self.barriers + rhs.barriers,
            thread_steps: self.thread_steps + rhs.thread_steps,
        }
    }
}

impl AddAssign for StepMetrics {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for StepMetrics {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(StepMetrics::default(), Add::add)
    }
}

/// Order in which threads are evaluated and their writes applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalOrder {
    /// Blocks ascending, then `indx` ascending.
    #[default]
    Natural,
    /// A seeded random permutation of all threads.
    Shuffled(u64),
}

#[derive(Debug, Error)]
pub enum PsimError {
    #[error("array lengths differ: hood {hood}, newhood {newhood}, scratch {scratch}")]
    RaggedArrays {
        hood: usize,
        newhood: usize,
        scratch: usize,
    },
    #[error("grid of {grid} blocks with {window}-slot windows does not cover {len} slots")]
    Geometry {
        grid: usize,
        window: usize,
        len: usize,
    },
    #[error("{} access conflicts, first: {}", .0.len(), .0.conflicts[0])]
    Conflicts(ConflictReport),
}

#[derive(Debug, Clone)]
pub struct LaunchOutcome {
    pub arrays: MergeArrays,
    pub report: ConflictReport,
    pub metrics: StepMetrics,
}

impl LaunchOutcome {
    /// Escalates any audit finding to an error.
    pub fn strict(self) -> Result<Self, PsimError> {
        if self.report.is_clean() {
            Ok(self)
        } else {
            Err(PsimError::Conflicts(self.report))
        }
    }
}

/// Runs every phase of `kernel` over `arrays`, one thread at a time.
pub fn launch<L>(
    kernel: &PhaseKernel<L>,
    arrays: MergeArrays,
    order: EvalOrder,
) -> Result<LaunchOutcome, PsimError>
where
    L: Default + Clone + Send,
{
    execute(kernel, arrays, order, false)
}

/// Same contract as [`launch`], but the blocks of each phase are evaluated on
/// the rayon pool. Writes are still applied in `order`, so the result is
/// identical to [`launch`].
pub fn run_blocks_parallel<L>(
    kernel: &PhaseKernel<L>,
    arrays: MergeArrays,
    order: EvalOrder,
) -> Result<LaunchOutcome, PsimError>
where
    L: Default + Clone + Send,
{
    execute(kernel, arrays, order, true)
}

fn schedule(threads: usize, order: EvalOrder) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..threads).collect();
    if let EvalOrder::Shuffled(seed) = order {
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    ids
}

fn execute<L>(
    kernel: &PhaseKernel<L>,
    mut arrays: MergeArrays,
    order: EvalOrder,
    parallel: bool,
) -> Result<LaunchOutcome, PsimError>
where
    L: Default + Clone + Send,
{
    let n = arrays.hood.len();
    if arrays.newhood.len() != n || arrays.scratch.len() != n {
        return Err(PsimError::RaggedArrays {
            hood: n,
            newhood: arrays.newhood.len(),
            scratch: arrays.scratch.len(),
        });
    }
    let dims = kernel.dims;
    if kernel.grid * dims.window() != n {
        return Err(PsimError::Geometry {
            grid: kernel.grid,
            window: dims.window(),
            len: n,
        });
    }

    let tpb = dims.d();
    let threads = kernel.threads();
    let order = schedule(threads, order);
    let mut locals = vec![L::default(); threads];
    let mut logs = vec![AccessLog::default(); threads];
    let mut auditor = Auditor::new(n);
    let mut report = ConflictReport::default();

    for (index, phase) in kernel.phases.iter().enumerate() {
        let phase_ref = PhaseRef {
            index,
            name: phase.name,
        };
        let snapshot = &arrays;
        if parallel {
            locals
                .par_chunks_mut(tpb)
                .zip(logs.par_chunks_mut(tpb))
                .enumerate()
                .for_each(|(block, (block_locals, block_logs))| {
                    for (indx, (l, log)) in block_locals
                        .iter_mut()
                        .zip(block_logs.iter_mut())
                        .enumerate()
                    {
                        log.clear();
                        let coord = ThreadCoord::from_global(block * tpb + indx, dims);
                        let mut ctx = ThreadCtx {
                            arrays: snapshot,
                            coord,
                            dims,
                            log,
                        };
                        (phase.run)(&mut ctx, l);
                    }
                });
        } else {
            for &gid in &order {
                let log = &mut logs[gid];
                log.clear();
                let mut ctx = ThreadCtx {
                    arrays: snapshot,
                    coord: ThreadCoord::from_global(gid, dims),
                    dims,
                    log,
                };
                (phase.run)(&mut ctx, &mut locals[gid]);
            }
        }

        auditor.audit(
            phase_ref,
            phase.required,
            kernel.grid,
            dims,
            &order,
            &mut logs,
            &mut report,
        );

        for &gid in &order {
            for &(cell, value) in &logs[gid].writes {
                arrays.store(cell, value);
            }
        }
    }

    let phases = kernel.phases.len() as u64;
    Ok(LaunchOutcome {
        arrays,
        report,
        metrics: StepMetrics {
            launches: 1,
            barriers: phases,
            thread_steps: threads as u64 * phases,
        },
    })
}

const NO_WRITER: u32 = u32::MAX;

/// Per-phase write ownership, kept dense and reset by bumping an epoch.
struct Auditor {
    epoch: u32,
    stamp: [Vec<u32>; 3],
    writer: [Vec<u32>; 3],
    first_value: [Vec<CellValue>; 3],
}

impl Auditor {
    fn new(n: usize) -> Self {
        let dense = || [vec![0u32; n], vec![0u32; n], vec![0u32; n]];
        Auditor {
            epoch: 0,
            stamp: dense(),
            writer: [vec![NO_WRITER; n], vec![NO_WRITER; n], vec![NO_WRITER; n]],
            first_value: [
                vec![CellValue::Index(0); n],
                vec![CellValue::Index(0); n],
                vec![CellValue::Index(0); n],
            ],
        }
    }

    fn owner(&self, cell: Cell) -> Option<usize> {
        let i = usize::try_from(cell.index).ok()?;
        let a = cell.array.slot();
        (i < self.stamp[a].len() && self.stamp[a][i] == self.epoch)
            .then(|| self.writer[a][i] as usize)
    }

    #[allow(clippy::too_many_arguments)]
    fn audit(
        &mut self,
        phase: PhaseRef,
        required: &[(ArrayId, usize)],
        grid: usize,
        dims: BlockDims,
        order: &[usize],
        logs: &mut [AccessLog],
        report: &mut ConflictReport,
    ) {
        self.epoch += 1;
        let window = dims.window() as i64;
        let n = self.stamp[0].len() as i64;
        let outside = |thread: ThreadCoord, cell: Cell| {
            let lo = thread.block as i64 * window;
            cell.index < lo || cell.index >= lo + window || cell.index >= n
        };

        for &gid in order {
            let thread = ThreadCoord::from_global(gid, dims);
            for &(cell, value) in &logs[gid].writes {
                if outside(thread, cell) {
                    report.conflicts.push(Conflict::OutOfWindow {
                        phase,
                        cell,
                        thread,
                        access: Access::Write,
                    });
                }
                if cell.index < 0 || cell.index >= n {
                    continue;
                }
                let (a, i) = (cell.array.slot(), cell.index as usize);
                match self.owner(cell) {
                    Some(prev) if prev != gid => {
                        report.conflicts.push(Conflict::WriteWrite {
                            phase,
                            cell,
                            first: ThreadCoord::from_global(prev, dims),
                            second: thread,
                            first_value: self.first_value[a][i],
                            second_value: value,
                        });
                    }
                    Some(_) => {}
                    None => {
                        self.stamp[a][i] = self.epoch;
                        self.writer[a][i] = gid as u32;
                        self.first_value[a][i] = value;
                    }
                }
            }
        }

        for &gid in order {
            let thread = ThreadCoord::from_global(gid, dims);
            let reads = &mut logs[gid].reads;
            reads.sort_unstable();
            reads.dedup();
            for &cell in reads.iter() {
                if outside(thread, cell) {
                    report.conflicts.push(Conflict::OutOfWindow {
                        phase,
                        cell,
                        thread,
                        access: Access::Read,
                    });
                }
                if let Some(w) = self.owner(cell) {
                    if w != gid {
                        report.conflicts.push(Conflict::ReadWrite {
                            phase,
                            cell,
                            reader: thread,
                            writer: ThreadCoord::from_global(w, dims),
                        });
                    }
                }
            }
        }

        for block in 0..grid {
            for &(array, offset) in required {
                let cell = Cell {
                    array,
                    index: (block * dims.window() + offset) as i64,
                };
                if self.owner(cell).is_none() {
                    report
                        .conflicts
                        .push(Conflict::MissingWrite { phase, block, cell });
                }
            }
        }
    }
}
