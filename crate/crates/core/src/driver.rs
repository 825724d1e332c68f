//! Host-side round loop: one merge launch per doubling of the hood size.

use std::io::{self, Write};

use thiserror::Error;

use crate::cli::format::{write_trace_end, write_trace_section};
use crate::geom::Point2;
use crate::hoodbuf::{init_hood, HoodBuffer, PointSet};
use crate::kernel::{merge_round, MergeError, MergeOptions, Splice};
use crate::psim::{BlockDims, ConflictReport, EvalOrder, StepMetrics};

/// One launch of the schedule: merges hoods of size `d` into hoods of `2d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    pub r: u32,
    pub dims: BlockDims,
}

impl Round {
    pub fn d(&self) -> usize {
        self.dims.d()
    }
}

/// Rounds for `n` points: start at `d1 = 2, d2 = 1` and double the smaller
/// side (`d2` on ties going to `d1`) until `d` reaches `n`.
pub fn round_schedule(n: usize) -> Vec<Round> {
    let mut rounds = Vec::new();
    let (mut d1, mut d2) = (2usize, 1usize);
    let mut d = d1 * d2;
    while d < n {
        rounds.push(Round {
            r: d.trailing_zeros(),
            dims: BlockDims::new(d1, d2),
        });
        if d1 > d2 {
            d2 *= 2;
        } else {
            d1 *= 2;
        }
        d = d1 * d2;
    }
    rounds
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub parallel: bool,
    pub order: EvalOrder,
    /// Fail on the first round with a non-empty conflict report.
    pub strict: bool,
    pub splice: Splice,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            parallel: false,
            order: EvalOrder::Natural,
            strict: true,
            splice: Splice::FillFirst,
        }
    }
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("round {round}: block {block} has no unique common tangent")]
    DegenerateTangent { round: u32, block: usize },
    #[error("round {round}: {source}")]
    Merge {
        round: u32,
        #[source]
        source: MergeError,
    },
    #[error("round {round}: {} access conflicts, first: {}", report.len(), report.conflicts[0])]
    Conflicts { round: u32, report: ConflictReport },
    #[error("writing trace: {0}")]
    Trace(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub round: Round,
    /// Buffer after the round, in blocks of `2d`.
    pub buffer: HoodBuffer,
    /// `(pindex, qindex)` per block, as absolute slot indices.
    pub tangents: Vec<(usize, usize)>,
    pub report: ConflictReport,
    pub metrics: StepMetrics,
}

#[derive(Debug, Clone)]
pub struct HoodRun {
    pub hood: Vec<Point2>,
    pub rounds: Vec<RoundOutcome>,
    pub metrics: StepMetrics,
}

impl HoodRun {
    pub fn report(&self) -> ConflictReport {
        let mut all = ConflictReport::default();
        for r in &self.rounds {
            all.extend(r.report.clone());
        }
        all
    }
}

/// Runs every round and keeps the per-round buffers, tangents and audits.
/// With a trace sink, writes the hoods present before each round followed by
/// the terminator.
pub fn run_rounds(
    ps: &PointSet,
    opts: &BuildOptions,
    mut trace: Option<&mut dyn Write>,
) -> Result<HoodRun, DriverError> {
    let mut buffer = init_hood(ps);
    let mut rounds = Vec::new();
    let merge_opts = MergeOptions {
        parallel: opts.parallel,
        order: opts.order,
        splice: opts.splice,
    };

    for round in round_schedule(ps.len()) {
        if let Some(w) = trace.as_deref_mut() {
            write_trace_section(w, &buffer)?;
        }
        let out = merge_round(&buffer, &merge_opts).map_err(|e| match e {
            MergeError::DegenerateTangent { block } => DriverError::DegenerateTangent {
                round: round.r,
                block,
            },
            source => DriverError::Merge {
                round: round.r,
                source,
            },
        })?;
        if opts.strict && !out.report.is_clean() {
            return Err(DriverError::Conflicts {
                round: round.r,
                report: out.report,
            });
        }
        let tangents = (0..out.hood.block_count())
            .map(|b| out.tangent(b))
            .collect();
        buffer = out.hood;
        rounds.push(RoundOutcome {
            round,
            buffer: buffer.clone(),
            tangents,
            report: out.report,
            metrics: out.metrics,
        });
    }
    if let Some(w) = trace {
        write_trace_end(w)?;
    }

    let metrics = rounds.iter().map(|r| r.metrics).sum();
    Ok(HoodRun {
        hood: buffer.block_corners(0).to_vec(),
        rounds,
        metrics,
    })
}

/// Upper hull of `ps`, left to right, computed by the simulated kernel.
pub fn build_hood(
    ps: &PointSet,
    trace: Option<&mut dyn Write>,
) -> Result<Vec<Point2>, DriverError> {
    Ok(run_rounds(ps, &BuildOptions::default(), trace)?.hood)
}

/// Launch, barrier and thread-step totals for building the hood of `ps`.
pub fn round_metrics(ps: &PointSet) -> Result<StepMetrics, DriverError> {
    Ok(run_rounds(ps, &BuildOptions::default(), None)?.metrics)
}
