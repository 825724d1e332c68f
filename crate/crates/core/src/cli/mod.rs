//! Command-line surface: `hull run` and `hull bench`.

pub mod format;
pub mod svg;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::driver::{run_rounds, BuildOptions, DriverError};
use crate::geom::Point2;
use crate::hoodbuf::{validate_points, HoodBuffer, PointError, PointSet};
use crate::oracle::oracle_upper_hull;

pub use format::ParseError;
pub use svg::emit_svg;

#[derive(Debug, Parser)]
#[command(
    name = "hull",
    about = "Upper hull by simulated parallel hood merging",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the hood of a point file and print it.
    Run(RunArgs),
    /// Print per-round launch, barrier, thread-step and conflict counts.
    Bench { input: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Mode {
    /// Simulated kernel only.
    #[default]
    Parallel,
    /// Serial monotone chain only.
    Serial,
    /// Both, failing if they disagree.
    Both,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    pub input: PathBuf,
    /// Write the intermediate hoods before every round.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Parallel)]
    pub mode: Mode,
    /// Render points and hood to an SVG file.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Treat any access conflict as an error.
    #[arg(long)]
    pub strict: bool,
}

impl RunArgs {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunArgs {
            input: input.into(),
            trace: None,
            mode: Mode::Parallel,
            svg: None,
            strict: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("can't open {}: {source}", path.display())]
    Open { path: PathBuf, source: io::Error },
    #[error("can't write {}: {source}", path.display())]
    Create { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Invalid(#[from] PointError),
    #[error(transparent)]
    Hood(#[from] DriverError),
    #[error("parallel and serial hoods differ (parallel {parallel} corners, serial {serial})")]
    Mismatch { parallel: usize, serial: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn read_points(path: &Path) -> Result<PointSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Open {
        path: path.to_owned(),
        source,
    })?;
    let points = format::parse_points(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })?;
    Ok(validate_points(points)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Create {
            path: path.to_owned(),
            source,
        })
}

/// Trace of the serial path: the oracle hull of every block before each
/// round, in the same grammar as the kernel trace.
fn write_oracle_trace(w: &mut dyn Write, ps: &PointSet) -> io::Result<()> {
    let n = ps.len();
    let mut d = 2;
    while d < n {
        let mut slots = Vec::with_capacity(n);
        for chunk in ps.points().chunks(d) {
            let hull = oracle_upper_hull(chunk);
            slots.extend_from_slice(&hull);
            slots.resize(slots.len() + d - hull.len(), crate::geom::REMOTE);
        }
        let buf = HoodBuffer::from_slots(slots, d).expect("power-of-two layout");
        format::write_trace_section(w, &buf)?;
        d *= 2;
    }
    format::write_trace_end(w)
}

fn parallel_hood(
    ps: &PointSet,
    args: &RunArgs,
    trace: Option<&mut dyn Write>,
    out: &mut dyn Write,
) -> Result<Vec<Point2>, CliError> {
    let opts = BuildOptions {
        parallel: true,
        strict: args.strict,
        ..BuildOptions::default()
    };
    let run = run_rounds(ps, &opts, trace)?;
    for r in &run.rounds {
        let dims = r.round.dims;
        writeln!(
            out,
            "#returned from match_and_merge, d1={}, d2={}, d={}",
            dims.d1,
            dims.d2,
            dims.d()
        )?;
        for c in &r.report.conflicts {
            writeln!(out, "# conflict: {c}")?;
        }
    }
    writeln!(
        out,
        "# launches {} barriers {} thread-steps {}",
        run.metrics.launches, run.metrics.barriers, run.metrics.thread_steps
    )?;
    Ok(run.hood)
}

/// `hull run`: echo the points, compute the hood, print it.
pub fn run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ps = read_points(&args.input)?;
    format::write_section(out, "points", ps.points())?;

    let mut trace_file = args.trace.as_deref().map(create).transpose()?;
    let trace = trace_file.as_mut().map(|w| w as &mut dyn Write);

    let hood = match args.mode {
        Mode::Parallel => parallel_hood(&ps, args, trace, out)?,
        Mode::Serial => {
            if let Some(w) = trace {
                write_oracle_trace(w, &ps)?;
            }
            oracle_upper_hull(ps.points())
        }
        Mode::Both => {
            let hood = parallel_hood(&ps, args, trace, out)?;
            let serial = oracle_upper_hull(ps.points());
            if hood != serial {
                return Err(CliError::Mismatch {
                    parallel: hood.len(),
                    serial: serial.len(),
                });
            }
            writeln!(out, "# serial and parallel hoods agree")?;
            hood
        }
    };
    if let Some(mut w) = trace_file {
        w.flush()?;
    }

    format::write_section(out, "hood", &hood)?;
    if let Some(path) = &args.svg {
        emit_svg(ps.points(), &hood, path).map_err(|source| CliError::Create {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

/// `hull bench`: one tab-separated row per round plus a total row.
pub fn bench(input: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let ps = read_points(input)?;
    let opts = BuildOptions {
        parallel: true,
        strict: false,
        ..BuildOptions::default()
    };
    let run = run_rounds(&ps, &opts, None)?;
    writeln!(
        out,
        "round\td1\td2\td\tblocks\tlaunches\tbarriers\tthread_steps\tconflicts"
    )?;
    let mut conflicts = 0;
    for r in &run.rounds {
        let dims = r.round.dims;
        conflicts += r.report.len();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.round.r,
            dims.d1,
            dims.d2,
            dims.d(),
            ps.len() / dims.window(),
            r.metrics.launches,
            r.metrics.barriers,
            r.metrics.thread_steps,
            r.report.len()
        )?;
    }
    let m = run.metrics;
    writeln!(
        out,
        "total\t-\t-\t-\t-\t{}\t{}\t{}\t{}",
        m.launches, m.barriers, m.thread_steps, conflicts
    )?;
    Ok(())
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(args) => run(args, out),
        Command::Bench { input } => bench(input, out),
    };
    match result.and_then(|()| out.flush().map_err(CliError::from)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hull: {e}");
            1
        }
    }
}
