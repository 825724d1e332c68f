//! Text grammars for point files, run output and round traces.
//!
//! Coordinates are written with the shortest decimal that parses back to the
//! same `f64`, so writing and re-reading a file is lossless.

use std::fmt;
use std::io::{self, Write};

use crate::geom::Point2;
use crate::hoodbuf::HoodBuffer;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Whitespace-separated tokens tagged with their 1-based line, skipping
/// lines whose first non-blank character is `#`.
fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .flat_map(|(k, l)| l.split_whitespace().map(move |t| (k + 1, t)))
}

fn last_line(text: &str) -> usize {
    text.lines().count().max(1)
}

/// Parses `n` followed by `n` pairs `x y`.
pub fn parse_points(text: &str) -> Result<Vec<Point2>, ParseError> {
    let mut toks = tokens(text);
    let (line, first) = toks
        .next()
        .ok_or_else(|| err(last_line(text), "missing point count"))?;
    let n: usize = first
        .parse()
        .map_err(|_| err(line, format!("expected a point count, found {first:?}")))?;
    let mut coord = |what: &str| -> Result<f64, ParseError> {
        let (line, t) = toks
            .next()
            .ok_or_else(|| err(last_line(text), format!("missing {what} coordinate")))?;
        t.parse()
            .map_err(|_| err(line, format!("expected {what} coordinate, found {t:?}")))
    };
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = coord("x")?;
        let y = coord("y")?;
        points.push(Point2::new(x, y));
    }
    if let Some((line, t)) = toks.next() {
        return Err(err(line, format!("unexpected trailing token {t:?}")));
    }
    Ok(points)
}

pub fn write_coord(w: &mut dyn Write, p: Point2) -> io::Result<()> {
    writeln!(w, "{} {}", p.x, p.y)
}

/// Input grammar: the count, then one `x y` line per point.
pub fn write_points(w: &mut dyn Write, points: &[Point2]) -> io::Result<()> {
    writeln!(w, "{}", points.len())?;
    points.iter().try_for_each(|&p| write_coord(w, p))
}

pub fn write_section(w: &mut dyn Write, label: &str, points: &[Point2]) -> io::Result<()> {
    writeln!(w, "{label} {}", points.len())?;
    points.iter().try_for_each(|&p| write_coord(w, p))
}

/// Parsed run output: the echoed points and the hood.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub points: Vec<Point2>,
    pub hood: Vec<Point2>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_coord_line(line: usize, l: &str) -> Result<Point2, ParseError> {
    let mut it = l.split_whitespace();
    let mut num = || -> Result<f64, ParseError> {
        it.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(line, format!("expected `x y`, found {l:?}")))
    };
    let p = Point2::new(num()?, num()?);
    match it.next() {
        None => Ok(p),
        Some(t) => Err(err(line, format!("unexpected token {t:?}"))),
    }
}

fn parse_labelled<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    label: &str,
) -> Result<Vec<Point2>, ParseError> {
    let (line, header) = lines
        .next()
        .ok_or_else(|| err(0, format!("missing `{label}` section")))?;
    let count = header
        .strip_prefix(label)
        .and_then(|rest| rest.trim().parse::<usize>().ok())
        .ok_or_else(|| {
            err(
                line,
                format!("expected `{label} <count>`, found {header:?}"),
            )
        })?;
    (0..count)
        .map(|_| {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(line, format!("`{label}` section is short")))?;
            parse_coord_line(line, l)
        })
        .collect()
}

/// Parses the output grammar: `points <n>` section then `hood <k>` section,
/// with `#` comment lines anywhere.
pub fn parse_output(text: &str) -> Result<RunOutput, ParseError> {
    let mut lines = content_lines(text);
    let points = parse_labelled(&mut lines, "points")?;
    let hood = parse_labelled(&mut lines, "hood")?;
    if let Some((line, l)) = lines.next() {
        return Err(err(line, format!("unexpected line {l:?}")));
    }
    Ok(RunOutput { points, hood })
}

/// One `d <d>` line, then for each block its corner count and corners.
pub fn write_trace_section(w: &mut dyn Write, buf: &HoodBuffer) -> io::Result<()> {
    writeln!(w, "d {}", buf.block_size())?;
    for b in 0..buf.block_count() {
        let corners = buf.block_corners(b);
        writeln!(w, "{}", corners.len())?;
        corners.iter().try_for_each(|&p| write_coord(w, p))?;
    }
    Ok(())
}

pub fn write_trace_end(w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "0")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSection {
    pub d: usize,
    pub hoods: Vec<Vec<Point2>>,
}

/// Parses a trace written for `n` points (needed to know the block count).
pub fn parse_trace(text: &str, n: usize) -> Result<Vec<TraceSection>, ParseError> {
    let mut lines = content_lines(text);
    let mut sections = Vec::new();
    loop {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(last_line(text), "missing terminator `0`"))?;
        if l == "0" {
            break;
        }
        let d = l
            .strip_prefix("d ")
            .and_then(|t| t.trim().parse::<usize>().ok())
            .filter(|&d| d > 0 && n.is_multiple_of(d))
            .ok_or_else(|| err(line, format!("expected `d <size>` or `0`, found {l:?}")))?;
        let mut hoods = Vec::with_capacity(n / d);
        for _ in 0..n / d {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(line, "trace section is short"))?;
            let k: usize = l
                .parse()
                .map_err(|_| err(line, format!("expected hood size, found {l:?}")))?;
            let hood = (0..k)
                .map(|_| {
                    let (line, l) = lines.next().ok_or_else(|| err(line, "hood is short"))?;
                    parse_coord_line(line, l)
                })
                .collect::<Result<Vec<_>, _>>()?;
            hoods.push(hood);
        }
        sections.push(TraceSection { d, hoods });
    }
    if let Some((line, l)) = lines.next() {
        return Err(err(
            line,
            format!("unexpected line after terminator: {l:?}"),
        ));
    }
    Ok(sections)
}
