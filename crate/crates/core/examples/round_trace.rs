//! Writes the per-round trace of a small input to stdout.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wagener_hull::build_hood;
use wagener_hull::cli::format::parse_trace;
use wagener_hull::instances::uniform_points;

fn main() -> io::Result<()> {
    let ps = uniform_points(16, &mut ChaCha8Rng::seed_from_u64(16));
    let mut trace = Vec::new();
    let hood = build_hood(&ps, Some(&mut trace)).expect("kernel run");
    io::stdout().write_all(&trace)?;

    let text = String::from_utf8(trace).unwrap();
    let sections = parse_trace(&text, ps.len()).expect("trace re-reads");
    eprintln!(
        "{} sections, final hood has {} corners",
        sections.len(),
        hood.len()
    );
    Ok(())
}
