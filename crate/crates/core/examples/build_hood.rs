//! Builds the hood of random points with the simulated kernel and checks it
//! against the monotone chain.
//!
//!     cargo run --example build_hood -- 4096 7

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wagener_hull::instances::uniform_points;
use wagener_hull::{oracle_upper_hull, run_rounds, BuildOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(1024, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let ps = uniform_points(n, &mut ChaCha8Rng::seed_from_u64(seed));
    let opts = BuildOptions {
        parallel: true,
        ..BuildOptions::default()
    };
    let run = run_rounds(&ps, &opts, None).expect("kernel run");
    for r in &run.rounds {
        let corners: usize = (0..r.buffer.block_count())
            .map(|b| r.buffer.block_corners(b).len())
            .sum();
        println!(
            "round {:>2}  d1={:<3} d2={:<3} blocks={:<5} corners={}",
            r.round.r,
            r.round.dims.d1,
            r.round.dims.d2,
            r.buffer.block_count(),
            corners
        );
    }
    let oracle = oracle_upper_hull(ps.points());
    println!(
        "hood has {} corners, matches oracle: {}",
        run.hood.len(),
        run.hood == oracle
    );
}
