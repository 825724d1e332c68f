//! Launches, barriers and thread steps as the input doubles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wagener_hull::instances::uniform_points;
use wagener_hull::round_metrics;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    println!(
        "{:>6} {:>8} {:>8} {:>12} {:>10}",
        "n", "launches", "barriers", "thread_steps", "steps/n"
    );
    for r in 1..=14 {
        let n = 1usize << r;
        let ps = uniform_points(n, &mut rng);
        let m = round_metrics(&ps).expect("kernel run");
        println!(
            "{:>6} {:>8} {:>8} {:>12} {:>10.2}",
            n,
            m.launches,
            m.barriers,
            m.thread_steps,
            m.thread_steps as f64 / n as f64
        );
    }
}
