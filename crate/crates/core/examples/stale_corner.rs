//! A merge where copying all of P before splicing Q leaves old corners behind.

use wagener_hull::hoodbuf::validate_hood;
use wagener_hull::kernel::{match_and_merge_block, MergeOptions, Splice};
use wagener_hull::{oracle_upper_hull, Point2, REMOTE};

fn main() {
    let p = [(0.1, 0.9), (0.2, 0.85), (0.3, 0.75), (0.4, 0.6)];
    let q = [(0.6, 0.55), (0.7, 0.72), (0.8, 0.83), (0.9, 0.88)];
    let all: Vec<Point2> = p
        .iter()
        .chain(&q)
        .map(|&(x, y)| Point2::new(x, y))
        .collect();
    println!("expected: {:?}", oracle_upper_hull(&all));

    for splice in [Splice::FillFirst, Splice::HalfFill] {
        let opts = MergeOptions {
            splice,
            ..MergeOptions::default()
        };
        let out = match_and_merge_block(&all, &opts).expect("merge");
        let slots: Vec<String> = out
            .hood
            .slots()
            .iter()
            .map(|s| {
                if *s == REMOTE {
                    "R".into()
                } else {
                    format!("({}, {})", s.x, s.y)
                }
            })
            .collect();
        let clean = validate_hood(&out.hood).is_clean();
        println!("{splice:?}: [{}] valid={clean}", slots.join(", "));
    }
}
