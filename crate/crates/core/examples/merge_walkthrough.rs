//! One merge of two 2-point hoods, printing scratch after every phase.

use wagener_hull::kernel::{match_and_merge_kernel, ThreadLocals};
use wagener_hull::psim::{launch, BlockDims, EvalOrder, MergeArrays, PhaseKernel};
use wagener_hull::Point2;

fn main() {
    let hood = vec![
        Point2::new(0.1, 0.5),
        Point2::new(0.2, 0.6),
        Point2::new(0.6, 0.9),
        Point2::new(0.7, 0.2),
    ];
    let full: PhaseKernel<ThreadLocals> = match_and_merge_kernel(1, BlockDims::new(2, 1));

    for k in 1..=full.phases().len() {
        let out = launch(
            &full.truncated(k),
            MergeArrays::new(hood.clone()),
            EvalOrder::Natural,
        )
        .expect("geometry is fixed");
        println!(
            "{:<22} scratch={:?}",
            full.phases()[k - 1].name,
            out.arrays.scratch
        );
    }

    let out = launch(&full, MergeArrays::new(hood), EvalOrder::Natural).unwrap();
    println!("merged hood:");
    for p in &out.arrays.newhood {
        println!("  {p}");
    }
    println!("{} conflicts", out.report.len());
}
