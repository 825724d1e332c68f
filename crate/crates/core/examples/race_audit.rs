//! The access auditor on a deliberately racy kernel, then on the real one.

use wagener_hull::instances::uniform_points;
use wagener_hull::kernel::match_and_merge_kernel;
use wagener_hull::psim::{
    launch, ArrayId, BlockDims, EvalOrder, MergeArrays, Phase, PhaseKernel, ThreadCtx,
};

// every thread of a block writes its own index into the same cell
fn clobber(ctx: &mut ThreadCtx<'_>, _: &mut ()) {
    let (s, v) = (ctx.start(), ctx.indx() as i32);
    ctx.set_scratch(s, v);
}

// reads a neighbour's cell that the neighbour writes in the same phase
fn peek(ctx: &mut ThreadCtx<'_>, _: &mut ()) {
    let (s, i) = (ctx.start(), ctx.indx());
    let next = ctx.scratch(s + (i + 1) % ctx.d());
    ctx.set_scratch(s + i, next + 1);
}

fn stray(ctx: &mut ThreadCtx<'_>, _: &mut ()) {
    let s = ctx.start();
    if ctx.indx() == 0 {
        ctx.set_scratch(s + 2 * ctx.d(), 1);
    }
}

fn idle(_: &mut ThreadCtx<'_>, _: &mut ()) {}

fn main() {
    let racy: PhaseKernel<()> = PhaseKernel::new(
        vec![
            Phase {
                name: "clobber",
                run: clobber,
                required: &[],
            },
            Phase {
                name: "peek",
                run: peek,
                required: &[],
            },
            Phase {
                name: "stray",
                run: stray,
                required: &[],
            },
            Phase {
                name: "idle",
                run: idle,
                required: &[(ArrayId::Scratch, 1)],
            },
        ],
        2,
        BlockDims::new(2, 2),
    );
    let ps = uniform_points(16, &mut rand::thread_rng());
    let out = launch(
        &racy,
        MergeArrays::new(ps.points().to_vec()),
        EvalOrder::Natural,
    )
    .unwrap();
    let r = &out.report;
    println!(
        "racy kernel: {} write-write, {} read-write, {} out-of-window, {} missing",
        r.write_write(),
        r.read_write(),
        r.out_of_window(),
        r.missing_writes()
    );
    for c in r.conflicts.iter().take(6) {
        println!("  {c}");
    }

    let merge = match_and_merge_kernel(4, BlockDims::new(2, 1));
    let buf = wagener_hull::init_hood(&ps);
    let out = launch(
        &merge,
        MergeArrays::new(buf.into_slots()),
        EvalOrder::Shuffled(42),
    )
    .unwrap();
    println!(
        "merge kernel, shuffled order: {} conflicts",
        out.report.len()
    );
}
