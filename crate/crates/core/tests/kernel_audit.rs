use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wagener_hull::instances::{random_hood_pair, PairStyle};
use wagener_hull::kernel::{
    classify_f_in, match_and_merge_kernel, merge_round, MergeOptions, ThreadLocals,
};
use wagener_hull::psim::{launch, Conflict, MergeArrays, Phase, PhaseKernel, ThreadCtx};
use wagener_hull::{brute_common_tangent, oracle_upper_hull, BlockDims, EvalOrder, HoodBuffer};

fn pair(d: usize, style: usize, seed: u64) -> HoodBuffer {
    let style = [PairStyle::Uniform, PairStyle::Arc, PairStyle::JitteredArc][style % 3];
    random_hood_pair(d, style, &mut ChaCha8Rng::seed_from_u64(seed)).1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn merge_ignores_evaluation_order(
        r in 1u32..7, style in 0usize..3, seed: u64, order_seed: u64, parallel: bool,
    ) {
        let buf = pair(1 << r, style, seed);
        let base = merge_round(&buf, &MergeOptions::default()).unwrap();
        let opts = MergeOptions {
            parallel,
            order: EvalOrder::Shuffled(order_seed),
            ..MergeOptions::default()
        };
        let other = merge_round(&buf, &opts).unwrap();
        prop_assert!(base.report.is_clean());
        prop_assert!(other.report.is_clean());
        prop_assert_eq!(&base.hood, &other.hood);
        prop_assert_eq!(&base.scratch, &other.scratch);

        let (p, q) = (buf.block_corners(0), buf.block_corners(1));
        let (a, b) = brute_common_tangent(p, q).unwrap();
        let d = buf.block_size();
        prop_assert_eq!(base.tangent(0), (a, d + b));
        let all = [p, q].concat();
        prop_assert_eq!(base.hood.block_corners(0), &oracle_upper_hull(&all)[..]);
    }
}

fn mutant(
    dims: BlockDims,
    replace: Option<(usize, Phase<ThreadLocals>)>,
    insert: Option<(usize, Phase<ThreadLocals>)>,
) -> PhaseKernel<ThreadLocals> {
    let mut phases = match_and_merge_kernel(1, dims).phases().to_vec();
    if let Some((k, p)) = replace {
        phases[k] = p;
    }
    if let Some((k, p)) = insert {
        phases.insert(k, p);
    }
    PhaseKernel::new(phases, 1, dims)
}

fn audit(kernel: &PhaseKernel<ThreadLocals>, buf: &HoodBuffer) -> Vec<Conflict> {
    launch(
        kernel,
        MergeArrays::new(buf.slots().to_vec()),
        EvalOrder::Natural,
    )
    .unwrap()
    .report
    .conflicts
}

fn phase_of(c: &Conflict) -> &'static str {
    match c {
        Conflict::WriteWrite { phase, .. }
        | Conflict::ReadWrite { phase, .. }
        | Conflict::OutOfWindow { phase, .. }
        | Conflict::MissingWrite { phase, .. } => phase.name,
    }
}

// k0 search with every row writing, as a column-only condition would do
fn mam3_all_rows(ctx: &mut ThreadCtx<'_>, t: &mut ThreadLocals) {
    let (start, d) = (ctx.start(), ctx.d());
    let (d1, d2) = (ctx.dims().d1 as i64, ctx.dims().d2 as i64);
    let x = ctx.x() as i64;
    t.j = ctx.scratch(start + d + x) as i64;
    let here = classify_f_in(ctx, t.i, t.j, start, d);
    let next_ok = x == d1 - 1 || ctx.hood(t.i + d2).is_remote() || {
        let next_j = ctx.scratch(start + d + x + 1) as i64;
        classify_f_in(ctx, t.i + d2, next_j, start, d).code() == 1
    };
    if !ctx.hood(t.i).is_remote() && here.code() <= 0 && next_ok {
        ctx.set_scratch(start, t.i as i32);
    }
}

fn idle(_: &mut ThreadCtx<'_>, _: &mut ThreadLocals) {}

fn pile_on(ctx: &mut ThreadCtx<'_>, _: &mut ThreadLocals) {
    let s = ctx.start();
    let p = ctx.hood(s + ctx.indx());
    ctx.set_newhood(s, p);
}

fn shift_left(ctx: &mut ThreadCtx<'_>, _: &mut ThreadLocals) {
    let (s, i) = (ctx.start(), ctx.indx());
    let p = ctx.newhood(s + i + 1);
    ctx.set_newhood(s + i, p);
}

fn overreach(ctx: &mut ThreadCtx<'_>, _: &mut ThreadLocals) {
    let (s, i, d) = (ctx.start(), ctx.indx(), ctx.d());
    ctx.set_scratch(s + 2 * d + i, 0);
}

#[test]
fn real_kernel_is_clean() {
    for r in 1..7 {
        let buf = pair(1 << r, r as usize, r as u64);
        assert!(audit(&match_and_merge_kernel(1, BlockDims::for_round(r)), &buf).is_empty());
    }
}

#[test]
fn every_row_writing_k0_is_a_write_write() {
    let dims = BlockDims::for_round(3);
    let buf = pair(8, 1, 3);
    let k = mutant(
        dims,
        Some((
            3,
            Phase {
                name: "mam3 all rows",
                run: mam3_all_rows,
                required: &[],
            },
        )),
        None,
    );
    let found = audit(&k, &buf);
    assert!(!found.is_empty());
    assert!(found
        .iter()
        .all(|c| matches!(c, Conflict::WriteWrite { .. }) && phase_of(c) == "mam3 all rows"));
}

#[test]
fn skipping_the_pinpoint_is_a_missing_write() {
    let dims = BlockDims::for_round(2);
    let required = match_and_merge_kernel(1, dims).phases()[5].required;
    let k = mutant(
        dims,
        Some((
            5,
            Phase {
                name: "no pinpoint",
                run: idle,
                required,
            },
        )),
        None,
    );
    let found = audit(&k, &pair(4, 0, 8));
    assert_eq!(found.len(), 2);
    assert!(found
        .iter()
        .all(|c| matches!(c, Conflict::MissingWrite { .. })));
}

type Kind = fn(&Conflict) -> bool;

#[test]
fn injected_races_are_reported_in_their_phase() {
    let dims = BlockDims::for_round(2);
    let buf = pair(4, 2, 21);
    let cases: [(Phase<ThreadLocals>, Kind); 3] = [
        (
            Phase {
                name: "pile on",
                run: pile_on,
                required: &[],
            },
            |c| matches!(c, Conflict::WriteWrite { .. }),
        ),
        (
            Phase {
                name: "shift left",
                run: shift_left,
                required: &[],
            },
            |c| matches!(c, Conflict::ReadWrite { .. }),
        ),
        (
            Phase {
                name: "overreach",
                run: overreach,
                required: &[],
            },
            |c| matches!(c, Conflict::OutOfWindow { .. }),
        ),
    ];
    for (phase, kind) in cases {
        let name = phase.name;
        let found = audit(&mutant(dims, None, Some((7, phase))), &buf);
        assert!(!found.is_empty(), "{name}");
        assert!(
            found.iter().all(|c| phase_of(c) == name && kind(c)),
            "{name}: {found:?}"
        );
    }
}
