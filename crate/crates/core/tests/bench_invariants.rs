//! Li & Lim parsing and offset-merge properties.

use gatx_core::bench::{self, LiLimInstance, MergeSpec, MergeSuite};
use gatx_core::gat::{self, GatConfig};
use gatx_core::pdptw;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small file in the published layout: integer coordinates, wide
/// windows, `pairs` pickup/delivery pairs with ids 2k-1 / 2k.
fn small_file(seed: u64, pairs: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = format!("{}\t{}\t1\n", 3, 20);
    s.push_str(&format!("0\t{}\t{}\t0\t0\t1000\t0\t0\t0\n", rng.gen_range(20..40), rng.gen_range(20..40)));
    for k in 1..=pairs {
        let (p, d) = (2 * k - 1, 2 * k);
        let q = rng.gen_range(1..=10);
        let e = rng.gen_range(0..200);
        s.push_str(&format!(
            "{p}\t{}\t{}\t{q}\t{e}\t{}\t10\t0\t{d}\n",
            rng.gen_range(0..60),
            rng.gen_range(0..60),
            e + 300
        ));
        s.push_str(&format!("{d}\t{}\t{}\t-{q}\t0\t1000\t10\t{p}\t0\n", rng.gen_range(0..60), rng.gen_range(0..60)));
    }
    s
}

fn parsed(seed: u64, pairs: usize) -> LiLimInstance {
    bench::parse_li_lim(&small_file(seed, pairs)).expect("generated file parses")
}

#[test]
fn shipped_table1_config_matches_builtin_rows() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/table1.toml");
    let suite = MergeSuite::from_toml(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(suite.merge, bench::table1_specs());
}

#[test]
fn class_file_resolves_every_pair() {
    let (lc, _) = bench::load_li_lim("LC1_2_2", None).unwrap();
    let pairs = lc.pairs();
    assert_eq!(1 + 2 * pairs.len(), lc.rows.len());
    for (p, d) in pairs {
        assert_eq!(lc.rows[p].demand + lc.rows[d].demand, 0);
        assert_eq!(lc.rows[d].pickup_ref, lc.rows[p].id);
    }
}

#[test]
fn identical_files_without_offset_give_symmetric_lsps() {
    let a = parsed(7, 4);
    let inst = bench::offset_merge(&MergeSpec::new("a", "a", (0.0, 0.0)), &a, &a).unwrap();
    let init = pdptw::initial_solution(&inst, &Default::default()).unwrap();
    assert_eq!(init.baseline[0], init.baseline[1]);
    let half = inst.orders.len() / 2;
    for (x, y) in inst.orders[..half].iter().zip(&inst.orders[half..]) {
        assert_eq!(inst.matrix.distance(x.pickup.loc, y.pickup.loc), 0);
        assert_eq!((x.pickup.st, x.dropoff.et, x.pickup.vol), (y.pickup.st, y.dropoff.et, y.pickup.vol));
    }
}

/// Clusters a million units apart: nothing can be gained by exchanging.
#[test]
fn distant_clusters_gain_nothing() {
    let (a, b) = (parsed(1, 5), parsed(2, 5));
    let far = bench::offset_merge(&MergeSpec::new("a", "b", (1e6, 1e6)), &a, &b).unwrap();
    let out = gat::run(&far, &GatConfig { max_iterations: 2, ..Default::default() }).unwrap();
    assert_eq!(gatx_core::model::social_welfare(&out.solution, &far).unwrap(), Some(0.0));
    assert_eq!(out.solution.baseline, gatx_core::model::lsp_profits(&out.solution, &far).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn text_round_trip(seed in any::<u64>(), pairs in 1usize..8) {
        let inst = parsed(seed, pairs);
        let again = bench::parse_li_lim(&inst.to_text()).unwrap();
        prop_assert_eq!(&again, &inst);
        prop_assert_eq!(again.to_text(), inst.to_text());
    }

    #[test]
    fn merged_counts_add_up(sa in any::<u64>(), sb in any::<u64>(), na in 1usize..6, nb in 1usize..6,
                            dx in -100i32..100, dy in -100i32..100) {
        let (a, b) = (parsed(sa, na), parsed(sb, nb));
        let inst = bench::offset_merge(&MergeSpec::new("a", "b", (dx as f64, dy as f64)), &a, &b).unwrap();
        prop_assert_eq!(inst.orders.len(), na + nb);
        prop_assert_eq!(inst.matrix.len(), a.rows.len() + b.rows.len());
        prop_assert_eq!(inst.vehicles.len(), a.vehicle_count + b.vehicle_count);
        // the second depot moved with its file
        let depot_b = &inst.locations[a.rows.len()];
        prop_assert_eq!((depot_b.x, depot_b.y), (b.rows[0].x + dx as f64, b.rows[0].y + dy as f64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Moving both files by the same vector changes coordinates only.
    #[test]
    fn translation_invariance(sa in any::<u64>(), sb in any::<u64>(),
                              tx in -500i32..500, ty in -500i32..500) {
        let (a, b) = (parsed(sa, 4), parsed(sb, 4));
        let spec = MergeSpec::new("a", "b", (12.0, -7.0));
        let base = bench::offset_merge(&spec, &a, &b).unwrap();
        let moved = bench::offset_merge(&spec, &a.translated(tx as f64, ty as f64), &b.translated(tx as f64, ty as f64)).unwrap();
        prop_assert_eq!(&moved.matrix, &base.matrix);
        let cfg = GatConfig { max_iterations: 2, ..Default::default() };
        let r0 = gat::run(&base, &cfg).unwrap();
        let r1 = gat::run(&moved, &cfg).unwrap();
        prop_assert_eq!(r0.solution, r1.solution);
    }
}
