mod common;

use common::*;
use isoprofile::action_profile::*;
use isoprofile::graphings::*;
use isoprofile::tilings::{cube_tile, MultiTile, CenterSet};
use isoprofile::isoperimetry::GroupSubset;
use isoprofile::*;
use proptest::prelude::*;
use rand::Rng;

fn z12() -> Graphing {
    build_torus_action(&MarkedGroup::zd(1), 12).unwrap()
}

fn arcs(len: usize, total: usize) -> BoundedPartition {
    let labels: Vec<usize> = (0..total).map(|x| x / len).collect();
    BoundedPartition::from_cell_of(&labels, len).unwrap()
}

#[test]
fn boundary_mass_examples() {
    let g = z12();
    assert_eq!(boundary_mass(&g, &BoundedPartition::singletons(12)).unwrap().mass, q(1, 1));
    let whole = BoundedPartition::from_cell_of(&[0; 12], 12).unwrap();
    assert_eq!(boundary_mass(&g, &whole).unwrap().mass, q(0, 1));
    let r = boundary_mass(&g, &arcs(3, 12)).unwrap();
    assert_eq!(r.mass, q(2, 3));
    assert_eq!(r.boundary_set.len(), 8);
    assert_eq!(r.per_generator["e1"], q(1, 3));
}

#[test]
fn partitions_are_canonical() {
    let p = BoundedPartition::from_cell_of(&[5, 5, 2, 9, 2], 2).unwrap();
    assert_eq!(p.cell_of(), &[0, 0, 1, 2, 1]);
    assert_eq!(p.encode(), "0,1|2,4|3");
    assert_eq!(BoundedPartition::decode("0,1|2,4|3", 2).unwrap(), p);
    assert!(BoundedPartition::from_cell_of(&[0, 0, 0], 2).is_err());
    assert!(BoundedPartition::decode("0,1|1,2", 3).is_err());
}

#[test]
fn refinement_examples() {
    let g = z12();
    let mut labels = vec![0usize; 12];
    for (i, l) in labels.iter_mut().enumerate() {
        *l = i + 1;
    }
    for x in [0, 1, 6, 7] {
        labels[x] = 0;
    }
    let p = BoundedPartition::from_cell_of(&labels, 4).unwrap();
    let r = connected_refinement(&g, &p).unwrap();
    let cells = r.cells();
    assert!(cells.contains(&vec![0, 1]) && cells.contains(&vec![6, 7]));
    assert_eq!(boundary_mass(&g, &p).unwrap().mass, boundary_mass(&g, &r).unwrap().mass);
    let a = arcs(3, 12);
    assert_eq!(connected_refinement(&g, &a).unwrap(), a);
    let s = BoundedPartition::singletons(12);
    assert_eq!(connected_refinement(&g, &s).unwrap(), s);
}

#[test]
fn exact_profile_examples() {
    let g = z12();
    let r = profile_action_exact(&g, 1).unwrap();
    assert_eq!(r.value, q(1, 1));
    let r = profile_action_exact(&g, 3).unwrap();
    assert_eq!(r.value, q(2, 3));
    assert!(r.optimal);
    assert_eq!(r.partition.max_cell_size(), 3);
    assert_eq!(boundary_mass(&g, &r.partition).unwrap().mass, q(2, 3));
    let r = profile_action_exact(&g, 12).unwrap();
    assert_eq!(r.value, q(0, 1));
    assert!(profile_action_exact(&g, 0).is_err());
}

#[test]
fn z12_matches_partition_enumeration() {
    let g = z12();
    let oracle = partition_oracle(&g);
    let bb = SearchOptions {
        mode: Some(SearchMode::BranchAndBound),
        ..SearchOptions::default()
    };
    for n in 1..=12 {
        assert_eq!(profile_action_exact_with(&g, n, bb).unwrap().value, oracle[n - 1], "n={n}");
        assert_eq!(profile_action_exact(&g, n).unwrap().value, oracle[n - 1], "n={n}");
    }
}

#[test]
fn node_budget_gives_a_certified_bracket() {
    let g: Graphing = build_torus_action(&MarkedGroup::zd(2), 10).unwrap();
    let opts = SearchOptions {
        mode: Some(SearchMode::BranchAndBound),
        node_budget: 1000,
        ..SearchOptions::default()
    };
    let r = profile_action_exact_with(&g, 5, opts).unwrap();
    assert!(!r.optimal);
    assert!(r.nodes <= 1001);
    let full = profile_action_exact(&g, 5).unwrap();
    assert!(full.optimal);
    assert!(r.lower_bound <= full.value && full.value <= r.value);
    assert_eq!(boundary_mass(&g, &r.partition).unwrap().mass, r.value);
}

#[test]
fn tiling_profile_examples() {
    let g = z12();
    let z = MarkedGroup::zd(1);
    let t = GroupSubset::new(&z, (0..3).map(|i| GroupElement::Zd(vec![i]))).unwrap();
    let mt = MultiTile::tile(t, CenterSet::Lattice(vec![GroupElement::Zd(vec![3])])).unwrap();
    let tp = profile_action_tiling(&g, &mt, q(1, 4)).unwrap();
    assert_eq!(tp.value, q(2, 3));
    assert!(tp.within_guarantee());
    assert_eq!(tp.value, profile_action_exact(&g, 3).unwrap().value);

    let z2 = MarkedGroup::zd(2);
    let t6: Graphing = build_torus_action(&z2, 6).unwrap();
    let tp = profile_action_tiling(&t6, &cube_tile(&z2, 2).unwrap(), q(1, 10)).unwrap();
    assert_eq!(tp.value, q(1, 1));
    assert_eq!(tp.guaranteed, q(1, 1));

    // ℤ/7 with intervals of 3 leaves one point: coverage 6/7 < 1 - 1/10
    let c7: Graphing = build_torus_action(&z, 7).unwrap();
    assert!(matches!(
        profile_action_tiling(&c7, &mt, q(1, 10)),
        Err(Error::CoverageShortfall { .. })
    ));
    let tp = profile_action_tiling(&c7, &mt, q(1, 5)).unwrap();
    assert_eq!(tp.towers.leftover.len(), 1);
    assert!(tp.within_guarantee());
}

#[test]
fn iterated_boundary_examples() {
    let g = z12();
    let p = arcs(3, 12);
    let one = iterated_boundary(&g, &p, 1).unwrap();
    assert_eq!(one.boundary, boundary_mass(&g, &p).unwrap());
    let two = iterated_boundary(&g, &p, 2).unwrap();
    assert_eq!(two.boundary.mass, q(1, 1));
    assert!(two.boundary.mass <= two.telescoping_bound);
    assert!(iterated_boundary(&g, &p, 9).is_err());
}

#[test]
fn disintegration_examples() {
    let g = z12();
    for p in [BoundedPartition::singletons(12), arcs(3, 12), BoundedPartition::from_cell_of(&[0; 12], 12).unwrap()] {
        let r = disintegration_identity(&g, &p).unwrap();
        assert!(r.equal);
        assert_eq!(r.boundary_mass, r.cell_average);
    }
    let w = build_weighted_cycle(3, vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap();
    assert!(disintegration_identity(&w, &BoundedPartition::singletons(3)).is_err());
}

#[test]
fn weighted_witness_is_lex_first() {
    let w: Vec<Rational> = [1, 2, 3, 1, 1, 2].iter().map(|&x| q(x, 10)).collect();
    let g = build_weighted_cycle(6, w).unwrap();
    let oracle = partition_oracle(&g);
    for n in 1..=6 {
        let r = profile_action_exact(&g, n).unwrap();
        assert_eq!(r.value, oracle[n - 1]);
        // rerunning gives the same witness
        assert_eq!(profile_action_exact(&g, n).unwrap().partition, r.partition);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_keeps_mass(seed in any::<u64>(), v in 1usize..16) {
        let mut r = rng(seed);
        let g = random_graphing(&mut r, v);
        let cells = r.gen_range(1..=v);
        let labels = random_labels(&mut r, v, cells);
        let p = BoundedPartition::from_cell_of(&labels, v).unwrap();
        let c = connected_refinement(&g, &p).unwrap();
        prop_assert_eq!(boundary_mass(&g, &p).unwrap().mass, boundary_mass(&g, &c).unwrap().mass);
        prop_assert!(c.max_cell_size() <= p.max_cell_size());
        prop_assert_eq!(connected_refinement(&g, &c).unwrap(), c.clone());
        prop_assert_eq!(boundary_mass(&g, &c).unwrap().mass, direct_mass(&g, c.cell_of()));
    }

    #[test]
    fn search_modes_agree_with_enumeration(seed in any::<u64>(), v in 1usize..9) {
        let mut r = rng(seed);
        let g = random_graphing(&mut r, v);
        let oracle = partition_oracle(&g);
        for n in 1..=v {
            for mode in [SearchMode::Exhaustive, SearchMode::BranchAndBound] {
                let opts = SearchOptions { mode: Some(mode), ..SearchOptions::default() };
                let res = profile_action_exact_with(&g, n, opts).unwrap();
                prop_assert!(res.optimal);
                prop_assert_eq!(&res.value, &oracle[n - 1]);
                prop_assert!(res.partition.max_cell_size() <= n);
            }
        }
    }

    #[test]
    fn branch_and_bound_matches_exhaustive_on_larger_graphings(seed in any::<u64>(), v in 10usize..15) {
        let mut r = rng(seed);
        let g = random_graphing(&mut r, v);
        let n = r.gen_range(2..=5);
        let ex = profile_action_exact_with(&g, n, SearchOptions { mode: Some(SearchMode::Exhaustive), ..SearchOptions::default() }).unwrap();
        let bb = profile_action_exact_with(&g, n, SearchOptions { mode: Some(SearchMode::BranchAndBound), ..SearchOptions::default() }).unwrap();
        prop_assert_eq!(ex.value, bb.value.clone());
        prop_assert_eq!(bb.lower_bound, bb.value);
    }

    #[test]
    fn iterated_boundary_respects_telescoping(seed in any::<u64>(), m in 5usize..14, k in 1usize..3) {
        let mut r = rng(seed);
        let g: Graphing = build_torus_action(&MarkedGroup::zd(1), m).unwrap();
        let cells = r.gen_range(1..=m);
        let labels = random_labels(&mut r, m, cells);
        let p = BoundedPartition::from_cell_of(&labels, m).unwrap();
        let rep = iterated_boundary(&g, &p, k).unwrap();
        prop_assert!(rep.boundary.mass <= rep.telescoping_bound);
        prop_assert!(rep.boundary.mass >= boundary_mass(&g, &p).unwrap().mass);
    }

    #[test]
    fn disintegration_holds_on_uniform_tori(seed in any::<u64>(), m in 3usize..7) {
        let mut r = rng(seed);
        let g: Graphing = build_torus_action(&MarkedGroup::zd(2), m).unwrap();
        let v = m * m;
        let cells = r.gen_range(1..=v);
        let labels = random_labels(&mut r, v, cells);
        let p = BoundedPartition::from_cell_of(&labels, v).unwrap();
        prop_assert!(disintegration_identity(&g, &p).unwrap().equal);
    }
}
