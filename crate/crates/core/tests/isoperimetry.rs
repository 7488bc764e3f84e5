mod common;

use std::collections::BTreeSet;

use common::q;
use isoprofile::isoperimetry::*;
use isoprofile::tilings::{cube, heisenberg_cuboid};
use isoprofile::*;
use proptest::prelude::*;

fn zd(v: &[i64]) -> GroupElement {
    GroupElement::Zd(v.to_vec())
}

fn square(k: i64) -> GroupSubset {
    GroupSubset::new(&MarkedGroup::zd(2), (0..k).flat_map(|x| (0..k).map(move |y| zd(&[x, y])))).unwrap()
}

/// `|∂F_n|` counted on coordinate triples.
fn cuboid_boundary(n: i64) -> usize {
    let pts: BTreeSet<(i64, i64, i64)> = (0..=n)
        .flat_map(|a| (0..=n).flat_map(move |b| (0..=n * n).map(move |c| (a, b, c))))
        .collect();
    pts.iter()
        .filter(|&&(a, b, c)| {
            // x^{±1}·(a,b,c) = (a±1, b, c±b); y^{±1}·(a,b,c) = (a, b±1, c)
            [(a + 1, b, c + b), (a - 1, b, c - b), (a, b + 1, c), (a, b - 1, c)]
                .iter()
                .any(|p| !pts.contains(p))
        })
        .count()
}

#[test]
fn inner_boundary_examples() {
    let z = MarkedGroup::zd(1);
    let f = GroupSubset::new(&z, (0..5).map(|i| zd(&[i]))).unwrap();
    let b: Vec<GroupElement> = f.inner_boundary().iter().cloned().collect();
    assert_eq!(b, vec![zd(&[0]), zd(&[4])]);

    let sq = square(3);
    let perimeter = sq.inner_boundary();
    assert_eq!(perimeter.len(), 8);
    assert!(!perimeter.contains(&zd(&[1, 1])));
}

#[test]
fn cuboid_boundary_matches_direct_count() {
    let h = MarkedGroup::heisenberg();
    for n in 1..=5 {
        let f = heisenberg_cuboid(&h, n as usize).unwrap();
        assert_eq!(f.len(), ((n + 1) * (n + 1) * (n * n + 1)) as usize);
        assert_eq!(f.boundary_size(), cuboid_boundary(n), "n={n}");
    }
    let f4 = heisenberg_cuboid(&h, 4).unwrap();
    assert_eq!(f4.boundary_size(), 308);
    assert_eq!(f4.boundary_ratio::<Rational>().unwrap(), q(308, 425));
}

#[test]
fn outer_boundary_examples() {
    let z = MarkedGroup::zd(1);
    let window = GroupSubset::new(&z, z.ball(2).unwrap().elements().iter().cloned()).unwrap();
    let single = GroupSubset::new(&z, [zd(&[0])]).unwrap();
    let out: Vec<GroupElement> = single.outer_boundary(&window).unwrap().iter().cloned().collect();
    assert_eq!(out, vec![zd(&[-1]), zd(&[1])]);

    let z2 = MarkedGroup::zd(2);
    let window = GroupSubset::new(&z2, z2.ball(6).unwrap().elements().iter().cloned()).unwrap();
    let out = square(2).outer_boundary(&window).unwrap();
    assert_eq!(out.len(), 8);
    assert!(out.iter().all(|g| !square(2).contains(g)));
}

#[test]
fn ratio_examples() {
    let z = MarkedGroup::zd(1);
    let ten = GroupSubset::new(&z, (0..10).map(|i| zd(&[i]))).unwrap();
    assert_eq!(ten.boundary_ratio::<Rational>().unwrap(), q(1, 5));
    let z2 = MarkedGroup::zd(2);
    let plus = GroupSubset::new(
        &z2,
        [zd(&[0, 0]), zd(&[1, 0]), zd(&[-1, 0]), zd(&[0, 1]), zd(&[0, -1])],
    )
    .unwrap();
    assert_eq!(plus.boundary_ratio::<Rational>().unwrap(), q(4, 5));
    let f: f64 = plus.boundary_ratio().unwrap();
    assert_eq!(f, 0.8);
}

#[test]
fn z_profile_is_two_over_n() {
    let run = profile_exact::<Rational>(&MarkedGroup::zd(1), 10);
    assert!(run.complete);
    let values: Vec<Rational> = run.points.iter().map(|p| p.value.clone()).collect();
    let mut want = vec![q(1, 1)];
    want.extend((2..=10).map(|n| q(2, n)));
    assert_eq!(values, want);
}

#[test]
fn profile_witnesses_are_consistent() {
    for g in [MarkedGroup::zd(2), MarkedGroup::heisenberg(), MarkedGroup::free(2)] {
        let run = profile_exact::<Rational>(&g, 7);
        assert!(run.complete);
        let mut prev = q(1, 1);
        for p in &run.points {
            assert!(p.witness.len() <= p.n);
            assert!(p.witness.contains(&g.identity()));
            assert_eq!(p.witness.boundary_ratio::<Rational>().unwrap(), p.value);
            assert_eq!(p.witness.boundary_size(), p.boundary);
            assert!(p.value <= prev);
            prev = p.value.clone();
        }
    }
}

#[test]
fn z2_first_interior_point_at_five() {
    let run = profile_exact::<Rational>(&MarkedGroup::zd(2), 5);
    assert_eq!(run.points[3].value, q(1, 1));
    assert_eq!(run.points[4].value, q(4, 5));
}

#[test]
fn budget_exhaustion_keeps_finished_levels() {
    let run = profile_exact_with_budget::<Rational>(&MarkedGroup::zd(2), 10, 50);
    assert!(!run.complete);
    assert!(run.points.len() < 10);
    assert_eq!(run.points[0].value, q(1, 1));
}

#[test]
fn upper_bound_examples() {
    let (v, w) = profile_upper::<Rational>(&MarkedGroup::zd(2), 9, ShapeFamily::Cubes).unwrap();
    assert_eq!(v, q(8, 9));
    assert_eq!(w, square(3));
    let (v, _) = profile_upper::<Rational>(&MarkedGroup::zd(1), 10, ShapeFamily::Intervals).unwrap();
    assert_eq!(v, q(1, 5));
    let (v, _) = profile_upper::<Rational>(&MarkedGroup::zd(3), 27, ShapeFamily::Cubes).unwrap();
    assert_eq!(v, q(26, 27));
    let (v, w) = profile_upper::<Rational>(&MarkedGroup::heisenberg(), 425, ShapeFamily::Cuboids).unwrap();
    assert_eq!(w.len(), 425);
    assert_eq!(v, q(cuboid_boundary(4) as i64, 425));
    for k in 3..=8i64 {
        let (v, _) = profile_upper::<Rational>(&MarkedGroup::zd(2), (k * k) as usize, ShapeFamily::Cubes).unwrap();
        assert_eq!(v, q(4 * k - 4, k * k));
    }
}

#[test]
fn upper_bounds_dominate_exact_profile() {
    let z2 = MarkedGroup::zd(2);
    let run = profile_exact::<Rational>(&z2, 9);
    for p in &run.points {
        let (u, _) = profile_upper::<Rational>(&z2, p.n, ShapeFamily::Cubes).unwrap();
        assert!(p.value <= u);
    }
}

#[test]
fn mixed_groups_are_rejected() {
    let h = MarkedGroup::heisenberg();
    assert!(GroupSubset::new(&h, [zd(&[0, 0])]).is_err());
    assert!(profile_upper::<Rational>(&h, 9, ShapeFamily::Cubes).is_err());
}

fn plane_set() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-4i64..4, -4i64..4), 1..20)
}

proptest! {
    #[test]
    fn boundary_ratio_is_a_fraction(pts in plane_set()) {
        let f = GroupSubset::new(&MarkedGroup::zd(2), pts.iter().map(|&(x, y)| zd(&[x, y]))).unwrap();
        let r: Rational = f.boundary_ratio().unwrap();
        prop_assert!(r > q(0, 1) && r <= q(1, 1));
        prop_assert!(f.inner_boundary().is_subset(&f));
    }

    #[test]
    fn outer_boundary_misses_the_set(pts in plane_set()) {
        let z2 = MarkedGroup::zd(2);
        let f = GroupSubset::new(&z2, pts.iter().map(|&(x, y)| zd(&[x, y]))).unwrap();
        let window = GroupSubset::new(&z2, z2.ball(12).unwrap().elements().iter().cloned()).unwrap();
        let out = f.outer_boundary(&window).unwrap();
        prop_assert!(out.iter().all(|g| !f.contains(g)));
        // every outer point is one generator step from the set
        for g in out.iter() {
            let near = (0..z2.num_generators()).any(|s| f.contains(&z2.left_mul_generator(s, g)));
            prop_assert!(near);
        }
    }

    #[test]
    fn boundary_is_right_translation_invariant(
        pts in prop::collection::vec((-3i64..3, -3i64..3, -6i64..6), 1..25),
        t in (-5i64..5, -5i64..5, -9i64..9),
    ) {
        let h = MarkedGroup::heisenberg();
        let f = GroupSubset::new(&h, pts.iter().map(|&(a, b, c)| GroupElement::heisenberg(a, b, c))).unwrap();
        let g = f.right_translate(&GroupElement::heisenberg(t.0, t.1, t.2)).unwrap();
        prop_assert_eq!(f.len(), g.len());
        prop_assert_eq!(f.boundary_size(), g.boundary_size());
    }

    #[test]
    fn cubes_have_closed_form_boundary(d in 1usize..4, k in 1usize..6) {
        let c = cube(&MarkedGroup::zd(d), k).unwrap();
        let interior = k.saturating_sub(2).pow(d as u32);
        prop_assert_eq!(c.len(), k.pow(d as u32));
        prop_assert_eq!(c.boundary_size(), k.pow(d as u32) - interior);
    }
}
