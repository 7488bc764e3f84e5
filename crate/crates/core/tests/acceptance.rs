//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are computed in full and reported,
//! but do not fail the run; if one of them starts passing the run fails so
//! the list gets updated.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use isoprofile::action_profile::*;
use isoprofile::bounds::*;
use isoprofile::graphings::*;
use isoprofile::isoperimetry::*;
use isoprofile::rokhlin::*;
use isoprofile::tilings::*;
use isoprofile::*;
use num_traits::{One, Zero};
use rand::Rng;

/// Criterion 3: at `d = 3, k = 3` the cube ratio `26/27` is below half of
/// `2d/k = 2`. Criterion 4: the closed-form Heisenberg boundary ratio
/// disagrees with direct counting for every `n`. Both are fixed by exact
/// arithmetic; see the decisions ledger.
const KNOWN_FAILURES: &[&str] = &["3", "4"];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// ---------------------------------------------------------------- criterion 1

/// Minimum ratio over subsets of `[-n, n]` containing 0 with at most `n`
/// points, by enumerating bitmasks.
fn z_oracle(n: usize) -> Rational {
    let width = 2 * n + 1;
    let origin = n;
    let mut best: Option<(usize, usize)> = None;
    for mask in 0u64..(1 << width) {
        if mask >> origin & 1 == 0 || mask.count_ones() as usize > n {
            continue;
        }
        let size = mask.count_ones() as usize;
        let inside = |i: isize| i >= 0 && (i as usize) < width && mask >> i & 1 == 1;
        let boundary = (0..width as isize)
            .filter(|&i| inside(i) && (!inside(i - 1) || !inside(i + 1)))
            .count();
        if best.map_or(true, |(b, s)| boundary * s < b * size) {
            best = Some((boundary, size));
        }
    }
    let (b, s) = best.unwrap();
    q(b as i64, s as i64)
}

fn criterion_1() -> Outcome {
    let z = MarkedGroup::zd(1);
    let t = Instant::now();
    let run = profile_exact::<Rational>(&z, 10);
    let elapsed = t.elapsed();
    let mut bad = Vec::new();
    for p in &run.points {
        let expected = if p.n == 1 { q(1, 1) } else { q(2, p.n as i64) };
        let oracle = z_oracle(p.n);
        if p.value != expected || p.value != oracle {
            bad.push(format!("n={} got {} expected {} oracle {}", p.n, p.value, expected, oracle));
        }
    }
    let ok = run.complete && run.points.len() == 10 && bad.is_empty() && elapsed < Duration::from_secs(1);
    Outcome::new(
        ok,
        format!("I(1..10) = 1, 2/n; oracle agrees; profile time {} {}", secs(elapsed), bad.join("; ")),
    )
}

// ---------------------------------------------------------------- criterion 2

struct PlaneBall {
    pts: Vec<(i64, i64)>,
    /// Neighbour indices; `None` outside the ball.
    nbr: Vec<[Option<usize>; 4]>,
}

impl PlaneBall {
    fn new(r: i64) -> Self {
        let mut pts = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                if x.abs() + y.abs() <= r {
                    pts.push((x, y));
                }
            }
        }
        let find = |p: (i64, i64)| pts.iter().position(|&q| q == p);
        let nbr = pts
            .iter()
            .map(|&(x, y)| {
                [
                    find((x + 1, y)),
                    find((x - 1, y)),
                    find((x, y + 1)),
                    find((x, y - 1)),
                ]
            })
            .collect();
        PlaneBall { pts, nbr }
    }

    fn boundary(&self, mask: u128) -> usize {
        (0..self.pts.len())
            .filter(|&i| mask >> i & 1 == 1)
            .filter(|&i| self.nbr[i].iter().any(|n| n.map_or(true, |j| mask >> j & 1 == 0)))
            .count()
    }
}

/// Direct enumeration of subsets of `ball(6)` containing the origin.
fn plane_brute(ball: &PlaneBall, n: usize) -> Vec<(usize, usize)> {
    let origin = ball.pts.iter().position(|&p| p == (0, 0)).unwrap();
    let others: Vec<usize> = (0..ball.pts.len()).filter(|&i| i != origin).collect();
    let mut best = vec![(1usize, 1usize); n + 1];
    fn rec(
        ball: &PlaneBall,
        others: &[usize],
        start: usize,
        mask: u128,
        size: usize,
        n: usize,
        best: &mut [(usize, usize)],
    ) {
        let b = ball.boundary(mask);
        let (bb, bs) = best[size];
        if b * bs < bb * size {
            best[size] = (b, size);
        }
        if size == n {
            return;
        }
        for k in start..others.len() {
            rec(ball, others, k + 1, mask | 1 << others[k], size + 1, n, best);
        }
    }
    rec(ball, &others, 0, 1 << origin, 1, n, &mut best);
    best
}

/// Every `F` has `N[int F] ⊆ F` and `int N[int F] ⊇ int F`, so the minimum
/// ratio over all subsets of the ball with at most `n` points is attained
/// by a singleton or by some `N[I]`. Enumerates every `I` with
/// `|N[I]| <= n` and `N[I]` inside the ball.
fn plane_interior_oracle(ball: &PlaneBall, n: usize) -> (usize, usize) {
    let eligible: Vec<usize> = (0..ball.pts.len())
        .filter(|&i| ball.nbr[i].iter().all(|x| x.is_some()))
        .collect();
    let mut best = (1usize, 1usize);
    fn closure(ball: &PlaneBall, i: usize) -> u128 {
        ball.nbr[i].iter().fold(1u128 << i, |m, j| m | 1 << j.unwrap())
    }
    fn rec(
        ball: &PlaneBall,
        eligible: &[usize],
        start: usize,
        set: u128,
        n: usize,
        best: &mut (usize, usize),
    ) {
        for k in start..eligible.len() {
            let next = set | closure(ball, eligible[k]);
            let size = next.count_ones() as usize;
            if size > n {
                continue;
            }
            let b = ball.boundary(next);
            if b * best.1 < best.0 * size {
                *best = (b, size);
            }
            rec(ball, eligible, k + 1, next, n, best);
        }
    }
    rec(ball, &eligible, 0, 0, n, &mut best);
    best
}

fn criterion_2() -> Outcome {
    let z2 = MarkedGroup::zd(2);
    let t = Instant::now();
    let run = profile_exact::<Rational>(&z2, 8);
    let elapsed = t.elapsed();
    let ball = PlaneBall::new(6);
    let brute = plane_brute(&ball, 6);
    let mut bad = Vec::new();
    let mut values = Vec::new();
    for p in &run.points {
        let (b, s) = plane_interior_oracle(&ball, p.n);
        let oracle = q(b as i64, s as i64);
        if p.value != oracle {
            bad.push(format!("n={} got {} oracle {}", p.n, p.value, oracle));
        }
        if p.n <= 6 {
            let direct = brute[1..=p.n]
                .iter()
                .map(|&(b, s)| q(b as i64, s as i64))
                .min()
                .unwrap();
            if direct != oracle {
                bad.push(format!("n={} oracles disagree: {} vs {}", p.n, direct, oracle));
            }
        }
        values.push(p.value.to_string());
    }
    let i5 = run.points.iter().find(|p| p.n == 5).map(|p| p.value.clone());
    let ok = run.complete
        && run.points.len() == 8
        && bad.is_empty()
        && i5 == Some(q(4, 5))
        && elapsed < Duration::from_secs(120);
    Outcome::new(
        ok,
        format!(
            "I(1..8) = [{}]; ball(6) oracles agree; profile time {} {}",
            values.join(", "),
            secs(elapsed),
            bad.join("; ")
        ),
    )
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [2usize, 3] {
        let g = MarkedGroup::zd(d);
        for k in 3..=6usize {
            let size = k.pow(d as u32) as i64;
            let expected = q(size - (k as i64 - 2).pow(d as u32), size);
            let (value, _) = profile_upper::<Rational>(&g, size as usize, ShapeFamily::Cubes).unwrap();
            let scaled = value.clone() / q(2 * d as i64, k as i64);
            let in_range = scaled >= q(1, 2) && scaled <= q(3, 2);
            ok &= value == expected && in_range;
            let flag = if in_range { "" } else { " outside [1/2, 3/2]" };
            notes.push(format!("d={d} k={k}: {value} (x k/2d = {scaled}{flag})"));
        }
    }
    Outcome::new(ok, notes.join(", "))
}

// ---------------------------------------------------------------- criterion 4

fn heis_mul(g: (i64, i64, i64), h: (i64, i64, i64)) -> (i64, i64, i64) {
    (g.0 + h.0, g.1 + h.1, g.2 + h.2 + g.0 * h.1)
}

/// `(|∂F_n|, |F_n|)` by direct counting in coordinates.
fn heis_oracle(n: i64) -> (usize, usize) {
    let pts: BTreeSet<(i64, i64, i64)> = (0..=n)
        .flat_map(|a| (0..=n).flat_map(move |b| (0..=n * n).map(move |c| (a, b, c))))
        .collect();
    let gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)];
    let boundary = pts
        .iter()
        .filter(|&&g| gens.iter().any(|&s| !pts.contains(&heis_mul(s, g))))
        .count();
    (boundary, pts.len())
}

fn criterion_4() -> Outcome {
    let h = MarkedGroup::heisenberg();
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 1..=4usize {
        let mt = heisenberg_tile(&h, n).unwrap();
        let radius = (2 * (n * n + 2)) as u32;
        let r = verify_multitile_window(&mt, radius).unwrap();
        ok &= r.pass();
        notes.push(format!("window n={n} r={radius}: {}", if r.pass() { "ok" } else { "FAIL" }));
    }
    for n in 1..=6i64 {
        let (b, s) = heis_oracle(n);
        let lib = heisenberg_cuboid(&h, n as usize).unwrap();
        let ratio = q(b as i64, s as i64);
        let lib_ratio: Rational = lib.boundary_ratio().unwrap();
        ok &= lib_ratio == ratio;
        let formula = q(4 * n * n + 2 * n + 5, (n + 1) * (n * n + 1));
        let mut line = format!("n={n}: |dF|/|F| = {b}/{s} = {ratio}, formula {formula}");
        if formula <= Rational::one() {
            let agree = ratio == formula;
            ok &= agree;
            line += if agree { " (agree)" } else { " (DISAGREE)" };
        } else {
            line += " (formula > 1, logged)";
        }
        if n >= 4 {
            let scaled = ratio.clone() * q(n, 1);
            let in_range = scaled >= q(3, 1) && scaled <= q(5, 1);
            ok &= in_range;
            line += &format!(", n*ratio = {:.3}{}", to_f64(&scaled), if in_range { "" } else { " (outside [3,5])" });
        }
        notes.push(line);
    }
    Outcome::new(ok, notes.join("; "))
}

fn to_f64(x: &Rational) -> f64 {
    Scalar::to_f64(x)
}

// ------------------------------------------------------------ criteria 5 and 7

fn interval_tile(len: i64) -> MultiTile {
    let z = MarkedGroup::zd(1);
    let t = GroupSubset::new(&z, (0..len).map(|i| GroupElement::Zd(vec![i]))).unwrap();
    MultiTile::tile(t, CenterSet::Lattice(vec![GroupElement::Zd(vec![len])])).unwrap()
}

struct TowerCase {
    name: &'static str,
    graphing: Graphing,
    tile: MultiTile,
    epsilon: Rational,
    expected: Rational,
}

fn tower_cases() -> Vec<TowerCase> {
    let z1 = MarkedGroup::zd(1);
    let z2 = MarkedGroup::zd(2);
    vec![
        TowerCase {
            name: "Z/12 interval-3",
            graphing: build_torus_action(&z1, 12).unwrap(),
            tile: interval_tile(3),
            epsilon: q(1, 4),
            expected: q(1, 1),
        },
        TowerCase {
            name: "Z/5 interval-2",
            graphing: build_torus_action(&z1, 5).unwrap(),
            tile: interval_tile(2),
            epsilon: q(1, 4),
            expected: q(4, 5),
        },
        TowerCase {
            name: "(Z/6)^2 2x2",
            graphing: build_torus_action(&z2, 6).unwrap(),
            tile: cube_tile(&z2, 2).unwrap(),
            epsilon: q(1, 10),
            expected: q(1, 1),
        },
    ]
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for c in tower_cases() {
        let tf = build_towers(&c.graphing, &c.tile, c.epsilon.clone()).unwrap();
        let report = verify_tower_family(&c.graphing, &c.tile, &tf).unwrap();
        let good = tf.coverage == c.expected
            && tf.coverage >= Rational::one() - c.epsilon.clone()
            && tf.success()
            && report.pass();
        ok &= good;
        notes.push(format!("{}: coverage {} verified {}", c.name, tf.coverage, report.pass()));
    }
    Outcome::new(ok, notes.join(", "))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for c in tower_cases() {
        let tf = build_towers(&c.graphing, &c.tile, c.epsilon.clone()).unwrap();
        if !tf.success() {
            continue;
        }
        let n = c.tile.max_shape_size();
        let check = check_tiling_upper_bound(&c.graphing, &c.tile, n, c.epsilon.clone()).unwrap();
        // independent recomputation of the guarantee from the tile itself
        let shape = &c.tile.shapes()[0];
        let ratio = q(shape.boundary_size() as i64, shape.len() as i64);
        let left = Rational::one() - tf.coverage.clone();
        let guarantee = ratio * (Rational::one() - left.clone()) + left;
        let good = check.pass() && check.rhs.hi == guarantee && check.lhs <= guarantee;
        ok &= good;
        notes.push(format!("{}: mass {} <= {}", c.name, check.lhs, guarantee));
    }
    Outcome::new(ok, notes.join(", "))
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let mut failures = 0;
    let mut checks = 0;
    let mut notes = Vec::new();
    for d in [1usize, 2] {
        let group = MarkedGroup::zd(d);
        for m in [8usize, 10, 12] {
            let g: Graphing = build_torus_action(&group, m).unwrap();
            let mut values = Vec::new();
            for n in 1..=g.free_window() {
                let c = check_lower_bound(&g, &group, n).unwrap();
                checks += 1;
                if c.verdict != Verdict::Holds {
                    failures += 1;
                }
                values.push(format!("{}>={}", c.lhs, c.rhs.lo));
            }
            notes.push(format!("d={d} m={m}: {}", values.join(" ")));
        }
    }
    Outcome::new(
        failures == 0,
        format!("{checks} checks, {failures} failures; {}", notes.join("; ")),
    )
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let mut bad = 0;
    let mut count = 0;
    for _ in 0..20 {
        let v = rng.gen_range(1..=16);
        let g = random_graphing(&mut rng, v);
        for _ in 0..25 {
            let cells = rng.gen_range(1..=v);
            let labels = random_labels(&mut rng, v, cells);
            let p = BoundedPartition::from_cell_of(&labels, v).unwrap();
            let r = connected_refinement(&g, &p).unwrap();
            count += 1;
            let before = boundary_mass(&g, &p).unwrap().mass;
            let after = boundary_mass(&g, &r).unwrap().mass;
            let refines = (0..v).all(|x| (0..v).all(|y| !r.same_cell(x, y) || p.same_cell(x, y)));
            let sizes_ok = r.cells().iter().all(|c| {
                let host = p.cells().into_iter().find(|h| h.contains(&c[0])).unwrap();
                c.len() <= host.len()
            });
            if before != after || !refines || !sizes_ok || after != direct_mass(&g, r.cell_of()) {
                bad += 1;
            }
        }
    }
    Outcome::new(bad == 0 && count == 500, format!("{count} partitions on 20 graphings, {bad} failures"))
}

// ---------------------------------------------------------------- criterion 9

fn criterion_9() -> Outcome {
    let mut rng = rng(9);
    let exps = [Exponent::new(3, 2).unwrap(), Exponent::new(2, 1).unwrap(), Exponent::new(3, 1).unwrap()];
    let mut holder_checks = 0;
    let mut holder_bad = 0;
    for _ in 0..100 {
        let m = rng.gen_range(3..=12);
        let g = build_weighted_cycle::<Rational>(m, random_weights(&mut rng, m)).unwrap();
        let mut set: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.4)).collect();
        if set.is_empty() {
            set.push(rng.gen_range(0..m));
        }
        for s in 0..g.group().num_generators() {
            for &p in &exps {
                let r = g.holder_pushforward_bound(s, &set, p).unwrap();
                holder_checks += 1;
                // independent image measure
                let image: Rational = set
                    .iter()
                    .map(|&x| g.weights()[g.maps()[s][x].unwrap()].clone())
                    .sum();
                if r.verdict != Verdict::Holds || r.mu_image != image {
                    holder_bad += 1;
                }
            }
        }
    }
    let s1 = MarkedGroup::zd(1);
    let s2 = MarkedGroup::with_generators(
        GroupKind::Zd { d: 1 },
        &[GroupElement::Zd(vec![1]), GroupElement::Zd(vec![2])],
    )
    .unwrap();
    let mut cont_bad = 0;
    for _ in 0..100 {
        let m = rng.gen_range(5..=14);
        let w = random_weights(&mut rng, m);
        let g1 = build_weighted_cycle_over::<Rational>(&s1, w.clone()).unwrap();
        let g2 = build_weighted_cycle_over::<Rational>(&s2, w).unwrap();
        let cells = rng.gen_range(1..=m);
        let labels = random_labels(&mut rng, m, cells);
        let p = BoundedPartition::from_cell_of(&labels, m).unwrap();
        let r = boundary_containment(&g1, &g2, &p).unwrap();
        // setwise, by hand: every S₂-boundary point is an S₁-boundary point
        // or next to one (k = 2)
        let leaves = |x: usize, shifts: &[i64]| {
            shifts
                .iter()
                .any(|&t| labels[(x as i64 + t).rem_euclid(m as i64) as usize] != labels[x])
        };
        let b1: Vec<usize> = (0..m).filter(|&x| leaves(x, &[1, -1])).collect();
        let manual = (0..m).filter(|&x| leaves(x, &[1, -1, 2, -2])).all(|x| {
            b1.iter().any(|&y| {
                let d = (x as i64 - y as i64).rem_euclid(m as i64);
                d == 0 || d == 1 || d == m as i64 - 1
            })
        });
        if r.k != 2 || !r.contained || !manual {
            cont_bad += 1;
        }
    }
    Outcome::new(
        holder_bad == 0 && cont_bad == 0,
        format!(
            "Hölder: {holder_checks} checks, {holder_bad} failures; containment: 100 partitions, {cont_bad} failures"
        ),
    )
}

// --------------------------------------------------------------- criterion 10

fn small_corpus() -> Vec<(String, Graphing)> {
    let mut out = Vec::new();
    let z1 = MarkedGroup::zd(1);
    let z2 = MarkedGroup::zd(2);
    for m in 3..=10 {
        out.push((format!("Z/{m}"), build_torus_action(&z1, m).unwrap()));
    }
    out.push(("(Z/3)^2".into(), build_torus_action(&z2, 3).unwrap()));
    let mut rng = rng(10);
    for i in 0..10 {
        let m = rng.gen_range(3..=10);
        out.push((format!("cycle#{i}"), build_weighted_cycle(m, random_weights(&mut rng, m)).unwrap()));
    }
    for i in 0..30 {
        let v = rng.gen_range(1..=10);
        out.push((format!("random#{i}"), random_graphing(&mut rng, v)));
    }
    out
}

fn criterion_10() -> Outcome {
    let t = Instant::now();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    let bb = SearchOptions {
        mode: Some(SearchMode::BranchAndBound),
        ..SearchOptions::default()
    };
    for (name, g) in small_corpus() {
        let oracle = partition_oracle(&g);
        for n in 1..=g.num_vertices() {
            let r = profile_action_exact_with(&g, n, bb).unwrap();
            cases += 1;
            let witness = boundary_mass(&g, &r.partition).unwrap().mass;
            if !r.optimal
                || r.value != oracle[n - 1]
                || witness != r.value
                || r.partition.max_cell_size() > n
            {
                mismatches.push(format!("{name} n={n}: {} vs {}", r.value, oracle[n - 1]));
            }
        }
    }
    let elapsed = t.elapsed();
    Outcome::new(
        mismatches.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "{cases} (graphing, n) cases, {} mismatches, {} {}",
            mismatches.len(),
            secs(elapsed),
            mismatches.join("; ")
        ),
    )
}

// --------------------------------------------------------------- F₂ contrast

fn f2_contrast() -> Outcome {
    let f2 = MarkedGroup::free(2);
    let run = profile_exact::<Rational>(&f2, 8);
    let mut ok = run.complete && run.points.len() == 8;
    let mut notes = Vec::new();
    for p in &run.points {
        // a subtree of the 4-regular tree gains at most one interior vertex
        // per three added vertices
        let tree = (1..=p.n as i64)
            .map(|n| if n == 1 { q(1, 1) } else { q(n - (n - 2) / 3, n) })
            .min()
            .unwrap();
        ok &= p.value == tree && p.value >= q(1, 2);
        notes.push(p.value.to_string());
    }
    let z2 = MarkedGroup::zd(2);
    let mut cubes = Vec::new();
    let mut prev: Option<Rational> = None;
    for k in 2..=12usize {
        let (v, _) = profile_upper::<Rational>(&z2, k * k, ShapeFamily::Cubes).unwrap();
        ok &= prev.as_ref().map_or(true, |p| v < *p);
        prev = Some(v.clone());
        cubes.push(format!("{v}"));
    }
    let last = prev.unwrap_or_else(Rational::zero);
    ok &= last < q(1, 2);
    Outcome::new(
        ok,
        format!(
            "F2 I(1..8) = [{}] all >= 1/2; Z^2 cube bound at k^2, k=2..12: [{}]",
            notes.join(", "),
            cubes.join(", ")
        ),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
        ("10", criterion_10),
        ("f2-contrast", f2_contrast),
    ];
    let mut unexpected = 0;
    for (id, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Outcome::new(false, format!("panicked: {msg}"))
            });
        let known = KNOWN_FAILURES.contains(&id);
        let status = match (outcome.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
            (true, true) => {
                unexpected += 1;
                "PASS (listed as known failure)"
            }
        };
        println!("criterion {id}: {status} [{}] {}", secs(t.elapsed()), outcome.detail);
    }
    if unexpected > 0 {
        println!("acceptance: {unexpected} unexpected outcome(s)");
        std::process::exit(1);
    }
    println!("acceptance: all outcomes as expected");
}
