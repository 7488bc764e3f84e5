#![allow(dead_code)]

use isoprofile::graphings::MeasuredGraphing;
use isoprofile::{Graphing, MarkedGroup, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Positive integer weights in `1..=5`, normalised to total 1.
pub fn random_weights(rng: &mut ChaCha8Rng, v: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..v).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| q(w, total)).collect()
}

/// A graphing over ℤ or F₂ with random partial injections: each generator
/// is a random permutation restricted to a random domain, and its inverse
/// label gets the inverse map.
pub fn random_graphing(rng: &mut ChaCha8Rng, v: usize) -> Graphing {
    let group = if rng.gen_bool(0.5) {
        MarkedGroup::zd(1)
    } else {
        MarkedGroup::free(2)
    };
    let k = group.num_generators();
    let mut maps = vec![vec![None; v]; k];
    for s in 0..k {
        let inv = group.inverse_label(s);
        if inv < s {
            continue;
        }
        let mut perm: Vec<usize> = (0..v).collect();
        perm.shuffle(rng);
        let density = rng.gen_range(0.5..=1.0);
        for x in 0..v {
            if rng.gen_bool(density) {
                maps[s][x] = Some(perm[x]);
                maps[inv][perm[x]] = Some(x);
            }
        }
    }
    let weights = random_weights(rng, v);
    MeasuredGraphing::new(&group, weights, maps).expect("random graphing is valid")
}

/// Random labelling of `v` vertices with at most `cells` labels.
pub fn random_labels(rng: &mut ChaCha8Rng, v: usize, cells: usize) -> Vec<usize> {
    (0..v).map(|_| rng.gen_range(0..cells.max(1))).collect()
}

/// Weights as integers over a common denominator.
fn integer_weights(g: &Graphing) -> (Vec<u64>, BigInt) {
    let den = g
        .weights()
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let ints = g
        .weights()
        .iter()
        .map(|w| (w.numer() * (&den / w.denom())).to_u64().expect("small weights"))
        .collect();
    (ints, den)
}

/// Minimum boundary mass over every set partition (restricted growth
/// strings) with blocks of size at most `n`, for `n = 1..=V`.
pub fn partition_oracle(g: &Graphing) -> Vec<Rational> {
    let v = g.num_vertices();
    let (w, den) = integer_weights(g);
    let maps = g.maps();
    let mut best = vec![u64::MAX; v + 1];
    let mut label = vec![0usize; v];
    let mut sizes = vec![0usize; v + 1];
    fn rec(
        i: usize,
        blocks: usize,
        label: &mut Vec<usize>,
        sizes: &mut Vec<usize>,
        w: &[u64],
        maps: &[Vec<Option<usize>>],
        best: &mut [u64],
    ) {
        let v = label.len();
        if i == v {
            let mut mass = 0u64;
            for x in 0..v {
                let leaves = maps
                    .iter()
                    .any(|m| m[x].map_or(true, |y| label[y] != label[x]));
                if leaves {
                    mass += w[x];
                }
            }
            let largest = *sizes.iter().max().unwrap();
            best[largest] = best[largest].min(mass);
            return;
        }
        for b in 0..=blocks {
            label[i] = b;
            sizes[b] += 1;
            rec(i + 1, blocks.max(b + 1), label, sizes, w, maps, best);
            sizes[b] -= 1;
        }
    }
    rec(0, 0, &mut label, &mut sizes, &w, maps, &mut best);
    let mut out = Vec::with_capacity(v);
    let mut run = u64::MAX;
    for n in 1..=v {
        run = run.min(best[n]);
        out.push(Rational::new(BigInt::from(run), den.clone()));
    }
    out
}

/// Boundary mass of a labelling computed directly from the maps.
pub fn direct_mass(g: &Graphing, label: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for x in 0..g.num_vertices() {
        if g.maps().iter().any(|m| m[x].map_or(true, |y| label[y] != label[x])) {
            total += g.weights()[x].clone();
        }
    }
    total
}
