//! Rokhlin towers: disjoint fibers `T_i·a` (`a ∈ A_i`) of a multi-tile in a
//! finite graphing, placed greedily.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::graphings::MeasuredGraphing;
use crate::scalar::Scalar;
use crate::tilings::MultiTile;

#[derive(Clone, Debug, PartialEq)]
pub struct TowerFamily<Q> {
    /// `bases[i]` is `A_i`, ascending.
    pub bases: Vec<Vec<usize>>,
    /// `μ(∪ T_i·A_i)`.
    pub coverage: Q,
    pub epsilon_target: Q,
    /// Vertices outside every fiber, ascending.
    pub leftover: Vec<usize>,
}

impl<Q: Scalar> TowerFamily<Q> {
    /// `coverage >= 1 - epsilon_target`.
    pub fn success(&self) -> bool {
        self.coverage >= Q::one() - self.epsilon_target.clone()
    }

    pub fn leftover_mass(&self) -> Q {
        Q::one() - self.coverage.clone()
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "bases": self.bases,
            "coverage": self.coverage.to_string(),
            "epsilon": self.epsilon_target.to_string(),
            "leftover": self.leftover,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |m: &str| Error::Config(format!("tower family: {m}"));
        let bases: Vec<Vec<usize>> = serde_json::from_value(
            v.get("bases").cloned().ok_or_else(|| bad("missing \"bases\""))?,
        )?;
        let scalar = |key: &str| -> Result<Q> {
            match v.get(key) {
                Some(Value::String(s)) => Ok(Q::parse_scalar(s)?),
                None => Ok(Q::zero()),
                _ => Err(bad(&format!("\"{key}\" must be a \"p/q\" string"))),
            }
        };
        let leftover = match v.get("leftover") {
            Some(l) => serde_json::from_value(l.clone())?,
            None => Vec::new(),
        };
        Ok(TowerFamily {
            bases,
            coverage: scalar("coverage")?,
            epsilon_target: scalar("epsilon")?,
            leftover,
        })
    }
}

fn check_compatible<Q: Scalar>(g: &MeasuredGraphing<Q>, mt: &MultiTile) -> Result<()> {
    if !g.group().same_generating_set(mt.group()) {
        return Err(Error::MixedGroups(
            format!("graphing over {:?}", g.group().kind()),
            format!("tile over {:?}", mt.group().kind()),
        ));
    }
    Ok(())
}

/// `T_i·x` for every shape and vertex, along geodesic words of the ball of
/// radius `max |t|`. `None` where some `t·x` is undefined.
fn fibers<Q: Scalar>(g: &MeasuredGraphing<Q>, mt: &MultiTile) -> Result<Vec<Vec<Option<Vec<usize>>>>> {
    let radius = mt.diameter()?;
    let ball = g.group().ball(radius)?;
    let idx: Vec<Vec<usize>> = mt
        .shapes()
        .iter()
        .map(|s| s.iter().map(|t| ball.index_of(t).expect("inside the ball")).collect())
        .collect();
    let mut out = vec![Vec::with_capacity(g.num_vertices()); mt.shapes().len()];
    for x in 0..g.num_vertices() {
        let orbit = g.orbit_map(&ball, x);
        for (i, shape) in idx.iter().enumerate() {
            out[i].push(shape.iter().map(|&j| orbit[j]).collect::<Option<Vec<usize>>>());
        }
    }
    Ok(out)
}

/// Greedy placement: vertices in ascending order, shapes largest first (ties
/// by index); a tower `T_i·x` is placed when it is defined and misses every
/// placed fiber. Refuses shapes whose spread exceeds twice the free window.
/// A coverage below `1 - epsilon` is reported through [`TowerFamily::success`].
pub fn build_towers<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    mt: &MultiTile,
    epsilon: Q,
) -> Result<TowerFamily<Q>> {
    check_compatible(g, mt)?;
    if epsilon <= Q::zero() || epsilon >= Q::one() {
        return Err(Error::Parameter(format!("epsilon = {epsilon} (need 0 < epsilon < 1)")));
    }
    let spread = mt.spread()? as usize;
    if spread > 2 * g.free_window() {
        return Err(Error::BeyondFreeWindow {
            requested: spread,
            window: 2 * g.free_window(),
        });
    }
    let fib = fibers(g, mt)?;
    let mut order: Vec<usize> = (0..mt.shapes().len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(mt.shapes()[i].len()));
    let mut taken = vec![false; g.num_vertices()];
    let mut bases = vec![Vec::new(); mt.shapes().len()];
    for x in 0..g.num_vertices() {
        for &i in &order {
            let Some(f) = &fib[i][x] else { continue };
            if f.iter().all(|&y| !taken[y]) {
                for &y in f {
                    taken[y] = true;
                }
                bases[i].push(x);
                break;
            }
        }
    }
    let covered: Vec<usize> = (0..g.num_vertices()).filter(|&x| taken[x]).collect();
    let leftover = (0..g.num_vertices()).filter(|&x| !taken[x]).collect();
    Ok(TowerFamily {
        bases,
        coverage: g.measure(&covered),
        epsilon_target: epsilon,
        leftover,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerCollision {
    pub vertex: usize,
    /// `(shape, base)` of the two fibers meeting at `vertex`.
    pub first: (usize, usize),
    pub second: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerReport<Q> {
    pub disjoint: bool,
    pub collision: Option<TowerCollision>,
    /// A `(shape, base)` whose fiber is undefined somewhere.
    pub undefined: Option<(usize, usize)>,
    /// Recomputed `μ(∪ T_i·A_i)`.
    pub coverage: Q,
    pub coverage_matches: bool,
    pub meets_target: bool,
}

impl<Q> TowerReport<Q> {
    pub fn pass(&self) -> bool {
        self.disjoint && self.undefined.is_none() && self.coverage_matches && self.meets_target
    }
}

/// Re-checks a family from scratch: each `t·a` is evaluated by applying the
/// letters of a geodesic word for `t` one at a time.
pub fn verify_tower_family<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    mt: &MultiTile,
    tf: &TowerFamily<Q>,
) -> Result<TowerReport<Q>> {
    check_compatible(g, mt)?;
    if tf.bases.len() != mt.shapes().len() {
        return Err(Error::Config(format!(
            "{} base sets for {} shapes",
            tf.bases.len(),
            mt.shapes().len()
        )));
    }
    let ball = g.group().ball(mt.diameter()?)?;
    let mut owner: Vec<Option<(usize, usize)>> = vec![None; g.num_vertices()];
    let mut collision = None;
    let mut undefined = None;
    for (i, bases) in tf.bases.iter().enumerate() {
        let words: Vec<Vec<usize>> = mt.shapes()[i]
            .iter()
            .map(|t| ball.word_of(t).expect("inside the ball"))
            .collect();
        for &a in bases {
            if a >= g.num_vertices() {
                return Err(Error::Parameter(format!("base vertex {a} out of range")));
            }
            for w in &words {
                let Some(y) = g.apply_word(w, a) else {
                    undefined.get_or_insert((i, a));
                    continue;
                };
                match owner[y] {
                    None => owner[y] = Some((i, a)),
                    Some(first) => {
                        collision.get_or_insert(TowerCollision {
                            vertex: y,
                            first,
                            second: (i, a),
                        });
                    }
                }
            }
        }
    }
    let covered: Vec<usize> = (0..g.num_vertices()).filter(|&x| owner[x].is_some()).collect();
    let coverage = g.measure(&covered);
    Ok(TowerReport {
        disjoint: collision.is_none(),
        collision,
        undefined,
        coverage_matches: coverage.same_as(&tf.coverage),
        meets_target: coverage >= Q::one() - tf.epsilon_target.clone(),
        coverage,
    })
}

/// Fibers of a family as vertex lists, for building partitions.
pub fn tower_cells<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    mt: &MultiTile,
    tf: &TowerFamily<Q>,
) -> Result<Vec<Vec<usize>>> {
    let fib = fibers(g, mt)?;
    let mut cells = Vec::new();
    for (i, bases) in tf.bases.iter().enumerate() {
        for &a in bases {
            let f = fib[i][a]
                .clone()
                .ok_or_else(|| Error::Parameter(format!("fiber of shape {i} at {a} is undefined")))?;
            cells.push(f);
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphings::{build_torus_action, build_weighted_cycle};
    use crate::groups::{GroupElement, MarkedGroup};
    use crate::isoperimetry::GroupSubset;
    use crate::tilings::{cube_tile, CenterSet};
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn interval(len: i64) -> MultiTile {
        let z = MarkedGroup::zd(1);
        let t = GroupSubset::new(&z, (0..len).map(|i| GroupElement::Zd(vec![i]))).unwrap();
        MultiTile::tile(t, CenterSet::Lattice(vec![GroupElement::Zd(vec![len])])).unwrap()
    }

    #[test]
    fn examples() {
        let z12 = build_torus_action::<Rational>(&MarkedGroup::zd(1), 12).unwrap();
        let tf = build_towers(&z12, &interval(3), q(1, 4)).unwrap();
        assert_eq!(tf.coverage, q(1, 1));
        assert_eq!(tf.bases, vec![vec![0, 3, 6, 9]]);
        assert!(verify_tower_family(&z12, &interval(3), &tf).unwrap().pass());

        let z5 = build_torus_action::<Rational>(&MarkedGroup::zd(1), 5).unwrap();
        let tf = build_towers(&z5, &interval(2), q(1, 4)).unwrap();
        assert_eq!(tf.coverage, q(4, 5));
        assert_eq!(tf.leftover, vec![4]);
        assert!(tf.success());

        let z6 = build_torus_action::<Rational>(&MarkedGroup::zd(2), 6).unwrap();
        let sq = cube_tile(&MarkedGroup::zd(2), 2).unwrap();
        let tf = build_towers(&z6, &sq, q(1, 10)).unwrap();
        assert_eq!(tf.coverage, q(1, 1));
        assert!(verify_tower_family(&z6, &sq, &tf).unwrap().pass());
    }

    #[test]
    fn overlapping_family_fails() {
        let z12 = build_torus_action::<Rational>(&MarkedGroup::zd(1), 12).unwrap();
        let tf = TowerFamily {
            bases: vec![vec![0, 2]],
            coverage: q(5, 12),
            epsilon_target: q(1, 2),
            leftover: vec![],
        };
        let r = verify_tower_family(&z12, &interval(3), &tf).unwrap();
        assert!(!r.disjoint);
        assert_eq!(r.collision.unwrap().vertex, 2);
    }

    #[test]
    fn empty_family() {
        let z12 = build_torus_action::<Rational>(&MarkedGroup::zd(1), 12).unwrap();
        let tf = TowerFamily {
            bases: vec![vec![]],
            coverage: q(0, 1),
            epsilon_target: q(1, 2),
            leftover: (0..12).collect(),
        };
        let r = verify_tower_family(&z12, &interval(3), &tf).unwrap();
        assert!(r.disjoint && r.coverage == q(0, 1) && !r.meets_target);
    }

    #[test]
    fn refuses_wide_shapes_and_bad_epsilon() {
        let z5 = build_torus_action::<Rational>(&MarkedGroup::zd(1), 5).unwrap();
        assert!(matches!(
            build_towers(&z5, &interval(6), q(1, 4)),
            Err(Error::BeyondFreeWindow { .. })
        ));
        assert!(build_towers(&z5, &interval(2), q(0, 1)).is_err());
        let c = build_weighted_cycle(4, vec![q(1, 4); 4]).unwrap();
        assert!(build_towers(&c, &cube_tile(&MarkedGroup::zd(2), 1).unwrap(), q(1, 2)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let z12 = build_torus_action::<Rational>(&MarkedGroup::zd(1), 12).unwrap();
        let tf = build_towers(&z12, &interval(3), q(1, 4)).unwrap();
        let back = TowerFamily::<Rational>::from_json(&tf.to_json().to_string()).unwrap();
        assert_eq!(back, tf);
    }
}
