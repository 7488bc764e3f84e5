//! Checks of the inequalities tying group profiles, action profiles, tile
//! ratios and changes of generating set. Every check recomputes both sides.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::action_profile::{
    boundary_mass, profile_action_exact, profile_action_tiling, BoundedPartition,
};
use crate::error::{Error, Result};
use crate::graphings::MeasuredGraphing;
use crate::groups::MarkedGroup;
use crate::isoperimetry::profile_exact;
use crate::scalar::{powi, Exponent, Interval, Scalar, PRECISION_LADDER};
use crate::tilings::MultiTile;

pub use crate::scalar::Verdict;

/// Largest word length searched for `S₂ ⊆ B_{S₁}(k)`.
pub const MAX_CONTAINMENT_POWER: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Relation {
    Le,
    Ge,
    Gt,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck<Q> {
    pub name: String,
    pub lhs: Q,
    /// Exact value, or an enclosure when it involves a root.
    pub rhs: Interval<Q>,
    pub relation: Relation,
    pub verdict: Verdict,
    pub context: BTreeMap<String, String>,
}

impl<Q: Scalar> BoundCheck<Q> {
    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    fn decide(lhs: &Q, relation: Relation, rhs: &Interval<Q>) -> Verdict {
        match relation {
            Relation::Le => rhs.ge_verdict(lhs),
            Relation::Ge => rhs.le_verdict(lhs),
            Relation::Gt => {
                if *lhs > rhs.hi {
                    Verdict::Holds
                } else if *lhs <= rhs.lo {
                    Verdict::Violated
                } else {
                    Verdict::Undecided
                }
            }
        }
    }
}

fn ctx(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Proven lower bound on the action profile at `n`, with a note on how it
/// was obtained.
fn action_lower<Q: Scalar>(g: &MeasuredGraphing<Q>, n: usize) -> Result<(Q, String)> {
    let r = profile_action_exact(g, n)?;
    if r.optimal {
        Ok((r.value, "exact".into()))
    } else {
        Ok((r.lower_bound, "search-budget lower bound".into()))
    }
}

/// Action profile of a free measure-preserving model against the group
/// profile: `I_act(n) >= I(n)`. Past the free window the comparison is
/// still computed but reported as out of window.
pub fn check_lower_bound<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    group: &MarkedGroup,
    n: usize,
) -> Result<BoundCheck<Q>> {
    if !g.group().same_generating_set(group) {
        return Err(Error::MixedGroups(
            format!("graphing over {:?}", g.group().kind()),
            format!("{:?}", group.kind()),
        ));
    }
    if !g.is_measure_preserving() {
        return Err(Error::NotApplicable("the graphing does not preserve its measure".into()));
    }
    let (lhs, how) = action_lower(g, n)?;
    let run = profile_exact::<Q>(group, n);
    let point = run
        .points
        .iter()
        .find(|p| p.n == n)
        .ok_or_else(|| Error::Budget(format!("group profile at n = {n} not reached")))?;
    let rhs = Interval::point(point.value.clone());
    let mut verdict = BoundCheck::decide(&lhs, Relation::Ge, &rhs);
    let mut context = ctx(&[
        ("n", n.to_string()),
        ("free_window", g.free_window().to_string()),
        ("vertices", g.num_vertices().to_string()),
        ("action_side", how),
        ("group_witness", point.witness.encode()),
    ]);
    if n > g.free_window() {
        context.insert("holds_numerically".into(), (verdict == Verdict::Holds).to_string());
        verdict = Verdict::OutOfWindow;
    }
    Ok(BoundCheck {
        name: "lower-bound".into(),
        lhs,
        rhs,
        relation: Relation::Ge,
        verdict,
        context,
    })
}

/// Tower partition of `mt` against the tile-ratio guarantee
/// `max_i |∂T_i|/|T_i| · (1 - ε') + ε'`.
pub fn check_tiling_upper_bound<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    mt: &MultiTile,
    n: usize,
    epsilon: Q,
) -> Result<BoundCheck<Q>> {
    if mt.max_shape_size() > n {
        return Err(Error::Parameter(format!(
            "a shape has {} elements, above n = {n}",
            mt.max_shape_size()
        )));
    }
    let t = profile_action_tiling(g, mt, epsilon.clone())?;
    let rhs = Interval::point(t.guaranteed.clone());
    let verdict = BoundCheck::decide(&t.value, Relation::Le, &rhs);
    Ok(BoundCheck {
        name: "tiling-upper-bound".into(),
        lhs: t.value,
        rhs,
        relation: Relation::Le,
        verdict,
        context: ctx(&[
            ("n", n.to_string()),
            ("epsilon", epsilon.to_string()),
            ("coverage", t.towers.coverage.to_string()),
            ("max_tile_ratio", t.max_tile_ratio.to_string()),
        ]),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentReport {
    /// Smallest `k` with `S₂ ⊆ B_{S₁}(k)`.
    pub k: u32,
    /// `∂_{S₂}P ⊆ B_{S₁}(k-1) · ∂_{S₁}P`.
    pub contained: bool,
    /// A vertex of `∂_{S₂}P` outside the translated boundary.
    pub witness: Option<usize>,
}

fn same_space<Q: Scalar>(g1: &MeasuredGraphing<Q>, g2: &MeasuredGraphing<Q>) -> Result<()> {
    if g1.group().kind() != g2.group().kind() {
        return Err(Error::MixedGroups(
            format!("{:?}", g1.group().kind()),
            format!("{:?}", g2.group().kind()),
        ));
    }
    if g1.weights() != g2.weights() {
        return Err(Error::Parameter("the graphings live on different measure spaces".into()));
    }
    Ok(())
}

/// Checks `∂_{S₂}P ⊆ B_{S₁}(k-1)·∂_{S₁}P` for one partition.
pub fn boundary_containment<Q: Scalar>(
    g1: &MeasuredGraphing<Q>,
    g2: &MeasuredGraphing<Q>,
    p: &BoundedPartition,
) -> Result<ContainmentReport> {
    same_space(g1, g2)?;
    let k = g1.group().containment_power(g2.group(), MAX_CONTAINMENT_POWER)?;
    let ball = g1.group().ball(k - 1)?;
    let mut reach = HashSet::new();
    for &y in &boundary_mass(g1, p)?.boundary_set {
        reach.extend(g1.orbit_map(&ball, y).into_iter().flatten());
    }
    let witness = boundary_mass(g2, p)?
        .boundary_set
        .into_iter()
        .find(|x| !reach.contains(x));
    Ok(ContainmentReport {
        k,
        contained: witness.is_none(),
        witness,
    })
}

/// Per-element constants `c_h` for `h ∈ B_{S₁}(k-1)`: `μ(hA) <= c_h μ(A)`
/// with `c_h = max_y μ(hy)/μ(y)`, or the `L^p` version
/// `μ(hA) <= ‖μ(h·)/μ‖_p μ(A)^{1/q}`.
fn translate_constants<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    radius: u32,
    p: Option<Exponent>,
    bits: u32,
) -> Result<Interval<Q>> {
    let ball = g.group().ball(radius)?;
    let v = g.num_vertices();
    let images: Vec<Vec<Option<usize>>> = (0..v).map(|x| g.orbit_map(&ball, x)).collect();
    let mut total = Interval::point(Q::zero());
    for h in 0..ball.len() {
        let ratio = |y: usize| -> Q {
            images[y][h].map_or(Q::zero(), |z| g.weight(z).clone() / g.weight(y).clone())
        };
        let c = match p {
            None => Interval::point((0..v).map(ratio).fold(Q::zero(), Q::max_of)),
            Some(p) => {
                let mut sum = Interval::point(Q::zero());
                for y in 0..v {
                    let term = Interval::point(ratio(y)).pow_ratio(p.num, p.den, bits);
                    sum = sum.add(&term.scale(g.weight(y)));
                }
                sum.pow_ratio(p.den, p.num, bits)
            }
        };
        total = total.add(&c);
    }
    Ok(total)
}

/// Change of generating set on one measure space: for the optimal
/// `S₁`-partition `P` at `n`, checks `μ(∂_{S₂}P) <= C · μ(∂_{S₁}P)` (with
/// `p = None`) or `μ(∂_{S₂}P) <= C · μ(∂_{S₁}P)^{1/q}`.
///
/// `C = Σ_{h ∈ B_{S₁}(k-1)} c_h` follows from the boundary containment and
/// one density bound per translate. The single-generator constant
/// `M^{k-1}` is evaluated too and reported in the context.
pub fn check_generating_set_comparison<Q: Scalar>(
    g1: &MeasuredGraphing<Q>,
    g2: &MeasuredGraphing<Q>,
    n: usize,
    p: Option<Exponent>,
) -> Result<BoundCheck<Q>> {
    same_space(g1, g2)?;
    let opt = profile_action_exact(g1, n)?;
    let part = &opt.partition;
    let b1 = boundary_mass(g1, part)?.mass;
    let lhs = boundary_mass(g2, part)?.mass;
    let cont = boundary_containment(g1, g2, part)?;
    let k = cont.k;
    let mut result = None;
    for bits in PRECISION_LADDER {
        let c = translate_constants(g1, k - 1, p, bits)?;
        let base = match p {
            None => Interval::point(b1.clone()),
            Some(p) => {
                let q = p.conjugate();
                Interval::point(b1.clone()).pow_ratio(q.den, q.num, bits)
            }
        };
        // single-generator constant: M = max_s ‖RN_s‖
        let m = match p {
            None => Interval::point(g1.rn_sup_all()),
            Some(p) => {
                let norms: Vec<Interval<Q>> = (0..g1.group().num_generators())
                    .map(|s| g1.rn_p_norm(s, p, bits))
                    .collect();
                Interval {
                    lo: norms.iter().map(|i| i.lo.clone()).fold(Q::zero(), Q::max_of),
                    hi: norms.iter().map(|i| i.hi.clone()).fold(Q::zero(), Q::max_of),
                }
            }
        };
        let literal = Interval {
            lo: powi(&m.lo, k - 1),
            hi: powi(&m.hi, k - 1),
        }
        .mul(&base);
        let rhs = c.mul(&base);
        let verdict = BoundCheck::decide(&lhs, Relation::Le, &rhs);
        let literal_verdict = BoundCheck::decide(&lhs, Relation::Le, &literal);
        result = Some((rhs, verdict, literal, literal_verdict, c));
        if verdict != Verdict::Undecided && literal_verdict != Verdict::Undecided {
            break;
        }
    }
    let (rhs, verdict, literal, literal_verdict, c) = result.expect("ladder is nonempty");
    let verdict = if cont.contained { verdict } else { Verdict::Violated };
    Ok(BoundCheck {
        name: "generating-set".into(),
        lhs,
        rhs,
        relation: Relation::Le,
        verdict,
        context: ctx(&[
            ("n", n.to_string()),
            ("k", k.to_string()),
            ("p", p.map_or("inf".into(), |p| p.to_string())),
            ("s1_boundary", b1.to_string()),
            ("constant_lo", c.lo.to_string()),
            ("constant_hi", c.hi.to_string()),
            ("containment", cont.contained.to_string()),
            ("single_generator_bound_lo", literal.lo.to_string()),
            ("single_generator_bound", literal_verdict.to_string()),
            ("partition", part.encode()),
        ]),
    })
}

/// `I_act(n) > 0` inside the free window; outside it the finite model may
/// reach 0 and the check reports out of window.
pub fn positivity_check<Q: Scalar>(g: &MeasuredGraphing<Q>, n: usize) -> Result<BoundCheck<Q>> {
    let (lhs, how) = action_lower(g, n)?;
    let rhs = Interval::point(Q::zero());
    let mut verdict = BoundCheck::decide(&lhs, Relation::Gt, &rhs);
    let mut context = ctx(&[
        ("n", n.to_string()),
        ("free_window", g.free_window().to_string()),
        ("action_side", how),
    ]);
    if n > g.free_window() {
        context.insert("holds_numerically".into(), (verdict == Verdict::Holds).to_string());
        verdict = Verdict::OutOfWindow;
    }
    Ok(BoundCheck {
        name: "positivity".into(),
        lhs,
        rhs,
        relation: Relation::Gt,
        verdict,
        context,
    })
}
