//! Tiles and multi-tiles: shapes whose right translates by center sets
//! partition the group, checked on finite windows.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupKind, MarkedGroup};
use crate::isoperimetry::GroupSubset;
use crate::scalar::Scalar;

/// Centers of one shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CenterSet {
    Explicit(Vec<GroupElement>),
    /// `{g_1^{k_1} g_2^{k_2} ... g_r^{k_r} : k ∈ ℤ^r}`, product taken in the
    /// listed order.
    Lattice(Vec<GroupElement>),
}

/// Shapes `T_1..T_N` with center sets `C_1..C_N`; a tile is the case `N = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiTile {
    shapes: Vec<GroupSubset>,
    centers: Vec<CenterSet>,
}

impl MultiTile {
    pub fn new(shapes: Vec<GroupSubset>, centers: Vec<CenterSet>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::Config("a multi-tile needs at least one shape".into()));
        }
        if shapes.len() != centers.len() {
            return Err(Error::Config(format!(
                "{} shapes but {} center sets",
                shapes.len(),
                centers.len()
            )));
        }
        let group = shapes[0].group().clone();
        let e = group.identity();
        for (i, t) in shapes.iter().enumerate() {
            if t.group() != &group {
                return Err(Error::Config("shapes from different groups".into()));
            }
            if !t.contains(&e) {
                return Err(Error::Config(format!("shape {i} does not contain the identity")));
            }
        }
        for c in &centers {
            let els = match c {
                CenterSet::Explicit(v) | CenterSet::Lattice(v) => v,
            };
            for g in els {
                group.check(g)?;
            }
        }
        Ok(MultiTile { shapes, centers })
    }

    pub fn tile(shape: GroupSubset, centers: CenterSet) -> Result<Self> {
        Self::new(vec![shape], vec![centers])
    }

    pub fn group(&self) -> &MarkedGroup {
        self.shapes[0].group()
    }

    pub fn shapes(&self) -> &[GroupSubset] {
        &self.shapes
    }

    pub fn centers(&self) -> &[CenterSet] {
        &self.centers
    }

    pub fn max_shape_size(&self) -> usize {
        self.shapes.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    /// `max_i |∂T_i| / |T_i|`.
    pub fn max_boundary_ratio<Q: Scalar>(&self) -> Q {
        self.shapes
            .iter()
            .map(|s| s.boundary_ratio::<Q>().expect("shapes are nonempty"))
            .fold(Q::zero(), Q::max_of)
    }

    /// Largest word norm over all shape elements.
    pub fn diameter(&self) -> Result<u32> {
        let mut all: BTreeSet<&GroupElement> = BTreeSet::new();
        for s in &self.shapes {
            all.extend(s.iter());
        }
        let group = self.group();
        let mut ball = group.ball(0)?;
        let mut r = 0;
        for g in all {
            while !ball.contains(g) {
                r += 1;
                ball = group.ball(r)?;
            }
            r = r.max(ball.norm(g).unwrap());
        }
        Ok(r)
    }

    /// `max_i max_{t,t' ∈ T_i} |t⁻¹t'|`: fibers `T_i·x` of an action are
    /// injective as soon as no nonidentity element of this norm fixes a point.
    pub fn spread(&self) -> Result<u32> {
        let group = self.group();
        let mut spread = 0;
        let mut ball = group.ball(0)?;
        for shape in &self.shapes {
            let els: Vec<&GroupElement> = shape.iter().collect();
            for a in &els {
                let inv = group.inverse(a);
                for b in &els {
                    let d = group.multiply(&inv, b)?;
                    while !ball.contains(&d) {
                        ball.extend(crate::groups::DEFAULT_BALL_BUDGET)?;
                    }
                    spread = spread.max(ball.norm(&d).unwrap());
                }
            }
        }
        Ok(spread)
    }

    pub fn from_json(group: &MarkedGroup, text: &str) -> Result<Self> {
        let raw: TileJson = serde_json::from_str(text)?;
        Self::from_raw(group, &raw)
    }

    pub fn from_value(group: &MarkedGroup, v: &Value) -> Result<Self> {
        let raw: TileJson = serde_json::from_value(v.clone())?;
        Self::from_raw(group, &raw)
    }

    fn from_raw(group: &MarkedGroup, raw: &TileJson) -> Result<Self> {
        let shapes = raw
            .shapes
            .iter()
            .map(|els| {
                let els = els
                    .iter()
                    .map(|v| group.element_from_json(v))
                    .collect::<Result<Vec<_>>>()?;
                GroupSubset::new(group, els)
            })
            .collect::<Result<Vec<_>>>()?;
        let specs: Vec<CentersJson> = match &raw.centers {
            CentersField::One(c) => vec![c.clone(); shapes.len()],
            CentersField::Many(cs) => cs.clone(),
        };
        if matches!(raw.centers, CentersField::One(_)) && shapes.len() > 1 {
            return Err(Error::Config(
                "a multi-tile needs one center set per shape (use a list)".into(),
            ));
        }
        let centers = specs
            .iter()
            .map(|c| {
                let conv = |v: &Vec<Value>| {
                    v.iter()
                        .map(|x| group.element_from_json(x))
                        .collect::<Result<Vec<_>>>()
                };
                Ok(match c {
                    CentersJson::Lattice { generators } => CenterSet::Lattice(conv(generators)?),
                    CentersJson::Explicit { list } => CenterSet::Explicit(conv(list)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shapes, centers)
    }

    pub fn to_json(&self) -> Value {
        let group = self.group();
        let shapes: Vec<Value> = self
            .shapes
            .iter()
            .map(|s| Value::from(s.iter().map(|g| group.element_to_json(g)).collect::<Vec<_>>()))
            .collect();
        let centers: Vec<Value> = self
            .centers
            .iter()
            .map(|c| match c {
                CenterSet::Lattice(v) => serde_json::json!({
                    "kind": "lattice",
                    "generators": v.iter().map(|g| group.element_to_json(g)).collect::<Vec<_>>()
                }),
                CenterSet::Explicit(v) => serde_json::json!({
                    "kind": "explicit",
                    "list": v.iter().map(|g| group.element_to_json(g)).collect::<Vec<_>>()
                }),
            })
            .collect();
        let centers = if centers.len() == 1 {
            centers.into_iter().next().unwrap()
        } else {
            Value::from(centers)
        };
        serde_json::json!({ "shapes": shapes, "centers": centers })
    }
}

#[derive(Deserialize, Serialize)]
struct TileJson {
    shapes: Vec<Vec<Value>>,
    centers: CentersField,
}

#[derive(Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum CentersField {
    One(CentersJson),
    Many(Vec<CentersJson>),
}

#[derive(Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CentersJson {
    Lattice { generators: Vec<Value> },
    Explicit { list: Vec<Value> },
}

/// `[0, k)^d` in ℤ^d.
pub fn cube(group: &MarkedGroup, k: usize) -> Result<GroupSubset> {
    let GroupKind::Zd { d } = group.kind() else {
        return Err(Error::UnsupportedGroup("cubes live in ℤ^d".into()));
    };
    let mut els = Vec::with_capacity(k.pow(d as u32));
    let mut idx = vec![0i64; d];
    if k == 0 {
        return GroupSubset::new(group, els);
    }
    loop {
        els.push(GroupElement::Zd(idx.clone()));
        let mut i = 0;
        loop {
            if i == d {
                return GroupSubset::new(group, els);
            }
            idx[i] += 1;
            if idx[i] < k as i64 {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// `|F_m| = (m+1)²(m²+1)`.
pub fn cuboid_size(m: usize) -> usize {
    (m + 1) * (m + 1) * (m * m + 1)
}

/// `F_m = [0,m] × [0,m] × [0,m²]` in Heisenberg coordinates.
pub fn heisenberg_cuboid(group: &MarkedGroup, m: usize) -> Result<GroupSubset> {
    if group.kind() != GroupKind::Heisenberg {
        return Err(Error::UnsupportedGroup("cuboids live in H₃(ℤ)".into()));
    }
    let m = m as i64;
    let els = (0..=m).flat_map(|a| {
        (0..=m).flat_map(move |b| (0..=m * m).map(move |c| GroupElement::heisenberg(a, b, c)))
    });
    GroupSubset::new(group, els)
}

/// The cube `[0,k)^d` with centers `(kℤ)^d`.
pub fn cube_tile(group: &MarkedGroup, k: usize) -> Result<MultiTile> {
    let GroupKind::Zd { d } = group.kind() else {
        return Err(Error::UnsupportedGroup("cube tiles live in ℤ^d".into()));
    };
    let gens = (0..d)
        .map(|i| {
            let mut v = vec![0; d];
            v[i] = k as i64;
            GroupElement::Zd(v)
        })
        .collect();
    MultiTile::tile(cube(group, k)?, CenterSet::Lattice(gens))
}

/// `F_m` with centers `(0,k₁(m+1),0)·(k₂(m+1),0,0)·(0,0,k₃(m²+1))`.
///
/// Right translation by `(0,β,0)` shears the fibre `a = i` by `iβ` in the
/// central coordinate; the column `[0, m²]` has `m²+1` points, so central
/// translates are spaced by `m²+1`.
pub fn heisenberg_tile(group: &MarkedGroup, m: usize) -> Result<MultiTile> {
    let side = m as i64 + 1;
    let column = (m * m) as i64 + 1;
    let gens = vec![
        GroupElement::heisenberg(0, side, 0),
        GroupElement::heisenberg(side, 0, 0),
        GroupElement::heisenberg(0, 0, column),
    ];
    MultiTile::tile(heisenberg_cuboid(group, m)?, CenterSet::Lattice(gens))
}

/// Which translate `T_shape · c` a window point was first covered by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslateRef {
    pub shape: usize,
    pub center: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub point: GroupElement,
    pub first: TranslateRef,
    pub second: TranslateRef,
}

#[derive(Clone, Debug)]
pub struct WindowReport {
    pub radius: u32,
    /// Max shape diameter; coverage is required on `B(e, radius - margin)`.
    pub margin: u32,
    pub window_size: usize,
    pub coverage_region_size: usize,
    /// Sum over window points of the number of translates covering them.
    pub total_coverage: usize,
    pub translates_used: usize,
    pub disjoint: bool,
    pub covered: bool,
    pub collision: Option<Collision>,
    pub uncovered: Option<GroupElement>,
}

impl WindowReport {
    pub fn pass(&self) -> bool {
        self.disjoint && self.covered
    }
}

fn power(group: &MarkedGroup, g: &GroupElement, k: i64) -> GroupElement {
    let base = if k < 0 { group.inverse(g) } else { g.clone() };
    let mut result = group.identity();
    let mut b = base;
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result = group.multiply(&result, &b).expect("same group");
        }
        b = group.multiply(&b, &b).expect("same group");
        e >>= 1;
    }
    result
}

/// Integer vectors with `max |k_i| == s`.
fn shell(dim: usize, s: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut k = vec![-s; dim];
    if dim == 0 {
        if s == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    loop {
        if k.iter().any(|x| x.abs() == s) {
            out.push(k.clone());
        }
        let mut i = 0;
        loop {
            if i == dim {
                return out;
            }
            k[i] += 1;
            if k[i] <= s {
                break;
            }
            k[i] = -s;
            i += 1;
        }
    }
}

/// Checks the partition property of the right translates `T_i·c` on the
/// window `B(e, radius)`: translates must not overlap anywhere in the window,
/// and every point of `B(e, radius - diameter)` must be covered.
///
/// Lattice centers are enumerated shell by shell in exponent space; the scan
/// stops after the first shell none of whose translates meets the window.
pub fn verify_multitile_window(mt: &MultiTile, radius: u32) -> Result<WindowReport> {
    let group = mt.group();
    let margin = mt.diameter()?;
    let ball = group.ball(radius)?;
    let mut owner: Vec<Option<TranslateRef>> = vec![None; ball.len()];
    let mut counts = vec![0usize; ball.len()];
    let mut collision: Option<Collision> = None;
    let mut translates_used = 0;

    let mut place = |shape: usize, c: &GroupElement| -> bool {
        let mut hit = false;
        for t in mt.shapes[shape].iter() {
            let p = group.multiply(t, c).expect("same group");
            if let Some(i) = ball.index_of(&p) {
                hit = true;
                counts[i] += 1;
                let this = TranslateRef {
                    shape,
                    center: c.clone(),
                };
                match &owner[i] {
                    None => owner[i] = Some(this),
                    Some(first) => {
                        if collision.is_none() {
                            collision = Some(Collision {
                                point: p.clone(),
                                first: first.clone(),
                                second: this,
                            });
                        }
                    }
                }
            }
        }
        hit
    };

    for (shape, centers) in mt.centers.iter().enumerate() {
        match centers {
            CenterSet::Explicit(list) => {
                for c in list {
                    if place(shape, c) {
                        translates_used += 1;
                    }
                }
            }
            CenterSet::Lattice(gens) => {
                // a degenerate lattice revisits centers forever; stop once a
                // shell contributes no new relevant center
                let mut seen: HashSet<GroupElement> = HashSet::new();
                let mut s = 0i64;
                loop {
                    let mut any = false;
                    for k in shell(gens.len(), s) {
                        let c = gens
                            .iter()
                            .zip(&k)
                            .fold(group.identity(), |acc, (g, &ki)| {
                                group.multiply(&acc, &power(group, g, ki)).expect("same group")
                            });
                        if place(shape, &c) {
                            translates_used += 1;
                            any |= seen.insert(c);
                        }
                    }
                    if !any && s > 0 || gens.is_empty() {
                        break;
                    }
                    s += 1;
                }
            }
        }
    }

    let inner = radius.saturating_sub(margin);
    let coverage_region_size = if radius >= margin {
        ball.norms().iter().filter(|&&n| n <= inner).count()
    } else {
        0
    };
    let uncovered = (0..coverage_region_size)
        .find(|&i| counts[i] == 0)
        .map(|i| ball.elements()[i].clone());
    Ok(WindowReport {
        radius,
        margin,
        window_size: ball.len(),
        coverage_region_size,
        total_coverage: counts.iter().sum(),
        translates_used,
        disjoint: collision.is_none(),
        covered: uncovered.is_none(),
        collision,
        uncovered,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport<Q> {
    pub k: GroupSubset,
    pub epsilon: Q,
    /// `|KT Δ T| / |T|`.
    pub achieved: Q,
    pub pass: bool,
}

pub fn invariance<Q: Scalar>(
    t: &GroupSubset,
    k: &GroupSubset,
    epsilon: Q,
) -> Result<InvarianceReport<Q>> {
    if t.is_empty() {
        return Err(Error::EmptySet);
    }
    let kt = t.left_product(k)?;
    let achieved = Q::from_ratio(kt.symmetric_difference_size(t) as i64, t.len() as i64);
    Ok(InvarianceReport {
        k: k.clone(),
        pass: achieved <= epsilon,
        epsilon,
        achieved,
    })
}

/// The Følner tile of the built-in family with at most `n` elements and the
/// smallest boundary ratio: the largest cube `k^d <= n` in ℤ^d, the largest
/// `F_m` with `|F_m| <= n` in H₃(ℤ). The returned tile has been checked on a
/// window of radius `diameter + 2`.
pub fn folner_multitile_sequence(group: &MarkedGroup, n: usize) -> Result<(MultiTile, WindowReport)> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let mt = match group.kind() {
        GroupKind::Zd { d } => {
            let mut k = 1;
            while (k + 1usize).pow(d as u32) <= n {
                k += 1;
            }
            cube_tile(group, k)?
        }
        GroupKind::Heisenberg => {
            let mut m = 0;
            while cuboid_size(m + 1) <= n {
                m += 1;
            }
            heisenberg_tile(group, m)?
        }
        other => {
            return Err(Error::UnsupportedGroup(format!(
                "no built-in tiling family for {other:?}"
            )))
        }
    };
    let radius = mt.diameter()? + 2;
    let report = verify_multitile_window(&mt, radius)?;
    if !report.pass() {
        return Err(Error::Config(format!(
            "built-in tile failed its window check: {report:?}"
        )));
    }
    Ok((mt, report))
}
