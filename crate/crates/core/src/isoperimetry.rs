//! Inner and outer boundaries of finite subsets of a marked group and the
//! isoperimetric profile `I(n) = min_{|F| <= n} |∂F| / |F|`.
//!
//! The boundary is taken with respect to left multiplication by generators,
//! `∂F = {g ∈ F : sg ∉ F for some s}`. It is equivariant under right
//! translation, `∂(Fg) = (∂F)g`, so the exact search only looks at sets
//! containing the identity, and since the boundary of a disjoint union of
//! Cayley-graph components is the union of their boundaries it only looks at
//! connected sets.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupKind, MarkedGroup};
use crate::scalar::Scalar;
use crate::tilings;

/// A finite set of elements of one marked group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSubset {
    group: MarkedGroup,
    elements: BTreeSet<GroupElement>,
}

impl GroupSubset {
    pub fn new<I>(group: &MarkedGroup, elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = GroupElement>,
    {
        let mut set = BTreeSet::new();
        for g in elements {
            group.check(&g)?;
            set.insert(g);
        }
        Ok(GroupSubset {
            group: group.clone(),
            elements: set,
        })
    }

    pub(crate) fn from_set(group: &MarkedGroup, elements: BTreeSet<GroupElement>) -> Self {
        GroupSubset {
            group: group.clone(),
            elements,
        }
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter()
    }

    pub fn elements(&self) -> &BTreeSet<GroupElement> {
        &self.elements
    }

    pub fn is_subset(&self, other: &GroupSubset) -> bool {
        self.elements.is_subset(&other.elements)
    }

    fn is_boundary_point(&self, g: &GroupElement) -> bool {
        (0..self.group.num_generators())
            .any(|s| !self.elements.contains(&self.group.left_mul_generator(s, g)))
    }

    /// `{g ∈ F : sg ∉ F for some s ∈ S}`.
    pub fn inner_boundary(&self) -> GroupSubset {
        let set = self
            .elements
            .iter()
            .filter(|g| self.is_boundary_point(g))
            .cloned()
            .collect();
        GroupSubset::from_set(&self.group, set)
    }

    pub fn boundary_size(&self) -> usize {
        self.elements
            .iter()
            .filter(|g| self.is_boundary_point(g))
            .count()
    }

    /// `∂_out F = ∂_in(F^c)`, computed inside `window`. Requires `F ⊆ window`
    /// and `S·F ⊆ window`, which guarantees nothing is cut off.
    pub fn outer_boundary(&self, window: &GroupSubset) -> Result<GroupSubset> {
        if let Some(g) = self.elements.iter().find(|g| !window.contains(g)) {
            return Err(Error::Config(format!("{g} is in F but not in the window")));
        }
        let mut out = BTreeSet::new();
        for g in &self.elements {
            for s in 0..self.group.num_generators() {
                let h = self.group.left_mul_generator(s, g);
                if !window.contains(&h) {
                    return Err(Error::WindowTooSmall(h.to_string()));
                }
                if !self.elements.contains(&h) {
                    out.insert(h);
                }
            }
        }
        Ok(GroupSubset::from_set(&self.group, out))
    }

    /// Exact `|∂F| / |F|`.
    pub fn boundary_ratio<Q: Scalar>(&self) -> Result<Q> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(Q::from_ratio(self.boundary_size() as i64, self.len() as i64))
    }

    /// `F·g`.
    pub fn right_translate(&self, g: &GroupElement) -> Result<GroupSubset> {
        self.group.check(g)?;
        let set = self
            .elements
            .iter()
            .map(|f| self.group.multiply(f, g))
            .collect::<Result<_>>()?;
        Ok(GroupSubset::from_set(&self.group, set))
    }

    /// `K·F = {kf}`.
    pub fn left_product(&self, k: &GroupSubset) -> Result<GroupSubset> {
        let mut set = BTreeSet::new();
        for a in k.iter() {
            for f in self.iter() {
                set.insert(self.group.multiply(a, f)?);
            }
        }
        Ok(GroupSubset::from_set(&self.group, set))
    }

    pub fn symmetric_difference_size(&self, other: &GroupSubset) -> usize {
        self.elements.symmetric_difference(&other.elements).count()
    }

    /// Elements separated by `;`, in canonical order.
    pub fn encode(&self) -> String {
        self.elements
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// One value of the profile with a witness attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfilePoint<Q> {
    pub n: usize,
    pub value: Q,
    pub boundary: usize,
    pub size: usize,
    pub witness: GroupSubset,
}

#[derive(Clone, Debug)]
pub struct ProfileRun<Q> {
    pub points: Vec<ProfilePoint<Q>>,
    /// `false` when the search budget ran out before `n_max`.
    pub complete: bool,
    /// Connected sets visited, summed over all levels.
    pub sets_visited: u64,
}

/// Default connected-set budget for [`profile_exact`].
pub const DEFAULT_SET_BUDGET: u64 = 50_000_000;

/// Default `n_max` for exact profile runs: 10 for ℤ and ℤ², 8 otherwise.
pub fn default_n_max(group: &MarkedGroup) -> usize {
    match group.kind() {
        GroupKind::Zd { d } if d <= 2 => 10,
        _ => 8,
    }
}

pub fn profile_exact<Q: Scalar>(group: &MarkedGroup, n_max: usize) -> ProfileRun<Q> {
    profile_exact_with_budget(group, n_max, DEFAULT_SET_BUDGET)
}

/// Exact profile for `n = 1..=n_max` over connected sets containing `e`.
///
/// Levels are searched one at a time; if the budget runs out during level
/// `n`, the run holds the completed levels `1..n` and `complete == false`.
pub fn profile_exact_with_budget<Q: Scalar>(
    group: &MarkedGroup,
    n_max: usize,
    budget: u64,
) -> ProfileRun<Q> {
    let mut points = Vec::new();
    if n_max == 0 {
        return ProfileRun {
            points,
            complete: true,
            sets_visited: 0,
        };
    }
    let e = group.identity();
    // a singleton is its own boundary
    let singleton = GroupSubset::from_set(group, BTreeSet::from([e]));
    let mut per_size: Vec<Option<SizeBest>> = vec![None; n_max + 1];
    per_size[1] = Some(SizeBest {
        boundary: 1,
        witness: singleton.elements.iter().cloned().collect(),
    });
    points.push(make_point(group, 1, &per_size));

    let mut arena = Arena::new(group.clone());
    let mut visited = 0u64;
    for level in 2..=n_max {
        let mut search = Redelmeier {
            arena: &mut arena,
            limit: level,
            budget: budget.saturating_sub(visited),
            visited: 0,
            best: None,
            members: Vec::with_capacity(level),
            in_set: Vec::new(),
            marked: Vec::new(),
        };
        let ok = search.run();
        visited += search.visited;
        if !ok {
            return ProfileRun {
                points,
                complete: false,
                sets_visited: visited,
            };
        }
        per_size[level] = search.best.take();
        points.push(make_point(group, level, &per_size));
    }
    ProfileRun {
        points,
        complete: true,
        sets_visited: visited,
    }
}

#[derive(Clone, Debug)]
struct SizeBest {
    boundary: usize,
    /// Sorted elements of the lexicographically least minimiser.
    witness: Vec<GroupElement>,
}

fn make_point<Q: Scalar>(
    group: &MarkedGroup,
    n: usize,
    per_size: &[Option<SizeBest>],
) -> ProfilePoint<Q> {
    let mut best: Option<(usize, usize, &Vec<GroupElement>)> = None;
    for (k, entry) in per_size.iter().enumerate().take(n + 1) {
        let Some(sb) = entry else { continue };
        best = match best {
            None => Some((sb.boundary, k, &sb.witness)),
            Some((b, size, w)) => {
                // compare b/size with sb.boundary/k exactly
                let lhs = sb.boundary * size;
                let rhs = b * k;
                if lhs < rhs || (lhs == rhs && sb.witness < *w) {
                    Some((sb.boundary, k, &sb.witness))
                } else {
                    Some((b, size, w))
                }
            }
        };
    }
    let (b, size, w) = best.expect("size 1 is always present");
    ProfilePoint {
        n,
        value: Q::from_ratio(b as i64, size as i64),
        boundary: b,
        size,
        witness: GroupSubset::from_set(group, w.iter().cloned().collect()),
    }
}

/// Interned elements with lazily computed Cayley-graph neighbours.
struct Arena {
    group: MarkedGroup,
    elems: Vec<GroupElement>,
    index: HashMap<GroupElement, u32>,
    nbrs: Vec<Option<Box<[u32]>>>,
}

impl Arena {
    fn new(group: MarkedGroup) -> Self {
        let mut a = Arena {
            group,
            elems: Vec::new(),
            index: HashMap::new(),
            nbrs: Vec::new(),
        };
        let e = a.group.identity();
        a.intern(e);
        a
    }

    fn intern(&mut self, g: GroupElement) -> u32 {
        if let Some(&i) = self.index.get(&g) {
            return i;
        }
        let i = self.elems.len() as u32;
        self.index.insert(g.clone(), i);
        self.elems.push(g);
        self.nbrs.push(None);
        i
    }

    fn neighbours(&mut self, i: u32) -> Box<[u32]> {
        if let Some(n) = &self.nbrs[i as usize] {
            return n.clone();
        }
        let g = self.elems[i as usize].clone();
        let list: Box<[u32]> = (0..self.group.num_generators())
            .map(|s| {
                let h = self.group.left_mul_generator(s, &g);
                self.intern(h)
            })
            .collect();
        self.nbrs[i as usize] = Some(list.clone());
        list
    }
}

/// Redelmeier's enumeration of connected sets containing the root: every
/// connected set is produced exactly once, each one extending its parent by
/// an element taken from the untried frontier.
struct Redelmeier<'a> {
    arena: &'a mut Arena,
    limit: usize,
    budget: u64,
    visited: u64,
    best: Option<SizeBest>,
    members: Vec<u32>,
    in_set: Vec<bool>,
    marked: Vec<bool>,
}

impl Redelmeier<'_> {
    fn ensure(&mut self, i: u32) {
        let need = i as usize + 1;
        if self.in_set.len() < need {
            let len = need.max(self.in_set.len() * 2);
            self.in_set.resize(len, false);
            self.marked.resize(len, false);
        }
    }

    fn run(&mut self) -> bool {
        self.ensure(0);
        self.marked[0] = true;
        let mut untried = vec![0u32];
        self.extend(&mut untried)
    }

    /// Returns `false` when the budget is exhausted.
    fn extend(&mut self, untried: &mut Vec<u32>) -> bool {
        while let Some(c) = untried.pop() {
            self.visited += 1;
            if self.visited > self.budget {
                return false;
            }
            self.ensure(c);
            self.members.push(c);
            self.in_set[c as usize] = true;
            if self.members.len() == self.limit {
                self.record();
            } else {
                let mut next = untried.clone();
                let mut fresh = Vec::new();
                for n in self.arena.neighbours(c).iter().copied() {
                    self.ensure(n);
                    if !self.marked[n as usize] {
                        self.marked[n as usize] = true;
                        fresh.push(n);
                        next.push(n);
                    }
                }
                let ok = self.extend(&mut next);
                for n in fresh {
                    self.marked[n as usize] = false;
                }
                if !ok {
                    return false;
                }
            }
            self.in_set[c as usize] = false;
            self.members.pop();
        }
        true
    }

    fn record(&mut self) {
        let mut boundary = 0;
        for k in 0..self.members.len() {
            let m = self.members[k];
            let nb = self.arena.neighbours(m);
            if nb
                .iter()
                .any(|&n| !self.in_set.get(n as usize).copied().unwrap_or(false))
            {
                boundary += 1;
            }
        }
        let better = match &self.best {
            None => true,
            Some(b) => boundary <= b.boundary,
        };
        if !better {
            return;
        }
        let mut witness: Vec<GroupElement> = self
            .members
            .iter()
            .map(|&m| self.arena.elems[m as usize].clone())
            .collect();
        witness.sort();
        let replace = match &self.best {
            None => true,
            Some(b) => boundary < b.boundary || witness < b.witness,
        };
        if replace {
            self.best = Some(SizeBest { boundary, witness });
        }
    }
}

/// Shape families giving explicit upper bounds on the profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeFamily {
    /// `[0, k)^d` in ℤ^d.
    Cubes,
    /// `F_m = [0,m] × [0,m] × [0,m²]` in H₃(ℤ).
    Cuboids,
    /// `[0, k)` in ℤ.
    Intervals,
}

impl std::str::FromStr for ShapeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cubes" => Ok(ShapeFamily::Cubes),
            "cuboids" | "cuboids_n_n_n2" => Ok(ShapeFamily::Cuboids),
            "intervals" => Ok(ShapeFamily::Intervals),
            other => Err(Error::Config(format!("unknown shape family `{other}`"))),
        }
    }
}

/// Members of `family` with at most `n` elements, smallest first.
pub fn family_members(
    group: &MarkedGroup,
    family: ShapeFamily,
    n: usize,
) -> Result<Vec<GroupSubset>> {
    let mut out = Vec::new();
    match (family, group.kind()) {
        (ShapeFamily::Cubes, GroupKind::Zd { d }) | (ShapeFamily::Intervals, GroupKind::Zd { d }) => {
            if family == ShapeFamily::Intervals && d != 1 {
                return Err(Error::Config("intervals need ℤ (d = 1)".into()));
            }
            let mut k = 1usize;
            while k.checked_pow(d as u32).is_some_and(|v| v <= n) {
                out.push(tilings::cube(group, k)?);
                k += 1;
            }
        }
        (ShapeFamily::Cuboids, GroupKind::Heisenberg) => {
            let mut m = 0usize;
            while tilings::cuboid_size(m) <= n {
                out.push(tilings::heisenberg_cuboid(group, m)?);
                m += 1;
            }
        }
        (f, k) => {
            return Err(Error::Config(format!(
                "shape family {f:?} does not apply to {k:?}"
            )))
        }
    }
    Ok(out)
}

/// Smallest boundary ratio among family members of size at most `n`: an
/// upper bound on `I(n)`.
pub fn profile_upper<Q: Scalar>(
    group: &MarkedGroup,
    n: usize,
    family: ShapeFamily,
) -> Result<(Q, GroupSubset)> {
    let members = family_members(group, family, n)?;
    let mut best: Option<(usize, usize, GroupSubset)> = None;
    for m in members {
        let b = m.boundary_size();
        let take = match &best {
            None => true,
            Some((bb, sz, _)) => b * sz < bb * m.len(),
        };
        if take {
            best = Some((b, m.len(), m));
        }
    }
    let (b, sz, m) = best.ok_or_else(|| Error::Config(format!("no family member of size <= {n}")))?;
    Ok((Q::from_ratio(b as i64, sz as i64), m))
}
