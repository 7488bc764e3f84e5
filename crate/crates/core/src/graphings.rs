//! Finite measured graphings: a weighted vertex set with one partial
//! injection per generator of a marked group.

use std::collections::{BTreeMap, HashSet};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::groups::{Ball, GroupDescriptor, GroupElement, GroupKind, MarkedGroup};
use crate::scalar::{Exponent, Interval, Scalar, Verdict, PRECISION_LADDER};

/// Largest ball built while computing the free window.
const FREE_WINDOW_BALL_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredGraphing<Q> {
    group: MarkedGroup,
    weights: Vec<Q>,
    /// `maps[s][x] = φ_s(x)`, indexed by generator index of `group`.
    maps: Vec<Vec<Option<usize>>>,
    free_window: usize,
}

impl<Q: Scalar> MeasuredGraphing<Q> {
    /// Validates weights (positive, total exactly 1), map shapes, injectivity
    /// and `φ_{s⁻¹} = φ_s⁻¹`, then computes the free window.
    pub fn new(group: &MarkedGroup, weights: Vec<Q>, maps: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let v = weights.len();
        if v == 0 {
            return Err(Error::InvalidGraphing("no vertices".into()));
        }
        if let Some(x) = weights.iter().position(|w| *w <= Q::zero()) {
            return Err(Error::InvalidGraphing(format!(
                "vertex {x} has nonpositive weight {}",
                weights[x]
            )));
        }
        let total = weights.iter().cloned().fold(Q::zero(), |a, b| a + b);
        if !total.same_as(&Q::one()) {
            return Err(Error::Normalization(total.to_string()));
        }
        if maps.len() != group.num_generators() {
            return Err(Error::InvalidGraphing(format!(
                "{} maps for {} generators",
                maps.len(),
                group.num_generators()
            )));
        }
        for (s, map) in maps.iter().enumerate() {
            let label = group.label(s);
            if map.len() != v {
                return Err(Error::InvalidGraphing(format!(
                    "map {label} has length {} (expected {v})",
                    map.len()
                )));
            }
            let mut hit = vec![false; v];
            for (x, y) in map.iter().enumerate() {
                let Some(y) = *y else { continue };
                if y >= v {
                    return Err(Error::InvalidGraphing(format!(
                        "map {label} sends {x} to missing vertex {y}"
                    )));
                }
                if std::mem::replace(&mut hit[y], true) {
                    return Err(Error::InvalidGraphing(format!(
                        "map {label} is not injective at target {y}"
                    )));
                }
                let inv = group.inverse_label(s);
                if maps[inv][y] != Some(x) {
                    return Err(Error::InvalidGraphing(format!(
                        "map {} is not the inverse of {label} at vertex {x}",
                        group.label(inv)
                    )));
                }
            }
        }
        let mut g = MeasuredGraphing {
            group: group.clone(),
            weights,
            maps,
            free_window: 0,
        };
        g.free_window = g.compute_free_window()?;
        Ok(g)
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> &Q {
        &self.weights[x]
    }

    pub fn maps(&self) -> &[Vec<Option<usize>>] {
        &self.maps
    }

    /// `φ_s(x)`.
    pub fn apply(&self, s: usize, x: usize) -> Option<usize> {
        self.maps[s][x]
    }

    /// Applies a word in application order.
    pub fn apply_word(&self, word: &[usize], x: usize) -> Option<usize> {
        word.iter().try_fold(x, |y, &s| self.apply(s, y))
    }

    /// Largest `r` such that `g ↦ g·x` is injective on `B(e, r)` for every
    /// vertex `x`, where `g·x` follows the ball's geodesic words and pairs
    /// with an undefined side are ignored. Equivalently, no nonidentity
    /// element of `B(e, 2r)` that is a product `h⁻¹g` of two such words
    /// fixes a vertex.
    pub fn free_window(&self) -> usize {
        self.free_window
    }

    /// `μ(A)`.
    pub fn measure<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> Q {
        set.into_iter()
            .fold(Q::zero(), |acc, &x| acc + self.weights[x].clone())
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.iter().all(|w| w.same_as(&self.weights[0]))
    }

    pub fn is_total(&self) -> bool {
        self.maps.iter().all(|m| m.iter().all(Option::is_some))
    }

    /// Every map is a total bijection preserving the weights.
    pub fn is_measure_preserving(&self) -> bool {
        self.maps.iter().all(|m| {
            m.iter()
                .enumerate()
                .all(|(x, y)| y.is_some_and(|y| self.weights[y].same_as(&self.weights[x])))
        })
    }

    /// Single orbit under all generators.
    pub fn is_transitive(&self) -> bool {
        let v = self.num_vertices();
        let mut seen = vec![false; v];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for m in &self.maps {
                if let Some(y) = m[x] {
                    if !seen[y] {
                        seen[y] = true;
                        count += 1;
                        stack.push(y);
                    }
                }
            }
        }
        count == v
    }

    /// `g·x` for every element `g` of `ball`, in ball order.
    pub fn orbit_map(&self, ball: &Ball, x: usize) -> Vec<Option<usize>> {
        let mut out: Vec<Option<usize>> = Vec::with_capacity(ball.len());
        for i in 0..ball.len() {
            let y = match ball.parent(i) {
                None => Some(x),
                Some((p, s)) => out[p].and_then(|z| self.apply(s, z)),
            };
            out.push(y);
        }
        out
    }

    fn compute_free_window(&self) -> Result<usize> {
        let v = self.num_vertices();
        let mut ball = self.group.ball(0)?;
        // positions of B(r) for each vertex; injectivity fails first at some
        // sphere, so grow one sphere at a time
        let mut seen: Vec<HashSet<usize>> = (0..v).map(|x| HashSet::from([x])).collect();
        let mut images: Vec<Vec<Option<usize>>> = (0..v).map(|x| vec![Some(x)]).collect();
        loop {
            let r = ball.radius() as usize;
            if r >= v || ball.len() > FREE_WINDOW_BALL_BUDGET / 2 {
                return Ok(r);
            }
            let start = ball.len();
            ball.extend(FREE_WINDOW_BALL_BUDGET)?;
            for x in 0..v {
                let img = &mut images[x];
                for i in start..ball.len() {
                    let (p, s) = ball.parent(i).expect("nonidentity");
                    let y = img[p].and_then(|z| self.apply(s, z));
                    img.push(y);
                    if let Some(y) = y {
                        if !seen[x].insert(y) {
                            return Ok(r);
                        }
                    }
                }
            }
        }
    }

    /// `dφ_s_*μ/dμ(x) = μ(φ_s⁻¹(x)) / μ(x)`, zero where `φ_s⁻¹(x)` is undefined.
    pub fn rn(&self, s: usize, x: usize) -> Q {
        match self.apply(self.group.inverse_label(s), x) {
            Some(y) => self.weights[y].clone() / self.weights[x].clone(),
            None => Q::zero(),
        }
    }

    pub fn rn_profile(&self, s: usize) -> Vec<Q> {
        (0..self.num_vertices()).map(|x| self.rn(s, x)).collect()
    }

    /// `‖RN_s‖_∞`.
    pub fn rn_sup(&self, s: usize) -> Q {
        (0..self.num_vertices())
            .map(|x| self.rn(s, x))
            .fold(Q::zero(), Q::max_of)
    }

    /// `max_s ‖RN_s‖_∞`.
    pub fn rn_sup_all(&self) -> Q {
        (0..self.group.num_generators())
            .map(|s| self.rn_sup(s))
            .fold(Q::zero(), Q::max_of)
    }

    /// Enclosure of `‖RN_s‖_p = (Σ_x μ(x) RN_s(x)^p)^{1/p}`.
    pub fn rn_p_norm(&self, s: usize, p: Exponent, bits: u32) -> Interval<Q> {
        let mut total = Interval::point(Q::zero());
        for x in 0..self.num_vertices() {
            let f = Interval::point(self.rn(s, x));
            let term = f.pow_ratio(p.num, p.den, bits).scale(&self.weights[x]);
            total = total.add(&term);
        }
        total.pow_ratio(p.den, p.num, bits)
    }

    /// Checks `μ(φ_s A) <= ‖RN_{s⁻¹}‖_p · μ(A)^{1/q}`.
    ///
    /// `μ(φ_s A) = Σ_{x∈A} μ(φ_s x) = ∫_A RN_{s⁻¹} dμ`, so the density that
    /// controls the image of `A` under `φ_s` is the one of `s⁻¹`.
    pub fn holder_pushforward_bound(
        &self,
        s: usize,
        set: &[usize],
        p: Exponent,
    ) -> Result<HolderReport<Q>> {
        let mut image = Vec::with_capacity(set.len());
        for &x in set {
            if x >= self.num_vertices() {
                return Err(Error::Parameter(format!("vertex {x} out of range")));
            }
            match self.apply(s, x) {
                Some(y) => image.push(y),
                None => {
                    return Err(Error::Parameter(format!(
                        "map {} is undefined at vertex {x}",
                        self.group.label(s)
                    )))
                }
            }
        }
        let mu_a = self.measure(set);
        let mu_sa = self.measure(&image);
        let q = p.conjugate();
        let density = self.group.inverse_label(s);
        let mut last = None;
        for bits in PRECISION_LADDER {
            let norm = self.rn_p_norm(density, p, bits);
            // μ(A)^{1/q} = μ(A)^{(num - den)/num} with q = num/(num - den)
            let mu_pow = Interval::point(mu_a.clone()).pow_ratio(q.den, q.num, bits);
            let bound = norm.mul(&mu_pow);
            let verdict = bound.ge_verdict(&mu_sa);
            last = Some(HolderReport {
                generator: self.group.label(s).to_string(),
                density_generator: self.group.label(density).to_string(),
                p,
                mu_a: mu_a.clone(),
                mu_image: mu_sa.clone(),
                rn_norm: norm,
                bound,
                verdict,
            });
            if verdict != Verdict::Undecided {
                break;
            }
        }
        Ok(last.expect("ladder is nonempty"))
    }

    /// Checks `m(s⁻¹) <= RN_s(x) <= 1/m(s)` at every vertex for an
    /// `m`-stationary `μ`, i.e. `Σ_s m(s) μ(φ_s⁻¹{x}) = μ(x)` for all `x`.
    pub fn stationary_rn_bounds(&self, m: &[Q]) -> Result<StationaryReport<Q>> {
        let k = self.group.num_generators();
        if m.len() != k {
            return Err(Error::Parameter(format!(
                "{} probabilities for {k} generators",
                m.len()
            )));
        }
        let total = m.iter().cloned().fold(Q::zero(), |a, b| a + b);
        if m.iter().any(|p| *p < Q::zero()) || !total.same_as(&Q::one()) {
            return Err(Error::Parameter("m is not a probability vector".into()));
        }
        for x in 0..self.num_vertices() {
            let mut avg = Q::zero();
            for (s, ms) in m.iter().enumerate() {
                if let Some(y) = self.apply(self.group.inverse_label(s), x) {
                    avg = avg + ms.clone() * self.weights[y].clone();
                }
            }
            if !avg.same_as(&self.weights[x]) {
                return Err(Error::NotStationary {
                    vertex: x,
                    mass: self.weights[x].to_string(),
                    averaged: avg.to_string(),
                });
            }
        }
        let mut violations = Vec::new();
        let mut literal_violations = 0;
        for s in 0..k {
            let inv = self.group.inverse_label(s);
            for x in 0..self.num_vertices() {
                let rn = self.rn(s, x);
                let lower = m[inv].clone();
                let upper = (m[s] > Q::zero()).then(|| Q::one() / m[s].clone());
                let lit_upper = (m[inv] > Q::zero()).then(|| Q::one() / m[inv].clone());
                if rn < m[s] || lit_upper.is_some_and(|u| rn > u) {
                    literal_violations += 1;
                }
                if rn < lower || upper.as_ref().is_some_and(|u| rn > *u) {
                    violations.push(RnViolation {
                        generator: self.group.label(s).to_string(),
                        vertex: x,
                        rn,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(StationaryReport {
            checked: k * self.num_vertices(),
            violations,
            literal_violations,
        })
    }

    pub fn to_json(&self) -> Value {
        let maps: serde_json::Map<String, Value> = self
            .maps
            .iter()
            .enumerate()
            .map(|(s, m)| {
                let targets: Vec<Value> = m
                    .iter()
                    .map(|y| y.map_or(Value::Null, Value::from))
                    .collect();
                (self.group.label(s).to_string(), Value::from(targets))
            })
            .collect();
        serde_json::json!({
            "vertices": self.num_vertices(),
            "weights": self.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "maps": maps,
            "group": serde_json::to_value(self.group.descriptor()).expect("descriptor serializes"),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidGraphing(m.to_string());
        let n = v
            .get("vertices")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing \"vertices\""))? as usize;
        let desc: GroupDescriptor = serde_json::from_value(
            v.get("group").cloned().ok_or_else(|| bad("missing \"group\""))?,
        )?;
        let group = MarkedGroup::from_descriptor(&desc)?;
        let weights = v
            .get("weights")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"weights\""))?
            .iter()
            .map(|w| match w {
                Value::String(s) => Ok(Q::parse_scalar(s)?),
                Value::Number(x) => Ok(Q::parse_scalar(&x.to_string())?),
                _ => Err(bad("weights must be strings \"p/q\"")),
            })
            .collect::<Result<Vec<Q>>>()?;
        if weights.len() != n {
            return Err(bad("weights length differs from vertex count"));
        }
        let raw = v
            .get("maps")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing \"maps\""))?;
        let mut maps = vec![None; group.num_generators()];
        for (label, targets) in raw {
            let s = group
                .label_index(label)
                .ok_or_else(|| bad(&format!("unknown generator label {label}")))?;
            let targets = targets
                .as_array()
                .ok_or_else(|| bad("map must be an array"))?
                .iter()
                .map(|t| match t {
                    Value::Null => Ok(None),
                    t => t
                        .as_u64()
                        .map(|y| Some(y as usize))
                        .ok_or_else(|| bad("map targets must be vertex indices or null")),
                })
                .collect::<Result<Vec<_>>>()?;
            maps[s] = Some(targets);
        }
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(s, m)| m.ok_or_else(|| bad(&format!("no map for {}", group.label(s)))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(&group, weights, maps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport<Q> {
    pub generator: String,
    /// Label whose Radon–Nikodym derivative enters the bound.
    pub density_generator: String,
    pub p: Exponent,
    pub mu_a: Q,
    pub mu_image: Q,
    pub rn_norm: Interval<Q>,
    pub bound: Interval<Q>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RnViolation<Q> {
    pub generator: String,
    pub vertex: usize,
    pub rn: Q,
    pub lower: Q,
    pub upper: Option<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryReport<Q> {
    pub checked: usize,
    pub violations: Vec<RnViolation<Q>>,
    /// Vertex/generator pairs outside `[m(s), 1/m(s⁻¹)]`.
    pub literal_violations: usize,
}

impl<Q> StationaryReport<Q> {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

fn torus_index(coords: &[i64], m: usize) -> usize {
    coords
        .iter()
        .rev()
        .fold(0, |acc, &c| acc * m + c.rem_euclid(m as i64) as usize)
}

/// Coordinates of torus vertex `x`; inverse of the vertex numbering used by
/// [`build_torus_action`].
pub fn torus_coords(x: usize, d: usize, m: usize) -> Vec<i64> {
    let mut x = x;
    (0..d)
        .map(|_| {
            let c = (x % m) as i64;
            x /= m;
            c
        })
        .collect()
}

/// `(ℤ/m)^d` with uniform weights; each generator `g` acts by `x ↦ x + g`.
/// Vertex `x` has coordinates `torus_coords(x, d, m)`.
pub fn build_torus_action<Q: Scalar>(group: &MarkedGroup, m: usize) -> Result<MeasuredGraphing<Q>> {
    let GroupKind::Zd { d } = group.kind() else {
        return Err(Error::UnsupportedGroup("torus actions need ℤ^d".into()));
    };
    if m < 3 {
        return Err(Error::Parameter(format!("m = {m} (need m >= 3)")));
    }
    let v = m.pow(d as u32);
    let maps = group
        .generators()
        .iter()
        .map(|g| {
            let GroupElement::Zd(shift) = &g.element else { unreachable!() };
            (0..v)
                .map(|x| {
                    let c: Vec<i64> = torus_coords(x, d, m)
                        .iter()
                        .zip(shift)
                        .map(|(a, b)| a + b)
                        .collect();
                    Some(torus_index(&c, m))
                })
                .collect()
        })
        .collect();
    MeasuredGraphing::new(group, vec![Q::from_ratio(1, v as i64); v], maps)
}

/// Vertex number of `(a, b, c) mod m`.
pub fn heisenberg_index(a: i64, b: i64, c: i64, m: usize) -> usize {
    torus_index(&[a, b, c], m)
}

/// H₃(ℤ/m) with uniform weights; generators act by left multiplication.
pub fn build_heisenberg_quotient<Q: Scalar>(group: &MarkedGroup, m: usize) -> Result<MeasuredGraphing<Q>> {
    if group.kind() != GroupKind::Heisenberg {
        return Err(Error::UnsupportedGroup("needs the Heisenberg group".into()));
    }
    if m < 3 {
        return Err(Error::Parameter(format!("m = {m} (need m >= 3)")));
    }
    let v = m.pow(3);
    let maps = group
        .generators()
        .iter()
        .map(|g| {
            (0..v)
                .map(|x| {
                    let c = torus_coords(x, 3, m);
                    let h = GroupElement::heisenberg(c[0], c[1], c[2]);
                    let GroupElement::Heisenberg([a, b, c]) = group.multiply(&g.element, &h).ok()?
                    else {
                        unreachable!()
                    };
                    Some(heisenberg_index(a, b, c, m))
                })
                .collect()
        })
        .collect();
    MeasuredGraphing::new(group, vec![Q::from_ratio(1, v as i64); v], maps)
}

/// ℤ rotating `m` weighted points: `e1: x ↦ x+1`, `E1: x ↦ x-1`.
pub fn build_weighted_cycle<Q: Scalar>(m: usize, weights: Vec<Q>) -> Result<MeasuredGraphing<Q>> {
    if weights.len() != m {
        return Err(Error::Parameter(format!(
            "{} weights for a cycle of length {m}",
            weights.len()
        )));
    }
    build_weighted_cycle_over(&MarkedGroup::zd(1), weights)
}

/// Weighted cycle `ℤ/m` (`m = weights.len()`) for any generating set of ℤ;
/// generator `g` acts by `x ↦ x + g mod m`.
pub fn build_weighted_cycle_over<Q: Scalar>(group: &MarkedGroup, weights: Vec<Q>) -> Result<MeasuredGraphing<Q>> {
    if group.kind() != (GroupKind::Zd { d: 1 }) {
        return Err(Error::UnsupportedGroup("weighted cycles need ℤ".into()));
    }
    let m = weights.len();
    if m == 0 {
        return Err(Error::Parameter("empty cycle".into()));
    }
    let maps = group
        .generators()
        .iter()
        .map(|g| {
            let GroupElement::Zd(shift) = &g.element else { unreachable!() };
            (0..m)
                .map(|x| Some((x as i64 + shift[0]).rem_euclid(m as i64) as usize))
                .collect()
        })
        .collect();
    MeasuredGraphing::new(group, weights, maps)
}

/// Labels with their per-vertex RN values, for reports.
pub fn rn_table<Q: Scalar>(g: &MeasuredGraphing<Q>) -> BTreeMap<String, Vec<Q>> {
    (0..g.group().num_generators())
        .map(|s| (g.group().label(s).to_string(), g.rn_profile(s)))
        .collect()
}
