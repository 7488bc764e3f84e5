//! Marked groups: ℤ^d, the discrete Heisenberg group H₃(ℤ) and free groups,
//! each with a finite symmetric generating set.
//!
//! Heisenberg elements use coordinates `(a, b, c)` for `y^b z^c x^a`, i.e. the
//! upper unitriangular matrix with `a`, `b` on the superdiagonal and `c` in the
//! corner. The product is `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// An element in canonical form. Two elements of the same group are equal iff
/// their encodings are identical; the derived order is the canonical order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum GroupElement {
    Zd(Vec<i64>),
    Heisenberg([i64; 3]),
    /// Freely reduced word. Letter `2i` is generator `i`, `2i + 1` its inverse.
    Free(Vec<u8>),
}

impl GroupElement {
    pub fn heisenberg(a: i64, b: i64, c: i64) -> Self {
        GroupElement::Heisenberg([a, b, c])
    }

    fn kind_name(&self) -> &'static str {
        match self {
            GroupElement::Zd(_) => "Zd",
            GroupElement::Heisenberg(_) => "Heisenberg",
            GroupElement::Free(_) => "Free",
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Zd(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            GroupElement::Heisenberg([a, b, c]) => write!(f, "({a},{b},{c})"),
            GroupElement::Free(w) if w.is_empty() => write!(f, "e"),
            GroupElement::Free(w) => {
                for &l in w {
                    write!(f, "{}", free_letter_char(l))?;
                }
                Ok(())
            }
        }
    }
}

fn free_letter_char(l: u8) -> char {
    let base = if l % 2 == 0 { b'a' } else { b'A' };
    (base + l / 2) as char
}

fn free_char_letter(c: char) -> Option<u8> {
    match c {
        'a'..='z' => Some((c as u8 - b'a') * 2),
        'A'..='Z' => Some((c as u8 - b'A') * 2 + 1),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GroupKind {
    Zd { d: usize },
    Heisenberg,
    Free { rank: usize },
}

/// JSON form of a group: `{"kind":"Zd","d":2}`, `{"kind":"Heisenberg"}`,
/// `{"kind":"Free","rank":2}`, optionally with `"generators"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDescriptor {
    #[serde(flatten)]
    pub kind: GroupKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub label: String,
    pub element: GroupElement,
}

#[derive(Debug, PartialEq, Eq)]
struct GroupData {
    kind: GroupKind,
    generators: Vec<Generator>,
    inverse: Vec<usize>,
    custom: bool,
}

/// A group with a fixed finite symmetric generating set. Cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGroup(Arc<GroupData>);

impl MarkedGroup {
    /// ℤ^d with generators `±e_i`, labelled `e<i>` / `E<i>`.
    pub fn zd(d: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        let mut gens = Vec::with_capacity(2 * d);
        for i in 0..d {
            for sign in [1i64, -1] {
                let mut v = vec![0; d];
                v[i] = sign;
                let label = if sign > 0 {
                    format!("e{}", i + 1)
                } else {
                    format!("E{}", i + 1)
                };
                gens.push(Generator {
                    label,
                    element: GroupElement::Zd(v),
                });
            }
        }
        Self::from_pairs(GroupKind::Zd { d }, gens, false)
    }

    /// H₃(ℤ) with generators `x^{±1} = (±1,0,0)` and `y^{±1} = (0,±1,0)`.
    pub fn heisenberg() -> Self {
        let gens = vec![
            Generator {
                label: "x".into(),
                element: GroupElement::heisenberg(1, 0, 0),
            },
            Generator {
                label: "X".into(),
                element: GroupElement::heisenberg(-1, 0, 0),
            },
            Generator {
                label: "y".into(),
                element: GroupElement::heisenberg(0, 1, 0),
            },
            Generator {
                label: "Y".into(),
                element: GroupElement::heisenberg(0, -1, 0),
            },
        ];
        Self::from_pairs(GroupKind::Heisenberg, gens, false)
    }

    /// Free group of the given rank on letters `a, b, ...` (inverses upper case).
    pub fn free(rank: usize) -> Self {
        assert!((1..=26).contains(&rank), "rank must be in 1..=26");
        let mut gens = Vec::with_capacity(2 * rank);
        for i in 0..rank as u8 {
            for l in [2 * i, 2 * i + 1] {
                gens.push(Generator {
                    label: free_letter_char(l).to_string(),
                    element: GroupElement::Free(vec![l]),
                });
            }
        }
        Self::from_pairs(GroupKind::Free { rank }, gens, false)
    }

    /// Same group, generated by `elements` and their inverses. Labels are
    /// `g<i>` / `G<i>`; an element that is its own inverse gets one label.
    pub fn with_generators(kind: GroupKind, elements: &[GroupElement]) -> Result<Self> {
        let base = Self::standard(kind);
        let mut gens: Vec<Generator> = Vec::new();
        for (i, el) in elements.iter().enumerate() {
            base.check(el)?;
            if *el == base.identity() {
                return Err(Error::Config("identity cannot be a generator".into()));
            }
            let inv = base.inverse(el);
            if gens.iter().any(|g| g.element == *el) {
                continue;
            }
            gens.push(Generator {
                label: format!("g{}", i + 1),
                element: el.clone(),
            });
            if inv != *el && !gens.iter().any(|g| g.element == inv) {
                gens.push(Generator {
                    label: format!("G{}", i + 1),
                    element: inv,
                });
            }
        }
        if gens.is_empty() {
            return Err(Error::Config("empty generating set".into()));
        }
        Ok(Self::from_pairs(kind, gens, true))
    }

    pub fn standard(kind: GroupKind) -> Self {
        match kind {
            GroupKind::Zd { d } => Self::zd(d),
            GroupKind::Heisenberg => Self::heisenberg(),
            GroupKind::Free { rank } => Self::free(rank),
        }
    }

    fn from_pairs(kind: GroupKind, generators: Vec<Generator>, custom: bool) -> Self {
        let probe = GroupData {
            kind,
            generators: generators.clone(),
            inverse: Vec::new(),
            custom,
        };
        let probe = MarkedGroup(Arc::new(probe));
        let inverse = generators
            .iter()
            .map(|g| {
                let inv = probe.inverse(&g.element);
                generators
                    .iter()
                    .position(|h| h.element == inv)
                    .expect("generating set is symmetric")
            })
            .collect();
        MarkedGroup(Arc::new(GroupData {
            kind,
            generators,
            inverse,
            custom,
        }))
    }

    pub fn from_descriptor(desc: &GroupDescriptor) -> Result<Self> {
        match kind_check(desc.kind)? {
            kind if desc.generators.is_none() => Ok(Self::standard(kind)),
            kind => {
                let base = Self::standard(kind);
                let els = desc
                    .generators
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|v| base.element_from_json(v))
                    .collect::<Result<Vec<_>>>()?;
                Self::with_generators(kind, &els)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let desc: GroupDescriptor = serde_json::from_str(text)?;
        Self::from_descriptor(&desc)
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        let generators = self.0.custom.then(|| {
            // one representative per inverse pair, in order
            let mut out = Vec::new();
            for (i, g) in self.0.generators.iter().enumerate() {
                if self.0.inverse[i] >= i {
                    out.push(self.element_to_json(&g.element));
                }
            }
            out
        });
        GroupDescriptor {
            kind: self.0.kind,
            generators,
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.0.kind
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0.generators
    }

    pub fn num_generators(&self) -> usize {
        self.0.generators.len()
    }

    pub fn generator(&self, i: usize) -> &GroupElement {
        &self.0.generators[i].element
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0.generators[i].label
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.0.generators.iter().position(|g| g.label == label)
    }

    /// Index of the inverse generator.
    pub fn inverse_label(&self, i: usize) -> usize {
        self.0.inverse[i]
    }

    /// Generator sets are compared as sets of elements, ignoring labels.
    pub fn same_generating_set(&self, other: &MarkedGroup) -> bool {
        self.kind() == other.kind()
            && self.num_generators() == other.num_generators()
            && self
                .generators()
                .iter()
                .all(|g| other.generators().iter().any(|h| h.element == g.element))
    }

    pub fn identity(&self) -> GroupElement {
        match self.0.kind {
            GroupKind::Zd { d } => GroupElement::Zd(vec![0; d]),
            GroupKind::Heisenberg => GroupElement::Heisenberg([0; 3]),
            GroupKind::Free { .. } => GroupElement::Free(Vec::new()),
        }
    }

    /// Checks that `g` is a well-formed element of this group.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = match (self.0.kind, g) {
            (GroupKind::Zd { d }, GroupElement::Zd(v)) => v.len() == d,
            (GroupKind::Heisenberg, GroupElement::Heisenberg(_)) => true,
            (GroupKind::Free { rank }, GroupElement::Free(w)) => {
                w.iter().all(|&l| (l / 2) < rank as u8)
                    && w.windows(2).all(|p| p[0] != p[1] ^ 1)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MixedGroups(
                format!("{:?}", self.0.kind),
                format!("{} element {}", g.kind_name(), g),
            ))
        }
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(mul_unchecked(g, h))
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        match g {
            GroupElement::Zd(v) => GroupElement::Zd(v.iter().map(|x| -x).collect()),
            GroupElement::Heisenberg([a, b, c]) => GroupElement::Heisenberg([-a, -b, a * b - c]),
            GroupElement::Free(w) => GroupElement::Free(w.iter().rev().map(|l| l ^ 1).collect()),
        }
    }

    /// `s_i · g` (left multiplication by generator `i`).
    pub fn left_mul_generator(&self, i: usize, g: &GroupElement) -> GroupElement {
        mul_unchecked(&self.0.generators[i].element, g)
    }

    /// Evaluates a word given in application order: `word = [s1, s2, ...]`
    /// gives `... s2 s1`.
    pub fn eval_word(&self, word: &[usize]) -> GroupElement {
        word.iter()
            .fold(self.identity(), |acc, &s| self.left_mul_generator(s, &acc))
    }

    pub fn element_from_json(&self, v: &Value) -> Result<GroupElement> {
        let bad = || Error::InvalidElement(v.to_string());
        let el = match self.0.kind {
            GroupKind::Zd { .. } => GroupElement::Zd(int_array(v).ok_or_else(bad)?),
            GroupKind::Heisenberg => {
                let xs = int_array(v).ok_or_else(bad)?;
                if xs.len() != 3 {
                    return Err(bad());
                }
                GroupElement::Heisenberg([xs[0], xs[1], xs[2]])
            }
            GroupKind::Free { .. } => {
                let s = v.as_str().ok_or_else(bad)?;
                let mut w: Vec<u8> = Vec::new();
                if s != "e" {
                    for c in s.chars() {
                        push_reduced(&mut w, free_char_letter(c).ok_or_else(bad)?);
                    }
                }
                GroupElement::Free(w)
            }
        };
        self.check(&el).map_err(|_| bad())?;
        Ok(el)
    }

    pub fn element_to_json(&self, g: &GroupElement) -> Value {
        match g {
            GroupElement::Zd(v) => Value::from(v.clone()),
            GroupElement::Heisenberg(x) => Value::from(x.to_vec()),
            GroupElement::Free(_) => Value::from(g.to_string()),
        }
    }

    /// Parses the text encoding produced by `Display`.
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let s = s.trim();
        match self.0.kind {
            GroupKind::Free { .. } => self.element_from_json(&Value::from(s)),
            _ => {
                let inner = s
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .unwrap_or(s);
                let xs = inner
                    .split(',')
                    .map(|t| t.trim().parse::<i64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidElement(s.to_string()))?;
                self.element_from_json(&Value::from(xs))
            }
        }
    }

    /// Breadth-first enumeration of `B(e, radius)`.
    pub fn ball(&self, radius: u32) -> Result<Ball> {
        self.ball_with_budget(radius, DEFAULT_BALL_BUDGET)
    }

    /// Like [`ball`](Self::ball) but fails with a budget error, never a
    /// partial ball, once more than `max_elements` elements would be needed.
    pub fn ball_with_budget(&self, radius: u32, max_elements: usize) -> Result<Ball> {
        let mut b = Ball::new(self.clone());
        while b.radius < radius {
            b.grow(max_elements)?;
        }
        Ok(b)
    }

    /// Word length of `g`, by BFS up to `max_radius`.
    pub fn word_norm(&self, g: &GroupElement, max_radius: u32) -> Result<u32> {
        self.check(g)?;
        let mut b = Ball::new(self.clone());
        loop {
            if let Some(n) = b.norm(g) {
                return Ok(n);
            }
            if b.radius >= max_radius {
                return Err(Error::RadiusExceeded {
                    element: g.to_string(),
                    radius: max_radius,
                });
            }
            b.grow(DEFAULT_BALL_BUDGET)?;
        }
    }

    /// Smallest `k` such that every element of `other`'s generating set has
    /// word length at most `k` here, i.e. `other's S ⊆ B_S(k)`.
    pub fn containment_power(&self, other: &MarkedGroup, max_k: u32) -> Result<u32> {
        if self.kind() != other.kind() {
            return Err(Error::MixedGroups(
                format!("{:?}", self.kind()),
                format!("{:?}", other.kind()),
            ));
        }
        let ball = self.ball(max_k)?;
        let mut k = 1;
        for g in other.generators() {
            match ball.norm(&g.element) {
                Some(n) => k = k.max(n),
                None => return Err(Error::NotContained(max_k)),
            }
        }
        Ok(k)
    }
}

fn kind_check(kind: GroupKind) -> Result<GroupKind> {
    match kind {
        GroupKind::Zd { d: 0 } => Err(Error::Config("Zd needs d >= 1".into())),
        GroupKind::Free { rank } if rank == 0 || rank > 26 => {
            Err(Error::Config("Free needs 1 <= rank <= 26".into()))
        }
        k => Ok(k),
    }
}

fn int_array(v: &Value) -> Option<Vec<i64>> {
    v.as_array()?.iter().map(|x| x.as_i64()).collect()
}

fn push_reduced(w: &mut Vec<u8>, l: u8) {
    if w.last() == Some(&(l ^ 1)) {
        w.pop();
    } else {
        w.push(l);
    }
}

fn mul_unchecked(g: &GroupElement, h: &GroupElement) -> GroupElement {
    match (g, h) {
        (GroupElement::Zd(u), GroupElement::Zd(v)) => {
            GroupElement::Zd(u.iter().zip(v).map(|(x, y)| x + y).collect())
        }
        (GroupElement::Heisenberg([a, b, c]), GroupElement::Heisenberg([a2, b2, c2])) => {
            GroupElement::Heisenberg([a + a2, b + b2, c + c2 + a * b2])
        }
        (GroupElement::Free(u), GroupElement::Free(v)) => {
            let mut w = u.clone();
            for &l in v {
                push_reduced(&mut w, l);
            }
            GroupElement::Free(w)
        }
        _ => unreachable!("operands checked by caller"),
    }
}

pub const DEFAULT_BALL_BUDGET: usize = 20_000_000;

/// `B(e, r)`, sorted by `(norm, canonical order)`, with a BFS spanning tree
/// for recovering words.
#[derive(Clone, Debug)]
pub struct Ball {
    group: MarkedGroup,
    radius: u32,
    elements: Vec<GroupElement>,
    norms: Vec<u32>,
    /// `elements[i] = s · elements[p]` for `parent[i] = Some((p, s))`.
    parent: Vec<Option<(usize, usize)>>,
    index: HashMap<GroupElement, usize>,
}

impl Ball {
    fn new(group: MarkedGroup) -> Self {
        let e = group.identity();
        let mut index = HashMap::new();
        index.insert(e.clone(), 0);
        Ball {
            group,
            radius: 0,
            elements: vec![e],
            norms: vec![0],
            parent: vec![None],
            index,
        }
    }

    fn grow(&mut self, max_elements: usize) -> Result<()> {
        let start = self
            .norms
            .iter()
            .position(|&n| n == self.radius)
            .unwrap_or(0);
        let end = self.elements.len();
        let mut layer: Vec<(GroupElement, usize, usize)> = Vec::new();
        let mut seen: HashMap<GroupElement, ()> = HashMap::new();
        for p in start..end {
            for s in 0..self.group.num_generators() {
                let h = self.group.left_mul_generator(s, &self.elements[p]);
                if self.index.contains_key(&h) || seen.contains_key(&h) {
                    continue;
                }
                seen.insert(h.clone(), ());
                layer.push((h, p, s));
            }
        }
        if self.elements.len() + layer.len() > max_elements {
            return Err(Error::Budget(format!(
                "ball of radius {} needs more than {} elements",
                self.radius + 1,
                max_elements
            )));
        }
        layer.sort_by(|x, y| x.0.cmp(&y.0));
        self.radius += 1;
        for (h, p, s) in layer {
            self.index.insert(h.clone(), self.elements.len());
            self.elements.push(h);
            self.norms.push(self.radius);
            self.parent.push(Some((p, s)));
        }
        Ok(())
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    /// Adds the next sphere.
    pub fn extend(&mut self, max_elements: usize) -> Result<()> {
        self.grow(max_elements)
    }

    /// `Some((p, s))` when `elements[i] = s · elements[p]`; `None` for `e`.
    pub fn parent(&self, i: usize) -> Option<(usize, usize)> {
        self.parent[i]
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn norms(&self) -> &[u32] {
        &self.norms
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn norm(&self, g: &GroupElement) -> Option<u32> {
        self.index_of(g).map(|i| self.norms[i])
    }

    /// Number of elements of norm exactly `r`.
    pub fn sphere_size(&self, r: u32) -> usize {
        self.norms.iter().filter(|&&n| n == r).count()
    }

    /// A geodesic word for element `i`, in application order.
    pub fn word(&self, mut i: usize) -> Vec<usize> {
        let mut rev = Vec::new();
        while let Some((p, s)) = self.parent[i] {
            rev.push(s);
            i = p;
        }
        rev.reverse();
        rev
    }

    pub fn word_of(&self, g: &GroupElement) -> Option<Vec<usize>> {
        self.index_of(g).map(|i| self.word(i))
    }
}
