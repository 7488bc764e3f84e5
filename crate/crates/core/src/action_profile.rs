//! Bounded partitions of a graphing, their boundary mass, and the exact
//! action profile `inf { μ(∂P) : P partition with cells of size <= n }`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::graphings::MeasuredGraphing;
use crate::rokhlin::{build_towers, tower_cells, TowerFamily};
use crate::scalar::Scalar;
use crate::tilings::MultiTile;

/// Partition of the vertices into cells of size at most `n_bound`. Cell ids
/// are canonical: cells are numbered by their smallest vertex, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundedPartition {
    cell_of: Vec<usize>,
    n_bound: usize,
}

impl BoundedPartition {
    pub fn from_cell_of(labels: &[usize], n_bound: usize) -> Result<Self> {
        let mut rename = BTreeMap::new();
        let cell_of: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = rename.len();
                *rename.entry(*l).or_insert(next)
            })
            .collect();
        let p = BoundedPartition { cell_of, n_bound };
        p.check_bound()?;
        Ok(p)
    }

    /// Cells must be disjoint and cover `0..num_vertices`.
    pub fn from_cells(num_vertices: usize, cells: &[Vec<usize>], n_bound: usize) -> Result<Self> {
        let mut labels = vec![usize::MAX; num_vertices];
        for (i, cell) in cells.iter().enumerate() {
            for &x in cell {
                if x >= num_vertices {
                    return Err(Error::Parameter(format!("vertex {x} out of range")));
                }
                if labels[x] != usize::MAX {
                    return Err(Error::Parameter(format!("vertex {x} lies in two cells")));
                }
                labels[x] = i;
            }
        }
        if let Some(x) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Parameter(format!("vertex {x} is in no cell")));
        }
        Self::from_cell_of(&labels, n_bound)
    }

    pub fn singletons(num_vertices: usize) -> Self {
        BoundedPartition {
            cell_of: (0..num_vertices).collect(),
            n_bound: 1,
        }
    }

    fn check_bound(&self) -> Result<()> {
        let big = self.max_cell_size();
        if big > self.n_bound {
            return Err(Error::Parameter(format!(
                "a cell has {big} vertices, above the bound {}",
                self.n_bound
            )));
        }
        Ok(())
    }

    pub fn cell_of(&self) -> &[usize] {
        &self.cell_of
    }

    pub fn n_bound(&self) -> usize {
        self.n_bound
    }

    pub fn num_vertices(&self) -> usize {
        self.cell_of.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_of.iter().max().map_or(0, |m| m + 1)
    }

    /// Cells as sorted vertex lists, in id order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.num_cells()];
        for (x, &c) in self.cell_of.iter().enumerate() {
            cells[c].push(x);
        }
        cells
    }

    pub fn max_cell_size(&self) -> usize {
        self.cells().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn same_cell(&self, x: usize, y: usize) -> bool {
        self.cell_of[x] == self.cell_of[y]
    }

    /// `0,0,1|2,3` style: cells separated by `|`, members by `,`.
    pub fn encode(&self) -> String {
        self.cells()
            .iter()
            .map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn decode(text: &str, n_bound: usize) -> Result<Self> {
        let bad = || Error::Parameter(format!("cannot parse partition `{text}`"));
        let cells = text
            .split('|')
            .map(|c| {
                c.split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let v = cells.iter().map(Vec::len).sum();
        Self::from_cells(v, &cells, n_bound)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMassReport<Q> {
    pub boundary_set: Vec<usize>,
    pub mass: Q,
    /// `μ{x : φ_s(x) ∉ [x] or undefined}` per generator label.
    pub per_generator: BTreeMap<String, Q>,
}

fn check_sizes<Q: Scalar>(g: &MeasuredGraphing<Q>, p: &BoundedPartition) -> Result<()> {
    if p.num_vertices() != g.num_vertices() {
        return Err(Error::Parameter(format!(
            "partition has {} vertices, graphing has {}",
            p.num_vertices(),
            g.num_vertices()
        )));
    }
    Ok(())
}

/// `x` leaves its cell under `s` (or `φ_s(x)` is undefined).
fn escapes<Q: Scalar>(g: &MeasuredGraphing<Q>, p: &BoundedPartition, s: usize, x: usize) -> bool {
    g.apply(s, x).map_or(true, |y| !p.same_cell(x, y))
}

pub fn boundary_mass<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    p: &BoundedPartition,
) -> Result<BoundaryMassReport<Q>> {
    check_sizes(g, p)?;
    let k = g.group().num_generators();
    let mut per_generator = BTreeMap::new();
    for s in 0..k {
        let m = (0..g.num_vertices())
            .filter(|&x| escapes(g, p, s, x))
            .fold(Q::zero(), |acc, x| acc + g.weight(x).clone());
        per_generator.insert(g.group().label(s).to_string(), m);
    }
    let boundary_set: Vec<usize> = (0..g.num_vertices())
        .filter(|&x| (0..k).any(|s| escapes(g, p, s, x)))
        .collect();
    Ok(BoundaryMassReport {
        mass: g.measure(&boundary_set),
        boundary_set,
        per_generator,
    })
}

/// Splits every cell into its connected components under generator edges.
pub fn connected_refinement<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    p: &BoundedPartition,
) -> Result<BoundedPartition> {
    check_sizes(g, p)?;
    let v = g.num_vertices();
    let mut label = vec![usize::MAX; v];
    let mut next = 0;
    for root in 0..v {
        if label[root] != usize::MAX {
            continue;
        }
        label[root] = next;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for m in g.maps() {
                if let Some(y) = m[x] {
                    if label[y] == usize::MAX && p.same_cell(x, y) {
                        label[y] = next;
                        stack.push(y);
                    }
                }
            }
        }
        next += 1;
    }
    BoundedPartition::from_cell_of(&label, p.n_bound)
}

/// How [`profile_action_exact`] searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SearchMode {
    /// Every candidate partition visited, no pruning.
    Exhaustive,
    BranchAndBound,
}

/// Largest graphing searched without pruning by default.
pub const EXHAUSTIVE_MAX_VERTICES: usize = 14;
/// Default cap on search nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;
/// Default cap on the number of candidate cells.
pub const DEFAULT_CELL_BUDGET: usize = 5_000_000;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub mode: Option<SearchMode>,
    pub node_budget: u64,
    pub cell_budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: None,
            node_budget: DEFAULT_NODE_BUDGET,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionProfileResult<Q> {
    pub n: usize,
    /// Boundary mass of `partition`; the minimum when `optimal`.
    pub value: Q,
    pub partition: BoundedPartition,
    pub optimal: bool,
    /// Proven lower bound on the minimum (equals `value` when optimal).
    pub lower_bound: Q,
    pub mode: SearchMode,
    pub nodes: u64,
}

/// Exact minimum of `μ(∂P)` over partitions with cells of size at most `n`.
pub fn profile_action_exact<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    n: usize,
) -> Result<ActionProfileResult<Q>> {
    profile_action_exact_with(g, n, SearchOptions::default())
}

/// Search space: it suffices to use cells that are singletons or connected
/// sets `C = I ∪ N(I)` with `I = int(C)` nonempty. Replacing any cell by
/// `int(C) ∪ N(int(C))` and singletons leaves the interior unchanged and
/// shrinks cells, so the cost cannot go up.
///
/// Cells containing the smallest unassigned vertex are tried in
/// lexicographic order of their sorted member lists, with a list ranked
/// before its own prefixes; the witness is the first optimum in this order.
/// Branch-and-bound prunes with `closed cost + Σ_x min share(x)`, where the
/// share of a cell is its boundary weight divided by its size and the
/// minimum runs over cells still available for `x`.
pub fn profile_action_exact_with<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    n: usize,
    opts: SearchOptions,
) -> Result<ActionProfileResult<Q>> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let v = g.num_vertices();
    let mode = opts.mode.unwrap_or(if v <= EXHAUSTIVE_MAX_VERTICES {
        SearchMode::Exhaustive
    } else {
        SearchMode::BranchAndBound
    });
    let ints = integer_weights(g)?;
    let table = CellTable::build(g, n.min(v), &ints, opts.cell_budget)?;
    let mut search = Search::new(&table, v, mode == SearchMode::BranchAndBound, opts.node_budget);
    let root_bound = search.lower_bound();
    search.run(0);
    let cells: Vec<Vec<usize>> = search
        .best
        .as_ref()
        .expect("the all-singleton partition is always reached")
        .iter()
        .map(|&c| table.cells[c].clone())
        .collect();
    let partition = BoundedPartition::from_cells(v, &cells, n)?;
    let value = boundary_mass(g, &partition)?.mass;
    let optimal = !search.exhausted;
    let lower_bound = if optimal {
        value.clone()
    } else {
        ints.to_scalar(root_bound)
    };
    Ok(ActionProfileResult {
        n,
        value,
        partition,
        optimal,
        lower_bound,
        mode,
        nodes: search.nodes,
    })
}

/// Weights as integers over a common unit. Floats are quantized to 2^-40.
struct IntWeights<Q> {
    values: Vec<u64>,
    unit: Q,
}

impl<Q: Scalar> IntWeights<Q> {
    fn to_scalar(&self, k: u64) -> Q {
        let mut acc = Q::zero();
        let mut rest = k;
        // from_count takes usize; split large counts
        let chunk = 1u64 << 30;
        let c = Q::from_count(chunk as usize);
        let mut scale = Q::one();
        while rest > 0 {
            acc = acc + Q::from_count((rest % chunk) as usize) * scale.clone();
            scale = scale * c.clone();
            rest /= chunk;
        }
        acc * self.unit.clone()
    }
}

fn integer_weights<Q: Scalar>(g: &MeasuredGraphing<Q>) -> Result<IntWeights<Q>> {
    if Q::EXACT {
        let (values, unit) = Q::common_unit(g.weights()).ok_or_else(|| {
            Error::Budget("weights have too large a common denominator for exact search".into())
        })?;
        // total fits with room for share scaling
        if values.iter().map(|&w| w as u128).sum::<u128>() > (1u128 << 62) {
            return Err(Error::Budget("weights too fine for exact search".into()));
        }
        return Ok(IntWeights { values, unit });
    }
    let scale = (1u64 << 40) as f64;
    let values = g
        .weights()
        .iter()
        .map(|w| (w.to_f64() * scale).round().max(1.0) as u64)
        .collect();
    Ok(IntWeights {
        values,
        unit: Q::from_ratio(1, 1 << 40),
    })
}

/// Candidate cells with their integer costs.
struct CellTable {
    cells: Vec<Vec<usize>>,
    cost: Vec<u64>,
    /// `cost * scale / |C|`.
    share: Vec<u128>,
    scale: u128,
    /// Cells whose smallest vertex is `v`, in branching order.
    by_min: Vec<Vec<usize>>,
    containing: Vec<Vec<usize>>,
}

fn cmp_cells(a: &[usize], b: &[usize]) -> Ordering {
    for i in 0..a.len().max(b.len()) {
        match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) if x != y => return x.cmp(y),
            (Some(_), None) => return Ordering::Less,
            (None, Some(_)) => return Ordering::Greater,
            _ => {}
        }
    }
    Ordering::Equal
}

impl CellTable {
    fn build<Q: Scalar>(
        g: &MeasuredGraphing<Q>,
        n: usize,
        w: &IntWeights<Q>,
        budget: usize,
    ) -> Result<Self> {
        let v = g.num_vertices();
        let nbrs: Vec<Vec<usize>> = (0..v)
            .map(|x| {
                let mut ns: Vec<usize> = g.maps().iter().filter_map(|m| m[x]).collect();
                ns.sort_unstable();
                ns.dedup();
                ns
            })
            .collect();
        let mut cells: Vec<Vec<usize>> = (0..v).map(|x| vec![x]).collect();
        for c in closed_cells(g, &nbrs, n, budget)? {
            if c.len() > 1 {
                cells.push(c);
            }
        }
        let scale: u128 = (1..=n as u128).fold(1, |l, k| l.lcm(&k));
        let mut cost = Vec::with_capacity(cells.len());
        let mut share = Vec::with_capacity(cells.len());
        for c in &cells {
            let members: HashSet<usize> = c.iter().copied().collect();
            let b: u64 = c
                .iter()
                .filter(|&&x| g.maps().iter().any(|m| m[x].map_or(true, |y| !members.contains(&y))))
                .map(|&x| w.values[x])
                .sum();
            cost.push(b);
            share.push(b as u128 * (scale / c.len() as u128));
        }
        let mut by_min = vec![Vec::new(); v];
        let mut containing = vec![Vec::new(); v];
        for (i, c) in cells.iter().enumerate() {
            by_min[c[0]].push(i);
            for &x in c {
                containing[x].push(i);
            }
        }
        for list in &mut by_min {
            list.sort_by(|&a, &b| cmp_cells(&cells[a], &cells[b]));
        }
        Ok(CellTable {
            cells,
            cost,
            share,
            scale,
            by_min,
            containing,
        })
    }
}

/// Connected sets `C = I ∪ N(I)` with `|C| <= n` and `int(C) = I ≠ ∅`,
/// each sorted. Interiors are enumerated as connected sets in the graph
/// joining vertices at distance at most 3, which contains every such `I`.
fn closed_cells<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    nbrs: &[Vec<usize>],
    n: usize,
    budget: usize,
) -> Result<Vec<Vec<usize>>> {
    let v = g.num_vertices();
    // vertices that can be interior: all maps defined
    let can_be_interior: Vec<bool> = (0..v)
        .map(|x| g.maps().iter().all(|m| m[x].is_some()))
        .collect();
    let closed_nbhd = |x: usize| -> Vec<usize> {
        let mut c = nbrs[x].clone();
        c.push(x);
        c.sort_unstable();
        c.dedup();
        c
    };
    if (0..v).all(|x| !can_be_interior[x] || closed_nbhd(x).len() > n) {
        return Ok(Vec::new());
    }
    let far: Vec<Vec<usize>> = (0..v)
        .map(|x| {
            let mut seen = BTreeSet::from([x]);
            let mut frontier = vec![x];
            for _ in 0..3 {
                let mut next = Vec::new();
                for &y in &frontier {
                    for &z in &nbrs[y] {
                        if seen.insert(z) {
                            next.push(z);
                        }
                    }
                }
                frontier = next;
            }
            seen.remove(&x);
            seen.into_iter().filter(|&y| can_be_interior[y]).collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut count = 0usize;
    // Redelmeier enumeration of connected interiors rooted at their minimum
    struct Ctx<'a> {
        far: &'a [Vec<usize>],
        nbrs: &'a [Vec<usize>],
        n: usize,
        root: usize,
        in_i: Vec<bool>,
        marked: Vec<bool>,
        cover: Vec<u32>,
        cover_size: usize,
        interior: Vec<usize>,
    }
    fn add(ctx: &mut Ctx, x: usize, sign: bool) {
        let touch = |y: usize, ctx: &mut Ctx| {
            if sign {
                ctx.cover[y] += 1;
                if ctx.cover[y] == 1 {
                    ctx.cover_size += 1;
                }
            } else {
                ctx.cover[y] -= 1;
                if ctx.cover[y] == 0 {
                    ctx.cover_size -= 1;
                }
            }
        };
        touch(x, ctx);
        for i in 0..ctx.nbrs[x].len() {
            let y = ctx.nbrs[x][i];
            if y != x {
                touch(y, ctx);
            }
        }
    }
    fn grow(
        ctx: &mut Ctx,
        untried: Vec<usize>,
        emit: &mut dyn FnMut(&Ctx) -> Result<()>,
    ) -> Result<()> {
        let mut untried = untried;
        while let Some(c) = untried.pop() {
            ctx.in_i[c] = true;
            ctx.interior.push(c);
            add(ctx, c, true);
            if ctx.cover_size <= ctx.n {
                emit(ctx)?;
                let mut next = untried.clone();
                let mut newly = Vec::new();
                for &y in &ctx.far[c] {
                    if y > ctx.root && !ctx.marked[y] {
                        ctx.marked[y] = true;
                        newly.push(y);
                        next.push(y);
                    }
                }
                grow(ctx, next, emit)?;
                for y in newly {
                    ctx.marked[y] = false;
                }
            }
            add(ctx, c, false);
            ctx.interior.pop();
            ctx.in_i[c] = false;
        }
        Ok(())
    }
    let mut ctx = Ctx {
        far: &far,
        nbrs,
        n,
        root: 0,
        in_i: vec![false; v],
        marked: vec![false; v],
        cover: vec![0; v],
        cover_size: 0,
        interior: Vec::new(),
    };
    for root in 0..v {
        if !can_be_interior[root] {
            continue;
        }
        ctx.root = root;
        ctx.marked[root] = true;
        let mut emit = |ctx: &Ctx| -> Result<()> {
            count += 1;
            if count > budget {
                return Err(Error::Budget(format!(
                    "more than {budget} candidate cells for n = {}",
                    ctx.n
                )));
            }
            let mut cell: Vec<usize> = (0..v).filter(|&y| ctx.cover[y] > 0).collect();
            cell.sort_unstable();
            let members: HashSet<usize> = cell.iter().copied().collect();
            // int(C) must be exactly the generating interior
            let interior_ok = cell.iter().all(|&y| {
                let inside = can_be_interior[y] && nbrs[y].iter().all(|z| members.contains(z));
                inside == ctx.in_i[y]
            });
            if interior_ok && is_connected(&cell, nbrs) {
                out.push(cell);
            }
            Ok(())
        };
        grow(&mut ctx, vec![root], &mut emit)?;
        ctx.marked[root] = false;
    }
    Ok(out)
}

fn is_connected(cell: &[usize], nbrs: &[Vec<usize>]) -> bool {
    let members: HashSet<usize> = cell.iter().copied().collect();
    let mut seen = HashSet::from([cell[0]]);
    let mut stack = vec![cell[0]];
    while let Some(x) = stack.pop() {
        for &y in &nbrs[x] {
            if members.contains(&y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == cell.len()
}

struct Search<'a> {
    t: &'a CellTable,
    assigned: Vec<bool>,
    /// Assigned members per cell; a cell is available while this is 0.
    blocked: Vec<u32>,
    h: Vec<u128>,
    h_sum: u128,
    closed: u64,
    chosen: Vec<usize>,
    undo: Vec<(usize, u128)>,
    best_cost: u64,
    best: Option<Vec<usize>>,
    prune: bool,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    bits: Vec<u64>,
    memo: HashMap<MemoKey, u64>,
}

/// Vertex-set words in a memo key; larger graphings search without memo.
const MEMO_WORDS: usize = 4;
type MemoKey = [u64; MEMO_WORDS + 1];
/// Entries kept in the search memo.
const MEMO_CAPACITY: usize = 10_000_000;
/// Search nodes a subtree must cost before its result is memoized.
const MEMO_MIN_WORK: u64 = 32;

impl<'a> Search<'a> {
    fn new(t: &'a CellTable, v: usize, prune: bool, budget: u64) -> Self {
        let h: Vec<u128> = (0..v)
            .map(|x| t.containing[x].iter().map(|&c| t.share[c]).min().unwrap())
            .collect();
        Search {
            t,
            assigned: vec![false; v],
            blocked: vec![0; t.cells.len()],
            h_sum: h.iter().sum(),
            h,
            closed: 0,
            chosen: Vec::new(),
            undo: Vec::new(),
            best_cost: u64::MAX,
            best: None,
            prune,
            nodes: 0,
            budget,
            exhausted: false,
            bits: vec![0; v.div_ceil(64)],
            memo: HashMap::new(),
        }
    }

    fn lower_bound(&self) -> u64 {
        self.closed + self.h_sum.div_ceil(self.t.scale) as u64
    }

    fn recompute(&self, y: usize) -> u128 {
        self.t.containing[y]
            .iter()
            .filter(|&&c| self.blocked[c] == 0)
            .map(|&c| self.t.share[c])
            .min()
            .expect("singleton stays available")
    }

    fn assign(&mut self, cell: usize) -> usize {
        let mark = self.undo.len();
        let t = self.t;
        for &u in &t.cells[cell] {
            self.assigned[u] = true;
            self.bits[u / 64] |= 1 << (u % 64);
            self.h_sum -= self.h[u];
        }
        for &u in &t.cells[cell] {
            for &c in &t.containing[u] {
                self.blocked[c] += 1;
                if self.blocked[c] == 1 {
                    for &y in &t.cells[c] {
                        if !self.assigned[y] && self.h[y] == t.share[c] {
                            let new = self.recompute(y);
                            if new != self.h[y] {
                                self.undo.push((y, self.h[y]));
                                self.h_sum = self.h_sum - self.h[y] + new;
                                self.h[y] = new;
                            }
                        }
                    }
                }
            }
        }
        self.closed += t.cost[cell];
        self.chosen.push(cell);
        mark
    }

    fn unassign(&mut self, cell: usize, mark: usize) {
        let t = self.t;
        self.chosen.pop();
        self.closed -= t.cost[cell];
        while self.undo.len() > mark {
            let (y, old) = self.undo.pop().unwrap();
            self.h_sum = self.h_sum - self.h[y] + old;
            self.h[y] = old;
        }
        for &u in &t.cells[cell] {
            for &c in &t.containing[u] {
                self.blocked[c] -= 1;
            }
        }
        for &u in &t.cells[cell] {
            self.assigned[u] = false;
            self.bits[u / 64] &= !(1 << (u % 64));
            self.h_sum += self.h[u];
        }
    }

    /// `v` and the assigned vertices from `v` on (everything before `v` is
    /// assigned). `None` when the graphing is too large for the memo.
    fn state_key(&self, v: usize) -> Option<MemoKey> {
        if self.bits.len() > MEMO_WORDS {
            return None;
        }
        let mut key = [0u64; MEMO_WORDS + 1];
        key[0] = v as u64;
        let w = v / 64;
        for i in w..self.bits.len() {
            key[i + 1] = self.bits[i];
        }
        key[w + 1] &= !0u64 << (v % 64);
        Some(key)
    }

    fn run(&mut self, from: usize) {
        let Some(v) = (from..self.assigned.len()).find(|&x| !self.assigned[x]) else {
            if self.closed < self.best_cost {
                self.best_cost = self.closed;
                self.best = Some(self.chosen.clone());
            }
            return;
        };
        // the rest of the search depends only on which vertices are taken
        let key = if self.prune { self.state_key(v) } else { None };
        if let Some(k) = &key {
            if let Some(&future) = self.memo.get(k) {
                if self.closed.saturating_add(future) >= self.best_cost {
                    return;
                }
            }
        }
        let best_before = self.best_cost;
        let nodes_before = self.nodes;
        let t = self.t;
        for &cell in &t.by_min[v] {
            if self.exhausted {
                return;
            }
            if self.blocked[cell] != 0 {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget && self.best.is_some() {
                self.exhausted = true;
                return;
            }
            let mark = self.assign(cell);
            if !self.prune || self.lower_bound() < self.best_cost {
                self.run(v + 1);
            }
            self.unassign(cell, mark);
        }
        if let Some(k) = key {
            // cheap subtrees are not worth a memo slot
            if self.exhausted || self.best_cost == u64::MAX || self.nodes - nodes_before < MEMO_MIN_WORK {
                return;
            }
            // exact when the subtree improved the incumbent, else a floor
            let future = if self.best_cost < best_before {
                self.best_cost - self.closed
            } else {
                best_before - self.closed
            };
            if self.memo.len() < MEMO_CAPACITY || self.memo.contains_key(&k) {
                let e = self.memo.entry(k).or_insert(0);
                *e = (*e).max(future);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TilingProfile<Q> {
    /// Boundary mass of `partition`.
    pub value: Q,
    /// Tower fibers plus leftover singletons.
    pub partition: BoundedPartition,
    pub towers: TowerFamily<Q>,
    /// `max_i |∂T_i| / |T_i|`.
    pub max_tile_ratio: Q,
    /// `max_ratio · (1 - ε') + ε'` with `ε'` the leftover mass.
    pub guaranteed: Q,
}

impl<Q: Scalar> TilingProfile<Q> {
    pub fn within_guarantee(&self) -> bool {
        self.value <= self.guaranteed
    }
}

/// Upper bound for the action profile at `n = max |T_i|` from a tower family
/// of `mt`: fibers become cells and leftover vertices singletons. Fails with
/// a coverage error when the towers miss more than `epsilon`.
pub fn profile_action_tiling<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    mt: &MultiTile,
    epsilon: Q,
) -> Result<TilingProfile<Q>> {
    let towers = build_towers(g, mt, epsilon.clone())?;
    if !towers.success() {
        return Err(Error::CoverageShortfall {
            achieved: towers.coverage.to_string(),
            required: (Q::one() - epsilon).to_string(),
        });
    }
    let mut cells = tower_cells(g, mt, &towers)?;
    cells.extend(towers.leftover.iter().map(|&x| vec![x]));
    let partition = BoundedPartition::from_cells(g.num_vertices(), &cells, mt.max_shape_size())?;
    let value = boundary_mass(g, &partition)?.mass;
    let max_tile_ratio: Q = mt.max_boundary_ratio();
    let left = towers.leftover_mass();
    let guaranteed = max_tile_ratio.clone() * (Q::one() - left.clone()) + left;
    Ok(TilingProfile {
        value,
        partition,
        towers,
        max_tile_ratio,
        guaranteed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IteratedBoundaryReport<Q> {
    pub k: usize,
    pub boundary: BoundaryMassReport<Q>,
    /// `Σ_{j<k} Σ_{w ∈ S^j} μ(w · ∂P)`, an upper bound for the mass.
    pub telescoping_bound: Q,
}

/// `∂^k P = {x : g·x ∉ [x] for some |g| <= k}`, with `g·x` along the
/// geodesic words of the ball (undefined counts as leaving).
pub fn iterated_boundary<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    p: &BoundedPartition,
    k: usize,
) -> Result<IteratedBoundaryReport<Q>> {
    check_sizes(g, p)?;
    if k > g.free_window() {
        return Err(Error::BeyondFreeWindow {
            requested: k,
            window: g.free_window(),
        });
    }
    let ball = g.group().ball(k as u32)?;
    let boundary_set: Vec<usize> = (0..g.num_vertices())
        .filter(|&x| {
            g.orbit_map(&ball, x)
                .iter()
                .any(|y| y.map_or(true, |y| !p.same_cell(x, y)))
        })
        .collect();
    let gens = g.group().num_generators();
    let per_generator = (0..gens)
        .map(|s| {
            let m = boundary_set
                .iter()
                .filter(|&&x| escapes(g, p, s, x))
                .fold(Q::zero(), |acc, &x| acc + g.weight(x).clone());
            (g.group().label(s).to_string(), m)
        })
        .collect();
    // multiplicities of w·y over words w of length j and y ∈ ∂P
    let first = boundary_mass(g, p)?;
    let mut counts = vec![0u128; g.num_vertices()];
    for &x in &first.boundary_set {
        counts[x] = 1;
    }
    let mut bound = Q::zero();
    for j in 0..k {
        let term = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .fold(Q::zero(), |acc, (x, &c)| acc + big_count::<Q>(c) * g.weight(x).clone());
        bound = bound + term;
        if j + 1 < k {
            let mut next = vec![0u128; g.num_vertices()];
            for (x, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for s in 0..gens {
                    if let Some(y) = g.apply(s, x) {
                        next[y] += c;
                    }
                }
            }
            counts = next;
        }
    }
    Ok(IteratedBoundaryReport {
        k,
        boundary: BoundaryMassReport {
            mass: g.measure(&boundary_set),
            boundary_set,
            per_generator,
        },
        telescoping_bound: bound,
    })
}

fn big_count<Q: Scalar>(c: u128) -> Q {
    if c <= usize::MAX as u128 {
        return Q::from_count(c as usize);
    }
    let hi = Q::from_count((c >> 64) as usize);
    let lo = Q::from_count(c as u64 as usize);
    let base = Q::from_count(1usize << 32);
    hi * base.clone() * base + lo
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisintegrationReport<Q> {
    /// `μ(∂P)`.
    pub boundary_mass: Q,
    /// `Σ_cells |∂C|/|C| · μ(C)`.
    pub cell_average: Q,
    pub equal: bool,
}

/// For a measure-preserving graphing with uniform weights, the boundary mass
/// equals the average over cells of their boundary ratio.
pub fn disintegration_identity<Q: Scalar>(
    g: &MeasuredGraphing<Q>,
    p: &BoundedPartition,
) -> Result<DisintegrationReport<Q>> {
    check_sizes(g, p)?;
    if !(g.is_uniform() && g.is_measure_preserving()) {
        return Err(Error::NotApplicable(
            "the identity needs uniform weights and total bijections".into(),
        ));
    }
    let lhs = boundary_mass(g, p)?;
    let in_boundary: HashSet<usize> = lhs.boundary_set.iter().copied().collect();
    let mut rhs = Q::zero();
    for cell in p.cells() {
        let b = cell.iter().filter(|x| in_boundary.contains(x)).count();
        let ratio = Q::from_ratio(b as i64, cell.len() as i64);
        rhs = rhs + ratio * g.measure(&cell);
    }
    Ok(DisintegrationReport {
        equal: lhs.mass.same_as(&rhs),
        boundary_mass: lhs.mass,
        cell_average: rhs,
    })
}
