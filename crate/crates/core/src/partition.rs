//! Balanced k-way partitions and the block hierarchy the solver combines over.
//!
//! Partitions come from multilevel recursive bisection (heavy-edge matching,
//! greedy region growing, boundary FM refinement), which yields a binary
//! hierarchy directly. Flat partitions loaded from files are grouped into a
//! hierarchy by repeatedly pairing the blocks with the heaviest cut between them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::graph::{Graph, Vertex, Weight};
use crate::rng::SplitMix64;

pub const DEFAULT_IMBALANCE: f64 = 0.10;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("cannot split {n} vertices into {k} nonempty blocks")]
    InfeasibleBalance { n: usize, k: usize },
    #[error("k = {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("partition file has {found} lines, graph has {expected} vertices")]
    LineCountMismatch { expected: usize, found: usize },
    #[error("line {line}: {text:?} is not a block id")]
    MalformedLine { line: usize, text: String },
    #[error("block ids are not contiguous: block {0} is empty")]
    NonContiguousBlockIds(usize),
    #[error("block {block} has {size} vertices, limit is {limit}")]
    BalanceViolated {
        block: usize,
        size: usize,
        limit: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub block_of: Vec<usize>,
    pub k: usize,
    pub epsilon: f64,
}

/// `L_max = (1 + ε) * ceil(n / k)`, rounded down to a whole vertex count.
pub fn max_block_size(n: usize, k: usize, epsilon: f64) -> usize {
    let base = n.div_ceil(k);
    // guard against 1.1 * 10 = 11.000000000000002 style rounding
    ((1.0 + epsilon) * base as f64 + 1e-9).floor() as usize
}

impl Partition {
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &b in &self.block_of {
            sizes[b] += 1;
        }
        sizes
    }

    pub fn max_block_size(&self) -> usize {
        max_block_size(self.block_of.len(), self.k, self.epsilon)
    }

    pub fn check_balance(&self) -> Result<(), PartitionError> {
        let limit = self.max_block_size();
        for (block, size) in self.block_sizes().into_iter().enumerate() {
            if size > limit {
                return Err(PartitionError::BalanceViolated { block, size, limit });
            }
        }
        Ok(())
    }

    pub fn blocks(&self) -> Vec<Vec<Vertex>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (v, &b) in self.block_of.iter().enumerate() {
            blocks[b].push(v);
        }
        blocks
    }
}

/// Total weight of edges whose endpoints lie in different blocks.
pub fn cut_weight(g: &Graph, p: &Partition) -> Weight {
    g.edges()
        .filter(|&(u, v, _)| p.block_of[u] != p.block_of[v])
        .map(|(_, _, w)| w)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Sorted original vertices of this block.
    pub vertices: Vec<Vertex>,
    /// Distance from the leaves (leaves are 0).
    pub height: usize,
}

/// Rooted tree of blocks; leaves are partition blocks, the root is `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    pub nodes: Vec<HierNode>,
    pub root: usize,
}

impl Hierarchy {
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    pub fn height(&self) -> usize {
        self.nodes[self.root].height
    }

    /// Node ids grouped by height, leaves first.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let mut levels = vec![Vec::new(); self.height() + 1];
        for (i, node) in self.nodes.iter().enumerate() {
            levels[node.height].push(i);
        }
        levels
    }

    fn push(&mut self, vertices: Vec<Vertex>, children: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let height = children
            .iter()
            .map(|&c| self.nodes[c].height + 1)
            .max()
            .unwrap_or(0);
        for &c in &children {
            self.nodes[c].parent = Some(id);
        }
        self.nodes.push(HierNode {
            parent: None,
            children,
            vertices,
            height,
        });
        id
    }

    fn recompute_heights(&mut self) {
        fn go(h: &mut Hierarchy, v: usize) -> usize {
            let children = h.nodes[v].children.clone();
            let height = children.iter().map(|&c| go(h, c) + 1).max().unwrap_or(0);
            h.nodes[v].height = height;
            height
        }
        let root = self.root;
        go(self, root);
    }

    /// Single block containing everything.
    pub fn trivial(n: usize) -> Hierarchy {
        let mut h = Hierarchy {
            nodes: Vec::new(),
            root: 0,
        };
        h.root = h.push((0..n).collect(), Vec::new());
        h
    }

    /// Two-level hierarchy: the root directly above the given leaf blocks.
    pub fn flat(blocks: &[Vec<Vertex>]) -> Hierarchy {
        if blocks.len() == 1 {
            return Hierarchy::trivial_over(blocks[0].clone());
        }
        let mut h = Hierarchy {
            nodes: Vec::new(),
            root: 0,
        };
        let leaves: Vec<usize> = blocks.iter().map(|b| h.push(sorted(b), Vec::new())).collect();
        let all = sorted(&blocks.concat());
        h.root = h.push(all, leaves);
        h
    }

    fn trivial_over(vertices: Vec<Vertex>) -> Hierarchy {
        let mut h = Hierarchy {
            nodes: Vec::new(),
            root: 0,
        };
        h.root = h.push(sorted(&vertices), Vec::new());
        h
    }

    /// The same leaves directly under the root.
    pub fn flattened(&self) -> Hierarchy {
        let blocks: Vec<Vec<Vertex>> = self
            .leaves()
            .map(|l| self.nodes[l].vertices.clone())
            .collect();
        Hierarchy::flat(&blocks)
    }

    /// Groups flat blocks pairwise by heaviest inter-block cut, round by
    /// round, until one block remains.
    pub fn pair_by_cut(g: &Graph, p: &Partition) -> Hierarchy {
        let blocks = p.blocks();
        let mut h = Hierarchy {
            nodes: Vec::new(),
            root: 0,
        };
        let mut current: Vec<usize> = blocks
            .into_iter()
            .map(|b| h.push(b, Vec::new()))
            .collect();
        if current.len() == 1 {
            h.root = current[0];
            return h;
        }
        let mut group_of: Vec<usize> = p.block_of.clone();
        while current.len() > 1 {
            let pos_of = |node: usize| current.iter().position(|&c| c == node).unwrap();
            let m = current.len();
            let mut between = vec![vec![0u64; m]; m];
            for (u, v, w) in g.edges() {
                let (a, b) = (pos_of(group_of[u]), pos_of(group_of[v]));
                if a != b {
                    // count cut edges as at least 1 so zero-weight edges still attract
                    between[a][b] += w.max(1);
                    between[b][a] += w.max(1);
                }
            }
            let mut candidates: Vec<(Reverse<u64>, usize, usize)> = Vec::new();
            for a in 0..m {
                for b in a + 1..m {
                    candidates.push((Reverse(between[a][b]), a, b));
                }
            }
            candidates.sort();
            let mut taken = vec![false; m];
            let mut next = Vec::new();
            for (_, a, b) in candidates {
                if taken[a] || taken[b] {
                    continue;
                }
                taken[a] = true;
                taken[b] = true;
                let (na, nb) = (current[a], current[b]);
                let mut vs = h.nodes[na].vertices.clone();
                vs.extend_from_slice(&h.nodes[nb].vertices);
                let id = h.push(sorted(&vs), vec![na, nb]);
                next.push(id);
            }
            next.extend((0..m).filter(|&i| !taken[i]).map(|i| current[i]));
            for &node in &next {
                for &v in &h.nodes[node].vertices {
                    group_of[v] = node;
                }
            }
            current = next;
        }
        h.root = current[0];
        h.recompute_heights();
        h
    }

    /// Splits leaf `leaf` into two new leaves (it becomes their parent).
    pub fn split_leaf(&mut self, leaf: usize, halves: [Vec<Vertex>; 2]) {
        assert!(self.nodes[leaf].children.is_empty());
        let [a, b] = halves;
        let ca = self.push(sorted(&a), Vec::new());
        let cb = self.push(sorted(&b), Vec::new());
        self.nodes[ca].parent = Some(leaf);
        self.nodes[cb].parent = Some(leaf);
        self.nodes[leaf].children = vec![ca, cb];
        self.recompute_heights();
    }

    /// Partition induced by the current leaves, numbered in node order.
    pub fn leaf_partition(&self, n: usize, epsilon: f64) -> Partition {
        let mut block_of = vec![0; n];
        let mut k = 0;
        for leaf in self.leaves() {
            for &v in &self.nodes[leaf].vertices {
                block_of[v] = k;
            }
            k += 1;
        }
        Partition {
            block_of,
            k,
            epsilon,
        }
    }

    /// Every internal node is the disjoint union of its children and the
    /// root covers `0..n`.
    pub fn is_consistent(&self, n: usize) -> bool {
        if self.nodes[self.root].vertices != (0..n).collect::<Vec<_>>() {
            return false;
        }
        if self.nodes[self.root].parent.is_some() {
            return false;
        }
        self.nodes.iter().enumerate().all(|(i, node)| {
            if node.children.is_empty() {
                return true;
            }
            let mut union: Vec<Vertex> = node
                .children
                .iter()
                .flat_map(|&c| self.nodes[c].vertices.iter().copied())
                .collect();
            union.sort_unstable();
            node.children.iter().all(|&c| self.nodes[c].parent == Some(i))
                && union == node.vertices
        })
    }
}

fn sorted(v: &[Vertex]) -> Vec<Vertex> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Default block count: about 64 vertices per leaf, at least 2, a power of two.
pub fn default_k(n: usize) -> usize {
    let target = n.div_ceil(64).max(2).next_power_of_two();
    let mut k = target;
    while k > n.max(1) {
        k /= 2;
    }
    k.max(1)
}

/// Recursive bisection into `k` (a power of two) balanced blocks.
pub fn partition_hier(
    g: &Graph,
    k: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(Partition, Hierarchy), PartitionError> {
    let n = g.vertex_count();
    if k == 0 || k > n {
        return Err(PartitionError::InfeasibleBalance { n, k });
    }
    if !k.is_power_of_two() {
        return Err(PartitionError::NotPowerOfTwo(k));
    }
    let leaf_cap = max_block_size(n, k, epsilon);
    let mut h = Hierarchy {
        nodes: Vec::new(),
        root: 0,
    };
    let mut rng = SplitMix64::new(seed);
    h.root = split(g, (0..n).collect(), k, leaf_cap, &mut rng, &mut h);
    let p = h.leaf_partition(n, epsilon);
    debug_assert!(p.check_balance().is_ok());
    Ok((p, h))
}

fn split(
    g: &Graph,
    vertices: Vec<Vertex>,
    k: usize,
    leaf_cap: usize,
    rng: &mut SplitMix64,
    h: &mut Hierarchy,
) -> usize {
    if k == 1 {
        return h.push(vertices, Vec::new());
    }
    let half = k / 2;
    let bounds = SideBounds {
        max: [(half * leaf_cap) as u64; 2],
        min: [half as u64; 2],
    };
    let [a, b] = bisect(g, &vertices, bounds, rng);
    let ca = split(g, a, half, leaf_cap, rng, h);
    let cb = split(g, b, half, leaf_cap, rng, h);
    h.push(vertices, vec![ca, cb])
}

/// Bisects a block into two halves of (near) equal size, for the
/// boundary-size guard.
pub fn bisect_block(g: &Graph, vertices: &[Vertex], seed: u64) -> [Vec<Vertex>; 2] {
    let total = vertices.len() as u64;
    let half = total.div_ceil(2);
    let bounds = SideBounds {
        max: [half; 2],
        min: [total - half; 2],
    };
    bisect(g, vertices, bounds, &mut SplitMix64::new(seed))
}

#[derive(Clone, Copy, Debug)]
struct SideBounds {
    max: [u64; 2],
    min: [u64; 2],
}

impl SideBounds {
    fn ok(&self, weights: [u64; 2]) -> bool {
        (0..2).all(|s| weights[s] <= self.max[s] && weights[s] >= self.min[s])
    }

    /// Amount by which `weights` violate the bounds.
    fn excess(&self, weights: [u64; 2]) -> u64 {
        (0..2)
            .map(|s| {
                weights[s].saturating_sub(self.max[s]) + self.min[s].saturating_sub(weights[s])
            })
            .sum()
    }
}

/// Vertex- and edge-weighted graph used inside the multilevel scheme.
#[derive(Clone, Debug)]
struct WGraph {
    adj: Vec<Vec<(usize, u64)>>,
    vwgt: Vec<u64>,
}

impl WGraph {
    fn len(&self) -> usize {
        self.vwgt.len()
    }

    fn total(&self) -> u64 {
        self.vwgt.iter().sum()
    }

    /// Induced on `vertices`, with every edge counted once (weight 1):
    /// the solver's cost grows with the number of cut edges, not their weight.
    fn from_subgraph(g: &Graph, vertices: &[Vertex]) -> WGraph {
        let mut local = std::collections::HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            local.insert(v, i);
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .filter_map(|&(u, _)| local.get(&u).map(|&j| (j, 1)))
                    .collect()
            })
            .collect();
        WGraph {
            adj,
            vwgt: vec![1; vertices.len()],
        }
    }

    /// Heavy-edge matching contraction; returns the coarse graph and the
    /// fine-to-coarse map.
    fn coarsen(&self, rng: &mut SplitMix64, max_vwgt: u64) -> (WGraph, Vec<usize>) {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        let mut mate = vec![usize::MAX; n];
        for &v in &order {
            if mate[v] != usize::MAX {
                continue;
            }
            let mut best: Option<(u64, Reverse<u64>, usize)> = None;
            for &(u, w) in &self.adj[v] {
                if mate[u] == usize::MAX && u != v && self.vwgt[u] + self.vwgt[v] <= max_vwgt {
                    let cand = (w, Reverse(self.vwgt[u]), u);
                    if best.map_or(true, |b| (cand.0, cand.1) > (b.0, b.1)) {
                        best = Some(cand);
                    }
                }
            }
            match best {
                Some((_, _, u)) => {
                    mate[v] = u;
                    mate[u] = v;
                }
                None => mate[v] = v,
            }
        }
        let mut map = vec![usize::MAX; n];
        let mut vwgt = Vec::new();
        for v in 0..n {
            if map[v] == usize::MAX {
                let id = vwgt.len();
                map[v] = id;
                map[mate[v]] = id;
                vwgt.push(self.vwgt[v] + if mate[v] != v { self.vwgt[mate[v]] } else { 0 });
            }
        }
        let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); vwgt.len()];
        for v in 0..n {
            for &(u, w) in &self.adj[v] {
                let (cv, cu) = (map[v], map[u]);
                if cv != cu {
                    adj[cv].push((cu, w));
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            let mut merged: Vec<(usize, u64)> = Vec::with_capacity(list.len());
            for &(u, w) in list.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == u => last.1 += w,
                    _ => merged.push((u, w)),
                }
            }
            *list = merged;
        }
        (WGraph { adj, vwgt }, map)
    }

    fn cut(&self, side: &[u8]) -> u64 {
        let mut cut = 0;
        for v in 0..self.len() {
            for &(u, w) in &self.adj[v] {
                if v < u && side[v] != side[u] {
                    cut += w;
                }
            }
        }
        cut
    }

    fn side_weights(&self, side: &[u8]) -> [u64; 2] {
        let mut w = [0; 2];
        for v in 0..self.len() {
            w[side[v] as usize] += self.vwgt[v];
        }
        w
    }

    /// Gain of moving `v` to the other side.
    fn gain(&self, side: &[u8], v: usize) -> i64 {
        self.adj[v].iter().fold(0i64, |g, &(u, w)| {
            if side[u] == side[v] {
                g - w as i64
            } else {
                g + w as i64
            }
        })
    }
}

/// Greedy growing of side 1 from a random seed vertex by best gain.
fn grow(g: &WGraph, bounds: SideBounds, rng: &mut SplitMix64) -> Vec<u8> {
    let n = g.len();
    let total = g.total();
    let goal = (total / 2).clamp(
        total.saturating_sub(bounds.max[0]).max(bounds.min[1]),
        bounds.max[1].min(total.saturating_sub(bounds.min[0])),
    );
    let mut side = vec![0u8; n];
    let mut weight1 = 0;
    let mut heap: BinaryHeap<(i64, Reverse<usize>)> = BinaryHeap::new();
    let mut remaining: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut remaining);
    while weight1 < goal {
        let v = loop {
            match heap.pop() {
                Some((gain, Reverse(v))) => {
                    if side[v] == 0 && gain == g.gain(&side, v) {
                        break Some(v);
                    }
                }
                None => {
                    // next unassigned vertex from a fresh region
                    while remaining.last().is_some_and(|&v| side[v] == 1) {
                        remaining.pop();
                    }
                    break remaining.pop();
                }
            }
        };
        let Some(v) = v else { break };
        if weight1 + g.vwgt[v] > bounds.max[1] {
            // too heavy to add without overshooting; skip it
            side[v] = 2;
            continue;
        }
        side[v] = 1;
        weight1 += g.vwgt[v];
        for &(u, _) in &g.adj[v] {
            if side[u] == 0 {
                heap.push((g.gain(&side, u), Reverse(u)));
            }
        }
    }
    for s in &mut side {
        if *s == 2 {
            *s = 0;
        }
    }
    side
}

/// Moves vertices off violated sides, cheapest cut increase first.
fn rebalance(g: &WGraph, side: &mut [u8], bounds: SideBounds) {
    let mut weights = g.side_weights(side);
    while !bounds.ok(weights) {
        let from: usize = if weights[0] > bounds.max[0] || weights[1] < bounds.min[1] {
            0
        } else {
            1
        };
        let to = 1 - from;
        let best = (0..g.len())
            .filter(|&v| side[v] as usize == from)
            .filter(|&v| {
                let mut w = weights;
                w[from] -= g.vwgt[v];
                w[to] += g.vwgt[v];
                bounds.excess(w) < bounds.excess(weights)
            })
            .max_by_key(|&v| (g.gain(side, v), Reverse(v)));
        let Some(v) = best else { return };
        side[v] = to as u8;
        weights[from] -= g.vwgt[v];
        weights[to] += g.vwgt[v];
    }
}

/// Boundary Fiduccia–Mattheyses passes with rollback to the best prefix.
fn refine(g: &WGraph, side: &mut [u8], bounds: SideBounds) {
    let n = g.len();
    for _pass in 0..8 {
        let mut weights = g.side_weights(side);
        let mut gain: Vec<i64> = (0..n).map(|v| g.gain(side, v)).collect();
        let mut locked = vec![false; n];
        let mut heap: BinaryHeap<(i64, Reverse<usize>)> = (0..n)
            .filter(|&v| g.adj[v].iter().any(|&(u, _)| side[u] != side[v]))
            .map(|v| (gain[v], Reverse(v)))
            .collect();
        let mut moves: Vec<usize> = Vec::new();
        let mut delta = 0i64;
        let mut best_delta = 0i64;
        let mut best_len = 0usize;
        let mut since_best = 0;
        while let Some((gv, Reverse(v))) = heap.pop() {
            if locked[v] || gv != gain[v] {
                continue;
            }
            let from = side[v] as usize;
            let to = 1 - from;
            let mut w = weights;
            w[from] -= g.vwgt[v];
            w[to] += g.vwgt[v];
            if !bounds.ok(w) {
                continue;
            }
            locked[v] = true;
            side[v] = to as u8;
            weights = w;
            delta += gv;
            moves.push(v);
            for &(u, ew) in &g.adj[v] {
                if locked[u] {
                    continue;
                }
                // v moved away from / towards u's side
                if side[u] as usize == to {
                    gain[u] -= 2 * ew as i64;
                } else {
                    gain[u] += 2 * ew as i64;
                }
                heap.push((gain[u], Reverse(u)));
            }
            if delta > best_delta {
                best_delta = delta;
                best_len = moves.len();
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > 64 {
                    break;
                }
            }
        }
        for &v in &moves[best_len..] {
            side[v] = 1 - side[v];
        }
        if best_delta <= 0 {
            break;
        }
    }
}

fn bisect(g: &Graph, vertices: &[Vertex], bounds: SideBounds, rng: &mut SplitMix64) -> [Vec<Vertex>; 2] {
    let fine = WGraph::from_subgraph(g, vertices);
    let total = fine.total();
    let max_vwgt = (total / 16).max(1).min(bounds.max[0].min(bounds.max[1]) / 2).max(1);

    let mut levels: Vec<(WGraph, Vec<usize>)> = Vec::new();
    let mut current = fine.clone();
    while current.len() > 32 {
        let (coarse, map) = current.coarsen(rng, max_vwgt);
        if coarse.len() * 10 > current.len() * 9 {
            break;
        }
        levels.push((std::mem::replace(&mut current, coarse), map));
    }

    let mut best: Option<(u64, u64, Vec<u8>)> = None;
    for _ in 0..8 {
        let mut side = grow(&current, bounds, rng);
        rebalance(&current, &mut side, bounds);
        refine(&current, &mut side, bounds);
        let key = (bounds.excess(current.side_weights(&side)), current.cut(&side));
        if best.as_ref().map_or(true, |b| key < (b.0, b.1)) {
            best = Some((key.0, key.1, side));
        }
    }
    let mut side = best.unwrap().2;

    while let Some((finer, map)) = levels.pop() {
        side = map.iter().map(|&c| side[c]).collect();
        current = finer;
        rebalance(&current, &mut side, bounds);
        refine(&current, &mut side, bounds);
    }
    rebalance(&current, &mut side, bounds);
    debug_assert!(bounds.ok(current.side_weights(&side)));

    let mut halves = [Vec::new(), Vec::new()];
    for (i, &v) in vertices.iter().enumerate() {
        halves[side[i] as usize].push(v);
    }
    halves
}

/// Reads one block id per line.
pub fn load_partition(
    text: &[u8],
    g: &Graph,
    epsilon: f64,
    allow_imbalance: bool,
) -> Result<Partition, PartitionError> {
    let text = String::from_utf8_lossy(text);
    let mut block_of = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let id: usize = trimmed.parse().map_err(|_| PartitionError::MalformedLine {
            line: i + 1,
            text: line.to_string(),
        })?;
        block_of.push(id);
    }
    let n = g.vertex_count();
    if block_of.len() != n {
        return Err(PartitionError::LineCountMismatch {
            expected: n,
            found: block_of.len(),
        });
    }
    let k = block_of.iter().max().map_or(0, |&m| m + 1);
    let mut present = vec![false; k];
    for &b in &block_of {
        present[b] = true;
    }
    if let Some(empty) = present.iter().position(|&p| !p) {
        return Err(PartitionError::NonContiguousBlockIds(empty));
    }
    let p = Partition {
        block_of,
        k,
        epsilon,
    };
    if !allow_imbalance {
        p.check_balance()?;
    }
    Ok(p)
}

pub fn emit_partition(p: &Partition) -> Vec<u8> {
    let mut out = String::new();
    for &b in &p.block_of {
        out.push_str(&b.to_string());
        out.push('\n');
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1))).unwrap()
    }

    fn grid(rows: usize, cols: usize) -> Graph {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1, 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols, 1));
                }
            }
        }
        Graph::from_edges(rows * cols, edges).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = SplitMix64::new(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.unit() < p {
                    edges.push((u, v, 1 + rng.below(9)));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn k_one_is_single_block() {
        let g = path_graph(5);
        let (p, h) = partition_hier(&g, 1, 0.1, 0).unwrap();
        assert_eq!(p.k, 1);
        assert_eq!(h.nodes.len(), 1);
        assert_eq!(cut_weight(&g, &p), 0);
    }

    /// Minimum cut over every balanced bipartition, by enumeration.
    fn brute_force_min_bisection(g: &Graph, cap: usize) -> u64 {
        let n = g.vertex_count();
        (0u32..1 << n)
            .filter(|mask| {
                let ones = mask.count_ones() as usize;
                ones >= 1 && ones <= cap && n - ones <= cap && n - ones >= 1
            })
            .map(|mask| {
                g.edges()
                    .filter(|&(u, v, _)| ((mask >> u) & 1) != ((mask >> v) & 1))
                    .map(|(_, _, w)| w)
                    .sum()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn path_of_eight_bisects_with_one_cut_edge() {
        let g = path_graph(8);
        assert_eq!(brute_force_min_bisection(&g, 4), 1);
        for seed in 0..5 {
            let (p, _) = partition_hier(&g, 2, 0.0, seed).unwrap();
            assert_eq!(cut_weight(&g, &p), 1);
            assert_eq!(p.block_sizes(), vec![4, 4]);
        }
    }

    #[test]
    fn singleton_blocks_cut_everything() {
        let g = random_graph(8, 0.5, 3);
        let (p, h) = partition_hier(&g, 8, 0.0, 1).unwrap();
        assert_eq!(p.block_sizes(), vec![1; 8]);
        assert_eq!(cut_weight(&g, &p), g.total_weight());
        assert!(h.is_consistent(8));
    }

    #[test]
    fn rejects_bad_k() {
        let g = path_graph(4);
        assert_eq!(
            partition_hier(&g, 8, 0.1, 0).unwrap_err(),
            PartitionError::InfeasibleBalance { n: 4, k: 8 }
        );
        assert_eq!(
            partition_hier(&g, 3, 0.1, 0).unwrap_err(),
            PartitionError::NotPowerOfTwo(3)
        );
    }

    #[test]
    fn ladder_bisection_finds_a_vertical_cut() {
        for cols in [4, 8, 16, 30] {
            let g = grid(2, cols);
            let (p, _) = partition_hier(&g, 2, 0.0, 7).unwrap();
            assert!(cut_weight(&g, &p) <= 2, "cols={cols}");
        }
    }

    #[test]
    fn balance_and_consistency_on_random_graphs() {
        for seed in 0..40 {
            let n = 10 + (seed as usize * 7) % 150;
            let g = random_graph(n, 4.0 / n as f64, seed);
            for k in [1, 2, 4, 8] {
                if k > n {
                    continue;
                }
                let (p, h) = partition_hier(&g, k, 0.1, seed).unwrap();
                assert!(p.check_balance().is_ok(), "n={n} k={k}");
                assert!(h.is_consistent(n));
                assert_eq!(h.leaves().count(), k);
                assert!(p.block_sizes().iter().all(|&s| s > 0));
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = grid(9, 9);
        let a = partition_hier(&g, 4, 0.1, 5).unwrap();
        let b = partition_hier(&g, 4, 0.1, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cut_weight_matches_recount() {
        let mut rng = SplitMix64::new(11);
        for seed in 0..30 {
            let n = 2 + rng.index(20);
            let g = random_graph(n, 0.3, seed);
            let k = 1 + rng.index(n);
            let block_of: Vec<usize> = (0..n).map(|_| rng.index(k)).collect();
            let p = Partition {
                block_of: block_of.clone(),
                k,
                epsilon: 0.0,
            };
            let mut recount = 0;
            for u in 0..n {
                for &(v, w) in g.neighbors(u) {
                    if u < v && block_of[u] != block_of[v] {
                        recount += w;
                    }
                }
            }
            assert_eq!(cut_weight(&g, &p), recount);
        }
    }

    #[test]
    fn load_partition_examples() {
        let g = path_graph(4);
        let p = load_partition(b"0\n0\n1\n1\n", &g, 0.1, false).unwrap();
        assert_eq!(p.k, 2);
        assert_eq!(p.blocks(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(load_partition(b"0\n0\n0\n0\n", &g, 0.1, false).unwrap().k, 1);
        assert_eq!(
            load_partition(b"0\n0\n1\n", &g, 0.1, false),
            Err(PartitionError::LineCountMismatch {
                expected: 4,
                found: 3
            })
        );
        assert_eq!(
            load_partition(b"0\n0\n2\n2\n", &g, 0.1, false),
            Err(PartitionError::NonContiguousBlockIds(1))
        );
        assert!(matches!(
            load_partition(b"0\n0\n0\n1\n", &g, 0.1, false),
            Err(PartitionError::BalanceViolated { block: 0, size: 3, limit: 2 })
        ));
        assert!(load_partition(b"0\n0\n0\n1\n", &g, 0.1, true).is_ok());
        assert_eq!(
            load_partition(&emit_partition(&p), &g, 0.1, false).unwrap(),
            p
        );
    }

    #[test]
    fn pairing_hierarchy_groups_heavily_connected_blocks() {
        // blocks 0 and 2 share the heavy edge, 1 and 3 the other
        let g = Graph::from_edges(4, [(0, 2, 10), (1, 3, 10), (0, 1, 1)]).unwrap();
        let p = Partition {
            block_of: vec![0, 1, 2, 3],
            k: 4,
            epsilon: 0.0,
        };
        let h = Hierarchy::pair_by_cut(&g, &p);
        assert!(h.is_consistent(4));
        let root = &h.nodes[h.root];
        assert_eq!(root.children.len(), 2);
        let mut groups: Vec<Vec<usize>> = root
            .children
            .iter()
            .map(|&c| h.nodes[c].vertices.clone())
            .collect();
        groups.sort();
        assert_eq!(groups, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn flattened_keeps_leaves() {
        let g = grid(6, 6);
        let (_, h) = partition_hier(&g, 4, 0.1, 2).unwrap();
        let flat = h.flattened();
        assert!(flat.is_consistent(36));
        assert_eq!(flat.height(), 1);
        assert_eq!(flat.nodes[flat.root].children.len(), 4);
    }

    #[test]
    fn default_k_targets_small_leaves() {
        assert_eq!(default_k(2), 2);
        assert_eq!(default_k(64), 2);
        assert_eq!(default_k(200), 4);
        assert_eq!(default_k(1000), 16);
    }
}
