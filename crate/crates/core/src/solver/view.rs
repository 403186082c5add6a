//! Per-block views of the instance.
//!
//! Every vertex `x` of a block with an edge leaving the block gets one
//! boundary vertex `b_x` attached by a weight-0 edge; the block holding the
//! source (target) also gets a terminal boundary vertex attached to it.
//! A leaf view keeps the block's own vertices and edges. A coarse view is
//! the auxiliary graph over its children's boundary vertices: child cliques
//! (resolved through child tables) plus the original edges between children.

use thiserror::Error;

use crate::graph::{Graph, Instance, Vertex, Weight};
use crate::partition::Hierarchy;
use crate::solver::table::{BoundaryKey, BoundaryVertex, MAX_BOUNDARY};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("block {block} has {size} boundary vertices, cap is {cap}; use a smaller k or an external partition")]
pub struct BoundaryTooLarge {
    pub block: usize,
    pub size: usize,
    pub cap: usize,
}

/// One leaf block with local vertex ids `0..inner_count()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafView {
    pub block: usize,
    /// Local id -> original id, ascending.
    pub original: Vec<Vertex>,
    /// Local adjacency, sorted by neighbor.
    pub adj: Vec<Vec<(usize, Weight)>>,
    /// Sorted boundary list.
    pub boundary: Vec<BoundaryVertex>,
    /// Local vertex each boundary vertex hangs off.
    pub attached: Vec<usize>,
}

impl LeafView {
    /// Builds a view from local parts. `boundary` lists `(key, local vertex)`
    /// and is sorted here; original ids must be ascending.
    pub fn new(
        block: usize,
        original: Vec<Vertex>,
        edges: &[(usize, usize, Weight)],
        boundary: Vec<(BoundaryKey, usize)>,
    ) -> LeafView {
        let mut adj = vec![Vec::new(); original.len()];
        for &(u, v, w) in edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut boundary = boundary;
        boundary.sort();
        LeafView {
            block,
            boundary: boundary
                .iter()
                .map(|&(key, local)| BoundaryVertex {
                    key,
                    vertex: original[local],
                })
                .collect(),
            attached: boundary.iter().map(|&(_, local)| local).collect(),
            original,
            adj,
        }
    }

    pub fn inner_count(&self) -> usize {
        self.original.len()
    }

    /// Inner vertices plus boundary vertices.
    pub fn node_count(&self) -> usize {
        self.original.len() + self.boundary.len()
    }
}

/// A node of a coarse view's auxiliary graph: one child boundary vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuxNode {
    /// Position of the owning child in [`CoarseView::children`].
    pub child: usize,
    /// Index in that child's boundary list.
    pub local: usize,
    pub key: BoundaryKey,
    pub vertex: Vertex,
    /// Index in this block's boundary list, if it is also a boundary vertex here.
    pub outer: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoarseView {
    pub block: usize,
    /// Hierarchy ids of children with a nonempty boundary.
    pub children: Vec<usize>,
    pub nodes: Vec<AuxNode>,
    /// Aux node ids per child, indexed by the child's local boundary index.
    pub child_nodes: Vec<Vec<usize>>,
    /// Inter-child edges between aux nodes, carrying the original weight.
    pub cut_adj: Vec<Vec<(usize, Weight)>>,
    pub boundary: Vec<BoundaryVertex>,
    /// Aux node of each boundary vertex of this block.
    pub boundary_node: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockView {
    Leaf(LeafView),
    Coarse(CoarseView),
}

impl BlockView {
    pub fn boundary(&self) -> &[BoundaryVertex] {
        match self {
            BlockView::Leaf(v) => &v.boundary,
            BlockView::Coarse(v) => &v.boundary,
        }
    }
}

fn key_vertex(inst: &Instance, key: BoundaryKey) -> Vertex {
    match key {
        BoundaryKey::Source => inst.source,
        BoundaryKey::Target => inst.target,
        BoundaryKey::Cut(x) => x,
    }
}

/// Sorted boundary list of every hierarchy node.
pub fn boundaries(inst: &Instance, h: &Hierarchy) -> Vec<Vec<BoundaryVertex>> {
    let g = &inst.graph;
    let mut member = vec![usize::MAX; g.vertex_count()];
    h.nodes
        .iter()
        .enumerate()
        .map(|(id, node)| {
            for &v in &node.vertices {
                member[v] = id;
            }
            let mut keys = Vec::new();
            if member[inst.source] == id {
                keys.push(BoundaryKey::Source);
            }
            if member[inst.target] == id {
                keys.push(BoundaryKey::Target);
            }
            for &v in &node.vertices {
                if g.neighbors(v).iter().any(|&(u, _)| member[u] != id) {
                    keys.push(BoundaryKey::Cut(v));
                }
            }
            keys.sort();
            keys.into_iter()
                .map(|key| BoundaryVertex {
                    key,
                    vertex: key_vertex(inst, key),
                })
                .collect()
        })
        .collect()
}

/// Fails if any block's boundary exceeds `cap` (itself at most 16).
pub fn check_boundary_cap(
    boundaries: &[Vec<BoundaryVertex>],
    cap: usize,
) -> Result<(), BoundaryTooLarge> {
    let cap = cap.min(MAX_BOUNDARY);
    for (block, b) in boundaries.iter().enumerate() {
        if b.len() > cap {
            return Err(BoundaryTooLarge {
                block,
                size: b.len(),
                cap,
            });
        }
    }
    Ok(())
}

pub fn build_leaf_view(g: &Graph, h: &Hierarchy, leaf: usize, boundary: &[BoundaryVertex]) -> LeafView {
    let vertices = &h.nodes[leaf].vertices;
    let local_of = |v: Vertex| vertices.binary_search(&v).ok();
    let mut edges = Vec::new();
    for (i, &v) in vertices.iter().enumerate() {
        for &(u, w) in g.neighbors(v) {
            if let Some(j) = local_of(u) {
                if i < j {
                    edges.push((i, j, w));
                }
            }
        }
    }
    let boundary = boundary
        .iter()
        .map(|bv| (bv.key, local_of(bv.vertex).expect("boundary vertex inside block")))
        .collect();
    LeafView::new(leaf, vertices.clone(), &edges, boundary)
}

/// One view per leaf block, in hierarchy node order.
pub fn build_leaf_views(
    inst: &Instance,
    h: &Hierarchy,
    cap: usize,
) -> Result<Vec<LeafView>, BoundaryTooLarge> {
    let boundaries = boundaries(inst, h);
    check_boundary_cap(&boundaries, cap)?;
    Ok(h.leaves()
        .map(|leaf| build_leaf_view(&inst.graph, h, leaf, &boundaries[leaf]))
        .collect())
}

pub fn build_coarse_view(
    g: &Graph,
    h: &Hierarchy,
    block: usize,
    boundaries: &[Vec<BoundaryVertex>],
) -> CoarseView {
    let node = &h.nodes[block];
    let children: Vec<usize> = node
        .children
        .iter()
        .copied()
        .filter(|&c| !boundaries[c].is_empty())
        .collect();
    let own = &boundaries[block];
    let mut nodes = Vec::new();
    let mut child_nodes = Vec::new();
    for (ci, &c) in children.iter().enumerate() {
        let mut ids = Vec::new();
        for (local, bv) in boundaries[c].iter().enumerate() {
            ids.push(nodes.len());
            nodes.push(AuxNode {
                child: ci,
                local,
                key: bv.key,
                vertex: bv.vertex,
                outer: own.iter().position(|o| o.key == bv.key),
            });
        }
        child_nodes.push(ids);
    }
    let boundary_node = (0..own.len())
        .map(|i| {
            nodes
                .iter()
                .position(|n| n.outer == Some(i))
                .expect("outer boundary vertex belongs to a child")
        })
        .collect();

    let mut cut_node = std::collections::HashMap::new();
    for (id, n) in nodes.iter().enumerate() {
        if let BoundaryKey::Cut(x) = n.key {
            cut_node.insert(x, id);
        }
    }
    let mut cut_adj = vec![Vec::new(); nodes.len()];
    for (id, n) in nodes.iter().enumerate() {
        let BoundaryKey::Cut(x) = n.key else { continue };
        for &(y, w) in g.neighbors(x) {
            if let Some(&other) = cut_node.get(&y) {
                if nodes[other].child != n.child {
                    cut_adj[id].push((other, w));
                }
            }
        }
        cut_adj[id].sort_unstable();
    }
    CoarseView {
        block,
        children,
        nodes,
        child_nodes,
        cut_adj,
        boundary: own.clone(),
        boundary_node,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;

    fn path4() -> Instance {
        let g = Graph::from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        Instance::new(g, 0, 3).unwrap()
    }

    #[test]
    fn single_block_has_only_terminals() {
        let inst = path4();
        let h = Hierarchy::trivial(4);
        let views = build_leaf_views(&inst, &h, 12).unwrap();
        assert_eq!(views.len(), 1);
        let keys: Vec<_> = views[0].boundary.iter().map(|b| b.key).collect();
        assert_eq!(keys, vec![BoundaryKey::Source, BoundaryKey::Target]);
    }

    #[test]
    fn two_blocks_on_a_path() {
        let inst = path4();
        let h = Hierarchy::flat(&[vec![0, 1], vec![2, 3]]);
        let views = build_leaf_views(&inst, &h, 12).unwrap();
        let keys: Vec<Vec<_>> = views
            .iter()
            .map(|v| v.boundary.iter().map(|b| b.key).collect())
            .collect();
        assert_eq!(
            keys,
            vec![
                vec![BoundaryKey::Source, BoundaryKey::Cut(1)],
                vec![BoundaryKey::Target, BoundaryKey::Cut(2)],
            ]
        );
        // the cut edge lives only at the parent
        assert!(views.iter().all(|v| v.adj.iter().map(Vec::len).sum::<usize>() == 2));
        let bounds = boundaries(&inst, &h);
        let coarse = build_coarse_view(&inst.graph, &h, h.root, &bounds);
        let nodes = &coarse.nodes;
        let cut_edges: Vec<_> = coarse
            .cut_adj
            .iter()
            .enumerate()
            .flat_map(|(a, l)| l.iter().map(move |&(b, w)| (nodes[a].key, nodes[b].key, w)))
            .filter(|(a, b, _)| a < b)
            .collect();
        assert_eq!(cut_edges, vec![(BoundaryKey::Cut(1), BoundaryKey::Cut(2), 1)]);
        let root_keys: Vec<_> = coarse.boundary.iter().map(|b| b.key).collect();
        assert_eq!(root_keys, vec![BoundaryKey::Source, BoundaryKey::Target]);
    }

    #[test]
    fn boundary_count_equals_cut_vertices_plus_terminals() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(5);
        for _ in 0..50 {
            let n = 4 + rng.index(20);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.unit() < 0.25 {
                        edges.push((u, v, rng.below(5)));
                    }
                }
            }
            let g = Graph::from_edges(n, edges).unwrap();
            let s = rng.index(n);
            let t = (s + 1 + rng.index(n - 1)) % n;
            let inst = Instance::new(g, s, t).unwrap();
            let k = 1 + rng.index(4);
            let p = Partition {
                block_of: (0..n).map(|_| rng.index(k)).collect(),
                k,
                epsilon: 0.0,
            };
            let blocks: Vec<Vec<usize>> = p.blocks().into_iter().filter(|b| !b.is_empty()).collect();
            let h = Hierarchy::flat(&blocks);
            let views = build_leaf_views(&inst, &h, 16);
            let Ok(views) = views else { continue };
            let cut_vertices = (0..n)
                .filter(|&x| inst.graph.neighbors(x).iter().any(|&(y, _)| p.block_of[y] != p.block_of[x]))
                .count();
            let total: usize = views.iter().map(|v| v.boundary.len()).sum();
            assert_eq!(total, cut_vertices + 2);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::from_edges(5, (1..5).map(|i| (0, i, 1))).unwrap();
        let inst = Instance::new(g, 1, 2).unwrap();
        let h = Hierarchy::flat(&[vec![0], vec![1, 2, 3, 4]]);
        let err = build_leaf_views(&inst, &h, 2).unwrap_err();
        assert_eq!(err.size, 6);
    }
}
