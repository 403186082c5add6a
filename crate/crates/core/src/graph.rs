//! Undirected weighted graphs, METIS I/O and path validation.

use std::fmt::Write as _;

use thiserror::Error;

pub type Vertex = usize;
pub type Weight = u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: malformed adjacency entry: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("vertex {0} lists a neighbor that does not list it back with the same weight")]
    AsymmetricAdjacency(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("vertex id {0} out of range")]
    IdOutOfRange(i64),
    #[error("negative or non-integer weight {0:?}")]
    NegativeWeight(String),
    #[error("header declares {declared} edges but adjacency lists contain {found}")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("{0} and {1} are not adjacent")]
    NonEdge(Vertex, Vertex),
}

/// Immutable undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<(Vertex, Weight)>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops and parallel edges.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex, Weight)>,
    ) -> Result<Graph, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for (u, v, w) in edges {
            if u >= n {
                return Err(GraphError::IdOutOfRange(u as i64));
            }
            if v >= n {
                return Err(GraphError::IdOutOfRange(v as i64));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut edge_count = 0;
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(GraphError::DuplicateEdge(u.min(pair[0].0), u.max(pair[0].0)));
            }
            edge_count += list.len();
        }
        Ok(Graph {
            adj,
            edge_count: edge_count / 2,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, Weight)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn edge_weight(&self, u: Vertex, v: Vertex) -> Option<Weight> {
        let list = self.adj.get(u)?;
        list.binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| list[i].1)
    }

    /// Every edge once, as `(u, v, w)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex, Weight)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn total_weight(&self) -> Weight {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Subgraph induced by `vertices`; vertex `vertices[i]` becomes `i`.
    pub fn induced(&self, vertices: &[Vertex]) -> Graph {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let edges = vertices.iter().enumerate().flat_map(|(i, &v)| {
            let local = &local;
            self.adj[v]
                .iter()
                .filter(move |&&(u, _)| local[u] != usize::MAX && i < local[u])
                .map(move |&(u, w)| (i, local[u], w))
        });
        Graph::from_edges(vertices.len(), edges.collect::<Vec<_>>())
            .expect("induced subgraph of a valid graph is valid")
    }

    /// Applies `perm` (old id -> new id) to every vertex.
    pub fn relabel(&self, perm: &[Vertex]) -> Graph {
        Graph::from_edges(
            self.vertex_count(),
            self.edges().map(|(u, v, w)| (perm[u], perm[v], w)),
        )
        .expect("relabeling preserves validity")
    }
}

/// A longest-path query: graph plus distinct endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub source: Vertex,
    pub target: Vertex,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("endpoint {0} is not a vertex of the graph")]
    EndpointOutOfRange(Vertex),
    #[error("source and target coincide")]
    SameEndpoints,
}

impl Instance {
    pub fn new(graph: Graph, source: Vertex, target: Vertex) -> Result<Instance, InstanceError> {
        for v in [source, target] {
            if v >= graph.vertex_count() {
                return Err(InstanceError::EndpointOutOfRange(v));
            }
        }
        if source == target {
            return Err(InstanceError::SameEndpoints);
        }
        Ok(Instance {
            graph,
            source,
            target,
        })
    }

    pub fn reversed(&self) -> Instance {
        Instance {
            graph: self.graph.clone(),
            source: self.target,
            target: self.source,
        }
    }
}

fn parse_id(token: &str, n: usize, line: usize) -> Result<Vertex, GraphError> {
    let id: i64 = token.parse().map_err(|_| GraphError::MalformedLine {
        line,
        detail: format!("bad vertex id {token:?}"),
    })?;
    if id < 1 || id as u64 > n as u64 {
        return Err(GraphError::IdOutOfRange(id));
    }
    Ok(id as usize - 1)
}

fn parse_weight(token: &str) -> Result<Weight, GraphError> {
    token
        .parse::<u64>()
        .map_err(|_| GraphError::NegativeWeight(token.to_string()))
}

/// Parses METIS adjacency text. Supports `fmt` values `0`/absent
/// (unweighted, every edge gets weight 1) and `1` (edge weights).
pub fn parse_metis(text: &[u8]) -> Result<Graph, GraphError> {
    let text = std::str::from_utf8(text)
        .map_err(|_| GraphError::MalformedHeader("input is not UTF-8".into()))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('%'));

    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| GraphError::MalformedHeader("missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 4 {
        return Err(GraphError::MalformedHeader(header.to_string()));
    }
    let bad_header = || GraphError::MalformedHeader(header.to_string());
    let n: usize = fields[0].parse().map_err(|_| bad_header())?;
    let m: usize = fields[1].parse().map_err(|_| bad_header())?;
    let weighted = match fields.get(2).copied() {
        None | Some("0") | Some("00") | Some("000") => false,
        Some("1") | Some("01") | Some("001") => true,
        Some(_) => return Err(bad_header()),
    };

    let mut adj: Vec<Vec<(Vertex, Weight)>> = Vec::with_capacity(n);
    for (lineno, line) in lines {
        if adj.len() == n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(GraphError::MalformedLine {
                line: lineno,
                detail: format!("more than {n} adjacency lines"),
            });
        }
        let u = adj.len();
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let mut list = Vec::new();
        if weighted {
            if tokens.len() % 2 != 0 {
                return Err(GraphError::MalformedLine {
                    line: lineno,
                    detail: "odd number of tokens in weighted adjacency".into(),
                });
            }
            for pair in tokens.chunks(2) {
                list.push((parse_id(pair[0], n, lineno)?, parse_weight(pair[1])?));
            }
        } else {
            for tok in tokens {
                list.push((parse_id(tok, n, lineno)?, 1));
            }
        }
        for &(v, _) in &list {
            if v == u {
                return Err(GraphError::SelfLoop(u));
            }
        }
        list.sort_unstable();
        if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(GraphError::DuplicateEdge(u.min(pair[0].0), u.max(pair[0].0)));
        }
        adj.push(list);
    }
    if adj.len() != n {
        return Err(GraphError::MalformedHeader(format!(
            "header declares {n} vertices but {} adjacency lines follow",
            adj.len()
        )));
    }

    let mut total = 0;
    for (u, list) in adj.iter().enumerate() {
        for &(v, w) in list {
            let back = adj[v].binary_search_by_key(&u, |&(x, _)| x);
            match back {
                Ok(i) if adj[v][i].1 == w => {}
                _ => return Err(GraphError::AsymmetricAdjacency(u)),
            }
        }
        total += list.len();
    }
    if total / 2 != m {
        return Err(GraphError::EdgeCountMismatch {
            declared: m,
            found: total / 2,
        });
    }
    Ok(Graph {
        adj,
        edge_count: m,
    })
}

/// Canonical METIS text: always edge-weighted, neighbors ascending, 1-based ids.
pub fn emit_metis(g: &Graph) -> Vec<u8> {
    let mut out = String::new();
    writeln!(out, "{} {} 1", g.vertex_count(), g.edge_count()).unwrap();
    for list in &g.adj {
        let mut first = true;
        for &(v, w) in list {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{} {}", v + 1, w).unwrap();
        }
        out.push('\n');
    }
    out.into_bytes()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathFailure {
    NonEdge,
    RepeatedVertex,
    WrongEndpoints,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub weight: Weight,
    pub failure: Option<PathFailure>,
}

impl Verdict {
    fn fail(reason: PathFailure) -> Verdict {
        Verdict {
            valid: false,
            weight: 0,
            failure: Some(reason),
        }
    }
}

/// Checks that `path` is a simple `source`–`target` path in `g`.
pub fn validate_path(g: &Graph, path: &[Vertex], source: Vertex, target: Vertex) -> Verdict {
    let (Some(&first), Some(&last)) = (path.first(), path.last()) else {
        return Verdict::fail(PathFailure::Empty);
    };
    let n = g.vertex_count();
    if path.iter().any(|&v| v >= n) {
        return Verdict::fail(PathFailure::NonEdge);
    }
    let mut seen = vec![false; n];
    for &v in path {
        if std::mem::replace(&mut seen[v], true) {
            return Verdict::fail(PathFailure::RepeatedVertex);
        }
    }
    let weight = match path_weight(g, path) {
        Ok(w) => w,
        Err(_) => return Verdict::fail(PathFailure::NonEdge),
    };
    if first != source || last != target {
        return Verdict::fail(PathFailure::WrongEndpoints);
    }
    Verdict {
        valid: true,
        weight,
        failure: None,
    }
}

pub fn path_weight(g: &Graph, path: &[Vertex]) -> Result<Weight, GraphError> {
    path.windows(2).try_fold(0, |acc, step| {
        g.edge_weight(step[0], step[1])
            .map(|w| acc + w)
            .ok_or(GraphError::NonEdge(step[0], step[1]))
    })
}
