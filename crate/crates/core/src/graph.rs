//! Undirected node-colored graphs, the edge-list / JSON formats, and the
//! metric queries (shortest paths, ego-nets) used by selection policies.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

pub type NodeId = u32;

/// Base node color (node feature).
pub type NodeColor = u32;

/// Hop-distance sentinel for disconnected pairs.
pub const INF: u32 = u32::MAX;

/// An undirected simple graph with one base color per node.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Adjacency lists are
/// kept sorted so `has_edge` is a binary search.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    edges: Vec<(NodeId, NodeId)>,
    colors: Vec<NodeColor>,
    adj: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges, out-of-range
    /// endpoints, and a color vector of the wrong length.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        colors: Vec<NodeColor>,
    ) -> Result<Self> {
        if colors.len() != node_count {
            return arg(format!(
                "expected {node_count} node colors, got {}",
                colors.len()
            ));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u as usize >= node_count || v as usize >= node_count {
                return arg(format!("edge ({u}, {v}) has endpoint >= {node_count}"));
            }
            if u == v {
                return arg(format!("self-loop at node {u}"));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return arg(format!("duplicate edge ({}, {})", w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); node_count];
        for &(u, v) in &list {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph {
            edges: list,
            colors,
            adj,
        })
    }

    /// Uncolored graph (every base color 0).
    pub fn uncolored(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        Self::new(node_count, edges, vec![0; node_count])
    }

    pub fn empty(node_count: usize) -> Self {
        Self::uncolored(node_count, []).expect("edgeless graph is valid")
    }

    pub fn node_count(&self) -> usize {
        self.colors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn colors(&self) -> &[NodeColor] {
        &self.colors
    }

    pub fn color(&self, v: NodeId) -> NodeColor {
        self.colors[v as usize]
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.node_count() as NodeId
    }

    /// Sorted degree sequence.
    pub fn degree_multiset(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        d.sort_unstable();
        d
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Same structure with every base color replaced.
    pub fn with_colors(&self, colors: Vec<NodeColor>) -> Result<Self> {
        Self::new(self.node_count(), self.edges.iter().copied(), colors)
    }

    /// Relabels node `v` as `pi[v]`.
    pub fn permute(&self, pi: &[NodeId]) -> Result<Self> {
        let n = self.node_count();
        if pi.len() != n {
            return arg(format!(
                "permutation has length {}, graph has {n} nodes",
                pi.len()
            ));
        }
        let mut seen = vec![false; n];
        for &p in pi {
            if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
                return arg("permutation is not a bijection");
            }
        }
        let mut colors = vec![0; n];
        for v in 0..n {
            colors[pi[v] as usize] = self.colors[v];
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (pi[u as usize], pi[v as usize]));
        Self::new(n, edges, colors)
    }

    /// Places `other` after `self`, offsetting its node ids.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.node_count() as NodeId;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + off, v + off)));
        let colors = self.colors.iter().chain(&other.colors).copied().collect();
        Self::new(self.node_count() + other.node_count(), edges, colors)
            .expect("union of valid graphs is valid")
    }

    /// Subgraph induced by `nodes` (sorted, distinct); node `i` of the result
    /// is `nodes[i]`.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Graph {
        let mut local = vec![NodeId::MAX; self.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v as usize] = i as NodeId;
        }
        let edges = self.edges.iter().filter_map(|&(u, v)| {
            let (a, b) = (local[u as usize], local[v as usize]);
            (a != NodeId::MAX && b != NodeId::MAX).then_some((a, b))
        });
        let colors = nodes.iter().map(|&v| self.colors[v as usize]).collect();
        Self::new(nodes.len(), edges, colors).expect("induced subgraph is valid")
    }

    /// Floyd-Warshall over hop counts.
    pub fn all_pairs_shortest_paths(&self) -> Distances {
        let n = self.node_count();
        let mut d = vec![INF; n * n];
        for v in 0..n {
            d[v * n + v] = 0;
        }
        for &(u, v) in &self.edges {
            d[u as usize * n + v as usize] = 1;
            d[v as usize * n + u as usize] = 1;
        }
        for m in 0..n {
            for i in 0..n {
                let dim = d[i * n + m];
                if dim == INF {
                    continue;
                }
                for j in 0..n {
                    let dmj = d[m * n + j];
                    if dmj != INF && dim + dmj < d[i * n + j] {
                        d[i * n + j] = dim + dmj;
                    }
                }
            }
        }
        Distances { n, d }
    }

    /// Nodes within `radius` hops of `root`, sorted, root included.
    pub fn ego_net(&self, root: NodeId, radius: u32) -> Vec<NodeId> {
        let mut dist = vec![INF; self.node_count()];
        dist[root as usize] = 0;
        let mut queue = VecDeque::from([root]);
        let mut out = vec![root];
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            if dv == radius {
                continue;
            }
            for &w in self.neighbors(v) {
                if dist[w as usize] == INF {
                    dist[w as usize] = dv + 1;
                    out.push(w);
                    queue.push_back(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() == 0 || self.ego_net(0, INF - 1).len() == self.node_count()
    }

    /// Edge-list text: `n m`, `colors ...`, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.node_count(), self.edge_count());
        s.push_str("colors");
        for c in &self.colors {
            let _ = write!(s, " {c}");
        }
        s.push('\n');
        for (u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson {
            n: self.node_count(),
            colors: Some(self.colors.clone()),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| [u as u64, v as u64])
                .collect(),
        })
        .expect("graph json serializes")
    }
}

/// Hop distances with [`INF`] for disconnected pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distances {
    n: usize,
    d: Vec<u32>,
}

impl Distances {
    pub fn get(&self, u: NodeId, v: NodeId) -> u32 {
        self.d[u as usize * self.n + v as usize]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> u32 {
        self.d
            .iter()
            .copied()
            .filter(|&x| x != INF)
            .max()
            .unwrap_or(0)
    }
}

/// A tuple of node ids; repeated entries are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeTuple(pub Vec<NodeId>);

impl NodeTuple {
    pub fn new(entries: Vec<NodeId>) -> Self {
        NodeTuple(entries)
    }

    /// `self || other`
    pub fn concat(&self, other: &NodeTuple) -> NodeTuple {
        NodeTuple(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Copy with position `i` replaced by `u`.
    pub fn replace(&self, i: usize, u: NodeId) -> NodeTuple {
        let mut t = self.0.clone();
        t[i] = u;
        NodeTuple(t)
    }
}

impl Deref for NodeTuple {
    type Target = [NodeId];
    fn deref(&self) -> &[NodeId] {
        &self.0
    }
}

impl From<Vec<NodeId>> for NodeTuple {
    fn from(v: Vec<NodeId>) -> Self {
        NodeTuple(v)
    }
}

/// Side information from parsing: the original ids when the file used a
/// sparse id space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// `remap[i]` is the original id of dense node `i`; `None` when ids were
    /// already dense.
    pub remap: Option<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    colors: Option<Vec<NodeColor>>,
    edges: Vec<[u64; 2]>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return perr(
            line,
            format!("expected a nonnegative integer, found {tok:?}"),
        );
    }
    tok.parse()
        .or_else(|_| perr(line, format!("integer out of range: {tok}")))
}

/// Parses the edge-list format.
pub fn parse_graph(text: &str) -> Result<Graph> {
    parse_graph_with_report(text).map(|(g, _)| g)
}

/// Parses either format, choosing JSON when the document starts with `{`.
pub fn parse_any(text: &str) -> Result<(Graph, ParseReport)> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text)
    } else {
        parse_graph_with_report(text)
    }
}

pub fn parse_graph_with_report(text: &str) -> Result<(Graph, ParseReport)> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    let Some(header) = lines.first() else {
        return perr(1, "empty document");
    };
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return perr(1, "header must be `n m`");
    }
    let n: usize = num(head[0], 1)?;
    let m: usize = num(head[1], 1)?;

    let mut idx = 1;
    let mut colors = vec![0; n];
    if let Some(l) = lines.get(1) {
        let mut toks = l.split_whitespace();
        if toks.next() == Some("colors") {
            let cs = toks
                .map(|t| num(t, 2))
                .collect::<Result<Vec<NodeColor>>>()?;
            if cs.len() != n {
                return perr(2, format!("expected {n} colors, found {}", cs.len()));
            }
            colors = cs;
            idx = 2;
        }
    }

    let body = &lines[idx..];
    if body.len() != m {
        return perr(
            idx + body.len().min(m) + 1,
            format!("header declares {m} edges, found {}", body.len()),
        );
    }
    let mut raw = Vec::with_capacity(m);
    for (i, l) in body.iter().enumerate() {
        let line = idx + i + 1;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return perr(line, "edge line must be `u v`");
        }
        let (u, v): (u64, u64) = (num(toks[0], line)?, num(toks[1], line)?);
        if u == v {
            return perr(line, format!("self-loop at node {u}"));
        }
        raw.push((u, v, line));
    }
    build_from_raw(n, raw, colors)
}

pub fn parse_graph_json(text: &str) -> Result<(Graph, ParseReport)> {
    let doc: GraphJson = serde_json::from_str(text).or_else(|e| perr(e.line(), e.to_string()))?;
    let colors = doc.colors.unwrap_or_else(|| vec![0; doc.n]);
    if colors.len() != doc.n {
        return perr(
            1,
            format!("expected {} colors, found {}", doc.n, colors.len()),
        );
    }
    let mut raw = Vec::new();
    for (i, [u, v]) in doc.edges.into_iter().enumerate() {
        if u == v {
            return perr(1, format!("self-loop at node {u} (edge #{i})"));
        }
        raw.push((u, v, 1));
    }
    build_from_raw(doc.n, raw, colors)
}

/// Densifies sparse ids when they do not fit in `[0, n)` but there are at
/// most `n` distinct ones; nodes never mentioned by an edge follow the
/// remapped ones.
fn build_from_raw(
    n: usize,
    raw: Vec<(u64, u64, usize)>,
    colors: Vec<NodeColor>,
) -> Result<(Graph, ParseReport)> {
    let dense = raw.iter().all(|&(u, v, _)| u < n as u64 && v < n as u64);
    let mut report = ParseReport::default();
    let map: Box<dyn Fn(u64) -> NodeId> = if dense {
        Box::new(|x| x as NodeId)
    } else {
        let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() > n {
            let line = raw
                .iter()
                .find(|&&(u, v, _)| u >= n as u64 || v >= n as u64)
                .map_or(1, |r| r.2);
            return perr(line, format!("endpoint out of range for {n} nodes"));
        }
        report.remap = Some(ids.clone());
        Box::new(move |x| ids.binary_search(&x).expect("collected id") as NodeId)
    };

    let mut seen = rustc_hash::FxHashSet::default();
    let mut edges = Vec::with_capacity(raw.len());
    for &(u, v, line) in &raw {
        let (a, b) = (map(u), map(v));
        if !seen.insert((a.min(b), a.max(b))) {
            return perr(line, format!("duplicate edge ({u}, {v})"));
        }
        edges.push((a, b));
    }
    let g = Graph::new(n, edges, colors).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    Ok((g, report))
}
