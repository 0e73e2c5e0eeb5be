//! Exact pattern counts and a backtracking isomorphism oracle. Both work by
//! direct search and share nothing with the refinement engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::gen;
use crate::graph::{Graph, NodeId};

/// Largest pattern `count_pattern` will enumerate.
pub const MAX_PATTERN_NODES: usize = 8;

/// Largest graph the isomorphism oracle accepts by default.
pub const ORACLE_MAX_NODES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    Triangle,
    TailedTriangle,
    Star3,
    /// 4-cycle plus one chord (the diamond).
    ChordalCycle,
    Cycle(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Induced,
    NonInduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub kind: PatternKind,
    pub mode: CountMode,
}

impl Pattern {
    pub fn new(kind: PatternKind, mode: CountMode) -> Self {
        Pattern { kind, mode }
    }
}

impl PatternKind {
    pub fn graph(&self) -> Result<Graph> {
        match *self {
            PatternKind::Triangle => gen::cycle(3),
            PatternKind::TailedTriangle => Graph::uncolored(4, [(0, 1), (1, 2), (0, 2), (2, 3)]),
            PatternKind::Star3 => Graph::uncolored(4, [(0, 1), (0, 2), (0, 3)]),
            PatternKind::ChordalCycle => {
                Graph::uncolored(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
            }
            PatternKind::Cycle(k) if k > MAX_PATTERN_NODES => arg(format!(
                "cycle pattern of length {k} exceeds {MAX_PATTERN_NODES} nodes"
            )),
            PatternKind::Cycle(k) => gen::cycle(k),
        }
    }
}

impl FromStr for PatternKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "triangle" => PatternKind::Triangle,
            "tailed" => PatternKind::TailedTriangle,
            "star" => PatternKind::Star3,
            "chordal" => PatternKind::ChordalCycle,
            _ => match s.strip_prefix("cycle:").map(str::parse) {
                Some(Ok(k)) => PatternKind::Cycle(k),
                _ => return arg(format!("unknown pattern {s:?}")),
            },
        })
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::Triangle => write!(f, "triangle"),
            PatternKind::TailedTriangle => write!(f, "tailed"),
            PatternKind::Star3 => write!(f, "star"),
            PatternKind::ChordalCycle => write!(f, "chordal"),
            PatternKind::Cycle(k) => write!(f, "cycle:{k}"),
        }
    }
}

impl FromStr for CountMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "induced" => Ok(CountMode::Induced),
            "noninduced" | "non-induced" => Ok(CountMode::NonInduced),
            _ => arg(format!("unknown count mode {s:?}")),
        }
    }
}

/// Injective maps `pattern -> g` that preserve edges (and, when `induced`,
/// non-edges). Colors are ignored.
fn count_embeddings(g: &Graph, pattern: &Graph, induced: bool) -> u64 {
    let p = pattern.node_count();
    // place pattern nodes in an order where each (after the first of its
    // component) has an already-placed neighbor
    let mut order: Vec<NodeId> = Vec::with_capacity(p);
    let mut placed = vec![false; p];
    while order.len() < p {
        let next = (0..p as NodeId)
            .filter(|&v| !placed[v as usize])
            .max_by_key(|&v| {
                let back = pattern
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| placed[w as usize])
                    .count();
                (back, pattern.degree(v), std::cmp::Reverse(v))
            })
            .expect("unplaced node");
        placed[next as usize] = true;
        order.push(next);
    }
    let mut image = vec![NodeId::MAX; p];
    let mut used = vec![false; g.node_count()];
    embed(g, pattern, induced, &order, 0, &mut image, &mut used)
}

fn embed(
    g: &Graph,
    pattern: &Graph,
    induced: bool,
    order: &[NodeId],
    depth: usize,
    image: &mut [NodeId],
    used: &mut [bool],
) -> u64 {
    if depth == order.len() {
        return 1;
    }
    let v = order[depth];
    let anchor = pattern
        .neighbors(v)
        .iter()
        .find(|&&w| image[w as usize] != NodeId::MAX)
        .map(|&w| image[w as usize]);
    let candidates: Vec<NodeId> = match anchor {
        Some(a) => g.neighbors(a).to_vec(),
        None => g.nodes().collect(),
    };
    let mut total = 0;
    for x in candidates {
        if used[x as usize] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&w| {
            let pe = pattern.has_edge(v, w);
            let ge = g.has_edge(x, image[w as usize]);
            if induced {
                pe == ge
            } else {
                !pe || ge
            }
        });
        if !consistent {
            continue;
        }
        used[x as usize] = true;
        image[v as usize] = x;
        total += embed(g, pattern, induced, order, depth + 1, image, used);
        image[v as usize] = NodeId::MAX;
        used[x as usize] = false;
    }
    total
}

/// Order of the automorphism group of an uncolored pattern.
pub fn automorphism_count(pattern: &Graph) -> u64 {
    count_embeddings(pattern, pattern, true)
}

/// Copies of `pattern` in `g`: vertex subsets inducing it, or (non-induced)
/// edge-preserving embeddings divided by the pattern's automorphisms.
pub fn count_subgraph(g: &Graph, pattern: &Graph, mode: CountMode) -> Result<u64> {
    if pattern.node_count() > MAX_PATTERN_NODES {
        return arg(format!(
            "pattern has {} nodes, limit is {MAX_PATTERN_NODES}",
            pattern.node_count()
        ));
    }
    if pattern.node_count() == 0 {
        return Ok(1);
    }
    let emb = count_embeddings(g, pattern, mode == CountMode::Induced);
    Ok(emb / automorphism_count(pattern))
}

pub fn count_pattern(g: &Graph, p: &Pattern) -> Result<u64> {
    count_subgraph(g, &p.kind.graph()?, p.mode)
}

/// `trace(A^3) / 6` by explicit matrix products.
pub fn triangle_trace_check(g: &Graph) -> u64 {
    let n = g.node_count();
    let mut a = vec![0u64; n * n];
    for &(u, v) in g.edges() {
        a[u as usize * n + v as usize] = 1;
        a[v as usize * n + u as usize] = 1;
    }
    let mut a2 = vec![0u64; n * n];
    for i in 0..n {
        for m in 0..n {
            let x = a[i * n + m];
            if x == 0 {
                continue;
            }
            for j in 0..n {
                a2[i * n + j] += x * a[m * n + j];
            }
        }
    }
    let mut trace = 0;
    for i in 0..n {
        for j in 0..n {
            trace += a2[i * n + j] * a[j * n + i];
        }
    }
    trace / 6
}

pub fn brute_force_isomorphic(g: &Graph, h: &Graph) -> Result<bool> {
    brute_force_isomorphic_with_limit(g, h, ORACLE_MAX_NODES)
}

/// Searches for a color- and adjacency-preserving bijection. Candidates are
/// restricted to nodes of equal (color, degree) and every partial map is
/// checked against all previously mapped nodes.
pub fn brute_force_isomorphic_with_limit(g: &Graph, h: &Graph, max_nodes: usize) -> Result<bool> {
    let n = g.node_count();
    if n > max_nodes || h.node_count() > max_nodes {
        return Err(Error::Resource(format!(
            "isomorphism oracle limited to {max_nodes} nodes"
        )));
    }
    if n != h.node_count() || g.edge_count() != h.edge_count() {
        return Ok(false);
    }
    let class = |x: &Graph, v: NodeId| (x.color(v), x.degree(v));
    let mut cg: Vec<_> = g.nodes().map(|v| class(g, v)).collect();
    let mut ch: Vec<_> = h.nodes().map(|v| class(h, v)).collect();
    cg.sort_unstable();
    ch.sort_unstable();
    if cg != ch {
        return Ok(false);
    }

    let class_size = |c: (u32, usize)| cg.iter().filter(|&&x| x == c).count();
    let mut order: Vec<NodeId> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = g
            .nodes()
            .filter(|&v| !placed[v as usize])
            .min_by_key(|&v| {
                let back = g
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| placed[w as usize])
                    .count();
                (std::cmp::Reverse(back), class_size(class(g, v)), v)
            })
            .expect("unplaced node");
        placed[next as usize] = true;
        order.push(next);
    }

    let mut image = vec![NodeId::MAX; n];
    let mut used = vec![false; n];
    Ok(extend_iso(g, h, &order, 0, &mut image, &mut used))
}

fn extend_iso(
    g: &Graph,
    h: &Graph,
    order: &[NodeId],
    depth: usize,
    image: &mut [NodeId],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    let want = (g.color(v), g.degree(v));
    for x in h.nodes() {
        if used[x as usize] || (h.color(x), h.degree(x)) != want {
            continue;
        }
        let ok = order[..depth]
            .iter()
            .all(|&w| g.has_edge(v, w) == h.has_edge(x, image[w as usize]));
        if !ok {
            continue;
        }
        used[x as usize] = true;
        image[v as usize] = x;
        if extend_iso(g, h, order, depth + 1, image, used) {
            return true;
        }
        image[v as usize] = NodeId::MAX;
        used[x as usize] = false;
    }
    false
}
