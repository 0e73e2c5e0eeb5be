//! Deterministic instance generators: classic pairs, the 16-vertex strongly
//! regular pair, CFI graphs with their twists, and random regular graphs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Error, Result};
use crate::graph::{Graph, NodeId};

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return arg(format!("cycle needs at least 3 nodes, got {n}"));
    }
    let n32 = n as NodeId;
    Graph::uncolored(n, (0..n32).map(|i| (i, (i + 1) % n32)))
}

pub fn path(n: usize) -> Result<Graph> {
    if n < 1 {
        return arg("path needs at least 1 node");
    }
    Graph::uncolored(n, (1..n as NodeId).map(|i| (i - 1, i)))
}

/// Complete graph on `l` nodes colored `1..=l`.
pub fn clique_colored(l: usize) -> Result<Graph> {
    if l < 1 {
        return arg("clique needs at least 1 node");
    }
    let l32 = l as NodeId;
    let edges = (0..l32).flat_map(|i| (i + 1..l32).map(move |j| (i, j)));
    Graph::new(l, edges, (1..=l32).collect())
}

/// Two disjoint triangles.
pub fn two_triangles() -> Graph {
    let c3 = cycle(3).expect("triangle");
    c3.disjoint_union(&c3)
}

/// 4x4 rook's graph: cells of a 4x4 board, adjacent when sharing a row or
/// column. Node `4 * i + j` is cell `(i, j)`.
pub fn rook4() -> Graph {
    let mut edges = Vec::new();
    for a in 0..16u32 {
        for b in a + 1..16 {
            if a / 4 == b / 4 || a % 4 == b % 4 {
                edges.push((a, b));
            }
        }
    }
    Graph::uncolored(16, edges).expect("rook graph")
}

/// Shrikhande graph: Cayley graph of Z4 x Z4 with connection set
/// `{±(1,0), ±(0,1), ±(1,1)}`. Node `4 * i + j` is `(i, j)`.
pub fn shrikhande() -> Graph {
    let diffs = [(1, 0), (3, 0), (0, 1), (0, 3), (1, 1), (3, 3)];
    let mut edges = Vec::new();
    for a in 0..16u32 {
        for b in a + 1..16 {
            let d = ((b / 4 + 4 - a / 4) % 4, (b % 4 + 4 - a % 4) % 4);
            if diffs.contains(&d) {
                edges.push((a, b));
            }
        }
    }
    Graph::uncolored(16, edges).expect("shrikhande graph")
}

/// Simple `d`-regular graph from the pairing model, restarting on loops or
/// repeated pairs.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if (n * d) % 2 == 1 {
        return arg(format!("n*d = {} is odd", n * d));
    }
    if d >= n {
        return arg(format!("degree {d} must be below node count {n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<NodeId> = (0..n as NodeId)
        .flat_map(|v| std::iter::repeat_n(v, d))
        .collect();
    for _ in 0..10_000 {
        points.shuffle(&mut rng);
        let mut edges: Vec<(NodeId, NodeId)> = points
            .chunks(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        if edges.iter().any(|&(u, v)| u == v) {
            continue;
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Graph::uncolored(n, edges);
    }
    Err(Error::Resource(format!(
        "pairing model found no simple {d}-regular graph on {n} nodes"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// Even-parity binaries only.
    Chi,
    /// Even binaries plus odd binaries in a second color.
    Omega,
    /// All binaries share one color; each even binary is joined to a twisted
    /// CFI graph of `K_{a+1}`, each odd one to an untwisted copy.
    Gamma(usize),
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::Chi => write!(f, "chi"),
            BlockKind::Omega => write!(f, "omega"),
            BlockKind::Gamma(a) => write!(f, "gamma({a})"),
        }
    }
}

impl FromStr for BlockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi" => Ok(BlockKind::Chi),
            "omega" => Ok(BlockKind::Omega),
            _ => s
                .strip_prefix("gamma(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|a| a.parse().ok())
                .map(BlockKind::Gamma)
                .ok_or_else(|| Error::Argument(format!("unknown CFI block kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfiSpec {
    pub base: Graph,
    pub kind: BlockKind,
    /// Base edges whose cross connections are swapped.
    pub twists: Vec<(NodeId, NodeId)>,
}

impl CfiSpec {
    pub fn new(base: Graph, kind: BlockKind) -> Self {
        CfiSpec {
            base,
            kind,
            twists: Vec::new(),
        }
    }

    /// Twists the lexicographically smallest base edge.
    pub fn twisted(self) -> Self {
        self.with_twist_count(1)
    }

    /// Twists the `t` lexicographically smallest base edges.
    pub fn with_twist_count(mut self, t: usize) -> Self {
        self.twists = self.base.edges().iter().take(t).copied().collect();
        self
    }

    pub fn with_twists(mut self, edges: Vec<(NodeId, NodeId)>) -> Self {
        self.twists = edges;
        self
    }
}

/// Closed-form node and edge counts of the CFI construction.
pub fn cfi_expected_size(base: &Graph, kind: BlockKind) -> Result<(usize, usize)> {
    let (branch_nodes, branch_edges) = match kind {
        BlockKind::Gamma(a) => {
            let inner = clique_colored(a + 1)?;
            cfi_expected_size(&inner, BlockKind::Chi)?
        }
        _ => (0, 0),
    };
    let mut nodes = 0;
    let mut edges = 2 * base.edge_count();
    for v in base.nodes() {
        let d = base.degree(v);
        let binaries = match kind {
            BlockKind::Chi => 1usize << (d - 1),
            _ => 1usize << d,
        };
        nodes += binaries + 2 * d;
        edges += binaries * d;
        if let BlockKind::Gamma(_) = kind {
            nodes += binaries * branch_nodes;
            edges += binaries * (branch_edges + branch_nodes);
        }
    }
    Ok((nodes, edges))
}

// Composite color keys, densified in sorted order after construction.
const KEY_BINARY: u32 = 0;
const KEY_BIT: u32 = 1;
const KEY_BRANCH: u32 = 2;
const PARITY_EVEN: u32 = 0;
const PARITY_ODD: u32 = 1;
const PARITY_HIDDEN: u32 = 2;

/// Builds the CFI graph of `spec`.
///
/// Each base vertex `v` of degree `d` becomes a block: binary nodes for bit
/// strings `m` of length `d` (even weight for chi, all for omega and gamma)
/// and bit pairs `(a_i, b_i)`, one per incident edge with neighbors in id
/// order. Binary `m` connects to `a_i` when bit `i` of `m` is set, else to
/// `b_i`. For a base edge `(v, w)` the pairs are joined `a-a, b-b`, or
/// `a-b, b-a` when twisted.
pub fn cfi(spec: &CfiSpec) -> Result<Graph> {
    let base = &spec.base;
    if base.node_count() == 0 || base.min_degree() < 2 {
        return arg("CFI base graph needs minimum degree 2");
    }
    if let BlockKind::Gamma(a) = spec.kind {
        if a < 2 {
            return arg("gamma blocks need branch parameter a >= 2");
        }
    }
    for &(u, v) in &spec.twists {
        if (u as usize) >= base.node_count()
            || (v as usize) >= base.node_count()
            || !base.has_edge(u, v)
        {
            return arg(format!("twist ({u}, {v}) is not a base edge"));
        }
    }
    let branches = match spec.kind {
        BlockKind::Gamma(a) => {
            let inner = clique_colored(a + 1)?;
            let plain = cfi(&CfiSpec::new(inner.clone(), BlockKind::Chi))?;
            let twisted = cfi(&CfiSpec::new(inner, BlockKind::Chi).twisted())?;
            Some((twisted, plain))
        }
        _ => None,
    };

    let mut keys: Vec<Vec<u32>> = Vec::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    // bit_node[v][i] = (a_i, b_i) of the block of v
    let mut bit_node: Vec<Vec<(NodeId, NodeId)>> = Vec::with_capacity(base.node_count());
    let add = |keys: &mut Vec<Vec<u32>>, key: Vec<u32>| {
        keys.push(key);
        (keys.len() - 1) as NodeId
    };

    for v in base.nodes() {
        let nbrs = base.neighbors(v);
        let d = nbrs.len();
        let xv = base.color(v);
        let pairs: Vec<(NodeId, NodeId)> = nbrs
            .iter()
            .map(|&w| {
                let key = vec![KEY_BIT, xv, base.color(w)];
                (add(&mut keys, key.clone()), add(&mut keys, key))
            })
            .collect();
        for m in 0u32..(1 << d) {
            let odd = m.count_ones() % 2 == 1;
            if odd && spec.kind == BlockKind::Chi {
                continue;
            }
            let parity = match spec.kind {
                BlockKind::Gamma(_) => PARITY_HIDDEN,
                _ if odd => PARITY_ODD,
                _ => PARITY_EVEN,
            };
            let b = add(&mut keys, vec![KEY_BINARY, xv, parity]);
            for (i, &(ai, bi)) in pairs.iter().enumerate() {
                edges.push((b, if m >> i & 1 == 1 { ai } else { bi }));
            }
            if let Some((twisted, plain)) = &branches {
                let branch = if odd { plain } else { twisted };
                let off = keys.len() as NodeId;
                for u in branch.nodes() {
                    add(&mut keys, vec![KEY_BRANCH, branch.color(u)]);
                    edges.push((b, off + u));
                }
                edges.extend(branch.edges().iter().map(|&(x, y)| (off + x, off + y)));
            }
        }
        bit_node.push(pairs);
    }

    for &(v, w) in base.edges() {
        let iv = base.neighbors(v).binary_search(&w).expect("edge");
        let iw = base.neighbors(w).binary_search(&v).expect("edge");
        let (av, bv) = bit_node[v as usize][iv];
        let (aw, bw) = bit_node[w as usize][iw];
        let twisted = spec
            .twists
            .iter()
            .filter(|&&(x, y)| (x.min(y), x.max(y)) == (v, w))
            .count()
            % 2
            == 1;
        if twisted {
            edges.extend([(av, bw), (bv, aw)]);
        } else {
            edges.extend([(av, aw), (bv, bw)]);
        }
    }

    let dense: BTreeMap<&Vec<u32>, u32> = {
        let mut m: BTreeMap<&Vec<u32>, u32> = keys.iter().map(|k| (k, 0)).collect();
        for (i, v) in m.values_mut().enumerate() {
            *v = i as u32;
        }
        m
    };
    let colors = keys.iter().map(|k| dense[k]).collect();
    Graph::new(keys.len(), edges, colors)
}

/// Instance families addressable by name, e.g. `union:cycle:3:cycle:3` or
/// `cfi:chi:clique:3:twisted`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Cycle(usize),
    Path(usize),
    Clique(usize),
    Rook4,
    Shrikhande,
    Union(Box<Family>, Box<Family>),
    Cfi {
        kind: BlockKind,
        base: Box<Family>,
        twists: usize,
    },
    RandomRegular {
        n: usize,
        d: usize,
        seed: u64,
    },
}

impl Family {
    pub fn build(&self) -> Result<Graph> {
        match self {
            Family::Cycle(n) => cycle(*n),
            Family::Path(n) => path(*n),
            Family::Clique(l) => clique_colored(*l),
            Family::Rook4 => Ok(rook4()),
            Family::Shrikhande => Ok(shrikhande()),
            Family::Union(a, b) => Ok(a.build()?.disjoint_union(&b.build()?)),
            Family::Cfi { kind, base, twists } => {
                cfi(&CfiSpec::new(base.build()?, *kind).with_twist_count(*twists))
            }
            Family::RandomRegular { n, d, seed } => random_regular(*n, *d, *seed),
        }
    }

    fn parse_tokens(toks: &[&str], pos: &mut usize, src: &str) -> Result<Family> {
        let bad = |why: &str| Error::Argument(format!("bad family {src:?}: {why}"));
        let mut next = || {
            let t = toks.get(*pos).copied().ok_or_else(|| bad("unexpected end"));
            *pos += 1;
            t
        };
        let int = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| bad(&format!("{t:?} is not an integer")))
        };
        let head = next()?;
        Ok(match head {
            "cycle" => Family::Cycle(int(next()?)?),
            "path" => Family::Path(int(next()?)?),
            "clique" => Family::Clique(int(next()?)?),
            "rook4" => Family::Rook4,
            "shrikhande" => Family::Shrikhande,
            "randreg" => {
                let n = int(next()?)?;
                let d = int(next()?)?;
                let seed = next()?.parse().map_err(|_| bad("seed"))?;
                Family::RandomRegular { n, d, seed }
            }
            "union" => {
                let a = Self::parse_tokens(toks, pos, src)?;
                let b = Self::parse_tokens(toks, pos, src)?;
                Family::Union(Box::new(a), Box::new(b))
            }
            "cfi" => {
                let kind: BlockKind = next()?.parse()?;
                let base = Self::parse_tokens(toks, pos, src)?;
                let twists = match toks.get(*pos) {
                    Some(&"twisted") => {
                        *pos += 1;
                        1
                    }
                    Some(&"untwisted") => {
                        *pos += 1;
                        0
                    }
                    Some(t) if t.starts_with("twists=") => {
                        *pos += 1;
                        int(&t["twists=".len()..])?
                    }
                    _ => 0,
                };
                Family::Cfi {
                    kind,
                    base: Box::new(base),
                    twists,
                }
            }
            other => return Err(bad(&format!("unknown family {other:?}"))),
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.split(':').collect();
        let mut pos = 0;
        let f = Family::parse_tokens(&toks, &mut pos, s)?;
        if pos != toks.len() {
            return arg(format!("bad family {s:?}: trailing {:?}", &toks[pos..]));
        }
        Ok(f)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cycle(n) => write!(f, "cycle:{n}"),
            Family::Path(n) => write!(f, "path:{n}"),
            Family::Clique(l) => write!(f, "clique:{l}"),
            Family::Rook4 => write!(f, "rook4"),
            Family::Shrikhande => write!(f, "shrikhande"),
            Family::Union(a, b) => write!(f, "union:{a}:{b}"),
            Family::Cfi { kind, base, twists } => match twists {
                0 => write!(f, "cfi:{kind}:{base}"),
                1 => write!(f, "cfi:{kind}:{base}:twisted"),
                t => write!(f, "cfi:{kind}:{base}:twists={t}"),
            },
            Family::RandomRegular { n, d, seed } => write!(f, "randreg:{n}:{d}:{seed}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common_neighbors(g: &Graph, u: NodeId, v: NodeId) -> usize {
        g.neighbors(u)
            .iter()
            .filter(|w| g.neighbors(v).contains(w))
            .count()
    }

    #[test]
    fn small_families() {
        let c6 = cycle(6).unwrap();
        assert_eq!((c6.node_count(), c6.edge_count()), (6, 6));
        assert!(cycle(2).is_err());
        let k3 = clique_colored(3).unwrap();
        assert_eq!(k3.colors(), &[1, 2, 3]);
        assert_eq!(k3.edge_count(), 3);
        let p2 = path(2).unwrap();
        assert_eq!(p2.edges(), &[(0, 1)]);
        assert!(path(0).is_err());
        assert_eq!(path(1).unwrap().node_count(), 1);
    }

    #[test]
    fn srg_parameters_by_enumeration() {
        for g in [rook4(), shrikhande()] {
            assert_eq!((g.node_count(), g.edge_count()), (16, 48));
            assert!(g.nodes().all(|v| g.degree(v) == 6));
            for u in 0..16 {
                for v in u + 1..16 {
                    assert_eq!(common_neighbors(&g, u, v), 2, "pair ({u},{v})");
                }
            }
        }
        // local graphs differ: two triangles vs a hexagon
        let r = rook4();
        let s = shrikhande();
        let local = |g: &Graph| g.induced_subgraph(g.neighbors(0));
        assert!(!local(&r).is_connected());
        assert!(local(&s).is_connected());
    }

    #[test]
    fn chi_k3_counts() {
        let g = cfi(&CfiSpec::new(clique_colored(3).unwrap(), BlockKind::Chi)).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (18, 18));
        let t = cfi(&CfiSpec::new(clique_colored(3).unwrap(), BlockKind::Chi).twisted()).unwrap();
        assert_eq!((t.node_count(), t.edge_count()), (18, 18));
        // untwisted splits into two 9-cycles, one twist joins them
        assert!(!g.is_connected());
        assert!(t.is_connected());
        assert_eq!(g.colors().iter().max(), t.colors().iter().max());
    }

    #[test]
    fn closed_form_sizes() {
        let k4 = clique_colored(4).unwrap();
        for kind in [BlockKind::Chi, BlockKind::Omega, BlockKind::Gamma(2)] {
            for base in [clique_colored(3).unwrap(), k4.clone(), cycle(5).unwrap()] {
                let g = cfi(&CfiSpec::new(base.clone(), kind).twisted()).unwrap();
                assert_eq!(
                    (g.node_count(), g.edge_count()),
                    cfi_expected_size(&base, kind).unwrap(),
                    "{kind} over {base:?}"
                );
            }
        }
        assert_eq!(
            cfi(&CfiSpec::new(k4, BlockKind::Chi)).unwrap().node_count(),
            40
        );
    }

    #[test]
    fn binaries_touch_one_bit_per_pair() {
        // block layout: bit pairs (a_i, b_i) first, then the binaries
        let base = clique_colored(4).unwrap();
        for kind in [BlockKind::Chi, BlockKind::Omega] {
            let g = cfi(&CfiSpec::new(base.clone(), kind)).unwrap();
            let mut off = 0usize;
            for v in base.nodes() {
                let d = base.degree(v);
                let nb = if kind == BlockKind::Chi {
                    1 << (d - 1)
                } else {
                    1 << d
                };
                for j in 0..nb {
                    let bin = (off + 2 * d + j) as NodeId;
                    assert_eq!(g.degree(bin), d);
                    for i in 0..d {
                        let (a, b) = ((off + 2 * i) as NodeId, (off + 2 * i + 1) as NodeId);
                        assert!(g.has_edge(bin, a) ^ g.has_edge(bin, b));
                    }
                }
                off += 2 * d + nb;
            }
            assert_eq!(off, g.node_count());
        }
    }

    #[test]
    fn cfi_rejects_bad_specs() {
        assert!(cfi(&CfiSpec::new(path(3).unwrap(), BlockKind::Chi)).is_err());
        assert!(cfi(&CfiSpec::new(
            clique_colored(3).unwrap(),
            BlockKind::Gamma(1)
        ))
        .is_err());
        let bad = CfiSpec::new(cycle(4).unwrap(), BlockKind::Chi).with_twists(vec![(0, 2)]);
        assert!(cfi(&bad).is_err());
    }

    #[test]
    fn random_regular_contract() {
        let k4 = random_regular(4, 3, 1).unwrap();
        assert_eq!(k4.edge_count(), 6);
        for seed in 0..20 {
            let g = random_regular(6, 2, seed).unwrap();
            assert!(g.nodes().all(|v| g.degree(v) == 2));
            let g = random_regular(10, 3, seed).unwrap();
            assert!(g.nodes().all(|v| g.degree(v) == 3));
            assert_eq!(g, random_regular(10, 3, seed).unwrap());
        }
        assert!(random_regular(5, 3, 0).is_err());
        assert!(random_regular(4, 4, 0).is_err());
    }

    #[test]
    fn family_strings() {
        for s in [
            "cycle:6",
            "path:2",
            "clique:3",
            "rook4",
            "shrikhande",
            "union:cycle:3:cycle:3",
            "cfi:chi:clique:3:twisted",
            "cfi:gamma(2):clique:4",
            "cfi:omega:cycle:4:twists=2",
            "randreg:10:3:7",
            "union:cfi:chi:clique:3:twisted:rook4",
        ] {
            let f: Family = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert_eq!(
            "union:cycle:3:cycle:3"
                .parse::<Family>()
                .unwrap()
                .build()
                .unwrap(),
            two_triangles()
        );
        assert_eq!(
            "cfi:chi:clique:3:twisted"
                .parse::<Family>()
                .unwrap()
                .build()
                .unwrap()
                .node_count(),
            18
        );
        for bad in [
            "",
            "cycle",
            "cycle:x",
            "union:cycle:3",
            "cfi:beta:clique:3",
            "rook4:5",
        ] {
            assert!(bad.parse::<Family>().is_err(), "{bad}");
        }
    }
}
