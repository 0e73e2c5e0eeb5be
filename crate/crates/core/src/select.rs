//! Which l-tuples get labeled, and over which node scope each labeled copy is
//! refined.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::{Graph, NodeId, NodeTuple};
use crate::klwl::enumerate_tuples;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SelectionPolicy {
    Exhaustive,
    Random { rate: f64, seed: u64 },
    Ego { hops: u32 },
    Constraint { max_dist: u32 },
    Cluster { target_size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "radius", rename_all = "lowercase")]
pub enum ScopePolicy {
    Full,
    /// Only the labeled nodes.
    LabelBased,
    /// Union of the R-hop ego-nets of the labeled nodes.
    KHop(u32),
    /// One subgraph per root: the root's R-hop ego-net; labels are then
    /// selected inside that subgraph and refinement stays inside it.
    Rooted(u32),
}

impl SelectionPolicy {
    pub fn is_sampled(&self) -> bool {
        matches!(self, SelectionPolicy::Random { .. })
    }

    /// Cluster seeding depends on node ids, so it is not equivariant.
    pub fn is_heuristic(&self) -> bool {
        matches!(self, SelectionPolicy::Cluster { .. })
    }

    pub fn select(&self, g: &Graph, l: usize) -> Result<Vec<NodeTuple>> {
        match *self {
            SelectionPolicy::Exhaustive => Ok(select_exhaustive(g, l)),
            SelectionPolicy::Random { rate, seed } => select_random(g, l, rate, seed),
            SelectionPolicy::Ego { hops } => select_ego(g, hops, l),
            SelectionPolicy::Constraint { max_dist } => select_constraint(g, l, max_dist),
            SelectionPolicy::Cluster { target_size } => select_cluster(g, l, target_size),
        }
    }
}

impl FromStr for SelectionPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Argument(format!("bad selection policy {s:?}"));
        let policy = match parts.as_slice() {
            ["all"] => SelectionPolicy::Exhaustive,
            ["random", rate, seed] => SelectionPolicy::Random {
                rate: rate.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            },
            ["ego", k] => SelectionPolicy::Ego {
                hops: k.parse().map_err(|_| bad())?,
            },
            ["constraint", d] => SelectionPolicy::Constraint {
                max_dist: d.parse().map_err(|_| bad())?,
            },
            ["cluster", m] => SelectionPolicy::Cluster {
                target_size: m.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        match policy {
            SelectionPolicy::Random { rate, .. } if !(rate > 0.0 && rate <= 1.0) => {
                arg(format!("sampling rate {rate} outside (0, 1]"))
            }
            SelectionPolicy::Constraint { max_dist: 0 } => arg("max_dist must be at least 1"),
            SelectionPolicy::Cluster { target_size: 0 } => arg("cluster size must be at least 1"),
            p => Ok(p),
        }
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionPolicy::Exhaustive => write!(f, "all"),
            SelectionPolicy::Random { rate, seed } => write!(f, "random:{rate}:{seed}"),
            SelectionPolicy::Ego { hops } => write!(f, "ego:{hops}"),
            SelectionPolicy::Constraint { max_dist } => write!(f, "constraint:{max_dist}"),
            SelectionPolicy::Cluster { target_size } => write!(f, "cluster:{target_size}"),
        }
    }
}

impl FromStr for ScopePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("bad scope policy {s:?}"));
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["full"] => Ok(ScopePolicy::Full),
            ["labels"] => Ok(ScopePolicy::LabelBased),
            ["khop", r] => Ok(ScopePolicy::KHop(r.parse().map_err(|_| bad())?)),
            ["rooted", r] => Ok(ScopePolicy::Rooted(r.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ScopePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScopePolicy::Full => write!(f, "full"),
            ScopePolicy::LabelBased => write!(f, "labels"),
            ScopePolicy::KHop(r) => write!(f, "khop:{r}"),
            ScopePolicy::Rooted(r) => write!(f, "rooted:{r}"),
        }
    }
}

pub fn select_exhaustive(g: &Graph, l: usize) -> Vec<NodeTuple> {
    crate::klwl::enumerate_label_tuples(g, l)
}

/// Keeps each tuple of `V^l` independently with probability `rate`.
pub fn select_random(g: &Graph, l: usize, rate: f64, seed: u64) -> Result<Vec<NodeTuple>> {
    if !(rate > 0.0 && rate <= 1.0) {
        return arg(format!("sampling rate {rate} outside (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(select_exhaustive(g, l)
        .into_iter()
        .filter(|_| rng.gen::<f64>() < rate)
        .collect())
}

/// Tuples `(r, x_2, .., x_l)` with every `x_i` in the `hops`-ego-net of `r`.
pub fn select_ego(g: &Graph, hops: u32, l: usize) -> Result<Vec<NodeTuple>> {
    if l == 0 {
        return arg("ego selection needs l >= 1 (the root occupies position 1)");
    }
    let mut out = Vec::new();
    for r in g.nodes() {
        let ego = g.ego_net(r, hops);
        for rest in enumerate_tuples(&ego, l - 1) {
            let mut t = Vec::with_capacity(l);
            t.push(r);
            t.extend_from_slice(&rest);
            out.push(NodeTuple(t));
        }
    }
    Ok(out)
}

/// Tuples whose entries are pairwise within `max_dist` hops.
pub fn select_constraint(g: &Graph, l: usize, max_dist: u32) -> Result<Vec<NodeTuple>> {
    if max_dist == 0 {
        return arg("max_dist must be at least 1");
    }
    let d = g.all_pairs_shortest_paths();
    // Unreachable pairs only pass when max_dist is itself INF.
    let ok = |a: NodeId, b: NodeId| a == b || d.get(a, b) <= max_dist;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(l);
    extend_constrained(g.node_count() as NodeId, l, &ok, &mut cur, &mut out);
    Ok(out)
}

fn extend_constrained(
    n: NodeId,
    l: usize,
    ok: &dyn Fn(NodeId, NodeId) -> bool,
    cur: &mut Vec<NodeId>,
    out: &mut Vec<NodeTuple>,
) {
    if cur.len() == l {
        out.push(NodeTuple(cur.clone()));
        return;
    }
    for v in 0..n {
        if cur.iter().all(|&x| ok(x, v)) {
            cur.push(v);
            extend_constrained(n, l, ok, cur, out);
            cur.pop();
        }
    }
}

/// Partitions `V` into clusters of at most `target_size` nodes: repeatedly
/// seed at the lowest unassigned id and grow breadth-first over unassigned
/// nodes (neighbors in id order) until the cluster is full or stuck.
pub fn clusters(g: &Graph, target_size: usize) -> Vec<Vec<NodeId>> {
    let n = g.node_count();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for seed in g.nodes() {
        if assigned[seed as usize] {
            continue;
        }
        assigned[seed as usize] = true;
        let mut cluster = vec![seed];
        let mut queue = VecDeque::from([seed]);
        'grow: while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if cluster.len() >= target_size {
                    break 'grow;
                }
                if !assigned[w as usize] {
                    assigned[w as usize] = true;
                    cluster.push(w);
                    queue.push_back(w);
                }
            }
        }
        cluster.sort_unstable();
        out.push(cluster);
    }
    out
}

/// All `l`-tuples inside each BFS cluster, deduplicated and sorted.
pub fn select_cluster(g: &Graph, l: usize, target_size: usize) -> Result<Vec<NodeTuple>> {
    if target_size == 0 {
        return arg("cluster size must be at least 1");
    }
    let mut out: Vec<NodeTuple> = clusters(g, target_size)
        .iter()
        .flat_map(|c| enumerate_tuples(c, l))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Node scope of the copy labeled by `v`.
pub fn scope_for(g: &Graph, v: &NodeTuple, policy: &ScopePolicy) -> Result<Vec<NodeId>> {
    match *policy {
        ScopePolicy::Full => Ok(g.nodes().collect()),
        ScopePolicy::LabelBased => {
            if v.is_empty() {
                return arg("label-based scope is empty without labels");
            }
            let mut s = v.0.clone();
            s.sort_unstable();
            s.dedup();
            Ok(s)
        }
        ScopePolicy::KHop(r) => {
            if v.is_empty() {
                return arg("k-hop scope is empty without labels");
            }
            let mut s: Vec<NodeId> = v.iter().flat_map(|&x| g.ego_net(x, r)).collect();
            s.sort_unstable();
            s.dedup();
            Ok(s)
        }
        ScopePolicy::Rooted(_) => Err(Error::Config(
            "rooted scopes are chosen per root, not per label tuple".into(),
        )),
    }
}

/// One labeled copy: its label tuple and, unless full, its node scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopySpec {
    pub labels: NodeTuple,
    pub scope: Option<Vec<NodeId>>,
}

/// Labeled copies of `g` under a selection and scope policy.
pub fn labeled_copies(
    g: &Graph,
    l: usize,
    selection: &SelectionPolicy,
    scope: &ScopePolicy,
) -> Result<Vec<CopySpec>> {
    match *scope {
        ScopePolicy::Full => Ok(selection
            .select(g, l)?
            .into_iter()
            .map(|labels| CopySpec {
                labels,
                scope: None,
            })
            .collect()),
        ScopePolicy::LabelBased | ScopePolicy::KHop(_) => selection
            .select(g, l)?
            .into_iter()
            .map(|labels| {
                let s = scope_for(g, &labels, scope)?;
                Ok(CopySpec {
                    labels,
                    scope: Some(s),
                })
            })
            .collect(),
        ScopePolicy::Rooted(r) => {
            let mut out = Vec::new();
            for root in g.nodes() {
                let ego = g.ego_net(root, r);
                let sub = g.induced_subgraph(&ego);
                for t in selection.select(&sub, l)? {
                    out.push(CopySpec {
                        labels: NodeTuple(t.iter().map(|&x| ego[x as usize]).collect()),
                        scope: Some(ego.clone()),
                    });
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::INF;

    fn image(ts: &[NodeTuple], pi: &[NodeId]) -> Vec<NodeTuple> {
        let mut v: Vec<NodeTuple> = ts
            .iter()
            .map(|t| NodeTuple(t.iter().map(|&x| pi[x as usize]).collect()))
            .collect();
        v.sort();
        v
    }

    fn sorted(mut v: Vec<NodeTuple>) -> Vec<NodeTuple> {
        v.sort();
        v
    }

    fn distinct(t: &NodeTuple) -> bool {
        let mut s = t.0.clone();
        s.sort_unstable();
        s.dedup();
        s.len() == t.len()
    }

    #[test]
    fn random_examples() {
        let c3 = gen::cycle(3).unwrap();
        assert_eq!(
            select_random(&c3, 2, 1.0, 9).unwrap(),
            select_exhaustive(&c3, 2)
        );
        let a = select_random(&c3, 1, 0.5, 42).unwrap();
        assert_eq!(a, select_random(&c3, 1, 0.5, 42).unwrap());
        assert!(select_random(&c3, 1, 0.0, 1).is_err());
        assert!(select_random(&c3, 1, 1.5, 1).is_err());
    }

    #[test]
    fn random_count_within_three_sigma() {
        // binomial(n^l, rate) per seed; the mean of 200 seeds has sd sqrt(npq/200)
        let g = gen::cycle(10).unwrap();
        let (trials, rate, total) = (200u64, 0.3, 100.0);
        let sum: usize = (0..trials)
            .map(|s| select_random(&g, 2, rate, s).unwrap().len())
            .sum();
        let mean = sum as f64 / trials as f64;
        let sd = (total * rate * (1.0 - rate) / trials as f64).sqrt();
        assert!((mean - total * rate).abs() <= 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn ego_examples() {
        let c6 = gen::cycle(6).unwrap();
        let t = select_ego(&c6, 1, 2).unwrap();
        assert_eq!(t.len(), 18);
        assert!(t.contains(&NodeTuple(vec![0, 5])));
        assert!(!t.contains(&NodeTuple(vec![0, 2])));
        let full = select_ego(&c6, 3, 2).unwrap();
        assert_eq!(full, select_exhaustive(&c6, 2));
        let singles = select_ego(&c6, 0, 1).unwrap();
        assert_eq!(singles, select_exhaustive(&c6, 1));
        assert!(select_ego(&c6, 1, 0).is_err());
    }

    #[test]
    fn constraint_examples() {
        let c6 = gen::cycle(6).unwrap();
        let rings: Vec<_> = select_constraint(&c6, 6, 3)
            .unwrap()
            .into_iter()
            .filter(distinct)
            .collect();
        assert_eq!(rings.len(), 720);
        let p6 = gen::path(6).unwrap();
        assert_eq!(
            select_constraint(&p6, 6, 3)
                .unwrap()
                .into_iter()
                .filter(distinct)
                .count(),
            0
        );
        assert_eq!(
            select_constraint(&p6, 2, 5).unwrap(),
            select_exhaustive(&p6, 2)
        );
        assert_eq!(
            select_constraint(&p6, 2, INF - 1).unwrap(),
            select_exhaustive(&p6, 2)
        );
    }

    #[test]
    fn cluster_examples() {
        let c6 = gen::cycle(6).unwrap();
        assert_eq!(clusters(&c6, 3), vec![vec![0, 1, 5], vec![2, 3, 4]]);
        assert_eq!(select_cluster(&c6, 2, 3).unwrap().len(), 18);
        assert_eq!(
            select_cluster(&c6, 2, 6).unwrap(),
            select_exhaustive(&c6, 2)
        );
        assert_eq!(
            select_cluster(&c6, 0, 2).unwrap(),
            vec![NodeTuple::default()]
        );
    }

    #[test]
    fn scope_examples() {
        let c6 = gen::cycle(6).unwrap();
        assert_eq!(
            scope_for(&c6, &NodeTuple(vec![1]), &ScopePolicy::Full)
                .unwrap()
                .len(),
            6
        );
        assert_eq!(
            scope_for(&c6, &NodeTuple(vec![3, 0]), &ScopePolicy::LabelBased).unwrap(),
            vec![0, 3]
        );
        assert!(scope_for(&c6, &NodeTuple::default(), &ScopePolicy::LabelBased).is_err());
        let rook = gen::rook4();
        assert_eq!(
            scope_for(&rook, &NodeTuple(vec![0]), &ScopePolicy::KHop(1))
                .unwrap()
                .len(),
            7
        );
    }

    #[test]
    fn rooted_copies_label_inside_each_ego_net() {
        let c6 = gen::cycle(6).unwrap();
        let copies = labeled_copies(
            &c6,
            1,
            &SelectionPolicy::Exhaustive,
            &ScopePolicy::Rooted(1),
        )
        .unwrap();
        assert_eq!(copies.len(), 18);
        for c in &copies {
            let s = c.scope.as_ref().unwrap();
            assert_eq!(s.len(), 3);
            assert!(s.contains(&c.labels[0]));
        }
    }

    #[test]
    fn policy_strings_round_trip() {
        for s in ["all", "random:0.5:7", "ego:2", "constraint:3", "cluster:4"] {
            assert_eq!(s.parse::<SelectionPolicy>().unwrap().to_string(), s);
        }
        for s in ["full", "labels", "khop:1", "rooted:2"] {
            assert_eq!(s.parse::<ScopePolicy>().unwrap().to_string(), s);
        }
        for bad in ["random:2:1", "ego", "constraint:0", "cluster:0", "nope"] {
            assert!(bad.parse::<SelectionPolicy>().is_err(), "{bad}");
        }
        assert!("khop".parse::<ScopePolicy>().is_err());
    }

    #[test]
    fn ego_and_constraint_are_equivariant() {
        let g = gen::random_regular(8, 3, 5)
            .unwrap()
            .disjoint_union(&gen::path(3).unwrap());
        let pi: Vec<NodeId> = vec![3, 9, 0, 7, 1, 10, 2, 8, 4, 6, 5];
        let h = g.permute(&pi).unwrap();
        for l in 1..=2 {
            assert_eq!(
                image(&select_ego(&g, 1, l).unwrap(), &pi),
                sorted(select_ego(&h, 1, l).unwrap())
            );
            assert_eq!(
                image(&select_constraint(&g, l, 2).unwrap(), &pi),
                sorted(select_constraint(&h, l, 2).unwrap())
            );
        }
    }
}
