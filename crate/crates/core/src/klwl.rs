//! The k,l-WL driver: label l-tuples, refine every labeled copy of both graphs
//! in one session, and pool the per-copy colors into a graph color.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::{Graph, NodeColor, NodeId, NodeTuple};
use crate::refine::{ColorId, RefinementSession, Unit, Variant};
use crate::select::{labeled_copies, ScopePolicy, SelectionPolicy};

/// Tracked-tuple budget used when none is given.
pub const DEFAULT_BUDGET: usize = 50_000_000;

/// A graph whose node `labels[i]` carries the extra label `i + 1`.
///
/// The base graph is borrowed; labeling never copies structure.
#[derive(Clone, Debug)]
pub struct LabeledGraph<'g> {
    base: &'g Graph,
    labels: NodeTuple,
}

/// Base color plus the sorted label indices a node carries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EffectiveColor {
    pub base: NodeColor,
    pub labels: Vec<u32>,
}

impl<'g> LabeledGraph<'g> {
    pub fn new(base: &'g Graph, labels: NodeTuple) -> Result<Self> {
        if let Some(&v) = labels.iter().find(|&&v| v as usize >= base.node_count()) {
            return arg(format!("label node {v} out of range"));
        }
        Ok(LabeledGraph { base, labels })
    }

    pub fn unlabeled(base: &'g Graph) -> Self {
        LabeledGraph {
            base,
            labels: NodeTuple::default(),
        }
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn labels(&self) -> &NodeTuple {
        &self.labels
    }

    /// 1-based label indices carried by `v`, ascending.
    pub fn label_indices(&self, v: NodeId) -> impl Iterator<Item = u32> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |&(_, &x)| x == v)
            .map(|(i, _)| i as u32 + 1)
    }

    pub fn effective_color(&self, v: NodeId) -> EffectiveColor {
        EffectiveColor {
            base: self.base.color(v),
            labels: self.label_indices(v).collect(),
        }
    }
}

/// Labels `g` with `v`, which must have exactly `l` entries.
pub fn label_graph<'g>(g: &'g Graph, v: NodeTuple, l: usize) -> Result<LabeledGraph<'g>> {
    if v.len() != l {
        return arg(format!("label tuple has {} entries, expected {l}", v.len()));
    }
    LabeledGraph::new(g, v)
}

/// Every tuple of `V^l` in lexicographic order.
pub fn enumerate_label_tuples(g: &Graph, l: usize) -> Vec<NodeTuple> {
    enumerate_tuples(&g.nodes().collect::<Vec<_>>(), l)
}

/// Every `l`-tuple over `nodes` (assumed sorted), lexicographic.
pub(crate) fn enumerate_tuples(nodes: &[NodeId], l: usize) -> Vec<NodeTuple> {
    let mut out = vec![NodeTuple::default()];
    for _ in 0..l {
        out = out
            .iter()
            .flat_map(|t| {
                nodes.iter().map(move |&v| {
                    let mut e = t.0.clone();
                    e.push(v);
                    NodeTuple(e)
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pooling {
    /// Per labeled copy first, then over copies.
    Tl,
    /// Per tuple over copies first, then over tuples.
    Lt,
}

impl std::str::FromStr for Pooling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tl" => Ok(Pooling::Tl),
            "lt" => Ok(Pooling::Lt),
            _ => arg(format!("unknown pooling {s:?} (expected tl or lt)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlConfig {
    pub k: usize,
    pub l: usize,
    pub variant: Variant,
    pub pooling: Pooling,
    pub selection: SelectionPolicy,
    pub scope: ScopePolicy,
    pub budget: usize,
}

impl KlConfig {
    /// Exhaustive selection, full scope, TL pooling.
    pub fn new(k: usize, l: usize, variant: Variant) -> Self {
        KlConfig {
            k,
            l,
            variant,
            pooling: Pooling::Tl,
            selection: SelectionPolicy::Exhaustive,
            scope: ScopePolicy::Full,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn pooling(mut self, p: Pooling) -> Self {
        self.pooling = p;
        self
    }

    pub fn selection(mut self, s: SelectionPolicy) -> Self {
        self.selection = s;
        self
    }

    pub fn scope(mut self, s: ScopePolicy) -> Self {
        self.scope = s;
        self
    }

    pub fn budget(mut self, b: usize) -> Self {
        self.budget = b;
        self
    }
}

/// Graph colors of several graphs refined together, plus run statistics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KlRun {
    pub colors: Vec<ColorId>,
    pub iterations: usize,
    pub labeled_copies: Vec<usize>,
    pub tracked_tuples: usize,
    pub sampled: bool,
    pub heuristic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KlOutcome {
    pub color_g: ColorId,
    pub color_h: ColorId,
    pub distinguished: bool,
    pub iterations: usize,
    pub labeled_copies: usize,
    pub tracked_tuples: usize,
    pub sampled: bool,
    pub heuristic: bool,
}

/// Runs k,l-WL on all `graphs` in one shared session and returns their
/// pooled graph colors; equal colors mean "not distinguished".
pub fn kl_colors(graphs: &[&Graph], cfg: &KlConfig) -> Result<KlRun> {
    if cfg.k == 0 {
        return arg("k must be at least 1");
    }
    let copies: Vec<_> = graphs
        .iter()
        .map(|g| labeled_copies(g, cfg.l, &cfg.selection, &cfg.scope))
        .collect::<Result<_>>()?;

    if cfg.pooling == Pooling::Lt {
        for (g, cs) in graphs.iter().zip(&copies) {
            let full = g.node_count();
            if cs
                .iter()
                .any(|c| c.scope.as_ref().is_some_and(|s| s.len() != full))
            {
                return Err(Error::Config(
                    "LT pooling needs a common tuple universe; use full scope".into(),
                ));
            }
        }
    }

    let mut projected: usize = 0;
    for (g, cs) in graphs.iter().zip(&copies) {
        for c in cs {
            let s = c.scope.as_ref().map_or(g.node_count(), Vec::len);
            projected = s
                .checked_pow(cfg.k as u32)
                .and_then(|t| projected.checked_add(t))
                .unwrap_or(usize::MAX);
        }
    }
    if projected > cfg.budget {
        return Err(Error::Resource(format!(
            "(k={}, l={}) needs {projected} tracked tuples, budget is {}",
            cfg.k, cfg.l, cfg.budget
        )));
    }

    let mut units = Vec::new();
    let mut owner = Vec::new();
    for (gi, (g, cs)) in graphs.iter().zip(&copies).enumerate() {
        for c in cs {
            let lg = LabeledGraph::new(g, c.labels.clone())?;
            units.push(match &c.scope {
                Some(s) => Unit::scoped(lg, s.clone()),
                None => Unit::full(lg),
            });
            owner.push(gi);
        }
    }

    let sampled = cfg.selection.is_sampled();
    let heuristic = cfg.selection.is_heuristic();
    let labeled_copies: Vec<usize> = copies.iter().map(Vec::len).collect();

    if units.is_empty() {
        let mut t = crate::refine::ColorTable::new();
        let empty = t.intern_multiset(&[]);
        return Ok(KlRun {
            colors: vec![empty; graphs.len()],
            iterations: 0,
            labeled_copies,
            tracked_tuples: 0,
            sampled,
            heuristic,
        });
    }

    let mut session = RefinementSession::new(units, cfg.k, cfg.variant)?;
    session.run_to_stable();
    let tracked_tuples = session.tracked_tuples();
    let iterations = session.iteration();

    let colors = match cfg.pooling {
        Pooling::Tl => {
            let per_copy = session.unit_graph_colors()?;
            let mut grouped = vec![Vec::new(); graphs.len()];
            for (c, &gi) in per_copy.into_iter().zip(&owner) {
                grouped[gi].push(c);
            }
            let table = session.table_mut();
            grouped.iter().map(|cs| table.intern_multiset(cs)).collect()
        }
        Pooling::Lt => {
            let mut out = Vec::with_capacity(graphs.len());
            let mut unit = 0;
            for cs in &copies {
                let members: Vec<usize> = (unit..unit + cs.len()).collect();
                unit += cs.len();
                let tuples = members.first().map_or(0, |&u| session.unit_colors(u).len());
                let mut per_tuple = Vec::with_capacity(tuples);
                let mut column = Vec::with_capacity(members.len());
                for t in 0..tuples {
                    column.clear();
                    column.extend(members.iter().map(|&u| session.unit_colors(u)[t]));
                    let c = session.table_mut().intern_multiset(&column);
                    per_tuple.push(c);
                }
                out.push(session.table_mut().intern_multiset(&per_tuple));
            }
            out
        }
    };

    Ok(KlRun {
        colors,
        iterations,
        labeled_copies,
        tracked_tuples,
        sampled,
        heuristic,
    })
}

/// Compares `g` and `h` under `cfg`.
pub fn kl_color(g: &Graph, h: &Graph, cfg: &KlConfig) -> Result<KlOutcome> {
    let run = kl_colors(&[g, h], cfg)?;
    Ok(KlOutcome {
        color_g: run.colors[0],
        color_h: run.colors[1],
        distinguished: run.colors[0] != run.colors[1],
        iterations: run.iterations,
        labeled_copies: run.labeled_copies.iter().sum(),
        tracked_tuples: run.tracked_tuples,
        sampled: run.sampled,
        heuristic: run.heuristic,
    })
}

/// `matrix[i][j]` is whether `(k_range[i], l_range[j])` distinguishes the pair
/// under exhaustive selection, full scope and TL pooling.
pub fn kl_matrix(
    g: &Graph,
    h: &Graph,
    k_range: &[usize],
    l_range: &[usize],
    variant: Variant,
    budget: usize,
) -> Result<Vec<Vec<bool>>> {
    k_range
        .iter()
        .map(|&k| {
            l_range
                .iter()
                .map(|&l| {
                    let cfg = KlConfig::new(k, l, variant).budget(budget);
                    kl_color(g, h, &cfg).map(|o| o.distinguished)
                })
                .collect()
        })
        .collect()
}

/// Renders a matrix as in the distinguishability tables.
pub fn matrix_ascii(m: &[Vec<bool>], k_range: &[usize], l_range: &[usize]) -> String {
    let mut s = String::from("     ");
    for l in l_range {
        s.push_str(&format!(" l={l}"));
    }
    s.push('\n');
    for (row, k) in m.iter().zip(k_range) {
        s.push_str(&format!("k={k:<3}"));
        for &d in row {
            s.push_str(if d { "   ✓" } else { "   ✗" });
        }
        s.push('\n');
    }
    s
}
