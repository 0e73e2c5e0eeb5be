//! Color refinement over k-tuples.
//!
//! Every labeled copy being compared lives in one [`RefinementSession`] with a
//! single [`ColorTable`]. Colors are dense ids handed out by exact interning
//! of canonical signatures, so equal ids across graphs mean equal refinement
//! histories and there are no hash collisions.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::{Graph, NodeId};
use crate::klwl::LabeledGraph;

pub type ColorId = u32;

// Leading word of every interned signature; keeps signature families apart.
const TAG_ISO: u32 = 0;
const TAG_NEIGHBOR: u32 = 1;
const TAG_WL: u32 = 2;
const TAG_FWL: u32 = 3;
pub(crate) const TAG_MULTISET: u32 = 4;

/// Largest supported tuple arity.
pub const MAX_ARITY: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Wl,
    Fwl,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wl" => Ok(Variant::Wl),
            "fwl" => Ok(Variant::Fwl),
            _ => arg(format!("unknown variant {s:?} (expected wl or fwl)")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Wl => "WL",
            Variant::Fwl => "FWL",
        })
    }
}

/// Canonical encoding of a signature tree as a flat word sequence.
///
/// Every variable-length part is length-prefixed and every multiset is
/// sorted, so two signatures are equal exactly when the structures they
/// encode are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature(Box<[u32]>);

impl Signature {
    pub fn words(&self) -> &[u32] {
        &self.0
    }
}

/// Injective map from signatures to dense color ids, first-seen order.
#[derive(Debug, Default)]
pub struct ColorTable {
    map: FxHashMap<Box<[u32]>, ColorId>,
}

impl ColorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn intern(&mut self, words: &[u32]) -> ColorId {
        if let Some(&id) = self.map.get(words) {
            return id;
        }
        let id = self.next_id();
        self.map.insert(words.into(), id);
        id
    }

    pub fn intern_signature(&mut self, sig: &Signature) -> ColorId {
        self.intern(&sig.0)
    }

    fn intern_owned(&mut self, words: Box<[u32]>) -> ColorId {
        let next = self.next_id();
        *self.map.entry(words).or_insert(next)
    }

    /// Interns the multiset of `ids` (order irrelevant).
    pub fn intern_multiset(&mut self, ids: &[ColorId]) -> ColorId {
        let mut buf = Vec::with_capacity(ids.len() * 2 + 2);
        encode_multiset(ids, &mut buf);
        self.intern(&buf)
    }

    fn next_id(&self) -> ColorId {
        ColorId::try_from(self.map.len()).expect("color id space exhausted")
    }
}

/// `[TAG_MULTISET, distinct, (id, count)...]` with ids ascending.
pub(crate) fn encode_multiset(ids: &[ColorId], out: &mut Vec<u32>) {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    out.push(TAG_MULTISET);
    let len_at = out.len();
    out.push(0);
    let mut distinct = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push(sorted[i]);
        out.push((j - i) as u32);
        distinct += 1;
        i = j;
    }
    out[len_at] = distinct;
}

/// A labeled (or plain) graph together with the node scope its tuples and
/// replacement universe range over. `scope == None` means the whole graph.
#[derive(Clone, Debug)]
pub struct Unit<'g> {
    pub graph: LabeledGraph<'g>,
    pub scope: Option<Vec<NodeId>>,
}

impl<'g> Unit<'g> {
    pub fn full(graph: LabeledGraph<'g>) -> Self {
        Unit { graph, scope: None }
    }

    pub fn plain(g: &'g Graph) -> Self {
        Unit::full(LabeledGraph::unlabeled(g))
    }

    pub fn scoped(graph: LabeledGraph<'g>, mut scope: Vec<NodeId>) -> Self {
        scope.sort_unstable();
        scope.dedup();
        Unit {
            graph,
            scope: Some(scope),
        }
    }

    fn scope_nodes(&self) -> Vec<NodeId> {
        match &self.scope {
            Some(s) => s.clone(),
            None => self.graph.base().nodes().collect(),
        }
    }

    fn in_scope(&self, v: NodeId) -> bool {
        match &self.scope {
            Some(s) => s.binary_search(&v).is_ok(),
            None => (v as usize) < self.graph.base().node_count(),
        }
    }
}

fn write_iso_type(g: &LabeledGraph<'_>, tup: &[NodeId], out: &mut Vec<u32>) {
    let k = tup.len();
    out.push(TAG_ISO);
    out.push(k as u32);
    for i in 0..k {
        for j in i + 1..k {
            out.push((tup[i] == tup[j]) as u32);
        }
    }
    for &v in tup {
        out.push(g.base().color(v));
        let start = out.len();
        out.push(0);
        let mut count = 0;
        for idx in g.label_indices(v) {
            out.push(idx);
            count += 1;
        }
        out[start] = count;
    }
    for i in 0..k {
        for j in i + 1..k {
            out.push(g.base().has_edge(tup[i], tup[j]) as u32);
        }
    }
}

/// Isomorphism type of `tup` in `unit`: equality pattern, per-position
/// effective color (base color plus carried labels), adjacency pattern.
pub fn iso_type_signature(unit: &Unit<'_>, tup: &[NodeId]) -> Result<Signature> {
    if tup.is_empty() {
        return arg("tuple must be non-empty");
    }
    if let Some(&v) = tup.iter().find(|&&v| !unit.in_scope(v)) {
        return arg(format!("node {v} is outside the unit's scope"));
    }
    let mut buf = Vec::new();
    write_iso_type(&unit.graph, tup, &mut buf);
    Ok(Signature(buf.into_boxed_slice()))
}

/// Scope-local adjacency, shared between units over the same graph and scope.
#[derive(Debug)]
struct LocalView {
    scope: Vec<NodeId>,
    nbrs: Vec<Vec<u32>>,
}

impl LocalView {
    fn new(g: &Graph, scope: Vec<NodeId>) -> Self {
        let mut local = vec![u32::MAX; g.node_count()];
        for (i, &v) in scope.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let nbrs = scope
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .map(|&w| local[w as usize])
                    .filter(|&w| w != u32::MAX)
                    .collect()
            })
            .collect();
        LocalView { scope, nbrs }
    }

    fn size(&self) -> usize {
        self.scope.len()
    }
}

/// Per-unit local ids for each tuple, and the distinct signatures in
/// first-seen order.
type LocalIds = (Vec<u32>, Vec<Box<[u32]>>);

struct UnitState<'g> {
    unit: Unit<'g>,
    view: Arc<LocalView>,
    colors: Vec<ColorId>,
}

impl UnitState<'_> {
    /// Mixed-radix decoding of a tuple index into global node ids.
    fn decode(&self, k: usize, mut idx: usize, out: &mut [NodeId]) {
        let s = self.view.size();
        for i in (0..k).rev() {
            out[i] = self.view.scope[idx % s];
            idx /= s;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStats {
    pub t: usize,
    pub classes: usize,
}

/// Stable (or in-progress) coloring of one unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    /// Tuple colors in lexicographic order of scope tuples.
    pub colors: Vec<ColorId>,
    pub scope: Vec<NodeId>,
    stable_graph_color: Option<ColorId>,
}

impl Coloring {
    pub fn is_stable(&self) -> bool {
        self.stable_graph_color.is_some()
    }

    /// Interned multiset of the stable tuple colors.
    pub fn graph_color(&self) -> Result<ColorId> {
        self.stable_graph_color
            .ok_or_else(|| Error::State("graph color requested before convergence".into()))
    }
}

pub fn graph_color(c: &Coloring) -> Result<ColorId> {
    c.graph_color()
}

/// Lockstep refinement of several units under one shared color table.
pub struct RefinementSession<'g> {
    variant: Variant,
    k: usize,
    units: Vec<UnitState<'g>>,
    table: ColorTable,
    t: usize,
    classes: usize,
    stable: bool,
    history: Vec<IterationStats>,
}

impl<'g> RefinementSession<'g> {
    pub fn new(units: Vec<Unit<'g>>, k: usize, variant: Variant) -> Result<Self> {
        if k == 0 || k > MAX_ARITY {
            return arg(format!("tuple arity k must be in 1..={MAX_ARITY}"));
        }
        if units.is_empty() {
            return arg("session needs at least one unit");
        }
        let mut views: FxHashMap<(usize, Vec<NodeId>), Arc<LocalView>> = FxHashMap::default();
        let mut states = Vec::with_capacity(units.len());
        for unit in units {
            let scope = unit.scope_nodes();
            if scope.is_empty() {
                return arg("unit has an empty node scope");
            }
            if let Some(&v) = scope
                .iter()
                .find(|&&v| v as usize >= unit.graph.base().node_count())
            {
                return arg(format!("scope node {v} out of range"));
            }
            scope
                .len()
                .checked_pow(k as u32)
                .filter(|&c| c <= u32::MAX as usize)
                .ok_or_else(|| Error::Resource(format!("{}^{k} tuples overflow", scope.len())))?;
            let key = (unit.graph.base() as *const Graph as usize, scope);
            let view = views
                .entry(key.clone())
                .or_insert_with(|| Arc::new(LocalView::new(unit.graph.base(), key.1)))
                .clone();
            states.push(UnitState {
                unit,
                view,
                colors: Vec::new(),
            });
        }

        let mut session = RefinementSession {
            variant,
            k,
            units: states,
            table: ColorTable::new(),
            t: 0,
            classes: 0,
            stable: false,
            history: Vec::new(),
        };
        let classes = session.assign(|st, idx, k, buf| {
            let mut tup = [0; 16];
            let tup = &mut tup[..k];
            st.decode(k, idx, tup);
            write_iso_type(&st.unit.graph, tup, buf);
        });
        session.classes = classes;
        session.history.push(IterationStats { t: 0, classes });
        Ok(session)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    /// Number of color classes over all tracked tuples at the current step.
    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn tracked_tuples(&self) -> usize {
        self.units.iter().map(|u| u.colors.len()).sum()
    }

    pub fn history(&self) -> &[IterationStats] {
        &self.history
    }

    /// One `{"t":…,"classes":…}` object per line.
    pub fn history_jsonl(&self) -> String {
        self.history
            .iter()
            .map(|h| serde_json::to_string(h).expect("stats serialize") + "\n")
            .collect()
    }

    pub fn table(&self) -> &ColorTable {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut ColorTable {
        &mut self.table
    }

    /// Current tuple colors of unit `i`, lexicographic over its scope.
    pub fn unit_colors(&self, i: usize) -> &[ColorId] {
        &self.units[i].colors
    }

    pub fn unit_scope(&self, i: usize) -> &[NodeId] {
        &self.units[i].view.scope
    }

    /// Computes each tuple's signature with `sig`, interns per unit in tuple
    /// order, then merges into the shared table in unit order. The resulting
    /// ids do not depend on how the per-unit work was scheduled.
    fn assign<F>(&mut self, sig: F) -> usize
    where
        F: Fn(&UnitState<'g>, usize, usize, &mut Vec<u32>) + Sync,
    {
        let k = self.k;
        let local: Vec<LocalIds> = self
            .units
            .par_iter()
            .map(|st| {
                let count = st.view.size().pow(k as u32);
                let mut map: FxHashMap<Box<[u32]>, u32> = FxHashMap::default();
                let mut ids = Vec::with_capacity(count);
                let mut buf = Vec::new();
                for idx in 0..count {
                    buf.clear();
                    sig(st, idx, k, &mut buf);
                    let id = match map.get(&buf[..]) {
                        Some(&id) => id,
                        None => {
                            let id = map.len() as u32;
                            map.insert(buf.as_slice().into(), id);
                            id
                        }
                    };
                    ids.push(id);
                }
                let mut keys: Vec<Option<Box<[u32]>>> = vec![None; map.len()];
                for (key, id) in map {
                    keys[id as usize] = Some(key);
                }
                (
                    ids,
                    keys.into_iter()
                        .map(|k| k.expect("dense local ids"))
                        .collect(),
                )
            })
            .collect();

        let mut seen = vec![false; self.table.len()];
        let mut classes = 0;
        for (st, (ids, keys)) in self.units.iter_mut().zip(local) {
            let to_global: Vec<ColorId> = keys
                .into_iter()
                .map(|key| self.table.intern_owned(key))
                .collect();
            if seen.len() < self.table.len() {
                seen.resize(self.table.len(), false);
            }
            for &g in &to_global {
                if !std::mem::replace(&mut seen[g as usize], true) {
                    classes += 1;
                }
            }
            st.colors = ids.into_iter().map(|l| to_global[l as usize]).collect();
        }
        classes
    }

    /// One synchronous update of every tracked tuple.
    pub fn refine_step(&mut self) {
        let variant = self.variant;
        let classes = self.assign(|st, idx, k, buf| {
            let s = st.view.size();
            let colors = &st.colors;
            let prev = colors[idx];
            if k == 1 {
                // k = 1 uses the adjacency rule of 1-WL for both variants
                buf.extend([TAG_NEIGHBOR, prev, st.view.nbrs[idx].len() as u32]);
                let start = buf.len();
                buf.extend(st.view.nbrs[idx].iter().map(|&w| colors[w as usize]));
                buf[start..].sort_unstable();
                return;
            }
            let mut pos = [0usize; 16];
            let mut stride = [0usize; 16];
            {
                let mut rest = idx;
                let mut st_ = 1;
                for i in (0..k).rev() {
                    pos[i] = rest % s;
                    rest /= s;
                    stride[i] = st_;
                    st_ *= s;
                }
            }
            match variant {
                Variant::Wl => {
                    buf.extend([TAG_WL, prev, s as u32]);
                    for i in 0..k {
                        let base = idx - pos[i] * stride[i];
                        let start = buf.len();
                        buf.extend((0..s).map(|u| colors[base + u * stride[i]]));
                        buf[start..].sort_unstable();
                    }
                }
                Variant::Fwl => {
                    buf.extend([TAG_FWL, prev, s as u32]);
                    if k == 2 {
                        let (b0, b1) = (idx - pos[0] * stride[0], idx - pos[1] * stride[1]);
                        let mut seqs: Vec<u64> = (0..s)
                            .map(|u| {
                                ((colors[b0 + u * stride[0]] as u64) << 32)
                                    | colors[b1 + u * stride[1]] as u64
                            })
                            .collect();
                        seqs.sort_unstable();
                        for q in seqs {
                            buf.push((q >> 32) as u32);
                            buf.push(q as u32);
                        }
                    } else {
                        let mut flat = Vec::with_capacity(s * k);
                        for u in 0..s {
                            for i in 0..k {
                                flat.push(colors[idx - pos[i] * stride[i] + u * stride[i]]);
                            }
                        }
                        let mut order: Vec<usize> = (0..s).collect();
                        order.sort_unstable_by(|&a, &b| {
                            flat[a * k..(a + 1) * k].cmp(&flat[b * k..(b + 1) * k])
                        });
                        for u in order {
                            buf.extend_from_slice(&flat[u * k..(u + 1) * k]);
                        }
                    }
                }
            }
        });
        self.t += 1;
        // signatures carry the previous color, so classes only split
        self.stable = classes == self.classes;
        self.classes = classes;
        self.history.push(IterationStats { t: self.t, classes });
    }

    /// Refines until the global partition survives one full step unchanged.
    pub fn run_to_stable(&mut self) -> Vec<Coloring> {
        let bound = self.tracked_tuples() + 1;
        while !self.stable {
            assert!(self.t <= bound, "refinement exceeded its termination bound");
            self.refine_step();
        }
        self.colorings()
    }

    /// Snapshot of every unit; graph colors are present only once stable.
    pub fn colorings(&mut self) -> Vec<Coloring> {
        let stable = self.stable;
        let mut out = Vec::with_capacity(self.units.len());
        for i in 0..self.units.len() {
            let gc = stable.then(|| {
                let colors = &self.units[i].colors;
                let mut buf = Vec::new();
                encode_multiset(colors, &mut buf);
                self.table.intern(&buf)
            });
            out.push(Coloring {
                colors: self.units[i].colors.clone(),
                scope: self.units[i].view.scope.clone(),
                stable_graph_color: gc,
            });
        }
        out
    }

    /// Graph color of each unit without cloning tuple colors.
    pub fn unit_graph_colors(&mut self) -> Result<Vec<ColorId>> {
        if !self.stable {
            return Err(Error::State(
                "graph color requested before convergence".into(),
            ));
        }
        let mut buf = Vec::new();
        let mut out = Vec::with_capacity(self.units.len());
        for st in &self.units {
            buf.clear();
            encode_multiset(&st.colors, &mut buf);
            out.push(self.table.intern(&buf));
        }
        Ok(out)
    }
}

pub fn new_session<'g>(
    units: Vec<Unit<'g>>,
    k: usize,
    variant: Variant,
) -> Result<RefinementSession<'g>> {
    RefinementSession::new(units, k, variant)
}

/// Stable graph colors of plain `graphs` under k-WL / k-FWL, refined together.
pub fn stable_graph_colors(graphs: &[Graph], k: usize, variant: Variant) -> Result<Vec<ColorId>> {
    let units = graphs.iter().map(Unit::plain).collect();
    let mut s = RefinementSession::new(units, k, variant)?;
    s.run_to_stable();
    s.unit_graph_colors()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::Graph;
    use crate::klwl::LabeledGraph;

    fn k2() -> Graph {
        Graph::uncolored(2, [(0, 1)]).unwrap()
    }

    fn partition(colors: &[ColorId]) -> Vec<Vec<usize>> {
        let mut map: FxHashMap<ColorId, Vec<usize>> = FxHashMap::default();
        for (i, &c) in colors.iter().enumerate() {
            map.entry(c).or_default().push(i);
        }
        let mut v: Vec<_> = map.into_values().collect();
        v.sort();
        v
    }

    #[test]
    fn iso_type_examples() {
        let g = k2();
        let u = Unit::plain(&g);
        assert_eq!(
            iso_type_signature(&u, &[0, 1]).unwrap(),
            iso_type_signature(&u, &[1, 0]).unwrap()
        );
        let c6 = gen::cycle(6).unwrap();
        let u = Unit::plain(&c6);
        assert_ne!(
            iso_type_signature(&u, &[2, 2]).unwrap(),
            iso_type_signature(&u, &[2, 3]).unwrap()
        );
        let lab = Unit::full(LabeledGraph::new(&c6, vec![0].into()).unwrap());
        assert_ne!(
            iso_type_signature(&lab, &[0, 1]).unwrap(),
            iso_type_signature(&lab, &[2, 3]).unwrap()
        );
        let scoped = Unit::scoped(LabeledGraph::unlabeled(&c6), vec![0, 1]);
        assert!(iso_type_signature(&scoped, &[0, 4]).is_err());
    }

    #[test]
    fn initial_classes() {
        let c3 = gen::cycle(3).unwrap();
        let s = RefinementSession::new(vec![Unit::plain(&c3), Unit::plain(&c3)], 1, Variant::Wl)
            .unwrap();
        assert_eq!(s.class_count(), 1);

        let c6 = gen::cycle(6).unwrap();
        let s = RefinementSession::new(vec![Unit::plain(&c6)], 2, Variant::Wl).unwrap();
        assert_eq!(s.class_count(), 3);
        assert_eq!(s.tracked_tuples(), 36);

        let g = Graph::new(2, [(0, 1)], vec![0, 1]).unwrap();
        let s = RefinementSession::new(vec![Unit::plain(&g)], 1, Variant::Wl).unwrap();
        assert_eq!(s.class_count(), 2);
    }

    #[test]
    fn c6_initial_pairs_match_enumeration() {
        // brute-force classification of all 36 pairs: diagonal / adjacent / other
        let c6 = gen::cycle(6).unwrap();
        let s = RefinementSession::new(vec![Unit::plain(&c6)], 2, Variant::Wl).unwrap();
        let colors = s.unit_colors(0);
        let class = |u: u32, v: u32| {
            if u == v {
                0
            } else if (u + 1) % 6 == v || (v + 1) % 6 == u {
                1
            } else {
                2
            }
        };
        for a in 0..36 {
            for b in 0..36 {
                let (pa, pb) = ((a / 6, a % 6), (b / 6, b % 6));
                assert_eq!(
                    colors[a as usize] == colors[b as usize],
                    class(pa.0, pa.1) == class(pb.0, pb.1)
                );
            }
        }
    }

    #[test]
    fn rejects_bad_sessions() {
        let g = k2();
        assert!(RefinementSession::new(vec![Unit::plain(&g)], 0, Variant::Wl).is_err());
        assert!(RefinementSession::new(vec![], 1, Variant::Wl).is_err());
        let empty = Unit::scoped(LabeledGraph::unlabeled(&g), vec![]);
        assert!(RefinementSession::new(vec![empty], 1, Variant::Wl).is_err());
    }

    #[test]
    fn path_degree_split() {
        let p3 = gen::path(3).unwrap();
        let mut s = RefinementSession::new(vec![Unit::plain(&p3)], 1, Variant::Wl).unwrap();
        s.refine_step();
        let c = s.unit_colors(0);
        assert_eq!(c[0], c[2]);
        assert_ne!(c[0], c[1]);
    }

    #[test]
    fn one_wl_blind_on_c6_vs_two_triangles() {
        let c6 = gen::cycle(6).unwrap();
        let t = gen::cycle(3)
            .unwrap()
            .disjoint_union(&gen::cycle(3).unwrap());
        let mut s = RefinementSession::new(vec![Unit::plain(&c6), Unit::plain(&t)], 1, Variant::Wl)
            .unwrap();
        for _ in 0..4 {
            s.refine_step();
            assert_eq!(s.class_count(), 1);
        }
        let gc = stable_graph_colors(&[c6.clone(), t.clone()], 1, Variant::Wl).unwrap();
        assert_eq!(gc[0], gc[1]);
        let gc = stable_graph_colors(&[c6, t], 2, Variant::Fwl).unwrap();
        assert_ne!(gc[0], gc[1]);
    }

    #[test]
    fn vertex_transitive_stabilizes_after_one_step() {
        let c3 = gen::cycle(3).unwrap();
        let mut s = RefinementSession::new(vec![Unit::plain(&c3)], 1, Variant::Wl).unwrap();
        let col = s.run_to_stable();
        assert_eq!(s.iteration(), 1);
        assert_eq!(s.class_count(), 1);
        assert!(col[0].is_stable());
    }

    #[test]
    fn graph_color_requires_convergence() {
        let g = k2();
        let mut s = RefinementSession::new(vec![Unit::plain(&g)], 1, Variant::Wl).unwrap();
        let c = s.colorings();
        assert!(matches!(graph_color(&c[0]), Err(Error::State(_))));
        assert!(s.unit_graph_colors().is_err());
        let c = s.run_to_stable();
        assert!(graph_color(&c[0]).is_ok());
    }

    #[test]
    fn graph_color_examples() {
        let c3 = gen::cycle(3).unwrap();
        let p = c3.permute(&[2, 0, 1]).unwrap();
        let gc = stable_graph_colors(&[c3, p], 1, Variant::Wl).unwrap();
        assert_eq!(gc[0], gc[1]);
        let gc = stable_graph_colors(&[k2(), Graph::empty(2)], 1, Variant::Wl).unwrap();
        assert_ne!(gc[0], gc[1]);
    }

    #[test]
    fn srg_pair_blind_to_two_fwl() {
        let gc = stable_graph_colors(&[gen::rook4(), gen::shrikhande()], 2, Variant::Fwl).unwrap();
        assert_eq!(gc[0], gc[1]);
    }

    #[test]
    fn partitions_only_split() {
        let g = gen::random_regular(10, 3, 7).unwrap();
        let h = gen::path(6).unwrap();
        for (k, v) in [(1, Variant::Wl), (2, Variant::Wl), (2, Variant::Fwl)] {
            let mut s =
                RefinementSession::new(vec![Unit::plain(&g), Unit::plain(&h)], k, v).unwrap();
            let mut prev: Vec<ColorId> = (0..2).flat_map(|i| s.unit_colors(i).to_vec()).collect();
            while !s.is_stable() {
                s.refine_step();
                let cur: Vec<ColorId> = (0..2).flat_map(|i| s.unit_colors(i).to_vec()).collect();
                for cls in partition(&cur) {
                    assert!(cls.iter().all(|&i| prev[i] == prev[cls[0]]), "class merged");
                }
                prev = cur;
            }
        }
    }

    #[test]
    fn history_dump() {
        let c3 = gen::cycle(3).unwrap();
        let mut s = RefinementSession::new(vec![Unit::plain(&c3)], 1, Variant::Wl).unwrap();
        s.run_to_stable();
        assert_eq!(
            s.history_jsonl(),
            "{\"t\":0,\"classes\":1}\n{\"t\":1,\"classes\":1}\n"
        );
    }

    #[test]
    fn independent_of_thread_count() {
        let g = gen::rook4();
        let h = gen::shrikhande();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let units = (0..4u32)
                    .flat_map(|v| {
                        [
                            Unit::full(LabeledGraph::new(&g, vec![v].into()).unwrap()),
                            Unit::full(LabeledGraph::new(&h, vec![v].into()).unwrap()),
                        ]
                    })
                    .collect();
                let mut s = RefinementSession::new(units, 2, Variant::Wl).unwrap();
                s.run_to_stable();
                (0..8)
                    .map(|i| s.unit_colors(i).to_vec())
                    .collect::<Vec<_>>()
            })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn multiset_encoding_is_order_free() {
        let mut t = ColorTable::new();
        let a = t.intern_multiset(&[3, 1, 3]);
        let b = t.intern_multiset(&[3, 3, 1]);
        let c = t.intern_multiset(&[1, 1, 3]);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
