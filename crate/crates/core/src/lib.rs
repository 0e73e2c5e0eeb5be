//! k,l-WL and k,l-FWL: Weisfeiler-Lehman refinement on graphs carrying `l`
//! node labels, with localization, labeled-tuple selection policies, hard
//! instance generators and exact verification oracles.

pub mod count;
pub mod error;
pub mod gen;
pub mod graph;
pub mod klwl;
pub mod refine;
pub mod select;
pub mod suite;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, NodeTuple};
pub use klwl::{kl_color, kl_colors, kl_matrix, KlConfig, LabeledGraph, Pooling};
pub use refine::{ColorId, RefinementSession, Unit, Variant};
pub use select::{ScopePolicy, SelectionPolicy};
