//! Countable weighted digraphs: finite tables and lazy generator families.

mod family;
mod format;
mod scc;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use family::{Builtin, DeclaredMetadata, FamilySpec, NwKind, OutNeighborhood};
pub use format::{parse_graph, GraphDocument, Mode};
pub(crate) use scc::tarjan_scc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Vertex name: a non-empty token without whitespace. Ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VertexId(String);

impl VertexId {
    pub fn new(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidVertex(token));
        }
        Ok(VertexId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<i64> for VertexId {
    fn from(i: i64) -> Self {
        VertexId(i.to_string())
    }
}

impl TryFrom<String> for VertexId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        VertexId::new(s)
    }
}

impl From<VertexId> for String {
    fn from(v: VertexId) -> String {
        v.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Shorthand for building vertex lists in tests and fixtures.
pub fn vertices<I, T>(tokens: I) -> Result<Vec<VertexId>>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    tokens.into_iter().map(VertexId::new).collect()
}

/// Finite weighted digraph. Vertices are kept in lexicographic order and
/// every row is sorted by target.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGraph<S> {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    rows: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> FiniteGraph<S> {
    /// Builds a table from explicit vertices and `(src, dst, weight)` edges.
    /// Edge endpoints are added to the vertex set automatically.
    pub fn new<V, E>(extra_vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = (VertexId, VertexId, S)>,
    {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut set: BTreeSet<VertexId> = extra_vertices.into_iter().collect();
        for (s, d, _) in &edges {
            set.insert(s.clone());
            set.insert(d.clone());
        }
        let vertices: Vec<VertexId> = set.into_iter().collect();
        let index: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut rows: Vec<Vec<(usize, S)>> = vec![Vec::new(); vertices.len()];
        for (s, d, w) in edges {
            if w <= S::zero() {
                return Err(Error::NonPositiveWeight { src: s, dst: d });
            }
            let (si, di) = (index[&s], index[&d]);
            if rows[si].iter().any(|(t, _)| *t == di) {
                return Err(Error::DuplicateEdge { src: s, dst: d });
            }
            rows[si].push((di, w));
        }
        for row in &mut rows {
            row.sort_by_key(|(t, _)| *t);
        }
        Ok(FiniteGraph { vertices, index, rows })
    }

    /// Same graph with weights mapped into another scalar type.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FiniteGraph<T> {
        FiniteGraph {
            vertices: self.vertices.clone(),
            index: self.index.clone(),
            rows: self.rows.iter().map(|row| row.iter().map(|(t, w)| (*t, f(w))).collect()).collect(),
        }
    }
}

impl<S> FiniteGraph<S> {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &VertexId) -> Result<usize> {
        self.index.get(v).copied().ok_or_else(|| Error::UnknownVertex(v.clone()))
    }

    pub fn vertex(&self, i: usize) -> &VertexId {
        &self.vertices[i]
    }

    /// Out-row of vertex `i` as `(target index, weight)`, sorted by target.
    pub fn row(&self, i: usize) -> &[(usize, S)] {
        &self.rows[i]
    }

    pub fn is_sink(&self, i: usize) -> bool {
        self.rows[i].is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.iter().map(|(t, _)| *t).collect()).collect()
    }

    fn indices(&self, set: &[VertexId]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.len()];
        for v in set {
            mask[self.index_of(v)?] = true;
        }
        Ok(mask)
    }

    fn names(&self, mask: &[bool]) -> BTreeSet<VertexId> {
        mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| self.vertices[i].clone()).collect()
    }

    /// Index-level closure used by the public operation and the invariant checks.
    pub(crate) fn closure_mask(&self, seed: &[bool]) -> Vec<bool> {
        let mut inside = seed.to_vec();
        loop {
            let mut changed = false;
            // hereditary sweep
            let mut stack: Vec<usize> = (0..self.len()).filter(|&i| inside[i]).collect();
            while let Some(v) = stack.pop() {
                for (w, _) in &self.rows[v] {
                    if !inside[*w] {
                        inside[*w] = true;
                        changed = true;
                        stack.push(*w);
                    }
                }
            }
            // saturation sweep; sinks are in V_inf and never absorbed
            for v in 0..self.len() {
                if !inside[v] && !self.rows[v].is_empty() && self.rows[v].iter().all(|(w, _)| inside[*w]) {
                    inside[v] = true;
                    changed = true;
                }
            }
            if !changed {
                return inside;
            }
        }
    }
}

/// A graph: finite table or generated family.
#[derive(Clone, Debug)]
pub enum GraphSource<S> {
    Finite(FiniteGraph<S>),
    Generator(Arc<dyn OutNeighborhood<S>>),
}

impl<S: Scalar> GraphSource<S> {
    pub fn family(spec: &FamilySpec) -> Self {
        GraphSource::Generator(Arc::new(spec.build::<S>()))
    }

    pub fn as_finite(&self) -> Option<&FiniteGraph<S>> {
        match self {
            GraphSource::Finite(g) => Some(g),
            GraphSource::Generator(_) => None,
        }
    }

    pub fn metadata(&self) -> Option<&DeclaredMetadata> {
        match self {
            GraphSource::Finite(_) => None,
            GraphSource::Generator(g) => Some(g.metadata()),
        }
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        match self {
            GraphSource::Finite(g) => g.index.contains_key(v),
            GraphSource::Generator(g) => g.contains(v),
        }
    }

    pub fn require(&self, v: &VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v.clone()))
        }
    }

    /// Out-edges of `v` in deterministic order, keeping at most `limit` of them.
    /// Truncation keeps a prefix, so row sums are under-approximated.
    pub fn out_edges(&self, v: &VertexId, limit: Option<usize>) -> Result<Vec<(VertexId, S)>> {
        let limit = limit.unwrap_or(usize::MAX);
        match self {
            GraphSource::Finite(g) => {
                let i = g.index_of(v)?;
                Ok(g.rows[i].iter().take(limit).map(|(t, w)| (g.vertices[*t].clone(), w.clone())).collect())
            }
            GraphSource::Generator(g) => {
                if limit == usize::MAX && g.metadata().v_infinity.contains(v) && !self.is_sink(v)? {
                    return Err(Error::Precondition(format!("{v} emits infinitely many edges; a limit is required")));
                }
                Ok(g.out_edges(v)?.take(limit).collect())
            }
        }
    }

    pub fn is_sink(&self, v: &VertexId) -> Result<bool> {
        match self {
            GraphSource::Finite(g) => Ok(g.is_sink(g.index_of(v)?)),
            GraphSource::Generator(g) => Ok(g.out_edges(v)?.next().is_none()),
        }
    }

    /// Membership in `V_inf` (sinks and infinite emitters).
    pub fn in_v_infinity(&self, v: &VertexId) -> Result<bool> {
        match self {
            GraphSource::Finite(g) => Ok(g.is_sink(g.index_of(v)?)),
            GraphSource::Generator(g) => {
                self.require(v)?;
                Ok(g.metadata().v_infinity.contains(v) || self.is_sink(v)?)
            }
        }
    }

    /// Membership in `NW`, where decidable or declared.
    pub fn in_nonwandering(&self, v: &VertexId) -> Result<Option<bool>> {
        self.require(v)?;
        match self {
            GraphSource::Finite(g) => Ok(Some(nonwandering_set(g).vertices.contains(v))),
            GraphSource::Generator(g) => Ok(g.in_nonwandering(v)),
        }
    }

    /// Default probe window around the base vertex (finite graphs: everything).
    pub fn default_window(&self, radius: usize) -> Option<Vec<VertexId>> {
        match self {
            GraphSource::Finite(g) => Some(g.vertices.clone()),
            GraphSource::Generator(g) => g.window(radius),
        }
    }
}

/// Smallest hereditary and saturated set containing `seed`.
pub fn hereditary_saturated_closure<S>(g: &FiniteGraph<S>, seed: &[VertexId]) -> Result<BTreeSet<VertexId>> {
    let mask = g.indices(seed)?;
    Ok(g.names(&g.closure_mask(&mask)))
}

/// Three-valued verdict; `Declared` echoes trusted generator metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Declared(bool),
    Unknown,
}

impl Verdict {
    pub fn holds(self) -> bool {
        matches!(self, Verdict::Yes | Verdict::Declared(true))
    }
}

pub fn is_cofinal<S: Scalar>(g: &GraphSource<S>) -> Verdict {
    match g {
        GraphSource::Finite(f) => {
            if finite_is_cofinal(f) {
                Verdict::Yes
            } else {
                Verdict::No
            }
        }
        GraphSource::Generator(gen) => Verdict::Declared(gen.metadata().cofinal),
    }
}

pub(crate) fn finite_is_cofinal<S>(g: &FiniteGraph<S>) -> bool {
    (0..g.len()).all(|v| {
        let mut seed = vec![false; g.len()];
        seed[v] = true;
        g.closure_mask(&seed).iter().all(|&b| b)
    })
}

/// Non-wandering set and whether its induced subgraph is strongly connected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonWandering {
    pub vertices: BTreeSet<VertexId>,
    pub strongly_connected: bool,
}

/// Index form: the non-trivial strongly connected components (those
/// containing an edge), each sorted.
pub(crate) fn cyclic_components<S>(g: &FiniteGraph<S>) -> Vec<Vec<usize>> {
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g.adjacency())
        .into_iter()
        .filter(|c| c.len() > 1 || g.rows[c[0]].iter().any(|(t, _)| *t == c[0]))
        .collect();
    comps.sort();
    comps
}

pub fn nonwandering_set<S>(g: &FiniteGraph<S>) -> NonWandering {
    let comps = cyclic_components(g);
    let vertices = comps.iter().flatten().map(|&i| g.vertices[i].clone()).collect();
    NonWandering { vertices, strongly_connected: comps.len() <= 1 }
}

/// Standing-assumption report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub cofinal: Verdict,
    pub sinks: Vec<VertexId>,
    pub infinite_emitters: Vec<VertexId>,
    pub powers_finite: Verdict,
    pub nw_kind: NwKind,
    /// Explicit NW for finite graphs.
    pub nonwandering: Option<Vec<VertexId>>,
    pub notes: Vec<String>,
}

/// Lists sinks and infinite emitters and checks the standing assumptions
/// as far as they are decidable. For generators each declared infinite
/// emitter is probed: its stream must not terminate within `probe_limit`.
pub fn classify_vertices<S: Scalar>(g: &GraphSource<S>, probe_limit: usize) -> Result<AssumptionReport> {
    match g {
        GraphSource::Finite(f) => {
            let sinks: Vec<VertexId> = (0..f.len()).filter(|&i| f.is_sink(i)).map(|i| f.vertices[i].clone()).collect();
            let nw = nonwandering_set(f);
            let cofinal = finite_is_cofinal(f);
            let mut notes = Vec::new();
            if !cofinal {
                notes.push("graph is not cofinal".to_string());
            }
            if !sinks.is_empty() {
                notes.push(format!("{} sink(s) present", sinks.len()));
            }
            if !nw.strongly_connected {
                notes.push("G^NW is not strongly connected".to_string());
            }
            let nw_kind = if nw.vertices.is_empty() { NwKind::Empty } else { NwKind::Finite };
            Ok(AssumptionReport {
                cofinal: if cofinal { Verdict::Yes } else { Verdict::No },
                sinks,
                infinite_emitters: Vec::new(),
                powers_finite: Verdict::Yes,
                nw_kind,
                nonwandering: Some(nw.vertices.into_iter().collect()),
                notes,
            })
        }
        GraphSource::Generator(gen) => {
            let meta = gen.metadata();
            let mut sinks = Vec::new();
            let mut emitters = Vec::new();
            for v in &meta.v_infinity {
                let seen = gen.out_edges(v)?.take(probe_limit.saturating_add(1)).count();
                if seen == 0 {
                    sinks.push(v.clone());
                } else if seen <= probe_limit {
                    return Err(Error::InconsistentMetadata(format!(
                        "declared infinite emitter {v} has only {seen} out-edges"
                    )));
                } else {
                    emitters.push(v.clone());
                }
            }
            if meta.no_sinks && !sinks.is_empty() {
                return Err(Error::InconsistentMetadata("declared no sinks, found one".into()));
            }
            for v in &emitters {
                if gen.in_nonwandering(v) == Some(false) {
                    return Err(Error::InconsistentMetadata(format!("infinite emitter {v} lies outside NW")));
                }
            }
            Ok(AssumptionReport {
                cofinal: Verdict::Declared(meta.cofinal),
                sinks,
                infinite_emitters: emitters,
                powers_finite: Verdict::Declared(meta.powers_finite),
                nw_kind: meta.nw_kind,
                nonwandering: meta.nonwandering.clone(),
                notes: vec![format!("verdicts declared by family `{}`", gen.name())],
            })
        }
    }
}
