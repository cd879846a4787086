//! Local exploration of a graph source and the dynamic programs over it.
//!
//! Vertices are interned to dense indices on first sight; rows are fetched
//! lazily and truncated to `row_limit` entries (a prefix of the generator's
//! deterministic order).

use std::collections::{HashMap, VecDeque};

use crate::error::Result;
use crate::graph::{GraphSource, VertexId};
use crate::scalar::Scalar;

pub(crate) struct Explorer<'g, S> {
    graph: &'g GraphSource<S>,
    row_limit: usize,
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    rows: Vec<Option<Vec<(usize, S)>>>,
    truncated: Vec<bool>,
    lossy: bool,
}

impl<'g, S: Scalar> Explorer<'g, S> {
    pub fn new(graph: &'g GraphSource<S>, row_limit: usize) -> Self {
        let mut ex = Explorer {
            graph,
            row_limit: row_limit.max(1),
            ids: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
            truncated: Vec::new(),
            lossy: false,
        };
        if let GraphSource::Finite(f) = graph {
            for v in f.vertices() {
                ex.intern(v.clone());
            }
        }
        ex
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.ids[i]
    }

    /// Whether a truncated row has been fetched so far.
    pub fn lossy(&self) -> bool {
        self.lossy
    }

    pub fn truncated(&self, i: usize) -> bool {
        self.truncated[i]
    }

    pub fn lookup(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Index of `v`, checking that the graph contains it.
    pub fn locate(&mut self, v: &VertexId) -> Result<usize> {
        if let Some(i) = self.lookup(v) {
            return Ok(i);
        }
        self.graph.require(v)?;
        Ok(self.intern(v.clone()))
    }

    fn intern(&mut self, v: VertexId) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.ids.len();
        self.index.insert(v.clone(), i);
        self.ids.push(v);
        self.rows.push(None);
        self.truncated.push(false);
        i
    }

    pub fn expand(&mut self, i: usize) -> Result<()> {
        if self.rows[i].is_some() {
            return Ok(());
        }
        let (row, truncated) = match self.graph {
            GraphSource::Finite(f) => {
                // finite tables intern every vertex up front, in table order
                (f.row(i).to_vec(), false)
            }
            GraphSource::Generator(g) => {
                let mut entries: Vec<(VertexId, S)> = g.out_edges(&self.ids[i])?.take(self.row_limit + 1).collect();
                let truncated = entries.len() > self.row_limit;
                entries.truncate(self.row_limit);
                let row = entries.into_iter().map(|(w, a)| (self.intern(w), a)).collect();
                (row, truncated)
            }
        };
        self.lossy |= truncated;
        self.truncated[i] = truncated;
        self.rows[i] = Some(row);
        Ok(())
    }

    /// Row of an expanded vertex.
    pub fn row(&self, i: usize) -> &[(usize, S)] {
        self.rows[i].as_deref().expect("row fetched before use")
    }

    pub fn in_v_infinity(&mut self, i: usize) -> Result<bool> {
        match self.graph {
            GraphSource::Finite(f) => Ok(f.is_sink(i)),
            GraphSource::Generator(g) => {
                if g.metadata().v_infinity.contains(&self.ids[i]) {
                    return Ok(true);
                }
                self.expand(i)?;
                Ok(self.row(i).is_empty())
            }
        }
    }
}

/// Forward propagation of the row vector `δ_src`: `x_{n+1}(w) = scale · Σ_u x_n(u) A_uw`.
///
/// `visit(n, x_n, support)` runs for `n = 0..=steps`. With `absorb = Some(a)`
/// the mass arriving at `a` is reported to `visit` and then removed, which
/// yields first-passage weights at `a`.
pub(crate) fn forward_walk<S: Scalar>(
    ex: &mut Explorer<'_, S>,
    src: usize,
    steps: usize,
    scale: &S,
    absorb: Option<usize>,
    mut visit: impl FnMut(usize, &[S], &[usize]),
) -> Result<()> {
    let mut cur = vec![S::zero(); ex.len()];
    let mut next = vec![S::zero(); ex.len()];
    let mut mark = vec![false; ex.len()];
    cur[src] = S::one();
    let mut active = vec![src];
    visit(0, &cur, &active);
    for n in 1..=steps {
        for &u in &active {
            ex.expand(u)?;
        }
        let len = ex.len();
        cur.resize(len, S::zero());
        next.resize(len, S::zero());
        mark.resize(len, false);
        let mut next_active = Vec::with_capacity(active.len() + 2);
        for &u in &active {
            if cur[u].is_zero() {
                continue;
            }
            let xs = cur[u].clone() * scale.clone();
            for (w, a) in ex.row(u) {
                if !mark[*w] {
                    mark[*w] = true;
                    next_active.push(*w);
                }
                next[*w] += xs.clone() * a.clone();
            }
        }
        for &u in &active {
            cur[u] = S::zero();
        }
        for &w in &next_active {
            mark[w] = false;
        }
        std::mem::swap(&mut cur, &mut next);
        active = next_active;
        visit(n, &cur, &active);
        if let Some(a) = absorb {
            if a < cur.len() {
                cur[a] = S::zero();
            }
        }
        if active.is_empty() {
            // all further terms vanish
            for m in n + 1..=steps {
                visit(m, &cur, &active);
            }
            break;
        }
    }
    Ok(())
}

/// Vertices within forward distance `radius` of the sources, in BFS order.
/// Rows are fetched for every vertex closer than `radius`.
pub(crate) struct Ball {
    pub order: Vec<usize>,
    pub dist: Vec<usize>,
}

pub(crate) fn ball<S: Scalar>(ex: &mut Explorer<'_, S>, sources: &[usize], radius: usize) -> Result<Ball> {
    let mut dist = vec![usize::MAX; ex.len()];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] == usize::MAX {
            dist[s] = 0;
            order.push(s);
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d >= radius {
            continue;
        }
        ex.expand(v)?;
        dist.resize(ex.len(), usize::MAX);
        for (w, _) in ex.row(v) {
            if dist[*w] == usize::MAX {
                dist[*w] = d + 1;
                order.push(*w);
                queue.push_back(*w);
            }
        }
    }
    dist.resize(ex.len(), usize::MAX);
    Ok(Ball { order, dist })
}

/// Column propagation `h_{n+1}(v) = scale · Σ_{u ≠ absorb} A_vu h_n(u)` over a
/// ball of radius `steps`, starting from `h_start = init`.
///
/// A vertex at distance `d` from the sources holds correct values for
/// `n ≤ steps - d`; only those are updated, so the sources are exact for every
/// `n ≤ steps`. `visit(n, h_n)` runs for `n = start..=steps`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward_walk<S: Scalar>(
    ex: &Explorer<'_, S>,
    ball: &Ball,
    init: Vec<S>,
    start: usize,
    steps: usize,
    scale: &S,
    absorb: Option<usize>,
    mut visit: impl FnMut(usize, &[S]),
) {
    let mut cur = init;
    cur.resize(ex.len(), S::zero());
    let mut next = vec![S::zero(); ex.len()];
    visit(start, &cur);
    for n in start..steps {
        let reach = steps - (n + 1);
        for &v in &ball.order {
            if ball.dist[v] > reach {
                break;
            }
            let mut acc = S::zero();
            for (u, a) in ex.row(v) {
                if Some(*u) == absorb {
                    continue;
                }
                let h = &cur[*u];
                if !h.is_zero() {
                    acc += a.clone() * h.clone();
                }
            }
            next[v] = acc * scale.clone();
        }
        std::mem::swap(&mut cur, &mut next);
        visit(n + 1, &cur);
    }
}
