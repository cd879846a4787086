//! Matrix powers, Green and first-passage series, the critical value and
//! recurrence.
//!
//! Everything is parameterized by `λ = exp(β) > 0`. Truncated series are
//! certified lower bounds since every term is non-negative; upper bounds only
//! appear when a geometric tail ratio is supplied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explore::{backward_walk, ball, forward_walk, Explorer};
use crate::graph::{cyclic_components, GraphSource, NwKind, VertexId};
use crate::scalar::Scalar;

/// Number of leading terms kept in a [`SeriesEstimate`].
pub const PARTIAL_TERMS: usize = 16;

/// Minimum count of trailing non-zero terms for the non-vanishing divergence rule.
const NON_VANISHING_RUN: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Largest series index `N`.
    pub depth: usize,
    /// Entries kept per infinite-emitter row.
    pub row_limit: usize,
    pub tol: f64,
    /// Certified ratio `ρ < 1` bounding the tail geometrically past `depth`.
    pub tail_ratio_bound: Option<f64>,
    /// Partial sums above this, with non-decreasing terms, count as divergent.
    pub divergence_threshold: f64,
    /// Use registered family closed forms for recurrence verdicts.
    pub closed_forms: bool,
    /// Power-iteration budget for finite critical values.
    pub max_iterations: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            depth: 256,
            row_limit: 64,
            tol: 1e-10,
            tail_ratio_bound: None,
            divergence_threshold: 1e12,
            closed_forms: true,
            max_iterations: 200_000,
        }
    }
}

impl TruncationConfig {
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_row_limit(mut self, row_limit: usize) -> Self {
        self.row_limit = row_limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.row_limit == 0 {
            return Err(Error::InvalidParameter("row_limit must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidParameter("tol must be non-negative".into()));
        }
        if let Some(r) = self.tail_ratio_bound {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidParameter("tail_ratio_bound must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_lambda<S: Scalar>(lambda: &S) -> Result<()> {
    if *lambda > S::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")))
    }
}

/// Truncated value of a non-negative series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEstimate<S> {
    /// Partial sum up to the depth: a lower bound of the full series.
    pub lower: S,
    pub upper: Option<S>,
    pub partial_terms: Vec<S>,
    pub converged: bool,
    /// Heuristic divergence flag; never feeds certified bounds.
    pub diverged: bool,
    /// No truncated row was used, so every computed term is exact.
    pub exact_terms: bool,
}

impl<S: Scalar> SeriesEstimate<S> {
    pub fn from_terms(terms: &[S], cfg: &TruncationConfig, exact_terms: bool) -> Self {
        let mut lower = S::zero();
        for t in terms {
            lower += t.clone();
        }
        let last = terms.last().cloned().unwrap_or_else(S::zero);
        let prev = if terms.len() >= 2 { terms[terms.len() - 2].clone() } else { S::zero() };
        let tail_scale = last.clone().max_of(prev);
        let diverged = Self::looks_divergent(terms, &lower, cfg);
        let converged = !diverged && tail_scale.to_f64() <= cfg.tol * lower.to_f64().max(1.0);
        let upper = match cfg.tail_ratio_bound {
            Some(rho) if !diverged => {
                let factor = S::from_f64(rho / (1.0 - rho)).unwrap_or_else(S::zero);
                Some(lower.clone() + tail_scale * factor)
            }
            _ => None,
        };
        SeriesEstimate {
            lower,
            upper,
            partial_terms: terms.iter().take(PARTIAL_TERMS).cloned().collect(),
            converged,
            diverged,
            exact_terms,
        }
    }

    fn looks_divergent(terms: &[S], lower: &S, cfg: &TruncationConfig) -> bool {
        // Float terms that underflow stall at the smallest subnormal; those count as vanished.
        let live = |t: &&S| t.to_f64().abs() >= f64::MIN_POSITIVE;
        let nonzero: Vec<&S> = terms.iter().filter(live).collect();
        if nonzero.len() >= 2 {
            let (a, b) = (nonzero[nonzero.len() - 2], nonzero[nonzero.len() - 1]);
            if lower.to_f64() > cfg.divergence_threshold && b >= a {
                return true;
            }
        }
        // Terms that stop decreasing cannot tend to zero.
        let tail: Vec<&S> = terms[terms.len() / 2..].iter().filter(live).collect();
        tail.len() >= NON_VANISHING_RUN && tail.windows(2).all(|w| w[1] >= w[0])
    }
}

/// `A^n_vw` together with whether truncation could have lowered it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerEntry<S> {
    pub value: S,
    pub exact: bool,
}

/// `A^n_vw` by forward dynamic programming from `v`.
pub fn power_entry<S: Scalar>(
    g: &GraphSource<S>,
    v: &VertexId,
    w: &VertexId,
    n: usize,
    cfg: &TruncationConfig,
) -> Result<PowerEntry<S>> {
    cfg.validate()?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    let src = ex.locate(v)?;
    let target = ex.locate(w)?;
    let mut value = S::zero();
    forward_walk(&mut ex, src, n, &S::one(), None, |step, x, _| {
        if step == n {
            value = x[target].clone();
        }
    })?;
    Ok(PowerEntry { value, exact: !ex.lossy() })
}

/// Terms `t_n = A^n_vw λ^-n` for `n = 0..=depth`, from a forward walk out of `v`.
fn green_terms<S: Scalar>(
    ex: &mut Explorer<'_, S>,
    src: usize,
    target: usize,
    lambda: &S,
    depth: usize,
) -> Result<Vec<S>> {
    let mut terms = Vec::with_capacity(depth + 1);
    forward_walk(ex, src, depth, &lambda.recip(), None, |_, x, _| terms.push(x[target].clone()))?;
    Ok(terms)
}

/// `G(v, w) = Σ_n A^n_vw λ^-n`, truncated at `cfg.depth`.
pub fn green_series<S: Scalar>(
    g: &GraphSource<S>,
    v: &VertexId,
    w: &VertexId,
    lambda: &S,
    cfg: &TruncationConfig,
) -> Result<SeriesEstimate<S>> {
    cfg.validate()?;
    check_lambda(lambda)?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    let src = ex.locate(v)?;
    let target = ex.locate(w)?;
    let terms = green_terms(&mut ex, src, target, lambda, cfg.depth)?;
    Ok(SeriesEstimate::from_terms(&terms, cfg, !ex.lossy()))
}

/// `G(s, w)` for every source `s` at once, by one column propagation towards `w`.
pub fn green_series_to<S: Scalar>(
    g: &GraphSource<S>,
    sources: &[VertexId],
    w: &VertexId,
    lambda: &S,
    cfg: &TruncationConfig,
) -> Result<Vec<SeriesEstimate<S>>> {
    cfg.validate()?;
    check_lambda(lambda)?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    let src: Vec<usize> = sources.iter().map(|s| ex.locate(s)).collect::<Result<_>>()?;
    let target = ex.locate(w)?;
    let region = ball(&mut ex, &src, cfg.depth)?;
    let mut init = vec![S::zero(); ex.len()];
    init[target] = S::one();
    let mut terms: Vec<Vec<S>> = vec![Vec::with_capacity(cfg.depth + 1); src.len()];
    backward_walk(&ex, &region, init, 0, cfg.depth, &lambda.recip(), None, |_, h| {
        for (k, &s) in src.iter().enumerate() {
            terms[k].push(h[s].clone());
        }
    });
    let exact = !ex.lossy();
    Ok(terms.iter().map(|t| SeriesEstimate::from_terms(t, cfg, exact)).collect())
}

/// Truncated Green row `w ↦ Σ_{n ≤ depth} A^n_vw λ^-n` over every vertex reached from `v`.
pub fn green_from<S: Scalar>(
    g: &GraphSource<S>,
    v: &VertexId,
    lambda: &S,
    cfg: &TruncationConfig,
) -> Result<std::collections::BTreeMap<VertexId, S>> {
    cfg.validate()?;
    check_lambda(lambda)?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    let src = ex.locate(v)?;
    let acc = green_row(&mut ex, src, lambda, cfg.depth)?;
    Ok(acc.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (ex.id(i).clone(), x)).collect())
}

pub(crate) fn green_row<S: Scalar>(ex: &mut Explorer<'_, S>, src: usize, lambda: &S, depth: usize) -> Result<Vec<S>> {
    let mut acc: Vec<S> = Vec::new();
    forward_walk(ex, src, depth, &lambda.recip(), None, |_, x, support| {
        if acc.len() < x.len() {
            acc.resize(x.len(), S::zero());
        }
        for &i in support {
            acc[i] += x[i].clone();
        }
    })?;
    acc.resize(ex.len(), S::zero());
    Ok(acc)
}

/// First-passage weight `r_vw(n)`: paths of length `n` from `v` that reach
/// `w` only at their last step.
pub fn first_passage<S: Scalar>(
    g: &GraphSource<S>,
    v: &VertexId,
    w: &VertexId,
    n: usize,
    cfg: &TruncationConfig,
) -> Result<S> {
    Ok(first_passage_terms(g, v, w, n, cfg)?.pop().unwrap_or_else(S::zero))
}

/// `r_vw(0), ..., r_vw(depth)`.
pub fn first_passage_terms<S: Scalar>(
    g: &GraphSource<S>,
    v: &VertexId,
    w: &VertexId,
    depth: usize,
    cfg: &TruncationConfig,
) -> Result<Vec<S>> {
    cfg.validate()?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    let src = ex.locate(v)?;
    let target = ex.locate(w)?;
    let mut terms = Vec::with_capacity(depth + 1);
    forward_walk(&mut ex, src, depth, &S::one(), Some(target), |n, x, _| {
        terms.push(if n == 0 { S::zero() } else { x[target].clone() });
    })?;
    Ok(terms)
}

/// Scaled first-passage terms `r_sw(n) λ^-n`, `n = 0..=depth`, for every source
/// at once (column propagation avoiding `w`).
pub fn first_passage_series_to<S: Scalar>(
    g: &GraphSource<S>,
    sources: &[VertexId],
    w: &VertexId,
    lambda: &S,
    cfg: &TruncationConfig,
) -> Result<Vec<Vec<S>>> {
    cfg.validate()?;
    check_lambda(lambda)?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    let src: Vec<usize> = sources.iter().map(|s| ex.locate(s)).collect::<Result<_>>()?;
    let target = ex.locate(w)?;
    let mut out: Vec<Vec<S>> = vec![vec![S::zero()]; src.len()];
    if cfg.depth == 0 {
        return Ok(out);
    }
    let region = ball(&mut ex, &src, cfg.depth)?;
    let inv = lambda.recip();
    let mut init = vec![S::zero(); ex.len()];
    let reach = cfg.depth - 1;
    for &v in &region.order {
        if region.dist[v] > reach {
            break;
        }
        if let Some((_, a)) = ex.row(v).iter().find(|(u, _)| *u == target) {
            init[v] = a.clone() * inv.clone();
        }
    }
    backward_walk(&ex, &region, init, 1, cfg.depth, &inv, Some(target), |_, h| {
        for (k, &s) in src.iter().enumerate() {
            out[k].push(h[s].clone());
        }
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Beta0Mode {
    Exact,
    Bounds,
}

/// Bounds on `λ₀ = exp(β₀)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beta0Report {
    pub mode: Beta0Mode,
    pub lambda0_lower: f64,
    pub lambda0_upper: f64,
    pub witness_vertex: VertexId,
    pub method: String,
    /// Registered closed form, when the family has one.
    pub closed_form: Option<f64>,
}

impl Beta0Report {
    /// Best point value: the closed form, else the midpoint of the bracket in
    /// exact mode, else the certified lower bound.
    pub fn lambda0(&self) -> f64 {
        match (self.closed_form, self.mode) {
            (Some(c), _) => c,
            (None, Beta0Mode::Exact) => 0.5 * (self.lambda0_lower + self.lambda0_upper),
            (None, Beta0Mode::Bounds) => self.lambda0_lower,
        }
    }

    pub fn beta0(&self) -> f64 {
        self.lambda0().ln()
    }
}

/// Collatz–Wielandt bracket for the spectral radius of a dense non-negative
/// irreducible matrix. Iterates on `M + I`, which is primitive, so periodic
/// components converge too.
pub(crate) fn perron_bracket(m: &[Vec<f64>], tol: f64, max_iterations: usize) -> (f64, f64, Vec<f64>, bool) {
    let k = m.len();
    let mut x = vec![1.0; k];
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..max_iterations.max(1) {
        let y: Vec<f64> = (0..k).map(|i| x[i] + m[i].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()).collect();
        let ratios = y.iter().zip(&x).map(|(a, b)| a / b);
        let (rmin, rmax) = ratios.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
        lo = lo.max(rmin - 1.0);
        hi = hi.min(rmax - 1.0);
        let top = y.iter().cloned().fold(0.0, f64::max);
        x = y.iter().map(|v| v / top).collect();
        if hi - lo <= tol * hi.max(1.0) {
            return (lo.max(0.0), hi, x, true);
        }
    }
    (lo.max(0.0), hi, x, false)
}

/// Critical value `λ₀`: Perron root on NW for finite graphs, diagonal growth
/// bounds for generators.
pub fn beta0_estimate<S: Scalar>(g: &GraphSource<S>, cfg: &TruncationConfig) -> Result<Beta0Report> {
    cfg.validate()?;
    match g {
        GraphSource::Finite(f) => {
            let comps = cyclic_components(f);
            if comps.is_empty() {
                return Err(Error::EmptyNonWandering);
            }
            // the spectral radius of a block-triangular matrix is the max over its blocks
            let (mut lo, mut hi, mut witness) = (0.0f64, 0.0f64, comps[0][0]);
            for comp in &comps {
                let pos = |v: usize| comp.binary_search(&v).ok();
                let mut m = vec![vec![0.0; comp.len()]; comp.len()];
                for (i, &v) in comp.iter().enumerate() {
                    for (t, a) in f.row(v) {
                        if let Some(j) = pos(*t) {
                            m[i][j] = a.to_f64();
                        }
                    }
                }
                let (clo, chi, _, _) = perron_bracket(&m, cfg.tol, cfg.max_iterations);
                lo = lo.max(clo);
                if chi > hi {
                    hi = chi;
                    witness = comp[0];
                }
            }
            hi = hi.max(lo);
            let ok = hi - lo <= cfg.tol * hi.max(1.0);
            Ok(Beta0Report {
                mode: if ok { Beta0Mode::Exact } else { Beta0Mode::Bounds },
                lambda0_lower: lo,
                lambda0_upper: hi,
                witness_vertex: f.vertex(witness).clone(),
                method: format!(
                    "Collatz-Wielandt power iteration on A+I over {} cyclic component(s) of NW",
                    comps.len()
                ),
                closed_form: None,
            })
        }
        GraphSource::Generator(gen) => {
            let meta = gen.metadata();
            if meta.nw_kind == NwKind::Empty {
                return Err(Error::EmptyNonWandering);
            }
            let witness = meta
                .nw_witness
                .clone()
                .ok_or_else(|| Error::InconsistentMetadata("non-empty NW declared without a witness vertex".into()))?;
            let guess = meta.lambda0.filter(|x| *x > 0.0).unwrap_or(1.0);
            let mut ex = Explorer::new(g, cfg.row_limit);
            let src = ex.locate(&witness)?;
            let scale = S::from_f64(1.0 / guess).unwrap_or_else(S::one);
            let mut sup = 0.0f64;
            let mut best_n = 0;
            forward_walk(&mut ex, src, cfg.depth, &scale, None, |n, x, _| {
                if n == 0 {
                    return;
                }
                let scaled = x[src].to_f64();
                if scaled > 0.0 {
                    let root = guess * scaled.powf(1.0 / n as f64);
                    if root > sup {
                        sup = root;
                        best_n = n;
                    }
                }
            })?;
            let closed = if cfg.closed_forms { meta.lambda0 } else { None };
            let upper = closed.unwrap_or(f64::INFINITY).max(sup);
            let exact = upper.is_finite() && upper - sup <= cfg.tol * upper.max(1.0);
            Ok(Beta0Report {
                mode: if exact { Beta0Mode::Exact } else { Beta0Mode::Bounds },
                lambda0_lower: sup,
                lambda0_upper: upper,
                witness_vertex: witness,
                method: match closed {
                    Some(_) => format!(
                        "sup (A^n_vv)^(1/n) over n <= {} (attained at n = {best_n}); registered closed form",
                        cfg.depth
                    ),
                    None => format!("sup (A^n_vv)^(1/n) over n <= {} (attained at n = {best_n})", cfg.depth),
                },
                closed_form: closed,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recurrence {
    Recurrent,
    Transient,
    Unknown,
}

/// Which argument settled a [`RecurrenceVerdict`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceRule {
    /// Finite non-wandering sets are always recurrent.
    FiniteNonWandering,
    /// Registered family closed form for the diagonal series at `λ₀`.
    ClosedForm,
    /// Certified geometric tail bound on the diagonal series.
    CertifiedTail,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceVerdict {
    pub verdict: Recurrence,
    pub rule: RecurrenceRule,
    pub lambda0: f64,
    /// `Σ_{n ≤ depth} A^n_vv λ₀^-n` at the witness, when it was evaluated.
    pub partial_sum: Option<f64>,
    pub evidence: String,
}

/// Recurrent or transient at `λ₀`.
pub fn classify_recurrence<S: Scalar>(g: &GraphSource<S>, cfg: &TruncationConfig) -> Result<RecurrenceVerdict> {
    let report = beta0_estimate(g, cfg)?;
    let lambda0 = report.lambda0();
    let finite_nw = match g {
        GraphSource::Finite(_) => true,
        GraphSource::Generator(gen) => gen.metadata().nw_kind == NwKind::Finite,
    };
    if finite_nw {
        return Ok(RecurrenceVerdict {
            verdict: Recurrence::Recurrent,
            rule: RecurrenceRule::FiniteNonWandering,
            lambda0,
            partial_sum: None,
            evidence: "the non-wandering set is finite".into(),
        });
    }
    let meta = g.metadata().expect("generators carry metadata");
    let lambda =
        S::from_f64(lambda0).ok_or_else(|| Error::Numerical(format!("lambda0 = {lambda0} is not representable")))?;
    let w = &report.witness_vertex;
    let est = green_series(g, w, w, &lambda, cfg)?;
    let partial = est.lower.to_f64();
    let closed = cfg.closed_forms && report.closed_form.is_some();
    let (verdict, rule, evidence) = match (closed, meta.recurrent_at_lambda0, &est.upper) {
        (true, Some(true), _) => (
            Recurrence::Recurrent,
            RecurrenceRule::ClosedForm,
            format!("registered closed form: Σ A^n_{w}{w} λ₀^-n diverges"),
        ),
        (true, Some(false), _) => (
            Recurrence::Transient,
            RecurrenceRule::ClosedForm,
            format!("registered closed form: Σ A^n_{w}{w} λ₀^-n converges"),
        ),
        (_, _, Some(upper)) => (
            Recurrence::Transient,
            RecurrenceRule::CertifiedTail,
            format!("geometric tail bound gives Σ A^n_{w}{w} λ₀^-n ≤ {upper}"),
        ),
        _ => (
            Recurrence::Unknown,
            RecurrenceRule::Undecided,
            format!(
                "partial sum {partial} at depth {} with last terms {:?}; no certificate either way",
                cfg.depth,
                est.partial_terms.iter().rev().take(2).map(|t| t.to_f64()).collect::<Vec<_>>()
            ),
        ),
    };
    Ok(RecurrenceVerdict { verdict, rule, lambda0, partial_sum: Some(partial), evidence })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VereJonesReport<S> {
    /// `|G_N(v,w) − I_vw − Σ_{i+j ≤ N} r_i g_j|`: zero up to rounding at every depth.
    pub residual: S,
    /// `|G_N(v,w) − I_vw − R_N · G_N(w,w)|` with the two sums truncated separately.
    pub naive_residual: S,
    pub green_vw: S,
    pub first_passage_vw: S,
    pub green_ww: S,
}

/// Checks `G(v,w) = I_vw + (Σ_n r_vw(n) λ^-n) G(w,w)` on truncated series.
pub fn vere_jones_residual<S: Scalar>(
    g: &GraphSource<S>,
    v: &VertexId,
    w: &VertexId,
    lambda: &S,
    cfg: &TruncationConfig,
) -> Result<VereJonesReport<S>> {
    cfg.validate()?;
    check_lambda(lambda)?;
    for x in [v, w] {
        g.require(x)?;
        if !in_nonwandering(g, x)? {
            return Err(Error::Precondition(format!("{x} is not in the non-wandering set")));
        }
    }
    let b0 = beta0_estimate(g, cfg)?;
    if lambda.to_f64() <= b0.lambda0_lower {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} does not exceed the critical value {}",
            b0.lambda0_lower
        )));
    }
    let mut ex = Explorer::new(g, cfg.row_limit);
    let (vi, wi) = (ex.locate(v)?, ex.locate(w)?);
    let gvw = green_terms(&mut ex, vi, wi, lambda, cfg.depth)?;
    let gww = green_terms(&mut ex, wi, wi, lambda, cfg.depth)?;
    let inv = lambda.recip();
    let mut scale = S::one();
    let mut r = Vec::with_capacity(cfg.depth + 1);
    forward_walk(&mut ex, vi, cfg.depth, &S::one(), Some(wi), |n, x, _| {
        r.push(if n == 0 { S::zero() } else { x[wi].clone() * scale.clone() });
        scale *= inv.clone();
    })?;
    let sum = |t: &[S]| t.iter().fold(S::zero(), |a, b| a + b.clone());
    let identity = if v == w { S::one() } else { S::zero() };
    let mut cauchy = S::zero();
    for (i, ri) in r.iter().enumerate() {
        if ri.is_zero() {
            continue;
        }
        for gj in &gww[..=cfg.depth - i] {
            cauchy += ri.clone() * gj.clone();
        }
    }
    let (lhs, rs, gs) = (sum(&gvw), sum(&r), sum(&gww));
    Ok(VereJonesReport {
        residual: (lhs.clone() - identity.clone() - cauchy).abs(),
        naive_residual: (lhs.clone() - identity - rs.clone() * gs.clone()).abs(),
        green_vw: lhs,
        first_passage_vw: rs,
        green_ww: gs,
    })
}

fn in_nonwandering<S: Scalar>(g: &GraphSource<S>, v: &VertexId) -> Result<bool> {
    match g {
        GraphSource::Finite(f) => {
            let i = f.index_of(v)?;
            Ok(cyclic_components(f).iter().any(|c| c.binary_search(&i).is_ok()))
        }
        GraphSource::Generator(_) => Ok(g.in_nonwandering(v)?.unwrap_or(true)),
    }
}
