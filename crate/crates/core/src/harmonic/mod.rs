//! Almost λ-harmonic vectors: validation, finite cones, extensions, the
//! recurrent construction, Riesz decomposition and lattice operations.
//!
//! A non-negative `ξ` is almost λ-harmonic when `Σ_w A_vw ξ_w = λ ξ_v` for
//! every `v ∉ V∞` and `Σ_w A_vw ξ_w ≤ λ ξ_v` on `V∞` (sinks and infinite
//! emitters). It is harmonic when equality holds everywhere.

mod cone;
mod riesz;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explore::{forward_walk, Explorer};
use crate::graph::{cyclic_components, FiniteGraph, GraphSource, VertexId};
use crate::scalar::Scalar;
use crate::series::{
    beta0_estimate, check_lambda, classify_recurrence, first_passage_series_to, Beta0Report, Recurrence,
    TruncationConfig,
};

pub use cone::{nullspace, solve_finite, ConeDescription, PointLabel};
pub use riesz::{lattice_meet, potential_hat, riesz_decompose, LatticePair, RieszPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorKind {
    AlmostHarmonic,
    Harmonic,
    /// Produced by a truncated construction whose own diagnostic did not settle.
    Candidate,
}

/// A vector over an explored support, tagged with its `λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicVector<S> {
    pub lambda: S,
    pub values: BTreeMap<VertexId, S>,
    pub kind: VectorKind,
}

impl<S: Scalar> HarmonicVector<S> {
    pub fn new(lambda: S, values: BTreeMap<VertexId, S>, kind: VectorKind) -> Self {
        HarmonicVector { lambda, values, kind }
    }

    pub fn get(&self, v: &VertexId) -> Option<&S> {
        self.values.get(v)
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|x| x.is_zero())
    }

    pub fn min_value(&self) -> Option<S> {
        self.values.values().cloned().reduce(S::min_of)
    }

    /// Rescaled so that the entry at `v0` is one.
    pub fn normalized_at(&self, v0: &VertexId) -> Result<Self> {
        let base = self.values.get(v0).ok_or_else(|| Error::MissingValue(v0.clone()))?;
        if base.partial_cmp(&S::zero()) != Some(Ordering::Greater) {
            return Err(Error::Degenerate);
        }
        let inv = base.recip();
        let values = self.values.iter().map(|(k, x)| (k.clone(), x.clone() * inv.clone())).collect();
        Ok(HarmonicVector { lambda: self.lambda.clone(), values, kind: self.kind })
    }

    /// Largest relative entrywise difference on the common support.
    pub fn max_relative_gap(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .filter_map(|(k, a)| other.values.get(k).map(|b| (a.to_f64(), b.to_f64())))
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Outcome of [`check_vector`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport<S> {
    pub is_almost_harmonic: bool,
    pub is_harmonic: bool,
    /// Every probed entry is strictly positive.
    pub positivity_ok: bool,
    /// `Σ_w A_vw ξ_w − λ ξ_v` per probed vertex.
    pub residuals: BTreeMap<VertexId, S>,
    /// Probed vertices whose constraint fails.
    pub violations: Vec<VertexId>,
    /// Vertices of `V∞` with strict slack.
    pub slack: Vec<VertexId>,
    /// Vertices with values whose rows leave the support; not checked.
    pub unprobed: Vec<VertexId>,
}

/// Checks the defining relations on every vertex of `xi` whose row is covered
/// by the support. Finite graphs need a value at every vertex.
pub fn check_vector<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    xi: &BTreeMap<VertexId, S>,
    tol: f64,
    cfg: &TruncationConfig,
) -> Result<CheckReport<S>> {
    if let GraphSource::Finite(f) = g {
        if let Some(v) = f.vertices().iter().find(|v| !xi.contains_key(*v)) {
            return Err(Error::MissingValue(v.clone()));
        }
    }
    let probe: Vec<VertexId> = xi.keys().cloned().collect();
    check_vector_on(g, lambda, xi, &probe, tol, cfg)
}

/// [`check_vector`] restricted to the vertices in `probe`.
pub fn check_vector_on<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    xi: &BTreeMap<VertexId, S>,
    probe: &[VertexId],
    tol: f64,
    cfg: &TruncationConfig,
) -> Result<CheckReport<S>> {
    check_lambda(lambda)?;
    cfg.validate()?;
    if xi.values().all(|x| x.is_zero()) {
        return Err(Error::Degenerate);
    }
    let finite = matches!(g, GraphSource::Finite(_));
    let tol = S::tolerance_from(tol);
    let mut ex = Explorer::new(g, cfg.row_limit);
    let mut report = CheckReport {
        is_almost_harmonic: xi.values().all(|x| *x >= S::zero()),
        is_harmonic: true,
        positivity_ok: true,
        residuals: BTreeMap::new(),
        violations: Vec::new(),
        slack: Vec::new(),
        unprobed: Vec::new(),
    };
    for v in probe {
        let xv = xi.get(v).ok_or_else(|| Error::MissingValue(v.clone()))?;
        if xv.partial_cmp(&S::zero()) != Some(Ordering::Greater) {
            report.positivity_ok = false;
        }
        let i = ex.locate(v)?;
        let in_vinf = ex.in_v_infinity(i)?;
        ex.expand(i)?;
        let mut lhs = S::zero();
        let mut missing = None;
        for (u, a) in ex.row(i) {
            match xi.get(ex.id(*u)) {
                Some(x) => lhs += a.clone() * x.clone(),
                None => missing = Some(ex.id(*u).clone()),
            }
        }
        if let Some(u) = missing {
            if finite {
                return Err(Error::MissingValue(u));
            }
            // A partial row still bounds Aξ from below, which is all V∞ needs.
            if !in_vinf {
                report.unprobed.push(v.clone());
                continue;
            }
        }
        let rhs = lambda.clone() * xv.clone();
        let scale = S::one().max_of(rhs.clone().abs());
        let allowed = tol.clone() * scale;
        let residual = lhs - rhs;
        let over = residual > allowed;
        let under = residual < -allowed.clone();
        if over || (under && !in_vinf) {
            report.violations.push(v.clone());
        }
        if under && in_vinf {
            report.slack.push(v.clone());
        }
        report.residuals.insert(v.clone(), residual);
    }
    report.is_almost_harmonic &= report.violations.is_empty();
    report.is_harmonic = report.is_almost_harmonic && report.slack.is_empty();
    Ok(report)
}

/// Evidence that no almost λ-harmonic vector exists: `(A^n_vv)^{1/n} > λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoSolutionCertificate {
    pub witness_vertex: VertexId,
    pub exponent: usize,
    pub value: f64,
    pub lambda: f64,
}

/// Searches `n ≤ cfg.depth` and non-wandering probe vertices for
/// `A^n_vv > λ^n`; `None` when nothing is found.
pub fn certify_no_solution<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    cfg: &TruncationConfig,
) -> Result<Option<NoSolutionCertificate>> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let probes: Vec<VertexId> = match g {
        GraphSource::Finite(f) => {
            let mut nw: Vec<usize> = cyclic_components(f).into_iter().flatten().collect();
            nw.sort_unstable();
            nw.into_iter().map(|i| f.vertex(i).clone()).collect()
        }
        GraphSource::Generator(gen) => gen.metadata().nw_witness.clone().into_iter().collect(),
    };
    // Floats need a margin so rounding alone never produces a witness.
    let margin = S::one() + S::zero_tolerance();
    let inv = lambda.recip();
    let mut best: Option<(usize, VertexId, S)> = None;
    for v in probes {
        let mut ex = Explorer::new(g, cfg.row_limit);
        let i = ex.locate(&v)?;
        let mut found: Option<(usize, S)> = None;
        forward_walk(&mut ex, i, cfg.depth, &inv, None, |n, x, _| {
            if n > 0 && found.is_none() && x[i] > margin {
                found = Some((n, x[i].clone()));
            }
        })?;
        if let Some((n, ratio)) = found {
            if best.as_ref().is_none_or(|(m, _, _)| n < *m) {
                best = Some((n, v, ratio));
            }
        }
    }
    Ok(best.map(|(n, v, ratio)| NoSolutionCertificate {
        witness_vertex: v,
        exponent: n,
        // (A^n_vv)^{1/n} = λ (A^n_vv λ^-n)^{1/n}
        value: lambda.to_f64() * ratio.to_f64().powf(1.0 / n as f64),
        lambda: lambda.to_f64(),
    }))
}

/// Order in which [`extend_from_hereditary`] adjoins ready vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    #[default]
    Queue,
    Stack,
}

/// Extends `eta`, given on a hereditary set `H`, by the saturation sweep:
/// a vertex outside `V∞` whose out-neighbors all carry values gets
/// `ξ_v = λ^-1 Σ_w A_vw ξ_w`.
///
/// Finite graphs sweep every vertex; generators sweep `horizon` (default: the
/// family window of radius 16).
pub fn extend_from_hereditary<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    eta: &BTreeMap<VertexId, S>,
    horizon: Option<&[VertexId]>,
    order: SweepOrder,
    cfg: &TruncationConfig,
) -> Result<HarmonicVector<S>> {
    check_lambda(lambda)?;
    if eta.is_empty() {
        return Err(Error::Precondition("the hereditary set must be non-empty".into()));
    }
    let mut ex = Explorer::new(g, cfg.row_limit);
    for v in eta.keys() {
        let i = ex.locate(v)?;
        ex.expand(i)?;
        if ex.truncated(i) || ex.row(i).iter().any(|(u, _)| !eta.contains_key(ex.id(*u))) {
            return Err(Error::NotHereditary(v.clone()));
        }
    }
    if let Some((v, _)) = eta.iter().find(|(_, x)| **x < S::zero()) {
        return Err(Error::NegativeValue(v.clone()));
    }
    let keys: Vec<VertexId> = eta.keys().cloned().collect();
    let report = check_vector_on(g, lambda, eta, &keys, cfg.tol, cfg)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::ConstraintViolation(v.clone()));
    }

    let candidates: Vec<VertexId> = match (g, horizon) {
        (_, Some(h)) => h.to_vec(),
        (GraphSource::Finite(f), None) => f.vertices().to_vec(),
        (GraphSource::Generator(_), None) => g.default_window(16).unwrap_or_default(),
    };
    let mut value: Vec<Option<S>> = Vec::new();
    for (v, x) in eta {
        let i = ex.locate(v)?;
        grow(&mut value, ex.len());
        value[i] = Some(x.clone());
    }
    let mut pending: BTreeMap<usize, usize> = BTreeMap::new();
    let mut preds: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in &candidates {
        let i = ex.locate(v)?;
        grow(&mut value, ex.len());
        if value[i].is_some() || pending.contains_key(&i) || ex.in_v_infinity(i)? {
            continue;
        }
        ex.expand(i)?;
        if ex.truncated(i) {
            continue;
        }
        grow(&mut value, ex.len());
        let open: BTreeSet<usize> = ex.row(i).iter().map(|(u, _)| *u).filter(|u| value[*u].is_none()).collect();
        for &u in &open {
            preds.entry(u).or_default().push(i);
        }
        pending.insert(i, open.len());
    }
    let mut ready: VecDeque<usize> = {
        let mut r: Vec<usize> = pending.iter().filter(|(_, c)| **c == 0).map(|(i, _)| *i).collect();
        r.sort_by(|a, b| ex.id(*a).cmp(ex.id(*b)));
        r.into()
    };
    let inv = lambda.recip();
    loop {
        let next = match order {
            SweepOrder::Queue => ready.pop_front(),
            SweepOrder::Stack => ready.pop_back(),
        };
        let Some(i) = next else { break };
        let mut acc = S::zero();
        for (u, a) in ex.row(i) {
            acc += a.clone() * value[*u].clone().expect("ready vertices have valued neighbors");
        }
        value[i] = Some(acc * inv.clone());
        for p in preds.remove(&i).unwrap_or_default() {
            let c = pending.get_mut(&p).expect("predecessors are pending");
            *c -= 1;
            if *c == 0 {
                ready.push_back(p);
            }
        }
    }
    let values = value.into_iter().enumerate().filter_map(|(i, x)| x.map(|x| (ex.id(i).clone(), x))).collect();
    Ok(HarmonicVector::new(lambda.clone(), values, VectorKind::AlmostHarmonic))
}

fn grow<T: Clone>(v: &mut Vec<Option<T>>, len: usize) {
    if v.len() < len {
        v.resize(len, None);
    }
}

/// Output of [`recurrent_harmonic`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrentHarmonic<S> {
    pub vector: HarmonicVector<S>,
    pub lambda0: S,
    /// `Σ_{n ≤ depth} r_ww(n) λ₀^-n`, which tends to one.
    pub normalization: S,
    pub normalization_converged: bool,
}

/// The λ₀-harmonic vector `ξ_v = Σ_{n ≥ 1} r_vw(n) λ₀^-n` of a recurrent
/// matrix, truncated at `cfg.depth` and pinned to `ξ_w = 1`.
///
/// `window` defaults to every vertex of a finite graph and to the family
/// window of radius 10 for generators.
pub fn recurrent_harmonic<S: Scalar>(
    g: &GraphSource<S>,
    w: &VertexId,
    window: Option<&[VertexId]>,
    cfg: &TruncationConfig,
) -> Result<RecurrentHarmonic<S>> {
    g.require(w)?;
    let verdict = classify_recurrence(g, cfg)?;
    if verdict.verdict != Recurrence::Recurrent {
        return Err(Error::Precondition(format!("the matrix is not known to be recurrent ({})", verdict.evidence)));
    }
    let in_nw = match g {
        GraphSource::Finite(f) => {
            let i = f.index_of(w)?;
            cyclic_components(f).iter().any(|c| c.binary_search(&i).is_ok())
        }
        GraphSource::Generator(_) => g.in_nonwandering(w)?.unwrap_or(true),
    };
    if !in_nw {
        return Err(Error::Precondition(format!("{w} is not in the non-wandering set")));
    }
    let lambda0 = critical_lambda(g, &beta0_estimate(g, cfg)?)?;
    let mut sources: Vec<VertexId> = match (g, window) {
        (_, Some(win)) => win.to_vec(),
        (GraphSource::Finite(f), None) => f.vertices().to_vec(),
        (GraphSource::Generator(_), None) => g.default_window(10).unwrap_or_default(),
    };
    if !sources.contains(w) {
        sources.push(w.clone());
    }
    sources.sort();
    sources.dedup();
    let terms = first_passage_series_to(g, &sources, w, &lambda0, cfg)?;
    let mut values = BTreeMap::new();
    let mut normalization = S::zero();
    for (v, t) in sources.iter().zip(&terms) {
        let sum = t.iter().fold(S::zero(), |a, b| a + b.clone());
        if v == w {
            normalization = sum;
            values.insert(v.clone(), S::one());
        } else {
            values.insert(v.clone(), sum);
        }
    }
    let gap = (normalization.clone() - S::one()).abs().to_f64();
    let normalization_converged = gap <= cfg.tol;
    let kind = if normalization_converged { VectorKind::Harmonic } else { VectorKind::Candidate };
    Ok(RecurrentHarmonic {
        vector: HarmonicVector::new(lambda0.clone(), values, kind),
        lambda0,
        normalization,
        normalization_converged,
    })
}

/// `λ₀` as a scalar. In exact mode on finite graphs a nearby small-denominator
/// rational is used when it is an exact eigenvalue of the non-wandering block.
pub(crate) fn critical_lambda<S: Scalar>(g: &GraphSource<S>, report: &Beta0Report) -> Result<S> {
    if let Some(lambda) = exact_lambda0(g, report) {
        return Ok(lambda);
    }
    let approx = report.lambda0();
    S::from_f64(approx).ok_or_else(|| Error::Numerical(format!("lambda0 = {approx} is not representable")))
}

/// The critical value as an exact rational eigenvalue of a non-wandering
/// block, when exact arithmetic on a finite graph finds one near the bracket.
pub fn exact_lambda0<S: Scalar>(g: &GraphSource<S>, report: &Beta0Report) -> Option<S> {
    let GraphSource::Finite(f) = g else { return None };
    if !S::EXACT {
        return None;
    }
    convergents(report.lambda0(), 1_000_000)
        .into_iter()
        .map(|c| S::from_rational(&c))
        .find(|lambda| is_nw_eigenvalue(f, lambda))
}

fn is_nw_eigenvalue<S: Scalar>(f: &FiniteGraph<S>, lambda: &S) -> bool {
    cyclic_components(f).iter().any(|comp| {
        let rows: Vec<Vec<S>> = comp
            .iter()
            .map(|&v| {
                let mut row = vec![S::zero(); comp.len()];
                for (u, a) in f.row(v) {
                    if let Ok(j) = comp.binary_search(u) {
                        row[j] = a.clone();
                    }
                }
                let i = comp.binary_search(&v).expect("member");
                row[i] -= lambda.clone();
                row
            })
            .collect();
        !nullspace(&rows, comp.len()).is_empty()
    })
}

/// Continued-fraction convergents of `x` with denominators up to `max_den`.
fn convergents(x: f64, max_den: i64) -> Vec<BigRational> {
    let mut out = Vec::new();
    if !x.is_finite() || x <= 0.0 {
        return out;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a.saturating_mul(h1).saturating_add(h0), a.saturating_mul(k1).saturating_add(k0));
        if k2 > max_den || k2 <= 0 {
            break;
        }
        out.push(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

#[cfg(test)]
mod tests;
