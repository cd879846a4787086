//! Martin kernels, kernel limits along escaping target sequences, emitter
//! extremals, h-transforms and path sampling.
//!
//! The kernel is `K_v(w) = G(v, w) / G(v0, w)`, defined for targets `w`
//! reachable from the base vertex `v0`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explore::Explorer;
use crate::graph::{GraphSource, VertexId};
use crate::harmonic::{check_vector_on, HarmonicVector, VectorKind};
use crate::scalar::Scalar;
use crate::series::{check_lambda, green_from, green_series_to, SeriesEstimate, TruncationConfig};

/// One kernel evaluation `K_v(w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue<S> {
    pub v: VertexId,
    pub w: VertexId,
    /// Ratio of the two truncated Green series.
    pub value: S,
    /// Interval from the series bounds, when both upper bounds exist.
    pub lower: Option<S>,
    pub upper: Option<S>,
    pub numerator: SeriesEstimate<S>,
    pub denominator: SeriesEstimate<S>,
}

fn ratio_of<S: Scalar>(
    v: &VertexId,
    v0: &VertexId,
    w: &VertexId,
    num: &SeriesEstimate<S>,
    den: &SeriesEstimate<S>,
) -> Result<S> {
    if den.diverged || num.diverged {
        return Err(Error::Diverged(format!("Green series towards {w}")));
    }
    if den.lower.is_zero() {
        return Err(Error::Unreachable { base: v0.clone(), target: w.clone() });
    }
    Ok(if v == v0 { S::one() } else { num.lower.clone() / den.lower.clone() })
}

/// `K_v(w) = G(v, w) / G(v0, w)`.
pub fn martin_kernel<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    v0: &VertexId,
    v: &VertexId,
    w: &VertexId,
    cfg: &TruncationConfig,
) -> Result<KernelValue<S>> {
    let mut col = green_series_to(g, &[v0.clone(), v.clone()], w, lambda, cfg)?;
    let num = col.pop().expect("two sources");
    let den = col.pop().expect("two sources");
    let value = ratio_of(v, v0, w, &num, &den)?;
    let (lower, upper) = match (&num.upper, &den.upper) {
        (Some(nu), Some(du)) if v != v0 => (Some(num.lower.clone() / du.clone()), Some(nu.clone() / den.lower.clone())),
        _ if v == v0 => (Some(S::one()), Some(S::one())),
        _ => (None, None),
    };
    Ok(KernelValue { v: v.clone(), w: w.clone(), value, lower, upper, numerator: num, denominator: den })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    Converged,
    Inconclusive,
}

/// Kernels along a target sequence and the resulting limit candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelLimitReport<S> {
    pub sequence: Vec<VertexId>,
    /// `K_v(w_k)` for every window vertex, in sequence order.
    pub trajectories: BTreeMap<VertexId, Vec<S>>,
    pub limit_estimate: HarmonicVector<S>,
    /// `sup_v |K_v(w_K) − K_v(w_{K−1})| / max(1, |K_v(w_K)|)` over the window.
    pub cauchy_gap: f64,
    pub verdict: LimitVerdict,
}

/// Default escaping sequence of a family (`forward` picks the direction).
pub fn family_targets<S: Scalar>(g: &GraphSource<S>, forward: bool, count: usize) -> Result<Vec<VertexId>> {
    match g {
        GraphSource::Generator(gen) => gen.march(forward, count).ok_or_else(|| {
            Error::InvalidParameter(format!("family {} has no default target sequence in that direction", gen.name()))
        }),
        GraphSource::Finite(_) => {
            Err(Error::InvalidParameter("finite graphs have no escaping target sequences".into()))
        }
    }
}

/// Evaluates `K_v(w_k)` on `window` along `targets` and reports the last
/// value as the limit candidate.
///
/// The verdict is `Converged` when the last two evaluations agree to
/// `cfg.tol` (relative) on the window and the limit passes the harmonic
/// check wherever its row is covered by the window.
pub fn kernel_limit<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    v0: &VertexId,
    targets: &[VertexId],
    window: &[VertexId],
    cfg: &TruncationConfig,
) -> Result<KernelLimitReport<S>> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let mut seen = BTreeSet::new();
    for w in targets {
        g.require(w)?;
        if !seen.insert(w) {
            return Err(Error::RepeatedTarget(w.clone()));
        }
    }
    if targets.is_empty() {
        return Err(Error::InvalidParameter("at least one target is needed".into()));
    }
    let mut probe: Vec<VertexId> = window.to_vec();
    if !probe.contains(v0) {
        probe.push(v0.clone());
    }
    probe.sort();
    probe.dedup();
    let base = probe.binary_search(v0).expect("inserted above");

    let mut trajectories: BTreeMap<VertexId, Vec<S>> = probe.iter().map(|v| (v.clone(), Vec::new())).collect();
    for w in targets {
        let col = green_series_to(g, &probe, w, lambda, cfg)?;
        let den = &col[base];
        for (v, num) in probe.iter().zip(&col) {
            let k = ratio_of(v, v0, w, num, den)?;
            trajectories.get_mut(v).expect("probe vertex").push(k);
        }
    }
    let mut gap = 0.0f64;
    if targets.len() >= 2 {
        for t in trajectories.values() {
            let (a, b) = (t[t.len() - 2].to_f64(), t[t.len() - 1].to_f64());
            gap = gap.max((b - a).abs() / b.abs().max(1.0));
        }
    } else {
        gap = f64::INFINITY;
    }
    let values: BTreeMap<VertexId, S> =
        trajectories.iter().map(|(v, t)| (v.clone(), t.last().expect("non-empty").clone())).collect();
    let check = check_vector_on(g, lambda, &values, &probe, cfg.tol.max(S::zero_tolerance().to_f64()), cfg)?;
    let converged = gap <= cfg.tol && check.is_almost_harmonic;
    let kind = match (converged, check.is_harmonic) {
        (false, _) => VectorKind::Candidate,
        (true, true) => VectorKind::Harmonic,
        (true, false) => VectorKind::AlmostHarmonic,
    };
    Ok(KernelLimitReport {
        sequence: targets.to_vec(),
        trajectories,
        limit_estimate: HarmonicVector::new(lambda.clone(), values, kind),
        cauchy_gap: gap,
        verdict: if converged { LimitVerdict::Converged } else { LimitVerdict::Inconclusive },
    })
}

/// The extremal vector `ξ_v = K_v(u)` of an infinite emitter or sink `u`.
///
/// `window` defaults to every vertex of a finite graph and, for generators,
/// to `v0`, `u` and the (truncated) row of `u`.
pub fn emitter_extremal<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    v0: &VertexId,
    u: &VertexId,
    window: Option<&[VertexId]>,
    cfg: &TruncationConfig,
) -> Result<HarmonicVector<S>> {
    check_lambda(lambda)?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    let ui = ex.locate(u)?;
    ex.locate(v0)?;
    if !ex.in_v_infinity(ui)? {
        return Err(Error::NotInVinf(u.clone()));
    }
    let mut probe: BTreeSet<VertexId> = match (g, window) {
        (_, Some(w)) => w.iter().cloned().collect(),
        (GraphSource::Finite(f), None) => f.vertices().iter().cloned().collect(),
        (GraphSource::Generator(_), None) => {
            ex.expand(ui)?;
            ex.row(ui).iter().map(|(w, _)| ex.id(*w).clone()).chain([u.clone()]).collect()
        }
    };
    probe.insert(v0.clone());
    let probe: Vec<VertexId> = probe.into_iter().collect();
    let base = probe.binary_search(v0).expect("inserted above");
    let col = green_series_to(g, &probe, u, lambda, cfg)?;
    let mut values = BTreeMap::new();
    for (v, num) in probe.iter().zip(&col) {
        values.insert(v.clone(), ratio_of(v, v0, u, num, &col[base])?);
    }
    Ok(HarmonicVector::new(lambda.clone(), values, VectorKind::AlmostHarmonic))
}

/// Transition kernel `B_vw = λ^-1 ψ_v^-1 A_vw ψ_w` of a positive harmonic `ψ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticKernel<S> {
    pub lambda: S,
    pub psi: BTreeMap<VertexId, S>,
    /// Rows of every support vertex whose whole row lies in the support.
    pub transitions: BTreeMap<VertexId, Vec<(VertexId, S)>>,
    /// Support vertices with out-neighbors outside the support.
    pub boundary: Vec<VertexId>,
}

impl<S: Scalar> StochasticKernel<S> {
    /// `max_v |Σ_w B_vw − 1|`.
    pub fn max_row_error(&self) -> f64 {
        self.transitions
            .values()
            .map(|row| (row.iter().fold(S::zero(), |a, (_, p)| a + p.clone()) - S::one()).abs().to_f64())
            .fold(0.0, f64::max)
    }
}

/// Builds the h-transform of `psi` and validates every row it can see.
///
/// Floats accept row sums within `1e-12` (relative to nothing: rows are
/// probability vectors); exact scalars need exact equality. A complete row
/// off by more is `NotHarmonic`; a truncated emitter row is `SubStochastic`.
pub fn h_transform<S: Scalar>(
    g: &GraphSource<S>,
    psi: &HarmonicVector<S>,
    cfg: &TruncationConfig,
) -> Result<StochasticKernel<S>> {
    let lambda = &psi.lambda;
    check_lambda(lambda)?;
    if psi.values.is_empty() || psi.is_zero() {
        return Err(Error::Degenerate);
    }
    if let Some((v, _)) = psi.values.iter().find(|(_, x)| x.partial_cmp(&&S::zero()) != Some(Ordering::Greater)) {
        return Err(Error::NegativeValue(v.clone()));
    }
    let tol = S::tolerance_from(1e-12);
    let inv = lambda.recip();
    let mut ex = Explorer::new(g, cfg.row_limit);
    let mut transitions = BTreeMap::new();
    let mut boundary = Vec::new();
    for (v, pv) in &psi.values {
        let i = ex.locate(v)?;
        ex.expand(i)?;
        let scale = inv.clone() / pv.clone();
        let mut row = Vec::with_capacity(ex.row(i).len());
        let mut complete = true;
        for (w, a) in ex.row(i) {
            match psi.values.get(ex.id(*w)) {
                Some(pw) => row.push((ex.id(*w).clone(), scale.clone() * a.clone() * pw.clone())),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            boundary.push(v.clone());
            continue;
        }
        let sum = row.iter().fold(S::zero(), |acc, (_, p)| acc + p.clone());
        if (sum - S::one()).abs() > tol {
            return Err(if ex.truncated(i) { Error::SubStochastic(v.clone()) } else { Error::NotHarmonic(v.clone()) });
        }
        transitions.insert(v.clone(), row);
    }
    Ok(StochasticKernel { lambda: lambda.clone(), psi: psi.values.clone(), transitions, boundary })
}

/// Settings for [`sample_boundary_paths`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub paths: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Relative distance to `ψ` that counts as close.
    pub closeness: f64,
    /// Kernel trajectories are recorded every `stride` steps and at the horizon.
    pub stride: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { paths: 200, horizon: 400, seed: 0, closeness: 0.05, stride: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub index: usize,
    pub vertices: Vec<VertexId>,
    /// `(step, max_v |K_v(x_step) − ψ_v/ψ_{v0}| / (ψ_v/ψ_{v0}))` over the window;
    /// `None` while `x_step` is not reachable from the whole window.
    pub deviations: Vec<(usize, Option<f64>)>,
    pub close_at_horizon: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub v0: VertexId,
    pub window: Vec<VertexId>,
    pub seed: u64,
    pub paths: Vec<PathRecord>,
    /// Share of paths whose final kernel ratios are within `closeness` of `ψ`.
    pub fraction_close: f64,
}

/// Simulates the h-transformed chain from `v0` and follows the kernel ratios
/// `K_v(x_t)` on `window` along each path.
///
/// Path `i` draws from a ChaCha8 stream selected by `(seed, i)`, with the
/// word position fixed by the step, so every path is reproducible on its own.
/// Green series use `cfg.depth` and `cfg.row_limit`.
pub fn sample_boundary_paths<S: Scalar>(
    g: &GraphSource<S>,
    kernel: &StochasticKernel<S>,
    v0: &VertexId,
    window: &[VertexId],
    sample: &SampleConfig,
    cfg: &TruncationConfig,
) -> Result<SampleReport> {
    cfg.validate()?;
    if !kernel.psi.contains_key(v0) {
        return Err(Error::MissingValue(v0.clone()));
    }
    let lambda = &kernel.lambda;
    let mut probe: Vec<VertexId> = window.to_vec();
    probe.sort();
    probe.dedup();
    let psi0 = kernel.psi[v0].to_f64();
    let target: Vec<f64> = probe
        .iter()
        .map(|v| kernel.psi.get(v).map(|x| x.to_f64() / psi0).ok_or_else(|| Error::MissingValue(v.clone())))
        .collect::<Result<_>>()?;
    let base_row = green_from(g, v0, lambda, cfg)?;
    let rows: Vec<BTreeMap<VertexId, S>> =
        probe.iter().map(|v| green_from(g, v, lambda, cfg)).collect::<Result<_>>()?;
    let deviation = |x: &VertexId| -> Option<f64> {
        let den = base_row.get(x)?.to_f64();
        if den <= 0.0 {
            return None;
        }
        let mut worst = 0.0f64;
        for (row, t) in rows.iter().zip(&target) {
            let k = row.get(x).map_or(0.0, |n| n.to_f64()) / den;
            worst = worst.max((k - t).abs() / t);
        }
        Some(worst)
    };
    // Cumulative distributions per row, in f64.
    let cumulative: BTreeMap<&VertexId, Vec<(f64, &VertexId)>> = kernel
        .transitions
        .iter()
        .map(|(v, row)| {
            let mut acc = 0.0;
            let cdf = row
                .iter()
                .map(|(w, p)| {
                    acc += p.to_f64();
                    (acc, w)
                })
                .collect();
            (v, cdf)
        })
        .collect();
    let stride = sample.stride.max(1);
    let mut paths = Vec::with_capacity(sample.paths);
    let mut close = 0usize;
    for index in 0..sample.paths {
        let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
        rng.set_stream(index as u64);
        let mut x = v0.clone();
        let mut vertices = vec![x.clone()];
        let mut deviations = vec![(0, deviation(&x))];
        for step in 1..=sample.horizon {
            let cdf = cumulative.get(&x).ok_or_else(|| Error::LeftDomain(x.clone()))?;
            rng.set_word_pos(2 * step as u128);
            let total = cdf.last().map_or(0.0, |c| c.0);
            let r: f64 = rng.random::<f64>() * total;
            let next =
                cdf.iter().find(|(c, _)| r < *c).or(cdf.last()).ok_or_else(|| Error::SubStochastic(x.clone()))?.1;
            x = next.clone();
            vertices.push(x.clone());
            if step % stride == 0 || step == sample.horizon {
                deviations.push((step, deviation(&x)));
            }
        }
        let close_at_horizon = deviations.last().and_then(|d| d.1).is_some_and(|d| d <= sample.closeness);
        close += close_at_horizon as usize;
        paths.push(PathRecord { index, vertices, deviations, close_at_horizon });
    }
    Ok(SampleReport {
        v0: v0.clone(),
        window: probe,
        seed: sample.seed,
        paths,
        fraction_close: if sample.paths == 0 { 0.0 } else { close as f64 / sample.paths as f64 },
    })
}
