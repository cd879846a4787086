//! Riesz decomposition `ψ = φ + k̂`, potentials of charges on `V∞`, and the
//! lattice operations of the solution cone.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{check_vector, HarmonicVector, VectorKind};
use crate::error::{Error, Result};
use crate::explore::Explorer;
use crate::graph::{GraphSource, VertexId};
use crate::scalar::Scalar;
use crate::series::{check_lambda, green_series, green_series_to, TruncationConfig};

/// `ψ = φ + k̂` with `φ` harmonic and `k ≥ 0` supported on `V∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszPair<S> {
    pub lambda: S,
    pub phi: HarmonicVector<S>,
    pub k: BTreeMap<VertexId, S>,
    /// `sup_v |ψ_v − φ_v − k̂_v|` over the support of `φ`.
    pub reconstruction_residual: f64,
    pub iterations: usize,
    /// The last step and its estimated geometric tail fell below `cfg.tol` before the depth cap.
    pub converged: bool,
}

/// Result of [`lattice_meet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePair<S> {
    pub meet: HarmonicVector<S>,
    /// `ξ + μ − meet`.
    pub join: HarmonicVector<S>,
    pub iterations: usize,
    pub converged: bool,
}

/// Iterates `x ↦ λ^-1 A x` starting from `start`, which must be
/// non-increasing under the map. Values stay defined only where the whole
/// (possibly truncated) row is known, so the domain can shrink; iteration
/// stops once it settles, hits `cfg.depth`, or would lose every vertex.
struct Descent<S> {
    values: BTreeMap<VertexId, S>,
    iterations: usize,
    converged: bool,
    /// First iterate, `λ^-1 A start`, on its own domain.
    first: BTreeMap<VertexId, S>,
}

fn descend<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    start: &BTreeMap<VertexId, S>,
    cfg: &TruncationConfig,
) -> Result<Descent<S>> {
    let mut ex = Explorer::new(g, cfg.row_limit);
    let inv = lambda.recip();
    let tol = cfg.tol;
    let mut cur: BTreeMap<VertexId, S> = start.clone();
    let mut first = BTreeMap::new();
    let mut prev_step = 0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.depth {
        let mut next = BTreeMap::new();
        for v in cur.keys() {
            let i = ex.locate(v)?;
            ex.expand(i)?;
            let mut acc = S::zero();
            let mut complete = true;
            for (u, a) in ex.row(i) {
                match cur.get(ex.id(*u)) {
                    Some(x) => acc += a.clone() * x.clone(),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                next.insert(v.clone(), acc * inv.clone());
            }
        }
        if next.is_empty() {
            break;
        }
        let mut step = 0f64;
        for (v, x) in &next {
            let old = &cur[v];
            let scale = 1f64.max(old.to_f64().abs());
            let rise = x.clone() - old.clone();
            let slack = S::zero_tolerance() * S::from_f64(scale).unwrap_or_else(S::one);
            if rise > slack {
                return Err(Error::NonMonotone { vertex: v.clone(), step: iterations + 1 });
            }
            step = step.max(rise.abs().to_f64() / scale);
        }
        // Geometric decay leaves about step·ρ/(1−ρ) still to come; require that below tol too.
        let ratio = if prev_step > 0.0 { step / prev_step } else { 0.0 };
        let settled = step == 0.0 || (step <= tol && ratio < 1.0 && step * ratio / (1.0 - ratio) <= tol);
        prev_step = step;
        iterations += 1;
        if iterations == 1 {
            first = next.clone();
        }
        cur = next;
        if settled {
            converged = true;
            break;
        }
    }
    Ok(Descent { values: cur, iterations, converged, first })
}

fn require_almost_harmonic<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    psi: &BTreeMap<VertexId, S>,
    cfg: &TruncationConfig,
) -> Result<()> {
    let report = check_vector(g, lambda, psi, cfg.tol.max(S::zero_tolerance().to_f64()), cfg)?;
    if let Some((v, _)) = psi.iter().find(|(_, x)| **x < S::zero()) {
        return Err(Error::NegativeValue(v.clone()));
    }
    match report.violations.first() {
        Some(v) => Err(Error::ConstraintViolation(v.clone())),
        None => Ok(()),
    }
}

/// Splits `ψ` into its harmonic part `φ = lim λ^-n A^n ψ` and the charge
/// `k_u = ψ_u − λ^-1 (Aψ)_u` on `V∞`.
pub fn riesz_decompose<S: Scalar>(
    g: &GraphSource<S>,
    psi: &HarmonicVector<S>,
    cfg: &TruncationConfig,
) -> Result<RieszPair<S>> {
    let lambda = &psi.lambda;
    check_lambda(lambda)?;
    cfg.validate()?;
    require_almost_harmonic(g, lambda, &psi.values, cfg)?;
    let descent = descend(g, lambda, &psi.values, cfg)?;

    let mut ex = Explorer::new(g, cfg.row_limit);
    let mut k = BTreeMap::new();
    for (v, x) in &descent.first {
        let i = ex.locate(v)?;
        if ex.in_v_infinity(i)? {
            let charge = psi.values[v].clone() - x.clone();
            k.insert(v.clone(), if charge < S::zero() { S::zero() } else { charge });
        }
    }
    k.retain(|_, x| !x.is_zero());

    let support: Vec<VertexId> = descent.values.keys().cloned().collect();
    let khat = potential_values(g, lambda, &k, &support, cfg)?;
    let residual = support
        .iter()
        .map(|v| {
            let r = psi.values[v].clone() - descent.values[v].clone() - khat[v].clone();
            r.abs().to_f64()
        })
        .fold(0.0, f64::max);
    Ok(RieszPair {
        lambda: lambda.clone(),
        phi: HarmonicVector::new(lambda.clone(), descent.values, VectorKind::Harmonic),
        k,
        reconstruction_residual: residual,
        iterations: descent.iterations,
        converged: descent.converged,
    })
}

/// `k̂_v = Σ_u G(v, u) k_u` over `support`.
fn potential_values<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    k: &BTreeMap<VertexId, S>,
    support: &[VertexId],
    cfg: &TruncationConfig,
) -> Result<BTreeMap<VertexId, S>> {
    let mut out: BTreeMap<VertexId, S> = support.iter().map(|v| (v.clone(), S::zero())).collect();
    if support.is_empty() {
        return Ok(out);
    }
    for (u, ku) in k {
        if ku.is_zero() {
            continue;
        }
        let col = green_series_to(g, support, u, lambda, cfg)?;
        for (v, est) in support.iter().zip(col) {
            if est.diverged {
                return Err(Error::Diverged(format!("G({v}, {u}) at lambda = {lambda}")));
            }
            *out.get_mut(v).expect("support entry") += est.lower * ku.clone();
        }
    }
    Ok(out)
}

/// The potential `k̂_v = Σ_{u ∈ V∞} Σ_n λ^-n A^n_vu k_u`.
///
/// `support` defaults to every vertex of a finite graph; for generators it
/// is the support of `k` together with the (truncated) rows out of it.
pub fn potential_hat<S: Scalar>(
    g: &GraphSource<S>,
    lambda: &S,
    k: &BTreeMap<VertexId, S>,
    support: Option<&[VertexId]>,
    cfg: &TruncationConfig,
) -> Result<HarmonicVector<S>> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let mut ex = Explorer::new(g, cfg.row_limit);
    for (u, x) in k {
        if *x < S::zero() {
            return Err(Error::NegativeValue(u.clone()));
        }
        let i = ex.locate(u)?;
        if !x.is_zero() && !ex.in_v_infinity(i)? {
            return Err(Error::NotInVinf(u.clone()));
        }
    }
    for (u, x) in k {
        if !x.is_zero() {
            // β-summability of the charge: the diagonal Green series must stay bounded.
            let diag = green_series(g, u, u, lambda, cfg)?;
            if diag.diverged {
                return Err(Error::Diverged(format!("G({u}, {u}) at lambda = {lambda}: the charge is not summable")));
            }
        }
    }
    let support: Vec<VertexId> = match (g, support) {
        (_, Some(s)) => s.to_vec(),
        (GraphSource::Finite(f), None) => f.vertices().to_vec(),
        (GraphSource::Generator(_), None) => {
            let mut set: BTreeSet<VertexId> = BTreeSet::new();
            for u in k.keys() {
                set.insert(u.clone());
                let i = ex.locate(u)?;
                ex.expand(i)?;
                set.extend(ex.row(i).iter().map(|(w, _)| ex.id(*w).clone()));
            }
            set.into_iter().collect()
        }
    };
    let values = potential_values(g, lambda, k, &support, cfg)?;
    Ok(HarmonicVector::new(lambda.clone(), values, VectorKind::AlmostHarmonic))
}

/// Greatest lower bound `ξ ∧ μ` in the solution cone, and the join `ξ + μ − ξ ∧ μ`.
///
/// Both inputs are Riesz-decomposed. The harmonic parts meet through
/// `lim λ^-n A^n min(φ_ξ, φ_μ)`; the charges meet pointwise and contribute
/// their potential. For harmonic inputs this is the plain iterate limit of
/// the pointwise minimum.
pub fn lattice_meet<S: Scalar>(
    g: &GraphSource<S>,
    xi: &HarmonicVector<S>,
    mu: &HarmonicVector<S>,
    cfg: &TruncationConfig,
) -> Result<LatticePair<S>> {
    if xi.lambda != mu.lambda {
        return Err(Error::InvalidParameter("both vectors need the same lambda".into()));
    }
    let lambda = &xi.lambda;
    let a = riesz_decompose(g, xi, cfg)?;
    let b = riesz_decompose(g, mu, cfg)?;
    let floor: BTreeMap<VertexId, S> = a
        .phi
        .values
        .iter()
        .filter_map(|(v, x)| b.phi.values.get(v).map(|y| (v.clone(), x.clone().min_of(y.clone()))))
        .collect();
    let descent = if floor.values().all(|x| x.is_zero()) {
        Descent { values: floor, iterations: 0, converged: true, first: BTreeMap::new() }
    } else {
        descend(g, lambda, &floor, cfg)?
    };
    let charge: BTreeMap<VertexId, S> =
        a.k.iter()
            .filter_map(|(u, x)| b.k.get(u).map(|y| (u.clone(), x.clone().min_of(y.clone()))))
            .filter(|(_, x)| !x.is_zero())
            .collect();
    let support: Vec<VertexId> = descent.values.keys().cloned().collect();
    let khat = potential_values(g, lambda, &charge, &support, cfg)?;
    let meet: BTreeMap<VertexId, S> =
        support.iter().map(|v| (v.clone(), descent.values[v].clone() + khat[v].clone())).collect();
    let join: BTreeMap<VertexId, S> =
        support.iter().map(|v| (v.clone(), xi.values[v].clone() + mu.values[v].clone() - meet[v].clone())).collect();
    let kind = if charge.is_empty() { VectorKind::Harmonic } else { VectorKind::AlmostHarmonic };
    Ok(LatticePair {
        meet: HarmonicVector::new(lambda.clone(), meet, kind),
        join: HarmonicVector::new(lambda.clone(), join, VectorKind::AlmostHarmonic),
        iterations: descent.iterations,
        converged: descent.converged,
    })
}
