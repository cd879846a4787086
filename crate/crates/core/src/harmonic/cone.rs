//! Extreme points of the normalized solution polytope of a finite graph.
//!
//! Solutions form the cone `{ξ ≥ 0 : (Aξ)_v = λξ_v for non-sinks}`; sink
//! rows are empty, so their inequality reduces to `ξ_s ≥ 0`. The equalities
//! are eliminated through a null-space basis `N`, and the extreme rays of
//! `{y : N y ≥ 0}` come from the double description method.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_vector, HarmonicVector, VectorKind};
use crate::error::Result;
use crate::graph::{FiniteGraph, GraphSource, VertexId};
use crate::scalar::Scalar;
use crate::series::{check_lambda, TruncationConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "vertex", rename_all = "snake_case")]
pub enum PointLabel {
    /// Equality at every vertex.
    Harmonic,
    /// Strict slack exactly at one infinite emitter.
    Emitter(VertexId),
    /// Strict slack exactly at one sink.
    Sink(VertexId),
    /// Slack at several vertices.
    Unclassified,
}

/// Extreme points of `{ξ almost λ-harmonic : ξ_{v0} = 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeDescription<S> {
    pub base_vertex: VertexId,
    pub lambda: S,
    /// Sorted lexicographically by value vector in vertex order.
    pub extreme_points: Vec<HarmonicVector<S>>,
    pub labels: Vec<PointLabel>,
    /// Extreme rays vanishing at `v0` (only on non-cofinal graphs).
    pub recession_rays: Vec<BTreeMap<VertexId, S>>,
}

impl<S> ConeDescription<S> {
    pub fn is_empty(&self) -> bool {
        self.extreme_points.is_empty()
    }
}

/// Basis of `{x : rows · x = 0}` by Gauss–Jordan elimination. Floats treat
/// pivots below `zero_tolerance` (relative to the largest entry) as zero.
pub fn nullspace<S: Scalar>(rows: &[Vec<S>], ncols: usize) -> Vec<Vec<S>> {
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let scale = m.iter().flatten().map(|x| x.abs()).fold(S::zero(), S::max_of);
    let eps = S::zero_tolerance() * S::one().max_of(scale);
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len())
            .filter(|&i| m[i][c].abs() > eps)
            .max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap_or(Ordering::Equal))
        else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv.clone();
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f.clone() * p.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![S::zero(); ncols];
            x[f] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -m[row][f].clone();
            }
            x
        })
        .collect()
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn combine<S: Scalar>(a: &S, x: &[S], b: &S, y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(p, q)| a.clone() * p.clone() + b.clone() * q.clone()).collect()
}

/// Rescales floats to unit max-norm; exact rays are left alone.
fn tidy<S: Scalar>(mut x: Vec<S>) -> Vec<S> {
    if !S::EXACT {
        let m = x.iter().map(|v| v.abs()).fold(S::zero(), S::max_of);
        if m > S::zero() {
            let inv = m.recip();
            for v in x.iter_mut() {
                *v *= inv.clone();
            }
        }
    }
    x
}

struct Ray<S> {
    y: Vec<S>,
    /// Indices of processed inequalities tight at this ray.
    tight: Vec<usize>,
}

/// Extreme rays of `{y ∈ R^d : h_i · y ≥ 0 for all i}`, assuming the cone is
/// pointed once every inequality is in.
fn extreme_rays<S: Scalar>(halfspaces: &[Vec<S>], d: usize) -> Vec<Vec<S>> {
    let eps = S::zero_tolerance();
    let sign = |x: &S| -> Ordering {
        if *x > eps {
            Ordering::Greater
        } else if *x < -eps.clone() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    };
    let mut lineality: Vec<Vec<S>> = (0..d)
        .map(|i| {
            let mut e = vec![S::zero(); d];
            e[i] = S::one();
            e
        })
        .collect();
    let mut rays: Vec<Ray<S>> = Vec::new();
    for (k, h) in halfspaces.iter().enumerate() {
        let values: Vec<S> = lineality.iter().map(|l| dot(h, l)).collect();
        if let Some(p) = (0..lineality.len()).find(|&i| sign(&values[i]) != Ordering::Equal) {
            // The hyperplane cuts the lineality space: one direction becomes a ray.
            let mut l = lineality.swap_remove(p);
            let mut hl = values[p].clone();
            if hl < S::zero() {
                l = l.into_iter().map(|x| -x).collect();
                hl = -hl;
            }
            let rest: Vec<Vec<S>> = lineality
                .iter()
                .map(|m| {
                    let hm = dot(h, m);
                    tidy(combine(&S::one(), m, &(-hm / hl.clone()), &l))
                })
                .collect();
            lineality = rest;
            for r in rays.iter_mut() {
                let hr = dot(h, &r.y);
                r.y = tidy(combine(&S::one(), &r.y, &(-hr / hl.clone()), &l));
                r.tight.push(k);
            }
            rays.push(Ray { y: tidy(l), tight: (0..k).collect() });
            continue;
        }
        let vals: Vec<S> = rays.iter().map(|r| dot(h, &r.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| sign(&vals[i]) == Ordering::Greater).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| sign(&vals[i]) == Ordering::Less).collect();
        if neg.is_empty() {
            for (i, r) in rays.iter_mut().enumerate() {
                if sign(&vals[i]) == Ordering::Equal {
                    r.tight.push(k);
                }
            }
            continue;
        }
        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<usize> = rays[p].tight.iter().copied().filter(|t| rays[n].tight.contains(t)).collect();
                let adjacent = (0..rays.len())
                    .filter(|&o| o != p && o != n)
                    .all(|o| !common.iter().all(|t| rays[o].tight.contains(t)));
                if adjacent {
                    let y = tidy(combine(&vals[p], &rays[n].y, &(-vals[n].clone()), &rays[p].y));
                    let mut tight = common;
                    tight.push(k);
                    fresh.push(Ray { y, tight });
                }
            }
        }
        let mut kept = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            match sign(&vals[i]) {
                Ordering::Less => {}
                Ordering::Equal => {
                    r.tight.push(k);
                    kept.push(r);
                }
                Ordering::Greater => kept.push(r),
            }
        }
        kept.extend(fresh);
        rays = kept;
    }
    debug_assert!(lineality.is_empty(), "the cone should be pointed");
    rays.into_iter().map(|r| r.y).collect()
}

/// Extreme points of the normalized solution set at `λ`, base vertex `v0`.
/// An empty list means no solution is positive at `v0`.
pub fn solve_finite<S: Scalar>(g: &FiniteGraph<S>, lambda: &S, v0: &VertexId) -> Result<ConeDescription<S>> {
    check_lambda(lambda)?;
    let base = g.index_of(v0)?;
    let n = g.len();
    let equalities: Vec<Vec<S>> = (0..n)
        .filter(|&v| !g.is_sink(v))
        .map(|v| {
            let mut row = vec![S::zero(); n];
            for (u, a) in g.row(v) {
                row[*u] += a.clone();
            }
            row[v] -= lambda.clone();
            row
        })
        .collect();
    let basis = nullspace(&equalities, n);
    let d = basis.len();
    // Row i of N: the coordinates of ξ_i in terms of y.
    let halfspaces: Vec<Vec<S>> = (0..n).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    let rays = if d == 0 { Vec::new() } else { extreme_rays(&halfspaces, d) };

    let eps = S::zero_tolerance();
    let mut points: Vec<Vec<S>> = Vec::new();
    let mut recession: Vec<Vec<S>> = Vec::new();
    for y in rays {
        let mut xi: Vec<S> = halfspaces.iter().map(|h| dot(h, &y)).collect();
        for x in xi.iter_mut() {
            // clean float dust on coordinates that are zero up to tolerance
            if x.abs() <= eps {
                *x = S::zero();
            }
        }
        if xi[base] > eps {
            let inv = xi[base].recip();
            points.push(xi.into_iter().map(|x| x * inv.clone()).collect());
        } else {
            recession.push(tidy(xi));
        }
    }
    let cmp = |a: &Vec<S>, b: &Vec<S>| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    };
    let close =
        |a: &Vec<S>, b: &Vec<S>| a.iter().zip(b).all(|(x, y)| crate::scalar::approx_eq(x, y, &S::zero_tolerance()));
    points.sort_by(cmp);
    points.dedup_by(|a, b| close(a, b));
    recession.sort_by(cmp);
    recession.dedup_by(|a, b| close(a, b));

    let vertices = g.vertices();
    let as_map = |x: Vec<S>| -> BTreeMap<VertexId, S> { vertices.iter().cloned().zip(x).collect() };
    let source = GraphSource::Finite(g.clone());
    let cfg = TruncationConfig::default();
    let mut extreme_points = Vec::with_capacity(points.len());
    let mut labels = Vec::with_capacity(points.len());
    for p in points {
        let values = as_map(p);
        let report = check_vector(&source, lambda, &values, S::zero_tolerance().to_f64(), &cfg)?;
        let label = match report.slack.as_slice() {
            [] => PointLabel::Harmonic,
            [s] => PointLabel::Sink(s.clone()),
            _ => PointLabel::Unclassified,
        };
        let kind = if report.is_harmonic { VectorKind::Harmonic } else { VectorKind::AlmostHarmonic };
        extreme_points.push(HarmonicVector::new(lambda.clone(), values, kind));
        labels.push(label);
    }
    Ok(ConeDescription {
        base_vertex: v0.clone(),
        lambda: lambda.clone(),
        extreme_points,
        labels,
        recession_rays: recession.into_iter().map(as_map).collect(),
    })
}
