//! Built-in generator families and the out-neighborhood extension point.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::VertexId;
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Scalar};

/// Shape of the non-wandering set of a generated graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NwKind {
    Empty,
    Finite,
    Infinite,
}

/// Trusted, hand-verified facts a generator family carries about itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeclaredMetadata {
    pub cofinal: bool,
    pub no_sinks: bool,
    pub powers_finite: bool,
    pub nw_kind: NwKind,
    /// Sinks and infinite emitters.
    pub v_infinity: Vec<VertexId>,
    /// A vertex known to lie in the non-wandering set.
    pub nw_witness: Option<VertexId>,
    /// The whole non-wandering set, when it is finite.
    pub nonwandering: Option<Vec<VertexId>>,
    /// Closed form of `λ₀ = exp(β₀)`, when registered.
    pub lambda0: Option<f64>,
    /// Closed-form verdict on divergence of `Σ A^n_vv λ₀^-n`.
    pub recurrent_at_lambda0: Option<bool>,
}

/// Lazily generated graph. Implementations must be pure and re-entrant:
/// the same vertex always yields the same edges in the same order.
pub trait OutNeighborhood<S>: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    fn contains(&self, v: &VertexId) -> bool;

    fn out_edges<'a>(&'a self, v: &VertexId) -> Result<Box<dyn Iterator<Item = (VertexId, S)> + 'a>>;

    fn metadata(&self) -> &DeclaredMetadata;

    /// Membership in the non-wandering set, if the family knows it.
    fn in_nonwandering(&self, _v: &VertexId) -> Option<bool> {
        None
    }

    /// Default sequence of distinct targets escaping in one direction.
    fn march(&self, _forward: bool, _count: usize) -> Option<Vec<VertexId>> {
        None
    }

    /// Default probe window of the given radius around the base vertex.
    fn window(&self, _radius: usize) -> Option<Vec<VertexId>> {
        None
    }
}

/// Parameters of a built-in family.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    /// One vertex `v` with a self-loop of weight `a`.
    Loop { a: BigRational },
    /// `0 -> 1 -> 2 -> ...`, all weights 1.
    Halfline,
    /// Walk on the integers: `i -> i+1` with weight `p`, `i -> i-1` with weight `q`.
    ZWalk { p: BigRational, q: BigRational },
    /// Vertex `u` emits `u -> w_i` with weight `r^i` for every `i >= 1`; each `w_i -> u` has weight 1.
    StarEmitter { r: BigRational },
    /// Cycle `c0 -> c1 -> ... -> c(n-1) -> c0` fed by an infinite tail `... -> t1 -> t0 -> c0`.
    CycleWithTail { n: usize },
}

impl FamilySpec {
    pub const NAMES: [&'static str; 5] = ["loop", "halfline", "zwalk", "star_emitter", "cycle_with_tail"];

    pub fn parse(name: &str, params: &[(String, String)]) -> Result<Self> {
        let allowed: &[&str] = match name {
            "loop" => &["a"],
            "halfline" => &[],
            "zwalk" => &["p", "q"],
            "star_emitter" => &["r"],
            "cycle_with_tail" => &["n"],
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        for (key, _) in params {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!("{name} has no parameter `{key}`")));
            }
        }
        let get = |key: &str, default: &str| -> Result<BigRational> {
            let text = params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str()).unwrap_or(default);
            parse_rational(text)
        };
        let positive = |key: &str, value: &BigRational| -> Result<()> {
            if value.is_positive() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name}: {key} must be positive")))
            }
        };
        let spec = match name {
            "loop" => {
                let a = get("a", "1")?;
                positive("a", &a)?;
                FamilySpec::Loop { a }
            }
            "halfline" => FamilySpec::Halfline,
            "zwalk" => {
                let p = get("p", "1/2")?;
                let q = get("q", "1/2")?;
                positive("p", &p)?;
                positive("q", &q)?;
                FamilySpec::ZWalk { p, q }
            }
            "star_emitter" => {
                let r = get("r", "1/2")?;
                positive("r", &r)?;
                if r >= BigRational::one() {
                    return Err(Error::InvalidParameter("star_emitter: r must be < 1 for finite matrix powers".into()));
                }
                FamilySpec::StarEmitter { r }
            }
            _ => {
                let n = get("n", "3")?;
                let n = (n.is_integer() && n.is_positive())
                    .then(|| n.to_integer().to_usize())
                    .flatten()
                    .ok_or_else(|| Error::InvalidParameter("cycle_with_tail: n must be a positive integer".into()))?;
                FamilySpec::CycleWithTail { n }
            }
        };
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Loop { .. } => "loop",
            FamilySpec::Halfline => "halfline",
            FamilySpec::ZWalk { .. } => "zwalk",
            FamilySpec::StarEmitter { .. } => "star_emitter",
            FamilySpec::CycleWithTail { .. } => "cycle_with_tail",
        }
    }

    pub fn metadata(&self) -> DeclaredMetadata {
        let v = |s: &str| VertexId::new(s).expect("static vertex token");
        let base = DeclaredMetadata {
            cofinal: true,
            no_sinks: true,
            powers_finite: true,
            nw_kind: NwKind::Infinite,
            v_infinity: Vec::new(),
            nw_witness: None,
            nonwandering: None,
            lambda0: None,
            recurrent_at_lambda0: None,
        };
        match self {
            FamilySpec::Loop { a } => DeclaredMetadata {
                nw_kind: NwKind::Finite,
                nw_witness: Some(v("v")),
                nonwandering: Some(vec![v("v")]),
                lambda0: Some(Scalar::to_f64(a)),
                recurrent_at_lambda0: Some(true),
                ..base
            },
            FamilySpec::Halfline => DeclaredMetadata { nw_kind: NwKind::Empty, nonwandering: Some(Vec::new()), ..base },
            FamilySpec::ZWalk { p, q } => DeclaredMetadata {
                nw_witness: Some(v("0")),
                lambda0: Some(2.0 * (Scalar::to_f64(p) * Scalar::to_f64(q)).sqrt()),
                // Σ C(2n,n) (pq)^n / (4pq)^n = Σ C(2n,n) 4^-n diverges.
                recurrent_at_lambda0: Some(true),
                ..base
            },
            FamilySpec::StarEmitter { r } => {
                let r = Scalar::to_f64(r);
                DeclaredMetadata {
                    v_infinity: vec![v("u")],
                    nw_witness: Some(v("u")),
                    // A^{2m}_uu = (r/(1-r))^m, odd powers vanish.
                    lambda0: Some((r / (1.0 - r)).sqrt()),
                    recurrent_at_lambda0: Some(true),
                    ..base
                }
            }
            FamilySpec::CycleWithTail { n } => DeclaredMetadata {
                nw_kind: NwKind::Finite,
                nw_witness: Some(v("c0")),
                nonwandering: Some((0..*n as u64).map(|i| tagged('c', i)).collect()),
                lambda0: Some(1.0),
                recurrent_at_lambda0: Some(true),
                ..base
            },
        }
    }

    pub fn build<S: Scalar>(&self) -> Builtin<S> {
        let one = BigRational::one();
        let (w1, w2) = match self {
            FamilySpec::Loop { a } => (a.clone(), one.clone()),
            FamilySpec::ZWalk { p, q } => (p.clone(), q.clone()),
            FamilySpec::StarEmitter { r } => (r.clone(), one.clone()),
            _ => (one.clone(), one.clone()),
        };
        Builtin {
            spec: self.clone(),
            metadata: self.metadata(),
            first: S::from_rational(&w1),
            second: S::from_rational(&w2),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Loop { a } => write!(f, "loop a={a}"),
            FamilySpec::Halfline => write!(f, "halfline"),
            FamilySpec::ZWalk { p, q } => write!(f, "zwalk p={p} q={q}"),
            FamilySpec::StarEmitter { r } => write!(f, "star_emitter r={r}"),
            FamilySpec::CycleWithTail { n } => write!(f, "cycle_with_tail n={n}"),
        }
    }
}

/// A built-in family with weights converted to the scalar type.
#[derive(Clone, Debug)]
pub struct Builtin<S> {
    spec: FamilySpec,
    metadata: DeclaredMetadata,
    first: S,
    second: S,
}

impl<S> Builtin<S> {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }
}

fn canonical_int(token: &str) -> Option<i64> {
    let n: i64 = token.parse().ok()?;
    (n.to_string() == token).then_some(n)
}

fn indexed(token: &str, prefix: char) -> Option<u64> {
    let rest = token.strip_prefix(prefix)?;
    let n: u64 = rest.parse().ok()?;
    (n.to_string() == rest).then_some(n)
}

fn int_vertex(i: i64) -> VertexId {
    VertexId::from(i)
}

fn tagged(prefix: char, i: u64) -> VertexId {
    VertexId::new(format!("{prefix}{i}")).expect("generated token")
}

impl<S: Scalar> OutNeighborhood<S> for Builtin<S> {
    fn name(&self) -> String {
        self.spec.to_string()
    }

    fn contains(&self, v: &VertexId) -> bool {
        let t = v.as_str();
        match &self.spec {
            FamilySpec::Loop { .. } => t == "v",
            FamilySpec::Halfline => canonical_int(t).is_some_and(|i| i >= 0),
            FamilySpec::ZWalk { .. } => canonical_int(t).is_some(),
            FamilySpec::StarEmitter { .. } => t == "u" || indexed(t, 'w').is_some_and(|i| i >= 1),
            FamilySpec::CycleWithTail { n } => {
                indexed(t, 'c').is_some_and(|i| i < *n as u64) || indexed(t, 't').is_some()
            }
        }
    }

    fn out_edges<'a>(&'a self, v: &VertexId) -> Result<Box<dyn Iterator<Item = (VertexId, S)> + 'a>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v.clone()));
        }
        let t = v.as_str();
        let edges: Box<dyn Iterator<Item = (VertexId, S)> + 'a> = match &self.spec {
            FamilySpec::Loop { .. } => Box::new(std::iter::once((v.clone(), self.first.clone()))),
            FamilySpec::Halfline => {
                let i = canonical_int(t).expect("checked");
                Box::new(std::iter::once((int_vertex(i + 1), S::one())))
            }
            FamilySpec::ZWalk { .. } => {
                let i = canonical_int(t).expect("checked");
                Box::new(
                    [(int_vertex(i + 1), self.first.clone()), (int_vertex(i - 1), self.second.clone())].into_iter(),
                )
            }
            FamilySpec::StarEmitter { .. } => {
                if t == "u" {
                    let r = self.first.clone();
                    Box::new((1u64..).scan(S::one(), move |acc, i| {
                        *acc = acc.clone() * r.clone();
                        Some((tagged('w', i), acc.clone()))
                    }))
                } else {
                    Box::new(std::iter::once((VertexId::new("u").expect("token"), S::one())))
                }
            }
            FamilySpec::CycleWithTail { n } => {
                let next = if let Some(i) = indexed(t, 'c') {
                    tagged('c', (i + 1) % *n as u64)
                } else {
                    match indexed(t, 't').expect("checked") {
                        0 => tagged('c', 0),
                        k => tagged('t', k - 1),
                    }
                };
                Box::new(std::iter::once((next, S::one())))
            }
        };
        Ok(edges)
    }

    fn metadata(&self) -> &DeclaredMetadata {
        &self.metadata
    }

    fn in_nonwandering(&self, v: &VertexId) -> Option<bool> {
        if !self.contains(v) {
            return Some(false);
        }
        Some(match &self.spec {
            FamilySpec::Halfline => false,
            FamilySpec::CycleWithTail { .. } => v.as_str().starts_with('c'),
            _ => true,
        })
    }

    fn march(&self, forward: bool, count: usize) -> Option<Vec<VertexId>> {
        let count = count as i64;
        match (&self.spec, forward) {
            (FamilySpec::Halfline, true) => Some((1..=count).map(int_vertex).collect()),
            (FamilySpec::ZWalk { .. }, true) => Some((1..=count).map(int_vertex).collect()),
            (FamilySpec::ZWalk { .. }, false) => Some((1..=count).map(|k| int_vertex(-k)).collect()),
            _ => None,
        }
    }

    fn window(&self, radius: usize) -> Option<Vec<VertexId>> {
        let r = radius as i64;
        let mut out = match &self.spec {
            FamilySpec::Loop { .. } => vec![VertexId::new("v").expect("token")],
            FamilySpec::Halfline => (0..=r).map(int_vertex).collect(),
            FamilySpec::ZWalk { .. } => (-r..=r).map(int_vertex).collect(),
            FamilySpec::StarEmitter { .. } => std::iter::once(VertexId::new("u").expect("token"))
                .chain((1..=radius as u64).map(|i| tagged('w', i)))
                .collect(),
            FamilySpec::CycleWithTail { n } => {
                (0..*n as u64).map(|i| tagged('c', i)).chain((0..=radius as u64).map(|i| tagged('t', i))).collect()
            }
        };
        out.sort();
        Some(out)
    }
}
