use std::collections::{BTreeMap, BTreeSet};

use kmsgraph::harmonic::check_vector;
use kmsgraph::series::first_passage_series_to;
use kmsgraph::{
    beta0_estimate, green_series, h_transform, hereditary_saturated_closure, is_cofinal, nonwandering_set, power_entry,
    riesz_decompose, solve_finite, vere_jones_residual, FiniteGraph, GraphSource, HarmonicVector, Rational, Scalar,
    TruncationConfig, Verdict, VertexId,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn name(i: usize) -> VertexId {
    VertexId::new(format!("x{i}")).unwrap()
}

/// Up to `max` vertices; each potential edge present with a small rational weight.
fn arb_graph(max: usize) -> impl Strategy<Value = FiniteGraph<Rational>> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(proptest::option::weighted(0.35, (1i64..=4, 1i64..=3)), n * n).prop_map(
            move |cells| {
                let edges = cells
                    .iter()
                    .enumerate()
                    .filter_map(|(k, c)| c.map(|(p, q)| (name(k / n), name(k % n), Rational::new(p.into(), q.into()))));
                FiniteGraph::new((0..n).map(name), edges).unwrap()
            },
        )
    })
}

/// A Hamiltonian cycle plus random chords.
fn arb_strongly_connected(max: usize) -> impl Strategy<Value = FiniteGraph<Rational>> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(proptest::option::weighted(0.3, (1i64..=4, 1i64..=3)), n * n).prop_map(move |cells| {
            let mut edges: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
            for (k, c) in cells.iter().enumerate() {
                if let Some((p, q)) = c {
                    edges.insert((k / n, k % n), Rational::new((*p).into(), (*q).into()));
                }
            }
            for i in 0..n {
                edges.entry((i, (i + 1) % n)).or_insert_with(Rational::one);
            }
            FiniteGraph::new((0..n).map(name), edges.into_iter().map(|((a, b), w)| (name(a), name(b), w))).unwrap()
        })
    })
}

fn subset(g: &FiniteGraph<Rational>, mask: u32) -> Vec<VertexId> {
    (0..g.len()).filter(|i| mask >> i & 1 == 1).map(|i| g.vertex(i).clone()).collect()
}

fn is_hereditary_saturated(g: &FiniteGraph<Rational>, set: &BTreeSet<usize>) -> bool {
    (0..g.len()).all(|v| {
        let row = g.row(v);
        let hereditary = !set.contains(&v) || row.iter().all(|(w, _)| set.contains(w));
        let saturated = set.contains(&v) || row.is_empty() || !row.iter().all(|(w, _)| set.contains(w));
        hereditary && saturated
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_idempotent_and_monotone(g in arb_graph(8), a in 0u32..256, b in 0u32..256) {
        let s = subset(&g, a);
        let t = subset(&g, a | b);
        let cs = hereditary_saturated_closure(&g, &s).unwrap();
        let again = hereditary_saturated_closure(&g, &cs.iter().cloned().collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(&cs, &again);
        let ct = hereditary_saturated_closure(&g, &t).unwrap();
        prop_assert!(cs.is_subset(&ct));
    }

    #[test]
    fn cofinality_matches_bruteforce(g in arb_graph(9)) {
        let n = g.len();
        let bruteforce = (1u32..(1 << n) - 1).all(|mask| {
            let set: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            !is_hereditary_saturated(&g, &set)
        });
        let verdict = is_cofinal(&GraphSource::Finite(g.clone()));
        prop_assert_eq!(verdict == Verdict::Yes, bruteforce);
    }

    #[test]
    fn nonwandering_is_hereditary_on_cofinal_graphs(g in arb_graph(8)) {
        prop_assume!(is_cofinal(&GraphSource::Finite(g.clone())) == Verdict::Yes);
        let nw = nonwandering_set(&g);
        for v in 0..g.len() {
            if nw.vertices.contains(g.vertex(v)) {
                for (w, _) in g.row(v) {
                    prop_assert!(nw.vertices.contains(g.vertex(*w)));
                }
            }
        }
        if !nw.vertices.is_empty() {
            prop_assert!(nw.strongly_connected);
        }
    }

    #[test]
    fn powers_satisfy_chapman_kolmogorov(g in arb_graph(6), m in 0usize..4, k in 0usize..4, v in 0usize..6, w in 0usize..6) {
        let (v, w) = (name(v % g.len()), name(w % g.len()));
        let src = GraphSource::Finite(g.clone());
        let cfg = TruncationConfig::default();
        let whole = power_entry(&src, &v, &w, m + k, &cfg).unwrap().value;
        let split = g.vertices().iter().fold(Rational::zero(), |acc, u| {
            acc + power_entry(&src, &v, u, m, &cfg).unwrap().value * power_entry(&src, u, &w, k, &cfg).unwrap().value
        });
        prop_assert_eq!(whole, split);
    }

    #[test]
    fn green_lower_bounds_grow_with_depth(g in arb_graph(6), d in 1usize..30, extra in 1usize..30) {
        let src = GraphSource::Finite(g.clone());
        let (v, w) = (g.vertex(0).clone(), g.vertex(g.len() - 1).clone());
        let lambda = Rational::from_integer(3.into());
        let a = green_series(&src, &v, &w, &lambda, &TruncationConfig::default().with_depth(d)).unwrap();
        let b = green_series(&src, &v, &w, &lambda, &TruncationConfig::default().with_depth(d + extra)).unwrap();
        prop_assert!(a.lower <= b.lower);
    }

    #[test]
    fn extreme_points_are_positive_solutions(g in arb_graph(6), l in 1i64..=6, d in 1i64..=3) {
        let lambda = Rational::new(l.into(), d.into());
        let v0 = g.vertex(0).clone();
        let cone = solve_finite(&g, &lambda, &v0).unwrap();
        let src = GraphSource::Finite(g.clone());
        for p in &cone.extreme_points {
            prop_assert_eq!(&p.values[&v0], &Rational::one());
            prop_assert!(p.values.values().all(|x| *x >= Rational::zero()));
            let report = check_vector(&src, &lambda, &p.values, 0.0, &TruncationConfig::default()).unwrap();
            prop_assert!(report.is_almost_harmonic, "{:?}", report.violations);
            // Sub-invariance: one more step of λ^-1 A never increases the vector.
            for (i, v) in g.vertices().iter().enumerate() {
                let step = g.row(i).iter().fold(Rational::zero(), |a, (w, x)| a + x * &p.values[g.vertex(*w)]);
                prop_assert!(step / &lambda <= p.values[v]);
            }
        }
    }

    #[test]
    fn riesz_parts_reassemble(g in arb_graph(5), l in 1i64..=6) {
        let lambda = Rational::from_integer(l.into());
        let cone = solve_finite(&g, &lambda, g.vertex(0)).unwrap();
        // Exact descents grow without bound in size; the reassembly is checked in floats.
        let src: GraphSource<f64> = GraphSource::Finite(g.convert(Scalar::to_f64));
        for p in &cone.extreme_points {
            let values = p.values.iter().map(|(v, x)| (v.clone(), x.to_f64())).collect();
            let psi = HarmonicVector::new(lambda.to_f64(), values, p.kind);
            let pair = riesz_decompose(&src, &psi, &TruncationConfig::default().with_depth(4000)).unwrap();
            // λ can sit arbitrarily close to a spectral radius, so some descents hit the cap.
            prop_assume!(pair.converged);
            prop_assert!(pair.reconstruction_residual < 1e-9, "{}", pair.reconstruction_residual);
            prop_assert!(pair.k.values().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn vere_jones_identity_holds_above_lambda0(g in arb_strongly_connected(5), bump in 1i64..=4) {
        let src: GraphSource<f64> = GraphSource::Finite(g.convert(Scalar::to_f64));
        let cfg = TruncationConfig::default().with_depth(80);
        let lambda0 = beta0_estimate(&src, &cfg).unwrap().lambda0();
        let lambda = lambda0 + bump as f64;
        let (v, w) = (g.vertex(0).clone(), g.vertex(g.len() - 1).clone());
        let r = vere_jones_residual(&src, &v, &w, &lambda, &cfg).unwrap();
        prop_assert!(r.residual <= 1e-9 * r.green_vw.max(1.0), "{}", r.residual);
        // Above λ₀ the return series at w is strictly below one; from v ≠ w it is unbounded.
        let ret: f64 = first_passage_series_to(&src, std::slice::from_ref(&w), &w, &lambda, &cfg).unwrap()[0].iter().sum();
        prop_assert!(ret < 1.0, "{}", ret);
    }

    #[test]
    fn h_transform_rows_are_stochastic(g in arb_strongly_connected(6)) {
        // Scale every row to sum one: then ψ ≡ 1 is harmonic at λ = 1.
        let mut edges = Vec::new();
        for i in 0..g.len() {
            let total = g.row(i).iter().fold(Rational::zero(), |a, (_, x)| a + x);
            for (j, x) in g.row(i) {
                edges.push((g.vertex(i).clone(), g.vertex(*j).clone(), x / &total));
            }
        }
        let h = GraphSource::Finite(FiniteGraph::new([], edges).unwrap());
        let one = Rational::one();
        let psi = HarmonicVector::new(one.clone(), g.vertices().iter().map(|v| (v.clone(), one.clone())).collect(), kmsgraph::VectorKind::Harmonic);
        let k = h_transform(&h, &psi, &TruncationConfig::default()).unwrap();
        for row in k.transitions.values() {
            prop_assert_eq!(row.iter().fold(Rational::zero(), |a, (_, p)| a + p), Rational::one());
        }
    }
}
