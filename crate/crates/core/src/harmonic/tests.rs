use super::*;
use crate::graph::parse_graph;
use crate::scalar::parse_rational;
use crate::Rational;

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn id(s: &str) -> VertexId {
    VertexId::new(s).unwrap()
}

fn graph<S: Scalar>(text: &str) -> GraphSource<S> {
    parse_graph(text).unwrap()
}

fn map<S: Clone>(pairs: &[(&str, S)]) -> BTreeMap<VertexId, S> {
    pairs.iter().map(|(k, v)| (id(k), v.clone())).collect()
}

const TWO_CYCLE_TAIL: &str = "kmsgraph v1\n[edges]\nu v 1\nv w 1\nw v 1\n";
const SINK: &str = "kmsgraph v1\n[edges]\nv s 1\n";

fn finite<S: Scalar>(text: &str) -> FiniteGraph<S> {
    graph::<S>(text).as_finite().unwrap().clone()
}

#[test]
fn check_examples() {
    let cfg = TruncationConfig::default();
    let g: GraphSource<Rational> = graph("gen:loop a=2");
    let r = check_vector(&g, &q("2"), &map(&[("v", q("1"))]), 0.0, &cfg).unwrap();
    assert!(r.is_almost_harmonic && r.is_harmonic && r.positivity_ok);

    let h: GraphSource<Rational> = graph("gen:halfline");
    let lambda = q("3/2");
    let xi: BTreeMap<VertexId, Rational> =
        (0..=10).map(|i| (VertexId::from(i), crate::scalar::powi(&lambda, i as u64))).collect();
    let r = check_vector(&h, &lambda, &xi, 0.0, &cfg).unwrap();
    assert!(r.is_harmonic);
    assert_eq!(r.unprobed, vec![VertexId::from(10)]);

    let f: GraphSource<Rational> = graph(TWO_CYCLE_TAIL);
    let r = check_vector(&f, &q("1"), &map(&[("u", q("0")), ("v", q("1")), ("w", q("1"))]), 0.0, &cfg).unwrap();
    assert!(!r.positivity_ok);
    assert_eq!(check_vector(&f, &q("1"), &map(&[("v", q("1"))]), 0.0, &cfg), Err(Error::MissingValue(id("u"))));
    assert_eq!(
        check_vector(&f, &q("1"), &map(&[("u", q("0")), ("v", q("0")), ("w", q("0"))]), 0.0, &cfg),
        Err(Error::Degenerate)
    );
}

#[test]
fn check_allows_slack_only_on_v_infinity() {
    let cfg = TruncationConfig::default();
    let f: GraphSource<Rational> = graph(SINK);
    let r = check_vector(&f, &q("2"), &map(&[("s", q("1")), ("v", q("1/2"))]), 0.0, &cfg).unwrap();
    assert!(r.is_almost_harmonic && !r.is_harmonic);
    assert_eq!(r.slack, vec![id("s")]);
    let r = check_vector(&f, &q("2"), &map(&[("s", q("1")), ("v", q("1"))]), 0.0, &cfg).unwrap();
    assert_eq!(r.violations, vec![id("v")]);
}

#[test]
fn solve_examples() {
    let g: FiniteGraph<Rational> = finite(TWO_CYCLE_TAIL);
    let c = solve_finite(&g, &q("1"), &id("u")).unwrap();
    assert_eq!(c.extreme_points.len(), 1);
    assert_eq!(c.extreme_points[0].values, map(&[("u", q("1")), ("v", q("1")), ("w", q("1"))]));
    assert_eq!(c.labels, vec![PointLabel::Harmonic]);
    for lambda in ["1/2", "2", "5"] {
        assert!(solve_finite(&g, &q(lambda), &id("u")).unwrap().is_empty());
    }

    let s: FiniteGraph<Rational> = finite(SINK);
    let c = solve_finite(&s, &q("2"), &id("s")).unwrap();
    assert_eq!(c.extreme_points.len(), 1);
    assert_eq!(c.extreme_points[0].values, map(&[("s", q("1")), ("v", q("1/2"))]));
    assert_eq!(c.labels, vec![PointLabel::Sink(id("s"))]);
    assert!(solve_finite(&s, &q("2"), &id("x")).is_err());
}

#[test]
fn solve_with_two_sinks_has_two_extreme_points() {
    let g: FiniteGraph<Rational> = finite("kmsgraph v1\n[edges]\nr a 1\nr b 1\n");
    let c = solve_finite(&g, &q("2"), &id("r")).unwrap();
    let pts: Vec<_> = c.extreme_points.iter().map(|p| p.values.clone()).collect();
    assert_eq!(
        pts,
        vec![map(&[("a", q("0")), ("b", q("2")), ("r", q("1"))]), map(&[("a", q("2")), ("b", q("0")), ("r", q("1"))]),]
    );
    assert_eq!(c.labels, vec![PointLabel::Sink(id("b")), PointLabel::Sink(id("a"))]);
}

#[test]
fn solve_float_matches_exact() {
    let g: FiniteGraph<f64> = finite(TWO_CYCLE_TAIL);
    let c = solve_finite(&g, &1.0, &id("v")).unwrap();
    assert_eq!(c.extreme_points.len(), 1);
    for x in c.extreme_points[0].values.values() {
        assert!((x - 1.0).abs() < 1e-12);
    }
}

#[test]
fn nullspace_of_rank_deficient_matrix() {
    let rows = vec![vec![q("1"), q("2"), q("3")], vec![q("2"), q("4"), q("6")]];
    let basis = nullspace(&rows, 3);
    assert_eq!(basis.len(), 2);
    for b in basis {
        assert!(rows.iter().all(|r| r.iter().zip(&b).fold(q("0"), |a, (x, y)| a + x * y) == q("0")));
    }
}

#[test]
fn certificate_examples() {
    let cfg = TruncationConfig::default();
    let g: GraphSource<Rational> = graph("gen:loop a=2");
    let c = certify_no_solution(&g, &q("1"), &cfg).unwrap().unwrap();
    assert_eq!((c.witness_vertex.clone(), c.exponent), (id("v"), 1));
    assert!((c.value - 2.0).abs() < 1e-12);
    assert!(certify_no_solution(&g, &q("4"), &cfg).unwrap().is_none());
    assert!(certify_no_solution(&g, &q("2"), &cfg).unwrap().is_none());

    let z: GraphSource<Rational> = graph("gen:zwalk p=1/2 q=1/2");
    let c = certify_no_solution(&z, &q("1/2"), &cfg.clone().with_depth(8)).unwrap().unwrap();
    assert_eq!(c.exponent, 2);
    assert!((c.value - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn extension_examples() {
    let cfg = TruncationConfig::default();
    let s: GraphSource<Rational> = graph(SINK);
    let x = extend_from_hereditary(&s, &q("2"), &map(&[("s", q("1"))]), None, SweepOrder::Queue, &cfg).unwrap();
    assert_eq!(x.values, map(&[("s", q("1")), ("v", q("1/2"))]));

    let f: GraphSource<Rational> = graph(TWO_CYCLE_TAIL);
    let x = extend_from_hereditary(&f, &q("1"), &map(&[("v", q("1")), ("w", q("1"))]), None, SweepOrder::Queue, &cfg)
        .unwrap();
    assert_eq!(x.values[&id("u")], q("1"));

    let chain: GraphSource<Rational> = graph("kmsgraph v1\n[edges]\na b 1\nb c 1\nc c 1\n");
    for order in [SweepOrder::Queue, SweepOrder::Stack] {
        let x = extend_from_hereditary(&chain, &q("1"), &map(&[("c", q("1"))]), None, order, &cfg).unwrap();
        assert_eq!(x.values, map(&[("a", q("1")), ("b", q("1")), ("c", q("1"))]));
    }

    assert_eq!(
        extend_from_hereditary(&f, &q("1"), &map(&[("v", q("1"))]), None, SweepOrder::Queue, &cfg),
        Err(Error::NotHereditary(id("v")))
    );
    assert_eq!(
        extend_from_hereditary(&f, &q("1"), &map(&[("v", q("1")), ("w", q("2"))]), None, SweepOrder::Queue, &cfg),
        Err(Error::ConstraintViolation(id("v")))
    );
}

#[test]
fn extension_on_a_generator_window() {
    let cfg = TruncationConfig::default();
    let g: GraphSource<Rational> = graph("gen:cycle_with_tail n=3");
    let eta = map(&[("c0", q("1")), ("c1", q("1")), ("c2", q("1"))]);
    let x = extend_from_hereditary(&g, &q("1"), &eta, None, SweepOrder::Stack, &cfg).unwrap();
    assert_eq!(x.values[&id("t0")], q("1"));
    assert_eq!(x.values[&id("t5")], q("1"));
}

#[test]
fn recurrent_examples() {
    let cfg = TruncationConfig::default();
    let g: GraphSource<Rational> = graph("gen:loop a=2");
    let r = recurrent_harmonic(&g, &id("v"), None, &cfg).unwrap();
    assert_eq!(r.vector.values, map(&[("v", q("1"))]));
    assert_eq!(r.normalization, q("1"));

    let f: GraphSource<Rational> = graph(TWO_CYCLE_TAIL);
    let r = recurrent_harmonic(&f, &id("w"), None, &cfg).unwrap();
    assert_eq!(r.vector.values, map(&[("u", q("1")), ("v", q("1")), ("w", q("1"))]));
    assert_eq!(r.vector.kind, VectorKind::Harmonic);
    assert_eq!(r.lambda0, q("1"));
    assert!(matches!(recurrent_harmonic(&f, &id("u"), None, &cfg), Err(Error::Precondition(_))));

    let h: GraphSource<f64> = graph("gen:halfline");
    assert!(recurrent_harmonic(&h, &id("0"), None, &cfg).is_err());
}

#[test]
fn recurrent_zwalk_creeps_towards_one() {
    let z: GraphSource<f64> = graph("gen:zwalk p=1/2 q=1/2");
    let window: Vec<VertexId> = (-3..=3).map(VertexId::from).collect();
    let short = recurrent_harmonic(&z, &id("0"), Some(&window), &TruncationConfig::default().with_depth(100)).unwrap();
    let long = recurrent_harmonic(&z, &id("0"), Some(&window), &TruncationConfig::default().with_depth(400)).unwrap();
    assert_eq!(long.vector.kind, VectorKind::Candidate);
    assert!(long.normalization > short.normalization && long.normalization < 1.0);
    for v in &window {
        assert!(long.vector.values[v] >= short.vector.values[v]);
        assert!(long.vector.values[v] <= 1.0);
    }
}

#[test]
fn exact_critical_value_snaps_to_rationals() {
    let f: GraphSource<Rational> = graph("kmsgraph v1\n[edges]\na b 2\nb a 2\n");
    let cfg = TruncationConfig::default();
    assert_eq!(critical_lambda(&f, &beta0_estimate(&f, &cfg).unwrap()).unwrap(), q("2"));
}

#[test]
fn potential_and_riesz_on_star() {
    let cfg = TruncationConfig::default().with_tol(1e-13);
    let g: GraphSource<f64> = graph("gen:star_emitter r=1/2");
    let k = map(&[("u", 1.0)]);
    let psi = potential_hat(&g, &2.0, &k, None, &cfg).unwrap();
    assert!((psi.values[&id("u")] - 4.0 / 3.0).abs() < 1e-12);
    assert!((psi.values[&id("w3")] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(psi.values.len(), 65);
    let report = check_vector(&g, &2.0, &psi.values, 1e-12, &cfg).unwrap();
    assert!(report.is_almost_harmonic && report.slack == vec![id("u")]);

    let pair = riesz_decompose(&g, &psi, &cfg).unwrap();
    assert!(pair.phi.values.values().all(|x| x.abs() < 1e-8));
    assert!((pair.k[&id("u")] - 1.0).abs() < 1e-8);
    assert!(pair.reconstruction_residual < 1e-8);
}

#[test]
fn potential_rejects_bad_charges() {
    let cfg = TruncationConfig::default();
    let z: GraphSource<f64> = graph("gen:zwalk p=1/2 q=1/2");
    assert_eq!(potential_hat(&z, &2.0, &map(&[("0", 1.0)]), None, &cfg), Err(Error::NotInVinf(id("0"))));
    let zero = potential_hat(&z, &2.0, &BTreeMap::new(), Some(&[id("0")]), &cfg).unwrap();
    assert_eq!(zero.values[&id("0")], 0.0);
}

#[test]
fn riesz_of_harmonic_and_recurrent_inputs() {
    let cfg = TruncationConfig::default();
    let g: GraphSource<Rational> = graph("gen:loop a=2");
    let psi = HarmonicVector::new(q("2"), map(&[("v", q("5"))]), VectorKind::Harmonic);
    let pair = riesz_decompose(&g, &psi, &cfg).unwrap();
    assert_eq!(pair.phi.values, psi.values);
    assert!(pair.k.is_empty());

    let s: GraphSource<Rational> = graph(SINK);
    let psi = HarmonicVector::new(q("2"), map(&[("s", q("1")), ("v", q("1/2"))]), VectorKind::AlmostHarmonic);
    let pair = riesz_decompose(&s, &psi, &cfg).unwrap();
    assert_eq!(pair.k, map(&[("s", q("1"))]));
    assert_eq!(pair.phi.values, map(&[("s", q("0")), ("v", q("0"))]));
    assert_eq!(pair.reconstruction_residual, 0.0);
}

#[test]
fn meet_examples() {
    let cfg = TruncationConfig::default();
    let z: GraphSource<f64> = graph("gen:zwalk p=1/2 q=1/2");
    let lambda = 1.25;
    let geo = |b: f64| -> HarmonicVector<f64> {
        let values = (-40..=40).map(|i| (VertexId::from(i), b.powi(i as i32))).collect();
        HarmonicVector::new(lambda, values, VectorKind::Harmonic)
    };
    let (up, down) = (geo(2.0), geo(0.5));
    let same = lattice_meet(&z, &up, &up, &cfg).unwrap();
    assert!(same.meet.max_relative_gap(&up) < 1e-12);

    let m = lattice_meet(&z, &up, &down, &cfg).unwrap();
    for (v, x) in &m.meet.values {
        assert!(*x <= up.values[v].min(down.values[v]) + 1e-12);
        assert!(*x > 0.0);
        assert!((x + m.join.values[v] - up.values[v] - down.values[v]).abs() < 1e-9 * up.values[v].max(1.0));
    }
    let check = check_vector(&z, &lambda, &m.meet.values, 1e-9, &cfg).unwrap();
    assert!(check.is_almost_harmonic, "{check:?}");
}
