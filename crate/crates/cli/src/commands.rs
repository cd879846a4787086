//! Per-command runners, generic over the scalar type of the graph.

use std::collections::BTreeMap;
use std::path::Path;

use kmsgraph::graph::NonWandering;
use kmsgraph::harmonic::{check_vector_on, PointLabel};
use kmsgraph::martin::LimitVerdict;
use kmsgraph::scalar::parse_scalar;
use kmsgraph::series::{first_passage_series_to, Beta0Mode};
use kmsgraph::{
    beta0_estimate, certify_no_solution, check_vector, classify_recurrence, classify_vertices, exact_lambda0,
    extend_from_hereditary, family_targets, green_series, h_transform, invariants, kernel_limit, martin_kernel,
    nonwandering_set, riesz_decompose, sample_boundary_paths, solve_finite, Error, GraphDocument, GraphSource,
    HarmonicVector, Recurrence, SampleConfig, Scalar, SweepOrder, TruncationConfig, VectorKind, Verdict, VertexId,
};
use serde_json::{json, Value};

use crate::output::{self, float, float_quantity, ids, opt, quantity, vector, Certainty, Table};
use crate::{Cli, Command, Direction, OrderArg};

pub struct Outcome {
    pub result: Value,
    pub table: Table,
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(result: Value, table: Table) -> Self {
        Outcome { result, table, notes: Vec::new() }
    }
}

pub enum Failure {
    Usage(String),
    /// A mathematical failure; `partial` carries whatever was computed.
    Domain {
        kind: String,
        message: String,
        partial: Option<Box<Outcome>>,
    },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Domain { kind: e.kind().into(), message: e.to_string(), partial: None }
        }
    }
}

type Run = Result<Outcome, Failure>;

struct Ctx<'a, S> {
    g: &'a GraphSource<S>,
    cfg: TruncationConfig,
    cli: &'a Cli,
}

impl<S: Scalar> Ctx<'_, S> {
    fn lambda(&self) -> Result<S, Failure> {
        let text = self.cli.numeric.lambda.as_deref().ok_or_else(|| Failure::Usage("--lambda is required".into()))?;
        let lambda: S = parse_scalar(text)?;
        if lambda <= S::zero() {
            return Err(Failure::Usage("--lambda must be positive".into()));
        }
        Ok(lambda)
    }

    /// `--v0`, else the declared non-wandering witness, else the first vertex.
    fn base(&self, given: &Option<String>) -> Result<VertexId, Failure> {
        if let Some(v) = given {
            return Ok(VertexId::new(v.as_str())?);
        }
        if let Some(w) = self.g.metadata().and_then(|m| m.nw_witness.clone()) {
            return Ok(w);
        }
        match self.g.as_finite().and_then(|f| f.vertices().first()) {
            Some(v) => Ok(v.clone()),
            None => Err(Failure::Usage("--v0 is required".into())),
        }
    }

    fn window(&self, radius: usize) -> Result<Vec<VertexId>, Failure> {
        self.g.default_window(radius).ok_or_else(|| Failure::Usage("this family has no default window".into()))
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// `VERTEX VALUE` lines; `#` starts a comment.
fn read_vector<S: Scalar>(path: &Path) -> Result<BTreeMap<VertexId, S>, Failure> {
    let text = read_file(path)?;
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Failure::Usage(format!("{}:{}: expected `VERTEX VALUE`", path.display(), no + 1));
        let mut parts = line.split_whitespace();
        let (Some(v), Some(x), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let v = VertexId::new(v)?;
        let x: S = parse_scalar(x)?;
        if out.insert(v.clone(), x).is_some() {
            return Err(Failure::Usage(format!("{}: vertex {v} listed twice", path.display())));
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage(format!("{}: no entries", path.display())));
    }
    Ok(out)
}

fn read_targets(path: &Path) -> Result<Vec<VertexId>, Failure> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            out.push(VertexId::new(line)?);
        }
    }
    Ok(out)
}

pub fn run<S: Scalar>(cli: &Cli, doc: Option<&GraphDocument>) -> Run {
    if let Command::Check { suite: Some(suite), .. } = &cli.command {
        return check_suite(suite, cli.numeric.seed);
    }
    let doc = doc.ok_or_else(|| Failure::Usage("a graph source is required".into()))?;
    let g: GraphSource<S> = doc.build()?;
    let cfg = TruncationConfig::default()
        .with_depth(cli.numeric.depth as usize)
        .with_row_limit(cli.numeric.row_limit as usize)
        .with_tol(cli.numeric.tol);
    let ctx = Ctx { g: &g, cfg, cli };
    match &cli.command {
        Command::Analyze => analyze(&ctx),
        Command::Beta0 => beta0(&ctx),
        Command::Classify => classify(&ctx),
        Command::Green { v, w } => green(&ctx, v, w),
        Command::Solve { v0 } => solve(&ctx, v0),
        Command::Certify => certify(&ctx),
        Command::Extend { subset, order, window } => extend(&ctx, subset, *order, *window),
        Command::Riesz { vector } => riesz(&ctx, vector),
        Command::Kernel { v0, target, v, window } => kernel(&ctx, v0, target, v, *window),
        Command::KernelLimit { v0, targets_file, family_direction, count, window } => {
            let targets = match (targets_file, family_direction) {
                (Some(path), _) => read_targets(path)?,
                (None, Some(d)) => family_targets(&g, *d == Direction::Forward, *count)?,
                (None, None) => return Err(Failure::Usage("give --targets-file or --family-direction".into())),
            };
            limit(&ctx, v0, &targets, *window)
        }
        Command::Sample { psi, v0, paths, horizon, window, closeness, stride, tsv_out } => {
            let sample = SampleConfig {
                paths: *paths,
                horizon: *horizon,
                seed: cli.numeric.seed,
                closeness: *closeness,
                stride: (*stride).max(1),
            };
            sample_paths(&ctx, psi, v0, *window, &sample, tsv_out.as_deref())
        }
        Command::Check { vector, .. } => match vector {
            Some(path) => check_file(&ctx, path),
            None => Err(Failure::Usage("check needs --suite NAME or --vector FILE".into())),
        },
    }
}

fn verdict_json(v: Verdict) -> Value {
    match v {
        Verdict::Yes => json!({ "holds": true, "basis": "decided" }),
        Verdict::No => json!({ "holds": false, "basis": "decided" }),
        Verdict::Declared(b) => json!({ "holds": b, "basis": "declared" }),
        Verdict::Unknown => json!({ "holds": null, "basis": "unknown" }),
    }
}

fn verdict_text(v: Verdict) -> String {
    match v {
        Verdict::Yes => "yes".into(),
        Verdict::No => "no".into(),
        Verdict::Declared(b) => format!("{}(declared)", if b { "yes" } else { "no" }),
        Verdict::Unknown => "unknown".into(),
    }
}

fn recurrence_text(r: Recurrence) -> &'static str {
    match r {
        Recurrence::Recurrent => "recurrent",
        Recurrence::Transient => "transient",
        Recurrence::Unknown => "unknown",
    }
}

/// `λ₀` with its marker: an exact rational eigenvalue, a registered closed
/// form, a converged bracket, or only the certified lower bound.
fn lambda0_json<S: Scalar>(g: &GraphSource<S>, report: &kmsgraph::Beta0Report) -> (Value, String) {
    if let Some(exact) = exact_lambda0::<S>(g, report) {
        let text = exact.to_string();
        return (quantity(&exact, Certainty::Exact), text);
    }
    let (value, certainty) = match (report.closed_form, report.mode) {
        (Some(c), _) => (c, Certainty::Exact),
        (None, Beta0Mode::Exact) => (report.lambda0(), Certainty::Heuristic),
        (None, Beta0Mode::Bounds) => (report.lambda0_lower, Certainty::LowerBound),
    };
    (float_quantity(value, certainty), value.to_string())
}

fn beta0_record<S: Scalar>(g: &GraphSource<S>, report: &kmsgraph::Beta0Report) -> (Value, Vec<(&'static str, String)>) {
    let (lambda0, text) = lambda0_json(g, report);
    let beta_certainty = match lambda0["certainty"].as_str() {
        Some("lower-bound") => Certainty::LowerBound,
        _ => Certainty::Heuristic,
    };
    let mode = match report.mode {
        Beta0Mode::Exact => "exact",
        Beta0Mode::Bounds => "bounds",
    };
    let value = json!({
        "lambda0": lambda0,
        "beta0": float_quantity(report.beta0(), beta_certainty),
        "lambda0_lower": float_quantity(report.lambda0_lower, Certainty::LowerBound),
        "lambda0_upper": float(report.lambda0_upper),
        "mode": mode,
        "witness_vertex": report.witness_vertex.to_string(),
        "method": report.method,
    });
    let rows = vec![
        ("lambda0", text),
        ("beta0", report.beta0().to_string()),
        ("lambda0_lower", report.lambda0_lower.to_string()),
        ("lambda0_upper", report.lambda0_upper.to_string()),
        ("beta0_mode", mode.to_string()),
        ("witness_vertex", report.witness_vertex.to_string()),
    ];
    (value, rows)
}

fn analyze<S: Scalar>(ctx: &Ctx<S>) -> Run {
    let g = ctx.g;
    let report = classify_vertices(g, ctx.cfg.row_limit)?;
    let nw: Option<NonWandering> = g.as_finite().map(nonwandering_set);
    let mut notes = report.notes.clone();
    let nw_size = report.nonwandering.as_ref().map(Vec::len);
    let strongly_connected = nw.as_ref().map(|n| n.strongly_connected);
    let mut rows: Vec<(&str, String)> = vec![
        ("cofinal", verdict_text(report.cofinal)),
        ("powers_finite", verdict_text(report.powers_finite)),
        ("nw_kind", format!("{:?}", report.nw_kind).to_lowercase()),
        ("nw_size", nw_size.map(|n| n.to_string()).unwrap_or_else(|| "infinite-or-unknown".into())),
        ("sinks", report.sinks.iter().map(VertexId::to_string).collect::<Vec<_>>().join(",")),
        ("infinite_emitters", report.infinite_emitters.iter().map(VertexId::to_string).collect::<Vec<_>>().join(",")),
    ];
    let mut result = json!({
        "cofinal": verdict_json(report.cofinal),
        "powers_finite": verdict_json(report.powers_finite),
        "nonwandering": {
            "kind": report.nw_kind,
            "size": nw_size,
            "vertices": report.nonwandering.as_deref().map(ids),
            "strongly_connected": strongly_connected,
        },
        "sinks": ids(&report.sinks),
        "infinite_emitters": ids(&report.infinite_emitters),
        "v_infinity_empty": report.sinks.is_empty() && report.infinite_emitters.is_empty(),
    });
    match beta0_estimate(g, &ctx.cfg) {
        Ok(b) => {
            let (value, more) = beta0_record(g, &b);
            result["critical_value"] = value;
            rows.extend(more);
            let rec = classify_recurrence(g, &ctx.cfg)?;
            result["recurrence"] = json!({
                "verdict": rec.verdict,
                "rule": rec.rule,
                "partial_sum": rec.partial_sum.map(|s| float_quantity(s, Certainty::LowerBound)),
                "evidence": rec.evidence,
            });
            rows.push(("recurrence", recurrence_text(rec.verdict).into()));
        }
        Err(Error::EmptyNonWandering) => {
            notes.push("non-wandering set is empty: beta0 is undefined".into());
            result["critical_value"] = Value::Null;
            result["recurrence"] = Value::Null;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(Outcome { result, table: Table::pairs(rows), notes })
}

fn beta0<S: Scalar>(ctx: &Ctx<S>) -> Run {
    let report = beta0_estimate(ctx.g, &ctx.cfg)?;
    let (value, rows) = beta0_record(ctx.g, &report);
    Ok(Outcome::new(value, Table::pairs(rows)))
}

fn classify<S: Scalar>(ctx: &Ctx<S>) -> Run {
    let rec = classify_recurrence(ctx.g, &ctx.cfg)?;
    let certainty = if rec.verdict == Recurrence::Unknown { Certainty::Heuristic } else { Certainty::Exact };
    let result = json!({
        "verdict": rec.verdict,
        "certainty": certainty,
        "rule": rec.rule,
        "lambda0": float(rec.lambda0),
        "partial_sum": rec.partial_sum.map(|s| float_quantity(s, Certainty::LowerBound)),
        "evidence": rec.evidence,
    });
    let table = Table::pairs(vec![
        ("verdict", recurrence_text(rec.verdict).into()),
        ("rule", serde_json::to_value(rec.rule).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()),
        ("lambda0", rec.lambda0.to_string()),
        ("partial_sum", opt(rec.partial_sum)),
    ]);
    Ok(Outcome::new(result, table))
}

fn green<S: Scalar>(ctx: &Ctx<S>, v: &str, w: &str) -> Run {
    let (v, w) = (VertexId::new(v)?, VertexId::new(w)?);
    let lambda = ctx.lambda()?;
    let est = green_series(ctx.g, &v, &w, &lambda, &ctx.cfg)?;
    let fp: S = first_passage_series_to(ctx.g, std::slice::from_ref(&v), &w, &lambda, &ctx.cfg)?
        .remove(0)
        .into_iter()
        .fold(S::zero(), |a, t| a + t);
    let result = json!({
        "v": v.to_string(),
        "w": w.to_string(),
        "lambda": output::scalar(&lambda),
        "green": {
            "lower": quantity(&est.lower, Certainty::LowerBound),
            "upper": est.upper.as_ref().map(|u| quantity(u, Certainty::Heuristic)),
            "converged": est.converged,
            "diverged": est.diverged,
            "exact_terms": est.exact_terms,
        },
        "first_passage": quantity(&fp, Certainty::LowerBound),
    });
    let mut table = Table::new(&["v", "w", "lambda", "lower", "upper", "converged", "diverged", "first_passage"]);
    table.push(vec![
        v.to_string(),
        w.to_string(),
        lambda.to_string(),
        est.lower.to_string(),
        opt(est.upper.as_ref()),
        est.converged.to_string(),
        est.diverged.to_string(),
        fp.to_string(),
    ]);
    let mut out = Outcome::new(result, table);
    if est.diverged {
        out.notes.push("partial sums look divergent; the lower bound is still valid".into());
    }
    Ok(out)
}

fn label_json(label: &PointLabel) -> Value {
    match label {
        PointLabel::Harmonic => json!({ "type": "harmonic" }),
        PointLabel::Emitter(v) => json!({ "type": "emitter", "vertex": v.to_string() }),
        PointLabel::Sink(v) => json!({ "type": "sink", "vertex": v.to_string() }),
        PointLabel::Unclassified => json!({ "type": "unclassified" }),
    }
}

fn solve<S: Scalar>(ctx: &Ctx<S>, v0: &Option<String>) -> Run {
    let f = ctx.g.as_finite().ok_or_else(|| Failure::Usage("solve needs a finite graph (--graph FILE)".into()))?;
    let lambda = ctx.lambda()?;
    let v0 = ctx.base(v0)?;
    let cone = solve_finite(f, &lambda, &v0)?;
    let certainty = Certainty::of_arithmetic::<S>();
    let points: Vec<Value> = cone
        .extreme_points
        .iter()
        .zip(&cone.labels)
        .map(|(p, l)| json!({ "label": label_json(l), "vector": vector(&p.values, certainty) }))
        .collect();
    let rays: Vec<Value> = cone.recession_rays.iter().map(|r| vector(r, certainty)).collect();
    let mut table = Table::new(&["point", "vertex", "value"]);
    for (i, p) in cone.extreme_points.iter().enumerate() {
        for (v, x) in &p.values {
            table.push(vec![i.to_string(), v.to_string(), x.to_string()]);
        }
    }
    let mut result = json!({
        "base_vertex": v0.to_string(),
        "lambda": output::scalar(&lambda),
        "extreme_points": points,
        "count": cone.extreme_points.len(),
        "recession_rays": rays,
        "empty": cone.is_empty(),
    });
    if cone.is_empty() {
        let cert = certify_no_solution(ctx.g, &lambda, &ctx.cfg)?;
        result["certificate"] = cert.as_ref().map(certificate_json).unwrap_or(Value::Null);
        return Err(Failure::Domain {
            kind: "infeasible".into(),
            message: format!("no almost harmonic vector is positive at {v0} for lambda = {lambda}"),
            partial: Some(Box::new(Outcome::new(result, table))),
        });
    }
    Ok(Outcome::new(result, table))
}

fn certificate_json(c: &kmsgraph::NoSolutionCertificate) -> Value {
    json!({
        "witness_vertex": c.witness_vertex.to_string(),
        "exponent": c.exponent,
        "power_entry": float_quantity(c.value, Certainty::LowerBound),
        "lambda_power": float(c.lambda.powf(c.exponent as f64)),
    })
}

fn certify<S: Scalar>(ctx: &Ctx<S>) -> Run {
    let lambda = ctx.lambda()?;
    let cert = certify_no_solution(ctx.g, &lambda, &ctx.cfg)?;
    let mut table = Table::new(&["found", "witness_vertex", "exponent", "power_entry"]);
    match &cert {
        Some(c) => {
            table.push(vec!["true".into(), c.witness_vertex.to_string(), c.exponent.to_string(), c.value.to_string()])
        }
        None => table.push(vec!["false".into(), String::new(), String::new(), String::new()]),
    }
    let result = json!({
        "lambda": output::scalar(&lambda),
        "found": cert.is_some(),
        "certificate": cert.as_ref().map(certificate_json),
    });
    let mut out = Outcome::new(result, table);
    if cert.is_none() {
        out.notes.push("no witness within the depth; this does not prove that solutions exist".into());
    }
    Ok(out)
}

fn extend<S: Scalar>(ctx: &Ctx<S>, subset: &Path, order: OrderArg, window: Option<usize>) -> Run {
    let lambda = ctx.lambda()?;
    let eta: BTreeMap<VertexId, S> = read_vector(subset)?;
    let horizon = match (ctx.g, window) {
        (GraphSource::Generator(_), Some(r)) => Some(ctx.window(r)?),
        _ => None,
    };
    let order = match order {
        OrderArg::Queue => SweepOrder::Queue,
        OrderArg::Stack => SweepOrder::Stack,
    };
    let xi = extend_from_hereditary(ctx.g, &lambda, &eta, horizon.as_deref(), order, &ctx.cfg)?;
    let certainty = Certainty::of_arithmetic::<S>();
    let result = json!({ "lambda": output::scalar(&lambda), "vector": vector(&xi.values, certainty) });
    Ok(Outcome::new(result, Table::vector(&xi.values)))
}

fn riesz<S: Scalar>(ctx: &Ctx<S>, path: &Path) -> Run {
    let lambda = ctx.lambda()?;
    let values: BTreeMap<VertexId, S> = read_vector(path)?;
    let psi = HarmonicVector::new(lambda.clone(), values, VectorKind::AlmostHarmonic);
    let pair = riesz_decompose(ctx.g, &psi, &ctx.cfg)?;
    let phi_certainty = if S::EXACT && pair.reconstruction_residual == 0.0 && pair.converged {
        Certainty::Exact
    } else {
        Certainty::Heuristic
    };
    let result = json!({
        "lambda": output::scalar(&lambda),
        "phi": vector(&pair.phi.values, phi_certainty),
        "k": vector(&pair.k, Certainty::of_arithmetic::<S>()),
        "reconstruction_residual": float(pair.reconstruction_residual),
        "iterations": pair.iterations,
        "converged": pair.converged,
    });
    let mut table = Table::new(&["vertex", "phi", "k"]);
    for (v, x) in &pair.phi.values {
        table.push(vec![v.to_string(), x.to_string(), opt(pair.k.get(v))]);
    }
    let mut out = Outcome::new(result, table);
    if !pair.converged {
        out.notes.push("descent stopped at the depth cap before settling".into());
    }
    Ok(out)
}

fn kernel<S: Scalar>(ctx: &Ctx<S>, v0: &Option<String>, target: &str, v: &Option<String>, radius: usize) -> Run {
    let lambda = ctx.lambda()?;
    let v0 = ctx.base(v0)?;
    let target = VertexId::new(target)?;
    let probe = match v {
        Some(v) => vec![VertexId::new(v.as_str())?],
        None => ctx.window(radius)?,
    };
    let mut entries = Vec::new();
    let mut table = Table::new(&["v", "target", "value", "lower", "upper"]);
    for v in &probe {
        let k = martin_kernel(ctx.g, &lambda, &v0, v, &target, &ctx.cfg)?;
        entries.push(json!({
            "v": v.to_string(),
            "value": quantity(&k.value, Certainty::Heuristic),
            "lower": k.lower.as_ref().map(|x| quantity(x, Certainty::LowerBound)),
            "upper": k.upper.as_ref().map(|x| quantity(x, Certainty::Heuristic)),
        }));
        table.push(vec![
            v.to_string(),
            target.to_string(),
            k.value.to_string(),
            opt(k.lower.as_ref()),
            opt(k.upper.as_ref()),
        ]);
    }
    let result = json!({
        "lambda": output::scalar(&lambda),
        "v0": v0.to_string(),
        "target": target.to_string(),
        "kernel": entries,
    });
    Ok(Outcome::new(result, table))
}

fn limit<S: Scalar>(ctx: &Ctx<S>, v0: &Option<String>, targets: &[VertexId], radius: usize) -> Run {
    let lambda = ctx.lambda()?;
    let v0 = ctx.base(v0)?;
    let window = ctx.window(radius)?;
    let report = kernel_limit(ctx.g, &lambda, &v0, targets, &window, &ctx.cfg)?;
    let converged = report.verdict == LimitVerdict::Converged;
    let mut table = Table::new(&["k", "target", "vertex", "value"]);
    for (v, traj) in &report.trajectories {
        for (k, (t, x)) in report.sequence.iter().zip(traj).enumerate() {
            table.push(vec![(k + 1).to_string(), t.to_string(), v.to_string(), x.to_string()]);
        }
    }
    let result = json!({
        "lambda": output::scalar(&lambda),
        "v0": v0.to_string(),
        "sequence": ids(&report.sequence),
        "window": ids(&window),
        "limit": vector(&report.limit_estimate.values, Certainty::Heuristic),
        "cauchy_gap": float(report.cauchy_gap),
        "verdict": if converged { "converged" } else { "inconclusive" },
    });
    let mut out = Outcome::new(result, table);
    if converged {
        out.notes.push("a converged limit is almost harmonic on the window; extremality is not claimed".into());
    }
    Ok(out)
}

fn sample_paths<S: Scalar>(
    ctx: &Ctx<S>,
    psi: &Path,
    v0: &Option<String>,
    radius: usize,
    sample: &SampleConfig,
    tsv_out: Option<&Path>,
) -> Run {
    let lambda = ctx.lambda()?;
    let values: BTreeMap<VertexId, S> = read_vector(psi)?;
    let psi = HarmonicVector::new(lambda.clone(), values, VectorKind::Harmonic);
    let v0 = ctx.base(v0)?;
    let window = ctx.window(radius)?;
    let kernel = h_transform(ctx.g, &psi, &ctx.cfg)?;
    let report = sample_boundary_paths(ctx.g, &kernel, &v0, &window, sample, &ctx.cfg)?;

    if let Some(path) = tsv_out {
        let mut steps = Table::new(&["path", "step", "vertex", "deviation"]);
        for p in &report.paths {
            let devs: BTreeMap<usize, Option<f64>> = p.deviations.iter().cloned().collect();
            for (step, v) in p.vertices.iter().enumerate() {
                let d = devs.get(&step).copied().flatten();
                steps.push(vec![p.index.to_string(), step.to_string(), v.to_string(), opt(d)]);
            }
        }
        std::fs::write(path, steps.render()).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }

    let mut table = Table::new(&["path", "final_vertex", "final_deviation", "close"]);
    let mut paths = Vec::with_capacity(report.paths.len());
    for p in &report.paths {
        let last = p.vertices.last().map(VertexId::to_string).unwrap_or_default();
        let dev = p.deviations.last().and_then(|(_, d)| *d);
        table.push(vec![p.index.to_string(), last.clone(), opt(dev), p.close_at_horizon.to_string()]);
        paths.push(json!({
            "index": p.index,
            "final_vertex": last,
            "final_deviation": dev.map(float),
            "close_at_horizon": p.close_at_horizon,
        }));
    }
    let result = json!({
        "lambda": output::scalar(&lambda),
        "v0": v0.to_string(),
        "window": ids(&report.window),
        "seed": report.seed,
        "paths": sample.paths,
        "horizon": sample.horizon,
        "closeness": sample.closeness,
        "fraction_close": float_quantity(report.fraction_close, Certainty::Heuristic),
        "max_row_error": float(kernel.max_row_error()),
        "path_summaries": paths,
    });
    Ok(Outcome::new(result, table))
}

fn check_file<S: Scalar>(ctx: &Ctx<S>, path: &Path) -> Run {
    let lambda = ctx.lambda()?;
    let values: BTreeMap<VertexId, S> = read_vector(path)?;
    let report = match ctx.g {
        GraphSource::Finite(_) => check_vector(ctx.g, &lambda, &values, ctx.cfg.tol, &ctx.cfg)?,
        GraphSource::Generator(_) => {
            let probe: Vec<VertexId> = values.keys().cloned().collect();
            check_vector_on(ctx.g, &lambda, &values, &probe, ctx.cfg.tol, &ctx.cfg)?
        }
    };
    let certainty = Certainty::of_arithmetic::<S>();
    let result = json!({
        "lambda": output::scalar(&lambda),
        "is_almost_harmonic": report.is_almost_harmonic,
        "is_harmonic": report.is_harmonic,
        "positivity_ok": report.positivity_ok,
        "residuals": vector(&report.residuals, certainty),
        "violations": ids(&report.violations),
        "slack": ids(&report.slack),
        "unprobed": ids(&report.unprobed),
    });
    let mut table = Table::new(&["vertex", "value", "residual"]);
    for (v, x) in &values {
        table.push(vec![v.to_string(), x.to_string(), opt(report.residuals.get(v))]);
    }
    Ok(Outcome::new(result, table))
}

fn check_suite(suite: &str, seed: u64) -> Run {
    let report = invariants::run_suite(suite, seed)?;
    let mut table = Table::new(&["property", "cases", "failures", "first_failure"]);
    for p in &report.properties {
        table.push(vec![p.name.clone(), p.cases.to_string(), p.failures.to_string(), opt(p.first_failure.as_ref())]);
    }
    let result = json!({
        "suite": report.suite,
        "seed": report.seed,
        "passed": report.passed,
        "failed": report.failed,
        "all_passed": report.all_passed(),
        "properties": report.properties,
    });
    let outcome = Outcome::new(result, table);
    if report.all_passed() {
        Ok(outcome)
    } else {
        Err(Failure::Domain {
            kind: "suite_failed".into(),
            message: format!("{} property case(s) failed", report.failed),
            partial: Some(Box::new(outcome)),
        })
    }
}
