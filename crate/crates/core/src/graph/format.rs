//! `kmsgraph v1` text documents.
//!
//! ```text
//! kmsgraph v1
//! [mode] exact
//! [edges]
//! u v 1
//! v w 1/2
//! ```
//!
//! or a single generator line such as `gen:zwalk p=1/2 q=1/2`.

use std::collections::HashSet;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::{FamilySpec, FiniteGraph, GraphSource, VertexId};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Scalar};

/// Arithmetic mode of a graph, fixed when the document is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Float,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

/// A parsed document, independent of the scalar type it will be built with.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphDocument {
    Table { mode: Mode, edges: Vec<(VertexId, VertexId, BigRational)> },
    Generator(FamilySpec),
}

impl GraphDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first_no, first) = lines.next().ok_or(Error::Syntax { line: 1, message: "empty document".into() })?;
        if let Some(rest) = first.strip_prefix("gen:") {
            if let Some((line, _)) = lines.next() {
                return Err(Error::Syntax { line, message: "generator documents are a single line".into() });
            }
            return Self::parse_generator(rest).map_err(|e| match e {
                Error::Syntax { message, .. } => Error::Syntax { line: first_no, message },
                other => other,
            });
        }
        if first != "kmsgraph v1" {
            return Err(Error::Syntax { line: first_no, message: "expected header `kmsgraph v1`".into() });
        }
        let mut mode = Mode::Exact;
        let mut in_edges = false;
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        for (line, text) in lines {
            let syntax = |message: String| Error::Syntax { line, message };
            if let Some(m) = text.strip_prefix("[mode]") {
                if in_edges {
                    return Err(syntax("[mode] must precede [edges]".into()));
                }
                mode = m.trim().parse().map_err(|_| syntax(format!("bad mode `{}`", m.trim())))?;
                continue;
            }
            if text == "[edges]" {
                if in_edges {
                    return Err(syntax("duplicate [edges] section".into()));
                }
                in_edges = true;
                continue;
            }
            if !in_edges {
                return Err(syntax(format!("unexpected line `{text}` before [edges]")));
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            let [src, dst, weight] = fields[..] else {
                return Err(syntax("expected `SRC DST WEIGHT`".into()));
            };
            let src = VertexId::new(src).map_err(|_| syntax("bad source".into()))?;
            let dst = VertexId::new(dst).map_err(|_| syntax("bad target".into()))?;
            let w = parse_rational(weight).map_err(|_| syntax(format!("bad weight `{weight}`")))?;
            if !w.is_positive() {
                return Err(Error::NonPositiveWeight { src, dst });
            }
            if !seen.insert((src.clone(), dst.clone())) {
                return Err(Error::DuplicateEdge { src, dst });
            }
            edges.push((src, dst, w));
        }
        if !in_edges {
            return Err(Error::Syntax { line: first_no, message: "missing [edges] section".into() });
        }
        Ok(GraphDocument::Table { mode, edges })
    }

    /// Parses `NAME key=value ...` (the part after `gen:`; also the CLI `--gen` form).
    pub fn parse_generator(spec: &str) -> Result<Self> {
        let mut parts = spec.split_whitespace();
        let name = parts.next().ok_or(Error::Syntax { line: 1, message: "missing family name".into() })?;
        let mut params = Vec::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Syntax { line: 1, message: format!("expected key=value, got `{p}`") })?;
            params.push((k.to_string(), v.to_string()));
        }
        Ok(GraphDocument::Generator(FamilySpec::parse(name, &params)?))
    }

    /// Mode declared by the document: tables default to exact, generators to float.
    pub fn mode(&self) -> Mode {
        match self {
            GraphDocument::Table { mode, .. } => *mode,
            GraphDocument::Generator(_) => Mode::Float,
        }
    }

    pub fn build<S: Scalar>(&self) -> Result<GraphSource<S>> {
        match self {
            GraphDocument::Table { edges, .. } => Ok(GraphSource::Finite(FiniteGraph::new(
                [],
                edges.iter().map(|(s, d, w)| (s.clone(), d.clone(), S::from_rational(w))),
            )?)),
            GraphDocument::Generator(spec) => Ok(GraphSource::family(spec)),
        }
    }

    /// Serializes a table back to the text format.
    pub fn to_text(&self) -> String {
        match self {
            GraphDocument::Generator(spec) => format!("gen:{spec}\n"),
            GraphDocument::Table { mode, edges } => {
                let mode = match mode {
                    Mode::Exact => "exact",
                    Mode::Float => "float",
                };
                let mut out = format!("kmsgraph v1\n[mode] {mode}\n[edges]\n");
                for (s, d, w) in edges {
                    out.push_str(&format!("{s} {d} {w}\n"));
                }
                out
            }
        }
    }
}

/// Parses a document and builds it with the requested scalar type.
pub fn parse_graph<S: Scalar>(text: &str) -> Result<GraphSource<S>> {
    GraphDocument::parse(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    #[test]
    fn smallest_table() {
        let g: GraphSource<Rational> = parse_graph("kmsgraph v1\n[edges]\nv s 1\n").unwrap();
        let f = g.as_finite().unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.edge_count(), 1);
        let v = VertexId::new("v").unwrap();
        assert_eq!(
            g.out_edges(&v, None).unwrap(),
            vec![(VertexId::new("s").unwrap(), Rational::from_integer(1.into()))]
        );
    }

    #[test]
    fn generator_documents() {
        let g: GraphSource<f64> = parse_graph("gen:loop a=2").unwrap();
        let v = VertexId::new("v").unwrap();
        assert_eq!(g.out_edges(&v, None).unwrap(), vec![(v, 2.0)]);
        let z: GraphSource<Rational> = parse_graph("gen:zwalk p=1/2 q=1/2\n").unwrap();
        let row = z.out_edges(&VertexId::from(0), None).unwrap();
        assert_eq!(row[0], (VertexId::from(1), Rational::new(1.into(), 2.into())));
        assert_eq!(row[1], (VertexId::from(-1), Rational::new(1.into(), 2.into())));
        assert!(matches!(GraphDocument::parse("gen:mystery"), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = GraphDocument::parse("kmsgraph v1\n[edges]\na b 1\na b\n").unwrap_err();
        assert_eq!(err, Error::Syntax { line: 4, message: "expected `SRC DST WEIGHT`".into() });
        let err = GraphDocument::parse("kmsgraph v2\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, .. }));
        let err = GraphDocument::parse("kmsgraph v1\n[edges]\na b x\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }));
        assert!(matches!(GraphDocument::parse("kmsgraph v1\n[edges]\na b 0\n"), Err(Error::NonPositiveWeight { .. })));
        assert!(matches!(
            GraphDocument::parse("kmsgraph v1\n[edges]\na b 1\na b 2\n"),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            GraphDocument::parse("kmsgraph v1\n[edges]\na b -1/2\n"),
            Err(Error::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn mode_and_comments() {
        let doc = GraphDocument::parse("# fixture\nkmsgraph v1\n[mode] float\n\n[edges]\nu v 0.5 # half\n").unwrap();
        assert_eq!(doc.mode(), Mode::Float);
        let g: GraphSource<f64> = doc.build().unwrap();
        assert_eq!(g.out_edges(&VertexId::new("u").unwrap(), None).unwrap()[0].1, 0.5);
    }

    proptest! {
        #[test]
        fn table_text_round_trips(edges in proptest::collection::btree_map((0u8..6, 0u8..6), (1i64..50, 1i64..9), 0..20)) {
            let edges: Vec<_> = edges
                .into_iter()
                .map(|((s, d), (p, q))| (VertexId::from(s as i64), VertexId::from(d as i64), Rational::new(p.into(), q.into())))
                .collect();
            let doc = GraphDocument::Table { mode: Mode::Exact, edges };
            prop_assert_eq!(GraphDocument::parse(&doc.to_text()).unwrap(), doc);
        }
    }
}
