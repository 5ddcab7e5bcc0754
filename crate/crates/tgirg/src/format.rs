//! Plain-text graph format.
//!
//! ```text
//! girg d=<d> lambda=<l> tau=<t> n=<n> seed=<s> p=<p>
//! v <id> <x1> ... <xd> <w>
//! e <u> <v>            (u < v, ascending)
//! ```
//!
//! Reals carry 17 significant digits so `f64` values round-trip bit-exactly.

use std::io::{BufRead, Write};

use crate::error::{GirgError, Result};
use crate::geometry::{ModelParams, TorusPoint, WeightedVertex};
use crate::graph::{AdjacencyList, GirgGraph};
use crate::scalar::Scalar;

/// 17 significant digits: enough for exact f64 round-trips.
pub fn fmt_real<F: Scalar>(x: F) -> String {
    format!("{:.16e}", x)
}

pub fn write_graph<F: Scalar, W: Write>(graph: &GirgGraph<F>, out: &mut W) -> Result<()> {
    let p = &graph.params;
    writeln!(
        out,
        "girg d={} lambda={} tau={} n={} seed={} p={}",
        p.d,
        fmt_real(p.lambda),
        fmt_real(p.tau),
        fmt_real(p.n),
        p.seed,
        fmt_real(p.edge_prob),
    )?;
    for v in &graph.vertices {
        let coords: Vec<String> = v.pos.coords.iter().map(|&c| fmt_real(c)).collect();
        writeln!(out, "v {} {} {}", v.id, coords.join(" "), fmt_real(v.weight))?;
    }
    for (u, v) in graph.adjacency.edges() {
        writeln!(out, "e {} {}", u, v)?;
    }
    Ok(())
}

pub fn graph_to_string<F: Scalar>(graph: &GirgGraph<F>) -> String {
    let mut buf = Vec::new();
    write_graph(graph, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_real<F: Scalar>(s: &str, what: &str) -> Result<F> {
    let x: f64 = s
        .parse()
        .map_err(|_| GirgError::Parse(format!("bad {what}: {s:?}")))?;
    Ok(F::from_f64_lossy(x))
}

fn header_field<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    let tok = tok.ok_or_else(|| GirgError::Parse(format!("missing header field {key}")))?;
    tok.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| GirgError::Parse(format!("expected {key}=..., got {tok:?}")))
}

pub fn read_graph<F: Scalar, R: BufRead>(input: R) -> Result<GirgGraph<F>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| GirgError::Parse("empty input".into()))??;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("girg") {
        return Err(GirgError::Parse("missing girg header".into()));
    }
    let d: usize = header_field(toks.next(), "d")?
        .parse()
        .map_err(|_| GirgError::Parse("bad d".into()))?;
    let lambda = parse_real::<F>(header_field(toks.next(), "lambda")?, "lambda")?;
    let tau = parse_real::<F>(header_field(toks.next(), "tau")?, "tau")?;
    let n = parse_real::<F>(header_field(toks.next(), "n")?, "n")?;
    let seed: u64 = header_field(toks.next(), "seed")?
        .parse()
        .map_err(|_| GirgError::Parse("bad seed".into()))?;
    let edge_prob = parse_real::<F>(header_field(toks.next(), "p")?, "p")?;

    // d0_target is an analysis option, not a graph property; imports get the
    // default.
    let params = ModelParams {
        d,
        lambda,
        tau,
        n,
        d0_target: F::from_f64_lossy(0.25),
        edge_prob,
        seed,
    };
    params.validate()?;

    let mut vertices: Vec<WeightedVertex<F>> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let fields: Vec<&str> = toks.collect();
                if fields.len() != d + 2 {
                    return Err(GirgError::Parse(format!(
                        "vertex line needs id, {d} coords and a weight: {line:?}"
                    )));
                }
                let id: u32 = fields[0]
                    .parse()
                    .map_err(|_| GirgError::Parse(format!("bad vertex id {:?}", fields[0])))?;
                if id as usize != vertices.len() {
                    return Err(GirgError::Parse(format!(
                        "vertex ids must be consecutive from 0, got {id}"
                    )));
                }
                let coords: Result<Vec<F>> =
                    fields[1..=d].iter().map(|s| parse_real::<F>(s, "coordinate")).collect();
                let weight = parse_real::<F>(fields[d + 1], "weight")?;
                vertices.push(WeightedVertex { id, pos: TorusPoint::new(coords?), weight });
            }
            Some("e") => {
                let u: u32 = toks
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GirgError::Parse(format!("bad edge line {line:?}")))?;
                let v: u32 = toks
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GirgError::Parse(format!("bad edge line {line:?}")))?;
                if u >= v {
                    return Err(GirgError::Parse(format!("edges must satisfy u < v: {line:?}")));
                }
                edges.push((u, v));
            }
            other => {
                return Err(GirgError::Parse(format!("unknown line kind {other:?}")));
            }
        }
    }
    let nv = vertices.len();
    for &(u, v) in &edges {
        if v as usize >= nv {
            return Err(GirgError::Parse(format!("edge ({u},{v}) out of range")));
        }
    }
    Ok(GirgGraph {
        params,
        vertices,
        adjacency: AdjacencyList::from_edges(nv, &edges),
    })
}

pub fn read_graph_str<F: Scalar>(s: &str) -> Result<GirgGraph<F>> {
    read_graph(std::io::Cursor::new(s.as_bytes()))
}
