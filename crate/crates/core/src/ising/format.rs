//! Plain-text graph files.
//!
//! ```text
//! ising <num_spins> <R>
//! h <i> <value>
//! e <i> <j> <Jij>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Output lists only
//! nonzero fields and edges in `(i, j)` order, so store followed by load is
//! the identity on the coupling data and writing is deterministic.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::graph::{GraphError, IsingGraph};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing `ising` header")]
    MissingHeader,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<IsingGraph, FormatError> {
    let mut header: Option<(usize, u32)> = None;
    let mut fields = Vec::new();
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut toks = content.split_whitespace();
        let kind = toks.next().unwrap_or_default();
        match kind {
            "ising" => {
                if header.is_some() {
                    return Err(parse_err(line, "duplicate header"));
                }
                let n: usize = field(toks.next(), line, "spin count")?;
                let r: u32 = field(toks.next(), line, "resolution")?;
                fields = vec![0i64; n];
                header = Some((n, r));
            }
            "h" | "e" if header.is_none() => return Err(FormatError::MissingHeader),
            "h" => {
                let n = fields.len();
                let i: usize = field(toks.next(), line, "spin index")?;
                let v: i64 = field(toks.next(), line, "field value")?;
                let slot = fields
                    .get_mut(i)
                    .ok_or(GraphError::IndexOutOfRange { index: i, num_spins: n })?;
                *slot = v;
            }
            "e" => {
                let i: usize = field(toks.next(), line, "spin index")?;
                let j: usize = field(toks.next(), line, "spin index")?;
                let w: i64 = field(toks.next(), line, "coupling")?;
                edges.push((i, j, w));
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
        if toks.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
    }

    let (n, r) = header.ok_or(FormatError::MissingHeader)?;
    Ok(IsingGraph::from_parts(n, r, fields, edges)?)
}

pub fn render_graph(graph: &IsingGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ising {} {}", graph.num_spins(), graph.resolution());
    for (i, &h) in graph.fields().iter().enumerate() {
        if h != 0 {
            let _ = writeln!(out, "h {i} {h}");
        }
    }
    for e in graph.edges() {
        let _ = writeln!(out, "e {} {} {}", e.i, e.j, e.weight);
    }
    out
}

pub fn load_graph(path: &Path) -> Result<IsingGraph, FormatError> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn store_graph(graph: &IsingGraph, path: &Path) -> Result<(), FormatError> {
    std::fs::write(path, render_graph(graph))?;
    Ok(())
}
