//! Graph and constraint file formats.
//!
//! Vertex ids in every file are 1-based; the library works with 0-based ids.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nearcut::Graph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    OutOfRange { line: usize, vertex: usize, n: usize },
    #[error("unsupported MatrixMarket header: {0}")]
    Header(String),
    #[error("vertex {0} is in both sets")]
    Overlap(usize),
    #[error("the {0} set is empty")]
    EmptySet(&'static str),
    #[error("no vertices")]
    Empty,
    #[error(transparent)]
    Graph(#[from] nearcut::Error),
}

pub type Result<T> = std::result::Result<T, ParseError>;

/// Reads `path`, or `$NEARCUT_FIXTURES/path` when `path` does not exist and
/// the variable is set.
pub fn read_input(path: &Path) -> Result<String> {
    let resolved = resolve(path);
    std::fs::read_to_string(&resolved).map_err(|source| ParseError::Io { path: resolved, source })
}

fn resolve(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("NEARCUT_FIXTURES") {
        Some(dir) => {
            let alt = Path::new(&dir).join(path);
            if alt.exists() {
                alt
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

fn strip_comment(line: &str, marker: char) -> &str {
    line.split(marker).next().unwrap_or("").trim()
}

fn parse_id(tok: &str, line: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(0) => Err(ParseError::Malformed { line, msg: "vertex ids start at 1".into() }),
        Ok(v) => Ok(v),
        Err(_) => Err(ParseError::Malformed { line, msg: format!("bad vertex id {tok:?}") }),
    }
}

fn parse_weight(tok: &str, line: usize) -> Result<f64> {
    let w: f64 = tok.parse().map_err(|_| ParseError::Malformed { line, msg: format!("bad weight {tok:?}") })?;
    if !w.is_finite() {
        return Err(ParseError::Malformed { line, msg: format!("weight {tok:?} is not finite") });
    }
    if w < 0.0 {
        return Err(ParseError::NegativeWeight { line, weight: w });
    }
    Ok(w)
}

/// Collects 1-based triples, rejecting self-loops and repeated pairs.
struct EdgeCollector {
    seen: BTreeSet<(usize, usize)>,
    triples: Vec<(usize, usize, f64)>,
    max_id: usize,
}

impl EdgeCollector {
    fn new() -> Self {
        Self { seen: BTreeSet::new(), triples: Vec::new(), max_id: 0 }
    }

    fn push(&mut self, i: usize, j: usize, w: f64, line: usize) -> Result<()> {
        if i == j {
            return Err(ParseError::SelfLoop { line, vertex: i });
        }
        let key = (i.min(j), i.max(j));
        if !self.seen.insert(key) {
            return Err(ParseError::DuplicateEdge { line, i: key.0, j: key.1 });
        }
        self.max_id = self.max_id.max(key.1);
        self.triples.push((i, j, w));
        Ok(())
    }

    fn finish(self, n: Option<usize>) -> Result<Graph> {
        let n = n.unwrap_or(self.max_id);
        if n == 0 {
            return Err(ParseError::Empty);
        }
        Ok(Graph::new(n, self.triples.into_iter().map(|(i, j, w)| (i - 1, j - 1, w)))?)
    }
}

/// Edge list: `i j [w]` per line, `#` comments, optional `n <count>` header.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut edges = EdgeCollector::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw, '#');
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks[0] == "n" {
            if toks.len() != 2 || n.is_some() {
                return Err(ParseError::Malformed { line, msg: "expected a single header \"n <count>\"".into() });
            }
            let count = toks[1].parse::<usize>().map_err(|_| ParseError::Malformed { line, msg: format!("bad vertex count {:?}", toks[1]) })?;
            n = Some(count);
            continue;
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(ParseError::Malformed { line, msg: format!("expected \"i j [w]\", got {body:?}") });
        }
        let i = parse_id(toks[0], line)?;
        let j = parse_id(toks[1], line)?;
        if let Some(n) = n {
            for v in [i, j] {
                if v > n {
                    return Err(ParseError::OutOfRange { line, vertex: v, n });
                }
            }
        }
        let w = toks.get(2).map_or(Ok(1.0), |t| parse_weight(t, line))?;
        edges.push(i, j, w, line)?;
    }
    edges.finish(n)
}

/// Coordinate MatrixMarket with a `real`, `integer` or `pattern` field and
/// `symmetric` symmetry.
pub fn parse_matrix_market(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ParseError::Empty)?;
    let h: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(ParseError::Header(header.to_string()));
    }
    let pattern = match h[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(ParseError::Header(format!("field {other:?} is not supported"))),
    };
    if h[4] != "symmetric" {
        return Err(ParseError::Header(format!("symmetry {:?} is not supported", h[4])));
    }
    let mut size = None;
    let mut edges = EdgeCollector::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let body = strip_comment(raw, '%');
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some((rows, _)) = size else {
            if toks.len() != 3 {
                return Err(ParseError::Malformed { line, msg: "expected \"rows cols entries\"".into() });
            }
            let dims: Vec<usize> = toks
                .iter()
                .map(|t| t.parse::<usize>().map_err(|_| ParseError::Malformed { line, msg: format!("bad size {t:?}") }))
                .collect::<Result<_>>()?;
            if dims[0] != dims[1] {
                return Err(ParseError::Malformed { line, msg: "matrix is not square".into() });
            }
            size = Some((dims[0], dims[2]));
            continue;
        };
        let want = if pattern { 2 } else { 3 };
        if toks.len() != want {
            return Err(ParseError::Malformed { line, msg: format!("expected {want} fields, got {}", toks.len()) });
        }
        let i = parse_id(toks[0], line)?;
        let j = parse_id(toks[1], line)?;
        for v in [i, j] {
            if v > rows {
                return Err(ParseError::OutOfRange { line, vertex: v, n: rows });
            }
        }
        if i == j {
            return Err(ParseError::SelfLoop { line, vertex: i });
        }
        let w = if pattern { 1.0 } else { parse_weight(toks[2], line)? };
        edges.push(i, j, w, line)?;
    }
    let (rows, _) = size.ok_or(ParseError::Empty)?;
    edges.finish(Some(rows))
}

/// Parses by extension: `.mtx` is MatrixMarket, anything else an edge list.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = read_input(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")) {
        parse_matrix_market(&text)
    } else {
        parse_edge_list(&text)
    }
}

/// Edge-list text that [`parse_edge_list`] reads back to the same graph.
/// Weights use the shortest decimal that round-trips.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (&(i, j), w) in g.edges().iter().zip(g.weights()) {
        let _ = writeln!(out, "{} {} {:?}", i + 1, j + 1, w);
    }
    out
}

/// One `+ v` or `- v` line; the Unicode minus sign is accepted too.
fn parse_signed(body: &str, line: usize) -> Result<(bool, usize)> {
    let mut chars = body.chars();
    let sign = chars.next();
    let plus = match sign {
        Some('+') => true,
        Some('-') | Some('\u{2212}') => false,
        _ => return Err(ParseError::Malformed { line, msg: format!("expected \"+ v\" or \"- v\", got {body:?}") }),
    };
    let rest = chars.as_str().trim();
    Ok((plus, parse_id(rest, line)?))
}

/// Membership constraint: `+ v` puts `v` in V⁺, `- v` in V⁻. Returns 0-based
/// `(minus, plus)`, each sorted and deduplicated.
pub fn parse_membership(text: &str, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut minus = BTreeSet::new();
    let mut plus = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw, '#');
        if body.is_empty() {
            continue;
        }
        let (is_plus, v) = parse_signed(body, line)?;
        if v > n {
            return Err(ParseError::OutOfRange { line, vertex: v, n });
        }
        if is_plus { plus.insert(v - 1) } else { minus.insert(v - 1) };
    }
    if let Some(&v) = minus.intersection(&plus).next() {
        return Err(ParseError::Overlap(v + 1));
    }
    if minus.is_empty() {
        return Err(ParseError::EmptySet("minus"));
    }
    if plus.is_empty() {
        return Err(ParseError::EmptySet("plus"));
    }
    Ok((minus.into_iter().collect(), plus.into_iter().collect()))
}

/// A sweep query: one vertex added to one side of a base constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SweepQuery {
    /// 0-based vertex id.
    pub vertex: usize,
    pub plus: bool,
}

/// Sweep file: one `+ v` or `- v` query per line.
pub fn parse_sweep(text: &str, n: usize) -> Result<Vec<SweepQuery>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw, '#');
        if body.is_empty() {
            continue;
        }
        let (plus, v) = parse_signed(body, line)?;
        if v > n {
            return Err(ParseError::OutOfRange { line, vertex: v, n });
        }
        out.push(SweepQuery { vertex: v - 1, plus });
    }
    if out.is_empty() {
        return Err(ParseError::EmptySet("sweep"));
    }
    Ok(out)
}
