use std::fmt;

use crate::field::Field;
use crate::network::{validate_instance, InstanceBuilder, NetworkError, NetworkInstance};

use super::IoError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.message)
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn int<T: std::str::FromStr>(tok: &str, line: usize, col: usize, what: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| ParseError { line, col, message: format!("expected {what}, found `{tok}`") })
}

/// Parses a `keycast v1` document and validates the resulting instance.
pub fn parse_instance(text: &str) -> Result<NetworkInstance, IoError> {
    let mut errors = Vec::new();
    let mut header = false;
    let mut builder: Option<InstanceBuilder> = None;
    let mut saw_adversary = false;
    let has_field = text.lines().any(|l| tokens(l.split('#').next().unwrap_or("")).first().map(|t| t.1) == Some("field"));
    if !has_field {
        return Err(IoError::Parse(vec![ParseError { line: 1, col: 1, message: "missing `field` directive".into() }]));
    }
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(&(col, head)) = toks.first() else { continue };
        let err = |col: usize, message: String| ParseError { line, col, message };
        if !header {
            if head == "keycast" && toks.get(1).map(|t| t.1) == Some("v1") && toks.len() == 2 {
                header = true;
            } else {
                errors.push(err(col, "expected header `keycast v1`".into()));
                return Err(IoError::Parse(errors));
            }
            continue;
        }
        if builder.is_none() && head != "field" {
            errors.push(err(col, format!("expected `field <q>` before `{head}`")));
            return Err(IoError::Parse(errors));
        }
        match head {
            "keycast" => errors.push(err(col, "duplicate header".into())),
            "field" => {
                if builder.is_some() {
                    errors.push(err(col, "duplicate `field` directive".into()));
                    continue;
                }
                let Some(&(c, tok)) = toks.get(1) else {
                    errors.push(err(col, "`field` needs a modulus".into()));
                    return Err(IoError::Parse(errors));
                };
                let q: u32 = match int(tok, line, c, "a prime modulus") {
                    Ok(q) => q,
                    Err(e) => {
                        errors.push(e);
                        return Err(IoError::Parse(errors));
                    }
                };
                match Field::new(q) {
                    Ok(f) => builder = Some(InstanceBuilder::new(f)),
                    Err(e) => {
                        errors.push(err(c, e.to_string()));
                        return Err(IoError::Parse(errors));
                    }
                }
            }
            "node" => {
                let b = builder.as_mut().expect("field seen");
                let Some(&(_, name)) = toks.get(1) else {
                    errors.push(err(col, "`node` needs a name".into()));
                    continue;
                };
                let mut is_source = false;
                let mut sets = Vec::new();
                let mut k = 2;
                while k < toks.len() {
                    let (c, t) = toks[k];
                    match t {
                        "source" => is_source = true,
                        "terminal" => match toks.get(k + 1) {
                            Some(&(c2, n)) => {
                                k += 1;
                                match int::<usize>(n, line, c2, "a terminal set index") {
                                    Ok(0) => errors.push(err(c2, "terminal sets are numbered from 1".into())),
                                    Ok(i) => sets.push(i - 1),
                                    Err(e) => errors.push(e),
                                }
                            }
                            None => errors.push(err(c, "`terminal` needs a set index".into())),
                        },
                        other => errors.push(err(c, format!("unknown node attribute `{other}`"))),
                    }
                    k += 1;
                }
                if let Err(e) = b.add_node(name, is_source, &sets) {
                    errors.push(err(toks[1].0, e.to_string()));
                }
            }
            "edge" => {
                let b = builder.as_mut().expect("field seen");
                if toks.len() < 3 || toks.len() > 4 {
                    errors.push(err(col, "expected `edge <tail> <head> [x<k>]`".into()));
                    continue;
                }
                let mult = match toks.get(3) {
                    None => 1,
                    Some(&(c, t)) => match t.strip_prefix('x').map(|m| int::<usize>(m, line, c, "a multiplicity")) {
                        Some(Ok(m)) if m >= 1 => m,
                        _ => {
                            errors.push(err(c, format!("bad multiplicity `{t}`")));
                            continue;
                        }
                    },
                };
                for &(c, name) in &toks[1..3] {
                    if let Err(e) = b.id(name) {
                        errors.push(err(c, e.to_string()));
                    }
                }
                let _ = b.add_edge(toks[1].1, toks[2].1, mult);
            }
            "adversary" => {
                let b = builder.as_mut().expect("field seen");
                if saw_adversary {
                    errors.push(err(col, "duplicate `adversary` directive".into()));
                }
                saw_adversary = true;
                let (mut ell, mut x) = (None, None);
                for &(c, t) in &toks[1..] {
                    let parsed = match t.split_once('=') {
                        Some(("ell", v)) => int(v, line, c, "an integer").map(|v| ell = Some(v)),
                        Some(("sources", v)) => int(v, line, c, "an integer").map(|v| x = Some(v)),
                        _ => Err(err(c, format!("expected `ell=<n>` or `sources=<n>`, found `{t}`"))),
                    };
                    if let Err(e) = parsed {
                        errors.push(e);
                    }
                }
                match (ell, x) {
                    (Some(ell), Some(x)) => b.set_adversary(ell, x),
                    _ => errors.push(err(col, "`adversary` needs both `ell=` and `sources=`".into())),
                }
            }
            "eaves" => {
                let b = builder.as_mut().expect("field seen");
                let rest = content[col - 1 + "eaves".len()..].trim();
                let c = col + content[col - 1..].find('{').unwrap_or(0);
                let Some(inner) = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')) else {
                    errors.push(err(c, "expected `{a,b,...}`".into()));
                    continue;
                };
                let names: Vec<&str> = inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                if let Err(e) = b.add_eaves(&names) {
                    errors.push(err(c, e.to_string()));
                }
            }
            other => errors.push(err(col, format!("unknown directive `{other}`"))),
        }
    }
    if !header {
        errors.push(ParseError { line: 1, col: 1, message: "missing header `keycast v1`".into() });
    }
    if !errors.is_empty() {
        return Err(IoError::Parse(errors));
    }
    let inst = builder.expect("field seen").build_unchecked();
    validate_instance(&inst).map_err(IoError::Validation)?;
    Ok(inst)
}

/// Canonical text; consecutive parallel edges are grouped with `x<k>`.
pub fn emit_instance(inst: &NetworkInstance) -> String {
    let mut out = format!("keycast v1\nfield {}\n", inst.q());
    for node in inst.nodes() {
        out.push_str("node ");
        out.push_str(&node.name);
        if node.is_source {
            out.push_str(" source");
        }
        for &s in &node.terminal_sets {
            out.push_str(&format!(" terminal {}", s + 1));
        }
        out.push('\n');
    }
    let edges = inst.edges();
    let mut i = 0;
    while i < edges.len() {
        let mut j = i;
        while j + 1 < edges.len() && edges[j + 1] == edges[i] {
            j += 1;
        }
        let (a, b) = edges[i];
        out.push_str(&format!("edge {} {}", inst.name(a), inst.name(b)));
        if j > i {
            out.push_str(&format!(" x{}", j - i + 1));
        }
        out.push('\n');
        i = j + 1;
    }
    out.push_str(&format!("adversary ell={} sources={}\n", inst.ell(), inst.max_eavesdropped_sources()));
    for set in inst.explicit_eaves() {
        let names: Vec<&str> = set.iter().map(|&v| inst.name(v)).collect();
        out.push_str(&format!("eaves {{{}}}\n", names.join(",")));
    }
    out
}

impl From<NetworkError> for IoError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::Invalid(v) => IoError::Validation(v),
            other => IoError::BadParams(other.to_string()),
        }
    }
}
