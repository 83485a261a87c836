//! Instance and tree files.

use std::fs;
use std::path::Path;

use alpha_mst::{parse_tsplib, sub_instance, EdgeIndex, Instance};
use anyhow::{bail, Context, Result};

const NATIVE_HEADER: &str = "alpha-mst v1";

/// Which points of the file to keep.
#[derive(Clone, Copy, Debug, Default)]
pub struct Window {
    pub n: Option<usize>,
    pub offset: usize,
}

fn is_native(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l == NATIVE_HEADER)
}

/// Loads a native or TSPLIB instance, optionally cut down to a window.
pub fn load_instance(path: &Path, window: Window) -> Result<Instance<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string();
    let points = if is_native(&text) {
        Instance::<f64>::from_native(stem.clone(), &text)
            .with_context(|| format!("cannot parse {}", path.display()))?
            .points()
            .to_vec()
    } else {
        parse_tsplib::<f64>(&text).with_context(|| format!("cannot parse {}", path.display()))?
    };
    let n = window.n.unwrap_or(points.len().saturating_sub(window.offset));
    let name = if window.n.is_none() && window.offset == 0 {
        stem
    } else {
        format!("{stem}-{}-{n}", window.offset)
    };
    sub_instance(name, &points, window.offset, n).with_context(|| format!("cannot take window of {}", path.display()))
}

/// Parses one `i j` pair per line (0-based); blank lines and `#` comments
/// are skipped.
pub fn parse_tree(text: &str, edges: &EdgeIndex) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = fields[..] else {
            bail!("line {}: expected `i j`, found `{line}`", k + 1);
        };
        let parse = |s: &str| -> Result<usize> {
            s.parse().with_context(|| format!("line {}: `{s}` is not a vertex index", k + 1))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == b || a >= edges.n() || b >= edges.n() {
            bail!("line {}: no edge {{{a}, {b}}} on {} vertices", k + 1, edges.n());
        }
        out.push(edges.id(a, b));
    }
    Ok(out)
}

pub fn format_tree(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a} {b}\n")).collect()
}
