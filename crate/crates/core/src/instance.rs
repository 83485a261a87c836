//! Problem instances: complete Euclidean graphs built from planar points.
//!
//! Two input formats are supported. TSPLIB `.tsp` files contribute their
//! `NODE_COORD_SECTION` only; weights are always recomputed at full precision
//! (TSPLIB's integer rounding of distances is deliberately not applied).
//! The native `.amst` format stores coordinates alone:
//!
//! ```text
//! alpha-mst v1
//! n 3
//! 0.0000000000000000e0 0.0000000000000000e0
//! 1.0000000000000000e0 0.0000000000000000e0
//! 0.0000000000000000e0 1.0000000000000000e0
//! ```
//!
//! Coordinates are written with 17 significant digits so that a write/read
//! cycle reproduces every `f64` bit for bit.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::Point;
use crate::scalar::Scalar;

const NATIVE_HEADER: &str = "alpha-mst v1";

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported EDGE_WEIGHT_TYPE {kind} (need a 2D coordinate type)")]
    UnsupportedWeightType { line: usize, kind: String },
    #[error("no NODE_COORD_SECTION found")]
    MissingCoordinates,
    #[error("NODE_COORD_SECTION is empty")]
    EmptyCoordinates,
    #[error("points {first} and {second} coincide")]
    CoincidentPoints { first: usize, second: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("requested {requested} points but only {available} are available (minimum 2)")]
    SizeOutOfRange { requested: usize, available: usize },
}

/// Bijection between edge ids `0..m` and unordered vertex pairs of `K_n`.
///
/// Ids follow the row-major order of the strict upper triangle:
/// `(0,1), (0,2), .., (0,n-1), (1,2), ..`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeIndex {
    n: usize,
    ends: Vec<(usize, usize)>,
}

impl EdgeIndex {
    pub fn new(n: usize) -> Self {
        let mut ends = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                ends.push((i, j));
            }
        }
        Self { n, ends }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.ends.len()
    }

    /// Edge id of `{i, j}`; symmetric in its arguments.
    #[inline]
    pub fn id(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i < self.n && j < self.n);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * self.n - a * (a + 1) / 2 + (b - a - 1)
    }

    /// Endpoints `(i, j)` with `i < j`.
    #[inline]
    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// The endpoint of `e` that is not `i`.
    #[inline]
    pub fn other(&self, e: usize, i: usize) -> usize {
        let (a, b) = self.ends[e];
        if a == i {
            b
        } else {
            debug_assert_eq!(b, i);
            a
        }
    }

    /// Edge ids of `delta(i)`, ordered by the opposite endpoint.
    pub fn incident(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| j != i).map(move |j| self.id(i, j))
    }
}

/// Complete Euclidean graph over a list of distinct points.
#[derive(Clone, Debug)]
pub struct Instance<S = f64> {
    name: String,
    points: Vec<Point<S>>,
    weights: Vec<S>,
    edges: EdgeIndex,
}

impl<S: Scalar> Instance<S> {
    /// Builds the complete graph; rejects non-finite and coincident points.
    pub fn new(name: impl Into<String>, points: Vec<Point<S>>) -> Result<Self, InstanceError> {
        if points.len() < 2 {
            return Err(InstanceError::SizeOutOfRange {
                requested: points.len(),
                available: points.len(),
            });
        }
        for (index, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(InstanceError::NonFinite { index });
            }
        }
        let edges = EdgeIndex::new(points.len());
        let mut weights = Vec::with_capacity(edges.m());
        for e in 0..edges.m() {
            let (i, j) = edges.ends(e);
            if points[i] == points[j] {
                return Err(InstanceError::CoincidentPoints { first: i, second: j });
            }
            weights.push(points[i].distance(&points[j]));
        }
        Ok(Self {
            name: name.into(),
            points,
            weights,
            edges,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.m()
    }

    pub fn points(&self) -> &[Point<S>] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> Point<S> {
        self.points[i]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, e: usize) -> S {
        self.weights[e]
    }

    #[inline]
    pub fn edges(&self) -> &EdgeIndex {
        &self.edges
    }

    /// Total weight of an edge list.
    pub fn tree_weight(&self, edges: &[usize]) -> S {
        edges.iter().map(|&e| self.weights[e]).sum()
    }

    /// Serializes to the native `.amst` text format.
    pub fn to_native(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{NATIVE_HEADER}").unwrap();
        writeln!(out, "n {}", self.n()).unwrap();
        for p in &self.points {
            writeln!(out, "{:.16e} {:.16e}", p.x.f64(), p.y.f64()).unwrap();
        }
        out
    }

    /// Parses the native `.amst` text format.
    pub fn from_native(name: impl Into<String>, text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, NATIVE_HEADER)) => {}
            Some((line, other)) => {
                return Err(InstanceError::Parse {
                    line,
                    msg: format!("expected header `{NATIVE_HEADER}`, found `{other}`"),
                })
            }
            None => return Err(InstanceError::MissingCoordinates),
        }
        let (line, count) = lines.next().ok_or(InstanceError::MissingCoordinates)?;
        let n = count
            .strip_prefix("n ")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| InstanceError::Parse {
                line,
                msg: format!("expected `n <count>`, found `{count}`"),
            })?;
        let mut points = Vec::with_capacity(n);
        for (line, text) in lines {
            if points.len() == n {
                return Err(InstanceError::Parse {
                    line,
                    msg: "more points than declared".into(),
                });
            }
            let mut it = text.split_whitespace();
            let x = parse_coord::<S>(it.next(), line)?;
            let y = parse_coord::<S>(it.next(), line)?;
            if it.next().is_some() {
                return Err(InstanceError::Parse {
                    line,
                    msg: "expected exactly two coordinates".into(),
                });
            }
            points.push(Point::new(x, y));
        }
        if points.len() != n {
            return Err(InstanceError::Parse {
                line: text.lines().count(),
                msg: format!("declared {n} points, found {}", points.len()),
            });
        }
        Self::new(name, points)
    }
}

fn parse_coord<S: Scalar>(tok: Option<&str>, line: usize) -> Result<S, InstanceError> {
    let tok = tok.ok_or_else(|| InstanceError::Parse {
        line,
        msg: "missing coordinate".into(),
    })?;
    let v: f64 = tok.parse().map_err(|_| InstanceError::Parse {
        line,
        msg: format!("malformed number `{tok}`"),
    })?;
    Ok(S::of(v))
}

const PLANAR_TYPES: &[&str] = &["EUC_2D", "CEIL_2D", "ATT"];

/// Reads the 2D node coordinates of a TSPLIB file, in file order.
///
/// Only coordinates are consumed; display sections and all other keywords
/// are ignored.
pub fn parse_tsplib<S: Scalar>(text: &str) -> Result<Vec<Point<S>>, InstanceError> {
    let mut in_coords = false;
    let mut saw_coords = false;
    let mut points = Vec::new();
    let mut dimension = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if l == "EOF" {
            break;
        }
        let starts_section = l.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if starts_section {
            in_coords = false;
            let (key, value) = match l.split_once(':') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (l, ""),
            };
            match key {
                "NODE_COORD_SECTION" => {
                    in_coords = true;
                    saw_coords = true;
                }
                "EDGE_WEIGHT_TYPE" => {
                    if !PLANAR_TYPES.contains(&value) {
                        return Err(InstanceError::UnsupportedWeightType {
                            line,
                            kind: value.to_string(),
                        });
                    }
                }
                "DIMENSION" => {
                    dimension = Some(value.parse::<usize>().map_err(|_| InstanceError::Parse {
                        line,
                        msg: format!("malformed DIMENSION `{value}`"),
                    })?);
                }
                _ => {}
            }
            continue;
        }
        if !in_coords {
            continue;
        }
        let mut it = l.split_whitespace();
        let _id = it.next();
        let x = parse_coord::<S>(it.next(), line)?;
        let y = parse_coord::<S>(it.next(), line)?;
        if it.next().is_some() {
            return Err(InstanceError::Parse {
                line,
                msg: "expected `<id> <x> <y>` (3D coordinates are not supported)".into(),
            });
        }
        points.push(Point::new(x, y));
    }

    if !saw_coords {
        return Err(InstanceError::MissingCoordinates);
    }
    if points.is_empty() {
        return Err(InstanceError::EmptyCoordinates);
    }
    if let Some(d) = dimension {
        if d != points.len() {
            return Err(InstanceError::Parse {
                line: text.lines().count(),
                msg: format!("DIMENSION is {d} but {} coordinates were read", points.len()),
            });
        }
    }
    Ok(points)
}

/// Instance over `points[offset .. offset + n]`.
///
/// The standard protocol uses `offset = 0` (the first `n` points of a file).
pub fn sub_instance<S: Scalar>(
    name: impl Into<String>,
    points: &[Point<S>],
    offset: usize,
    n: usize,
) -> Result<Instance<S>, InstanceError> {
    let available = points.len().saturating_sub(offset);
    if n < 2 || n > available {
        return Err(InstanceError::SizeOutOfRange {
            requested: n,
            available,
        });
    }
    Instance::new(name, points[offset..offset + n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 0\n3 0 4\nEOF\n";

    #[test]
    fn edge_index_is_a_symmetric_bijection() {
        let idx = EdgeIndex::new(7);
        assert_eq!(idx.m(), 21);
        for e in 0..idx.m() {
            let (i, j) = idx.ends(e);
            assert!(i < j);
            assert_eq!(idx.id(i, j), e);
            assert_eq!(idx.id(j, i), e);
        }
        assert_eq!(idx.incident(3).count(), 6);
    }

    #[test]
    fn parses_tiny_file() {
        let pts = parse_tsplib::<f64>(TINY).unwrap();
        assert_eq!(pts.len(), 3);
        let inst = sub_instance("tiny", &pts, 0, 3).unwrap();
        assert_eq!(inst.weight(inst.edges().id(1, 2)), 5.0);
    }

    #[test]
    fn rejects_explicit_weights() {
        let text = "NAME: x\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_SECTION\n0 1\n";
        assert!(matches!(
            parse_tsplib::<f64>(text),
            Err(InstanceError::UnsupportedWeightType { line: 2, .. })
        ));
    }

    #[test]
    fn rejects_empty_coordinate_section() {
        let text = "NAME: x\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\nEOF\n";
        assert_eq!(parse_tsplib::<f64>(text), Err(InstanceError::EmptyCoordinates));
        assert_eq!(
            parse_tsplib::<f64>("NAME: x\n"),
            Err(InstanceError::MissingCoordinates)
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "EDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 zz 1\n";
        assert!(matches!(
            parse_tsplib::<f64>(text),
            Err(InstanceError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn display_section_is_ignored() {
        let text = format!("{}DISPLAY_DATA_SECTION\n1 9 9\n", TINY.trim_end_matches("EOF\n"));
        assert_eq!(parse_tsplib::<f64>(&text).unwrap().len(), 3);
    }

    #[test]
    fn two_point_instance_is_a_single_edge() {
        let pts = vec![Point::new(1.0, 1.0), Point::new(4.0, 5.0)];
        let inst = sub_instance("two", &pts, 0, 2).unwrap();
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.weight(0), 5.0);
    }

    #[test]
    fn size_and_duplicate_errors() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 0.0)];
        assert!(matches!(
            sub_instance("x", &pts, 0, 1),
            Err(InstanceError::SizeOutOfRange { .. })
        ));
        assert!(matches!(
            sub_instance("x", &pts, 0, 4),
            Err(InstanceError::SizeOutOfRange { .. })
        ));
        assert_eq!(
            sub_instance("x", &pts, 0, 3).unwrap_err(),
            InstanceError::CoincidentPoints { first: 0, second: 2 }
        );
        assert!(sub_instance("x", &pts, 0, 2).is_ok());
    }

    #[test]
    fn native_header_is_checked() {
        assert!(matches!(
            Instance::<f64>::from_native("x", "alpha-mst v2\nn 2\n0 0\n1 1\n"),
            Err(InstanceError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Instance::<f64>::from_native("x", "alpha-mst v1\nn 3\n0 0\n1 1\n"),
            Err(InstanceError::Parse { .. })
        ));
    }
}
