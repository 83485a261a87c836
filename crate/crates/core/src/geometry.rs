//! Angular geometry: base angles, rotations, the sets `L_ij`, sector spans
//! and alpha-feasibility of spanning trees.
//!
//! Notation used in names below: `theta0(i, j)` is the counter-clockwise
//! angle from the positive horizontal axis at `i` to the ray `i -> j`;
//! `rot(i, j, k)` is the counter-clockwise rotation carrying ray `i -> j`
//! onto ray `i -> k`. Ray `i -> j` *covers* ray `i -> k` when
//! `rot(i, j, k) <= alpha`, i.e. the alpha-sector anchored at `j` encloses `k`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{EdgeIndex, Instance};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<S = f64> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> S {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Counter-clockwise angle in `[0, 2pi)` from the horizontal axis at `from`
/// to the ray `from -> to`.
pub fn base_angle<S: Scalar>(from: Point<S>, to: Point<S>) -> S {
    let a = (to.y - from.y).atan2(to.x - from.x);
    normalize_angle(a)
}

/// Maps any finite angle into `[0, 2pi)`.
pub fn normalize_angle<S: Scalar>(a: S) -> S {
    let two_pi = S::two_pi();
    let mut r = a % two_pi;
    if r < S::zero() {
        r += two_pi;
    }
    // -tiny + 2pi rounds up to 2pi
    if r >= two_pi {
        r = S::zero();
    }
    r
}

/// Counter-clockwise rotation in `[0, 2pi)` carrying a ray with base angle
/// `from` onto a ray with base angle `to`.
#[inline]
pub fn rotation_angle<S: Scalar>(from: S, to: S) -> S {
    if to >= from {
        to - from
    } else {
        S::two_pi() + to - from
    }
}

/// Sector span of rays given by base angles sorted non-decreasingly:
/// `2pi` minus the largest cyclic gap between consecutive rays.
///
/// Consecutive equal angles (collinear rays towards distinct vertices)
/// leave a gap of zero, so they never make the span collapse to zero.
pub fn sector_span_of_sorted<S: Scalar>(angles: &[S]) -> S {
    let p = angles.len();
    if p <= 1 {
        return S::zero();
    }
    let mut span = angles[p - 1] - angles[0];
    for a in 1..p {
        let gap = angles[a] - angles[a - 1];
        span = span.min(S::two_pi() - gap);
    }
    span
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphaError {
    #[error("malformed angle `{0}` (expected `<num>/<den>pi`, e.g. `2/3pi`)")]
    Malformed(String),
    #[error("angle {0}/{1} pi is outside (0, 2pi]")]
    OutOfRange(u64, u64),
}

/// Angle stored as the exact rational multiple `numerator/denominator` of pi.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alpha {
    numerator: u64,
    denominator: u64,
}

impl Alpha {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self, AlphaError> {
        if numerator == 0 || denominator == 0 || numerator > 2 * denominator {
            return Err(AlphaError::OutOfRange(numerator, denominator));
        }
        let g = gcd(numerator, denominator);
        Ok(Self {
            numerator: numerator / g,
            denominator: denominator / g,
        })
    }

    /// Shorthand for constants known to be valid.
    pub fn pi_frac(numerator: u64, denominator: u64) -> Self {
        Self::new(numerator, denominator).expect("valid alpha")
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn radians<S: Scalar>(&self) -> S {
        S::of(self.numerator as f64 * std::f64::consts::PI / self.denominator as f64)
    }

    /// `alpha >= pi`: every pair of incident edges is admissible.
    pub fn at_least_pi(&self) -> bool {
        self.numerator >= self.denominator
    }

    /// The angle grid of the benchmark protocol, `pi/3` to `4pi/5`.
    pub fn benchmark_grid() -> [Alpha; 6] {
        [
            Alpha::pi_frac(1, 3),
            Alpha::pi_frac(2, 5),
            Alpha::pi_frac(1, 2),
            Alpha::pi_frac(3, 5),
            Alpha::pi_frac(2, 3),
            Alpha::pi_frac(4, 5),
        ]
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}pi", self.numerator, self.denominator)
    }
}

impl FromStr for Alpha {
    type Err = AlphaError;

    /// Accepts `a/bpi`, `api/b`, `api`, `pi/b` and `pi`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlphaError::Malformed(s.to_string());
        let t = s.trim().to_ascii_lowercase().replace(' ', "");
        let (num, den) = if let Some(front) = t.strip_suffix("pi") {
            match front.split_once('/') {
                Some((a, b)) => (parse_u64(a).ok_or_else(bad)?, parse_u64(b).ok_or_else(bad)?),
                None if front.is_empty() => (1, 1),
                None => (parse_u64(front).ok_or_else(bad)?, 1),
            }
        } else {
            let (front, b) = t.split_once("pi/").ok_or_else(bad)?;
            let a = if front.is_empty() {
                1
            } else {
                parse_u64(front).ok_or_else(bad)?
            };
            (a, parse_u64(b).ok_or_else(bad)?)
        };
        Alpha::new(num, den)
    }
}

fn parse_u64(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("a spanning tree on {n} vertices needs {expected} edges, got {found}")]
    WrongEdgeCount { n: usize, expected: usize, found: usize },
    #[error("edge id {0} is out of range")]
    EdgeOutOfRange(usize),
    #[error("edge {{{0}, {1}}} closes a cycle")]
    Cycle(usize, usize),
    #[error("edge set does not connect all vertices")]
    Disconnected,
}

/// A spanning tree together with the sector span at every vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tree<S = f64> {
    pub edges: Vec<usize>,
    pub theta: Vec<S>,
}

/// Result of [`GeometryTables::check_tree`].
#[derive(Clone, Debug, PartialEq)]
pub struct TreeCheck<S = f64> {
    pub tree: Tree<S>,
    /// Vertices whose sector span exceeds alpha.
    pub violations: Vec<usize>,
}

impl<S> TreeCheck<S> {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Angular data of one `(instance, alpha)` pair. Immutable once built.
#[derive(Clone, Debug)]
pub struct GeometryTables<S = f64> {
    n: usize,
    alpha: Alpha,
    alpha_rad: S,
    edges: EdgeIndex,
    theta0: Vec<S>,
    /// Bit `(i*n + j)*n + k` set iff `rot(i, j, k) <= alpha + tol`.
    cover_bits: Vec<u64>,
}

impl<S: Scalar> GeometryTables<S> {
    pub fn build(instance: &Instance<S>, alpha: Alpha) -> Self {
        let n = instance.n();
        let mut theta0 = vec![S::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    theta0[i * n + j] = base_angle(instance.point(i), instance.point(j));
                }
            }
        }
        let alpha_rad: S = alpha.radians();
        let limit = alpha_rad + S::angle_tol();
        let mut cover_bits = vec![0u64; (n * n * n).div_ceil(64)];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..n {
                    if k == i {
                        continue;
                    }
                    if rotation_angle(theta0[i * n + j], theta0[i * n + k]) <= limit {
                        let bit = (i * n + j) * n + k;
                        cover_bits[bit / 64] |= 1 << (bit % 64);
                    }
                }
            }
        }
        Self {
            n,
            alpha,
            alpha_rad,
            edges: instance.edges().clone(),
            theta0,
            cover_bits,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    #[inline]
    pub fn alpha_radians(&self) -> S {
        self.alpha_rad
    }

    #[inline]
    pub fn edges(&self) -> &EdgeIndex {
        &self.edges
    }

    /// Base angle of ray `i -> j`.
    #[inline]
    pub fn theta0(&self, i: usize, j: usize) -> S {
        self.theta0[i * self.n + j]
    }

    /// Rotation carrying ray `i -> j` onto ray `i -> k`.
    #[inline]
    pub fn rot(&self, i: usize, j: usize, k: usize) -> S {
        rotation_angle(self.theta0(i, j), self.theta0(i, k))
    }

    /// `rot(i, j, k) <= alpha` (within tolerance).
    #[inline]
    pub fn covers(&self, i: usize, j: usize, k: usize) -> bool {
        let bit = (i * self.n + j) * self.n + k;
        self.cover_bits[bit / 64] >> (bit % 64) & 1 == 1
    }

    /// `k` belongs to `L_ij`: the ray `i -> k` reaches or passes `i -> j`
    /// after an alpha counter-clockwise rotation.
    #[inline]
    pub fn in_l(&self, i: usize, j: usize, k: usize) -> bool {
        k == j || self.covers(i, k, j)
    }

    /// The vertex set `L_ij`, ascending.
    pub fn l_set(&self, i: usize, j: usize) -> Vec<usize> {
        (0..self.n).filter(|&k| k != i && self.in_l(i, j, k)).collect()
    }

    /// Sorts neighbour vertices of `i` by base angle, ties by index.
    pub fn sort_by_angle(&self, i: usize, verts: &mut [usize]) {
        verts.sort_by(|&a, &b| {
            self.theta0(i, a)
                .partial_cmp(&self.theta0(i, b))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
    }

    /// Sector span at `i` over neighbours already sorted by base angle.
    pub fn sector_span_sorted(&self, i: usize, sorted: &[usize]) -> S {
        let angles: Vec<S> = sorted.iter().map(|&v| self.theta0(i, v)).collect();
        sector_span_of_sorted(&angles)
    }

    /// Sector span at `i` over an arbitrary neighbour set.
    pub fn sector_span(&self, i: usize, verts: &[usize]) -> S {
        let mut sorted = verts.to_vec();
        self.sort_by_angle(i, &mut sorted);
        self.sector_span_sorted(i, &sorted)
    }

    /// Whether some alpha-sector at `i` encloses all rays towards `verts`.
    pub fn is_admissible(&self, i: usize, verts: &[usize]) -> bool {
        verts.len() <= 1 || self.sector_span(i, verts) <= self.alpha_rad + S::angle_tol()
    }

    /// Same as [`is_admissible`](Self::is_admissible) for a subset of `delta(i)`
    /// given by edge ids.
    pub fn is_admissible_edges(&self, i: usize, edges: &[usize]) -> bool {
        let verts: Vec<usize> = edges.iter().map(|&e| self.edges.other(e, i)).collect();
        self.is_admissible(i, &verts)
    }

    /// Validates the spanning-tree structure and evaluates every angular
    /// constraint.
    pub fn check_tree(&self, edges: &[usize]) -> Result<TreeCheck<S>, TreeError> {
        let n = self.n;
        if edges.len() != n - 1 {
            return Err(TreeError::WrongEdgeCount {
                n,
                expected: n - 1,
                found: edges.len(),
            });
        }
        let mut dsu = crate::util::DisjointSets::new(n);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &e in edges {
            if e >= self.edges.m() {
                return Err(TreeError::EdgeOutOfRange(e));
            }
            let (a, b) = self.edges.ends(e);
            if !dsu.union(a, b) {
                return Err(TreeError::Cycle(a, b));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        // n-1 acyclic edges always connect; kept for clarity of the contract
        if dsu.components() != 1 {
            return Err(TreeError::Disconnected);
        }
        let theta: Vec<S> = (0..n).map(|i| self.sector_span(i, &adj[i])).collect();
        let limit = self.alpha_rad + S::angle_tol();
        let violations = (0..n).filter(|&i| theta[i] > limit).collect();
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        Ok(TreeCheck {
            tree: Tree {
                edges: sorted,
                theta,
            },
            violations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn base_angle_quadrants() {
        let o = Point::new(0.0, 0.0);
        assert!((base_angle(o, Point::new(3.0, 3f64.sqrt())) - PI / 6.0).abs() < 1e-12);
        assert!((base_angle(o, Point::new(-1.0, 1.0)) - 3.0 * PI / 4.0).abs() < 1e-12);
        assert_eq!(base_angle(o, Point::new(1.0, 0.0)), 0.0);
        let below = base_angle(o, Point::new(1.0, -1e-300));
        assert!((0.0..2.0 * PI).contains(&below));
    }

    #[test]
    fn rotation_examples() {
        assert!((rotation_angle(PI / 6.0, PI / 3.0) - PI / 6.0).abs() < 1e-12);
        assert!((rotation_angle(PI / 3.0, PI / 6.0) - 11.0 * PI / 6.0).abs() < 1e-12);
        assert_eq!(rotation_angle(1.25, 1.25), 0.0);
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("2/3pi".parse::<Alpha>().unwrap(), Alpha::pi_frac(2, 3));
        assert_eq!("pi".parse::<Alpha>().unwrap(), Alpha::pi_frac(1, 1));
        assert_eq!("pi/3".parse::<Alpha>().unwrap(), Alpha::pi_frac(1, 3));
        assert_eq!("4pi/5".parse::<Alpha>().unwrap(), Alpha::pi_frac(4, 5));
        assert_eq!("2pi".parse::<Alpha>().unwrap(), Alpha::pi_frac(2, 1));
        assert_eq!("4/6pi".parse::<Alpha>().unwrap().to_string(), "2/3pi");
        assert_eq!(
            "7/2pi".parse::<Alpha>(),
            Err(AlphaError::OutOfRange(7, 2))
        );
        assert!(matches!("0/1pi".parse::<Alpha>(), Err(AlphaError::OutOfRange(..))));
        assert!(matches!("1.5".parse::<Alpha>(), Err(AlphaError::Malformed(_))));
        assert!(matches!("-1/3pi".parse::<Alpha>(), Err(AlphaError::Malformed(_))));
    }

    #[test]
    fn collinear_rays_do_not_collapse_span() {
        // two rays in one direction plus one at a right angle
        let span = sector_span_of_sorted(&[0.0, 0.0, PI / 2.0]);
        assert!((span - PI / 2.0).abs() < 1e-12);
        assert_eq!(sector_span_of_sorted(&[1.0, 1.0]), 0.0);
        assert_eq!(sector_span_of_sorted::<f64>(&[2.0]), 0.0);
    }

    #[test]
    fn check_tree_structural_errors() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        ];
        let inst = Instance::new("sq", pts).unwrap();
        let t = GeometryTables::build(&inst, Alpha::pi_frac(2, 1));
        let id = |a, b| inst.edges().id(a, b);
        assert!(matches!(
            t.check_tree(&[id(0, 1)]),
            Err(TreeError::WrongEdgeCount { .. })
        ));
        assert_eq!(
            t.check_tree(&[id(0, 1), id(1, 2), id(0, 2)]),
            Err(TreeError::Cycle(0, 2))
        );
        assert!(t
            .check_tree(&[id(0, 1), id(1, 3), id(3, 2)])
            .unwrap()
            .is_feasible());
    }
}
