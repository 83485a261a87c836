//! Separation routines for subtour, angular and odd-cycle cuts.
//!
//! Every routine is a pure function of the queried point and never returns
//! a cut violated by less than the scalar's violation tolerance.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::geometry::GeometryTables;
use crate::instance::EdgeIndex;
use crate::model::{Cut, CutKind, FractionalPoint};
use crate::scalar::Scalar;
use crate::util::DisjointSets;

/// Largest positive support enumerated exhaustively at one vertex.
pub const LAC_SUPPORT_CAP: usize = 22;
/// Values at or below this count as outside the support graph.
pub const SUPPORT_EPS: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SeparationError {
    #[error(
        "conflict pair ({e}, {f}) has x_e + x_f = {sum} > 1; angular cuts must be separated first"
    )]
    NegativeWeight { e: usize, f: usize, sum: f64 },
}

// ---------------------------------------------------------------------------
// subtour elimination

fn sec_for_set<S: Scalar>(edges: &EdgeIndex, x: &[S], set: &[usize], note: &str) -> Option<Cut> {
    if set.len() < 2 {
        return None;
    }
    let mut support = Vec::with_capacity(set.len() * (set.len() - 1) / 2);
    for (a, &u) in set.iter().enumerate() {
        for &v in &set[a + 1..] {
            support.push(edges.id(u, v));
        }
    }
    let cut = Cut::new(CutKind::Sec, support, set.len() - 1, format!("{note} S={set:?}"));
    (cut.violation(x) > S::violation_tol()).then_some(cut)
}

/// Component-based subtour heuristic.
///
/// Pass one tests every connected component of the support graph; pass two
/// contracts edges at value one and tests the contracted groups.
pub fn separate_sec_heuristic<S: Scalar>(edges: &EdgeIndex, point: &FractionalPoint<S>) -> Vec<Cut> {
    let n = edges.n();
    let x = &point.x;
    let eps = S::of(SUPPORT_EPS);
    let one = S::one() - eps;
    let mut cuts = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();

    let mut support = DisjointSets::new(n);
    let mut tight = DisjointSets::new(n);
    for e in 0..edges.m() {
        let (a, b) = edges.ends(e);
        if x[e] > eps {
            support.union(a, b);
        }
        if x[e] >= one {
            tight.union(a, b);
        }
    }
    for (groups, note) in [(support.groups(), "component"), (tight.groups(), "contracted")] {
        for g in groups {
            if seen.contains(&g) {
                continue;
            }
            if let Some(c) = sec_for_set(edges, x, &g, note) {
                cuts.push(c);
            }
            seen.insert(g);
        }
    }
    cuts
}

/// Dinic max-flow over real capacities.
struct FlowNetwork<S> {
    head: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<S>,
    next: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl<S: Scalar> FlowNetwork<S> {
    fn new(nodes: usize) -> Self {
        Self {
            head: vec![NIL; nodes],
            to: Vec::new(),
            cap: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Arc `a -> b` with capacity `c` and reverse residual capacity `rc`.
    fn add(&mut self, a: usize, b: usize, c: S, rc: S) {
        for (u, v, cc) in [(a, b, c), (b, a, rc)] {
            self.to.push(v);
            self.cap.push(cc);
            self.next.push(self.head[u]);
            self.head[u] = self.to.len() - 1;
        }
    }

    fn levels(&self, s: usize, eps: S) -> Vec<usize> {
        let mut level = vec![NIL; self.head.len()];
        let mut queue = std::collections::VecDeque::new();
        level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let mut a = self.head[u];
            while a != NIL {
                let v = self.to[a];
                if level[v] == NIL && self.cap[a] > eps {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
                a = self.next[a];
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, f: S, level: &[usize], it: &mut [usize], eps: S) -> S {
        if u == t {
            return f;
        }
        while it[u] != NIL {
            let a = it[u];
            let v = self.to[a];
            if self.cap[a] > eps && level[v] == level[u] + 1 {
                let pushed = self.augment(v, t, f.min(self.cap[a]), level, it, eps);
                if pushed > S::zero() {
                    self.cap[a] -= pushed;
                    self.cap[a ^ 1] += pushed;
                    return pushed;
                }
            }
            it[u] = self.next[a];
        }
        S::zero()
    }

    /// Max-flow value and the source side of a minimum cut.
    fn min_cut(&mut self, s: usize, t: usize) -> (S, Vec<bool>) {
        let eps = S::of(1e-12);
        let mut flow = S::zero();
        loop {
            let level = self.levels(s, eps);
            if level[t] == NIL {
                let side = level.iter().map(|&l| l != NIL).collect();
                return (flow, side);
            }
            let mut it = self.head.clone();
            loop {
                let f = self.augment(s, t, S::infinity(), &level, &mut it, eps);
                if f <= eps {
                    break;
                }
                flow += f;
            }
        }
    }
}

/// Exact subtour separation by node-weighted minimum cuts.
///
/// With node weights `w_i = 1 - x(delta(i))/2`, every `S` satisfies
/// `|S| - x(E(S)) = sum_{i in S} w_i + x(delta(S))/2`. For each vertex `k`
/// the network forces `k` into `S` and every smaller index out of it, so
/// the `n - 1` cuts together range over all candidate sets. All distinct
/// violated sets found are returned, most violated first.
pub fn separate_sec_exact<S: Scalar>(edges: &EdgeIndex, point: &FractionalPoint<S>) -> Vec<Cut> {
    let n = edges.n();
    let x = &point.x;
    let half = S::of(0.5);
    let mut deg = vec![S::zero(); n];
    for e in 0..edges.m() {
        let (a, b) = edges.ends(e);
        deg[a] += x[e];
        deg[b] += x[e];
    }
    let w: Vec<S> = deg.iter().map(|&d| S::one() - half * d).collect();
    let big = S::of_usize(n + 1) + deg.iter().copied().sum::<S>();
    let (src, sink) = (n, n + 1);

    let mut found: Vec<(S, Vec<usize>)> = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let mut net = FlowNetwork::new(n + 2);
        let mut offset = S::zero();
        for e in 0..edges.m() {
            if x[e] > S::zero() {
                let (a, b) = edges.ends(e);
                net.add(a, b, half * x[e], half * x[e]);
            }
        }
        for (i, &wi) in w.iter().enumerate() {
            if wi >= S::zero() {
                net.add(i, sink, wi, S::zero());
            } else {
                net.add(src, i, -wi, S::zero());
                offset += wi;
            }
        }
        net.add(src, k, big, S::zero());
        for j in 0..k {
            net.add(j, sink, big, S::zero());
        }
        let (value, side) = net.min_cut(src, sink);
        if value + offset >= S::one() - S::violation_tol() {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|&i| side[i]).collect();
        if let Some(cut) = sec_for_set(edges, x, &set, "min-cut") {
            let v = cut.violation(x);
            if !found.iter().any(|(_, s)| *s == set) {
                found.push((v, set));
            }
        }
    }
    found.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    found
        .into_iter()
        .filter_map(|(_, set)| sec_for_set(edges, x, &set, "min-cut"))
        .collect()
}

// ---------------------------------------------------------------------------
// angular cuts

/// Vertex subset at `i` with its cover statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LacCandidate {
    pub vertex: usize,
    /// Edge ids of `s(i)`, in insertion order.
    pub edges: Vec<usize>,
    pub v: usize,
    /// `v_ij` for each edge of `edges`, same order.
    pub counts: Vec<usize>,
}

/// `v_ij` for every edge of `s` and their maximum.
pub fn cover_value<S: Scalar>(tables: &GeometryTables<S>, i: usize, s: &[usize]) -> (usize, Vec<usize>) {
    let ends: Vec<usize> = s.iter().map(|&e| tables.edges().other(e, i)).collect();
    let counts: Vec<usize> = ends
        .iter()
        .map(|&j| ends.iter().filter(|&&k| tables.covers(i, j, k)).count())
        .collect();
    (counts.iter().copied().max().unwrap_or(0), counts)
}

/// Sequential lifting of `s` at `i`.
///
/// Candidates from `delta(i) \ s` are scanned once by `x` descending (ties
/// by edge id, plain id order when `x` is absent) and accepted when the
/// cover value does not grow. One pass is maximal: the cover value is
/// monotone in the set, so a rejected edge can never become acceptable.
pub fn lift_lac<S: Scalar>(
    tables: &GeometryTables<S>,
    i: usize,
    s: &[usize],
    x: Option<&[S]>,
) -> LacCandidate {
    let edges = tables.edges();
    let mut current = s.to_vec();
    let (v, _) = cover_value(tables, i, &current);
    let mut candidates: Vec<usize> = edges.incident(i).filter(|e| !s.contains(e)).collect();
    if let Some(x) = x {
        candidates.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    }
    for e in candidates {
        current.push(e);
        if cover_value(tables, i, &current).0 > v {
            current.pop();
        }
    }
    let (v_final, counts) = cover_value(tables, i, &current);
    debug_assert_eq!(v, v_final);
    LacCandidate {
        vertex: i,
        edges: current,
        v: v_final,
        counts,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AngularMode {
    Cover,
    Lifted,
}

fn separate_angular<S: Scalar>(
    tables: &GeometryTables<S>,
    point: &FractionalPoint<S>,
    mode: AngularMode,
) -> Vec<Cut> {
    let x = &point.x;
    let n = tables.n();
    let edges = tables.edges();
    let eps = S::of(SUPPORT_EPS);
    let tol = S::violation_tol();
    let mut cuts = Vec::new();
    for i in 0..n {
        let mut supp: Vec<usize> = edges.incident(i).filter(|&e| x[e] > eps).collect();
        if supp.len() < 2 {
            continue;
        }
        supp.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        supp.truncate(LAC_SUPPORT_CAP);
        let p = supp.len();
        let ends: Vec<usize> = supp.iter().map(|&e| edges.other(e, i)).collect();
        let cov: Vec<u32> = (0..p)
            .map(|a| {
                (0..p)
                    .filter(|&b| tables.covers(i, ends[a], ends[b]))
                    .fold(0u32, |m, b| m | 1 << b)
            })
            .collect();
        let vals: Vec<S> = supp.iter().map(|&e| x[e]).collect();

        let mut best: Option<(S, u32)> = None;
        for mask in 1u32..(1u32 << p) {
            let size = mask.count_ones() as usize;
            if size < 2 {
                continue;
            }
            let mut sum = S::zero();
            let mut bits = mask;
            while bits != 0 {
                sum += vals[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            let floor = best.map_or(tol, |b| b.0.max(tol));
            // every cover value is at least one
            if sum - S::one() <= floor {
                continue;
            }
            let mut v = 0;
            let mut bits = mask;
            while bits != 0 {
                let a = bits.trailing_zeros() as usize;
                v = v.max((cov[a] & mask).count_ones() as usize);
                bits &= bits - 1;
            }
            let rhs = match mode {
                AngularMode::Lifted => v,
                AngularMode::Cover if v < size => size - 1,
                AngularMode::Cover => continue,
            };
            let viol = sum - S::of_usize(rhs);
            if viol > floor {
                best = Some((viol, mask));
            }
        }
        let Some((_, mask)) = best else { continue };
        let s: Vec<usize> = (0..p).filter(|&a| mask >> a & 1 == 1).map(|a| supp[a]).collect();
        let cut = match mode {
            AngularMode::Cover => {
                let rhs = s.len() - 1;
                Cut::new(CutKind::Lac, s, rhs, format!("cover at {i}"))
            }
            AngularMode::Lifted => {
                let lifted = lift_lac(tables, i, &s, Some(x));
                Cut::new(CutKind::Lac, lifted.edges, lifted.v, format!("lifted at {i}"))
            }
        };
        if cut.violation(x) > tol {
            cuts.push(cut);
        }
    }
    cuts
}

/// Lifted angular cuts: at most one per vertex, the most violated one.
pub fn separate_lac<S: Scalar>(tables: &GeometryTables<S>, point: &FractionalPoint<S>) -> Vec<Cut> {
    separate_angular(tables, point, AngularMode::Lifted)
}

/// Cover cuts `x(s) <= |s| - 1` on non-admissible subsets, no lifting.
pub fn separate_cover<S: Scalar>(tables: &GeometryTables<S>, point: &FractionalPoint<S>) -> Vec<Cut> {
    separate_angular(tables, point, AngularMode::Cover)
}

// ---------------------------------------------------------------------------
// odd cycles

/// Graph on edge ids; two edges sharing an endpoint are adjacent when
/// neither covers the other within alpha.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    adj: Vec<Vec<usize>>,
    num_edges: usize,
}

impl ConflictGraph {
    /// Arbitrary simple graph, used to exercise the separator directly.
    pub fn from_edges(vertices: usize, pairs: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); vertices];
        for &(a, b) in pairs {
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        let num_edges = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Self { adj, num_edges }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, l)| l.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }
}

pub fn build_conflict_graph<S: Scalar>(tables: &GeometryTables<S>) -> ConflictGraph {
    let n = tables.n();
    let edges = tables.edges();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for u in j + 1..n {
                if j == i || u == i {
                    continue;
                }
                if !tables.covers(i, j, u) && !tables.covers(i, u, j) {
                    pairs.push((edges.id(i, j), edges.id(i, u)));
                }
            }
        }
    }
    ConflictGraph::from_edges(edges.m(), &pairs)
}

#[derive(PartialEq)]
struct Entry<S>(S, usize);

impl<S: PartialOrd> Eq for Entry<S> {}

impl<S: PartialOrd> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: PartialOrd> Ord for Entry<S> {
    // reversed for a min-heap; ties by node id for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then(other.1.cmp(&self.1))
    }
}

/// Splits a closed walk at repeated vertices until a simple odd cycle remains.
fn simple_odd_cycle(mut walk: Vec<usize>) -> Option<Vec<usize>> {
    loop {
        let mut first = std::collections::HashMap::new();
        let mut split = None;
        for (p, &v) in walk.iter().enumerate() {
            if let Some(&q) = first.get(&v) {
                split = Some((q, p));
                break;
            }
            first.insert(v, p);
        }
        let Some((a, b)) = split else {
            return (walk.len() % 2 == 1 && walk.len() >= 3).then_some(walk);
        };
        let inner: Vec<usize> = walk[a..b].to_vec();
        let outer: Vec<usize> = walk[..a].iter().chain(&walk[b..]).copied().collect();
        walk = if inner.len() % 2 == 1 { inner } else { outer };
    }
}

/// Shrinks an odd cycle along chords until it is chordless.
fn odd_hole(graph: &ConflictGraph, mut cycle: Vec<usize>) -> Vec<usize> {
    'outer: loop {
        let l = cycle.len();
        for a in 0..l {
            for b in a + 2..l {
                if a == 0 && b == l - 1 {
                    continue;
                }
                if graph.adjacent(cycle[a], cycle[b]) {
                    let first: Vec<usize> = cycle[a..=b].to_vec();
                    let second: Vec<usize> = cycle[..=a].iter().chain(&cycle[b..]).copied().collect();
                    cycle = if first.len() % 2 == 1 { first } else { second };
                    continue 'outer;
                }
            }
        }
        return cycle;
    }
}

/// Minimum-weight odd cycles through the bipartite double cover.
///
/// `point.x` is indexed by conflict-graph vertex. Returns one cut per start
/// vertex not already covered by a cut found in this call; a chordless
/// sub-cycle is preferred whenever it is itself violated.
pub fn separate_odd_cycle<S: Scalar>(
    point: &FractionalPoint<S>,
    graph: &ConflictGraph,
) -> Result<Vec<Cut>, SeparationError> {
    let x = &point.x;
    let nv = graph.num_vertices();
    let tol = S::violation_tol();
    let half = S::of(0.5);
    let weight = |a: usize, b: usize| -> Result<S, SeparationError> {
        let w = (S::one() - x[a] - x[b]) * half;
        if w < -tol {
            return Err(SeparationError::NegativeWeight {
                e: a.min(b),
                f: a.max(b),
                sum: (x[a] + x[b]).f64(),
            });
        }
        Ok(w.max(S::zero()))
    };
    for (a, b) in graph.edges() {
        weight(a, b)?;
    }

    let mut covered = vec![false; nv];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut cuts = Vec::new();
    let limit = half - tol;
    for start in 0..nv {
        if covered[start] || x[start] <= S::of(SUPPORT_EPS) || graph.neighbors(start).is_empty() {
            continue;
        }
        // node 2v is v on the "+" side, 2v+1 on the "-" side
        let mut dist = vec![S::infinity(); 2 * nv];
        let mut pred = vec![NIL; 2 * nv];
        let mut heap = BinaryHeap::new();
        let (src, dst) = (2 * start, 2 * start + 1);
        dist[src] = S::zero();
        heap.push(Entry(S::zero(), src));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if u == dst || d >= limit {
                break;
            }
            let (v, side) = (u / 2, u % 2);
            for &f in graph.neighbors(v) {
                let node = 2 * f + (1 - side);
                let nd = d + weight(v, f)?;
                if nd < dist[node] {
                    dist[node] = nd;
                    pred[node] = u;
                    heap.push(Entry(nd, node));
                }
            }
        }
        if dist[dst] >= limit {
            continue;
        }
        let mut walk = Vec::new();
        let mut u = dst;
        while u != src {
            u = pred[u];
            walk.push(u / 2);
        }
        walk.reverse();
        let Some(cycle) = simple_odd_cycle(walk) else {
            continue;
        };
        let hole = odd_hole(graph, cycle.clone());
        let make = |c: &[usize]| Cut::new(CutKind::OddCycle, c.to_vec(), c.len() / 2, format!("cycle {c:?}"));
        let hole_cut = make(&hole);
        let cut = if hole_cut.violation(x) > tol {
            hole_cut
        } else {
            make(&cycle)
        };
        if cut.violation(x) <= tol || !seen.insert(cut.support.clone()) {
            continue;
        }
        for &v in &cut.support {
            covered[v] = true;
        }
        cuts.push(cut);
    }
    Ok(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_conflict_cut() {
        let g = ConflictGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let p = FractionalPoint::new(vec![0.5, 0.5, 0.5]);
        let cuts = separate_odd_cycle(&p, &g).unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].support, vec![0, 1, 2]);
        assert_eq!(cuts[0].rhs, 1);
        assert!((cuts[0].violation::<f64>(&p.x) - 0.5).abs() < 1e-12);
        let zero = FractionalPoint::new(vec![0.0; 3]);
        assert!(separate_odd_cycle(&zero, &g).unwrap().is_empty());
    }

    #[test]
    fn negative_weight_is_an_error() {
        let g = ConflictGraph::from_edges(2, &[(0, 1)]);
        let p = FractionalPoint::new(vec![0.8, 0.8]);
        assert!(matches!(
            separate_odd_cycle(&p, &g),
            Err(SeparationError::NegativeWeight { e: 0, f: 1, .. })
        ));
    }

    #[test]
    fn chorded_cycle_reduces_to_hole() {
        // 5-cycle 0..4 with chord 0-2: the triangle 0,1,2 is the hole
        let g = ConflictGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]);
        assert_eq!(odd_hole(&g, vec![0, 1, 2, 3, 4]), vec![0, 1, 2]);
    }

    #[test]
    fn walk_splitting_keeps_odd_part() {
        // 0-1-2-0 triangle glued to 0-3-0 back-and-forth
        assert_eq!(simple_odd_cycle(vec![0, 3, 0, 1, 2]), Some(vec![0, 1, 2]));
        assert_eq!(simple_odd_cycle(vec![0, 1]), None);
    }

    #[test]
    fn exact_sec_on_triangle() {
        let edges = EdgeIndex::new(5);
        let mut x = vec![0.0; edges.m()];
        let tri = [edges.id(0, 1), edges.id(1, 2), edges.id(0, 2)];
        for &e in &tri {
            x[e] = 0.7;
        }
        x[edges.id(2, 3)] = 1.0;
        x[edges.id(3, 4)] = 0.9;
        x[edges.id(1, 4)] = 0.0;
        let total: f64 = x.iter().sum();
        x[edges.id(0, 4)] = 4.0 - total;
        let p = FractionalPoint::new(x.clone());
        let cuts = separate_sec_exact(&edges, &p);
        assert!(!cuts.is_empty());
        assert_eq!(cuts[0].support, {
            let mut t = tri.to_vec();
            t.sort();
            t
        });
        assert!((cuts[0].violation(&x) - 0.1).abs() < 1e-9);

        for &e in &tri {
            x[e] = 2.0 / 3.0;
        }
        let total: f64 = x.iter().sum::<f64>() - x[edges.id(0, 4)];
        x[edges.id(0, 4)] = 4.0 - total;
        assert!(separate_sec_exact(&edges, &FractionalPoint::new(x)).is_empty());
    }

    #[test]
    fn heuristic_finds_integral_cycle() {
        let edges = EdgeIndex::new(5);
        let mut x = vec![0.0; edges.m()];
        for (a, b) in [(0, 1), (1, 2), (0, 2), (3, 4)] {
            x[edges.id(a, b)] = 1.0;
        }
        let cuts = separate_sec_heuristic(&edges, &FractionalPoint::new(x.clone()));
        assert!(cuts.iter().any(|c| c.rhs == 2 && c.violation(&x) >= 1.0 - 1e-12));

        let mut tree = vec![0.0; edges.m()];
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 4)] {
            tree[edges.id(a, b)] = 1.0;
        }
        let p = FractionalPoint::new(tree);
        assert!(separate_sec_heuristic(&edges, &p).is_empty());
        assert!(separate_sec_exact(&edges, &p).is_empty());
    }
}
