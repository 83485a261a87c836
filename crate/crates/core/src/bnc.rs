//! Best-first branch-and-cut over one of the formulations.
//!
//! A single [`Simplex`] carries every cut found during the search, since all
//! cut families are globally valid. Moving between nodes only changes
//! variable bounds, which keeps the basis dual feasible, so each node starts
//! from the previous basis with a few dual simplex pivots.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Alpha, GeometryTables};
use crate::heuristic::{construct, lp_guided, HeuristicStatus};
use crate::instance::Instance;
use crate::linprog::{LpError, LpStatus, Simplex};
use crate::model::{
    build_initial_relaxation, Cut, CutKind, CutPool, FormulationKind, FractionalPoint, ModelError,
    VarLayout,
};
use crate::scalar::Scalar;
use crate::separation::{
    build_conflict_graph, separate_cover, separate_lac, separate_odd_cycle, separate_sec_exact,
    separate_sec_heuristic, ConflictGraph, SeparationError,
};

/// Deepest node (root = 1) at which odd-cycle separation runs.
pub const ODD_CYCLE_MAX_DEPTH: usize = 3;
/// Relative tolerance for fathoming a node against the incumbent.
pub const FATHOM_REL_TOL: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum BncError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error("LP solve ended with status {0:?}")]
    LpStatus(LpStatus),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    NodeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::TimeLimit => "TIME_LIMIT",
            SolveStatus::NodeLimit => "NODE_LIMIT",
            SolveStatus::Infeasible => "INFEASIBLE",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Limits {
    pub time: Option<Duration>,
    pub nodes: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub kind: FormulationKind,
    pub limits: Limits,
    /// Copy every pooled cut into the report.
    pub record_cuts: bool,
}

impl SolveOptions {
    pub fn new(kind: FormulationKind) -> Self {
        Self {
            kind,
            limits: Limits::default(),
            record_cuts: false,
        }
    }
}

/// Open subproblem: depth (root = 1), parent LP bound and edge fixings.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord<S = f64> {
    pub id: usize,
    pub depth: usize,
    pub bound: S,
    pub fixings: Vec<(usize, bool)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCounts {
    pub sec: usize,
    pub lac: usize,
    pub odd_cycle: usize,
}

impl CutCounts {
    fn add(&mut self, kind: CutKind) {
        match kind {
            CutKind::Sec => self.sec += 1,
            CutKind::Lac => self.lac += 1,
            CutKind::OddCycle => self.odd_cycle += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance: String,
    pub n: usize,
    pub alpha: String,
    pub kind: FormulationKind,
    pub status: SolveStatus,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub root_bound: f64,
    /// Incumbent edges as `(i, j)` pairs with `i < j`.
    pub tree: Option<Vec<(usize, usize)>>,
    pub nodes: usize,
    pub cuts: CutCounts,
    pub lp_solves: usize,
    pub time_s: f64,
    /// Entry `d` counts odd-cycle separator calls at depth `d`.
    pub odd_cycle_calls_by_depth: Vec<usize>,
    /// Entry `d` counts processed nodes at depth `d`.
    pub nodes_by_depth: Vec<usize>,
    /// Global lower bound after each processed node.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub lower_bound_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub recorded_cuts: Vec<Cut>,
}

impl SolveReport {
    /// Relative gap `(ub - lb) / |ub|`, zero when both bounds agree.
    pub fn gap(&self) -> f64 {
        if !self.upper_bound.is_finite() {
            return f64::INFINITY;
        }
        let d = (self.upper_bound - self.lower_bound).max(0.0);
        if d == 0.0 {
            0.0
        } else {
            d / self.upper_bound.abs().max(1e-12)
        }
    }
}

/// Root relaxation value with the cuts that produced it.
#[derive(Clone, Debug)]
pub struct RootBound<S = f64> {
    /// Final LP objective; infinite when the cuts make the LP infeasible.
    pub value: S,
    pub cuts: Vec<Cut>,
    pub counts: CutCounts,
    pub lp_solves: usize,
    pub odd_cycle_calls: usize,
}

enum NodeOutcome<S> {
    Infeasible,
    Pruned(S),
    /// Time ran out; the value is a valid bound for the node.
    Stopped(S),
    Integral(S, Vec<usize>),
    Fractional(S, FractionalPoint<S>),
}

struct Engine<'a, S: Scalar> {
    instance: &'a Instance<S>,
    tables: &'a GeometryTables<S>,
    kind: FormulationKind,
    layout: VarLayout,
    lp: Simplex<S>,
    pool: CutPool,
    counts: CutCounts,
    conflict: Option<ConflictGraph>,
    fixed: Vec<Option<bool>>,
    lp_solves: usize,
    odd_calls: Vec<usize>,
    start: Instant,
    time_limit: Option<Duration>,
    incumbent: Option<(S, Vec<usize>)>,
}

impl<'a, S: Scalar> Engine<'a, S> {
    fn new(
        instance: &'a Instance<S>,
        tables: &'a GeometryTables<S>,
        kind: FormulationKind,
        time_limit: Option<Duration>,
    ) -> Result<Self, BncError> {
        let model = build_initial_relaxation(instance, tables, kind)?;
        let conflict = (kind == FormulationKind::FxPlusPlus).then(|| build_conflict_graph(tables));
        Ok(Self {
            instance,
            tables,
            kind,
            layout: VarLayout::new(instance.n(), kind),
            lp: Simplex::new(model),
            pool: CutPool::new(),
            counts: CutCounts::default(),
            conflict,
            fixed: vec![None; instance.m()],
            lp_solves: 0,
            odd_calls: vec![0; 2],
            start: Instant::now(),
            time_limit,
            incumbent: None,
        })
    }

    fn out_of_time(&self) -> bool {
        self.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn upper(&self) -> S {
        self.incumbent.as_ref().map_or(S::infinity(), |i| i.0)
    }

    fn prunable(&self, bound: S) -> bool {
        let ub = self.upper();
        ub.is_finite() && bound >= ub - S::of(FATHOM_REL_TOL) * (S::one() + ub.abs())
    }

    fn offer(&mut self, weight: S, edges: Vec<usize>) {
        if weight < self.upper() {
            log::info!("new incumbent {weight}");
            self.incumbent = Some((weight, edges));
        }
    }

    fn apply_fixings(&mut self, fixings: &[(usize, bool)]) -> Result<(), BncError> {
        let mut target = vec![None; self.fixed.len()];
        for &(e, v) in fixings {
            target[e] = Some(v);
        }
        for e in 0..target.len() {
            if target[e] != self.fixed[e] {
                let (lo, up) = match target[e] {
                    None => (S::zero(), S::one()),
                    Some(false) => (S::zero(), S::zero()),
                    Some(true) => (S::one(), S::one()),
                };
                self.lp.set_bounds(self.layout.x(e), lo, up)?;
                self.fixed[e] = target[e];
            }
        }
        Ok(())
    }

    /// Separation in the fixed class order; a class runs only when every
    /// earlier class came back empty.
    fn separate(&mut self, point: &FractionalPoint<S>, depth: usize) -> Result<Vec<Cut>, BncError> {
        let edges = self.instance.edges();
        let mut cuts = separate_sec_heuristic(edges, point);
        if cuts.is_empty() {
            cuts = separate_sec_exact(edges, point);
        }
        if !cuts.is_empty() {
            return Ok(cuts);
        }
        cuts = match self.kind {
            FormulationKind::FxyStar | FormulationKind::Fxy => return Ok(cuts),
            FormulationKind::Fx => separate_cover(self.tables, point),
            FormulationKind::FxPlus | FormulationKind::FxPlusPlus => separate_lac(self.tables, point),
        };
        if !cuts.is_empty() || self.kind != FormulationKind::FxPlusPlus || depth > ODD_CYCLE_MAX_DEPTH {
            return Ok(cuts);
        }
        if self.odd_calls.len() <= depth {
            self.odd_calls.resize(depth + 1, 0);
        }
        self.odd_calls[depth] += 1;
        let graph = self.conflict.as_ref().expect("conflict graph built for fx++");
        Ok(separate_odd_cycle(point, graph)?)
    }

    fn add_cuts(&mut self, cuts: Vec<Cut>) -> Result<usize, BncError> {
        let mut rows = Vec::new();
        for cut in cuts {
            if self.pool.insert(cut.clone()) {
                self.counts.add(cut.kind);
                rows.push(cut.to_row());
            }
        }
        let added = rows.len();
        if added > 0 {
            self.lp.add_rows(rows)?;
        }
        Ok(added)
    }

    /// Cover cut on the star of an integral point that breaks the angular
    /// constraint at some vertex.
    fn star_cut(&self, edges: &[usize]) -> Result<Cut, BncError> {
        let check = self
            .tables
            .check_tree(edges)
            .map_err(|e| BncError::Internal(format!("integral point is not a tree: {e}")))?;
        let i = *check
            .violations
            .first()
            .ok_or_else(|| BncError::Internal("star cut requested for a feasible tree".into()))?;
        let star: Vec<usize> = edges
            .iter()
            .copied()
            .filter(|&e| {
                let (a, b) = self.instance.edges().ends(e);
                a == i || b == i
            })
            .collect();
        let rhs = star.len() - 1;
        Ok(Cut::new(CutKind::Lac, star, rhs, format!("star cover at {i}")))
    }

    fn cut_loop(&mut self, depth: usize, use_incumbent: bool) -> Result<NodeOutcome<S>, BncError> {
        let mut last: Option<S> = None;
        loop {
            if self.out_of_time() {
                return Ok(match last {
                    Some(z) => NodeOutcome::Stopped(z),
                    None => NodeOutcome::Stopped(S::neg_infinity()),
                });
            }
            let sol = self.lp.solve()?;
            self.lp_solves += 1;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(NodeOutcome::Infeasible),
                other => return Err(BncError::LpStatus(other)),
            }
            let z = sol.objective;
            last = Some(z);
            if use_incumbent && self.prunable(z) {
                return Ok(NodeOutcome::Pruned(z));
            }
            let point = FractionalPoint::from_lp(&self.layout, &sol.x);
            let cuts = self.separate(&point, depth)?;
            log::debug!("depth {depth}: lp {z}, {} cuts", cuts.len());
            if self.add_cuts(cuts)? > 0 {
                continue;
            }
            if !point.is_integral() {
                return Ok(NodeOutcome::Fractional(z, point));
            }
            let edges = point.rounded_edges();
            let feasible = self
                .tables
                .check_tree(&edges)
                .map(|c| c.is_feasible())
                .unwrap_or(false);
            if feasible {
                return Ok(NodeOutcome::Integral(z, edges));
            }
            let cut = self.star_cut(&edges)?;
            log::warn!("separators missed an infeasible integral point; adding {}", cut.note);
            if self.add_cuts(vec![cut])? == 0 {
                return Err(BncError::Internal(
                    "pooled cut violated by the LP optimum".into(),
                ));
            }
        }
    }
}

#[derive(PartialEq)]
struct Open<S>(NodeRecord<S>);

impl<S: PartialOrd> Eq for Open<S> {}

impl<S: PartialOrd> PartialOrd for Open<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: PartialOrd> Ord for Open<S> {
    // max-heap order: smaller bound first, then shallower, then older
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .partial_cmp(&self.0.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.0.depth.cmp(&self.0.depth))
            .then(other.0.id.cmp(&self.0.id))
    }
}

/// Picks the variable closest to one half; ties by larger weight, then id.
pub fn select_branch_var<S: Scalar>(weights: &[S], point: &FractionalPoint<S>) -> Option<usize> {
    let half = S::of(0.5);
    let mut best: Option<usize> = None;
    for (e, &v) in point.x.iter().enumerate() {
        if v.is_integral() {
            continue;
        }
        best = match best {
            None => Some(e),
            Some(b) => {
                let (db, de) = ((point.x[b] - half).abs(), (v - half).abs());
                if de < db || (de == db && weights[e] > weights[b]) {
                    Some(e)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Children fixing the selected variable to one and to zero.
pub fn branch<S: Scalar>(
    node: &NodeRecord<S>,
    weights: &[S],
    point: &FractionalPoint<S>,
    next_id: &mut usize,
) -> Result<[NodeRecord<S>; 2], BncError> {
    let e = select_branch_var(weights, point)
        .ok_or_else(|| BncError::Internal("branching on an integral point".into()))?;
    let child = |value: bool, id: usize| {
        let mut fixings = node.fixings.clone();
        fixings.push((e, value));
        NodeRecord {
            id,
            depth: node.depth + 1,
            bound: node.bound,
            fixings,
        }
    };
    let up = child(true, *next_id);
    let down = child(false, *next_id + 1);
    *next_id += 2;
    Ok([up, down])
}

/// Builds the tables and solves.
pub fn solve<S: Scalar>(
    instance: &Instance<S>,
    alpha: Alpha,
    kind: FormulationKind,
    limits: Limits,
) -> Result<SolveReport, BncError> {
    let tables = GeometryTables::build(instance, alpha);
    let options = SolveOptions {
        kind,
        limits,
        record_cuts: false,
    };
    solve_with_tables(instance, &tables, &options)
}

pub fn solve_with_tables<S: Scalar>(
    instance: &Instance<S>,
    tables: &GeometryTables<S>,
    options: &SolveOptions,
) -> Result<SolveReport, BncError> {
    let mut eng = Engine::new(instance, tables, options.kind, options.limits.time)?;
    let weights = instance.weights();

    let start = construct(instance, tables, weights);
    if start.status == HeuristicStatus::Feasible {
        eng.offer(start.weight, start.tree.expect("feasible result has a tree").edges);
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 1;
    heap.push(Open(NodeRecord {
        id: 0,
        depth: 1,
        bound: S::neg_infinity(),
        fixings: Vec::new(),
    }));
    let mut nodes = 0;
    let mut nodes_by_depth = vec![0usize; 2];
    let mut root_bound = S::neg_infinity();
    let mut lower = S::neg_infinity();
    let mut trace = Vec::new();
    let mut stop: Option<SolveStatus> = None;

    while let Some(Open(node)) = heap.pop() {
        let ub = eng.upper();
        if eng.prunable(node.bound) {
            // best-first: every other open node is at least as bad
            heap.clear();
            break;
        }
        lower = lower.max(node.bound.min(ub));
        if eng.out_of_time() {
            heap.push(Open(node));
            stop = Some(SolveStatus::TimeLimit);
            break;
        }
        if options.limits.nodes.is_some_and(|cap| nodes >= cap) {
            heap.push(Open(node));
            stop = Some(SolveStatus::NodeLimit);
            break;
        }
        nodes += 1;
        if nodes_by_depth.len() <= node.depth {
            nodes_by_depth.resize(node.depth + 1, 0);
        }
        nodes_by_depth[node.depth] += 1;
        eng.apply_fixings(&node.fixings)?;
        let outcome = eng.cut_loop(node.depth, true)?;
        let is_root = node.id == 0;
        match outcome {
            NodeOutcome::Infeasible => {
                if is_root {
                    root_bound = S::infinity();
                }
            }
            NodeOutcome::Pruned(z) => {
                if is_root {
                    root_bound = z;
                }
            }
            NodeOutcome::Stopped(z) => {
                let bound = node.bound.max(z);
                if is_root {
                    root_bound = bound;
                }
                heap.push(Open(NodeRecord { bound, ..node }));
                stop = Some(SolveStatus::TimeLimit);
                break;
            }
            NodeOutcome::Integral(z, edges) => {
                if is_root {
                    root_bound = z;
                }
                let w = instance.tree_weight(&edges);
                eng.offer(w, edges);
            }
            NodeOutcome::Fractional(z, point) => {
                if is_root {
                    root_bound = z;
                }
                let guided = lp_guided(instance, tables, &point);
                if let Some(tree) = guided.tree {
                    eng.offer(guided.weight, tree.edges);
                }
                if !eng.prunable(z) {
                    let parent = NodeRecord { bound: z, ..node };
                    for child in branch(&parent, weights, &point, &mut next_id)? {
                        heap.push(Open(child));
                    }
                }
            }
        }
        let open_min = heap.peek().map_or(S::infinity(), |o| o.0.bound);
        lower = lower.max(open_min.min(eng.upper()));
        trace.push(lower.f64());
    }

    let ub = eng.upper();
    let status = match stop {
        Some(s) => s,
        None if eng.incumbent.is_some() => SolveStatus::Optimal,
        None => SolveStatus::Infeasible,
    };
    let lower_bound = match status {
        SolveStatus::Optimal => ub,
        SolveStatus::Infeasible => S::infinity(),
        _ => {
            let open_min = heap.iter().map(|o| o.0.bound).fold(S::infinity(), S::min);
            lower.max(open_min.min(ub))
        }
    };
    log::info!(
        "{} at {}: {} after {nodes} nodes, bounds [{lower_bound}, {ub}]",
        instance.name(),
        tables.alpha(),
        status.as_str()
    );
    let edges = instance.edges();
    Ok(SolveReport {
        instance: instance.name().to_string(),
        n: instance.n(),
        alpha: tables.alpha().to_string(),
        kind: options.kind,
        status,
        lower_bound: lower_bound.f64(),
        upper_bound: ub.f64(),
        root_bound: root_bound.f64(),
        tree: eng
            .incumbent
            .as_ref()
            .map(|(_, t)| t.iter().map(|&e| edges.ends(e)).collect()),
        nodes,
        cuts: eng.counts,
        lp_solves: eng.lp_solves,
        time_s: eng.start.elapsed().as_secs_f64(),
        odd_cycle_calls_by_depth: eng.odd_calls.clone(),
        nodes_by_depth,
        lower_bound_trace: trace,
        recorded_cuts: if options.record_cuts {
            eng.pool.cuts().to_vec()
        } else {
            Vec::new()
        },
    })
}

/// Root cutting-plane loop without incumbent pruning or branching.
pub fn root_bound<S: Scalar>(
    instance: &Instance<S>,
    tables: &GeometryTables<S>,
    kind: FormulationKind,
) -> Result<RootBound<S>, BncError> {
    let mut eng = Engine::new(instance, tables, kind, None)?;
    let value = match eng.cut_loop(1, false)? {
        NodeOutcome::Integral(z, _) | NodeOutcome::Fractional(z, _) => z,
        NodeOutcome::Infeasible => S::infinity(),
        NodeOutcome::Pruned(_) | NodeOutcome::Stopped(_) => unreachable!("no incumbent or time limit"),
    };
    Ok(RootBound {
        value,
        cuts: eng.pool.cuts().to_vec(),
        counts: eng.counts,
        lp_solves: eng.lp_solves,
        odd_cycle_calls: eng.odd_calls.iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_fractional_branching() {
        let p = FractionalPoint::new(vec![0.9, 0.5, 1.0, 0.5]);
        let w = [1.0, 1.0, 1.0, 3.0];
        assert_eq!(select_branch_var(&w, &p), Some(3));
        let node = NodeRecord {
            id: 0,
            depth: 1,
            bound: 2.5,
            fixings: vec![],
        };
        let mut next = 1;
        let [a, b] = branch(&node, &w, &p, &mut next).unwrap();
        assert_eq!((a.depth, a.bound, a.fixings.clone()), (2, 2.5, vec![(3, true)]));
        assert_eq!(b.fixings, vec![(3, false)]);
        let integral = FractionalPoint::new(vec![1.0, 0.0]);
        assert!(branch(&node, &w[..2], &integral, &mut next).is_err());
    }

    #[test]
    fn open_nodes_pop_best_bound_first() {
        let mk = |id, depth, bound| Open(NodeRecord { id, depth, bound, fixings: vec![] });
        let mut heap = BinaryHeap::new();
        heap.push(mk(1, 3, 5.0));
        heap.push(mk(2, 2, 5.0));
        heap.push(mk(3, 2, 4.0));
        heap.push(mk(4, 2, 5.0));
        let order: Vec<usize> = std::iter::from_fn(|| heap.pop().map(|o| o.0.id)).collect();
        assert_eq!(order, vec![3, 2, 4, 1]);
    }
}
