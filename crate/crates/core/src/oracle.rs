//! Independent verification machinery.
//!
//! Nothing here is used by the solver itself. The routines either enumerate
//! exhaustively (trees, vertex subsets, simple cycles) or evaluate explicit
//! certificates, so they share no search logic with `separation` or `bnc`.

use std::time::Instant;

use thiserror::Error;

use crate::bnc::{root_bound, BncError};
use crate::geometry::{Alpha, GeometryTables, Tree};
use crate::instance::{EdgeIndex, Instance};
use crate::model::{Cut, FormulationKind};
use crate::scalar::Scalar;
use crate::separation::{cover_value, ConflictGraph};

/// Largest vertex count accepted by the enumeration routines.
pub const ORACLE_MAX_N: usize = 9;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("enumeration refused: n = {0} exceeds {ORACLE_MAX_N}")]
    TooLarge(usize),
    #[error("restoration input violates {0}")]
    Precondition(String),
    #[error("restoration output violates {0}")]
    Postcondition(String),
    #[error("certificate row for ray {ray} at vertex {vertex} sums to {lhs} > tau")]
    Certificate { vertex: usize, ray: usize, lhs: f64 },
    #[error("bound chain broken: {0}")]
    BoundChain(String),
    #[error(transparent)]
    Bnc(#[from] BncError),
}

// ---------------------------------------------------------------------------
// spanning-tree enumeration

struct Enumerator<'a, S: Scalar, F: FnMut(&[usize])> {
    tables: &'a GeometryTables<S>,
    edges: &'a EdgeIndex,
    visit: F,
    chosen: Vec<usize>,
    star: Vec<Vec<usize>>,
    comp: Vec<usize>,
}

impl<S: Scalar, F: FnMut(&[usize])> Enumerator<'_, S, F> {
    fn relabel(&mut self, from: usize, to: usize) -> Vec<usize> {
        let moved: Vec<usize> = (0..self.comp.len()).filter(|&v| self.comp[v] == from).collect();
        for &v in &moved {
            self.comp[v] = to;
        }
        moved
    }

    fn rec(&mut self, e: usize) {
        let n = self.edges.n();
        if self.chosen.len() == n - 1 {
            (self.visit)(&self.chosen);
            return;
        }
        let m = self.edges.m();
        if e == m || m - e < n - 1 - self.chosen.len() {
            return;
        }
        let (a, b) = self.edges.ends(e);
        let (ca, cb) = (self.comp[a], self.comp[b]);
        if ca != cb {
            self.star[a].push(b);
            self.star[b].push(a);
            // a star that is already too wide stays too wide
            if self.tables.is_admissible(a, &self.star[a]) && self.tables.is_admissible(b, &self.star[b]) {
                let moved = self.relabel(cb, ca);
                self.chosen.push(e);
                self.rec(e + 1);
                self.chosen.pop();
                for v in moved {
                    self.comp[v] = cb;
                }
            }
            self.star[a].pop();
            self.star[b].pop();
        }
        self.rec(e + 1);
    }
}

/// Calls `visit` with the sorted edge list of every alpha-spanning tree.
pub fn for_each_alpha_tree<S: Scalar>(
    tables: &GeometryTables<S>,
    visit: impl FnMut(&[usize]),
) -> Result<(), OracleError> {
    let n = tables.n();
    if n > ORACLE_MAX_N {
        return Err(OracleError::TooLarge(n));
    }
    let mut en = Enumerator {
        tables,
        edges: tables.edges(),
        visit,
        chosen: Vec::new(),
        star: vec![Vec::new(); n],
        comp: (0..n).collect(),
    };
    en.rec(0);
    Ok(())
}

/// Every alpha-spanning tree as an edge-incidence mask.
pub fn enumerate_alpha_trees<S: Scalar>(tables: &GeometryTables<S>) -> Result<Vec<Vec<bool>>, OracleError> {
    let m = tables.edges().m();
    let mut out = Vec::new();
    for_each_alpha_tree(tables, |t| {
        let mut mask = vec![false; m];
        for &e in t {
            mask[e] = true;
        }
        out.push(mask);
    })?;
    Ok(out)
}

/// Minimum-weight alpha-spanning tree by enumeration; `None` when no
/// alpha-spanning tree exists.
pub fn brute_force_optimum<S: Scalar>(
    instance: &Instance<S>,
    tables: &GeometryTables<S>,
) -> Result<Option<(S, Tree<S>)>, OracleError> {
    let mut best: Option<(S, Vec<usize>)> = None;
    for_each_alpha_tree(tables, |t| {
        let w = instance.tree_weight(t);
        if best.as_ref().is_none_or(|b| w < b.0) {
            best = Some((w, t.to_vec()));
        }
    })?;
    Ok(best.map(|(w, edges)| {
        let check = tables.check_tree(&edges).expect("enumerated trees are trees");
        (w, check.tree)
    }))
}

// ---------------------------------------------------------------------------
// exhaustive separation

/// Largest `x(E(S)) - (|S| - 1)` over all vertex sets with `|S| >= 2`,
/// with a maximizing set.
pub fn max_sec_violation<S: Scalar>(edges: &EdgeIndex, x: &[S]) -> Result<(S, Vec<usize>), OracleError> {
    let n = edges.n();
    if n > 20 {
        return Err(OracleError::TooLarge(n));
    }
    let mut best = (S::neg_infinity(), Vec::new());
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut inside = S::zero();
        for e in 0..edges.m() {
            let (a, b) = edges.ends(e);
            if mask >> a & 1 == 1 && mask >> b & 1 == 1 {
                inside += x[e];
            }
        }
        let v = inside - S::of_usize(mask.count_ones() as usize - 1);
        if v > best.0 {
            best = (v, (0..n).filter(|&i| mask >> i & 1 == 1).collect());
        }
    }
    Ok(best)
}

/// Whether some simple odd cycle `C` of `graph` has
/// `x(C) > floor(|C|/2) + tol`, by depth-first enumeration of simple cycles.
///
/// Assumes `x_a + x_b <= 1` on every graph edge, which makes the partial
/// slack `|P|/2 - x(P)` of a path grow monotonically and lets the search
/// stop on any path whose slack already reaches one half.
pub fn has_violated_odd_cycle<S: Scalar>(graph: &ConflictGraph, x: &[S], tol: S) -> bool {
    let n = graph.num_vertices();
    let half = S::of(0.5);
    let slack_step = |a: usize, b: usize| (S::one() - x[a] - x[b]) * half;
    fn dfs<S: Scalar>(
        graph: &ConflictGraph,
        x: &[S],
        tol: S,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        slack: S,
        step: &dyn Fn(usize, usize) -> S,
    ) -> bool {
        let s = path[0];
        let u = *path.last().unwrap();
        if path.len() >= 3 && path.len() % 2 == 1 && graph.adjacent(u, s) {
            let lhs: S = path.iter().map(|&v| x[v]).sum();
            if lhs > S::of_usize(path.len() / 2) + tol {
                return true;
            }
        }
        for &v in graph.neighbors(u) {
            if v <= s || on_path[v] {
                continue;
            }
            let next = slack + step(u, v);
            if next >= S::of(0.5) + S::of(1e-9) {
                continue;
            }
            on_path[v] = true;
            path.push(v);
            let found = dfs(graph, x, tol, path, on_path, next, step);
            path.pop();
            on_path[v] = false;
            if found {
                return true;
            }
        }
        false
    }
    let mut on_path = vec![false; n];
    for s in 0..n {
        on_path[s] = true;
        let mut path = vec![s];
        if dfs(graph, x, tol, &mut path, &mut on_path, S::zero(), &slack_step) {
            return true;
        }
        on_path[s] = false;
    }
    false
}

// ---------------------------------------------------------------------------
// arc-variable restoration

#[derive(Clone, Debug, PartialEq)]
pub struct RestorationTrace<S = f64> {
    pub vertex: usize,
    /// Neighbours `v_1 .. v_p` in processing order.
    pub order: Vec<usize>,
    /// Transfers `eta^1, eta^2, ...`; empty on early exit. Entries past
    /// index `p - 1` belong to the second lap.
    pub eta: Vec<S>,
    /// Output arc values, indexed by head vertex (entry `vertex` unused).
    pub y_hat: Vec<S>,
}

/// Redistributes `y` at vertex `i` so that `y_ij <= x_ij` holds.
///
/// `x` is indexed by edge id and `y_i` by head vertex. Starting at the arc
/// with the largest excess `y - x`, every excess is pushed to the next arc
/// in counter-clockwise order.
pub fn restore_y<S: Scalar>(
    tables: &GeometryTables<S>,
    i: usize,
    x: &[S],
    y_i: &[S],
) -> Result<(Vec<S>, RestorationTrace<S>), OracleError> {
    let n = tables.n();
    let edges = tables.edges();
    let tol = S::of(1e-6);
    let xi = |j: usize| x[edges.id(i, j)];
    let heads: Vec<usize> = (0..n).filter(|&j| j != i).collect();

    let total: S = heads.iter().map(|&j| y_i[j]).sum();
    if (total - S::one()).abs() > tol {
        return Err(OracleError::Precondition(format!(
            "assignment row at {i}: sum y = {total}"
        )));
    }
    let degree: S = heads.iter().map(|&j| xi(j)).sum();
    if degree < S::one() - tol {
        return Err(OracleError::Precondition(format!(
            "cutset at {i}: x(delta(i)) = {degree}"
        )));
    }
    let sector_row = |y: &[S], j: usize| -> S {
        tables.l_set(i, j).iter().map(|&k| y[k]).sum::<S>() - xi(j)
    };
    for &j in &heads {
        if sector_row(y_i, j) < -tol {
            return Err(OracleError::Precondition(format!("sector row ({i}, {j})")));
        }
    }

    let mut y_hat = y_i.to_vec();
    if heads.iter().all(|&j| y_i[j] <= xi(j)) {
        let trace = RestorationTrace {
            vertex: i,
            order: Vec::new(),
            eta: Vec::new(),
            y_hat: y_hat.clone(),
        };
        return Ok((y_hat, trace));
    }
    let v1 = heads
        .iter()
        .copied()
        .fold(None::<usize>, |best, j| match best {
            Some(b) if y_i[b] - xi(b) >= y_i[j] - xi(j) => Some(b),
            _ => Some(j),
        })
        .expect("vertex has neighbours");
    let mut order: Vec<usize> = heads.iter().copied().filter(|&j| j != v1).collect();
    order.sort_by(|&a, &b| {
        tables
            .rot(i, v1, a)
            .partial_cmp(&tables.rot(i, v1, b))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.insert(0, v1);
    let p = order.len();
    let mut eta = Vec::with_capacity(p);
    // One counter-clockwise pass can leave excess on v_p, which lands on v_1
    // again. At that point only one arc carries excess and the slack of all
    // other arcs totals at least that excess, so a second lap absorbs it.
    for k in 0..2 * p {
        if k >= p && eta[k - 1] <= S::zero() {
            break;
        }
        let vk = order[k % p];
        let next = order[(k + 1) % p];
        let e = (y_hat[vk] - xi(vk)).max(S::zero());
        y_hat[vk] -= e;
        y_hat[next] += e;
        eta.push(e);
    }

    let last = *eta.last().expect("at least one transfer");
    if last > S::of(1e-9) {
        return Err(OracleError::Postcondition(format!("final transfer at {i} is {last}")));
    }
    for &j in &heads {
        if y_hat[j] > xi(j) + S::of(1e-9) {
            return Err(OracleError::Postcondition(format!("coupling row ({i}, {j})")));
        }
        if sector_row(&y_hat, j) < -tol {
            return Err(OracleError::Postcondition(format!("sector row ({i}, {j})")));
        }
    }
    let total: S = heads.iter().map(|&j| y_hat[j]).sum();
    if (total - S::one()).abs() > tol {
        return Err(OracleError::Postcondition(format!("assignment row at {i}")));
    }
    let trace = RestorationTrace {
        vertex: i,
        order,
        eta,
        y_hat: y_hat.clone(),
    };
    Ok((y_hat, trace))
}

// ---------------------------------------------------------------------------
// projection-cut certificates

#[derive(Clone, Debug, PartialEq)]
pub struct FarkasCertificate<S = f64> {
    pub vertex: usize,
    pub tau: S,
    /// Multiplier per head vertex (entry `vertex` unused).
    pub beta: Vec<S>,
}

/// Multipliers `beta_ij = 1/v` on `s`, zero elsewhere, `tau = 1`, checked
/// against the row `sum_{k covered by j} beta_ik <= tau` of every ray `j`.
pub fn lac_as_projection_cut<S: Scalar>(
    tables: &GeometryTables<S>,
    i: usize,
    s: &[usize],
) -> Result<FarkasCertificate<S>, OracleError> {
    let n = tables.n();
    let (v, _) = cover_value(tables, i, s);
    let mut beta = vec![S::zero(); n];
    for &e in s {
        beta[tables.edges().other(e, i)] = S::one() / S::of_usize(v);
    }
    let tau = S::one();
    for j in (0..n).filter(|&j| j != i) {
        let lhs: S = (0..n)
            .filter(|&k| k != i && tables.covers(i, j, k))
            .map(|k| beta[k])
            .sum();
        if lhs > tau + S::of(1e-12) {
            return Err(OracleError::Certificate {
                vertex: i,
                ray: j,
                lhs: lhs.f64(),
            });
        }
    }
    Ok(FarkasCertificate { vertex: i, tau, beta })
}

// ---------------------------------------------------------------------------
// root bound comparison

#[derive(Clone, Debug, PartialEq)]
pub struct BoundChain {
    pub fx: f64,
    pub fx_plus: f64,
    pub fx_plusplus: f64,
    pub fxy_star: f64,
    pub fxy: f64,
    /// Whether `w(fx+)` and `w(fxy*)` agree within tolerance (measured only).
    pub plus_equals_star: bool,
    /// Every cut the five root loops generated.
    pub cuts: Vec<Cut>,
    /// Wall time of each root loop, in [`FormulationKind::ALL`] order.
    pub seconds: [f64; 5],
}

impl BoundChain {
    pub fn value(&self, kind: FormulationKind) -> f64 {
        match kind {
            FormulationKind::Fx => self.fx,
            FormulationKind::FxPlus => self.fx_plus,
            FormulationKind::FxPlusPlus => self.fx_plusplus,
            FormulationKind::FxyStar => self.fxy_star,
            FormulationKind::Fxy => self.fxy,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()))
}

fn le(a: f64, b: f64) -> bool {
    a <= b || a <= b + 1e-6 * (1.0 + b.abs())
}

/// Root bounds of all five formulations with the provable order checked.
pub fn verify_bound_chain<S: Scalar>(instance: &Instance<S>, alpha: Alpha) -> Result<BoundChain, OracleError> {
    let tables = GeometryTables::build(instance, alpha);
    let mut cuts = Vec::new();
    let mut seconds = [0.0; 5];
    let mut w = |k: FormulationKind| {
        let start = Instant::now();
        let r = root_bound(instance, &tables, k)?;
        let slot = FormulationKind::ALL.iter().position(|&a| a == k).expect("listed kind");
        seconds[slot] = start.elapsed().as_secs_f64();
        cuts.extend(r.cuts);
        Ok::<f64, BncError>(r.value.f64())
    };
    let fx = w(FormulationKind::Fx)?;
    let fx_plus = w(FormulationKind::FxPlus)?;
    let fx_plusplus = w(FormulationKind::FxPlusPlus)?;
    let fxy_star = w(FormulationKind::FxyStar)?;
    let fxy = w(FormulationKind::Fxy)?;
    let chain = BoundChain {
        fx,
        fx_plus,
        fx_plusplus,
        fxy_star,
        fxy,
        plus_equals_star: false,
        cuts,
        seconds,
    };
    let chain = BoundChain {
        plus_equals_star: close(chain.fx_plus, chain.fxy_star),
        ..chain
    };
    let checks = [
        (le(chain.fx, chain.fx_plus), "w(fx) <= w(fx+)"),
        (le(chain.fx_plus, chain.fxy_star), "w(fx+) <= w(fxy*)"),
        (le(chain.fx_plus, chain.fx_plusplus), "w(fx+) <= w(fx++)"),
        (close(chain.fxy, chain.fxy_star), "w(fxy) = w(fxy*)"),
    ];
    for (ok, what) in checks {
        if !ok {
            return Err(OracleError::BoundChain(format!(
                "{what} fails on {} at {alpha}: fx {} fx+ {} fx++ {} fxy* {} fxy {}",
                instance.name(),
                chain.fx,
                chain.fx_plus,
                chain.fx_plusplus,
                chain.fxy_star,
                chain.fxy
            )));
        }
    }
    Ok(chain)
}
