//! Linear programming layer.
//!
//! [`LpModel`] is plain data: objective, variable bounds and sparse rows.
//! [`Simplex`] owns a model together with a factorized basis and supports
//! the two operations a cutting-plane search needs between solves: appending
//! rows and changing variable bounds. Both keep the current basis dual
//! feasible, so re-solves normally run a handful of dual simplex pivots.
//!
//! The solver is a bounded-variable revised simplex with an explicit dense
//! basis inverse, refactorized periodically. It has a primal phase (used from
//! a primal feasible basis) and a dual phase (used from a dual feasible one);
//! Dantzig pricing switches to Bland's rule after a run of
//! [`BLAND_AFTER`] degenerate pivots.
//!
//! Internally every row `a x (<=|=|>=) b` becomes `a x + s = b` with a slack
//! `s` bounded by `[0, inf)`, `(-inf, 0]` or `[0, 0]` respectively.
//! Row duals follow `d_j = c_j - y^T A_j`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Consecutive degenerate pivots before switching to Bland's rule.
pub const BLAND_AFTER: usize = 1000;
const REFACTOR_EVERY: usize = 64;
const NONE: usize = usize::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("row references variable {var} but the model has {count} variables")]
    VarOutOfRange { var: usize, count: usize },
    #[error("row lists variable {0} more than once")]
    DuplicateVar(usize),
    #[error("row has a non-finite coefficient or right-hand side")]
    NonFinite,
    #[error("bounds [{lower}, {upper}] of variable {var} are inverted")]
    InvertedBounds { var: usize, lower: f64, upper: f64 },
    #[error("warm-start basis does not match the model ({0})")]
    BadBasis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row<S = f64> {
    pub coeffs: Vec<(usize, S)>,
    pub sense: Sense,
    pub rhs: S,
}

impl<S: Scalar> Row<S> {
    pub fn new(coeffs: Vec<(usize, S)>, sense: Sense, rhs: S) -> Self {
        Self { coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[S]) -> S {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (zero when satisfied).
    pub fn violation(&self, x: &[S]) -> S {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(S::zero()),
            Sense::Ge => (self.rhs - lhs).max(S::zero()),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization LP with bounded variables.
#[derive(Clone, Debug, Default)]
pub struct LpModel<S = f64> {
    cost: Vec<S>,
    lower: Vec<S>,
    upper: Vec<S>,
    rows: Vec<Row<S>>,
}

impl<S: Scalar> LpModel<S> {
    pub fn new() -> Self {
        Self {
            cost: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a variable and returns its index. Infinite bounds are allowed.
    pub fn add_var(&mut self, cost: S, lower: S, upper: S) -> Result<usize, LpError> {
        let var = self.cost.len();
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(LpError::InvertedBounds {
                var,
                lower: lower.f64(),
                upper: upper.f64(),
            });
        }
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        Ok(var)
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cost(&self) -> &[S] {
        &self.cost
    }

    pub fn bounds(&self, var: usize) -> (S, S) {
        (self.lower[var], self.upper[var])
    }

    pub fn rows(&self) -> &[Row<S>] {
        &self.rows
    }

    fn validate_row(&self, row: &Row<S>) -> Result<(), LpError> {
        if !row.rhs.is_finite() {
            return Err(LpError::NonFinite);
        }
        let mut seen: Vec<usize> = Vec::with_capacity(row.coeffs.len());
        for &(j, a) in &row.coeffs {
            if j >= self.num_vars() {
                return Err(LpError::VarOutOfRange {
                    var: j,
                    count: self.num_vars(),
                });
            }
            if !a.is_finite() {
                return Err(LpError::NonFinite);
            }
            seen.push(j);
        }
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(LpError::DuplicateVar(w[0]));
        }
        Ok(())
    }

    pub fn add_row(&mut self, row: Row<S>) -> Result<usize, LpError> {
        self.validate_row(&row)?;
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    /// Appends all rows or none: a malformed row leaves the model unchanged.
    pub fn add_rows(&mut self, rows: Vec<Row<S>>) -> Result<std::ops::Range<usize>, LpError> {
        for row in &rows {
            self.validate_row(row)?;
        }
        let start = self.rows.len();
        self.rows.extend(rows);
        Ok(start..self.rows.len())
    }

    pub fn set_bounds(&mut self, var: usize, lower: S, upper: S) -> Result<(), LpError> {
        if var >= self.num_vars() {
            return Err(LpError::VarOutOfRange {
                var,
                count: self.num_vars(),
            });
        }
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(LpError::InvertedBounds {
                var,
                lower: lower.f64(),
                upper: upper.f64(),
            });
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn objective_value(&self, x: &[S]) -> S {
        self.cost.iter().zip(x).map(|(&c, &v)| c * v).sum()
    }

    /// CPLEX-style LP text: variables are named `x<j>`, rows `r<i>`.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::from("\\ alpha-mst LP export\nMinimize\n obj:");
        let term = |out: &mut String, a: f64, name: String, first: bool| {
            let sign = if a < 0.0 { " -" } else if first { "" } else { " +" };
            write!(out, "{sign} {} {name}", fmt_num(a.abs())).unwrap();
        };
        let mut first = true;
        for (j, &c) in self.cost.iter().enumerate() {
            if c != S::zero() {
                term(&mut out, c.f64(), format!("x{j}"), first);
                first = false;
            }
        }
        if first {
            out.push_str(" 0 x0");
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            write!(out, " r{i}:").unwrap();
            if row.coeffs.is_empty() {
                out.push_str(" 0 x0");
            }
            for (k, &(j, a)) in row.coeffs.iter().enumerate() {
                term(&mut out, a.f64(), format!("x{j}"), k == 0);
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            writeln!(out, " {op} {}", fmt_num(row.rhs.f64())).unwrap();
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            let (lo, up) = (self.lower[j].f64(), self.upper[j].f64());
            match (lo.is_finite(), up.is_finite()) {
                (false, false) => writeln!(out, " x{j} free").unwrap(),
                (true, true) if lo == up => writeln!(out, " x{j} = {}", fmt_num(lo)).unwrap(),
                (true, true) => {
                    writeln!(out, " {} <= x{j} <= {}", fmt_num(lo), fmt_num(up)).unwrap()
                }
                (true, false) => writeln!(out, " x{j} >= {}", fmt_num(lo)).unwrap(),
                (false, true) => writeln!(out, " -inf <= x{j} <= {}", fmt_num(up)).unwrap(),
            }
        }
        out.push_str("End\n");
        out
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else if (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Basis snapshot over structural columns followed by one slack per row.
///
/// A snapshot taken before rows were appended is still accepted: the
/// missing slacks are made basic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    pub num_vars: usize,
    pub status: Vec<VarStatus>,
}

#[derive(Clone, Debug)]
pub struct LpSolution<S = f64> {
    pub status: LpStatus,
    pub objective: S,
    /// Primal values of the structural variables.
    pub x: Vec<S>,
    /// One dual value per row.
    pub duals: Vec<S>,
    /// Reduced costs of the structural variables.
    pub reduced_costs: Vec<S>,
    /// `y^T b` plus the bound contributions of nonbasic columns.
    pub dual_objective: S,
    pub basis: Basis,
    pub iterations: usize,
}

/// Solves `model` from scratch or from a warm-start basis.
pub fn solve<S: Scalar>(
    model: &LpModel<S>,
    warm_start: Option<&Basis>,
) -> Result<LpSolution<S>, LpError> {
    let mut simplex = Simplex::new(model.clone());
    if let Some(b) = warm_start {
        simplex.load_basis(b)?;
    }
    simplex.solve()
}

enum Phase {
    Done,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Stateful simplex over an owned model.
#[derive(Clone, Debug)]
pub struct Simplex<S: Scalar = f64> {
    model: LpModel<S>,
    /// Structural columns, `(row, coefficient)`.
    cols: Vec<Vec<(usize, S)>>,
    lo: Vec<S>,
    up: Vec<S>,
    cost: Vec<S>,
    basic: Vec<usize>,
    pos: Vec<usize>,
    x: Vec<S>,
    d: Vec<S>,
    y: Vec<S>,
    /// Row-major inverse of the basis matrix.
    binv: Vec<S>,
    since_refactor: usize,
    degenerate_run: usize,
    iterations: usize,
    iteration_limit: Option<usize>,
}

impl<S: Scalar> Simplex<S> {
    pub fn new(model: LpModel<S>) -> Self {
        let nv = model.num_vars();
        let mut s = Self {
            cols: vec![Vec::new(); nv],
            lo: model.lower.clone(),
            up: model.upper.clone(),
            cost: model.cost.clone(),
            basic: Vec::new(),
            pos: vec![NONE; nv],
            x: vec![S::zero(); nv],
            d: model.cost.clone(),
            y: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
            degenerate_run: 0,
            iterations: 0,
            iteration_limit: None,
            model: LpModel {
                cost: model.cost.clone(),
                lower: model.lower.clone(),
                upper: model.upper.clone(),
                rows: Vec::new(),
            },
        };
        for j in 0..nv {
            s.x[j] = s.preferred_value(j);
        }
        s.append_rows(model.rows);
        s
    }

    pub fn model(&self) -> &LpModel<S> {
        &self.model
    }

    pub fn set_iteration_limit(&mut self, limit: Option<usize>) {
        self.iteration_limit = limit;
    }

    fn nv(&self) -> usize {
        self.cols.len()
    }

    fn nr(&self) -> usize {
        self.basic.len()
    }

    /// Value a nonbasic column should take to be dual feasible.
    fn preferred_value(&self, j: usize) -> S {
        let (lo, up) = (self.lo[j], self.up[j]);
        let d = self.d[j];
        let pick_lo = if d > S::zero() {
            true
        } else if d < S::zero() {
            false
        } else {
            lo.is_finite() || !up.is_finite()
        };
        if pick_lo && lo.is_finite() {
            lo
        } else if up.is_finite() {
            up
        } else if lo.is_finite() {
            lo
        } else {
            S::zero()
        }
    }

    /// Appends rows with their slacks basic; extends the basis inverse.
    pub fn add_rows(&mut self, rows: Vec<Row<S>>) -> Result<std::ops::Range<usize>, LpError> {
        for row in &rows {
            self.model.validate_row(row)?;
        }
        let start = self.model.num_rows();
        self.append_rows(rows);
        Ok(start..self.model.num_rows())
    }

    fn append_rows(&mut self, rows: Vec<Row<S>>) {
        if rows.is_empty() {
            return;
        }
        let nv = self.nv();
        let old = self.nr();
        let k = rows.len();
        let new = old + k;

        // slack columns are indexed after all structural ones; shift existing slacks
        let mut x_slack_old: Vec<S> = self.x[nv..].to_vec();
        let mut lo_old = self.lo[nv..].to_vec();
        let mut up_old = self.up[nv..].to_vec();
        let mut d_old = self.d[nv..].to_vec();
        let mut pos_old = self.pos[nv..].to_vec();
        self.x.truncate(nv);
        self.lo.truncate(nv);
        self.up.truncate(nv);
        self.cost.truncate(nv);
        self.d.truncate(nv);
        self.pos.truncate(nv);

        let mut binv = vec![S::zero(); new * new];
        for r in 0..old {
            binv[r * new..r * new + old].copy_from_slice(&self.binv[r * old..(r + 1) * old]);
        }

        for (t, row) in rows.iter().enumerate() {
            let r = old + t;
            let (slo, sup) = match row.sense {
                Sense::Le => (S::zero(), S::infinity()),
                Sense::Ge => (S::neg_infinity(), S::zero()),
                Sense::Eq => (S::zero(), S::zero()),
            };
            lo_old.push(slo);
            up_old.push(sup);
            d_old.push(S::zero());
            pos_old.push(r);
            // B'^{-1} row r = [-(a_B^T B^{-1}), 1]
            for &(j, a) in &row.coeffs {
                self.cols[j].push((r, a));
                let p = self.pos[j];
                if p != NONE {
                    for c in 0..old {
                        let v = self.binv[p * old + c];
                        if v != S::zero() {
                            binv[r * new + c] -= a * v;
                        }
                    }
                }
            }
            binv[r * new + r] = S::one();
            let activity: S = row.coeffs.iter().map(|&(j, a)| a * self.x[j]).sum();
            x_slack_old.push(row.rhs - activity);
        }

        self.binv = binv;
        self.x.extend(x_slack_old);
        self.lo.extend(lo_old);
        self.up.extend(up_old);
        self.cost.extend(std::iter::repeat_n(S::zero(), new));
        self.d.extend(d_old);
        self.pos.extend(pos_old.iter().copied());
        for t in 0..k {
            self.basic.push(nv + old + t);
        }
        // basic slacks of earlier rows keep their positions
        for (p, &b) in self.basic.iter().enumerate() {
            self.pos[b] = p;
        }
        self.y.resize(new, S::zero());
        self.model.rows.extend(rows);
    }

    /// Changes the bounds of a structural variable, keeping dual feasibility.
    pub fn set_bounds(&mut self, var: usize, lower: S, upper: S) -> Result<(), LpError> {
        self.model.set_bounds(var, lower, upper)?;
        self.lo[var] = lower;
        self.up[var] = upper;
        if self.pos[var] == NONE {
            let v = self.preferred_value(var);
            let delta = v - self.x[var];
            if delta != S::zero() {
                self.x[var] = v;
                let alpha = self.ftran(var);
                for (p, a) in alpha.iter().enumerate() {
                    let b = self.basic[p];
                    self.x[b] -= *a * delta;
                }
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Basis {
        let status = (0..self.x.len())
            .map(|j| {
                if self.pos[j] != NONE {
                    VarStatus::Basic
                } else if self.lo[j].is_finite() && self.x[j] == self.lo[j] {
                    VarStatus::AtLower
                } else if self.up[j].is_finite() && self.x[j] == self.up[j] {
                    VarStatus::AtUpper
                } else if self.lo[j].is_finite() {
                    VarStatus::AtLower
                } else if self.up[j].is_finite() {
                    VarStatus::AtUpper
                } else {
                    VarStatus::Free
                }
            })
            .collect();
        Basis {
            num_vars: self.nv(),
            status,
        }
    }

    /// Installs a basis snapshot; its columns must fit the current model.
    pub fn load_basis(&mut self, basis: &Basis) -> Result<(), LpError> {
        let nv = self.nv();
        let nr = self.nr();
        if basis.num_vars != nv || basis.status.len() < nv || basis.status.len() > nv + nr {
            return Err(LpError::BadBasis(format!(
                "basis has {} columns over {} variables, model has {} + {}",
                basis.status.len(),
                basis.num_vars,
                nv,
                nr
            )));
        }
        let mut status = basis.status.clone();
        status.resize(nv + nr, VarStatus::Basic);
        let basic: Vec<usize> = (0..nv + nr)
            .filter(|&j| status[j] == VarStatus::Basic)
            .collect();
        if basic.len() != nr {
            return Err(LpError::BadBasis(format!(
                "{} basic columns for {} rows",
                basic.len(),
                nr
            )));
        }
        self.pos.iter_mut().for_each(|p| *p = NONE);
        for (p, &b) in basic.iter().enumerate() {
            self.pos[b] = p;
        }
        self.basic = basic;
        for j in 0..nv + nr {
            self.x[j] = match status[j] {
                VarStatus::Basic => S::zero(),
                VarStatus::AtLower if self.lo[j].is_finite() => self.lo[j],
                VarStatus::AtUpper if self.up[j].is_finite() => self.up[j],
                _ => self.preferred_value(j),
            };
        }
        self.refactor()?;
        self.recompute_primal();
        self.recompute_duals();
        Ok(())
    }

    // ---- linear algebra -------------------------------------------------

    fn col_dot(&self, v: &[S], j: usize) -> S {
        let nv = self.nv();
        if j < nv {
            self.cols[j].iter().map(|&(r, a)| v[r] * a).sum()
        } else {
            v[j - nv]
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<S> {
        let nr = self.nr();
        let nv = self.nv();
        let mut out = vec![S::zero(); nr];
        if j < nv {
            for &(r, a) in &self.cols[j] {
                for (i, o) in out.iter_mut().enumerate() {
                    let v = self.binv[i * nr + r];
                    if v != S::zero() {
                        *o += a * v;
                    }
                }
            }
        } else {
            let r = j - nv;
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.binv[i * nr + r];
            }
        }
        out
    }

    /// Row `r` of `B^{-1} A` over all columns (zero on basic columns).
    fn row_alpha(&self, r: usize) -> Vec<S> {
        let nr = self.nr();
        let rho = &self.binv[r * nr..(r + 1) * nr];
        (0..self.x.len())
            .map(|j| {
                if self.pos[j] != NONE {
                    S::zero()
                } else {
                    self.col_dot(rho, j)
                }
            })
            .collect()
    }

    /// Recomputes `B^{-1}` by Gauss-Jordan elimination. Basic columns found
    /// linearly dependent are replaced by slacks.
    fn refactor(&mut self) -> Result<(), LpError> {
        let nr = self.nr();
        let nv = self.nv();
        for _attempt in 0..=nr {
            let mut work = vec![S::zero(); nr * nr];
            for (p, &b) in self.basic.iter().enumerate() {
                if b < nv {
                    for &(r, a) in &self.cols[b] {
                        work[r * nr + p] = a;
                    }
                } else {
                    work[(b - nv) * nr + p] = S::one();
                }
            }
            let mut inv = vec![S::zero(); nr * nr];
            for i in 0..nr {
                inv[i * nr + i] = S::one();
            }
            let mut row_of = vec![NONE; nr];
            let mut used = vec![false; nr];
            let mut dependent = Vec::new();
            for p in 0..nr {
                let mut best = NONE;
                let mut best_abs = S::zero();
                for i in 0..nr {
                    if !used[i] {
                        let v = work[i * nr + p].abs();
                        if v > best_abs {
                            best_abs = v;
                            best = i;
                        }
                    }
                }
                if best == NONE || best_abs < S::pivot_tol() {
                    dependent.push(p);
                    continue;
                }
                used[best] = true;
                row_of[p] = best;
                let piv = work[best * nr + p];
                for c in 0..nr {
                    work[best * nr + c] /= piv;
                    inv[best * nr + c] /= piv;
                }
                for i in 0..nr {
                    if i == best {
                        continue;
                    }
                    let f = work[i * nr + p];
                    if f == S::zero() {
                        continue;
                    }
                    for c in 0..nr {
                        let wb = work[best * nr + c];
                        if wb != S::zero() {
                            work[i * nr + c] -= f * wb;
                        }
                        let ib = inv[best * nr + c];
                        if ib != S::zero() {
                            inv[i * nr + c] -= f * ib;
                        }
                    }
                }
            }
            if dependent.is_empty() {
                let mut binv = vec![S::zero(); nr * nr];
                for p in 0..nr {
                    let src = row_of[p];
                    binv[p * nr..(p + 1) * nr].copy_from_slice(&inv[src * nr..(src + 1) * nr]);
                }
                self.binv = binv;
                self.since_refactor = 0;
                return Ok(());
            }
            log::debug!("refactor: replacing {} dependent basic columns", dependent.len());
            let mut free_rows = (0..nr).filter(|&i| !used[i]);
            for p in dependent {
                let out = self.basic[p];
                let r = free_rows.next().expect("one free row per dependent column");
                let slack = nv + r;
                if self.pos[slack] != NONE {
                    // slack already basic elsewhere; its row was used there
                    continue;
                }
                self.pos[out] = NONE;
                self.x[out] = self.preferred_value(out);
                self.basic[p] = slack;
                self.pos[slack] = p;
            }
        }
        Err(LpError::Numerical("basis repair did not converge".into()))
    }

    fn recompute_primal(&mut self) {
        let nr = self.nr();
        let nv = self.nv();
        let mut rhs: Vec<S> = self.model.rows.iter().map(|r| r.rhs).collect();
        for j in 0..nv {
            if self.pos[j] == NONE && self.x[j] != S::zero() {
                for &(r, a) in &self.cols[j] {
                    rhs[r] -= a * self.x[j];
                }
            }
        }
        for r in 0..nr {
            let j = nv + r;
            if self.pos[j] == NONE {
                rhs[r] -= self.x[j];
            }
        }
        for p in 0..nr {
            let row = &self.binv[p * nr..(p + 1) * nr];
            let v: S = row.iter().zip(&rhs).map(|(&a, &b)| a * b).sum();
            let b = self.basic[p];
            self.x[b] = v;
        }
    }

    fn recompute_duals(&mut self) {
        let nr = self.nr();
        let mut y = vec![S::zero(); nr];
        for p in 0..nr {
            let c = self.cost[self.basic[p]];
            if c != S::zero() {
                for (k, yk) in y.iter_mut().enumerate() {
                    *yk += c * self.binv[p * nr + k];
                }
            }
        }
        for j in 0..self.x.len() {
            self.d[j] = if self.pos[j] != NONE {
                S::zero()
            } else {
                self.cost[j] - self.col_dot(&y, j)
            };
        }
        self.y = y;
    }

    fn primal_infeasibility(&self, b: usize) -> S {
        let v = self.x[b];
        if v < self.lo[b] {
            self.lo[b] - v
        } else if v > self.up[b] {
            v - self.up[b]
        } else {
            S::zero()
        }
    }

    fn is_primal_feasible(&self) -> bool {
        self.basic
            .iter()
            .all(|&b| self.primal_infeasibility(b) <= S::feas_tol())
    }

    fn dual_infeasible(&self, j: usize) -> bool {
        if self.pos[j] != NONE || self.lo[j] == self.up[j] {
            return false;
        }
        let d = self.d[j];
        (d < -S::opt_tol() && self.x[j] < self.up[j]) || (d > S::opt_tol() && self.x[j] > self.lo[j])
    }

    fn is_dual_feasible(&self) -> bool {
        (0..self.x.len()).all(|j| !self.dual_infeasible(j))
    }

    fn limit_reached(&self) -> bool {
        let cap = self
            .iteration_limit
            .unwrap_or(50_000 + 50 * (self.x.len() + self.nr()));
        self.iterations >= cap
    }

    /// Basis change: column `q` enters at position `r`.
    fn pivot(&mut self, r: usize, q: usize, alpha_q: &[S], alpha_r: &[S]) {
        let nr = self.nr();
        let leaving = self.basic[r];
        let piv = alpha_q[r];
        let theta_d = self.d[q] / piv;
        if theta_d != S::zero() {
            for j in 0..self.x.len() {
                if self.pos[j] == NONE && alpha_r[j] != S::zero() {
                    self.d[j] -= theta_d * alpha_r[j];
                }
            }
        }
        self.d[q] = S::zero();
        self.d[leaving] = -theta_d;

        let (head, tail) = self.binv.split_at_mut(r * nr);
        let (prow, tail) = tail.split_at_mut(nr);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (i, row) in head.chunks_mut(nr).enumerate() {
            let f = alpha_q[i];
            if f != S::zero() {
                for (a, &b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
            }
        }
        for (k, row) in tail.chunks_mut(nr).enumerate() {
            let f = alpha_q[r + 1 + k];
            if f != S::zero() {
                for (a, &b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
            }
        }

        self.basic[r] = q;
        self.pos[q] = r;
        self.pos[leaving] = NONE;
        self.since_refactor += 1;
        self.iterations += 1;
    }

    fn maybe_refactor(&mut self) -> Result<(), LpError> {
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
            self.recompute_primal();
            self.recompute_duals();
        }
        Ok(())
    }

    fn note_degenerate(&mut self, degenerate: bool) {
        if degenerate {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
    }

    fn bland(&self) -> bool {
        self.degenerate_run >= BLAND_AFTER
    }

    // ---- dual simplex ---------------------------------------------------

    fn dual_phase(&mut self) -> Result<Phase, LpError> {
        let tiny = S::of(1e-12);
        loop {
            if self.limit_reached() {
                return Ok(Phase::IterationLimit);
            }
            self.maybe_refactor()?;

            let bland = self.bland();
            let mut r = NONE;
            let mut worst = S::feas_tol();
            for (p, &b) in self.basic.iter().enumerate() {
                let inf = self.primal_infeasibility(b);
                if inf > S::feas_tol() {
                    if bland {
                        if r == NONE || b < self.basic[r] {
                            r = p;
                        }
                    } else if inf > worst {
                        worst = inf;
                        r = p;
                    }
                }
            }
            if r == NONE {
                return Ok(Phase::Done);
            }
            let leaving = self.basic[r];
            let to_lower = self.x[leaving] < self.lo[leaving];
            let target = if to_lower { self.lo[leaving] } else { self.up[leaving] };
            let alpha_r = self.row_alpha(r);

            // eligible entering columns and their dual ratios
            let mut cand: Vec<(usize, S, S)> = Vec::new();
            for j in 0..self.x.len() {
                if self.pos[j] != NONE || self.lo[j] == self.up[j] {
                    continue;
                }
                let a = alpha_r[j];
                if a.abs() <= S::pivot_tol() {
                    continue;
                }
                let can_inc = self.x[j] < self.up[j];
                let can_dec = self.x[j] > self.lo[j];
                // x_leaving moves by -a * dx_j
                let ok = if to_lower {
                    (a < S::zero() && can_inc) || (a > S::zero() && can_dec)
                } else {
                    (a > S::zero() && can_inc) || (a < S::zero() && can_dec)
                };
                if !ok {
                    continue;
                }
                let dj = self.d[j];
                let signed = if (a < S::zero()) == to_lower { dj } else { -dj };
                let ratio = signed.max(S::zero()) / a.abs();
                cand.push((j, ratio, a.abs()));
            }
            if cand.is_empty() {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    self.recompute_primal();
                    self.recompute_duals();
                    continue;
                }
                return Ok(Phase::Infeasible);
            }
            let q = if bland {
                let min = cand.iter().map(|c| c.1).fold(S::infinity(), S::min);
                cand.iter()
                    .filter(|c| c.1 <= min + tiny)
                    .map(|c| c.0)
                    .min()
                    .unwrap()
            } else {
                // Harris two-pass: relax by the optimality tolerance, then pick
                // the largest pivot among the relaxed minimizers
                let bound = cand
                    .iter()
                    .map(|c| (c.1 * c.2 + S::opt_tol()) / c.2)
                    .fold(S::infinity(), S::min);
                cand.iter()
                    .filter(|c| c.1 <= bound)
                    .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(b.0.cmp(&a.0)))
                    .unwrap()
                    .0
            };

            let alpha_q = self.ftran(q);
            let piv = alpha_q[r];
            if piv.abs() <= S::pivot_tol()
                || (piv - alpha_r[q]).abs() > S::of(1e-6) * (S::one() + piv.abs())
            {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    self.recompute_primal();
                    self.recompute_duals();
                    continue;
                }
                return Err(LpError::Numerical(format!(
                    "unstable dual pivot {} at row {}",
                    piv.f64(),
                    r
                )));
            }
            let dx = (self.x[leaving] - target) / piv;
            self.x[q] += dx;
            for (p, &a) in alpha_q.iter().enumerate() {
                if a != S::zero() {
                    let b = self.basic[p];
                    self.x[b] -= a * dx;
                }
            }
            self.x[leaving] = target;
            let degenerate = (self.d[q] / piv).abs() <= tiny;
            self.note_degenerate(degenerate);
            self.pivot(r, q, &alpha_q, &alpha_r);
        }
    }

    // ---- primal simplex -------------------------------------------------

    fn primal_phase(&mut self) -> Result<Phase, LpError> {
        let tiny = S::of(1e-12);
        loop {
            if self.limit_reached() {
                return Ok(Phase::IterationLimit);
            }
            self.maybe_refactor()?;

            let bland = self.bland();
            let mut q = NONE;
            let mut best = S::zero();
            for j in 0..self.x.len() {
                if !self.dual_infeasible(j) {
                    continue;
                }
                if bland {
                    q = j;
                    break;
                }
                if self.d[j].abs() > best {
                    best = self.d[j].abs();
                    q = j;
                }
            }
            if q == NONE {
                return Ok(Phase::Done);
            }
            let dir = if self.d[q] < S::zero() { S::one() } else { -S::one() };
            let alpha_q = self.ftran(q);

            // ratio test over basic variables and the entering bound
            let mut own = if dir > S::zero() {
                self.up[q] - self.x[q]
            } else {
                self.x[q] - self.lo[q]
            };
            if own < S::zero() {
                own = S::zero();
            }
            let mut rows: Vec<(usize, S, S)> = Vec::new();
            for (p, &a) in alpha_q.iter().enumerate() {
                let da = dir * a;
                if da.abs() <= S::pivot_tol() {
                    continue;
                }
                let b = self.basic[p];
                let dist = if da > S::zero() {
                    self.x[b] - self.lo[b]
                } else {
                    self.up[b] - self.x[b]
                };
                if dist.is_finite() {
                    rows.push((p, dist.max(S::zero()) / da.abs(), da.abs()));
                }
            }
            let (leave, step) = if rows.is_empty() {
                (NONE, own)
            } else if bland {
                let min = rows.iter().map(|c| c.1).fold(S::infinity(), S::min);
                let p = rows
                    .iter()
                    .filter(|c| c.1 <= min + tiny)
                    .min_by_key(|c| self.basic[c.0])
                    .unwrap();
                if own <= p.1 {
                    (NONE, own)
                } else {
                    (p.0, p.1)
                }
            } else {
                let bound = rows
                    .iter()
                    .map(|c| (c.1 * c.2 + S::feas_tol()) / c.2)
                    .fold(S::infinity(), S::min);
                let p = rows
                    .iter()
                    .filter(|c| c.1 <= bound)
                    .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
                    .unwrap();
                if own <= p.1 {
                    (NONE, own)
                } else {
                    (p.0, p.1)
                }
            };
            if !step.is_finite() {
                return Ok(Phase::Unbounded);
            }

            let t = dir * step;
            self.x[q] += t;
            for (p, &a) in alpha_q.iter().enumerate() {
                if a != S::zero() {
                    let b = self.basic[p];
                    self.x[b] -= a * t;
                }
            }
            self.note_degenerate(step <= tiny);
            if leave == NONE {
                // bound flip
                self.x[q] = if dir > S::zero() { self.up[q] } else { self.lo[q] };
                self.iterations += 1;
                continue;
            }
            let lb = self.basic[leave];
            self.x[lb] = if dir * alpha_q[leave] > S::zero() {
                self.lo[lb]
            } else {
                self.up[lb]
            };
            let alpha_r = self.row_alpha(leave);
            self.pivot(leave, q, &alpha_q, &alpha_r);
        }
    }

    /// Moves nonbasic columns to the bound matching their reduced cost.
    /// Columns that would need an infinite bound get a temporary box.
    fn restore_dual_feasibility(&mut self) -> Vec<(usize, S, S)> {
        let big = S::of(1e9);
        let mut boxed = Vec::new();
        for j in 0..self.x.len() {
            if !self.dual_infeasible(j) {
                continue;
            }
            if self.d[j] < S::zero() && !self.up[j].is_finite() {
                boxed.push((j, self.lo[j], self.up[j]));
                self.up[j] = self.x[j].max(S::zero()) + big;
            } else if self.d[j] > S::zero() && !self.lo[j].is_finite() {
                boxed.push((j, self.lo[j], self.up[j]));
                self.lo[j] = self.x[j].min(S::zero()) - big;
            }
            self.x[j] = if self.d[j] < S::zero() { self.up[j] } else { self.lo[j] };
        }
        boxed
    }

    /// Runs simplex phases until an optimal basis is certified.
    pub fn solve(&mut self) -> Result<LpSolution<S>, LpError> {
        self.iterations = 0;
        self.degenerate_run = 0;
        for round in 0..12 {
            // the running inverse stays accurate between periodic refactorizations
            if round > 0 || self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            self.recompute_primal();
            self.recompute_duals();
            let pf = self.is_primal_feasible();
            let df = self.is_dual_feasible();
            if pf && df {
                return Ok(self.solution(LpStatus::Optimal));
            }
            let phase = if df {
                self.dual_phase()?
            } else if pf {
                self.primal_phase()?
            } else {
                let boxed = self.restore_dual_feasibility();
                self.recompute_primal();
                let phase = self.dual_phase()?;
                for (j, lo, up) in boxed {
                    self.lo[j] = lo;
                    self.up[j] = up;
                }
                match phase {
                    // infeasibility under temporary boxes is not conclusive
                    Phase::Infeasible => Phase::Done,
                    other => other,
                }
            };
            match phase {
                Phase::Done => continue,
                Phase::Infeasible => return Ok(self.solution(LpStatus::Infeasible)),
                Phase::Unbounded => return Ok(self.solution(LpStatus::Unbounded)),
                Phase::IterationLimit => return Ok(self.solution(LpStatus::IterationLimit)),
            }
        }
        Err(LpError::Numerical(
            "could not certify optimality after repeated refactorization".into(),
        ))
    }

    fn solution(&self, status: LpStatus) -> LpSolution<S> {
        let nv = self.nv();
        let x = self.x[..nv].to_vec();
        let objective = self.model.objective_value(&x);
        let mut dual_objective: S = self
            .y
            .iter()
            .zip(&self.model.rows)
            .map(|(&y, r)| y * r.rhs)
            .sum();
        for j in 0..self.x.len() {
            if self.pos[j] == NONE {
                dual_objective += self.d[j] * self.x[j];
            }
        }
        LpSolution {
            status,
            objective,
            x,
            duals: self.y.clone(),
            reduced_costs: self.d[..nv].to_vec(),
            dual_objective,
            basis: self.basis(),
            iterations: self.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_var(lo: f64, up: f64) -> LpModel<f64> {
        let mut m = LpModel::new();
        m.add_var(1.0, lo, up).unwrap();
        m
    }

    #[test]
    fn lower_bound_row() {
        let mut m = single_var(0.0, 1.0);
        m.add_row(Row::new(vec![(0, 1.0)], Sense::Ge, 0.5)).unwrap();
        let s = solve(&m, None).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.5).abs() < 1e-12);
        assert!((s.dual_objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = single_var(f64::NEG_INFINITY, f64::INFINITY);
        m.add_row(Row::new(vec![(0, 1.0)], Sense::Le, 0.0)).unwrap();
        m.add_row(Row::new(vec![(0, 1.0)], Sense::Ge, 1.0)).unwrap();
        assert_eq!(solve(&m, None).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_objective() {
        let mut m = LpModel::new();
        m.add_var(-1.0, 0.0, f64::INFINITY).unwrap();
        m.add_var(0.0, 0.0, 1.0).unwrap();
        m.add_row(Row::new(vec![(0, 1.0), (1, -1.0)], Sense::Ge, 0.0)).unwrap();
        assert_eq!(solve(&m, None).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + 2y  s.t. x + y = 3, x - y <= 1, x,y free
        let mut m = LpModel::new();
        m.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_var(2.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_row(Row::new(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0)).unwrap();
        m.add_row(Row::new(vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0)).unwrap();
        let s = solve(&m, None).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 1.0).abs() < 1e-9);
        assert!((s.objective - 4.0).abs() < 1e-9);
        assert!((s.dual_objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn malformed_rows_leave_model_unchanged() {
        let mut m = single_var(0.0, 1.0);
        let rows = vec![
            Row::new(vec![(0, 1.0)], Sense::Le, 1.0),
            Row::new(vec![(3, 1.0)], Sense::Le, 1.0),
        ];
        assert_eq!(
            m.add_rows(rows),
            Err(LpError::VarOutOfRange { var: 3, count: 1 })
        );
        assert_eq!(m.num_rows(), 0);
        assert_eq!(
            m.add_row(Row::new(vec![(0, 1.0), (0, 2.0)], Sense::Le, 1.0)),
            Err(LpError::DuplicateVar(0))
        );
        assert!(matches!(
            m.set_bounds(0, 1.0, 0.0),
            Err(LpError::InvertedBounds { var: 0, .. })
        ));
    }

    #[test]
    fn warm_start_after_rows_and_bounds() {
        // min -x0 - x1 s.t. x0 + x1 <= 1.5, boxes [0,1]
        let mut m: LpModel<f64> = LpModel::new();
        m.add_var(-1.0, 0.0, 1.0).unwrap();
        m.add_var(-1.0, 0.0, 1.0).unwrap();
        m.add_row(Row::new(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.5)).unwrap();
        let mut sx = Simplex::new(m);
        let s0 = sx.solve().unwrap();
        assert!((s0.objective + 1.5).abs() < 1e-12);
        sx.add_rows(vec![Row::new(vec![(0, 1.0)], Sense::Le, 0.25)]).unwrap();
        let s1 = sx.solve().unwrap();
        assert!((s1.objective + 1.25).abs() < 1e-12);
        sx.set_bounds(1, 0.0, 0.0).unwrap();
        let s2 = sx.solve().unwrap();
        assert!((s2.objective + 0.25).abs() < 1e-12);
        assert_eq!(s2.x[1], 0.0);

        // snapshot from before the row addition still warm-starts
        let mut model = sx.model().clone();
        model.set_bounds(1, 0.0, 1.0).unwrap();
        let s3 = solve(&model, Some(&s0.basis)).unwrap();
        assert!((s3.objective + 1.25).abs() < 1e-12);
    }

    #[test]
    fn f32_solves_small_model() {
        let mut m: LpModel<f32> = LpModel::new();
        m.add_var(2.0, 0.0, 4.0).unwrap();
        m.add_var(3.0, 0.0, 4.0).unwrap();
        m.add_row(Row::new(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 3.0)).unwrap();
        m.add_row(Row::new(vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0)).unwrap();
        let s = solve(&m, None).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 7.0).abs() < 1e-4);
    }

    #[test]
    fn lp_export_layout() {
        let mut m = LpModel::new();
        m.add_var(1.5, 0.0, 1.0).unwrap();
        m.add_var(-2.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_row(Row::new(vec![(0, 1.0), (1, -1.0)], Sense::Ge, 2.0)).unwrap();
        let text = m.to_lp_format();
        assert!(text.contains("Minimize\n obj: 1.5 x0 - 2 x1\n"));
        assert!(text.contains(" r0: 1 x0 - 1 x1 >= 2\n"));
        assert!(text.contains(" 0 <= x0 <= 1\n"));
        assert!(text.contains(" x1 free\n"));
        assert!(text.ends_with("End\n"));
    }
}
