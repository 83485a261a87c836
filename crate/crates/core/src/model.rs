//! Formulations, variable layout, cuts and the cut pool.
//!
//! Variable layout shared by every formulation: `x_e` is column `e` for the
//! `m` edges. Formulations with arc variables append `y_ij` for every ordered
//! pair `i != j`, grouped by tail vertex (see [`VarLayout::y`]).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryTables;
use crate::instance::{EdgeIndex, Instance};
use crate::linprog::{LpError, LpModel, Row, Sense};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormulationKind {
    /// Natural space, cover cuts.
    #[serde(rename = "fx")]
    Fx,
    /// Natural space, lifted angular cuts.
    #[serde(rename = "fx+")]
    FxPlus,
    /// Natural space, lifted angular cuts and odd-cycle cuts.
    #[serde(rename = "fx++")]
    FxPlusPlus,
    /// Arc variables without coupling rows.
    #[serde(rename = "fxy*")]
    FxyStar,
    /// Arc variables with `y_ij <= x_e` coupling rows.
    #[serde(rename = "fxy")]
    Fxy,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 5] = [
        FormulationKind::Fx,
        FormulationKind::FxPlus,
        FormulationKind::FxPlusPlus,
        FormulationKind::FxyStar,
        FormulationKind::Fxy,
    ];

    pub fn has_arc_vars(self) -> bool {
        matches!(self, FormulationKind::FxyStar | FormulationKind::Fxy)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FormulationKind::Fx => "fx",
            FormulationKind::FxPlus => "fx+",
            FormulationKind::FxPlusPlus => "fx++",
            FormulationKind::FxyStar => "fxy*",
            FormulationKind::Fxy => "fxy",
        }
    }
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown formulation '{0}' (expected fx, fx+, fx++, fxy* or fxy)")]
pub struct UnknownFormulation(pub String);

impl FromStr for FormulationKind {
    type Err = UnknownFormulation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fx" => Ok(Self::Fx),
            "fx+" | "fxplus" | "fx_plus" => Ok(Self::FxPlus),
            "fx++" | "fxplusplus" | "fx_plusplus" => Ok(Self::FxPlusPlus),
            "fxy*" | "fxystar" | "fxy_star" => Ok(Self::FxyStar),
            "fxy" => Ok(Self::Fxy),
            _ => Err(UnknownFormulation(s.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("geometry tables describe {tables} vertices but the instance has {instance}")]
    TablesMismatch { instance: usize, tables: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Column indices of `x` and `y` variables for an instance size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarLayout {
    pub n: usize,
    pub m: usize,
    pub arcs: bool,
}

impl VarLayout {
    pub fn new(n: usize, kind: FormulationKind) -> Self {
        Self {
            n,
            m: n * (n - 1) / 2,
            arcs: kind.has_arc_vars(),
        }
    }

    #[inline]
    pub fn x(&self, e: usize) -> usize {
        e
    }

    /// Column of arc `(i, j)`: `m + i(n-1) + j'` where `j'` skips `i`.
    #[inline]
    pub fn y(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.arcs && i != j);
        self.m + i * (self.n - 1) + if j < i { j } else { j - 1 }
    }

    pub fn num_vars(&self) -> usize {
        if self.arcs {
            3 * self.m
        } else {
            self.m
        }
    }
}

/// Candidate LP point: `x` per edge, `y` per ordered arc when present
/// (indexed like [`VarLayout::y`] minus `m`).
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPoint<S = f64> {
    pub x: Vec<S>,
    pub y: Option<Vec<S>>,
}

impl<S: Scalar> FractionalPoint<S> {
    pub fn new(x: Vec<S>) -> Self {
        Self { x, y: None }
    }

    /// Splits an LP primal vector according to `layout`.
    pub fn from_lp(layout: &VarLayout, values: &[S]) -> Self {
        let x = values[..layout.m].to_vec();
        let y = layout
            .arcs
            .then(|| values[layout.m..layout.num_vars()].to_vec());
        Self { x, y }
    }

    pub fn is_integral(&self) -> bool {
        self.x.iter().all(|v| v.is_integral())
    }

    /// Edges with value above one half.
    pub fn rounded_edges(&self) -> Vec<usize> {
        (0..self.x.len())
            .filter(|&e| self.x[e] > S::of(0.5))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CutKind {
    Sec,
    Lac,
    OddCycle,
}

impl CutKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CutKind::Sec => "SEC",
            CutKind::Lac => "LAC",
            CutKind::OddCycle => "ODD_CYCLE",
        }
    }
}

/// `sum_{e in support} x_e <= rhs`. Cover cuts are tagged [`CutKind::Lac`]
/// with a note saying so.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    /// Edge ids, ascending and distinct.
    pub support: Vec<usize>,
    pub rhs: usize,
    pub note: String,
}

impl Cut {
    pub fn new(kind: CutKind, mut support: Vec<usize>, rhs: usize, note: impl Into<String>) -> Self {
        support.sort_unstable();
        support.dedup();
        Self {
            kind,
            support,
            rhs,
            note: note.into(),
        }
    }

    pub fn lhs<S: Scalar>(&self, x: &[S]) -> S {
        self.support.iter().map(|&e| x[e]).sum()
    }

    /// `lhs - rhs`; positive when the point violates the cut.
    pub fn violation<S: Scalar>(&self, x: &[S]) -> S {
        self.lhs(x) - S::of_usize(self.rhs)
    }

    /// Whether an integral edge set given as a bitmask satisfies the cut.
    pub fn holds_for_mask(&self, mask: &[bool]) -> bool {
        self.support.iter().filter(|&&e| mask[e]).count() <= self.rhs
    }

    pub fn to_row<S: Scalar>(&self) -> Row<S> {
        Row::new(
            self.support.iter().map(|&e| (e, S::one())).collect(),
            Sense::Le,
            S::of_usize(self.rhs),
        )
    }

    /// Debug line `kind; support-edge-pairs; rhs; violation`.
    pub fn debug_line<S: Scalar>(&self, edges: &EdgeIndex, x: &[S]) -> String {
        let pairs: Vec<String> = self
            .support
            .iter()
            .map(|&e| {
                let (a, b) = edges.ends(e);
                format!("{a}-{b}")
            })
            .collect();
        format!(
            "{}; {}; {}; {:.6}",
            self.kind.as_str(),
            pairs.join(" "),
            self.rhs,
            self.violation(x).f64()
        )
    }
}

/// Writes one [`Cut::debug_line`] per cut.
pub fn dump_cuts<S: Scalar>(cuts: &[Cut], edges: &EdgeIndex, x: &[S]) -> String {
    cuts.iter()
        .map(|c| c.debug_line(edges, x) + "\n")
        .collect()
}

/// Global cut store of one solve, deduplicated by `(kind, support, rhs)`.
///
/// Every pooled cut stays in the LP for the whole search, so a pooled cut
/// never has to be re-added.
#[derive(Clone, Debug, Default)]
pub struct CutPool {
    seen: HashSet<(CutKind, Vec<usize>, usize)>,
    cuts: Vec<Cut>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores the cut; false if an identical cut is already pooled.
    pub fn insert(&mut self, cut: Cut) -> bool {
        let key = (cut.kind, cut.support.clone(), cut.rhs);
        if self.seen.insert(key) {
            self.cuts.push(cut);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, cut: &Cut) -> bool {
        self.seen
            .contains(&(cut.kind, cut.support.clone(), cut.rhs))
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn count(&self, kind: CutKind) -> usize {
        self.cuts.iter().filter(|c| c.kind == kind).count()
    }
}

/// Initial relaxation: `sum x = n - 1`, `0 <= x <= 1`, objective `w`, plus
/// the assignment and sector rows on `y` for the arc formulations.
pub fn build_initial_relaxation<S: Scalar>(
    instance: &Instance<S>,
    tables: &GeometryTables<S>,
    kind: FormulationKind,
) -> Result<LpModel<S>, ModelError> {
    let n = instance.n();
    if tables.n() != n {
        return Err(ModelError::TablesMismatch {
            instance: n,
            tables: tables.n(),
        });
    }
    let layout = VarLayout::new(n, kind);
    let edges = instance.edges();
    let mut lp = LpModel::new();
    for e in 0..layout.m {
        lp.add_var(instance.weight(e), S::zero(), S::one())?;
    }
    lp.add_row(Row::new(
        (0..layout.m).map(|e| (e, S::one())).collect(),
        Sense::Eq,
        S::of_usize(n - 1),
    ))?;
    if !layout.arcs {
        return Ok(lp);
    }
    for _ in 0..2 * layout.m {
        lp.add_var(S::zero(), S::zero(), S::one())?;
    }
    for i in 0..n {
        let coeffs = (0..n)
            .filter(|&j| j != i)
            .map(|j| (layout.y(i, j), S::one()))
            .collect();
        lp.add_row(Row::new(coeffs, Sense::Eq, S::one()))?;
    }
    // x_e <= sum_{k in L_ij} y_ik for both orientations of every edge
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let mut coeffs = vec![(edges.id(i, j), S::one())];
            for k in tables.l_set(i, j) {
                coeffs.push((layout.y(i, k), -S::one()));
            }
            lp.add_row(Row::new(coeffs, Sense::Le, S::zero()))?;
        }
    }
    if kind == FormulationKind::Fxy {
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                lp.add_row(Row::new(
                    vec![(layout.y(i, j), S::one()), (edges.id(i, j), -S::one())],
                    Sense::Le,
                    S::zero(),
                ))?;
            }
        }
    }
    Ok(lp)
}

/// Root relaxation value of `kind` after the full cutting-plane loop.
pub fn lpr_bound<S: Scalar>(
    instance: &Instance<S>,
    tables: &GeometryTables<S>,
    kind: FormulationKind,
) -> Result<crate::bnc::RootBound<S>, crate::bnc::BncError> {
    crate::bnc::root_bound(instance, tables, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Alpha, Point};

    fn grid(n: usize) -> Instance<f64> {
        let pts = (0..n)
            .map(|k| Point::new((k % 4) as f64 + 0.1 * k as f64, (k / 4) as f64))
            .collect();
        Instance::new("grid", pts).unwrap()
    }

    #[test]
    fn relaxation_sizes() {
        let inst = grid(15);
        let t = GeometryTables::build(&inst, Alpha::pi_frac(1, 2));
        let fx = build_initial_relaxation(&inst, &t, FormulationKind::Fx).unwrap();
        assert_eq!((fx.num_vars(), fx.num_rows()), (105, 1));
        let star = build_initial_relaxation(&inst, &t, FormulationKind::FxyStar).unwrap();
        assert_eq!((star.num_vars(), star.num_rows()), (315, 1 + 15 + 210));
        let full = build_initial_relaxation(&inst, &t, FormulationKind::Fxy).unwrap();
        assert_eq!((full.num_vars(), full.num_rows()), (315, 1 + 15 + 210 + 210));
    }

    #[test]
    fn arc_layout_is_a_bijection() {
        let l = VarLayout::new(6, FormulationKind::FxyStar);
        let mut seen = HashSet::new();
        for i in 0..6 {
            for j in (0..6).filter(|&j| j != i) {
                let c = l.y(i, j);
                assert!((l.m..3 * l.m).contains(&c));
                assert!(seen.insert(c));
            }
        }
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let t = GeometryTables::build(&grid(5), Alpha::pi_frac(1, 1));
        assert_eq!(
            build_initial_relaxation(&grid(6), &t, FormulationKind::Fx).unwrap_err(),
            ModelError::TablesMismatch {
                instance: 6,
                tables: 5
            }
        );
    }

    #[test]
    fn pool_deduplicates_on_support_and_rhs() {
        let mut pool = CutPool::new();
        assert!(pool.insert(Cut::new(CutKind::Sec, vec![3, 1, 2], 2, "S")));
        assert!(!pool.insert(Cut::new(CutKind::Sec, vec![1, 2, 3], 2, "other note")));
        assert!(pool.insert(Cut::new(CutKind::Lac, vec![1, 2, 3], 2, "")));
        assert!(pool.insert(Cut::new(CutKind::Sec, vec![1, 2, 3], 1, "")));
        assert_eq!(pool.len(), 3);
        assert_eq!(pool.count(CutKind::Sec), 2);
    }

    #[test]
    fn formulation_names_round_trip() {
        for k in FormulationKind::ALL {
            assert_eq!(k.as_str().parse::<FormulationKind>().unwrap(), k);
        }
        assert!("fz".parse::<FormulationKind>().is_err());
    }

    #[test]
    fn cut_debug_line() {
        let edges = EdgeIndex::new(4);
        let cut = Cut::new(CutKind::Sec, vec![edges.id(0, 1), edges.id(1, 2), edges.id(0, 2)], 2, "");
        let x = vec![1.0; 6];
        assert_eq!(cut.debug_line(&edges, &x), "SEC; 0-1 0-2 1-2; 2; 1.000000");
    }
}
