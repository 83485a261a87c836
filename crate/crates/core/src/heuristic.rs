//! Greedy construction of alpha-spanning trees.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryTables, Tree};
use crate::instance::Instance;
use crate::model::FractionalPoint;
use crate::scalar::Scalar;
use crate::util::DisjointSets;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeuristicStatus {
    Feasible,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicResult<S = f64> {
    pub status: HeuristicStatus,
    pub tree: Option<Tree<S>>,
    /// Weight under the instance weights, whatever costs guided the scan.
    /// Infinite when construction failed.
    pub weight: S,
}

/// Kruskal scan by `costs` (ties by edge id) that accepts an edge only if it
/// joins two components and keeps both endpoint stars admissible. There is
/// no backtracking, so the scan may stop at a forest.
pub fn construct<S: Scalar>(
    instance: &Instance<S>,
    tables: &GeometryTables<S>,
    costs: &[S],
) -> HeuristicResult<S> {
    let n = instance.n();
    let edges = instance.edges();
    let mut order: Vec<usize> = (0..edges.m()).collect();
    order.sort_by(|&a, &b| costs[a].partial_cmp(&costs[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));

    let mut dsu = DisjointSets::new(n);
    let mut star: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut chosen = Vec::with_capacity(n - 1);
    for e in order {
        if chosen.len() == n - 1 {
            break;
        }
        let (a, b) = edges.ends(e);
        if dsu.same(a, b) {
            continue;
        }
        star[a].push(b);
        star[b].push(a);
        if tables.is_admissible(a, &star[a]) && tables.is_admissible(b, &star[b]) {
            dsu.union(a, b);
            chosen.push(e);
        } else {
            star[a].pop();
            star[b].pop();
        }
    }
    if chosen.len() == n - 1 {
        if let Ok(check) = tables.check_tree(&chosen) {
            if check.is_feasible() {
                return HeuristicResult {
                    status: HeuristicStatus::Feasible,
                    weight: instance.tree_weight(&chosen),
                    tree: Some(check.tree),
                };
            }
        }
    }
    HeuristicResult {
        status: HeuristicStatus::Failed,
        tree: None,
        weight: S::infinity(),
    }
}

/// [`construct`] under costs `w_e (1 - x_e)`.
pub fn lp_guided<S: Scalar>(
    instance: &Instance<S>,
    tables: &GeometryTables<S>,
    point: &FractionalPoint<S>,
) -> HeuristicResult<S> {
    let costs: Vec<S> = instance
        .weights()
        .iter()
        .zip(&point.x)
        .map(|(&w, &x)| w * (S::one() - x))
        .collect();
    construct(instance, tables, &costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Alpha, Point};

    #[test]
    fn two_points() {
        let inst = Instance::new("two", vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]).unwrap();
        let t = GeometryTables::build(&inst, Alpha::pi_frac(1, 3));
        let r = construct(&inst, &t, inst.weights());
        assert_eq!(r.status, HeuristicStatus::Feasible);
        assert_eq!(r.tree.unwrap().edges, vec![0]);
    }

    #[test]
    fn guided_by_tree_returns_tree() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.1),
            Point::new(1.0, 1.5),
            Point::new(3.0, 2.0),
        ];
        let inst = Instance::new("four", pts).unwrap();
        let t = GeometryTables::build(&inst, Alpha::pi_frac(2, 1));
        let e = inst.edges();
        let tree = [e.id(0, 3), e.id(1, 3), e.id(2, 3)];
        let mut x = vec![0.0; e.m()];
        for &t in &tree {
            x[t] = 1.0;
        }
        let r = lp_guided(&inst, &t, &FractionalPoint::new(x));
        let mut expect = tree.to_vec();
        expect.sort();
        assert_eq!(r.tree.unwrap().edges, expect);
    }
}
