mod common;

use std::time::Duration;

use alpha_mst::bnc::{root_bound, solve_with_tables, Limits, SolveOptions, SolveStatus};
use alpha_mst::model::{build_initial_relaxation, VarLayout};
use alpha_mst::oracle::{brute_force_optimum, restore_y};
use alpha_mst::separation::separate_sec_exact;
use alpha_mst::{
    parse_tsplib, solve, Alpha, FormulationKind, FractionalPoint, GeometryTables, Instance, LpStatus, Point, Simplex,
};
use common::{data_dir, random_suite, rel_close, tsplib_windows};

#[test]
fn bundled_tsplib_files_parse() {
    for (file, n) in [("berlin52", 52), ("att532", 532), ("pr107", 107)] {
        let text = std::fs::read_to_string(data_dir().join(format!("{file}.tsp"))).unwrap();
        let pts = parse_tsplib::<f64>(&text).unwrap();
        assert_eq!(pts.len(), n, "{file}");
    }
    let windows = tsplib_windows();
    assert_eq!(windows.len(), 10);
    assert!(windows.iter().all(|w| w.n() == 15));
}

#[test]
fn native_format_round_trips() {
    for inst in random_suite(3, 10, 2..=30) {
        let back = Instance::<f64>::from_native(inst.name(), &inst.to_native()).unwrap();
        assert_eq!(back.points(), inst.points());
    }
}

/// Arc values of an optimal arc-formulation LP point can always be moved
/// under the edge values without leaving the relaxation.
#[test]
fn restoration_succeeds_on_arc_relaxation_points() {
    let alphas = Alpha::benchmark_grid();
    let mut restored = 0;
    let mut transfers = 0;
    let mut second_laps = 0;
    for (k, inst) in random_suite(11, 30, 4..=9).iter().enumerate() {
        let a = alphas[k % alphas.len()];
        let t = GeometryTables::build(inst, a);
        let layout = VarLayout::new(inst.n(), FormulationKind::FxyStar);
        let model = build_initial_relaxation(inst, &t, FormulationKind::FxyStar).unwrap();
        let mut simplex = Simplex::new(model);
        let sol = loop {
            let sol = simplex.solve().unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            let point = FractionalPoint::from_lp(&layout, &sol.x);
            let cuts = separate_sec_exact(inst.edges(), &point);
            if cuts.is_empty() {
                break sol;
            }
            simplex.add_rows(cuts.iter().map(|c| c.to_row()).collect()).unwrap();
        };
        let x = &sol.x[..layout.m];
        for i in 0..inst.n() {
            let y_i: Vec<f64> = (0..inst.n())
                .map(|j| if j == i { 0.0 } else { sol.x[layout.y(i, j)] })
                .collect();
            let (_, trace) = restore_y(&t, i, x, &y_i)
                .unwrap_or_else(|e| panic!("{} at {a}, vertex {i}: {e}", inst.name()));
            restored += 1;
            second_laps += (trace.eta.len() > inst.n() - 1) as usize;
            transfers += trace.eta.iter().filter(|&&e| e > 1e-9).count();
        }
    }
    assert!(restored > 0);
    eprintln!("restored {restored} vertices, {transfers} non-zero transfers, {second_laps} second laps");
}

#[test]
fn full_angle_reduces_to_minimum_spanning_tree() {
    for inst in random_suite(5, 8, 5..=12) {
        for kind in FormulationKind::ALL {
            let rep = solve(&inst, Alpha::pi_frac(2, 1), kind, Limits::default()).unwrap();
            assert_eq!(rep.status, SolveStatus::Optimal);
            let t = GeometryTables::build(&inst, Alpha::pi_frac(2, 1));
            let greedy = alpha_mst::heuristic::construct(&inst, &t, inst.weights());
            assert!(rel_close(rep.upper_bound, greedy.weight, 1e-9), "{kind}");
            assert_eq!(rep.nodes, 1, "{kind}");
        }
    }
}

#[test]
fn unconstrained_extended_formulation_matches_enumeration() {
    for inst in random_suite(17, 8, 5..=7) {
        let a = Alpha::pi_frac(1, 2);
        let t = GeometryTables::build(&inst, a);
        let (w, _) = brute_force_optimum(&inst, &t).unwrap().unwrap();
        let rep = solve_with_tables(&inst, &t, &SolveOptions::new(FormulationKind::Fxy)).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!(rel_close(rep.upper_bound, w, 1e-6));
    }
}

#[test]
fn lower_bound_trace_is_monotone_and_below_incumbent() {
    for inst in tsplib_windows().iter().take(3) {
        let t = GeometryTables::build(inst, Alpha::pi_frac(1, 3));
        let mut opts = SolveOptions::new(FormulationKind::Fx);
        opts.limits.nodes = Some(40);
        let rep = solve_with_tables(inst, &t, &opts).unwrap();
        assert!(matches!(rep.status, SolveStatus::Optimal | SolveStatus::NodeLimit));
        assert!(rep.nodes <= 40);
        assert!(rep.lower_bound_trace.windows(2).all(|w| w[0] <= w[1]));
        assert!(rep.lower_bound <= rep.upper_bound + 1e-6 * (1.0 + rep.upper_bound));
        assert!(rep.root_bound <= rep.lower_bound + 1e-9);
        let root = root_bound(inst, &t, FormulationKind::Fx).unwrap();
        assert!(rel_close(root.value, rep.root_bound, 1e-6));
        if let Some(tree) = &rep.tree {
            let e = inst.edges();
            let ids: Vec<usize> = tree.iter().map(|&(a, b)| e.id(a, b)).collect();
            assert!(t.check_tree(&ids).unwrap().is_feasible());
            assert!(rel_close(inst.tree_weight(&ids), rep.upper_bound, 1e-9));
        }
    }
}

#[test]
fn tiny_time_limit_stops_with_valid_bounds() {
    let inst = &tsplib_windows()[0];
    let limits = Limits {
        time: Some(Duration::from_nanos(1)),
        nodes: None,
    };
    let rep = solve(inst, Alpha::pi_frac(1, 3), FormulationKind::FxPlusPlus, limits).unwrap();
    assert!(matches!(rep.status, SolveStatus::TimeLimit | SolveStatus::Optimal));
    assert!(rep.lower_bound <= rep.upper_bound);
}

#[test]
fn single_precision_agrees_with_double() {
    for inst in random_suite(23, 6, 5..=8) {
        let pts32: Vec<Point<f32>> = inst
            .points()
            .iter()
            .map(|p| Point::new(p.x as f32, p.y as f32))
            .collect();
        let inst32 = Instance::new(inst.name(), pts32).unwrap();
        for a in [Alpha::pi_frac(1, 2), Alpha::pi_frac(1, 1)] {
            let r64 = solve(&inst, a, FormulationKind::FxPlus, Limits::default()).unwrap();
            let r32 = solve(&inst32, a, FormulationKind::FxPlus, Limits::default()).unwrap();
            assert_eq!(r64.status, r32.status);
            assert!(rel_close(r64.upper_bound, r32.upper_bound, 1e-3), "{} vs {}", r64.upper_bound, r32.upper_bound);
        }
    }
}
