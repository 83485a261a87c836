//! Exact branch-and-cut solver for the angular constrained minimum spanning
//! tree problem: given points in the plane and an angle `alpha`, find a
//! minimum-weight spanning tree whose incident edges fit, at every vertex,
//! inside a sector of at most `alpha` radians.
//!
//! All numeric code is generic over [`Scalar`] (`f64` and `f32`). The
//! aliases below fix the scalar for the common cases.

pub mod bnc;
pub mod geometry;
pub mod heuristic;
pub mod instance;
pub mod linprog;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod separation;
pub mod util;

pub use bnc::{solve, solve_with_tables, Limits, SolveOptions, SolveReport, SolveStatus};
pub use geometry::{Alpha, GeometryTables, Point, Tree};
pub use instance::{parse_tsplib, sub_instance, EdgeIndex, Instance};
pub use linprog::{LpModel, LpSolution, LpStatus, Simplex};
pub use model::{Cut, CutKind, FormulationKind, FractionalPoint};
pub use scalar::Scalar;

pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
pub type Tables64 = GeometryTables<f64>;
pub type Tables32 = GeometryTables<f32>;
pub type LpModel64 = LpModel<f64>;
pub type LpModel32 = LpModel<f32>;
