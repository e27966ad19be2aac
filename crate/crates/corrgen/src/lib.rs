//! Smooth, collision-free parametric corridors around a reference path.
//!
//! The pipeline: project a point cloud into path-parametric coordinates
//! ([`projection`]), then fit a corridor whose cross-section is an
//! off-centered ellipse (3D) or a pair of lateral bounds (planar), with
//! polynomial coefficients found by a single convex program ([`opt`]).
//! Corridor evaluation, recovery of per-station ellipses and boundary
//! meshing live in [`corridor`]; file formats in [`io`]; synthetic test
//! scenes in [`scene`].

pub mod cheby;
pub mod corridor;
pub mod error;
pub mod io;
pub mod opt;
pub mod path;
pub mod projection;
pub mod scene;

pub use cheby::ChebyshevPoly;
pub use corridor::{BoundaryMesh, Corridor2D, Corridor3D, EllipseSlice, DEFAULT_PD_MARGIN};
pub use error::{Error, Result};
pub use io::CorridorDoc;
pub use opt::backend::{
    BackendSolution, BackendStatus, ClarabelBackend, ConicBackend, ConicProgram, LinExpr,
};
pub use opt::{
    degree_sweep, solve_2d, solve_3d, EigenBoundConfig, Formulation, ProblemSpec, ReportStatus,
    SolveReport, SweepRow,
};
pub use path::{FrameStation, ParametricPath};
pub use projection::{ProjectedCloud, RawCloud, WrapperConfig};
pub use scene::{generate_scene, Extent, Lcg64, SceneKind, SceneSpec};
