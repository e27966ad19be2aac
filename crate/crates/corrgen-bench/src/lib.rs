//! Shared fixtures for the benchmark targets.

use nalgebra::Vector3;

use corrgen::projection::{apply_wrapper, project_cloud, WrapperConfig};
use corrgen::scene::{default_scene_waypoints, generate_scene, Extent, SceneKind, SceneSpec};
use corrgen::{ParametricPath, ProjectedCloud, RawCloud};

pub fn bench_extent() -> Extent {
    Extent {
        min: [0.0, -3.0, -3.0],
        max: [10.0, 3.0, 3.0],
    }
}

/// Random column scene with its straight reference path.
pub fn column_scene(seed: u64) -> (RawCloud, ParametricPath) {
    let extent = bench_extent();
    let spec = SceneSpec {
        kind: SceneKind::Columns,
        seed,
        count: 40,
        density: 60,
        extent,
        size_range: (0.2, 0.8),
    };
    let cloud = generate_scene(&spec).expect("valid spec");
    let waypoints: Vec<Vector3<f64>> = default_scene_waypoints(&extent);
    let path = ParametricPath::from_waypoints(&waypoints, 50).expect("valid path");
    (cloud, path)
}

/// Projected and wrapped cloud ready for assembly benchmarks.
pub fn wrapped_scene(seed: u64) -> (ProjectedCloud, ParametricPath) {
    let (cloud, path) = column_scene(seed);
    let projected = project_cloud(&path, &cloud).drop_end_caps();
    let cfg = WrapperConfig {
        radius: 2.5,
        ring_points: 16,
        stations: 100,
    };
    let wrapped = apply_wrapper(&projected, &cfg, &path).expect("valid wrapper");
    (wrapped, path)
}
