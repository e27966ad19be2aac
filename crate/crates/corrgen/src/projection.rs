//! Projection of a point cloud onto the reference path.
//!
//! Each world point is reduced to a path parameter (the closest point on
//! the path) and a transverse offset in the moving frame. The wrapper
//! then bounds the cloud: far points are dropped and a synthetic shell is
//! added so the downstream volume maximization is always bounded and
//! feasible.

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::path::ParametricPath;

/// World-frame point cloud.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawCloud {
    pub points: Vec<Vector3<f64>>,
}

impl RawCloud {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Cloud after projection onto the path: per point the path parameter,
/// the transverse offset along frame columns 2 and 3, the originating
/// cloud index (`None` for synthetic wrapper points) and an end-cap flag
/// for points whose closest path point is a domain boundary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectedCloud {
    pub par: Vec<f64>,
    pub ortho: Vec<Vector2<f64>>,
    pub source_index: Vec<Option<usize>>,
    pub end_cap: Vec<bool>,
    /// Set once a wrapper shell has been applied; assembly uses this to
    /// decide whether the program is bounded.
    pub wrapped: bool,
}

impl ProjectedCloud {
    pub fn len(&self) -> usize {
        self.par.len()
    }

    pub fn is_empty(&self) -> bool {
        self.par.is_empty()
    }

    fn push(&mut self, par: f64, ortho: Vector2<f64>, source: Option<usize>, end_cap: bool) {
        self.par.push(par);
        self.ortho.push(ortho);
        self.source_index.push(source);
        self.end_cap.push(end_cap);
    }

    /// Drop points flagged as end caps; their transverse offset does not
    /// lie in a true transverse plane.
    pub fn drop_end_caps(&self) -> ProjectedCloud {
        let mut out = ProjectedCloud {
            wrapped: self.wrapped,
            ..Default::default()
        };
        for i in 0..self.len() {
            if !self.end_cap[i] {
                out.push(self.par[i], self.ortho[i], self.source_index[i], false);
            }
        }
        out
    }
}

/// Wrapper shell configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrapperConfig {
    /// Shell radius in meters.
    pub radius: f64,
    /// Synthetic points per station ring.
    pub ring_points: usize,
    /// Number of equispaced stations carrying a ring.
    pub stations: usize,
}

impl WrapperConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidInput(
                "wrapper radius must be positive".into(),
            ));
        }
        if self.ring_points < 8 {
            return Err(Error::InvalidInput(
                "wrapper needs at least 8 ring points".into(),
            ));
        }
        if self.stations == 0 {
            return Err(Error::InvalidInput(
                "wrapper needs at least 1 station".into(),
            ));
        }
        Ok(())
    }
}

const GOLDEN_ITERS: usize = 30;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimum of `f` on `[a, b]`; derivative free, so it is
/// robust to the interpolation kinks of the sampled path.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Closest path parameter for one point: coarse nearest-station search,
/// golden-section refinement on the bracketing interval, ties broken to
/// the smallest parameter.
fn project_point(path: &ParametricPath, p: &Vector3<f64>) -> f64 {
    // Near-ties within this relative band are broken toward the smallest
    // parameter. The band has to absorb the discretization sag of the
    // sampled path (chords dip below the true curve by about
    // spacing^2 / 8 of the local curvature), or equidistant stretches
    // such as an arc seen from its center would resolve arbitrarily.
    const TIE_REL: f64 = 1e-5;
    let stations = path.stations();
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, st) in stations.iter().enumerate() {
        let d = (p - st.position).norm_squared();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    for (i, st) in stations.iter().enumerate() {
        if i >= best {
            break;
        }
        if (p - st.position).norm_squared() <= best_d * (1.0 + 2.0 * TIE_REL) {
            best = i;
            break;
        }
    }
    let lo = stations[best.saturating_sub(1)].xi;
    let hi = stations[(best + 1).min(stations.len() - 1)].xi;
    let dist = |xi: f64| (p - path.position(xi).unwrap()).norm();
    let mut refined = golden_section(dist, lo, hi);

    // Minima at a bracket end land half a final interval inside it; snap
    // so that domain-boundary projections read exactly as the boundary.
    let resolution = (hi - lo) * 1e-6;
    if refined - lo < resolution && dist(lo) <= dist(refined) {
        refined = lo;
    } else if hi - refined < resolution && dist(hi) <= dist(refined) {
        refined = hi;
    }

    // Of the refined point and the bracket ends, take the smallest
    // parameter whose distance is within the tie band of the minimum;
    // this keeps the result deterministic on flat stretches.
    let candidates = [(refined, dist(refined)), (lo, dist(lo)), (hi, dist(hi))];
    let d_min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let band = d_min + TIE_REL * d_min.max(1.0);
    candidates
        .iter()
        .filter(|c| c.1 <= band)
        .map(|c| c.0)
        .fold(f64::INFINITY, f64::min)
}

/// Project every cloud point onto the path.
///
/// The per-point computation is a pure map with no cross-point state, so
/// callers may partition the cloud and project chunks concurrently.
pub fn project_cloud(path: &ParametricPath, cloud: &RawCloud) -> ProjectedCloud {
    let (lo, hi) = path.xi_range();
    let boundary_eps = 1e-9 * (hi - lo);
    let tangential_tol = 1e-6 * path.chord_length();
    let mut out = ProjectedCloud::default();
    for (i, p) in cloud.points.iter().enumerate() {
        let par = project_point(path, p);
        let frame = path.eval(par).unwrap();
        let rel = p - frame.position;
        let tangential = rel.dot(&frame.rotation.column(0).into_owned());
        let ortho = Vector2::new(
            rel.dot(&frame.rotation.column(1).into_owned()),
            rel.dot(&frame.rotation.column(2).into_owned()),
        );
        let at_boundary = (par - lo).abs() <= boundary_eps || (par - hi).abs() <= boundary_eps;
        let end_cap = at_boundary && tangential.abs() > tangential_tol;
        out.push(par, ortho, Some(i), end_cap);
    }
    out
}

/// Remove points outside the wrapper shell and append the synthetic
/// bounding rings.
pub fn apply_wrapper(
    projected: &ProjectedCloud,
    config: &WrapperConfig,
    path: &ParametricPath,
) -> Result<ProjectedCloud> {
    config.validate()?;
    let mut out = ProjectedCloud {
        wrapped: true,
        ..Default::default()
    };
    for i in 0..projected.len() {
        if projected.ortho[i].norm() <= config.radius {
            out.push(
                projected.par[i],
                projected.ortho[i],
                projected.source_index[i],
                projected.end_cap[i],
            );
        }
    }
    let (lo, hi) = path.xi_range();
    for s in 0..config.stations {
        let xi = if config.stations == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * s as f64 / (config.stations - 1) as f64
        };
        for k in 0..config.ring_points {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / config.ring_points as f64;
            let ortho = Vector2::new(config.radius * theta.cos(), config.radius * theta.sin());
            out.push(xi, ortho, None, false);
        }
    }
    Ok(out)
}

/// Planar wrapper: two bounding lines at +/- radius sampled at equispaced
/// stations, after dropping points beyond them.
pub fn apply_wrapper_planar(
    projected: &ProjectedCloud,
    radius: f64,
    stations: usize,
    path: &ParametricPath,
) -> Result<ProjectedCloud> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::InvalidInput(
            "wrapper radius must be positive".into(),
        ));
    }
    if stations == 0 {
        return Err(Error::InvalidInput(
            "wrapper needs at least 1 station".into(),
        ));
    }
    let mut out = ProjectedCloud {
        wrapped: true,
        ..Default::default()
    };
    for i in 0..projected.len() {
        if projected.ortho[i].x.abs() <= radius {
            out.push(
                projected.par[i],
                projected.ortho[i],
                projected.source_index[i],
                projected.end_cap[i],
            );
        }
    }
    let (lo, hi) = path.xi_range();
    for s in 0..stations {
        let xi = if stations == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * s as f64 / (stations - 1) as f64
        };
        out.push(xi, Vector2::new(radius, 0.0), None, false);
        out.push(xi, Vector2::new(-radius, 0.0), None, false);
    }
    Ok(out)
}

/// Partition a planar projected cloud by the sign of the first transverse
/// coordinate. Points exactly at zero go to both sides.
pub fn split_planar(projected: &ProjectedCloud) -> (ProjectedCloud, ProjectedCloud) {
    let mut pos = ProjectedCloud {
        wrapped: projected.wrapped,
        ..Default::default()
    };
    let mut neg = pos.clone();
    for i in 0..projected.len() {
        let v = projected.ortho[i].x;
        if v >= 0.0 {
            pos.push(
                projected.par[i],
                projected.ortho[i],
                projected.source_index[i],
                projected.end_cap[i],
            );
        }
        if v <= 0.0 {
            neg.push(
                projected.par[i],
                projected.ortho[i],
                projected.source_index[i],
                projected.end_cap[i],
            );
        }
    }
    (pos, neg)
}
