//! Parametric reference path with a moving frame.
//!
//! The path is a map from a scalar path parameter to a position and an
//! orthonormal frame whose first column is the tangent and whose second
//! and third columns span the transverse plane. Frames are built by
//! parallel transport (rotation minimizing), which stays well defined at
//! inflection points where a Frenet frame would not be.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Sampled pose of the path: parameter, position and moving frame.
///
/// Frame columns are tangent, first normal, second normal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStation {
    pub xi: f64,
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

/// Immutable parametric path, evaluated by interpolation between densely
/// sampled stations. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct ParametricPath {
    xi_range: (f64, f64),
    stations: Vec<FrameStation>,
    /// Mean station spacing in xi, used as a local Lipschitz scale.
    spacing: f64,
}

pub const SO3_TOL: f64 = 1e-9;

fn orthonormality_defect(r: &Matrix3<f64>) -> f64 {
    let g = r.transpose() * r - Matrix3::identity();
    let det_defect = (r.determinant() - 1.0).abs();
    g.abs().max().max(det_defect)
}

/// Project the second and third columns so the triad is exactly
/// orthonormal with the given first column.
fn gram_schmidt(tangent: Vector3<f64>, normal_hint: Vector3<f64>) -> Matrix3<f64> {
    let c1 = tangent.normalize();
    let mut c2 = normal_hint - c1 * normal_hint.dot(&c1);
    if c2.norm() < 1e-12 {
        c2 = fallback_normal(c1);
    }
    let c2 = c2.normalize();
    let c3 = c1.cross(&c2);
    Matrix3::from_columns(&[c1, c2, c3])
}

fn fallback_normal(t: Vector3<f64>) -> Vector3<f64> {
    let a = if t.z.abs() < 0.9 {
        Vector3::z()
    } else {
        Vector3::x()
    };
    a.cross(&t)
}

/// Deterministic initial frame: normal chosen from a fixed world axis.
/// For tangents in the xy-plane the normal stays in the plane, which is
/// what planar scenes rely on.
fn initial_frame(tangent: Vector3<f64>) -> Matrix3<f64> {
    gram_schmidt(tangent, fallback_normal(tangent.normalize()))
}

/// Catmull-Rom position and derivative on one segment (tension 1/2).
fn catmull_rom(
    p0: Vector3<f64>,
    p1: Vector3<f64>,
    p2: Vector3<f64>,
    p3: Vector3<f64>,
    t: f64,
) -> (Vector3<f64>, Vector3<f64>) {
    let a = p1 * 2.0;
    let b = p2 - p0;
    let c = p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3;
    let d = -p0 + p1 * 3.0 - p2 * 3.0 + p3;
    let pos = (a + b * t + c * (t * t) + d * (t * t * t)) * 0.5;
    let vel = (b + c * (2.0 * t) + d * (3.0 * t * t)) * 0.5;
    (pos, vel)
}

impl ParametricPath {
    /// Build a path through the waypoints: Catmull-Rom positions, parallel
    /// transport frames, chord-length proportional parameter on [0, 1].
    pub fn from_waypoints(waypoints: &[Vector3<f64>], samples_per_segment: usize) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if samples_per_segment == 0 {
            return Err(Error::InvalidInput(
                "samples_per_segment must be positive".into(),
            ));
        }
        for (i, pair) in waypoints.windows(2).enumerate() {
            if (pair[1] - pair[0]).norm() < 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "degenerate segment: waypoints {i} and {} coincide",
                    i + 1
                )));
            }
        }

        // Sample each segment uniformly in the spline parameter, with
        // endpoint phantom controls obtained by reflection (duplication
        // would flatten and distort the first and last segments).
        let n_seg = waypoints.len() - 1;
        let last = waypoints.len() as isize - 1;
        let ctrl = |i: isize| -> Vector3<f64> {
            if i < 0 {
                2.0 * waypoints[0] - waypoints[(-i) as usize]
            } else if i > last {
                2.0 * waypoints[last as usize] - waypoints[(2 * last - i) as usize]
            } else {
                waypoints[i as usize]
            }
        };
        let mut positions: Vec<Vector3<f64>> = Vec::with_capacity(n_seg * samples_per_segment + 1);
        let mut tangents: Vec<Vector3<f64>> = Vec::with_capacity(positions.capacity());
        for seg in 0..n_seg {
            let (p0, p1, p2, p3) = (
                ctrl(seg as isize - 1),
                ctrl(seg as isize),
                ctrl(seg as isize + 1),
                ctrl(seg as isize + 2),
            );
            let last_seg = seg == n_seg - 1;
            let count = if last_seg {
                samples_per_segment + 1
            } else {
                samples_per_segment
            };
            for k in 0..count {
                let t = k as f64 / samples_per_segment as f64;
                let (pos, vel) = catmull_rom(p0, p1, p2, p3, t);
                if let Some(&prev) = positions.last() {
                    if (pos - prev).norm() < 1e-14 {
                        continue;
                    }
                }
                positions.push(pos);
                tangents.push(vel);
            }
        }

        // Chord-length parameterization normalized to [0, 1].
        let mut arc = vec![0.0];
        for pair in positions.windows(2) {
            arc.push(arc.last().unwrap() + (pair[1] - pair[0]).norm());
        }
        let total = *arc.last().unwrap();
        if total < 1e-12 {
            return Err(Error::InvalidInput("path has zero length".into()));
        }

        // Parallel transport of the initial frame along the tangents.
        let mut frames = Vec::with_capacity(positions.len());
        let mut frame = initial_frame(tangents[0]);
        frames.push(frame);
        for tangent in tangents.iter().skip(1) {
            let t_prev: Vector3<f64> = frame.column(0).into();
            let t_new = tangent.normalize();
            if let Some(rot) = Rotation3::rotation_between(&t_prev, &t_new) {
                frame = rot.matrix() * frame;
            }
            frame = gram_schmidt(t_new, frame.column(1).into());
            frames.push(frame);
        }

        let stations: Vec<FrameStation> = positions
            .into_iter()
            .zip(frames)
            .zip(&arc)
            .map(|((position, rotation), &s)| FrameStation {
                xi: s / total,
                position,
                rotation,
            })
            .collect();
        Self::from_stations(stations)
    }

    /// Wrap externally supplied stations, validating the path invariants.
    pub fn from_stations(stations: Vec<FrameStation>) -> Result<Self> {
        if stations.len() < 2 {
            return Err(Error::InvalidInput("need at least 2 stations".into()));
        }
        for pair in stations.windows(2) {
            if pair[1].xi <= pair[0].xi {
                return Err(Error::InvalidInput(format!(
                    "station parameters must be strictly increasing ({} then {})",
                    pair[0].xi, pair[1].xi
                )));
            }
        }
        for st in &stations {
            let defect = orthonormality_defect(&st.rotation);
            if defect > SO3_TOL {
                return Err(Error::InvalidInput(format!(
                    "station rotation at xi = {} is not in SO(3): defect {defect:.2e}",
                    st.xi
                )));
            }
        }
        let xi_range = (stations[0].xi, stations[stations.len() - 1].xi);
        let spacing = (xi_range.1 - xi_range.0) / (stations.len() - 1) as f64;
        Ok(Self {
            xi_range,
            stations,
            spacing,
        })
    }

    pub fn xi_range(&self) -> (f64, f64) {
        self.xi_range
    }

    pub fn stations(&self) -> &[FrameStation] {
        &self.stations
    }

    pub fn station_spacing(&self) -> f64 {
        self.spacing
    }

    /// Total chord length over the stations, used as the length scale for
    /// projection tolerances.
    pub fn chord_length(&self) -> f64 {
        self.stations
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm())
            .sum()
    }

    fn check_domain(&self, xi: f64) -> Result<()> {
        let (lo, hi) = self.xi_range;
        let eps = 1e-12 * (hi - lo);
        if xi < lo - eps || xi > hi + eps {
            return Err(Error::Domain { xi, lo, hi });
        }
        Ok(())
    }

    /// Index of the station segment containing xi.
    fn segment_index(&self, xi: f64) -> usize {
        match self
            .stations
            .binary_search_by(|st| st.xi.partial_cmp(&xi).unwrap())
        {
            Ok(i) => i.min(self.stations.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.stations.len() - 2),
        }
    }

    /// Evaluate position and frame at a parameter inside the domain.
    ///
    /// Position is interpolated linearly between stations; the frame by
    /// quaternion slerp with a Gram-Schmidt cleanup, so the SO(3)
    /// invariant holds at every evaluation.
    pub fn eval(&self, xi: f64) -> Result<FrameStation> {
        self.check_domain(xi)?;
        let xi = xi.clamp(self.xi_range.0, self.xi_range.1);
        let i = self.segment_index(xi);
        let (a, b) = (&self.stations[i], &self.stations[i + 1]);
        let t = (xi - a.xi) / (b.xi - a.xi);
        if t <= 0.0 {
            return Ok(a.clone());
        }
        if t >= 1.0 {
            return Ok(b.clone());
        }
        let position = a.position.lerp(&b.position, t);
        let qa = UnitQuaternion::from_matrix(&a.rotation);
        let qb = UnitQuaternion::from_matrix(&b.rotation);
        let q = qa.try_slerp(&qb, t, 1e-12).unwrap_or(qa);
        let m = q.to_rotation_matrix().into_inner();
        let rotation = gram_schmidt(m.column(0).into(), m.column(1).into());
        Ok(FrameStation {
            xi,
            position,
            rotation,
        })
    }

    /// Position only; same interpolation as `eval` but cheaper.
    pub fn position(&self, xi: f64) -> Result<Vector3<f64>> {
        self.check_domain(xi)?;
        let xi = xi.clamp(self.xi_range.0, self.xi_range.1);
        let i = self.segment_index(xi);
        let (a, b) = (&self.stations[i], &self.stations[i + 1]);
        let t = (xi - a.xi) / (b.xi - a.xi);
        Ok(a.position.lerp(&b.position, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn straight() -> ParametricPath {
        ParametricPath::from_waypoints(
            &[Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)],
            10,
        )
        .unwrap()
    }

    #[test]
    fn straight_path_is_identity_framed() {
        let path = straight();
        assert_eq!(path.xi_range(), (0.0, 1.0));
        for st in path.stations() {
            assert_relative_eq!(st.rotation, Matrix3::identity(), epsilon = 1e-12);
            assert!(st.position.y.abs() < 1e-12 && st.position.z.abs() < 1e-12);
        }
    }

    #[test]
    fn straight_eval_midpoint() {
        let path = straight();
        let st = path.eval(0.5).unwrap();
        assert_relative_eq!(st.position, Vector3::new(0.5, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(st.rotation, Matrix3::identity(), epsilon = 1e-12);
    }

    #[test]
    fn eval_at_lower_bound_is_first_station() {
        let path = straight();
        let st = path.eval(0.0).unwrap();
        assert_eq!(st.position, path.stations()[0].position);
        assert_eq!(st.rotation, path.stations()[0].rotation);
    }

    #[test]
    fn eval_outside_domain_errors() {
        let path = straight();
        assert!(matches!(path.eval(1.2), Err(Error::Domain { .. })));
        assert!(matches!(path.eval(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn single_waypoint_is_an_error() {
        let r = ParametricPath::from_waypoints(&[Vector3::zeros()], 10);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn duplicate_waypoints_are_an_error() {
        let r =
            ParametricPath::from_waypoints(&[Vector3::zeros(), Vector3::zeros(), Vector3::x()], 10);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn l_shape_final_tangent() {
        // Expected final tangent of the Catmull-Rom interpolant, frozen
        // from a standalone finite-difference computation: at the last
        // station the spline derivative is 0.5 * (w2 - w1) direction,
        // i.e. (0, 1, 0) for this L shape.
        let path = ParametricPath::from_waypoints(
            &[
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
            ],
            50,
        )
        .unwrap();
        let last = path.stations().last().unwrap();
        let tangent: Vector3<f64> = last.rotation.column(0).into();
        assert!((tangent - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn frames_are_orthonormal_everywhere() {
        let path = ParametricPath::from_waypoints(
            &[
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.5, 0.3),
                Vector3::new(2.0, -0.5, 0.8),
                Vector3::new(3.0, 0.0, 0.0),
            ],
            20,
        )
        .unwrap();
        for i in 0..=200 {
            let xi = i as f64 / 200.0;
            let st = path.eval(xi).unwrap();
            assert!(orthonormality_defect(&st.rotation) < 1e-8, "xi = {xi}");
        }
    }

    #[test]
    fn tangent_aligned_with_position_differences() {
        let path = ParametricPath::from_waypoints(
            &[
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
                Vector3::new(2.0, 0.0, 1.0),
            ],
            40,
        )
        .unwrap();
        let st = path.stations();
        for i in 1..st.len() - 1 {
            let fd = (st[i + 1].position - st[i - 1].position).normalize();
            let tangent: Vector3<f64> = st[i].rotation.column(0).into();
            assert!(fd.dot(&tangent) >= 0.99, "station {i}");
        }
    }

    #[test]
    fn parallel_transport_does_not_spin() {
        // Normal turning between consecutive stations stays below the
        // tangent turning angle plus slack.
        let path = ParametricPath::from_waypoints(
            &[
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 1.0, 0.5),
                Vector3::new(2.0, 0.0, 1.0),
                Vector3::new(3.0, 1.0, 0.0),
            ],
            30,
        )
        .unwrap();
        let st = path.stations();
        for pair in st.windows(2) {
            let t0: Vector3<f64> = pair[0].rotation.column(0).into();
            let t1: Vector3<f64> = pair[1].rotation.column(0).into();
            let n0: Vector3<f64> = pair[0].rotation.column(1).into();
            let n1: Vector3<f64> = pair[1].rotation.column(1).into();
            let tangent_turn = t0.dot(&t1).clamp(-1.0, 1.0).acos();
            let normal_turn = n0.dot(&n1).clamp(-1.0, 1.0).acos();
            assert!(normal_turn <= tangent_turn + 1e-6);
        }
    }

    #[test]
    fn eval_is_continuous() {
        let path = ParametricPath::from_waypoints(
            &[
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
                Vector3::new(2.0, 0.0, 0.0),
            ],
            25,
        )
        .unwrap();
        let lipschitz = path.chord_length() / path.station_spacing() * 10.0;
        let h = 1e-6;
        for i in 1..100 {
            let xi = i as f64 / 100.0;
            let a = path.position(xi).unwrap();
            let b = path.position(xi + h).unwrap();
            assert!((b - a).norm() <= lipschitz * h);
        }
    }

    #[test]
    fn rejects_non_orthonormal_stations() {
        let mut stations = straight().stations().to_vec();
        stations[1].rotation[(0, 0)] = 1.5;
        assert!(ParametricPath::from_stations(stations).is_err());
    }
}
