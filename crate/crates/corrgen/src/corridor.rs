//! Solved corridor representations.
//!
//! A 3D corridor stores the symmetric ellipse matrix entries and the
//! linear offset as Chebyshev polynomials; the defining inequality is
//! `x'E(xi)x + d(xi)'x - 1 <= 0`. The centered ellipse form (center,
//! axes, area) is recovered on demand by completing the square, never
//! stored. 2D corridors are a pair of bound polynomials.

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::cheby::ChebyshevPoly;
use crate::error::{Error, Result};
use crate::path::ParametricPath;

pub const DEFAULT_PD_MARGIN: f64 = 1e-7;

/// Spatial corridor: parametric off-centered ellipse swept along the path.
#[derive(Debug, Clone, PartialEq)]
pub struct Corridor3D {
    pub e11: ChebyshevPoly,
    pub e12: ChebyshevPoly,
    pub e22: ChebyshevPoly,
    pub d1: ChebyshevPoly,
    pub d2: ChebyshevPoly,
    pub degree: usize,
    pub domain: (f64, f64),
}

/// Planar corridor: area between an upper and a lower bound polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Corridor2D {
    pub b_plus: ChebyshevPoly,
    pub b_minus: ChebyshevPoly,
    pub degree: usize,
    pub domain: (f64, f64),
}

/// Cross section of a 3D corridor at a fixed parameter, in centered form.
///
/// The boundary is `(x - center)' matrix (x - center) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseSlice {
    pub xi: f64,
    pub center: Vector2<f64>,
    pub matrix: Matrix2<f64>,
    pub semi_axes: (f64, f64),
    pub angle: f64,
}

impl EllipseSlice {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.semi_axes.0 * self.semi_axes.1
    }

    /// Boundary point at angle `theta` in the transverse plane.
    pub fn boundary_point(&self, theta: f64) -> Vector2<f64> {
        let dir1 = Vector2::new(self.angle.cos(), self.angle.sin());
        let dir2 = Vector2::new(-self.angle.sin(), self.angle.cos());
        self.center
            + dir1 * (self.semi_axes.0 * theta.cos())
            + dir2 * (self.semi_axes.1 * theta.sin())
    }
}

/// Triangle mesh of a corridor boundary, vertices in world coordinates.
#[derive(Debug, Clone, Default)]
pub struct BoundaryMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl Corridor3D {
    /// Ellipse matrix at a parameter.
    pub fn matrix_at(&self, xi: f64) -> Result<Matrix2<f64>> {
        let e11 = self.e11.eval(xi)?;
        let e12 = self.e12.eval(xi)?;
        let e22 = self.e22.eval(xi)?;
        Ok(Matrix2::new(e11, e12, e12, e22))
    }

    /// Offset vector at a parameter.
    pub fn offset_at(&self, xi: f64) -> Result<Vector2<f64>> {
        Ok(Vector2::new(self.d1.eval(xi)?, self.d2.eval(xi)?))
    }

    /// Defining inequality value: negative inside, zero on the boundary,
    /// positive outside.
    pub fn eval_inequality(&self, xi: f64, x_perp: &Vector2<f64>) -> Result<f64> {
        let e = self.matrix_at(xi)?;
        let d = self.offset_at(xi)?;
        Ok((x_perp.transpose() * e * x_perp)[0] + d.dot(x_perp) - 1.0)
    }

    pub fn contains(&self, xi: f64, x_perp: &Vector2<f64>) -> Result<bool> {
        Ok(self.eval_inequality(xi, x_perp)? <= 0.0)
    }

    /// Centered ellipse at a parameter, by completing the square:
    /// center `-E^{-1} d / 2`, normalized matrix `E / (1 + d'E^{-1}d/4)`.
    pub fn recover_ellipse(&self, xi: f64) -> Result<EllipseSlice> {
        let e = self.matrix_at(xi)?;
        let d = self.offset_at(xi)?;
        let det = e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(0, 1)];
        if det <= 0.0 || e[(0, 0)] <= 0.0 {
            return Err(Error::Degenerate {
                xi,
                reason: format!("E not positive definite (det = {det:.3e})"),
            });
        }
        let e_inv = Matrix2::new(e[(1, 1)], -e[(0, 1)], -e[(0, 1)], e[(0, 0)]) / det;
        let center = -(e_inv * d) * 0.5;
        let q = (d.transpose() * e_inv * d)[0] * 0.25;
        let m = e / (1.0 + q);

        // Analytic symmetric 2x2 eigendecomposition; the smaller
        // eigenvalue carries the larger semi-axis.
        let t = 0.5 * (m[(0, 0)] + m[(1, 1)]);
        let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
        let r = (half_diff * half_diff + m[(0, 1)] * m[(0, 1)]).sqrt();
        let lam_small = t - r;
        let lam_big = t + r;
        if lam_small <= 0.0 {
            return Err(Error::Degenerate {
                xi,
                reason: format!("normalized matrix has eigenvalue {lam_small:.3e}"),
            });
        }
        let v = if m[(0, 1)].abs() > 1e-300 {
            Vector2::new(m[(0, 1)], lam_small - m[(0, 0)]).normalize()
        } else if m[(0, 0)] <= m[(1, 1)] {
            Vector2::new(1.0, 0.0)
        } else {
            Vector2::new(0.0, 1.0)
        };
        Ok(EllipseSlice {
            xi,
            center,
            matrix: m,
            semi_axes: (1.0 / lam_small.sqrt(), 1.0 / lam_big.sqrt()),
            angle: v.y.atan2(v.x),
        })
    }

    /// Corridor volume by trapezoidal quadrature of the exact slice area.
    pub fn volume(&self, samples: usize) -> Result<f64> {
        assert!(samples >= 2, "volume needs at least 2 samples");
        let (lo, hi) = self.domain;
        let h = (hi - lo) / (samples - 1) as f64;
        let mut acc = 0.0;
        let mut prev = self.recover_ellipse(lo)?.area();
        for i in 1..samples {
            let xi = lo + h * i as f64;
            let area = self.recover_ellipse(xi.min(hi))?.area();
            acc += 0.5 * (prev + area) * h;
            prev = area;
        }
        Ok(acc)
    }

    /// Triangulated boundary tube in world coordinates.
    pub fn sample_boundary_mesh(
        &self,
        path: &ParametricPath,
        stations: usize,
        ring: usize,
    ) -> Result<BoundaryMesh> {
        if stations < 2 || ring < 3 {
            return Err(Error::InvalidInput(
                "mesh needs at least 2 stations and 3 ring points".into(),
            ));
        }
        let (lo, hi) = self.domain;
        let mut mesh = BoundaryMesh::default();
        for i in 0..stations {
            let xi = lo + (hi - lo) * i as f64 / (stations - 1) as f64;
            let slice = self.recover_ellipse(xi)?;
            let frame = path.eval(xi)?;
            for k in 0..ring {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / ring as f64;
                let p = slice.boundary_point(theta);
                let world = frame.position + frame.rotation * Vector3::new(0.0, p.x, p.y);
                mesh.vertices.push(world);
            }
        }
        for i in 0..stations - 1 {
            for k in 0..ring {
                let a = i * ring + k;
                let b = i * ring + (k + 1) % ring;
                let c = (i + 1) * ring + k;
                let d = (i + 1) * ring + (k + 1) % ring;
                mesh.triangles.push([a, b, c]);
                mesh.triangles.push([b, d, c]);
            }
        }
        Ok(mesh)
    }

    /// Minimum eigenvalue of `E` over `n` uniform samples.
    pub fn min_eigenvalue(&self, n: usize) -> Result<f64> {
        let (lo, hi) = self.domain;
        let mut min_eig = f64::INFINITY;
        for i in 0..n {
            let xi = if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            };
            let e = self.matrix_at(xi)?;
            let t = 0.5 * (e[(0, 0)] + e[(1, 1)]);
            let half_diff = 0.5 * (e[(0, 0)] - e[(1, 1)]);
            let r = (half_diff * half_diff + e[(0, 1)] * e[(0, 1)]).sqrt();
            min_eig = min_eig.min(t - r);
        }
        Ok(min_eig)
    }
}

impl Corridor2D {
    /// `(lower, upper)` bounds at `xi`.
    pub fn bounds_at(&self, xi: f64) -> Result<(f64, f64)> {
        Ok((self.b_minus.eval(xi)?, self.b_plus.eval(xi)?))
    }

    pub fn contains(&self, xi: f64, x: f64) -> Result<bool> {
        let (lo, hi) = self.bounds_at(xi)?;
        Ok(x >= lo && x <= hi)
    }

    /// Enclosed area by trapezoidal quadrature of `b_plus - b_minus`.
    pub fn area(&self, samples: usize) -> Result<f64> {
        assert!(samples >= 2, "area needs at least 2 samples");
        let (lo, hi) = self.domain;
        let h = (hi - lo) / (samples - 1) as f64;
        let width = |xi: f64| -> Result<f64> {
            let (m, p) = self.bounds_at(xi)?;
            Ok(p - m)
        };
        let mut acc = 0.0;
        let mut prev = width(lo)?;
        for i in 1..samples {
            let xi = (lo + h * i as f64).min(hi);
            let w = width(xi)?;
            acc += 0.5 * (prev + w) * h;
            prev = w;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn constant_corridor(
        e11: f64,
        e12: f64,
        e22: f64,
        d1: f64,
        d2: f64,
        domain: (f64, f64),
    ) -> Corridor3D {
        Corridor3D {
            e11: ChebyshevPoly::constant(e11, domain),
            e12: ChebyshevPoly::constant(e12, domain),
            e22: ChebyshevPoly::constant(e22, domain),
            d1: ChebyshevPoly::constant(d1, domain),
            d2: ChebyshevPoly::constant(d2, domain),
            degree: 0,
            domain,
        }
    }

    #[test]
    fn inequality_unit_circle() {
        let c = constant_corridor(1.0, 0.0, 1.0, 0.0, 0.0, (0.0, 1.0));
        assert_eq!(c.eval_inequality(0.5, &Vector2::zeros()).unwrap(), -1.0);
        assert_eq!(
            c.eval_inequality(0.5, &Vector2::new(1.0, 0.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn inequality_with_offset() {
        let c = constant_corridor(1.0, 0.0, 1.0, -1.0, 0.0, (0.0, 1.0));
        assert_relative_eq!(
            c.eval_inequality(0.3, &Vector2::new(0.5, 0.0)).unwrap(),
            -1.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn recover_unit_circle() {
        let c = constant_corridor(1.0, 0.0, 1.0, 0.0, 0.0, (0.0, 1.0));
        let s = c.recover_ellipse(0.5).unwrap();
        assert_relative_eq!(s.center, Vector2::zeros(), epsilon = 1e-12);
        assert_relative_eq!(s.semi_axes.0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.semi_axes.1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.area(), PI, epsilon = 1e-12);
    }

    #[test]
    fn recover_axis_aligned() {
        let c = constant_corridor(4.0, 0.0, 1.0, 0.0, 0.0, (0.0, 1.0));
        let s = c.recover_ellipse(0.5).unwrap();
        assert_relative_eq!(s.semi_axes.0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.semi_axes.1, 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.area(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn recover_offset_ellipse() {
        // Frozen from a symbolic completion of the square:
        // E = I, d = (-1, 0) gives center (1/2, 0), q = 1/4, area 1.25 pi.
        let c = constant_corridor(1.0, 0.0, 1.0, -1.0, 0.0, (0.0, 1.0));
        let s = c.recover_ellipse(0.2).unwrap();
        assert_relative_eq!(s.center, Vector2::new(0.5, 0.0), epsilon = 1e-12);
        assert_relative_eq!(s.area(), 1.25 * PI, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_slice_errors() {
        let c = constant_corridor(1.0, 2.0, 1.0, 0.0, 0.0, (0.0, 1.0));
        assert!(matches!(
            c.recover_ellipse(0.5),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn volume_of_constant_slices() {
        let c = constant_corridor(1.0, 0.0, 1.0, 0.0, 0.0, (0.0, 2.0));
        assert_relative_eq!(c.volume(400).unwrap(), 2.0 * PI, epsilon = 1e-9);
        let c = constant_corridor(4.0, 0.0, 1.0, 0.0, 0.0, (0.0, 1.0));
        assert_relative_eq!(c.volume(400).unwrap(), PI / 2.0, epsilon = 1e-9);
        let c = constant_corridor(1.0, 0.0, 1.0, -1.0, 0.0, (0.0, 1.0));
        assert_relative_eq!(c.volume(400).unwrap(), 1.25 * PI, epsilon = 1e-9);
    }

    #[test]
    fn volume_refinement_invariance() {
        let domain = (0.0, 1.0);
        let c = Corridor3D {
            e11: ChebyshevPoly::new(vec![2.0, 0.3, 0.1], domain),
            e12: ChebyshevPoly::new(vec![0.05, 0.02], domain),
            e22: ChebyshevPoly::new(vec![1.5, -0.2], domain),
            d1: ChebyshevPoly::new(vec![0.1, 0.05], domain),
            d2: ChebyshevPoly::constant(0.0, domain),
            degree: 2,
            domain,
        };
        let v1 = c.volume(200).unwrap();
        let v2 = c.volume(400).unwrap();
        assert!((v2 - v1).abs() <= 1e-4 * v1);
    }

    #[test]
    fn boundary_consistency() {
        // Boundary samples of the recovered ellipse sit on the zero set of
        // the defining inequality.
        let c = constant_corridor(2.0, 0.4, 1.0, -0.5, 0.3, (0.0, 1.0));
        let s = c.recover_ellipse(0.5).unwrap();
        for k in 0..100 {
            let theta = 2.0 * PI * k as f64 / 100.0;
            let p = s.boundary_point(theta);
            let v = c.eval_inequality(0.5, &p).unwrap();
            assert!(v.abs() <= 1e-8, "theta = {theta}, value = {v}");
        }
    }

    #[test]
    fn mesh_counts_and_radius() {
        let path =
            ParametricPath::from_waypoints(&[Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0)], 10)
                .unwrap();
        let c = constant_corridor(1.0, 0.0, 1.0, 0.0, 0.0, (0.0, 1.0));
        let mesh = c.sample_boundary_mesh(&path, 2, 4).unwrap();
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.triangles.len(), 8);
        for v in &mesh.vertices {
            let axis_dist = (v.y * v.y + v.z * v.z).sqrt();
            assert_relative_eq!(axis_dist, 1.0, epsilon = 1e-9);
        }
        let mesh = c.sample_boundary_mesh(&path, 2, 3).unwrap();
        assert_eq!(mesh.vertices.len(), 6);
        assert_eq!(mesh.triangles.len(), 6);
    }

    #[test]
    fn mesh_vertices_satisfy_inequality() {
        let path =
            ParametricPath::from_waypoints(&[Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0)], 10)
                .unwrap();
        let c = constant_corridor(2.0, 0.3, 1.2, -0.4, 0.2, (0.0, 1.0));
        let mesh = c.sample_boundary_mesh(&path, 8, 12).unwrap();
        let (lo, hi) = c.domain;
        for (idx, v) in mesh.vertices.iter().enumerate() {
            let i = idx / 12;
            let xi = lo + (hi - lo) * i as f64 / 7.0;
            let frame = path.eval(xi).unwrap();
            let rel = v - frame.position;
            let x_perp = Vector2::new(
                rel.dot(&frame.rotation.column(1).into_owned()),
                rel.dot(&frame.rotation.column(2).into_owned()),
            );
            assert!(c.eval_inequality(xi, &x_perp).unwrap().abs() <= 1e-6);
            assert!(c.contains(xi, &x_perp).unwrap());
            // Scaling about the slice center leaves the corridor.
            let slice = c.recover_ellipse(xi).unwrap();
            let scaled = slice.center + (x_perp - slice.center) * 1.01;
            assert!(!c.contains(xi, &scaled).unwrap());
        }
    }

    #[test]
    fn corridor2d_area() {
        let domain = (0.0, 1.0);
        let c = Corridor2D {
            b_plus: ChebyshevPoly::constant(0.4, domain),
            b_minus: ChebyshevPoly::constant(-0.4, domain),
            degree: 0,
            domain,
        };
        assert_relative_eq!(c.area(200).unwrap(), 0.8, epsilon = 1e-12);
        let z = Corridor2D {
            b_plus: ChebyshevPoly::constant(0.0, domain),
            b_minus: ChebyshevPoly::constant(0.0, domain),
            degree: 0,
            domain,
        };
        assert_eq!(z.area(200).unwrap(), 0.0);
    }

    #[test]
    fn corridor2d_area_of_shifted_t1() {
        // b_plus = 2 + T1 on [0, 1]; integral of T1 over the mapped domain
        // is 0, so the area against b_minus = 0 is exactly 2.
        let domain = (0.0, 1.0);
        let c = Corridor2D {
            b_plus: ChebyshevPoly::new(vec![2.0, 1.0], domain),
            b_minus: ChebyshevPoly::constant(0.0, domain),
            degree: 1,
            domain,
        };
        assert_relative_eq!(c.area(401).unwrap(), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn inequality_second_derivative_is_finite() {
        let domain = (0.0, 1.0);
        let c = Corridor3D {
            e11: ChebyshevPoly::new(vec![2.0, 0.3, -0.1, 0.05], domain),
            e12: ChebyshevPoly::new(vec![0.1, -0.05, 0.02], domain),
            e22: ChebyshevPoly::new(vec![1.5, 0.2, 0.1], domain),
            d1: ChebyshevPoly::new(vec![-0.3, 0.1], domain),
            d2: ChebyshevPoly::new(vec![0.2, -0.1], domain),
            degree: 3,
            domain,
        };
        let polys = [&c.e11, &c.e12, &c.e22, &c.d1, &c.d2];
        let h = 1e-5;
        let mut rng: u64 = 7;
        let mut next = || {
            rng = rng
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for p in polys {
            let d1p = p.derivative();
            let d2p = d1p.derivative();
            for _ in 0..100 {
                let xi = 0.001 + 0.998 * next();
                let fd = (d1p.eval(xi + h).unwrap() - d1p.eval(xi - h).unwrap()) / (2.0 * h);
                let exact = d2p.eval(xi).unwrap();
                assert!(exact.is_finite());
                let scale = exact.abs().max(1.0);
                assert!((exact - fd).abs() / scale < 1e-4);
            }
        }
    }
}
