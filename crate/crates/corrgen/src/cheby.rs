//! Chebyshev polynomial basis over the path domain.
//!
//! Every parametric quantity of a corridor (ellipse entries, offsets,
//! planar bounds) is a scalar polynomial in the path parameter expressed
//! in the Chebyshev-T basis, which keeps constraint assembly well
//! conditioned for high degrees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar polynomial in the Chebyshev-T basis over a path domain.
///
/// Coefficients are stored lowest order first: `coeffs[k]` multiplies
/// `T_k(s)` where `s` is the affine image of the path parameter in
/// `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPoly {
    pub coeffs: Vec<f64>,
    pub domain: (f64, f64),
}

const DOMAIN_EPS: f64 = 1e-12;

fn to_unit(xi: f64, domain: (f64, f64)) -> Result<f64> {
    let (lo, hi) = domain;
    let span = hi - lo;
    if xi < lo - DOMAIN_EPS * span.abs().max(1.0) || xi > hi + DOMAIN_EPS * span.abs().max(1.0) {
        return Err(Error::Domain { xi, lo, hi });
    }
    Ok(((2.0 * (xi - lo) / span) - 1.0).clamp(-1.0, 1.0))
}

/// Clenshaw recurrence for `sum_k c_k T_k(s)` with `s` in `[-1, 1]`.
fn clenshaw(coeffs: &[f64], s: f64) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return coeffs[0];
    }
    let two_s = 2.0 * s;
    let mut b_k1 = 0.0;
    let mut b_k2 = 0.0;
    for k in (1..n).rev() {
        let b_k = two_s * b_k1 - b_k2 + coeffs[k];
        b_k2 = b_k1;
        b_k1 = b_k;
    }
    s * b_k1 - b_k2 + coeffs[0]
}

impl ChebyshevPoly {
    pub fn new(coeffs: Vec<f64>, domain: (f64, f64)) -> Self {
        assert!(
            !coeffs.is_empty(),
            "polynomial needs at least one coefficient"
        );
        assert!(domain.0 < domain.1, "empty polynomial domain");
        Self { coeffs, domain }
    }

    /// Constant polynomial.
    pub fn constant(value: f64, domain: (f64, f64)) -> Self {
        Self::new(vec![value], domain)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluate at a path parameter inside the domain.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        let s = to_unit(xi, self.domain)?;
        Ok(clenshaw(&self.coeffs, s))
    }

    /// Coefficients of d/dxi in the same basis, including the chain-rule
    /// factor from mapping the domain onto `[-1, 1]`.
    pub fn derivative(&self) -> ChebyshevPoly {
        let n = self.coeffs.len();
        if n == 1 {
            return ChebyshevPoly::new(vec![0.0], self.domain);
        }
        // Standard backward recurrence: d_{k-1} = d_{k+1} + 2k c_k.
        let mut d = vec![0.0; n - 1];
        let mut next = 0.0; // d_{k+1}
        let mut next2 = 0.0; // d_{k+2}
        for k in (1..n).rev() {
            let dk = if k + 1 < n { next2 } else { 0.0 } + 2.0 * k as f64 * self.coeffs[k];
            d[k - 1] = dk;
            next2 = next;
            next = dk;
        }
        d[0] *= 0.5;
        let scale = 2.0 / (self.domain.1 - self.domain.0);
        for v in &mut d {
            *v *= scale;
        }
        ChebyshevPoly::new(d, self.domain)
    }
}

/// Row of basis values `[T_0(s), ..., T_n(s)]` at a path parameter.
///
/// These rows are the building blocks of the linear constraint matrix:
/// any polynomial value is the dot product of its coefficients with the
/// row at the evaluation point.
pub fn eval_basis_row(degree: usize, xi: f64, domain: (f64, f64)) -> Result<Vec<f64>> {
    let s = to_unit(xi, domain)?;
    let mut row = Vec::with_capacity(degree + 1);
    row.push(1.0);
    if degree >= 1 {
        row.push(s);
    }
    for k in 2..=degree {
        let v = 2.0 * s * row[k - 1] - row[k - 2];
        row.push(v);
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pure_t3_matches_closed_form() {
        // T3(s) = 4s^3 - 3s
        let p = ChebyshevPoly::new(vec![0.0, 0.0, 0.0, 1.0], (-1.0, 1.0));
        assert_eq!(p.eval(0.5).unwrap(), -1.0);
    }

    #[test]
    fn constant_everywhere() {
        let p = ChebyshevPoly::new(vec![2.0], (0.0, 3.0));
        assert_eq!(p.eval(0.0).unwrap(), 2.0);
        assert_eq!(p.eval(2.7).unwrap(), 2.0);
    }

    #[test]
    fn affine_map_endpoint() {
        let p = ChebyshevPoly::new(vec![0.0, 1.0], (0.0, 10.0));
        assert_eq!(p.eval(10.0).unwrap(), 1.0);
        assert_eq!(p.eval(0.0).unwrap(), -1.0);
    }

    #[test]
    fn eval_outside_domain_errors() {
        let p = ChebyshevPoly::new(vec![1.0], (0.0, 1.0));
        assert!(matches!(p.eval(1.2), Err(Error::Domain { .. })));
    }

    #[test]
    fn basis_row_closed_forms() {
        assert_eq!(
            eval_basis_row(2, 0.0, (-1.0, 1.0)).unwrap(),
            vec![1.0, 0.0, -1.0]
        );
        assert_eq!(eval_basis_row(0, 0.3, (-1.0, 1.0)).unwrap(), vec![1.0]);
        assert_eq!(
            eval_basis_row(3, 0.5, (-1.0, 1.0)).unwrap(),
            vec![1.0, 0.5, -0.5, -1.0]
        );
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let p = ChebyshevPoly::new(vec![5.0], (-1.0, 1.0));
        assert_eq!(p.derivative().coeffs, vec![0.0]);
    }

    #[test]
    fn derivative_of_t1() {
        let p = ChebyshevPoly::new(vec![0.0, 1.0], (-1.0, 1.0));
        assert_eq!(p.derivative().coeffs, vec![1.0]);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        // T2 on [0, 2], checked against central differences at 100 points.
        let p = ChebyshevPoly::new(vec![0.0, 0.0, 1.0], (0.0, 2.0));
        let d = p.derivative();
        let h = 1e-6;
        for i in 0..100 {
            let xi = 0.01 + 1.98 * (i as f64 / 99.0);
            let fd = (p.eval(xi + h).unwrap() - p.eval(xi - h).unwrap()) / (2.0 * h);
            assert!((d.eval(xi).unwrap() - fd).abs() < 1e-7, "xi = {xi}");
        }
    }

    #[test]
    fn second_derivative_is_continuous() {
        // d2/dxi2 by two applications of derivative(), against central
        // finite differences of the first derivative.
        let p = ChebyshevPoly::new(vec![0.3, -1.2, 0.5, 0.9, -0.4], (0.0, 1.0));
        let d1 = p.derivative();
        let d2 = d1.derivative();
        let h = 1e-5;
        for i in 0..100 {
            let xi = 0.001 + 0.998 * (i as f64 / 99.0);
            let fd = (d1.eval(xi + h).unwrap() - d1.eval(xi - h).unwrap()) / (2.0 * h);
            let exact = d2.eval(xi).unwrap();
            let scale = exact.abs().max(1.0);
            assert!((exact - fd).abs() / scale < 1e-5, "xi = {xi}");
        }
    }

    proptest! {
        // Clenshaw agrees with the direct trigonometric form.
        #[test]
        fn clenshaw_matches_trig_form(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..31),
            s in -1.0f64..1.0,
        ) {
            let p = ChebyshevPoly::new(coeffs.clone(), (-1.0, 1.0));
            let direct: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * (k as f64 * s.acos()).cos())
                .sum();
            prop_assert!((p.eval(s).unwrap() - direct).abs() < 1e-10);
        }

        // Basis rows nest: the degree-n row is a prefix of the degree-(n+1) row.
        #[test]
        fn basis_rows_nest(n in 0usize..20, xi in -1.0f64..1.0) {
            let lo = eval_basis_row(n, xi, (-1.0, 1.0)).unwrap();
            let hi = eval_basis_row(n + 1, xi, (-1.0, 1.0)).unwrap();
            prop_assert_eq!(&hi[..=n], &lo[..]);
        }
    }
}
