//! Truncated Taylor expansions at a point.
//!
//! A [`Jet`] of order `m` stores normalized coefficients
//! `c_j = h^{[j]}(x0) / j!`, `j = 0..=m`. Products are truncated Cauchy
//! convolutions, so derivatives of products, reciprocals and exponentials
//! are propagated exactly up to rounding.

use crate::error::{Error, Result};
use crate::scalar::{cx, factorial, is_finite, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T: Real> {
    x0: T,
    coeffs: Vec<Cx<T>>,
}

/// Leading coefficients below this modulus are treated as zero by
/// [`Jet::reciprocal`].
pub const RECIPROCAL_THRESHOLD: f64 = 1e-14;

impl<T: Real> Jet<T> {
    pub fn new(x0: T, coeffs: Vec<Cx<T>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a jet needs at least one coefficient".into()));
        }
        if let Some(i) = coeffs.iter().position(|&c| !is_finite(c)) {
            return Err(Error::InvalidArgument(format!("jet coefficient {i} is not finite")));
        }
        Ok(Jet { x0, coeffs })
    }

    /// From raw derivative values `h^{[j]}(x0)`.
    pub fn from_derivatives(x0: T, derivatives: &[Cx<T>]) -> Result<Self> {
        let coeffs = derivatives
            .iter()
            .enumerate()
            .map(|(j, &d)| d / factorial::<T>(j))
            .collect();
        Self::new(x0, coeffs)
    }

    pub fn constant(x0: T, value: Cx<T>, order: usize) -> Self {
        let mut coeffs = vec![Cx::new(T::zero(), T::zero()); order + 1];
        coeffs[0] = value;
        Jet { x0, coeffs }
    }

    pub fn zero(x0: T, order: usize) -> Self {
        Self::constant(x0, Cx::new(T::zero(), T::zero()), order)
    }

    /// The unit jet `1 + 0·t + …`.
    pub fn one(x0: T, order: usize) -> Self {
        Self::constant(x0, cx(T::one()), order)
    }

    /// The independent variable `x` expanded at `x0`.
    pub fn variable(x0: T, order: usize) -> Self {
        let mut jet = Self::constant(x0, cx(x0), order);
        if order >= 1 {
            jet.coeffs[1] = cx(T::one());
        }
        jet
    }

    pub fn anchor(&self) -> T {
        self.x0
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// `h(x0)`.
    pub fn value(&self) -> Cx<T> {
        self.coeffs[0]
    }

    /// Raw derivative `h^{[j]}(x0) = j!·c_j`.
    pub fn derivative_value(&self, j: usize) -> Cx<T> {
        self.coeffs[j] * factorial::<T>(j)
    }

    /// All raw derivatives `h^{[0]}(x0), …, h^{[m]}(x0)`.
    pub fn derivative_values(&self) -> Vec<Cx<T>> {
        (0..=self.order()).map(|j| self.derivative_value(j)).collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        Jet {
            x0: self.x0,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    fn check_anchor(&self, other: &Jet<T>) -> Result<()> {
        if self.x0 == other.x0 {
            Ok(())
        } else {
            Err(Error::AnchorMismatch {
                left: self.x0.as_f64(),
                right: other.x0.as_f64(),
            })
        }
    }

    pub fn add(&self, other: &Jet<T>) -> Result<Self> {
        self.check_anchor(other)?;
        let m = self.order().min(other.order());
        Ok(Jet {
            x0: self.x0,
            coeffs: (0..=m).map(|j| self.coeffs[j] + other.coeffs[j]).collect(),
        })
    }

    pub fn sub(&self, other: &Jet<T>) -> Result<Self> {
        self.check_anchor(other)?;
        let m = self.order().min(other.order());
        Ok(Jet {
            x0: self.x0,
            coeffs: (0..=m).map(|j| self.coeffs[j] - other.coeffs[j]).collect(),
        })
    }

    /// Truncated Cauchy product; result order is the smaller order.
    pub fn mul(&self, other: &Jet<T>) -> Result<Self> {
        self.check_anchor(other)?;
        let m = self.order().min(other.order());
        let coeffs = (0..=m)
            .map(|k| {
                (0..=k).fold(Cx::new(T::zero(), T::zero()), |acc, j| {
                    acc + self.coeffs[j] * other.coeffs[k - j]
                })
            })
            .collect();
        Ok(Jet { x0: self.x0, coeffs })
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Jet {
            x0: self.x0,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// `1/h`, from `Σ_j a_j b_{k-j} = δ_{k0}`.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0.norm() <= T::lit(RECIPROCAL_THRESHOLD) {
            return Err(Error::ZeroLeadingCoefficient {
                modulus: a0.norm().as_f64(),
            });
        }
        let inv = a0.inv();
        let mut b: Vec<Cx<T>> = Vec::with_capacity(self.coeffs.len());
        b.push(inv);
        for k in 1..self.coeffs.len() {
            let s = (1..=k).fold(Cx::new(T::zero(), T::zero()), |acc, j| acc + self.coeffs[j] * b[k - j]);
            b.push(-s * inv);
        }
        Ok(Jet { x0: self.x0, coeffs: b })
    }

    /// `h'`; the order drops by one.
    pub fn derive(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::OrderUnderflow);
        }
        Ok(Jet {
            x0: self.x0,
            coeffs: (1..self.coeffs.len())
                .map(|j| self.coeffs[j] * T::from_usize_lossy(j))
                .collect(),
        })
    }

    /// `exp(h)`, from `b' = h'·b`.
    pub fn exp(&self) -> Self {
        let mut b: Vec<Cx<T>> = Vec::with_capacity(self.coeffs.len());
        b.push(self.coeffs[0].exp());
        for k in 1..self.coeffs.len() {
            let s = (1..=k).fold(Cx::new(T::zero(), T::zero()), |acc, j| {
                acc + self.coeffs[j] * b[k - j] * T::from_usize_lossy(j)
            });
            b.push(s / T::from_usize_lossy(k));
        }
        Jet { x0: self.x0, coeffs: b }
    }

    /// Integer power by repeated squaring (negative powers via the reciprocal).
    pub fn powi(&self, n: i32) -> Result<Self> {
        let base = if n < 0 { self.reciprocal()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Jet::one(self.x0, self.order());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// Evaluate the truncated series at `x`.
    pub fn eval(&self, x: T) -> Cx<T> {
        let t = x - self.x0;
        self.coeffs
            .iter()
            .rev()
            .fold(Cx::new(T::zero(), T::zero()), |acc, &c| acc * t + c)
    }

    /// Largest coefficient-wise modulus difference over the common order.
    pub fn max_coeff_diff(&self, other: &Jet<T>) -> T {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(p, q)| (p - q).norm())
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x0: f64, c: &[f64]) -> Jet<f64> {
        Jet::new(x0, c.iter().map(|&v| cx(v)).collect()).unwrap()
    }

    fn exp_jet(rate: f64, order: usize) -> Jet<f64> {
        let c: Vec<f64> = (0..=order).map(|j| rate.powi(j as i32) / factorial::<f64>(j)).collect();
        re(0.0, &c)
    }

    #[test]
    fn polynomial_product() {
        let p = re(0.0, &[1.0, 1.0, 0.0]);
        let q = re(0.0, &[1.0, -1.0, 0.0]);
        assert_eq!(p.mul(&q).unwrap(), re(0.0, &[1.0, 0.0, -1.0]));
        assert_eq!(p.mul(&Jet::one(0.0, 2)).unwrap(), p);
    }

    #[test]
    fn exponential_product_is_one() {
        let prod = exp_jet(1.0, 5).mul(&exp_jet(-1.0, 5)).unwrap();
        assert!((prod.coeffs()[0].re - 1.0).abs() < 1e-12);
        assert!(prod.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn result_order_is_the_minimum() {
        let p = Jet::<f64>::one(0.0, 3);
        let q = Jet::<f64>::one(0.0, 5);
        assert_eq!(p.add(&q).unwrap().order(), 3);
        assert_eq!(q.mul(&p).unwrap().order(), 3);
    }

    #[test]
    fn anchor_mismatch() {
        let p = Jet::<f64>::one(0.0, 3);
        let q = Jet::<f64>::one(1.0, 3);
        assert!(matches!(p.mul(&q), Err(Error::AnchorMismatch { .. })));
        assert!(matches!(p.add(&q), Err(Error::AnchorMismatch { .. })));
    }

    #[test]
    fn reciprocal_cases() {
        let k = Jet::constant(0.0, cx(4.0), 3);
        assert_eq!(k.reciprocal().unwrap(), re(0.0, &[0.25, 0.0, 0.0, 0.0]));
        let c = 0.7;
        let inv = exp_jet(2.0 * c, 8).reciprocal().unwrap();
        assert!(inv.max_coeff_diff(&exp_jet(-2.0 * c, 8)) < 1e-14);
        let a = re(0.0, &[0.5, -0.3, 0.2, 0.9, -1.1]);
        let unit = a.mul(&a.reciprocal().unwrap()).unwrap();
        assert!(unit.max_coeff_diff(&Jet::one(0.0, 4)) < 1e-12);
        assert!(matches!(
            re(0.0, &[0.0, 1.0]).reciprocal(),
            Err(Error::ZeroLeadingCoefficient { .. })
        ));
    }

    #[test]
    fn derive_cases() {
        let sq = re(0.0, &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(sq.derive().unwrap(), re(0.0, &[0.0, 2.0, 0.0]));
        assert!(Jet::<f64>::constant(0.0, cx(3.0), 4)
            .derive()
            .unwrap()
            .coeffs()
            .iter()
            .all(|c| c.norm() == 0.0));
        let c = 1.3;
        let e = exp_jet(2.0 * c, 7);
        let de = e.derive().unwrap();
        assert!(de.max_coeff_diff(&e.scale(cx(2.0 * c)).truncate(6)) < 1e-12);
        assert_eq!(Jet::<f64>::one(0.0, 0).derive(), Err(Error::OrderUnderflow));
    }

    #[test]
    fn exp_and_powi() {
        let x = Jet::variable(0.0, 6);
        let e = x.scale(cx(0.5)).exp();
        assert!(e.max_coeff_diff(&exp_jet(0.5, 6)) < 1e-15);
        let cube = Jet::variable(2.0, 4).powi(3).unwrap();
        // x^3 at 2: 8, 12, 6, 1, 0
        assert!(cube.max_coeff_diff(&re(2.0, &[8.0, 12.0, 6.0, 1.0, 0.0])) < 1e-14);
        let inv = Jet::variable(2.0, 3).powi(-1).unwrap();
        assert!(inv.max_coeff_diff(&re(2.0, &[0.5, -0.25, 0.125, -0.0625])) < 1e-15);
    }

    #[test]
    fn derivative_values_undo_normalization() {
        let e = exp_jet(2.0, 5);
        for (j, d) in e.derivative_values().into_iter().enumerate() {
            assert!((d.re - 2f64.powi(j as i32)).abs() < 1e-12);
        }
        let j = Jet::from_derivatives(0.0, &[cx(1.0), cx(2.0), cx(4.0)]).unwrap();
        assert!(j.max_coeff_diff(&exp_jet(2.0, 2)) < 1e-15);
    }
}
