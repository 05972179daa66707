//! Generalized derivatives, generalized Taylor polynomials and
//! least-squares projection onto `φ_k = f·ψ_k`.
//!
//! The generalized derivatives of `h` are
//!
//! ```text
//! γ_0 = h,   γ_k = φ^{(-1)^{k-1}} · (γ_{k-1})'
//! ```
//!
//! (`φ` for odd `k`, `1/φ` for even `k`). They are only needed at points, so
//! `h` and `φ` are turned into jets by least-squares Chebyshev fits and the
//! chain runs on jets. Each level of the chain then costs one exact jet
//! derivative instead of one more numerical differentiation of noisy grid
//! data.

use crate::chebfit::{ChebyshevFit, FitOptions};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::jet::Jet;
use crate::linalg::HouseholderQr;
use crate::recint::RecursiveFamily;
use crate::scalar::{cx, factorial, Cx, Real};

/// Orders above this are computed but flagged as degraded.
pub const SAFE_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaOptions<T: Real> {
    pub fit: FitOptions<T>,
    pub safe_depth: usize,
}

impl<T: Real> Default for GammaOptions<T> {
    fn default() -> Self {
        GammaOptions {
            fit: FitOptions::default(),
            safe_depth: SAFE_DEPTH,
        }
    }
}

/// `γ_0(h)(x0), …, γ_n(h)(x0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenDerivativeSequence<T: Real> {
    pub values: Vec<Cx<T>>,
    pub x0: T,
    /// Set when `n` exceeds the safe depth.
    pub degraded: bool,
}

impl<T: Real> GenDerivativeSequence<T> {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// `α_k = γ_k/k!`.
    pub fn taylor_coefficients(&self) -> Vec<Cx<T>> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &g)| g / factorial::<T>(k))
            .collect()
    }
}

/// Generalized derivatives from jets: `h_jet` of order `n` and `phi_jet` of
/// order `n - 1` or more, at the same point. Returns `γ_0..=γ_n` there.
pub fn gamma_jets<T: Real>(h_jet: &Jet<T>, phi_jet: &Jet<T>, n: usize) -> Result<Vec<Cx<T>>> {
    if h_jet.order() < n {
        return Err(Error::OrderBudget {
            needed: n,
            got: h_jet.order(),
        });
    }
    if n > 0 && phi_jet.order() + 1 < n {
        return Err(Error::OrderBudget {
            needed: n - 1,
            got: phi_jet.order(),
        });
    }
    let mut values = Vec::with_capacity(n + 1);
    let mut g = h_jet.truncate(n);
    values.push(g.value());
    if n == 0 {
        return Ok(values);
    }
    let phi = phi_jet.truncate(n - 1);
    let inv_phi = phi.reciprocal()?;
    for k in 1..=n {
        let weight = if k % 2 == 1 { &phi } else { &inv_phi };
        g = weight.truncate(n - k).mul(&g.derive()?)?;
        values.push(g.value());
    }
    Ok(values)
}

fn check_grid<T: Real>(h: &GridFunction<T>, family: &RecursiveFamily<T>) -> Result<()> {
    if h.grid().same_nodes(family.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Generalized derivatives of `h` at the family's anchor.
pub fn gamma_seq<T: Real>(
    h: &GridFunction<T>,
    family: &RecursiveFamily<T>,
    n: usize,
) -> Result<GenDerivativeSequence<T>> {
    gamma_seq_with(h, family, n, &GammaOptions::default())
}

pub fn gamma_seq_with<T: Real>(
    h: &GridFunction<T>,
    family: &RecursiveFamily<T>,
    n: usize,
    options: &GammaOptions<T>,
) -> Result<GenDerivativeSequence<T>> {
    check_grid(h, family)?;
    let index = family.x0_index();
    let x0 = family.x0();
    let h_jet = ChebyshevFit::around(h, index, &options.fit)?.jet_at(x0, n)?;
    let phi_jet = ChebyshevFit::around(family.phi(), index, &options.fit)?.jet_at(x0, n.saturating_sub(1))?;
    Ok(GenDerivativeSequence {
        values: gamma_jets(&h_jet, &phi_jet, n)?,
        x0,
        degraded: n > options.safe_depth,
    })
}

/// `P(x) = Σ α_k ψ_k(x)` over a family.
#[derive(Clone, Debug)]
pub struct GenPolynomial<'a, T: Real> {
    alpha: Vec<Cx<T>>,
    family: &'a RecursiveFamily<T>,
    degraded: bool,
}

impl<'a, T: Real> GenPolynomial<'a, T> {
    pub fn new(alpha: Vec<Cx<T>>, family: &'a RecursiveFamily<T>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument(
                "a generalized polynomial needs a coefficient".into(),
            ));
        }
        if alpha.len() - 1 > family.order() {
            return Err(Error::OrderOutOfRange {
                requested: alpha.len() - 1,
                available: family.order(),
            });
        }
        if alpha.iter().any(|c| !crate::scalar::is_finite(*c)) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(GenPolynomial {
            alpha,
            family,
            degraded: false,
        })
    }

    pub fn alpha(&self) -> &[Cx<T>] {
        &self.alpha
    }

    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn family(&self) -> &'a RecursiveFamily<T> {
        self.family
    }

    /// True when the coefficients came from derivatives past the safe depth.
    pub fn degraded(&self) -> bool {
        self.degraded
    }

    /// `P(x)` for `x` in `[a, b]`.
    pub fn eval(&self, x: T) -> Result<Cx<T>> {
        let mut sum = cx(T::zero());
        for (k, &a) in self.alpha.iter().enumerate() {
            if a != cx(T::zero()) {
                sum = sum + a * factorial::<T>(k) * self.family.psi_scaled(k)?.interpolate(x)?;
            }
        }
        Ok(sum)
    }

    /// `P` on the family's grid.
    pub fn to_grid_function(&self) -> Result<GridFunction<T>> {
        let grid = self.family.grid();
        let mut values = vec![cx(T::zero()); grid.len()];
        for (k, &a) in self.alpha.iter().enumerate() {
            let s = a * factorial::<T>(k);
            for (v, &p) in values.iter_mut().zip(self.family.psi_scaled(k)?.values()) {
                *v = *v + s * p;
            }
        }
        GridFunction::new(grid.clone(), values)
    }
}

/// `α_k = γ_k(h)(x0)/k!`, `k = 0..=n`.
pub fn gen_taylor_coeffs<'a, T: Real>(
    h: &GridFunction<T>,
    family: &'a RecursiveFamily<T>,
    n: usize,
) -> Result<GenPolynomial<'a, T>> {
    gen_taylor_coeffs_with(h, family, n, &GammaOptions::default())
}

pub fn gen_taylor_coeffs_with<'a, T: Real>(
    h: &GridFunction<T>,
    family: &'a RecursiveFamily<T>,
    n: usize,
    options: &GammaOptions<T>,
) -> Result<GenPolynomial<'a, T>> {
    let seq = gamma_seq_with(h, family, n, options)?;
    let mut p = GenPolynomial::new(seq.taylor_coefficients(), family)?;
    p.degraded = seq.degraded;
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemainderOptions<T: Real> {
    pub gamma: GammaOptions<T>,
    /// Evenly spaced points between `x0` and the last sample point at which
    /// `|γ_{n+1}|` is evaluated for the running maximum.
    pub check_points: usize,
    /// Absolute slack allowed, relative to `max(1, sup|h|)`.
    pub tolerance: T,
}

impl<T: Real> Default for RemainderOptions<T> {
    fn default() -> Self {
        RemainderOptions {
            gamma: GammaOptions::default(),
            check_points: 400,
            tolerance: T::lit(1e-8),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemainderPoint<T: Real> {
    pub x: T,
    /// `|h(x) - P_n(x)|`.
    pub remainder: T,
    /// `max_{[x0,x]} |γ_{n+1}(h)| · |ψ_{n+1}(x)| / (n+1)!`.
    pub bound: T,
    /// `bound - remainder`.
    pub slack: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemainderReport<T: Real> {
    pub order: usize,
    pub points: Vec<RemainderPoint<T>>,
    /// Sample points where the remainder exceeds the bound.
    pub violations: Vec<T>,
    /// Sample points left of `x0`, where the estimate does not apply.
    pub skipped: Vec<T>,
    pub min_slack: T,
    pub max_slack: T,
    pub passed: bool,
}

/// Checks the generalized Lagrange remainder bound for the order-`n`
/// generalized Taylor polynomial of `h` at each sample point right of `x0`.
pub fn remainder_check<T: Real>(
    h: &GridFunction<T>,
    family: &RecursiveFamily<T>,
    n: usize,
    sample_points: &[T],
) -> Result<RemainderReport<T>> {
    remainder_check_with(h, family, n, sample_points, &RemainderOptions::default())
}

pub fn remainder_check_with<T: Real>(
    h: &GridFunction<T>,
    family: &RecursiveFamily<T>,
    n: usize,
    sample_points: &[T],
    options: &RemainderOptions<T>,
) -> Result<RemainderReport<T>> {
    check_grid(h, family)?;
    if n + 1 > family.order() {
        return Err(Error::OrderOutOfRange {
            requested: n + 1,
            available: family.order(),
        });
    }
    let grid = family.grid();
    let x0 = family.x0();
    let poly = gen_taylor_coeffs_with(h, family, n, &options.gamma)?;
    let whole = FitOptions {
        window: T::one(),
        ..options.gamma.fit
    };
    let h_fit = ChebyshevFit::around(h, family.x0_index(), &whole)?;
    let phi_fit = ChebyshevFit::around(family.phi(), family.x0_index(), &whole)?;
    let top = |x: T| -> Result<T> {
        let g = gamma_jets(&h_fit.jet_at(x, n + 1)?, &phi_fit.jet_at(x, n)?, n + 1)?;
        Ok(g[n + 1].norm())
    };

    let mut right = Vec::new();
    let mut skipped = Vec::new();
    for &x in sample_points {
        if !grid.contains(x) {
            return Err(Error::OutOfDomain {
                x: x.as_f64(),
                a: grid.a().as_f64(),
                b: grid.b().as_f64(),
            });
        }
        if x < x0 {
            skipped.push(x);
        } else {
            right.push(x);
        }
    }

    // running maximum of |γ_{n+1}| over a sorted evaluation set
    let mut probes: Vec<T> = right.clone();
    if let Some(&last) = right.iter().max_by(|p, q| p.partial_cmp(q).unwrap()) {
        let m = options.check_points.max(1);
        for i in 0..=m {
            probes.push(x0 + (last - x0) * T::from_usize_lossy(i) / T::from_usize_lossy(m));
        }
    }
    probes.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut running = Vec::with_capacity(probes.len());
    let mut peak = T::zero();
    for &p in &probes {
        peak = peak.max(top(p)?);
        running.push(peak);
    }

    let scale = T::one().max(h.sup_norm());
    let psi_next = family.psi_scaled(n + 1)?;
    let mut points = Vec::with_capacity(right.len());
    let mut violations = Vec::new();
    for &x in &right {
        let at = probes.partition_point(|&p| p <= x) - 1;
        let bound = running[at] * psi_next.interpolate(x)?.norm();
        let remainder = (h.interpolate(x)? - poly.eval(x)?).norm();
        if remainder > bound + options.tolerance * scale {
            violations.push(x);
        }
        points.push(RemainderPoint {
            x,
            remainder,
            bound,
            slack: bound - remainder,
        });
    }
    let min_slack = points.iter().map(|p| p.slack).fold(T::infinity(), T::min);
    let max_slack = points.iter().map(|p| p.slack).fold(T::neg_infinity(), T::max);
    Ok(RemainderReport {
        order: n,
        passed: violations.is_empty(),
        points,
        violations,
        skipped,
        min_slack,
        max_slack,
    })
}

/// Which `φ_k` enter a projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `φ_0, φ_2, φ_4, …` (`f·X̃^(2k)`).
    Even,
    /// `φ_1, φ_3, φ_5, …` (`f·X^(2k+1)`).
    Odd,
    /// `φ_0, φ_1, φ_2, …`.
    Full,
}

impl Basis {
    /// Orders of the first `count` members.
    pub fn orders(self, count: usize) -> Vec<usize> {
        match self {
            Basis::Even => (0..count).map(|k| 2 * k).collect(),
            Basis::Odd => (0..count).map(|k| 2 * k + 1).collect(),
            Basis::Full => (0..count).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection<T: Real> {
    pub basis: Basis,
    pub orders: Vec<usize>,
    /// `c_j` multiplying `φ_{orders[j]}`.
    pub coefficients: Vec<Cx<T>>,
    /// Trapezoid-rule `L²` norm of the residual.
    pub l2_error: T,
    /// Largest residual modulus on the grid.
    pub max_error: T,
    /// Ratio of extreme diagonal entries of the triangular factor of the
    /// column-normalized system.
    pub condition_estimate: T,
}

impl<T: Real> Projection<T> {
    /// `Σ c_j φ_{orders[j]}` on the family's grid.
    pub fn approximant(&self, family: &RecursiveFamily<T>) -> Result<GridFunction<T>> {
        let grid = family.grid();
        let mut sum = GridFunction::constant(grid, cx(T::zero()));
        for (&k, &c) in self.orders.iter().zip(&self.coefficients) {
            sum = sum.add(&family.phi_k(k)?.scale(c))?;
        }
        Ok(sum)
    }
}

/// Discrete `L²` best approximation of `h` by the first `count` members of
/// `basis`, solved by Householder QR.
pub fn least_squares_project<T: Real>(
    h: &GridFunction<T>,
    family: &RecursiveFamily<T>,
    count: usize,
    basis: Basis,
) -> Result<Projection<T>> {
    check_grid(h, family)?;
    if count == 0 {
        return Err(Error::InvalidArgument(
            "projection needs at least one basis function".into(),
        ));
    }
    let orders = basis.orders(count);
    let top = *orders.last().unwrap();
    if top > family.order() {
        return Err(Error::OrderOutOfRange {
            requested: top,
            available: family.order(),
        });
    }
    let sqrt_w: Vec<T> = family.grid().trapezoid_weights().into_iter().map(T::sqrt).collect();
    let mut columns = Vec::with_capacity(count);
    let mut norms = Vec::with_capacity(count);
    let mut phis = Vec::with_capacity(count);
    for &k in &orders {
        let phi = family.phi_k(k)?;
        let mut col: Vec<Cx<T>> = phi.values().iter().zip(&sqrt_w).map(|(&v, &w)| v * w).collect();
        let norm = col.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::RankCollapse { column: columns.len() });
        }
        col.iter_mut().for_each(|c| *c = *c / norm);
        columns.push(col);
        norms.push(norm);
        phis.push(phi);
    }
    let qr = HouseholderQr::factor(&columns)?;
    let rhs: Vec<Cx<T>> = h.values().iter().zip(&sqrt_w).map(|(&v, &w)| v * w).collect();
    let coefficients: Vec<Cx<T>> = qr.solve(&rhs)?.into_iter().zip(&norms).map(|(c, &s)| c / s).collect();

    let mut residual = h.clone();
    for (phi, &c) in phis.iter().zip(&coefficients) {
        residual = residual.sub(&phi.scale(c))?;
    }
    let l2_error = residual
        .values()
        .iter()
        .zip(&sqrt_w)
        .map(|(r, &w)| (*r * w).norm_sqr())
        .sum::<T>()
        .sqrt();
    Ok(Projection {
        basis,
        orders,
        coefficients,
        l2_error,
        max_error: residual.sup_norm(),
        condition_estimate: qr.condition_estimate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::seeds::StockSeed;

    fn unit_family(a: f64, b: f64, n: usize, x0: f64, order: usize) -> RecursiveFamily<f64> {
        let grid = Grid::uniform_anchored(a, b, n, x0).unwrap();
        let f = GridFunction::constant(&grid, cx(1.0));
        RecursiveFamily::build(&f, grid.x0_index(), order).unwrap()
    }

    fn exp_family(rate: f64, order: usize) -> RecursiveFamily<f64> {
        let grid = Grid::uniform(0.0, 1.0, 2001).unwrap();
        let seed = StockSeed::Exp { rate };
        let opts = crate::recint::FamilyOptions {
            seed_derivative: Some(seed.sample_derivative(&grid).unwrap()),
            ..Default::default()
        };
        RecursiveFamily::build_with(&seed.sample(&grid).unwrap(), 0, order, opts).unwrap()
    }

    #[test]
    fn square_has_ordinary_derivatives_for_unit_seed() {
        let fam = unit_family(0.0, 1.0, 1001, 0.0, 8);
        let h = GridFunction::sample_real(fam.grid(), |x: f64| x * x).unwrap();
        let seq = gamma_seq(&h, &fam, 2).unwrap();
        for (g, e) in seq.values.iter().zip([0.0, 0.0, 2.0]) {
            assert!((g - cx(e)).norm() < 1e-6);
        }
        assert!(!seq.degraded);
        assert!(gamma_seq(&h, &fam, 7).unwrap().degraded);
    }

    #[test]
    fn basis_elements_are_dual_to_gamma() {
        let fam = exp_family(0.8, 10);
        for m in 0..=6 {
            let seq = gamma_seq(fam.psi_scaled(m).unwrap(), &fam, m).unwrap();
            for (k, g) in seq.values.iter().enumerate() {
                let expected = if k == m { 1.0 } else { 0.0 };
                assert!((g - cx(expected)).norm() < 1e-4, "m={m} k={k} got {g}");
            }
        }
    }

    #[test]
    fn exponential_maclaurin_coefficients() {
        let fam = unit_family(0.0, 1.0, 2001, 0.0, 8);
        let h = GridFunction::sample_real(fam.grid(), f64::exp).unwrap();
        let p = gen_taylor_coeffs(&h, &fam, 5).unwrap();
        for (k, a) in p.alpha().iter().enumerate() {
            assert!((a - cx(1.0 / factorial::<f64>(k))).norm() < 1e-5);
        }
    }

    #[test]
    fn polynomial_evaluation_basics() {
        let fam = unit_family(-1.0, 1.0, 401, 0.0, 6);
        let p = GenPolynomial::new(vec![cx(0.0), cx(1.0)], &fam).unwrap();
        for x in [-0.7, 0.0, 0.33, 1.0] {
            assert!((p.eval(x).unwrap() - cx(x)).norm() < 1e-12);
        }
        let q = GenPolynomial::new(vec![cx(2.5), cx(1.0), cx(-3.0)], &fam).unwrap();
        assert!((q.eval(0.0).unwrap() - cx(2.5)).norm() < 1e-14);
        assert!(GenPolynomial::new(vec![cx(0.0); 8], &fam).is_err());
    }

    #[test]
    fn round_trip_recovers_coefficients() {
        let fam = exp_family(-0.6, 10);
        let alpha: Vec<Cx<f64>> = [0.3, -1.2, 0.7, 0.25, -0.4, 0.9, -0.15]
            .iter()
            .map(|&a| cx(a))
            .collect();
        let p = GenPolynomial::new(alpha.clone(), &fam).unwrap();
        let h = p.to_grid_function().unwrap();
        let back = gen_taylor_coeffs(&h, &fam, 6).unwrap();
        for (a, b) in alpha.iter().zip(back.alpha()) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn classical_lagrange_bound_holds() {
        let fam = unit_family(0.0, 1.0, 2001, 0.0, 8);
        let h = GridFunction::sample_real(fam.grid(), f64::exp).unwrap();
        let xs: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let report = remainder_check(&h, &fam, 3, &xs).unwrap();
        assert!(report.passed, "{:?}", report.violations);
        for p in &report.points {
            let classical = p.x.exp() * p.x.powi(4) / 24.0;
            assert!((p.bound - classical).abs() < 1e-6 * classical.max(1e-3));
        }
    }

    #[test]
    fn generalized_polynomial_has_no_remainder() {
        let fam = exp_family(0.5, 8);
        let p = GenPolynomial::new(vec![cx(1.0), cx(-0.5), cx(0.25), cx(2.0)], &fam).unwrap();
        let h = p.to_grid_function().unwrap();
        let report = remainder_check(&h, &fam, 3, &[0.1, 0.5, 0.9]).unwrap();
        assert!(report.passed);
        assert!(report.points.iter().all(|q| q.remainder < 1e-7));
    }

    #[test]
    fn member_of_span_is_recovered() {
        let fam = exp_family(0.7, 10);
        let h = fam.phi_k(2).unwrap();
        let proj = least_squares_project(&h, &fam, 4, Basis::Even).unwrap();
        assert!(proj.l2_error < 1e-8);
        for (j, c) in proj.coefficients.iter().enumerate() {
            let e = if j == 1 { 1.0 } else { 0.0 };
            assert!((c - cx(e)).norm() < 1e-6);
        }
    }

    #[test]
    fn odd_target_is_invisible_to_even_basis_on_symmetric_interval() {
        let fam = unit_family(-1.0, 1.0, 2001, 0.0, 12);
        let h = GridFunction::sample_real(fam.grid(), |x: f64| x).unwrap();
        let norm = (2.0f64 / 3.0).sqrt();
        for n in 1..=5 {
            let even = least_squares_project(&h, &fam, n, Basis::Even).unwrap();
            assert!((even.l2_error - norm).abs() < 1e-6);
        }
        let full = least_squares_project(&h, &fam, 4, Basis::Full).unwrap();
        assert!(full.l2_error < 1e-6);
    }
}
