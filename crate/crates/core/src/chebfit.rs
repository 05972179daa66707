//! Least-squares Chebyshev fits of grid data, used to read off jets
//! (derivatives at a point) from sampled functions.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::jet::Jet;
use crate::linalg::HouseholderQr;
use crate::scalar::{Cx, Real};

/// Default upper bound on the degree of a fit.
pub const DEFAULT_FIT_DEGREE: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions<T: Real> {
    /// Largest degree tried. The series is cut back to the degree at which
    /// its coefficients reach the noise floor, since every surplus degree
    /// amplifies rounding in the derivatives.
    pub degree: usize,
    /// Half-width of the fit window as a fraction of `b - a`; the window is
    /// centred on the expansion point and clipped to the grid.
    pub window: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            degree: DEFAULT_FIT_DEGREE,
            window: T::one(),
        }
    }
}

/// A Chebyshev series `Σ c_j T_j(t)` on `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct ChebyshevFit<T: Real> {
    lo: T,
    hi: T,
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> ChebyshevFit<T> {
    /// Least-squares fit of `g` on the nodes with indices `first..=last`.
    pub fn fit(g: &GridFunction<T>, first: usize, last: usize, degree: usize) -> Result<Self> {
        let nodes = &g.grid().nodes()[first..=last];
        let count = nodes.len();
        if count < degree + 1 {
            return Err(Error::TooFewNodes {
                what: "a Chebyshev fit",
                needed: degree + 1,
                got: count,
            });
        }
        let lo = nodes[0];
        let hi = nodes[count - 1];
        let ts: Vec<T> = nodes.iter().map(|&x| to_unit(x, lo, hi)).collect();
        let mut columns: Vec<Vec<Cx<T>>> = Vec::with_capacity(degree + 1);
        columns.push(ts.iter().map(|_| Cx::new(T::one(), T::zero())).collect());
        if degree >= 1 {
            columns.push(ts.iter().map(|&t| Cx::new(t, T::zero())).collect());
        }
        let two = T::lit(2.0);
        for j in 2..=degree {
            let col = (0..count)
                .map(|i| columns[j - 1][i] * (two * ts[i]) - columns[j - 2][i])
                .collect();
            columns.push(col);
        }
        let qr = HouseholderQr::factor(&columns)?;
        let coeffs = qr.solve(&g.values()[first..=last])?;
        Ok(ChebyshevFit { lo, hi, coeffs })
    }

    /// Fit on the window around node `index` described by `options`.
    pub fn around(g: &GridFunction<T>, index: usize, options: &FitOptions<T>) -> Result<Self> {
        let grid = g.grid();
        let nodes = grid.nodes();
        let center = nodes[index];
        let radius = options.window * (grid.b() - grid.a());
        let first = nodes.partition_point(|&x| x < center - radius);
        let last = nodes.partition_point(|&x| x <= center + radius) - 1;
        let degree = options.degree.min(last - first);
        let full = Self::fit(g, first, last, degree)?;
        let resolved = full.resolved_degree();
        if resolved == degree {
            Ok(full)
        } else {
            Self::fit(g, first, last, resolved)
        }
    }

    /// Smallest degree whose neglected coefficients all sit at the noise
    /// floor, estimated from the top quarter of the series.
    pub fn resolved_degree(&self) -> usize {
        let mags = self.coeffs_abs();
        let n = mags.len();
        let peak = mags.iter().copied().fold(T::zero(), T::max);
        let tail = mags[n - n.div_ceil(4)..].iter().copied().fold(T::zero(), T::max);
        let floor = (T::lit(4.0) * tail).max(T::lit(1000.0) * T::epsilon() * peak);
        match mags.iter().rposition(|&m| m > floor) {
            Some(last) => (last + 1).min(n - 1),
            None => 0,
        }
    }

    /// Moduli of the Chebyshev coefficients.
    pub fn coeffs_abs(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Jet of order `order` of the fitted series at `x`.
    pub fn jet_at(&self, x: T, order: usize) -> Result<Jet<T>> {
        let t = to_unit(x, self.lo, self.hi);
        let dt_dx = T::lit(2.0) / (self.hi - self.lo);
        let mut series = self.coeffs.clone();
        let mut out = Vec::with_capacity(order + 1);
        let mut chain = T::one();
        for k in 0..=order {
            // d^k/dx^k / k!
            out.push(clenshaw(&series, t) * (chain / crate::scalar::factorial::<T>(k)));
            series = derivative_coeffs(&series);
            chain *= dt_dx;
        }
        Jet::new(x, out)
    }
}

fn to_unit<T: Real>(x: T, lo: T, hi: T) -> T {
    (x + x - lo - hi) / (hi - lo)
}

fn clenshaw<T: Real>(c: &[Cx<T>], t: T) -> Cx<T> {
    let zero = Cx::new(T::zero(), T::zero());
    let two_t = t + t;
    let (mut b1, mut b2) = (zero, zero);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + b1 * two_t - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(zero) + b1 * t - b2
}

// coefficients of d/dt Σ c_j T_j(t)
fn derivative_coeffs<T: Real>(c: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = c.len();
    let zero = Cx::new(T::zero(), T::zero());
    if n <= 1 {
        return vec![zero];
    }
    let mut d = vec![zero; n + 1];
    for j in (1..n).rev() {
        d[j - 1] = d[j + 1] + c[j] * T::from_usize_lossy(2 * j);
    }
    d[0] = d[0] * T::lit(0.5);
    d.truncate(n - 1);
    d
}

/// Jet of `g` at node `index`, read off a local Chebyshev fit.
pub fn fit_jet<T: Real>(g: &GridFunction<T>, index: usize, order: usize, options: &FitOptions<T>) -> Result<Jet<T>> {
    let fit = ChebyshevFit::around(g, index, options)?;
    fit.jet_at(g.grid().nodes()[index], order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::scalar::factorial;

    #[test]
    fn exponential_jet_from_samples() {
        let grid = Grid::uniform(0.0, 1.0, 2001).unwrap();
        let g = GridFunction::sample_real(&grid, |x: f64| (2.0 * x).exp()).unwrap();
        for index in [0, 700, 2000] {
            let x: f64 = grid.nodes()[index];
            let jet = fit_jet(&g, index, 6, &FitOptions::default()).unwrap();
            for k in 0..=6 {
                let exact = 2f64.powi(k as i32) * (2.0 * x).exp() / factorial::<f64>(k);
                // endpoints lose accuracy in the highest derivatives
                let tol = if index == 700 || k <= 4 { 1e-6 } else { 1e-4 };
                assert!(
                    (jet.coeffs()[k].re - exact).abs() < tol * exact.max(1.0),
                    "k={k} at {x}"
                );
            }
        }
    }

    #[test]
    fn degree_is_cut_at_noise_floor() {
        let grid = Grid::uniform(0.0, 1.0, 2001).unwrap();
        let g = GridFunction::sample_real(&grid, |x: f64| (2.0 * x).exp()).unwrap();
        let fit = ChebyshevFit::around(&g, 0, &FitOptions::default()).unwrap();
        assert!((11..=15).contains(&fit.degree()), "{}", fit.degree());
    }

    #[test]
    fn polynomial_is_reproduced() {
        let grid = Grid::uniform(-1.0, 2.0, 301).unwrap();
        let g = GridFunction::sample_real(&grid, |x: f64| 1.0 - x + 0.5 * x.powi(3)).unwrap();
        let jet = fit_jet(&g, 100, 4, &FitOptions { degree: 5, window: 0.3 }).unwrap();
        let x: f64 = grid.nodes()[100];
        let expected = [1.0 - x + 0.5 * x.powi(3), -1.0 + 1.5 * x * x, 1.5 * x, 0.5, 0.0];
        for (c, e) in jet.coeffs().iter().zip(expected) {
            assert!((c.re - e).abs() < 1e-10);
        }
    }
}
