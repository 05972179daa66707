//! Closed-form seed solutions used by the examples and the CLI.
//!
//! Each seed is a nonvanishing solution of `f'' + q f = 0` for a known
//! potential `q`, with exact derivative and an exact jet of `φ = f²`.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::jet::Jet;
use crate::scalar::{cx, Cx, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StockSeed<T: Real> {
    /// `f ≡ value` (so `q ≡ 0`).
    Constant { value: T },
    /// `f = e^{rate·x}` (so `q ≡ -rate²`).
    Exp { rate: T },
    /// `f = a·x·e^{a/x}` (so `q = -a²/x⁴`), defined away from `x = 0`.
    PowerExp { a: T },
}

impl<T: Real> StockSeed<T> {
    pub fn value(&self, x: T) -> Cx<T> {
        match *self {
            StockSeed::Constant { value } => cx(value),
            StockSeed::Exp { rate } => cx((rate * x).exp()),
            StockSeed::PowerExp { a } => cx(a * x * (a / x).exp()),
        }
    }

    pub fn derivative(&self, x: T) -> Cx<T> {
        match *self {
            StockSeed::Constant { .. } => cx(T::zero()),
            StockSeed::Exp { rate } => cx(rate * (rate * x).exp()),
            StockSeed::PowerExp { a } => cx(a * (a / x).exp() * (T::one() - a / x)),
        }
    }

    /// Potential `q = -f''/f` for which the seed solves `f'' + q f = 0`.
    pub fn potential(&self, x: T) -> Cx<T> {
        match *self {
            StockSeed::Constant { .. } => cx(T::zero()),
            StockSeed::Exp { rate } => cx(-rate * rate),
            StockSeed::PowerExp { a } => cx(-a * a / x.powi(4)),
        }
    }

    pub fn sample(&self, grid: &Grid<T>) -> Result<GridFunction<T>> {
        GridFunction::sample(grid, |x| self.value(x))
    }

    pub fn sample_derivative(&self, grid: &Grid<T>) -> Result<GridFunction<T>> {
        GridFunction::sample(grid, |x| self.derivative(x))
    }

    pub fn sample_potential(&self, grid: &Grid<T>) -> Result<GridFunction<T>> {
        GridFunction::sample(grid, |x| self.potential(x))
    }

    /// Exact jet of `φ = f²` at `x0`.
    pub fn phi_jet(&self, x0: T, order: usize) -> Result<Jet<T>> {
        match *self {
            StockSeed::Constant { value } => Ok(Jet::constant(x0, cx(value * value), order)),
            StockSeed::Exp { rate } => Ok(Jet::variable(x0, order).scale(cx(rate + rate)).exp()),
            StockSeed::PowerExp { a } => {
                if x0 == T::zero() {
                    return Err(Error::InvalidArgument(
                        "the a·x·e^{a/x} seed is singular at x = 0".into(),
                    ));
                }
                let x = Jet::variable(x0, order);
                let e = x.reciprocal()?.scale(cx(a + a)).exp();
                Ok(x.mul(&x)?.mul(&e)?.scale(cx(a * a)))
            }
        }
    }
}
