//! Spectral parameter power series for `u'' + q u = λ u`.
//!
//! For a family built from a nonvanishing seed `f` (solving `f'' + q f = 0`),
//!
//! ```text
//! u₁ = f Σ_k λ^k X̃^(2k)/(2k)!        u₂ = f Σ_k λ^k X^(2k+1)/(2k+1)!
//! u₁' = f'/f·u₁ + 1/f Σ_{k≥1} λ^k X̃^(2k-1)/(2k-1)!
//! u₂' = f'/f·u₂ + 1/f Σ_{k≥0} λ^k X^(2k)/(2k)!
//! ```
//!
//! with `u₁(x0) = f(x0)`, `u₁'(x0) = f'(x0)`, `u₂(x0) = 0`,
//! `u₂'(x0) = 1/f(x0)`. Series are truncated after `terms` powers of `λ`
//! and evaluated by Horner's rule over the cached basis.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::recint::RecursiveFamily;
use crate::scalar::{Cx, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    U1,
    U2,
}

/// Largest truncation a family of the given order supports
/// (`2·terms - 1 ≤ order`).
pub fn max_terms(order: usize) -> usize {
    order.div_ceil(2)
}

/// A truncated SPPS solution for one value of `λ`.
#[derive(Clone, Copy, Debug)]
pub struct SppsSolution<'a, T: Real> {
    family: &'a RecursiveFamily<T>,
    lambda: Cx<T>,
    terms: usize,
    kind: SolutionKind,
}

impl<'a, T: Real> SppsSolution<'a, T> {
    pub fn new(family: &'a RecursiveFamily<T>, lambda: Cx<T>, terms: usize, kind: SolutionKind) -> Result<Self> {
        check_terms(family, terms)?;
        Ok(SppsSolution {
            family,
            lambda,
            terms,
            kind,
        })
    }

    pub fn lambda(&self) -> Cx<T> {
        self.lambda
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn kind(&self) -> SolutionKind {
        self.kind
    }

    /// `(u, u')` at grid node `i`.
    pub fn at_node(&self, i: usize) -> (Cx<T>, Cx<T>) {
        let fam = self.family;
        let f = fam.seed().values()[i];
        let fp = fam.seed_derivative().values()[i];
        let lam = self.lambda;
        let n = self.terms;
        let zero = Cx::new(T::zero(), T::zero());
        // basis values are stored divided by n!
        let xt = |m: usize| fam.x_tilde_scaled(m).map(|g| g.values()[i]).unwrap_or(zero);
        let xs = |m: usize| fam.x_scaled(m).map(|g| g.values()[i]).unwrap_or(zero);
        // Σ_{k<len} λ^k term(k)
        let horner = |term: &dyn Fn(usize) -> Cx<T>, len: usize| -> Cx<T> {
            (0..len).rev().fold(zero, |acc, k| acc * lam + term(k))
        };
        match self.kind {
            SolutionKind::U1 => {
                let s = horner(&|k| xt(2 * k), n);
                // Σ_{k=1}^{n-1} λ^k X̃^(2k-1)
                let t = lam * horner(&|k| xt(2 * k + 1), n - 1);
                (f * s, fp * s + t / f)
            }
            SolutionKind::U2 => {
                let s = horner(&|k| xs(2 * k + 1), n);
                let t = horner(&|k| xs(2 * k), n);
                (f * s, fp * s + t / f)
            }
        }
    }

    /// `u(x)` at any `x` in `[a, b]`.
    pub fn value(&self, x: T) -> Result<Cx<T>> {
        Ok(self.at_point(x)?.0)
    }

    /// `u'(x)` at any `x` in `[a, b]`.
    pub fn derivative(&self, x: T) -> Result<Cx<T>> {
        Ok(self.at_point(x)?.1)
    }

    /// `(u(x), u'(x))`, interpolating node values off the grid.
    pub fn at_point(&self, x: T) -> Result<(Cx<T>, Cx<T>)> {
        let (start, weights) = self.family.grid().interpolation_stencil(x)?;
        let zero = Cx::new(T::zero(), T::zero());
        Ok(weights.iter().enumerate().fold((zero, zero), |(u, du), (j, &w)| {
            let (v, dv) = self.at_node(start + j);
            (u + v * w, du + dv * w)
        }))
    }

    /// `u` on every node.
    pub fn values(&self) -> GridFunction<T> {
        let grid = self.family.grid();
        GridFunction::from_parts(grid.clone(), (0..grid.len()).map(|i| self.at_node(i).0).collect())
    }

    /// `u'` on every node.
    pub fn derivatives(&self) -> GridFunction<T> {
        let grid = self.family.grid();
        GridFunction::from_parts(grid.clone(), (0..grid.len()).map(|i| self.at_node(i).1).collect())
    }
}

fn check_terms<T: Real>(family: &RecursiveFamily<T>, terms: usize) -> Result<()> {
    if terms == 0 {
        return Err(Error::EmptyTruncation);
    }
    let needed = 2 * terms - 1;
    if needed > family.order() {
        return Err(Error::TruncationExceedsOrder {
            terms,
            needed,
            available: family.order(),
        });
    }
    Ok(())
}

pub fn eval_u1<T: Real>(family: &RecursiveFamily<T>, lambda: Cx<T>, x: T, terms: usize) -> Result<Cx<T>> {
    SppsSolution::new(family, lambda, terms, SolutionKind::U1)?.value(x)
}

pub fn eval_u2<T: Real>(family: &RecursiveFamily<T>, lambda: Cx<T>, x: T, terms: usize) -> Result<Cx<T>> {
    SppsSolution::new(family, lambda, terms, SolutionKind::U2)?.value(x)
}

pub fn eval_u1_prime<T: Real>(family: &RecursiveFamily<T>, lambda: Cx<T>, x: T, terms: usize) -> Result<Cx<T>> {
    SppsSolution::new(family, lambda, terms, SolutionKind::U1)?.derivative(x)
}

pub fn eval_u2_prime<T: Real>(family: &RecursiveFamily<T>, lambda: Cx<T>, x: T, terms: usize) -> Result<Cx<T>> {
    SppsSolution::new(family, lambda, terms, SolutionKind::U2)?.derivative(x)
}

/// `max_interior |u'' + q u - λ u| / (1 + |λ|·max|u|)` with `u''` from
/// grid differentiation.
pub fn residual<T: Real>(lambda: Cx<T>, u: &GridFunction<T>, q: &GridFunction<T>) -> Result<T> {
    let upp = u.second_derivative()?;
    if !q.grid().same_nodes(u.grid()) {
        return Err(Error::GridMismatch);
    }
    let n = u.len();
    let worst = (1..n - 1)
        .map(|i| {
            let v = u.values()[i];
            (upp.values()[i] + q.values()[i] * v - lambda * v).norm()
        })
        .fold(T::zero(), T::max);
    Ok(worst / (T::one() + lambda.norm() * u.sup_norm()))
}

/// Outcome of [`choose_truncation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub terms: usize,
    /// The tolerance was not met before the family order ran out.
    pub cap_reached: bool,
}

/// Smallest `terms` such that the next two terms of both series (the first
/// two dropped ones) are below `tol` times the sup-norm of the partial sum.
/// When the family is too short to confirm this, or `tol` is below the unit
/// roundoff, the largest supported truncation is returned with `cap_reached`
/// set.
pub fn choose_truncation<T: Real>(family: &RecursiveFamily<T>, lambda: Cx<T>, tol: T) -> Result<Truncation> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("truncation tolerance must be positive".into()));
    }
    let order = family.order();
    let cap = max_terms(order).max(1);
    // relative accuracy below the unit roundoff cannot be certified
    if tol < T::epsilon() {
        return Ok(Truncation {
            terms: cap,
            cap_reached: true,
        });
    }
    let grid_len = family.grid().len();
    let zero = Cx::new(T::zero(), T::zero());
    let mut s1 = vec![zero; grid_len];
    let mut s2 = vec![zero; grid_len];
    let lam_abs = lambda.norm();
    let term_norm = |g: &GridFunction<T>, k: usize| lam_abs.powi(k as i32) * g.sup_norm();
    let mut power = Cx::new(T::one(), T::zero());
    for terms in 1..=cap {
        let k = terms - 1;
        let t1 = family.x_tilde_scaled(2 * k)?;
        let t2 = family.x_scaled(2 * k + 1)?;
        for i in 0..grid_len {
            s1[i] = s1[i] + power * t1.values()[i];
            s2[i] = s2[i] + power * t2.values()[i];
        }
        power = power * lambda;
        // next two terms of u₂ need X^(2·terms+3)
        if 2 * terms + 3 > order {
            break;
        }
        let sup1 = s1.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        let sup2 = s2.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        let small = |j: usize| {
            term_norm(family.x_tilde_scaled(2 * j).expect("checked order"), j) <= tol * sup1
                && term_norm(family.x_scaled(2 * j + 1).expect("checked order"), j) <= tol * sup2
        };
        if small(terms) && small(terms + 1) {
            return Ok(Truncation {
                terms,
                cap_reached: false,
            });
        }
    }
    Ok(Truncation {
        terms: cap,
        cap_reached: true,
    })
}
