//! The lower-triangular matrix `A_n` mapping generalized derivatives
//! `γ_0..γ_n` of a function at `x0` to its ordinary derivatives there, and
//! its application to the Taylor coefficients of Sturm–Liouville solutions.
//!
//! Two independent constructions are provided: the production path
//! propagates every entry `a_{k,m}` as a jet through
//! `a_{k,m} = a_{k-1,m}' + φ^{(-1)^m} a_{k-1,m-1}`; the closed form expands
//! the same entries as nested alternating binomial sums over derivatives of
//! `φ` and `1/φ` and is meant as a slow reference.

use std::io::Write;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{binomial, cx, Cx, Real};

/// `(n+1)×(n+1)` lower-triangular matrix of entries `a_{k,m}(x0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformMatrix<T: Real> {
    entries: Vec<Vec<Cx<T>>>,
}

impl<T: Real> TransformMatrix<T> {
    /// Build `A_n` through jet recursion. `phi_jet` must have order `≥ n-1`.
    pub fn recursive(phi_jet: &Jet<T>, n: usize) -> Result<Self> {
        let zero = Cx::new(T::zero(), T::zero());
        let x0 = phi_jet.anchor();
        let mut entries = vec![vec![zero; n + 1]; n + 1];
        entries[0][0] = cx(T::one());
        if n == 0 {
            return Ok(TransformMatrix { entries });
        }
        check_budget(phi_jet, n)?;
        let phi = phi_jet.truncate(n - 1);
        let inv_phi = phi.reciprocal()?;

        // row k holds jets of order n - k
        let mut prev: Vec<Jet<T>> = (0..=n).map(|_| Jet::zero(x0, n)).collect();
        prev[0] = Jet::one(x0, n);
        for (k, row) in entries.iter_mut().enumerate().skip(1) {
            let order = n - k;
            let mut cur: Vec<Jet<T>> = Vec::with_capacity(n + 1);
            for m in 0..=n {
                let mut a = prev[m].derive()?;
                if (1..=k).contains(&m) {
                    let weight = if m % 2 == 0 { &phi } else { &inv_phi };
                    let carried = weight.truncate(order).mul(&prev[m - 1].truncate(order))?;
                    a = a.add(&carried)?;
                }
                row[m] = a.value();
                cur.push(a);
            }
            prev = cur;
        }
        Ok(TransformMatrix { entries })
    }

    /// Build `A_n` from the explicit nested-sum formulas for `a_{n,m}` and
    /// `b_{k,m}`. Cost grows combinatorially with `n`.
    pub fn closed_form(phi_jet: &Jet<T>, n: usize) -> Result<Self> {
        let zero = Cx::new(T::zero(), T::zero());
        let mut entries = vec![vec![zero; n + 1]; n + 1];
        entries[0][0] = cx(T::one());
        if n == 0 {
            return Ok(TransformMatrix { entries });
        }
        check_budget(phi_jet, n)?;
        let phi = phi_jet.truncate(n - 1);
        let d_phi = phi.derivative_values();
        let d_inv = phi.reciprocal()?.derivative_values();

        for k in 1..=n {
            entries[k][1] = d_inv[k - 1];
            for m in 2..=k {
                let mut sum = zero;
                for j in (m - 1)..=(k - 1) {
                    sum = sum + d_inv[k - 1 - j] * b_coefficient(&d_phi, &d_inv, j, m - 1) * binomial::<T>(k - 1, j);
                }
                entries[k][m] = sum;
            }
        }
        Ok(TransformMatrix { entries })
    }

    /// Identity of size `n+1`.
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![vec![Cx::new(T::zero(), T::zero()); n + 1]; n + 1];
        for (k, row) in entries.iter_mut().enumerate() {
            row[k] = cx(T::one());
        }
        TransformMatrix { entries }
    }

    /// The order `n` (the matrix is `(n+1)×(n+1)`).
    pub fn order(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entry(&self, row: usize, col: usize) -> Cx<T> {
        self.entries[row][col]
    }

    pub fn rows(&self) -> &[Vec<Cx<T>>] {
        &self.entries
    }

    pub fn max_abs_diff(&self, other: &TransformMatrix<T>) -> T {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(p, q)| (p - q).norm())
            .fold(T::zero(), T::max)
    }

    /// Ordinary derivatives `(h(x0), h'(x0), …, h^{[n]}(x0))` from the
    /// generalized derivatives `(γ_0(h)(x0), …, γ_n(h)(x0))`.
    pub fn ordinary_from_generalized(&self, gamma: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        if gamma.len() != self.entries.len() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.len(),
                got: gamma.len(),
            });
        }
        Ok(self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(gamma)
                    .fold(Cx::new(T::zero(), T::zero()), |acc, (&a, &g)| acc + a * g)
            })
            .collect())
    }

    /// Derivatives at `x0` of `u₁/f` and `u₂/f`, each a polynomial in `λ`.
    ///
    /// `γ_k(u₁/f)(x0)` is `λ^{k/2}` for even `k` and zero otherwise, while
    /// `γ_k(u₂/f)(x0)` is `λ^{(k-1)/2}` for odd `k`; so the `p`-th `λ`
    /// coefficient of row `k` is `A[k][2p]` for `u₁/f` and `A[k][2p+1]`
    /// for `u₂/f`.
    pub fn solution_taylor_vectors(&self) -> (Vec<LambdaPoly<T>>, Vec<LambdaPoly<T>>) {
        let n = self.order();
        let column_slots = |row: &Vec<Cx<T>>, first: usize| -> LambdaPoly<T> {
            LambdaPoly::new((first..=n).step_by(2).map(|m| row[m]).collect())
        };
        let u1 = self.entries.iter().map(|row| column_slots(row, 0)).collect();
        let u2 = self.entries.iter().map(|row| column_slots(row, 1)).collect();
        (u1, u2)
    }

    /// CSV with one row per matrix row: `row,c0_re,c0_im,c1_re,…`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.order();
        let header: Vec<String> = (0..=n).map(|m| format!("c{m}_re,c{m}_im")).collect();
        writeln!(out, "row,{}", header.join(","))?;
        for (k, row) in self.entries.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|z| format!("{},{}", z.re, z.im)).collect();
            writeln!(out, "{k},{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn check_budget<T: Real>(phi_jet: &Jet<T>, n: usize) -> Result<()> {
    if phi_jet.order() + 1 < n {
        return Err(Error::OrderBudget {
            needed: n - 1,
            got: phi_jet.order(),
        });
    }
    Ok(())
}

/// `b_{k,m}` in the expansion `γ_1^{[k]} = Σ_m b_{k,m} γ_{m+1}`.
///
/// The nesting level `i` carries the weight `φ` for odd `i` and `1/φ` for
/// even `i`; level `i` sums `k_i` from `m - i` to `k_{i-1} - 1`, and the
/// innermost level contributes `w_m^{[k_{m-1} - 1]}`.
pub fn b_coefficient<T: Real>(d_phi: &[Cx<T>], d_inv: &[Cx<T>], k: usize, m: usize) -> Cx<T> {
    fn level<T: Real>(d_phi: &[Cx<T>], d_inv: &[Cx<T>], i: usize, outer: usize, m: usize) -> Cx<T> {
        let w = if i % 2 == 1 { d_phi } else { d_inv };
        if i == m {
            return w[outer - 1];
        }
        let mut sum = Cx::new(T::zero(), T::zero());
        for inner in (m - i)..outer {
            sum = sum + w[outer - 1 - inner] * level(d_phi, d_inv, i + 1, inner, m) * binomial::<T>(outer - 1, inner);
        }
        sum
    }
    debug_assert!(m >= 1 && m <= k);
    level(d_phi, d_inv, 1, k, m)
}

/// Polynomial in the spectral parameter with ascending complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaPoly<T: Real> {
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> LambdaPoly<T> {
    /// Trailing exact zeros are trimmed.
    pub fn new(mut coeffs: Vec<Cx<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == T::zero() && c.im == T::zero()) {
            coeffs.pop();
        }
        LambdaPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, lambda: Cx<T>) -> Cx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Cx::new(T::zero(), T::zero()), |acc, &c| acc * lambda + c)
    }

    /// Coefficient of `λ^p` (zero beyond the degree).
    pub fn coeff(&self, p: usize) -> Cx<T> {
        self.coeffs
            .get(p)
            .copied()
            .unwrap_or_else(|| Cx::new(T::zero(), T::zero()))
    }
}
