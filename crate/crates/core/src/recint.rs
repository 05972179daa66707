//! Recursive-integral families built from a nonvanishing seed `f`.
//!
//! With `φ = f²` and `I` the anchored primitive from `x0`,
//!
//! ```text
//! X^(0) = X̃^(0) = 1
//! X^(n)  = n·I(X^(n-1)  · φ^{(-1)^n})
//! X̃^(n) = n·I(X̃^(n-1) · φ^{(-1)^{n-1}})
//! ```
//!
//! Both families are stored divided by `n!` (`X^(n)/n!` obeys the same
//! recursion without the factor `n`), which keeps high orders finite in any
//! scalar type. `ψ_k` is `X^(k)` for odd `k` and `X̃^(k)` for even `k`.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scalar::{factorial, Cx, Real};

/// Default maximal order of a family.
pub const DEFAULT_ORDER: usize = 60;
/// Default lower bound on `|f|` over the grid.
pub const NONVANISHING_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FamilyOptions<T: Real> {
    /// Seeds with `min |f|` at or below this are rejected.
    pub nonvanishing_threshold: T,
    /// Exact `f'` on the same nodes; when absent it is obtained by grid
    /// differentiation.
    pub seed_derivative: Option<GridFunction<T>>,
}

impl<T: Real> Default for FamilyOptions<T> {
    fn default() -> Self {
        FamilyOptions {
            nonvanishing_threshold: T::lit(NONVANISHING_THRESHOLD),
            seed_derivative: None,
        }
    }
}

/// `X^(0..=N)` and `X̃^(0..=N)` for one seed and anchor, built once.
#[derive(Clone, Debug)]
pub struct RecursiveFamily<T: Real> {
    f: GridFunction<T>,
    f_prime: GridFunction<T>,
    phi: GridFunction<T>,
    order: usize,
    x: Vec<GridFunction<T>>,
    x_tilde: Vec<GridFunction<T>>,
}

impl<T: Real> RecursiveFamily<T> {
    pub fn build(f: &GridFunction<T>, x0_index: usize, order: usize) -> Result<Self> {
        Self::build_with(f, x0_index, order, FamilyOptions::default())
    }

    pub fn build_with(f: &GridFunction<T>, x0_index: usize, order: usize, options: FamilyOptions<T>) -> Result<Self> {
        let f = f.reanchored(x0_index)?;
        let grid = f.grid().clone();

        let (index, modulus) =
            f.values()
                .iter()
                .map(|v| v.norm())
                .enumerate()
                .fold(
                    (0, T::infinity()),
                    |best, (i, m)| if m < best.1 { (i, m) } else { best },
                );
        if modulus <= options.nonvanishing_threshold {
            return Err(Error::SeedDegenerate {
                index,
                x: grid.nodes()[index].as_f64(),
                modulus: modulus.as_f64(),
            });
        }

        let f_prime = match options.seed_derivative {
            Some(d) => {
                if !d.grid().same_nodes(&grid) {
                    return Err(Error::GridMismatch);
                }
                d.reanchored(x0_index)?
            }
            None => f.derivative()?,
        };

        let phi = f.mul(&f)?;
        let inv_phi = phi.map(|v| v.inv());
        let one = GridFunction::constant(&grid, Cx::new(T::one(), T::zero()));
        let mut x = Vec::with_capacity(order + 1);
        let mut x_tilde = Vec::with_capacity(order + 1);
        x.push(one.clone());
        x_tilde.push(one);
        for n in 1..=order {
            let (wx, wt) = if n % 2 == 1 { (&inv_phi, &phi) } else { (&phi, &inv_phi) };
            let next_x = x[n - 1].mul(wx)?.cumulative_integral()?;
            let next_t = x_tilde[n - 1].mul(wt)?.cumulative_integral()?;
            x.push(next_x);
            x_tilde.push(next_t);
        }
        Ok(RecursiveFamily {
            f,
            f_prime,
            phi,
            order,
            x,
            x_tilde,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &crate::grid::Grid<T> {
        self.f.grid()
    }

    pub fn x0_index(&self) -> usize {
        self.f.grid().x0_index()
    }

    pub fn x0(&self) -> T {
        self.f.grid().x0()
    }

    /// The seed `f`.
    pub fn seed(&self) -> &GridFunction<T> {
        &self.f
    }

    /// `f'`, exact if supplied at build time.
    pub fn seed_derivative(&self) -> &GridFunction<T> {
        &self.f_prime
    }

    /// `φ = f²`.
    pub fn phi(&self) -> &GridFunction<T> {
        &self.phi
    }

    fn check(&self, k: usize) -> Result<()> {
        if k > self.order {
            Err(Error::OrderOutOfRange {
                requested: k,
                available: self.order,
            })
        } else {
            Ok(())
        }
    }

    /// `X^(n)/n!`.
    pub fn x_scaled(&self, n: usize) -> Result<&GridFunction<T>> {
        self.check(n)?;
        Ok(&self.x[n])
    }

    /// `X̃^(n)/n!`.
    pub fn x_tilde_scaled(&self, n: usize) -> Result<&GridFunction<T>> {
        self.check(n)?;
        Ok(&self.x_tilde[n])
    }

    /// `X^(n)`.
    pub fn x(&self, n: usize) -> Result<GridFunction<T>> {
        Ok(unscale(self.x_scaled(n)?, n))
    }

    /// `X̃^(n)`.
    pub fn x_tilde(&self, n: usize) -> Result<GridFunction<T>> {
        Ok(unscale(self.x_tilde_scaled(n)?, n))
    }

    /// `ψ_k/k!`.
    pub fn psi_scaled(&self, k: usize) -> Result<&GridFunction<T>> {
        if k % 2 == 1 {
            self.x_scaled(k)
        } else {
            self.x_tilde_scaled(k)
        }
    }

    /// `ψ_k`: `X^(k)` for odd `k`, `X̃^(k)` for even `k`.
    pub fn psi(&self, k: usize) -> Result<GridFunction<T>> {
        Ok(unscale(self.psi_scaled(k)?, k))
    }

    /// `φ_k = f·ψ_k`.
    pub fn phi_k(&self, k: usize) -> Result<GridFunction<T>> {
        self.f.mul(&self.psi(k)?)
    }

    /// `f_n = f·X̃^(2(n-1))`, `n ≥ 1`.
    pub fn f_n(&self, n: usize) -> Result<GridFunction<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("f_n is indexed from 1".into()));
        }
        self.phi_k(2 * (n - 1))
    }

    /// `g_n = f·X^(2n-1)`, `n ≥ 1`.
    pub fn g_n(&self, n: usize) -> Result<GridFunction<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("g_n is indexed from 1".into()));
        }
        self.phi_k(2 * n - 1)
    }
}

fn unscale<T: Real>(g: &GridFunction<T>, n: usize) -> GridFunction<T> {
    let s = factorial::<T>(n);
    g.scale(Cx::new(s, T::zero()))
}
