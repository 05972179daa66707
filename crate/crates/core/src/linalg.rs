//! Dense complex least squares by Householder QR.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// QR factorization of a tall column-major matrix, kept for repeated solves.
#[derive(Clone, Debug)]
pub struct HouseholderQr<T: Real> {
    rows: usize,
    /// Householder vectors (unit norm), one per column, acting on `k..rows`.
    reflectors: Vec<Vec<Cx<T>>>,
    /// Upper-triangular `R` stored by columns: `r[j][i]` for `i ≤ j`.
    r: Vec<Vec<Cx<T>>>,
}

impl<T: Real> HouseholderQr<T> {
    /// Factor `A` given as `columns[j][i] = A[i][j]`.
    ///
    /// Fails with [`Error::RankCollapse`] when a column is numerically
    /// dependent on the previous ones.
    pub fn factor(columns: &[Vec<Cx<T>>]) -> Result<Self> {
        let ncols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if ncols == 0 || rows < ncols {
            return Err(Error::DimensionMismatch {
                expected: ncols.max(1),
                got: rows,
            });
        }
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("ragged least-squares matrix".into()));
        }
        let scale = columns.iter().map(|c| norm(c)).fold(T::zero(), T::max);
        let tiny = T::lit(64.0) * T::epsilon() * scale;

        let mut a: Vec<Vec<Cx<T>>> = columns.to_vec();
        let mut reflectors: Vec<Vec<Cx<T>>> = Vec::with_capacity(ncols);
        let mut r: Vec<Vec<Cx<T>>> = Vec::with_capacity(ncols);
        for k in 0..ncols {
            for (j, v) in reflectors.iter().enumerate() {
                reflect(v, &mut a[k][j..]);
            }
            let x = &a[k][k..];
            let xnorm = norm(x);
            if !(xnorm > tiny) {
                return Err(Error::RankCollapse { column: k });
            }
            let phase = if x[0].norm() > T::zero() {
                x[0] / x[0].norm()
            } else {
                Cx::new(T::one(), T::zero())
            };
            let alpha = -phase * xnorm;
            let mut v: Vec<Cx<T>> = x.to_vec();
            v[0] = v[0] - alpha;
            let vnorm = norm(&v);
            for e in v.iter_mut() {
                *e = *e / vnorm;
            }
            let mut col: Vec<Cx<T>> = a[k][..k].to_vec();
            col.push(alpha);
            r.push(col);
            reflectors.push(v);
        }
        Ok(HouseholderQr { rows, reflectors, r })
    }

    /// Least-squares solution of `A x ≈ b`.
    pub fn solve(&self, b: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: b.len(),
            });
        }
        let mut y = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            reflect(v, &mut y[k..]);
        }
        let n = self.r.len();
        let mut x = vec![Cx::new(T::zero(), T::zero()); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s = s - self.r[j][i] * x[j];
            }
            x[i] = s / self.r[i][i];
        }
        Ok(x)
    }

    /// `max |r_ii| / min |r_ii|`, a cheap lower bound on the condition number.
    pub fn condition_estimate(&self) -> T {
        let diag = self.r.iter().enumerate().map(|(i, c)| c[i].norm());
        let (lo, hi) = diag.fold((T::infinity(), T::zero()), |(lo, hi), d| (lo.min(d), hi.max(d)));
        hi / lo
    }
}

fn norm<T: Real>(v: &[Cx<T>]) -> T {
    let scale = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if scale == T::zero() {
        return T::zero();
    }
    let s: T = v.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

// y ← (I - 2 v vᴴ) y
fn reflect<T: Real>(v: &[Cx<T>], y: &mut [Cx<T>]) {
    let dot = v
        .iter()
        .zip(y.iter())
        .fold(Cx::new(T::zero(), T::zero()), |acc, (vi, yi)| acc + vi.conj() * yi);
    let two = dot * T::lit(2.0);
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi = *yi - vi * two;
    }
}
