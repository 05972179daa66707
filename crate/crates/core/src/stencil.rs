//! Finite-difference, interpolation and cell-quadrature weights on
//! arbitrarily spaced stencils.

use crate::scalar::Real;

/// Fornberg's recursion: weights `w[d][j]` such that
/// `g^{(d)}(z) ≈ Σ_j w[d][j] g(nodes[j])` for `d = 0..=max_deriv`.
pub fn fornberg<T: Real>(z: T, nodes: &[T], max_deriv: usize) -> Vec<Vec<T>> {
    let n = nodes.len();
    let mut c = vec![vec![T::zero(); n]; max_deriv + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = T::one();
    let mut c4 = nodes[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kk = T::from_usize_lossy(k);
                    c[k][i] = c1 * (kk * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                let kk = T::from_usize_lossy(k);
                c[k][j] = (c4 * c[k][j] - kk * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights `w[j] = ∫_lo^hi L_j(x) dx` for the Lagrange basis on `nodes`.
///
/// Works in the local coordinate `t = (x - lo) / (hi - lo)` so that the
/// polynomial products stay well scaled.
pub fn integration_weights<T: Real>(lo: T, hi: T, nodes: &[T]) -> Vec<T> {
    let h = hi - lo;
    let t: Vec<T> = nodes.iter().map(|&x| (x - lo) / h).collect();
    let n = t.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        // coefficients of Π_{k≠j} (s - t_k) / (t_j - t_k), ascending powers
        let mut poly = vec![T::one()];
        for (k, &tk) in t.iter().enumerate() {
            if k == j {
                continue;
            }
            let denom = t[j] - tk;
            let mut next = vec![T::zero(); poly.len() + 1];
            for (p, &cp) in poly.iter().enumerate() {
                next[p + 1] += cp / denom;
                next[p] -= cp * tk / denom;
            }
            poly = next;
        }
        let integral: T = poly
            .iter()
            .enumerate()
            .map(|(p, &cp)| cp / T::from_usize_lossy(p + 1))
            .sum();
        out.push(integral * h);
    }
    out
}

/// First index of a `width`-point stencil centred as well as possible on
/// `center` among `len` nodes.
pub fn stencil_start(center: usize, back: usize, width: usize, len: usize) -> usize {
    debug_assert!(len >= width);
    center.saturating_sub(back).min(len - width)
}
