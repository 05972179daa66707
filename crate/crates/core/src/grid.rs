//! Sampled complex-valued functions on a 1-D grid over `[a, b]`.
//!
//! The grid carries the anchor `x0` (always a node) and precomputed stencil
//! weights: sixth-order cell quadrature for anchored primitives, five-point
//! first derivatives and six-point second derivatives.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{cx, is_finite, Cx, Real};
use crate::stencil::{fornberg, integration_weights, stencil_start};

/// Points per cell-quadrature stencil (degree-5 local interpolant).
pub const QUADRATURE_WIDTH: usize = 6;
/// Points per first-derivative stencil.
pub const DERIVATIVE_WIDTH: usize = 5;
/// Points per second-derivative stencil.
pub const SECOND_DERIVATIVE_WIDTH: usize = 6;
/// Points per interpolation stencil.
pub const INTERPOLATION_WIDTH: usize = 6;
/// Default node count for uniform grids.
pub const DEFAULT_NODES: usize = 5001;

struct Rules<T> {
    cells: Vec<[T; QUADRATURE_WIDTH]>,
    first: Vec<[T; DERIVATIVE_WIDTH]>,
    second: Vec<[T; SECOND_DERIVATIVE_WIDTH]>,
}

impl<T: Real> Rules<T> {
    fn build(nodes: &[T]) -> Self {
        let n = nodes.len();
        let mut cells = Vec::new();
        if n >= QUADRATURE_WIDTH {
            cells.reserve(n - 1);
            for i in 0..n - 1 {
                let s = stencil_start(i, 2, QUADRATURE_WIDTH, n);
                let w = integration_weights(nodes[i], nodes[i + 1], &nodes[s..s + QUADRATURE_WIDTH]);
                cells.push(to_array(&w));
            }
        }
        let mut first = Vec::new();
        if n >= DERIVATIVE_WIDTH {
            first.reserve(n);
            for i in 0..n {
                let s = stencil_start(i, 2, DERIVATIVE_WIDTH, n);
                let w = fornberg(nodes[i], &nodes[s..s + DERIVATIVE_WIDTH], 1);
                first.push(to_array(&w[1]));
            }
        }
        let mut second = Vec::new();
        if n >= SECOND_DERIVATIVE_WIDTH {
            second.reserve(n);
            for i in 0..n {
                let s = stencil_start(i, 2, SECOND_DERIVATIVE_WIDTH, n);
                let w = fornberg(nodes[i], &nodes[s..s + SECOND_DERIVATIVE_WIDTH], 2);
                second.push(to_array(&w[2]));
            }
        }
        Rules { cells, first, second }
    }
}

fn to_array<T: Real, const N: usize>(v: &[T]) -> [T; N] {
    let mut out = [T::zero(); N];
    out.copy_from_slice(v);
    out
}

/// Strictly increasing nodes over `[a, b]` with a distinguished anchor node.
#[derive(Clone)]
pub struct Grid<T: Real> {
    nodes: Arc<[T]>,
    x0_index: usize,
    rules: Arc<Rules<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("a", &self.a())
            .field("b", &self.b())
            .field("len", &self.len())
            .field("x0", &self.x0())
            .finish()
    }
}

impl<T: Real> Grid<T> {
    /// Uniform grid with `n` nodes, anchored at `a`.
    pub fn uniform(a: T, b: T, n: usize) -> Result<Self> {
        Self::uniform_anchored(a, b, n, a)
    }

    /// Uniform grid with `n` nodes anchored at `x0`, which must coincide with
    /// a node (up to `1e-9` of the spacing).
    pub fn uniform_anchored(a: T, b: T, n: usize, x0: T) -> Result<Self> {
        check_interval(a, b)?;
        if n < 2 {
            return Err(Error::TooFewNodes {
                what: "a grid",
                needed: 2,
                got: n,
            });
        }
        let last = T::from_usize_lossy(n - 1);
        let mut nodes: Vec<T> = (0..n).map(|i| a + (b - a) * T::from_usize_lossy(i) / last).collect();
        nodes[n - 1] = b;
        let index = snap_anchor(&nodes, x0)?;
        Self::from_nodes(nodes, index)
    }

    /// Grid on arbitrary strictly increasing nodes.
    pub fn from_nodes(nodes: Vec<T>, x0_index: usize) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::TooFewNodes {
                what: "a grid",
                needed: 2,
                got: nodes.len(),
            });
        }
        check_interval(nodes[0], nodes[nodes.len() - 1])?;
        for i in 1..nodes.len() {
            if !(nodes[i].is_finite() && nodes[i] > nodes[i - 1]) {
                return Err(Error::NodesNotIncreasing { index: i });
            }
        }
        if x0_index >= nodes.len() {
            return Err(Error::AnchorIndex {
                index: x0_index,
                len: nodes.len(),
            });
        }
        let rules = Arc::new(Rules::build(&nodes));
        Ok(Grid {
            nodes: nodes.into(),
            x0_index,
            rules,
        })
    }

    /// Same nodes, new anchor index. Shares all stencil data.
    pub fn with_anchor_index(&self, x0_index: usize) -> Result<Self> {
        if x0_index >= self.len() {
            return Err(Error::AnchorIndex {
                index: x0_index,
                len: self.len(),
            });
        }
        Ok(Grid {
            nodes: Arc::clone(&self.nodes),
            x0_index,
            rules: Arc::clone(&self.rules),
        })
    }

    /// Same nodes, anchored at the node coinciding with `x0`.
    pub fn with_anchor(&self, x0: T) -> Result<Self> {
        let index = snap_anchor(&self.nodes, x0)?;
        self.with_anchor_index(index)
    }

    pub fn a(&self) -> T {
        self.nodes[0]
    }

    pub fn b(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn x0_index(&self) -> usize {
        self.x0_index
    }

    pub fn x0(&self) -> T {
        self.nodes[self.x0_index]
    }

    /// True when both grids have identical nodes (anchors may differ).
    pub fn same_nodes(&self, other: &Grid<T>) -> bool {
        Arc::ptr_eq(&self.nodes, &other.nodes) || self.nodes[..] == other.nodes[..]
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.a() && x <= self.b()
    }

    fn check_domain(&self, x: T) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x: x.as_f64(),
                a: self.a().as_f64(),
                b: self.b().as_f64(),
            })
        }
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` containing `x` (clamped to the
    /// last cell at `x = b`).
    pub fn cell_of(&self, x: T) -> Result<usize> {
        self.check_domain(x)?;
        let i = self.nodes.partition_point(|&node| node <= x);
        Ok(i.saturating_sub(1).min(self.len() - 2))
    }

    /// Index of the node exactly equal to `x`, if any.
    pub fn node_index(&self, x: T) -> Option<usize> {
        let i = self.nodes.partition_point(|&node| node < x);
        (i < self.len() && self.nodes[i] == x).then_some(i)
    }

    /// Interpolation stencil at `x`: first node index and weights.
    ///
    /// A node hit returns the single weight `1`. Otherwise a six-point
    /// Lagrange stencil (or all nodes, on grids shorter than that) around
    /// the containing cell is used.
    pub fn interpolation_stencil(&self, x: T) -> Result<(usize, Vec<T>)> {
        self.check_domain(x)?;
        if let Some(i) = self.node_index(x) {
            return Ok((i, vec![T::one()]));
        }
        let cell = self.cell_of(x)?;
        let width = INTERPOLATION_WIDTH.min(self.len());
        let start = stencil_start(cell, 2, width, self.len());
        let w = fornberg(x, &self.nodes[start..start + width], 0);
        Ok((start, w.into_iter().next().unwrap_or_default()))
    }

    /// Composite trapezoidal weights over the whole grid.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let n = self.len();
        let half = T::lit(0.5);
        let mut w = vec![T::zero(); n];
        for i in 0..n - 1 {
            let h = self.nodes[i + 1] - self.nodes[i];
            w[i] += half * h;
            w[i + 1] += half * h;
        }
        w
    }

    fn require(&self, what: &'static str, needed: usize) -> Result<()> {
        if self.len() < needed {
            Err(Error::TooFewNodes {
                what,
                needed,
                got: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

fn check_interval<T: Real>(a: T, b: T) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::InvalidInterval {
            a: a.as_f64(),
            b: b.as_f64(),
        })
    }
}

fn snap_anchor<T: Real>(nodes: &[T], x0: T) -> Result<usize> {
    let n = nodes.len();
    let off = || Error::AnchorOffGrid { x0: x0.as_f64() };
    if !(x0 >= nodes[0] && x0 <= nodes[n - 1]) {
        return Err(off());
    }
    let i = nodes.partition_point(|&node| node < x0);
    let candidates = [i.saturating_sub(1), i.min(n - 1)];
    let best = candidates
        .into_iter()
        .min_by(|&p, &q| {
            (nodes[p] - x0)
                .abs()
                .partial_cmp(&(nodes[q] - x0).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let spacing = (nodes[n - 1] - nodes[0]) / T::from_usize_lossy(n - 1);
    if (nodes[best] - x0).abs() <= T::lit(1e-9) * spacing {
        Ok(best)
    } else {
        Err(off())
    }
}

/// Complex values sampled on every node of a [`Grid`].
#[derive(Clone, Debug)]
pub struct GridFunction<T: Real> {
    grid: Grid<T>,
    values: Vec<Cx<T>>,
}

impl<T: Real> GridFunction<T> {
    /// Wrap values; length must match and all values must be finite.
    pub fn new(grid: Grid<T>, values: Vec<Cx<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|&v| !is_finite(v)) {
            return Err(Error::NonFiniteSample {
                index,
                x: grid.nodes[index].as_f64(),
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid<T>, values: Vec<Cx<T>>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        GridFunction { grid, values }
    }

    /// Pointwise evaluation of `fun` on every node.
    pub fn sample<F>(grid: &Grid<T>, fun: F) -> Result<Self>
    where
        F: Fn(T) -> Cx<T>,
    {
        let values = grid.nodes.iter().map(|&x| fun(x)).collect();
        Self::new(grid.clone(), values)
    }

    /// Pointwise evaluation of a real-valued `fun`, embedded as complex.
    pub fn sample_real<F>(grid: &Grid<T>, fun: F) -> Result<Self>
    where
        F: Fn(T) -> T,
    {
        Self::sample(grid, |x| cx(fun(x)))
    }

    pub fn constant(grid: &Grid<T>, value: Cx<T>) -> Self {
        GridFunction {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Cx<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Cx<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the anchor node.
    pub fn at_anchor(&self) -> Cx<T> {
        self.values[self.grid.x0_index]
    }

    /// Same values viewed on a re-anchored copy of the grid.
    pub fn reanchored(&self, x0_index: usize) -> Result<Self> {
        Ok(GridFunction {
            grid: self.grid.with_anchor_index(x0_index)?,
            values: self.values.clone(),
        })
    }

    pub fn map<F>(&self, fun: F) -> Self
    where
        F: Fn(Cx<T>) -> Cx<T>,
    {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| fun(v)).collect(),
        }
    }

    pub fn zip_with<F>(&self, other: &GridFunction<T>, fun: F) -> Result<Self>
    where
        F: Fn(Cx<T>, Cx<T>) -> Cx<T>,
    {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&p, &q)| fun(p, q))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction<T>) -> Result<Self> {
        self.zip_with(other, |p, q| p + q)
    }

    pub fn sub(&self, other: &GridFunction<T>) -> Result<Self> {
        self.zip_with(other, |p, q| p - q)
    }

    pub fn mul(&self, other: &GridFunction<T>) -> Result<Self> {
        self.zip_with(other, |p, q| p * q)
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        self.map(|v| v * s)
    }

    /// `max |g|` over all nodes.
    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// `max |g - h|` over all nodes.
    pub fn max_abs_diff(&self, other: &GridFunction<T>) -> Result<T> {
        Ok(self.sub(other)?.sup_norm())
    }

    /// Anchored primitive `G(x) = ∫_{x0}^{x} g(s) ds` at every node.
    ///
    /// Each cell is integrated exactly for the degree-5 interpolant through
    /// six neighbouring nodes, then cell contributions are accumulated
    /// outward from the anchor with compensated summation. `G(x0) = 0`
    /// exactly; values left of the anchor carry the sign of the oriented
    /// integral.
    pub fn cumulative_integral(&self) -> Result<Self> {
        self.grid.require("cumulative integration", QUADRATURE_WIDTH)?;
        let n = self.len();
        let cells = &self.grid.rules.cells;
        let cell_integral = |i: usize| -> Cx<T> {
            let s = stencil_start(i, 2, QUADRATURE_WIDTH, n);
            cells[i]
                .iter()
                .zip(&self.values[s..s + QUADRATURE_WIDTH])
                .fold(Cx::new(T::zero(), T::zero()), |acc, (&w, &v)| acc + v * w)
        };
        let zero = Cx::new(T::zero(), T::zero());
        let mut out = vec![zero; n];
        let x0 = self.grid.x0_index;

        let mut acc = Neumaier::default();
        for i in x0..n - 1 {
            acc.add(cell_integral(i));
            out[i + 1] = acc.value();
        }
        let mut acc = Neumaier::default();
        for i in (0..x0).rev() {
            acc.add(-cell_integral(i));
            out[i] = acc.value();
        }
        Ok(GridFunction::from_parts(self.grid.clone(), out))
    }

    /// First derivative by five-point stencils (centred in the interior,
    /// one-sided near the ends); fourth order throughout.
    pub fn derivative(&self) -> Result<Self> {
        self.grid.require("differentiation", DERIVATIVE_WIDTH)?;
        Ok(self.apply_stencils(&self.grid.rules.first))
    }

    /// Second derivative by six-point stencils; fourth order throughout.
    pub fn second_derivative(&self) -> Result<Self> {
        self.grid.require("second differentiation", SECOND_DERIVATIVE_WIDTH)?;
        Ok(self.apply_stencils(&self.grid.rules.second))
    }

    fn apply_stencils<const W: usize>(&self, rules: &[[T; W]]) -> Self {
        let n = self.len();
        let values = rules
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let s = stencil_start(i, 2, W, n);
                w.iter()
                    .zip(&self.values[s..s + W])
                    .fold(Cx::new(T::zero(), T::zero()), |acc, (&wi, &v)| acc + v * wi)
            })
            .collect();
        GridFunction::from_parts(self.grid.clone(), values)
    }

    /// Value at an arbitrary `x` in `[a, b]` by local degree-5 interpolation;
    /// exact stored value at nodes.
    pub fn interpolate(&self, x: T) -> Result<Cx<T>> {
        let (start, w) = self.grid.interpolation_stencil(x)?;
        Ok(w.iter()
            .zip(&self.values[start..start + w.len()])
            .fold(Cx::new(T::zero(), T::zero()), |acc, (&wi, &v)| acc + v * wi))
    }

    /// Write as CSV with header `x,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,re,im")?;
        for (x, v) in self.grid.nodes.iter().zip(&self.values) {
            writeln!(out, "{},{},{}", x, v.re, v.im)?;
        }
        Ok(())
    }

    /// Read a CSV with header `x,re,im` (an `im` column is optional); the
    /// grid is built from the `x` column and anchored at `x0`.
    pub fn read_csv<R: BufRead>(input: R, x0: T) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::Parse(e.to_string()))?,
            None => return Err(Error::Parse("empty CSV".into())),
        };
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "x" || cols[1] != "re" || (cols.len() > 2 && cols[2] != "im") {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields",
                    lineno + 2,
                    cols.len()
                )));
            }
            let parse = |s: &str| -> Result<T> {
                s.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            nodes.push(parse(fields[0])?);
            let re = parse(fields[1])?;
            let im = if fields.len() > 2 { parse(fields[2])? } else { T::zero() };
            values.push(Cx::new(re, im));
        }
        let provisional = Grid::from_nodes(nodes, 0)?;
        let grid = provisional.with_anchor(x0)?;
        Self::new(grid, values)
    }
}

#[derive(Default)]
struct Neumaier<T: Real> {
    sum: Cx<T>,
    comp: Cx<T>,
}

impl<T: Real> Neumaier<T> {
    fn add(&mut self, v: Cx<T>) {
        self.sum.re = neumaier_step(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = neumaier_step(self.sum.im, v.im, &mut self.comp.im);
    }

    fn value(&self) -> Cx<T> {
        self.sum + self.comp
    }
}

fn neumaier_step<T: Real>(sum: T, v: T, comp: &mut T) -> T {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *comp += (sum - t) + v;
    } else {
        *comp += (v - t) + sum;
    }
    t
}
