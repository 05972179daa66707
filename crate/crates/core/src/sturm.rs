//! Regular Sturm–Liouville problems `u'' + q u = λ u` on `[a, b]` with
//! separated boundary conditions
//!
//! ```text
//! c1·u(a) + c2·u'(a) = 0,   c3·u(b) + c4·u'(b) = 0.
//! ```
//!
//! Eigenvalues are the zeros of the characteristic function
//! `Φ(λ) = c3·u(b) + c4·u'(b)`, where `u` is the SPPS solution meeting the
//! left condition with `u(a) = -c2`, `u'(a) = c1`. Those initial values do
//! not depend on the seed, so for real `q` and real `λ` the function `Φ` is
//! real up to rounding even when the seed is complex.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::recint::{FamilyOptions, RecursiveFamily, NONVANISHING_THRESHOLD};
use crate::scalar::{cx, Cx, Real};
use crate::spps::{choose_truncation, SolutionKind, SppsSolution, Truncation};

/// A potential with a pair of separated boundary conditions.
#[derive(Clone, Debug)]
pub struct SlProblem<T: Real> {
    q: GridFunction<T>,
    bc_left: (Cx<T>, Cx<T>),
    bc_right: (Cx<T>, Cx<T>),
}

impl<T: Real> SlProblem<T> {
    /// `bc_left = (c1, c2)`, `bc_right = (c3, c4)`; neither pair may vanish.
    pub fn new(q: GridFunction<T>, bc_left: (Cx<T>, Cx<T>), bc_right: (Cx<T>, Cx<T>)) -> Result<Self> {
        let zero = cx(T::zero());
        if bc_left.0 == zero && bc_left.1 == zero {
            return Err(Error::DegenerateBoundary("left", "c1 and c2"));
        }
        if bc_right.0 == zero && bc_right.1 == zero {
            return Err(Error::DegenerateBoundary("right", "c3 and c4"));
        }
        Ok(SlProblem { q, bc_left, bc_right })
    }

    /// `u(a) = u(b) = 0`.
    pub fn dirichlet(q: GridFunction<T>) -> Self {
        let pair = (cx(T::one()), cx(T::zero()));
        SlProblem {
            q,
            bc_left: pair,
            bc_right: pair,
        }
    }

    /// `u'(a) = u'(b) = 0`.
    pub fn neumann(q: GridFunction<T>) -> Self {
        let pair = (cx(T::zero()), cx(T::one()));
        SlProblem {
            q,
            bc_left: pair,
            bc_right: pair,
        }
    }

    pub fn q(&self) -> &GridFunction<T> {
        &self.q
    }

    pub fn bc_left(&self) -> (Cx<T>, Cx<T>) {
        self.bc_left
    }

    pub fn bc_right(&self) -> (Cx<T>, Cx<T>) {
        self.bc_right
    }
}

/// A nonvanishing solution of `f'' + q f = 0` together with `f'`.
#[derive(Clone, Debug)]
pub struct Seed<T: Real> {
    pub f: GridFunction<T>,
    pub f_prime: GridFunction<T>,
}

impl<T: Real> Seed<T> {
    /// `v1·v2' - v1'·v2` for `f = v1 + i·v2`.
    pub fn wronskian(&self) -> Vec<T> {
        self.f
            .values()
            .iter()
            .zip(self.f_prime.values())
            .map(|(f, d)| (f.conj() * d).im)
            .collect()
    }

    /// Family anchored at node `x0_index`, using the integrated `f'`.
    pub fn family(&self, x0_index: usize, order: usize) -> Result<RecursiveFamily<T>> {
        let options = FamilyOptions {
            seed_derivative: Some(self.f_prime.clone()),
            ..FamilyOptions::default()
        };
        RecursiveFamily::build_with(&self.f, x0_index, order, options)
    }
}

/// `f = v1 + i·v2` where `v1, v2` solve `f'' + q f = 0` with
/// `(v, v')(a) = (1, 0)` and `(0, 1)`. Integrated node to node by classical
/// Runge–Kutta with `q` interpolated at the half steps.
///
/// For real `q` the two solutions are real and independent, so `f` cannot
/// vanish. Complex potentials need a seed supplied by the caller.
pub fn build_seed<T: Real>(q: &GridFunction<T>) -> Result<Seed<T>> {
    if q.values().iter().any(|v| v.im != T::zero()) {
        return Err(Error::InvalidArgument(
            "a seed can only be integrated for a real potential; supply one for complex q".into(),
        ));
    }
    let grid = q.grid();
    let nodes = grid.nodes();
    let n = nodes.len();
    // one complex solution carries both real ones
    let mut v = vec![cx(T::zero()); n];
    let mut d = vec![cx(T::zero()); n];
    v[0] = cx(T::one());
    d[0] = Cx::new(T::zero(), T::one());
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        let q0 = q.values()[i].re;
        let qm = q.interpolate(nodes[i] + half * h)?.re;
        let q1 = q.values()[i + 1].re;
        let (y, z) = (v[i], d[i]);
        let (k1y, k1z) = (z, y * (-q0));
        let (k2y, k2z) = (z + k1z * (half * h), (y + k1y * (half * h)) * (-qm));
        let (k3y, k3z) = (z + k2z * (half * h), (y + k2y * (half * h)) * (-qm));
        let (k4y, k4z) = (z + k3z * h, (y + k3y * h) * (-q1));
        v[i + 1] = y + (k1y + k2y * two + k3y * two + k4y) * (h * sixth);
        d[i + 1] = z + (k1z + k2z * two + k3z * two + k4z) * (h * sixth);
    }
    let threshold = T::lit(NONVANISHING_THRESHOLD);
    if let Some((index, m)) = v.iter().map(|c| c.norm()).enumerate().find(|(_, m)| !(*m > threshold)) {
        return Err(Error::SeedDegenerate {
            index,
            x: nodes[index].as_f64(),
            modulus: m.as_f64(),
        });
    }
    let grid = grid.clone();
    Ok(Seed {
        f: GridFunction::new(grid.clone(), v)?,
        f_prime: GridFunction::new(grid, d)?,
    })
}

fn check_setup<T: Real>(problem: &SlProblem<T>, family: &RecursiveFamily<T>) -> Result<()> {
    if !problem.q.grid().same_nodes(family.grid()) {
        return Err(Error::GridMismatch);
    }
    if family.x0_index() != 0 {
        return Err(Error::InvalidArgument(
            "eigenproblems need the family anchored at the left endpoint".into(),
        ));
    }
    Ok(())
}

/// `(β1, β2)` with `β1·u1 + β2·u2` taking the values `u(a) = -c2`,
/// `u'(a) = c1`.
fn left_combination<T: Real>(problem: &SlProblem<T>, family: &RecursiveFamily<T>) -> Result<(Cx<T>, Cx<T>)> {
    let (c1, c2) = problem.bc_left;
    let f = family.seed().values()[0];
    let fp = family.seed_derivative().values()[0];
    let beta1 = -c2 / f;
    let beta2 = c1 * f + c2 * fp;
    if beta1 == cx(T::zero()) && beta2 == cx(T::zero()) {
        return Err(Error::Invariant("both solution weights vanished"));
    }
    Ok((beta1, beta2))
}

/// `Φ(λ)` with the series truncated after `terms` terms.
pub fn characteristic<T: Real>(
    problem: &SlProblem<T>,
    family: &RecursiveFamily<T>,
    lambda: Cx<T>,
    terms: usize,
) -> Result<Cx<T>> {
    check_setup(problem, family)?;
    let (beta1, beta2) = left_combination(problem, family)?;
    let last = family.grid().len() - 1;
    let (u1, d1) = SppsSolution::new(family, lambda, terms, SolutionKind::U1)?.at_node(last);
    let (u2, d2) = SppsSolution::new(family, lambda, terms, SolutionKind::U2)?.at_node(last);
    let (c3, c4) = problem.bc_right;
    Ok(c3 * (beta1 * u1 + beta2 * u2) + c4 * (beta1 * d1 + beta2 * d2))
}

/// The solution satisfying the left boundary condition, on the grid.
pub fn eigenfunction<T: Real>(
    problem: &SlProblem<T>,
    family: &RecursiveFamily<T>,
    lambda: Cx<T>,
    terms: usize,
) -> Result<GridFunction<T>> {
    check_setup(problem, family)?;
    let (beta1, beta2) = left_combination(problem, family)?;
    let u1 = SppsSolution::new(family, lambda, terms, SolutionKind::U1)?.values();
    let u2 = SppsSolution::new(family, lambda, terms, SolutionKind::U2)?.values();
    u1.scale(beta1).add(&u2.scale(beta2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions<T: Real> {
    /// Evenly spaced λ values of the initial scan, endpoints included.
    pub scan_points: usize,
    /// Refinement stops once `|Φ|` falls below this fraction of the
    /// larger bracket end value.
    pub tol: T,
    /// Tolerance handed to [`choose_truncation`] for every λ.
    pub truncation_tol: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        EigenOptions {
            scan_points: 200,
            tol: T::lit(1e-12),
            truncation_tol: T::epsilon() * T::lit(4.0),
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint<T: Real> {
    pub lambda: T,
    pub value: Cx<T>,
    pub terms: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult<T: Real> {
    /// Ascending.
    pub eigenvalues: Vec<Cx<T>>,
    /// `|Φ(λ)|` relative to the bracket scale, one per eigenvalue.
    pub residuals: Vec<T>,
    pub truncations: Vec<Truncation>,
    pub scan: Vec<ScanPoint<T>>,
    /// Some λ needed more terms than the family supports.
    pub cap_reached: bool,
    pub warnings: Vec<String>,
}

struct Evaluator<'a, T: Real> {
    problem: &'a SlProblem<T>,
    family: &'a RecursiveFamily<T>,
    tol: T,
    capped: bool,
}

impl<T: Real> Evaluator<'_, T> {
    fn eval(&mut self, lambda: T) -> Result<(Cx<T>, Truncation)> {
        let trunc = choose_truncation(self.family, cx(lambda), self.tol)?;
        self.capped |= trunc.cap_reached;
        Ok((
            characteristic(self.problem, self.family, cx(lambda), trunc.terms)?,
            trunc,
        ))
    }
}

/// Real eigenvalues in `range` by scanning `Φ`, bracketing sign changes and
/// refining each bracket.
pub fn find_eigenvalues<T: Real>(
    problem: &SlProblem<T>,
    family: &RecursiveFamily<T>,
    range: (T, T),
    scan_points: usize,
    tol: T,
) -> Result<EigenResult<T>> {
    let options = EigenOptions {
        scan_points,
        tol,
        ..EigenOptions::default()
    };
    find_eigenvalues_with(problem, family, range, &options)
}

pub fn find_eigenvalues_with<T: Real>(
    problem: &SlProblem<T>,
    family: &RecursiveFamily<T>,
    range: (T, T),
    options: &EigenOptions<T>,
) -> Result<EigenResult<T>> {
    check_setup(problem, family)?;
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(
            "the λ range must be finite and increasing".into(),
        ));
    }
    if options.scan_points < 2 {
        return Err(Error::InvalidArgument("the scan needs at least two points".into()));
    }
    let mut ev = Evaluator {
        problem,
        family,
        tol: options.truncation_tol,
        capped: false,
    };
    let m = options.scan_points - 1;
    let mut scan = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let lambda = if i == m {
            hi
        } else {
            lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(m)
        };
        let (value, trunc) = ev.eval(lambda)?;
        scan.push(ScanPoint {
            lambda,
            value,
            terms: trunc.terms,
        });
    }

    let mut warnings = Vec::new();
    // a complex seed only contributes a constant phase
    let peak = scan
        .iter()
        .max_by(|p, q| p.value.norm().partial_cmp(&q.value.norm()).unwrap())
        .unwrap()
        .value;
    let rotation = if peak.norm() > T::zero() {
        (peak / peak.norm()).conj()
    } else {
        cx(T::one())
    };
    let worst_imag = scan
        .iter()
        .map(|p| (p.value * rotation).im.abs())
        .fold(T::zero(), T::max);
    if worst_imag > T::lit(1e-6) * peak.norm() {
        warnings.push(format!(
            "characteristic function is not real after rotation (imaginary part up to {:.3e} of its peak)",
            (worst_imag / peak.norm()).as_f64()
        ));
    }
    let real = |v: Cx<T>| (v * rotation).re;
    let g: Vec<T> = scan.iter().map(|p| real(p.value)).collect();

    let mut roots: Vec<(T, T, Truncation)> = Vec::new();
    for i in 0..=m {
        if g[i] == T::zero() {
            let (_, trunc) = ev.eval(scan[i].lambda)?;
            roots.push((scan[i].lambda, T::zero(), trunc));
            continue;
        }
        if i < m && g[i + 1] != T::zero() && (g[i] < T::zero()) != (g[i + 1] < T::zero()) {
            let scale = g[i].abs().max(g[i + 1].abs());
            let (x, gx, trunc, converged) = refine(
                &mut ev,
                &real,
                (scan[i].lambda, g[i]),
                (scan[i + 1].lambda, g[i + 1]),
                scale,
                options,
            )?;
            if !converged {
                warnings.push(format!(
                    "root near λ = {:.12e} did not reach the requested tolerance",
                    x.as_f64()
                ));
            }
            roots.push((x, gx.abs() / scale, trunc));
        }
    }

    let cell = (hi - lo) / T::from_usize_lossy(m);
    for w in roots.windows(2) {
        if w[1].0 - w[0].0 < cell + cell {
            warnings.push(format!(
                "eigenvalues {:.6e} and {:.6e} are within two scan cells; a denser scan may reveal more",
                w[0].0.as_f64(),
                w[1].0.as_f64()
            ));
        }
    }
    // a dip of |Φ| without a sign change can hide a pair of roots
    for i in 1..m {
        let (l, c, r) = (g[i - 1], g[i], g[i + 1]);
        let same_sign = (l < T::zero()) == (c < T::zero()) && (c < T::zero()) == (r < T::zero());
        if same_sign && c.abs() < l.abs() && c.abs() < r.abs() && c.abs() < T::lit(0.05) * l.abs().min(r.abs()) {
            warnings.push(format!(
                "|Φ| has a deep minimum near λ = {:.6e} without a sign change; increase the scan points",
                scan[i].lambda.as_f64()
            ));
        }
    }
    if ev.capped {
        warnings.push(format!(
            "series truncation hit the family capacity of {} terms; raise the family order",
            crate::spps::max_terms(family.order())
        ));
    }

    Ok(EigenResult {
        eigenvalues: roots.iter().map(|r| cx(r.0)).collect(),
        residuals: roots.iter().map(|r| r.1).collect(),
        truncations: roots.iter().map(|r| r.2).collect(),
        scan,
        cap_reached: ev.capped,
        warnings,
    })
}

// Bisection while the bracket is wide, then secant steps kept inside it.
fn refine<T: Real>(
    ev: &mut Evaluator<'_, T>,
    real: &impl Fn(Cx<T>) -> T,
    (mut a, mut ga): (T, T),
    (mut b, mut gb): (T, T),
    scale: T,
    options: &EigenOptions<T>,
) -> Result<(T, T, Truncation, bool)> {
    let polish_width = T::epsilon().sqrt() * T::one().max(a.abs().max(b.abs()));
    let mut best = if ga.abs() < gb.abs() { (a, ga) } else { (b, gb) };
    let mut trunc = ev.eval(best.0)?.1;
    for _ in 0..options.max_iterations {
        let width = b - a;
        if best.1.abs() <= options.tol * scale
            || width <= T::lit(4.0) * T::epsilon() * T::one().max(a.abs().max(b.abs()))
        {
            // a bracket at machine width is as converged as it can be
            return Ok((best.0, best.1, trunc, true));
        }
        let secant = b - gb * (b - a) / (gb - ga);
        let x = if width <= polish_width && secant > a && secant < b {
            secant
        } else {
            a + width * T::lit(0.5)
        };
        let (v, t) = ev.eval(x)?;
        let gx = real(v);
        if gx.abs() < best.1.abs() {
            best = (x, gx);
            trunc = t;
        }
        if gx == T::zero() {
            return Ok((x, gx, t, true));
        }
        if (gx < T::zero()) == (ga < T::zero()) {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
    }
    Ok((best.0, best.1, trunc, false))
}
