//! Run configuration: a versioned JSON document naming one command.

use std::path::PathBuf;

use serde::Deserialize;
use spps_core::Cx;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Basis,
    Solve,
    Eigs,
    Taylor,
    Approx,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Basis => "basis",
            Command::Solve => "solve",
            Command::Eigs => "eigs",
            Command::Taylor => "taylor",
            Command::Approx => "approx",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    #[serde(default)]
    pub grid: GridSpec,
    pub seed: SeedSpec,
    /// Highest order of the recursive integrals.
    pub family_order: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub basis: Option<BasisBlock>,
    pub solve: Option<SolveBlock>,
    pub eigs: Option<EigsBlock>,
    pub taylor: Option<TaylorBlock>,
    pub approx: Option<ApproxBlock>,
}

/// `a`, `b` and `n_nodes` are ignored for CSV seeds, whose file fixes the
/// nodes.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n_nodes: Option<usize>,
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedSpec {
    Builtin(Builtin),
    /// Seed integrated from a real potential.
    FromQ {
        q: FunctionSpec,
    },
    /// Columns `x,re[,im]`, optionally with `f'` in a second file.
    Csv {
        path: PathBuf,
        derivative_path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    Constant {
        value: f64,
    },
    /// `e^{c·x}`.
    Exp {
        c: f64,
    },
    /// `a·x·e^{a/x}`.
    PowerExp {
        a: f64,
    },
}

/// A real function of `x` sampled on the grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// `Σ c_k x^k`.
    Polynomial {
        coefficients: Vec<f64>,
    },
    /// `e^{rate·x}`.
    Exp {
        rate: f64,
    },
    /// `|x - center|`.
    Abs {
        center: f64,
    },
    Csv {
        path: PathBuf,
    },
}

/// A complex number written as a JSON number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Pair([f64; 2]),
}

impl Complex {
    pub fn value(self) -> Cx<f64> {
        match self {
            Complex::Real(re) => Cx::new(re, 0.0),
            Complex::Pair([re, im]) => Cx::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    pub max_order: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Terms {
    Fixed(usize),
    Auto(AutoTerms),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTerms {
    Auto,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    pub lambda: Complex,
    #[serde(default = "auto_terms")]
    pub terms: Terms,
    #[serde(default = "default_truncation_tol")]
    pub truncation_tol: f64,
}

fn auto_terms() -> Terms {
    Terms::Auto(AutoTerms::Auto)
}

fn default_truncation_tol() -> f64 {
    1e-14
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigsBlock {
    /// `(c1, c2)` in `c1·u(a) + c2·u'(a) = 0`.
    pub bc_left: [Complex; 2],
    /// `(c3, c4)` in `c3·u(b) + c4·u'(b) = 0`.
    pub bc_right: [Complex; 2],
    pub range: [f64; 2],
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
    #[serde(default = "default_root_tol")]
    pub tol: f64,
    #[serde(default)]
    pub scan_csv: bool,
    /// Treat a truncation that hits the family capacity as a failure.
    #[serde(default)]
    pub fail_on_cap: bool,
}

fn default_scan_points() -> usize {
    200
}

fn default_root_tol() -> f64 {
    1e-12
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaylorBlock {
    pub n: usize,
    /// Optional spectral parameter at which the derivative vectors are
    /// also evaluated.
    pub lambda: Option<Complex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChoice {
    Even,
    Odd,
    Full,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxBlock {
    pub target: FunctionSpec,
    pub basis: BasisChoice,
    #[serde(default = "one")]
    pub n_min: usize,
    pub n_max: usize,
}

fn one() -> usize {
    1
}

impl RunConfig {
    /// Structural checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let present = match self.command {
            Command::Basis => self.basis.is_some(),
            Command::Solve => self.solve.is_some(),
            Command::Eigs => self.eigs.is_some(),
            Command::Taylor => self.taylor.is_some(),
            Command::Approx => self.approx.is_some(),
        };
        if !present {
            return Err(format!("command '{0}' needs a '{0}' block", self.command.name()));
        }
        if !matches!(self.seed, SeedSpec::Csv { .. }) {
            let (a, b) = match (self.grid.a, self.grid.b) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err("grid.a and grid.b are required".into()),
            };
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(format!("grid needs finite a < b, got a = {a}, b = {b}"));
            }
            if let Some(x0) = self.grid.x0 {
                if !(a..=b).contains(&x0) {
                    return Err(format!("x0 = {x0} lies outside [{a}, {b}]"));
                }
            }
            if self.grid.n_nodes.is_some_and(|n| n < 6) {
                return Err("grid.n_nodes must be at least 6".into());
            }
        }
        if let Some(order) = self.family_order {
            if order == 0 {
                return Err("family_order must be positive".into());
            }
        }
        match self.command {
            Command::Eigs => {
                let e = self.eigs.as_ref().unwrap();
                if !(e.range[0].is_finite() && e.range[1].is_finite() && e.range[0] < e.range[1]) {
                    return Err("eigs.range must be finite and increasing".into());
                }
                if e.scan_points < 2 {
                    return Err("eigs.scan_points must be at least 2".into());
                }
                if e.tol.is_nan() || e.tol <= 0.0 {
                    return Err("eigs.tol must be positive".into());
                }
                if self.grid.x0.is_some_and(|x0| Some(x0) != self.grid.a) {
                    return Err("eigs anchors the family at a; leave grid.x0 unset or equal to a".into());
                }
            }
            Command::Approx => {
                let p = self.approx.as_ref().unwrap();
                if p.n_min == 0 || p.n_min > p.n_max {
                    return Err("approx needs 1 <= n_min <= n_max".into());
                }
            }
            Command::Solve => {
                let s = self.solve.as_ref().unwrap();
                if matches!(s.terms, Terms::Fixed(0)) {
                    return Err("solve.terms must be positive".into());
                }
                if s.truncation_tol.is_nan() || s.truncation_tol <= 0.0 {
                    return Err("solve.truncation_tol must be positive".into());
                }
            }
            Command::Basis | Command::Taylor => {}
        }
        Ok(())
    }
}
