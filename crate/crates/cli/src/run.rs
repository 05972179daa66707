//! Turns a validated configuration into output files.
//!
//! Work is split into a preparation phase (grid, sampled inputs, CSV reads)
//! whose errors are configuration errors, and a compute phase whose errors
//! are numerical failures. Nothing is written until both succeed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use spps_core::chebfit::{fit_jet, FitOptions};
use spps_core::gentaylor::{least_squares_project, Basis};
use spps_core::recint::{FamilyOptions, DEFAULT_ORDER};
use spps_core::scalar::cx;
use spps_core::seeds::StockSeed;
use spps_core::spps::{choose_truncation, max_terms, residual, SolutionKind, SppsSolution};
use spps_core::sturm::{build_seed, find_eigenvalues_with, EigenOptions, SlProblem};
use spps_core::{Cx, Error as CoreError, Grid64, GridFunction64, RecursiveFamily64, TransformMatrix64};

use crate::config::{
    ApproxBlock, BasisBlock, BasisChoice, Builtin, Command, EigsBlock, FunctionSpec, RunConfig, SeedSpec, SolveBlock,
    TaylorBlock, Terms,
};

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// The configuration or its inputs are unusable (exit code 2).
    Config(anyhow::Error),
    /// The numerics failed on a valid configuration (exit code 3).
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Numerical(e) => e,
        }
    }
}

fn config_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn numeric<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Numerical(e.into())
}

/// A file produced by a run, held in memory until the run succeeds.
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

struct Inputs {
    grid: Grid64,
    seed: SeedInput,
}

enum SeedInput {
    Stock(StockSeed<f64>),
    /// Potential to integrate the seed from.
    FromQ(GridFunction64),
    Samples {
        f: GridFunction64,
        f_prime: Option<GridFunction64>,
    },
}

/// Seed, its derivative and the potential it belongs to, on the grid.
struct SeedData {
    f: GridFunction64,
    f_prime: GridFunction64,
    q: GridFunction64,
}

pub struct Runner<'a> {
    config: &'a RunConfig,
    base: PathBuf,
    verbose: bool,
    warnings: Vec<String>,
}

impl<'a> Runner<'a> {
    /// `base` resolves relative input paths (the config file's directory).
    pub fn new(config: &'a RunConfig, base: &Path, verbose: bool) -> Self {
        Runner {
            config,
            base: base.to_path_buf(),
            verbose,
            warnings: Vec::new(),
        }
    }

    fn note(&self, msg: &str) {
        if self.verbose {
            eprintln!("spps: {msg}");
        }
    }

    fn warn(&mut self, msg: String) {
        if self.verbose {
            eprintln!("spps: warning: {msg}");
        }
        self.warnings.push(msg);
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    fn read_csv(&self, path: &Path, x0: Option<f64>) -> Result<GridFunction64, Failure> {
        let full = self.resolve(path);
        let text = std::fs::read_to_string(&full)
            .with_context(|| format!("cannot open {}", full.display()))
            .map_err(config_err)?;
        // anchor provisionally at the first node, then move to x0
        let g = first_node(text.as_bytes())
            .and_then(|first| GridFunction64::read_csv(text.as_bytes(), first))
            .with_context(|| format!("cannot read {}", full.display()))
            .map_err(config_err)?;
        match x0 {
            Some(x0) => {
                let grid = g.grid().with_anchor(x0).map_err(config_err)?;
                GridFunction64::new(grid, g.into_values()).map_err(config_err)
            }
            None => Ok(g),
        }
    }

    fn sample(&self, spec: &FunctionSpec, grid: &Grid64) -> Result<GridFunction64, Failure> {
        let g = match spec {
            FunctionSpec::Constant { value } => Ok(GridFunction64::constant(grid, cx(*value))),
            FunctionSpec::Polynomial { coefficients } => {
                GridFunction64::sample_real(grid, |x| coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c))
            }
            FunctionSpec::Exp { rate } => GridFunction64::sample_real(grid, |x| (rate * x).exp()),
            FunctionSpec::Abs { center } => GridFunction64::sample_real(grid, |x| (x - center).abs()),
            FunctionSpec::Csv { path } => {
                let g = self.read_csv(path, Some(grid.x0()))?;
                if !g.grid().same_nodes(grid) {
                    return Err(config_err(anyhow!("{} is not sampled on the run grid", path.display())));
                }
                Ok(GridFunction64::new(grid.clone(), g.into_values()).map_err(config_err)?)
            }
        };
        g.map_err(config_err)
    }

    fn prepare(&self) -> Result<Inputs, Failure> {
        let cfg = self.config;
        if let SeedSpec::Csv { path, derivative_path } = &cfg.seed {
            let f = self.read_csv(path, cfg.grid.x0)?;
            let grid = f.grid().clone();
            let f_prime = match derivative_path {
                Some(p) => {
                    let d = self.read_csv(p, Some(grid.x0()))?;
                    if !d.grid().same_nodes(&grid) {
                        return Err(config_err(anyhow!("seed derivative is sampled on different nodes")));
                    }
                    Some(d)
                }
                None => None,
            };
            return Ok(Inputs {
                grid,
                seed: SeedInput::Samples { f, f_prime },
            });
        }
        let a = cfg.grid.a.expect("validated");
        let b = cfg.grid.b.expect("validated");
        let n = cfg.grid.n_nodes.unwrap_or(spps_core::grid::DEFAULT_NODES);
        let x0 = cfg.grid.x0.unwrap_or(a);
        let grid = Grid64::uniform_anchored(a, b, n, x0).map_err(config_err)?;
        let seed = match &cfg.seed {
            SeedSpec::Builtin(builtin) => {
                let stock = match *builtin {
                    Builtin::Constant { value } => StockSeed::Constant { value },
                    Builtin::Exp { c } => StockSeed::Exp { rate: c },
                    Builtin::PowerExp { a } => StockSeed::PowerExp { a },
                };
                // reject seeds that are singular or vanish on the grid now
                stock.sample(&grid).map_err(config_err)?;
                SeedInput::Stock(stock)
            }
            SeedSpec::FromQ { q } => SeedInput::FromQ(self.sample(q, &grid)?),
            SeedSpec::Csv { .. } => unreachable!(),
        };
        Ok(Inputs { grid, seed })
    }

    fn seed_data(&mut self, inputs: &Inputs) -> Result<SeedData, Failure> {
        let grid = &inputs.grid;
        match &inputs.seed {
            SeedInput::Stock(stock) => Ok(SeedData {
                f: stock.sample(grid).map_err(numeric)?,
                f_prime: stock.sample_derivative(grid).map_err(numeric)?,
                q: stock.sample_potential(grid).map_err(numeric)?,
            }),
            SeedInput::FromQ(q) => {
                self.note("integrating the seed from q");
                let seed = build_seed(q).map_err(numeric)?;
                Ok(SeedData {
                    f: seed.f,
                    f_prime: seed.f_prime,
                    q: q.clone(),
                })
            }
            SeedInput::Samples { f, f_prime } => {
                let f_prime = match f_prime {
                    Some(d) => d.clone(),
                    None => {
                        self.warn("seed derivative obtained by grid differentiation".into());
                        f.derivative().map_err(numeric)?
                    }
                };
                self.warn("potential q = -f''/f obtained by grid differentiation of the seed".into());
                let fpp = f.second_derivative().map_err(numeric)?;
                let q = fpp.zip_with(f, |d, v| -d / v).map_err(numeric)?;
                Ok(SeedData {
                    f: f.clone(),
                    f_prime,
                    q,
                })
            }
        }
    }

    fn family(&self, seed: &SeedData, order: usize) -> Result<RecursiveFamily64, Failure> {
        self.note(&format!("building recursive integrals up to order {order}"));
        let options = FamilyOptions {
            seed_derivative: Some(seed.f_prime.clone()),
            ..FamilyOptions::default()
        };
        RecursiveFamily64::build_with(&seed.f, seed.f.grid().x0_index(), order, options).map_err(numeric)
    }

    pub fn run(mut self) -> Result<Outcome, Failure> {
        let inputs = self.prepare()?;
        let cfg = self.config;
        let artifacts = match cfg.command {
            Command::Basis => self.basis(&inputs, cfg.basis.as_ref().unwrap())?,
            Command::Solve => self.solve(&inputs, cfg.solve.as_ref().unwrap())?,
            Command::Eigs => self.eigs(&inputs, cfg.eigs.as_ref().unwrap())?,
            Command::Taylor => self.taylor(&inputs, cfg.taylor.as_ref().unwrap())?,
            Command::Approx => self.approx(&inputs, cfg.approx.as_ref().unwrap())?,
        };
        Ok(Outcome {
            artifacts,
            warnings: self.warnings,
        })
    }

    fn basis(&mut self, inputs: &Inputs, block: &BasisBlock) -> Result<Vec<Artifact>, Failure> {
        let order = self
            .config
            .family_order
            .unwrap_or(block.max_order)
            .max(block.max_order)
            .max(1);
        let seed = self.seed_data(inputs)?;
        let fam = self.family(&seed, order)?;
        let n = block.max_order;
        let x: Vec<_> = (0..=n).map(|k| fam.x(k)).collect::<Result<_, _>>().map_err(numeric)?;
        let xt: Vec<_> = (0..=n)
            .map(|k| fam.x_tilde(k))
            .collect::<Result<_, _>>()
            .map_err(numeric)?;
        let psi: Vec<_> = (0..=n).map(|k| fam.psi(k)).collect::<Result<_, _>>().map_err(numeric)?;
        let grid = fam.grid();
        let listing = BasisListing {
            a: grid.a(),
            b: grid.b(),
            n_nodes: grid.len(),
            x0: fam.x0(),
            max_order: n,
            files: vec!["basis_X.csv".into(), "basis_Xt.csv".into(), "basis_psi.csv".into()],
            columns: "x, then <name><k>_re,<name><k>_im for k = 0..=max_order".into(),
        };
        Ok(vec![
            artifact("basis_X.csv", table("X", &x)),
            artifact("basis_Xt.csv", table("Xt", &xt)),
            artifact("basis_psi.csv", table("psi", &psi)),
            json_artifact("basis.json", &listing)?,
        ])
    }

    fn solve(&mut self, inputs: &Inputs, block: &SolveBlock) -> Result<Vec<Artifact>, Failure> {
        let lambda = block.lambda.value();
        let order = match block.terms {
            Terms::Fixed(t) => self.config.family_order.unwrap_or(DEFAULT_ORDER).max(2 * t - 1),
            Terms::Auto(_) => self.config.family_order.unwrap_or(DEFAULT_ORDER),
        };
        if let (Terms::Fixed(t), Some(o)) = (block.terms, self.config.family_order) {
            if 2 * t - 1 > o {
                return Err(config_err(anyhow!(
                    "solve.terms = {t} needs family_order >= {}",
                    2 * t - 1
                )));
            }
        }
        let seed = self.seed_data(inputs)?;
        let fam = self.family(&seed, order)?;
        let (terms, cap_reached) = match block.terms {
            Terms::Fixed(t) => (t, false),
            Terms::Auto(_) => {
                let t = choose_truncation(&fam, lambda, block.truncation_tol).map_err(numeric)?;
                if t.cap_reached {
                    self.warn(format!(
                        "truncation tolerance not reached within {} terms; raise family_order",
                        max_terms(order)
                    ));
                }
                (t.terms, t.cap_reached)
            }
        };
        self.note(&format!("evaluating u1, u2 with {terms} terms"));
        let u1 = SppsSolution::new(&fam, lambda, terms, SolutionKind::U1).map_err(numeric)?;
        let u2 = SppsSolution::new(&fam, lambda, terms, SolutionKind::U2).map_err(numeric)?;
        let (v1, d1, v2, d2) = (u1.values(), u1.derivatives(), u2.values(), u2.derivatives());
        let mut csv = String::from("x,u1_re,u1_im,du1_re,du1_im,u2_re,u2_im,du2_re,du2_im\n");
        for (i, x) in fam.grid().nodes().iter().enumerate() {
            let cells = [v1.values()[i], d1.values()[i], v2.values()[i], d2.values()[i]];
            let _ = write!(csv, "{x}");
            for c in cells {
                let _ = write!(csv, ",{},{}", c.re, c.im);
            }
            csv.push('\n');
        }
        let report = SolveReport {
            lambda: pair(lambda),
            terms,
            cap_reached,
            family_order: order,
            residual_u1: residual(lambda, &v1, &seed.q).map_err(numeric)?,
            residual_u2: residual(lambda, &v2, &seed.q).map_err(numeric)?,
        };
        Ok(vec![
            artifact("solution.csv", csv),
            json_artifact("solve.json", &report)?,
        ])
    }

    fn eigs(&mut self, inputs: &Inputs, block: &EigsBlock) -> Result<Vec<Artifact>, Failure> {
        if inputs.grid.x0_index() != 0 {
            return Err(config_err(anyhow!("eigs needs the anchor at the left endpoint")));
        }
        let order = self.config.family_order.unwrap_or(DEFAULT_ORDER);
        let seed = self.seed_data(inputs)?;
        let fam = self.family(&seed, order)?;
        let [c1, c2] = block.bc_left.map(|c| c.value());
        let [c3, c4] = block.bc_right.map(|c| c.value());
        let problem = SlProblem::new(seed.q.clone(), (c1, c2), (c3, c4)).map_err(config_err)?;
        let options = EigenOptions {
            scan_points: block.scan_points,
            tol: block.tol,
            ..EigenOptions::default()
        };
        self.note("scanning the characteristic function");
        let res = find_eigenvalues_with(&problem, &fam, (block.range[0], block.range[1]), &options).map_err(numeric)?;
        for w in &res.warnings {
            self.warn(w.clone());
        }
        if block.fail_on_cap && res.cap_reached {
            return Err(numeric(anyhow!(
                "series truncation reached the family capacity ({} terms) and fail_on_cap is set",
                max_terms(order)
            )));
        }
        let report = EigenReport {
            eigenvalues: res.eigenvalues.iter().map(|&l| pair(l)).collect(),
            residuals: res.residuals.clone(),
            truncations: res
                .truncations
                .iter()
                .map(|t| TruncationReport {
                    terms: t.terms,
                    cap_reached: t.cap_reached,
                })
                .collect(),
            family_order: order,
        };
        let mut out = vec![json_artifact("eigenvalues.json", &report)?];
        if block.scan_csv {
            let mut csv = String::from("lambda,phi_re,phi_im,terms\n");
            for p in &res.scan {
                let _ = writeln!(csv, "{},{},{},{}", p.lambda, p.value.re, p.value.im, p.terms);
            }
            out.push(artifact("characteristic_scan.csv", csv));
        }
        Ok(out)
    }

    fn taylor(&mut self, inputs: &Inputs, block: &TaylorBlock) -> Result<Vec<Artifact>, Failure> {
        let n = block.n;
        let x0 = inputs.grid.x0();
        let jet_order = n.saturating_sub(1);
        let phi_jet = match &inputs.seed {
            SeedInput::Stock(stock) => stock.phi_jet(x0, jet_order).map_err(numeric)?,
            _ => {
                let seed = self.seed_data(inputs)?;
                self.warn(format!(
                    "derivatives of φ = f² read off a least-squares fit of sampled data; rows beyond {} lose accuracy",
                    spps_core::gentaylor::SAFE_DEPTH
                ));
                let phi = seed.f.mul(&seed.f).map_err(numeric)?;
                fit_jet(&phi, phi.grid().x0_index(), jet_order, &FitOptions::default()).map_err(numeric)?
            }
        };
        let matrix = TransformMatrix64::recursive(&phi_jet, n).map_err(numeric)?;
        let (u1, u2) = matrix.solution_taylor_vectors();
        let poly_rows = |rows: &[spps_core::transform::LambdaPoly<f64>]| -> Vec<Vec<[f64; 2]>> {
            rows.iter()
                .map(|p| p.coeffs().iter().map(|&c| pair(c)).collect())
                .collect()
        };
        let at_lambda = block.lambda.map(|l| {
            let l = l.value();
            LambdaValues {
                lambda: pair(l),
                u1_over_f: u1.iter().map(|p| pair(p.eval(l))).collect(),
                u2_over_f: u2.iter().map(|p| pair(p.eval(l))).collect(),
            }
        });
        let report = TaylorReport {
            n,
            x0,
            u1_over_f: poly_rows(&u1),
            u2_over_f: poly_rows(&u2),
            at_lambda,
        };
        let mut csv = Vec::new();
        matrix.write_csv(&mut csv).map_err(numeric)?;
        Ok(vec![
            Artifact {
                name: "transform_matrix.csv".into(),
                contents: csv,
            },
            json_artifact("taylor.json", &report)?,
        ])
    }

    fn approx(&mut self, inputs: &Inputs, block: &ApproxBlock) -> Result<Vec<Artifact>, Failure> {
        let basis = match block.basis {
            BasisChoice::Even => Basis::Even,
            BasisChoice::Odd => Basis::Odd,
            BasisChoice::Full => Basis::Full,
        };
        let needed = *basis.orders(block.n_max).last().unwrap();
        let order = match self.config.family_order {
            Some(o) if o < needed => {
                return Err(config_err(anyhow!(
                    "n_max = {} needs family_order >= {needed}",
                    block.n_max
                )));
            }
            Some(o) => o,
            None => needed.max(1),
        };
        let target = self.sample(&block.target, &inputs.grid)?;
        let seed = self.seed_data(inputs)?;
        let fam = self.family(&seed, order)?;
        let mut csv = String::from("N,L2_error,max_error,condition_estimate\n");
        for count in block.n_min..=block.n_max {
            match least_squares_project(&target, &fam, count, basis) {
                Ok(p) => {
                    let _ = writeln!(csv, "{count},{},{},{}", p.l2_error, p.max_error, p.condition_estimate);
                }
                Err(e @ CoreError::RankCollapse { .. }) if count > block.n_min => {
                    self.warn(format!("stopped at N = {count}: {e}"));
                    break;
                }
                Err(e) => return Err(numeric(e)),
            }
        }
        Ok(vec![artifact("approx.csv", csv)])
    }
}

fn first_node<R: std::io::BufRead>(input: R) -> Result<f64, CoreError> {
    let line = input
        .lines()
        .nth(1)
        .ok_or_else(|| CoreError::Parse("CSV has no data rows".into()))?
        .map_err(|e| CoreError::Parse(e.to_string()))?;
    line.split(',')
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|e| CoreError::Parse(format!("line 2: {e}")))
}

fn pair(z: Cx<f64>) -> [f64; 2] {
    [z.re, z.im]
}

fn artifact(name: &str, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents: contents.into_bytes(),
    }
}

fn json_artifact<S: Serialize>(name: &str, value: &S) -> Result<Artifact, Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(numeric)?;
    text.push('\n');
    Ok(artifact(name, text))
}

fn table(name: &str, columns: &[GridFunction64]) -> String {
    let mut out = String::from("x");
    for k in 0..columns.len() {
        let _ = write!(out, ",{name}{k}_re,{name}{k}_im");
    }
    out.push('\n');
    let nodes = columns[0].grid().nodes();
    for (i, x) in nodes.iter().enumerate() {
        let _ = write!(out, "{x}");
        for c in columns {
            let v = c.values()[i];
            let _ = write!(out, ",{},{}", v.re, v.im);
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct BasisListing {
    a: f64,
    b: f64,
    n_nodes: usize,
    x0: f64,
    max_order: usize,
    files: Vec<String>,
    columns: String,
}

#[derive(Serialize)]
struct SolveReport {
    lambda: [f64; 2],
    terms: usize,
    cap_reached: bool,
    family_order: usize,
    residual_u1: f64,
    residual_u2: f64,
}

#[derive(Serialize)]
struct TruncationReport {
    terms: usize,
    cap_reached: bool,
}

#[derive(Serialize)]
struct EigenReport {
    eigenvalues: Vec<[f64; 2]>,
    residuals: Vec<f64>,
    truncations: Vec<TruncationReport>,
    family_order: usize,
}

#[derive(Serialize)]
struct LambdaValues {
    lambda: [f64; 2],
    u1_over_f: Vec<[f64; 2]>,
    u2_over_f: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct TaylorReport {
    n: usize,
    x0: f64,
    /// Row `k`: ascending λ-coefficients of `(u₁/f)^{(k)}(x0)`.
    u1_over_f: Vec<Vec<[f64; 2]>>,
    u2_over_f: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    at_lambda: Option<LambdaValues>,
}

/// Parse and validate a config document; every error here exits with 2.
pub fn load(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).context("config is not valid JSON for this schema")?;
    if let Err(msg) = cfg.validate() {
        bail!(msg);
    }
    Ok(cfg)
}
