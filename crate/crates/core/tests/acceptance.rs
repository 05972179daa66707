//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, SeedableRng};
use spps_core::gentaylor::{gamma_seq, least_squares_project, remainder_check, Basis};
use spps_core::recint::FamilyOptions;
use spps_core::scalar::cx;
use spps_core::seeds::StockSeed;
use spps_core::spps::{SolutionKind, SppsSolution};
use spps_core::sturm::{build_seed, find_eigenvalues, SlProblem};
use spps_core::{Cx, Grid64, GridFunction64, Jet64, RecursiveFamily64, TransformMatrix64};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn stock_family(seed: StockSeed<f64>, a: f64, b: f64, nodes: usize, x0: f64, order: usize) -> RecursiveFamily64 {
    let grid = Grid64::uniform_anchored(a, b, nodes, x0).unwrap();
    let options = FamilyOptions {
        seed_derivative: Some(seed.sample_derivative(&grid).unwrap()),
        ..Default::default()
    };
    RecursiveFamily64::build_with(&seed.sample(&grid).unwrap(), grid.x0_index(), order, options).unwrap()
}

fn max_entry_error<const N: usize>(m: &TransformMatrix64, expected: &[[f64; N]; N]) -> f64 {
    let mut worst = 0.0f64;
    for (k, row) in expected.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            worst = worst.max((m.entry(k, j) - cx(e)).norm());
        }
    }
    worst
}

fn golden_a5() -> Outcome {
    let start = Instant::now();
    let c = 1.0f64;
    let expected = [
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, -2.0 * c, 1.0, 0.0, 0.0, 0.0],
        [0.0, 4.0 * c * c, -2.0 * c, 1.0, 0.0, 0.0],
        [0.0, -8.0 * c.powi(3), 4.0 * c * c, -4.0 * c, 1.0, 0.0],
        [0.0, 16.0 * c.powi(4), -8.0 * c.powi(3), 12.0 * c * c, -4.0 * c, 1.0],
    ];
    let phi = StockSeed::Exp { rate: c }.phi_jet(0.0, 4).map_err(|e| e.to_string())?;
    let m = TransformMatrix64::recursive(&phi, 5).map_err(|e| e.to_string())?;
    let err = max_entry_error(&m, &expected);
    let t = start.elapsed();
    check(
        err < 1e-12 && within(t, 1.0),
        format!("max entry error {err:.1e}, {t:.2?}"),
    )
}

fn golden_a4() -> Outcome {
    let start = Instant::now();
    let a = 1.0f64;
    let e = (-2.0 * a).exp();
    let a2 = a * a;
    // published entries evaluated at a = 1
    let expected = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, e / a2, 0.0, 0.0, 0.0],
        [0.0, 2.0 * (a - 1.0) * e / a2, 1.0, 0.0, 0.0],
        [
            0.0,
            e * (4.0 + 6.0 / a2 * (1.0 - 2.0 * a)),
            2.0 * (a - 1.0),
            e / a2,
            0.0,
        ],
        [
            0.0,
            e * (24.0 - 16.0 * a - 24.0 * (1.0 - a) / a2),
            8.0 - 16.0 * a + 4.0 * a2,
            4.0 * (a - 1.0) / a2 * e,
            1.0,
        ],
    ];
    let phi = StockSeed::PowerExp { a }.phi_jet(1.0, 3).map_err(|e| e.to_string())?;
    let m = TransformMatrix64::recursive(&phi, 4).map_err(|e| e.to_string())?;
    let err = max_entry_error(&m, &expected);
    let t = start.elapsed();
    check(
        err < 1e-12 && within(t, 1.0),
        format!("max entry error {err:.1e}, {t:.2?}"),
    )
}

fn derivative_vector() -> Outcome {
    let c = 1.0f64;
    let phi = StockSeed::Exp { rate: c }.phi_jet(0.0, 4).map_err(|e| e.to_string())?;
    let (u1, _) = TransformMatrix64::recursive(&phi, 5)
        .map_err(|e| e.to_string())?
        .solution_taylor_vectors();
    // λ-coefficients of (1, 0, λ, -2cλ, 4c²λ + λ², -8c³λ - 4cλ²)
    let expected: [[f64; 3]; 6] = [
        [1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -2.0 * c, 0.0],
        [0.0, 4.0 * c * c, 1.0],
        [0.0, -8.0 * c.powi(3), -4.0 * c],
    ];
    let mut worst = 0.0f64;
    let mut degree_ok = true;
    for (poly, row) in u1.iter().zip(expected) {
        degree_ok &= poly.degree().is_none_or(|d| d <= 2);
        for (p, want) in row.iter().enumerate() {
            worst = worst.max((poly.coeff(p) - cx(*want)).norm());
        }
    }
    check(worst < 1e-12 && degree_ok, format!("max coefficient error {worst:.1e}"))
}

fn kappa_formula() -> Outcome {
    let start = Instant::now();
    let c = 1.0f64;
    let fam = stock_family(StockSeed::Exp { rate: c }, 0.0, 1.0, 5001, 0.0, 60);
    let mut worst = 0.0f64;
    for lambda in [0.5f64, 2.0, 10.0] {
        let u = SppsSolution::new(&fam, cx(lambda), 30, SolutionKind::U1).map_err(|e| e.to_string())?;
        let kappa = (c * c + lambda).sqrt();
        for i in 0..20 {
            let x = i as f64 / 19.0;
            let exact =
                (c + kappa) / (2.0 * kappa) * (kappa * x).exp() + (kappa - c) / (2.0 * kappa) * (-kappa * x).exp();
            let got = u.value(x).map_err(|e| e.to_string())?;
            worst = worst.max((got - cx(exact)).norm() / exact.abs());
        }
    }
    let t = start.elapsed();
    check(
        worst < 1e-7 && within(t, 5.0),
        format!("max relative error {worst:.1e}, {t:.2?}"),
    )
}

fn eigenvalues() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut counts = Vec::new();
    for (shift, range) in [(0.0f64, (-120.0, -1.0)), (1.0, (-100.0, -2.0))] {
        let grid = Grid64::uniform(0.0, 1.0, 5001).unwrap();
        let q = GridFunction64::constant(&grid, cx(-shift));
        let fam = build_seed(&q)
            .and_then(|s| s.family(0, 60))
            .map_err(|e| e.to_string())?;
        let res = find_eigenvalues(&SlProblem::dirichlet(q), &fam, range, 120, 1e-12).map_err(|e| e.to_string())?;
        counts.push(res.eigenvalues.len());
        if res.eigenvalues.len() != 3 {
            continue;
        }
        for (l, n) in res.eigenvalues.iter().zip([3.0f64, 2.0, 1.0]) {
            let exact = -shift - n * n * PI * PI;
            worst = worst.max(((l.re - exact) / exact).abs());
        }
    }
    let t = start.elapsed();
    check(
        counts == [3, 3] && worst < 1e-6 && within(t, 30.0),
        format!("found {counts:?} eigenvalues, max relative error {worst:.1e}, {t:.2?}"),
    )
}

fn builder_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(20_240_601);
    let mut worst = 0.0f64;
    let mut largest = 0.0f64;
    for _ in 0..50 {
        let mut coeffs: Vec<Cx<f64>> = (0..=8)
            .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        // |φ(x0)| ≥ 1 keeps the derivatives of 1/φ, and with them the entries, moderate
        coeffs[0] = Cx::new(rng.gen_range(1.0..2.0), rng.gen_range(-0.5..0.5));
        let phi = Jet64::new(rng.gen_range(-1.0..1.0), coeffs).unwrap();
        let rec = TransformMatrix64::recursive(&phi, 9).map_err(|e| e.to_string())?;
        let closed = TransformMatrix64::closed_form(&phi, 9).map_err(|e| e.to_string())?;
        worst = worst.max(rec.max_abs_diff(&closed));
        for k in 0..=9 {
            for m in 0..=k {
                largest = largest.max(rec.entry(k, m).norm());
            }
        }
    }
    let t = start.elapsed();
    check(
        worst < 1e-9 && within(t, 10.0),
        format!("max entry difference {worst:.1e} (largest entry {largest:.1e}), {t:.2?}"),
    )
}

fn duality() -> Result<f64, String> {
    let fam = stock_family(StockSeed::Exp { rate: 0.8 }, 0.0, 1.0, 2001, 0.0, 10);
    let mut worst = 0.0f64;
    for m in 0..=6 {
        let h = fam.psi_scaled(m).map_err(|e| e.to_string())?;
        let seq = gamma_seq(h, &fam, m).map_err(|e| e.to_string())?;
        for (k, g) in seq.values.iter().enumerate() {
            let expected = if k == m { 1.0 } else { 0.0 };
            worst = worst.max((g - cx(expected)).norm());
        }
    }
    Ok(worst)
}

fn remainder() -> Result<(bool, f64), String> {
    let fam = stock_family(StockSeed::Exp { rate: 0.5 }, 0.0, 1.0, 2001, 0.0, 40);
    let xs: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    let exp = GridFunction64::sample_real(fam.grid(), f64::exp).unwrap();
    let u1 = SppsSolution::new(&fam, cx(2.0), 20, SolutionKind::U1)
        .map_err(|e| e.to_string())?
        .values();
    let quotient = u1.zip_with(fam.seed(), |u, f| u / f).unwrap();
    let mut passed = true;
    let mut min_slack = f64::INFINITY;
    for h in [&exp, &quotient] {
        let report = remainder_check(h, &fam, 3, &xs).map_err(|e| e.to_string())?;
        passed &= report.passed && report.points.len() == 20;
        min_slack = min_slack.min(report.min_slack);
    }
    Ok((passed, min_slack))
}

fn wronskian() -> Result<f64, String> {
    let grid = Grid64::uniform(0.0, 1.0, 2001).unwrap();
    let q = GridFunction64::sample_real(&grid, |x| 2.0 * (4.0 * x).cos() - x).unwrap();
    let fam = build_seed(&q)
        .and_then(|s| s.family(0, 60))
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for lambda in [-40.0, -5.0, 0.0, 1.5, 25.0] {
        let u1 = SppsSolution::new(&fam, cx(lambda), 30, SolutionKind::U1).map_err(|e| e.to_string())?;
        let u2 = SppsSolution::new(&fam, cx(lambda), 30, SolutionKind::U2).map_err(|e| e.to_string())?;
        for i in 0..grid.len() {
            let (a, da) = u1.at_node(i);
            let (b, db) = u2.at_node(i);
            worst = worst.max((a * db - da * b - cx(1.0)).norm());
        }
    }
    Ok(worst)
}

fn completeness() -> Result<(bool, String), String> {
    let err = |e: spps_core::Error| e.to_string();
    // (0,1): even system {1, x², …} approximates x with decreasing error
    let grid = Grid64::uniform(0.0, 1.0, 2001).unwrap();
    let one = GridFunction64::constant(&grid, cx(1.0));
    let fam = RecursiveFamily64::build(&one, 0, 20).map_err(err)?;
    let h = GridFunction64::sample_real(&grid, |x| x).unwrap();
    let mut monotone = true;
    let mut last = f64::INFINITY;
    for n in 1..=7 {
        let p = least_squares_project(&h, &fam, n, Basis::Even).map_err(err)?;
        monotone &= p.l2_error <= last;
        last = p.l2_error;
    }
    // (-1,1) with x0 = 0: even functions miss x entirely, the union does not
    let grid = Grid64::uniform_anchored(-1.0, 1.0, 2001, 0.0).unwrap();
    let one = GridFunction64::constant(&grid, cx(1.0));
    let fam = RecursiveFamily64::build(&one, grid.x0_index(), 20).map_err(err)?;
    let h = GridFunction64::sample_real(&grid, |x| x).unwrap();
    let norm = (2.0f64 / 3.0).sqrt();
    let mut stall = 0.0f64;
    let mut union_last = f64::INFINITY;
    for n in 1..=6 {
        let even = least_squares_project(&h, &fam, n, Basis::Even).map_err(err)?;
        stall = stall.max((even.l2_error - norm).abs());
        let full = least_squares_project(&h, &fam, n, Basis::Full).map_err(err)?;
        monotone &= full.l2_error <= union_last * (1.0 + 1e-12) + 1e-15;
        union_last = full.l2_error;
    }
    let ok = monotone && stall < 1e-6 && union_last < 1e-6;
    Ok((
        ok,
        format!(
            "half-line even error {last:.1e}, symmetric even stall deviation {stall:.1e}, union error {union_last:.1e}"
        ),
    ))
}

fn quadrature_order() -> Result<(f64, f64), String> {
    let mut errors = Vec::new();
    for n in [11, 21, 41] {
        let grid = Grid64::uniform(0.0, 2.0, n).unwrap();
        let g = GridFunction64::sample_real(&grid, |x| (3.0 * x).cos() * (0.5 * x).exp()).unwrap();
        let integral = g.cumulative_integral().map_err(|e| e.to_string())?;
        // d/dx e^{x/2}(0.5cos3x + 3sin3x)/9.25 = e^{x/2}cos3x
        let exact = |x: f64| (0.5 * x).exp() * (0.5 * (3.0 * x).cos() + 3.0 * (3.0 * x).sin()) / 9.25 - 0.5 / 9.25;
        let worst = grid
            .nodes()
            .iter()
            .zip(integral.values())
            .map(|(&x, v)| (v.re - exact(x)).abs())
            .fold(0.0, f64::max);
        errors.push(worst);
    }
    Ok(((errors[0] / errors[1]).log2(), (errors[1] / errors[2]).log2()))
}

fn property_suite() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    let d = duality()?;
    ok &= d < 1e-4;
    parts.push(format!("(a) duality error {d:.1e}"));

    let (passed, slack) = remainder()?;
    ok &= passed;
    parts.push(format!(
        "(b) remainder bound {} (min slack {slack:.1e})",
        if passed { "holds" } else { "violated" }
    ));

    let w = wronskian()?;
    ok &= w < 1e-6;
    parts.push(format!("(c) Wronskian deviation {w:.1e}"));

    let (complete, detail) = completeness()?;
    ok &= complete;
    parts.push(format!("(d) {detail}"));

    let (p1, p2) = quadrature_order()?;
    ok &= p1 >= 4.0 && p2 >= 4.0;
    parts.push(format!("(e) observed quadrature orders {p1:.2}, {p2:.2}"));

    check(ok, parts.join("; "))
}

fn completeness_substitution() -> Outcome {
    Ok(
        "the L² and max-norm completeness theorems are not finite computations; \
        they are represented by the decay and stall checks of criterion 7(d)"
            .to_string(),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 golden A5, exponential seed", golden_a5),
        ("2 golden A4, a·x·e^(a/x) seed", golden_a4),
        ("3 Taylor vector of u1/f", derivative_vector),
        ("4 SPPS u1 against closed form", kappa_formula),
        ("5 Dirichlet eigenvalues", eigenvalues),
        ("6 recursive vs closed-form builders", builder_equivalence),
        ("7 property suite", property_suite),
        ("8 completeness theorems", completeness_substitution),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
