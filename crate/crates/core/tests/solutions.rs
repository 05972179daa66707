use std::f64::consts::PI;

use spps_core::gentaylor::{gamma_seq, least_squares_project, remainder_check, Basis};
use spps_core::recint::FamilyOptions;
use spps_core::scalar::cx;
use spps_core::seeds::StockSeed;
use spps_core::spps::{choose_truncation, residual, SolutionKind, SppsSolution};
use spps_core::sturm::{build_seed, eigenfunction, find_eigenvalues, SlProblem};
use spps_core::{Grid64, GridFunction64, RecursiveFamily64};

fn exp_family(c: f64, nodes: usize, order: usize) -> RecursiveFamily64 {
    let grid = Grid64::uniform(0.0, 1.0, nodes).unwrap();
    let seed = StockSeed::Exp { rate: c };
    let options = FamilyOptions {
        seed_derivative: Some(seed.sample_derivative(&grid).unwrap()),
        ..Default::default()
    };
    RecursiveFamily64::build_with(&seed.sample(&grid).unwrap(), 0, order, options).unwrap()
}

#[test]
fn u1_matches_hyperbolic_solution_for_complex_lambda() {
    let c = 1.0;
    let fam = exp_family(c, 2001, 60);
    let lambda = spps_core::Cx::new(-4.0, 2.5);
    let u = SppsSolution::new(&fam, lambda, 30, SolutionKind::U1).unwrap();
    let kappa = (cx(c * c) + lambda).sqrt();
    for x in [0.0, 0.21, 0.5, 0.93, 1.0] {
        let exact =
            (cx(c) + kappa) / (kappa * 2.0) * (kappa * x).exp() + (kappa - c) / (kappa * 2.0) * (-kappa * x).exp();
        assert!((u.value(x).unwrap() - exact).norm() < 1e-9 * exact.norm());
    }
}

#[test]
fn wronskian_of_solution_pair_is_one() {
    let grid = Grid64::uniform(0.0, 1.5, 3001).unwrap();
    let q = GridFunction64::sample_real(&grid, |x| (3.0 * x).sin() - 1.0).unwrap();
    let fam = build_seed(&q).unwrap().family(0, 60).unwrap();
    for lambda in [-20.0, -1.0, 0.0, 3.5, 12.0] {
        let u1 = SppsSolution::new(&fam, cx(lambda), 30, SolutionKind::U1).unwrap();
        let u2 = SppsSolution::new(&fam, cx(lambda), 30, SolutionKind::U2).unwrap();
        for i in (0..grid.len()).step_by(50) {
            let (a, da) = u1.at_node(i);
            let (b, db) = u2.at_node(i);
            assert!((a * db - da * b - cx(1.0)).norm() < 1e-6, "λ={lambda} node {i}");
        }
        assert!(residual(cx(lambda), &u1.values(), &q).unwrap() < 1e-6);
    }
}

#[test]
fn truncation_grows_with_lambda() {
    let fam = exp_family(1.0, 1001, 80);
    let small = choose_truncation(&fam, cx(1.0), 1e-14).unwrap();
    let large = choose_truncation(&fam, cx(-200.0), 1e-14).unwrap();
    assert!(!small.cap_reached && !large.cap_reached);
    assert!(small.terms < large.terms);
}

#[test]
fn generalized_derivatives_of_solution_quotient() {
    let c = 0.6;
    let lambda: f64 = 3.0;
    let fam = exp_family(c, 2001, 60);
    let u1 = SppsSolution::new(&fam, cx(lambda), 30, SolutionKind::U1)
        .unwrap()
        .values();
    let h = u1.zip_with(fam.seed(), |u, f| u / f).unwrap();
    let seq = gamma_seq(&h, &fam, 4).unwrap();
    for (k, g) in seq.values.iter().enumerate() {
        let exact = if k % 2 == 0 { lambda.powi(k as i32 / 2) } else { 0.0 };
        let err = (g - cx(exact)).norm();
        if exact == 0.0 {
            assert!(err < 1e-4, "k={k}");
        } else {
            assert!(err < 1e-4 * exact, "k={k}");
        }
    }
}

#[test]
fn remainder_bound_for_solution_quotient() {
    let fam = exp_family(0.5, 2001, 40);
    for lambda in [2.0, -6.0] {
        let u1 = SppsSolution::new(&fam, cx(lambda), 20, SolutionKind::U1)
            .unwrap()
            .values();
        let h = u1.zip_with(fam.seed(), |u, f| u / f).unwrap();
        let xs: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        for n in [2, 3, 5] {
            let report = remainder_check(&h, &fam, n, &xs).unwrap();
            assert!(report.passed, "λ={lambda} n={n}: {:?}", report.violations);
        }
    }
}

#[test]
fn even_system_is_complete_on_half_line() {
    let grid = Grid64::uniform(0.0, 1.0, 2001).unwrap();
    let fam = RecursiveFamily64::build(&GridFunction64::constant(&grid, cx(1.0)), 0, 20).unwrap();
    let h = GridFunction64::sample_real(&grid, |x| x).unwrap();
    let mut last = f64::INFINITY;
    for n in 1..=7 {
        let p = least_squares_project(&h, &fam, n, Basis::Even).unwrap();
        assert!(p.l2_error < last, "N={n}");
        last = p.l2_error;
    }
    assert!(last < 0.02);
}

#[test]
fn dirichlet_with_constant_shift() {
    let grid = Grid64::uniform(0.0, 1.0, 5001).unwrap();
    let q = GridFunction64::constant(&grid, cx(-1.0));
    let fam = build_seed(&q).unwrap().family(0, 60).unwrap();
    let problem = SlProblem::dirichlet(q.clone());
    let res = find_eigenvalues(&problem, &fam, (-100.0, -2.0), 100, 1e-12).unwrap();
    let values: Vec<f64> = res.eigenvalues.iter().map(|l| l.re).collect();
    assert_eq!(values.len(), 3);
    for (l, n) in values.iter().zip([3.0f64, 2.0, 1.0]) {
        let exact = -1.0 - n * n * PI * PI;
        assert!(((l - exact) / exact).abs() < 1e-6);
    }
    for (l, t) in res.eigenvalues.iter().zip(&res.truncations) {
        let u = eigenfunction(&problem, &fam, *l, t.terms).unwrap();
        assert!(residual(*l, &u, &q).unwrap() < 1e-4);
    }
}

#[test]
fn eigenvalue_counts() {
    let grid = Grid64::uniform(0.0, 1.0, 2001).unwrap();
    let q = GridFunction64::constant(&grid, cx(0.0));
    let fam = build_seed(&q).unwrap().family(0, 100).unwrap();
    let problem = SlProblem::dirichlet(q);
    for k in 1..=5 {
        let edge = (k as f64 + 0.5).powi(2) * PI * PI;
        let res = find_eigenvalues(&problem, &fam, (-edge, 0.0), 40 * k, 1e-10).unwrap();
        assert_eq!(res.eigenvalues.len(), k, "K={k}: {:?}", res.warnings);
    }
}

#[test]
fn robin_conditions_match_transcendental_equation() {
    // u'' = -μ²u, u(0) = 0, u(1) + u'(1) = 0  ⇒  tan μ = -μ
    let grid = Grid64::uniform(0.0, 1.0, 2001).unwrap();
    let q = GridFunction64::constant(&grid, cx(0.0));
    let fam = build_seed(&q).unwrap().family(0, 60).unwrap();
    let problem = SlProblem::new(q, (cx(1.0), cx(0.0)), (cx(1.0), cx(1.0))).unwrap();
    let res = find_eigenvalues(&problem, &fam, (-30.0, -1.0), 60, 1e-12).unwrap();
    assert_eq!(res.eigenvalues.len(), 2);
    let mus: Vec<f64> = res.eigenvalues.iter().map(|l| (-l.re).sqrt()).collect();
    for mu in &mus {
        assert!((mu.tan() + mu).abs() < 1e-8);
    }
    assert!(mus[1] > 2.0 && mus[1] < 2.5 && mus[0] > 4.5 && mus[0] < 5.0);
}
