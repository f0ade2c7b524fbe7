use trilfa::discretization::ProblemSpec;
use trilfa::smoother::{BlockSpec, LocalSolver};
use trilfa_mg::cycle::{norm, CycleKind, CycleSpec, Multigrid};
use trilfa_mg::experiments::*;
use trilfa_mg::hierarchy::{build_hierarchy, Hierarchy};

fn diag(kind: CycleKind, nu1: usize, nu2: usize) -> CycleSpec {
    CycleSpec::new(kind, nu1, nu2, BlockSpec::stokes(LocalSolver::Diagonal))
}

fn nedelec(nu1: usize, nu2: usize) -> CycleSpec {
    CycleSpec::new(CycleKind::V, nu1, nu2, BlockSpec::nedelec_vertex())
}

#[test]
fn zero_is_a_fixed_point() {
    for (p, spec) in [
        (ProblemSpec::stokes(1.0), diag(CycleKind::W, 1, 1)),
        (ProblemSpec::curlcurl(1.0, 1.0), nedelec(1, 1)),
    ] {
        let h = build_hierarchy(&p, 4).unwrap();
        let mg = Multigrid::new(&h, spec).unwrap();
        let n = h.finest().disc.layout.len();
        let mut x = vec![0.0; n];
        mg.cycle(&mut x, &vec![0.0; n]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn two_level_w_equals_v() {
    for (p, smoother) in [
        (ProblemSpec::stokes(1.0), BlockSpec::stokes(LocalSolver::Full)),
        (ProblemSpec::curlcurl(1.0, 1.0), BlockSpec::nedelec_vertex()),
    ] {
        let h = Hierarchy::build(&p, 4, 3, false).unwrap();
        assert_eq!(h.levels.len(), 2);
        let n = h.finest().disc.layout.len();
        let b = random_vector(n, 8);
        let mut out = Vec::new();
        for kind in [CycleKind::V, CycleKind::W] {
            let mg = Multigrid::new(&h, CycleSpec::new(kind, 1, 1, smoother.clone())).unwrap();
            let mut x = random_vector(n, 9);
            mg.cycle(&mut x, &b).unwrap();
            out.push(x);
        }
        let diff = out[0].iter().zip(&out[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff:e}");
    }
}

#[test]
fn loose_tolerance_needs_no_cycles() {
    let r = cavity_benchmark(4, &diag(CycleKind::V, 1, 1), 1.0).unwrap();
    assert_eq!(r.iterations, 0);
    assert!(r.converged);
}

#[test]
fn curlcurl_energy_never_increases() {
    let h = build_hierarchy(&ProblemSpec::curlcurl(1.0, 1.0), 6).unwrap();
    let mg = Multigrid::new(&h, nedelec(1, 1)).unwrap();
    let op = &h.finest().disc.op;
    let n = op.nrows;
    let b = vec![0.0; n];
    let energy = |x: &[f64]| op.mul(x).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    for seed in 0..5 {
        let mut x = random_vector(n, seed);
        let mut prev = energy(&x);
        for _ in 0..8 {
            mg.cycle(&mut x, &b).unwrap();
            let e = energy(&x);
            assert!(e <= prev * (1.0 + 1e-12), "seed {seed}: {e:e} after {prev:e}");
            prev = e;
        }
    }
}

#[test]
fn one_v11_cycle_halves_the_residual() {
    let h = build_hierarchy(&ProblemSpec::stokes(1.0), 6).unwrap();
    let mg = Multigrid::new(&h, diag(CycleKind::V, 1, 1)).unwrap();
    let n = h.finest().disc.layout.len();
    let b = vec![0.0; n];
    let mut x = random_vector(n, DEFAULT_SEED);
    let r0 = mg.residual_norm(&x, &b);
    mg.cycle(&mut x, &b).unwrap();
    let r1 = mg.residual_norm(&x, &b);
    assert!(r1 <= 0.5 * r0, "{r1:e} vs {r0:e}");
}

#[test]
fn tighter_tolerance_needs_more_cycles() {
    let spec = nedelec(1, 1);
    let loose = kappa_robustness(&[6], &[1.0], &spec, 1e-5, DEFAULT_SEED).unwrap();
    let tight = kappa_robustness(&[6], &[1.0], &spec, 1e-10, DEFAULT_SEED).unwrap();
    assert!(loose[0].iterations < tight[0].iterations);
    assert!(!tight[0].diverged);
}

#[test]
fn more_smoothing_needs_no_more_cycles() {
    let one = kappa_robustness(&[6], &[1.0], &nedelec(1, 1), 1e-10, DEFAULT_SEED).unwrap();
    let two = kappa_robustness(&[6], &[1.0], &nedelec(2, 2), 1e-10, DEFAULT_SEED).unwrap();
    assert!(two[0].iterations <= one[0].iterations);
}

#[test]
fn asymptotic_report_is_consistent() {
    let h = build_hierarchy(&ProblemSpec::curlcurl(1.0, 1.0), 5).unwrap();
    let mg = Multigrid::new(&h, nedelec(1, 1)).unwrap();
    assert!(asymptotic_factor(&mg, BURN_IN + WINDOW - 1, 1).is_err());
    let r = asymptotic_factor(&mg, BURN_IN + WINDOW, 1).unwrap();
    assert!(!r.diverged && r.rho_h > 0.0 && r.rho_h < 0.5);
    let expected = (r.history[30] / r.history[20]).powf(0.1);
    if r.iterations == 30 {
        assert!((r.rho_h - expected).abs() < 1e-12);
    }
    let csv = r.to_csv();
    assert!(csv.starts_with("iter,resnorm\n"));
    assert_eq!(csv.lines().count(), r.history.len() + 1);
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["history"].as_array().unwrap().len(), r.history.len());
}

#[test]
fn residual_history_starts_at_the_initial_residual() {
    let h = build_hierarchy(&ProblemSpec::stokes(1.0), 4).unwrap();
    let mg = Multigrid::new(&h, diag(CycleKind::W, 2, 1)).unwrap();
    let b = h.finest().disc.rhs.clone();
    let mut x = random_vector(b.len(), 3);
    let r0 = norm(&mg.residual(mg.top(), &x, &b));
    let rep = solve_to_tolerance(&mg, &mut x, &b, 1e-6, 50).unwrap();
    assert_eq!(rep.history[0], r0);
    assert!(rep.converged && *rep.history.last().unwrap() <= 1e-6 * r0);
}

#[test]
fn depth_must_fit_the_hierarchy() {
    let h = build_hierarchy(&ProblemSpec::stokes(1.0), 4).unwrap();
    assert!(Multigrid::new(&h, diag(CycleKind::V, 1, 1).with_depth(4)).is_err());
    assert!(Multigrid::new(&h, diag(CycleKind::V, 1, 1).with_depth(1)).is_err());
    assert!(Multigrid::new(&h, diag(CycleKind::V, 1, 1).with_depth(2)).is_ok());
}

#[test]
fn two_level_emulation_matches_an_exact_two_grid() {
    // With depth 2 on a two-level hierarchy the inner solve is the direct solve.
    let h = build_hierarchy(&ProblemSpec::curlcurl(1.0, 1.0), 4).unwrap();
    let n = h.finest().disc.layout.len();
    let b = random_vector(n, 21);
    let deep = Multigrid::new(&h, nedelec(1, 1).with_depth(2)).unwrap();
    let mut x = random_vector(n, 22);
    deep.cycle(&mut x, &b).unwrap();
    let flat = Hierarchy::build(&ProblemSpec::curlcurl(1.0, 1.0), 4, 3, false).unwrap();
    let exact = Multigrid::new(&flat, nedelec(1, 1)).unwrap();
    let mut y = random_vector(n, 22);
    exact.cycle(&mut y, &b).unwrap();
    let diff = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-7 * norm(&y), "{diff:e}");
}
