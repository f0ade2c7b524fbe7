use std::f64::consts::PI;

use proptest::prelude::*;
use trilfa::discretization::*;
use trilfa::lattice::*;
use trilfa::lfa::*;
use trilfa::linalg::{spectral_radius, CMat};
use trilfa::smoother::*;
use trilfa::transfer::TransferStencil;

fn low(w: f64) -> impl Strategy<Value = Frequency> {
    let r = -w + 1e-3..w - 1e-3;
    (r.clone(), r).prop_map(|(a, b)| Frequency::new(a, b).unwrap())
}

fn stokes_diag() -> BlockSpec {
    BlockSpec::stokes(LocalSolver::Diagonal)
}

fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn galerkin_correction_is_a_projection(t in low(PI / 2.0)) {
        for (problem, spec) in [
            (ProblemSpec::stokes(1.0), stokes_diag()),
            (ProblemSpec::curlcurl(1.0, 1.0), BlockSpec::nedelec_vertex()),
        ] {
            let mut config = KGridConfig::cycle(0, 0, 1);
            config.coarse_op = CoarseOperator::Galerkin;
            if let Some(m) = two_grid_symbol(&problem, &spec, &config, t).unwrap() {
                let scale = 1.0 + max_abs(&m);
                prop_assert!(max_abs(&(&m * &m - &m)) < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn exact_inner_solve_reduces_to_two_grid(t in low(PI / 4.0)) {
        let problem = ProblemSpec::stokes(1.0);
        let spec = stokes_diag();
        let config = KGridConfig::cycle(1, 1, 1);
        let m = three_grid_symbol(&problem, &spec, &config, InnerSolve::Exact, t).unwrap().unwrap();
        let hs = harmonics_4h(t).unwrap();
        let n = 4 * spec.m;
        for (g, base) in hs.coarse_bases().into_iter().enumerate() {
            let two = two_grid_symbol(&problem, &spec, &config, base).unwrap().unwrap();
            let blk = m.view((g * n, g * n), (n, n)).into_owned();
            prop_assert!(max_abs(&(blk - &two)) < 1e-9 * (1.0 + max_abs(&two)));
            for g2 in (0..4).filter(|&x| x != g) {
                prop_assert!(max_abs(&m.view((g * n, g2 * n), (n, n)).into_owned()) < 1e-9);
            }
        }
    }

    #[test]
    fn edge_interpolation_commutes_with_gradient(t in low(PI / 2.0)) {
        let edge = TransferStencil::whitney();
        let node = TransferStencil::nodal(1);
        let gc = gradient_symbol(t.scaled(2.0));
        let coarse = CMat::from_iterator(3, 1, gc);
        for f in harmonics_2h(t).unwrap().members {
            let lhs = edge.symbol(f, t) * &coarse;
            let pn = node.symbol(f, t)[(0, 0)];
            let gf = gradient_symbol(f);
            for i in 0..3 {
                prop_assert!((lhs[(i, 0)] - gf[i] * pn).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn no_smoothing_gives_unit_factor() {
    let c = KGridConfig::cycle(0, 0, 1).with_freq_n(8);
    let r = smoothing_factor(&ProblemSpec::stokes(1.0), &stokes_diag(), &c).unwrap();
    assert_eq!(r.mu, Some(1.0));
}

#[test]
fn unit_relaxation_changes_nothing() {
    let c = KGridConfig::cycle(1, 1, 1).with_freq_n(12);
    let p = ProblemSpec::stokes(1.0);
    let a = two_grid_factor(&p, &stokes_diag(), &c).unwrap();
    let b = two_grid_factor(&p, &stokes_diag().with_omega(vec![1.0; 3]), &c).unwrap();
    assert_eq!(a.rho2g, b.rho2g);
}

#[test]
fn single_point_grid_returns_that_point() {
    let c = KGridConfig::cycle(1, 0, 1).with_freq_n(12);
    let p = ProblemSpec::stokes(1.0);
    let grid = OmegaGrid {
        omega_u: vec![1.0],
        omega_p: vec![1.0],
    };
    let r = optimize_omega(&p, &stokes_diag(), &c, &grid, Objective::Rho2g).unwrap();
    let plain = two_grid_factor(&p, &stokes_diag(), &c).unwrap().rho2g.unwrap();
    assert_eq!((r.omega_u, r.omega_p, r.rho), (1.0, 1.0, plain));
    assert_eq!(r.table.len(), 1);
}

#[test]
fn empty_grid_is_rejected() {
    let c = KGridConfig::cycle(1, 0, 1).with_freq_n(8);
    let grid = OmegaGrid {
        omega_u: vec![],
        omega_p: vec![1.0],
    };
    assert!(optimize_omega(&ProblemSpec::stokes(1.0), &stokes_diag(), &c, &grid, Objective::Rho2g).is_err());
}

#[test]
fn grid_ranges_include_both_ends() {
    let r = OmegaGrid::range(0.5, 1.3, 0.05);
    assert_eq!(r.len(), 17);
    assert!((r[16] - 1.3).abs() < 1e-12);
}

#[test]
fn w_cycle_no_worse_than_v_for_curlcurl() {
    let p = ProblemSpec::curlcurl(2f64.powi(-9), 1.0);
    let s = BlockSpec::nedelec_vertex();
    let v = three_grid_factor(&p, &s, &KGridConfig::cycle(1, 0, 1).with_freq_n(16)).unwrap();
    let w = three_grid_factor(&p, &s, &KGridConfig::cycle(1, 0, 2).with_freq_n(16)).unwrap();
    assert!(w.rho3g.unwrap() <= v.rho3g.unwrap() + 0.01);
}

#[test]
fn more_smoothing_does_not_hurt() {
    let p = ProblemSpec::stokes(1.0);
    for solver in [LocalSolver::Full, LocalSolver::Diagonal] {
        let s = BlockSpec::stokes(solver);
        let mut prev = f64::INFINITY;
        for nu in 1..=4 {
            let c = KGridConfig::cycle(nu, 0, 1).with_freq_n(16);
            let rho = two_grid_factor(&p, &s, &c).unwrap().rho2g.unwrap();
            assert!(rho <= prev + 0.01, "{solver:?} nu={nu}: {rho} after {prev}");
            prev = rho;
        }
    }
}

#[test]
fn mismatched_smoother_is_rejected() {
    let c = KGridConfig::default();
    assert!(two_grid_factor(&ProblemSpec::curlcurl(1.0, 1.0), &stokes_diag(), &c).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let p = ProblemSpec::stokes(1.0);
    assert!(three_grid_factor(&p, &stokes_diag(), &KGridConfig::cycle(1, 1, 3)).is_err());
    assert!(two_grid_factor(&p, &stokes_diag(), &KGridConfig::cycle(1, 1, 1).with_freq_n(4)).is_err());
}

#[test]
fn factors_converge_under_refined_sampling() {
    let p = ProblemSpec::stokes(1.0);
    let s = stokes_diag();
    let at = |n| {
        let c = KGridConfig::cycle(1, 0, 1).with_freq_n(n);
        (
            smoothing_factor(&p, &s, &c).unwrap().mu.unwrap(),
            two_grid_factor(&p, &s, &c).unwrap().rho2g.unwrap(),
        )
    };
    let (a, b) = (at(32), at(64));
    assert!((a.0 - b.0).abs() < 0.005 && (a.1 - b.1).abs() < 0.005, "{a:?} vs {b:?}");
}

#[test]
fn reports_count_every_sample() {
    let c = KGridConfig::cycle(1, 0, 1).with_freq_n(10);
    let r = two_grid_factor(&ProblemSpec::stokes(1.0), &stokes_diag(), &c).unwrap();
    assert_eq!(r.evaluated + r.skipped, 100);
    assert!(r.argmax_theta.is_some());
    let m = two_grid_symbol(&ProblemSpec::stokes(1.0), &stokes_diag(), &c, r.argmax_theta.unwrap())
        .unwrap()
        .unwrap();
    assert!((spectral_radius(&m).unwrap() - r.rho2g.unwrap()).abs() < 1e-12);
}
