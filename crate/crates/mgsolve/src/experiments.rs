//! Convergence measurements and benchmark problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use trilfa::discretization::ProblemSpec;

use crate::cycle::{CycleSpec, Multigrid};
use crate::error::{MgError, Result};
use crate::hierarchy::{project_pressure, Hierarchy, DEFAULT_COARSEST};

pub const DEFAULT_SEED: u64 = 42;
pub const BURN_IN: usize = 20;
pub const WINDOW: usize = 10;
pub const MAX_ITERATIONS: usize = 200;
/// A single residual ratio above this marks the run as divergent.
pub const DIVERGENCE_RATIO: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rho_h: f64,
    pub diverged: bool,
    /// Cycles performed; for tolerance runs, cycles needed to reach it.
    pub iterations: usize,
    pub converged: bool,
    /// Residual norms, starting with the initial one.
    pub history: Vec<f64>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,resnorm\n");
        for (i, r) in self.history.iter().enumerate() {
            s.push_str(&format!("{i},{r:e}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Uniform in `[-1, 1]` per entry.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

fn ratios(history: &[f64]) -> impl Iterator<Item = f64> + '_ {
    history.windows(2).map(|w| w[1] / w[0])
}

/// Zero right-hand side and a random initial guess; `rho_h` is the geometric mean
/// of the last `WINDOW` residual ratios after `BURN_IN` cycles.
pub fn asymptotic_factor(mg: &Multigrid, iters: usize, seed: u64) -> Result<ConvergenceReport> {
    if iters < BURN_IN + WINDOW {
        return Err(MgError::Cycle(format!("need at least {} iterations", BURN_IN + WINDOW)));
    }
    let layout = &mg.hierarchy.finest().disc.layout;
    let b = vec![0.0; layout.len()];
    let mut x = random_vector(layout.len(), seed);
    project_pressure(layout, &mut x);
    let mut history = vec![mg.residual_norm(&x, &b)];
    for _ in 0..iters {
        mg.cycle(&mut x, &b)?;
        let r = mg.residual_norm(&x, &b);
        history.push(r);
        if !r.is_finite() || r == 0.0 {
            break;
        }
    }
    let done = history.len() - 1;
    let overflow = history.iter().any(|r| !r.is_finite());
    let rho_h = if overflow {
        f64::INFINITY
    } else if done < iters {
        0.0
    } else {
        (history[done] / history[done - WINDOW]).powf(1.0 / WINDOW as f64)
    };
    let diverged = overflow || rho_h >= 1.0 || ratios(&history).any(|q| q > DIVERGENCE_RATIO);
    Ok(ConvergenceReport {
        rho_h,
        diverged,
        iterations: done,
        converged: !diverged,
        history,
    })
}

/// Cycles until the residual norm drops by `tol` relative to the initial one.
pub fn solve_to_tolerance(mg: &Multigrid, x: &mut [f64], b: &[f64], tol: f64, max_iter: usize) -> Result<ConvergenceReport> {
    let r0 = mg.residual_norm(x, b);
    let mut history = vec![r0];
    let mut converged = r0 == 0.0 || tol >= 1.0;
    while !converged && history.len() <= max_iter {
        mg.cycle(x, b)?;
        let r = mg.residual_norm(x, b);
        history.push(r);
        if !r.is_finite() {
            break;
        }
        converged = r <= tol * r0;
    }
    let iterations = history.len() - 1;
    let n = iterations.min(WINDOW);
    let rho_h = if n == 0 {
        0.0
    } else {
        (history[iterations] / history[iterations - n]).powf(1.0 / n as f64)
    };
    Ok(ConvergenceReport {
        rho_h,
        diverged: !converged,
        iterations,
        converged,
        history,
    })
}

/// Lid-driven flow in the triangle from a zero initial guess.
pub fn cavity_benchmark(levels: usize, spec: &CycleSpec, tol: f64) -> Result<ConvergenceReport> {
    let h = Hierarchy::build(&ProblemSpec::stokes(1.0), levels, DEFAULT_COARSEST, true)?;
    let mg = Multigrid::new(&h, spec.clone())?;
    let b = h.finest().disc.rhs.clone();
    let mut x = vec![0.0; b.len()];
    let rep = solve_to_tolerance(&mg, &mut x, &b, tol, MAX_ITERATIONS)?;
    project_pressure(&h.finest().disc.layout, &mut x);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaCell {
    pub kappa: f64,
    pub levels: usize,
    pub iterations: usize,
    pub diverged: bool,
}

/// Curl-curl runs with zero right-hand side and a random initial guess, counting
/// cycles to a residual reduction of `tol`.
pub fn kappa_robustness(levels: &[usize], kappas: &[f64], spec: &CycleSpec, tol: f64, seed: u64) -> Result<Vec<KappaCell>> {
    let mut out = Vec::new();
    for &kappa in kappas {
        for &lv in levels {
            let h = Hierarchy::build(&ProblemSpec::curlcurl(1.0, kappa), lv, DEFAULT_COARSEST, false)?;
            let mg = Multigrid::new(&h, spec.clone())?;
            let n = h.finest().disc.layout.len();
            let b = vec![0.0; n];
            let mut x = random_vector(n, seed);
            let rep = solve_to_tolerance(&mg, &mut x, &b, tol, MAX_ITERATIONS)?;
            out.push(KappaCell {
                kappa,
                levels: lv,
                iterations: rep.iterations,
                diverged: rep.diverged,
            });
        }
    }
    Ok(out)
}

