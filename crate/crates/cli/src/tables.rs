//! Reference experiments, each measured and compared with reference values.

use std::collections::HashMap;

use trilfa::discretization::{ProblemKind, ProblemSpec};
use trilfa::lfa::{smoothing_factor, three_grid_factor, two_grid_factor, KGridConfig};
use trilfa::smoother::{BlockSpec, LocalSolver};
use trilfa_mg::cycle::{CycleKind, CycleSpec, Multigrid};
use trilfa_mg::experiments::{asymptotic_factor, cavity_benchmark, kappa_robustness, BURN_IN, WINDOW};
use trilfa_mg::hierarchy::{build_hierarchy, Hierarchy};

use crate::config::CURLCURL_LEVELS;
use crate::error::{usage, Result};
use crate::render::{Cell, Check, Table, Value};

pub const TABLE_IDS: [&str; 5] = ["T2", "T3", "T4", "T7", "T8"];

/// Levels for measured Stokes factors.
pub const STOKES_LEVELS: usize = 8;
/// Levels for measured Stokes V-cycle factors.
pub const V_CYCLE_LEVELS: usize = 9;
/// Finest level of the cavity and κ tables.
pub const BENCH_LEVELS: usize = 9;

/// Relaxation weights `(omega_u, omega_p)` used with each cycle in the cavity runs.
pub const OMEGA_V: (f64, f64) = (0.95, 0.6);
pub const OMEGA_W: (f64, f64) = (1.05, 0.6);
/// Smoothing split of the cavity runs.
pub const CAVITY_NU: (usize, usize) = (1, 2);

const KAPPAS: [f64; 4] = [1.0, 1e-2, 1e-4, 1e-8];

/// Cycles used for measured asymptotic factors.
pub const ASYMPTOTIC_ITERS: usize = BURN_IN + WINDOW;

/// What a table run may override.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub levels: Option<usize>,
    pub freq_n: usize,
    pub tol: f64,
    pub seed: u64,
    pub iters: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            levels: None,
            freq_n: 33,
            tol: 1e-10,
            seed: trilfa_mg::experiments::DEFAULT_SEED,
            iters: ASYMPTOTIC_ITERS,
        }
    }
}

pub fn build(id: &str, opts: &TableOptions) -> Result<Table> {
    match id {
        "T2" => table2(opts),
        "T3" => table3(opts),
        "T4" => table4(opts),
        "T7" => table7(opts),
        "T8" => table8(opts),
        other => usage(format!("unknown table '{other}', expected one of {}", TABLE_IDS.join(", "))),
    }
}

fn split_label(nu1: usize, nu2: usize) -> String {
    format!("({nu1},{nu2})")
}

fn measured(rep: &trilfa_mg::experiments::ConvergenceReport) -> Value {
    if rep.diverged {
        Value::Diverged
    } else {
        Value::Number(rep.rho_h)
    }
}

/// Hierarchies are reused across the cells of one table.
struct Runner {
    cache: HashMap<(ProblemKind, usize), Hierarchy>,
    iters: usize,
    seed: u64,
}

impl Runner {
    fn new(opts: &TableOptions) -> Self {
        Self {
            cache: HashMap::new(),
            iters: opts.iters,
            seed: opts.seed,
        }
    }

    fn rho_h(&mut self, problem: &ProblemSpec, levels: usize, spec: CycleSpec) -> Result<Value> {
        let key = (problem.kind, levels);
        if !self.cache.contains_key(&key) {
            self.cache.insert(key, build_hierarchy(problem, levels)?);
        }
        let mg = Multigrid::new(&self.cache[&key], spec)?;
        Ok(measured(&asymptotic_factor(&mg, self.iters, self.seed)?))
    }
}

fn stokes_spec(solver: LocalSolver) -> BlockSpec {
    BlockSpec::stokes(solver)
}

fn check_gap(cell: Cell, against: &str, other: &Value, tolerance: f64) -> Cell {
    match other.as_f64() {
        Some(r) => cell.near(against, r, tolerance),
        None => {
            let c = Check {
                against: against.into(),
                reference: other.clone(),
                tolerance,
                pass: false,
            };
            cell.with(c)
        }
    }
}

const T2_SPLITS: [(usize, usize); 5] = [(1, 0), (1, 1), (2, 1), (2, 2), (3, 2)];
/// `(mu^nu, rho_2g, rho_h)` for the full and the diagonal smoother.
const T2_REF: [[(f64, f64, f64); 2]; 5] = [
    [(0.51, 0.64, 0.63), (0.55, 0.69, 0.69)],
    [(0.26, 0.34, 0.34), (0.31, 0.31, 0.30)],
    [(0.14, 0.18, 0.17), (0.17, 0.19, 0.19)],
    [(0.07, 0.13, 0.12), (0.09, 0.15, 0.15)],
    [(0.04, 0.10, 0.10), (0.05, 0.13, 0.12)],
];

/// Stokes smoothing and two-grid factors with `omega = 1`, against two-level
/// W-cycles and full-hierarchy W-cycles.
fn table2(opts: &TableOptions) -> Result<Table> {
    let levels = opts.levels.unwrap_or(STOKES_LEVELS);
    let mut t = Table::new(
        "T2",
        "Stokes smoothing and two-grid factors",
        &[
            "full mu^nu",
            "full rho_2g",
            "full rho_h 2-level",
            "full rho_h W",
            "diag mu^nu",
            "diag rho_2g",
            "diag rho_h 2-level",
            "diag rho_h W",
        ],
    );
    t.notes.push(format!("omega = 1, freq_n = {}, measured at {levels} levels", opts.freq_n));
    let problem = ProblemSpec::stokes(1.0);
    let mut runner = Runner::new(opts);
    for (row, &(nu1, nu2)) in T2_SPLITS.iter().enumerate() {
        let cfg = KGridConfig::cycle(nu1, nu2, 2).with_freq_n(opts.freq_n);
        let mut cells = vec![];
        for (s, solver) in [LocalSolver::Full, LocalSolver::Diagonal].into_iter().enumerate() {
            let (mu_ref, rho_ref, _) = T2_REF[row][s];
            let spec = stokes_spec(solver);
            let mu = smoothing_factor(&problem, &spec, &cfg)?.mu.expect("mu");
            let rho = two_grid_factor(&problem, &spec, &cfg)?.rho2g.expect("rho2g");
            let two = runner.rho_h(
                &problem,
                levels,
                CycleSpec::new(CycleKind::W, nu1, nu2, spec.clone()).with_depth(2),
            )?;
            let full = runner.rho_h(&problem, levels, CycleSpec::new(CycleKind::W, nu1, nu2, spec))?;
            cells.push(Cell::number(mu).near("reference", mu_ref, 0.01));
            let rho_cell = Cell::number(rho).near("reference", rho_ref, 0.03);
            cells.push(check_gap(rho_cell, "2-level rho_h", &two, 0.02));
            cells.push(Cell::new(two));
            cells.push(check_gap(Cell::new(full), "rho_2g", &Value::Number(rho), 0.02));
        }
        t.push(format!("nu={} {}", nu1 + nu2, split_label(nu1, nu2)), cells);
    }
    Ok(t)
}

const T3_ROWS: [((usize, usize), f64, Option<f64>); 4] = [
    ((1, 0), 0.68, None),
    ((1, 1), 0.31, Some(0.31)),
    ((2, 1), 0.28, Some(0.28)),
    ((2, 2), 0.24, Some(0.23)),
];

/// Three-grid V-cycle factors of the diagonal smoother against V-cycles.
fn table3(opts: &TableOptions) -> Result<Table> {
    let levels = opts.levels.unwrap_or(V_CYCLE_LEVELS);
    let mut t = Table::new(
        "T3",
        "Stokes three-grid V-cycle, diagonal smoother",
        &["rho_3g", "rho_h V"],
    );
    t.notes.push(format!("omega = 1, freq_n = {}, measured at {levels} levels", opts.freq_n));
    let problem = ProblemSpec::stokes(1.0);
    let spec = stokes_spec(LocalSolver::Diagonal);
    let mut runner = Runner::new(opts);
    for ((nu1, nu2), rho_ref, rh_ref) in T3_ROWS {
        let cfg = KGridConfig::cycle(nu1, nu2, 1).with_freq_n(opts.freq_n);
        let rho = three_grid_factor(&problem, &spec, &cfg)?.rho3g.expect("rho3g");
        let v = runner.rho_h(&problem, levels, CycleSpec::new(CycleKind::V, nu1, nu2, spec.clone()))?;
        let rho_cell = Cell::number(rho).near("reference", rho_ref, 0.03);
        let (rho_cell, v_cell) = match rh_ref {
            None => (rho_cell, Cell::new(v.clone()).with(Check::diverges("reference", &v))),
            Some(r) => (
                check_gap(rho_cell, "rho_h V", &v, 0.02),
                Cell::new(v.clone()).with(Check::near("reference", &v, r, 0.03)),
            ),
        };
        t.push(split_label(nu1, nu2), vec![rho_cell, v_cell]);
    }
    Ok(t)
}

const T4_V: [usize; 7] = [10, 10, 11, 11, 12, 13, 14];
const T4_W: usize = 10;

/// Iterations to reduce the cavity residual by `tol`.
fn table4(opts: &TableOptions) -> Result<Table> {
    let top = opts.levels.unwrap_or(BENCH_LEVELS);
    if top < 4 {
        return usage("T4 needs at least 4 levels");
    }
    let levels: Vec<usize> = (4..=top).collect();
    let cols: Vec<String> = levels.iter().map(|l| format!("L{l}")).collect();
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("T4", "Lid-driven cavity, diagonal smoother", &col_refs);
    let (nu1, nu2) = CAVITY_NU;
    t.notes.push(format!(
        "nu = {}, tol = {:e}, W omega = {:?}, V omega = {:?}",
        split_label(nu1, nu2),
        opts.tol,
        OMEGA_W,
        OMEGA_V
    ));
    for (kind, (wu, wp)) in [(CycleKind::W, OMEGA_W), (CycleKind::V, OMEGA_V)] {
        let spec = CycleSpec::new(
            kind,
            nu1,
            nu2,
            stokes_spec(LocalSolver::Diagonal).with_omega(vec![wu, wu, wp]),
        );
        let mut cells = vec![];
        for &lv in &levels {
            let rep = cavity_benchmark(lv, &spec, opts.tol)?;
            let value = if rep.converged {
                Value::Count(rep.iterations)
            } else {
                Value::Diverged
            };
            let reference = match kind {
                CycleKind::W => T4_W,
                CycleKind::V => T4_V[lv - 4],
            };
            let check = if lv <= 10 {
                vec![Check::count("reference", &value, reference, 1)]
            } else {
                vec![]
            };
            cells.push(Cell { value, checks: check });
        }
        t.push(format!("{kind:?}"), cells);
    }
    Ok(t)
}

/// `(nu, splits, mu^nu, V rho_3g, V rho_h, W rho_3g, W rho_h)`.
type T7Ref = (usize, &'static [(usize, usize)], f64, f64, f64, f64, f64);
const T7_REF: [T7Ref; 3] = [
    (1, &[(1, 0), (0, 1)], 0.46, 0.34, 0.33, 0.33, 0.33),
    (2, &[(1, 1), (2, 0), (0, 2)], 0.21, 0.13, 0.13, 0.12, 0.12),
    (3, &[(2, 1), (1, 2), (3, 0), (0, 3)], 0.09, 0.07, 0.07, 0.07, 0.07),
];

/// Curl-curl three-grid factors of the vertex smoother against full-hierarchy
/// cycles.
fn table7(opts: &TableOptions) -> Result<Table> {
    let levels = opts.levels.unwrap_or(CURLCURL_LEVELS);
    let mut t = Table::new(
        "T7",
        "Curl-curl vertex smoother, three-grid factors",
        &["mu^nu", "V rho_3g", "V rho_h", "W rho_3g", "W rho_h"],
    );
    t.notes.push(format!(
        "omega = 1, kappa = 1, h = 2^-{levels}, freq_n = {}, measured at {levels} levels",
        opts.freq_n
    ));
    let h = 2f64.powi(-(levels as i32));
    let problem = ProblemSpec::curlcurl(h, 1.0);
    let solve_problem = ProblemSpec::curlcurl(1.0, 1.0);
    let spec = BlockSpec::nedelec_vertex();
    let mut runner = Runner::new(opts);
    for (nu, splits, mu_ref, v3_ref, vh_ref, w3_ref, wh_ref) in T7_REF {
        let mut first: Option<(f64, f64)> = None;
        for &(nu1, nu2) in splits {
            let mu = smoothing_factor(&problem, &spec, &KGridConfig::cycle(nu1, nu2, 1).with_freq_n(opts.freq_n))?
                .mu
                .expect("mu");
            let mut cells = vec![Cell::number(mu).near("reference", mu_ref, 0.01)];
            let mut rho3 = [0.0; 2];
            for (i, (kind, r3, rh)) in [(CycleKind::V, v3_ref, vh_ref), (CycleKind::W, w3_ref, wh_ref)]
                .into_iter()
                .enumerate()
            {
                let cfg = KGridConfig::cycle(nu1, nu2, kind.gamma()).with_freq_n(opts.freq_n);
                let rho = three_grid_factor(&problem, &spec, &cfg)?.rho3g.expect("rho3g");
                rho3[i] = rho;
                let m = runner.rho_h(&solve_problem, levels, CycleSpec::new(kind, nu1, nu2, spec.clone()))?;
                let mut rc = Cell::number(rho).near("reference", r3, 0.02);
                rc = check_gap(rc, &format!("{kind:?} rho_h"), &m, 0.02);
                if let Some(f) = first {
                    rc = rc.near(&format!("first nu={nu} row"), [f.0, f.1][i], 0.01);
                }
                cells.push(rc);
                cells.push(Cell::new(m.clone()).with(Check::near("reference", &m, rh, 0.02)));
            }
            first.get_or_insert((rho3[0], rho3[1]));
            t.push(format!("nu={nu} {}", split_label(nu1, nu2)), cells);
        }
    }
    Ok(t)
}

const T8_ITERATIONS: usize = 11;

/// V(1,1) iterations for the curl-curl problem across `kappa` and levels.
fn table8(opts: &TableOptions) -> Result<Table> {
    let top = opts.levels.unwrap_or(BENCH_LEVELS);
    if top < 6 {
        return usage("T8 needs at least 6 levels");
    }
    let levels: Vec<usize> = (6..=top).collect();
    let cols: Vec<String> = levels.iter().map(|l| format!("L{l}")).collect();
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("T8", "Curl-curl V(1,1) iterations across kappa", &col_refs);
    t.notes.push(format!("zero right-hand side, random start (seed {}), tol = {:e}", opts.seed, opts.tol));
    let spec = CycleSpec::new(CycleKind::V, 1, 1, BlockSpec::nedelec_vertex());
    for kappa in KAPPAS {
        let cells = kappa_robustness(&levels, &[kappa], &spec, opts.tol, opts.seed)?
            .into_iter()
            .map(|c| {
                let value = if c.diverged {
                    Value::Diverged
                } else {
                    Value::Count(c.iterations)
                };
                let check = Check::count("reference", &value, T8_ITERATIONS, 1);
                Cell { value, checks: vec![check] }
            })
            .collect();
        t.push(format!("kappa={kappa:e}"), cells);
    }
    Ok(t)
}
