//! One PASS/FAIL line per acceptance criterion. Runs the full reference
//! experiments, so it takes a while on a single core.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use trilfa::discretization::ProblemSpec;
use trilfa::lfa::{optimize_omega, smoothing_factor, KGridConfig, Objective, OmegaGrid};
use trilfa::smoother::{update_count, update_schedule, BlockSpec, LocalSolver};
use trilfa_cli::render::{Table, Value};
use trilfa_cli::tables::{self, TableOptions};

/// `(updates before, variable, k, l, in block)` for the Stokes block.
const STOKES_SCHEDULE: [(usize, usize, i32, i32, bool); 37] = [
    (0, 2, 0, 0, true), (0, 0, 1, 1, true), (0, 1, 1, 1, true), (0, 0, 0, 2, false), (0, 1, 0, 2, false),
    (0, 0, 1, 2, false), (0, 1, 1, 2, false), (0, 0, 2, 1, false), (0, 1, 2, 1, false), (0, 0, 2, 2, false),
    (0, 1, 2, 2, false), (1, 0, 0, 1, true), (1, 1, 0, 1, true), (2, 0, -1, 1, false), (2, 1, -1, 1, false),
    (2, 0, 1, 0, true), (2, 1, 1, 0, true), (2, 0, 2, 0, false), (2, 1, 2, 0, false), (3, 0, -1, 0, true),
    (3, 1, -1, 0, true), (4, 0, 0, -1, true), (4, 1, 0, -1, true), (4, 0, 1, -1, false), (4, 1, 1, -1, false),
    (4, 0, -2, 0, false), (4, 1, -2, 0, false), (5, 0, -1, -1, true), (5, 1, -1, -1, true), (6, 0, 0, -2, false),
    (6, 1, 0, -2, false), (6, 0, -1, -2, false), (6, 1, -1, -2, false), (6, 0, -2, -2, false),
    (6, 1, -2, -2, false), (6, 0, -2, -1, false), (6, 1, -2, -1, false),
];

const EDGE_SCHEDULE: [(usize, usize, i32, i32, bool); 12] = [
    (0, 0, 0, 0, true), (0, 0, 0, 1, false), (0, 1, 0, 0, true), (0, 1, 1, 0, false), (0, 2, 0, 0, true),
    (1, 0, -1, 0, true), (1, 1, 0, -1, true), (1, 2, -1, 0, false), (1, 2, -1, -1, true), (1, 2, 0, -1, false),
    (2, 0, -1, -1, false), (2, 1, -1, -1, false),
];

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, n: usize, pass: bool, detail: String) {
        println!("criterion {n}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((n, pass, detail));
    }
}

fn minutes(d: Duration) -> String {
    format!("{:.1} min", d.as_secs_f64() / 60.0)
}

fn schedules() -> (bool, String) {
    let mut bad = vec![];
    for (spec, st, table) in [
        (BlockSpec::stokes(LocalSolver::Full), ProblemSpec::stokes(1.0), &STOKES_SCHEDULE[..]),
        (BlockSpec::nedelec_vertex(), ProblemSpec::curlcurl(1.0, 1.0), &EDGE_SCHEDULE[..]),
    ] {
        let sched = update_schedule(&st.stencil().unwrap(), &spec);
        for &(count, var, k, l, member) in table {
            let ok = update_count(&spec, var, (k, l)) == (count, member)
                && (member || sched.external.get(&(var, (k, l))) == Some(&count));
            if !ok {
                bad.push(format!("{} ({var},{k},{l})", spec.name));
            }
        }
    }
    let n = STOKES_SCHEDULE.len() + EDGE_SCHEDULE.len();
    (bad.is_empty(), format!("{} of {n} schedule entries match {bad:?}", n - bad.len()))
}

fn smoothing() -> (bool, String) {
    let cfg = KGridConfig::cycle(1, 0, 1).with_freq_n(33);
    let cases = [
        ("full", ProblemSpec::stokes(1.0), BlockSpec::stokes(LocalSolver::Full), 0.51),
        ("diag", ProblemSpec::stokes(1.0), BlockSpec::stokes(LocalSolver::Diagonal), 0.55),
        ("curl-curl", ProblemSpec::curlcurl(2f64.powi(-9), 1.0), BlockSpec::nedelec_vertex(), 0.46),
    ];
    let mut pass = true;
    let mut parts = vec![];
    for (name, p, s, expected) in cases {
        let mu = smoothing_factor(&p, &s, &cfg).unwrap().mu.unwrap();
        pass &= (mu - expected).abs() <= 0.01;
        parts.push(format!("{name} mu = {mu:.4} (want {expected} ±0.01)"));
    }
    (pass, parts.join(", "))
}

fn number(t: &Table, row: usize, col: usize) -> Value {
    t.rows[row].cells[col].value.clone()
}

fn column_passes(t: &Table, cols: &[usize]) -> bool {
    t.rows.iter().all(|r| cols.iter().all(|&c| r.cells[c].pass()))
}

fn two_grid() -> (bool, String) {
    let start = Instant::now();
    let t = tables::build("T2", &TableOptions { levels: Some(8), ..Default::default() }).unwrap();
    let took = start.elapsed();
    // rho_2g cells carry the reference and the two-level checks.
    let pass = column_passes(&t, &[1, 5]) && took <= Duration::from_secs(600);
    let fails: Vec<String> = t.failures().into_iter().filter(|f| f.contains("rho_2g:")).collect();
    (pass, format!("10 rho_2g cells vs reference ±0.03 and 2-level W rho_h at 8 levels ±0.02, {}; failures {fails:?}", minutes(took)))
}

fn three_grid_stokes() -> (bool, String) {
    let t = tables::build("T3", &TableOptions { levels: Some(9), ..Default::default() }).unwrap();
    let first = number(&t, 0, 1);
    let pass = column_passes(&t, &[0]) && first == Value::Diverged;
    let rows: Vec<String> = t
        .rows
        .iter()
        .map(|r| format!("{} {} / {}", r.label, r.cells[0].value.short(), r.cells[1].value.short()))
        .collect();
    (pass, format!("rho_3g / measured V at 9 levels: {}", rows.join(", ")))
}

fn within_step(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() <= 0.05 + 1e-9 && (a.1 - b.1).abs() <= 0.05 + 1e-9
}

fn omega_search() -> (bool, String) {
    let grid = OmegaGrid {
        omega_u: OmegaGrid::range(0.5, 1.3, 0.05),
        omega_p: OmegaGrid::range(0.4, 1.0, 0.05),
    };
    let p = ProblemSpec::stokes(1.0);
    let s = BlockSpec::stokes(LocalSolver::Diagonal);
    let two = optimize_omega(&p, &s, &KGridConfig::cycle(2, 1, 2).with_freq_n(16), &grid, Objective::Rho2g).unwrap();
    let three = optimize_omega(&p, &s, &KGridConfig::cycle(2, 1, 1).with_freq_n(16), &grid, Objective::Rho3g).unwrap();
    let ok2 = within_step((two.omega_u, two.omega_p), (1.05, 0.6)) && two.rho <= 0.10;
    let ok3 = within_step((three.omega_u, three.omega_p), (0.95, 0.6)) && three.rho <= 0.11;
    (
        ok2 && ok3,
        format!(
            "two-grid argmin ({:.2}, {:.2}) rho {:.4}; three-grid V argmin ({:.2}, {:.2}) rho {:.4}",
            two.omega_u, two.omega_p, two.rho, three.omega_u, three.omega_p, three.rho
        ),
    )
}

fn row_summary(t: &Table) -> String {
    t.rows
        .iter()
        .map(|r| format!("{} [{}]", r.label, r.cells.iter().map(|c| c.value.short()).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join(", ")
}

fn cavity() -> (bool, String) {
    let start = Instant::now();
    let t = tables::build("T4", &TableOptions { levels: Some(10), ..Default::default() }).unwrap();
    let took = start.elapsed();
    (t.pass() && took <= Duration::from_secs(1200), format!("levels 4-10 {}, {}", row_summary(&t), minutes(took)))
}

fn curlcurl() -> (bool, String) {
    let t = tables::build("T7", &TableOptions { levels: Some(9), ..Default::default() }).unwrap();
    // rho_3g cells carry the reference, measured and same-nu checks.
    let pass = column_passes(&t, &[1, 3]);
    let fails: Vec<String> = t.failures().into_iter().filter(|f| f.contains("rho_3g:")).collect();
    (pass, format!("18 rho_3g cells, measured at 9 levels; failures {fails:?}"))
}

fn kappa() -> (bool, String) {
    let t = tables::build("T8", &TableOptions { levels: Some(9), ..Default::default() }).unwrap();
    (t.pass(), format!("V(1,1) iterations at levels 6-9: {}", row_summary(&t)))
}

/// Runs the property tests from their own target directory and times the run.
fn property_suite() -> (bool, String) {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let target = root.join("target/acceptance-properties");
    let args = [
        "test", "--profile", "test", "-p", "trilfa", "--test", "properties", "--test", "stencils", "--test", "lfa",
        "--test", "schedule",
    ];
    let cargo = || {
        let mut c = Command::new(env!("CARGO"));
        c.current_dir(&root).env("CARGO_TARGET_DIR", &target);
        c
    };
    let built = cargo().args(args).arg("--no-run").output().unwrap();
    if !built.status.success() {
        return (false, format!("build failed: {}", String::from_utf8_lossy(&built.stderr)));
    }
    let smoother = cargo().args(["test", "--profile", "test", "-p", "trilfa-mg", "--test", "smoother", "--no-run"]).output().unwrap();
    if !smoother.status.success() {
        return (false, "smoother tests failed to build".into());
    }
    let start = Instant::now();
    let core = cargo().args(args).output().unwrap();
    let mg = cargo().args(["test", "--profile", "test", "-p", "trilfa-mg", "--test", "smoother"]).output().unwrap();
    let took = start.elapsed();
    let count = |o: &std::process::Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter_map(|l| l.strip_prefix("test result: ok. "))
            .filter_map(|l| l.split(' ').next()?.parse::<usize>().ok())
            .sum::<usize>()
    };
    let ok = core.status.success() && mg.status.success();
    (
        ok && took < Duration::from_secs(60),
        format!("{} property tests passed in {:.1} s", count(&core) + count(&mg), took.as_secs_f64()),
    )
}

fn main() -> ExitCode {
    let mut report = Report { lines: vec![] };
    let runs: [(usize, fn() -> (bool, String)); 9] = [
        (1, schedules),
        (2, smoothing),
        (3, two_grid),
        (4, three_grid_stokes),
        (5, omega_search),
        (6, cavity),
        (7, curlcurl),
        (8, kappa),
        (9, property_suite),
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    for (n, f) in runs {
        if only.is_empty() || only.contains(&n) {
            let (pass, detail) = f();
            report.record(n, pass, detail);
        }
    }
    let failed: Vec<usize> = report.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!("acceptance: {} of {} criteria pass", report.lines.len() - failed.len(), report.lines.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
