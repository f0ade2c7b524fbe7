use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use trilfa::discretization::{golden_dir, golden_from_oracle};
use trilfa::lfa::{
    optimize_omega, smoothing_factor, three_grid_factor, two_grid_factor, FactorReport, Objective, OmegaGrid,
};
use trilfa_mg::cycle::{CycleSpec, Multigrid};
use trilfa_mg::experiments::asymptotic_factor;
use trilfa_mg::hierarchy::build_hierarchy;

use crate::config::{Format, Mode, Settings};
use crate::error::{usage, Result};
use crate::render::{Cell, Table, Value};
use crate::tables::{self, TableOptions, ASYMPTOTIC_ITERS};

/// Rendered output and whether every check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, ok: true }
    }
}

fn factor(s: &Settings) -> Result<(&'static str, FactorReport, f64)> {
    let problem = s.problem_spec();
    let spec = s.block_spec();
    let cfg = s.kgrid();
    Ok(match s.mode {
        Mode::Smooth => {
            let r = smoothing_factor(&problem, &spec, &cfg)?;
            ("mu^nu", r, r.mu.expect("mu"))
        }
        Mode::Twogrid => {
            let r = two_grid_factor(&problem, &spec, &cfg)?;
            ("rho_2g", r, r.rho2g.expect("rho2g"))
        }
        Mode::Threegrid => {
            let r = three_grid_factor(&problem, &spec, &cfg)?;
            ("rho_3g", r, r.rho3g.expect("rho3g"))
        }
    })
}

/// Asymptotic factor of the cycle matching the analysis: two- or three-level for
/// the corresponding modes.
fn measure(s: &Settings, levels: usize) -> Result<Value> {
    let depth = match s.mode {
        Mode::Twogrid => 2,
        Mode::Threegrid => 3,
        Mode::Smooth => return Ok(Value::Missing),
    };
    if levels < depth {
        return usage(format!("--levels {levels} is too few for a {depth}-level cycle"));
    }
    let problem = match s.problem {
        crate::config::Problem::Stokes => s.problem_spec(),
        crate::config::Problem::Curlcurl => trilfa::discretization::ProblemSpec::curlcurl(1.0, 1.0),
    };
    let h = build_hierarchy(&problem, levels)?;
    let spec = CycleSpec::new(s.cycle_kind(), s.nu1, s.nu2, s.block_spec()).with_depth(depth);
    let mg = Multigrid::new(&h, spec)?;
    let rep = asymptotic_factor(&mg, ASYMPTOTIC_ITERS, s.seed)?;
    Ok(if rep.diverged {
        Value::Diverged
    } else {
        Value::Number(rep.rho_h)
    })
}

pub fn analyze(s: &Settings) -> Result<Outcome> {
    let (name, report, value) = factor(s)?;
    let mut columns = vec![name, "theta_1", "theta_2", "skipped", "evaluated"];
    let theta = report.argmax_theta.expect("argmax");
    let mut cells = vec![
        Cell::number(value),
        Cell::number(theta.theta1),
        Cell::number(theta.theta2),
        Cell::new(Value::Count(report.skipped)),
        Cell::new(Value::Count(report.evaluated)),
    ];
    if let (Some(levels), true) = (s.levels, s.mode != Mode::Smooth) {
        columns.push("rho_h");
        cells.push(Cell::new(measure(s, levels)?));
    }
    let mut t = Table::new("analyze", "local Fourier analysis", &columns);
    t.notes.push(format!(
        "{:?} / {:?}, cycle {:?}, nu = ({},{}), omega = ({}, {}), freq_n = {}",
        s.problem, s.smoother, s.cycle, s.nu1, s.nu2, s.omega_u, s.omega_p, s.freq_n
    ));
    t.push(format!("{:?}", s.mode).to_lowercase(), cells);
    Ok(Outcome::ok(t.render(s.format)))
}

pub fn table(id: &str, s: &Settings) -> Result<Outcome> {
    let opts = TableOptions {
        levels: s.levels,
        freq_n: s.freq_n,
        tol: s.tol,
        seed: s.seed,
        ..TableOptions::default()
    };
    let t = tables::build(id, &opts)?;
    Ok(Outcome {
        text: t.render(s.format),
        ok: t.pass(),
    })
}

/// Default relaxation-parameter lattice.
pub fn default_grid() -> OmegaGrid {
    OmegaGrid {
        omega_u: OmegaGrid::range(0.5, 1.3, 0.05),
        omega_p: OmegaGrid::range(0.4, 1.0, 0.05),
    }
}

#[derive(Serialize)]
struct SweepPoint {
    omega_u: f64,
    omega_p: f64,
    rho: f64,
}

#[derive(Serialize)]
struct SweepJson {
    objective: &'static str,
    best: SweepPoint,
    points: Vec<SweepPoint>,
}

pub fn sweep_omega(s: &Settings) -> Result<Outcome> {
    let (objective, name) = match s.mode {
        Mode::Twogrid => (Objective::Rho2g, "rho_2g"),
        Mode::Threegrid => (Objective::Rho3g, "rho_3g"),
        Mode::Smooth => return usage("sweep-omega needs --mode twogrid or threegrid"),
    };
    let grid = if s.omega_given {
        OmegaGrid {
            omega_u: vec![s.omega_u],
            omega_p: vec![s.omega_p],
        }
    } else {
        default_grid()
    };
    let r = optimize_omega(&s.problem_spec(), &s.block_spec(), &s.kgrid(), &grid, objective)?;
    let point = |&(omega_u, omega_p, rho): &(f64, f64, f64)| SweepPoint { omega_u, omega_p, rho };
    let text = match s.format {
        Format::Csv => {
            let mut out = String::from("kind,omega_u,omega_p,rho\n");
            for (wu, wp, rho) in &r.table {
                writeln!(out, "point,{wu},{wp},{rho:e}").unwrap();
            }
            writeln!(out, "argmin,{},{},{:e}", r.omega_u, r.omega_p, r.rho).unwrap();
            out
        }
        Format::Json => {
            let json = SweepJson {
                objective: name,
                best: point(&(r.omega_u, r.omega_p, r.rho)),
                points: r.table.iter().map(point).collect(),
            };
            serde_json::to_string_pretty(&json).expect("sweep serializes") + "\n"
        }
        Format::Md => {
            let mut t = Table::new("sweep-omega", "relaxation parameter search", &["omega_u", "omega_p", name]);
            t.notes.push(format!(
                "{} points, nu = ({},{}), cycle {:?}, freq_n = {}",
                r.table.len(),
                s.nu1,
                s.nu2,
                s.cycle,
                s.freq_n
            ));
            t.push(
                "argmin",
                vec![Cell::number(r.omega_u), Cell::number(r.omega_p), Cell::number(r.rho)],
            );
            t.render(Format::Md)
        }
    };
    Ok(Outcome::ok(text))
}

/// Compares freshly derived golden stencils with the files in `dir` and rewrites
/// them when `force` is set. Fails on any difference without `force`.
pub fn regenerate_stencils(dir: &Path, force: bool) -> Result<Outcome> {
    let mut text = String::new();
    let mut clean = true;
    for (file, golden) in golden_from_oracle(6)? {
        let path = dir.join(file);
        let fresh = golden.to_text();
        let current = std::fs::read_to_string(&path).unwrap_or_default();
        let diffs = differing_lines(&current, &fresh);
        if diffs.is_empty() {
            writeln!(text, "{file}: no differences").unwrap();
            continue;
        }
        clean = false;
        writeln!(text, "{file}: {} differing entries", diffs.len()).unwrap();
        for d in diffs {
            writeln!(text, "  {d}").unwrap();
        }
        if force {
            std::fs::write(&path, &fresh)?;
            writeln!(text, "{file}: rewritten").unwrap();
        }
    }
    Ok(Outcome {
        text,
        ok: clean || force,
    })
}

fn differing_lines(old: &str, new: &str) -> Vec<String> {
    let (a, b): (Vec<&str>, Vec<&str>) = (old.lines().collect(), new.lines().collect());
    let mut out = vec![];
    for i in 0..a.len().max(b.len()) {
        let (x, y) = (a.get(i).copied(), b.get(i).copied());
        if x != y {
            out.push(format!(
                "line {}: expected `{}`, found `{}`",
                i + 1,
                y.unwrap_or("<none>"),
                x.unwrap_or("<none>")
            ));
        }
    }
    out
}

pub fn default_stencil_dir() -> std::path::PathBuf {
    golden_dir()
}
