//! Smoothing, two-grid and three-grid local Fourier analysis.
//!
//! Harmonic-space matrices are ordered harmonic-major: row `a * m + v` is variable
//! `v` of harmonic `a`, with harmonics in `HarmonicSet` order.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::discretization::{operator_symbol_with, PhaseConvention, ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::lattice::{harmonics_2h, harmonics_4h, sample_square, Frequency};
use crate::linalg::{block_diag, inverse_with_cond, mat_pow, nearly_singular, spectral_radius, CMat};
use crate::smoother::{BlockSpec, SmootherPlan};
use crate::stencil::MultiStencil;
use crate::transfer::TransferStencil;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseOperator {
    Rediscretized,
    /// `R A_h P`, used only to check the projection property.
    Galerkin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGridConfig {
    pub nu1: usize,
    pub nu2: usize,
    pub gamma: usize,
    pub coarse_op: CoarseOperator,
    pub freq_n: usize,
    pub singular_tol: f64,
}

impl Default for KGridConfig {
    fn default() -> Self {
        Self {
            nu1: 1,
            nu2: 0,
            gamma: 1,
            coarse_op: CoarseOperator::Rediscretized,
            freq_n: 33,
            singular_tol: 1e-10,
        }
    }
}

impl KGridConfig {
    pub fn cycle(nu1: usize, nu2: usize, gamma: usize) -> Self {
        Self {
            nu1,
            nu2,
            gamma,
            ..Self::default()
        }
    }

    pub fn with_freq_n(self, freq_n: usize) -> Self {
        Self { freq_n, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must be 1 or 2, got {}", self.gamma)));
        }
        if self.freq_n < 8 {
            return Err(Error::Config(format!("freq_n must be at least 8, got {}", self.freq_n)));
        }
        if !(self.singular_tol >= 0.0) {
            return Err(Error::Config("singular_tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FactorReport {
    pub mu: Option<f64>,
    pub rho2g: Option<f64>,
    pub rho3g: Option<f64>,
    pub argmax_theta: Option<Frequency>,
    pub skipped: usize,
    pub evaluated: usize,
}

/// Everything needed to evaluate symbols on one level.
struct Level {
    stencil: MultiStencil,
    plan: SmootherPlan,
}

impl Level {
    fn new(problem: &ProblemSpec, spec: &BlockSpec, h: f64) -> Result<Self> {
        let stencil = problem.with_h(h).stencil()?;
        let plan = SmootherPlan::new(&stencil, spec)?;
        Ok(Self { stencil, plan })
    }

    fn operator(&self, theta: Frequency) -> CMat {
        operator_symbol_with(&self.stencil, theta, PhaseConvention::Geometric)
    }
}

/// Outcome of evaluating one base frequency.
enum Sample {
    Value(f64),
    Skipped,
}

/// Sup over samples with a deterministic tie-break on sample order.
fn reduce(samples: Vec<(Frequency, Result<Sample>)>) -> Result<(f64, Option<Frequency>, usize, usize)> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    let (mut skipped, mut evaluated) = (0, 0);
    for (theta, s) in samples {
        match s {
            Ok(Sample::Value(v)) => {
                evaluated += 1;
                if v > best {
                    best = v;
                    arg = Some(theta);
                }
            }
            Ok(Sample::Skipped) | Err(Error::FrequencySingular { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if evaluated == 0 {
        return Err(Error::AllFrequenciesSkipped {
            skipped,
            total: skipped,
        });
    }
    Ok((best, arg, skipped, evaluated))
}

fn sweep<F>(half_width: f64, freq_n: usize, eval: F) -> Result<(f64, Option<Frequency>, usize, usize)>
where
    F: Fn(Frequency) -> Result<Sample> + Sync,
{
    let samples: Vec<(Frequency, Result<Sample>)> = sample_square(half_width, freq_n)
        .into_par_iter()
        .map(|t| (t, eval(t)))
        .collect();
    reduce(samples)
}

fn check_problem(problem: &ProblemSpec, spec: &BlockSpec) -> Result<()> {
    problem.validate()?;
    spec.validate()?;
    let expected = match spec.schur_var {
        Some(_) => ProblemKind::Stokes,
        None => ProblemKind::CurlCurl,
    };
    if problem.kind != expected {
        return Err(Error::ProblemKind {
            expected: expected.name(),
            got: problem.kind.name(),
        });
    }
    Ok(())
}

/// The lines `theta_1 = -pi/2` and `theta_2 = -pi/2`, which belong to the high
/// frequencies but are never reached by the half-cell offset samples.
fn high_boundary(freq_n: usize) -> Vec<Frequency> {
    let n = 2 * freq_n;
    let step = 2.0 * PI / n as f64;
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        let t = -PI + (j as f64 + 0.5) * step;
        out.push(Frequency { theta1: t, theta2: -PI / 2.0 });
        out.push(Frequency { theta1: -PI / 2.0, theta2: t });
    }
    out
}

/// `sup rho(S~(theta))` over high frequencies, returned as `mu^nu` with
/// `nu = nu1 + nu2`.
///
/// High frequencies are the non-zero harmonics of the sampled low frequencies, so
/// they cover `(-pi, pi]^2 \ (-pi/2, pi/2]^2` uniformly. The boundary lines of that
/// set are sampled separately.
pub fn smoothing_factor(problem: &ProblemSpec, spec: &BlockSpec, config: &KGridConfig) -> Result<FactorReport> {
    check_problem(problem, spec)?;
    config.validate()?;
    let level = Level::new(problem, spec, problem.h)?;
    let radius = |t: Frequency| -> Result<f64> { spectral_radius(&level.plan.symbol(t)?) };
    let interior = sweep(PI / 2.0, config.freq_n, |t00| {
        let hs = harmonics_2h(t00)?;
        let mut best: f64 = 0.0;
        for &t in &hs.members[1..] {
            best = best.max(radius(t)?);
        }
        Ok(Sample::Value(best))
    })?;
    let edge: Vec<(Frequency, Result<Sample>)> = high_boundary(config.freq_n)
        .into_par_iter()
        .map(|t| (t, radius(t).map(Sample::Value)))
        .collect();
    let edge = reduce(edge)?;
    let (mu, arg) = if edge.0 > interior.0 {
        (edge.0, edge.1)
    } else {
        (interior.0, interior.1)
    };
    let (skipped, evaluated) = (interior.2 + edge.2, interior.3 + edge.3);
    let nu = (config.nu1 + config.nu2) as i32;
    Ok(FactorReport {
        mu: Some(mu.powi(nu)),
        argmax_theta: arg,
        skipped,
        evaluated,
        ..Default::default()
    })
}

/// Symbols of the two-grid pieces on one harmonic group.
struct TwoGridBlocks {
    a: CMat,
    s: CMat,
    p: CMat,
}

fn two_grid_blocks(level: &Level, transfer: &TransferStencil, fine: &[Frequency], base: Frequency) -> Result<TwoGridBlocks> {
    let mut a = Vec::with_capacity(fine.len());
    let mut s = Vec::with_capacity(fine.len());
    for &f in fine {
        a.push(level.operator(f));
        s.push(level.plan.symbol(f)?);
    }
    Ok(TwoGridBlocks {
        a: block_diag(&a),
        s: block_diag(&s),
        p: transfer.stacked(fine, base),
    })
}

/// `I - P A_c^-1 R A`, or `None` if the coarse symbol is nearly singular.
fn coarse_correction(blocks: &TwoGridBlocks, coarse: &CMat, tol: f64, galerkin: bool) -> Option<CMat> {
    let r = blocks.p.adjoint().scale(4.0);
    let ac = if galerkin {
        &r * &blocks.a * &blocks.p
    } else {
        coarse.clone()
    };
    if nearly_singular(&ac, tol) {
        return None;
    }
    let (inv, _) = inverse_with_cond(&ac)?;
    let n = blocks.a.nrows();
    Some(CMat::identity(n, n) - &blocks.p * inv * r * &blocks.a)
}

fn smooth_sandwich(s: &CMat, k: &CMat, nu1: usize, nu2: usize) -> CMat {
    mat_pow(s, nu2) * k * mat_pow(s, nu1)
}

/// Two-grid error propagation symbol at one base frequency, or `None` when the
/// coarse symbol is skipped as singular.
pub fn two_grid_symbol(
    problem: &ProblemSpec,
    spec: &BlockSpec,
    config: &KGridConfig,
    theta00: Frequency,
) -> Result<Option<CMat>> {
    let fine = Level::new(problem, spec, problem.h)?;
    let coarse = problem.with_h(2.0 * problem.h).stencil()?;
    let transfer = TransferStencil::for_problem(problem.kind);
    two_grid_at(&fine, &coarse, &transfer, config, theta00)
}

fn two_grid_at(
    fine: &Level,
    coarse: &MultiStencil,
    transfer: &TransferStencil,
    config: &KGridConfig,
    theta00: Frequency,
) -> Result<Option<CMat>> {
    let hs = harmonics_2h(theta00)?;
    let blocks = two_grid_blocks(fine, transfer, &hs.members, theta00)?;
    let psi = Frequency {
        theta1: 2.0 * theta00.theta1,
        theta2: 2.0 * theta00.theta2,
    };
    let ac = operator_symbol_with(coarse, psi, PhaseConvention::Geometric);
    let galerkin = config.coarse_op == CoarseOperator::Galerkin;
    Ok(coarse_correction(&blocks, &ac, config.singular_tol, galerkin)
        .map(|k| smooth_sandwich(&blocks.s, &k, config.nu1, config.nu2)))
}

pub fn two_grid_factor(problem: &ProblemSpec, spec: &BlockSpec, config: &KGridConfig) -> Result<FactorReport> {
    check_problem(problem, spec)?;
    config.validate()?;
    let fine = Level::new(problem, spec, problem.h)?;
    let coarse = problem.with_h(2.0 * problem.h).stencil()?;
    let transfer = TransferStencil::for_problem(problem.kind);
    let (rho, arg, skipped, evaluated) = sweep(PI / 2.0, config.freq_n, |t00| {
        match two_grid_at(&fine, &coarse, &transfer, config, t00)? {
            Some(m) => Ok(Sample::Value(spectral_radius(&m)?)),
            None => Ok(Sample::Skipped),
        }
    })?;
    Ok(FactorReport {
        rho2g: Some(rho),
        argmax_theta: arg,
        skipped,
        evaluated,
        ..Default::default()
    })
}

/// How the 2h-level coarse solve is represented in the three-grid symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSolve {
    /// `gamma` two-grid cycles on the 2h/4h pair.
    Cycles,
    /// Exact solve on the 2h level.
    Exact,
}

struct ThreeGridLevels {
    fine: Level,
    mid: Level,
    coarsest: MultiStencil,
    transfer: TransferStencil,
}

impl ThreeGridLevels {
    fn new(problem: &ProblemSpec, spec: &BlockSpec) -> Result<Self> {
        Ok(Self {
            fine: Level::new(problem, spec, problem.h)?,
            mid: Level::new(problem, spec, 2.0 * problem.h)?,
            coarsest: problem.with_h(4.0 * problem.h).stencil()?,
            transfer: TransferStencil::for_problem(problem.kind),
        })
    }
}

fn doubled(t: Frequency) -> Frequency {
    Frequency {
        theta1: 2.0 * t.theta1,
        theta2: 2.0 * t.theta2,
    }
}

fn three_grid_at(
    lv: &ThreeGridLevels,
    config: &KGridConfig,
    inner: InnerSolve,
    theta00: Frequency,
) -> Result<Option<CMat>> {
    let hs = harmonics_4h(theta00)?;
    let m = lv.fine.stencil.m;
    let bases = hs.coarse_bases();

    // Fine level: four groups of four harmonics, each coupled to one 2h frequency.
    let mut a_blocks = Vec::with_capacity(4);
    let mut s_blocks = Vec::with_capacity(4);
    let mut p_blocks = Vec::with_capacity(4);
    for (g, &b) in bases.iter().enumerate() {
        let blk = two_grid_blocks(&lv.fine, &lv.transfer, &hs.members[4 * g..4 * g + 4], b)?;
        a_blocks.push(blk.a);
        s_blocks.push(blk.s);
        p_blocks.push(blk.p);
    }
    let a_h = block_diag(&a_blocks);
    let s_h = block_diag(&s_blocks);
    let p_h = block_diag(&p_blocks);
    let r_h = p_h.adjoint().scale(4.0);

    // 2h level at psi_g = 2 theta00_g, coupled to 4h through base 2 theta00.
    let psi: Vec<Frequency> = bases.iter().map(|&b| doubled(b)).collect();
    let mid = two_grid_blocks(&lv.mid, &lv.transfer, &psi, doubled(theta00))?;
    for g in 0..4 {
        let blk = mid.a.view((g * m, g * m), (m, m)).into_owned();
        if nearly_singular(&blk, config.singular_tol) {
            return Ok(None);
        }
    }
    let Some((a2_inv, _)) = inverse_with_cond(&mid.a) else {
        return Ok(None);
    };
    let n2 = 4 * m;
    let approx_inv = match inner {
        InnerSolve::Exact => a2_inv,
        InnerSolve::Cycles => {
            let a4 = operator_symbol_with(&lv.coarsest, doubled(doubled(theta00)), PhaseConvention::Geometric);
            let Some(k2) = coarse_correction(&mid, &a4, config.singular_tol, false) else {
                return Ok(None);
            };
            let m2 = smooth_sandwich(&mid.s, &k2, config.nu1, config.nu2);
            (CMat::identity(n2, n2) - mat_pow(&m2, config.gamma)) * a2_inv
        }
    };
    let n = 16 * m;
    let k = CMat::identity(n, n) - &p_h * approx_inv * r_h * &a_h;
    Ok(Some(smooth_sandwich(&s_h, &k, config.nu1, config.nu2)))
}

/// Three-grid error propagation symbol at one base frequency in `(-pi/4, pi/4]^2`.
pub fn three_grid_symbol(
    problem: &ProblemSpec,
    spec: &BlockSpec,
    config: &KGridConfig,
    inner: InnerSolve,
    theta00: Frequency,
) -> Result<Option<CMat>> {
    let lv = ThreeGridLevels::new(problem, spec)?;
    three_grid_at(&lv, config, inner, theta00)
}

pub fn three_grid_factor(problem: &ProblemSpec, spec: &BlockSpec, config: &KGridConfig) -> Result<FactorReport> {
    check_problem(problem, spec)?;
    config.validate()?;
    let lv = ThreeGridLevels::new(problem, spec)?;
    let (rho, arg, skipped, evaluated) = sweep(PI / 4.0, config.freq_n, |t00| {
        match three_grid_at(&lv, config, InnerSolve::Cycles, t00)? {
            Some(m) => Ok(Sample::Value(spectral_radius(&m)?)),
            None => Ok(Sample::Skipped),
        }
    })?;
    Ok(FactorReport {
        rho3g: Some(rho),
        argmax_theta: arg,
        skipped,
        evaluated,
        ..Default::default()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Rho2g,
    Rho3g,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaGrid {
    pub omega_u: Vec<f64>,
    pub omega_p: Vec<f64>,
}

impl OmegaGrid {
    /// `lo, lo + step, ...` up to and including `hi` (within rounding).
    pub fn range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        if !(step > 0.0) || hi < lo {
            return vec![];
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaResult {
    pub omega_u: f64,
    pub omega_p: f64,
    pub rho: f64,
    /// Every evaluated point as `(omega_u, omega_p, rho)` in grid order.
    pub table: Vec<(f64, f64, f64)>,
}

/// Relaxation parameters per variable: Stokes `(u, u, p)`, curl-curl uses `omega_u`
/// for every subgrid.
pub fn omega_vector(kind: ProblemKind, omega_u: f64, omega_p: f64) -> Vec<f64> {
    match kind {
        ProblemKind::Stokes => vec![omega_u, omega_u, omega_p],
        ProblemKind::CurlCurl => vec![omega_u; 3],
    }
}

/// Exhaustive search over the grid; ties go to the smallest `omega_u`, then the
/// smallest `omega_p`.
pub fn optimize_omega(
    problem: &ProblemSpec,
    spec: &BlockSpec,
    config: &KGridConfig,
    grid: &OmegaGrid,
    objective: Objective,
) -> Result<OmegaResult> {
    let omega_p: Vec<f64> = match problem.kind {
        ProblemKind::Stokes => grid.omega_p.clone(),
        ProblemKind::CurlCurl => vec![1.0],
    };
    if grid.omega_u.is_empty() || omega_p.is_empty() {
        return Err(Error::Config("empty relaxation-parameter grid".into()));
    }
    let mut table = Vec::new();
    for &wu in &grid.omega_u {
        for &wp in &omega_p {
            let s = spec.clone().with_omega(omega_vector(problem.kind, wu, wp));
            let rho = match objective {
                Objective::Rho2g => two_grid_factor(problem, &s, config)?.rho2g,
                Objective::Rho3g => three_grid_factor(problem, &s, config)?.rho3g,
            }
            .expect("factor is set");
            table.push((wu, wp, rho));
        }
    }
    let mut best = table[0];
    for &t in &table[1..] {
        let better = t.2 < best.2
            || (t.2 == best.2 && (t.0 < best.0 || (t.0 == best.0 && t.1 < best.1)));
        if better {
            best = t;
        }
    }
    Ok(OmegaResult {
        omega_u: best.0,
        omega_p: best.1,
        rho: best.2,
        table,
    })
}
