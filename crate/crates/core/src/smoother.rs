//! Fourier symbols of overlapping multiplicative block smoothers.
//!
//! One block is attached to every vertex. Blocks are visited with `l` as the outer
//! index and `k` as the inner index, both ascending. Because blocks overlap, an
//! unknown of variable `r` is corrected `s(r)` times per sweep; its Fourier
//! coefficient after `n` corrections is written `alpha_r^(n)`. Expressing every
//! block solve in these coefficients yields `P alpha = Q alpha^(0)`, and the
//! smoother symbol is the block of `P^-1 Q` giving the final coefficients.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::discretization::PhaseConvention;
use crate::error::{Error, Result};
use crate::lattice::{Frequency, Location};
use crate::linalg::{inverse_with_cond, CMat};
use crate::stencil::MultiStencil;

pub type Offset = (i32, i32);

/// The six lattice neighbours of a vertex in block order.
pub const NEIGHBOURS: [Offset; 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Member {
    pub var: usize,
    pub offset: Offset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalSolver {
    Full,
    /// Keeps only the diagonal of the couplings among non-Schur members and
    /// eliminates the single Schur member in closed form.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub m: usize,
    pub members: Vec<Member>,
    pub solver: LocalSolver,
    pub omega: Vec<f64>,
    /// Variable whose unique member is eliminated by the diagonal solver.
    pub schur_var: Option<usize>,
}

/// True when the block anchored at `c` is processed before the block at the origin.
pub fn precedes(c: Offset) -> bool {
    c.1 < 0 || (c.1 == 0 && c.0 < 0)
}

impl BlockSpec {
    /// Full or diagonal Vanka block for Stokes: `u, v` at the six neighbours and
    /// `p` at the anchor.
    pub fn stokes(solver: LocalSolver) -> Self {
        let mut members = Vec::with_capacity(13);
        for var in 0..2 {
            members.extend(NEIGHBOURS.iter().map(|&offset| Member { var, offset }));
        }
        members.push(Member {
            var: 2,
            offset: (0, 0),
        });
        let name = match solver {
            LocalSolver::Full => "stokes-full",
            LocalSolver::Diagonal => "stokes-diag",
        };
        Self {
            name: name.into(),
            m: 3,
            members,
            solver,
            omega: vec![1.0; 3],
            schur_var: Some(2),
        }
    }

    /// The six edges meeting at a vertex.
    pub fn nedelec_vertex() -> Self {
        let members = [
            (0, (0, 0)),
            (0, (-1, 0)),
            (1, (0, 0)),
            (1, (0, -1)),
            (2, (0, 0)),
            (2, (-1, -1)),
        ]
        .into_iter()
        .map(|(var, offset)| Member { var, offset })
        .collect();
        Self {
            name: "nedelec-vertex".into(),
            m: 3,
            members,
            solver: LocalSolver::Full,
            omega: vec![1.0; 3],
            schur_var: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "stokes-full" | "full" => Ok(Self::stokes(LocalSolver::Full)),
            "stokes-diag" | "diag" => Ok(Self::stokes(LocalSolver::Diagonal)),
            "nedelec-vertex" | "vertex" => Ok(Self::nedelec_vertex()),
            other => Err(Error::InvalidBlock(format!("unknown smoother preset '{other}'"))),
        }
    }

    pub fn with_omega(mut self, omega: Vec<f64>) -> Self {
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::InvalidBlock("block has no members".into()));
        }
        if self.omega.len() != self.m {
            return Err(Error::InvalidBlock(format!(
                "{} relaxation parameters for {} variables",
                self.omega.len(),
                self.m
            )));
        }
        if self.omega.iter().any(|w| !(w.is_finite() && *w != 0.0)) {
            return Err(Error::InvalidBlock("relaxation parameters must be finite and non-zero".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for mem in &self.members {
            if mem.var >= self.m {
                return Err(Error::InvalidBlock(format!("variable {} out of range", mem.var)));
            }
            if !seen.insert(*mem) {
                return Err(Error::InvalidBlock(format!("duplicate member {mem:?}")));
            }
        }
        if self.solver == LocalSolver::Diagonal {
            let Some(sv) = self.schur_var else {
                return Err(Error::InvalidBlock("diagonal solver needs a Schur variable".into()));
            };
            if self.members.iter().filter(|m| m.var == sv).count() != 1 {
                return Err(Error::InvalidBlock(
                    "diagonal solver needs exactly one Schur member".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, var: usize, offset: Offset) -> bool {
        self.members.iter().any(|m| m.var == var && m.offset == offset)
    }
}

/// Number of corrections each variable receives per sweep.
pub fn updates_per_sweep(spec: &BlockSpec) -> Vec<usize> {
    let mut s = vec![0; spec.m];
    for mem in &spec.members {
        s[mem.var] += 1;
    }
    s
}

/// Corrections already applied to unknown `(var, offset)` when the block at the
/// origin is processed, and whether that block corrects it.
pub fn update_count(spec: &BlockSpec, var: usize, offset: Offset) -> (usize, bool) {
    let n = spec
        .members
        .iter()
        .filter(|m| m.var == var)
        .filter(|m| precedes((offset.0 - m.offset.0, offset.1 - m.offset.1)))
        .count();
    (n, spec.contains(var, offset))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateSchedule {
    pub s: Vec<usize>,
    /// Stage of each member, aligned with `BlockSpec::members`.
    pub stage: Vec<usize>,
    /// Prior-update counts of non-member unknowns seen by member equations.
    pub external: BTreeMap<(usize, Offset), usize>,
}

pub fn update_schedule(st: &MultiStencil, spec: &BlockSpec) -> UpdateSchedule {
    let s = updates_per_sweep(spec);
    let stage = spec
        .members
        .iter()
        .map(|m| update_count(spec, m.var, m.offset).0)
        .collect();
    let mut external = BTreeMap::new();
    for mem in &spec.members {
        for (r, kk, ll, _) in st.row(mem.var) {
            let pos = (mem.offset.0 + kk, mem.offset.1 + ll);
            let (n, inside) = update_count(spec, r, pos);
            if !inside {
                external.insert((r, pos), n);
            }
        }
    }
    UpdateSchedule { s, stage, external }
}

/// Local block matrix `A^B`, entry `(a, b)` coupling member `a`'s equation to
/// member `b`'s unknown. The diagonal variant drops couplings among distinct
/// non-Schur members.
pub fn build_local_matrix(st: &MultiStencil, spec: &BlockSpec) -> DMatrix<f64> {
    let q = spec.members.len();
    DMatrix::from_fn(q, q, |a, b| {
        let (ma, mb) = (spec.members[a], spec.members[b]);
        if spec.solver == LocalSolver::Diagonal
            && a != b
            && Some(ma.var) != spec.schur_var
            && Some(mb.var) != spec.schur_var
        {
            return 0.0;
        }
        st.get(
            ma.var,
            mb.var,
            mb.offset.0 - ma.offset.0,
            mb.offset.1 - ma.offset.1,
        )
    })
}

/// Position of the coefficient `alpha_var^(n)` among the unknowns of `P`.
///
/// States are labelled `n + smax - s(var)` so every variable's final state carries
/// label `smax`; unknowns are ordered by label, then variable. The last `m`
/// unknowns are therefore the final states in variable order.
#[derive(Debug, Clone)]
pub struct SlotLayout {
    pub s: Vec<usize>,
    slots: BTreeMap<(usize, usize), usize>,
}

impl SlotLayout {
    pub fn new(s: &[usize]) -> Self {
        let smax = s.iter().copied().max().unwrap_or(0);
        let mut keys: Vec<(usize, usize, usize)> = Vec::new();
        for (var, &sv) in s.iter().enumerate() {
            for n in 1..=sv {
                keys.push((n + smax - sv, var, n));
            }
        }
        keys.sort();
        let slots = keys
            .iter()
            .enumerate()
            .map(|(i, &(_, var, n))| ((var, n), i))
            .collect();
        Self {
            s: s.to_vec(),
            slots,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Slot of `alpha_var^(n)` for `n >= 1`.
    pub fn slot(&self, var: usize, n: usize) -> usize {
        self.slots[&(var, n)]
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    row: usize,
    var: usize,
    stage: usize,
    coef: f64,
    d1: f64,
    d2: f64,
}

/// The correction of one member, `alpha^(to) - alpha^(from)` at position `phase`
/// (lattice index plus subgrid offset).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub member: Member,
    pub from: usize,
    pub to: usize,
    pub phase: (f64, f64),
}

/// Frequency-independent description of `P` and `Q`: every entry is a sum of
/// `coef * exp(i theta . d)` terms.
#[derive(Debug, Clone)]
pub struct SmootherPlan {
    pub m: usize,
    pub layout: SlotLayout,
    pub schedule: UpdateSchedule,
    pub corrections: Vec<Correction>,
    terms: Vec<Term>,
}

impl SmootherPlan {
    pub fn new(st: &MultiStencil, spec: &BlockSpec) -> Result<Self> {
        Self::with_convention(st, spec, PhaseConvention::Geometric)
    }

    pub fn with_convention(
        st: &MultiStencil,
        spec: &BlockSpec,
        convention: PhaseConvention,
    ) -> Result<Self> {
        spec.validate()?;
        if st.m != spec.m {
            return Err(Error::InvalidBlock(format!(
                "block has {} variables, stencil has {}",
                spec.m, st.m
            )));
        }
        let schedule = update_schedule(st, spec);
        let layout = SlotLayout::new(&schedule.s);
        let local = build_local_matrix(st, spec);
        let delta = |var: usize| -> (f64, f64) {
            match (convention, st.kinds[var]) {
                (PhaseConvention::Geometric, loc) => loc.delta(),
                (PhaseConvention::IndexOnly, _) => Location::Node.delta(),
            }
        };
        let corrections = spec
            .members
            .iter()
            .zip(&schedule.stage)
            .map(|(&mb, &n)| {
                let (db1, db2) = delta(mb.var);
                Correction {
                    member: mb,
                    from: n,
                    to: n + 1,
                    phase: (mb.offset.0 as f64 + db1, mb.offset.1 as f64 + db2),
                }
            })
            .collect::<Vec<_>>();
        let mut terms = Vec::new();
        for (a, ma) in spec.members.iter().enumerate() {
            // Corrections: A^B_ab (alpha^(n_b + 1) - alpha^(n_b)) e^{i theta x_b} / omega.
            for (b, mb) in spec.members.iter().enumerate() {
                let v = local[(a, b)];
                if v == 0.0 {
                    continue;
                }
                let coef = v / spec.omega[mb.var];
                let c = corrections[b];
                let (d1, d2) = c.phase;
                terms.push(Term {
                    row: a,
                    var: mb.var,
                    stage: c.to,
                    coef,
                    d1,
                    d2,
                });
                terms.push(Term {
                    row: a,
                    var: mb.var,
                    stage: c.from,
                    coef: -coef,
                    d1,
                    d2,
                });
            }
            // Residual: sum_s s alpha^(count) e^{i theta x}, which must vanish together
            // with the corrections.
            for (r, kk, ll, v) in st.row(ma.var) {
                let pos = (ma.offset.0 + kk, ma.offset.1 + ll);
                let (n, _) = update_count(spec, r, pos);
                let (dr1, dr2) = delta(r);
                terms.push(Term {
                    row: a,
                    var: r,
                    stage: n,
                    coef: v,
                    d1: pos.0 as f64 + dr1,
                    d2: pos.1 as f64 + dr2,
                });
            }
        }
        Ok(Self {
            m: spec.m,
            layout,
            schedule,
            corrections,
            terms,
        })
    }

    pub fn q(&self) -> usize {
        self.layout.len()
    }

    /// `(P, Q)` at `theta`.
    pub fn pq(&self, theta: Frequency) -> (CMat, CMat) {
        let q = self.q();
        let mut p = CMat::zeros(q, q);
        let mut qm = CMat::zeros(q, self.m);
        for t in &self.terms {
            let z = Complex64::from_polar(t.coef, theta.phase(t.d1, t.d2));
            if t.stage == 0 {
                qm[(t.row, t.var)] -= z;
            } else {
                p[(t.row, self.layout.slot(t.var, t.stage))] += z;
            }
        }
        (p, qm)
    }

    /// `P^-1 Q`: every intermediate coefficient in terms of `alpha^(0)`.
    pub fn states(&self, theta: Frequency) -> Result<CMat> {
        let (p, qm) = self.pq(theta);
        let (inv, cond) = inverse_with_cond(&p).ok_or(Error::FrequencySingular {
            theta1: theta.theta1,
            theta2: theta.theta2,
            cond: f64::INFINITY,
        })?;
        if cond > 1e14 {
            return Err(Error::FrequencySingular {
                theta1: theta.theta1,
                theta2: theta.theta2,
                cond,
            });
        }
        Ok(inv * qm)
    }

    /// The smoother symbol: last `m` rows of `P^-1 Q`.
    pub fn symbol(&self, theta: Frequency) -> Result<CMat> {
        let all = self.states(theta)?;
        let q = self.q();
        Ok(all.rows(q - self.m, self.m).into_owned())
    }
}

/// `P` and `Q` for one frequency.
#[derive(Debug, Clone)]
pub struct PQSystem {
    pub p: CMat,
    pub q: CMat,
    pub theta: Frequency,
}

pub fn build_pq(st: &MultiStencil, spec: &BlockSpec, theta: Frequency) -> Result<PQSystem> {
    let (p, q) = SmootherPlan::new(st, spec)?.pq(theta);
    Ok(PQSystem { p, q, theta })
}

pub fn smoother_symbol(st: &MultiStencil, spec: &BlockSpec, theta: Frequency) -> Result<CMat> {
    SmootherPlan::new(st, spec)?.symbol(theta)
}

/// Closed-form lexicographic point Gauss-Seidel symbol of a scalar nodal stencil.
pub fn point_gauss_seidel_symbol(st: &MultiStencil, theta: Frequency) -> Complex64 {
    let mut past = Complex64::new(0.0, 0.0);
    let mut future = Complex64::new(0.0, 0.0);
    for (_, kk, ll, v) in st.row(0) {
        let z = Complex64::from_polar(v, theta.phase(kk as f64, ll as f64));
        if (kk, ll) == (0, 0) || precedes((kk, ll)) {
            past += z;
        } else {
            future += z;
        }
    }
    -future / past
}

/// Diagonal-variant local solve: `dp = (b^T D^-1 ru - rp) / (b^T D^-1 b - c)`,
/// `du = D^-1 (ru - dp b)`, where the block is `[D b; b^T c]` with the Schur member
/// at index `schur`. Returns `None` when `D` or the Schur complement vanishes.
///
/// `col` holds the Schur column `b` and `row` the Schur row `b^T`, which may differ
/// in general.
pub fn schur_solve(
    diag: &[f64],
    col: &[f64],
    row: &[f64],
    c: f64,
    ru: &[f64],
    rp: f64,
) -> Option<(Vec<f64>, f64)> {
    let mut num = -rp;
    let mut den = -c;
    for i in 0..diag.len() {
        if diag[i] == 0.0 {
            return None;
        }
        num += row[i] * ru[i] / diag[i];
        den += row[i] * col[i] / diag[i];
    }
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let dp = num / den;
    let du = (0..diag.len())
        .map(|i| (ru[i] - dp * col[i]) / diag[i])
        .collect();
    Some((du, dp))
}
