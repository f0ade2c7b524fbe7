//! V- and W-cycles.

use serde::{Deserialize, Serialize};
use trilfa::smoother::BlockSpec;

use crate::error::{MgError, Result};
use crate::hierarchy::{project_pressure, Hierarchy};
use crate::vanka::Smoother;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleKind {
    V,
    W,
}

impl CycleKind {
    pub fn gamma(self) -> usize {
        match self {
            CycleKind::V => 1,
            CycleKind::W => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpec {
    pub kind: CycleKind,
    pub nu1: usize,
    pub nu2: usize,
    pub smoother: BlockSpec,
    /// Number of levels taking part in the cycle counting the finest. The lowest of
    /// them is solved to `inner_tol` by full-hierarchy W-cycles instead of being
    /// smoothed. `None` uses every level down to the direct solve.
    pub depth: Option<usize>,
    pub inner_tol: f64,
}

impl CycleSpec {
    pub fn new(kind: CycleKind, nu1: usize, nu2: usize, smoother: BlockSpec) -> Self {
        Self {
            kind,
            nu1,
            nu2,
            smoother,
            depth: None,
            inner_tol: 1e-8,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn validate(&self, h: &Hierarchy) -> Result<()> {
        self.smoother.validate()?;
        if let Some(d) = self.depth {
            if d < 2 || d > h.levels.len() {
                return Err(MgError::Cycle(format!(
                    "depth {d} outside [2, {}] for this hierarchy",
                    h.levels.len()
                )));
            }
        }
        if !(self.inner_tol > 0.0 && self.inner_tol < 1.0) {
            return Err(MgError::Cycle("inner tolerance must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

const INNER_MAX_CYCLES: usize = 100;

pub struct Multigrid<'a> {
    pub hierarchy: &'a Hierarchy,
    pub spec: CycleSpec,
    pub smoother: Smoother,
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl<'a> Multigrid<'a> {
    pub fn new(hierarchy: &'a Hierarchy, spec: CycleSpec) -> Result<Self> {
        spec.validate(hierarchy)?;
        let smoother = Smoother::new(hierarchy, &spec.smoother)?;
        Ok(Self {
            hierarchy,
            spec,
            smoother,
        })
    }

    pub fn top(&self) -> usize {
        self.hierarchy.levels.len() - 1
    }

    pub fn residual(&self, level: usize, x: &[f64], b: &[f64]) -> Vec<f64> {
        let op = &self.hierarchy.levels[level].disc.op;
        let mut r = vec![0.0; op.nrows];
        op.residual_into(x, b, &mut r);
        r
    }

    pub fn residual_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        norm(&self.residual(self.top(), x, b))
    }

    /// One cycle on the finest level, followed by the pressure projection.
    pub fn cycle(&self, x: &mut [f64], b: &[f64]) -> Result<()> {
        let top = self.top();
        self.cycle_at(top, x, b, self.spec.depth, self.spec.kind)?;
        project_pressure(&self.hierarchy.levels[top].disc.layout, x);
        Ok(())
    }

    fn cycle_at(&self, level: usize, x: &mut [f64], b: &[f64], depth: Option<usize>, kind: CycleKind) -> Result<()> {
        let h = self.hierarchy;
        if level == 0 {
            x.copy_from_slice(&h.coarse.solve(b)?);
            return Ok(());
        }
        if depth == Some(1) {
            return self.inner_solve(level, x, b);
        }
        for _ in 0..self.spec.nu1 {
            self.smoother.sweep(h, level, x, b);
        }
        let r = self.residual(level, x, b);
        let bc = h.restrict[level - 1].mul(&r);
        let mut xc = vec![0.0; bc.len()];
        for _ in 0..kind.gamma() {
            self.cycle_at(level - 1, &mut xc, &bc, depth.map(|d| d - 1), kind)?;
        }
        let corr = h.prolong[level - 1].mul(&xc);
        for (xi, ci) in x.iter_mut().zip(corr) {
            *xi += ci;
        }
        project_pressure(&h.levels[level].disc.layout, x);
        for _ in 0..self.spec.nu2 {
            self.smoother.sweep(h, level, x, b);
        }
        Ok(())
    }

    /// Near-exact solve on `level` by W-cycles over all coarser levels.
    fn inner_solve(&self, level: usize, x: &mut [f64], b: &[f64]) -> Result<()> {
        let target = self.spec.inner_tol * norm(b);
        for _ in 0..INNER_MAX_CYCLES {
            let r = norm(&self.residual(level, x, b));
            if r <= target || r == 0.0 {
                return Ok(());
            }
            self.cycle_at(level, x, b, None, CycleKind::W)?;
            project_pressure(&self.hierarchy.levels[level].disc.layout, x);
        }
        Err(MgError::Cycle(format!(
            "inner solve on level {} missed tolerance {:e}",
            self.hierarchy.levels[level].mesh.level,
            self.spec.inner_tol
        )))
    }
}
