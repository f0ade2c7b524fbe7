//! Multiplicative overlapping block relaxation.

use std::collections::HashMap;

use nalgebra::DMatrix;
use trilfa::smoother::{schur_solve, BlockSpec, LocalSolver};

use crate::assembly::Layout;
use crate::csr::Csr;
use crate::error::{MgError, Result};
use crate::hierarchy::{BlockIndex, Hierarchy};

#[derive(Debug, Clone)]
enum LocalSolve {
    /// Row-major inverse of the block matrix.
    Inverse { n: usize, inv: Vec<f64> },
    /// Diagonal velocity part with one eliminated member at `pos`.
    Schur {
        pos: usize,
        diag: Vec<f64>,
        col: Vec<f64>,
        row: Vec<f64>,
        c: f64,
    },
}

/// Local solves for one level; blocks with bitwise-equal matrices share one entry.
#[derive(Debug, Clone)]
pub struct LevelSmoother {
    pattern: Vec<u32>,
    solves: Vec<LocalSolve>,
    var: Vec<u8>,
}

/// Principal submatrix of `op` on the block unknowns. `pos` is scratch space of
/// length `op.nrows` filled with `-1`, and is restored on return.
pub fn local_matrix(op: &Csr, block: &[u32], pos: &mut [i32]) -> DMatrix<f64> {
    for (i, &d) in block.iter().enumerate() {
        pos[d as usize] = i as i32;
    }
    let n = block.len();
    let mut a = DMatrix::zeros(n, n);
    for (i, &d) in block.iter().enumerate() {
        let (c, v) = op.row(d as usize);
        for (&j, &x) in c.iter().zip(v) {
            let p = pos[j as usize];
            if p >= 0 {
                a[(i, p as usize)] = x;
            }
        }
    }
    for &d in block {
        pos[d as usize] = -1;
    }
    a
}

impl LevelSmoother {
    pub fn new(op: &Csr, layout: &Layout, blocks: &BlockIndex, spec: &BlockSpec) -> Result<Self> {
        let var: Vec<u8> = (0..layout.len()).map(|d| layout.var_of(d) as u8).collect();
        let mut pos = vec![-1i32; op.nrows];
        let mut seen: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut solves = Vec::new();
        let mut pattern = Vec::with_capacity(blocks.len());
        for b in 0..blocks.len() {
            let dofs = blocks.block(b);
            let a = local_matrix(op, dofs, &mut pos);
            let schur = match spec.solver {
                LocalSolver::Full => None,
                LocalSolver::Diagonal => {
                    let sv = spec.schur_var.expect("validated diagonal spec");
                    dofs.iter().position(|&d| var[d as usize] as usize == sv)
                }
            };
            let mut key: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
            key.push(dofs.len() as u64);
            key.push(schur.map_or(u64::MAX, |p| p as u64));
            if let Some(&id) = seen.get(&key) {
                pattern.push(id);
                continue;
            }
            let singular = || {
                let (k, l) = blocks.anchors[b];
                MgError::SingularBlock { block: b, k, l }
            };
            let solve = match (spec.solver, schur) {
                (LocalSolver::Full, _) | (LocalSolver::Diagonal, None) => {
                    let inv = a.clone().try_inverse().ok_or_else(singular)?;
                    if inv.iter().any(|v| !v.is_finite()) {
                        return Err(singular());
                    }
                    let n = dofs.len();
                    LocalSolve::Inverse {
                        n,
                        inv: (0..n * n).map(|i| inv[(i / n, i % n)]).collect(),
                    }
                }
                (LocalSolver::Diagonal, Some(p)) => {
                    let others: Vec<usize> = (0..dofs.len()).filter(|&i| i != p).collect();
                    let diag: Vec<f64> = others.iter().map(|&i| a[(i, i)]).collect();
                    let col: Vec<f64> = others.iter().map(|&i| a[(i, p)]).collect();
                    let row: Vec<f64> = others.iter().map(|&i| a[(p, i)]).collect();
                    let c = a[(p, p)];
                    let zeros = vec![0.0; others.len()];
                    schur_solve(&diag, &col, &row, c, &zeros, 0.0).ok_or_else(singular)?;
                    LocalSolve::Schur {
                        pos: p,
                        diag,
                        col,
                        row,
                        c,
                    }
                }
            };
            let id = solves.len() as u32;
            solves.push(solve);
            seen.insert(key, id);
            pattern.push(id);
        }
        Ok(Self {
            pattern,
            solves,
            var,
        })
    }

    /// Number of distinct local systems.
    pub fn unique_blocks(&self) -> usize {
        self.solves.len()
    }

    /// One lexicographic sweep over all blocks, `x <- x + diag(omega) delta` with the
    /// local residual recomputed from the current iterate.
    pub fn sweep(&self, op: &Csr, blocks: &BlockIndex, omega: &[f64], x: &mut [f64], b: &[f64]) {
        let mut r = Vec::with_capacity(16);
        let mut ru = Vec::with_capacity(16);
        let mut delta = Vec::with_capacity(16);
        for bi in 0..blocks.len() {
            let dofs = blocks.block(bi);
            r.clear();
            r.extend(dofs.iter().map(|&d| b[d as usize] - op.row_dot(d as usize, x)));
            delta.clear();
            match &self.solves[self.pattern[bi] as usize] {
                LocalSolve::Inverse { n, inv } => {
                    for i in 0..*n {
                        let row = &inv[i * n..(i + 1) * n];
                        delta.push(row.iter().zip(&r).map(|(a, v)| a * v).sum::<f64>());
                    }
                }
                LocalSolve::Schur {
                    pos,
                    diag,
                    col,
                    row,
                    c,
                } => {
                    ru.clear();
                    ru.extend(r.iter().enumerate().filter(|&(i, _)| i != *pos).map(|(_, &v)| v));
                    let (du, dp) = schur_solve(diag, col, row, *c, &ru, r[*pos]).expect("checked when built");
                    let mut it = du.into_iter();
                    for i in 0..dofs.len() {
                        delta.push(if i == *pos { dp } else { it.next().unwrap() });
                    }
                }
            }
            for (&d, &dv) in dofs.iter().zip(&delta) {
                x[d as usize] += omega[self.var[d as usize] as usize] * dv;
            }
        }
    }
}

/// Local solves for every level of a hierarchy.
#[derive(Debug, Clone)]
pub struct Smoother {
    pub spec: BlockSpec,
    pub levels: Vec<LevelSmoother>,
}

impl Smoother {
    pub fn new(h: &Hierarchy, spec: &BlockSpec) -> Result<Self> {
        spec.validate()?;
        let expected = crate::hierarchy::block_members(h.problem.kind);
        if spec.members != expected {
            return Err(MgError::Cycle(format!(
                "smoother '{}' does not match the {} problem",
                spec.name,
                h.problem.kind.name()
            )));
        }
        let levels = h
            .levels
            .iter()
            .map(|lv| LevelSmoother::new(&lv.disc.op, &lv.disc.layout, &lv.blocks, spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            levels,
        })
    }

    pub fn sweep(&self, h: &Hierarchy, level: usize, x: &mut [f64], b: &[f64]) {
        let lv = &h.levels[level];
        self.levels[level].sweep(&lv.disc.op, &lv.blocks, &self.spec.omega, x, b);
    }
}
