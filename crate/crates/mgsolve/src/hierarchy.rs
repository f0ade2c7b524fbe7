//! Nested meshes with their operators, transfers and smoother blocks.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use trilfa::discretization::{ProblemKind, ProblemSpec};
use trilfa::smoother::{BlockSpec, LocalSolver, Member};

use crate::assembly::{assemble, lid_velocity, Discrete, Layout};
use crate::csr::Csr;
use crate::error::{MgError, Result};
use crate::mesh::{TriMesh, Vertex, MAX_LEVEL};
use crate::transfer::prolongation;

pub const DEFAULT_COARSEST: usize = 2;
pub const MAX_DIRECT_DIM: usize = 10_000;

/// Unknowns of every block in sweep order, stored contiguously.
#[derive(Debug, Clone)]
pub struct BlockIndex {
    pub anchors: Vec<Vertex>,
    ptr: Vec<u32>,
    dofs: Vec<u32>,
}

impl BlockIndex {
    /// One block per vertex; members missing from the layout are dropped, and blocks
    /// left empty are skipped. Anchors are visited row by row (`l`, then `k`).
    pub fn new(mesh: &TriMesh, layout: &Layout, members: &[Member]) -> Self {
        let mut order: Vec<Vertex> = mesh.vertices.clone();
        order.sort_by_key(|&(k, l)| (l, k));
        let mut out = Self {
            anchors: Vec::new(),
            ptr: vec![0],
            dofs: Vec::new(),
        };
        for (k, l) in order {
            let before = out.dofs.len();
            for m in members {
                if let Some(i) = layout.index(m.var, (k + m.offset.0, l + m.offset.1)) {
                    out.dofs.push(i as u32);
                }
            }
            if out.dofs.len() > before {
                out.anchors.push((k, l));
                out.ptr.push(out.dofs.len() as u32);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    #[inline]
    pub fn block(&self, b: usize) -> &[u32] {
        &self.dofs[self.ptr[b] as usize..self.ptr[b + 1] as usize]
    }

    /// Number of blocks containing each unknown.
    pub fn coverage(&self, n: usize) -> Vec<usize> {
        let mut c = vec![0; n];
        for &d in &self.dofs {
            c[d as usize] += 1;
        }
        c
    }
}

/// Dense LU of the coarsest operator. For Stokes the pressure mean is fixed to zero
/// through a bordering row and column.
#[derive(Debug, Clone)]
pub struct CoarseSolver {
    lu: LU<f64, Dyn, Dyn>,
    n: usize,
    bordered: bool,
}

impl CoarseSolver {
    pub fn new(op: &Csr, layout: &Layout) -> Result<Self> {
        let n = op.nrows;
        if n > MAX_DIRECT_DIM {
            return Err(MgError::CoarseSolve(format!("dimension {n} exceeds {MAX_DIRECT_DIM}")));
        }
        let a = op.to_dense();
        let bordered = layout.pressure().is_some();
        let full = match layout.pressure() {
            Some(p) => {
                let mut b = DMatrix::zeros(n + 1, n + 1);
                b.view_mut((0, 0), (n, n)).copy_from(&a);
                for i in p {
                    b[(i, n)] = 1.0;
                    b[(n, i)] = 1.0;
                }
                b
            }
            None => a,
        };
        let lu = full.lu();
        if !lu.is_invertible() {
            return Err(MgError::CoarseSolve("singular coarsest operator".into()));
        }
        Ok(Self { lu, n, bordered })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut rhs = DVector::from_column_slice(b);
        if self.bordered {
            rhs = rhs.push(0.0);
        }
        let x = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| MgError::CoarseSolve("LU solve failed".into()))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(MgError::CoarseSolve("non-finite solution".into()));
        }
        Ok(x.as_slice()[..self.n].to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub mesh: TriMesh,
    pub disc: Discrete,
    pub blocks: BlockIndex,
}

/// Levels are stored coarsest first.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub problem: ProblemSpec,
    pub levels: Vec<Level>,
    /// `prolong[i]` maps level `i` to level `i + 1`.
    pub prolong: Vec<Csr>,
    pub restrict: Vec<Csr>,
    pub coarse: CoarseSolver,
}

/// Block members shared by every smoother of the problem.
pub fn block_members(kind: ProblemKind) -> Vec<Member> {
    match kind {
        ProblemKind::Stokes => BlockSpec::stokes(LocalSolver::Full).members,
        ProblemKind::CurlCurl => BlockSpec::nedelec_vertex().members,
    }
}

/// Homogeneous boundary conditions on `levels` refinements.
pub fn build_hierarchy(problem: &ProblemSpec, levels: usize) -> Result<Hierarchy> {
    Hierarchy::build(problem, levels, DEFAULT_COARSEST, false)
}

impl Hierarchy {
    /// With `lid`, the finest load vector carries the cavity lid velocity (Stokes only).
    pub fn build(problem: &ProblemSpec, levels: usize, coarsest: usize, lid: bool) -> Result<Self> {
        if !(2..=MAX_LEVEL).contains(&levels) {
            return Err(MgError::Levels {
                level: levels,
                min: 2,
                max: MAX_LEVEL,
            });
        }
        if coarsest == 0 || coarsest > levels {
            return Err(MgError::Levels {
                level: coarsest,
                min: 1,
                max: levels,
            });
        }
        problem.validate()?;
        if lid && problem.kind != ProblemKind::Stokes {
            return Err(MgError::Cycle("a lid velocity needs the Stokes problem".into()));
        }
        let members = block_members(problem.kind);
        let mut out: Vec<Level> = Vec::new();
        for lv in coarsest..=levels {
            let mesh = TriMesh::new(lv)?;
            let g = lid_velocity(mesh.n);
            let data: Option<&dyn Fn(usize, Vertex) -> f64> = (lid && lv == levels).then_some(&g as _);
            let disc = assemble(&mesh, &problem.with_h(mesh.h()), data);
            let blocks = BlockIndex::new(&mesh, &disc.layout, &members);
            out.push(Level { mesh, disc, blocks });
        }
        let mut prolong = Vec::new();
        for w in out.windows(2) {
            prolong.push(prolongation(&w[1].mesh, &w[0].mesh, &w[1].disc.layout, &w[0].disc.layout));
        }
        let restrict = prolong.iter().map(Csr::transpose).collect();
        let coarse = CoarseSolver::new(&out[0].disc.op, &out[0].disc.layout)?;
        Ok(Self {
            problem: problem.with_h(out.last().unwrap().mesh.h()),
            levels: out,
            prolong,
            restrict,
            coarse,
        })
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().unwrap()
    }

    pub fn finest_level(&self) -> usize {
        self.finest().mesh.level
    }

    pub fn coarsest_level(&self) -> usize {
        self.levels[0].mesh.level
    }
}

/// Subtracts the mean pressure; a no-op for problems without pressure.
pub fn project_pressure(layout: &Layout, x: &mut [f64]) {
    if let Some(p) = layout.pressure() {
        let mean = x[p.clone()].iter().sum::<f64>() / p.len() as f64;
        for v in &mut x[p] {
            *v -= mean;
        }
    }
}
