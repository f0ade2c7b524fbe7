//! Finite-element assembly with boundary unknowns eliminated.

use std::ops::Range;

use trilfa::discretization::{ProblemKind, ProblemSpec};
use trilfa::fem;
use trilfa::lattice::SubgridId;

use crate::csr::Csr;
use crate::mesh::{TriMesh, Vertex};

const NONE: u32 = u32::MAX;

/// Where each unknown lives. Stokes uses variables `u, v` (interior vertices) and
/// `p` (all vertices); curl-curl uses one variable per edge subgrid (interior edges),
/// located at the start vertex of the edge.
#[derive(Debug, Clone)]
pub struct Layout {
    pub kind: ProblemKind,
    pub m: usize,
    /// Index range of each variable; variables are stored contiguously in order.
    pub ranges: Vec<Range<usize>>,
    pub dofs: Vec<Vertex>,
    side: i32,
    lookup: Vec<u32>,
}

impl Layout {
    pub fn new(mesh: &TriMesh, kind: ProblemKind) -> Self {
        let side = mesh.n + 1;
        let m = 3;
        let mut layout = Self {
            kind,
            m,
            ranges: Vec::with_capacity(m),
            dofs: Vec::new(),
            side,
            lookup: vec![NONE; m * (side * side) as usize],
        };
        for var in 0..m {
            let start = layout.dofs.len();
            match kind {
                ProblemKind::Stokes => {
                    for (i, &v) in mesh.vertices.iter().enumerate() {
                        if var == 2 || !mesh.vertex_boundary[i] {
                            layout.push(var, v);
                        }
                    }
                }
                ProblemKind::CurlCurl => {
                    let sub = SubgridId::ALL[var];
                    for (i, e) in mesh.edges.iter().enumerate() {
                        if e.sub == sub && !mesh.edge_boundary[i] {
                            layout.push(var, e.start);
                        }
                    }
                }
            }
            layout.ranges.push(start..layout.dofs.len());
        }
        layout
    }

    fn push(&mut self, var: usize, v: Vertex) {
        let slot = self.slot(var, v);
        self.lookup[slot] = self.dofs.len() as u32;
        self.dofs.push(v);
    }

    fn slot(&self, var: usize, (k, l): Vertex) -> usize {
        (var as i32 * self.side * self.side + k * self.side + l) as usize
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// Unknown of variable `var` at `v`, or `None` if absent or eliminated.
    pub fn index(&self, var: usize, v: Vertex) -> Option<usize> {
        if var >= self.m || !(0..self.side).contains(&v.0) || !(0..self.side).contains(&v.1) {
            return None;
        }
        let i = self.lookup[self.slot(var, v)];
        (i != NONE).then_some(i as usize)
    }

    pub fn var_of(&self, dof: usize) -> usize {
        self.ranges.iter().position(|r| r.contains(&dof)).expect("dof in range")
    }

    /// Range of the pressure unknowns, if any.
    pub fn pressure(&self) -> Option<Range<usize>> {
        (self.kind == ProblemKind::Stokes).then(|| self.ranges[2].clone())
    }
}

/// Dirichlet values of eliminated unknowns, by variable and location.
pub type BoundaryData<'a> = &'a dyn Fn(usize, Vertex) -> f64;

#[derive(Debug, Clone)]
pub struct Discrete {
    pub op: Csr,
    pub layout: Layout,
    /// Load vector from the boundary data; zero for homogeneous conditions.
    pub rhs: Vec<f64>,
}

struct RowBuilder<'a> {
    layout: &'a Layout,
    rows: Vec<Vec<(u32, f64)>>,
    rhs: Vec<f64>,
    data: Option<BoundaryData<'a>>,
}

impl RowBuilder<'_> {
    /// Adds `v` to the `(row, col)` coupling. A `None` row is an eliminated equation;
    /// an `Err` column is an eliminated unknown, moved to the load with its boundary
    /// value.
    fn add(&mut self, row: Option<usize>, col: Result<usize, (usize, Vertex)>, v: f64) {
        let Some(r) = row else { return };
        match col {
            Ok(c) => {
                let list = &mut self.rows[r];
                match list.iter_mut().find(|e| e.0 == c as u32) {
                    Some(e) => e.1 += v,
                    None => list.push((c as u32, v)),
                }
            }
            Err((var, at)) => {
                if let Some(g) = self.data {
                    self.rhs[r] -= v * g(var, at);
                }
            }
        }
    }
}

/// Assembles the operator on `mesh`. The mesh size of `problem` is ignored in favour
/// of the mesh's own.
pub fn assemble(mesh: &TriMesh, problem: &ProblemSpec, data: Option<BoundaryData>) -> Discrete {
    let layout = Layout::new(mesh, problem.kind);
    let n = layout.len();
    let cap = match problem.kind {
        ProblemKind::Stokes => 21,
        ProblemKind::CurlCurl => 5,
    };
    let mut b = RowBuilder {
        layout: &layout,
        rows: (0..n).map(|_| Vec::with_capacity(cap)).collect(),
        rhs: vec![0.0; n],
        data,
    };
    for t in 0..mesh.triangles.len() {
        match problem.kind {
            ProblemKind::Stokes => stokes_element(&mut b, mesh, problem.beta, t),
            ProblemKind::CurlCurl => curlcurl_element(&mut b, mesh, problem.kappa, t),
        }
    }
    let RowBuilder { rows, rhs, .. } = b;
    Discrete {
        op: Csr::from_rows(n, rows),
        layout,
        rhs,
    }
}

fn stokes_element(b: &mut RowBuilder, mesh: &TriMesh, beta: f64, t: usize) {
    let xy = mesh.triangle_positions(t);
    let verts = mesh.triangle_vertices(t);
    let k = fem::p1_stiffness(xy);
    let bx = fem::p1_gradient_coupling(xy, 0);
    let by = fem::p1_gradient_coupling(xy, 1);
    let h = mesh.h();
    let stab = -beta * h * h;
    let layout = b.layout;
    let idx = |var: usize, i: usize| layout.index(var, verts[i]);
    let col = |var: usize, i: usize| idx(var, i).ok_or((var, verts[i]));
    for i in 0..3 {
        for j in 0..3 {
            b.add(idx(0, i), col(0, j), k[i][j]);
            b.add(idx(1, i), col(1, j), k[i][j]);
            b.add(idx(0, i), col(2, j), bx[i][j]);
            b.add(idx(1, i), col(2, j), by[i][j]);
            b.add(idx(2, i), col(0, j), -bx[i][j]);
            b.add(idx(2, i), col(1, j), -by[i][j]);
            b.add(idx(2, i), col(2, j), stab * k[i][j]);
        }
    }
}

fn curlcurl_element(b: &mut RowBuilder, mesh: &TriMesh, kappa: f64, t: usize) {
    let xy = mesh.triangle_positions(t);
    let verts = mesh.triangle_vertices(t);
    let local = [(0, 1), (1, 2), (0, 2)];
    let mut dofs = [Err((0, (0, 0))); 3];
    let mut signs = [0.0; 3];
    for (e, &(p, q)) in local.iter().enumerate() {
        let (sub, start, sign) = trilfa::oracle::lattice_edge(verts[p], verts[q]);
        let var = sub.number() - 1;
        dofs[e] = b.layout.index(var, start).ok_or((var, start));
        signs[e] = sign;
    }
    let kc = fem::whitney_curlcurl(xy, local);
    let km = fem::whitney_mass(xy, local);
    for i in 0..3 {
        for j in 0..3 {
            let v = signs[i] * signs[j] * (kc[i][j] + kappa * km[i][j]);
            b.add(dofs[i].ok(), dofs[j], v);
        }
    }
}

/// Unit tangential velocity on the side `l = 0`; the two lid corners stay at rest.
pub fn lid_velocity(n: i32) -> impl Fn(usize, Vertex) -> f64 {
    move |var, (k, l)| {
        if var == 0 && l == 0 && 0 < k && k < n {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_sizes() {
        let mesh = TriMesh::new(3).unwrap();
        let s = Layout::new(&mesh, ProblemKind::Stokes);
        let interior = mesh.vertex_boundary.iter().filter(|&&b| !b).count();
        assert_eq!(s.ranges[0].len(), interior);
        assert_eq!(s.ranges[2].len(), mesh.vertices.len());
        assert_eq!(s.var_of(s.ranges[2].start), 2);
        let c = Layout::new(&mesh, ProblemKind::CurlCurl);
        let interior_edges = mesh.edge_boundary.iter().filter(|&&b| !b).count();
        assert_eq!(c.len(), interior_edges);
        assert_eq!(c.index(0, (3, 0)), None);
    }

    #[test]
    fn lid_load_only_touches_rows_near_the_lid() {
        let mesh = TriMesh::new(3).unwrap();
        let g = lid_velocity(mesh.n);
        let d = assemble(&mesh, &ProblemSpec::stokes(1.0), Some(&g));
        for (i, &f) in d.rhs.iter().enumerate() {
            if f != 0.0 {
                assert!(d.layout.dofs[i].1 <= 1);
            }
        }
        assert!(d.rhs.iter().any(|&f| f != 0.0));
    }
}
