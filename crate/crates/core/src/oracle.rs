//! Brute-force finite-element assembly on a doubly periodic equilateral patch.
//!
//! The patch has `n x n` lattice cells, each split into a lower and an upper
//! triangle:
//!
//! * lower `(k, l)`: vertices `(k, l), (k+1, l), (k+1, l+1)`
//! * upper `(k, l)`: vertices `(k, l), (k+1, l+1), (k, l+1)`
//!
//! The full matrix is assembled and the rows of the unknowns anchored at `(0, 0)`
//! are read back as a stencil.

use std::collections::HashMap;

use crate::discretization::{ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::fem;
use crate::lattice::{LatticeBasis, Location, Point, SubgridId};
use crate::stencil::MultiStencil;

pub const MIN_PATCH: usize = 4;

type Vertex = (i32, i32);

/// The two triangles of cell `(k, l)` as lattice vertex triples.
pub fn cell_triangles(k: i32, l: i32) -> [[Vertex; 3]; 2] {
    [
        [(k, l), (k + 1, l), (k + 1, l + 1)],
        [(k, l), (k + 1, l + 1), (k, l + 1)],
    ]
}

/// Edge of the lattice joining two adjacent vertices, as (subgrid, start vertex),
/// plus the local orientation relative to the global one.
pub fn lattice_edge(a: Vertex, b: Vertex) -> (SubgridId, Vertex, f64) {
    let (dk, dl) = (b.0 - a.0, b.1 - a.1);
    let (sub, start, sign) = match (dk, dl) {
        (1, 0) => (SubgridId::First, a, 1.0),
        (-1, 0) => (SubgridId::First, b, -1.0),
        (0, 1) => (SubgridId::Second, a, 1.0),
        (0, -1) => (SubgridId::Second, b, -1.0),
        (1, 1) => (SubgridId::Third, a, 1.0),
        (-1, -1) => (SubgridId::Third, b, -1.0),
        _ => panic!("vertices {a:?} and {b:?} are not lattice neighbours"),
    };
    (sub, start, sign)
}

fn wrap(x: i32, n: i32) -> i32 {
    x.rem_euclid(n)
}

/// Maps a periodic index difference into `[-n/2, n/2)`.
fn wrap_offset(d: i32, n: i32) -> i32 {
    let w = d.rem_euclid(n);
    if w >= n / 2 {
        w - n
    } else {
        w
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Dof {
    var: usize,
    k: i32,
    l: i32,
}

struct Assembler {
    n: i32,
    entries: HashMap<(Dof, Dof), f64>,
}

impl Assembler {
    fn add(&mut self, row: Dof, col: Dof, v: f64) {
        let w = |d: Dof| Dof {
            var: d.var,
            k: wrap(d.k, self.n),
            l: wrap(d.l, self.n),
        };
        *self.entries.entry((w(row), w(col))).or_insert(0.0) += v;
    }

    fn extract(&self, kinds: Vec<Location>, h: f64) -> MultiStencil {
        let mut st = MultiStencil::new(kinds, h);
        let mut keys: Vec<_> = self.entries.keys().copied().collect();
        keys.sort_by_key(|(r, c)| (r.var, r.k, r.l, c.var, c.k, c.l));
        for (row, col) in keys {
            if row.k == 0 && row.l == 0 {
                let v = self.entries[&(row, col)];
                st.add(
                    row.var,
                    col.var,
                    wrap_offset(col.k, self.n),
                    wrap_offset(col.l, self.n),
                    v,
                );
            }
        }
        st
    }
}

fn coords(basis: &LatticeBasis, tri: &[Vertex; 3]) -> [Point; 3] {
    tri.map(|(k, l)| basis.position(k as f64, l as f64))
}

/// Assembles the exact finite-element matrix on a periodic `patch_n x patch_n`
/// patch and returns the rows at the origin as a stencil.
pub fn assemble_patch_oracle(spec: &ProblemSpec, patch_n: usize) -> Result<MultiStencil> {
    if patch_n < MIN_PATCH {
        return Err(Error::PatchSize {
            patch_n,
            min: MIN_PATCH,
        });
    }
    let basis = LatticeBasis::equilateral(spec.h);
    let n = patch_n as i32;
    let mut asm = Assembler {
        n,
        entries: HashMap::new(),
    };
    for k in 0..n {
        for l in 0..n {
            for tri in cell_triangles(k, l) {
                let xy = coords(&basis, &tri);
                match spec.kind {
                    ProblemKind::Stokes => stokes_element(&mut asm, spec, &tri, xy),
                    ProblemKind::CurlCurl => curlcurl_element(&mut asm, spec, &tri, xy),
                }
            }
        }
    }
    let kinds = match spec.kind {
        ProblemKind::Stokes => vec![Location::Node; 3],
        ProblemKind::CurlCurl => SubgridId::ALL.iter().map(|&s| Location::Edge(s)).collect(),
    };
    Ok(asm.extract(kinds, spec.h).pruned(1e-15))
}

fn stokes_element(asm: &mut Assembler, spec: &ProblemSpec, tri: &[Vertex; 3], xy: [Point; 3]) {
    let k = fem::p1_stiffness(xy);
    let bx = fem::p1_gradient_coupling(xy, 0);
    let by = fem::p1_gradient_coupling(xy, 1);
    let stab = -spec.beta * spec.h * spec.h;
    let dof = |var: usize, i: usize| Dof {
        var,
        k: tri[i].0,
        l: tri[i].1,
    };
    for i in 0..3 {
        for j in 0..3 {
            asm.add(dof(0, i), dof(0, j), k[i][j]);
            asm.add(dof(1, i), dof(1, j), k[i][j]);
            // Velocity rows: (grad p, v); pressure rows: -(div u, q).
            asm.add(dof(0, i), dof(2, j), bx[i][j]);
            asm.add(dof(1, i), dof(2, j), by[i][j]);
            asm.add(dof(2, i), dof(0, j), -bx[i][j]);
            asm.add(dof(2, i), dof(1, j), -by[i][j]);
            asm.add(dof(2, i), dof(2, j), stab * k[i][j]);
        }
    }
}

fn curlcurl_element(asm: &mut Assembler, spec: &ProblemSpec, tri: &[Vertex; 3], xy: [Point; 3]) {
    let local = [(0, 1), (1, 2), (0, 2)];
    let mut dofs = [Dof { var: 0, k: 0, l: 0 }; 3];
    let mut signs = [0.0; 3];
    for (e, &(a, b)) in local.iter().enumerate() {
        let (sub, start, sign) = lattice_edge(tri[a], tri[b]);
        dofs[e] = Dof {
            var: sub.number() - 1,
            k: start.0,
            l: start.1,
        };
        signs[e] = sign;
    }
    let kc = fem::whitney_curlcurl(xy, local);
    let km = fem::whitney_mass(xy, local);
    for i in 0..3 {
        for j in 0..3 {
            let v = kc[i][j] + spec.kappa * km[i][j];
            asm.add(dofs[i], dofs[j], signs[i] * signs[j] * v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_patches_are_rejected() {
        let spec = ProblemSpec::stokes(1.0);
        assert!(matches!(
            assemble_patch_oracle(&spec, 3),
            Err(Error::PatchSize { patch_n: 3, min: 4 })
        ));
    }

    #[test]
    fn offsets_wrap_symmetrically() {
        assert_eq!(wrap_offset(-1, 4), -1);
        assert_eq!(wrap_offset(3, 4), -1);
        assert_eq!(wrap_offset(1, 4), 1);
        assert_eq!(wrap_offset(2, 4), -2);
    }
}
