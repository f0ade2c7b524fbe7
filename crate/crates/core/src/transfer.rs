//! Fourier symbols of the finite-element prolongations used with standard coarsening.
//!
//! Coarse vertex `C` coincides with fine vertex `2C`. A coarse unknown of variable
//! `r` at `C` feeds the fine unknown of variable `i` at `y` with weight
//! `w_ir(y - 2C)` (edge unknowns are indexed by their start vertex). The matrix
//! restriction is the transpose of the prolongation.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::discretization::ProblemKind;
use crate::fem;
use crate::lattice::{Frequency, Location, SubgridId};
use crate::linalg::CMat;
use crate::oracle::{cell_triangles, lattice_edge};

/// Prolongation weights `w[(i, r, z1, z2)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferStencil {
    pub m: usize,
    pub kinds: Vec<Location>,
    pub weights: BTreeMap<(usize, usize, i32, i32), f64>,
}

impl TransferStencil {
    /// Linear interpolation of each of `m` nodal variables.
    pub fn nodal(m: usize) -> Self {
        let mut weights = BTreeMap::new();
        for v in 0..m {
            weights.insert((v, v, 0, 0), 1.0);
            for (a, b) in [(1, 0), (0, 1), (1, 1)] {
                weights.insert((v, v, a, b), 0.5);
                weights.insert((v, v, -a, -b), 0.5);
            }
        }
        Self {
            m,
            kinds: vec![Location::Node; m],
            weights,
        }
    }

    /// Canonical interpolation of lowest-order Whitney edge functions: each fine
    /// edge receives the line integral of the coarse basis function along it.
    pub fn whitney() -> Self {
        let mut weights = BTreeMap::new();
        for r in SubgridId::ALL {
            let (dk, dl) = r.direction();
            let (c0, c1) = ((0, 0), (dk, dl));
            for ck in -1..=0 {
                for cl in -1..=0 {
                    for tri in cell_triangles(ck, cl) {
                        let (Some(a), Some(b)) = (
                            tri.iter().position(|&v| v == c0),
                            tri.iter().position(|&v| v == c1),
                        ) else {
                            continue;
                        };
                        add_whitney_triangle(&mut weights, tri, (a, b), r);
                    }
                }
            }
        }
        weights.retain(|_, v: &mut f64| v.abs() > 1e-14);
        Self {
            m: 3,
            kinds: SubgridId::ALL.iter().map(|&s| Location::Edge(s)).collect(),
            weights,
        }
    }

    pub fn for_problem(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Stokes => Self::nodal(3),
            ProblemKind::CurlCurl => Self::whitney(),
        }
    }

    /// `P~` for one fine harmonic `fine` of the coarse base `base` (coarse frequency
    /// `2 base`), as an `m x m` matrix mapping coarse to fine coefficients.
    pub fn symbol(&self, fine: Frequency, base: Frequency) -> CMat {
        let mut p = CMat::zeros(self.m, self.m);
        for (&(i, r, z1, z2), &w) in &self.weights {
            let (fi1, fi2) = self.kinds[i].delta();
            let (cr1, cr2) = self.kinds[r].delta();
            let phase = -fine.phase(z1 as f64 + fi1, z2 as f64 + fi2)
                + base.phase(2.0 * cr1, 2.0 * cr2);
            p[(i, r)] += Complex64::from_polar(0.25 * w, phase);
        }
        p
    }

    /// Stacked prolongation symbol `(4m x m)` over the listed fine harmonics.
    pub fn stacked(&self, fine: &[Frequency], base: Frequency) -> CMat {
        let m = self.m;
        let mut out = CMat::zeros(m * fine.len(), m);
        for (a, &f) in fine.iter().enumerate() {
            out.view_mut((a * m, 0), (m, m)).copy_from(&self.symbol(f, base));
        }
        out
    }
}

/// Adds the line integrals of the coarse Whitney function on edge `(a, b)` of the
/// coarse triangle `tri` (coarse indices) along all nine fine edges inside it.
fn add_whitney_triangle(
    weights: &mut BTreeMap<(usize, usize, i32, i32), f64>,
    tri: [(i32, i32); 3],
    edge: (usize, usize),
    coarse: SubgridId,
) {
    // Whitney line integrals are affine invariant, so index coordinates suffice.
    let xy = tri.map(|(k, l)| [2.0 * k as f64, 2.0 * l as f64]);
    let bary = |p: (i32, i32)| -> [f64; 3] {
        let (_, g) = fem::barycentric_gradients(xy);
        let d = [p.0 as f64 - xy[0][0], p.1 as f64 - xy[0][1]];
        let l1 = g[1][0] * d[0] + g[1][1] * d[1];
        let l2 = g[2][0] * d[0] + g[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    };
    let mut fine_pts = Vec::with_capacity(6);
    for i in 0..3 {
        let (k, l) = tri[i];
        fine_pts.push((2 * k, 2 * l));
        let (k2, l2) = tri[(i + 1) % 3];
        fine_pts.push((k + k2, l + l2));
    }
    for (ia, &p) in fine_pts.iter().enumerate() {
        for &q in &fine_pts[ia + 1..] {
            let (dk, dl) = (q.0 - p.0, q.1 - p.1);
            let adjacent = matches!((dk, dl), (1, 0) | (-1, 0) | (0, 1) | (0, -1) | (1, 1) | (-1, -1));
            if !adjacent {
                continue;
            }
            let (sub, start, sign) = lattice_edge(p, q);
            let val = sign * fem::whitney_line_integral(xy, edge, bary(p), bary(q));
            let key = (sub.number() - 1, coarse.number() - 1, start.0, start.1);
            // Edges shared by two coarse triangles get the same value from both.
            weights.insert(key, val);
        }
    }
}
