//! Prolongation between consecutive refinement levels. Restriction is the transpose.

use std::collections::BTreeMap;

use trilfa::discretization::ProblemKind;
use trilfa::fem;

use crate::assembly::Layout;
use crate::csr::Csr;
use crate::mesh::{TriMesh, Vertex};

/// Coarse parents of fine vertex `(k, l)` with their linear-interpolation weights.
pub fn nodal_parents((k, l): Vertex) -> Vec<(Vertex, f64)> {
    match (k % 2 == 0, l % 2 == 0) {
        (true, true) => vec![((k / 2, l / 2), 1.0)],
        (false, true) => vec![(((k - 1) / 2, l / 2), 0.5), (((k + 1) / 2, l / 2), 0.5)],
        (true, false) => vec![((k / 2, (l - 1) / 2), 0.5), ((k / 2, (l + 1) / 2), 0.5)],
        (false, false) => vec![(((k - 1) / 2, (l - 1) / 2), 0.5), (((k + 1) / 2, (l + 1) / 2), 0.5)],
    }
}

/// Linear interpolation of every variable, restricted to unknowns present in the
/// layouts.
pub fn nodal_prolongation(fine: &Layout, coarse: &Layout) -> Csr {
    let mut trips = Vec::new();
    for (i, &v) in fine.dofs.iter().enumerate() {
        let var = fine.var_of(i);
        for (c, w) in nodal_parents(v) {
            if let Some(j) = coarse.index(var, c) {
                trips.push((i as u32, j as u32, w));
            }
        }
    }
    Csr::from_triplets(fine.len(), coarse.len(), &trips)
}

/// Canonical edge interpolation: the fine degree of freedom is the line integral of
/// the coarse Whitney field along the fine edge.
pub fn edge_prolongation(fine_mesh: &TriMesh, coarse_mesh: &TriMesh, fine: &Layout, coarse: &Layout) -> Csr {
    let mut weights: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let local = [(0, 1), (1, 2), (0, 2)];
    let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for t in 0..coarse_mesh.triangles.len() {
        let cv = coarse_mesh.triangle_vertices(t);
        let xy = coarse_mesh.triangle_positions(t);
        // Coarse edge unknowns of this triangle with their orientation signs.
        let cedges: Vec<Option<(usize, f64)>> = local
            .iter()
            .map(|&(a, b)| {
                let (sub, start, sign) = trilfa::oracle::lattice_edge(cv[a], cv[b]);
                coarse.index(sub.number() - 1, start).map(|j| (j, sign))
            })
            .collect();
        // The six fine vertices of the triangle with barycentric coordinates.
        let mut pts: Vec<(Vertex, [f64; 3])> = Vec::with_capacity(6);
        for a in 0..3 {
            pts.push(((2 * cv[a].0, 2 * cv[a].1), corners[a]));
        }
        for &(a, b) in &local {
            let lam = [0, 1, 2].map(|i| 0.5 * (corners[a][i] + corners[b][i]));
            pts.push(((cv[a].0 + cv[b].0, cv[a].1 + cv[b].1), lam));
        }
        for p in 0..6 {
            for q in p + 1..6 {
                let (vp, lp) = pts[p];
                let (vq, lq) = pts[q];
                let d = (vq.0 - vp.0, vq.1 - vp.1);
                if ![(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)].contains(&d) {
                    continue;
                }
                let (sub, start, sign) = trilfa::oracle::lattice_edge(vp, vq);
                let Some(i) = fine.index(sub.number() - 1, start) else {
                    continue;
                };
                let (from, to) = if sign > 0.0 { (lp, lq) } else { (lq, lp) };
                for (e, ce) in local.iter().zip(&cedges) {
                    let Some((j, s)) = *ce else { continue };
                    let w = s * fem::whitney_line_integral(xy, *e, from, to);
                    if w.abs() > 1e-14 {
                        weights.insert((i as u32, j as u32), w);
                    }
                }
            }
        }
    }
    let trips: Vec<(u32, u32, f64)> = weights.into_iter().map(|((i, j), w)| (i, j, w)).collect();
    debug_assert!(fine_mesh.level == coarse_mesh.level + 1);
    Csr::from_triplets(fine.len(), coarse.len(), &trips)
}

pub fn prolongation(fine_mesh: &TriMesh, coarse_mesh: &TriMesh, fine: &Layout, coarse: &Layout) -> Csr {
    match fine.kind {
        ProblemKind::Stokes => nodal_prolongation(fine, coarse),
        ProblemKind::CurlCurl => edge_prolongation(fine_mesh, coarse_mesh, fine, coarse),
    }
}
