//! Uniformly refined equilateral triangle.

use std::io::Write;

use trilfa::lattice::{LatticeBasis, Point, SubgridId};
use trilfa::oracle::{cell_triangles, lattice_edge};

use crate::error::{MgError, Result};

pub type Vertex = (i32, i32);

pub const MAX_LEVEL: usize = 10;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshEdge {
    pub sub: SubgridId,
    /// Start vertex; the edge points along `sub.direction()`.
    pub start: Vertex,
    pub verts: [u32; 2],
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    pub level: usize,
    /// Number of edge segments per side, `2^level`.
    pub n: i32,
    pub vertices: Vec<Vertex>,
    pub positions: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[u32; 3]>,
    pub edges: Vec<MeshEdge>,
    pub vertex_boundary: Vec<bool>,
    pub edge_boundary: Vec<bool>,
    edge_lookup: Vec<u32>,
}

impl TriMesh {
    pub fn new(level: usize) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(MgError::Levels {
                level,
                min: 0,
                max: MAX_LEVEL,
            });
        }
        let n = 1i32 << level;
        let h = 1.0 / n as f64;
        let basis = LatticeBasis::equilateral(h);
        let mut vertices = Vec::new();
        for k in 0..=n {
            for l in 0..=k {
                vertices.push((k, l));
            }
        }
        let positions = vertices
            .iter()
            .map(|&(k, l)| basis.position(k as f64, l as f64))
            .collect();
        let mut mesh = Self {
            level,
            n,
            vertex_boundary: vertices.iter().map(|&v| on_boundary(n, v)).collect(),
            vertices,
            positions,
            triangles: Vec::new(),
            edges: Vec::new(),
            edge_boundary: Vec::new(),
            edge_lookup: vec![NONE; 3 * ((n + 1) * (n + 1)) as usize],
        };
        for k in 0..n {
            for l in 0..=k {
                for tri in cell_triangles(k, l) {
                    if tri.iter().all(|&v| mesh.contains(v)) {
                        let ids = tri.map(|v| mesh.vertex_index(v).unwrap() as u32);
                        mesh.triangles.push(ids);
                    }
                }
            }
        }
        for sub in SubgridId::ALL {
            let (dk, dl) = sub.direction();
            for &(k, l) in &mesh.vertices.clone() {
                let end = (k + dk, l + dl);
                if mesh.contains(end) {
                    let slot = mesh.edge_slot(sub, (k, l));
                    mesh.edge_lookup[slot] = mesh.edges.len() as u32;
                    mesh.edges.push(MeshEdge {
                        sub,
                        start: (k, l),
                        verts: [
                            mesh.vertex_index((k, l)).unwrap() as u32,
                            mesh.vertex_index(end).unwrap() as u32,
                        ],
                    });
                    mesh.edge_boundary
                        .push(on_boundary(n, (k, l)) && on_boundary(n, end) && same_side(n, (k, l), end));
                }
            }
        }
        Ok(mesh)
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn contains(&self, (k, l): Vertex) -> bool {
        0 <= l && l <= k && k <= self.n
    }

    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        self.contains(v)
            .then(|| (v.0 * (v.0 + 1) / 2 + v.1) as usize)
    }

    fn edge_slot(&self, sub: SubgridId, (k, l): Vertex) -> usize {
        let m = (self.n + 1) as usize;
        (sub.number() - 1) * m * m + k as usize * m + l as usize
    }

    /// Edge of subgrid `sub` starting at `start`, if it lies in the mesh.
    pub fn edge_index(&self, sub: SubgridId, start: Vertex) -> Option<usize> {
        if !(0..=self.n).contains(&start.0) || !(0..=self.n).contains(&start.1) {
            return None;
        }
        let e = self.edge_lookup[self.edge_slot(sub, start)];
        (e != NONE).then_some(e as usize)
    }

    /// Edge joining two neighbouring vertices with the sign of `(a -> b)` relative to
    /// its global orientation.
    pub fn edge_between(&self, a: Vertex, b: Vertex) -> Option<(usize, f64)> {
        let (sub, start, sign) = lattice_edge(a, b);
        self.edge_index(sub, start).map(|e| (e, sign))
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vertex; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_positions(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|i| self.positions[i as usize])
    }

    /// Plain-text dump: a `vertices`, `triangles` and `edges` section, each headed by
    /// its count, one record per line (`k l x y boundary`, `i j k`, `i j boundary`).
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# level {} n {}", self.level, self.n)?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for (i, &(k, l)) in self.vertices.iter().enumerate() {
            let p = self.positions[i];
            writeln!(w, "{k} {l} {:.17e} {:.17e} {}", p[0], p[1], self.vertex_boundary[i] as u8)?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "edges {}", self.edges.len())?;
        for (e, b) in self.edges.iter().zip(&self.edge_boundary) {
            writeln!(w, "{} {} {}", e.verts[0], e.verts[1], *b as u8)?;
        }
        Ok(())
    }
}

fn on_boundary(n: i32, (k, l): Vertex) -> bool {
    l == 0 || k == n || l == k
}

fn same_side(n: i32, a: Vertex, b: Vertex) -> bool {
    (a.1 == 0 && b.1 == 0) || (a.0 == n && b.0 == n) || (a.0 == a.1 && b.0 == b.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_refinement() {
        for level in 0..6 {
            let m = TriMesh::new(level).unwrap();
            let n = m.n as usize;
            assert_eq!(m.triangles.len(), 4usize.pow(level as u32));
            assert_eq!(m.vertices.len(), (n + 1) * (n + 2) / 2);
            // Euler characteristic of a disc.
            assert_eq!(m.vertices.len() + m.triangles.len(), m.edges.len() + 1);
            assert_eq!(m.vertex_boundary.iter().filter(|&&b| b).count(), 3 * n);
            assert_eq!(m.edge_boundary.iter().filter(|&&b| b).count(), 3 * n);
        }
    }

    #[test]
    fn triangles_are_congruent_and_counter_clockwise() {
        let m = TriMesh::new(3).unwrap();
        let h = m.h();
        for t in 0..m.triangles.len() {
            let [a, b, c] = m.triangle_positions(t);
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            assert!((det - 0.75f64.sqrt() * h * h).abs() < 1e-14);
            for (p, q) in [(a, b), (b, c), (c, a)] {
                assert!(((p[0] - q[0]).hypot(p[1] - q[1]) - h).abs() < 1e-14);
            }
        }
        assert!(TriMesh::new(MAX_LEVEL + 1).is_err());
    }

    #[test]
    fn corners() {
        let m = TriMesh::new(2).unwrap();
        let top = m.positions[m.vertex_index((4, 4)).unwrap()];
        assert!((top[0] - 0.5).abs() < 1e-15 && (top[1] - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.positions[m.vertex_index((4, 0)).unwrap()], [1.0, 0.0]);
        assert_eq!(m.edge_between((2, 1), (1, 1)), Some((m.edge_index(SubgridId::First, (1, 1)).unwrap(), -1.0)));
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("triangles 16"));
    }
}
