//! Triangular lattice geometry.
//!
//! Grid points are `x = (k + d1) h1 e1 + (l + d2) h2 e2` for integer `(k, l)` and a
//! fractional offset `(d1, d2)` that is zero for vertices and half-integer for the
//! three edge subgrids. Frequencies live in the coordinates of the reciprocal basis,
//! so a Fourier mode evaluated at index position `(k + d1, l + d2)` is
//! `exp(i (theta1 (k + d1) + theta2 (l + d2)))` regardless of the lattice angle.
//!
//! The equilateral lattice uses `e1 = (1, 0)` and `e2 = (-1/2, sqrt(3)/2)`: the
//! lines spanned by `e1` and `e2` meet at 60 degrees and `e1 + e2` is the third
//! edge direction, so every vertex `(k, l)` has the six neighbours
//! `(k +- 1, l)`, `(k, l +- 1)`, `(k +- 1, l +- 1)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Non-orthogonal unit basis of the grid and its reciprocal (frequency) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBasis {
    pub e1: Point,
    pub e2: Point,
    pub e1p: Point,
    pub e2p: Point,
    pub h1: f64,
    pub h2: f64,
}

/// Solves `dot(e_i, e'_j) = delta_ij` for the reciprocal basis.
pub fn reciprocal_basis(e1: Point, e2: Point) -> Result<(Point, Point)> {
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    if det.abs() < 1e-12 {
        return Err(Error::DegenerateBasis { det });
    }
    // Rows of the inverse of [e1 e2] (columns) are the reciprocal vectors.
    let e1p = [e2[1] / det, -e2[0] / det];
    let e2p = [-e1[1] / det, e1[0] / det];
    Ok((e1p, e2p))
}

impl LatticeBasis {
    pub fn new(e1: Point, e2: Point, h1: f64, h2: f64) -> Result<Self> {
        let (e1p, e2p) = reciprocal_basis(e1, e2)?;
        Ok(Self {
            e1,
            e2,
            e1p,
            e2p,
            h1,
            h2,
        })
    }

    /// Equilateral triangulation with mesh size `h` (see module docs for the axes).
    pub fn equilateral(h: f64) -> Self {
        Self::new([1.0, 0.0], [-0.5, 0.75f64.sqrt()], h, h)
            .expect("equilateral basis is non-degenerate")
    }

    /// Largest deviation of `dot(e_i, e'_j)` from the identity.
    pub fn reciprocity_defect(&self) -> f64 {
        let pairs = [
            (self.e1, self.e1p, 1.0),
            (self.e1, self.e2p, 0.0),
            (self.e2, self.e1p, 0.0),
            (self.e2, self.e2p, 1.0),
        ];
        pairs
            .iter()
            .map(|&(a, b, want)| (dot(a, b) - want).abs())
            .fold(0.0, f64::max)
    }

    /// Cartesian coordinates of fractional index position `(k + d1, l + d2)`.
    pub fn position(&self, a: f64, b: f64) -> Point {
        [
            a * self.h1 * self.e1[0] + b * self.h2 * self.e2[0],
            a * self.h1 * self.e1[1] + b * self.h2 * self.e2[1],
        ]
    }
}

/// One of the three edge subgrids. Subgrid 1 holds edges along `e1`, subgrid 2
/// along `e2`, subgrid 3 along `e1 + e2`; each edge is indexed by its start vertex
/// and oriented towards increasing lattice index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubgridId {
    First,
    Second,
    Third,
}

impl SubgridId {
    pub const ALL: [SubgridId; 3] = [SubgridId::First, SubgridId::Second, SubgridId::Third];

    pub fn delta(self) -> (f64, f64) {
        match self {
            SubgridId::First => (0.5, 0.0),
            SubgridId::Second => (0.0, 0.5),
            SubgridId::Third => (0.5, 0.5),
        }
    }

    /// Lattice direction of the edge, i.e. end vertex minus start vertex.
    pub fn direction(self) -> (i32, i32) {
        match self {
            SubgridId::First => (1, 0),
            SubgridId::Second => (0, 1),
            SubgridId::Third => (1, 1),
        }
    }

    pub fn number(self) -> usize {
        match self {
            SubgridId::First => 1,
            SubgridId::Second => 2,
            SubgridId::Third => 3,
        }
    }

    pub fn from_number(id: usize) -> Option<Self> {
        match id {
            1 => Some(SubgridId::First),
            2 => Some(SubgridId::Second),
            3 => Some(SubgridId::Third),
            _ => None,
        }
    }
}

/// Where the unknowns of one variable live on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    Node,
    Edge(SubgridId),
}

impl Location {
    pub fn delta(self) -> (f64, f64) {
        match self {
            Location::Node => (0.0, 0.0),
            Location::Edge(s) => s.delta(),
        }
    }
}

pub fn node_position(basis: &LatticeBasis, loc: Location, k: i32, l: i32) -> Point {
    let (d1, d2) = loc.delta();
    basis.position(k as f64 + d1, l as f64 + d2)
}

/// Maps an angle into `(-pi, pi]`.
pub fn reduce_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x % two_pi;
    if y <= -PI {
        y += two_pi;
    } else if y > PI {
        y -= two_pi;
    }
    y
}

/// `sign(x)` with the convention `sign(0) = +1`.
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// A frequency in reciprocal-basis coordinates, each component in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub theta1: f64,
    pub theta2: f64,
}

impl Frequency {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        let ok = |t: f64| t > -PI && t <= PI;
        if !(ok(theta1) && ok(theta2)) {
            return Err(Error::FrequencyDomain {
                theta1,
                theta2,
                domain: "(-pi, pi]^2",
            });
        }
        Ok(Self { theta1, theta2 })
    }

    pub fn reduced(theta1: f64, theta2: f64) -> Self {
        Self {
            theta1: reduce_angle(theta1),
            theta2: reduce_angle(theta2),
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::reduced(self.theta1 * factor, self.theta2 * factor)
    }

    /// Phase `theta . (a, b)` of a mode at fractional index position `(a, b)`.
    pub fn phase(self, a: f64, b: f64) -> f64 {
        self.theta1 * a + self.theta2 * b
    }

    /// True when both components agree modulo `2 pi` to within `tol`.
    pub fn congruent(self, other: Frequency, tol: f64) -> bool {
        reduce_angle(self.theta1 - other.theta1).abs() < tol
            && reduce_angle(self.theta2 - other.theta2).abs() < tol
    }

    fn in_low_square(self, half_width: f64) -> bool {
        let ok = |t: f64| t > -half_width && t <= half_width;
        ok(self.theta1) && ok(self.theta2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicKind {
    TwoGrid,
    ThreeGrid,
}

/// Frequencies coupled by standard coarsening.
///
/// Two-grid members are ordered by `alpha1 + 2 alpha2`. Three-grid members are
/// ordered by `4 (n + 2 m) + (i + 2 j)`, so consecutive groups of four are the
/// fine-level harmonics of one 2h frequency `theta^00_nm`, and the groups follow
/// the two-grid ordering of the 2h-level harmonics.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSet {
    pub base: Frequency,
    pub members: Vec<Frequency>,
    pub kind: HarmonicKind,
}

fn shifted(base: Frequency, a1: f64, a2: f64, step: f64) -> Frequency {
    Frequency::reduced(
        base.theta1 - a1 * sign(base.theta1) * step,
        base.theta2 - a2 * sign(base.theta2) * step,
    )
}

pub fn harmonics_2h(theta00: Frequency) -> Result<HarmonicSet> {
    if !theta00.in_low_square(PI / 2.0) {
        return Err(Error::FrequencyDomain {
            theta1: theta00.theta1,
            theta2: theta00.theta2,
            domain: "(-pi/2, pi/2]^2",
        });
    }
    let members = (0..4)
        .map(|idx| shifted(theta00, (idx % 2) as f64, (idx / 2) as f64, PI))
        .collect();
    Ok(HarmonicSet {
        base: theta00,
        members,
        kind: HarmonicKind::TwoGrid,
    })
}

pub fn harmonics_4h(theta00: Frequency) -> Result<HarmonicSet> {
    if !theta00.in_low_square(PI / 4.0) {
        return Err(Error::FrequencyDomain {
            theta1: theta00.theta1,
            theta2: theta00.theta2,
            domain: "(-pi/4, pi/4]^2",
        });
    }
    let mut members = Vec::with_capacity(16);
    for outer in 0..4 {
        let coarse = shifted(theta00, (outer % 2) as f64, (outer / 2) as f64, PI / 2.0);
        for inner in 0..4 {
            members.push(shifted(coarse, (inner % 2) as f64, (inner / 2) as f64, PI));
        }
    }
    Ok(HarmonicSet {
        base: theta00,
        members,
        kind: HarmonicKind::ThreeGrid,
    })
}

impl HarmonicSet {
    /// The 2h-level frequencies `theta^00_nm` of a three-grid set (the first member
    /// of each group of four).
    pub fn coarse_bases(&self) -> Vec<Frequency> {
        match self.kind {
            HarmonicKind::TwoGrid => vec![self.base],
            HarmonicKind::ThreeGrid => self.members.iter().step_by(4).copied().collect(),
        }
    }
}

/// Uniform `n x n` sample of the open square `(-w, w)^2`.
///
/// Points sit at cell centres. For odd `n` the centre tick would land on zero, so
/// the ticks are shifted by a further quarter cell; no tick ever hits `0` or `+-w`.
pub fn sample_square(half_width: f64, n: usize) -> Vec<Frequency> {
    let step = 2.0 * half_width / n as f64;
    let shift = if n % 2 == 1 { 0.75 } else { 0.5 };
    let ticks: Vec<f64> = (0..n)
        .map(|j| -half_width + (j as f64 + shift) * step)
        .collect();
    let mut out = Vec::with_capacity(n * n);
    for &t2 in &ticks {
        for &t1 in &ticks {
            out.push(Frequency {
                theta1: t1,
                theta2: t2,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Point, b: Point) -> bool {
        (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14
    }

    #[test]
    fn orthonormal_basis_is_self_reciprocal() {
        let (a, b) = reciprocal_basis([1.0, 0.0], [0.0, 1.0]).unwrap();
        assert!(close(a, [1.0, 0.0]) && close(b, [0.0, 1.0]));
    }

    #[test]
    fn sixty_degree_reciprocal() {
        let s3 = 3f64.sqrt();
        let (a, b) = reciprocal_basis([1.0, 0.0], [0.5, s3 / 2.0]).unwrap();
        assert!(close(a, [1.0, -1.0 / s3]), "{a:?}");
        assert!(close(b, [0.0, 2.0 / s3]), "{b:?}");
    }

    #[test]
    fn parallel_basis_is_degenerate() {
        assert!(matches!(
            reciprocal_basis([1.0, 0.0], [1.0, 0.0]),
            Err(Error::DegenerateBasis { .. })
        ));
    }

    #[test]
    fn equilateral_edges_have_unit_length() {
        let b = LatticeBasis::equilateral(1.0);
        for s in SubgridId::ALL {
            let (dk, dl) = s.direction();
            let p = b.position(dk as f64, dl as f64);
            assert!((dot(p, p).sqrt() - 1.0).abs() < 1e-14);
        }
        assert!(b.reciprocity_defect() < 1e-14);
    }

    #[test]
    fn node_positions() {
        let eq = LatticeBasis::equilateral(1.0);
        assert!(close(node_position(&eq, Location::Node, 0, 0), [0.0, 0.0]));
        assert!(close(
            node_position(&eq, Location::Edge(SubgridId::First), 0, 0),
            [0.5, 0.0]
        ));
        // With the 60-degree vector pair the third subgrid offset lands at
        // (1/2, 0) + (1/4, sqrt(3)/4).
        let s3 = 3f64.sqrt();
        let sixty = LatticeBasis::new([1.0, 0.0], [0.5, s3 / 2.0], 1.0, 1.0).unwrap();
        assert!(close(
            node_position(&sixty, Location::Edge(SubgridId::Third), 0, 0),
            [0.75, s3 / 4.0]
        ));
        // On the equilateral lattice it is the midpoint of the (0,0)-(1,1) edge.
        assert!(close(
            node_position(&eq, Location::Edge(SubgridId::Third), 0, 0),
            [0.25, s3 / 4.0]
        ));
    }

    #[test]
    fn two_grid_harmonics_examples() {
        let q = PI / 4.0;
        let hs = harmonics_2h(Frequency::new(q, q).unwrap()).unwrap();
        let want = [(q, q), (-3.0 * q, q), (q, -3.0 * q), (-3.0 * q, -3.0 * q)];
        for (m, w) in hs.members.iter().zip(want) {
            assert!((m.theta1 - w.0).abs() < 1e-15 && (m.theta2 - w.1).abs() < 1e-15);
        }

        let hs = harmonics_2h(Frequency::new(0.0, 0.0).unwrap()).unwrap();
        let want = [(0.0, 0.0), (PI, 0.0), (0.0, PI), (PI, PI)];
        for (m, w) in hs.members.iter().zip(want) {
            assert_eq!((m.theta1, m.theta2), w);
        }

        let e = PI / 8.0;
        let hs = harmonics_2h(Frequency::new(-e, e).unwrap()).unwrap();
        let want = [(-e, e), (7.0 * e, e), (-e, -7.0 * e), (7.0 * e, -7.0 * e)];
        for (m, w) in hs.members.iter().zip(want) {
            assert!((m.theta1 - w.0).abs() < 1e-15 && (m.theta2 - w.1).abs() < 1e-15);
        }
    }

    #[test]
    fn harmonic_domains_are_checked() {
        assert!(harmonics_2h(Frequency::new(2.0, 0.1).unwrap()).is_err());
        assert!(harmonics_4h(Frequency::new(1.0, 0.1).unwrap()).is_err());
        assert!(Frequency::new(-PI, 0.0).is_err());
        assert!(Frequency::new(PI, 0.0).is_ok());
    }

    #[test]
    fn three_grid_harmonics_example() {
        let e = PI / 8.0;
        let hs = harmonics_4h(Frequency::new(e, e).unwrap()).unwrap();
        assert_eq!(hs.members.len(), 16);
        assert_eq!(hs.members[0], Frequency::new(e, e).unwrap());
        for a in 0..16 {
            for b in 0..a {
                assert!(!hs.members[a].congruent(hs.members[b], 1e-9));
            }
        }
        // Doubling the 2h-level bases gives the 2h harmonics of 2 theta00.
        let doubled = harmonics_2h(Frequency::new(2.0 * e, 2.0 * e).unwrap()).unwrap();
        for (c, d) in hs.coarse_bases().iter().zip(&doubled.members) {
            assert!(c.scaled(2.0).congruent(*d, 1e-12));
        }
    }

    #[test]
    fn sampling_avoids_special_lines() {
        for n in [8, 32, 33] {
            for w in [PI / 2.0, PI / 4.0] {
                let s = sample_square(w, n);
                assert_eq!(s.len(), n * n);
                for f in s {
                    for t in [f.theta1, f.theta2] {
                        assert!(t.abs() > 1e-9 && t.abs() < w - 1e-9);
                    }
                }
            }
        }
    }
}
