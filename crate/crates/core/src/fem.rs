//! Element matrices for linear Lagrange and lowest-order Whitney elements.

use crate::lattice::Point;

/// Area and barycentric gradients of the triangle `(a, b, c)`.
pub fn barycentric_gradients(tri: [Point; 3]) -> (f64, [Point; 3]) {
    let [a, b, c] = tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let grads = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    (0.5 * det.abs(), grads)
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `int grad(phi_i) . grad(phi_j)` for the three hat functions.
pub fn p1_stiffness(tri: [Point; 3]) -> [[f64; 3]; 3] {
    let (area, g) = barycentric_gradients(tri);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * dot(g[i], g[j]);
        }
    }
    k
}

/// `int phi_i d(phi_j)/dx_c` for component `c` (the first factor is the test function).
pub fn p1_gradient_coupling(tri: [Point; 3], c: usize) -> [[f64; 3]; 3] {
    let (area, g) = barycentric_gradients(tri);
    let mut b = [[0.0; 3]; 3];
    for row in b.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = g[j][c] * area / 3.0;
        }
    }
    b
}

/// Whitney function of the oriented edge `(a, b)` given by local vertex indices:
/// `lambda_a grad(lambda_b) - lambda_b grad(lambda_a)` evaluated at barycentric `lam`.
fn whitney_value(grads: &[Point; 3], edge: (usize, usize), lam: [f64; 3]) -> Point {
    let (a, b) = edge;
    [
        lam[a] * grads[b][0] - lam[b] * grads[a][0],
        lam[a] * grads[b][1] - lam[b] * grads[a][1],
    ]
}

/// Constant scalar rotation of the Whitney function of `(a, b)`.
fn whitney_rot(grads: &[Point; 3], edge: (usize, usize)) -> f64 {
    2.0 * cross(grads[edge.0], grads[edge.1])
}

/// `int rot(phi_e) rot(phi_f)` for Whitney functions of the listed oriented edges.
pub fn whitney_curlcurl(tri: [Point; 3], edges: [(usize, usize); 3]) -> [[f64; 3]; 3] {
    let (area, g) = barycentric_gradients(tri);
    let rot: Vec<f64> = edges.iter().map(|&e| whitney_rot(&g, e)).collect();
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * rot[i] * rot[j];
        }
    }
    k
}

/// `int phi_e . phi_f` via the edge-midpoint rule, which is exact for quadratics.
pub fn whitney_mass(tri: [Point; 3], edges: [(usize, usize); 3]) -> [[f64; 3]; 3] {
    let (area, g) = barycentric_gradients(tri);
    let quad = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
    let mut m = [[0.0; 3]; 3];
    for lam in quad {
        let vals: Vec<Point> = edges.iter().map(|&e| whitney_value(&g, e, lam)).collect();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += area / 3.0 * dot(vals[i], vals[j]);
            }
        }
    }
    m
}

/// Line integral of the Whitney function of `edge` along the oriented segment
/// `(p, q)` given in barycentric coordinates of the same triangle.
pub fn whitney_line_integral(tri: [Point; 3], edge: (usize, usize), p: [f64; 3], q: [f64; 3]) -> f64 {
    // The Whitney field is affine, so the midpoint rule is exact.
    let (_, g) = barycentric_gradients(tri);
    let mid = [
        0.5 * (p[0] + q[0]),
        0.5 * (p[1] + q[1]),
        0.5 * (p[2] + q[2]),
    ];
    let val = whitney_value(&g, edge, mid);
    let to_xy = |lam: [f64; 3]| -> Point {
        [
            lam[0] * tri[0][0] + lam[1] * tri[1][0] + lam[2] * tri[2][0],
            lam[0] * tri[0][1] + lam[1] * tri[1][1] + lam[2] * tri[2][1],
        ]
    };
    let (a, b) = (to_xy(p), to_xy(q));
    dot(val, [b[0] - a[0], b[1] - a[1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]];
    const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

    fn vertex(i: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        v
    }

    #[test]
    fn stiffness_rows_sum_to_zero() {
        let k = p1_stiffness(TRI);
        for row in k {
            assert!(row.iter().sum::<f64>().abs() < 1e-14);
        }
        assert!((k[0][0] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn whitney_dofs_are_kronecker() {
        for (i, &e) in EDGES.iter().enumerate() {
            for (j, &(a, b)) in EDGES.iter().enumerate() {
                let v = whitney_line_integral(TRI, e, vertex(a), vertex(b));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-14, "{i} {j} {v}");
            }
        }
    }

    #[test]
    fn curlcurl_diagonal_value() {
        let k = whitney_curlcurl(TRI, EDGES);
        assert!((k[0][0] - 4.0 / 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn mass_is_symmetric_positive() {
        let m = whitney_mass(TRI, EDGES);
        for i in 0..3 {
            assert!(m[i][i] > 0.0);
            for j in 0..3 {
                assert!((m[i][j] - m[j][i]).abs() < 1e-15);
            }
        }
    }
}
