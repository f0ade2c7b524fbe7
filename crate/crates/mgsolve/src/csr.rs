//! Compressed sparse row matrices.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Builds from per-row entry lists; duplicate columns are summed.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let start = cols.len();
            for (c, v) in row {
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, trips: &[(u32, u32, f64)]) -> Self {
        let mut rows = vec![Vec::new(); nrows];
        for &(r, c, v) in trips {
            rows[r as usize].push((c, v));
        }
        Self::from_rows(ncols, rows)
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&(j as u32)) {
            Ok(p) => v[p],
            Err(_) => 0.0,
        }
    }

    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (c, v) = self.row(i);
        c.iter().zip(v).map(|(&j, &a)| a * x[j as usize]).sum()
    }

    /// `y = A x`.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_into(x, &mut y);
        y
    }

    /// `r = b - A x`.
    pub fn residual_into(&self, x: &[f64], b: &[f64], r: &mut [f64]) {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = b[i] - self.row_dot(i, x);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            count[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            count[i + 1] += count[i];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let p = next[j as usize];
                cols[p] = i as u32;
                vals[p] = a;
                next[j as usize] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |a_ij - a_ji| / max |a_ij|`, covering pattern asymmetry as well.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        let mut d: f64 = 0.0;
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d = d.max((a - t.get(i, j as usize)).abs());
            }
            let (c, v) = t.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d = d.max((a - self.get(i, j as usize)).abs());
            }
        }
        d / self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                m[(i, j as usize)] += a;
            }
        }
        m
    }
}
