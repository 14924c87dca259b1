//! Small dense complex matrices (Krylov projections, single-site operators,
//! test oracles). Row-major storage.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl SmallMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == C64::default() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.rows, self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::Linalg("singular matrix in dense solve".into()));
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                for j in 0..b.cols {
                    b.data.swap(k * b.cols + j, p * b.cols + j);
                }
            }
            let piv = a[(k, k)];
            for i in (k + 1)..n {
                let f = a[(i, k)] / piv;
                if f == C64::default() {
                    continue;
                }
                a[(i, k)] = f;
                for j in (k + 1)..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
                for j in 0..b.cols {
                    let bkj = b[(k, j)];
                    b[(i, j)] -= f * bkj;
                }
            }
        }
        for j in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = b[(i, j)];
                for k in (i + 1)..n {
                    s -= a[(i, k)] * b[(k, j)];
                }
                b[(i, j)] = s / a[(i, i)];
            }
        }
        Ok(b)
    }

    /// Matrix exponential by scaling and squaring with a degree-13 Padé
    /// approximant.
    pub fn expm(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        const THETA13: f64 = 5.371_920_351_148_152;
        const B: [f64; 14] = [
            64_764_752_532_480_000.0,
            32_382_376_266_240_000.0,
            7_771_770_303_897_600.0,
            1_187_353_796_428_800.0,
            129_060_195_264_000.0,
            10_559_470_521_600.0,
            670_442_572_800.0,
            33_522_128_640.0,
            1_323_241_920.0,
            40_840_800.0,
            960_960.0,
            16_380.0,
            182.0,
            1.0,
        ];
        let n = self.rows;
        let norm = self.norm_one();
        let s = if norm > THETA13 {
            (norm / THETA13).log2().ceil() as i32
        } else {
            0
        };
        let a = self.scaled(C64::new(0.5f64.powi(s), 0.0));
        let id = Self::identity(n);
        let a2 = a.matmul(&a);
        let a4 = a2.matmul(&a2);
        let a6 = a4.matmul(&a2);
        let c = |x: f64| C64::new(x, 0.0);

        let inner_u = a6
            .scaled(c(B[13]))
            .add(&a4.scaled(c(B[11])))
            .add(&a2.scaled(c(B[9])));
        let u_poly = a6
            .matmul(&inner_u)
            .add(&a6.scaled(c(B[7])))
            .add(&a4.scaled(c(B[5])))
            .add(&a2.scaled(c(B[3])))
            .add(&id.scaled(c(B[1])));
        let u = a.matmul(&u_poly);

        let inner_v = a6
            .scaled(c(B[12]))
            .add(&a4.scaled(c(B[10])))
            .add(&a2.scaled(c(B[8])));
        let v = a6
            .matmul(&inner_v)
            .add(&a6.scaled(c(B[6])))
            .add(&a4.scaled(c(B[4])))
            .add(&a2.scaled(c(B[2])))
            .add(&id.scaled(c(B[0])));

        let mut r = v
            .sub(&u)
            .solve(&v.add(&u))
            .expect("Padé denominator is nonsingular for scaled arguments");
        for _ in 0..s {
            r = r.matmul(&r);
        }
        r
    }
}

impl Index<(usize, usize)> for SmallMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(t [[0, -1], [1, 0]]) = [[cos t, -sin t], [sin t, cos t]]
        let t = 2.7;
        let g = SmallMatrix::from_rows(&[vec![c(0.0, 0.0), c(-t, 0.0)], vec![c(t, 0.0), c(0.0, 0.0)]]);
        let e = g.expm();
        assert!((e[(0, 0)] - c(t.cos(), 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c(-t.sin(), 0.0)).norm() < 1e-14);
        assert!((e[(1, 0)] - c(t.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_large_norm_diagonal() {
        let g = SmallMatrix::from_rows(&[vec![c(-30.0, 5.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.5, -2.0)]]);
        let e = g.expm();
        assert!((e[(0, 0)] - c(-30.0, 5.0).exp()).norm() < 1e-25);
        assert!(((e[(1, 1)] - c(1.5, -2.0).exp()) / c(1.5, -2.0).exp()).norm() < 1e-13);
    }

    #[test]
    fn expm_matches_taylor_series_on_nonnormal_matrix() {
        let g = SmallMatrix::from_rows(&[
            vec![c(0.1, 0.2), c(1.0, 0.0), c(0.0, 0.3)],
            vec![c(0.0, 0.0), c(-0.4, 0.0), c(2.0, -1.0)],
            vec![c(0.5, 0.0), c(0.0, 0.0), c(-1.0, 0.5)],
        ]);
        let mut term = SmallMatrix::identity(3);
        let mut sum = SmallMatrix::identity(3);
        for k in 1..60 {
            term = term.matmul(&g).scaled(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        assert!(g.expm().max_abs_diff(&sum) < 1e-13);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = SmallMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(1.0, -1.0)],
        ]);
        let x = SmallMatrix::from_rows(&[vec![c(1.0, 2.0)], vec![c(-1.0, 0.5)]]);
        let b = a.matmul(&x);
        assert!(a.solve(&b).unwrap().max_abs_diff(&x) < 1e-14);
        assert!(SmallMatrix::zeros(2, 2).solve(&b).is_err());
    }
}
