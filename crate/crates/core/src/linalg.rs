//! Dense linear algebra for small square matrices.
//!
//! Everything the stability and bifurcation machinery needs lives here:
//! LU factorization with partial pivoting (determinants, linear solves) and
//! real eigenvalues via balancing, elimination to Hessenberg form and Francis
//! double-shift QR iteration. Matrices in this problem domain stay small
//! (augmented dimensions of a few dozen at most), so the implementations
//! favour clarity over blocking.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// A pivot collapsed during elimination. Carries the ratio of the
    /// smallest to the largest pivot magnitude as a cheap condition estimate.
    Singular { condition_estimate: f64 },
    /// QR iteration failed to deflate an eigenvalue within the iteration cap.
    EigenvaluesNotConverged { remaining: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { condition_estimate } => write!(
                f,
                "matrix is numerically singular (pivot ratio {condition_estimate:.3e})"
            ),
            LinalgError::EigenvaluesNotConverged { remaining } => write!(
                f,
                "QR iteration did not converge ({remaining} eigenvalues unresolved)"
            ),
        }
    }
}

impl core::error::Error for LinalgError {}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a row-major closure.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.n);
        assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn induced_one_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.n {
            let mut col = 0.0;
            for i in 0..self.n {
                col += self[(i, j)].abs();
            }
            best = best.max(col);
        }
        best
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> f64 {
        let (lu, sign) = match self.lu() {
            Some(f) => f,
            None => return 0.0,
        };
        let mut det = sign;
        for i in 0..self.n {
            det *= lu[(i, i)];
        }
        det
    }

    /// Solve `self * x = b`. Fails with a condition estimate when a pivot
    /// vanishes relative to the largest one.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut a = self.clone();
        let mut x: Vec<f64> = b.to_vec();
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = a[(col, col)].abs();
            for r in col + 1..n {
                if a[(r, col)].abs() > pivot_val {
                    pivot_val = a[(r, col)].abs();
                    pivot_row = r;
                }
            }
            max_pivot = max_pivot.max(pivot_val);
            min_pivot = min_pivot.min(pivot_val);
            if pivot_val <= f64::EPSILON * max_pivot.max(1e-300) {
                return Err(LinalgError::Singular {
                    condition_estimate: if max_pivot > 0.0 { min_pivot / max_pivot } else { 0.0 },
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(pivot_row, j)];
                    a[(pivot_row, j)] = tmp;
                }
                x.swap(col, pivot_row);
            }
            let inv = 1.0 / a[(col, col)];
            for r in col + 1..n {
                let factor = a[(r, col)] * inv;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[(r, j)] -= factor * a[(col, j)];
                }
                x[r] -= factor * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut acc = x[col];
            for j in col + 1..n {
                acc -= a[(col, j)] * x[j];
            }
            x[col] = acc / a[(col, col)];
        }
        Ok(x)
    }

    fn lu(&self) -> Option<(Matrix, f64)> {
        let n = self.n;
        let mut a = self.clone();
        let mut sign = 1.0;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = a[(col, col)].abs();
            for r in col + 1..n {
                if a[(r, col)].abs() > pivot_val {
                    pivot_val = a[(r, col)].abs();
                    pivot_row = r;
                }
            }
            if pivot_val == 0.0 {
                return None;
            }
            if pivot_row != col {
                sign = -sign;
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(pivot_row, j)];
                    a[(pivot_row, j)] = tmp;
                }
            }
            let inv = 1.0 / a[(col, col)];
            for r in col + 1..n {
                let factor = a[(r, col)] * inv;
                a[(r, col)] = factor;
                for j in col + 1..n {
                    a[(r, j)] -= factor * a[(col, j)];
                }
            }
        }
        Some((a, sign))
    }

    /// All eigenvalues as complex numbers, via balancing, elimination to
    /// upper Hessenberg form and double-shift QR iteration.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, LinalgError> {
        let mut h = self.clone();
        h.balance();
        h.hessenberg();
        h.hqr()
    }

    /// In-place balancing (diagonal similarity scaling by powers of two).
    fn balance(&mut self) {
        let n = self.n;
        const RADIX: f64 = 2.0;
        let sqrdx = RADIX * RADIX;
        loop {
            let mut done = true;
            for i in 0..n {
                let mut r = 0.0;
                let mut c = 0.0;
                for j in 0..n {
                    if j != i {
                        c += self[(j, i)].abs();
                        r += self[(i, j)].abs();
                    }
                }
                if c != 0.0 && r != 0.0 {
                    let mut g = r / RADIX;
                    let mut f = 1.0;
                    let s = c + r;
                    let mut c_acc = c;
                    while c_acc < g {
                        f *= RADIX;
                        c_acc *= sqrdx;
                    }
                    g = r * RADIX;
                    while c_acc > g {
                        f /= RADIX;
                        c_acc /= sqrdx;
                    }
                    if (c_acc + r) / f < 0.95 * s {
                        done = false;
                        let ginv = 1.0 / f;
                        for j in 0..n {
                            self[(i, j)] *= ginv;
                        }
                        for j in 0..n {
                            self[(j, i)] *= f;
                        }
                    }
                }
            }
            if done {
                break;
            }
        }
    }

    /// Reduce to upper Hessenberg form by elimination with pivoting.
    fn hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        for m in 1..n - 1 {
            let mut x = 0.0;
            let mut pivot = m;
            for j in m..n {
                if self[(j, m - 1)].abs() > x.abs() {
                    x = self[(j, m - 1)];
                    pivot = j;
                }
            }
            if pivot != m {
                for j in m - 1..n {
                    let tmp = self[(pivot, j)];
                    self[(pivot, j)] = self[(m, j)];
                    self[(m, j)] = tmp;
                }
                for j in 0..n {
                    let tmp = self[(j, pivot)];
                    self[(j, pivot)] = self[(j, m)];
                    self[(j, m)] = tmp;
                }
            }
            if x != 0.0 {
                for i in m + 1..n {
                    let mut y = self[(i, m - 1)];
                    if y != 0.0 {
                        y /= x;
                        for j in m..n {
                            let sub = y * self[(m, j)];
                            self[(i, j)] -= sub;
                        }
                        for j in 0..n {
                            let add = y * self[(j, i)];
                            self[(j, m)] += add;
                        }
                    }
                    self[(i, m - 1)] = 0.0;
                }
            }
        }
    }

    /// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
    fn hqr(&mut self) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.n;
        let mut eigs = vec![Complex64::new(0.0, 0.0); n];
        if n == 0 {
            return Ok(eigs);
        }
        let mut anorm = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                anorm += self[(i, j)].abs();
            }
        }
        if anorm == 0.0 {
            return Ok(eigs);
        }
        let mut nn = n as isize - 1;
        let mut t = 0.0;
        while nn >= 0 {
            let mut its = 0;
            loop {
                // Look for a negligible subdiagonal element.
                let mut l = nn;
                while l >= 1 {
                    let s = self[(l as usize - 1, l as usize - 1)].abs()
                        + self[(l as usize, l as usize)].abs();
                    let s = if s == 0.0 { anorm } else { s };
                    if self[(l as usize, l as usize - 1)].abs() + s == s {
                        self[(l as usize, l as usize - 1)] = 0.0;
                        break;
                    }
                    l -= 1;
                }
                let x = self[(nn as usize, nn as usize)];
                if l == nn {
                    eigs[nn as usize] = Complex64::new(x + t, 0.0);
                    nn -= 1;
                    break;
                }
                let y = self[(nn as usize - 1, nn as usize - 1)];
                let w = self[(nn as usize, nn as usize - 1)] * self[(nn as usize - 1, nn as usize)];
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let z = q.abs().sqrt();
                    let x_sh = x + t;
                    if q >= 0.0 {
                        let z = p + if p >= 0.0 { z } else { -z };
                        let first = x_sh + z;
                        let second = if z != 0.0 { x_sh - w / z } else { first };
                        eigs[nn as usize - 1] = Complex64::new(first, 0.0);
                        eigs[nn as usize] = Complex64::new(second, 0.0);
                    } else {
                        eigs[nn as usize - 1] = Complex64::new(x_sh + p, z);
                        eigs[nn as usize] = Complex64::new(x_sh + p, -z);
                    }
                    nn -= 2;
                    break;
                }
                if its == 60 {
                    return Err(LinalgError::EigenvaluesNotConverged {
                        remaining: nn as usize + 1,
                    });
                }
                let (mut x, mut y, mut w) = (x, y, w);
                if its == 10 || its == 20 || its == 30 || its == 40 || its == 50 {
                    // Exceptional shift.
                    t += x;
                    for i in 0..=nn as usize {
                        self[(i, i)] -= x;
                    }
                    let s = self[(nn as usize, nn as usize - 1)].abs()
                        + self[(nn as usize - 1, nn as usize - 2)].abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }
                its += 1;
                // Find two consecutive small subdiagonal elements.
                let mut m = nn - 2;
                let (mut p, mut q, mut r);
                loop {
                    let mu = m as usize;
                    let z = self[(mu, mu)];
                    let rr = x - z;
                    let ss = y - z;
                    p = (rr * ss - w) / self[(mu + 1, mu)] + self[(mu, mu + 1)];
                    q = self[(mu + 1, mu + 1)] - z - rr - ss;
                    r = self[(mu + 2, mu + 1)];
                    let s = p.abs() + q.abs() + r.abs();
                    p /= s;
                    q /= s;
                    r /= s;
                    if m == l {
                        break;
                    }
                    let u = self[(mu, mu - 1)].abs() * (q.abs() + r.abs());
                    let v = p.abs()
                        * (self[(mu - 1, mu - 1)].abs() + z.abs() + self[(mu + 1, mu + 1)].abs());
                    if u + v == v {
                        break;
                    }
                    m -= 1;
                }
                for i in (m + 2)..=nn {
                    self[(i as usize, i as usize - 2)] = 0.0;
                    if i > m + 2 {
                        self[(i as usize, i as usize - 3)] = 0.0;
                    }
                }
                // Double QR step over rows l..nn and columns l..nn.
                for k in m..nn {
                    let ku = k as usize;
                    if k != m {
                        p = self[(ku, ku - 1)];
                        q = self[(ku + 1, ku - 1)];
                        r = if k != nn - 1 { self[(ku + 2, ku - 1)] } else { 0.0 };
                        x = p.abs() + q.abs() + r.abs();
                        if x != 0.0 {
                            p /= x;
                            q /= x;
                            r /= x;
                        }
                    }
                    let mut s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s != 0.0 {
                        if k == m {
                            if l != m {
                                self[(ku, ku - 1)] = -self[(ku, ku - 1)];
                            }
                        } else {
                            self[(ku, ku - 1)] = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        let z = r / s;
                        q /= p;
                        r /= p;
                        for j in ku..=nn as usize {
                            let mut pp = self[(ku, j)] + q * self[(ku + 1, j)];
                            if k != nn - 1 {
                                pp += r * self[(ku + 2, j)];
                                self[(ku + 2, j)] -= pp * z;
                            }
                            self[(ku + 1, j)] -= pp * y;
                            self[(ku, j)] -= pp * x;
                        }
                        let mmin = if nn < k + 3 { nn as usize } else { ku + 3 };
                        for i in l as usize..=mmin {
                            let mut pp = x * self[(i, ku)] + y * self[(i, ku + 1)];
                            if k != nn - 1 {
                                pp += z * self[(i, ku + 2)];
                                self[(i, ku + 2)] -= pp * r;
                            }
                            self[(i, ku + 1)] -= pp * q;
                            self[(i, ku)] -= pp;
                        }
                    }
                }
            }
        }
        Ok(eigs)
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Maximum absolute entry of a vector.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Sum of absolute entries of a vector.
pub fn one_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}
