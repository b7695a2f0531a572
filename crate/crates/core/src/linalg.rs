//! Small dense complex linear algebra used by the finite-section checks:
//! LU with partial pivoting, triangular substitution, power iteration for
//! the largest singular value, and Sturm-sequence bisection for symmetric
//! tridiagonal eigenvalues.

use num_complex::Complex64;

/// Pivots with modulus at or below this are treated as singular.
pub const PIVOT_TOL: f64 = 1e-14;
pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `self − λI`.
    pub fn shifted(&self, lambda: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            let v = m.get(i, i) - lambda;
            m.set(i, i, v);
        }
        m
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.dim).all(|i| self.row(i)[i + 1..].iter().all(|&v| v == ZERO))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.dim).all(|i| self.row(i)[..i].iter().all(|&v| v == ZERO))
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn nonzeros(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v != ZERO {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Solves `self · x = b`. Triangular matrices use substitution; anything
    /// else goes through LU with partial pivoting. `None` when a pivot falls
    /// below [`PIVOT_TOL`].
    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        assert_eq!(b.len(), self.dim);
        if self.is_lower_triangular() {
            forward_substitute(self, b)
        } else if self.is_upper_triangular() {
            back_substitute(self, b)
        } else {
            Lu::factor(self)?.solve(b)
        }
    }
}

fn forward_substitute(a: &DenseMatrix, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.dim();
    let mut x = vec![ZERO; n];
    for i in 0..n {
        let row = a.row(i);
        let s: Complex64 = (0..i).map(|j| row[j] * x[j]).sum();
        if row[i].norm() <= PIVOT_TOL {
            return None;
        }
        x[i] = (b[i] - s) / row[i];
    }
    Some(x)
}

fn back_substitute(a: &DenseMatrix, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.dim();
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let row = a.row(i);
        let s: Complex64 = (i + 1..n).map(|j| row[j] * x[j]).sum();
        if row[i].norm() <= PIVOT_TOL {
            return None;
        }
        x[i] = (b[i] - s) / row[i];
    }
    Some(x)
}

/// LU factorization with partial pivoting, `PA = LU` stored in place.
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &DenseMatrix) -> Option<Lu> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu.get(i, k).norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= PIVOT_TOL {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let f = lu.get(i, k) / pivot;
                if f == ZERO {
                    continue;
                }
                lu.set(i, k, f);
                for j in k + 1..n {
                    let v = lu.get(i, j) - f * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Some(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        let n = self.lu.dim();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: Complex64 = (0..i).map(|j| self.lu.get(i, j) * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| self.lu.get(i, j) * y[j]).sum();
            y[i] = (y[i] - s) / self.lu.get(i, i);
        }
        if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Some(y)
        } else {
            None
        }
    }
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    let sq: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    if sq.is_finite() && sq > f64::MIN_POSITIVE / f64::EPSILON {
        return sq.sqrt();
    }
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * x.iter().map(|v| (v.norm() / m).powi(2)).sum::<f64>().sqrt()
}

/// Row-banded view for repeated products with `A` and `A*`: each row of
/// `A` and of `A*` is stored densely between its first and last nonzero.
pub struct SparseMatrix {
    rows: Vec<(usize, Vec<Complex64>)>,
    adjoint_rows: Vec<(usize, Vec<Complex64>)>,
}

fn banded_rows(n: usize, entry: impl Fn(usize, usize) -> Complex64) -> Vec<(usize, Vec<Complex64>)> {
    (0..n)
        .map(|i| {
            let nz: Vec<usize> = (0..n).filter(|&j| entry(i, j) != ZERO).collect();
            match (nz.first(), nz.last()) {
                (Some(&lo), Some(&hi)) => (lo, (lo..=hi).map(|j| entry(i, j)).collect()),
                _ => (0, Vec::new()),
            }
        })
        .collect()
}

fn banded_matvec(rows: &[(usize, Vec<Complex64>)], x: &[Complex64], out: &mut [Complex64]) {
    for (o, (start, vals)) in out.iter_mut().zip(rows) {
        let xs = &x[*start..*start + vals.len()];
        let (mut re, mut im) = (0.0, 0.0);
        for (a, b) in vals.iter().zip(xs) {
            re += a.re * b.re - a.im * b.im;
            im += a.re * b.im + a.im * b.re;
        }
        *o = Complex64::new(re, im);
    }
}

impl SparseMatrix {
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let n = a.dim();
        SparseMatrix {
            rows: banded_rows(n, |i, j| a.get(i, j)),
            adjoint_rows: banded_rows(n, |i, j| a.get(j, i).conj()),
        }
    }

    pub fn matvec(&self, x: &[Complex64], out: &mut [Complex64]) {
        banded_matvec(&self.rows, x, out);
    }

    pub fn adjoint_matvec(&self, x: &[Complex64], out: &mut [Complex64]) {
        banded_matvec(&self.adjoint_rows, x, out);
    }
}

/// Largest singular value by power iteration on `A*A`, started from the
/// normalized all-ones vector. Stops once the estimate changes by less than
/// [`POWER_TOL`] relative, or after [`POWER_MAX_ITER`] iterations.
pub fn largest_singular_value(a: &DenseMatrix) -> f64 {
    let n = a.dim();
    if n == 0 {
        return 0.0;
    }
    let sparse = SparseMatrix::from_dense(a);
    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut av = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    let mut sigma = 0.0f64;
    for _ in 0..POWER_MAX_ITER {
        sparse.matvec(&v, &mut av);
        let est = vec_norm(&av);
        sparse.adjoint_matvec(&av, &mut w);
        let wn = vec_norm(&w);
        if wn == 0.0 {
            return est.max(sigma);
        }
        let inv = 1.0 / wn;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi * inv;
        }
        let done = (est - sigma).abs() <= POWER_TOL * est.max(f64::MIN_POSITIVE);
        sigma = est;
        if done {
            break;
        }
    }
    sigma
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly
/// below `x` (negative pivots of the LDLᵀ recurrence).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        let prev = if q == 0.0 { f64::EPSILON * (off.get(i.wrapping_sub(1)).map_or(1.0, |e| e.abs()).max(1.0)) } else { q };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / prev };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues, ascending, by bisection on Gershgorin bounds.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1));
    if n == 0 {
        return Vec::new();
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = off.get(i).map_or(0.0, |e| e.abs()) + if i > 0 { off[i - 1].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = 1e-12 * (hi - lo).abs().max(1.0);
    lo -= pad;
    hi += pad;
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if b - a <= 2.0 * f64::EPSILON * mid.abs().max(1.0) {
                    break;
                }
                if sturm_count(diag, off, mid) <= k {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn lu_solves_general_system() {
        let mut a = DenseMatrix::zeros(3);
        let vals = [[2.0, 1.0, 1.0], [4.0, -6.0, 0.0], [-2.0, 7.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, c(vals[i][j]));
            }
        }
        let b = [c(5.0), c(-2.0), c(9.0)];
        let x = a.solve(&b).unwrap();
        for (xi, e) in x.iter().zip([1.0, 1.0, 2.0]) {
            assert!((xi - c(e)).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_reports_none() {
        let mut a = DenseMatrix::zeros(2);
        a.set(0, 1, c(1.0));
        a.set(1, 1, c(1.0));
        assert!(a.solve(&[c(1.0), c(0.0)]).is_none());
    }

    #[test]
    fn triangular_fast_path() {
        let mut a = DenseMatrix::identity(3).shifted(c(0.5));
        a.set(1, 0, c(1.0));
        a.set(2, 1, c(1.0));
        assert!(a.is_lower_triangular());
        let x = a.solve(&[c(1.0), c(0.0), c(0.0)]).unwrap();
        assert!((x[2] - c(8.0)).norm() < 1e-12);
    }

    #[test]
    fn power_iteration_diagonal() {
        let mut a = DenseMatrix::zeros(3);
        a.set(0, 0, c(1.0));
        a.set(1, 1, Complex64::new(0.0, -3.0));
        a.set(2, 2, c(2.0));
        assert!((largest_singular_value(&a) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn sturm_clean_chain() {
        let n = 50;
        let evals = tridiagonal_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]);
        for (k, ev) in evals.iter().enumerate() {
            let exact = -2.0 * ((k + 1) as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((ev - exact).abs() < 1e-12);
        }
        assert_eq!(sturm_count(&[1.0, 3.0], &[-1.0], 0.0), 0);
        assert_eq!(sturm_count(&[1.0, 3.0], &[-1.0], 1.0), 1);
        assert_eq!(sturm_count(&[1.0, 3.0], &[-1.0], 4.0), 2);
    }
}
