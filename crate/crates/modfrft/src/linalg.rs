//! Small dense complex linear algebra: Householder least squares and
//! Hessenberg QR eigenvalues.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Sum of squared moduli of all entries, i.e. trace(AᴴA).
    pub fn gram_trace(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }
}

/// Outcome of a least-squares solve.
#[derive(Clone, Debug)]
pub struct LeastSquares<T> {
    pub solution: Vec<Complex<T>>,
    /// ‖Ax − b‖₂ of the original (unregularized) system.
    pub residual: T,
}

/// Minimizes ‖Ax − b‖₂ through Householder QR.
///
/// Fails with `RankDeficient` when a pivot falls below `rank_tol` times the
/// largest pivot, and `InsufficientSamples` when there are fewer rows than
/// columns.
pub fn lstsq<T: Real>(a: &Matrix<T>, b: &[Complex<T>], rank_tol: T) -> Result<LeastSquares<T>> {
    if b.len() != a.rows {
        return Err(Error::LengthMismatch { expected: a.rows, got: b.len() });
    }
    if a.rows < a.cols {
        return Err(Error::InsufficientSamples { needed: a.cols, have: a.rows });
    }
    let solution = householder_solve(a.clone(), b.to_vec(), rank_tol)?;
    let residual = residual_norm(a, &solution, b);
    Ok(LeastSquares { solution, residual })
}

/// Tikhonov-regularized least squares: minimizes ‖Ax − b‖² + ridge·‖x‖².
///
/// Solved as the stacked system [A; √ridge·I] so the normal equations are never
/// formed. `residual` is measured on the unregularized system.
pub fn ridge_lstsq<T: Real>(a: &Matrix<T>, b: &[Complex<T>], ridge: T) -> Result<LeastSquares<T>> {
    if b.len() != a.rows {
        return Err(Error::LengthMismatch { expected: a.rows, got: b.len() });
    }
    let (m, n) = (a.rows, a.cols);
    let s = ridge.max(T::zero()).sqrt();
    let mut aug = Matrix::zeros(m + n, n);
    aug.data[..m * n].copy_from_slice(&a.data);
    for j in 0..n {
        aug.set(m + j, j, Complex::new(s, T::zero()));
    }
    let mut rhs = b.to_vec();
    rhs.resize(m + n, Complex::zero());
    let solution = householder_solve(aug, rhs, T::zero())?;
    let residual = residual_norm(a, &solution, b);
    Ok(LeastSquares { solution, residual })
}

fn residual_norm<T: Real>(a: &Matrix<T>, x: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.mul_vec(x).iter().zip(b).fold(T::zero(), |acc, (p, q)| acc + (p - q).norm_sqr()).sqrt()
}

fn householder_solve<T: Real>(mut a: Matrix<T>, mut b: Vec<Complex<T>>, rank_tol: T) -> Result<Vec<Complex<T>>> {
    let (m, n) = (a.rows, a.cols);
    let mut v = vec![Complex::<T>::zero(); m];
    for j in 0..n {
        let mut norm_sq = T::zero();
        for i in j..m {
            norm_sq += a.get(i, j).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == T::zero() {
            continue;
        }
        let x0 = a.get(j, j);
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::one() };
        let alpha = -phase * norm;
        for i in j..m {
            v[i] = a.get(i, j);
        }
        v[j] -= alpha;
        let vnorm_sq = (j..m).fold(T::zero(), |acc, i| acc + v[i].norm_sqr());
        if vnorm_sq == T::zero() {
            continue;
        }
        let two = lit::<T>(2.0) / vnorm_sq;
        for c in j..n {
            let dot = (j..m).fold(Complex::zero(), |acc, i| acc + v[i].conj() * a.get(i, c));
            let f = dot * two;
            for i in j..m {
                let val = a.get(i, c) - v[i] * f;
                a.set(i, c, val);
            }
        }
        let dot = (j..m).fold(Complex::zero(), |acc, i| acc + v[i].conj() * b[i]);
        let f = dot * two;
        for i in j..m {
            b[i] -= v[i] * f;
        }
    }

    let max_pivot = (0..n).fold(T::zero(), |acc, i| acc.max(a.get(i, i).norm()));
    if max_pivot == T::zero() {
        return Err(Error::RankDeficient);
    }
    let mut x = vec![Complex::<T>::zero(); n];
    for i in (0..n).rev() {
        let pivot = a.get(i, i);
        if pivot.norm() <= rank_tol * max_pivot {
            return Err(Error::RankDeficient);
        }
        let mut acc = b[i];
        for c in i + 1..n {
            acc -= a.get(i, c) * x[c];
        }
        x[i] = acc / pivot;
    }
    Ok(x)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
/// Wilkinson shifts and deflation.
///
/// `tol` is the relative subdiagonal threshold for deflation; `max_iter` bounds
/// the sweeps spent on any single eigenvalue.
pub fn hessenberg_eigenvalues<T: Real>(mut h: Matrix<T>, tol: T, max_iter: usize) -> Result<Vec<Complex<T>>> {
    let n = h.rows;
    assert_eq!(n, h.cols, "square matrix expected");
    let tol = tol.max(T::epsilon() * lit(4.0));
    let scale = h.gram_trace().sqrt();
    let mut eig = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h.get(l, l - 1).norm();
            let mut diag = h.get(l, l).norm() + h.get(l - 1, l - 1).norm();
            if diag == T::zero() {
                diag = scale;
            }
            if sub <= tol * diag {
                h.set(l, l - 1, Complex::zero());
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig.push(h.get(hi, hi));
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence { iterations: max_iter });
        }

        let mu = if iter % 11 == 10 {
            h.get(hi, hi) + Complex::new(lit::<T>(0.75) * h.get(hi, hi - 1).norm(), T::zero())
        } else {
            wilkinson_shift(h.get(hi - 1, hi - 1), h.get(hi - 1, hi), h.get(hi, hi - 1), h.get(hi, hi))
        };

        for k in l..=hi {
            let d = h.get(k, k) - mu;
            h.set(k, k, d);
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let a = h.get(k, k);
            let b = h.get(k + 1, k);
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == T::zero() { (Complex::one(), Complex::zero()) } else { (a / r, b / r) };
            for col in k..=hi {
                let x = h.get(k, col);
                let y = h.get(k + 1, col);
                h.set(k, col, c.conj() * x + s.conj() * y);
                h.set(k + 1, col, -s * x + c * y);
            }
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.into_iter().enumerate() {
            let k = l + idx;
            for row in l..=(k + 1).min(hi) {
                let x = h.get(row, k);
                let y = h.get(row, k + 1);
                h.set(row, k, x * c + y * s);
                h.set(row, k + 1, -x * s.conj() + y * c.conj());
            }
        }
        for k in l..=hi {
            let d = h.get(k, k) + mu;
            h.set(k, k, d);
        }
    }
    eig.push(h.get(0, 0));
    eig.reverse();
    Ok(eig)
}

fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = lit::<T>(0.5);
    let m = (a + d) * half;
    let disc = (((a - d) * half).powi(2) + b * c).sqrt();
    let l1 = m + disc;
    let l2 = m - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn square_system_is_solved_exactly() {
        let a = Matrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 + if i == j { 5.0 } else { 0.0 }, (i as f64) - (j as f64)));
        let x = vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.25)];
        let b = a.mul_vec(&x);
        let sol = lstsq(&a, &b, 1e-13).unwrap();
        for (p, q) in sol.solution.iter().zip(&x) {
            assert!((p - q).norm() < 1e-12);
        }
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn overdetermined_matches_normal_equations() {
        // 4x2 real system, solution from hand-solved normal equations.
        let rows = [[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        let a = Matrix::from_fn(4, 2, |i, j| c(rows[i][j], 0.0));
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let sol = lstsq(&a, &b, 1e-13).unwrap();
        assert!((sol.solution[0] - c(0.9, 0.0)).norm() < 1e-12);
        assert!((sol.solution[1] - c(0.9, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_rank_deficient() {
        let a = Matrix::<f64>::zeros(3, 2);
        let b = vec![C::zero(); 3];
        assert_eq!(lstsq(&a, &b, 1e-12).unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn ridge_shrinks_towards_zero() {
        let a = Matrix::from_fn(2, 1, |_, _| c(1.0, 0.0));
        let b = vec![c(2.0, 0.0), c(2.0, 0.0)];
        // minimizer of 2(x-2)^2 + r x^2 is 4/(2+r)
        let sol = ridge_lstsq(&a, &b, 2.0).unwrap();
        assert!((sol.solution[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_companion_match_roots() {
        let roots = [c(0.0, 1.0), c(-1.0, 0.0), c(0.5, -0.5), c(2.0, 0.1)];
        // monic polynomial coefficients p[0]=1, p[k] for z^{n-k}
        let mut p = vec![c(1.0, 0.0)];
        for r in &roots {
            let mut next = p.clone();
            next.push(C::zero());
            for k in 1..next.len() {
                next[k] -= r * p[k - 1];
            }
            p = next;
        }
        let n = roots.len();
        let comp = Matrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -p[j + 1]
            } else if i == j + 1 {
                c(1.0, 0.0)
            } else {
                C::zero()
            }
        });
        let eig = hessenberg_eigenvalues(comp, 1e-14, 500).unwrap();
        for r in &roots {
            let best = eig.iter().map(|e| (e - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "root {r} missing, best {best}");
        }
    }

    #[test]
    fn triangular_matrix_returns_diagonal() {
        let m = Matrix::from_fn(3, 3, |i, j| if j >= i { c((i + 1) as f64, j as f64) } else { C::zero() });
        let mut eig = hessenberg_eigenvalues(m, 1e-14, 10).unwrap();
        eig.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_eq!(eig, vec![c(1.0, 0.0), c(2.0, 1.0), c(3.0, 2.0)]);
    }

    #[test]
    fn rotation_block_needs_complex_shift() {
        // Real rotation: eigenvalues ±j, never found by a real-shift iteration.
        let m = Matrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(-1.0, 0.0),
            (1, 0) => c(1.0, 0.0),
            _ => C::zero(),
        });
        let eig = hessenberg_eigenvalues(m, 1e-14, 100).unwrap();
        assert!(eig.iter().any(|e| (e - c(0.0, 1.0)).norm() < 1e-12));
        assert!(eig.iter().any(|e| (e - c(0.0, -1.0)).norm() < 1e-12));
    }
}
