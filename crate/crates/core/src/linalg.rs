//! Dense linear algebra at desk scale.
//!
//! Matrices are row-major `Vec`s of length `n * n`. The routines here cover
//! what the solver and the stability analysis need: LU with partial pivoting
//! over `f64` and `Complex64`, a full symmetric eigendecomposition
//! (Householder tridiagonalization + implicit QL, after JAMA), and an
//! eigenvalue-only path for large symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    swaps: Vec<usize>,
}

impl<T> Lu<T>
where
    T: num_complex::ComplexFloat<Real = f64>,
{
    /// Factors `a`. Fails with [`Error::SingularMatrix`] when a pivot falls
    /// below `n * eps * max|a_ij|`.
    pub fn factor(mut a: Vec<T>, n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
        }
        let scale = a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if !scale.is_finite() {
            return Err(Error::NonFinite { what: "matrix" });
        }
        let tiny = scale * f64::EPSILON * (n.max(1) as f64);
        let mut swaps = Vec::with_capacity(n);
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= tiny || best == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
            }
            swaps.push(piv);
            let inv = T::one() / a[k * n + k];
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n + k + 1..k * n + n];
            for row in bottom.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l != T::zero() {
                    for (x, &p) in row[k + 1..].iter_mut().zip(pivot_row) {
                        *x = *x - l * p;
                    }
                }
            }
        }
        Ok(Lu { n, lu: a, swaps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for (k, &p) in self.swaps.iter().enumerate() {
            b.swap(k, p);
        }
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s = row.iter().zip(&b[..i]).fold(T::zero(), |acc, (&l, &x)| acc + l * x);
            b[i] = b[i] - s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = row.iter().zip(&b[i + 1..]).fold(T::zero(), |acc, (&u, &x)| acc + u * x);
            b[i] = (b[i] - s) / self.lu[i * n + i];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Dense inverse, row-major.
    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = T::zero());
            col[j] = T::one();
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

/// Max-row-sum (infinity) norm of a row-major matrix.
pub fn norm_inf<T: num_complex::ComplexFloat<Real = f64>>(a: &[T], n: usize) -> f64 {
    a.chunks_exact(n)
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a real symmetric matrix.
///
/// `values` are ascending; `vectors` is row-major with row `k` holding the
/// unit eigenvector of `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn new(a: &[f64], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "symmetric matrix" });
        }
        if n == 0 {
            return Ok(SymmetricEigen { n, values: Vec::new(), vectors: Vec::new() });
        }
        let mut v = a.to_vec();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        tred2(&mut v, &mut d, &mut e, n);
        // tql2 rotates columns of V; work on the transpose so rotations touch rows.
        let mut vt = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                vt[j * n + i] = v[i * n + j];
            }
        }
        tql2(&mut vt, &mut d, &mut e, n);
        Ok(SymmetricEigen { n, values: d, vectors: vt })
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }
}

fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)` produced by [`tred2`]; `vt` holds
/// the transposed accumulated transformation and is rotated row-wise.
fn tql2(vt: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_next = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                vt.swap(i * n + j, k * n + j);
            }
        }
    }
}

/// Eigenvalues (ascending) of a real symmetric matrix, without vectors.
///
/// Only the lower triangle of `a` is read. The Householder reduction fuses
/// each rank-2 update with the next symmetric matrix-vector product so the
/// trailing block is streamed once per step; this is the path used for the
/// large Monte Carlo spectra.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    // Pending rank-2 update A <- A - v w' - w v' on indices >= first_pending.
    let mut pv = vec![0.0; n];
    let mut pw = vec![0.0; n];
    let mut pending = false;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n {
        if pending {
            let (vk, wk) = (pv[k], pw[k]);
            for i in k..n {
                a[i * n + k] -= pv[i] * wk + pw[i] * vk;
            }
        }
        d[k] = a[k * n + k];
        if k + 1 == n {
            break;
        }
        let lo = k + 1;
        let mut sq = 0.0;
        for i in lo..n {
            let x = a[i * n + k];
            v[i] = x;
            sq += x * x;
        }
        let norm = sq.sqrt();
        let x0 = v[lo];
        let reflect = lo + 1 < n && norm > 0.0 && sq - x0 * x0 > 0.0;
        let mut beta = 0.0;
        if reflect {
            let alpha = if x0 > 0.0 { -norm } else { norm };
            v[lo] = x0 - alpha;
            let vtv = 2.0 * (sq - x0 * alpha);
            beta = 2.0 / vtv;
            e[k] = alpha;
        } else {
            e[k] = x0;
        }
        p[lo..n].iter_mut().for_each(|x| *x = 0.0);
        for i in lo..n {
            let row = &mut a[i * n + lo..i * n + i + 1];
            let (off, diag) = row.split_at_mut(i - lo);
            if pending {
                let (pvi, pwi) = (pv[i], pw[i]);
                for ((x, &wj), &vj) in off.iter_mut().zip(&pw[lo..i]).zip(&pv[lo..i]) {
                    *x -= pvi * wj + pwi * vj;
                }
                diag[0] -= 2.0 * pvi * pwi;
            }
            if reflect {
                let vi = v[i];
                let mut dot = 0.0;
                for ((&x, &vj), pj) in off.iter().zip(&v[lo..i]).zip(p[lo..i].iter_mut()) {
                    dot += x * vj;
                    *pj += x * vi;
                }
                p[i] += dot + diag[0] * vi;
            }
        }
        if reflect {
            let mut vp = 0.0;
            for i in lo..n {
                p[i] *= beta;
                vp += v[i] * p[i];
            }
            let kk = 0.5 * beta * vp;
            for i in lo..n {
                pw[i] = p[i] - kk * v[i];
                pv[i] = v[i];
            }
            pending = true;
        } else {
            pending = false;
        }
    }
    e[n - 1] = 0.0;
    tridiagonal_eigenvalues(&mut d, &mut e)?;
    Ok(d)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e[0..n-1]` (`e[n-1]` ignored). Sorted ascending into `d`.
pub fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if e.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: e.len() });
    }
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::SingularMatrix);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn lu_solves_complex_system() {
        let n = 3;
        let a = vec![
            C64::new(2.0, 1.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(3.0, -1.0),
            C64::new(0.0, 2.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(4.0, 0.0),
        ];
        let x = vec![C64::new(1.0, 2.0), C64::new(-1.0, 0.5), C64::new(0.0, -3.0)];
        let b: Vec<C64> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect();
        let lu = Lu::factor(a, n).unwrap();
        let y = lu.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(Lu::factor(a, 2).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn lu_inverse_of_permutation_needs_pivoting() {
        let a = vec![0.0, 1.0, 1.0, 0.0];
        let inv = Lu::factor(a, 2).unwrap().inverse();
        assert_eq!(inv, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn eigen_decomposition_reconstructs() {
        for &n in &[1usize, 2, 5, 17, 40] {
            let a = random_symmetric(n, n as u64);
            let eig = SymmetricEigen::new(&a, n).unwrap();
            for k in 0..n {
                let v = eig.vector(k);
                let norm: f64 = v.iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-12);
                for i in 0..n {
                    let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                    assert!((av - eig.values[k] * v[i]).abs() < 1e-11, "n={n} k={k}");
                }
            }
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigenvalues_only_path_matches_full_decomposition() {
        for &n in &[1usize, 2, 3, 8, 33, 100] {
            let a = random_symmetric(n, 7 + n as u64);
            let full = SymmetricEigen::new(&a, n).unwrap().values;
            let fast = symmetric_eigenvalues(a, n).unwrap();
            for (x, y) in full.iter().zip(&fast) {
                assert!((x - y).abs() < 1e-11, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn eigenvalues_of_diagonal_and_block_structures() {
        let n = 4;
        let mut a = vec![0.0; n * n];
        a[0] = 3.0;
        a[5] = -1.0;
        a[10] = 2.0;
        a[15] = 0.5;
        let ev = symmetric_eigenvalues(a, n).unwrap();
        assert_eq!(ev, vec![-1.0, 0.5, 2.0, 3.0]);
        // 2x2 [[0, 1/2], [1/2, 0]] has eigenvalues -1/2, 1/2.
        let eig = SymmetricEigen::new(&[0.0, 0.5, 0.5, 0.0], 2).unwrap();
        assert!((eig.values[0] + 0.5).abs() < 1e-15 && (eig.values[1] - 0.5).abs() < 1e-15);
    }
}
