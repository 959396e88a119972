//! Discretized QVE instances and checkers for the structural assumptions.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

/// Absolute tolerance on `|s_xy - s_yx|`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A discretized QVE `-1/m = z + a + S m` on `n` points.
///
/// `(S u)_x = sum_y s_xy w_y u_y` with `w` the probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QveModel {
    n: usize,
    weights: Vec<f64>,
    a: Vec<f64>,
    s: Vec<f64>,
    op_norm: f64,
    kappa: f64,
}

/// Validates the inputs and builds a model. Weights are renormalized to sum
/// to one; a kernel that is symmetric within [`SYMMETRY_TOL`] is symmetrized
/// exactly. `s` is row-major `n x n`.
pub fn build_model(weights: Vec<f64>, a: Vec<f64>, s: Vec<f64>) -> Result<QveModel> {
    QveModel::new(weights, a, s)
}

impl QveModel {
    pub fn new(mut weights: Vec<f64>, a: Vec<f64>, mut s: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::EmptyModel);
        }
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.len() });
        }
        if s.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: s.len() });
        }
        if weights.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "weights" });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "field a" });
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "kernel" });
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &w)| w <= 0.0) {
            return Err(Error::NegativeEntry { what: "weights", index, value });
        }
        if let Some((index, &value)) = s.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::NegativeEntry { what: "kernel", index, value });
        }
        for x in 0..n {
            for y in x + 1..n {
                let defect = (s[x * n + y] - s[y * n + x]).abs();
                if defect > SYMMETRY_TOL {
                    return Err(Error::AsymmetricKernel { row: x, col: y, defect });
                }
                let mean = 0.5 * (s[x * n + y] + s[y * n + x]);
                s[x * n + y] = mean;
                s[y * n + x] = mean;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let op_norm = s
            .chunks_exact(n)
            .map(|row| row.iter().zip(&weights).map(|(s, w)| s * w).sum::<f64>())
            .fold(0.0, f64::max);
        let a_norm = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let kappa = a_norm + 2.0 * op_norm.sqrt();
        Ok(QveModel { n, weights, a, s, op_norm, kappa })
    }

    /// Midpoint sampling of a continuous profile on `[0, 1]` with uniform
    /// weights: `x_i = (i + 1/2) / n`.
    pub fn sample_continuous(
        n: usize,
        a: impl Fn(f64) -> f64,
        s: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let grid = midpoint_grid(n);
        let mut kernel = vec![0.0; n * n];
        for (i, &x) in grid.iter().enumerate() {
            for (j, &y) in grid.iter().enumerate() {
                kernel[i * n + j] = s(x, y);
            }
        }
        let field = grid.iter().map(|&x| a(x)).collect();
        QveModel::new(vec![1.0 / n as f64; n], field, kernel)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Row-major kernel.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn s_row(&self, x: usize) -> &[f64] {
        &self.s[x * self.n..(x + 1) * self.n]
    }

    pub fn s_at(&self, x: usize, y: usize) -> f64 {
        self.s[x * self.n + y]
    }

    /// `max_x sum_y s_xy w_y`.
    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    /// `||a||_inf + 2 ||S||^{1/2}`; the support of every component lies in
    /// `[-kappa, kappa]`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn a_norm_inf(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `(S u)_x = sum_y s_xy w_y u_y`.
    pub fn apply_s(&self, u: &[C64], out: &mut [C64]) {
        for (x, o) in out.iter_mut().enumerate() {
            *o = self
                .s_row(x)
                .iter()
                .zip(&self.weights)
                .zip(u)
                .fold(C64::new(0.0, 0.0), |acc, ((&s, &w), &u)| acc + u * (s * w));
        }
    }

    /// Row sums `(S 1)_x`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.s
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(&self.weights).map(|(s, w)| s * w).sum())
            .collect()
    }

    /// Measure-weighted average `<u> = sum_x w_x u_x`.
    pub fn mean(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.weights).map(|(u, w)| u * w).sum()
    }

    /// Partition of the points into classes with identical field value and
    /// identical kernel row. Points in one class satisfy the same scalar
    /// equation, so the unique solution is constant on each class.
    ///
    /// Returns `class_of[x]` and the representative of each class (its
    /// smallest index), classes ordered by representative.
    pub fn identical_rows(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.n;
        let key = |x: usize, y: usize| -> Ordering {
            self.a[x].total_cmp(&self.a[y]).then_with(|| {
                self.s_row(x)
                    .iter()
                    .zip(self.s_row(y))
                    .map(|(p, q)| p.total_cmp(q))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| key(x, y).then(x.cmp(&y)));
        let mut group_of = vec![0; n];
        let mut group_reps = Vec::new();
        for (pos, &x) in order.iter().enumerate() {
            if pos == 0 || key(order[pos - 1], x).is_ne() {
                group_reps.push(x);
            }
            group_of[x] = group_reps.len() - 1;
        }
        let mut by_rep: Vec<usize> = (0..group_reps.len()).collect();
        by_rep.sort_by_key(|&g| group_reps[g]);
        let mut relabel = vec![0; group_reps.len()];
        for (k, &g) in by_rep.iter().enumerate() {
            relabel[g] = k;
        }
        let class_of = group_of.iter().map(|&g| relabel[g]).collect();
        let reps = by_rep.iter().map(|&g| group_reps[g]).collect();
        (class_of, reps)
    }

    /// Model on the classes of [`identical_rows`](Self::identical_rows):
    /// class weights are the summed point weights and the kernel is read off
    /// the representatives.
    pub fn quotient(&self, class_of: &[usize], reps: &[usize]) -> Result<QveModel> {
        let k = reps.len();
        let mut weights = vec![0.0; k];
        for (x, &c) in class_of.iter().enumerate() {
            weights[c] += self.weights[x];
        }
        let a = reps.iter().map(|&r| self.a[r]).collect();
        let mut s = vec![0.0; k * k];
        for (i, &r) in reps.iter().enumerate() {
            for (j, &q) in reps.iter().enumerate() {
                s[i * k + j] = self.s_at(r, q);
            }
        }
        QveModel::new(weights, a, s)
    }
}

/// Midpoints `(i + 1/2) / n` of the uniform partition of `[0, 1]`.
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// Report of the advisory assumption checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Smallest `K` with the `K`-th kernel power entrywise positive.
    pub primitivity_k: Option<usize>,
    /// `(c, eps)` with `s_xy >= c > 0` whenever `|x - y| <= eps`.
    pub diagonal_strip: Option<(f64, f64)>,
    /// Value of the component regularity integral at the probe epsilon.
    pub regularity_value: f64,
    pub regularity_eps: f64,
}

pub fn assumption_report(
    model: &QveModel,
    k_max: usize,
    strip_eps: f64,
    regularity_eps: f64,
) -> AssumptionReport {
    AssumptionReport {
        primitivity_k: check_primitivity(model, k_max),
        diagonal_strip: check_diagonal_positivity(model, strip_eps),
        regularity_value: regularity_probe(model, regularity_eps),
        regularity_eps,
    }
}

struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, words, bits: vec![0; n * words] }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] & (1 << (j % 64)) != 0
    }

    fn is_full(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j)))
    }

    /// Boolean product `self * rhs`.
    fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.n);
        for i in 0..self.n {
            let dst = i * out.words;
            for k in 0..self.n {
                if self.get(i, k) {
                    for (o, r) in out.bits[dst..dst + out.words].iter_mut().zip(rhs.row(k)) {
                        *o |= *r;
                    }
                }
            }
        }
        out
    }
}

/// Smallest `K <= k_max` such that the measure-weighted `K`-th power of the
/// kernel is entrywise positive. Since the weights are positive this only
/// depends on the zero pattern. The search stops early once the pattern
/// sequence repeats with period one or two, or past Wielandt's bound
/// `(n-1)^2 + 1`, beyond which no new `K` can appear.
pub fn check_primitivity(model: &QveModel, k_max: usize) -> Option<usize> {
    let n = model.n();
    let mut pattern = BitMatrix::zeros(n);
    for x in 0..n {
        for y in 0..n {
            if model.s_at(x, y) > 0.0 {
                pattern.set(x, y);
            }
        }
    }
    let limit = k_max.min((n - 1) * (n - 1) + 1);
    let mut prev: Option<Vec<u64>> = None;
    let mut power = BitMatrix { n, words: pattern.words, bits: pattern.bits.clone() };
    for k in 1..=limit {
        if power.is_full() {
            return Some(k);
        }
        let next = power.mul(&pattern);
        if next.bits == power.bits || prev.as_ref() == Some(&next.bits) {
            return None;
        }
        prev = Some(core::mem::replace(&mut power, next).bits);
    }
    None
}

/// Strip certificate: with grid points `x_i = (i + 1/2)/n`, returns
/// `(c, eps)` where `c = min { s_ij : |i - j| / n <= eps }` if `c > 0`.
pub fn check_diagonal_positivity(model: &QveModel, strip_eps: f64) -> Option<(f64, f64)> {
    if strip_eps.is_nan() || strip_eps <= 0.0 {
        return None;
    }
    let n = model.n();
    let reach = strip_eps * n as f64 + 1e-9;
    let mut c = f64::INFINITY;
    for x in 0..n {
        for y in 0..n {
            if (x.abs_diff(y) as f64) <= reach {
                c = c.min(model.s_at(x, y));
            }
        }
    }
    (c > 0.0).then_some((c, strip_eps))
}

/// `min_x sum_y w_y / (eps + (a_x - a_y)^2 + <(S_x - S_y)^2>)`.
pub fn regularity_probe(model: &QveModel, eps: f64) -> f64 {
    let n = model.n();
    let w = model.weights();
    let mut best = f64::INFINITY;
    for x in 0..n {
        let sx = model.s_row(x);
        let mut total = 0.0;
        for y in 0..n {
            let sy = model.s_row(y);
            let row_gap: f64 = sx
                .iter()
                .zip(sy)
                .zip(w)
                .map(|((p, q), w)| w * (p - q) * (p - q))
                .sum();
            let da = model.a()[x] - model.a()[y];
            total += w[y] / (eps + da * da + row_gap);
        }
        best = best.min(total);
    }
    best
}
