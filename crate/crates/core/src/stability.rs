//! The stability operator `F = |m| S |m|` and its Perron data.
//!
//! `F` acts on `L^2` of the model's measure. It is handled through the
//! symmetric matrix `K_xy = sqrt(w_x) |m_x| s_xy |m_y| sqrt(w_y)`, which is
//! similar to `F`. Vectors passed to and returned from this module are in
//! function coordinates unless stated otherwise.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{symmetric_eigenvalues, Lu, SymmetricEigen};
use crate::model::QveModel;
use crate::{Error, Result, C64};

/// Gaps below this are treated as a degenerate top eigenvalue.
pub const DEGENERATE_GAP: f64 = 1e-12;
/// Smallest gap accepted by the deflated solve.
pub const MIN_RESOLVENT_GAP: f64 = 1e-8;

/// `F` for one solution, in symmetric form.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOperator {
    pub n: usize,
    /// Measure weights.
    pub weights: Vec<f64>,
    /// Row-major symmetric `K`.
    pub k: Vec<f64>,
}

impl StabilityOperator {
    /// Function coordinates to `K` coordinates: `u -> sqrt(w) u`.
    pub fn to_symmetric(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.weights).map(|(v, w)| v * w.sqrt()).collect()
    }

    /// `K` coordinates to function coordinates: `u -> u / sqrt(w)`.
    pub fn to_function(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.weights).map(|(v, w)| v / w.sqrt()).collect()
    }

    /// Kernel of `F` with respect to the measure: `K_xy / sqrt(w_x w_y)`.
    pub fn kernel(&self, x: usize, y: usize) -> f64 {
        self.k[x * self.n + y] / (self.weights[x] * self.weights[y]).sqrt()
    }

    /// `F u` in function coordinates.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let t = self.to_symmetric(u);
        let n = self.n;
        let ku: Vec<f64> = (0..n).map(|x| self.k[x * n..(x + 1) * n].iter().zip(&t).map(|(a, b)| a * b).sum()).collect();
        self.to_function(&ku)
    }

    /// `<u v>` with respect to the measure.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights.iter().zip(u.iter().zip(v)).map(|(w, (a, b))| w * a * b).sum()
    }
}

/// Builds `F` at a solution `m`.
pub fn build_f(model: &QveModel, m: &[C64]) -> Result<StabilityOperator> {
    let n = model.n();
    if m.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.len() });
    }
    if let Some(index) = m.iter().position(|v| v.norm() == 0.0) {
        return Err(Error::ZeroComponent { index });
    }
    let r: Vec<f64> = m.iter().zip(model.weights()).map(|(v, w)| v.norm() * w.sqrt()).collect();
    let mut k = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            k[x * n + y] = r[x] * model.s_at(x, y) * r[y];
        }
    }
    Ok(StabilityOperator { n, weights: model.weights().to_vec(), k })
}

/// Spectral radius, Perron eigenfunction and gap of `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub z: C64,
    /// `||F||_2`, the largest eigenvalue modulus.
    pub radius: f64,
    /// Eigenfunction of the largest eigenvalue, `<f^2> = 1`, sign fixed so
    /// that `<f>` is nonnegative.
    pub f: Vec<f64>,
    /// The eigenvalue belonging to `f`.
    pub top: f64,
    /// Difference of the two largest eigenvalues of `|F|`. Eigenvalues not
    /// represented by the matrix (a model reduced by identical rows) are 0.
    pub gap: f64,
    pub degenerate_top: bool,
}

/// Full symmetric eigendecomposition of `K`.
pub fn perron(op: &StabilityOperator, z: C64) -> Result<SpectralData> {
    let n = op.n;
    let eig = SymmetricEigen::new(&op.k, n)?;
    let top_index = n - 1;
    let top = eig.values[top_index];
    let mut moduli: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let radius = moduli[0];
    let second = moduli.get(1).copied().unwrap_or(0.0);
    let mut gap = radius - second;
    let degenerate_top = gap < DEGENERATE_GAP;
    if degenerate_top {
        gap = 0.0;
    }
    let mut ft = eig.vector(top_index).to_vec();
    let norm: f64 = ft.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sum: f64 = ft.iter().zip(&op.weights).map(|(v, w)| v * w.sqrt()).sum();
    let sign = if sum < 0.0 { -1.0 } else { 1.0 };
    for v in ft.iter_mut() {
        *v *= sign / norm;
    }
    Ok(SpectralData { z, radius, f: op.to_function(&ft), top, gap, degenerate_top })
}

/// Both sides of `||F|| = 1 - <f|m|> Im z / <f |m|^{-1} Im m>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRelation {
    pub radius: f64,
    pub predicted: f64,
    pub defect: f64,
}

pub fn check_radius_relation(model: &QveModel, z: C64, m: &[C64], spectral: &SpectralData) -> RadiusRelation {
    let w = model.weights();
    let (mut num, mut den) = (0.0, 0.0);
    for x in 0..model.n() {
        let a = m[x].norm();
        num += w[x] * spectral.f[x] * a;
        den += w[x] * spectral.f[x] * m[x].im / a;
    }
    let predicted = 1.0 - num * z.im / den;
    RadiusRelation { radius: spectral.radius, predicted, defect: (spectral.radius - predicted).abs() }
}

/// `(||f||_2 / ||f||_inf)^2 min_xy F_xy`.
pub fn gap_lower_bound(op: &StabilityOperator, f: &[f64]) -> f64 {
    let n = op.n;
    let l2 = op.inner(f, f).sqrt();
    let sup = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return 0.0;
    }
    let mut min_kernel = f64::INFINITY;
    for x in 0..n {
        for y in 0..n {
            min_kernel = min_kernel.min(op.kernel(x, y));
        }
    }
    (l2 / sup).powi(2) * min_kernel.max(0.0)
}

/// Solves `(1 - F) u = rhs` on the orthogonal complement of `f`.
///
/// The top eigenpair is removed by adding `top * f f^T` (in symmetric
/// coordinates), which makes the system regular even when `radius = 1`.
pub fn resolvent_q(op: &StabilityOperator, spectral: &SpectralData, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = op.n;
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rhs.len() });
    }
    if spectral.gap < MIN_RESOLVENT_GAP {
        return Err(Error::GapTooSmall { gap: spectral.gap });
    }
    let rhs_norm = op.inner(rhs, rhs).sqrt();
    if op.inner(&spectral.f, rhs).abs() > 1e-10 * rhs_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidParameter("right-hand side is not orthogonal to the Perron eigenfunction"));
    }
    if rhs_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let ft = op.to_symmetric(&spectral.f);
    let mut a = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            let id = if x == y { 1.0 } else { 0.0 };
            a[x * n + y] = id - op.k[x * n + y] + spectral.top * ft[x] * ft[y];
        }
    }
    let lu = Lu::factor(a, n)?;
    let mut u = lu.solve(&op.to_symmetric(rhs));
    let c: f64 = u.iter().zip(&ft).map(|(a, b)| a * b).sum();
    for (v, f) in u.iter_mut().zip(&ft) {
        *v -= c * f;
    }
    Ok(op.to_function(&u))
}

/// `||(1 - diag(m^2) S_w)^{-1}||_inf`.
pub fn bulk_stability_norm(model: &QveModel, m: &[C64]) -> Result<f64> {
    let n = model.n();
    if m.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.len() });
    }
    let w = model.weights();
    let mut b = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        let m2 = m[x] * m[x];
        for y in 0..n {
            let id = if x == y { 1.0 } else { 0.0 };
            b[x * n + y] = C64::new(id, 0.0) - m2 * model.s_at(x, y) * w[y];
        }
    }
    let inv = Lu::factor(b, n)?.inverse();
    Ok(crate::linalg::norm_inf(&inv, n))
}

/// Factors of the resolvent bound probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseProbe {
    /// `||(U - F)^{-1}||_2`.
    pub resolvent_norm: f64,
    pub gap: f64,
    /// `|1 - radius <f, U f>|`.
    pub alignment: f64,
    /// Product of the three.
    pub ratio: f64,
}

/// Evaluates `||(U - F)^{-1}||_2 * gap * |1 - radius <f, U f>|` for a
/// unimodular multiplication operator `U`.
pub fn inverse_bound_probe(u: &[C64], op: &StabilityOperator, spectral: &SpectralData) -> Result<InverseProbe> {
    let n = op.n;
    if u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.len() });
    }
    if u.iter().any(|v| (v.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidParameter("probe must be unimodular"));
    }
    // U commutes with sqrt(w), so U - K is similar to U - F.
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        for y in 0..n {
            a[x * n + y] = C64::new(-op.k[x * n + y], 0.0);
        }
        a[x * n + x] += u[x];
    }
    let inv = Lu::factor(a, n)?.inverse();
    let resolvent_norm = hermitian_gram_norm(&inv, n)?.sqrt();
    let fuf: C64 = (0..n).map(|x| u[x] * (op.weights[x] * spectral.f[x] * spectral.f[x])).sum();
    let alignment = (C64::new(1.0, 0.0) - fuf * spectral.radius).norm();
    Ok(InverseProbe {
        resolvent_norm,
        gap: spectral.gap,
        alignment,
        ratio: resolvent_norm * spectral.gap * alignment,
    })
}

/// Largest eigenvalue of `B^H B`, via the real symmetric embedding
/// `[[X, -Y], [Y, X]]` of the Hermitian matrix `X + iY`.
fn hermitian_gram_norm(b: &[C64], n: usize) -> Result<f64> {
    let mut g = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        for y in 0..n {
            g[x * n + y] = (0..n).map(|k| b[k * n + x].conj() * b[k * n + y]).sum();
        }
    }
    let d = 2 * n;
    let mut e = vec![0.0; d * d];
    for x in 0..n {
        for y in 0..n {
            let v = g[x * n + y];
            e[x * d + y] = v.re;
            e[(x + n) * d + y + n] = v.re;
            e[x * d + y + n] = -v.im;
            e[(x + n) * d + y] = v.im;
        }
    }
    let values = symmetric_eigenvalues(e, d)?;
    Ok(values[d - 1].max(0.0))
}
