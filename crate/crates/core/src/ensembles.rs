//! Example models and closed-form or low-dimensional oracles.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::model::{midpoint_grid, QveModel};
use crate::{Error, Result, C64};

/// Constant kernel `s = 1`, `a = 0`, uniform weights.
pub fn semicircle_model(n: usize) -> Result<QveModel> {
    QveModel::new(vec![1.0; n], vec![0.0; n], vec![1.0; n * n])
}

/// Stieltjes transform of the semicircle law, `(-z + sqrt(z^2 - 4)) / 2`.
///
/// For `Im z > 0` the branch with positive imaginary part is returned; on the
/// real axis with `|z| >= 2` the real branch that is increasing in `z` (the
/// values at `z = +-2` are the boundary limits `-+1`).
pub fn semicircle_exact(z: C64) -> Result<C64> {
    if z.im < 0.0 || (z.im == 0.0 && z.re.abs() < 2.0) || !z.re.is_finite() || !z.im.is_finite() {
        if z.im < 0.0 {
            return Err(Error::NonPositiveImaginaryPart);
        }
        return Err(Error::BranchUndefined { z });
    }
    let two = C64::new(2.0, 0.0);
    // sqrt(z-2) sqrt(z+2) is analytic off [-2, 2] and behaves like z at
    // infinity; the reciprocal form avoids cancellation for large |z|.
    let r = (z - two).sqrt() * (z + two).sqrt();
    Ok(-two / (z + r))
}

/// Parameters of the 2x2 block profile
/// `alpha 1_{IxI} + beta (1_{IxI^c} + 1_{I^cxI}) + gamma 1_{I^cxI^c}`
/// with `I = [0, delta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl BlockParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = BlockParams { alpha, beta, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    /// The cusp family: `beta = 1`, `gamma = 1/alpha`.
    pub fn cusp_family(alpha: f64, delta: f64) -> Result<Self> {
        BlockParams::new(alpha, 1.0, 1.0 / alpha, delta)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.alpha) && positive(self.beta) && positive(self.gamma)) {
            return Err(Error::InvalidParameter("block entries must be positive"));
        }
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(Error::InvalidParameter("block delta must lie in (0, 1/2]"));
        }
        Ok(())
    }

    /// Number of grid points in the block `I` for an `n`-point grid:
    /// `ceil(delta * n)`, where products within `1e-9` of an integer are
    /// rounded to it so that e.g. `504 * (1/126)` gives 4, not 5.
    pub fn block_size(&self, n: usize) -> usize {
        let t = self.delta * n as f64;
        let r = t.round();
        if (t - r).abs() < 1e-9 {
            r as usize
        } else {
            t.ceil() as usize
        }
    }
}

/// Block model on `n` points with `a = 0` and `I` the first
/// [`BlockParams::block_size`] indices.
pub fn block_model(params: BlockParams, n: usize) -> Result<QveModel> {
    params.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter("block model needs n >= 2"));
    }
    let k = params.block_size(n);
    if k == 0 || k >= n {
        return Err(Error::DegenerateBlock);
    }
    let mut s = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            s[x * n + y] = match (x < k, y < k) {
                (true, true) => params.alpha,
                (false, false) => params.gamma,
                _ => params.beta,
            };
        }
    }
    QveModel::new(vec![1.0; n], vec![0.0; n], s)
}

/// `delta_c(alpha) = (alpha - 2)^3 / (9 (alpha^3 - 2 alpha^2 + 2 alpha - 1))`,
/// the block size at which the cusp family develops a cusp.
pub fn delta_critical(alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    let num = (alpha - 2.0).powi(3);
    let den = 9.0 * (((alpha - 2.0) * alpha + 2.0) * alpha - 1.0);
    Ok(num / den)
}

/// Solves the two-dimensional system satisfied by the block model solution
/// `m = mu 1_I + nu 1_{I^c}`:
///
/// ```text
/// -1/mu = z + alpha delta mu + beta (1 - delta) nu
/// -1/nu = z + beta delta mu + gamma (1 - delta) nu
/// ```
///
/// by the plain fixed-point iteration, with safeguarded 2x2 Newton steps
/// tried periodically. The block size is the continuum `delta`, so this is
/// an oracle for block models whose grid realizes `delta` exactly.
pub fn reduced_block_solve(params: BlockParams, z: C64, tol: f64) -> Result<(C64, C64)> {
    params.validate()?;
    if !(z.im > 0.0) {
        return Err(Error::NonPositiveImaginaryPart);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    let BlockParams { alpha, beta, gamma, delta } = params;
    let (s11, s12, s21, s22) = (alpha * delta, beta * (1.0 - delta), beta * delta, gamma * (1.0 - delta));
    let phi = |mu: C64, nu: C64| -> (C64, C64) {
        (-(z + s11 * mu + s12 * nu).inv(), -(z + s21 * mu + s22 * nu).inv())
    };
    let residual = |mu: C64, nu: C64| -> f64 {
        let (p, q) = phi(mu, nu);
        (p - mu).norm().max((q - nu).norm())
    };
    let mut mu = C64::new(0.0, 1.0);
    let mut nu = C64::new(0.0, 1.0);
    let max_iter = 50_000_000usize;
    let mut res = residual(mu, nu);
    let mut iter = 0;
    while res > tol {
        if iter >= max_iter {
            return Err(Error::MaxIterExceeded { z, residual: res, iterations: iter, last: vec![mu, nu] });
        }
        if iter % 64 == 63 {
            // Newton on G(u) = u - phi(u); dphi_i/du_j = phi_i^2 s_ij.
            for _ in 0..8 {
                let (p, q) = phi(mu, nu);
                let j11 = C64::new(1.0, 0.0) - p * p * s11;
                let j12 = -(p * p * s12);
                let j21 = -(q * q * s21);
                let j22 = C64::new(1.0, 0.0) - q * q * s22;
                let det = j11 * j22 - j12 * j21;
                if det.norm() < 1e-300 {
                    break;
                }
                let (g1, g2) = (p - mu, q - nu);
                let d1 = (j22 * g1 - j12 * g2) / det;
                let d2 = (j11 * g2 - j21 * g1) / det;
                let (m1, m2) = (mu + d1, nu + d2);
                if !(m1.im > 0.0 && m2.im > 0.0) {
                    break;
                }
                let r = residual(m1, m2);
                if !(r < res) {
                    break;
                }
                mu = m1;
                nu = m2;
                res = r;
                if res <= tol {
                    break;
                }
            }
            if res <= tol {
                break;
            }
        }
        let (p, q) = phi(mu, nu);
        mu = p;
        nu = q;
        res = residual(mu, nu);
        iter += 1;
    }
    Ok((mu, nu))
}

/// Deformed Wigner profile: `s = lambda`, `a` given, uniform weights.
pub fn deformed_wigner_model(lambda: f64, a_profile: Vec<f64>, n: usize) -> Result<QveModel> {
    if a_profile.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a_profile.len() });
    }
    QveModel::new(vec![1.0; n], a_profile, vec![lambda; n * n])
}

/// Tolerance on the imaginary part and negativity of Fourier kernels.
pub const FOURIER_TOL: f64 = 1e-10;

/// A translation-invariant kernel model together with the number of
/// slightly negative entries that were clamped to zero.
#[derive(Debug, Clone)]
pub struct TranslationInvariant {
    pub model: QveModel,
    pub clamped: usize,
}

/// Samples `s(x, y) = 4 sum_{p,q} cov(p, q) exp(-i 2 pi (p x - q y))` on the
/// midpoint grid of `[0, 1]^2`, with `a = 0`.
///
/// Reality of the kernel requires `cov(-p, -q) = cov(p, q)` for real
/// covariances, and symmetry requires `cov(p, q) = cov(-q, -p)`.
pub fn translation_invariant_model(cov: &[((i64, i64), f64)], n: usize) -> Result<TranslationInvariant> {
    if n == 0 {
        return Err(Error::EmptyModel);
    }
    if cov.iter().any(|(_, c)| !c.is_finite()) {
        return Err(Error::NonFinite { what: "covariance" });
    }
    let grid = midpoint_grid(n);
    let tau = core::f64::consts::TAU;
    let mut s = vec![0.0; n * n];
    let mut max_imag = 0.0_f64;
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &((p, q), c) in cov {
                let phase = -tau * (p as f64 * x - q as f64 * y);
                acc += C64::from_polar(4.0 * c, phase);
            }
            max_imag = max_imag.max(acc.im.abs());
            s[i * n + j] = acc.re;
        }
    }
    if max_imag > FOURIER_TOL {
        return Err(Error::ComplexKernel { imag: max_imag });
    }
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -FOURIER_TOL {
        return Err(Error::NegativeKernel { value: min });
    }
    let mut clamped = 0;
    for v in s.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped += 1;
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            let defect = (s[x * n + y] - s[y * n + x]).abs();
            if defect > FOURIER_TOL {
                return Err(Error::AsymmetricKernel { row: x, col: y, defect });
            }
            let mean = 0.5 * (s[x * n + y] + s[y * n + x]);
            s[x * n + y] = mean;
            s[y * n + x] = mean;
        }
    }
    let model = QveModel::new(vec![1.0; n], vec![0.0; n], s)?;
    Ok(TranslationInvariant { model, clamped })
}

/// Two-point field profile: `+a0` on the first half of the indices and
/// `-a0` on the rest.
pub fn two_point_profile(a0: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i < n / 2 { a0 } else { -a0 }).collect()
}
