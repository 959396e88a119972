//! Classification of support boundary points.
//!
//! At a boundary point `tau0` the density obeys an approximate cubic
//! equation with coefficients `sigma` and `psi`. `sigma != 0` gives a square
//! root edge, `sigma = 0` a cubic root cusp. This module computes the
//! coefficients, predicts the amplitude of the singularity and checks the
//! exponent by fitting the density near `tau0`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::density::{extract_density, BoundaryPoint, BoundarySide, DensityProfile, Extrapolation, Prober, Support};
use crate::model::QveModel;
use crate::solver::SolutionGrid;
use crate::stability::{build_f, perron, resolvent_q, SpectralData};
use crate::{Error, Result, C64};

/// `|sigma|` at or below which a boundary point is a cusp.
pub const CUSP_TOL: f64 = 0.05;
/// Height at which boundary points are evaluated.
pub const BOUNDARY_ETA: f64 = 1e-6;
/// Largest exact connectivity problem.
pub const EXACT_CONNECTIVITY_MAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    LeftEdge,
    RightEdge,
    Cusp,
}

impl SingularityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SingularityKind::LeftEdge => "left_edge",
            SingularityKind::RightEdge => "right_edge",
            SingularityKind::Cusp => "cusp",
        }
    }

    /// Exponent of the density at a point of this kind.
    pub fn exponent(&self) -> f64 {
        match self {
            SingularityKind::Cusp => 1.0 / 3.0,
            _ => 0.5,
        }
    }
}

/// Cubic coefficients at `m` (a solve just above a boundary point).
///
/// `sign m` is read from `Re m`, `sigma = <f^3 sign m>` and
/// `psi = <Qw (1 + F)(1 - F)^{-1} Qw>` with `w = f^2 sign m`.
pub fn sigma_psi(model: &QveModel, m: &[C64], spectral: &SpectralData) -> Result<(f64, f64)> {
    if let Some(index) = m.iter().position(|v| v.re.abs() < 1e-6) {
        return Err(Error::AmbiguousSign { index, re_m: m[index].re });
    }
    let op = build_f(model, m)?;
    let f = &spectral.f;
    let sign: Vec<f64> = m.iter().map(|v| v.re.signum()).collect();
    let sigma: f64 = (0..model.n()).map(|x| model.weights()[x] * f[x].powi(3) * sign[x]).sum();
    let w: Vec<f64> = f.iter().zip(&sign).map(|(f, s)| f * f * s).collect();
    let fw = op.inner(f, &w);
    let qw: Vec<f64> = w.iter().zip(f).map(|(w, f)| w - fw * f).collect();
    let qw_norm = op.inner(&qw, &qw).sqrt();
    if qw_norm <= 1e-14 {
        return Ok((sigma, 0.0));
    }
    // Remove the roundoff component along f before the deflated solve.
    let c = op.inner(f, &qw);
    let qw: Vec<f64> = qw.iter().zip(f).map(|(q, f)| q - c * f).collect();
    let y = resolvent_q(&op, spectral, &qw)?;
    let fy = op.apply(&y);
    let sum: Vec<f64> = y.iter().zip(&fy).map(|(a, b)| a + b).collect();
    Ok((sigma, op.inner(&qw, &sum)))
}

/// `Cusp` if `|sigma| <= cusp_tol`; otherwise the density grows in the
/// direction of `sign sigma`, so `sigma < 0` is a right edge.
pub fn classify(sigma: f64, cusp_tol: f64) -> SingularityKind {
    if sigma.abs() <= cusp_tol {
        SingularityKind::Cusp
    } else if sigma < 0.0 {
        SingularityKind::RightEdge
    } else {
        SingularityKind::LeftEdge
    }
}

/// Leading coefficients `c_x` of `v_x(tau0 + omega) ~ c_x |omega|^p`.
///
/// Edge: `c_x = (1/pi) (<|m| f> / |sigma|)^{1/2} |m_x| f_x`.
/// Cusp: `c_x = (sqrt 3 / (2 pi)) (<|m| f> / psi)^{1/3} |m_x| f_x`.
pub fn predicted_amplitude(
    kind: SingularityKind,
    model: &QveModel,
    m: &[C64],
    spectral: &SpectralData,
    sigma: f64,
    psi: f64,
) -> Result<Vec<f64>> {
    let mf: f64 = (0..model.n()).map(|x| model.weights()[x] * m[x].norm() * spectral.f[x]).sum();
    let scale = match kind {
        SingularityKind::Cusp => {
            if psi < 1e-12 {
                return Err(Error::DivisionDegenerate { denominator: psi });
            }
            3f64.sqrt() / (2.0 * PI) * (mf / psi).cbrt()
        }
        _ => {
            if sigma.abs() < 1e-12 {
                return Err(Error::DivisionDegenerate { denominator: sigma.abs() });
            }
            (mf / sigma.abs()).sqrt() / PI
        }
    };
    Ok(m.iter().zip(&spectral.f).map(|(m, f)| scale * m.norm() * f).collect())
}

/// Which side of `tau0` a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitSide {
    Minus,
    Plus,
    Both,
}

impl FitSide {
    /// The side(s) where a boundary point has support.
    pub fn towards_support(side: BoundarySide) -> Self {
        match side {
            BoundarySide::Left => FitSide::Plus,
            BoundarySide::Right => FitSide::Minus,
            BoundarySide::Interior => FitSide::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    /// Per-component intercepts `exp(mean(log v_x - p log omega))` with `p`
    /// the nearer of 1/2 and 1/3 to the fitted exponent.
    pub amplitude: Vec<f64>,
    pub points: usize,
}

/// Least-squares slope of `log rho(tau0 +- omega)` against `log omega`
/// over the profile points with `omega` in `window`.
pub fn fit_exponent(profile: &DensityProfile, tau0: f64, side: FitSide, window: (f64, f64)) -> Result<ExponentFit> {
    let (lo, hi) = window;
    let mut idx = Vec::new();
    for (i, &t) in profile.taus.iter().enumerate() {
        let d = t - tau0;
        let ok_side = match side {
            FitSide::Minus => d < 0.0,
            FitSide::Plus => d > 0.0,
            FitSide::Both => d != 0.0,
        };
        let w = d.abs();
        if ok_side && w >= lo * (1.0 - 1e-12) && w <= hi * (1.0 + 1e-12) {
            idx.push(i);
        }
    }
    if idx.len() < 3 {
        return Err(Error::EmptyWindow);
    }
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    for &i in &idx {
        if !(profile.avg[i] > 0.0) || profile.at(i).iter().any(|&v| !(v > 0.0)) {
            return Err(Error::NonPositiveDensity { tau: profile.taus[i] });
        }
        xs.push((profile.taus[i] - tau0).abs().ln());
        ys.push(profile.avg[i].ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::EmptyWindow);
    }
    let exponent = sxy / sxx;
    let p = if (exponent - 0.5).abs() <= (exponent - 1.0 / 3.0).abs() { 0.5 } else { 1.0 / 3.0 };
    let amplitude = (0..profile.n)
        .map(|x| {
            let mean = idx.iter().zip(&xs).map(|(&i, &lx)| profile.at(i)[x].ln() - p * lx).sum::<f64>() / k;
            mean.exp()
        })
        .collect();
    Ok(ExponentFit { exponent, amplitude, points: idx.len() })
}

/// `(connected, witness)` from [`connectivity_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connectivity {
    pub connected: bool,
    pub witness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectivityMode {
    /// All nonempty proper subsets.
    Exact,
    /// Initial segments of the grid order only. For sampled continuous
    /// kernels this certifies connectivity; otherwise it is only a necessary
    /// condition.
    Prefix,
}

/// Row distances `|a_x - a_y| + <|S_x - S_y|>`.
pub fn row_distances(model: &QveModel) -> Vec<f64> {
    let n = model.n();
    let w = model.weights();
    let mut d = vec![0.0; n * n];
    for x in 0..n {
        for y in x + 1..n {
            let (sx, sy) = (model.s_row(x), model.s_row(y));
            let v = (model.a()[x] - model.a()[y]).abs()
                + (0..n).map(|z| w[z] * (sx[z] - sy[z]).abs()).sum::<f64>();
            d[x * n + y] = v;
            d[y * n + x] = v;
        }
    }
    d
}

/// `max_A min_{x in A, y not in A} dist(x, y)`; the rows form a connected set
/// when this is at most `tol`.
pub fn connectivity_test(model: &QveModel, mode: ConnectivityMode, tol: f64) -> Result<Connectivity> {
    let n = model.n();
    let d = row_distances(model);
    let witness = match mode {
        ConnectivityMode::Exact => {
            if n > EXACT_CONNECTIVITY_MAX {
                return Err(Error::TooLargeForExact { n });
            }
            let mut best = 0.0_f64;
            // A and its complement give the same value: fix point n-1 outside A.
            for mask in 1u32..(1u32 << (n - 1)) {
                let mut cut = f64::INFINITY;
                for x in (0..n).filter(|&x| mask >> x & 1 == 1) {
                    for y in (0..n).filter(|&y| mask >> y & 1 == 0) {
                        cut = cut.min(d[x * n + y]);
                    }
                }
                best = best.max(cut);
            }
            best
        }
        ConnectivityMode::Prefix => {
            let mut best = 0.0_f64;
            for k in 1..n {
                let mut cut = f64::INFINITY;
                for x in 0..k {
                    for y in k..n {
                        cut = cut.min(d[x * n + y]);
                    }
                }
                best = best.max(cut);
            }
            best
        }
    };
    Ok(Connectivity { connected: witness <= tol, witness })
}

/// Result of the analysis of one boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityReport {
    pub tau0: f64,
    pub kind: SingularityKind,
    /// Where the support lies, from the support detection.
    pub side: BoundarySide,
    pub sigma: f64,
    pub psi: f64,
    pub fitted_exponent: f64,
    pub fitted_amplitude: Vec<f64>,
    pub predicted_amplitude: Vec<f64>,
    /// `psi + sigma^2`.
    pub stability: f64,
    /// `||F||_2` at `tau0 + i BOUNDARY_ETA`.
    pub radius: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityOptions {
    pub cusp_tol: f64,
    pub boundary_eta: f64,
    /// Log-spaced sample points per side.
    pub fit_points: usize,
    /// Largest fit offset at edges.
    pub edge_window_max: f64,
    /// Largest fit offset at cusps, where the next order is only
    /// `|omega|^{1/3}` smaller.
    pub cusp_window_max: f64,
    /// `omega_max / omega_min`.
    pub window_ratio: f64,
    /// The window stays below this fraction of the distance to the nearest
    /// other boundary point.
    pub clearance_fraction: f64,
    /// Fit samples are solved at `omega_min * eta_fraction` and
    /// `sqrt(10)` times that, then extrapolated.
    pub eta_fraction: f64,
}

impl Default for SingularityOptions {
    fn default() -> Self {
        SingularityOptions {
            cusp_tol: CUSP_TOL,
            boundary_eta: BOUNDARY_ETA,
            fit_points: 24,
            edge_window_max: 1e-2,
            cusp_window_max: 1e-4,
            window_ratio: 100.0,
            clearance_fraction: 0.1,
            eta_fraction: 1e-3,
        }
    }
}

/// Solves just above `tau0` and returns the reduced model, the reduced
/// solution and its Perron data.
fn boundary_data(prober: &Prober<'_>, tau0: f64, eta: f64) -> Result<(Vec<C64>, SpectralData)> {
    let solver = prober.solver();
    let s = prober.solve(tau0, eta)?;
    let m = solver.reduce(&s.m);
    let op = build_f(solver.reduced_model(), &m)?;
    let sp = perron(&op, s.z)?;
    Ok((m, sp))
}

/// `||F||_2` at `tau0 + i eta`.
pub fn boundary_radius(prober: &Prober<'_>, tau0: f64, eta: f64) -> Result<f64> {
    Ok(boundary_data(prober, tau0, eta)?.1.radius)
}

/// Density profile on log-spaced offsets around `tau0`.
pub fn local_profile(
    prober: &Prober<'_>,
    tau0: f64,
    side: FitSide,
    window: (f64, f64),
    points: usize,
    eta: f64,
) -> Result<DensityProfile> {
    let solver = prober.solver();
    let (lo, hi) = window;
    let offsets: Vec<f64> = (0..points)
        .map(|k| {
            let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
            lo * (hi / lo).powf(t)
        })
        .collect();
    let mut taus = Vec::new();
    if side != FitSide::Plus {
        taus.extend(offsets.iter().rev().map(|o| tau0 - o));
    }
    if side != FitSide::Minus {
        taus.extend(offsets.iter().map(|o| tau0 + o));
    }
    let etas = vec![eta * 10f64.sqrt(), eta];
    let mut columns = Vec::with_capacity(taus.len());
    for &t in &taus {
        let upper = prober.solve(t, etas[0])?;
        let lower = solver.continue_to(&upper, C64::new(t, etas[1]))?;
        columns.push(vec![upper, lower]);
    }
    let grid = SolutionGrid::from_columns(taus, etas, columns)?;
    extract_density(solver.model(), &grid, Extrapolation::Richardson)
}

/// Full analysis of one boundary point.
pub fn analyze_point(prober: &Prober<'_>, point: &BoundaryPoint, opts: &SingularityOptions) -> Result<SingularityReport> {
    let solver = prober.solver();
    let reduced = solver.reduced_model();
    let (m, sp) = boundary_data(prober, point.tau, opts.boundary_eta)?;
    let (sigma, psi) = sigma_psi(reduced, &m, &sp)?;
    let kind = classify(sigma, opts.cusp_tol);
    let predicted = predicted_amplitude(kind, reduced, &m, &sp, sigma, psi)?;
    let cap = if kind == SingularityKind::Cusp { opts.cusp_window_max } else { opts.edge_window_max };
    let hi = cap.min(opts.clearance_fraction * point.clearance);
    let window = (hi / opts.window_ratio, hi);
    let side = FitSide::towards_support(point.side);
    let profile = local_profile(prober, point.tau, side, window, opts.fit_points, window.0 * opts.eta_fraction)?;
    let fit = fit_exponent(&profile, point.tau, side, window)?;
    Ok(SingularityReport {
        tau0: point.tau,
        kind,
        side: point.side,
        sigma,
        psi,
        fitted_exponent: fit.exponent,
        fitted_amplitude: fit.amplitude,
        predicted_amplitude: solver.expand(&predicted),
        stability: psi + sigma * sigma,
        radius: sp.radius,
        window,
    })
}

/// Analyzes every boundary point of `support`.
pub fn analyze_support(prober: &Prober<'_>, support: &Support, opts: &SingularityOptions) -> Result<Vec<SingularityReport>> {
    support.boundary_points().iter().map(|p| analyze_point(prober, p, opts)).collect()
}
