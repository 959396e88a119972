//! Generating density on the real line.
//!
//! `v_x(tau) = lim Im m_x(tau + i eta) / pi` is read off a solution grid by
//! extrapolation in `eta`. The support is located on the grid and its
//! boundary refined by fresh solves very close to the real axis.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::model::QveModel;
use crate::solver::{SolutionGrid, SolutionSlice, Solver};
use crate::{Error, Result, C64};

/// How `v` is obtained from the two smallest `eta` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    /// `Im m / pi` at the smallest `eta`.
    Last,
    /// Linear-in-`eta` extrapolation to `eta = 0` from the two smallest levels.
    Richardson,
}

/// Closed interval `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    pub fn contains(&self, tau: f64) -> bool {
        self.left <= tau && tau <= self.right
    }
}

/// Per-component density on a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub n: usize,
    pub taus: Vec<f64>,
    /// Row-major `taus.len() x n`: `v[i * n + x] = v_x(taus[i])`.
    pub v: Vec<f64>,
    /// `rho(tau) = sum_x w_x v_x(tau)`.
    pub avg: Vec<f64>,
    pub support: Vec<Interval>,
    pub eta_floor: f64,
    /// `|rho(eta_1) - rho(eta_2)| / pi` for the two smallest levels.
    pub error_estimate: Vec<f64>,
    /// Whether a negative extrapolated value was clamped to zero at this `tau`.
    pub clamped: Vec<bool>,
}

impl DensityProfile {
    pub fn at(&self, i_tau: usize) -> &[f64] {
        &self.v[i_tau * self.n..(i_tau + 1) * self.n]
    }

    pub fn component(&self, x: usize) -> Vec<f64> {
        (0..self.taus.len()).map(|i| self.v[i * self.n + x]).collect()
    }

    pub fn clamped_count(&self) -> usize {
        self.clamped.iter().filter(|&&c| c).count()
    }
}

/// Geometric ladder `1e-1, 10^{-1.5}, ..., 1e-6`.
pub fn default_eta_ladder() -> Vec<f64> {
    (0..=10).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_taus(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Extracts `v` from a solved grid.
pub fn extract_density(model: &QveModel, grid: &SolutionGrid, method: Extrapolation) -> Result<DensityProfile> {
    let levels = grid.etas.len();
    let eta_floor = grid.eta_min();
    if levels < 2 || !(eta_floor <= 1e-4) {
        return Err(Error::InsufficientEtaLevels { levels, eta_floor });
    }
    let n = model.n();
    let w = model.weights();
    let (e1, e2) = (grid.etas[levels - 1], grid.etas[levels - 2]);
    let mut v = Vec::with_capacity(grid.taus.len() * n);
    let mut avg = Vec::with_capacity(grid.taus.len());
    let mut error_estimate = Vec::with_capacity(grid.taus.len());
    let mut clamped = Vec::with_capacity(grid.taus.len());
    for i in 0..grid.taus.len() {
        let low = &grid.slice(i, levels - 1).m;
        let high = &grid.slice(i, levels - 2).m;
        if low.len() != n || high.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: low.len() });
        }
        let mut flag = false;
        let mut rho = 0.0;
        let (mut r1, mut r2) = (0.0, 0.0);
        for x in 0..n {
            let (i1, i2) = (low[x].im, high[x].im);
            let mut val = match method {
                Extrapolation::Last => i1 / PI,
                Extrapolation::Richardson => (e2 * i1 - e1 * i2) / (e2 - e1) / PI,
            };
            if val < 0.0 {
                val = 0.0;
                flag = true;
            }
            rho += w[x] * val;
            r1 += w[x] * i1;
            r2 += w[x] * i2;
            v.push(val);
        }
        avg.push(rho);
        error_estimate.push((r1 - r2).abs() / PI);
        clamped.push(flag);
    }
    Ok(DensityProfile {
        n,
        taus: grid.taus.clone(),
        v,
        avg,
        support: Vec::new(),
        eta_floor,
        error_estimate,
        clamped,
    })
}

/// Default support threshold: ten times the largest extrapolation error.
pub fn default_threshold(profile: &DensityProfile) -> f64 {
    10.0 * profile.error_estimate.iter().copied().fold(0.0, f64::max)
}

/// Index runs `[lo, hi]` with `rho > threshold`, bridging single-point
/// dropouts.
pub fn support_runs(avg: &[f64], threshold: f64) -> Vec<(usize, usize)> {
    let mut above: Vec<bool> = avg.iter().map(|&r| r > threshold).collect();
    for i in 1..above.len().saturating_sub(1) {
        if !above[i] && above[i - 1] && above[i + 1] {
            above[i] = true;
        }
    }
    let mut runs = Vec::new();
    let mut i = 0;
    while i < above.len() {
        if above[i] {
            let lo = i;
            while i + 1 < above.len() && above[i + 1] {
                i += 1;
            }
            runs.push((lo, i));
        }
        i += 1;
    }
    runs
}

/// Grid-resolution support: one interval per run of [`support_runs`], with
/// endpoints halfway to the first grid point outside the run.
/// `threshold = None` uses [`default_threshold`].
pub fn detect_support(profile: &DensityProfile, threshold: Option<f64>) -> Vec<Interval> {
    let thr = threshold.unwrap_or_else(|| default_threshold(profile));
    let t = &profile.taus;
    support_runs(&profile.avg, thr)
        .into_iter()
        .map(|(lo, hi)| Interval {
            left: if lo == 0 { t[0] } else { 0.5 * (t[lo - 1] + t[lo]) },
            right: if hi + 1 == t.len() { t[hi] } else { 0.5 * (t[hi] + t[hi + 1]) },
        })
        .collect()
}

/// Trapezoid weights of a (possibly non-uniform) grid.
fn trapezoid_weights(taus: &[f64]) -> Vec<f64> {
    let k = taus.len();
    let mut h = vec![0.0; k];
    for i in 0..k.saturating_sub(1) {
        let d = 0.5 * (taus[i + 1] - taus[i]);
        h[i] += d;
        h[i + 1] += d;
    }
    h
}

/// `int v_x(tau) / (tau - z) dtau` by the trapezoid rule.
pub fn stieltjes_reconstruct(profile: &DensityProfile, z: C64) -> Result<Vec<C64>> {
    if !(z.im > 0.0) {
        return Err(Error::NonPositiveImaginaryPart);
    }
    let t = &profile.taus;
    let step = t.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    let distance = t.iter().map(|&tau| (C64::new(tau, 0.0) - z).norm()).fold(f64::INFINITY, f64::min);
    if distance < step {
        return Err(Error::TooCloseToGrid { distance });
    }
    let h = trapezoid_weights(t);
    let mut out = vec![C64::new(0.0, 0.0); profile.n];
    for (i, &tau) in t.iter().enumerate() {
        let kernel = (C64::new(tau, 0.0) - z).inv() * h[i];
        for (o, &v) in out.iter_mut().zip(profile.at(i)) {
            *o += kernel * v;
        }
    }
    Ok(out)
}

/// Per-component `(mu0, mu1, mu2)` by the trapezoid rule.
pub fn moments(profile: &DensityProfile) -> Vec<[f64; 3]> {
    let h = trapezoid_weights(&profile.taus);
    let mut out = vec![[0.0; 3]; profile.n];
    for (i, &tau) in profile.taus.iter().enumerate() {
        for (o, &v) in out.iter_mut().zip(profile.at(i)) {
            let m = h[i] * v;
            o[0] += m;
            o[1] += m * tau;
            o[2] += m * tau * tau;
        }
    }
    out
}

/// Size bounds of a solution grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub min_abs_m: f64,
    pub max_abs_m: f64,
    /// `max_z max_{x,y} Im m_x(z) / Im m_y(z)`.
    pub comparability_ratio: f64,
    /// Some `|m_x(z)|` reached half the trivial bound `1/Im z`: the solution
    /// behaves like the transform of an atom, so the boundedness assumptions
    /// fail for this model.
    pub pole_like: bool,
}

pub fn diagnostics_bounds(grid: &SolutionGrid) -> BoundsReport {
    let mut report = BoundsReport {
        min_abs_m: f64::INFINITY,
        max_abs_m: 0.0,
        comparability_ratio: 1.0,
        pole_like: false,
    };
    for s in &grid.slices {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for v in &s.m {
            let a = v.norm();
            report.min_abs_m = report.min_abs_m.min(a);
            report.max_abs_m = report.max_abs_m.max(a);
            if a * s.z.im >= 0.5 {
                report.pole_like = true;
            }
            lo = lo.min(v.im);
            hi = hi.max(v.im);
        }
        if lo > 0.0 {
            report.comparability_ratio = report.comparability_ratio.max(hi / lo);
        } else if hi > 0.0 {
            report.comparability_ratio = f64::INFINITY;
        }
    }
    report
}

/// `max_{i<j} ||v(tau_i) - v(tau_j)||_inf / |tau_i - tau_j|^{1/3}`.
pub fn holder_diagnostic(profile: &DensityProfile) -> f64 {
    let k = profile.taus.len();
    let mut best = 0.0_f64;
    for i in 0..k {
        let a = profile.at(i);
        for j in i + 1..k {
            let b = profile.at(j);
            let diff = a.iter().zip(b).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
            if diff > 0.0 {
                let d = (profile.taus[j] - profile.taus[i]).abs();
                best = best.max(diff / d.cbrt());
            }
        }
    }
    best
}

/// Solves near the real axis, warm-starting from the grid column closest to
/// the requested `tau` at the lowest level that is at least four grid
/// offsets high, then continuing horizontally and down.
#[derive(Debug, Clone, Copy)]
pub struct Prober<'a> {
    solver: &'a Solver<'a>,
    grid: &'a SolutionGrid,
}

impl<'a> Prober<'a> {
    pub fn new(solver: &'a Solver<'a>, grid: &'a SolutionGrid) -> Self {
        Prober { solver, grid }
    }

    pub fn solver(&self) -> &'a Solver<'a> {
        self.solver
    }

    pub fn grid(&self) -> &'a SolutionGrid {
        self.grid
    }

    pub fn solve(&self, tau: f64, eta: f64) -> Result<SolutionSlice> {
        let z = C64::new(tau, eta);
        let taus = &self.grid.taus;
        if taus.is_empty() || self.grid.etas.is_empty() {
            return self.solver.solve_at(z, None);
        }
        let i = nearest(taus, tau);
        let offset = (taus[i] - tau).abs();
        let need = eta.max(4.0 * offset);
        let j = self.grid.etas.iter().rposition(|&e| e >= need).unwrap_or(0);
        self.solver.continue_to(self.grid.slice(i, j), z)
    }

    /// `<Im m(tau + i eta)>`.
    pub fn avg_im(&self, tau: f64, eta: f64) -> Result<f64> {
        let s = self.solve(tau, eta)?;
        Ok(self.solver.model().mean(&s.m.iter().map(|v| v.im).collect::<Vec<_>>()))
    }
}

fn nearest(sorted: &[f64], t: f64) -> usize {
    let p = sorted.partition_point(|&x| x < t);
    if p == 0 {
        0
    } else if p == sorted.len() {
        sorted.len() - 1
    } else if (sorted[p] - t).abs() < (t - sorted[p - 1]).abs() {
        p
    } else {
        p - 1
    }
}

/// Parameters of the support refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportOptions {
    /// Grid threshold; `None` uses [`default_threshold`].
    pub threshold: Option<f64>,
    /// Height of the zero-indicator solves.
    pub probe_eta: f64,
    /// `tau` is outside the support if `<Im m(tau + i probe_eta)> <= zero_factor * probe_eta`.
    pub zero_factor: f64,
    /// Height at which density minima are located.
    pub smooth_eta: f64,
    /// An interior minimum is a vanishing point if
    /// `rho(smooth_eta) / rho(probe_eta)` exceeds this ratio. At a cubic-root
    /// zero the ratio is `(smooth_eta / probe_eta)^{1/3}`, at a positive
    /// minimum it is close to 1.
    pub vanishing_ratio: f64,
    /// Gaps narrower than this are reported as a single interior zero.
    pub merge_width: f64,
    /// Bisection stops once the bracket is this small.
    pub bisection_tol: f64,
}

impl Default for SupportOptions {
    fn default() -> Self {
        SupportOptions {
            threshold: None,
            probe_eta: 1e-13,
            zero_factor: 1e5,
            smooth_eta: 1e-9,
            vanishing_ratio: 3.0,
            merge_width: 1e-7,
            bisection_tol: 1e-10,
        }
    }
}

/// Support as a union of closed intervals, together with interior points
/// where the density vanishes without opening a gap.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Support {
    pub intervals: Vec<Interval>,
    pub interior_zeros: Vec<f64>,
}

/// Position of a boundary point relative to the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    /// Support lies to the right.
    Left,
    /// Support lies to the left.
    Right,
    /// Support on both sides.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub tau: f64,
    pub side: BoundarySide,
    /// Distance to the nearest other boundary point.
    pub clearance: f64,
}

impl Support {
    /// All boundary points in increasing order.
    pub fn boundary_points(&self) -> Vec<BoundaryPoint> {
        let mut pts: Vec<(f64, BoundarySide)> = Vec::new();
        for iv in &self.intervals {
            pts.push((iv.left, BoundarySide::Left));
            pts.push((iv.right, BoundarySide::Right));
        }
        for &z in &self.interior_zeros {
            pts.push((z, BoundarySide::Interior));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = pts.len();
        (0..k)
            .map(|i| {
                let left = if i > 0 { pts[i].0 - pts[i - 1].0 } else { f64::INFINITY };
                let right = if i + 1 < k { pts[i + 1].0 - pts[i].0 } else { f64::INFINITY };
                BoundaryPoint { tau: pts[i].0, side: pts[i].1, clearance: left.min(right) }
            })
            .collect()
    }
}

/// Locates the support from the grid profile and refines it with fresh
/// solves.
///
/// Grid runs above the threshold are widened or narrowed to the outermost
/// grid points the zero indicator confirms, runs the indicator connects are
/// merged, and edges are bisected on the indicator. Inside each interval,
/// grid minima of `rho` are minimized at `smooth_eta`; a minimum the
/// indicator puts outside the support opens a gap, one where `rho` keeps
/// shrinking with `eta` is recorded as an interior zero.
pub fn refine_support(prober: &Prober<'_>, profile: &DensityProfile, opts: &SupportOptions) -> Result<Support> {
    let t = &profile.taus;
    let k = t.len();
    let thr = opts.threshold.unwrap_or_else(|| default_threshold(profile));
    let inside = |tau: f64| -> Result<bool> {
        Ok(prober.avg_im(tau, opts.probe_eta)? > opts.zero_factor * opts.probe_eta)
    };
    let runs = support_runs(&profile.avg, thr);
    let mut comps: Vec<(usize, usize)> = Vec::new();
    for (lo, hi) in runs {
        let mut a = lo;
        while a <= hi && !inside(t[a])? {
            a += 1;
        }
        if a > hi {
            continue;
        }
        let mut b = hi;
        while b > a && !inside(t[b])? {
            b -= 1;
        }
        comps.push((a, b));
    }
    // Widen each component to the last grid point still inside, merging
    // components the indicator connects.
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (a, b) in comps {
        if let Some(last) = merged.last_mut() {
            if a <= last.1 + 1 {
                last.1 = last.1.max(b);
                continue;
            }
            let mut j = last.1 + 1;
            while j < a && inside(t[j])? {
                j += 1;
            }
            if j == a {
                last.1 = b;
                continue;
            }
        }
        merged.push((a, b));
    }
    let mut intervals: Vec<Interval> = Vec::new();
    let mut interior_zeros = Vec::new();
    for (idx, &(mut a, mut b)) in merged.iter().enumerate() {
        let floor = if idx == 0 { 0 } else { merged[idx - 1].1 + 1 };
        while a > floor && inside(t[a - 1])? {
            a -= 1;
        }
        let ceil = if idx + 1 < merged.len() { merged[idx + 1].0 - 1 } else { k - 1 };
        while b < ceil && inside(t[b + 1])? {
            b += 1;
        }
        let left = if a == 0 { t[0] } else { bisect_edge(&inside, t[a], t[a - 1], opts.bisection_tol)? };
        let right = if b + 1 == k { t[k - 1] } else { bisect_edge(&inside, t[b], t[b + 1], opts.bisection_tol)? };
        // Interior minima of the grid density.
        let mut cuts: Vec<(f64, f64)> = Vec::new();
        let mut i = a + 1;
        while i < b {
            let local_min = profile.avg[i] < profile.avg[i - 1] && profile.avg[i] <= profile.avg[i + 1];
            if local_min || profile.avg[i] <= thr {
                let tau_min = golden_min(
                    |tau| prober.avg_im(tau, opts.smooth_eta),
                    t[i - 1],
                    t[i + 1],
                    opts.bisection_tol,
                )?;
                if !inside(tau_min)? {
                    let mut li = i - 1;
                    while li > a && !inside(t[li])? {
                        li -= 1;
                    }
                    let mut ri = i + 1;
                    while ri < b && !inside(t[ri])? {
                        ri += 1;
                    }
                    let gl = bisect_edge(&inside, t[li], tau_min, opts.bisection_tol)?;
                    let gr = bisect_edge(&inside, t[ri], tau_min, opts.bisection_tol)?;
                    if gr - gl < opts.merge_width {
                        interior_zeros.push(0.5 * (gl + gr));
                    } else {
                        cuts.push((gl, gr));
                    }
                    i = ri.max(i + 1);
                    continue;
                }
                let smooth = prober.avg_im(tau_min, opts.smooth_eta)?;
                let sharp = prober.avg_im(tau_min, opts.probe_eta)?;
                if smooth > opts.vanishing_ratio * sharp {
                    interior_zeros.push(tau_min);
                }
            }
            i += 1;
        }
        let mut start = left;
        for (gl, gr) in cuts {
            intervals.push(Interval { left: start, right: gl });
            start = gr;
        }
        intervals.push(Interval { left: start, right });
    }
    interior_zeros.sort_by(|a, b| a.total_cmp(b));
    interior_zeros.dedup_by(|a, b| (*a - *b).abs() < opts.merge_width);
    Ok(Support { intervals, interior_zeros })
}

/// Bisection between a point inside the support and one outside.
fn bisect_edge(inside: &impl Fn(f64) -> Result<bool>, mut tin: f64, mut tout: f64, tol: f64) -> Result<f64> {
    while (tin - tout).abs() > tol {
        let mid = 0.5 * (tin + tout);
        if mid == tin || mid == tout {
            break;
        }
        if inside(mid)? {
            tin = mid;
        } else {
            tout = mid;
        }
    }
    Ok(0.5 * (tin + tout))
}

/// Golden-section search for a minimizer of `f` on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
        if c == d {
            break;
        }
    }
    Ok(if fc <= fd { c } else { d })
}
