//! Solving the QVE in the upper half-plane.
//!
//! The map `Phi(u) = -1/(z + a + S u)` is a strict contraction in the
//! hyperbolic metric `D` with factor `(1 + (Im z)^2 / ||S||)^{-2}`, so the
//! plain iteration converges from any start. That rate degenerates as
//! `Im z -> 0`; the solver therefore walks down in `Im z` from a height
//! where the contraction is strong, predicting each step from the derivative
//! `(1 - m^2 S) dm/dz = m^2`, and polishes with safeguarded Newton steps.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::Lu;
use crate::model::QveModel;
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Ratio between consecutive heights of the internal continuation ladder.
const LADDER_RATIO: f64 = 0.316_227_766_016_837_94;
/// Fixed-point budget for a single continuation step before it is split.
const STEP_BUDGET: usize = 300;
/// Maximum number of times a failing continuation step is halved.
const MAX_SPLIT_DEPTH: usize = 12;
/// Hard cap on the default fixed-point iteration count.
const MAX_ITER_CAP: usize = 100_000;
/// Extra iterations reserved for Newton steps.
const NEWTON_BUDGET: usize = 200;
/// Newton steps allowed after the residual target is met.
const POLISH_STEPS: usize = 4;
const POLISH_BELOW: f64 = 1e-3;

/// `D(zeta, omega) = |zeta - omega|^2 / (Im zeta Im omega)`.
pub fn hyperbolic_d(zeta: C64, omega: C64) -> Result<f64> {
    if !(zeta.im > 0.0 && omega.im > 0.0) {
        return Err(Error::NonPositiveImaginaryPart);
    }
    Ok((zeta - omega).norm_sqr() / (zeta.im * omega.im))
}

/// `Phi(u)_x = -1/(z + a_x + (S u)_x)`.
pub fn phi_map(model: &QveModel, z: C64, u: &[C64]) -> Result<Vec<C64>> {
    if !(z.im > 0.0) {
        return Err(Error::NonPositiveImaginaryPart);
    }
    if u.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: u.len() });
    }
    let mut out = vec![C64::new(0.0, 0.0); model.n()];
    model.apply_s(u, &mut out);
    for (o, &a) in out.iter_mut().zip(model.a()) {
        *o = -(z + a + *o).inv();
    }
    Ok(out)
}

/// QVE defect `max_x |m_x + 1/(z + a_x + (S m)_x)|`.
pub fn residual(model: &QveModel, z: C64, m: &[C64]) -> Result<f64> {
    let p = phi_map(model, z, m)?;
    Ok(max_dist(&p, m))
}

/// Guaranteed contraction factor `(1 + eta^2 / ||S||)^{-2}` of `Phi` in the
/// metric `sup_x D`, for `Im z = eta`.
pub fn contraction_bound(op_norm: f64, eta: f64) -> f64 {
    if op_norm == 0.0 {
        return 0.0;
    }
    let t = 1.0 + eta * eta / op_norm;
    1.0 / (t * t)
}

/// `sup_x D(Phi(u)_x, Phi(w)_x) / sup_x D(u_x, w_x)`.
pub fn contraction_ratio_probe(model: &QveModel, z: C64, u: &[C64], w: &[C64]) -> Result<f64> {
    let before = sup_d(u, w)?;
    if before == 0.0 {
        return Err(Error::ZeroDistance);
    }
    let pu = phi_map(model, z, u)?;
    let pw = phi_map(model, z, w)?;
    Ok(sup_d(&pu, &pw)? / before)
}

fn sup_d(u: &[C64], w: &[C64]) -> Result<f64> {
    if u.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: w.len() });
    }
    let mut best = 0.0_f64;
    for (&a, &b) in u.iter().zip(w) {
        best = best.max(hyperbolic_d(a, b)?);
    }
    Ok(best)
}

/// Polishing pays off only where some `Im u_x` is small against `|u_x|`.
fn needs_polish(u: &[C64]) -> bool {
    u.iter().any(|v| v.im < POLISH_BELOW * v.norm())
}

fn max_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Default fixed-point iteration limit at height `eta`:
/// `ceil(ln tol / ln q)` for the guaranteed rate `q`, capped, plus a Newton
/// budget.
pub fn default_max_iter(op_norm: f64, eta: f64, tol: f64) -> usize {
    let q = contraction_bound(op_norm, eta);
    let base = if q <= 0.0 {
        1.0
    } else {
        (tol.ln() / q.ln()).ceil()
    };
    let base = if base.is_finite() && base >= 1.0 { base } else { MAX_ITER_CAP as f64 };
    (base as usize).min(MAX_ITER_CAP) + NEWTON_BUDGET
}

/// `m` at one spectral parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSlice {
    pub z: C64,
    pub m: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target residual.
    pub tol: f64,
    /// Fixed-point iteration limit; `None` uses [`default_max_iter`].
    pub max_iter: Option<usize>,
    /// Use Newton steps as an accelerator.
    pub newton: bool,
    /// Solve on the classes of identical rows instead of all points.
    pub lump: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-11, max_iter: None, newton: true, lump: true }
    }
}

/// Reusable solver bound to one model.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    model: &'a QveModel,
    opts: SolveOptions,
    /// Model the iteration actually runs on (the quotient when lumping).
    work: QveModel,
    /// `S_w[x][y] = s_xy w_y` of the working model, row-major.
    sw: Vec<C64>,
    class_of: Vec<usize>,
    reps: Vec<usize>,
    eta0: f64,
}

struct Step {
    u: Vec<C64>,
    residual: f64,
    iterations: usize,
    jac: Option<Lu<C64>>,
}

enum Outcome {
    /// `jac` is the factored Jacobian of the last accepted Newton step.
    Converged { u: Vec<C64>, residual: f64, iterations: usize, jac: Option<Lu<C64>> },
    Stalled { u: Vec<C64>, residual: f64, iterations: usize },
}

impl<'a> Solver<'a> {
    pub fn new(model: &'a QveModel, opts: SolveOptions) -> Result<Self> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
        let (class_of, reps, work) = if opts.lump {
            let (class_of, reps) = model.identical_rows();
            let work = model.quotient(&class_of, &reps)?;
            (class_of, reps, work)
        } else {
            ((0..model.n()).collect(), (0..model.n()).collect(), model.clone())
        };
        let k = work.n();
        let mut sw = vec![C64::new(0.0, 0.0); k * k];
        for x in 0..k {
            for y in 0..k {
                sw[x * k + y] = C64::new(work.s_at(x, y) * work.weights()[y], 0.0);
            }
        }
        let eta0 = work.op_norm().sqrt();
        Ok(Solver { model, opts, work, sw, class_of, reps, eta0 })
    }

    pub fn model(&self) -> &QveModel {
        self.model
    }

    pub fn options(&self) -> &SolveOptions {
        &self.opts
    }

    /// Number of unknowns the iteration runs on.
    pub fn reduced_dim(&self) -> usize {
        self.work.n()
    }

    /// The model the iteration runs on: the quotient by identical rows when
    /// lumping, otherwise a copy of the original.
    pub fn reduced_model(&self) -> &QveModel {
        &self.work
    }

    /// Class index of every point of the original model.
    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    /// Lifts a vector on classes to the original points.
    pub fn expand<T: Copy>(&self, u: &[T]) -> Vec<T> {
        self.class_of.iter().map(|&c| u[c]).collect()
    }

    /// Restricts a vector on the original points to class representatives.
    pub fn reduce<T: Copy>(&self, m: &[T]) -> Vec<T> {
        self.reps.iter().map(|&r| m[r]).collect()
    }

    fn phi(&self, z: C64, u: &[C64], out: &mut [C64]) {
        let k = self.work.n();
        for x in 0..k {
            let row = &self.sw[x * k..(x + 1) * k];
            let su = row.iter().zip(u).fold(C64::new(0.0, 0.0), |acc, (s, v)| acc + s * v);
            out[x] = -(z + self.work.a()[x] + su).inv();
        }
    }

    /// `I - diag(d) S_w`.
    fn jacobian(&self, d: &[C64]) -> Vec<C64> {
        let k = self.work.n();
        let mut j = vec![C64::new(0.0, 0.0); k * k];
        for x in 0..k {
            for y in 0..k {
                j[x * k + y] = -(d[x] * self.sw[x * k + y]);
            }
            j[x * k + x] += ONE;
        }
        j
    }

    fn max_iter(&self, eta: f64) -> usize {
        self.opts
            .max_iter
            .unwrap_or_else(|| default_max_iter(self.work.op_norm(), eta, self.opts.tol))
    }

    /// Fixed-point iteration with Newton acceleration. A Newton step is
    /// accepted only if it keeps `Im u > 0` and lowers the residual; after a
    /// rejection a few plain steps run before the next attempt.
    fn iterate(&self, z: C64, mut u: Vec<C64>, budget: usize) -> Outcome {
        let k = self.work.n();
        let mut p = vec![C64::new(0.0, 0.0); k];
        self.phi(z, &u, &mut p);
        let mut res = max_dist(&p, &u);
        let mut iterations = 0;
        let mut cooldown = 0usize;
        let mut candidate_phi = vec![C64::new(0.0, 0.0); k];
        let mut jac = None;
        // Extra Newton steps taken after reaching the tolerance. Near a
        // square-root edge the Jacobian is nearly singular, so a small
        // residual still leaves an error much larger than a tiny Im m.
        let mut polish = 0;
        loop {
            if res <= self.opts.tol && (!self.opts.newton || polish >= POLISH_STEPS || !needs_polish(&u)) {
                return Outcome::Converged { u, residual: res, iterations, jac };
            }
            if res <= self.opts.tol {
                iterations += 1;
                polish += 1;
                let d: Vec<C64> = p.iter().map(|v| v * v).collect();
                let Ok(lu) = Lu::factor(self.jacobian(&d), k) else {
                    return Outcome::Converged { u, residual: res, iterations, jac };
                };
                let mut delta: Vec<C64> = p.iter().zip(&u).map(|(a, b)| a - b).collect();
                lu.solve_in_place(&mut delta);
                let cand: Vec<C64> = u.iter().zip(&delta).map(|(a, b)| a + b).collect();
                if cand.iter().all(|v| v.im > 0.0 && v.re.is_finite()) {
                    self.phi(z, &cand, &mut candidate_phi);
                    let r = max_dist(&candidate_phi, &cand);
                    if r < 0.5 * res {
                        u = cand;
                        core::mem::swap(&mut p, &mut candidate_phi);
                        res = r;
                        jac = Some(lu);
                        continue;
                    }
                }
                return Outcome::Converged { u, residual: res, iterations, jac };
            }
            if iterations >= budget || !res.is_finite() {
                return Outcome::Stalled { u, residual: res, iterations };
            }
            iterations += 1;
            if self.opts.newton && cooldown == 0 {
                let d: Vec<C64> = p.iter().map(|v| v * v).collect();
                if let Ok(lu) = Lu::factor(self.jacobian(&d), k) {
                    let mut delta: Vec<C64> = p.iter().zip(&u).map(|(a, b)| a - b).collect();
                    lu.solve_in_place(&mut delta);
                    let cand: Vec<C64> = u.iter().zip(&delta).map(|(a, b)| a + b).collect();
                    if cand.iter().all(|v| v.im > 0.0 && v.re.is_finite()) {
                        self.phi(z, &cand, &mut candidate_phi);
                        let r = max_dist(&candidate_phi, &cand);
                        if r < res {
                            u = cand;
                            core::mem::swap(&mut p, &mut candidate_phi);
                            res = r;
                            jac = Some(lu);
                            continue;
                        }
                    }
                }
                cooldown = 16;
            }
            cooldown = cooldown.saturating_sub(1);
            core::mem::swap(&mut u, &mut p);
            self.phi(z, &u, &mut p);
            res = max_dist(&p, &u);
        }
    }

    /// `dm/dz` in working coordinates from `(1 - m^2 S) dm/dz = m^2`.
    fn derivative_reduced(&self, u: &[C64]) -> Result<Vec<C64>> {
        let d: Vec<C64> = u.iter().map(|v| v * v).collect();
        let lu = Lu::factor(self.jacobian(&d), self.work.n()).map_err(|_| Error::SingularJacobian)?;
        Ok(lu.solve(&d))
    }

    /// `dm/dz` at a solution, per component of the full model.
    pub fn derivative(&self, m: &[C64]) -> Result<Vec<C64>> {
        if m.len() != self.model.n() {
            return Err(Error::DimensionMismatch { expected: self.model.n(), found: m.len() });
        }
        Ok(self.expand(&self.derivative_reduced(&self.reduce(m))?))
    }

    /// First-order guess at `z + dz`. A Jacobian factored within one Newton
    /// step of `u` is accurate enough for the derivative and saves a
    /// factorization.
    fn predict(&self, u: &[C64], dz: C64, jac: Option<&Lu<C64>>) -> Vec<C64> {
        let du = match jac {
            Some(lu) => Ok(lu.solve(&u.iter().map(|v| v * v).collect::<Vec<_>>())),
            None => self.derivative_reduced(u),
        };
        if let Ok(du) = du {
            let guess: Vec<C64> = u.iter().zip(&du).map(|(a, b)| a + b * dz).collect();
            if guess.iter().all(|v| v.im > 0.0 && v.re.is_finite()) {
                return guess;
            }
        }
        u.to_vec()
    }

    /// One continuation step `z0 -> z1`, halved recursively on failure.
    fn step(&self, z0: C64, u0: &[C64], jac0: Option<&Lu<C64>>, z1: C64, depth: usize) -> Result<Step> {
        let guess = self.predict(u0, z1 - z0, jac0);
        let budget = if depth >= MAX_SPLIT_DEPTH { self.max_iter(z1.im) } else { STEP_BUDGET };
        match self.iterate(z1, guess, budget) {
            Outcome::Converged { u, residual, iterations, jac } => Ok(Step { u, residual, iterations, jac }),
            Outcome::Stalled { u, residual, iterations } => {
                if depth >= MAX_SPLIT_DEPTH {
                    return Err(Error::MaxIterExceeded { z: z1, residual, iterations, last: self.expand(&u) });
                }
                let mid = C64::new(0.5 * (z0.re + z1.re), (z0.im * z1.im).sqrt());
                let first = self.step(z0, u0, jac0, mid, depth + 1)?;
                let mut second = self.step(mid, &first.u, first.jac.as_ref(), z1, depth + 1)?;
                second.iterations += first.iterations + iterations;
                Ok(second)
            }
        }
    }

    /// Walks from a solved point to `z`: horizontally at the starting height
    /// in pieces no wider than that height, then vertically along a
    /// geometric ladder.
    fn walk(&self, z0: C64, u0: Vec<C64>, jac0: Option<Lu<C64>>, z: C64) -> Result<Step> {
        let mut cur = z0;
        let mut u = u0;
        let mut jac = jac0;
        let mut total = 0;
        let mut last_res = f64::NAN;
        let dx = z.re - cur.re;
        if dx != 0.0 {
            let pieces = ((dx.abs() / cur.im).ceil() as usize).clamp(1, 1 << 20);
            let start = cur.re;
            for k in 1..=pieces {
                let next = C64::new(start + dx * k as f64 / pieces as f64, cur.im);
                let st = self.step(cur, &u, jac.as_ref(), next, 0)?;
                u = st.u;
                jac = st.jac;
                last_res = st.residual;
                total += st.iterations;
                cur = next;
            }
            cur = C64::new(z.re, cur.im);
        }
        if cur.im != z.im {
            let ratio = z.im / cur.im;
            let steps = (ratio.ln().abs() / LADDER_RATIO.ln().abs()).ceil().max(1.0) as usize;
            let h0 = cur.im;
            for k in 1..=steps {
                let h = if k == steps { z.im } else { h0 * ratio.powf(k as f64 / steps as f64) };
                let next = C64::new(z.re, h);
                let st = self.step(cur, &u, jac.as_ref(), next, 0)?;
                u = st.u;
                jac = st.jac;
                last_res = st.residual;
                total += st.iterations;
                cur = next;
            }
        }
        if last_res.is_nan() {
            match self.iterate(z, u, self.max_iter(z.im)) {
                Outcome::Converged { u, residual, iterations, jac } => {
                    return Ok(Step { u, residual, iterations: total + iterations, jac })
                }
                Outcome::Stalled { u, residual, iterations } => {
                    return Err(Error::MaxIterExceeded {
                        z,
                        residual,
                        iterations: total + iterations,
                        last: self.expand(&u),
                    })
                }
            }
        }
        Ok(Step { u, residual: last_res, iterations: total, jac })
    }

    fn slice(&self, z: C64, u: &[C64], residual: f64, iterations: usize) -> SolutionSlice {
        SolutionSlice { z, m: self.expand(u), residual, iterations }
    }

    /// Solves at `z`, from `warm_start` if given (falling back to a cold
    /// start if that iteration stalls), otherwise by continuation down from
    /// `Im z = ||S||^{1/2}` starting at `u = i`.
    pub fn solve_at(&self, z: C64, warm_start: Option<&[C64]>) -> Result<SolutionSlice> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonPositiveImaginaryPart);
        }
        if let Some(w) = warm_start {
            if w.len() != self.model.n() {
                return Err(Error::DimensionMismatch { expected: self.model.n(), found: w.len() });
            }
            if w.iter().all(|v| v.im > 0.0 && v.re.is_finite()) {
                if let Outcome::Converged { u, residual, iterations, .. } =
                    self.iterate(z, self.reduce(w), self.max_iter(z.im))
                {
                    return Ok(self.slice(z, &u, residual, iterations));
                }
            }
        }
        let start = vec![I; self.work.n()];
        if self.work.op_norm() == 0.0 || z.im >= self.eta0 {
            return match self.iterate(z, start, self.max_iter(z.im)) {
                Outcome::Converged { u, residual, iterations, .. } => Ok(self.slice(z, &u, residual, iterations)),
                Outcome::Stalled { u, residual, iterations } => {
                    Err(Error::MaxIterExceeded { z, residual, iterations, last: self.expand(&u) })
                }
            };
        }
        let st = self.descend(z)?;
        Ok(self.slice(z, &st.u, st.residual, st.iterations))
    }

    /// Cold solve at `Re z + i eta0`, then continuation down to `z`.
    fn descend(&self, z: C64) -> Result<Step> {
        let top = C64::new(z.re, self.eta0);
        let (u0, jac) = match self.iterate(top, vec![I; self.work.n()], self.max_iter(top.im)) {
            Outcome::Converged { u, jac, .. } => (u, jac),
            Outcome::Stalled { u, residual, iterations } => {
                return Err(Error::MaxIterExceeded { z: top, residual, iterations, last: self.expand(&u) })
            }
        };
        self.walk(top, u0, jac, z)
    }

    /// Continues a solved slice to a new spectral parameter.
    pub fn continue_to(&self, from: &SolutionSlice, z: C64) -> Result<SolutionSlice> {
        if !(z.im > 0.0) {
            return Err(Error::NonPositiveImaginaryPart);
        }
        let st = self.walk(from.z, self.reduce(&from.m), None, z)?;
        Ok(self.slice(z, &st.u, st.residual, st.iterations))
    }

    /// Solves along one column `tau + i eta_j` for strictly decreasing
    /// `etas`, warm-starting each level from the one above.
    pub fn solve_column(&self, tau: f64, etas: &[f64]) -> Result<Vec<SolutionSlice>> {
        validate_etas(etas)?;
        let mut out: Vec<SolutionSlice> = Vec::with_capacity(etas.len());
        let mut state: Option<Step> = None;
        for &eta in etas {
            let z = C64::new(tau, eta);
            let st = match state.take() {
                None if eta >= self.eta0 || self.work.op_norm() == 0.0 => {
                    let s = self.solve_at(z, None)?;
                    Step { u: self.reduce(&s.m), residual: s.residual, iterations: s.iterations, jac: None }
                }
                None => self.descend(z)?,
                Some(prev) => {
                    let from = out.last().map(|s: &SolutionSlice| s.z).unwrap_or(z);
                    self.walk(from, prev.u, prev.jac, z)?
                }
            };
            out.push(self.slice(z, &st.u, st.residual, st.iterations));
            state = Some(st);
        }
        Ok(out)
    }
}

fn validate_etas(etas: &[f64]) -> Result<()> {
    if etas.iter().any(|&e| !(e > 0.0) || !e.is_finite()) || etas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidEtaLadder);
    }
    Ok(())
}

/// Solves at one `z` with explicit tolerance and iteration limit.
pub fn solve_at(
    model: &QveModel,
    z: C64,
    tol: f64,
    max_iter: Option<usize>,
    warm_start: Option<&[C64]>,
) -> Result<SolutionSlice> {
    let opts = SolveOptions { tol, max_iter, ..SolveOptions::default() };
    Solver::new(model, opts)?.solve_at(z, warm_start)
}

/// One step `m <- m + delta` with `(1 - diag(Phi(m)^2) S_w) delta = Phi(m) - m`.
///
/// At a solution `Phi(m) = m`, so this is the Jacobian `1 - m^2 S` of the
/// derivative equation. If the step would leave the upper half-plane the
/// plain fixed-point step `Phi(m)` is returned instead.
pub fn newton_polish(model: &QveModel, z: C64, m0: &[C64]) -> Result<Vec<C64>> {
    let n = model.n();
    let p = phi_map(model, z, m0)?;
    let mut j = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        let d = p[x] * p[x];
        for y in 0..n {
            j[x * n + y] = -(d * (model.s_at(x, y) * model.weights()[y]));
        }
        j[x * n + x] += ONE;
    }
    let lu = Lu::factor(j, n).map_err(|_| Error::SingularJacobian)?;
    let mut delta: Vec<C64> = p.iter().zip(m0).map(|(a, b)| a - b).collect();
    lu.solve_in_place(&mut delta);
    let next: Vec<C64> = m0.iter().zip(&delta).map(|(a, b)| a + b).collect();
    if next.iter().all(|v| v.im > 0.0) {
        Ok(next)
    } else {
        Ok(p)
    }
}

/// Solutions on the rectangle `{tau_i + i eta_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub taus: Vec<f64>,
    /// Strictly decreasing.
    pub etas: Vec<f64>,
    /// Column-major: `slices[i * etas.len() + j]` is at `taus[i] + i etas[j]`.
    pub slices: Vec<SolutionSlice>,
}

impl SolutionGrid {
    /// Assembles a grid from independently solved columns.
    pub fn from_columns(taus: Vec<f64>, etas: Vec<f64>, columns: Vec<Vec<SolutionSlice>>) -> Result<Self> {
        if columns.len() != taus.len() {
            return Err(Error::DimensionMismatch { expected: taus.len(), found: columns.len() });
        }
        let mut slices = Vec::with_capacity(taus.len() * etas.len());
        for col in columns {
            if col.len() != etas.len() {
                return Err(Error::DimensionMismatch { expected: etas.len(), found: col.len() });
            }
            slices.extend(col);
        }
        Ok(SolutionGrid { taus, etas, slices })
    }

    pub fn slice(&self, i_tau: usize, j_eta: usize) -> &SolutionSlice {
        &self.slices[i_tau * self.etas.len() + j_eta]
    }

    pub fn column(&self, i_tau: usize) -> &[SolutionSlice] {
        let k = self.etas.len();
        &self.slices[i_tau * k..(i_tau + 1) * k]
    }

    pub fn eta_min(&self) -> f64 {
        self.etas.last().copied().unwrap_or(f64::NAN)
    }
}

/// Solves every column of the grid sequentially.
pub fn solve_grid(model: &QveModel, taus: &[f64], etas: &[f64], tol: f64) -> Result<SolutionGrid> {
    validate_etas(etas)?;
    let solver = Solver::new(model, SolveOptions { tol, ..SolveOptions::default() })?;
    let columns = taus
        .iter()
        .map(|&tau| solver.solve_column(tau, etas))
        .collect::<Result<Vec<_>>>()?;
    SolutionGrid::from_columns(taus.to_vec(), etas.to_vec(), columns)
}
