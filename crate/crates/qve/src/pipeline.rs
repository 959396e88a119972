//! Drivers that run the core numerics in parallel with rayon.

use anyhow::Context;
use qve_core::density::{
    extract_density, moments, refine_support, DensityProfile, Extrapolation, Prober, Support, SupportOptions,
};
use qve_core::model::QveModel;
use qve_core::montecarlo::{empirical_distance, sample_spectrum, Distance, SpectrumSample};
use qve_core::singularity::{analyze_support, SingularityOptions, SingularityReport};
use qve_core::solver::{SolutionGrid, SolveOptions, Solver};
use qve_core::stability::{build_f, perron, SpectralData};
use rayon::prelude::*;

pub fn solver(model: &QveModel, tol: f64) -> anyhow::Result<Solver<'_>> {
    Ok(Solver::new(model, SolveOptions { tol, ..SolveOptions::default() })?)
}

/// Solves every tau column on the rayon pool.
pub fn solve_grid(solver: &Solver<'_>, taus: &[f64], etas: &[f64]) -> anyhow::Result<SolutionGrid> {
    let columns = taus
        .par_iter()
        .map(|&tau| solver.solve_column(tau, etas).with_context(|| format!("solving the column at tau = {tau}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(SolutionGrid::from_columns(taus.to_vec(), etas.to_vec(), columns)?)
}

/// Perron data of the stability operator at every grid point.
pub fn spectral_data(model: &QveModel, grid: &SolutionGrid) -> anyhow::Result<Vec<SpectralData>> {
    grid.slices
        .par_iter()
        .map(|s| {
            let op = build_f(model, &s.m)?;
            perron(&op, s.z).with_context(|| format!("stability operator at z = {}", s.z))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DensityRun {
    pub grid: SolutionGrid,
    pub profile: DensityProfile,
    pub support: Support,
}

pub fn density(
    solver: &Solver<'_>,
    taus: &[f64],
    etas: &[f64],
    method: Extrapolation,
) -> anyhow::Result<DensityRun> {
    let grid = solve_grid(solver, taus, etas)?;
    let profile = extract_density(solver.model(), &grid, method)?;
    if profile.clamped_count() > 0 {
        log::info!("{} negative density values clamped to zero", profile.clamped_count());
    }
    let support = refine_support(&Prober::new(solver, &grid), &profile, &SupportOptions::default())
        .context("locating the support")?;
    log::info!("support: {} interval(s), {} interior zero(s)", support.intervals.len(), support.interior_zeros.len());
    Ok(DensityRun { grid, profile, support })
}

/// Worst deviation of the first three moments of each component from
/// `1`, `-a_x` and `a_x^2 + (S 1)_x`.
pub fn moment_defects(model: &QveModel, profile: &DensityProfile) -> [f64; 3] {
    let rows = model.row_sums();
    let mut worst = [0.0_f64; 3];
    for (x, mu) in moments(profile).iter().enumerate() {
        let a = model.a()[x];
        let expected = [1.0, -a, a * a + rows[x]];
        for k in 0..3 {
            worst[k] = worst[k].max((mu[k] - expected[k]).abs());
        }
    }
    worst
}

pub fn classify(solver: &Solver<'_>, run: &DensityRun, cusp_tol: f64) -> anyhow::Result<Vec<SingularityReport>> {
    let opts = SingularityOptions { cusp_tol, ..SingularityOptions::default() };
    let prober = Prober::new(solver, &run.grid);
    Ok(analyze_support(&prober, &run.support, &opts).context("analyzing the boundary points")?)
}

/// Samples one matrix per seed in parallel and compares the pooled spectrum
/// with the density.
pub fn monte_carlo(
    model: &QveModel,
    profile: &DensityProfile,
    n_mat: usize,
    seeds: &[u64],
) -> anyhow::Result<(Distance, Vec<SpectrumSample>)> {
    let samples = seeds
        .par_iter()
        .map(|&seed| sample_spectrum(model, n_mat, seed).with_context(|| format!("sampling seed {seed}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let distance = empirical_distance(&samples, profile)?;
    Ok((distance, samples))
}
