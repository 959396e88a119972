//! The subcommands. Each one computes all of its outputs in memory and only
//! then writes them, so a failure leaves no partial files behind.

use qve_core::model::assumption_report;

use crate::config::RunConfig;
use crate::format::{self, AssumptionRecord, McReport, SingularityRecord, SpectralRecord};
use crate::pipeline;

/// Named output files and the text to print on stdout.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub stdout: String,
}

impl Output {
    pub fn write(&self, cfg: &RunConfig) -> anyhow::Result<()> {
        format::write_all(&cfg.out, &self.files)?;
        print!("{}", self.stdout);
        Ok(())
    }
}

const PRIMITIVITY_K_MAX: usize = 64;
const STRIP_EPS: f64 = 0.05;
const REGULARITY_EPS: f64 = 1e-3;

/// Advisory assumption checks. Never fails on a well-formed model.
pub fn check(cfg: &RunConfig) -> anyhow::Result<Output> {
    let report = assumption_report(&cfg.model, PRIMITIVITY_K_MAX, STRIP_EPS, REGULARITY_EPS);
    let record = AssumptionRecord::from(&report);
    let mut stdout = String::new();
    match report.primitivity_k {
        Some(k) => stdout.push_str(&format!("primitivity: S^{k} is entrywise positive\n")),
        None => stdout.push_str(&format!("primitivity: not certified up to K = {PRIMITIVITY_K_MAX}\n")),
    }
    match report.diagonal_strip {
        Some((c, eps)) => stdout.push_str(&format!("diagonal strip: s_xy >= {c} for |x - y| <= {eps}\n")),
        None => stdout.push_str("diagonal strip: no positive lower bound near the diagonal\n"),
    }
    stdout.push_str(&format!(
        "regularity integral at eps = {}: {}\n",
        report.regularity_eps, report.regularity_value
    ));
    let json = format::to_json(&record)?;
    stdout.push_str(&json);
    Ok(Output { files: vec![("assumptions.json".into(), json)], stdout })
}

pub fn solve(cfg: &RunConfig) -> anyhow::Result<Output> {
    let solver = pipeline::solver(&cfg.model, cfg.tol)?;
    let grid = pipeline::solve_grid(&solver, &cfg.taus, &cfg.etas)?;
    let worst = grid.slices.iter().map(|s| s.residual).fold(0.0, f64::max);
    let mut files = vec![("grid.csv".to_string(), format::grid_csv(&grid))];
    if cfg.spectral {
        let data = pipeline::spectral_data(&cfg.model, &grid)?;
        let records: Vec<SpectralRecord> = data.iter().map(SpectralRecord::from).collect();
        files.push(("spectral.json".into(), format::to_json(&records)?));
    }
    let stdout = format!("solved {} grid points, worst residual {worst:e}\n", grid.slices.len());
    Ok(Output { files, stdout })
}

pub fn density(cfg: &RunConfig) -> anyhow::Result<Output> {
    cfg.require_density()?;
    let solver = pipeline::solver(&cfg.model, cfg.tol)?;
    let run = pipeline::density(&solver, &cfg.taus, &cfg.etas, cfg.extrapolation)?;
    let [d0, d1, d2] = pipeline::moment_defects(&cfg.model, &run.profile);
    log::info!("moment defects: mu0 {d0:e}, mu1 {d1:e}, mu2 {d2:e}");
    let support = format::support_records(&run.support.intervals);
    let mut stdout = String::new();
    for iv in &support {
        stdout.push_str(&format!("support interval [{}, {}]\n", iv.left, iv.right));
    }
    for t in &run.support.interior_zeros {
        stdout.push_str(&format!("interior zero at {t}\n"));
    }
    Ok(Output {
        files: vec![
            ("density.csv".into(), format::density_csv(&run.profile)),
            ("support.json".into(), format::to_json(&support)?),
        ],
        stdout,
    })
}

pub fn classify(cfg: &RunConfig) -> anyhow::Result<Output> {
    cfg.require_density()?;
    let solver = pipeline::solver(&cfg.model, cfg.tol)?;
    let run = pipeline::density(&solver, &cfg.taus, &cfg.etas, cfg.extrapolation)?;
    let reports = pipeline::classify(&solver, &run, cfg.cusp_tol)?;
    let mut stdout = String::new();
    for r in &reports {
        stdout.push_str(&format!(
            "{:<10} tau0 = {:.10}  exponent {:.4}  sigma {:.3e}  psi + sigma^2 {:.4}\n",
            r.kind.as_str(),
            r.tau0,
            r.fitted_exponent,
            r.sigma,
            r.stability
        ));
    }
    let records: Vec<SingularityRecord> = reports.iter().map(SingularityRecord::from).collect();
    Ok(Output { files: vec![("singularities.json".into(), format::to_json(&records)?)], stdout })
}

pub fn validate_mc(cfg: &RunConfig) -> anyhow::Result<Output> {
    cfg.require_mc()?;
    let solver = pipeline::solver(&cfg.model, cfg.tol)?;
    let grid = pipeline::solve_grid(&solver, &cfg.taus, &cfg.etas)?;
    let profile = qve_core::density::extract_density(&cfg.model, &grid, cfg.extrapolation)?;
    let (distance, samples) = pipeline::monte_carlo(&cfg.model, &profile, cfg.n_mat, &cfg.seeds)?;
    let report = McReport { ks: distance.ks, l1: distance.l1, n_mat: cfg.n_mat, seeds: cfg.seeds.clone() };
    let mut files = vec![("mc_report.json".to_string(), format::to_json(&report)?)];
    if cfg.export_samples {
        for s in &samples {
            files.push((format!("eigenvalues_seed{}.csv", s.seed), format::eigenvalues_csv(s)));
        }
    }
    let stdout = format!("KS {:.6}  L1 {:.6}  ({} samples of size {})\n", distance.ks, distance.l1, samples.len(), cfg.n_mat);
    Ok(Output { files, stdout })
}
