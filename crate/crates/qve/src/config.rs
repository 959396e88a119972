//! Run configuration: command line flags merged over an optional JSON file.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use qve_core::density::{default_eta_ladder, uniform_taus, Extrapolation};
use qve_core::model::QveModel;
use serde::Deserialize;

use crate::model_file::ModelFile;
use crate::UsageError;

/// Settings shared by all subcommands. Every field is optional so that a
/// flag given on the command line can override the same key in `--config`.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// JSON file with any of these settings (flags take precedence).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Model JSON file.
    #[arg(long, conflicts_with = "ensemble")]
    pub model: Option<PathBuf>,
    /// Built-in model, e.g. `semicircle` or `block:alpha=3,gamma=1/3,delta=0.25`.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Number of points for `--ensemble` [default: 200].
    #[arg(long)]
    pub n: Option<usize>,
    /// Left end of the tau grid [default: -kappa - 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: Option<f64>,
    /// Right end of the tau grid [default: kappa + 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: Option<f64>,
    /// Number of tau points [default: 601].
    #[arg(long)]
    pub tau_count: Option<usize>,
    /// Decreasing eta ladder, comma separated [default: 1e-1 .. 1e-6].
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    /// Solver residual target [default: 1e-11].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory [default: .].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available parallelism].
    #[arg(long, short = 'j')]
    pub workers: Option<usize>,
    /// Density extrapolation to eta = 0: `richardson` or `last` [default: richardson].
    #[arg(long)]
    pub extrapolation: Option<String>,
    /// `solve`: also write the stability operator data at every grid point.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub spectral: Option<bool>,
    /// `classify`: |sigma| threshold below which a point is a cusp [default: 0.05].
    #[arg(long)]
    pub cusp_tol: Option<f64>,
    /// `validate-mc`: matrix size [default: 1000].
    #[arg(long)]
    pub n_mat: Option<usize>,
    /// `validate-mc`: RNG seeds, comma separated [default: 1,2,3,4,5].
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// `validate-mc`: also write the eigenvalues of every sample.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub export_samples: Option<bool>,
}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl Settings {
    /// Fills unset fields from the `--config` file, if any.
    pub fn merged(self) -> anyhow::Result<Settings> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = Settings::load(&path)?;
        Ok(self.over(file))
    }

    pub fn load(path: &Path) -> anyhow::Result<Settings> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            config: self.config.or(base.config),
            model: self.model.or(base.model),
            ensemble: self.ensemble.or(base.ensemble),
            n: self.n.or(base.n),
            tau_min: self.tau_min.or(base.tau_min),
            tau_max: self.tau_max.or(base.tau_max),
            tau_count: self.tau_count.or(base.tau_count),
            etas: self.etas.or(base.etas),
            tol: self.tol.or(base.tol),
            out: self.out.or(base.out),
            workers: self.workers.or(base.workers),
            extrapolation: self.extrapolation.or(base.extrapolation),
            spectral: self.spectral.or(base.spectral),
            cusp_tol: self.cusp_tol.or(base.cusp_tol),
            n_mat: self.n_mat.or(base.n_mat),
            seeds: self.seeds.or(base.seeds),
            export_samples: self.export_samples.or(base.export_samples),
        }
    }

    /// Validates everything and loads the model. No numerics run here apart
    /// from the model's own input checks.
    pub fn resolve(self) -> anyhow::Result<RunConfig> {
        let model_file = match (&self.model, &self.ensemble) {
            (Some(path), None) => ModelFile::load(path)?,
            (None, Some(spec)) => ModelFile::from_shorthand(spec, self.n.unwrap_or(200))?,
            (Some(_), Some(_)) => return Err(bad("give either --model or --ensemble, not both")),
            (None, None) => return Err(bad("no model: pass --model FILE or --ensemble NAME")),
        };
        if self.model.is_some() && self.n.is_some() {
            return Err(bad("--n only applies to --ensemble; model files carry their own n"));
        }
        let model = model_file.build()?;

        let margin = model.kappa() + 0.5;
        let tau_min = self.tau_min.unwrap_or(-margin);
        let tau_max = self.tau_max.unwrap_or(margin);
        let tau_count = self.tau_count.unwrap_or(601);
        if !tau_min.is_finite() || !tau_max.is_finite() || !(tau_min < tau_max) {
            return Err(bad(format!("empty tau range [{tau_min}, {tau_max}]")));
        }
        if tau_count < 2 {
            return Err(bad("tau count must be at least 2"));
        }
        let etas = self.etas.unwrap_or_else(default_eta_ladder);
        if etas.is_empty() || etas.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(bad("eta ladder must be nonempty and positive"));
        }
        if etas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("eta ladder must be strictly decreasing"));
        }
        let tol = self.tol.unwrap_or(1e-11);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(bad("tolerance must be positive"));
        }
        let workers = match self.workers {
            Some(0) => return Err(bad("worker count must be at least 1")),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let extrapolation = match self.extrapolation.as_deref() {
            None | Some("richardson") => Extrapolation::Richardson,
            Some("last") => Extrapolation::Last,
            Some(other) => return Err(bad(format!("unknown extrapolation '{other}'"))),
        };
        let cusp_tol = self.cusp_tol.unwrap_or(qve_core::singularity::CUSP_TOL);
        if !(cusp_tol.is_finite() && cusp_tol >= 0.0) {
            return Err(bad("cusp tolerance must be nonnegative"));
        }
        let n_mat = self.n_mat.unwrap_or(1000);
        let seeds = self.seeds.unwrap_or_else(|| (1..=5).collect());

        Ok(RunConfig {
            model,
            taus: uniform_taus(tau_min, tau_max, tau_count),
            etas,
            tol,
            out: self.out.unwrap_or_else(|| PathBuf::from(".")),
            workers,
            extrapolation,
            spectral: self.spectral.unwrap_or(false),
            cusp_tol,
            n_mat,
            seeds,
            export_samples: self.export_samples.unwrap_or(false),
        })
    }
}

/// Validated configuration with the model built.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: QveModel,
    pub taus: Vec<f64>,
    pub etas: Vec<f64>,
    pub tol: f64,
    pub out: PathBuf,
    pub workers: usize,
    pub extrapolation: Extrapolation,
    pub spectral: bool,
    pub cusp_tol: f64,
    pub n_mat: usize,
    pub seeds: Vec<u64>,
    pub export_samples: bool,
}

impl RunConfig {
    /// Extra checks for the density based subcommands.
    pub fn require_density(&self) -> anyhow::Result<()> {
        if self.etas.len() < 2 {
            return Err(bad("density extraction needs at least two eta levels"));
        }
        Ok(())
    }

    pub fn require_mc(&self) -> anyhow::Result<()> {
        self.require_density()?;
        if self.seeds.is_empty() {
            return Err(bad("no seeds given"));
        }
        if self.n_mat < self.model.n() {
            return Err(bad(format!("n_mat = {} is smaller than the model size {}", self.n_mat, self.model.n())));
        }
        Ok(())
    }
}
