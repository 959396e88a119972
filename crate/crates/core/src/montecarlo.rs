//! Wigner-type random matrices with the variance profile of a model, and
//! distances between their spectra and a solved density.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::density::DensityProfile;
use crate::linalg::symmetric_eigenvalues;
use crate::model::QveModel;
use crate::{Error, Result};

/// Model point of each matrix row: row `i` (1-based) belongs to the first
/// point whose cumulative weight reaches `i / n_mat`. For uniform weights
/// this is `ceil(i n / n_mat)`.
pub fn row_classes(model: &QveModel, n_mat: usize) -> Vec<usize> {
    let mut cum = Vec::with_capacity(model.n());
    let mut acc = 0.0;
    for &w in model.weights() {
        acc += w;
        cum.push(acc);
    }
    let last = model.n() - 1;
    (1..=n_mat)
        .map(|i| {
            let t = i as f64 / n_mat as f64;
            cum.partition_point(|&c| c < t * (1.0 - 1e-12)).min(last)
        })
        .collect()
}

/// Real symmetric `n_mat x n_mat` matrix, row-major: independent centred
/// Gaussians with variance `s_xy / n_mat` off the diagonal and twice that on
/// it, plus `diag(a)`.
pub fn sample_matrix(model: &QveModel, n_mat: usize, seed: u64) -> Result<Vec<f64>> {
    if n_mat < model.n() {
        return Err(Error::InvalidParameter("matrix dimension below model size"));
    }
    let class = row_classes(model, n_mat);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = 1.0 / n_mat as f64;
    let mut h = vec![0.0; n_mat * n_mat];
    for i in 0..n_mat {
        let x = class[i];
        let row = model.s_row(x);
        let g: f64 = rng.sample(StandardNormal);
        h[i * n_mat + i] = g * (2.0 * row[x] * scale).sqrt() + model.a()[x];
        for j in i + 1..n_mat {
            let g: f64 = rng.sample(StandardNormal);
            let v = g * (row[class[j]] * scale).sqrt();
            h[i * n_mat + j] = v;
            h[j * n_mat + i] = v;
        }
    }
    Ok(h)
}

/// Sorted eigenvalues of one sampled matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub n_mat: usize,
    pub seed: u64,
    pub eigenvalues: Vec<f64>,
}

pub fn sample_spectrum(model: &QveModel, n_mat: usize, seed: u64) -> Result<SpectrumSample> {
    let h = sample_matrix(model, n_mat, seed)?;
    let eigenvalues = symmetric_eigenvalues(h, n_mat)?;
    Ok(SpectrumSample { n_mat, seed, eigenvalues })
}

/// Distances between an empirical spectral distribution and a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    /// Kolmogorov-Smirnov: `sup |F_emp - F|`.
    pub ks: f64,
    /// `int |F_emp - F| dtau`.
    pub l1: f64,
}

/// CDF of the average density, normalized to total mass 1, piecewise linear
/// between the profile's grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCdf {
    taus: Vec<f64>,
    values: Vec<f64>,
}

impl ProfileCdf {
    pub fn new(profile: &DensityProfile) -> Self {
        let t = &profile.taus;
        let mut values = vec![0.0; t.len()];
        for i in 1..t.len() {
            values[i] = values[i - 1] + 0.5 * (t[i] - t[i - 1]) * (profile.avg[i] + profile.avg[i - 1]);
        }
        let total = values.last().copied().unwrap_or(0.0);
        if total > 0.0 {
            for v in values.iter_mut() {
                *v /= total;
            }
        }
        ProfileCdf { taus: t.clone(), values }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let t = &self.taus;
        if t.is_empty() || tau <= t[0] {
            return 0.0;
        }
        if tau >= t[t.len() - 1] {
            return 1.0;
        }
        let k = t.partition_point(|&x| x <= tau);
        let (a, b) = (t[k - 1], t[k]);
        let s = (tau - a) / (b - a);
        self.values[k - 1] + s * (self.values[k] - self.values[k - 1])
    }

    /// Inverse CDF: binary search on the grid, then linear inversion.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < p).clamp(1, self.values.len() - 1);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        let s = if v1 > v0 { (p - v0) / (v1 - v0) } else { 0.0 };
        self.taus[k - 1] + s.clamp(0.0, 1.0) * (self.taus[k] - self.taus[k - 1])
    }
}

/// Pools the eigenvalues of all samples and compares them with the density.
pub fn empirical_distance(samples: &[SpectrumSample], profile: &DensityProfile) -> Result<Distance> {
    let mut ev: Vec<f64> = samples.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
    if ev.is_empty() {
        return Err(Error::EmptySamples);
    }
    ev.sort_by(|a, b| a.total_cmp(b));
    let cdf = ProfileCdf::new(profile);
    let total = ev.len() as f64;
    let mut ks = 0.0_f64;
    for (k, &x) in ev.iter().enumerate() {
        let f = cdf.eval(x);
        ks = ks.max((k as f64 / total - f).abs()).max(((k + 1) as f64 / total - f).abs());
    }
    // Between consecutive breakpoints F_emp is constant and F is linear.
    let mut pts: Vec<f64> = ev.iter().copied().chain(profile.taus.iter().copied()).collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    let mut l1 = 0.0;
    let mut below = 0usize;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        while below < ev.len() && ev[below] <= a {
            below += 1;
        }
        if b <= a {
            continue;
        }
        let c = below as f64 / total;
        l1 += abs_linear_integral(cdf.eval(a) - c, cdf.eval(b) - c, b - a);
    }
    Ok(Distance { ks, l1 })
}

/// `int_0^h |p + (q - p) s / h| ds`.
fn abs_linear_integral(p: f64, q: f64, h: f64) -> f64 {
    if p * q >= 0.0 {
        0.5 * h * (p.abs() + q.abs())
    } else {
        0.5 * h * (p * p + q * q) / (p.abs() + q.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::uniform_taus;
    use crate::ensembles::{block_model, semicircle_model, BlockParams};
    use core::f64::consts::PI;

    fn semicircle_profile(points: usize) -> DensityProfile {
        let taus = uniform_taus(-2.5, 2.5, points);
        let avg: Vec<f64> = taus
            .iter()
            .map(|&t: &f64| if t.abs() < 2.0 { (4.0 - t * t).sqrt() / (2.0 * PI) } else { 0.0 })
            .collect();
        DensityProfile {
            n: 1,
            v: avg.clone(),
            avg,
            support: Vec::new(),
            eta_floor: 1e-6,
            error_estimate: vec![0.0; points],
            clamped: vec![false; points],
            taus,
        }
    }

    #[test]
    fn row_classes_match_ceiling_rule() {
        let model = semicircle_model(7).unwrap();
        let c = row_classes(&model, 20);
        for (i, &x) in c.iter().enumerate() {
            assert_eq!(x, ((i + 1) * 7).div_ceil(20) - 1);
        }
    }

    #[test]
    fn semicircle_entry_variance() {
        let model = semicircle_model(1).unwrap();
        let n = 2000;
        let h = sample_matrix(&model, n, 7).unwrap();
        let (mut sum, mut count) = (0.0, 0usize);
        for i in 0..n {
            for j in i + 1..n {
                sum += h[i * n + j] * h[i * n + j];
                count += 1;
            }
        }
        let var = sum / count as f64;
        assert!((var * n as f64 - 1.0).abs() < 0.05);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(h[i * n + j], h[j * n + i]);
            }
        }
    }

    #[test]
    fn block_profile_variances() {
        let params = BlockParams::new(3.0, 1.0, 1.0 / 3.0, 0.5).unwrap();
        let model = block_model(params, 2).unwrap();
        let n = 400;
        let h = sample_matrix(&model, n, 3).unwrap();
        let block_var = |r0: usize, r1: usize, c0: usize, c1: usize| {
            let mut s = 0.0;
            let mut k = 0;
            for i in r0..r1 {
                for j in c0..c1 {
                    if i != j {
                        s += h[i * n + j] * h[i * n + j];
                        k += 1;
                    }
                }
            }
            s / k as f64 * n as f64
        };
        assert!((block_var(0, 200, 0, 200) - 3.0).abs() < 0.15);
        assert!((block_var(0, 200, 200, 400) - 1.0).abs() < 0.05);
        assert!((block_var(200, 400, 200, 400) - 1.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn deterministic_and_degenerate() {
        let model = semicircle_model(2).unwrap();
        assert_eq!(sample_matrix(&model, 50, 11).unwrap(), sample_matrix(&model, 50, 11).unwrap());
        assert_ne!(sample_matrix(&model, 50, 11).unwrap(), sample_matrix(&model, 50, 12).unwrap());
        let diag = QveModel::new(vec![0.5, 0.5], vec![1.0, -2.0], vec![0.0; 4]).unwrap();
        let h = sample_matrix(&diag, 4, 1).unwrap();
        assert_eq!(h, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0, -2.0]);
        assert!(sample_matrix(&model, 1, 0).is_err());
    }

    #[test]
    fn distances_against_synthetic_draws() {
        use rand::Rng;
        let profile = semicircle_profile(2001);
        let cdf = ProfileCdf::new(&profile);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let n = 4000;
        let mut ev: Vec<f64> = (0..n).map(|_| cdf.quantile(rng.random::<f64>())).collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        let d = empirical_distance(&[SpectrumSample { n_mat: n, seed: 5, eigenvalues: ev }], &profile).unwrap();
        // Kolmogorov-Smirnov 99.9% quantile is about 1.95 / sqrt(n).
        assert!(d.ks < 1.95 / (n as f64).sqrt(), "{d:?}");
        assert!(d.l1 < 0.05);
        let two = SpectrumSample { n_mat: 2, seed: 0, eigenvalues: vec![-0.5, 0.5] };
        assert!(empirical_distance(&[two], &profile).unwrap().ks >= 0.2);
        assert!(matches!(empirical_distance(&[], &profile), Err(Error::EmptySamples)));
    }

    #[test]
    fn l1_of_a_point_mass_against_uniform() {
        // F uniform on [0, 1], all mass at 0.5: int |F - 1{t >= 0.5}| = 1/4.
        let taus = uniform_taus(0.0, 1.0, 11);
        let profile = DensityProfile {
            n: 1,
            v: vec![1.0; 11],
            avg: vec![1.0; 11],
            support: Vec::new(),
            eta_floor: 1e-6,
            error_estimate: vec![0.0; 11],
            clamped: vec![false; 11],
            taus,
        };
        let s = SpectrumSample { n_mat: 1, seed: 0, eigenvalues: vec![0.5] };
        let d = empirical_distance(&[s], &profile).unwrap();
        assert!((d.l1 - 0.25).abs() < 1e-12);
        assert!((d.ks - 0.5).abs() < 1e-12);
        assert!((abs_linear_integral(-1.0, 1.0, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_semicircle_spectrum() {
        let model = semicircle_model(1).unwrap();
        let s = sample_spectrum(&model, 300, 1).unwrap();
        assert_eq!(s.eigenvalues.len(), 300);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let d = empirical_distance(&[s], &semicircle_profile(1001)).unwrap();
        assert!(d.ks < 0.1);
    }
}
