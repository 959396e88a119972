//! Output records, CSV/JSON encoding and atomic file writes.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), which
//! round-trips `f64` and makes the output a pure function of the bits.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use qve_core::density::{DensityProfile, Interval};
use qve_core::model::AssumptionReport;
use qve_core::montecarlo::SpectrumSample;
use qve_core::singularity::SingularityReport;
use qve_core::solver::SolutionGrid;
use qve_core::stability::SpectralData;
use serde::Serialize;

/// Fixed-width float text used in CSV cells and JSON numbers.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Compact JSON with [`num`] formatting for floats.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes a batch of named outputs into `dir`. Nothing is written unless
/// every output was produced.
pub fn write_all(dir: &Path, files: &[(String, String)]) -> anyhow::Result<()> {
    for (name, contents) in files {
        write_atomic(&dir.join(name), contents)?;
        log::info!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

/// Columns `tau, eta, x_index, re_m, im_m, residual`, one row per component.
pub fn grid_csv(grid: &SolutionGrid) -> String {
    let mut out = String::from("tau,eta,x_index,re_m,im_m,residual\n");
    for (i, &tau) in grid.taus.iter().enumerate() {
        for (j, &eta) in grid.etas.iter().enumerate() {
            let slice = grid.slice(i, j);
            let (t, e, r) = (num(tau), num(eta), num(slice.residual));
            for (x, m) in slice.m.iter().enumerate() {
                let _ = writeln!(out, "{t},{e},{x},{},{},{r}", num(m.re), num(m.im));
            }
        }
    }
    out
}

/// Columns `tau, v_1 .. v_n, rho_avg, error_estimate`.
pub fn density_csv(profile: &DensityProfile) -> String {
    let mut out = String::from("tau");
    for x in 1..=profile.n {
        let _ = write!(out, ",v_{x}");
    }
    out.push_str(",rho_avg,error_estimate\n");
    for (i, &tau) in profile.taus.iter().enumerate() {
        out.push_str(&num(tau));
        for &v in profile.at(i) {
            out.push(',');
            out.push_str(&num(v));
        }
        let _ = writeln!(out, ",{},{}", num(profile.avg[i]), num(profile.error_estimate[i]));
    }
    out
}

pub fn eigenvalues_csv(sample: &SpectrumSample) -> String {
    let mut out = String::from("eigenvalue\n");
    for &e in &sample.eigenvalues {
        out.push_str(&num(e));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportRecord {
    pub left: f64,
    pub right: f64,
}

pub fn support_records(intervals: &[Interval]) -> Vec<SupportRecord> {
    intervals.iter().map(|iv| SupportRecord { left: iv.left, right: iv.right }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralRecord {
    pub z: [f64; 2],
    pub radius: f64,
    pub gap: f64,
    pub f: Vec<f64>,
}

impl From<&SpectralData> for SpectralRecord {
    fn from(sp: &SpectralData) -> Self {
        SpectralRecord { z: [sp.z.re, sp.z.im], radius: sp.radius, gap: sp.gap, f: sp.f.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityRecord {
    pub tau0: f64,
    pub kind: &'static str,
    pub sigma: f64,
    pub psi: f64,
    pub fitted_exponent: f64,
    pub predicted_amplitude: Vec<f64>,
    pub fitted_amplitude: Vec<f64>,
    pub stability: f64,
}

impl From<&SingularityReport> for SingularityRecord {
    fn from(r: &SingularityReport) -> Self {
        SingularityRecord {
            tau0: r.tau0,
            kind: r.kind.as_str(),
            sigma: r.sigma,
            psi: r.psi,
            fitted_exponent: r.fitted_exponent,
            predicted_amplitude: r.predicted_amplitude.clone(),
            fitted_amplitude: r.fitted_amplitude.clone(),
            stability: r.stability,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub ks: f64,
    pub l1: f64,
    pub n_mat: usize,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StripRecord {
    pub c: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionRecord {
    pub primitivity_k: Option<usize>,
    pub diagonal_strip: Option<StripRecord>,
    pub regularity_value: f64,
    pub regularity_eps: f64,
}

impl From<&AssumptionReport> for AssumptionRecord {
    fn from(r: &AssumptionReport) -> Self {
        AssumptionRecord {
            primitivity_k: r.primitivity_k,
            diagonal_strip: r.diagonal_strip.map(|(c, eps)| StripRecord { c, eps }),
            regularity_value: r.regularity_value,
            regularity_eps: r.regularity_eps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn json_floats_use_fixed_digits() {
        let r = McReport { ks: 0.5, l1: 1e-3, n_mat: 10, seeds: vec![1, 2] };
        assert_eq!(
            to_json(&r).unwrap(),
            "{\"ks\":5.0000000000000000e-1,\"l1\":1.0000000000000000e-3,\"n_mat\":10,\"seeds\":[1,2]}\n"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, "a").unwrap();
        write_atomic(&path, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn num_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }

        #[test]
        fn json_round_trips(x in proptest::num::f64::NORMAL) {
            let text = to_json(&[x]).unwrap();
            let back: Vec<f64> = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back[0].to_bits(), x.to_bits());
        }
    }
}
