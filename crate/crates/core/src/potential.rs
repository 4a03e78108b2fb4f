//! Gaussian-correlated random potentials on a periodic grid.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strength and correlation length of the disorder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    pub v0: f64,
    pub sigma_c: f64,
}

impl DisorderModel {
    pub fn new(v0: f64, sigma_c: f64) -> Result<Self> {
        let m = DisorderModel { v0, sigma_c };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0.is_finite() && self.v0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "v0 must be finite and >= 0, got {}",
                self.v0
            )));
        }
        if !(self.sigma_c.is_finite() && self.sigma_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_c must be > 0, got {}",
                self.sigma_c
            )));
        }
        Ok(())
    }

    /// Two-point correlation <V(x) V(0)>.
    pub fn c2(&self, x: f64) -> f64 {
        let s = x / self.sigma_c;
        self.v0 * self.v0 * (-0.5 * s * s).exp()
    }

    /// Fourier transform of the correlation, int c2(x) e^{-ikx} dx.
    pub fn spectral_density(&self, k: f64) -> f64 {
        let s = k * self.sigma_c;
        self.v0
            * self.v0
            * self.sigma_c
            * (2.0 * std::f64::consts::PI).sqrt()
            * (-0.5 * s * s).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub v0: f64,
    pub sigma_c: f64,
    pub box_length: f64,
    pub n_grid: usize,
    pub seed: u64,
}

impl PotentialSpec {
    pub fn model(&self) -> DisorderModel {
        DisorderModel {
            v0: self.v0,
            sigma_c: self.sigma_c,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n_grid as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.model().validate()?;
        if self.v0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "v0 must be > 0, got {}",
                self.v0
            )));
        }
        if self.n_grid < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_grid must be >= 2, got {}",
                self.n_grid
            )));
        }
        if !(self.box_length.is_finite() && self.box_length >= 50.0 * self.sigma_c) {
            return Err(Error::InvalidParameter(format!(
                "box length {} must be at least 50 correlation lengths",
                self.box_length
            )));
        }
        if self.spacing() > self.sigma_c / 8.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing {} exceeds sigma_c/8",
                self.spacing()
            )));
        }
        Ok(())
    }

    /// Outside the weak-disorder regime the theory is not expected to hold.
    pub fn is_weak_disorder(&self) -> bool {
        self.v0 * self.sigma_c * self.sigma_c < 0.1
    }

    /// Grid coordinates x_j = -L/2 + j h.
    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_grid)
            .map(|j| -0.5 * self.box_length + j as f64 * h)
            .collect()
    }
}

/// Correlation at separation dx on the periodic box (wrapped distance).
pub fn c2(dx: f64, spec: &PotentialSpec) -> f64 {
    let l = spec.box_length;
    let d = dx.abs() % l;
    spec.model().c2(d.min(l - d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub spec: PotentialSpec,
    pub realization_index: u64,
    pub values: Vec<f64>,
}

/// Random stream for one (seed, realization) pair.
pub fn realization_rng(seed: u64, realization_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(realization_index);
    rng
}

/// Discrete power spectrum: the DFT of the wrapped correlation on the grid.
fn discrete_spectrum(spec: &PotentialSpec) -> Vec<f64> {
    let n = spec.n_grid;
    let h = spec.spacing();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(c2(j as f64 * h, spec), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = buf.iter().map(|c| c.re).fold(0.0, f64::max);
    let mut clipped = false;
    let out = buf
        .iter()
        .map(|c| {
            if c.re < -1e-12 * peak {
                clipped = true;
            }
            c.re.max(0.0)
        })
        .collect();
    if clipped {
        log::warn!("negative spectral weight clipped to zero");
    }
    out
}

fn synthesize(spec: &PotentialSpec, realization_index: u64) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if !spec.is_weak_disorder() {
        log::warn!(
            "v0 sigma_c^2 = {} is outside the weak-disorder regime",
            spec.v0 * spec.sigma_c * spec.sigma_c
        );
    }
    let n = spec.n_grid;
    let power = discrete_spectrum(spec);
    let mut rng = realization_rng(spec.seed, realization_index);
    let mut modes = vec![Complex64::new(0.0, 0.0); n];
    let norm = 1.0 / n as f64;
    for m in 0..=n / 2 {
        let amp = (power[m] * norm).sqrt();
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        if m == 0 || 2 * m == n {
            modes[m] = Complex64::new(amp * a, 0.0);
        } else {
            let xi = Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2;
            modes[m] = amp * xi;
            modes[n - m] = amp * xi.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut modes);
    Ok(modes)
}

/// Draws one realization by spectral synthesis.
///
/// Each Fourier mode gets an independent complex Gaussian amplitude scaled by
/// the square root of the discrete power spectrum; Hermitian symmetry keeps
/// the field real, and the ensemble correlation on the grid equals the wrapped
/// correlation exactly.
pub fn sample_potential(spec: &PotentialSpec, realization_index: u64) -> Result<PotentialSample> {
    let field = synthesize(spec, realization_index)?;
    Ok(PotentialSample {
        spec: *spec,
        realization_index,
        values: field.iter().map(|c| c.re).collect(),
    })
}

/// Circular autocorrelation averaged over realizations and grid positions,
/// for all lags 0..n_grid.
pub fn empirical_autocorrelation(samples: &[PotentialSample]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("no samples".into()))?;
    let n = first.values.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut acc = vec![0.0; n];
    for s in samples {
        if s.spec != first.spec || s.values.len() != n {
            return Err(Error::InvalidParameter(
                "samples do not share a common spec".into(),
            ));
        }
        let mut buf: Vec<Complex64> = s.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fwd.process(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex64::new(c.norm_sqr(), 0.0);
        }
        inv.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.re / (n as f64 * n as f64);
        }
    }
    let m = samples.len() as f64;
    Ok(acc.into_iter().map(|a| a / m).collect())
}

#[derive(Serialize, Deserialize)]
struct RawHeader {
    spec: PotentialSpec,
    realization_index: u64,
}

/// Writes a sample as one JSON header line followed by one decimal value
/// per line. Values are printed in shortest round-trip form.
pub fn write_raw(path: &Path, sample: &PotentialSample) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = RawHeader {
        spec: sample.spec,
        realization_index: sample.realization_index,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for v in &sample.values {
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<PotentialSample> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty potential dump".into()))??;
    let header: RawHeader = serde_json::from_str(&first)?;
    let mut values = Vec::with_capacity(header.spec.n_grid);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        values.push(
            line.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("bad value {line:?}: {e}")))?,
        );
    }
    if values.len() != header.spec.n_grid {
        return Err(Error::Format(format!(
            "expected {} values, found {}",
            header.spec.n_grid,
            values.len()
        )));
    }
    Ok(PotentialSample {
        spec: header.spec,
        realization_index: header.realization_index,
        values,
    })
}
