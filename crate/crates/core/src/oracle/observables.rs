use serde::{Deserialize, Serialize};

use super::EigenSolution;
use crate::error::{Error, Result};
use crate::profile::{DensityProfile, EnergyWindow};
use crate::spectral::WavePacketSpec;

/// Smoothing factor of the exponential moving average applied to numerical
/// energy distributions.
pub const SMOOTHING_CONSTANT: f64 = 0.007;

/// Gaussian packet (pi a^2)^(-1/4) e^{-x^2/(2a^2)} sampled on the grid and
/// renormalized so that h sum |psi|^2 = 1 exactly.
pub fn initial_state(x_grid: &[f64], wp: &WavePacketSpec, spacing: f64) -> Result<Vec<f64>> {
    wp.validate()?;
    if wp.a < 4.0 * spacing {
        return Err(Error::InvalidParameter(format!(
            "packet width {} not resolved by grid spacing {spacing} (need a >= 4h)",
            wp.a
        )));
    }
    let mut psi: Vec<f64> = x_grid
        .iter()
        .map(|x| (-x * x / (2.0 * wp.a * wp.a)).exp())
        .collect();
    let norm = (spacing * psi.iter().map(|v| v * v).sum::<f64>()).sqrt();
    psi.iter_mut().for_each(|v| *v /= norm);
    Ok(psi)
}

/// Pairs closer than 1e-12 that both carry weight make the diagonal
/// time average incomplete. High-energy +-k pairs are split only by
/// negligible backscattering and hold almost no weight, so they are ignored.
fn warn_degeneracies(sol: &EigenSolution, weights: &[f64]) {
    let suspicious = (1..sol.len())
        .filter(|&k| (sol.energies[k] - sol.energies[k - 1]).abs() < 1e-12)
        .any(|k| weights[k].min(weights[k - 1]) > 1e-10);
    if suspicious {
        log::warn!("near-degenerate eigenvalues carry weight: the time-averaged density is not diagonal in this basis");
    }
}

fn weighted_density(sol: &EigenSolution, weights: &[f64], keep: impl Fn(f64) -> bool) -> Vec<f64> {
    let n = sol.states.nrows();
    let mut out = vec![0.0; n];
    for (k, (&e, &w)) in sol.energies.iter().zip(weights).enumerate() {
        if !keep(e) || w == 0.0 {
            continue;
        }
        let col = sol.states.column(k);
        for (o, phi) in out.iter_mut().zip(col.iter()) {
            *o += w * phi * phi;
        }
    }
    out
}

fn weights(sol: &EigenSolution, wp: &WavePacketSpec) -> Result<Vec<f64>> {
    let psi = initial_state(&sol.x_grid, wp, sol.spacing)?;
    Ok(sol.overlaps(&psi).into_iter().map(|c| c * c).collect())
}

/// Infinite-time average of |psi(x, t)|^2 for a non-degenerate spectrum,
/// sum_n |phi_n(x)|^2 |<phi_n|psi_0>|^2.
pub fn numeric_density(sol: &EigenSolution, wp: &WavePacketSpec) -> Result<DensityProfile> {
    numeric_windowed_density(sol, wp, EnergyWindow::ALL)
}

/// Time-averaged density for an arbitrary initial state, restricted to
/// eigenvalues in the window.
pub fn density_for_state(sol: &EigenSolution, psi: &[f64], window: EnergyWindow) -> Vec<f64> {
    let w: Vec<f64> = sol.overlaps(psi).into_iter().map(|c| c * c).collect();
    weighted_density(sol, &w, |e| window.contains(e))
}

/// The same sum restricted to eigenvalues in (lo, hi].
pub fn numeric_windowed_density(
    sol: &EigenSolution,
    wp: &WavePacketSpec,
    window: EnergyWindow,
) -> Result<DensityProfile> {
    let w = weights(sol, wp)?;
    warn_degeneracies(sol, &w);
    let values = weighted_density(sol, &w, |e| window.contains(e));
    let meta = serde_json::json!({
        "kind": "numeric",
        "a": wp.a,
        "window": [window.lo, window.hi],
        "states": sol.len(),
    });
    let mut p = DensityProfile::on_ring(sol.x_grid.clone(), values, sol.spacing, meta);
    p.empty_window = p.values.iter().all(|&v| v == 0.0);
    Ok(p)
}

/// Uniform energy bins on [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl EnergyBins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo < hi) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "bad energy bins [{lo}, {hi}) x {count}"
            )));
        }
        Ok(EnergyBins { lo, hi, count })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.lo + (k as f64 + 0.5) * self.width())
            .collect()
    }

    pub fn index(&self, e: f64) -> Option<usize> {
        if e < self.lo || e >= self.hi {
            return None;
        }
        Some((((e - self.lo) / self.width()) as usize).min(self.count - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyHistogram {
    pub centers: Vec<f64>,
    /// Weight per unit energy; integrates to the weight inside the bins.
    pub density: Vec<f64>,
    pub smoothed: Vec<f64>,
    /// Sum of all weights before binning.
    pub total_weight: f64,
}

/// Histogram of |<phi_n|psi_0>|^2 over E_n.
pub fn numeric_energy_distribution(
    sol: &EigenSolution,
    wp: &WavePacketSpec,
    bins: &EnergyBins,
) -> Result<EnergyHistogram> {
    let w = weights(sol, wp)?;
    let total: f64 = w.iter().sum();
    let mut density = vec![0.0; bins.count];
    for (&e, &wn) in sol.energies.iter().zip(&w) {
        if let Some(k) = bins.index(e) {
            density[k] += wn;
        }
    }
    let scale = 1.0 / (total * bins.width());
    density.iter_mut().for_each(|d| *d *= scale);
    let smoothed = smooth_ema(&density, SMOOTHING_CONSTANT);
    Ok(EnergyHistogram {
        centers: bins.centers(),
        density,
        smoothed,
        total_weight: total,
    })
}

/// Exponential moving average with factor `alpha` over the bin index, run
/// forward and then backward so the result is not shifted.
pub fn smooth_ema(values: &[f64], alpha: f64) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let pass = |input: &mut dyn Iterator<Item = f64>| -> Vec<f64> {
        let mut out = Vec::with_capacity(values.len());
        let mut s = None;
        for v in input {
            let next = match s {
                None => v,
                Some(prev) => alpha * v + (1.0 - alpha) * prev,
            };
            s = Some(next);
            out.push(next);
        }
        out
    };
    let forward = pass(&mut values.iter().copied());
    let mut backward = pass(&mut forward.iter().rev().copied());
    backward.reverse();
    backward
}

/// Decay rate of an eigenfunction on the ring: least-squares slope of the
/// log envelope against the distance from its maximum, over distances in
/// [L/8, 3L/8]. The envelope is the running maximum of |phi| over L/64.
pub fn envelope_decay_rate(phi: &[f64], spacing: f64) -> Option<f64> {
    let n = phi.len();
    let l = n as f64 * spacing;
    let peak = (0..n).max_by(|&a, &b| phi[a].abs().total_cmp(&phi[b].abs()))?;
    let half_window = ((l / 128.0) / spacing).ceil() as usize;
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let di = i.abs_diff(peak).min(n - i.abs_diff(peak));
        let d = di as f64 * spacing;
        if d < l / 8.0 || d > 3.0 * l / 8.0 {
            continue;
        }
        let env = (0..=2 * half_window)
            .map(|k| phi[(i + n + k - half_window) % n].abs())
            .fold(0.0, f64::max);
        if env <= 0.0 {
            continue;
        }
        let y = env.ln();
        sx += d;
        sy += y;
        sxx += d * d;
        sxy += d * y;
        m += 1.0;
    }
    if m < 2.0 {
        return None;
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    Some(-slope)
}
