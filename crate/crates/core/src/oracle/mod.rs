//! Numerical reference: exact eigenstates of the discretized Hamiltonian
//! for single realizations, observables built from them and ensemble
//! averages.

mod band;
mod eigen;
mod ensemble;
mod observables;

pub use eigen::{diagonalize, diagonalize_below, solve_for_packet, EigenSolution};
pub use ensemble::{
    run_ensemble, run_ensemble_checkpointed, EnsembleAccumulator, EnsembleResult, MeanCurve,
    Observables, Progress,
};
pub use observables::{
    density_for_state, envelope_decay_rate, initial_state, numeric_density,
    numeric_energy_distribution, numeric_windowed_density, smooth_ema, EnergyBins, EnergyHistogram,
    SMOOTHING_CONSTANT,
};

use crate::error::{Error, Result};
use crate::potential::PotentialSample;

/// Periodic finite-difference Hamiltonian -d^2/dx^2 + V on the sample grid:
/// 2/h^2 + V_i on the diagonal, -1/h^2 between neighbours, including the
/// wrap-around pair (0, n-1).
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub diag: Vec<f64>,
    pub hopping: f64,
    pub spacing: f64,
    pub x_grid: Vec<f64>,
}

pub fn build_hamiltonian(sample: &PotentialSample) -> Result<Hamiltonian> {
    let spec = &sample.spec;
    let h = spec.spacing();
    if h > spec.sigma_c / 8.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {h} exceeds sigma_c/8"
        )));
    }
    if sample.values.len() != spec.n_grid || spec.n_grid < 3 {
        return Err(Error::InvalidParameter(format!(
            "need n_grid >= 3 values matching the spec, got {}",
            sample.values.len()
        )));
    }
    let kinetic = 2.0 / (h * h);
    Ok(Hamiltonian {
        diag: sample.values.iter().map(|v| kinetic + v).collect(),
        hopping: -1.0 / (h * h),
        spacing: h,
        x_grid: spec.grid(),
    })
}

impl Hamiltonian {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            let j = (i + 1) % n;
            m[(i, j)] += self.hopping;
            m[(j, i)] += self.hopping;
        }
        m
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| self.diag[i] * v[i] + self.hopping * (v[(i + n - 1) % n] + v[(i + 1) % n]))
            .collect()
    }

    /// Gershgorin bounds on the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.hopping.abs();
        let lo = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - r;
        let hi = self.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + r;
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `lambda`, from the inertia of
    /// the symmetric LDL^T factorization of H - lambda. Eliminating the ring
    /// in order leaves a single fill-in column towards the last node.
    pub fn count_below(&self, lambda: f64) -> usize {
        let n = self.len();
        let b = self.hopping;
        let tiny = f64::MIN_POSITIVE.sqrt() * b.abs().max(1.0);
        let guard = |p: f64| if p == 0.0 { -tiny } else { p };
        let mut count = 0;
        let mut p = guard(self.diag[0] - lambda);
        // coupling of the current node to node n-1, and its running diagonal
        let mut r = b;
        let mut q = self.diag[n - 1] - lambda;
        for i in 0..n - 2 {
            if p < 0.0 {
                count += 1;
            }
            let inv = 1.0 / p;
            q -= r * r * inv;
            let next_direct = if i + 1 == n - 2 { b } else { 0.0 };
            let next_r = next_direct - b * r * inv;
            p = guard(self.diag[i + 1] - lambda - b * b * inv);
            r = next_r;
        }
        if p < 0.0 {
            count += 1;
        }
        q -= r * r / p;
        if guard(q) < 0.0 {
            count += 1;
        }
        count
    }
}
