//! Lyapunov exponents: Born approximation, exact white-noise result with an
//! energy-dependent noise strength, and a transfer-matrix estimator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corefn::{faddeeva, inv_modulus_sq, m_log_derivative};
use crate::error::{Error, Result};
use crate::potential::{sample_potential, DisorderModel, PotentialSpec};
use crate::quad::{integrate, QuadOptions};
use crate::stats::MeanError;

const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Born,
    WhiteNoiseExact,
    TransferMatrix,
    ThoulessKk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub energy: f64,
    pub gamma: f64,
    pub method: Method,
    pub stderr: f64,
    pub n_real: usize,
    pub converged: bool,
}

fn require_positive_energy(e: f64, what: &str) -> Result<()> {
    if e > 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{what} requires E > 0, got {e}")))
    }
}

/// Born approximation sqrt(pi/2) sigma V0^2 exp(-2 sigma^2 E) / (4E).
pub fn gamma_born(e: f64, model: &DisorderModel) -> Result<f64> {
    require_positive_energy(e, "gamma_born")?;
    let s = model.sigma_c;
    Ok(SQRT_HALF_PI * s * model.v0 * model.v0 * (-2.0 * s * s * e).exp() / (4.0 * e))
}

/// Strength D of the white noise that reproduces the Born exponent at E.
pub fn matched_noise_strength(e: f64, model: &DisorderModel) -> f64 {
    let s = model.sigma_c;
    4.0 * SQRT_HALF_PI * s * model.v0 * model.v0 * (-2.0 * s * s * e).exp()
}

fn airy_scale(d: f64) -> f64 {
    (0.25 * d).cbrt()
}

/// Exact Lyapunov exponent of a white-noise potential of strength D.
///
/// With energies measured in units of (D/4)^(2/3) the Airy argument is
/// y = -E / (D/4)^(2/3), and gamma = (D/4)^(1/3) M'(y)/M(y), with M' the
/// derivative with respect to y. This is the sign that is positive and
/// reaches D/(16E) at large E.
pub fn gamma_white_noise(e: f64, d: f64) -> Result<f64> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise strength must be >= 0, got {d}"
        )));
    }
    if d == 0.0 {
        return Ok((-e).max(0.0).sqrt());
    }
    let s = airy_scale(d);
    let y = -e / (s * s);
    Ok(s * m_log_derivative(y))
}

/// gamma_white_noise with the noise strength matched at each energy.
pub fn gamma_model(e: f64, model: &DisorderModel) -> f64 {
    let d = matched_noise_strength(e, model);
    gamma_white_noise(e, d).expect("matched strength is non-negative")
}

/// Integrated density of states per unit length for white noise.
pub fn cumulative_dos_white_noise(e: f64, d: f64) -> Result<f64> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise strength must be >= 0, got {d}"
        )));
    }
    if d == 0.0 {
        return Ok(e.max(0.0).sqrt() / PI);
    }
    let s = airy_scale(d);
    let y = -e / (s * s);
    Ok(s * inv_modulus_sq(y) / (PI * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KkCheck {
    pub gamma: f64,
    pub error: f64,
}

/// Lyapunov exponent reconstructed from the density of states through the
/// Kramers-Kronig type relation
///
///   gamma(E) = gamma_0(E) - P int (N(E') - N_0(E')) / (E' - E) dE'.
///
/// The sign in front of the principal value is the one for which the
/// reconstruction agrees with the direct formula.
pub fn thouless_kk_check(e: f64, d: f64) -> Result<KkCheck> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise strength must be > 0, got {d}"
        )));
    }
    let s = airy_scale(d);
    let eps = e / (s * s);
    if eps.abs() > 50.0 {
        return Err(Error::OutOfRange(format!(
            "E must lie within 50 (D/4)^(2/3) of zero, got {eps} in those units"
        )));
    }
    // scaled DOS difference; the free part sqrt(eps)/pi is subtracted
    let diff = |t: f64| inv_modulus_sq(-t) / (PI * PI) - t.max(0.0).sqrt() / PI;
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    // n(t) is below 1e-12 for t < -9; the upper tail decays like t^-5/2
    let lo = -12.0;
    let hi = 1.0e5;
    let delta = if eps == 0.0 { 1.0 } else { eps.abs().min(1.0) };
    // folded window with t = eps +/- u^2
    let inner = integrate(
        |u| {
            if u == 0.0 {
                return 0.0;
            }
            let t = u * u;
            2.0 * (diff(eps + t) - diff(eps - t)) / u
        },
        &[0.0, delta.sqrt()],
        opts,
    );
    let mut value = inner.value;
    let mut error = inner.error;
    let mut outer = |a: f64, b: f64| {
        if b <= a {
            return;
        }
        let mut bps = vec![a];
        for p in [0.0, 10.0, 100.0, 1000.0, 10000.0] {
            if p > a && p < b {
                bps.push(p);
            }
        }
        bps.push(b);
        let r = integrate(|t| diff(t) / (t - eps), &bps, opts);
        value += r.value;
        error += r.error;
    };
    outer(lo, eps - delta);
    outer(eps + delta, hi);
    // tail beyond hi: diff ~ (5/(32 pi)) t^-5/2
    value += hi.powf(-2.5) / (16.0 * PI);
    let gamma0 = (-eps).max(0.0).sqrt();
    Ok(KkCheck {
        gamma: s * (gamma0 - value),
        error: s * error,
    })
}

/// Transfer-matrix estimate of the Lyapunov exponent.
///
/// Iterates the discretized equation psi_{n+1} = (2 + h^2 (V_n - E)) psi_n - psi_{n-1}
/// along each realization, renormalizing every 32 steps.
pub fn gamma_transfer_matrix(
    spec: &PotentialSpec,
    e: f64,
    n_steps: usize,
    n_real: usize,
) -> Result<LyapunovResult> {
    spec.validate()?;
    let h = spec.spacing();
    let limit = if e == 0.0 {
        spec.sigma_c
    } else {
        spec.sigma_c.min(2.0 * PI / e.abs().sqrt())
    };
    if h > limit / 16.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {h} too coarse for E = {e}; need h <= {}",
            limit / 16.0
        )));
    }
    if n_steps == 0 || n_steps > spec.n_grid {
        return Err(Error::InvalidParameter(format!(
            "n_steps must be in 1..={} (one pass over the box), got {n_steps}",
            spec.n_grid
        )));
    }
    if n_real == 0 {
        return Err(Error::InvalidParameter("n_real must be positive".into()));
    }
    let per_real: Vec<f64> = (0..n_real as u64)
        .into_par_iter()
        .map(|r| sample_potential(spec, r).map(|s| lyapunov_along(&s.values, h, e, n_steps)))
        .collect::<Result<_>>()?;
    Ok(summarize(e, &per_real))
}

/// Lyapunov exponent along one potential array.
///
/// Growth is measured in the quadratic form conserved by the free recursion,
/// psi_n^2 + psi_{n-1}^2 - 2 cos(theta) psi_n psi_{n-1} with
/// 2 cos(theta) = 2 - h^2 E, so a clean system gives exactly zero. The
/// Euclidean norm of (psi_{n-1}, psi_n) would add an offset of order
/// ln(1/(k h)) / length. Outside the free band the Euclidean norm is used.
pub fn lyapunov_along(v: &[f64], h: f64, e: f64, n_steps: usize) -> f64 {
    let h2 = h * h;
    let c = 1.0 - 0.5 * h2 * e;
    let in_band = c.abs() < 1.0;
    let norm = |p: f64, q: f64| {
        if in_band {
            (p * p + q * q - 2.0 * c * p * q).max(0.0).sqrt()
        } else {
            p.hypot(q)
        }
    };
    let (mut prev, mut cur) = (1.0_f64, 1.0_f64);
    let mut log_sum = -norm(prev, cur).ln();
    for (n, &vn) in v.iter().take(n_steps).enumerate() {
        let next = (2.0 + h2 * (vn - e)) * cur - prev;
        prev = cur;
        cur = next;
        if (n + 1) % 32 == 0 {
            let r = norm(prev, cur);
            log_sum += r.ln();
            prev /= r;
            cur /= r;
        }
    }
    log_sum += norm(prev, cur).ln();
    log_sum / (n_steps as f64 * h)
}

fn summarize(e: f64, per_real: &[f64]) -> LyapunovResult {
    let me = MeanError::from_samples(per_real);
    let converged = me.stderr <= 0.1 * me.mean.abs();
    if !converged {
        log::warn!(
            "transfer matrix at E = {e}: stderr/gamma = {:.3}",
            me.stderr / me.mean.abs()
        );
    }
    LyapunovResult {
        energy: e,
        gamma: me.mean,
        method: Method::TransferMatrix,
        stderr: me.stderr,
        n_real: per_real.len(),
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFreePaths {
    pub ell_plus: f64,
    pub ell_minus: f64,
    pub ell_zero: f64,
}

/// Mean free paths from the half-line integrals of the correlation.
///
/// int_0^inf c2(x) e^{2ipx} dx = V0^2 sigma sqrt(pi/2) w(sqrt(2) p sigma).
pub fn mean_free_paths(e: f64, model: &DisorderModel) -> Result<MeanFreePaths> {
    require_positive_energy(e, "mean_free_paths")?;
    let p = e.sqrt();
    let base = model.v0 * model.v0 * model.sigma_c * SQRT_HALF_PI / (2.0 * e);
    let w = faddeeva(Complex64::new(
        std::f64::consts::SQRT_2 * p * model.sigma_c,
        0.0,
    ));
    Ok(MeanFreePaths {
        ell_plus: 1.0 / base,
        ell_minus: 1.0 / (base * w.re),
        ell_zero: 1.0 / (base * w.im),
    })
}

/// p + i/(2 l_-) + i/(2 l_+) - 1/(2 l_0).
pub fn effective_wavevector(e: f64, model: &DisorderModel) -> Result<Complex64> {
    let m = mean_free_paths(e, model)?;
    Ok(Complex64::new(
        e.sqrt() - 0.5 / m.ell_zero,
        0.5 / m.ell_minus + 0.5 / m.ell_plus,
    ))
}
