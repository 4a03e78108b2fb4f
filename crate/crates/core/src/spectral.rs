//! Disorder-averaged self-energy, spectral function and the energy
//! distribution of a Gaussian wave packet.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::corefn::{erfcx_complex, faddeeva, principal_sqrt};
use crate::error::{Error, Result};
use crate::lyapunov::gamma_model;
use crate::potential::DisorderModel;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Initial Gaussian wave packet psi(x) ~ exp(-x^2 / (2 a^2)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub a: f64,
}

impl WavePacketSpec {
    pub fn new(a: f64) -> Result<Self> {
        let wp = WavePacketSpec { a };
        wp.validate()?;
        Ok(wp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_finite() && self.a > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "wave packet width must be > 0, got {}",
                self.a
            )))
        }
    }

    /// Whether the packet is narrow compared to the localization length at
    /// its typical energy 1/a^2. Logs a warning when it is not.
    pub fn check_narrow(&self, model: &DisorderModel) -> bool {
        let e_typ = 1.0 / (self.a * self.a);
        let ratio = self.a * gamma_model(e_typ, model);
        if ratio > 0.1 {
            log::warn!("wave packet width a = {} is not small against the localization length (a gamma = {ratio:.3})", self.a);
            false
        } else {
            true
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Born,
    Scba,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergy {
    pub value: Complex64,
    pub residual: f64,
    pub branch: Branch,
}

/// Coefficient d(E) of the momentum-independent self-energy
/// Sigma = d(E) / (i sqrt(E - Sigma)).
///
/// From the on-shell second-order term, d(E) = (1/2) int_0^inf c2(x) (1 + e^{2ipx}) dx
/// = (sqrt(2 pi)/4) sigma V0^2 [1 + w(sigma sqrt(2E))]. The Faddeeva form
/// is entire in E; for E < 0 it reduces to 1 + erfcx(sigma sqrt(2|E|)).
pub fn d_of_e(e: f64, model: &DisorderModel) -> Complex64 {
    let pref = 0.25 * SQRT_2PI * model.sigma_c * model.v0 * model.v0;
    let z = principal_sqrt(Complex64::new(2.0 * e, 0.0)) * model.sigma_c;
    pref * (1.0 + faddeeva(z))
}

/// Second-order self-energy d(E) / (i sqrt(E)).
pub fn sigma_born(e: f64, model: &DisorderModel) -> Result<SelfEnergy> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "Born self-energy requires E > 0, got {e}"
        )));
    }
    let d = d_of_e(e, model);
    let value = d / Complex64::new(0.0, e.sqrt());
    Ok(SelfEnergy {
        value,
        residual: 0.0,
        branch: Branch::Born,
    })
}

fn fixed_point_residual(sigma: Complex64, e: f64, d: Complex64) -> f64 {
    let root = principal_sqrt(Complex64::new(e, 0.0) - sigma);
    if root == Complex64::new(0.0, 0.0) {
        return if d == Complex64::new(0.0, 0.0) {
            sigma.norm()
        } else {
            f64::INFINITY
        };
    }
    (sigma - d / (Complex64::new(0.0, 1.0) * root)).norm()
}

/// All three roots of s^3 - E s^2 - d^2 = 0.
pub(crate) fn cubic_roots(e: f64, d: Complex64) -> [Complex64; 3] {
    let d2 = d * d;
    // depressed cubic t^3 + p t + q with s = t + E/3
    let p = -e * e / 3.0;
    let half_q = -(e * e * e / 27.0) - 0.5 * d2;
    // q^2/4 + p^3/27 simplified so large E does not cancel
    let disc = d2 * (e * e * e / 27.0 + 0.25 * d2);
    let sq = disc.sqrt();
    let c1 = -half_q + sq;
    let c2 = -half_q - sq;
    let c = if c1.norm() >= c2.norm() { c1 } else { c2 };
    if c.norm() == 0.0 {
        return [Complex64::new(e / 3.0, 0.0); 3];
    }
    // Cardano is accurate for the largest root; the other two come from
    // the quadratic left after deflation, s2 + s3 = E - s1, s2 s3 = d^2 / s1
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let u = c.powf(1.0 / 3.0);
    let s1 = [u, u * omega, u * omega * omega]
        .into_iter()
        .map(|uk| uk - p / (3.0 * uk) + e / 3.0)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("three candidates");
    let b = Complex64::new(e, 0.0) - s1;
    let prod = d2 / s1;
    let root = (b * b - 4.0 * prod).sqrt();
    let big = if (b + root).norm() >= (b - root).norm() {
        0.5 * (b + root)
    } else {
        0.5 * (b - root)
    };
    let small = if big.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        prod / big
    };
    let mut roots = [s1, big, small];
    let f = |s: Complex64| s * s * (s - e) - d2;
    let df = |s: Complex64| s * (3.0 * s - 2.0 * e);
    for r in roots.iter_mut() {
        for _ in 0..6 {
            let fr = f(*r);
            let dr = df(*r);
            if dr.norm() == 0.0 {
                break;
            }
            let next = *r - fr / dr;
            if f(next).norm() < fr.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots
}

/// Self-consistent self-energy, the solution of Sigma = d / (i sqrt(E - Sigma))
/// with negative imaginary part.
///
/// The fixed point is squared into a cubic; roots that fail the unsquared
/// equation are discarded. Below the support edge the surviving roots are
/// real and the one nearest zero is returned (imaginary part exactly zero).
pub fn sigma_scba(e: f64, model: &DisorderModel) -> Result<SelfEnergy> {
    if !e.is_finite() {
        return Err(Error::OutOfRange(format!("energy must be finite, got {e}")));
    }
    let d = d_of_e(e, model);
    let scale = d.norm().powf(2.0 / 3.0).max(f64::MIN_POSITIVE);
    // rounding noise in the imaginary part would put real roots on the
    // wrong side of the square-root cut
    let roots = cubic_roots(e, d).map(|s| {
        if s.im.abs() <= 1e-13 * s.norm() {
            Complex64::new(s.re, 0.0)
        } else {
            s
        }
    });
    let accepted: Vec<(Complex64, f64)> = roots
        .iter()
        .map(|&s| (s, fixed_point_residual(s, e, d)))
        .filter(|&(_, r)| r <= 1e-6 * scale)
        .collect();
    let decaying = accepted
        .iter()
        .filter(|(s, _)| s.im < -1e-13 * scale)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let pick = match decaying {
        Some(&(s, r)) => Some((s, r)),
        None => accepted
            .iter()
            .min_by(|a, b| a.0.norm().total_cmp(&b.0.norm()))
            .map(|&(s, _)| {
                let real = Complex64::new(s.re, 0.0);
                (real, fixed_point_residual(real, e, d))
            }),
    };
    match pick {
        Some((value, residual)) => Ok(SelfEnergy {
            value,
            residual,
            branch: Branch::Scba,
        }),
        None => Err(Error::NoConvergence(format!(
            "no root of the self-energy cubic satisfies the fixed point at E = {e} (d = {d})"
        ))),
    }
}

/// Lower edge of the support of the self-consistent spectrum, where the
/// imaginary part of Sigma vanishes. It is the negative root of the cubic's
/// discriminant, -4E^3 - 27 d(E)^2 = 0.
pub fn support_edge(model: &DisorderModel) -> f64 {
    if model.v0 == 0.0 {
        return 0.0;
    }
    let g = |e: f64| {
        let d = d_of_e(e, model).re;
        -4.0 * e * e * e - 27.0 * d * d
    };
    let d0 = d_of_e(0.0, model).re;
    let mut lo = -2.0 * (2.0 * d0).powf(2.0 / 3.0);
    while g(lo) <= 0.0 {
        lo *= 2.0;
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// A(p, E) = -(1/pi) Im 1/(E - p^2 - Sigma(E)).
pub fn spectral_function(p: f64, e: f64, model: &DisorderModel) -> Result<f64> {
    let s = sigma_scba(e, model)?;
    let g = 1.0 / (Complex64::new(e - p * p, 0.0) - s.value);
    Ok((-g.im / PI).max(0.0))
}

/// Normalized Wigner function of the initial packet, (1/pi) e^{-a^2 p^2 - q^2/a^2}.
pub fn wigner(q: f64, p: f64, wp: &WavePacketSpec) -> f64 {
    let a = wp.a;
    (-(a * a * p * p) - q * q / (a * a)).exp() / PI
}

/// P(E) for a given self-energy value:
/// (a/sqrt(pi)) Im[ erfcx(a s) / s ] with s = sqrt(Sigma - E).
pub fn energy_distribution_for_sigma(e: f64, wp: &WavePacketSpec, sigma: Complex64) -> f64 {
    let s = principal_sqrt(sigma - e);
    let a = wp.a;
    (a * FRAC_1_SQRT_PI * (erfcx_complex(a * s) / s).im).max(0.0)
}

/// Energy distribution of the initial packet in the disordered system.
///
/// Holds the support edge so repeated evaluation does not redo the
/// bisection.
#[derive(Debug, Clone, Copy)]
pub struct EnergyDistribution {
    pub wp: WavePacketSpec,
    pub model: DisorderModel,
    pub edge: f64,
}

impl EnergyDistribution {
    pub fn new(wp: WavePacketSpec, model: DisorderModel) -> Self {
        EnergyDistribution {
            wp,
            model,
            edge: support_edge(&model),
        }
    }

    pub fn at(&self, e: f64) -> f64 {
        if e <= self.edge {
            return 0.0;
        }
        match sigma_scba(e, &self.model) {
            Ok(s) if s.value.im < 0.0 => energy_distribution_for_sigma(e, &self.wp, s.value),
            _ => 0.0,
        }
    }
}

pub fn energy_distribution(e: f64, wp: &WavePacketSpec, model: &DisorderModel) -> f64 {
    EnergyDistribution::new(*wp, *model).at(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P0Convention {
    /// Clean limit of the disordered distribution, a e^{-a^2 E} / sqrt(pi E).
    #[default]
    CleanLimit,
    /// a e^{-a^2 E / 2} / sqrt(2 pi E), as quoted for figure comparison.
    Printed,
}

pub fn free_energy_distribution(
    e: f64,
    wp: &WavePacketSpec,
    convention: P0Convention,
) -> Result<f64> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "free energy distribution requires E > 0, got {e}"
        )));
    }
    let a = wp.a;
    Ok(match convention {
        P0Convention::CleanLimit => a * (-a * a * e).exp() / (PI * e).sqrt(),
        P0Convention::Printed => a * (-0.5 * a * a * e).exp() / (2.0 * PI * e).sqrt(),
    })
}
