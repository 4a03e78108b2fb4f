//! Fixed-energy localized density (Gogolin's profile) and the asymptotic
//! density of an expanding wave packet, obtained by averaging the
//! fixed-energy profile over the packet's energy distribution.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{gamma_born, gamma_model};
use crate::potential::DisorderModel;
use crate::quad::{integrate, integrate_vec, QuadOptions, VecQuadResult};
use crate::spectral::{free_energy_distribution, EnergyDistribution, P0Convention, WavePacketSpec};

/// Upper limit of the u-integral; the weight is below 1e-50 beyond it.
const U_MAX: f64 = 40.0;
const U_BREAKS: [f64; 6] = [0.0, 0.5, 1.5, 4.0, 10.0, U_MAX];

/// u (1+u^2)^2 sinh(pi u) / (1 + cosh(pi u))^2, written with t = e^{-pi u}
/// so that large u does not overflow.
pub fn gogolin_weight(u: f64) -> f64 {
    let t = (-PI * u).exp();
    let q = 1.0 + u * u;
    u * q * q * 2.0 * t * (1.0 - t) / ((1.0 + t) * (1.0 + t) * (1.0 + t))
}

fn u_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_intervals: 4000,
    }
}

/// Shared u-quadrature for many points: values far below the peak of the
/// fixed-energy profile need no relative accuracy.
fn u_options_vec() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_intervals: 4000,
    }
}

/// Disorder-averaged density of a state at energy E with Lyapunov
/// exponent gamma, centered at the origin, on the infinite line:
///
///   n_E(x) = (pi^2 gamma / 8) int_0^inf w(u) e^{-(1+u^2) gamma |x| / 2} du.
pub fn n_fixed_energy(x: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    let t = gamma * x.abs();
    let r = integrate(
        |u| gogolin_weight(u) * (-(1.0 + u * u) * 0.5 * t).exp(),
        &U_BREAKS,
        u_options(),
    );
    Ok(PI * PI * gamma / 8.0 * r.value)
}

/// Small-distance form (2 gamma / 3)(1 - 2 gamma |x|), valid for gamma |x| < 0.05.
pub fn n_fixed_energy_center_expansion(x: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    let t = gamma * x.abs();
    if t >= 0.05 {
        return Err(Error::OutOfRange(format!(
            "center expansion needs gamma |x| < 0.05, got {t}"
        )));
    }
    Ok(2.0 * gamma / 3.0 * (1.0 - 2.0 * t))
}

/// Fixed-energy profile on a ring of length L: the sum over all periodic
/// images, done in closed form per u since each term is exponential in |x + jL|.
/// gamma = 0 gives the flat profile 1/L.
pub fn n_fixed_energy_periodic(x: f64, gamma: f64, box_length: f64) -> Result<f64> {
    let mut out = [0.0];
    periodic_profile(&[x], gamma, box_length, &mut out)?;
    Ok(out[0])
}

fn wrap_abs(x: f64, l: f64) -> f64 {
    let r = x.rem_euclid(l);
    r.min(l - r)
}

/// Evaluates the periodic fixed-energy profile at several points with a
/// shared adaptive u-quadrature.
fn periodic_profile(xs: &[f64], gamma: f64, l: f64, out: &mut [f64]) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "box length must be > 0, got {l}"
        )));
    }
    // for gamma L -> 0 every image contributes equally and the profile is flat
    if gamma * l < 1e-7 {
        out.iter_mut().for_each(|o| *o = 1.0 / l);
        return Ok(());
    }
    let dist: Vec<f64> = xs.iter().map(|&x| wrap_abs(x, l)).collect();
    let r: VecQuadResult = integrate_vec(
        |u, vals: &mut [f64]| {
            let w = gogolin_weight(u);
            let kappa = 0.5 * (1.0 + u * u) * gamma;
            let norm = w / -(-kappa * l).exp_m1();
            for (v, &d) in vals.iter_mut().zip(&dist) {
                *v = norm * ((-kappa * d).exp() + (-kappa * (l - d)).exp());
            }
        },
        xs.len(),
        &U_BREAKS,
        u_options_vec(),
    );
    for (o, v) in out.iter_mut().zip(r.values) {
        *o = PI * PI * gamma / 8.0 * v;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaChoice {
    /// Exact white-noise exponent with energy-matched noise strength.
    #[default]
    Model,
    /// Born approximation, divergent as E -> 0.
    Born,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyModel {
    /// Self-consistent distribution of the packet in the disordered system.
    #[default]
    SelfConsistent,
    /// Free-particle distribution.
    Free(P0Convention),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DensityOptions {
    pub gamma: GammaChoice,
    pub energy: EnergyModel,
    /// Convolve with the position marginal of the initial Wigner function.
    pub smear_initial_position: bool,
}

impl DensityOptions {
    /// Born exponent with the free energy distribution.
    pub fn simplified() -> Self {
        DensityOptions {
            gamma: GammaChoice::Born,
            energy: EnergyModel::Free(P0Convention::CleanLimit),
            smear_initial_position: false,
        }
    }
}

/// Half-open energy window (lo, hi]; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub const ALL: EnergyWindow = EnergyWindow {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo < hi && !lo.is_nan() && !hi.is_nan() {
            Ok(EnergyWindow { lo, hi })
        } else {
            Err(Error::InvalidParameter(format!(
                "energy window needs lo < hi, got ({lo}, {hi}]"
            )))
        }
    }

    pub fn contains(&self, e: f64) -> bool {
        e > self.lo && e <= self.hi
    }

    /// Consecutive windows from a sorted list of interior boundaries,
    /// starting at -inf and ending at +inf.
    pub fn partition(boundaries: &[f64]) -> Result<Vec<EnergyWindow>> {
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend_from_slice(boundaries);
        edges.push(f64::INFINITY);
        edges
            .windows(2)
            .map(|w| EnergyWindow::new(w[0], w[1]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub x_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Trapezoid integral of the values over the grid.
    pub mass: f64,
    /// Set when the energy window holds no spectral weight.
    pub empty_window: bool,
    pub meta: serde_json::Value,
}

impl DensityProfile {
    pub fn new(x_grid: Vec<f64>, values: Vec<f64>, meta: serde_json::Value) -> Self {
        let mass = trapezoid(&x_grid, &values);
        DensityProfile {
            x_grid,
            values,
            mass,
            empty_window: false,
            meta,
        }
    }

    /// Profile sampled on a periodic grid of spacing h (no duplicated
    /// endpoint); the mass is the rectangle sum.
    pub fn on_ring(
        x_grid: Vec<f64>,
        values: Vec<f64>,
        spacing: f64,
        meta: serde_json::Value,
    ) -> Self {
        let mass = spacing * values.iter().sum::<f64>();
        DensityProfile {
            x_grid,
            values,
            mass,
            empty_window: false,
            meta,
        }
    }

    /// CSV with a `# params-json` first line and columns `x,n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {}", serde_json::to_string(&self.meta)?)?;
        writeln!(w, "x,n")?;
        for (x, n) in self.x_grid.iter().zip(&self.values) {
            writeln!(w, "{x:e},{n:e}")?;
        }
        Ok(())
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Energy panels for integrating against P(E), restricted to a window.
/// Returns panels in E; the first may need the square-root substitution.
fn energy_panels(lower: f64, upper: f64, a: f64) -> Vec<f64> {
    let scale = 1.0 / (a * a);
    let mut pts = vec![lower];
    let mut candidates = vec![0.0, 0.25 * scale, scale, 3.0 * scale];
    let mut s = 10.0 * scale;
    while s < 1e8 {
        candidates.push(s);
        s *= 10.0;
    }
    candidates.push(1e8);
    for c in candidates {
        if c > lower && c < upper {
            pts.push(c);
        }
    }
    pts.push(upper.min(1e8));
    pts
}

/// Integrates f(E) P(E) over the intersection of `window` with the support
/// of the energy distribution. `f` fills a vector of length `dim`.
pub fn energy_integral<F>(
    dist: &EnergyDistribution,
    window: EnergyWindow,
    dim: usize,
    mut f: F,
    opts: QuadOptions,
) -> VecQuadResult
where
    F: FnMut(f64, f64, &mut [f64]),
{
    let lower = window.lo.max(dist.edge);
    let upper = window.hi.min(1e8);
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut intervals = 0;
    let mut converged = true;
    if !(upper > lower) {
        return VecQuadResult {
            values,
            errors,
            intervals,
            converged,
        };
    }
    let pts = energy_panels(lower, upper, dist.wp.a);
    let mut add = |r: VecQuadResult| {
        for i in 0..dim {
            values[i] += r.values[i];
            errors[i] += r.errors[i];
        }
        intervals += r.intervals;
        converged &= r.converged;
    };
    let mut start = 0;
    if lower == dist.edge {
        // P rises like sqrt(E - edge): substitute E = edge + t^2
        let b = pts[1];
        let tmax = (b - dist.edge).sqrt();
        let r = integrate_vec(
            |t, out: &mut [f64]| {
                let e = dist.edge + t * t;
                let p = dist.at(e);
                if p == 0.0 {
                    out.iter_mut().for_each(|o| *o = 0.0);
                    return;
                }
                f(e, p, out);
                out.iter_mut().for_each(|o| *o *= p * 2.0 * t);
            },
            dim,
            &[0.0, 0.5 * tmax, tmax],
            opts,
        );
        add(r);
        start = 1;
    }
    if pts.len() - start >= 2 {
        let r = integrate_vec(
            |e, out: &mut [f64]| {
                let p = dist.at(e);
                if p == 0.0 {
                    out.iter_mut().for_each(|o| *o = 0.0);
                    return;
                }
                f(e, p, out);
                out.iter_mut().for_each(|o| *o *= p);
            },
            dim,
            &pts[start..],
            opts,
        );
        add(r);
    }
    VecQuadResult {
        values,
        errors,
        intervals,
        converged,
    }
}

/// Integrates f(E) P0(E) over E > 0 within the window, with E = t^2 to
/// remove the 1/sqrt(E) singularity.
fn free_energy_integral<F>(
    wp: &WavePacketSpec,
    convention: P0Convention,
    window: EnergyWindow,
    dim: usize,
    mut f: F,
    opts: QuadOptions,
) -> VecQuadResult
where
    F: FnMut(f64, f64, &mut [f64]),
{
    let lower = window.lo.max(0.0);
    let upper = window.hi.min(1e4 / (wp.a * wp.a));
    if !(upper > lower) {
        return VecQuadResult {
            values: vec![0.0; dim],
            errors: vec![0.0; dim],
            intervals: 0,
            converged: true,
        };
    }
    let (t0, t1) = (lower.sqrt(), upper.sqrt());
    let s = 1.0 / wp.a;
    let mut bps = vec![t0];
    for c in [0.5 * s, s, 2.0 * s, 4.0 * s, 8.0 * s] {
        if c > t0 && c < t1 {
            bps.push(c);
        }
    }
    bps.push(t1);
    integrate_vec(
        |t, out: &mut [f64]| {
            let e = t * t;
            if e == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            // P0(E) dE = P0(t^2) 2t dt, finite at t = 0
            let p = free_energy_distribution(e, wp, convention).unwrap_or(0.0);
            f(e, p, out);
            out.iter_mut().for_each(|o| *o *= p * 2.0 * t);
        },
        dim,
        &bps,
        opts,
    )
}

fn density_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_intervals: 20000,
    }
}

fn gamma_of(e: f64, model: &DisorderModel, choice: GammaChoice) -> Option<f64> {
    match choice {
        GammaChoice::Model => Some(gamma_model(e, model)),
        GammaChoice::Born => gamma_born(e, model).ok(),
    }
}

/// Energy-averaged asymptotic density on a periodic box, restricted to an
/// energy window.
pub fn windowed_density_with(
    x_grid: &[f64],
    wp: &WavePacketSpec,
    model: &DisorderModel,
    box_length: f64,
    window: EnergyWindow,
    options: DensityOptions,
) -> Result<DensityProfile> {
    wp.validate()?;
    model.validate()?;
    if !(box_length > 0.0 && box_length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "box length must be > 0, got {box_length}"
        )));
    }
    if !(window.lo < window.hi) {
        return Err(Error::InvalidParameter(format!(
            "empty energy window ({}, {}]",
            window.lo, window.hi
        )));
    }
    wp.check_narrow(model);
    // the profile is even in x and periodic: evaluate unique wrapped distances
    let mut keys: Vec<f64> = x_grid.iter().map(|&x| wrap_abs(x, box_length)).collect();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    let born_at_origin = options.gamma == GammaChoice::Born && keys.first() == Some(&0.0);
    // the Born exponent diverges at E -> 0 and with it the density at x = 0;
    // that point is set to +inf and kept out of the quadrature
    let finite_keys = if born_at_origin {
        &keys[1..]
    } else {
        &keys[..]
    };
    let dim = finite_keys.len();

    let failure: std::sync::Mutex<Option<Error>> = std::sync::Mutex::new(None);
    let integrand = |e: f64, _p: f64, out: &mut [f64]| {
        let Some(g) = gamma_of(e, model, options.gamma) else {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        };
        if let Err(err) = periodic_profile(finite_keys, g, box_length, out) {
            let mut slot = failure.lock().expect("no panics while holding the lock");
            slot.get_or_insert(Error::NoConvergence(format!("profile at E = {e}: {err}")));
            out.iter_mut().for_each(|o| *o = 0.0);
        }
    };
    let result = match options.energy {
        EnergyModel::SelfConsistent => {
            let dist = EnergyDistribution::new(*wp, *model);
            energy_integral(&dist, window, dim, integrand, density_options())
        }
        EnergyModel::Free(conv) => {
            free_energy_integral(wp, conv, window, dim, integrand, density_options())
        }
    };
    if let Some(err) = failure.into_inner().expect("lock not poisoned") {
        return Err(err);
    }
    if !result.converged {
        log::warn!(
            "energy quadrature did not reach its tolerance in window ({}, {}]",
            window.lo,
            window.hi
        );
    }
    let mut by_key = result.values;
    if born_at_origin {
        by_key.insert(0, f64::INFINITY);
    }
    let mut values: Vec<f64> = x_grid
        .iter()
        .map(|&x| {
            let k = wrap_abs(x, box_length);
            let i = keys.partition_point(|&v| v < k);
            by_key[i]
        })
        .collect();
    if options.smear_initial_position {
        values = smear(x_grid, &values, wp.a, box_length)?;
    }
    let empty = values.iter().all(|&v| v == 0.0);
    let meta = serde_json::json!({
        "kind": "theory",
        "a": wp.a,
        "v0": model.v0,
        "sigma_c": model.sigma_c,
        "box_length": box_length,
        "window": [window.lo, window.hi],
        "options": options,
    });
    let mut profile = DensityProfile::new(x_grid.to_vec(), values, meta);
    profile.empty_window = empty;
    Ok(profile)
}

/// Convolution with the initial position distribution e^{-q^2/a^2}/(sqrt(pi) a)
/// on a uniform grid, wrapping around the box.
fn smear(x: &[f64], y: &[f64], a: f64, box_length: f64) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Ok(y.to_vec());
    }
    let h = x[1] - x[0];
    let uniform = h > 0.0 && x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    if !uniform {
        return Err(Error::InvalidParameter(
            "position smearing needs a uniform x-grid".into(),
        ));
    }
    let x0 = x[0];
    // linear interpolation of the periodic profile
    let sample = |t: f64| {
        let s = (t - x0).rem_euclid(box_length) / h;
        let i = (s.floor() as usize).min(x.len() - 1);
        let frac = s - i as f64;
        let j = if i + 1 < x.len() {
            i + 1
        } else {
            ((x[i] + h - x0).rem_euclid(box_length) / h).round() as usize
        };
        let (yi, yj) = (y[i], y[j.min(x.len() - 1)]);
        if frac == 0.0 {
            yi
        } else {
            (1.0 - frac) * yi + frac * yj
        }
    };
    let reach = (8.0 * a / h).ceil() as i64;
    let kernel: Vec<(f64, f64)> = (-reach..=reach)
        .map(|k| {
            let q = k as f64 * h;
            (q, (-(q * q) / (a * a)).exp() / (PI.sqrt() * a) * h)
        })
        .collect();
    Ok(x.par_iter()
        .map(|&xi| kernel.iter().map(|&(q, w)| w * sample(xi - q)).sum())
        .collect())
}

pub fn windowed_density(
    x_grid: &[f64],
    wp: &WavePacketSpec,
    model: &DisorderModel,
    box_length: f64,
    window: EnergyWindow,
) -> Result<DensityProfile> {
    windowed_density_with(
        x_grid,
        wp,
        model,
        box_length,
        window,
        DensityOptions::default(),
    )
}

pub fn asymptotic_density(
    x_grid: &[f64],
    wp: &WavePacketSpec,
    model: &DisorderModel,
    box_length: f64,
) -> Result<DensityProfile> {
    windowed_density(x_grid, wp, model, box_length, EnergyWindow::ALL)
}

/// Born exponent with the free energy distribution; diverges at x = 0.
pub fn simplified_density(
    x_grid: &[f64],
    wp: &WavePacketSpec,
    model: &DisorderModel,
    box_length: f64,
) -> Result<DensityProfile> {
    windowed_density_with(
        x_grid,
        wp,
        model,
        box_length,
        EnergyWindow::ALL,
        DensityOptions::simplified(),
    )
}

/// Spectral weight of the window, int P(E) dE over it.
pub fn window_weight(wp: &WavePacketSpec, model: &DisorderModel, window: EnergyWindow) -> f64 {
    let dist = EnergyDistribution::new(*wp, *model);
    energy_integral(
        &dist,
        window,
        1,
        |_, _, out| out[0] = 1.0,
        density_options(),
    )
    .values[0]
}

/// Uniform grid of n points covering [-L/2, L/2].
pub fn box_grid(box_length: f64, n: usize) -> Vec<f64> {
    let h = box_length / (n - 1) as f64;
    (0..n).map(|i| -0.5 * box_length + i as f64 * h).collect()
}
