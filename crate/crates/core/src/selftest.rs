//! Fast internal consistency checks over every module, meant to run in
//! well under a minute.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::corefn::{self, airy};
use crate::error::Result;
use crate::lyapunov::{
    gamma_born, gamma_model, gamma_white_noise, mean_free_paths, thouless_kk_check,
};
use crate::oracle::{
    build_hamiltonian, initial_state, numeric_density, numeric_windowed_density, run_ensemble,
    solve_for_packet, EnergyBins, Observables,
};
use crate::potential::{empirical_autocorrelation, sample_potential, DisorderModel, PotentialSpec};
use crate::profile::{
    box_grid, gogolin_weight, n_fixed_energy, window_weight, windowed_density, EnergyWindow,
};
use crate::quad::{integrate, QuadOptions};
use crate::spectral::{d_of_e, sigma_scba, WavePacketSpec};

/// Deliberate faults, to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Ai(0) in the power series off by one part in 1e6.
    AiryConstant,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub block: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<CheckOutcome>,
    pub seconds: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_blocks(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.block.as_str())
            .collect();
        out.dedup();
        out
    }

    /// Plain-text table, one line per check.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<10} {:<40} {:<6} {:>8}  detail\n",
            "block", "check", "result", "seconds"
        );
        for c in &self.checks {
            s.push_str(&format!(
                "{:<10} {:<40} {:<6} {:>8.3}  {}\n",
                c.block,
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.seconds,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        s.push_str(&format!(
            "{} checks, {failed} failed, {:.1} s\n",
            self.checks.len(),
            self.seconds
        ));
        s
    }
}

type CheckFn = Box<dyn Fn() -> Result<(bool, String)>>;

struct Runner {
    checks: Vec<CheckOutcome>,
}

impl Runner {
    fn run(&mut self, block: &str, name: &str, f: CheckFn) {
        let t = Instant::now();
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(CheckOutcome {
            block: block.into(),
            name: name.into(),
            passed,
            detail,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn check_rel(value: f64, expected: f64, tol: f64) -> (bool, String) {
    let r = rel(value, expected);
    (
        r <= tol,
        format!("{value:.10e} vs {expected:.10e} (rel {r:.1e}, tol {tol:.0e})"),
    )
}

pub fn run(fault: Option<Fault>) -> Report {
    let start = Instant::now();
    let mut r = Runner { checks: Vec::new() };
    let ai0 = match fault {
        Some(Fault::AiryConstant) => airy::AI0 * (1.0 + 1e-6),
        None => airy::AI0,
    };
    corefn_checks(&mut r, ai0);
    lyapunov_checks(&mut r);
    spectral_checks(&mut r);
    profile_checks(&mut r);
    potential_checks(&mut r);
    oracle_checks(&mut r);
    Report {
        checks: r.checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn corefn_checks(r: &mut Runner, ai0: f64) {
    r.run(
        "corefn",
        "Ai(0) from 3^(-2/3) / Gamma(2/3)",
        Box::new(move || {
            let p = airy::airy_pair_from(0.0, ai0)?;
            Ok(check_rel(
                p.ai,
                3f64.powf(-2.0 / 3.0) / 1.354_117_939_426_400_4,
                1e-13,
            ))
        }),
    );
    r.run(
        "corefn",
        "Airy Wronskian 1/pi on [-30, 12]",
        Box::new(move || {
            let mut worst = 0.0_f64;
            for y in [
                -30.0, -10.0, -6.0, -3.0, -1.0, 0.0, 0.7, 1.9, 3.0, 6.0, 12.0,
            ] {
                let p = airy::airy_pair_from(y, ai0)?;
                worst = worst
                    .max((p.wronskian() * PI - 1.0).abs() / (1.0 + p.ai.abs() * p.bip.abs() * PI));
            }
            Ok((worst < 1e-11, format!("max rel deviation {worst:.1e}")))
        }),
    );
    r.run(
        "corefn",
        "Ai continuous across region switches",
        Box::new(move || {
            let mut worst = 0.0_f64;
            for y in [-4.5, 2.0, 9.0] {
                let lo = airy::airy_pair_from(y - 1e-9, ai0)?.ai;
                let hi = airy::airy_pair_from(y + 1e-9, ai0)?.ai;
                worst = worst.max(rel(lo, hi));
            }
            Ok((worst < 1e-7, format!("max jump {worst:.1e}")))
        }),
    );
    r.run(
        "corefn",
        "Faddeeva w(0), w(i), Re w(1)",
        Box::new(|| {
            let a = corefn::faddeeva(Complex64::new(0.0, 0.0));
            let b = corefn::faddeeva(Complex64::new(0.0, 1.0));
            let c = corefn::faddeeva(Complex64::new(1.0, 0.0));
            let err = (a - 1.0)
                .norm()
                .max((b.re - 0.427_583_576_155_807).abs() + b.im.abs())
                .max((c.re - (-1f64).exp()).abs());
            Ok((err < 1e-13, format!("max error {err:.1e}")))
        }),
    );
}

fn lyapunov_checks(r: &mut Runner) {
    r.run(
        "lyapunov",
        "white noise: D/(16E) at large E",
        Box::new(|| {
            let d = 1e-3;
            let e = 2000.0 * (d / 4.0f64).powf(2.0 / 3.0);
            Ok(check_rel(gamma_white_noise(e, d)?, d / (16.0 * e), 0.01))
        }),
    );
    r.run(
        "lyapunov",
        "white noise: sqrt(-E) at large -E",
        Box::new(|| {
            let d = 1e-3;
            let e = -2000.0 * (d / 4.0f64).powf(2.0 / 3.0);
            Ok(check_rel(gamma_white_noise(e, d)?, (-e).sqrt(), 0.01))
        }),
    );
    r.run(
        "lyapunov",
        "white noise positive on scan grid",
        Box::new(|| {
            let d = 1e-3;
            let unit = (d / 4.0f64).powf(2.0 / 3.0);
            let mut worst = f64::INFINITY;
            for k in 0..=400 {
                let e = (-200.0 + k as f64) * unit;
                let g = gamma_white_noise(e, d)?;
                if !g.is_finite() {
                    return Ok((false, format!("non-finite at E = {e}")));
                }
                worst = worst.min(g);
            }
            Ok((worst > 0.0, format!("min gamma {worst:.3e}")))
        }),
    );
    r.run(
        "lyapunov",
        "Thouless relation reproduces gamma",
        Box::new(|| {
            let d = 1e-3;
            let unit = (d / 4.0f64).powf(2.0 / 3.0);
            let mut worst = 0.0_f64;
            for eps in [-2.0, 0.5, 3.0] {
                let kk = thouless_kk_check(eps * unit, d)?;
                worst = worst.max(rel(kk.gamma, gamma_white_noise(eps * unit, d)?));
            }
            Ok((worst < 1e-3, format!("max rel deviation {worst:.1e}")))
        }),
    );
    r.run(
        "lyapunov",
        "Born gamma = 1/(2 l_minus), model near Born",
        Box::new(|| {
            let m = DisorderModel::new(0.0325, 1.0)?;
            let mfp = mean_free_paths(1.0, &m)?;
            let g = gamma_born(1.0, &m)?;
            let id = rel(1.0 / mfp.ell_minus, 2.0 * g);
            let near = rel(gamma_model(2.0, &m), gamma_born(2.0, &m)?);
            Ok((
                id < 1e-12 && near < 0.02,
                format!("identity {id:.1e}, model/born at E=2 off by {near:.1e}"),
            ))
        }),
    );
}

fn spectral_checks(r: &mut Runner) {
    r.run(
        "spectral",
        "int P(E) dE = 1 for four (a, V0)",
        Box::new(|| {
            let mut worst = 0.0_f64;
            for a in [SQRT_2, 2.0 * SQRT_2] {
                for v0 in [0.0165, 0.0325] {
                    let w = window_weight(
                        &WavePacketSpec::new(a)?,
                        &DisorderModel::new(v0, 1.0)?,
                        EnergyWindow::ALL,
                    );
                    worst = worst.max((w - 1.0).abs());
                }
            }
            Ok((worst < 1e-4, format!("max |int P - 1| = {worst:.1e}")))
        }),
    );
    r.run(
        "spectral",
        "SCBA fixed-point residual, 500 energies",
        Box::new(|| {
            let m = DisorderModel::new(0.0325, 1.0)?;
            let mut worst = 0.0_f64;
            for k in 0..500 {
                let e = -0.2 + 5.2 * k as f64 / 499.0;
                let s = sigma_scba(e, &m)?;
                worst = worst.max(s.residual / d_of_e(e, &m).norm().powf(2.0 / 3.0));
            }
            Ok((
                worst < 1e-10,
                format!("max residual / |d|^(2/3) = {worst:.1e}"),
            ))
        }),
    );
}

fn u_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

fn profile_checks(r: &mut Runner) {
    let breaks = [0.0, 1.0, 4.0, 12.0, 40.0];
    r.run(
        "profile",
        "u-integral at x = 0 is 16/(3 pi^2)",
        Box::new(move || {
            let v = integrate(gogolin_weight, &breaks, u_opts()).value;
            let err = (v - 16.0 / (3.0 * PI * PI)).abs();
            Ok((err < 1e-9, format!("{v:.12} (err {err:.1e})")))
        }),
    );
    r.run(
        "profile",
        "normalization integral is 2/pi^2",
        Box::new(move || {
            let v = integrate(|u| gogolin_weight(u) / (1.0 + u * u), &breaks, u_opts()).value;
            let err = (v - 2.0 / (PI * PI)).abs();
            Ok((err < 1e-9, format!("{v:.12} (err {err:.1e})")))
        }),
    );
    r.run(
        "profile",
        "fixed-energy profile scale collapse",
        Box::new(|| {
            let (g1, g2) = (0.013, 0.71);
            let mut worst = 0.0_f64;
            for t in [0.0, 0.05, 0.7, 3.0, 12.0] {
                worst = worst.max(rel(
                    n_fixed_energy(t / g1, g1)? / g1,
                    n_fixed_energy(t / g2, g2)? / g2,
                ));
            }
            Ok((worst < 1e-11, format!("max rel deviation {worst:.1e}")))
        }),
    );
    r.run(
        "profile",
        "theory windows add up to the full profile",
        Box::new(|| {
            let wp = WavePacketSpec::new(SQRT_2)?;
            let m = DisorderModel::new(0.0325, 1.0)?;
            let l = 200.0;
            let x: Vec<f64> = box_grid(l, 41);
            let full = windowed_density(&x, &wp, &m, l, EnergyWindow::ALL)?;
            let mut sum = vec![0.0; x.len()];
            for w in EnergyWindow::partition(&[0.0, 0.103, 0.178, 0.278, 0.403])? {
                let p = windowed_density(&x, &wp, &m, l, w)?;
                sum.iter_mut().zip(&p.values).for_each(|(s, v)| *s += v);
            }
            let worst = sum
                .iter()
                .zip(&full.values)
                .map(|(a, b)| (a - b).abs() / b)
                .fold(0.0, f64::max);
            Ok((worst < 1e-10, format!("max rel deviation {worst:.1e}")))
        }),
    );
}

fn potential_checks(r: &mut Runner) {
    r.run(
        "potential",
        "autocorrelation at lag 0 is V0^2",
        Box::new(|| {
            let spec = PotentialSpec {
                v0: 0.0325,
                sigma_c: 1.0,
                box_length: 200.0,
                n_grid: 3200,
                seed: 5,
            };
            let samples = (0..100)
                .map(|i| sample_potential(&spec, i))
                .collect::<Result<Vec<_>>>()?;
            let c = empirical_autocorrelation(&samples)?;
            Ok(check_rel(c[0], spec.v0 * spec.v0, 0.1))
        }),
    );
}

fn small_spec() -> PotentialSpec {
    PotentialSpec {
        v0: 0.0325,
        sigma_c: 1.0,
        box_length: 60.0,
        n_grid: 960,
        seed: 11,
    }
}

fn oracle_checks(r: &mut Runner) {
    r.run(
        "oracle",
        "eigenstates orthonormal and complete",
        Box::new(|| {
            let spec = PotentialSpec {
                v0: 0.0325,
                sigma_c: 1.0,
                box_length: 200.0,
                n_grid: 3200,
                seed: 3,
            };
            let ham = build_hamiltonian(&sample_potential(&spec, 0)?)?;
            let wp = WavePacketSpec::new(SQRT_2)?;
            let psi = initial_state(&ham.x_grid, &wp, ham.spacing)?;
            let sol = solve_for_packet(&ham, &psi, 23.0, 1e-10)?;
            let orth = sol.orthonormality_error();
            let missing = 1.0 - sol.overlaps(&psi).iter().map(|c| c * c).sum::<f64>();
            Ok((
                orth < 1e-8 && missing.abs() < 1e-8,
                format!("orthonormality {orth:.1e}, missing weight {missing:.1e}"),
            ))
        }),
    );
    r.run(
        "oracle",
        "numeric windows add up to the full density",
        Box::new(|| {
            let ham = build_hamiltonian(&sample_potential(&small_spec(), 5)?)?;
            let wp = WavePacketSpec::new(SQRT_2)?;
            let psi = initial_state(&ham.x_grid, &wp, ham.spacing)?;
            let sol = solve_for_packet(&ham, &psi, 23.0, 1e-10)?;
            let full = numeric_density(&sol, &wp)?;
            let mut sum = vec![0.0; full.values.len()];
            for w in EnergyWindow::partition(&[0.0, 0.103, 0.178, 0.278, 0.403])? {
                let p = numeric_windowed_density(&sol, &wp, w)?;
                sum.iter_mut().zip(&p.values).for_each(|(s, v)| *s += v);
            }
            let peak = full.values.iter().cloned().fold(0.0, f64::max);
            let worst = sum
                .iter()
                .zip(&full.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / peak;
            Ok((worst < 1e-10, format!("max deviation / peak {worst:.1e}")))
        }),
    );
    r.run(
        "oracle",
        "ensemble reruns are byte-identical",
        Box::new(|| {
            let obs = Observables {
                density: true,
                energy_bins: Some(EnergyBins::new(-0.5, 2.0, 50)?),
                windows: vec![EnergyWindow::new(0.0, 0.2)?],
            };
            let wp = WavePacketSpec::new(SQRT_2)?;
            let a = serde_json::to_vec(&run_ensemble(&small_spec(), &wp, &obs, 2)?)?;
            let b = serde_json::to_vec(&run_ensemble(&small_spec(), &wp, &obs, 2)?)?;
            Ok((a == b, format!("{} bytes", a.len())))
        }),
    );
}
