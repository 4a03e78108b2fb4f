//! The four subcommands. Each takes a normalized, validated config and
//! writes its tables into the output directory.

use std::path::PathBuf;

use loc1d::lyapunov::{gamma_born, gamma_model, gamma_transfer_matrix};
use loc1d::oracle::{run_ensemble, EnergyBins, Observables};
use loc1d::potential::{DisorderModel, PotentialSpec};
use loc1d::profile::{asymptotic_density, simplified_density, windowed_density};
use loc1d::selftest::{self, Fault};
use loc1d::spectral::{free_energy_distribution, EnergyDistribution, P0Convention};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::Table;
use crate::CliError;

/// Transfer-matrix steps per correlation length.
const TM_STEPS_PER_SIGMA: f64 = 16.0;

fn header(command: &str, cfg: &ExperimentConfig, extra: Value) -> Value {
    json!({ "command": command, "config": cfg, "run": extra })
}

fn stem(base: &str, v0: f64, several: bool) -> String {
    if several {
        format!("{base}_v0_{v0}")
    } else {
        base.to_string()
    }
}

fn model(v0: f64) -> Result<DisorderModel, CliError> {
    Ok(DisorderModel::new(v0, 1.0)?)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LyapunovFlags {
    pub born_only: bool,
}

pub fn lyapunov(cfg: &ExperimentConfig, flags: LyapunovFlags) -> Result<Vec<PathBuf>, CliError> {
    let energies = &cfg.lyapunov.energies;
    if energies.is_empty() {
        return Err(CliError::Usage("empty energy grid".into()));
    }
    let per_real = cfg.lyapunov.total_length / cfg.lyapunov.n_real as f64;
    let n_grid = (per_real * TM_STEPS_PER_SIGMA).round() as usize;
    let mut table = Table::new(header(
        "lyapunov",
        cfg,
        json!({ "born_only": flags.born_only, "tm_length_per_realization": per_real, "tm_n_grid": n_grid }),
    ));
    table.push("E", energies.clone());
    for v0 in cfg.model.v0.values() {
        let m = model(v0)?;
        let born: Vec<f64> = energies
            .iter()
            .map(|&e| gamma_born(e, &m).unwrap_or(f64::NAN))
            .collect();
        table.push(format!("gamma_born_v0_{v0}"), born);
        if flags.born_only {
            continue;
        }
        table.push(
            format!("gamma_model_v0_{v0}"),
            energies.iter().map(|&e| gamma_model(e, &m)).collect(),
        );
        let spec = PotentialSpec {
            v0,
            sigma_c: 1.0,
            box_length: per_real,
            n_grid,
            seed: cfg.ensemble.seed,
        };
        let mut tm = Vec::new();
        let mut tm_err = Vec::new();
        for &e in energies {
            log::info!("transfer matrix V0 = {v0}, E = {e}");
            let r = gamma_transfer_matrix(&spec, e, n_grid, cfg.lyapunov.n_real)?;
            tm.push(r.gamma);
            tm_err.push(r.stderr);
        }
        table.push(format!("gamma_tm_v0_{v0}"), tm);
        table.push(format!("gamma_tm_stderr_v0_{v0}"), tm_err);
    }
    table.save(&cfg.outputs.directory, "lyapunov", &cfg.outputs.formats)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PofeFlags {
    pub free_printed: bool,
}

pub fn pofe(cfg: &ExperimentConfig, flags: PofeFlags) -> Result<Vec<PathBuf>, CliError> {
    let wp = cfg.wave_packet();
    let bins = EnergyBins::new(cfg.pofe.e_min, cfg.pofe.e_max, cfg.pofe.bins)?;
    let centers = bins.centers();
    let obs = Observables {
        density: false,
        energy_bins: Some(bins),
        windows: vec![],
    };
    let v0s = cfg.model.v0.values();
    let mut written = Vec::new();
    for &v0 in &v0s {
        let dist = EnergyDistribution::new(wp, model(v0)?);
        let ens = run_ensemble(&cfg.potential_spec(v0), &wp, &obs, cfg.ensemble.n_real)?;
        let free = |conv| -> Vec<f64> {
            centers
                .iter()
                .map(|&e| {
                    if e > 0.0 {
                        free_energy_distribution(e, &wp, conv).unwrap()
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let numeric = ens.energy.as_ref().expect("energy bins were requested");
        let mut table = Table::new(header(
            "pofe",
            cfg,
            json!({
                "v0": v0,
                "support_edge": dist.edge,
                "n_ok": ens.n_ok,
                "n_failed": ens.n_failed,
                "numeric_negative_weight": ens.negative_weight.mean[0],
                "numeric_negative_weight_stderr": ens.negative_weight.stderr[0],
                "completeness": ens.completeness.mean[0],
            }),
        ));
        table.push("E", centers.clone());
        table.push("P_theory", centers.iter().map(|&e| dist.at(e)).collect());
        table.push("P_free", free(P0Convention::CleanLimit));
        if flags.free_printed {
            table.push("P_free_printed", free(P0Convention::Printed));
        }
        table.push("P_numeric", numeric.mean.clone());
        table.push("P_numeric_stderr", numeric.stderr.clone());
        table.push("P_numeric_smoothed", ens.energy_smoothed.clone());
        written.extend(table.save(
            &cfg.outputs.directory,
            &stem("pofe", v0, v0s.len() > 1),
            &cfg.outputs.formats,
        )?);
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ProfileFlags {
    pub windows: bool,
    pub log: bool,
}

fn log10_column(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v.log10()).collect()
}

pub fn profile(cfg: &ExperimentConfig, flags: ProfileFlags) -> Result<Vec<PathBuf>, CliError> {
    let wp = cfg.wave_packet();
    let windows = if flags.windows {
        cfg.energy_windows()?
    } else {
        vec![]
    };
    let obs = Observables {
        density: true,
        energy_bins: None,
        windows: windows.clone(),
    };
    let v0s = cfg.model.v0.values();
    let mut written = Vec::new();
    for &v0 in &v0s {
        let spec = cfg.potential_spec(v0);
        let m = model(v0)?;
        let l = spec.box_length;
        let ens = run_ensemble(&spec, &wp, &obs, cfg.ensemble.n_real)?;
        // a divisor of n_grid keeps the rows a uniform ring grid
        let stride = (spec.n_grid / cfg.profile.n_points).max(1);
        let stride = (stride..=spec.n_grid)
            .find(|s| spec.n_grid.is_multiple_of(*s))
            .unwrap_or(1);
        let rows: Vec<usize> = (0..spec.n_grid).step_by(stride).collect();
        let x: Vec<f64> = rows.iter().map(|&i| ens.x_grid[i]).collect();
        let pick = |v: &[f64]| -> Vec<f64> { rows.iter().map(|&i| v[i]).collect() };
        let theory = asymptotic_density(&x, &wp, &m, l)?;
        let simple = simplified_density(&x, &wp, &m, l)?;
        let numeric = ens.density.as_ref().expect("density was requested");
        let run = json!({
            "v0": v0,
            "n_ok": ens.n_ok,
            "n_failed": ens.n_failed,
            "theory_mass": theory.values.iter().sum::<f64>() * spec.spacing() * stride as f64,
            "stride": stride,
        });
        let mut table = Table::new(header("profile", cfg, run));
        table.push("x", x.clone());
        table.push("n_theory", theory.values.clone());
        table.push("n_simplified", simple.values.clone());
        table.push("n_numeric", pick(&numeric.mean));
        table.push("n_numeric_stderr", pick(&numeric.stderr));
        if flags.log {
            table.push("log10_n_theory", log10_column(&theory.values));
            table.push("log10_n_numeric", log10_column(&pick(&numeric.mean)));
        }
        let several = v0s.len() > 1;
        written.extend(table.save(
            &cfg.outputs.directory,
            &stem("profile", v0, several),
            &cfg.outputs.formats,
        )?);
        for (k, (w, curve)) in windows.iter().zip(&ens.windows).enumerate() {
            let th = windowed_density(&x, &wp, &m, l, *w)?;
            let label = (b'a' + k as u8) as char;
            let run = json!({ "v0": v0, "window": [w.lo, w.hi], "label": label.to_string(), "empty_theory": th.empty_window });
            let mut t = Table::new(header("profile", cfg, run));
            t.push("x", x.clone());
            t.push("n_theory", th.values.clone());
            t.push("n_numeric", pick(&curve.mean));
            t.push("n_numeric_stderr", pick(&curve.stderr));
            if flags.log {
                t.push("log10_n_theory", log10_column(&th.values));
                t.push("log10_n_numeric", log10_column(&pick(&curve.mean)));
            }
            let name = format!("{}_window_{label}", stem("profile", v0, several));
            written.extend(t.save(&cfg.outputs.directory, &name, &cfg.outputs.formats)?);
        }
    }
    Ok(written)
}

/// Runs the self-test; the report goes to stdout as a table or JSON.
pub fn selftest(json_out: bool, fault: Option<Fault>) -> Result<(), CliError> {
    let report = selftest::run(fault);
    if json_out {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?
        );
    } else {
        print!("{}", report.table());
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "self-test failed in: {}",
            report.failed_blocks().join(", ")
        )))
    }
}
