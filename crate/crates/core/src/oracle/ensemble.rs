use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observables::{
    initial_state, numeric_energy_distribution, numeric_windowed_density, smooth_ema, EnergyBins,
};
use super::{build_hamiltonian, solve_for_packet, SMOOTHING_CONSTANT};
use crate::error::{Error, Result};
use crate::potential::{sample_potential, PotentialSpec};
use crate::profile::EnergyWindow;
use crate::spectral::WavePacketSpec;

/// Realizations per block; blocks are the unit of parallel work and of
/// checkpointing.
const BLOCK: u64 = 8;
/// Weight of the packet allowed outside the computed part of the spectrum.
const MISSING_WEIGHT: f64 = 1e-10;

/// What to record per realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub density: bool,
    pub energy_bins: Option<EnergyBins>,
    pub windows: Vec<EnergyWindow>,
}

impl Observables {
    /// Scalars recorded for every realization: weight at E < 0 and the
    /// total weight of the computed states.
    const SCALARS: usize = 2;

    fn dim(&self, n_grid: usize) -> usize {
        Self::SCALARS
            + if self.density { n_grid } else { 0 }
            + self.energy_bins.map_or(0, |b| b.count)
            + self.windows.len() * n_grid
    }
}

/// Running count, sum and sum of squares of a vector observable.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    pub count: u64,
    pub sum: Vec<f64>,
    pub sumsq: Vec<f64>,
}

impl EnsembleAccumulator {
    pub fn new(dim: usize) -> Self {
        EnsembleAccumulator {
            count: 0,
            sum: vec![0.0; dim],
            sumsq: vec![0.0; dim],
        }
    }

    pub fn from_observation(v: &[f64]) -> Self {
        EnsembleAccumulator {
            count: 1,
            sum: v.to_vec(),
            sumsq: v.iter().map(|x| x * x).collect(),
        }
    }

    pub fn merge(&mut self, other: &EnsembleAccumulator) {
        assert_eq!(
            self.sum.len(),
            other.sum.len(),
            "accumulators of different shape"
        );
        self.count += other.count;
        self.sum
            .iter_mut()
            .zip(&other.sum)
            .for_each(|(a, b)| *a += b);
        self.sumsq
            .iter_mut()
            .zip(&other.sumsq)
            .for_each(|(a, b)| *a += b);
    }

    /// Merges in a fixed binary tree, so the result depends only on the order
    /// of `parts`.
    pub fn tree_merge(parts: &[EnsembleAccumulator], dim: usize) -> EnsembleAccumulator {
        match parts.len() {
            0 => EnsembleAccumulator::new(dim),
            1 => parts[0].clone(),
            n => {
                let mut left = Self::tree_merge(&parts[..n / 2], dim);
                left.merge(&Self::tree_merge(&parts[n / 2..], dim));
                left
            }
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.sum.iter().map(|s| s / n).collect()
    }

    /// Standard error of the mean; zero with fewer than two samples.
    pub fn stderr(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.sum.len()];
        }
        let n = self.count as f64;
        self.sum
            .iter()
            .zip(&self.sumsq)
            .map(|(s, q)| {
                let mean = s / n;
                ((q / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurve {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n_ok: u64,
    pub n_failed: u64,
    pub x_grid: Vec<f64>,
    pub density: Option<MeanCurve>,
    pub energy_centers: Vec<f64>,
    pub energy: Option<MeanCurve>,
    /// Moving average of the mean energy histogram.
    pub energy_smoothed: Vec<f64>,
    pub windows: Vec<MeanCurve>,
    /// Mean weight of the packet on states with E < 0.
    pub negative_weight: MeanCurve,
    /// Mean total weight on the computed states (completeness).
    pub completeness: MeanCurve,
}

fn observe(
    spec: &PotentialSpec,
    wp: &WavePacketSpec,
    obs: &Observables,
    index: u64,
) -> Result<Vec<f64>> {
    let sample = sample_potential(spec, index)?;
    let ham = build_hamiltonian(&sample)?;
    let psi = initial_state(&ham.x_grid, wp, ham.spacing)?;
    // the packet's Gaussian momentum tail is gone well below this; the
    // algebraic tail from scattering may push the cutoff up
    let cutoff = 45.0 / (wp.a * wp.a) + 6.0 * spec.v0;
    let sol = solve_for_packet(&ham, &psi, cutoff, MISSING_WEIGHT)?;
    let overlaps = sol.overlaps(&psi);
    let mut out = Vec::with_capacity(obs.dim(spec.n_grid));
    let negative: f64 = sol
        .energies
        .iter()
        .zip(&overlaps)
        .filter(|(e, _)| **e < 0.0)
        .map(|(_, c)| c * c)
        .sum();
    let total: f64 = overlaps.iter().map(|c| c * c).sum();
    out.push(negative);
    out.push(total);
    if obs.density {
        out.extend(numeric_windowed_density(&sol, wp, EnergyWindow::ALL)?.values);
    }
    if let Some(bins) = &obs.energy_bins {
        out.extend(numeric_energy_distribution(&sol, wp, bins)?.density);
    }
    for w in &obs.windows {
        out.extend(numeric_windowed_density(&sol, wp, *w)?.values);
    }
    Ok(out)
}

fn run_block(
    spec: &PotentialSpec,
    wp: &WavePacketSpec,
    obs: &Observables,
    block: u64,
    n_real: u64,
) -> (EnsembleAccumulator, u64) {
    let dim = obs.dim(spec.n_grid);
    let start = block * BLOCK;
    let end = (start + BLOCK).min(n_real);
    let mut parts = Vec::new();
    let mut failed = 0;
    for index in start..end {
        match observe(spec, wp, obs, index) {
            Ok(v) => parts.push(EnsembleAccumulator::from_observation(&v)),
            Err(e) => {
                log::warn!("realization {index} excluded: {e}");
                failed += 1;
            }
        }
    }
    (EnsembleAccumulator::tree_merge(&parts, dim), failed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointHeader {
    spec: PotentialSpec,
    wp: WavePacketSpec,
    observables: Observables,
    n_real: u64,
    next_block: u64,
    n_failed: u64,
    count: u64,
    dim: usize,
}

fn write_checkpoint(
    path: &Path,
    header: &CheckpointHeader,
    acc: &EnsembleAccumulator,
) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut w, header)?;
        w.write_all(b"\n")?;
        for v in acc.sum.iter().chain(&acc.sumsq) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, EnsembleAccumulator)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: CheckpointHeader = serde_json::from_str(line.trim_end())?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * header.dim {
        return Err(Error::Format(format!(
            "checkpoint holds {} bytes of data, expected {}",
            bytes.len(),
            16 * header.dim
        )));
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let acc = EnsembleAccumulator {
        count: header.count,
        sum: vals[..header.dim].to_vec(),
        sumsq: vals[header.dim..].to_vec(),
    };
    Ok((header, acc))
}

/// Outcome of a checkpointed run.
#[derive(Debug, Clone, PartialEq)]
pub enum Progress {
    Done(EnsembleResult),
    /// Stopped after the block budget; the checkpoint holds this many blocks.
    Paused {
        blocks_done: u64,
        blocks_total: u64,
    },
}

/// Averages observables over realizations 0..n_real of the potential.
///
/// Realizations are grouped in fixed blocks; each block is reduced in a
/// fixed tree and blocks are folded in order, so the result does not depend
/// on the number of worker threads.
pub fn run_ensemble(
    spec: &PotentialSpec,
    wp: &WavePacketSpec,
    obs: &Observables,
    n_real: u64,
) -> Result<EnsembleResult> {
    match run_inner(spec, wp, obs, n_real, None, None)? {
        Progress::Done(r) => Ok(r),
        Progress::Paused { .. } => unreachable!("no block budget given"),
    }
}

/// Like `run_ensemble`, saving progress to `checkpoint` after every batch of
/// blocks and resuming from it when it exists. With `block_budget` the run
/// pauses once that many new blocks are done.
pub fn run_ensemble_checkpointed(
    spec: &PotentialSpec,
    wp: &WavePacketSpec,
    obs: &Observables,
    n_real: u64,
    checkpoint: &Path,
    block_budget: Option<u64>,
) -> Result<Progress> {
    run_inner(spec, wp, obs, n_real, Some(checkpoint), block_budget)
}

fn run_inner(
    spec: &PotentialSpec,
    wp: &WavePacketSpec,
    obs: &Observables,
    n_real: u64,
    checkpoint: Option<&Path>,
    block_budget: Option<u64>,
) -> Result<Progress> {
    spec.validate()?;
    wp.validate()?;
    if n_real < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 realizations, got {n_real}"
        )));
    }
    let dim = obs.dim(spec.n_grid);
    let n_blocks = n_real.div_ceil(BLOCK);
    let mut acc = EnsembleAccumulator::new(dim);
    let mut failed = 0;
    let mut next_block = 0;
    if let Some(path) = checkpoint.filter(|p| p.exists()) {
        let (h, a) = read_checkpoint(path)?;
        if h.spec != *spec
            || h.wp != *wp
            || h.observables != *obs
            || h.dim != dim
            || h.n_real != n_real
        {
            return Err(Error::InvalidParameter(format!(
                "checkpoint {} belongs to a different run",
                path.display()
            )));
        }
        acc = a;
        failed = h.n_failed;
        next_block = h.next_block;
        log::info!("resuming at block {next_block} of {n_blocks}");
    }
    let stop_at = block_budget.map_or(n_blocks, |b| (next_block + b).min(n_blocks));
    let batch = (2 * rayon::current_num_threads()) as u64;
    while next_block < stop_at {
        let end = (next_block + batch).min(stop_at);
        let results: Vec<(EnsembleAccumulator, u64)> = (next_block..end)
            .into_par_iter()
            .map(|b| run_block(spec, wp, obs, b, n_real))
            .collect();
        for (a, f) in &results {
            acc.merge(a);
            failed += f;
        }
        next_block = end;
        log::debug!("{next_block} of {n_blocks} blocks done");
        if let Some(path) = checkpoint {
            let header = CheckpointHeader {
                spec: *spec,
                wp: *wp,
                observables: obs.clone(),
                n_real,
                next_block,
                n_failed: failed,
                count: acc.count,
                dim,
            };
            write_checkpoint(path, &header, &acc)?;
        }
    }
    if next_block < n_blocks {
        return Ok(Progress::Paused {
            blocks_done: next_block,
            blocks_total: n_blocks,
        });
    }
    if acc.count == 0 {
        return Err(Error::NoConvergence(format!(
            "all {n_real} realizations failed"
        )));
    }
    if failed > 0 {
        log::warn!("{failed} of {n_real} realizations excluded");
    }
    Ok(Progress::Done(finish(spec, obs, &acc, failed)))
}

fn finish(
    spec: &PotentialSpec,
    obs: &Observables,
    acc: &EnsembleAccumulator,
    failed: u64,
) -> EnsembleResult {
    let mean = acc.mean();
    let err = acc.stderr();
    let mut offset = 0;
    let mut take = |len: usize| {
        let c = MeanCurve {
            mean: mean[offset..offset + len].to_vec(),
            stderr: err[offset..offset + len].to_vec(),
        };
        offset += len;
        c
    };
    let n = spec.n_grid;
    let negative_weight = take(1);
    let completeness = take(1);
    let density = obs.density.then(|| take(n));
    let energy = obs.energy_bins.map(|b| take(b.count));
    let windows = obs.windows.iter().map(|_| take(n)).collect();
    let energy_smoothed = energy
        .as_ref()
        .map(|c| smooth_ema(&c.mean, SMOOTHING_CONSTANT))
        .unwrap_or_default();
    EnsembleResult {
        n_ok: acc.count,
        n_failed: failed,
        x_grid: spec.grid(),
        density,
        energy_centers: obs.energy_bins.map(|b| b.centers()).unwrap_or_default(),
        energy,
        energy_smoothed,
        windows,
        negative_weight,
        completeness,
    }
}
