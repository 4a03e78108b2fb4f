use nalgebra::{DMatrix, SymmetricEigen};

use super::band::BandLu;
use super::Hamiltonian;
use crate::error::{Error, Result};

/// Eigenpairs of a Hamiltonian, ascending in energy. Columns of `states` are
/// normalized under the grid inner product h sum_i.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub energies: Vec<f64>,
    pub states: DMatrix<f64>,
    pub spacing: f64,
    pub x_grid: Vec<f64>,
    /// False when only the part of the spectrum below a cutoff was computed.
    pub full_spectrum: bool,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Amplitudes <phi_n|psi> under the grid inner product.
    pub fn overlaps(&self, psi: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(psi);
        (self.states.tr_mul(&v) * self.spacing)
            .iter()
            .copied()
            .collect()
    }

    /// max |<phi_m|phi_n> - delta_mn|.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.states.tr_mul(&self.states) * self.spacing;
        let mut worst = 0.0_f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let d = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - d).abs());
            }
        }
        worst
    }
}

const DENSE_LIMIT: usize = 5000;

/// Full dense symmetric eigen-decomposition.
pub fn diagonalize(ham: &Hamiltonian) -> Result<EigenSolution> {
    let n = ham.len();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "dense diagonalization limited to n <= {DENSE_LIMIT}, got {n}"
        )));
    }
    let eig = SymmetricEigen::try_new(ham.to_dense(), f64::EPSILON, 0).ok_or_else(|| {
        let (lo, hi) = ham.bounds();
        Error::NoConvergence(format!(
            "symmetric eigensolver failed (n = {n}, spectrum within [{lo}, {hi}])"
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = 1.0 / ham.spacing.sqrt();
    let mut states = DMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        states.set_column(k, &(eig.eigenvectors.column(j) * scale));
    }
    Ok(EigenSolution {
        energies: order.iter().map(|&j| eig.eigenvalues[j]).collect(),
        states,
        spacing: ham.spacing,
        x_grid: ham.x_grid.clone(),
        full_spectrum: true,
    })
}

/// Sturm counts evaluated so far, sorted by energy; every evaluation
/// narrows the brackets of all eigenvalues.
struct CountCache<'a> {
    ham: &'a Hamiltonian,
    points: Vec<(f64, usize)>,
}

impl<'a> CountCache<'a> {
    fn count(&mut self, lambda: f64) -> usize {
        let pos = self.points.partition_point(|&(x, _)| x < lambda);
        if let Some(&(x, c)) = self.points.get(pos) {
            if x == lambda {
                return c;
            }
        }
        let c = self.ham.count_below(lambda);
        self.points.insert(pos, (lambda, c));
        c
    }

    /// Eigenvalue with index `j` (0-based, ascending) to within `tol`.
    fn eigenvalue(&mut self, j: usize, tol: f64) -> f64 {
        let up = self.points.partition_point(|&(_, c)| c <= j);
        let mut lo = self.points[up - 1].0;
        let mut hi = self.points[up].0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let d: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(x, a)| *x -= d * a);
    }
}

/// Eigenpairs with energies below `e_max`: Sturm-count bisection for the
/// eigenvalues and inverse iteration for the vectors, with
/// reorthogonalization inside clusters of close eigenvalues.
pub fn diagonalize_below(ham: &Hamiltonian, e_max: f64) -> Result<EigenSolution> {
    let n = ham.len();
    let (lo, hi) = ham.bounds();
    let k = ham.count_below(e_max.min(hi + 1.0));
    let norm = lo.abs().max(hi.abs());
    let tol = 4.0 * f64::EPSILON * norm;
    let cluster_gap = 1e-6 * norm;
    let top = e_max.min(hi + 1.0);
    let mut cache = CountCache {
        ham,
        points: vec![(lo - 1.0, 0), (top, k)],
    };
    // bisection only needs to separate the shift from other eigenvalues;
    // the Rayleigh quotient of the converged vector fixes the energy
    let mut energies: Vec<f64> = (0..k).map(|j| cache.eigenvalue(j, 1e3 * tol)).collect();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut refined = Vec::with_capacity(k);
    let mut cluster_start = 0;
    for (j, &e) in energies.iter().enumerate() {
        if j > 0 && e - energies[j - 1] > cluster_gap {
            cluster_start = j;
        }
        let lu = BandLu::factor_shifted(&ham.diag, ham.hopping, e);
        // deterministic start vector, different for every index
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895 * (j as f64 + 1.0)).fract()
            })
            .collect();
        normalize(&mut v);
        for _ in 0..3 {
            lu.solve(&mut v);
            orthogonalize(&mut v, &vectors[cluster_start..j]);
            if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NoConvergence(format!(
                    "inverse iteration broke down at E = {e}"
                )));
            }
        }
        let hv = ham.apply(&v);
        let rq: f64 = hv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let resid = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rq * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid > 1e-8 * norm {
            return Err(Error::NoConvergence(format!(
                "eigenvector residual {resid:e} at E = {e}"
            )));
        }
        vectors.push(v);
        refined.push(rq);
    }
    energies = refined;
    let scale = 1.0 / ham.spacing.sqrt();
    let mut states = DMatrix::zeros(n, k);
    for (c, v) in vectors.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            states[(r, c)] = x * scale;
        }
    }
    Ok(EigenSolution {
        energies,
        states,
        spacing: ham.spacing,
        x_grid: ham.x_grid.clone(),
        full_spectrum: k == n,
    })
}

/// Eigenpairs carrying the weight of `psi`: the spectrum is computed below a
/// cutoff that is raised until the missing weight is below `missing_tol`;
/// the dense solver is the fallback.
pub fn solve_for_packet(
    ham: &Hamiltonian,
    psi: &[f64],
    first_cutoff: f64,
    missing_tol: f64,
) -> Result<EigenSolution> {
    let (lo, hi) = ham.bounds();
    let mut cut = first_cutoff.max(lo + 1e-3 * (hi - lo));
    for _ in 0..6 {
        if cut >= hi {
            break;
        }
        let sol = diagonalize_below(ham, cut)?;
        let weight: f64 = sol.overlaps(psi).iter().map(|c| c * c).sum();
        if 1.0 - weight <= missing_tol {
            return Ok(sol);
        }
        log::debug!("cutoff {cut} misses weight {:e}; raising", 1.0 - weight);
        cut += 2.0 * (cut - lo);
    }
    diagonalize(ham)
}
