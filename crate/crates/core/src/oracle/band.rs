//! Banded LU with partial pivoting for the shifted ring Hamiltonian.
//!
//! Ordering the ring as 0, n-1, 1, n-2, 2, ... turns the periodic
//! tridiagonal matrix into a band matrix with two sub- and two
//! super-diagonals.

const KL: usize = 2;
const KU: usize = 2;
/// Stored columns per row: KL below, the diagonal, KU above and KL of fill.
const WIDTH: usize = 2 * KL + KU + 1;

/// Position of ring node `i` in the banded ordering.
pub(crate) fn ring_position(i: usize, n: usize) -> usize {
    if i < n - i {
        2 * i
    } else {
        2 * (n - 1 - i) + 1
    }
}

pub(crate) struct BandLu {
    n: usize,
    /// Row r holds absolute columns r - KL ..= r + KL + KU.
    rows: Vec<[f64; WIDTH]>,
    mult: Vec<[f64; KL]>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn get(&self, r: usize, c: usize) -> f64 {
        self.rows[r][c + KL - r]
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.rows[r][c + KL - r] = v;
    }

    /// Factorizes H - shift for the ring with the given diagonal and hopping.
    pub(crate) fn factor_shifted(diag: &[f64], hopping: f64, shift: f64) -> Self {
        let n = diag.len();
        let mut lu = BandLu {
            n,
            rows: vec![[0.0; WIDTH]; n],
            mult: vec![[0.0; KL]; n],
            pivots: vec![0; n],
        };
        for i in 0..n {
            let pi = ring_position(i, n);
            lu.set(pi, pi, diag[i] - shift);
            let pj = ring_position((i + 1) % n, n);
            let v = lu.get(pi, pj) + hopping;
            lu.set(pi, pj, v);
            let w = lu.get(pj, pi) + hopping;
            lu.set(pj, pi, w);
        }
        let scale =
            diag.iter().fold(0.0_f64, |m, d| m.max((d - shift).abs())) + 2.0 * hopping.abs();
        let tiny = f64::EPSILON * scale;
        for k in 0..n {
            let last = (k + KL).min(n - 1);
            let mut p = k;
            for r in k + 1..=last {
                if lu.get(r, k).abs() > lu.get(p, k).abs() {
                    p = r;
                }
            }
            lu.pivots[k] = p;
            let cmax = (k + KL + KU).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let a = lu.get(k, c);
                    let b = lu.get(p, c);
                    lu.set(k, c, b);
                    lu.set(p, c, a);
                }
            }
            if lu.get(k, k) == 0.0 {
                lu.set(k, k, tiny);
            }
            let piv = lu.get(k, k);
            for r in k + 1..=last {
                let f = lu.get(r, k) / piv;
                lu.mult[r][r - k - 1] = f;
                lu.set(r, k, 0.0);
                if f != 0.0 {
                    for c in k + 1..=cmax {
                        let v = lu.get(r, c) - f * lu.get(k, c);
                        lu.set(r, c, v);
                    }
                }
            }
        }
        lu
    }

    /// Solves in place; `b` is indexed by ring node.
    pub(crate) fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y = vec![0.0; n];
        for (i, &v) in b.iter().enumerate() {
            y[ring_position(i, n)] = v;
        }
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            for r in k + 1..=(k + KL).min(n - 1) {
                y[r] -= self.mult[r][r - k - 1] * yk;
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..=(k + KL + KU).min(n - 1) {
                s -= self.get(k, c) * y[c];
            }
            y[k] = s / self.get(k, k);
        }
        for (i, v) in b.iter_mut().enumerate() {
            *v = y[ring_position(i, n)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_a_permutation_with_bandwidth_two() {
        for n in [3, 4, 7, 10] {
            let mut seen = vec![false; n];
            for i in 0..n {
                let p = ring_position(i, n);
                assert!(!seen[p]);
                seen[p] = true;
                let q = ring_position((i + 1) % n, n);
                assert!(p.abs_diff(q) <= 2, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn solves_shifted_ring() {
        let n = 9;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.3 * (i as f64).sin()).collect();
        let hop = -1.0;
        let shift = 0.7;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| (diag[i] - shift) * x[i] + hop * (x[(i + n - 1) % n] + x[(i + 1) % n]))
            .collect();
        BandLu::factor_shifted(&diag, hop, shift).solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
