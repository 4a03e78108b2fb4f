//! Globally adaptive Gauss-Kronrod (7/15) quadrature for scalar and
//! vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct VecQuadResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub intervals: usize,
    pub converged: bool,
}

/// Fifteen-point Kronrod rule on [a, b] for a vector integrand.
///
/// Writes the Kronrod estimate into `value` and the error estimate into `err`.
fn kronrod<F>(
    f: &mut F,
    a: f64,
    b: f64,
    value: &mut [f64],
    err: &mut [f64],
    buf: &mut Vec<Vec<f64>>,
) where
    F: FnMut(f64, &mut [f64]),
{
    let dim = value.len();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    if buf.len() < 15 {
        buf.resize(15, Vec::new());
    }
    for v in buf.iter_mut() {
        v.resize(dim, 0.0);
    }
    f(c, &mut buf[0]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let (lo, hi) = buf.split_at_mut(1 + 2 * j + 1);
        f(c - dx, &mut lo[1 + 2 * j]);
        f(c + dx, &mut hi[0]);
    }
    for i in 0..dim {
        let fc = buf[0][i];
        let mut rk = fc * WGK[7];
        let mut rg = fc * WG[3];
        let mut abs_k = rk.abs();
        for j in 0..7 {
            let f1 = buf[1 + 2 * j][i];
            let f2 = buf[2 + 2 * j][i];
            rk += WGK[j] * (f1 + f2);
            abs_k += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                rg += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * rk;
        let mut asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((buf[1 + 2 * j][i] - mean).abs() + (buf[2 + 2 * j][i] - mean).abs());
        }
        let result = rk * h;
        let resabs = abs_k * h.abs();
        let resasc = asc * h.abs();
        let mut e = ((rk - rg) * h).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * resabs);
        }
        value[i] = result;
        err[i] = e;
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: Vec<f64>,
    priority: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

/// Integrates a vector-valued function over the panels defined by
/// consecutive `breakpoints`.
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> VecQuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let mut buf = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    for w in breakpoints.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let mut v = vec![0.0; dim];
        let mut e = vec![0.0; dim];
        kronrod(&mut f, w[0], w[1], &mut v, &mut e, &mut buf);
        for i in 0..dim {
            total[i] += v[i];
            total_err[i] += e[i];
        }
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
            priority: 0.0,
        });
    }
    let tol_of = |total: &[f64], i: usize| opts.abs_tol.max(opts.rel_tol * total[i].abs());
    let reprioritize = |heap: BinaryHeap<Piece>, total: &[f64]| -> BinaryHeap<Piece> {
        heap.into_iter()
            .map(|mut p| {
                p.priority = p
                    .err
                    .iter()
                    .enumerate()
                    .map(|(i, e)| e / tol_of(total, i))
                    .fold(0.0, f64::max);
                p
            })
            .collect()
    };
    heap = reprioritize(heap, &total);
    let mut n = heap.len();
    let mut since_rescale = 0;
    loop {
        let done = (0..dim).all(|i| total_err[i] <= tol_of(&total, i));
        if done {
            return VecQuadResult {
                values: total,
                errors: total_err,
                intervals: n,
                converged: true,
            };
        }
        if n >= opts.max_intervals {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // interval cannot be split further
            heap.push(Piece {
                priority: -1.0,
                ..p
            });
            break;
        }
        let mut v1 = vec![0.0; dim];
        let mut e1 = vec![0.0; dim];
        let mut v2 = vec![0.0; dim];
        let mut e2 = vec![0.0; dim];
        kronrod(&mut f, p.a, m, &mut v1, &mut e1, &mut buf);
        kronrod(&mut f, m, p.b, &mut v2, &mut e2, &mut buf);
        for i in 0..dim {
            total[i] += v1[i] + v2[i] - p.value[i];
            total_err[i] += e1[i] + e2[i] - p.err[i];
        }
        for (a, b, value, err) in [(p.a, m, v1, e1), (m, p.b, v2, e2)] {
            let priority = err
                .iter()
                .enumerate()
                .map(|(i, e)| e / tol_of(&total, i))
                .fold(0.0, f64::max);
            heap.push(Piece {
                a,
                b,
                value,
                err,
                priority,
            });
        }
        n += 1;
        since_rescale += 1;
        if since_rescale >= 64 {
            heap = reprioritize(heap, &total);
            since_rescale = 0;
        }
    }
    // re-sum from the pieces to shed accumulated rounding in the running totals
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for p in heap.iter() {
        for i in 0..dim {
            values[i] += p.value[i];
            errors[i] += p.err[i];
        }
    }
    let converged = (0..dim).all(|i| errors[i] <= tol_of(&values, i));
    VecQuadResult {
        values,
        errors,
        intervals: n,
        converged,
    }
}

/// Scalar version of [`integrate_vec`].
pub fn integrate<F>(mut f: F, breakpoints: &[f64], opts: QuadOptions) -> QuadResult
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, breakpoints, opts);
    QuadResult {
        value: r.values[0],
        error: r.errors[0],
        intervals: r.intervals,
        converged: r.converged,
    }
}

/// Cauchy principal value of f(t) / (t - c) over [a, b] with a < c < b.
///
/// The singular part is folded into a symmetric window of half-width
/// `delta` around c and integrated as [f(c+s) - f(c-s)] / s, which is smooth.
pub fn principal_value<F>(mut f: F, a: f64, b: f64, c: f64, opts: QuadOptions) -> QuadResult
where
    F: FnMut(f64) -> f64,
{
    assert!(a < c && c < b, "pole must lie strictly inside the interval");
    let delta = (c - a).min(b - c);
    let inner = integrate(|s| (f(c + s) - f(c - s)) / s, &[0.0, delta], opts);
    let mut value = inner.value;
    let mut error = inner.error;
    let mut intervals = inner.intervals;
    let mut converged = inner.converged;
    for (lo, hi) in [(a, c - delta), (c + delta, b)] {
        if hi > lo {
            let r = integrate(|t| f(t) / (t - c), &[lo, hi], opts);
            value += r.value;
            error += r.error;
            intervals += r.intervals;
            converged &= r.converged;
        }
    }
    QuadResult {
        value,
        error,
        intervals,
        converged,
    }
}
