use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

pub(crate) const AI0: f64 = 0.355_028_053_887_817_2;
const MAI1: f64 = 0.258_819_403_792_806_8;
const SQRT3: f64 = 1.732_050_807_568_877_2;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

// Switchover between the Maclaurin/ODE-stepping region and the asymptotic
// expansions. At |y| = 9 the expansion variable is 18, deep enough for
// the asymptotic series to reach machine precision.
const ASYM: f64 = 9.0;
const SERIES_NEG: f64 = -4.5;
const SERIES_AI_POS: f64 = 2.0;
const STEP: f64 = 0.5;
// The modulus expansion is asymptotic; at |y| = 12 its smallest term is
// below 1e-22.
const MODULUS_ASYM: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub bi: f64,
    pub aip: f64,
    pub bip: f64,
}

impl AiryPair {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bip - self.aip * self.bi
    }
}

/// Ai, Bi and their derivatives for |y| <= 200.
pub fn airy_pair(y: f64) -> Result<AiryPair> {
    airy_pair_from(y, AI0)
}

/// `airy_pair` with the value of Ai(0) fed to the power series replaced;
/// used to check that the self-test notices a bad constant.
pub(crate) fn airy_pair_from(y: f64, ai0: f64) -> Result<AiryPair> {
    if !y.is_finite() || y.abs() > 200.0 {
        return Err(Error::OutOfRange(format!(
            "airy_pair: |y| must be <= 200, got {y}"
        )));
    }
    if y <= -ASYM {
        return Ok(asymptotic_negative(-y));
    }
    if y < SERIES_NEG {
        let start = series(SERIES_NEG, ai0);
        let (ai, aip) = taylor_walk(SERIES_NEG, start.ai, start.aip, y);
        let (bi, bip) = taylor_walk(SERIES_NEG, start.bi, start.bip, y);
        return Ok(AiryPair { ai, bi, aip, bip });
    }
    if y <= SERIES_AI_POS {
        return Ok(series(y, ai0));
    }
    if y < ASYM {
        // Bi from its positive-term series, Ai integrated down from the
        // asymptotic region where it is recessive in the backward direction.
        let s = series(y, ai0);
        let z = scaled_positive(ASYM);
        let zeta = 2.0 / 3.0 * ASYM.powf(1.5);
        let e = (-zeta).exp();
        let (ai, aip) = taylor_walk(ASYM, z.ai * e, z.aip * e, y);
        return Ok(AiryPair {
            ai,
            bi: s.bi,
            aip,
            bip: s.bip,
        });
    }
    let z = scaled_positive(y);
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let grow = zeta.exp();
    let (bi, bip) = (z.bi * grow, z.bip * grow);
    if !bi.is_finite() || !bip.is_finite() {
        return Err(Error::Overflow(format!(
            "airy_pair: Bi({y}) exceeds f64 range"
        )));
    }
    let decay = (-zeta).exp();
    Ok(AiryPair {
        ai: z.ai * decay,
        bi,
        aip: z.aip * decay,
        bip,
    })
}

/// Logarithmic derivative of the modulus M = sqrt(Ai^2 + Bi^2).
pub fn m_log_derivative(y: f64) -> f64 {
    if y <= -MODULUS_ASYM {
        let (s, ds) = modulus_series(-y);
        let x = -y;
        return 0.25 / x - 0.5 * ds / s;
    }
    if y >= ASYM {
        let z = scaled_positive(y);
        let r = (-4.0 * (2.0 / 3.0) * y.powf(1.5)).exp();
        return (z.ai * z.aip * r + z.bi * z.bip) / (z.ai * z.ai * r + z.bi * z.bi);
    }
    let p = airy_pair(y).expect("inside the direct range");
    (p.ai * p.aip + p.bi * p.bip) / (p.ai * p.ai + p.bi * p.bi)
}

/// 1 / (Ai^2 + Bi^2), free of overflow for large positive y.
pub fn inv_modulus_sq(y: f64) -> f64 {
    if y <= -MODULUS_ASYM {
        let (s, _) = modulus_series(-y);
        return PI * (-y).sqrt() / s;
    }
    if y >= ASYM {
        let z = scaled_positive(y);
        let zeta = 2.0 / 3.0 * y.powf(1.5);
        let r = (-4.0 * zeta).exp();
        return (-2.0 * zeta).exp() / (z.bi * z.bi + z.ai * z.ai * r);
    }
    let p = airy_pair(y).expect("inside the direct range");
    1.0 / (p.ai * p.ai + p.bi * p.bi)
}

fn series(y: f64, ai0: f64) -> AiryPair {
    let y3 = y * y * y;
    let (mut f, mut g) = (1.0, y);
    let (mut fp, mut gp) = (0.0, 1.0);
    let (mut tf, mut tg) = (1.0, y);
    let mut k = 1.0_f64;
    loop {
        tf *= y3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= y3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += tf;
        g += tg;
        if y != 0.0 {
            fp += 3.0 * k * tf / y;
            gp += (3.0 * k + 1.0) * tg / y;
        }
        let small =
            tf.abs() <= 1e-18 * f.abs().max(1e-300) && tg.abs() <= 1e-18 * g.abs().max(1e-300);
        if small || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    AiryPair {
        ai: ai0 * f - MAI1 * g,
        bi: SQRT3 * (ai0 * f + MAI1 * g),
        aip: ai0 * fp - MAI1 * gp,
        bip: SQRT3 * (ai0 * fp + MAI1 * gp),
    }
}

/// Integrates w'' = x w from (x0, w, w') to `target` by Taylor steps.
fn taylor_walk(x0: f64, w: f64, wp: f64, target: f64) -> (f64, f64) {
    let span = target - x0;
    let n = (span.abs() / STEP).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let (mut x, mut w, mut wp) = (x0, w, wp);
    for _ in 0..n {
        (w, wp) = taylor_step(x, w, wp, h);
        x += h;
    }
    (w, wp)
}

fn taylor_step(x0: f64, w: f64, wp: f64, h: f64) -> (f64, f64) {
    // coefficients a_k of w(x0 + t) = sum a_k t^k
    let (mut am1, mut a0, mut a1) = (0.0, w, wp);
    let mut val = a0 + a1 * h;
    let mut der = a1;
    let mut hk = h; // h^(k+1) for the new coefficient index k + 2 below
    let scale = w.abs() + (wp * h).abs();
    let mut k = 0.0_f64;
    loop {
        let a2 = (x0 * a0 + am1) / ((k + 1.0) * (k + 2.0));
        der += (k + 2.0) * a2 * hk;
        hk *= h;
        let term = a2 * hk;
        val += term;
        if term.abs() <= 1e-19 * scale && k > 4.0 {
            break;
        }
        am1 = a0;
        a0 = a1;
        a1 = a2;
        k += 1.0;
        if k > 400.0 {
            break;
        }
    }
    (val, der)
}

/// u_k and v_k coefficients of the exponential/oscillatory expansions.
fn uv_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    u.push(1.0);
    v.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let prev = u[k - 1];
        let uk = prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

const N_TERMS: usize = 40;

/// Ai e^zeta, Ai' e^zeta, Bi e^-zeta, Bi' e^-zeta for y >= 9.
fn scaled_positive(y: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let (u, v) = uv_coefficients(N_TERMS);
    let (mut su_alt, mut sv_alt, mut su, mut sv) = (0.0, 0.0, 0.0, 0.0);
    let mut zk = 1.0;
    let mut sign = 1.0;
    for k in 0..N_TERMS {
        let tu = u[k] / zk;
        let tv = v[k] / zk;
        su += tu;
        sv += tv;
        su_alt += sign * tu;
        sv_alt += sign * tv;
        if tu.abs() < 1e-18 && k > 1 {
            break;
        }
        zk *= zeta;
        sign = -sign;
    }
    let q = y.powf(0.25);
    AiryPair {
        ai: 0.5 * FRAC_1_SQRT_PI / q * su_alt,
        aip: -0.5 * FRAC_1_SQRT_PI * q * sv_alt,
        bi: FRAC_1_SQRT_PI / q * su,
        bip: FRAC_1_SQRT_PI * q * sv,
    }
}

fn asymptotic_negative(x: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = uv_coefficients(N_TERMS);
    // even/odd partial sums with alternating signs
    let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
    let mut zk = 1.0;
    for k in 0..N_TERMS {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let tu = sign * u[k] / zk;
        let tv = sign * v[k] / zk;
        if k % 2 == 0 {
            ue += tu;
            ve += tv;
        } else {
            uo += tu;
            vo += tv;
        }
        if tu.abs() < 1e-18 && k > 1 {
            break;
        }
        zk *= zeta;
    }
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let q = x.powf(0.25);
    AiryPair {
        ai: FRAC_1_SQRT_PI / q * (c * ue + s * uo),
        bi: FRAC_1_SQRT_PI / q * (-s * ue + c * uo),
        aip: FRAC_1_SQRT_PI * q * (s * ve - c * vo),
        bip: FRAC_1_SQRT_PI * q * (c * ve + s * vo),
    }
}

/// pi sqrt(x) M^2(-x) and its x-derivative, from the modulus expansion.
fn modulus_series(x: f64) -> (f64, f64) {
    let inv3 = 1.0 / (x * x * x);
    let mut c = 1.0;
    let mut pow = 1.0;
    let (mut s, mut ds) = (1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        c *= -(6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / (kf * 96.0);
        pow *= inv3;
        let t = c * pow;
        if t.abs() >= last {
            break;
        }
        last = t.abs();
        s += t;
        ds += -3.0 * kf * t / x;
        if t.abs() < 1e-18 * s.abs() {
            break;
        }
    }
    (s, ds)
}
