use num_complex::Complex64;
use std::f64::consts::FRAC_2_SQRT_PI;

use crate::error::{Error, Result};

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Power series near the origin, Laplace continued fraction far away and a
/// Taylor expansion fed by the continued fraction in between (the
/// Poppe-Wijers scheme). The other quadrants follow from symmetry.
pub fn faddeeva(z: Complex64) -> Complex64 {
    let (xi, yi) = (z.re, z.im);
    let xabs = xi.abs();
    let yabs = yi.abs();
    let xs = xabs / 6.3;
    let ys = yabs / 4.4;
    let mut qrho = xs * xs + ys * ys;
    let xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    let near = qrho < 0.085264;
    let (mut u, mut v);
    let (mut u2, mut v2) = (0.0, 0.0);
    if near {
        qrho = (1.0 - 0.85 * ys) * qrho.sqrt();
        let n = (6.0 + 72.0 * qrho).round() as i32;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let xaux = (xsum * xquad - ysum * yquad) / i as f64;
            ysum = (xsum * yquad + ysum * xquad) / i as f64;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = -FRAC_2_SQRT_PI * (xsum * yabs + ysum * xabs) + 1.0;
        let v1 = FRAC_2_SQRT_PI * (xsum * xabs - ysum * yabs);
        let daux = (-xquad).exp();
        u2 = daux * yquad.cos();
        v2 = -daux * yquad.sin();
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
    } else {
        let (h, kapn, nu);
        if qrho > 1.0 {
            h = 0.0;
            kapn = 0;
            qrho = qrho.sqrt();
            nu = (3.0 + 1442.0 / (26.0 * qrho + 77.0)) as i32;
        } else {
            qrho = (1.0 - ys) * (1.0 - qrho).sqrt();
            h = 1.88 * qrho;
            kapn = (7.0 + 34.0 * qrho).round() as i32;
            nu = (16.0 + 26.0 * qrho).round() as i32;
        }
        let h2 = 2.0 * h;
        let taylor = h > 0.0;
        let mut qlambda = if taylor { h2.powi(kapn) } else { 0.0 };
        let (mut rx, mut ry, mut sx, mut sy) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for n in (0..=nu).rev() {
            let np1 = (n + 1) as f64;
            let tx = yabs + h + np1 * rx;
            let ty = xabs - np1 * ry;
            let c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if taylor && n <= kapn {
                let t = qlambda + sx;
                sx = rx * t - ry * sy;
                sy = ry * t + rx * sy;
                qlambda /= h2;
            }
        }
        if taylor {
            u = FRAC_2_SQRT_PI * sx;
            v = FRAC_2_SQRT_PI * sy;
        } else {
            u = FRAC_2_SQRT_PI * rx;
            v = FRAC_2_SQRT_PI * ry;
        }
        if yabs == 0.0 {
            u = (-xabs * xabs).exp();
        }
    }

    if yi < 0.0 {
        if near {
            u2 *= 2.0;
            v2 *= 2.0;
        } else {
            let w1 = 2.0 * (-xquad).exp();
            u2 = w1 * yquad.cos();
            v2 = -w1 * yquad.sin();
        }
        u = u2 - u;
        v = v2 - v;
        if xi > 0.0 {
            v = -v;
        }
    } else if xi < 0.0 {
        v = -v;
    }
    Complex64::new(u, v)
}

fn exp_neg_sq(z: Complex64) -> Complex64 {
    let re = -(z.re - z.im) * (z.re + z.im);
    let im = -2.0 * z.re * z.im;
    let m = re.exp();
    Complex64::new(m * im.cos(), m * im.sin())
}

/// Complementary error function of a complex argument.
pub fn erfc_complex(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return Complex64::new(2.0, 0.0) - erfc_complex(-z);
    }
    let w = faddeeva(Complex64::new(-z.im, z.re));
    if w.re == 0.0 && w.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    exp_neg_sq(z) * w
}

/// Scaled complementary error function exp(z^2) erfc(z) = w(iz).
pub fn erfcx_complex(z: Complex64) -> Complex64 {
    faddeeva(Complex64::new(-z.im, z.re))
}

/// Imaginary error function for real arguments.
pub fn erfi_real(x: f64) -> Result<f64> {
    let w = faddeeva(Complex64::new(x, 0.0));
    let v = (x * x).exp() * w.im;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("erfi({x}) exceeds f64 range")))
    }
}
