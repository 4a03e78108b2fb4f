//! Special functions: Airy functions, the Faddeeva function and its relatives.

pub(crate) mod airy;
mod faddeeva;

pub use airy::{airy_pair, inv_modulus_sq, m_log_derivative, AiryPair};
pub use faddeeva::{erfc_complex, erfcx_complex, erfi_real, faddeeva};

use num_complex::Complex64;

pub type ComplexValue = Complex64;

/// Principal square root with the cut on the negative real axis.
///
/// A negative real argument maps to the upper side of the cut, `+i sqrt|x|`,
/// regardless of the sign of a zero imaginary part.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            Complex64::new(z.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}
