//! Extended-precision complex arithmetic for series with heavy cancellation.
//!
//! The terminating `2F1(-n, b; c; 2)` behind the closed-form squeezed-state
//! coefficients alternates with term magnitudes up to `~1e35` times the
//! result for `n ~ 30`, so double precision loses every digit. This module
//! wraps `astro_float` with just the operations that series needs.

use astro_float::{BigFloat, RoundingMode, Sign, Word};
use num_complex::Complex64;

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Complex number with `precision`-bit real and imaginary parts.
#[derive(Debug, Clone)]
pub struct MpComplex {
    re: BigFloat,
    im: BigFloat,
    precision: usize,
}

impl MpComplex {
    pub fn from_f64(re: f64, im: f64, precision: usize) -> Self {
        MpComplex { re: BigFloat::from_f64(re, precision), im: BigFloat::from_f64(im, precision), precision }
    }

    pub fn from_complex(z: Complex64, precision: usize) -> Self {
        Self::from_f64(z.re, z.im, precision)
    }

    pub fn one(precision: usize) -> Self {
        Self::from_f64(1.0, 0.0, precision)
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.precision;
        MpComplex { re: self.re.add(&o.re, p, RM), im: self.im.add(&o.im, p, RM), precision: p }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.precision;
        MpComplex { re: self.re.sub(&o.re, p, RM), im: self.im.sub(&o.im, p, RM), precision: p }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.precision;
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        MpComplex { re, im, precision: p }
    }

    pub fn div(&self, o: &Self) -> Self {
        let p = self.precision;
        let den = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        let re = self.re.mul(&o.re, p, RM).add(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.im.mul(&o.re, p, RM).sub(&self.re.mul(&o.im, p, RM), p, RM);
        MpComplex { re: re.div(&den, p, RM), im: im.div(&den, p, RM), precision: p }
    }

    pub fn scale(&self, x: f64) -> Self {
        self.mul(&Self::from_f64(x, 0.0, self.precision))
    }

    pub fn powu(&self, n: u32) -> Self {
        (0..n).fold(Self::one(self.precision), |acc, _| acc.mul(self))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.precision;
        let two = BigFloat::from_f64(2.0, p);
        let modulus = self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM).sqrt(p, RM);
        let re = modulus.add(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
        let mut im = modulus.sub(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
        if self.im.is_negative() {
            im = im.neg();
        }
        MpComplex { re, im, precision: p }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

/// Round to the nearest double (to within one unit of the leading word).
fn to_f64(x: &BigFloat) -> f64 {
    let Some((mantissa, _, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let Some(top) = mantissa.last() else {
        return 0.0;
    };
    if *top == 0 {
        return 0.0;
    }
    let shift = exponent - Word::BITS as i32;
    // split the power of two so that neither factor over- or underflows early
    let half = shift / 2;
    let v = (*top as f64) * 2f64.powi(half) * 2f64.powi(shift - half);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// `2F1(-n, b; c; z)` with all arithmetic at the precision of `b`.
pub fn terminating_2f1_mp(n: u32, b: &MpComplex, c: &MpComplex, z: f64) -> Result<MpComplex> {
    let p = b.precision;
    let mut term = MpComplex::one(p);
    let mut acc = MpComplex::from_f64(0.0, 0.0, p);
    let z = MpComplex::from_f64(z, 0.0, p);
    for j in 0..=n {
        acc = acc.add(&term);
        if j == n {
            break;
        }
        let jf = MpComplex::from_f64(j as f64, 0.0, p);
        let denom = c.add(&jf).scale(j as f64 + 1.0);
        if denom.is_zero() {
            return Err(Error::Degenerate(format!("2F1 denominator vanishes at j = {j}")));
        }
        let a_j = -(n as f64) + j as f64;
        term = term.mul(&b.add(&jf)).scale(a_j).mul(&z).div(&denom);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_doubles() {
        for x in [1.0, -3.5, 0.1, 1e-30, 6.02e23, -7.25e-200] {
            let z = MpComplex::from_f64(x, -x, 200).to_complex();
            assert_eq!(z.re, x);
            assert_eq!(z.im, -x);
        }
        assert_eq!(MpComplex::from_f64(0.0, 0.0, 128).to_complex(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn principal_sqrt() {
        for z in [Complex64::new(4.0, 0.0), Complex64::new(-4.0, 0.0), Complex64::new(0.3, -1.7)] {
            let got = MpComplex::from_complex(z, 200).sqrt().to_complex();
            assert!((got - z.sqrt()).norm() < 1e-15, "{z}: {got} vs {}", z.sqrt());
        }
    }

    #[test]
    fn agrees_with_double_precision_when_well_conditioned() {
        let b = Complex64::new(0.5, 1.2);
        let f = crate::numerics::terminating_2f1(5, b, 3.5, 2.0).unwrap();
        let g = terminating_2f1_mp(5, &MpComplex::from_complex(b, 200), &MpComplex::from_f64(3.5, 0.0, 200), 2.0)
            .unwrap()
            .to_complex();
        assert!((f - g).norm() < 1e-14);
    }
}
