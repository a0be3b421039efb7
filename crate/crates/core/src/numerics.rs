//! Overflow-safe scalar special functions.
//!
//! Factorial-like quantities in this crate routinely exceed `1e45` at the
//! truncations of interest, and the entropy sums multiply four of them
//! together. Everything that can grow is therefore carried as a natural log
//! ([`LogMagnitude`]) with the sign or complex phase kept separately
//! ([`LogComplex`]).

pub mod mp;

use std::ops::{Div, Mul, Neg};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Natural logarithm of a nonnegative magnitude, with an explicit zero flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMagnitude {
    log_abs: f64,
    is_zero: bool,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude { log_abs: f64::NEG_INFINITY, is_zero: true };
    pub const ONE: LogMagnitude = LogMagnitude { log_abs: 0.0, is_zero: false };

    pub fn from_log(log_abs: f64) -> Self {
        if log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogMagnitude { log_abs, is_zero: false }
        }
    }

    /// Magnitude of `x` (the sign is dropped).
    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_log(x.abs().ln())
        }
    }

    /// `ln` of the magnitude; `-inf` for zero.
    pub fn log_abs(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_abs
        }
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_abs.exp()
        }
    }

    /// Raise to a nonnegative integer power; `0^0 = 1`.
    pub fn powi(self, n: u32) -> Self {
        if n == 0 {
            Self::ONE
        } else if self.is_zero {
            Self::ZERO
        } else {
            Self::from_log(self.log_abs * n as f64)
        }
    }
}

impl Mul for LogMagnitude {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.is_zero || other.is_zero {
            Self::ZERO
        } else {
            Self::from_log(self.log_abs + other.log_abs)
        }
    }
}

impl Div for LogMagnitude {
    type Output = Self;

    fn div(self, other: Self) -> Self {
        debug_assert!(!other.is_zero, "division by a zero magnitude");
        if self.is_zero {
            Self::ZERO
        } else {
            Self::from_log(self.log_abs - other.log_abs)
        }
    }
}

/// A complex number stored as unit phase times a [`LogMagnitude`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub magnitude: LogMagnitude,
    /// Unit-modulus phase. Meaningless (but kept at 1) when the magnitude is zero.
    pub phase: Complex64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex { magnitude: LogMagnitude::ZERO, phase: Complex64::new(1.0, 0.0) };
    pub const ONE: LogComplex = LogComplex { magnitude: LogMagnitude::ONE, phase: Complex64::new(1.0, 0.0) };

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            Self::ZERO
        } else {
            LogComplex { magnitude: LogMagnitude::from_log(r.ln()), phase: z / r }
        }
    }

    /// A positive real number given by its logarithm.
    pub fn from_log(log_abs: f64) -> Self {
        LogComplex { magnitude: LogMagnitude::from_log(log_abs), phase: Complex64::new(1.0, 0.0) }
    }

    pub fn log_abs(&self) -> f64 {
        self.magnitude.log_abs()
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude.is_zero()
    }

    /// Multiply by `exp(log_factor)`, a positive real.
    pub fn scale_log(self, log_factor: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        LogComplex { magnitude: LogMagnitude::from_log(self.log_abs() + log_factor), phase: self.phase }
    }

    pub fn conj(self) -> Self {
        LogComplex { magnitude: self.magnitude, phase: self.phase.conj() }
    }

    pub fn powi(self, n: u32) -> Self {
        let magnitude = self.magnitude.powi(n);
        if magnitude.is_zero() {
            return Self::ZERO;
        }
        LogComplex { magnitude, phase: unit(self.phase.powu(n)) }
    }

    /// `value / exp(shift)` as an ordinary complex number.
    pub fn to_complex_scaled(&self, shift: f64) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * (self.log_abs() - shift).exp()
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.to_complex_scaled(0.0)
    }

    /// Sum of terms, evaluated relative to the largest magnitude.
    pub fn sum<I: IntoIterator<Item = LogComplex>>(terms: I) -> Self {
        let terms: Vec<LogComplex> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(shift) = terms.iter().map(|t| t.log_abs()).reduce(f64::max) else {
            return Self::ZERO;
        };
        let mut acc = CompensatedComplexSum::default();
        for t in &terms {
            acc.add(t.to_complex_scaled(shift));
        }
        Self::from_complex(acc.total()).scale_log(shift)
    }
}

impl Mul for LogComplex {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        let magnitude = self.magnitude * other.magnitude;
        if magnitude.is_zero() {
            return Self::ZERO;
        }
        LogComplex { magnitude, phase: unit(self.phase * other.phase) }
    }
}

impl Neg for LogComplex {
    type Output = Self;

    fn neg(self) -> Self {
        LogComplex { magnitude: self.magnitude, phase: -self.phase }
    }
}

fn unit(z: Complex64) -> Complex64 {
    z / z.norm()
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

/// `ln(n!)` for every `n` that fits a direct f64 product.
const DIRECT_FACTORIAL_MAX: usize = 170;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(DIRECT_FACTORIAL_MAX + 1);
        let mut product = 1.0f64;
        table.push(0.0);
        for i in 1..=DIRECT_FACTORIAL_MAX {
            product *= i as f64;
            table.push(product.ln());
        }
        table
    })
}

/// `ln(n!)`. Exact-product table up to 170, Stirling series beyond.
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) <= DIRECT_FACTORIAL_MAX {
        return log_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Rising factorial `x (x+1) ... (x+n-1)`; `1` for `n = 0`.
pub fn pochhammer_rising(x: f64, n: u32) -> f64 {
    (0..n).map(|k| x + k as f64).product()
}

pub fn pochhammer_rising_complex(z: Complex64, n: u32) -> Complex64 {
    (0..n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * (z + k as f64))
}

/// Physicists' Hermite polynomial `H_n(x)` by upward recurrence.
pub fn hermite(n: u32, x: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `2F1(-n, b; c; z)` summed term by term. The series has `n + 1` terms.
pub fn terminating_2f1(n: u32, b: Complex64, c: f64, z: f64) -> Result<Complex64> {
    if let Some(j) = (0..n).find(|&j| c + j as f64 == 0.0) {
        return Err(Error::Degenerate(format!("2F1 denominator (c)_j vanishes: c + {j} = 0 with c = {c}")));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut acc = CompensatedComplexSum::default();
    let a = -(n as f64);
    for j in 0..=n {
        acc.add(term);
        let jf = j as f64;
        term = term * (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
    }
    Ok(acc.total())
}

/// Solution of `y[n+1] = a(n) y[n] + b(n) y[n-1]` for `n = 1..n_max-1`,
/// returned in log-polar form so that nothing overflows.
///
/// The running pair is rescaled by exact powers of two whenever it leaves
/// `[2^-500, 2^500]`, so each step performs the same floating-point
/// operations as the unscaled recurrence on the scaled mantissas.
pub fn scaled_three_term<F>(n_max: usize, y0: Complex64, y1: Complex64, mut coeffs: F) -> Vec<LogComplex>
where
    F: FnMut(usize) -> (Complex64, Complex64),
{
    const BIG: f64 = 3.273_390_607_896_142e150; // 2^500
    const SMALL: f64 = 1.0 / BIG;
    const LOG_BIG: f64 = 500.0 * std::f64::consts::LN_2;

    let mut out = Vec::with_capacity(n_max + 1);
    out.push(LogComplex::from_complex(y0));
    if n_max == 0 {
        return out;
    }
    out.push(LogComplex::from_complex(y1));
    let (mut prev, mut cur, mut log_scale) = (y0, y1, 0.0f64);
    for n in 1..n_max {
        let (a, b) = coeffs(n);
        let next = a * cur + b * prev;
        prev = cur;
        cur = next;
        let size = prev.norm().max(cur.norm());
        if size > BIG {
            prev *= SMALL;
            cur *= SMALL;
            log_scale += LOG_BIG;
        } else if size < SMALL && size > 0.0 {
            prev *= BIG;
            cur *= BIG;
            log_scale -= LOG_BIG;
        }
        out.push(LogComplex::from_complex(cur).scale_log(log_scale));
    }
    out
}

/// `ln(sum exp(x_i))` ignoring `-inf` entries; `-inf` for an empty sum.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(logs: I) -> f64 {
    let logs: Vec<f64> = logs.into_iter().filter(|x| *x > f64::NEG_INFINITY).collect();
    let Some(max) = logs.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    let s: CompensatedSum = logs.iter().map(|x| (x - max).exp()).collect();
    max + s.total().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_factorial_small_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        // 1*2*3*4*5
        assert!((log_factorial(5) - 4.787_491_742_782_046).abs() < 1e-15);
    }

    #[test]
    fn log_factorial_matches_direct_product() {
        let mut product = 1.0f64;
        for n in 1..=20u64 {
            product *= n as f64;
            let ratio = log_factorial(n).exp() / product;
            assert!((ratio - 1.0).abs() <= 1e-12, "n={n} ratio={ratio}");
        }
    }

    #[test]
    fn log_factorial_continuous_across_stirling_switch() {
        for n in 165..=180u64 {
            let step = log_factorial(n + 1) - log_factorial(n);
            assert!((step - ((n + 1) as f64).ln()).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer_rising(1.0, 3), 6.0);
        assert_eq!(pochhammer_rising(2.5, 0), 1.0);
        assert_eq!(pochhammer_rising(2.5, 2), 8.75);
        assert_eq!(pochhammer_rising_complex(c(2.5, 0.0), 2), c(8.75, 0.0));
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, c(7.0, -2.0)), c(1.0, 0.0));
        assert_eq!(hermite(1, c(3.0, 0.0)), c(6.0, 0.0));
        assert_eq!(hermite(2, c(1.0, 0.0)), c(2.0, 0.0));
        // H_3 = 8x^3 - 12x
        let x = c(0.3, 0.7);
        let h3 = 8.0 * x * x * x - 12.0 * x;
        assert!((hermite(3, x) - h3).norm() < 1e-14);
    }

    #[test]
    fn terminating_2f1_examples() {
        assert_eq!(terminating_2f1(0, c(9.0, 9.0), 2.0, 2.0).unwrap(), c(1.0, 0.0));
        let v = terminating_2f1(1, c(1.0, 0.0), 4.0, 2.0).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn terminating_2f1_degenerate_denominator() {
        // c = -2 makes (c)_3 vanish when n >= 3
        assert!(matches!(terminating_2f1(4, c(1.0, 0.0), -2.0, 2.0), Err(Error::Degenerate(_))));
        // ...but only two denominator factors are used when n = 2
        assert!(terminating_2f1(2, c(1.0, 0.0), -2.0, 2.0).is_ok());
    }

    #[test]
    fn compensated_sum_recovers_small_addends() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn log_magnitude_zero_flag_wins() {
        let z = LogMagnitude::from_value(0.0);
        assert!(z.is_zero());
        assert_eq!(z.value(), 0.0);
        assert_eq!(z.powi(0), LogMagnitude::ONE);
        let m = LogMagnitude::from_value(-2.5);
        assert!((m.value() - 2.5).abs() < 1e-15);
        assert!((m * z).is_zero());
    }

    #[test]
    fn log_complex_sum_cancels_exactly() {
        let a = LogComplex::from_complex(c(1e200, 3.0));
        let s = LogComplex::sum([a, -a]);
        assert!(s.is_zero());
        let big = LogComplex::from_log(800.0);
        let s = LogComplex::sum([big, big]);
        assert!((s.log_abs() - (800.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn scaled_recurrence_tracks_factorial_growth() {
        // y[n+1] = (n+1) y[n] has y[n] = n!; written as a three-term recurrence with b = 0
        let ys = scaled_three_term(400, c(1.0, 0.0), c(1.0, 0.0), |n| (c((n + 1) as f64, 0.0), c(0.0, 0.0)));
        for n in [10usize, 170, 171, 300, 400] {
            let rel = (ys[n].log_abs() - log_factorial(n as u64)).abs() / log_factorial(n as u64);
            assert!(rel < 1e-13, "n={n} rel={rel}");
        }
    }

    #[test]
    fn log_sum_exp_handles_empty_and_large() {
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
