//! Lossless two-port beam splitter with vacuum in the second input.
//!
//! A Fock state maps as
//!
//! ```text
//! B |n>_a |0>_b = sum_{q=0}^{n} sqrt(C(n, q)) t^q r^(n-q) |q>_c |n-q>_d
//! ```
//!
//! with `t = cos(theta/2)` and `r = -exp(-i phi) sin(theta/2)`. Photon number
//! is conserved, so a state truncated at `N` maps onto the triangle
//! `q + m <= N` exactly.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::numerics::{log_factorial, CompensatedSum};
use crate::state::FockVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterConfig {
    theta: f64,
    phi: f64,
    r: Complex64,
    t: f64,
}

impl BeamSplitterConfig {
    pub fn new(theta: f64, phi: f64) -> Self {
        let half = theta / 2.0;
        BeamSplitterConfig { theta, phi, r: -Complex64::from_polar(half.sin(), -phi), t: half.cos() }
    }

    /// 50:50 splitter (`theta = pi/2`, `phi = 0`).
    pub fn balanced() -> Self {
        Self::new(FRAC_PI_2, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Reflection amplitude.
    pub fn r(&self) -> Complex64 {
        self.r
    }

    /// Transmission amplitude.
    pub fn t(&self) -> f64 {
        self.t
    }
}

impl Default for BeamSplitterConfig {
    fn default() -> Self {
        Self::balanced()
    }
}

pub fn make_config(theta: f64, phi: f64) -> BeamSplitterConfig {
    BeamSplitterConfig::new(theta, phi)
}

/// Output amplitudes `O[q][m]` on the triangle `q + m <= N`; row `q` holds
/// `N + 1 - q` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteAmplitudes {
    rows: Vec<Vec<Complex64>>,
}

impl BipartiteAmplitudes {
    /// Build from a full square array, keeping only `q + m <= N`.
    pub fn from_fn(truncation: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let rows = (0..=truncation).map(|q| (0..=truncation - q).map(|m| f(q, m)).collect()).collect();
        BipartiteAmplitudes { rows }
    }

    pub fn truncation(&self) -> usize {
        self.rows.len() - 1
    }

    /// `O[q][m]`, zero outside the triangle.
    pub fn get(&self, q: usize, m: usize) -> Complex64 {
        self.rows.get(q).and_then(|row| row.get(m)).copied().unwrap_or_default()
    }

    /// Amplitudes with mode `c` holding `q` photons, indexed by `m`.
    pub fn row(&self, q: usize) -> &[Complex64] {
        &self.rows[q]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.rows.iter().flatten().map(|z| z.norm_sqr()).collect::<CompensatedSum>().total()
    }

    /// Weight on the anti-diagonal `q + m = n`.
    pub fn level_weight(&self, n: usize) -> f64 {
        (0..=n.min(self.truncation())).map(|q| self.get(q, n - q).norm_sqr()).sum()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }
}

impl Serialize for BipartiteAmplitudes {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let amps: Vec<(usize, usize, f64, f64)> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(q, row)| row.iter().enumerate().map(move |(m, z)| (q, m, *z)))
            .filter(|(_, _, z)| *z != Complex64::default())
            .map(|(q, m, z)| (q, m, z.re, z.im))
            .collect();
        let mut s = serializer.serialize_struct("BipartiteAmplitudes", 2)?;
        s.serialize_field("truncation", &self.truncation())?;
        s.serialize_field("amps", &amps)?;
        s.end()
    }
}

/// Send `input ⊗ |0>` through the splitter:
/// `O[q][m] = c_{q+m} sqrt(C(q+m, q)) t^q r^m`.
pub fn mix_with_vacuum(input: &FockVector, bs: &BeamSplitterConfig) -> BipartiteAmplitudes {
    let c = input.coeffs();
    let n_max = input.truncation();
    let t_pow: Vec<f64> = (0..=n_max).map(|q| bs.t.powi(q as i32)).collect();
    let r_pow: Vec<Complex64> = (0..=n_max).map(|m| bs.r.powu(m as u32)).collect();
    let out = BipartiteAmplitudes::from_fn(n_max, |q, m| {
        let n = q + m;
        if c[n] == Complex64::default() {
            return Complex64::default();
        }
        let log_binom = log_factorial(n as u64) - log_factorial(q as u64) - log_factorial(m as u64);
        c[n] * (0.5 * log_binom).exp() * t_pow[q] * r_pow[m]
    });
    debug_assert!((out.norm_sqr() - input.norm_sqr()).abs() < 1e-10, "beam splitter lost norm");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{ho_coherent, normalize};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn config_examples() {
        let bs = make_config(PI / 2.0, 0.0);
        assert!((bs.t() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((bs.r() - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);

        let id = make_config(0.0, 1.234);
        assert_eq!(id.t(), 1.0);
        assert_eq!(id.r().norm(), 0.0);

        let full = make_config(PI, PI / 2.0);
        assert!(full.t().abs() < 1e-15);
        assert!((full.r().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitarity_of_amplitudes() {
        for i in 0..50 {
            let bs = make_config(i as f64 * 0.37, i as f64 * 1.1 - 3.0);
            assert!((bs.r().norm_sqr() + bs.t() * bs.t() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn single_photon() {
        let input = normalize(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let out = mix_with_vacuum(&input, &BeamSplitterConfig::balanced());
        assert!((out.get(1, 0) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((out.get(0, 1) - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert_eq!(out.get(0, 0), c(0.0, 0.0));
        assert_eq!(out.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let input = normalize(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = mix_with_vacuum(&input, &BeamSplitterConfig::balanced());
        assert_eq!(out.get(0, 0), c(1.0, 0.0));
        assert_eq!(out.norm_sqr(), 1.0);
    }

    #[test]
    fn coherent_input_factorizes() {
        let alpha = 1.0;
        let bs = BeamSplitterConfig::balanced();
        let out = mix_with_vacuum(&ho_coherent(c(alpha, 0.0), 24).unwrap(), &bs);
        // product of coherent states with amplitudes t alpha and r alpha, each truncated at 24
        let left = ho_coherent(c(bs.t() * alpha, 0.0), 24).unwrap();
        let right = ho_coherent(bs.r() * alpha, 24).unwrap();
        let mut worst = 0.0f64;
        for q in 0..=24 {
            for m in 0..=24 - q {
                let product = left.coeffs()[q] * right.coeffs()[m];
                worst = worst.max((out.get(q, m) - product).norm());
            }
        }
        assert!(worst <= 1e-10, "max deviation {worst}");
    }

    #[test]
    fn json_lists_nonzero_entries() {
        let input = normalize(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let out = mix_with_vacuum(&input, &BeamSplitterConfig::balanced());
        let j: serde_json::Value = serde_json::from_str(&out.to_json().unwrap()).unwrap();
        assert_eq!(j["truncation"], 1);
        let amps = j["amps"].as_array().unwrap();
        assert_eq!(amps.len(), 2);
        assert_eq!(amps[0][0], 0);
        assert_eq!(amps[0][1], 1);
    }
}
