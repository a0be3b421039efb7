//! The minimal-length deformed oscillator.
//!
//! To first order in the dimensionless deformation `tau` the spectrum is
//! `e_n = A n + B n^2` with `A = 1 + tau/2` and `B = tau/2`. The same
//! function plays the role of the ladder eigenvalue `k(n)`, and the
//! f-oscillator form `k(n) = n f(n)^2` gives `f(n) = sqrt(A + B n)`.
//! Units are `hbar = omega = m = 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{log_factorial, pochhammer_rising};

/// Above this the first-order expansion is outside its usual regime.
pub const TAU_SOFT_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DeformedOscillator {
    tau: f64,
    a: f64,
    b: f64,
}

impl DeformedOscillator {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::invalid(format!("tau must be finite and >= 0, got {tau}")));
        }
        if tau > TAU_SOFT_LIMIT {
            log::warn!("tau = {tau} > {TAU_SOFT_LIMIT}: first-order perturbative results may be unreliable");
        }
        let b = tau / 2.0;
        Ok(DeformedOscillator { tau, a: 1.0 + b, b })
    }

    /// The ordinary harmonic oscillator, `tau = 0`.
    pub fn undeformed() -> Self {
        DeformedOscillator { tau: 0.0, a: 1.0, b: 0.0 }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn is_undeformed(&self) -> bool {
        self.tau == 0.0
    }

    /// `k(n) = A n + B n^2`.
    pub fn k(&self, n: u64) -> f64 {
        let n = n as f64;
        self.a * n + self.b * n * n
    }

    /// `f(n) = sqrt(A + B n)`. At `n = 0` this is `sqrt(A)`, a value that
    /// never multiplies anything nonzero.
    pub fn f(&self, n: u64) -> f64 {
        (self.a + self.b * n as f64).sqrt()
    }

    /// Dimensionless energy `e_n`; identical to `k(n)`.
    pub fn energy(&self, n: u64) -> f64 {
        self.k(n)
    }

    /// `ln rho(n) = sum_{i=1}^n ln k(i)`.
    pub fn log_rho(&self, n: u64) -> f64 {
        (1..=n).map(|i| self.k(i).ln()).sum()
    }

    /// `ln f(n)! = sum_{i=1}^n ln f(i)`.
    pub fn log_f_factorial(&self, n: u64) -> f64 {
        (1..=n).map(|i| self.f(i).ln()).sum()
    }

    /// `ln(f(n)! / f(target)!)` for `target = n +- 4`.
    pub fn f_factorial_log_ratio(&self, n: u64, target: u64) -> Result<f64> {
        if target == n + 4 {
            Ok(-(n + 1..=n + 4).map(|i| self.f(i).ln()).sum::<f64>())
        } else if n >= 4 && target == n - 4 {
            Ok((n - 3..=n).map(|i| self.f(i).ln()).sum())
        } else {
            Err(Error::invalid(format!("f-factorial ratio needs |n - target| = 4, got n={n} target={target}")))
        }
    }

    /// First-order eigenstate `|phi_n>` expanded in the undeformed Fock basis.
    pub fn perturbed_eigenstate(&self, n: u64) -> EigenstateExpansion {
        let mut terms = BTreeMap::new();
        terms.insert(n, 1.0);
        if self.tau != 0.0 {
            let eps = self.tau / 16.0;
            terms.insert(n + 4, eps * pochhammer_rising((n + 1) as f64, 4).sqrt());
            if n >= 4 {
                terms.insert(n - 4, -eps * pochhammer_rising((n - 3) as f64, 4).sqrt());
            }
        }
        EigenstateExpansion { center: n, terms }
    }

    /// Precomputed `ln n!` and `ln f(n)!` for `n = 0..=n_max`.
    pub(crate) fn log_tables(&self, n_max: usize) -> LogTables {
        let mut log_ff = Vec::with_capacity(n_max + 1);
        let mut f = 0.0;
        log_ff.push(0.0);
        for i in 1..=n_max as u64 {
            f += self.f(i).ln();
            log_ff.push(f);
        }
        let log_fact = (0..=n_max as u64).map(log_factorial).collect();
        LogTables { log_fact, log_ff }
    }
}

impl TryFrom<f64> for DeformedOscillator {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        DeformedOscillator::new(tau)
    }
}

impl From<DeformedOscillator> for f64 {
    fn from(m: DeformedOscillator) -> f64 {
        m.tau
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LogTables {
    pub log_fact: Vec<f64>,
    pub log_ff: Vec<f64>,
}

/// Sparse Fock-basis expansion of a perturbed eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenstateExpansion {
    pub center: u64,
    pub terms: BTreeMap<u64, f64>,
}

impl EigenstateExpansion {
    pub fn coefficient(&self, index: u64) -> f64 {
        self.terms.get(&index).copied().unwrap_or(0.0)
    }
}
