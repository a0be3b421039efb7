//! Truncated Fock-space vectors for coherent and squeezed states.
//!
//! Squeezed states are the solutions of `(A + zeta A^dagger)|psi> = alpha|psi>`
//! for the deformed ladder operators. Expanding in Fock states gives
//! unnormalized amplitudes `I(n) / sqrt(rho(n))` where `I` obeys the
//! three-term recurrence
//!
//! ```text
//! I(n+1) = alpha I(n) - zeta k(n) I(n-1),   I(0) = 1, I(1) = alpha
//! ```
//!
//! and `rho(n) = k(1) ... k(n)`. For the deformed oscillator the energy
//! eigenstates are themselves perturbed (`|phi_n>` mixes `|n +- 4>`), which
//! adds two first-order correction terms to every amplitude.
//!
//! Coefficients are assembled in log-polar form and only exponentiated
//! relative to the norm, so truncations of several hundred levels are safe.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DeformedOscillator;
use crate::numerics::mp::{terminating_2f1_mp, MpComplex};
use crate::numerics::{log_sum_exp, scaled_three_term, CompensatedSum, LogComplex, LogMagnitude};

/// Default bound on [`FockVector::tail_mass`] for a truncation to count as converged.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Smallest truncation accepted by the deformed-oscillator builders, so that
/// both the `n < 4` and `n >= 4` branches of the amplitudes appear.
pub const MIN_NC_LEVELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    NcCoherent,
    NcSqueezed,
    HoSqueezed,
    HoCoherent,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::NcCoherent, Family::NcSqueezed, Family::HoSqueezed, Family::HoCoherent];

    pub fn is_squeezed(self) -> bool {
        matches!(self, Family::NcSqueezed | Family::HoSqueezed)
    }

    pub fn is_deformed(self) -> bool {
        matches!(self, Family::NcCoherent | Family::NcSqueezed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::NcCoherent => "nc_coherent",
            Family::NcSqueezed => "nc_squeezed",
            Family::HoSqueezed => "ho_squeezed",
            Family::HoCoherent => "ho_coherent",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Accepts both `nc_squeezed` and `nc-squeezed` spellings.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL.into_iter().find(|f| f.as_str() == norm).ok_or_else(|| {
            Error::invalid(format!(
                "unknown state family {s:?} (expected one of nc-coherent, nc-squeezed, ho-squeezed, ho-coherent)"
            ))
        })
    }
}

/// Everything needed to build one input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpec {
    pub alpha: Complex64,
    pub zeta: Complex64,
    pub model: DeformedOscillator,
    pub family: Family,
}

impl StateSpec {
    pub fn new(family: Family, alpha: Complex64, zeta: Complex64, model: DeformedOscillator) -> Result<Self> {
        let spec = StateSpec { alpha, zeta, model, family };
        spec.validate()?;
        Ok(spec)
    }

    pub fn coherent(family: Family, alpha: f64, tau: f64) -> Result<Self> {
        Self::new(family, Complex64::new(alpha, 0.0), Complex64::new(0.0, 0.0), DeformedOscillator::new(tau)?)
    }

    pub fn squeezed(family: Family, alpha: f64, zeta: f64, tau: f64) -> Result<Self> {
        Self::new(family, Complex64::new(alpha, 0.0), Complex64::new(zeta, 0.0), DeformedOscillator::new(tau)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.zeta.is_finite()) {
            return Err(Error::invalid("alpha and zeta must be finite"));
        }
        let zeta_zero = self.zeta == Complex64::new(0.0, 0.0);
        if self.family.is_squeezed() && zeta_zero {
            return Err(Error::invalid(format!(
                "{} needs a nonzero zeta; use the coherent family for zeta = 0",
                self.family
            )));
        }
        if !self.family.is_squeezed() && !zeta_zero {
            return Err(Error::invalid(format!("{} requires zeta = 0", self.family)));
        }
        Ok(())
    }

    /// The model actually used: the `ho_*` families ignore `tau`.
    pub fn effective_model(&self) -> DeformedOscillator {
        if self.family.is_deformed() {
            self.model
        } else {
            DeformedOscillator::undeformed()
        }
    }

    pub fn min_levels(&self) -> usize {
        if self.family.is_deformed() {
            MIN_NC_LEVELS
        } else {
            1
        }
    }
}

/// Values `I(alpha, zeta, 0..=n_max)` of the three-term recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    pub values: Vec<Complex64>,
}

/// Run the recurrence in plain double precision. Entries overflow to
/// infinity past roughly `n = 150`; the builders use a rescaled variant.
pub fn recurrence_i(
    alpha: Complex64,
    zeta: Complex64,
    model: &DeformedOscillator,
    n_max: usize,
) -> Result<RecurrenceTable> {
    if n_max < 1 {
        return Err(Error::invalid("recurrence needs n_max >= 1"));
    }
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(Complex64::new(1.0, 0.0));
    values.push(alpha);
    for n in 1..n_max {
        let next = alpha * values[n] - zeta * model.k(n as u64) * values[n - 1];
        values.push(next);
    }
    Ok(RecurrenceTable { values })
}

fn recurrence_log(alpha: Complex64, zeta: Complex64, model: &DeformedOscillator, n_max: usize) -> Vec<LogComplex> {
    scaled_three_term(n_max, Complex64::new(1.0, 0.0), alpha, |n| (alpha, -zeta * model.k(n as u64)))
}

/// `I(alpha, zeta, n)` from its hypergeometric closed form
///
/// ```text
/// i^n (zeta B)^(n/2) (1 + A/B)^(n) 2F1(-n, 1/2 + A/(2B) + i alpha / (2 sqrt(zeta B)); 1 + A/B; 2)
/// ```
///
/// with principal branches. The series cancels catastrophically, so it is
/// summed at `192 + 4n` bits. Singular for `B = 0` or `zeta = 0`.
pub fn closed_form_i(alpha: Complex64, zeta: Complex64, model: &DeformedOscillator, n: u32) -> Result<Complex64> {
    if model.b() <= 0.0 {
        return Err(Error::Degenerate("closed form needs B > 0 (tau > 0); use the recurrence".into()));
    }
    if zeta == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("closed form needs zeta != 0; use the recurrence".into()));
    }
    let p = 192 + 4 * n as usize;
    let (a, b) = (model.a(), model.b());
    let a_mp = MpComplex::from_f64(a, 0.0, p);
    let b_mp = MpComplex::from_f64(b, 0.0, p);
    let a_over_b = a_mp.div(&b_mp);
    let half = MpComplex::from_f64(0.5, 0.0, p);
    let one = MpComplex::one(p);

    let root = MpComplex::from_complex(zeta, p).mul(&b_mp).sqrt();
    let i_alpha = MpComplex::from_complex(Complex64::new(-alpha.im, alpha.re), p);
    let upper = half.add(&a_over_b.mul(&half)).add(&i_alpha.div(&root.scale(2.0)));
    let lower = one.add(&a_over_b);

    let series = terminating_2f1_mp(n, &upper, &lower, 2.0)?;
    let pochhammer =
        (0..n).fold(MpComplex::one(p), |acc, k| acc.mul(&lower.add(&MpComplex::from_f64(k as f64, 0.0, p))));
    let i_pow = MpComplex::from_f64(0.0, 1.0, p).powu(n % 4);
    Ok(i_pow.mul(&root.powu(n)).mul(&pochhammer).mul(&series).to_complex())
}

/// Where a [`FockVector`] came from; absent for raw coefficient input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateLabel {
    pub family: Family,
    pub alpha: Complex64,
    pub zeta: Complex64,
    pub tau: f64,
}

/// A normalized truncated state `sum_{n=0}^{N} c_n |n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    coeffs: Vec<Complex64>,
    tail_mass: f64,
    norm_log: f64,
    label: Option<StateLabel>,
}

impl FockVector {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Highest retained Fock index `N`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Estimated probability weight beyond `N`, relative to the untruncated sum.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `ln` of the norm of the coefficients before normalization.
    pub fn norm_log(&self) -> f64 {
        self.norm_log
    }

    pub fn label(&self) -> Option<&StateLabel> {
        self.label.as_ref()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect::<CompensatedSum>().total()
    }

    /// `<self|other>` over the common index range.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl Serialize for FockVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pair = |z: Complex64| [z.re, z.im];
        let mut s = serializer.serialize_struct("FockVector", 7)?;
        s.serialize_field("family", &self.label.map(|l| l.family))?;
        s.serialize_field("alpha", &self.label.map(|l| pair(l.alpha)))?;
        s.serialize_field("zeta", &self.label.map(|l| pair(l.zeta)))?;
        s.serialize_field("tau", &self.label.map(|l| l.tau))?;
        s.serialize_field("truncation", &self.truncation())?;
        let coeffs: Vec<[f64; 2]> = self.coeffs.iter().map(|&z| pair(z)).collect();
        s.serialize_field("coeffs", &coeffs)?;
        s.serialize_field("tail_mass", &self.tail_mass)?;
        s.end()
    }
}

/// Normalize raw coefficients. The norm is computed relative to the largest
/// entry, so inputs far outside `[1e-154, 1e154]` are handled.
pub fn normalize(raw: &[Complex64]) -> Result<FockVector> {
    let max = raw.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if raw.is_empty() || max == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !max.is_finite() {
        return Err(Error::invalid("coefficients must be finite"));
    }
    let sum: CompensatedSum = raw.iter().map(|c| (c / max).norm_sqr()).collect();
    let root = sum.total().sqrt();
    let coeffs = raw.iter().map(|c| (c / max) / root).collect();
    Ok(FockVector { coeffs, tail_mass: 0.0, norm_log: max.ln() + root.ln(), label: None })
}

/// Number of amplitudes past the truncation used for the tail estimate.
/// Two, so that states with only even (or odd) populations are not
/// reported as converged because the next single amplitude vanishes.
const TAIL_TERMS: usize = 2;

/// Normalize `raw[0..=levels]` and estimate the tail from the entries after it.
fn finish(raw: &[LogComplex], levels: usize, label: StateLabel) -> Result<FockVector> {
    debug_assert_eq!(raw.len(), levels + 1 + TAIL_TERMS);
    let log_sq: Vec<f64> = raw.iter().map(|c| 2.0 * c.log_abs()).collect();
    let log_norm_sq = log_sum_exp(log_sq[..=levels].iter().copied());
    if log_norm_sq == f64::NEG_INFINITY {
        return Err(Error::ZeroVector);
    }
    if !log_norm_sq.is_finite() {
        return Err(Error::invalid(format!("non-finite norm for {} state", label.family)));
    }
    let log_total = log_sum_exp(log_sq.iter().copied());
    let log_tail = log_sum_exp(log_sq[levels + 1..].iter().copied());
    let tail_mass = (log_tail - log_total).exp();
    let norm_log = 0.5 * log_norm_sq;
    let coeffs = raw[..=levels].iter().map(|c| c.to_complex_scaled(norm_log)).collect();
    Ok(FockVector { coeffs, tail_mass, norm_log, label: Some(label) })
}

/// `S(n)` for the deformed families given the undeformed sequence `base` (`alpha^n` or `I(n)`):
///
/// `S(n) = base(n) - (tau/16) f(n)!/f(n+4)! base(n+4) + [n >= 4] (tau/16) n!/(n-4)! f(n)!/f(n-4)! base(n-4)`
fn deformed_s(base: &[LogComplex], model: &DeformedOscillator, n_max: usize) -> Vec<LogComplex> {
    debug_assert!(base.len() > n_max + 4);
    let t = model.log_tables(n_max + 4);
    let log_eps = (model.tau() / 16.0).ln();
    (0..=n_max)
        .map(|n| {
            let lowering = -base[n + 4].scale_log(log_eps + t.log_ff[n] - t.log_ff[n + 4]);
            let raising = if n >= 4 {
                base[n - 4].scale_log(log_eps + t.log_fact[n] - t.log_fact[n - 4] + t.log_ff[n] - t.log_ff[n - 4])
            } else {
                LogComplex::ZERO
            };
            LogComplex::sum([base[n], lowering, raising])
        })
        .collect()
}

/// Unnormalized amplitudes `S(n)`, `n = 0..=n_max`, in log-polar form.
///
/// The Fock coefficients are `S(n) / sqrt(rho(n))` with `rho` taken from
/// [`StateSpec::effective_model`]. For the deformed families `S` carries
/// the first-order eigenstate corrections; for the ordinary oscillator it
/// is `alpha^n` (coherent) or `(zeta/2)^(n/2) H_n(alpha / sqrt(2 zeta))`
/// (squeezed).
pub fn s_amplitudes(spec: &StateSpec, n_max: usize) -> Result<Vec<LogComplex>> {
    spec.validate()?;
    let (alpha, zeta) = (spec.alpha, spec.zeta);
    let powers = |len: usize| {
        let a = LogComplex::from_complex(alpha);
        (0..=len).map(|n| a.powi(n as u32)).collect::<Vec<_>>()
    };
    Ok(match spec.family {
        Family::NcCoherent => deformed_s(&powers(n_max + 4), &spec.model, n_max),
        Family::NcSqueezed => deformed_s(&recurrence_log(alpha, zeta, &spec.model, n_max + 4), &spec.model, n_max),
        Family::HoCoherent => powers(n_max),
        Family::HoSqueezed => {
            let x = alpha / (2.0 * zeta).sqrt();
            let hermite = scaled_three_term(n_max, Complex64::new(1.0, 0.0), 2.0 * x, |n| {
                (2.0 * x, Complex64::new(-2.0 * n as f64, 0.0))
            });
            let half_zeta = zeta / 2.0;
            let (log_r, arg) = (half_zeta.norm().ln(), half_zeta.arg());
            hermite
                .iter()
                .enumerate()
                .map(|(n, h)| {
                    let half_n = n as f64 / 2.0;
                    let power = LogComplex {
                        magnitude: LogMagnitude::from_log(half_n * log_r),
                        phase: Complex64::from_polar(1.0, half_n * arg),
                    };
                    power * *h
                })
                .collect()
        }
    })
}

fn assemble(spec: &StateSpec, levels: usize) -> Result<FockVector> {
    check_levels(levels, spec.min_levels(), spec.family.as_str())?;
    let n_out = levels + TAIL_TERMS;
    let s = s_amplitudes(spec, n_out)?;
    let model = spec.effective_model();
    let mut log_rho = 0.0;
    let raw: Vec<LogComplex> = s
        .iter()
        .enumerate()
        .map(|(n, v)| {
            if n > 0 {
                log_rho += model.k(n as u64).ln();
            }
            v.scale_log(-0.5 * log_rho)
        })
        .collect();
    let label = StateLabel { family: spec.family, alpha: spec.alpha, zeta: spec.zeta, tau: model.tau() };
    finish(&raw, levels, label)
}

fn check_levels(levels: usize, min: usize, what: &str) -> Result<()> {
    if levels < min {
        Err(Error::invalid(format!("{what} needs at least {min} levels, got {levels}")))
    } else {
        Ok(())
    }
}

/// Coherent state of the deformed oscillator, with amplitudes
/// `C(alpha, n) / sqrt(rho(n))`.
pub fn nc_coherent(alpha: Complex64, model: &DeformedOscillator, levels: usize) -> Result<FockVector> {
    assemble(&StateSpec::new(Family::NcCoherent, alpha, Complex64::new(0.0, 0.0), *model)?, levels)
}

/// Squeezed state of the deformed oscillator, with amplitudes
/// `S(alpha, zeta, n) / sqrt(rho(n))`.
pub fn nc_squeezed(alpha: Complex64, zeta: Complex64, model: &DeformedOscillator, levels: usize) -> Result<FockVector> {
    let state = assemble(&StateSpec::new(Family::NcSqueezed, alpha, zeta, *model)?, levels)?;
    if state.tail_mass > DEFAULT_TAIL_TOL {
        log::warn!(
            "nc_squeezed(alpha={alpha}, zeta={zeta}, tau={}) at N={levels}: tail mass {:.3e} exceeds {DEFAULT_TAIL_TOL:e}",
            model.tau(),
            state.tail_mass
        );
    }
    Ok(state)
}

/// Squeezed state of the ordinary oscillator in Hermite form,
/// `c_n ~ (zeta/2)^(n/2) H_n(alpha / sqrt(2 zeta)) / sqrt(n!)`.
pub fn ho_squeezed(alpha: Complex64, zeta: Complex64, levels: usize) -> Result<FockVector> {
    assemble(&StateSpec::new(Family::HoSqueezed, alpha, zeta, DeformedOscillator::undeformed())?, levels)
}

/// Glauber coherent state `c_n ~ alpha^n / sqrt(n!)`.
pub fn ho_coherent(alpha: Complex64, levels: usize) -> Result<FockVector> {
    assemble(
        &StateSpec::new(Family::HoCoherent, alpha, Complex64::new(0.0, 0.0), DeformedOscillator::undeformed())?,
        levels,
    )
}

/// Build the state described by `spec` with `levels` as the truncation `N`.
pub fn build(spec: &StateSpec, levels: usize) -> Result<FockVector> {
    match spec.family {
        Family::NcSqueezed => nc_squeezed(spec.alpha, spec.zeta, &spec.model, levels),
        _ => assemble(spec, levels),
    }
}

/// Result of [`converge_truncation`].
#[derive(Debug, Clone)]
pub struct Converged {
    pub state: FockVector,
    pub converged: bool,
}

/// Double the truncation from `n_start` (capped at `n_max`) until the tail
/// mass drops below `tail_tol`. Hitting `n_max` is reported through
/// [`Converged::converged`], not as an error.
pub fn converge_truncation(spec: &StateSpec, tail_tol: f64, n_start: usize, n_max: usize) -> Result<Converged> {
    check_levels(n_start, MIN_NC_LEVELS, "converge_truncation")?;
    if n_max < n_start {
        return Err(Error::invalid(format!("n_max ({n_max}) must be >= n_start ({n_start})")));
    }
    let mut levels = n_start;
    loop {
        let state = build(spec, levels)?;
        if state.tail_mass < tail_tol {
            return Ok(Converged { state, converged: true });
        }
        if levels >= n_max {
            return Ok(Converged { state, converged: false });
        }
        levels = (levels * 2).min(n_max);
    }
}
