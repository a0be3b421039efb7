//! Entanglement of the beam-splitter output.
//!
//! The output `|out> = sum O[q][m] |q>_c |m>_d` is pure, so mode `c` alone is
//! described by `rho_A = Tr_d |out><out|` and the linear entropy
//! `S = 1 - Tr(rho_A^2)` measures how entangled the two modes are: zero for a
//! product state, approaching `1 - 1/dim` for a maximally mixed `rho_A`.

use num_complex::Complex64;
use serde::Serialize;

use crate::beam_splitter::{mix_with_vacuum, BeamSplitterConfig, BipartiteAmplitudes};
use crate::error::{Error, Result};
use crate::model::DeformedOscillator;
use crate::numerics::{log_factorial, log_sum_exp, CompensatedSum, LogComplex};
use crate::state::{s_amplitudes, FockVector, StateSpec};

/// Eigenvalues below this are dropped from the von Neumann sum.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;
/// Most negative eigenvalue tolerated as contraction noise.
pub const PSD_TOLERANCE: f64 = -1e-10;
/// Off-diagonal Frobenius norm at which the Jacobi iteration stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Largest truncation the O(N^4) quadruple-sum oracle accepts.
pub const ORACLE_MAX_LEVELS: usize = 12;

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::invalid(format!("density matrix needs {dim}x{dim} entries, got {}", entries.len())));
        }
        Ok(DensityMatrix { dim, entries })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![Complex64::default(); dim * dim];
        for (i, d) in diag.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(*d, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|rho[i][j] - conj(rho[j][i])|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `Tr(rho^2) = sum |rho_ij|^2`, valid because `rho` is Hermitian.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).collect::<CompensatedSum>().total()
    }

    /// Eigenvalues in ascending order, by cyclic complex Jacobi rotations.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut values = jacobi_eigenvalues(self.dim, self.entries.clone())?;
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

/// Sum of `|a_ij|^2` over `i != j`, square-rooted.
fn off_diagonal_norm(n: usize, a: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigenvalues(n: usize, mut a: Vec<Complex64>) -> Result<Vec<f64>> {
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(n, &a) < JACOBI_TOLERANCE {
            return Ok((0..n).map(|i| a[idx(i, i)].re).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                // phase e^{i phi} of a_pq; the diagonal unitary diag(1, e^{-i phi})
                // makes the (p, q) element real, then a real rotation removes it
                let phase = apq / g;
                let theta = (a[idx(q, q)].re - a[idx(p, p)].re) / (2.0 * g);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -s * phase.conj();
                let u_qq = c * phase.conj();
                for k in 0..n {
                    let (akp, akq) = (a[idx(k, p)], a[idx(k, q)]);
                    a[idx(k, p)] = akp * u_pp + akq * u_qp;
                    a[idx(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[idx(p, k)], a[idx(q, k)]);
                    a[idx(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[idx(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[idx(p, q)] = Complex64::default();
                a[idx(q, p)] = Complex64::default();
            }
        }
    }
    let off_norm = off_diagonal_norm(n, &a);
    if off_norm < JACOBI_TOLERANCE {
        return Ok((0..n).map(|i| a[idx(i, i)].re).collect());
    }
    Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS, off_norm })
}

/// Partial trace over mode `d`:
/// `rho_A[q][s] = sum_m O[q][m] conj(O[s][m])`, `m <= N - max(q, s)`.
pub fn reduce_over_d(out: &BipartiteAmplitudes) -> DensityMatrix {
    let dim = out.truncation() + 1;
    let mut entries = vec![Complex64::default(); dim * dim];
    for q in 0..dim {
        let row_q = out.row(q);
        for s in q..dim {
            let row_s = out.row(s);
            // row_s is the shorter one
            let v: Complex64 = row_s.iter().zip(row_q).map(|(os, oq)| oq * os.conj()).sum();
            entries[q * dim + s] = v;
            entries[s * dim + q] = v.conj();
        }
        entries[q * dim + q].im = 0.0;
    }
    DensityMatrix { dim, entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyResult {
    pub linear_entropy: f64,
    pub purity: f64,
    /// Von Neumann entropy in bits, when requested.
    pub von_neumann: Option<f64>,
    pub truncation: usize,
    pub tail_mass: f64,
    pub converged: bool,
}

/// Purity and linear entropy of `rho`. The entropy is clamped to `[0, 1]`
/// so rounding cannot push a pure state below zero.
pub fn linear_entropy(rho: &DensityMatrix) -> EntropyResult {
    let purity = rho.purity();
    EntropyResult {
        linear_entropy: (1.0 - purity).clamp(0.0, 1.0),
        purity,
        von_neumann: None,
        truncation: rho.dim - 1,
        tail_mass: 0.0,
        converged: true,
    }
}

/// `-sum lambda log2 lambda` over the eigenvalues of `rho`, clamped to `[0, 1]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    von_neumann_entropy_with_floor(rho, EIGENVALUE_FLOOR)
}

pub fn von_neumann_entropy_with_floor(rho: &DensityMatrix, floor: f64) -> Result<f64> {
    let s: f64 =
        rho.eigenvalues()?.into_iter().map(|l| l.clamp(0.0, 1.0)).filter(|&l| l > floor).map(|l| -l * l.log2()).sum();
    Ok(s.max(0.0))
}

/// Full pipeline for one input state: mix with vacuum, trace out mode `d`,
/// and measure. `converged` is passed through from the truncation step.
pub fn output_entropy(
    state: &FockVector,
    bs: &BeamSplitterConfig,
    converged: bool,
    with_von_neumann: bool,
) -> Result<EntropyResult> {
    let rho = reduce_over_d(&mix_with_vacuum(state, bs));
    let mut result = linear_entropy(&rho);
    if with_von_neumann {
        result.von_neumann = Some(von_neumann_entropy(&rho)?);
    }
    result.tail_mass = state.tail_mass();
    result.converged = converged;
    Ok(result)
}

/// `k * ln(x)` with `x^0 = 1` (also for `x = 0`).
fn log_pow(x: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * x.ln()
    }
}

/// Linear entropy as the literal fourfold sum over `S(n)` amplitudes,
/// normalized by the double-sum `N^2`:
///
/// ```text
/// S = 1 - N^-4 sum_{q,s} sum_{m,n <= N - max(q,s)} |t|^{2(q+s)} |r|^{2(m+n)}
///       S(m+q) S*(m+s) S(n+s) S*(n+q) / (q! s! m! n! f(m+q)! f(m+s)! f(n+s)! f(n+q)!)
/// ```
///
/// Every factor is carried as a logarithm. `amplitudes[n]` holds `S(n)` for
/// `n = 0..=N`, and `model` supplies the `f(n)!`.
pub fn entropy_quadruple_sum(
    amplitudes: &[LogComplex],
    model: &DeformedOscillator,
    bs: &BeamSplitterConfig,
) -> Result<f64> {
    let Some(levels) = amplitudes.len().checked_sub(1) else {
        return Err(Error::ZeroVector);
    };
    if levels > ORACLE_MAX_LEVELS {
        return Err(Error::invalid(format!(
            "quadruple-sum oracle is limited to N <= {ORACLE_MAX_LEVELS}, got {levels}"
        )));
    }
    let (t_abs, r_abs) = (bs.t().abs(), bs.r().norm());
    let log_fact: Vec<f64> = (0..=levels as u64).map(log_factorial).collect();
    let log_ff: Vec<f64> = (0..=levels as u64).map(|n| model.log_f_factorial(n)).collect();
    let log_s: Vec<f64> = amplitudes.iter().map(|a| a.log_abs()).collect();

    let mut norm_terms = Vec::new();
    for q in 0..=levels {
        for m in 0..=levels - q {
            let n = q + m;
            norm_terms.push(
                2.0 * log_s[n] - log_fact[q] - log_fact[m] - 2.0 * log_ff[n]
                    + log_pow(t_abs, 2 * q)
                    + log_pow(r_abs, 2 * m),
            );
        }
    }
    let log_norm_sq = log_sum_exp(norm_terms);
    if log_norm_sq == f64::NEG_INFINITY {
        return Err(Error::ZeroVector);
    }

    let mut terms = Vec::new();
    for q in 0..=levels {
        for s in 0..=levels {
            let upper = levels - q.max(s);
            for m in 0..=upper {
                for n in 0..=upper {
                    let idx = [m + q, m + s, n + s, n + q];
                    if idx.iter().any(|&i| amplitudes[i].is_zero()) {
                        continue;
                    }
                    let log_mag = log_pow(t_abs, 2 * (q + s))
                        + log_pow(r_abs, 2 * (m + n))
                        + idx.iter().map(|&i| log_s[i] - log_ff[i]).sum::<f64>()
                        - log_fact[q]
                        - log_fact[s]
                        - log_fact[m]
                        - log_fact[n];
                    let phase = amplitudes[idx[0]].phase
                        * amplitudes[idx[1]].phase.conj()
                        * amplitudes[idx[2]].phase
                        * amplitudes[idx[3]].phase.conj();
                    terms.push((log_mag, phase));
                }
            }
        }
    }
    let shift = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = CompensatedSum::default();
    for (log_mag, phase) in &terms {
        acc.add(phase.re * (log_mag - shift).exp());
    }
    Ok(1.0 - acc.total() * (shift - 2.0 * log_norm_sq).exp())
}

/// [`entropy_quadruple_sum`] for the state described by `spec`, truncated at `levels`.
pub fn entropy_quadruple_sum_oracle(spec: &StateSpec, bs: &BeamSplitterConfig, levels: usize) -> Result<f64> {
    if levels > ORACLE_MAX_LEVELS {
        return Err(Error::invalid(format!(
            "quadruple-sum oracle is limited to N <= {ORACLE_MAX_LEVELS}, got {levels}"
        )));
    }
    let amplitudes = s_amplitudes(spec, levels)?;
    entropy_quadruple_sum(&amplitudes, &spec.effective_model(), bs)
}
