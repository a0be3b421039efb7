//! Fixed points and cross-path checks runnable from the command line.

use num_complex::Complex64;
use serde::Serialize;

use crate::beam_splitter::{mix_with_vacuum, BeamSplitterConfig};
use crate::entanglement::{entropy_quadruple_sum_oracle, output_entropy, reduce_over_d, von_neumann_entropy};
use crate::error::Result;
use crate::model::DeformedOscillator;
use crate::state::{
    build, closed_form_i, converge_truncation, ho_squeezed, nc_squeezed, normalize, recurrence_i, Family, StateSpec,
};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, passed: value <= tolerance, value, tolerance }
    }
}

/// Largest `|closed - recurrence| / |I(n)|` over `n = 2..=n_max`. Exact
/// zeros (odd `n` at `alpha = 0`) are measured against `|I(n-1)|` instead.
pub fn recurrence_closed_form_deviation(
    alpha: Complex64,
    zeta: Complex64,
    model: &DeformedOscillator,
    n_max: usize,
) -> Result<f64> {
    let rec = recurrence_i(alpha, zeta, model, n_max)?.values;
    let mut worst = 0.0f64;
    for n in 2..=n_max {
        let cf = closed_form_i(alpha, zeta, model, n as u32)?;
        let scale = if rec[n].norm() > 0.0 { rec[n].norm() } else { rec[n - 1].norm() };
        worst = worst.max((cf - rec[n]).norm() / scale);
    }
    Ok(worst)
}

/// Largest coefficient-wise gap between the deformed squeezed builder at
/// `tau = 0` and the Hermite form.
pub fn undeformed_reduction_deviation(alpha: Complex64, zeta: Complex64, levels: usize) -> Result<f64> {
    let nc = nc_squeezed(alpha, zeta, &DeformedOscillator::undeformed(), levels)?;
    let ho = ho_squeezed(alpha, zeta, levels)?;
    Ok(nc.coeffs().iter().zip(ho.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// `|S_matrix - S_quadruple|` for one state.
pub fn oracle_deviation(spec: &StateSpec, bs: &BeamSplitterConfig, levels: usize) -> Result<f64> {
    let matrix = output_entropy(&build(spec, levels)?, bs, true, false)?.linear_entropy;
    let oracle = entropy_quadruple_sum_oracle(spec, bs, levels)?;
    Ok((matrix - oracle).abs())
}

pub fn run() -> Result<Vec<Check>> {
    let c = |re: f64| Complex64::new(re, 0.0);
    let bs = BeamSplitterConfig::balanced();
    let mut checks = Vec::new();

    let photon = normalize(&[c(0.0), c(1.0)])?;
    let rho = reduce_over_d(&mix_with_vacuum(&photon, &bs));
    let single = output_entropy(&photon, &bs, true, false)?;
    checks.push(Check::at_most("single photon linear entropy = 1/2", (single.linear_entropy - 0.5).abs(), 1e-12));
    checks.push(Check::at_most(
        "single photon von Neumann entropy = 1 bit",
        (von_neumann_entropy(&rho)? - 1.0).abs(),
        1e-9,
    ));

    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let spec = StateSpec::coherent(Family::NcCoherent, alpha, 0.0)?;
        let conv = converge_truncation(&spec, 1e-10, 10, 320)?;
        worst = worst.max(output_entropy(&conv.state, &bs, conv.converged, false)?.linear_entropy);
    }
    checks.push(Check::at_most("undeformed coherent input stays separable", worst, 1e-6));

    let mut worst = 0.0f64;
    for tau in [0.1, 0.5] {
        for zeta in [0.25, 0.75] {
            for alpha in [0.0, 0.5, 1.0, 2.0] {
                let model = DeformedOscillator::new(tau)?;
                worst = worst.max(recurrence_closed_form_deviation(c(alpha), c(zeta), &model, 30)?);
            }
        }
    }
    checks.push(Check::at_most("recurrence matches hypergeometric closed form", worst, 1e-9));

    let mut worst = 0.0f64;
    for zeta in [0.25, 0.75] {
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            worst = worst.max(undeformed_reduction_deviation(c(alpha), c(zeta), 40)?);
        }
    }
    checks.push(Check::at_most("tau = 0 squeezed state equals Hermite form", worst, 1e-9));

    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let spec = StateSpec::squeezed(Family::NcSqueezed, alpha, 0.5, 0.5)?;
        worst = worst.max(oracle_deviation(&spec, &bs, 10)?);
    }
    checks.push(Check::at_most("matrix entropy matches quadruple sum", worst, 1e-10));

    let spec = StateSpec::squeezed(Family::NcSqueezed, 1.0, 0.5, 0.5)?;
    let state = build(&spec, 10)?;
    let base = output_entropy(&state, &bs, true, false)?.linear_entropy;
    let rotated = output_entropy(&state, &BeamSplitterConfig::new(bs.theta(), 1.3), true, false)?.linear_entropy;
    checks.push(Check::at_most("entropy independent of splitter phase", (base - rotated).abs(), 1e-12));

    Ok(checks)
}
