//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::f64::consts::{PI, TAU};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ncsq::prelude::*;
use ncsq::selftest::{oracle_deviation, recurrence_closed_form_deviation, undeformed_reduction_deviation};
use ncsq::sweep::{run_figure, run_sweep, FigureData, FigurePreset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed < limit, format!("{:.3?} (limit {:?})", elapsed, limit))
}

fn single_photon() -> Outcome {
    let start = Instant::now();
    let photon = normalize(&[c(0.0), c(1.0)]).unwrap();
    let bs = BeamSplitterConfig::balanced();
    let r = output_entropy(&photon, &bs, true, true).unwrap();
    let (fast, time) = within(start.elapsed(), Duration::from_millis(1));
    let dl = (r.linear_entropy - 0.5).abs();
    let dv = (r.von_neumann.unwrap() - 1.0).abs();
    outcome(dl <= 1e-12 && dv <= 1e-9 && fast, format!("|S_L - 1/2| = {dl:.1e}, |S_vN - 1| = {dv:.1e}, {time}"))
}

fn coherent_classicality() -> Outcome {
    let start = Instant::now();
    let bs = BeamSplitterConfig::balanced();
    let mut worst = 0.0f64;
    let mut all_converged = true;
    for alpha in [0.5, 1.0, 2.0] {
        let spec = StateSpec::coherent(Family::NcCoherent, alpha, 0.0).unwrap();
        let conv = converge_truncation(&spec, 1e-10, 10, 320).unwrap();
        all_converged &= conv.converged;
        worst = worst.max(output_entropy(&conv.state, &bs, conv.converged, false).unwrap().linear_entropy);
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    outcome(worst <= 1e-6 && all_converged && fast, format!("max S = {worst:.1e}, converged = {all_converged}, {time}"))
}

fn recurrence_vs_closed_form() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for tau in [0.1, 0.5] {
        let model = DeformedOscillator::new(tau).unwrap();
        for zeta in [0.25, 0.75] {
            for alpha in [0.0, 0.5, 1.0, 2.0] {
                worst = worst.max(recurrence_closed_form_deviation(c(alpha), c(zeta), &model, 30).unwrap());
            }
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    outcome(worst <= 1e-9 && fast, format!("max relative deviation = {worst:.1e}, {time}"))
}

fn undeformed_reduction() -> Outcome {
    let mut worst = 0.0f64;
    for zeta in [0.25, 0.75] {
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            worst = worst.max(undeformed_reduction_deviation(c(alpha), c(zeta), 40).unwrap());
        }
    }
    outcome(worst <= 1e-9, format!("max coefficient deviation = {worst:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let bs = BeamSplitterConfig::balanced();
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let spec = StateSpec::squeezed(Family::NcSqueezed, alpha, 0.5, 0.5).unwrap();
        worst = worst.max(oracle_deviation(&spec, &bs, 10).unwrap());
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(10));
    outcome(worst <= 1e-10 && fast, format!("max |S_matrix - S_sum| = {worst:.1e}, {time}"))
}

fn fig2_ordering() -> Outcome {
    let start = Instant::now();
    let mut min_gap = f64::INFINITY;
    let mut rows = 0;
    for preset in [FigurePreset::Fig2a, FigurePreset::Fig2b] {
        let FigureData::Overlay(data) = run_figure(preset, None).unwrap() else {
            return outcome(false, "fig2 preset did not produce an overlay");
        };
        rows += data.len();
        for r in &data {
            min_gap = min_gap.min(r.nc.result.linear_entropy - r.ho.result.linear_entropy);
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(120));
    outcome(min_gap > 1e-12 && rows == 122 && fast, format!("min S_nc - S_ho = {min_gap:.3e} over {rows} rows, {time}"))
}

fn fig3_monotone_saturating() -> Outcome {
    let mut cfg = FigurePreset::Fig3.configs().remove(0);
    cfg.alpha_grid = [0.5, 1.0, 2.0].into_iter().map(ncsq::sweep::Param::real).collect();
    let rows = run_sweep(&cfg, None).unwrap();
    let n_tau = cfg.tau_grid.len();
    let quarter = (n_tau - 1) / 4;
    let mut passed = true;
    let mut notes = Vec::new();
    for (i, chunk) in rows.chunks(n_tau).enumerate() {
        let s: Vec<f64> = chunk.iter().map(|r| r.result.linear_entropy).collect();
        let diffs: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
        let min_diff = diffs.iter().copied().fold(f64::INFINITY, f64::min);
        let early = diffs[..quarter].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let late = diffs[diffs.len() - quarter..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let monotone = min_diff >= -1e-9;
        let saturating = late < early;
        passed &= monotone && saturating;
        notes.push(format!(
            "alpha={}: min dS = {min_diff:.2e}, max early dS = {early:.2e}, max late dS = {late:.2e}",
            cfg.alpha_grid[i].0.re
        ));
    }
    outcome(passed, notes.join("; "))
}

fn fig1_coherent_law() -> Outcome {
    let bs = BeamSplitterConfig::balanced();
    let s = |tau: f64| {
        let spec = StateSpec::coherent(Family::NcCoherent, 1.0, tau).unwrap();
        output_entropy(&build(&spec, 20).unwrap(), &bs, true, false).unwrap().linear_entropy
    };
    let (s0, s1, s3, s5) = (s(0.0), s(0.1), s(0.3), s(0.5));
    outcome(
        s3 > s1 && s1 > s0 && s0 <= 1e-6 && s5 > 0.0,
        format!("S(0) = {s0:.1e}, S(0.1) = {s1:.4}, S(0.3) = {s3:.4}, S(0.5) = {s5:.4}"),
    )
}

fn structural_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = [0.0f64; 5];
    let mut min_eig = f64::INFINITY;
    let mut bound_ok = true;
    for _ in 0..200 {
        let n = rng.gen_range(1..=12usize);
        let raw: Vec<Complex64> =
            (0..=n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let state = normalize(&raw).unwrap();
        let bs = BeamSplitterConfig::new(rng.gen_range(0.0..PI), rng.gen_range(-PI..PI));
        let out = mix_with_vacuum(&state, &bs);
        let rho = reduce_over_d(&out);
        let s = linear_entropy(&rho).linear_entropy;
        worst[0] = worst[0].max(rho.hermiticity_error());
        worst[1] = worst[1].max((rho.trace() - 1.0).norm());
        min_eig = min_eig.min(rho.eigenvalues().unwrap()[0]);
        bound_ok &= (0.0..=1.0 - 1.0 / (n as f64 + 1.0) + 1e-12).contains(&s);
        let rotated = BeamSplitterConfig::new(bs.theta(), rng.gen_range(0.0..TAU));
        let s_rot = linear_entropy(&reduce_over_d(&mix_with_vacuum(&state, &rotated))).linear_entropy;
        worst[2] = worst[2].max((s - s_rot).abs());
        for k in 0..=n {
            worst[3] = worst[3].max((out.level_weight(k) - state.coeffs()[k].norm_sqr()).abs());
        }
        worst[4] = worst[4].max((out.norm_sqr() - 1.0).abs());
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(30));
    let passed = worst.iter().all(|&w| w <= 1e-12) && min_eig >= -1e-10 && bound_ok && fast;
    outcome(
        passed,
        format!(
            "hermiticity {:.1e}, trace {:.1e}, min eigenvalue {min_eig:.1e}, entropy bound {bound_ok}, \
             phase {:.1e}, level weight {:.1e}, {time}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn fig3_determinism() -> Outcome {
    let run = || Command::new(env!("CARGO_BIN_EXE_ncsq")).args(["figure", "fig3"]).output().unwrap();
    let (a, b) = (run(), run());
    let codes_ok = [a.status.code(), b.status.code()].iter().all(|c| matches!(c, Some(0 | 3)));
    let lines = a.stdout.iter().filter(|&&x| x == b'\n').count();
    outcome(
        codes_ok && a.stdout == b.stdout && lines == 1 + 31 * 21,
        format!("{} bytes, {lines} lines, identical = {}", a.stdout.len(), a.stdout == b.stdout),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("single-photon benchmark", single_photon),
        ("coherent classicality at tau = 0", coherent_classicality),
        ("recurrence and hypergeometric agreement", recurrence_vs_closed_form),
        ("tau = 0 reduction to the Hermite form", undeformed_reduction),
        ("matrix path equals quadruple sum", oracle_equivalence),
        ("fig2 ordering S_nc > S_ho", fig2_ordering),
        ("fig3 monotonicity and saturation in tau", fig3_monotone_saturating),
        ("fig1 coherent-state ordering", fig1_coherent_law),
        ("structural properties over 200 random inputs", structural_properties),
        ("fig3 output is byte-identical across runs", fig3_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.passed);
        println!("{} criterion {:>2}: {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
