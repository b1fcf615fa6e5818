//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use duality_sim::duality::{gamma_of_phi, metrics, SphereCaseName};
use duality_sim::evolution::{dispersive_row, exact_row, InteractionParams, Level, RowOutput};
use duality_sim::fock::{coherent_state, FieldState, QuadratureSpec};
use duality_sim::interferometer::{
    build_initial, condition_on_quadrature, interact, GridSpec, InteractionSetup, PreparationParams, SlitGeometry,
};
use duality_sim::runner::{
    epsilon_sweep, run, CaseSpec, ChiChoice, ChiKeyword, ComplexValue, ExperimentConfig, QGridSpec, Readout, RunResult,
};

const N_MAX: usize = 96;

fn alpha8() -> C64 {
    C64::new(8f64.sqrt(), 0.0)
}

fn coh(alpha: C64) -> FieldState {
    coherent_state(alpha, N_MAX).unwrap()
}

fn sample<S: Strategy>(runner: &mut TestRunner, s: &S) -> S::Value {
    s.new_tree(runner).unwrap().current()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Every run made by the suite, for the invariant sweep of criterion 12.
#[derive(Default)]
struct Ledger {
    runs: Vec<(String, RunResult)>,
}

impl Ledger {
    fn run(&mut self, label: &str, cfg: &ExperimentConfig) -> Result<RunResult, String> {
        let r = run(cfg).map_err(|e| format!("{label}: {e}"))?;
        self.runs.push((label.to_string(), r.clone()));
        Ok(r)
    }
}

fn named(stage: u8, name: SphereCaseName) -> ExperimentConfig {
    ExperimentConfig::new(stage, CaseSpec::Named(name))
}

fn criterion_1() -> Result<Outcome, String> {
    let p = InteractionParams::default();
    let out = dispersive_row(Level::C, &coh(alpha8()), 0.0, &p, 1e-12).map_err(|e| e.to_string())?;
    let f = out.branch(Level::C).ok_or("missing c branch")?.fidelity(&coh(-alpha8())).map_err(|e| e.to_string())?;
    Ok(outcome(f >= 1.0 - 1e-8, format!("fidelity with |-sqrt8> = 1 - {:.2e} (need >= 1 - 1e-8)", 1.0 - f)))
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_2() -> Result<Outcome, String> {
    let input = coh(alpha8());
    let p = InteractionParams::default();
    let out = dispersive_row(Level::B, &input, 0.0, &p, 1e-12).map_err(|e| e.to_string())?;
    let kept = out.branch(Level::B).ok_or("missing b branch")?;
    let top_dev = max_diff(kept.amps(), input.amps());
    let top_ok = top_dev <= 4.0 * f64::EPSILON && out.branch(Level::C).is_none();
    let mut node_ok = true;
    for eps in [0.0, 1.0, 3.0, 5.0, 9.0] {
        let p = InteractionParams::default().with_epsilon(C64::new(eps, 0.0));
        for level in Level::ALL {
            let out = dispersive_row(level, &input, FRAC_PI_2, &p, 1e-12).map_err(|e| e.to_string())?;
            node_ok &= out.branches.len() == 1 && out.branch(level).map(|f| f.amps() == input.amps()).unwrap_or(false);
        }
    }
    Ok(outcome(
        top_ok && node_ok,
        format!("top-path b deviation {top_dev:.1e}; node rows bit-identical for all eps: {node_ok}"),
    ))
}

fn criterion_3() -> Result<Outcome, String> {
    let mut runner = TestRunner::deterministic();
    let strategy = (0.0..FRAC_PI_2, 0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..2.0 * PI);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (u, p1, p2, phi) = sample(&mut runner, &strategy);
        let m = metrics(C64::from_polar(u.cos(), p1), C64::from_polar(u.sin(), p2), C64::new(gamma_of_phi(phi), 0.0))
            .map_err(|e| e.to_string())?;
        worst = worst.max(m.residual.abs());
    }
    Ok(outcome(worst < 1e-12, format!("max |V^2 + D^2 + C^2 - 1| = {worst:.2e} over 1e4 samples (need < 1e-12)")))
}

/// Per-index weights `|α_m|² + |β_m|²` recovered from a row output.
fn per_index_weights(level: Level, out: &RowOutput, n: usize) -> Vec<f64> {
    let zero = vec![C64::new(0.0, 0.0); n];
    let same = out.branch(level).map(|f| f.amps().to_vec()).unwrap_or_else(|| zero.clone());
    let cross = out.branch(level.other()).map(|f| f.amps().to_vec()).unwrap_or(zero);
    (0..n)
        .map(|m| {
            let moved = match level {
                Level::B if m + 1 < n => cross[m + 1].norm_sqr(),
                Level::B => 0.0,
                Level::C if m > 0 => cross[m - 1].norm_sqr(),
                Level::C => 0.0,
            };
            same[m].norm_sqr() + moved
        })
        .collect()
}

fn criterion_4() -> Result<Outcome, String> {
    let mut runner = TestRunner::deterministic();
    let strategy = (0.0..PI, -9.0..9.0f64, -9.0..9.0f64, 0.01..2.0 * PI, proptest::bool::ANY);
    let input = coh(alpha8());
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, re, im, theta, use_b) = sample(&mut runner, &strategy);
        let p = InteractionParams { theta_int: theta, ..Default::default() }.with_epsilon(C64::new(re, im));
        let level = if use_b { Level::B } else { Level::C };
        let out = dispersive_row(level, &input, x, &p, 1e-12).map_err(|e| e.to_string())?;
        let w = per_index_weights(level, &out, N_MAX);
        // the top index of level b has no partner inside the truncated space
        let last = if level == Level::B { N_MAX - 1 } else { N_MAX };
        for m in 0..last {
            worst = worst.max((w[m] - input.amps()[m].norm_sqr()).abs());
        }
    }
    Ok(outcome(worst < 1e-12, format!("max per-index deviation {worst:.2e} over 100 samples (need < 1e-12)")))
}

fn criterion_5() -> Result<Outcome, String> {
    let input = coh(alpha8());
    let ratios = [50.0, 100.0, 200.0, 400.0];
    let mut devs = Vec::new();
    let mut leak_200 = 0.0;
    for &r in &ratios {
        let mut worst: f64 = 0.0;
        for x in [0.0, 0.3, 0.9] {
            for eps in [0.0, 1.0, 3.0] {
                let p = InteractionParams::default().with_epsilon(C64::new(eps, 0.0)).with_detuning(r);
                for level in Level::ALL {
                    let d = dispersive_row(level, &input, x, &p, 1e-12).map_err(|e| e.to_string())?;
                    let e = exact_row(level, &input, x, &p, 1e-12).map_err(|e| e.to_string())?;
                    for l in Level::ALL {
                        let zero = vec![C64::new(0.0, 0.0); N_MAX];
                        let a = d.branch(l).map(|f| f.amps().to_vec()).unwrap_or_else(|| zero.clone());
                        let b = e.branch(l).map(|f| f.amps().to_vec()).unwrap_or(zero);
                        worst = worst.max(max_diff(&a, &b));
                    }
                    if r == 200.0 {
                        leak_200 = f64::max(leak_200, e.leak);
                    }
                }
            }
        }
        devs.push(worst);
    }
    let monotone = devs.windows(2).all(|w| w[1] < w[0]);
    let pass = monotone && devs[2] < 1e-2 && leak_200 < 1e-2;
    Ok(outcome(
        pass,
        format!(
            "max deviation at D/g = 50,100,200,400: {:.2e}, {:.2e}, {:.2e}, {:.2e}; leak at 200: {leak_200:.2e}",
            devs[0], devs[1], devs[2], devs[3]
        ),
    ))
}

fn criterion_6(ledger: &mut Ledger) -> Result<Outcome, String> {
    let cfg = named(1, SphereCaseName::V1);
    let r = ledger.run("stage1 V1", &cfg)?;
    let g = cfg.slits;
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let oracle = common::two_slit_pattern(&cfg.numerics.grid, h, h, g.x_top, g.x_bottom, g.sigma, cfg.t_prime);
    let d = r.pattern.l2_distance(&oracle).map_err(|e| e.to_string())?;
    Ok(outcome(d < 1e-6, format!("L2 distance to closed-form pattern {d:.2e} (need < 1e-6)")))
}

fn criterion_7(ledger: &mut Ledger) -> Result<Outcome, String> {
    let strong = ledger.run("stage2 V1 alpha=sqrt8", &named(2, SphereCaseName::V1))?;
    let mut cfg = named(2, SphereCaseName::V1);
    cfg.alpha = ComplexValue::real(1.0);
    let weak = ledger.run("stage2 V1 alpha=1", &cfg)?;
    let (vs, vw) = (strong.visibility.ok_or("undefined visibility")?, weak.visibility.ok_or("undefined visibility")?);
    Ok(outcome(
        vs <= 1e-3 && (vw - 0.135).abs() <= 0.03,
        format!("visibility {vs:.2e} at alpha=sqrt8 (need <= 1e-3), {vw:.4} at alpha=1 (need 0.135 +- 0.03)"),
    ))
}

fn criterion_8(ledger: &mut Ledger) -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for name in SphereCaseName::ALL {
        let reference = ledger.run(&format!("stage1 {name}"), &named(1, name))?;
        let mut cfg = named(2, name);
        cfg.readout = Readout::Quadrature { theta: FRAC_PI_2, chi: ChiChoice::Value(0.0) };
        let erased = ledger.run(&format!("stage2 {name} eraser"), &cfg)?;
        worst = worst.max(erased.pattern.l2_distance(&reference.pattern).map_err(|e| e.to_string())?);
    }
    Ok(outcome(worst < 1e-2, format!("max L2 distance to stage-1 pattern over 7 cases {worst:.2e} (need < 1e-2)")))
}

fn criterion_9() -> Result<Outcome, String> {
    let geom = SlitGeometry::default();
    let prep = PreparationParams::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0), 0.0)
        .map_err(|e| e.to_string())?;
    let s0 = build_initial(&prep, &geom, alpha8(), &GridSpec::default(), N_MAX).map_err(|e| e.to_string())?;
    let s = interact(&s0, &InteractionSetup::default()).map_err(|e| e.to_string())?;
    let weight = |chi: f64| -> Result<(f64, f64), String> {
        let spec = QuadratureSpec::new(0.0, chi).map_err(|e| e.to_string())?;
        let (rho, _) = condition_on_quadrature(&s, spec).map_err(|e| e.to_string())?;
        Ok(rho.path_weights(geom.midpoint()))
    };
    let top = weight(-8f64.sqrt())?.0;
    let bottom = weight(8f64.sqrt())?.1;
    Ok(outcome(
        top >= 0.999 && bottom >= 0.999,
        format!("top weight at chi=-sqrt8 {top:.6}, bottom weight at chi=+sqrt8 {bottom:.6} (need >= 0.999)"),
    ))
}

fn criterion_10() -> Result<Outcome, String> {
    let base = named(3, SphereCaseName::V1);
    let q = QGridSpec { nx: 5, ny: 5, ..Default::default() };
    let b = epsilon_sweep(&base, &[0.0, 5.0], Level::B, &q).map_err(|e| e.to_string())?;
    let c = epsilon_sweep(&base, &[0.0, 9.0], Level::C, &q).map_err(|e| e.to_string())?;
    let pass = b[1].overlap < 0.5 && (b[0].overlap - 1.0).abs() < 1e-9 && c[1].overlap > c[0].overlap;
    Ok(outcome(
        pass,
        format!(
            "level b overlap {:.4} -> {:.4} (eps 0 -> 5, need < 0.5); level c {:.2e} -> {:.4} (eps 0 -> 9, need increase)",
            b[0].overlap, b[1].overlap, c[0].overlap, c[1].overlap
        ),
    ))
}

fn criterion_11(ledger: &mut Ledger) -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    let mut undefined = Vec::new();
    let mut readouts = vec![("trace".to_string(), Readout::Trace)];
    for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
        readouts.push((
            format!("theta={theta:.4}"),
            Readout::Quadrature { theta, chi: ChiChoice::Keyword(ChiKeyword::MostProbable) },
        ));
    }
    for (label, readout) in readouts {
        let mut cfg = named(2, SphereCaseName::C1);
        cfg.readout = readout;
        let r = ledger.run(&format!("stage2 C1 {label}"), &cfg)?;
        match r.visibility {
            Some(v) => worst = worst.max(v),
            None => undefined.push(label),
        }
    }
    Ok(outcome(
        worst < 1e-3 && undefined.is_empty(),
        format!("max visibility {worst:.2e} over trace and 3 quadratures (need < 1e-3); undefined: {undefined:?}"),
    ))
}

fn criterion_12(ledger: &Ledger) -> Result<Outcome, String> {
    let mut trace_dev: f64 = 0.0;
    let mut purity_dev: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    for (_, r) in &ledger.runs {
        let d = &r.diagnostics;
        trace_dev = trace_dev.max((d.trace_after_flight - 1.0).abs());
        purity_dev = purity_dev.max((d.purity_after_flight - d.purity_before_flight).abs());
        norm_dev = norm_dev.max((r.pattern.integral() - 1.0).abs());
    }
    let mut asym: f64 = 0.0;
    for (label, r) in &ledger.runs {
        if label.starts_with("stage1 V1") || label.starts_with("stage2 V1 eraser") {
            let y = &r.pattern.intensity;
            let n = y.len();
            asym = asym.max((1..n / 2).map(|j| (y[n / 2 + j] - y[n / 2 - j]).abs()).fold(0.0, f64::max));
        }
    }
    Ok(outcome(
        trace_dev <= 1e-12 && purity_dev <= 1e-10 && norm_dev <= 1e-12 && asym <= 1e-8,
        format!(
            "{} runs: trace drift {trace_dev:.1e} (<= 1e-12), purity drift {purity_dev:.1e} (<= 1e-10), \
             pattern norm {norm_dev:.1e} (<= 1e-12), parity {asym:.1e} (<= 1e-8)",
            ledger.runs.len()
        ),
    ))
}

fn main() {
    let mut ledger = Ledger::default();
    let mut results: Vec<(u32, &str, Result<Outcome, String>)> = Vec::new();
    results.push((1, "phase-kick exactness", criterion_1()));
    results.push((2, "no-kick exactness", criterion_2()));
    results.push((3, "sum rule", criterion_3()));
    results.push((4, "dispersive unitarity", criterion_4()));
    results.push((5, "exact-vs-dispersive convergence", criterion_5()));
    results.push((6, "stage-1 oracle", criterion_6(&mut ledger)));
    results.push((7, "stage-2 which-path suppression", criterion_7(&mut ledger)));
    results.push((8, "eraser restoration", criterion_8(&mut ledger)));
    results.push((9, "which-path readout", criterion_9()));
    results.push((10, "epsilon trend", criterion_10()));
    results.push((11, "C0=1 robustness", criterion_11(&mut ledger)));
    results.push((12, "propagation invariants", criterion_12(&ledger)));

    let mut failed = 0;
    for (n, name, res) in &results {
        let (tag, detail) = match res {
            Ok(o) if o.pass => ("PASS", o.detail.clone()),
            Ok(o) => ("FAIL", o.detail.clone()),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {n:>2} [{tag}] {name}: {detail}");
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
