//! End-to-end runs: prepare, interact, read out, fly, and measure.

pub mod config;
pub mod output;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::duality::{gamma_of_phi, metrics, DualityMetrics, SphereCaseName};
use crate::error::{SimError, SimResult};
use crate::evolution::Level;
use crate::fock::{coherent_state, husimi_q, linspace, quadrature_projector, FieldDensity, QGrid, QuadratureSpec};
use crate::interferometer::{
    build_initial, condition_on_quadrature, field_density, field_density_unnormalized, interact, trace_out_field,
    AtomDensity, InteractionMode, InteractionSetup, JointState, PreparationParams,
};
use crate::propagation::{
    boundary_probability, central_window, fringe_visibility, free_propagate, screen_distribution, FlightSpec,
    ScreenPattern,
};

pub use config::{
    CaseSpec, ChiChoice, ChiKeyword, ComplexValue, ExperimentConfig, Numerics, PdfSpec, QGridSpec, Readout,
};

/// Search interval for the most probable quadrature outcome.
pub const CHI_SEARCH_RANGE: (f64, f64) = (-7.0, 7.0);
const CHI_COARSE_POINTS: usize = 281;
const GOLDEN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadoutRecord {
    pub theta: f64,
    pub chi: f64,
    /// Outcome probability density at `chi`.
    pub density: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub initial_norm: f64,
    pub interacted_norm: f64,
    pub leak: f64,
    pub truncation_loss: f64,
    /// `(top, bottom)` path weights of the interacted joint state.
    pub path_weights: (f64, f64),
    pub readout: Option<ReadoutRecord>,
    pub purity_before_flight: f64,
    pub purity_after_flight: f64,
    pub trace_after_flight: f64,
    pub boundary_probability: f64,
    /// Why the visibility is absent, if it is.
    pub visibility_note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePdf {
    pub theta: f64,
    pub chi: Vec<f64>,
    pub density: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub pattern: ScreenPattern,
    /// Patterns at the additional flight times, in config order.
    pub extra_patterns: Vec<(f64, ScreenPattern)>,
    pub visibility: Option<f64>,
    pub metrics: DualityMetrics,
    pub qgrid: Option<QGrid>,
    pub pdf: Option<QuadraturePdf>,
    pub diagnostics: RunDiagnostics,
}

/// The joint state right after the cavities, before any readout.
pub fn prepare_and_interact(cfg: &ExperimentConfig) -> SimResult<(JointState, PreparationParams)> {
    cfg.validate()?;
    let prep = cfg.case.preparation()?;
    let state = build_initial(&prep, &cfg.slits, cfg.effective_alpha(), &cfg.numerics.grid, cfg.numerics.n_max)?;
    if cfg.stage == 1 {
        return Ok((state, prep));
    }
    let setup = InteractionSetup {
        params: cfg.interaction_params(),
        mode: cfg.mode,
        kick: cfg.kick,
        tail_tolerance: cfg.numerics.tail_tolerance,
    };
    Ok((interact(&state, &setup)?, prep))
}

/// Maximizer of the outcome density `⟨χ_θ|ρ_field|χ_θ⟩` over
/// [`CHI_SEARCH_RANGE`]: a coarse scan picks the bracket, golden-section
/// search refines it.
pub fn most_probable_chi(rho: &FieldDensity, theta: f64) -> SimResult<f64> {
    let n = rho.n_max();
    let pdf = |chi: f64| -> SimResult<f64> {
        rho.expectation_in(&quadrature_projector(QuadratureSpec::new(theta, chi)?, n)?)
    };
    let grid = linspace(CHI_SEARCH_RANGE.0, CHI_SEARCH_RANGE.1, CHI_COARSE_POINTS);
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &c) in grid.iter().enumerate() {
        let v = pdf(c)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let (mut a, mut b) = (grid[best.0.saturating_sub(1)], grid[(best.0 + 1).min(grid.len() - 1)]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (pdf(c)?, pdf(d)?);
    while (b - a).abs() > GOLDEN_TOLERANCE {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = pdf(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = pdf(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Atomic state after the chosen readout.
pub fn read_out(state: &JointState, readout: &Readout) -> SimResult<(AtomDensity, Option<ReadoutRecord>)> {
    match *readout {
        Readout::Trace => Ok((trace_out_field(state)?, None)),
        Readout::Quadrature { theta, chi } => {
            let chi = match chi {
                ChiChoice::Value(v) => v,
                ChiChoice::Keyword(ChiKeyword::MostProbable) => most_probable_chi(&field_density(state)?, theta)?,
            };
            let (rho, density) = condition_on_quadrature(state, QuadratureSpec::new(theta, chi)?)?;
            Ok((rho, Some(ReadoutRecord { theta, chi, density })))
        }
    }
}

fn check(label: &str, deviation: f64, tolerance: f64) -> SimResult<()> {
    if deviation.abs() > tolerance || deviation.is_nan() {
        return Err(SimError::Tolerance(format!("{label}: deviation {deviation:.3e} exceeds {tolerance:.1e}")));
    }
    Ok(())
}

pub fn run(cfg: &ExperimentConfig) -> SimResult<RunResult> {
    let num = &cfg.numerics;
    let (state, prep) = prepare_and_interact(cfg)?;
    let d = state.diagnostics();
    let initial_norm = {
        let coh = coherent_state(cfg.effective_alpha(), num.n_max)?;
        coh.norm_sqr()
    };
    let interacted_norm = state.norm_sqr();
    check("norm through interaction", interacted_norm + d.leak + d.truncation_loss - initial_norm, num.norm_tolerance.max(1e-10))?;
    if cfg.mode == InteractionMode::Dispersive {
        check("dispersive norm", interacted_norm + d.truncation_loss - initial_norm, num.norm_tolerance.max(1e-10))?;
    } else if d.leak > num.leak_tolerance {
        return Err(SimError::Tolerance(format!(
            "excited-level leak {:.3e} exceeds {:.1e}",
            d.leak, num.leak_tolerance
        )));
    }

    let (rho, readout) = read_out(&state, &cfg.readout)?;
    let purity_before = rho.purity();
    let flown = free_propagate(&rho, &FlightSpec::new(cfg.t_prime)?)?;
    let trace_after = flown.trace();
    let purity_after = flown.purity();
    check("trace after flight", trace_after - 1.0, num.norm_tolerance)?;
    check("purity after flight", purity_after - purity_before, num.purity_tolerance)?;

    let pattern = screen_distribution(&flown);
    let mid = cfg.slits.midpoint() / (2.0 * std::f64::consts::PI);
    let (visibility, visibility_note) =
        match fringe_visibility(&pattern, central_window(mid, num.visibility_window)) {
            Ok(v) => (Some(v), None),
            Err(SimError::UndefinedVisibility(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        };

    let extra_patterns = cfg
        .extra_t_primes
        .iter()
        .map(|&t| Ok((t, screen_distribution(&free_propagate(&rho, &FlightSpec::new(t)?)?))))
        .collect::<SimResult<Vec<_>>>()?;

    let metrics = metrics(prep.c_up(), prep.c_down(), C64::new(gamma_of_phi(prep.phi()), 0.0))?;

    let needs_field = cfg.q_grid.is_some() || cfg.pdf.is_some();
    let field = if needs_field { Some(FieldDensity::from_matrix(field_density_unnormalized(&state))?) } else { None };
    let qgrid = match (&cfg.q_grid, &field) {
        (Some(q), Some(f)) => Some(husimi_q(
            &f.normalized()?,
            &linspace(q.x_min, q.x_max, q.nx),
            &linspace(q.y_min, q.y_max, q.ny),
        )?),
        _ => None,
    };
    let pdf = match (&cfg.pdf, &field) {
        (Some(p), Some(f)) => {
            let chi = linspace(p.chi_min, p.chi_max, p.points);
            let f = f.normalized()?;
            let density = chi
                .iter()
                .map(|&c| Ok(f.expectation_in(&quadrature_projector(QuadratureSpec::new(p.theta, c)?, num.n_max)?)?.max(0.0)))
                .collect::<SimResult<Vec<_>>>()?;
            Some(QuadraturePdf { theta: p.theta, chi, density })
        }
        _ => None,
    };

    Ok(RunResult {
        config: cfg.clone(),
        pattern,
        extra_patterns,
        visibility,
        metrics,
        qgrid,
        pdf,
        diagnostics: RunDiagnostics {
            initial_norm,
            interacted_norm,
            leak: d.leak,
            truncation_loss: d.truncation_loss,
            path_weights: state.path_weights(),
            readout,
            purity_before_flight: purity_before,
            purity_after_flight: purity_after,
            trace_after_flight: trace_after,
            boundary_probability: boundary_probability(&flown),
            visibility_note,
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub qgrid: QGrid,
    /// `⟨α|ρ_field|α⟩` after the interaction.
    pub overlap: f64,
}

/// Field response to the classical-field strength for an atom sent only
/// through the top slit in `level`.
pub fn epsilon_sweep(
    base: &ExperimentConfig,
    epsilons: &[f64],
    level: Level,
    q_grid: &QGridSpec,
) -> SimResult<Vec<SweepPoint>> {
    let phi = match level {
        Level::B => std::f64::consts::FRAC_PI_2,
        Level::C => 0.0,
    };
    let coh = coherent_state(base.alpha.0, base.numerics.n_max)?;
    epsilons
        .iter()
        .map(|&eps| {
            let mut cfg = base.clone();
            cfg.stage = 3;
            cfg.case = CaseSpec::Explicit { c_up: ComplexValue::real(1.0), c_down: ComplexValue::real(0.0), phi };
            cfg.epsilon = ComplexValue::real(eps);
            let (state, _) = prepare_and_interact(&cfg)?;
            let rho = field_density(&state)?;
            let qgrid = husimi_q(
                &rho,
                &linspace(q_grid.x_min, q_grid.x_max, q_grid.nx),
                &linspace(q_grid.y_min, q_grid.y_max, q_grid.ny),
            )?;
            Ok(SweepPoint { epsilon: eps, qgrid, overlap: rho.expectation_in(&coh)? })
        })
        .collect()
}

/// Runs all seven named cases with the numerics and readout of `base`.
pub fn sphere_suite(base: &ExperimentConfig) -> SimResult<Vec<(SphereCaseName, RunResult)>> {
    SphereCaseName::ALL
        .into_iter()
        .map(|name| {
            let mut cfg = base.clone();
            cfg.case = CaseSpec::Named(name);
            run(&cfg).map(|r| (name, r))
        })
        .collect()
}
