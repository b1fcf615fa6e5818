//! Atom–field interaction inside the double cavity.
//!
//! The quantum mode drives `|a⟩ ↔ |c⟩` with coupling `g cos(k_q x)` and the
//! classical field `ε` drives `|a⟩ ↔ |b⟩` with `g′ cos(k_c x)`. Two
//! evaluations are provided:
//!
//! * [`dispersive_row`]: the large-detuning maps, parameterized only by the
//!   dispersive phase `Θ = g²t/Δ`. Each Fock index `m` of the input level is
//!   mixed with one index of the other level by an exactly unitary 2×2 block.
//! * [`exact_row`]: the closed-form propagator elements for finite `Δ/g` and
//!   `g·t`. Population that ends up in `|a⟩` is reported as `leak`.
//!
//! All couplings are expressed in units of `g`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::fock::FieldState;

/// Default tolerance on amplitude pushed past the top Fock level.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Cosines below this magnitude are treated as an exact node.
const NODE_EPS: f64 = 1e-13;

/// Internal atomic level coupled by the fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    B,
    C,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::B => 0,
            Level::C => 1,
        }
    }

    pub fn other(self) -> Level {
        match self {
            Level::B => Level::C,
            Level::C => Level::B,
        }
    }

    pub const ALL: [Level; 2] = [Level::B, Level::C];
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::B => "b",
            Level::C => "c",
        })
    }
}

impl FromStr for Level {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "b" => Ok(Level::B),
            "c" => Ok(Level::C),
            other => Err(SimError::Config(format!("unknown level `{other}` (expected b or c)"))),
        }
    }
}

/// Physical parameters of one pass through the cavities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractionParams {
    /// Classical field amplitude.
    pub epsilon: C64,
    /// Dispersive phase `g²t/Δ` in radians.
    pub theta_int: f64,
    /// `g′/g`.
    pub g_ratio: f64,
    /// Quantum-field wavenumber in units of the classical one.
    pub k_q: f64,
    /// Classical-field wavenumber; positions are measured in `1/k_c`.
    pub k_c: f64,
    /// `Δ/g`, used only by the exact elements.
    pub detuning_ratio: f64,
    /// `g·t`, used only by the exact elements.
    pub coupling_time: f64,
}

impl Default for InteractionParams {
    fn default() -> Self {
        Self {
            epsilon: C64::new(0.0, 0.0),
            theta_int: PI,
            g_ratio: 1.0,
            k_q: 3.0,
            k_c: 1.0,
            detuning_ratio: 200.0,
            coupling_time: PI * 200.0,
        }
    }
}

impl InteractionParams {
    pub fn with_epsilon(mut self, epsilon: C64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Sets `Δ/g` and the matching `g·t = Θ·Δ/g`.
    pub fn with_detuning(mut self, detuning_ratio: f64) -> Self {
        self.detuning_ratio = detuning_ratio;
        self.coupling_time = self.theta_int * detuning_ratio;
        self
    }

    pub fn validate(&self) -> SimResult<()> {
        let finite = [
            self.epsilon.re,
            self.epsilon.im,
            self.theta_int,
            self.g_ratio,
            self.k_q,
            self.k_c,
            self.detuning_ratio,
            self.coupling_time,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(SimError::InvalidInput("interaction parameters must be finite".into()));
        }
        if self.theta_int <= 0.0 {
            return Err(SimError::InvalidInput(format!(
                "dispersive phase must be positive, got {}",
                self.theta_int
            )));
        }
        if self.k_c <= 0.0 || (self.k_q - 3.0 * self.k_c).abs() > 1e-12 * self.k_c {
            return Err(SimError::InvalidInput(format!(
                "wavenumbers must satisfy k_q = 3 k_c (got {}, {})",
                self.k_q, self.k_c
            )));
        }
        Ok(())
    }

    fn validate_exact(&self) -> SimResult<()> {
        self.validate()?;
        if self.detuning_ratio <= 0.0 || self.coupling_time <= 0.0 {
            return Err(SimError::InvalidInput(
                "exact elements need positive detuning_ratio and coupling_time".into(),
            ));
        }
        Ok(())
    }
}

/// Position-dependent couplings in units of `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingPair {
    /// `cos(k_q x)`.
    pub g1: f64,
    /// `(g′/g) cos(k_c x)`.
    pub g2: f64,
}

fn snap(v: f64) -> f64 {
    if v.abs() < NODE_EPS {
        0.0
    } else {
        v
    }
}

/// Couplings at `x` (in `1/k_c`), measured from the common antinode at `x = 0`.
pub fn coupling_at(x: f64, params: &InteractionParams) -> CouplingPair {
    CouplingPair {
        g1: snap((params.k_q * x).cos()),
        g2: params.g_ratio * snap((params.k_c * x).cos()),
    }
}

/// Classical and quantum weights `(A, B)` of the dispersive block fed by
/// `(level, m)`: `A = g₂²|ε|²`, `B = g₁²·(m+1)` for `b` and `g₁²·m` for `c`.
fn block_weights(m: usize, level: Level, cp: CouplingPair, eps: C64) -> (f64, f64) {
    let a = cp.g2 * cp.g2 * eps.norm_sqr();
    let photons = match level {
        Level::B => (m + 1) as f64,
        Level::C => m as f64,
    };
    (a, cp.g1 * cp.g1 * photons)
}

/// Dispersive phase `θ_m = (A + B)·Θ` accumulated by the block fed by
/// `(level, m)` at position `x`.
pub fn effective_hamiltonian_phase(m: usize, level: Level, x: f64, params: &InteractionParams) -> f64 {
    let (a, b) = block_weights(m, level, coupling_at(x, params), params.epsilon);
    (a + b) * params.theta_int
}

/// `e^{iθ} − 1` without cancellation at small `θ`.
fn expm1_i(theta: f64) -> C64 {
    let s = (0.5 * theta).sin();
    C64::new(-2.0 * s * s, theta.sin())
}

/// One output branch of a row: the field left in `level`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelBranch {
    pub level: Level,
    pub field: FieldState,
}

/// Branches produced from a single input level, with loss diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct RowOutput {
    pub branches: Vec<LevelBranch>,
    /// Weight that left the `{b, c}` manifold through `|a⟩` (exact only).
    pub leak: f64,
    /// Weight pushed past the top Fock level.
    pub truncation_loss: f64,
}

impl RowOutput {
    pub fn branch(&self, level: Level) -> Option<&FieldState> {
        self.branches.iter().find(|b| b.level == level).map(|b| &b.field)
    }

    pub fn total_norm_sqr(&self) -> f64 {
        self.branches.iter().map(|b| b.field.norm_sqr()).sum()
    }
}

/// Per-index map coefficients: `same[m]` stays in the input level at `|m⟩`,
/// `cross[m]` moves to the other level at `|m ± 1⟩`.
struct RowCoefficients {
    same: Vec<C64>,
    cross: Vec<C64>,
    leak: f64,
}

fn assemble(level: Level, field: &FieldState, coeffs: RowCoefficients, tail_tol: f64) -> SimResult<RowOutput> {
    let n = field.n_max();
    let amps = field.amps();
    let same: Vec<C64> = amps.iter().zip(&coeffs.same).map(|(c, k)| c * k).collect();
    let mut cross = vec![C64::new(0.0, 0.0); n];
    let mut truncation_loss = 0.0;
    for m in 0..n {
        let v = amps[m] * coeffs.cross[m];
        match level {
            // b, m → c, m + 1
            Level::B => {
                if m + 1 < n {
                    cross[m + 1] = v;
                } else {
                    truncation_loss += v.norm_sqr();
                }
            }
            // c, m → b, m − 1; the m = 0 coefficient carries √0
            Level::C => {
                if m > 0 {
                    cross[m - 1] = v;
                }
            }
        }
    }
    let norm_in = field.norm_sqr();
    if norm_in > 0.0 && truncation_loss > tail_tol * norm_in {
        return Err(SimError::Truncation { lost: truncation_loss / norm_in, tolerance: tail_tol });
    }
    let mut branches = Vec::with_capacity(2);
    if same.iter().any(|v| *v != C64::new(0.0, 0.0)) || cross.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        branches.push(LevelBranch { level, field: FieldState::new(same)? });
    }
    if cross.iter().any(|v| *v != C64::new(0.0, 0.0)) {
        branches.push(LevelBranch { level: level.other(), field: FieldState::new(cross)? });
    }
    Ok(RowOutput { branches, leak: coeffs.leak, truncation_loss })
}

/// Dispersive map of a field attached to `level_in` at position `x`.
///
/// For `level_in = b` the branches are `{b: Σ α_m^b |m⟩, c: Σ β_m^b |m+1⟩}`,
/// for `level_in = c` they are `{c: Σ α_m^c |m⟩, b: Σ β_m^c |m−1⟩}`, with
///
/// ```text
/// α^b_m = [1 + A (e^{iθ_m} − 1)/(A+B)] c_m     β^b_m = g₁g₂ ε  √(m+1) (e^{iθ_m} − 1)/(A+B) c_m
/// α^c_m = [1 + B (e^{iθ_m} − 1)/(A+B)] c_m     β^c_m = g₁g₂ ε* √m     (e^{iθ_m} − 1)/(A+B) c_m
/// ```
///
/// When `A + B = 0` the block is the identity. Branches with identically
/// zero amplitudes are omitted.
pub fn dispersive_row(
    level_in: Level,
    field_in: &FieldState,
    x: f64,
    params: &InteractionParams,
    tail_tol: f64,
) -> SimResult<RowOutput> {
    params.validate()?;
    let cp = coupling_at(x, params);
    let n = field_in.n_max();
    let mut same = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    let eps = match level_in {
        Level::B => params.epsilon,
        Level::C => params.epsilon.conj(),
    };
    for m in 0..n {
        let (a, b) = block_weights(m, level_in, cp, params.epsilon);
        let total = a + b;
        if total == 0.0 {
            same.push(C64::new(1.0, 0.0));
            cross.push(C64::new(0.0, 0.0));
            continue;
        }
        let ratio = expm1_i(total * params.theta_int) / total;
        let (kept, photons) = match level_in {
            Level::B => (a, (m + 1) as f64),
            Level::C => (b, m as f64),
        };
        same.push(C64::new(1.0, 0.0) + ratio * kept);
        cross.push(ratio * eps * (cp.g1 * cp.g2 * photons.sqrt()));
    }
    assemble(level_in, field_in, RowCoefficients { same, cross, leak: 0.0 }, tail_tol)
}

/// `Λ`, `μ`, `R`, `S` (and the barred `a†a`-ordered versions) for index `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorTerms {
    /// `g₂²|ε|² + g₁²(m+1)` (`a a†` ordering).
    pub lambda: f64,
    /// `g₂²|ε|² + g₁² m` (`a† a` ordering).
    pub lambda_bar: f64,
    pub mu: f64,
    pub mu_bar: f64,
    pub r: f64,
    pub r_bar: f64,
    pub s: f64,
    pub s_bar: f64,
}

impl PropagatorTerms {
    pub fn new(m: usize, cp: CouplingPair, params: &InteractionParams) -> Self {
        let delta = params.detuning_ratio;
        let t = params.coupling_time;
        let classical = cp.g2 * cp.g2 * params.epsilon.norm_sqr();
        let lambda = classical + cp.g1 * cp.g1 * (m + 1) as f64;
        let lambda_bar = classical + cp.g1 * cp.g1 * m as f64;
        let mu = lambda + 0.25 * delta * delta;
        let mu_bar = lambda_bar + 0.25 * delta * delta;
        let (r, s) = ((mu.sqrt() * t).cos(), (mu.sqrt() * t).sin() / mu.sqrt());
        let (r_bar, s_bar) = ((mu_bar.sqrt() * t).cos(), (mu_bar.sqrt() * t).sin() / mu_bar.sqrt());
        Self { lambda, lambda_bar, mu, mu_bar, r, r_bar, s, s_bar }
    }
}

/// `[e^{−iΔt/2}(R + iΔS/2) − 1] / Λ` for `μ = Λ + Δ²/4`, rearranged so small
/// `Λ` loses no precision. Returns `None` for `Λ = 0`.
fn bracket_over_lambda(lambda: f64, delta: f64, t: f64) -> Option<C64> {
    if lambda == 0.0 {
        return None;
    }
    let half = 0.5 * delta;
    let root = (lambda + half * half).sqrt();
    // √μ − Δ/2 without cancellation
    let shift = lambda / (root + half);
    let phase_part = expm1_i(shift * t) / lambda;
    let sine_part = C64::from_polar(1.0, -half * t) * C64::new(0.0, -(root * t).sin() / (root * (root + half)));
    Some(phase_part + sine_part)
}

/// Exact propagator elements applied to a field attached to `level_in`.
///
/// `b` input: `U_bb = 1 + g₂²|ε|² W/Λ`, `U_cb = g₁g₂ε a† W/Λ`; `c` input:
/// `U_cc = 1 + g₁² a†a W̄/Λ̄`, `U_bc = g₁g₂ε* W/Λ a`, with
/// `W = e^{−iΔt/2}(R + iΔS/2) − 1`. A vanishing `Λ` gives the identity.
pub fn exact_row(
    level_in: Level,
    field_in: &FieldState,
    x: f64,
    params: &InteractionParams,
    tail_tol: f64,
) -> SimResult<RowOutput> {
    params.validate_exact()?;
    let cp = coupling_at(x, params);
    let n = field_in.n_max();
    let delta = params.detuning_ratio;
    let t = params.coupling_time;
    let classical = cp.g2 * cp.g2 * params.epsilon.norm_sqr();
    let mut same = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    for m in 0..n {
        let terms = PropagatorTerms::new(m, cp, params);
        let (lam, kept, photons, eps) = match level_in {
            Level::B => (terms.lambda, classical, (m + 1) as f64, params.epsilon),
            Level::C => (terms.lambda_bar, cp.g1 * cp.g1 * m as f64, m as f64, params.epsilon.conj()),
        };
        match bracket_over_lambda(lam, delta, t) {
            None => {
                same.push(C64::new(1.0, 0.0));
                cross.push(C64::new(0.0, 0.0));
            }
            Some(w) => {
                same.push(C64::new(1.0, 0.0) + w * kept);
                cross.push(w * eps * (cp.g1 * cp.g2 * photons.sqrt()));
            }
        }
    }
    let mut out = assemble(level_in, field_in, RowCoefficients { same, cross, leak: 0.0 }, tail_tol)?;
    out.leak = (field_in.norm_sqr() - out.total_norm_sqr() - out.truncation_loss).max(0.0);
    Ok(out)
}
