//! Run configuration, read from JSON.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::duality::{sphere_case, SphereCaseName};
use crate::error::{SimError, SimResult};
use crate::evolution::{InteractionParams, DEFAULT_TAIL_TOLERANCE};
use crate::interferometer::{GridSpec, InteractionMode, KickModel, PreparationParams, SlitGeometry};
use crate::propagation::DEFAULT_VISIBILITY_WINDOW;

/// A complex number written either as a plain real or as `[re, im]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexValue(pub C64);

impl ComplexValue {
    pub fn real(re: f64) -> Self {
        Self(C64::new(re, 0.0))
    }
}

impl Serialize for ComplexValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Real(re) => Self(C64::new(re, 0.0)),
            Repr::Pair([re, im]) => Self(C64::new(re, im)),
        })
    }
}

/// A named sphere case or explicit preparation amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseSpec {
    Named(SphereCaseName),
    Explicit {
        c_up: ComplexValue,
        c_down: ComplexValue,
        phi: f64,
    },
}

impl CaseSpec {
    pub fn preparation(&self) -> SimResult<PreparationParams> {
        match *self {
            CaseSpec::Named(name) => {
                let c = sphere_case(name);
                PreparationParams::new(C64::new(c.c_up, 0.0), C64::new(c.c_down, 0.0), c.phi)
            }
            CaseSpec::Explicit { c_up, c_down, phi } => PreparationParams::new(c_up.0, c_down.0, phi),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CaseSpec::Named(name) => name.to_string(),
            CaseSpec::Explicit { .. } => "custom".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiKeyword {
    MostProbable,
}

/// Fixed outcome or the maximum of the outcome density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChiChoice {
    Value(f64),
    Keyword(ChiKeyword),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Readout {
    #[default]
    Trace,
    Quadrature {
        theta: f64,
        chi: ChiChoice,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub n_max: usize,
    pub grid: GridSpec,
    pub tail_tolerance: f64,
    /// Largest accepted population leaked to the excited level.
    pub leak_tolerance: f64,
    pub norm_tolerance: f64,
    pub purity_tolerance: f64,
    /// Width of the visibility window in `λ_CF`, centered on the slit midpoint.
    pub visibility_window: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_max: 96,
            grid: GridSpec::default(),
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            leak_tolerance: 1e-2,
            norm_tolerance: 1e-12,
            purity_tolerance: 1e-10,
            visibility_window: DEFAULT_VISIBILITY_WINDOW,
        }
    }
}

/// Rectangle of coherent amplitudes `β = x + iy` for the Husimi function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl Default for QGridSpec {
    fn default() -> Self {
        Self { x_min: -7.0, x_max: 7.0, nx: 141, y_min: -7.0, y_max: 7.0, ny: 141 }
    }
}

/// Samples of the quadrature outcome density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdfSpec {
    pub theta: f64,
    pub chi_min: f64,
    pub chi_max: f64,
    pub points: usize,
}

fn default_alpha() -> ComplexValue {
    ComplexValue::real(8f64.sqrt())
}

fn default_theta_int() -> f64 {
    PI
}

fn default_t_prime() -> f64 {
    3.0
}

fn default_g_ratio() -> f64 {
    1.0
}

fn default_detuning() -> f64 {
    200.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub stage: u8,
    pub case: CaseSpec,
    #[serde(default = "default_alpha")]
    pub alpha: ComplexValue,
    #[serde(default)]
    pub epsilon: ComplexValue,
    #[serde(default = "default_theta_int")]
    pub theta_int: f64,
    /// `g₂/g₁`.
    #[serde(default = "default_g_ratio")]
    pub g_ratio: f64,
    /// `Δ/g` for the exact mode; the coupling time follows as `Θ Δ/g`.
    #[serde(default = "default_detuning")]
    pub detuning_ratio: f64,
    #[serde(default)]
    pub mode: InteractionMode,
    #[serde(default)]
    pub kick: KickModel,
    #[serde(default)]
    pub readout: Readout,
    #[serde(default = "default_t_prime")]
    pub t_prime: f64,
    /// Additional flight times whose patterns are written alongside.
    #[serde(default)]
    pub extra_t_primes: Vec<f64>,
    #[serde(default)]
    pub slits: SlitGeometry,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub q_grid: Option<QGridSpec>,
    #[serde(default)]
    pub pdf: Option<PdfSpec>,
}

impl ExperimentConfig {
    /// Defaults for `stage` and `case`.
    pub fn new(stage: u8, case: CaseSpec) -> Self {
        Self {
            stage,
            case,
            alpha: default_alpha(),
            epsilon: ComplexValue::default(),
            theta_int: default_theta_int(),
            g_ratio: default_g_ratio(),
            detuning_ratio: default_detuning(),
            mode: InteractionMode::default(),
            kick: KickModel::default(),
            readout: Readout::default(),
            t_prime: default_t_prime(),
            extra_t_primes: Vec::new(),
            slits: SlitGeometry::default(),
            numerics: Numerics::default(),
            q_grid: None,
            pdf: None,
        }
    }

    pub fn from_json(text: &str) -> SimResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> SimResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> SimResult<()> {
        if !(1..=3).contains(&self.stage) {
            return Err(SimError::Config(format!("stage must be 1, 2 or 3, got {}", self.stage)));
        }
        if self.stage == 2 && self.epsilon.0 != C64::new(0.0, 0.0) {
            return Err(SimError::Config("stage 2 has no classical field; epsilon must be 0".into()));
        }
        if self.numerics.n_max < 2 {
            return Err(SimError::Config("n_max must be at least 2".into()));
        }
        if !(self.numerics.visibility_window > 0.0) {
            return Err(SimError::Config("visibility window must be positive".into()));
        }
        for t in std::iter::once(&self.t_prime).chain(&self.extra_t_primes) {
            if !(*t >= 0.0) || !t.is_finite() {
                return Err(SimError::Config(format!("flight time must be non-negative, got {t}")));
            }
        }
        if let Readout::Quadrature { theta, chi } = self.readout {
            if !theta.is_finite() || matches!(chi, ChiChoice::Value(v) if !v.is_finite()) {
                return Err(SimError::Config("quadrature readout needs finite theta and chi".into()));
            }
        }
        if let Some(q) = &self.q_grid {
            if q.nx < 2 || q.ny < 2 || !(q.x_max > q.x_min) || !(q.y_max > q.y_min) {
                return Err(SimError::Config(format!("invalid q_grid {q:?}")));
            }
        }
        if let Some(p) = &self.pdf {
            if p.points < 2 || !(p.chi_max > p.chi_min) || !p.theta.is_finite() {
                return Err(SimError::Config(format!("invalid pdf sampling {p:?}")));
            }
        }
        self.slits.validate()?;
        self.case.preparation()?;
        self.interaction_params().validate()?;
        Ok(())
    }

    /// Interaction parameters with the stage rules applied.
    pub fn interaction_params(&self) -> InteractionParams {
        let epsilon = if self.stage == 3 { self.epsilon.0 } else { C64::new(0.0, 0.0) };
        InteractionParams { epsilon, theta_int: self.theta_int, g_ratio: self.g_ratio, ..Default::default() }
            .with_detuning(self.detuning_ratio)
    }

    /// The field amplitude actually used: stage 1 carries no quantized field.
    pub fn effective_alpha(&self) -> C64 {
        if self.stage == 1 {
            C64::new(0.0, 0.0)
        } else {
            self.alpha.0
        }
    }
}
