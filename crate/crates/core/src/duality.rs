//! Visibility, distinguishability and coherence of a two-path state, and the
//! named points on the sphere `V² + D² + C² = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityMetrics {
    #[serde(rename = "V0")]
    pub visibility: f64,
    #[serde(rename = "D0")]
    pub distinguishability: f64,
    #[serde(rename = "C0")]
    pub coherence: f64,
    /// `V² + D² + C² − 1`.
    pub residual: f64,
}

/// Metrics for path amplitudes `c_up`, `c_down` whose marker states overlap by `γ`.
pub fn metrics(c_up: C64, c_down: C64, gamma: C64) -> SimResult<DualityMetrics> {
    if !(c_up.norm_sqr() + c_down.norm_sqr()).is_finite() || !gamma.norm().is_finite() {
        return Err(SimError::InvalidInput("non-finite duality input".into()));
    }
    if (c_up.norm_sqr() + c_down.norm_sqr() - 1.0).abs() > 1e-12 {
        return Err(SimError::InvalidInput(format!(
            "|c_up|² + |c_down|² = {}, expected 1",
            c_up.norm_sqr() + c_down.norm_sqr()
        )));
    }
    let g = gamma.norm();
    if g > 1.0 + 1e-12 {
        return Err(SimError::InvalidInput(format!("|γ| = {g} exceeds 1")));
    }
    let g = g.min(1.0);
    let (pu, pd) = (c_up.norm_sqr(), c_down.norm_sqr());
    let product = 2.0 * c_up.norm() * c_down.norm();
    let visibility = product * g;
    let distinguishability = (pu - pd).abs();
    let coherence = product * (1.0 - g * g).sqrt();
    let residual = visibility.powi(2) + distinguishability.powi(2) + coherence.powi(2) - 1.0;
    Ok(DualityMetrics { visibility, distinguishability, coherence, residual })
}

/// Marker overlap for a Ramsey angle `φ`.
pub fn gamma_of_phi(phi: f64) -> f64 {
    phi.cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SphereCaseName {
    V1,
    VD,
    D1,
    DC,
    C1,
    CV,
    VDC,
}

impl SphereCaseName {
    pub const ALL: [SphereCaseName; 7] = [Self::V1, Self::VD, Self::D1, Self::DC, Self::C1, Self::CV, Self::VDC];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::V1 => "V1",
            Self::VD => "VD",
            Self::D1 => "D1",
            Self::DC => "DC",
            Self::C1 => "C1",
            Self::CV => "CV",
            Self::VDC => "VDC",
        }
    }
}

impl fmt::Display for SphereCaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for SphereCaseName {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SimError::UnknownCase(s.to_string()))
    }
}

/// Preparation `(c_up, c_down, φ)` for a named case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereCase {
    pub name: SphereCaseName,
    pub c_up: f64,
    pub c_down: f64,
    pub phi: f64,
}

impl SphereCase {
    pub fn metrics(&self) -> DualityMetrics {
        metrics(C64::new(self.c_up, 0.0), C64::new(self.c_down, 0.0), C64::new(gamma_of_phi(self.phi), 0.0))
            .expect("tabulated cases are normalized")
    }
}

pub fn sphere_case(name: SphereCaseName) -> SphereCase {
    let (c_up, c_down, phi) = match name {
        SphereCaseName::V1 => (FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0),
        SphereCaseName::VD => (FRAC_PI_8.cos(), FRAC_PI_8.sin(), 0.0),
        SphereCaseName::D1 => (1.0, 0.0, 0.0),
        SphereCaseName::DC => (FRAC_PI_8.cos(), FRAC_PI_8.sin(), FRAC_PI_2),
        SphereCaseName::C1 => (FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_PI_2),
        SphereCaseName::CV => (FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_PI_4),
        SphereCaseName::VDC => {
            // equal V, D and C: cos 2u = 1/√3
            let u = 0.5 * (1.0 / 3f64.sqrt()).acos();
            (u.cos(), u.sin(), FRAC_PI_4)
        }
    };
    SphereCase { name, c_up, c_down, phi }
}
