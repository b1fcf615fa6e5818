//! Free flight from the cavities to the screen and the observables read
//! off the screen.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::interferometer::AtomDensity;

/// Coefficient of `k²t′` in the free-flight phase when `t′` is measured in
/// `2m/ħk′²` and positions in `1/k′`.
pub const DISPERSION: f64 = 1.0;

/// The outer `1/BOUNDARY_FRACTION` of the grid on each side (and of the
/// wavenumber range) is the aliasing guard band.
pub const BOUNDARY_FRACTION: usize = 64;

/// Largest probability tolerated in the guard bands.
pub const ALIASING_TOLERANCE: f64 = 1e-6;

/// Default visibility window width in units of `λ_CF`.
pub const DEFAULT_VISIBILITY_WINDOW: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlightSpec {
    pub t_prime: f64,
}

impl FlightSpec {
    pub fn new(t_prime: f64) -> SimResult<Self> {
        if !(t_prime >= 0.0) || !t_prime.is_finite() {
            return Err(SimError::InvalidInput(format!("flight time must be non-negative, got {t_prime}")));
        }
        Ok(Self { t_prime })
    }
}

fn band(n: usize) -> usize {
    (n / BOUNDARY_FRACTION).max(1)
}

/// Probability in the outer guard bands of the position grid.
pub fn boundary_probability(rho: &AtomDensity) -> f64 {
    let d = rho.diagonal();
    let n = rho.grid().len();
    let b = band(n);
    let edge: f64 = (0..b).chain(n - b..n).map(|i| d[[0, i]] + d[[1, i]]).sum();
    edge * rho.grid().dx() / rho.trace()
}

/// `ρ(t′) = U ρ U†` with `U = exp(−i DISPERSION k² t′)` applied spectrally to
/// every component of every level block.
pub fn free_propagate(rho: &AtomDensity, flight: &FlightSpec) -> SimResult<AtomDensity> {
    FlightSpec::new(flight.t_prime)?;
    if flight.t_prime == 0.0 {
        return Ok(rho.clone());
    }
    let grid = rho.grid();
    let n = grid.len();
    let kernel: Vec<C64> = grid
        .wavenumbers()
        .iter()
        .map(|k| C64::from_polar(1.0, -DISPERSION * k * k * flight.t_prime))
        .collect();
    // guard band in wavenumber: the |k| closest to Nyquist
    let b = band(n);
    let half = n / 2;
    let k_edge = |j: usize| j + b > half && j < half + b;

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut k_edge_weight = 0.0;
    let mut k_total = 0.0;
    let mut out = Vec::with_capacity(rho.components().len());
    for comp in rho.components() {
        let mut next = Array2::zeros((2, n));
        for s in 0..2 {
            let row = comp.row(s);
            if row.iter().all(|a| a.re == 0.0 && a.im == 0.0) {
                continue;
            }
            buf.iter_mut().zip(row.iter()).for_each(|(d, a)| *d = *a);
            fwd.process(&mut buf);
            for (j, (v, w)) in buf.iter_mut().zip(&kernel).enumerate() {
                let p = v.norm_sqr();
                k_total += p;
                if k_edge(j) {
                    k_edge_weight += p;
                }
                *v *= w;
            }
            inv.process(&mut buf);
            let scale = 1.0 / n as f64;
            next.row_mut(s).iter_mut().zip(&buf).for_each(|(d, a)| *d = a * scale);
        }
        out.push(next);
    }
    if k_total > 0.0 && k_edge_weight / k_total > ALIASING_TOLERANCE {
        return Err(SimError::Grid(format!(
            "momentum content {:.3e} near the Nyquist limit; refine the grid",
            k_edge_weight / k_total
        )));
    }
    let evolved = AtomDensity::from_raw(grid.clone(), out);
    let edge = boundary_probability(&evolved);
    if edge > ALIASING_TOLERANCE {
        return Err(SimError::Grid(format!(
            "probability {edge:.3e} reached the grid boundary; widen the grid"
        )));
    }
    Ok(evolved)
}

/// Screen intensity against `x′` in units of `λ_CF`, with `Σ I Δx′ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenPattern {
    pub x_axis: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl ScreenPattern {
    pub fn step(&self) -> f64 {
        self.x_axis[1] - self.x_axis[0]
    }

    pub fn integral(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.step()
    }

    /// Center of the sampled range.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.x_axis[0] + self.x_axis[self.x_axis.len() - 1])
    }

    /// `√(Σ (I − J)² Δx′)` on a shared axis.
    pub fn l2_distance(&self, other: &ScreenPattern) -> SimResult<f64> {
        if self.x_axis.len() != other.x_axis.len()
            || self.x_axis.iter().zip(&other.x_axis).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs()))
        {
            return Err(SimError::Grid("patterns are sampled on different axes".into()));
        }
        let s: f64 = self.intensity.iter().zip(&other.intensity).map(|(a, b)| (a - b).powi(2)).sum();
        Ok((s * self.step()).sqrt())
    }

    pub fn write_csv(&self, path: &Path) -> SimResult<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "x_lambda,intensity")?;
        for (x, i) in self.x_axis.iter().zip(&self.intensity) {
            writeln!(w, "{x:.8e},{i:.8e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn screen_distribution(rho: &AtomDensity) -> ScreenPattern {
    let d = rho.diagonal();
    let grid = rho.grid();
    let x_axis: Vec<f64> = grid.x().iter().map(|x| x / (2.0 * PI)).collect();
    let mut intensity: Vec<f64> = (0..grid.len()).map(|i| d[[0, i]] + d[[1, i]]).collect();
    let step = grid.dx() / (2.0 * PI);
    let total: f64 = intensity.iter().sum::<f64>() * step;
    if total > 0.0 {
        intensity.iter_mut().for_each(|v| *v /= total);
    }
    ScreenPattern { x_axis, intensity }
}

/// `[center − width/2, center + width/2]`.
pub fn central_window(center: f64, width: f64) -> (f64, f64) {
    (center - 0.5 * width, center + 0.5 * width)
}

/// Mean of `(I_a − I_b)/(I_a + I_b)` over adjacent strict interior extrema
/// inside `window`.
///
/// A single extremum is a lone lobe and yields 0. No extremum at all is
/// reported as undefined.
pub fn fringe_visibility(pattern: &ScreenPattern, window: (f64, f64)) -> SimResult<f64> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(SimError::InvalidInput(format!("empty visibility window [{lo}, {hi}]")));
    }
    let y = &pattern.intensity;
    let extrema: Vec<f64> = (1..y.len().saturating_sub(1))
        .filter(|&i| pattern.x_axis[i] >= lo && pattern.x_axis[i] <= hi)
        .filter(|&i| (y[i] > y[i - 1] && y[i] > y[i + 1]) || (y[i] < y[i - 1] && y[i] < y[i + 1]))
        .map(|i| y[i])
        .collect();
    match extrema.len() {
        0 => Err(SimError::UndefinedVisibility(format!("no interior extrema in [{lo}, {hi}]"))),
        1 => Ok(0.0),
        k => {
            let sum: f64 = extrema
                .windows(2)
                .map(|p| {
                    let s = p[0] + p[1];
                    if s > 0.0 {
                        (p[0] - p[1]).abs() / s
                    } else {
                        0.0
                    }
                })
                .sum();
            Ok((sum / (k - 1) as f64).clamp(0.0, 1.0))
        }
    }
}
