//! Independent closed-form oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use duality_sim::interferometer::{Grid, GridSpec};
use duality_sim::propagation::ScreenPattern;

/// Freely evolved Gaussian under `i ψ_t = −ψ_xx`, starting from a packet whose
/// density has standard deviation `sigma` about `x0`.
pub fn free_gaussian(x: f64, x0: f64, sigma: f64, t: f64) -> C64 {
    let s2 = sigma * sigma;
    let w = C64::new(1.0, t / s2);
    let pre = (2.0 * PI * s2).powf(-0.25) / w.sqrt();
    pre * (-(x - x0) * (x - x0) / (4.0 * s2 * w)).exp()
}

/// Screen pattern of `c_up G_top + c_down G_bot` after free flight `t`,
/// sampled on `spec` and normalized like the simulator's output.
pub fn two_slit_pattern(spec: &GridSpec, c_up: C64, c_down: C64, x_top: f64, x_bottom: f64, sigma: f64, t: f64) -> ScreenPattern {
    let grid = Grid::new(spec).unwrap();
    let x_axis: Vec<f64> = grid.x().iter().map(|x| x / (2.0 * PI)).collect();
    let mut intensity: Vec<f64> = grid
        .x()
        .iter()
        .map(|&x| (c_up * free_gaussian(x, x_top, sigma, t) + c_down * free_gaussian(x, x_bottom, sigma, t)).norm_sqr())
        .collect();
    let step = grid.dx() / (2.0 * PI);
    let total: f64 = intensity.iter().sum::<f64>() * step;
    intensity.iter_mut().for_each(|v| *v /= total);
    ScreenPattern { x_axis, intensity }
}

/// `|⟨β|α⟩|² = exp(−|α − β|²)`.
pub fn coherent_overlap_sqr(alpha: C64, beta: C64) -> f64 {
    (-(alpha - beta).norm_sqr()).exp()
}

/// Relative L2 distance `‖a − b‖ / ‖b‖`.
pub fn relative_l2(a: &ScreenPattern, b: &ScreenPattern) -> f64 {
    let num: f64 = a.intensity.iter().zip(&b.intensity).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.intensity.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Index of the grid point closest to `x` (in `1/k′` units).
pub fn nearest_index(grid: &Grid, x: f64) -> usize {
    ((x - grid.x_min()) / grid.dx()).round() as usize
}
