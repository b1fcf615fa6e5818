//! Truncated Fock-space primitives for the single cavity mode.
//!
//! States live in the span of `|0⟩ … |n_max − 1⟩`. Quadratures follow the
//! half-amplitude convention `X_θ = (a e^{−iθ} + a† e^{iθ}) / 2`, so a
//! coherent state `|α⟩` has `⟨X_θ⟩ = Re(α e^{−iθ})` and `X_0`, `X_{π/2}` read
//! off the real and imaginary parts of `α` directly.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{SimError, SimResult};

/// Rescaling threshold for the Hermite-function recurrence.
const HERMITE_RESCALE: f64 = 1e150;

/// Complex amplitudes over the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    amps: Vec<C64>,
}

impl FieldState {
    pub fn new(amps: Vec<C64>) -> SimResult<Self> {
        if amps.is_empty() {
            return Err(SimError::InvalidInput("field state needs n_max >= 1".into()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(SimError::InvalidInput("field amplitudes must be finite".into()));
        }
        Ok(Self { amps })
    }

    pub fn vacuum(n_max: usize) -> SimResult<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); n_max];
        if let Some(a) = amps.first_mut() {
            *a = C64::new(1.0, 0.0);
        }
        Self::new(amps)
    }

    pub fn n_max(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> SimResult<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(SimError::InvalidInput("cannot normalize a zero field state".into()));
        }
        Ok(Self { amps: self.amps.iter().map(|a| a / n).collect() })
    }

    /// `Σ m |amps[m]|²`.
    pub fn mean_photon_number(&self) -> f64 {
        self.amps.iter().enumerate().map(|(m, a)| m as f64 * a.norm_sqr()).sum()
    }

    /// `⟨ψ|op|ψ⟩` for an operator given as a dense matrix in the same basis.
    pub fn expectation(&self, op: &Array2<C64>) -> SimResult<C64> {
        let n = self.n_max();
        if op.dim() != (n, n) {
            return Err(SimError::InvalidInput(format!(
                "operator is {:?}, state has n_max = {n}",
                op.dim()
            )));
        }
        let applied = apply(op, &self.amps);
        Ok(self.amps.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`.
    pub fn fidelity(&self, other: &FieldState) -> SimResult<f64> {
        let ov = overlap(self, other)?;
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Err(SimError::InvalidInput("fidelity with a zero state".into()));
        }
        Ok(ov.norm_sqr() / denom)
    }
}

fn apply(op: &Array2<C64>, v: &[C64]) -> Vec<C64> {
    op.rows()
        .into_iter()
        .map(|row| row.iter().zip(v).map(|(o, x)| o * x).sum())
        .collect()
}

/// Coherent state `e^{−|α|²/2} Σ α^m/√(m!) |m⟩`, truncated without renormalizing.
pub fn coherent_state(alpha: C64, n_max: usize) -> SimResult<FieldState> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(SimError::InvalidInput(format!("coherent amplitude {alpha} is not finite")));
    }
    if n_max == 0 {
        return Err(SimError::InvalidInput("n_max must be at least 1".into()));
    }
    let mut amps = Vec::with_capacity(n_max);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for m in 1..n_max {
        c = c * alpha / (m as f64).sqrt();
        amps.push(c);
    }
    FieldState::new(amps)
}

/// Angle and eigenvalue of a quadrature measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    theta: f64,
    chi: f64,
}

impl QuadratureSpec {
    /// `theta` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, chi: f64) -> SimResult<Self> {
        if !theta.is_finite() || !chi.is_finite() {
            return Err(SimError::NumericRange(format!(
                "quadrature angle {theta} / eigenvalue {chi} must be finite"
            )));
        }
        let mut theta = theta.rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        Ok(Self { theta, chi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }
}

/// Dense matrix of `X_θ` in the truncated basis.
///
/// `⟨n|X_θ|m⟩ = (√m e^{−iθ} δ_{n,m−1} + √n e^{iθ} δ_{n,m+1}) / 2`; the lower
/// diagonal is written as the exact conjugate of the upper one.
pub fn quadrature_operator(theta: f64, n_max: usize) -> Array2<C64> {
    let mut op = Array2::zeros((n_max, n_max));
    let down = C64::from_polar(0.5, -theta);
    for n in 0..n_max.saturating_sub(1) {
        let upper = down * ((n + 1) as f64).sqrt();
        op[[n, n + 1]] = upper;
        op[[n + 1, n]] = upper.conj();
    }
    op
}

/// Normalized Hermite functions `H_n(z)/√(2^n n!)` for `n < n_max`, scaled by
/// `e^{−log_scale}`. The three-term recurrence is rescaled whenever a value
/// exceeds `HERMITE_RESCALE`, so large `n` and `|z|` never overflow.
fn hermite_functions(z: f64, n_max: usize) -> SimResult<(Vec<f64>, f64)> {
    if !z.is_finite() || z.abs() > 1e100 {
        return Err(SimError::NumericRange(format!("Hermite argument {z} out of range")));
    }
    let mut h = vec![0.0; n_max];
    let mut log_scale = 0.0;
    h[0] = 1.0;
    if n_max > 1 {
        h[1] = std::f64::consts::SQRT_2 * z;
    }
    for n in 1..n_max.saturating_sub(1) {
        let nf = n as f64;
        h[n + 1] = (2.0 / (nf + 1.0)).sqrt() * z * h[n] - (nf / (nf + 1.0)).sqrt() * h[n - 1];
        if h[n + 1].abs() > HERMITE_RESCALE {
            for v in h.iter_mut().take(n + 2) {
                *v /= HERMITE_RESCALE;
            }
            log_scale += HERMITE_RESCALE.ln();
        }
        if !h[n + 1].is_finite() {
            return Err(SimError::NumericRange(format!(
                "Hermite recurrence overflowed at n = {} for z = {z}",
                n + 1
            )));
        }
    }
    Ok((h, log_scale))
}

/// Fock amplitudes `⟨n|χ_θ⟩` of the quadrature eigenstate in continuum
/// normalization (`⟨χ|χ'⟩ = δ(χ − χ')`), so `|⟨χ_θ|ψ⟩|²` is a probability
/// density in `χ`.
///
/// `⟨n|χ_θ⟩ = e^{inθ} (2/π)^{1/4} e^{−χ²} H_n(√2 χ) / √(2^n n!)`.
pub fn quadrature_projector(spec: QuadratureSpec, n_max: usize) -> SimResult<FieldState> {
    if n_max == 0 {
        return Err(SimError::InvalidInput("n_max must be at least 1".into()));
    }
    let z = std::f64::consts::SQRT_2 * spec.chi;
    let (h, log_scale) = hermite_functions(z, n_max)?;
    let prefactor = (0.25 * (2.0 / PI).ln() - spec.chi * spec.chi + log_scale).exp();
    if !prefactor.is_finite() {
        return Err(SimError::NumericRange(format!(
            "quadrature eigenvalue {} overflows the projector normalization",
            spec.chi
        )));
    }
    let amps = h
        .iter()
        .enumerate()
        .map(|(n, &hn)| C64::from_polar(prefactor * hn, spec.theta * n as f64))
        .collect();
    FieldState::new(amps)
}

/// Quadrature eigenstate normalized to one inside the truncated space.
///
/// Valid for any finite `χ`: the recurrence rescales itself, and the
/// normalization is taken after dropping the Gaussian prefactor.
pub fn quadrature_eigenstate(spec: QuadratureSpec, n_max: usize) -> SimResult<FieldState> {
    if n_max == 0 {
        return Err(SimError::InvalidInput("n_max must be at least 1".into()));
    }
    let (h, _) = hermite_functions(std::f64::consts::SQRT_2 * spec.chi, n_max)?;
    let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    let amps = h
        .iter()
        .enumerate()
        .map(|(n, &hn)| C64::from_polar(hn / norm, spec.theta * n as f64))
        .collect();
    FieldState::new(amps)
}

/// `Σ conj(a_m) b_m`.
pub fn overlap(a: &FieldState, b: &FieldState) -> SimResult<C64> {
    if a.n_max() != b.n_max() {
        return Err(SimError::InvalidInput(format!(
            "n_max mismatch: {} vs {}",
            a.n_max(),
            b.n_max()
        )));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Density operator of the cavity mode.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDensity {
    matrix: Array2<C64>,
}

impl FieldDensity {
    pub fn from_matrix(matrix: Array2<C64>) -> SimResult<Self> {
        let (r, c) = matrix.dim();
        if r != c || r == 0 {
            return Err(SimError::InvalidInput(format!("density matrix must be square, got {r}x{c}")));
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &FieldState) -> Self {
        let n = state.n_max();
        let a = state.amps();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| a[i] * a[j].conj());
        Self { matrix }
    }

    pub fn n_max(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|d| d.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> SimResult<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(SimError::InvalidInput("field density has zero trace".into()));
        }
        Ok(Self { matrix: self.matrix.mapv(|v| v / tr) })
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_in(&self, state: &FieldState) -> SimResult<f64> {
        if state.n_max() != self.n_max() {
            return Err(SimError::InvalidInput("n_max mismatch".into()));
        }
        let applied = apply(&self.matrix, state.amps());
        Ok(state.amps().iter().zip(&applied).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }
}

/// Husimi Q function sampled on a rectangular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct QGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    /// `values[[i, j]]` at `β = x_axis[i] + i·y_axis[j]`.
    pub values: Array2<f64>,
}

impl QGrid {
    /// Index and coordinates of the largest sample.
    pub fn argmax(&self) -> (usize, usize, f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for ((i, j), &v) in self.values.indexed_iter() {
            if v > best.2 {
                best = (i, j, v);
            }
        }
        (best.0, best.1, self.x_axis[best.0], self.y_axis[best.1])
    }

    /// `Σ values Δx Δy`, which approximates `Tr ρ` on a covering grid.
    pub fn integral(&self) -> f64 {
        let dx = axis_step(&self.x_axis);
        let dy = axis_step(&self.y_axis);
        self.values.sum() * dx * dy
    }

    /// CSV: header row holds the y axis, first column the x axis, nine
    /// significant digits throughout.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "x\\y")?;
        for y in &self.y_axis {
            write!(w, ",{y:.8e}")?;
        }
        writeln!(w)?;
        for (i, x) in self.x_axis.iter().enumerate() {
            write!(w, "{x:.8e}")?;
            for v in self.values.row(i) {
                write!(w, ",{v:.8e}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }
}

fn axis_step(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        1.0
    } else {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    }
}

/// `n` evenly spaced samples on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `Q(β) = ⟨β|ρ|β⟩ / π` on the grid `β = x + iy`.
pub fn husimi_q(rho: &FieldDensity, x_axis: &[f64], y_axis: &[f64]) -> SimResult<QGrid> {
    let tr = rho.trace();
    if tr > 1.0 + 1e-9 {
        return Err(SimError::InvalidInput(format!("density trace {tr} exceeds 1")));
    }
    let n = rho.n_max();
    let mut values = Array2::zeros((x_axis.len(), y_axis.len()));
    for (i, &x) in x_axis.iter().enumerate() {
        for (j, &y) in y_axis.iter().enumerate() {
            let beta = coherent_state(C64::new(x, y), n)?;
            let q = rho.expectation_in(&beta)?;
            // ρ is positive semidefinite; clamp round-off below zero
            values[[i, j]] = q.max(0.0) / PI;
        }
    }
    Ok(QGrid { x_axis: x_axis.to_vec(), y_axis: y_axis.to_vec(), values })
}
