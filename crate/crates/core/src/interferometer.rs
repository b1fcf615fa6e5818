//! The tripartite state (position ⊗ internal level ⊗ cavity mode) and the
//! two ways of reading out the cavity: tracing it away or projecting it on a
//! quadrature eigenstate.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::evolution::{dispersive_row, exact_row, InteractionParams, Level};
use crate::fock::{coherent_state, quadrature_projector, FieldDensity, FieldState, QuadratureSpec};

/// Components of a mixed atomic state lighter than this fraction of the
/// trace are dropped.
const COMPONENT_CUTOFF: f64 = 1e-30;

/// Densities below this are treated as an impossible outcome.
const MIN_OUTCOME_DENSITY: f64 = 1e-300;

/// Slit centers and packet width, in units of `1/k_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitGeometry {
    /// Common antinode.
    pub x_top: f64,
    /// Common node, a quarter classical wavelength below.
    pub x_bottom: f64,
    /// Standard deviation of each packet's probability density.
    pub sigma: f64,
}

impl Default for SlitGeometry {
    fn default() -> Self {
        Self { x_top: 0.0, x_bottom: FRAC_PI_2, sigma: 0.05 }
    }
}

impl SlitGeometry {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.x_top + self.x_bottom)
    }

    pub fn validate(&self) -> SimResult<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(SimError::Config(format!("slit width must be positive, got {}", self.sigma)));
        }
        if !(self.x_bottom > self.x_top) {
            return Err(SimError::Config("bottom slit must lie above the top slit in x".into()));
        }
        Ok(())
    }
}

/// Beam-splitter amplitudes and Ramsey angle.
///
/// The top path carries `cos φ |c⟩ + sin φ |b⟩`, the bottom path `|c⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreparationParams {
    c_up: C64,
    c_down: C64,
    phi: f64,
}

impl PreparationParams {
    pub fn new(c_up: C64, c_down: C64, phi: f64) -> SimResult<Self> {
        let norm = c_up.norm_sqr() + c_down.norm_sqr();
        if !norm.is_finite() || !phi.is_finite() {
            return Err(SimError::InvalidInput("path amplitudes and phi must be finite".into()));
        }
        if (norm - 1.0).abs() > 1e-10 {
            return Err(SimError::InvalidInput(format!(
                "|c_up|² + |c_down|² = {norm}, expected 1"
            )));
        }
        Ok(Self { c_up, c_down, phi })
    }

    pub fn c_up(&self) -> C64 {
        self.c_up
    }

    pub fn c_down(&self) -> C64 {
        self.c_down
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Uniform periodic position grid `[x_min, x_max)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    /// Centered on the slit midpoint and wide enough to hold the `t′ = 3`
    /// far-field pattern of a `σ = 0.05` packet.
    fn default() -> Self {
        Self { x_min: FRAC_PI_4 - 400.0, x_max: FRAC_PI_4 + 400.0, points: 16384 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    x: Vec<f64>,
    dx: f64,
}

impl Grid {
    pub fn new(spec: &GridSpec) -> SimResult<Self> {
        if spec.points < 8 || !(spec.x_max > spec.x_min) || !spec.x_min.is_finite() || !spec.x_max.is_finite() {
            return Err(SimError::Config(format!("invalid grid {spec:?}")));
        }
        let dx = (spec.x_max - spec.x_min) / spec.points as f64;
        let x = (0..spec.points).map(|i| spec.x_min + dx * i as f64).collect();
        Ok(Self { x, dx })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    /// Exclusive upper edge of the periodic cell.
    pub fn x_max(&self) -> f64 {
        self.x[0] + self.dx * self.x.len() as f64
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.len();
        let scale = 2.0 * PI / (n as f64 * self.dx);
        (0..n)
            .map(|j| if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 } * scale)
            .collect()
    }
}

/// Which interaction evaluation to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionMode {
    #[default]
    Dispersive,
    Exact,
}

/// Where the position-dependent coefficients are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickModel {
    /// Every amplitude uses the coefficients of the slit it came through
    /// (the nearer slit center).
    #[default]
    SlitPoint,
    /// Every grid point uses the coefficients at its own position, so the
    /// standing waves imprint a position-dependent phase across each packet.
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractionSetup {
    pub params: InteractionParams,
    pub mode: InteractionMode,
    pub kick: KickModel,
    pub tail_tolerance: f64,
}

impl Default for InteractionSetup {
    fn default() -> Self {
        Self {
            params: InteractionParams::default(),
            mode: InteractionMode::Dispersive,
            kick: KickModel::SlitPoint,
            tail_tolerance: crate::evolution::DEFAULT_TAIL_TOLERANCE,
        }
    }
}

/// Weight removed from the joint state by the interaction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub leak: f64,
    pub truncation_loss: f64,
}

/// Amplitudes `ψ(x, s, m)` with `Σ |ψ|² Δx = 1 − losses`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    grid: Grid,
    geometry: SlitGeometry,
    /// Indexed `[grid point, level, Fock index]`.
    amps: Array3<C64>,
    diagnostics: StateDiagnostics,
}

impl JointState {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn geometry(&self) -> &SlitGeometry {
        &self.geometry
    }

    pub fn amps(&self) -> &Array3<C64> {
        &self.amps
    }

    pub fn n_max(&self) -> usize {
        self.amps.len_of(Axis(2))
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        self.diagnostics
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    /// Unnormalized field vector attached to `(grid point, level)`.
    pub fn field_at(&self, i: usize, level: Level) -> SimResult<FieldState> {
        FieldState::new(self.amps.slice(ndarray::s![i, level.index(), ..]).to_vec())
    }

    /// Weight on each side of the slit midpoint: `(top, bottom)`.
    pub fn path_weights(&self) -> (f64, f64) {
        let mid = self.geometry.midpoint();
        let mut w = (0.0, 0.0);
        for (i, &x) in self.grid.x.iter().enumerate() {
            let p: f64 = self.amps.slice(ndarray::s![i, .., ..]).iter().map(|a| a.norm_sqr()).sum();
            if x < mid {
                w.0 += p;
            } else {
                w.1 += p;
            }
        }
        (w.0 * self.grid.dx, w.1 * self.grid.dx)
    }

    fn nonzero_rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len())
            .filter(move |&i| self.amps.slice(ndarray::s![i, .., ..]).iter().any(|a| a.re != 0.0 || a.im != 0.0))
    }
}

/// Gaussian packet amplitude with `|g|²` of standard deviation `sigma`,
/// normalized on the grid.
fn packet(grid: &Grid, center: f64, sigma: f64) -> Vec<f64> {
    let mut g: Vec<f64> = grid
        .x
        .iter()
        .map(|&x| (-(x - center).powi(2) / (4.0 * sigma * sigma)).exp())
        .collect();
    let norm = (g.iter().map(|v| v * v).sum::<f64>() * grid.dx).sqrt();
    g.iter_mut().for_each(|v| *v /= norm);
    g
}

/// Product of the prepared atomic state and the coherent field `|α⟩`.
pub fn build_initial(
    prep: &PreparationParams,
    geom: &SlitGeometry,
    alpha: C64,
    grid_spec: &GridSpec,
    n_max: usize,
) -> SimResult<JointState> {
    geom.validate()?;
    let grid = Grid::new(grid_spec)?;
    let margin = 6.0 * geom.sigma;
    if grid.x_min() > geom.x_top - margin || grid.x_max() < geom.x_bottom + margin {
        return Err(SimError::Config(format!(
            "grid [{}, {}) does not cover the slits with a 6σ margin",
            grid.x_min(),
            grid.x_max()
        )));
    }
    // spectral weight of a packet beyond the grid's Nyquist wavenumber
    let k_nyq = PI / grid.dx;
    if (-2.0 * (geom.sigma * k_nyq).powi(2)).exp() > 1e-6 {
        return Err(SimError::Config(format!(
            "grid step {} is too coarse for slit width {}",
            grid.dx, geom.sigma
        )));
    }
    let coh = coherent_state(alpha, n_max)?;
    let top = packet(&grid, geom.x_top, geom.sigma);
    let bottom = packet(&grid, geom.x_bottom, geom.sigma);
    let last = grid.len() - 1;
    let edge = [top[0], top[last], bottom[0], bottom[last]].iter().map(|v| v * v).fold(0.0, f64::max);
    if edge > 1e-8 {
        return Err(SimError::Config(format!("packet density {edge:.2e} at the grid edge exceeds 1e-8")));
    }
    let (cos_phi, sin_phi) = (prep.phi.cos(), prep.phi.sin());
    let mut amps = Array3::zeros((grid.len(), 2, n_max));
    for i in 0..grid.len() {
        let c_path = prep.c_up * cos_phi * top[i] + prep.c_down * bottom[i];
        let b_path = prep.c_up * sin_phi * top[i];
        if c_path == C64::new(0.0, 0.0) && b_path == C64::new(0.0, 0.0) {
            continue;
        }
        for (m, cm) in coh.amps().iter().enumerate() {
            amps[[i, Level::B.index(), m]] = b_path * cm;
            amps[[i, Level::C.index(), m]] = c_path * cm;
        }
    }
    Ok(JointState { grid, geometry: *geom, amps, diagnostics: StateDiagnostics::default() })
}

/// Replace each `(x, level)` field vector by its interaction branches.
pub fn interact(state: &JointState, setup: &InteractionSetup) -> SimResult<JointState> {
    setup.params.validate()?;
    let n_max = state.n_max();
    let mid = state.geometry.midpoint();
    let mut amps = Array3::zeros(state.amps.raw_dim());
    let mut diag = state.diagnostics;
    let mut lost_here = 0.0;
    let rows: Vec<usize> = state.nonzero_rows().collect();
    for i in rows {
        let x = state.grid.x[i];
        let x_eval = match setup.kick {
            KickModel::Local => x,
            KickModel::SlitPoint if x < mid => state.geometry.x_top,
            KickModel::SlitPoint => state.geometry.x_bottom,
        };
        for level in Level::ALL {
            let field = state.field_at(i, level)?;
            if field.amps().iter().all(|a| a.re == 0.0 && a.im == 0.0) {
                continue;
            }
            let out = match setup.mode {
                InteractionMode::Dispersive => {
                    dispersive_row(level, &field, x_eval, &setup.params, setup.tail_tolerance)?
                }
                InteractionMode::Exact => exact_row(level, &field, x_eval, &setup.params, setup.tail_tolerance)?,
            };
            diag.leak += out.leak * state.grid.dx;
            lost_here += out.truncation_loss * state.grid.dx;
            for branch in &out.branches {
                let li = branch.level.index();
                for m in 0..n_max {
                    amps[[i, li, m]] += branch.field.amps()[m];
                }
            }
        }
    }
    let norm = state.norm_sqr();
    if norm > 0.0 && lost_here > setup.tail_tolerance * norm {
        return Err(SimError::Truncation { lost: lost_here / norm, tolerance: setup.tail_tolerance });
    }
    diag.truncation_loss += lost_here;
    Ok(JointState { grid: state.grid.clone(), geometry: state.geometry, amps, diagnostics: diag })
}

/// Atomic density operator over `(x, level)`, stored as a sum of
/// outer products `ρ = Σ_k |ψ_k⟩⟨ψ_k|`.
///
/// Each component is indexed `[level, grid point]`. Matrix elements are
/// densities: `Σ_i Σ_s ρ(i,s; i,s) Δx = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomDensity {
    grid: Grid,
    components: Vec<Array2<C64>>,
}

impl AtomDensity {
    /// Builds a unit-trace density from unnormalized components.
    pub fn from_components(grid: Grid, components: Vec<Array2<C64>>) -> SimResult<Self> {
        for c in &components {
            if c.dim() != (2, grid.len()) {
                return Err(SimError::InvalidInput(format!(
                    "component shape {:?} does not match grid of {} points",
                    c.dim(),
                    grid.len()
                )));
            }
        }
        let weights: Vec<f64> =
            components.iter().map(|c| c.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(SimError::InvalidInput("atomic state has zero norm".into()));
        }
        let scale = 1.0 / total.sqrt();
        let components = components
            .into_iter()
            .zip(&weights)
            .filter(|(_, w)| **w > COMPONENT_CUTOFF * total)
            .map(|(c, _)| c.mapv(|a| a * scale))
            .collect();
        Ok(Self { grid, components })
    }

    /// Builds a density without renormalizing; used for unitary updates.
    pub(crate) fn from_raw(grid: Grid, components: Vec<Array2<C64>>) -> Self {
        Self { grid, components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Array2<C64>] {
        &self.components
    }

    pub fn rank_bound(&self) -> usize {
        self.components.len()
    }

    pub fn trace(&self) -> f64 {
        self.components.iter().map(|c| c.iter().map(|a| a.norm_sqr()).sum::<f64>()).sum::<f64>() * self.grid.dx
    }

    /// `ρ(i, s; j, s′)`.
    pub fn element(&self, i: usize, s: Level, j: usize, s2: Level) -> C64 {
        self.components.iter().map(|c| c[[s.index(), i]] * c[[s2.index(), j]].conj()).sum()
    }

    /// Diagonal `ρ(x, s; x, s)` indexed `[level, grid point]`.
    pub fn diagonal(&self) -> Array2<f64> {
        let mut d = Array2::zeros((2, self.grid.len()));
        for c in &self.components {
            d.zip_mut_with(c, |acc, a| *acc += a.norm_sqr());
        }
        d
    }

    /// Gram matrix `⟨ψ_k|ψ_l⟩` of the components.
    fn gram(&self) -> Array2<C64> {
        let n = self.components.len();
        let (lo, hi) = self.support();
        let mut g = Array2::zeros((n, n));
        for k in 0..n {
            for l in k..n {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..2 {
                    let a = self.components[k].row(s);
                    let b = self.components[l].row(s);
                    for i in lo..hi {
                        acc += a[i].conj() * b[i];
                    }
                }
                acc *= self.grid.dx;
                g[[k, l]] = acc;
                g[[l, k]] = acc.conj();
            }
        }
        g
    }

    /// Index range outside which every component vanishes.
    fn support(&self) -> (usize, usize) {
        let n = self.grid.len();
        let nonzero = |i: usize| self.components.iter().any(|c| c[[0, i]].norm_sqr() + c[[1, i]].norm_sqr() > 0.0);
        let lo = (0..n).find(|&i| nonzero(i)).unwrap_or(0);
        let hi = (0..n).rev().find(|&i| nonzero(i)).map_or(0, |i| i + 1);
        (lo, hi.max(lo))
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        self.gram().iter().map(|v| v.norm_sqr()).sum::<f64>() / (tr * tr)
    }

    /// Probability on each side of `midpoint`: `(below, above)`.
    pub fn path_weights(&self, midpoint: f64) -> (f64, f64) {
        let d = self.diagonal();
        let mut w = (0.0, 0.0);
        for (i, &x) in self.grid.x.iter().enumerate() {
            let p = d[[0, i]] + d[[1, i]];
            if x < midpoint {
                w.0 += p;
            } else {
                w.1 += p;
            }
        }
        (w.0 * self.grid.dx, w.1 * self.grid.dx)
    }

    /// Total probability in each internal level: `(b, c)`.
    pub fn level_weights(&self) -> (f64, f64) {
        let d = self.diagonal();
        (d.row(0).sum() * self.grid.dx, d.row(1).sum() * self.grid.dx)
    }

    /// Dense matrix over the combined index `level·N + i`, scaled by `Δx` so
    /// it has unit trace as a matrix. Only sensible for small grids.
    pub fn to_dense(&self) -> SimResult<Array2<C64>> {
        let n = self.grid.len();
        if n > 2048 {
            return Err(SimError::Grid(format!("refusing to densify a {n}-point grid")));
        }
        let mut m = Array2::zeros((2 * n, 2 * n));
        for c in &self.components {
            let flat: Vec<C64> = c.iter().copied().collect();
            for (p, a) in flat.iter().enumerate() {
                for (q, b) in flat.iter().enumerate() {
                    m[[p, q]] += a * b.conj() * self.grid.dx;
                }
            }
        }
        Ok(m)
    }
}

/// `ρ_atom = Tr_field |ψ⟩⟨ψ|`, renormalized to unit trace.
pub fn trace_out_field(state: &JointState) -> SimResult<AtomDensity> {
    let n = state.grid.len();
    let components = (0..state.n_max())
        .map(|m| {
            let mut c = Array2::zeros((2, n));
            for i in 0..n {
                for s in 0..2 {
                    c[[s, i]] = state.amps[[i, s, m]];
                }
            }
            c
        })
        .collect();
    AtomDensity::from_components(state.grid.clone(), components)
}

/// Projects the field on `|χ_θ⟩`.
///
/// Returns the renormalized conditional atomic state and the probability
/// density of the outcome `χ`.
pub fn condition_on_quadrature(state: &JointState, spec: QuadratureSpec) -> SimResult<(AtomDensity, f64)> {
    let b = quadrature_projector(spec, state.n_max())?;
    let bconj: Vec<C64> = b.amps().iter().map(|v| v.conj()).collect();
    let n = state.grid.len();
    let mut a = Array2::zeros((2, n));
    for i in state.nonzero_rows() {
        for s in 0..2 {
            let row = state.amps.slice(ndarray::s![i, s, ..]);
            a[[s, i]] = row.iter().zip(&bconj).map(|(x, y)| x * y).sum::<C64>();
        }
    }
    let density = a.iter().map(|v| v.norm_sqr()).sum::<f64>() * state.grid.dx;
    if !(density >= MIN_OUTCOME_DENSITY) {
        return Err(SimError::ImpossibleOutcome(density));
    }
    let rho = AtomDensity::from_components(state.grid.clone(), vec![a])?;
    Ok((rho, density))
}

/// `Tr_atom |ψ⟩⟨ψ|` without renormalization; its trace is the state's norm.
pub fn field_density_unnormalized(state: &JointState) -> Array2<C64> {
    let n = state.n_max();
    let mut rho = Array2::zeros((n, n));
    for i in state.nonzero_rows() {
        for s in 0..2 {
            let v = state.amps.slice(ndarray::s![i, s, ..]);
            for p in 0..n {
                if v[p] == C64::new(0.0, 0.0) {
                    continue;
                }
                for q in 0..n {
                    rho[[p, q]] += v[p] * v[q].conj();
                }
            }
        }
    }
    rho.mapv_inplace(|v| v * state.grid.dx);
    rho
}

/// Reduced density operator of the cavity mode, renormalized to unit trace.
pub fn field_density(state: &JointState) -> SimResult<FieldDensity> {
    FieldDensity::from_matrix(field_density_unnormalized(state))?.normalized()
}

/// Outcome densities `⟨χ_θ|ρ_field|χ_θ⟩` at each sample, relative to the
/// state's actual norm.
pub fn quadrature_pdf(state: &JointState, theta: f64, chi_samples: &[f64]) -> SimResult<Vec<f64>> {
    let rho = FieldDensity::from_matrix(field_density_unnormalized(state))?;
    chi_samples
        .iter()
        .map(|&chi| {
            let b = quadrature_projector(QuadratureSpec::new(theta, chi)?, state.n_max())?;
            Ok(rho.expectation_in(&b)?.max(0.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn small_grid() -> GridSpec {
        GridSpec { x_min: FRAC_PI_4 - 3.0, x_max: FRAC_PI_4 + 3.0, points: 512 }
    }

    fn prep(cu: f64, cd: f64, phi: f64) -> PreparationParams {
        PreparationParams::new(C64::new(cu, 0.0), C64::new(cd, 0.0), phi).unwrap()
    }

    fn alpha8() -> C64 {
        C64::new(8f64.sqrt(), 0.0)
    }

    #[test]
    fn preparation_requires_unit_norm() {
        assert!(PreparationParams::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0), 0.0).is_err());
        assert!(PreparationParams::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8), 0.3).is_ok());
    }

    #[test]
    fn phi_zero_has_no_b_amplitude() {
        let s = build_initial(&prep(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0), &SlitGeometry::default(), alpha8(), &small_grid(), 40)
            .unwrap();
        assert!(s.amps().index_axis(Axis(1), 0).iter().all(|a| *a == C64::new(0.0, 0.0)));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn top_only_b_preparation() {
        let s = build_initial(&prep(1.0, 0.0, FRAC_PI_2), &SlitGeometry::default(), alpha8(), &small_grid(), 40).unwrap();
        let (top, bottom) = s.path_weights();
        assert!((top - 1.0).abs() < 1e-10 && bottom < 1e-12);
        let c_weight: f64 = s.amps().index_axis(Axis(1), 1).iter().map(|a| a.norm_sqr()).sum::<f64>() * s.grid().dx();
        assert!(c_weight < 1e-30);
    }

    #[test]
    fn grid_must_cover_slits() {
        let g = GridSpec { x_min: -0.1, x_max: 2.0, points: 512 };
        assert!(matches!(
            build_initial(&prep(1.0, 0.0, 0.0), &SlitGeometry::default(), alpha8(), &g, 10),
            Err(SimError::Config(_))
        ));
        let coarse = GridSpec { x_min: -3.0, x_max: 3.0, points: 16 };
        assert!(build_initial(&prep(1.0, 0.0, 0.0), &SlitGeometry::default(), alpha8(), &coarse, 10).is_err());
    }

    #[test]
    fn zero_epsilon_interaction_preserves_norm() {
        let s0 = build_initial(&prep(0.6, 0.8, 0.7), &SlitGeometry::default(), alpha8(), &small_grid(), 96).unwrap();
        for kick in [KickModel::SlitPoint, KickModel::Local] {
            let setup = InteractionSetup { kick, ..Default::default() };
            let s1 = interact(&s0, &setup).unwrap();
            assert!((s1.norm_sqr() - s0.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn pre_interaction_trace_is_pure() {
        let s = build_initial(&prep(0.6, 0.8, 0.7), &SlitGeometry::default(), alpha8(), &small_grid(), 60).unwrap();
        let rho = trace_out_field(&s).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_density_before_interaction_is_coherent_projector() {
        let s = build_initial(&prep(0.6, 0.8, 0.7), &SlitGeometry::default(), alpha8(), &small_grid(), 96).unwrap();
        let rho = field_density(&s).unwrap();
        let want = FieldDensity::pure(&coherent_state(alpha8(), 96).unwrap());
        for (a, b) in rho.matrix().iter().zip(want.matrix().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn vanishing_outcome_is_rejected() {
        let s = build_initial(&prep(1.0, 0.0, 0.0), &SlitGeometry::default(), alpha8(), &small_grid(), 40).unwrap();
        assert!(matches!(
            condition_on_quadrature(&s, QuadratureSpec::new(0.0, 60.0).unwrap()),
            Err(SimError::ImpossibleOutcome(_))
        ));
    }

    #[test]
    fn dense_density_is_hermitian() {
        let g = GridSpec { x_min: FRAC_PI_4 - 1.5, x_max: FRAC_PI_4 + 1.5, points: 128 };
        let s0 = build_initial(&prep(0.6, 0.8, 1.0), &SlitGeometry::default(), C64::new(1.0, 0.0), &g, 30).unwrap();
        let setup = InteractionSetup {
            params: InteractionParams::default().with_epsilon(C64::new(2.0, 0.5)),
            ..Default::default()
        };
        let rho = trace_out_field(&interact(&s0, &setup).unwrap()).unwrap();
        let d = rho.to_dense().unwrap();
        let tr: f64 = d.diag().iter().map(|v| v.re).sum();
        assert!((tr - 1.0).abs() < 1e-12);
        for p in 0..d.nrows() {
            for q in 0..d.ncols() {
                assert!((d[[p, q]] - d[[q, p]].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wavenumbers_are_in_fft_order() {
        let g = Grid::new(&GridSpec { x_min: 0.0, x_max: 8.0, points: 8 }).unwrap();
        let k = g.wavenumbers();
        let unit = 2.0 * PI / 8.0;
        assert_eq!(k[0], 0.0);
        assert!((k[1] - unit).abs() < 1e-15);
        assert!((k[4] + 4.0 * unit).abs() < 1e-15);
        assert!((k[7] + unit).abs() < 1e-15);
    }
}
