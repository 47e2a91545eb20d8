use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::banded::BandedMatrix;
use super::grid::Grid;
use crate::dmd::{CompartmentLayout, SnapshotMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Values below this are treated as a genuine loss of positivity.
pub const NEGATIVITY_TOLERANCE: f64 = -1e-8;

/// Rates in day⁻¹, diffusion in length²·person⁻¹·day⁻¹, times in days.
#[derive(Debug, Clone, PartialEq)]
pub struct SirdParams {
    pub beta_i: f64,
    pub beta_e: f64,
    pub gamma: f64,
    pub delta: f64,
    pub nu_s: f64,
    pub nu_i: f64,
    pub nu_r: f64,
    pub sigma: f64,
    pub dt: f64,
}

impl Default for SirdParams {
    fn default() -> Self {
        Self {
            beta_i: 0.02,
            beta_e: 0.02,
            gamma: 1.0 / 24.0,
            delta: 1.0 / 180.0,
            nu_s: 1e-5,
            nu_i: 1e-5,
            nu_r: 1e-5,
            sigma: 7.0,
            dt: 0.25,
        }
    }
}

impl SirdParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("beta_i", self.beta_i),
            ("beta_e", self.beta_e),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("nu_s", self.nu_s),
            ("nu_i", self.nu_i),
            ("nu_r", self.nu_r),
            ("sigma", self.sigma),
        ];
        for (name, v) in named {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::input(format!("dt must be positive, got {}", self.dt)));
        }
        self.delay_steps().map(|_| ())
    }

    /// `σ/dt`, which must be a non-negative integer.
    pub fn delay_steps(&self) -> Result<usize> {
        let ratio = self.sigma / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::input(format!(
                "delay {} is not an exact multiple of dt {}",
                self.sigma, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// Per-node compartment densities.
#[derive(Debug, Clone, PartialEq)]
pub struct SirdState {
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    pub d: Vec<f64>,
}

impl SirdState {
    pub fn new(s: Vec<f64>, i: Vec<f64>, r: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let n = s.len();
        if i.len() != n || r.len() != n || d.len() != n {
            return Err(Error::input("SIRD fields must have equal lengths"));
        }
        let st = Self { s, i, r, d };
        if st.fields().iter().flat_map(|f| f.iter()).any(|v| !v.is_finite()) {
            return Err(Error::input("SIRD initial state contains non-finite values"));
        }
        Ok(st)
    }

    /// Spatially uniform state.
    pub fn uniform(nodes: usize, s: f64, i: f64, r: f64, d: f64) -> Self {
        Self {
            s: vec![s; nodes],
            i: vec![i; nodes],
            r: vec![r; nodes],
            d: vec![d; nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.s.len()
    }

    /// Living population `s + i + r` per node.
    pub fn n_pop(&self) -> Vec<f64> {
        (0..self.nodes()).map(|p| self.s[p] + self.i[p] + self.r[p]).collect()
    }

    fn fields(&self) -> [&Vec<f64>; 4] {
        [&self.s, &self.i, &self.r, &self.d]
    }

    /// `[s; i; r; d]` stacked.
    pub fn to_column(&self) -> Vec<f64> {
        self.fields().iter().flat_map(|f| f.iter().copied()).collect()
    }
}

/// History of the infected field for the `i(t − σ)` term.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayBuffer {
    ring: VecDeque<Vec<f64>>,
    depth: usize,
}

impl DelayBuffer {
    /// Ring of depth `σ/dt` filled with the pre-history `i(t) = i₀`.
    pub fn new(i0: &[f64], depth: usize) -> Self {
        Self {
            ring: std::iter::repeat_with(|| i0.to_vec()).take(depth).collect(),
            depth,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `i^{n+1−D}` when stepping from `n` to `n+1`; `None` when `D = 0`.
    pub fn lagged(&self) -> Option<&[f64]> {
        self.ring.front().map(|v| v.as_slice())
    }

    fn push(&mut self, latest: &[f64]) {
        if self.depth > 0 {
            self.ring.pop_front();
            self.ring.push_back(latest.to_vec());
        }
    }
}

/// Regime classification of the linear delay test equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayStability {
    /// `γ + δ < 1/(eσ)`: stable and non-oscillatory.
    StablePositive,
    /// `1/(eσ) ≤ γ + δ < π/(2σ)`.
    Stable,
    Unstable,
}

pub fn check_delay_stability(gamma: f64, delta: f64, sigma: f64) -> Result<DelayStability> {
    if !(gamma >= 0.0 && delta >= 0.0 && sigma >= 0.0) {
        return Err(Error::input(
            "stability check needs non-negative gamma, delta and sigma",
        ));
    }
    if sigma == 0.0 {
        return Err(Error::input("stability check needs a positive delay"));
    }
    let rate = gamma + delta;
    Ok(if rate < 1.0 / (std::f64::consts::E * sigma) {
        DelayStability::StablePositive
    } else if rate < std::f64::consts::PI / (2.0 * sigma) {
        DelayStability::Stable
    } else {
        DelayStability::Unstable
    })
}

/// Implicit operator `I + dt·K/w` for one diffusion coefficient, where `K`
/// is the conservative flux matrix with face coefficient `ν·(n_p+n_q)/2`.
fn diffusion_operator(grid: &Grid, n_pop: &[f64], nu: f64, dt: f64) -> Result<BandedMatrix> {
    let n = grid.nodes();
    let mut m = BandedMatrix::zeros(n, grid.bandwidth());
    for p in 0..n {
        m.add(p, p, 1.0);
    }
    let scale = dt / grid.cell_weight();
    for (p, q, g) in grid.faces() {
        let c = scale * nu * g * 0.5 * (n_pop[p] + n_pop[q]);
        m.add(p, p, c);
        m.add(q, q, c);
        m.add(p, q, -c);
        m.add(q, p, -c);
    }
    m.factor()?;
    Ok(m)
}

/// One backward-Euler step with lagged reactions and implicit diffusion.
///
/// The buffer is advanced to include the new infected field.
pub fn step_sird(state: &SirdState, params: &SirdParams, buf: &mut DelayBuffer, grid: &Grid) -> Result<SirdState> {
    let n = state.nodes();
    if n != grid.nodes() {
        return Err(Error::input(format!(
            "state has {n} nodes but grid has {}",
            grid.nodes()
        )));
    }
    if !grid.all_zero_flux() {
        return Err(Error::input("SIRD simulation supports zero-flux boundaries only"));
    }
    let dt = params.dt;
    let pop = state.n_pop();
    let lag = buf.lagged().unwrap_or(&state.i).to_vec();

    let mut s = state.s.clone();
    let mut i = state.i.clone();
    let mut r = state.r.clone();
    let mut d = state.d.clone();
    for p in 0..n {
        let infection = if pop[p] > 0.0 {
            (params.beta_i * lag[p] + params.beta_e * state.i[p]) * state.s[p] / pop[p]
        } else {
            0.0
        };
        s[p] -= dt * infection;
        i[p] += dt * (infection - (params.gamma + params.delta) * lag[p]);
        r[p] += dt * params.gamma * lag[p];
        d[p] += dt * params.delta * lag[p];
    }

    let solve = |field: &mut Vec<f64>, nu: f64| -> Result<()> {
        if nu > 0.0 {
            diffusion_operator(grid, &pop, nu, dt)?.solve_in_place(field);
        }
        Ok(())
    };
    solve(&mut s, params.nu_s)?;
    solve(&mut i, params.nu_i)?;
    solve(&mut r, params.nu_r)?;

    let next = SirdState { s, i, r, d };
    for (name, field) in ["s", "i", "r", "d"].iter().zip(next.fields()) {
        if let Some((p, v)) = field.iter().enumerate().find(|(_, v)| !(**v >= NEGATIVITY_TOLERANCE)) {
            return Err(Error::numeric(format!(
                "{name} at node {p} became {v:.3e}; the run left the positivity regime"
            )));
        }
    }
    buf.push(&next.i);
    Ok(next)
}

/// Runs `steps` steps and stores every `output_stride`-th state, starting
/// with the initial one. Layout is `[s, i, r, d]`.
pub fn run_sird(
    grid: &Grid,
    params: &SirdParams,
    initial: &SirdState,
    steps: usize,
    output_stride: usize,
) -> Result<SnapshotMatrix> {
    grid.validate()?;
    params.validate()?;
    if output_stride == 0 {
        return Err(Error::input("output stride must be at least 1"));
    }
    if initial.nodes() != grid.nodes() {
        return Err(Error::input(format!(
            "initial state has {} nodes but grid has {}",
            initial.nodes(),
            grid.nodes()
        )));
    }
    let mut buf = DelayBuffer::new(&initial.i, params.delay_steps()?);
    let mut state = initial.clone();
    let mut columns = vec![state.to_column()];
    for k in 1..=steps {
        state = step_sird(&state, params, &mut buf, grid)?;
        if k % output_stride == 0 {
            columns.push(state.to_column());
        }
    }
    let layout = CompartmentLayout::new(["s", "i", "r", "d"], grid.nodes())?;
    SnapshotMatrix::new(
        Matrix::from_columns(&columns)?,
        params.dt * output_stride as f64,
        layout,
        grid.cell_weight(),
    )
}

/// Smooth initial condition: a cosine-modulated susceptible field and a
/// Gaussian infected bump on a constant floor.
#[derive(Debug, Clone, PartialEq)]
pub struct SirdInitial {
    pub s0: f64,
    /// Relative amplitude of the `cos(πx/Lx)` modulation of `s`.
    pub s_amplitude: f64,
    pub i_peak: f64,
    pub i_center: (f64, f64),
    pub i_width: f64,
    pub i_base: f64,
    /// Relative amplitude of uniform multiplicative noise on `s`.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SirdInitial {
    fn default() -> Self {
        Self {
            s0: 1000.0,
            s_amplitude: 0.2,
            i_peak: 5.0,
            i_center: (0.3, 0.0),
            i_width: 0.1,
            i_base: 0.5,
            noise: 0.0,
            seed: 0,
        }
    }
}

impl SirdInitial {
    pub fn build(&self, grid: &Grid) -> Result<SirdState> {
        if !(self.i_width > 0.0) {
            return Err(Error::input("i_width must be positive"));
        }
        let lx = grid.hx * (grid.nx - 1) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = grid.nodes();
        let mut s = Vec::with_capacity(n);
        let mut i = Vec::with_capacity(n);
        for p in 0..n {
            let (x, y) = grid.position(p);
            let mut sv = self.s0 * (1.0 + self.s_amplitude * (std::f64::consts::PI * x / lx).cos());
            if self.noise > 0.0 {
                sv *= 1.0 + self.noise * rng.gen_range(-1.0..1.0);
            }
            s.push(sv);
            let r2 = (x - self.i_center.0).powi(2) + (y - self.i_center.1).powi(2);
            i.push(self.i_peak * (-r2 / (self.i_width * self.i_width)).exp() + self.i_base);
        }
        let state = SirdState::new(s, i, vec![0.0; n], vec![0.0; n])?;
        if state.to_column().iter().any(|&v| v < 0.0) {
            return Err(Error::input("initial SIRD state has negative densities"));
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mass(y: &SnapshotMatrix, j: usize) -> f64 {
        y.cell_weight() * y.column(j).iter().sum::<f64>()
    }

    #[test]
    fn stability_regimes() {
        assert_eq!(
            check_delay_stability(1.0 / 24.0, 1.0 / 180.0, 7.0).unwrap(),
            DelayStability::StablePositive
        );
        assert_eq!(
            check_delay_stability(0.0, 0.0, 7.0).unwrap(),
            DelayStability::StablePositive
        );
        assert_eq!(check_delay_stability(0.2, 0.0, 7.0).unwrap(), DelayStability::Stable);
        assert_eq!(check_delay_stability(0.2, 0.05, 7.0).unwrap(), DelayStability::Unstable);
        assert!(check_delay_stability(0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn delay_must_be_a_multiple_of_dt() {
        let p = SirdParams {
            sigma: 7.1,
            ..SirdParams::default()
        };
        assert!(p.validate().is_err());
        assert_eq!(SirdParams::default().delay_steps().unwrap(), 28);
    }

    #[test]
    fn no_dynamics_is_a_fixed_point() {
        let grid = Grid::line(8, 1.0).unwrap();
        let params = SirdParams {
            beta_i: 0.0,
            beta_e: 0.0,
            nu_s: 0.0,
            nu_i: 0.0,
            nu_r: 0.0,
            ..SirdParams::default()
        };
        let init = SirdState::uniform(8, 10.0, 0.0, 3.0, 1.0);
        let y = run_sird(&grid, &params, &init, 20, 1).unwrap();
        for j in 0..y.columns() {
            assert_eq!(y.column(j), init.to_column());
        }
    }

    #[test]
    fn zero_steps_gives_one_column() {
        let grid = Grid::line(4, 1.0).unwrap();
        let init = SirdInitial::default().build(&grid).unwrap();
        let y = run_sird(&grid, &SirdParams::default(), &init, 0, 1).unwrap();
        assert_eq!(y.columns(), 1);
        assert_eq!(y.layout().to_string(), "s:4,i:4,r:4,d:4");
    }

    #[test]
    fn mass_is_conserved_and_stride_applies() {
        let grid = Grid::line(16, 1.0).unwrap();
        let init = SirdInitial::default().build(&grid).unwrap();
        let y = run_sird(&grid, &SirdParams::default(), &init, 200, 4).unwrap();
        assert_eq!(y.columns(), 51);
        assert_eq!(y.dt(), 1.0);
        let m0 = mass(&y, 0);
        for j in 0..y.columns() {
            assert!((mass(&y, j) - m0).abs() <= 1e-10 * m0);
        }
    }

    #[test]
    fn two_dimensional_run_conserves_mass() {
        let grid = Grid::rectangle(6, 5, 1.0, 1.0).unwrap();
        let init = SirdInitial {
            i_center: (0.5, 0.5),
            noise: 0.1,
            seed: 3,
            ..SirdInitial::default()
        };
        let params = SirdParams {
            nu_s: 1e-3,
            nu_i: 1e-3,
            nu_r: 1e-3,
            ..SirdParams::default()
        };
        let y = run_sird(&grid, &params, &init.build(&grid).unwrap(), 100, 10).unwrap();
        let m0 = mass(&y, 0);
        for j in 0..y.columns() {
            assert!((mass(&y, j) - m0).abs() <= 1e-10 * m0);
        }
    }

    #[test]
    fn fixed_boundaries_are_rejected() {
        let grid = Grid::line(4, 1.0)
            .unwrap()
            .with_bottom(super::super::grid::EdgeCondition::Fixed(1.0));
        let init = SirdState::uniform(4, 1.0, 1.0, 0.0, 0.0);
        let mut buf = DelayBuffer::new(&init.i, 2);
        assert!(step_sird(&init, &SirdParams::default(), &mut buf, &grid).is_err());
    }

    #[test]
    fn negative_densities_are_a_numeric_error() {
        let grid = Grid::line(4, 1.0).unwrap();
        let params = SirdParams {
            gamma: 10.0,
            dt: 1.0,
            sigma: 1.0,
            ..SirdParams::default()
        };
        let init = SirdState::uniform(4, 1.0, 1.0, 0.0, 0.0);
        let mut buf = DelayBuffer::new(&init.i, 1);
        let err = step_sird(&init, &params, &mut buf, &grid).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Numeric);
    }
}
