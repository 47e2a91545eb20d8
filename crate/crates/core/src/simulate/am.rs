use super::banded::BandedMatrix;
use super::grid::{EdgeCondition, Grid};
use crate::dmd::{CompartmentLayout, SnapshotMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Material, laser and switch parameters. Lengths in cm, time in s,
/// energy in J, temperature in K.
#[derive(Debug, Clone, PartialEq)]
pub struct AmParams {
    /// g/cm³
    pub rho: f64,
    /// J/(g·K)
    pub c_p: f64,
    /// W/(cm·K)
    pub kappa: f64,
    pub t_s: f64,
    pub t_f: f64,
    /// W/cm³
    pub laser_amp: f64,
    pub laser_center: (f64, f64),
    pub laser_off_time: f64,
    /// Sharpness of the temperature factors, per K.
    pub sigmoid_sharpness: f64,
    /// Sharpness of the heating-rate factors, per (K/s).
    pub rate_sharpness: f64,
    pub dt: f64,
}

impl Default for AmParams {
    fn default() -> Self {
        Self {
            rho: 8.0,
            c_p: 0.5,
            kappa: 0.15,
            t_s: 1658.0,
            t_f: 1723.0,
            laser_amp: 9e6,
            laser_center: (0.02, 0.04),
            laser_off_time: 1.5e-3,
            sigmoid_sharpness: 1.0,
            rate_sharpness: 1e-3,
            dt: 1.25e-5,
        }
    }
}

impl AmParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("c_p", self.c_p),
            ("kappa", self.kappa),
            ("t_s", self.t_s),
            ("sigmoid_sharpness", self.sigmoid_sharpness),
            ("rate_sharpness", self.rate_sharpness),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_f > self.t_s && self.t_f.is_finite()) {
            return Err(Error::input(format!(
                "t_f ({}) must exceed t_s ({})",
                self.t_f, self.t_s
            )));
        }
        if !(self.laser_amp >= 0.0 && self.laser_amp.is_finite()) {
            return Err(Error::input("laser_amp must be finite and >= 0"));
        }
        if !(self.laser_center.0.is_finite() && self.laser_center.1.is_finite() && self.laser_off_time.is_finite()) {
            return Err(Error::input("laser centre and off time must be finite"));
        }
        Ok(())
    }
}

/// Temperature and phase fractions per node.
#[derive(Debug, Clone, PartialEq)]
pub struct AmState {
    pub t: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub phi_l: Vec<f64>,
    pub phi_s: Vec<f64>,
}

impl AmState {
    /// All powder at a uniform temperature.
    pub fn powder(nodes: usize, temperature: f64) -> Self {
        Self {
            t: vec![temperature; nodes],
            phi_p: vec![1.0; nodes],
            phi_l: vec![0.0; nodes],
            phi_s: vec![0.0; nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.t.len()
    }

    /// `[T; φ_p; φ_l; φ_s]` stacked.
    pub fn to_column(&self) -> Vec<f64> {
        [&self.t, &self.phi_p, &self.phi_l, &self.phi_s]
            .iter()
            .flat_map(|f| f.iter().copied())
            .collect()
    }
}

/// Laser heat source `amp·exp((−(x−x_c)⁴ − (y−y_c)⁴)/1e−8)` while on.
pub fn laser_source(x: f64, y: f64, params: &AmParams, t: f64) -> f64 {
    if t >= params.laser_off_time {
        return 0.0;
    }
    let (xc, yc) = params.laser_center;
    params.laser_amp * ((-(x - xc).powi(4) - (y - yc).powi(4)) / 1e-8).exp()
}

/// Logistic `1/(1+e^{−z})`, evaluated without overflow.
fn logistic(z: f64) -> f64 {
    0.5 * (1.0 + (0.5 * z).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Powder,
    Liquid,
    Solid,
}

/// Smooth indicator of each phase transition.
///
/// Powder and solid switch on while heating above `t_s`; liquid switches on
/// while cooling below `t_f`.
pub fn sigmoid_switch(kind: Phase, temperature: f64, temp_rate: f64, params: &AmParams) -> f64 {
    let kr = params.rate_sharpness;
    let kt = params.sigmoid_sharpness;
    match kind {
        Phase::Powder | Phase::Solid => logistic(kr * temp_rate) * logistic(kt * (temperature - params.t_s)),
        Phase::Liquid => logistic(-kr * temp_rate) * logistic(kt * (params.t_f - temperature)),
    }
}

/// Backward-Euler update of one node's phase fractions `[φ_p, φ_l, φ_s]`
/// given the new temperature and the rate `(Tⁿ⁺¹ − Tⁿ)/dt`, followed by
/// renormalisation to unit sum.
pub fn phase_step(phi: [f64; 3], temperature: f64, temp_rate: f64, params: &AmParams, dt: f64) -> [f64; 3] {
    let a = temp_rate / (params.t_f - params.t_s);
    let sp = sigmoid_switch(Phase::Powder, temperature, temp_rate, params);
    let sl = sigmoid_switch(Phase::Liquid, temperature, temp_rate, params);
    let ss = sigmoid_switch(Phase::Solid, temperature, temp_rate, params);

    let p = phi[0] / (1.0 + dt * sp * a);
    // (φ_l, φ_s) are coupled through the liquid→solid and solid→liquid terms.
    let m11 = 1.0 - dt * sl * a;
    let m12 = -dt * ss * a;
    let m21 = dt * sl * a;
    let m22 = 1.0 + dt * ss * a;
    let r1 = phi[1] + dt * sp * a * p;
    let r2 = phi[2];
    let det = m11 * m22 - m12 * m21;
    let l = (r1 * m22 - m12 * r2) / det;
    let s = (m11 * r2 - m21 * r1) / det;
    let sum = p + l + s;
    [p / sum, l / sum, s / sum]
}

/// Temperature stepper with the implicit operator factored once.
#[derive(Debug, Clone)]
pub struct AmStepper {
    grid: Grid,
    params: AmParams,
    operator: BandedMatrix,
    fixed: Vec<Option<f64>>,
    positions: Vec<(f64, f64)>,
    conductances: Vec<(usize, usize, f64)>,
}

impl AmStepper {
    /// Requires a 2D grid with a fixed-value bottom edge and zero-flux
    /// elsewhere.
    pub fn new(grid: &Grid, params: &AmParams) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        if grid.is_1d() {
            return Err(Error::input("AM simulation needs a 2D grid"));
        }
        let bottom = match grid.bottom {
            EdgeCondition::Fixed(v) => v,
            EdgeCondition::ZeroFlux => return Err(Error::input("AM simulation needs a fixed-temperature bottom edge")),
        };
        if [grid.left, grid.right, grid.top]
            .iter()
            .any(|e| *e != EdgeCondition::ZeroFlux)
        {
            return Err(Error::input(
                "AM simulation supports zero-flux left, right and top edges only",
            ));
        }

        let n = grid.nodes();
        let mut op = BandedMatrix::zeros(n, grid.bandwidth());
        let mass = params.rho * params.c_p * grid.cell_weight() / params.dt;
        for p in 0..n {
            op.add(p, p, mass);
        }
        let conductances: Vec<(usize, usize, f64)> = grid
            .faces()
            .into_iter()
            .map(|(p, q, g)| (p, q, params.kappa * g))
            .collect();
        for &(p, q, c) in &conductances {
            op.add(p, p, c);
            op.add(q, q, c);
            op.add(p, q, -c);
            op.add(q, p, -c);
        }
        let mut fixed = vec![None; n];
        for i in 0..grid.nx {
            let p = grid.index(i, 0);
            op.set_identity_row(p);
            fixed[p] = Some(bottom);
        }
        op.factor()?;
        Ok(Self {
            grid: grid.clone(),
            params: params.clone(),
            operator: op,
            fixed,
            positions: (0..n).map(|p| grid.position(p)).collect(),
            conductances,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &AmParams {
        &self.params
    }

    /// Initial state: all powder at the bottom temperature.
    pub fn initial_state(&self) -> AmState {
        let tb = self.fixed.iter().flatten().next().copied().unwrap_or(293.15);
        AmState::powder(self.grid.nodes(), tb)
    }

    /// Advances from time `time` to `time + dt`; the laser is evaluated at `time`.
    pub fn step(&self, state: &AmState, time: f64) -> Result<AmState> {
        let n = self.grid.nodes();
        if state.nodes() != n {
            return Err(Error::input(format!(
                "state has {} nodes but grid has {n}",
                state.nodes()
            )));
        }
        let p = &self.params;
        let w = self.grid.cell_weight();
        // Solve for the increment so that equilibrium states stay bit-exact.
        let mut delta: Vec<f64> = (0..n)
            .map(|k| {
                let (x, y) = self.positions[k];
                w * laser_source(x, y, p, time)
            })
            .collect();
        for &(a, b, c) in &self.conductances {
            let flux = c * (state.t[a] - state.t[b]);
            delta[a] -= flux;
            delta[b] += flux;
        }
        for (k, fixed) in self.fixed.iter().enumerate() {
            if let Some(v) = fixed {
                delta[k] = v - state.t[k];
            }
        }
        self.operator.solve_in_place(&mut delta);
        let t_new: Vec<f64> = state.t.iter().zip(&delta).map(|(t, d)| t + d).collect();
        if let Some(k) = t_new.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("temperature at node {k} is not finite")));
        }

        let mut next = AmState {
            t: t_new,
            phi_p: vec![0.0; n],
            phi_l: vec![0.0; n],
            phi_s: vec![0.0; n],
        };
        for k in 0..n {
            let rate = (next.t[k] - state.t[k]) / p.dt;
            let [a, b, c] = phase_step(
                [state.phi_p[k], state.phi_l[k], state.phi_s[k]],
                next.t[k],
                rate,
                p,
                p.dt,
            );
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                return Err(Error::numeric(format!("phase update at node {k} is not finite")));
            }
            next.phi_p[k] = a;
            next.phi_l[k] = b;
            next.phi_s[k] = c;
        }
        Ok(next)
    }
}

/// One step without a cached factorisation. Prefer [`AmStepper`] for runs.
pub fn step_am(state: &AmState, params: &AmParams, grid: &Grid, time: f64) -> Result<AmState> {
    AmStepper::new(grid, params)?.step(state, time)
}

/// Runs from all-powder at the bottom temperature. Layout is
/// `[T, phi_p, phi_l, phi_s]`.
pub fn run_am(grid: &Grid, params: &AmParams, steps: usize, output_stride: usize) -> Result<SnapshotMatrix> {
    if output_stride == 0 {
        return Err(Error::input("output stride must be at least 1"));
    }
    let stepper = AmStepper::new(grid, params)?;
    let mut state = stepper.initial_state();
    let mut columns = vec![state.to_column()];
    for k in 0..steps {
        state = stepper.step(&state, k as f64 * params.dt)?;
        if (k + 1) % output_stride == 0 {
            columns.push(state.to_column());
        }
    }
    let layout = CompartmentLayout::new(["T", "phi_p", "phi_l", "phi_s"], grid.nodes())?;
    SnapshotMatrix::new(
        Matrix::from_columns(&columns)?,
        params.dt * output_stride as f64,
        layout,
        grid.cell_weight(),
    )
}

/// `φ_p` along the vertical line `i = nx/2`, bottom to top.
pub fn melt_pool_profile(snapshot: &SnapshotMatrix, column: usize, grid: &Grid) -> Result<Vec<f64>> {
    if grid.is_1d() {
        return Err(Error::input("melt pool profile needs a 2D grid"));
    }
    let layout = snapshot.layout();
    if layout.node_count() != grid.nodes() {
        return Err(Error::input(format!(
            "snapshot has {} nodes per compartment but grid has {}",
            layout.node_count(),
            grid.nodes()
        )));
    }
    if column >= snapshot.columns() {
        return Err(Error::input(format!(
            "column {column} out of range for {} columns",
            snapshot.columns()
        )));
    }
    let c = layout
        .index_of("phi_p")
        .ok_or_else(|| Error::input("snapshot has no phi_p compartment"))?;
    let offset = layout.block(c).start;
    let i = grid.nx / 2;
    Ok((0..grid.ny)
        .map(|j| snapshot.data()[(offset + grid.index(i, j), column)])
        .collect())
}
