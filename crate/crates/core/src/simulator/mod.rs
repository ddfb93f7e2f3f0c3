//! Method-of-lines integration of the delayed reaction–diffusion system.
//!
//! Space: second-order central differences on `N + 1` nodes of `[0, lπ]`
//! with mirrored ghost points for the Neumann condition. Time: Crank–Nicolson
//! for diffusion and second-order Adams–Bashforth for reaction (CNAB2). The
//! step is snapped so that `τ = K dt` exactly and delayed states are read
//! from a ring buffer of past steps, never interpolated.

mod export;
mod orbit;
mod sweep;

pub use export::{write_binary, write_csv, write_heatmap, write_plot_script, write_timeseries, BINARY_MAGIC};
pub use orbit::{
    detect_orbit, detect_orbit_with, estimate_period, OrbitOptions, OrbitSummary, PeriodEstimate,
};
pub use sweep::{amplitude_sweep, SweepRow};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{reaction_rhs, Equilibrium, ModelParams};

/// Fields above this magnitude abort the run.
pub const BLOW_UP: f64 = 1e6;
/// Fields below this value abort the run (no clipping).
pub const NEGATIVE_TOL: f64 = -1e-10;
pub const MIN_INTERVALS: usize = 16;

/// Uniform grid on `[0, lπ]`, or a single node for the kinetic (ODE) reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    intervals: usize,
    h: f64,
    l: f64,
}

impl Grid {
    pub fn new(intervals: usize, l: f64) -> Result<Self> {
        if intervals < MIN_INTERVALS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_INTERVALS} intervals, got {intervals}"
            )));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("l must be > 0, got {l}")));
        }
        Ok(Self {
            intervals,
            h: l * PI / intervals as f64,
            l,
        })
    }

    /// One node standing for a spatially homogeneous state on `(0, lπ)`.
    pub fn single_point(l: f64) -> Self {
        Self {
            intervals: 0,
            h: l * PI,
            l,
        }
    }

    pub fn is_single_point(&self) -> bool {
        self.intervals == 0
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn points(&self) -> usize {
        self.intervals + 1
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn x(&self, i: usize) -> f64 {
        if self.is_single_point() {
            0.0
        } else if i == self.intervals {
            self.l * PI
        } else {
            self.h * i as f64
        }
    }

    /// Trapezoid weights; a single node carries the whole domain length.
    pub fn weight(&self, i: usize) -> f64 {
        if self.is_single_point() {
            self.h
        } else if i == 0 || i == self.intervals {
            0.5 * self.h
        } else {
            self.h
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(i, v)| self.weight(i) * v).sum()
    }
}

/// Local kinetics, diffusion coefficients and delay of a two-species system
/// `u_t = c_u Δu + f(u(t), u(t-τ))`.
pub trait DelaySystem: Sync {
    /// Reaction rates from present and delayed states.
    fn rates(&self, m: f64, a: f64, m_delayed: f64, a_delayed: f64) -> (f64, f64);
    /// Diffusion coefficients of the two species.
    fn diffusion(&self) -> (f64, f64);
    fn delay(&self) -> f64;
    /// Whether the stepper should reject negative values.
    fn positive(&self) -> bool {
        true
    }
}

impl DelaySystem for ModelParams {
    fn rates(&self, m: f64, a: f64, m_delayed: f64, a_delayed: f64) -> (f64, f64) {
        reaction_rhs(m, a, m_delayed, a_delayed, self)
    }

    fn diffusion(&self) -> (f64, f64) {
        (self.d(), 1.0 / self.gamma())
    }

    fn delay(&self) -> f64 {
        self.tau()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub t_end: f64,
    /// Requested step; reduced to `τ/⌈τ/dt⌉` when `τ > 0`.
    pub dt: f64,
    /// Spacing of stored full-field frames (defaults to `t_end/2000`, at least one step).
    pub record_interval: Option<f64>,
    /// Steps between monitor samples (spatial statistics).
    pub monitor_every: usize,
}

impl SimOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self {
            t_end,
            dt,
            record_interval: None,
            monitor_every: 1,
        }
    }
}

/// Step actually used for a requested `dt` and delay `tau`, and the delay in steps.
pub fn snap_step(dt: f64, tau: f64) -> (f64, usize) {
    if tau > 0.0 {
        let k = (tau / dt).ceil().max(1.0) as usize;
        (tau / k as f64, k)
    } else {
        (dt, 0)
    }
}

/// Per-step spatial statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Monitor {
    pub times: Vec<f64>,
    pub mean_m: Vec<f64>,
    pub mean_a: Vec<f64>,
    pub min_m: Vec<f64>,
    pub max_m: Vec<f64>,
    pub min_a: Vec<f64>,
    pub max_a: Vec<f64>,
    /// Largest of `std/mean` over the two species.
    pub inhomogeneity: Vec<f64>,
}

impl Monitor {
    fn push(&mut self, t: f64, grid: &Grid, m: &[f64], a: &[f64]) {
        let len = grid.l() * PI;
        let stats = |u: &[f64]| {
            let mean = grid.integrate(u) / len;
            let var = u
                .iter()
                .enumerate()
                .map(|(i, v)| grid.weight(i) * (v - mean).powi(2))
                .sum::<f64>()
                / len;
            let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            let rel = if mean.abs() > 0.0 {
                var.sqrt() / mean.abs()
            } else {
                0.0
            };
            (mean, lo, hi, rel)
        };
        let (mm, lm, hm, rm) = stats(m);
        let (ma, la, ha, ra) = stats(a);
        self.times.push(t);
        self.mean_m.push(mm);
        self.mean_a.push(ma);
        self.min_m.push(lm);
        self.max_m.push(hm);
        self.min_a.push(la);
        self.max_a.push(ha);
        self.inhomogeneity.push(rm.max(ra));
    }
}

/// Stored solution of one run.
#[derive(Debug, Clone)]
pub struct Trajectory<S = ModelParams> {
    pub params: S,
    pub grid: Grid,
    /// Step actually used.
    pub dt: f64,
    pub times: Vec<f64>,
    pub fields_m: Vec<Vec<f64>>,
    pub fields_a: Vec<Vec<f64>>,
    pub monitor: Monitor,
    /// Supremum of the initial `a` over the history window.
    pub initial_a_sup: f64,
}

impl<S> Trajectory<S> {
    pub fn final_state(&self) -> (&[f64], &[f64]) {
        (
            self.fields_m.last().expect("at least one frame"),
            self.fields_a.last().expect("at least one frame"),
        )
    }

    /// Largest pointwise distance of the final state from `eq`.
    pub fn final_deviation(&self, eq: &Equilibrium) -> f64 {
        let (m, a) = self.final_state();
        m.iter()
            .map(|v| (v - eq.m).abs())
            .chain(a.iter().map(|v| (v - eq.a).abs()))
            .fold(0.0, f64::max)
    }

    /// `max a` over all monitored times against the a-priori bound `max(‖a₀‖∞, 1)`.
    pub fn a_bound_excess(&self) -> f64 {
        let bound = self.initial_a_sup.max(1.0);
        self.monitor
            .max_a
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v - bound))
    }
}

impl Trajectory<ModelParams> {
    /// `V` at every stored frame.
    pub fn lyapunov_series(&self) -> Result<Vec<(f64, f64)>> {
        self.times
            .iter()
            .zip(self.fields_m.iter().zip(&self.fields_a))
            .map(|(&t, (m, a))| Ok((t, lyapunov_value(m, a, &self.params, &self.grid)?)))
            .collect()
    }
}

/// `V(m, a) = γr∫(a - 1 - ln a) dx + ∫m dx` by the trapezoid rule.
pub fn lyapunov_value(m: &[f64], a: &[f64], p: &ModelParams, grid: &Grid) -> Result<f64> {
    if let Some(bad) = a.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "Lyapunov functional needs a > 0, found {bad}"
        )));
    }
    let integrand: Vec<f64> = m
        .iter()
        .zip(a)
        .map(|(mi, ai)| p.gamma() * p.r() * (ai - 1.0 - ai.ln()) + mi)
        .collect();
    Ok(grid.integrate(&integrand))
}

/// LU factors of `I - (dt/2) c L` for the ghost-point Neumann Laplacian `L`.
struct Tridiag {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Forward-elimination multipliers and pivots.
    mult: Vec<f64>,
    pivot: Vec<f64>,
    /// `(dt/2) c / h²`.
    nu: f64,
}

impl Tridiag {
    fn new(points: usize, nu: f64) -> Self {
        let n = points;
        let mut lower = vec![-nu; n];
        let mut upper = vec![-nu; n];
        let diag = vec![1.0 + 2.0 * nu; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        if n > 1 {
            upper[0] = -2.0 * nu;
            lower[n - 1] = -2.0 * nu;
        }
        let mut mult = vec![0.0; n];
        let mut pivot = vec![0.0; n];
        pivot[0] = diag[0];
        for i in 1..n {
            mult[i] = lower[i] / pivot[i - 1];
            pivot[i] = diag[i] - mult[i] * upper[i - 1];
        }
        Self {
            lower,
            diag,
            upper,
            mult,
            pivot,
            nu,
        }
    }

    /// `(I + (dt/2) c L) u`.
    fn explicit_half(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        if n == 1 {
            out[0] = u[0];
            return;
        }
        // Mirror of the implicit operator: 2I - A.
        for i in 0..n {
            let mut v = (2.0 - self.diag[i]) * u[i];
            if i > 0 {
                v -= self.lower[i] * u[i - 1];
            }
            if i + 1 < n {
                v -= self.upper[i] * u[i + 1];
            }
            out[i] = v;
        }
        debug_assert!(self.nu >= 0.0);
    }

    fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 1..n {
            rhs[i] -= self.mult[i] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.upper[i] * rhs[i + 1]) / self.pivot[i];
        }
    }
}

/// Integrates any [`DelaySystem`] from a history `(x, t) ↦ (m, a)` on `t ∈ [-τ, 0]`.
pub fn integrate<S, H>(sys: &S, history: H, grid: Grid, opts: SimOptions) -> Result<Trajectory<S>>
where
    S: DelaySystem + Clone,
    H: Fn(f64, f64) -> (f64, f64),
{
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_end must be > 0, got {}",
            opts.t_end
        )));
    }
    if !(opts.dt > 0.0 && opts.dt <= opts.t_end) {
        return Err(Error::InvalidParameter(format!(
            "dt must lie in (0, t_end], got {}",
            opts.dt
        )));
    }
    let tau = sys.delay();
    let (dt, k) = snap_step(opts.dt, tau);
    let steps = (opts.t_end / dt).round() as usize;
    let record_every = match opts.record_interval {
        Some(iv) if iv > 0.0 => ((iv / dt).round() as usize).max(1),
        _ => ((steps as f64 / 2000.0).round() as usize).max(1),
    };
    let monitor_every = opts.monitor_every.max(1);

    let np = grid.points();
    let xs: Vec<f64> = (0..np).map(|i| grid.x(i)).collect();
    let slots = k + 1;
    let mut ring_m = vec![vec![0.0; np]; slots];
    let mut ring_a = vec![vec![0.0; np]; slots];
    let mut initial_a_sup = f64::NEG_INFINITY;
    for j in 0..=k {
        // Slot of step index -j.
        let slot = (slots - j % slots) % slots;
        let t = -(j as f64) * dt;
        for (i, &x) in xs.iter().enumerate() {
            let (m, a) = history(x, t);
            ring_m[slot][i] = m;
            ring_a[slot][i] = a;
            initial_a_sup = initial_a_sup.max(a);
        }
    }
    check_fields(sys, 0.0, &ring_m[0], &ring_a[0])?;

    let (cm, ca) = sys.diffusion();
    let h2 = grid.spacing() * grid.spacing();
    let (nu_m, nu_a) = if grid.is_single_point() {
        (0.0, 0.0)
    } else {
        (0.5 * dt * cm / h2, 0.5 * dt * ca / h2)
    };
    let tri_m = Tridiag::new(np, nu_m);
    let tri_a = Tridiag::new(np, nu_a);

    let mut traj = Trajectory {
        params: sys.clone(),
        grid,
        dt,
        times: vec![0.0],
        fields_m: vec![ring_m[0].clone()],
        fields_a: vec![ring_a[0].clone()],
        monitor: Monitor::default(),
        initial_a_sup,
    };
    traj.monitor.push(0.0, &grid, &ring_m[0], &ring_a[0]);

    let mut rm_prev = vec![0.0; np];
    let mut ra_prev = vec![0.0; np];
    let mut rm = vec![0.0; np];
    let mut ra = vec![0.0; np];
    let mut next_m = vec![0.0; np];
    let mut next_a = vec![0.0; np];
    for step in 0..steps {
        let cur = step % slots;
        let del = (step + 1) % slots;
        for i in 0..np {
            let (fm, fa) = sys.rates(ring_m[cur][i], ring_a[cur][i], ring_m[del][i], ring_a[del][i]);
            rm[i] = fm;
            ra[i] = fa;
        }
        if step == 0 {
            rm_prev.copy_from_slice(&rm);
            ra_prev.copy_from_slice(&ra);
        }
        tri_m.explicit_half(&ring_m[cur], &mut next_m);
        tri_a.explicit_half(&ring_a[cur], &mut next_a);
        for i in 0..np {
            next_m[i] += dt * (1.5 * rm[i] - 0.5 * rm_prev[i]);
            next_a[i] += dt * (1.5 * ra[i] - 0.5 * ra_prev[i]);
        }
        tri_m.solve_in_place(&mut next_m);
        tri_a.solve_in_place(&mut next_a);
        std::mem::swap(&mut rm_prev, &mut rm);
        std::mem::swap(&mut ra_prev, &mut ra);

        let t = (step + 1) as f64 * dt;
        check_fields(sys, t, &next_m, &next_a)?;
        let slot = (step + 1) % slots;
        ring_m[slot].copy_from_slice(&next_m);
        ring_a[slot].copy_from_slice(&next_a);

        let n = step + 1;
        if n % monitor_every == 0 || n == steps {
            traj.monitor.push(t, &grid, &next_m, &next_a);
        }
        if n % record_every == 0 || n == steps {
            traj.times.push(t);
            traj.fields_m.push(next_m.clone());
            traj.fields_a.push(next_a.clone());
        }
    }
    Ok(traj)
}

fn check_fields<S: DelaySystem>(sys: &S, t: f64, m: &[f64], a: &[f64]) -> Result<()> {
    for &v in m.iter().chain(a) {
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite field at t = {t}")));
        }
        if v.abs() > BLOW_UP {
            return Err(Error::BlowUp { t, value: v.abs() });
        }
        if sys.positive() && v < NEGATIVE_TOL {
            return Err(Error::NegativeField { t, value: v });
        }
    }
    Ok(())
}

/// Delayed reaction–diffusion run with default recording.
pub fn simulate_pde<H>(p: &ModelParams, history: H, grid: Grid, t_end: f64, dt: f64) -> Result<Trajectory>
where
    H: Fn(f64, f64) -> (f64, f64),
{
    integrate(p, history, grid, SimOptions::new(t_end, dt))
}

/// Kinetic (space-free) run from a constant history `(m0, a0)`.
pub fn simulate_ode(p: &ModelParams, m0: f64, a0: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    simulate_ode_with(p, m0, a0, SimOptions::new(t_end, dt))
}

pub fn simulate_ode_with(p: &ModelParams, m0: f64, a0: f64, opts: SimOptions) -> Result<Trajectory> {
    integrate(p, |_, _| (m0, a0), Grid::single_point(p.l()), opts)
}

/// History `(m* + A cos(kx), a* - A cos(kx))`, constant in time.
pub fn cosine_history(eq: Equilibrium, amplitude: f64, k: f64) -> impl Fn(f64, f64) -> (f64, f64) {
    move |x, _| {
        let c = amplitude * (k * x).cos();
        (eq.m + c, eq.a - c)
    }
}
