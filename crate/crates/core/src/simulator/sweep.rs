use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{detect_orbit, simulate_ode_with, SimOptions};
use crate::model::{positive_equilibrium, ModelParams};

/// Relative offset of the starting mussel density from `m*`.
pub const SWEEP_KICK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub oscillating: bool,
    pub m_min: Option<f64>,
    pub m_max: Option<f64>,
    pub period: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn amplitude(&self) -> Option<f64> {
        Some(self.m_max? - self.m_min?)
    }
}

/// Kinetic runs over `r_values` from `(m*(1 + kick), a*)`; each row reports
/// the post-transient extrema of `m` and whether the run settled onto an
/// orbit. Failures are recorded per row.
pub fn amplitude_sweep(p_base: &ModelParams, r_values: &[f64], t_end: f64, dt: f64) -> Vec<SweepRow> {
    r_values
        .par_iter()
        .map(|&r| {
            let run = || -> crate::Result<SweepRow> {
                let p = p_base.with_r(r)?;
                let e = positive_equilibrium(&p)?;
                let mut opts = SimOptions::new(t_end, dt);
                opts.record_interval = Some(t_end);
                opts.monitor_every = ((0.05 / dt).round() as usize).max(1);
                let traj = simulate_ode_with(&p, e.m * (1.0 + SWEEP_KICK), e.a, opts)?;
                let orbit = detect_orbit(&traj, 0.5);
                Ok(SweepRow {
                    r,
                    oscillating: orbit.is_periodic,
                    m_min: Some(orbit.amplitude_m.0),
                    m_max: Some(orbit.amplitude_m.1),
                    period: orbit.period,
                    error: None,
                })
            };
            run().unwrap_or_else(|e| SweepRow {
                r,
                oscillating: false,
                m_min: None,
                m_max: None,
                period: None,
                error: Some(e.to_string()),
            })
        })
        .collect()
}
