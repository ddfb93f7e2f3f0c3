//! Independent numerical oracles for the closed-form spectral results.
//!
//! Nothing here calls the closed-form coefficient code: Jacobians, the
//! characteristic determinant and the Turing quantities are re-derived from
//! the kinetics so that agreement is evidence rather than tautology. The
//! closed forms are only invoked by [`run_oracle_suite`] to compare against.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delay::{char_residual, tau_star};
use crate::error::{Error, Result};
use crate::linear::{eigenvalues_no_delay, hopf_points_in_r, t_tilde0, turing_analysis, TuringVerdict};
use crate::model::{check_hypotheses, positive_equilibrium, ModelParams};
use crate::roots::golden_min;
use crate::simulator::Grid;

/// Jacobians of the kinetics at `E*` with respect to present and delayed
/// states, second row already divided by `γ`.
fn jacobians(p: &ModelParams) -> Result<([[f64; 2]; 2], [[f64; 2]; 2])> {
    let e = positive_equilibrium(p)?;
    let (r, alpha, gamma) = (p.r(), p.alpha(), p.gamma());
    let (m, a) = (e.m, e.a);
    // f₁ = m (r a_d - 1/(1 + m_d)),  f₂ = (α(1 - a) - m a)/γ.
    let now = [[r * a - 1.0 / (1.0 + m), 0.0], [-a / gamma, -(alpha + m) / gamma]];
    let delayed = [[m / ((1.0 + m) * (1.0 + m)), m * r], [0.0, 0.0]];
    Ok((now, delayed))
}

/// Rightmost `count` eigenvalues of the finite-difference linearization at
/// `E*` (τ = 0), sorted by decreasing real part.
pub fn discrete_spectrum(p: &ModelParams, grid: &Grid, count: usize) -> Result<Vec<C>> {
    if grid.is_single_point() {
        return Err(Error::InvalidParameter(
            "discrete spectrum needs a spatial grid".into(),
        ));
    }
    let (j0, j1) = jacobians(p)?;
    let np = grid.points();
    let h2 = grid.spacing().powi(2);
    let diff = [p.d(), 1.0 / p.gamma()];
    let mut a = DMatrix::<f64>::zeros(2 * np, 2 * np);
    for s in 0..2 {
        for i in 0..np {
            let row = s * np + i;
            for t in 0..2 {
                a[(row, t * np + i)] += j0[s][t] + j1[s][t];
            }
            let c = diff[s] / h2;
            a[(row, row)] -= 2.0 * c;
            match i {
                0 => a[(row, row + 1)] += 2.0 * c,
                i if i == np - 1 => a[(row, row - 1)] += 2.0 * c,
                _ => {
                    a[(row, row - 1)] += c;
                    a[(row, row + 1)] += c;
                }
            }
        }
    }
    let mut eig: Vec<C> = a.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    eig.truncate(count);
    Ok(eig)
}

/// Largest relative distance from each delay-free closed-form root of modes
/// `0..=n_max` to its nearest discrete eigenvalue.
pub fn spectrum_mismatch(p: &ModelParams, grid: &Grid, n_max: usize) -> Result<f64> {
    let disc = discrete_spectrum(p, grid, 2 * grid.points())?;
    let mut worst: f64 = 0.0;
    for n in 0..=n_max {
        let (l1, l2) = eigenvalues_no_delay(p, n)?;
        for l in [l1, l2] {
            let nearest = disc.iter().map(|z| (z - l).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest / l.norm().max(1e-300));
        }
    }
    Ok(worst)
}

/// `det(λI - J₀ - J₁e^{-λτ} + k² diag(d, 1/γ))` and its `λ`-derivative by
/// Jacobi's formula.
struct Determinant {
    j0: [[f64; 2]; 2],
    j1: [[f64; 2]; 2],
    diff: [f64; 2],
}

impl Determinant {
    fn new(p: &ModelParams, n: usize) -> Result<Self> {
        let (j0, j1) = jacobians(p)?;
        let k2 = p.wave_number_sq(n);
        Ok(Self {
            j0,
            j1,
            diff: [k2 * p.d(), k2 / p.gamma()],
        })
    }

    fn eval(&self, lambda: C, tau: f64) -> (C, C) {
        let ex = (-lambda * tau).exp();
        let mut a = [[C::new(0.0, 0.0); 2]; 2];
        let mut da = [[C::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let eye = if i == j { 1.0 } else { 0.0 };
                a[i][j] = eye * (lambda + self.diff[i]) - self.j0[i][j] - self.j1[i][j] * ex;
                da[i][j] = C::new(eye, 0.0) + tau * self.j1[i][j] * ex;
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        // tr(adj(A) A').
        let ddet = a[1][1] * da[0][0] - a[0][1] * da[1][0] - a[1][0] * da[0][1] + a[0][0] * da[1][1];
        (det, ddet)
    }

    fn newton(&self, start: C, tau: f64) -> Option<C> {
        let mut lam = start;
        for _ in 0..50 {
            let (f, df) = self.eval(lam, tau);
            if df.norm() == 0.0 {
                return None;
            }
            let step = f / df;
            lam -= step;
            if !lam.re.is_finite() || !lam.im.is_finite() {
                return None;
            }
            if step.norm() <= 1e-14 * (1.0 + lam.norm()) {
                let (f, _) = self.eval(lam, tau);
                return (f.norm() < 1e-10).then_some(lam);
            }
        }
        None
    }

    /// Newton from seeds lifted off the real axis. A real seed keeps complex
    /// Newton on the axis, so after two real roots collide and leave it as a
    /// conjugate pair the upper member is only reachable this way.
    fn off_axis(&self, seed: C, tau: f64) -> Option<C> {
        let scale = 1.0 + seed.norm();
        if seed.im.abs() > 1e-12 * scale {
            return None;
        }
        [1e-3, 1e-2, 1e-1]
            .iter()
            .find_map(|&h| self.newton(C::new(seed.re, h * scale), tau))
    }

    /// Newton continuation from `(start, tau0)` to `tau1`, subdividing on failure.
    fn continue_to(&self, start: C, tau0: f64, tau1: f64) -> Option<C> {
        let mut pieces = 1usize;
        while pieces <= 1 << 12 {
            let mut lam = start;
            let mut ok = true;
            for k in 1..=pieces {
                let tau = tau0 + (tau1 - tau0) * k as f64 / pieces as f64;
                match self.newton(lam, tau).or_else(|| self.off_axis(lam, tau)) {
                    Some(next) => lam = next,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Some(lam);
            }
            pieces *= 2;
        }
        None
    }
}

/// Root of the delay-free quadratic with the larger imaginary part, from the
/// 2×2 Jacobian directly.
pub fn delay_free_root(p: &ModelParams, n: usize) -> Result<C> {
    let det = Determinant::new(p, n)?;
    let m = |i: usize, j: usize| det.j0[i][j] + det.j1[i][j] - if i == j { det.diff[i] } else { 0.0 };
    let tr = m(0, 0) + m(1, 1);
    let dt = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    let disc = C::new(tr * tr - 4.0 * dt, 0.0).sqrt();
    let (a, b) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    Ok(if a.im >= b.im { a } else { b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackCrossing {
    pub tau: f64,
    pub lambda: C,
    /// `d Re λ / dτ` by central differences of polished roots.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootTrack {
    pub mode: usize,
    pub tau_values: Vec<f64>,
    pub roots: Vec<C>,
    pub converged: Vec<bool>,
    /// `|Δₙ(λ, τ)|` of the closed-form characteristic function at each root.
    pub residuals: Vec<f64>,
    pub crossings: Vec<TrackCrossing>,
}

/// Follows a characteristic root of mode `n` from `(start, tau_from)` across
/// `steps` equal increments to `tau_to`; sign changes of `Re λ` are bisected to 1e-10.
pub fn newton_track_root(
    p: &ModelParams,
    n: usize,
    tau_from: f64,
    tau_to: f64,
    steps: usize,
    start: C,
) -> Result<RootTrack> {
    if steps == 0 || !(tau_to >= tau_from) || tau_from < 0.0 {
        return Err(Error::InvalidParameter(
            "need 0 <= tau_from <= tau_to and steps >= 1".into(),
        ));
    }
    let det = Determinant::new(p, n)?;
    let first = det
        .newton(start, tau_from)
        .ok_or_else(|| Error::Numerical("starting root did not converge".into()))?;
    let mut track = RootTrack {
        mode: n,
        tau_values: vec![tau_from],
        roots: vec![first],
        converged: vec![true],
        residuals: vec![char_residual(p, n, first, tau_from)?.norm()],
        crossings: Vec::new(),
    };
    let (mut last_tau, mut last_root) = (tau_from, first);
    for k in 1..=steps {
        let tau = tau_from + (tau_to - tau_from) * k as f64 / steps as f64;
        track.tau_values.push(tau);
        match det.continue_to(last_root, last_tau, tau) {
            Some(lam) => {
                if last_root.re.signum() != lam.re.signum() && last_root.re != 0.0 {
                    track
                        .crossings
                        .push(bisect_crossing(&det, last_tau, last_root, tau)?);
                }
                track.roots.push(lam);
                track.converged.push(true);
                track.residuals.push(char_residual(p, n, lam, tau)?.norm());
                last_tau = tau;
                last_root = lam;
            }
            None => {
                track.roots.push(C::new(f64::NAN, f64::NAN));
                track.converged.push(false);
                track.residuals.push(f64::NAN);
            }
        }
    }
    Ok(track)
}

fn bisect_crossing(det: &Determinant, mut lo: f64, mut lo_root: C, hi: f64) -> Result<TrackCrossing> {
    let lo_sign = lo_root.re.signum();
    let mut hi = hi;
    let fail = || Error::Numerical("root lost while bisecting a crossing".into());
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let root = det.continue_to(lo_root, lo, mid).ok_or_else(fail)?;
        if root.re.signum() == lo_sign {
            lo = mid;
            lo_root = root;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let lambda = det.continue_to(lo_root, lo, tau).ok_or_else(fail)?;
    let h = 1e-6;
    let plus = det.continue_to(lambda, tau, tau + h).ok_or_else(fail)?;
    let minus = det.continue_to(lambda, tau, tau - h).ok_or_else(fail)?;
    Ok(TrackCrossing {
        tau,
        lambda,
        slope: (plus.re - minus.re) / (2.0 * h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Turing-stable, below the Turing band in `r`.
    #[serde(rename = "T_a")]
    Ta,
    /// Turing-unstable.
    #[serde(rename = "T_b")]
    Tb,
    /// Turing-stable, above the band with `g < 0`.
    #[serde(rename = "T_c")]
    Tc,
    /// `g >= 0`.
    #[serde(rename = "T_d")]
    Td,
    #[serde(rename = "non-H1")]
    NonH1,
    /// The homogeneous mode is already unstable at `τ = 0`.
    #[serde(rename = "hopf-unstable")]
    HopfUnstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub alphas: Vec<f64>,
    pub rs: Vec<f64>,
    /// Row-major by `alpha`, then `r`.
    pub cells: Vec<Region>,
}

impl RegionMap {
    pub fn get(&self, i_alpha: usize, j_r: usize) -> Region {
        self.cells[i_alpha * self.rs.len() + j_r]
    }
}

/// `(T̃₀, g, D̃₀)` re-derived from the equilibrium.
fn turing_signs(alpha: f64, r: f64, d: f64, gamma: f64) -> (f64, f64, f64) {
    let m = alpha * (r - 1.0) / (1.0 - alpha * r);
    let a = (1.0 - alpha * r) / (r * (1.0 - alpha));
    let slope = m / ((1.0 + m) * (1.0 + m));
    let t0 = (alpha + m) - gamma * slope;
    let g = d * (alpha + m) - slope;
    let d0 = alpha * r * (r - 1.0) * a;
    (t0, g, d0)
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Cell-wise classification of the `(α, r)` plane at diffusion ratio `d`.
pub fn grid_classify(
    alpha_range: (f64, f64),
    r_range: (f64, f64),
    d: f64,
    gamma: f64,
    resolution: usize,
) -> RegionMap {
    let alphas = linspace(alpha_range, resolution);
    let rs = linspace(r_range, resolution);
    let cells: Vec<Region> = alphas
        .par_iter()
        .flat_map_iter(|&alpha| {
            let h1 = |r: f64| 0.0 < alpha && alpha < 1.0 && 1.0 < r && r < 1.0 / alpha;
            // Split point between T_a and T_c: minimizer of g along the column.
            let split = if 0.0 < alpha && alpha < 1.0 {
                let (lo, hi) = (1.0, 1.0 / alpha);
                let eps = (hi - lo) * 1e-9;
                golden_min(|r| turing_signs(alpha, r, d, gamma).1, lo + eps, hi - eps, 1e-12).0
            } else {
                f64::NAN
            };
            rs.iter()
                .map(|&r| {
                    if !h1(r) {
                        return Region::NonH1;
                    }
                    let (t0, g, d0) = turing_signs(alpha, r, d, gamma);
                    if !(t0 > 0.0) {
                        return Region::HopfUnstable;
                    }
                    if g >= 0.0 {
                        return Region::Td;
                    }
                    // Vertex of D̃(k²) = d k⁴ + g k² + D̃₀.
                    let min_d = d0 - g * g / (4.0 * d);
                    if min_d < 0.0 {
                        Region::Tb
                    } else if r < split {
                        Region::Ta
                    } else {
                        Region::Tc
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    RegionMap { alphas, rs, cells }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    /// Measured discrepancy (or observed quantity) compared against `tolerance`.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, result: Result<(f64, f64, String)>, pass: impl Fn(f64, f64) -> bool) -> OracleCheck {
    match result {
        Ok((value, tol, detail)) => OracleCheck {
            name: name.into(),
            passed: pass(value, tol),
            value: Some(value),
            tolerance: Some(tol),
            detail,
        },
        Err(e) => OracleCheck {
            name: name.into(),
            passed: false,
            value: None,
            tolerance: None,
            detail: e.to_string(),
        },
    }
}

/// Every closed form against its oracle for one parameter set.
pub fn run_oracle_suite(p: &ModelParams, grid_points: usize) -> OracleReport {
    let below = |v: f64, tol: f64| v <= tol;
    let mut checks = Vec::new();

    checks.push(check(
        "discrete spectrum vs delay-free roots (n <= 4)",
        Grid::new(grid_points, p.l()).and_then(|g| {
            let mis = spectrum_mismatch(p, &g, 4)?;
            Ok((mis, 1e-3, format!("N = {grid_points}")))
        }),
        below,
    ));

    checks.push(check(
        "discrete spectrum refinement order",
        (|| {
            let n = (grid_points / 2).max(16);
            let e1 = spectrum_mismatch(p, &Grid::new(n, p.l())?, 4)?;
            let e2 = spectrum_mismatch(p, &Grid::new(2 * n, p.l())?, 4)?;
            Ok(((e1 / e2).log2(), 1.8, format!("N = {n} -> {}", 2 * n)))
        })(),
        |v, tol| v >= tol,
    ));

    let hyp = check_hypotheses(p);
    if hyp.all() {
        let track = (|| {
            let ts = tau_star(p, None, 0)?;
            let start = delay_free_root(p, ts.n0)?;
            let tr = newton_track_root(p, ts.n0, 0.0, ts.tau + 0.5, 200, start)?;
            let cross = tr
                .crossings
                .first()
                .copied()
                .ok_or_else(|| Error::Numerical("tracked root never crossed".into()))?;
            Ok((ts, cross))
        })();
        checks.push(check(
            "Newton-tracked crossing vs tau*",
            track.clone().map(|(ts, c)| {
                (
                    (c.tau - ts.tau).abs(),
                    1e-6,
                    format!("track {:.10}, closed form {:.10}", c.tau, ts.tau),
                )
            }),
            below,
        ));
        checks.push(check(
            "crossing slope vs transversality",
            track.map(|(ts, c)| {
                let closed = ts.hopf_point().dlambda_dtau.re;
                let rel = ((c.slope - closed) / closed).abs();
                let value = if c.slope > 0.0 { rel } else { f64::INFINITY };
                (
                    value,
                    0.05,
                    format!("oracle slope {:.6e}, closed form {:.6e}", c.slope, closed),
                )
            }),
            below,
        ));
        checks.push(check(
            "critical-delay residuals",
            (|| {
                let ts = tau_star(p, None, 3)?;
                let mut worst: f64 = 0.0;
                for m in ts.modes.iter().filter(|m| m.in_s0) {
                    for hp in &m.delays {
                        worst = worst.max(char_residual(p, m.n, C::new(0.0, hp.omega), hp.tau_crit)?.norm());
                    }
                }
                Ok((worst, 1e-10, format!("S0 = {:?}", ts.s0)))
            })(),
            below,
        ));
    } else {
        checks.push(OracleCheck {
            name: "delay oracles".into(),
            passed: true,
            value: None,
            tolerance: None,
            detail: "skipped: (H1)-(H3) do not all hold".into(),
        });
    }

    checks.push(check(
        "Hopf points in r vs trace identity",
        (|| {
            let pts = hopf_points_in_r(p.alpha(), p.gamma())?;
            let worst = pts
                .iter()
                .map(|h| t_tilde0(p.alpha(), p.gamma(), h.r).abs())
                .fold(0.0, f64::max);
            Ok((worst, 1e-9, format!("{} points", pts.len())))
        })(),
        below,
    ));

    if hyp.h1 && hyp.h2 {
        checks.push(check(
            "Turing verdict vs dense wave-number scan",
            (|| {
                let rep = turing_analysis(p, 50)?;
                let brute = dense_min_dispersion(p)?;
                let agree = (rep.verdict == TuringVerdict::TuringUnstable) == (brute < 0.0);
                let diff = (rep.min_mode_value - brute).abs();
                Ok((
                    if agree { diff } else { f64::INFINITY },
                    1e-8,
                    format!("min {brute:.6e}"),
                ))
            })(),
            below,
        ));
    }
    OracleReport { checks }
}

/// Minimum of `D̃(k²)` over `k² ∈ [0, 10³]`, by dense sampling refined locally.
pub fn dense_min_dispersion(p: &ModelParams) -> Result<f64> {
    let (_, g, d0) = turing_signs(p.alpha(), p.r(), p.d(), p.gamma());
    positive_equilibrium(p)?;
    let d = p.d();
    let f = |k2: f64| (d * k2 + g) * k2 + d0;
    let n = 200_000;
    let step = 1000.0 / n as f64;
    let (mut best_k, mut best) = (0.0, f(0.0));
    for i in 1..=n {
        let k2 = step * i as f64;
        let v = f(k2);
        if v < best {
            best = v;
            best_k = k2;
        }
    }
    let (lo, hi) = ((best_k - step).max(0.0), (best_k + step).min(1000.0));
    let (_, refined) = golden_min(f, lo, hi, 1e-12);
    Ok(best.min(refined))
}
