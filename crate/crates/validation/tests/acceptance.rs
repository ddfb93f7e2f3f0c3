//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};

use mussel_bif::delay::{critical_delays, delay_char_coeffs, tau_star};
use mussel_bif::linear::{char_coeffs_no_delay, hopf_points_in_r, turing_analysis, TuringVerdict};
use mussel_bif::model::{check_hypotheses, positive_equilibrium};
use mussel_bif::normal_form::{
    eigenpair, hopf_coefficients, pairing, Direction, LinearBlocks, OrbitStability,
};
use mussel_bif::simulator::{
    amplitude_sweep, cosine_history, detect_orbit, integrate, simulate_ode, simulate_pde, Grid, SimOptions,
};
use mussel_bif::verification::{delay_free_root, dense_min_dispersion, newton_track_root, spectrum_mismatch};
use mussel_bif::{Equilibrium, ModelParams};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Check = (bool, String);

fn reference(tau: f64) -> ModelParams {
    ModelParams::new(2.0, 0.1, 0.5, 1.0, tau, 1.0).unwrap()
}

fn all(parts: Vec<(bool, String)>) -> Check {
    let ok = parts.iter().all(|p| p.0);
    let detail = parts
        .into_iter()
        .map(|(ok, s)| format!("{}{}", if ok { "" } else { "[x] " }, s))
        .collect::<Vec<_>>()
        .join("; ");
    (ok, detail)
}

fn equilibrium() -> Check {
    let e = positive_equilibrium(&reference(0.0)).unwrap();
    all(vec![(
        (e.m - 0.1250).abs() < 1e-4 && (e.a - 0.4444).abs() < 1e-4,
        format!("E* = ({:.6}, {:.6})", e.m, e.a),
    )])
}

fn crossing() -> Check {
    let ts = tau_star(&reference(0.0), None, 0).unwrap();
    all(vec![
        (
            (ts.omega - 0.3253).abs() < 1e-3,
            format!("omega0 = {:.6}", ts.omega),
        ),
        ((ts.tau - 2.3545).abs() < 1e-3, format!("tau* = {:.6}", ts.tau)),
        (ts.s0 == vec![0], format!("S0 = {:?}", ts.s0)),
    ])
}

fn normal_form() -> Check {
    let h = hopf_coefficients(&reference(0.0)).unwrap();
    let want = C::new(-2.28261, -23.9865);
    let re = ((h.c1.re - want.re) / want.re).abs();
    let im = ((h.c1.im - want.im) / want.im).abs();
    all(vec![
        (
            re < 0.01,
            format!("Re c1 = {:.6} ({:.2}% off)", h.c1.re, 100.0 * re),
        ),
        (
            im < 0.01,
            format!("Im c1 = {:.6} ({:.2}% off)", h.c1.im, 100.0 * im),
        ),
        (h.beta2 < 0.0, format!("beta2 = {:.6}", h.beta2)),
        (h.mu2 > 0.0, format!("mu2 = {:.6}", h.mu2)),
        (
            h.direction == Direction::Forward && h.orbit_stability == OrbitStability::Stable,
            format!("{:?}/{:?}", h.direction, h.orbit_stability),
        ),
    ])
}

fn hopf_window() -> Check {
    let pts = hopf_points_in_r(0.45, 8.0).unwrap();
    let rs: Vec<f64> = pts.iter().map(|p| p.r).collect();
    let ok = rs.len() == 2 && (rs[0] - 1.0865).abs() < 1e-3 && (rs[1] - 1.7286).abs() < 1e-3;
    all(vec![(ok, format!("r_H = {rs:.6?}"))])
}

fn oracles() -> Check {
    let p = reference(0.0);
    let ts = tau_star(&p, None, 0).unwrap();
    let start = delay_free_root(&p, 0).unwrap();
    let track = newton_track_root(&p, 0, 0.0, ts.tau + 0.5, 200, start).unwrap();
    let cross = track.crossings.first().map(|c| c.tau).unwrap_or(f64::NAN);
    let coarse = spectrum_mismatch(&p, &Grid::new(100, 1.0).unwrap(), 4).unwrap();
    let fine = spectrum_mismatch(&p, &Grid::new(200, 1.0).unwrap(), 4).unwrap();
    let order = (coarse / fine).log2();
    all(vec![
        (
            (cross - ts.tau).abs() < 1e-6,
            format!("tracked crossing {cross:.10} vs tau* {:.10}", ts.tau),
        ),
        (fine < 1e-3, format!("spectrum mismatch at N=200: {fine:.3e}")),
        (order > 1.8, format!("refinement order {order:.3}")),
    ])
}

fn dichotomy() -> Check {
    let base = reference(0.0);
    let e = positive_equilibrium(&base).unwrap();
    let grid = Grid::new(128, 1.0).unwrap();
    let omega0 = tau_star(&base, None, 0).unwrap().omega;
    let stable = simulate_pde(&reference(2.0), cosine_history(e, 0.1, 2.0), grid, 400.0, 0.01).unwrap();
    let dev = stable.final_deviation(&e);
    let orbit_run = simulate_pde(&reference(3.6), cosine_history(e, 0.1, 2.0), grid, 600.0, 0.01).unwrap();
    let orbit = detect_orbit(&orbit_run, 0.5);
    let linear_period = TAU / omega0;
    let period = orbit.period.unwrap_or(f64::NAN);
    let rel = ((period - linear_period) / linear_period).abs();
    all(vec![
        (dev < 1e-3, format!("tau=2 final deviation {dev:.3e}")),
        (
            orbit.is_periodic,
            format!("tau=3.6 periodic: {}", orbit.is_periodic),
        ),
        (
            orbit.spatial_inhomogeneity < 1e-3,
            format!("inhomogeneity {:.3e}", orbit.spatial_inhomogeneity),
        ),
        (
            rel < 0.15,
            format!(
                "period {period:.4} vs 2pi/omega0 = {linear_period:.4} ({:.1}% off)",
                100.0 * rel
            ),
        ),
    ])
}

fn boundary_attraction() -> Check {
    let p = ModelParams::new(0.5, 0.1, 0.5, 1.0, 2.0, 1.0).unwrap();
    let e = Equilibrium { m: 0.125, a: 0.4444 };
    let traj = simulate_pde(
        &p,
        cosine_history(e, 0.1, 2.0),
        Grid::new(128, 1.0).unwrap(),
        400.0,
        0.01,
    )
    .unwrap();
    let dev = traj.final_deviation(&Equilibrium::BOUNDARY);
    all(vec![(dev < 1e-3, format!("deviation from (0, 1): {dev:.3e}"))])
}

fn bounds_and_lyapunov() -> Check {
    let p = ModelParams::new(0.8, 0.5, 8.0, 1.0, 0.0, 1.0).unwrap();
    let traj = simulate_ode(&p, 3.0, 0.2, 400.0, 0.01).unwrap();
    let half = traj.monitor.times.len() / 2;
    let limsup = traj.monitor.max_m[half..]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);

    let q = ModelParams::new(0.4, 0.5, 0.5, 1.0, 0.0, 1.0).unwrap();
    let grid = Grid::new(128, 1.0).unwrap();
    let mut opts = SimOptions::new(100.0, 0.01);
    opts.record_interval = Some(0.1);
    let run = integrate(
        &q,
        |x, _| (1.5 + 0.1 * (2.0 * x).cos(), 0.5 - 0.1 * (2.0 * x).cos()),
        grid,
        opts,
    )
    .unwrap();
    let t2 = run
        .times
        .iter()
        .zip(&run.fields_m)
        .find(|(_, m)| m.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < 1.0)
        .map(|(t, _)| *t);
    let series = run.lyapunov_series().unwrap();
    let worst_rise = match t2 {
        Some(t2) => series
            .windows(2)
            .filter(|w| w[0].0 >= t2)
            .map(|w| w[1].1 - w[0].1)
            .fold(f64::NEG_INFINITY, f64::max),
        None => f64::INFINITY,
    };
    all(vec![
        (limsup <= 1.0 + 1e-3, format!("limsup m = {limsup:.6}")),
        (
            worst_rise <= 1e-6,
            format!("t2 = {t2:?}, largest V increase after t2 = {worst_rise:.3e}"),
        ),
    ])
}

fn branch_window() -> Check {
    let base = ModelParams::new(1.2, 0.45, 8.0, 1.0, 0.0, 1.0).unwrap();
    let (r1, r2) = (1.0865, 1.7286);
    let rs: Vec<f64> = (0..=110)
        .map(|i| 1.01 + 0.01 * i as f64)
        .filter(|r| *r < 1.0 / 0.45)
        .collect();
    let rows = amplitude_sweep(&base, &rs, 3000.0, 0.01);
    let mut wrong = Vec::new();
    for row in &rows {
        let inside = row.r > r1 + 0.02 && row.r < r2 - 0.02;
        let outside = row.r < r1 - 0.02 || row.r > r2 + 0.02;
        if (inside && !row.oscillating) || (outside && row.oscillating) || row.error.is_some() {
            wrong.push(row.r);
        }
    }
    let detected: Vec<f64> = rows.iter().filter(|r| r.oscillating).map(|r| r.r).collect();
    let span = (
        detected.first().copied().unwrap_or(f64::NAN),
        detected.last().copied().unwrap_or(f64::NAN),
    );
    all(vec![(
        wrong.is_empty(),
        format!(
            "oscillation detected on [{:.2}, {:.2}] over {} samples; misclassified {wrong:?}",
            span.0,
            span.1,
            rows.len()
        ),
    )])
}

fn h123_draw(rng: &mut ChaCha8Rng) -> ModelParams {
    loop {
        let alpha = rng.gen_range(0.02..0.95);
        let r = 1.0 + rng.gen_range(0.02..0.98) * (1.0 / alpha - 1.0);
        let p = ModelParams::new(
            r,
            alpha,
            rng.gen_range(0.05..5.0),
            rng.gen_range(0.005..2.0),
            0.0,
            rng.gen_range(0.5..4.0),
        )
        .unwrap();
        if check_hypotheses(&p).all() {
            return p;
        }
    }
}

fn properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut identity = 0.0f64;
    let mut norm_err = 0.0f64;
    let mut residual = 0.0f64;
    for _ in 0..100 {
        let p = h123_draw(&mut rng);
        for n in 0..10 {
            let c = delay_char_coeffs(&p, n).unwrap();
            let c0 = char_coeffs_no_delay(&p, n).unwrap();
            let sc = 1.0 + c.t_n.abs() + c.b.abs();
            let sd = 1.0 + c.d_n.abs() + c.m_n.abs();
            identity = identity.max((c.t_n + c.b - c0.t_tilde).abs() / sc);
            identity = identity.max((c.d_n + c.m_n - c0.d_tilde).abs() / sd);
        }
        let ts = tau_star(&p, None, 2).unwrap();
        for m in ts.modes.iter().filter(|m| m.in_s0) {
            let c = delay_char_coeffs(&p, m.n).unwrap();
            for hp in critical_delays(&p, m.n, 2).unwrap() {
                let lam = C::new(0.0, hp.omega);
                let res = c.residual(p.gamma(), lam, hp.tau_crit).norm();
                let scale = 1.0 + p.gamma() * hp.omega.powi(2) + c.t_n * hp.omega + c.m_n.abs() + c.d_n;
                residual = residual.max(res / scale);
            }
        }
        let ep = eigenpair(&p, ts.n0, ts.omega, ts.tau).unwrap();
        let e = positive_equilibrium(&p).unwrap();
        let b = LinearBlocks::new(&p, &e);
        let wt = C::new(0.0, ep.omega_tau());
        let q = ep.q();
        let qb = [q[0].conj(), q[1].conj()];
        let one = pairing(&b, ep.tau_star, &ep.q_star(), -wt, &q, wt);
        let zero = pairing(&b, ep.tau_star, &ep.q_star(), -wt, &qb, -wt);
        norm_err = norm_err.max((one - 1.0).norm()).max(zero.norm());
    }

    let mut mismatched = 0;
    let mut drawn = 0;
    while drawn < 100 {
        let alpha = rng.gen_range(0.02..0.95);
        let r = 1.0 + rng.gen_range(0.01..0.99) * (1.0 / alpha - 1.0);
        let p = ModelParams::new(
            r,
            alpha,
            rng.gen_range(0.05..5.0),
            rng.gen_range(0.001..0.2),
            0.0,
            1.0,
        )
        .unwrap();
        let hyp = check_hypotheses(&p);
        if !(hyp.h1 && hyp.h2) {
            continue;
        }
        drawn += 1;
        let verdict = turing_analysis(&p, 50).unwrap().verdict;
        let brute = dense_min_dispersion(&p).unwrap() < 0.0;
        if (verdict == TuringVerdict::TuringUnstable) != brute {
            mismatched += 1;
        }
    }
    all(vec![
        (identity < 1e-12, format!("delay-free identities {identity:.2e}")),
        (norm_err < 1e-10, format!("normalization {norm_err:.2e}")),
        (residual < 1e-10, format!("crossing residuals {residual:.2e}")),
        (
            mismatched == 0,
            format!("Turing verdict mismatches {mismatched}/100"),
        ),
    ])
}

fn main() {
    let criteria: Vec<(u8, &str, fn() -> Check)> = vec![
        (1, "equilibrium", equilibrium),
        (2, "crossing frequency and critical delay", crossing),
        (3, "normal form", normal_form),
        (4, "ODE Hopf window", hopf_window),
        (5, "oracle equivalence", oracles),
        (6, "behavioral dichotomy", dichotomy),
        (7, "boundary attraction", boundary_attraction),
        (8, "boundedness and Lyapunov", bounds_and_lyapunov),
        (9, "branch window", branch_window),
        (10, "property suites", properties),
    ];
    let results: Vec<(u8, &str, Check, f64)> = criteria
        .par_iter()
        .map(|&(id, name, f)| {
            let start = std::time::Instant::now();
            let check = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| (false, "panicked".to_string()));
            (id, name, check, start.elapsed().as_secs_f64())
        })
        .collect();
    let mut failed = 0;
    for (id, name, (ok, detail), secs) in &results {
        println!(
            "ACCEPTANCE {id:>2} {} {name} ({secs:.1}s): {detail}",
            if *ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
