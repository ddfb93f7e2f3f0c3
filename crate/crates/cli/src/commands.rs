//! One runner per subcommand. Each validates its options, computes, and only
//! then creates the output directory, so a failed run leaves no partial files.

use std::io::Write;
use std::path::Path;

use clap::Args;
use mussel_bif::delay::tau_star;
use mussel_bif::linear::{
    boundary_stability, classify_point, hopf_points_in_r, turing_analysis, turing_curve,
};
use mussel_bif::model::{check_hypotheses, positive_equilibrium};
use mussel_bif::normal_form::{normal_form_report, NormalFormReport};
use mussel_bif::numfmt::sig12;
use mussel_bif::simulator::{
    amplitude_sweep, detect_orbit, integrate, write_binary, write_csv, write_heatmap, write_plot_script,
    write_timeseries, Grid, SimOptions,
};
use mussel_bif::verification::{grid_classify, run_oracle_suite};
use mussel_bif::{Equilibrium, HypothesisReport, ModelParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::failure::{Failure, Outcome};
use crate::report::{cell, OutDir};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn require_positive(name: &str, v: f64) -> Outcome<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be finite and > 0, got {v}")))
    }
}

fn require_range(name: &str, lo: f64, hi: f64) -> Outcome<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(usage(format!(
            "--{name}-min must not exceed --{name}-max, got [{lo}, {hi}]"
        )))
    }
}

fn require_count(name: &str, n: usize) -> Outcome<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be at least 1")))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Common envelope of every structured report.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    params: ModelParams,
    hypotheses: HypothesisReport,
    result: T,
}

fn envelope<'a, T: Serialize>(command: &'a str, p: &ModelParams, result: T) -> Envelope<'a, T> {
    Envelope {
        command,
        params: *p,
        hypotheses: check_hypotheses(p),
        result,
    }
}

/// Names of report enums as they appear in JSON.
trait JsonName {
    fn name(&self) -> String;
}

impl<T: Serialize> JsonName for T {
    fn name(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

fn announce(out: &OutDir) {
    for path in out.written() {
        println!("wrote {}", path.display());
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    /// Highest spatial mode scanned.
    #[arg(long, default_value_t = 50)]
    pub n_max: usize,
}

#[derive(Serialize)]
struct Classification {
    boundary: mussel_bif::linear::BoundaryStability,
    equilibrium: Option<Equilibrium>,
    verdict: Option<mussel_bif::linear::TuringVerdict>,
    turing: Option<mussel_bif::linear::TuringReport>,
}

pub fn classify(p: &ModelParams, args: &ClassifyArgs, out: &Path) -> Outcome<()> {
    let boundary = boundary_stability(p, args.n_max);
    let hyp = check_hypotheses(p);
    let (equilibrium, verdict, turing) = if hyp.h1 {
        let e = positive_equilibrium(p)?;
        let verdict = classify_point(p, args.n_max)?;
        let turing = if hyp.h2 {
            Some(turing_analysis(p, args.n_max)?)
        } else {
            None
        };
        (Some(e), Some(verdict), turing)
    } else {
        (None, None, None)
    };
    let result = Classification {
        boundary,
        equilibrium,
        verdict,
        turing,
    };
    let report = envelope("classify", p, result);
    let mut dir = OutDir::create(out)?;
    dir.write_json("classify.json", &report)?;
    println!(
        "E0 = (0, 1): {} (rightmost {}, mode {})",
        report.result.boundary.verdict.name(),
        sig12(report.result.boundary.rightmost),
        report.result.boundary.deciding_mode
    );
    match (&report.result.equilibrium, &report.result.verdict) {
        (Some(e), Some(v)) => println!("E* = ({}, {}): {}", sig12(e.m), sig12(e.a), v.name()),
        _ => println!("E*: absent, (H1) fails"),
    }
    announce(&dir);
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct AlphaRangeArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub alpha_max: f64,
    /// Number of equally spaced alpha values.
    #[arg(long, default_value_t = 91)]
    pub resolution: usize,
}

impl AlphaRangeArgs {
    fn validate(&self) -> Outcome<()> {
        require_range("alpha", self.alpha_min, self.alpha_max)?;
        require_count("resolution", self.resolution)?;
        if !(self.alpha_min > 0.0 && self.alpha_max < 1.0) {
            return Err(usage("alpha range must lie inside (0, 1)"));
        }
        Ok(())
    }
}

fn write_curve(dir: &mut OutDir, name: &str, rows: &[(f64, f64, usize)]) -> Outcome<()> {
    dir.write_with(name, |w| {
        writeln!(w, "alpha,r,branch")?;
        for (alpha, r, branch) in rows {
            writeln!(w, "{},{},{}", sig12(*alpha), sig12(*r), branch)?;
        }
        Ok(())
    })
}

pub fn hopf_curve(p: &ModelParams, args: &AlphaRangeArgs, out: &Path) -> Outcome<()> {
    args.validate()?;
    let gamma = p.gamma();
    let per_alpha: Vec<Vec<(f64, f64, usize)>> = linspace(args.alpha_min, args.alpha_max, args.resolution)
        .par_iter()
        .map(|&alpha| {
            Ok(hopf_points_in_r(alpha, gamma)?
                .iter()
                .enumerate()
                .map(|(i, h)| (alpha, h.r, i + 1))
                .collect())
        })
        .collect::<Outcome<_>>()?;
    let rows: Vec<_> = per_alpha.into_iter().flatten().collect();
    let mut dir = OutDir::create(out)?;
    write_curve(&mut dir, "hopf_curve.csv", &rows)?;
    println!("{} Hopf points for gamma = {}", rows.len(), sig12(gamma));
    announce(&dir);
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct TuringCurveArgs {
    #[command(flatten)]
    pub alpha: AlphaRangeArgs,
    /// Also classify an N x N grid of the (alpha, r) plane.
    #[arg(long, value_name = "N")]
    pub regions: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub r_max: f64,
}

pub fn turing_curve_cmd(p: &ModelParams, args: &TuringCurveArgs, out: &Path) -> Outcome<()> {
    args.alpha.validate()?;
    if let Some(n) = args.regions {
        require_count("regions", n)?;
        require_range("r", args.r_min, args.r_max)?;
    }
    let a = &args.alpha;
    let curve = turing_curve((a.alpha_min, a.alpha_max), p.d(), a.resolution)?;
    let rows: Vec<_> = curve.iter().map(|c| (c.alpha, c.r, c.branch)).collect();
    let map = args.regions.map(|n| {
        grid_classify(
            (a.alpha_min, a.alpha_max),
            (args.r_min, args.r_max),
            p.d(),
            p.gamma(),
            n,
        )
    });
    let mut dir = OutDir::create(out)?;
    write_curve(&mut dir, "turing_curve.csv", &rows)?;
    if let Some(map) = &map {
        dir.write_with("regions.csv", |w| {
            writeln!(w, "alpha,r,region")?;
            for (i, alpha) in map.alphas.iter().enumerate() {
                for (j, r) in map.rs.iter().enumerate() {
                    writeln!(w, "{},{},{}", sig12(*alpha), sig12(*r), map.get(i, j).name())?;
                }
            }
            Ok(())
        })?;
    }
    println!("{} Turing curve points for d = {}", rows.len(), sig12(p.d()));
    announce(&dir);
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct TauStarArgs {
    /// Highest mode scanned (default: the last mode with D - M < 0, plus a margin).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Number of crossing branches per mode beyond the first.
    #[arg(long, default_value_t = 3)]
    pub j_max: usize,
}

pub fn tau_star_cmd(p: &ModelParams, args: &TauStarArgs, out: &Path) -> Outcome<()> {
    let ts = tau_star(p, args.n_max, args.j_max)?;
    let mut dir = OutDir::create(out)?;
    dir.write_json("tau_star.json", &envelope("tau-star", p, &ts))?;
    dir.write_with("critical_delays.csv", |w| {
        writeln!(w, "n,j,omega,tau,transversality")?;
        for mode in &ts.modes {
            for h in &mode.delays {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    h.n,
                    h.j,
                    sig12(h.omega),
                    sig12(h.tau_crit),
                    sig12(h.transversality)
                )?;
            }
        }
        Ok(())
    })?;
    println!(
        "tau* = {}  n0 = {}  omega = {}  S0 = {:?}",
        sig12(ts.tau),
        ts.n0,
        sig12(ts.omega),
        ts.s0
    );
    announce(&dir);
    Ok(())
}

fn normal_form_summary(r: &NormalFormReport) -> String {
    let c = &r.coefficients;
    let z = |(re, im): (f64, f64)| {
        format!(
            "{} {} {}i",
            sig12(re),
            if im < 0.0 { "-" } else { "+" },
            sig12(im.abs())
        )
    };
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<10} {v}\n"));
    line("tau*", sig12(r.crossing.tau_crit));
    line("omega", sig12(r.crossing.omega));
    line("n0", r.crossing.n.to_string());
    line("g20", z((c.g20.re, c.g20.im)));
    line("g11", z((c.g11.re, c.g11.im)));
    line("g02", z((c.g02.re, c.g02.im)));
    line("g21", z((c.g21.re, c.g21.im)));
    line("c1(0)", z((c.c1.re, c.c1.im)));
    line("mu2", sig12(c.mu2));
    line("beta2", sig12(c.beta2));
    line("T2", sig12(c.t2));
    line("direction", c.direction.name());
    line("orbit", c.orbit_stability.name());
    line("period", c.period_trend.name());
    s
}

pub fn normal_form_cmd(p: &ModelParams, out: &Path) -> Outcome<()> {
    let report = normal_form_report(p)?;
    let summary = normal_form_summary(&report);
    let mut dir = OutDir::create(out)?;
    dir.write_json("normal_form.json", &envelope("normal-form", p, &report))?;
    dir.write_text("normal_form.txt", &summary)?;
    print!("{summary}");
    announce(&dir);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TrajectoryFormat {
    Csv,
    Binary,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Grid intervals on (0, l*pi); 0 runs the kinetic (space-free) system.
    #[arg(long, default_value_t = 128)]
    pub intervals: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 600.0)]
    pub t_end: f64,
    /// Initial data m0 + A cos(kx), a0 - A cos(kx): the amplitude A.
    #[arg(long, default_value_t = 0.01)]
    pub amplitude: f64,
    /// Initial data wave number k.
    #[arg(long, default_value_t = 0.0)]
    pub wavenumber: f64,
    /// Base mussel density (default: m* of the positive equilibrium).
    #[arg(long)]
    pub m0: Option<f64>,
    /// Base algae density (default: a* of the positive equilibrium).
    #[arg(long)]
    pub a0: Option<f64>,
    /// Leading fraction of the run discarded before orbit detection.
    #[arg(long, default_value_t = 0.5)]
    pub transient: f64,
    /// Number of stored full-field frames.
    #[arg(long, default_value_t = 2000)]
    pub frames: usize,
    #[arg(long, value_enum, default_value_t = TrajectoryFormat::Csv)]
    pub format: TrajectoryFormat,
}

#[derive(Serialize)]
struct RunInfo {
    intervals: usize,
    dt_requested: f64,
    dt: f64,
    t_end: f64,
    m0: f64,
    a0: f64,
    amplitude: f64,
    wavenumber: f64,
}

#[derive(Serialize)]
struct SimulationResult {
    run: RunInfo,
    orbit: mussel_bif::simulator::OrbitSummary,
    /// Largest nodal distance from `E*` at the final time.
    final_deviation: Option<f64>,
    /// Largest `max a - max(sup a0, 1)` over the run; non-positive when the bound holds.
    a_bound_excess: f64,
}

pub fn simulate(p: &ModelParams, args: &SimulateArgs, out: &Path) -> Outcome<()> {
    require_positive("dt", args.dt)?;
    require_positive("t-end", args.t_end)?;
    require_count("frames", args.frames)?;
    if !(args.amplitude.is_finite() && args.wavenumber.is_finite()) {
        return Err(usage("--amplitude and --wavenumber must be finite"));
    }
    if !(0.0..1.0).contains(&args.transient) {
        return Err(usage(format!(
            "--transient must lie in [0, 1), got {}",
            args.transient
        )));
    }
    if args.dt > args.t_end {
        return Err(usage("--dt must not exceed --t-end"));
    }
    let eq = positive_equilibrium(p).ok();
    let (m0, a0) = match (args.m0.or(eq.map(|e| e.m)), args.a0.or(eq.map(|e| e.a))) {
        (Some(m), Some(a)) => (m, a),
        _ => {
            return Err(Failure::Hypothesis(
                "no positive equilibrium; pass --m0 and --a0 for the initial state".into(),
            ))
        }
    };
    let grid = if args.intervals == 0 {
        Grid::single_point(p.l())
    } else {
        Grid::new(args.intervals, p.l())?
    };

    let mut opts = SimOptions::new(args.t_end, args.dt);
    opts.record_interval = Some(args.t_end / args.frames as f64);
    let (amp, k) = (args.amplitude, args.wavenumber);
    let history = move |x: f64, _t: f64| {
        let c = amp * (k * x).cos();
        (m0 + c, a0 - c)
    };
    let traj = integrate(p, history, grid, opts)?;
    let result = SimulationResult {
        run: RunInfo {
            intervals: args.intervals,
            dt_requested: args.dt,
            dt: traj.dt,
            t_end: args.t_end,
            m0,
            a0,
            amplitude: amp,
            wavenumber: k,
        },
        orbit: detect_orbit(&traj, args.transient),
        final_deviation: eq.map(|e| traj.final_deviation(&e)),
        a_bound_excess: traj.a_bound_excess(),
    };

    let mut dir = OutDir::create(out)?;
    if args.format != TrajectoryFormat::Binary {
        dir.write_with("trajectory.csv", |w| write_csv(&traj, w))?;
    }
    if args.format != TrajectoryFormat::Csv {
        dir.write_with("trajectory.bin", |w| write_binary(&traj, w))?;
    }
    dir.write_with("heatmap.dat", |w| write_heatmap(&traj, w))?;
    dir.write_with("timeseries.csv", |w| write_timeseries(&traj, w))?;
    dir.write_with("plot.gp", |w| {
        write_plot_script(w, "heatmap.dat", "timeseries.csv")
    })?;
    dir.write_json("orbit.json", &envelope("simulate", p, &result))?;
    let o = &result.orbit;
    match o.period {
        Some(period) => println!(
            "periodic orbit, period {}, m in [{}, {}]",
            sig12(period),
            sig12(o.amplitude_m.0),
            sig12(o.amplitude_m.1)
        ),
        None => println!(
            "no periodic orbit ({}); final deviation from E* {}",
            o.diagnostic.as_deref().unwrap_or("undetected"),
            cell(result.final_deviation)
        ),
    }
    announce(&dir);
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub r_min: f64,
    #[arg(long)]
    pub r_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub r_step: f64,
    #[arg(long, default_value_t = 3000.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

pub fn sweep(p: &ModelParams, args: &SweepArgs, out: &Path) -> Outcome<()> {
    require_range("r", args.r_min, args.r_max)?;
    require_positive("r-step", args.r_step)?;
    require_positive("dt", args.dt)?;
    require_positive("t-end", args.t_end)?;
    let count = ((args.r_max - args.r_min) / args.r_step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(usage("sweep has more than 10^6 points"));
    }
    let rs: Vec<f64> = (0..count)
        .map(|i| mussel_bif::numfmt::round12(args.r_min + i as f64 * args.r_step))
        .collect();
    let rows = amplitude_sweep(p, &rs, args.t_end, args.dt);
    let mut dir = OutDir::create(out)?;
    dir.write_with("sweep.csv", |w| {
        writeln!(w, "r,oscillating,m_min,m_max,amplitude,period,error")?;
        for row in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                sig12(row.r),
                row.oscillating,
                cell(row.m_min),
                cell(row.m_max),
                cell(row.amplitude()),
                cell(row.period),
                row.error.as_deref().unwrap_or("").replace(',', ";")
            )?;
        }
        Ok(())
    })?;
    dir.write_json("sweep.json", &envelope("sweep", p, &rows))?;
    let osc: Vec<f64> = rows.iter().filter(|r| r.oscillating).map(|r| r.r).collect();
    match (osc.first(), osc.last()) {
        (Some(lo), Some(hi)) => println!(
            "oscillation on r in [{}, {}] ({} of {} points)",
            sig12(*lo),
            sig12(*hi),
            osc.len(),
            rows.len()
        ),
        _ => println!("no oscillation over {} points", rows.len()),
    }
    announce(&dir);
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Grid intervals of the discrete-spectrum oracle.
    #[arg(long, default_value_t = 200)]
    pub grid_points: usize,
}

pub fn verify(p: &ModelParams, args: &VerifyArgs, out: &Path) -> Outcome<()> {
    if !(16..=400).contains(&args.grid_points) {
        return Err(usage("--grid-points must lie in 16..=400"));
    }
    let report = run_oracle_suite(p, args.grid_points);
    let mut dir = OutDir::create(out)?;
    dir.write_json("verify.json", &envelope("verify", p, &report))?;
    dir.write_with("verify.csv", |w| {
        writeln!(w, "check,passed,value,tolerance")?;
        for c in &report.checks {
            writeln!(
                w,
                "{},{},{},{}",
                c.name.replace(',', ";"),
                c.passed,
                cell(c.value),
                cell(c.tolerance)
            )?;
        }
        Ok(())
    })?;
    for c in &report.checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    announce(&dir);
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} oracle check(s) failed")));
    }
    Ok(())
}
