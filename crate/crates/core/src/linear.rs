//! Delay-free (τ = 0) spectral analysis around the equilibria.
//!
//! Each Neumann mode `n` of the linearization at `E*` has the characteristic
//! quadratic `γλ² + T̃ₙλ + D̃ₙ = 0`. The Hopf curve in `r` is `T̃₀ = 0`
//! (equivalently `δ₀² = ρ₀`) and diffusion-driven instability is a sign change
//! of `D̃(k²)` over wave numbers.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_hypotheses, delta0, positive_equilibrium, rho0, ModelParams};
use crate::roots::bracket_roots;

/// Initial subdivisions used by every sign-scan in this module.
pub const SCAN_SUBDIVISIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoeffsNoDelay {
    pub n: usize,
    pub t_tilde: f64,
    pub d_tilde: f64,
}

/// Coefficients of `D̃(k²) = d k⁴ + g k² + D̃₀` as a function of continuous
/// `k²`. The middle coefficient `dα/a* - r²a*²m*` coincides with `g(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub quartic: f64,
    pub quadratic: f64,
    pub constant: f64,
}

impl Dispersion {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let e = positive_equilibrium(p)?;
        let (r, alpha) = (p.r(), p.alpha());
        Ok(Self {
            quartic: p.d(),
            quadratic: p.d() * alpha / e.a - r * r * e.a * e.a * e.m,
            constant: alpha * r * (r - 1.0) * e.a,
        })
    }

    pub fn eval(&self, k2: f64) -> f64 {
        (self.quartic * k2 + self.quadratic) * k2 + self.constant
    }

    /// Critical wave number `k_c²`, present only when the `k²` coefficient is negative.
    pub fn critical_k2(&self) -> Option<f64> {
        let k2 = -self.quadratic / (2.0 * self.quartic);
        (k2 > 0.0).then_some(k2)
    }

    /// Minimum over `k² >= 0`.
    pub fn min_value(&self) -> f64 {
        match self.critical_k2() {
            Some(k2) => self.eval(k2),
            None => self.constant,
        }
    }
}

pub fn char_coeffs_no_delay(p: &ModelParams, n: usize) -> Result<SpectralCoeffsNoDelay> {
    let e = positive_equilibrium(p)?;
    let (r, alpha, gamma, d) = (p.r(), p.alpha(), p.gamma(), p.d());
    let k2 = p.wave_number_sq(n);
    let feedback = r * r * e.a * e.a * e.m;
    let t_tilde = (1.0 + gamma * d) * k2 + alpha / e.a - gamma * feedback;
    let d_tilde = d * k2 * k2 + (d * alpha / e.a - feedback) * k2 + alpha * r * (r - 1.0) * e.a;
    Ok(SpectralCoeffsNoDelay { n, t_tilde, d_tilde })
}

/// Roots of `a λ² + b λ + c = 0` for real coefficients, avoiding cancellation.
pub fn real_quadratic_roots(a: f64, b: f64, c: f64) -> (Complex64, Complex64) {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
        if q == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let (x1, x2) = (q / a, c / q);
        let (hi, lo) = if x1 >= x2 { (x1, x2) } else { (x2, x1) };
        (Complex64::new(hi, 0.0), Complex64::new(lo, 0.0))
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a);
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

/// The two characteristic values of mode `n`, larger real part first
/// (positive imaginary part first for a conjugate pair).
pub fn eigenvalues_no_delay(p: &ModelParams, n: usize) -> Result<(Complex64, Complex64)> {
    let c = char_coeffs_no_delay(p, n)?;
    Ok(real_quadratic_roots(p.gamma(), c.t_tilde, c.d_tilde))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryVerdict {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStability {
    pub verdict: BoundaryVerdict,
    /// Largest characteristic value over the scanned modes.
    pub rightmost: f64,
    /// Mode attaining `rightmost`.
    pub deciding_mode: usize,
}

/// Linear stability of `E₀ = (0, 1)`, whose mode-`n` roots are
/// `r - 1 - d n²/l²` and `-(α + n²/l²)/γ`.
pub fn boundary_stability(p: &ModelParams, n_max: usize) -> BoundaryStability {
    let mut rightmost = f64::NEG_INFINITY;
    let mut deciding_mode = 0;
    for n in 0..=n_max {
        let k2 = p.wave_number_sq(n);
        let lead = (p.r() - 1.0 - p.d() * k2).max(-(p.alpha() + k2) / p.gamma());
        if lead > rightmost {
            rightmost = lead;
            deciding_mode = n;
        }
    }
    let verdict = if rightmost < 0.0 {
        BoundaryVerdict::Stable
    } else if rightmost > 0.0 {
        BoundaryVerdict::Unstable
    } else {
        BoundaryVerdict::Marginal
    };
    BoundaryStability {
        verdict,
        rightmost,
        deciding_mode,
    }
}

/// Threshold where the transversality of the `r`-Hopf bifurcation flips sign.
pub fn r_star(alpha: f64) -> f64 {
    0.25 / alpha * (alpha + (alpha * alpha + 8.0 * alpha).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RHopfPoint {
    pub r: f64,
    /// `+1` when `Re λ` increases through zero with `r`, `-1` when it decreases.
    pub transversality: i8,
}

/// `T̃₀` as a function of `r` for fixed `(α, γ)`; its zeros in `(1, 1/α)` are
/// the Hopf points of the kinetic system.
pub fn t_tilde0(alpha: f64, gamma: f64, r: f64) -> f64 {
    let m = alpha * (r - 1.0) / (1.0 - alpha * r);
    let a = (1.0 - alpha * r) / (r * (1.0 - alpha));
    alpha / a - gamma * r * r * a * a * m
}

fn require_unit_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Hopf points `δ₀²(r) = ρ₀(r)` inside `(1, 1/α)`, each with its transversality sign.
pub fn hopf_points_in_r(alpha: f64, gamma: f64) -> Result<Vec<RHopfPoint>> {
    require_unit_alpha(alpha)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let (lo, hi) = (1.0, 1.0 / alpha);
    // Open interval: endpoints are singular for ρ₀ and m*.
    let width = hi - lo;
    let eps = width * 1e-12;
    let h = |r: f64| {
        let p =
            crate::model::ModelParams::new(r, alpha, gamma, 1.0, 0.0, 1.0).expect("positive by construction");
        delta0(&p).powi(2) - rho0(&p).unwrap_or(f64::NAN)
    };
    let rs = r_star(alpha);
    let points = bracket_roots(h, lo + eps, hi - eps, SCAN_SUBDIVISIONS, 1e-13)
        .into_iter()
        .filter(|&r| r != rs)
        .map(|r| RHopfPoint {
            r,
            transversality: if r < rs { 1 } else { -1 },
        })
        .collect();
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TuringVerdict {
    Stable,
    TuringUnstable,
    HopfUnstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuringReport {
    pub g_r: f64,
    pub lambda_disc: f64,
    pub kc_squared: Option<f64>,
    pub min_mode_value: f64,
    /// Smallest `D̃ₙ` over admissible modes `n = 0..=n_scan`.
    pub discrete_min: (usize, f64),
    pub verdict: TuringVerdict,
    /// True when a defining inequality holds with equality.
    pub marginal: bool,
    pub t_tilde0: f64,
}

/// `g(r) = m*(dγρ₀ - δ₀²)` and `Λ = g² - 4d D̃₀`.
pub fn turing_quantities(p: &ModelParams) -> Result<(f64, f64)> {
    let e = positive_equilibrium(p)?;
    let rho = rho0(p).expect("H1 excludes r = 1");
    let d0 = delta0(p);
    let g = e.m * (p.d() * p.gamma() * rho - d0 * d0);
    let d_tilde0 = p.alpha() * p.r() * (p.r() - 1.0) * e.a;
    Ok((g, g * g - 4.0 * p.d() * d_tilde0))
}

pub fn turing_analysis(p: &ModelParams, n_scan: usize) -> Result<TuringReport> {
    let hyp = check_hypotheses(p);
    if !hyp.h1 {
        p.require_h1()?;
    }
    if !hyp.h2 {
        return Err(Error::HypothesisViolation(
            "(H2) fails: the homogeneous mode is already Hopf-unstable".into(),
        ));
    }
    let (g, lambda_disc) = turing_quantities(p)?;
    let disp = Dispersion::new(p)?;
    let discrete_min =
        (0..=n_scan)
            .map(|n| (n, disp.eval(p.wave_number_sq(n))))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
    let t0 = char_coeffs_no_delay(p, 0)?.t_tilde;

    let (verdict, marginal) = if g >= 0.0 {
        (TuringVerdict::Stable, g == 0.0)
    } else if lambda_disc < 0.0 {
        (TuringVerdict::Stable, false)
    } else if lambda_disc == 0.0 {
        (TuringVerdict::Stable, true)
    } else {
        (TuringVerdict::TuringUnstable, false)
    };
    Ok(TuringReport {
        g_r: g,
        lambda_disc,
        kc_squared: disp.critical_k2(),
        min_mode_value: disp.min_value(),
        discrete_min,
        verdict,
        marginal,
        t_tilde0: t0,
    })
}

/// Classification of a single parameter point at τ = 0, combining the
/// homogeneous (Hopf) and wave-number (Turing) criteria.
pub fn classify_point(p: &ModelParams, n_scan: usize) -> Result<TuringVerdict> {
    p.require_h1()?;
    if !check_hypotheses(p).h2 {
        return Ok(TuringVerdict::HopfUnstable);
    }
    Ok(turing_analysis(p, n_scan)?.verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub r: f64,
    pub branch: usize,
}

/// `Λ`-zero with `g < 0`, i.e. `D̃(k_c²) = 0`, written as `g + 2√(d D̃₀)`.
fn turing_boundary(alpha: f64, d: f64, r: f64) -> f64 {
    let m = alpha * (r - 1.0) / (1.0 - alpha * r);
    let a = (1.0 - alpha * r) / (r * (1.0 - alpha));
    let g = d * alpha / a - r * r * a * a * m;
    let d0 = alpha * r * (r - 1.0) * a;
    g + 2.0 * (d * d0).sqrt()
}

/// Critical Turing curve in the `(α, r)` plane for diffusion ratio `d`.
///
/// For each of `resolution` equally spaced `α` in `alpha_range` (inclusive),
/// emits every `r ∈ (1, 1/α)` with `D̃(k_c²) = 0` and `k_c² > 0`.
/// Roots are numbered `1, 2, …` in increasing `r` (the lower and upper
/// branches of the curve).
pub fn turing_curve(alpha_range: (f64, f64), d: f64, resolution: usize) -> Result<Vec<CurvePoint>> {
    let (a0, a1) = alpha_range;
    require_unit_alpha(a0)?;
    require_unit_alpha(a1)?;
    if !(d > 0.0) || resolution == 0 || a1 < a0 {
        return Err(Error::InvalidParameter(
            "turing_curve needs d > 0, resolution >= 1 and an ordered alpha range".into(),
        ));
    }
    let alphas: Vec<f64> = if resolution == 1 {
        vec![a0]
    } else {
        (0..resolution)
            .map(|i| a0 + (a1 - a0) * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let per_alpha: Vec<Vec<CurvePoint>> = alphas.par_iter().map(|&alpha| turing_roots(alpha, d)).collect();
    Ok(per_alpha.into_iter().flatten().collect())
}

fn turing_roots(alpha: f64, d: f64) -> Vec<CurvePoint> {
    let (lo, hi) = (1.0, 1.0 / alpha);
    let eps = (hi - lo) * 1e-12;
    bracket_roots(
        |r| turing_boundary(alpha, d, r),
        lo + eps,
        hi - eps,
        SCAN_SUBDIVISIONS,
        1e-12,
    )
    .into_iter()
    .enumerate()
    .map(|(i, r)| CurvePoint {
        alpha,
        r,
        branch: i + 1,
    })
    .collect()
}
