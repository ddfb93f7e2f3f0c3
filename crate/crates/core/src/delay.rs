//! Spectral analysis for positive delay.
//!
//! Mode `n` of the linearization at `E*` has the transcendental
//! characteristic function
//!
//! ```text
//! Δₙ(λ, τ) = γλ² + Tₙλ + (Bλ + Mₙ)e^{-λτ} + Dₙ
//! ```
//!
//! Purely imaginary roots `λ = iω` exist only on the finite set `S₀` of modes
//! with `Dₙ² - Mₙ² < 0`; each such mode crosses at the delays
//! `τ_{n,j} = (θₙ + 2jπ)/ωₙ`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{positive_equilibrium, ModelParams};

/// Extra modes scanned past the first index with `Dₙ - Mₙ >= 0`.
pub const MODE_MARGIN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoeffsDelay {
    pub n: usize,
    pub t_n: f64,
    pub m_n: f64,
    pub d_n: f64,
    pub b: f64,
    /// `Tₙ² - 2γDₙ - B²`.
    pub script_t: f64,
}

pub fn delay_char_coeffs(p: &ModelParams, n: usize) -> Result<SpectralCoeffsDelay> {
    let e = positive_equilibrium(p)?;
    let (r, alpha, gamma, d) = (p.r(), p.alpha(), p.gamma(), p.d());
    let k2 = p.wave_number_sq(n);
    let t_n = alpha + e.m + (1.0 + gamma * d) * k2;
    let m_n = r * e.a * e.m * (1.0 - alpha * r - r * e.a * k2);
    let d_n = d * (alpha + e.m + k2) * k2;
    let b = -gamma * r * r * e.a * e.a * e.m;
    Ok(SpectralCoeffsDelay {
        n,
        t_n,
        m_n,
        d_n,
        b,
        script_t: t_n * t_n - 2.0 * gamma * d_n - b * b,
    })
}

impl SpectralCoeffsDelay {
    pub fn residual(&self, gamma: f64, lambda: Complex64, tau: f64) -> Complex64 {
        gamma * lambda * lambda
            + self.t_n * lambda
            + (self.b * lambda + self.m_n) * (-lambda * tau).exp()
            + self.d_n
    }

    /// `∂Δ/∂λ`.
    pub fn residual_derivative(&self, gamma: f64, lambda: Complex64, tau: f64) -> Complex64 {
        let ex = (-lambda * tau).exp();
        2.0 * gamma * lambda + self.t_n + (self.b - tau * (self.b * lambda + self.m_n)) * ex
    }

    fn crossing_normalizer(&self, omega: f64) -> f64 {
        self.m_n * self.m_n + omega * omega * self.b * self.b
    }

    /// `(cos ωτ, sin ωτ)` forced by splitting `Δ(iω, τ) = 0` into real and imaginary parts.
    pub fn crossing_phase(&self, gamma: f64, omega: f64) -> (f64, f64) {
        let den = self.crossing_normalizer(omega);
        assert!(den > 0.0, "degenerate crossing normalization M² + ω²B² = 0");
        let w2 = omega * omega;
        let cos = ((gamma * self.m_n - self.b * self.t_n) * w2 - self.m_n * self.d_n) / den;
        let sin = (self.m_n * self.t_n * omega + omega * self.b * (gamma * w2 - self.d_n)) / den;
        (cos, sin)
    }
}

/// Exact value of the characteristic function at `λ` for delay `tau`.
pub fn char_residual(p: &ModelParams, n: usize, lambda: Complex64, tau: f64) -> Result<Complex64> {
    Ok(delay_char_coeffs(p, n)?.residual(p.gamma(), lambda, tau))
}

/// Crossing frequency `ωₙ`, present iff `n ∈ S₀`.
///
/// When `Dₙ - Mₙ >= 0` the absence of a positive root relies on
/// `Dₙ + Mₙ > 0`; that is checked rather than assumed.
pub fn crossing_frequency(p: &ModelParams, n: usize) -> Result<Option<f64>> {
    let c = delay_char_coeffs(p, n)?;
    Ok(frequency_from(&c, p.gamma())?)
}

fn frequency_from(c: &SpectralCoeffsDelay, gamma: f64) -> Result<Option<f64>> {
    let prod = c.d_n * c.d_n - c.m_n * c.m_n;
    if prod >= 0.0 {
        if c.d_n - c.m_n >= 0.0 && c.d_n + c.m_n <= 0.0 {
            return Err(Error::Numerical(format!(
                "mode {}: D_n - M_n >= 0 but D_n + M_n = {} is not positive",
                c.n,
                c.d_n + c.m_n
            )));
        }
        return Ok(None);
    }
    let g2 = gamma * gamma;
    let disc = c.script_t * c.script_t - 4.0 * g2 * prod;
    // Rationalized when 𝒯 > 0 to avoid cancellation for small γ.
    let z = if c.script_t > 0.0 {
        -2.0 * prod / (c.script_t + disc.sqrt())
    } else {
        (-c.script_t + disc.sqrt()) / (2.0 * g2)
    };
    Ok((z > 0.0).then(|| z.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub n: usize,
    pub j: usize,
    pub omega: f64,
    pub tau_crit: f64,
    /// `Re(dλ/dτ)⁻¹` at the crossing; positive under the standing hypotheses.
    pub transversality: f64,
    /// Root velocity `dλ/dτ` at the crossing.
    pub dlambda_dtau: Complex64,
}

/// Principal crossing phase `θ ∈ [0, 2π)` with `(cos θ, sin θ)` from the
/// real/imaginary split.
fn principal_angle(cos: f64, sin: f64) -> f64 {
    let th = sin.atan2(cos);
    if th < 0.0 {
        th + TAU
    } else {
        th
    }
}

/// Implicit derivative of the characteristic root with respect to `τ`.
pub fn dlambda_dtau(c: &SpectralCoeffsDelay, gamma: f64, lambda: Complex64, tau: f64) -> Complex64 {
    let ex = (-lambda * tau).exp();
    lambda * (c.b * lambda + c.m_n) * ex / c.residual_derivative(gamma, lambda, tau)
}

fn transversality_from(c: &SpectralCoeffsDelay, gamma: f64, omega: f64) -> f64 {
    let radicand = c.script_t * c.script_t - 4.0 * gamma * gamma * (c.d_n * c.d_n - c.m_n * c.m_n);
    debug_assert!(radicand > 0.0);
    radicand.sqrt() / (c.b * c.b * omega * omega + c.m_n * c.m_n)
}

/// `Re(dλ/dτ)⁻¹` at the crossings of mode `n` (identical for every branch `j`).
pub fn transversality_at(p: &ModelParams, n: usize) -> Result<f64> {
    let c = delay_char_coeffs(p, n)?;
    let omega = frequency_from(&c, p.gamma())?.ok_or(Error::NotInS0 { n })?;
    Ok(transversality_from(&c, p.gamma(), omega))
}

/// Critical delays `τ_{n,0}, …, τ_{n,j_max}` of mode `n`.
pub fn critical_delays(p: &ModelParams, n: usize, j_max: usize) -> Result<Vec<HopfPoint>> {
    let c = delay_char_coeffs(p, n)?;
    let gamma = p.gamma();
    let omega = frequency_from(&c, gamma)?.ok_or(Error::NotInS0 { n })?;
    let (cos, sin) = c.crossing_phase(gamma, omega);
    let theta = principal_angle(cos, sin);
    let transversality = transversality_from(&c, gamma, omega);
    let lambda = Complex64::new(0.0, omega);
    Ok((0..=j_max)
        .map(|j| {
            let tau_crit = (theta + TAU * j as f64) / omega;
            HopfPoint {
                n,
                j,
                omega,
                tau_crit,
                transversality,
                dlambda_dtau: dlambda_dtau(&c, gamma, lambda, tau_crit),
            }
        })
        .collect())
}

/// Smallest `N₃` with `D_{N₃} - M_{N₃} >= 0`; every larger mode also satisfies it.
pub fn find_n3(p: &ModelParams) -> Result<usize> {
    // Dₙ - Mₙ is a quadratic in k² with positive leading coefficient, so the
    // first non-negative index is found by a finite walk.
    for n in 0..1_000_000 {
        let c = delay_char_coeffs(p, n)?;
        if c.d_n - c.m_n >= 0.0 {
            return Ok(n);
        }
    }
    Err(Error::Numerical("D_n - M_n stays negative for n < 1e6".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub n: usize,
    pub in_s0: bool,
    pub omega: Option<f64>,
    pub delays: Vec<HopfPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauStar {
    pub tau: f64,
    pub n0: usize,
    pub omega: f64,
    pub s0: Vec<usize>,
    pub n_max: usize,
    pub modes: Vec<ModeReport>,
}

impl TauStar {
    /// The `j = 0` crossing of the minimizing mode.
    pub fn hopf_point(&self) -> &HopfPoint {
        let mode = self.modes.iter().find(|m| m.n == self.n0).expect("n0 scanned");
        &mode.delays[0]
    }
}

/// `τ* = min_{n∈S₀} τ_{n,0}` over `n = 0..=n_max` (default `N₃ + 5`).
pub fn tau_star(p: &ModelParams, n_max: Option<usize>, j_max: usize) -> Result<TauStar> {
    let n_max = match n_max {
        Some(n) => n,
        None => find_n3(p)? + MODE_MARGIN,
    };
    let modes: Vec<ModeReport> = (0..=n_max)
        .into_par_iter()
        .map(|n| -> Result<ModeReport> {
            let omega = crossing_frequency(p, n)?;
            let delays = match omega {
                Some(_) => critical_delays(p, n, j_max)?,
                None => Vec::new(),
            };
            Ok(ModeReport {
                n,
                in_s0: omega.is_some(),
                omega,
                delays,
            })
        })
        .collect::<Result<_>>()?;
    let best = modes
        .iter()
        .filter(|m| m.in_s0)
        .min_by(|a, b| a.delays[0].tau_crit.total_cmp(&b.delays[0].tau_crit))
        .ok_or(Error::EmptyS0 { n_max })?;
    Ok(TauStar {
        tau: best.delays[0].tau_crit,
        n0: best.n,
        omega: best.omega.expect("in S0"),
        s0: modes.iter().filter(|m| m.in_s0).map(|m| m.n).collect(),
        n_max,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::char_coeffs_no_delay;
    use crate::model::check_hypotheses;
    use proptest::prelude::*;

    fn reference() -> ModelParams {
        ModelParams::reference(0.0)
    }

    #[test]
    fn homogeneous_mode_has_no_diffusive_coupling() {
        let c = delay_char_coeffs(&reference(), 0).unwrap();
        assert_eq!(c.d_n, 0.0);
        assert!(c.t_n > 0.0 && c.b < 0.0 && c.script_t > 0.0);
        let e = positive_equilibrium(&reference()).unwrap();
        assert!((c.d_n - c.m_n + 0.1 * 2.0 * 1.0 * e.a).abs() < 1e-15);
    }

    #[test]
    fn reference_crossing() {
        let p = reference();
        let omega = crossing_frequency(&p, 0).unwrap().unwrap();
        assert!((omega - 0.3253).abs() < 1e-3, "{omega}");
        let hp = critical_delays(&p, 0, 0).unwrap()[0];
        assert!((hp.tau_crit - 2.3545).abs() < 1e-3, "{}", hp.tau_crit);
        let res = char_residual(&p, 0, Complex64::new(0.0, omega), hp.tau_crit).unwrap();
        assert!(res.norm() < 1e-10);
    }

    #[test]
    fn reference_s0_and_n3() {
        let p = reference();
        let n3 = find_n3(&p).unwrap();
        assert_eq!(n3, 1);
        let ts = tau_star(&p, None, 3).unwrap();
        assert_eq!(ts.s0, vec![0]);
        assert_eq!(ts.n0, 0);
        assert_eq!(ts.n_max, n3 + MODE_MARGIN);
        assert!(crossing_frequency(&p, n3).unwrap().is_none());
    }

    #[test]
    fn phase_lies_on_unit_circle() {
        let p = reference();
        let c = delay_char_coeffs(&p, 0).unwrap();
        let w = crossing_frequency(&p, 0).unwrap().unwrap();
        let (cs, sn) = c.crossing_phase(p.gamma(), w);
        assert!((cs * cs + sn * sn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branches_are_equally_spaced() {
        let p = reference();
        let pts = critical_delays(&p, 0, 6).unwrap();
        for w in pts.windows(2) {
            let gap = w[1].tau_crit - w[0].tau_crit;
            assert!((gap - TAU / w[0].omega).abs() < 1e-12);
        }
        for hp in &pts {
            let lam = Complex64::new(0.0, hp.omega);
            assert!(char_residual(&p, 0, lam, hp.tau_crit).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn not_in_s0_errors() {
        let p = reference();
        assert_eq!(critical_delays(&p, 3, 1), Err(Error::NotInS0 { n: 3 }));
        assert_eq!(transversality_at(&p, 3), Err(Error::NotInS0 { n: 3 }));
    }

    #[test]
    fn transversality_matches_implicit_derivative() {
        let p = reference();
        let hp = critical_delays(&p, 0, 0).unwrap()[0];
        let inv = (1.0 / hp.dlambda_dtau).re;
        assert!((inv - hp.transversality).abs() < 1e-10 * hp.transversality.abs());
        assert!(hp.dlambda_dtau.re > 0.0);
    }

    #[test]
    fn transversality_vs_finite_difference() {
        // Newton-polish the crossing root at τ* ± h and difference Re λ.
        let p = reference();
        let c = delay_char_coeffs(&p, 0).unwrap();
        let hp = critical_delays(&p, 0, 0).unwrap()[0];
        let polish = |tau: f64| {
            let mut lam = Complex64::new(0.0, hp.omega);
            for _ in 0..50 {
                lam -= c.residual(p.gamma(), lam, tau) / c.residual_derivative(p.gamma(), lam, tau);
            }
            lam
        };
        let h = 1e-5;
        let slope = (polish(hp.tau_crit + h).re - polish(hp.tau_crit - h).re) / (2.0 * h);
        let closed = hp.dlambda_dtau.re;
        assert!(slope > 0.0);
        assert!((slope - closed).abs() < 0.05 * closed);
    }

    #[test]
    fn scan_reports_membership_per_mode() {
        let ts = tau_star(&reference(), Some(4), 0).unwrap();
        assert_eq!(ts.modes.len(), 5);
        assert!(ts.modes[0].in_s0 && ts.modes[0].delays.len() == 1);
        assert!(ts.modes.iter().skip(1).all(|m| !m.in_s0 && m.delays.is_empty()));
    }

    #[test]
    fn homogeneous_mode_always_crosses() {
        // D₀ = 0 < M₀ under (H1), so S₀ is never empty.
        for &(r, alpha) in &[(1.05, 0.5), (1.9, 0.5), (9.0, 0.1), (1.001, 0.9)] {
            let p = ModelParams::new(r, alpha, 0.5, 1.0, 0.0, 1.0).unwrap();
            let c0 = delay_char_coeffs(&p, 0).unwrap();
            assert!(c0.m_n > 0.0 && c0.d_n == 0.0);
            assert!(tau_star(&p, None, 0).unwrap().s0.contains(&0));
        }
    }

    fn h123(alpha: f64, s: f64, gamma: f64, d: f64, l: f64) -> Option<ModelParams> {
        let r = 1.0 + s * (1.0 / alpha - 1.0);
        let p = ModelParams::new(r, alpha, gamma, d, 0.0, l).ok()?;
        check_hypotheses(&p).all().then_some(p)
    }

    proptest! {
        #[test]
        fn reduces_to_delay_free(alpha in 0.02f64..0.98, s in 0.01f64..0.99, gamma in 0.05f64..10.0,
                                 d in 0.001f64..2.0, l in 0.3f64..5.0, n in 0usize..30) {
            let r = 1.0 + s * (1.0 / alpha - 1.0);
            let p = ModelParams::new(r, alpha, gamma, d, 0.0, l).unwrap();
            prop_assume!(p.satisfies_h1());
            let c = delay_char_coeffs(&p, n).unwrap();
            let c0 = char_coeffs_no_delay(&p, n).unwrap();
            let tol = |x: f64| 1e-12 * x.abs().max(1.0);
            prop_assert!((c.t_n + c.b - c0.t_tilde).abs() <= tol(c0.t_tilde) + 1e-12 * c.t_n.abs());
            prop_assert!((c.d_n + c.m_n - c0.d_tilde).abs() <= tol(c0.d_tilde) + 1e-12 * c.d_n.abs());
            let lam = Complex64::new(-0.3, 0.7);
            let delay_free = gamma * lam * lam + c0.t_tilde * lam + c0.d_tilde;
            prop_assert!((c.residual(gamma, lam, 0.0) - delay_free).norm() < 1e-10 * (1.0 + delay_free.norm()));
        }

        #[test]
        fn crossings_are_roots(alpha in 0.02f64..0.98, s in 0.01f64..0.99, gamma in 0.05f64..10.0,
                               d in 0.001f64..2.0, l in 0.3f64..5.0) {
            let p = h123(alpha, s, gamma, d, l);
            prop_assume!(p.is_some());
            let p = p.unwrap();
            let n3 = find_n3(&p).unwrap();
            for n in 0..=n3 + MODE_MARGIN {
                let c = delay_char_coeffs(&p, n).unwrap();
                prop_assert!(c.script_t > 0.0);
                if let Some(w) = crossing_frequency(&p, n).unwrap() {
                    prop_assert!(n < n3);
                    let (cs, sn) = c.crossing_phase(gamma, w);
                    prop_assert!((cs * cs + sn * sn - 1.0).abs() < 1e-10);
                    for hp in critical_delays(&p, n, 2).unwrap() {
                        let res = c.residual(gamma, Complex64::new(0.0, w), hp.tau_crit);
                        let scale = 1.0 + gamma * w * w + c.t_n * w + c.b.abs() * w + c.m_n.abs() + c.d_n;
                        prop_assert!(res.norm() < 1e-10 * scale);
                        prop_assert!(hp.transversality > 0.0);
                    }
                } else {
                    prop_assert!(c.d_n * c.d_n - c.m_n * c.m_n >= 0.0);
                }
            }
        }
    }
}
