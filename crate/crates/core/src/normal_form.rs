//! Center-manifold reduction at the first critical delay.
//!
//! Time is rescaled by `τ*`, so the linear operator is
//! `τ*Γ⁻¹(L₁φ(0) + L₂φ(-1)) - k²τ*Γ⁻¹Dφ(0)` with `Γ = diag(1, γ)` and
//! `D = diag(d, 1)`. Every second component of the kinetics therefore carries
//! a factor `1/γ`; this includes the adjoint eigenvector `q*(0) = M(q₂, 1)`.
//!
//! The pipeline is [`eigenpair`] → [`g_coefficients`] →
//! [`center_manifold_terms`] → [`hopf_coefficients`].

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::delay::{char_residual, tau_star, HopfPoint};
use crate::error::{Error, Result};
use crate::model::{check_hypotheses, positive_equilibrium, Equilibrium, ModelParams};

pub type Vec2 = [C; 2];
pub type Mat2 = [[C; 2]; 2];

/// Largest admissible characteristic residual at a claimed crossing.
pub const CROSSING_TOL: f64 = 1e-8;
/// Determinant guard for the 2×2 solves, relative to the matrix scale.
pub const DET_GUARD: f64 = 1e-14;

const I: C = C { re: 0.0, im: 1.0 };

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

pub(crate) fn mat_vec(a: &Mat2, x: &Vec2) -> Vec2 {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

fn add(x: &Vec2, y: &Vec2) -> Vec2 {
    [x[0] + y[0], x[1] + y[1]]
}

fn scale(s: C, x: &Vec2) -> Vec2 {
    [s * x[0], s * x[1]]
}

fn norm(x: &Vec2) -> f64 {
    (x[0].norm_sqr() + x[1].norm_sqr()).sqrt()
}

fn dot(x: &Vec2, y: &Vec2) -> C {
    x[0] * y[0] + x[1] * y[1]
}

fn conj(x: &Vec2) -> Vec2 {
    [x[0].conj(), x[1].conj()]
}

/// Solution of `a x = b` with the residual `|a x - b|`.
pub(crate) fn solve2(a: &Mat2, b: &Vec2) -> Option<(Vec2, f64)> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if det.norm() <= DET_GUARD * scale * scale {
        return None;
    }
    let x = [
        (a[1][1] * b[0] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ];
    let ax = mat_vec(a, &x);
    let residual = norm(&[ax[0] - b[0], ax[1] - b[1]]);
    Some((x, residual))
}

/// Linear blocks of the rescaled operator at `E*`.
#[derive(Debug, Clone, Copy)]
pub struct LinearBlocks {
    /// `Γ⁻¹L₁`: undelayed reaction Jacobian.
    pub l1: Mat2,
    /// `Γ⁻¹L₂`: delayed reaction Jacobian.
    pub l2: Mat2,
    /// `Γ⁻¹D`: diffusion.
    pub diff: Mat2,
}

impl LinearBlocks {
    pub fn new(p: &ModelParams, e: &Equilibrium) -> Self {
        let g = p.gamma();
        let (m, a) = (e.m, e.a);
        Self {
            l1: [[c(0.0), c(0.0)], [c(-a / g), c(-(p.alpha() + m) / g)]],
            l2: [[c(m / (1.0 + m).powi(2)), c(p.r() * m)], [c(0.0), c(0.0)]],
            diff: [[c(p.d()), c(0.0)], [c(0.0), c(1.0 / g)]],
        }
    }

    /// `∫_{-1}^0 e^{sθ} dηₙ(θ) = τ(Γ⁻¹L₁ + Γ⁻¹L₂e^{-s}) - k²τΓ⁻¹D` for rescaled exponent `s`.
    pub fn eta(&self, tau: f64, k2: f64, s: C) -> Mat2 {
        let e = (-s).exp();
        let mut out = [[c(0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = tau * (self.l1[i][j] + self.l2[i][j] * e - k2 * self.diff[i][j]);
            }
        }
        out
    }

    /// `s I - ∫e^{sθ}dηₙ`: the rescaled mode characteristic matrix.
    pub fn characteristic(&self, tau: f64, k2: f64, s: C) -> Mat2 {
        let mut m = self.eta(tau, k2, s);
        for (i, row) in m.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = if i == j { s - *z } else { -*z };
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub q1: C,
    pub q2: C,
    pub m_norm: C,
    pub omega: f64,
    pub tau_star: f64,
    pub n0: usize,
}

impl Eigenpair {
    /// `q(0) = (1, q₁)`.
    pub fn q(&self) -> Vec2 {
        [c(1.0), self.q1]
    }

    /// `q*(0) = M(q₂, 1)`.
    pub fn q_star(&self) -> Vec2 {
        [self.m_norm * self.q2, self.m_norm]
    }

    /// Rescaled crossing frequency `ωτ*`.
    pub fn omega_tau(&self) -> f64 {
        self.omega * self.tau_star
    }
}

/// Bilinear pairing between `ψ(s) = ψ₀e^{μs}` (`s ∈ [0,1]`) and
/// `φ(θ) = φ₀e^{νθ}` (`θ ∈ [-1,0]`):
///
/// `(ψ, φ) = ψ₀φ₀ + ∫_{-1}^0 ψ(ξ+1) τΓ⁻¹L₂ φ(ξ) dξ`.
///
/// The only atom of `η` away from `θ = 0` sits at `θ = -1`.
pub fn pairing(blocks: &LinearBlocks, tau: f64, psi0: &Vec2, mu: C, phi0: &Vec2, nu: C) -> C {
    let sum = mu + nu;
    let kernel = if sum.norm() < 1e-14 {
        c(1.0)
    } else {
        (c(1.0) - (-sum).exp()) / sum
    };
    let delayed = dot(psi0, &mat_vec(&blocks.l2, phi0)) * tau;
    dot(psi0, phi0) + delayed * mu.exp() * kernel
}

/// Eigenvector `q` and adjoint `q*` at the crossing `(iω, τ*)` of mode `n0`.
pub fn eigenpair(p: &ModelParams, n0: usize, omega: f64, tau_star: f64) -> Result<Eigenpair> {
    let residual = char_residual(p, n0, C::new(0.0, omega), tau_star)?.norm();
    if !(residual <= CROSSING_TOL) {
        return Err(Error::NonCrossing { residual });
    }
    let e = positive_equilibrium(p)?;
    let (r, alpha, gamma) = (p.r(), p.alpha(), p.gamma());
    let k2 = p.wave_number_sq(n0);
    let big_e = C::from_polar(1.0, -omega * tau_star);
    let diag = I * gamma * omega + alpha + e.m + k2;
    let q1 = -e.a / diag;
    let q2 = diag / (gamma * r * e.m * big_e);
    let wt = omega * tau_star;
    let phase = C::from_polar(1.0, wt);
    let m_norm = phase / ((q1 + q2) * phase + tau_star * q2 * (r * r * e.a * e.a * e.m + q1 * r * e.m));
    Ok(Eigenpair {
        q1,
        q2,
        m_norm,
        omega,
        tau_star,
        n0,
    })
}

/// Taylor coefficients of the shifted kinetics about `E*`.
///
/// With `φ = (m - m*, a - a*)`, subscript `0` for the present and `1` for the
/// delayed state:
///
/// ```text
/// f₁ = r φ₁(0)φ₂(-1) - m*/(1+m*)³ φ₁²(-1) + 1/(1+m*)² φ₁(0)φ₁(-1)
///      + m*/(1+m*)⁴ φ₁³(-1) - 1/(1+m*)³ φ₁(0)φ₁²(-1) + O(|φ|⁴)
/// f₂ = -φ₁(0)φ₂(0)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearCoeffs {
    pub m0_a1: f64,
    pub m1_m1: f64,
    pub m0_m1: f64,
    pub m1_m1_m1: f64,
    pub m0_m1_m1: f64,
    pub f2_m0_a0: f64,
}

/// A phase-space sample: `(present, delayed)` values of `(φ₁, φ₂)`.
pub type Sample = (Vec2, Vec2);

impl NonlinearCoeffs {
    /// Symmetric bilinear form of the quadratic part (unscaled, no `Γ⁻¹`).
    pub fn quadratic(&self, x: &Sample, y: &Sample) -> Vec2 {
        let (x0, x1) = x;
        let (y0, y1) = y;
        let f1 = 0.5 * self.m0_a1 * (x0[0] * y1[1] + y0[0] * x1[1])
            + self.m1_m1 * x1[0] * y1[0]
            + 0.5 * self.m0_m1 * (x0[0] * y1[0] + y0[0] * x1[0]);
        let f2 = 0.5 * self.f2_m0_a0 * (x0[0] * y0[1] + y0[0] * x0[1]);
        [f1, f2]
    }

    /// Symmetric trilinear form of the cubic part (unscaled).
    pub fn cubic(&self, x: &Sample, y: &Sample, z: &Sample) -> Vec2 {
        let (x0, x1) = x;
        let (y0, y1) = y;
        let (z0, z1) = z;
        let f1 = self.m1_m1_m1 * x1[0] * y1[0] * z1[0]
            + self.m0_m1_m1 / 3.0 * (x0[0] * y1[0] * z1[0] + y0[0] * x1[0] * z1[0] + z0[0] * x1[0] * y1[0]);
        [f1, c(0.0)]
    }
}

pub fn nonlinear_expansion(p: &ModelParams) -> Result<NonlinearCoeffs> {
    let m = positive_equilibrium(p)?.m;
    let s = 1.0 + m;
    Ok(NonlinearCoeffs {
        m0_a1: p.r(),
        m1_m1: -m / s.powi(3),
        m0_m1: 1.0 / s.powi(2),
        m1_m1_m1: m / s.powi(4),
        m0_m1_m1: -1.0 / s.powi(3),
        f2_m0_a0: -1.0,
    })
}

/// `∫ b_{n₀}³ dx` over `(0, lπ)` with `b_n` the L²-normalized cosine.
pub fn cubic_mode_integral(n0: usize, l: f64) -> f64 {
    if n0 == 0 {
        (l * PI).powf(-0.5)
    } else {
        0.0
    }
}

/// `∫ b_{n₀}⁴ dx`.
pub fn quartic_mode_integral(n0: usize, l: f64) -> f64 {
    if n0 == 0 {
        1.0 / (l * PI)
    } else {
        1.5 / (l * PI)
    }
}

/// Projection weight `∫ b_{n₀}² bₙ dx`; nonzero only for `n ∈ {0, 2n₀}`.
pub fn projection_weight(n0: usize, n: usize, l: f64) -> f64 {
    let lp = l * PI;
    match (n0, n) {
        (_, 0) => lp.powf(-0.5),
        (n0, n) if n0 != 0 && n == 2 * n0 => (2.0 * lp).powf(-0.5),
        _ => 0.0,
    }
}

fn contributing_modes(n0: usize) -> Vec<usize> {
    if n0 == 0 {
        vec![0]
    } else {
        vec![0, 2 * n0]
    }
}

/// Constants of `f` evaluated on the center eigenfunctions.
#[derive(Debug, Clone, Copy)]
struct Kinetics {
    r: f64,
    gamma: f64,
    c2: f64,
    c3: f64,
    c4: f64,
    c3p: f64,
}

impl Kinetics {
    fn new(p: &ModelParams, e: &Equilibrium) -> Self {
        let s = 1.0 + e.m;
        Self {
            r: p.r(),
            gamma: p.gamma(),
            c2: 1.0 / s.powi(2),
            c3: e.m / s.powi(3),
            c4: e.m / s.powi(4),
            c3p: 1.0 / s.powi(3),
        }
    }
}

/// `F̂₂₀`, `F̂₁₁`, `F̂₀₂`: coefficients of `z²`, `zz̄`, `z̄²` in `Γ⁻¹f(zq + z̄q̄)`
/// (per unit `b_{n₀}²`, without the factor `τ*`).
fn f_hat(k: &Kinetics, ep: &Eigenpair) -> (Vec2, Vec2, Vec2) {
    let e = C::from_polar(1.0, -ep.omega_tau());
    let q1 = ep.q1;
    let f20 = [
        2.0 * k.r * q1 * e + 2.0 * k.c2 * e - 2.0 * k.c3 * e * e,
        -2.0 * q1 / k.gamma,
    ];
    let f11 = [
        k.r * (q1 * e + (q1 * e).conj()) + 2.0 * k.c2 * e.re - 2.0 * k.c3,
        -(q1 + q1.conj()) / k.gamma,
    ];
    (f20, f11, conj(&f20))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCoefficients {
    pub g20: C,
    pub g11: C,
    pub g02: C,
}

pub fn g_coefficients(p: &ModelParams, ep: &Eigenpair) -> Result<GCoefficients> {
    let e = positive_equilibrium(p)?;
    let k = Kinetics::new(p, &e);
    let (f20, f11, f02) = f_hat(&k, ep);
    let pre = ep.tau_star * ep.m_norm * cubic_mode_integral(ep.n0, p.l());
    let proj = |f: &Vec2| pre * (ep.q2 * f[0] + f[1]);
    Ok(GCoefficients {
        g20: proj(&f20),
        g11: proj(&f11),
        g02: proj(&f02),
    })
}

/// Contribution of Neumann mode `n` to `W₂₀` and `W₁₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTerms {
    pub n: usize,
    /// `∫ b_{n₀}² bₙ dx`.
    pub weight: f64,
    pub e1: Vec2,
    pub e2: Vec2,
    pub e1_residual: f64,
    pub e2_residual: f64,
    /// `bₙ`-coefficient of `W₂₀` at `θ = -1` and `θ = 0`.
    pub w20: [Vec2; 2],
    /// `bₙ`-coefficient of `W₁₁` at `θ = -1` and `θ = 0`.
    pub w11: [Vec2; 2],
    /// Residuals of the operator equations for `W₂₀`, `W₁₁` at `θ = 0`.
    pub w20_residual: f64,
    pub w11_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterManifoldTerms {
    pub f_hat_20: Vec2,
    pub f_hat_11: Vec2,
    pub modes: Vec<ModeTerms>,
    /// `W₂₀` and `W₁₁` weighted by `∫b_{n₀}²bₙ` and summed over modes, at `θ = -1, 0`.
    pub w20: [Vec2; 2],
    pub w11: [Vec2; 2],
    pub q1_term: C,
    pub q2_term: C,
}

/// Coefficient of `e^{iωτ*θ}`-type terms of `W` along `b_{n₀}`.
fn w_center_part(ep: &Eigenpair, g: &GCoefficients, theta: f64) -> (Vec2, Vec2) {
    let wt = ep.omega_tau();
    let q = ep.q();
    let qb = conj(&q);
    let ep_ = C::from_polar(1.0, wt * theta);
    let em = ep_.conj();
    let iwt = I * wt;
    let w20 = add(
        &scale(-g.g20 / iwt * ep_, &q),
        &scale(-g.g02.conj() / (3.0 * iwt) * em, &qb),
    );
    let w11 = add(
        &scale(g.g11 / iwt * ep_, &q),
        &scale(-g.g11.conj() / iwt * em, &qb),
    );
    (w20, w11)
}

pub fn center_manifold_terms(
    p: &ModelParams,
    ep: &Eigenpair,
    g: &GCoefficients,
) -> Result<CenterManifoldTerms> {
    let e = positive_equilibrium(p)?;
    let k = Kinetics::new(p, &e);
    let blocks = LinearBlocks::new(p, &e);
    let tau = ep.tau_star;
    let wt = ep.omega_tau();
    let (f20, f11, _) = f_hat(&k, ep);
    let f20t = scale(c(tau), &f20);
    let f11t = scale(c(tau), &f11);
    let q = ep.q();
    let qb = conj(&q);

    let mut modes = Vec::new();
    let mut w20 = [[c(0.0); 2]; 2];
    let mut w11 = [[c(0.0); 2]; 2];
    for n in contributing_modes(ep.n0) {
        let weight = projection_weight(ep.n0, n, p.l());
        let k2 = p.wave_number_sq(n);
        let a1 = blocks.characteristic(tau, k2, 2.0 * I * wt);
        let rhs1 = scale(c(weight), &f20t);
        let (e1, e1_residual) = solve2(&a1, &rhs1)
            .ok_or_else(|| Error::Resonance(format!("2i*omega*tau is a characteristic value of mode {n}")))?;
        let a2 = blocks.eta(tau, k2, c(0.0));
        let rhs2 = scale(c(-weight), &f11t);
        let (e2, e2_residual) = solve2(&a2, &rhs2)
            .ok_or_else(|| Error::Resonance(format!("zero is a characteristic value of mode {n}")))?;

        let mut mw20 = [[c(0.0); 2]; 2];
        let mut mw11 = [[c(0.0); 2]; 2];
        for (slot, theta) in [-1.0, 0.0].into_iter().enumerate() {
            let (c20, c11) = if n == ep.n0 {
                w_center_part(ep, g, theta)
            } else {
                ([c(0.0); 2], [c(0.0); 2])
            };
            mw20[slot] = add(&c20, &scale(C::from_polar(1.0, 2.0 * wt * theta), &e1));
            mw11[slot] = add(&c11, &e2);
            w20[slot] = add(&w20[slot], &scale(c(weight), &mw20[slot]));
            w11[slot] = add(&w11[slot], &scale(c(weight), &mw11[slot]));
        }

        // A W - s W = -H at θ = 0, with H₂₀(0) = -g₂₀q - ḡ₀₂q̄ + τF̂₂₀⟨b_{n₀}², bₙ⟩.
        let center = n == ep.n0;
        let op = |w: &[Vec2; 2], s: C| {
            let now = mat_vec(&blocks.l1, &w[1]);
            let del = mat_vec(&blocks.l2, &w[0]);
            let dif = mat_vec(&blocks.diff, &w[1]);
            [
                tau * (now[0] + del[0] - k2 * dif[0]) - s * w[1][0],
                tau * (now[1] + del[1] - k2 * dif[1]) - s * w[1][1],
            ]
        };
        let h20 = {
            let mut h = scale(c(weight), &f20t);
            if center {
                h = add(&h, &scale(-g.g20, &q));
                h = add(&h, &scale(-g.g02.conj(), &qb));
            }
            h
        };
        let h11 = {
            let mut h = scale(c(weight), &f11t);
            if center {
                h = add(&h, &scale(-g.g11, &q));
                h = add(&h, &scale(-g.g11.conj(), &qb));
            }
            h
        };
        let w20_residual = norm(&add(&op(&mw20, 2.0 * I * wt), &h20));
        let w11_residual = norm(&add(&op(&mw11, c(0.0)), &h11));

        modes.push(ModeTerms {
            n,
            weight,
            e1,
            e2,
            e1_residual,
            e2_residual,
            w20: mw20,
            w11: mw11,
            w20_residual,
            w11_residual,
        });
    }

    let big_e = C::from_polar(1.0, -wt);
    let q1_term = ep.q2 * (6.0 * k.c4 * big_e - 2.0 * k.c3p * (2.0 + big_e * big_e));
    let q2_term = q2_closed_form(&k, ep, &w20, &w11);
    Ok(CenterManifoldTerms {
        f_hat_20: f20,
        f_hat_11: f11,
        modes,
        w20,
        w11,
        q1_term,
        q2_term,
    })
}

/// `q₂`-weighted quadratic cross terms `2F(q̄, W₂₀) + 4F(q, W₁₁)` (per `τ*M`),
/// with `W` already projected onto `b_{n₀}²`. Index `0` is `θ = -1`, `1` is `θ = 0`.
fn q2_closed_form(k: &Kinetics, ep: &Eigenpair, w20: &[Vec2; 2], w11: &[Vec2; 2]) -> C {
    let e = C::from_polar(1.0, -ep.omega_tau());
    let eb = e.conj();
    let q1 = ep.q1;
    let q1b = q1.conj();
    let (w20m, w20z) = (w20[0], w20[1]);
    let (w11m, w11z) = (w11[0], w11[1]);
    let first = k.r * (w20m[1] + q1b * eb * w20z[0]) - 2.0 * k.c3 * eb * w20m[0]
        + k.c2 * (w20m[0] + eb * w20z[0])
        + 2.0
            * (k.r * (w11m[1] + q1 * e * w11z[0]) - 2.0 * k.c3 * e * w11m[0]
                + k.c2 * (w11m[0] + e * w11z[0]));
    let second = -(w20z[1] + q1b * w20z[0]) - 2.0 * (w11z[1] + q1 * w11z[0]);
    ep.q2 * first + second / k.gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodTrend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfCoefficients {
    pub g20: C,
    pub g11: C,
    pub g02: C,
    pub g21: C,
    pub c1: C,
    pub mu2: f64,
    pub beta2: f64,
    /// Period correction in delay-rescaled time.
    pub t2: f64,
    pub direction: Direction,
    pub orbit_stability: OrbitStability,
    pub period_trend: PeriodTrend,
}

impl HopfCoefficients {
    /// Assemble `c₁(0)`, `μ₂`, `β₂`, `T₂` and the verdicts from the g's and the
    /// root velocity `λ'(τ*)` (real time) at the crossing.
    pub fn assemble(g: &GCoefficients, g21: C, omega: f64, tau: f64, dlambda: C) -> Self {
        let wt = omega * tau;
        let c1 =
            I / (2.0 * wt) * (g.g20 * g.g11 - 2.0 * g.g11.norm_sqr() - g.g02.norm_sqr() / 3.0) + g21 / 2.0;
        let mu2 = -c1.re / (tau * dlambda.re);
        let beta2 = 2.0 * c1.re;
        let t2 = -(c1.im + mu2 * (omega + tau * dlambda.im)) / wt;
        Self {
            g20: g.g20,
            g11: g.g11,
            g02: g.g02,
            g21,
            c1,
            mu2,
            beta2,
            t2,
            direction: if mu2 > 0.0 {
                Direction::Forward
            } else {
                Direction::Backward
            },
            orbit_stability: if beta2 < 0.0 {
                OrbitStability::Stable
            } else {
                OrbitStability::Unstable
            },
            period_trend: if t2 > 0.0 {
                PeriodTrend::Increasing
            } else {
                PeriodTrend::Decreasing
            },
        }
    }
}

/// Everything produced along the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub crossing: HopfPoint,
    pub eigenpair: Eigenpair,
    pub terms: CenterManifoldTerms,
    pub coefficients: HopfCoefficients,
}

/// Full pipeline at `τ*` for the given parameters (the `tau` field is ignored).
pub fn normal_form_report(p: &ModelParams) -> Result<NormalFormReport> {
    let hyp = check_hypotheses(p);
    if !hyp.all() {
        let failed: Vec<&str> = [("(H1)", hyp.h1), ("(H2)", hyp.h2), ("(H3)", hyp.h3)]
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| *name)
            .collect();
        return Err(Error::HypothesisViolation(format!("{} fails", failed.join(", "))));
    }
    let ts = tau_star(p, None, 0)?;
    let crossing = *ts.hopf_point();
    let ep = eigenpair(p, ts.n0, ts.omega, ts.tau)?;
    let g = g_coefficients(p, &ep)?;
    let terms = center_manifold_terms(p, &ep, &g)?;
    let g21 = ep.tau_star * ep.m_norm * (terms.q1_term * quartic_mode_integral(ep.n0, p.l()) + terms.q2_term);
    let coefficients = HopfCoefficients::assemble(&g, g21, ep.omega, ep.tau_star, crossing.dlambda_dtau);
    Ok(NormalFormReport {
        crossing,
        eigenpair: ep,
        terms,
        coefficients,
    })
}

pub fn hopf_coefficients(p: &ModelParams) -> Result<HopfCoefficients> {
    Ok(normal_form_report(p)?.coefficients)
}

/// Real-time mode matrix `iωI - Γ⁻¹L₁ - Γ⁻¹L₂e^{-iωτ} + k²Γ⁻¹D`; its
/// determinant is `Δₙ(iω, τ)/γ`.
pub fn mode_matrix(p: &ModelParams, n: usize, omega: f64, tau: f64) -> Result<Mat2> {
    let b = LinearBlocks::new(p, &positive_equilibrium(p)?);
    let e = C::from_polar(1.0, -omega * tau);
    let k2 = p.wave_number_sq(n);
    let mut out = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let diag = if i == j { I * omega } else { c(0.0) };
            out[i][j] = diag - b.l1[i][j] - b.l2[i][j] * e + k2 * b.diff[i][j];
        }
    }
    Ok(out)
}
