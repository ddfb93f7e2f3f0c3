//! Model parameters, kinetics, equilibria and hypothesis predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensionless parameters of the delayed mussel–algae system.
///
/// All fields are strictly positive except `tau`, which may be zero.
/// The spatial domain is `(0, lπ)`, so mode `n` has wave number `n / l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    r: f64,
    alpha: f64,
    gamma: f64,
    d: f64,
    tau: f64,
    l: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    r: f64,
    alpha: f64,
    gamma: f64,
    d: f64,
    tau: f64,
    l: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.r, raw.alpha, raw.gamma, raw.d, raw.tau, raw.l)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            r: p.r,
            alpha: p.alpha,
            gamma: p.gamma,
            d: p.d,
            tau: p.tau,
            l: p.l,
        }
    }
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

impl ModelParams {
    pub fn new(r: f64, alpha: f64, gamma: f64, d: f64, tau: f64, l: f64) -> Result<Self> {
        require_positive("r", r)?;
        require_positive("alpha", alpha)?;
        require_positive("gamma", gamma)?;
        require_positive("d", d)?;
        require_positive("l", l)?;
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be finite and >= 0, got {tau}"
            )));
        }
        Ok(Self {
            r,
            alpha,
            gamma,
            d,
            tau,
            l,
        })
    }

    /// The parameter set used for the delay-induced Hopf example:
    /// `γ = 0.5, d = 1, α = 0.1, r = 2, l = 1`, with the given delay.
    pub fn reference(tau: f64) -> Self {
        Self::new(2.0, 0.1, 0.5, 1.0, tau, 1.0).expect("reference parameters are valid")
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn with_r(self, r: f64) -> Result<Self> {
        Self::new(r, self.alpha, self.gamma, self.d, self.tau, self.l)
    }
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.r, alpha, self.gamma, self.d, self.tau, self.l)
    }
    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.r, self.alpha, gamma, self.d, self.tau, self.l)
    }
    pub fn with_d(self, d: f64) -> Result<Self> {
        Self::new(self.r, self.alpha, self.gamma, d, self.tau, self.l)
    }
    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.r, self.alpha, self.gamma, self.d, tau, self.l)
    }
    pub fn with_l(self, l: f64) -> Result<Self> {
        Self::new(self.r, self.alpha, self.gamma, self.d, self.tau, l)
    }

    /// Squared wave number `(n / l)^2` of Neumann mode `n`.
    pub fn wave_number_sq(&self, n: usize) -> f64 {
        let k = n as f64 / self.l;
        k * k
    }

    /// Length of the spatial domain, `lπ`.
    pub fn domain_length(&self) -> f64 {
        self.l * std::f64::consts::PI
    }

    /// `0 < α < 1 < r < 1/α`, strict and without tolerance.
    pub fn satisfies_h1(&self) -> bool {
        0.0 < self.alpha && self.alpha < 1.0 && 1.0 < self.r && self.r < 1.0 / self.alpha
    }

    pub(crate) fn require_h1(&self) -> Result<()> {
        if self.satisfies_h1() {
            Ok(())
        } else {
            Err(Error::HypothesisViolation(format!(
                "(H1) requires 0 < alpha < 1 < r < 1/alpha; got alpha = {}, r = {}",
                self.alpha, self.r
            )))
        }
    }
}

/// A spatially homogeneous steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub m: f64,
    pub a: f64,
}

impl Equilibrium {
    /// Bare-sediment state `(0, 1)`.
    pub const BOUNDARY: Equilibrium = Equilibrium { m: 0.0, a: 1.0 };
}

/// Kinetic rates `(dm/dt, da/dt)` without diffusion.
///
/// The `a` rate already carries the `1/γ` factor.
pub fn reaction_rhs(m_now: f64, a_now: f64, m_delayed: f64, a_delayed: f64, p: &ModelParams) -> (f64, f64) {
    let dm = m_now * (p.r * a_delayed - 1.0 / (1.0 + m_delayed));
    let da = (p.alpha * (1.0 - a_now) - m_now * a_now) / p.gamma;
    (dm, da)
}

/// The unique coexistence state `E* = (m*, a*)` under (H1).
pub fn positive_equilibrium(p: &ModelParams) -> Result<Equilibrium> {
    p.require_h1()?;
    let (r, alpha) = (p.r, p.alpha);
    let m = alpha * (r - 1.0) / (1.0 - alpha * r);
    let a = (1.0 - alpha * r) / (r * (1.0 - alpha));
    if !(m > 0.0 && a > 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "positive equilibrium degenerates: m* = {m}, a* = {a}"
        )));
    }
    Ok(Equilibrium { m, a })
}

/// `δ₀(r) = (1 - αr) / (1 - α)`; equals `r a*` under (H1).
pub fn delta0(p: &ModelParams) -> f64 {
    (1.0 - p.alpha * p.r) / (1.0 - p.alpha)
}

/// `ρ₀(r) = r(1 - α) / (γ(r - 1))`, undefined at `r = 1`.
pub fn rho0(p: &ModelParams) -> Option<f64> {
    if p.r == 1.0 {
        None
    } else {
        Some(p.r * (1.0 - p.alpha) / (p.gamma * (p.r - 1.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub name: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub details: Vec<Detail>,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn all(&self) -> bool {
        self.h1 && self.h2 && self.h3
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.details.iter().find(|d| d.name == name).and_then(|d| d.value)
    }
}

/// Evaluates (H1), (H2) and (H3) with strict inequalities.
///
/// (H2) is `δ₀² - ρ₀ < 0`; (H3) is the two-branch condition excluding a zero
/// characteristic root, `s := dγρ₀ - δ₀² > 0`, or `s < 0` and
/// `s² - 4d D̃₀ / m*² < 0`.
pub fn check_hypotheses(p: &ModelParams) -> HypothesisReport {
    let mut details = Vec::new();
    let mut notes = Vec::new();
    let h1 = p.satisfies_h1();
    let d0 = delta0(p);
    details.push(Detail {
        name: "delta0".into(),
        value: Some(d0),
    });
    if !h1 {
        notes.push("(H1) fails: 0 < alpha < 1 < r < 1/alpha not satisfied".into());
    }

    let rho = rho0(p);
    details.push(Detail {
        name: "rho0".into(),
        value: rho,
    });
    let (h2, h3) = match rho {
        None => {
            notes.push("rho0 undefined at r = 1; (H2) and (H3) reported false".into());
            (false, false)
        }
        Some(rho) => {
            let h2_quantity = d0 * d0 - rho;
            details.push(Detail {
                name: "delta0^2 - rho0".into(),
                value: Some(h2_quantity),
            });
            let h2 = h2_quantity < 0.0;

            let s = p.d * p.gamma * rho - d0 * d0;
            details.push(Detail {
                name: "d*gamma*rho0 - delta0^2".into(),
                value: Some(s),
            });
            let denom = 1.0 - p.alpha * p.r;
            let h3 = if denom == 0.0 {
                notes.push("m* undefined at alpha*r = 1; (H3) reported false".into());
                false
            } else {
                let m_star = p.alpha * (p.r - 1.0) / denom;
                let a_star = denom / (p.r * (1.0 - p.alpha));
                let d_tilde0 = p.alpha * p.r * (p.r - 1.0) * a_star;
                let disc = s * s - 4.0 * p.d * d_tilde0 / (m_star * m_star);
                details.push(Detail {
                    name: "(H3) discriminant".into(),
                    value: Some(disc),
                });
                s > 0.0 || (s < 0.0 && disc < 0.0)
            };
            (h2, h3)
        }
    };
    HypothesisReport {
        h1,
        h2,
        h3,
        details,
        notes,
    }
}
