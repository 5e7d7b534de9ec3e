//! Closed-form marginal densities of generalized Gamma processes and their compositions.
//!
//! Every law is evaluated in the logarithmic domain and exponentiated at the end,
//! so extreme parameter combinations underflow to zero rather than to `NaN`.

use crate::mellin::{self, Clock, GGParams, MellinError, MellinForm};
use crate::quad::{self, QuadError, Tolerance};
use crate::specfun::{self, ComplexValue, SpecFunError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("point outside the support: {0}")]
    Domain(String),
    #[error("density diverges at the origin ({0:?})")]
    OriginDivergence(Divergence),
    #[error("unknown law `{0}`")]
    UnknownLaw(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Mellin(#[from] MellinError),
}

type Result<T> = std::result::Result<T, DensityError>;

/// Where a law lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    PositiveLine,
    RealLine,
    /// Rotation invariant laws on `ℝⁿ`, evaluated through the radius.
    RealN(usize),
    PositiveQuadrant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    None,
    Power,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportBoundary {
    pub includes_origin: bool,
    pub divergence_at_origin: Divergence,
}

/// Misprinted normalizing constants kept next to the corrected ones.
///
/// `ratio` is printed constant divided by corrected constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedConstant {
    pub label: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DensityLaw {
    /// Generalized Gamma marginal `Q(x; c(t), μ, γ)`.
    Gg { mu: f64, gamma: f64, clock: Clock },
    /// `G̃_γ(G̃_γ(t))`, a `K₀` law.
    Gtilde { mu: f64, gamma: f64 },
    /// `G̃_γ(G̃_{-γ}(t))` with equal shapes.
    Qaqa { mu: f64, gamma: f64 },
    /// `G̃_{γ,μ₁}(G̃_{-γ,μ₂}(t))`.
    Tdist0 { mu1: f64, mu2: f64, gamma: f64 },
    /// Folded Student law with scale `t`.
    Tdist1 { nu: f64 },
    /// `G_{γ,μ}(G_{1,μ}(t))`.
    GgGamma { mu: f64, gamma: f64 },
    /// `G_{γ,μ₁}(G_{1,μ₂}(t))`.
    SpecialGg { mu1: f64, mu2: f64, gamma: f64 },
    /// Brownian motion run by a Gamma subordinator.
    Bg1 { mu: f64 },
    /// `B_{γ/2}(G_{γ,μ}(t))`, same law as [`DensityLaw::Bg1`].
    Ssr { mu: f64, gamma: f64 },
    /// `n` independent Brownian motions sharing one Gamma clock.
    MultiBg1 { mu: f64, n: usize },
    /// `t^H Z₁Z₂` for independent standard normals.
    K0Fbm { hurst: f64 },
    /// Correlated pair `(G_γ(t), G_γ(s))` with `t = s` in one-argument calls.
    BivariateGamma { mu: f64, gamma: f64, rho: f64 },
    /// `X(T(t))` for a generalized Gamma process `X` and any positive law `T`.
    Compose { outer: GGParams, inner: Box<DensityLaw> },
}

fn ln_k(nu: f64, z: f64) -> Result<f64> {
    let nu = nu.abs();
    if z < 1e-100 && z > 0.0 {
        return Ok(if nu == 0.0 {
            (-(0.5 * z).ln() - specfun::EULER_GAMMA).ln()
        } else {
            lg(nu) + (nu - 1.0) * LN_2 - nu * z.ln()
        });
    }
    Ok(specfun::bessel_k_scaled(nu, z)?.ln() - z)
}

/// `ln I_ν(w)`, switching to the large-argument expansion before the series overflows.
fn ln_bessel_i(nu: f64, w: f64) -> Result<f64> {
    if w < 300.0 {
        return Ok(specfun::bessel_i(nu, w)?.ln());
    }
    let m = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        let j = (2 * k - 1) as f64;
        term *= -(m - j * j) / (k as f64 * 8.0 * w);
        sum += term;
    }
    Ok(w - 0.5 * (2.0 * PI * w).ln() + sum.ln())
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn lg(x: f64) -> f64 {
    specfun::ln_gamma(x).expect("positive argument")
}

fn gg_ln_density(x: f64, c: f64, mu: f64, gamma: f64) -> f64 {
    if !(c > 0.0 && c.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let lx = x.ln();
    gamma.abs().ln() + (mu * gamma - 1.0) * lx - (gamma * lx).exp() / c - mu * c.ln() - lg(mu)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DensityError::InvalidParams(format!("{name} must be positive, got {v}")))
    }
}

fn nonzero(name: &str, v: f64) -> Result<()> {
    if v != 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DensityError::InvalidParams(format!("{name} must be nonzero, got {v}")))
    }
}

fn classify(p: f64, log_at_zero: bool) -> SupportBoundary {
    if p > 0.0 || (p == 0.0 && !log_at_zero) {
        SupportBoundary { includes_origin: true, divergence_at_origin: Divergence::None }
    } else if p == 0.0 {
        SupportBoundary { includes_origin: false, divergence_at_origin: Divergence::Logarithmic }
    } else {
        SupportBoundary { includes_origin: false, divergence_at_origin: Divergence::Power }
    }
}

/// Surface area of the unit sphere in `ℝⁿ`.
pub fn sphere_area(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * PI.powf(h) / specfun::gamma(h).expect("positive")
}

impl DensityLaw {
    pub fn id(&self) -> &'static str {
        match self {
            DensityLaw::Gg { .. } => "gg",
            DensityLaw::Gtilde { .. } => "gtilde",
            DensityLaw::Qaqa { .. } => "qaqa",
            DensityLaw::Tdist0 { .. } => "tdist0",
            DensityLaw::Tdist1 { .. } => "tdist1",
            DensityLaw::GgGamma { .. } => "gg_gamma",
            DensityLaw::SpecialGg { .. } => "special_gg",
            DensityLaw::Bg1 { .. } => "bg1",
            DensityLaw::Ssr { .. } => "ssr",
            DensityLaw::MultiBg1 { .. } => "multi_bg1",
            DensityLaw::K0Fbm { .. } => "k0_fbm",
            DensityLaw::BivariateGamma { .. } => "bivariate_gamma",
            DensityLaw::Compose { .. } => "compose",
        }
    }

    /// Build a law from its identifier and a flat parameter map.
    ///
    /// `gg` reads an optional `clock` code: 0 raw, 1 tilde, 2 affine with `alpha`, `beta`.
    pub fn from_params(id: &str, p: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str| -> Result<f64> {
            p.get(k).copied().ok_or_else(|| DensityError::InvalidParams(format!("law `{id}` needs parameter `{k}`")))
        };
        let law = match id {
            "gg" => {
                let clock = match p.get("clock").copied().unwrap_or(0.0) as i64 {
                    0 => Clock::Raw,
                    1 => Clock::Tilde,
                    2 => Clock::Affine { alpha: get("alpha")?, beta: get("beta")? },
                    other => return Err(DensityError::InvalidParams(format!("clock code {other}"))),
                };
                DensityLaw::Gg { mu: get("mu")?, gamma: get("gamma")?, clock }
            }
            "gtilde" => DensityLaw::Gtilde { mu: get("mu")?, gamma: get("gamma")? },
            "qaqa" => DensityLaw::Qaqa { mu: get("mu")?, gamma: get("gamma")? },
            "tdist0" => DensityLaw::Tdist0 { mu1: get("mu1")?, mu2: get("mu2")?, gamma: get("gamma")? },
            "tdist1" => DensityLaw::Tdist1 { nu: get("nu")? },
            "gg_gamma" => DensityLaw::GgGamma { mu: get("mu")?, gamma: get("gamma")? },
            "special_gg" => DensityLaw::SpecialGg { mu1: get("mu1")?, mu2: get("mu2")?, gamma: get("gamma")? },
            "bg1" => DensityLaw::Bg1 { mu: get("mu")? },
            "ssr" => DensityLaw::Ssr { mu: get("mu")?, gamma: get("gamma")? },
            "multi_bg1" => {
                let n = get("n")?;
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(DensityError::InvalidParams(format!("dimension must be a positive integer, got {n}")));
                }
                DensityLaw::MultiBg1 { mu: get("mu")?, n: n as usize }
            }
            "k0_fbm" => DensityLaw::K0Fbm { hurst: get("hurst")? },
            "bivariate_gamma" => DensityLaw::BivariateGamma { mu: get("mu")?, gamma: get("gamma")?, rho: get("rho")? },
            "compose" => return Err(DensityError::InvalidParams("compositions are built from JSON".into())),
            other => return Err(DensityError::UnknownLaw(other.to_string())),
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DensityLaw::Gg { mu, gamma, clock } => {
                GGParams::new(mu, gamma, clock)?;
            }
            DensityLaw::Gtilde { mu, gamma } => {
                positive("mu", mu)?;
                nonzero("gamma", gamma)?;
            }
            DensityLaw::Qaqa { mu, gamma } | DensityLaw::GgGamma { mu, gamma } => {
                positive("mu", mu)?;
                positive("gamma", gamma)?;
            }
            DensityLaw::Tdist0 { mu1, mu2, gamma } | DensityLaw::SpecialGg { mu1, mu2, gamma } => {
                positive("mu1", mu1)?;
                positive("mu2", mu2)?;
                positive("gamma", gamma)?;
            }
            DensityLaw::Tdist1 { nu } => positive("nu", nu)?,
            DensityLaw::Bg1 { mu } => positive("mu", mu)?,
            DensityLaw::Ssr { mu, gamma } => {
                positive("mu", mu)?;
                if !(gamma > 0.0 && gamma < 2.0) {
                    return Err(DensityError::InvalidParams(format!("gamma must lie in (0, 2), got {gamma}")));
                }
            }
            DensityLaw::MultiBg1 { mu, n } => {
                positive("mu", mu)?;
                if n == 0 {
                    return Err(DensityError::InvalidParams("dimension must be at least 1".into()));
                }
            }
            DensityLaw::K0Fbm { hurst } => {
                if !(hurst > 0.0 && hurst <= 1.0) {
                    return Err(DensityError::InvalidParams(format!("hurst must lie in (0, 1], got {hurst}")));
                }
            }
            DensityLaw::BivariateGamma { mu, gamma, rho } => {
                positive("mu", mu)?;
                nonzero("gamma", gamma)?;
                if !(0.0..1.0).contains(&rho) {
                    return Err(DensityError::InvalidParams(format!("rho must lie in [0, 1), got {rho}")));
                }
            }
            DensityLaw::Compose { ref outer, ref inner } => {
                outer.validate()?;
                inner.validate()?;
                if inner.support() != Support::PositiveLine {
                    return Err(DensityError::InvalidParams("the inner law of a composition must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn support(&self) -> Support {
        match self {
            DensityLaw::Bg1 { .. } | DensityLaw::Ssr { .. } | DensityLaw::K0Fbm { .. } => Support::RealLine,
            DensityLaw::MultiBg1 { n, .. } => Support::RealN(*n),
            DensityLaw::BivariateGamma { .. } => Support::PositiveQuadrant,
            _ => Support::PositiveLine,
        }
    }

    /// Typical magnitude of the variable at time `t`, used to center quadratures.
    pub fn scale(&self, t: f64) -> f64 {
        match *self {
            DensityLaw::Gg { mu, gamma, clock } => GGParams { mu, gamma, clock }.scale_at(t).powf(1.0 / gamma),
            DensityLaw::Gtilde { .. } | DensityLaw::Qaqa { .. } | DensityLaw::Tdist0 { .. } | DensityLaw::Tdist1 { .. } => t,
            DensityLaw::GgGamma { gamma, .. } | DensityLaw::SpecialGg { gamma, .. } | DensityLaw::BivariateGamma { gamma, .. } => {
                t.powf(1.0 / gamma)
            }
            DensityLaw::Bg1 { .. } | DensityLaw::MultiBg1 { .. } | DensityLaw::Ssr { .. } => t.sqrt(),
            DensityLaw::K0Fbm { hurst } => t.powf(hurst),
            DensityLaw::Compose { ref outer, ref inner } => outer.scale_at(inner.scale(t)).powf(1.0 / outer.gamma),
        }
        .max(f64::MIN_POSITIVE)
    }

    /// Behavior at the origin, from the small-argument exponent of each law.
    pub fn boundary(&self) -> SupportBoundary {
        match *self {
            DensityLaw::Gg { mu, gamma, .. } => {
                if gamma < 0.0 {
                    classify(1.0, false)
                } else {
                    classify(mu * gamma - 1.0, false)
                }
            }
            DensityLaw::Gtilde { mu, gamma } => {
                if gamma < 0.0 {
                    classify(1.0, false)
                } else {
                    classify(gamma * mu - 1.0, true)
                }
            }
            DensityLaw::GgGamma { mu, gamma } => classify(gamma * mu - 1.0, true),
            DensityLaw::Qaqa { mu, gamma } => classify(mu * gamma - 1.0, false),
            DensityLaw::Tdist0 { mu1, gamma, .. } => classify(gamma * mu1 - 1.0, false),
            DensityLaw::Tdist1 { .. } => classify(0.0, false),
            DensityLaw::SpecialGg { mu1, mu2, gamma } => classify(gamma * mu1.min(mu2) - 1.0, mu1 == mu2),
            DensityLaw::Bg1 { mu } | DensityLaw::Ssr { mu, .. } => Self::radial_boundary(mu, 1),
            DensityLaw::MultiBg1 { mu, n } => Self::radial_boundary(mu, n),
            DensityLaw::K0Fbm { .. } => classify(0.0, true),
            DensityLaw::BivariateGamma { mu, gamma, .. } => {
                if gamma < 0.0 {
                    classify(1.0, false)
                } else {
                    classify(mu * gamma - 1.0, false)
                }
            }
            DensityLaw::Compose { ref outer, .. } => {
                if outer.gamma > 0.0 && outer.mu * outer.gamma > 1.0 {
                    classify(1.0, false)
                } else {
                    SupportBoundary { includes_origin: false, divergence_at_origin: Divergence::None }
                }
            }
        }
    }

    fn radial_boundary(mu: f64, n: usize) -> SupportBoundary {
        let nu = mu - 0.5 * n as f64;
        if nu > 0.0 {
            classify(1.0, false)
        } else if nu == 0.0 {
            classify(0.0, true)
        } else {
            classify(-1.0, false)
        }
    }

    /// Density at a scalar point. Real-line laws are even; `RealN` laws take the radius.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(DensityError::Domain(format!("t = {t}")));
        }
        if x.is_nan() {
            return Err(DensityError::Domain("x is NaN".into()));
        }
        let x = match self.support() {
            Support::RealLine => x.abs(),
            Support::PositiveQuadrant => return self.eval2(x, x, t, t),
            Support::RealN(_) if x < 0.0 => return Err(DensityError::Domain(format!("radius {x} is negative"))),
            Support::PositiveLine if x < 0.0 => return Err(DensityError::Domain(format!("x = {x} is negative"))),
            _ => x,
        };
        if x.is_infinite() {
            return Ok(0.0);
        }
        if x == 0.0 {
            return self.at_origin(t);
        }
        let v = self.ln_density(x, t)?.exp();
        if v.is_nan() {
            return Err(DensityError::Domain(format!("density is not representable at x = {x}, t = {t}")));
        }
        Ok(v)
    }

    /// Density at a point of the support given in coordinates.
    pub fn eval_point(&self, point: &[f64], t: f64) -> Result<f64> {
        match self.support() {
            Support::RealN(n) => {
                if point.len() != n {
                    return Err(DensityError::Domain(format!("expected {n} coordinates, got {}", point.len())));
                }
                self.eval(point.iter().map(|v| v * v).sum::<f64>().sqrt(), t)
            }
            Support::PositiveQuadrant => match point {
                [x, y] => self.eval2(*x, *y, t, t),
                _ => Err(DensityError::Domain("expected two coordinates".into())),
            },
            _ => match point {
                [x] => self.eval(*x, t),
                _ => Err(DensityError::Domain("expected one coordinate".into())),
            },
        }
    }

    fn ln_density(&self, x: f64, t: f64) -> Result<f64> {
        let lx = x.ln();
        let lt = t.ln();
        let v = match *self {
            DensityLaw::Gg { mu, gamma, clock } => gg_ln_density(x, GGParams { mu, gamma, clock }.scale_at(t), mu, gamma),
            DensityLaw::Gtilde { mu, gamma } => {
                let r = gamma * (lx - lt);
                (2.0 * gamma.abs()).ln() - lx - 2.0 * lg(mu) + mu * r + ln_k(0.0, 2.0 * (0.5 * r).exp())?
            }
            DensityLaw::Qaqa { mu, gamma } => Self::ln_tdist0(lx, lt, mu, mu, gamma),
            DensityLaw::Tdist0 { mu1, mu2, gamma } => Self::ln_tdist0(lx, lt, mu1, mu2, gamma),
            DensityLaw::Tdist1 { nu } => {
                LN_2 + nu * lt - 0.5 * (nu + 1.0) * ln_add_exp(2.0 * lx, 2.0 * lt) + lg(0.5 * (nu + 1.0))
                    - 0.5 * PI.ln()
                    - lg(0.5 * nu)
            }
            DensityLaw::GgGamma { mu, gamma } => {
                let r = gamma * lx - lt;
                LN_2 + gamma.ln() + (mu * gamma - 1.0) * lx - mu * lt - 2.0 * lg(mu) + ln_k(0.0, 2.0 * (0.5 * r).exp())?
            }
            DensityLaw::SpecialGg { mu1, mu2, gamma } => {
                let r = gamma * lx - lt;
                LN_2 + gamma.ln() - lx - lg(mu1) - lg(mu2) + 0.5 * (mu1 + mu2) * r + ln_k(mu2 - mu1, 2.0 * (0.5 * r).exp())?
            }
            DensityLaw::Bg1 { mu } | DensityLaw::Ssr { mu, .. } => Self::ln_multi_bg1(x, t, mu, 1)?,
            DensityLaw::MultiBg1 { mu, n } => Self::ln_multi_bg1(x, t, mu, n)?,
            DensityLaw::K0Fbm { hurst } => -PI.ln() - hurst * lt + ln_k(0.0, (lx - hurst * lt).exp())?,
            DensityLaw::BivariateGamma { .. } => return Ok(self.eval2(x, x, t, t)?.ln()),
            DensityLaw::Compose { ref outer, ref inner } => return Ok(Self::compose_eval(outer, inner, x, t)?.ln()),
        };
        Ok(v)
    }

    fn ln_tdist0(lx: f64, lt: f64, mu1: f64, mu2: f64, gamma: f64) -> f64 {
        gamma.ln() + (gamma * mu1 - 1.0) * lx + gamma * mu2 * lt - (mu1 + mu2) * ln_add_exp(gamma * lx, gamma * lt)
            + lg(mu1 + mu2)
            - lg(mu1)
            - lg(mu2)
    }

    fn ln_multi_bg1(r: f64, t: f64, mu: f64, n: usize) -> Result<f64> {
        let h = 0.5 * n as f64;
        let a = (2.0 / t).sqrt();
        Ok(Self::ln_multi_bg1_const(t, mu, n) + (mu - h) * r.ln() + ln_k(mu - h, r * a)?)
    }

    fn ln_multi_bg1_const(t: f64, mu: f64, n: usize) -> f64 {
        let h = 0.5 * n as f64;
        (1.0 - mu - h) * LN_2 - h * PI.ln() - lg(mu) + 0.5 * (mu + h) * (2.0 / t).ln()
    }

    fn at_origin(&self, t: f64) -> Result<f64> {
        let b = self.boundary();
        if b.divergence_at_origin != Divergence::None {
            return Err(DensityError::OriginDivergence(b.divergence_at_origin));
        }
        if !b.includes_origin {
            return Err(DensityError::Domain("the origin is not evaluated for this law".into()));
        }
        let lt = t.ln();
        let v = match *self {
            DensityLaw::Gg { mu, gamma, clock } if gamma > 0.0 && mu * gamma == 1.0 => {
                let c = GGParams { mu, gamma, clock }.scale_at(t);
                gamma / (c.powf(mu) * specfun::gamma(mu)?)
            }
            DensityLaw::Qaqa { mu, gamma } if mu * gamma == 1.0 => (gamma.ln() - lt + lg(2.0 * mu) - 2.0 * lg(mu)).exp(),
            DensityLaw::Tdist0 { mu1, mu2, gamma } if gamma * mu1 == 1.0 => {
                (gamma.ln() - lt + lg(mu1 + mu2) - lg(mu1) - lg(mu2)).exp()
            }
            DensityLaw::Tdist1 { nu } => (LN_2 - lt + lg(0.5 * (nu + 1.0)) - 0.5 * PI.ln() - lg(0.5 * nu)).exp(),
            DensityLaw::SpecialGg { mu1, mu2, gamma } if gamma * mu1.min(mu2) == 1.0 => {
                let m = mu1.min(mu2);
                (gamma.ln() + lg((mu2 - mu1).abs()) - lg(mu1) - lg(mu2) - m * lt).exp()
            }
            DensityLaw::Bg1 { mu } | DensityLaw::Ssr { mu, .. } => Self::multi_bg1_origin(t, mu, 1),
            DensityLaw::MultiBg1 { mu, n } => Self::multi_bg1_origin(t, mu, n),
            _ => 0.0,
        };
        Ok(v)
    }

    fn multi_bg1_origin(t: f64, mu: f64, n: usize) -> f64 {
        let nu = mu - 0.5 * n as f64;
        let ln_k_lead = lg(nu) + (nu - 1.0) * LN_2 - 0.5 * nu * (2.0 / t).ln();
        (Self::ln_multi_bg1_const(t, mu, n) + ln_k_lead).exp()
    }

    fn compose_eval(outer: &GGParams, inner: &DensityLaw, x: f64, t: f64) -> Result<f64> {
        let f = |s: f64| -> f64 {
            let g = match inner.eval(s, t) {
                Ok(v) => v,
                Err(_) => return 0.0,
            };
            if g == 0.0 {
                return 0.0;
            }
            gg_ln_density(x, outer.scale_at(s), outer.mu, outer.gamma).exp() * g
        };
        Ok(quad::integrate_positive(f, inner.scale(t), Tolerance::new(1e-300, 1e-11))?.value)
    }

    /// Joint density of the correlated pair at times `t` (for `x`) and `s` (for `y`).
    pub fn eval2(&self, x: f64, y: f64, t: f64, s: f64) -> Result<f64> {
        let DensityLaw::BivariateGamma { mu, gamma, rho } = *self else {
            return Err(DensityError::Domain("joint evaluation needs the bivariate law".into()));
        };
        if x < 0.0 || y < 0.0 {
            return Err(DensityError::Domain(format!("({x}, {y}) is outside the quadrant")));
        }
        if x == 0.0 || y == 0.0 {
            return Ok(0.0);
        }
        let phi = 1.0 - rho;
        let (lx, ly) = (x.ln(), y.ln());
        let (lu, lv) = (gamma * lx - t.ln(), gamma * ly - s.ln());
        let base = 2.0 * gamma.abs().ln() + (gamma * mu - 1.0) * (lx + ly) - (lu.exp() + lv.exp()) / phi - mu * (phi.ln() + (t * s).ln()) - lg(mu);
        if rho == 0.0 {
            return Ok((base - lg(mu)).exp());
        }
        let lz = rho.ln() + lu + lv - 2.0 * phi.ln();
        let w = 2.0 * (0.5 * lz).exp();
        let bessel = if w < 1e-100 { -lg(mu) } else { 0.5 * (1.0 - mu) * lz + ln_bessel_i(mu - 1.0, w)? };
        Ok((base + bessel).exp())
    }

    /// Symbolic Mellin transform of the law, folded for real-line laws and radial for `ℝⁿ`.
    pub fn mellin_form(&self) -> Option<MellinForm> {
        let tilde = |mu: f64, g: f64| mellin::mellin_of_gg(&GGParams { mu, gamma: g, clock: Clock::Tilde });
        let raw = |mu: f64, g: f64| mellin::mellin_of_gg(&GGParams { mu, gamma: g, clock: Clock::Raw });
        let form = match *self {
            DensityLaw::Gg { mu, gamma, clock } => Ok(mellin::mellin_of_gg(&GGParams { mu, gamma, clock })),
            DensityLaw::Gtilde { mu, gamma } => mellin::subordinate(&tilde(mu, gamma), &tilde(mu, gamma)),
            DensityLaw::Qaqa { mu, gamma } => mellin::subordinate(&tilde(mu, gamma), &tilde(mu, -gamma)),
            DensityLaw::Tdist0 { mu1, mu2, gamma } => mellin::subordinate(&tilde(mu1, gamma), &tilde(mu2, -gamma)),
            DensityLaw::Tdist1 { nu } => mellin::subordinate(&tilde(0.5, 2.0), &tilde(0.5 * nu, -2.0)),
            DensityLaw::GgGamma { mu, gamma } => mellin::subordinate(&raw(mu, gamma), &raw(mu, 1.0)),
            DensityLaw::SpecialGg { mu1, mu2, gamma } => mellin::subordinate(&raw(mu1, gamma), &raw(mu2, 1.0)),
            DensityLaw::Bg1 { mu } => mellin::subordinate(&mellin::mellin_of_folded_gaussian(0.5), &raw(mu, 1.0)),
            DensityLaw::Ssr { mu, gamma } => mellin::subordinate(&mellin::mellin_of_folded_gaussian(0.5 * gamma), &raw(mu, gamma)),
            DensityLaw::MultiBg1 { mu, n } => {
                let chi = chi_form(n);
                mellin::power_map(&raw(mu, 1.0), 0.5).and_then(|g| mellin::product(&chi, &g))
            }
            DensityLaw::K0Fbm { hurst } => {
                let normal = MellinForm::new(
                    -0.5 * LN_2 - 0.5 * PI.ln(),
                    0.5 * LN_2,
                    0.0,
                    0.0,
                    vec![mellin::GammaFactor::new(0.5, 0.0, 1)],
                    mellin::Strip::FULL,
                );
                normal.and_then(|u| mellin::product(&mellin::mellin_of_folded_gaussian(hurst), &u))
            }
            DensityLaw::BivariateGamma { .. } => return None,
            DensityLaw::Compose { ref outer, ref inner } => {
                let inner = inner.mellin_form()?;
                mellin::subordinate(&mellin::mellin_of_gg(outer), &inner)
            }
        };
        form.ok()
    }

    /// `∫ x^{η-1} f(x) dx` by quadrature, folded or radial as in [`DensityLaw::mellin_form`].
    pub fn mellin_numeric(&self, eta: ComplexValue, t: f64) -> Result<ComplexValue> {
        if let Some(form) = self.mellin_form() {
            if !form.strip.contains(eta.re) {
                return Err(DensityError::Mellin(MellinError::OutsideStrip(eta.re)));
            }
        }
        let (weight, extra_power) = match self.support() {
            Support::PositiveLine => (1.0, 0.0),
            Support::RealLine => (2.0, 0.0),
            Support::RealN(n) => (sphere_area(n), n as f64 - 1.0),
            Support::PositiveQuadrant => return Err(DensityError::Domain("no one-dimensional transform for a joint law".into())),
        };
        let tol = Tolerance::new(1e-300, 1e-11);
        let x0 = self.scale(t);
        let kernel = |x: f64, part: fn(Complex64) -> f64| -> f64 {
            if self.eval(x, t).map_or(true, |f| f == 0.0) {
                return 0.0;
            }
            let Ok(lf) = self.ln_density(x, t) else { return 0.0 };
            part(((eta - 1.0 + extra_power) * x.ln() + lf).exp())
        };
        let re = quad::integrate_positive(|x| kernel(x, |c| c.re), x0, tol)?.value;
        let im = if eta.im == 0.0 { 0.0 } else { quad::integrate_positive(|x| kernel(x, |c| c.im), x0, tol)?.value };
        Ok(Complex64::new(re, im) * weight)
    }

    /// Total mass of the law at time `t` by quadrature over its support.
    pub fn normalization_check(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(DensityError::Domain(format!("t = {t}")));
        }
        match self.support() {
            Support::PositiveQuadrant => {
                let tol = Tolerance::new(1e-300, 1e-9);
                let x0 = self.scale(t);
                let outer = |x: f64| -> f64 {
                    quad::integrate_positive(|y| self.eval2(x, y, t, t).unwrap_or(0.0), x0, tol).map(|r| r.value).unwrap_or(f64::NAN)
                };
                let v = quad::integrate_positive(outer, x0, tol)?.value;
                if v.is_nan() {
                    return Err(DensityError::Quadrature(QuadError::NonFinite(v)));
                }
                Ok(v)
            }
            _ => Ok(self.mellin_numeric(Complex64::new(1.0, 0.0), t).map(|c| c.re).or_else(|e| match e {
                DensityError::Mellin(MellinError::OutsideStrip(_)) => self.mass_without_strip(t),
                other => Err(other),
            })?),
        }
    }

    fn mass_without_strip(&self, t: f64) -> Result<f64> {
        let w = match self.support() {
            Support::RealLine => 2.0,
            Support::RealN(n) => sphere_area(n),
            _ => 1.0,
        };
        let p = match self.support() {
            Support::RealN(n) => n as i32 - 1,
            _ => 0,
        };
        let r = quad::integrate_positive(|x| self.eval(x, t).unwrap_or(0.0) * x.powi(p), self.scale(t), Tolerance::new(1e-300, 1e-11))?;
        Ok(w * r.value)
    }

    /// Printed normalizing constants that disagree with the law, as ratios to the shipped one.
    pub fn printed_constants(&self) -> Vec<PrintedConstant> {
        let (mu, n) = match *self {
            DensityLaw::Bg1 { mu } | DensityLaw::Ssr { mu, .. } => (mu, 1usize),
            DensityLaw::MultiBg1 { mu, n } => (mu, n),
            _ => return Vec::new(),
        };
        let h = 0.5 * n as f64;
        vec![
            PrintedConstant { label: "introduction prefactor 2/π^{n/2}".into(), ratio: 2f64.powf(mu + h) },
            PrintedConstant { label: "section prefactor 2^{1-μ}/π^{n/2}".into(), ratio: 2f64.powf(h) },
        ]
    }

    /// Tabulated distribution function of `|X(t)|` (of the radius for `ℝⁿ` laws).
    pub fn folded_cdf(&self, t: f64) -> Result<CdfTable> {
        CdfTable::build(self, t)
    }
}

/// Mellin form of the radius of an `n`-dimensional standard normal vector.
pub fn chi_form(n: usize) -> MellinForm {
    let h = 0.5 * n as f64;
    MellinForm::new(
        -0.5 * LN_2 - lg(h),
        0.5 * LN_2,
        0.0,
        0.0,
        vec![mellin::GammaFactor::new(0.5, h - 0.5, 1)],
        mellin::Strip::FULL,
    )
    .expect("half plane")
}

/// `E{G_{γ,μ}(t₁) G_{γ,μ}(t₂)}` for the correlated pair with correlation parameter `ρ`.
pub fn bivariate_gamma_covariance(mu: f64, gamma: f64, rho: f64, t1: f64, t2: f64) -> Result<f64> {
    positive("mu", mu)?;
    nonzero("gamma", gamma)?;
    positive("t1", t1)?;
    positive("t2", t2)?;
    if !(0.0..1.0).contains(&rho) {
        return Err(DensityError::Domain(format!("rho = {rho} is outside [0, 1)")));
    }
    let k = 1.0 / gamma;
    if mu + k <= 0.0 {
        return Err(DensityError::Domain(format!("the mixed moment is infinite for mu + 1/gamma = {}", mu + k)));
    }
    let lead = k * (t1 * t2).ln() + 2.0 * (lg(mu + k) - lg(mu));
    if gamma > 0.0 {
        let phi = 1.0 - rho;
        let f = specfun::hyp2f1(mu + k, mu + k, mu, rho)?;
        Ok((lead + (mu + 2.0 * k) * phi.ln()).exp() * f)
    } else {
        let f = specfun::hyp2f1(-k, -k, mu, rho)?;
        Ok(lead.exp() * f)
    }
}

/// Piecewise-linear distribution function on a logarithmic grid.
#[derive(Debug, Clone)]
pub struct CdfTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    const HALF_WIDTH: f64 = 40.0;
    const STEP: f64 = 0.05;

    fn build(law: &DensityLaw, t: f64) -> Result<Self> {
        let (w, p) = match law.support() {
            Support::PositiveLine => (1.0, 0),
            Support::RealLine => (2.0, 0),
            Support::RealN(n) => (sphere_area(n), n as i32 - 1),
            Support::PositiveQuadrant => return Err(DensityError::Domain("no distribution table for a joint law".into())),
        };
        let x0 = law.scale(t);
        let steps = (2.0 * Self::HALF_WIDTH / Self::STEP) as usize;
        let g = |u: f64| -> f64 {
            let x = x0 * u.exp();
            let f = law.eval(x, t).unwrap_or(0.0);
            if f == 0.0 {
                0.0
            } else {
                w * f * x.powi(p) * x
            }
        };
        let head = quad::integrate_real_line(|u| if u < -Self::HALF_WIDTH { g(u) } else { 0.0 }, -Self::HALF_WIDTH - 1.0, 1.0, Tolerance::new(1e-300, 1e-8))
            .map(|r| r.value)
            .unwrap_or(0.0);
        let mut xs = Vec::with_capacity(steps + 1);
        let mut cdf = Vec::with_capacity(steps + 1);
        let mut acc = head;
        let mut u = -Self::HALF_WIDTH;
        xs.push(x0 * u.exp());
        cdf.push(acc);
        for _ in 0..steps {
            let seg = quad::integrate(g, u, u + Self::STEP, Tolerance::new(1e-300, 1e-10))?;
            acc += seg.value;
            u += Self::STEP;
            xs.push(x0 * u.exp());
            cdf.push(acc);
        }
        Ok(CdfTable { xs, cdf })
    }

    pub fn total_mass(&self) -> f64 {
        *self.cdf.last().expect("non-empty")
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return if x <= 0.0 { 0.0 } else { self.cdf[0] * x / self.xs[0] };
        }
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return self.cdf[last].min(1.0);
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let (a, b) = (self.xs[i], self.xs[i + 1]);
        let s = (x.ln() - a.ln()) / (b.ln() - a.ln());
        (self.cdf[i] + s * (self.cdf[i + 1] - self.cdf[i])).clamp(0.0, 1.0)
    }
}

/// One example of every law with representative parameters.
pub fn catalog() -> Vec<DensityLaw> {
    vec![
        DensityLaw::Gg { mu: 1.5, gamma: 1.3, clock: Clock::Raw },
        DensityLaw::Gg { mu: 0.8, gamma: -1.5, clock: Clock::Tilde },
        DensityLaw::Gtilde { mu: 0.7, gamma: 1.5 },
        DensityLaw::Qaqa { mu: 0.5, gamma: 2.0 },
        DensityLaw::Tdist0 { mu1: 0.8, mu2: 1.3, gamma: 1.5 },
        DensityLaw::Tdist1 { nu: 3.0 },
        DensityLaw::GgGamma { mu: 0.9, gamma: 1.6 },
        DensityLaw::SpecialGg { mu1: 0.7, mu2: 1.4, gamma: 1.2 },
        DensityLaw::Bg1 { mu: 1.0 },
        DensityLaw::Ssr { mu: 1.2, gamma: 1.4 },
        DensityLaw::MultiBg1 { mu: 1.3, n: 3 },
        DensityLaw::K0Fbm { hurst: 0.7 },
        DensityLaw::BivariateGamma { mu: 1.0, gamma: 1.0, rho: 0.5 },
        DensityLaw::Compose {
            outer: GGParams { mu: 1.2, gamma: 1.5, clock: Clock::Raw },
            inner: Box::new(DensityLaw::Gg { mu: 0.9, gamma: 1.0, clock: Clock::Raw }),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn qaqa_at_origin_is_folded_cauchy() {
        let law = DensityLaw::Qaqa { mu: 0.5, gamma: 2.0 };
        assert!(close(law.eval(0.0, 1.0).unwrap(), 2.0 / PI, 1e-14));
    }

    #[test]
    fn qaqa_matches_folded_cauchy_pointwise() {
        let law = DensityLaw::Qaqa { mu: 0.5, gamma: 2.0 };
        for t in [0.3, 1.0, 2.5] {
            for i in 0..=100 {
                let x = 0.1 * i as f64;
                let direct = 2.0 * t / (PI * (x * x + t * t));
                assert!(close(law.eval(x, t).unwrap(), direct, 1e-12), "x={x} t={t}");
            }
        }
    }

    #[test]
    fn tdist1_examples() {
        let law = DensityLaw::Tdist1 { nu: 1.0 };
        assert!(close(law.eval(1.0, 1.0).unwrap(), 1.0 / PI, 1e-14));
        for nu in [1.0, 2.5, 7.0] {
            let law = DensityLaw::Tdist1 { nu };
            let t = nu.sqrt();
            for x in [0.0, 0.3, 1.0, 2.0, 6.0] {
                let student = 2.0 * (lg(0.5 * (nu + 1.0)) - lg(0.5 * nu)).exp() / (nu * PI).sqrt()
                    * (1.0 + x * x / nu).powf(-0.5 * (nu + 1.0));
                assert!(close(law.eval(x, t).unwrap(), student, 1e-12), "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn tdist1_is_tdist0_special_case() {
        let a = DensityLaw::Tdist1 { nu: 3.3 };
        let b = DensityLaw::Tdist0 { mu1: 0.5, mu2: 1.65, gamma: 2.0 };
        for x in [0.2, 1.0, 4.0] {
            assert!(close(a.eval(x, 1.7).unwrap(), b.eval(x, 1.7).unwrap(), 1e-12));
        }
    }

    #[test]
    fn special_gg_swap_symmetry() {
        let a = DensityLaw::SpecialGg { mu1: 0.7, mu2: 1.9, gamma: 1.3 };
        let b = DensityLaw::SpecialGg { mu1: 1.9, mu2: 0.7, gamma: 1.3 };
        for x in [0.05, 0.4, 1.0, 3.0, 9.0] {
            assert!(close(a.eval(x, 1.2).unwrap(), b.eval(x, 1.2).unwrap(), 1e-12));
        }
    }

    #[test]
    fn gtilde_diverges_logarithmically() {
        let law = DensityLaw::Gtilde { mu: 0.5, gamma: 2.0 };
        assert_eq!(law.eval(0.0, 1.0), Err(DensityError::OriginDivergence(Divergence::Logarithmic)));
        let r = law.eval(1e-8, 1.0).unwrap() / law.eval(1e-4, 1.0).unwrap();
        assert!((r - 2.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn boundary_rule_for_tdist0() {
        assert!(DensityLaw::Tdist0 { mu1: 1.0, mu2: 0.5, gamma: 1.5 }.boundary().includes_origin);
        assert_eq!(DensityLaw::Tdist0 { mu1: 0.5, mu2: 0.5, gamma: 1.5 }.boundary().divergence_at_origin, Divergence::Power);
    }

    #[test]
    fn special_gg_origin_limit() {
        let law = DensityLaw::SpecialGg { mu1: 0.5, mu2: 1.5, gamma: 2.0 };
        let lim = law.eval(0.0, 1.3).unwrap();
        assert!(close(law.eval(1e-7, 1.3).unwrap(), lim, 1e-5));
    }

    #[test]
    fn bg1_origin_limit_and_k0_case() {
        let law = DensityLaw::Bg1 { mu: 1.4 };
        assert!(close(law.eval(1e-9, 0.8).unwrap(), law.eval(0.0, 0.8).unwrap(), 1e-6));
        let half = DensityLaw::Bg1 { mu: 0.5 };
        for x in [0.1, 1.0, 2.0] {
            let t: f64 = 1.5;
            let k0 = (2.0 / t).sqrt() / PI * specfun::bessel_k(0.0, x * (2.0 / t).sqrt()).unwrap();
            assert!(close(half.eval(x, t).unwrap(), k0, 1e-12));
        }
    }

    #[test]
    fn printed_bg1_constants_do_not_normalize() {
        let t: f64 = 1.0;
        for mu in [0.8, 1.0, 2.0] {
            let intro = |x: f64| {
                let z = x * (2.0 / t).sqrt();
                (LN_2 + (mu - 0.5) * x.ln() - 0.5 * PI.ln() - lg(mu) + (2.0 * mu + 1.0) / 4.0 * (2.0 / t).ln() + ln_k(mu - 0.5, z).unwrap())
                    .exp()
            };
            let mass = 2.0 * quad::integrate_positive(intro, 1.0, Tolerance::relative(1e-11)).unwrap().value;
            let ratios = DensityLaw::Bg1 { mu }.printed_constants();
            assert!(close(mass, 2f64.powf(mu + 0.5), 1e-8), "mu={mu} mass={mass}");
            assert!(close(mass, ratios[0].ratio, 1e-8));
        }
        for n in [1usize, 2, 3] {
            let mu = 1.3;
            let h = 0.5 * n as f64;
            let section = |r: f64| {
                let z = r * (2.0 / t).sqrt();
                ((1.0 - mu) * LN_2 - h * PI.ln() - lg(mu) + (mu - h + n as f64 - 1.0) * r.ln()
                    + (2.0 * mu + n as f64) / 4.0 * (2.0 / t).ln()
                    + ln_k(mu - h, z).unwrap())
                .exp()
            };
            let mass = sphere_area(n) * quad::integrate_positive(section, 1.0, Tolerance::relative(1e-11)).unwrap().value;
            assert!(close(mass, 2f64.powf(h), 1e-8), "n={n} mass={mass}");
            assert!(close(mass, DensityLaw::MultiBg1 { mu, n }.printed_constants()[1].ratio, 1e-8));
        }
    }

    #[test]
    fn catalog_normalizes() {
        for law in catalog() {
            if matches!(law, DensityLaw::BivariateGamma { .. } | DensityLaw::Compose { .. }) {
                continue;
            }
            for t in [0.5, 1.0, 4.0] {
                let m = law.normalization_check(t).unwrap();
                assert!((m - 1.0).abs() < 1e-6, "{} t={t} mass={m}", law.id());
            }
        }
    }

    #[test]
    fn composition_normalizes() {
        let law = catalog().pop().unwrap();
        let m = law.normalization_check(1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
    }

    #[test]
    fn composition_reproduces_closed_forms() {
        let cases = [
            (
                DensityLaw::Compose {
                    outer: GGParams { mu: 0.9, gamma: 1.6, clock: Clock::Raw },
                    inner: Box::new(DensityLaw::Gg { mu: 0.9, gamma: 1.0, clock: Clock::Raw }),
                },
                DensityLaw::GgGamma { mu: 0.9, gamma: 1.6 },
            ),
            (
                DensityLaw::Compose {
                    outer: GGParams { mu: 0.7, gamma: 1.5, clock: Clock::Tilde },
                    inner: Box::new(DensityLaw::Gg { mu: 0.7, gamma: 1.5, clock: Clock::Tilde }),
                },
                DensityLaw::Gtilde { mu: 0.7, gamma: 1.5 },
            ),
            (
                DensityLaw::Compose {
                    outer: GGParams { mu: 0.8, gamma: 1.5, clock: Clock::Tilde },
                    inner: Box::new(DensityLaw::Gg { mu: 1.3, gamma: -1.5, clock: Clock::Tilde }),
                },
                DensityLaw::Tdist0 { mu1: 0.8, mu2: 1.3, gamma: 1.5 },
            ),
        ];
        for (comp, closed) in cases {
            for x in [0.2, 0.9, 2.5] {
                let a = comp.eval(x, 1.3).unwrap();
                let b = closed.eval(x, 1.3).unwrap();
                assert!(close(a, b, 1e-8), "{} x={x}: {a} vs {b}", closed.id());
            }
        }
    }

    #[test]
    fn mellin_numeric_matches_forms() {
        for law in catalog() {
            let Some(form) = law.mellin_form() else { continue };
            if matches!(law, DensityLaw::Compose { .. }) {
                continue;
            }
            let t = 1.3;
            for eta in form.strip.sample_abscissae() {
                for im in [0.0, 0.7] {
                    let z = Complex64::new(eta, im);
                    let num = law.mellin_numeric(z, t).unwrap();
                    let sym = form.eval(z, t).unwrap();
                    assert!((num - sym).norm() <= 1e-7 * sym.norm(), "{} eta={z}: {num} vs {sym}", law.id());
                }
            }
        }
    }

    #[test]
    fn mellin_numeric_examples() {
        let cauchy = DensityLaw::Qaqa { mu: 0.5, gamma: 2.0 };
        let v = cauchy.mellin_numeric(Complex64::new(1.5, 0.0), 1.0).unwrap();
        assert!(close(v.re, 2f64.sqrt(), 1e-8));
        let g1 = DensityLaw::Gg { mu: 2.0, gamma: 1.0, clock: Clock::Raw };
        assert!(close(g1.mellin_numeric(Complex64::new(2.0, 0.0), 3.0).unwrap().re, 6.0, 1e-8));
        let gt = DensityLaw::Gtilde { mu: 0.6, gamma: 2.0 };
        let expect = (2.0 * lg(1.0) - 2.0 * lg(0.6)).exp();
        assert!(close(gt.mellin_numeric(Complex64::new(1.8, 0.0), 1.0).unwrap().re, expect, 1e-8));
    }

    #[test]
    fn covariance_branches() {
        for (mu, rho, t1, t2) in [(1.0, 0.5, 1.0, 1.0), (2.3, 0.2, 0.7, 1.9)] {
            let v = bivariate_gamma_covariance(mu, 1.0, rho, t1, t2).unwrap();
            assert!(close(v, mu * (mu + rho) * t1 * t2, 1e-12));
        }
        assert!(close(bivariate_gamma_covariance(1.0, 1.0, 0.5, 1.0, 1.0).unwrap(), 1.5, 1e-12));
        let mean = |mu: f64, g: f64, t: f64| t.powf(1.0 / g) * (lg(mu + 1.0 / g) - lg(mu)).exp();
        let v = bivariate_gamma_covariance(1.7, -2.0, 0.0, 1.2, 0.6).unwrap();
        assert!(close(v, mean(1.7, -2.0, 1.2) * mean(1.7, -2.0, 0.6), 1e-12));
        let (mu, g, rho) = (1.4, 1.7, 0.35);
        let k = 1.0 / g;
        let euler = (lg(mu + k) - lg(mu)).exp().powi(2) * specfun::hyp2f1(-k, -k, mu, rho).unwrap();
        assert!(close(bivariate_gamma_covariance(mu, g, rho, 1.0, 1.0).unwrap(), euler, 1e-10));
        assert!(bivariate_gamma_covariance(0.3, -2.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn bivariate_density_moments_by_quadrature() {
        let law = DensityLaw::BivariateGamma { mu: 1.0, gamma: 1.0, rho: 0.5 };
        let m = law.normalization_check(1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
        let tol = Tolerance::new(1e-300, 1e-9);
        let inner = |x: f64| quad::integrate_positive(|y| law.eval2(x, y, 1.0, 1.0).unwrap() * x * y, 1.0, tol).unwrap().value;
        let exy = quad::integrate_positive(inner, 1.0, tol).unwrap().value;
        assert!((exy - 1.5).abs() < 1e-4, "{exy}");
    }

    #[test]
    fn bivariate_marginal_is_gg() {
        let law = DensityLaw::BivariateGamma { mu: 1.3, gamma: 1.6, rho: 0.4 };
        let x = 0.8;
        let marg = quad::integrate_positive(|y| law.eval2(x, y, 1.1, 0.7).unwrap(), 1.0, Tolerance::relative(1e-11)).unwrap().value;
        let gg = DensityLaw::Gg { mu: 1.3, gamma: 1.6, clock: Clock::Raw }.eval(x, 1.1).unwrap();
        assert!(close(marg, gg, 1e-8));
    }

    #[test]
    fn domain_errors() {
        assert!(DensityLaw::Qaqa { mu: 1.0, gamma: 1.0 }.eval(-1.0, 1.0).is_err());
        assert!(DensityLaw::Qaqa { mu: 1.0, gamma: 1.0 }.eval(1.0, 0.0).is_err());
        assert!(DensityLaw::from_params("nope", &BTreeMap::new()).is_err());
        assert!(DensityLaw::K0Fbm { hurst: 0.5 }.eval(0.0, 1.0).is_err());
    }

    #[test]
    fn real_line_laws_are_even() {
        let law = DensityLaw::Ssr { mu: 1.2, gamma: 1.4 };
        assert_eq!(law.eval(-0.7, 1.0).unwrap(), law.eval(0.7, 1.0).unwrap());
        assert_eq!(law.eval(0.7, 1.0).unwrap(), DensityLaw::Bg1 { mu: 1.2 }.eval(0.7, 1.0).unwrap());
    }

    #[test]
    fn multi_bg1_one_dimension_is_bg1() {
        let a = DensityLaw::MultiBg1 { mu: 0.9, n: 1 };
        let b = DensityLaw::Bg1 { mu: 0.9 };
        assert!(close(a.eval_point(&[-0.4], 2.0).unwrap(), b.eval(0.4, 2.0).unwrap(), 1e-15));
    }

    #[test]
    fn cdf_table_reaches_one() {
        let law = DensityLaw::Gtilde { mu: 0.7, gamma: 1.5 };
        let table = law.folded_cdf(1.0).unwrap();
        assert!((table.total_mass() - 1.0).abs() < 1e-7);
        let cauchy = DensityLaw::Qaqa { mu: 0.5, gamma: 2.0 }.folded_cdf(1.0).unwrap();
        assert!((cauchy.eval(1.0) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn json_roundtrip() {
        for law in catalog() {
            let s = serde_json::to_string(&law).unwrap();
            let back: DensityLaw = serde_json::from_str(&s).unwrap();
            assert_eq!(back, law);
        }
    }

    proptest::proptest! {
        #[test]
        fn densities_nonnegative(mu in 0.2f64..3.0, gamma in 0.3f64..3.0, x in 1e-3f64..50.0, t in 0.1f64..5.0) {
            for law in [DensityLaw::Qaqa { mu, gamma }, DensityLaw::GgGamma { mu, gamma }, DensityLaw::Gtilde { mu, gamma }] {
                let v = law.eval(x, t).unwrap();
                proptest::prop_assert!(v >= 0.0 && v.is_finite());
            }
        }
    }
}
