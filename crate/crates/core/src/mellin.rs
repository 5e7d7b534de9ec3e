//! Symbolic Mellin transforms in the Gamma-product family
//!
//! ```text
//! M(η; t) = exp(c₀ + c₁ η) · t^{aη + b} · Π Γ(sᵢ η + oᵢ)^{pᵢ}
//! ```
//!
//! Every form describes `E|X(t)|^{η-1}` for some process `X`. The strip is
//! kept inside the pole-free band of the numerator factors. Equality of two
//! forms is decided numerically on a fixed complex grid.

use crate::specfun::{self, ComplexValue, SpecFunError};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MellinError {
    #[error("empty validity strip ({lo}, {hi})")]
    EmptyStrip { lo: f64, hi: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("point {0} lies outside the validity strip")]
    OutsideStrip(f64),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

type Result<T> = std::result::Result<T, MellinError>;

/// One factor `Γ(slope·η + offset)^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub slope: f64,
    pub offset: f64,
    pub power: i32,
}

impl GammaFactor {
    pub fn new(slope: f64, offset: f64, power: i32) -> Self {
        GammaFactor { slope, offset, power }
    }
}

/// Open vertical band `lo < Re η < hi`; infinite ends are `±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    pub lo: f64,
    pub hi: f64,
}

impl Strip {
    pub const FULL: Strip = Strip { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Strip { lo, hi }
    }

    pub fn contains(&self, eta: f64) -> bool {
        self.lo < eta && eta < self.hi
    }

    pub fn intersect(&self, other: &Strip) -> Strip {
        Strip { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    /// Preimage of the strip under `η ↦ aη + b`.
    fn preimage(&self, a: f64, b: f64) -> Strip {
        if a == 0.0 {
            return if self.contains(b) { Strip::FULL } else { Strip::new(0.0, 0.0) };
        }
        let l = (self.lo - b) / a;
        let h = (self.hi - b) / a;
        let (l, h) = if a > 0.0 { (l, h) } else { (h, l) };
        Strip { lo: if l.is_nan() { f64::NEG_INFINITY } else { l }, hi: if h.is_nan() { f64::INFINITY } else { h } }
    }

    /// Five abscissae spread across the strip.
    pub fn sample_abscissae(&self) -> [f64; 5] {
        let spread = [0.25, 0.5, 1.0, 2.0, 3.0];
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => std::array::from_fn(|i| self.lo + (i as f64 + 1.0) * (self.hi - self.lo) / 6.0),
            (true, false) => spread.map(|d| self.lo + d),
            (false, true) => spread.map(|d| self.hi - d),
            (false, false) => [-2.0, -1.0, 0.0, 1.0, 2.0],
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StripRepr {
    lo: Option<f64>,
    hi: Option<f64>,
}

impl Serialize for Strip {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StripRepr { lo: self.lo.is_finite().then_some(self.lo), hi: self.hi.is_finite().then_some(self.hi) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Strip {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = StripRepr::deserialize(d)?;
        Ok(Strip { lo: r.lo.unwrap_or(f64::NEG_INFINITY), hi: r.hi.unwrap_or(f64::INFINITY) })
    }
}

/// Time change used by a generalized Gamma process: `c = t`, `c = t^γ` or `c = α t^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clock {
    Raw,
    Tilde,
    Affine { alpha: f64, beta: f64 },
}

/// Parameters of a generalized Gamma process; a negative `gamma` is the inverse process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GGParams {
    pub mu: f64,
    pub gamma: f64,
    pub clock: Clock,
}

impl GGParams {
    pub fn new(mu: f64, gamma: f64, clock: Clock) -> Result<Self> {
        let p = GGParams { mu, gamma, clock };
        p.validate()?;
        Ok(p)
    }

    pub fn raw(mu: f64, gamma: f64) -> Result<Self> {
        Self::new(mu, gamma, Clock::Raw)
    }

    pub fn tilde(mu: f64, gamma: f64) -> Result<Self> {
        Self::new(mu, gamma, Clock::Tilde)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(MellinError::InvalidParams(format!("mu must be positive, got {}", self.mu)));
        }
        if self.gamma == 0.0 || !self.gamma.is_finite() {
            return Err(MellinError::InvalidParams(format!("gamma must be nonzero, got {}", self.gamma)));
        }
        if let Clock::Affine { alpha, beta } = self.clock {
            if !(alpha > 0.0 && alpha.is_finite()) || beta == 0.0 || !beta.is_finite() {
                return Err(MellinError::InvalidParams(format!("affine clock needs alpha > 0 and beta != 0, got ({alpha}, {beta})")));
            }
        }
        Ok(())
    }

    /// Scale parameter `c` of the marginal density at time `t`.
    pub fn scale_at(&self, t: f64) -> f64 {
        match self.clock {
            Clock::Raw => t,
            Clock::Tilde => t.powf(self.gamma),
            Clock::Affine { alpha, beta } => alpha * t.powf(beta),
        }
    }
}

/// Space or time scaling for [`scale`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    Time,
    Space,
}

/// Moment value or the sentinel for a divergent moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

/// A Gamma-product Mellin transform with its validity strip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MellinForm {
    pub const_log: f64,
    pub const_eta_log: f64,
    pub t_slope: f64,
    pub t_offset: f64,
    pub factors: Vec<GammaFactor>,
    pub strip: Strip,
}

fn pole_free_strip(factors: &[GammaFactor]) -> Result<Strip> {
    let mut strip = Strip::FULL;
    for f in factors.iter().filter(|f| f.power > 0) {
        if f.slope > 0.0 {
            strip.lo = strip.lo.max(-f.offset / f.slope);
        } else if f.slope < 0.0 {
            strip.hi = strip.hi.min(-f.offset / f.slope);
        } else if f.offset <= 0.0 && f.offset.fract() == 0.0 {
            return Err(MellinError::SpecFun(SpecFunError::Pole(f.offset)));
        }
    }
    Ok(strip)
}

impl MellinForm {
    /// Builds a form; the strip is intersected with the pole-free band of the factors.
    pub fn new(const_log: f64, const_eta_log: f64, t_slope: f64, t_offset: f64, factors: Vec<GammaFactor>, strip: Strip) -> Result<Self> {
        for f in &factors {
            if !(f.slope.is_finite() && f.offset.is_finite()) || f.power == 0 {
                return Err(MellinError::InvalidParams(format!("malformed factor {f:?}")));
            }
        }
        if !(const_log.is_finite() && const_eta_log.is_finite() && t_slope.is_finite() && t_offset.is_finite()) {
            return Err(MellinError::InvalidParams("non-finite coefficient".into()));
        }
        let strip = strip.intersect(&pole_free_strip(&factors)?);
        if strip.is_empty() {
            return Err(MellinError::EmptyStrip { lo: strip.lo, hi: strip.hi });
        }
        Ok(MellinForm { const_log, const_eta_log, t_slope, t_offset, factors, strip })
    }

    /// The form `1` valid everywhere.
    pub fn unit() -> Self {
        MellinForm { const_log: 0.0, const_eta_log: 0.0, t_slope: 0.0, t_offset: 0.0, factors: vec![], strip: Strip::FULL }
    }

    /// Deterministic clock `X(t) = t`, i.e. `t^{η-1}`.
    pub fn deterministic() -> Self {
        MellinForm { t_slope: 1.0, t_offset: -1.0, ..Self::unit() }
    }

    /// `log M(η; t)`; the imaginary part is defined modulo `2π`.
    pub fn log_eval(&self, eta: ComplexValue, t: f64) -> Result<ComplexValue> {
        let mut acc = Complex64::new(self.const_log, 0.0) + eta * self.const_eta_log;
        if self.t_slope != 0.0 || self.t_offset != 0.0 {
            acc += (eta * self.t_slope + self.t_offset) * t.ln();
        }
        for f in &self.factors {
            acc += specfun::log_gamma(eta * f.slope + f.offset)? * f.power as f64;
        }
        Ok(acc)
    }

    pub fn eval(&self, eta: ComplexValue, t: f64) -> Result<ComplexValue> {
        Ok(self.log_eval(eta, t)?.exp())
    }

    /// Real value at a real point of the strip.
    pub fn eval_real(&self, eta: f64, t: f64) -> Result<f64> {
        if !self.strip.contains(eta) {
            return Err(MellinError::OutsideStrip(eta));
        }
        Ok(self.eval(Complex64::new(eta, 0.0), t)?.re)
    }

    /// Substitute `η ↦ aη + b` everywhere.
    fn substitute(&self, a: f64, b: f64) -> Result<Self> {
        let factors = self.factors.iter().map(|f| GammaFactor::new(f.slope * a, f.slope * b + f.offset, f.power)).collect();
        MellinForm::new(
            self.const_log + self.const_eta_log * b,
            self.const_eta_log * a,
            self.t_slope * a,
            self.t_slope * b + self.t_offset,
            factors,
            self.strip.preimage(a, b),
        )
    }
}

/// Mellin transform of the marginal of a generalized Gamma process.
pub fn mellin_of_gg(params: &GGParams) -> MellinForm {
    let k = 1.0 / params.gamma;
    let mu = params.mu;
    let lg_mu = specfun::ln_gamma(mu).expect("mu > 0 is not a pole");
    let (mut c0, c1, slope, offset) = match params.clock {
        Clock::Raw => (0.0, 0.0, k, -k),
        Clock::Tilde => (0.0, 0.0, 1.0, -1.0),
        Clock::Affine { alpha, beta } => (-k * alpha.ln(), k * alpha.ln(), beta * k, -beta * k),
    };
    c0 -= lg_mu;
    MellinForm::new(c0, c1, slope, offset, vec![GammaFactor::new(k, mu - k, 1)], Strip::FULL)
        .expect("generalized Gamma strip is a half plane")
}

/// `E|C(t)|^{η-1} = Γ(η/2)Γ(1-η/2)/π · t^{η-1}` on `(0, 2)`.
pub fn mellin_of_folded_cauchy(t_power_unit: bool) -> MellinForm {
    let (a, b) = if t_power_unit { (1.0, -1.0) } else { (0.0, 0.0) };
    MellinForm::new(-PI.ln(), 0.0, a, b, vec![GammaFactor::new(0.5, 0.0, 1), GammaFactor::new(-0.5, 1.0, 1)], Strip::FULL)
        .expect("folded Cauchy strip is (0, 2)")
}

/// `E|B_H(t)|^{η-1} = 2^{(η-1)/2} Γ(η/2)/√π · t^{H(η-1)}`; `H = 1/2` is Brownian motion.
pub fn mellin_of_folded_gaussian(hurst: f64) -> MellinForm {
    MellinForm::new(-0.5 * LN_2 - 0.5 * PI.ln(), 0.5 * LN_2, hurst, -hurst, vec![GammaFactor::new(0.5, 0.0, 1)], Strip::FULL)
        .expect("half plane")
}

/// `E (t²/Z²)^{η-1} = 2^{1-η} Γ(3/2 - η)/√π · t^{2(η-1)}`.
pub fn mellin_of_stable_half() -> MellinForm {
    MellinForm::new(LN_2 - 0.5 * PI.ln(), -LN_2, 2.0, -2.0, vec![GammaFactor::new(-1.0, 1.5, 1)], Strip::FULL).expect("half plane")
}

/// Squared Bessel process from the origin: Gamma(δ/2) with scale `2t`.
pub fn mellin_of_bessel_squared(delta: f64) -> Result<MellinForm> {
    Ok(mellin_of_gg(&GGParams::new(0.5 * delta, 1.0, Clock::Affine { alpha: 2.0, beta: 1.0 })?))
}

/// Transform of the product of independent variables.
pub fn product(f: &MellinForm, g: &MellinForm) -> Result<MellinForm> {
    let mut factors = f.factors.clone();
    factors.extend_from_slice(&g.factors);
    MellinForm::new(
        f.const_log + g.const_log,
        f.const_eta_log + g.const_eta_log,
        f.t_slope + g.t_slope,
        f.t_offset + g.t_offset,
        factors,
        f.strip.intersect(&g.strip),
    )
}

/// Transform of `outer(inner(t))`: the outer t-power `t^{aη+b}` becomes the
/// inner transform at `η' = aη + b + 1`.
pub fn subordinate(outer: &MellinForm, inner: &MellinForm) -> Result<MellinForm> {
    let shifted = inner.substitute(outer.t_slope, outer.t_offset + 1.0)?;
    let stripped = MellinForm { t_slope: 0.0, t_offset: 0.0, ..outer.clone() };
    product(&stripped, &shifted)
}

/// Transform of `|X|^β`.
pub fn power_map(f: &MellinForm, beta: f64) -> Result<MellinForm> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(MellinError::InvalidParams(format!("power must be nonzero, got {beta}")));
    }
    f.substitute(beta, 1.0 - beta)
}

/// Transform of `X(at)` (time) or `a X(t)` (space).
pub fn scale(f: &MellinForm, a: f64, mode: ScaleMode) -> Result<MellinForm> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(MellinError::InvalidParams(format!("scale factor must be positive, got {a}")));
    }
    let la = a.ln();
    let mut g = f.clone();
    match mode {
        ScaleMode::Time => {
            g.const_log += f.t_offset * la;
            g.const_eta_log += f.t_slope * la;
        }
        ScaleMode::Space => {
            g.const_log -= la;
            g.const_eta_log += la;
        }
    }
    Ok(g)
}

/// Transform of `X(α t^β)`.
pub fn time_map(f: &MellinForm, alpha: f64, beta: f64) -> Result<MellinForm> {
    if !(alpha > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(MellinError::InvalidParams(format!("time map needs alpha > 0, got ({alpha}, {beta})")));
    }
    let la = alpha.ln();
    let mut g = f.clone();
    g.const_log += f.t_offset * la;
    g.const_eta_log += f.t_slope * la;
    g.t_slope = f.t_slope * beta;
    g.t_offset = f.t_offset * beta;
    Ok(g)
}

/// Imaginary parts of the comparison grid.
pub const GRID_IMAG: [f64; 7] = [0.0, 0.5, -0.5, 1.5, -1.5, 3.0, -3.0];
/// Times of the comparison grid.
pub const GRID_TIMES: [f64; 3] = [0.5, 1.0, 2.0];
/// Relative deviation below which two forms are declared equal.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Outcome of a grid comparison between two forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripComparison {
    pub equal: bool,
    pub max_rel_dev: f64,
    pub points: usize,
    pub strip: Strip,
    pub strips_agree: bool,
}

/// Compare two forms on 35 complex points at three times.
pub fn equal_on_strip(f: &MellinForm, g: &MellinForm) -> Result<StripComparison> {
    let strip = f.strip.intersect(&g.strip);
    if strip.is_empty() {
        return Err(MellinError::EmptyStrip { lo: strip.lo, hi: strip.hi });
    }
    let mut max_dev: f64 = 0.0;
    let mut points = 0;
    for theta in strip.sample_abscissae() {
        for y in GRID_IMAG {
            let eta = Complex64::new(theta, y);
            for t in GRID_TIMES {
                let d = f.log_eval(eta, t)? - g.log_eval(eta, t)?;
                let dev = (d.exp() - 1.0).norm();
                max_dev = max_dev.max(if dev.is_nan() { f64::INFINITY } else { dev });
                points += 1;
            }
        }
    }
    let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-12 * a.abs().max(1.0);
    Ok(StripComparison {
        equal: max_dev < EQUALITY_TOL,
        max_rel_dev: max_dev,
        points,
        strip,
        strips_agree: close(f.strip.lo, g.strip.lo) && close(f.strip.hi, g.strip.hi),
    })
}

/// `E|X(t)|^k` from the transform at `η = k + 1`.
pub fn moment(f: &MellinForm, k: u32, t: f64) -> Result<Moment> {
    let eta = k as f64 + 1.0;
    if !f.strip.contains(eta) {
        return Ok(Moment::Infinite);
    }
    Ok(Moment::Finite(f.eval_real(eta, t)?))
}
