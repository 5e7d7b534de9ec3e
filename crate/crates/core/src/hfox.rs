//! Fox H-function by Mellin–Barnes quadrature.
//!
//! The convention is
//!
//! ```text
//! H(x) = (1/2πi) ∫ Πⱼ≤ₘ Γ(bⱼ − βⱼη) Πᵢ≤ₙ Γ(1 − aᵢ + αᵢη)
//!                  / Πⱼ>ₘ Γ(1 − bⱼ + βⱼη) Πᵢ>ₙ Γ(aᵢ − αᵢη)  · x^η dη
//! ```
//!
//! on a vertical line `Re η = θ` left of every pole of the `Γ(bⱼ − βⱼη)` family.
//! Substituting `η = −s` gives the common textbook form with `Γ(bⱼ + βⱼs) x^{−s}`,
//! so parameter lists carry over unchanged.

use crate::densities::DensityLaw;
use crate::mellin::{Clock, GGParams, GammaFactor, MellinError, MellinForm, Strip};
use crate::quad;
use crate::specfun::{self, ComplexValue, SpecFunError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HError {
    #[error("invalid H-function parameters: {0}")]
    InvalidParams(String),
    #[error("the Mellin–Barnes integrand does not decay (Δ = {0})")]
    Divergent(f64),
    #[error("contour abscissa {0} sits on a pole")]
    PoleOnContour(f64),
    #[error("no admissible contour: poles from the left reach {left}, poles from the right start at {right}")]
    NoContour { left: f64, right: f64 },
    #[error("truncation did not settle by half-height {half_height}: value {value}")]
    NonConvergence { value: f64, half_height: f64 },
    #[error("x must be positive, got {0}")]
    Domain(f64),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Mellin(#[from] MellinError),
}

type Result<T> = std::result::Result<T, HError>;

/// Index sets and parameter pairs of `H^{m,n}_{p,q}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HParams {
    pub m: usize,
    pub n: usize,
    /// `(aᵢ, αᵢ)`, length `p`.
    pub upper: Vec<(f64, f64)>,
    /// `(bⱼ, βⱼ)`, length `q`.
    pub lower: Vec<(f64, f64)>,
    pub delta: f64,
}

impl HParams {
    pub fn new(m: usize, n: usize, upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> Result<Self> {
        if m > lower.len() || n > upper.len() {
            return Err(HError::InvalidParams(format!("need m <= q and n <= p, got m={m}, n={n}, p={}, q={}", upper.len(), lower.len())));
        }
        if upper.iter().chain(lower.iter()).any(|&(v, w)| !v.is_finite() || !(w >= 0.0) || !w.is_finite()) {
            return Err(HError::InvalidParams("weights must be finite and nonnegative".into()));
        }
        let delta = lower[..m].iter().map(|b| b.1).sum::<f64>() + upper[..n].iter().map(|a| a.1).sum::<f64>()
            - lower[m..].iter().map(|b| b.1).sum::<f64>()
            - upper[n..].iter().map(|a| a.1).sum::<f64>();
        Ok(HParams { m, n, upper, lower, delta })
    }

    pub fn p(&self) -> usize {
        self.upper.len()
    }

    pub fn q(&self) -> usize {
        self.lower.len()
    }

    /// `H^{k,0}_{0,k}` with the given lower pairs.
    pub fn pure(lower: Vec<(f64, f64)>) -> Self {
        let k = lower.len();
        Self::new(k, 0, Vec::new(), lower).expect("well formed")
    }

    /// The integrand `ℋ(η)` in log form.
    pub fn log_kernel(&self, eta: ComplexValue) -> Result<ComplexValue> {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &(b, beta)) in self.lower.iter().enumerate() {
            if j < self.m {
                acc += specfun::log_gamma(b - beta * eta)?;
            } else {
                acc -= specfun::log_gamma(one - b + beta * eta)?;
            }
        }
        for (i, &(a, alpha)) in self.upper.iter().enumerate() {
            if i < self.n {
                acc += specfun::log_gamma(one - a + alpha * eta)?;
            } else {
                acc -= specfun::log_gamma(a - alpha * eta)?;
            }
        }
        Ok(acc)
    }

    /// Open interval of admissible abscissae.
    pub fn contour_band(&self) -> (f64, f64) {
        let right = self.lower[..self.m]
            .iter()
            .filter(|b| b.1 > 0.0)
            .map(|&(b, beta)| b / beta)
            .fold(f64::INFINITY, f64::min);
        let left = self.upper[..self.n]
            .iter()
            .filter(|a| a.1 > 0.0)
            .map(|&(a, alpha)| (a - 1.0) / alpha)
            .fold(f64::NEG_INFINITY, f64::max);
        (left, right)
    }
}

/// Vertical integration path; the half-height is in units of the panel width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub abscissa: f64,
    pub half_height: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HValue {
    pub value: f64,
    #[serde(rename = "T_used")]
    pub t_used: f64,
    pub est_error: f64,
    pub abscissa: f64,
}

const START_HEIGHT: f64 = 20.0;
const MAX_HEIGHT: f64 = 400.0;

fn saddle_abscissa(params: &HParams, lnx: f64) -> Result<f64> {
    let (left, right) = params.contour_band();
    if left >= right {
        return Err(HError::NoContour { left, right });
    }
    let span = 1e4;
    let lo = if left.is_finite() { left } else { right - span };
    let hi = if right.is_finite() { right } else { lo + span };
    let (lo, hi) = if !left.is_finite() && !right.is_finite() { (-span, span) } else { (lo, hi) };
    let w = hi - lo;
    let pad = 1e-9 * w.max(1.0);
    let phi = |th: f64| -> f64 {
        match params.log_kernel(Complex64::new(th, 0.0)) {
            Ok(v) if v.re.is_finite() => v.re + th * lnx,
            _ => f64::INFINITY,
        }
    };
    let (mut a, mut b) = (lo + pad, hi - pad);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-10 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(d);
        }
    }
    let th = 0.5 * (a + b);
    // Stay a small fixed distance from the nearest pole.
    Ok(th.min(right - 1e-3 * (right - lo).min(1.0)).max(left + 1e-3 * (hi - left).min(1.0)))
}

fn curvature_width(params: &HParams, theta: f64) -> f64 {
    let h = 1e-3;
    let f = |th: f64| params.log_kernel(Complex64::new(th, 0.0)).map(|v| v.re).unwrap_or(f64::NAN);
    let d2 = (f(theta + h) - 2.0 * f(theta) + f(theta - h)) / (h * h);
    if d2.is_finite() && d2 > 0.0 {
        (1.0 / d2.sqrt()).max(1.0)
    } else {
        1.0
    }
}

/// Evaluate `H(x)` on an automatically chosen contour.
pub fn h_eval(params: &HParams, x: f64, tol: f64) -> Result<HValue> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(HError::Domain(x));
    }
    if !(params.delta > 0.0) {
        return Err(HError::Divergent(params.delta));
    }
    let lnx = x.ln();
    let theta = saddle_abscissa(params, lnx)?;
    let width = curvature_width(params, theta);
    h_eval_on(params, x, Contour { abscissa: theta, half_height: START_HEIGHT, panels: START_HEIGHT as usize }, width, tol)
}

/// Evaluate `H(x)` on the line `Re η = contour.abscissa` with panels of the given width.
///
/// The half-height doubles from `contour.half_height` until the newest strip
/// carries less than `tol` of the accumulated value, up to 400 panel widths.
pub fn h_eval_on(params: &HParams, x: f64, contour: Contour, width: f64, tol: f64) -> Result<HValue> {
    let theta = contour.abscissa;
    let (left, right) = params.contour_band();
    if !(theta > left && theta < right) {
        return Err(HError::PoleOnContour(theta));
    }
    let lnx = x.ln();
    let (nodes, weights) = quad::gauss_legendre_64();
    let panel = |k: usize| -> Result<(f64, f64)> {
        let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (u, w) in nodes.iter().zip(weights.iter()) {
            let y = c + h * u;
            let eta = Complex64::new(theta, y);
            let v = (params.log_kernel(eta)? + eta * lnx).exp().re;
            sum += w * v;
            abs += w * v.abs();
        }
        Ok((sum * h, abs * h))
    };
    let run = |from: usize, to: usize| -> Result<(f64, f64)> {
        let parts: Vec<(f64, f64)> = (from..to).into_par_iter().map(panel).collect::<Result<_>>()?;
        Ok(pairwise(&parts))
    };
    let mut n_done = contour.half_height.max(1.0) as usize;
    let (mut total, _) = run(0, n_done)?;
    loop {
        let (tail, tail_abs) = run(n_done, 2 * n_done)?;
        total += tail;
        n_done *= 2;
        if tail_abs <= tol * total.abs() || tail_abs < f64::MIN_POSITIVE {
            let value = total / PI;
            if !value.is_finite() {
                return Err(HError::NonConvergence { value, half_height: n_done as f64 * width });
            }
            return Ok(HValue { value, t_used: n_done as f64 * width, est_error: tail_abs / PI, abscissa: theta });
        }
        if n_done as f64 >= MAX_HEIGHT {
            return Err(HError::NonConvergence { value: total / PI, half_height: n_done as f64 * width });
        }
    }
}

fn pairwise(parts: &[(f64, f64)]) -> (f64, f64) {
    match parts.len() {
        0 => (0.0, 0.0),
        1 => parts[0],
        n => {
            let (l, r) = parts.split_at(n / 2);
            let (a, b) = (pairwise(l), pairwise(r));
            (a.0 + b.0, a.1 + b.1)
        }
    }
}

/// `∫₀^∞ x^{η-1} H(x) dx` in closed form.
pub fn h_mellin(params: &HParams, eta: ComplexValue) -> Result<ComplexValue> {
    Ok(params.log_kernel(-eta)?.exp())
}

/// Which reduction rule [`h_rescale`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleRule {
    /// `H[x | (a, α), (b, β)] = c H[x^c | (a, cα), (b, cβ)]`, `c > 0`.
    Power,
    /// `H[x | (a, α), (b, β)] = x^{−c} H[x | (a + cα, α), (b + cβ, β)]`.
    Shift,
}

/// Transformed parameters under the power or shift rule.
pub fn h_rescale(params: &HParams, c: f64, rule: RescaleRule) -> Result<HParams> {
    let map = |v: &[(f64, f64)]| -> Vec<(f64, f64)> {
        v.iter()
            .map(|&(p, w)| match rule {
                RescaleRule::Power => (p, c * w),
                RescaleRule::Shift => (p + c * w, w),
            })
            .collect()
    };
    if rule == RescaleRule::Power && !(c > 0.0) {
        return Err(HError::InvalidParams(format!("power rule needs c > 0, got {c}")));
    }
    HParams::new(params.m, params.n, map(&params.upper), map(&params.lower))
}

/// A density written as `C t^{a} x^{k} H(x / t^{σ})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRepresentation {
    pub label: String,
    pub params: HParams,
    pub const_log: f64,
    pub t_power: f64,
    pub x_power: f64,
    pub arg_t_power: f64,
    /// The same law in closed or composed form.
    pub law: DensityLaw,
}

fn ln_gamma(x: f64) -> f64 {
    specfun::ln_gamma(x).expect("positive argument")
}

fn tilde(mu: f64, gamma: f64) -> GGParams {
    GGParams { mu, gamma, clock: Clock::Tilde }
}

fn raw(mu: f64, gamma: f64) -> GGParams {
    GGParams { mu, gamma, clock: Clock::Raw }
}

fn nest(outers: &[GGParams], innermost: GGParams) -> DensityLaw {
    let mut law = DensityLaw::Gg { mu: innermost.mu, gamma: innermost.gamma, clock: innermost.clock };
    for o in outers.iter().rev() {
        law = DensityLaw::Compose { outer: *o, inner: Box::new(law) };
    }
    law
}

impl HRepresentation {
    /// `G̃_{γ₁}(G̃_{γ₂}(…G̃_{γₙ}(t)…))`, all with shape `μ`.
    pub fn iterated_tilde(mu: f64, gammas: &[f64]) -> Self {
        let k = gammas.len();
        let params = HParams::pure(gammas.iter().map(|g| (mu, 1.0 / g)).collect());
        let law = match gammas {
            [g1, g2] if g1 == g2 => DensityLaw::Gtilde { mu, gamma: *g1 },
            _ => {
                let ps: Vec<GGParams> = gammas.iter().map(|&g| tilde(mu, g)).collect();
                nest(&ps[..k - 1], ps[k - 1])
            }
        };
        HRepresentation {
            label: format!("iterated tilde n={k}"),
            params,
            const_log: -(k as f64) * ln_gamma(mu),
            t_power: 0.0,
            x_power: -1.0,
            arg_t_power: 1.0,
            law,
        }
    }

    /// `G_{γ₁}(G_{γ₂}(t))` written with two `(μ, 0)` upper pairs.
    pub fn gamma_gamma(mu: f64, gamma1: f64, gamma2: f64) -> Self {
        let params = HParams::new(2, 0, vec![(mu, 0.0), (mu, 0.0)], vec![(mu, 1.0 / gamma1), (mu, 1.0 / (gamma1 * gamma2))])
            .expect("well formed");
        let law = if gamma2 == 1.0 {
            DensityLaw::GgGamma { mu, gamma: gamma1 }
        } else {
            nest(&[raw(mu, gamma1)], raw(mu, gamma2))
        };
        HRepresentation {
            label: format!("gamma-gamma ({gamma1}, {gamma2})"),
            params,
            const_log: 0.0,
            t_power: 0.0,
            x_power: -1.0,
            arg_t_power: 1.0 / (gamma1 * gamma2),
            law,
        }
    }

    /// `G₁(G_γ(t))`.
    pub fn gamma_one_gamma(mu: f64, gamma: f64) -> Self {
        let mut rep = Self::gamma_gamma(mu, 1.0, gamma);
        rep.label = format!("gamma one over gamma {gamma}");
        rep.law = nest(&[raw(mu, 1.0)], raw(mu, gamma));
        rep
    }

    /// `G_γ(G₁(…G₁(t)…))` with `n` levels.
    pub fn gamma_over_unit_chain(mu: f64, gamma: f64, n: usize) -> Self {
        let params = HParams::pure(vec![(0.0, 1.0 / gamma); n]);
        let law = match n {
            1 => DensityLaw::Gg { mu, gamma, clock: Clock::Raw },
            2 => DensityLaw::GgGamma { mu, gamma },
            _ => {
                let mut ps = vec![raw(mu, gamma)];
                ps.extend(std::iter::repeat_n(raw(mu, 1.0), n - 3));
                let mut law = DensityLaw::GgGamma { mu, gamma: 1.0 };
                for o in ps.iter().rev() {
                    law = DensityLaw::Compose { outer: *o, inner: Box::new(law) };
                }
                law
            }
        };
        HRepresentation {
            label: format!("gamma {gamma} over {n} unit levels"),
            params,
            const_log: -(n as f64) * ln_gamma(mu),
            t_power: -mu,
            x_power: gamma * mu - 1.0,
            arg_t_power: 1.0 / gamma,
            law,
        }
    }

    /// Meijer case `G^{n,0}_{0,n}`: `n` iterated Gamma processes with `γ = 1`.
    pub fn meijer_chain(mu: f64, n: usize) -> Self {
        let mut rep = Self::gamma_over_unit_chain(mu, 1.0, n);
        rep.label = format!("Meijer chain n={n}");
        rep
    }

    pub fn eval(&self, x: f64, t: f64, tol: f64) -> Result<f64> {
        let arg = x / t.powf(self.arg_t_power);
        let h = h_eval(&self.params, arg, tol)?;
        Ok((self.const_log + self.t_power * t.ln() + self.x_power * x.ln()).exp() * h.value)
    }

    /// Mellin transform `∫ x^{η-1} q(x, t) dx` as a symbolic form.
    pub fn mellin_form(&self) -> Result<MellinForm> {
        let k = self.x_power;
        let p = &self.params;
        let mut factors = Vec::new();
        for (j, &(b, beta)) in p.lower.iter().enumerate() {
            if beta == 0.0 {
                continue;
            }
            if j < p.m {
                factors.push(GammaFactor::new(beta, b + beta * k, 1));
            } else {
                factors.push(GammaFactor::new(-beta, 1.0 - b - beta * k, -1));
            }
        }
        let mut c0 = self.const_log;
        for (i, &(a, alpha)) in p.upper.iter().enumerate() {
            if i < p.n {
                if alpha == 0.0 {
                    c0 += ln_gamma(1.0 - a);
                } else {
                    factors.push(GammaFactor::new(-alpha, 1.0 - a - alpha * k, 1));
                }
            } else if alpha == 0.0 {
                c0 -= ln_gamma(a);
            } else {
                factors.push(GammaFactor::new(alpha, a + alpha * k, -1));
            }
        }
        for (j, &(b, beta)) in p.lower.iter().enumerate() {
            if beta == 0.0 {
                c0 += if j < p.m { ln_gamma(b) } else { -ln_gamma(1.0 - b) };
            }
        }
        let s = self.arg_t_power;
        Ok(MellinForm::new(c0, 0.0, s, self.t_power + s * k, factors, Strip::FULL)?)
    }
}

/// Every representation exercised by the cross-checks, with representative parameters.
pub fn representations() -> Vec<HRepresentation> {
    vec![
        HRepresentation::iterated_tilde(0.8, &[1.7]),
        HRepresentation::iterated_tilde(0.7, &[1.5, 1.5]),
        HRepresentation::iterated_tilde(0.9, &[1.3, 2.2]),
        HRepresentation::iterated_tilde(1.1, &[1.4, 2.0, 1.2]),
        HRepresentation::gamma_gamma(0.9, 1.6, 1.4),
        HRepresentation::gamma_one_gamma(1.2, 1.7),
        HRepresentation::gamma_over_unit_chain(0.9, 1.6, 2),
        HRepresentation::gamma_over_unit_chain(1.1, 1.3, 3),
        HRepresentation::meijer_chain(1.3, 1),
        HRepresentation::meijer_chain(0.9, 2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mellin;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_gamma_is_stretched_exponential() {
        let (mu, g, x) = (0.8, 1.7, 0.9);
        let h = h_eval(&HParams::pure(vec![(mu, 1.0 / g)]), x, 1e-12).unwrap();
        let direct = g * x.powf(g * mu) * (-x.powf(g)).exp();
        assert!(rel(h.value, direct) < 1e-10, "{} vs {direct}", h.value);
    }

    #[test]
    fn two_unit_gammas_give_k0() {
        let h = h_eval(&HParams::pure(vec![(0.5, 1.0), (0.5, 1.0)]), 1.0, 1e-12).unwrap();
        let k = 2.0 * specfun::bessel_k(0.0, 2.0).unwrap();
        assert!(rel(h.value, k) < 1e-10);
        assert!((h.value - 0.2278).abs() < 1e-4);
        for x in [0.1, 0.5, 3.0] {
            let h = h_eval(&HParams::pure(vec![(0.0, 1.0), (0.0, 1.0)]), x, 1e-12).unwrap();
            assert!(rel(h.value, 2.0 * specfun::bessel_k(0.0, 2.0 * x.sqrt()).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn meijer_n1_is_exponential() {
        for x in [0.2, 1.0, 5.0] {
            let h = h_eval(&HParams::pure(vec![(0.0, 1.0)]), x, 1e-12).unwrap();
            assert!(rel(h.value, (-x).exp()) < 1e-10);
        }
    }

    #[test]
    fn mellin_examples() {
        let e = HParams::pure(vec![(0.0, 1.0)]);
        for eta in [0.7, 1.5, 3.2] {
            let v = h_mellin(&e, Complex64::new(eta, 0.0)).unwrap();
            assert!(rel(v.re, specfun::gamma(eta).unwrap()) < 1e-13);
        }
        let two = HParams::pure(vec![(0.0, 1.0), (0.0, 1.0)]);
        assert!((h_mellin(&two, Complex64::new(2.0, 0.0)).unwrap().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mellin_matches_quadrature_of_eval() {
        let params = HParams::pure(vec![(0.6, 0.7), (1.1, 0.4)]);
        for eta in [0.5, 1.0, 2.5] {
            let f = |x: f64| h_eval(&params, x, 1e-12).map(|h| h.value.signum() * (h.value.abs().ln() + (eta - 1.0) * x.ln()).exp()).unwrap_or(0.0);
            let num = quad::integrate_positive(f, 1.0, quad::Tolerance::new(1e-300, 1e-9)).unwrap().value;
            let sym = h_mellin(&params, Complex64::new(eta, 0.0)).unwrap().re;
            assert!(rel(num, sym) < 1e-6, "eta={eta}: {num} vs {sym}");
        }
    }

    #[test]
    fn power_rule_identity_and_square() {
        let p = HParams::pure(vec![(0.0, 1.0)]);
        assert_eq!(h_rescale(&p, 1.0, RescaleRule::Power).unwrap(), p);
        let q = h_rescale(&p, 2.0, RescaleRule::Power).unwrap();
        for x in [0.5f64, 1.0, 2.0] {
            let lhs = h_eval(&p, x, 1e-12).unwrap().value;
            let rhs = 2.0 * h_eval(&q, x * x, 1e-12).unwrap().value;
            assert!(rel(lhs, rhs) < 1e-9, "x={x}");
        }
    }

    #[test]
    fn shift_rule() {
        let (mu, g) = (1.3, 1.6);
        let p = HParams::pure(vec![(mu - 1.0 / g, 1.0 / g)]);
        let s = h_rescale(&p, 1.0, RescaleRule::Shift).unwrap();
        assert!((s.lower[0].0 - mu).abs() < 1e-15);
        for x in [0.3f64, 1.0, 2.4] {
            let lhs = h_eval(&p, x, 1e-12).unwrap().value;
            let rhs = h_eval(&s, x, 1e-12).unwrap().value / x;
            assert!(rel(lhs, rhs) < 1e-9);
        }
    }

    #[test]
    fn doubling_height_is_stable() {
        let p = HParams::pure(vec![(0.7, 1.0 / 1.5), (0.7, 1.0 / 1.5)]);
        let auto = h_eval(&p, 1.3, 1e-12).unwrap();
        let w = curvature_width(&p, auto.abscissa);
        let big = h_eval_on(&p, 1.3, Contour { abscissa: auto.abscissa, half_height: 2.0 * auto.t_used / w, panels: 0 }, w, 1e-12).unwrap();
        assert!((auto.value - big.value).abs() <= 1e-10 * auto.value.abs());
    }

    #[test]
    fn pole_and_decay_errors() {
        let p = HParams::pure(vec![(1.0, 1.0)]);
        assert!(matches!(
            h_eval_on(&p, 1.0, Contour { abscissa: 1.0, half_height: 20.0, panels: 20 }, 1.0, 1e-10),
            Err(HError::PoleOnContour(_))
        ));
        let bad = HParams::new(1, 0, vec![(0.5, 2.0)], vec![(0.0, 1.0)]).unwrap();
        assert!(matches!(h_eval(&bad, 1.0, 1e-10), Err(HError::Divergent(_))));
        assert!(HParams::new(2, 0, vec![], vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn representation_forms_match_process_transforms() {
        for rep in representations() {
            let Some(law_form) = rep.law.mellin_form() else { continue };
            let form = rep.mellin_form().unwrap();
            let cmp = mellin::equal_on_strip(&form, &law_form).unwrap();
            assert!(cmp.equal, "{}: {}", rep.label, cmp.max_rel_dev);
        }
    }

    #[test]
    fn representations_match_densities() {
        for rep in representations() {
            for t in [0.5, 1.0, 2.0] {
                for x in [0.25, 1.0, 4.0] {
                    let h = rep.eval(x, t, 1e-11).unwrap();
                    let d = rep.law.eval(x, t).unwrap();
                    assert!(rel(h, d) < 1e-6, "{} x={x} t={t}: {h} vs {d}", rep.label);
                }
            }
        }
    }
}
