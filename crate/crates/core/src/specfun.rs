//! Special functions used throughout the crate.
//!
//! * `log_gamma`: principal-branch log Γ on the complex plane (shifted
//!   Stirling series, reflection for `Re z < 1/2`).
//! * `bessel_i`: power series of the modified Bessel function of the first kind.
//! * `bessel_k`: Temme's series for `x < 2` and Steed's continued fraction
//!   otherwise, followed by forward recurrence in the order.
//! * `bessel_k_integral`: the one-parameter family of integral representations
//!   of `K_ν`, evaluated by adaptive quadrature.
//! * `hyp2f1`, `pochhammer`.

use crate::quad::{self, QuadError, Tolerance};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Complex numbers as used for the Mellin variable and Γ arguments.
pub type ComplexValue = Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Term cap for the power series in this module.
pub const MAX_SERIES_TERMS: usize = 500;

const SERIES_EPS: f64 = 1e-16;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("Gamma function pole at {0}")]
    Pole(f64),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("argument {0} is outside the representable range")]
    Overflow(f64),
    #[error("series did not converge within {0} terms")]
    NonConvergence(usize),
    #[error("hypergeometric series diverges for |z| = {0} >= 1")]
    Divergence(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

type Result<T> = std::result::Result<T, SpecFunError>;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Coefficients `B_{2k} / (2k (2k - 1))` of the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Principal branch of `log Γ(z)`.
pub fn log_gamma(z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecFunError::Domain(format!("log_gamma({z})")));
    }
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(SpecFunError::Pole(z.re));
    }
    if z.re < 0.5 {
        let reflected = log_gamma_right(Complex64::new(1.0, 0.0) - z);
        Ok(Complex64::new(PI.ln(), 0.0) - log_sin_pi(z) - reflected)
    } else {
        Ok(log_gamma_right(z))
    }
}

fn log_gamma_right(z: Complex64) -> Complex64 {
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.norm() < 10.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

/// `log sin(πz)` without overflow for large `|Im z|`.
fn log_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 10.0 {
        return (z * PI).sin().ln();
    }
    let (w, flip) = if z.im > 0.0 { (z, false) } else { (z.conj(), true) };
    let i = Complex64::i();
    let small = (i * (2.0 * PI) * w).exp();
    let v = -i * PI * w + (Complex64::new(1.0, 0.0) - small).ln() + Complex64::new(0.5f64.ln(), 0.5 * PI);
    if flip {
        v.conj()
    } else {
        v
    }
}

/// `log |Γ(x)|` for real `x`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(Complex64::new(x, 0.0))?.re)
}

/// `Γ(x)` for real `x`.
pub fn gamma(x: f64) -> Result<f64> {
    let lg = log_gamma(Complex64::new(x, 0.0))?;
    Ok(lg.im.cos().signum() * lg.re.exp())
}

/// `1/Γ(x)`, zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    match log_gamma(Complex64::new(x, 0.0)) {
        Ok(lg) => lg.im.cos().signum() * (-lg.re).exp(),
        Err(_) => 0.0,
    }
}

/// Modified Bessel function of the first kind by its power series.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !nu.is_finite() {
        return Err(SpecFunError::Domain(format!("bessel_i(nu={nu}, x={x})")));
    }
    if x > 700.0 {
        return Err(SpecFunError::Overflow(x));
    }
    let nu = if nu < 0.0 && nu.fract() == 0.0 { -nu } else { nu };
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            Err(SpecFunError::Overflow(0.0))
        };
    }
    let half = 0.5 * x;
    let q = half * half;
    let lg = log_gamma(Complex64::new(nu + 1.0, 0.0))?;
    let mut term = lg.im.cos().signum() * (nu * half.ln() - lg.re).exp();
    let mut sum = 0.0;
    let cap = MAX_SERIES_TERMS.max(2 * x as usize + 100);
    for k in 0..cap {
        sum += term;
        let kf = k as f64;
        let next = term * q / ((kf + 1.0) * (kf + 1.0 + nu));
        if kf + 1.0 + nu > 0.0 && next.abs() <= SERIES_EPS * sum.abs() {
            return Ok(sum);
        }
        term = next;
    }
    Err(SpecFunError::NonConvergence(cap))
}

/// Taylor coefficients of `1/Γ(1 + x)` about `x = 0`.
#[allow(clippy::excessive_precision)]
const RGAMMA1: [f64; 25] = [
    1.0,
    0.577_215_664_901_532_860_606_5,
    -0.655_878_071_520_253_881_077,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_501_7,
    -0.042_197_734_555_544_336_748_21,
    -0.009_621_971_527_876_973_562_115,
    0.007_218_943_246_663_099_542_395,
    -0.001_165_167_591_859_065_112_114,
    -0.000_215_241_674_114_950_972_815_7,
    0.000_128_050_282_388_116_186_153_2,
    -0.000_020_134_854_780_788_238_655_69,
    -0.000_001_250_493_482_142_670_657_345,
    0.000_001_133_027_231_981_695_882_374,
    -2.056_338_416_977_607_103_45e-7,
    6.116_095_104_481_415_817_862e-9,
    5.002_007_644_469_222_930_056e-9,
    -1.181_274_570_487_020_144_588e-9,
    1.043_426_711_691_100_510_492e-10,
    7.782_263_439_905_071_254_05e-12,
    -3.696_805_618_642_205_708_188e-12,
    5.100_370_287_454_475_979_015e-13,
    -2.058_326_053_566_506_783_222e-14,
    -5.348_122_539_423_017_982_37e-15,
    1.226_778_628_238_260_790_159e-15,
];

/// Returns `(γ₁, γ₂, 1/Γ(1+m), 1/Γ(1-m))` for Temme's series, `|m| ≤ 1/2`.
fn temme_gammas(m: f64) -> (f64, f64, f64, f64) {
    let m2 = m * m;
    let mut even = 0.0;
    let mut odd = 0.0;
    for k in (0..RGAMMA1.len()).rev() {
        if k % 2 == 0 {
            even = even * m2 + RGAMMA1[k];
        } else {
            odd = odd * m2 + RGAMMA1[k];
        }
    }
    (-odd, even, even + m * odd, even - m * odd)
}

/// `(e^x K_ν(x), e^x K_{ν+1}(x))` for `ν ≥ 0`, `x > 0`.
fn bessel_k_pair_scaled(nu: f64, x: f64) -> Result<(f64, f64)> {
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let (mut kmu, mut k1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < 1e-300 { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < 1e-300 { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut i = 1usize;
        loop {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * SERIES_EPS {
                break;
            }
            i += 1;
            if i > MAX_SERIES_TERMS {
                return Err(SpecFunError::NonConvergence(MAX_SERIES_TERMS));
            }
        }
        let scale = x.exp();
        kmu = sum * scale;
        k1 = sum1 * (2.0 / x) * scale;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..=10 * MAX_SERIES_TERMS {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < SERIES_EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SpecFunError::NonConvergence(10 * MAX_SERIES_TERMS));
        }
        h *= a1;
        kmu = (PI / (2.0 * x)).sqrt() / s;
        k1 = kmu * (mu + x + 0.5 - h) / x;
    }
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * (2.0 / x) * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok((kmu, k1))
}

/// Modified Bessel function of the second kind, `K_ν(x)` for real `ν`, `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)? * (-x).exp())
}

/// `e^x K_ν(x)`, free of underflow for large `x`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(SpecFunError::Domain(format!("bessel_k(nu={nu}, x={x})")));
    }
    Ok(bessel_k_pair_scaled(nu.abs(), x)?.0)
}

/// `K_ν` through the reflection combination of two `I` series.
///
/// Valid for non-integer `ν`. Cancellation grows like `e^{2x}`, so this is
/// only a cross-check for moderate arguments.
pub fn bessel_k_reflection(nu: f64, x: f64) -> Result<f64> {
    if nu.fract() == 0.0 {
        return Err(SpecFunError::Domain(format!("integer order {nu} in the reflection formula")));
    }
    Ok(0.5 * PI * (bessel_i(-nu, x)? - bessel_i(nu, x)?) / (nu * PI).sin())
}

/// Integral representation
/// `(|p|/2) (x t^ζ)^{-ν/2p} ∫₀^∞ s^{ν-1} exp(-x/(2sᵖ) - sᵖ/(2t^ζ)) ds = K_{ν/p}(√(x/t^ζ))`.
pub fn bessel_k_integral(nu: f64, p: f64, x: f64, t: f64, zeta: f64) -> Result<f64> {
    if !(x > 0.0 && t > 0.0) || p == 0.0 || !nu.is_finite() || !zeta.is_finite() {
        return Err(SpecFunError::Domain(format!("bessel_k_integral(nu={nu}, p={p}, x={x}, t={t}, zeta={zeta})")));
    }
    // s = e^u turns the integrand into exp(φ(u)) with
    // φ(u) = νu - a e^{-pu} - b e^{pu}.
    let a = 0.5 * x;
    let b = 0.5 / t.powf(zeta);
    let phi = |u: f64| nu * u - a * (-p * u).exp() - b * (p * u).exp();
    let w = (nu + p.signum() * (nu * nu + 4.0 * a * b * p * p).sqrt()) / (2.0 * b * p);
    let u_star = w.ln() / p;
    let curvature = p * p * (a * (-p * u_star).exp() + b * (p * u_star).exp());
    let width = 1.0 / curvature.sqrt();
    let peak = phi(u_star);
    let integrand = |u: f64| (phi(u) - peak).exp();
    let tol = Tolerance::new(0.0, 1e-13);
    let r = quad::integrate_real_line(integrand, u_star, width, tol)?;
    let log_pref = (0.5 * p.abs()).ln() - nu / (2.0 * p) * (x * t.powf(zeta)).ln();
    Ok((log_pref + peak).exp() * r.value)
}

/// Gauss hypergeometric function `F(a, b; c; z)` for real `|z| < 1`.
///
/// Arguments below `-1/2` go through the Pfaff transformation so that the
/// series variable stays in `[-1/2, 1)`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return Err(SpecFunError::Divergence(z.abs()));
    }
    if is_nonpositive_integer(c) {
        return Err(SpecFunError::Pole(c));
    }
    if z < -0.5 {
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * hyp2f1_series(a, c - b, c, w)?);
    }
    hyp2f1_series(a, b, c, z)
}

fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    // The series near |z| = 1 needs more terms than the generic cap.
    let cap = 4 * MAX_SERIES_TERMS;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..cap {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let shrinking = ((a + kf + 1.0) * (b + kf + 1.0) / ((c + kf + 1.0) * (kf + 2.0)) * z).abs() < 1.0;
        if shrinking && term.abs() <= SERIES_EPS * sum.abs() {
            return Ok(sum);
        }
    }
    Err(SpecFunError::NonConvergence(cap))
}

/// Rising factorial `(μ)_k = Γ(μ + k) / Γ(μ)`.
pub fn pochhammer(mu: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(mu + k as f64) {
        return Err(SpecFunError::Pole(mu + k as f64));
    }
    Ok((0..k).map(|j| mu + j as f64).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_at_small_integers_and_half() {
        assert!(log_gamma(Complex64::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt().ln()).abs() < 1e-14);
        assert!(half.im.abs() < 1e-15);
        let five = log_gamma(Complex64::new(5.0, 0.0)).unwrap();
        assert!((five.re - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_gamma_poles() {
        assert_eq!(log_gamma(Complex64::new(0.0, 0.0)), Err(SpecFunError::Pole(0.0)));
        assert_eq!(log_gamma(Complex64::new(-3.0, 0.0)), Err(SpecFunError::Pole(-3.0)));
        assert!(log_gamma(Complex64::new(-3.0, 1e-3)).is_ok());
    }

    #[test]
    fn log_gamma_complex_reference_points() {
        // Reference values from a 30-digit evaluation.
        let cases = [
            ((0.3, 40.0), (-62.650_686_053_968_13, 107.241_560_579_886_68)),
            ((1.5, -300.0), (-464.616_175_641_721_15, -1412.704_010_947_510_7)),
        ];
        for ((re, im), (lr, li)) in cases {
            let v = log_gamma(Complex64::new(re, im)).unwrap();
            assert!((v.re - lr).abs() < 1e-10 * lr.abs(), "{v}");
            assert!((v.im - li).abs() < 1e-10 * li.abs(), "{v}");
        }
        // Off the principal sheet only by multiples of 2πi in the left half plane.
        let v = log_gamma(Complex64::new(-2.5, 0.7)).unwrap();
        let want = Complex64::new(-1.494_187_308_911_357_5, -8.646_475_682_803_377);
        assert!((v.exp() - want.exp()).norm() < 1e-12 * want.exp().norm());
    }

    #[test]
    fn gamma_sign_on_negative_axis() {
        assert!((gamma(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(-1.5).unwrap() - 4.0 / 3.0 * PI.sqrt()).abs() < 1e-13);
        assert_eq!(recip_gamma(-2.0), 0.0);
    }

    /// Independent series oracle: Σ (x/2)^{2k+ν} / (k! Γ(k+ν+1)) with Γ by
    /// upward recurrence from Γ(ν+1) given explicitly.
    fn i_series_oracle(nu: f64, x: f64, gamma_nu1: f64, terms: usize) -> f64 {
        let mut s = 0.0;
        let mut fact = 1.0;
        let mut g = gamma_nu1;
        for k in 0..terms {
            if k > 0 {
                fact *= k as f64;
                g *= k as f64 + nu;
            }
            s += (x / 2.0).powf(2.0 * k as f64 + nu) / (fact * g);
        }
        s
    }

    #[test]
    fn bessel_i_examples() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        let half = bessel_i(0.5, 1.0).unwrap();
        assert!(rel(half, (2.0 / PI).sqrt() * 1f64.sinh()) < 1e-14);
        assert!(rel(half, i_series_oracle(0.5, 1.0, PI.sqrt() / 2.0, 30)) < 1e-14);
        let zero = bessel_i(0.0, 1.0).unwrap();
        assert!(rel(zero, i_series_oracle(0.0, 1.0, 1.0, 30)) < 1e-14);
        assert!((zero - 1.266_065_8).abs() < 1e-7);
    }

    #[test]
    fn bessel_i_reference_points() {
        for (nu, x, want) in [
            (2.3, 10.0, 2132.690_084_162_260_8),
            (-0.3, 2.0, 2.237_401_233_598_894_1),
            (1.0, 50.0, 2.903_078_590_103_556_8e20),
        ] {
            assert!(rel(bessel_i(nu, x).unwrap(), want) < 1e-12, "nu={nu} x={x}");
        }
        assert_eq!(bessel_i(-2.0, 3.0).unwrap(), bessel_i(2.0, 3.0).unwrap());
        assert!(matches!(bessel_i(0.0, 800.0), Err(SpecFunError::Overflow(_))));
        assert!(matches!(bessel_i(0.0, -1.0), Err(SpecFunError::Domain(_))));
    }

    #[test]
    fn bessel_k_examples() {
        let k = bessel_k(0.5, 1.0).unwrap();
        assert!(rel(k, (PI / 2.0).sqrt() * (-1f64).exp()) < 1e-14);
        // Small-argument behavior K₀(x) = log(2/x) - γ + O(x² log x).
        let x = 1e-6;
        let k0 = bessel_k(0.0, x).unwrap();
        assert!((k0 - (2.0 / x).ln() + EULER_GAMMA).abs() < 1e-9);
        assert!(matches!(bessel_k(0.0, 0.0), Err(SpecFunError::Domain(_))));
    }

    #[test]
    fn bessel_k0_matches_its_quadrature_definition() {
        // K₀(x) = ∫₀^∞ s^{-1} exp(-x²/(4s²) - s²) ds
        let x: f64 = 1.0;
        let oracle = quad::integrate_positive(|s| (-(x * x) / (4.0 * s * s) - s * s).exp() / s, 1.0, Tolerance::relative(1e-13))
            .unwrap()
            .value;
        let k = bessel_k(0.0, x).unwrap();
        assert!(rel(k, oracle) < 1e-11);
        assert!((k - 0.421_024_4).abs() < 1e-7);
    }

    #[test]
    fn bessel_k_reference_points() {
        for (nu, x, want) in [
            (0.0, 0.1, 2.427_069_024_702_016_6),
            (0.0, 20.0, 5.741_237_815_336_524_3e-10),
            (0.3, 0.5, 0.976_474_124_381_787_9),
            (0.3, 7.0, 0.000_427_363_730_822_789_36),
            (1.0, 0.1, 9.853_844_780_870_605_6),
            (1.0, 3.0, 0.040_156_431_128_194_184),
            (2.7, 0.2, 384.826_936_178_161_9),
            (2.7, 15.0, 1.241_942_782_228_887_2e-7),
            (5.5, 2.0, 21.090_307_589_508_805),
            (10.0, 1.0, 180_713_289.901_029_45),
        ] {
            assert!(rel(bessel_k(nu, x).unwrap(), want) < 1e-12, "nu={nu} x={x}");
        }
    }

    #[test]
    fn bessel_k_reflection_agrees_at_moderate_x() {
        for nu in [0.3, 0.5, 1.7, 2.7] {
            for x in [0.1, 1.0, 3.0] {
                let a = bessel_k(nu, x).unwrap();
                let b = bessel_k_reflection(nu, x).unwrap();
                assert!(rel(a, b) < 1e-9, "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn bessel_k_integral_examples() {
        let a = bessel_k_integral(0.0, 2.0, 1.0, 1.0, 0.0).unwrap();
        assert!(rel(a, 0.421_024_438_240_708_3) < 1e-10);
        let b = bessel_k_integral(1.0, 2.0, 4.0, 1.0, 0.0).unwrap();
        assert!(rel(b, (PI / 4.0).sqrt() * (-2f64).exp()) < 1e-10);
        let c = bessel_k_integral(1.2, -0.7, 2.5, 1.8, 1.3).unwrap();
        let want = bessel_k(1.2 / -0.7, (2.5 / 1.8f64.powf(1.3)).sqrt()).unwrap();
        assert!(rel(c, want) < 1e-9);
    }

    #[test]
    fn k0_mellin_transform() {
        for eta in [1.0, 1.5, 2.0, 3.0] {
            let f = |x: f64| ((eta - 1.0) * x.ln() - x).exp() * bessel_k_scaled(0.0, x).unwrap();
            let num = quad::integrate_positive(f, 1.0, Tolerance::relative(1e-12))
                .unwrap()
                .value;
            let exact = 2f64.powf(eta) * gamma(eta / 2.0).unwrap().powi(2) / 4.0;
            assert!(rel(num, exact) < 1e-9, "eta={eta}");
        }
    }

    #[test]
    fn hyp2f1_examples() {
        assert_eq!(hyp2f1(0.3, 1.7, 2.2, 0.0).unwrap(), 1.0);
        let v = hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!(rel(v, -(0.5f64.ln()) / 0.5) < 1e-14);
        let (a, b, c, z) = (0.7, 1.3, 2.1, 0.4);
        let lhs = hyp2f1(a, b, c, z).unwrap();
        let rhs = (1.0 - z).powf(c - a - b) * hyp2f1(c - a, c - b, c, z).unwrap();
        assert!(rel(lhs, rhs) < 1e-12);
        assert!(rel(lhs, 1.235_638_934_097_503_4) < 1e-13);
        assert!(rel(hyp2f1(2.5, 1.5, 0.7, 0.85).unwrap(), 1401.085_978_837_271_9) < 1e-11);
        assert!(rel(hyp2f1(1.2, 0.3, 1.7, -0.8).unwrap(), 0.878_184_270_933_120_5) < 1e-13);
        assert!(matches!(hyp2f1(1.0, 1.0, 2.0, 1.0), Err(SpecFunError::Divergence(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, -2.0, 0.3), Err(SpecFunError::Pole(_))));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(-3.7, 0).unwrap(), 1.0);
        assert_eq!(pochhammer(1.0, 4).unwrap(), 24.0);
        assert_eq!(pochhammer(0.5, 2).unwrap(), 0.75);
        assert!(pochhammer(-2.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn gamma_recurrence(x in 0.01f64..60.0) {
            let a = log_gamma(Complex64::new(x + 1.0, 0.0)).unwrap().re;
            let b = log_gamma(Complex64::new(x, 0.0)).unwrap().re + x.ln();
            prop_assert!(((a - b).exp() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn complex_gamma_recurrence(re in -8.0f64..8.0, im in -50.0f64..50.0) {
            prop_assume!(im.abs() > 1e-3);
            let z = Complex64::new(re, im);
            let a = log_gamma(z + 1.0).unwrap();
            let b = log_gamma(z).unwrap() + z.ln();
            prop_assert!(((a - b).exp() - 1.0).norm() < 1e-11);
        }

        #[test]
        fn bessel_k_is_even_in_order(nu in -6.0f64..6.0, x in 0.01f64..50.0) {
            prop_assert_eq!(bessel_k(nu, x).unwrap(), bessel_k(-nu, x).unwrap());
        }

        #[test]
        fn bessel_k_matches_integral(nu in 0.0f64..4.0, x in 0.05f64..40.0) {
            let a = bessel_k(nu, x).unwrap();
            let b = bessel_k_integral(nu, 1.0, x * x, 1.0, 0.0).unwrap();
            prop_assert!(((a - b) / a).abs() < 1e-8);
        }

        #[test]
        fn bessel_k_wronskian(nu in 0.0f64..5.0, x in 0.05f64..30.0) {
            // I_ν K_{ν+1} + I_{ν+1} K_ν = 1/x
            let w = bessel_i(nu, x).unwrap() * bessel_k(nu + 1.0, x).unwrap()
                + bessel_i(nu + 1.0, x).unwrap() * bessel_k(nu, x).unwrap();
            prop_assert!((w * x - 1.0).abs() < 1e-11);
        }

        #[test]
        fn euler_transformation(a in -2.0f64..3.0, b in -2.0f64..3.0, c in 0.3f64..4.0, z in -0.9f64..0.9) {
            let lhs = hyp2f1(a, b, c, z).unwrap();
            let rhs = (1.0 - z).powf(c - a - b) * hyp2f1(c - a, c - b, c, z).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1e-300) + 1e-14);
        }
    }
}
