//! Marginal samplers for process expressions.
//!
//! An expression is a tree of base processes and combinators, written as
//! `compose(ggt(2, 0.5), ggt(-2, 0.5))`. Sampling evaluates the tree at a fixed
//! time: a composition draws the inner time first and then the outer marginal at
//! that time, which realizes the composition integral for independent processes.
//!
//! Batches are split into fixed shards. Shard `k` draws from the ChaCha stream `k`
//! of a generator keyed by the seed, so the output never depends on scheduling.

use crate::densities::chi_form;
use crate::mellin::{self, Clock, GGParams, MellinError, MellinForm, ScaleMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid expression: {0}")]
    Invalid(String),
    #[error("inner process produced {0}, outside the time domain of the outer process")]
    Support(f64),
    #[error("covariance matrix is not positive semidefinite")]
    NotPsd,
    #[error(transparent)]
    Mellin(#[from] MellinError),
}

type Result<T> = std::result::Result<T, SamplerError>;

/// Number of variates drawn from one RNG stream.
pub const SHARD_SIZE: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ProcessExpr {
    /// Generalized Gamma process with any clock; `gamma < 0` is the inverse process.
    Gg { params: GGParams },
    Brown,
    Fbm { hurst: f64 },
    Cauchy,
    FoldedCauchy,
    /// Squared Bessel process of dimension `delta` started at the origin.
    BesselSq { delta: f64 },
    /// `t²/Z²`, the first passage law of index ½.
    StableHalf,
    /// Euclidean norm of an `n`-dimensional Brownian motion.
    BrownNorm { n: usize },
    Compose { outer: Box<ProcessExpr>, inner: Box<ProcessExpr> },
    /// Product of independent children, each run at time `t^{1/n}`.
    ProductSplit { children: Vec<ProcessExpr> },
    /// Product of independent children at the same time.
    Mul { children: Vec<ProcessExpr> },
    Power { base: Box<ProcessExpr>, beta: f64 },
    Scale { base: Box<ProcessExpr>, a: f64 },
    /// The base process at time `α t^β`.
    At { base: Box<ProcessExpr>, alpha: f64, beta: f64 },
    Abs { base: Box<ProcessExpr> },
    /// `(Σ Xᵢ^{γᵢ})^{1/root}`.
    SumOfPowers { children: Vec<ProcessExpr>, gammas: Vec<f64>, outer_root: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub t: f64,
    pub seed: u64,
    pub expr_digest: String,
}

impl ProcessExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.ws();
        if p.pos != p.s.len() {
            return p.err("trailing input");
        }
        e.validate()?;
        Ok(e)
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.to_string().as_bytes());
        h.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Whether every realization is nonnegative.
    pub fn nonnegative(&self) -> bool {
        use ProcessExpr::*;
        match self {
            Brown | Fbm { .. } | Cauchy => false,
            Gg { .. } | FoldedCauchy | BesselSq { .. } | StableHalf | BrownNorm { .. } | Abs { .. } | SumOfPowers { .. } => true,
            Compose { outer, .. } => outer.nonnegative(),
            ProductSplit { children } | Mul { children } => children.iter().all(|c| c.nonnegative()),
            Power { base, beta } => base.nonnegative() || (beta.fract() == 0.0 && beta.rem_euclid(2.0) == 0.0),
            Scale { base, .. } | At { base, .. } => base.nonnegative(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        use ProcessExpr::*;
        let bad = |m: String| Err(SamplerError::Invalid(m));
        match self {
            Gg { params } => params.validate()?,
            Brown | Cauchy | FoldedCauchy | StableHalf => {}
            Fbm { hurst } => {
                if !(*hurst > 0.0 && *hurst <= 1.0) {
                    return bad(format!("hurst {hurst} outside (0, 1]"));
                }
            }
            BesselSq { delta } => {
                if !(*delta > 0.0) {
                    return bad(format!("dimension {delta} must be positive"));
                }
            }
            BrownNorm { n } => {
                if *n == 0 {
                    return bad("norm of a zero-dimensional motion".into());
                }
            }
            Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                if !inner.nonnegative() {
                    return bad(format!("inner process `{inner}` can be negative"));
                }
            }
            ProductSplit { children } | Mul { children } => {
                if children.is_empty() {
                    return bad("empty product".into());
                }
                for c in children {
                    c.validate()?;
                }
            }
            Power { base, beta } => {
                base.validate()?;
                if *beta == 0.0 || !beta.is_finite() {
                    return bad(format!("power {beta} must be nonzero"));
                }
                if !base.nonnegative() && (beta.fract() != 0.0 || *beta < 0.0) {
                    return bad(format!("power {beta} of the signed process `{base}`"));
                }
            }
            Scale { base, a } => {
                base.validate()?;
                if !(*a > 0.0 && a.is_finite()) {
                    return bad(format!("scale {a} must be positive"));
                }
            }
            At { base, alpha, beta } => {
                base.validate()?;
                if !(*alpha > 0.0 && alpha.is_finite()) || !beta.is_finite() {
                    return bad(format!("time map ({alpha}, {beta})"));
                }
            }
            Abs { base } => base.validate()?,
            SumOfPowers { children, gammas, outer_root } => {
                if children.is_empty() || children.len() != gammas.len() {
                    return bad("sumpow needs one exponent per child".into());
                }
                if *outer_root == 0.0 || gammas.contains(&0.0) {
                    return bad("sumpow exponents must be nonzero".into());
                }
                for c in children {
                    c.validate()?;
                    if !c.nonnegative() {
                        return bad(format!("sumpow child `{c}` can be negative"));
                    }
                }
            }
        }
        Ok(())
    }

    /// One draw of the marginal at time `t`.
    pub fn sample_one<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<f64> {
        use ProcessExpr::*;
        let normal = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
        Ok(match self {
            Gg { params } => {
                let c = params.scale_at(t);
                let g = gamma_unit(params.mu, rng);
                ((c.ln() + g.ln()) / params.gamma).exp()
            }
            Brown => t.sqrt() * normal(rng),
            Fbm { hurst } => t.powf(*hurst) * normal(rng),
            Cauchy => t * normal(rng) / normal(rng),
            FoldedCauchy => (t * normal(rng) / normal(rng)).abs(),
            BesselSq { delta } => 2.0 * t * gamma_unit(0.5 * delta, rng),
            StableHalf => {
                let z = normal(rng);
                t * t / (z * z)
            }
            BrownNorm { n } => (t * (0..*n).map(|_| normal(rng).powi(2)).sum::<f64>()).sqrt(),
            Compose { outer, inner } => {
                let s = inner.sample_one(t, rng)?;
                if !(s >= 0.0) {
                    return Err(SamplerError::Support(s));
                }
                outer.sample_one(s, rng)?
            }
            ProductSplit { children } => {
                let tt = t.powf(1.0 / children.len() as f64);
                let mut acc = 1.0;
                for c in children {
                    acc *= c.sample_one(tt, rng)?;
                }
                acc
            }
            Mul { children } => {
                let mut acc = 1.0;
                for c in children {
                    acc *= c.sample_one(t, rng)?;
                }
                acc
            }
            Power { base, beta } => {
                let v = base.sample_one(t, rng)?;
                if beta.fract() == 0.0 && beta.abs() < 64.0 {
                    v.powi(*beta as i32)
                } else {
                    v.powf(*beta)
                }
            }
            Scale { base, a } => a * base.sample_one(t, rng)?,
            At { base, alpha, beta } => base.sample_one(alpha * t.powf(*beta), rng)?,
            Abs { base } => base.sample_one(t, rng)?.abs(),
            SumOfPowers { children, gammas, outer_root } => {
                let mut acc = 0.0;
                for (c, g) in children.iter().zip(gammas) {
                    acc += c.sample_one(t, rng)?.powf(*g);
                }
                acc.powf(1.0 / outer_root)
            }
        })
    }

    /// Symbolic transform of `E|X(t)|^{η-1}`, when the tree stays in the Gamma-product family.
    pub fn mellin_form(&self) -> Option<MellinForm> {
        use ProcessExpr::*;
        let r = match self {
            Gg { params } => Ok(mellin::mellin_of_gg(params)),
            Brown => Ok(mellin::mellin_of_folded_gaussian(0.5)),
            Fbm { hurst } => Ok(mellin::mellin_of_folded_gaussian(*hurst)),
            Cauchy | FoldedCauchy => Ok(mellin::mellin_of_folded_cauchy(true)),
            BesselSq { delta } => mellin::mellin_of_bessel_squared(*delta),
            StableHalf => Ok(mellin::mellin_of_stable_half()),
            BrownNorm { n } => {
                let chi = chi_form(*n);
                MellinForm::new(chi.const_log, chi.const_eta_log, 0.5, -0.5, chi.factors.clone(), chi.strip)
            }
            Compose { outer, inner } => mellin::subordinate(&outer.mellin_form()?, &inner.mellin_form()?),
            ProductSplit { children } => {
                let k = 1.0 / children.len() as f64;
                let mut acc = MellinForm::unit();
                for c in children {
                    let f = mellin::time_map(&c.mellin_form()?, 1.0, k).ok()?;
                    acc = mellin::product(&acc, &f).ok()?;
                }
                Ok(acc)
            }
            Mul { children } => {
                let mut acc = MellinForm::unit();
                for c in children {
                    acc = mellin::product(&acc, &c.mellin_form()?).ok()?;
                }
                Ok(acc)
            }
            Power { base, beta } => mellin::power_map(&base.mellin_form()?, *beta),
            Scale { base, a } => mellin::scale(&base.mellin_form()?, *a, ScaleMode::Space),
            At { base, alpha, beta } => mellin::time_map(&base.mellin_form()?, *alpha, *beta),
            Abs { base } => Ok(base.mellin_form()?),
            SumOfPowers { .. } => return None,
        };
        r.ok()
    }
}

fn gamma_unit<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("validated shape").sample(rng)
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

fn sharded<F>(count: usize, seed: u64, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha20Rng) -> Result<f64> + Sync,
{
    let shards = count.div_ceil(SHARD_SIZE);
    let parts: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = shard_rng(seed, k);
            let len = SHARD_SIZE.min(count - k * SHARD_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// I.i.d. Gamma variates with shape `mu` and the given scale.
pub fn sample_gamma(mu: f64, scale: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    if !(mu > 0.0 && scale > 0.0) {
        return Err(SamplerError::Invalid(format!("gamma({mu}, {scale})")));
    }
    let values = sharded(count, seed, |rng| Ok(scale * gamma_unit(mu, rng)))?;
    Ok(SampleBatch { values, t: scale, seed, expr_digest: format!("gamma:{mu}:{scale}") })
}

/// Marginal draws of `expr` at time `t`.
pub fn sample_process(expr: &ProcessExpr, t: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    expr.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(SamplerError::Invalid(format!("time {t} must be positive")));
    }
    let values = sharded(count, seed, |rng| expr.sample_one(t, rng))?;
    Ok(SampleBatch { values, t, seed, expr_digest: expr.digest() })
}

/// Pairs `(B_H(t₁), B_H(t₂))` with the fractional Brownian covariance.
pub fn sample_gaussian_pair(hurst: f64, t1: f64, t2: f64, count: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if !(hurst > 0.0 && hurst <= 1.0 && t1 > 0.0 && t2 > 0.0) {
        return Err(SamplerError::Invalid(format!("pair(H={hurst}, {t1}, {t2})")));
    }
    let h2 = 2.0 * hurst;
    let v1 = t1.powf(h2);
    let v2 = t2.powf(h2);
    let c = 0.5 * (v1 + v2 - (t1 - t2).abs().powf(h2));
    let l11 = v1.sqrt();
    let l21 = c / l11;
    let rest = v2 - l21 * l21;
    if rest < -1e-12 * v2 {
        return Err(SamplerError::NotPsd);
    }
    let l22 = rest.max(0.0).sqrt();
    let flat = sharded(2 * count, seed, |rng| Ok(rng.sample(StandardNormal)))?;
    Ok(flat.chunks_exact(2).map(|z| (l11 * z[0], l21 * z[0] + l22 * z[1])).collect())
}

impl fmt::Display for ProcessExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ProcessExpr::*;
        let list = |f: &mut fmt::Formatter<'_>, v: &[ProcessExpr]| -> fmt::Result {
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            Ok(())
        };
        match self {
            Gg { params } => match params.clock {
                Clock::Raw => write!(f, "gg({}, {})", params.gamma, params.mu),
                Clock::Tilde => write!(f, "ggt({}, {})", params.gamma, params.mu),
                Clock::Affine { alpha, beta } => write!(f, "gga({}, {}, {alpha}, {beta})", params.gamma, params.mu),
            },
            Brown => write!(f, "brown()"),
            Fbm { hurst } => write!(f, "fbm({hurst})"),
            Cauchy => write!(f, "cauchy()"),
            FoldedCauchy => write!(f, "fcauchy()"),
            BesselSq { delta } => write!(f, "bsq({delta})"),
            StableHalf => write!(f, "stable()"),
            BrownNorm { n } => write!(f, "bnorm({n})"),
            Compose { outer, inner } => write!(f, "compose({outer}, {inner})"),
            ProductSplit { children } => {
                write!(f, "prod(")?;
                list(f, children)?;
                write!(f, ")")
            }
            Mul { children } => {
                write!(f, "mul(")?;
                list(f, children)?;
                write!(f, ")")
            }
            Power { base, beta } => write!(f, "pow({base}, {beta})"),
            Scale { base, a } => write!(f, "scale({base}, {a})"),
            At { base, alpha, beta } => write!(f, "at({base}, {alpha}, {beta})"),
            Abs { base } => write!(f, "abs({base})"),
            SumOfPowers { children, gammas, outer_root } => {
                write!(f, "sumpow({outer_root}")?;
                for (c, g) in children.iter().zip(gammas) {
                    write!(f, ", {g}, {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

enum Arg {
    Num(f64),
    Expr(ProcessExpr),
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(SamplerError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        (self.pos > start && self.s[start].is_ascii_alphabetic()).then(|| String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && matches!(self.s[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E') {
            self.pos += 1;
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        match txt.parse::<f64>().ok() {
            Some(v) => {
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let d = self.number()?;
                    return Ok(v / d);
                }
                Ok(v)
            }
            None => {
                self.pos = start;
                self.err("expected a number")
            }
        }
    }

    fn arg(&mut self) -> Result<Arg> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => Ok(Arg::Expr(self.expr()?)),
            _ => Ok(Arg::Num(self.number()?)),
        }
    }

    fn expr(&mut self) -> Result<ProcessExpr> {
        use ProcessExpr::*;
        let at = self.pos;
        let Some(name) = self.ident() else { return self.err("expected a process name") };
        let mut args = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            if self.peek() == Some(b')') {
                self.pos += 1;
            } else {
                loop {
                    args.push(self.arg()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return self.err("expected `,` or `)`"),
                    }
                }
            }
        }
        let fail = |msg: String| Err(SamplerError::Parse { pos: at, msg });
        let nums = |args: &[Arg]| -> Option<Vec<f64>> {
            args.iter().map(|a| if let Arg::Num(v) = a { Some(*v) } else { None }).collect()
        };
        let exprs = |args: Vec<Arg>| -> Option<Vec<ProcessExpr>> {
            args.into_iter().map(|a| if let Arg::Expr(e) = a { Some(e) } else { None }).collect()
        };
        let gg = |n: &[f64], clock: Clock| Gg { params: GGParams { mu: n[1], gamma: n[0], clock } };
        let e = match (name.as_str(), args.len()) {
            ("gg", 2) | ("ggt", 2) | ("gga", 4) => {
                let Some(n) = nums(&args) else { return fail(format!("{name} takes numbers")) };
                let clock = match name.as_str() {
                    "gg" => Clock::Raw,
                    "ggt" => Clock::Tilde,
                    _ => Clock::Affine { alpha: n[2], beta: n[3] },
                };
                gg(&n, clock)
            }
            ("brown", 0) => Brown,
            ("cauchy", 0) => Cauchy,
            ("fcauchy", 0) => FoldedCauchy,
            ("stable", 0) => StableHalf,
            ("fbm", 1) | ("bsq", 1) | ("bnorm", 1) => {
                let Some(n) = nums(&args) else { return fail(format!("{name} takes a number")) };
                match name.as_str() {
                    "fbm" => Fbm { hurst: n[0] },
                    "bsq" => BesselSq { delta: n[0] },
                    _ => {
                        if n[0] < 1.0 || n[0].fract() != 0.0 {
                            return fail("bnorm needs a positive integer dimension".into());
                        }
                        BrownNorm { n: n[0] as usize }
                    }
                }
            }
            ("compose", 2) => {
                let Some(mut v) = exprs(args) else { return fail("compose takes two processes".into()) };
                let inner = v.pop().expect("two");
                let outer = v.pop().expect("two");
                Compose { outer: Box::new(outer), inner: Box::new(inner) }
            }
            ("prod", k) | ("mul", k) if k > 0 => {
                let Some(v) = exprs(args) else { return fail(format!("{name} takes processes")) };
                if name == "prod" {
                    ProductSplit { children: v }
                } else {
                    Mul { children: v }
                }
            }
            ("pow", 2) | ("scale", 2) | ("at", 3) | ("abs", 1) => {
                let mut it = args.into_iter();
                let Some(Arg::Expr(base)) = it.next() else { return fail(format!("{name} needs a process first")) };
                let rest: Vec<Arg> = it.collect();
                let Some(n) = nums(&rest) else { return fail(format!("{name} takes numbers after the process")) };
                let base = Box::new(base);
                match name.as_str() {
                    "pow" => Power { base, beta: n[0] },
                    "scale" => Scale { base, a: n[0] },
                    "at" => At { base, alpha: n[0], beta: n[1] },
                    _ => Abs { base },
                }
            }
            ("sumpow", k) if k >= 3 && k % 2 == 1 => {
                let mut it = args.into_iter();
                let Some(Arg::Num(root)) = it.next() else { return fail("sumpow starts with the outer root".into()) };
                let mut gammas = Vec::new();
                let mut children = Vec::new();
                while let (Some(Arg::Num(g)), Some(Arg::Expr(c))) = (it.next(), it.next()) {
                    gammas.push(g);
                    children.push(c);
                }
                if 2 * children.len() + 1 != k {
                    return fail("sumpow takes (root, exponent, process, ...)".into());
                }
                SumOfPowers { children, gammas, outer_root: root }
            }
            _ => return fail(format!("unknown process `{name}` with {} arguments", args.len())),
        };
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ProcessExpr {
        ProcessExpr::parse(s).unwrap()
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in [
            "compose(ggt(2, 0.5), ggt(-2, 0.5))",
            "prod(ggt(2, 0.5), ggt(2, 0.5))",
            "sumpow(2, 1, gg(1, 0.5), 2, gg(2, 0.5), -2, gg(-2, 0.5))",
            "abs(compose(brown(), bsq(2)))",
            "at(scale(pow(gga(1.5, 0.7, 2, 1), -1), 3), 1, -2)",
            "mul(fbm(0.3), bnorm(3), stable(), fcauchy(), cauchy())",
        ] {
            let e = p(s);
            assert_eq!(e.to_string(), s);
            assert_eq!(p(&e.to_string()), e);
        }
        assert_eq!(p("brown"), ProcessExpr::Brown);
        assert_eq!(p("gg(2, 1/2)"), p("gg(2, 0.5)"));
    }

    #[test]
    fn parse_errors() {
        for s in ["", "gg(1)", "compose(brown(), brown())", "pow(brown(), 0.5)", "foo()", "gg(1, 2) x", "bnorm(1.5)", "gg(1, -1)"] {
            assert!(ProcessExpr::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn exponential_mean() {
        let t = 2.5;
        let n = 200_000;
        let b = sample_gamma(1.0, t, n, 3).unwrap();
        assert!((mean(&b.values) - t).abs() < 3.0 * t / (n as f64).sqrt());
    }

    #[test]
    fn gamma_mean_million() {
        let b = sample_gamma(2.0, 1.0, 1_000_000, 11).unwrap();
        assert!((mean(&b.values) - 2.0).abs() < 0.006);
    }

    #[test]
    fn small_shape_gamma_is_positive() {
        let b = sample_gamma(0.05, 1.0, 50_000, 5).unwrap();
        assert!(b.values.iter().all(|v| *v >= 0.0));
        assert!((mean(&b.values) - 0.05).abs() < 4.0 * (0.05f64).sqrt() / (50_000f64).sqrt());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let e = p("compose(ggt(2, 0.5), ggt(-2, 0.5))");
        let a = sample_process(&e, 1.0, 40_000, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_process(&e, 1.0, 40_000, 42).unwrap());
        assert_eq!(a, b);
        let c = sample_process(&e, 1.0, 40_000, 43).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn scale_is_realization_wise() {
        let e = p("compose(gg(1.5, 0.8), bsq(3))");
        let s = ProcessExpr::Scale { base: Box::new(e.clone()), a: 2.5 };
        let a = sample_process(&e, 1.3, 10_000, 9).unwrap();
        let b = sample_process(&s, 1.3, 10_000, 9).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| 2.5 * x == *y));
    }

    #[test]
    fn gaussian_pair_covariances() {
        let same = sample_gaussian_pair(0.5, 1.0, 1.0, 1000, 1).unwrap();
        assert!(same.iter().all(|(a, b)| (a - b).abs() < 1e-12));
        let n = 400_000;
        for (h, t1, t2) in [(0.5, 1.0, 2.0), (0.3, 1.0, 1.5)] {
            let pairs = sample_gaussian_pair(h, t1, t2, n, 7).unwrap();
            let prods: Vec<f64> = pairs.iter().map(|(a, b)| a * b).collect();
            let m = mean(&prods);
            let sd = (prods.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            let exact = 0.5 * (t1.powf(2.0 * h) + t2.powf(2.0 * h) - (t2 - t1).abs().powf(2.0 * h));
            assert!((m - exact).abs() < 3.0 * sd / (n as f64).sqrt(), "H={h}: {m} vs {exact}");
        }
    }

    #[test]
    fn empirical_moments_match_forms() {
        let n = 100_000;
        for s in [
            "compose(ggt(2, 0.5), ggt(2, 0.5))",
            "prod(ggt(2, 0.5), ggt(-2, 0.5))",
            "compose(brown(), stable())",
            "fcauchy()",
            "pow(gg(1.7, 1.2), 1.7)",
            "compose(fbm(0.6), gg(1.2, 0.9))",
            "at(bnorm(3), 0.5, 1)",
            "scale(compose(gg(2, 0.5), bsq(2)), 1.5)",
            "mul(fbm(0.2), fbm(0.2), fbm(0.2))",
        ] {
            let e = p(s);
            let form = e.mellin_form().expect(s);
            let batch = sample_process(&e, 1.4, n, 2024).unwrap();
            for eta in [1.3, 1.7] {
                let xs: Vec<f64> = batch.values.iter().map(|v| v.abs().powf(eta - 1.0)).collect();
                let m = mean(&xs);
                let se = (xs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt() / (n as f64).sqrt();
                let exact = form.eval_real(eta, 1.4).unwrap();
                assert!((m - exact).abs() < 4.0 * se, "{s} eta={eta}: {m} vs {exact} (se {se})");
            }
        }
    }

    #[test]
    fn support_violation_is_reported() {
        let bad = ProcessExpr::Compose { outer: Box::new(ProcessExpr::Brown), inner: Box::new(ProcessExpr::Brown) };
        assert!(sample_process(&bad, 1.0, 10, 1).is_err());
    }
}
