//! Equality-in-distribution registry and the checks behind it.
//!
//! Every identity is checked two ways when possible: symbolically, by comparing
//! the Mellin forms of both sides on a grid, and statistically, by a two-sample
//! Kolmogorov–Smirnov test on independent draws. The module also checks that
//! catalog densities satisfy their evolution equations (finite differences under
//! grid halving) and that closed-form covariances agree with quadrature and
//! simulation.

use crate::densities::{bivariate_gamma_covariance, DensityError, DensityLaw};
use crate::mellin::{self, Clock, MellinError};
use crate::quad::{self, Tolerance};
use crate::samplers::{sample_gaussian_pair, sample_process, ProcessExpr, SamplerError};
use crate::specfun;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Mellin(#[from] MellinError),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("grid reaches the singular point x = {0}")]
    GridSingularity(f64),
    #[error("residual is not finite at x = {x}, t = {t}")]
    NonFiniteResidual { x: f64, t: f64 },
    #[error("invalid case: {0}")]
    Invalid(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
}

type Result<T> = std::result::Result<T, VerifyError>;

/// Default number of draws per side in a statistical comparison.
pub const DEFAULT_SAMPLES: usize = 100_000;
/// Default significance level of the KS test.
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Largest p-value accepted as a rejection for negative controls.
pub const REJECTION_P: f64 = 1e-4;
/// Smallest Mellin deviation accepted as a symbolic difference for negative controls.
pub const REJECTION_DEV: f64 = 1e-3;
/// Minimum observed convergence order of a PDE residual.
pub const MIN_ORDER: f64 = 1.7;

// ---------------------------------------------------------------------------
// Kolmogorov–Smirnov

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let p = (2.0 * PI).sqrt() / lambda * (y + y.powi(9) + y.powi(25) + y.powi(49));
        (1.0 - p).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        (2.0 * (x - x.powi(4) + x.powi(9))).clamp(0.0, 1.0)
    }
}

fn ks_p(d: f64, ne: f64) -> f64 {
    let s = ne.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.par_sort_unstable_by(f64::total_cmp);
    s
}

/// Two-sided two-sample KS statistic with its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    if a.is_empty() || b.is_empty() {
        return KsResult { statistic: f64::NAN, p_value: f64::NAN };
    }
    let (a, b) = (sorted(a), sorted(b));
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        if x <= y {
            while i < a.len() && a[i] == x {
                i += 1;
            }
        }
        if y <= x {
            while j < b.len() && b[j] == y {
                j += 1;
            }
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    KsResult { statistic: d, p_value: ks_p(d, n1 * n2 / (n1 + n2)) }
}

/// One-sample KS statistic of `a` against a continuous distribution function.
pub fn ks_one_sample<F: Fn(f64) -> f64>(a: &[f64], cdf: F) -> KsResult {
    if a.is_empty() {
        return KsResult { statistic: f64::NAN, p_value: f64::NAN };
    }
    let a = sorted(a);
    let n = a.len() as f64;
    let d = a
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    KsResult { statistic: d, p_value: ks_p(d, n) }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mellin,
    Ks,
    Moment,
    Residual,
    Quadrature,
}

/// Direction in which the statistic must sit relative to the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass iff `statistic < threshold`.
    Below,
    /// Pass iff `statistic >= threshold`.
    AtLeast,
}

impl Bound {
    pub fn holds(self, statistic: f64, threshold: f64) -> bool {
        match self {
            Bound::Below => statistic < threshold,
            Bound::AtLeast => statistic >= threshold,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub seeds: Vec<u64>,
    /// Non-finite entries serialize as `null` and read back as NaN.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default, deserialize_with = "nullable_map")]
    pub values: BTreeMap<String, f64>,
}

fn nullable<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn nullable_map<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
    let m = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(m.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub case_id: String,
    pub method: Method,
    #[serde(deserialize_with = "nullable")]
    pub statistic: f64,
    #[serde(deserialize_with = "nullable")]
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
    pub meta: ReportMeta,
}

impl VerificationReport {
    pub fn new(case_id: &str, method: Method, statistic: f64, threshold: f64, bound: Bound, meta: ReportMeta) -> Self {
        VerificationReport {
            case_id: case_id.to_string(),
            method,
            statistic,
            threshold,
            bound,
            passed: bound.holds(statistic, threshold),
            meta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let passed = reports.iter().filter(|r| r.passed).count();
        Summary { total: reports.len(), passed, failed: reports.len() - passed }
    }
}

// ---------------------------------------------------------------------------
// Identity registry

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    pub id: String,
    pub statement: String,
    pub lhs: ProcessExpr,
    pub rhs: ProcessExpr,
    pub mellin_provable: bool,
    /// Times at which the statistical comparison runs.
    pub times: Vec<f64>,
    /// Closed-form law of the left side, tested by a one-sample KS on `|lhs|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<DensityLaw>,
    /// Negative controls are expected to be rejected by every check.
    pub negative_control: bool,
}

impl IdentityCase {
    fn build(id: &str, statement: &str, lhs: &str, rhs: &str, mellin_provable: bool, times: &[f64]) -> Self {
        let parse = |s: &str| ProcessExpr::parse(s).unwrap_or_else(|e| panic!("registry expression `{s}`: {e}"));
        IdentityCase {
            id: id.to_string(),
            statement: statement.to_string(),
            lhs: parse(lhs),
            rhs: parse(rhs),
            mellin_provable,
            times: times.to_vec(),
            reference: None,
            negative_control: false,
        }
    }

    fn negative(mut self) -> Self {
        self.negative_control = true;
        self
    }

    fn with_reference(mut self, law: DensityLaw) -> Self {
        self.reference = Some(law);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.lhs.validate()?;
        self.rhs.validate()?;
        if self.lhs.nonnegative() != self.rhs.nonnegative() {
            return Err(VerifyError::Invalid(format!("{}: the two sides have different support classes", self.id)));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0)) {
            return Err(VerifyError::Invalid(format!("{}: times must be positive", self.id)));
        }
        if self.mellin_provable && (self.lhs.mellin_form().is_none() || self.rhs.mellin_form().is_none()) {
            return Err(VerifyError::Invalid(format!("{}: a side has no Mellin form", self.id)));
        }
        Ok(())
    }
}

/// All identities, in reporting order.
pub fn registry() -> Vec<IdentityCase> {
    let b = IdentityCase::build;
    let mut v = vec![
        b(
            "tilde-compose-split",
            "G~(G~(t)) = G~(t^1/2) G~(t^1/2)",
            "compose(ggt(2, 0.5), ggt(2, 0.5))",
            "prod(ggt(2, 0.5), ggt(2, 0.5))",
            true,
            &[1.0, 2.5],
        ),
        b(
            "tilde-inverse-compose-split",
            "G~_{-g}(G~_{-g}(t)) = G~_{-g}(t^1/2) G~_{-g}(t^1/2)",
            "compose(ggt(-2, 0.8), ggt(-2, 0.8))",
            "prod(ggt(-2, 0.8), ggt(-2, 0.8))",
            true,
            &[1.0],
        ),
        b(
            "tilde-mixed-split",
            "G~_g(G~_{-g}(t)) = G~_g(t^1/2) G~_{-g}(t^1/2)",
            "compose(ggt(2, 0.7), ggt(-2, 0.7))",
            "prod(ggt(2, 0.7), ggt(-2, 0.7))",
            true,
            &[1.0],
        ),
        b(
            "tilde-mixed-split-reversed",
            "G~_{-g}(G~_g(t)) = G~_{-g}(t^1/2) G~_g(t^1/2)",
            "compose(ggt(-2, 0.7), ggt(2, 0.7))",
            "prod(ggt(-2, 0.7), ggt(2, 0.7))",
            true,
            &[1.0],
        ),
        b(
            "cauchy-tilde-subordination",
            "|C(t)| = G~_{2,1/2}(G~_{-2,1/2}(t))",
            "fcauchy()",
            "compose(ggt(2, 0.5), ggt(-2, 0.5))",
            true,
            &[1.0, 3.0],
        ),
        b(
            "cauchy-self-reciprocal",
            "|C(t)| = 1/|C(1/t)|",
            "fcauchy()",
            "pow(at(fcauchy(), 1, -1), -1)",
            true,
            &[1.0, 2.0],
        ),
        b(
            "tilde-chain-four",
            "G~1(G~2(G~3(G~4(t)))) = prod G~j(t^1/4)",
            "compose(ggt(2, 0.5), compose(ggt(-1, 1.5), compose(ggt(0.5, 0.7), ggt(3, 2))))",
            "prod(ggt(2, 0.5), ggt(-1, 1.5), ggt(0.5, 0.7), ggt(3, 2))",
            true,
            &[1.0, 0.4],
        ),
    ];
    for a in [0.5, 2.0] {
        let chain = "compose(fcauchy(), compose(fcauchy(), fcauchy()))";
        v.push(b(
            &format!("cauchy-chain-scaling-{a}"),
            "a|C1(|C2(|C3(t)|)|)| = |C1(|C2(|C3(at)|)|)|",
            &format!("scale({chain}, {a})"),
            &format!("at({chain}, {a}, 1)"),
            true,
            &[1.0],
        ));
    }
    v.extend([
        b(
            "cauchy-chain-product",
            "2 C1(|C2(|C3(t)|)|) = prod Cj((2t)^1/3)",
            "scale(compose(cauchy(), compose(fcauchy(), fcauchy())), 2)",
            "at(prod(cauchy(), cauchy(), cauchy()), 2, 1)",
            true,
            &[1.0],
        ),
        b(
            "gamma-compose-split",
            "G_g(G_1(t)) = G_g(t^1/2) G_g(t^1/2)",
            "compose(gg(2, 0.8), gg(1, 0.8))",
            "prod(gg(2, 0.8), gg(2, 0.8))",
            true,
            &[1.0, 2.5],
        ),
        b(
            "brown-product-gamma",
            "G_{2,1/2}(G_{1,1/2}(4t)) = |B1(t^1/2) B2(t^1/2)|",
            "at(compose(gg(2, 0.5), gg(1, 0.5)), 4, 1)",
            "abs(prod(brown(), brown()))",
            true,
            &[1.0, 2.0],
        ),
        b(
            "gamma-chain-split",
            "G_g(G_1(G_1(t))) = prod G_g(t^1/3)",
            "compose(gg(1.5, 0.6), compose(gg(1, 0.6), gg(1, 0.6)))",
            "prod(gg(1.5, 0.6), gg(1.5, 0.6), gg(1.5, 0.6))",
            true,
            &[1.0],
        ),
    ]);
    let g = 1.5_f64;
    v.extend([
        b(
            "gamma-chain-self-similar",
            "a^{1/g} G_g(G_1(G_1(t))) = prod G_g((at)^1/3)",
            &format!("scale(compose(gg({g}, 0.6), compose(gg(1, 0.6), gg(1, 0.6))), {})", 2f64.powf(1.0 / g)),
            &format!("at(prod(gg({g}, 0.6), gg({g}, 0.6), gg({g}, 0.6)), 2, 1)"),
            true,
            &[1.0],
        ),
        b(
            "gamma-chain-power",
            "[G_g1(G_g2(G_g3(t)))]^g1 = G_1(G_g2(G_g3(t)))",
            "pow(compose(gg(2, 0.7), compose(gg(-1, 1.2), gg(0.5, 0.9))), 2)",
            "compose(gg(1, 0.7), compose(gg(-1, 1.2), gg(0.5, 0.9)))",
            true,
            &[1.0],
        ),
        b("gamma-root", "G_1(t)^{1/g} = G_g(t)", "pow(gg(1, 0.9), 0.4)", "gg(2.5, 0.9)", true, &[1.0, 3.0]),
        b("gamma-power", "G_g(t)^g = G_1(t)", "pow(gg(2.5, 0.9), 2.5)", "gg(1, 0.9)", true, &[1.0]),
        b("gamma-reciprocal", "1/G_g(t) = G_{-g}(t)", "pow(gg(1.7, 1.3), -1)", "gg(-1.7, 1.3)", true, &[1.0, 0.5]),
        b(
            "gamma-power-sum",
            "sum G_{gi,mu}(t)^gi = G_{1,n mu}(t)",
            "sumpow(1, 1, gg(1, 0.6), 2, gg(2, 0.6), -2, gg(-2, 0.6), 0.5, gg(0.5, 0.6))",
            "gg(1, 2.4)",
            false,
            &[1.0],
        ),
        b(
            "gamma-power-sum-bessel",
            "(sum G_{gi,1/2}(t)^gi)^{1/2} = ||B^3(t/2)||",
            "sumpow(2, 1, gg(1, 0.5), 2, gg(2, 0.5), -2, gg(-2, 0.5))",
            "at(bnorm(3), 0.5, 1)",
            false,
            &[1.0],
        ),
        b(
            "cauchy-reversed-clock",
            "|C(t)| = G_{2,1/2}(G_{-1,1/2}(1/t^2))",
            "fcauchy()",
            "at(compose(gg(2, 0.5), gg(-1, 0.5)), 1, -2)",
            true,
            &[0.5, 2.0],
        ),
        b("cauchy-brown-stable", "C(t) = B(S_1/2(t))", "cauchy()", "compose(brown(), stable())", true, &[1.0, 2.0]),
        b(
            "bessel-norm-gamma",
            "||I^2_1/2(2t)|| = |B(BESQ^2(t))|",
            "at(compose(bnorm(2), gg(1, 0.5)), 2, 1)",
            "abs(compose(brown(), bsq(2)))",
            true,
            &[1.0],
        ),
    ]);
    let h = 0.7_f64;
    let hh = 0.6_f64;
    let (h1, h2) = (0.3_f64, 0.7_f64);
    v.extend([
        b(
            "fbm-power-product",
            "B_H(|B_H(t)|^{1/H}) = B_{H/2}(t) B_{H/2}(t)",
            &format!("compose(fbm({h}), pow(abs(fbm({h})), {}))", 1.0 / h),
            &format!("mul(fbm({}), fbm({}))", h / 2.0, h / 2.0),
            true,
            &[1.0],
        ),
        b(
            "fbm-square-chain",
            "B(|B(|B_H(t)|^2)|^2) = prod B_{H/3}(t)",
            &format!("compose(brown(), pow(compose(brown(), pow(fbm({hh}), 2)), 2))"),
            &format!("mul(fbm({0}), fbm({0}), fbm({0}))", hh / 3.0),
            true,
            &[1.7],
        ),
        b(
            "brown-gamma-fbm",
            "B(G_{1/H1,1/2}(2t^{2H2})) = B_H1(|B_H2(t)|)",
            &format!("compose(brown(), gga({}, 0.5, 2, {}))", 1.0 / h1, 2.0 * h2),
            &format!("compose(fbm({h1}), abs(fbm({h2})))"),
            true,
            &[1.0, 2.0],
        ),
    ]);
    for nu in [1usize, 3] {
        let t = (nu as f64).sqrt();
        v.push(
            b(
                &format!("student-ratio-{nu}"),
                "|B(t)| / BES^nu(1/t) = G~_{2,1/2}(G~_{-2,nu/2}(t))",
                &format!("mul(abs(brown()), pow(at(bnorm({nu}), 1, -1), -1))"),
                &format!("compose(ggt(2, 0.5), ggt(-2, {}))", nu as f64 / 2.0),
                true,
                &[t],
            )
            .with_reference(DensityLaw::Tdist1 { nu: nu as f64 }),
        );
    }
    v.extend([
        b(
            "raw-vs-tilde-compose",
            "G_g(G_g(t)) differs from G~_g(G~_g(t)) for g = 2",
            "compose(gg(2, 0.5), gg(2, 0.5))",
            "compose(ggt(2, 0.5), ggt(2, 0.5))",
            true,
            &[1.0],
        )
        .negative(),
        b("tilde-index", "G~_2(t) differs from G~_1(t)", "ggt(2, 0.5)", "ggt(1, 0.5)", true, &[1.0]).negative(),
        b(
            "brown-product-gamma-unscaled",
            "G_{2,1/2}(G_{1,1/2}(2t)) differs from |B1(t^1/2) B2(t^1/2)|",
            "compose(gg(2, 0.5), gga(1, 0.5, 2, 1))",
            "abs(prod(brown(), brown()))",
            true,
            &[1.0],
        )
        .negative(),
        b(
            "brown-gamma-product-chain",
            "B(G_2(2t) G_2(2t)) differs from B(|B(|B(t)|)|)",
            "compose(brown(), mul(gga(2, 0.5, 2, 1), gga(2, 0.5, 2, 1)))",
            "compose(brown(), abs(compose(brown(), abs(brown()))))",
            true,
            &[4.0],
        )
        .negative(),
    ]);
    v
}

pub fn find_case(id: &str) -> Result<IdentityCase> {
    registry().into_iter().find(|c| c.id == id).ok_or_else(|| VerifyError::UnknownCase(id.to_string()))
}

/// Symbolic comparison of both sides.
pub fn mellin_check(case: &IdentityCase) -> Result<VerificationReport> {
    let (Some(f), Some(g)) = (case.lhs.mellin_form(), case.rhs.mellin_form()) else {
        return Err(VerifyError::Invalid(format!("{}: no Mellin form", case.id)));
    };
    let cmp = mellin::equal_on_strip(&f, &g)?;
    let mut meta = ReportMeta::default();
    meta.values.insert("points".into(), cmp.points as f64);
    meta.values.insert("strip_lo".into(), cmp.strip.lo);
    meta.values.insert("strip_hi".into(), cmp.strip.hi);
    let (threshold, bound) = if case.negative_control {
        (REJECTION_DEV, Bound::AtLeast)
    } else {
        (mellin::EQUALITY_TOL, Bound::Below)
    };
    Ok(VerificationReport::new(&case.id, Method::Mellin, cmp.max_rel_dev, threshold, bound, meta))
}

fn side_seeds(seed: u64) -> (u64, u64) {
    (seed.wrapping_mul(2), seed.wrapping_mul(2).wrapping_add(1))
}

/// Smallest p-value over the two-sample test and, when present, the reference-law test.
fn ks_p_value(case: &IdentityCase, t: f64, n: usize, seed: u64) -> Result<(KsResult, Option<KsResult>)> {
    let (sl, sr) = side_seeds(seed);
    let a = sample_process(&case.lhs, t, n, sl)?;
    let b = sample_process(&case.rhs, t, n, sr)?;
    let two = ks_two_sample(&a.values, &b.values);
    let one = match &case.reference {
        Some(law) => {
            let table = law.folded_cdf(t)?;
            let abs: Vec<f64> = a.values.iter().map(|v| v.abs()).collect();
            Some(ks_one_sample(&abs, |x| table.eval(x)))
        }
        None => None,
    };
    Ok((two, one))
}

/// Mellin proof (when available) and KS test for one seed.
pub fn check_identity(case: &IdentityCase, t: f64, n: usize, seed: u64, alpha: f64) -> Result<VerificationReport> {
    case.validate()?;
    let (two, one) = ks_p_value(case, t, n, seed)?;
    let p = one.map_or(two.p_value, |o| o.p_value.min(two.p_value));
    let mut meta = ReportMeta { t: Some(t), samples: Some(n), seeds: vec![seed], ..Default::default() };
    meta.values.insert("ks_statistic".into(), two.statistic);
    meta.values.insert("ks_p".into(), two.p_value);
    if let Some(o) = one {
        meta.values.insert("reference_p".into(), o.p_value);
    }
    let mellin_ok = if case.mellin_provable {
        let m = mellin_check(case)?;
        meta.values.insert("mellin_max_rel_dev".into(), m.statistic);
        m.passed
    } else {
        true
    };
    let mut r = if case.negative_control {
        let p_max = one.map_or(two.p_value, |o| o.p_value.max(two.p_value));
        VerificationReport::new(&case.id, Method::Ks, p_max, REJECTION_P, Bound::Below, meta)
    } else {
        VerificationReport::new(&case.id, Method::Ks, p, alpha, Bound::AtLeast, meta)
    };
    r.passed &= mellin_ok;
    Ok(r)
}

/// KS over several seeds; positives need `ceil(0.9 k)` passing seeds, negatives must be rejected by all.
pub fn ks_multi_seed(case: &IdentityCase, t: f64, n: usize, seeds: &[u64], alpha: f64) -> Result<VerificationReport> {
    case.validate()?;
    let ps = seeds
        .iter()
        .map(|&s| {
            let (two, one) = ks_p_value(case, t, n, s)?;
            Ok(match one {
                Some(o) if case.negative_control => o.p_value.max(two.p_value),
                Some(o) => o.p_value.min(two.p_value),
                None => two.p_value,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut meta = ReportMeta { t: Some(t), samples: Some(n), seeds: seeds.to_vec(), ..Default::default() };
    let min_p = ps.iter().copied().fold(f64::INFINITY, f64::min);
    let max_p = ps.iter().copied().fold(0.0, f64::max);
    meta.values.insert("min_p".into(), min_p);
    meta.values.insert("max_p".into(), max_p);
    meta.values.insert("alpha".into(), alpha);
    Ok(if case.negative_control {
        VerificationReport::new(&case.id, Method::Ks, max_p, REJECTION_P, Bound::Below, meta)
    } else {
        let passing = ps.iter().filter(|p| **p >= alpha).count();
        let need = (0.9 * seeds.len() as f64).ceil();
        VerificationReport::new(&case.id, Method::Ks, passing as f64, need, Bound::AtLeast, meta)
    })
}

// ---------------------------------------------------------------------------
// Evolution equations

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PdeOperator {
    /// `t ∂t q + (1/γ) ∂x (x q) = 0`.
    Scaling { gamma: f64 },
    /// `∂t q = x ∂²x q − (μ − 2) ∂x q`.
    Gamma { mu: f64 },
    /// `∂t q = γ⁻² {∂x x^{2−γ} ∂x q − (γμ − 1) ∂x x^{1−γ} q}`.
    GeneralizedGamma { mu: f64, gamma: f64 },
    /// `∂t q = (μ/2) ∂²x q − (1/4) ∂³x (x q)`.
    BrownGamma { mu: f64 },
    /// `∂t q = −H t^{2H−1} (2 ∂²x + x ∂³x) q`.
    FbmProduct { hurst: f64 },
    /// `∂t q = −(1/2) ∂²x (x ∂x q)`.
    BrownGammaHalf,
    /// `4 ∂t q = (2μ − n) Δq − Δ(x·∇q)`.
    Radial { mu: f64, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub x: (f64, f64),
    pub nx: usize,
    pub t: (f64, f64),
    pub nt: usize,
}

impl PdeGrid {
    fn steps(&self) -> (f64, f64) {
        ((self.x.1 - self.x.0) / (self.nx - 1) as f64, (self.t.1 - self.t.0) / (self.nt - 1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeCase {
    pub id: String,
    pub law: DensityLaw,
    pub operator: PdeOperator,
    pub grid: PdeGrid,
    /// The density is read at time `time_scale · t`.
    pub time_scale: f64,
    /// Whether `x = 0` is excluded from the equation's domain.
    pub singular_origin: bool,
}

fn d1(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn d2(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

fn d3(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
}

fn shifted(p: &[f64], i: usize, d: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += d;
    q
}

fn laplacian(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> f64 {
    let c = f(p);
    (0..p.len()).map(|i| (f(&shifted(p, i, h)) - 2.0 * c + f(&shifted(p, i, -h))) / (h * h)).sum()
}

impl PdeCase {
    fn dim(&self) -> usize {
        match self.operator {
            PdeOperator::Radial { n, .. } => n,
            _ => 1,
        }
    }

    fn density(&self, p: &[f64], t: f64) -> f64 {
        self.law.eval_point(p, self.time_scale * t).unwrap_or(f64::NAN)
    }

    /// `LHS − RHS` at one point with space step `h` and time step `k`.
    fn residual_at(&self, p: &[f64], t: f64, h: f64, k: f64) -> f64 {
        let q = |y: f64, s: f64| self.density(&[y], s);
        let x = p[0];
        let dt = |p: &[f64]| (self.density(p, t + k) - self.density(p, t - k)) / (2.0 * k);
        let qx = |y: f64| q(y, t);
        match self.operator {
            PdeOperator::Scaling { gamma } => t * dt(p) + d1(&|y| y * qx(y), x, h) / gamma,
            PdeOperator::Gamma { mu } => dt(p) - (x * d2(&qx, x, h) - (mu - 2.0) * d1(&qx, x, h)),
            PdeOperator::GeneralizedGamma { mu, gamma } => {
                let a = |y: f64| y.powf(2.0 - gamma);
                let flux = (a(x + 0.5 * h) * (qx(x + h) - qx(x)) - a(x - 0.5 * h) * (qx(x) - qx(x - h))) / (h * h);
                let drift = d1(&|y| y.powf(1.0 - gamma) * qx(y), x, h);
                dt(p) - (flux - (gamma * mu - 1.0) * drift) / (gamma * gamma)
            }
            PdeOperator::BrownGamma { mu } => dt(p) - (0.5 * mu * d2(&qx, x, h) - 0.25 * d3(&|y| y * qx(y), x, h)),
            PdeOperator::FbmProduct { hurst } => {
                dt(p) + hurst * t.powf(2.0 * hurst - 1.0) * (2.0 * d2(&qx, x, h) + x * d3(&qx, x, h))
            }
            PdeOperator::BrownGammaHalf => dt(p) + 0.5 * d2(&|y| y * d1(&qx, y, h), x, h),
            PdeOperator::Radial { mu, n } => {
                let f = |p: &[f64]| self.density(p, t);
                let u = |p: &[f64]| (0..p.len()).map(|i| p[i] * (f(&shifted(p, i, h)) - f(&shifted(p, i, -h))) / (2.0 * h)).sum::<f64>();
                4.0 * dt(p) - ((2.0 * mu - n as f64) * laplacian(&f, p, h) - laplacian(&u, p, h))
            }
        }
    }

    fn points(&self) -> Vec<(Vec<f64>, f64)> {
        let g = &self.grid;
        let (hx, ht) = g.steps();
        let xs: Vec<f64> = (0..g.nx).map(|i| g.x.0 + i as f64 * hx).collect();
        let ts: Vec<f64> = (0..g.nt).map(|j| g.t.0 + j as f64 * ht).collect();
        let mut out = Vec::new();
        for &t in &ts {
            if self.dim() == 1 {
                out.extend(xs.iter().map(|&x| (vec![x], t)));
            } else {
                for &x in &xs {
                    for &y in &xs {
                        let mut p = vec![0.0; self.dim()];
                        p[0] = x;
                        p[1] = y;
                        out.push((p, t));
                    }
                }
            }
        }
        out
    }

    fn max_residual(&self, h: f64, k: f64) -> Result<f64> {
        let pts = self.points();
        let r: Vec<f64> = pts.par_iter().map(|(p, t)| self.residual_at(p, *t, h, k).abs()).collect();
        match r.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(VerifyError::NonFiniteResidual { x: pts[i].0[0], t: pts[i].1 }),
            None => Ok(r.into_iter().fold(0.0, f64::max)),
        }
    }

    fn check_grid(&self) -> Result<()> {
        let g = &self.grid;
        if g.nx < 3 || g.nt < 2 || !(g.x.0 < g.x.1) || !(g.t.0 < g.t.1) {
            return Err(VerifyError::Invalid(format!("{}: degenerate grid", self.id)));
        }
        if self.dim() > 1 && self.dim() != 2 {
            return Err(VerifyError::Invalid(format!("{}: only planar grids are supported", self.id)));
        }
        let (h, k) = g.steps();
        if self.singular_origin && g.x.0 - 2.0 * h <= 0.0 && 0.0 <= g.x.1 + 2.0 * h {
            return Err(VerifyError::GridSingularity(0.0));
        }
        if g.t.0 - k <= 0.0 {
            return Err(VerifyError::Invalid(format!("{}: the time stencil reaches t <= 0", self.id)));
        }
        Ok(())
    }
}

/// Residual at steps `(h, k)` and `(h/2, k/2)` on the same points, with the observed order.
pub fn pde_residual(case: &PdeCase) -> Result<VerificationReport> {
    case.check_grid()?;
    let (h, k) = case.grid.steps();
    let coarse = case.max_residual(h, k)?;
    let fine = case.max_residual(0.5 * h, 0.5 * k)?;
    let order = (coarse / fine).log2();
    let mut meta = ReportMeta::default();
    meta.values.insert("h".into(), h);
    meta.values.insert("k".into(), k);
    meta.values.insert("residual_h".into(), coarse);
    meta.values.insert("residual_h2".into(), fine);
    let mut r = VerificationReport::new(&case.id, Method::Residual, order, MIN_ORDER, Bound::AtLeast, meta);
    r.passed &= fine < coarse;
    Ok(r)
}

pub fn pde_cases() -> Vec<PdeCase> {
    let grid = |x: (f64, f64), nx: usize, t: (f64, f64), nt: usize| PdeGrid { x, nx, t, nt };
    let case = |id: &str, law: DensityLaw, operator: PdeOperator, grid: PdeGrid, time_scale: f64| PdeCase {
        id: id.to_string(),
        law,
        operator,
        grid,
        time_scale,
        singular_origin: true,
    };
    vec![
        case(
            "gg-scaling",
            DensityLaw::Gg { mu: 0.7, gamma: 2.0, clock: Clock::Raw },
            PdeOperator::Scaling { gamma: 2.0 },
            grid((0.3, 3.0), 201, (0.5, 2.0), 21),
            1.0,
        ),
        case(
            "gamma-second-order",
            DensityLaw::Gg { mu: 2.0, gamma: 1.0, clock: Clock::Raw },
            PdeOperator::Gamma { mu: 2.0 },
            grid((0.5, 5.0), 401, (0.5, 2.0), 21),
            1.0,
        ),
        case(
            "gg-second-order",
            DensityLaw::Gg { mu: 1.2, gamma: 1.5, clock: Clock::Raw },
            PdeOperator::GeneralizedGamma { mu: 1.2, gamma: 1.5 },
            grid((0.4, 3.0), 201, (0.5, 2.0), 21),
            1.0,
        ),
        case(
            "brown-gamma-third-order",
            DensityLaw::Bg1 { mu: 1.5 },
            PdeOperator::BrownGamma { mu: 1.5 },
            grid((0.5, 4.0), 201, (0.5, 2.0), 21),
            1.0,
        ),
        case(
            "fbm-product-third-order",
            DensityLaw::K0Fbm { hurst: 0.7 },
            PdeOperator::FbmProduct { hurst: 0.7 },
            grid((0.3, 3.0), 201, (0.5, 2.0), 21),
            1.0,
        ),
        case(
            "brown-gamma-half",
            DensityLaw::Bg1 { mu: 0.5 },
            PdeOperator::BrownGammaHalf,
            grid((0.3, 3.0), 201, (0.5, 2.0), 21),
            2.0,
        ),
        case(
            "radial-planar",
            DensityLaw::MultiBg1 { mu: 1.3, n: 2 },
            PdeOperator::Radial { mu: 1.3, n: 2 },
            grid((0.4, 2.0), 33, (0.5, 1.5), 5),
            1.0,
        ),
    ]
}

/// `E{B(G_1(t))}^{2k}` from the closed form, and its Monte Carlo estimate within four standard errors.
pub fn even_moment_check(mu: f64, t: f64, k: u32, n: usize, seed: u64) -> Result<VerificationReport> {
    let kk = k as f64;
    let exact = (kk * std::f64::consts::LN_2 - 0.5 * PI.ln() + specfun::ln_gamma(kk + 0.5).map_err(DensityError::from)?
        + specfun::ln_gamma(kk + mu).map_err(DensityError::from)?
        - specfun::ln_gamma(mu).map_err(DensityError::from)?
        + kk * t.ln())
    .exp();
    let expr = ProcessExpr::parse(&format!("compose(brown(), gg(1, {mu}))"))?;
    let xs = sample_process(&expr, t, n, seed)?.values;
    let (mean, se) = mean_se(xs.iter().map(|x| x.powi(2 * k as i32)));
    let mut meta = ReportMeta { t: Some(t), samples: Some(n), seeds: vec![seed], ..Default::default() };
    meta.values.insert("exact".into(), exact);
    meta.values.insert("estimate".into(), mean);
    meta.values.insert("standard_error".into(), se);
    meta.values.insert("k".into(), kk);
    Ok(VerificationReport::new(&format!("brown-gamma-moment-{}", 2 * k), Method::Moment, (mean - exact).abs() / se, 4.0, Bound::Below, meta))
}

fn mean_se(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = it.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

// ---------------------------------------------------------------------------
// Covariances

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    /// Mixed moment of the correlated Gamma pair.
    GammaRho { mu: f64, gamma: f64, rho: f64 },
    /// `E[X(t)X(s)]` for `X = B¹_{H/2} B²_{H/2}`.
    FbmProduct { hurst: f64 },
}

/// `¼(t^H + s^H − |t − s|^H)²`.
pub fn fbm_product_covariance(hurst: f64, t1: f64, t2: f64) -> f64 {
    let c = 0.5 * (t1.powf(hurst) + t2.powf(hurst) - (t1 - t2).abs().powf(hurst));
    c * c
}

pub fn covariance_check(kind: CovarianceKind, t1: f64, t2: f64, n: usize, seed: u64) -> Result<VerificationReport> {
    match kind {
        CovarianceKind::GammaRho { mu, gamma, rho } => {
            let closed = bivariate_gamma_covariance(mu, gamma, rho, t1, t2)?;
            let law = DensityLaw::BivariateGamma { mu, gamma, rho };
            law.validate()?;
            let tol = Tolerance::new(1e-300, 1e-9);
            let qerr = |e: quad::QuadError| VerifyError::Quadrature(e.to_string());
            let inner = |x: f64| -> f64 {
                quad::integrate_positive(|y| law.eval2(x, y, t1, t2).unwrap_or(f64::NAN) * x * y, law.scale(t2), tol)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            };
            let numeric = quad::integrate_positive(inner, law.scale(t1), tol).map_err(qerr)?.value;
            let mut meta = ReportMeta { t: Some(t1), ..Default::default() };
            meta.values.insert("t2".into(), t2);
            meta.values.insert("closed_form".into(), closed);
            meta.values.insert("quadrature".into(), numeric);
            let id = format!("gamma-rho-mu{mu}-rho{rho}");
            Ok(VerificationReport::new(&id, Method::Quadrature, ((numeric - closed) / closed).abs(), 1e-3, Bound::Below, meta))
        }
        CovarianceKind::FbmProduct { hurst } => {
            if !(hurst > 0.0 && hurst <= 2.0) {
                return Err(VerifyError::Invalid(format!("index {hurst} outside (0, 2]")));
            }
            let (s1, s2) = side_seeds(seed);
            let a = sample_gaussian_pair(0.5 * hurst, t1, t2, n, s1)?;
            let b = sample_gaussian_pair(0.5 * hurst, t1, t2, n, s2)?;
            let (mean, se) = mean_se(a.iter().zip(&b).map(|((x1, x2), (y1, y2))| x1 * y1 * x2 * y2));
            let exact = fbm_product_covariance(hurst, t1, t2);
            let mut meta = ReportMeta { t: Some(t1), samples: Some(n), seeds: vec![seed], ..Default::default() };
            meta.values.insert("t2".into(), t2);
            meta.values.insert("exact".into(), exact);
            meta.values.insert("estimate".into(), mean);
            meta.values.insert("standard_error".into(), se);
            let id = format!("fbm-product-h{hurst}");
            Ok(VerificationReport::new(&id, Method::Moment, (mean - exact).abs() / se, 4.0, Bound::Below, meta))
        }
    }
}

// ---------------------------------------------------------------------------
// Runner

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Mellin,
    Mc,
    Pde,
    Cov,
    All,
}

impl std::str::FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mellin" => Suite::Mellin,
            "mc" => Suite::Mc,
            "pde" => Suite::Pde,
            "cov" => Suite::Cov,
            "all" => Suite::All,
            _ => return Err(VerifyError::Invalid(format!("unknown suite `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub suite: Suite,
    pub case: Option<String>,
    pub seeds: Vec<u64>,
    pub samples: usize,
    pub alpha: f64,
    pub covariance_samples: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            suite: Suite::All,
            case: None,
            seeds: (1..=10).collect(),
            samples: DEFAULT_SAMPLES,
            alpha: DEFAULT_ALPHA,
            covariance_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub reports: Vec<VerificationReport>,
    pub summary: Summary,
}

fn covariance_jobs() -> Vec<(CovarianceKind, f64, f64)> {
    let mut v = Vec::new();
    for mu in [1.0, 2.0] {
        for rho in [0.2, 0.6] {
            v.push((CovarianceKind::GammaRho { mu, gamma: 1.0, rho }, 1.0, 1.0));
        }
    }
    v.push((CovarianceKind::FbmProduct { hurst: 0.8 }, 1.0, 2.0));
    v.push((CovarianceKind::FbmProduct { hurst: 2.0 }, 0.7, 1.6));
    v
}

/// Run a suite. Reports come back in registry order whatever the scheduling.
pub fn run(opts: &RunOptions) -> Result<SuiteReport> {
    if opts.seeds.is_empty() || opts.samples == 0 || !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(VerifyError::Invalid("seeds, samples and alpha must be nonempty and positive".into()));
    }
    let wants = |s: Suite| opts.suite == Suite::All || opts.suite == s;
    let selected = |id: &str| opts.case.as_deref().is_none_or(|c| c == id);
    let cases: Vec<IdentityCase> = registry().into_iter().filter(|c| selected(&c.id)).collect();
    let mut reports = Vec::new();
    if wants(Suite::Mellin) {
        let r: Vec<_> = cases.par_iter().filter(|c| c.mellin_provable).map(mellin_check).collect::<Result<_>>()?;
        reports.extend(r);
    }
    if wants(Suite::Mc) {
        let jobs: Vec<(&IdentityCase, f64)> = cases.iter().flat_map(|c| c.times.iter().map(move |&t| (c, t))).collect();
        let r: Vec<_> = jobs
            .par_iter()
            .map(|(c, t)| ks_multi_seed(c, *t, opts.samples, &opts.seeds, opts.alpha))
            .collect::<Result<_>>()?;
        reports.extend(r);
    }
    if wants(Suite::Pde) {
        let pdes: Vec<PdeCase> = pde_cases().into_iter().filter(|c| selected(&c.id)).collect();
        let r: Vec<_> = pdes.par_iter().map(pde_residual).collect::<Result<_>>()?;
        reports.extend(r);
        let seed = opts.seeds[0];
        for k in [1, 2] {
            let r = even_moment_check(1.5, 1.0, k, opts.samples, seed)?;
            if selected(&r.case_id) {
                reports.push(r);
            }
        }
    }
    if wants(Suite::Cov) {
        let seed = opts.seeds[0];
        let r: Vec<_> = covariance_jobs()
            .par_iter()
            .map(|(k, t1, t2)| covariance_check(*k, *t1, *t2, opts.covariance_samples, seed))
            .collect::<Result<_>>()?;
        reports.extend(r.into_iter().filter(|r| selected(&r.case_id)));
    }
    if opts.case.is_some() && reports.is_empty() {
        return Err(VerifyError::UnknownCase(opts.case.clone().unwrap_or_default()));
    }
    let summary = Summary::of(&reports);
    Ok(SuiteReport { reports, summary })
}
