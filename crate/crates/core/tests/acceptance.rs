//! End-to-end acceptance run. Prints one line per criterion and exits non-zero
//! if any criterion fails.

use gensub::densities::{catalog, DensityLaw};
use gensub::hfox::{h_eval, h_rescale, representations, RescaleRule};
use gensub::mellin::{self, Clock, GGParams};
use gensub::specfun::{bessel_k, bessel_k_integral, bessel_k_scaled, gamma, hyp2f1};
use gensub::quad::{self, Tolerance};
use gensub::verify::{self, RunOptions, Suite, SuiteReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn failing(r: &SuiteReport) -> Vec<String> {
    r.reports.iter().filter(|x| !x.passed).map(|x| format!("{}({:.3e})", x.case_id, x.statistic)).collect()
}

fn suite(s: Suite) -> Outcome {
    let opts = RunOptions { suite: s, ..RunOptions::default() };
    match verify::run(&opts) {
        Ok(r) => {
            let bad = failing(&r);
            Outcome {
                passed: bad.is_empty(),
                detail: format!("{}/{} checks passed{}", r.summary.passed, r.summary.total, if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }),
            }
        }
        Err(e) => Outcome { passed: false, detail: format!("error: {e}") },
    }
}

fn mellin_suite() -> Outcome {
    let mut out = suite(Suite::Mellin);
    let neg = verify::find_case("raw-vs-tilde-compose").and_then(|c| verify::mellin_check(&c));
    match neg {
        Ok(r) => {
            out.passed &= r.statistic > 1e-3;
            out.detail += &format!("; negative control deviation {:.3e}", r.statistic);
        }
        Err(e) => {
            out.passed = false;
            out.detail += &format!("; negative control error: {e}");
        }
    }
    out
}

fn normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for law in catalog() {
        for t in [0.5, 1.0, 4.0] {
            match law.normalization_check(t) {
                Ok(m) => worst = worst.max((m - 1.0).abs()),
                Err(e) => errors.push(format!("{} t={t}: {e}", law.id())),
            }
        }
    }
    let mut ratios = Vec::new();
    for law in [DensityLaw::Bg1 { mu: 0.8 }, DensityLaw::MultiBg1 { mu: 1.3, n: 3 }] {
        for c in law.printed_constants() {
            ratios.push(format!("{} {}: {:.6}", law.id(), c.label, c.ratio));
        }
    }
    Outcome {
        passed: errors.is_empty() && worst < 1e-6,
        detail: format!("max |mass - 1| = {worst:.2e}; printed/used ratios [{}]{}", ratios.join("; "), if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join(", ")) }),
    }
}

fn pde_suite() -> Outcome {
    suite(Suite::Pde)
}

fn hfunction() -> Outcome {
    let mut worst_rep: f64 = 0.0;
    let mut worst_rule: f64 = 0.0;
    let mut errors = Vec::new();
    let reps = representations();
    for rep in &reps {
        for t in [0.5, 1.0, 2.0] {
            for x in [0.25, 1.0, 4.0] {
                match (rep.eval(x, t, 1e-11), rep.law.eval(x, t)) {
                    (Ok(h), Ok(d)) => worst_rep = worst_rep.max(rel(h, d)),
                    (Err(e), _) => errors.push(format!("{}: {e}", rep.label)),
                    (_, Err(e)) => errors.push(format!("{}: {e}", rep.label)),
                }
            }
        }
        let p = &rep.params;
        let roundtrip = || -> Result<f64, gensub::hfox::HError> {
            let mut w: f64 = 0.0;
            let pw = h_rescale(p, 2.0, RescaleRule::Power)?;
            let sh = h_rescale(p, 0.5, RescaleRule::Shift)?;
            for x in [0.5f64, 1.0, 1.7] {
                let base = h_eval(p, x, 1e-12)?.value;
                w = w.max(rel(2.0 * h_eval(&pw, x * x, 1e-12)?.value, base));
                w = w.max(rel(x.powf(-0.5) * h_eval(&sh, x, 1e-12)?.value, base));
            }
            Ok(w)
        };
        match roundtrip() {
            Ok(w) => worst_rule = worst_rule.max(w),
            Err(e) => errors.push(format!("{} rescale: {e}", rep.label)),
        }
    }
    Outcome {
        passed: errors.is_empty() && worst_rep < 1e-6 && worst_rule < 1e-8,
        detail: format!(
            "{} representations, max rel dev vs closed form {worst_rep:.2e}; power/shift roundtrip {worst_rule:.2e}{}",
            reps.len(),
            if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join(", ")) }
        ),
    }
}

fn special_functions() -> Outcome {
    let mut k_dev: f64 = 0.0;
    for nu in [0.0, 0.3, 0.5, 1.0, 2.7] {
        for i in 0..=40 {
            let x = 0.1 * (200f64).powf(i as f64 / 40.0);
            let a = bessel_k(nu, x).unwrap();
            let b = bessel_k_integral(nu, 1.0, x * x, 1.0, 0.0).unwrap();
            k_dev = k_dev.max(rel(b, a));
        }
    }
    let mut m_dev: f64 = 0.0;
    for nu in [0.0, 0.3, 1.0, 2.7] {
        for eta in [nu + 0.5, nu + 1.0, nu + 2.5] {
            // Below 1e-60 the integrand is O(x^{η-ν-1}) with η - ν >= 1/2, far under the tolerance.
            let f = |x: f64| if x < 1e-60 { 0.0 } else { ((eta - 1.0) * x.ln() - x + bessel_k_scaled(nu, x).unwrap().ln()).exp() };
            let num = quad::integrate_positive(f, 1.0, Tolerance::relative(1e-12)).unwrap().value;
            let exact = 2f64.powf(eta) / 4.0 * gamma(0.5 * (eta + nu)).unwrap() * gamma(0.5 * (eta - nu)).unwrap();
            m_dev = m_dev.max(rel(num, exact));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(20);
    let mut e_dev: f64 = 0.0;
    for _ in 0..100 {
        let a = rng.random_range(-2.0..3.0);
        let b = rng.random_range(-2.0..3.0);
        let c = rng.random_range(0.3..4.0);
        let z = rng.random_range(-0.9..0.9);
        let lhs = hyp2f1(a, b, c, z).unwrap();
        let rhs = (1.0 - z).powf(c - a - b) * hyp2f1(c - a, c - b, c, z).unwrap();
        e_dev = e_dev.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Outcome {
        passed: k_dev < 1e-8 && m_dev < 1e-7 && e_dev < 1e-9,
        detail: format!("K dual path {k_dev:.2e}; K Mellin transform {m_dev:.2e}; Euler transformation {e_dev:.2e}"),
    }
}

fn covariance() -> Outcome {
    let mut out = suite(Suite::Cov);
    let mut dev: f64 = 0.0;
    for mu in [1.0, 2.0] {
        for rho in [0.2, 0.6] {
            let closed = gensub::densities::bivariate_gamma_covariance(mu, 1.0, rho, 1.3, 0.8).unwrap();
            dev = dev.max(rel(closed, mu * (mu + rho) * 1.3 * 0.8));
        }
    }
    out.passed &= dev < 1e-12;
    out.detail += &format!("; hypergeometric form vs mu(mu+rho)t1t2 {dev:.1e}");
    out
}

fn main() -> ExitCode {
    // Touch the Mellin API once so that the first timed criterion does not pay for page faults.
    let _ = mellin::mellin_of_gg(&GGParams { mu: 1.0, gamma: 1.0, clock: Clock::Raw });
    let criteria: [(&str, Duration, fn() -> Outcome); 7] = [
        ("Mellin suite", Duration::from_secs(5), mellin_suite),
        ("normalization", Duration::from_secs(30), normalization),
        ("Monte Carlo suite", Duration::from_secs(180), || suite(Suite::Mc)),
        ("PDE suite", Duration::from_secs(60), pde_suite),
        ("H-function suite", Duration::from_secs(60), hfunction),
        ("special functions", Duration::from_secs(10), special_functions),
        ("covariance", Duration::from_secs(120), covariance),
    ];
    let mut all = true;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let ok = out.passed && took <= *limit;
        all &= ok;
        println!(
            "criterion {}: {} {name} ({:.1} s, limit {} s): {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
