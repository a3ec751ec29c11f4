//! Bundled self-checks with fixed parameters, as run by `ost verify`.

use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use super::checks::{
    binomial_se, default_stoc_epsilon, default_tail_epsilon, gaussian_coherence_check, noise_proxy_tail_check,
    stoc_violation_estimate, submatrix_conditioning_estimate,
};
use crate::error::{Error, Result};
use crate::frames::{average_coherence, worst_case_coherence, Frame};
use crate::numkit::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Geometry,
    Stoc,
    Gaussian,
    Tails,
    Conditioning,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Geometry, Suite::Stoc, Suite::Gaussian, Suite::Tails, Suite::Conditioning];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Stoc => "stoc",
            Suite::Gaussian => "gaussian",
            Suite::Tails => "tails",
            Suite::Conditioning => "conditioning",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let checks = match suite {
        Suite::Geometry => geometry()?,
        Suite::Stoc => stoc(seed)?,
        Suite::Gaussian => gaussian(seed)?,
        Suite::Tails => tails(seed)?,
        Suite::Conditioning => conditioning(seed)?,
    };
    Ok(VerifyReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn geometry() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for n in [5usize, 7, 11, 31] {
        let f = Frame::alltop(n)?;
        let nf = n as f64;
        let mu = worst_case_coherence(&f);
        let nu = average_coherence(&f);
        let norm = f.spectral_norm()?;
        out.push(check(
            format!("alltop n={n} mu"),
            mu <= 1.0 / nf.sqrt() + 1e-9,
            format!("mu = {mu:.12}, 1/sqrt(n) = {:.12}", 1.0 / nf.sqrt()),
        ));
        out.push(check(
            format!("alltop n={n} nu"),
            nu <= 1.0 / (nf + 1.0) + 1e-12 && nu <= mu / nf.sqrt(),
            format!("nu = {nu:.3e}, 1/(n+1) = {:.3e}", 1.0 / (nf + 1.0)),
        ));
        out.push(check(
            format!("alltop n={n} tight"),
            (norm - nf.sqrt()).abs() <= 1e-6,
            format!("||X|| = {norm:.12}"),
        ));
        out.push(check(
            format!("alltop n={n} unit columns"),
            f.is_normalized(),
            "all column norms within 1e-10 of 1",
        ));
    }
    Ok(out)
}

fn stoc(seed: u64) -> Result<Vec<CheckOutcome>> {
    let f = Frame::alltop(31)?;
    let p = f.cols();
    let k = 5;
    let z = vec![Complex64::new(1.0, 0.0); k];
    let eps = default_stoc_epsilon(1.0 / 31f64.sqrt(), p);
    let trials = 2000;
    let est = stoc_violation_estimate(&f, &z, eps, trials, seed)?;
    let allowed = 4.0 / p as f64;
    let limit = allowed + 3.0 * binomial_se(allowed, trials);
    let ortho = Frame::explicit(ComplexMatrix::identity(8));
    let o = stoc_violation_estimate(&ortho, &z[..3], 0.0, 200, seed)?;
    Ok(vec![
        check(
            "alltop n=31 k=5 StOC-1",
            est.stoc1_rate <= limit,
            format!("rate {} (limit {limit:.4}), max deviation {:.4} ||z||", est.stoc1_rate, est.max_stoc1),
        ),
        check(
            "alltop n=31 k=5 StOC-2",
            est.stoc2_rate <= limit,
            format!("rate {} (limit {limit:.4}), max deviation {:.4} ||z||", est.stoc2_rate, est.max_stoc2),
        ),
        check(
            "orthonormal basis",
            o.stoc1_rate == 0.0 && o.stoc2_rate == 0.0,
            "no violations at epsilon = 0",
        ),
    ])
}

fn gaussian(seed: u64) -> Result<Vec<CheckOutcome>> {
    let g = gaussian_coherence_check(512, 1024, 200, seed)?;
    Ok(vec![
        check(
            "n=512 p=1024 worst-case coherence",
            g.mu_exceed_rate <= g.mu_allowed + 3.0 * g.mu_se,
            format!("exceedance {} over {} draws; bound {:.4}, largest mu {:.4}", g.mu_exceed_rate, g.draws, g.mu_bound, g.max_mu),
        ),
        check(
            "n=512 p=1024 average coherence",
            g.nu_exceed_rate <= g.nu_allowed + 3.0 * g.nu_se,
            format!("exceedance {} over {} draws; bound {:.5}, largest nu {:.5}", g.nu_exceed_rate, g.draws, g.nu_bound, g.max_nu),
        ),
        check(
            "sample-size hypothesis",
            !g.hypothesis_warning,
            "n >= 60 ln p",
        ),
    ])
}

fn tails(seed: u64) -> Result<Vec<CheckOutcome>> {
    let f = Frame::gaussian(256, 1024, seed, true)?;
    let eps = default_tail_epsilon(1024);
    let t = noise_proxy_tail_check(&f, 1.0, eps, 100_000, seed)?;
    let t2 = noise_proxy_tail_check(&f, 1.0, eps / 2.0, 2_000, seed)?;
    let t4 = noise_proxy_tail_check(&f, 1.0, eps, 2_000, seed)?;
    Ok(vec![
        check(
            "p=1024 tail at eps = 2 sqrt(ln p)",
            t.empirical_rate <= t.analytic_bound,
            format!(
                "{} of {} draws; bound {:.3e}; largest ratio {:.3}",
                t.exceedances, t.trials, t.analytic_bound, t.max_ratio
            ),
        ),
        check(
            "monotone in epsilon",
            t4.empirical_rate <= t2.empirical_rate,
            format!("rate {} at eps/2, {} at eps", t2.empirical_rate, t4.empirical_rate),
        ),
    ])
}

fn conditioning(seed: u64) -> Result<Vec<CheckOutcome>> {
    let ortho = Frame::explicit(ComplexMatrix::identity(8));
    let o = submatrix_conditioning_estimate(&ortho, 3, 100, seed)?;
    let f = Frame::alltop(31)?;
    let one = submatrix_conditioning_estimate(&f, 1, 100, seed)?;
    let a = submatrix_conditioning_estimate(&f, 5, 2000, seed)?;
    Ok(vec![
        check("orthonormal basis", o.exceed_fraction == 0.0, "no exceedances"),
        check("single column", one.exceed_fraction == 0.0, "Gram is [1]"),
        // At n = 31 the coherence is far too large for the statement to
        // apply, so this line is informational.
        check(
            "alltop n=31 k=5 (diagnostic)",
            true,
            format!(
                "exceedance {:.4} +/- {:.4}; sigma_min {:.3}, sigma_max {:.3}",
                a.exceed_fraction, a.se, a.min_singular_value, a.max_singular_value
            ),
        ),
    ])
}
