//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use num_complex::Complex64;
use ost_core::experiments::{
    binomial_se, default_stoc_epsilon, default_tail_epsilon, gaussian_coherence_check, noise_proxy_tail_check,
    records_to_csv, run_sweep, smoothed_non_increasing, stoc_deviations, stoc_violation_estimate, ExperimentConfig,
    RECOVERY_TOL,
};
use ost_core::frames::{
    alltop_seed, average_coherence, gabor_apply, gabor_adjoint_apply, gabor_nu_bound, worst_case_coherence, Frame,
    GaborForm,
};
use ost_core::numkit::{least_squares, norm2, ComplexMatrix};
use ost_core::selection::{ost_recover, recovery_threshold, threshold_indices, top_k_indices};
use ost_core::signals::{draw_support, make_signal, measure, PhaseMode};
use rand::Rng;

type Outcome = (bool, String);

fn alltop_geometry() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut r = rng(101);
    for n in [5usize, 7, 11, 31, 127] {
        let nf = n as f64;
        let form = if n <= 31 { GaborForm::Explicit } else { GaborForm::Operator };
        let f = Frame::gabor(&alltop_seed(n).unwrap(), form).unwrap();
        let mu = worst_case_coherence(&f);
        let nu = average_coherence(&f);
        let norm = f.spectral_norm().unwrap();
        let mut tight = 0.0f64;
        if n <= 31 {
            let d = f.to_dense();
            for a in 0..n {
                for b in 0..n {
                    let s: Complex64 = (0..n * n).map(|j| d.col(j)[a] * d.col(j)[b].conj()).sum();
                    let want = if a == b { nf } else { 0.0 };
                    tight = tight.max((s - want).norm());
                }
            }
        } else {
            for _ in 0..8 {
                let v = random_vec(n, &mut r);
                let w = f.apply(&f.adjoint_apply(&v).unwrap()).unwrap();
                tight = tight.max(w.iter().zip(&v).map(|(a, b)| (a - b * nf).norm()).fold(0.0, f64::max));
            }
        }
        let good = mu <= 1.0 / nf.sqrt() + 1e-9
            && nu <= 1.0 / (nf + 1.0) + 1e-12
            && nu <= mu / nf.sqrt() + 1e-15
            && (norm - nf.sqrt()).abs() <= 1e-6
            && tight <= 1e-8;
        ok &= good;
        notes.push(format!("n={n} mu={mu:.6} nu={nu:.3e} norm_err={:.1e} tight_err={tight:.1e}", (norm - nf.sqrt()).abs()));
    }
    (ok, notes.join("; "))
}

fn nu_bound() -> Outcome {
    let mut r = rng(202);
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    for n in [8usize, 16] {
        for _ in 0..100 {
            let g = unit_vec(n, &mut r);
            let nu = gram_nu(&gram(&gabor_columns(&g)));
            let b = gabor_nu_bound(&g);
            worst_margin = worst_margin.min(b - nu);
            ok &= nu <= b;
        }
        let flat: Vec<Complex64> = (0..n)
            .map(|_| Complex64::from_polar(1.0 / (n as f64).sqrt(), r.random_range(0.0..6.3)))
            .collect();
        ok &= (gabor_nu_bound(&flat) - 1.0 / (n as f64 + 1.0)).abs() <= 1e-12;
    }
    (ok, format!("smallest bound - nu = {worst_margin:.3e}"))
}

fn gaussian_coherence_bounds() -> Outcome {
    let c = gaussian_coherence_check(512, 1024, 200, 303).unwrap();
    (
        c.passes(),
        format!(
            "mu exceed {:.4} (allowed {:.4} + 3se), nu exceed {:.4}, max mu {:.4} vs {:.4}, max nu {:.5} vs {:.5}",
            c.mu_exceed_rate, c.mu_allowed, c.nu_exceed_rate, c.max_mu, c.mu_bound, c.max_nu, c.nu_bound
        ),
    )
}

fn stoc() -> Outcome {
    let f = Frame::alltop(31).unwrap();
    let p = f.cols();
    let mu = 1.0 / 31f64.sqrt();
    let eps = default_stoc_epsilon(mu, p);
    let mut r = rng(404);
    let z: Vec<Complex64> = (0..5).map(|_| Complex64::from_polar(1.0, r.random_range(0.0..6.3))).collect();
    let trials = 2000;
    let est = stoc_violation_estimate(&f, &z, eps, trials, 404).unwrap();
    let allowed = 4.0 / p as f64;
    let lim = allowed + 3.0 * binomial_se(allowed, trials);
    let mut ok = est.stoc1_rate <= lim && est.stoc2_rate <= lim;

    // Toy frame: exhaustive rate over all 30 ordered pairs vs the estimator.
    let cols: Vec<Vec<Complex64>> = (0..6).map(|_| unit_vec(3, &mut r)).collect();
    let toy = Frame::explicit(ComplexMatrix::from_columns(3, &cols).unwrap());
    let zt = vec![c(1.0, 0.0), c(0.0, 1.0)];
    let devs: Vec<(f64, f64)> = ordered_prefixes(6, 2).iter().map(|pi| stoc_deviations(&toy, pi, &zt).unwrap()).collect();
    let mut offs: Vec<f64> = devs.iter().map(|d| d.1).collect();
    offs.sort_by(|a, b| a.total_cmp(b));
    let zn = norm2(&zt);
    let e = 0.5 * (offs[14] + offs[15]) / zn;
    let exact2 = devs.iter().filter(|d| d.1 > e * zn).count() as f64 / devs.len() as f64;
    let exact1 = devs.iter().filter(|d| d.0 > e * zn).count() as f64 / devs.len() as f64;
    let toy_trials = 20_000;
    let te = stoc_violation_estimate(&toy, &zt, e, toy_trials, 405).unwrap();
    let close = |a: f64, q: f64| (a - q).abs() <= 4.0 * binomial_se(q, toy_trials) + 1e-12;
    ok &= close(te.stoc1_rate, exact1) && close(te.stoc2_rate, exact2);
    (
        ok,
        format!(
            "rates {:.4}/{:.4} vs {lim:.4}; toy {:.3}/{:.3} vs exhaustive {exact1:.3}/{exact2:.3}",
            est.stoc1_rate, est.stoc2_rate, te.stoc1_rate, te.stoc2_rate
        ),
    )
}

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn partial_config(scale: f64, ks: &str) -> ExperimentConfig {
    config(&format!(
        r#"{{"frame": {{"alltop": {{"n": 127}}}}, "k_values": [{ks}], "mar": 1.0, "snr_db": 3.0, "sigma2": 0.01,
            "threshold": {{"t": {}, "c": "auto2t", "scale": {scale}}}, "trials": 200, "master_seed": 2010,
            "algorithm": "ost"}}"#,
        (2f64.sqrt() - 1.0) / 2f64.sqrt()
    ))
}

fn partial_selection() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for scale in [0.6, 0.8, 1.0] {
        let s = run_sweep(&partial_config(scale, "1, 2, 3")).unwrap().summary;
        let max_ffa = s.mean_f_fa.iter().cloned().fold(0.0, f64::max);
        let min_subset = s.subset_rate.iter().cloned().fold(1.0, f64::min);
        if scale >= 0.8 {
            ok &= max_ffa <= 0.005;
        }
        if scale == 1.0 {
            ok &= min_subset >= 0.99;
        }
        notes.push(format!("{scale}λ: max f_FA {max_ffa:.4}, min subset {min_subset:.3}, f_D {:?}", round(&s.mean_f_d)));
    }
    (ok, notes.join("; "))
}

fn round(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}

fn sost_exact() -> Outcome {
    let ks: Vec<String> = (1..=25).map(|k| k.to_string()).collect();
    let cfg = config(&format!(
        r#"{{"frame": {{"alltop": {{"n": 127}}}}, "k_values": [{}], "mar": 1.0, "snr_db": 10.0, "sigma2": 0.01,
            "trials": 200, "master_seed": 2010, "algorithm": "sost"}}"#,
        ks.join(", ")
    ));
    let s = run_sweep(&cfg).unwrap().summary;
    let exact: Vec<f64> = s.exact_rate[..10].to_vec();
    let rate_ok = exact.iter().all(|&e| e >= 0.9);
    let trend_ok = smoothed_non_increasing(&s.mean_f_d);
    (
        rate_ok && trend_ok,
        format!("exact k<=10 {:?} (need >= 0.9: {rate_ok}); smoothed f_D non-increasing: {trend_ok}", round(&exact)),
    )
}

fn noiseless_recovery() -> Outcome {
    let cfg = config(
        r#"{"frame": {"alltop": {"n": 127}}, "k_values": [1,2,3,4,5,6,7,8,9,10], "mar": 1.0, "sigma2": 0.0,
            "threshold": {"c": 2.0}, "trials": 200, "master_seed": 2010, "algorithm": "ost_recover"}"#,
    );
    let s = run_sweep(&cfg).unwrap().summary;
    let rate_ok = s.recovered_rate.iter().all(|&r| r >= 0.95);

    // c = 10: provably empty selection, zero estimate, residual = ||y||.
    let f = Frame::alltop(127).unwrap();
    let p = f.cols();
    let mut empty_ok = true;
    for seed in 0..20u64 {
        let beta = make_signal(p, draw_support(p, 5, seed).unwrap(), 1.0, 5.0, PhaseMode::UniformPhase { seed }).unwrap();
        let y = measure(&f, &beta, None, 0.0).unwrap().y;
        let yn = norm2(&y);
        let lambda = recovery_threshold(1.0 / 127f64.sqrt(), yn, p, 10.0).unwrap().lambda;
        match ost_recover(&f, &y, lambda) {
            Ok(rec) => {
                empty_ok &= lambda > yn
                    && rec.selected.is_empty()
                    && rec.beta_hat.iter().all(|z| z.norm() == 0.0)
                    && (rec.residual - yn).abs() <= 1e-12 * yn;
            }
            Err(_) => empty_ok = false,
        }
    }
    (
        rate_ok && empty_ok,
        format!(
            "c=2 recovery rates {:?} (need >= 0.95: {rate_ok}, tol {RECOVERY_TOL:e}); c=10 empty and residual ||y||: {empty_ok}",
            round(&s.recovered_rate)
        ),
    )
}

fn noise_tail() -> Outcome {
    let f = Frame::gaussian(256, 1024, 808, true).unwrap();
    let eps = default_tail_epsilon(1024);
    let t = noise_proxy_tail_check(&f, 1.0, eps, 100_000, 808).unwrap();
    (
        t.empirical_rate <= t.analytic_bound,
        format!("empirical {:.5} vs bound {:.5} (eps {eps:.4})", t.empirical_rate, t.analytic_bound),
    )
}

fn brute_threshold(f: &[Complex64], lambda: f64) -> Vec<usize> {
    (0..f.len()).filter(|&i| f[i].norm() > lambda).collect()
}

fn brute_top_k(f: &[Complex64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..f.len()).collect();
    idx.sort_by(|&a, &b| f[b].norm().total_cmp(&f[a].norm()).then(a.cmp(&b)));
    let mut out = idx[..k].to_vec();
    out.sort_unstable();
    out
}

fn oracle_equivalences() -> Outcome {
    let mut r = rng(909);
    let mut sel_ok = true;
    for _ in 0..1000 {
        let len = r.random_range(1..200);
        let f = random_vec(len, &mut r);
        let lambda = r.random_range(0.0..2.0);
        let k = r.random_range(0..=len);
        sel_ok &= threshold_indices(&f, lambda) == brute_threshold(&f, lambda);
        sel_ok &= top_k_indices(&f, k).unwrap() == brute_top_k(&f, k);
    }
    let mut op_err = 0.0f64;
    for n in [5usize, 7, 31] {
        let g = alltop_seed(n).unwrap();
        let cols = gabor_columns(&g);
        let dense = ComplexMatrix::from_columns(n, &cols).unwrap();
        let beta = random_vec(n * n, &mut r);
        let y = random_vec(n, &mut r);
        op_err = op_err.max(rel_err(&gabor_apply(&g, &beta).unwrap(), &dense.mul_vec(&beta).unwrap()));
        op_err = op_err.max(rel_err(&gabor_adjoint_apply(&g, &y).unwrap(), &dense.adjoint_mul_vec(&y).unwrap()));
    }
    let mut ls_err = 0.0f64;
    for _ in 0..100 {
        let cols: Vec<Vec<Complex64>> = (0..4).map(|_| random_vec(10, &mut r)).collect();
        let y = random_vec(10, &mut r);
        let w = least_squares(&ComplexMatrix::from_columns(10, &cols).unwrap(), &y).unwrap();
        ls_err = ls_err.max(max_abs_diff(&w, &normal_equations(&cols, &y)));
    }
    (
        sel_ok && op_err <= 1e-9 && ls_err <= 1e-9,
        format!("selection match {sel_ok}; operator err {op_err:.1e}; least squares err {ls_err:.1e}"),
    )
}

fn determinism() -> Outcome {
    let mut cfg = partial_config(1.0, "1, 2, 3, 4");
    cfg.trials = 100;
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| records_to_csv(&run_sweep(&cfg).unwrap().records).unwrap())
    };
    let outs = [run(1), run(1), run(8), run(8)];
    let same = outs.iter().all(|o| o == &outs[0]);
    (same, format!("{} bytes, identical across 1 and 8 threads: {same}", outs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Alltop geometry", alltop_geometry),
        ("Gabor average-coherence bound", nu_bound),
        ("Gaussian coherence bounds", gaussian_coherence_bounds),
        ("statistical orthogonality", stoc),
        ("partial selection below the threshold", partial_selection),
        ("sorted selection exact rate", sost_exact),
        ("noiseless recovery", noiseless_recovery),
        ("noise proxy tail", noise_tail),
        ("oracle equivalences", oracle_equivalences),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        failed += !ok as usize;
        println!(
            "criterion {}: {} {name} [{:.1}s] {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
