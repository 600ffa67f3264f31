use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::Value;

use csp_glass::cli::main_with_args;
use csp_glass::ensembles::{sample_csp, sample_spin_glass, sg_energy, CountMode, CspModel};
use csp_glass::landscape::{
    brute_force_max, chi_curve, debias, interpolate, poisson_gap, restricted_log_partition, vmax,
    AnnealAlgorithm, AnnealSchedule, ChiSettings, ConstantAlgorithm, CspAlgorithm, EnergyOracle,
    OverlapRegion,
};
use csp_glass::parisi::{
    evaluate_parisi, minimize_alg, minimize_gsed, rs_value, OptimizerSettings, OrderClass, OrderParameter,
    ParisiGrid,
};
use csp_glass::predicates::{builtin_predicate, MixturePolynomial, PredicateDistribution, PredicateFamily};
use csp_glass::rng::SeedTree;

type Outcome = (bool, String);

const FAMILIES: [PredicateFamily; 4] = [
    PredicateFamily::OneInK,
    PredicateFamily::KNae,
    PredicateFamily::KSat,
    PredicateFamily::KXor,
];

/// `(family, k, f̂(∅) as a fraction, GSED)` as tabulated.
const TABLE: [(PredicateFamily, usize, &str, f64); 16] = [
    (PredicateFamily::OneInK, 2, "1/2", 0.54),
    (PredicateFamily::OneInK, 3, "3/8", 0.54),
    (PredicateFamily::OneInK, 4, "1/4", 0.48),
    (PredicateFamily::OneInK, 5, "5/32", 0.41),
    (PredicateFamily::KNae, 2, "1/2", 0.54),
    (PredicateFamily::KNae, 3, "3/4", 0.47),
    (PredicateFamily::KNae, 4, "7/8", 0.37),
    (PredicateFamily::KNae, 5, "15/16", 0.28),
    (PredicateFamily::KSat, 2, "3/4", 0.40),
    (PredicateFamily::KSat, 3, "7/8", 0.33),
    (PredicateFamily::KSat, 4, "15/16", 0.26),
    (PredicateFamily::KSat, 5, "31/32", 0.20),
    (PredicateFamily::KXor, 2, "1/2", 0.54),
    (PredicateFamily::KXor, 3, "1/2", 0.58),
    (PredicateFamily::KXor, 4, "1/2", 0.58),
    (PredicateFamily::KXor, 5, "1/2", 0.59),
];

fn mixture(family: PredicateFamily, k: usize) -> MixturePolynomial {
    builtin_predicate(family, k).unwrap().mixture()
}

fn xor2() -> PredicateDistribution {
    PredicateDistribution::point_mass(builtin_predicate(PredicateFamily::KXor, 2).unwrap())
}

fn cli_json(args: &[String], out: &std::path::Path) -> (i32, Value) {
    let mut full = vec!["csp-glass".to_string()];
    full.extend(args.iter().cloned());
    full.extend(["--format".into(), "json".into(), "--out".into(), out.display().to_string()]);
    let code = main_with_args(full);
    let text = fs::read_to_string(out).unwrap_or_default();
    (code, serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn table_reproduction() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut worst: f64 = 0.0;
    for (i, (family, k, fraction, gsed)) in TABLE.iter().enumerate() {
        let out = dir.path().join(format!("row{i}.json"));
        let args = vec![
            "table1".to_string(),
            "--family".into(),
            family.as_str().into(),
            "--k".into(),
            k.to_string(),
        ];
        let start = Instant::now();
        let (code, doc) = cli_json(&args, &out);
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let row = &doc["rows"][0];
        let got_fraction = row["mean_term_fraction"].as_str().unwrap_or("?");
        let got = row["gsed"].as_f64().unwrap_or(f64::NAN);
        let err = (got - gsed).abs();
        worst = worst.max(err);
        if code != 0 || got_fraction != *fraction || !(err <= 0.015) || elapsed > Duration::from_secs(300) {
            failures.push(format!(
                "{family} k={k}: f̂(∅)={got_fraction} GSED={got:.4} (table {gsed}) in {elapsed:.0?}"
            ));
        }
    }
    let detail = format!(
        "16 entries, worst |GSED - table| = {worst:.4}, slowest entry {:.1}s",
        slowest.as_secs_f64()
    );
    if failures.is_empty() {
        (true, detail)
    } else {
        (false, format!("{detail}; {}", failures.join("; ")))
    }
}

fn closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (family, k, _, _) in TABLE {
        let xi = mixture(family, k);
        let eval = evaluate_parisi(&xi, &OrderParameter::zero(), &ParisiGrid::for_mixture(&xi)).unwrap();
        let err = (eval.value - rs_value(&xi)).abs();
        let expected = (2.0 * xi.derivative(1.0) / std::f64::consts::PI).sqrt();
        let err = err.max((eval.value - expected).abs());
        worst = worst.max(err);
        if !(err <= 1e-3) {
            failures.push(format!("{family} k={k}: {:.6} vs {expected:.6}", eval.value));
        }
    }
    let zeta = OrderParameter::new(vec![0.0, 0.5, 1.0], vec![0.0, 3.0], OrderClass::Monotone).unwrap();
    for c1 in [0.5, 1.0, 2.0] {
        let xi = MixturePolynomial::from_terms(&[(1, c1 * c1)], 0.0).unwrap();
        let expected = c1 * (2.0 / std::f64::consts::PI).sqrt();
        for z in [OrderParameter::zero(), zeta.clone()] {
            let v = evaluate_parisi(&xi, &z, &ParisiGrid::for_mixture(&xi)).unwrap().value;
            let err = (v - expected).abs();
            worst = worst.max(err);
            if !(err <= 1e-3) {
                failures.push(format!("pure field c₁={c1}: {v:.6} vs {expected:.6}"));
            }
        }
    }
    (
        failures.is_empty(),
        format!("worst closed-form error {worst:.2e}{}", suffix(&failures)),
    )
}

fn suffix(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; {}", failures.join("; "))
    }
}

fn alg_strictness() -> Outcome {
    let xi = mixture(PredicateFamily::KXor, 4);
    let settings = OptimizerSettings::default();
    let gsed = minimize_gsed(&xi, &settings).unwrap();
    let alg = minimize_alg(&xi, &settings).unwrap();
    let alg_upper = alg.value + alg.evaluation.grid_delta;
    let gsed_lower = gsed.value - gsed.evaluation.grid_delta;
    (
        alg_upper < gsed_lower - 0.005,
        format!(
            "ALG {:.5} (+{:.1e}) vs GSED {:.5} (-{:.1e}), gap {:.5}",
            alg.value,
            alg.evaluation.grid_delta,
            gsed.value,
            gsed.evaluation.grid_delta,
            gsed_lower - alg_upper
        ),
    )
}

fn covariance() -> Outcome {
    let n = 64;
    let draws = 10_000u64;
    let base: Vec<i8> = (0..n).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
    let flipped = |count: usize| -> Vec<i8> {
        base.iter().enumerate().map(|(i, &s)| if i < count { -s } else { s }).collect()
    };
    let partners = [(-1.0, flipped(64)), (0.0, flipped(32)), (0.5, flipped(16)), (1.0, flipped(0))];
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mixtures = [
        ("s²", MixturePolynomial::from_terms(&[(2, 1.0)], 0.0).unwrap()),
        ("s²/4+s³/4", MixturePolynomial::from_terms(&[(2, 0.25), (3, 0.25)], 0.0).unwrap()),
    ];
    for (m, (label, xi)) in mixtures.iter().enumerate() {
        let seed = SeedTree::new(4).child(m as u64);
        let samples: Vec<Vec<f64>> = (0..draws)
            .into_par_iter()
            .map(|d| {
                let g = sample_spin_glass(xi, n, seed.child(d)).unwrap();
                let mut e = vec![sg_energy(&g, &base).unwrap()];
                e.extend(partners.iter().map(|(_, s)| sg_energy(&g, s).unwrap()));
                e
            })
            .collect();
        let mean = |j: usize| samples.iter().map(|e| e[j]).sum::<f64>() / draws as f64;
        let m0 = mean(0);
        let scale = n as f64 * xi.value(1.0);
        for (j, (r, _)) in partners.iter().enumerate() {
            let mj = mean(j + 1);
            let cov = samples.iter().map(|e| (e[0] - m0) * (e[j + 1] - mj)).sum::<f64>() / (draws - 1) as f64;
            let target = n as f64 * xi.value(*r);
            let rel = (cov - target).abs() / scale;
            worst = worst.max(rel);
            if !(rel <= 0.05) {
                failures.push(format!("{label} R={r}: {cov:.3} vs {target:.3}"));
            }
        }
    }
    (
        failures.is_empty(),
        format!("worst error {:.2}% of n·ξ(1){}", 100.0 * worst, suffix(&failures)),
    )
}

fn sandwich() -> Outcome {
    let root = SeedTree::new(5);
    let mut failures = Vec::new();
    let mut checks = 0;
    for r in 0..100u64 {
        let s = root.child(r);
        let n = 4 + (r as usize % 13);
        let oracle = if r % 2 == 0 {
            let family = FAMILIES[(r / 2 % 4) as usize];
            let k = 2 + (r / 8 % 3) as usize;
            let dist = PredicateDistribution::point_mass(builtin_predicate(family, k).unwrap());
            let model = CspModel::new(dist, 3.0, n, CountMode::Poisson).unwrap();
            EnergyOracle::single(sample_csp(&model, s))
        } else {
            let xi = MixturePolynomial::from_terms(&[(1, 0.2), (2, 0.5), (3, 0.3)], 0.0).unwrap();
            EnergyOracle::single(sample_spin_glass(&xi, n, s).unwrap())
        };
        let max = brute_force_max(&oracle, None).unwrap().unwrap().density;
        for beta in [0.5, 1.0, 4.0] {
            let phi = restricted_log_partition(&oracle, beta, &OverlapRegion::full(1))
                .unwrap()
                .free_energy_density();
            checks += 1;
            let upper = max + std::f64::consts::LN_2 / beta;
            if !(max <= phi && phi <= upper + 1e-12) {
                failures.push(format!("oracle {r} (n={n}) β={beta}: {max} ≤ {phi} ≤ {upper}"));
            }
        }
    }
    (
        failures.is_empty(),
        format!("{checks} sandwich checks over 100 oracles{}", suffix(&failures)),
    )
}

fn optimal_value() -> Outcome {
    let model = CspModel::new(xor2(), 64.0, 20, CountMode::Exact).unwrap();
    let start = Instant::now();
    let r = vmax(&model, 50, SeedTree::new(6)).unwrap();
    let elapsed = start.elapsed();
    let target = 0.5 + 0.54 / 8.0;
    (
        (r.summary.mean - target).abs() <= 0.03 && elapsed <= Duration::from_secs(600),
        format!(
            "mean v = {:.4} ± {:.4} vs {target:.4} in {:.1}s",
            r.summary.mean,
            r.summary.stderr,
            elapsed.as_secs_f64()
        ),
    )
}

fn interpolation_trend() -> Outcome {
    let rows = interpolate(&xor2(), 16, 1.0, &[4.0, 16.0, 64.0], 100, SeedTree::new(7)).unwrap();
    let ok = rows
        .windows(2)
        .all(|w| w[1].delta <= w[0].delta + 2.0 * w[0].delta_stderr.hypot(w[1].delta_stderr));
    let deltas: Vec<String> = rows
        .iter()
        .map(|r| format!("Δ({})={:.4}±{:.4}", r.alpha, r.delta, r.delta_stderr))
        .collect();
    (ok, deltas.join(", "))
}

fn poisson_exact_gap() -> Outcome {
    let model = CspModel::new(xor2(), 8.0, 16, CountMode::Poisson).unwrap();
    let g = poisson_gap(&model, 1.0, 200, SeedTree::new(8)).unwrap();
    let bound = g.scale + 3.0 * g.difference.stderr;
    (
        g.difference.mean.abs() <= bound,
        format!(
            "mean difference {:.5} ± {:.5}, bound {bound:.4}",
            g.difference.mean, g.difference.stderr
        ),
    )
}

fn correlation_function() -> Outcome {
    let model = CspModel::new(xor2(), 8.0, 64, CountMode::Poisson).unwrap();
    let t = [0.0, 0.25, 0.5, 0.75, 1.0];
    let c = chi_curve(&model, &AnnealAlgorithm::default(), &t, &ChiSettings::default(), SeedTree::new(9)).unwrap();
    let last = c.chi.len() - 1;
    let exact_one = c.chi[last] == 1.0;
    let centered = c.chi[0].abs() <= 3.0 * c.stderr[0];
    let monotone = (0..last).all(|i| c.chi[i + 1] >= c.chi[i] - 3.0 * c.stderr[i].hypot(c.stderr[i + 1]));
    let below = (0..=last).all(|i| c.chi[i] <= c.t[i] + 3.0 * c.stderr[i]);
    let values: Vec<String> = c.chi.iter().zip(&c.stderr).map(|(x, s)| format!("{x:.3}±{s:.3}")).collect();
    (
        exact_one && centered && monotone && below,
        format!(
            "χ = [{}]; χ(1)=1 {exact_one}, χ(0)≈0 {centered}, monotone {monotone}, χ(t)≤t {below}",
            values.join(", ")
        ),
    )
}

fn debias_contract() -> Outcome {
    let n = 16;
    let instances = 10_000u64;
    let dist = PredicateDistribution::point_mass(builtin_predicate(PredicateFamily::KSat, 3).unwrap());
    let model = CspModel::new(dist, 4.0, n, CountMode::Poisson).unwrap();
    let annealer = AnnealAlgorithm {
        schedule: AnnealSchedule {
            sweeps: 20,
            restarts: 1,
            ..AnnealSchedule::default()
        },
    };
    let algorithms: [(&str, &dyn CspAlgorithm); 2] = [("constant", &ConstantAlgorithm), ("annealer", &annealer)];
    let root = SeedTree::new(10);
    let mut worst: f64 = 0.0;
    for (a, (_, alg)) in algorithms.iter().enumerate() {
        let sums = (0..instances)
            .into_par_iter()
            .map(|r| {
                let s = root.at(&[a as u64, r]);
                let inst = sample_csp(&model, s.child(0));
                let out = debias(*alg, &inst, s.child(1)).unwrap();
                out.iter().map(|&x| x as f64).collect::<Vec<f64>>()
            })
            .reduce(|| vec![0.0; n], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
        worst = sums.iter().map(|s| (s / instances as f64).abs()).fold(worst, f64::max);
    }
    let means_ok = worst <= 0.05;
    let (identical, differing) = determinism();
    (
        means_ok && identical,
        format!(
            "max |coordinate mean| {worst:.4} over {instances} instances; subcommands byte-identical {identical}{}",
            suffix(&differing)
        ),
    )
}

fn determinism() -> (bool, Vec<String>) {
    let runs: [&[&str]; 6] = [
        &["spectrum", "--family", "kSAT", "--k", "3"],
        &["table1", "--family", "kXOR", "--k", "3", "--atoms", "2"],
        &["interpolate", "--n", "8", "--alpha", "4,16", "--reps", "5"],
        &["vmax", "--n", "10", "--alpha", "4", "--reps", "5", "--atoms", "1"],
        &["chi", "--n", "16", "--alpha", "4", "--t", "0,0.5,1", "--reps", "6", "--sweeps", "20"],
        &["ogp", "--n", "8", "--alpha", "4", "--t", "0.5", "--bins", "8"],
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for args in runs {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let out = dir.path().join(format!("{}-{attempt}.csv", args[0]));
            let mut full: Vec<String> = vec!["csp-glass".into(), "--seed".into(), "11".into()];
            full.extend(args.iter().map(|s| s.to_string()));
            full.extend(["--out".into(), out.display().to_string()]);
            let code = main_with_args(full);
            let manifest = out.with_extension("csv.manifest.json");
            outputs.push((code, fs::read(&out).ok(), fs::read(&manifest).ok()));
        }
        let same = outputs[0] == outputs[1] && outputs[0].0 == 0 && outputs[0].1.is_some() && outputs[0].2.is_some();
        if !same {
            differing.push(args[0].to_string());
        }
    }
    (differing.is_empty(), differing)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("table reproduction", table_reproduction),
        ("closed forms", closed_forms),
        ("ALG strictness", alg_strictness),
        ("covariance", covariance),
        ("free-energy sandwich", sandwich),
        ("optimal value", optimal_value),
        ("interpolation trend", interpolation_trend),
        ("Poisson vs exact gap", poisson_exact_gap),
        ("correlation function", correlation_function),
        ("debias and determinism", debias_contract),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
