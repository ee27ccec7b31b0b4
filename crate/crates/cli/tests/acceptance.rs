//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Criteria 6 to 9 simulate and fit hundreds of datasets; on one core the
//! whole report takes roughly 45 minutes.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use mcem_dsp::dirichlet::{conditional_pair_log_density, sample_dirichlet, sample_pair_given_rest, CoordPair};
use mcem_dsp::genetics::{joint_ds_prob, log_likelihood_given_z, DS_CONFIGURATIONS};
use mcem_dsp::inference::{chi2_sf, BankSource};
use mcem_dsp::mcem::{fit, fit_importance, init_psi};
use mcem_dsp::oracle::enumerate_joint_table;
use mcem_dsp::sampler::{run_chain, run_chain_diagnostics, ChainConfig};
use mcem_dsp::simulator::{calibrate_delta, simulate_dataset};
use mcem_dsp::{
    Dataset, DirichletParams, DiseaseModel, EmConfig, ModelVariant, Scenario, SimRng, SimplexPoint, Theta,
};
use mcem_dsp_cli::adapter::{Engine, McemEstimator};
use mcem_dsp_cli::commands::{derive_seed, power, PowerArgs, PowerCell};
use rand::{Rng, SeedableRng};

const MC_SAMPLES: usize = 2000;
const BASE_SEED: u64 = 20240601;

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, passed: bool, seconds: f64, detail: String) {
        println!(
            "{} criterion {id:>2} {name} ({seconds:.1} s): {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        if !passed {
            self.failed.push(id);
        }
    }
}

fn random_theta(rng: &mut SimRng) -> Theta {
    loop {
        let delta = rng.random_range(0.001..0.1);
        let rr: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.3..3.0));
        if let Ok(t) = Theta::new(delta, rr[0], rr[1], rr[2], rr[3], rr[4]) {
            return t;
        }
    }
}

fn random_mu(rng: &mut SimRng) -> SimplexPoint {
    let raw: [f64; 9] = std::array::from_fn(|_| rng.random_range(0.01..1.0));
    let s: f64 = raw.iter().sum();
    let mut mu = raw.map(|v| v / s);
    mu[0] += 1.0 - mu.iter().sum::<f64>();
    SimplexPoint::new(mu).unwrap()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs.chunks(size).take(batches).map(mean).collect();
    let m = mean(&means);
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (var / means.len() as f64).sqrt()
}

fn criterion_1(r: &mut Report) {
    let start = Instant::now();
    let mut rng = SimRng::seed_from_u64(BASE_SEED + 1);
    let mut worst = 0.0f64;
    let mut cells = true;
    for _ in 0..1000 {
        let theta = random_theta(&mut rng);
        let mu = random_mu(&mut rng);
        let table = enumerate_joint_table(&theta, &mu);
        cells &= table.entries.len() == 29;
        for c in DS_CONFIGURATIONS {
            let p = joint_ds_prob(&theta, &mu, c.m, c.f, c.c1, c.c2).unwrap();
            worst = worst.max((p - table.get(c.m.count(), c.f.count(), c.c1.count(), c.c2.count())).abs());
        }
    }
    let t = start.elapsed().as_secs_f64();
    r.line(
        1,
        "joint-table oracle",
        worst <= 1e-12 && cells && t < 1.0,
        t,
        format!("max abs error {worst:.3e} over 1000 draws, 29 nonzero cells each: {cells}"),
    );
}

/// Rows as printed, keyed by `(m, f, c1, c2)`; rows 24 to 27 keep the
/// formula printed next to each genotype label.
fn printed_row(key: (u8, u8, u8, u8), t: &Theta, mu: &SimplexPoint) -> f64 {
    let (d, r1, r2, ri, s1, s2) = (t.delta(), t.r1(), t.r2(), t.r_im(), t.s1(), t.s2());
    let u = |m: usize, f: usize| mu.as_array()[3 * m + f];
    let q = 0.25;
    let x = 1.0 / 16.0;
    match key {
        (0, 0, 0, 0) => u(0, 0) * d * (1.0 - d),
        (0, 1, 0, 0) => u(0, 1) * q * d * (1.0 - d),
        (0, 1, 1, 0) => u(0, 1) * q * d * r1 * (1.0 - d),
        (0, 1, 0, 1) => u(0, 1) * q * d * (1.0 - d * r1),
        (0, 1, 1, 1) => u(0, 1) * q * d * r1 * (1.0 - d * r1),
        (0, 2, 1, 1) => u(0, 2) * d * r1 * (1.0 - d * r1),
        (1, 0, 0, 0) => u(1, 0) * q * d * s1 * (1.0 - d * s1),
        (1, 0, 1, 0) => u(1, 0) * q * d * r1 * s1 * ri * (1.0 - d * s1 * ri),
        (1, 0, 0, 1) => u(1, 0) * q * d * s1 * ri * (1.0 - d * r1 * s1 * ri),
        (1, 0, 1, 1) => u(1, 0) * q * d * r1 * s1 * ri * (1.0 - d * r1 * s1 * ri),
        (1, 1, 0, 0) => u(1, 1) * x * d * s1 * (1.0 - d * s1),
        (1, 1, 1, 0) => u(1, 1) * x * d * r1 * s1 * (1.0 - d * s1) * (1.0 + ri),
        (1, 1, 0, 1) => u(1, 1) * x * d * s1 * (2.0 - d * r1 * s1 * (1.0 + ri)),
        (1, 1, 1, 1) => u(1, 1) * x * d * r1 * s1 * (1.0 - d * s1) * (1.0 + ri) * (2.0 - d * r1 * s1 * (1.0 + ri)),
        (1, 1, 2, 0) => u(1, 1) * x * d * r2 * s1 * (1.0 - d * s1),
        (1, 1, 0, 2) => u(1, 1) * x * d * s1 * (1.0 - d * r2 * s1),
        (1, 1, 2, 2) => u(1, 1) * x * d * r2 * s1 * (1.0 - d * r2 * s1),
        (1, 1, 1, 2) => u(1, 1) * x * d * r1 * s1 * (1.0 + ri) * (1.0 - d * r2 * s1),
        (1, 1, 2, 1) => u(1, 1) * x * d * r2 * s1 * (2.0 - d * r1 * s1 * (1.0 + ri)),
        (1, 2, 1, 1) => u(1, 2) * q * d * r1 * s1 * (1.0 - d * r1 * s1),
        (1, 2, 1, 2) => u(1, 2) * q * d * r1 * s1 * (1.0 - d * r2 * s1),
        (1, 2, 2, 1) => u(1, 2) * q * d * r2 * s1 * (1.0 - d * r1 * s1),
        (1, 2, 2, 2) => u(1, 2) * q * d * r2 * s1 * (1.0 - d * r2 * s1),
        (2, 0, 1, 1) => u(1, 2) * q * d * r2 * s1 * (1.0 - d * r2 * s2),
        (2, 1, 1, 1) => u(2, 0) * d * r1 * s2 * ri * (1.0 - d * r1 * s2 * ri),
        (2, 1, 2, 1) => u(2, 1) * q * d * r1 * s2 * ri * (1.0 - d * r1 * s2 * ri),
        (2, 1, 1, 2) => u(2, 1) * q * d * r2 * s2 * (1.0 - d * r1 * s2 * ri),
        (2, 1, 2, 2) => u(2, 1) * q * d * r2 * s2 * (1.0 - d * r2 * s2),
        (2, 2, 2, 2) => u(2, 2) * d * r2 * s2 * (1.0 - d * r2 * s2),
        _ => f64::NAN,
    }
}

/// Worked values for the rows whose printed formula is not the probability.
fn worked_row(key: (u8, u8, u8, u8), t: &Theta, mu: &SimplexPoint) -> f64 {
    let (d, r1, r2, ri, s1, s2) = (t.delta(), t.r1(), t.r2(), t.r_im(), t.s1(), t.s2());
    let u = |m: usize, f: usize| mu.as_array()[3 * m + f];
    let a = d * r1 * s1 * (1.0 + ri);
    let b = d * r1 * s2 * ri;
    match key {
        (1, 1, 1, 1) => u(1, 1) / 16.0 * a * (2.0 - a),
        (2, 0, 1, 1) => u(2, 0) * b * (1.0 - b),
        (2, 1, 1, 1) => u(2, 1) * 0.25 * b * (1.0 - b),
        (2, 1, 2, 1) => u(2, 1) * 0.25 * d * r2 * s2 * (1.0 - b),
        (2, 1, 1, 2) => u(2, 1) * 0.25 * b * (1.0 - d * r2 * s2),
        _ => f64::NAN,
    }
}

fn criterion_2(r: &mut Report) {
    let start = Instant::now();
    let deviating = [(1, 1, 1, 1), (2, 0, 1, 1), (2, 1, 1, 1), (2, 1, 2, 1), (2, 1, 1, 2)];
    let mut rng = SimRng::seed_from_u64(BASE_SEED + 2);
    let mut bad_printed: BTreeMap<usize, f64> = BTreeMap::new();
    let mut bad_worked: BTreeMap<usize, f64> = BTreeMap::new();
    let mut printed_differs = [false; 5];
    for _ in 0..200 {
        let theta = random_theta(&mut rng);
        let mu = random_mu(&mut rng);
        for (row, c) in DS_CONFIGURATIONS.iter().enumerate() {
            let key = (c.m.count(), c.f.count(), c.c1.count(), c.c2.count());
            let p = joint_ds_prob(&theta, &mu, c.m, c.f, c.c1, c.c2).unwrap();
            if let Some(k) = deviating.iter().position(|d| *d == key) {
                let e = (p - worked_row(key, &theta, &mu)).abs();
                if e > 1e-12 {
                    *bad_worked.entry(row + 1).or_default() = e.max(bad_worked.get(&(row + 1)).copied().unwrap_or(0.0));
                }
                printed_differs[k] |= (p - printed_row(key, &theta, &mu)).abs() > 1e-12;
            } else {
                let e = (p - printed_row(key, &theta, &mu)).abs();
                if !(e <= 1e-12) {
                    let worst = bad_printed.entry(row + 1).or_default();
                    *worst = worst.max(e);
                }
            }
        }
    }
    let t = start.elapsed().as_secs_f64();
    let list = |m: &BTreeMap<usize, f64>| {
        m.iter().map(|(k, v)| format!("row {k} ({v:.2e})")).collect::<Vec<_>>().join(", ")
    };
    let documented: Vec<String> = deviating
        .iter()
        .zip(printed_differs)
        .map(|(k, d)| format!("{k:?} {}", if d { "deviates" } else { "agrees" }))
        .collect();
    r.line(
        2,
        "printed-table audit",
        bad_printed.is_empty() && bad_worked.is_empty() && t < 1.0,
        t,
        format!(
            "mismatches against printed rows: [{}]; against worked rows: [{}]; printed vs generated for the documented rows: {}",
            list(&bad_printed),
            list(&bad_worked),
            documented.join(", ")
        ),
    );
}

fn criterion_3(r: &mut Report) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rng = SimRng::seed_from_u64(BASE_SEED + 3);
    for (model, scenario) in [(1, 5), (5, 2), (8, 8)] {
        let data = simulate_dataset(
            &DiseaseModel::by_id(model).unwrap(),
            &Scenario::by_id(scenario).unwrap(),
            100,
            false,
            BASE_SEED + model as u64,
        )
        .unwrap();
        for _ in 0..20 {
            let z = random_mu(&mut rng);
            let ll: Vec<f64> = [0.01, 0.05, 0.2]
                .iter()
                .map(|&d| log_likelihood_given_z(&Theta::null(d).unwrap(), &z, &data).unwrap())
                .collect();
            worst = worst.max((ll[0] - ll[1]).abs()).max((ll[0] - ll[2]).abs());
        }
    }
    let t = start.elapsed().as_secs_f64();
    r.line(3, "delta cancellation", worst <= 1e-10 && t < 1.0, t, format!("max spread {worst:.3e}"));
}

fn integrate_pair(alpha: &DirichletParams, pair: CoordPair, z: &SimplexPoint) -> f64 {
    let (i, j) = (pair.first(), pair.second());
    let s = z.as_array()[i] + z.as_array()[j];
    let h = 1.0 / 256.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut total = 0.0;
    for k in -1536i32..=1536 {
        let tk = k as f64 * h;
        let x = half_pi * tk.sinh();
        let u = 1.0 / (1.0 + (-2.0 * x).exp());
        let w = 1.0 / (1.0 + (2.0 * x).exp());
        if !(u > 0.0 && w > 0.0) {
            continue;
        }
        let mut pt = *z.as_array();
        pt[i] = s * u;
        pt[j] = s * w;
        let Ok(p) = SimplexPoint::new(pt) else { continue };
        let dens = conditional_pair_log_density(alpha, pair, &p).unwrap().exp();
        total += dens * s * half_pi * tk.cosh() / (2.0 * x.cosh().powi(2)) * h;
    }
    total
}

fn criterion_4(r: &mut Report) {
    let start = Instant::now();
    let mut rng = SimRng::seed_from_u64(BASE_SEED + 4);
    let schedule = ChainConfig::default_schedule();
    let mut worst_integral = 0.0f64;
    let mut worst_z = 0.0f64;
    for _ in 0..5 {
        let alpha = DirichletParams::new(std::array::from_fn(|_| rng.random_range(0.5..5.0))).unwrap();
        let z0 = sample_dirichlet(&alpha, &mut rng);
        for &pair in &schedule {
            worst_integral = worst_integral.max((integrate_pair(&alpha, pair, &z0) - 1.0).abs());
        }
        let sweeps = 100_000;
        let mut z = z0;
        let mut trace = vec![Vec::with_capacity(sweeps); 9];
        for _ in 0..sweeps {
            for &p in &schedule {
                z = sample_pair_given_rest(&alpha, p, &z, &mut rng).unwrap();
            }
            for k in 0..9 {
                trace[k].push(z.as_array()[k]);
            }
        }
        let expect = alpha.mean();
        for k in 0..9 {
            worst_z = worst_z.max((mean(&trace[k]) - expect[k]).abs() / batch_se(&trace[k], 100));
        }
    }
    let t = start.elapsed().as_secs_f64();
    r.line(
        4,
        "conditional Dirichlet",
        worst_integral <= 1e-8 && worst_z <= 3.0 && t < 30.0,
        t,
        format!("max |integral - 1| {worst_integral:.3e}; max |mean error| / SE {worst_z:.2} over 5 x 9 coordinates"),
    );
}

fn criterion_5(r: &mut Report) {
    let start = Instant::now();
    let alpha = DirichletParams::new([2.0, 1.0, 3.0, 1.5, 2.5, 1.0, 0.8, 1.2, 2.0]).unwrap();
    let mut rng = SimRng::seed_from_u64(BASE_SEED + 5);
    let prior = run_chain(&Theta::null(0.05).unwrap(), &alpha, &Dataset::empty(), &ChainConfig::with_samples(10_000), &mut rng)
        .unwrap();
    let expect = alpha.mean();
    let mut worst_z = 0.0f64;
    for k in 0..9 {
        let xs: Vec<f64> = prior.bank.samples().iter().map(|z| z.as_array()[k]).collect();
        worst_z = worst_z.max((mean(&xs) - expect[k]).abs() / batch_se(&xs, 50));
    }
    let model = DiseaseModel::by_id(5).unwrap();
    let scenario = Scenario::by_id(2).unwrap();
    let data = simulate_dataset(&model, &scenario, 100, false, BASE_SEED + 5).unwrap();
    let theta = model.theta(calibrate_delta(&model, &scenario).unwrap()).unwrap();
    let (_, alpha0) = init_psi(&data, ModelVariant::Full).unwrap();
    let diag = run_chain_diagnostics(&theta, &alpha0, &data, &ChainConfig::with_samples(10_000), BASE_SEED + 5).unwrap();
    let psrf = diag.psrf.unwrap();
    let max_psrf = psrf.iter().copied().fold(0.0, f64::max);
    let t = start.elapsed().as_secs_f64();
    r.line(
        5,
        "sampler posterior sanity",
        worst_z <= 3.0 && max_psrf < 1.1 && t < 120.0,
        t,
        format!("prior max |mean error| / SE {worst_z:.2}; max PSRF over 4 chains {max_psrf:.4}"),
    );
}

fn estimator(engine: Engine) -> McemEstimator {
    McemEstimator {
        engine,
        config: EmConfig {
            mc_samples: MC_SAMPLES,
            ..EmConfig::default()
        },
        bank: BankSource::SharedFull,
    }
}

fn grid(model: usize, scenario: usize, ds_plus: bool, replicates: usize) -> (PowerCell, f64) {
    let start = Instant::now();
    let args = PowerArgs {
        models: vec![model],
        scenarios: vec![scenario],
        n_families: 100,
        ds_plus,
        replicates,
        base_seed: BASE_SEED,
        alpha: 0.05,
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        out: None,
    };
    let mut cells = power(&args, &estimator(Engine::Mcem)).unwrap();
    (cells.remove(0), start.elapsed().as_secs_f64())
}

fn failures(c: &PowerCell) -> usize {
    c.replicates.len() - c.successes().count()
}

/// Kolmogorov–Smirnov p-value against χ²₁, asymptotic law with the
/// small-sample correction of Stephens.
fn ks_chi2_1(xs: &[f64]) -> (f64, f64) {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - chi2_sf(x, 1);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (d, p.clamp(0.0, 1.0))
}

fn criterion_6(r: &mut Report) -> Vec<f64> {
    // MAF 0.1, PREV 0.05 under Hardy–Weinberg equilibrium.
    let (cell, t) = grid(1, 5, false, 200);
    let rates = cell.rejection_rates(0.05);
    let ok = rates.iter().all(|&x| (0.02..=0.09).contains(&x));
    r.line(
        6,
        "null calibration",
        ok && failures(&cell) == 0,
        t,
        format!(
            "type I error association {:.3}, imprinting {:.3}, maternal {:.3} over {} replicates ({} failed)",
            rates[0],
            rates[1],
            rates[2],
            cell.replicates.len(),
            failures(&cell)
        ),
    );
    cell.successes().map(|f| f.statistics[1]).collect()
}

fn criterion_10(r: &mut Report, t2: &[f64]) {
    let (d, p) = ks_chi2_1(t2);
    let zeros = t2.iter().filter(|&&x| x == 0.0).count();
    r.line(
        10,
        "chi-square reference",
        p >= 0.01 && t2.len() == 200,
        0.0,
        format!("KS D {d:.4}, p {p:.4} on {} imprinting statistics ({zeros} floored at 0)", t2.len()),
    );
}

fn criterion_7(r: &mut Report) {
    let (imp_plus, t1) = grid(5, 2, true, 100);
    let (none_plus, t2) = grid(3, 2, true, 100);
    let (imp_ds, t3) = grid(5, 2, false, 100);
    let a = imp_plus.rejection_rates(0.05)[1];
    let b = none_plus.rejection_rates(0.05)[1];
    let c = imp_ds.rejection_rates(0.05)[1];
    let failed = failures(&imp_plus) + failures(&none_plus) + failures(&imp_ds);
    r.line(
        7,
        "power ordering",
        a - b >= 0.15 && a >= c && failed == 0,
        t1 + t2 + t3,
        format!(
            "imprinting rejection: model 5 DS+1 {a:.3}, model 3 DS+1 {b:.3} (gap {:.3}), model 5 DS {c:.3}; {failed} failed",
            a - b
        ),
    );
}

fn criterion_8(r: &mut Report) {
    let (cell, t) = grid(7, 4, true, 100);
    let bias = cell.relative_bias();
    let names = ["r1", "r2", "r_im", "s1", "s2"];
    let medians: Vec<f64> = (1..6).map(|k| mcem_dsp_cli::commands::quantile(&bias[k], 0.5)).collect();
    let ok = medians.iter().all(|m| m.abs() <= 0.15);
    let detail = names
        .iter()
        .zip(&medians)
        .map(|(n, m)| format!("{n} {m:+.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    r.line(
        8,
        "relative bias",
        ok && failures(&cell) == 0,
        t,
        format!("median relative bias {detail} ({} failed)", failures(&cell)),
    );
}

fn criterion_9(r: &mut Report) {
    let start = Instant::now();
    let cfg = estimator(Engine::Mcem).config;
    let (mut plain_s, mut is_s) = (0.0, 0.0);
    let mut worst = [0.0f64; 6];
    let mut within = 0;
    let mut total = 0;
    for model in [1, 5] {
        for i in 0..20 {
            let seed = derive_seed(BASE_SEED, &format!("parity/{model}/{i}"));
            let data = simulate_dataset(&DiseaseModel::by_id(model).unwrap(), &Scenario::by_id(2).unwrap(), 100, true, seed)
                .unwrap();
            let t = Instant::now();
            let a = fit(&data, &cfg, ModelVariant::Full, &mut SimRng::seed_from_u64(seed)).unwrap();
            plain_s += t.elapsed().as_secs_f64();
            let t = Instant::now();
            let b = fit_importance(&data, &cfg, ModelVariant::Full, &mut SimRng::seed_from_u64(seed)).unwrap();
            is_s += t.elapsed().as_secs_f64();
            let (x, y) = (a.theta_hat.to_array(), b.theta_hat.to_array());
            let mut all = true;
            for k in 0..6 {
                let rel = (y[k] - x[k]).abs() / x[k].abs();
                worst[k] = worst[k].max(rel);
                all &= rel <= 0.05;
            }
            within += all as usize;
            total += 1;
        }
    }
    let ratio = is_s / plain_s;
    let t = start.elapsed().as_secs_f64();
    let names = ["delta", "r1", "r2", "r_im", "s1", "s2"];
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    r.line(
        9,
        "importance-sampling parity and speed",
        within == total && ratio <= 0.6 && t < 3600.0,
        t,
        format!(
            "{within}/{total} fits within 5% on every parameter; worst relative gap {detail}; time ratio {ratio:.3} ({is_s:.1} s vs {plain_s:.1} s)"
        ),
    );
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_mcem-dsp")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_11(r: &mut Report) {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();
    let fast = ["--mc-samples", "300", "--max-iter", "6", "--burnin", "200"];
    let mut failed_verbs = Vec::new();
    let mut check = |verb: &str, runs: Vec<Vec<u8>>| {
        if runs.windows(2).any(|w| w[0] != w[1]) {
            failed_verbs.push(verb.to_string());
        }
    };

    let data = path("d.tsv");
    let runs = (0..2)
        .map(|i| {
            let out = path(&format!("sim{i}.tsv"));
            run_cli(&["simulate", "--model", "5", "--scenario", "2", "--n", "40", "--ds-plus", "--seed", "3", "--out", &out]);
            std::fs::read(&out).unwrap()
        })
        .collect::<Vec<_>>();
    std::fs::write(&data, &runs[0]).unwrap();
    check("simulate", runs);

    let runs = (0..2)
        .map(|i| {
            let out = path(&format!("fit{i}.txt"));
            let mut a = vec!["fit", &data, "--seed", "5", "--out", &out];
            a.extend(fast);
            run_cli(&a);
            [std::fs::read(&out).unwrap(), std::fs::read(format!("{out}.trace.tsv")).unwrap()].concat()
        })
        .collect();
    check("fit", runs);

    let runs = (0..2)
        .map(|_| {
            let mut a = vec!["test", &data, "--seed", "5", "--engine", "mcem-is", "--is-switch-iter", "3"];
            a.extend(fast);
            run_cli(&a)
        })
        .collect();
    check("test", runs);

    let families = std::fs::read_to_string(&data).unwrap();
    let mut scan = String::from("#snp_id\tfamily_id\tm\tf\tc1\tc2\tsib_genotypes\n");
    let mut ped = String::from("#family_id\tsib_statuses\n");
    for snp in ["rs1", "rs2", "rs3", "rs4"] {
        for line in families.lines().skip(1) {
            let f: Vec<&str> = line.split('\t').collect();
            scan.push_str(&format!("{snp}\t{}\t{}\t{}\t{}\t{}\t{}\n", f[0], f[1], f[2], f[3], f[4], f[5]));
            if snp == "rs1" {
                ped.push_str(&format!("{}\t{}\n", f[0], f[6]));
            }
        }
    }
    std::fs::write(path("scan.tsv"), scan).unwrap();
    std::fs::write(path("ped.tsv"), ped).unwrap();
    let runs = ["1", "1", "8"]
        .iter()
        .enumerate()
        .map(|(i, jobs)| {
            let out = path(&format!("scan{i}.tsv"));
            let (s, p) = (path("scan.tsv"), path("ped.tsv"));
            let mut a = vec!["scan", &s, "--pedigree", &p, "--out", &out, "--jobs", jobs];
            a.extend(fast);
            run_cli(&a);
            std::fs::read(&out).unwrap()
        })
        .collect();
    check("scan", runs);

    let runs = ["1", "1", "8"]
        .iter()
        .enumerate()
        .map(|(i, jobs)| {
            let out = path(&format!("power{i}.tsv"));
            let mut a = vec![
                "power", "--model", "1,5", "--scenario", "2", "--n", "30", "--replicates", "3", "--jobs", jobs, "--out", &out,
            ];
            a.extend(fast);
            run_cli(&a);
            [std::fs::read(&out).unwrap(), std::fs::read(format!("{out}.replicates.tsv")).unwrap()].concat()
        })
        .collect();
    check("power", runs);

    let runs = (0..2).map(|_| run_cli(&["verify", "--draws", "200"])).collect();
    check("verify", runs);

    let t = start.elapsed().as_secs_f64();
    r.line(
        11,
        "determinism",
        failed_verbs.is_empty(),
        t,
        if failed_verbs.is_empty() {
            "simulate, fit, test, scan, power, verify byte-identical at --jobs 1; scan and power identical at --jobs 8".into()
        } else {
            format!("differing verbs: {}", failed_verbs.join(", "))
        },
    );
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut r = Report { failed: Vec::new() };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    let t2 = criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r, &t2);
    criterion_11(&mut r);
    if r.failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: {} of 11 criteria fail: {:?} (see README)", r.failed.len(), r.failed);
    }
}
