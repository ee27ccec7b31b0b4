//! One function per verb. Result files are pure functions of the inputs and
//! seeds; wall-clock times go to `.timing.tsv` sidecars or standard error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::warn;
use mcem_dsp::inference::BankSource;
use mcem_dsp::oracle::{brute_force_prev, enumerate_joint_table, recruitment_conditional_mu};
use mcem_dsp::genetics::{ds_denominator, joint_ds_prob, DS_CONFIGURATIONS};
use mcem_dsp::simulator::{calibrate_delta, mating_type_probs, replicate_seed, simulate_dataset};
use mcem_dsp::{Dataset, DiseaseModel, EmConfig, Effect, FitResult, ModelVariant, Scenario, SimRng, SimplexPoint, Theta};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::adapter::{run_tests, Estimator, TestReport};
use crate::error::{CliError, CliResult};
use crate::io::{create, read_family_file, read_pedigree, read_scan, sidecar, snp_dataset, write_families};

const PARAMS: [&str; 6] = ["delta", "r1", "r2", "r_im", "s1", "s2"];

/// Seed for a named task, stable under reordering of tasks.
pub fn derive_seed(base: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(key.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn snp_seed(base: u64, snp_id: &str) -> u64 {
    derive_seed(base, snp_id)
}

fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path.display().to_string(), e)
}

/// Writes through `f` to `out`, or to standard output when `out` is `None`.
fn emit(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            f(&mut w).and_then(|_| w.flush()).map_err(write_err(path))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).and_then(|_| lock.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn write_timing(out: Option<&Path>, rows: &[(String, f64)]) -> CliResult<()> {
    match out {
        Some(path) => {
            let t = sidecar(path, "timing.tsv");
            let mut w = create(&t)?;
            writeln!(w, "#task\tseconds").map_err(write_err(&t))?;
            for (k, s) in rows {
                writeln!(w, "{k}\t{s:.6}").map_err(write_err(&t))?;
            }
            w.flush().map_err(write_err(&t))
        }
        None => {
            for (k, s) in rows {
                eprintln!("elapsed\t{k}\t{s:.6}");
            }
            Ok(())
        }
    }
}

pub fn neg_log10(p: f64) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else {
        -p.log10()
    }
}

pub struct SimulateArgs {
    pub model: usize,
    pub scenario: usize,
    pub n_families: usize,
    pub ds_plus: bool,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Dataset> {
    let model = DiseaseModel::by_id(args.model)?;
    let scenario = Scenario::by_id(args.scenario)?;
    if args.n_families == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let delta = calibrate_delta(&model, &scenario)?;
    let data = simulate_dataset(&model, &scenario, args.n_families, args.ds_plus, args.seed)?;
    emit(args.out.as_deref(), |w| write_families(&data, w))?;
    let mu = mating_type_probs(&scenario);
    eprintln!("delta\t{delta}");
    eprintln!(
        "mu\t{}",
        mu.as_array().iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\t")
    );
    Ok(data)
}

fn write_fit_block(w: &mut dyn Write, prefix: &str, fit: &FitResult) -> std::io::Result<()> {
    writeln!(w, "{prefix}variant\t{}", fit.variant)?;
    for (name, v) in PARAMS.iter().zip(fit.theta_hat.to_array()) {
        writeln!(w, "{prefix}theta.{name}\t{v}")?;
    }
    for (i, a) in fit.alpha_hat.as_array().iter().enumerate() {
        writeln!(w, "{prefix}alpha.{}{}\t{a}", i / 3, i % 3)?;
    }
    writeln!(w, "{prefix}iterations\t{}", fit.n_iter)?;
    writeln!(w, "{prefix}converged\t{}", fit.converged)?;
    for warning in &fit.warnings {
        writeln!(w, "{prefix}warning\t{warning}")?;
    }
    Ok(())
}

fn write_trace(w: &mut dyn Write, fit: &FitResult) -> std::io::Result<()> {
    write!(w, "#iteration")?;
    for name in PARAMS {
        write!(w, "\t{name}")?;
    }
    for i in 0..9 {
        write!(w, "\talpha{}{}", i / 3, i % 3)?;
    }
    writeln!(w, "\tq_value\tacceptance_rate\tess")?;
    for (k, rec) in fit.trace.iter().enumerate() {
        write!(w, "{}", k + 1)?;
        for v in rec.theta.to_array() {
            write!(w, "\t{v}")?;
        }
        for a in rec.alpha.as_array() {
            write!(w, "\t{a}")?;
        }
        let ess = rec.ess.map_or_else(|| "NA".to_string(), |e| e.to_string());
        writeln!(w, "\t{}\t{}\t{ess}", rec.q_value, rec.acceptance_rate)?;
    }
    Ok(())
}

pub struct FitArgs {
    pub input: PathBuf,
    pub variant: ModelVariant,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn fit(args: &FitArgs, estimator: &dyn Estimator) -> CliResult<FitResult> {
    let data = read_family_file(&args.input)?;
    let start = Instant::now();
    let result = estimator.fit(&data, args.variant, args.seed)?;
    let seconds = start.elapsed().as_secs_f64();
    emit(args.out.as_deref(), |w| {
        writeln!(w, "engine\t{}", estimator.name())?;
        writeln!(w, "seed\t{}", args.seed)?;
        writeln!(w, "n_families\t{}", data.len())?;
        writeln!(w, "ds_only\t{}", data.is_ds_only())?;
        write_fit_block(w, "", &result)
    })?;
    if let Some(out) = &args.out {
        let path = sidecar(out, "trace.tsv");
        let mut w = create(&path)?;
        write_trace(&mut w, &result).and_then(|_| w.flush()).map_err(write_err(&path))?;
    }
    write_timing(args.out.as_deref(), &[(format!("fit.{}", args.variant), seconds)])?;
    Ok(result)
}

pub fn write_test_report(w: &mut dyn Write, report: &TestReport, data: &Dataset) -> std::io::Result<()> {
    writeln!(w, "n_families\t{}", data.len())?;
    writeln!(w, "ds_only\t{}", data.is_ds_only())?;
    for (label, t) in ["T1", "T2", "T3"].iter().zip(&report.tests) {
        writeln!(w, "{label}.effect\t{}", t.effect)?;
        writeln!(w, "{label}.statistic\t{}", t.statistic)?;
        writeln!(w, "{label}.df\t{}", t.df)?;
        writeln!(w, "{label}.p_value\t{}", t.p_value)?;
        writeln!(w, "{label}.neg_log10_p\t{}", neg_log10(t.p_value))?;
        for warning in &t.warnings {
            writeln!(w, "{label}.warning\t{warning}")?;
        }
    }
    for fit in &report.fits {
        write_fit_block(w, &format!("{}.", fit.variant), fit)?;
    }
    Ok(())
}

pub struct TestArgs {
    pub input: PathBuf,
    pub seed: u64,
    pub alpha: f64,
    pub out: Option<PathBuf>,
}

pub fn test(args: &TestArgs, estimator: &dyn Estimator) -> CliResult<TestReport> {
    check_level(args.alpha)?;
    let data = read_family_file(&args.input)?;
    let report = run_tests(estimator, &data, args.seed)?;
    emit(args.out.as_deref(), |w| {
        writeln!(w, "engine\t{}", estimator.name())?;
        writeln!(w, "seed\t{}", args.seed)?;
        writeln!(w, "alpha\t{}", args.alpha)?;
        let bank = match estimator.bank_source() {
            BankSource::SharedFull => "shared",
            BankSource::OwnPosterior => "own",
        };
        writeln!(w, "lrt_bank\t{bank}")?;
        write_test_report(w, &report, &data)?;
        for t in &report.tests {
            writeln!(w, "{}.reject\t{}", t.effect, t.p_value < args.alpha)?;
        }
        Ok(())
    })?;
    write_timing(args.out.as_deref(), &[("test".to_string(), report.seconds)])?;
    Ok(report)
}

fn check_level(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

pub struct ScanArgs {
    pub scan: PathBuf,
    pub pedigree: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub alpha: f64,
    pub min_coverage: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub snp_id: String,
    pub n_families: usize,
    /// Association, imprinting, maternal p-values, or the failure message.
    pub outcome: Result<[f64; 3], String>,
    pub seconds: f64,
}

pub fn scan(args: &ScanArgs, estimator: &dyn Estimator) -> CliResult<Vec<ScanRecord>> {
    check_level(args.alpha)?;
    if !(0.0..=1.0).contains(&args.min_coverage) {
        return Err(CliError::Usage("--min-coverage must lie in [0, 1]".into()));
    }
    let scan_name = args.scan.display().to_string();
    let ped_name = args.pedigree.display().to_string();
    let pedigree = read_pedigree(
        std::fs::File::open(&args.pedigree).map_err(|e| CliError::io(&ped_name, e))?,
        &ped_name,
    )?;
    let snps = read_scan(
        std::fs::File::open(&args.scan).map_err(|e| CliError::io(&scan_name, e))?,
        &scan_name,
    )?;
    let records: Vec<ScanRecord> = pool(args.jobs)?.install(|| {
        snps.par_iter()
            .map(|(snp, rows)| {
                let start = Instant::now();
                let outcome = snp_dataset(rows, &pedigree, &scan_name, args.min_coverage)
                    .and_then(|data| Ok(run_tests(estimator, &data, snp_seed(args.seed, snp))?))
                    .map(|r| [0, 1, 2].map(|i| r.tests[i].p_value))
                    .map_err(|e| e.to_string());
                if let Err(e) = &outcome {
                    warn!("snp {snp}: {e}");
                }
                ScanRecord {
                    snp_id: snp.clone(),
                    n_families: rows.len(),
                    outcome,
                    seconds: start.elapsed().as_secs_f64(),
                }
            })
            .collect()
    });
    let threshold = args.alpha / records.len().max(1) as f64;
    emit(Some(&args.out), |w| {
        write!(w, "#snp_id\tn_families")?;
        for e in Effect::ALL {
            write!(w, "\t{e}_neg_log10_p")?;
        }
        for e in Effect::ALL {
            write!(w, "\t{e}_bonferroni")?;
        }
        writeln!(w, "\tstatus")?;
        for r in &records {
            write!(w, "{}\t{}", r.snp_id, r.n_families)?;
            match &r.outcome {
                Ok(p) => {
                    for v in p {
                        write!(w, "\t{}", neg_log10(*v))?;
                    }
                    for v in p {
                        write!(w, "\t{}", (*v < threshold) as u8)?;
                    }
                    writeln!(w, "\tok")?;
                }
                Err(e) => writeln!(w, "\tNA\tNA\tNA\tNA\tNA\tNA\terror: {}", e.replace(['\t', '\n'], " "))?,
            }
        }
        Ok(())
    })?;
    let failed = records.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} SNPs failed", records.len());
    }
    write_timing(
        Some(&args.out),
        &records.iter().map(|r| (r.snp_id.clone(), r.seconds)).collect::<Vec<_>>(),
    )?;
    Ok(records)
}

pub struct PowerArgs {
    pub models: Vec<usize>,
    pub scenarios: Vec<usize>,
    pub n_families: usize,
    pub ds_plus: bool,
    pub replicates: usize,
    pub base_seed: u64,
    pub alpha: f64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateFit {
    pub theta_hat: Theta,
    pub statistics: [f64; 3],
    pub p_values: [f64; 3],
    pub converged: [bool; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Replicate {
    pub model: usize,
    pub scenario: usize,
    pub index: usize,
    pub data_seed: u64,
    pub outcome: Result<ReplicateFit, String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerCell {
    pub model: usize,
    pub scenario: usize,
    pub true_theta: Theta,
    pub replicates: Vec<Replicate>,
}

impl PowerCell {
    pub fn successes(&self) -> impl Iterator<Item = &ReplicateFit> {
        self.replicates.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    /// Rejection rate per effect among successful replicates.
    pub fn rejection_rates(&self, alpha: f64) -> [f64; 3] {
        let n = self.successes().count().max(1) as f64;
        [0, 1, 2].map(|i| self.successes().filter(|r| r.p_values[i] < alpha).count() as f64 / n)
    }

    /// `(θ̂ − θ) / θ` per parameter.
    pub fn relative_bias(&self) -> [Vec<f64>; 6] {
        let truth = self.true_theta.to_array();
        std::array::from_fn(|k| self.successes().map(|r| (r.theta_hat.to_array()[k] - truth[k]) / truth[k]).collect())
    }

    pub fn mean_seconds(&self) -> f64 {
        self.replicates.iter().map(|r| r.seconds).sum::<f64>() / self.replicates.len().max(1) as f64
    }
}

/// Linear-interpolation quantile of unsorted data; NaN when empty.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

fn data_type(ds_plus: bool) -> &'static str {
    if ds_plus {
        "DS+1"
    } else {
        "DS"
    }
}

/// Seed of the replicate dataset; the fits use [`derive_seed`]`(data_seed, "fit")`.
pub fn power_data_seed(base: u64, model: usize, scenario: usize, ds_plus: bool, index: usize) -> u64 {
    let cell = derive_seed(base, &format!("power/{model}/{scenario}/{}", data_type(ds_plus)));
    replicate_seed(cell, index as u64)
}

pub fn run_replicate(
    estimator: &dyn Estimator,
    model: usize,
    scenario: usize,
    n_families: usize,
    ds_plus: bool,
    data_seed: u64,
) -> Result<ReplicateFit, String> {
    let m = DiseaseModel::by_id(model).map_err(|e| e.to_string())?;
    let s = Scenario::by_id(scenario).map_err(|e| e.to_string())?;
    let data = simulate_dataset(&m, &s, n_families, ds_plus, data_seed).map_err(|e| e.to_string())?;
    let report = run_tests(estimator, &data, derive_seed(data_seed, "fit")).map_err(|e| e.to_string())?;
    Ok(ReplicateFit {
        theta_hat: report.full().theta_hat,
        statistics: [0, 1, 2].map(|i| report.tests[i].statistic),
        p_values: [0, 1, 2].map(|i| report.tests[i].p_value),
        converged: [0, 1, 2, 3].map(|i| report.fits[i].converged),
    })
}

pub fn power(args: &PowerArgs, estimator: &dyn Estimator) -> CliResult<Vec<PowerCell>> {
    check_level(args.alpha)?;
    if args.replicates == 0 || args.n_families == 0 {
        return Err(CliError::Usage("--replicates and --n must be at least 1".into()));
    }
    let mut cells = BTreeMap::new();
    for &model in &args.models {
        for &scenario in &args.scenarios {
            let m = DiseaseModel::by_id(model)?;
            let s = Scenario::by_id(scenario)?;
            cells.insert((model, scenario), m.theta(calibrate_delta(&m, &s)?)?);
        }
    }
    let tasks: Vec<(usize, usize, usize)> = cells
        .keys()
        .flat_map(|&(m, s)| (0..args.replicates).map(move |i| (m, s, i)))
        .collect();
    let replicates: Vec<Replicate> = pool(args.jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(model, scenario, index)| {
                let data_seed = power_data_seed(args.base_seed, model, scenario, args.ds_plus, index);
                let start = Instant::now();
                let outcome = run_replicate(estimator, model, scenario, args.n_families, args.ds_plus, data_seed);
                if let Err(e) = &outcome {
                    warn!("model {model} scenario {scenario} replicate {index}: {e}");
                }
                Replicate {
                    model,
                    scenario,
                    index,
                    data_seed,
                    outcome,
                    seconds: start.elapsed().as_secs_f64(),
                }
            })
            .collect()
    });
    let mut out: Vec<PowerCell> = cells
        .iter()
        .map(|(&(model, scenario), &true_theta)| PowerCell {
            model,
            scenario,
            true_theta,
            replicates: Vec::new(),
        })
        .collect();
    for r in replicates {
        let cell = out
            .iter_mut()
            .find(|c| c.model == r.model && c.scenario == r.scenario)
            .expect("every task belongs to a cell");
        cell.replicates.push(r);
    }
    if let Some(path) = &args.out {
        write_power(path, args, estimator.name(), &out)?;
    }
    let failed: usize = out.iter().map(|c| c.replicates.len() - c.successes().count()).sum();
    if failed > 0 {
        eprintln!("{failed} of {} replicates failed", tasks.len());
    }
    Ok(out)
}

fn write_power(path: &Path, args: &PowerArgs, engine: &str, cells: &[PowerCell]) -> CliResult<()> {
    let dt = data_type(args.ds_plus);
    emit(Some(path), |w| {
        write!(w, "#model\tscenario\tdata_type\tengine\tn_families\treplicates\tfailed")?;
        for e in Effect::ALL {
            write!(w, "\treject_{e}")?;
        }
        for p in PARAMS {
            write!(w, "\t{p}_bias_q1\t{p}_bias_median\t{p}_bias_q3")?;
        }
        writeln!(w)?;
        for c in cells {
            let ok = c.successes().count();
            write!(
                w,
                "{}\t{}\t{dt}\t{engine}\t{}\t{}\t{}",
                c.model,
                c.scenario,
                args.n_families,
                c.replicates.len(),
                c.replicates.len() - ok
            )?;
            for r in c.rejection_rates(args.alpha) {
                write!(w, "\t{r}")?;
            }
            for b in c.relative_bias() {
                write!(w, "\t{}\t{}\t{}", quantile(&b, 0.25), quantile(&b, 0.5), quantile(&b, 0.75))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    let raw = sidecar(path, "replicates.tsv");
    emit(Some(&raw), |w| {
        write!(w, "#model\tscenario\tdata_type\treplicate\tdata_seed\tstatus")?;
        for e in Effect::ALL {
            write!(w, "\t{e}_statistic\t{e}_p_value")?;
        }
        for p in PARAMS {
            write!(w, "\t{p}_hat")?;
        }
        writeln!(w, "\tconverged")?;
        for c in cells {
            for r in &c.replicates {
                write!(w, "{}\t{}\t{dt}\t{}\t{}", r.model, r.scenario, r.index, r.data_seed)?;
                match &r.outcome {
                    Ok(f) => {
                        write!(w, "\tok")?;
                        for i in 0..3 {
                            write!(w, "\t{}\t{}", f.statistics[i], f.p_values[i])?;
                        }
                        for v in f.theta_hat.to_array() {
                            write!(w, "\t{v}")?;
                        }
                        let conv = f.converged.iter().map(|&b| (b as u8).to_string()).collect::<Vec<_>>();
                        writeln!(w, "\t{}", conv.join(";"))?;
                    }
                    Err(e) => {
                        write!(w, "\terror: {}", e.replace(['\t', '\n'], " "))?;
                        writeln!(w, "{}", "\tNA".repeat(13))?;
                    }
                }
            }
        }
        Ok(())
    })?;
    let timing: Vec<(String, f64)> = cells
        .iter()
        .map(|c| (format!("model{}_scenario{}_{dt}_mean", c.model, c.scenario), c.mean_seconds()))
        .collect();
    write_timing(Some(path), &timing)
}

/// Outcome of one `verify` check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
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
    SimplexPoint::new(mu).expect("normalized draw")
}

/// Model code against the brute-force references.
pub fn verify(draws: usize, seed: u64) -> Vec<Check> {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_denominator = 0.0f64;
    let mut cells_ok = true;
    for _ in 0..draws {
        let theta = random_theta(&mut rng);
        let mu = random_mu(&mut rng);
        let table = enumerate_joint_table(&theta, &mu);
        cells_ok &= table.entries.len() == DS_CONFIGURATIONS.len();
        for c in DS_CONFIGURATIONS {
            let [m, f, c1, c2] = [c.m, c.f, c.c1, c.c2].map(|g| g.count());
            let p = joint_ds_prob(&theta, &mu, c.m, c.f, c.c1, c.c2).unwrap_or(f64::NAN);
            worst = worst.max((p - table.get(m, f, c1, c2)).abs());
        }
        let d = ds_denominator(&theta, &mu).unwrap_or(f64::NAN);
        worst_denominator = worst_denominator.max((d - table.total).abs());
    }
    let mut checks = vec![
        Check {
            name: "joint_table".into(),
            passed: worst <= 1e-12 && cells_ok,
            detail: format!("{draws} draws, max abs error {worst:e}, 29 cells each: {cells_ok}"),
        },
        Check {
            name: "denominator".into(),
            passed: worst_denominator <= 1e-12,
            detail: format!("max abs error {worst_denominator:e}"),
        },
    ];
    let mut worst_prev = 0.0f64;
    let mut worst_recruit = 0.0f64;
    for model in 1..=8 {
        for scenario in 1..=8 {
            let m = DiseaseModel::by_id(model).expect("known model");
            let s = Scenario::by_id(scenario).expect("known scenario");
            let mu = mating_type_probs(&s);
            match calibrate_delta(&m, &s).and_then(|d| m.theta(d)) {
                Ok(theta) => {
                    worst_prev = worst_prev.max((brute_force_prev(&theta, &mu) - s.prev).abs());
                    let r = recruitment_conditional_mu(&theta, &mu);
                    worst_recruit = worst_recruit.max((r.as_array().iter().sum::<f64>() - 1.0).abs());
                }
                Err(_) => worst_prev = f64::INFINITY,
            }
        }
    }
    checks.push(Check {
        name: "calibration".into(),
        passed: worst_prev <= 1e-12,
        detail: format!("64 settings, max prevalence error {worst_prev:e}"),
    });
    checks.push(Check {
        name: "recruitment".into(),
        passed: worst_recruit <= 1e-12,
        detail: format!("max simplex defect {worst_recruit:e}"),
    });
    checks
}

pub fn em_config(mc_samples: usize, max_iter: usize, rel_tol: f64, is_switch_iter: usize, burnin: usize) -> CliResult<EmConfig> {
    let cfg = EmConfig {
        mc_samples,
        max_iter,
        min_iter: EmConfig::default().min_iter.min(max_iter),
        rel_tol,
        is_switch_iter,
        n_burnin: burnin,
        ..EmConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn parse_variant(s: &str) -> CliResult<ModelVariant> {
    ModelVariant::ALL
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| CliError::Usage(format!("unknown variant {s:?}")))
}
