#![allow(dead_code)]

use mcem_dsp::{FamilyRecord, Genotype, Sibling, SimRng, SimplexPoint, Theta};
use rand::Rng;

pub fn g(v: u8) -> Genotype {
    Genotype::new(v).unwrap()
}

pub fn family(id: usize, m: u8, f: u8, c1: u8, c2: u8, sibs: &[(u8, bool)]) -> FamilyRecord {
    FamilyRecord {
        id: format!("f{id}"),
        m: g(m),
        f: g(f),
        c1: g(c1),
        c2: g(c2),
        siblings: sibs
            .iter()
            .map(|&(s, affected)| Sibling {
                genotype: g(s),
                affected,
            })
            .collect(),
    }
}

/// A valid θ with relative risks in (0.3, 3).
pub fn random_theta(rng: &mut SimRng) -> Theta {
    loop {
        let delta = rng.random_range(0.001..0.1);
        let rr: Vec<f64> = (0..5).map(|_| rng.random_range(0.3f64..3.0)).collect();
        if let Ok(t) = Theta::new(delta, rr[0], rr[1], rr[2], rr[3], rr[4]) {
            return t;
        }
    }
}

pub fn random_mu(rng: &mut SimRng) -> SimplexPoint {
    let raw: Vec<f64> = (0..9).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut mu = [0.0; 9];
    for (m, r) in mu.iter_mut().zip(&raw) {
        *m = r / s;
    }
    let drift = 1.0 - mu.iter().sum::<f64>();
    mu[0] += drift;
    SimplexPoint::new(mu).unwrap()
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of a mean from an autocorrelated series, by batch means.
pub fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    mean_and_se(&means).1
}
