//! Discordant sib-pair data under the eight disease models and eight
//! population scenarios.

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::genetics::{
    penetrance, ChildGenotype, Dataset, FamilyRecord, Genotype, Origin, Sibling, SimplexPoint, Theta,
};
use crate::SimRng;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Scenario {
    pub maf: f64,
    pub prev: f64,
    pub hwe: bool,
    pub zeta_male: f64,
    pub zeta_female: f64,
}

impl Scenario {
    pub fn new(maf: f64, prev: f64, hwe: bool) -> Result<Self> {
        if !(maf > 0.0 && maf <= 0.5) {
            return Err(Error::Domain(format!("maf {maf} not in (0, 0.5]")));
        }
        if !(prev > 0.0 && prev < 1.0) {
            return Err(Error::Domain(format!("prevalence {prev} not in (0, 1)")));
        }
        let (zeta_male, zeta_female) = if hwe { (0.0, 0.0) } else { (0.1, 0.3) };
        Ok(Scenario {
            maf,
            prev,
            hwe,
            zeta_male,
            zeta_female,
        })
    }

    /// Scenarios 1–8: MAF ∈ {0.1, 0.3} × PREV ∈ {0.05, 0.15}, first without
    /// then with Hardy–Weinberg equilibrium.
    pub fn by_id(id: usize) -> Result<Self> {
        if !(1..=8).contains(&id) {
            return Err(Error::UnknownScenario(id));
        }
        let i = id - 1;
        let maf = if i % 2 == 0 { 0.1 } else { 0.3 };
        let prev = if (i / 2) % 2 == 0 { 0.05 } else { 0.15 };
        Scenario::new(maf, prev, i >= 4)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DiseaseModel {
    pub r1: f64,
    pub r2: f64,
    pub r_im: f64,
    pub s1: f64,
    pub s2: f64,
}

impl DiseaseModel {
    pub fn new(r1: f64, r2: f64, r_im: f64, s1: f64, s2: f64) -> Result<Self> {
        for v in [r1, r2, r_im, s1, s2] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("relative risk {v} is not positive")));
            }
        }
        Ok(DiseaseModel { r1, r2, r_im, s1, s2 })
    }

    pub fn by_id(id: usize) -> Result<Self> {
        let v = match id {
            1 => (1.0, 1.0, 1.0, 1.0, 1.0),
            2 => (2.0, 3.0, 1.0, 1.0, 1.0),
            3 => (1.0, 3.0, 1.0, 1.0, 1.0),
            4 => (1.0, 3.0, 1.0, 2.0, 2.0),
            5 => (1.0, 3.0, 3.0, 1.0, 1.0),
            6 => (3.0, 3.0, 1.0 / 3.0, 1.0, 1.0),
            7 => (1.0, 3.0, 3.0, 2.0, 2.0),
            8 => (3.0, 3.0, 1.0 / 3.0, 2.0, 2.0),
            _ => return Err(Error::UnknownModel(id)),
        };
        DiseaseModel::new(v.0, v.1, v.2, v.3, v.4)
    }

    pub fn theta(&self, delta: f64) -> Result<Theta> {
        Theta::new(delta, self.r1, self.r2, self.r_im, self.s1, self.s2)
    }

    /// `(r1, r2, r_im, s1, s2)`.
    pub fn relative_risks(&self) -> [f64; 5] {
        [self.r1, self.r2, self.r_im, self.s1, self.s2]
    }

    fn relative_risk(&self, mother: Genotype, child: ChildGenotype) -> f64 {
        let own = match (child.count().count(), child.origin()) {
            (0, _) => 1.0,
            (1, Origin::Maternal) => self.r1 * self.r_im,
            (1, _) => self.r1,
            _ => self.r2,
        };
        own * [1.0, self.s1, self.s2][mother.index()]
    }
}

/// Genotype law `(P(0), P(1), P(2))` with inbreeding coefficient `zeta`.
pub fn genotype_freqs(p: f64, zeta: f64) -> [f64; 3] {
    let q = 1.0 - p;
    [
        q * q * (1.0 - zeta) + q * zeta,
        2.0 * p * q * (1.0 - zeta),
        p * p * (1.0 - zeta) + p * zeta,
    ]
}

/// `μ_mf = P_female(m) · P_male(f)`.
pub fn mating_type_probs(scenario: &Scenario) -> SimplexPoint {
    let mother = genotype_freqs(scenario.maf, scenario.zeta_female);
    let father = genotype_freqs(scenario.maf, scenario.zeta_male);
    let mut mu = [0.0; 9];
    for m in 0..3 {
        for f in 0..3 {
            mu[3 * m + f] = mother[m] * father[f];
        }
    }
    let s: f64 = mu.iter().sum();
    SimplexPoint::new(mu.map(|v| v / s)).expect("product of genotype laws is on the simplex")
}

/// `E[RR]` over a random child, with origin-resolved transmission.
fn expected_relative_risk(model: &DiseaseModel, mu: &SimplexPoint) -> f64 {
    let mut e = 0.0;
    for m in Genotype::ALL {
        for f in Genotype::ALL {
            for c in ChildGenotype::resolved_outcomes() {
                e += mu.get(m, f) * crate::genetics::transmission_prob(m, f, c) * model.relative_risk(m, c);
            }
        }
    }
    e
}

/// Baseline penetrance δ giving population prevalence `scenario.prev`.
pub fn calibrate_delta(model: &DiseaseModel, scenario: &Scenario) -> Result<f64> {
    let mu = mating_type_probs(scenario);
    let delta = scenario.prev / expected_relative_risk(model, &mu);
    model.theta(delta)?;
    Ok(delta)
}

fn draw_genotype<R: Rng + ?Sized>(law: &[f64; 9], rng: &mut R) -> (Genotype, Genotype) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut idx = 8;
    for (i, p) in law.iter().enumerate() {
        acc += p;
        if u < acc {
            idx = i;
            break;
        }
    }
    (Genotype::ALL[idx / 3], Genotype::ALL[idx % 3])
}

fn draw_child<R: Rng + ?Sized>(m: Genotype, f: Genotype, rng: &mut R) -> ChildGenotype {
    let from_mother = rng.random_bool(m.count() as f64 / 2.0);
    let from_father = rng.random_bool(f.count() as f64 / 2.0);
    match (from_mother, from_father) {
        (false, false) => ChildGenotype::homozygous(Genotype::ZERO).expect("homozygous"),
        (true, true) => ChildGenotype::homozygous(Genotype::TWO).expect("homozygous"),
        (true, false) => ChildGenotype::maternal_het(),
        (false, true) => ChildGenotype::paternal_het(),
    }
}

fn draw_status<R: Rng + ?Sized>(theta: &Theta, m: Genotype, c: ChildGenotype, rng: &mut R) -> bool {
    let p = penetrance(theta, m, c).expect("resolved child genotype");
    rng.random::<f64>() < p
}

/// Draws families until exactly one of two children is affected; the
/// affected child becomes `c1`.
pub fn simulate_family<R: Rng + ?Sized>(
    model: &DiseaseModel,
    scenario: &Scenario,
    delta: f64,
    with_extra_sibling: bool,
    rng: &mut R,
) -> Result<FamilyRecord> {
    let theta = model.theta(delta)?;
    let mu = mating_type_probs(scenario);
    loop {
        let (m, f) = draw_genotype(mu.as_array(), rng);
        let a = draw_child(m, f, rng);
        let b = draw_child(m, f, rng);
        let da = draw_status(&theta, m, a, rng);
        let db = draw_status(&theta, m, b, rng);
        let (c1, c2) = match (da, db) {
            (true, false) => (a, b),
            (false, true) => (b, a),
            _ => continue,
        };
        let siblings = if with_extra_sibling {
            let s = draw_child(m, f, rng);
            vec![Sibling {
                genotype: s.count(),
                affected: draw_status(&theta, m, s, rng),
            }]
        } else {
            Vec::new()
        };
        return Ok(FamilyRecord {
            id: String::new(),
            m,
            f,
            c1: c1.count(),
            c2: c2.count(),
            siblings,
        });
    }
}

/// `n_families` recruited families, deterministic in `seed`, with ids `F1..Fn`.
pub fn simulate_dataset(
    model: &DiseaseModel,
    scenario: &Scenario,
    n_families: usize,
    with_extra_sibling: bool,
    seed: u64,
) -> Result<Dataset> {
    let delta = calibrate_delta(model, scenario)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let families = (0..n_families)
        .map(|i| {
            simulate_family(model, scenario, delta, with_extra_sibling, &mut rng).map(|mut fam| {
                fam.id = format!("F{}", i + 1);
                fam
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(families)
}

/// Seed of replicate `index` derived from `base`.
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    base ^ index
}
