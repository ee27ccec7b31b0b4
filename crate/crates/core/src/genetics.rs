//! Exact probability computations for the discordant sib-pair genetic model.
//!
//! A family contributes
//! `P(m, f, c1, c2 | D1 = 1, D2 = 0) · P(siblings | m, f)`; the first factor
//! is a ratio of one of 29 joint configuration probabilities to their sum.
//! Children that carry one variant allele under two heterozygous parents have
//! an unobserved parent of origin, and their penetrance is averaged over both
//! origins with equal weight.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Number of variant alleles carried (0, 1 or 2).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype(u8);

impl Genotype {
    pub const ZERO: Genotype = Genotype(0);
    pub const ONE: Genotype = Genotype(1);
    pub const TWO: Genotype = Genotype(2);
    pub const ALL: [Genotype; 3] = [Genotype(0), Genotype(1), Genotype(2)];

    pub fn new(count: u8) -> Result<Self> {
        if count > 2 {
            return Err(Error::InvalidGenotype(count));
        }
        Ok(Genotype(count))
    }

    #[inline]
    pub fn count(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Probability that a parent with this genotype transmits the variant allele.
    #[inline]
    fn transmit_variant(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parent of origin of a heterozygous child's variant allele.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Maternal,
    Paternal,
    /// Homozygous child: there is nothing to resolve.
    Unambiguous,
    /// Heterozygous child of two heterozygous parents, origin unobserved.
    Ambiguous,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChildGenotype {
    count: Genotype,
    origin: Origin,
}

impl ChildGenotype {
    pub fn new(count: Genotype, origin: Origin) -> Result<Self> {
        let ok = match count.count() {
            1 => origin != Origin::Unambiguous,
            _ => origin == Origin::Unambiguous,
        };
        if !ok {
            return Err(Error::InvalidOrigin {
                count: count.count(),
            });
        }
        Ok(ChildGenotype { count, origin })
    }

    pub fn homozygous(count: Genotype) -> Result<Self> {
        Self::new(count, Origin::Unambiguous)
    }

    pub fn maternal_het() -> Self {
        ChildGenotype {
            count: Genotype::ONE,
            origin: Origin::Maternal,
        }
    }

    pub fn paternal_het() -> Self {
        ChildGenotype {
            count: Genotype::ONE,
            origin: Origin::Paternal,
        }
    }

    pub fn count(self) -> Genotype {
        self.count
    }

    pub fn origin(self) -> Origin {
        self.origin
    }

    /// The four origin-resolved outcomes a child can have.
    pub fn resolved_outcomes() -> [ChildGenotype; 4] {
        [
            ChildGenotype {
                count: Genotype::ZERO,
                origin: Origin::Unambiguous,
            },
            ChildGenotype::maternal_het(),
            ChildGenotype::paternal_het(),
            ChildGenotype {
                count: Genotype::TWO,
                origin: Origin::Unambiguous,
            },
        ]
    }
}

/// Disease-model parameters `(δ, R1, R2, R_im, S1, S2)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Theta {
    delta: f64,
    r1: f64,
    r2: f64,
    r_im: f64,
    s1: f64,
    s2: f64,
}

impl Theta {
    /// Validates positivity, `δ ∈ (0, 1)` and that the largest penetrance
    /// over all (mother, child) configurations does not exceed 1.
    pub fn new(delta: f64, r1: f64, r2: f64, r_im: f64, s1: f64, s2: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidTheta(format!("delta {delta} not in (0, 1)")));
        }
        for (name, v) in [("r1", r1), ("r2", r2), ("r_im", r_im), ("s1", s1), ("s2", s2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidTheta(format!("{name} = {v} is not a positive real")));
            }
        }
        let theta = Theta {
            delta,
            r1,
            r2,
            r_im,
            s1,
            s2,
        };
        let worst = theta.max_penetrance();
        if worst > 1.0 {
            return Err(Error::PenetranceExceedsOne(worst));
        }
        Ok(theta)
    }

    /// No genetic effect: every relative risk is 1.
    pub fn null(delta: f64) -> Result<Self> {
        Self::new(delta, 1.0, 1.0, 1.0, 1.0, 1.0)
    }

    pub fn from_array(v: [f64; 6]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.delta, self.r1, self.r2, self.r_im, self.s1, self.s2]
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn r2(&self) -> f64 {
        self.r2
    }
    pub fn r_im(&self) -> f64 {
        self.r_im
    }
    pub fn s1(&self) -> f64 {
        self.s1
    }
    pub fn s2(&self) -> f64 {
        self.s2
    }

    /// Largest penetrance attained by any configuration.
    pub fn max_penetrance(&self) -> f64 {
        let child = 1f64.max(self.r1).max(self.r1 * self.r_im).max(self.r2);
        let mother = 1f64.max(self.s1).max(self.s2);
        self.delta * child * mother
    }

    fn relative_risk(&self, mother: Genotype, child: ChildGenotype) -> f64 {
        let own = match (child.count.count(), child.origin) {
            (0, _) => 1.0,
            (1, Origin::Maternal) => self.r1 * self.r_im,
            (1, _) => self.r1,
            _ => self.r2,
        };
        let maternal = match mother.count() {
            0 => 1.0,
            1 => self.s1,
            _ => self.s2,
        };
        own * maternal
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta={} r1={} r2={} r_im={} s1={} s2={}",
            self.delta, self.r1, self.r2, self.r_im, self.s1, self.s2
        )
    }
}

/// Nine mating-type probabilities `μ_mf`, stored row-major by mother genotype.
///
/// No symmetry `μ_mf = μ_fm` is assumed. Boundary points (zero entries) are
/// representable; the Dirichlet machinery requires interior points and
/// checks for them itself.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SimplexPoint([f64; 9]);

impl SimplexPoint {
    pub const SUM_TOL: f64 = 1e-12;

    pub fn new(mu: [f64; 9]) -> Result<Self> {
        if mu.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidSimplex(format!("entries outside [0, 1]: {mu:?}")));
        }
        let s: f64 = mu.iter().sum();
        if (s - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidSimplex(format!("entries sum to {s}")));
        }
        Ok(SimplexPoint(mu))
    }

    pub fn uniform() -> Self {
        SimplexPoint([1.0 / 9.0; 9])
    }

    /// Internal constructor for values already known to lie on the simplex.
    pub(crate) fn from_raw(mu: [f64; 9]) -> Self {
        SimplexPoint(mu)
    }

    #[inline]
    pub fn index(m: Genotype, f: Genotype) -> usize {
        3 * m.index() + f.index()
    }

    #[inline]
    pub fn get(&self, m: Genotype, f: Genotype) -> f64 {
        self.0[Self::index(m, f)]
    }

    #[inline]
    pub fn as_array(&self) -> &[f64; 9] {
        &self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0 && v < 1.0)
    }
}

/// An additional sibling beyond the two probands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sibling {
    pub genotype: Genotype,
    pub affected: bool,
}

/// One discordant sib-pair family. `c1` is the affected proband, `c2` the
/// unaffected one. Parent-of-origin is never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyRecord {
    pub id: String,
    pub m: Genotype,
    pub f: Genotype,
    pub c1: Genotype,
    pub c2: Genotype,
    pub siblings: Vec<Sibling>,
}

impl FamilyRecord {
    pub fn is_mendel_consistent(&self) -> bool {
        let ok = |c: Genotype| count_prob(self.m, self.f, c) > 0.0;
        ok(self.c1) && ok(self.c2) && self.siblings.iter().all(|s| ok(s.genotype))
    }

    pub fn config(&self) -> DsConfig {
        DsConfig {
            m: self.m,
            f: self.f,
            c1: self.c1,
            c2: self.c2,
        }
    }
}

/// A validated collection of families with parental-pair counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    families: Vec<FamilyRecord>,
    n_mf: [[u32; 3]; 3],
}

impl Dataset {
    pub fn new(families: Vec<FamilyRecord>) -> Result<Self> {
        let mut n_mf = [[0u32; 3]; 3];
        for fam in &families {
            if !fam.is_mendel_consistent() {
                return Err(Error::MendelIncompatible {
                    family: fam.id.clone(),
                });
            }
            n_mf[fam.m.index()][fam.f.index()] += 1;
        }
        Ok(Dataset { families, n_mf })
    }

    pub fn empty() -> Self {
        Dataset {
            families: Vec::new(),
            n_mf: [[0; 3]; 3],
        }
    }

    pub fn families(&self) -> &[FamilyRecord] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn n_mf(&self) -> &[[u32; 3]; 3] {
        &self.n_mf
    }

    /// True when no family has additional siblings.
    pub fn is_ds_only(&self) -> bool {
        self.families.iter().all(|f| f.siblings.is_empty())
    }

    /// Content digest used to check that two fits saw the same data.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for fam in &self.families {
            h.update(fam.id.as_bytes());
            h.update([0xff, fam.m.0, fam.f.0, fam.c1.0, fam.c2.0]);
            for s in &fam.siblings {
                h.update([s.genotype.0, s.affected as u8]);
            }
        }
        h.finalize().into()
    }
}

/// A (mother, father, affected proband, unaffected proband) genotype tuple.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DsConfig {
    pub m: Genotype,
    pub f: Genotype,
    pub c1: Genotype,
    pub c2: Genotype,
}

const fn cfg(m: u8, f: u8, c1: u8, c2: u8) -> DsConfig {
    DsConfig {
        m: Genotype(m),
        f: Genotype(f),
        c1: Genotype(c1),
        c2: Genotype(c2),
    }
}

/// The 29 Mendel-compatible configurations, in the conventional type order
/// (type `k` is at index `k - 1`).
pub const DS_CONFIGURATIONS: [DsConfig; 29] = [
    cfg(0, 0, 0, 0),
    cfg(0, 1, 0, 0),
    cfg(0, 1, 1, 0),
    cfg(0, 1, 0, 1),
    cfg(0, 1, 1, 1),
    cfg(0, 2, 1, 1),
    cfg(1, 0, 0, 0),
    cfg(1, 0, 1, 0),
    cfg(1, 0, 0, 1),
    cfg(1, 0, 1, 1),
    cfg(1, 1, 0, 0),
    cfg(1, 1, 1, 0),
    cfg(1, 1, 0, 1),
    cfg(1, 1, 1, 1),
    cfg(1, 1, 2, 0),
    cfg(1, 1, 0, 2),
    cfg(1, 1, 2, 2),
    cfg(1, 1, 1, 2),
    cfg(1, 1, 2, 1),
    cfg(1, 2, 1, 1),
    cfg(1, 2, 1, 2),
    cfg(1, 2, 2, 1),
    cfg(1, 2, 2, 2),
    cfg(2, 0, 1, 1),
    cfg(2, 1, 1, 1),
    cfg(2, 1, 2, 1),
    cfg(2, 1, 1, 2),
    cfg(2, 1, 2, 2),
    cfg(2, 2, 2, 2),
];

/// Probability that parents `(m, f)` produce child `c` with the given origin
/// resolution. Mendel-incompatible input yields 0. `Ambiguous` is the sum of
/// both heterozygous origins and is only meaningful when both parents are
/// heterozygous; elsewhere it is 0.
pub fn transmission_prob(m: Genotype, f: Genotype, c: ChildGenotype) -> f64 {
    let pm = m.transmit_variant();
    let pf = f.transmit_variant();
    match (c.count.count(), c.origin) {
        (0, _) => (1.0 - pm) * (1.0 - pf),
        (2, _) => pm * pf,
        (_, Origin::Maternal) => pm * (1.0 - pf),
        (_, Origin::Paternal) => (1.0 - pm) * pf,
        (_, Origin::Ambiguous) if m.count() == 1 && f.count() == 1 => 0.5,
        _ => 0.0,
    }
}

/// Probability of the child's variant-allele count, origin marginalized.
pub fn count_prob(m: Genotype, f: Genotype, c: Genotype) -> f64 {
    ChildGenotype::resolved_outcomes()
        .into_iter()
        .filter(|o| o.count == c)
        .map(|o| transmission_prob(m, f, o))
        .sum()
}

/// Multiplicative relative-risk penetrance `P(D = 1 | m, c)`.
pub fn penetrance(theta: &Theta, m: Genotype, c: ChildGenotype) -> Result<f64> {
    if c.origin == Origin::Ambiguous {
        return Err(Error::AmbiguousOrigin);
    }
    let p = theta.delta * theta.relative_risk(m, c);
    if p > 1.0 {
        return Err(Error::PenetranceExceedsOne(p));
    }
    Ok(p)
}

/// `P(C = c, D = d | m, f)` with the parent of origin summed out.
pub fn child_prob(theta: &Theta, m: Genotype, f: Genotype, c: Genotype, affected: bool) -> Result<f64> {
    let mut total = 0.0;
    for outcome in ChildGenotype::resolved_outcomes() {
        if outcome.count != c {
            continue;
        }
        let t = transmission_prob(m, f, outcome);
        if t == 0.0 {
            continue;
        }
        let p = penetrance(theta, m, outcome)?;
        total += t * if affected { p } else { 1.0 - p };
    }
    Ok(total)
}

/// `P(M = m, F = f, C1 = c1, C2 = c2, D1 = 1, D2 = 0)`.
pub fn joint_ds_prob(
    theta: &Theta,
    mu: &SimplexPoint,
    m: Genotype,
    f: Genotype,
    c1: Genotype,
    c2: Genotype,
) -> Result<f64> {
    let mu_mf = mu.get(m, f);
    if mu_mf == 0.0 {
        return Ok(0.0);
    }
    Ok(mu_mf * child_prob(theta, m, f, c1, true)? * child_prob(theta, m, f, c2, false)?)
}

/// `P(D1 = 1, D2 = 0)`: the sum of [`joint_ds_prob`] over all 29 configurations.
pub fn ds_denominator(theta: &Theta, mu: &SimplexPoint) -> Result<f64> {
    let mut total = 0.0;
    for c in DS_CONFIGURATIONS {
        total += joint_ds_prob(theta, mu, c.m, c.f, c.c1, c.c2)?;
    }
    Ok(total)
}

/// Probability of the additional siblings' genotypes and statuses given the
/// parents. An empty list gives 1.
pub fn sibling_block_prob(theta: &Theta, m: Genotype, f: Genotype, siblings: &[Sibling]) -> Result<f64> {
    let mut log_p = 0.0;
    for s in siblings {
        let p = child_prob(theta, m, f, s.genotype, s.affected)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        log_p += p.ln();
    }
    Ok(log_p.exp())
}

/// `log P(Y | Z = z)` summed family by family.
pub fn log_likelihood_given_z(theta: &Theta, z: &SimplexPoint, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let log_denom = ds_denominator(theta, z)?.ln();
    let mut total = 0.0;
    for fam in data.families() {
        let joint = joint_ds_prob(theta, z, fam.m, fam.f, fam.c1, fam.c2)?;
        let mut sib_log = 0.0;
        for s in &fam.siblings {
            let p = child_prob(theta, fam.m, fam.f, s.genotype, s.affected)?;
            if p == 0.0 {
                return Err(Error::ZeroProbability {
                    family: fam.id.clone(),
                });
            }
            sib_log += p.ln();
        }
        if !(joint > 0.0) {
            return Err(Error::ZeroProbability {
                family: fam.id.clone(),
            });
        }
        total += joint.ln() - log_denom + sib_log;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
struct SiblingCell {
    m: Genotype,
    f: Genotype,
    sib: Sibling,
    count: f64,
    example: String,
}

#[derive(Clone, Debug)]
struct ConfigCell {
    config: DsConfig,
    count: f64,
    example: String,
}

/// Sufficient statistics of a dataset for `log P(Y | Z)`.
///
/// The log-likelihood decomposes as
/// `Σ n_mf log z_mf + C(θ) − n log Σ z_mf G_mf(θ)`, so once `C` and `G` are
/// computed for a θ every evaluation at a new `z` costs O(9).
#[derive(Clone, Debug)]
pub struct DataSummary {
    n_families: f64,
    n_mf: [f64; 9],
    configs: Vec<ConfigCell>,
    siblings: Vec<SiblingCell>,
    has_siblings: bool,
}

impl DataSummary {
    pub fn new(data: &Dataset) -> Self {
        let mut configs: Vec<ConfigCell> = Vec::new();
        let mut siblings: Vec<SiblingCell> = Vec::new();
        let mut n_mf = [0.0; 9];
        for fam in data.families() {
            n_mf[SimplexPoint::index(fam.m, fam.f)] += 1.0;
            let key = fam.config();
            match configs.iter_mut().find(|c| c.config == key) {
                Some(c) => c.count += 1.0,
                None => configs.push(ConfigCell {
                    config: key,
                    count: 1.0,
                    example: fam.id.clone(),
                }),
            }
            for s in &fam.siblings {
                match siblings
                    .iter_mut()
                    .find(|c| c.m == fam.m && c.f == fam.f && c.sib == *s)
                {
                    Some(c) => c.count += 1.0,
                    None => siblings.push(SiblingCell {
                        m: fam.m,
                        f: fam.f,
                        sib: *s,
                        count: 1.0,
                        example: fam.id.clone(),
                    }),
                }
            }
        }
        // Fixed summation order independent of family order.
        configs.sort_by_key(|c| c.config);
        siblings.sort_by_key(|c| (c.m, c.f, c.sib.genotype, c.sib.affected));
        DataSummary {
            n_families: data.len() as f64,
            n_mf,
            configs,
            has_siblings: !siblings.is_empty(),
            siblings,
        }
    }

    pub fn n_families(&self) -> usize {
        self.n_families as usize
    }

    pub fn has_siblings(&self) -> bool {
        self.has_siblings
    }

    pub fn n_mf(&self) -> &[f64; 9] {
        &self.n_mf
    }

    /// `Σ n_mf log z_mf`, the only part of the log-likelihood free of θ.
    #[inline]
    pub fn log_mu_term(&self, z: &SimplexPoint) -> f64 {
        let mut s = 0.0;
        for (n, v) in self.n_mf.iter().zip(z.as_array()) {
            if *n > 0.0 {
                s += n * v.ln();
            }
        }
        s
    }

    pub fn theta_terms(&self, theta: &Theta) -> Result<ThetaTerms> {
        let mut aff = [0.0; 9];
        let mut unaff = [0.0; 9];
        for m in Genotype::ALL {
            for f in Genotype::ALL {
                let i = SimplexPoint::index(m, f);
                for c in Genotype::ALL {
                    aff[i] += child_prob(theta, m, f, c, true)?;
                    unaff[i] += child_prob(theta, m, f, c, false)?;
                }
            }
        }
        let mut g = [0.0; 9];
        for i in 0..9 {
            g[i] = aff[i] * unaff[i];
        }
        let mut log_const = 0.0;
        for cell in &self.configs {
            let c = cell.config;
            let p = child_prob(theta, c.m, c.f, c.c1, true)? * child_prob(theta, c.m, c.f, c.c2, false)?;
            if !(p > 0.0) {
                return Err(Error::ZeroProbability {
                    family: cell.example.clone(),
                });
            }
            log_const += cell.count * p.ln();
        }
        for cell in &self.siblings {
            let p = child_prob(theta, cell.m, cell.f, cell.sib.genotype, cell.sib.affected)?;
            if !(p > 0.0) {
                return Err(Error::ZeroProbability {
                    family: cell.example.clone(),
                });
            }
            log_const += cell.count * p.ln();
        }
        Ok(ThetaTerms {
            log_const,
            g,
            n: self.n_families,
        })
    }

    /// Full `log P(Y | z)` for one θ.
    pub fn log_likelihood(&self, theta: &Theta, z: &SimplexPoint) -> Result<f64> {
        Ok(self.log_mu_term(z) + self.theta_terms(theta)?.theta_part(z))
    }
}

/// θ-dependent constants of the decomposed log-likelihood.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTerms {
    log_const: f64,
    g: [f64; 9],
    n: f64,
}

impl ThetaTerms {
    /// `C(θ)`: the log of every numerator factor that does not involve `z`.
    pub fn log_const(&self) -> f64 {
        self.log_const
    }

    /// `G_mf = P(D1 = 1, D2 = 0 | m, f)`.
    pub fn pair_weights(&self) -> &[f64; 9] {
        &self.g
    }

    #[inline]
    pub fn denominator(&self, z: &SimplexPoint) -> f64 {
        let mut d = 0.0;
        for (g, v) in self.g.iter().zip(z.as_array()) {
            d += g * v;
        }
        d
    }

    /// The θ-dependent part `C(θ) − n log Σ z_mf G_mf(θ)`.
    #[inline]
    pub fn theta_part(&self, z: &SimplexPoint) -> f64 {
        if self.n == 0.0 {
            return 0.0;
        }
        self.log_const - self.n * self.denominator(z).ln()
    }

    #[inline]
    pub fn log_likelihood(&self, summary: &DataSummary, z: &SimplexPoint) -> f64 {
        summary.log_mu_term(z) + self.theta_part(z)
    }
}
