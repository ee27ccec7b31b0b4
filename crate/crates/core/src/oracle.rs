//! Brute-force references for verification.
//!
//! Nothing here calls into [`crate::genetics`] probability code: transmission
//! is enumerated allele by allele and penetrance is recomputed locally.

use std::collections::BTreeMap;

use crate::genetics::{SimplexPoint, Theta};

#[derive(Clone, Debug, PartialEq)]
pub struct EnumeratedTable {
    /// `(m, f, c1, c2) → P(M=m, F=f, C1=c1, C2=c2, D1=1, D2=0)`.
    pub entries: BTreeMap<(u8, u8, u8, u8), f64>,
    pub total: f64,
}

impl EnumeratedTable {
    pub fn get(&self, m: u8, f: u8, c1: u8, c2: u8) -> f64 {
        self.entries.get(&(m, f, c1, c2)).copied().unwrap_or(0.0)
    }
}

/// The two alleles of a parent carrying `count` variant alleles.
fn alleles(count: u8) -> [u8; 2] {
    match count {
        0 => [0, 0],
        1 => [1, 0],
        _ => [1, 1],
    }
}

/// Every (maternal allele, paternal allele) path, each with probability 1/4.
fn paths(m: u8, f: u8) -> impl Iterator<Item = (u8, u8)> {
    let (am, af) = (alleles(m), alleles(f));
    (0..2).flat_map(move |i| (0..2).map(move |j| (am[i], af[j])))
}

fn penetrance(theta: &Theta, m: u8, from_mother: u8, from_father: u8) -> f64 {
    let own = match (from_mother, from_father) {
        (0, 0) => 1.0,
        (1, 0) => theta.r1() * theta.r_im(),
        (0, 1) => theta.r1(),
        _ => theta.r2(),
    };
    let mat = match m {
        0 => 1.0,
        1 => theta.s1(),
        _ => theta.s2(),
    };
    theta.delta() * own * mat
}

pub fn enumerate_joint_table(theta: &Theta, mu: &SimplexPoint) -> EnumeratedTable {
    let mut entries = BTreeMap::new();
    let mut total = 0.0;
    for m in 0..3u8 {
        for f in 0..3u8 {
            let w = mu.as_array()[3 * m as usize + f as usize];
            for (a1, b1) in paths(m, f) {
                for (a2, b2) in paths(m, f) {
                    let p = w
                        * 0.0625
                        * penetrance(theta, m, a1, b1)
                        * (1.0 - penetrance(theta, m, a2, b2));
                    if p > 0.0 {
                        *entries.entry((m, f, a1 + b1, a2 + b2)).or_insert(0.0) += p;
                        total += p;
                    }
                }
            }
        }
    }
    EnumeratedTable { entries, total }
}

/// `P(D = 1)` for a random child.
pub fn brute_force_prev(theta: &Theta, mu: &SimplexPoint) -> f64 {
    let mut p = 0.0;
    for m in 0..3u8 {
        for f in 0..3u8 {
            let w = mu.as_array()[3 * m as usize + f as usize];
            for (a, b) in paths(m, f) {
                p += w * 0.25 * penetrance(theta, m, a, b);
            }
        }
    }
    p
}

/// `P(M = m, F = f | D1 = 1, D2 = 0)`.
pub fn recruitment_conditional_mu(theta: &Theta, mu: &SimplexPoint) -> SimplexPoint {
    let table = enumerate_joint_table(theta, mu);
    let mut out = [0.0; 9];
    for (&(m, f, _, _), &p) in &table.entries {
        out[3 * m as usize + f as usize] += p / table.total;
    }
    let s: f64 = out.iter().sum();
    SimplexPoint::new(out.map(|v| v / s)).expect("normalized")
}
