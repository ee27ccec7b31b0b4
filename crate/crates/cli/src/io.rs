//! Tab-separated family, scan and pedigree files.
//!
//! Every file starts with one `#`-prefixed header line. Blank lines are
//! skipped. Sibling lists are `;`-joined so that one family fits on a row.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use mcem_dsp::{Dataset, FamilyRecord, Genotype, Sibling};

use crate::error::{CliError, CliResult};

pub const FAMILY_HEADER: &str = "#family_id\tm\tf\tc1\tc2\tsib_genotypes\tsib_statuses";
pub const SCAN_HEADER: &str = "#snp_id\tfamily_id\tm\tf\tc1\tc2\tsib_genotypes";
pub const PEDIGREE_HEADER: &str = "#family_id\tsib_statuses";

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn genotype(field: &str, name: &str, path: &str, line: usize) -> CliResult<Genotype> {
    let v: u8 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("{name}: expected 0, 1 or 2, got {field:?}")))?;
    Genotype::new(v).map_err(|e| parse_err(path, line, format!("{name}: {e}")))
}

fn list<T>(field: &str, name: &str, path: &str, line: usize, item: impl Fn(&str) -> Option<T>) -> CliResult<Vec<T>> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|s| item(s).ok_or_else(|| parse_err(path, line, format!("{name}: bad entry {s:?}"))))
        .collect()
}

fn genotype_list(field: &str, path: &str, line: usize) -> CliResult<Vec<Genotype>> {
    list(field, "sib_genotypes", path, line, |s| s.parse::<u8>().ok().and_then(|v| Genotype::new(v).ok()))
}

fn status_list(field: &str, path: &str, line: usize) -> CliResult<Vec<bool>> {
    list(field, "sib_statuses", path, line, |s| match s {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    })
}

/// Data rows as `(line number, fields)`, after checking the header.
fn rows(reader: impl Read, path: &str, header: &str) -> CliResult<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if !line.starts_with('#') {
                return Err(parse_err(path, line_no, format!("missing header, expected {header:?}")));
            }
            let want = header.trim_start_matches('#').split('\t').count();
            let got = line.trim_start_matches('#').split('\t').count();
            if want != got {
                return Err(parse_err(path, line_no, format!("header has {got} columns, expected {want}")));
            }
            seen_header = true;
            continue;
        }
        out.push((line_no, line.split('\t').map(str::to_string).collect()));
    }
    if !seen_header {
        return Err(parse_err(path, 1, "empty file"));
    }
    Ok(out)
}

fn siblings(gens: Vec<Genotype>, stats: Vec<bool>, path: &str, line: usize) -> CliResult<Vec<Sibling>> {
    if gens.len() != stats.len() {
        return Err(parse_err(
            path,
            line,
            format!("{} sibling genotypes but {} statuses", gens.len(), stats.len()),
        ));
    }
    Ok(gens
        .into_iter()
        .zip(stats)
        .map(|(genotype, affected)| Sibling { genotype, affected })
        .collect())
}

pub fn read_families(reader: impl Read, path: &str) -> CliResult<Dataset> {
    let mut families = Vec::new();
    let mut ids = BTreeSet::new();
    for (line, f) in rows(reader, path, FAMILY_HEADER)? {
        if f.len() != 7 {
            return Err(parse_err(path, line, format!("expected 7 columns, got {}", f.len())));
        }
        if !ids.insert(f[0].clone()) {
            return Err(parse_err(path, line, format!("duplicate family id {:?}", f[0])));
        }
        let fam = FamilyRecord {
            id: f[0].clone(),
            m: genotype(&f[1], "m", path, line)?,
            f: genotype(&f[2], "f", path, line)?,
            c1: genotype(&f[3], "c1", path, line)?,
            c2: genotype(&f[4], "c2", path, line)?,
            siblings: siblings(genotype_list(&f[5], path, line)?, status_list(&f[6], path, line)?, path, line)?,
        };
        if !fam.is_mendel_consistent() {
            return Err(parse_err(path, line, format!("family {}: genotypes violate Mendelian inheritance", fam.id)));
        }
        families.push(fam);
    }
    if families.is_empty() {
        return Err(parse_err(path, 1, "no families"));
    }
    Ok(Dataset::new(families)?)
}

pub fn read_family_file(path: &Path) -> CliResult<Dataset> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::io(&name, e))?;
    read_families(file, &name)
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(";")
}

pub fn write_families(data: &Dataset, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{FAMILY_HEADER}")?;
    for fam in data.families() {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fam.id,
            fam.m.count(),
            fam.f.count(),
            fam.c1.count(),
            fam.c2.count(),
            join(&fam.siblings, |s| s.genotype.count().to_string()),
            join(&fam.siblings, |s| (s.affected as u8).to_string()),
        )?;
    }
    Ok(())
}

/// Sibling disease statuses by family id.
pub type Pedigree = BTreeMap<String, Vec<bool>>;

pub fn read_pedigree(reader: impl Read, path: &str) -> CliResult<Pedigree> {
    let mut out = Pedigree::new();
    for (line, f) in rows(reader, path, PEDIGREE_HEADER)? {
        if f.len() != 2 {
            return Err(parse_err(path, line, format!("expected 2 columns, got {}", f.len())));
        }
        let stats = status_list(&f[1], path, line)?;
        if out.insert(f[0].clone(), stats).is_some() {
            return Err(parse_err(path, line, format!("duplicate family id {:?}", f[0])));
        }
    }
    Ok(out)
}

/// One row of a long-format scan file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanRow {
    pub line: usize,
    pub family_id: String,
    pub m: Genotype,
    pub f: Genotype,
    pub c1: Genotype,
    pub c2: Genotype,
    pub sib_genotypes: Vec<Genotype>,
}

/// Scan rows grouped by SNP, in order of first appearance.
pub fn read_scan(reader: impl Read, path: &str) -> CliResult<Vec<(String, Vec<ScanRow>)>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<ScanRow>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for (line, f) in rows(reader, path, SCAN_HEADER)? {
        if f.len() != 7 {
            return Err(parse_err(path, line, format!("expected 7 columns, got {}", f.len())));
        }
        if !seen.insert((f[0].clone(), f[1].clone())) {
            return Err(parse_err(path, line, format!("duplicate (snp, family) pair ({}, {})", f[0], f[1])));
        }
        let row = ScanRow {
            line,
            family_id: f[1].clone(),
            m: genotype(&f[2], "m", path, line)?,
            f: genotype(&f[3], "f", path, line)?,
            c1: genotype(&f[4], "c1", path, line)?,
            c2: genotype(&f[5], "c2", path, line)?,
            sib_genotypes: genotype_list(&f[6], path, line)?,
        };
        if !groups.contains_key(&f[0]) {
            order.push(f[0].clone());
        }
        groups.entry(f[0].clone()).or_default().push(row);
    }
    Ok(order
        .into_iter()
        .map(|snp| {
            let rows = groups.remove(&snp).unwrap_or_default();
            (snp, rows)
        })
        .collect())
}

/// Joins one SNP's genotype rows with the pedigree statuses.
pub fn snp_dataset(rows: &[ScanRow], pedigree: &Pedigree, path: &str, min_coverage: f64) -> CliResult<Dataset> {
    let mut families = Vec::with_capacity(rows.len());
    for r in rows {
        let stats = pedigree
            .get(&r.family_id)
            .ok_or_else(|| parse_err(path, r.line, format!("family {} is not in the pedigree", r.family_id)))?;
        let fam = FamilyRecord {
            id: r.family_id.clone(),
            m: r.m,
            f: r.f,
            c1: r.c1,
            c2: r.c2,
            siblings: siblings(r.sib_genotypes.clone(), stats.clone(), path, r.line)?,
        };
        if !fam.is_mendel_consistent() {
            return Err(parse_err(path, r.line, format!("family {}: genotypes violate Mendelian inheritance", fam.id)));
        }
        families.push(fam);
    }
    let coverage = if pedigree.is_empty() { 0.0 } else { families.len() as f64 / pedigree.len() as f64 };
    if coverage < min_coverage {
        return Err(CliError::Data(format!(
            "family coverage {:.3} is below the threshold {:.3}",
            coverage, min_coverage
        )));
    }
    Ok(Dataset::new(families)?)
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display().to_string(), e))
}

/// `<path>.<suffix>`, keeping the original extension.
pub fn sidecar(path: &Path, suffix: &str) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    s.into()
}
