//! Energy tables and their tab-separated file format.
//!
//! ```text
//! #domain=sphere
//! #potential=log
//! #source=example
//! 97<TAB>-891.653265231
//! 100<TAB>-1083.376338235
//! ```
//!
//! Header lines are `#key=value`; a `#` line without `=` is a comment. Data
//! rows are `N<TAB>E` with an optional third tab-separated provenance label.
//! Energies are written in the shortest decimal form that parses back to the
//! same `f64`, so a published 12-digit value is reproduced verbatim.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::potentials::PotentialSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct TableMetadata {
    pub domain: DomainSpec,
    pub potential: PotentialSpec,
    pub source: String,
}

impl TableMetadata {
    pub fn new(
        domain: DomainSpec,
        potential: PotentialSpec,
        source: impl Into<String>,
    ) -> Result<Self> {
        potential.check_domain(&domain)?;
        Ok(Self {
            domain,
            potential,
            source: single_line(&source.into()).trim().to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub energy: f64,
    pub label: String,
}

/// An entry that lost against a lower energy for the same N.
#[derive(Debug, Clone, PartialEq)]
pub struct Discarded {
    pub n: usize,
    pub kept: f64,
    pub discarded: f64,
}

/// Sparse map N -> putative ground-state energy, at most one entry per N.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    metadata: TableMetadata,
    entries: BTreeMap<usize, TableEntry>,
}

impl EnergyTable {
    pub fn new(metadata: TableMetadata) -> Self {
        Self {
            metadata,
            entries: BTreeMap::new(),
        }
    }

    pub fn metadata(&self) -> &TableMetadata {
        &self.metadata
    }

    /// Inserts a row. A second row for the same N keeps the lower energy,
    /// since both are upper bounds on the ground state and the lower one is
    /// sharper; the loser is returned.
    pub fn insert(
        &mut self,
        n: usize,
        energy: f64,
        label: impl Into<String>,
    ) -> Result<Option<Discarded>> {
        if n < 2 {
            return Err(Error::TooFewPoints {
                required: 2,
                got: n,
            });
        }
        if !energy.is_finite() {
            return Err(Error::InvalidEnergy { n, energy });
        }
        let entry = TableEntry {
            energy,
            label: single_line(&label.into()),
        };
        match self.entries.get_mut(&n) {
            None => {
                self.entries.insert(n, entry);
                Ok(None)
            }
            Some(existing) => {
                if entry.energy < existing.energy {
                    let old = std::mem::replace(existing, entry);
                    Ok(Some(Discarded {
                        n,
                        kept: existing.energy,
                        discarded: old.energy,
                    }))
                } else {
                    Ok(Some(Discarded {
                        n,
                        kept: existing.energy,
                        discarded: entry.energy,
                    }))
                }
            }
        }
    }

    pub fn get(&self, n: usize) -> Option<&TableEntry> {
        self.entries.get(&n)
    }

    pub fn energy(&self, n: usize) -> Option<f64> {
        self.entries.get(&n).map(|e| e.energy)
    }

    /// Rows in increasing N.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &TableEntry)> + '_ {
        self.entries.iter().map(|(n, e)| (*n, e))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SHA-256 of the canonical file text, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(write_table(self).as_bytes()))
    }
}

fn single_line(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

pub fn write_table(t: &EnergyTable) -> String {
    let mut out = String::new();
    let m = &t.metadata;
    match m.domain {
        DomainSpec::Torus2 { aspect_ratio } => {
            out.push_str("#domain=torus\n");
            let _ = writeln!(out, "#aspect_ratio={aspect_ratio}");
        }
        d => {
            let _ = writeln!(out, "#domain={d}");
        }
    }
    let _ = writeln!(out, "#potential={}", m.potential);
    let _ = writeln!(out, "#source={}", m.source);
    for (n, e) in t.iter() {
        if e.label.is_empty() {
            let _ = writeln!(out, "{n}\t{}", e.energy);
        } else {
            let _ = writeln!(out, "{n}\t{}\t{}", e.energy, e.label);
        }
    }
    out
}

pub fn save_table(path: impl AsRef<Path>, t: &EnergyTable) -> Result<()> {
    std::fs::write(path, write_table(t))?;
    Ok(())
}

/// A parsed table together with the duplicate rows that were dropped.
#[derive(Debug, Clone)]
pub struct TableRead {
    pub table: EnergyTable,
    pub discarded: Vec<Discarded>,
}

pub fn parse_table(path: impl AsRef<Path>) -> Result<EnergyTable> {
    let text = std::fs::read_to_string(path)?;
    Ok(read_table(&text)?.table)
}

pub fn read_table(text: &str) -> Result<TableRead> {
    let mut domain: Option<(usize, String)> = None;
    let mut aspect: Option<(usize, String)> = None;
    let mut potential: Option<(usize, String)> = None;
    let mut source = String::new();
    let mut rows: Vec<(usize, usize, f64, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let Some((key, value)) = header.split_once('=') else {
                continue;
            };
            let value = value.trim().to_string();
            match key.trim() {
                "domain" => domain = Some((line_no, value)),
                "aspect_ratio" => aspect = Some((line_no, value)),
                "potential" => potential = Some((line_no, value)),
                "source" => source = value,
                other => warn!("line {line_no}: ignoring unknown header key `{other}`"),
            }
            continue;
        }
        let mut fields = line.split('\t');
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let n_text = fields.next().unwrap_or_default().trim();
        let e_text = fields
            .next()
            .ok_or_else(|| parse_err(format!("expected `N<TAB>E`, got `{line}`")))?
            .trim();
        let label = fields.next().unwrap_or_default().to_string();
        if fields.next().is_some() {
            return Err(parse_err("too many columns".into()));
        }
        let n: usize = n_text
            .parse()
            .map_err(|_| parse_err(format!("N `{n_text}` is not a non-negative integer")))?;
        if n < 2 {
            return Err(parse_err(format!("N must be at least 2, got {n}")));
        }
        let energy: f64 = e_text
            .parse()
            .ok()
            .filter(|e: &f64| e.is_finite())
            .ok_or_else(|| {
                parse_err(format!("energy `{e_text}` is not a finite decimal number"))
            })?;
        rows.push((line_no, n, energy, label));
    }

    let (domain_line, domain_text) = domain.ok_or(Error::Parse {
        line: 0,
        message: "missing `#domain=` header".into(),
    })?;
    let (potential_line, potential_text) = potential.ok_or(Error::Parse {
        line: 0,
        message: "missing `#potential=` header".into(),
    })?;
    let header_err = |line: usize, e: Error| Error::Parse {
        line,
        message: e.to_string(),
    };
    let domain = match domain_text.as_str() {
        "torus" => {
            let (line, ratio) = aspect.ok_or(Error::Parse {
                line: domain_line,
                message: "torus domain needs an `#aspect_ratio=` header".into(),
            })?;
            let r: f64 = ratio.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad aspect ratio `{ratio}`"),
            })?;
            DomainSpec::torus(r).map_err(|e| header_err(line, e))?
        }
        other => other
            .parse::<DomainSpec>()
            .map_err(|e| header_err(domain_line, e))?,
    };
    let potential: PotentialSpec = potential_text
        .parse()
        .map_err(|e| header_err(potential_line, e))?;
    let metadata =
        TableMetadata::new(domain, potential, source).map_err(|e| header_err(potential_line, e))?;

    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }

    let mut table = EnergyTable::new(metadata);
    let mut discarded = Vec::new();
    for (line_no, n, energy, label) in rows {
        if let Some(d) = table.insert(n, energy, label)? {
            warn!(
                "line {line_no}: duplicate N={} keeps {} and discards {}",
                d.n, d.kept, d.discarded
            );
            discarded.push(d);
        }
    }
    Ok(TableRead { table, discarded })
}
