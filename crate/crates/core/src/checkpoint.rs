//! Resumable state of an exhaustive mask scan, stored as a small versioned
//! `key=value` text file.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const HEADER: &str = "riesz-scan-checkpoint 1";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScanCheckpoint {
    pub n: usize,
    /// Rank of the fixed permutation, or absent for a global search.
    pub fixed_rho_rank: Option<u128>,
    pub collect_all: bool,
    pub all_witnesses: bool,
    /// Rank of the permutation being scanned.
    pub rho_rank: u128,
    /// First mask counter not yet examined for `rho_rank`.
    pub next_counter: u64,
    pub witnesses: Vec<u128>,
    /// `(permutation rank, mask counter)` of every recorded failure.
    pub failures: Vec<(u128, u64)>,
    pub masks_tested: u128,
    pub permutations_tested: u128,
    pub complete: bool,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn split<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Checkpoint(format!("bad entry {t:?} in {key}")))
        })
        .collect()
}

impl ScanCheckpoint {
    pub fn to_text(&self) -> String {
        let failures: Vec<String> = self
            .failures
            .iter()
            .map(|(r, c)| format!("{r}:{c}"))
            .collect();
        format!(
            "{HEADER}\nn={}\nfixed_rho_rank={}\ncollect_all={}\nall_witnesses={}\nrho_rank={}\nnext_counter={}\nwitnesses={}\nfailures={}\nmasks_tested={}\npermutations_tested={}\ncomplete={}\n",
            self.n,
            self.fixed_rho_rank.map_or("none".to_string(), |r| r.to_string()),
            self.collect_all,
            self.all_witnesses,
            self.rho_rank,
            self.next_counter,
            join(&self.witnesses),
            failures.join(","),
            self.masks_tested,
            self.permutations_tested,
            self.complete,
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            return Err(Error::Checkpoint("missing or unsupported header".into()));
        }
        let mut cp = ScanCheckpoint::default();
        let mut seen = 0;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Checkpoint(format!("malformed line {line:?}")))?;
            let num = |v: &str| -> Result<u128> {
                v.parse()
                    .map_err(|_| Error::Checkpoint(format!("bad number {v:?} for {key}")))
            };
            let flag = |v: &str| -> Result<bool> {
                v.parse()
                    .map_err(|_| Error::Checkpoint(format!("bad flag {v:?} for {key}")))
            };
            match key {
                "n" => cp.n = num(value)? as usize,
                "fixed_rho_rank" => {
                    cp.fixed_rho_rank = if value == "none" { None } else { Some(num(value)?) }
                }
                "collect_all" => cp.collect_all = flag(value)?,
                "all_witnesses" => cp.all_witnesses = flag(value)?,
                "rho_rank" => cp.rho_rank = num(value)?,
                "next_counter" => cp.next_counter = num(value)? as u64,
                "witnesses" => cp.witnesses = split(key, value)?,
                "failures" => {
                    cp.failures = split::<String>(key, value)?
                        .iter()
                        .map(|pair| {
                            let (r, c) = pair
                                .split_once(':')
                                .ok_or_else(|| Error::Checkpoint(format!("bad failure {pair:?}")))?;
                            Ok((num(r)?, num(c)? as u64))
                        })
                        .collect::<Result<_>>()?
                }
                "masks_tested" => cp.masks_tested = num(value)?,
                "permutations_tested" => cp.permutations_tested = num(value)?,
                "complete" => cp.complete = flag(value)?,
                other => return Err(Error::Checkpoint(format!("unknown key {other:?}"))),
            }
            seen += 1;
        }
        if seen != 11 {
            return Err(Error::Checkpoint(format!("expected 11 fields, found {seen}")));
        }
        Ok(cp)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Writes through a temporary file so an interrupted write never leaves
    /// a truncated checkpoint behind.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_text())
            .and_then(|_| fs::rename(&tmp, path))
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }
}
