//! Supports on the unit interval, periodic frequency sets, and the density
//! bookkeeping behind the two necessary conditions for restricted-support
//! exponential bases.
//!
//! Everything here is exact: endpoints, offsets, measures and densities are
//! reduced integer fractions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `"p/q"` or `"p"` into a reduced fraction.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q == 0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse_int(p)?, q))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

/// Canonical `"p/q"` rendering; integers render as `"p"`.
pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Half-open interval `[lo, hi)` inside `[0, 1]` with rational endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalInterval {
    lo: Rational,
    hi: Rational,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if lo >= hi {
            return Err(Error::InvalidInterval(format!(
                "[{}, {}) is empty",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        if lo < zero || hi > one {
            return Err(Error::InvalidInterval(format!(
                "[{}, {}) is not contained in [0, 1]",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> Rational {
        self.lo
    }

    pub fn hi(&self) -> Rational {
        self.hi
    }

    pub fn length(&self) -> Rational {
        self.hi - self.lo
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl FromStr for RationalInterval {
    type Err = Error;

    /// Accepts `"p/q..r/s"`.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .trim()
            .split_once("..")
            .ok_or_else(|| Error::Parse(format!("expected `lo..hi`, got {s:?}")))?;
        RationalInterval::new(parse_rational(lo)?, parse_rational(hi)?)
    }
}

/// Parses one support set per non-empty line, intervals separated by commas.
pub fn parse_support_sets(text: &str) -> Result<Vec<Vec<RationalInterval>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| line.split(',').map(str::parse).collect())
        .collect()
}

/// A union of grid cells `[l/N, (l+1)/N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSupport {
    modulus: usize,
    cells: Vec<usize>,
}

impl GridSupport {
    pub fn new(modulus: usize, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidInput("grid modulus must be positive".into()));
        }
        let cells: BTreeSet<usize> = cells.into_iter().collect();
        if let Some(&bad) = cells.iter().find(|&&c| c >= modulus) {
            return Err(Error::InvalidInput(format!(
                "cell {bad} outside Z_{modulus}"
            )));
        }
        Ok(Self {
            modulus,
            cells: cells.into_iter().collect(),
        })
    }

    /// Builds a support from a bit-list of length N (`bits[l]` set means cell l).
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        Self::new(
            bits.len(),
            bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i),
        )
    }

    pub fn full(modulus: usize) -> Result<Self> {
        Self::new(modulus, 0..modulus)
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// Sorted, distinct cell indices.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.modulus];
        for &c in &self.cells {
            bits[c] = true;
        }
        bits
    }

    pub fn measure(&self) -> Rational {
        Rational::new(self.cells.len() as i64, self.modulus as i64)
    }

    pub fn is_subset_of(&self, other: &GridSupport) -> bool {
        self.modulus == other.modulus && self.cells.iter().all(|&c| other.contains(c))
    }

    pub fn union(&self, other: &GridSupport) -> Result<GridSupport> {
        if self.modulus != other.modulus {
            return Err(Error::IncompatibleGrids(format!(
                "moduli {} and {}",
                self.modulus, other.modulus
            )));
        }
        GridSupport::new(
            self.modulus,
            self.cells.iter().chain(other.cells.iter()).copied(),
        )
    }

    /// Maximal intervals of the represented set.
    pub fn to_intervals(&self) -> Vec<RationalInterval> {
        let n = self.modulus as i64;
        let mut out = Vec::new();
        let mut iter = self.cells.iter().copied().peekable();
        while let Some(start) = iter.next() {
            let mut end = start;
            while iter.peek() == Some(&(end + 1)) {
                end = iter.next().unwrap();
            }
            out.push(RationalInterval {
                lo: Rational::new(start as i64, n),
                hi: Rational::new(end as i64 + 1, n),
            });
        }
        out
    }
}

/// A periodic frequency set: the union of the cosets `N·Z + c_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CosetSystem {
    modulus: usize,
    offsets: Vec<Rational>,
}

impl CosetSystem {
    pub fn new(modulus: usize, offsets: Vec<Rational>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidInput("coset modulus must be positive".into()));
        }
        let n = Rational::from_integer(modulus as i64);
        let zero = Rational::from_integer(0);
        for c in &offsets {
            if *c < zero || *c >= n {
                return Err(Error::InvalidOffsets(format!(
                    "offset {} outside [0, {modulus})",
                    format_rational(c)
                )));
            }
        }
        let distinct: BTreeSet<&Rational> = offsets.iter().collect();
        if distinct.len() != offsets.len() {
            return Err(Error::InvalidOffsets("offsets must be distinct".into()));
        }
        Ok(Self { modulus, offsets })
    }

    /// Cosets with integer offsets.
    pub fn integer(modulus: usize, offsets: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(
            modulus,
            offsets
                .into_iter()
                .map(|c| Rational::from_integer(c as i64))
                .collect(),
        )
    }

    pub fn empty(modulus: usize) -> Result<Self> {
        Self::new(modulus, Vec::new())
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Membership of a real frequency given as a rational.
    pub fn contains(&self, lambda: Rational) -> bool {
        let n = Rational::from_integer(self.modulus as i64);
        let reduced = lambda - n * (lambda / n).floor();
        self.offsets.contains(&reduced)
    }
}

/// Merges overlapping or adjacent intervals of one set.
fn merge_intervals(set: &[RationalInterval]) -> Vec<RationalInterval> {
    let mut sorted: Vec<RationalInterval> = set.to_vec();
    sorted.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    let mut merged: Vec<RationalInterval> = Vec::with_capacity(sorted.len());
    for iv in sorted {
        match merged.last_mut() {
            Some(last) if iv.lo <= last.hi => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => merged.push(iv),
        }
    }
    merged
}

/// Puts every set on one common grid `[l/N, (l+1)/N)`.
///
/// N is the least common multiple of the denominators of all (merged)
/// endpoints, so each output support represents its input set exactly.
pub fn normalize_supports(sets: &[Vec<RationalInterval>]) -> Result<(usize, Vec<GridSupport>)> {
    if sets.is_empty() {
        return Err(Error::InvalidInput("no support sets given".into()));
    }
    let merged: Vec<Vec<RationalInterval>> = sets.iter().map(|s| merge_intervals(s)).collect();
    let modulus = merged
        .iter()
        .flatten()
        .flat_map(|iv| [*iv.lo.denom(), *iv.hi.denom()])
        .fold(1i64, |acc, d| acc.lcm(&d));
    let n = Rational::from_integer(modulus);
    let supports = merged
        .iter()
        .map(|set| {
            let cells = set.iter().flat_map(|iv| {
                let lo = (iv.lo * n).to_integer() as usize;
                let hi = (iv.hi * n).to_integer() as usize;
                lo..hi
            });
            GridSupport::new(modulus as usize, cells)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((modulus as usize, supports))
}

/// Lebesgue measure of a finite union of rational intervals.
pub fn measure_of(set: &[RationalInterval]) -> Rational {
    merge_intervals(set)
        .iter()
        .fold(Rational::from_integer(0), |acc, iv| acc + iv.length())
}

/// Uniform density of a periodic frequency set: `|offsets| / N`.
pub fn beurling_density(sys: &CosetSystem) -> Rational {
    Rational::new(sys.len() as i64, sys.modulus as i64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nc1Entry {
    pub measure: Rational,
    pub density: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nc2Entry {
    pub covering_density: Rational,
    pub base_measure: Rational,
    pub pass: bool,
}

/// Per-index verdicts of the two necessary conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcReport {
    pub nc1: Vec<Nc1Entry>,
    pub nc2: Vec<Nc2Entry>,
}

impl NcReport {
    pub fn nc1_pass(&self) -> bool {
        self.nc1.iter().all(|e| e.pass)
    }

    pub fn nc2_pass(&self) -> bool {
        self.nc2.iter().all(|e| e.pass)
    }

    pub fn pass(&self) -> bool {
        self.nc1_pass() && self.nc2_pass()
    }
}

/// Checks `|S_k| >= D(Λ_k)` and `D(⋃_{l : S_l ⊇ I_k} Λ_l) >= |I_k|` for all k.
pub fn check_necessary_conditions(
    base_cells: &[GridSupport],
    supports: &[GridSupport],
    freqs: &[CosetSystem],
) -> Result<NcReport> {
    let k = base_cells.len();
    if supports.len() != k || freqs.len() != k {
        return Err(Error::InvalidInput(format!(
            "expected equally many base cells, supports and frequency sets, got {}, {}, {}",
            k,
            supports.len(),
            freqs.len()
        )));
    }
    if k == 0 {
        return Ok(NcReport { nc1: vec![], nc2: vec![] });
    }
    let n = base_cells[0].modulus();
    let moduli = base_cells
        .iter()
        .map(GridSupport::modulus)
        .chain(supports.iter().map(GridSupport::modulus))
        .chain(freqs.iter().map(CosetSystem::modulus));
    if let Some(bad) = moduli.into_iter().find(|&m| m != n) {
        return Err(Error::IncompatibleGrids(format!("moduli {n} and {bad}")));
    }
    let mut seen = BTreeSet::new();
    for base in base_cells {
        for &c in base.cells() {
            if !seen.insert(c) {
                return Err(Error::InvalidConfiguration(format!(
                    "base cells overlap in cell {c}"
                )));
            }
        }
    }
    for (idx, s) in supports.iter().enumerate() {
        // S_k must be a union of whole base pieces.
        for base in base_cells {
            let hit = base.cells().iter().filter(|&&c| s.contains(c)).count();
            if hit != 0 && hit != base.cells().len() {
                return Err(Error::InvalidConfiguration(format!(
                    "support {} is not a union of base cells",
                    idx + 1
                )));
            }
        }
        if s.cells().iter().any(|&c| !seen.contains(&c)) {
            return Err(Error::InvalidConfiguration(format!(
                "support {} leaves the union of base cells",
                idx + 1
            )));
        }
    }

    let nc1 = supports
        .iter()
        .zip(freqs)
        .map(|(s, f)| {
            let measure = s.measure();
            let density = beurling_density(f);
            Nc1Entry {
                measure,
                density,
                pass: measure >= density,
            }
        })
        .collect();

    let nc2 = base_cells
        .iter()
        .map(|base| {
            let covering: BTreeSet<Rational> = supports
                .iter()
                .zip(freqs)
                .filter(|(s, _)| base.is_subset_of(s))
                .flat_map(|(_, f)| f.offsets().iter().copied())
                .collect();
            let covering_density = Rational::new(covering.len() as i64, n as i64);
            let base_measure = base.measure();
            Nc2Entry {
                covering_density,
                base_measure,
                pass: covering_density >= base_measure,
            }
        })
        .collect();

    Ok(NcReport { nc1, nc2 })
}
