//! Three-interval configurations: intervals `I_1, I_2, I_3` partition
//! `[0,1)`, `E(I_k, Λ_k)` is a Riesz basis for `L²(I_k)`, and
//! `S_k = ⋃_{n ∈ L_k} I_n` with `k ∈ L_k`. Every such system is a Riesz
//! basis for `L²[0,1)`; the argument splits into three cases:
//!
//! * (i) `L_k = {k}` for some k;
//! * (ii) some k lies in no other `L_l`;
//! * (*) the complements of the `L_k` are pairwise disjoint, where a
//!   Paley–Wiener perturbation with `λ = sqrt(1 - min α_k)` applies.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CosetSystem, GridSupport};
use crate::linalg::sigma_min;
use crate::masked::{build_masked_matrix, classify_system, Classification};

/// Subset of `{1,2,3}` as a bitmask, bit `k-1` for index k.
pub type Membership = u8;

pub fn membership_from(indices: &[usize]) -> Result<Membership> {
    indices.iter().try_fold(0u8, |acc, &k| {
        if (1..=3).contains(&k) {
            Ok(acc | 1 << (k - 1))
        } else {
            Err(Error::InvalidConfiguration(format!("index {k} outside 1..=3")))
        }
    })
}

pub fn membership_indices(m: Membership) -> Vec<usize> {
    (1..=3).filter(|k| m >> (k - 1) & 1 == 1).collect()
}

fn format_set(m: Membership) -> String {
    let parts: Vec<String> = membership_indices(m).iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleConfig {
    pub membership: [Membership; 3],
    /// Intervals marked empty are dropped before classification.
    pub empty: [bool; 3],
    pub alphas: Option<[f64; 3]>,
}

impl TripleConfig {
    pub fn new(membership: [Membership; 3]) -> Self {
        Self {
            membership,
            empty: [false; 3],
            alphas: None,
        }
    }

    /// Parses `"1,2;2,3;1,3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let sets: Vec<&str> = s.split(';').collect();
        if sets.len() != 3 {
            return Err(Error::Parse(format!("expected three ';'-separated sets, got {s:?}")));
        }
        let mut membership = [0u8; 3];
        for (slot, set) in membership.iter_mut().zip(sets) {
            let idx = set
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("membership entry {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            *slot = membership_from(&idx)?;
        }
        Ok(Self::new(membership))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    CaseI,
    CaseII,
    CaseStar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTag {
    pub kind: CaseKind,
    /// The distinguished index (1-based) for cases (i) and (ii).
    pub k: Option<usize>,
    pub proof_branch: String,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.k) {
            (CaseKind::CaseI, Some(k)) => write!(f, "case_i({k})"),
            (CaseKind::CaseII, Some(k)) => write!(f, "case_ii({k})"),
            _ => write!(f, "case_star"),
        }
    }
}

const L1_ORDER: [Membership; 4] = [0b001, 0b011, 0b101, 0b111];
const L2_ORDER: [Membership; 4] = [0b010, 0b011, 0b110, 0b111];
const L3_ORDER: [Membership; 4] = [0b100, 0b101, 0b110, 0b111];

/// Position in the enumeration: case number from `L_3`, then `L_1`, then `L_2`.
fn branch_id(m: &[Membership; 3]) -> String {
    let pos = |order: &[Membership; 4], x| order.iter().position(|&o| o == x).unwrap_or(0);
    let case = pos(&L3_ORDER, m[2]) + 1;
    let sub = 4 * pos(&L1_ORDER, m[0]) + pos(&L2_ORDER, m[1]) + 1;
    format!("{case}-{sub}")
}

fn case_i(m: &[Membership], present: &[usize]) -> Option<usize> {
    present.iter().copied().find(|&k| m[k - 1] == 1 << (k - 1))
}

fn case_ii(m: &[Membership], present: &[usize]) -> Option<usize> {
    present
        .iter()
        .copied()
        .find(|&k| present.iter().all(|&l| l == k || m[l - 1] >> (k - 1) & 1 == 0))
}

fn case_star(m: &[Membership], present: &[usize]) -> bool {
    let all: Membership = present.iter().fold(0, |acc, &k| acc | 1 << (k - 1));
    let comps: Vec<Membership> = present.iter().map(|&k| all & !m[k - 1]).collect();
    (0..comps.len()).all(|a| (a + 1..comps.len()).all(|b| comps[a] & comps[b] == 0))
}

/// Tags a configuration with the first applicable case, (i) before (ii)
/// before (*), and the smallest k within a case.
pub fn classify_triple(cfg: &TripleConfig) -> Result<CaseTag> {
    let present: Vec<usize> = (1..=3).filter(|&k| !cfg.empty[k - 1]).collect();
    if present.is_empty() {
        return Err(Error::InvalidConfiguration("all intervals are empty".into()));
    }
    let all: Membership = present.iter().fold(0, |acc, &k| acc | 1 << (k - 1));
    let m: Vec<Membership> = cfg.membership.iter().map(|&x| x & all).collect();
    for &k in &present {
        if m[k - 1] >> (k - 1) & 1 == 0 {
            return Err(Error::InvalidConfiguration(format!(
                "L_{k} = {} does not contain {k}",
                format_set(cfg.membership[k - 1])
            )));
        }
    }
    let proof_branch = match present.len() {
        3 => branch_id(&cfg.membership),
        2 => {
            let (a, b) = (present[0], present[1]);
            let full = (1 << (a - 1)) | (1 << (b - 1));
            let sub = 2 * usize::from(m[a - 1] == full) + usize::from(m[b - 1] == full) + 1;
            format!("two-{sub}")
        }
        _ => "one".to_string(),
    };
    let (kind, k) = if let Some(k) = case_i(&m, &present) {
        (CaseKind::CaseI, Some(k))
    } else if let Some(k) = case_ii(&m, &present) {
        (CaseKind::CaseII, Some(k))
    } else if case_star(&m, &present) {
        (CaseKind::CaseStar, None)
    } else {
        return Err(Error::Internal(format!(
            "no case applies to {}",
            m.iter().map(|&x| format_set(x)).collect::<Vec<_>>().join(" ")
        )));
    };
    Ok(CaseTag {
        kind,
        k,
        proof_branch,
    })
}

/// Whether the condition named by `kind` (and `k`) holds.
pub fn case_holds(membership: &[Membership; 3], kind: CaseKind, k: Option<usize>) -> bool {
    let present = [1, 2, 3];
    match (kind, k) {
        (CaseKind::CaseI, Some(k)) => membership[k - 1] == 1 << (k - 1),
        (CaseKind::CaseII, Some(k)) => present
            .iter()
            .all(|&l| l == k || membership[l - 1] >> (k - 1) & 1 == 0),
        (CaseKind::CaseStar, _) => case_star(membership, &present),
        _ => false,
    }
}

/// All 64 admissible memberships in enumeration order.
pub fn all_memberships() -> Vec<[Membership; 3]> {
    L3_ORDER
        .iter()
        .flat_map(|&l3| {
            L1_ORDER
                .iter()
                .flat_map(move |&l1| L2_ORDER.iter().map(move |&l2| [l1, l2, l3]))
        })
        .collect()
}

/// The case table as CSV: `branch,L1,L2,L3,case`.
pub fn case_table_csv() -> Result<String> {
    let mut out = String::from("branch,L1,L2,L3,case\n");
    for m in all_memberships() {
        let tag = classify_triple(&TripleConfig::new(m))?;
        out.push_str(&format!(
            "{},\"{}\",\"{}\",\"{}\",{}\n",
            tag.proof_branch,
            format_set(m[0]),
            format_set(m[1]),
            format_set(m[2]),
            tag
        ));
    }
    Ok(out)
}

/// `sqrt(1 - min α_k)` for lower Riesz bounds `α_k ∈ (0, 1]`.
pub fn paley_wiener_lambda(alphas: &[f64; 3]) -> Result<f64> {
    if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::InvalidBound(format!("alpha = {a} outside (0, 1]")));
    }
    let min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((1.0 - min).sqrt())
}

fn check_partition(n: usize, intervals: &[GridSupport], freqs: &[CosetSystem]) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidConfiguration(msg));
    if intervals.len() != freqs.len() {
        return bad(format!("{} intervals for {} frequency sets", intervals.len(), freqs.len()));
    }
    let mut cells = BTreeSet::new();
    for (k, iv) in intervals.iter().enumerate() {
        if iv.modulus() != n {
            return bad(format!("interval {k} lives on Z_{}", iv.modulus()));
        }
        for &c in iv.cells() {
            if !cells.insert(c) {
                return bad(format!("cell {c} belongs to two intervals"));
            }
        }
    }
    if cells.len() != n {
        return bad("intervals do not cover every cell".into());
    }
    let mut residues = BTreeSet::new();
    for (k, f) in freqs.iter().enumerate() {
        if f.modulus() != n {
            return bad(format!("frequency set {k} has modulus {}", f.modulus()));
        }
        if f.len() != intervals[k].cells().len() {
            return bad(format!(
                "Λ_{} has {} cosets for {} cells",
                k + 1,
                f.len(),
                intervals[k].cells().len()
            ));
        }
        for c in f.offsets() {
            if !residues.insert(*c) {
                return bad(format!("offset {c} used twice"));
            }
        }
    }
    Ok(())
}

/// Classifies the union of `e^{2πiλ·}χ_{S_k}`, `λ ∈ Λ_k`, with
/// `S_k = ⋃_{n ∈ membership[k]} I_n` (0-based indices), through the masked
/// matrix with one row per coset.
pub fn cross_check_periodic(
    n: usize,
    intervals: &[GridSupport],
    freqs: &[CosetSystem],
    membership: &[Vec<usize>],
) -> Result<Classification> {
    check_partition(n, intervals, freqs)?;
    if membership.len() != intervals.len() {
        return Err(Error::InvalidConfiguration(format!(
            "{} membership sets for {} intervals",
            membership.len(),
            intervals.len()
        )));
    }
    let mut offsets = Vec::new();
    let mut masks = Vec::new();
    for (k, members) in membership.iter().enumerate() {
        if intervals[k].is_empty() {
            continue;
        }
        if !members.contains(&k) || members.iter().any(|&i| i >= intervals.len()) {
            return Err(Error::InvalidConfiguration(format!(
                "membership {members:?} of interval {k} is not admissible"
            )));
        }
        let support = members
            .iter()
            .try_fold(GridSupport::new(n, [])?, |acc, &i| acc.union(&intervals[i]))?;
        for c in freqs[k].offsets() {
            offsets.push(*c);
            masks.push(support.clone());
        }
    }
    Ok(classify_system(&build_masked_matrix(n, &offsets, &masks)?))
}

/// Lower Riesz bounds `σ_min²/N` of `E(I_k, Λ_k)` in `L²(I_k)`.
pub fn periodic_alphas(n: usize, intervals: &[GridSupport], freqs: &[CosetSystem]) -> Result<Vec<f64>> {
    check_partition(n, intervals, freqs)?;
    intervals
        .iter()
        .zip(freqs)
        .map(|(iv, f)| {
            if iv.is_empty() {
                return Ok(0.0);
            }
            let masks = vec![iv.clone(); f.len()];
            let m = build_masked_matrix(n, f.offsets(), &masks)?;
            let s = sigma_min(m.matrix());
            Ok(s * s / n as f64)
        })
        .collect()
}

/// The N=3 instance `I_k = [(k-1)/3, k/3)`, `Λ_k = 3Z + (k-1)`.
pub fn canonical_n3() -> (Vec<GridSupport>, Vec<CosetSystem>) {
    let intervals = (0..3).map(|k| GridSupport::new(3, [k]).expect("valid cell")).collect();
    let freqs = (0..3).map(|k| CosetSystem::integer(3, [k]).expect("valid coset")).collect();
    (intervals, freqs)
}
