//! Permutation search for masked determinants, and the frequency assignments
//! built from it.
//!
//! For `A ∈ C^{K×K}` and a 0/1 mask `M` with `R` all-ones generalized
//! diagonals there is a permutation ρ with
//! `|det((P_ρ A) ⊙ M)| ≥ R·|det A| / K!`, where row k of `P_ρ A` is row ρ(k)
//! of `A`. This follows from `Σ_ρ sgn(ρ) det((P_ρ A) ⊙ M) = R·det A`.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{normalize_supports, CosetSystem, GridSupport, Rational, RationalInterval};
use crate::linalg::{det, det_in_place, root_of_unity, ComplexMatrix};
use crate::mask::{permanent_binary, BinaryMask};
use crate::masked::{build_integer_masked_matrix, classify_system, Classification, MaskedMatrix, Verdict};

/// Largest size accepted by the exhaustive lemma search.
pub const EXHAUSTIVE_MAX_SIZE: usize = 10;
/// Largest size accepted by the first-feasible lemma search.
pub const FIRST_FEASIBLE_MAX_SIZE: usize = 20;
/// Largest size for which the construction uses exhaustive search.
pub const CONSTRUCT_EXHAUSTIVE_MAX_SIZE: usize = 8;

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All permutations of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Permutations {
    current: Option<Vec<usize>>,
    remaining: u128,
}

impl Permutations {
    pub fn new(n: usize) -> Self {
        Self::range(n, 0, factorial(n))
    }

    /// `count` permutations starting at lexicographic rank `start`.
    pub fn range(n: usize, start: u128, count: u128) -> Self {
        let total = factorial(n);
        let count = count.min(total.saturating_sub(start));
        let current = (count > 0).then(|| unrank(n, start));
        Self {
            current,
            remaining: count,
        }
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.current.clone()?;
        self.remaining -= 1;
        if self.remaining > 0 {
            if let Some(cur) = self.current.as_mut() {
                next_permutation(cur);
            }
        }
        Some(out)
    }
}

/// Advances to the lexicographic successor; returns false at the last one.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Lexicographic rank of a permutation of `0..n`.
pub fn rank(p: &[usize]) -> u128 {
    let n = p.len();
    let mut r = 0u128;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count() as u128;
        r += smaller * factorial(n - 1 - i);
    }
    r
}

/// Permutation of `0..n` with lexicographic rank `r` (taken modulo n!).
pub fn unrank(n: usize, r: u128) -> Vec<usize> {
    let mut r = r % factorial(n).max(1);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let f = factorial(n - 1 - i);
        let idx = (r / f) as usize;
        r %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// +1 for even, -1 for odd permutations.
pub fn sign(p: &[usize]) -> i8 {
    let mut seen = vec![false; p.len()];
    let mut transpositions = 0usize;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        transpositions += len - 1;
    }
    if transpositions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PermutationAssignment {
    map: Vec<usize>,
    sign: i8,
}

impl PermutationAssignment {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let distinct: BTreeSet<usize> = map.iter().copied().collect();
        if distinct.len() != n || map.iter().any(|&x| x >= n) {
            return Err(Error::InvalidInput(format!("{map:?} is not a permutation of 0..{n}")));
        }
        let sign = sign(&map);
        Ok(Self { map, sign })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            sign: 1,
        }
    }

    /// Parses a comma-separated 0-based list such as `0,2,1,3`.
    pub fn parse(s: &str) -> Result<Self> {
        let map = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("permutation entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn rank(&self) -> u128 {
        rank(&self.map)
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }
}

impl fmt::Display for PermutationAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.map.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    FirstFeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaResult {
    pub rho: PermutationAssignment,
    pub det_modulus: f64,
    pub guarantee: f64,
    pub r: u128,
}

fn check_lemma_shapes(a: &ComplexMatrix, m: &BinaryMask) -> Result<usize> {
    let k = a.rows();
    if !a.is_square() || m.rows() != k || m.cols() != k {
        return Err(Error::Shape(format!(
            "lemma search needs square A and M of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            m.rows(),
            m.cols()
        )));
    }
    if k == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    Ok(k)
}

/// `det((P_ρ A) ⊙ M)`.
pub fn masked_permuted_det(a: &ComplexMatrix, m: &BinaryMask, rho: &[usize]) -> Complex64 {
    let k = a.rows();
    let mut buf = vec![Complex64::new(0.0, 0.0); k * k];
    fill_masked(a, m, rho, &mut buf);
    det_in_place(k, &mut buf)
}

fn fill_masked(a: &ComplexMatrix, m: &BinaryMask, rho: &[usize], buf: &mut [Complex64]) {
    let k = a.rows();
    for r in 0..k {
        let src = a.row(rho[r]);
        for c in 0..k {
            buf[r * k + c] = if m.get(r, c) {
                src[c]
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }
}

fn meets(det_modulus: f64, guarantee: f64) -> bool {
    det_modulus >= guarantee - 1e-9 * guarantee.max(1.0)
}

fn chunks(total: u128) -> Vec<(u128, u128)> {
    let target = 256u128;
    let size = (total / target).max(1);
    let mut out = Vec::new();
    let mut start = 0;
    while start < total {
        let len = size.min(total - start);
        out.push((start, len));
        start += len;
    }
    out
}

/// Finds a permutation meeting the averaging guarantee.
///
/// Exhaustive mode maximizes `|det((P_ρ A) ⊙ M)|`, ties going to the
/// lexicographically smallest ρ; first-feasible mode returns the
/// lexicographically first ρ meeting the guarantee. Both are independent of
/// the number of worker threads.
pub fn lemma_search(a: &ComplexMatrix, m: &BinaryMask, mode: SearchMode) -> Result<LemmaResult> {
    let k = check_lemma_shapes(a, m)?;
    let limit = match mode {
        SearchMode::Exhaustive => EXHAUSTIVE_MAX_SIZE,
        SearchMode::FirstFeasible => FIRST_FEASIBLE_MAX_SIZE,
    };
    if k > limit {
        return Err(Error::SizeLimit(format!("{mode:?} search limited to K <= {limit}, got {k}")));
    }
    let r = permanent_binary(m)?;
    let det_a = det(a)?.norm();
    let guarantee = r as f64 * det_a / factorial(k) as f64;
    let ranges = chunks(factorial(k));
    let found = match mode {
        SearchMode::Exhaustive => ranges
            .par_iter()
            .map(|&(start, len)| {
                let mut buf = vec![Complex64::new(0.0, 0.0); k * k];
                let mut best: Option<(f64, u128)> = None;
                for (i, p) in Permutations::range(k, start, len).enumerate() {
                    fill_masked(a, m, &p, &mut buf);
                    let d = det_in_place(k, &mut buf).norm();
                    if best.map_or(true, |(b, _)| d > b) {
                        best = Some((d, start + i as u128));
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<(f64, u128)>, (d, rk)| match acc {
                Some((b, brk)) if b > d || (b == d && brk < rk) => Some((b, brk)),
                _ => Some((d, rk)),
            }),
        SearchMode::FirstFeasible => ranges.par_iter().find_map_first(|&(start, len)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); k * k];
            Permutations::range(k, start, len)
                .enumerate()
                .find_map(|(i, p)| {
                    fill_masked(a, m, &p, &mut buf);
                    let d = det_in_place(k, &mut buf).norm();
                    meets(d, guarantee).then_some((d, start + i as u128))
                })
        }),
    };
    let (det_modulus, rk) = found.ok_or_else(|| {
        Error::Internal(format!(
            "no permutation meets the guarantee {guarantee:e} (R = {r}, |det A| = {det_a:e})"
        ))
    })?;
    Ok(LemmaResult {
        rho: PermutationAssignment::new(unrank(k, rk))?,
        det_modulus,
        guarantee,
        r,
    })
}

/// A frequency assignment making the restricted exponentials a Riesz basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub modulus: usize,
    pub rho: PermutationAssignment,
    /// `c_k = (ρ(k) + 1) mod N`.
    pub offsets: Vec<usize>,
    pub cosets: Vec<CosetSystem>,
    pub lemma: LemmaResult,
    pub matrix: MaskedMatrix,
    pub classification: Classification,
}

/// The matrix with rows `e^{-2πi (r+1) ℓ/N}` over the listed cells.
pub fn frequency_kernel(modulus: usize, cells: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(cells.len(), cells.len(), |r, c| {
        root_of_unity(modulus, ((r + 1) * cells[c]) % modulus)
    })
}

fn validate_theorem1_input(modulus: usize, cell_of_k: &[usize], masks: &[GridSupport]) -> Result<Vec<usize>> {
    let k = cell_of_k.len();
    let bad = |msg: String| Err(Error::InvalidConfiguration(msg));
    if modulus == 0 || k == 0 {
        return bad("need a positive modulus and at least one cell".into());
    }
    if k > modulus {
        return bad(format!("{k} cells exceed modulus {modulus}"));
    }
    if masks.len() != k {
        return bad(format!("{} masks for {k} cells", masks.len()));
    }
    let cells: BTreeSet<usize> = cell_of_k.iter().copied().collect();
    if cells.len() != k || cells.iter().any(|&c| c >= modulus) {
        return bad(format!("cells {cell_of_k:?} must be distinct and below {modulus}"));
    }
    for (i, mask) in masks.iter().enumerate() {
        if mask.modulus() != modulus {
            return bad(format!("mask {i} lives on Z_{}", mask.modulus()));
        }
        if !mask.contains(cell_of_k[i]) {
            return bad(format!("mask {i} does not contain its cell {}", cell_of_k[i]));
        }
        if let Some(c) = mask.cells().iter().find(|c| !cells.contains(c)) {
            return bad(format!("mask {i} contains cell {c} outside the listed cells"));
        }
    }
    Ok(cells.into_iter().collect())
}

fn assemble(modulus: usize, masks: &[GridSupport], rho: &PermutationAssignment) -> Result<(Vec<usize>, MaskedMatrix)> {
    let offsets: Vec<usize> = rho.map().iter().map(|&r| (r + 1) % modulus).collect();
    let matrix = build_integer_masked_matrix(modulus, &offsets, masks)?;
    Ok((offsets, matrix))
}

fn lemma_inputs(modulus: usize, cell_of_k: &[usize], masks: &[GridSupport]) -> Result<(ComplexMatrix, BinaryMask)> {
    let labels = validate_theorem1_input(modulus, cell_of_k, masks)?;
    let a = frequency_kernel(modulus, &labels);
    let m = BinaryMask::from_fn(labels.len(), labels.len(), |r, c| masks[r].contains(labels[c]));
    Ok((a, m))
}

/// Chooses `Λ_k = N·Z + c_k` for masks `S_k ∋ cell_of_k[k]` so that the
/// system `e^{2πiλ·}χ_{S_k}` is a Riesz basis for the union of the cells.
pub fn theorem1_construct(modulus: usize, cell_of_k: &[usize], masks: &[GridSupport]) -> Result<Construction> {
    let (a, m) = lemma_inputs(modulus, cell_of_k, masks)?;
    let mode = if cell_of_k.len() <= CONSTRUCT_EXHAUSTIVE_MAX_SIZE {
        SearchMode::Exhaustive
    } else {
        SearchMode::FirstFeasible
    };
    let lemma = lemma_search(&a, &m, mode)?;
    finish_construction(modulus, masks, lemma)
}

/// Re-derives the construction for a given ρ instead of searching.
pub fn theorem1_with_rho(
    modulus: usize,
    cell_of_k: &[usize],
    masks: &[GridSupport],
    rho: &PermutationAssignment,
) -> Result<Construction> {
    let (a, m) = lemma_inputs(modulus, cell_of_k, masks)?;
    if rho.size() != cell_of_k.len() {
        return Err(Error::InvalidConfiguration(format!(
            "permutation of size {} for {} cells",
            rho.size(),
            cell_of_k.len()
        )));
    }
    let r = permanent_binary(&m)?;
    let k = cell_of_k.len();
    let lemma = LemmaResult {
        rho: rho.clone(),
        det_modulus: masked_permuted_det(&a, &m, rho.map()).norm(),
        guarantee: r as f64 * det(&a)?.norm() / factorial(k) as f64,
        r,
    };
    let (offsets, matrix) = assemble(modulus, masks, rho)?;
    let classification = classify_system(&matrix);
    Ok(Construction {
        modulus,
        rho: rho.clone(),
        cosets: offsets
            .iter()
            .map(|&c| CosetSystem::integer(modulus, [c]))
            .collect::<Result<_>>()?,
        offsets,
        lemma,
        matrix,
        classification,
    })
}

fn finish_construction(modulus: usize, masks: &[GridSupport], lemma: LemmaResult) -> Result<Construction> {
    let (offsets, matrix) = assemble(modulus, masks, &lemma.rho)?;
    let classification = classify_system(&matrix);
    if classification.verdict != Verdict::RieszBasis {
        return Err(Error::Internal(format!(
            "permutation {} gives verdict {} (sigma_min = {:e}, |det| = {:e}, guarantee = {:e})",
            lemma.rho,
            classification.verdict.as_str(),
            classification.sigma_min,
            lemma.det_modulus,
            lemma.guarantee
        )));
    }
    let cosets = offsets
        .iter()
        .map(|&c| CosetSystem::integer(modulus, [c]))
        .collect::<Result<_>>()?;
    Ok(Construction {
        modulus,
        rho: lemma.rho.clone(),
        offsets,
        cosets,
        lemma,
        matrix,
        classification,
    })
}

/// Every ρ whose induced system is a Riesz basis, in lexicographic order.
pub fn feasible_permutations(
    modulus: usize,
    cell_of_k: &[usize],
    masks: &[GridSupport],
) -> Result<Vec<PermutationAssignment>> {
    let (_, _) = lemma_inputs(modulus, cell_of_k, masks)?;
    let k = cell_of_k.len();
    if k > CONSTRUCT_EXHAUSTIVE_MAX_SIZE {
        return Err(Error::SizeLimit(format!(
            "listing feasible permutations limited to K <= {CONSTRUCT_EXHAUSTIVE_MAX_SIZE}"
        )));
    }
    let perms: Vec<Vec<usize>> = Permutations::new(k).collect();
    perms
        .into_par_iter()
        .map(|p| {
            let rho = PermutationAssignment::new(p)?;
            let (_, matrix) = assemble(modulus, masks, &rho)?;
            Ok((classify_system(&matrix).verdict == Verdict::RieszBasis).then_some(rho))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Output of the rational-endpoint pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryResult {
    pub modulus: usize,
    pub supports: Vec<GridSupport>,
    /// Covered cells in ascending order.
    pub cells: Vec<usize>,
    /// Index of the set each covered cell is assigned to.
    pub owner: Vec<usize>,
    /// `Λ_k`, possibly empty.
    pub frequencies: Vec<CosetSystem>,
    pub construction: Construction,
}

impl CorollaryResult {
    pub fn frequency_offsets(&self, k: usize) -> Vec<usize> {
        self.frequencies[k]
            .offsets()
            .iter()
            .map(|c| c.to_integer() as usize)
            .collect()
    }
}

/// Pairwise disjoint `Λ_k` for finite unions of rational intervals `S_k`.
///
/// Each covered cell is assigned to the smallest-index set containing it;
/// `Λ_k` collects the cosets chosen for the cells assigned to `S_k`.
pub fn corollary_construct(sets: &[Vec<RationalInterval>]) -> Result<CorollaryResult> {
    corollary_with(sets, None)
}

/// As [`corollary_construct`], but with ρ fixed over the covered cells.
pub fn corollary_with_rho(sets: &[Vec<RationalInterval>], rho: &PermutationAssignment) -> Result<CorollaryResult> {
    corollary_with(sets, Some(rho))
}

fn corollary_with(sets: &[Vec<RationalInterval>], rho: Option<&PermutationAssignment>) -> Result<CorollaryResult> {
    if sets.iter().any(Vec::is_empty) {
        return Err(Error::InvalidInput("every set needs at least one interval".into()));
    }
    let (modulus, supports) = normalize_supports(sets)?;
    let cells: Vec<usize> = supports
        .iter()
        .flat_map(|s| s.cells().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let owner: Vec<usize> = cells
        .iter()
        .map(|&c| supports.iter().position(|s| s.contains(c)).unwrap_or(0))
        .collect();
    let masks: Vec<GridSupport> = owner.iter().map(|&k| supports[k].clone()).collect();
    let construction = match rho {
        Some(rho) => theorem1_with_rho(modulus, &cells, &masks, rho)?,
        None => theorem1_construct(modulus, &cells, &masks)?,
    };
    let frequencies = (0..supports.len())
        .map(|k| {
            let offsets: Vec<Rational> = owner
                .iter()
                .zip(&construction.offsets)
                .filter(|(&o, _)| o == k)
                .map(|(_, &c)| Rational::from_integer(c as i64))
                .collect();
            CosetSystem::new(modulus, offsets)
        })
        .collect::<Result<_>>()?;
    Ok(CorollaryResult {
        modulus,
        supports,
        cells,
        owner,
        frequencies,
        construction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize, cells: &[usize]) -> GridSupport {
        GridSupport::new(n, cells.iter().copied()).unwrap()
    }

    fn iv(a: i64, b: i64, c: i64, d: i64) -> RationalInterval {
        RationalInterval::new(Rational::new(a, b), Rational::new(c, d)).unwrap()
    }

    fn alternating_masks() -> Vec<GridSupport> {
        vec![g(4, &[0, 2]), g(4, &[0, 1, 2, 3]), g(4, &[0, 2]), g(4, &[0, 1, 2, 3])]
    }

    fn random_matrix(rng: &mut ChaCha8Rng, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(k, k, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    /// Leibniz expansion, independent of the elimination code.
    fn leibniz(m: &ComplexMatrix) -> Complex64 {
        let k = m.rows();
        Permutations::new(k)
            .map(|p| {
                let prod: Complex64 = (0..k).map(|r| m.get(r, p[r])).product();
                prod * sign(&p) as f64
            })
            .sum()
    }

    #[test]
    fn enumeration_order_and_ranks() {
        let all: Vec<Vec<usize>> = Permutations::new(3).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        for n in 0..=6 {
            let perms: Vec<Vec<usize>> = Permutations::new(n).collect();
            assert_eq!(perms.len() as u128, factorial(n));
            for (i, p) in perms.iter().enumerate() {
                assert_eq!(rank(p), i as u128);
                assert_eq!(&unrank(n, i as u128), p);
            }
        }
        let tail: Vec<Vec<usize>> = Permutations::range(4, 22, 10).collect();
        assert_eq!(tail, vec![vec![3, 2, 0, 1], vec![3, 2, 1, 0]]);
    }

    #[test]
    fn signs() {
        assert_eq!(sign(&[0, 1, 2]), 1);
        assert_eq!(sign(&[1, 0, 2]), -1);
        assert_eq!(sign(&[1, 2, 0]), 1);
        assert_eq!(PermutationAssignment::parse("0,2,1,3").unwrap().sign(), -1);
        assert!(PermutationAssignment::parse("0,0,1").is_err());
        assert!(PermutationAssignment::parse("0,x").is_err());
    }

    #[test]
    fn identity_lemma() {
        for k in 1..=5 {
            let res = lemma_search(&ComplexMatrix::identity(k), &BinaryMask::identity(k), SearchMode::Exhaustive).unwrap();
            assert!(res.rho.is_identity());
            assert!((res.det_modulus - 1.0).abs() < 1e-12);
            assert_eq!(res.r, 1);
            assert!((res.guarantee - 1.0 / factorial(k) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn alternating_lemma() {
        let labels = [0, 1, 2, 3];
        let a = frequency_kernel(4, &labels);
        let masks = alternating_masks();
        let m = BinaryMask::from_fn(4, 4, |r, c| masks[r].contains(c));
        let res = lemma_search(&a, &m, SearchMode::Exhaustive).unwrap();
        assert_eq!(res.r, 4);
        assert!((res.guarantee - 8.0 / 3.0).abs() < 1e-12);
        assert!(res.det_modulus >= res.guarantee);
        let known = [0, 2, 1, 3];
        assert!(masked_permuted_det(&a, &m, &known).norm() >= res.guarantee);
        let ff = lemma_search(&a, &m, SearchMode::FirstFeasible).unwrap();
        assert!(ff.det_modulus >= ff.guarantee - 1e-9);
    }

    #[test]
    fn all_ones_mask_attains_guarantee() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=5 {
            let a = random_matrix(&mut rng, k);
            let m = BinaryMask::ones(k, k);
            let res = lemma_search(&a, &m, SearchMode::FirstFeasible).unwrap();
            assert!(res.rho.is_identity());
            assert!((res.det_modulus - res.guarantee).abs() <= 1e-9 * res.guarantee.max(1.0));
        }
    }

    #[test]
    fn lemma_errors() {
        let a = ComplexMatrix::identity(3);
        assert!(matches!(
            lemma_search(&a, &BinaryMask::ones(2, 2), SearchMode::Exhaustive),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            lemma_search(&ComplexMatrix::identity(11), &BinaryMask::ones(11, 11), SearchMode::Exhaustive),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn averaging_identity_exhaustive_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in 1..=5usize {
            for _ in 0..20 {
                let a = random_matrix(&mut rng, k);
                let m = BinaryMask::from_fn(k, k, |_, _| rng.gen_bool(0.6));
                let lhs: Complex64 = Permutations::new(k)
                    .map(|p| masked_permuted_det(&a, &m, &p) * sign(&p) as f64)
                    .sum();
                let rhs = leibniz(&a) * permanent_binary(&m).unwrap() as f64;
                assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm().max(1e-300) + 1e-12);
            }
        }
    }

    #[test]
    fn exhaustive_is_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let k = rng.gen_range(1..=6usize);
            let a = random_matrix(&mut rng, k);
            let m = BinaryMask::from_fn(k, k, |r, c| r == c || rng.gen_bool(0.5));
            let res = lemma_search(&a, &m, SearchMode::Exhaustive).unwrap();
            let brute = Permutations::new(k)
                .map(|p| {
                    let mut mm = a.permute_rows(&p);
                    mm = mm.hadamard_mask(&m).unwrap();
                    leibniz(&mm).norm()
                })
                .fold(0.0, f64::max);
            assert!(res.det_modulus >= res.guarantee - 1e-9);
            assert!(res.det_modulus >= brute * (1.0 - 1e-9));
        }
    }

    #[test]
    fn search_is_thread_count_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a = random_matrix(&mut rng, 7);
        let m = BinaryMask::from_fn(7, 7, |r, c| r == c || rng.gen_bool(0.4));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    (
                        lemma_search(&a, &m, SearchMode::Exhaustive).unwrap(),
                        lemma_search(&a, &m, SearchMode::FirstFeasible).unwrap(),
                    )
                })
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(8));
    }

    #[test]
    fn construct_alternating_masks() {
        let masks = alternating_masks();
        let c = theorem1_construct(4, &[0, 1, 2, 3], &masks).unwrap();
        assert_eq!(c.classification.verdict, Verdict::RieszBasis);
        let feasible = feasible_permutations(4, &[0, 1, 2, 3], &masks).unwrap();
        assert!(feasible.contains(&PermutationAssignment::parse("0,2,1,3").unwrap()));
        assert!(!feasible.contains(&PermutationAssignment::identity(4)));
        assert!(feasible.contains(&c.rho));
        let known = theorem1_with_rho(4, &[0, 1, 2, 3], &masks, &PermutationAssignment::parse("0,2,1,3").unwrap()).unwrap();
        assert_eq!(known.offsets, vec![1, 3, 2, 0]);
        assert_eq!(known.classification.verdict, Verdict::RieszBasis);
        let id = theorem1_with_rho(4, &[0, 1, 2, 3], &masks, &PermutationAssignment::identity(4)).unwrap();
        assert_eq!(id.classification.verdict, Verdict::Neither);
        assert_eq!(id.classification.exact_singular, Some(true));
    }

    #[test]
    fn theorem1_trivial_cases() {
        let c = theorem1_construct(3, &[2], &[g(3, &[2])]).unwrap();
        assert_eq!(c.offsets, vec![1]);
        assert_eq!(c.classification.verdict, Verdict::RieszBasis);
        let full = vec![g(3, &[0, 1, 2]); 3];
        assert_eq!(feasible_permutations(3, &[0, 1, 2], &full).unwrap().len(), 6);
    }

    #[test]
    fn theorem1_rejects_bad_input() {
        assert!(matches!(
            theorem1_construct(4, &[0, 0], &[g(4, &[0]), g(4, &[0])]),
            Err(Error::InvalidConfiguration(_))
        ));
        assert!(matches!(
            theorem1_construct(4, &[0, 1], &[g(4, &[1]), g(4, &[1])]),
            Err(Error::InvalidConfiguration(_))
        ));
        assert!(matches!(
            theorem1_construct(4, &[0, 1], &[g(4, &[0, 2]), g(4, &[1])]),
            Err(Error::InvalidConfiguration(_))
        ));
        assert!(matches!(
            theorem1_construct(2, &[0, 1, 2], &[g(2, &[0]), g(2, &[1]), g(2, &[1])]),
            Err(Error::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn theorem1_random_masks_always_succeed() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let n = rng.gen_range(1..=8usize);
            let k = rng.gen_range(1..=n);
            let mut pool: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                pool.swap(i, rng.gen_range(0..=i));
            }
            let cells: Vec<usize> = pool[..k].to_vec();
            let masks: Vec<GridSupport> = cells
                .iter()
                .map(|&own| {
                    let extra: Vec<usize> = cells.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                    g(n, &[vec![own], extra].concat())
                })
                .collect();
            let c = theorem1_construct(n, &cells, &masks).unwrap();
            assert_eq!(c.classification.verdict, Verdict::RieszBasis);
            assert!(c.lemma.det_modulus >= c.lemma.guarantee - 1e-9);
        }
    }

    #[test]
    fn corollary_whole_interval() {
        let res = corollary_construct(&[vec![iv(0, 1, 1, 1)]]).unwrap();
        assert_eq!(res.modulus, 1);
        assert_eq!(res.frequency_offsets(0), vec![0]);
        assert_eq!(res.construction.classification.verdict, Verdict::RieszBasis);
    }

    #[test]
    fn corollary_two_overlapping_sets() {
        let res = corollary_construct(&[vec![iv(0, 1, 1, 2)], vec![iv(1, 3, 1, 1)]]).unwrap();
        assert_eq!(res.modulus, 6);
        assert_eq!(res.owner, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(res.construction.classification.verdict, Verdict::RieszBasis);
        let mut all: Vec<usize> = res.frequency_offsets(0);
        all.extend(res.frequency_offsets(1));
        all.sort();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn corollary_duplicate_sets_leave_empty_frequencies() {
        let res = corollary_construct(&[vec![iv(0, 1, 1, 2)], vec![iv(0, 1, 1, 2)]]).unwrap();
        assert_eq!(res.modulus, 2);
        assert_eq!(res.cells, vec![0]);
        assert_eq!(res.frequency_offsets(0), vec![1]);
        assert!(res.frequencies[1].is_empty());
        assert!(matches!(corollary_construct(&[]), Err(Error::InvalidInput(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rank_roundtrip(n in 0usize..9, seed in any::<u64>()) {
            let r = seed as u128 % factorial(n).max(1);
            prop_assert_eq!(rank(&unrank(n, r)), r);
        }

        #[test]
        fn covering_corollary_uses_every_residue(
            cuts in proptest::collection::btree_set(1i64..6, 0..4),
            extra in proptest::collection::vec((0i64..6, 1i64..4), 0..3),
        ) {
            // A partition of [0,1) into consecutive intervals plus some
            // overlapping extra sets.
            let mut points: Vec<i64> = vec![0];
            points.extend(cuts.iter().copied());
            points.push(6);
            let mut sets: Vec<Vec<RationalInterval>> = points
                .windows(2)
                .map(|w| vec![iv(w[0], 6, w[1], 6)])
                .collect();
            for (lo, len) in extra {
                let hi = (lo + len).min(6);
                if hi > lo {
                    sets.push(vec![iv(lo, 6, hi, 6)]);
                }
            }
            let res = corollary_construct(&sets).unwrap();
            prop_assert_eq!(res.construction.classification.verdict, Verdict::RieszBasis);
            let mut all: Vec<usize> = (0..sets.len()).flat_map(|k| res.frequency_offsets(k)).collect();
            all.sort();
            prop_assert_eq!(all, (0..res.modulus).collect::<Vec<_>>());
        }
    }
}
