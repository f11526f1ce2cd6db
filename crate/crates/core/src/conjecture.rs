//! Scans over masked and principal submatrices of row-permuted Fourier
//! matrices.
//!
//! Conjecture one: for every N some ρ makes `(P_ρ W_N) ⊙ M` invertible for
//! all 0/1 masks `M` with ones on the diagonal. Conjecture two: some ρ makes
//! every principal submatrix `[ω^{ρ(k) l}]_{k,l ∈ K}` invertible.
//!
//! Masks are enumerated by a counter whose bits, least significant first,
//! are the off-diagonal entries in row-major order. Candidates are filtered
//! numerically (|det|, then σ_min ≤ 1e-6) and confirmed in exact arithmetic.

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::ScanCheckpoint;
use crate::cyclotomic::{exact_zero_det, RootOfUnitySpec, EXACT_MAX_SIZE};
use crate::error::{Error, Result};
use crate::linalg::{det_in_place, root_of_unity, ComplexMatrix, DEFAULT_SINGULAR_TOL};
use crate::mask::BinaryMask;
use crate::perm::{factorial, unrank, PermutationAssignment};

/// σ_min below which a candidate goes to the exact test.
pub const CANDIDATE_SIGMA: f64 = 1e-6;
pub const CONJ1_EXHAUSTIVE_MAX_N: usize = 6;
pub const CONJ1_RANDOM_MAX_N: usize = 8;
pub const CONJ2_MAX_N: usize = 12;
pub const HIERARCHY_MAX_N: usize = 10;
pub const DEFAULT_MAX_DRAWS: u64 = 1_000_000;

const SEGMENT: u64 = 1 << 16;
const CHUNK: u64 = 1 << 10;
const RANK_BATCH: u128 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjecture {
    One,
    Two,
    Hierarchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    RandomizedRefute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOutcome {
    Pass,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counterexample {
    Mask { counter: u64, mask: BinaryMask },
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refutation {
    pub rho: PermutationAssignment,
    pub counterexample: Counterexample,
    pub sigma_min: f64,
    pub exact_singular: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetCheck {
    pub subset: Vec<usize>,
    pub sigma_min: f64,
    pub exact_singular: Option<bool>,
    pub singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanStats {
    pub masks_tested: u128,
    pub permutations_tested: u128,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanVerdict {
    pub n: usize,
    pub conjecture: Conjecture,
    pub strategy: Strategy,
    pub outcome: ScanOutcome,
    pub fixed_rho: Option<PermutationAssignment>,
    pub witness_rho: Option<PermutationAssignment>,
    /// Every passing ρ found when all witnesses were requested.
    pub witnesses: Vec<PermutationAssignment>,
    pub refutation: Option<Vec<Refutation>>,
    /// Permutations a randomized scan could not refute.
    pub inconclusive: Vec<PermutationAssignment>,
    /// Per-subset results of a fixed-ρ subset scan.
    pub subsets: Vec<SubsetCheck>,
    pub prime: Option<usize>,
    pub stats: ScanStats,
}

impl ScanVerdict {
    fn new(n: usize, conjecture: Conjecture, strategy: Strategy) -> Self {
        Self {
            n,
            conjecture,
            strategy,
            outcome: ScanOutcome::Inconclusive,
            fixed_rho: None,
            witness_rho: None,
            witnesses: Vec::new(),
            refutation: None,
            inconclusive: Vec::new(),
            subsets: Vec::new(),
            prime: None,
            stats: ScanStats::default(),
        }
    }

    /// Copy with the wall time zeroed, for comparisons across runs.
    pub fn without_timing(&self) -> Self {
        let mut v = self.clone();
        v.stats.wall_time = 0.0;
        v
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub threads: Option<usize>,
    /// Keep scanning a refuted ρ and record every failing mask.
    pub collect_all: bool,
    /// Keep searching after the first passing ρ.
    pub all_witnesses: bool,
    pub seed: u64,
    pub max_draws: u64,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Return an incomplete verdict after this many mask segments.
    pub stop_after_segments: Option<u64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            threads: None,
            collect_all: false,
            all_witnesses: false,
            seed: 0,
            max_draws: DEFAULT_MAX_DRAWS,
            checkpoint: None,
            resume: false,
            stop_after_segments: None,
        }
    }
}

/// Runs `f` on a pool with the given number of workers (the current pool
/// when `None`).
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Internal(format!("thread pool: {e}"))),
    }
}

/// Number of masks with ones on the diagonal.
pub fn conj1_mask_count(n: usize) -> u64 {
    1u64 << (n * n - n)
}

/// Off-diagonal positions in row-major order.
fn off_diagonal(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
        .collect()
}

/// The mask with counter value `counter`.
pub fn conj1_mask(n: usize, counter: u64) -> BinaryMask {
    let mut m = BinaryMask::identity(n);
    for (i, (r, c)) in off_diagonal(n).into_iter().enumerate() {
        if counter >> i & 1 == 1 {
            m.set(r, c, true);
        }
    }
    m
}

/// Counter value of a mask with ones on the diagonal.
pub fn conj1_counter(mask: &BinaryMask) -> Result<u64> {
    let n = mask.rows();
    if mask.cols() != n || (0..n).any(|i| !mask.get(i, i)) {
        return Err(Error::InvalidMask("expected a square mask with ones on the diagonal".into()));
    }
    Ok(off_diagonal(n)
        .into_iter()
        .enumerate()
        .filter(|(_, (r, c))| mask.get(*r, *c))
        .fold(0u64, |acc, (i, _)| acc | 1 << i))
}

/// `(P_ρ W_N) ⊙ M` as an exponent table.
pub fn conj1_spec(rho: &[usize], mask: &BinaryMask) -> RootOfUnitySpec {
    let n = rho.len();
    let labels: Vec<usize> = (0..n).collect();
    RootOfUnitySpec::masked_fourier(n, rho, &labels, |k, j| mask.get(k, j))
}

/// Numeric σ_min plus the exact verdict for candidates below
/// [`CANDIDATE_SIGMA`].
fn double_check(spec: &RootOfUnitySpec) -> (f64, Option<bool>) {
    let sigma = crate::linalg::sigma_min(&spec.to_complex());
    let exact = if sigma <= CANDIDATE_SIGMA && spec.rows() <= EXACT_MAX_SIZE {
        exact_zero_det(spec).ok()
    } else {
        None
    };
    (sigma, exact)
}

struct Conj1Kernel {
    n: usize,
    rho: Vec<usize>,
    base: Vec<Complex64>,
    positions: Vec<(usize, usize)>,
    det_threshold: f64,
}

impl Conj1Kernel {
    fn new(rho: Vec<usize>) -> Self {
        let n = rho.len();
        let base = (0..n * n)
            .map(|i| root_of_unity(n, (rho[i / n] * (i % n)) % n))
            .collect();
        // |det| ≤ σ_min·σ_max^{n-1} and σ_max ≤ n, so a larger |det| rules
        // out σ_min ≤ CANDIDATE_SIGMA.
        let det_threshold = CANDIDATE_SIGMA * (n as f64).powi(n as i32 - 1);
        Self {
            n,
            rho,
            base,
            positions: off_diagonal(n),
            det_threshold,
        }
    }

    fn fails(&self, counter: u64, buf: &mut [Complex64]) -> bool {
        let n = self.n;
        buf.fill(Complex64::new(0.0, 0.0));
        for i in 0..n {
            buf[i * n + i] = self.base[i * n + i];
        }
        for (i, &(r, c)) in self.positions.iter().enumerate() {
            if counter >> i & 1 == 1 {
                buf[r * n + c] = self.base[r * n + c];
            }
        }
        if det_in_place(n, buf).norm() > self.det_threshold {
            return false;
        }
        let (sigma, exact) = double_check(&conj1_spec(&self.rho, &conj1_mask(n, counter)));
        sigma <= CANDIDATE_SIGMA && exact == Some(true)
    }

    fn refutation(&self, counter: u64) -> Result<Refutation> {
        let mask = conj1_mask(self.n, counter);
        let (sigma_min, exact_singular) = double_check(&conj1_spec(&self.rho, &mask));
        Ok(Refutation {
            rho: PermutationAssignment::new(self.rho.clone())?,
            counterexample: Counterexample::Mask { counter, mask },
            sigma_min,
            exact_singular,
        })
    }

    /// Failing counters in `[start, end)`; only the smallest if `first_only`.
    fn scan(&self, start: u64, end: u64, first_only: bool) -> Vec<u64> {
        let chunks: Vec<u64> = (start..end).step_by(CHUNK as usize).collect();
        let run = |c0: u64, first: bool| {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.n * self.n];
            let mut out = Vec::new();
            for c in c0..(c0 + CHUNK).min(end) {
                if self.fails(c, &mut buf) {
                    out.push(c);
                    if first {
                        break;
                    }
                }
            }
            out
        };
        if first_only {
            chunks
                .par_iter()
                .find_map_first(|&c0| run(c0, true).first().copied())
                .into_iter()
                .collect()
        } else {
            chunks
                .par_iter()
                .map(|&c0| run(c0, false))
                .collect::<Vec<_>>()
                .concat()
        }
    }
}

/// Whether `(P_ρ W_N) ⊙ M` is singular, decided by the scan pipeline.
pub fn conj1_mask_fails(rho: &PermutationAssignment, mask: &BinaryMask) -> Result<bool> {
    let counter = conj1_counter(mask)?;
    if mask.rows() != rho.size() {
        return Err(Error::Shape("mask and permutation sizes differ".into()));
    }
    let kernel = Conj1Kernel::new(rho.map().to_vec());
    let mut buf = vec![Complex64::new(0.0, 0.0); rho.size() * rho.size()];
    Ok(kernel.fails(counter, &mut buf))
}

fn check_fixed(n: usize, rho: Option<&PermutationAssignment>) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    match rho {
        Some(r) if r.size() != n => Err(Error::InvalidInput(format!(
            "permutation of size {} for N = {n}",
            r.size()
        ))),
        _ => Ok(()),
    }
}

fn to_perm(n: usize, rank: u128) -> PermutationAssignment {
    PermutationAssignment::new(unrank(n, rank)).expect("unrank yields a permutation")
}

pub fn conjecture1_scan(
    n: usize,
    rho: Option<&PermutationAssignment>,
    strategy: Strategy,
    opts: &ScanOptions,
) -> Result<ScanVerdict> {
    check_fixed(n, rho)?;
    let limit = match strategy {
        Strategy::Exhaustive => CONJ1_EXHAUSTIVE_MAX_N,
        Strategy::RandomizedRefute => CONJ1_RANDOM_MAX_N,
    };
    if n > limit {
        return Err(Error::SizeLimit(format!("{strategy:?} scan limited to N <= {limit}, got {n}")));
    }
    let start = Instant::now();
    let mut verdict = with_threads(opts.threads, || match strategy {
        Strategy::Exhaustive => conj1_exhaustive(n, rho, opts),
        Strategy::RandomizedRefute => conj1_randomized(n, rho, opts),
    })??;
    verdict.stats.wall_time = start.elapsed().as_secs_f64();
    Ok(verdict)
}

fn conj1_exhaustive(n: usize, rho: Option<&PermutationAssignment>, opts: &ScanOptions) -> Result<ScanVerdict> {
    let total = conj1_mask_count(n);
    let fixed_rank = rho.map(PermutationAssignment::rank);
    let fresh = ScanCheckpoint {
        n,
        fixed_rho_rank: fixed_rank,
        collect_all: opts.collect_all,
        all_witnesses: opts.all_witnesses,
        rho_rank: fixed_rank.unwrap_or(0),
        ..Default::default()
    };
    let mut st = match &opts.checkpoint {
        Some(path) if opts.resume && path.exists() => {
            let cp = ScanCheckpoint::load(path)?;
            if (cp.n, cp.fixed_rho_rank, cp.collect_all, cp.all_witnesses)
                != (n, fixed_rank, opts.collect_all, opts.all_witnesses)
            {
                return Err(Error::Checkpoint(format!(
                    "{} belongs to a different scan",
                    path.display()
                )));
            }
            cp
        }
        _ => fresh,
    };
    let last_rank = fixed_rank.map_or(factorial(n), |r| r + 1);
    let mut segments = 0u64;
    let save = |st: &ScanCheckpoint| match &opts.checkpoint {
        Some(path) => st.save(path),
        None => Ok(()),
    };
    'ranks: while !st.complete && st.rho_rank < last_rank {
        let kernel = Conj1Kernel::new(unrank(n, st.rho_rank));
        let mut refuted = st.failures.iter().any(|&(r, _)| r == st.rho_rank);
        while st.next_counter < total && !(refuted && !opts.collect_all) {
            if opts.stop_after_segments.is_some_and(|s| segments >= s) {
                break 'ranks;
            }
            let end = (st.next_counter + SEGMENT).min(total);
            let found = kernel.scan(st.next_counter, end, !opts.collect_all);
            if !opts.collect_all && !found.is_empty() {
                st.masks_tested += (found[0] - st.next_counter + 1) as u128;
                st.next_counter = found[0] + 1;
            } else {
                st.masks_tested += (end - st.next_counter) as u128;
                st.next_counter = end;
            }
            refuted |= !found.is_empty();
            st.failures.extend(found.into_iter().map(|c| (st.rho_rank, c)));
            segments += 1;
            save(&st)?;
        }
        st.permutations_tested += 1;
        if !refuted {
            st.witnesses.push(st.rho_rank);
            if !opts.all_witnesses {
                st.complete = true;
            }
        }
        st.rho_rank += 1;
        st.next_counter = 0;
        if st.rho_rank >= last_rank {
            st.complete = true;
        }
        save(&st)?;
    }
    let mut v = ScanVerdict::new(n, Conjecture::One, Strategy::Exhaustive);
    v.fixed_rho = rho.cloned();
    v.stats.masks_tested = st.masks_tested;
    v.stats.permutations_tested = st.permutations_tested;
    v.witnesses = if opts.all_witnesses {
        st.witnesses.iter().map(|&r| to_perm(n, r)).collect()
    } else {
        Vec::new()
    };
    if !st.complete {
        return Ok(v);
    }
    if let Some(&w) = st.witnesses.first() {
        v.outcome = ScanOutcome::Pass;
        v.witness_rho = Some(to_perm(n, w));
    } else {
        v.outcome = ScanOutcome::Refuted;
        let refutations = st
            .failures
            .par_iter()
            .map(|&(r, c)| Conj1Kernel::new(unrank(n, r)).refutation(c))
            .collect::<Result<Vec<_>>>()?;
        v.refutation = Some(refutations);
    }
    Ok(v)
}

/// First failing counter among up to `max_draws` seeded random masks.
fn random_refute(n: usize, rank: u128, seed: u64, max_draws: u64) -> (Option<u64>, u64) {
    let kernel = Conj1Kernel::new(unrank(n, rank));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rank as u64);
    let bits = n * n - n;
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for draw in 0..max_draws {
        // Varying the density reaches both sparse and dense singular patterns.
        let p: f64 = rng.gen_range(0.05..0.95);
        let counter = (0..bits).fold(0u64, |acc, i| acc | (rng.gen_bool(p) as u64) << i);
        if kernel.fails(counter, &mut buf) {
            return (Some(counter), draw + 1);
        }
    }
    (None, max_draws)
}

fn conj1_randomized(n: usize, rho: Option<&PermutationAssignment>, opts: &ScanOptions) -> Result<ScanVerdict> {
    let ranks: Vec<u128> = match rho {
        Some(r) => vec![r.rank()],
        None => (0..factorial(n)).collect(),
    };
    let results: Vec<(u128, Option<u64>, u64)> = ranks
        .par_iter()
        .map(|&r| {
            let (found, draws) = random_refute(n, r, opts.seed, opts.max_draws);
            (r, found, draws)
        })
        .collect();
    let mut v = ScanVerdict::new(n, Conjecture::One, Strategy::RandomizedRefute);
    v.fixed_rho = rho.cloned();
    v.stats.permutations_tested = ranks.len() as u128;
    v.stats.masks_tested = results.iter().map(|r| r.2 as u128).sum();
    let mut refutations = Vec::new();
    for (r, found, _) in &results {
        match found {
            Some(c) => refutations.push(Conj1Kernel::new(unrank(n, *r)).refutation(*c)?),
            None => v.inconclusive.push(to_perm(n, *r)),
        }
    }
    v.outcome = if v.inconclusive.is_empty() {
        ScanOutcome::Refuted
    } else {
        ScanOutcome::Inconclusive
    };
    v.refutation = Some(refutations);
    Ok(v)
}

fn subset_members(n: usize, bits: u32) -> Vec<usize> {
    (0..n).filter(|i| bits >> i & 1 == 1).collect()
}

/// Principal submatrix `[ω^{ρ(k) l}]_{k,l ∈ K}` of `P_ρ W_N`.
pub fn principal_spec(n: usize, rho: &[usize], subset: &[usize]) -> RootOfUnitySpec {
    let rows: Vec<usize> = subset.iter().map(|&k| rho[k]).collect();
    RootOfUnitySpec::masked_fourier(n, &rows, subset, |_, _| true)
}

fn check_subset(n: usize, rho: &[usize], subset: Vec<usize>) -> SubsetCheck {
    let (sigma_min, exact_singular) = double_check(&principal_spec(n, rho, &subset));
    SubsetCheck {
        subset,
        sigma_min,
        exact_singular,
        singular: sigma_min <= CANDIDATE_SIGMA && exact_singular == Some(true),
    }
}

/// First singular subset in counter order, or `None` if all pass, with the
/// number of subsets examined.
fn first_bad_subset(n: usize, rho: &[usize]) -> (Option<SubsetCheck>, u128) {
    for bits in 1u32..(1 << n) {
        let check = check_subset(n, rho, subset_members(n, bits));
        if check.singular {
            return (Some(check), bits as u128);
        }
    }
    (None, (1u128 << n) - 1)
}

pub fn conjecture2_scan(n: usize, rho: Option<&PermutationAssignment>, opts: &ScanOptions) -> Result<ScanVerdict> {
    check_fixed(n, rho)?;
    if n > CONJ2_MAX_N {
        return Err(Error::SizeLimit(format!("subset scan limited to N <= {CONJ2_MAX_N}, got {n}")));
    }
    let start = Instant::now();
    let mut v = with_threads(opts.threads, || match rho {
        Some(r) => conj2_fixed(n, r),
        None => conj2_global(n, opts.all_witnesses),
    })?;
    v.stats.wall_time = start.elapsed().as_secs_f64();
    Ok(v)
}

fn conj2_fixed(n: usize, rho: &PermutationAssignment) -> ScanVerdict {
    let mut v = ScanVerdict::new(n, Conjecture::Two, Strategy::Exhaustive);
    v.fixed_rho = Some(rho.clone());
    v.subsets = (1u32..(1 << n))
        .into_par_iter()
        .map(|bits| check_subset(n, rho.map(), subset_members(n, bits)))
        .collect();
    v.stats.masks_tested = v.subsets.len() as u128;
    v.stats.permutations_tested = 1;
    let bad: Vec<Refutation> = v
        .subsets
        .iter()
        .filter(|s| s.singular)
        .map(|s| Refutation {
            rho: rho.clone(),
            counterexample: Counterexample::Subset(s.subset.clone()),
            sigma_min: s.sigma_min,
            exact_singular: s.exact_singular,
        })
        .collect();
    if bad.is_empty() {
        v.outcome = ScanOutcome::Pass;
        v.witness_rho = Some(rho.clone());
    } else {
        v.outcome = ScanOutcome::Refuted;
        v.refutation = Some(bad);
    }
    v
}

fn conj2_global(n: usize, all_witnesses: bool) -> ScanVerdict {
    let mut v = ScanVerdict::new(n, Conjecture::Two, Strategy::Exhaustive);
    let total = factorial(n);
    let mut failures = Vec::new();
    let mut batch_start = 0u128;
    'batches: while batch_start < total {
        let end = (batch_start + RANK_BATCH).min(total);
        let results: Vec<(u128, Option<SubsetCheck>, u128)> = (batch_start..end)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|r| {
                let (bad, tested) = first_bad_subset(n, &unrank(n, r));
                (r, bad, tested)
            })
            .collect();
        for (r, bad, tested) in results {
            v.stats.permutations_tested += 1;
            v.stats.masks_tested += tested;
            match bad {
                None => {
                    let p = to_perm(n, r);
                    if v.witness_rho.is_none() {
                        v.witness_rho = Some(p.clone());
                    }
                    if !all_witnesses {
                        break 'batches;
                    }
                    v.witnesses.push(p);
                }
                Some(check) => failures.push(Refutation {
                    rho: to_perm(n, r),
                    counterexample: Counterexample::Subset(check.subset),
                    sigma_min: check.sigma_min,
                    exact_singular: check.exact_singular,
                }),
            }
        }
        batch_start = end;
    }
    if v.witness_rho.is_some() {
        v.outcome = ScanOutcome::Pass;
    } else {
        v.outcome = ScanOutcome::Refuted;
        v.refutation = Some(failures);
    }
    v
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Checks every principal submatrix `[e^{-2πi kl/P}]_{k,l ∈ K}`, K ⊆ Z_N,
/// i.e. the frequencies `N·Z + kN/P`.
pub fn hierarchical_noninteger_check(n: usize, p: usize, threads: Option<usize>) -> Result<ScanVerdict> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    if n > HIERARCHY_MAX_N {
        return Err(Error::SizeLimit(format!("hierarchy check limited to N <= {HIERARCHY_MAX_N}")));
    }
    if !is_prime(p) || p <= n {
        return Err(Error::InvalidInput(format!("P = {p} must be a prime larger than N = {n}")));
    }
    let start = Instant::now();
    let subsets: Vec<SubsetCheck> = with_threads(threads, || {
        (1u32..(1 << n))
            .into_par_iter()
            .map(|bits| {
                let subset = subset_members(n, bits);
                let spec = RootOfUnitySpec::masked_fourier(p, &subset, &subset, |_, _| true);
                let m: ComplexMatrix = spec.to_complex();
                let sv = m.singular_values();
                let sigma_min = *sv.last().unwrap_or(&0.0);
                let singular = sigma_min <= DEFAULT_SINGULAR_TOL * subset.len() as f64 * sv[0];
                let exact_singular = (subset.len() <= EXACT_MAX_SIZE)
                    .then(|| exact_zero_det(&spec).ok())
                    .flatten();
                SubsetCheck {
                    subset,
                    sigma_min,
                    exact_singular,
                    singular,
                }
            })
            .collect()
    })?;
    let mut v = ScanVerdict::new(n, Conjecture::Hierarchy, Strategy::Exhaustive);
    v.prime = Some(p);
    v.stats.masks_tested = subsets.len() as u128;
    let bad: Vec<Refutation> = subsets
        .iter()
        .filter(|s| s.singular)
        .map(|s| Refutation {
            rho: PermutationAssignment::identity(n),
            counterexample: Counterexample::Subset(s.subset.clone()),
            sigma_min: s.sigma_min,
            exact_singular: s.exact_singular,
        })
        .collect();
    v.subsets = subsets;
    if bad.is_empty() {
        v.outcome = ScanOutcome::Pass;
    } else {
        v.outcome = ScanOutcome::Refuted;
        v.refutation = Some(bad);
    }
    v.stats.wall_time = start.elapsed().as_secs_f64();
    Ok(v)
}
