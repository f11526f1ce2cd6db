//! Regeneration parameters for every subcommand and the computation each
//! one performs. The same code path serves the first run and `verify`.

use std::path::PathBuf;
use std::time::Instant;

use riesz_core::conjecture::{
    conjecture1_scan, conjecture2_scan, hierarchical_noninteger_check, Conjecture, ScanOptions, ScanOutcome,
    ScanVerdict, Strategy,
};
use riesz_core::grid::{parse_rational, CosetSystem, GridSupport, RationalInterval};
use riesz_core::linalg::{det, ComplexMatrix};
use riesz_core::mask::BinaryMask;
use riesz_core::masked::{build_masked_matrix, classify_system_with_tol, Classification, Verdict};
use riesz_core::perm::{
    corollary_construct, corollary_with_rho, feasible_permutations, frequency_kernel, lemma_search,
    theorem1_construct, theorem1_with_rho, Construction, PermutationAssignment, SearchMode,
};
use riesz_core::sampling::{build_filters, generalized_samples, reconstruct, report_csv, SpectrumFunction};
use riesz_core::tri::{
    all_memberships, canonical_n3, case_holds, case_table_csv, classify_triple, cross_check_periodic,
    membership_from, membership_indices, paley_wiener_lambda, periodic_alphas, TripleConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::fixtures;
use crate::CliError;

/// Feasible permutations are listed in construction certificates up to this
/// many cells.
pub const FEASIBLE_LIST_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Params {
    Classify(ClassifyParams),
    Construct(ConstructParams),
    Corollary(CorollaryParams),
    LemmaSearch(ConstructParams),
    Conjecture1(Conj1Params),
    Conjecture2(Conj2Params),
    Hierarchy(HierarchyParams),
    TriClassify(TriParams),
    CrossCheck(CrossCheckParams),
    SamplingDemo(SamplingParams),
    Reproduce(ReproduceParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub n: usize,
    /// Reduced `"p/q"` strings.
    pub offsets: Vec<String>,
    /// One bit-list of length N per row.
    pub masks: Vec<Vec<u8>>,
    pub tolerance: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructParams {
    pub n: usize,
    pub cells: Vec<usize>,
    pub masks: Vec<Vec<u8>>,
    pub rho: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryParams {
    /// `"lo..hi"` intervals per set.
    pub sets: Vec<Vec<String>>,
    pub rho: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conj1Params {
    pub n: usize,
    pub rho: Option<String>,
    pub strategy: Strategy,
    pub seed: u64,
    pub max_draws: u64,
    pub collect_all: bool,
    pub all_witnesses: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conj2Params {
    pub n: usize,
    pub rho: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyParams {
    pub n: usize,
    pub prime: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriParams {
    /// `L_1;L_2;L_3`, each a comma list of indices in 1..=3; absent means the
    /// whole 64-entry table.
    pub membership: Option<String>,
    /// 1-based indices of empty intervals.
    pub empty: Vec<usize>,
    pub alphas: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckParams {
    pub n: usize,
    pub intervals: Vec<Vec<usize>>,
    pub offsets: Vec<Vec<String>>,
    /// 1-based interval indices making up each `S_k`.
    pub membership: Vec<Vec<usize>>,
    /// Sweep all 64 memberships of the canonical N=3 instance instead.
    pub sweep: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub n: usize,
    pub masks: Vec<Vec<u8>>,
    pub rho: Option<String>,
    pub seed: u64,
    pub refine: usize,
    pub truncations: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceParams {
    pub id: String,
}

/// Run settings that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub threads: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Verified, constructed or passing.
    Ok,
    /// Refuted, or verdict neither.
    Refuted,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub status: Status,
    pub summary: String,
    /// Optional CSV side report.
    pub report: Option<String>,
    pub wall_time: f64,
}

impl Outcome {
    fn new(results: Value, status: Status, summary: String) -> Self {
        Self {
            results,
            status,
            summary,
            report: None,
            wall_time: 0.0,
        }
    }
}

pub fn bits_of(g: &GridSupport) -> Vec<u8> {
    g.bits().into_iter().map(u8::from).collect()
}

pub fn support_from_bits(n: usize, bits: &[u8]) -> Result<GridSupport, CliError> {
    if bits.len() != n || bits.iter().any(|&b| b > 1) {
        return Err(CliError::Usage(format!("mask {bits:?} is not a bit-list of length {n}")));
    }
    Ok(GridSupport::from_bits(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())?)
}

fn supports(n: usize, masks: &[Vec<u8>]) -> Result<Vec<GridSupport>, CliError> {
    masks.iter().map(|m| support_from_bits(n, m)).collect()
}

fn parse_rho(rho: &Option<String>) -> Result<Option<PermutationAssignment>, CliError> {
    Ok(rho.as_deref().map(PermutationAssignment::parse).transpose()?)
}

fn c(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.rows()).map(|r| Value::Array(m.row(r).iter().map(|&z| c(z)).collect())).collect())
}

fn classification_json(cls: &Classification) -> Value {
    json!({
        "verdict": cls.verdict.as_str(),
        "sigma_min": cls.sigma_min,
        "sigma_max": cls.sigma_max,
        "lower_bound": cls.lower_bound,
        "exact_singular": cls.exact_singular,
    })
}

fn status_of(v: Verdict) -> Status {
    if v == Verdict::Neither {
        Status::Refuted
    } else {
        Status::Ok
    }
}

pub fn compute(params: &Params, ctx: &Context) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut out = match params {
        Params::Classify(p) => classify(p)?,
        Params::Construct(p) => construct(p)?,
        Params::Corollary(p) => corollary(p)?,
        Params::LemmaSearch(p) => lemma(p)?,
        Params::Conjecture1(p) => conjecture1(p, ctx)?,
        Params::Conjecture2(p) => {
            let rho = parse_rho(&p.rho)?;
            let opts = ScanOptions {
                threads: ctx.threads,
                ..Default::default()
            };
            scan_outcome(conjecture2_scan(p.n, rho.as_ref(), &opts)?)
        }
        Params::Hierarchy(p) => scan_outcome(hierarchical_noninteger_check(p.n, p.prime, ctx.threads)?),
        Params::TriClassify(p) => tri(p)?,
        Params::CrossCheck(p) => cross_check(p)?,
        Params::SamplingDemo(p) => sampling(p, ctx)?,
        Params::Reproduce(p) => fixtures::reproduce(&p.id, ctx)?,
    };
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Claims beyond plain recomputation: a construction certificate's
/// permutation must itself produce the recorded verdict.
pub fn check_claims(params: &Params, claimed: &Value, ctx: &Context) -> Result<Vec<String>, CliError> {
    let Params::Construct(p) = params else {
        return Ok(Vec::new());
    };
    let Some(rho) = claimed.get("rho").and_then(Value::as_str) else {
        return Ok(vec!["results.rho: missing".into()]);
    };
    let fixed = Params::Construct(ConstructParams {
        rho: Some(rho.to_string()),
        ..p.clone()
    });
    let verdict = match compute(&fixed, ctx) {
        Ok(o) => o.results["verdict"].clone(),
        Err(e) => return Ok(vec![format!("results.rho: permutation {rho} rejected: {e}")]),
    };
    if Some(&verdict) != claimed.get("verdict") {
        return Ok(vec![format!(
            "results.rho: permutation {rho} gives verdict {verdict}, certificate claims {}",
            claimed.get("verdict").unwrap_or(&Value::Null)
        )]);
    }
    Ok(Vec::new())
}

fn classify(p: &ClassifyParams) -> Result<Outcome, CliError> {
    let offsets = p
        .offsets
        .iter()
        .map(|s| parse_rational(s))
        .collect::<riesz_core::Result<Vec<_>>>()?;
    let m = build_masked_matrix(p.n, &offsets, &supports(p.n, &p.masks)?)?;
    let cls = classify_system_with_tol(&m, p.tolerance);
    if p.exact && cls.exact_singular.is_none() {
        return Err(CliError::Usage(
            "exact verdict unavailable: offsets must be integers and the matrix at most 16 wide".into(),
        ));
    }
    let mut results = classification_json(&cls);
    results["rows"] = json!(m.rows());
    results["cols"] = json!(m.cols());
    results["column_labels"] = json!(m.column_labels());
    results["matrix"] = matrix_json(m.matrix());
    let summary = format!("verdict {} (sigma_min = {:e})", cls.verdict.as_str(), cls.sigma_min);
    Ok(Outcome::new(results, status_of(cls.verdict), summary))
}

fn construction_json(con: &Construction) -> Value {
    let mut v = classification_json(&con.classification);
    v["rho"] = json!(con.rho.to_string());
    v["offsets"] = json!(con.offsets);
    v["det_modulus"] = json!(con.lemma.det_modulus);
    v["guarantee"] = json!(con.lemma.guarantee);
    v["permanent"] = json!(con.lemma.r as u64);
    v["bound_reading"] = json!("modulus of det(A)");
    v["matrix"] = matrix_json(con.matrix.matrix());
    v
}

fn construct(p: &ConstructParams) -> Result<Outcome, CliError> {
    let masks = supports(p.n, &p.masks)?;
    let con = match parse_rho(&p.rho)? {
        Some(rho) => theorem1_with_rho(p.n, &p.cells, &masks, &rho)?,
        None => theorem1_construct(p.n, &p.cells, &masks)?,
    };
    let mut results = construction_json(&con);
    if p.cells.len() <= FEASIBLE_LIST_MAX {
        let feasible = feasible_permutations(p.n, &p.cells, &masks)?;
        results["feasible"] = json!(feasible.iter().map(ToString::to_string).collect::<Vec<_>>());
    }
    let v = con.classification.verdict;
    let summary = format!("rho = {} offsets {:?}: {}", con.rho, con.offsets, v.as_str());
    Ok(Outcome::new(results, status_of(v), summary))
}

fn corollary(p: &CorollaryParams) -> Result<Outcome, CliError> {
    let sets = p
        .sets
        .iter()
        .map(|set| set.iter().map(|s| s.parse()).collect::<riesz_core::Result<Vec<RationalInterval>>>())
        .collect::<riesz_core::Result<Vec<_>>>()?;
    let res = match parse_rho(&p.rho)? {
        Some(rho) => corollary_with_rho(&sets, &rho)?,
        None => corollary_construct(&sets)?,
    };
    let frequencies: Vec<Vec<usize>> = (0..sets.len()).map(|k| res.frequency_offsets(k)).collect();
    let mut results = construction_json(&res.construction);
    results["modulus"] = json!(res.modulus);
    results["supports"] = json!(res.supports.iter().map(bits_of).collect::<Vec<_>>());
    results["cells"] = json!(res.cells);
    results["owner"] = json!(res.owner);
    results["frequencies"] = json!(frequencies);
    let v = res.construction.classification.verdict;
    let summary = format!("N = {}, frequency offsets {frequencies:?}: {}", res.modulus, v.as_str());
    Ok(Outcome::new(results, status_of(v), summary))
}

fn lemma(p: &ConstructParams) -> Result<Outcome, CliError> {
    let masks = supports(p.n, &p.masks)?;
    if masks.len() != p.cells.len() {
        return Err(CliError::Usage(format!("{} masks for {} cells", masks.len(), p.cells.len())));
    }
    let mut labels = p.cells.clone();
    labels.sort_unstable();
    let a = frequency_kernel(p.n, &labels);
    let m = BinaryMask::from_fn(labels.len(), labels.len(), |r, col| masks[r].contains(labels[col]));
    let res = lemma_search(&a, &m, SearchMode::Exhaustive)?;
    let feasible = res.det_modulus >= res.guarantee - 1e-9 * res.guarantee.max(1.0);
    let results = json!({
        "rho": res.rho.to_string(),
        "det_modulus": res.det_modulus,
        "guarantee": res.guarantee,
        "permanent": res.r as u64,
        "det_a_modulus": det(&a)?.norm(),
        "feasible": feasible,
        "bound_reading": "modulus of det(A)",
    });
    let summary = format!(
        "rho = {}: |det| = {:.6} against guarantee {:.6}",
        res.rho, res.det_modulus, res.guarantee
    );
    Ok(Outcome::new(results, if feasible { Status::Ok } else { Status::Refuted }, summary))
}

fn scan_results(v: &ScanVerdict) -> Value {
    let mut value = serde_json::to_value(v.without_timing()).expect("scan verdicts serialize");
    if let Some(stats) = value.get_mut("stats").and_then(Value::as_object_mut) {
        stats.remove("wall_time");
    }
    value
}

fn scan_outcome(v: ScanVerdict) -> Outcome {
    let status = if v.outcome == ScanOutcome::Pass {
        Status::Ok
    } else {
        Status::Refuted
    };
    let what = match (&v.fixed_rho, &v.witness_rho) {
        (Some(r), _) => format!("rho = {r}"),
        (None, Some(w)) => format!("witness rho = {w}"),
        (None, None) => "no witness".to_string(),
    };
    let unit = if v.conjecture == Conjecture::One { "masks" } else { "subsets" };
    let summary = format!(
        "N = {}: {:?}, {what}, {} refutation(s), {} {unit}, {} permutation(s)",
        v.n,
        v.outcome,
        v.refutation.as_ref().map_or(0, Vec::len),
        v.stats.masks_tested,
        v.stats.permutations_tested
    );
    Outcome::new(scan_results(&v), status, summary)
}

fn conjecture1(p: &Conj1Params, ctx: &Context) -> Result<Outcome, CliError> {
    let rho = parse_rho(&p.rho)?;
    let opts = ScanOptions {
        threads: ctx.threads,
        collect_all: p.collect_all,
        all_witnesses: p.all_witnesses,
        seed: p.seed,
        max_draws: p.max_draws,
        checkpoint: ctx.checkpoint.clone(),
        resume: ctx.resume,
        stop_after_segments: None,
    };
    Ok(scan_outcome(conjecture1_scan(p.n, rho.as_ref(), p.strategy, &opts)?))
}

fn tri(p: &TriParams) -> Result<Outcome, CliError> {
    let Some(membership) = &p.membership else {
        let rows = all_memberships()
            .into_iter()
            .map(|m| {
                let tag = classify_triple(&TripleConfig::new(m))?;
                Ok(json!({
                    "branch": tag.proof_branch,
                    "membership": m.iter().map(|&x| membership_indices(x)).collect::<Vec<_>>(),
                    "case": tag.to_string(),
                }))
            })
            .collect::<riesz_core::Result<Vec<_>>>()?;
        let mut out = Outcome::new(json!({ "table": rows }), Status::Ok, "64 memberships classified".into());
        out.report = Some(case_table_csv()?);
        return Ok(out);
    };
    let mut cfg = TripleConfig::parse(membership)?;
    for &k in &p.empty {
        if !(1..=3).contains(&k) {
            return Err(CliError::Usage(format!("empty interval index {k} outside 1..=3")));
        }
        cfg.empty[k - 1] = true;
    }
    cfg.alphas = p.alphas;
    let tag = classify_triple(&cfg)?;
    let lambda = p.alphas.map(|a| paley_wiener_lambda(&a)).transpose()?;
    let present = membership_from(&(1..=3).filter(|k| !cfg.empty[k - 1]).collect::<Vec<_>>())?;
    let restricted = cfg.membership.map(|x| x & present);
    let results = json!({
        "case": tag.to_string(),
        "kind": tag.kind,
        "k": tag.k,
        "proof_branch": tag.proof_branch,
        "condition_holds": cfg.empty.iter().any(|&e| e) || case_holds(&restricted, tag.kind, tag.k),
        "lambda": lambda,
    });
    let summary = format!("{} (branch {})", tag, tag.proof_branch);
    Ok(Outcome::new(results, Status::Ok, summary))
}

fn cross_check(p: &CrossCheckParams) -> Result<Outcome, CliError> {
    if p.sweep {
        let (intervals, freqs) = canonical_n3();
        let mut rows = Vec::new();
        let mut all = true;
        for m in all_memberships() {
            let members: Vec<Vec<usize>> = m
                .iter()
                .map(|&x| membership_indices(x).iter().map(|i| i - 1).collect())
                .collect();
            let cls = cross_check_periodic(3, &intervals, &freqs, &members)?;
            all &= cls.verdict == Verdict::RieszBasis;
            rows.push(json!({
                "membership": m.iter().map(|&x| membership_indices(x)).collect::<Vec<_>>(),
                "verdict": cls.verdict.as_str(),
                "sigma_min": cls.sigma_min,
            }));
        }
        let status = if all { Status::Ok } else { Status::Refuted };
        let summary = format!("canonical N=3 instance: all 64 riesz_basis = {all}");
        return Ok(Outcome::new(json!({ "sweep": rows, "all_riesz_basis": all }), status, summary));
    }
    let intervals = p
        .intervals
        .iter()
        .map(|cells| GridSupport::new(p.n, cells.iter().copied()))
        .collect::<riesz_core::Result<Vec<_>>>()?;
    let freqs = p
        .offsets
        .iter()
        .map(|offs| {
            let offs = offs.iter().map(|s| parse_rational(s)).collect::<riesz_core::Result<Vec<_>>>()?;
            CosetSystem::new(p.n, offs)
        })
        .collect::<riesz_core::Result<Vec<_>>>()?;
    let members: Vec<Vec<usize>> = p
        .membership
        .iter()
        .map(|m| {
            m.iter()
                .map(|&i| i.checked_sub(1).ok_or_else(|| CliError::Usage("membership indices are 1-based".into())))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let cls = cross_check_periodic(p.n, &intervals, &freqs, &members)?;
    let alphas = periodic_alphas(p.n, &intervals, &freqs)?;
    let mut results = classification_json(&cls);
    results["alphas"] = json!(alphas);
    let summary = format!("verdict {} (sigma_min = {:e})", cls.verdict.as_str(), cls.sigma_min);
    Ok(Outcome::new(results, status_of(cls.verdict), summary))
}

fn sampling(p: &SamplingParams, ctx: &Context) -> Result<Outcome, CliError> {
    let masks = supports(p.n, &p.masks)?;
    let rho = parse_rho(&p.rho)?;
    let bank = build_filters(p.n, &masks, rho.as_ref())?;
    let fhat = SpectrumFunction::random(p.n, p.refine, p.seed)?;
    let errors = riesz_core::conjecture::with_threads(ctx.threads, || {
        p.truncations
            .iter()
            .map(|&m| {
                let s = generalized_samples(&fhat, &bank, m)?;
                Ok((m, reconstruct(&s, &bank, &fhat)?.relative_error))
            })
            .collect::<riesz_core::Result<Vec<_>>>()
    })??;
    let results = json!({
        "rho": bank.rho.to_string(),
        "filters": bank.g.iter().map(|g| g.iter().map(|&z| c(z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "errors": errors.iter().map(|(m, e)| json!({"mtrunc": m, "relative_error": e})).collect::<Vec<_>>(),
    });
    let summary = errors
        .iter()
        .map(|(m, e)| format!("Mtrunc {m}: relative error {e:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    let mut out = Outcome::new(results, Status::Ok, summary);
    out.report = Some(report_csv(&errors));
    Ok(out)
}
