//! Acceptance criteria 1-12, one PASS/FAIL line each. Runs without the
//! libtest harness so the lines always reach the terminal.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riesz_cli::cert::strip_volatile;
use riesz_cli::run_command;
use riesz_core::conjecture::{
    conj1_counter, conjecture1_scan, conjecture2_scan, with_threads, Counterexample, ScanOptions, ScanOutcome,
    Strategy,
};
use riesz_core::grid::{check_necessary_conditions, CosetSystem, GridSupport, Rational};
use riesz_core::linalg::ComplexMatrix;
use riesz_core::mask::BinaryMask;
use riesz_core::masked::{
    build_integer_masked_matrix, classify_system, dual_basis, verify_biorthogonality, Verdict,
    DEFAULT_BIORTHOGONALITY_TRUNCATION,
};
use riesz_core::perm::{lemma_search, masked_permuted_det, PermutationAssignment, SearchMode};
use riesz_core::sampling::{build_filters, generalized_samples, reconstruct, SpectrumFunction};
use riesz_core::tri::{
    all_memberships, canonical_n3, case_holds, classify_triple, cross_check_periodic, membership_indices,
    CaseKind, TripleConfig,
};
use serde_json::Value;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

// ---- independent oracles ----

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn parity(p: &[usize]) -> i64 {
    let inversions = (0..p.len())
        .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| p[i] > p[j])
        .count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Leibniz expansion.
fn leibniz(a: &[Vec<Complex64>]) -> Complex64 {
    permutations(a.len())
        .iter()
        .map(|p| {
            let prod: Complex64 = p.iter().enumerate().map(|(r, &c)| a[r][c]).product();
            prod * parity(p) as f64
        })
        .sum()
}

fn brute_permanent(m: &BinaryMask) -> u128 {
    permutations(m.rows())
        .iter()
        .filter(|p| p.iter().enumerate().all(|(r, &c)| m.get(r, c)))
        .count() as u128
}

fn poly_rem(mut a: Vec<i64>, b: &[i64]) -> Vec<i64> {
    // b is monic.
    while a.len() >= b.len() {
        let lead = *a.last().unwrap();
        let shift = a.len() - b.len();
        for (i, &bi) in b.iter().enumerate() {
            a[shift + i] -= lead * bi;
        }
        a.pop();
    }
    a
}

fn poly_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut rem = a.to_vec();
    let mut q = vec![0; a.len() - b.len() + 1];
    for s in (0..q.len()).rev() {
        let lead = rem[s + b.len() - 1];
        q[s] = lead;
        for (i, &bi) in b.iter().enumerate() {
            rem[s + i] -= lead * bi;
        }
    }
    q
}

fn cyclotomic(n: usize) -> Vec<i64> {
    let mut p = vec![0; n + 1];
    p[0] = -1;
    p[n] = 1;
    for d in (1..n).filter(|d| n % d == 0) {
        p = poly_div(&p, &cyclotomic(d));
    }
    p
}

/// Exact singularity of a matrix with entries `ω_n^e` or zero, by Leibniz
/// expansion in `Z[x]/(x^n - 1)` followed by reduction mod `Φ_n`.
fn exact_singular_oracle(n: usize, exps: &[Vec<Option<usize>>]) -> bool {
    let mut acc = vec![0i64; n];
    for p in permutations(exps.len()) {
        let terms: Option<Vec<usize>> = p.iter().enumerate().map(|(r, &c)| exps[r][c]).collect();
        if let Some(t) = terms {
            acc[t.iter().sum::<usize>() % n] += parity(&p);
        }
    }
    poly_rem(acc, &cyclotomic(n)).iter().all(|&c| c == 0)
}

fn conj1_exponents(rho: &[usize], mask: &BinaryMask) -> Vec<Vec<Option<usize>>> {
    let n = rho.len();
    (0..n)
        .map(|k| (0..n).map(|l| mask.get(k, l).then_some((n - rho[k] * l % n) % n)).collect())
        .collect()
}

fn mask_from(rows: &str) -> BinaryMask {
    BinaryMask::parse_square(rows).unwrap()
}

fn g(n: usize, cells: &[usize]) -> GridSupport {
    GridSupport::new(n, cells.iter().copied()).unwrap()
}

fn perm(s: &str) -> PermutationAssignment {
    PermutationAssignment::parse(s).unwrap()
}

fn alternating_masks() -> Vec<GridSupport> {
    vec![g(4, &[0, 2]), g(4, &[0, 1, 2, 3]), g(4, &[0, 2]), g(4, &[0, 1, 2, 3])]
}

// ---- CLI helpers ----

struct Run {
    code: i32,
    stdout: String,
    cert: Option<Value>,
    raw: Option<String>,
}

fn cli(args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.json");
    let mut argv: Vec<String> = std::iter::once("riesz").chain(args.iter().copied()).map(String::from).collect();
    argv.push("--out".into());
    argv.push(out.to_string_lossy().into_owned());
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = run_command(&argv, &mut so, &mut se);
    let raw = std::fs::read_to_string(&out).ok();
    Run {
        code,
        stdout: String::from_utf8_lossy(&so).into_owned() + &String::from_utf8_lossy(&se),
        cert: raw.as_deref().map(|t| serde_json::from_str(t).unwrap()),
        raw,
    }
}

fn verify_raw(raw: &str) -> i32 {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, raw).unwrap();
    let argv = ["riesz".to_string(), "verify".into(), path.to_string_lossy().into_owned()];
    run_command(&argv, &mut Vec::new(), &mut Vec::new())
}

fn within(start: Instant, limit: Duration, what: &str) -> Check {
    let t = start.elapsed();
    ensure!(t < limit, "{what} took {t:?}, limit {limit:?}");
    Ok(())
}

// ---- criteria ----

fn c1() -> Check {
    let start = Instant::now();
    let cls = cli(&["classify", "--n", "4", "--offsets", "1,2,3,0", "--masks", "1010,1111,1010,1111", "--exact"]);
    ensure!(cls.code == 1, "classify exit {} ({})", cls.code, cls.stdout);
    let r = &cls.cert.as_ref().unwrap()["results"];
    ensure!(r["verdict"] == "neither" && r["exact_singular"] == true, "identity permutation: {r}");
    let con = cli(&["construct", "--n", "4", "--masks", "1010,1111,1010,1111"]);
    ensure!(con.code == 0, "construct exit {}", con.code);
    let r = &con.cert.as_ref().unwrap()["results"];
    ensure!(r["verdict"] == "riesz_basis", "construct verdict {}", r["verdict"]);
    ensure!(verify_raw(con.raw.as_ref().unwrap()) == 0, "construction certificate does not re-verify");
    let feasible: Vec<&str> = r["feasible"].as_array().unwrap().iter().filter_map(Value::as_str).collect();
    // (1,3,2,4) in 1-based notation.
    ensure!(feasible.contains(&"0,2,1,3"), "0,2,1,3 not among feasible {feasible:?}");
    let id: Vec<Vec<Option<usize>>> = [1usize, 2, 3, 0]
        .iter()
        .zip(alternating_masks())
        .map(|(&c, m)| (0..4).map(|l| m.contains(l).then_some((4 - c * l % 4) % 4)).collect())
        .collect();
    ensure!(exact_singular_oracle(4, &id), "oracle disagrees on the identity permutation");
    within(start, Duration::from_secs(1), "criterion 1")
}

fn c2() -> Check {
    let start = Instant::now();
    let run = cli(&["conjecture1", "--n", "4", "--rho", "0,2,1,3"]);
    ensure!(run.code == 0, "exit {} ({})", run.code, run.stdout);
    let r = &run.cert.unwrap()["results"];
    ensure!(r["outcome"] == "pass", "outcome {}", r["outcome"]);
    ensure!(r["stats"]["masks_tested"] == 4096, "masks tested {}", r["stats"]["masks_tested"]);
    within(start, Duration::from_secs(1), "criterion 2")
}

fn c3() -> Check {
    let start = Instant::now();
    let v = with_threads(Some(1), || {
        conjecture1_scan(5, Some(&perm("0,1,2,4,3")), Strategy::Exhaustive, &ScanOptions::default())
    })
    .unwrap()
    .map_err(|e| e.to_string())?;
    ensure!(v.outcome == ScanOutcome::Pass, "0,1,2,4,3: {:?}", v.outcome);
    ensure!(v.stats.masks_tested == 1 << 20, "masks tested {}", v.stats.masks_tested);
    within(start, Duration::from_secs(300), "single-worker N=5 pass")?;
    let opts = ScanOptions {
        collect_all: true,
        ..Default::default()
    };
    let id = conjecture1_scan(5, Some(&perm("0,1,2,3,4")), Strategy::Exhaustive, &opts).map_err(|e| e.to_string())?;
    ensure!(id.outcome == ScanOutcome::Refuted, "identity: {:?}", id.outcome);
    let refs = id.refutation.unwrap();
    ensure!(refs.iter().all(|r| r.exact_singular == Some(true)), "a refutation lacks the exact verdict");
    for rows in ["10000 01010 01100 00011 00101", "10000 01100 00101 01010 00011"] {
        let mask = mask_from(rows);
        let counter = conj1_counter(&mask).unwrap();
        let hit = refs.iter().any(|r| matches!(&r.counterexample, Counterexample::Mask { counter: c, .. } if *c == counter));
        ensure!(hit, "mask {rows} missing from {} refutations", refs.len());
        ensure!(exact_singular_oracle(5, &conj1_exponents(&[0, 1, 2, 3, 4], &mask)), "oracle: {rows} not singular");
    }
    Ok(())
}

fn c4() -> Check {
    let start = Instant::now();
    let v = conjecture1_scan(6, None, Strategy::RandomizedRefute, &ScanOptions::default()).map_err(|e| e.to_string())?;
    ensure!(v.outcome == ScanOutcome::Refuted && v.witness_rho.is_none(), "outcome {:?}", v.outcome);
    ensure!(v.inconclusive.is_empty(), "{} permutations unrefuted", v.inconclusive.len());
    let refs = v.refutation.unwrap();
    let mut rhos: Vec<_> = refs.iter().map(|r| r.rho.clone()).collect();
    rhos.dedup();
    ensure!(rhos.len() == 720, "{} permutations refuted", rhos.len());
    for r in &refs {
        ensure!(r.exact_singular == Some(true), "rho {} lacks exact verdict", r.rho);
        let Counterexample::Mask { mask, .. } = &r.counterexample else {
            return Err("refutation without a mask".into());
        };
        ensure!(exact_singular_oracle(6, &conj1_exponents(r.rho.map(), mask)), "oracle rejects rho {}", r.rho);
    }
    within(start, Duration::from_secs(1800), "criterion 4")
}

fn c5() -> Check {
    let start = Instant::now();
    let opts = ScanOptions::default();
    let id = |n: usize| PermutationAssignment::identity(n);
    for n in [2, 3, 5, 7] {
        let v = conjecture2_scan(n, Some(&id(n)), &opts).map_err(|e| e.to_string())?;
        ensure!(v.outcome == ScanOutcome::Pass, "N={n} identity: {:?}", v.outcome);
        ensure!(v.subsets.len() == (1 << n) - 1, "N={n}: {} subsets", v.subsets.len());
    }
    let v = conjecture2_scan(4, Some(&id(4)), &opts).map_err(|e| e.to_string())?;
    let failing: Vec<Vec<usize>> = v.subsets.iter().filter(|s| s.singular).map(|s| s.subset.clone()).collect();
    ensure!(failing == vec![vec![0, 2], vec![1, 3]], "N=4 identity fails on {failing:?}");
    let v = conjecture2_scan(4, Some(&perm("0,2,1,3")), &opts).map_err(|e| e.to_string())?;
    ensure!(v.outcome == ScanOutcome::Pass, "N=4 0,2,1,3: {:?}", v.outcome);
    for n in 1..=8 {
        let v = conjecture2_scan(n, None, &opts).map_err(|e| e.to_string())?;
        let w = v.witness_rho.ok_or(format!("no witness for N={n}"))?;
        // Independent check of the witness on every principal submatrix.
        for bits in 1u32..1 << n {
            let sub: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
            let a: Vec<Vec<Complex64>> = sub
                .iter()
                .map(|&k| {
                    sub.iter()
                        .map(|&l| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (w.apply(k) * l) as f64 / n as f64))
                        .collect()
                })
                .collect();
            ensure!(sub.len() > 7 || leibniz(&a).norm() > 1e-9, "N={n} witness {w}: subset {sub:?} singular");
        }
    }
    within(start, Duration::from_secs(60), "criterion 5")
}

fn c6() -> Check {
    for n in 1..=8 {
        let full = build_integer_masked_matrix(n, &(0..n).collect::<Vec<_>>(), &vec![GridSupport::full(n).unwrap(); n])
            .map_err(|e| e.to_string())?;
        let lb = classify_system(&full).lower_bound.ok_or("full mask: no bound")?;
        ensure!((lb - 1.0).abs() <= 1e-12, "N={n}: full-mask bound {lb}");
        for cell in 0..n {
            let single = build_integer_masked_matrix(n, &[(cell * 3 + 1) % n], &[g(n, &[cell])]).map_err(|e| e.to_string())?;
            let lb = classify_system(&single).lower_bound.ok_or("single cell: no bound")?;
            ensure!((lb - 1.0 / n as f64).abs() <= 1e-12, "N={n} cell {cell}: bound {lb}");
        }
    }
    Ok(())
}

fn c7() -> Check {
    let m = build_integer_masked_matrix(4, &[1, 3, 2, 0], &alternating_masks()).map_err(|e| e.to_string())?;
    let d = dual_basis(&m).map_err(|e| e.to_string())?;
    let defect = verify_biorthogonality(&m, &d, DEFAULT_BIORTHOGONALITY_TRUNCATION).map_err(|e| e.to_string())?;
    ensure!(defect <= 1e-10, "alternating masks: defect {defect:e}");
    for n in 1..=6 {
        let full = build_integer_masked_matrix(n, &(0..n).collect::<Vec<_>>(), &vec![GridSupport::full(n).unwrap(); n])
            .map_err(|e| e.to_string())?;
        let d = dual_basis(&full).map_err(|e| e.to_string())?;
        let defect = verify_biorthogonality(&full, &d, DEFAULT_BIORTHOGONALITY_TRUNCATION).map_err(|e| e.to_string())?;
        ensure!(defect <= 1e-12, "N={n} orthonormal: defect {defect:e}");
        let expected = ComplexMatrix::from_fn(n, n, |r, c| {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (r * c) as f64 / n as f64) / n as f64
        });
        let diff = d.z.max_abs_diff(&expected);
        ensure!(diff <= 1e-12, "N={n}: z differs from W*/N by {diff:e}");
    }
    Ok(())
}

fn c8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let random = |rng: &mut ChaCha8Rng, k: usize| {
        let a: Vec<Vec<Complex64>> = (0..k)
            .map(|_| (0..k).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        let density = rng.gen_range(0.3..1.0);
        let m = BinaryMask::from_fn(k, k, |_, _| rng.gen_bool(density));
        (a, m)
    };
    let to_matrix = |a: &[Vec<Complex64>]| ComplexMatrix::from_fn(a.len(), a.len(), |r, c| a[r][c]);
    let fact = |k: usize| (1..=k).product::<usize>() as f64;
    for trial in 0..100 {
        let k = 1 + trial % 6;
        let (a, m) = random(&mut rng, k);
        let res = lemma_search(&to_matrix(&a), &m, SearchMode::Exhaustive).map_err(|e| e.to_string())?;
        let r = brute_permanent(&m);
        ensure!(res.r == r, "trial {trial}: permanent {} vs oracle {r}", res.r);
        let bound = r as f64 * leibniz(&a).norm() / fact(k);
        let masked: Vec<Vec<Complex64>> = (0..k)
            .map(|row| (0..k).map(|c| if m.get(row, c) { a[res.rho.apply(row)][c] } else { Complex64::new(0.0, 0.0) }).collect())
            .collect();
        let got = leibniz(&masked).norm();
        ensure!(got >= bound - 1e-9, "trial {trial}: |det| {got} below bound {bound}");
    }
    for k in 1..=5 {
        for _ in 0..10 {
            let (a, m) = random(&mut rng, k);
            let am = to_matrix(&a);
            let sum: Complex64 = permutations(k)
                .iter()
                .map(|p| masked_permuted_det(&am, &m, p) * parity(p) as f64)
                .sum();
            let expected = leibniz(&a) * brute_permanent(&m) as f64;
            let err = (sum - expected).norm();
            ensure!(err <= 1e-8 * expected.norm().max(1e-300) || err <= 1e-12, "K={k}: averaging identity off by {err:e}");
        }
    }
    Ok(())
}

fn c9() -> Check {
    let start = Instant::now();
    let mut count = 0;
    for m in all_memberships() {
        let tag = classify_triple(&TripleConfig::new(m)).map_err(|e| e.to_string())?;
        ensure!(case_holds(&m, tag.kind, tag.k), "{m:?}: tag {tag} does not hold");
        count += 1;
    }
    ensure!(count == 64, "{count} memberships");
    let table = [
        ("1", "2", "i"),
        ("1", "1,2", "i"),
        ("1", "2,3", "i"),
        ("1", "1,2,3", "i"),
        ("1,2", "2", "i"),
        ("1,2", "1,2", "ii3"),
        ("1,2", "2,3", "*"),
        ("1,2", "1,2,3", "*"),
        ("1,3", "2", "i"),
        ("1,3", "1,2", "ii2"),
        ("1,3", "2,3", "ii2"),
        ("1,3", "1,2,3", "ii2"),
        ("1,2,3", "2", "i"),
        ("1,2,3", "1,2", "*"),
        ("1,2,3", "2,3", "*"),
        ("1,2,3", "1,2,3", "*"),
    ];
    for (i, (l1, l2, case)) in table.iter().enumerate() {
        let t = classify_triple(&TripleConfig::parse(&format!("{l1};{l2};1,3")).unwrap()).map_err(|e| e.to_string())?;
        let got = match (t.kind, t.k) {
            (CaseKind::CaseI, _) => "i".to_string(),
            (CaseKind::CaseII, Some(k)) => format!("ii{k}"),
            _ => "*".to_string(),
        };
        ensure!(t.proof_branch == format!("2-{}", i + 1) && got == *case, "branch 2-{}: {} {got}", i + 1, t.proof_branch);
    }
    let (intervals, freqs) = canonical_n3();
    for m in all_memberships() {
        let members: Vec<Vec<usize>> = m.iter().map(|&x| membership_indices(x).iter().map(|i| i - 1).collect()).collect();
        let cls = cross_check_periodic(3, &intervals, &freqs, &members).map_err(|e| e.to_string())?;
        ensure!(cls.verdict == Verdict::RieszBasis, "{members:?}: {}", cls.verdict.as_str());
    }
    let four: Vec<GridSupport> = (0..4).map(|k| g(4, &[k])).collect();
    let freqs4: Vec<CosetSystem> = (0..4).map(|k| CosetSystem::integer(4, [k]).unwrap()).collect();
    let cls = cross_check_periodic(4, &four, &freqs4, &[vec![0, 2], vec![1, 3], vec![0, 2], vec![1, 3]])
        .map_err(|e| e.to_string())?;
    ensure!(cls.verdict == Verdict::Neither, "four intervals: {}", cls.verdict.as_str());
    within(start, Duration::from_secs(1), "criterion 9")
}

fn c10() -> Check {
    let start = Instant::now();
    let n = 3;
    let full = build_filters(n, &vec![GridSupport::full(n).unwrap(); n], Some(&PermutationAssignment::identity(n)))
        .map_err(|e| e.to_string())?;
    let tones = vec![(0, Complex64::new(1.0, 0.5)), (-7, Complex64::new(0.2, 0.0)), (5, Complex64::new(0.0, -0.4))];
    let fhat = SpectrumFunction::zero(n, 2).unwrap().with_tones(tones);
    let s = generalized_samples(&fhat, &full, 4).map_err(|e| e.to_string())?;
    let err = reconstruct(&s, &full, &fhat).map_err(|e| e.to_string())?.relative_error;
    ensure!(err <= 1e-10, "in-span error {err:e}");
    let bank = build_filters(4, &alternating_masks(), None).map_err(|e| e.to_string())?;
    let fhat = SpectrumFunction::random(4, 4, 2024).unwrap();
    let err = |m: i64| -> Result<f64, String> {
        let s = generalized_samples(&fhat, &bank, m).map_err(|e| e.to_string())?;
        Ok(reconstruct(&s, &bank, &fhat).map_err(|e| e.to_string())?.relative_error)
    };
    let (e1, e2) = (err(2048)?, err(8192)?);
    ensure!(e1 <= 0.05, "error at 2048: {e1}");
    ensure!(e2 / e1 <= 0.6, "ratio {}", e2 / e1);
    println!("              relative error {e1:.4e} at 2048, {e2:.4e} at 8192, ratio {:.3}", e2 / e1);
    within(start, Duration::from_secs(10), "criterion 10")
}

fn c11() -> Check {
    let base = vec![g(5, &[0, 1, 2]), g(5, &[3]), g(5, &[4])];
    let supports = vec![g(5, &[3, 4]), g(5, &[0, 1, 2, 4]), g(5, &[0, 1, 2, 3])];
    let freqs = vec![
        CosetSystem::integer(5, [0, 1, 2]).unwrap(),
        CosetSystem::integer(5, [3]).unwrap(),
        CosetSystem::integer(5, [4]).unwrap(),
    ];
    let report = check_necessary_conditions(&base, &supports, &freqs).map_err(|e| e.to_string())?;
    let first = &report.nc1[0];
    ensure!(!first.pass, "first condition passes at k=1");
    ensure!(
        first.measure == Rational::new(2, 5) && first.density == Rational::new(3, 5),
        "k=1: {} vs {}",
        first.measure,
        first.density
    );
    let base: Vec<_> = (0..4).map(|k| g(4, &[k])).collect();
    let supports = vec![g(4, &[0, 2]), g(4, &[1, 3]), g(4, &[0, 2]), g(4, &[1, 3])];
    let freqs: Vec<_> = (0..4).map(|k| CosetSystem::integer(4, [k]).unwrap()).collect();
    let report = check_necessary_conditions(&base, &supports, &freqs).map_err(|e| e.to_string())?;
    ensure!(report.nc1_pass() && report.nc2_pass(), "four-interval system fails a necessary condition");
    Ok(())
}

fn c12() -> Check {
    let scans: [&[&str]; 5] = [
        &["conjecture1", "--n", "5", "--rho", "0,1,2,3,4", "--collect-all"],
        &["conjecture1", "--n", "4", "--all-witnesses"],
        &["conjecture1", "--n", "6", "--strategy", "randomized", "--seed", "7"],
        &["conjecture2", "--n", "6"],
        &["hierarchy", "--n", "5", "--prime", "7"],
    ];
    for args in scans {
        let mut results = Vec::new();
        for threads in ["1", "4", "8"] {
            let mut argv = args.to_vec();
            argv.extend(["--threads", threads]);
            let a = cli(&argv);
            let b = cli(&argv);
            let (ca, cb) = (a.cert.ok_or("no certificate")?, b.cert.ok_or("no certificate")?);
            ensure!(
                serde_json::to_string(&strip_volatile(&ca)).unwrap() == serde_json::to_string(&strip_volatile(&cb)).unwrap(),
                "{args:?} at {threads} threads: reruns differ"
            );
            ensure!(verify_raw(a.raw.as_ref().unwrap()) == 0, "{args:?}: certificate does not re-verify");
            results.push(ca["results"].clone());
        }
        ensure!(results.windows(2).all(|w| w[0] == w[1]), "{args:?}: verdicts differ across 1, 4, 8 workers");
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("alternating masks: identity singular, construction feasible", c1),
        ("N=4 masked Fourier scan passes for 0,2,1,3", c2),
        ("N=5 witness passes 2^20 masks, identity refuted", c3),
        ("N=6 every permutation refuted", c4),
        ("principal-submatrix scans", c5),
        ("lower Riesz bound anchors", c6),
        ("dual basis biorthogonality", c7),
        ("permutation bound and averaging identity", c8),
        ("three-interval case table and periodic cross-check", c9),
        ("sampling reconstruction", c10),
        ("necessary conditions", c11),
        ("determinism across reruns and worker counts", c12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
