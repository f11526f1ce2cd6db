//! Registry of published configurations, each rebuilt from its defining
//! parameters and checked against its known claim.

use riesz_core::conjecture::{
    conj1_counter, conj1_mask_fails, conj1_spec, conjecture1_scan, conjecture2_scan,
    hierarchical_noninteger_check, Counterexample, ScanOptions, ScanOutcome, Strategy,
};
use riesz_core::cyclotomic::exact_zero_det;
use riesz_core::grid::{check_necessary_conditions, format_rational, CosetSystem, GridSupport};
use riesz_core::linalg::sigma_min;
use riesz_core::mask::BinaryMask;
use riesz_core::masked::{build_integer_masked_matrix, classify_system, Verdict};
use riesz_core::perm::{theorem1_construct, theorem1_with_rho, PermutationAssignment};
use serde_json::{json, Value};

use crate::commands::{Context, Outcome, Status};
use crate::CliError;

pub struct Fixture {
    pub id: &'static str,
    pub claim: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        id: "ex1-Aid-singular",
        claim: "masks {0,2},{0,1,2,3},{0,2},{0,1,2,3} with the identity permutation give an exactly singular matrix",
    },
    Fixture {
        id: "ex1-construct",
        claim: "masks {0,2},{0,1,2,3},{0,2},{0,1,2,3} admit a Riesz basis; rho = 0,2,1,3 is feasible",
    },
    Fixture {
        id: "ex2-nc1-fail",
        claim: "supports {3,4},{0,1,2,4},{0,1,2,3} on Z_5 with cosets {0,1,2},{3},{4} violate the first necessary condition at k=1 with 2/5 < 3/5",
    },
    Fixture {
        id: "ex3-neither",
        claim: "the four-interval system S = {0,2},{1,3},{0,2},{1,3} on Z_4 passes both necessary conditions but is not a Riesz basis",
    },
    Fixture {
        id: "n4-conj1-witness",
        claim: "N=4, rho = 0,2,1,3 keeps every diagonal-containing mask invertible",
    },
    Fixture {
        id: "n5-conj1-witness",
        claim: "N=5, rho = 0,1,2,4,3 keeps every diagonal-containing mask invertible",
    },
    Fixture {
        id: "n5-conj1-counterexample-1",
        claim: "N=5, identity permutation: mask 10000/01010/01100/00011/00101 is exactly singular",
    },
    Fixture {
        id: "n5-conj1-counterexample-2",
        claim: "N=5, identity permutation: mask 10000/01100/00101/01010/00011 is exactly singular",
    },
    Fixture {
        id: "n4-conj2-id-refuted",
        claim: "N=4, identity permutation: exactly the principal subsets {0,2} and {1,3} are singular",
    },
    Fixture {
        id: "n4-conj2-witness",
        claim: "N=4, rho = 0,2,1,3: all 15 principal submatrices are invertible",
    },
    Fixture {
        id: "hier-n4-p5",
        claim: "N=4, P=5: every principal submatrix with offsets kN/P is invertible",
    },
];

pub fn ids() -> Vec<&'static str> {
    FIXTURES.iter().map(|f| f.id).collect()
}

fn g(n: usize, cells: &[usize]) -> GridSupport {
    GridSupport::new(n, cells.iter().copied()).expect("fixture cells are valid")
}

fn perm(s: &str) -> PermutationAssignment {
    PermutationAssignment::parse(s).expect("fixture permutations are valid")
}

pub fn alternating_masks() -> Vec<GridSupport> {
    vec![g(4, &[0, 2]), g(4, &[0, 1, 2, 3]), g(4, &[0, 2]), g(4, &[0, 1, 2, 3])]
}

pub const N5_COUNTEREXAMPLES: [&str; 2] = [
    "10000 01010 01100 00011 00101",
    "10000 01100 00101 01010 00011",
];

fn scan_opts(ctx: &Context) -> ScanOptions {
    ScanOptions {
        threads: ctx.threads,
        ..Default::default()
    }
}

fn counterexample(text: &str) -> Result<(bool, Value), CliError> {
    let id = perm("0,1,2,3,4");
    let mask = BinaryMask::parse_square(text)?;
    let spec = conj1_spec(id.map(), &mask);
    let exact = exact_zero_det(&spec)?;
    let pipeline = conj1_mask_fails(&id, &mask)?;
    let details = json!({
        "mask": mask.bits().iter().map(|&b| u8::from(b)).collect::<Vec<_>>(),
        "counter": conj1_counter(&mask)?,
        "sigma_min": sigma_min(&spec.to_complex()),
        "exact_singular": exact,
        "scan_pipeline_flags": pipeline,
    });
    Ok((exact && pipeline, details))
}

fn conj1_fixture(n: usize, rho: &str, ctx: &Context) -> Result<(bool, Value), CliError> {
    let v = conjecture1_scan(n, Some(&perm(rho)), Strategy::Exhaustive, &scan_opts(ctx))?;
    let details = json!({
        "outcome": v.outcome,
        "masks_tested": v.stats.masks_tested as u64,
    });
    Ok((v.outcome == ScanOutcome::Pass, details))
}

pub fn reproduce(id: &str, ctx: &Context) -> Result<Outcome, CliError> {
    let fixture = FIXTURES
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| riesz_core::Error::NotFound(format!("no fixture {id:?}; known: {}", ids().join(", "))))?;
    let cells = [0, 1, 2, 3];
    let (holds, details) = match id {
        "ex1-Aid-singular" => {
            let con = theorem1_with_rho(4, &cells, &alternating_masks(), &perm("0,1,2,3"))?;
            let cls = &con.classification;
            let details = json!({
                "offsets": con.offsets,
                "verdict": cls.verdict.as_str(),
                "sigma_min": cls.sigma_min,
                "exact_singular": cls.exact_singular,
            });
            (cls.exact_singular == Some(true) && cls.verdict == Verdict::Neither, details)
        }
        "ex1-construct" => {
            let con = theorem1_construct(4, &cells, &alternating_masks())?;
            let known = theorem1_with_rho(4, &cells, &alternating_masks(), &perm("0,2,1,3"))?;
            let details = json!({
                "rho": con.rho.to_string(),
                "offsets": con.offsets,
                "verdict": con.classification.verdict.as_str(),
                "guarantee": con.lemma.guarantee,
                "known_rho_offsets": known.offsets,
                "known_rho_verdict": known.classification.verdict.as_str(),
            });
            let holds = con.classification.verdict == Verdict::RieszBasis
                && known.classification.verdict == Verdict::RieszBasis;
            (holds, details)
        }
        "ex2-nc1-fail" => {
            let base = vec![g(5, &[0, 1, 2]), g(5, &[3]), g(5, &[4])];
            let supports = vec![g(5, &[3, 4]), g(5, &[0, 1, 2, 4]), g(5, &[0, 1, 2, 3])];
            let freqs = vec![
                CosetSystem::integer(5, [0, 1, 2])?,
                CosetSystem::integer(5, [3])?,
                CosetSystem::integer(5, [4])?,
            ];
            let report = check_necessary_conditions(&base, &supports, &freqs)?;
            let first = &report.nc1[0];
            let details = json!({
                "nc1": report.nc1.iter().map(|e| json!({
                    "measure": format_rational(&e.measure),
                    "density": format_rational(&e.density),
                    "pass": e.pass,
                })).collect::<Vec<_>>(),
                "nc2_pass": report.nc2_pass(),
            });
            let holds = !first.pass
                && format_rational(&first.measure) == "2/5"
                && format_rational(&first.density) == "3/5";
            (holds, details)
        }
        "ex3-neither" => {
            let base: Vec<_> = (0..4).map(|k| g(4, &[k])).collect();
            let supports = vec![g(4, &[0, 2]), g(4, &[1, 3]), g(4, &[0, 2]), g(4, &[1, 3])];
            let freqs = (0..4).map(|k| CosetSystem::integer(4, [k])).collect::<riesz_core::Result<Vec<_>>>()?;
            let report = check_necessary_conditions(&base, &supports, &freqs)?;
            let cls = classify_system(&build_integer_masked_matrix(4, &[0, 1, 2, 3], &supports)?);
            let details = json!({
                "nc1_pass": report.nc1_pass(),
                "nc2_pass": report.nc2_pass(),
                "verdict": cls.verdict.as_str(),
                "exact_singular": cls.exact_singular,
            });
            (report.pass() && cls.verdict == Verdict::Neither, details)
        }
        "n4-conj1-witness" => conj1_fixture(4, "0,2,1,3", ctx)?,
        "n5-conj1-witness" => conj1_fixture(5, "0,1,2,4,3", ctx)?,
        "n5-conj1-counterexample-1" => counterexample(N5_COUNTEREXAMPLES[0])?,
        "n5-conj1-counterexample-2" => counterexample(N5_COUNTEREXAMPLES[1])?,
        "n4-conj2-id-refuted" => {
            let v = conjecture2_scan(4, Some(&perm("0,1,2,3")), &scan_opts(ctx))?;
            let failing: Vec<Vec<usize>> = v
                .refutation
                .iter()
                .flatten()
                .filter_map(|r| match &r.counterexample {
                    Counterexample::Subset(s) => Some(s.clone()),
                    Counterexample::Mask { .. } => None,
                })
                .collect();
            let holds = failing == vec![vec![0, 2], vec![1, 3]]
                && v.refutation.iter().flatten().all(|r| r.exact_singular == Some(true));
            (holds, json!({ "failing_subsets": failing }))
        }
        "n4-conj2-witness" => {
            let v = conjecture2_scan(4, Some(&perm("0,2,1,3")), &scan_opts(ctx))?;
            let holds = v.outcome == ScanOutcome::Pass && v.subsets.len() == 15;
            (holds, json!({ "outcome": v.outcome, "subsets_checked": v.subsets.len() }))
        }
        "hier-n4-p5" => {
            let v = hierarchical_noninteger_check(4, 5, ctx.threads)?;
            let worst = v.subsets.iter().map(|s| s.sigma_min).fold(f64::INFINITY, f64::min);
            let details = json!({
                "outcome": v.outcome,
                "subsets_checked": v.subsets.len(),
                "smallest_sigma_min": worst,
            });
            (v.outcome == ScanOutcome::Pass, details)
        }
        _ => unreachable!("registry and dispatch list the same ids"),
    };
    let results = json!({
        "id": id,
        "claim": fixture.claim,
        "holds": holds,
        "details": details,
    });
    let status = if holds { Status::Ok } else { Status::Refuted };
    let summary = format!("{id}: {} ({})", if holds { "reproduced" } else { "NOT reproduced" }, fixture.claim);
    Ok(Outcome {
        results,
        status,
        summary,
        report: None,
        wall_time: 0.0,
    })
}
