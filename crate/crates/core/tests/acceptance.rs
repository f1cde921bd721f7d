//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::corpus::{e_pairs, mm_pairs, random_word, Pair, PairKind};
use common::oracle::{e_accept_prob, increment, mm_accept_prob};
use qfa_equiv::catalog;
use qfa_equiv::cli::random::{random_e_with, random_kraus, random_mm_with, rng_from_seed};
use qfa_equiv::equivalence::{decide_e, decide_mm, dimension_bound, enumerate_equiv, Decision};
use qfa_equiv::{
    ComplexMatrix, DensityMatrix, E1qfa, Superoperator, Tolerances, Verdict, Word, WordFunction,
};
use rand::Rng;
use rayon::prelude::*;

const TOL_VALUES: f64 = 1e-12;
const TOL_CHANNEL: f64 = 1e-10;
const CORPUS_SEED: u64 = 2024;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    use std::f64::consts::FRAC_PI_4;
    let rot = catalog::rot(FRAC_PI_4);
    let e_rot = E1qfa::from_mm(&rot).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (w, expected) in [(vec![], 0.5), (vec![0], 0.75), (vec![0, 0], 0.875)] {
        let word = Word::from(w.clone());
        for p in [
            rot.accept_prob(&word).unwrap(),
            e_rot.accept_prob(&word).unwrap(),
            mm_accept_prob(&rot, &w),
            e_accept_prob(&e_rot, &w),
        ] {
            worst = worst.max((p - expected).abs());
        }
    }
    ensure(worst <= TOL_VALUES, || format!("max deviation {worst:.3e}"))?;
    Ok(format!(
        "ROT and its E embedding give 0.5/0.75/0.875, max deviation {worst:.1e}"
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = rng_from_seed(CORPUS_SEED + 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let a = random_mm_with(n, 2, &mut rng);
        for _ in 0..100 {
            let w = random_word(&mut rng, 2, 6);
            let mut sum = a.noncumulative(&Word::empty()).unwrap();
            for k in 1..=w.len() {
                sum += a
                    .noncumulative(&Word::from(w.symbols()[..k].to_vec()))
                    .unwrap();
            }
            worst = worst.max((sum - a.accept_prob(&w).unwrap()).abs());
            worst = worst.max((a.accept_prob(&w).unwrap() - mm_accept_prob(&a, w.symbols())).abs());
        }
    }
    ensure(worst <= TOL_VALUES, || format!("max deviation {worst:.3e}"))?;
    Ok(format!(
        "100 automata x 100 words, max deviation {worst:.1e}"
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(CORPUS_SEED + 3);
    let mut worst_mm: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let a = random_mm_with(n, 2, &mut rng);
        for _ in 0..20 {
            let w = random_word(&mut rng, 2, 6);
            let f = a.eta(&w).unwrap().bilinear(a.initial()).re;
            worst_mm = worst_mm.max((f - increment(|x| mm_accept_prob(&a, x), w.symbols())).abs());
        }
    }
    let mut worst_e: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=2);
        let a = random_e_with(n, 2, 2, &mut rng);
        let q0 = a.initial_state();
        for _ in 0..20 {
            let w = random_word(&mut rng, 2, 5);
            let f = a.theta(&w).unwrap().get(q0, q0).re;
            worst_e = worst_e.max((f - increment(|x| e_accept_prob(&a, x), w.symbols())).abs());
        }
    }
    ensure(worst_mm <= TOL_VALUES && worst_e <= TOL_VALUES, || {
        format!("max deviation MM {worst_mm:.3e}, E {worst_e:.3e}")
    })?;
    Ok(format!("max deviation MM {worst_mm:.1e}, E {worst_e:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = rng_from_seed(CORPUS_SEED + 4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let a = random_mm_with(n, 2, &mut rng);
        let m = rng.random_range(1..=2);
        let e = random_e_with(m, 2, 2, &mut rng);
        for _ in 0..10 {
            let mut w = random_word(&mut rng, 2, 5);
            if w.is_empty() {
                w = Word::from(vec![rng.random_range(0..2)]);
            }
            let y = rng.random_range(0..2);
            let eta = a.go_operator(y).congruence(&a.eta(&w).unwrap());
            worst = worst.max(eta.max_abs_diff(&a.eta(&w.prepend(y)).unwrap()));
            let vt = e.go_pull_back(y, &e.vartheta(&w).unwrap());
            worst = worst.max(vt.max_abs_diff(&e.vartheta(&w.prepend(y)).unwrap()));
        }
    }
    ensure(worst <= TOL_VALUES, || {
        format!("max entrywise deviation {worst:.3e}")
    })?;
    Ok(format!(
        "1000 MM and 1000 E checks, max entrywise deviation {worst:.1e}"
    ))
}

/// Closure decision and full-bound enumeration for one pair.
struct Run {
    kind: PairKind,
    bound: usize,
    decision: Decision,
    enumerated: Verdict,
    closure_sound: bool,
    enumerate_sound: bool,
}

fn sound<A: WordFunction>(a1: &A, a2: &A, v: &Verdict, tol_eq: f64) -> bool {
    match v {
        Verdict::NotEquivalent { word, .. } => {
            let p1 = a1.word_prob(word).unwrap();
            let p2 = a2.word_prob(word).unwrap();
            (p1 - p2).abs() > tol_eq
        }
        _ => true,
    }
}

fn run_pairs<A, F>(pairs: &[Pair<A>], decide: F) -> Result<Vec<Run>, String>
where
    A: WordFunction + Send + Sync,
    F: Fn(&A, &A, &Tolerances) -> Result<Decision, qfa_equiv::equivalence::EquivError> + Sync,
{
    let tol = Tolerances::default();
    pairs
        .par_iter()
        .map(|p| {
            let decision = decide(&p.a1, &p.a2, &tol).map_err(|e| e.to_string())?;
            let enumerated =
                enumerate_equiv(&p.a1, &p.a2, None, tol.eq, 1).map_err(|e| e.to_string())?;
            Ok(Run {
                kind: p.kind,
                bound: dimension_bound(p.a1.num_states(), p.a2.num_states()),
                closure_sound: sound(&p.a1, &p.a2, &decision.verdict, tol.eq),
                enumerate_sound: sound(&p.a1, &p.a2, &enumerated, tol.eq),
                decision,
                enumerated,
            })
        })
        .collect()
}

fn agreement(runs: &[Run], elapsed: Duration) -> Outcome {
    let mut disagreements = Vec::new();
    let mut equivalent = 0;
    for (i, r) in runs.iter().enumerate() {
        let same = matches!(
            (&r.decision.verdict, &r.enumerated),
            (Verdict::Equivalent, Verdict::Equivalent)
                | (Verdict::NotEquivalent { .. }, Verdict::NotEquivalent { .. })
        );
        if !same {
            disagreements.push(format!(
                "#{i} {:?}: {} vs {}",
                r.kind, r.decision.verdict, r.enumerated
            ));
        }
        if r.decision.verdict == Verdict::Equivalent {
            equivalent += 1;
        }
    }
    let constructed_equal_ok = runs
        .iter()
        .filter(|r| matches!(r.kind, PairKind::Permuted | PairKind::Remixed))
        .all(|r| r.decision.verdict == Verdict::Equivalent);
    ensure(disagreements.is_empty(), || disagreements.join("; "))?;
    ensure(constructed_equal_ok, || {
        "a pair built equivalent was not reported Equivalent".into()
    })?;
    Ok(format!(
        "{} pairs agree ({} equivalent, {} not), {:.2} s",
        runs.len(),
        equivalent,
        runs.len() - equivalent,
        elapsed.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u32, title: &str, outcome: Outcome| match &outcome {
        Ok(detail) => println!("PASS criterion {n:>2} ({title}): {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL criterion {n:>2} ({title}): {detail}");
        }
    };
    let guarded = |f: &dyn Fn() -> Outcome| -> Outcome {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        })
    };

    report(1, "worked values", guarded(&criterion_1));
    report(2, "telescoping identity", guarded(&criterion_2));
    report(3, "bilinear identities", guarded(&criterion_3));
    report(4, "recurrences", guarded(&criterion_4));

    let started = Instant::now();
    let mm_runs = run_pairs(&mm_pairs(CORPUS_SEED), decide_mm);
    let mm_time = started.elapsed();
    let started = Instant::now();
    let e_runs = run_pairs(&e_pairs(CORPUS_SEED), decide_e);
    let e_time = started.elapsed();

    report(
        5,
        "MM closure vs enumeration",
        mm_runs
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|r| agreement(r, mm_time)),
    );
    report(
        6,
        "E closure vs enumeration",
        e_runs
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|r| agreement(r, e_time)),
    );

    let c7 = match (&mm_runs, &e_runs) {
        (Ok(mm), Ok(e)) => {
            let over: Vec<String> = mm
                .iter()
                .chain(e.iter())
                .filter(|r| r.decision.basis_size > r.bound)
                .map(|r| format!("{} > {}", r.decision.basis_size, r.bound))
                .collect();
            let max_mm = mm.iter().map(|r| r.decision.basis_size).max().unwrap_or(0);
            let max_e = e.iter().map(|r| r.decision.basis_size).max().unwrap_or(0);
            ensure(over.is_empty(), || over.join("; ")).map(|_| {
                format!(
                    "max basis size MM {max_mm} (bound at most 18), E {max_e} (bound at most 8)"
                )
            })
        }
        _ => Err("corpus runs failed".to_string()),
    };
    report(7, "dimension bound", c7);

    let c8 = match (&mm_runs, &e_runs) {
        (Ok(mm), Ok(e)) => {
            let all: Vec<&Run> = mm.iter().chain(e.iter()).collect();
            let counterexamples = all
                .iter()
                .map(|r| {
                    matches!(r.decision.verdict, Verdict::NotEquivalent { .. }) as usize
                        + matches!(r.enumerated, Verdict::NotEquivalent { .. }) as usize
                })
                .sum::<usize>();
            let unsound = all
                .iter()
                .filter(|r| !(r.closure_sound && r.enumerate_sound))
                .count();
            ensure(unsound == 0, || {
                format!("{unsound} pairs with an unsound counterexample")
            })
            .map(|_| format!("{counterexamples} counterexamples re-evaluated, all gaps > tol_eq"))
        }
        _ => Err("corpus runs failed".to_string()),
    };
    report(8, "counterexample soundness", c8);

    report(9, "channel sanity", guarded(&criterion_9));
    report(10, "CLI end-to-end", guarded(&criterion_10));

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn criterion_9() -> Outcome {
    let mut rng = rng_from_seed(CORPUS_SEED + 9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let r = rng.random_range(1..=3);
        let s = Superoperator::new(random_kraus(n, r, &mut rng), TOL_CHANNEL)
            .map_err(|e| e.to_string())?;
        // a mixed input state: another channel applied to a basis state
        let prep = Superoperator::new(random_kraus(n, 2, &mut rng), TOL_CHANNEL).unwrap();
        let rho = prep
            .apply(&DensityMatrix::pure_basis(n, rng.random_range(0..n)))
            .unwrap();
        let out = s.apply(&rho).unwrap();
        worst = worst.max((out.matrix().trace().unwrap().re - 1.0).abs());
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let proj = |l: usize| {
            ComplexMatrix::diagonal(
                &labels
                    .iter()
                    .map(|&x| (x == l) as u8 as f64)
                    .collect::<Vec<_>>(),
            )
        };
        let total: f64 = (0..3)
            .map(|l| {
                s.apply_projected(&proj(l), rho.matrix())
                    .unwrap()
                    .trace()
                    .unwrap()
                    .re
            })
            .sum();
        worst = worst.max((total - 1.0).abs());
    }
    ensure(worst <= TOL_CHANNEL, || {
        format!("max deviation {worst:.3e}")
    })?;
    Ok(format!("100 Kraus sets, max deviation {worst:.1e}"))
}

fn criterion_10() -> Outcome {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let run = |args: &[&str]| {
        let args: Vec<String> = args
            .iter()
            .map(|a| {
                if a.ends_with(".json") {
                    fixtures.join(a).display().to_string()
                } else {
                    a.to_string()
                }
            })
            .collect();
        Command::new(env!("CARGO_BIN_EXE_qfa"))
            .args(&args)
            .output()
            .expect("binary runs")
    };
    let cases: [(&[&str], i32); 6] = [
        (&["equiv", "rot.json", "rot.json"], 0),
        (
            &[
                "equiv",
                "rot.json",
                "rot_permuted.json",
                "--method",
                "enumerate",
            ],
            0,
        ),
        (&["equiv", "all1.json", "none.json"], 1),
        (&["equiv", "rot.json", "rot_pi3.json"], 1),
        (&["equiv", "missing_endmarker.json", "rot.json"], 2),
        (&["equiv", "malformed.json", "rot.json"], 3),
    ];
    for (args, code) in cases {
        let o = run(args);
        ensure(o.status.code() == Some(code), || {
            format!("{args:?} exited {:?}, want {code}", o.status.code())
        })?;
    }
    let o = run(&["equiv", "all1.json", "none.json", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
    for key in [
        "equivalent",
        "counterexample",
        "p1",
        "p2",
        "basis_size",
        "method",
    ] {
        ensure(v.get(key).is_some(), || format!("JSON verdict lacks {key}"))?;
    }
    ensure(
        v["equivalent"] == false && v["counterexample"] == "" && v["p1"] == 1.0 && v["p2"] == 0.0,
        || format!("unexpected ALL1 vs NONE verdict {v}"),
    )?;
    let o = run(&["run", "rot.json", "--word", "aa"]);
    ensure(
        String::from_utf8_lossy(&o.stdout).contains("probability: 0.875"),
        || "run rot aa".into(),
    )?;
    Ok("exit codes 0/1/2/3, JSON schema, ALL1 vs NONE gives ε with 1.0 vs 0.0".into())
}
