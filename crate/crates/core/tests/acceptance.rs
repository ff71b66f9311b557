use std::time::{Duration, Instant};

use permtwist::changeofvars::{compute_a, inverse_check, rep_identity_check, theta_verify, THETA0_CONVENTION};
use permtwist::exactnum::{q, rat, Scalar};
use permtwist::fermion::{self, omega, psi, FermionVector};
use permtwist::fseries::delta_suite;
use permtwist::qchar::{corollary_check, perturbed_control};
use permtwist::report::{CheckReport, Status};
use permtwist::twistor::{
    conjugation_check, grading_check, mode_formula_check, obstruction_report, roundtrip_check, supercommutator_check,
    twisted_jacobi_check, untwist_exponent_witness, TwistedModule,
};

struct Outcome {
    ok: bool,
    note: String,
}

impl Outcome {
    fn from_reports(parts: &[CheckReport]) -> Self {
        let compared: usize = parts.iter().map(|p| p.compared).sum();
        match parts.iter().find(|p| p.status == Status::Fail) {
            Some(p) => Outcome { ok: false, note: format!("{}: {}", p.identity, p.first_mismatch.clone().unwrap_or_default()) },
            None => Outcome { ok: true, note: format!("{} reports, {compared} coefficients compared", parts.len()) },
        }
    }

    fn fail(note: impl Into<String>) -> Self {
        Outcome { ok: false, note: note.into() }
    }
}

fn states(k: u32, w2: i64) -> Vec<FermionVector> {
    fermion::basis(w2).into_iter().map(|s| FermionVector::single(k, s)).collect()
}

fn gens(k: u32) -> [FermionVector; 2] {
    [psi(k), omega(k)]
}

fn coefficient_formulas() -> Outcome {
    for k in 1..=8u32 {
        let a = compute_a(k, 2);
        let kk = k as i64;
        if a[0] != Scalar::from_rat(k, rat(1 - kk, 2)) || a[1] != Scalar::from_rat(k, rat(kk * kk - 1, 12)) {
            return Outcome::fail(format!("k={k}: a_1={}, a_2={}", a[0], a[1]));
        }
    }
    Outcome { ok: true, note: "k = 1..8".into() }
}

fn closed_form_inverse() -> Outcome {
    let parts: Vec<_> = [1u32, 2, 3, 5].iter().map(|&k| inverse_check(k, 10)).collect();
    Outcome::from_reports(&parts)
}

fn theta_closed_forms() -> Outcome {
    let mut parts = Vec::new();
    for k in [1u32, 2, 3, 5] {
        match theta_verify(k, 4, 6) {
            Ok(r) => parts.push(r),
            Err(e) => return Outcome::fail(format!("k={k}: {e}")),
        }
    }
    let mut o = Outcome::from_reports(&parts);
    o.note = format!("{}; {}", o.note, THETA0_CONVENTION);
    o
}

fn representation_identities() -> Outcome {
    let parts: Vec<_> = (1..=5u32).map(|k| rep_identity_check(k, 6, 8)).collect();
    Outcome::from_reports(&parts)
}

fn delta_calculus() -> Outcome {
    let mut parts = Vec::new();
    for k in [1u32, 2, 3] {
        for r in [q(0, 1), q(1, 3), q(1, 2)] {
            parts.extend(delta_suite(k, r, 4, 8));
        }
    }
    Outcome::from_reports(&parts)
}

fn conjugation() -> Outcome {
    let mut parts = Vec::new();
    for k in [1u32, 3] {
        let mut vs: Vec<FermionVector> = gens(k).to_vec();
        vs.extend(states(k, 5));
        for u in gens(k) {
            for v in &vs {
                parts.push(conjugation_check(k, &u, v, 2));
            }
        }
    }
    Outcome::from_reports(&parts)
}

fn supercommutator() -> Outcome {
    let mut parts = Vec::new();
    let t3 = states(3, 3);
    for u in gens(3) {
        for v in gens(3) {
            parts.push(supercommutator_check(3, &u, &v, &t3, 1, true));
        }
    }
    let t2 = states(2, 3);
    parts.push(supercommutator_check(2, &psi(2), &psi(2), &t2, 1, true));
    let without = supercommutator_check(2, &psi(2), &psi(2), &t2, 1, false);
    let mut o = Outcome::from_reports(&parts);
    match (&without.status, &without.first_mismatch) {
        (Status::Fail, Some(w)) => o.note = format!("{}; k=2 without the factor fails at {w}", o.note),
        _ => return Outcome::fail("k=2 without the fractional factor did not fail"),
    }
    o
}

fn twisted_jacobi() -> Outcome {
    let tm = TwistedModule::new(3).expect("k = 3 is odd");
    let t = states(3, 3);
    let mut parts = Vec::new();
    for (su, sv) in [(0usize, 0usize), (0, 1)] {
        for u in gens(3) {
            for v in gens(3) {
                match twisted_jacobi_check(&tm, &u, su, &v, sv, &t, 1, 1) {
                    Ok(r) => parts.push(r),
                    Err(e) => return Outcome::fail(e.to_string()),
                }
            }
        }
    }
    Outcome::from_reports(&parts)
}

fn mode_formula() -> Outcome {
    Outcome::from_reports(&[mode_formula_check(3, &gens(3), &states(3, 4), 3)])
}

fn grading() -> Outcome {
    let tm = TwistedModule::new(3).expect("k = 3 is odd");
    if tm.expected_lg0(0) != rat(1, 18) {
        return Outcome::fail(format!("vacuum L^g(0) = {}", tm.expected_lg0(0)));
    }
    Outcome::from_reports(&[grading_check(&tm, 6, 3)])
}

fn roundtrip() -> Outcome {
    let mut parts = Vec::new();
    for k in [1u32, 3] {
        let tm = TwistedModule::new(k).expect("odd k");
        match roundtrip_check(&tm, 6, 2) {
            Ok(r) => parts.push(r),
            Err(e) => return Outcome::fail(e.to_string()),
        }
    }
    Outcome::from_reports(&parts)
}

fn character() -> Outcome {
    let mut parts = Vec::new();
    for k in [1u32, 3, 5] {
        match corollary_check(k, 12) {
            Ok(r) => parts.push(r),
            Err(e) => return Outcome::fail(e.to_string()),
        }
    }
    match perturbed_control(3, 12) {
        Ok(r) => parts.push(r),
        Err(e) => return Outcome::fail(e.to_string()),
    }
    Outcome::from_reports(&parts)
}

fn even_refusal() -> Outcome {
    for k in [2u32, 4] {
        if TwistedModule::new(k).is_ok() {
            return Outcome::fail(format!("k={k} was not refused"));
        }
        let r = obstruction_report(k, &psi(k), &states(k, 3));
        let want = format!("{} + (1/{k})Z", q(1, 2 * k as i64));
        if r.status != Status::ExpectedObstruction || r.detail["coset"] != want.as_str() {
            return Outcome::fail(format!("k={k}: {:?} coset {}", r.status, r.detail["coset"]));
        }
        if untwist_exponent_witness(k, &psi(k)).is_none() {
            return Outcome::fail(format!("k={k}: no untwist witness"));
        }
    }
    Outcome { ok: true, note: "k = 2, 4 refused with cosets 1/4 + (1/2)Z and 1/8 + (1/4)Z".into() }
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 13] = [
        ("coefficient formulas", coefficient_formulas, Some(Duration::from_secs(1))),
        ("closed-form inverse", closed_form_inverse, None),
        ("theta closed forms", theta_closed_forms, None),
        ("representation identities", representation_identities, None),
        ("delta calculus", delta_calculus, None),
        ("conjugation", conjugation, Some(Duration::from_secs(120))),
        ("twisted supercommutator", supercommutator, None),
        ("twisted Jacobi", twisted_jacobi, Some(Duration::from_secs(300))),
        ("mode formula", mode_formula, None),
        ("grading and L^g(0)", grading, None),
        ("roundtrip", roundtrip, None),
        ("character", character, None),
        ("even-k refusal", even_refusal, None),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut o = run();
        let dt = t.elapsed();
        if let Some(b) = budget {
            if dt > *b {
                o.ok = false;
                o.note = format!("{} (over the {:?} budget)", o.note, b);
            }
        }
        if !o.ok {
            failed += 1;
        }
        println!("{} {:>2} {name} [{:.2?}] {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, dt, o.note);
    }
    println!("acceptance: {} of 13 passed in {:.2?}", 13 - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
