//! Command-line driver: every check emits one JSON line.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::changeofvars;
use crate::exactnum::{q, Q};
use crate::fermion::{self, omega, psi, FermionVector};
use crate::fseries;
use crate::qchar;
use crate::report::{CheckReport, Status};
use crate::twistor::{self, TwistedModule};
use crate::{Error, Result};

pub const REPORT_DIR_ENV: &str = "PERMTWIST_REPORT_DIR";

#[derive(Parser, Debug)]
#[command(name = "permtwist", version, about = "Exact checks for permutation-twisted free fermion modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coefficients a_j of the change of variables.
    Coeffs {
        #[arg(long, value_delimiter = ',', default_value = "3")]
        k: Vec<u32>,
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract and verify the odd coordinate change.
    Theta {
        #[arg(long, value_delimiter = ',', default_value = "3")]
        k: Vec<u32>,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 6)]
        x_order: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run identity checks.
    Check {
        #[arg(value_enum)]
        which: Vec<CheckName>,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Graded dimensions and the character identity.
    Char {
        #[arg(long, value_delimiter = ',', default_value = "3")]
        k: Vec<u32>,
        /// Weight cutoff, e.g. 4 or 7/2.
        #[arg(long, default_value = "4")]
        cutoff: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every check, including coefficient extraction.
    Report {
        #[command(flatten)]
        opts: CheckOpts,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CheckOpts {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub k: Vec<u32>,
    /// Weight cutoff for test vectors, e.g. 3/2.
    #[arg(long, default_value = "3/2")]
    pub cutoff: String,
    /// Mode window around the top modes.
    #[arg(long, default_value_t = 1)]
    pub span: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra randomly drawn test vectors one unit above the cutoff.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Coeffs,
    Inverse,
    Theta,
    Delta,
    Rep,
    Conjugation,
    Supercomm,
    Jacobi,
    Lminus1,
    Modes,
    Grading,
    Roundtrip,
    Char,
    EvenObstruction,
    All,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Coeffs => "coeffs",
            CheckName::Inverse => "inverse",
            CheckName::Theta => "theta",
            CheckName::Delta => "delta",
            CheckName::Rep => "rep",
            CheckName::Conjugation => "conjugation",
            CheckName::Supercomm => "supercomm",
            CheckName::Jacobi => "jacobi",
            CheckName::Lminus1 => "lminus1",
            CheckName::Modes => "modes",
            CheckName::Grading => "grading",
            CheckName::Roundtrip => "roundtrip",
            CheckName::Char => "char",
            CheckName::EvenObstruction => "even-obstruction",
            CheckName::All => "all",
        }
    }

    const CHECKS: [CheckName; 11] = [
        CheckName::Delta,
        CheckName::Rep,
        CheckName::Conjugation,
        CheckName::Supercomm,
        CheckName::Jacobi,
        CheckName::Lminus1,
        CheckName::Modes,
        CheckName::Grading,
        CheckName::Roundtrip,
        CheckName::Char,
        CheckName::EvenObstruction,
    ];

    fn needs_odd_k(self) -> bool {
        matches!(self, CheckName::Jacobi | CheckName::Modes | CheckName::Grading | CheckName::Roundtrip)
    }
}

/// One JSON line of output.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub check: &'static str,
    pub k: u32,
    pub anchors: Vec<String>,
    pub window: String,
    pub status: Status,
    pub detail: Value,
}

impl Record {
    fn from_report(check: CheckName, k: u32, r: CheckReport) -> Self {
        Self::from_parts(check, k, vec![r])
    }

    fn from_parts(check: CheckName, k: u32, parts: Vec<CheckReport>) -> Self {
        let status = if parts.iter().any(|p| p.status == Status::Fail) {
            Status::Fail
        } else if parts.iter().any(|p| p.status == Status::ExpectedObstruction) {
            Status::ExpectedObstruction
        } else {
            Status::Pass
        };
        let window = parts.first().map(|p| p.window.clone()).unwrap_or_default();
        let anchors = parts.iter().map(|p| p.identity.clone()).collect();
        let detail = Value::Array(
            parts
                .iter()
                .map(|p| {
                    json!({
                        "identity": p.identity,
                        "status": p.status,
                        "compared": p.compared,
                        "first_mismatch": p.first_mismatch,
                        "detail": p.detail,
                    })
                })
                .collect(),
        );
        Record { check: check.as_str(), k, anchors, window, status, detail }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Parses a weight such as `3`, `7/2` or `1.5` into twice its value.
pub fn parse_cutoff(s: &str) -> Result<i64> {
    let s = s.trim();
    let val: Q = if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| Error::Config(format!("bad cutoff {s:?}")))?;
        let b: i64 = b.trim().parse().map_err(|_| Error::Config(format!("bad cutoff {s:?}")))?;
        if b == 0 {
            return Err(Error::Config(format!("bad cutoff {s:?}")));
        }
        q(a, b)
    } else if let Some((a, b)) = s.split_once('.') {
        let whole: i64 = if a.is_empty() { 0 } else { a.parse().map_err(|_| Error::Config(format!("bad cutoff {s:?}")))? };
        match b {
            "0" | "" => q(whole, 1),
            "5" => q(2 * whole + 1, 2),
            _ => return Err(Error::Config(format!("cutoff {s:?} is not a multiple of 1/2"))),
        }
    } else {
        q(s.parse().map_err(|_| Error::Config(format!("bad cutoff {s:?}")))?, 1)
    };
    let twice = val * q(2, 1);
    if !twice.is_integer() || twice < q(0, 1) {
        return Err(Error::Config(format!("cutoff {s:?} must be a nonnegative multiple of 1/2")));
    }
    Ok(twice.to_integer())
}

fn validate_k(ks: &[u32]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::Config("no k given".into()));
    }
    match ks.iter().find(|&&k| k == 0 || k > 12) {
        Some(k) => Err(Error::Config(format!("k = {k} outside 1..=12"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub ks: Vec<u32>,
    pub cutoff_w2: i64,
    pub span: i64,
    pub seed: u64,
    pub samples: usize,
}

impl Plan {
    pub fn from_opts(o: &CheckOpts) -> Result<Self> {
        validate_k(&o.k)?;
        if o.span < 1 {
            return Err(Error::Config("span must be positive".into()));
        }
        Ok(Plan { ks: o.k.clone(), cutoff_w2: parse_cutoff(&o.cutoff)?, span: o.span, seed: o.seed, samples: o.samples })
    }

    fn targets(&self, k: u32) -> Vec<FermionVector> {
        let mut out: Vec<FermionVector> =
            fermion::basis(self.cutoff_w2).into_iter().map(|s| FermionVector::single(k, s)).collect();
        if self.samples > 0 {
            let mut pool: Vec<_> = fermion::basis(self.cutoff_w2 + 2)
                .into_iter()
                .filter(|s| fermion::weight2(s) > self.cutoff_w2)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ u64::from(k));
            pool.shuffle(&mut rng);
            out.extend(pool.into_iter().take(self.samples).map(|s| FermionVector::single(k, s)));
        }
        out
    }
}

fn err_report(identity: &str, e: &Error) -> CheckReport {
    let mut r = CheckReport::new(identity, "-");
    r.fail(e.to_string());
    r
}

fn or_fail(identity: &str, r: Result<CheckReport>) -> CheckReport {
    r.unwrap_or_else(|e| err_report(identity, &e))
}

fn obstruction_record(check: CheckName, k: u32, plan: &Plan) -> Record {
    let mut r = twistor::obstruction_report(k, &psi(k), &plan.targets(k));
    r.identity = format!("{} refused for even k", check.as_str());
    Record::from_report(check, k, r)
}

/// Runs one check at one k.
pub fn run_check(check: CheckName, k: u32, plan: &Plan) -> Record {
    if check.needs_odd_k() && k % 2 == 0 {
        return obstruction_record(check, k, plan);
    }
    let gens = [psi(k), omega(k)];
    let cutoff = plan.cutoff_w2;
    match check {
        CheckName::Coeffs => Record::from_report(check, k, coeffs_report(k, 6)),
        CheckName::Inverse => Record::from_report(check, k, changeofvars::inverse_check(k, 10)),
        CheckName::Theta => Record::from_report(check, k, or_fail("theta", changeofvars::theta_verify(k, 4, 6))),
        CheckName::Delta => {
            let mut parts = Vec::new();
            for r in [q(0, 1), q(1, 3), q(1, 2)] {
                parts.extend(fseries::delta_suite(k, r, 4, 8));
            }
            Record::from_parts(check, k, parts)
        }
        CheckName::Rep => Record::from_report(check, k, changeofvars::rep_identity_check(k, 6, 8)),
        CheckName::Conjugation => {
            let parts = gens
                .iter()
                .flat_map(|u| gens.iter().map(move |v| (u, v)))
                .map(|(u, v)| twistor::conjugation_check(k, u, v, plan.span + 1))
                .collect();
            Record::from_parts(check, k, parts)
        }
        CheckName::Supercomm => {
            let t = plan.targets(k);
            if k % 2 == 0 {
                // the fractional factor is what makes even k work here
                let with = twistor::supercommutator_check(k, &psi(k), &psi(k), &t, plan.span, true);
                let mut without = twistor::supercommutator_check(k, &psi(k), &psi(k), &t, plan.span, false);
                let caught = !without.passed();
                without.status = if caught { Status::Pass } else { Status::Fail };
                without.identity = format!("{} is expected to fail", without.identity);
                if !caught {
                    without.first_mismatch = Some("no mismatch found".into());
                }
                Record::from_parts(check, k, vec![with, without])
            } else {
                let parts = gens
                    .iter()
                    .flat_map(|u| gens.iter().map(move |v| (u, v)))
                    .map(|(u, v)| twistor::supercommutator_check(k, u, v, &t, plan.span, true))
                    .collect();
                Record::from_parts(check, k, parts)
            }
        }
        CheckName::Jacobi => {
            let tm = match TwistedModule::new(k) {
                Ok(tm) => tm,
                Err(e) => return Record::from_report(check, k, err_report("twisted Jacobi", &e)),
            };
            let t: Vec<FermionVector> = plan.targets(k).into_iter().filter(|w| w.weight2().unwrap_or(0) <= 3).collect();
            let slots: Vec<(usize, usize)> = if k == 1 { vec![(0, 0)] } else { vec![(0, 0), (0, 1)] };
            let mut parts = Vec::new();
            for (su, sv) in slots {
                for u in &gens {
                    for v in &gens {
                        parts.push(or_fail("twisted Jacobi", twistor::twisted_jacobi_check(&tm, u, su, v, sv, &t, 0, 1)));
                    }
                }
            }
            Record::from_parts(check, k, parts)
        }
        CheckName::Lminus1 => {
            let t = plan.targets(k);
            let mut parts: Vec<CheckReport> =
                gens.iter().map(|u| twistor::lminus1_check(k, u, &t, plan.span + 2)).collect();
            parts.push(twistor::omega_closed_form_check(k, &t, plan.span + 2));
            Record::from_parts(check, k, parts)
        }
        CheckName::Modes => {
            Record::from_report(check, k, twistor::mode_formula_check(k, &gens, &plan.targets(k), 3))
        }
        CheckName::Grading => match TwistedModule::new(k) {
            Ok(tm) => Record::from_parts(
                check,
                k,
                vec![twistor::grading_check(&tm, cutoff.max(2), 3), twistor::irreducibility_proxy(&tm, cutoff.max(2))],
            ),
            Err(e) => Record::from_report(check, k, err_report("grading", &e)),
        },
        CheckName::Roundtrip => match TwistedModule::new(k) {
            Ok(tm) => Record::from_report(check, k, or_fail("roundtrip", twistor::roundtrip_check(&tm, cutoff, plan.span + 1))),
            Err(e) => Record::from_report(check, k, err_report("roundtrip", &e)),
        },
        CheckName::Char => {
            let c = cutoff.max(8);
            if k % 2 == 0 {
                Record::from_report(check, k, or_fail("even-k character evidence", qchar::evidence_even(k, c)))
            } else {
                Record::from_parts(
                    check,
                    k,
                    vec![or_fail("character", qchar::corollary_check(k, c)), or_fail("perturbed control", qchar::perturbed_control(k, c))],
                )
            }
        }
        CheckName::EvenObstruction => {
            if k % 2 == 0 {
                Record::from_report(check, k, twistor::obstruction_report(k, &psi(k), &plan.targets(k)))
            } else {
                let mut r = CheckReport::new("no obstruction expected for odd k", "-");
                match TwistedModule::new(k) {
                    Ok(_) => r.compared = 1,
                    Err(e) => r.fail(e.to_string()),
                }
                Record::from_report(check, k, r)
            }
        }
        CheckName::All => unreachable!("expanded before dispatch"),
    }
}

/// Checks that a_1 = (1-k)/2 and a_2 = (k^2-1)/12.
pub fn coeffs_report(k: u32, order: usize) -> CheckReport {
    let a = changeofvars::compute_a(k, order.max(2));
    let kk = k as i64;
    let mut r = CheckReport::new(format!("coefficients a_j (k={k})"), format!("j <= {}", order.max(2)));
    let want = [(1, crate::exactnum::rat(1 - kk, 2)), (2, crate::exactnum::rat(kk * kk - 1, 12))];
    for (j, w) in want {
        r.compared += 1;
        let got = &a[j - 1];
        if *got != crate::exactnum::Scalar::from_rat(k, w.clone()) {
            r.fail(format!("a_{j} = {got}, want {}", crate::exactnum::render_rat(&w)));
        }
    }
    let coeffs: serde_json::Map<String, Value> =
        a.iter().enumerate().map(|(i, c)| (format!("a_{}", i + 1), Value::String(c.to_string()))).collect();
    r.with_detail(json!({ "a": coeffs }))
}

/// Expands `all`, runs every (check, k) pair in parallel and sorts the output.
pub fn run_plan(checks: &[CheckName], plan: &Plan) -> Vec<Record> {
    let mut names: Vec<CheckName> = Vec::new();
    for &c in checks {
        if c == CheckName::All {
            names.extend(CheckName::CHECKS);
        } else {
            names.push(c);
        }
    }
    names.sort();
    names.dedup();
    let jobs: Vec<(CheckName, u32)> = names.iter().flat_map(|&c| plan.ks.iter().map(move |&k| (c, k))).collect();
    let mut out: Vec<Record> = jobs.par_iter().map(|&(c, k)| run_check(c, k, plan)).collect();
    out.sort_by(|a, b| a.check.cmp(b.check).then(a.k.cmp(&b.k)));
    out
}

fn emit(lines: &[Value], out: Option<PathBuf>, default_name: &str) -> std::io::Result<()> {
    let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    print!("{text}");
    let target = out.or_else(|| std::env::var_os(REPORT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)));
    if let Some(path) = target {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::File::create(path)?.write_all(text.as_bytes())?;
    }
    Ok(())
}

fn status_code(records: &[Record]) -> i32 {
    if records.iter().all(Record::passed) {
        0
    } else {
        1
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Coeffs { k, order, out } => {
            validate_k(&k)?;
            let recs: Vec<Record> =
                k.par_iter().map(|&k| Record::from_report(CheckName::Coeffs, k, coeffs_report(k, order))).collect();
            finish(&recs, out, "coeffs.jsonl")
        }
        Command::Theta { k, order, x_order, out } => {
            validate_k(&k)?;
            let recs: Vec<Record> = k
                .par_iter()
                .map(|&k| {
                    let mut parts = vec![or_fail("theta", changeofvars::theta_verify(k, order, x_order))];
                    if let Ok(th) = changeofvars::theta_extract(k, order, x_order) {
                        parts[0].detail = json!({ "series": format!("{:?}", th), "convention": changeofvars::THETA0_CONVENTION });
                    }
                    Record::from_parts(CheckName::Theta, k, parts)
                })
                .collect();
            finish(&recs, out, "theta.jsonl")
        }
        Command::Check { which, opts } => {
            let plan = Plan::from_opts(&opts)?;
            let which = if which.is_empty() { vec![CheckName::All] } else { which };
            finish(&run_plan(&which, &plan), opts.out.clone(), "check.jsonl")
        }
        Command::Char { k, cutoff, out } => {
            validate_k(&k)?;
            let w2 = parse_cutoff(&cutoff)?;
            let recs: Vec<Record> = k.par_iter().map(|&k| char_record(k, w2)).collect();
            finish(&recs, out, "char.jsonl")
        }
        Command::Report { opts } => {
            let plan = Plan::from_opts(&opts)?;
            let mut names = vec![CheckName::Coeffs, CheckName::Inverse, CheckName::Theta];
            names.extend(CheckName::CHECKS);
            finish(&run_plan(&names, &plan), opts.out.clone(), "report.jsonl")
        }
    }
}

fn char_record(k: u32, w2: i64) -> Record {
    let mut rec = run_check(CheckName::Char, k, &Plan { ks: vec![k], cutoff_w2: w2, span: 0, seed: 0, samples: 0 });
    let base = qchar::graded_dim(w2).map(|s| s.to_json()).unwrap_or(Value::Null);
    let twisted = TwistedModule::new(k)
        .and_then(|tm| qchar::twisted_graded_dim(&tm, w2))
        .map(|s| s.to_json())
        .unwrap_or(Value::Null);
    rec.detail = json!({ "checks": rec.detail, "graded_dim": base, "twisted_graded_dim": twisted });
    rec
}

fn finish(records: &[Record], out: Option<PathBuf>, name: &str) -> Result<i32> {
    let lines: Vec<Value> = records.iter().map(|r| serde_json::to_value(r).expect("record serializes")).collect();
    emit(&lines, out, name).map_err(|e| Error::Config(e.to_string()))?;
    Ok(status_code(records))
}

/// Entry point for the binary. Exit code 2 means a configuration error.
pub fn run_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_parsing() {
        assert_eq!(parse_cutoff("3").unwrap(), 6);
        assert_eq!(parse_cutoff("7/2").unwrap(), 7);
        assert_eq!(parse_cutoff("1.5").unwrap(), 3);
        assert!(parse_cutoff("1/3").is_err());
        assert!(parse_cutoff("-1").is_err());
        assert!(parse_cutoff("x").is_err());
    }

    #[test]
    fn coeffs_k3() {
        let r = coeffs_report(3, 6);
        assert!(r.passed());
        assert_eq!(r.detail["a"]["a_1"], "-1");
        assert_eq!(r.detail["a"]["a_2"], "2/3");
    }

    #[test]
    fn even_k_maps_to_obstruction() {
        let plan = Plan { ks: vec![2], cutoff_w2: 2, span: 0, seed: 0, samples: 0 };
        let r = run_check(CheckName::Jacobi, 2, &plan);
        assert_eq!(r.status, Status::ExpectedObstruction);
        let r = run_check(CheckName::Supercomm, 2, &plan);
        assert_eq!(r.status, Status::Pass, "{:?}", r.detail);
    }

    #[test]
    fn sampled_targets_are_reproducible() {
        let plan = Plan { ks: vec![3], cutoff_w2: 2, span: 0, seed: 7, samples: 2 };
        assert_eq!(plan.targets(3), plan.targets(3));
        assert_eq!(plan.targets(3).len(), fermion::basis(2).len() + 2);
    }

    #[test]
    fn records_sorted() {
        let plan = Plan { ks: vec![3, 1], cutoff_w2: 1, span: 0, seed: 0, samples: 0 };
        let recs = run_plan(&[CheckName::Rep, CheckName::Coeffs], &plan);
        let keys: Vec<_> = recs.iter().map(|r| (r.check, r.k)).collect();
        assert_eq!(keys, vec![("coeffs", 1), ("coeffs", 3), ("rep", 1), ("rep", 3)]);
    }
}
