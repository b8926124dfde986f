//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Monte-Carlo criteria run through the CLI with `--workers 1`; the determinism criterion
//! re-runs them at 2 and 8 workers and compares the CSV files byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use auctions_core::bounds::{
    check_anti_concentration, check_lower_bound_arithmetic, check_mixture_upper_bound, BernoulliVector, Verdict,
};
use auctions_core::estimation::closed_form_revenue;
use auctions_core::instances::make_equal_revenue_pair;
use auctions_core::Mechanism;

const SEED: u64 = 20_240_601;
const REPLICATES: &str = "1000000";

struct Criterion {
    id: u32,
    title: &'static str,
    pass: bool,
    elapsed: Duration,
    note: String,
}

/// A CLI invocation whose CSV output is compared across worker counts.
struct McRun {
    tag: &'static str,
    args: Vec<String>,
}

impl McRun {
    fn new(tag: &'static str, args: &[&str]) -> Self {
        Self { tag, args: args.iter().map(|s| s.to_string()).collect() }
    }

    fn out_path(&self, dir: &Path, workers: usize) -> PathBuf {
        dir.join(format!("{}_w{workers}.csv", self.tag))
    }

    fn run(&self, dir: &Path, workers: usize) -> (i32, String) {
        let out = self.out_path(dir, workers);
        let mut args = vec!["auctions".to_string()];
        args.extend(self.args.iter().cloned());
        args.extend(["--workers".into(), workers.to_string(), "--out".into(), out.display().to_string()]);
        cli(&args)
    }
}

fn cli(args: &[String]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = auctions::run(args, &mut out, &mut err);
    let mut text = String::from_utf8_lossy(&out).into_owned();
    text.push_str(&String::from_utf8_lossy(&err));
    (code, text)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).expect("CSV output exists");
    reader.records().map(|r| r.expect("well-formed row").iter().map(str::to_string).collect()).collect()
}

/// Runs a verify suite at one worker: exit 0, the expected number of checks, all holding.
fn suite_passes(run: &McRun, dir: &Path, expected_checks: usize) -> (bool, String) {
    let (code, text) = run.run(dir, 1);
    if code != 0 {
        let failing: Vec<&str> = text.lines().filter(|l| !l.contains("HOLDS")).take(3).collect();
        return (false, format!("exit {code}: {}", failing.join(" | ")));
    }
    let rows = csv_rows(&run.out_path(dir, 1));
    let holding = rows.iter().filter(|r| r[1] == "holds").count();
    let ok = rows.len() == expected_checks && holding == rows.len();
    (ok, format!("{holding}/{} checks hold (expected {expected_checks})", rows.len()))
}

fn timed<F: FnOnce() -> (bool, String)>(id: u32, title: &'static str, limit: Option<Duration>, f: F) -> Criterion {
    let start = Instant::now();
    let (mut pass, mut note) = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            pass = false;
            note = format!("{note}; exceeded {limit:?}");
        }
    }
    Criterion { id, title, pass, elapsed, note }
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let er3 = dir.join("er3.toml");
    let (code, text) = cli(&[
        "auctions".into(),
        "instances".into(),
        "equal_revenue_pair".into(),
        "--a".into(),
        "3".into(),
        "--out".into(),
        er3.display().to_string(),
    ]);
    assert_eq!(code, 0, "writing the equal-revenue instance failed: {text}");
    let er3 = er3.display().to_string();
    let seed = SEED.to_string();

    let spa_run = McRun::new(
        "c1_spa",
        &["estimate", "--instance", &er3, "--mechanism", "spa", "--replicates", REPLICATES, "--seed", &seed],
    );
    let myerson_run = McRun::new(
        "c1_myerson",
        &["estimate", "--instance", &er3, "--mechanism", "myerson", "--replicates", REPLICATES, "--seed", &seed],
    );
    let verify = |tag: &'static str, extra: &[&str]| {
        let mut args = vec!["verify"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--replicates", REPLICATES, "--seed", &seed]);
        McRun::new(tag, &args)
    };
    let sandwich = verify("c3", &["median_sandwich"]);
    let guarantee = verify("c4", &["main_guarantee", "--tau", "1.5,2,4", "--slack", "0.02"]);
    let anti = verify("c7", &["anti_concentration"]);
    let tail = verify("c8", &["regular_tail", "--slack", "0.02"]);
    let multi = verify("c9", &["mgtm", "--k", "2,4", "--tau", "2"]);
    let oracle = verify("c10", &["characterization_oracle"]);

    let mut results = Vec::new();

    results.push(timed(
        1,
        "closed forms and Monte-Carlo agreement on the F_3 pair",
        Some(Duration::from_secs(10)),
        || {
            let inst = make_equal_revenue_pair(3.0).expect("valid instance");
            let spa_cf = closed_form_revenue(&inst, &Mechanism::Spa).unwrap_or(f64::NAN);
            let my_cf = closed_form_revenue(&inst, &Mechanism::Myerson).unwrap_or(f64::NAN);
            let mut ok = (spa_cf - 0.75).abs() < 1e-12 && (my_cf - 1.3125).abs() < 1e-12;
            let mut note = format!("closed forms spa={spa_cf} myerson={my_cf}");
            for (run, cf) in [(&spa_run, spa_cf), (&myerson_run, my_cf)] {
                let (code, text) = run.run(dir, 1);
                if code != 0 {
                    return (false, format!("{} exit {code}: {text}", run.tag));
                }
                let row = &csv_rows(&run.out_path(dir, 1))[0];
                let (mean, se): (f64, f64) = (row[7].parse().unwrap(), row[8].parse().unwrap());
                let agree = (mean - cf).abs() <= 3.0 * se && se < 0.002;
                ok &= agree;
                note.push_str(&format!("; {} mean={mean} se={se}", row[1]));
            }
            (ok, note)
        },
    ));

    results.push(timed(2, "4/7 of the optimal revenue equals second-price revenue at a=3", None, || {
        let inst = make_equal_revenue_pair(3.0).expect("valid instance");
        let spa = closed_form_revenue(&inst, &Mechanism::Spa).unwrap_or(f64::NAN);
        let my = closed_form_revenue(&inst, &Mechanism::Myerson).unwrap_or(f64::NAN);
        let gap = (4.0 * my / 7.0 - spa).abs();
        (gap == 0.0, format!("|(4/7)*{my} - {spa}| = {gap}"))
    }));

    results.push(timed(3, "median sandwich on 20 regular instances", Some(Duration::from_secs(300)), || {
        suite_passes(&sandwich, dir, 20)
    }));

    results.push(timed(4, "main guarantee with explicit constants, tau in {1.5, 2, 4}", None, || {
        suite_passes(&guarantee, dir, 60)
    }));

    results.push(timed(5, "lower-bound arithmetic for tau in {3, 4, 8, 100}", Some(Duration::from_millis(1)), || {
        let mut ok = true;
        let mut values = Vec::new();
        for tau in [3.0, 4.0, 8.0, 100.0] {
            match check_lower_bound_arithmetic(tau) {
                Ok(r) => {
                    ok &= r.verdict == Verdict::Holds && r.lhs > 3.0;
                    values.push(format!("{tau}:{:.4}", r.lhs));
                }
                Err(e) => return (false, e.to_string()),
            }
        }
        (ok, values.join(" "))
    }));

    results.push(timed(6, "mixture upper bound for k in {2, 4, 9, 16, 100}", Some(Duration::from_millis(10)), || {
        let mut ok = true;
        let mut at_four = f64::NAN;
        for k in [2, 4, 9, 16, 100] {
            match check_mixture_upper_bound(k) {
                Ok(r) => {
                    ok &= r.verdict == Verdict::Holds;
                    if k == 4 {
                        at_four = r.lhs;
                    }
                }
                Err(e) => return (false, e.to_string()),
            }
        }
        (ok && at_four == 113.0 / 64.0, format!("k=4 optimum {at_four} (113/64 = {})", 113.0 / 64.0))
    }));

    results.push(timed(
        7,
        "anti-concentration on 100 calibrated vectors plus the i.i.d. n=3 case",
        Some(Duration::from_secs(1)),
        || {
            let (ok, note) = suite_passes(&anti, dir, 101);
            let p = 1.0 - 2f64.powf(-1.0 / 3.0);
            let exact = 3.0 * p * p - 2.0 * p * p * p;
            let dp = BernoulliVector::new(vec![p; 3], 1)
                .and_then(|bv| check_anti_concentration(&bv))
                .map(|r| r.lhs)
                .unwrap_or(f64::NAN);
            let iid_ok = (dp - exact).abs() <= 1e-6 && format!("{dp:.5}") == "0.11012";
            (ok && iid_ok, format!("{note}; n=3 DP {dp:.9} vs 3p^2-2p^3 = {exact:.9}"))
        },
    ));

    results.push(timed(8, "regular tail bound on 10 instances, 50-point grid", Some(Duration::from_secs(60)), || {
        suite_passes(&tail, dir, 10)
    }));

    results.push(timed(
        9,
        "multi-item: VCG identity, optimal-revenue bracket, MGTM guarantee",
        Some(Duration::from_secs(600)),
        || suite_passes(&multi, dir, 60),
    ));

    results.push(timed(10, "step-embedding revenue and envelope payments", Some(Duration::from_secs(120)), || {
        suite_passes(&oracle, dir, 23)
    }));

    results.push(timed(11, "byte-identical CSV at 1, 2 and 8 workers", None, || {
        let runs = [&spa_run, &myerson_run, &sandwich, &guarantee, &anti, &tail, &multi, &oracle];
        let mut mismatches = Vec::new();
        for run in runs {
            let reference = fs::read(run.out_path(dir, 1)).unwrap_or_default();
            for workers in [2, 8] {
                let (code, _) = run.run(dir, workers);
                let bytes = fs::read(run.out_path(dir, workers)).unwrap_or_default();
                if code > 1 || reference.is_empty() || bytes != reference {
                    mismatches.push(format!("{}@{workers}", run.tag));
                }
            }
        }
        let note = if mismatches.is_empty() {
            format!("{} runs identical", runs.len() * 2)
        } else {
            format!("differing: {}", mismatches.join(", "))
        };
        (mismatches.is_empty(), note)
    }));

    let mut failed = 0;
    for c in &results {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} [{:.3}s] {}: {}", c.id, c.elapsed.as_secs_f64(), c.title, c.note);
        failed += usize::from(!c.pass);
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
