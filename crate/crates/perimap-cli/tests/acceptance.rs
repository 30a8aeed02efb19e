//! Acceptance suite. Each test covers one numbered criterion and prints a
//! single PASS/FAIL line (run with `--nocapture` to see them); a FAIL line is
//! followed by the specific findings before the test panics.
//!
//! Criterion 3 includes one pinned expectation that the oracle refutes: the
//! (p-1)^l family with c outside {0, +1, -1} does have exact-period-2 points
//! over the full field for some l = 2, n = 2 cells (three independent
//! computation routes agree, and the 2-cycle {2+i, 2-i} of z^36 + 2 on F_49
//! can be checked by hand). That sub-check is asserted as pinned and fails;
//! the findings list names the counterexample cells.

use perimap::dynamics::{count_roots_gcd, CensusEngine, Family, Limits, MapSpec, RootTarget};
use perimap::ffield::make_field;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

const GCD_LIMITS: Limits = Limits {
    max_q: 10_000_000,
    max_poly_degree: 1 << 16,
};

fn finish(criterion: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("{criterion}: PASS");
    } else {
        println!("{criterion}: FAIL");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("{criterion} failed with {} finding(s)", failures.len());
    }
}

fn family_maps(family: Family, p: u64, ell: u32, c: i64) -> MapSpec {
    match family {
        Family::PrimePower => MapSpec::prime_power(p, ell, c).unwrap(),
        Family::PMinusOnePower => MapSpec::p_minus_one_power(p, ell, c).unwrap(),
        Family::RawExponent => unreachable!(),
    }
}

/// The criterion-1 grid: every census convention identity, orbit totals, and
/// the gcd cross-check on the n <= 2 cells. Returns recorded failures and the
/// wall-clock time it took.
fn oracle_self_consistency() -> (Vec<String>, Duration) {
    let started = Instant::now();
    let mut failures = Vec::new();
    for p in [3u64, 5, 7, 11, 13] {
        for n in [1usize, 2, 3] {
            let ctx = make_field(p, n).unwrap();
            let engine = CensusEngine::new(&ctx, &GCD_LIMITS).unwrap();
            for family in [Family::PrimePower, Family::PMinusOnePower] {
                if family == Family::PMinusOnePower && p < 5 {
                    continue;
                }
                for ell in [1u32, 2] {
                    for c in 0..p as i64 {
                        let tag = format!("{} p={p} l={ell} n={n} c={c}", family.label());
                        let m = family_maps(family, p, ell, c);
                        let r = engine.census(&m).unwrap();
                        if r.exact2_full != r.div2_full - r.fixed_full {
                            failures.push(format!("{tag}: full-field convention identity broken"));
                        }
                        if r.exact2_sub != r.div2_sub - r.fixed_sub {
                            failures.push(format!("{tag}: subfield convention identity broken"));
                        }
                        let o = engine.orbit_census(&m).unwrap();
                        if o.periodic_point_count() + o.tail_point_count != ctx.q() {
                            failures.push(format!("{tag}: orbit census does not sum to q"));
                        }
                        if n <= 2 {
                            let div2 =
                                count_roots_gcd(&ctx, &m, RootTarget::Phi2MinusId, &GCD_LIMITS)
                                    .unwrap();
                            let fixed =
                                count_roots_gcd(&ctx, &m, RootTarget::PhiMinusId, &GCD_LIMITS)
                                    .unwrap();
                            if div2 != r.div2_full {
                                failures.push(format!(
                                    "{tag}: gcd div2 {div2} != census {}",
                                    r.div2_full
                                ));
                            }
                            if fixed != r.fixed_full {
                                failures.push(format!(
                                    "{tag}: gcd fixed {fixed} != census {}",
                                    r.fixed_full
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    (failures, started.elapsed())
}

#[test]
fn criterion_1_oracle_self_consistency() {
    let (mut failures, elapsed) = oracle_self_consistency();
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("suite took {elapsed:?}, budget is 60 s"));
    }
    finish("criterion 1 (oracle self-consistency)", failures);
}

#[test]
fn criterion_2_frobenius_law() {
    let mut failures = Vec::new();
    let limits = Limits::default();
    for p in [3u64, 5, 7, 11, 13] {
        for n in [1usize, 2, 3, 4] {
            let ctx = make_field(p, n).unwrap();
            let m = MapSpec::prime_power(p, 1, 0).unwrap();
            let r = perimap::dynamics::census(&ctx, &m, &limits).unwrap();
            if r.fixed_full != p {
                failures.push(format!("p={p} n={n}: fixed_full {} != p", r.fixed_full));
            }
            let want = if n % 2 == 0 { p * p } else { p };
            if r.div2_full != want {
                failures.push(format!("p={p} n={n}: div2_full {} != {want}", r.div2_full));
            }
        }
    }
    finish("criterion 2 (Frobenius law)", failures);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_perimap"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("perimap-acceptance-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[derive(Debug)]
struct ConfRow {
    p: u64,
    ell: u32,
    n: usize,
    c: i64,
    branch: String,
    convention: String,
    observed: u64,
    verdict: String,
}

fn read_conformance(dir: &Path) -> Vec<ConfRow> {
    let text = std::fs::read_to_string(dir.join("conformance.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            ConfRow {
                p: f[1].parse().unwrap(),
                ell: f[2].parse().unwrap(),
                n: f[3].parse().unwrap(),
                c: f[4].parse().unwrap(),
                branch: f[5].to_string(),
                convention: f[6].to_string(),
                observed: f[8].parse().unwrap(),
                verdict: f[9].to_string(),
            }
        })
        .collect()
}

/// Pins one (branch, convention) slice of the golden summary: every cell's
/// observed count and verdict, via a caller-supplied expectation.
fn pin_cells(
    failures: &mut Vec<String>,
    rows: &[ConfRow],
    branch: &str,
    convention: &str,
    expect: impl Fn(&ConfRow) -> (u64, &'static str),
) {
    let slice: Vec<&ConfRow> = rows
        .iter()
        .filter(|r| r.branch == branch && r.convention == convention)
        .collect();
    if slice.is_empty() {
        failures.push(format!("no cells for branch {branch} under {convention}"));
        return;
    }
    for row in slice {
        let (want_obs, want_verdict) = expect(row);
        if row.observed != want_obs || row.verdict != want_verdict {
            failures.push(format!(
                "{branch}/{convention} p={} l={} n={} c={}: observed {} verdict {} (pinned: {} {})",
                row.p, row.ell, row.n, row.c, row.observed, row.verdict, want_obs, want_verdict
            ));
        }
    }
}

#[test]
fn criterion_3_conformance_pins() {
    let dir = tmpdir("pins");
    let out = bin()
        .args(["verify", "--pmax", "13", "--ellmax", "2", "--nmax", "2"])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "verify run failed");
    let rows = read_conformance(&dir);
    let mut failures = Vec::new();

    // (p-1)^l, c = 0: two period-dividing-2 points in the prime subfield,
    // matching the claimed 2 in every cell
    pin_cells(&mut failures, &rows, "pm1l/zero", "div2_sub", |_| {
        (2, "match")
    });

    // (p-1)^l, c = +1: the single root z = 2, matching the claimed 1
    pin_cells(&mut failures, &rows, "pm1l/plus-one", "div2_sub", |_| {
        (1, "match")
    });

    // (p-1)^l, c = -1: the roots are z = 0 and z = -1, so the claimed 1 is
    // flagged as a mismatch in every cell
    pin_cells(&mut failures, &rows, "pm1l/minus-one", "div2_sub", |_| {
        (2, "mismatch")
    });

    // (p-1)^l, other c: pinned at zero exact-period-2 points over the full
    // field; the oracle refutes this for some l = 2, n = 2 cells
    pin_cells(&mut failures, &rows, "pm1l/other", "exact2_full", |_| {
        (0, "match")
    });

    // same branch under the dividing-2 subfield convention: the one root is
    // the fixed point z = 1 + c, recorded as a mismatch against 0
    pin_cells(&mut failures, &rows, "pm1l/other", "div2_sub", |_| {
        (1, "mismatch")
    });

    // p^l, c not divisible: no exact-period-2 points anywhere
    for branch in ["pl/plus-one", "pl/minus-one", "pl/other"] {
        pin_cells(&mut failures, &rows, branch, "exact2_full", |_| {
            (0, "match")
        });
    }

    // p^l, c = 0, l = 1: p dividing-2 points in the subfield, matching the
    // claimed p; over the full field the exact-2 count is p^2 - p when n is
    // even, recorded under its own convention row
    pin_cells(
        &mut failures,
        &rows,
        "pl/zero-special-ell",
        "div2_sub",
        |r| (r.p, "match"),
    );
    pin_cells(
        &mut failures,
        &rows,
        "pl/zero-special-ell",
        "exact2_full",
        |r| {
            if r.n % 2 == 0 {
                (r.p * r.p - r.p, "mismatch")
            } else {
                (0, "mismatch")
            }
        },
    );

    finish("criterion 3 (conformance pins)", failures);
}

#[test]
fn criterion_4_statistics() {
    let mut failures = Vec::new();

    let dir = tmpdir("stats");
    let out = bin()
        .args(["density", "--predicate", "n-equals-p"])
        .args(["--cutoff", "100", "--cutoff", "1000", "--cutoff", "10000"])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let points: Vec<(u64, u64)> = text
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect();
    assert_eq!(points.len(), 3);
    // exact rational comparisons: hits_a/total_a > hits_b/total_b
    let decreasing = |(ha, ta): (u64, u64), (hb, tb): (u64, u64)| {
        (ha as u128) * (tb as u128) > (hb as u128) * (ta as u128)
    };
    if !decreasing(points[0], points[1]) || !decreasing(points[1], points[2]) {
        failures.push(format!("density not strictly decreasing: {points:?}"));
    }
    let (h, t) = points[2];
    if h * 20 >= t {
        failures.push(format!("density at 10^4 is {h}/{t}, not below 0.05"));
    }

    let avg_values = |args: &[&str]| -> Vec<String> {
        let out = bin()
            .args(args)
            .args(["--out", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success(), "avg run failed: {args:?}");
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .map(|line| line.split(',').nth(8).unwrap().to_string())
            .collect()
    };

    let vals = avg_values(&[
        "avg",
        "--family",
        "pm1l",
        "--ell",
        "1",
        "--n",
        "1",
        "--class",
        "zero",
        "--convention",
        "div2_sub",
        "--cutoff",
        "10",
        "--cutoff",
        "30",
        "--cutoff",
        "100",
    ]);
    for (i, v) in vals.iter().enumerate() {
        if v != "2/1" {
            failures.push(format!(
                "divisible-class average at cutoff #{i} is {v}, expected 2/1"
            ));
        }
    }

    let vals = avg_values(&[
        "avg",
        "--family",
        "pl",
        "--ell",
        "1",
        "--n",
        "2",
        "--class",
        "other",
        "--convention",
        "exact2_full",
        "--cutoff",
        "10",
        "--cutoff",
        "30",
        "--cutoff",
        "100",
    ]);
    for (i, v) in vals.iter().enumerate() {
        if v != "0/1" {
            failures.push(format!(
                "other-class average at cutoff #{i} is {v}, expected 0/1"
            ));
        }
    }

    finish("criterion 4 (statistics)", failures);
}

#[test]
fn criterion_5_determinism() {
    let mut failures = Vec::new();
    let a = tmpdir("det-threads4");
    let b = tmpdir("det-threads1");
    for (dir, threads) in [(&a, "4"), (&b, "1")] {
        let out = bin()
            .args(["verify", "--pmax", "7", "--ellmax", "2", "--nmax", "2"])
            .args(["--threads", threads, "--out", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for name in ["conformance.csv", "summary.csv"] {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name)).unwrap();
        if left != right {
            failures.push(format!(
                "{name} differs between --threads 4 and --threads 1"
            ));
        }
    }
    // and a repeated run is identical to itself
    let c = tmpdir("det-again");
    let out = bin()
        .args(["verify", "--pmax", "7", "--ellmax", "2", "--nmax", "2"])
        .args(["--threads", "4", "--out", c.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    if std::fs::read(a.join("conformance.csv")).unwrap()
        != std::fs::read(c.join("conformance.csv")).unwrap()
    {
        failures.push("consecutive --threads 4 runs differ".to_string());
    }
    finish("criterion 5 (determinism)", failures);
}

#[test]
fn criterion_6_performance() {
    let mut failures = Vec::new();

    // a single census at q = 3^10 = 59049
    let ctx = make_field(3, 10).unwrap();
    let m = MapSpec::prime_power(3, 2, 1).unwrap();
    let started = Instant::now();
    let engine = CensusEngine::new(&ctx, &Limits::default()).unwrap();
    let r = engine.census(&m).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(r.q, 59049);
    if elapsed > Duration::from_secs(2) {
        failures.push(format!(
            "census at q = 3^10 took {elapsed:?}, budget is 2 s"
        ));
    }
    // sanity on the result so the timing can't pass on a broken census
    let mut check = BTreeMap::new();
    check.insert("identity", r.exact2_full == r.div2_full - r.fixed_full);
    check.insert("bounds", r.div2_full <= r.q && r.fixed_sub <= 3);
    for (what, ok) in check {
        if !ok {
            failures.push(format!("census at q = 3^10 violates {what}"));
        }
    }

    let (suite_failures, elapsed) = oracle_self_consistency();
    if !suite_failures.is_empty() {
        failures.push(format!(
            "criterion-1 suite reported {} failures",
            suite_failures.len()
        ));
    }
    if elapsed > Duration::from_secs(60) {
        failures.push(format!(
            "criterion-1 suite took {elapsed:?}, budget is 60 s"
        ));
    }

    finish("criterion 6 (performance)", failures);
}
