//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use irdf::bounds::{direct_rdf, slope, upper_bound};
use irdf::cli::interior_grid;
use irdf::dual::{
    appendix_diagnostics, constraint_residual, dual_lower_bound, f_values, irdf, irdf_point,
    w_values,
};
use irdf::error::Error;
use irdf::oracle::{ba_rate_at_distortion, build_reduced_problem, DISTORTION_TOL};
use irdf::{canonicalize, LogBase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHAS: [f64; 4] = [0.1, 0.25, 0.4, 0.5];
const PS: [f64; 4] = [0.01, 0.05, 0.1, 0.2];
const SYMMETRIC_PS: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.3];

/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

/// Outcome of one criterion: failures collected as messages.
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }

    fn note(&mut self, msg: String) {
        self.notes.push(msg);
    }
}

/// Independent closed form for the symmetric source, bits.
fn h2(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        0.0
    } else {
        -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
    }
}

/// Pairs of the oracle grid with a non-empty interior (p, α).
fn informative_pairs() -> impl Iterator<Item = (f64, f64)> {
    ALPHAS
        .iter()
        .flat_map(|&a| PS.iter().map(move |&p| (a, p)))
        .filter(|&(a, p)| p < a)
}

fn criterion_1() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for &p in &SYMMETRIC_PS {
        let m = canonicalize(0.5, p).unwrap();
        for d in interior_grid(p, 0.5, 50) {
            let want = 1.0 - h2((d - p) / (1.0 - 2.0 * p));
            match irdf(&m, d, LogBase::Bits) {
                Ok(got) => {
                    worst = worst.max((got - want).abs());
                    c.require((got - want).abs() < 1e-9, || {
                        format!("p={p} D={d}: {got} vs {want}")
                    });
                }
                Err(e) => c.require(false, || format!("p={p} D={d}: {e}")),
            }
        }
    }
    c.note(format!("max |err| = {worst:.2e} bits"));
    c
}

fn criterion_2() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for &p in &SYMMETRIC_PS {
        let m = canonicalize(0.5, p).unwrap();
        let pb = 1.0 - p;
        for d in interior_grid(p, 0.5, 50) {
            let want = ((pb - d) / (d - p)).ln() / (pb - p);
            match irdf_point(&m, d, LogBase::Nats).map(|pt| pt.r_star) {
                Ok(Some(got)) => {
                    worst = worst.max((got - want).abs());
                    c.require((got - want).abs() < 1e-9, || {
                        format!("p={p} D={d}: r*={got} vs {want}")
                    });
                }
                other => c.require(false, || format!("p={p} D={d}: no r* ({other:?})")),
            }
        }
    }
    c.note(format!("max |r* err| = {worst:.2e}"));
    c
}

fn criterion_3() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for (a, p) in informative_pairs() {
        let m = canonicalize(a, p).unwrap();
        let problem = build_reduced_problem(&m).unwrap();
        for d in interior_grid(p, a, 20) {
            points += 1;
            let dual = irdf(&m, d, LogBase::Bits).unwrap();
            match ba_rate_at_distortion(&problem, d, DISTORTION_TOL) {
                Ok(ba) if ba.converged => {
                    let diff = (ba.rate_in(LogBase::Bits) - dual).abs();
                    worst = worst.max(diff);
                    c.require(diff < 1e-6, || {
                        format!("({a},{p},{d}): |BA − dual| = {diff:e}")
                    });
                }
                Ok(_) => c.require(false, || format!("({a},{p},{d}): BA did not converge")),
                Err(e) => c.require(false, || format!("({a},{p},{d}): {e}")),
            }
        }
    }
    c.note(format!(
        "{points} points, max |BA − dual| = {worst:.2e} bits"
    ));
    c
}

fn criterion_4() -> Check {
    let mut c = Check::new();
    let d_grid: Vec<f64> = (0..=100).map(|i| 0.005 * i as f64).collect();
    for &a in &ALPHAS {
        let mut previous: Option<(f64, Vec<Option<f64>>)> = None;
        for &p in &PS {
            let m = canonicalize(a, p).unwrap();
            let mut row = Vec::new();
            for &d in &d_grid {
                let r = irdf(&m, d, LogBase::Bits);
                if d >= a {
                    c.require(matches!(r, Ok(v) if v == 0.0), || {
                        format!("(i) ({a},{p},{d}): {r:?}")
                    });
                }
                if d < p.min(a) {
                    c.require(matches!(r, Err(Error::InfeasibleDistortion { .. })), || {
                        format!("(ii) ({a},{p},{d}): {r:?}")
                    });
                }
                if let Ok(v) = r {
                    let direct = direct_rdf(a, d, LogBase::Bits).unwrap();
                    c.require(v >= direct - 1e-10, || {
                        format!("(iv) ({a},{p},{d}): {v} < {direct}")
                    });
                }
                row.push(r.ok());
            }
            if let Some((p_prev, prev)) = &previous {
                for ((&d, lo), hi) in d_grid.iter().zip(prev).zip(&row) {
                    if let (Some(lo), Some(hi)) = (lo, hi) {
                        c.require(*hi >= lo - 1e-10, || {
                            format!("(iii) α={a} D={d}: R(p={p})={hi} < R(p={p_prev})={lo}")
                        });
                    }
                }
            }
            previous = Some((p, row));
        }
        // Noiseless observation collapses to the direct problem.
        let m0 = canonicalize(a, 0.0).unwrap();
        for &d in &d_grid {
            let r = irdf(&m0, d, LogBase::Bits).unwrap();
            let direct = direct_rdf(a, d, LogBase::Bits).unwrap();
            c.require((r - direct).abs() < 1e-10, || {
                format!("(iv) p=0 α={a} D={d}: {r} vs {direct}")
            });
        }
    }
    c
}

fn criterion_5() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_slack = f64::INFINITY;
    for (a, p) in informative_pairs() {
        let m = canonicalize(a, p).unwrap();
        let mut max_gap: f64 = 0.0;
        for d in interior_grid(p, a, 20) {
            let rate = irdf(&m, d, LogBase::Bits).unwrap();
            let ub = upper_bound(&m, d, LogBase::Bits).unwrap();
            max_gap = max_gap.max(ub - rate);
            min_slack = min_slack.min(ub - rate);
            c.require(ub - rate >= -1e-10, || {
                format!("({a},{p},{d}): rate {rate} > U {ub}")
            });
            for _ in 0..20 {
                let r = (rng.gen_range(-3.0..4.0f64) * std::f64::consts::LN_10).exp();
                let lb = dual_lower_bound(r, &m, d, LogBase::Bits).unwrap();
                min_slack = min_slack.min(rate - lb);
                c.require(rate - lb >= -1e-10, || {
                    format!("({a},{p},{d}) r={r}: lb {lb} > rate {rate}")
                });
            }
        }
        if a == 0.5 {
            c.require(max_gap < 1e-10, || {
                format!("α=0.5 p={p}: max U − R = {max_gap:e}")
            });
        }
    }
    let m = canonicalize(0.25, 0.05).unwrap();
    let gap = upper_bound(&m, 0.1, LogBase::Bits).unwrap() - irdf(&m, 0.1, LogBase::Bits).unwrap();
    c.require(gap > 1e-3, || format!("(0.25,0.05,0.1): U − R = {gap:e}"));
    c.note(format!(
        "min slack {min_slack:.2e}, gap at (0.25,0.05,0.1) = {gap:.4e} bits"
    ));
    c
}

fn criterion_6() -> Check {
    let mut c = Check::new();
    let mut ba_violations = 0;
    let mut checked = 0;
    for (a, p) in informative_pairs().filter(|&(a, _)| a < 0.5) {
        let m = canonicalize(a, p).unwrap();
        for d in interior_grid(p, a, 20) {
            let r_star = irdf_point(&m, d, LogBase::Nats).unwrap().r_star.unwrap();
            let f = f_values(r_star, &m).unwrap();
            c.require(f.0 > 0.0 && f.1 > 0.0, || {
                format!("({a},{p},{d}): f = {f:?}")
            });
            let res = constraint_residual(r_star, &m, f).unwrap();
            c.require(res < 1e-10, || {
                format!("({a},{p},{d}): constraint residual {res:e}")
            });
            let w = w_values(r_star, &m).unwrap();
            c.require(w.0 > 0.0 && w.1 > 0.0, || {
                format!("({a},{p},{d}): w = {w:?}")
            });
            for &r in &[0.5, 1.0, 2.0, 5.0, 10.0] {
                checked += 1;
                let diag = appendix_diagnostics(r, &m, d).unwrap();
                let (da, db) = (diag.a.unwrap(), diag.b.unwrap());
                c.require(da < 0.0, || format!("({a},{p},{d}) r={r}: a = {da:e} ≥ 0"));
                c.require(diag.delta > 0.0, || {
                    format!("({a},{p},{d}) r={r}: δ = {:e} ≤ 0", diag.delta)
                });
                if db >= da || db.is_nan() {
                    ba_violations += 1;
                }
            }
        }
    }
    c.require(ba_violations == 0, || {
        format!("b(r) < a(r) violated at {ba_violations}/{checked} (point, r) pairs")
    });
    c
}

fn criterion_7() -> Check {
    let mut c = Check::new();
    let eps = 1e-5;
    let mut worst_fd: f64 = 0.0;
    for (a, p) in informative_pairs() {
        let m = canonicalize(a, p).unwrap();
        for d in interior_grid(p, a, 20) {
            if d - eps <= p || d + eps >= a {
                continue;
            }
            let fd = -(irdf(&m, d + eps, LogBase::Nats).unwrap()
                - irdf(&m, d - eps, LogBase::Nats).unwrap())
                / (2.0 * eps);
            let r_star = irdf_point(&m, d, LogBase::Nats).unwrap().r_star.unwrap();
            worst_fd = worst_fd.max((fd - r_star).abs());
            c.require((fd - r_star).abs() < 1e-3, || {
                format!("({a},{p},{d}): FD {fd} vs r* {r_star}")
            });
            if a == 0.5 {
                let s = slope(p, d).unwrap();
                c.require((s - r_star).abs() < 1e-9, || {
                    format!("(0.5,{p},{d}): slope {s} vs r* {r_star}")
                });
            }
        }
    }
    c.note(format!("max |FD − r*| = {worst_fd:.2e}"));
    c
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_irdf"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

/// Header and rows; empty cells become `None`.
fn parse(text: &str) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|c| c.parse().ok()).collect())
        .collect();
    (header, rows)
}

fn criterion_8() -> Check {
    let mut c = Check::new();
    match run_cli(&["sweep", "--fig3"]) {
        Ok(text) => {
            let (h, rows) = parse(&text);
            let col = |n: &str| h.iter().position(|x| x == n).unwrap();
            let (ir, dr, ub, cub) = (
                col("irdf"),
                col("direct_rdf"),
                col("upper_bound"),
                col("convexified_upper_bound"),
            );
            c.require(rows.len() == 51, || format!("fig3: {} rows", rows.len()));
            for row in &rows {
                let d = row[2].unwrap();
                match (row[dr], row[ir], row[cub], row[ub]) {
                    (Some(x), Some(y), Some(z), Some(u)) => {
                        c.require(x <= y + 1e-10 && y <= z + 1e-10 && z <= u.max(z), || {
                            format!("fig3 D={d}: direct {x}, irdf {y}, cub {z}, ub {u}")
                        });
                    }
                    other => c.require(false, || format!("fig3 D={d}: missing value {other:?}")),
                }
            }
        }
        Err(e) => c.require(false, || e),
    }
    match run_cli(&["sweep", "--fig4"]) {
        Ok(text) => {
            let (h, rows) = parse(&text);
            let ir = h.iter().position(|x| x == "irdf").unwrap();
            let mut by_d: std::collections::BTreeMap<u64, Vec<(f64, Option<f64>)>> =
                Default::default();
            for row in &rows {
                by_d.entry(row[2].unwrap().to_bits())
                    .or_default()
                    .push((row[1].unwrap(), row[ir]));
            }
            c.require(rows.len() == 5 * 101, || {
                format!("fig4: {} rows", rows.len())
            });
            for (d, curve) in by_d {
                let d = f64::from_bits(d);
                for w in curve.windows(2) {
                    if let ((p0, Some(r0)), (p1, Some(r1))) = (w[0], w[1]) {
                        c.require(p0 < p1 && r1 >= r0 - 1e-10, || {
                            format!("fig4 D={d}: R(p={p1})={r1} < R(p={p0})={r0}")
                        });
                    }
                }
            }
        }
        Err(e) => c.require(false, || e),
    }
    c
}

fn criterion_9() -> Check {
    let mut c = Check::new();
    let args = [
        "simulate",
        "--alpha",
        "0.25",
        "--p",
        "0.05",
        "--estimator",
        "identity",
        "--n",
        "1000000",
        "--seed",
        "42",
    ];
    match run_cli(&args) {
        Ok(text) => {
            let (h, rows) = parse(&text);
            let col = |n: &str| rows[0][h.iter().position(|x| x == n).unwrap()].unwrap();
            let (ed, edh, lo, hi) = (
                col("empirical_d"),
                col("empirical_dhat"),
                col("band_low"),
                col("band_high"),
            );
            c.require((col("analytic") - 0.05).abs() < 1e-15, || {
                format!("analytic {}", col("analytic"))
            });
            for (name, v) in [("empirical_d", ed), ("empirical_dhat", edh)] {
                c.require(lo <= v && v <= hi, || {
                    format!("{name} = {v} outside [{lo}, {hi}]")
                });
            }
            c.note(format!(
                "empirical_d {ed:.6}, empirical_dhat {edh:.6}, band [{lo:.6}, {hi:.6}]"
            ));
        }
        Err(e) => c.require(false, || e),
    }
    c
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("symmetric closed form", criterion_1, 1),
        ("closed-form r*", criterion_2, 1),
        ("Blahut–Arimoto oracle equivalence", criterion_3, 30),
        ("regime and monotonicity suite", criterion_4, 5),
        ("sandwich inequality", criterion_5, 10),
        ("optimality certificates", criterion_6, 5),
        ("duality slope", criterion_7, 5),
        ("figure data ordering", criterion_8, 5),
        ("Monte-Carlo reduction", criterion_9, 5),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut check = run();
        let elapsed = start.elapsed();
        check.require(elapsed < Duration::from_secs(*limit), || {
            format!("runtime {:.2}s exceeds {limit}s", elapsed.as_secs_f64())
        });
        let status = if check.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {}: {status} {name} ({:.3}s){}",
            i + 1,
            elapsed.as_secs_f64(),
            if check.notes.is_empty() {
                String::new()
            } else {
                format!(" [{}]", check.notes.join("; "))
            }
        );
        for f in check.failures.iter().take(5) {
            println!("    {f}");
        }
        if check.failures.len() > 5 {
            println!("    ... {} more", check.failures.len() - 5);
        }
        if !check.failures.is_empty() {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
