//! Acceptance criteria, one pass/fail line each. Exits nonzero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use glvp::format::SystemFile;
use glvp::report;
use glvp::suite::{self, Outcome};
use glvp_core::darboux::{darboux, DarbouxMethod};
use glvp_core::dynamics::{conservation_report, integrate_darboux, integrate_glv, Quantity};
use glvp_core::poisson::{hamiltonian, verify_factorization};
use glvp_core::rational::int;
use glvp_core::ratmat::canonical_skew;
use glvp_core::{GlvSystem, GlvpFactorization, RatMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn pass(detail: impl Into<String>) -> Self {
        Verdict {
            pass: true,
            detail: detail.into(),
        }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Verdict {
            pass: false,
            detail: detail.into(),
        }
    }
}

/// Runs `check`, enforces the time budget and prints the verdict line.
fn criterion(id: &str, title: &str, budget: Option<Duration>, check: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let mut v = check();
    let elapsed = start.elapsed();
    if let Some(limit) = budget {
        if elapsed > limit {
            v.pass = false;
            v.detail.push_str(&format!("; over the {:.0?} budget", limit));
        }
    }
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {title}: {} ({:.2?})", v.detail, elapsed);
    v.pass
}

fn seed() -> u64 {
    std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

/// The instance at a = b = 1, c = −1, ρ = 1, μ = 2, ν = 1, built directly.
fn nutku() -> GlvSystem {
    GlvSystem::new(
        "nutku",
        RatMatrix::identity(3),
        RatMatrix::from_ints(&[&[0, -1, 1], &[1, 0, 1], &[1, 1, 0]]),
        RatMatrix::column(vec![int(1), int(2), int(1)]),
    )
    .unwrap()
}

fn published_factorization() -> GlvpFactorization {
    GlvpFactorization::new(
        RatMatrix::from_ints(&[&[0, -1, -1], &[1, 0, -1], &[1, 1, 0]]),
        vec![int(1), int(1), int(-1)],
        RatMatrix::column(vec![int(0), int(1), int(-2)]),
    )
}

fn bundled_nutku() -> SystemFile {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/nutku.json");
    SystemFile::load(&path).unwrap()
}

fn from_outcomes(outcomes: &[Outcome]) -> Verdict {
    let summary: Vec<String> = outcomes.iter().map(|o| o.to_string()).collect();
    if outcomes.iter().all(Outcome::passed) {
        Verdict::pass(summary.join("; "))
    } else {
        Verdict::fail(summary.join("; "))
    }
}

fn ac1() -> Verdict {
    let sys = nutku();
    let f = published_factorization();
    match verify_factorization(&sys, &f) {
        Ok(true) => {}
        other => return Verdict::fail(format!("published certificate rejected: {other:?}")),
    }
    let (file_sys, supplied) = bundled_nutku().to_system().unwrap();
    if file_sys != sys || supplied.as_ref() != Some(&f) {
        return Verdict::fail("bundled nutku.json differs from the instance");
    }
    let expected = vec![vec![int(1), int(-1), int(1)]];
    let mut notes = Vec::new();
    for (label, certificate) in [("supplied", Some(f)), ("solved", None)] {
        let analysis = report::analyze(&sys, certificate, seed()).unwrap();
        if !analysis.glvp {
            return Verdict::fail(format!("{label}: analysis says not GLVP"));
        }
        let casimirs: Vec<Vec<_>> = analysis
            .casimirs
            .iter()
            .map(|c| c.iter().map(|q| q.0.clone()).collect())
            .collect();
        if casimirs != expected {
            return Verdict::fail(format!("{label}: Casimir exponents {casimirs:?}"));
        }
        let ranks = (analysis.ranks.m, analysis.ranks.a, analysis.ranks.k);
        if ranks != (2, 2, Some(2)) {
            return Verdict::fail(format!("{label}: ranks {ranks:?}"));
        }
        notes.push(format!("{label} certificate ok"));
    }
    Verdict::pass(format!("{}, Casimir (1,-1,1), ranks 2/2/2", notes.join(", ")))
}

fn ac2() -> Verdict {
    let sys = nutku();
    let f = published_factorization();
    let h = hamiltonian(&sys, &f).unwrap();
    let target = canonical_skew(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let points: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..3).map(|_| rng.gen_range(0.1..5.0)).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for method in [DarbouxMethod::General, DarbouxMethod::Decoupling, DarbouxMethod::Linear] {
        let d = match darboux(&sys, &f, method) {
            Ok(d) => d,
            Err(e) => return Verdict::fail(format!("{method:?}: {e}")),
        };
        if d.lifted_structure() != target {
            return Verdict::fail(format!("{method:?}: J = {:?}", d.lifted_structure()));
        }
        let map = d.coordinate_map().unwrap();
        for x in &points {
            let y = map.to_darboux(x).unwrap();
            // The decoupled chart covers the leaf through the projection of x.
            let on_chart = map.from_darboux(&y).unwrap();
            let (hx, hy) = (h.eval(&on_chart), d.hamiltonian.eval(&y));
            worst = worst.max((hx - hy).abs() / hx.abs().max(f64::MIN_POSITIVE));
        }
    }
    if worst < 1e-12 {
        Verdict::pass(format!("J = S(2,1) on all routes, worst H mismatch {worst:.1e}"))
    } else {
        Verdict::fail(format!("worst H mismatch {worst:.1e}"))
    }
}

fn ac6() -> Verdict {
    let sys = nutku();
    let f = published_factorization();
    let x0 = [1.0, 0.5, 2.0];
    let (t_end, rel_tol) = (20.0, 1e-9);
    let mut problems = Vec::new();
    let mut notes = Vec::new();

    match integrate_glv(&sys, &x0, t_end, rel_tol) {
        Ok(traj) => {
            let mut quantities = vec![Quantity::Hamiltonian {
                label: "H".into(),
                expr: hamiltonian(&sys, &f).unwrap(),
            }];
            for (i, c) in f.casimirs().into_iter().enumerate() {
                quantities.push(Quantity::Casimir {
                    label: format!("C{}", i + 1),
                    casimir: c,
                });
            }
            let drift = conservation_report(&traj, &quantities).unwrap().max_rel_drift();
            if drift < 1e-6 {
                notes.push(format!("orthant drift {drift:.1e}"));
            } else {
                problems.push(format!("orthant drift {drift:.1e}"));
            }
        }
        Err(e) => problems.push(format!("orthant integration to t = {t_end}: {e}")),
    }

    let d = darboux(&sys, &f, DarbouxMethod::General).unwrap();
    let y0 = d.coordinate_map().unwrap().to_darboux(&x0).unwrap();
    match integrate_darboux(&d, &y0, t_end, rel_tol) {
        Ok(traj) => {
            let quantities = [Quantity::Hamiltonian {
                label: "H".into(),
                expr: d.hamiltonian.clone(),
            }];
            let drift = conservation_report(&traj, &quantities).unwrap().max_rel_drift();
            let frozen = traj.states().iter().all(|y| y[d.r..] == y0[d.r..]);
            if drift < 1e-8 && frozen {
                notes.push(format!("Darboux drift {drift:.1e}, Casimir coordinates frozen"));
            } else {
                problems.push(format!("Darboux drift {drift:.1e}, frozen = {frozen}"));
            }
        }
        Err(e) => problems.push(format!("Darboux integration to t = {t_end}: {e}")),
    }

    if problems.is_empty() {
        Verdict::pass(notes.join(", "))
    } else {
        problems.push("the solution from this x0 has a finite-time singularity near t = 0.435".into());
        Verdict::fail(problems.join("; "))
    }
}

fn main() {
    let s = seed();
    println!("acceptance criteria, seed {s}");
    let results = [
        criterion("AC1", "Nutku golden path", Some(Duration::from_secs(1)), ac1),
        criterion("AC2", "Darboux golden path", Some(Duration::from_secs(1)), ac2),
        criterion("AC3", "rank law on 500 systems", Some(Duration::from_secs(30)), || {
            from_outcomes(&[suite::rank_law(s, 500)])
        }),
        criterion("AC4", "Jacobi identity on 500 skew K", None, || {
            from_outcomes(&[suite::jacobi(s, 500, 10)])
        }),
        criterion("AC5", "transformation coherence on 200 pairs", None, || {
            from_outcomes(&[
                suite::qmt_coherence(s, 200),
                suite::embed_decouple_round_trip(s, 200),
            ])
        }),
        criterion("AC6", "conservation over t in [0, 20]", Some(Duration::from_secs(5)), ac6),
        criterion("AC7", "flow equivalence under QMT", None, || {
            from_outcomes(&[suite::qmt_flow(s, 20)])
        }),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
