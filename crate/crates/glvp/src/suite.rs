//! Seeded randomized property suite behind `glvp verify`.
//!
//! Each property draws its own ChaCha8 stream from the suite seed, so a
//! property's cases do not depend on which other properties run.

use glvp_core::dynamics::{integrate_glv, qmt_flow_residual};
use glvp_core::glv::EmbeddingSpec;
use glvp_core::poisson::{
    decouple_factorization, default_jacobi_samples, embed_factorization, hamiltonian,
    jacobi_residual, solve_factorization, verify_factorization,
};
use glvp_core::random::{random_glvp, random_invertible, random_skew, InstanceShape};
use glvp_core::rational::{int, rat, Rational};
use glvp_core::{Error, RatMatrix};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of running one property over a batch of random cases.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Draws discarded because a precondition did not hold (for example a
    /// flow with a finite-time singularity).
    pub skipped: usize,
    pub first_failure: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed() { "ok  " } else { "FAIL" };
        write!(
            f,
            "{verdict} {:<28} {} cases, {} failures",
            self.name, self.cases, self.failures
        )?;
        if self.skipped > 0 {
            write!(f, ", {} skipped draws", self.skipped)?;
        }
        if let Some(msg) = &self.first_failure {
            write!(f, " (first: {msg})")?;
        }
        Ok(())
    }
}

/// What a single case produced.
pub enum Case {
    Pass,
    Fail(String),
    /// The draw does not meet the property's precondition; draw again.
    Skip,
}

/// Runs `check` until `cases` draws pass or fail. Skips are redrawn, up to
/// 50 per requested case.
pub fn run_property(
    name: &'static str,
    seed: u64,
    stream: u64,
    cases: usize,
    mut check: impl FnMut(&mut ChaCha8Rng) -> Case,
) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = Outcome {
        name,
        cases: 0,
        failures: 0,
        skipped: 0,
        first_failure: None,
    };
    while out.cases < cases && out.skipped <= 50 * cases {
        match check(&mut rng) {
            Case::Pass => out.cases += 1,
            Case::Fail(msg) => {
                out.cases += 1;
                out.failures += 1;
                out.first_failure.get_or_insert(format!("case {}: {msg}", out.cases - 1));
            }
            Case::Skip => out.skipped += 1,
        }
    }
    if out.cases < cases {
        out.failures += 1;
        out.first_failure
            .get_or_insert(format!("only {} of {cases} draws met the precondition", out.cases));
    }
    out
}

fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let stacked = RatMatrix::from_rows(a.iter().chain(b).cloned().collect())
        .expect("kernel vectors share a length");
    stacked.rank() == a.len()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Case::Fail(format!($($msg)+));
        }
    };
}

macro_rules! attempt {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => return Case::Fail(e.to_string()),
        }
    };
}

/// rank M = rank A = rank K, and the left kernel of M spans Ker K.
pub fn rank_law(seed: u64, cases: usize) -> Outcome {
    run_property("rank law", seed, 1, cases, |rng| {
        let (sys, f) = random_glvp(rng, &InstanceShape::default());
        let (rm, ra, rk) = (sys.m_matrix().rank(), sys.a().rank(), f.rank());
        ensure!(rm == ra && ra == rk, "rank M = {rm}, rank A = {ra}, rank K = {rk}");
        ensure!(
            same_span(&sys.quasimonomial_invariants(), &f.k.right_kernel_basis()),
            "left kernel of M differs from Ker K"
        );
        Case::Pass
    })
}

/// The solver certifies every system built from a certificate.
pub fn solver_completeness(seed: u64, cases: usize) -> Outcome {
    run_property("solver completeness", seed, 2, cases, |rng| {
        let (sys, _) = random_glvp(rng, &InstanceShape::default());
        let found = match solve_factorization(&sys) {
            Ok(f) => f,
            Err(why) => return Case::Fail(format!("solver rejected a GLVP system: {why}")),
        };
        ensure!(attempt!(verify_factorization(&sys, &found)), "solver output fails verification");
        Case::Pass
    })
}

/// The Jacobi identity holds exactly for random skew `K`.
pub fn jacobi(seed: u64, cases: usize, points: usize) -> Outcome {
    run_property("jacobi identity", seed, 3, cases, |rng| {
        let n = rng.gen_range(1..=6);
        let k = random_skew(rng, n, 4);
        let samples = default_jacobi_samples(n, points, rng.gen());
        let residual = jacobi_residual(&k, &samples);
        ensure!(residual.is_zero(), "residual {residual} for n = {n}");
        Case::Pass
    })
}

/// `∇H·ẋ = 0` and `∇φ·ẋ = 0` exactly at random rational points.
pub fn exact_conservation(seed: u64, cases: usize) -> Outcome {
    let shape = InstanceShape {
        max_n: 4,
        max_m: 5,
        ..InstanceShape::default()
    };
    run_property("exact conservation", seed, 4, cases, |rng| {
        let (sys, f) = random_glvp(rng, &shape);
        let h = attempt!(hamiltonian(&sys, &f));
        let x: Vec<Rational> = (0..sys.n())
            .map(|_| rat(rng.gen_range(1..=9), rng.gen_range(1..=5)))
            .collect();
        let xdot = attempt!(sys.eval_vector_field_exact(&x));
        let dot = |g: &[Rational]| {
            g.iter()
                .zip(&xdot)
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
        };
        let dh = dot(&attempt!(h.gradient_exact(&x)));
        ensure!(dh.is_zero(), "dH/dt = {dh}");
        for c in f.casimirs() {
            let dc = dot(&c.gradient_exact(&x));
            ensure!(dc.is_zero(), "Casimir derivative {dc}");
        }
        Case::Pass
    })
}

/// A QMT with the transformed certificate still verifies, and `B·M` is kept.
pub fn qmt_coherence(seed: u64, cases: usize) -> Outcome {
    run_property("qmt coherence", seed, 5, cases, |rng| {
        let (sys, f) = random_glvp(rng, &InstanceShape::default());
        let c = random_invertible(rng, sys.n(), 2);
        let moved = attempt!(sys.apply_qmt(&c));
        let moved_f = attempt!(f.transform(&c));
        ensure!(
            attempt!(verify_factorization(&moved, &moved_f)),
            "transformed factorization fails verification"
        );
        ensure!(
            moved.class_signature() == sys.class_signature(),
            "class signature or B·M changed"
        );
        Case::Pass
    })
}

/// Embedding followed by decoupling with the same alpha restores the
/// matrices and the certificate.
pub fn embed_decouple_round_trip(seed: u64, cases: usize) -> Outcome {
    let shape = InstanceShape {
        max_n: 4,
        max_m: 8,
        ..InstanceShape::default()
    };
    run_property("embed/decouple round trip", seed, 6, cases, |rng| {
        let (sys, f) = random_glvp(rng, &shape);
        let p = rng.gen_range(1..=2);
        if sys.m() < sys.n() + p {
            return Case::Skip;
        }
        let alpha: Vec<Rational> = (0..p).map(|_| int(rng.gen_range(1..=3))).collect();
        let spec = EmbeddingSpec {
            p,
            alpha: alpha.clone(),
            b_star: None,
            l_star: None,
        };
        let embedded = attempt!(sys.embed(&spec));
        let embedded_f = attempt!(embed_factorization(&sys, &f, &spec));
        ensure!(
            attempt!(verify_factorization(&embedded, &embedded_f)),
            "embedded factorization fails verification"
        );
        let restored = attempt!(embedded.decouple(p, &alpha));
        ensure!(
            restored.b() == sys.b() && restored.a() == sys.a() && restored.lambda() == sys.lambda(),
            "decoupled matrices differ from the original"
        );
        let restored_f = attempt!(decouple_factorization(&embedded, &embedded_f, p, &alpha));
        ensure!(restored_f.factorization == f, "decoupled factorization differs");
        Case::Pass
    })
}

/// Residual tolerance for [`qmt_flow`].
pub const FLOW_RESIDUAL_TOL: f64 = 1e-5;

/// The image of a trajectory under a QMT satisfies the transformed field.
/// Draws whose flow leaves every compact set before `t = 1` are skipped.
pub fn qmt_flow(seed: u64, cases: usize) -> Outcome {
    let shape = InstanceShape {
        max_n: 4,
        max_m: 5,
        coeff: 2,
        exponent: 1,
    };
    let at: Vec<f64> = (1..=9).map(|k| k as f64 * 0.1).collect();
    run_property("qmt flow equivalence", seed, 7, cases, |rng| {
        let (sys, _) = random_glvp(rng, &shape);
        let c = random_invertible(rng, sys.n(), 1);
        let x0: Vec<f64> = (0..sys.n()).map(|_| rng.gen_range(0.5..2.0)).collect();
        match integrate_glv(&sys, &x0, 1.0, 1e-6) {
            Ok(_) => {}
            Err(Error::BlowUp { .. } | Error::StepUnderflow { .. }) => return Case::Skip,
            Err(e) => return Case::Fail(e.to_string()),
        }
        let residual = attempt!(qmt_flow_residual(&sys, &c, &x0, &at, 1e-4, 1e-12));
        // Written so that a NaN residual fails.
        ensure!(
            residual.partial_cmp(&FLOW_RESIDUAL_TOL) == Some(std::cmp::Ordering::Less),
            "residual {residual:e}"
        );
        Case::Pass
    })
}

/// Every property at `cases` cases each (the flow check runs a tenth as
/// many, at least one).
pub fn run_all(seed: u64, cases: usize) -> Vec<Outcome> {
    vec![
        rank_law(seed, cases),
        solver_completeness(seed, cases),
        jacobi(seed, cases, 10),
        exact_conservation(seed, cases),
        qmt_coherence(seed, cases),
        embed_decouple_round_trip(seed, cases),
        qmt_flow(seed, (cases / 10).max(1)),
    ]
}
