use glvp_core::glv::EmbeddingSpec;
use glvp_core::poisson::{
    decouple_factorization, default_jacobi_samples, embed_factorization, hamiltonian,
    jacobi_residual, solve_factorization, verify_factorization,
};
use glvp_core::random::{
    random_full_rank, random_glvp, random_int_matrix, random_invertible, random_skew,
    InstanceShape,
};
use glvp_core::rational::{int, rat, Rational};
use glvp_core::ratmat::{canonical_skew, skew_congruence_canonicalize};
use glvp_core::RatMatrix;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let stacked = RatMatrix::from_rows(a.iter().chain(b).cloned().collect()).unwrap();
    stacked.rank() == a.len()
}

fn random_positive_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| rat(rng.gen_range(1..=9), rng.gen_range(1..=5)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), n in 1usize..6) {
        let c = random_invertible(&mut rng(seed), n, 3);
        let inv = c.invert().unwrap();
        prop_assert_eq!(&c * &inv, RatMatrix::identity(n));
        prop_assert_eq!(&inv * &c, RatMatrix::identity(n));
    }

    #[test]
    fn skew_canonicalization_reaches_canonical_form(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng(seed);
        // Low-rank inputs come from congruences of canonical forms.
        let k = if r.gen_bool(0.5) {
            random_skew(&mut r, n, 3)
        } else {
            let rank = 2 * r.gen_range(0..=n / 2);
            let q = random_int_matrix(&mut r, n, n, 2);
            &(&q * &canonical_skew(rank, n)) * &q.transpose()
        };
        let (p, rank) = skew_congruence_canonicalize(&k).unwrap();
        prop_assert_eq!(rank, k.rank());
        prop_assert!(p.determinant().map(|d| !d.is_zero()).unwrap());
        prop_assert_eq!(&(&p * &k) * &p.transpose(), canonical_skew(rank, n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rank_nullity_and_kernels(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let mut r = rng(seed);
        let rank_cap = r.gen_range(1..=rows.min(cols));
        let m = &random_int_matrix(&mut r, rows, rank_cap, 3) * &random_int_matrix(&mut r, rank_cap, cols, 3);
        let kernel = m.right_kernel_basis();
        prop_assert_eq!(m.rank() + kernel.len(), cols);
        for v in &kernel {
            prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
        let left = m.left_kernel_basis();
        prop_assert_eq!(m.rank() + left.len(), rows);
        for v in &left {
            prop_assert!(m.transpose().mul_vec(v).iter().all(Zero::is_zero));
        }
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn solve_returns_a_solution_when_consistent(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let m = random_int_matrix(&mut r, n, n + 1, 2);
        let x: Vec<Rational> = (0..n + 1).map(|_| int(r.gen_range(-3..=3))).collect();
        let b = m.mul_vec(&x);
        let sol = m.solve(&b).unwrap();
        prop_assert_eq!(m.mul_vec(&sol), b);
    }

    #[test]
    fn rank_law_and_casimir_kernel(seed in any::<u64>()) {
        let (sys, f) = random_glvp(&mut rng(seed), &InstanceShape::default());
        let rank_k = f.k.rank();
        prop_assert_eq!(sys.m_matrix().rank(), rank_k);
        prop_assert_eq!(sys.a().rank(), rank_k);
        prop_assert!(same_span(&sys.quasimonomial_invariants(), &f.k.right_kernel_basis()));
    }

    #[test]
    fn solver_finds_a_factorization_for_every_glvp_system(seed in any::<u64>()) {
        let (sys, f) = random_glvp(&mut rng(seed), &InstanceShape::default());
        let found = solve_factorization(&sys).unwrap();
        prop_assert!(verify_factorization(&sys, &found).unwrap());
        prop_assert_eq!(found.rank(), f.rank());
    }

    #[test]
    fn hamiltonian_and_casimirs_are_exactly_conserved(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = InstanceShape { max_n: 4, max_m: 5, ..InstanceShape::default() };
        let (sys, f) = random_glvp(&mut r, &shape);
        let h = hamiltonian(&sys, &f).unwrap();
        let casimirs = f.casimirs();
        for _ in 0..3 {
            let x = random_positive_point(&mut r, sys.n());
            let xdot = sys.eval_vector_field_exact(&x).unwrap();
            let dot = |g: Vec<Rational>| g.iter().zip(&xdot).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
            prop_assert!(dot(h.gradient_exact(&x).unwrap()).is_zero());
            for c in &casimirs {
                prop_assert!(dot(c.gradient_exact(&x)).is_zero());
            }
        }
    }

    #[test]
    fn jacobi_holds_for_skew_structure(seed in any::<u64>(), n in 1usize..7) {
        let k = random_skew(&mut rng(seed), n, 4);
        prop_assert!(jacobi_residual(&k, &default_jacobi_samples(n, 10, seed)).is_zero());
    }

    #[test]
    fn qmt_preserves_factorization_and_class(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (sys, f) = random_glvp(&mut r, &InstanceShape::default());
        let c = random_invertible(&mut r, sys.n(), 2);
        let moved = sys.apply_qmt(&c).unwrap();
        let moved_f = f.transform(&c).unwrap();
        prop_assert!(verify_factorization(&moved, &moved_f).unwrap());
        prop_assert_eq!(moved.class_signature(), sys.class_signature());
        let back = moved.apply_qmt(&c.invert().unwrap()).unwrap();
        prop_assert_eq!(back.b(), sys.b());
        prop_assert_eq!(back.a(), sys.a());
        prop_assert_eq!(back.lambda(), sys.lambda());
    }

    #[test]
    fn embed_then_decouple_restores_the_system(seed in any::<u64>(), p in 1usize..3) {
        let mut r = rng(seed);
        let shape = InstanceShape { max_n: 4, max_m: 8, ..InstanceShape::default() };
        let (sys, f) = random_glvp(&mut r, &shape);
        prop_assume!(sys.m() >= sys.n() + p);
        let alpha: Vec<Rational> = (0..p).map(|_| int(r.gen_range(1..=3))).collect();
        let spec = EmbeddingSpec { p, alpha: alpha.clone(), b_star: None, l_star: None };
        let embedded = sys.embed(&spec).unwrap();
        let embedded_f = embed_factorization(&sys, &f, &spec).unwrap();
        prop_assert!(verify_factorization(&embedded, &embedded_f).unwrap());
        let restored = embedded.decouple(p, &alpha).unwrap();
        prop_assert_eq!(restored.b(), sys.b());
        prop_assert_eq!(restored.a(), sys.a());
        prop_assert_eq!(restored.lambda(), sys.lambda());
        let restored_f = decouple_factorization(&embedded, &embedded_f, p, &alpha).unwrap();
        prop_assert_eq!(restored_f.factorization, f);
    }

    #[test]
    fn decoupling_keeps_the_symplectic_part(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = InstanceShape { max_n: 5, max_m: 6, ..InstanceShape::default() };
        let (sys, f) = random_glvp(&mut r, &shape);
        let p = sys.n() - f.rank();
        let ones = vec![int(1); p];
        let out = decouple_factorization(&sys, &f, p, &ones).unwrap();
        prop_assert!(verify_factorization(&out.system, &out.factorization).unwrap());
        prop_assert_eq!(out.factorization.rank(), f.rank());
        prop_assert_eq!(out.system.n(), f.rank());
    }

    #[test]
    fn completion_reaches_full_rank(seed in any::<u64>(), n in 1usize..5, extra in 0usize..4) {
        let mut r = rng(seed);
        let b = random_full_rank(&mut r, n + extra, n, 2);
        let completion = glvp_core::ratmat::complete_to_full_rank(&b, extra).unwrap();
        prop_assert_eq!(b.hstack(&completion).unwrap().rank(), n + extra);
    }
}
