//! Seeded generators of random GLVP instances and transformations.

use alloc::vec::Vec;

use num_traits::Zero;
use rand::Rng;

use crate::glv::GlvSystem;
use crate::poisson::GlvpFactorization;
use crate::rational::{int, Rational};
use crate::ratmat::RatMatrix;

/// Size and coefficient bounds for [`random_glvp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceShape {
    pub max_n: usize,
    pub max_m: usize,
    /// Entries of `K` and `L` lie in `[-coeff, coeff]`.
    pub coeff: i64,
    /// Entries of `B` lie in `[-exponent, exponent]`.
    pub exponent: i64,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            max_n: 6,
            max_m: 8,
            coeff: 3,
            exponent: 2,
        }
    }
}

pub fn random_int_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, bound: i64) -> RatMatrix {
    let data = (0..rows * cols).map(|_| int(rng.gen_range(-bound..=bound))).collect();
    RatMatrix::from_row_major(rows, cols, data).expect("data has rows*cols entries")
}

pub fn random_skew<R: Rng + ?Sized>(rng: &mut R, n: usize, bound: i64) -> RatMatrix {
    let mut k = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = int(rng.gen_range(-bound..=bound));
            k[(j, i)] = -v.clone();
            k[(i, j)] = v;
        }
    }
    k
}

pub fn random_nonzero<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Rational {
    let magnitude = rng.gen_range(1..=bound.max(1));
    int(if rng.gen_bool(0.5) { magnitude } else { -magnitude })
}

/// An `m×n` integer matrix of rank `n`.
pub fn random_full_rank<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, bound: i64) -> RatMatrix {
    loop {
        let b = random_int_matrix(rng, m, n, bound);
        if b.rank() == n {
            return b;
        }
    }
}

pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize, bound: i64) -> RatMatrix {
    random_full_rank(rng, n, n, bound)
}

/// A GLVP system built from its certificate: random skew `K`, nonzero
/// diagonal `D`, `L` and full-rank integer `B`, with `λ = K·L` and
/// `A = K·Bᵀ·D`.
pub fn random_glvp<R: Rng + ?Sized>(rng: &mut R, shape: &InstanceShape) -> (GlvSystem, GlvpFactorization) {
    let n = rng.gen_range(1..=shape.max_n);
    let m = rng.gen_range(n..=shape.max_m.max(n));
    random_glvp_sized(rng, n, m, shape)
}

pub fn random_glvp_sized<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    shape: &InstanceShape,
) -> (GlvSystem, GlvpFactorization) {
    let k = random_skew(rng, n, shape.coeff);
    let d: Vec<Rational> = (0..m).map(|_| random_nonzero(rng, shape.coeff)).collect();
    let l = random_int_matrix(rng, n, 1, shape.coeff);
    let b = random_full_rank(rng, m, n, shape.exponent);
    let a = &(&k * &b.transpose()) * &RatMatrix::diagonal(&d);
    let lambda = &k * &l;
    let sys = GlvSystem::new("random", b, a, lambda).expect("generated shapes are consistent");
    debug_assert!(d.iter().all(|v| !v.is_zero()));
    (sys, GlvpFactorization::new(k, d, l))
}
