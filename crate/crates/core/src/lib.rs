//! Algebraic analysis of Generalized Lotka-Volterra (GLV) systems.
//!
//! A GLV system `ẋᵢ = xᵢ(λᵢ + Σⱼ Aᵢⱼ Πₖ xₖ^Bⱼₖ)` is Poisson whenever
//! `λ = K·L` and `A = K·Bᵀ·D` for a skew-symmetric `K` and a nonsingular
//! diagonal `D`. This crate detects that factorization exactly over the
//! rationals, derives the Hamiltonian, structure matrix and Casimirs, moves
//! systems between classes by quasimonomial transformations, embeddings and
//! decouplings, and reduces them to Darboux canonical form. A log-space
//! Runge-Kutta integrator checks the resulting invariants numerically.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

pub mod darboux;
pub mod dynamics;
pub mod error;
pub mod glv;
pub mod hamiltonian;
pub mod poisson;
pub mod random;
pub mod rational;
pub mod ratmat;

pub use darboux::{ChainStep, CoordinateMap, DarbouxMethod, DarbouxSystem};
pub use dynamics::{ConservationReport, Quantity, Trajectory};
pub use error::{Error, Result};
pub use glv::{ClassSignature, EmbeddingSpec, GlvSystem};
pub use hamiltonian::{Casimir, Chart, HamiltonianExpr, MonomialTerm};
pub use poisson::{GlvpFactorization, NotGlvp};
pub use rational::Rational;
pub use ratmat::RatMatrix;
