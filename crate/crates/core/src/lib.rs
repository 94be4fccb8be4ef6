//! Exact-arithmetic building blocks for perturbation experiments on discrete
//! problems.
//!
//! The crate models *φ-bounded* families of distributions: an adversary fixes
//! a base instance, and the instance actually solved is drawn from a
//! distribution whose largest point mass is capped by a parameter φ.  At
//! φ = 1 the adversary can force a single instance (worst case); at
//! φ = 1/N every instance in the family's universe must carry roughly equal
//! mass (average case).  Everything probabilistic in the core is computed
//! with big rationals — floats appear only in summary statistics.
//!
//! Modules:
//!
//! - [`dist`] — parameterized distribution families with exact point-mass,
//!   cumulative, and inverse-CDF sampling access.
//! - [`codec`] — an injective, length-bounded compressor driven by the exact
//!   cumulative distribution, plus its decoder and exhaustive checkers.
//! - [`binopt`] — binary decision problems `∃x ∈ S: wᵀx ≤ t` with truncated
//!   pseudo-polynomial dynamic programming and an adaptive bit-revealing
//!   solver.
//! - [`gaps`] — winner/loser gap analysis for one coefficient draw, the exact
//!   gap duality check, and Monte Carlo verification of the gap tail bounds.
//! - [`graphs`] — edge-flip perturbation of adversarial graphs and a
//!   clique-gated k-coloring decision procedure.
//! - [`scheme`] — errorless heuristic schemes: budgeted execution, the
//!   scheme-from-tail-bound construction, and the doubling inverse.
//! - [`harness`] — seeded, reproducible Monte Carlo campaigns, moment/tail
//!   estimators, and CSV persistence.

pub mod bits;
pub mod num_util;

pub mod binopt;
pub mod codec;
pub mod dist;
pub mod gaps;
pub mod graphs;
pub mod harness;
pub mod scheme;

pub use bits::BitString;
pub use num_util::StepCounter;
