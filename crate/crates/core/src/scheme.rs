//! Errorless heuristic schemes.
//!
//! A scheme runs a decision algorithm under a step budget and answers ⊥ when
//! the budget runs out — it may fail, but it never answers wrongly.  Two
//! constructions connect schemes and plain algorithms:
//!
//! - *budgeting*: given an algorithm whose running-time tail decays like
//!   `Pr[t ≥ T] ≤ (n/T^ε)·N·φ`, running it for `⌈(n·N·φ/δ)^(1/ε)⌉` steps
//!   yields a scheme whose failure probability is at most δ;
//! - *doubling*: given a scheme, running it with δ = 1/2, 1/4, 1/8, … until
//!   it answers recovers an algorithm that decides every input.
//!
//! Budgets are measured in the wrapped algorithm's own elementary-step
//! metric, never wall-clock time.  ε is restricted to rationals 1/m, which
//! makes the budget an exact integer power of an exact rational — the budget
//! table is reproducible bit for bit.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::binopt::{adaptive_solve, BinDecisionInstance};
use crate::graphs::{color_decide, Graph};
use crate::num_util::{ceil_to_biguint, ratio_pow};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("failure budget delta must lie in (0, 1), got {0}")]
    BadDelta(String),
    #[error("epsilon denominator must be at least 1")]
    BadEpsilon,
}

/// A decision together with its exact elementary-step count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub accept: bool,
    pub steps: BigUint,
}

/// Any decision algorithm that reports the module-standard step count.
pub trait CountingAlgorithm<I> {
    fn decide(&self, input: &I) -> Decision;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetedResult {
    Accept,
    Reject,
    Bottom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetedOutcome {
    pub result: BudgetedResult,
    /// Steps actually consumed: the full run when it finished, the budget
    /// when it did not.
    pub steps_used: BigUint,
    /// The failure budget this outcome was produced under, when one applies.
    pub delta: Option<BigRational>,
}

impl BudgetedOutcome {
    pub fn is_bottom(&self) -> bool {
        self.result == BudgetedResult::Bottom
    }

    pub fn answer(&self) -> Option<bool> {
        match self.result {
            BudgetedResult::Accept => Some(true),
            BudgetedResult::Reject => Some(false),
            BudgetedResult::Bottom => None,
        }
    }
}

/// Runs the algorithm under a step budget, inclusive at the boundary: a run
/// that needs exactly `budget` steps completes.
///
/// The algorithms in this crate are pure and always terminate at experiment
/// scale, so the cutoff is implemented by running to completion and
/// comparing step counts — behaviorally identical to an instrumented abort,
/// and it keeps every algorithm's step accounting in one place.
pub fn run_budgeted<I, A: CountingAlgorithm<I>>(
    alg: &A,
    input: &I,
    budget: &BigUint,
) -> BudgetedOutcome {
    let full = alg.decide(input);
    if full.steps <= *budget {
        BudgetedOutcome {
            result: if full.accept { BudgetedResult::Accept } else { BudgetedResult::Reject },
            steps_used: full.steps,
            delta: None,
        }
    } else {
        BudgetedOutcome { result: BudgetedResult::Bottom, steps_used: budget.clone(), delta: None }
    }
}

/// Anything that can be asked to decide an input under a failure budget δ.
pub trait HeuristicScheme<I> {
    fn run(&self, input: &I, delta: &BigRational) -> Result<BudgetedOutcome, SchemeError>;
}

/// The scheme obtained from a tail-bounded algorithm by budgeting:
/// `budget(δ) = ⌈(n·N·φ/δ)^m⌉` with ε = 1/m.
#[derive(Debug, Clone)]
pub struct ErrorlessScheme<A> {
    inner: A,
    /// m, where ε = 1/m.
    eps_denom: u32,
    /// n · N · φ, exact.
    scale: BigRational,
}

impl<A> ErrorlessScheme<A> {
    pub fn new(
        inner: A,
        eps_denom: u32,
        n: usize,
        universe: &BigUint,
        phi: &crate::dist::Phi,
    ) -> Result<Self, SchemeError> {
        if eps_denom == 0 {
            return Err(SchemeError::BadEpsilon);
        }
        let scale = BigRational::from_integer(BigInt::from(n))
            * BigRational::from_integer(BigInt::from(universe.clone()))
            * phi.ratio();
        Ok(ErrorlessScheme { inner, eps_denom, scale })
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }

    pub fn budget(&self, delta: &BigRational) -> Result<BigUint, SchemeError> {
        if !delta.is_positive() || delta >= &BigRational::one() {
            return Err(SchemeError::BadDelta(delta.to_string()));
        }
        let base = &self.scale / delta;
        Ok(ceil_to_biguint(&ratio_pow(&base, self.eps_denom)))
    }
}

impl<I, A: CountingAlgorithm<I>> HeuristicScheme<I> for ErrorlessScheme<A> {
    fn run(&self, input: &I, delta: &BigRational) -> Result<BudgetedOutcome, SchemeError> {
        let budget = self.budget(delta)?;
        let mut outcome = run_budgeted(&self.inner, input, &budget);
        outcome.delta = Some(delta.clone());
        Ok(outcome)
    }
}

/// A full decision recovered from a scheme by halving δ until it answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeDecision {
    pub accept: bool,
    /// Total steps across all iterations, failed ones included.
    pub steps: BigUint,
    pub iterations: u32,
}

/// Runs the scheme with δ = 2^-1, 2^-2, … until it answers.  Every scheme
/// whose budgets grow as δ shrinks answers eventually on inputs its inner
/// algorithm decides in finitely many steps.
pub fn scheme_to_algorithm<I>(
    scheme: &impl HeuristicScheme<I>,
    input: &I,
) -> Result<SchemeDecision, SchemeError> {
    let mut total = BigUint::zero();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut delta = half.clone();
    for iteration in 1..=256u32 {
        let outcome = scheme.run(input, &delta)?;
        total += &outcome.steps_used;
        if let Some(accept) = outcome.answer() {
            return Ok(SchemeDecision { accept, steps: total, iterations: iteration });
        }
        delta *= &half;
    }
    unreachable!("budgets double past any terminating run length within 256 iterations")
}

/// The adaptive bit-revealing solver as a counting algorithm.
#[derive(Debug, Clone, Default)]
pub struct AdaptiveSolveAlgorithm {
    pub start_bits: Option<u32>,
}

impl CountingAlgorithm<BinDecisionInstance> for AdaptiveSolveAlgorithm {
    fn decide(&self, input: &BinDecisionInstance) -> Decision {
        let trace = adaptive_solve(input, self.start_bits);
        Decision { accept: trace.answer, steps: trace.steps }
    }
}

/// The clique-gated coloring decision as a counting algorithm.
#[derive(Debug, Clone)]
pub struct ColorDecideAlgorithm {
    pub k: usize,
}

impl CountingAlgorithm<Graph> for ColorDecideAlgorithm {
    fn decide(&self, input: &Graph) -> Decision {
        let d = color_decide(input, self.k);
        Decision { accept: d.colorable, steps: d.steps }
    }
}
