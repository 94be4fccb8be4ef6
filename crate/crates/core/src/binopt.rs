//! Binary decision problems `∃x ∈ S: wᵀx ≤ t` with perturbed coefficients.
//!
//! The solver never sees the full coefficients up front.  It truncates each
//! coefficient to its `b` most significant bits, scales the truncated values
//! down to `b`-bit integers, and runs a pseudo-polynomial dynamic program
//! that returns the lexicographically maximal solution of the truncated
//! problem.  A witness is accepted only after re-checking it against the true
//! coefficients; truncation can only shrink `wᵀx`, so an infeasible truncated
//! problem proves the true problem infeasible, and the loop reveals one more
//! bit otherwise.  At `b = W` the truncated problem is the true problem, so
//! the procedure is exact.
//!
//! Elementary steps are counted deterministically: one DP cell update, one
//! explicit-list scan item, or one coefficient comparison each cost one unit.
//! That makes step counts reproducible bit for bit across machines.

use num_bigint::BigUint;
use thiserror::Error;

use crate::num_util::{ceil_log2_usize, StepCounter};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BinOptError {
    #[error("cannot keep {bits} bits of a {width}-bit coefficient")]
    TruncationBits { bits: u32, width: u32 },
    #[error("coefficient width {0} exceeds 63 bits")]
    WidthTooLarge(u32),
    #[error("coefficient {value} does not fit in {width} bits")]
    WeightOverflow { value: u64, width: u32 },
    #[error("expected {want} coefficients, got {got}")]
    WeightCount { want: usize, got: usize },
    #[error("explicit solution list entries must be distinct and of length n")]
    MalformedList,
    #[error("solution structure too large to enumerate ({0} solutions)")]
    StructureTooLarge(String),
}

/// The combinatorial structure `S ⊆ {0,1}^n` of admissible solutions.
///
/// Solutions are bit vectors with `x₁` first; ranking them lexicographically
/// is the same as ranking the binary numbers they spell, which is what the
/// mask helpers below rely on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionStructure {
    AllSubsets,
    CardinalityExact(usize),
    /// Entries sorted in descending lexicographic order.
    ExplicitList(Vec<Vec<bool>>),
}

pub fn mask_to_vec(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|j| (mask >> (n - 1 - j)) & 1 == 1).collect()
}

pub fn vec_to_mask(x: &[bool]) -> u64 {
    x.iter().fold(0u64, |m, &b| (m << 1) | b as u64)
}

impl SolutionStructure {
    pub fn explicit_list(mut entries: Vec<Vec<bool>>, n: usize) -> Result<Self, BinOptError> {
        if entries.is_empty() || entries.iter().any(|e| e.len() != n) {
            return Err(BinOptError::MalformedList);
        }
        entries.sort();
        entries.reverse();
        if entries.windows(2).any(|p| p[0] == p[1]) {
            return Err(BinOptError::MalformedList);
        }
        Ok(SolutionStructure::ExplicitList(entries))
    }

    /// All nonzero subsets of `n` items, as an explicit list.  The all-zero
    /// vector is excluded, which the gap machinery requires.
    pub fn nonzero_subsets(n: usize) -> Self {
        assert!((1..=20).contains(&n), "nonzero-subset lists are materialized; keep n <= 20");
        let entries = (1..(1u64 << n)).rev().map(|m| mask_to_vec(m, n)).collect();
        SolutionStructure::ExplicitList(entries)
    }

    pub fn count(&self, n: usize) -> BigUint {
        match self {
            SolutionStructure::AllSubsets => BigUint::from(1u32) << n,
            SolutionStructure::CardinalityExact(k) => binomial(n, *k),
            SolutionStructure::ExplicitList(entries) => BigUint::from(entries.len()),
        }
    }

    pub fn contains_mask(&self, mask: u64, n: usize) -> bool {
        match self {
            SolutionStructure::AllSubsets => true,
            SolutionStructure::CardinalityExact(k) => mask.count_ones() as usize == *k,
            SolutionStructure::ExplicitList(entries) => {
                let x = mask_to_vec(mask, n);
                entries.binary_search_by(|e| x.cmp(e)).is_ok()
            }
        }
    }

    pub fn excludes_zero(&self, _n: usize) -> bool {
        match self {
            SolutionStructure::AllSubsets => false,
            SolutionStructure::CardinalityExact(k) => *k > 0,
            SolutionStructure::ExplicitList(entries) => {
                entries.last().is_none_or(|e| e.iter().any(|&b| b))
            }
        }
    }

    /// Visits every solution as a mask, in descending lexicographic order.
    /// Enumerable structures are capped at n = 24.
    pub fn for_each_desc(
        &self,
        n: usize,
        mut f: impl FnMut(u64),
    ) -> Result<(), BinOptError> {
        match self {
            SolutionStructure::AllSubsets | SolutionStructure::CardinalityExact(_) => {
                if n > 24 {
                    return Err(BinOptError::StructureTooLarge(self.count(n).to_string()));
                }
                match self {
                    SolutionStructure::CardinalityExact(k) => {
                        for mask in (0..(1u64 << n)).rev() {
                            if mask.count_ones() as usize == *k {
                                f(mask);
                            }
                        }
                    }
                    _ => {
                        for mask in (0..(1u64 << n)).rev() {
                            f(mask);
                        }
                    }
                }
            }
            SolutionStructure::ExplicitList(entries) => {
                for e in entries {
                    f(vec_to_mask(e));
                }
            }
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// One decision instance: does some `x ∈ S` satisfy `wᵀx ≤ t`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinDecisionInstance {
    pub n: usize,
    pub width: u32,
    pub structure: SolutionStructure,
    pub weights: Vec<u64>,
    pub threshold: u64,
}

impl BinDecisionInstance {
    pub fn new(
        n: usize,
        width: u32,
        structure: SolutionStructure,
        weights: Vec<u64>,
        threshold: u64,
    ) -> Result<Self, BinOptError> {
        if width > 63 {
            return Err(BinOptError::WidthTooLarge(width));
        }
        if weights.len() != n {
            return Err(BinOptError::WeightCount { want: n, got: weights.len() });
        }
        if let Some(&w) = weights.iter().find(|&&w| (w >> width) != 0) {
            return Err(BinOptError::WeightOverflow { value: w, width });
        }
        Ok(BinDecisionInstance { n, width, structure, weights, threshold })
    }

    pub fn cost_of(&self, x: &[bool]) -> u128 {
        vector_cost(&self.weights, x)
    }
}

pub fn mask_cost(weights: &[u64], mask: u64) -> u128 {
    let n = weights.len();
    debug_assert!(n <= 64);
    let mut cost = 0u128;
    for (j, &w) in weights.iter().enumerate() {
        if (mask >> (n - 1 - j)) & 1 == 1 {
            cost += w as u128;
        }
    }
    cost
}

/// `wᵀx` over a solution vector; safe for any n, unlike the mask helpers.
pub fn vector_cost(weights: &[u64], x: &[bool]) -> u128 {
    weights
        .iter()
        .zip(x)
        .filter(|(_, &taken)| taken)
        .map(|(&w, _)| w as u128)
        .sum()
}

/// Keeps the `bits` most significant of a `width`-bit value:
/// `2^(width-bits) * floor(a / 2^(width-bits))`.
pub fn truncate(a: u64, bits: u32, width: u32) -> Result<u64, BinOptError> {
    if bits > width {
        return Err(BinOptError::TruncationBits { bits, width });
    }
    if width > 63 {
        return Err(BinOptError::WidthTooLarge(width));
    }
    let shift = width - bits;
    Ok(if shift >= 64 { 0 } else { (a >> shift) << shift })
}

/// Guard against absurd DP tables; the algorithm is pseudo-polynomial and the
/// table has (n+1)·(cap+1) cells (times k+1 for cardinality structures).
const MAX_DP_CELLS: u128 = 1 << 28;

/// Lexicographically maximal `x ∈ S` with `vᵀx ≤ bound`, or `None`.
///
/// AllSubsets and CardinalityExact run a reachable-cost table over suffixes
/// (O(n·Σv) cell updates) followed by a greedy front-to-back pass that takes
/// a coordinate whenever the table certifies a completion; ExplicitList is a
/// linear scan.  Every table write, scanned cell, and comparison bumps the
/// step counter.
pub fn dp_solve(
    structure: &SolutionStructure,
    values: &[u64],
    bound: u64,
    steps: &mut StepCounter,
) -> Option<Vec<bool>> {
    let n = values.len();
    match structure {
        SolutionStructure::AllSubsets => {
            let cap = cost_cap(values, bound);
            let reach = reachable_costs(values, cap, steps);
            let mut budget = cap;
            let mut x = vec![false; n];
            for i in 0..n {
                steps.bump(1); // coefficient comparison
                if values[i] <= budget
                    && table_has_entry_below(&reach[i + 1], budget - values[i], steps)
                {
                    x[i] = true;
                    budget -= values[i];
                }
            }
            Some(x)
        }
        SolutionStructure::CardinalityExact(k) => {
            if *k > n {
                return None;
            }
            let cap = cost_cap(values, bound);
            let reach = reachable_costs_with_cardinality(values, *k, cap, steps);
            if !table_has_entry_below(&reach[idx(0, *k, *k, *k)], cap, steps) {
                // Even the full budget cannot reach cardinality k: infeasible.
                return None;
            }
            let mut budget = cap;
            let mut need = *k;
            let mut x = vec![false; n];
            for i in 0..n {
                steps.bump(1);
                if need > 0
                    && values[i] <= budget
                    && table_has_entry_below(&reach[idx(i + 1, need - 1, *k, *k)], budget - values[i], steps)
                {
                    x[i] = true;
                    budget -= values[i];
                    need -= 1;
                }
            }
            debug_assert_eq!(need, 0);
            Some(x)
        }
        SolutionStructure::ExplicitList(entries) => {
            for e in entries {
                steps.bump(1); // scan item
                let cost = vector_cost(values, e);
                if cost <= bound as u128 {
                    return Some(e.clone());
                }
            }
            None
        }
    }
}

fn cost_cap(values: &[u64], bound: u64) -> u64 {
    let total: u128 = values.iter().map(|&v| v as u128).sum();
    total.min(bound as u128) as u64
}

/// reach[i][c]: some choice over coordinates i..n has cost exactly c.
fn reachable_costs(values: &[u64], cap: u64, steps: &mut StepCounter) -> Vec<Vec<bool>> {
    let n = values.len();
    let cells = (n as u128 + 1) * (cap as u128 + 1);
    assert!(cells <= MAX_DP_CELLS, "DP table of {cells} cells is over the safety limit");
    let width = cap as usize + 1;
    let mut reach = vec![vec![false; width]; n + 1];
    reach[n][0] = true;
    steps.bump(1);
    for i in (0..n).rev() {
        for c in 0..width {
            let skip = reach[i + 1][c];
            let take = c as u64 >= values[i] && reach[i + 1][c - values[i] as usize];
            reach[i][c] = skip || take;
            steps.bump(1);
        }
    }
    reach
}

fn idx(i: usize, r: usize, _k: usize, k_max: usize) -> usize {
    i * (k_max + 1) + r
}

/// reach[idx(i, r)][c]: some choice over coordinates i..n with exactly r ones
/// has cost exactly c.
fn reachable_costs_with_cardinality(
    values: &[u64],
    k: usize,
    cap: u64,
    steps: &mut StepCounter,
) -> Vec<Vec<bool>> {
    let n = values.len();
    let cells = (n as u128 + 1) * (k as u128 + 1) * (cap as u128 + 1);
    assert!(cells <= MAX_DP_CELLS, "DP table of {cells} cells is over the safety limit");
    let width = cap as usize + 1;
    let mut reach = vec![vec![false; width]; (n + 1) * (k + 1)];
    reach[idx(n, 0, k, k)][0] = true;
    steps.bump(1);
    for i in (0..n).rev() {
        for r in 0..=k {
            for c in 0..width {
                let skip = reach[idx(i + 1, r, k, k)][c];
                let take = r >= 1
                    && c as u64 >= values[i]
                    && reach[idx(i + 1, r - 1, k, k)][c - values[i] as usize];
                reach[idx(i, r, k, k)][c] = skip || take;
                steps.bump(1);
            }
        }
    }
    reach
}

fn table_has_entry_below(row: &[bool], budget: u64, steps: &mut StepCounter) -> bool {
    for (c, &ok) in row.iter().enumerate() {
        steps.bump(1);
        if c as u64 > budget {
            return false;
        }
        if ok {
            return true;
        }
    }
    false
}

/// The adaptive solver's full account of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveTrace {
    pub answer: bool,
    pub witness: Option<Vec<bool>>,
    pub bits_revealed: u32,
    pub steps: BigUint,
}

/// Default starting precision: the highest ⌈log2 n⌉ + 1 bits.
pub fn default_start_bits(n: usize) -> u32 {
    ceil_log2_usize(n) + 1
}

/// Decides the instance by revealing coefficient bits adaptively.
///
/// For each `b = b₀, b₀+1, …, W`: solve the truncated, scaled-down problem;
/// an infeasible truncation settles the answer as no, a witness that passes
/// the true-coefficient check settles it as yes, anything else reveals one
/// more bit.  `steps` accumulates across iterations.
pub fn adaptive_solve(inst: &BinDecisionInstance, start_bits: Option<u32>) -> SolveTrace {
    let w = inst.width;
    let b0 = start_bits.unwrap_or_else(|| default_start_bits(inst.n)).clamp(1, w.max(1));
    let mut steps = StepCounter::new();
    let mut b = b0;
    loop {
        let shift = w - b;
        let scaled: Vec<u64> = inst.weights.iter().map(|&a| a >> shift).collect();
        let bound = inst.threshold >> shift;
        match dp_solve(&inst.structure, &scaled, bound, &mut steps) {
            None => {
                // Truncation only lowers wᵀx, so an infeasible truncated
                // problem certifies the true answer.
                return SolveTrace {
                    answer: false,
                    witness: None,
                    bits_revealed: b,
                    steps: steps.to_biguint(),
                };
            }
            Some(x) => {
                steps.bump(inst.n as u64);
                let true_cost = vector_cost(&inst.weights, &x);
                if true_cost <= inst.threshold as u128 {
                    return SolveTrace {
                        answer: true,
                        witness: Some(x),
                        bits_revealed: b,
                        steps: steps.to_biguint(),
                    };
                }
            }
        }
        debug_assert!(b < w, "the full-precision iteration is exact");
        b += 1;
    }
}

/// Exact decision by enumeration, with the lexicographically maximal witness.
/// This is the oracle the adaptive solver is measured against.
pub fn brute_force_decide(
    inst: &BinDecisionInstance,
) -> Result<(bool, Option<Vec<bool>>), BinOptError> {
    let count = inst.structure.count(inst.n);
    if count > (BigUint::from(1u32) << 24) {
        return Err(BinOptError::StructureTooLarge(count.to_string()));
    }
    let mut found: Option<u64> = None;
    inst.structure.for_each_desc(inst.n, |mask| {
        if found.is_none() && mask_cost(&inst.weights, mask) <= inst.threshold as u128 {
            found = Some(mask);
        }
    })?;
    Ok(match found {
        Some(mask) => (true, Some(mask_to_vec(mask, inst.n))),
        None => (false, None),
    })
}
