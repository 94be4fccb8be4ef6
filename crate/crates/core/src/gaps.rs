//! Winner-gap and loser-gap analysis for binary decision instances.
//!
//! Fix a ranking of the solutions in `S` (lexicographic by default).  The
//! *winner* `x*` is the highest-ranked solution satisfying `wᵀx ≤ t`, and the
//! winner gap is `Γ(t) = t − wᵀx*`.  The *loser* `x̂` is the solution of
//! minimal `wᵀx − t` among those ranked above the winner (all of which are
//! infeasible), and the loser gap is `Λ(t) = wᵀx̂ − t`; ties go to the
//! highest-ranked candidate.  Either gap is ⊥ when no qualifying solution
//! exists.
//!
//! Both gaps are attained by Pareto-optimal solutions, which ties them
//! together exactly: `Pr(Γ(t) < δ) = Pr(Λ(t−δ) ≤ δ)` as identities of
//! rationals, verified here by exhaustive enumeration of the coefficient
//! space.  Under per-coefficient densities capped by φ^(1/n), both event
//! probabilities are bounded by `δ·φ^(1/n)·n` for monotone rankings (n² for
//! non-monotone ones), verified here by seeded Monte Carlo.
//!
//! The all-zero vector must not lie in `S`: its feasibility is independent of
//! the coefficient draw, which would break the per-index analysis.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::binopt::{mask_cost, mask_to_vec, BinOptError, SolutionStructure};
use crate::dist::{CoefficientDistribution, DistError, PerturbationFamily, Phi};
use crate::harness::seeds::derive_seed;
use crate::num_util::ratio_pow;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GapError {
    #[error("gap analysis requires the all-zero vector to be outside S")]
    ZeroVectorInStructure,
    #[error("solution structure too large to enumerate ({0} solutions)")]
    StructureTooLarge(String),
    #[error("coefficient space too large to enumerate ({0} points)")]
    CoefficientSpaceTooLarge(String),
    #[error("coefficient {index} has maximum mass {mass}, above the phi^(1/n) cap")]
    MassBoundViolated { index: usize, mass: String },
    #[error(transparent)]
    BinOpt(#[from] BinOptError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Total order on solutions.  Lexicographic order is monotone: whenever `x`
/// outranks `y`, some coordinate flips from 0 in `y` to 1 in `x`.  The
/// reversed order deliberately violates that, to exercise the weaker n²
/// bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ranking {
    Lexicographic,
    ReverseLexicographic,
}

impl Ranking {
    pub fn is_monotone(self) -> bool {
        matches!(self, Ranking::Lexicographic)
    }

    /// True when `a` is ranked strictly higher than `b`.
    pub fn higher(self, a: u64, b: u64) -> bool {
        match self {
            Ranking::Lexicographic => a > b,
            Ranking::ReverseLexicographic => a < b,
        }
    }
}

/// Gap analysis of one coefficient draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    pub winner: Option<Vec<bool>>,
    pub loser: Option<Vec<bool>>,
    /// `t − wᵀx*`; ⊥ iff no feasible solution exists.
    pub gamma: Option<u128>,
    /// `wᵀx̂ − t ≥ 1`; ⊥ iff nothing outranks the winner with `wᵀx > t`.
    pub lambda: Option<u128>,
    /// Per-index loser gaps `Λ_i`; these may be negative (a per-index loser
    /// can be feasible) or ⊥.
    pub index_lambdas: Vec<Option<i128>>,
    /// All Pareto-optimal solutions, ranked highest first.
    pub pareto_set: Vec<Vec<bool>>,
}

fn feasible(cost: u128, t: i128) -> bool {
    t >= 0 && cost <= t as u128
}

/// Solutions as masks, highest rank first.  Capped at 2^20 solutions.
fn ranked_masks(
    structure: &SolutionStructure,
    n: usize,
    ranking: Ranking,
) -> Result<Vec<u64>, GapError> {
    let count = structure.count(n);
    if count > (num_bigint::BigUint::one() << 20u32) {
        return Err(GapError::StructureTooLarge(count.to_string()));
    }
    if !structure.excludes_zero(n) {
        return Err(GapError::ZeroVectorInStructure);
    }
    let mut masks = Vec::new();
    structure.for_each_desc(n, |m| masks.push(m))?;
    if ranking == Ranking::ReverseLexicographic {
        masks.reverse();
    }
    Ok(masks)
}

/// (Γ, Λ) in one pass over rank-ordered masks.  Everything scanned before
/// the winner is infeasible by definition, so the loser is the cheapest of
/// those; when no winner exists every solution is a loser candidate.
fn scan_gamma_lambda(
    masks_rank_desc: &[u64],
    weights: &[u64],
    t: i128,
) -> (Option<u128>, Option<u128>) {
    let mut cheapest: Option<u128> = None;
    for &mask in masks_rank_desc {
        let cost = mask_cost(weights, mask);
        if feasible(cost, t) {
            let gamma = (t - cost as i128) as u128;
            let lambda = cheapest.map(|c| (c as i128 - t) as u128);
            return (Some(gamma), lambda);
        }
        cheapest = Some(cheapest.map_or(cost, |c| c.min(cost)));
    }
    (None, cheapest.map(|c| (c as i128 - t) as u128))
}

/// Full gap analysis: winner, loser, Γ, Λ, per-index gaps, and the Pareto
/// set.  Requires an enumerable structure without the all-zero vector.
pub fn compute_gaps(
    structure: &SolutionStructure,
    n: usize,
    weights: &[u64],
    threshold: i128,
    ranking: Ranking,
) -> Result<GapReport, GapError> {
    let masks = ranked_masks(structure, n, ranking)?;
    let costs: Vec<u128> = masks.iter().map(|&m| mask_cost(weights, m)).collect();

    let mut winner: Option<(usize, u128)> = None;
    let mut loser: Option<(usize, u128)> = None;
    for (pos, &cost) in costs.iter().enumerate() {
        if feasible(cost, threshold) {
            winner = Some((pos, cost));
            break;
        }
        // Strict improvement keeps the highest-ranked among cost ties.
        if loser.is_none_or(|(_, c)| cost < c) {
            loser = Some((pos, cost));
        }
    }

    // A solution is Pareto-optimal iff it is strictly cheaper than every
    // higher-ranked solution; one descending scan with a running minimum.
    let mut pareto_set = Vec::new();
    let mut min_cost: Option<u128> = None;
    for (&mask, &cost) in masks.iter().zip(&costs) {
        if min_cost.is_none_or(|m| cost < m) {
            pareto_set.push(mask_to_vec(mask, n));
            min_cost = Some(cost);
        }
    }

    let index_lambdas = index_lambdas_from_scan(&masks, &costs, n, threshold);

    Ok(GapReport {
        winner: winner.map(|(pos, _)| mask_to_vec(masks[pos], n)),
        loser: loser.map(|(pos, _)| mask_to_vec(masks[pos], n)),
        gamma: winner.map(|(_, cost)| (threshold - cost as i128) as u128),
        lambda: loser.map(|(_, cost)| (cost as i128 - threshold) as u128),
        index_lambdas,
        pareto_set,
    })
}

/// Per-index loser gaps `Λ_i`.
///
/// For each coordinate i, the winner `x*ⁱ` is the highest-ranked feasible
/// solution with `x_i = 0`; the per-index loser is the solution of minimal
/// `wᵀx − t` among `x_i = 1` solutions ranked above `x*ⁱ` (no feasibility
/// requirement, so the gap can be ≤ 0).  Whenever Λ is defined it equals one
/// of the Λ_i.
pub fn compute_index_gaps(
    structure: &SolutionStructure,
    n: usize,
    weights: &[u64],
    threshold: i128,
    ranking: Ranking,
) -> Result<Vec<Option<i128>>, GapError> {
    let masks = ranked_masks(structure, n, ranking)?;
    let costs: Vec<u128> = masks.iter().map(|&m| mask_cost(weights, m)).collect();
    Ok(index_lambdas_from_scan(&masks, &costs, n, threshold))
}

fn index_lambdas_from_scan(
    masks_rank_desc: &[u64],
    costs: &[u128],
    n: usize,
    t: i128,
) -> Vec<Option<i128>> {
    (0..n)
        .map(|i| {
            let bit = n - 1 - i;
            let mut best: Option<i128> = None;
            for (&mask, &cost) in masks_rank_desc.iter().zip(costs) {
                if (mask >> bit) & 1 == 1 {
                    let gap = cost as i128 - t;
                    if best.is_none_or(|b| gap < b) {
                        best = Some(gap);
                    }
                } else if feasible(cost, t) {
                    // The winner avoiding coordinate i; nothing ranked below
                    // it qualifies.
                    break;
                }
            }
            best
        })
        .collect()
}

/// Both sides of the exact gap identity for one (t, δ) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualityCheck {
    /// Pr(Γ(t) < δ), exactly.
    pub gamma_side: BigRational,
    /// Pr(Λ(t−δ) ≤ δ), exactly.
    pub lambda_side: BigRational,
}

impl DualityCheck {
    pub fn holds(&self) -> bool {
        self.gamma_side == self.lambda_side
    }
}

/// Enumerates the whole coefficient space with exact probabilities and
/// evaluates `Pr(Γ(t) < δ)` and `Pr(Λ(t−δ) ≤ δ)`.  The two must be equal as
/// rationals for every threshold and every integer δ ≥ 1.
pub fn gap_duality_exact(
    structure: &SolutionStructure,
    n: usize,
    coeffs: &[CoefficientDistribution],
    threshold: i128,
    delta: u64,
    ranking: Ranking,
) -> Result<DualityCheck, GapError> {
    assert!(delta >= 1, "the duality is stated for integer deltas >= 1");
    assert_eq!(coeffs.len(), n);
    let masks = ranked_masks(structure, n, ranking)?;

    let space: num_bigint::BigUint = coeffs.iter().map(|c| c.support_size()).product();
    if space > (num_bigint::BigUint::one() << 20u32) {
        return Err(GapError::CoefficientSpaceTooLarge(space.to_string()));
    }

    let supports: Vec<Vec<u64>> = coeffs.iter().map(|c| c.support_values()).collect();
    let mut gamma_side = BigRational::zero();
    let mut lambda_side = BigRational::zero();
    let mut odometer = vec![0usize; n];
    let mut weights: Vec<u64> = supports.iter().map(|s| s[0]).collect();
    loop {
        let prob: BigRational = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| coeffs[i].point_mass(w))
            .product();

        let (gamma, _) = scan_gamma_lambda(&masks, &weights, threshold);
        if gamma.is_some_and(|g| g < delta as u128) {
            gamma_side += &prob;
        }
        let (_, lambda) = scan_gamma_lambda(&masks, &weights, threshold - delta as i128);
        if lambda.is_some_and(|l| l <= delta as u128) {
            lambda_side += &prob;
        }

        // Advance the odometer.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(DualityCheck { gamma_side, lambda_side });
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < supports[pos].len() {
                weights[pos] = supports[pos][odometer[pos]];
                break;
            }
            odometer[pos] = 0;
            weights[pos] = supports[pos][0];
        }
    }
}

/// One row of the Monte Carlo gap-tail table.
#[derive(Debug, Clone)]
pub struct GapMcRow {
    pub delta: u64,
    /// Empirical Pr(Γ(t) < δ).
    pub p_gamma: f64,
    /// Empirical Pr(Λ(t) ≤ δ).
    pub p_lambda: f64,
    /// The larger of the two binomial standard errors.
    pub stderr: f64,
    /// δ · φ^(1/n) · n (n² for non-monotone rankings), unclipped.
    pub bound: f64,
    pub trials: u64,
}

pub struct GapMcConfig {
    pub structure: SolutionStructure,
    pub n: usize,
    pub width: u32,
    pub coeffs: Vec<CoefficientDistribution>,
    pub phi: Phi,
    pub threshold: i128,
    pub deltas: Vec<u64>,
    pub trials: u64,
    pub master_seed: u64,
    pub ranking: Ranking,
}

/// Monte Carlo estimates of `Pr(Γ(t) < δ)` and `Pr(Λ(t) ≤ δ)` over a δ grid,
/// with the `δ·φ^(1/n)·n` bound column.  Refuses to run when a coefficient's
/// maximum mass exceeds φ^(1/n) — the bound would be meaningless.  A ⊥ gap
/// counts as the event not occurring.
pub fn gap_tail_mc(cfg: &GapMcConfig) -> Result<Vec<GapMcRow>, GapError> {
    for (index, c) in cfg.coeffs.iter().enumerate() {
        let (_, mass) = c.max_mass();
        if !cfg.phi.admits_coordinate_mass(&mass, cfg.n as u32) {
            return Err(GapError::MassBoundViolated { index, mass: mass.to_string() });
        }
    }
    let masks = ranked_masks(&cfg.structure, cfg.n, cfg.ranking)?;
    let family = PerturbationFamily::coefficient_product(
        cfg.n,
        cfg.phi.clone(),
        cfg.width,
        cfg.coeffs.clone(),
    )?;

    let gaps: Vec<(Option<u128>, Option<u128>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(cfg.master_seed, trial);
            let drawn = family.sample(seed);
            let weights: Vec<u64> = (0..cfg.n)
                .map(|i| drawn.slice(i * cfg.width as usize, cfg.width as usize).to_u64())
                .collect();
            scan_gamma_lambda(&masks, &weights, cfg.threshold)
        })
        .collect();

    let factor = if cfg.ranking.is_monotone() {
        cfg.n as f64
    } else {
        (cfg.n * cfg.n) as f64
    };
    let root = cfg.phi.nth_root_upper(cfg.n as u32);
    let rows = cfg
        .deltas
        .iter()
        .map(|&delta| {
            let mut gamma_hits = 0u64;
            let mut lambda_hits = 0u64;
            for (gamma, lambda) in &gaps {
                if gamma.is_some_and(|g| g < delta as u128) {
                    gamma_hits += 1;
                }
                if lambda.is_some_and(|l| l <= delta as u128) {
                    lambda_hits += 1;
                }
            }
            let trials = cfg.trials;
            let denom = trials.max(1) as f64;
            let p_gamma = gamma_hits as f64 / denom;
            let p_lambda = lambda_hits as f64 / denom;
            let se = |p: f64| (p * (1.0 - p) / denom).sqrt();
            GapMcRow {
                delta,
                p_gamma,
                p_lambda,
                stderr: se(p_gamma).max(se(p_lambda)),
                bound: delta as f64 * root * factor,
                trials,
            }
        })
        .collect();
    Ok(rows)
}

/// Exact interval probability `Pr(a ∈ [z, z+δ))` for one coefficient, with
/// the `φ^(1/n)·δ` cap checked via n-th powers.
#[derive(Debug, Clone)]
pub struct DensityCheck {
    pub prob: BigRational,
    pub ok: bool,
    pub bound: f64,
}

pub fn bounded_density_check(
    coeff: &CoefficientDistribution,
    phi: &Phi,
    n: u32,
    z: u64,
    delta: u64,
) -> DensityCheck {
    let hi = z.saturating_add(delta);
    let prob = coeff.cum_below(hi) - coeff.cum_below(z);
    // prob <= phi^(1/n) * delta  <=>  prob^n <= phi * delta^n.
    let delta_ratio = BigRational::from_integer(BigInt::from(delta));
    let ok = ratio_pow(&prob, n) <= phi.ratio() * ratio_pow(&delta_ratio, n);
    let bound = phi.nth_root_upper(n) * delta as f64;
    DensityCheck { prob, ok, bound }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;

    fn bs(v: &str) -> Vec<bool> {
        v.parse::<BitString>().unwrap().bits().to_vec()
    }

    fn structure_of(entries: &[&str]) -> SolutionStructure {
        let n = entries[0].len();
        SolutionStructure::explicit_list(entries.iter().map(|e| bs(e)).collect(), n).unwrap()
    }

    #[test]
    fn winner_and_loser_on_three_solutions() {
        let s = structure_of(&["01", "10", "11"]);
        let report = compute_gaps(&s, 2, &[4, 2], 3, Ranking::Lexicographic).unwrap();
        assert_eq!(report.winner, Some(bs("01")));
        assert_eq!(report.gamma, Some(1));
        assert_eq!(report.loser, Some(bs("10")));
        assert_eq!(report.lambda, Some(1));
    }

    #[test]
    fn generous_threshold_leaves_no_loser() {
        let s = SolutionStructure::nonzero_subsets(3);
        let report = compute_gaps(&s, 3, &[3, 1, 2], 100, Ranking::Lexicographic).unwrap();
        assert_eq!(report.winner, Some(bs("111")));
        assert_eq!(report.lambda, None);
        assert_eq!(report.loser, None);
    }

    #[test]
    fn hopeless_threshold_leaves_no_winner() {
        let s = SolutionStructure::nonzero_subsets(2);
        let report = compute_gaps(&s, 2, &[5, 7], 4, Ranking::Lexicographic).unwrap();
        assert_eq!(report.gamma, None);
        assert_eq!(report.winner, None);
        // Every solution is a loser candidate; (1,0) costs 5, minimal.
        assert_eq!(report.loser, Some(bs("10")));
        assert_eq!(report.lambda, Some(1));
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(matches!(
            compute_gaps(&SolutionStructure::AllSubsets, 2, &[1, 1], 1, Ranking::Lexicographic),
            Err(GapError::ZeroVectorInStructure)
        ));
    }

    #[test]
    fn winner_and_loser_are_pareto_optimal_exhaustively() {
        let s = SolutionStructure::nonzero_subsets(4);
        for w0 in 0..4u64 {
            for w1 in 0..4u64 {
                for t in 0..10i128 {
                    let weights = [w0, w1, 3, 1];
                    let report =
                        compute_gaps(&s, 4, &weights, t, Ranking::Lexicographic).unwrap();
                    if let Some(w) = &report.winner {
                        assert!(report.pareto_set.contains(w));
                    }
                    if let Some(l) = &report.loser {
                        assert!(report.pareto_set.contains(l));
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_is_always_one_of_the_index_lambdas() {
        // Claim B, exhaustively over a small coefficient cube.
        let s = SolutionStructure::nonzero_subsets(2);
        for w0 in 0..8u64 {
            for w1 in 0..8u64 {
                for t in -2..18i128 {
                    let report =
                        compute_gaps(&s, 2, &[w0, w1], t, Ranking::Lexicographic).unwrap();
                    if let Some(lambda) = report.lambda {
                        assert!(
                            report.index_lambdas.contains(&Some(lambda as i128)),
                            "w=({w0},{w1}) t={t}: lambda {lambda} not in {:?}",
                            report.index_lambdas
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn index_lambda_is_bottom_when_no_candidate_exists() {
        // No solution sets the second coordinate.
        let s = structure_of(&["10"]);
        let lambdas = compute_index_gaps(&s, 2, &[3, 9], 1, Ranking::Lexicographic).unwrap();
        assert_eq!(lambdas[0], Some(2)); // 10 costs 3, gap 3 - 1.
        assert_eq!(lambdas[1], None);
    }

    #[test]
    fn index_lambdas_match_their_definition_by_enumeration() {
        let s = SolutionStructure::nonzero_subsets(3);
        let masks = ranked_masks(&s, 3, Ranking::Lexicographic).unwrap();
        for w in [[1u64, 2, 3], [5, 0, 2], [4, 4, 4]] {
            for t in 0..10i128 {
                let got = compute_index_gaps(&s, 3, &w, t, Ranking::Lexicographic).unwrap();
                for i in 0..3 {
                    // Winner avoiding i, straight from the definition.
                    let winner_i = masks
                        .iter()
                        .find(|&&m| (m >> (2 - i)) & 1 == 0 && feasible(mask_cost(&w, m), t))
                        .copied();
                    let expect = masks
                        .iter()
                        .filter(|&&m| (m >> (2 - i)) & 1 == 1)
                        .filter(|&&m| winner_i.is_none_or(|wm| m > wm))
                        .map(|&m| mask_cost(&w, m) as i128 - t)
                        .min();
                    assert_eq!(got[i], expect, "w={w:?} t={t} i={i}");
                }
            }
        }
    }

    #[test]
    fn index_lambdas_match_their_definition_for_every_small_instance() {
        // n = 2, every 3-bit coefficient pair, every threshold.
        let s = SolutionStructure::nonzero_subsets(2);
        let masks = ranked_masks(&s, 2, Ranking::Lexicographic).unwrap();
        for w0 in 0..8u64 {
            for w1 in 0..8u64 {
                let w = [w0, w1];
                for t in -1..=17i128 {
                    let got = compute_index_gaps(&s, 2, &w, t, Ranking::Lexicographic).unwrap();
                    for i in 0..2 {
                        let winner_i = masks
                            .iter()
                            .find(|&&m| (m >> (1 - i)) & 1 == 0 && feasible(mask_cost(&w, m), t))
                            .copied();
                        let expect = masks
                            .iter()
                            .filter(|&&m| (m >> (1 - i)) & 1 == 1)
                            .filter(|&&m| winner_i.is_none_or(|wm| m > wm))
                            .map(|&m| mask_cost(&w, m) as i128 - t)
                            .min();
                        assert_eq!(got[i], expect, "w={w:?} t={t} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn mc_delta_zero_events_never_fire() {
        // Γ(t) < 0 is impossible and Λ(t) ≤ 0 is impossible with integer
        // costs strictly over the threshold.
        let n = 4usize;
        let cfg = GapMcConfig {
            structure: SolutionStructure::nonzero_subsets(n),
            n,
            width: 4,
            coeffs: (0..n).map(|_| CoefficientDistribution::uniform_full(4).unwrap()).collect(),
            phi: Phi::pow2_neg(16),
            threshold: 16,
            deltas: vec![0, 1],
            trials: 500,
            master_seed: 77,
            ranking: Ranking::Lexicographic,
        };
        let rows = gap_tail_mc(&cfg).unwrap();
        assert_eq!(rows[0].p_gamma, 0.0);
        assert_eq!(rows[0].p_lambda, 0.0);
        assert_eq!(rows[0].bound, 0.0);
    }

    #[test]
    fn duality_is_exact_on_uniform_two_bit_coefficients() {
        let s = SolutionStructure::nonzero_subsets(2);
        let coeffs = vec![
            CoefficientDistribution::uniform_full(2).unwrap(),
            CoefficientDistribution::uniform_full(2).unwrap(),
        ];
        for t in 0..=6i128 {
            for delta in 1..=3u64 {
                for ranking in [Ranking::Lexicographic, Ranking::ReverseLexicographic] {
                    let check =
                        gap_duality_exact(&s, 2, &coeffs, t, delta, ranking).unwrap();
                    assert!(check.holds(), "t={t} delta={delta} {ranking:?}: {check:?}");
                }
            }
        }
    }

    #[test]
    fn duality_handles_negative_shifted_thresholds() {
        let s = SolutionStructure::nonzero_subsets(2);
        let coeffs = vec![
            CoefficientDistribution::uniform_full(2).unwrap(),
            CoefficientDistribution::table(2, vec![(1, BigRational::new(1.into(), 2.into())), (2, BigRational::new(1.into(), 2.into()))]).unwrap(),
        ];
        for t in 0..3i128 {
            for delta in 1..=5u64 {
                let check =
                    gap_duality_exact(&s, 2, &coeffs, t, delta, Ranking::Lexicographic).unwrap();
                assert!(check.holds(), "t={t} delta={delta}: {check:?}");
            }
        }
    }

    #[test]
    fn duality_on_point_mass_coefficients_is_zero_one() {
        let s = SolutionStructure::nonzero_subsets(2);
        let coeffs = vec![
            CoefficientDistribution::point(2, 3).unwrap(),
            CoefficientDistribution::point(2, 1).unwrap(),
        ];
        for t in 0..=5i128 {
            let check =
                gap_duality_exact(&s, 2, &coeffs, t, 2, Ranking::Lexicographic).unwrap();
            assert!(check.holds());
            let zero = BigRational::zero();
            let one = BigRational::one();
            assert!(check.gamma_side == zero || check.gamma_side == one);
        }
    }

    #[test]
    fn density_check_on_uniform_coefficients() {
        let phi = Phi::pow2_neg(8); // phi^(1/2) = 1/16 for n = 2.
        let c = CoefficientDistribution::uniform_full(4).unwrap();
        let check = bounded_density_check(&c, &phi, 2, 3, 4);
        assert_eq!(check.prob, BigRational::new(4.into(), 16.into()));
        // 4/16 = 1/4 > phi^(1/2)*4 = 1/4?  Equality holds, so it passes.
        assert!(check.ok);

        let empty = bounded_density_check(&c, &phi, 2, 3, 0);
        assert_eq!(empty.prob, BigRational::zero());
        assert!(empty.ok);
    }

    #[test]
    fn density_check_on_a_window() {
        let phi = Phi::pow2_neg(6);
        let c = CoefficientDistribution::uniform_window(6, 8, 3).unwrap();
        // Interval [6, 11) overlaps support points 8, 9, 10.
        let check = bounded_density_check(&c, &phi, 2, 6, 5);
        assert_eq!(check.prob, BigRational::new(3.into(), 8.into()));
    }

    #[test]
    fn mc_bound_holds_for_both_rankings() {
        for (ranking, seed) in [(Ranking::Lexicographic, 11u64), (Ranking::ReverseLexicographic, 12)] {
            let n = 6usize;
            let cfg = GapMcConfig {
                structure: SolutionStructure::nonzero_subsets(n),
                n,
                width: 6,
                coeffs: (0..n).map(|_| CoefficientDistribution::uniform_full(6).unwrap()).collect(),
                phi: Phi::pow2_neg(36),
                threshold: 96,
                deltas: vec![1, 2, 4, 8],
                trials: 2000,
                master_seed: seed,
                ranking,
            };
            let rows = gap_tail_mc(&cfg).unwrap();
            for row in rows {
                let slack = 3.0 * row.stderr.max((0.25f64 / row.trials as f64).sqrt());
                assert!(
                    row.p_gamma <= row.bound + slack && row.p_lambda <= row.bound + slack,
                    "{ranking:?} delta={}: p_gamma={} p_lambda={} bound={}",
                    row.delta,
                    row.p_gamma,
                    row.p_lambda,
                    row.bound
                );
            }
        }
    }

    #[test]
    fn mc_refuses_when_the_mass_bound_fails() {
        let n = 2usize;
        let cfg = GapMcConfig {
            structure: SolutionStructure::nonzero_subsets(n),
            n,
            width: 4,
            coeffs: (0..n).map(|_| CoefficientDistribution::uniform_full(4).unwrap()).collect(),
            // phi = 2^-10 demands per-coefficient mass <= 2^-5, but uniform
            // 4-bit coefficients have mass 2^-4.
            phi: Phi::pow2_neg(10),
            threshold: 8,
            deltas: vec![1],
            trials: 10,
            master_seed: 0,
            ranking: Ranking::Lexicographic,
        };
        assert!(matches!(gap_tail_mc(&cfg), Err(GapError::MassBoundViolated { .. })));
    }
}
