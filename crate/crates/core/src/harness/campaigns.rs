//! Concrete experiment campaigns: configs, runners, and CSV row shapes.
//!
//! Every campaign is a pure function of its config and master seed: trial i
//! runs on `derive_seed(master, i)`, adversary choices (window placement,
//! random base graphs) come from a separate tagged stream, and records are
//! collected in trial order.  Worker counts change scheduling only, never
//! output.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::binopt::{adaptive_solve, BinDecisionInstance, SolutionStructure};
use crate::bits::BitString;
use crate::codec;
use crate::dist::{
    phi_from_rho, spec::FamilySpec, CoefficientDistribution, DensityMultiplier,
    PerturbationFamily, Phi,
};
use crate::gaps::{gap_tail_mc, GapMcConfig, GapMcRow, Ranking};
use crate::graphs::{color_decide, noclique_bound, Graph, PerturbKind, PerturbedGraphModel};
use crate::num_util::parse_ratio;
use crate::scheme::{
    scheme_to_algorithm, AdaptiveSolveAlgorithm, ColorDecideAlgorithm, CountingAlgorithm,
    ErrorlessScheme, HeuristicScheme,
};

use super::seeds::{derive_seed, ADVERSARY_STREAM};
use super::{run_indexed, with_pool, HarnessError};

fn yesno(b: bool) -> String {
    if b { "yes".into() } else { "no".into() }
}

// ---------------------------------------------------------------------
// Solution structures as config values
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureSpec {
    Subsets,
    Cardinality { k: usize },
    NonzeroSubsets,
    Explicit { solutions: Vec<String> },
}

impl StructureSpec {
    /// CLI syntax: `subsets`, `card:K`, `nonzero`, or `file:PATH` (a JSON
    /// array of bit strings).
    pub fn parse_cli(text: &str) -> Result<Self, HarnessError> {
        if text == "subsets" {
            return Ok(StructureSpec::Subsets);
        }
        if text == "nonzero" {
            return Ok(StructureSpec::NonzeroSubsets);
        }
        if let Some(k) = text.strip_prefix("card:") {
            let k: usize = k
                .parse()
                .map_err(|_| HarnessError::Validation(vec![format!("bad cardinality {k:?}")]))?;
            return Ok(StructureSpec::Cardinality { k });
        }
        if let Some(path) = text.strip_prefix("file:") {
            let body = std::fs::read_to_string(path)?;
            let solutions: Vec<String> = serde_json::from_str(&body)
                .map_err(|e| HarnessError::Validation(vec![format!("bad structure file: {e}")]))?;
            return Ok(StructureSpec::Explicit { solutions });
        }
        Err(HarnessError::Validation(vec![format!(
            "unknown structure {text:?}; expected subsets, card:K, nonzero, or file:PATH"
        )]))
    }

    pub fn build(&self, n: usize) -> Result<SolutionStructure, HarnessError> {
        match self {
            StructureSpec::Subsets => Ok(SolutionStructure::AllSubsets),
            StructureSpec::Cardinality { k } => Ok(SolutionStructure::CardinalityExact(*k)),
            StructureSpec::NonzeroSubsets => Ok(SolutionStructure::nonzero_subsets(n)),
            StructureSpec::Explicit { solutions } => {
                let entries = solutions
                    .iter()
                    .map(|s| {
                        s.parse::<BitString>()
                            .map(|b| b.bits().to_vec())
                            .map_err(|_| {
                                HarnessError::Validation(vec![format!("bad solution {s:?}")])
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SolutionStructure::explicit_list(entries, n)?)
            }
        }
    }
}

// ---------------------------------------------------------------------
// The perturbed knapsack model shared by solve/gapsim/scheme campaigns
// ---------------------------------------------------------------------

/// Builds the coefficient-product family for a density multiplier rho:
/// per-coefficient uniform dyadic windows, as narrow as the φ^(1/n) cap
/// allows, placed adversarially from the tagged seed stream.
pub fn knapsack_family(
    n: usize,
    width: u32,
    rho: &BigUint,
    master_seed: u64,
) -> Result<PerturbationFamily, HarnessError> {
    let universe = BigUint::one() << (n * width as usize);
    if rho.is_zero() || *rho > universe {
        return Err(HarnessError::Validation(vec![format!(
            "rho must lie in [1, 2^(n*W)], got {rho}"
        )]));
    }
    // Narrowest windows with (2^-span)^n <= rho / 2^(n*W):
    // span = W - floor(floor(log2 rho) / n).
    let log2_rho = (rho.bits() - 1) as u32;
    let span = width - (log2_rho / n as u32).min(width);
    let window = 1u64 << span;
    let full = 1u64 << width;
    let coeffs = (0..n)
        .map(|i| {
            let draw = derive_seed(master_seed ^ ADVERSARY_STREAM, i as u64);
            let lo = draw % (full - window + 1);
            CoefficientDistribution::uniform_window(width, lo, span)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let phi = phi_from_rho(
        &DensityMultiplier::new(rho.clone())?,
        &universe,
        (n * width as usize) as u32,
    )?;
    Ok(PerturbationFamily::coefficient_product(n, phi, width, coeffs)?)
}

/// Balanced default threshold `n · 2^(W-2)`: about half the expected total
/// weight, which keeps instances away from the trivial always-yes and
/// always-no regimes.
pub fn default_threshold(n: usize, width: u32) -> u64 {
    if width < 2 {
        n as u64
    } else {
        (n as u64) << (width - 2)
    }
}

pub fn sampled_weights(fam: &PerturbationFamily, n: usize, width: u32, seed: u64) -> Vec<u64> {
    let drawn = fam.sample(seed);
    (0..n)
        .map(|i| drawn.slice(i * width as usize, width as usize).to_u64())
        .collect()
}

fn parse_rho(text: &str) -> Result<BigUint, HarnessError> {
    text.parse()
        .map_err(|_| HarnessError::Validation(vec![format!("bad rho {text:?}")]))
}

// ---------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub n: usize,
    pub width: u32,
    /// Density multiplier; φ = rho / 2^(n·W).
    pub rho: String,
    pub structure: StructureSpec,
    #[serde(default)]
    pub threshold: Option<u64>,
    #[serde(default)]
    pub start_bits: Option<u32>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: usize,
}

impl SolveConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.n == 0 {
            bad.push("n must be positive".into());
        }
        if self.width == 0 || self.width > 63 {
            bad.push("width must lie in 1..=63".into());
        }
        if parse_rho(&self.rho).is_err() {
            bad.push(format!("bad rho {:?}", self.rho));
        }
        if let StructureSpec::Cardinality { k } = self.structure {
            if k > self.n {
                bad.push(format!("cardinality {k} exceeds n = {}", self.n));
            }
        }
        bad
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveRecord {
    pub trial: u64,
    pub seed: u64,
    pub answer: bool,
    pub bits_revealed: u32,
    pub steps: BigUint,
}

#[derive(Debug, Clone)]
pub struct SolveCampaign {
    pub config: SolveConfig,
    pub family: PerturbationFamily,
    pub threshold: u64,
    pub records: Vec<SolveRecord>,
}

pub const SOLVE_COLUMNS: &[&str] = &["trial", "seed", "answer", "bits_revealed", "steps"];

pub fn run_solve_campaign(cfg: &SolveConfig) -> Result<SolveCampaign, HarnessError> {
    let bad = cfg.validate();
    if !bad.is_empty() {
        return Err(HarnessError::Validation(bad));
    }
    let rho = parse_rho(&cfg.rho)?;
    let family = knapsack_family(cfg.n, cfg.width, &rho, cfg.master_seed)?;
    let structure = cfg.structure.build(cfg.n)?;
    let threshold = cfg.threshold.unwrap_or_else(|| default_threshold(cfg.n, cfg.width));

    let records = run_indexed(cfg.trials, cfg.threads, |trial| {
        let seed = derive_seed(cfg.master_seed, trial);
        let weights = sampled_weights(&family, cfg.n, cfg.width, seed);
        let inst = BinDecisionInstance::new(
            cfg.n,
            cfg.width,
            structure.clone(),
            weights,
            threshold,
        )
        .expect("sampled weights fit the declared width");
        let trace = adaptive_solve(&inst, cfg.start_bits);
        SolveRecord {
            trial,
            seed,
            answer: trace.answer,
            bits_revealed: trace.bits_revealed,
            steps: trace.steps,
        }
    });
    Ok(SolveCampaign { config: cfg.clone(), family, threshold, records })
}

impl SolveCampaign {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    r.trial.to_string(),
                    r.seed.to_string(),
                    yesno(r.answer),
                    r.bits_revealed.to_string(),
                    r.steps.to_string(),
                ]
            })
            .collect()
    }

    pub fn steps(&self) -> Vec<BigUint> {
        self.records.iter().map(|r| r.steps.clone()).collect()
    }

    /// n · N · φ as a float, for estimator bound columns.
    pub fn moment_bound(&self) -> f64 {
        let n_phi = BigRational::from_integer(self.family.universe_size().into())
            * self.family.phi().ratio();
        self.config.n as f64 * crate::num_util::ratio_to_f64(&n_phi)
    }

    pub fn summary(&self) -> serde_json::Value {
        if self.records.is_empty() {
            return serde_json::json!({"trials": 0, "note": "no data"});
        }
        let yes = self.records.iter().filter(|r| r.answer).count();
        let mean_bits = self.records.iter().map(|r| r.bits_revealed as f64).sum::<f64>()
            / self.records.len() as f64;
        let max_steps = self.records.iter().map(|r| &r.steps).max().unwrap();
        serde_json::json!({
            "trials": self.records.len(),
            "yes_fraction": yes as f64 / self.records.len() as f64,
            "mean_bits_revealed": mean_bits,
            "max_steps": max_steps.to_string(),
            "threshold": self.threshold,
        })
    }

    /// Empirical Pr[bits_revealed > b] for every b up to W, against the
    /// bound 2^(W-b) · φ^(1/n) · n².
    pub fn bit_tail(&self) -> Vec<BitTailRow> {
        let n = self.config.n;
        let w = self.config.width;
        let root = self.family.phi().nth_root_upper(n as u32);
        let trials = self.records.len().max(1) as f64;
        (1..=w)
            .map(|b| {
                let hits =
                    self.records.iter().filter(|r| r.bits_revealed > b).count() as f64;
                BitTailRow {
                    bits: b,
                    p_emp: hits / trials,
                    bound: 2f64.powi((w - b) as i32) * root * (n * n) as f64,
                }
            })
            .collect()
    }
}

/// One row of the bit-revelation tail table.
#[derive(Debug, Clone)]
pub struct BitTailRow {
    pub bits: u32,
    pub p_emp: f64,
    pub bound: f64,
}

// ---------------------------------------------------------------------
// gapsim
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaGrid {
    pub lo: u64,
    pub hi: u64,
    pub step: u64,
}

impl DeltaGrid {
    /// CLI syntax `lo:hi:step`, inclusive on both ends.
    pub fn parse_cli(text: &str) -> Result<Self, HarnessError> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || HarnessError::Validation(vec![format!("bad delta grid {text:?}")]);
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].parse().map_err(|_| bad())?;
        let hi = parts[1].parse().map_err(|_| bad())?;
        let step = parts[2].parse().map_err(|_| bad())?;
        Ok(DeltaGrid { lo, hi, step })
    }

    pub fn values(&self) -> Vec<u64> {
        if self.step == 0 || self.hi < self.lo {
            return Vec::new();
        }
        (self.lo..=self.hi).step_by(self.step as usize).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapSimConfig {
    pub n: usize,
    pub width: u32,
    pub rho: String,
    pub structure: StructureSpec,
    #[serde(default)]
    pub threshold: Option<i64>,
    pub delta_grid: DeltaGrid,
    #[serde(default)]
    pub non_monotone: bool,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct GapCampaign {
    pub config: GapSimConfig,
    pub rows: Vec<GapMcRow>,
    /// True when some empirical estimate exceeded bound + 3·stderr.
    pub violations: bool,
}

pub const GAPSIM_COLUMNS: &[&str] =
    &["delta", "p_gamma_emp", "p_lambda_emp", "stderr", "bound", "trials"];

pub fn run_gap_campaign(cfg: &GapSimConfig) -> Result<GapCampaign, HarnessError> {
    let mut bad = Vec::new();
    if cfg.n == 0 {
        bad.push("n must be positive".into());
    }
    if cfg.width == 0 || cfg.width > 63 {
        bad.push("width must lie in 1..=63".into());
    }
    if cfg.delta_grid.values().is_empty() {
        bad.push("delta grid is empty".into());
    }
    if !bad.is_empty() {
        return Err(HarnessError::Validation(bad));
    }
    let rho = parse_rho(&cfg.rho)?;
    let family = knapsack_family(cfg.n, cfg.width, &rho, cfg.master_seed)?;
    let coeffs = match family.kind() {
        crate::dist::FamilyKind::CoefficientProduct { coeffs, .. } => coeffs.clone(),
        _ => unreachable!("knapsack families are coefficient products"),
    };
    let mc = GapMcConfig {
        structure: cfg.structure.build(cfg.n)?,
        n: cfg.n,
        width: cfg.width,
        coeffs,
        phi: family.phi().clone(),
        threshold: cfg
            .threshold
            .map(i128::from)
            .unwrap_or(default_threshold(cfg.n, cfg.width) as i128),
        deltas: cfg.delta_grid.values(),
        trials: cfg.trials,
        master_seed: cfg.master_seed,
        ranking: if cfg.non_monotone {
            Ranking::ReverseLexicographic
        } else {
            Ranking::Lexicographic
        },
    };
    let rows = with_pool(cfg.threads, || gap_tail_mc(&mc))?;
    let violations = rows.iter().any(|r| {
        r.p_gamma > r.bound + 3.0 * r.stderr || r.p_lambda > r.bound + 3.0 * r.stderr
    });
    Ok(GapCampaign { config: cfg.clone(), rows, violations })
}

impl GapCampaign {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.delta.to_string(),
                    format!("{}", r.p_gamma),
                    format!("{}", r.p_lambda),
                    format!("{}", r.stderr),
                    format!("{}", r.bound),
                    r.trials.to_string(),
                ]
            })
            .collect()
    }
}

// ---------------------------------------------------------------------
// colorsim
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseGraphSpec {
    Empty,
    Complete,
    /// G(n, 1/2) drawn from the adversary seed stream.
    Random,
}

impl BaseGraphSpec {
    pub fn parse_cli(text: &str) -> Result<Self, HarnessError> {
        match text {
            "empty" => Ok(BaseGraphSpec::Empty),
            "complete" => Ok(BaseGraphSpec::Complete),
            "random" => Ok(BaseGraphSpec::Random),
            other => Err(HarnessError::Validation(vec![format!(
                "unknown base graph {other:?}; expected empty, complete, or random"
            )])),
        }
    }

    pub fn build(&self, n: usize, master_seed: u64) -> Graph {
        match self {
            BaseGraphSpec::Empty => Graph::empty(n),
            BaseGraphSpec::Complete => Graph::complete(n),
            BaseGraphSpec::Random => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(master_seed ^ ADVERSARY_STREAM, 1));
                let mut g = Graph::empty(n);
                for u in 0..n {
                    for v in u + 1..n {
                        g.set_edge(u, v, rng.next_u64() < (1 << 63));
                    }
                }
                g
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColorSimConfig {
    pub n: usize,
    pub k: usize,
    /// φ = 2^-phi_exp; exactly one of `phi_exp` and `eps` must be set.
    #[serde(default)]
    pub phi_exp: Option<u32>,
    #[serde(default)]
    pub eps: Option<f64>,
    pub base: BaseGraphSpec,
    #[serde(default)]
    pub add_only: bool,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorRecord {
    pub trial: u64,
    pub seed: u64,
    pub clique_found: bool,
    pub answer: bool,
    pub steps: BigUint,
}

#[derive(Debug, Clone)]
pub struct ColorCampaign {
    pub config: ColorSimConfig,
    pub model: PerturbedGraphModel,
    pub records: Vec<ColorRecord>,
}

pub const COLORSIM_COLUMNS: &[&str] = &["trial", "seed", "clique_found", "answer", "steps"];

pub fn run_color_campaign(cfg: &ColorSimConfig) -> Result<ColorCampaign, HarnessError> {
    let mut bad = Vec::new();
    if cfg.n < 2 {
        bad.push("n must be at least 2".into());
    }
    if cfg.k == 0 {
        bad.push("k must be positive".into());
    }
    if cfg.phi_exp.is_some() == cfg.eps.is_some() {
        bad.push("exactly one of phi_exp and eps must be given".into());
    }
    if let Some(e) = cfg.eps {
        if !(0.0..=0.5).contains(&e) {
            bad.push(format!("eps must lie in [0, 1/2], got {e}"));
        }
    }
    if !bad.is_empty() {
        return Err(HarnessError::Validation(bad));
    }
    let base = cfg.base.build(cfg.n, cfg.master_seed);
    let kind = if cfg.add_only { PerturbKind::AddOnly } else { PerturbKind::Flip };
    let model = match cfg.phi_exp {
        Some(e) => PerturbedGraphModel::from_phi(base, Phi::pow2_neg(e), kind),
        None => PerturbedGraphModel::from_eps(base, cfg.eps.unwrap(), kind)?,
    };

    let records = run_indexed(cfg.trials, cfg.threads, |trial| {
        let seed = derive_seed(cfg.master_seed, trial);
        let g = model.perturb(seed);
        let d = color_decide(&g, cfg.k);
        ColorRecord {
            trial,
            seed,
            clique_found: d.clique_found,
            answer: d.colorable,
            steps: d.steps,
        }
    });
    Ok(ColorCampaign { config: cfg.clone(), model, records })
}

impl ColorCampaign {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    r.trial.to_string(),
                    r.seed.to_string(),
                    yesno(r.clique_found),
                    yesno(r.answer),
                    r.steps.to_string(),
                ]
            })
            .collect()
    }

    /// Fraction of trials that fell through to exhaustive search.
    pub fn exhaustive_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| !r.clique_found).count() as f64
            / self.records.len() as f64
    }

    pub fn noclique_bound(&self) -> f64 {
        noclique_bound(self.config.n, self.config.k, self.model.eps_f64())
    }

    pub fn summary(&self) -> serde_json::Value {
        if self.records.is_empty() {
            return serde_json::json!({"trials": 0, "note": "no data"});
        }
        serde_json::json!({
            "trials": self.records.len(),
            "eps": self.model.eps_f64(),
            "exhaustive_fraction": self.exhaustive_fraction(),
            "noclique_bound": self.noclique_bound(),
            "colorable_fraction": self.records.iter().filter(|r| r.answer).count() as f64
                / self.records.len() as f64,
        })
    }
}

// ---------------------------------------------------------------------
// scheme-sim
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum SchemeInner {
    Solve {
        n: usize,
        width: u32,
        rho: String,
        structure: StructureSpec,
        #[serde(default)]
        threshold: Option<u64>,
    },
    Color {
        n: usize,
        k: usize,
        phi_exp: u32,
        base: BaseGraphSpec,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeSimConfig {
    pub inner: SchemeInner,
    /// ε = 1 / eps_denom in the budget exponent.
    pub eps_denom: u32,
    /// Failure budgets, e.g. ["1/2", "1/4", "1/8"].
    pub deltas: Vec<String>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: usize,
    /// Cross-check scheme_to_algorithm(make_scheme(A)) against A on every
    /// trial of the first delta.
    #[serde(default)]
    pub roundtrip: bool,
}

#[derive(Debug, Clone)]
pub struct SchemeSimRow {
    pub delta: BigRational,
    pub bottom_rate: f64,
    pub stderr: f64,
    pub budget: BigUint,
}

#[derive(Debug, Clone)]
pub struct SchemeSimCampaign {
    pub config: SchemeSimConfig,
    pub rows: Vec<SchemeSimRow>,
    /// Every non-⊥ outcome agreed with the unbudgeted run.
    pub errorless_ok: bool,
    /// Doubling recovered the unbudgeted answer on every checked trial.
    pub roundtrip_ok: bool,
}

pub const SCHEME_COLUMNS: &[&str] = &["delta", "bottom_rate", "stderr", "budget"];

pub fn run_scheme_campaign(cfg: &SchemeSimConfig) -> Result<SchemeSimCampaign, HarnessError> {
    let mut bad = Vec::new();
    if cfg.eps_denom == 0 {
        bad.push("eps_denom must be at least 1".into());
    }
    let deltas: Vec<BigRational> = cfg
        .deltas
        .iter()
        .filter_map(|d| parse_ratio(d))
        .collect();
    if deltas.len() != cfg.deltas.len() || deltas.is_empty() {
        bad.push(format!("bad delta list {:?}", cfg.deltas));
    }
    if deltas
        .iter()
        .any(|d| d <= &BigRational::zero() || d >= &BigRational::one())
    {
        bad.push("deltas must lie strictly between 0 and 1".into());
    }
    if !bad.is_empty() {
        return Err(HarnessError::Validation(bad));
    }

    match &cfg.inner {
        SchemeInner::Solve { n, width, rho, structure, threshold } => {
            let rho = parse_rho(rho)?;
            let family = knapsack_family(*n, *width, &rho, cfg.master_seed)?;
            let built = structure.build(*n)?;
            let t = threshold.unwrap_or_else(|| default_threshold(*n, *width));
            let alg = AdaptiveSolveAlgorithm::default();
            let scheme = ErrorlessScheme::new(
                AdaptiveSolveAlgorithm::default(),
                cfg.eps_denom,
                *n,
                &family.universe_size(),
                family.phi(),
            )?;
            let make_input = |seed: u64| {
                BinDecisionInstance::new(
                    *n,
                    *width,
                    built.clone(),
                    sampled_weights(&family, *n, *width, seed),
                    t,
                )
                .expect("sampled weights fit the declared width")
            };
            scheme_rows(cfg, &deltas, &alg, &scheme, make_input)
        }
        SchemeInner::Color { n, k, phi_exp, base } => {
            let model = PerturbedGraphModel::from_phi(
                base.build(*n, cfg.master_seed),
                Phi::pow2_neg(*phi_exp),
                PerturbKind::Flip,
            );
            let alg = ColorDecideAlgorithm { k: *k };
            let scheme = ErrorlessScheme::new(
                ColorDecideAlgorithm { k: *k },
                cfg.eps_denom,
                *n,
                &(BigUint::one() << crate::graphs::pair_count(*n)),
                &model.phi,
            )?;
            let make_input = |seed: u64| model.perturb(seed);
            scheme_rows(cfg, &deltas, &alg, &scheme, make_input)
        }
    }
}

fn scheme_rows<I: Send + Sync, A: CountingAlgorithm<I> + Sync>(
    cfg: &SchemeSimConfig,
    deltas: &[BigRational],
    alg: &A,
    scheme: &ErrorlessScheme<A>,
    make_input: impl Fn(u64) -> I + Sync,
) -> Result<SchemeSimCampaign, HarnessError> {
    let mut rows = Vec::new();
    let mut errorless_ok = true;
    let mut roundtrip_ok = true;
    for (di, delta) in deltas.iter().enumerate() {
        let budget = scheme.budget(delta)?;
        let outcomes: Vec<(bool, bool, bool)> = run_indexed(cfg.trials, cfg.threads, |trial| {
            let input = make_input(derive_seed(cfg.master_seed, trial));
            let direct = alg.decide(&input);
            let out = scheme.run(&input, delta).expect("deltas were validated");
            let agreed = out.answer().is_none_or(|a| a == direct.accept);
            let round = if cfg.roundtrip && di == 0 {
                scheme_to_algorithm(scheme, &input)
                    .map(|d| d.accept == direct.accept)
                    .unwrap_or(false)
            } else {
                true
            };
            (out.is_bottom(), agreed, round)
        });
        let bottoms = outcomes.iter().filter(|(b, _, _)| *b).count();
        errorless_ok &= outcomes.iter().all(|(_, a, _)| *a);
        roundtrip_ok &= outcomes.iter().all(|(_, _, r)| *r);
        let p = if cfg.trials == 0 { 0.0 } else { bottoms as f64 / cfg.trials as f64 };
        let stderr = if cfg.trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / cfg.trials as f64).sqrt()
        };
        rows.push(SchemeSimRow { delta: delta.clone(), bottom_rate: p, stderr, budget });
    }
    Ok(SchemeSimCampaign { config: cfg.clone(), rows, errorless_ok, roundtrip_ok })
}

impl SchemeSimCampaign {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    crate::num_util::ratio_to_string(&r.delta),
                    format!("{}", r.bottom_rate),
                    format!("{}", r.stderr),
                    r.budget.to_string(),
                ]
            })
            .collect()
    }

    /// True when every bottom rate is within δ + 3·stderr.
    pub fn rates_within_budget(&self) -> bool {
        self.rows.iter().all(|r| {
            let delta = crate::num_util::ratio_to_f64(&r.delta);
            r.bottom_rate <= delta + 3.0 * r.stderr + 1e-12
        })
    }
}

// ---------------------------------------------------------------------
// tailcheck
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCheckConfig {
    #[serde(flatten)]
    pub solve: SolveConfig,
    /// Exponent ε in E[t^ε] and the tail bound.
    pub epsilon: f64,
    /// p(n) = n^poly_exp in the tail bound.
    pub poly_exp: u32,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_grid_points() -> usize {
    16
}

#[derive(Debug, Clone)]
pub struct TailCheckCampaign {
    pub config: TailCheckConfig,
    pub solve: SolveCampaign,
    pub moment: Option<super::estimators::MomentEstimate>,
    pub rows: Vec<super::estimators::TailCurveRow>,
    pub markov_ok: bool,
    /// Empirical tail below the bound column at every grid point.
    pub tail_ok: bool,
}

pub const TAILCHECK_COLUMNS: &[&str] = &["threshold", "p_emp", "bound"];

pub fn run_tailcheck_campaign(cfg: &TailCheckConfig) -> Result<TailCheckCampaign, HarnessError> {
    if cfg.epsilon <= 0.0 {
        return Err(HarnessError::Validation(vec![
            "epsilon must be positive".into(),
        ]));
    }
    let solve = run_solve_campaign(&cfg.solve)?;
    let steps = solve.steps();
    let n = cfg.solve.n as f64;
    let n_phi = solve.moment_bound() / n; // N·φ
    let poly_scale = n.powi(cfg.poly_exp as i32) * n_phi;
    let moment = super::estimators::moment_estimate(&steps, cfg.epsilon, solve.moment_bound());
    let rows = super::estimators::tail_curve(&steps, cfg.epsilon, poly_scale, cfg.grid_points);
    let markov_ok = super::estimators::markov_consistent(&steps, cfg.epsilon);
    let tail_ok = rows.iter().all(|r| r.p_emp <= r.bound + 1e-12);
    Ok(TailCheckCampaign { config: cfg.clone(), solve, moment, rows, markov_ok, tail_ok })
}

impl TailCheckCampaign {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.threshold.to_string(),
                    format!("{}", r.p_emp),
                    format!("{}", r.bound),
                ]
            })
            .collect()
    }

    pub fn summary(&self) -> serde_json::Value {
        let m = self.moment.as_ref();
        serde_json::json!({
            "trials": self.solve.records.len(),
            "epsilon": self.config.epsilon,
            "poly_exp": self.config.poly_exp,
            "mean_pow": m.map(|m| m.mean_pow),
            "moment_bound": m.map(|m| m.bound),
            "moment_ratio": m.map(|m| m.ratio),
            "markov_ok": self.markov_ok,
            "tail_ok": self.tail_ok,
        })
    }
}

// ---------------------------------------------------------------------
// codec-check
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodecCheckConfig {
    pub family: FamilySpec,
    /// Exhaustive support scan; otherwise 256 sampled points.
    #[serde(default)]
    pub exhaustive: bool,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CodecCheckReport {
    pub injective: bool,
    pub lengths_ok: bool,
    pub worst_case: serde_json::Value,
    pub checked: u64,
    pub decode_ok: bool,
}

pub fn run_codec_check(cfg: &CodecCheckConfig) -> Result<CodecCheckReport, HarnessError> {
    let family = cfg
        .family
        .build()
        .map_err(|e| HarnessError::Validation(vec![format!("bad family: {e}")]))?;
    if cfg.exhaustive {
        let inj = codec::verify_injective(&family)?;
        let len = codec::verify_lengths(&family)?;
        let mut decode_ok = true;
        for y in family.support_iter()? {
            let code = codec::compress(&family, &y)?;
            if codec::decode(&family, &code).ok() != Some(y) {
                decode_ok = false;
                break;
            }
        }
        Ok(CodecCheckReport {
            injective: inj.ok(),
            lengths_ok: len.ok(),
            worst_case: serde_json::json!({
                "max_code_len": len.max_code_len,
                "point": len.longest_point.map(|p| p.to_string()),
            }),
            checked: inj.checked,
            decode_ok,
        })
    } else {
        // Sampled mode for large supports: distinctness, code shape, and
        // round-trips on 256 seeded draws.
        let mut seen = std::collections::HashMap::new();
        let mut injective = true;
        let mut lengths_ok = true;
        let mut decode_ok = true;
        let mut max_len = 0usize;
        let mut worst_point = None;
        let mut checked = 0u64;
        for i in 0..256u64 {
            let y = family.sample(derive_seed(cfg.master_seed, i));
            let code = codec::compress(&family, &y)?;
            checked += 1;
            if code.len() > max_len {
                max_len = code.len();
                worst_point = Some(y.to_string());
            }
            lengths_ok &= codec::code_shape_ok(&family, &y, &code)?;
            if let Some(prev) = seen.insert(code.bits.bits().to_vec(), y.clone()) {
                injective &= prev == y;
            }
            decode_ok &= codec::decode(&family, &code).ok() == Some(y);
        }
        Ok(CodecCheckReport {
            injective,
            lengths_ok,
            worst_case: serde_json::json!({
                "max_code_len": max_len,
                "point": worst_point,
            }),
            checked,
            decode_ok,
        })
    }
}
