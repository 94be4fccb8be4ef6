//! Edge-flip perturbation of adversarial graphs and clique-gated k-coloring.
//!
//! A graph on `n` vertices is an adjacency bit string over the n(n−1)/2
//! vertex pairs.  The perturbation flips each (non-)edge independently with
//! probability ε, tied to φ by `(1−ε)^C(n,2) = φ` (up to the dyadic grid):
//! φ = 1 is the unperturbed worst case, φ = 2^-C(n,2) is the fully random
//! graph with edge probability 1/2.  An add-only variant inserts random
//! edges and removes none.
//!
//! The coloring decision runs a cheap gate first: a clique on k+1 vertices
//! rules out k-colorability outright.  Only when no such clique exists does
//! it fall back to exhaustive backtracking search, and under the flip model
//! that fallback is exponentially unlikely for constant ε.  The answer is
//! exact either way — perturbation only ever buys running time, never
//! correctness.

use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::bits::BitString;
use crate::dist::{flip_probability_bits, DistError, PerturbationFamily, Phi};
use crate::num_util::{ceil_to_biguint, ratio_pow, StepCounter};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GraphError {
    #[error("adjacency string has {got} bits, a graph on {n} vertices needs {want}")]
    AdjacencyLength { n: usize, got: usize, want: usize },
    #[error("flip probability must lie in [0, 1/2], got {0}")]
    EpsOutOfRange(f64),
    #[error("the add-only model is not a flip family")]
    NotAFlipFamily,
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Undirected simple graph as a packed upper-triangle adjacency vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, adj: vec![false; pair_count(n)] }
    }

    pub fn complete(n: usize) -> Self {
        Graph { n, adj: vec![true; pair_count(n)] }
    }

    pub fn from_bits(n: usize, bits: &BitString) -> Result<Self, GraphError> {
        let want = pair_count(n);
        if bits.len() != want {
            return Err(GraphError::AdjacencyLength { n, got: bits.len(), want });
        }
        Ok(Graph { n, adj: bits.bits().to_vec() })
    }

    pub fn to_bits(&self) -> BitString {
        BitString::from_bits(self.adj.clone())
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    fn pair_index(&self, u: usize, v: usize) -> usize {
        debug_assert!(u < v && v < self.n);
        u * (2 * self.n - u - 1) / 2 + (v - u - 1)
    }

    pub fn edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.adj[self.pair_index(a, b)]
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let i = self.pair_index(a, b);
        self.adj[i] = present;
    }

    pub fn degree(&self, u: usize) -> usize {
        (0..self.n).filter(|&v| v != u && self.edge(u, v)).count()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbKind {
    /// Each (non-)edge flips independently with probability ε.
    Flip,
    /// Missing edges appear with probability ε; present edges stay.
    AddOnly,
}

/// An adversarial base graph plus the flip probability derived from φ.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedGraphModel {
    pub base: Graph,
    pub phi: Phi,
    /// ε as a numerator over 2^64, clamped to [0, 2^63].
    pub eps_bits: u64,
    pub kind: PerturbKind,
}

impl PerturbedGraphModel {
    /// ε = 1 − 2^(log2 φ / C(n,2)), rounded to the 64-bit dyadic grid and
    /// clamped to [0, 1/2].
    pub fn from_phi(base: Graph, phi: Phi, kind: PerturbKind) -> Self {
        let eps_bits = flip_probability_bits(&phi, pair_count(base.n) as u64);
        PerturbedGraphModel { base, phi, eps_bits, kind }
    }

    /// Model from an explicit flip probability; φ is recovered as the dyadic
    /// rounding (upward) of (1−ε)^C(n,2).
    pub fn from_eps(base: Graph, eps: f64, kind: PerturbKind) -> Result<Self, GraphError> {
        if !(0.0..=0.5).contains(&eps) || eps.is_nan() {
            return Err(GraphError::EpsOutOfRange(eps));
        }
        let eps_bits = ((eps * 18446744073709551616.0).round() as u128).min(1 << 63) as u64;
        let m = pair_count(base.n) as u32;
        let keep = BigRational::new(
            ((1u128 << 64) - eps_bits as u128).into(),
            (1u128 << 64).into(),
        );
        let exact = ratio_pow(&keep, m);
        let exp = Phi::default_exponent_bound(base.n);
        let num = ceil_to_biguint(&(exact * crate::num_util::pow2_ratio(exp as i64)));
        let phi = Phi::from_parts(num, exp).expect("eps <= 1/2 keeps phi in range");
        Ok(PerturbedGraphModel { base, phi, eps_bits, kind })
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps_bits as f64 / 18446744073709551616.0
    }

    /// The flip model as a φ-bounded distribution family over adjacency
    /// strings.  The add-only model has no such representation.
    pub fn family(&self) -> Result<PerturbationFamily, GraphError> {
        match self.kind {
            PerturbKind::Flip => Ok(PerturbationFamily::graph_flip(
                self.base.n,
                self.phi.clone(),
                self.base.to_bits(),
                self.eps_bits,
            )?),
            PerturbKind::AddOnly => Err(GraphError::NotAFlipFamily),
        }
    }

    /// Deterministic per-edge perturbation: one 64-bit draw per vertex pair,
    /// compared exactly against the dyadic ε.
    pub fn perturb(&self, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adj = self.base.adj.clone();
        for bit in adj.iter_mut() {
            let flip = rng.next_u64() < self.eps_bits;
            match self.kind {
                PerturbKind::Flip => *bit ^= flip,
                PerturbKind::AddOnly => *bit |= flip,
            }
        }
        Graph { n: self.base.n, adj }
    }
}

/// First clique of the given size in lexicographic subset order, if any.
/// Each subset test costs one step.
pub fn find_clique(g: &Graph, size: usize, steps: &mut StepCounter) -> Option<Vec<usize>> {
    if size == 0 {
        return Some(Vec::new());
    }
    if size > g.n {
        return None;
    }
    let mut subset: Vec<usize> = (0..size).collect();
    loop {
        steps.bump(1);
        if is_clique(g, &subset) {
            return Some(subset);
        }
        // Next lexicographic size-subset of {0, …, n−1}.
        let mut i = size;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if subset[i] < g.n - (size - i) {
                subset[i] += 1;
                for j in i + 1..size {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn is_clique(g: &Graph, vertices: &[usize]) -> bool {
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            if !g.edge(u, v) {
                return false;
            }
        }
    }
    true
}

/// Independent clique checker used as an oracle in tests: recursive
/// candidate-set intersection over adjacency bit masks.
pub fn clique_exists_bitset(g: &Graph, size: usize) -> bool {
    assert!(g.n <= 64);
    let masks: Vec<u64> = (0..g.n)
        .map(|u| {
            (0..g.n)
                .filter(|&v| v != u && g.edge(u, v))
                .fold(0u64, |m, v| m | (1 << v))
        })
        .collect();
    fn extend(masks: &[u64], candidates: u64, need: usize, min_vertex: usize) -> bool {
        if need == 0 {
            return true;
        }
        for v in min_vertex..masks.len() {
            if (candidates >> v) & 1 == 1 && extend(masks, candidates & masks[v], need - 1, v + 1) {
                return true;
            }
        }
        false
    }
    extend(&masks, u64::MAX >> (64 - g.n), size, 0)
}

/// Outcome of the gated coloring decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorDecision {
    pub colorable: bool,
    /// True when the clique gate settled the answer; false means exhaustive
    /// search ran.
    pub clique_found: bool,
    pub steps: num_bigint::BigUint,
}

/// Decides k-colorability: a (k+1)-clique forces a "no" immediately;
/// otherwise exhaustive backtracking over color assignments, visiting
/// vertices by decreasing degree.  Steps count subset tests plus backtracking
/// node expansions, so runs are comparable across machines.
pub fn color_decide(g: &Graph, k: usize) -> ColorDecision {
    let mut steps = StepCounter::new();
    if k >= 1 && find_clique(g, k + 1, &mut steps).is_some() {
        return ColorDecision { colorable: false, clique_found: true, steps: steps.to_biguint() };
    }
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(g.degree(u)));
    let mut colors = vec![usize::MAX; g.n];
    let colorable = backtrack_color(g, k, &order, 0, &mut colors, &mut steps);
    ColorDecision { colorable, clique_found: false, steps: steps.to_biguint() }
}

fn backtrack_color(
    g: &Graph,
    k: usize,
    order: &[usize],
    pos: usize,
    colors: &mut [usize],
    steps: &mut StepCounter,
) -> bool {
    if pos == order.len() {
        return true;
    }
    let u = order[pos];
    'colors: for c in 0..k {
        steps.bump(1); // node expansion
        for &v in &order[..pos] {
            if colors[v] == c && g.edge(u, v) {
                continue 'colors;
            }
        }
        colors[u] = c;
        if backtrack_color(g, k, order, pos + 1, colors, steps) {
            return true;
        }
        colors[u] = usize::MAX;
    }
    false
}

/// Plain brute-force k-colorability: natural vertex order, no clique gate,
/// no degree ordering.  The oracle the gated decision is measured against.
pub fn chromatic_oracle_colorable(g: &Graph, k: usize) -> bool {
    fn assign(g: &Graph, k: usize, v: usize, colors: &mut [usize]) -> bool {
        if v == g.vertices() {
            return true;
        }
        for c in 0..k {
            if (0..v).all(|u| colors[u] != c || !g.edge(u, v)) {
                colors[v] = c;
                if assign(g, k, v + 1, colors) {
                    return true;
                }
            }
        }
        false
    }
    if g.vertices() == 0 {
        return true;
    }
    if k == 0 {
        return false;
    }
    let mut colors = vec![usize::MAX; g.vertices()];
    assign(g, k, 0, &mut colors)
}

/// Upper bound on the probability that a perturbed graph contains no
/// (k+1)-clique: `(1 − ε^C(k+1,2))^(n/(k+1))`.
pub fn noclique_bound(n: usize, k: usize, eps: f64) -> f64 {
    let pairs = pair_count(k + 1) as i32;
    (1.0 - eps.powi(pairs)).powf(n as f64 / (k + 1) as f64)
}
