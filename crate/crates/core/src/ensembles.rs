//! Random instances: CSPs (exact and Poissonized clause counts), Gaussian
//! mixed spin glasses, and the coupled constructions built from independent
//! hidden instances.
//!
//! All randomness flows from a [`SeedTree`]. A CSP draws its clause count from
//! child `0` and its clauses from child `1`, so an exact and a Poisson
//! instance with the same seed share a common prefix of clauses. Hidden
//! instances of a coupled model live at child `i'`, tree nodes at
//! `(depth, index)`, and spin-glass disorder of degree `p` at child `p`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::hamiltonian::{check_assignment, Hamiltonian, PolynomialBuilder, SpinPolynomial};
use crate::predicates::{MixturePolynomial, PredicateDistribution};
use crate::rng::{SeedTree, StreamRng};

/// Default cap on materialized disorder entries (`2^25` doubles, 256 MiB).
pub const DISORDER_BUDGET: usize = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// Exactly `round(αn)` clauses.
    Exact,
    /// `Pois(αn)` clauses.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspModel {
    pub distribution: PredicateDistribution,
    pub alpha: f64,
    pub n: usize,
    pub count_mode: CountMode,
}

impl CspModel {
    pub fn new(
        distribution: PredicateDistribution,
        alpha: f64,
        n: usize,
        count_mode: CountMode,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return param(format!("clause density must be positive, got {alpha}"));
        }
        if n == 0 {
            return param("n must be positive");
        }
        if n > u32::MAX as usize {
            return param("n does not fit in 32-bit variable indices");
        }
        if count_mode == CountMode::Exact && alpha * n as f64 + 1e-12 < 1.0 {
            return param(format!("exact mode needs αn >= 1, got {}", alpha * n as f64));
        }
        Ok(Self {
            distribution,
            alpha,
            n,
            count_mode,
        })
    }

    pub fn expected_clauses(&self) -> f64 {
        self.alpha * self.n as f64
    }

    pub fn with_mode(&self, count_mode: CountMode) -> Result<Self> {
        Self::new(self.distribution.clone(), self.alpha, self.n, count_mode)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    /// Position in the model's predicate distribution.
    pub predicate: usize,
    pub indices: Vec<u32>,
    pub signs: Vec<i8>,
    pub multiplicity: u32,
}

/// A run of clauses that came from one hidden instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub source: usize,
    pub clauses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspInstance {
    /// The energy is normalized by `model.alpha`.
    pub model: CspModel,
    pub clauses: Vec<Clause>,
    /// Consecutive clause runs and the hidden instance each came from.
    pub blocks: Vec<Block>,
    pub seed: SeedTree,
}

fn clause_count(model: &CspModel, seed: &SeedTree) -> usize {
    let mean = model.expected_clauses();
    match model.count_mode {
        CountMode::Exact => mean.round() as usize,
        CountMode::Poisson => poisson(mean, &mut seed.child(0).rng()),
    }
}

fn poisson(mean: f64, rng: &mut StreamRng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

fn draw_clauses(model: &CspModel, count: usize, rng: &mut StreamRng) -> Vec<Clause> {
    let k = model.distribution.arity();
    (0..count)
        .map(|_| {
            let predicate = model.distribution.select(rng.random::<f64>());
            let indices = (0..k).map(|_| rng.random_range(0..model.n as u32)).collect();
            let signs = (0..k).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            Clause {
                predicate,
                indices,
                signs,
                multiplicity: 1,
            }
        })
        .collect()
}

pub fn sample_csp(model: &CspModel, seed: SeedTree) -> CspInstance {
    let count = clause_count(model, &seed);
    let clauses = draw_clauses(model, count, &mut seed.child(1).rng());
    CspInstance {
        model: model.clone(),
        blocks: vec![Block {
            source: 0,
            clauses: count,
        }],
        clauses,
        seed,
    }
}

impl CspInstance {
    pub fn n(&self) -> usize {
        self.model.n
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.clauses.iter().map(|c| c.multiplicity as u64).sum()
    }

    /// Sum of clause values without the `1/α` normalization.
    pub fn satisfied_weight(&self, sigma: &[i8]) -> Result<f64> {
        check_assignment(sigma, self.model.n)?;
        let entries = self.model.distribution.entries();
        Ok(self
            .clauses
            .iter()
            .map(|c| {
                let literals = c
                    .indices
                    .iter()
                    .zip(&c.signs)
                    .map(|(&i, &e)| sigma[i as usize] * e);
                c.multiplicity as f64 * entries[c.predicate].0.eval_signed(literals)
            })
            .sum())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `H(σ) = (1/α) Σ_e f_e(σ_e)`.
pub fn csp_energy(instance: &CspInstance, sigma: &[i8]) -> Result<f64> {
    Ok(instance.satisfied_weight(sigma)? / instance.model.alpha)
}

impl Hamiltonian for CspInstance {
    fn n(&self) -> usize {
        self.model.n
    }

    fn energy(&self, sigma: &[i8]) -> Result<f64> {
        csp_energy(self, sigma)
    }

    fn polynomial(&self) -> SpinPolynomial {
        let spectra: Vec<Vec<(Vec<usize>, f64)>> = self
            .model
            .distribution
            .entries()
            .iter()
            .map(|(p, _)| p.spectrum().iter().filter(|(_, c)| *c != 0.0).collect())
            .collect();
        let mut builder = PolynomialBuilder::new(self.model.n);
        let scale = 1.0 / self.model.alpha;
        let mut vars = Vec::new();
        for clause in &self.clauses {
            let weight = scale * clause.multiplicity as f64;
            for (subset, coef) in &spectra[clause.predicate] {
                vars.clear();
                let mut sign = 1i32;
                for &j in subset {
                    vars.push(clause.indices[j]);
                    sign *= clause.signs[j] as i32;
                }
                builder.add(&vars, weight * coef * sign as f64);
            }
        }
        builder.build()
    }
}

/// A Gaussian mixed `p`-spin Hamiltonian with materialized disorder.
///
/// Serializes as a seed-replay record; the disorder is regenerated on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SpinGlassRecord", try_from = "SpinGlassRecord")]
pub struct SpinGlassInstance {
    mixture: MixturePolynomial,
    n: usize,
    scale: f64,
    seed: SeedTree,
    /// `(p, J^{(p)})` in row-major order, one array per active degree.
    disorder: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassRecord {
    pub mixture: MixturePolynomial,
    pub n: usize,
    /// Multiplies every disorder entry.
    pub scale: f64,
    pub seed: SeedTree,
}

impl From<SpinGlassInstance> for SpinGlassRecord {
    fn from(g: SpinGlassInstance) -> Self {
        Self {
            mixture: g.mixture,
            n: g.n,
            scale: g.scale,
            seed: g.seed,
        }
    }
}

impl TryFrom<SpinGlassRecord> for SpinGlassInstance {
    type Error = Error;

    fn try_from(r: SpinGlassRecord) -> Result<Self> {
        sample_scaled_spin_glass(&r.mixture, r.n, r.scale, r.seed, DISORDER_BUDGET)
    }
}

fn disorder_entries(mixture: &MixturePolynomial, n: usize, budget: usize) -> Result<usize> {
    let mut total = 0usize;
    for (p, _) in mixture.active_degrees() {
        let size = u32::try_from(p)
            .ok()
            .and_then(|p| n.checked_pow(p))
            .and_then(|s| total.checked_add(s));
        match size {
            Some(t) if t <= budget => total = t,
            _ => {
                return Err(Error::Resource(format!(
                    "disorder for n = {n} and degree {p} exceeds the budget of {budget} entries"
                )))
            }
        }
    }
    Ok(total)
}

pub fn sample_spin_glass(mixture: &MixturePolynomial, n: usize, seed: SeedTree) -> Result<SpinGlassInstance> {
    sample_scaled_spin_glass(mixture, n, 1.0, seed, DISORDER_BUDGET)
}

/// Spin glass whose disorder is multiplied by `scale`, so its covariance is
/// `scale² · n · ξ(R)`.
pub fn sample_scaled_spin_glass(
    mixture: &MixturePolynomial,
    n: usize,
    scale: f64,
    seed: SeedTree,
    budget: usize,
) -> Result<SpinGlassInstance> {
    if n == 0 {
        return param("n must be positive");
    }
    if !(scale >= 0.0 && scale.is_finite()) {
        return param(format!("scale must be nonnegative, got {scale}"));
    }
    disorder_entries(mixture, n, budget)?;
    let disorder = mixture
        .active_degrees()
        .map(|(p, _)| {
            let mut rng = seed.child(p as u64).rng();
            let len = n.pow(p as u32);
            let data = (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            (p, data)
        })
        .collect();
    Ok(SpinGlassInstance {
        mixture: mixture.clone(),
        n,
        scale,
        seed,
        disorder,
    })
}

/// `⟨J, σ^{⊗p}⟩` by contracting the last axis `p` times.
fn contract(data: &[f64], p: usize, sigma: &[f64]) -> f64 {
    let n = sigma.len();
    let dot = |row: &[f64]| row.iter().zip(sigma).map(|(a, b)| a * b).sum::<f64>();
    let mut current: Vec<f64> = data.chunks_exact(n).map(dot).collect();
    for _ in 1..p {
        current = current.chunks_exact(n).map(dot).collect();
    }
    current[0]
}

impl SpinGlassInstance {
    pub fn mixture(&self) -> &MixturePolynomial {
        &self.mixture
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seed(&self) -> SeedTree {
        self.seed
    }

    /// `(p, J^{(p)})` pairs in increasing degree.
    pub fn disorder(&self) -> &[(usize, Vec<f64>)] {
        &self.disorder
    }

    pub fn record(&self) -> SpinGlassRecord {
        self.clone().into()
    }

    fn weight(&self, p: usize) -> f64 {
        self.scale * self.mixture.coefficient(p).sqrt() * (self.n as f64).powf(-((p - 1) as f64) / 2.0)
    }
}

/// `H(σ) = Σ_p c_p n^{-(p-1)/2} ⟨J^{(p)}, σ^{⊗p}⟩`.
pub fn sg_energy(g: &SpinGlassInstance, sigma: &[i8]) -> Result<f64> {
    check_assignment(sigma, g.n)?;
    if g.scale == 0.0 {
        return Ok(0.0);
    }
    let s: Vec<f64> = sigma.iter().map(|&x| x as f64).collect();
    Ok(g
        .disorder
        .iter()
        .map(|(p, data)| g.weight(*p) * contract(data, *p, &s))
        .sum())
}

impl Hamiltonian for SpinGlassInstance {
    fn n(&self) -> usize {
        self.n
    }

    fn energy(&self, sigma: &[i8]) -> Result<f64> {
        sg_energy(self, sigma)
    }

    fn polynomial(&self) -> SpinPolynomial {
        let mut builder = PolynomialBuilder::new(self.n);
        for (p, data) in &self.disorder {
            let w = self.weight(*p);
            let mut idx = vec![0u32; *p];
            for &j in data {
                builder.add(&idx, w * j);
                for slot in idx.iter_mut().rev() {
                    *slot += 1;
                    if (*slot as usize) < self.n {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
        builder.build()
    }
}

/// Sum of independent spin-glass components on the same spins.
#[derive(Debug, Clone)]
pub struct SpinGlassSum {
    n: usize,
    parts: Vec<Arc<SpinGlassInstance>>,
}

impl SpinGlassSum {
    pub fn new(n: usize, parts: Vec<Arc<SpinGlassInstance>>) -> Result<Self> {
        if parts.iter().any(|p| p.n != n) {
            return param("components must share the number of spins");
        }
        Ok(Self { n, parts })
    }

    pub fn parts(&self) -> &[Arc<SpinGlassInstance>] {
        &self.parts
    }
}

impl Hamiltonian for SpinGlassSum {
    fn n(&self) -> usize {
        self.n
    }

    fn energy(&self, sigma: &[i8]) -> Result<f64> {
        check_assignment(sigma, self.n)?;
        self.parts.iter().map(|p| sg_energy(p, sigma)).sum()
    }

    fn polynomial(&self) -> SpinPolynomial {
        self.parts
            .iter()
            .fold(SpinPolynomial::zero(self.n), |acc, p| acc.plus(&p.polynomial()))
    }
}

/// The model a coupled construction is built on.
#[derive(Debug, Clone, PartialEq)]
pub enum Base {
    Csp(CspModel),
    SpinGlass { mixture: MixturePolynomial, n: usize },
}

impl Base {
    pub fn n(&self) -> usize {
        match self {
            Base::Csp(m) => m.n,
            Base::SpinGlass { n, .. } => *n,
        }
    }
}

/// An observed instance of a coupled model.
#[derive(Debug, Clone)]
pub enum Instance {
    Csp(CspInstance),
    SpinGlass(SpinGlassSum),
}

impl Hamiltonian for Instance {
    fn n(&self) -> usize {
        match self {
            Instance::Csp(c) => c.n(),
            Instance::SpinGlass(g) => g.n(),
        }
    }

    fn energy(&self, sigma: &[i8]) -> Result<f64> {
        match self {
            Instance::Csp(c) => c.energy(sigma),
            Instance::SpinGlass(g) => g.energy(sigma),
        }
    }

    fn polynomial(&self) -> SpinPolynomial {
        match self {
            Instance::Csp(c) => c.polynomial(),
            Instance::SpinGlass(g) => g.polynomial(),
        }
    }
}

impl Instance {
    pub fn as_csp(&self) -> Option<&CspInstance> {
        match self {
            Instance::Csp(c) => Some(c),
            Instance::SpinGlass(_) => None,
        }
    }
}

/// A hidden component at relative strength `b`: a Poisson CSP at density
/// `bα` or a spin glass with covariance `b · n · ξ(R)`.
enum Hidden {
    Csp(Vec<Clause>),
    SpinGlass(Option<Arc<SpinGlassInstance>>),
}

fn sample_hidden(base: &Base, strength: f64, seed: SeedTree) -> Result<Hidden> {
    match base {
        Base::Csp(model) => {
            let count = poisson(strength * model.expected_clauses(), &mut seed.child(0).rng());
            Ok(Hidden::Csp(draw_clauses(model, count, &mut seed.child(1).rng())))
        }
        Base::SpinGlass { mixture, n } => {
            if strength == 0.0 {
                return Ok(Hidden::SpinGlass(None));
            }
            let g = sample_scaled_spin_glass(mixture, *n, strength.sqrt(), seed, DISORDER_BUDGET)?;
            Ok(Hidden::SpinGlass(Some(Arc::new(g))))
        }
    }
}

/// Observed instance made of the hidden components listed in `members`.
fn assemble(base: &Base, hidden: &[Hidden], members: impl Iterator<Item = usize>, seed: SeedTree) -> Result<Instance> {
    match base {
        Base::Csp(model) => {
            let mut clauses = Vec::new();
            let mut blocks = Vec::new();
            for j in members {
                if let Hidden::Csp(c) = &hidden[j] {
                    clauses.extend_from_slice(c);
                    blocks.push(Block {
                        source: j,
                        clauses: c.len(),
                    });
                }
            }
            Ok(Instance::Csp(CspInstance {
                model: model.with_mode(CountMode::Poisson)?,
                clauses,
                blocks,
                seed,
            }))
        }
        Base::SpinGlass { n, .. } => {
            let parts = members
                .filter_map(|j| match &hidden[j] {
                    Hidden::SpinGlass(g) => g.clone(),
                    Hidden::Csp(_) => None,
                })
                .collect();
            Ok(Instance::SpinGlass(SpinGlassSum::new(*n, parts)?))
        }
    }
}

/// Coupling matrix `A ∈ {0,1}^{ℓ×ℓ'}` and strengths `b ≥ 0` with `(Ab)_i = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSpec {
    a: Vec<Vec<u8>>,
    b: Vec<f64>,
}

const COUPLING_TOL: f64 = 1e-9;

impl CoupledSpec {
    pub fn new(a: Vec<Vec<u8>>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Validation("coupling matrix and strengths must be nonempty".into()));
        }
        if let Some(x) = b.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Validation(format!("strengths must be nonnegative, got {x}")));
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != b.len() {
                return Err(Error::Validation(format!(
                    "row {i} of A has {} entries, expected {}",
                    row.len(),
                    b.len()
                )));
            }
            if row.iter().any(|&x| x > 1) {
                return Err(Error::Validation("entries of A must be 0 or 1".into()));
            }
            let total: f64 = row.iter().zip(&b).map(|(&x, y)| x as f64 * y).sum();
            if (total - 1.0).abs() > COUPLING_TOL {
                return Err(Error::Validation(format!("(Ab)_{i} = {total}, expected 1")));
            }
        }
        Ok(Self { a, b })
    }

    /// Shared block of strength `t` plus two private blocks of strength `1 - t`.
    pub fn t_correlated(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return param(format!("t must lie in [0, 1], got {t}"));
        }
        Self::new(vec![vec![1, 1, 0], vec![1, 0, 1]], vec![t, 1.0 - t, 1.0 - t])
    }

    pub fn observed(&self) -> usize {
        self.a.len()
    }

    pub fn hidden(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &[Vec<u8>] {
        &self.a
    }

    pub fn strengths(&self) -> &[f64] {
        &self.b
    }
}

pub fn sample_coupled(spec: &CoupledSpec, base: &Base, seed: SeedTree) -> Result<Vec<Instance>> {
    let hidden = spec
        .b
        .iter()
        .enumerate()
        .map(|(j, &b)| sample_hidden(base, b, seed.child(j as u64)))
        .collect::<Result<Vec<_>>>()?;
    spec.a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let members = row.iter().enumerate().filter(|(_, x)| **x == 1).map(|(j, _)| j);
            assemble(base, &hidden, members, seed.child(i as u64).child(u64::MAX))
        })
        .collect()
}

/// A `t`-correlated pair: a shared `Pois(αtn)` block plus two independent
/// `Pois((1-t)αn)` blocks.
pub fn t_correlated_pair(model: &CspModel, t: f64, seed: SeedTree) -> Result<(CspInstance, CspInstance)> {
    if model.count_mode != CountMode::Poisson {
        return Err(Error::Unsupported("t-correlated pairs need the Poisson count model".into()));
    }
    let spec = CoupledSpec::t_correlated(t)?;
    let mut pair = sample_coupled(&spec, &Base::Csp(model.clone()), seed)?.into_iter().map(|i| match i {
        Instance::Csp(c) => c,
        Instance::SpinGlass(_) => unreachable!("CSP base yields CSP instances"),
    });
    let first = pair.next().expect("two observed instances");
    let second = pair.next().expect("two observed instances");
    Ok((first, second))
}

/// Rooted tree with branching `k_1, …, k_D` and cumulative strengths
/// `0 = p_0 ≤ p_1 ≤ … ≤ p_D = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsembleSpec {
    branching: Vec<usize>,
    coupling: Vec<f64>,
}

impl TreeEnsembleSpec {
    pub fn new(branching: Vec<usize>, coupling: Vec<f64>) -> Result<Self> {
        if branching.is_empty() || branching.contains(&0) {
            return Err(Error::Validation("branching factors must be positive and nonempty".into()));
        }
        if coupling.len() != branching.len() + 1 {
            return Err(Error::Validation(format!(
                "coupling needs D + 1 = {} entries, got {}",
                branching.len() + 1,
                coupling.len()
            )));
        }
        if coupling[0] != 0.0 || *coupling.last().unwrap() != 1.0 {
            return Err(Error::Validation("coupling must start at 0 and end at 1".into()));
        }
        if coupling.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Validation("coupling must be nondecreasing".into()));
        }
        Ok(Self { branching, coupling })
    }

    pub fn depth(&self) -> usize {
        self.branching.len()
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn leaves(&self) -> usize {
        self.branching.iter().product()
    }

    /// Number of nodes at depth `d` (the root is depth 0).
    pub fn nodes_at(&self, d: usize) -> usize {
        self.branching[..d].iter().product()
    }

    /// Index among depth-`d` nodes of the ancestor of `leaf`.
    pub fn ancestor(&self, leaf: usize, d: usize) -> usize {
        leaf / self.branching[d..].iter().product::<usize>()
    }

    /// Depth of the lowest common ancestor of two leaves.
    pub fn lca_depth(&self, u: usize, v: usize) -> usize {
        (0..=self.depth())
            .rev()
            .find(|&d| self.ancestor(u, d) == self.ancestor(v, d))
            .unwrap_or(0)
    }
}

pub fn tree_ensemble(spec: &TreeEnsembleSpec, base: &Base, seed: SeedTree) -> Result<Vec<Instance>> {
    let mut levels: Vec<Vec<Hidden>> = Vec::with_capacity(spec.depth());
    for d in 1..=spec.depth() {
        let strength = spec.coupling[d] - spec.coupling[d - 1];
        let level = (0..spec.nodes_at(d))
            .map(|u| sample_hidden(base, strength, seed.at(&[d as u64, u as u64])))
            .collect::<Result<Vec<_>>>()?;
        levels.push(level);
    }
    (0..spec.leaves())
        .map(|leaf| {
            let path: Vec<Hidden> = (1..=spec.depth())
                .map(|d| match &levels[d - 1][spec.ancestor(leaf, d)] {
                    Hidden::Csp(c) => Hidden::Csp(c.clone()),
                    Hidden::SpinGlass(g) => Hidden::SpinGlass(g.clone()),
                })
                .collect();
            assemble(base, &path, 0..path.len(), seed.at(&[0, leaf as u64]))
        })
        .collect()
}
