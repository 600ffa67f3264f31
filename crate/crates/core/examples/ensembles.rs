//! Random instances: a CSP in both count models, a mixed spin glass, a
//! t-correlated pair and a tree-coupled family.
//!
//! cargo run --example ensembles

use csp_glass::ensembles::{
    sample_csp, sample_spin_glass, t_correlated_pair, tree_ensemble, Base, CountMode, CspModel, TreeEnsembleSpec,
};
use csp_glass::hamiltonian::Hamiltonian;
use csp_glass::landscape::overlap;
use csp_glass::predicates::{builtin_predicate, MixturePolynomial, PredicateDistribution, PredicateFamily};
use csp_glass::rng::SeedTree;

fn main() -> csp_glass::Result<()> {
    let seed = SeedTree::new(2024);
    let dist = PredicateDistribution::point_mass(builtin_predicate(PredicateFamily::KSat, 3)?);
    let n = 12;
    let sigma: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();

    for mode in [CountMode::Exact, CountMode::Poisson] {
        let model = CspModel::new(dist.clone(), 4.0, n, mode)?;
        let inst = sample_csp(&model, seed.child(0));
        println!(
            "{mode:?}: {} clauses, H(σ) = {:.4}, satisfied weight {}",
            inst.clauses.len(),
            inst.energy(&sigma)?,
            inst.satisfied_weight(&sigma)?
        );
    }

    let xi = MixturePolynomial::from_terms(&[(2, 0.25), (3, 0.25)], 0.0)?;
    let g = sample_spin_glass(&xi, n, seed.child(1))?;
    let shapes: Vec<(usize, usize)> = g.disorder().iter().map(|(p, a)| (*p, a.len())).collect();
    println!("spin glass ξ(s) = {xi}: disorder (degree, entries) {shapes:?}, H(σ) = {:.4}", g.energy(&sigma)?);
    println!("seed record: {}", serde_json::to_string(&g.record())?);

    let poisson = CspModel::new(dist.clone(), 4.0, n, CountMode::Poisson)?;
    for t in [0.0, 0.5, 1.0] {
        let (a, b) = t_correlated_pair(&poisson, t, seed.child(2))?;
        println!(
            "t = {t}: blocks {:?} / {:?}, H¹(σ) = {:.3}, H²(σ) = {:.3}",
            a.blocks.iter().map(|b| (b.source, b.clauses)).collect::<Vec<_>>(),
            b.blocks.iter().map(|b| (b.source, b.clauses)).collect::<Vec<_>>(),
            a.energy(&sigma)?,
            b.energy(&sigma)?
        );
    }

    let tree = TreeEnsembleSpec::new(vec![2, 2], vec![0.0, 0.6, 1.0])?;
    let leaves = tree_ensemble(&tree, &Base::SpinGlass { mixture: xi, n }, seed.child(3))?;
    let flipped: Vec<i8> = sigma.iter().map(|s| -s).collect();
    for (u, leaf) in leaves.iter().enumerate() {
        println!(
            "leaf {u}: ancestor at depth 1 = {}, H(σ) = {:.3}, H(-σ) = {:.3}",
            tree.ancestor(u, 1),
            leaf.energy(&sigma)?,
            leaf.energy(&flipped)?
        );
    }
    println!("R(σ, -σ) = {}", overlap(&sigma, &flipped)?);
    Ok(())
}
