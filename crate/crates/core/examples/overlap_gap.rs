//! Overlap histograms of near-optimal pairs, for one instance against itself
//! and for a half-correlated pair, plus a branching overlap pattern on a
//! tree-coupled spin glass.
//!
//! cargo run --release --example overlap_gap

use std::sync::Arc;

use csp_glass::ensembles::{sample_csp, t_correlated_pair, tree_ensemble, Base, CountMode, CspModel, TreeEnsembleSpec};
use csp_glass::landscape::{
    brute_force_max, ogp_scan, restricted_log_partition, EnergyOracle, OgpMode, OverlapRegion,
};
use csp_glass::predicates::{builtin_predicate, MixturePolynomial, PredicateDistribution, PredicateFamily};
use csp_glass::rng::SeedTree;

fn show(label: &str, oracle: &EnergyOracle) -> csp_glass::Result<()> {
    let best = brute_force_max(oracle, None)?.expect("nonempty").density;
    let thresholds: Vec<f64> = [0.8, 0.9, 0.97, 1.0].iter().map(|f| f * best).collect();
    println!("{label} (optimal average density {best:.4})");
    for h in ogp_scan(oracle, &thresholds, 10, OgpMode::Average)? {
        println!("  v ≥ {:.4}: {:>6} pairs, counts {:?}, gaps {:?}", h.threshold, h.tuples, h.counts, h.gaps());
    }
    Ok(())
}

fn main() -> csp_glass::Result<()> {
    let dist = PredicateDistribution::point_mass(builtin_predicate(PredicateFamily::KXor, 3)?);
    let model = CspModel::new(dist, 6.0, 10, CountMode::Poisson)?;
    let inst = sample_csp(&model, SeedTree::new(12));
    show("same instance twice", &EnergyOracle::replicated(Arc::new(inst), 2)?)?;
    let (a, b) = t_correlated_pair(&model, 0.5, SeedTree::new(13))?;
    show("t = 0.5 pair", &EnergyOracle::grand(vec![Arc::new(a), Arc::new(b)])?)?;

    let n = 5;
    let tree = TreeEnsembleSpec::new(vec![2, 2], vec![0.0, 0.5, 1.0])?;
    let xi = MixturePolynomial::from_terms(&[(2, 0.5)], 0.0)?;
    let leaves = tree_ensemble(&tree, &Base::SpinGlass { mixture: xi, n }, SeedTree::new(14))?;
    let oracle = EnergyOracle::from_instances(leaves)?;
    let region = OverlapRegion::branching(&tree, &[0.0, 0.5, 1.0], 0.45)?;
    let best = brute_force_max(&oracle, Some(&region))?;
    let lp = restricted_log_partition(&oracle, 1.0, &region)?;
    println!(
        "branching pattern on {} leaves, n = {n}: {} tuples, best average density {}",
        tree.leaves(),
        lp.states,
        best.map_or("none".into(), |m| format!("{:.4}", m.density))
    );
    Ok(())
}
