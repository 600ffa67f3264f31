//! Exhaustive enumeration: free energies at several temperatures, an
//! overlap-restricted partition function of a replicated pair, and a Gibbs
//! sample compared with the exact marginal.
//!
//! cargo run --release --example free_energy

use std::sync::Arc;

use csp_glass::ensembles::{sample_csp, CountMode, CspModel};
use csp_glass::landscape::{
    brute_force_max, gibbs_sample, restricted_log_partition, EnergyOracle, GibbsConfig, OverlapRegion,
};
use csp_glass::predicates::{builtin_predicate, PredicateDistribution, PredicateFamily};
use csp_glass::rng::SeedTree;

fn main() -> csp_glass::Result<()> {
    let n = 10;
    let dist = PredicateDistribution::point_mass(builtin_predicate(PredicateFamily::KXor, 2)?);
    let inst = sample_csp(&CspModel::new(dist, 8.0, n, CountMode::Exact)?, SeedTree::new(7));
    let single = EnergyOracle::single(inst.clone());

    let max = brute_force_max(&single, None)?.expect("nonempty cube");
    println!("max H/n = {:.4} at {:?}", max.density, max.assignments[0]);
    for beta in [0.5, 1.0, 4.0, 16.0] {
        let lp = restricted_log_partition(&single, beta, &OverlapRegion::full(1))?;
        println!(
            "β = {beta:>4}: log Z = {:.4}, (1/βn) log Z = {:.4} ∈ [{:.4}, {:.4}]",
            lp.log_z(),
            lp.free_energy_density(),
            max.density,
            max.density + std::f64::consts::LN_2 / beta
        );
    }

    let pair = EnergyOracle::replicated(Arc::new(inst), 2)?;
    for (lo, hi) in [(-1.01, -0.5), (-0.5, 0.5), (0.5, 1.01)] {
        let region = OverlapRegion::pairwise(2, 0, 1, lo, hi)?;
        let lp = restricted_log_partition(&pair, 1.0, &region)?;
        let best = brute_force_max(&pair, Some(&region))?;
        println!(
            "R ∈ ({lo}, {hi}): {} pairs, log Z = {:.3}, best average density {}",
            lp.states,
            lp.log_z(),
            best.map_or("none".into(), |m| format!("{:.4}", m.density))
        );
    }

    let samples = 2000;
    let mean_energy: f64 = (0..samples)
        .map(|s| {
            let cfg = GibbsConfig::new(1.0, 50, SeedTree::new(8).child(s)).expect("valid β");
            let t = gibbs_sample(&single, &cfg).expect("sample");
            single.energy(&t).expect("energy")
        })
        .sum::<f64>()
        / samples as f64;
    println!("Gibbs mean energy at β = 1 over {samples} chains: {mean_energy:.4}");
    Ok(())
}
