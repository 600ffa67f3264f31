//! Exact optimal values of random Max-2XOR instances against the limiting
//! formula `f̂(∅) + GSED/√α`.
//!
//! cargo run --release --example optimal_value

use csp_glass::ensembles::{CountMode, CspModel};
use csp_glass::landscape::vmax;
use csp_glass::parisi::{csp_value_formula, OptimizerSettings};
use csp_glass::predicates::{builtin_predicate, PredicateDistribution, PredicateFamily};
use csp_glass::rng::SeedTree;

fn main() -> csp_glass::Result<()> {
    let p = builtin_predicate(PredicateFamily::KXor, 2)?;
    let xi = p.mixture();
    let dist = PredicateDistribution::point_mass(p);
    let settings = OptimizerSettings::default().with_atoms(4);
    for alpha in [4.0, 16.0, 64.0] {
        let model = CspModel::new(dist.clone(), alpha, 18, CountMode::Exact)?;
        let r = vmax(&model, 30, SeedTree::new(11))?;
        let limit = csp_value_formula(&xi, alpha, &settings)?;
        println!(
            "α = {alpha:>4}: mean max H/n = {:.4} ± {:.4}, limit {:.4}",
            r.summary.mean, r.summary.stderr, limit.value
        );
    }
    Ok(())
}
