//! Correlation curve of simulated annealing on t-correlated Max-2XOR
//! instances, with and without sign-extraction debiasing.
//!
//! cargo run --release --example correlation

use csp_glass::ensembles::{sample_csp, CountMode, CspModel};
use csp_glass::landscape::{
    chi_curve, debias, AnnealAlgorithm, AnnealSchedule, ChiSettings, ConstantAlgorithm, CspAlgorithm,
};
use csp_glass::predicates::{builtin_predicate, PredicateDistribution, PredicateFamily};
use csp_glass::rng::SeedTree;

fn main() -> csp_glass::Result<()> {
    let dist = PredicateDistribution::point_mass(builtin_predicate(PredicateFamily::KXor, 2)?);
    let model = CspModel::new(dist, 8.0, 32, CountMode::Poisson)?;
    let alg = AnnealAlgorithm {
        schedule: AnnealSchedule { sweeps: 100, ..AnnealSchedule::default() },
    };
    let t = [0.0, 0.25, 0.5, 0.75, 1.0];
    for debiased in [false, true] {
        let settings = ChiSettings { reps: 100, debias: debiased };
        let c = chi_curve(&model, &alg, &t, &settings, SeedTree::new(5))?;
        let cells: Vec<String> = c.chi.iter().zip(&c.stderr).map(|(x, s)| format!("{x:+.3}±{s:.3}")).collect();
        println!("debias {debiased:<5}: χ = [{}]", cells.join(", "));
    }

    let inst = sample_csp(&model, SeedTree::new(6));
    println!("all-ones output:          {:?}", ConstantAlgorithm.run(&inst, SeedTree::new(0))?);
    println!("after sign extraction:    {:?}", debias(&ConstantAlgorithm, &inst, SeedTree::new(0))?);
    Ok(())
}
