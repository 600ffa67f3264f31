//! Zero-temperature Parisi numerics for one predicate: the replica-symmetric
//! bound, the ground-state energy density, the algorithmic threshold and the
//! limiting optimal value of the CSP.
//!
//! cargo run --release --example ground_state -- kXOR 4

use csp_glass::parisi::{csp_value_formula, minimize_alg, minimize_gsed, rs_value, OptimizerSettings};
use csp_glass::predicates::{builtin_predicate, PredicateFamily};

fn main() -> csp_glass::Result<()> {
    let mut args = std::env::args().skip(1);
    let family: PredicateFamily = args.next().unwrap_or_else(|| "kXOR".into()).parse()?;
    let k: usize = args.next().map_or(Ok(4), |s| s.parse()).expect("k must be an integer");
    let xi = builtin_predicate(family, k)?.mixture();
    let settings = OptimizerSettings::default().with_atoms(6);

    println!("{family} k={k}: ξ(s) = {xi}, f̂(∅) = {}", xi.mean_term());
    println!("replica symmetric bound  {:.5}", rs_value(&xi));

    let gsed = minimize_gsed(&xi, &settings)?;
    println!("GSED                     {:.5} (grid δ {:.1e}, converged {})", gsed.value, gsed.evaluation.grid_delta, gsed.converged);
    for h in &gsed.history {
        println!("  {} atoms: {:.6}", h.atoms, h.value);
    }
    println!("  ζ breakpoints {:?}", gsed.order.breakpoints());
    println!("  ζ values      {:?}", gsed.order.values());

    let alg = minimize_alg(&xi, &settings)?;
    println!("ALG                      {:.5}", alg.value);

    for alpha in [16.0, 64.0, 256.0] {
        let v = csp_value_formula(&xi, alpha, &settings)?;
        println!("α = {alpha:>5}: optimal fraction ≈ {:.4}", v.value);
    }
    Ok(())
}
