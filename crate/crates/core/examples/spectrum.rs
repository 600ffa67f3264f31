//! Fourier spectrum, noise stability and mixture polynomial of the built-in
//! predicates, plus a mixed-arity distribution.
//!
//! cargo run --example spectrum

use csp_glass::predicates::{
    builtin_predicate, mixture_of_distribution, Predicate, PredicateDistribution, PredicateFamily,
};

fn main() -> csp_glass::Result<()> {
    for family in [PredicateFamily::OneInK, PredicateFamily::KNae, PredicateFamily::KSat, PredicateFamily::KXor] {
        for k in 2..=4 {
            let p = builtin_predicate(family, k)?;
            let s = p.spectrum();
            println!(
                "{family:>6} k={k}  f̂(∅)={:.4}  levels={:?}  Stab_0.5={:.4}  ξ(s)={}",
                s.mean(),
                s.level_weights().iter().map(|w| (w * 1e4).round() / 1e4).collect::<Vec<_>>(),
                s.noise_stability(0.5),
                p.mixture()
            );
        }
    }

    let or2 = builtin_predicate(PredicateFamily::KSat, 2)?;
    let majority3 = Predicate::from_fn(3, "maj3", |x| if x.iter().map(|&v| v as i32).sum::<i32>() > 0 { 1.0 } else { 0.0 })?;
    let dist = PredicateDistribution::new(vec![(or2, 0.5), (majority3, 0.5)])?;
    let mix = mixture_of_distribution(&dist);
    println!("\n½·2SAT + ½·MAJ3 (padded to k={}): f̂(∅)={}  ξ(s)={}", dist.arity(), dist.mean_term(), mix.mixture);
    Ok(())
}
