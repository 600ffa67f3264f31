//! Sign-extraction wrapper that makes an algorithm's output mean zero.
//!
//! The first `h = ⌈n / ln n⌉` clauses only supply signs: the first-literal
//! sign of clause `j mod h` becomes `C_j`. The algorithm then runs on the
//! remaining clauses with every literal on variable `i` multiplied by `C_i`,
//! and its output `σ'` is mapped back to `C ∘ σ'`.

use crate::ensembles::{Block, CspInstance};
use crate::error::{param, Result};
use crate::hamiltonian::Hamiltonian;
use crate::rng::SeedTree;

use super::mcmc::{anneal_polynomial, AnnealSchedule};

/// A CSP algorithm that is a deterministic function of the instance and a seed.
pub trait CspAlgorithm: Sync {
    fn run(&self, instance: &CspInstance, seed: SeedTree) -> Result<Vec<i8>>;
}

/// Returns the all-ones assignment.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantAlgorithm;

impl CspAlgorithm for ConstantAlgorithm {
    fn run(&self, instance: &CspInstance, _seed: SeedTree) -> Result<Vec<i8>> {
        Ok(vec![1; instance.n()])
    }
}

/// Simulated annealing on the instance energy.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnnealAlgorithm {
    pub schedule: AnnealSchedule,
}

impl CspAlgorithm for AnnealAlgorithm {
    fn run(&self, instance: &CspInstance, seed: SeedTree) -> Result<Vec<i8>> {
        Ok(anneal_polynomial(&instance.polynomial(), &self.schedule, seed).0)
    }
}

/// Number of clauses consumed for signs.
pub fn debias_prefix(n: usize) -> usize {
    if n < 3 {
        return n;
    }
    (n as f64 / (n as f64).ln()).ceil() as usize
}

pub fn debias(algorithm: &dyn CspAlgorithm, instance: &CspInstance, seed: SeedTree) -> Result<Vec<i8>> {
    let n = instance.n();
    let h = debias_prefix(n);
    if instance.clauses.len() < h {
        return param(format!(
            "debiasing needs at least {h} clauses, the instance has {}",
            instance.clauses.len()
        ));
    }
    let c: Vec<i8> = (0..n).map(|j| instance.clauses[j % h].signs[0]).collect();
    let clauses = instance.clauses[h..]
        .iter()
        .map(|cl| {
            let mut cl = cl.clone();
            for (s, &i) in cl.signs.iter_mut().zip(&cl.indices) {
                *s *= c[i as usize];
            }
            cl
        })
        .collect::<Vec<_>>();
    let rest = CspInstance {
        model: instance.model.clone(),
        blocks: vec![Block {
            source: 0,
            clauses: clauses.len(),
        }],
        clauses,
        seed: instance.seed,
    };
    let sigma = algorithm.run(&rest, seed)?;
    if sigma.len() != n {
        return param("algorithm returned an assignment of the wrong length");
    }
    Ok(sigma.iter().zip(&c).map(|(s, c)| s * c).collect())
}

/// `A` wrapped by [`debias`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Debiased<A>(pub A);

impl<A: CspAlgorithm> CspAlgorithm for Debiased<A> {
    fn run(&self, instance: &CspInstance, seed: SeedTree) -> Result<Vec<i8>> {
        debias(&self.0, instance, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{csp_energy, sample_csp, CountMode, CspModel};
    use crate::predicates::{builtin_predicate, PredicateDistribution, PredicateFamily};

    fn model() -> CspModel {
        let p = builtin_predicate(PredicateFamily::KSat, 2).unwrap();
        CspModel::new(PredicateDistribution::point_mass(p), 3.0, 12, CountMode::Exact).unwrap()
    }

    #[test]
    fn constant_algorithm_yields_sign_vector() {
        let inst = sample_csp(&model(), SeedTree::new(4));
        let out = debias(&ConstantAlgorithm, &inst, SeedTree::new(0)).unwrap();
        let h = debias_prefix(12);
        for (j, s) in out.iter().enumerate() {
            assert_eq!(*s, inst.clauses[j % h].signs[0]);
        }
    }

    #[test]
    fn remaining_clause_energy_is_preserved() {
        // The wrapped algorithm sees an instance whose energy at σ' equals the
        // tail energy of the original at C ∘ σ'.
        struct Probe;
        impl CspAlgorithm for Probe {
            fn run(&self, instance: &CspInstance, _seed: SeedTree) -> Result<Vec<i8>> {
                let s: Vec<i8> = (0..instance.n()).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
                Ok(s)
            }
        }
        let inst = sample_csp(&model(), SeedTree::new(9));
        let out = debias(&Probe, &inst, SeedTree::new(0)).unwrap();
        let h = debias_prefix(12);
        let mut tail = inst.clone();
        tail.clauses.drain(..h);
        let mut shifted = inst.clone();
        let c: Vec<i8> = (0..12).map(|j| inst.clauses[j % h].signs[0]).collect();
        shifted.clauses = tail
            .clauses
            .iter()
            .map(|cl| {
                let mut cl = cl.clone();
                for (s, &i) in cl.signs.iter_mut().zip(&cl.indices) {
                    *s *= c[i as usize];
                }
                cl
            })
            .collect();
        let probe: Vec<i8> = (0..12).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        assert_eq!(csp_energy(&tail, &out).unwrap(), csp_energy(&shifted, &probe).unwrap());
    }

    #[test]
    fn too_few_clauses() {
        let mut inst = sample_csp(&model(), SeedTree::new(1));
        inst.clauses.truncate(2);
        assert!(debias(&ConstantAlgorithm, &inst, SeedTree::new(0)).is_err());
    }
}
