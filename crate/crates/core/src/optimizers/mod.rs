//! Budgeted reference optimizers.

mod ga;
mod markov;
mod oracle;
mod shaping;

pub use ga::{ga_sample_unique, run_ga, GaConfig, GaOperators};
pub use markov::{markov_sample_unique, run_markov_hc, MarkovHcConfig, MarkovModel};
pub use oracle::{FnOracle, Oracle, RunTrace, Scored, StopReason, TraceEntry};
pub use shaping::{shape_score, ScoreShaper, ShapeError, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizerError {
    #[error("the model needs a non-empty dataset")]
    EmptyDataset,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::{parse_smiles, Molecule};
    use alloc::vec::Vec;

    fn mols(s: &[&str]) -> Vec<Molecule> {
        s.iter().map(|x| parse_smiles(x).unwrap()).collect()
    }

    fn heavy(m: &Molecule) -> f64 {
        m.heavy_atom_count() as f64
    }

    #[test]
    fn ga_zero_iterations_and_determinism() {
        let seeds = mols(&["CCO", "c1ccccc1", "CC(=O)O"]);
        let cfg = GaConfig { population_size: 20, iterations: 0, ..GaConfig::default() };
        let t = run_ga(&seeds, &seeds, &mut FnOracle::new(1000, heavy), &cfg);
        assert_eq!(t.proposals(), 3);
        assert_eq!(t.best_so_far.len(), 1);

        let cfg = GaConfig { population_size: 20, iterations: 10, rng_seed: 7, ..GaConfig::default() };
        let a = run_ga(&seeds, &seeds, &mut FnOracle::new(1000, heavy), &cfg);
        let b = run_ga(&seeds, &seeds, &mut FnOracle::new(1000, heavy), &cfg);
        assert_eq!(a, b);
        assert_eq!(a.proposals(), 3 + 200);
        assert!(a.best_so_far.windows(2).all(|w| w[1] >= w[0]));
        assert!(a.best_so_far.last() >= a.best_so_far.first());
    }

    #[test]
    fn ga_respects_budget() {
        let seeds = mols(&["CCO", "CCN"]);
        let cfg = GaConfig { population_size: 10, iterations: 10, ..GaConfig::default() };
        let mut o = FnOracle::new(25, heavy);
        let t = run_ga(&seeds, &seeds, &mut o, &cfg);
        assert_eq!(t.proposals(), 25);
        assert_eq!(t.stop, StopReason::BudgetExhausted);
        assert_eq!(t.entries.last().unwrap().cumulative_budget, 25);
    }

    #[test]
    fn markov_distributions_normalize() {
        let data: Vec<_> = mols(&["CCO", "c1ccccc1", "CC(=O)Nc1ccccc1"])
            .iter()
            .map(|m| crate::selfies::encode(m).unwrap())
            .collect();
        let model = MarkovModel::train(3, 0.1, &data);
        for s in &data {
            for i in 0..=s.len() {
                let p = model.distribution(&s.tokens()[..i]);
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn markov_hc_runs() {
        let data = mols(&["CCO", "c1ccccc1", "CC(=O)Nc1ccccc1", "CCCCCC"]);
        let cfg = MarkovHcConfig { batch_size: 30, iterations: 5, rng_seed: 3, ..MarkovHcConfig::default() };
        let a = run_markov_hc(&data, &data[..2], &mut FnOracle::new(10_000, heavy), &cfg).unwrap();
        let b = run_markov_hc(&data, &data[..2], &mut FnOracle::new(10_000, heavy), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.proposals(), 2 + 150);
        assert!(a.best_so_far.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(run_markov_hc(&[], &data, &mut FnOracle::new(1, heavy), &cfg), Err(OptimizerError::EmptyDataset));
    }

    #[test]
    fn markov_hc_full_truncation_is_degenerate() {
        let data = mols(&["CCO", "c1ccccc1"]);
        let cfg = MarkovHcConfig {
            batch_size: 10,
            iterations: 1,
            truncate_min: 1.0,
            truncate_max: 1.0,
            ..MarkovHcConfig::default()
        };
        let t = run_markov_hc(&data, &data, &mut FnOracle::new(100, heavy), &cfg).unwrap();
        assert!(t.degenerate);
        let seed_keys: Vec<_> = t.entries[..2].iter().map(|e| e.canonical_key.clone()).collect();
        assert!(t.entries[2..].iter().all(|e| seed_keys.contains(&e.canonical_key)));
    }
}
