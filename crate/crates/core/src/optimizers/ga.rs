//! Generational genetic algorithm over SELFIES.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::{Oracle, RunTrace};
use crate::mol::{canonical_key, Molecule};
use crate::selfies::{crossover_at, decode, default_alphabet, encode, mutate_with, MutationConfig, SelfiesSequence, Token};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub iterations: usize,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 500,
            iterations: 10,
            tournament_size: 3,
            elite_count: 1,
            mutation_rate: 0.7,
            crossover_rate: 0.3,
            rng_seed: 0,
        }
    }
}

/// Tries per child before falling back to a copy of the parent.
const CHILD_ATTEMPTS: usize = 10;

#[derive(Debug, Clone)]
struct Member {
    molecule: Molecule,
    selfies: Option<SelfiesSequence>,
    key: String,
    fitness: f64,
}

/// Genetic operators preconditioned on a dataset: the mutation alphabet is
/// the default alphabet extended by every token seen in the dataset.
#[derive(Debug, Clone)]
pub struct GaOperators {
    pub mutation: MutationConfig,
}

impl GaOperators {
    pub fn precondition(dataset: &[Molecule]) -> GaOperators {
        let mut tokens: BTreeSet<Token> = default_alphabet().into_iter().collect();
        for m in dataset {
            if let Ok(s) = encode(m) {
                tokens.extend(s.tokens().iter().copied().filter(|t| *t != Token::Dot));
            }
        }
        GaOperators {
            mutation: MutationConfig {
                alphabet: tokens.into_iter().collect(),
                ..MutationConfig::default()
            },
        }
    }

    /// One child: crossover of two parents with probability
    /// `crossover_rate / (crossover_rate + mutation_rate)`, otherwise a
    /// single-token mutation. Empty decodes are retried.
    pub fn child<R: Rng>(
        &self,
        cfg: &GaConfig,
        rng: &mut R,
        pick: &mut dyn FnMut(&mut R) -> Option<SelfiesSequence>,
        fallback: &Molecule,
    ) -> Molecule {
        let total = cfg.crossover_rate + cfg.mutation_rate;
        for _ in 0..CHILD_ATTEMPTS {
            let do_crossover = total > 0.0 && rng.gen::<f64>() * total < cfg.crossover_rate;
            let Some(a) = pick(rng) else { break };
            let s = if do_crossover {
                let Some(b) = pick(rng) else { break };
                let k = rng.gen_range(0..=a.len().min(b.len()));
                crossover_at(&a, &b, k)
            } else {
                mutate_with(&a, &self.mutation, rng)
            };
            let m = decode(&s);
            if !m.is_empty() {
                return m;
            }
        }
        fallback.clone()
    }
}

fn tournament<R: Rng>(pop: &[Member], size: usize, rng: &mut R) -> usize {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size.max(1) {
        let c = rng.gen_range(0..pop.len());
        if better(&pop[c], &pop[best]) {
            best = c;
        }
    }
    best
}

fn better(a: &Member, b: &Member) -> bool {
    match a.fitness.total_cmp(&b.fitness) {
        core::cmp::Ordering::Greater => true,
        core::cmp::Ordering::Less => false,
        core::cmp::Ordering::Equal => a.key < b.key,
    }
}

fn rank(pop: &mut [Member]) {
    pop.sort_by(|a, b| b.fitness.total_cmp(&a.fitness).then_with(|| a.key.cmp(&b.key)));
}

/// Evaluates the seeds, then runs up to `cfg.iterations` generations of
/// tournament selection, one genetic operation per child and elitism.
/// Seed evaluations consume budget like any proposal.
pub fn run_ga(seeds: &[Molecule], dataset: &[Molecule], oracle: &mut dyn Oracle, cfg: &GaConfig) -> RunTrace {
    let ops = GaOperators::precondition(dataset);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut trace = RunTrace::new();

    let scores = oracle.evaluate(seeds);
    let keyed = trace.record(0, seeds, &scores);
    let mut population: Vec<Member> = seeds
        .iter()
        .zip(keyed)
        .map(|(m, (key, fitness))| Member {
            molecule: m.clone(),
            selfies: encode(m).ok(),
            key,
            fitness,
        })
        .collect();
    rank(&mut population);
    population.truncate(cfg.population_size.max(1));
    if population.is_empty() || trace.stop != super::StopReason::IterationsDone {
        return trace;
    }

    for iteration in 1..=cfg.iterations {
        let breeders: Vec<usize> = (0..population.len())
            .filter(|&i| population[i].selfies.is_some())
            .collect();
        let pool: Vec<Member> = breeders.iter().map(|&i| population[i].clone()).collect();
        let fallback = population[0].molecule.clone();
        let mut children = Vec::with_capacity(cfg.population_size);
        for _ in 0..cfg.population_size {
            let mut pick = |r: &mut ChaCha8Rng| {
                if pool.is_empty() {
                    None
                } else {
                    pool[tournament(&pool, cfg.tournament_size, r)].selfies.clone()
                }
            };
            children.push(ops.child(cfg, &mut rng, &mut pick, &fallback));
        }
        if children.is_empty() {
            break;
        }
        let scores = oracle.evaluate(&children);
        let keyed = trace.record(iteration, &children, &scores);
        let mut next: Vec<Member> = population.iter().take(cfg.elite_count).cloned().collect();
        for (m, (key, fitness)) in children.into_iter().zip(keyed) {
            next.push(Member {
                selfies: encode(&m).ok(),
                molecule: m,
                key,
                fitness,
            });
        }
        rank(&mut next);
        next.truncate(cfg.population_size.max(1));
        population = next;
        if trace.stop != super::StopReason::IterationsDone {
            break;
        }
    }
    trace
}

/// Proposes children from random parents of `parents` until `n` distinct
/// canonical keys have appeared, as in a single-generation run under a
/// constant fitness. Stops early after `max_attempts` children.
pub fn ga_sample_unique(
    ops: &GaOperators,
    parents: &[Molecule],
    n: usize,
    max_attempts: usize,
    rng_seed: u64,
) -> Vec<String> {
    let cfg = GaConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let encoded: Vec<SelfiesSequence> = parents.iter().filter_map(|m| encode(m).ok()).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if encoded.is_empty() {
        return out;
    }
    let fallback = Molecule::empty();
    let mut attempts = 0;
    while out.len() < n && attempts < max_attempts {
        attempts += 1;
        let mut pick = |r: &mut ChaCha8Rng| Some(encoded[r.gen_range(0..encoded.len())].clone());
        let child = ops.child(&cfg, &mut rng, &mut pick, &fallback);
        let key = canonical_key(&child);
        if !key.is_empty() && seen.insert(key.clone()) {
            out.push(key);
        }
    }
    out
}
