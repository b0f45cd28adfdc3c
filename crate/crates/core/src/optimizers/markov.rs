//! Order-k Markov chain over SELFIES tokens and the hill climber built on it.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::{Oracle, RunTrace, StopReason};
use super::OptimizerError;
use crate::mol::{canonical_key, Molecule};
use crate::selfies::{decode, default_alphabet, encode, SelfiesSequence, Token};

const BOS: u32 = u32::MAX;
const END: u32 = 0;

/// Laplace-smoothed token transition counts. Symbol 0 ends a sequence;
/// symbols 1.. index `vocab`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    order: usize,
    smoothing: f64,
    vocab: Vec<Token>,
    index: BTreeMap<Token, u32>,
    counts: BTreeMap<Vec<u32>, BTreeMap<u32, f64>>,
    totals: BTreeMap<Vec<u32>, f64>,
    longest: usize,
}

impl MarkovModel {
    pub fn new(order: usize, smoothing: f64) -> MarkovModel {
        let mut m = MarkovModel {
            order,
            smoothing,
            vocab: Vec::new(),
            index: BTreeMap::new(),
            counts: BTreeMap::new(),
            totals: BTreeMap::new(),
            longest: 0,
        };
        for t in default_alphabet() {
            m.intern(t);
        }
        m
    }

    pub fn train(order: usize, smoothing: f64, data: &[SelfiesSequence]) -> MarkovModel {
        let mut m = MarkovModel::new(order, smoothing);
        m.update(data);
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of outcomes of every conditional distribution (tokens plus
    /// the end symbol).
    pub fn outcomes(&self) -> usize {
        self.vocab.len() + 1
    }

    pub fn vocabulary(&self) -> &[Token] {
        &self.vocab
    }

    pub fn context_count(&self) -> usize {
        self.counts.len()
    }

    fn intern(&mut self, t: Token) -> u32 {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        self.vocab.push(t);
        let i = self.vocab.len() as u32;
        self.index.insert(t, i);
        i
    }

    fn context(&self, history: &[u32]) -> Vec<u32> {
        let mut ctx = alloc::vec![BOS; self.order];
        let take = history.len().min(self.order);
        ctx[self.order - take..].copy_from_slice(&history[history.len() - take..]);
        ctx
    }

    /// Adds transition counts from `data`; dot tokens are skipped.
    pub fn update(&mut self, data: &[SelfiesSequence]) {
        for s in data {
            let ids: Vec<u32> = s
                .tokens()
                .iter()
                .filter(|t| **t != Token::Dot)
                .map(|&t| self.intern(t))
                .collect();
            self.longest = self.longest.max(ids.len());
            for i in 0..=ids.len() {
                let ctx = self.context(&ids[..i]);
                let next = ids.get(i).copied().unwrap_or(END);
                *self.counts.entry(ctx.clone()).or_default().entry(next).or_default() += 1.0;
                *self.totals.entry(ctx).or_default() += 1.0;
            }
        }
    }

    /// P(next | last `order` tokens of `history`) for every outcome, end
    /// symbol first then `vocabulary()` order.
    pub fn distribution(&self, history: &[Token]) -> Vec<f64> {
        let ids: Vec<u32> = history
            .iter()
            .map(|t| self.index.get(t).copied().unwrap_or(END))
            .collect();
        self.distribution_ids(&self.context(&ids))
    }

    fn distribution_ids(&self, ctx: &[u32]) -> Vec<f64> {
        let k = self.outcomes();
        let total = self.totals.get(ctx).copied().unwrap_or(0.0);
        let denom = total + self.smoothing * k as f64;
        if denom <= 0.0 {
            return alloc::vec![1.0 / k as f64; k];
        }
        let mut p = alloc::vec![self.smoothing / denom; k];
        if let Some(c) = self.counts.get(ctx) {
            for (&sym, &n) in c {
                p[sym as usize] += n / denom;
            }
        }
        p
    }

    fn sample_id<R: Rng>(&self, ctx: &[u32], rng: &mut R) -> u32 {
        let p = self.distribution_ids(ctx);
        let mut u: f64 = rng.gen();
        for (i, &pi) in p.iter().enumerate() {
            if u < pi {
                return i as u32;
            }
            u -= pi;
        }
        (p.len() - 1) as u32
    }

    /// Extends `prefix` by sampling until the end symbol or `max_len`
    /// tokens in total.
    pub fn complete<R: Rng>(&self, prefix: &[Token], max_len: usize, rng: &mut R) -> SelfiesSequence {
        let mut ids: Vec<u32> = prefix
            .iter()
            .map(|t| self.index.get(t).copied().unwrap_or(END))
            .collect();
        let mut out: Vec<Token> = prefix.to_vec();
        while out.len() < max_len {
            let sym = self.sample_id(&self.context(&ids), rng);
            if sym == END {
                break;
            }
            ids.push(sym);
            out.push(self.vocab[sym as usize - 1]);
        }
        SelfiesSequence::new(out)
    }

    /// Length cap for sampled sequences.
    pub fn max_len(&self) -> usize {
        (2 * self.longest).max(10)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovHcConfig {
    pub order: usize,
    pub smoothing: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub top_k: usize,
    pub reorderings: usize,
    /// Fraction of tokens kept before completion, drawn from this range.
    pub truncate_min: f64,
    pub truncate_max: f64,
    pub rng_seed: u64,
}

impl Default for MarkovHcConfig {
    fn default() -> Self {
        MarkovHcConfig {
            order: 3,
            smoothing: 0.1,
            batch_size: 500,
            iterations: 10,
            top_k: 2,
            reorderings: 5,
            truncate_min: 0.25,
            truncate_max: 0.75,
            rng_seed: 0,
        }
    }
}

fn encode_all(ms: &[Molecule]) -> Vec<SelfiesSequence> {
    ms.iter().filter_map(|m| encode(m).ok()).collect()
}

/// `n` SELFIES of `m` written from random atom orders.
fn reordered<R: Rng>(m: &Molecule, n: usize, rng: &mut R) -> Vec<SelfiesSequence> {
    let mut out = Vec::new();
    for _ in 0..n {
        let mut order: Vec<usize> = (0..m.atom_count()).collect();
        order.shuffle(rng);
        if let Ok(s) = encode(&m.permuted(&order)) {
            out.push(s);
        }
    }
    if out.is_empty() {
        out.extend(encode(m).ok());
    }
    out
}

const PROPOSAL_ATTEMPTS: usize = 10;

/// Markov-model hill climber. The model is trained on `dataset`; `seeds`
/// are evaluated first; every iteration the best `top_k` known molecules
/// are reordered, truncated, completed by the model, and the batch is
/// evaluated, after which the model absorbs the new molecules.
pub fn run_markov_hc(
    dataset: &[Molecule],
    seeds: &[Molecule],
    oracle: &mut dyn Oracle,
    cfg: &MarkovHcConfig,
) -> Result<RunTrace, OptimizerError> {
    if dataset.is_empty() {
        return Err(OptimizerError::EmptyDataset);
    }
    let mut model = MarkovModel::train(cfg.order, cfg.smoothing, &encode_all(dataset));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut trace = RunTrace::new();
    trace.degenerate = cfg.truncate_min >= 1.0;

    let scores = oracle.evaluate(seeds);
    let mut known: BTreeMap<String, (f64, Molecule)> = BTreeMap::new();
    for (m, (key, f)) in seeds.iter().zip(trace.record(0, seeds, &scores)) {
        known.entry(key).or_insert((f, m.clone()));
    }
    if known.is_empty() || trace.stop == StopReason::BudgetExhausted {
        return Ok(trace);
    }

    for iteration in 1..=cfg.iterations {
        let mut ranked: Vec<(&String, &(f64, Molecule))> = known.iter().collect();
        ranked.sort_by(|a, b| b.1 .0.total_cmp(&a.1 .0).then_with(|| a.0.cmp(b.0)));
        let top: Vec<Molecule> = ranked.iter().take(cfg.top_k.max(1)).map(|(_, v)| v.1.clone()).collect();

        let mut batch = Vec::with_capacity(cfg.batch_size);
        for (i, seed) in top.iter().enumerate() {
            let share = cfg.batch_size / top.len() + usize::from(i < cfg.batch_size % top.len());
            let variants = reordered(seed, cfg.reorderings.max(1), &mut rng);
            for j in 0..share {
                batch.push(propose(&model, seed, &variants, j, cfg, &mut rng));
            }
        }
        let scores = oracle.evaluate(&batch);
        let keyed = trace.record(iteration, &batch, &scores);
        let mut fresh = Vec::new();
        for (m, (key, f)) in batch.iter().zip(keyed) {
            if let Entry::Vacant(slot) = known.entry(key) {
                fresh.push(m.clone());
                slot.insert((f, m.clone()));
            }
        }
        model.update(&encode_all(&fresh));
        if trace.stop == StopReason::BudgetExhausted {
            break;
        }
    }
    Ok(trace)
}

fn propose<R: Rng>(
    model: &MarkovModel,
    seed: &Molecule,
    variants: &[SelfiesSequence],
    j: usize,
    cfg: &MarkovHcConfig,
    rng: &mut R,
) -> Molecule {
    if variants.is_empty() {
        return seed.clone();
    }
    let base = &variants[j % variants.len()];
    for _ in 0..PROPOSAL_ATTEMPTS {
        let lo = cfg.truncate_min.clamp(0.0, 1.0);
        let hi = cfg.truncate_max.clamp(lo, 1.0);
        let frac = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        let keep = libm::floor(frac * base.len() as f64) as usize;
        if keep >= base.len() {
            return decode(base);
        }
        let s = model.complete(&base.tokens()[..keep], model.max_len().max(keep + 1), rng);
        let m = decode(&s);
        if !m.is_empty() {
            return m;
        }
    }
    seed.clone()
}

/// Samples whole sequences from the model until `n` distinct canonical
/// keys appear or `max_attempts` samples were drawn.
pub fn markov_sample_unique(model: &MarkovModel, n: usize, max_attempts: usize, rng_seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < n && attempts < max_attempts {
        attempts += 1;
        let key = canonical_key(&decode(&model.complete(&[], model.max_len(), &mut rng)));
        if !key.is_empty() && seen.insert(key.clone()) {
            out.push(key);
        }
    }
    out
}
