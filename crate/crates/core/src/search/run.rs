use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::{Archive, ArchiveEntry};
use super::evaluator::Evaluator;
use super::hv::hypervolume;
use super::infill::infill_select;
use super::{Mode, SearchConfig, SearchError};
use crate::evo::{lhs_sample, polynomial_mutation, sbx_crossover, select_survivors, tournament_select, EvalMeta, EvoParams, Individual};
use crate::gates::GatesParams;
use crate::genome::{random_genome, Genome};
use crate::rng::{derive_seed, stream, tag};
use crate::surrogate::{Surrogate, TrainingSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Distinct genomes scored at high fidelity during the search.
    pub high_evals: usize,
    pub low_evals: usize,
    pub surrogate_refits: usize,
    pub generations: usize,
    /// Infill slots left empty because too few candidates were outside S.
    pub infill_shortfall: usize,
}

/// One line of `history.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub archive_size: usize,
    /// Area dominated by the population's first front on the primary error
    /// pair, against `(1, 1)`; absent when only the surrogate is used.
    pub hypervolume: Option<f64>,
    pub elapsed_secs: f64,
    pub high_evals: usize,
    pub surrogate_refits: usize,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub archive: Archive,
    pub history: Vec<GenerationRecord>,
    pub counters: Counters,
    pub training_set: TrainingSet,
    pub population: Vec<Individual>,
    pub surrogate: Option<Surrogate>,
    /// The wall-clock budget ran out before `max_generations`.
    pub budget_exhausted: bool,
}

type Pair = (f64, f64);

struct Context<'a> {
    cfg: &'a SearchConfig,
    evaluator: &'a dyn Evaluator,
    gates: GatesParams,
    low_cache: HashMap<Genome, Pair>,
    high_cache: HashMap<Genome, Pair>,
    counters: Counters,
}

/// Looks genomes up in `cache`, scoring the distinct missing ones in parallel.
fn cached(
    cache: &mut HashMap<Genome, Pair>,
    genomes: &[Genome],
    score: impl Fn(&Genome) -> Result<Pair, SearchError> + Sync,
    counter: &mut usize,
) -> Result<Vec<Pair>, SearchError> {
    let mut missing: Vec<Genome> = Vec::new();
    for g in genomes {
        if !cache.contains_key(g) && !missing.contains(g) {
            missing.push(*g);
        }
    }
    let results: Vec<Result<Pair, SearchError>> = missing.par_iter().map(&score).collect();
    for (g, r) in missing.into_iter().zip(results) {
        cache.insert(g, r?);
        *counter += 1;
    }
    Ok(genomes.iter().map(|g| cache[g]).collect())
}

impl Context<'_> {
    fn low(&mut self, genomes: &[Genome]) -> Result<Vec<Pair>, SearchError> {
        let ev = self.evaluator;
        cached(&mut self.low_cache, genomes, |g| ev.low(g), &mut self.counters.low_evals)
    }

    fn high(&mut self, genomes: &[Genome]) -> Result<Vec<Pair>, SearchError> {
        let ev = self.evaluator;
        cached(&mut self.high_cache, genomes, |g| ev.high(g), &mut self.counters.high_evals)
    }

    fn predict(&self, surrogate: Option<&Surrogate>, genomes: &[Genome]) -> Vec<Option<f64>> {
        genomes.iter().map(|g| surrogate.map(|s| s.predict(&self.gates.embed(g)))).collect()
    }

    fn individuals(&mut self, genomes: &[Genome], generation: usize, surrogate: Option<&Surrogate>) -> Result<Vec<Individual>, SearchError> {
        let mode = self.cfg.mode;
        let low = if matches!(mode, Mode::SH | Mode::L) { Some(self.low(genomes)?) } else { None };
        let high = if mode == Mode::H { Some(self.high(genomes)?) } else { None };
        let f3 = self.predict(surrogate, genomes);
        Ok(genomes
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let meta = EvalMeta { generation, low: low.as_ref().map(|v| v[i]), high: high.as_ref().map(|v| v[i]), surrogate: f3[i] };
                Individual::new(*g, objectives(mode, &meta)).with_meta(meta)
            })
            .collect())
    }
}

fn objectives(mode: Mode, meta: &EvalMeta) -> Vec<f64> {
    let pair = |p: Option<Pair>| {
        let (a, b) = p.expect("mode evaluates this fidelity");
        vec![a, b]
    };
    match mode {
        Mode::SH => {
            let mut v = pair(meta.low);
            v.push(meta.surrogate.expect("surrogate fitted"));
            v
        }
        Mode::L => pair(meta.low),
        Mode::H => pair(meta.high),
        Mode::S => vec![meta.surrogate.expect("surrogate fitted")],
    }
}

trait WithMeta {
    fn with_meta(self, meta: EvalMeta) -> Self;
}

impl WithMeta for Individual {
    fn with_meta(mut self, meta: EvalMeta) -> Self {
        self.meta = meta;
        self
    }
}

fn offspring(pop: &[Individual], params: &EvoParams, seed: u64, generation: usize) -> Vec<Genome> {
    let n = params.population_size;
    let mut mating = stream(seed, &[tag::MATING, generation as u64]);
    let mut variation = stream(seed, &[tag::VARIATION, generation as u64]);
    let mut kids = Vec::with_capacity(n);
    while kids.len() < n {
        let a = tournament_select(pop, &mut mating);
        let b = tournament_select(pop, &mut mating);
        let (c1, c2) = sbx_crossover(&pop[a].genome, &pop[b].genome, params, &mut variation);
        kids.push(polynomial_mutation(&c1, params, &mut variation));
        if kids.len() < n {
            kids.push(polynomial_mutation(&c2, params, &mut variation));
        }
    }
    kids
}

fn primary_pair(mode: Mode, meta: &EvalMeta) -> Option<Pair> {
    match mode {
        Mode::SH | Mode::L => meta.low,
        Mode::H => meta.high,
        Mode::S => None,
    }
}

fn entry(ind: &Individual, generation: usize) -> ArchiveEntry {
    ArchiveEntry {
        genome: ind.genome,
        objectives: ind.objectives.clone(),
        low: ind.meta.low,
        f3: ind.meta.surrogate,
        high: ind.meta.high,
        generation,
    }
}

/// Runs the bi-fidelity search loop for `cfg.mode`.
pub fn run_search(cfg: &SearchConfig, evaluator: &dyn Evaluator) -> Result<SearchOutcome, SearchError> {
    cfg.validate()?;
    let start = Instant::now();
    let over_budget = || cfg.wall_clock_budget.is_some_and(|b| start.elapsed().as_secs_f64() > b);
    let seed = cfg.master_seed;
    let params = cfg.evo_params();
    let n = cfg.population_size;
    let mut ctx = Context {
        cfg,
        evaluator,
        gates: GatesParams::init(derive_seed(seed, &[tag::GATES])),
        low_cache: HashMap::new(),
        high_cache: HashMap::new(),
        counters: Counters::default(),
    };

    let mut set = TrainingSet::default();
    if cfg.mode.uses_surrogate() {
        let samples = lhs_sample(cfg.initial_samples, &mut stream(seed, &[tag::LHS]));
        let scores = ctx.high(&samples)?;
        for (g, (f1h, f2h)) in samples.iter().zip(scores) {
            set.insert(*g, ctx.gates.embed(g), f1h, f2h);
        }
    }

    let mut init_rng = stream(seed, &[tag::INIT_POPULATION]);
    let initial: Vec<Genome> = (0..n).map(|_| random_genome(&mut init_rng)).collect();
    let mut pop: Vec<Individual> = Vec::new();
    let mut archive = Archive::default();
    let mut history = Vec::new();
    let mut surrogate: Option<Surrogate> = None;
    let mut generation = 0;
    let mut budget_exhausted = over_budget();
    let rounds = cfg.rounds();

    'rounds: for round in 1..=rounds {
        if budget_exhausted {
            break;
        }
        if cfg.mode.uses_surrogate() {
            surrogate = Some(Surrogate::fit(cfg.surrogate_kind, &set, derive_seed(seed, &[tag::SURROGATE, round as u64]))?);
            ctx.counters.surrogate_refits += 1;
        }
        if round == 1 {
            pop = ctx.individuals(&initial, 0, surrogate.as_ref())?;
        } else if let Some(s) = surrogate.as_ref() {
            for ind in &mut pop {
                ind.meta.surrogate = Some(s.predict(&ctx.gates.embed(&ind.genome)));
                ind.objectives = objectives(cfg.mode, &ind.meta);
            }
        }
        pop = select_survivors(&pop, &[], n)?.survivors;

        for _ in 0..cfg.surrogate_update_interval {
            generation += 1;
            let kids = offspring(&pop, &params, seed, generation);
            let q = ctx.individuals(&kids, generation, surrogate.as_ref())?;
            let outcome = select_survivors(&pop, &q, n)?;
            pop = outcome.survivors;
            archive.update(outcome.first_front.iter().map(|i| entry(i, generation)));
            ctx.counters.generations = generation;

            let hv = match cfg.mode {
                Mode::S => None,
                mode => {
                    let pts: Vec<[f64; 2]> = outcome.first_front.iter().filter_map(|i| primary_pair(mode, &i.meta)).map(|(a, b)| [a, b]).collect();
                    Some(hypervolume(&pts, &[1.0, 1.0])?)
                }
            };
            history.push(GenerationRecord {
                generation,
                archive_size: archive.len(),
                hypervolume: hv,
                elapsed_secs: start.elapsed().as_secs_f64(),
                high_evals: ctx.counters.high_evals,
                surrogate_refits: ctx.counters.surrogate_refits,
            });
            if over_budget() {
                budget_exhausted = generation < cfg.max_generations;
                break 'rounds;
            }
        }

        if cfg.mode.uses_surrogate() && round != rounds {
            let genomes: Vec<Genome> = pop.iter().map(|i| i.genome).collect();
            let f3: Vec<f64> = pop.iter().map(|i| i.meta.surrogate.unwrap_or(f64::INFINITY)).collect();
            let embeddings: Vec<_> = genomes.iter().map(|g| ctx.gates.embed(g)).collect();
            let picked: Vec<Genome> = infill_select(&genomes, &f3, &embeddings, &set, cfg.infill_count).into_iter().map(|i| genomes[i]).collect();
            ctx.counters.infill_shortfall += cfg.infill_count - picked.len();
            let scores = ctx.high(&picked)?;
            for (g, (f1h, f2h)) in picked.iter().zip(scores) {
                set.insert(*g, ctx.gates.embed(g), f1h, f2h);
            }
        }
    }

    Ok(SearchOutcome { archive, history, counters: ctx.counters, training_set: set, population: pop, surrogate, budget_exhausted })
}
