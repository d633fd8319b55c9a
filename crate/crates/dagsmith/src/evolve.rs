//! The generational search loop: random initialization, lexicase parent
//! selection, UMAD variation, and post-run genome simplification.
//!
//! Determinism contract: one base seed fans out (via [`derive_seed`]) into
//! separate streams for case generation, population initialization, the
//! selection/variation loop, and simplification. Fitness evaluation consumes
//! no randomness, so it can run on a thread pool without changing results —
//! a run is a pure function of (problem, config).

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{derive_seed, Case, Problem};
use crate::codegen::emit;
use crate::dag::{evaluate_with_budget, ProgramDag, DEFAULT_NODE_BUDGET};
use crate::expr::{GeneWeights, Registry};
use crate::push::{compile, format_genome, plushy_to_push, Gene, PlushyGenome};
use crate::value::Value;

// ---- Configuration ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// UMAD addition rate; the paired deletion rate `r/(1+r)` keeps genome
    /// length neutral in expectation.
    pub umad_rate: f64,
    /// Error assigned per case on compile failure or runtime error; also the
    /// cap for finite case errors.
    pub penalty: f64,
    pub seed: u64,
    pub training_cases: usize,
    pub test_cases: usize,
    /// Hill-climbing deletion attempts after a solution is found.
    pub simplification_steps: usize,
    /// Inclusive length range for random initial genomes.
    pub init_len: (usize, usize),
    pub weights: GeneWeights,
    pub node_budget: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            population_size: 1000,
            max_generations: 300,
            umad_rate: 0.09,
            penalty: 1e6,
            seed: 0,
            training_cases: 100,
            test_cases: 1000,
            simplification_steps: 1000,
            init_len: (20, 100),
            weights: GeneWeights::default(),
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("population_size must be positive")]
    EmptyPopulation,
    #[error("max_generations must be positive")]
    NoGenerations,
    #[error("umad_rate must lie in (0, 1), got {0}")]
    BadUmadRate(f64),
    #[error("penalty must be positive and finite, got {0}")]
    BadPenalty(f64),
    #[error("training_cases must be positive")]
    NoTrainingCases,
    #[error("init_len range ({0}, {1}) is empty or starts at zero")]
    BadInitLen(usize, usize),
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::EmptyPopulation);
        }
        if self.max_generations == 0 {
            return Err(ConfigError::NoGenerations);
        }
        if !(self.umad_rate > 0.0 && self.umad_rate < 1.0) {
            return Err(ConfigError::BadUmadRate(self.umad_rate));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(ConfigError::BadPenalty(self.penalty));
        }
        if self.training_cases == 0 {
            return Err(ConfigError::NoTrainingCases);
        }
        if self.init_len.0 == 0 || self.init_len.0 > self.init_len.1 {
            return Err(ConfigError::BadInitLen(self.init_len.0, self.init_len.1));
        }
        Ok(())
    }
}

// ---- Individuals and evaluation --------------------------------------------

#[derive(Debug, Clone)]
pub struct Individual {
    pub genome: PlushyGenome,
    /// Per-training-case error, clamped to `[0, penalty]`.
    pub errors: Vec<f64>,
    pub total_error: f64,
    /// The compiled program, when compilation succeeded.
    pub program: Option<ProgramDag>,
}

impl Individual {
    pub fn is_solution(&self) -> bool {
        self.total_error == 0.0
    }
}

/// Grades genomes against a fixed case set. Carries no RNG, so evaluation
/// parallelizes without affecting determinism.
pub struct Evaluator<'a> {
    reg: &'a Registry,
    problem: &'a Problem,
    /// Per-case named inputs, prebuilt once.
    named: Vec<Vec<(String, Value)>>,
    cases: &'a [Case],
    penalty: f64,
    node_budget: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        problem: &'a Problem,
        reg: &'a Registry,
        cases: &'a [Case],
        penalty: f64,
        node_budget: u64,
    ) -> Self {
        let named = cases
            .iter()
            .map(|c| {
                problem
                    .inputs
                    .iter()
                    .map(|(n, _)| n.clone())
                    .zip(c.inputs.iter().cloned())
                    .collect()
            })
            .collect();
        Evaluator {
            reg,
            problem,
            named,
            cases,
            penalty,
            node_budget,
        }
    }

    pub fn case_count(&self) -> usize {
        self.cases.len()
    }

    /// Compiles once and grades every case. Compile failure earns the penalty
    /// on all cases; runtime errors and non-finite case errors earn it on
    /// that case.
    pub fn grade(&self, genome: &PlushyGenome) -> Individual {
        let push = plushy_to_push(genome);
        let dag = match compile(&push, &self.problem.return_type, self.reg) {
            Ok(d) => d,
            Err(_) => {
                let errors = vec![self.penalty; self.cases.len()];
                return Individual {
                    genome: genome.clone(),
                    total_error: errors.iter().sum(),
                    errors,
                    program: None,
                };
            }
        };
        let errors: Vec<f64> = self
            .cases
            .iter()
            .zip(&self.named)
            .map(|(case, named)| {
                match evaluate_with_budget(&dag, named, self.node_budget) {
                    Ok(out) => {
                        let e = (self.problem.error_fn)(&out.value, &out.printed, case);
                        if e.is_finite() {
                            e.min(self.penalty)
                        } else {
                            self.penalty
                        }
                    }
                    Err(_) => self.penalty,
                }
            })
            .collect();
        Individual {
            genome: genome.clone(),
            total_error: errors.iter().sum(),
            errors,
            program: Some(dag),
        }
    }
}

// ---- Operators -------------------------------------------------------------

/// A fresh genome of uniformly random length within `len_range`.
pub fn random_genome<R: Rng>(
    reg: &Registry,
    weights: &GeneWeights,
    len_range: (usize, usize),
    rng: &mut R,
) -> PlushyGenome {
    let len = rng.random_range(len_range.0..=len_range.1);
    PlushyGenome::new((0..len).map(|_| reg.random_gene(weights, rng)).collect())
}

/// Lexicase parent selection: filter the population through the training
/// cases in a random order, keeping only the individuals tied for best on
/// each case; pick uniformly among whatever survives.
pub fn lexicase_select<'p, R: Rng>(pop: &'p [Individual], rng: &mut R) -> &'p Individual {
    assert!(!pop.is_empty(), "lexicase over an empty population");
    let n_cases = pop[0].errors.len();
    let mut order: Vec<usize> = (0..n_cases).collect();
    order.shuffle(rng);
    let mut survivors: Vec<usize> = (0..pop.len()).collect();
    for &case in &order {
        if survivors.len() <= 1 {
            break;
        }
        let best = survivors
            .iter()
            .map(|&i| pop[i].errors[case])
            .fold(f64::INFINITY, f64::min);
        survivors.retain(|&i| pop[i].errors[case] == best);
    }
    &pop[survivors[rng.random_range(0..survivors.len())]]
}

/// Uniform mutation by addition and deletion. Each gene gains a random
/// neighbor with probability `rate` (before or after, coin flip); the
/// combined genome then loses each gene with probability `rate/(1+rate)`,
/// which exactly cancels the expected growth.
pub fn umad<R: Rng>(
    genome: &PlushyGenome,
    reg: &Registry,
    weights: &GeneWeights,
    rate: f64,
    rng: &mut R,
) -> PlushyGenome {
    let mut grown: Vec<Gene> = Vec::with_capacity(genome.0.len() + 4);
    for g in &genome.0 {
        if rng.random_bool(rate) {
            let new = reg.random_gene(weights, rng);
            if rng.random_bool(0.5) {
                grown.push(new);
                grown.push(g.clone());
            } else {
                grown.push(g.clone());
                grown.push(new);
            }
        } else {
            grown.push(g.clone());
        }
    }
    let del = rate / (1.0 + rate);
    let kept = grown.into_iter().filter(|_| !rng.random_bool(del)).collect();
    PlushyGenome::new(kept)
}

/// Greedy post-run cleanup: repeatedly delete 1–3 random genes and keep the
/// shorter genome whenever no training case gets worse. The returned errors
/// are element-wise ≤ the starting errors by construction (asserted).
pub fn simplify(
    genome: &PlushyGenome,
    errors: &[f64],
    ev: &Evaluator<'_>,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> (PlushyGenome, Vec<f64>) {
    let mut cur = genome.clone();
    let mut cur_errors = errors.to_vec();
    for _ in 0..steps {
        if cur.0.is_empty() {
            break;
        }
        let k = rng.random_range(1..=3usize).min(cur.0.len());
        let mut idx: Vec<usize> = (0..cur.0.len()).collect();
        idx.shuffle(rng);
        let mut drop: Vec<usize> = idx[..k].to_vec();
        drop.sort_unstable();
        let candidate = PlushyGenome::new(
            cur.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, g)| g.clone())
                .collect(),
        );
        let graded = ev.grade(&candidate);
        let no_worse = graded
            .errors
            .iter()
            .zip(&cur_errors)
            .all(|(new, old)| new <= old);
        if no_worse {
            cur = candidate;
            cur_errors = graded.errors;
        }
    }
    for (new, old) in cur_errors.iter().zip(errors) {
        assert!(new <= old, "simplification worsened a case: {new} > {old}");
    }
    (cur, cur_errors)
}

// ---- The run loop ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenStats {
    pub generation: usize,
    pub best_total_error: f64,
    pub mean_total_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub seed: u64,
    pub config: RunConfig,
    /// A zero-training-error individual appeared.
    pub solved: bool,
    /// The simplified solution also has zero error on every held-out test
    /// case. Always false when `solved` is false.
    pub generalizes: bool,
    /// Generations evaluated (including the one that produced the solution).
    pub generations: usize,
    pub best_total_error: f64,
    pub genome_length: Option<usize>,
    pub pre_simplification_length: Option<usize>,
    pub history: Vec<GenStats>,
    /// Emitted source for the simplified solution.
    pub source: Option<String>,
    /// Genome text (one gene per line) for the simplified solution.
    pub genome: Option<String>,
    pub wall_ms: u64,
}

impl RunReport {
    /// The report as JSON with wall-clock time removed — every remaining
    /// field is a pure function of (problem, config), so canonical reports
    /// are byte-comparable across machines and thread counts.
    pub fn canonical(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut()
            .expect("report is a JSON object")
            .remove("wall_ms");
        v
    }
}

/// Runs the full pipeline on one problem: generate cases, evolve until a
/// training solution appears or generations run out, simplify, and grade
/// against held-out cases.
pub fn run_evolution(problem: &Problem, config: &RunConfig) -> RunReport {
    config.validate().expect("invalid run configuration");
    let started = std::time::Instant::now();
    let reg = problem.registry();
    let (train, test) = problem.generate(config.seed, config.training_cases, config.test_cases);
    let ev = Evaluator::new(problem, &reg, &train, config.penalty, config.node_budget);

    let mut rng_init = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 2));
    let mut rng_loop = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 3));

    let mut genomes: Vec<PlushyGenome> = (0..config.population_size)
        .map(|_| random_genome(&reg, &config.weights, config.init_len, &mut rng_init))
        .collect();

    let mut history: Vec<GenStats> = Vec::new();
    let mut winner: Option<Individual> = None;
    let mut best_seen = f64::INFINITY;

    for generation in 0..config.max_generations {
        let pop: Vec<Individual> = genomes.par_iter().map(|g| ev.grade(g)).collect();
        let best = pop.iter().map(|i| i.total_error).fold(f64::INFINITY, f64::min);
        let mean = pop.iter().map(|i| i.total_error).sum::<f64>() / pop.len() as f64;
        history.push(GenStats {
            generation,
            best_total_error: best,
            mean_total_error: mean,
        });
        best_seen = best_seen.min(best);
        if let Some(w) = pop.iter().find(|i| i.is_solution()) {
            winner = Some(w.clone());
            break;
        }
        genomes = (0..config.population_size)
            .map(|_| {
                let parent = lexicase_select(&pop, &mut rng_loop);
                umad(&parent.genome, &reg, &config.weights, config.umad_rate, &mut rng_loop)
            })
            .collect();
    }

    let mut report = RunReport {
        problem: problem.name.to_string(),
        seed: config.seed,
        config: config.clone(),
        solved: winner.is_some(),
        generalizes: false,
        generations: history.len(),
        best_total_error: best_seen,
        genome_length: None,
        pre_simplification_length: None,
        history,
        source: None,
        genome: None,
        wall_ms: 0,
    };

    if let Some(w) = winner {
        let mut rng_simp = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 4));
        let (simplified, _) =
            simplify(&w.genome, &w.errors, &ev, config.simplification_steps, &mut rng_simp);
        let graded = ev.grade(&simplified);
        assert!(graded.is_solution(), "simplified genome must still solve training");
        let test_ev = Evaluator::new(problem, &reg, &test, config.penalty, config.node_budget);
        let on_test = test_ev.grade(&simplified);
        report.generalizes = on_test.is_solution();
        report.pre_simplification_length = Some(w.genome.0.len());
        report.genome_length = Some(simplified.0.len());
        let params: Vec<String> = problem.inputs.iter().map(|(n, _)| n.clone()).collect();
        let dag = graded.program.as_ref().expect("solution compiles");
        report.source = Some(emit(dag, problem.fn_name, &params).text());
        report.genome = Some(format_genome(&simplified));
    }

    report.wall_ms = started.elapsed().as_millis() as u64;
    report
}

// ---- Tests -----------------------------------------------------------------
