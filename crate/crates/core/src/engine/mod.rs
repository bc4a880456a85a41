//! The force iteration.
//!
//! Every sweep is synchronous (Jacobi style): forces for all terms are read
//! from the `previous` matrix and the new positions are written to `current`,
//! one row per term. Rows are independent, so the sweep runs in parallel and
//! the trajectory is bit-identical for any thread count.

mod config;
mod forces;

use std::time::Instant;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{EmbeddingConfig, EnergySchedule, RepulsionMode, DIVISION_GUARD};

use crate::error::{Error, Result};
use crate::matrix::{euclidean, Embeddings};
use crate::rdf::{KnowledgeGraph, TermId, Vocabulary};
use crate::similarity::{build_similarity, count_cooccurrences, SimilarityGraph};
use config::ENERGY_FLOOR;
use forces::{add_attraction, add_repulsion, prefetch_negatives};

/// Positions at the last two time steps plus the annealing state.
#[derive(Clone, Debug)]
pub struct EmbeddingState {
    pub current: Embeddings,
    pub previous: Embeddings,
    /// System energy; starts at 1.
    pub energy: f64,
    /// Number of completed sweeps.
    pub iteration: usize,
}

impl EmbeddingState {
    /// Starts from explicit positions (both matrices equal, energy 1).
    pub fn from_positions(positions: Embeddings) -> Self {
        Self {
            previous: positions.clone(),
            current: positions,
            energy: 1.0,
            iteration: 0,
        }
    }
}

/// ChaCha stream for initialization. Negative sampling uses streams below
/// `2^32` (one per term), so one root seed serves both stages independently.
const INIT_STREAM: u64 = 1 << 32;

/// Random start: every coordinate i.i.d. uniform in `[-init_scale, init_scale]`.
pub fn init_embeddings(terms: usize, config: &EmbeddingConfig) -> EmbeddingState {
    let mut m = Embeddings::zeros(terms, config.dim);
    if config.init_scale > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(INIT_STREAM);
        let dist = Uniform::new_inclusive(-config.init_scale, config.init_scale);
        for v in m.as_mut_slice() {
            *v = dist.sample(&mut rng);
        }
    }
    EmbeddingState::from_positions(m)
}

/// Total attractive force on `x`, read from `state.previous`.
pub fn attractive_force(x: TermId, state: &EmbeddingState, sim: &SimilarityGraph) -> Vec<f64> {
    let mut f = vec![0.0; state.previous.dim()];
    add_attraction(x, &state.previous, sim, &mut f);
    f
}

/// Total repulsive force on `x`, read from `state.previous`.
pub fn repulsive_force(
    x: TermId,
    state: &EmbeddingState,
    sim: &SimilarityGraph,
    mode: RepulsionMode,
) -> Vec<f64> {
    let mut f = vec![0.0; state.previous.dim()];
    add_repulsion(x, &state.previous, sim, mode, &mut f);
    f
}

/// One synchronous sweep: `x_t = x_{t-1} + E * (F_a + F_r)` for every term,
/// then the energy release. Returns `sum_x |x_t - x_{t-1}|`.
pub fn step(state: &mut EmbeddingState, sim: &SimilarityGraph, config: &EmbeddingConfig) -> Result<f64> {
    let terms = state.current.rows();
    let dim = state.current.dim();
    std::mem::swap(&mut state.current, &mut state.previous);
    let energy = state.energy;
    let prev = &state.previous;
    let mode = config.repulsion;

    let mut displacement = vec![0.0; terms];
    state
        .current
        .as_mut_slice()
        .par_chunks_mut(dim)
        .zip(displacement.par_iter_mut())
        .enumerate()
        .for_each(|(x, (row, disp))| {
            let old = prev.row(x);
            if energy == 0.0 {
                row.copy_from_slice(old);
                *disp = 0.0;
                return;
            }
            // The output row doubles as the force accumulator.
            prefetch_negatives(x as TermId, prev, sim);
            row.fill(0.0);
            add_attraction(x as TermId, prev, sim, row);
            add_repulsion(x as TermId, prev, sim, mode, row);
            let mut sq = 0.0;
            for (r, &a) in row.iter_mut().zip(old) {
                let moved = a + energy * *r;
                sq += (moved - a) * (moved - a);
                *r = moved;
            }
            *disp = sq.sqrt();
        });

    state.iteration += 1;
    if let Some(x) = state.current.first_non_finite_row() {
        return Err(Error::Divergence {
            iteration: state.iteration,
            term_id: x as TermId,
            term: format!("#{x}"),
        });
    }
    state.energy = match config.energy_schedule {
        EnergySchedule::Clamped => {
            let e = state.energy - config.delta_e;
            if e < ENERGY_FLOOR {
                0.0
            } else {
                e
            }
        }
        EnergySchedule::Strict => state.energy - config.delta_e,
    };
    // Sequential sum keeps the result independent of the thread count.
    Ok(displacement.iter().sum())
}

/// `J = sum_x sum_{P(x)} d(x, y) - sum_x sum_{N(x)} d(x, y)` on `state.current`.
pub fn objective(state: &EmbeddingState, sim: &SimilarityGraph) -> f64 {
    objective_of(&state.current, sim)
}

pub fn objective_of(positions: &Embeddings, sim: &SimilarityGraph) -> f64 {
    let per_term: Vec<f64> = (0..positions.rows())
        .into_par_iter()
        .map(|x| {
            let px = positions.row(x);
            let (pos, _) = sim.positives(x as TermId);
            let attract: f64 = pos.iter().map(|&y| euclidean(px, positions.row(y as usize))).sum();
            let repel: f64 = sim
                .negatives(x as TermId)
                .iter()
                .map(|&y| euclidean(px, positions.row(y as usize)))
                .sum();
            attract - repel
        })
        .collect();
    per_term.iter().sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Summed displacement fell below epsilon while energy was still positive.
    Converged,
    /// Energy reached zero, so the last sweep moved nothing.
    EnergyExhausted,
    IterationCap,
}

/// One line of the run report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    /// Objective after the sweep; absent when tracking is disabled.
    #[serde(rename = "J")]
    pub objective: Option<f64>,
    pub displacement: f64,
    /// Energy after the release that follows the sweep.
    pub energy: f64,
    /// Wall-clock time of the sweep alone.
    pub millis: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<IterationRecord>,
    pub initial_objective: Option<f64>,
    pub stop_reason: StopReason,
    /// Time spent drawing the initial positions.
    pub init_millis: f64,
    /// Sum of the sweep times.
    pub iteration_millis: f64,
}

impl RunReport {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.objective).or(self.initial_objective)
    }

    /// One JSON object per iteration, newline separated.
    pub fn write_json_lines<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub embeddings: Embeddings,
    pub report: RunReport,
}

/// Initializes positions and iterates until the sweep cap, the displacement
/// threshold, or energy exhaustion.
pub fn run(vocab: &Vocabulary, sim: &SimilarityGraph, config: &EmbeddingConfig) -> Result<RunOutcome> {
    run_with(vocab, sim, config, |_| {})
}

/// Like [`run`], calling `on_iteration` after every sweep.
pub fn run_with(
    vocab: &Vocabulary,
    sim: &SimilarityGraph,
    config: &EmbeddingConfig,
    on_iteration: impl FnMut(&IterationRecord),
) -> Result<RunOutcome> {
    config.validate()?;
    if sim.num_terms() != vocab.len() {
        return Err(Error::Config(format!(
            "similarity graph covers {} terms but the vocabulary has {}",
            sim.num_terms(),
            vocab.len()
        )));
    }
    let started = Instant::now();
    let state = init_embeddings(vocab.len(), config);
    let init_millis = started.elapsed().as_secs_f64() * 1e3;
    let (state, mut report) = iterate(state, sim, config, on_iteration).map_err(|e| match e {
        Error::Divergence {
            iteration, term_id, ..
        } => Error::Divergence {
            iteration,
            term_id,
            term: vocab.term(term_id).to_owned(),
        },
        e => e,
    })?;
    report.init_millis = init_millis;
    Ok(RunOutcome {
        embeddings: state.current,
        report,
    })
}

/// The whole pipeline on a loaded graph: co-occurrence counts, positive and
/// negative sets, then [`run`]. `config.seed` drives both random stages.
pub fn embed_graph(graph: &KnowledgeGraph, config: &EmbeddingConfig) -> Result<(SimilarityGraph, RunOutcome)> {
    config.validate()?;
    let stats = count_cooccurrences(graph);
    let sim = build_similarity(&stats, config.k, config.omega, config.seed)?;
    let outcome = run(&graph.vocab, &sim, config)?;
    Ok((sim, outcome))
}

/// The loop on an existing state.
pub fn iterate(
    mut state: EmbeddingState,
    sim: &SimilarityGraph,
    config: &EmbeddingConfig,
    mut on_iteration: impl FnMut(&IterationRecord),
) -> Result<(EmbeddingState, RunReport)> {
    config.validate()?;
    let initial_objective = config.track_objective.then(|| objective(&state, sim));
    let mut records = Vec::new();
    let mut iteration_millis = 0.0;
    let mut stop_reason = StopReason::IterationCap;
    while state.iteration < config.max_iters {
        let energy_before = state.energy;
        let started = Instant::now();
        let displacement = step(&mut state, sim, config)?;
        let millis = started.elapsed().as_secs_f64() * 1e3;
        iteration_millis += millis;
        let record = IterationRecord {
            t: state.iteration,
            objective: config.track_objective.then(|| objective(&state, sim)),
            displacement,
            energy: state.energy,
            millis,
        };
        on_iteration(&record);
        records.push(record);
        if displacement < config.epsilon {
            stop_reason = if energy_before == 0.0 {
                StopReason::EnergyExhausted
            } else {
                StopReason::Converged
            };
            break;
        }
    }
    Ok((
        state,
        RunReport {
            records,
            initial_objective,
            stop_reason,
            init_millis: 0.0,
            iteration_millis,
        },
    ))
}
