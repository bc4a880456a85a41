//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `PHYSKGE_ACCEPTANCE=2,5` runs a subset.

use std::alloc::{GlobalAlloc, Layout, System};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use physkge::engine::{self, init_embeddings, step, EmbeddingState, StopReason};
use physkge::eval::{
    cluster_purity, knn, prediction_contributions, select_sample, type_prediction_score,
};
use physkge::rdf::{parse_ntriples, read_graph};
use physkge::scaling::{scaling_run, ScalingConfig};
use physkge::similarity::{build_positive_sets, build_similarity, count_cooccurrences};
use physkge::synth::{generate_graph, SynthSpec};
use physkge::{Clustering, EmbeddingConfig, Embeddings, KnowledgeGraph, SimilarityGraph, TermId, TypeIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = System.realloc(ptr, layout, new_size);
        if !p.is_null() {
            if new_size >= layout.size() {
                let now = LIVE.fetch_add(new_size - layout.size(), Ordering::Relaxed) + new_size - layout.size();
                PEAK.fetch_max(now, Ordering::Relaxed);
            } else {
                LIVE.fetch_sub(layout.size() - new_size, Ordering::Relaxed);
            }
        }
        p
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

// Pinned tolerances.
const R2_MIN: f64 = 0.99;
const PLANTED_MARGIN: f64 = 0.15;
const MICRO_SLACK: f64 = 1e-12;
const SPACE_RATIO: (f64, f64) = (1.8, 2.2);
const METRIC_TOL: f64 = 1e-9;
const PPMI_WEIGHT_TOL: f64 = 1e-12;

// Desk-scale workloads.
const SCALING_UNIVERSITIES: [usize; 4] = [11, 22, 44, 88];
const SCALING_KS: [usize; 3] = [5, 10, 20];
const SCALING_DIM: usize = 25;
const SCALING_REPEATS: usize = 5;
const PLANTED_UNIVERSITIES: usize = 22;
const PLANTED_SAMPLE: usize = 2000;
const SEEDS_PLANTED: u64 = 5;
const SEEDS_DESCENT: u64 = 10;
const SPACE_UNIVERSITIES: usize = 8;

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("PHYSKGE_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let criteria: [Criterion; 9] = [
        (1, "iteration time is linear in triple count", linearity),
        (2, "planted communities beat random embeddings", planted_structure),
        (3, "objective descends and energy never rises", objective_descent),
        (4, "priority-queue positives equal dense top-K", ppmi_oracle),
        (5, "one-step attraction and repulsion", micro_properties),
        (6, "termination bound", termination),
        (7, "peak memory doubles with the vocabulary", space),
        (8, "purity and prediction worked examples", metric_examples),
        (9, "running example neighbors share a class", running_example),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let started = Instant::now();
        let out = f();
        let secs = started.elapsed().as_secs_f64();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {name} ({secs:.1}s): {}", out.detail);
        if !out.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn linearity() -> Outcome {
    let config = ScalingConfig {
        scales: SCALING_UNIVERSITIES.to_vec(),
        ks: SCALING_KS.to_vec(),
        embedding: EmbeddingConfig {
            dim: SCALING_DIM,
            ..EmbeddingConfig::default()
        },
        repeats: SCALING_REPEATS,
    };
    let reports = match single_thread(|| scaling_run(&config, |_, _| {})) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                passed: false,
                detail: format!("scaling run failed: {e}"),
            }
        }
    };
    let mut detail = String::new();
    let first = &reports[0].points;
    let _ = write!(
        detail,
        "triples {}..{}; ",
        first[0].triples,
        first[first.len() - 1].triples
    );
    let mut passed = true;
    for r in &reports {
        passed &= r.r_squared >= R2_MIN;
        let secs: Vec<String> = r.points.iter().map(|p| format!("{:.2}", p.minutes * 60.0)).collect();
        let _ = write!(detail, "K={} R2={:.4} secs=[{}]; ", r.k, r.r_squared, secs.join(","));
    }
    let _ = write!(detail, "need R2 >= {R2_MIN}");
    Outcome { passed, detail }
}

fn planted_structure() -> Outcome {
    let mut passed = true;
    let mut detail = String::new();
    let mut worst = f64::INFINITY;
    for seed in 0..SEEDS_PLANTED {
        let graph = generate_graph(&SynthSpec::new(PLANTED_UNIVERSITIES, seed)).expect("synthetic graph");
        let types = graph.type_index();
        let config = EmbeddingConfig {
            seed,
            track_objective: false,
            ..EmbeddingConfig::default()
        };
        let (_, outcome) = match engine::embed_graph(&graph, &config) {
            Ok(v) => v,
            Err(e) => {
                return Outcome {
                    passed: false,
                    detail: format!("seed {seed}: {e}"),
                }
            }
        };
        let random = init_embeddings(graph.vocab.len(), &config).current;
        let sample = select_sample(types.typed_subjects(), PLANTED_SAMPLE, seed);
        let mut parts = Vec::new();
        for mu in [1, 3, 5] {
            let ours = type_prediction_score(&outcome.embeddings, &types, &sample, mu).unwrap().score;
            let base = type_prediction_score(&random, &types, &sample, mu).unwrap().score;
            let margin = ours - base;
            worst = worst.min(margin);
            passed &= margin >= PLANTED_MARGIN;
            parts.push(format!("mu{mu} {ours:.3}/{base:.3}"));
        }
        if seed == 0 {
            let _ = write!(detail, "{} triples, |C|={}; ", graph.store.len(), types.num_classes());
        }
        let _ = write!(detail, "seed {seed}: {}; ", parts.join(" "));
    }
    let _ = write!(detail, "min margin {worst:.3}, need >= {PLANTED_MARGIN}");
    Outcome { passed, detail }
}

fn objective_descent() -> Outcome {
    let graph = generate_graph(&SynthSpec::new(PLANTED_UNIVERSITIES, 0)).expect("synthetic graph");
    let mut passed = true;
    let mut ratios = Vec::new();
    for seed in 0..SEEDS_DESCENT {
        let config = EmbeddingConfig {
            seed,
            ..EmbeddingConfig::default()
        };
        let report = match engine::embed_graph(&graph, &config) {
            Ok((_, o)) => o.report,
            Err(e) => {
                return Outcome {
                    passed: false,
                    detail: format!("seed {seed}: {e}"),
                }
            }
        };
        let j0 = report.initial_objective.unwrap();
        let j1 = report.final_objective().unwrap();
        let mut energy = 1.0;
        let monotone = report.records.iter().all(|r| {
            let ok = r.energy <= energy;
            energy = r.energy;
            ok
        });
        passed &= j1 < j0 && monotone;
        ratios.push(format!("{:.2e}->{:.2e}{}", j0, j1, if monotone { "" } else { " energy rose" }));
    }
    Outcome {
        passed,
        detail: format!("J initial->final over {SEEDS_DESCENT} seeds: {}", ratios.join(", ")),
    }
}

/// Random N-Triples text over at most 50 IRIs and blank nodes.
fn random_ntriples(rng: &mut ChaCha8Rng) -> String {
    let terms = rng.gen_range(3..=50);
    let preds = rng.gen_range(1..=(terms - 1).min(6));
    let name = |i: usize| {
        if i < preds {
            format!("<http://p/{i}>")
        } else if i.is_multiple_of(7) {
            format!("_:b{i}")
        } else {
            format!("<http://t/{i}>")
        }
    };
    let mut out = String::new();
    for _ in 0..rng.gen_range(1..=90) {
        let s = name(rng.gen_range(preds..terms));
        let p = name(rng.gen_range(0..preds));
        let o = if rng.gen_bool(0.1) {
            format!("\"v{}\"", rng.gen_range(0..5))
        } else if rng.gen_bool(0.05) {
            s.clone()
        } else {
            name(rng.gen_range(0..terms))
        };
        let _ = writeln!(out, "{s} {p} {o} .");
    }
    out
}

fn ppmi_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = Vec::new();
    let mut checked_rows = 0;
    for case in 0..50 {
        let src = random_ntriples(&mut rng);
        let graph = parse_ntriples(src.as_bytes()).expect("generated N-Triples parse");
        let m = graph.vocab.len();
        assert!(m <= 50);
        let k = rng.gen_range(1..=10);

        // Dense counts straight from the triple list.
        let mut freq = vec![0u64; m];
        let mut pair = vec![vec![0u64; m]; m];
        let triples = graph.store.triples();
        for t in triples {
            let mut ids = vec![t.subject, t.predicate];
            if let Some(o) = t.object.term() {
                ids.push(o);
            }
            ids.sort_unstable();
            ids.dedup();
            for &a in &ids {
                freq[a as usize] += 1;
                for &b in &ids {
                    if a != b {
                        pair[a as usize][b as usize] += 1;
                    }
                }
            }
        }
        let total = triples.len() as u128;
        let positives = build_positive_sets(&count_cooccurrences(&graph), k).unwrap();
        for x in 0..m {
            // Rank by the exact ratio c*|G| / (f(x) f(y)); PPMI is positive iff it exceeds 1.
            let mut cand: Vec<(u128, u128, TermId)> = (0..m)
                .filter(|&y| y != x && pair[x][y] > 0)
                .map(|y| (pair[x][y] as u128 * total, freq[x] as u128 * freq[y] as u128, y as TermId))
                .filter(|&(num, den, _)| num > den)
                .collect();
            cand.sort_by(|a, b| (b.0 * a.1).cmp(&(a.0 * b.1)).then(a.2.cmp(&b.2)));
            cand.truncate(k);
            let want_ids: Vec<TermId> = cand.iter().map(|c| c.2).collect();
            let (ids, weights) = positives.of(x as TermId);
            let weights_ok = cand
                .iter()
                .zip(weights)
                .all(|(c, &w)| ((c.0 as f64 / c.1 as f64).ln() - w).abs() <= PPMI_WEIGHT_TOL);
            if ids != want_ids.as_slice() || !weights_ok {
                mismatches.push(format!("case {case} term {x}"));
            }
            checked_rows += 1;
        }
    }
    Outcome {
        passed: mismatches.is_empty(),
        detail: format!(
            "50 graphs, {checked_rows} rows compared, {} mismatches {}",
            mismatches.len(),
            mismatches.iter().take(5).cloned().collect::<Vec<_>>().join(", ")
        ),
    }
}

fn pair_state(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingState {
    let data: Vec<f64> = (0..2 * dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
    EmbeddingState::from_positions(Embeddings::from_vec(2, dim, data))
}

fn pair_distance(s: &Embeddings) -> f64 {
    physkge::matrix::euclidean(s.row(0), s.row(1))
}

fn micro_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut attract_fail = 0;
    let mut repel_fail = 0;
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=2);
        let mut state = pair_state(&mut rng, dim);
        let energy = rng.gen_range(0.01..=1.0);
        let product: f64 = rng.gen_range(1e-3..0.999);
        let sigma = product / energy;
        state.energy = energy;
        let sim = SimilarityGraph::from_lists(vec![vec![(1, sigma)], vec![(0, sigma)]], vec![vec![], vec![]], 1.0);
        let before = pair_distance(&state.current);
        step(&mut state, &sim, &EmbeddingConfig { dim, ..EmbeddingConfig::default() }).unwrap();
        if pair_distance(&state.current).partial_cmp(&(before - MICRO_SLACK)) != Some(std::cmp::Ordering::Less) {
            attract_fail += 1;
        }
    }
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=2);
        let mut state = pair_state(&mut rng, dim);
        state.energy = rng.gen_range(0.01..=1.0);
        let omega = rng.gen_range(0.01..=5.0);
        let sim = SimilarityGraph::from_lists(vec![vec![], vec![]], vec![vec![1], vec![0]], omega);
        let before = pair_distance(&state.current);
        step(&mut state, &sim, &EmbeddingConfig { dim, omega, ..EmbeddingConfig::default() }).unwrap();
        if pair_distance(&state.current).partial_cmp(&(before + MICRO_SLACK)) != Some(std::cmp::Ordering::Greater) {
            repel_fail += 1;
        }
    }
    Outcome {
        passed: attract_fail == 0 && repel_fail == 0,
        detail: format!(
            "positive pairs failing to approach {attract_fail}/1000, negative pairs failing to separate {repel_fail}/1000 (slack {MICRO_SLACK:e})"
        ),
    }
}

fn termination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = Vec::new();
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for case in 0..100 {
        let graph = parse_ntriples(random_ntriples(&mut rng).as_bytes()).unwrap();
        let config = EmbeddingConfig {
            dim: rng.gen_range(1..=16),
            k: rng.gen_range(1..=8),
            max_iters: rng.gen_range(1..=80),
            epsilon: 10f64.powf(rng.gen_range(-12.0..-1.0)),
            delta_e: rng.gen_range(0.005..=1.0),
            omega: rng.gen_range(0.05..=3.0),
            seed: case,
            track_objective: false,
            ..EmbeddingConfig::default()
        };
        let report = match engine::embed_graph(&graph, &config) {
            Ok((_, o)) => o.report,
            Err(e) => {
                violations.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let bound = config.max_iters.min((1.0 / config.delta_e).ceil() as usize + 1);
        let iterations = report.iterations();
        let first_zero = report.records.iter().position(|r| r.displacement == 0.0);
        let ok = iterations <= config.max_iters
            && iterations <= bound
            && first_zero.is_none_or(|i| i + 1 == iterations);
        if !ok {
            violations.push(format!("case {case}: {iterations} sweeps, bound {bound}"));
        }
        *reasons.entry(format!("{:?}", report.stop_reason)).or_default() += 1;
    }
    Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "100 random configs, stop reasons {:?}, violations {:?}",
            reasons,
            violations.iter().take(5).collect::<Vec<_>>()
        ),
    }
}

/// Peak bytes allocated on top of what was live before `f` ran.
fn peak_during<T>(f: impl FnOnce() -> T) -> (T, usize) {
    let base = LIVE.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    let out = f();
    (out, PEAK.load(Ordering::SeqCst) - base)
}

fn space() -> Outcome {
    let config = EmbeddingConfig {
        dim: 25,
        k: 10,
        max_iters: 5,
        track_objective: false,
        ..EmbeddingConfig::default()
    };
    let measure = |universities: usize| {
        let graph = generate_graph(&SynthSpec::new(universities, 1)).unwrap();
        let m = graph.vocab.len();
        let (_, peak) = single_thread(|| {
            peak_during(|| {
                let stats = count_cooccurrences(&graph);
                let sim = build_similarity(&stats, config.k, config.omega, config.seed).unwrap();
                drop(stats);
                engine::run(&graph.vocab, &sim, &config).unwrap()
            })
        });
        (m, peak)
    };
    let (m1, p1) = measure(SPACE_UNIVERSITIES);
    let (m2, p2) = measure(2 * SPACE_UNIVERSITIES);
    let ratio = p2 as f64 / p1 as f64;
    let matrices = 2 * m1 * config.dim * 8;
    Outcome {
        passed: (SPACE_RATIO.0..=SPACE_RATIO.1).contains(&ratio),
        detail: format!(
            "m {m1} -> {m2} ({:.3}x), peak {p1} -> {p2} bytes, ratio {ratio:.3} (need {:?}); position matrices are {:.0}% of the smaller peak",
            m2 as f64 / m1 as f64,
            SPACE_RATIO,
            100.0 * matrices as f64 / p1 as f64
        ),
    }
}

fn metric_examples() -> Outcome {
    let types = TypeIndex::from_assignments(vec![100, 101], vec![(0, vec![0]), (1, vec![1]), (2, vec![0]), (3, vec![0])]);
    let mut checks: Vec<(&str, f64, f64)> = Vec::new();

    let same = Clustering::new(vec![(0, Some(0)), (2, Some(0)), (3, Some(0))], 1).unwrap();
    checks.push(("purity, one single-type cluster", cluster_purity(&same, &types).unwrap(), 1.0));

    let split = Clustering::new(vec![(0, Some(0)), (1, Some(0))], 1).unwrap();
    // (1/4)(cos(x,x) + cos(x,y) + cos(y,x) + cos(y,y)) = (1/4)(1 + 0 + 0 + 1)
    checks.push(("purity, orthogonal pair", cluster_purity(&split, &types).unwrap(), (1.0 + 0.0 + 0.0 + 1.0) / 4.0));

    // mu = 1 and the nearest neighbor has the same type vector.
    let e = Embeddings::from_vec(4, 1, vec![0.0, 10.0, 0.5, 20.0]);
    let c = prediction_contributions(&e, &types, &[0, 1, 2], 1).unwrap();
    checks.push(("prediction, identical neighbor", c[0].unwrap(), 1.0));

    // type(x) = (1,0); neighbors of types (1,0) and (0,1) sum to (1,1).
    let c = prediction_contributions(&e, &types, &[0, 1, 2], 2).unwrap();
    checks.push(("prediction, neighbor sum (1,1)", c[0].unwrap(), 1.0 / 2f64.sqrt()));
    let score = type_prediction_score(&e, &types, &[0, 1, 2], 2).unwrap().score;
    // Terms 0 and 2 each see (1,1) -> 1/sqrt 2; term 1 sees (2,0) against (0,1) -> 0.
    checks.push(("prediction score, mean of three", score, (2.0 / 2f64.sqrt()) / 3.0));

    let nn = knn(&Embeddings::from_vec(3, 1, vec![0.0, 1.0, 3.0]), &[0, 1, 2], 0, 2).unwrap();
    let knn_ok = nn.neighbors == [1, 2];

    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > METRIC_TOL)
        .map(|(n, got, want)| format!("{n}: {got} vs {want}"))
        .collect();
    Outcome {
        passed: bad.is_empty() && knn_ok,
        detail: format!(
            "{} values within {METRIC_TOL:e}, knn ordering {}; {}",
            checks.len() - bad.len(),
            if knn_ok { "ok" } else { "wrong" },
            bad.join("; ")
        ),
    }
}

fn running_example_graph() -> KnowledgeGraph {
    read_graph(concat!(env!("CARGO_MANIFEST_DIR"), "/data/running_example.nt")).expect("bundled example")
}

/// Typed subjects whose nearest typed neighbor shares none of their classes.
fn nearest_typed_mismatches(graph: &KnowledgeGraph, types: &TypeIndex, e: &Embeddings) -> Vec<String> {
    let pool = types.typed_subjects();
    pool.iter()
        .filter_map(|&x| {
            let y = knn(e, pool, x, 1).ok()?.neighbors[0];
            (!types.shares_class(x, y)).then(|| format!("{} -> {}", graph.vocab.term(x), graph.vocab.term(y)))
        })
        .collect()
}

fn running_example() -> Outcome {
    let graph = running_example_graph();
    let types = graph.type_index();
    let mut passed = true;
    let mut parts = Vec::new();
    for seed in 0..5 {
        let config = EmbeddingConfig {
            k: 3,
            delta_e: 0.06,
            epsilon: 1e-3,
            dim: 50,
            omega: 0.3,
            seed,
            ..EmbeddingConfig::default()
        };
        let (_, outcome) = match engine::embed_graph(&graph, &config) {
            Ok(v) => v,
            Err(e) => {
                return Outcome {
                    passed: false,
                    detail: format!("seed {seed}: {e}"),
                }
            }
        };
        let converged = outcome.report.stop_reason != StopReason::IterationCap;
        let bad = nearest_typed_mismatches(&graph, &types, &outcome.embeddings);
        passed &= converged && bad.is_empty();
        parts.push(format!(
            "seed {seed}: {} sweeps {:?}{}",
            outcome.report.iterations(),
            outcome.report.stop_reason,
            if bad.is_empty() { String::new() } else { format!(" mismatches {bad:?}") }
        ));
    }
    Outcome {
        passed,
        detail: format!("{} typed subjects; {}", types.typed_subjects().len(), parts.join("; ")),
    }
}

