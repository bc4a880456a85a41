use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use physkge::engine::{self, IterationRecord};
use physkge::eval::{self, Clustering, EvalReport, PurityOptions};
use physkge::persist::{read_embeddings, write_embeddings};
use physkge::rdf::{read_graphs, write_cache, KnowledgeGraph, TypeIndex};
use physkge::scaling::{scaling_run, ScalingConfig};
use physkge::similarity::{build_similarity, count_cooccurrences_with, CooccurrenceOptions, CooccurrenceStats};
use physkge::synth::{generate_to_path, SynthSpec};
use serde::Serialize;

use crate::args::{CountingArgs, EmbedArgs, EvalArgs, GenerateArgs, IngestArgs, ScalingArgs};

fn load(paths: &[impl AsRef<Path>]) -> Result<KnowledgeGraph> {
    let names: Vec<_> = paths.iter().map(|p| p.as_ref().display().to_string()).collect();
    let graph = read_graphs(paths).with_context(|| format!("reading {}", names.join(", ")))?;
    eprintln!(
        "loaded {} triples, {} terms, {} literals",
        graph.store.len(),
        graph.vocab.len(),
        graph.store.literals().len()
    );
    Ok(graph)
}

fn counts(graph: &KnowledgeGraph, args: &CountingArgs) -> CooccurrenceStats {
    let exclude_predicate = if args.exclude_type_triples {
        graph.type_predicate(&args.type_iri)
    } else {
        None
    };
    count_cooccurrences_with(graph, CooccurrenceOptions { exclude_predicate })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let mut w = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    let graph = load(&args.input)?;
    let mut out = create(&args.out)?;
    write_cache(&graph, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.similarity {
        let stats = counts(&graph, &args.counting);
        let sim = build_similarity(&stats, args.k, args.omega, args.seed)?;
        let mut w = create(path)?;
        sim.write_tsv(&graph.vocab, &mut w)?;
    }
    Ok(())
}

pub fn embed(args: EmbedArgs) -> Result<()> {
    let config = args.config();
    config.validate()?;
    let graph = load(&args.input)?;
    config.check_memory_budget(graph.vocab.len(), args.memory_budget)?;

    let stats = counts(&graph, &args.counting);
    let sim = build_similarity(&stats, config.k, config.omega, config.seed)?;
    let outcome = engine::run_with(&graph.vocab, &sim, &config, |r: &IterationRecord| {
        match r.objective {
            Some(j) => eprintln!("sweep {:>4}  J {j:>12.6e}  moved {:.6e}  E {:.4}", r.t, r.displacement, r.energy),
            None => eprintln!("sweep {:>4}  moved {:.6e}  E {:.4}", r.t, r.displacement, r.energy),
        }
    })?;
    eprintln!(
        "stopped after {} sweeps: {:?} ({:.1} ms iterating)",
        outcome.report.iterations(),
        outcome.report.stop_reason,
        outcome.report.iteration_millis
    );
    write_embeddings(&args.out, &graph.vocab, &outcome.embeddings)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.report {
        outcome.report.write_json_lines(create(path)?)?;
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let graph = load(&args.graph)?;
    let file = read_embeddings(&args.embeddings)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    let embeddings = file.align_to(&graph.vocab)?;
    let types = TypeIndex::build(&graph, &args.type_iri);
    let sample = eval::select_sample(types.typed_subjects(), args.sample_size, args.seed);

    let prediction = args
        .mu_list
        .iter()
        .map(|&mu| {
            eval::type_prediction_score(&embeddings, &types, &sample, mu)
                .map_err(|e| eval::name_terms(e, &graph.vocab))
        })
        .collect::<physkge::Result<Vec<_>>>()?;

    let clustering = if let Some(path) = &args.clusters {
        let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
        Some(Clustering::read_tsv(reader, &graph.vocab, &path.display().to_string())?)
    } else if let Some(l) = args.kmeans {
        let c = eval::kmeans(&embeddings, &sample, l, args.seed)?;
        if let Some(path) = &args.clusters_out {
            let mut w = create(path)?;
            c.write_tsv(&graph.vocab, &mut w)?;
        }
        Some(c)
    } else {
        None
    };
    let purity = clustering
        .as_ref()
        .map(|c| {
            eval::cluster_purity_with(c, &types, PurityOptions::default())
                .map_err(|e| eval::name_terms(e, &graph.vocab))
        })
        .transpose()?;

    let report = EvalReport {
        typed_subjects: types.typed_subjects().len(),
        classes: types.num_classes(),
        sample_size: sample.len(),
        seed: args.seed,
        prediction,
        purity,
        clusters: clustering.map(|c| c.num_clusters()),
    };
    write_json(&report, args.out.as_deref())
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let spec = SynthSpec {
        universities: args.scale,
        classes: args.classes,
        seed: args.seed,
    };
    let n = generate_to_path(&spec, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!("wrote {n} triples to {}", args.out.display());
    Ok(())
}

pub fn scaling(args: ScalingArgs) -> Result<()> {
    let mut config = ScalingConfig {
        scales: args.scales,
        ks: args.k,
        repeats: args.repeats,
        ..ScalingConfig::default()
    };
    config.embedding.dim = args.dim;
    config.embedding.seed = args.seed;
    let reports = scaling_run(&config, |k, p| {
        eprintln!(
            "K {k:>3}  {:>4} universities  {:>8} triples  {:>3} sweeps  {:.4} min",
            p.universities, p.triples, p.iterations, p.minutes
        )
    })?;
    for r in &reports {
        eprintln!("K {:>3}  slope {:.4e} min/triple  R2 {:.4}", r.k, r.slope, r.r_squared);
    }
    write_json(&reports, args.out.as_deref())
}
