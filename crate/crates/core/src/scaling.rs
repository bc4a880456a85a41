//! Runtime scaling: embed synthetic graphs of growing size and fit iteration
//! time against triple count by ordinary least squares.

use serde::{Deserialize, Serialize};

use crate::engine::{self, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::similarity::{build_similarity, count_cooccurrences};
use crate::synth::{generate_graph, SynthSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)` points. Needs at least three points
/// and two distinct `x` values.
pub fn fit_ols(points: &[(f64, f64)]) -> Result<OlsFit> {
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "a scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("scaling points need distinct triple counts".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(OlsFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub universities: usize,
    pub triples: usize,
    pub terms: usize,
    pub iterations: usize,
    /// Fastest iteration-phase wall time over the repeats.
    pub minutes: f64,
}

/// One OLS fit of iteration time (minutes) on triple count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub k: usize,
    pub dim: usize,
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ScalingReport {
    pub fn from_points(k: usize, dim: usize, points: Vec<ScalingPoint>) -> Result<Self> {
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.triples as f64, p.minutes)).collect();
        let fit = fit_ols(&xy)?;
        Ok(Self {
            k,
            dim,
            points,
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    /// Universities per generated graph.
    pub scales: Vec<usize>,
    pub ks: Vec<usize>,
    /// Template; `k` is overwritten per fit and objective tracking is off.
    pub embedding: EmbeddingConfig,
    /// Timed runs per point; the minimum is kept.
    pub repeats: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            scales: vec![11, 22, 44, 88],
            ks: vec![5, 10, 20],
            embedding: EmbeddingConfig {
                dim: 25,
                ..EmbeddingConfig::default()
            },
            repeats: 1,
        }
    }
}

/// Generates each scale once and builds one similarity graph per `K`, then
/// times the sweeps. Initialization is timed separately and excluded.
///
/// Repeats form the outer loop, so a slow period on the machine is spread
/// over all points instead of landing on one scale; each point keeps its
/// fastest repeat. `on_point` sees each finished point.
pub fn scaling_run(
    config: &ScalingConfig,
    mut on_point: impl FnMut(usize, &ScalingPoint),
) -> Result<Vec<ScalingReport>> {
    if config.scales.len() < 3 {
        return Err(Error::Config(format!(
            "a scaling run needs at least 3 scales, got {}",
            config.scales.len()
        )));
    }
    if config.ks.is_empty() || config.repeats == 0 {
        return Err(Error::Config("need at least one K and one repeat".into()));
    }
    let configs: Vec<EmbeddingConfig> = config
        .ks
        .iter()
        .map(|&k| EmbeddingConfig {
            k,
            track_objective: false,
            ..config.embedding.clone()
        })
        .collect();
    let mut prepared = Vec::with_capacity(config.scales.len());
    for &universities in &config.scales {
        let graph = generate_graph(&SynthSpec::new(universities, config.embedding.seed))?;
        let stats = count_cooccurrences(&graph);
        let sims = configs
            .iter()
            .map(|c| build_similarity(&stats, c.k, c.omega, c.seed))
            .collect::<Result<Vec<_>>>()?;
        prepared.push((universities, graph, sims));
    }

    let mut best = vec![vec![f64::INFINITY; config.ks.len()]; prepared.len()];
    let mut iterations = vec![vec![0; config.ks.len()]; prepared.len()];
    for _ in 0..config.repeats {
        for (i, (_, graph, sims)) in prepared.iter().enumerate() {
            for (j, (cfg, sim)) in configs.iter().zip(sims).enumerate() {
                let out = engine::run(&graph.vocab, sim, cfg)?;
                best[i][j] = best[i][j].min(out.report.iteration_millis);
                iterations[i][j] = out.report.iterations();
            }
        }
    }

    let mut points: Vec<Vec<ScalingPoint>> = vec![Vec::new(); config.ks.len()];
    for (i, (universities, graph, _)) in prepared.iter().enumerate() {
        for (j, &k) in config.ks.iter().enumerate() {
            let p = ScalingPoint {
                universities: *universities,
                triples: graph.store.len(),
                terms: graph.vocab.len(),
                iterations: iterations[i][j],
                minutes: best[i][j] / 60_000.0,
            };
            on_point(k, &p);
            points[j].push(p);
        }
    }
    config
        .ks
        .iter()
        .zip(points)
        .map(|(&k, pts)| ScalingReport::from_points(k, config.embedding.dim, pts))
        .collect()
}
