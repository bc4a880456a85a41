use crate::matrix::Embeddings;
use crate::rdf::TermId;
use crate::similarity::SimilarityGraph;

use super::config::{RepulsionMode, DIVISION_GUARD};

/// `out += sum_{y in P(x)} sigma(x, y) * (y - x)`.
#[inline]
pub(crate) fn add_attraction(x: TermId, positions: &Embeddings, sim: &SimilarityGraph, out: &mut [f64]) {
    let px = positions.row(x as usize);
    let (ids, weights) = sim.positives(x);
    for (&y, &w) in ids.iter().zip(weights) {
        let py = positions.row(y as usize);
        for ((o, a), b) in out.iter_mut().zip(px).zip(py) {
            *o += w * (b - a);
        }
    }
}

/// Hints the cache to load the rows of `N(x)`. Negatives are spread
/// uniformly over the vocabulary, so without this every row is a cold miss
/// taken one at a time.
#[inline]
pub(crate) fn prefetch_negatives(x: TermId, positions: &Embeddings, sim: &SimilarityGraph) {
    #[cfg(target_arch = "x86_64")]
    {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        const LINE: usize = 64;
        for &y in sim.negatives(x) {
            let row = positions.row(y as usize);
            let bytes = std::mem::size_of_val(row);
            let base = row.as_ptr().cast::<i8>();
            let mut off = 0;
            while off < bytes {
                // SAFETY: prefetching is a hint; the address lies inside `row`.
                #[allow(unused_unsafe)]
                unsafe {
                    _mm_prefetch::<_MM_HINT_T0>(base.add(off));
                }
                off += LINE;
            }
        }
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = (x, positions, sim);
}

/// Clamps a difference away from zero, keeping its sign (`sign(0) = +1`).
#[inline]
pub(crate) fn guarded(d: f64) -> f64 {
    if d.abs() < DIVISION_GUARD {
        if d < 0.0 {
            -DIVISION_GUARD
        } else {
            DIVISION_GUARD
        }
    } else {
        d
    }
}

/// `out -= sum_{y in N(x)} omega / (y - x)` in the chosen interpretation.
#[inline]
pub(crate) fn add_repulsion(
    x: TermId,
    positions: &Embeddings,
    sim: &SimilarityGraph,
    mode: RepulsionMode,
    out: &mut [f64],
) {
    let omega = sim.omega();
    let px = positions.row(x as usize);
    for &y in sim.negatives(x) {
        let py = positions.row(y as usize);
        match mode {
            RepulsionMode::Coordinate => {
                for ((o, a), b) in out.iter_mut().zip(px).zip(py) {
                    *o -= omega / guarded(b - a);
                }
            }
            RepulsionMode::Norm => {
                let sq: f64 = px.iter().zip(py).map(|(a, b)| guarded(b - a).powi(2)).sum();
                let scale = omega / sq;
                for ((o, a), b) in out.iter_mut().zip(px).zip(py) {
                    *o -= scale * guarded(b - a);
                }
            }
        }
    }
}
