//! Numerical check of the dilation identity `d(F_λx, F_λy) = λ d(x, y)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::axis::comparison_path_bound;
use super::distance::{shortest_paths, DistanceOptions};
use super::grid::GridSpec;
use super::{dilate, GrushinParams, Point};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationCase {
    pub x: Point,
    pub y: Point,
    pub lambda: f64,
    pub distance: f64,
    pub dilated_distance: f64,
    /// `|d(F_λx, F_λy) - λ d(x, y)| / (λ d(x, y))`.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub level: u32,
    pub cases: Vec<DilationCase>,
    pub worst: f64,
}

/// Deterministic node pairs in `r_range × v_range` at ℓ¹-separation at least
/// `min_separation`, drawn from a Halton sequence.
pub fn sample_node_pairs(
    grid: &GridSpec,
    count: usize,
    r_range: (f64, f64),
    v_range: (f64, f64),
    min_separation: f64,
) -> Vec<(Point, Point)> {
    let rs: Vec<f64> = grid.r_nodes().into_iter().filter(|r| *r >= r_range.0 && *r <= r_range.1).collect();
    let vs: Vec<f64> = grid.v_nodes().into_iter().filter(|v| *v >= v_range.0 && *v <= v_range.1).collect();
    if rs.is_empty() || vs.is_empty() {
        return Vec::new();
    }
    let pick = |u: f64, nodes: &[f64]| nodes[((u * nodes.len() as f64) as usize).min(nodes.len() - 1)];
    let mut out = Vec::new();
    let mut i = 1u64;
    while out.len() < count && i < 1_000_000 {
        let x = Point::new(pick(halton(i, 2), &rs), pick(halton(i, 3), &vs));
        let y = Point::new(pick(halton(i, 5), &rs), pick(halton(i, 7), &vs));
        if (x.r - y.r).abs() + (x.v - y.v).abs() >= min_separation {
            out.push((x, y));
        }
        i += 1;
    }
    out
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut x = 0.0;
    while i > 0 {
        f /= base as f64;
        x += f * (i % base) as f64;
        i /= base;
    }
    x
}

/// Distances of every pair and of its dilates on the same grid. Each
/// Dijkstra run is cut off at 1.3 times the comparison-path bound.
pub fn dilation_check(
    params: &GrushinParams,
    pairs: &[(Point, Point)],
    lambdas: &[f64],
    grid: &GridSpec,
    stencil_radius: usize,
) -> Result<DilationReport> {
    let per_pair = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<Vec<DilationCase>> {
            let bound = comparison_path_bound(params, x.r.min(y.r), (x.v - y.v).abs()) + (x.r - y.r).abs();
            let opts = |scale: f64| DistanceOptions {
                stencil_radius,
                cutoff: Some(1.3 * scale * bound),
                ..Default::default()
            };
            let d = shortest_paths(params, x, grid, &opts(1.0))?.value_at(y);
            lambdas
                .iter()
                .map(|&lambda| {
                    let fx = dilate(params, x, lambda)?;
                    let fy = dilate(params, y, lambda)?;
                    let dl = shortest_paths(params, fx, grid, &opts(lambda))?.value_at(fy);
                    Ok(DilationCase {
                        x,
                        y,
                        lambda,
                        distance: d,
                        dilated_distance: dl,
                        defect: (dl - lambda * d).abs() / (lambda * d),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let cases: Vec<DilationCase> = per_pair.into_iter().flatten().collect();
    let worst = cases.iter().map(|c| c.defect).fold(0.0, f64::max);
    Ok(DilationReport {
        level: grid.level,
        cases,
        worst,
    })
}
