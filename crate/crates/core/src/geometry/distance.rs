use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::axis::comparison_path_bound;
use super::grid::{locate, GridSpec};
use super::{GrushinParams, Point};
use crate::error::{Error, Result};

/// Controls for the grid shortest-path distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceOptions {
    /// Neighbourhood radius in index space: 1 gives the 8-neighbour stencil,
    /// 2 the 16-neighbour stencil, 3 adds the (1,3)/(2,3) moves, and so on.
    pub stencil_radius: usize,
    /// Constant `C` used for edges lying on the axis,
    /// weighted `C |Δv|^{1/(1+2α)}`. Defaults to the comparison-path bound.
    pub axis_constant: Option<f64>,
    /// Largest admissible relative change under one refinement.
    pub tolerance: f64,
    /// Stop the search once every remaining node is farther than this.
    pub cutoff: Option<f64>,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            stencil_radius: 2,
            axis_constant: None,
            tolerance: 0.05,
            cutoff: None,
        }
    }
}

/// Shortest-path distances from a source on one grid level.
#[derive(Debug, Clone)]
pub struct GraphDistances {
    pub grid: GridSpec,
    pub source: Point,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    /// Row-major in `(r index, v index)`; unreached nodes are `+∞`.
    pub values: Vec<f64>,
}

impl GraphDistances {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.v.len() + j]
    }

    /// Bilinear interpolation; `+∞` outside the grid or next to unreached nodes.
    pub fn value_at(&self, p: Point) -> f64 {
        if !self.grid.contains(p.r, p.v) {
            return f64::INFINITY;
        }
        let i = locate(&self.r, p.r);
        let j = locate(&self.v, p.v);
        let tr = (p.r - self.r[i]) / (self.r[i + 1] - self.r[i]);
        let tv = (p.v - self.v[j]) / (self.v[j + 1] - self.v[j]);
        let c = [
            self.at(i, j),
            self.at(i + 1, j),
            self.at(i, j + 1),
            self.at(i + 1, j + 1),
        ];
        let w = [(1.0 - tr) * (1.0 - tv), tr * (1.0 - tv), (1.0 - tr) * tv, tr * tv];
        let mut acc = 0.0;
        for (ci, wi) in c.iter().zip(w) {
            if wi > 0.0 {
                if !ci.is_finite() {
                    return f64::INFINITY;
                }
                acc += ci * wi;
            }
        }
        acc
    }
}

/// Distance field from `source` with a one-refinement error indicator.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: Point,
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// Largest relative change of a reported value under one refinement.
    pub resolution_indicator: f64,
    coarse: GraphDistances,
    fine: GraphDistances,
}

impl DistanceField {
    pub fn value_at(&self, p: Point) -> f64 {
        self.coarse.value_at(p)
    }

    /// Same query on the refined level.
    pub fn refined_value_at(&self, p: Point) -> f64 {
        self.fine.value_at(p)
    }

    pub fn coarse(&self) -> &GraphDistances {
        &self.coarse
    }

    pub fn fine(&self) -> &GraphDistances {
        &self.fine
    }

    /// `(r, v, d)` triples in row-major order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nv = self.coarse.v.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, d)| (self.coarse.r[k / nv], self.coarse.v[k % nv], *d))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn stencil(radius: usize) -> Vec<(isize, isize)> {
    let k = radius as isize;
    let mut out = Vec::new();
    for di in -k..=k {
        for dj in -k..=k {
            if (di, dj) != (0, 0) && gcd(di.unsigned_abs(), dj.unsigned_abs()) == 1 {
                out.push((di, dj));
            }
        }
    }
    out
}

/// Per-row move sets. Rows whose cells are much thinner in v than in r
/// (measured in the metric) get their v-offsets stretched by the aspect
/// ratio, plus unit v-moves, so the directions stay dense in metric angle.
pub(crate) struct RowStencils {
    row_set: Vec<usize>,
    sets: Vec<(usize, Vec<(isize, isize)>)>,
}

impl RowStencils {
    pub(crate) fn new(alpha: f64, r: &[f64], dv: f64, radius: usize) -> Self {
        let base = stencil(radius);
        let nr = r.len();
        let mut row_set = vec![0; nr];
        let mut sets = vec![(1usize, base.clone())];
        for i in 0..nr {
            if r[i] <= 0.0 || nr < 2 {
                continue;
            }
            let dr = if i + 1 < nr { r[i + 1] - r[i] } else { r[i] - r[i - 1] };
            let aspect = dv * r[i].powf(-2.0 * alpha) / dr;
            let q = ((1.0 / aspect).round().max(1.0) as usize).min(1 << 20);
            row_set[i] = match sets.iter().position(|(qq, _)| *qq == q) {
                Some(pos) => pos,
                None => {
                    let mut m: Vec<(isize, isize)> =
                        base.iter().map(|&(di, dj)| (di, dj * q as isize)).collect();
                    m.push((0, 1));
                    m.push((0, -1));
                    sets.push((q, m));
                    sets.len() - 1
                }
            };
        }
        RowStencils { row_set, sets }
    }

    pub(crate) fn row(&self, i: usize) -> &[(isize, isize)] {
        &self.sets[self.row_set[i]].1
    }
}

/// Length of the straight segment between two points, metric evaluated at the
/// midpoint radius. Segments touching the axis are admissible only when
/// radial; segments along the axis use the snowflake weight.
fn segment_length(alpha: f64, axis_c: f64, a: Point, b: Point) -> Option<f64> {
    let dr = b.r - a.r;
    let dv = b.v - a.v;
    if a.r == 0.0 && b.r == 0.0 {
        return Some(axis_c * dv.abs().powf(1.0 / (1.0 + 2.0 * alpha)));
    }
    if a.r == 0.0 || b.r == 0.0 {
        return if dv == 0.0 { Some(dr.abs()) } else { None };
    }
    let rm = 0.5 * (a.r + b.r);
    Some((dr * dr + rm.powf(-4.0 * alpha) * dv * dv).sqrt())
}

/// Dijkstra on the stencil graph of one grid level.
pub fn shortest_paths(
    params: &GrushinParams,
    source: Point,
    grid: &GridSpec,
    opts: &DistanceOptions,
) -> Result<GraphDistances> {
    grid.validate()?;
    if source.r < 0.0 || !grid.contains(source.r, source.v) {
        return Err(Error::InvalidInput(format!("source {source:?} outside grid")));
    }
    if opts.stencil_radius == 0 {
        return Err(Error::InvalidInput("stencil radius must be >= 1".into()));
    }
    let alpha = params.alpha;
    let axis_c = opts
        .axis_constant
        .unwrap_or_else(|| comparison_path_bound(params, 0.0, 1.0));
    let r = grid.r_nodes();
    let v = grid.v_nodes();
    let (nr, nv) = (r.len(), v.len());
    let dv = grid.dv();
    let k = opts.stencil_radius as isize;
    let width = (2 * k + 1) as usize;

    let moves = RowStencils::new(alpha, &r, dv, opts.stencil_radius);

    // Per (row, di): squared radial step and midpoint v-coefficient.
    // NaN marks rows where only radial moves are admissible (axis endpoint).
    let mut row_dr2 = vec![0.0; nr * width];
    let mut row_g = vec![f64::NAN; nr * width];
    for i in 0..nr {
        for di in -k..=k {
            let i2 = i as isize + di;
            if i2 < 0 || i2 >= nr as isize {
                continue;
            }
            let (r1, r2) = (r[i], r[i2 as usize]);
            let slot = i * width + (di + k) as usize;
            row_dr2[slot] = (r2 - r1) * (r2 - r1);
            if r1 > 0.0 && r2 > 0.0 {
                row_g[slot] = (0.5 * (r1 + r2)).powf(-4.0 * alpha);
            }
        }
    }
    let axis_step = axis_c * dv.powf(1.0 / (1.0 + 2.0 * alpha));

    let mut dist = vec![f64::INFINITY; nr * nv];
    let mut heap = BinaryHeap::new();
    let scale = 1e-12 * (1.0 + grid.r_max.abs() + grid.v_max.abs().max(grid.v_min.abs()));
    let ic = locate(&r, source.r);
    let jc = locate(&v, source.v);
    let on_node = [(ic, jc), (ic + 1, jc), (ic, jc + 1), (ic + 1, jc + 1)]
        .into_iter()
        .find(|&(i, j)| (r[i] - source.r).abs() <= scale && (v[j] - source.v).abs() <= scale);
    match on_node {
        Some((i, j)) => {
            dist[i * nv + j] = 0.0;
            heap.push(Reverse((OrderedFloat(0.0), i * nv + j)));
        }
        None => {
            let i_lo = (ic as isize - k).max(0) as usize;
            let i_hi = ((ic + 1) as isize + k).min(nr as isize - 1) as usize;
            let j_lo = (jc as isize - k).max(0) as usize;
            let j_hi = ((jc + 1) as isize + k).min(nv as isize - 1) as usize;
            for i in i_lo..=i_hi {
                for j in j_lo..=j_hi {
                    if let Some(w) = segment_length(alpha, axis_c, source, Point::new(r[i], v[j])) {
                        let id = i * nv + j;
                        if w < dist[id] {
                            dist[id] = w;
                            heap.push(Reverse((OrderedFloat(w), id)));
                        }
                    }
                }
            }
        }
    }

    let cutoff = opts.cutoff.unwrap_or(f64::INFINITY);
    let mut done = vec![false; nr * nv];
    while let Some(Reverse((OrderedFloat(d), id))) = heap.pop() {
        if done[id] || d > dist[id] {
            continue;
        }
        done[id] = true;
        if d > cutoff {
            break;
        }
        let i = id / nv;
        let j = id % nv;
        for &(di, dj) in moves.row(i) {
            let i2 = i as isize + di;
            let j2 = j as isize + dj;
            if i2 < 0 || j2 < 0 || i2 >= nr as isize || j2 >= nv as isize {
                continue;
            }
            let slot = i * width + (di + k) as usize;
            let g = row_g[slot];
            let w = if g.is_nan() {
                if di == 0 && r[i] == 0.0 {
                    axis_step
                } else if dj == 0 {
                    row_dr2[slot].sqrt()
                } else {
                    continue;
                }
            } else {
                let dvv = dj as f64 * dv;
                (row_dr2[slot] + g * dvv * dvv).sqrt()
            };
            let id2 = i2 as usize * nv + j2 as usize;
            let nd = d + w;
            if nd < dist[id2] {
                dist[id2] = nd;
                heap.push(Reverse((OrderedFloat(nd), id2)));
            }
        }
    }
    if let Some(c) = opts.cutoff {
        for (d, settled) in dist.iter_mut().zip(&done) {
            if !settled || *d > c {
                *d = f64::INFINITY;
            }
        }
    }
    Ok(GraphDistances {
        grid: *grid,
        source,
        r,
        v,
        values: dist,
    })
}

/// Grid distance field from `source` plus one nested refinement, whose
/// maximal relative change defines the resolution indicator.
pub fn distance_field(
    params: &GrushinParams,
    source: Point,
    grid: &GridSpec,
    opts: &DistanceOptions,
) -> Result<DistanceField> {
    let coarse = shortest_paths(params, source, grid, opts)?;
    let fine = shortest_paths(params, source, &grid.refined(), opts)?;
    let k = opts.stencil_radius + 1;
    let ic = locate(&coarse.r, source.r);
    let jc = locate(&coarse.v, source.v);
    let nv = coarse.v.len();
    let fnv = fine.v.len();
    let mut indicator: f64 = 0.0;
    for (id, dc) in coarse.values.iter().enumerate() {
        let (i, j) = (id / nv, id % nv);
        if i.abs_diff(ic) <= k && j.abs_diff(jc) <= k {
            continue;
        }
        let df = fine.values[2 * i * fnv + 2 * j];
        if dc.is_finite() && df.is_finite() && df > 0.0 {
            indicator = indicator.max((dc - df).abs() / df);
        }
    }
    if indicator > opts.tolerance {
        return Err(Error::GridTooCoarse {
            indicator,
            tolerance: opts.tolerance,
        });
    }
    Ok(DistanceField {
        source,
        grid: *grid,
        values: coarse.values.clone(),
        resolution_indicator: indicator,
        coarse,
        fine,
    })
}
