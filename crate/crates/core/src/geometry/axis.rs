use serde::{Deserialize, Serialize};

use super::distance::{distance_field, shortest_paths, DistanceOptions};
use super::grid::{Grading, GridSpec};
use super::{GrushinParams, Point};
use crate::error::{Error, Result};

/// Length of the comparison path that climbs radially from `(r0, v)` to
/// `r0 + s`, translates by `l` there and descends, minimized over `s ≥ 0`:
/// `min_s 2s + (r0 + s)^{-2α} l`.
pub fn comparison_path_bound(params: &GrushinParams, r0: f64, l: f64) -> f64 {
    let a = params.alpha;
    let l = l.abs();
    if l == 0.0 {
        return 0.0;
    }
    let r_star = (a * l).powf(1.0 / (1.0 + 2.0 * a));
    let s = (r_star - r0).max(0.0);
    2.0 * s + (r0 + s).powf(-2.0 * a) * l
}

/// Discretization used for axis-to-axis and translation distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResolution {
    /// r-nodes of the coarsest level.
    pub nr: usize,
    /// v-nodes of the coarsest level.
    pub nv: usize,
    pub grading_ratio: f64,
    pub stencil_radius: usize,
    /// Number of nested levels used for extrapolation (at least 3).
    pub levels: u32,
}

impl Default for BoundaryResolution {
    fn default() -> Self {
        BoundaryResolution {
            nr: 33,
            nv: 33,
            grading_ratio: 1.05,
            stencil_radius: 8,
            levels: 4,
        }
    }
}

impl BoundaryResolution {
    fn grading(&self) -> Grading {
        if self.grading_ratio == 1.0 {
            Grading::Uniform
        } else {
            Grading::Geometric {
                ratio: self.grading_ratio,
            }
        }
    }
}

/// Extrapolated estimate of `C = d((0,1),(0,0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConstant {
    pub value: f64,
    pub error: f64,
    /// Observed convergence order of the last three levels.
    pub order: f64,
    /// Raw graph distances, coarsest first.
    pub levels: Vec<f64>,
}

fn axis_grid(params: &GrushinParams, res: &BoundaryResolution, v: f64) -> Result<GridSpec> {
    let r_top = 0.5 * comparison_path_bound(params, 0.0, v) * 1.1;
    GridSpec::new((0.0, r_top), (0.0, v), res.nr, res.nv, res.grading())
}

/// Graph distance from `(0,0)` to `(0,v)` on the given refinement level.
pub fn axis_distance(
    params: &GrushinParams,
    v: f64,
    res: &BoundaryResolution,
    level: u32,
    axis_constant: f64,
) -> Result<f64> {
    if v <= 0.0 {
        return Err(Error::InvalidInput(format!("axis separation {v} must be positive")));
    }
    let mut grid = axis_grid(params, res, v)?;
    grid.level = level;
    let opts = DistanceOptions {
        stencil_radius: res.stencil_radius,
        axis_constant: Some(axis_constant),
        tolerance: f64::INFINITY,
        cutoff: Some(1.05 * comparison_path_bound(params, 0.0, v)),
    };
    let d = shortest_paths(params, Point::new(0.0, 0.0), &grid, &opts)?;
    Ok(d.at(0, d.v.len() - 1))
}

/// Distances `d((0,v),(0,0))` for several `v` read off a single field on one
/// grid spanning the largest separation, extrapolated in stencil radius.
pub fn axis_profile(
    params: &GrushinParams,
    v_values: &[f64],
    res: &BoundaryResolution,
    level: u32,
) -> Result<Vec<f64>> {
    let full = axis_profile_raw(params, v_values, res, level)?;
    if res.stencil_radius < 2 {
        return Ok(full);
    }
    let half_radius = res.stencil_radius / 2;
    let half = axis_profile_raw(
        params,
        v_values,
        &BoundaryResolution {
            stencil_radius: half_radius,
            ..*res
        },
        level,
    )?;
    let q = (res.stencil_radius as f64 / half_radius as f64).powi(2);
    Ok(full
        .iter()
        .zip(&half)
        .map(|(f, h)| f - (h - f) / (q - 1.0))
        .collect())
}

fn axis_profile_raw(
    params: &GrushinParams,
    v_values: &[f64],
    res: &BoundaryResolution,
    level: u32,
) -> Result<Vec<f64>> {
    let v_max = v_values.iter().cloned().fold(0.0, f64::max);
    if v_values.iter().any(|v| *v <= 0.0) || v_max <= 0.0 {
        return Err(Error::InvalidInput("axis separations must be positive".into()));
    }
    let mut grid = axis_grid(params, res, v_max)?;
    grid.level = level;
    let opts = DistanceOptions {
        stencil_radius: res.stencil_radius,
        axis_constant: None,
        tolerance: f64::INFINITY,
        cutoff: Some(1.05 * comparison_path_bound(params, 0.0, v_max)),
    };
    let d = shortest_paths(params, Point::new(0.0, 0.0), &grid, &opts)?;
    Ok(v_values.iter().map(|&v| d.value_at(Point::new(0.0, v))).collect())
}

/// Boundary constant extrapolated in grid spacing and in stencil radius.
///
/// The graph distance carries a metrication bias decaying like `K^{-2}` in
/// the stencil radius `K` that grid refinement does not remove; it is
/// eliminated by repeating the computation with `K/2`.
pub fn boundary_distance_constant(
    params: &GrushinParams,
    res: &BoundaryResolution,
) -> Result<BoundaryConstant> {
    let full = grid_extrapolation(params, res)?;
    if res.stencil_radius < 2 {
        return Ok(full);
    }
    let half_radius = res.stencil_radius / 2;
    let half = grid_extrapolation(
        params,
        &BoundaryResolution {
            stencil_radius: half_radius,
            ..*res
        },
    )?;
    let q = (res.stencil_radius as f64 / half_radius as f64).powi(2);
    let correction = (half.value - full.value) / (q - 1.0);
    Ok(BoundaryConstant {
        value: full.value - correction,
        error: full.error + correction.abs(),
        order: full.order,
        levels: full.levels,
    })
}

/// Richardson extrapolation over nested grids at a fixed stencil,
/// bootstrapping the axis edge weight from the previous level.
fn grid_extrapolation(params: &GrushinParams, res: &BoundaryResolution) -> Result<BoundaryConstant> {
    if res.levels < 3 {
        return Err(Error::InvalidInput("at least three levels are needed".into()));
    }
    let mut c_est = comparison_path_bound(params, 0.0, 1.0);
    let mut levels = Vec::with_capacity(res.levels as usize);
    for level in 0..res.levels {
        let d = axis_distance(params, 1.0, res, level, c_est)?;
        levels.push(d);
        c_est = d;
    }
    let k = levels.len();
    let (c0, c1, c2) = (levels[k - 3], levels[k - 2], levels[k - 1]);
    let d01 = c0 - c1;
    let d12 = c1 - c2;
    let scale = 1e-12 * c2.abs();
    // Below this the levels differ only by stencil-direction noise.
    let floor = 1e-4 * c2.abs();
    if d12.abs() <= floor {
        return Ok(BoundaryConstant {
            value: c2,
            error: d12.abs().max(scale),
            order: f64::INFINITY,
            levels,
        });
    }
    let ratio = d01 / d12;
    let largest_earlier = levels.windows(2).rev().skip(1).map(|w| (w[0] - w[1]).abs()).fold(0.0, f64::max);
    if d12.abs() >= largest_earlier {
        return Err(Error::NoConvergence(format!(
            "boundary constant levels {levels:?} do not contract"
        )));
    }
    if ratio <= 1.0 {
        // Oscillating or stalled levels: no asymptotic order, bracket by the last step.
        return Ok(BoundaryConstant {
            value: c2,
            error: d12.abs(),
            order: f64::NAN,
            levels,
        });
    }
    let order = ratio.log2();
    let correction = d12 / (ratio - 1.0);
    Ok(BoundaryConstant {
        value: c2 - correction,
        error: correction.abs().max(d12.abs()).max(scale),
        order,
        levels,
    })
}

/// Numeric translation distance against the explicit bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationCheck {
    pub dist: f64,
    /// `min(C1, C2 r^{-2α}) l^{1/(1+2α)}` with the constants of the
    /// comparison argument.
    pub lower: f64,
    /// `3 l^{1/(1+2α)}`.
    pub upper: f64,
    /// Length of the best comparison path.
    pub comparison: f64,
    pub resolution_indicator: f64,
    /// True if `dist` exceeds `upper` by more than the resolution indicator.
    pub violation: bool,
}

fn lower_constant(alpha: f64, r: f64) -> f64 {
    let c1 = 3f64.powf(-1.0 / (2.0 * alpha));
    let c2 = (1.0 + 2f64.powf(2.0 * alpha) / c1.powf(1.0 + 2.0 * alpha)).powf(-2.0 * alpha);
    if r > 0.0 {
        c1.min(c2 * r.powf(-2.0 * alpha))
    } else {
        c1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowflakeFit {
    pub v_values: Vec<f64>,
    pub distances: Vec<f64>,
    /// Least-squares slope of `log d` against `log v`.
    pub slope: f64,
    /// `1/(1+2α)`.
    pub target: f64,
}

/// Log-log slope of the axis profile `v ↦ d((0, v), (0, 0))`.
pub fn snowflake_slope(
    params: &GrushinParams,
    v_values: &[f64],
    res: &BoundaryResolution,
    level: u32,
) -> Result<SnowflakeFit> {
    let distances = axis_profile(params, v_values, res, level)?;
    let rows: Vec<Vec<f64>> = v_values.iter().map(|v| vec![v.ln(), 1.0]).collect();
    let y: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let fit = crate::fit::least_squares(&rows, &y)?;
    Ok(SnowflakeFit {
        v_values: v_values.to_vec(),
        distances,
        slope: fit.coefficients[0],
        target: 1.0 / params.snowflake_dimension(),
    })
}

/// Numerical `d(x, x + (0, shift))` on a grid fitted to the bounding box of
/// the geodesic, with its coarse/fine relative difference.
pub fn translation_distance(
    params: &GrushinParams,
    x: Point,
    shift: f64,
    res: &BoundaryResolution,
) -> Result<(f64, f64)> {
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::InvalidInput(format!("shift {shift} must be positive")));
    }
    let comparison = comparison_path_bound(params, x.r, shift);
    // Geodesics between points of equal radius never dip below it.
    let r_top = x.r + 0.5 * comparison * 1.1;
    let grading = if x.r == 0.0 { res.grading() } else { Grading::Uniform };
    let grid = GridSpec::new((x.r, r_top), (x.v, x.v + shift), res.nr, res.nv, grading)?;
    let opts = DistanceOptions {
        stencil_radius: res.stencil_radius,
        axis_constant: None,
        tolerance: f64::INFINITY,
        cutoff: Some(1.5 * comparison),
    };
    let field = distance_field(params, x, &grid, &opts)?;
    let target = Point::new(x.r, x.v + shift);
    let dist = field.refined_value_at(target);
    let coarse = field.value_at(target);
    Ok((dist, ((coarse - dist) / dist).abs()))
}

/// Distance of an integer translate against the bracket
/// `C(r) l^{1/(1+2α)} ≤ d ≤ 3 l^{1/(1+2α)}`.
pub fn translation_distance_check(
    params: &GrushinParams,
    x: Point,
    l: u32,
    res: &BoundaryResolution,
) -> Result<TranslationCheck> {
    if l == 0 {
        return Err(Error::InvalidInput("translation length must be >= 1".into()));
    }
    let lf = l as f64;
    let k = params.snowflake_dimension();
    let (dist, indicator) = translation_distance(params, x, lf, res)?;
    let comparison = comparison_path_bound(params, x.r, lf);
    let upper = 3.0 * lf.powf(1.0 / k);
    Ok(TranslationCheck {
        dist,
        lower: lower_constant(params.alpha, x.r) * lf.powf(1.0 / k),
        upper,
        comparison,
        resolution_indicator: indicator,
        violation: dist > upper * (1.0 + indicator),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unit-speed geodesic leaving the axis radially, integrated until it
    /// returns; gives `C = L / v_end^{1/(1+2α)}`.
    pub(crate) fn shooting_constant(alpha: f64) -> f64 {
        let rhs = |s: [f64; 3]| {
            let r = s[0].max(0.0);
            [s[1], -2.0 * alpha * r.powf(4.0 * alpha - 1.0), r.powf(4.0 * alpha)]
        };
        let h = 1e-5;
        // (r, p_r, v) with p_v = 1
        let mut s = [0.0, 1.0, 0.0];
        let mut t = 0.0;
        loop {
            let k1 = rhs(s);
            let k2 = rhs([0, 1, 2].map(|i| s[i] + 0.5 * h * k1[i]));
            let k3 = rhs([0, 1, 2].map(|i| s[i] + 0.5 * h * k2[i]));
            let k4 = rhs([0, 1, 2].map(|i| s[i] + h * k3[i]));
            let next = [0, 1, 2].map(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
            if t > h && next[0] <= 0.0 {
                let frac = s[0] / (s[0] - next[0]);
                let v_end = s[2] + frac * (next[2] - s[2]);
                let len = t + frac * h;
                return len / v_end.powf(1.0 / (1.0 + 2.0 * alpha));
            }
            s = [next[0], next[1], next[2]];
            t += h;
        }
    }

    fn p(alpha: f64, n: u32) -> GrushinParams {
        GrushinParams::new(alpha, n, 1.0, std::f64::consts::TAU).unwrap()
    }

    #[test]
    fn comparison_bound_minimizes() {
        let params = p(0.5, 9);
        let b = comparison_path_bound(&params, 5.0, 1.0);
        let brute = (0..100_000)
            .map(|i| {
                let s = i as f64 * 1e-4;
                2.0 * s + 1.0 / (5.0 + s)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((b - brute).abs() < 1e-8);
        assert!(comparison_path_bound(&params, 0.0, 1.0) <= 3.0);
    }

    #[test]
    fn shooting_oracle_is_stable() {
        let a = shooting_constant(0.5);
        assert!(a > 2.0 && a < 3.0, "{a}");
    }

    #[test]
    fn boundary_constant_matches_shooting() {
        for alpha in [0.5, 0.75] {
            let params = p(alpha, 16);
            let c = boundary_distance_constant(&params, &BoundaryResolution::default()).unwrap();
            let oracle = shooting_constant(alpha);
            assert!(c.value > 0.0 && c.value <= 3.0);
            assert!((c.value - oracle).abs() / oracle < 0.01, "{c:?} vs {oracle}");
        }
    }

    #[test]
    fn boundary_constant_is_self_consistent() {
        let params = p(0.5, 9);
        let fine = boundary_distance_constant(&params, &BoundaryResolution::default()).unwrap();
        let coarse = boundary_distance_constant(
            &params,
            &BoundaryResolution { nr: 17, nv: 17, ..Default::default() },
        )
        .unwrap();
        assert!((fine.value - coarse.value).abs() <= fine.error.max(coarse.error));
    }

    #[test]
    fn translation_bracket_at_axis() {
        let params = p(0.5, 9);
        let t = translation_distance_check(&params, Point::new(0.0, 0.0), 1, &BoundaryResolution::default())
            .unwrap();
        assert!(!t.violation);
        assert_eq!(t.upper, 3.0);
        assert!(t.dist <= t.comparison * (1.0 + t.resolution_indicator));
    }

    #[test]
    fn translation_off_axis_below_comparison_path() {
        let params = p(0.5, 9);
        for r in [1.0, 5.0] {
            let t = translation_distance_check(&params, Point::new(r, 0.0), 1, &BoundaryResolution::default())
                .unwrap();
            assert!(t.dist <= t.comparison * (1.0 + t.resolution_indicator), "{t:?}");
            assert!(t.dist >= t.lower, "{t:?}");
        }
        let t = translation_distance_check(&params, Point::new(1.0, 0.0), 1, &BoundaryResolution::default())
            .unwrap();
        assert!(t.dist <= 2.0 + 0.5);
    }
}
