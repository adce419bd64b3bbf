//! Ball and box volumes under `dm = c_m r^{(n-1)/2-2α} dr dv`, the ratio
//! functions `f` and `G`, and the Hausdorff measure of the singular axis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::{measure_density, shortest_paths, DistanceOptions, Grading, GridSpec, GrushinParams, Point};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeMethod {
    QuadratureOverDistanceField,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    pub value: f64,
    pub method: VolumeMethod,
    pub error_estimate: f64,
}

impl VolumeResult {
    fn closed(value: f64) -> Self {
        VolumeResult {
            value,
            method: VolumeMethod::ClosedForm,
            error_estimate: 0.0,
        }
    }
}

/// Discretization of the local grid around a ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallResolution {
    /// Nodes per side on the fine level; the coarse level has half as many
    /// cells and provides the error estimate.
    pub nodes: usize,
    pub stencil_radius: usize,
    /// Cancel the `K^{-2}` metrication bias with a second pass at `K/2`.
    pub extrapolate_stencil: bool,
}

impl Default for BallResolution {
    fn default() -> Self {
        BallResolution {
            nodes: 129,
            stencil_radius: 8,
            extrapolate_stencil: true,
        }
    }
}

/// Closed-form measure of `[r0-s, r0+s] × [v0 - s^{1+2α}, v0 + s^{1+2α}]`
/// (clipped at the axis):
/// `c_m · 2 s^{1+2α}/e · ((r0+s)^e - (r0-s)_+^e)` with `e = (n+1)/2 - 2α`.
pub fn box_volume(params: &GrushinParams, r0: f64, s: f64) -> Result<VolumeResult> {
    if s < 0.0 || !s.is_finite() {
        return Err(Error::NonPositiveScale(s));
    }
    if r0 < 0.0 {
        return Err(Error::InvalidInput(format!("r0 = {r0} must be nonnegative")));
    }
    let e = params.volume_exponent();
    if e <= 0.0 {
        return Err(Error::MeasureExponentNonIntegrable {
            n: params.n,
            alpha: params.alpha,
        });
    }
    let lower = (r0 - s).max(0.0);
    let value = params.c_m * 2.0 * s.powf(params.snowflake_dimension()) / e
        * ((r0 + s).powf(e) - lower.powf(e));
    Ok(VolumeResult::closed(value))
}

/// Measure of the sublevel set `{d < s}` on one grid,
/// with `d` linear on the two triangles of each cell.
fn sublevel_measure(params: &GrushinParams, r: &[f64], v: &[f64], d: &[f64], s: f64) -> f64 {
    let nv = v.len();
    let density = |x: f64| measure_density(params, x.max(0.0));
    let mut total = 0.0;
    for i in 0..r.len() - 1 {
        for j in 0..nv - 1 {
            let corner = |a: usize, b: usize| {
                let val = d[(i + a) * nv + j + b];
                ((r[i + a], v[j + b]), if val.is_finite() { val } else { f64::MAX })
            };
            let c00 = corner(0, 0);
            let c10 = corner(1, 0);
            let c01 = corner(0, 1);
            let c11 = corner(1, 1);
            for tri in [[c00, c10, c11], [c00, c11, c01]] {
                if tri.iter().all(|(_, x)| *x >= s) {
                    continue;
                }
                if tri.iter().all(|(_, x)| *x < s) {
                    total += quad::triangle(&density, tri.map(|(p, _)| p));
                    continue;
                }
                let mut poly: Vec<(f64, f64)> = Vec::with_capacity(4);
                for k in 0..3 {
                    let (pa, da) = tri[k];
                    let (pb, db) = tri[(k + 1) % 3];
                    if da < s {
                        poly.push(pa);
                    }
                    if (da < s) != (db < s) {
                        let t = (s - da) / (db - da);
                        poly.push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
                    }
                }
                for k in 1..poly.len().saturating_sub(1) {
                    total += quad::triangle(&density, [poly[0], poly[k], poly[k + 1]]);
                }
            }
        }
    }
    total
}

fn ball_level(
    params: &GrushinParams,
    center: Point,
    s: f64,
    grid: &GridSpec,
    res: &BallResolution,
) -> Result<f64> {
    let field = |radius: usize| {
        let opts = DistanceOptions {
            stencil_radius: radius,
            axis_constant: None,
            tolerance: f64::INFINITY,
            cutoff: Some(1.25 * s),
        };
        shortest_paths(params, center, grid, &opts)
    };
    let full = field(res.stencil_radius)?;
    let mut d = full.values.clone();
    if res.extrapolate_stencil && res.stencil_radius >= 2 {
        let half_radius = res.stencil_radius / 2;
        let half = field(half_radius)?;
        let q = (res.stencil_radius as f64 / half_radius as f64).powi(2);
        for (x, h) in d.iter_mut().zip(&half.values) {
            if x.is_finite() && h.is_finite() {
                *x -= (h - *x) / (q - 1.0);
            }
        }
    }
    Ok(sublevel_measure(params, &full.r, &full.v, &d, s))
}

/// Measure of the metric ball `B_s(center)` by quadrature of the density
/// over the sublevel set of the grid distance field.
pub fn ball_volume(
    params: &GrushinParams,
    center: Point,
    s: f64,
    res: &BallResolution,
) -> Result<VolumeResult> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonPositiveScale(s));
    }
    if center.r < 0.0 {
        return Err(Error::InvalidInput(format!("center {center:?} has negative r")));
    }
    if params.volume_exponent() <= 0.0 {
        return Err(Error::MeasureExponentNonIntegrable { n: params.n, alpha: params.alpha });
    }
    if res.nodes < 9 {
        return Err(Error::InvalidInput("ball grid needs at least 9 nodes per side".into()));
    }
    let margin = 1.05;
    let r_lo = (center.r - margin * s).max(0.0);
    let r_hi = center.r + margin * s;
    // A path of length s never leaves r ≤ r0 + s, where |dv/dt| ≤ r^{2α}.
    let half_v = margin * s * (center.r + s).powf(2.0 * params.alpha);
    let coarse_nodes = res.nodes.div_ceil(2) | 1;
    let base = GridSpec::new(
        (r_lo, r_hi),
        (center.v - half_v, center.v + half_v),
        coarse_nodes,
        coarse_nodes,
        Grading::Uniform,
    )?;
    let coarse = ball_level(params, center, s, &base, res)?;
    let fine = ball_level(params, center, s, &base.refined(), res)?;
    Ok(VolumeResult {
        value: fine,
        method: VolumeMethod::QuadratureOverDistanceField,
        error_estimate: (fine - coarse).abs(),
    })
}

/// `[c_m π s² (r0-s)^{(n-1)/2}, c_m π s² (r0+s)^{(n-1)/2}]`, which contains
/// `m(B_s(x))` for `r0 > s`.
pub fn ball_bracket(params: &GrushinParams, r0: f64, s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && r0 > s) {
        return Err(Error::InvalidInput(format!("bracket needs r0 > s > 0, got r0 = {r0}, s = {s}")));
    }
    let e = (params.n as f64 - 1.0) / 2.0;
    let base = params.c_m * std::f64::consts::PI * s * s;
    Ok((base * (r0 - s).powf(e), base * (r0 + s).powf(e)))
}

/// `f(τ^{-1}) = m(C_1(x))/m(B_1(x))` at `x = (τ^{-1}, 0)`; `tau_inv = 0` is
/// the axis ball itself.
pub fn f_ratio(params: &GrushinParams, tau_inv: f64, res: &BallResolution) -> Result<VolumeResult> {
    if tau_inv < 0.0 || !tau_inv.is_finite() {
        return Err(Error::InvalidInput(format!("tau_inv = {tau_inv} must be nonnegative")));
    }
    let boxed = box_volume(params, tau_inv, 1.0)?.value;
    let ball = ball_volume(params, Point::new(tau_inv, 0.0), 1.0, res)?;
    let value = boxed / ball.value;
    Ok(VolumeResult {
        value,
        method: VolumeMethod::QuadratureOverDistanceField,
        error_estimate: value * ball.error_estimate / ball.value,
    })
}

/// `G(τ) = ((1+τ)^e - (1-τ)_+^e)^{-1} f(τ^{-1})`.
pub fn g_of_tau(params: &GrushinParams, tau: f64, res: &BallResolution) -> Result<VolumeResult> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::NonPositiveScale(tau));
    }
    let e = params.volume_exponent();
    let denom = (1.0 + tau).powf(e) - (1.0 - tau).max(0.0).powf(e);
    let f = f_ratio(params, 1.0 / tau, res)?;
    Ok(VolumeResult {
        value: f.value / denom,
        method: f.method,
        error_estimate: f.error_estimate / denom,
    })
}

/// Aligned samples of `f(τ^{-1})` and `G(τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub tau_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub g_values: Vec<f64>,
    pub f_errors: Vec<f64>,
}

impl RatioTable {
    /// Logarithmically spaced `τ ∈ [tau_min, tau_max]`.
    pub fn compute(
        params: &GrushinParams,
        tau_min: f64,
        tau_max: f64,
        count: usize,
        res: &BallResolution,
    ) -> Result<Self> {
        if !(tau_min > 0.0 && tau_max > tau_min && count >= 2) {
            return Err(Error::InvalidInput(format!(
                "bad tau range [{tau_min}, {tau_max}] x {count}"
            )));
        }
        let ratio = (tau_max / tau_min).ln() / (count - 1) as f64;
        let taus: Vec<f64> = (0..count).map(|i| tau_min * (ratio * i as f64).exp()).collect();
        let rows: Vec<Result<(f64, f64, f64)>> = taus
            .par_iter()
            .map(|&tau| {
                let g = g_of_tau(params, tau, res)?;
                let e = params.volume_exponent();
                let denom = (1.0 + tau).powf(e) - (1.0 - tau).max(0.0).powf(e);
                Ok((g.value * denom, g.value, g.error_estimate * denom))
            })
            .collect();
        let mut table = RatioTable {
            tau_values: taus,
            f_values: Vec::with_capacity(count),
            g_values: Vec::with_capacity(count),
            f_errors: Vec::with_capacity(count),
        };
        for row in rows {
            let (f, g, err) = row?;
            table.f_values.push(f);
            table.g_values.push(g);
            table.f_errors.push(err);
        }
        Ok(table)
    }

    /// `(τ, f, G)` rows.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.tau_values
            .iter()
            .zip(&self.f_values)
            .zip(&self.g_values)
            .map(|((t, f), g)| [*t, *f, *g])
    }
}

/// Volume of the unit ball in (possibly fractional) dimension `k`.
pub fn unit_ball_constant(k: f64) -> f64 {
    std::f64::consts::PI.powf(k / 2.0) / gamma(k / 2.0 + 1.0)
}

/// `H^k` of an axis interval of v-length `v_length` under the snowflake
/// metric `C |Δv|^{1/k}`: `c_k (C/2)^k L`. `c_k` defaults to the unit-ball
/// constant.
pub fn hausdorff_measure_singular(
    params: &GrushinParams,
    k: f64,
    c_boundary: f64,
    v_length: f64,
    c_k: Option<f64>,
) -> Result<f64> {
    if (k - params.snowflake_dimension()).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "k = {k} differs from 1 + 2α = {}",
            params.snowflake_dimension()
        )));
    }
    if !(c_boundary > 0.0 && v_length > 0.0) {
        return Err(Error::InvalidInput("boundary constant and length must be positive".into()));
    }
    let ck = c_k.unwrap_or_else(|| unit_ball_constant(k));
    Ok(ck * (0.5 * c_boundary).powf(k) * v_length)
}

/// Unweighted area `∫_ε^1 r^{-2α} dr` of a unit v-strip; unbounded as
/// `ε → 0` exactly when `α ≥ 1/2`.
pub fn unweighted_area(alpha: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must lie in (0, 1)")));
    }
    // Integrate in log r to keep the integrand smooth.
    let (v, _) = quad::integrate(|u: f64| (u * (1.0 - 2.0 * alpha)).exp(), eps.ln(), 0.0, 1e-12)?;
    Ok(v)
}
