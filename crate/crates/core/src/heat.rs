//! Heat traces, on-diagonal heat kernels from the modal expansion, the
//! scale-invariant function `h(r, s) = m(B_s(x)) H(x, x, s²)`, box trace
//! integrals, covering sums and Karamata-type limits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ui;

use crate::error::{Error, Result};
use crate::fit::{least_squares, LinearFit};
use crate::geometry::{translation_distance, BoundaryResolution, GrushinParams, Point};
use crate::quad::gauss5_composite;
use crate::spectrum::{default_cells, fold_modes, RadialOperator, OuterBc, Space, SpectralOptions, Spectrum};
use crate::volumes::{ball_volume, f_ratio, g_of_tau, BallResolution};

/// `λ_max · t_min`: the spectral tail is `O(e^{-25})`.
pub const TAIL_EXPONENT: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    /// Decreasing.
    pub t_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub truncation_error: Vec<f64>,
}

impl TraceSeries {
    pub fn rows(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.t_values
            .iter()
            .zip(&self.z_values)
            .zip(&self.truncation_error)
            .map(|((t, z), e)| [*t, *z, *e])
    }
}

/// Exponent `γ` with `N(λ) ≲ N(λ_max)(λ/λ_max)^γ` above the top, from the
/// growth over the last decade plus a margin of 1/2.
fn tail_growth(spec: &Spectrum) -> f64 {
    let top = spec.counting(spec.lambda_max) as f64;
    let low = spec.counting(spec.lambda_max / 10.0) as f64;
    let g = if low >= 1.0 && top > low { (top / low).log10() } else { 2.0 };
    g + 0.5
}

/// Bound on `Σ_{λ > λ_max} e^{-λt}`: `N_max (λ_max t)^{-γ} Γ(γ+1, λ_max t)`.
pub fn tail_bound(spec: &Spectrum, t: f64) -> f64 {
    let n = spec.counting(spec.lambda_max) as f64;
    let g = tail_growth(spec);
    let x = spec.lambda_max * t;
    n * x.powf(-g) * gamma_ui(g + 1.0, x)
}

/// `Z(t) = Σ mult·e^{-λt}` for each `t`, returned in decreasing `t`.
pub fn heat_trace(spec: &Spectrum, t_values: &[f64]) -> Result<TraceSeries> {
    let t_min = TAIL_EXPONENT / spec.lambda_max;
    let mut ts = t_values.to_vec();
    if ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidInput("heat trace times must be positive".into()));
    }
    ts.sort_by(|a, b| b.total_cmp(a));
    ts.dedup();
    let mut out = TraceSeries {
        t_values: Vec::new(),
        z_values: Vec::new(),
        truncation_error: Vec::new(),
    };
    for t in ts {
        if t < t_min * (1.0 - 1e-12) {
            return Err(Error::TailDominates { t, t_min });
        }
        let z: f64 = spec
            .entries()
            .iter()
            .map(|e| e.multiplicity as f64 * (-e.lambda * t).exp())
            .sum();
        let tail = tail_bound(spec, t);
        if tail > 0.01 * z {
            return Err(Error::TailDominates { t, t_min });
        }
        out.t_values.push(t);
        out.z_values.push(z);
        out.truncation_error.push(tail);
    }
    Ok(out)
}

/// Radial cells resolving eigenfunctions up to `TAIL_EXPONENT / t_min`.
pub fn heat_cells(space: Space, t_min: f64) -> usize {
    let r_end = match space {
        Space::Ybar { truncation } => truncation,
        _ => crate::spectrum::R_END,
    };
    default_cells(r_end, TAIL_EXPONENT / t_min, 12.0)
}

/// Radius below which the translates `x + (0, lP)` of `x = (r, v)` stay at
/// distance `≥ 10√t`, so the quotient kernel equals the half-plane kernel up
/// to `e^{-25}`. Uses `d ≥ min(δ, P (r + δ)^{-2α})` with `δ = 10√t`.
pub fn covering_free_radius(params: &GrushinParams, t: f64) -> f64 {
    let delta = 10.0 * t.sqrt();
    (params.period / delta).powf(1.0 / (2.0 * params.alpha)) - delta
}

/// Truncation of Ȳ for heat tables at time `t`: no larger than where the
/// covering correction starts to matter, capped at 13.
pub fn heat_truncation(params: &GrushinParams, t: f64) -> f64 {
    (covering_free_radius(params, t) + 10.0 * t.sqrt() + 1.0).clamp(4.0, 13.0)
}

/// Modal sums `K_t(r_i) = Σ mult·e^{-λt}·φ(r_i)²` at the radial nodes; the
/// on-diagonal kernel is `H(x, x, t) = K_t(r)/(c_m P)`.
#[derive(Debug, Clone)]
pub struct DiagonalTable {
    pub space: Space,
    pub t_values: Vec<f64>,
    pub r: Vec<f64>,
    pub mass: Vec<f64>,
    /// One row per time. On X the two halves of the double are averaged, so
    /// a row is the kernel in either copy.
    pub modal_sum: Vec<Vec<f64>>,
    pub lambda_max: f64,
    params: GrushinParams,
    grid: RadialOperator,
}

impl DiagonalTable {
    pub fn compute(params: &GrushinParams, space: Space, t_values: &[f64], cells: usize) -> Result<Self> {
        if t_values.is_empty() || t_values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput("heat kernel times must be positive".into()));
        }
        let t_min = t_values.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda_max = TAIL_EXPONENT / t_min;
        let grid = RadialOperator::build(params, space, OuterBc::Neumann, cells)?;
        let opts = SpectralOptions {
            cells,
            richardson: false,
            tolerance: f64::INFINITY,
            include_axis_mode: true,
            max_mode: None,
        };
        let half = if space == Space::Xdouble { 0.5 } else { 1.0 };
        let init = vec![vec![0.0; grid.len()]; t_values.len()];
        let modal_sum = fold_modes(
            params,
            space,
            &opts,
            lambda_max,
            true,
            init,
            |sol| {
                let w = half * sol.multiplicity() as f64;
                t_values
                    .iter()
                    .map(|&t| {
                        let mut row = vec![0.0; sol.r.len()];
                        for (l, phi) in sol.eigenvalues.iter().zip(&sol.vectors) {
                            let c = w * (-l * t).exp();
                            if c < 1e-300 {
                                break;
                            }
                            for (x, p) in row.iter_mut().zip(phi) {
                                *x += c * p * p;
                            }
                        }
                        row
                    })
                    .collect::<Vec<_>>()
            },
            |mut acc, rows| {
                for (a, row) in acc.iter_mut().zip(rows) {
                    for (x, y) in a.iter_mut().zip(row) {
                        *x += y;
                    }
                }
                acc
            },
        )?;
        Ok(DiagonalTable {
            space,
            t_values: t_values.to_vec(),
            r: grid.r.clone(),
            mass: grid.mass.clone(),
            modal_sum,
            lambda_max,
            params: *params,
            grid,
        })
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.t_values.iter().position(|&x| (x - t).abs() <= 1e-9 * t)
    }

    /// Index of the smallest tabulated time.
    pub fn finest_time(&self) -> usize {
        (0..self.t_values.len())
            .min_by(|&a, &b| self.t_values[a].total_cmp(&self.t_values[b]))
            .unwrap_or(0)
    }

    /// Radius up to which the table represents the kernel of the space
    /// itself: on Ȳ away from the truncation wall and from the covering
    /// correction, on the compact spaces everywhere.
    pub fn valid_radius(&self, ti: usize) -> f64 {
        match self.space {
            Space::Ybar { truncation } => {
                let t = self.t_values[ti];
                (truncation - 10.0 * t.sqrt()).min(covering_free_radius(&self.params, t))
            }
            _ => crate::spectrum::R_END,
        }
    }

    /// `H(x, x, t_i)` at radius `r` (linear in `r` between nodes).
    pub fn kernel(&self, ti: usize, r: f64) -> Result<f64> {
        let row = self
            .modal_sum
            .get(ti)
            .ok_or_else(|| Error::InvalidInput(format!("time index {ti} out of range")))?;
        let last = *self.r.last().expect("nonempty grid");
        if !(r >= 0.0 && r <= last * (1.0 + 1e-12)) {
            return Err(Error::InvalidInput(format!("radius {r} outside [0, {last}]")));
        }
        let j = self.r.partition_point(|&x| x <= r);
        let k = if j == 0 {
            row[0]
        } else if j == self.r.len() {
            row[j - 1]
        } else {
            let w = (r - self.r[j - 1]) / (self.r[j] - self.r[j - 1]);
            (1.0 - w) * row[j - 1] + w * row[j]
        };
        Ok(k / (self.params.c_m * self.params.period))
    }

    /// `∫ H(x, x, t_i) dm` over the whole space.
    pub fn trace(&self, ti: usize) -> f64 {
        let copies = if self.space == Space::Xdouble { 2.0 } else { 1.0 };
        copies * self.modal_sum[ti].iter().zip(&self.mass).map(|(k, m)| k * m).sum::<f64>()
    }

    /// `∫_{v1}^{v2} ∫_{r1}^{r2} H(x, x, t_i) dm` (in one copy of X).
    pub fn box_trace(&self, ti: usize, r1: f64, r2: f64, v1: f64, v2: f64) -> Result<f64> {
        if !(0.0 <= r1 && r1 < r2 && v1 < v2) {
            return Err(Error::InvalidInput(format!("bad box [{r1}, {r2}] x [{v1}, {v2}]")));
        }
        let profile = &self.grid.profile;
        let mut acc = 0.0;
        for (k, cv) in self.modal_sum[ti].iter().zip(&self.grid.cv) {
            let lo = cv.0.max(r1);
            let hi = cv.1.min(r2);
            if hi > lo {
                acc += k * profile.weight_integral(lo, hi);
            }
        }
        Ok(acc * (v2 - v1) / self.params.period)
    }

    /// `h(r, s)` on Ȳ. Evaluated directly when `s²` is tabulated and `r` is
    /// resolvable, otherwise moved along the scaling orbit to the finest
    /// tabulated time.
    pub fn h_value(&self, r: f64, s: f64, res: &BallResolution) -> Result<HSample> {
        if !matches!(self.space, Space::Ybar { .. }) {
            return Err(Error::InvalidInput("h is defined through the quotient cylinder only".into()));
        }
        if !(s > 0.0 && r >= 0.0) {
            return Err(Error::InvalidInput(format!("h({r}, {s}) is undefined")));
        }
        if let Some(ti) = self.time_index(s * s) {
            if r <= self.valid_radius(ti) {
                let ball = ball_volume(&self.params, Point::new(r, 0.0), s, res)?;
                return Ok(HSample {
                    r,
                    s,
                    h: ball.value * self.kernel(ti, r)?,
                    source: HSource::ModalExpansion,
                });
            }
        }
        let ti = self.finest_time();
        let s0 = self.t_values[ti].sqrt();
        let r0 = r * s0 / s;
        if r0 > self.valid_radius(ti) {
            return Err(Error::InvalidInput(format!(
                "h({r}, {s}) maps to radius {r0} beyond the resolvable {}",
                self.valid_radius(ti)
            )));
        }
        let ball = ball_volume(&self.params, Point::new(r0, 0.0), s0, res)?;
        Ok(HSample {
            r,
            s,
            h: ball.value * self.kernel(ti, r0)?,
            source: HSource::ScalingTransported,
        })
    }
}

/// `H(x, x, t)` at `x = (r, ·)` from a fresh modal table.
pub fn diagonal_heat_kernel(params: &GrushinParams, space: Space, r: f64, t: f64) -> Result<f64> {
    let table = DiagonalTable::compute(params, space, &[t], heat_cells(space, t))?;
    table.kernel(0, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HSource {
    ModalExpansion,
    ScalingTransported,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HSample {
    pub r: f64,
    pub s: f64,
    pub h: f64,
    pub source: HSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HFunctionTable {
    pub samples: Vec<HSample>,
    /// `C` with `C^{-1} ≤ h ≤ C` over the samples.
    pub bound: f64,
}

impl HFunctionTable {
    pub fn compute(table: &DiagonalTable, points: &[(f64, f64)], res: &BallResolution) -> Result<Self> {
        let samples = points
            .par_iter()
            .map(|&(r, s)| table.h_value(r, s, res))
            .collect::<Result<Vec<_>>>()?;
        let bound = samples.iter().map(|p| p.h.max(1.0 / p.h)).fold(1.0, f64::max);
        Ok(HFunctionTable { samples, bound })
    }
}

/// `h(r, s)` on the half-plane, through a modal table of Ȳ at `t = s²`.
pub fn h_function(params: &GrushinParams, r: f64, s: f64) -> Result<HSample> {
    let t = s * s;
    let space = Space::Ybar {
        truncation: heat_truncation(params, t).max(r + 10.0 * s + 1.0),
    };
    let table = DiagonalTable::compute(params, space, &[t], heat_cells(space, t))?;
    table.h_value(r, s, &BallResolution::default())
}

/// `(1+τ)^e - (1-τ)_+^e`.
fn box_factor(e: f64, tau: f64) -> f64 {
    (1.0 + tau).powf(e) - (1.0 - tau).max(0.0).powf(e)
}

/// Samples of `h(1, τ)` and `G(τ)` on a logarithmic τ-grid, with the small-τ
/// asymptotes `h → 1/4`, `f(τ^{-1}) → 4τ^{2α}/π` and the large-τ limits
/// `h(0, 1)`, `f(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceIntegrand {
    pub tau: Vec<f64>,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub h_source: HSource,
    pub h_axis: f64,
    pub f_axis: f64,
    alpha: f64,
    volume_exponent: f64,
}

impl TraceIntegrand {
    pub const TAU_MAX: f64 = 50.0;

    /// `h(1, τ) = h(s₀/τ, s₀)` from the finest time `s₀²` of a Ȳ table.
    pub fn compute(
        params: &GrushinParams,
        table: &DiagonalTable,
        per_decade: usize,
        res: &BallResolution,
    ) -> Result<Self> {
        let ti = table.finest_time();
        let s0 = table.t_values[ti].sqrt();
        let tau_lo = s0 / table.valid_radius(ti);
        if !(tau_lo > 0.0 && tau_lo < 0.1) {
            return Err(Error::InvalidInput(format!("heat table resolves too little of h: tau_lo = {tau_lo}")));
        }
        let decades = (Self::TAU_MAX / tau_lo).log10();
        let count = (decades * per_decade as f64).ceil() as usize + 1;
        let step = (Self::TAU_MAX / tau_lo).ln() / (count - 1) as f64;
        let tau: Vec<f64> = (0..count).map(|i| tau_lo * (step * i as f64).exp()).collect();
        let rows = tau
            .par_iter()
            .map(|&t| -> Result<(f64, f64)> {
                let r = (s0 / t).min(table.valid_radius(ti));
                let ball = ball_volume(params, Point::new(r, 0.0), s0, res)?;
                let h = ball.value * table.kernel(ti, r)?;
                Ok((h, g_of_tau(params, t, res)?.value))
            })
            .collect::<Result<Vec<_>>>()?;
        let h_axis = ball_volume(params, Point::new(0.0, 0.0), s0, res)?.value * table.kernel(ti, 0.0)?;
        Ok(TraceIntegrand {
            tau,
            h: rows.iter().map(|r| r.0).collect(),
            g: rows.iter().map(|r| r.1).collect(),
            h_source: HSource::ScalingTransported,
            h_axis,
            f_axis: f_ratio(params, 0.0, res)?.value,
            alpha: params.alpha,
            volume_exponent: params.volume_exponent(),
        })
    }

    /// `h(1, τ) G(τ)`.
    pub fn integrand(&self, tau: f64) -> f64 {
        let e = self.volume_exponent;
        let lo = self.tau[0];
        let hi = *self.tau.last().expect("nonempty");
        if tau < lo {
            0.25 * 4.0 * tau.powf(2.0 * self.alpha) / PI / box_factor(e, tau)
        } else if tau > hi {
            self.h_axis * self.f_axis / box_factor(e, tau)
        } else {
            let u: Vec<f64> = self.tau.iter().map(|t| t.ln()).collect();
            let q: Vec<f64> = self.h.iter().zip(&self.g).map(|(h, g)| (h * g).ln()).collect();
            lagrange4(&u, &q, tau.ln()).exp()
        }
    }

    /// `∫_a^b h(1, τ) G(τ) dτ/τ`; `b = ∞` allowed.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0 && b > a) {
            return Err(Error::InvalidInput(format!("bad tau range [{a}, {b}]")));
        }
        let lo = self.tau[0].ln();
        let hi = self.tau.last().expect("nonempty").ln();
        let end = hi + 40.0 / self.volume_exponent;
        let (ua, ub) = (a.ln(), b.ln().min(end));
        let mut cuts = vec![ua];
        for c in [lo, hi] {
            if c > ua && c < ub {
                cuts.push(c);
            }
        }
        cuts.push(ub);
        let f = |u: f64| self.integrand(u.exp());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                let panels = ((w[1] - w[0]) / 0.05).ceil().max(1.0) as usize;
                total += gauss5_composite(f, w[0], w[1], panels);
            }
        }
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!("integral over [{a}, {b}] is not finite")));
        }
        Ok(total)
    }
}

/// Cubic interpolation through the four nodes nearest `x`.
fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 4 {
        let j = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return (1.0 - w) * ys[j - 1] + w * ys[j];
    }
    let j = xs.partition_point(|&v| v <= x);
    let start = j.saturating_sub(2).min(n - 4);
    let mut acc = 0.0;
    for i in start..start + 4 {
        let mut l = 1.0;
        for m in start..start + 4 {
            if m != i {
                l *= (x - xs[m]) / (xs[i] - xs[m]);
            }
        }
        acc += l * ys[i];
    }
    acc
}

/// `∫_{v1}^{v2} ∫_{r1}^{r2} H(x, x, s²) dm` on the half-plane as
/// `C' s^{-1-2α} (v2-v1) ∫_{s/r2}^{s/r1} h(1,τ) G(τ) dτ/τ`,
/// `C' = (n+1-4α)/4`; `r1 = 0` and `r2 = ∞` allowed.
pub fn trace_integral(
    params: &GrushinParams,
    integrand: &TraceIntegrand,
    v: (f64, f64),
    r: (f64, f64),
    s: f64,
) -> Result<f64> {
    let ((v1, v2), (r1, r2)) = (v, r);
    if !(0.0 <= r1 && r1 < r2 && v1 < v2 && s > 0.0) {
        return Err(Error::InvalidInput(format!("bad trace box r [{r1}, {r2}], v [{v1}, {v2}], s {s}")));
    }
    let c_prime = (params.n as f64 + 1.0 - 4.0 * params.alpha) / 4.0;
    let a = if r2.is_finite() { s / r2 } else { f64::MIN_POSITIVE };
    let b = if r1 > 0.0 { s / r1 } else { f64::INFINITY };
    Ok(c_prime * s.powf(-1.0 - 2.0 * params.alpha) * (v2 - v1) * integrand.integral(a, b)?)
}

/// `L̃(s) = ∫_{s/r2}^∞ h(1,τ) G(τ) dτ/τ`.
pub fn ltilde(integrand: &TraceIntegrand, s: f64, r2: f64) -> Result<f64> {
    integrand.integral(s / r2, f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    /// Coefficient of `-log s`.
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of `s` when fitted.
    pub linear: Option<f64>,
    pub residual: f64,
}

/// Regresses `y(s)` on `-log s`, `1` and optionally `s`.
pub fn log_fit(samples: &[(f64, f64)], linear_term: bool) -> Result<LogFit> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(s, _)| {
            let mut row = vec![-s.ln(), 1.0];
            if linear_term {
                row.push(s);
            }
            row
        })
        .collect();
    let y: Vec<f64> = samples.iter().map(|p| p.1).collect();
    let LinearFit { coefficients: c, residual } = least_squares(&rows, &y)?;
    Ok(LogFit {
        slope: c[0],
        intercept: c[1],
        linear: if linear_term { Some(c[2]) } else { None },
        residual,
    })
}

/// `s² ∫_{v1}^{v2} ∫_0^{r2} H(x, x, s²) dm` on the half-plane, carried by the
/// dilation with ratio `s₀/s` to the finest time `s₀²` of a Ȳ table.
pub fn critical_box_trace(table: &DiagonalTable, v: (f64, f64), r2: f64, s: f64) -> Result<(f64, HSource)> {
    let ti = table.finest_time();
    let s0 = table.t_values[ti].sqrt();
    let lambda = s0 / s;
    let k = 1.0 + 2.0 * table.params.alpha;
    if lambda * r2 > table.valid_radius(ti) {
        return Err(Error::InvalidInput(format!(
            "box radius {} exceeds the resolvable {}",
            lambda * r2,
            table.valid_radius(ti)
        )));
    }
    let source = if (lambda - 1.0).abs() < 1e-12 { HSource::ModalExpansion } else { HSource::ScalingTransported };
    let scaled = lambda.powf(k);
    let value = table.box_trace(ti, 0.0, lambda * r2, scaled * v.0, scaled * v.1)?;
    Ok((s * s * value, source))
}

/// Both sides of the circle covering identity on `ℝ/ℤ`:
/// `Σ_l (4πt)^{-1/2} e^{-(x-y+l)²/4t}` and `Σ_k e^{-4π²k²t} cos 2πk(x-y)`.
pub fn covering_sum_circle(t: f64, x: f64, y: f64, terms: usize) -> (f64, f64) {
    let d = x - y;
    let n = terms as i64;
    let lattice = (-n..=n)
        .map(|l| (-(d + l as f64).powi(2) / (4.0 * t)).exp())
        .sum::<f64>()
        / (4.0 * PI * t).sqrt();
    let fourier = (-n..=n)
        .map(|k| (-4.0 * PI * PI * (k * k) as f64 * t).exp() * (2.0 * PI * k as f64 * d).cos())
        .sum();
    (lattice, fourier)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringTail {
    pub bound: f64,
    /// Contribution of `±l` for `l = 1, 2, …`.
    pub terms: Vec<f64>,
    /// `d(x, γ^l x)` for `l = 1, 2, …`.
    pub distances: Vec<f64>,
    pub c_ly: f64,
}

/// Numerical `d(x, γ^l x)`, `γ: v ↦ v + P`, for `l = 1..=terms`.
pub fn covering_distances(
    params: &GrushinParams,
    r0: f64,
    terms: usize,
    res: &BoundaryResolution,
) -> Result<Vec<f64>> {
    (1..=terms)
        .into_par_iter()
        .map(|l| Ok(translation_distance(params, Point::new(r0, 0.0), l as f64 * params.period, res)?.0))
        .collect()
}

/// `Σ_{l≠0} C_LY e^{-d(x, γ^l x)²/(6s²)}` from precomputed distances.
pub fn covering_tail_from(distances: &[f64], s: f64, c_ly: f64) -> Result<CoveringTail> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidInput(format!("s = {s} must lie in (0, 1)")));
    }
    let terms: Vec<f64> = distances
        .iter()
        .map(|d| 2.0 * c_ly * (-d * d / (6.0 * s * s)).exp())
        .collect();
    Ok(CoveringTail {
        bound: terms.iter().sum(),
        terms,
        distances: distances.to_vec(),
        c_ly,
    })
}

/// Bound on the deck-group correction `Σ_{l≠0} q(x, γ^l x, s)` at
/// `x = (r0, 0)`, with `C_LY` the reported bound of `h`.
pub fn covering_tail(
    params: &GrushinParams,
    r0: f64,
    s: f64,
    terms: usize,
    c_ly: f64,
    res: &BoundaryResolution,
) -> Result<CoveringTail> {
    if r0 < 0.0 {
        return Err(Error::InvalidInput(format!("r0 = {r0} is negative")));
    }
    covering_tail_from(&covering_distances(params, r0, terms, res)?, s, c_ly)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum GrowthLaw {
    /// `N(λ) ~ c λ^{β/2}`.
    Power { beta: f64 },
    /// `N(λ) ~ a λ log λ`.
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaramataLimits {
    pub law: GrowthLaw,
    /// `lim t^{β/2} Z(t)` or `lim t Z(t)/log(1/t)`.
    pub heat_limit: f64,
    /// `lim N(λ)/λ^{β/2}` or `lim N(λ)/(λ log λ)`.
    pub counting_limit: f64,
    /// Empirical Γ-factor.
    pub ratio: f64,
    pub heat_variation: f64,
    pub counting_variation: f64,
    pub tolerance: f64,
    pub t_window: (f64, f64),
    pub lambda_window: (f64, f64),
}

/// Fits `y/φ = c + d ψ/φ` (leading basis `φ`, subleading `ψ`) on the whole
/// window and on each half; returns `c` and the relative spread of the
/// half-window estimates.
fn windowed_leading(samples: &[(f64, f64)], lead: impl Fn(f64) -> f64, sub: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let fit = |pts: &[(f64, f64)]| -> Result<f64> {
        let rows: Vec<Vec<f64>> = pts.iter().map(|&(x, _)| vec![1.0, sub(x) / lead(x)]).collect();
        let y: Vec<f64> = pts.iter().map(|&(x, v)| v / lead(x)).collect();
        Ok(least_squares(&rows, &y)?.coefficients[0])
    };
    let n = samples.len();
    if n < 6 {
        return Err(Error::InvalidInput(format!("{n} samples are too few for a windowed limit")));
    }
    let all = fit(samples)?;
    let a = fit(&samples[..n / 2])?;
    let b = fit(&samples[n / 2..])?;
    Ok((all, (a - b).abs() / all.abs()))
}

fn span(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Heat-side and counting-side limits of a Karamata pair with their ratio.
/// Both sample sets must span at least a decade.
pub fn karamata_limits(
    series: &TraceSeries,
    counts: &[(f64, f64)],
    law: GrowthLaw,
    tolerance: f64,
) -> Result<KaramataLimits> {
    let mut heat: Vec<(f64, f64)> = series.t_values.iter().copied().zip(series.z_values.iter().copied()).collect();
    heat.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut count = counts.to_vec();
    count.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t_window = span(heat.iter().map(|p| p.0));
    let lambda_window = span(count.iter().map(|p| p.0));
    if t_window.1 < 10.0 * t_window.0 * (1.0 - 1e-9) || lambda_window.1 < 10.0 * lambda_window.0 * (1.0 - 1e-9) {
        return Err(Error::InvalidInput("Karamata windows must span at least one decade".into()));
    }
    let ((hl, hv), (cl, cv)) = match law {
        GrowthLaw::Power { beta } => {
            let p = beta / 2.0;
            (
                windowed_leading(&heat, |t| t.powf(-p), |_| 1.0)?,
                windowed_leading(&count, |l| l.powf(p), |_| 1.0)?,
            )
        }
        GrowthLaw::Log => {
            let tz: Vec<(f64, f64)> = heat.iter().map(|&(t, z)| (t, t * z)).collect();
            (
                windowed_leading(&tz, |t| -t.ln(), |_| 1.0)?,
                windowed_leading(&count, |l| l * l.ln(), |l| l)?,
            )
        }
    };
    let out = KaramataLimits {
        law,
        heat_limit: hl,
        counting_limit: cl,
        ratio: hl / cl,
        heat_variation: hv,
        counting_variation: cv,
        tolerance,
        t_window,
        lambda_window,
    };
    let worst = hv.max(cv);
    if worst > tolerance {
        return Err(Error::NoPlateau { variation: worst, tolerance });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{model_spectrum, Spectrum};
    use statrs::function::gamma::gamma;
    use std::f64::consts::TAU;

    fn params(alpha: f64, n: u32) -> GrushinParams {
        GrushinParams::new(alpha, n, 1.0, TAU).unwrap()
    }

    #[test]
    fn trivial_spectrum_has_unit_trace() {
        let spec = Spectrum::from_values(&[0.0], 100.0);
        let z = heat_trace(&spec, &[1.0, 0.5, 0.25]).unwrap();
        assert!(z.z_values.iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert_eq!(z.t_values, vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn model_trace_matches_double_sum() {
        let spec = model_spectrum(2000.0);
        let z = heat_trace(&spec, &[0.1, 0.2]).unwrap();
        let mut brute = 0.0;
        for k in 1..2000 {
            for m in 1..2000 {
                brute += 2.0 * (-4.0 * (k * m) as f64 * 0.1).exp();
            }
        }
        assert!((z.z_values[1] - brute).abs() < 1e-9 * brute);
        assert!(z.z_values[0] < z.z_values[1]);
        assert!(matches!(heat_trace(&spec, &[0.001]), Err(Error::TailDominates { .. })));
    }

    #[test]
    fn circle_covering_identity() {
        for t in [0.01, 0.1, 1.0] {
            for d in [0.0, 0.3] {
                let (a, b) = covering_sum_circle(t, d, 0.0, 50);
                assert!((a - b).abs() < 1e-10, "t={t}: {a} {b}");
                let (c, _) = covering_sum_circle(t, 0.0, d, 50);
                assert!((a - c).abs() < 1e-14);
            }
        }
        let (a, b) = covering_sum_circle(20.0, 0.2, 0.0, 50);
        assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_identity_on_the_double() {
        let p = params(0.5, 9);
        let ts = [0.05, 0.1, 0.2];
        let table = DiagonalTable::compute(&p, Space::Xdouble, &ts, 300).unwrap();
        let spec = crate::spectrum::assemble_spectrum(&p, Space::Xdouble, table.lambda_max, &SpectralOptions::new(300)).unwrap();
        let z = heat_trace(&spec, &ts).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            let j = z.t_values.iter().position(|&x| x == t).unwrap();
            let rel = (table.trace(i) - z.z_values[j]).abs() / z.z_values[j];
            assert!(rel < 1e-8, "t={t}: {rel}");
            assert!(table.modal_sum[i].iter().all(|k| *k > 0.0));
        }
    }

    /// Flat cylinder `ℝ × (ℝ/Lℤ)` with constant density `ρ` against area.
    fn flat_cylinder_kernel(t: f64, circumference: f64, rho: f64) -> f64 {
        let circle: f64 = (-50..=50)
            .map(|k| (-(2.0 * PI * k as f64 / circumference).powi(2) * t).exp())
            .sum::<f64>()
            / circumference;
        circle / (4.0 * PI * t).sqrt() / rho
    }

    #[test]
    fn smooth_point_matches_flat_kernel() {
        let p = params(0.5, 9);
        let t = 0.002;
        let table = DiagonalTable::compute(&p, Space::Ytilde, &[t], heat_cells(Space::Ytilde, t)).unwrap();
        let h = table.kernel(0, 2.5).unwrap();
        let oracle = flat_cylinder_kernel(t, TAU / 2.0, 16.0);
        assert!((h / oracle - 1.0).abs() < 0.05, "{h} vs {oracle}");
        assert!((t * oracle * 4.0 * PI * 16.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn karamata_power_law_ratio() {
        let beta: f64 = 2.5;
        let values: Vec<f64> = (1..=200_000).map(|j| (j as f64).powf(2.0 / beta)).collect();
        let lmax = *values.last().unwrap();
        let spec = Spectrum::from_values(&values, lmax);
        let t0 = TAIL_EXPONENT / lmax;
        let ts: Vec<f64> = (0..12).map(|i| t0 * 10f64.powf(i as f64 / 11.0)).collect();
        let z = heat_trace(&spec, &ts).unwrap();
        let counts = spec.counting_samples(lmax / 10.0, lmax, 12);
        let k = karamata_limits(&z, &counts, GrowthLaw::Power { beta }, 0.05).unwrap();
        assert!((k.counting_limit - 1.0).abs() < 0.01);
        let gamma_factor = gamma(beta / 2.0 + 1.0);
        assert!((k.ratio / gamma_factor - 1.0).abs() < 0.01, "{}", k.ratio);
        let shifted: Vec<f64> = values.iter().map(|v| v + 3.0).collect();
        let spec2 = Spectrum::from_values(&shifted, lmax + 3.0);
        let z2 = heat_trace(&spec2, &ts).unwrap();
        let k2 = karamata_limits(&z2, &spec2.counting_samples(lmax / 10.0, lmax, 12), GrowthLaw::Power { beta }, 0.05).unwrap();
        assert!((k2.heat_limit / k.heat_limit - 1.0).abs() < 0.01);
    }

    #[test]
    fn karamata_log_law_ratio() {
        let spec = model_spectrum(2e5);
        let t0 = TAIL_EXPONENT / 2e5;
        let ts: Vec<f64> = (0..12).map(|i| t0 * 10f64.powf(i as f64 / 11.0)).collect();
        let z = heat_trace(&spec, &ts).unwrap();
        let counts = spec.counting_samples(2e4, 2e5, 12);
        let k = karamata_limits(&z, &counts, GrowthLaw::Log, 0.1).unwrap();
        assert!((k.ratio - 1.0).abs() < 0.05, "{k:?}");
        assert!((k.counting_limit - 0.5).abs() < 0.05 * 0.5, "{k:?}");
    }

    #[test]
    fn log_fit_recovers_coefficients() {
        let pts: Vec<(f64, f64)> = [0.05, 0.1, 0.2, 0.4].iter().map(|&s: &f64| (s, -0.3 * s.ln() + 2.0 + 0.5 * s)).collect();
        let f = log_fit(&pts, true).unwrap();
        assert!((f.slope - 0.3).abs() < 1e-10 && (f.intercept - 2.0).abs() < 1e-10);
        assert!((f.linear.unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn covering_terms_decay() {
        let p = params(0.5, 9);
        let d = covering_distances(&p, 0.0, 4, &BoundaryResolution::default()).unwrap();
        assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
        let logs: Vec<f64> = [0.3, 0.2, 0.1]
            .iter()
            .map(|&s| covering_tail_from(&d, s, 2.0).unwrap().bound.ln())
            .collect();
        let x: Vec<f64> = [0.3f64, 0.2, 0.1].iter().map(|s| 1.0 / (s * s)).collect();
        let slope = (logs[2] - logs[0]) / (x[2] - x[0]);
        let mid = logs[0] + slope * (x[1] - x[0]);
        assert!(slope < 0.0);
        assert!((mid - logs[1]).abs() < 1e-3 * logs[1].abs());
    }
}
