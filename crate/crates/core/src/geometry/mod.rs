//! Metric, measure and distances on the α-Grushin half-plane
//! `Y = [0, ∞) × ℝ` with `g = dr² + r^{-4α} dv²` and
//! `dm = c_m r^{(n-1)/2 - 2α} dr dv`.

mod axis;
mod dilation;
mod distance;
mod grid;

pub use axis::{
    axis_distance, axis_profile, boundary_distance_constant, comparison_path_bound, snowflake_slope, translation_distance, translation_distance_check,
    BoundaryConstant, BoundaryResolution, SnowflakeFit, TranslationCheck,
};
pub use dilation::{dilation_check, sample_node_pairs, DilationCase, DilationReport};
pub use distance::{distance_field, shortest_paths, DistanceField, DistanceOptions, GraphDistances};
pub use grid::{Grading, GridSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(α, n, c_m, P)` of the weighted Grushin geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrushinParams {
    pub alpha: f64,
    pub n: u32,
    pub c_m: f64,
    /// v-period of the quotient cylinder.
    pub period: f64,
    rcd_valid: bool,
}

impl GrushinParams {
    pub fn new(alpha: f64, n: u32, c_m: f64, period: f64) -> Result<Self> {
        validate_params(alpha, n, c_m, period)
    }

    /// Like [`GrushinParams::new`] but admits `n + 1 ≤ 4α`. The radial
    /// operators stay well defined (the axis node is removed), while every
    /// volume computation still rejects these parameters.
    pub fn for_spectrum(alpha: f64, n: u32, c_m: f64, period: f64) -> Result<Self> {
        match validate_params(alpha, n, c_m, period) {
            Err(Error::MeasureExponentNonIntegrable { .. }) => Ok(GrushinParams {
                alpha,
                n,
                c_m,
                period,
                rcd_valid: false,
            }),
            other => other,
        }
    }

    /// True iff `n ≥ max(4α + 3, 16α² + 8α + 1)`.
    pub fn rcd_valid(&self) -> bool {
        self.rcd_valid
    }

    /// Hausdorff dimension `1 + 2α` of the singular axis.
    pub fn snowflake_dimension(&self) -> f64 {
        1.0 + 2.0 * self.alpha
    }

    /// Exponent of the measure density, `(n-1)/2 - 2α`.
    pub fn density_exponent(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0 - 2.0 * self.alpha
    }

    /// `(n+1)/2 - 2α`, the exponent appearing in every box volume.
    pub fn volume_exponent(&self) -> f64 {
        (self.n as f64 + 1.0) / 2.0 - 2.0 * self.alpha
    }

    /// Measure scaling exponent of the dilations, `(n+3)/2`.
    pub fn dilation_measure_exponent(&self) -> f64 {
        (self.n as f64 + 3.0) / 2.0
    }

    pub fn with_period(mut self, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::NonPositivePeriod(period));
        }
        self.period = period;
        Ok(self)
    }
}

/// Checks the parameter constraints and computes the RCD dimension flag.
pub fn validate_params(alpha: f64, n: u32, c_m: f64, period: f64) -> Result<GrushinParams> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if !(c_m > 0.0 && c_m.is_finite()) {
        return Err(Error::NonPositiveMeasureConstant(c_m));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::NonPositivePeriod(period));
    }
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    let nf = n as f64;
    if nf + 1.0 <= 4.0 * alpha {
        return Err(Error::MeasureExponentNonIntegrable { n, alpha });
    }
    let bound = (4.0 * alpha + 3.0).max(16.0 * alpha * alpha + 8.0 * alpha + 1.0);
    Ok(GrushinParams {
        alpha,
        n,
        c_m,
        period,
        rcd_valid: nf >= bound - 1e-12,
    })
}

/// A point `(r, v)`; `r = 0` is the singular axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub r: f64,
    pub v: f64,
}

impl Point {
    pub const fn new(r: f64, v: f64) -> Self {
        Point { r, v }
    }

    pub fn on_axis(&self) -> bool {
        self.r == 0.0
    }
}

/// Diagonal metric coefficients `(g_rr, g_vv) = (1, r^{-4α})`.
pub fn metric_coefficients(params: &GrushinParams, p: Point) -> Result<(f64, f64)> {
    if p.r <= 0.0 {
        return Err(Error::SingularAxis);
    }
    Ok((1.0, p.r.powf(-4.0 * params.alpha)))
}

/// Density of the limit measure with respect to `dr dv`.
pub fn measure_density(params: &GrushinParams, r: f64) -> f64 {
    let e = params.density_exponent();
    if r <= 0.0 {
        return if e > 0.0 {
            0.0
        } else if e == 0.0 {
            params.c_m
        } else {
            f64::INFINITY
        };
    }
    params.c_m * r.powf(e)
}

/// The metric dilation `F_λ(r, v) = (λ r, λ^{1+2α} v)`.
pub fn dilate(params: &GrushinParams, p: Point, lambda: f64) -> Result<Point> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveScale(lambda));
    }
    Ok(Point::new(
        lambda * p.r,
        lambda.powf(params.snowflake_dimension()) * p.v,
    ))
}
