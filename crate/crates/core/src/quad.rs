//! Quadrature helpers shared by the volume, spectral and heat modules.

use crate::error::{Error, Result};

/// Double-exponential quadrature of `f` on `[a, b]`. Integrable endpoint
/// singularities are tolerated but only resolved to about 1e-7 relative;
/// substitute them away when more is needed.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let out = quadrature::double_exponential::integrate(f, a, b, tol);
    if !out.integral.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "non-finite integral on [{a}, {b}]"
        )));
    }
    Ok((out.integral, out.error_estimate))
}

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss-Legendre rule on `[a, b]`, exact for degree 9.
pub fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5_X
        .iter()
        .zip(GL5_W)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Composite five-point Gauss-Legendre with `panels` equal panels.
pub fn gauss5_composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| gauss5(&f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .sum()
}

/// Integral of `f(r)` over a triangle with vertices `(r, v)`, using the
/// degree-2 edge-midpoint rule.
pub fn triangle<F: Fn(f64) -> f64>(f: &F, p: [(f64, f64); 3]) -> f64 {
    let area = 0.5
        * ((p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1)).abs();
    if area == 0.0 {
        return 0.0;
    }
    let m01 = 0.5 * (p[0].0 + p[1].0);
    let m12 = 0.5 * (p[1].0 + p[2].0);
    let m20 = 0.5 * (p[2].0 + p[0].0);
    area * (f(m01) + f(m12) + f(m20)) / 3.0
}
