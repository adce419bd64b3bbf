//! Warp profile `h̃` of the perturbed cylinder: `r^{-2α}` up to `r = 1`,
//! constant `1/2` on `[2, 3]`, and a smooth monotone convex bridge between.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BREAK1: f64 = 1.0;
pub const BREAK2: f64 = 2.0;
pub const R_END: f64 = 3.0;

/// `h̃(r)`, with `log h̃` a cubic Hermite interpolant on `[1, 2]` matching
/// value and slope at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpProfile {
    pub alpha: f64,
}

impl WarpProfile {
    /// Fails if the bridge is not decreasing and convex (sampled check).
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        let w = WarpProfile { alpha };
        w.check_shape(2000)?;
        Ok(w)
    }

    fn log_bridge(&self, r: f64) -> (f64, f64, f64) {
        let t = r - BREAK1;
        let s0 = -2.0 * self.alpha;
        let y1 = -std::f64::consts::LN_2;
        // Hermite basis with y(0) = 0, y'(0) = s0, y(1) = y1, y'(1) = 0.
        let h10 = t * t * t - 2.0 * t * t + t;
        let h01 = -2.0 * t * t * t + 3.0 * t * t;
        let d10 = 3.0 * t * t - 4.0 * t + 1.0;
        let d01 = -6.0 * t * t + 6.0 * t;
        let dd10 = 6.0 * t - 4.0;
        let dd01 = -12.0 * t + 6.0;
        (s0 * h10 + y1 * h01, s0 * d10 + y1 * d01, s0 * dd10 + y1 * dd01)
    }

    /// `h̃(r)` for `r > 0`.
    pub fn h(&self, r: f64) -> f64 {
        if r <= BREAK1 {
            r.powf(-2.0 * self.alpha)
        } else if r < BREAK2 {
            self.log_bridge(r).0.exp()
        } else {
            0.5
        }
    }

    /// `(h̃', h̃'')`.
    pub fn derivatives(&self, r: f64) -> (f64, f64) {
        let a = self.alpha;
        if r <= BREAK1 {
            (-2.0 * a * r.powf(-2.0 * a - 1.0), 2.0 * a * (2.0 * a + 1.0) * r.powf(-2.0 * a - 2.0))
        } else if r < BREAK2 {
            let (l, dl, ddl) = self.log_bridge(r);
            let h = l.exp();
            (h * dl, h * (ddl + dl * dl))
        } else {
            (0.0, 0.0)
        }
    }

    /// Exponent `1 - (n-1)/(4α)` of the density `h̃^{1-(n-1)/(4α)}`.
    pub fn density_power(&self, n: u32) -> f64 {
        1.0 - (n as f64 - 1.0) / (4.0 * self.alpha)
    }

    /// `h̃(r)^{1-(n-1)/(4α)}`, equal to `r^{(n-1)/2-2α}` on `(0, 1]`.
    pub fn density(&self, n: u32, r: f64) -> f64 {
        if r <= BREAK1 {
            let e = (n as f64 - 1.0) / 2.0 - 2.0 * self.alpha;
            if r <= 0.0 {
                return if e > 0.0 { 0.0 } else if e == 0.0 { 1.0 } else { f64::INFINITY };
            }
            return r.powf(e);
        }
        self.h(r).powf(self.density_power(n))
    }

    /// Sampled check that the bridge is decreasing and convex.
    pub fn check_shape(&self, samples: usize) -> Result<()> {
        for i in 0..=samples {
            let r = BREAK1 + (BREAK2 - BREAK1) * i as f64 / samples as f64;
            let (d1, d2) = self.derivatives(r);
            if d1 > 1e-14 || d2 < -1e-12 {
                return Err(Error::InvalidInput(format!(
                    "warp bridge for alpha = {} is not decreasing and convex at r = {r}",
                    self.alpha
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn junctions_are_c1() {
        for a in [0.5, 0.75, 1.0] {
            let w = WarpProfile::new(a).unwrap();
            let eps = 1e-7;
            assert!((w.h(1.0 - eps) - w.h(1.0 + eps)).abs() < 1e-6);
            assert!((w.h(2.0 - eps) - 0.5).abs() < 1e-6);
            let left = w.derivatives(1.0).0;
            let right = w.derivatives(1.0 + 1e-12).0;
            assert!((left - right).abs() < 1e-9);
            assert!(w.derivatives(2.0 - 1e-12).0.abs() < 1e-9);
        }
    }

    #[test]
    fn density_matches_measure_below_one() {
        let w = WarpProfile::new(0.5).unwrap();
        for r in [0.1, 0.5, 1.0] {
            assert!((w.density(9, r) - r.powi(3)).abs() < 1e-14);
            let via_h = w.h(r).powf(w.density_power(9));
            assert!((via_h - r.powi(3)).abs() < 1e-12);
        }
        assert!((w.density(9, 2.5) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn steep_profiles_are_rejected() {
        assert!(WarpProfile::new(3.0).is_err());
    }
}
