//! Vertex-centred finite-volume discretization of
//! `-(1/w)(w φ')' + κ² h̃^{-2} φ` on a uniform radial grid.

use super::tridiag::SymTridiagonal;
use super::warp::{WarpProfile, BREAK1, BREAK2, R_END};
use super::{OuterBc, Space};
use crate::error::{Error, Result};
use crate::geometry::GrushinParams;
use crate::quad::gauss5_composite;

/// Weight and warp of a radial problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Profile {
    alpha: f64,
    n: u32,
    warp: Option<WarpProfile>,
    pub(crate) r_end: f64,
}

impl Profile {
    pub(crate) fn new(params: &GrushinParams, space: Space) -> Result<Self> {
        match space {
            Space::Ybar { truncation } => {
                if !(truncation > 0.0) {
                    return Err(Error::InvalidInput(format!("truncation radius {truncation} must be positive")));
                }
                Ok(Profile { alpha: params.alpha, n: params.n, warp: None, r_end: truncation })
            }
            Space::Ytilde | Space::Xdouble => Ok(Profile {
                alpha: params.alpha,
                n: params.n,
                warp: Some(WarpProfile::new(params.alpha)?),
                r_end: R_END,
            }),
        }
    }

    fn axis_exponent(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0 - 2.0 * self.alpha
    }

    pub(crate) fn weight(&self, r: f64) -> f64 {
        match self.warp {
            Some(w) => w.density(self.n, r),
            None => {
                let e = self.axis_exponent();
                if r <= 0.0 {
                    if e > 0.0 { 0.0 } else if e == 0.0 { 1.0 } else { f64::INFINITY }
                } else {
                    r.powf(e)
                }
            }
        }
    }

    /// `h̃(r)^{-2}`.
    pub(crate) fn inverse_warp_sq(&self, r: f64) -> f64 {
        match self.warp {
            Some(w) => w.h(r).powi(-2),
            None => r.powf(4.0 * self.alpha),
        }
    }

    /// `∫_a^b f(r) dr` split at the warp junctions.
    pub(crate) fn piecewise<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mut cuts = vec![a];
        if self.warp.is_some() {
            for c in [BREAK1, BREAK2] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
        cuts.push(b);
        cuts.windows(2)
            .map(|w| gauss5_composite(&f, w[0], w[1], ((w[1] - w[0]) / 0.05).ceil().max(1.0) as usize))
            .sum()
    }

    pub(crate) fn weight_integral(&self, a: f64, b: f64) -> f64 {
        self.piecewise(|r| self.weight(r), a, b)
    }

    /// True if the weight is integrable at the axis, so the axis node carries
    /// a natural zero-flux condition instead of being removed.
    pub(crate) fn keeps_axis(&self) -> bool {
        self.axis_exponent() > -1.0
    }
}

/// Assembled radial operator, independent of the Fourier index; the mode
/// enters only through `κ²` times the potential moments.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub h: f64,
    /// Radii of the unknowns.
    pub r: Vec<f64>,
    /// Control volumes `[lo, hi]` of the unknowns.
    pub cv: Vec<(f64, f64)>,
    /// `∫_CV w`.
    pub mass: Vec<f64>,
    /// `∫_CV h̃^{-2} w`.
    pub potential: Vec<f64>,
    /// Sum of face coefficients `w(r_face)/h` adjacent to each unknown.
    pub flux_diag: Vec<f64>,
    /// Face coefficient between unknowns `i` and `i+1`.
    pub flux_off: Vec<f64>,
    pub bc: OuterBc,
    pub(crate) profile: Profile,
}

impl RadialOperator {
    pub fn build(params: &GrushinParams, space: Space, bc: OuterBc, cells: usize) -> Result<Self> {
        if cells < 4 {
            return Err(Error::InvalidInput(format!("{cells} radial cells are too few")));
        }
        let profile = Profile::new(params, space)?;
        let r_end = profile.r_end;
        let h = r_end / cells as f64;
        let first = if profile.keeps_axis() { 0 } else { 1 };
        let last = match bc {
            OuterBc::Neumann => cells,
            OuterBc::Dirichlet => cells - 1,
        };
        let node = |i: usize| if i == cells { r_end } else { i as f64 * h };
        let face = |i: usize| (i as f64 + 0.5) * h;
        let mut op = RadialOperator {
            h,
            r: Vec::new(),
            cv: Vec::new(),
            mass: Vec::new(),
            potential: Vec::new(),
            flux_diag: Vec::new(),
            flux_off: Vec::new(),
            bc,
            profile,
        };
        for i in first..=last {
            let r = node(i);
            let lo = if i == 0 { 0.0 } else { face(i - 1) };
            let hi = if i == cells { r_end } else { face(i) };
            op.r.push(r);
            op.cv.push((lo, hi));
            op.mass.push(profile.weight_integral(lo, hi));
            op.potential
                .push(profile.piecewise(|x| profile.inverse_warp_sq(x) * profile.weight(x), lo, hi));
            let mut diag = 0.0;
            if i > 0 {
                diag += profile.weight(face(i - 1)) / h;
            }
            if i < cells {
                let a = profile.weight(face(i)) / h;
                diag += a;
                if i < last {
                    op.flux_off.push(a);
                }
            }
            op.flux_diag.push(diag);
        }
        Ok(op)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Unsymmetrized matrix rows `(A_ii, A_{i,i+1})` for mode `κ²`.
    pub fn stiffness(&self, kappa_sq: f64) -> (Vec<f64>, Vec<f64>) {
        let diag = self
            .flux_diag
            .iter()
            .zip(&self.potential)
            .map(|(f, p)| f + kappa_sq * p)
            .collect();
        (diag, self.flux_off.iter().map(|a| -a).collect())
    }

    /// `M^{-1/2} A M^{-1/2}` restricted to the first `len` unknowns (a
    /// Dirichlet cut beyond them).
    pub fn symmetric(&self, kappa_sq: f64, len: usize) -> Result<SymTridiagonal> {
        let len = len.min(self.len());
        let d = (0..len)
            .map(|i| (self.flux_diag[i] + kappa_sq * self.potential[i]) / self.mass[i])
            .collect();
        let e = (0..len.saturating_sub(1))
            .map(|i| -self.flux_off[i] / (self.mass[i] * self.mass[i + 1]).sqrt())
            .collect();
        SymTridiagonal::new(d, e)
    }

    /// Number of leading unknowns outside of which every eigenfunction with
    /// eigenvalue below `lambda_max` is negligible (WKB decay beyond the
    /// turning point of the monotone potential).
    pub fn active_len(&self, kappa_sq: f64, lambda_max: f64) -> usize {
        const DECAY: f64 = 40.0;
        let mut phase = 0.0;
        for (i, &r) in self.r.iter().enumerate() {
            let v = kappa_sq * self.profile.inverse_warp_sq(r);
            if v > lambda_max {
                phase += self.h * (v - lambda_max).sqrt();
                if phase > DECAY {
                    return (i + 1).max(8).min(self.len());
                }
            }
        }
        self.len()
    }
}
