//! Symmetric tridiagonal eigenproblems: Sturm counts, bisection and inverse
//! iteration.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e[i]` couples `i` and `i+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if d.is_empty() || e.len() + 1 != d.len() {
            return Err(Error::EigenSolveFailure(format!(
                "inconsistent tridiagonal sizes {} and {}",
                d.len(),
                e.len()
            )));
        }
        Ok(SymTridiagonal { d, e })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of the
    /// LDLᵀ factorization of `T - x`).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut q = self.d[0] - x;
        let mut count = usize::from(q < 0.0);
        for i in 1..self.d.len() {
            if q == 0.0 {
                q = tiny;
            }
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            count += usize::from(q < 0.0);
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let rad = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - rad);
            hi = hi.max(self.d[i] + rad);
        }
        (lo, hi)
    }

    /// Eigenvalues with indices `first..last` (ascending) by bisection.
    pub fn eigenvalues(&self, first: usize, last: usize) -> Vec<f64> {
        let last = last.min(self.len());
        if first >= last {
            return Vec::new();
        }
        let (lo, hi) = self.bounds();
        let pad = 1e-12 * (lo.abs() + hi.abs()) + f64::MIN_POSITIVE;
        let (lo, hi) = (lo - pad, hi + pad);
        let mut out = vec![0.0; last - first];
        let floor = 1e-15 * (lo.abs() + hi.abs());
        self.isolate(lo, hi, self.count_below(lo), self.count_below(hi), first, last, floor, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn isolate(&self, lo: f64, hi: f64, c_lo: usize, c_hi: usize, first: usize, last: usize, floor: f64, out: &mut [f64]) {
        let want_lo = c_lo.max(first);
        let want_hi = c_hi.min(last);
        if want_lo >= want_hi {
            return;
        }
        let mid = 0.5 * (lo + hi);
        let tol = 1e-14 * lo.abs().max(hi.abs()) + floor;
        if hi - lo <= tol || mid <= lo || mid >= hi {
            for j in want_lo..want_hi {
                out[j - first] = mid;
            }
            return;
        }
        let c_mid = self.count_below(mid);
        self.isolate(lo, mid, c_lo, c_mid, first, last, floor, out);
        self.isolate(mid, hi, c_mid, c_hi, first, last, floor, out);
    }

    /// Unit eigenvector for the (converged) eigenvalue `lambda` by inverse
    /// iteration; the largest component is made positive.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let (lo, hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let shift = lambda + 1e-13 * scale;
        let lu = TridiagLu::factor(self, shift);
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..3 {
            x = lu.solve(&x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::EigenSolveFailure(format!(
                    "inverse iteration broke down at {lambda}"
                )));
            }
            x.iter_mut().for_each(|v| *v /= norm);
        }
        let big = x
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if big < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(x)
    }
}

/// LU factorization with partial pivoting of `T - shift`.
struct TridiagLu {
    /// Upper factor rows: `u0[i]`, `u1[i]` (i,i+1), `u2[i]` (i,i+2).
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let eps = f64::EPSILON * t.bounds().1.abs().max(1.0);
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swap = vec![false; n];
        // Current row i holds (a, b, c) at columns (i, i+1, i+2).
        let mut a = t.d[0] - shift;
        let mut b = if n > 1 { t.e[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n - 1 {
            let sub = t.e[i];
            let (na, nb) = (t.d[i + 1] - shift, if i + 2 < n { t.e[i + 1] } else { 0.0 });
            if sub.abs() > a.abs() {
                // Pivot: next row becomes the pivot row.
                swap[i] = true;
                u0[i] = sub;
                u1[i] = na;
                u2[i] = nb;
                let m = a / sub;
                l[i] = m;
                a = b - m * na;
                b = c - m * nb;
                c = 0.0;
            } else {
                let piv = if a == 0.0 { eps } else { a };
                u0[i] = piv;
                u1[i] = b;
                u2[i] = c;
                let m = sub / piv;
                l[i] = m;
                a = na - m * b;
                b = nb - m * c;
                c = 0.0;
            }
        }
        u0[n - 1] = if a == 0.0 { eps } else { a };
        TridiagLu { u0, u1, u2, l, swap }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swap[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.l[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
            if !x[i].is_finite() {
                x[i] = f64::MAX.sqrt().copysign(s);
            }
        }
        x
    }
}
