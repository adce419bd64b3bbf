use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spacing rule for the radial nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    Uniform,
    /// Cell sizes grow by `ratio` per cell away from `r_min` over the first
    /// third of the cells, then stay constant.
    Geometric { ratio: f64 },
}

/// Rectangular tensor grid in `(r, v)`.
///
/// `nr`, `nv` are the base node counts; `level` subdivides every base cell
/// into `2^level` equal parts so that refinements are nested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nr: usize,
    pub nv: usize,
    pub grading: Grading,
    pub level: u32,
}

impl GridSpec {
    pub fn new(r_range: (f64, f64), v_range: (f64, f64), nr: usize, nv: usize, grading: Grading) -> Result<Self> {
        let g = GridSpec {
            r_min: r_range.0,
            r_max: r_range.1,
            v_min: v_range.0,
            v_max: v_range.1,
            nr,
            nv,
            grading,
            level: 0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_max > self.r_min && self.v_max > self.v_min) {
            return Err(Error::InvalidInput(format!("degenerate grid ranges {self:?}")));
        }
        if self.nr < 2 || self.nv < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 nodes per axis".into()));
        }
        if let Grading::Geometric { ratio } = self.grading {
            if !(ratio >= 1.0 && ratio.is_finite()) {
                return Err(Error::InvalidInput(format!("grading ratio must be >= 1, got {ratio}")));
            }
        }
        Ok(())
    }

    /// One nested refinement step (spacing halved everywhere).
    pub fn refined(&self) -> GridSpec {
        GridSpec { level: self.level + 1, ..*self }
    }

    pub fn n_r(&self) -> usize {
        (self.nr - 1) * (1 << self.level) + 1
    }

    pub fn n_v(&self) -> usize {
        (self.nv - 1) * (1 << self.level) + 1
    }

    pub fn len(&self) -> usize {
        self.n_r() * self.n_v()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, r: f64, v: f64) -> bool {
        r >= self.r_min && r <= self.r_max && v >= self.v_min && v <= self.v_max
    }

    fn base_r_nodes(&self) -> Vec<f64> {
        let cells = self.nr - 1;
        let len = self.r_max - self.r_min;
        match self.grading {
            Grading::Uniform => (0..=cells)
                .map(|i| self.r_min + len * i as f64 / cells as f64)
                .collect(),
            Grading::Geometric { ratio } => {
                let graded = cells / 3;
                let widths: Vec<f64> = (0..cells)
                    .map(|i| if i < graded { ratio.powi(i as i32 - graded as i32) } else { 1.0 })
                    .collect();
                let total: f64 = widths.iter().sum();
                let mut nodes = Vec::with_capacity(cells + 1);
                let mut acc = 0.0;
                nodes.push(self.r_min);
                for w in &widths {
                    acc += w;
                    nodes.push(self.r_min + len * acc / total);
                }
                nodes[cells] = self.r_max;
                nodes
            }
        }
    }

    pub fn r_nodes(&self) -> Vec<f64> {
        subdivide(&self.base_r_nodes(), self.level)
    }

    pub fn v_nodes(&self) -> Vec<f64> {
        let cells = self.nv - 1;
        let base: Vec<f64> = (0..=cells)
            .map(|j| self.v_min + (self.v_max - self.v_min) * j as f64 / cells as f64)
            .collect();
        subdivide(&base, self.level)
    }

    pub fn dv(&self) -> f64 {
        (self.v_max - self.v_min) / (self.n_v() - 1) as f64
    }
}

fn subdivide(base: &[f64], level: u32) -> Vec<f64> {
    let parts = 1usize << level;
    let mut out = Vec::with_capacity((base.len() - 1) * parts + 1);
    for w in base.windows(2) {
        for p in 0..parts {
            out.push(w[0] + (w[1] - w[0]) * p as f64 / parts as f64);
        }
    }
    out.push(*base.last().unwrap());
    out
}

/// Index `i` with `nodes[i] <= x <= nodes[i+1]`, clamped to the last cell.
pub(crate) fn locate(nodes: &[f64], x: f64) -> usize {
    let i = nodes.partition_point(|&y| y <= x);
    i.saturating_sub(1).min(nodes.len() - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grading_is_monotone_and_nested() {
        let g = GridSpec::new((0.0, 4.0), (-1.0, 1.0), 31, 11, Grading::Geometric { ratio: 1.1 }).unwrap();
        let r = g.r_nodes();
        assert_eq!(r.len(), 31);
        assert_eq!(r[0], 0.0);
        assert_eq!(*r.last().unwrap(), 4.0);
        let widths: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(widths.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        assert!(widths[0] < widths[29] / 2.0);
        let fine = g.refined().r_nodes();
        assert_eq!(fine.len(), 61);
        for (i, x) in r.iter().enumerate() {
            assert_eq!(fine[2 * i], *x);
        }
        assert_eq!(g.refined().v_nodes().len(), 21);
    }

    #[test]
    fn locate_cells() {
        let nodes = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(locate(&nodes, 0.0), 0);
        assert_eq!(locate(&nodes, 1.5), 1);
        assert_eq!(locate(&nodes, 3.0), 2);
    }
}
