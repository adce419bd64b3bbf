//! Fourier-mode decomposition and radial eigenvalue problems for the
//! truncated quotient cylinder Ȳ, the perturbed cylinder Ỹ and the doubled
//! compact space X; spectrum assembly and counting function.

mod operator;
mod tridiag;
mod warp;

pub use operator::RadialOperator;
pub use tridiag::SymTridiagonal;
pub use warp::{WarpProfile, BREAK1, BREAK2, R_END};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GrushinParams;

/// Radial domain of a mode problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Quotient cylinder with metric `dr² + r^{-4α}dv²`, cut at `r = truncation`
    /// with a Neumann wall.
    Ybar { truncation: f64 },
    /// Warped cylinder on `(0, 3]`.
    Ytilde,
    /// Two copies of Ỹ glued along `r = 3`.
    Xdouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBc {
    Neumann,
    Dirichlet,
}

impl OuterBc {
    pub fn tag(&self) -> &'static str {
        match self {
            OuterBc::Neumann => "neumann",
            OuterBc::Dirichlet => "dirichlet",
        }
    }
}

/// One separated radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeProblem {
    pub space: Space,
    pub k: i64,
    pub outer_bc: OuterBc,
    /// Radial cells of the coarse grid.
    pub cells: usize,
}

/// Angular frequency `κ = 2πk/P`.
pub fn angular_frequency(params: &GrushinParams, k: i64) -> f64 {
    2.0 * std::f64::consts::PI * k as f64 / params.period
}

/// Truncation radius of Ȳ that keeps the turning point of the lowest
/// nonzero mode at `λ_max` inside half the domain (and at least 8).
pub fn default_truncation(params: &GrushinParams, lambda_max: f64) -> f64 {
    let kappa = angular_frequency(params, 1);
    let turning = (lambda_max / (kappa * kappa)).powf(1.0 / (4.0 * params.alpha));
    (2.0 * turning).max(8.0)
}

/// Radial cells giving roughly `points_per_wavelength` nodes per local
/// wavelength at `λ_max`.
pub fn default_cells(r_end: f64, lambda_max: f64, points_per_wavelength: f64) -> usize {
    let wavelength = 2.0 * std::f64::consts::PI / lambda_max.max(1.0).sqrt();
    ((r_end / wavelength * points_per_wavelength).ceil() as usize).max(64)
}

pub fn build_radial_operator(params: &GrushinParams, problem: &ModeProblem) -> Result<RadialOperator> {
    RadialOperator::build(params, problem.space, problem.outer_bc, problem.cells)
}

/// Eigenpairs of one radial problem.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub k: i64,
    pub bc: OuterBc,
    pub kappa_sq: f64,
    /// Radii, control volumes and masses `∫_CV w` of the unknowns on the grid
    /// carrying the eigenvectors.
    pub r: Vec<f64>,
    pub cv: Vec<(f64, f64)>,
    pub mass: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Convergence estimate per eigenvalue (zero without refinement).
    pub errors: Vec<f64>,
    /// Eigenvectors `φ` with `Σ mass_i φ_i² = 1`, when requested.
    pub vectors: Vec<Vec<f64>>,
    pub(crate) grid: Option<RadialOperator>,
}

impl ModeSolution {
    pub fn multiplicity(&self) -> u32 {
        if self.k == 0 {
            1
        } else {
            2
        }
    }
}

fn single_grid(
    op: &RadialOperator,
    kappa_sq: f64,
    lambda_max: f64,
    extra: usize,
    count: Option<usize>,
    vectors: bool,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let len = op.active_len(kappa_sq, lambda_max);
    let t = op.symmetric(kappa_sq, len)?;
    let m = match count {
        Some(c) => c,
        None => t.count_below(lambda_max * (1.0 + 1e-12)) + extra,
    };
    let mut ev = t.eigenvalues(0, m.min(t.len()));
    let snap = 1e-10 * t.bounds().1.abs();
    for l in ev.iter_mut() {
        if l.abs() <= snap {
            *l = 0.0;
        }
    }
    let mut vecs = Vec::new();
    if vectors {
        for &l in &ev {
            let u = t.eigenvector(l)?;
            let mut phi = vec![0.0; op.len()];
            for i in 0..len {
                phi[i] = u[i] / op.mass[i].sqrt();
            }
            vecs.push(phi);
        }
    }
    Ok((ev, vecs))
}

/// Solves one mode on a prepared operator; with `refined = Some(op2)` the
/// eigenvalues are Richardson-extrapolated against the twice-finer grid and
/// the eigenvectors come from the finer grid.
pub fn solve_prepared(
    op: &RadialOperator,
    refined: Option<&RadialOperator>,
    k: i64,
    kappa_sq: f64,
    lambda_max: f64,
    vectors: bool,
) -> Result<ModeSolution> {
    let (eigenvalues, errors, vecs, grid) = match refined {
        None => {
            let (ev, vecs) = single_grid(op, kappa_sq, lambda_max, 0, None, vectors)?;
            let errs = vec![0.0; ev.len()];
            (ev, errs, vecs, op)
        }
        Some(fine) => {
            let (evf, vecs) = single_grid(fine, kappa_sq, lambda_max, 2, None, vectors)?;
            let (evc, _) = single_grid(op, kappa_sq, lambda_max, 0, Some(evf.len()), false)?;
            let mut ev = Vec::new();
            let mut errs = Vec::new();
            let mut kept = Vec::new();
            for (j, (&f, &c)) in evf.iter().zip(&evc).enumerate() {
                let ext = (4.0 * f - c) / 3.0;
                if ext <= lambda_max {
                    ev.push(ext);
                    errs.push((f - c).abs());
                    if vectors {
                        kept.push(vecs[j].clone());
                    }
                }
            }
            (ev, errs, kept, fine)
        }
    };
    Ok(ModeSolution {
        k,
        bc: grid.bc,
        kappa_sq,
        r: grid.r.clone(),
        cv: grid.cv.clone(),
        mass: grid.mass.clone(),
        eigenvalues,
        errors,
        vectors: vecs,
        grid: Some(grid.clone()),
    })
}

/// All eigenvalues `≤ λ_max` of one mode, Richardson-extrapolated against
/// one refinement, with fine-grid eigenvectors.
pub fn solve_modes(params: &GrushinParams, problem: &ModeProblem, lambda_max: f64) -> Result<ModeSolution> {
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidInput(format!("lambda_max = {lambda_max} must be positive")));
    }
    let coarse = build_radial_operator(params, problem)?;
    let fine = build_radial_operator(params, &ModeProblem { cells: 2 * problem.cells, ..*problem })?;
    let kappa = angular_frequency(params, problem.k);
    let sol = solve_prepared(&coarse, Some(&fine), problem.k, kappa * kappa, lambda_max, true)?;
    if let Space::Ybar { truncation } = problem.space {
        if problem.k != 0 {
            if let Some(phi) = sol.vectors.first() {
                let edge = truncation - 10.0 * fine.h;
                let mass: f64 = sol
                    .cv
                    .iter()
                    .zip(phi)
                    .filter(|((_, hi), _)| *hi > edge)
                    .map(|(cv, p)| p * p * fine.profile.weight_integral(cv.0.max(edge), cv.1))
                    .sum();
                if mass > 1e-8 {
                    return Err(Error::TruncationTooSmall { mass, radius: truncation });
                }
            }
        }
    }
    Ok(sol)
}

/// Discretization and assembly controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub cells: usize,
    /// Extrapolate against one refinement (doubles the cost).
    pub richardson: bool,
    /// Largest admissible relative convergence estimate.
    pub tolerance: f64,
    /// Keep the `k = 0` sector of Ȳ. Its spectrum is an artifact of the
    /// truncation wall (the untruncated sector is continuous).
    pub include_axis_mode: bool,
    /// Cap on `|k|`; the spectrum is then complete only within those modes.
    pub max_mode: Option<i64>,
}

impl SpectralOptions {
    pub fn new(cells: usize) -> Self {
        SpectralOptions {
            cells,
            richardson: false,
            tolerance: 1e-2,
            include_axis_mode: true,
            max_mode: None,
        }
    }
}

fn jobs(space: Space, include_axis_mode: bool, k_max: i64) -> Vec<(i64, OuterBc)> {
    let mut out = Vec::new();
    for k in 0..=k_max {
        match space {
            Space::Ybar { .. } => {
                if k > 0 || include_axis_mode {
                    out.push((k, OuterBc::Neumann));
                }
            }
            Space::Ytilde => out.push((k, OuterBc::Neumann)),
            Space::Xdouble => {
                out.push((k, OuterBc::Neumann));
                out.push((k, OuterBc::Dirichlet));
            }
        }
    }
    out
}

/// Largest `k` whose Neumann ground state lies at or below `λ_max`
/// (ground energies increase with `|k|`).
pub fn mode_cutoff(params: &GrushinParams, op: &RadialOperator, lambda_max: f64) -> Result<i64> {
    let mut k = 1i64;
    loop {
        let kappa = angular_frequency(params, k);
        let ksq = kappa * kappa;
        let t = op.symmetric(ksq, op.active_len(ksq, lambda_max))?;
        if t.count_below(lambda_max * (1.0 + 1e-12)) == 0 {
            return Ok(k - 1);
        }
        k += 1;
        if k > 100_000_000 {
            return Err(Error::EigenSolveFailure("mode cutoff not reached".into()));
        }
    }
}

/// Solves every mode with eigenvalues `≤ λ_max` and maps each solution
/// through `f`; results come back in `(k, bc)` order.
pub fn for_each_mode<T, F>(
    params: &GrushinParams,
    space: Space,
    opts: &SpectralOptions,
    lambda_max: f64,
    vectors: bool,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&ModeSolution) -> T + Sync,
{
    fold_modes(params, space, opts, lambda_max, vectors, Vec::new(), f, |mut acc, t| {
        acc.push(t);
        acc
    })
}

/// Like [`for_each_mode`] but folds the mapped results in `(k, bc)` order as
/// they arrive, so only a batch of them is alive at once.
#[allow(clippy::too_many_arguments)]
pub fn fold_modes<T, A, F, G>(
    params: &GrushinParams,
    space: Space,
    opts: &SpectralOptions,
    lambda_max: f64,
    vectors: bool,
    init: A,
    map: F,
    mut fold: G,
) -> Result<A>
where
    T: Send,
    F: Fn(&ModeSolution) -> T + Sync,
    G: FnMut(A, T) -> A,
{
    const BATCH: usize = 64;
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidInput(format!("lambda_max = {lambda_max} must be positive")));
    }
    let build = |bc, cells| RadialOperator::build(params, space, bc, cells);
    let neumann = build(OuterBc::Neumann, opts.cells)?;
    let mut k_max = mode_cutoff(params, &neumann, lambda_max)?;
    if let Some(cap) = opts.max_mode {
        k_max = k_max.min(cap);
    }
    let dirichlet = match space {
        Space::Xdouble => Some(build(OuterBc::Dirichlet, opts.cells)?),
        _ => None,
    };
    let (fine_n, fine_d) = if opts.richardson {
        (
            Some(build(OuterBc::Neumann, 2 * opts.cells)?),
            match space {
                Space::Xdouble => Some(build(OuterBc::Dirichlet, 2 * opts.cells)?),
                _ => None,
            },
        )
    } else {
        (None, None)
    };
    let solve = |&(k, bc): &(i64, OuterBc)| -> Result<T> {
        let (op, fine) = match bc {
            OuterBc::Neumann => (&neumann, fine_n.as_ref()),
            OuterBc::Dirichlet => (dirichlet.as_ref().expect("dirichlet operator"), fine_d.as_ref()),
        };
        let kappa = angular_frequency(params, k);
        let sol = solve_prepared(op, fine, k, kappa * kappa, lambda_max, vectors)?;
        if opts.richardson {
            for (l, e) in sol.eigenvalues.iter().zip(&sol.errors) {
                if *l > 0.0 && e / l > opts.tolerance {
                    return Err(Error::GridTooCoarse { indicator: e / l, tolerance: opts.tolerance });
                }
            }
        }
        Ok(map(&sol))
    };
    let list = jobs(space, opts.include_axis_mode, k_max);
    let mut acc = init;
    for batch in list.chunks(BATCH) {
        let results: Vec<Result<T>> = batch.par_iter().map(solve).collect();
        for r in results {
            acc = fold(acc, r?);
        }
    }
    Ok(acc)
}

/// One eigenvalue of the assembled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub multiplicity: u32,
    pub mode_k: i64,
    pub radial_index: usize,
    pub bc: OuterBc,
}

/// Sorted eigenvalues with multiplicities; complete up to `lambda_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
    cumulative: Vec<u64>,
    pub lambda_max: f64,
}

impl Spectrum {
    pub fn from_entries(mut entries: Vec<SpectrumEntry>, lambda_max: f64) -> Self {
        entries.sort_by(|a, b| {
            a.lambda
                .total_cmp(&b.lambda)
                .then(a.mode_k.cmp(&b.mode_k))
                .then(a.bc.tag().cmp(b.bc.tag()))
                .then(a.radial_index.cmp(&b.radial_index))
        });
        let mut acc = 0u64;
        let cumulative = entries
            .iter()
            .map(|e| {
                acc += e.multiplicity as u64;
                acc
            })
            .collect();
        Spectrum { entries, cumulative, lambda_max }
    }

    /// Eigenvalues with unit multiplicity.
    pub fn from_values(values: &[f64], lambda_max: f64) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .map(|(i, &lambda)| SpectrumEntry {
                lambda,
                multiplicity: 1,
                mode_k: 0,
                radial_index: i,
                bc: OuterBc::Neumann,
            })
            .collect();
        Spectrum::from_entries(entries, lambda_max)
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplicity-weighted number of eigenvalues `≤ λ`.
    pub fn counting(&self, lambda: f64) -> u64 {
        let idx = self.entries.partition_point(|e| e.lambda <= lambda);
        if idx == 0 {
            0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// `(λ, N(λ))` at `count` logarithmically spaced points of `[lo, hi]`.
    pub fn counting_samples(&self, lo: f64, hi: f64, count: usize) -> Vec<(f64, f64)> {
        let step = if count > 1 { (hi / lo).ln() / (count - 1) as f64 } else { 0.0 };
        (0..count)
            .map(|i| {
                let l = lo * (step * i as f64).exp();
                (l, self.counting(l) as f64)
            })
            .collect()
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity as usize))
    }
}

/// `N(λ)`.
pub fn counting_function(spec: &Spectrum, lambda: f64) -> u64 {
    spec.counting(lambda)
}

/// The model spectrum `{4km : k, m ≥ 1}` with multiplicity 2, up to `λ_max`.
pub fn model_spectrum(lambda_max: f64) -> Spectrum {
    let mut entries = Vec::new();
    let mut k = 1i64;
    while 4.0 * k as f64 <= lambda_max {
        let mut m = 1usize;
        while 4.0 * (k as f64) * (m as f64) <= lambda_max {
            entries.push(SpectrumEntry {
                lambda: 4.0 * k as f64 * m as f64,
                multiplicity: 2,
                mode_k: k,
                radial_index: m - 1,
                bc: OuterBc::Neumann,
            });
            m += 1;
        }
        k += 1;
    }
    Spectrum::from_entries(entries, lambda_max)
}

/// Full spectrum `≤ λ_max`: all Fourier modes (multiplicity 2 for `|k| ≥ 1`),
/// and for X both the symmetric (Neumann) and antisymmetric (Dirichlet)
/// halves of the double.
pub fn assemble_spectrum(
    params: &GrushinParams,
    space: Space,
    lambda_max: f64,
    opts: &SpectralOptions,
) -> Result<Spectrum> {
    let per_mode = for_each_mode(params, space, opts, lambda_max, false, |sol| {
        sol.eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &lambda)| SpectrumEntry {
                lambda,
                multiplicity: sol.multiplicity(),
                mode_k: sol.k,
                radial_index: j,
                bc: sol.bc,
            })
            .collect::<Vec<_>>()
    })?;
    Ok(Spectrum::from_entries(per_mode.into_iter().flatten().collect(), lambda_max))
}

/// Radial band `{lo ≤ r ≤ hi}` times the full circle (in every copy of X).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialRegion {
    pub lo: f64,
    pub hi: f64,
}

impl RadialRegion {
    pub fn empty() -> Self {
        RadialRegion { lo: 0.0, hi: -1.0 }
    }
}

/// `∫_{X∖A} f_j² dm` for the `j`-th eigenvector of a solved mode
/// (normalized to total mass 1; the angular factor integrates out).
pub fn eigenfunction_mass_outside(sol: &ModeSolution, j: usize, region: RadialRegion) -> Result<f64> {
    let phi = sol
        .vectors
        .get(j)
        .ok_or_else(|| Error::InvalidInput(format!("eigenvector {j} was not computed")))?;
    let op = sol
        .grid
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("mode solution lacks its grid".into()))?;
    let mut outside = 0.0;
    for ((cv, m), p) in sol.cv.iter().zip(&sol.mass).zip(phi) {
        let lo = cv.0.max(region.lo);
        let hi = cv.1.min(region.hi);
        let inside = if hi > lo { op.profile.weight_integral(lo, hi) } else { 0.0 };
        outside += p * p * (m - inside).max(0.0);
    }
    Ok(outside)
}
