use grushin_core::fit::least_squares;
use grushin_core::geometry::BoundaryResolution;
use grushin_core::heat::{
    covering_distances, covering_sum_circle, covering_tail_from, heat_cells, heat_truncation, DiagonalTable,
    HFunctionTable,
};
use grushin_core::spectrum::Space;
use grushin_core::volumes::BallResolution;
use serde_json::json;

use super::{params, Context};
use crate::failure::Failure;
use crate::output::Cell;

/// `C_LY` from the two-sided bound of `h` at `s = 0.1` on a few radii.
fn h_bound(p: &grushin_core::GrushinParams) -> Result<f64, Failure> {
    let t = 0.01;
    let space = Space::Ybar {
        truncation: heat_truncation(p, t),
    };
    let table = DiagonalTable::compute(p, space, &[t], heat_cells(space, t))?;
    let points: Vec<(f64, f64)> = [0.0, 0.5, 1.0, 2.0].iter().map(|&r| (r, 0.1)).collect();
    Ok(HFunctionTable::compute(&table, &points, &BallResolution::default())?.bound)
}

pub fn run(ctx: &mut Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let p = params(cfg)?;

    // lattice sum against Fourier sum on ℝ/ℤ
    let terms = cfg.count("covercheck.terms")?;
    let mut theta = Vec::new();
    for &t in cfg.values("covercheck.t")? {
        if !(t > 0.0) {
            return Err(Failure::Config("config key `covercheck.t` must hold positive times".into()));
        }
        for &d in cfg.values("covercheck.offsets")? {
            let (lattice, fourier) = covering_sum_circle(t, d, 0.0, terms);
            theta.push((t, d, lattice, fourier, (lattice - fourier).abs()));
        }
    }
    let residual = theta.iter().map(|r| r.4).fold(0.0, f64::max);
    ctx.out.csv(
        "theta.csv",
        &["t", "offset", "lattice_sum", "fourier_sum", "residual"],
        theta.iter().map(|r| [Cell::from(r.0), Cell::from(r.1), Cell::from(r.2), Cell::from(r.3), Cell::from(r.4)]),
    )?;
    ctx.out.check_below("theta_identity_residual", residual, cfg.float("covercheck.tolerance"));

    // deck-group tail Σ_{l≠0} C_LY e^{-d(x, γ^l x)²/6s²}
    let c_ly = match cfg.float("covercheck.c_ly") {
        c if c > 0.0 => c,
        _ => h_bound(&p)?,
    };
    let res = BoundaryResolution {
        nr: (cfg.count("covercheck.nr")? - 1) * (1 << ctx.levels) + 1,
        nv: (cfg.count("covercheck.nv")? - 1) * (1 << ctx.levels) + 1,
        grading_ratio: cfg.float("covercheck.grading"),
        stencil_radius: cfg.count("covercheck.stencil_radius")?,
        levels: 1,
    };
    let r0 = cfg.float("covercheck.r0");
    let distances = covering_distances(&p, r0, cfg.count("covercheck.tail_terms")?, &res)?;
    let s_values = cfg.values("covercheck.s")?;
    let mut tails = Vec::new();
    for &s in s_values {
        tails.push((s, covering_tail_from(&distances, s, c_ly)?));
    }
    ctx.out.csv(
        "covering_distances.csv",
        &["l", "distance"],
        distances.iter().enumerate().map(|(l, d)| [Cell::from(l + 1), Cell::from(*d)]),
    )?;
    ctx.out.csv(
        "covering_tail.csv",
        &["s", "bound", "log_bound"],
        tails.iter().map(|(s, t)| [Cell::from(*s), Cell::from(t.bound), Cell::from(t.bound.ln())]),
    )?;
    let increasing = distances.windows(2).all(|w| w[1] > w[0]);
    ctx.out.record("translation_distances_increase", f64::from(u8::from(increasing)), 1.0, increasing);

    // log bound is affine in 1/s² with negative slope
    let mut affine = None;
    if tails.len() >= 3 {
        let rows: Vec<Vec<f64>> = tails.iter().map(|(s, _)| vec![1.0, 1.0 / (s * s)]).collect();
        let y: Vec<f64> = tails.iter().map(|(_, t)| t.bound.ln()).collect();
        let fit = least_squares(&rows, &y)?;
        let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let rel = fit.residual / scale;
        ctx.out.check_below("tail_slope_negative", fit.coefficients[1], 0.0);
        ctx.out.check_below("tail_affine_in_inverse_square", rel, cfg.float("covercheck.affine_tolerance"));
        affine = Some(json!({ "intercept": fit.coefficients[0], "slope": fit.coefficients[1], "relative_residual": rel }));
    }

    ctx.out.json(
        "covercheck.json",
        &json!({
            "theta_identity_residual": residual,
            "c_ly": c_ly,
            "r0": r0,
            "period": p.period,
            "resolution": res,
            "tail": tails.iter().map(|(s, t)| json!({ "s": s, "bound": t.bound, "terms": t.terms })).collect::<Vec<_>>(),
            "affine_fit": affine,
        }),
    )?;
    ctx.out.script(
        "covercheck.gp",
        "set logscale y\nset xlabel 't'\nplot 'theta.csv' using 1:5 with points title 'residual'\n\
         pause -1\nunset logscale\nset xlabel 's'\nplot 'covering_tail.csv' using (1/($1*$1)):3 with linespoints title 'log tail'\n",
    )
}
