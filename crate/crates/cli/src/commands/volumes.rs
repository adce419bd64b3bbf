use std::f64::consts::PI;

use grushin_core::geometry::Point;
use grushin_core::volumes::{ball_bracket, ball_volume, f_ratio, BallResolution, RatioTable};
use rayon::prelude::*;
use serde_json::json;

use super::{halton, params, Context};
use crate::failure::Failure;
use crate::output::Cell;

pub fn run(ctx: &mut Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let p = params(cfg)?;
    let base_nodes = cfg.count("volumes.nodes")?;
    if base_nodes < 9 {
        return Err(Failure::Config("config key `volumes.nodes` must be at least 9".into()));
    }
    let stencil_radius = cfg.count("volumes.stencil_radius")?;
    let res_at = |level: u32| BallResolution {
        nodes: ((base_nodes - 1) << level) + 1,
        stencil_radius,
        extrapolate_stencil: true,
    };
    let res = res_at(ctx.levels);

    let (tau_min, tau_max) = (cfg.float("volumes.tau_min"), cfg.float("volumes.tau_max"));
    let count = cfg.count("volumes.tau_count")?;
    let mut tables = Vec::new();
    for level in 0..=ctx.levels {
        tables.push(RatioTable::compute(&p, tau_min, tau_max, count, &res_at(level))?);
    }
    let table = tables.last().expect("one level");
    ctx.out.csv(
        "ratio_table.csv",
        &["tau", "f", "G"],
        table.rows().map(|r| r.map(Cell::from)),
    )?;
    let changes: Vec<f64> = tables
        .windows(2)
        .map(|w| {
            w[0].g_values
                .iter()
                .zip(&w[1].g_values)
                .map(|(a, b)| ((a - b) / b).abs())
                .fold(0.0, f64::max)
        })
        .collect();

    // brackets at deterministic (r0, s) samples with r0 > s
    let r_range = cfg.tuple("volumes.sample_r", 2)?;
    let frac = cfg.tuple("volumes.sample_s_fraction", 2)?;
    if !(frac[0] > 0.0 && frac[1] < 1.0 && frac[0] <= frac[1]) {
        return Err(Failure::Config("config key `volumes.sample_s_fraction` must lie in (0, 1)".into()));
    }
    let samples: Vec<(f64, f64)> = (1..=cfg.count("volumes.samples")? as u64)
        .map(|i| {
            let r0 = r_range[0] + (r_range[1] - r_range[0]) * halton(i, 2);
            (r0, r0 * (frac[0] + (frac[1] - frac[0]) * halton(i, 3)))
        })
        .collect();
    let rows = samples
        .par_iter()
        .map(|&(r0, s)| -> Result<_, Failure> {
            let b = ball_volume(&p, Point::new(r0, 0.0), s, &res)?;
            let (lo, hi) = ball_bracket(&p, r0, s)?;
            let inside = b.value >= lo - b.error_estimate && b.value <= hi + b.error_estimate;
            Ok((r0, s, b.value, b.error_estimate, lo, hi, inside))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let outside = rows.iter().filter(|r| !r.6).count();
    ctx.out.csv(
        "ball_bracket.csv",
        &["r0", "s", "volume", "error_estimate", "lower", "upper", "inside"],
        rows.iter().map(|r| {
            [
                Cell::from(r.0),
                Cell::from(r.1),
                Cell::from(r.2),
                Cell::from(r.3),
                Cell::from(r.4),
                Cell::from(r.5),
                Cell::from(r.6),
            ]
        }),
    )?;
    ctx.out.check_below("ball_volume_outside_bracket", outside as f64, 0.0);

    // f(τ^{-1}) against 4τ^{2α}/π
    let taus = cfg.values("volumes.asymptote_tau")?;
    let asym = taus
        .par_iter()
        .map(|&tau| -> Result<_, Failure> {
            let f = f_ratio(&p, 1.0 / tau, &res)?;
            let model = 4.0 * tau.powf(2.0 * p.alpha) / PI;
            Ok((tau, f.value, model, (f.value / model - 1.0).abs()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ctx.out.csv(
        "f_asymptote.csv",
        &["tau", "f", "model", "relative_error"],
        asym.iter().map(|a| [Cell::from(a.0), Cell::from(a.1), Cell::from(a.2), Cell::from(a.3)]),
    )?;
    let worst = asym.iter().map(|a| a.3).fold(0.0, f64::max);
    ctx.out.check_below("f_small_tau_asymptote", worst, cfg.float("volumes.asymptote_tolerance"));

    ctx.out.json(
        "volumes_report.json",
        &json!({
            "resolution": res,
            "bracket_samples": rows.len(),
            "outside_bracket": outside,
            "asymptote_worst_relative_error": worst,
            "ratio_table_max_relative_change_per_refinement": changes,
            "convergence_ratios": changes.windows(2).map(|w| w[0] / w[1]).collect::<Vec<_>>(),
        }),
    )?;
    ctx.out.script(
        "volumes.gp",
        "set logscale x\nset xlabel 'tau'\nplot 'ratio_table.csv' using 1:2 with linespoints title 'f', \
         'ratio_table.csv' using 1:3 with linespoints title 'G'\n\
         pause -1\nset logscale xy\nplot 'f_asymptote.csv' using 1:2 with points title 'f', \
         'f_asymptote.csv' using 1:3 with lines title '4 tau^(2 alpha)/pi'\n",
    )?;
    Ok(())
}
