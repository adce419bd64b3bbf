use grushin_core::geometry::{
    boundary_distance_constant, comparison_path_bound, dilation_check, distance_field, sample_node_pairs, snowflake_slope,
    BoundaryResolution, DistanceOptions, Grading, GridSpec, Point,
};
use serde_json::json;

use super::{grading, params, Context};
use crate::failure::Failure;
use crate::output::Cell;

pub fn run(ctx: &mut Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let p = params(cfg)?;
    let levels = ctx.levels;

    // distance field on the finest requested level
    let source = cfg.tuple("geodesic.source", 2)?;
    let mut grid = GridSpec::new(
        (0.0, cfg.float("grid.r_max")),
        (-cfg.float("grid.v_max"), cfg.float("grid.v_max")),
        cfg.count("grid.nr")?,
        cfg.count("grid.nv")?,
        grading(cfg, "grid.grading")?,
    )?;
    grid.level = levels;
    let opts = DistanceOptions {
        stencil_radius: cfg.count("grid.stencil_radius")?,
        axis_constant: None,
        tolerance: cfg.float("grid.tolerance"),
        cutoff: None,
    };
    let field = distance_field(&p, Point::new(source[0], source[1]), &grid, &opts)?;
    ctx.out.csv(
        "distance_field.csv",
        &["r", "v", "d"],
        field.rows().map(|(r, v, d)| [Cell::from(r), Cell::from(v), Cell::from(d)]),
    )?;
    ctx.out.check_below("distance_field_resolution", field.resolution_indicator, opts.tolerance);

    // dilation identity on each level up to the requested one
    let mut dgrid = GridSpec::new(
        (0.0, cfg.float("geodesic.dilation.r_max")),
        (-cfg.float("geodesic.dilation.v_max"), cfg.float("geodesic.dilation.v_max")),
        cfg.count("geodesic.dilation.nr")?,
        cfg.count("geodesic.dilation.nv")?,
        Grading::Uniform,
    )?;
    let pair_r = cfg.tuple("geodesic.dilation.pair_r", 2)?;
    let pair_v = cfg.tuple("geodesic.dilation.pair_v", 2)?;
    let pairs = sample_node_pairs(
        &dgrid,
        cfg.count("geodesic.dilation.pairs")?,
        (pair_r[0], pair_r[1]),
        (pair_v[0], pair_v[1]),
        cfg.float("geodesic.dilation.min_separation"),
    );
    if pairs.is_empty() {
        return Err(Failure::Config("`geodesic.dilation.pair_r`/`pair_v` select no grid nodes".into()));
    }
    let lambdas = cfg.values("geodesic.dilation.lambdas")?;
    let stencil = cfg.count("geodesic.dilation.stencil_radius")?;
    let mut reports = Vec::new();
    for level in 0..=levels {
        dgrid.level = level;
        reports.push(dilation_check(&p, &pairs, lambdas, &dgrid, stencil)?);
    }
    let mut rows = Vec::new();
    for rep in &reports {
        for c in &rep.cases {
            rows.push(vec![
                Cell::from(rep.level),
                Cell::from(c.x.r),
                Cell::from(c.x.v),
                Cell::from(c.y.r),
                Cell::from(c.y.v),
                Cell::from(c.lambda),
                Cell::from(c.distance),
                Cell::from(c.dilated_distance),
                Cell::from(c.defect),
            ]);
        }
    }
    ctx.out.csv(
        "dilation.csv",
        &["level", "x_r", "x_v", "y_r", "y_v", "lambda", "distance", "dilated_distance", "defect"],
        rows,
    )?;
    let worst: Vec<f64> = reports.iter().map(|r| r.worst).collect();
    let finest = *worst.last().expect("at least one level");
    ctx.out.check_below("dilation_defect", finest, cfg.float("geodesic.dilation.tolerance"));

    // boundary constant and snowflake slope
    let bres = BoundaryResolution {
        nr: cfg.count("geodesic.boundary.nr")?,
        nv: cfg.count("geodesic.boundary.nv")?,
        grading_ratio: cfg.float("geodesic.boundary.grading"),
        stencil_radius: cfg.count("geodesic.boundary.stencil_radius")?,
        levels: cfg.count("geodesic.boundary.levels")? as u32 + levels,
    };
    let boundary = boundary_distance_constant(&p, &bres)?;
    let upper = comparison_path_bound(&p, 0.0, 1.0);
    ctx.out.check_below("boundary_constant_below_comparison_path", boundary.value - boundary.error, upper);

    let sres = BoundaryResolution {
        nr: cfg.count("geodesic.snowflake.nr")?,
        nv: cfg.count("geodesic.snowflake.nv")?,
        grading_ratio: cfg.float("geodesic.snowflake.grading"),
        stencil_radius: cfg.count("geodesic.snowflake.stencil_radius")?,
        levels: 1,
    };
    let vs = cfg.values("geodesic.snowflake.v")?;
    let mut snow = Vec::new();
    for level in 0..=levels {
        snow.push(snowflake_slope(&p, vs, &sres, level)?);
    }
    let last = snow.last().expect("at least one level");
    ctx.out.csv(
        "axis_profile.csv",
        &["v", "d"],
        last.v_values.iter().zip(&last.distances).map(|(v, d)| [Cell::from(*v), Cell::from(*d)]),
    )?;
    let slope_error = (last.slope / last.target - 1.0).abs();
    ctx.out.check_below("snowflake_slope", slope_error, cfg.float("geodesic.snowflake.tolerance"));

    let ratios = |errs: &[f64]| -> Vec<f64> { errs.windows(2).map(|w| w[0] / w[1]).collect() };
    let slope_errors: Vec<f64> = snow.iter().map(|s| (s.slope / s.target - 1.0).abs()).collect();
    ctx.out.json(
        "geodesic_report.json",
        &json!({
            "distance_field": {
                "source": source,
                "level": levels,
                "resolution_indicator": field.resolution_indicator,
            },
            "dilation": {
                "pairs": pairs.len(),
                "lambdas": lambdas,
                "worst_defect_per_level": worst,
                "convergence_ratios": ratios(&worst),
            },
            "boundary_constant": boundary,
            "comparison_path_bound": upper,
            "snowflake": {
                "slope_per_level": snow.iter().map(|s| s.slope).collect::<Vec<_>>(),
                "target": last.target,
                "relative_error_per_level": slope_errors,
                "convergence_ratios": ratios(&slope_errors),
            },
        }),
    )?;
    ctx.out.script(
        "geodesic.gp",
        "set xlabel 'r'\nset ylabel 'v'\nset view map\nsplot 'distance_field.csv' using 1:2:3 with points palette pointsize 0.5 title 'd'\n\
         pause -1\nset logscale xy\nset xlabel 'v'\nset ylabel 'd((0,v),(0,0))'\n\
         plot 'axis_profile.csv' using 1:2 with linespoints title 'axis profile'\n",
    )?;
    Ok(())
}
