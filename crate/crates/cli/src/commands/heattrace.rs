use std::f64::consts::PI;

use grushin_core::heat::{
    critical_box_trace, heat_cells, heat_trace, heat_truncation, log_fit, ltilde, trace_integral, DiagonalTable,
    HFunctionTable, HSource, TraceIntegrand, TAIL_EXPONENT,
};
use grushin_core::spectrum::{assemble_spectrum, SpectralOptions, Space};
use grushin_core::volumes::BallResolution;
use serde_json::json;

use super::{params, Context};
use crate::failure::Failure;
use crate::output::Cell;

fn log_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = if count > 1 { (hi / lo).ln() / (count - 1) as f64 } else { 0.0 };
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

pub fn run(ctx: &mut Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let p = params(cfg)?;
    let times = cfg.values("heattrace.t")?;
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(Failure::Config("config key `heattrace.t` must hold positive times".into()));
    }
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let truncation = match cfg.float("heattrace.truncation") {
        r if r > 0.0 => r,
        _ => heat_truncation(&p, t_min),
    };
    let space = Space::Ybar { truncation };
    let cells = match cfg.count("heattrace.cells")? {
        0 => heat_cells(space, t_min),
        c => c,
    } << ctx.levels;
    let table = DiagonalTable::compute(&p, space, times, cells)?;
    let res = BallResolution::default();

    // h(r, s) at the tabulated scales
    let points: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|t| cfg.list("heattrace.h_r").iter().map(move |r| (*r, t.sqrt())))
        .collect();
    let h = HFunctionTable::compute(&table, &points, &res)?;
    ctx.out.csv(
        "h_table.csv",
        &["r", "s", "h", "source"],
        h.samples.iter().map(|x| {
            [
                Cell::from(x.r),
                Cell::from(x.s),
                Cell::from(x.h),
                Cell::from(match x.source {
                    HSource::ModalExpansion => "modal_expansion",
                    HSource::ScalingTransported => "scaling_transported",
                }),
            ]
        }),
    )?;

    // s² × box trace over [0, r2] × [v1, v2] against -log s
    let box_v = cfg.tuple("heattrace.box_v", 2)?;
    let r2 = cfg.float("heattrace.box_r2");
    let s_range = cfg.tuple("heattrace.s_range", 2)?;
    let mut critical = Vec::new();
    for s in log_samples(s_range[0], s_range[1], cfg.count("heattrace.s_count")?) {
        critical.push((s, critical_box_trace(&table, (box_v[0], box_v[1]), r2, s)?.0));
    }
    let critical_fit = log_fit(&critical, true)?;
    ctx.out.csv(
        "critical_trace.csv",
        &["s", "value"],
        critical.iter().map(|&(s, v)| [Cell::from(s), Cell::from(v)]),
    )?;

    // τ-integrand and L̃(s)
    let integrand = TraceIntegrand::compute(&p, &table, cfg.count("heattrace.per_decade")?, &res)?;
    ctx.out.csv(
        "trace_integrand.csv",
        &["tau", "h", "G"],
        integrand
            .tau
            .iter()
            .zip(&integrand.h)
            .zip(&integrand.g)
            .map(|((t, h), g)| [Cell::from(*t), Cell::from(*h), Cell::from(*g)]),
    )?;
    let ls = cfg.tuple("heattrace.ltilde_s", 2)?;
    let mut lt = Vec::new();
    for s in log_samples(ls[0], ls[1], 11) {
        lt.push((s, ltilde(&integrand, s, r2)?));
    }
    let lt_fit = log_fit(&lt, true)?;
    ctx.out.csv("ltilde.csv", &["s", "value"], lt.iter().map(|&(s, v)| [Cell::from(s), Cell::from(v)]))?;

    let critical_target = (box_v[1] - box_v[0]) / (4.0 * PI);
    let ltilde_target = 1.0 / ((p.n as f64 - 1.0) * PI);
    if p.alpha == 0.5 {
        let rel = (critical_fit.slope / critical_target - 1.0).abs();
        ctx.out.check_below("critical_log_slope", rel, cfg.float("heattrace.slope_tolerance"));
        if p.n > 1 {
            let rel = (lt_fit.slope / ltilde_target - 1.0).abs();
            ctx.out.check_below("ltilde_log_slope", rel, cfg.float("heattrace.ltilde_tolerance"));
        }
    }

    // quadrature route against the direct box trace at each tabulated time
    let boxes = cfg.list("heattrace.route_boxes");
    if boxes.len() % 2 != 0 {
        return Err(Failure::Config("config key `heattrace.route_boxes` needs (r1, r2) pairs".into()));
    }
    let mut routes = Vec::new();
    for b in boxes.chunks(2) {
        for (ti, t) in times.iter().enumerate() {
            if b[1] > table.valid_radius(ti) {
                continue;
            }
            let quad = trace_integral(&p, &integrand, (box_v[0], box_v[1]), (b[0], b[1]), t.sqrt())?;
            let direct = table.box_trace(ti, b[0], b[1], box_v[0], box_v[1])?;
            routes.push((b[0], b[1], *t, quad, direct, (quad / direct - 1.0).abs()));
        }
    }
    let route_worst = routes.iter().map(|r| r.5).fold(0.0, f64::max);
    ctx.out.csv(
        "trace_routes.csv",
        &["r1", "r2", "t", "quadrature", "direct", "relative_difference"],
        routes.iter().map(|r| {
            [
                Cell::from(r.0),
                Cell::from(r.1),
                Cell::from(r.2),
                Cell::from(r.3),
                Cell::from(r.4),
                Cell::from(r.5),
            ]
        }),
    )?;
    ctx.out.check_below("trace_routes_agree", route_worst, cfg.float("heattrace.route_tolerance"));

    // Z(t) on the double: eigenvalue sum against the integrated modal kernel
    let x_times = cfg.values("heattrace.x_times")?;
    let x_min = x_times.iter().copied().fold(f64::INFINITY, f64::min);
    let x_cells = cfg.count("heattrace.x_cells")? << ctx.levels;
    let x_spec = assemble_spectrum(&p, Space::Xdouble, TAIL_EXPONENT / x_min, &SpectralOptions::new(x_cells))?;
    let series = heat_trace(&x_spec, x_times)?;
    let x_table = DiagonalTable::compute(&p, Space::Xdouble, &series.t_values, x_cells)?;
    let mut x_rows = Vec::new();
    for (ti, row) in series.rows().enumerate() {
        let integrated = x_table.trace(ti);
        x_rows.push([row[0], row[1], row[2], integrated, (integrated / row[1] - 1.0).abs()]);
    }
    let x_worst = x_rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    ctx.out.csv(
        "trace_series.csv",
        &["t", "Z", "truncation_error", "kernel_integral", "relative_difference"],
        x_rows.iter().map(|r| r.map(Cell::from)),
    )?;
    ctx.out.check_below("trace_identity", x_worst, cfg.float("heattrace.x_tolerance"));

    ctx.out.json(
        "heattrace_report.json",
        &json!({
            "truncation": truncation,
            "cells": cells,
            "times": times,
            "valid_radius": (0..times.len()).map(|i| table.valid_radius(i)).collect::<Vec<_>>(),
            "h_bound": h.bound,
            "critical_fit": critical_fit,
            "critical_target": critical_target,
            "ltilde_fit": lt_fit,
            "ltilde_target": ltilde_target,
            "trace_routes_worst": route_worst,
            "trace_identity_worst": x_worst,
        }),
    )?;
    ctx.out.script(
        "heattrace.gp",
        "set logscale x\nset xlabel 's'\nplot 'critical_trace.csv' using 1:2 with linespoints title 's^2 box trace', \
         'ltilde.csv' using 1:2 with linespoints title 'Ltilde'\n\
         pause -1\nset xlabel 'tau'\nplot 'trace_integrand.csv' using 1:2 with linespoints title 'h(1,tau)', \
         'trace_integrand.csv' using 1:3 with linespoints title 'G(tau)'\n\
         pause -1\nset logscale xy\nset xlabel 't'\nplot 'trace_series.csv' using 1:2 with linespoints title 'Z(t)'\n",
    )
}
