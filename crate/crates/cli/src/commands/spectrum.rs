use grushin_core::spectrum::{
    angular_frequency, assemble_spectrum, default_cells, default_truncation, model_spectrum, Space, SpectralOptions,
    Spectrum, R_END,
};
use grushin_core::GrushinParams;
use serde_json::json;

use super::{spectral_params, Context};
use crate::config::RunConfig;
use crate::failure::Failure;
use crate::output::{Cell, Output};

pub(crate) fn parse_space(cfg: &RunConfig, key: &str, p: &GrushinParams, lambda_max: f64, truncation_key: &str) -> Result<Space, Failure> {
    Ok(match cfg.choice(key, &["ybar", "ytilde", "xdouble"])? {
        "ybar" => {
            let t = cfg.float(truncation_key);
            Space::Ybar {
                truncation: if t > 0.0 { t } else { default_truncation(p, lambda_max) },
            }
        }
        "ytilde" => Space::Ytilde,
        _ => Space::Xdouble,
    })
}

pub(crate) fn radial_end(space: Space) -> f64 {
    match space {
        Space::Ybar { truncation } => truncation,
        _ => R_END,
    }
}

pub(crate) fn write_spectrum(out: &mut Output, name: &str, spec: &Spectrum) -> Result<(), Failure> {
    out.csv(
        name,
        &["lambda", "mult", "k", "radial_index", "bc"],
        spec.entries().iter().map(|e| {
            [
                Cell::from(e.lambda),
                Cell::from(e.multiplicity),
                Cell::from(e.mode_k),
                Cell::from(e.radial_index),
                Cell::from(e.bc.tag()),
            ]
        }),
    )
}

fn write_counting(out: &mut Output, spec: &Spectrum) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for e in spec.entries() {
        if rows.last().is_some_and(|(l, _): &(f64, u64)| *l == e.lambda) {
            continue;
        }
        rows.push((e.lambda, spec.counting(e.lambda)));
    }
    out.csv(
        "counting.csv",
        &["lambda", "N"],
        rows.into_iter().map(|(l, n)| [Cell::from(l), Cell::from(n)]),
    )
}

pub fn run(ctx: &mut Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let p = spectral_params(cfg)?;
    let lambda_max = cfg.float("spectrum.lambda_max");
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Failure::Config("config key `spectrum.lambda_max` must be positive".into()));
    }
    if cfg.text("spectrum.space") == "model" {
        let spec = model_spectrum(lambda_max);
        write_spectrum(ctx.out, "spectrum.csv", &spec)?;
        write_counting(ctx.out, &spec)?;
        ctx.out.json("spectrum_report.json", &json!({ "space": "model", "lambda_max": lambda_max, "entries": spec.len() }))?;
        return plot(ctx.out);
    }
    let space = parse_space(cfg, "spectrum.space", &p, lambda_max, "spectrum.truncation")?;
    let base_cells = match cfg.count("spectrum.grid.cells")? {
        0 => default_cells(radial_end(space), lambda_max, cfg.float("spectrum.grid.points_per_wavelength")),
        c => c,
    };
    let k_max = cfg.int("spectrum.k_max");
    let options = |cells: usize| SpectralOptions {
        cells,
        richardson: cfg.flag("spectrum.richardson"),
        tolerance: cfg.float("spectrum.tolerance"),
        include_axis_mode: !matches!(space, Space::Ybar { .. }) || cfg.flag("spectrum.include_k0"),
        max_mode: (k_max >= 0).then_some(k_max),
    };
    let mut spectra = Vec::new();
    for level in 0..=ctx.levels {
        spectra.push(assemble_spectrum(&p, space, lambda_max, &options(base_cells << level))?);
    }
    let spec = spectra.last().expect("one level");
    write_spectrum(ctx.out, "spectrum.csv", spec)?;
    write_counting(ctx.out, spec)?;

    // relative change of the lowest eigenvalues under each refinement
    let changes: Vec<f64> = spectra
        .windows(2)
        .map(|w| {
            w[0].entries()
                .iter()
                .zip(w[1].entries())
                .take(20)
                .filter(|(_, b)| b.lambda > 0.0)
                .map(|(a, b)| ((a.lambda - b.lambda) / b.lambda).abs())
                .fold(0.0, f64::max)
        })
        .collect();

    // closed-form harmonic-oscillator eigenvalues 4|κ|(m+1)
    let oracle = matches!(space, Space::Ybar { .. }) && p.alpha == 0.5 && (p.n == 9 || p.n == 1);
    let mut oracle_error = None;
    if oracle {
        let worst = spec
            .entries()
            .iter()
            .filter(|e| e.mode_k != 0)
            .map(|e| {
                let exact = 4.0 * angular_frequency(&p, e.mode_k).abs() * (e.radial_index + 1) as f64;
                ((e.lambda - exact) / exact).abs()
            })
            .fold(0.0, f64::max);
        ctx.out.check_below("oscillator_eigenvalues", worst, cfg.float("spectrum.oracle_tolerance"));
        oracle_error = Some(worst);
    }
    if space == Space::Xdouble {
        let zeros = spec.entries().iter().filter(|e| e.lambda.abs() < 1e-9).count();
        ctx.out.record("single_zero_eigenvalue", zeros as f64, 1.0, zeros == 1);
    }
    ctx.out.json(
        "spectrum_report.json",
        &json!({
            "space": space,
            "period": p.period,
            "lambda_max": lambda_max,
            "cells": base_cells << ctx.levels,
            "entries": spec.len(),
            "counting_at_lambda_max": spec.counting(lambda_max),
            "oscillator_max_relative_error": oracle_error,
            "max_relative_change_per_refinement": changes,
            "convergence_ratios": changes.windows(2).map(|w| w[0] / w[1]).collect::<Vec<_>>(),
        }),
    )?;
    plot(ctx.out)
}

fn plot(out: &mut Output) -> Result<(), Failure> {
    out.script(
        "spectrum.gp",
        "set xlabel 'lambda'\nset ylabel 'N(lambda)'\nplot 'counting.csv' using 1:2 with steps title 'N'\n\
         pause -1\nset xlabel 'index'\nset ylabel 'lambda'\nplot 'spectrum.csv' using 0:1 with points title 'eigenvalues'\n",
    )
}
