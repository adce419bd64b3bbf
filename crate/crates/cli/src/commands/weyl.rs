use std::f64::consts::PI;

use grushin_core::spectrum::{
    assemble_spectrum, default_cells, OuterBc, RadialRegion, SpectralOptions, Spectrum, SpectrumEntry,
};
use grushin_core::weyl::{localization_data, localized_count_from, weyl_fit, FitResult, WeylLaw};
use serde_json::json;

use super::spectrum::{parse_space, radial_end};
use super::{spectral_params, Context};
use crate::config::RunConfig;
use crate::failure::Failure;
use crate::output::Cell;

fn read_spectrum(cfg: &RunConfig) -> Result<Spectrum, Failure> {
    let path = cfg.text("weyl.spectrum_file");
    if path.is_empty() {
        return Err(Failure::Config("config key `weyl.spectrum_file` is required with weyl.source = \"file\"".into()));
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::Io(format!("cannot read {path}: {e}")))?;
    let header = reader.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let lambda_col = col("lambda").ok_or_else(|| Failure::Io(format!("{path} has no `lambda` column")))?;
    let mult_col = col("mult");
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Failure::Io(format!("{path}: row {} has a malformed {what}", i + 2));
        let lambda: f64 = record[lambda_col].parse().map_err(|_| bad("lambda"))?;
        let multiplicity: u32 = match mult_col {
            Some(c) => record[c].parse().map_err(|_| bad("mult"))?,
            None => 1,
        };
        entries.push(SpectrumEntry {
            lambda,
            multiplicity,
            mode_k: 0,
            radial_index: i,
            bc: OuterBc::Neumann,
        });
    }
    let listed_max = entries.iter().map(|e| e.lambda).fold(0.0, f64::max);
    let lambda_max = match cfg.float("weyl.file_lambda_max") {
        m if m > 0.0 => m,
        _ => listed_max,
    };
    Ok(Spectrum::from_entries(entries, lambda_max))
}

pub fn run(ctx: &mut Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let p = spectral_params(cfg)?;
    let source = cfg.choice("weyl.source", &["computed", "file"])?;
    let lambda_max = cfg.float("weyl.lambda_max");
    let ppw = cfg.float("weyl.grid.points_per_wavelength");
    let computed = source == "computed";
    let (spec, space, cells) = if computed {
        let space = parse_space(cfg, "weyl.space", &p, lambda_max, "spectrum.truncation")?;
        let cells = default_cells(radial_end(space), lambda_max, ppw * (1u32 << ctx.levels) as f64);
        let spec = assemble_spectrum(&p, space, lambda_max, &SpectralOptions::new(cells))?;
        (spec, Some(space), cells)
    } else {
        (read_spectrum(cfg)?, None, 0)
    };

    let law = match cfg.choice("weyl.law", &["auto", "log_corrected", "power", "regular"])? {
        "log_corrected" => WeylLaw::LogCorrected,
        "power" => WeylLaw::Power { beta: beta(cfg, p.alpha) },
        "regular" => WeylLaw::Regular { n: p.n },
        _ if p.alpha == 0.5 => WeylLaw::LogCorrected,
        _ => WeylLaw::Power { beta: beta(cfg, p.alpha) },
    };
    let window = match cfg.list("weyl.window") {
        [] => None,
        [lo, hi] => Some((*lo, *hi)),
        _ => return Err(Failure::Config("config key `weyl.window` needs 0 or 2 numbers".into())),
    };
    let tolerance = cfg.float("weyl.tolerance");
    let fit = weyl_fit(&spec, law, window, tolerance)?;
    ctx.out.record("weyl_plateau", fit.variation, tolerance, fit.plateau_ok);

    let expected = match cfg.float("weyl.expected") {
        e if e > 0.0 => Some(e),
        e if e == 0.0 && computed && law == WeylLaw::LogCorrected => Some(p.period / (4.0 * PI)),
        _ => None,
    };
    if let Some(e) = expected {
        let rel = (fit.leading_coefficient / e - 1.0).abs();
        ctx.out.check_below("weyl_coefficient", rel, cfg.float("weyl.expected_tolerance"));
    }
    let competitor = if cfg.flag("weyl.check_exclusion") {
        let other = match law {
            WeylLaw::LogCorrected => WeylLaw::Power { beta: beta(cfg, p.alpha) },
            _ => WeylLaw::LogCorrected,
        };
        let f = weyl_fit(&spec, other, Some(fit.window), tolerance)?;
        ctx.out.record("competing_law_rejected", f.variation, tolerance, !f.plateau_ok);
        Some(f)
    } else {
        None
    };

    let samples = spec.counting_samples(fit.window.0, fit.window.1, 40);
    ctx.out.csv(
        "counting_samples.csv",
        &["lambda", "N", "model"],
        samples.iter().map(|&(l, n)| [Cell::from(l), Cell::from(n), Cell::from(model(&fit, l))]),
    )?;

    let mut localized = None;
    if computed && cfg.flag("weyl.localized") {
        let space = space.expect("computed spectrum");
        let region = cfg.tuple("weyl.region", 2)?;
        let region = RadialRegion { lo: region[0], hi: region[1] };
        let l_max = cfg.float("weyl.localized_lambda_max").min(lambda_max);
        let cells = default_cells(radial_end(space), l_max, ppw * (1u32 << ctx.levels) as f64);
        let entries = localization_data(&p, space, &SpectralOptions::new(cells), region, l_max)?;
        let eps = cfg.float("weyl.epsilon");
        let mut rows = Vec::new();
        for i in 1..=20 {
            let l = l_max * i as f64 / 20.0;
            let (m, n) = localized_count_from(&entries, eps, l)?;
            rows.push((l, m, n));
        }
        let (_, m, n) = *rows.last().expect("rows");
        let ratio = if n > 0 { m as f64 / n as f64 } else { 0.0 };
        ctx.out.check_above("localized_fraction", ratio, cfg.float("weyl.localized_min_ratio"));
        ctx.out.csv(
            "localized.csv",
            &["lambda", "m", "N"],
            rows.iter().map(|r| [Cell::from(r.0), Cell::from(r.1), Cell::from(r.2)]),
        )?;
        localized = Some(json!({ "region": region, "epsilon": eps, "lambda_max": l_max, "m": m, "N": n, "ratio": ratio }));
    }

    ctx.out.json(
        "weyl_fit.json",
        &json!({
            "source": source,
            "space": space,
            "cells": cells,
            "lambda_max": spec.lambda_max,
            "law": law,
            "fit": fit,
            "expected": expected,
            "competitor": competitor,
            "localized": localized,
        }),
    )?;
    let mut script = String::from(
        "set logscale x\nset xlabel 'lambda'\nset ylabel 'N(lambda)'\n\
         plot 'counting_samples.csv' using 1:2 with points title 'N', 'counting_samples.csv' using 1:3 with lines title 'fit'\n",
    );
    if localized.is_some() {
        script.push_str(
            "pause -1\nunset logscale\nplot 'localized.csv' using 1:2 with linespoints title 'm', \
             'localized.csv' using 1:3 with linespoints title 'N'\n",
        );
    }
    ctx.out.script("weyl.gp", &script)
}

fn beta(cfg: &RunConfig, alpha: f64) -> f64 {
    match cfg.float("weyl.beta") {
        b if b > 0.0 => b,
        _ => 1.0 + 2.0 * alpha,
    }
}

fn model(fit: &FitResult, l: f64) -> f64 {
    match fit.law {
        WeylLaw::LogCorrected => fit.leading_coefficient * l * l.ln() + fit.subleading_coefficient.unwrap_or(0.0) * l,
        WeylLaw::Power { beta } => fit.leading_coefficient * l.powf(beta / 2.0),
        WeylLaw::Regular { n } => fit.leading_coefficient * l.powf(n as f64 / 2.0),
    }
}
