//! Weyl-law fits on computed spectra: power law, log-corrected law and the
//! smooth-space oracle, plus counts of eigenfunctions localized away from a
//! radial region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::geometry::GrushinParams;
use crate::spectrum::{eigenfunction_mass_outside, fold_modes, RadialRegion, Space, SpectralOptions, Spectrum};
use crate::volumes::unit_ball_constant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum WeylLaw {
    /// `N(λ) ~ c λ^{β/2}`.
    Power { beta: f64 },
    /// `N(λ) ~ a λ log λ + b λ`.
    LogCorrected,
    /// `N(λ) ~ c λ^{n/2}`.
    Regular { n: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub law: WeylLaw,
    pub leading_coefficient: f64,
    /// `b` of the log-corrected fit.
    pub subleading_coefficient: Option<f64>,
    pub window: (f64, f64),
    /// RMS relative residual of the fitted model.
    pub residual: f64,
    /// Spread used by the plateau criterion.
    pub variation: f64,
    pub tolerance: f64,
    pub plateau_ok: bool,
}

impl FitResult {
    /// The coefficient, or `NoPlateau` when the criterion failed.
    pub fn coefficient(&self) -> Result<f64> {
        if self.plateau_ok {
            Ok(self.leading_coefficient)
        } else {
            Err(Error::NoPlateau {
                variation: self.variation,
                tolerance: self.tolerance,
            })
        }
    }
}

/// Top decade below `0.9 λ_max`.
pub fn default_window(spec: &Spectrum) -> (f64, f64) {
    let hi = 0.9 * spec.lambda_max;
    (hi / 10.0, hi)
}

const SAMPLES: usize = 40;

/// Power and regular laws: the samples of `N/λ^{β/2}` must vary by at most
/// `tolerance` relative to their mean. Log law: least squares for
/// `N = aλ log λ + bλ`, with the two half-window estimates of `a` within
/// `tolerance` of each other.
pub fn weyl_fit(spec: &Spectrum, law: WeylLaw, window: Option<(f64, f64)>, tolerance: f64) -> Result<FitResult> {
    let (lo, hi) = window.unwrap_or_else(|| default_window(spec));
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!("bad window [{lo}, {hi}]")));
    }
    if hi > spec.lambda_max * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "window top {hi} exceeds the completeness bound {}",
            spec.lambda_max
        )));
    }
    let samples = spec.counting_samples(lo, hi, SAMPLES);
    match law {
        WeylLaw::Power { beta } => Ok(plateau(samples, law, beta / 2.0, (lo, hi), tolerance)),
        WeylLaw::Regular { n } => Ok(plateau(samples, law, n as f64 / 2.0, (lo, hi), tolerance)),
        WeylLaw::LogCorrected => {
            let fit = |pts: &[(f64, f64)]| -> Result<(f64, f64, f64)> {
                // Normalized by λ log λ so every sample weighs alike.
                let rows: Vec<Vec<f64>> = pts.iter().map(|&(l, _)| vec![1.0, 1.0 / l.ln()]).collect();
                let y: Vec<f64> = pts.iter().map(|&(l, n)| n / (l * l.ln())).collect();
                let f = least_squares(&rows, &y)?;
                let mean = y.iter().sum::<f64>() / y.len() as f64;
                Ok((f.coefficients[0], f.coefficients[1], f.residual / mean.abs()))
            };
            let (a, b, residual) = fit(&samples)?;
            let (a1, _, _) = fit(&samples[..SAMPLES / 2])?;
            let (a2, _, _) = fit(&samples[SAMPLES / 2..])?;
            let variation = (a1 - a2).abs() / a.abs();
            Ok(FitResult {
                law,
                leading_coefficient: a,
                subleading_coefficient: Some(b),
                window: (lo, hi),
                residual,
                variation,
                tolerance,
                plateau_ok: a > 0.0 && variation <= tolerance,
            })
        }
    }
}

fn plateau(samples: Vec<(f64, f64)>, law: WeylLaw, power: f64, window: (f64, f64), tolerance: f64) -> FitResult {
    let ratios: Vec<f64> = samples.iter().map(|&(l, n)| n / l.powf(power)).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = if mean > 0.0 { (max - min) / mean } else { f64::INFINITY };
    let residual = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64).sqrt() / mean.abs();
    FitResult {
        law,
        leading_coefficient: mean,
        subleading_coefficient: None,
        window,
        residual,
        variation,
        tolerance,
        plateau_ok: mean > 0.0 && variation <= tolerance,
    }
}

/// `ω_n (2π)^{-n} vol`.
pub fn regular_weyl_oracle(n: u32, volume: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    Ok(unit_ball_constant(n as f64) * (2.0 * std::f64::consts::PI).powi(-(n as i32)) * volume)
}

/// One eigenpair's localization data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedEntry {
    pub lambda: f64,
    pub multiplicity: u32,
    pub mass_outside: f64,
}

/// `∫_{X∖A} f_j²` for every eigenpair `≤ λ_max`, sorted by `λ`.
pub fn localization_data(
    params: &GrushinParams,
    space: Space,
    opts: &SpectralOptions,
    region: RadialRegion,
    lambda_max: f64,
) -> Result<Vec<LocalizedEntry>> {
    let per_mode = fold_modes(
        params,
        space,
        opts,
        lambda_max,
        true,
        Ok(Vec::new()),
        |sol| {
            (0..sol.eigenvalues.len())
                .map(|j| {
                    Ok(LocalizedEntry {
                        lambda: sol.eigenvalues[j],
                        multiplicity: sol.multiplicity(),
                        mass_outside: eigenfunction_mass_outside(sol, j, region)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        },
        |acc: Result<Vec<LocalizedEntry>>, part| {
            let mut acc = acc?;
            acc.extend(part?);
            Ok(acc)
        },
    )??;
    let mut entries = per_mode;
    entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(entries)
}

/// `(m_{A,ε}(λ), N(λ))`: eigenpairs `≤ λ` with `∫_{X∖A} f_j² ≥ 1-ε`, and
/// all eigenpairs `≤ λ`.
pub fn localized_count_from(entries: &[LocalizedEntry], epsilon: f64, lambda: f64) -> Result<(u64, u64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let mut m = 0u64;
    let mut n = 0u64;
    for e in entries.iter().take_while(|e| e.lambda <= lambda) {
        n += e.multiplicity as u64;
        // Rounding slack so that A = ∅ counts every normalized eigenfunction.
        if e.mass_outside >= 1.0 - epsilon - 1e-12 {
            m += e.multiplicity as u64;
        }
    }
    Ok((m, n))
}

/// `m_{A,ε}(λ)`.
pub fn localized_count(
    params: &GrushinParams,
    space: Space,
    opts: &SpectralOptions,
    region: RadialRegion,
    epsilon: f64,
    lambda: f64,
) -> Result<u64> {
    let entries = localization_data(params, space, opts, region, lambda)?;
    Ok(localized_count_from(&entries, epsilon, lambda)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{model_spectrum, OuterBc, SpectrumEntry};
    use std::f64::consts::PI;

    #[test]
    fn oracle_values() {
        assert!((regular_weyl_oracle(1, PI).unwrap() - 1.0).abs() < 1e-14);
        assert!((regular_weyl_oracle(2, 4.0 * PI * PI).unwrap() - PI).abs() < 1e-13);
        assert!((regular_weyl_oracle(2, 1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(regular_weyl_oracle(0, 1.0).is_err());
    }

    #[test]
    fn ideal_spectrum_log_coefficient() {
        let spec = model_spectrum(1e6);
        let fit = weyl_fit(&spec, WeylLaw::LogCorrected, Some((1e5, 1e6)), 0.05).unwrap();
        assert!((fit.leading_coefficient - 0.5).abs() < 0.025, "{fit:?}");
        assert!(fit.plateau_ok);
        let power = weyl_fit(&spec, WeylLaw::Power { beta: 2.0 }, Some((1e5, 1e6)), 0.15).unwrap();
        assert!(!power.plateau_ok);
        assert!(power.coefficient().is_err());
    }

    #[test]
    fn cosine_spectrum_of_an_interval() {
        // Neumann on an interval of length 1: λ = (πj)².
        let values: Vec<f64> = (0..2000).map(|j| (PI * j as f64).powi(2)).collect();
        let spec = Spectrum::from_values(&values, (PI * 1999.0).powi(2));
        let fit = weyl_fit(&spec, WeylLaw::Regular { n: 1 }, None, 0.02).unwrap();
        let oracle = regular_weyl_oracle(1, 1.0).unwrap();
        assert!((fit.leading_coefficient / oracle - 1.0).abs() < 0.02, "{fit:?}");
    }

    #[test]
    fn localized_counts_are_monotone() {
        let p = GrushinParams::new(0.5, 9, 1.0, 2.0 * PI).unwrap();
        let opts = SpectralOptions::new(300);
        let small = localization_data(&p, Space::Xdouble, &opts, RadialRegion { lo: 0.0, hi: 0.25 }, 200.0).unwrap();
        let large = localization_data(&p, Space::Xdouble, &opts, RadialRegion { lo: 0.0, hi: 1.0 }, 200.0).unwrap();
        let empty = localization_data(&p, Space::Xdouble, &opts, RadialRegion::empty(), 200.0).unwrap();
        let mut prev = 0;
        for lambda in [50.0, 100.0, 200.0] {
            let (m_empty, n) = localized_count_from(&empty, 0.1, lambda).unwrap();
            assert_eq!(m_empty, n);
            let (m_vacuous, _) = localized_count_from(&small, 1.0 - 1e-9, lambda).unwrap();
            assert_eq!(m_vacuous, n);
            let (m_small, _) = localized_count_from(&small, 0.5, lambda).unwrap();
            let (m_tight, _) = localized_count_from(&small, 0.2, lambda).unwrap();
            let (m_large, _) = localized_count_from(&large, 0.5, lambda).unwrap();
            assert!(m_tight <= m_small && m_large <= m_small && m_small >= prev);
            prev = m_small;
        }
        let direct = localized_count(&p, Space::Xdouble, &opts, RadialRegion { lo: 0.0, hi: 0.25 }, 0.5, 100.0).unwrap();
        assert_eq!(direct, localized_count_from(&small, 0.5, 100.0).unwrap().0);
    }

    #[test]
    fn window_must_lie_below_completeness() {
        let spec = Spectrum::from_entries(
            vec![SpectrumEntry { lambda: 1.0, multiplicity: 1, mode_k: 0, radial_index: 0, bc: OuterBc::Neumann }],
            10.0,
        );
        assert!(weyl_fit(&spec, WeylLaw::LogCorrected, Some((1.0, 20.0)), 0.1).is_err());
    }
}
