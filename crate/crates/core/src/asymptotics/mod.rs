//! Large-momentum closed forms for `T`, `L`, `a_L1`, `a_L3` and the fits that
//! extract `A` and `κ₋` from computed scattering data.

mod gamma;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::fit::{fit_line, unwrap_phases};
use crate::profile::TailConstants;
use crate::scattering::{ScatteringEntry, Scatterer};

pub use gamma::{complex_gamma, ln_gamma};

/// Default lower end of fit windows in `n`.
pub const DEFAULT_MIN_N: f64 = 6.0;

/// Largest continued phase step accepted between consecutive samples.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    pub lambda: f64,
    pub width: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
}

impl AsymptoticConstants {
    pub fn new(lambda: f64, width: f64, tails: TailConstants) -> Self {
        Self {
            lambda,
            width,
            a_minus: tails.a_minus,
            a_plus: tails.a_plus,
            kappa_minus: tails.kappa_minus,
            kappa_plus: tails.kappa_plus,
        }
    }

    pub fn from_scatterer(s: &Scatterer, lambda: f64) -> Self {
        Self::new(lambda, s.total_width(), s.profile().tails())
    }

    /// `ν₊ = 1/2 − iλ/κ₊`.
    pub fn nu_plus(&self) -> Complex64 {
        Complex64::new(0.5, -self.lambda / self.kappa_plus)
    }

    /// `μ₋ = 1/2 + iλ/κ₋`.
    pub fn mu_minus(&self) -> Complex64 {
        Complex64::new(0.5, self.lambda / self.kappa_minus)
    }

    /// `ν₋ = 1/2 − iλ/κ₋`.
    fn nu_minus(&self) -> Complex64 {
        Complex64::new(0.5, -self.lambda / self.kappa_minus)
    }

    /// `(−κ₊/a₊)^{iλ/κ₊}`.
    fn plus_power(&self) -> Complex64 {
        let e = self.lambda / self.kappa_plus * (-self.kappa_plus / self.a_plus).ln();
        Complex64::from_polar(1.0, e)
    }

    /// `(κ₋/a₋)^{iλ/κ₋}`.
    fn minus_power(&self) -> Complex64 {
        let e = self.lambda / self.kappa_minus * (self.kappa_minus / self.a_minus).ln();
        Complex64::from_polar(1.0, e)
    }
}

/// `(z/2)^{iμ}` on the principal branch.
fn half_power(z: Complex64, mu: f64) -> Complex64 {
    (Complex64::new(0.0, mu) * (z / 2.0).ln()).exp()
}

fn sign_im(z: Complex64) -> f64 {
    if z.im > 0.0 {
        1.0
    } else if z.im < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Leading `T(λ, z) ≈ 2π (−a₊/κ₊)^{iλ/κ₊} (a₋/κ₋)^{−iλ/κ₋} (z/2)^{iλ(1/κ₊ − 1/κ₋)} e^{−zA}
/// / [Γ(1/2 − iλ/κ₋) Γ(1/2 + iλ/κ₊)]`.
pub fn predicted_t(c: &AsymptoticConstants, z: Complex64) -> Result<Complex64> {
    let l = c.lambda;
    let gg = (ln_gamma(c.nu_minus())? + ln_gamma(1.0 - c.nu_plus())?).exp();
    let pref = 2.0 * PI * c.plus_power().conj() * c.minus_power() / gg;
    Ok(pref * half_power(z, l * (1.0 / c.kappa_plus - 1.0 / c.kappa_minus)) * (-z * c.width).exp())
}

/// Leading `L(λ, z) ≈ i (κ₋/a₋)^{2iλ/κ₋} Γ(1/2 + iλ/κ₋)/Γ(1/2 − iλ/κ₋) (z/2)^{−2iλ/κ₋}`.
pub fn predicted_l(c: &AsymptoticConstants, z: Complex64) -> Result<Complex64> {
    let ratio = (ln_gamma(c.mu_minus())? - ln_gamma(c.nu_minus())?).exp();
    let p = c.minus_power();
    Ok(Complex64::i() * p * p * ratio * half_power(z, -2.0 * c.lambda / c.kappa_minus))
}

/// Leading `a_L1`, including the subdominant `e^{−zA}` branch off the real axis.
pub fn predicted_al1(c: &AsymptoticConstants, z: Complex64) -> Result<Complex64> {
    let l = c.lambda;
    let gg = (ln_gamma(1.0 - c.nu_plus())? + ln_gamma(1.0 - c.mu_minus())?).exp();
    let pref = gg / (2.0 * PI) * c.plus_power() * c.minus_power().conj();
    let pw = half_power(z, l * (1.0 / c.kappa_minus - 1.0 / c.kappa_plus));
    let mut e = (z * c.width).exp();
    let s = sign_im(z);
    if s != 0.0 {
        let twist = (-s * PI * l * (1.0 / c.kappa_plus - 1.0 / c.kappa_minus)).exp();
        e += (-z * c.width).exp() * twist;
    }
    Ok(pref * pw * e)
}

/// Leading `a_L3`, including the subdominant `e^{−zA}` branch off the real axis.
pub fn predicted_al3(c: &AsymptoticConstants, z: Complex64) -> Result<Complex64> {
    let l = c.lambda;
    let gg = (ln_gamma(1.0 - c.nu_plus())? + ln_gamma(1.0 - c.nu_minus())?).exp();
    let pref = Complex64::i() * gg / (2.0 * PI) * c.plus_power() * c.minus_power();
    let pw = half_power(z, -l * (1.0 / c.kappa_minus + 1.0 / c.kappa_plus));
    let mut e = (z * c.width).exp();
    let s = sign_im(z);
    if s != 0.0 {
        let arg = Complex64::new(0.0, s * PI)
            * Complex64::new(1.0, l * (1.0 / c.kappa_plus + 1.0 / c.kappa_minus));
        e += (-z * c.width).exp() * arg.exp();
    }
    Ok(pref * pw * e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// `(n, ln value)` pairs that entered the fit.
    pub samples: Vec<(f64, f64)>,
    pub rate: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub window: (f64, f64),
}

/// Least squares `ln|v| ≈ intercept − rate·n` over `n ∈ window`.
pub fn fit_exponential_decay(values: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let mut logs = Vec::with_capacity(values.len());
    for (i, &(n, v)) in values.iter().enumerate() {
        if n < window.0 || n > window.1 {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveMagnitude { index: i, value: v });
        }
        logs.push((n, v.ln()));
    }
    fit_log_decay(&logs, window)
}

/// As [`fit_exponential_decay`], for data already given as `(n, ln|v|)`.
pub fn fit_log_decay(log_values: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let samples: Vec<(f64, f64)> = log_values
        .iter()
        .copied()
        .filter(|(n, l)| *n >= window.0 && *n <= window.1 && l.is_finite())
        .collect();
    if samples.len() < 4 {
        return Err(Error::NotEnoughSamples {
            needed: 4,
            got: samples.len(),
        });
    }
    let (ns, ls): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let f = fit_line(&ns, &ls);
    Ok(DecayFit {
        samples,
        rate: -f.slope,
        intercept: f.intercept,
        rms_residual: f.rms_residual,
        window,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaFit {
    pub kappa_minus: f64,
    /// Slope of the continued `arg L` against `ln n`; equals `−2λ/κ₋`.
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub phases: Vec<f64>,
}

/// Fits the continued phase of `L(λ, n)` against `ln n`.
pub fn recover_kappa_minus(entries: &[ScatteringEntry]) -> Result<KappaFit> {
    if entries.len() < 4 {
        return Err(Error::NotEnoughSamples {
            needed: 4,
            got: entries.len(),
        });
    }
    let lambda = entries[0].pt.lambda;
    let mut sorted: Vec<&ScatteringEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.pt.z.re.total_cmp(&b.pt.z.re));
    let raw: Vec<f64> = sorted.iter().map(|e| e.l.arg()).collect();
    let (phases, _) = unwrap_phases(&raw);
    for (k, w) in phases.windows(2).enumerate() {
        let jump = (w[1] - w[0]).abs();
        if jump > MAX_PHASE_STEP {
            return Err(Error::PhaseUnwrap {
                n: sorted[k + 1].pt.z.re,
                jump,
            });
        }
    }
    let ln_n: Vec<f64> = sorted.iter().map(|e| e.pt.z.re.ln()).collect();
    let f = fit_line(&ln_n, &phases);
    Ok(KappaFit {
        kappa_minus: -2.0 * lambda / f.slope,
        slope: f.slope,
        intercept: f.intercept,
        rms_residual: f.rms_residual,
        phases,
    })
}
