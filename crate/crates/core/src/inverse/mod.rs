//! Uniqueness experiments: decay of reflection differences between two
//! profiles, the cutoff depth it implies, and the transmission-only variant.

pub mod hardy;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{fit_exponential_decay, fit_log_decay, DecayFit};
use crate::error::{Error, Result};
use crate::jost::{jost_left_with, jost_right_with, Side, SpectralPoint};
use crate::profile::PotentialProfile;
use crate::scattering::{ScatteringEntry, Scatterer, ScatteringOptions};

pub use hardy::{hardy_decay_check, random_step_function, HardyReport, HardySample, StepFunction};

/// Reflection differences below this for every `n` count as identical profiles.
pub const IDENTICAL_TOL: f64 = 1e-8;
/// Allowed excess of the implied cutoff over the true divergence point.
pub const CUTOFF_SLACK: f64 = 0.25;
/// Relative threshold for "the profiles differ at `x`".
const DIVERGENCE_TOL: f64 = 1e-13;
const SCAN_STEP: f64 = 1e-3;
pub const DEFAULT_L_AGREEMENT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    IdenticalAtTolerance,
}

/// How a reflection difference was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceMethod {
    /// Wronskian of the two Jost columns at the point where the profiles part.
    Junction,
    /// Subtraction of independently computed coefficients.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferenceSample {
    pub n: f64,
    pub ln_abs_difference: f64,
    /// Whether the sample lies above the noise floor and may enter the fit.
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub side: Side,
    pub lambda: f64,
    pub method: DifferenceMethod,
    pub samples: Vec<DifferenceSample>,
    /// Plain log-linear fit, kept for audit.
    pub fit: Option<DecayFit>,
    /// Rate from `ln|Δ| ≈ c − rate·n + power·ln n` on the same window.
    pub fitted_rate: Option<f64>,
    pub power: Option<f64>,
    pub implied_b: Option<f64>,
    /// `h(B)` on the left, `h(A − B)` on the right; `None` when outside `(0, A)`.
    pub implied_cutoff_x: Option<f64>,
    /// First (left) or last (right) point where the profiles differ; `None` if
    /// they differ all the way out to the corresponding end.
    pub true_divergence_x: Option<f64>,
    pub max_difference: f64,
    pub verdict: Verdict,
}

fn differs(a: &PotentialProfile, b: &PotentialProfile, x: f64) -> bool {
    let (u, v) = (a.evaluate(x), b.evaluate(x));
    (u - v).abs() > DIVERGENCE_TOL * u.abs().max(v.abs())
}

/// Point where two profiles start (left) or stop (right) differing.
pub fn divergence_point(a: &PotentialProfile, b: &PotentialProfile, side: Side) -> Option<f64> {
    let lo = a.bulk().0.min(b.bulk().0) - 1.0;
    let hi = a.bulk().1.max(b.bulk().1) + 1.0;
    let (start, dir) = match side {
        Side::Left => (lo, 1.0),
        Side::Right => (hi, -1.0),
    };
    if differs(a, b, start) {
        return None;
    }
    let steps = ((hi - lo) / SCAN_STEP).ceil() as usize;
    let mut prev = start;
    for k in 1..=steps {
        let x = start + dir * SCAN_STEP * k as f64;
        if differs(a, b, x) {
            let (mut same, mut diff) = (prev, x);
            for _ in 0..60 {
                let mid = 0.5 * (same + diff);
                if differs(a, b, mid) {
                    diff = mid;
                } else {
                    same = mid;
                }
            }
            return Some(same);
        }
        prev = x;
    }
    Some(f64::INFINITY * dir)
}

struct Difference {
    ln_abs: f64,
    kept: bool,
}

fn junction_difference(
    sa: &Scatterer,
    sb: &Scatterer,
    pt: SpectralPoint,
    side: Side,
    x: f64,
) -> Result<Difference> {
    let opts = &sa.options().jost;
    let (ja, jb, cols) = match side {
        Side::Left => (
            jost_left_with(sa.profile(), pt, &[x], opts)?[0],
            jost_left_with(sb.profile(), pt, &[x], opts)?[0],
            (0, 2),
        ),
        Side::Right => (
            jost_right_with(sa.profile(), pt, &[x], opts)?[0],
            jost_right_with(sb.profile(), pt, &[x], opts)?[0],
            (1, 3),
        ),
    };
    let (f1, f2) = (ja.m.m[cols.0], ja.m.m[cols.1]);
    let (g1, g2) = (jb.m.m[cols.0], jb.m.m[cols.1]);
    // Left: (g1 f2 − g2 f1); right: (f1 g2 − f2 g1); equal up to sign.
    let w = g1 * f2 - g2 * f1;
    let scale = (g1 * f2).norm() + (g2 * f1).norm();
    let ta = sa.transfer_matrix(pt)?;
    let tb = sb.transfer_matrix(pt)?;
    let ln_abs = w.norm().ln() + ja.log_scale + jb.log_scale
        - ta.m.m[0].norm().ln()
        - ta.log_scale
        - tb.m.m[0].norm().ln()
        - tb.log_scale;
    let floor = 1e2 * opts.rtol;
    Ok(Difference {
        ln_abs,
        kept: w.norm() > floor * scale,
    })
}

fn reflection(e: &ScatteringEntry, side: Side) -> Complex64 {
    match side {
        Side::Left => e.l,
        Side::Right => e.r,
    }
}

fn direct_difference(sa: &Scatterer, sb: &Scatterer, pt: SpectralPoint, side: Side) -> Result<Difference> {
    let ea = sa.scattering_entry(pt)?;
    let eb = sb.scattering_entry(pt)?;
    let d = (reflection(&ea, side) - reflection(&eb, side)).norm();
    Ok(Difference {
        ln_abs: d.ln(),
        kept: d > 1e2 * sa.options().jost.rtol,
    })
}

/// Fit window: the upper half of the kept indices, or the last four if fewer.
fn stable_window(samples: &[DifferenceSample]) -> Option<(f64, f64)> {
    let kept: Vec<f64> = samples.iter().filter(|s| s.kept).map(|s| s.n).collect();
    if kept.len() < 4 {
        return None;
    }
    let top = *kept.last().unwrap();
    let upper = kept.iter().filter(|&&n| n >= 0.5 * top).count();
    let lo = if upper >= 4 { 0.5 * top } else { kept[kept.len() - 4] };
    Some((lo, top))
}

/// Least squares `ln|Δ| ≈ c − rate·n + power·ln n` over `n ∈ window`.
pub fn power_corrected_rate(logs: &[(f64, f64)], window: (f64, f64)) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = logs
        .iter()
        .copied()
        .filter(|(n, l)| *n >= window.0 && *n <= window.1 && l.is_finite())
        .collect();
    if pts.len() < 5 {
        return Err(Error::NotEnoughSamples {
            needed: 5,
            got: pts.len(),
        });
    }
    let m = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => -pts[i].0,
        _ => pts[i].0.ln(),
    });
    let y = DVector::from_fn(pts.len(), |i, _| pts[i].1);
    let sol = m
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::FitFailure {
            side: "decay",
            reason: e.to_string(),
            residual: f64::NAN,
        })?;
    Ok((sol[1], sol[2]))
}

pub fn uniqueness_experiment(
    pa: &PotentialProfile,
    pb: &PotentialProfile,
    lambda: f64,
    n_max: usize,
    side: Side,
) -> Result<UniquenessReport> {
    uniqueness_experiment_with(pa, pb, lambda, n_max, side, ScatteringOptions::default())
}

pub fn uniqueness_experiment_with(
    pa: &PotentialProfile,
    pb: &PotentialProfile,
    lambda: f64,
    n_max: usize,
    side: Side,
    opts: ScatteringOptions,
) -> Result<UniquenessReport> {
    if lambda == 0.0 {
        return Err(Error::Domain {
            what: "lambda",
            value: 0.0,
            domain: "λ ≠ 0 (zero energy is translation-blind)".into(),
        });
    }
    if n_max < 1 {
        return Err(Error::Empty("n range"));
    }
    let sa = Scatterer::with_options(pa, opts)?;
    let sb = Scatterer::with_options(pb, opts)?;
    let divergence = divergence_point(pa, pb, side);
    let junction = divergence.filter(|x| x.is_finite());
    let method = if junction.is_some() {
        DifferenceMethod::Junction
    } else {
        DifferenceMethod::Direct
    };
    let ns: Vec<f64> = (1..=n_max).map(|n| n as f64).collect();
    let diffs: Vec<Difference> = ns
        .par_iter()
        .map(|&n| {
            let pt = SpectralPoint::real(lambda, n);
            match junction {
                Some(x) => junction_difference(&sa, &sb, pt, side, x),
                None => direct_difference(&sa, &sb, pt, side),
            }
        })
        .collect::<Result<_>>()?;
    let samples: Vec<DifferenceSample> = ns
        .iter()
        .zip(&diffs)
        .map(|(&n, d)| DifferenceSample {
            n,
            ln_abs_difference: d.ln_abs,
            kept: d.kept && d.ln_abs.is_finite(),
        })
        .collect();
    let max_difference = samples
        .iter()
        .map(|s| s.ln_abs_difference.exp())
        .fold(0.0, f64::max);
    let identical = divergence.is_some_and(|x| x.is_infinite()) || max_difference < IDENTICAL_TOL;
    let mut report = UniquenessReport {
        side,
        lambda,
        method,
        samples,
        fit: None,
        fitted_rate: None,
        power: None,
        implied_b: None,
        implied_cutoff_x: None,
        true_divergence_x: divergence,
        max_difference,
        verdict: Verdict::IdenticalAtTolerance,
    };
    if identical {
        return Ok(report);
    }
    let window = stable_window(&report.samples).ok_or(Error::NotEnoughSamples {
        needed: 4,
        got: report.samples.iter().filter(|s| s.kept).count(),
    })?;
    let logs: Vec<(f64, f64)> = report
        .samples
        .iter()
        .filter(|s| s.kept)
        .map(|s| (s.n, s.ln_abs_difference))
        .collect();
    let fit = fit_log_decay(&logs, window)?;
    let (rate, power) = power_corrected_rate(&logs, window)?;
    let b = 0.5 * rate;
    let map = sa.liouville();
    let a_width = map.total_width();
    let cutoff = match side {
        Side::Left => map.h(b).ok(),
        Side::Right => map.h(a_width - b).ok(),
    };
    let verdict = match (side, cutoff, divergence) {
        (_, _, None) => Verdict::Violated,
        (Side::Left, Some(c), Some(d)) if c <= d + CUTOFF_SLACK => Verdict::Consistent,
        (Side::Right, Some(c), Some(d)) if c >= d - CUTOFF_SLACK => Verdict::Consistent,
        // Decay beyond the total width: cutoff lies past the whole line.
        (Side::Left, None, Some(_)) if b <= 0.0 => Verdict::Consistent,
        (Side::Right, None, Some(_)) if b <= 0.0 => Verdict::Consistent,
        _ => Verdict::Violated,
    };
    report.fitted_rate = Some(rate);
    report.power = Some(power);
    report.implied_b = Some(b);
    report.implied_cutoff_x = cutoff;
    report.fit = Some(fit);
    report.verdict = verdict;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransmissionSample {
    pub n: f64,
    pub abs_t_a: f64,
    pub abs_t_b: f64,
    pub abs_t_difference: f64,
    pub abs_l_difference: f64,
    /// `−arg(L̃/L)/(2λ)`.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmissionVerdict {
    HypothesesMet,
    HypothesesNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionReport {
    pub lambda: f64,
    pub samples: Vec<TransmissionSample>,
    pub curvature_a: f64,
    pub curvature_b: f64,
    pub curvature_ok: bool,
    pub width_a: f64,
    pub width_b: f64,
    pub fitted_width_a: Option<f64>,
    pub fitted_width_b: Option<f64>,
    /// `None` when `|T − T̃|` sits at the noise floor for every `n`.
    pub t_difference_rate: Option<f64>,
    pub t_identical: bool,
    pub t_decay_ok: bool,
    pub l_agreement_required: usize,
    pub l_agreement_count: usize,
    pub sigma: f64,
    /// Shift `s` minimising `∫ (ã(x) − a(x + s))² dx`.
    pub correlation_shift: f64,
    pub correlation_residual: f64,
    pub verdict: TransmissionVerdict,
    pub notes: Vec<String>,
}

fn curvature(p: &PotentialProfile) -> f64 {
    1.0 / p.kappa_plus() + 1.0 / p.kappa_minus()
}

fn mismatch(a: &PotentialProfile, b: &PotentialProfile, s: f64, xs: &[f64]) -> f64 {
    xs.iter()
        .map(|&x| {
            let d = b.evaluate(x) - a.evaluate(x + s);
            d * d
        })
        .sum::<f64>()
        / xs.len() as f64
}

/// Best shift on a coarse grid, refined by golden section.
fn correlation_shift(a: &PotentialProfile, b: &PotentialProfile) -> (f64, f64) {
    let lo = a.bulk().0.min(b.bulk().0);
    let hi = a.bulk().1.max(b.bulk().1);
    let xs: Vec<f64> = (0..=2000).map(|k| lo + (hi - lo) * k as f64 / 2000.0).collect();
    let span = 0.5 * (hi - lo);
    let coarse = 400;
    let h = 2.0 * span / coarse as f64;
    let (mut best, mut best_v) = (0.0, mismatch(a, b, 0.0, &xs));
    for k in 0..=coarse {
        let s = -span + h * k as f64;
        let v = mismatch(a, b, s, &xs);
        if v < best_v {
            best = s;
            best_v = v;
        }
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut l, mut r) = (best - h, best + h);
    for _ in 0..80 {
        let m1 = r - phi * (r - l);
        let m2 = l + phi * (r - l);
        if mismatch(a, b, m1, &xs) < mismatch(a, b, m2, &xs) {
            r = m2;
        } else {
            l = m1;
        }
    }
    let s = 0.5 * (l + r);
    let v = mismatch(a, b, s, &xs);
    if v <= best_v {
        (s, v.sqrt())
    } else {
        (best, best_v.sqrt())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn transmission_experiment(
    pa: &PotentialProfile,
    pb: &PotentialProfile,
    lambda: f64,
    n_max: usize,
) -> Result<TransmissionReport> {
    transmission_experiment_with(pa, pb, lambda, n_max, DEFAULT_L_AGREEMENT, ScatteringOptions::default())
}

pub fn transmission_experiment_with(
    pa: &PotentialProfile,
    pb: &PotentialProfile,
    lambda: f64,
    n_max: usize,
    l_agreement_required: usize,
    opts: ScatteringOptions,
) -> Result<TransmissionReport> {
    if lambda == 0.0 {
        return Err(Error::Domain {
            what: "lambda",
            value: 0.0,
            domain: "λ ≠ 0".into(),
        });
    }
    if n_max < 1 {
        return Err(Error::Empty("n range"));
    }
    let sa = Scatterer::with_options(pa, opts)?;
    let sb = Scatterer::with_options(pb, opts)?;
    let ns: Vec<f64> = (1..=n_max).map(|n| n as f64).collect();
    let ea = sa.scattering_entries(lambda, &ns)?;
    let eb = sb.scattering_entries(lambda, &ns)?;
    let floor = 1e2 * opts.jost.rtol;
    let samples: Vec<TransmissionSample> = ea
        .iter()
        .zip(&eb)
        .map(|(a, b)| TransmissionSample {
            n: a.pt.z.re,
            abs_t_a: a.t.norm(),
            abs_t_b: b.t.norm(),
            abs_t_difference: (a.t - b.t).norm(),
            abs_l_difference: (a.l - b.l).norm(),
            sigma: -(b.l / a.l).arg() / (2.0 * lambda),
        })
        .collect();
    let mut notes = Vec::new();

    let (curvature_a, curvature_b) = (curvature(pa), curvature(pb));
    let curvature_ok = curvature_a < 0.0 && curvature_b < 0.0;
    if !curvature_ok {
        notes.push(format!(
            "curvature condition 1/κ₊ + 1/κ₋ < 0 fails ({curvature_a:.3e}, {curvature_b:.3e})"
        ));
    }

    let (width_a, width_b) = (sa.total_width(), sb.total_width());
    let t_window = (crate::asymptotics::DEFAULT_MIN_N, n_max as f64);
    let fit_width = |s: &[TransmissionSample], pick: fn(&TransmissionSample) -> f64| {
        let v: Vec<(f64, f64)> = s.iter().map(|x| (x.n, pick(x))).collect();
        fit_exponential_decay(&v, t_window).ok().map(|f| f.rate)
    };
    let fitted_width_a = fit_width(&samples, |s| s.abs_t_a);
    let fitted_width_b = fit_width(&samples, |s| s.abs_t_b);

    let t_kept: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.abs_t_difference > floor * s.abs_t_a.max(s.abs_t_b))
        .map(|s| (s.n, s.abs_t_difference.ln()))
        .collect();
    let t_identical = t_kept.is_empty();
    let t_difference_rate = if t_kept.len() >= 4 {
        fit_log_decay(&t_kept, (0.0, f64::INFINITY)).ok().map(|f| f.rate)
    } else {
        None
    };
    let widest = [Some(width_a), Some(width_b), fitted_width_a, fitted_width_b]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    let t_decay_ok = t_identical || t_difference_rate.is_some_and(|r| r > 2.0 * widest);
    if !t_decay_ok {
        notes.push(format!(
            "|T − T̃| decays at rate {:?}, not faster than 2·max(A, Ã) = {:.4}",
            t_difference_rate,
            2.0 * widest
        ));
    }

    let l_agreement_count = samples
        .iter()
        .take(l_agreement_required)
        .filter(|s| s.abs_l_difference < IDENTICAL_TOL)
        .count();
    if l_agreement_count < l_agreement_required {
        notes.push(format!(
            "L agrees at {l_agreement_count} of the first {l_agreement_required} indices"
        ));
    }
    let sigma = median(
        ea.iter()
            .zip(&samples)
            .filter(|(a, _)| a.l.norm() > 1e-3)
            .map(|(_, s)| s.sigma)
            .collect(),
    );
    let (correlation_shift, correlation_residual) = correlation_shift(pa, pb);
    let verdict = if curvature_ok && t_decay_ok && l_agreement_count >= l_agreement_required {
        TransmissionVerdict::HypothesesMet
    } else {
        TransmissionVerdict::HypothesesNotMet
    };
    Ok(TransmissionReport {
        lambda,
        samples,
        curvature_a,
        curvature_b,
        curvature_ok,
        width_a,
        width_b,
        fitted_width_a,
        fitted_width_b,
        t_difference_rate,
        t_identical,
        t_decay_ok,
        l_agreement_required,
        l_agreement_count,
        sigma,
        correlation_shift,
        correlation_residual,
        verdict,
        notes,
    })
}

/// Largest `|L(0, n) − L̃(0, n)|` between a profile and its translate by `c`.
pub fn zero_energy_translation_gap(p: &PotentialProfile, c: f64, ns: &[f64]) -> Result<f64> {
    let sa = Scatterer::new(p)?;
    let sb = Scatterer::new(&p.translate(c))?;
    let ea = sa.scattering_entries(0.0, ns)?;
    let eb = sb.scattering_entries(0.0, ns)?;
    Ok(ea
        .iter()
        .zip(&eb)
        .map(|(a, b)| (a.l - b.l).norm())
        .fold(0.0, f64::max))
}

/// Bump centre and width giving support `[x₀, x₀ + 2w]` with `g(x₀) = depth` on `p`.
pub fn bump_at_depth(p: &PotentialProfile, depth: f64, width: f64) -> Result<f64> {
    let map = crate::profile::build_liouville(p, 1e-12)?;
    Ok(map.h(depth)? + width)
}

/// Period of the translation ambiguity, `π/λ`.
pub fn translation_period(lambda: f64) -> f64 {
    PI / lambda.abs()
}
