//! Laplace transforms of functions supported in `[B, ∞)` and their decay bound
//! `|F(z)| ≤ ‖F‖ e^{−B Re z} / √(4π Re z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quad::integrate;

const PANEL: f64 = 0.05;
const QUAD_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardySample {
    pub z: Complex64,
    pub abs_f: f64,
    pub bound: f64,
    /// `|F(z)| − bound`; non-positive when the inequality holds.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReport {
    pub b: f64,
    /// `‖f‖_{L²} = ‖F‖_{H²}`.
    pub norm: f64,
    pub samples: Vec<HardySample>,
    /// `(n, |F(n)| e^{Bn})`.
    pub scaled_decay: Vec<(f64, f64)>,
    pub max_residual: f64,
}

fn panels(a: f64, b: f64) -> Vec<f64> {
    let k = ((b - a) / PANEL).ceil().max(1.0) as usize;
    (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
}

fn piecewise<F: Fn(f64) -> f64>(f: F, nodes: &[f64]) -> Result<f64> {
    let tol = QUAD_TOL / nodes.len() as f64;
    nodes.windows(2).map(|w| integrate(&f, w[0], w[1], tol)).sum()
}

/// `F(z) = (2π)^{−1/2} ∫_B^{Bmax} e^{−tz} f(t) dt`.
pub fn laplace(f: &dyn Fn(f64) -> f64, b: f64, b_max: f64, z: Complex64) -> Result<Complex64> {
    let nodes = panels(b, b_max);
    let re = piecewise(|t| (-t * z.re).exp() * (t * z.im).cos() * f(t), &nodes)?;
    let im = piecewise(|t| -(-t * z.re).exp() * (t * z.im).sin() * f(t), &nodes)?;
    Ok(Complex64::new(re, im) / (2.0 * PI).sqrt())
}

pub fn hardy_decay_check(
    b: f64,
    f: &dyn Fn(f64) -> f64,
    b_max: f64,
    n_list: &[f64],
    z_list: &[Complex64],
) -> Result<HardyReport> {
    if !(b_max > b) {
        return Err(Error::Domain {
            what: "b_max",
            value: b_max,
            domain: format!("> B = {b}"),
        });
    }
    if let Some(z) = z_list.iter().find(|z| !(z.re > 0.0)) {
        return Err(Error::Domain {
            what: "Re z",
            value: z.re,
            domain: "> 0".into(),
        });
    }
    let nodes = panels(b, b_max);
    let norm = piecewise(|t| f(t) * f(t), &nodes)?.sqrt();
    let samples: Vec<HardySample> = z_list
        .iter()
        .map(|&z| {
            let abs_f = laplace(f, b, b_max, z)?.norm();
            let bound = norm * (-b * z.re).exp() / (4.0 * PI * z.re).sqrt();
            Ok(HardySample {
                z,
                abs_f,
                bound,
                residual: abs_f - bound,
            })
        })
        .collect::<Result<_>>()?;
    let scaled_decay = n_list
        .iter()
        .map(|&n| Ok((n, laplace(f, b, b_max, Complex64::new(n, 0.0))?.norm() * (b * n).exp())))
        .collect::<Result<_>>()?;
    let max_residual = samples.iter().map(|s| s.residual).fold(f64::NEG_INFINITY, f64::max);
    Ok(HardyReport {
        b,
        norm,
        samples,
        scaled_decay,
        max_residual,
    })
}

/// Piecewise-constant function on `[lo, hi)`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    pub breaks: Vec<f64>,
    pub heights: Vec<f64>,
}

impl StepFunction {
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.breaks[0] || t >= *self.breaks.last().unwrap() {
            return 0.0;
        }
        let k = self.breaks.partition_point(|&b| b <= t) - 1;
        self.heights[k]
    }
}

/// Random step function with up to eight pieces and heights in `[−1, 1]` on `[lo, hi)`.
pub fn random_step_function<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> StepFunction {
    let pieces = rng.gen_range(1..=8);
    let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(lo..hi)).collect();
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    let heights = (0..pieces).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    StepFunction { breaks, heights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zs() -> Vec<Complex64> {
        [1.0, 5.0, 10.0].map(|x| Complex64::new(x, 0.0)).to_vec()
    }

    #[test]
    fn indicator_closed_form() {
        let f = |t: f64| if (1.0..2.0).contains(&t) { 1.0 } else { 0.0 };
        for z in [Complex64::new(1.0, 0.0), Complex64::new(5.0, 2.0), Complex64::new(10.0, -1.0)] {
            let got = laplace(&f, 1.0, 2.0, z).unwrap();
            let want = ((-z).exp() - (-2.0 * z).exp()) / ((2.0 * PI).sqrt() * z);
            assert!((got - want).norm() < 1e-13, "{z}");
        }
        let r = hardy_decay_check(1.0, &f, 2.0, &[1.0, 2.0], &zs()).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-13);
        assert!(r.max_residual <= 0.0);
    }

    #[test]
    fn zero_function_saturates_at_zero() {
        let r = hardy_decay_check(1.0, &|_| 0.0, 4.0, &[1.0], &zs()).unwrap();
        assert!(r.samples.iter().all(|s| s.abs_f == 0.0 && s.bound == 0.0));
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn random_trials_respect_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_step_function(&mut rng, 1.0, 4.0);
            let r = hardy_decay_check(1.0, &|t| s.eval(t), 4.0, &[2.0, 6.0], &zs()).unwrap();
            assert!(r.max_residual <= 0.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(hardy_decay_check(1.0, &|_| 1.0, 0.5, &[], &zs()).is_err());
        assert!(hardy_decay_check(1.0, &|_| 1.0, 2.0, &[], &[Complex64::new(0.0, 1.0)]).is_err());
    }
}
