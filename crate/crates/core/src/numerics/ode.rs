//! Dormand–Prince 5(4) for linear matrix ODEs `Y' = K(x)·Y` with `Y ∈ C^{2×2}`.
//!
//! The state is carried as `e^{log_scale}·Y`; whenever the largest entry
//! exceeds `rescale_threshold` it is folded into `log_scale`, so solutions of
//! exponential type in the angular momentum never overflow.

use crate::error::{Error, Result};
use crate::numerics::mat2::Mat2;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    pub rescale_threshold: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-300,
            h_init: 1e-2,
            h_max: 0.5,
            h_min: 1e-12,
            max_steps: 2_000_000,
            rescale_threshold: 20f64.exp(),
        }
    }
}

/// Matrix value `e^{log_scale}·y`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledMat {
    pub y: Mat2,
    pub log_scale: f64,
}

impl ScaledMat {
    pub fn unscaled(y: Mat2) -> Self {
        Self { y, log_scale: 0.0 }
    }

    pub fn to_true(&self) -> Mat2 {
        self.y.scale_real(self.log_scale.exp())
    }

    /// Moves the magnitude of the largest entry into `log_scale`.
    pub fn normalized(mut self) -> Self {
        let m = self.y.max_abs();
        if m > 0.0 && m.is_finite() {
            self.y = self.y.scale_real(1.0 / m);
            self.log_scale += m.ln();
        }
        self
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin(terms: &[(f64, &Mat2)]) -> Mat2 {
    let mut out = Mat2::zero();
    for (c, m) in terms {
        if *c != 0.0 {
            out = out + m.scale_real(*c);
        }
    }
    out
}

/// Integrates `Y' = K(x) Y` from `x0` through every point of `outputs`
/// (ordered along the direction of integration) and returns the state at each.
pub fn integrate_linear<K>(
    coef: K,
    x0: f64,
    y0: ScaledMat,
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<ScaledMat>, OdeStats)>
where
    K: Fn(f64) -> Mat2,
{
    let mut stats = OdeStats::default();
    let mut results = Vec::with_capacity(outputs.len());
    let Some(&last) = outputs.last() else {
        return Ok((results, stats));
    };
    let dir = if last >= x0 { 1.0 } else { -1.0 };

    let mut x = x0;
    let mut y = y0.y;
    let mut log_scale = y0.log_scale;
    let mut h = opts.h_init.min(opts.h_max) * dir;
    let mut k1 = coef(x) * y;
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;

    for &target in outputs {
        debug_assert!((target - x) * dir >= -1e-15 * (1.0 + x.abs()));
        while (target - x) * dir > 0.0 {
            if steps >= opts.max_steps {
                return Err(Error::MaxSteps { steps, x });
            }
            steps += 1;
            let remaining = target - x;
            let mut hh = h;
            let mut hits = false;
            if (hh - remaining) * dir >= 0.0 {
                hh = remaining;
                hits = true;
            }

            let k2 = coef(x + C2 * hh) * (y + lin(&[(hh * A21, &k1)]));
            let k3 = coef(x + C3 * hh) * (y + lin(&[(hh * A31, &k1), (hh * A32, &k2)]));
            let k4 = coef(x + C4 * hh)
                * (y + lin(&[(hh * A41, &k1), (hh * A42, &k2), (hh * A43, &k3)]));
            let k5 = coef(x + C5 * hh)
                * (y + lin(&[
                    (hh * A51, &k1),
                    (hh * A52, &k2),
                    (hh * A53, &k3),
                    (hh * A54, &k4),
                ]));
            let x_new = if hits { target } else { x + hh };
            let k_end = coef(x_new);
            let k6 = k_end
                * (y + lin(&[
                    (hh * A61, &k1),
                    (hh * A62, &k2),
                    (hh * A63, &k3),
                    (hh * A64, &k4),
                    (hh * A65, &k5),
                ]));
            let y_new = y + lin(&[
                (hh * B1, &k1),
                (hh * B3, &k3),
                (hh * B4, &k4),
                (hh * B5, &k5),
                (hh * B6, &k6),
            ]);
            let k_new = k_end * y_new;
            let err_mat = lin(&[
                (hh * E1, &k1),
                (hh * E3, &k3),
                (hh * E4, &k4),
                (hh * E5, &k5),
                (hh * E6, &k6),
                (hh * E7, &k_new),
            ]);
            let sc = opts.atol + opts.rtol * y.max_abs().max(y_new.max_abs());
            let err = err_mat.max_abs() / sc;

            if err <= 1.0 && y_new.is_finite() {
                stats.accepted += 1;
                x = x_new;
                y = y_new;
                k1 = k_new;
                let m = y.max_abs();
                if m > opts.rescale_threshold {
                    y = y.scale_real(1.0 / m);
                    k1 = k1.scale_real(1.0 / m);
                    log_scale += m.ln();
                }
                // PI step control.
                let e = err.max(1e-10);
                let fac = (0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
                err_prev = e;
                if !hits || fac < 1.0 {
                    h = (hh * fac).abs().min(opts.h_max) * dir;
                }
            } else {
                stats.rejected += 1;
                let e = if err.is_finite() { err } else { 1e10 };
                let fac = (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
                h = hh * fac;
                if h.abs() < opts.h_min {
                    return Err(Error::StepUnderflow { x, h: h.abs() });
                }
            }
        }
        results.push(ScaledMat { y, log_scale });
    }
    Ok((results, stats))
}
