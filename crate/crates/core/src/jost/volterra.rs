//! Neumann-series evaluation of the Jost integral equations, independent of the
//! ODE integrator.
//!
//! In the interaction picture `U_L(x) = I − ∫_x^∞ K(y) U_L(y) dy` and
//! `U_R(x) = I + ∫_{−∞}^x K(y) U_R(y) dy`; iterating from `U⁽⁰⁾ = I` sums the
//! series term by term on a uniform grid with fourth-order cumulative quadrature.

use serde::Serialize;

use super::{generator, start_point, JostMatrix, JostOptions, Side, SpectralPoint};
use crate::error::{Error, Result};
use crate::numerics::mat2::exp_i_gamma1;
use crate::numerics::Mat2;
use crate::profile::PotentialProfile;

/// Grid spacing of the oracle quadrature.
const STEP: f64 = 0.002;
const MIN_PANELS: usize = 4000;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub jost: JostMatrix,
    pub terms: usize,
    /// Spectral norm of the partial sums `Σ_{k≤K} U⁽ᵏ⁾(x)`.
    pub partial_norms: Vec<f64>,
}

/// Cumulative integral `I_j = ∫_{y_j}^{y_N} f` on a uniform grid with an even
/// number of panels: Simpson on panel pairs, a three-point rule for the odd nodes.
fn cumulative_from_right(f: &[Mat2], h: f64) -> Vec<Mat2> {
    let n = f.len() - 1;
    let mut out = vec![Mat2::zero(); n + 1];
    let mut j = n;
    while j >= 2 {
        out[j - 2] = out[j] + (f[j - 2] + f[j - 1].scale_real(4.0) + f[j]).scale_real(h / 3.0);
        let piece = (f[j - 2].scale_real(-1.0) + f[j - 1].scale_real(8.0) + f[j].scale_real(5.0))
            .scale_real(h / 12.0);
        out[j - 1] = out[j] + piece;
        j -= 2;
    }
    out
}

/// Sums the Neumann series for `F_L` (or `F_R`) at `x` until a term's norm falls
/// below `tol`.
pub fn volterra_oracle(
    profile: &PotentialProfile,
    side: Side,
    pt: SpectralPoint,
    x: f64,
    max_terms: usize,
    tol: f64,
) -> Result<OracleResult> {
    let opts = JostOptions::default();
    let (x_s, tail_error) = start_point(profile, pt.z, side, &opts)?;
    let free = exp_i_gamma1(pt.lambda * x);
    let (far, sign) = match side {
        Side::Left => (x_s.max(x), -1.0),
        Side::Right => (x_s.min(x), 1.0),
    };
    let span = (far - x).abs();
    let mut panels = ((span / STEP).ceil() as usize).max(MIN_PANELS);
    panels += panels % 2;
    let h = span / panels as f64;
    // Node j sits at distance j·h from x into the integration region, so the
    // cumulative integral from the far end lands on node 0 = x.
    let nodes: Vec<f64> = (0..=panels)
        .map(|j| match side {
            Side::Left => x + h * j as f64,
            Side::Right => x - h * j as f64,
        })
        .collect();
    let k = generator(profile, pt);
    let kernel: Vec<Mat2> = nodes.iter().map(|&y| k(y)).collect();

    let mut term = vec![Mat2::identity(); panels + 1];
    let mut sum = Mat2::identity();
    let mut partial_norms = vec![sum.norm2()];
    let mut terms = 1;
    // At z = 0 the kernel vanishes and the series is the free solution alone.
    let mut last = if pt.z.norm() == 0.0 { 0.0 } else { 1.0 };
    while last > tol {
        if terms >= max_terms {
            return Err(Error::OracleNonConvergence {
                terms,
                last_term_norm: last,
            });
        }
        let integrand: Vec<Mat2> = kernel.iter().zip(&term).map(|(k, t)| *k * *t).collect();
        let cum = cumulative_from_right(&integrand, h);
        term = cum.into_iter().map(|m| m.scale_real(sign)).collect();
        sum = sum + term[0];
        last = term.iter().map(|m| m.max_abs()).fold(0.0, f64::max);
        partial_norms.push(sum.norm2());
        terms += 1;
    }
    let jost = JostMatrix {
        side,
        x,
        m: free * sum,
        log_scale: 0.0,
        tail_error,
    };
    Ok(OracleResult {
        jost,
        terms,
        partial_norms,
    })
}
