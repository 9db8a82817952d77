//! The Liouville change of variable `X = g(x) = ∫_{-∞}^x a`, its inverse `h`,
//! and the singular Sturm–Liouville potential on `(0, A)`.

use num_complex::Complex64;

use super::PotentialProfile;
use crate::error::{Error, Result};
use crate::numerics::interp::Pchip;
use crate::numerics::quad::{cumulative, integrate};

/// Node spacing of the interpolation grid in `x`.
const GRID_SPACING: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct LiouvilleMap {
    profile: PotentialProfile,
    total: f64,
    xs: Vec<f64>,
    gs: Vec<f64>,
    inverse: Pchip,
    tol: f64,
}

/// Tabulates `g` on the bulk region; the tails are integrated in closed form.
pub fn build_liouville(profile: &PotentialProfile, tol: f64) -> Result<LiouvilleMap> {
    if !(tol > 0.0) {
        return Err(Error::Domain {
            what: "quadrature tolerance",
            value: tol,
            domain: "(0, ∞)".into(),
        });
    }
    let (lo, hi) = profile.bulk();
    let panels = (((hi - lo) / GRID_SPACING).ceil() as usize).clamp(64, 100_000);
    let xs: Vec<f64> = (0..=panels)
        .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
        .collect();
    let tails = profile.tails();
    let left = tails.left_integral(lo);
    let bulk = cumulative(|x| profile.evaluate(x), &xs, tol)?;
    let gs: Vec<f64> = bulk.iter().map(|v| left + v).collect();
    let total = gs[panels] + tails.right_integral(hi);
    let inverse = Pchip::new(gs.clone(), xs.clone());
    Ok(LiouvilleMap {
        profile: profile.clone(),
        total,
        xs,
        gs,
        inverse,
        tol,
    })
}

impl LiouvilleMap {
    /// Total width `A = ∫ a`.
    pub fn total_width(&self) -> f64 {
        self.total
    }

    pub fn profile(&self) -> &PotentialProfile {
        &self.profile
    }

    pub fn quadrature_tolerance(&self) -> f64 {
        self.tol
    }

    pub fn grid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.gs.iter().copied())
    }

    pub fn g(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.profile.tails().left_integral(x);
        }
        if x >= self.xs[n - 1] {
            return self.total - self.profile.tails().right_integral(x);
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let piece = integrate(
            |s| self.profile.evaluate(s),
            self.xs[i],
            x,
            self.tol / n as f64,
        )
        .unwrap_or_else(|_| {
            // A single sub-panel of a smooth positive integrand; Simpson is ample.
            let m = 0.5 * (self.xs[i] + x);
            (x - self.xs[i]) / 6.0
                * (self.profile.evaluate(self.xs[i])
                    + 4.0 * self.profile.evaluate(m)
                    + self.profile.evaluate(x))
        });
        self.gs[i] + piece
    }

    /// Inverse map `h : (0, A) → ℝ`.
    pub fn h(&self, big_x: f64) -> Result<f64> {
        if !(big_x > 0.0 && big_x < self.total) {
            return Err(Error::Domain {
                what: "Liouville coordinate",
                value: big_x,
                domain: format!("(0, {})", self.total),
            });
        }
        let t = self.profile.tails();
        let n = self.gs.len();
        if big_x <= self.gs[0] {
            return Ok((t.kappa_minus * big_x / t.a_minus).ln() / t.kappa_minus);
        }
        if big_x >= self.gs[n - 1] {
            return Ok((-t.kappa_plus * (self.total - big_x) / t.a_plus).ln() / t.kappa_plus);
        }
        let mut x = self.inverse.eval(big_x);
        for _ in 0..8 {
            let dx = (self.g(x) - big_x) / self.profile.evaluate(x);
            x -= dx;
            if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        Ok(x)
    }

    /// `(h'(X), h''(X))` from `a` and `a'` at `h(X)`.
    pub fn h_derivatives(&self, big_x: f64) -> Result<(f64, f64)> {
        let x = self.h(big_x)?;
        let (a, da) = self.profile.value_and_derivative(x);
        let hp = 1.0 / a;
        Ok((hp, -da * hp * hp * hp))
    }
}

/// `q(X) = λ² h'(X)² − iλ h''(X) = λ²/a² + iλ a'/a³` at `x = h(X)`.
pub fn sturm_liouville_potential(map: &LiouvilleMap, lambda: f64, big_x: f64) -> Result<Complex64> {
    let (hp, hpp) = map.h_derivatives(big_x)?;
    Ok(Complex64::new(lambda * lambda * hp * hp, -lambda * hpp))
}
