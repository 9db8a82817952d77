//! Jost matrices of `[Γ¹ D_x − z a(x) Γ²] ψ = λ ψ`.
//!
//! Both solutions are computed in the interaction picture
//! `F(x) = e^{iΓ¹λx} U(x)`, where `U' = i z a(x) [[0, e^{−2iλx}], [−e^{2iλx}, 0]] U`.
//! The generator vanishes with `z`, so `U ≡ I` at `z = 0`, and for large `λ`
//! the stiff free rotation never enters the integrator.

mod volterra;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::mat2::exp_i_gamma1;
use crate::numerics::ode::{integrate_linear, OdeOptions, OdeStats, ScaledMat};
use crate::numerics::Mat2;
use crate::profile::PotentialProfile;

pub use volterra::{volterra_oracle, OracleResult};

/// Real energy `λ` and complex angular momentum `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    pub z: Complex64,
}

impl SpectralPoint {
    pub fn new(lambda: f64, z: Complex64) -> Self {
        Self { lambda, z }
    }

    pub fn real(lambda: f64, n: f64) -> Self {
        Self::new(lambda, Complex64::new(n, 0.0))
    }

    fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::Domain {
                what: "lambda",
                value: self.lambda,
                domain: "finite reals".into(),
            });
        }
        if !(self.z.re.is_finite() && self.z.im.is_finite()) {
            return Err(Error::Domain {
                what: "angular momentum",
                value: self.z.norm(),
                domain: "finite complex numbers".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// The true matrix is `e^{log_scale}·m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JostMatrix {
    pub side: Side,
    pub x: f64,
    pub m: Mat2,
    pub log_scale: f64,
    /// Bound on the error from starting at a finite point with the free solution.
    pub tail_error: f64,
}

impl JostMatrix {
    pub fn true_matrix(&self) -> Mat2 {
        self.m.scale_real(self.log_scale.exp())
    }

    /// `|det(e^{s} m) − 1|`.
    pub fn det_residual(&self) -> f64 {
        (self.m.det() * (2.0 * self.log_scale).exp() - 1.0).norm()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JostOptions {
    pub rtol: f64,
    /// Requested bound on the truncation error of the asymptotic start.
    pub tail_tol: f64,
    /// Explicit start `|x_start|`; chosen from `tail_tol` when absent.
    pub start: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for JostOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            tail_tol: 1e-12,
            start: None,
            h_max: 0.5,
            max_steps: 2_000_000,
        }
    }
}

impl JostOptions {
    pub(crate) fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            h_max: self.h_max,
            max_steps: self.max_steps,
            ..OdeOptions::default()
        }
    }
}

/// Generator of the interaction-picture system.
pub(crate) fn generator(profile: &PotentialProfile, pt: SpectralPoint) -> impl Fn(f64) -> Mat2 + '_ {
    let iz = Complex64::i() * pt.z;
    let lambda = pt.lambda;
    move |x| {
        let c = iz * profile.evaluate(x);
        let e = Complex64::from_polar(1.0, 2.0 * lambda * x);
        Mat2::new(Complex64::new(0.0, 0.0), c * e.conj(), -c * e, Complex64::new(0.0, 0.0))
    }
}

/// Start point and truncation estimate `exp(|z| ∫_{x_s}^{∞} a) − 1` on the given side.
pub(crate) fn start_point(
    profile: &PotentialProfile,
    z: Complex64,
    side: Side,
    opts: &JostOptions,
) -> Result<(f64, f64)> {
    let t = profile.tails();
    let (lo, hi) = profile.bulk();
    let zn = z.norm();
    let (x_s, mass) = match side {
        Side::Left => {
            let x_s = match opts.start {
                Some(s) => s.abs(),
                None if zn == 0.0 => hi,
                None => hi.max((0.5 * opts.tail_tol * -t.kappa_plus / (zn * t.a_plus)).ln() / t.kappa_plus),
            };
            (x_s, if x_s >= hi { t.right_integral(x_s) } else { f64::INFINITY })
        }
        Side::Right => {
            let x_s = match opts.start {
                Some(s) => -s.abs(),
                None if zn == 0.0 => lo,
                None => lo.min((0.5 * opts.tail_tol * t.kappa_minus / (zn * t.a_minus)).ln() / t.kappa_minus),
            };
            (x_s, if x_s <= lo { t.left_integral(x_s) } else { f64::INFINITY })
        }
    };
    let estimate = (zn * mass).exp_m1();
    if !(estimate <= opts.tail_tol) {
        return Err(Error::TailTruncation {
            estimate,
            tolerance: opts.tail_tol,
        });
    }
    Ok((x_s, estimate))
}

/// Interaction-picture solution `U` at each of `xs` (any order) on one side.
pub(crate) fn interaction_solution(
    profile: &PotentialProfile,
    pt: SpectralPoint,
    side: Side,
    xs: &[f64],
    opts: &JostOptions,
) -> Result<(Vec<ScaledMat>, f64, OdeStats)> {
    pt.validate()?;
    let (x_s, tail_error) = start_point(profile, pt.z, side, opts)?;
    if pt.z == Complex64::new(0.0, 0.0) {
        let id = ScaledMat::unscaled(Mat2::identity());
        return Ok((vec![id; xs.len()], 0.0, OdeStats::default()));
    }
    // Order outputs along the integration direction, starting with those on the
    // far side of the start point.
    let mut order: Vec<usize> = (0..xs.len()).collect();
    match side {
        Side::Left => order.sort_by(|&a, &b| xs[b].total_cmp(&xs[a])),
        Side::Right => order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b])),
    }
    let coef = generator(profile, pt);
    let ode = opts.ode();
    let dir_sign = if side == Side::Left { -1.0 } else { 1.0 };
    let (behind, ahead): (Vec<usize>, Vec<usize>) =
        order.iter().partition(|&&i| (xs[i] - x_s) * dir_sign < 0.0);
    let mut out = vec![ScaledMat::unscaled(Mat2::identity()); xs.len()];
    let mut stats = OdeStats::default();
    for (group, reverse) in [(ahead, false), (behind, true)] {
        if group.is_empty() {
            continue;
        }
        let mut pts: Vec<f64> = group.iter().map(|&i| xs[i]).collect();
        let mut idx = group;
        if reverse {
            pts.reverse();
            idx.reverse();
        }
        // Land on every breakpoint between the start and the last output.
        let along = |x: f64| (x - x_s) * dir_sign * if reverse { -1.0 } else { 1.0 };
        let reach = along(*pts.last().unwrap());
        let mut stops: Vec<(f64, Option<usize>)> = profile
            .breakpoints()
            .into_iter()
            .filter(|&b| along(b) > 0.0 && along(b) < reach)
            .map(|b| (b, None))
            .collect();
        stops.extend(pts.iter().zip(&idx).map(|(&x, &i)| (x, Some(i))));
        stops.sort_by(|a, b| along(a.0).total_cmp(&along(b.0)));
        let targets: Vec<f64> = stops.iter().map(|s| s.0).collect();
        let (vals, s) = integrate_linear(&coef, x_s, ScaledMat::unscaled(Mat2::identity()), &targets, &ode)?;
        stats.accepted += s.accepted;
        stats.rejected += s.rejected;
        for ((_, i), v) in stops.into_iter().zip(vals) {
            if let Some(i) = i {
                out[i] = v.normalized();
            }
        }
    }
    Ok((out, tail_error, stats))
}

fn jost_many(
    profile: &PotentialProfile,
    pt: SpectralPoint,
    side: Side,
    xs: &[f64],
    opts: &JostOptions,
) -> Result<Vec<JostMatrix>> {
    let (us, tail_error, _) = interaction_solution(profile, pt, side, xs, opts)?;
    Ok(xs
        .iter()
        .zip(us)
        .map(|(&x, u)| JostMatrix {
            side,
            x,
            m: exp_i_gamma1(pt.lambda * x) * u.y,
            log_scale: u.log_scale,
            tail_error,
        })
        .collect())
}

/// `F_L(x) = e^{iΓ¹λx}(I + o(1))` as `x → +∞`.
pub fn jost_left(profile: &PotentialProfile, pt: SpectralPoint, x: f64) -> Result<JostMatrix> {
    jost_left_with(profile, pt, &[x], &JostOptions::default()).map(|v| v[0])
}

/// `F_R(x) = e^{iΓ¹λx}(I + o(1))` as `x → −∞`.
pub fn jost_right(profile: &PotentialProfile, pt: SpectralPoint, x: f64) -> Result<JostMatrix> {
    jost_right_with(profile, pt, &[x], &JostOptions::default()).map(|v| v[0])
}

/// `F_L` at several points in a single integration.
pub fn jost_left_with(
    profile: &PotentialProfile,
    pt: SpectralPoint,
    xs: &[f64],
    opts: &JostOptions,
) -> Result<Vec<JostMatrix>> {
    jost_many(profile, pt, Side::Left, xs, opts)
}

pub fn jost_right_with(
    profile: &PotentialProfile,
    pt: SpectralPoint,
    xs: &[f64],
    opts: &JostOptions,
) -> Result<Vec<JostMatrix>> {
    jost_many(profile, pt, Side::Right, xs, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_liouville, make_analytic_profile, Family};

    fn sech() -> PotentialProfile {
        make_analytic_profile(Family::Sech, &[]).unwrap()
    }

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn zero_momentum_is_free() {
        let p = sech();
        for x in [-5.0, 0.0, 3.0] {
            let f = jost_left(&p, SpectralPoint::real(0.7, 0.0), x).unwrap();
            assert_eq!(f.true_matrix(), exp_i_gamma1(0.7 * x));
            let g = jost_right(&p, SpectralPoint::real(0.7, 0.0), x).unwrap();
            assert_eq!(g.true_matrix(), exp_i_gamma1(0.7 * x));
        }
    }

    #[test]
    fn zero_energy_closed_form() {
        let p = sech();
        let map = build_liouville(&p, 1e-12).unwrap();
        let a = map.total_width();
        let i = Complex64::i();
        for n in [1.0, 2.0, 3.0] {
            for x in [-2.0, 0.0, 1.5] {
                let g = map.g(x);
                let s = n * (a - g);
                let want = Mat2::new(
                    s.cosh().into(),
                    -i * s.sinh(),
                    i * s.sinh(),
                    s.cosh().into(),
                );
                let got = jost_left(&p, SpectralPoint::real(0.0, n), x).unwrap().true_matrix();
                assert!(close(&got, &want, 1e-8 * want.max_abs()), "n={n} x={x}");
                let s = n * g;
                let want = Mat2::new(s.cosh().into(), i * s.sinh(), -i * s.sinh(), s.cosh().into());
                let got = jost_right(&p, SpectralPoint::real(0.0, n), x).unwrap().true_matrix();
                assert!(close(&got, &want, 1e-8 * want.max_abs()), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn determinant_is_one_along_the_path() {
        let p = sech();
        let xs: Vec<f64> = (0..10).map(|k| -4.5 + k as f64).collect();
        for n in [1.0, 2.0] {
            let pt = SpectralPoint::real(1.0, n);
            for f in jost_left_with(&p, pt, &xs, &JostOptions::default()).unwrap() {
                assert!(f.det_residual() < 1e-8, "{}", f.det_residual());
            }
            for f in jost_right_with(&p, pt, &xs, &JostOptions::default()).unwrap() {
                assert!(f.det_residual() < 1e-8);
            }
        }
    }

    #[test]
    fn growth_bound_with_small_constant() {
        let p = sech();
        let map = build_liouville(&p, 1e-12).unwrap();
        let xs: Vec<f64> = (0..17).map(|k| -8.0 + k as f64).collect();
        for n in [1.0, 3.0, 6.0] {
            for lambda in [0.5, 1.0] {
                let pt = SpectralPoint::real(lambda, n);
                let fl = jost_left_with(&p, pt, &xs, &JostOptions::default()).unwrap();
                let fr = jost_right_with(&p, pt, &xs, &JostOptions::default()).unwrap();
                for ((x, l), r) in xs.iter().zip(fl).zip(fr) {
                    let g = map.g(*x);
                    let bl = (n * (map.total_width() - g)).exp();
                    let br = (n * g).exp();
                    assert!(l.true_matrix().max_abs() <= 2.0 * bl);
                    assert!(r.true_matrix().max_abs() <= 2.0 * br);
                }
            }
        }
    }

    #[test]
    fn reflected_right_solution_mirrors_left() {
        let p = make_analytic_profile(Family::BumpedSech, &[2.0, 0.8, 0.3]).unwrap();
        let r = p.reflect();
        for x in [-1.0, 0.5, 2.5] {
            let lhs = jost_right(&r, SpectralPoint::real(1.0, 2.0), x).unwrap().true_matrix();
            let rhs = jost_left(&p, SpectralPoint::real(-1.0, -2.0), -x).unwrap().true_matrix();
            assert!(close(&lhs, &rhs, 1e-8 * lhs.max_abs()), "x={x}");
        }
    }

    #[test]
    fn explicit_start_too_close_is_rejected() {
        let p = sech();
        let opts = JostOptions {
            start: Some(15.0),
            ..JostOptions::default()
        };
        let err = jost_left_with(&p, SpectralPoint::real(1.0, 5.0), &[0.0], &opts).unwrap_err();
        assert!(matches!(err, Error::TailTruncation { .. }));
    }
}
