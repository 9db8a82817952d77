//! Reissner–Nordström–de Sitter exteriors: horizons, the Regge–Wheeler
//! coordinate, the induced radial potential `a = √F / r`, and recovery of
//! `(M, Q², Λ)` from the potential's scalar invariants.

use std::sync::Arc;

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::integrate;
use crate::profile::{PotentialProfile, RadialShape, TailConstants};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RNdSParams {
    pub mass: f64,
    pub charge: f64,
    pub lambda: f64,
}

impl RNdSParams {
    pub fn new(mass: f64, charge: f64, lambda: f64) -> Self {
        Self {
            mass,
            charge,
            lambda,
        }
    }

    /// `F(r) = 1 − 2M/r + Q²/r² − Λr²/3`.
    pub fn lapse(&self, r: f64) -> f64 {
        1.0 - 2.0 * self.mass / r + self.charge * self.charge / (r * r)
            - self.lambda * r * r / 3.0
    }

    pub fn lapse_derivative(&self, r: f64) -> f64 {
        2.0 * self.mass / (r * r)
            - 2.0 * self.charge * self.charge / (r * r * r)
            - 2.0 * self.lambda * r / 3.0
    }

    /// `r²F(r)`, the quartic whose roots are the horizons.
    fn quartic(&self, r: f64) -> (f64, f64) {
        let q2 = self.charge * self.charge;
        let l3 = self.lambda / 3.0;
        let p = ((-l3 * r * r + 1.0) * r - 2.0 * self.mass) * r + q2;
        let dp = (-4.0 * l3 * r * r + 2.0) * r - 2.0 * self.mass;
        (p, dp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonData {
    pub params: RNdSParams,
    pub r_n: f64,
    pub r_c: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub kappa_n: f64,
    pub kappa_c: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
}

impl HorizonData {
    pub fn roots(&self) -> [(&'static str, f64, f64); 4] {
        [
            ("r_n", self.r_n, self.kappa_n),
            ("r_c", self.r_c, self.kappa_c),
            ("r_minus", self.r_minus, self.kappa_minus),
            ("r_plus", self.r_plus, self.kappa_plus),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.roots()
            .iter()
            .map(|(_, r, _)| self.params.lapse(*r).abs())
            .fold(0.0, f64::max)
    }

    fn width(&self) -> f64 {
        self.r_plus - self.r_minus
    }

    /// Integration constant placing `x = 0` at `r = √(r₋ r₊)`.
    pub fn calibration_constant(&self) -> f64 {
        let r = (self.r_minus * self.r_plus).sqrt();
        -self.log_sum(r)
    }

    fn log_sum(&self, r: f64) -> f64 {
        self.roots()
            .iter()
            .map(|(_, rj, kj)| (r - rj).abs().ln() / (2.0 * kj))
            .sum()
    }

    /// Regge–Wheeler coordinate written in the logistic variable
    /// `r = r₋ + Δ/(1 + e^{−u})`, free of cancellation near either horizon.
    fn x_of_u(&self, u: f64, c: f64) -> f64 {
        let d = self.width();
        let r = self.r_minus + d * logistic(u);
        (r - self.r_n).ln() / (2.0 * self.kappa_n)
            + (r - self.r_c).ln() / (2.0 * self.kappa_c)
            + (d.ln() - softplus(-u)) / (2.0 * self.kappa_minus)
            + (d.ln() - softplus(u)) / (2.0 * self.kappa_plus)
            + c
    }

    fn dx_du(&self, r: f64) -> f64 {
        3.0 * r * r
            / (self.params.lambda * self.width() * (r - self.r_n) * (r - self.r_c))
    }

    /// Tail amplitudes `a_±` of `√F/r` for integration constant `c`.
    fn tail_amplitudes(&self, c: f64) -> (f64, f64) {
        let d = self.width();
        let s_minus = (self.r_minus - self.r_n).ln() / (2.0 * self.kappa_n)
            + (self.r_minus - self.r_c).ln() / (2.0 * self.kappa_c)
            + d.ln() / (2.0 * self.kappa_plus);
        let s_plus = (self.r_plus - self.r_n).ln() / (2.0 * self.kappa_n)
            + (self.r_plus - self.r_c).ln() / (2.0 * self.kappa_c)
            + d.ln() / (2.0 * self.kappa_minus);
        let a_minus =
            (2.0 * self.kappa_minus).sqrt() / self.r_minus * (-self.kappa_minus * (c + s_minus)).exp();
        let a_plus =
            (-2.0 * self.kappa_plus).sqrt() / self.r_plus * (-self.kappa_plus * (c + s_plus)).exp();
        (a_minus, a_plus)
    }

    /// `A = ∫_{r₋}^{r₊} dr / (r√F)` via `r = r₋ + Δ(1 − cos t)/2`, which removes
    /// both endpoint singularities.
    pub fn total_width(&self) -> Result<f64> {
        let l3 = self.params.lambda / 3.0;
        let d = self.width();
        integrate(
            |t: f64| {
                let r = self.r_minus + 0.5 * d * (1.0 - t.cos());
                1.0 / (l3 * (r - self.r_n) * (r - self.r_c)).sqrt()
            },
            0.0,
            std::f64::consts::PI,
            1e-14,
        )
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^u)`.
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `σ(u)(1 − σ(u))` without overflow.
fn logistic_product(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

pub fn find_horizons(params: RNdSParams) -> Result<HorizonData> {
    let RNdSParams {
        mass,
        charge,
        lambda,
    } = params;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::DegenerateHorizons(format!("M = {mass} must be positive")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::DegenerateHorizons(format!("Λ = {lambda} must be positive")));
    }
    let q2 = charge * charge;
    if !(q2 < 9.0 / 8.0 * mass * mass) {
        return Err(Error::DegenerateHorizons(format!(
            "Q² < 9/8 M² violated (Q² = {q2}, M = {mass})"
        )));
    }
    // Monic form r⁴ − (3/Λ) r² + (6M/Λ) r − 3Q²/Λ.
    let c = [-3.0 * q2 / lambda, 6.0 * mass / lambda, -3.0 / lambda, 0.0];
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -c[0], //
        1.0, 0.0, 0.0, -c[1], //
        0.0, 1.0, 0.0, -c[2], //
        0.0, 0.0, 1.0, -c[3],
    );
    let eig = companion.complex_eigenvalues();
    let mut roots = Vec::with_capacity(4);
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            return Err(Error::DegenerateHorizons(format!(
                "fewer than four real roots (complex pair near {}{:+}i)",
                z.re, z.im
            )));
        }
        roots.push(polish_root(&params, z.re));
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    let [r_n, r_c, r_minus, r_plus] = [roots[0], roots[1], roots[2], roots[3]];
    if !(r_n < 0.0) {
        return Err(Error::DegenerateHorizons(format!("r_n = {r_n} is not negative")));
    }
    if !(r_c > 0.0) {
        return Err(Error::DegenerateHorizons(format!("r_c = {r_c} is not positive")));
    }
    let min_gap = 1e-9 * r_plus;
    if !(r_minus - r_c > min_gap && r_plus - r_minus > min_gap) {
        return Err(Error::DegenerateHorizons(format!(
            "ordering r_c < r_minus < r_plus violated or roots coincide ({r_c}, {r_minus}, {r_plus})"
        )));
    }
    let kappa = |r: f64| 0.5 * params.lapse_derivative(r);
    let data = HorizonData {
        params,
        r_n,
        r_c,
        r_minus,
        r_plus,
        kappa_n: kappa(r_n),
        kappa_c: kappa(r_c),
        kappa_minus: kappa(r_minus),
        kappa_plus: kappa(r_plus),
    };
    if !(data.kappa_minus > 0.0 && data.kappa_plus < 0.0) {
        return Err(Error::DegenerateHorizons(format!(
            "surface gravity signs violated (κ₋ = {}, κ₊ = {})",
            data.kappa_minus, data.kappa_plus
        )));
    }
    Ok(data)
}

fn polish_root(params: &RNdSParams, mut r: f64) -> f64 {
    for _ in 0..50 {
        let (p, dp) = params.quartic(r);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        r -= step;
        if step.abs() <= 4.0 * f64::EPSILON * r.abs() {
            break;
        }
    }
    r
}

/// `x(r) = Σ_j (1/2κ_j) ln|r − r_j| + c` on the exterior `r₋ < r < r₊`.
pub fn regge_wheeler(data: &HorizonData, r: f64, c: f64) -> Result<f64> {
    if !(r > data.r_minus && r < data.r_plus) {
        return Err(Error::Domain {
            what: "radius",
            value: r,
            domain: format!("({}, {})", data.r_minus, data.r_plus),
        });
    }
    Ok(data.log_sum(r) + c)
}

/// `√F(r(x))/r(x)` with `r(x)` obtained by inverting the Regge–Wheeler map.
#[derive(Debug, Clone)]
pub struct BlackHoleShape {
    data: HorizonData,
    c: f64,
}

impl BlackHoleShape {
    pub fn new(data: HorizonData, c: f64) -> Self {
        Self { data, c }
    }

    pub fn horizons(&self) -> &HorizonData {
        &self.data
    }

    /// Solves `x(u) = x` for the logistic variable by safeguarded Newton.
    fn logistic_variable(&self, x: f64) -> Result<f64> {
        let d = &self.data;
        let seed = if x < 0.0 {
            2.0 * d.kappa_minus * x
        } else {
            -2.0 * d.kappa_plus * x
        };
        let mut lo = seed - 1.0;
        let mut hi = seed + 1.0;
        let mut grow = 1.0;
        while d.x_of_u(lo, self.c) > x {
            grow *= 2.0;
            lo -= grow;
            if grow > 1e6 {
                return Err(Error::NewtonFailure { x });
            }
        }
        grow = 1.0;
        while d.x_of_u(hi, self.c) < x {
            grow *= 2.0;
            hi += grow;
            if grow > 1e6 {
                return Err(Error::NewtonFailure { x });
            }
        }
        let mut u = seed.clamp(lo, hi);
        for _ in 0..100 {
            let f = d.x_of_u(u, self.c) - x;
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let r = d.r_minus + d.width() * logistic(u);
            let mut next = u - f / d.dx_du(r);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 1e-15 * (1.0 + u.abs()) {
                return Ok(next);
            }
            u = next;
        }
        Err(Error::NewtonFailure { x })
    }

    pub fn radius(&self, x: f64) -> Result<f64> {
        let u = self.logistic_variable(x)?;
        Ok(self.data.r_minus + self.data.width() * logistic(u))
    }

    fn evaluate(&self, x: f64) -> Result<(f64, f64)> {
        let d = &self.data;
        let u = self.logistic_variable(x)?;
        let r = d.r_minus + d.width() * logistic(u);
        let lam3 = d.params.lambda / 3.0;
        let big_f = lam3 * (r - d.r_n) * (r - d.r_c) * d.width() * d.width()
            * logistic_product(u)
            / (r * r);
        let a = big_f.sqrt() / r;
        let da = a * (0.5 * d.params.lapse_derivative(r) - big_f / r);
        Ok((a, da))
    }
}

impl RadialShape for BlackHoleShape {
    fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        self.evaluate(x).unwrap_or((f64::NAN, f64::NAN))
    }
}

/// Logistic-variable magnitude at which the tail model takes over; the relative
/// remainder there is `O(e^{−35})`.
const BH_TAIL_U: f64 = 35.0;

/// RN-dS potential with Regge–Wheeler constant `c` (default: `x(√(r₋r₊)) = 0`).
pub fn bh_profile(params: RNdSParams, c: Option<f64>) -> Result<PotentialProfile> {
    let data = find_horizons(params)?;
    let c = c.unwrap_or_else(|| data.calibration_constant());
    let (a_minus, a_plus) = data.tail_amplitudes(c);
    let tails = TailConstants {
        a_minus,
        kappa_minus: data.kappa_minus,
        a_plus,
        kappa_plus: data.kappa_plus,
    };
    let x_left = data.x_of_u(-BH_TAIL_U, c);
    let x_right = data.x_of_u(BH_TAIL_U, c);
    let shape = BlackHoleShape::new(data, c);
    for i in 0..=64 {
        let x = x_left + (x_right - x_left) * i as f64 / 64.0;
        shape.evaluate(x)?;
    }
    let label = format!(
        "rnds(M={},Q={},Lambda={})",
        params.mass, params.charge, params.lambda
    );
    PotentialProfile::from_shape(Arc::new(shape), tails, x_left, x_right, label)
}

/// Scale-free combination `ln a₋/κ₋ − ln a₊/κ₊`, invariant under translations.
pub fn translation_invariant(a_minus: f64, kappa_minus: f64, a_plus: f64, kappa_plus: f64) -> f64 {
    a_minus.ln() / kappa_minus - a_plus.ln() / kappa_plus
}

/// Default acceptance threshold on the recovery residual norm.
pub const RECOVERY_THRESHOLD: f64 = 1e-6;
const REGULARIZER_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Recovery {
    pub params: RNdSParams,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Targets {
    width: f64,
    kappa_minus: f64,
    kappa_plus: f64,
    invariant: f64,
}

/// Forward map `(M, Q², Λ) ↦ (A, κ₋, κ₊, I)`.
fn forward(mass: f64, q2: f64, lambda: f64) -> Option<Targets> {
    if !(q2 >= 0.0) {
        return None;
    }
    let data = find_horizons(RNdSParams::new(mass, q2.sqrt(), lambda)).ok()?;
    let width = data.total_width().ok()?;
    let (a_minus, a_plus) = data.tail_amplitudes(0.0);
    Some(Targets {
        width,
        kappa_minus: data.kappa_minus,
        kappa_plus: data.kappa_plus,
        invariant: translation_invariant(a_minus, data.kappa_minus, a_plus, data.kappa_plus),
    })
}

fn residuals(p: &Vector3<f64>, t: &Targets) -> Option<[f64; 4]> {
    let f = forward(p[0].exp(), p[1], p[2].exp())?;
    Some([
        (f.width - t.width) / t.width,
        (f.kappa_minus - t.kappa_minus) / t.kappa_minus,
        (f.kappa_plus - t.kappa_plus) / t.kappa_plus.abs(),
        REGULARIZER_WEIGHT * (f.invariant - t.invariant) / (1.0 + t.invariant.abs()),
    ])
}

fn norm(r: &[f64; 4]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Coarse start: `A` and `κ₋/κ₊` are scale-free, so search the dimensionless
/// plane `(Q²/M², ΛM²)` at `M = 1` and then fix `M` from `κ₋ ∝ 1/M`.
fn initial_guess(t: &Targets) -> Option<Vector3<f64>> {
    let ratio = t.kappa_minus / t.kappa_plus;
    let mut best: Option<(f64, Vector3<f64>)> = None;
    for i in 0..48 {
        let q2 = 1.12 * (i as f64 + 0.5) / 48.0;
        for j in 0..48 {
            let lam = (1e-5f64.ln() + (0.3f64.ln() - 1e-5f64.ln()) * j as f64 / 47.0).exp();
            let Some(f) = forward(1.0, q2, lam) else {
                continue;
            };
            let mass = f.kappa_minus / t.kappa_minus;
            let cost = ((f.width - t.width) / t.width).powi(2)
                + ((f.kappa_minus / f.kappa_plus - ratio) / ratio).powi(2);
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((
                    cost,
                    Vector3::new(mass.ln(), q2 * mass * mass, (lam / (mass * mass)).ln()),
                ));
            }
        }
    }
    best.map(|(_, p)| p)
}

pub fn recover_parameters(
    width: f64,
    kappa_minus: f64,
    kappa_plus: f64,
    a_minus: f64,
    a_plus: f64,
) -> Result<Recovery> {
    recover_parameters_with(width, kappa_minus, kappa_plus, a_minus, a_plus, RECOVERY_THRESHOLD)
}

/// Levenberg–Marquardt over `(ln M, Q², ln Λ)`.
pub fn recover_parameters_with(
    width: f64,
    kappa_minus: f64,
    kappa_plus: f64,
    a_minus: f64,
    a_plus: f64,
    threshold: f64,
) -> Result<Recovery> {
    let targets = Targets {
        width,
        kappa_minus,
        kappa_plus,
        invariant: translation_invariant(a_minus, kappa_minus, a_plus, kappa_plus),
    };
    let unfit = RNdSParams::new(f64::NAN, f64::NAN, f64::NAN);
    if !(width > 0.0 && kappa_minus > 0.0 && kappa_plus < 0.0 && a_minus > 0.0 && a_plus > 0.0) {
        return Err(Error::NotRnds {
            residual: f64::INFINITY,
            best: unfit,
        });
    }
    let Some(mut p) = initial_guess(&targets) else {
        return Err(Error::NotRnds {
            residual: f64::INFINITY,
            best: unfit,
        });
    };
    let mut r = residuals(&p, &targets).ok_or(Error::NotRnds {
        residual: f64::INFINITY,
        best: unfit,
    })?;
    let mut mu = 1e-3;
    let mut iterations = 0;
    for it in 0..300 {
        iterations = it + 1;
        let cost = norm(&r);
        if cost < 1e-14 {
            break;
        }
        let mut jac = [[0.0; 3]; 4];
        let mut ok = true;
        for k in 0..3 {
            let h = 1e-7 * (1.0 + p[k].abs());
            let mut pp = p;
            pp[k] += h;
            let mut pm = p;
            pm[k] -= h;
            match (residuals(&pp, &targets), residuals(&pm, &targets)) {
                (Some(rp), Some(rm)) => {
                    for i in 0..4 {
                        jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for i in 0..4 {
            for a in 0..3 {
                jtr[a] += jac[i][a] * r[i];
                for b in 0..3 {
                    jtj[(a, b)] += jac[i][a] * jac[i][b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for a in 0..3 {
                damped[(a, a)] += mu * (jtj[(a, a)] + 1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                mu *= 10.0;
                continue;
            };
            let trial = p + step;
            if let Some(rt) = residuals(&trial, &targets) {
                if norm(&rt) < cost {
                    p = trial;
                    r = rt;
                    mu = (mu * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let params = RNdSParams::new(p[0].exp(), p[1].max(0.0).sqrt(), p[2].exp());
    let residual = norm(&r);
    if residual > threshold {
        return Err(Error::NotRnds {
            residual,
            best: params,
        });
    }
    Ok(Recovery {
        params,
        residual,
        iterations,
    })
}

/// Residual norm of the recovery objective at given parameters.
pub fn recovery_residual(
    params: RNdSParams,
    width: f64,
    kappa_minus: f64,
    kappa_plus: f64,
    a_minus: f64,
    a_plus: f64,
) -> f64 {
    let t = Targets {
        width,
        kappa_minus,
        kappa_plus,
        invariant: translation_invariant(a_minus, kappa_minus, a_plus, kappa_plus),
    };
    let p = Vector3::new(
        params.mass.ln(),
        params.charge * params.charge,
        params.lambda.ln(),
    );
    residuals(&p, &t).map_or(f64::INFINITY, |r| norm(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_liouville, fit_asymptotic_constants};

    fn reference() -> RNdSParams {
        RNdSParams::new(1.0, 0.5, 0.05)
    }

    #[test]
    fn horizons_match_high_precision_values() {
        let h = find_horizons(reference()).unwrap();
        let expect = [
            (h.r_n, -8.610_398_374_688_332),
            (h.r_c, 0.133_971_496_391_978_47),
            (h.r_minus, 2.011_311_425_613_837),
            (h.r_plus, 6.465_115_452_682_517),
            (h.kappa_n, 0.157_386_449_314_808_8),
            (h.kappa_c, -48.255_582_507_178_01),
            (h.kappa_minus, 0.182_948_378_734_289_14),
            (h.kappa_plus, -0.084_752_320_871_089_54),
        ];
        for (got, want) in expect {
            assert!((got - want).abs() <= 1e-11 * want.abs(), "{got} vs {want}");
        }
        assert!(h.max_residual() < 1e-12);
    }

    #[test]
    fn small_lambda_approaches_reissner_nordstrom() {
        let h = find_horizons(RNdSParams::new(1.0, 0.5, 1e-8)).unwrap();
        let s = 0.75f64.sqrt();
        assert!((h.r_c - (1.0 - s)).abs() < 1e-6);
        assert!((h.r_minus - (1.0 + s)).abs() < 1e-6);
    }

    #[test]
    fn overcharged_is_rejected() {
        let err = find_horizons(RNdSParams::new(1.0, 1.2, 0.05)).unwrap_err();
        match err {
            Error::DegenerateHorizons(msg) => assert!(msg.contains("9/8")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn regge_wheeler_properties() {
        let h = find_horizons(reference()).unwrap();
        let c = h.calibration_constant();
        let gm = (h.r_minus * h.r_plus).sqrt();
        assert!(regge_wheeler(&h, gm, c).unwrap().abs() < 1e-14);
        let mid = 0.5 * (h.r_minus + h.r_plus);
        let eps = 1e-5;
        let fd = (regge_wheeler(&h, mid + eps, c).unwrap() - regge_wheeler(&h, mid - eps, c).unwrap())
            / (2.0 * eps);
        assert!((fd * reference().lapse(mid) - 1.0).abs() < 1e-8);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..1000 {
            let r = h.r_minus + (h.r_plus - h.r_minus) * i as f64 / 1000.0;
            let x = regge_wheeler(&h, r, c).unwrap();
            assert!(x > prev);
            prev = x;
        }
        assert!(regge_wheeler(&h, h.r_minus, c).is_err());
    }

    #[test]
    fn near_horizon_log_dominates() {
        let h = find_horizons(reference()).unwrap();
        let r = h.r_minus + 1e-6;
        let x = regge_wheeler(&h, r, 0.0).unwrap();
        let rest = (r - h.r_n).ln() / (2.0 * h.kappa_n)
            + (r - h.r_c).ln() / (2.0 * h.kappa_c)
            + (h.r_plus - r).ln() / (2.0 * h.kappa_plus);
        let dominant = 1e-6f64.ln() / (2.0 * h.kappa_minus);
        assert!(((x - rest) / dominant - 1.0).abs() < 1e-9);
        assert!((x / dominant - 1.0).abs() < 0.2);
    }

    #[test]
    fn logistic_coordinate_agrees_with_radius_form() {
        let h = find_horizons(reference()).unwrap();
        let c = 0.37;
        for u in [-20.0, -3.0, 0.0, 1.5, 18.0] {
            let r = h.r_minus + (h.r_plus - h.r_minus) * logistic(u);
            let x = regge_wheeler(&h, r, c).unwrap();
            assert!((h.x_of_u(u, c) - x).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn profile_is_positive_with_horizon_rates() {
        let p = bh_profile(reference(), None).unwrap();
        for i in 0..=400 {
            let x = -20.0 + 0.1 * i as f64;
            assert!(p.evaluate(x) > 0.0);
        }
        let h = find_horizons(reference()).unwrap();
        let fit = fit_asymptotic_constants(&p, (60.0, 150.0)).unwrap();
        assert!((fit.tails.kappa_minus - h.kappa_minus).abs() < 1e-3);
        assert!((fit.tails.kappa_plus - h.kappa_plus).abs() < 1e-3);
        assert!((fit.tails.a_minus / p.a_minus() - 1.0).abs() < 1e-3);
        assert!((fit.tails.a_plus / p.a_plus() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = bh_profile(reference(), None).unwrap();
        for x in [-30.0, -2.0, 0.0, 4.0, 50.0] {
            let e = 1e-5;
            let fd = (p.evaluate(x + e) - p.evaluate(x - e)) / (2.0 * e);
            assert!((fd - p.evaluate_derivative(x)).abs() < 1e-7 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn width_matches_direct_quadrature() {
        let h = find_horizons(reference()).unwrap();
        let direct = h.total_width().unwrap();
        assert!((direct - 3.641_618_459_541_582_8).abs() < 1e-12);
        let p = bh_profile(reference(), None).unwrap();
        let m = build_liouville(&p, 1e-12).unwrap();
        assert!((m.total_width() - direct).abs() < 1e-8);
    }

    #[test]
    fn invariant_ignores_integration_constant() {
        let p0 = bh_profile(reference(), Some(0.0)).unwrap();
        let p1 = bh_profile(reference(), Some(2.5)).unwrap();
        let i0 = translation_invariant(p0.a_minus(), p0.kappa_minus(), p0.a_plus(), p0.kappa_plus());
        let i1 = translation_invariant(p1.a_minus(), p1.kappa_minus(), p1.a_plus(), p1.kappa_plus());
        assert!((i0 - i1).abs() < 1e-10 * i0.abs());
    }

    #[test]
    fn round_trip_recovery() {
        let p = bh_profile(reference(), None).unwrap();
        let width = build_liouville(&p, 1e-12).unwrap().total_width();
        let rec = recover_parameters(width, p.kappa_minus(), p.kappa_plus(), p.a_minus(), p.a_plus())
            .unwrap();
        assert!((rec.params.mass - 1.0).abs() < 1e-3);
        assert!((rec.params.charge.powi(2) - 0.25).abs() < 1e-3 * 0.25);
        assert!((rec.params.lambda - 0.05).abs() < 1e-3 * 0.05);
        let worse = recovery_residual(
            rec.params,
            1.1 * width,
            p.kappa_minus(),
            p.kappa_plus(),
            p.a_minus(),
            p.a_plus(),
        );
        assert!(worse > rec.residual);
    }

    #[test]
    fn sech_is_not_rnds() {
        let err = recover_parameters(std::f64::consts::PI, 1.0, -1.0, 2.0, 2.0).unwrap_err();
        match err {
            Error::NotRnds { residual, .. } => assert!(residual > RECOVERY_THRESHOLD),
            other => panic!("unexpected {other:?}"),
        }
    }
}
