//! Radial potentials `a(x)` of spherically symmetric asymptotically hyperbolic
//! manifolds, their exponential tail constants, and the rigid motions
//! (translation, reflection) under which the scattering data transform simply.

mod liouville;
mod table;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit::fit_line;
use crate::numerics::interp::Pchip;

pub use liouville::{build_liouville, sturm_liouville_potential, LiouvilleMap};
pub use table::{load_table, parse_table};

/// Default truncation half-width for unit-rate sech-class profiles.
pub const DEFAULT_X_CUT: f64 = 12.0;

/// A smooth radial function evaluated in its own coordinate.
pub trait RadialShape: Send + Sync + fmt::Debug {
    /// Returns `(a(x), a'(x))`.
    fn value_and_derivative(&self, x: f64) -> (f64, f64);

    /// Points where the shape is less smooth than `C²`, in shape coordinates.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `a(x) ≈ a_± e^{κ_± x}` as `x → ±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub a_minus: f64,
    pub kappa_minus: f64,
    pub a_plus: f64,
    pub kappa_plus: f64,
}

impl TailConstants {
    fn validate(&self) -> Result<()> {
        let ok = self.a_minus > 0.0
            && self.a_plus > 0.0
            && self.kappa_minus > 0.0
            && self.kappa_plus < 0.0
            && [self.a_minus, self.a_plus, self.kappa_minus, self.kappa_plus]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidProfile(format!(
                "tail constants must satisfy a± > 0, κ₋ > 0 > κ₊; got {self:?}"
            )))
        }
    }

    /// `∫_{-∞}^{x} a₋ e^{κ₋ s} ds`.
    pub fn left_integral(&self, x: f64) -> f64 {
        self.a_minus * (self.kappa_minus * x).exp() / self.kappa_minus
    }

    /// `∫_{x}^{∞} a₊ e^{κ₊ s} ds`.
    pub fn right_integral(&self, x: f64) -> f64 {
        self.a_plus * (self.kappa_plus * x).exp() / -self.kappa_plus
    }
}

/// An admissible radial potential.
///
/// Inside `[x_left, x_right]` the underlying shape is evaluated; outside, the
/// exact tail model `a_± e^{κ_± x}` takes over, which makes integrals over the
/// tails available in closed form.
#[derive(Clone)]
pub struct PotentialProfile {
    shape: Arc<dyn RadialShape>,
    orientation: f64,
    offset: f64,
    tails: TailConstants,
    x_left: f64,
    x_right: f64,
    label: String,
}

impl fmt::Debug for PotentialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialProfile")
            .field("label", &self.label)
            .field("tails", &self.tails)
            .field("x_left", &self.x_left)
            .field("x_right", &self.x_right)
            .finish()
    }
}

impl PotentialProfile {
    /// Wraps a shape, checking positivity on a dense grid of the bulk region.
    pub fn from_shape(
        shape: Arc<dyn RadialShape>,
        tails: TailConstants,
        x_left: f64,
        x_right: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        tails.validate()?;
        if !(x_left < x_right) {
            return Err(Error::InvalidProfile(format!(
                "empty bulk region [{x_left}, {x_right}]"
            )));
        }
        let profile = Self {
            shape,
            orientation: 1.0,
            offset: 0.0,
            tails,
            x_left,
            x_right,
            label: label.into(),
        };
        profile.check_positive(4001)?;
        Ok(profile)
    }

    fn check_positive(&self, samples: usize) -> Result<()> {
        for i in 0..samples {
            let x = self.x_left + (self.x_right - self.x_left) * i as f64 / (samples - 1) as f64;
            let v = self.evaluate(x);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositive { x, value: v });
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tails(&self) -> TailConstants {
        self.tails
    }

    pub fn a_minus(&self) -> f64 {
        self.tails.a_minus
    }

    pub fn a_plus(&self) -> f64 {
        self.tails.a_plus
    }

    pub fn kappa_minus(&self) -> f64 {
        self.tails.kappa_minus
    }

    pub fn kappa_plus(&self) -> f64 {
        self.tails.kappa_plus
    }

    /// Bulk region; the tail model is used outside it.
    pub fn bulk(&self) -> (f64, f64) {
        (self.x_left, self.x_right)
    }

    pub fn truncation_halfwidth(&self) -> f64 {
        self.x_left.abs().max(self.x_right.abs())
    }

    pub fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        let t = &self.tails;
        if x <= self.x_left {
            let v = t.a_minus * (t.kappa_minus * x).exp();
            (v, t.kappa_minus * v)
        } else if x >= self.x_right {
            let v = t.a_plus * (t.kappa_plus * x).exp();
            (v, t.kappa_plus * v)
        } else {
            let (v, d) = self
                .shape
                .value_and_derivative(self.orientation * x + self.offset);
            (v, self.orientation * d)
        }
    }

    /// Sorted points in `[x_left, x_right]` where `a` may lose smoothness,
    /// including the two cuts to the tail model.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .shape
            .breakpoints()
            .into_iter()
            .map(|u| (u - self.offset) * self.orientation)
            .filter(|x| *x > self.x_left && *x < self.x_right)
            .collect();
        out.push(self.x_left);
        out.push(self.x_right);
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.value_and_derivative(x).0
    }

    pub fn evaluate_derivative(&self, x: f64) -> f64 {
        self.value_and_derivative(x).1
    }

    /// `ã(x) = a(x + c)`.
    pub fn translate(&self, c: f64) -> Self {
        let t = self.tails;
        Self {
            shape: Arc::clone(&self.shape),
            orientation: self.orientation,
            offset: self.offset + self.orientation * c,
            tails: TailConstants {
                a_minus: t.a_minus * (t.kappa_minus * c).exp(),
                kappa_minus: t.kappa_minus,
                a_plus: t.a_plus * (t.kappa_plus * c).exp(),
                kappa_plus: t.kappa_plus,
            },
            x_left: self.x_left - c,
            x_right: self.x_right - c,
            label: format!("{}+shift({c})", self.label),
        }
    }

    /// `a*(x) = a(−x)`; the ends swap, so `κ*₋ = −κ₊`, `a*₋ = a₊` and vice versa.
    pub fn reflect(&self) -> Self {
        let t = self.tails;
        Self {
            shape: Arc::clone(&self.shape),
            orientation: -self.orientation,
            offset: self.offset,
            tails: TailConstants {
                a_minus: t.a_plus,
                kappa_minus: -t.kappa_plus,
                a_plus: t.a_minus,
                kappa_plus: -t.kappa_minus,
            },
            x_left: -self.x_right,
            x_right: -self.x_left,
            label: format!("{}*", self.label),
        }
    }
}

pub fn translate_profile(profile: &PotentialProfile, c: f64) -> PotentialProfile {
    profile.translate(c)
}

pub fn reflect_profile(profile: &PotentialProfile) -> PotentialProfile {
    profile.reflect()
}

/// Compactly supported `C²` bump `height·(1 − t²)³`, `t = (x − center)/width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl Bump {
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        let t = (x - self.center) / self.width;
        if t.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let u = 1.0 - t * t;
        (
            self.height * u * u * u,
            self.height * -6.0 * t * u * u / self.width,
        )
    }
}

/// `amplitude·sech(rate·x)` plus optional bumps.
#[derive(Debug, Clone)]
pub struct SechShape {
    pub amplitude: f64,
    pub rate: f64,
    pub bumps: Vec<Bump>,
}

impl RadialShape for SechShape {
    fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        let u = self.rate * x;
        let s = 1.0 / u.cosh();
        let mut v = self.amplitude * s;
        let mut d = -self.amplitude * self.rate * s * u.tanh();
        for b in &self.bumps {
            let (bv, bd) = b.value_and_derivative(x);
            v += bv;
            d += bd;
        }
        (v, d)
    }
}

#[derive(Debug, Clone)]
pub struct TableShape(pub Pchip);

impl RadialShape for TableShape {
    fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        self.0.eval_with_derivative(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.0.nodes().0.to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Sech,
    ScaledSech,
    BumpedSech,
    Tabulated,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sech" => Ok(Family::Sech),
            "scaled_sech" => Ok(Family::ScaledSech),
            "bumped_sech" => Ok(Family::BumpedSech),
            "tabulated" => Ok(Family::Tabulated),
            other => Err(Error::InvalidProfile(format!("unknown family '{other}'"))),
        }
    }
}

/// Builds a test potential.
///
/// | family        | params                                             |
/// |---------------|----------------------------------------------------|
/// | `sech`        | none                                               |
/// | `scaled_sech` | `[amplitude, rate]` → `amplitude·sech(rate·x)`      |
/// | `bumped_sech` | `[center, width, height]*` added to `sech(x)`       |
/// | `tabulated`   | flattened `[x0, a0, x1, a1, …]`                     |
pub fn make_analytic_profile(family: Family, params: &[f64]) -> Result<PotentialProfile> {
    match family {
        Family::Sech => {
            if !params.is_empty() {
                return Err(Error::InvalidProfile("sech takes no parameters".into()));
            }
            sech_profile(1.0, 1.0, Vec::new(), "sech")
        }
        Family::ScaledSech => {
            let [amplitude, rate] = params else {
                return Err(Error::InvalidProfile(
                    "scaled_sech expects [amplitude, rate]".into(),
                ));
            };
            if !(*amplitude > 0.0 && *rate > 0.0) {
                return Err(Error::InvalidProfile(
                    "scaled_sech needs amplitude > 0 and rate > 0".into(),
                ));
            }
            sech_profile(
                *amplitude,
                *rate,
                Vec::new(),
                format!("{amplitude}*sech({rate}x)"),
            )
        }
        Family::BumpedSech => {
            if params.is_empty() || !params.len().is_multiple_of(3) {
                return Err(Error::InvalidProfile(
                    "bumped_sech expects triples [center, width, height]".into(),
                ));
            }
            let bumps: Vec<Bump> = params
                .chunks(3)
                .map(|c| Bump {
                    center: c[0],
                    width: c[1],
                    height: c[2],
                })
                .collect();
            let label = bumps
                .iter()
                .map(|b| format!("bump({},{},{})", b.center, b.width, b.height))
                .collect::<Vec<_>>()
                .join("+");
            sech_profile(1.0, 1.0, bumps, format!("sech+{label}"))
        }
        Family::Tabulated => {
            if !params.len().is_multiple_of(2) {
                return Err(Error::InvalidProfile(
                    "tabulated expects flattened (x, a) pairs".into(),
                ));
            }
            let (xs, ys) = params.chunks(2).map(|c| (c[0], c[1])).unzip();
            tabulated_profile(xs, ys, "tabulated")
        }
    }
}

fn sech_profile(
    amplitude: f64,
    rate: f64,
    bumps: Vec<Bump>,
    label: impl Into<String>,
) -> Result<PotentialProfile> {
    let cut = DEFAULT_X_CUT / rate;
    for b in &bumps {
        if !(b.width > 0.0) {
            return Err(Error::InvalidProfile(format!("bump width must be positive: {b:?}")));
        }
        let (lo, hi) = b.support();
        if lo <= -cut || hi >= cut {
            return Err(Error::InvalidProfile(format!(
                "bump support [{lo}, {hi}] must lie inside the bulk (−{cut}, {cut})"
            )));
        }
    }
    let tails = TailConstants {
        a_minus: 2.0 * amplitude,
        kappa_minus: rate,
        a_plus: 2.0 * amplitude,
        kappa_plus: -rate,
    };
    let shape = SechShape {
        amplitude,
        rate,
        bumps,
    };
    PotentialProfile::from_shape(Arc::new(shape), tails, -cut, cut, label)
}

/// Monotone-cubic interpolant of tabulated samples; tails fitted on the outer nodes.
pub fn tabulated_profile(
    xs: Vec<f64>,
    ys: Vec<f64>,
    label: impl Into<String>,
) -> Result<PotentialProfile> {
    if xs.len() < 8 {
        return Err(Error::InvalidProfile(
            "tabulated profile needs at least 8 nodes".into(),
        ));
    }
    for w in xs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidProfile(format!(
                "abscissae must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
    }
    for (x, y) in xs.iter().zip(&ys) {
        if !(*y > 0.0) {
            return Err(Error::NonPositive { x: *x, value: *y });
        }
    }
    let k = (xs.len() / 10).max(3);
    let n = xs.len();
    let left = fit_line(&xs[..k], &ys[..k].iter().map(|v| v.ln()).collect::<Vec<_>>());
    let right = fit_line(
        &xs[n - k..],
        &ys[n - k..].iter().map(|v| v.ln()).collect::<Vec<_>>(),
    );
    let tails = TailConstants {
        a_minus: left.intercept.exp(),
        kappa_minus: left.slope,
        a_plus: right.intercept.exp(),
        kappa_plus: right.slope,
    };
    let (x_left, x_right) = (xs[0], xs[n - 1]);
    let shape = TableShape(Pchip::new(xs, ys));
    PotentialProfile::from_shape(Arc::new(shape), tails, x_left, x_right, label)
}

/// Result of a log-linear regression on both tails.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticFit {
    pub tails: TailConstants,
    pub residual_minus: f64,
    pub residual_plus: f64,
}

/// `|x|` window for tail fits: the outer part of the bulk on the shorter side.
pub fn bulk_fit_window(profile: &PotentialProfile) -> (f64, f64) {
    let (lo, hi) = profile.bulk();
    let reach = lo.abs().min(hi.abs());
    (0.6 * reach, 0.98 * reach)
}

/// Rms residual of `ln a` above which a tail is not considered exponential.
pub const TAIL_FIT_THRESHOLD: f64 = 1e-2;

/// Regresses `ln a(x)` on `x` over `[lo, hi]` (right tail) and `[−hi, −lo]` (left tail).
pub fn fit_asymptotic_constants(profile: &PotentialProfile, window: (f64, f64)) -> Result<AsymptoticFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain {
            what: "fit window",
            value: lo,
            domain: "0 < lo < hi".into(),
        });
    }
    let m = 201;
    let fit_side = |sign: f64, side: &'static str| -> Result<(f64, f64, f64)> {
        let xs: Vec<f64> = (0..m)
            .map(|i| sign * (lo + (hi - lo) * i as f64 / (m - 1) as f64))
            .collect();
        let vals: Vec<f64> = xs.iter().map(|&x| profile.evaluate(x)).collect();
        // Moving outward the potential must decrease strictly.
        for w in vals.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::FitFailure {
                    side,
                    reason: "tail is not monotone".into(),
                    residual: f64::NAN,
                });
            }
        }
        let ln: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let f = fit_line(&xs, &ln);
        if f.rms_residual > TAIL_FIT_THRESHOLD {
            return Err(Error::FitFailure {
                side,
                reason: "log-linear residual above threshold".into(),
                residual: f.rms_residual,
            });
        }
        Ok((f.intercept.exp(), f.slope, f.rms_residual))
    };
    let (a_plus, kappa_plus, residual_plus) = fit_side(1.0, "right")?;
    let (a_minus, kappa_minus, residual_minus) = fit_side(-1.0, "left")?;
    Ok(AsymptoticFit {
        tails: TailConstants {
            a_minus,
            kappa_minus,
            a_plus,
            kappa_plus,
        },
        residual_minus,
        residual_plus,
    })
}

/// Empirical constant `C` in `|a(x) − a_± e^{κ_± x}| ≤ C e^{3κ_± x}` over the outer
/// part of the bulk, `|x| ∈ [from, to]`.
pub fn tail_remainder_constant(profile: &PotentialProfile, from: f64, to: f64) -> f64 {
    let t = profile.tails();
    let mut c: f64 = 0.0;
    let m = 400;
    for i in 0..=m {
        let s = from + (to - from) * i as f64 / m as f64;
        let xr = s;
        let r = (profile.evaluate(xr) - t.a_plus * (t.kappa_plus * xr).exp()).abs()
            / (3.0 * t.kappa_plus * xr).exp();
        let xl = -s;
        let l = (profile.evaluate(xl) - t.a_minus * (t.kappa_minus * xl).exp()).abs()
            / (3.0 * t.kappa_minus * xl).exp();
        c = c.max(r).max(l);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sech() -> PotentialProfile {
        make_analytic_profile(Family::Sech, &[]).unwrap()
    }

    #[test]
    fn sech_constants() {
        let p = sech();
        let t = p.tails();
        assert_eq!((t.a_minus, t.a_plus), (2.0, 2.0));
        assert_eq!((t.kappa_minus, t.kappa_plus), (1.0, -1.0));
        assert_eq!(p.truncation_halfwidth(), DEFAULT_X_CUT);
        assert!((p.evaluate(0.3) - 1.0 / 0.3f64.cosh()).abs() < 1e-16);
    }

    #[test]
    fn bumped_sech_equals_sech_left_of_support() {
        let p = make_analytic_profile(Family::BumpedSech, &[3.0, 0.5, 0.1]).unwrap();
        let s = sech();
        for i in 0..200 {
            let x = -12.0 + 14.5 * i as f64 / 199.0;
            assert_eq!(p.evaluate(x), s.evaluate(x));
        }
        assert!(p.evaluate(3.0) > s.evaluate(3.0) + 0.09);
    }

    #[test]
    fn negative_bump_is_rejected_with_location() {
        let err = make_analytic_profile(Family::BumpedSech, &[5.0, 0.5, -1.0]).unwrap_err();
        match err {
            Error::NonPositive { x, value } => {
                assert!((x - 5.0).abs() < 0.5 && value <= 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fitted_sech_tails() {
        let f = fit_asymptotic_constants(&sech(), (5.0, 10.0)).unwrap();
        assert!((f.tails.kappa_plus + 1.0).abs() < 1e-4);
        assert!((f.tails.a_plus - 2.0).abs() < 1e-3);
        assert!((f.tails.kappa_minus - 1.0).abs() < 1e-4);
        assert!((f.tails.a_minus - 2.0).abs() < 1e-3);
    }

    #[test]
    fn rescaled_profile_scales_amplitudes_only() {
        let c = 2.5;
        let p = make_analytic_profile(Family::ScaledSech, &[c, 1.0]).unwrap();
        let f = fit_asymptotic_constants(&p, (5.0, 10.0)).unwrap();
        let g = fit_asymptotic_constants(&sech(), (5.0, 10.0)).unwrap();
        assert!((f.tails.a_plus / g.tails.a_plus - c).abs() < 1e-9);
        assert!((f.tails.kappa_plus - g.tails.kappa_plus).abs() < 1e-12);
        assert!((f.tails.kappa_minus - g.tails.kappa_minus).abs() < 1e-12);
    }

    #[test]
    fn tail_model_consistency_in_outer_third() {
        let p = sech();
        let f = fit_asymptotic_constants(&p, (8.0, 12.0)).unwrap();
        for i in 0..=50 {
            let x = 8.0 + 4.0 * i as f64 / 50.0;
            let model = f.tails.a_plus * (f.tails.kappa_plus * x).exp();
            assert!((model / p.evaluate(x) - 1.0).abs() < 1e-3);
        }
        assert!(tail_remainder_constant(&p, 4.0, 12.0) < 2.1);
    }

    #[test]
    fn fit_rejects_non_exponential_tail() {
        // A Gaussian-like table decays faster than any exponential.
        let xs: Vec<f64> = (0..81).map(|i| -8.0 + 0.2 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-0.5 * x * x).exp() + 1e-30).collect();
        let p = tabulated_profile(xs, ys, "gauss").unwrap();
        let err = fit_asymptotic_constants(&p, (1.0, 7.9)).unwrap_err();
        assert!(matches!(err, Error::FitFailure { .. }));
    }

    #[test]
    fn reflection_swaps_ends() {
        let p = make_analytic_profile(Family::BumpedSech, &[3.0, 0.5, 0.1]).unwrap();
        let r = p.reflect();
        assert_eq!(r.evaluate(-3.0), p.evaluate(3.0));
        assert_eq!(r.evaluate_derivative(-2.8), -p.evaluate_derivative(2.8));
        let s = sech();
        let rs = s.reflect();
        for x in [-13.0, -4.0, 0.0, 1.5, 12.5] {
            assert_eq!(rs.evaluate(x), s.evaluate(x));
        }
    }

    #[test]
    fn translation_retags_tails() {
        let p = sech().translate(0.8);
        for x in [-20.0, -12.5, 0.0, 11.0, 20.0] {
            let expect = sech().evaluate(x + 0.8);
            assert!((p.evaluate(x) - expect).abs() <= 1e-10 * expect);
        }
    }

    proptest! {
        #[test]
        fn translate_then_reflect_is_consistent(c in -3.0f64..3.0, x in -15.0f64..15.0) {
            let p = make_analytic_profile(Family::BumpedSech, &[2.0, 0.7, 0.2]).unwrap();
            let q = p.translate(c).reflect();
            // a(−x + c)
            let expect = p.evaluate(-x + c);
            prop_assert!((q.evaluate(x) - expect).abs() <= 1e-9 * expect);
        }
    }
}
