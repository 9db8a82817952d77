//! Complex angular momentum: `A_L(λ, z)` on complex grids, growth and parity
//! checks, and certified zeros of `a_L3` via the argument principle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jost::SpectralPoint;
use crate::numerics::fit::fit_line;
use crate::numerics::Mat2;
use crate::scattering::Scatterer;

/// Axis-aligned rectangle in the `z` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ZBox {
    pub fn new(re_min: f64, im_min: f64, re_max: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::Domain {
                what: "box width",
                value: (re_max - re_min).min(im_max - im_min),
                domain: "re_min < re_max and im_min < im_max".into(),
            });
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    /// Scales the box about its center by `1 + fraction`.
    pub fn dilate(&self, fraction: f64) -> Self {
        let c = self.center();
        let hw = 0.5 * (self.re_max - self.re_min) * (1.0 + fraction);
        let hh = 0.5 * (self.im_max - self.im_min) * (1.0 + fraction);
        Self {
            re_min: c.re - hw,
            re_max: c.re + hw,
            im_min: c.im - hh,
            im_max: c.im + hh,
        }
    }

    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re_min - margin
            && z.re <= self.re_max + margin
            && z.im >= self.im_min - margin
            && z.im <= self.im_max + margin
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Quadrisection at fractional position `(s, t)`.
    fn split(&self, s: f64, t: f64) -> [ZBox; 4] {
        let re = self.re_min + s * (self.re_max - self.re_min);
        let im = self.im_min + t * (self.im_max - self.im_min);
        [
            ZBox { re_max: re, im_max: im, ..*self },
            ZBox { re_min: re, im_max: im, ..*self },
            ZBox { re_max: re, im_min: im, ..*self },
            ZBox { re_min: re, im_min: im, ..*self },
        ]
    }
}

/// Regular grid of `n_re × n_im` nodes covering `bounds` (edges included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexGrid {
    pub bounds: ZBox,
    pub n_re: usize,
    pub n_im: usize,
}

impl ComplexGrid {
    pub fn nodes(&self) -> Vec<Complex64> {
        let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            if n <= 1 {
                vec![lo]
            } else {
                (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
            }
        };
        let b = &self.bounds;
        let res = axis(b.re_min, b.re_max, self.n_re);
        let ims = axis(b.im_min, b.im_max, self.n_im);
        ims.iter()
            .flat_map(|&im| res.iter().map(move |&re| Complex64::new(re, im)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CamSample {
    pub z: Complex64,
    pub m: Mat2,
    pub log_scale: f64,
    pub profile_label: String,
}

impl CamSample {
    /// De-scaled `a_Lj`, `j ∈ 1..=4`.
    pub fn entry(&self, j: usize) -> Complex64 {
        self.m.m[j - 1] * self.log_scale.exp()
    }

    pub fn ln_abs_entry(&self, j: usize) -> f64 {
        self.m.m[j - 1].norm().ln() + self.log_scale
    }

    /// `max_j |a_Lj| e^{−A|Re z|}`.
    pub fn bound_ratio(&self, width: f64) -> f64 {
        (1..=4)
            .map(|j| (self.ln_abs_entry(j) - width * self.z.re.abs()).exp())
            .fold(0.0, f64::max)
    }
}

fn sample(s: &Scatterer, lambda: f64, z: Complex64) -> Result<CamSample> {
    let tm = s
        .transfer_matrix(SpectralPoint::new(lambda, z))
        .map_err(|e| e.at_node(z))?;
    Ok(CamSample {
        z,
        m: tm.m,
        log_scale: tm.log_scale,
        profile_label: s.profile().label().to_string(),
    })
}

/// Evaluates `A_L(λ, z)` at every node, in node order.
pub fn cam_scan(s: &Scatterer, lambda: f64, grid: &ComplexGrid) -> Result<Vec<CamSample>> {
    cam_samples(s, lambda, &grid.nodes())
}

pub fn cam_samples(s: &Scatterer, lambda: f64, zs: &[Complex64]) -> Result<Vec<CamSample>> {
    zs.par_iter().map(|&z| sample(s, lambda, z)).collect()
}

/// `max(|aL1(z) − conj(aL4(z̄))|, |aL2(z) − conj(aL3(z̄))|)`.
pub fn symmetry_residuals(at_z: &CamSample, at_conj: &CamSample) -> f64 {
    let d1 = (at_z.entry(1) - at_conj.entry(4).conj()).norm();
    let d2 = (at_z.entry(2) - at_conj.entry(3).conj()).norm();
    d1.max(d2)
}

/// `max(|aL1(z) − aL1(−z)|, |aL4(z) − aL4(−z)|, |aL2(z) + aL2(−z)|, |aL3(z) + aL3(−z)|)`.
pub fn parity_residual(at_z: &CamSample, at_neg: &CamSample) -> f64 {
    let e = |j| (at_z.entry(j) - at_neg.entry(j)).norm();
    let o = |j| (at_z.entry(j) + at_neg.entry(j)).norm();
    e(1).max(e(4)).max(o(2)).max(o(3))
}

/// `|aL1(z) conj(aL1(z̄)) − aL3(z) conj(aL3(z̄)) − 1|`.
pub fn determinant_relation_residual(at_z: &CamSample, at_conj: &CamSample) -> f64 {
    (at_z.entry(1) * at_conj.entry(1).conj() - at_z.entry(3) * at_conj.entry(3).conj() - 1.0).norm()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZeroOptions {
    /// Initial samples per box edge.
    pub edge_samples: usize,
    /// Phase increment that triggers refinement of a boundary segment.
    pub max_phase_step: f64,
    pub max_dilations: usize,
    pub dilation: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub residual_tol: f64,
    /// Boxes below this diameter stop splitting; remaining winding is multiplicity.
    pub min_box: f64,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        Self {
            edge_samples: 16,
            max_phase_step: PI / 2.0,
            max_dilations: 3,
            dilation: 0.01,
            newton_tol: 1e-12,
            max_newton: 40,
            residual_tol: 1e-8,
            min_box: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zero {
    pub z: Complex64,
    pub residual: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    /// Contour actually used, after any dilation.
    pub bounds: ZBox,
    pub dilations: usize,
    pub winding_count: i64,
    /// Sorted by imaginary part.
    pub zeros: Vec<Zero>,
}

struct ZeroFinder<'a> {
    s: &'a Scatterer,
    lambda: f64,
    opts: ZeroOptions,
}

/// Failure to resolve the phase along a contour, carrying the closest approach.
struct TooClose(Complex64);

enum WindError {
    TooClose(TooClose),
    Solver(Error),
}

impl From<Error> for WindError {
    fn from(e: Error) -> Self {
        WindError::Solver(e)
    }
}

impl ZeroFinder<'_> {
    fn f(&self, z: Complex64) -> Result<Complex64> {
        let tm = self
            .s
            .transfer_matrix(SpectralPoint::new(self.lambda, z))
            .map_err(|e| e.at_node(z))?;
        Ok(tm.entry(3))
    }

    /// `|a_L3| e^{−A|Re z|}`, the magnitude relative to its a-priori bound.
    fn relative(&self, z: Complex64, v: Complex64) -> f64 {
        v.norm() * (-self.s.total_width() * z.re.abs()).exp()
    }

    fn winding(&self, b: &ZBox) -> std::result::Result<i64, WindError> {
        let corners = b.corners();
        let min_len = self.opts.min_box * 1e-3 * b.diameter().max(1.0);
        let n = self.opts.edge_samples.max(2);
        // Contour parameter in [0, 4): edge k covers [k, k+1).
        let at = |t: f64| {
            let k = (t.floor() as usize).min(3);
            let u = t - k as f64;
            corners[k] + (corners[(k + 1) % 4] - corners[k]) * u
        };
        let mut ts: Vec<f64> = (0..=4 * n).map(|i| i as f64 / n as f64).collect();
        let mut vals: Vec<Complex64> = ts
            .par_iter()
            .map(|&t| self.f(at(t)))
            .collect::<Result<Vec<_>>>()?;
        loop {
            let mut bad = Vec::new();
            for i in 0..ts.len() - 1 {
                let (a, c) = (vals[i], vals[i + 1]);
                let step = (c / a).arg();
                if !(step.abs() <= self.opts.max_phase_step) {
                    let len = (at(ts[i + 1]) - at(ts[i])).norm().max((ts[i + 1] - ts[i]) * 1e-300);
                    if len < min_len || ts[i + 1] - ts[i] < 1e-13 {
                        return Err(WindError::TooClose(TooClose(at(0.5 * (ts[i] + ts[i + 1])))));
                    }
                    bad.push(i);
                }
            }
            for (t, v) in ts.iter().zip(&vals) {
                let z = at(*t);
                if !(self.relative(z, *v) > 1e-12) {
                    return Err(WindError::TooClose(TooClose(z)));
                }
            }
            if bad.is_empty() {
                break;
            }
            let mids: Vec<f64> = bad.iter().map(|&i| 0.5 * (ts[i] + ts[i + 1])).collect();
            let new_vals = mids
                .par_iter()
                .map(|&t| self.f(at(t)))
                .collect::<Result<Vec<_>>>()?;
            for (k, &i) in bad.iter().enumerate().rev() {
                ts.insert(i + 1, mids[k]);
                vals.insert(i + 1, new_vals[k]);
            }
        }
        let total: f64 = vals.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
        Ok((total / (2.0 * PI)).round() as i64)
    }

    fn newton(&self, start: Complex64) -> Result<Option<(Complex64, f64)>> {
        let mut z = start;
        for _ in 0..self.opts.max_newton {
            let h = 1e-6 * (1.0 + z.norm());
            let fz = self.f(z)?;
            let dp = self.f(z + h)?;
            let dm = self.f(z - h)?;
            let d = (dp - dm) / (2.0 * h);
            if d.norm() == 0.0 || !d.norm().is_finite() {
                return Ok(None);
            }
            let step = fz / d;
            z -= step;
            if step.norm() <= self.opts.newton_tol * (1.0 + z.norm()) {
                let r = self.f(z)?.norm();
                return Ok(Some((z, r)));
            }
        }
        Ok(None)
    }

    /// Splits `b` (known winding `w`) until every zero is isolated and polished.
    fn localize(&self, b: ZBox, w: i64, out: &mut Vec<Zero>) -> std::result::Result<(), WindError> {
        if w == 0 {
            return Ok(());
        }
        if w == 1 {
            if let Some((z, r)) = self.newton(b.center())? {
                if b.contains(z, 1e-9 * (1.0 + b.diameter())) {
                    out.push(Zero {
                        z,
                        residual: r,
                        multiplicity: 1,
                    });
                    return Ok(());
                }
            }
        }
        if b.diameter() < self.opts.min_box {
            let (z, r) = match self.newton(b.center())? {
                Some((z, r)) if b.contains(z, b.diameter()) => (z, r),
                _ => (b.center(), self.f(b.center())?.norm()),
            };
            out.push(Zero {
                z,
                residual: r,
                multiplicity: w as usize,
            });
            return Ok(());
        }
        // Split off-center if a cut passes through a zero.
        for (s, t) in [(0.5, 0.5), (0.47, 0.53), (0.53, 0.46), (0.41, 0.57)] {
            let kids = b.split(s, t);
            let mut ws = [0i64; 4];
            let mut ok = true;
            for (k, kid) in kids.iter().enumerate() {
                match self.winding(kid) {
                    Ok(v) => ws[k] = v,
                    Err(WindError::TooClose(_)) => {
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !ok || ws.iter().sum::<i64>() != w {
                continue;
            }
            for (kid, wk) in kids.iter().zip(ws) {
                self.localize(*kid, wk, out)?;
            }
            return Ok(());
        }
        Err(WindError::TooClose(TooClose(b.center())))
    }
}

/// Certified zeros of `a_L3(λ, ·)` inside `bounds`.
pub fn find_zeros_al3(s: &Scatterer, lambda: f64, bounds: ZBox) -> Result<ZeroSet> {
    find_zeros_al3_with(s, lambda, bounds, &ZeroOptions::default())
}

pub fn find_zeros_al3_with(
    s: &Scatterer,
    lambda: f64,
    bounds: ZBox,
    opts: &ZeroOptions,
) -> Result<ZeroSet> {
    let finder = ZeroFinder {
        s,
        lambda,
        opts: *opts,
    };
    let mut b = bounds;
    let mut dilations = 0;
    let winding = loop {
        match finder.winding(&b) {
            Ok(w) => break w,
            Err(WindError::Solver(e)) => return Err(e),
            Err(WindError::TooClose(TooClose(z))) => {
                if dilations >= opts.max_dilations {
                    return Err(Error::BoundaryTooClose {
                        dilations,
                        re: z.re,
                        im: z.im,
                    });
                }
                dilations += 1;
                b = bounds.dilate((1.0 + opts.dilation).powi(dilations as i32) - 1.0);
            }
        }
    };
    if winding < 0 {
        return Err(Error::WindingMismatch { winding, found: 0 });
    }
    let mut zeros = Vec::new();
    match finder.localize(b, winding, &mut zeros) {
        Ok(()) => {}
        Err(WindError::Solver(e)) => return Err(e),
        Err(WindError::TooClose(TooClose(z))) => {
            return Err(Error::BoundaryTooClose {
                dilations,
                re: z.re,
                im: z.im,
            })
        }
    }
    zeros.sort_by(|a, b| a.z.im.total_cmp(&b.z.im).then(a.z.re.total_cmp(&b.z.re)));
    let found: usize = zeros.iter().map(|z| z.multiplicity).sum();
    if found as i64 != winding {
        return Err(Error::WindingMismatch { winding, found });
    }
    Ok(ZeroSet {
        bounds: b,
        dilations,
        winding_count: winding,
        zeros,
    })
}

/// Strip around the predicted real part of large zeros, widened by ±1.
pub fn default_search_box(s: &Scatterer, lambda: f64, im_min: f64, im_max: f64) -> Result<ZBox> {
    let p = s.profile();
    let re = -lambda * PI / (2.0 * s.total_width()) * (1.0 / p.kappa_plus() + 1.0 / p.kappa_minus());
    ZBox::new(re - 1.0, im_min, re + 1.0, im_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeFit {
    /// Offset `p`, with the lowest listed zero taken as index 1.
    pub p_estimate: f64,
    pub slope: f64,
    /// `|slope − π/A| / (π/A)`.
    pub spacing_residual: f64,
    pub mean_re: f64,
    pub predicted_re: f64,
    /// `|mean Re z − predicted|`.
    pub realpart_residual: f64,
}

/// Fits `Im z_k ≈ (π/A)(k + p)` and compares `Re z_k` with `−λπ(1/κ₊ + 1/κ₋)/(2A)`.
pub fn zero_lattice_fit(
    zeros: &[Complex64],
    width: f64,
    kappa_minus: f64,
    kappa_plus: f64,
    lambda: f64,
) -> Result<LatticeFit> {
    if zeros.len() < 4 {
        return Err(Error::NotEnoughSamples {
            needed: 4,
            got: zeros.len(),
        });
    }
    let mut zs = zeros.to_vec();
    zs.sort_by(|a, b| a.im.total_cmp(&b.im));
    let ks: Vec<f64> = (1..=zs.len()).map(|k| k as f64).collect();
    let ims: Vec<f64> = zs.iter().map(|z| z.im).collect();
    let f = fit_line(&ks, &ims);
    let unit = PI / width;
    let mean_re = zs.iter().map(|z| z.re).sum::<f64>() / zs.len() as f64;
    let predicted_re = -lambda * PI / (2.0 * width) * (1.0 / kappa_plus + 1.0 / kappa_minus);
    Ok(LatticeFit {
        p_estimate: f.intercept / unit,
        slope: f.slope,
        spacing_residual: (f.slope - unit).abs() / unit,
        mean_re,
        predicted_re,
        realpart_residual: (mean_re - predicted_re).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_analytic_profile, Family};

    fn sech() -> Scatterer {
        Scatterer::new(&make_analytic_profile(Family::Sech, &[]).unwrap()).unwrap()
    }

    #[test]
    fn imaginary_axis_is_bounded() {
        let s = sech();
        let grid = ComplexGrid {
            bounds: ZBox::new(0.0, 0.0, 1.0, 10.0).unwrap(),
            n_re: 1,
            n_im: 41,
        };
        let samples = cam_scan(&s, 1.0, &grid).unwrap();
        let worst = samples.iter().map(|c| c.entry(1).norm()).fold(0.0, f64::max);
        assert!(worst <= 1.0 + 1e-6, "{worst}");
    }

    #[test]
    fn real_nodes_match_scattering_path() {
        let s = sech();
        let c = cam_samples(&s, 1.0, &[Complex64::new(3.0, 0.0)]).unwrap();
        let tm = s.transfer_matrix(SpectralPoint::real(1.0, 3.0)).unwrap();
        assert_eq!(c[0].m, tm.m);
        assert_eq!(c[0].log_scale, tm.log_scale);
    }

    #[test]
    fn parity_and_conjugation() {
        let s = make_analytic_profile(Family::BumpedSech, &[1.0, 0.7, 0.3]).unwrap();
        let s = Scatterer::new(&s).unwrap();
        let zs = [Complex64::new(1.0, 2.0), Complex64::new(0.4, -1.3)];
        for z in zs {
            let v = cam_samples(&s, 1.0, &[z, -z, z.conj()]).unwrap();
            assert!(parity_residual(&v[0], &v[1]) < 1e-8);
            assert!(symmetry_residuals(&v[0], &v[2]) < 1e-7);
            assert!(determinant_relation_residual(&v[0], &v[2]) < 1e-7);
        }
    }

    #[test]
    fn zero_energy_conjugation_closed_form() {
        let s = sech();
        let z = Complex64::new(0.6, 1.7);
        let v = cam_samples(&s, 0.0, &[z, z.conj()]).unwrap();
        assert!(symmetry_residuals(&v[0], &v[2 - 1]) < 1e-10);
        let want = Complex64::i() * (z * PI).sinh();
        assert!((v[0].entry(3) - want).norm() < 1e-8 * want.norm());
    }

    #[test]
    fn zero_energy_zeros_are_integers_on_the_imaginary_axis() {
        let s = sech();
        let set = find_zeros_al3(&s, 0.0, ZBox::new(-0.5, 0.5, 0.5, 5.5).unwrap()).unwrap();
        assert_eq!(set.winding_count, 5);
        for (k, z) in set.zeros.iter().enumerate() {
            assert!((z.z - Complex64::new(0.0, (k + 1) as f64)).norm() < 1e-8, "{:?}", z);
            assert!(z.residual < 1e-8);
        }
    }

    #[test]
    fn boundary_zeros_trigger_dilation() {
        let s = sech();
        let set = find_zeros_al3(&s, 0.0, ZBox::new(0.0, 0.5, 1.0, 5.5).unwrap()).unwrap();
        assert!(set.dilations >= 1);
        assert_eq!(set.zeros.len(), 5);
    }

    #[test]
    fn unit_energy_lattice() {
        let s = sech();
        let b = default_search_box(&s, 1.0, 2.0, 12.0).unwrap();
        assert_eq!((b.re_min, b.re_max), (-1.0, 1.0));
        let set = find_zeros_al3(&s, 1.0, b).unwrap();
        let count: usize = set.zeros.iter().map(|z| z.multiplicity).sum();
        assert_eq!(count as i64, set.winding_count);
        assert!(set.zeros.len() >= 8);
        assert!(set.zeros.iter().all(|z| z.residual < 1e-8));
        let zs: Vec<Complex64> = set.zeros.iter().map(|z| z.z).collect();
        let f = zero_lattice_fit(&zs, s.total_width(), 1.0, -1.0, 1.0).unwrap();
        assert!(f.spacing_residual < 0.02, "{f:?}");
        assert!(f.realpart_residual < 0.05, "{f:?}");
        let again = find_zeros_al3(&s, 1.0, b.dilate(0.01)).unwrap();
        assert_eq!(again.winding_count, set.winding_count);
    }

    #[test]
    fn lattice_fit_examples() {
        let unit = PI / 2.5;
        let synth: Vec<Complex64> = (1..=6).map(|n| Complex64::new(0.0, unit * (n as f64 + 3.0))).collect();
        let f = zero_lattice_fit(&synth, 2.5, 1.0, -1.0, 1.0).unwrap();
        assert!((f.p_estimate - 3.0).abs() < 1e-12);
        assert!(f.spacing_residual < 1e-12);
        let ints: Vec<Complex64> = (1..=5).map(|k| Complex64::new(0.0, k as f64)).collect();
        let f = zero_lattice_fit(&ints, PI, 1.0, -1.0, 0.0).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12 && f.realpart_residual == 0.0);
        assert!(zero_lattice_fit(&ints[..3], PI, 1.0, -1.0, 0.0).is_err());
    }
}
