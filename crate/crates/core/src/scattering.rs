//! Transfer matrix `A_L = F_R⁻¹ F_L`, the partial S-matrix `(T, L, R)` it
//! generates, and structural checks on both.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jost::{interaction_solution, JostOptions, Side, SpectralPoint};
use crate::numerics::Mat2;
use crate::profile::{build_liouville, LiouvilleMap, PotentialProfile};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScatteringOptions {
    pub jost: JostOptions,
    /// Allowed relative disagreement between the two matching points.
    pub match_tol: f64,
    pub liouville_tol: f64,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self {
            jost: JostOptions::default(),
            match_tol: 1e-8,
            liouville_tol: 1e-12,
        }
    }
}

/// `A_L(λ, z) = e^{log_scale}·[[aL1, aL2], [aL3, aL4]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix {
    pub pt: SpectralPoint,
    pub m: Mat2,
    pub log_scale: f64,
    /// Relative disagreement between the values assembled at the two matching points.
    pub matching_residual: f64,
}

impl TransferMatrix {
    pub fn true_matrix(&self) -> Mat2 {
        self.m.scale_real(self.log_scale.exp())
    }

    /// De-scaled entry `a_Lj`, `j ∈ 1..=4`.
    pub fn entry(&self, j: usize) -> Complex64 {
        self.m.m[j - 1] * self.log_scale.exp()
    }

    /// `(|aL1|² − |aL3|² − 1, |aL4|² − |aL2|² − 1, |aL1·conj(aL2) − aL3·conj(aL4)|)`
    /// expressed relative to the squared scale, as magnitudes.
    pub fn unitarity_residuals(&self) -> [f64; 3] {
        let a = self.true_matrix().m;
        [
            (a[0].norm_sqr() - a[2].norm_sqr() - 1.0).abs(),
            (a[3].norm_sqr() - a[1].norm_sqr() - 1.0).abs(),
            (a[0] * a[1].conj() - a[2] * a[3].conj()).norm(),
        ]
    }

    /// `max(|aL1 − conj(aL4)|, |aL2 − conj(aL3)|)`, meaningful for real `z`.
    pub fn conjugation_residual(&self) -> f64 {
        let a = self.true_matrix().m;
        (a[0] - a[3].conj()).norm().max((a[1] - a[2].conj()).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringEntry {
    pub pt: SpectralPoint,
    pub t: Complex64,
    pub l: Complex64,
    pub r: Complex64,
    /// `ln|T|`, finite even where `T` itself underflows.
    pub ln_abs_t: f64,
}

impl ScatteringEntry {
    pub fn unitarity_residual(&self) -> f64 {
        let t2 = self.t.norm_sqr();
        (t2 + self.l.norm_sqr() - 1.0)
            .abs()
            .max((t2 + self.r.norm_sqr() - 1.0).abs())
    }
}

/// A profile together with the Liouville map that fixes the matching points.
#[derive(Debug, Clone)]
pub struct Scatterer {
    profile: PotentialProfile,
    map: LiouvilleMap,
    matching: [f64; 2],
    opts: ScatteringOptions,
}

impl Scatterer {
    pub fn new(profile: &PotentialProfile) -> Result<Self> {
        Self::with_options(profile, ScatteringOptions::default())
    }

    pub fn with_options(profile: &PotentialProfile, opts: ScatteringOptions) -> Result<Self> {
        let map = build_liouville(profile, opts.liouville_tol)?;
        let a = map.total_width();
        let matching = [map.h(a / 2.0)?, map.h(a / 3.0)?];
        Ok(Self {
            profile: profile.clone(),
            map,
            matching,
            opts,
        })
    }

    pub fn profile(&self) -> &PotentialProfile {
        &self.profile
    }

    pub fn liouville(&self) -> &LiouvilleMap {
        &self.map
    }

    pub fn total_width(&self) -> f64 {
        self.map.total_width()
    }

    pub fn options(&self) -> &ScatteringOptions {
        &self.opts
    }

    pub fn matching_points(&self) -> [f64; 2] {
        self.matching
    }

    pub fn transfer_matrix(&self, pt: SpectralPoint) -> Result<TransferMatrix> {
        let xs = self.matching;
        let (ul, _, _) = interaction_solution(&self.profile, pt, Side::Left, &xs, &self.opts.jost)?;
        let (ur, _, _) = interaction_solution(&self.profile, pt, Side::Right, &xs, &self.opts.jost)?;
        // With det U_R = 1, U_R⁻¹ = adj(e^{s_R} m_R) = e^{s_R} adj(m_R).
        let assemble = |k: usize| {
            let m = ur[k].y.adjugate() * ul[k].y;
            (m, ur[k].log_scale + ul[k].log_scale)
        };
        let (m0, s0) = assemble(0);
        let (m1, s1) = assemble(1);
        let scale = m0.max_abs();
        let (m, log_scale) = if scale > 0.0 {
            (m0.scale_real(1.0 / scale), s0 + scale.ln())
        } else {
            (m0, s0)
        };
        let other = m1.scale_real((s1 - log_scale).exp());
        let residual = (m - other).max_abs();
        if !(residual <= self.opts.match_tol) {
            return Err(Error::MatchingMismatch { residual });
        }
        Ok(TransferMatrix {
            pt,
            m,
            log_scale,
            matching_residual: residual,
        })
    }

    pub fn scattering_entry(&self, pt: SpectralPoint) -> Result<ScatteringEntry> {
        s_matrix(&self.transfer_matrix(pt)?)
    }

    /// Entries at `(λ, n)` for every `n`, evaluated in parallel, in input order.
    pub fn scattering_entries(&self, lambda: f64, ns: &[f64]) -> Result<Vec<ScatteringEntry>> {
        ns.par_iter()
            .map(|&n| self.scattering_entry(SpectralPoint::real(lambda, n)))
            .collect()
    }
}

pub fn transfer_matrix(profile: &PotentialProfile, pt: SpectralPoint) -> Result<TransferMatrix> {
    Scatterer::new(profile)?.transfer_matrix(pt)
}

/// `T = 1/aL1`, `R = −aL2/aL1`, `L = aL3/aL1`.
pub fn s_matrix(tm: &TransferMatrix) -> Result<ScatteringEntry> {
    let a = tm.m.m;
    if tm.pt.z.im == 0.0 {
        let abs_al1 = a[0].norm() * tm.log_scale.exp();
        if !(abs_al1 >= 1.0 - 1e-6) {
            return Err(Error::Unitarity {
                abs_al1,
                n: tm.pt.z.re,
            });
        }
    }
    let inv = a[0].inv();
    Ok(ScatteringEntry {
        pt: tm.pt,
        t: inv * (-tm.log_scale).exp(),
        l: a[2] * inv,
        r: -a[1] * inv,
        ln_abs_t: -tm.log_scale - a[0].norm().ln(),
    })
}

/// Phase law under `x ↦ x + c`: `T̃ = T`, `L̃ = e^{−2iλc} L`, `R̃ = e^{2iλc} R`.
pub fn translated_s_matrix(entry: &ScatteringEntry, lambda: f64, c: f64) -> ScatteringEntry {
    let phase = Complex64::from_polar(1.0, -2.0 * lambda * c);
    ScatteringEntry {
        l: entry.l * phase,
        r: entry.r * phase.conj(),
        ..*entry
    }
}

/// `|R*(λ, n) + conj(L(−λ, n))|`, where `R*` belongs to the reflected profile.
pub fn star_reflection_check(profile: &PotentialProfile, lambda: f64, n: f64) -> Result<f64> {
    let star = Scatterer::new(&profile.reflect())?;
    let orig = Scatterer::new(profile)?;
    let r_star = star.scattering_entry(SpectralPoint::real(lambda, n))?.r;
    let l = orig.scattering_entry(SpectralPoint::real(-lambda, n))?.l;
    Ok((r_star + l.conj()).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorNorms {
    pub t: f64,
    pub l: f64,
    pub r: f64,
}

/// Supremum over the supplied angular momenta of `|T|`, `|L|`, `|R|`.
pub fn operator_norms(entries: &[ScatteringEntry]) -> Result<OperatorNorms> {
    if entries.is_empty() {
        return Err(Error::Empty("scattering entries"));
    }
    Ok(entries.iter().fold(
        OperatorNorms {
            t: 0.0,
            l: 0.0,
            r: 0.0,
        },
        |acc, e| OperatorNorms {
            t: acc.t.max(e.t.norm()),
            l: acc.l.max(e.l.norm()),
            r: acc.r.max(e.r.norm()),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_analytic_profile, Family};
    use std::f64::consts::PI;

    fn sech() -> PotentialProfile {
        make_analytic_profile(Family::Sech, &[]).unwrap()
    }

    #[test]
    fn zero_momentum_gives_identity() {
        let s = Scatterer::new(&sech()).unwrap();
        for lambda in [0.5, 1.0] {
            let tm = s.transfer_matrix(SpectralPoint::real(lambda, 0.0)).unwrap();
            assert!((tm.true_matrix() - Mat2::identity()).max_abs() < 1e-10);
            let e = s_matrix(&tm).unwrap();
            assert_eq!(e.t, Complex64::new(1.0, 0.0));
            assert_eq!(e.l, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_energy_closed_form() {
        let s = Scatterer::new(&sech()).unwrap();
        let i = Complex64::i();
        for n in 1..=5 {
            let n = n as f64;
            let tm = s.transfer_matrix(SpectralPoint::real(0.0, n)).unwrap();
            let c = (n * PI).cosh();
            let sh = (n * PI).sinh();
            let want = Mat2::new(c.into(), -i * sh, i * sh, c.into());
            assert!((tm.true_matrix() - want).max_abs() < 1e-8 * c);
            let e = s_matrix(&tm).unwrap();
            assert!((e.t - 1.0 / c).norm() < 1e-8);
            assert!((e.l - i * (n * PI).tanh()).norm() < 1e-8);
        }
    }

    #[test]
    fn unitarity_and_conjugation_at_real_momenta() {
        let s = Scatterer::new(&sech()).unwrap();
        let ns: Vec<f64> = (1..=12).map(f64::from).collect();
        for lambda in [0.5, 1.0] {
            for e in s.scattering_entries(lambda, &ns).unwrap() {
                assert!(e.unitarity_residual() < 1e-8, "{e:?}");
            }
            let tm = s.transfer_matrix(SpectralPoint::real(lambda, 3.0)).unwrap();
            let [u1, u2, u3] = tm.unitarity_residuals();
            let scale = tm.true_matrix().max_abs().powi(2);
            assert!(u1.max(u2).max(u3) < 1e-8 * scale);
            assert!(tm.conjugation_residual() < 1e-8 * tm.true_matrix().max_abs());
        }
    }

    #[test]
    fn transmission_decreases_with_momentum() {
        let s = Scatterer::new(&sech()).unwrap();
        let ns: Vec<f64> = (1..=20).map(f64::from).collect();
        let es = s.scattering_entries(1.0, &ns).unwrap();
        for w in es.windows(2) {
            assert!(w[1].ln_abs_t < w[0].ln_abs_t);
        }
    }

    #[test]
    fn phase_law_examples() {
        let e = ScatteringEntry {
            pt: SpectralPoint::real(1.0, 1.0),
            t: Complex64::new(0.1, 0.2),
            l: Complex64::new(0.3, -0.4),
            r: Complex64::new(-0.5, 0.1),
            ln_abs_t: 0.0,
        };
        let full = translated_s_matrix(&e, 1.0, PI);
        assert!((full.l - e.l).norm() < 1e-15 && (full.r - e.r).norm() < 1e-15);
        let q = translated_s_matrix(&e, 1.0, PI / 4.0);
        assert!((q.l - (-Complex64::i() * e.l)).norm() < 1e-15);
        assert_eq!(q.t, e.t);
        assert!((translated_s_matrix(&e, 1.0, 0.77).l.norm() - e.l.norm()).abs() < 1e-15);
    }

    #[test]
    fn translation_covariance_from_profiles() {
        let p = make_analytic_profile(Family::BumpedSech, &[1.0, 0.6, 0.2]).unwrap();
        let s = Scatterer::new(&p).unwrap();
        for c in [0.3, PI] {
            let st = Scatterer::new(&p.translate(c)).unwrap();
            for n in [1.0, 4.0] {
                let pt = SpectralPoint::real(1.0, n);
                let e = s.scattering_entry(pt).unwrap();
                let et = st.scattering_entry(pt).unwrap();
                let pred = translated_s_matrix(&e, 1.0, c);
                assert!((et.l - pred.l).norm() < 1e-8);
                assert!((et.r - pred.r).norm() < 1e-8);
                assert!((et.t - e.t).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn star_trick() {
        assert!(star_reflection_check(&sech(), 1.0, 1.0).unwrap() < 1e-8);
        let s = Scatterer::new(&sech()).unwrap();
        let r = s.scattering_entry(SpectralPoint::real(1.0, 1.0)).unwrap().r;
        let l = s.scattering_entry(SpectralPoint::real(-1.0, 1.0)).unwrap().l;
        assert!((r + l.conj()).norm() < 1e-8);
        let b = make_analytic_profile(Family::BumpedSech, &[3.0, 0.5, 0.1]).unwrap();
        assert!(star_reflection_check(&b, 1.0, 2.0).unwrap() < 1e-8);
        assert!(star_reflection_check(&b, 0.0, 2.0).unwrap() < 1e-8);
    }

    #[test]
    fn operator_norm_aggregation() {
        let s = Scatterer::new(&sech()).unwrap();
        let ns: Vec<f64> = (1..=10).map(f64::from).collect();
        let es = s.scattering_entries(0.0, &ns).unwrap();
        let norms = operator_norms(&es).unwrap();
        assert!((norms.t - 1.0 / PI.cosh()).abs() < 1e-10);
        assert!(norms.l <= 1.0 + 1e-12 && norms.t <= 1.0);
        let one = operator_norms(&es[3..4]).unwrap();
        assert_eq!(one.t, es[3].t.norm());
        assert!(matches!(operator_norms(&[]), Err(Error::Empty(_))));
    }
}
