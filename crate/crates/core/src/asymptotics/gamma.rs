//! Complex Gamma function by the Lanczos approximation (g = 7, nine terms).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole(w: Complex64) -> bool {
    w.im == 0.0 && w.re <= 0.0 && w.re.fract() == 0.0
}

/// `ln Γ(w)`; the imaginary part is not reduced modulo `2π`.
pub fn ln_gamma(w: Complex64) -> Result<Complex64> {
    if is_pole(w) {
        return Err(Error::GammaPole { re: w.re, im: w.im });
    }
    if w.re < 0.5 {
        // Γ(w) Γ(1 − w) = π / sin(πw).
        let s = (w * PI).sin();
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - w)?);
    }
    let w = w - 1.0;
    let mut series = Complex64::new(COEF[0], 0.0);
    for (k, c) in COEF.iter().enumerate().skip(1) {
        series += *c / (w + k as f64);
    }
    let t = w + G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (w + 0.5) * t.ln() - t + series.ln())
}

pub fn complex_gamma(w: Complex64) -> Result<Complex64> {
    ln_gamma(w).map(|l| l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn special_values() {
        assert!((complex_gamma(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((complex_gamma(c(0.5, 0.0)).unwrap() - PI.sqrt()).norm() < 1e-14);
        let g = complex_gamma(c(0.5, 1.0)).unwrap();
        assert!((g.norm_sqr() - PI / PI.cosh()).abs() < 1e-14);
        assert!((g.norm_sqr() - 0.271_014_951_399_418_35).abs() < 1e-14);
    }

    #[test]
    fn high_precision_references() {
        let cases = [
            (c(0.3, 0.7), c(0.309_686_256_743_749_16, -0.856_787_752_939_270_6)),
            (c(2.5, -3.1), c(-0.204_373_967_079_460_7, -0.039_242_124_139_712_48)),
            (c(-4.2, 1.3), c(0.003_821_287_008_268_731_2, -0.000_652_336_972_691_202_9)),
            (c(0.5, 20.0), c(-3.430_784_159_145_482e-14, 4.542_880_357_463_343_4e-14)),
            (c(9.5, -15.0), c(8.079_710_419_690_535, 4.380_345_066_974_301)),
            (c(-7.3, -0.4), c(3.676_646_084_142_584e-5, -1.857_626_381_618_752_7e-4)),
        ];
        for (w, want) in cases {
            let got = complex_gamma(w).unwrap();
            assert!((got - want).norm() <= 1e-12 * want.norm(), "Γ({w}) = {got}, want {want}");
        }
    }

    #[test]
    fn poles_are_rejected() {
        for k in [0.0, -1.0, -7.0] {
            assert!(matches!(complex_gamma(c(k, 0.0)), Err(Error::GammaPole { .. })));
        }
    }

    proptest! {
        #[test]
        fn recurrence(re in -9.5f64..9.5, im in -20.0f64..20.0) {
            let w = c(re, im);
            prop_assume!((w - w.re.round()).norm() > 1e-3 || w.re > 0.5);
            let lhs = complex_gamma(w + 1.0).unwrap();
            let rhs = w * complex_gamma(w).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
        }

        #[test]
        fn reflection(re in -5.0f64..5.0, im in -10.0f64..10.0) {
            let w = c(re, im);
            prop_assume!(im.abs() > 1e-3);
            let lhs = complex_gamma(w).unwrap() * complex_gamma(1.0 - w).unwrap();
            let rhs = PI / (w * PI).sin();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        }
    }
}
