//! Ordinary least-squares lines and phase continuation.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub max_residual: f64,
}

/// Fits `y ≈ intercept + slope·x`. Needs at least two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    let mut mr: f64 = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - intercept - slope * x;
        ss += r * r;
        mr = mr.max(r.abs());
    }
    LineFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
        max_residual: mr,
    }
}

/// Nearest-branch continuation of a sequence of principal arguments.
/// Returns the continued phases and the largest raw jump that was resolved.
pub fn unwrap_phases(raw: &[f64]) -> (Vec<f64>, f64) {
    let mut out: Vec<f64> = Vec::with_capacity(raw.len());
    let mut worst: f64 = 0.0;
    let mut offset: f64 = 0.0;
    for (i, &p) in raw.iter().enumerate() {
        if i > 0 {
            let mut d = p + offset - out[i - 1];
            while d > PI {
                offset -= 2.0 * PI;
                d -= 2.0 * PI;
            }
            while d < -PI {
                offset += 2.0 * PI;
                d += 2.0 * PI;
            }
            worst = worst.max(d.abs());
        }
        out.push(p + offset);
    }
    (out, worst)
}
