//! Closed-form precursor and wave-zone expressions used as analytic targets
//! for the quadrature engine, plus the crossover-scale estimate.

use crate::error::{Error, Result};
use crate::specfun::{cos_integral, sin_integral};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Parameter bundle for the wave-zone formulas; validity of the asymptotic
/// regime (omega0 * r >> 1) is the caller's concern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveZoneInput {
    pub omega0: f64,
    pub sigma2: f64,
    pub dtau: f64,
    pub r: f64,
}

impl WaveZoneInput {
    pub fn new(omega0: f64, sigma2: f64, dtau: f64, r: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !(dtau > 0.0) || !(r > 0.0) || sigma2 < 0.0 {
            return Err(Error::InvalidParam(
                "WaveZoneInput requires omega0, dtau, r > 0 and sigma2 >= 0".into(),
            ));
        }
        Ok(Self { omega0, sigma2, dtau, r })
    }
}

/// Closed form of the precursor (dtau < r) free amplitude
///
/// ```text
/// A = (i/4pi^2) \int_{-X}^{X} (X - |xi|) e^{-i w xi} / (xi^2 - r^2) dxi,   X = dtau.
/// ```
///
/// Derivation: the kernel is even in xi, so only the cosine survives:
/// A = (i/2pi^2) \int_0^X (X - xi) cos(w xi) / (xi^2 - r^2) dxi. Partial
/// fractions 1/(xi^2 - r^2) = (1/2r)[1/(xi - r) - 1/(xi + r)] give
/// A = (i/(4 pi^2 r)) [J(-r) - J(r)] with
///
/// ```text
/// J(c) = \int_0^X (X - xi) cos(w xi) / (xi + c) dxi
///      = (X + c) K(c) - sin(w X)/w,
/// K(c) = cos(w c) [Ci(w|X + c|) - Ci(w|c|)]
///      + sin(w c) [Si(w (X + c)) - Si(w c)],
/// ```
///
/// where the identity X - xi = (X + c) - (xi + c) removes the numerator and
/// the remaining 1/(xi + c) integrals are Si/Ci after shifting the phase,
/// cos(w xi) = cos(w(xi + c)) cos(w c) + sin(w(xi + c)) sin(w c). The
/// absolute value inside Ci and the oddness of Si make K valid on both the
/// c = +r branch and the c = -r branch (where xi + c stays negative, since
/// X < r keeps the pole outside the window). Purely imaginary, as expected
/// for a spacelike-window time-ordered amplitude.
pub fn precursor_closed_form_a(omega0: f64, r: f64, dtau: f64) -> Result<Complex64> {
    if !(omega0 > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidParam("precursor_closed_form_a requires omega0, r > 0".into()));
    }
    if !(dtau > 0.0) || dtau >= r {
        return Err(Error::Domain(format!(
            "precursor closed form requires 0 < dtau < r, got dtau={dtau}, r={r}"
        )));
    }
    let w = omega0;
    let x = dtau;
    let j = |c: f64| -> Result<f64> {
        let k = (w * c).cos() * (cos_integral((w * (x + c)).abs())? - cos_integral((w * c).abs())?)
            + (w * c).sin() * (sin_integral(w * (x + c))? - sin_integral(w * c)?);
        Ok((x + c) * k - (w * x).sin() / w)
    };
    let re0 = (j(-r)? - j(r)?) / (4.0 * PI * PI * r);
    Ok(Complex64::new(0.0, re0))
}

/// Wave-zone limit of the disorder-kernel weighted integral:
/// -i pi sigma^2 omega0^3 sin(omega0 dtau) / (2 pi)^4. Independent of r.
pub fn wave_zone_disorder(omega0: f64, sigma2: f64, dtau: f64) -> Complex64 {
    Complex64::new(
        0.0,
        -PI * sigma2 * omega0.powi(3) * (omega0 * dtau).sin() / (2.0 * PI).powi(4),
    )
}

/// Crossover separation below which disorder precursors dominate free ones:
/// r0 = sigma^2 omega0^2.
pub fn crossover_r0(sigma2: f64, omega0: f64) -> Result<f64> {
    if sigma2 < 0.0 || omega0 < 0.0 {
        return Err(Error::InvalidParam("crossover_r0 requires nonnegative inputs".into()));
    }
    Ok(sigma2 * omega0 * omega0)
}

/// Least-squares slope of ln(y) versus ln(x); all points must have x, y > 0.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParam("log_log_slope needs at least 2 points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(Error::Domain("log_log_slope requires positive coordinates".into()));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::feynman_free_split;
    use crate::greens::SpacetimeInterval;
    use crate::quadrature::{weighted_xi_integral, QuadratureSpec, XiIntegrand};
    use approx::assert_abs_diff_eq;

    #[test]
    fn precursor_matches_quadrature() {
        // spot check against the adaptive engine on a 3x3 grid
        let spec = QuadratureSpec::default();
        for &r in &[2.0, 5.0, 20.0] {
            for &frac in &[0.2, 0.5, 0.9] {
                let dtau = frac * r;
                let smooth = move |xi: f64| {
                    feynman_free_split(SpacetimeInterval { dt: xi, radius: r })
                        .unwrap()
                        .smooth
                };
                let k = XiIntegrand::smooth_only(&smooth);
                let quad = weighted_xi_integral(&k, 1.0, dtau, &spec).unwrap();
                let cf = precursor_closed_form_a(1.0, r, dtau).unwrap();
                assert_abs_diff_eq!(
                    (quad.value - cf).norm() / cf.norm(),
                    0.0,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn precursor_vanishes_with_window() {
        let a = precursor_closed_form_a(1.0, 5.0, 1e-6).unwrap();
        assert!(a.norm() < 1e-8);
    }

    #[test]
    fn precursor_inverse_square_scaling() {
        // (w r)^2 |A| stays bounded over two decades of w r; the residual
        // variation is the trig-factor oscillation, not growth
        let vals: Vec<f64> = [10.0, 30.0, 100.0, 300.0, 1000.0]
            .iter()
            .map(|&r| {
                let a = precursor_closed_form_a(1.0, r, 0.5 * r).unwrap();
                r * r * a.norm()
            })
            .collect();
        for v in &vals {
            assert!(*v > 0.0 && *v < 1.0, "scaled values {vals:?}");
        }
    }

    #[test]
    fn precursor_domain_errors() {
        assert!(precursor_closed_form_a(1.0, 2.0, 2.0).is_err());
        assert!(precursor_closed_form_a(1.0, 2.0, 3.0).is_err());
        assert!(precursor_closed_form_a(0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn wave_zone_reference_value() {
        // omega0 = 1, sigma2 = 1, dtau = pi/2 -> -i pi / (2 pi)^4
        let v = wave_zone_disorder(1.0, 1.0, std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(v.im, -2.0157e-3, epsilon = 1e-6);
        // odd in dtau; zero at dtau = 0
        let p = wave_zone_disorder(1.0, 1.0, 0.7);
        let m = wave_zone_disorder(1.0, 1.0, -0.7);
        assert_eq!(p, -m);
        assert_eq!(wave_zone_disorder(1.0, 1.0, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn crossover_formula() {
        assert_abs_diff_eq!(crossover_r0(0.01, 10.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(crossover_r0(0.0, 5.0).unwrap(), 0.0);
        assert!(crossover_r0(-1.0, 1.0).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powf(-2.5)))
            .collect();
        assert_abs_diff_eq!(log_log_slope(&pts).unwrap(), -2.5, epsilon = 1e-12);
        assert!(log_log_slope(&pts[..1]).is_err());
        assert!(log_log_slope(&[(1.0, 1.0), (-2.0, 3.0)]).is_err());
    }

    #[test]
    fn wave_zone_input_validation() {
        assert!(WaveZoneInput::new(1.0, 1.0, 1.0, 100.0).is_ok());
        assert!(WaveZoneInput::new(0.0, 1.0, 1.0, 100.0).is_err());
        assert!(WaveZoneInput::new(1.0, -1.0, 1.0, 100.0).is_err());
    }
}
