//! Position-space two-point kernels of the massless scalar field and the
//! O(sigma^2) disorder-averaged correction kernels.
//!
//! All kernels are functions of a [`SpacetimeInterval`] (dt, radius) in
//! natural units. Distribution-valued kernels are represented either in a
//! regulated i-epsilon form (plain complex value at finite epsilon) or in a
//! split form ([`KernelValue`]): a smooth/principal-value part plus explicit
//! light-cone delta terms that callers resolve analytically.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// Time and spatial separation between two events, dt = t - t', radius = |x - x'|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeInterval {
    pub dt: f64,
    pub radius: f64,
}

impl SpacetimeInterval {
    pub fn new(dt: f64, radius: f64) -> Result<Self> {
        if !dt.is_finite() || !radius.is_finite() {
            return Err(Error::NonFinite("SpacetimeInterval"));
        }
        if radius < 0.0 {
            return Err(Error::InvalidParam(format!("radius must be >= 0, got {radius}")));
        }
        Ok(Self { dt, radius })
    }

    /// True when dt^2 < radius^2.
    pub fn is_spacelike(&self) -> bool {
        self.dt.abs() < self.radius
    }
}

/// The i-epsilon prescription scale and the schedule used to extrapolate
/// distributional limits to epsilon -> 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub eps: f64,
    /// Strictly decreasing, all positive.
    pub schedule: Vec<f64>,
    pub extrapolation_order: usize,
}

impl Regularization {
    pub fn new(eps: f64, schedule: Vec<f64>, extrapolation_order: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParam(format!("eps must be > 0, got {eps}")));
        }
        for w in schedule.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::BadSchedule(
                    "schedule must be strictly decreasing".into(),
                ));
            }
        }
        if schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::BadSchedule("schedule entries must be positive".into()));
        }
        Ok(Self { eps, schedule, extrapolation_order })
    }

    /// Geometric schedule eps0, eps0/2, ..., with `levels` entries.
    pub fn geometric(eps0: f64, levels: usize) -> Result<Self> {
        let schedule: Vec<f64> = (0..levels).map(|k| eps0 / 2f64.powi(k as i32)).collect();
        Self::new(eps0, schedule, levels.saturating_sub(1))
    }

    /// Rescale all epsilon values (used when switching to omega0-scaled units).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            eps: self.eps * factor,
            schedule: self.schedule.iter().map(|e| e * factor).collect(),
            extrapolation_order: self.extrapolation_order,
        }
    }
}

impl Default for Regularization {
    fn default() -> Self {
        Self::geometric(1e-2, 6).unwrap()
    }
}

/// A Dirac delta supported at `location` (a dt value) with complex `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaTerm {
    pub location: f64,
    pub weight: Complex64,
}

/// A distribution-valued kernel sample: smooth part plus light-cone deltas,
/// sorted by location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub smooth: Complex64,
    pub deltas: Vec<DeltaTerm>,
}

/// Intensity of the static Gaussian light-cone noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    pub sigma2: f64,
}

impl DisorderModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::InvalidParam(format!("sigma2 must be >= 0, got {sigma2}")));
        }
        Ok(Self { sigma2 })
    }
}

/// A kernel value together with a near-light-cone flag; when the flag is set
/// the caller should inflate its error estimate instead of aborting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub value: Complex64,
    pub near_light_cone: bool,
}

/// Free Feynman propagator in the uniform i-epsilon form
/// i / (4 pi^2 (dt^2 - r^2 - i eps)).
pub fn feynman_free_ieps(iv: SpacetimeInterval, reg: &Regularization) -> Complex64 {
    let d = Complex64::new(iv.dt * iv.dt - iv.radius * iv.radius, -reg.eps);
    Complex64::i() / (FOUR_PI_SQ * d)
}

/// Free Feynman propagator in split form: principal-value part
/// (i/4pi^2) PV 1/(dt^2 - r^2) plus the two light-cone delta terms, each with
/// weight -1/(8 pi r), at dt = +-r.
///
/// The delta bookkeeping: the propagator carries
/// -(1/8 pi r) sgn(dt) [delta(r - dt) - delta(r + dt)]; the first delta fires
/// at dt = +r where sgn = +1, the second at dt = -r where sgn = -1 and the
/// explicit minus sign flips back, so both terms carry the same weight.
pub fn feynman_free_split(iv: SpacetimeInterval) -> Result<KernelValue> {
    if iv.radius <= 0.0 {
        return Err(Error::Domain("feynman_free_split requires radius > 0".into()));
    }
    if iv.dt.abs() == iv.radius {
        return Err(Error::OnLightCone(iv.radius));
    }
    let smooth = Complex64::i() / (FOUR_PI_SQ * (iv.dt * iv.dt - iv.radius * iv.radius));
    let w = Complex64::new(-1.0 / (8.0 * PI * iv.radius), 0.0);
    Ok(KernelValue {
        smooth,
        deltas: vec![
            DeltaTerm { location: -iv.radius, weight: w },
            DeltaTerm { location: iv.radius, weight: w },
        ],
    })
}

/// Free positive-frequency Wightman function
/// -1 / (4 pi^2 [(dt - i eps)^2 - r^2]).
pub fn wightman_free(iv: SpacetimeInterval, reg: &Regularization) -> Complex64 {
    let dt = Complex64::new(iv.dt, -reg.eps);
    -1.0 / (FOUR_PI_SQ * (dt * dt - iv.radius * iv.radius))
}

/// Epsilon -> 0 limit of the Wightman function off the light cone; real for
/// spacelike separation.
pub fn wightman_free_limit(iv: SpacetimeInterval) -> Result<Complex64> {
    if iv.dt.abs() == iv.radius {
        return Err(Error::OnLightCone(iv.radius));
    }
    Ok(Complex64::new(
        -1.0 / (FOUR_PI_SQ * (iv.dt * iv.dt - iv.radius * iv.radius)),
        0.0,
    ))
}

/// Numerator polynomial of the disorder kernel after the numerator epsilon is
/// taken to zero.
///
/// Starting from F(dt, r) = dt [5 a^4 + 10 a^2 r^2 + r^4] - 4 a [a^4 - r^4]
/// with a = dt - i eps, setting a -> dt collects to
///
/// ```text
/// F(dt, r) = dt^5 + 10 dt^3 r^2 + 5 dt r^4 = [(dt + r)^5 + (dt - r)^5] / 2,
/// ```
///
/// an odd polynomial in dt. The second form makes the light-cone pole
/// structure of the full kernel explicit: F / (dt^2 - r^2)^5 =
/// [(dt - r)^-5 + (dt + r)^-5] / 2.
pub fn disorder_f(iv: SpacetimeInterval) -> f64 {
    let (t, r) = (iv.dt, iv.radius);
    let (t2, r2) = (t * t, r * r);
    t * (t2 * t2 + 10.0 * t2 * r2 + 5.0 * r2 * r2)
}

/// Disorder kernel
/// I(dt, r) = (6 i sigma^2/(2 pi)^3) [F(dt,r) theta(dt)/((dt - i eps)^2 - r^2)^5
///            + F(-dt,r) theta(-dt)/((dt + i eps)^2 - r^2)^5],
/// with theta(0) = 1/2. Even in dt; linear in sigma^2; purely imaginary for
/// spacelike separation as eps -> 0.
pub fn disorder_i(iv: SpacetimeInterval, reg: &Regularization, dm: &DisorderModel) -> KernelSample {
    let near = (iv.dt.abs() - iv.radius).abs() < reg.eps;
    let c = Complex64::new(0.0, 6.0 * dm.sigma2 / (2.0 * PI).powi(3));
    let r2 = iv.radius * iv.radius;
    let branch = |t: f64, eps_sign: f64| -> Complex64 {
        let a = Complex64::new(t, eps_sign * reg.eps);
        let f = disorder_f(SpacetimeInterval { dt: t, radius: iv.radius });
        let den = (a * a - r2).powu(5);
        f / den
    };
    let value = if iv.dt > 0.0 {
        c * branch(iv.dt, -1.0)
    } else if iv.dt < 0.0 {
        // theta(-dt) branch: F(-dt, r) / ((dt + i eps)^2 - r^2)^5
        let a = Complex64::new(iv.dt, reg.eps);
        let f = disorder_f(SpacetimeInterval { dt: -iv.dt, radius: iv.radius });
        c * (f / (a * a - r2).powu(5))
    } else {
        // theta(0) = 1/2 on both branches; F(0, r) = 0 so this is exactly zero
        0.5 * (c * branch(0.0, -1.0) + c * branch(0.0, 1.0))
    };
    KernelSample { value, near_light_cone: near }
}

/// Epsilon -> 0 limit of the disorder kernel off the light cone:
/// (3 i sigma^2/(2 pi)^3) [ (|dt| - r)^-5 + (|dt| + r)^-5 ].
pub fn disorder_i_limit(iv: SpacetimeInterval, dm: &DisorderModel) -> Result<Complex64> {
    let a = iv.dt.abs();
    if a == iv.radius {
        return Err(Error::OnLightCone(iv.radius));
    }
    let b = (a - iv.radius).powi(-5) + (a + iv.radius).powi(-5);
    Ok(Complex64::new(0.0, 3.0 * dm.sigma2 / (2.0 * PI).powi(3) * b))
}

/// Positive-time restriction I(dt, r)|_{dt > 0}: zero for dt < 0, half-value
/// at dt = 0 (where I vanishes anyway).
pub fn disorder_i_plus(
    iv: SpacetimeInterval,
    reg: &Regularization,
    dm: &DisorderModel,
) -> KernelSample {
    if iv.dt < 0.0 {
        KernelSample { value: Complex64::new(0.0, 0.0), near_light_cone: false }
    } else if iv.dt > 0.0 {
        disorder_i(iv, reg, dm)
    } else {
        let s = disorder_i(iv, reg, dm);
        KernelSample { value: 0.5 * s.value, near_light_cone: s.near_light_cone }
    }
}

/// Epsilon -> 0 limit of I^+ off the light cone.
pub fn disorder_i_plus_limit(iv: SpacetimeInterval, dm: &DisorderModel) -> Result<Complex64> {
    if iv.dt < 0.0 {
        Ok(Complex64::new(0.0, 0.0))
    } else if iv.dt > 0.0 {
        disorder_i_limit(iv, dm)
    } else {
        Ok(Complex64::new(0.0, 0.0))
    }
}
