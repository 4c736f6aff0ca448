//! Assembly of the three measurement scenarios' transition probabilities,
//! free and disorder-averaged to O(sigma^2), with per-term breakdowns and
//! causality diagnostics.
//!
//! Scenario 1 (`PhiF`) specifies the field and both atoms in the final state;
//! scenario 2 (`PsiF`) specifies only the atoms; scenario 3 (`BigPhiF`)
//! specifies only atom 2. Each scenario's breakdown nests the previous one's
//! terms bit-identically.
//!
//! All integrals are evaluated internally in omega0-scaled units
//! (x = omega0 t, y = omega0 r, s = sigma^2 omega0^3); the transition
//! probabilities are dimensionless and invariant under this rescaling, so no
//! conversion back is needed.

use crate::asymptotics::{log_log_slope, precursor_closed_form_a};
use crate::error::{Error, Result};
use crate::greens::{
    disorder_i, disorder_i_limit, disorder_i_plus, disorder_i_plus_limit, wightman_free,
    wightman_free_limit, DisorderModel, Regularization, SpacetimeInterval,
};
use crate::quadrature::{
    ordered_integral_4d, phase_sum_integral, weighted_xi_integral, IntegralResult,
    OrderingConstraint, QuadratureSpec, XiIntegrand,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Physical inputs: atomic gap omega0, qubit separation r, coupling lambda,
/// observation window [tau0, tau], disorder intensity sigma2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega0: f64,
    pub r: f64,
    pub lambda: f64,
    pub tau0: f64,
    pub tau: f64,
    pub sigma2: f64,
}

impl SystemParams {
    pub fn new(omega0: f64, r: f64, lambda: f64, tau0: f64, tau: f64, sigma2: f64) -> Result<Self> {
        let p = Self { omega0, r, lambda, tau0, tau, sigma2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega0, self.r, self.lambda, self.tau0, self.tau, self.sigma2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SystemParams"));
        }
        if !(self.omega0 > 0.0) {
            return Err(Error::InvalidParam(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidParam(format!("r must be > 0, got {}", self.r)));
        }
        if !(self.tau > self.tau0) {
            return Err(Error::InvalidParam(format!(
                "need tau > tau0, got tau={}, tau0={}",
                self.tau, self.tau0
            )));
        }
        if self.sigma2 < 0.0 {
            return Err(Error::InvalidParam(format!("sigma2 must be >= 0, got {}", self.sigma2)));
        }
        Ok(())
    }

    /// Observation interval tau - tau0.
    pub fn dtau(&self) -> f64 {
        self.tau - self.tau0
    }

    fn scaled(&self) -> Scaled {
        Scaled {
            y: self.omega0 * self.r,
            x0: self.omega0 * self.dtau(),
            t0: self.omega0 * self.tau0,
            t1: self.omega0 * self.tau,
            s: self.sigma2 * self.omega0.powi(3),
        }
    }

    fn prefactor(&self) -> f64 {
        self.lambda.powi(4) / 16.0
    }
}

/// Dimensionless (omega0-scaled) copy of the parameters.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    y: f64,
    x0: f64,
    t0: f64,
    t1: f64,
    s: f64,
}

/// The three measurement configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Field and both atoms specified.
    PhiF,
    /// Both atoms specified, field summed over.
    PsiF,
    /// Only atom 2 specified (inclusive measurement).
    BigPhiF,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scenario::PhiF => "phi_f",
            Scenario::PsiF => "psi_f",
            Scenario::BigPhiF => "big_phi_f",
        };
        f.write_str(s)
    }
}

/// Causal regime of the observation window relative to the light cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// dtau < r: the window closes before light can connect the qubits.
    Precursor,
    /// dtau within one part in 1e9 of r.
    LightCone,
    /// dtau > r.
    Timelike,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Precursor => "precursor",
            Regime::LightCone => "lightcone",
            Regime::Timelike => "timelike",
        };
        f.write_str(s)
    }
}

fn classify(x0: f64, y: f64) -> Regime {
    if (x0 - y).abs() <= 1e-9 * y {
        Regime::LightCone
    } else if x0 < y {
        Regime::Precursor
    } else {
        Regime::Timelike
    }
}

/// omega0 r threshold beyond which wave-zone asymptotics are trusted.
pub const WAVE_ZONE_THRESHOLD: f64 = 50.0;

/// One labeled contribution. Entries with `in_total` set sum to the
/// probability total; the rest are diagnostics (sub-amplitudes, excluded
/// r-independent pieces, residuals).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub label: String,
    pub value: Complex64,
    pub err_est: f64,
    pub in_total: bool,
}

/// Ordered collection of labeled terms; label order is fixed by construction
/// so output is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermBreakdown {
    pub entries: Vec<TermEntry>,
}

impl TermBreakdown {
    pub fn push(&mut self, label: &str, value: Complex64, err_est: f64, in_total: bool) {
        self.entries.push(TermEntry { label: label.to_string(), value, err_est, in_total });
    }

    pub fn get(&self, label: &str) -> Option<&TermEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    /// Sum of the in-total entries.
    pub fn total(&self) -> Complex64 {
        self.entries
            .iter()
            .filter(|e| e.in_total)
            .map(|e| e.value)
            .sum()
    }

    /// Accumulated error estimate of the in-total entries.
    pub fn err_total(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.in_total)
            .map(|e| e.err_est)
            .sum()
    }
}

/// A scenario evaluation: parameters, term breakdown, the r-dependent
/// probability (real part of the in-total sum), and regime metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub params: SystemParams,
    pub scenario: Scenario,
    pub breakdown: TermBreakdown,
    pub probability_r_dependent: f64,
    pub regime: Regime,
    /// omega0 r >= the wave-zone threshold.
    pub wave_zone: bool,
    /// Set when distribution-valued kernels were evaluated at finite epsilon
    /// (dtau >= r) rather than in the extrapolated limit; values are then
    /// regulated, not certified.
    pub regulated: bool,
    /// False when any constituent integral failed to meet its tolerance; the
    /// values are then best estimates.
    pub converged: bool,
}

impl ScenarioResult {
    fn assemble(
        params: &SystemParams,
        scenario: Scenario,
        mut breakdown: TermBreakdown,
        regulated: bool,
        converged: bool,
    ) -> Self {
        let sc = params.scaled();
        let total = breakdown.total();
        let err = breakdown.err_total();
        breakdown.push("total_im", Complex64::new(0.0, total.im), err, false);
        Self {
            params: *params,
            scenario,
            breakdown,
            probability_r_dependent: total.re,
            regime: classify(sc.x0, sc.y),
            wave_zone: sc.y >= WAVE_ZONE_THRESHOLD,
            regulated,
            converged,
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario 1: field and atoms specified
// ---------------------------------------------------------------------------

/// The free amplitude
/// A = \int_{-dtau}^{dtau} (dtau - |xi|) e^{-i omega0 xi} G0(xi, r) dxi,
/// split into its principal-value part and its light-cone delta part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeParts {
    pub pv: Complex64,
    pub pv_err: f64,
    /// Analytic sifting of the two light-cone deltas:
    /// -(dtau - r) cos(omega0 r)/(4 pi r) for dtau > r, zero otherwise.
    pub delta: Complex64,
    pub converged: bool,
}

impl AmplitudeParts {
    pub fn total(&self) -> Complex64 {
        self.pv + self.delta
    }
}

pub fn amplitude_free_a(params: &SystemParams, qspec: &QuadratureSpec) -> Result<AmplitudeParts> {
    params.validate()?;
    let sc = params.scaled();
    let y = sc.y;
    let smooth =
        move |xi: f64| Complex64::i() / (4.0 * PI * PI * (xi * xi - y * y));
    let poles = [-y, y];
    let kernel = XiIntegrand { smooth: &smooth, pv_poles: &poles, deltas: &[] };
    let pv = weighted_xi_integral(&kernel, 1.0, sc.x0, qspec)?;

    // sifted deltas at xi = +-y, weight -1/(8 pi y) each
    let delta = if sc.x0 > y {
        let w = -1.0 / (8.0 * PI * y);
        let window = sc.x0 - y;
        let phase = Complex64::from_polar(1.0, -y) + Complex64::from_polar(1.0, y);
        w * window * phase
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(AmplitudeParts { pv: pv.value, pv_err: pv.err_est, delta, converged: pv.converged })
}

/// Free scenario-1 probability (lambda^4/16) |A|^2.
pub fn scenario1_free(params: &SystemParams, qspec: &QuadratureSpec) -> Result<ScenarioResult> {
    let mut b = TermBreakdown::default();
    let a = scenario1_terms(params, qspec, &mut b)?;
    Ok(ScenarioResult::assemble(params, Scenario::PhiF, b, false, a.converged))
}

fn scenario1_terms(
    params: &SystemParams,
    qspec: &QuadratureSpec,
    b: &mut TermBreakdown,
) -> Result<AmplitudeParts> {
    let a = amplitude_free_a(params, qspec)?;
    let pre = params.prefactor();
    let total = a.total();
    let err = pre * (2.0 * total.norm() * a.pv_err + a.pv_err * a.pv_err);
    b.push("free_pv_part", a.pv, a.pv_err, false);
    b.push("free_delta_part", a.delta, 0.0, false);
    b.push("free_amplitude_sq", Complex64::new(pre * total.norm_sqr(), 0.0), err, true);
    Ok(a)
}

/// Disorder-averaged scenario-1 probability to O(sigma^2):
/// (lambda^4/16)(|A|^2 + 2 Re[conj(A) * script_I]), with
/// script_I the triangular-window integral of the disorder kernel I.
pub fn scenario1_disorder(
    params: &SystemParams,
    reg: &Regularization,
    qspec: &QuadratureSpec,
) -> Result<ScenarioResult> {
    let mut b = TermBreakdown::default();
    let a = scenario1_terms(params, qspec, &mut b)?;
    let sc = params.scaled();
    let regulated = sc.x0 >= sc.y;
    let reg_s = reg.scaled(params.omega0);
    let script_i = weighted_disorder_integral(&sc, &reg_s, regulated, qspec)?;
    let pre = params.prefactor();
    let cross = 2.0 * (a.total().conj() * script_i.value).re;
    let cross_err =
        pre * 2.0 * (a.total().norm() * script_i.err_est + script_i.value.norm() * a.pv_err);
    b.push("disorder_I_weighted", script_i.value, script_i.err_est, false);
    b.push("disorder_cross_G0_I", Complex64::new(pre * cross, 0.0), cross_err, true);
    let converged = a.converged && script_i.converged;
    Ok(ScenarioResult::assemble(params, Scenario::PhiF, b, regulated, converged))
}

/// script_I in scaled units: the triangular-window integral of I. Uses the
/// extrapolated (eps -> 0) kernel in the precursor regime and the regulated
/// finite-eps kernel otherwise.
fn weighted_disorder_integral(
    sc: &Scaled,
    reg_s: &Regularization,
    regulated: bool,
    qspec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let dm = DisorderModel { sigma2: sc.s };
    let y = sc.y;
    if !regulated {
        let smooth = move |xi: f64| {
            disorder_i_limit(SpacetimeInterval { dt: xi, radius: y }, &dm).unwrap()
        };
        let kernel = XiIntegrand::smooth_only(&smooth);
        weighted_xi_integral(&kernel, 1.0, sc.x0, qspec)
    } else {
        let reg_s = reg_s.clone();
        let smooth = move |xi: f64| {
            disorder_i(SpacetimeInterval { dt: xi, radius: y }, &reg_s, &dm).value
        };
        let kernel = XiIntegrand::smooth_only(&smooth);
        weighted_xi_integral(&kernel, 1.0, sc.x0, qspec)
    }
}

// ---------------------------------------------------------------------------
// Scenario 2: atoms specified, field summed over
// ---------------------------------------------------------------------------

/// The Wightman double integrals B_{+-} =
/// \int\int du dv e^{+- i omega0 (u+v)} K(u-v) over the observation square.
fn wightman_b_factors(
    sc: &Scaled,
    radius: f64,
    eps: Option<f64>,
    qspec: &QuadratureSpec,
) -> Result<(IntegralResult, IntegralResult)> {
    let kernel: Box<dyn Fn(f64) -> Complex64> = match eps {
        None => Box::new(move |xi: f64| {
            wightman_free_limit(SpacetimeInterval { dt: xi, radius }).unwrap()
        }),
        Some(e) => {
            let r = Regularization { eps: e, schedule: vec![e], extrapolation_order: 1 };
            Box::new(move |xi: f64| {
                wightman_free(SpacetimeInterval { dt: xi, radius }, &r)
            })
        }
    };
    let minus = phase_sum_integral(&*kernel, 1.0, sc.t0, sc.t1, -1, qspec)?;
    let plus = phase_sum_integral(&*kernel, 1.0, sc.t0, sc.t1, 1, qspec)?;
    Ok((minus, plus))
}

fn i_plus_b_factors(
    sc: &Scaled,
    reg_s: &Regularization,
    regulated: bool,
    qspec: &QuadratureSpec,
) -> Result<(IntegralResult, IntegralResult)> {
    let dm = DisorderModel { sigma2: sc.s };
    let y = sc.y;
    let kernel: Box<dyn Fn(f64) -> Complex64> = if !regulated {
        Box::new(move |xi: f64| {
            disorder_i_plus_limit(SpacetimeInterval { dt: xi, radius: y }, &dm).unwrap()
        })
    } else {
        let reg_s = reg_s.clone();
        Box::new(move |xi: f64| {
            disorder_i_plus(SpacetimeInterval { dt: xi, radius: y }, &reg_s, &dm).value
        })
    };
    let minus = phase_sum_integral(&*kernel, 1.0, sc.t0, sc.t1, -1, qspec)?;
    let plus = phase_sum_integral(&*kernel, 1.0, sc.t0, sc.t1, 1, qspec)?;
    Ok((minus, plus))
}

/// Free scenario-2 probability: the scenario-1 term plus the r-dependent
/// Wightman pair B_- B_+, plus the r-independent pair (computed with a
/// regulated coincidence kernel and excluded from the total).
pub fn scenario2_free(params: &SystemParams, qspec: &QuadratureSpec) -> Result<ScenarioResult> {
    let reg = Regularization::default();
    let mut b = TermBreakdown::default();
    let (regulated, converged) = scenario2_terms(params, &reg, qspec, &mut b)?;
    Ok(ScenarioResult::assemble(params, Scenario::PsiF, b, regulated, converged))
}

/// Shared scenario-2 free terms; returns (regulated, converged).
fn scenario2_terms(
    params: &SystemParams,
    reg: &Regularization,
    qspec: &QuadratureSpec,
    b: &mut TermBreakdown,
) -> Result<(bool, bool)> {
    let a = scenario1_terms(params, qspec, b)?;
    let sc = params.scaled();
    let regulated = sc.x0 >= sc.y;
    let reg_s = reg.scaled(params.omega0);
    let pre = params.prefactor();

    let eps = if regulated { Some(reg_s.eps) } else { None };
    let (bm, bp) = wightman_b_factors(&sc, sc.y, eps, qspec)?;
    let pair = pre * bm.value * bp.value;
    let pair_err =
        pre * (bm.value.norm() * bp.err_est + bp.value.norm() * bm.err_est);
    b.push("wightman_pair_minus", bm.value, bm.err_est, false);
    b.push("wightman_pair_r", pair, pair_err, true);

    // r-independent pair: the coincidence-limit kernel is always regulated
    let (cm, cp) = wightman_b_factors(&sc, 0.0, Some(reg_s.eps), qspec)?;
    let rind = pre * cm.value * cp.value;
    b.push("r_independent", rind, pre * (cm.err_est * cp.value.norm() + cp.err_est * cm.value.norm()), false);
    let converged = a.converged && bm.converged && bp.converged;
    Ok((regulated, converged))
}

/// Disorder-averaged scenario-2 probability: adds the G0*I cross term of
/// scenario 1 and the Wightman/I+ cross pair
/// B_-[W] B_+[I+] + B_+[W] B_-[I+].
pub fn scenario2_disorder(
    params: &SystemParams,
    reg: &Regularization,
    qspec: &QuadratureSpec,
) -> Result<ScenarioResult> {
    let mut b = TermBreakdown::default();
    let (regulated, mut converged) = scenario2_terms(params, reg, qspec, &mut b)?;
    let sc = params.scaled();
    let reg_s = reg.scaled(params.omega0);
    let pre = params.prefactor();

    // scenario-1 disorder cross term
    let a_pv = b.get("free_pv_part").unwrap().clone();
    let a_delta = b.get("free_delta_part").unwrap().value;
    let a_total = a_pv.value + a_delta;
    let script_i = weighted_disorder_integral(&sc, &reg_s, regulated, qspec)?;
    let cross = 2.0 * (a_total.conj() * script_i.value).re;
    let cross_err = pre
        * 2.0
        * (a_total.norm() * script_i.err_est + script_i.value.norm() * a_pv.err_est);
    b.push("disorder_I_weighted", script_i.value, script_i.err_est, false);
    b.push("disorder_cross_G0_I", Complex64::new(pre * cross, 0.0), cross_err, true);

    // Wightman/I+ cross pair
    let eps = if regulated { Some(reg_s.eps) } else { None };
    let (wm, wp) = wightman_b_factors(&sc, sc.y, eps, qspec)?;
    let (im, ip) = i_plus_b_factors(&sc, &reg_s, regulated, qspec)?;
    let wi = pre * (wm.value * ip.value + wp.value * im.value);
    let wi_err = pre
        * (wm.value.norm() * ip.err_est
            + ip.value.norm() * wm.err_est
            + wp.value.norm() * im.err_est
            + im.value.norm() * wp.err_est);
    b.push("I_plus_double_integral", im.value, im.err_est, false);
    b.push("disorder_wightman_I_plus", wi, wi_err, true);
    converged &= script_i.converged
        && wm.converged
        && wp.converged
        && im.converged
        && ip.converged;
    Ok(ScenarioResult::assemble(params, Scenario::PsiF, b, regulated, converged))
}

// ---------------------------------------------------------------------------
// Scenario 3: only atom 2 specified (inclusive measurement)
// ---------------------------------------------------------------------------

/// The r-dependent theta groups of the inclusive correction: each group is a
/// kernel-argument pairing plus a list of theta-product constraints.
/// Variables are indexed tau_1..tau_4 as 0..3; a constraint (i, j) means
/// theta(tau_i - tau_j).
struct DeltaPGroup {
    label: &'static str,
    /// (first kernel args, second kernel args): kernel evaluated at
    /// tau_a - tau_b for each pair (a, b).
    pairs: [(usize, usize); 2],
    theta_products: &'static [&'static [OrderingConstraint]],
}

const DELTA_P_GROUPS: [DeltaPGroup; 3] = [
    DeltaPGroup {
        label: "deltaP_T1",
        pairs: [(0, 1), (2, 3)],
        theta_products: &[&[(1, 3), (2, 3)], &[(0, 2), (3, 2)]],
    },
    DeltaPGroup {
        label: "deltaP_T2",
        pairs: [(0, 1), (3, 2)],
        theta_products: &[&[(1, 3), (3, 2)], &[(0, 2), (2, 3)]],
    },
    DeltaPGroup {
        label: "deltaP_T3",
        pairs: [(0, 3), (1, 2)],
        theta_products: &[
            &[(1, 3), (1, 2)],
            &[(2, 3), (1, 2)],
            &[(3, 1), (3, 0)],
            &[(0, 1), (3, 0)],
        ],
    },
];

/// Phase factor e^{i(tau3 - tau4)} e^{-i(tau1 - tau2)} in scaled units.
fn phase4(t: [f64; 4]) -> Complex64 {
    Complex64::from_polar(1.0, (t[2] - t[3]) - (t[0] - t[1]))
}

/// Evaluates one theta group's quadruple integral for a given two-argument
/// kernel product; `product` receives the two kernel arguments
/// (tau_a - tau_b) of the pairing.
fn delta_p_group_integral(
    group: &DeltaPGroup,
    product: &dyn Fn(f64, f64) -> Complex64,
    sc: &Scaled,
    qspec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evals = 0u64;
    let mut converged = true;
    for constraints in group.theta_products {
        let integrand = |t1: f64, t2: f64, t3: f64, t4: f64| {
            let t = [t1, t2, t3, t4];
            let a = t[group.pairs[0].0] - t[group.pairs[0].1];
            let b = t[group.pairs[1].0] - t[group.pairs[1].1];
            phase4(t) * product(a, b)
        };
        let r = ordered_integral_4d(&integrand, constraints, sc.t0, sc.t1, qspec)?;
        value += r.value;
        err += r.err_est;
        evals += r.evaluations;
        converged &= r.converged;
    }
    Ok(IntegralResult { value, err_est: err, evaluations: evals, converged })
}

fn wightman_pointwise(
    y: f64,
    eps: Option<f64>,
) -> Box<dyn Fn(f64) -> Complex64> {
    match eps {
        None => Box::new(move |dt: f64| {
            wightman_free_limit(SpacetimeInterval { dt, radius: y }).unwrap()
        }),
        Some(e) => {
            let r = Regularization { eps: e, schedule: vec![e], extrapolation_order: 1 };
            Box::new(move |dt: f64| wightman_free(SpacetimeInterval { dt, radius: y }, &r))
        }
    }
}

fn i_plus_pointwise(
    y: f64,
    s: f64,
    reg_s: &Regularization,
    regulated: bool,
) -> Box<dyn Fn(f64) -> Complex64> {
    let dm = DisorderModel { sigma2: s };
    if !regulated {
        Box::new(move |dt: f64| {
            disorder_i_plus_limit(SpacetimeInterval { dt, radius: y }, &dm).unwrap()
        })
    } else {
        let reg_s = reg_s.clone();
        Box::new(move |dt: f64| {
            disorder_i_plus(SpacetimeInterval { dt, radius: y }, &reg_s, &dm).value
        })
    }
}

/// Free scenario-3 probability: scenario-2 terms plus the r-dependent
/// inclusive-correction groups (overall factor -lambda^4/16). The
/// r-independent groups and the order-lambda^2 self-term are out of scope of
/// the r-dependent total and are not computed here.
pub fn scenario3_free(params: &SystemParams, qspec: &QuadratureSpec) -> Result<ScenarioResult> {
    let reg = Regularization::default();
    let mut b = TermBreakdown::default();
    let (regulated, mut converged) = scenario2_terms(params, &reg, qspec, &mut b)?;
    converged &= scenario3_delta_p_free(params, &reg, qspec, &mut b, regulated)?;
    push_noncausal_residual(&mut b);
    Ok(ScenarioResult::assemble(params, Scenario::BigPhiF, b, regulated, converged))
}

fn scenario3_delta_p_free(
    params: &SystemParams,
    reg: &Regularization,
    qspec: &QuadratureSpec,
    b: &mut TermBreakdown,
    regulated: bool,
) -> Result<bool> {
    let sc = params.scaled();
    let reg_s = reg.scaled(params.omega0);
    let eps = if regulated { Some(reg_s.eps) } else { None };
    let w = wightman_pointwise(sc.y, eps);
    let pre = params.prefactor();
    let mut converged = true;
    for group in &DELTA_P_GROUPS {
        let product = |a: f64, bb: f64| w(a) * w(bb);
        let r = delta_p_group_integral(group, &product, &sc, qspec)?;
        b.push(group.label, -pre * r.value, pre * r.err_est, true);
        converged &= r.converged;
    }
    Ok(converged)
}

/// Disorder-averaged scenario-3 probability: scenario-2 disorder terms plus
/// the free inclusive groups plus their O(sigma^2) expansion, replacing each
/// Wightman pair W W by I+ W + W I+ symmetrically.
pub fn scenario3_disorder(
    params: &SystemParams,
    reg: &Regularization,
    qspec: &QuadratureSpec,
) -> Result<ScenarioResult> {
    let s2 = scenario2_disorder(params, reg, qspec)?;
    let mut b = s2.breakdown;
    // drop the scenario-2 total_im; reassembly appends the scenario-3 one
    b.entries.retain(|e| e.label != "total_im");
    let regulated = s2.regulated;
    let mut converged = s2.converged;
    converged &= scenario3_delta_p_free(params, reg, qspec, &mut b, regulated)?;

    let sc = params.scaled();
    let reg_s = reg.scaled(params.omega0);
    let eps = if regulated { Some(reg_s.eps) } else { None };
    let w = wightman_pointwise(sc.y, eps);
    let ip = i_plus_pointwise(sc.y, sc.s, &reg_s, regulated);
    let pre = params.prefactor();
    for group in &DELTA_P_GROUPS {
        let product = |a: f64, bb: f64| ip(a) * w(bb) + w(a) * ip(bb);
        let r = delta_p_group_integral(group, &product, &sc, qspec)?;
        b.push(
            &format!("{}_disorder", group.label),
            -pre * r.value,
            pre * r.err_est,
            true,
        );
        converged &= r.converged;
    }
    push_noncausal_residual(&mut b);
    Ok(ScenarioResult::assemble(params, Scenario::BigPhiF, b, regulated, converged))
}

/// The sum of all r-dependent in-total terms; vanishes for the free field in
/// the precursor regime.
fn push_noncausal_residual(b: &mut TermBreakdown) {
    let total = b.total();
    let err = b.err_total();
    b.push("noncausal_residual", total, err, false);
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

/// Quantitative causality diagnostics for a precursor-regime evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalityDiagnostics {
    /// The r-dependent probability inside the light cone.
    pub precursor_probability: f64,
    /// Ratio of the precursor probability to the free scenario-1 probability
    /// at the mirrored window dtau' = 2r - dtau.
    pub post_lightcone_ratio: f64,
    /// Log-log slope of the free precursor |A|^2 against omega0 r over
    /// {30, 100, 300} at a window clamped inside the precursor regime.
    pub suppression_exponent: f64,
}

pub fn causality_diagnostics(
    result: &ScenarioResult,
    qspec: &QuadratureSpec,
) -> Result<CausalityDiagnostics> {
    let p = &result.params;
    let sc = p.scaled();
    if sc.x0 >= sc.y {
        return Err(Error::Domain(format!(
            "causality diagnostics require dtau < r, got dtau={}, r={}",
            p.dtau(),
            p.r
        )));
    }
    // mirrored post-light-cone window dtau' = 2r - dtau
    let mirrored = SystemParams {
        tau: p.tau0 + 2.0 * p.r - p.dtau(),
        ..*p
    };
    let post = scenario1_free(&mirrored, qspec)?;
    let ratio = if post.probability_r_dependent != 0.0 {
        result.probability_r_dependent / post.probability_r_dependent
    } else {
        f64::INFINITY
    };

    // precursor |A|^2 scaling over omega0 r in {30, 100, 300}, window held
    // fixed and clamped below the smallest radius on the grid
    let grid = [30.0, 100.0, 300.0];
    let dtau_d = p.dtau().min(0.5 * grid[0] / p.omega0);
    let pts: Result<Vec<(f64, f64)>> = grid
        .iter()
        .map(|&yy| {
            let a = precursor_closed_form_a(p.omega0, yy / p.omega0, dtau_d)?;
            Ok((yy, a.norm_sqr()))
        })
        .collect();
    let slope = log_log_slope(&pts?)?;
    Ok(CausalityDiagnostics {
        precursor_probability: result.probability_r_dependent,
        post_lightcone_ratio: ratio,
        suppression_exponent: slope,
    })
}
