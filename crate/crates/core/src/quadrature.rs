//! Integration machinery: adaptive Gauss-Legendre panels for oscillatory 1D
//! integrals, principal-value integration by symmetric-pair subtraction,
//! analytic resolution of delta terms, the (xi, eta) reduction of phase-sum
//! double integrals, theta-constrained 4D time-ordered integrals by simplex
//! decomposition, epsilon extrapolation, and brute-force tensor-product
//! oracles.
//!
//! Everything here is deterministic: panels, simplices and partial sums are
//! accumulated in a fixed order so repeated runs are bit-identical.

use crate::error::{Error, Result};
use crate::greens::{DeltaTerm, Regularization};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerances and resolution knobs shared by all integration routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Gauss-Legendre nodes per panel (1D) and per axis (multi-D).
    pub gauss_nodes: usize,
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize, gauss_nodes: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
            return Err(Error::InvalidParam("tolerances must be > 0".into()));
        }
        if gauss_nodes < 8 {
            return Err(Error::InvalidParam("gauss_nodes must be >= 8".into()));
        }
        Ok(Self { rel_tol, abs_tol, max_subdivisions, gauss_nodes })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-11, abs_tol: 1e-15, max_subdivisions: 4000, gauss_nodes: 16 }
    }
}

/// Value, error estimate and cost of one integral evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: Complex64,
    pub err_est: f64,
    pub evaluations: u64,
    /// False when the tolerance was not reached within `max_subdivisions`;
    /// the value is then the best available estimate.
    pub converged: bool,
}

impl IntegralResult {
    fn exact(value: Complex64) -> Self {
        Self { value, err_est: 0.0, evaluations: 0, converged: true }
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' at x by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            pp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl_panel(f: &mut dyn FnMut(f64) -> Complex64, a: f64, b: f64, x: &[f64], w: &[f64]) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        s += *wi * f(c + h * xi);
    }
    h * s
}

// ---------------------------------------------------------------------------
// Adaptive 1D integration
// ---------------------------------------------------------------------------

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

/// Adaptive complex-valued integration over the union of [breaks[i], breaks[i+1]].
/// Each panel is estimated by one whole-panel rule against the sum of its two
/// halves; the worst panel is bisected until the summed error estimate meets
/// the tolerance.
pub fn adaptive_integral(
    f: &mut dyn FnMut(f64) -> Complex64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> IntegralResult {
    assert!(breaks.len() >= 2);
    let (x, w) = gauss_legendre(spec.gauss_nodes);
    let mut evals: u64 = 0;
    let mut eval_panel = |a: f64, b: f64, evals: &mut u64| -> Panel {
        let whole = gl_panel(f, a, b, &x, &w);
        let mid = 0.5 * (a + b);
        let halves = gl_panel(f, a, mid, &x, &w) + gl_panel(f, mid, b, &x, &w);
        *evals += 3 * spec.gauss_nodes as u64;
        Panel { a, b, value: halves, err: (whole - halves).norm() }
    };

    let mut panels: Vec<Panel> = Vec::new();
    for win in breaks.windows(2) {
        if win[1] > win[0] {
            panels.push(eval_panel(win[0], win[1], &mut evals));
        }
    }
    if panels.is_empty() {
        return IntegralResult::exact(Complex64::new(0.0, 0.0));
    }

    let mut splits = 0usize;
    let mut converged = true;
    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * total.norm());
        if err <= tol {
            break;
        }
        if splits >= spec.max_subdivisions {
            converged = false;
            break;
        }
        // worst panel, lowest index on ties
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        let left = eval_panel(a, mid, &mut evals);
        let right = eval_panel(mid, b, &mut evals);
        panels[worst] = left;
        panels.push(right);
        splits += 1;
    }

    // deterministic final assembly in spatial order
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
    let value: Complex64 = panels.iter().map(|p| p.value).sum();
    let err_est: f64 = panels.iter().map(|p| p.err).sum();
    IntegralResult { value, err_est, evaluations: evals, converged }
}

/// Principal value of \int f over [pole - h, pole + h] for an integrand with a
/// simple pole at `pole`, by symmetric-pair subtraction:
/// PV = \int_0^h [f(pole + t) + f(pole - t)] dt, whose integrand is smooth.
pub fn pv_symmetric_window(
    f: &mut dyn FnMut(f64) -> Complex64,
    pole: f64,
    half_width: f64,
    spec: &QuadratureSpec,
) -> IntegralResult {
    assert!(half_width > 0.0);
    let mut g = |t: f64| f(pole + t) + f(pole - t);
    adaptive_integral(&mut g, &[0.0, half_width], spec)
}

// ---------------------------------------------------------------------------
// The xi-reduced triangular-window integral
// ---------------------------------------------------------------------------

/// Distribution-valued integrand for [`weighted_xi_integral`]: a smooth (or
/// principal-value) part evaluated pointwise off the poles, explicit simple
/// poles handled by symmetric-pair subtraction, and delta terms resolved by
/// analytic sifting.
pub struct XiIntegrand<'a> {
    pub smooth: &'a dyn Fn(f64) -> Complex64,
    pub pv_poles: &'a [f64],
    pub deltas: &'a [DeltaTerm],
}

impl<'a> XiIntegrand<'a> {
    pub fn smooth_only(f: &'a dyn Fn(f64) -> Complex64) -> Self {
        Self { smooth: f, pv_poles: &[], deltas: &[] }
    }
}

/// Computes \int_{-dtau}^{dtau} (dtau - |xi|) e^{-i omega0 xi} K(xi) dxi.
///
/// The smooth part is integrated adaptively with panels split at xi = 0, at
/// the poles' exclusion windows and at oscillation period boundaries. A delta
/// at xi0 with weight w contributes w (dtau - |xi0|) e^{-i omega0 xi0} when
/// |xi0| <= dtau (the window factor vanishes on the boundary, so the
/// half-weight convention there is automatic).
pub fn weighted_xi_integral(
    kernel: &XiIntegrand,
    omega0: f64,
    dtau: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    if !(dtau > 0.0) {
        return Err(Error::InvalidParam(format!("dtau must be > 0, got {dtau}")));
    }
    let window = move |xi: f64| Complex64::from_polar(1.0, -omega0 * xi) * (dtau - xi.abs());
    let smooth = kernel.smooth;
    let mut f = move |xi: f64| window(xi) * smooth(xi);

    let poles: Vec<f64> = kernel
        .pv_poles
        .iter()
        .copied()
        .filter(|p| p.abs() < dtau)
        .collect();

    let mut result = integrate_with_pv(&mut f, -dtau, dtau, &poles, omega0, spec);

    for d in kernel.deltas {
        if d.location.abs() < dtau {
            result.value += d.weight * window(d.location);
        }
        // |location| == dtau contributes nothing: the window factor is zero
    }
    Ok(result)
}

/// Shared smooth+PV driver over [a, b]: excludes a symmetric window around
/// each pole (handled by pair subtraction) and integrates the rest
/// adaptively with seeded breaks at 0 and at period boundaries.
fn integrate_with_pv(
    f: &mut dyn FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    poles: &[f64],
    omega0: f64,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let mut poles: Vec<f64> = poles.to_vec();
    poles.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // half-width of each exclusion window: half the distance to the nearest
    // neighbouring feature (other poles, interval ends, xi = 0)
    let mut features = vec![a, b, 0.0];
    features.extend_from_slice(&poles);
    let half_widths: Vec<f64> = poles
        .iter()
        .map(|&p| {
            let mut d = f64::INFINITY;
            for &q in &features {
                if (q - p).abs() > 1e-14 {
                    d = d.min((q - p).abs());
                }
            }
            0.5 * d
        })
        .collect();

    let mut breaks: Vec<f64> = vec![a, b];
    if a < 0.0 && b > 0.0 {
        breaks.push(0.0);
    }
    // period boundaries of the phase factor
    if omega0 != 0.0 {
        let period = std::f64::consts::PI / omega0.abs();
        let kmax = ((b - a) / period) as i64;
        if kmax >= 1 && kmax <= 4096 {
            let mut k = (a / period).ceil() as i64;
            while (k as f64) * period < b {
                let t = k as f64 * period;
                if t > a && t < b {
                    breaks.push(t);
                }
                k += 1;
            }
        }
    }
    for (&p, &h) in poles.iter().zip(&half_widths) {
        breaks.push(p - h);
        breaks.push(p + h);
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    // integrate panels outside the exclusion windows
    let excluded = |lo: f64, hi: f64| -> bool {
        let mid = 0.5 * (lo + hi);
        poles
            .iter()
            .zip(&half_widths)
            .any(|(&p, &h)| mid > p - h && mid < p + h)
    };
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evals = 0u64;
    let mut converged = true;
    let mut segment: Vec<f64> = Vec::new();
    let flush = |segment: &mut Vec<f64>,
                     f: &mut dyn FnMut(f64) -> Complex64,
                     value: &mut Complex64,
                     err: &mut f64,
                     evals: &mut u64,
                     converged: &mut bool| {
        if segment.len() >= 2 {
            let r = adaptive_integral(f, segment, spec);
            *value += r.value;
            *err += r.err_est;
            *evals += r.evaluations;
            *converged &= r.converged;
        }
        segment.clear();
    };
    for i in 0..breaks.len() {
        if i + 1 < breaks.len() && excluded(breaks[i], breaks[i + 1]) {
            segment.push(breaks[i]);
            flush(&mut segment, f, &mut value, &mut err, &mut evals, &mut converged);
        } else {
            segment.push(breaks[i]);
        }
    }
    flush(&mut segment, f, &mut value, &mut err, &mut evals, &mut converged);

    for (&p, &h) in poles.iter().zip(&half_widths) {
        let r = pv_symmetric_window(f, p, h, spec);
        value += r.value;
        err += r.err_est;
        evals += r.evaluations;
        converged &= r.converged;
    }

    IntegralResult { value, err_est: err, evaluations: evals, converged }
}

// ---------------------------------------------------------------------------
// Phase-sum double integral
// ---------------------------------------------------------------------------

/// Computes \int\int_{[tau0, tau]^2} du dv e^{sign i omega0 (u + v)} K(u - v)
/// by the change of variables xi = u - v, eta = u + v: the eta integral over
/// [2 tau0 + |xi|, 2 tau - |xi|] is done in closed form, leaving a 1D
/// adaptive xi integral with Jacobian 1/2.
pub fn phase_sum_integral(
    kernel: &dyn Fn(f64) -> Complex64,
    omega0: f64,
    tau0: f64,
    tau: f64,
    sign: i8,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    if !(tau > tau0) {
        return Err(Error::InvalidParam("phase_sum_integral requires tau > tau0".into()));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParam("sign must be +1 or -1".into()));
    }
    let dtau = tau - tau0;
    let c = Complex64::new(0.0, sign as f64 * omega0);
    let eta_integral = move |xi: f64| -> Complex64 {
        let lo = 2.0 * tau0 + xi.abs();
        let hi = 2.0 * tau - xi.abs();
        if omega0 == 0.0 {
            Complex64::new(hi - lo, 0.0)
        } else {
            ((c * hi).exp() - (c * lo).exp()) / c
        }
    };
    let mut f = move |xi: f64| 0.5 * kernel(xi) * eta_integral(xi);
    let mut breaks = vec![-dtau, 0.0, dtau];
    if omega0 != 0.0 {
        let period = std::f64::consts::PI / omega0.abs();
        let mut t = period;
        while t < dtau && breaks.len() < 4096 {
            breaks.push(t);
            breaks.push(-t);
            t += period;
        }
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    Ok(adaptive_integral(&mut f, &breaks, spec))
}

// ---------------------------------------------------------------------------
// Theta-constrained 4D integrals over orderings
// ---------------------------------------------------------------------------

/// An ordering predicate theta(tau_i - tau_j): requires tau_i > tau_j.
/// Indices are zero-based.
pub type OrderingConstraint = (usize, usize);

/// All 24 permutations of 4 elements in lexicographic order; perm[k] is the
/// variable index occupying ascending rank k.
fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push([a, b, c, d]);
            }
        }
    }
    out
}

/// Relative accuracy target for the fixed-order (non-adaptive) rules. Their
/// n-versus-n/2 error estimate is dominated by the half-resolution pass and
/// cannot certify the adaptive `rel_tol`, so convergence of these rules is
/// judged against this floor instead; `err_est` itself stays conservative.
pub const FIXED_RULE_REL_TOL: f64 = 1e-7;

fn fixed_rule_converged(err: f64, norm: f64, spec: &QuadratureSpec) -> bool {
    err <= spec.abs_tol.max(spec.rel_tol.max(FIXED_RULE_REL_TOL) * norm)
}

/// Returns the simplices (full orderings) of the hypercube compatible with
/// every constraint. A constraint (i, j) keeps the orderings in which tau_i
/// ranks above tau_j.
pub fn compatible_orderings(constraints: &[OrderingConstraint]) -> Vec<[usize; 4]> {
    permutations4()
        .into_iter()
        .filter(|perm| {
            let mut pos = [0usize; 4];
            for (rank, &v) in perm.iter().enumerate() {
                pos[v] = rank;
            }
            constraints.iter().all(|&(i, j)| pos[i] > pos[j])
        })
        .collect()
}

/// Integrates `integrand` over the region of [tau0, tau]^4 selected by the
/// theta constraints, by decomposing the region into full orderings and
/// applying an iterated Gauss-Legendre rule on each ordered simplex. The
/// error estimate compares the full rule against a half-resolution pass.
pub fn ordered_integral_4d(
    integrand: &dyn Fn(f64, f64, f64, f64) -> Complex64,
    constraints: &[OrderingConstraint],
    tau0: f64,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    if !(tau > tau0) {
        return Err(Error::InvalidParam("ordered_integral_4d requires tau > tau0".into()));
    }
    if constraints.iter().any(|&(i, j)| i > 3 || j > 3 || i == j) {
        return Err(Error::InvalidParam("constraint indices must be distinct and < 4".into()));
    }
    let orderings = compatible_orderings(constraints);
    if orderings.is_empty() {
        // contradictory constraints select the empty region
        return Ok(IntegralResult::exact(Complex64::new(0.0, 0.0)));
    }
    let n = spec.gauss_nodes;
    let n_half = (n / 2).max(4);
    let mut evals = 0u64;
    let full = simplex_sum(integrand, &orderings, tau0, tau, n, &mut evals);
    let coarse = simplex_sum(integrand, &orderings, tau0, tau, n_half, &mut evals);
    let err_est = (full - coarse).norm();
    Ok(IntegralResult {
        value: full,
        err_est,
        evaluations: evals,
        converged: fixed_rule_converged(err_est, full.norm(), spec),
    })
}

/// Iterated Gauss-Legendre over the ordered simplex
/// tau0 <= t_(1) <= t_(2) <= t_(3) <= t_(4) <= tau, summed over the given
/// orderings: ordering perm assigns t_(k) to variable perm[k].
fn simplex_sum(
    integrand: &dyn Fn(f64, f64, f64, f64) -> Complex64,
    orderings: &[[usize; 4]],
    tau0: f64,
    tau: f64,
    n: usize,
    evals: &mut u64,
) -> Complex64 {
    let (x, w) = gauss_legendre(n);
    // nodes mapped to [0, 1]
    let u: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let wu: Vec<f64> = w.iter().map(|t| 0.5 * t).collect();
    let span = tau - tau0;
    let mut total = Complex64::new(0.0, 0.0);
    for perm in orderings {
        let mut pos = [0usize; 4];
        for (rank, &v) in perm.iter().enumerate() {
            pos[v] = rank;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (i4, &u4) in u.iter().enumerate() {
            let t4 = tau0 + span * u4;
            let s4 = t4 - tau0;
            for (i3, &u3) in u.iter().enumerate() {
                let t3 = tau0 + s4 * u3;
                let s3 = t3 - tau0;
                for (i2, &u2) in u.iter().enumerate() {
                    let t2 = tau0 + s3 * u2;
                    let s2 = t2 - tau0;
                    for (i1, &u1) in u.iter().enumerate() {
                        let t1 = tau0 + s2 * u1;
                        let sorted = [t1, t2, t3, t4];
                        let tv = [
                            sorted[pos[0]],
                            sorted[pos[1]],
                            sorted[pos[2]],
                            sorted[pos[3]],
                        ];
                        let jac = span * s4 * s3 * s2;
                        sum += wu[i4] * wu[i3] * wu[i2] * wu[i1]
                            * jac
                            * integrand(tv[0], tv[1], tv[2], tv[3]);
                    }
                }
            }
        }
        *evals += (n * n * n * n) as u64;
        total += sum;
    }
    total
}

// ---------------------------------------------------------------------------
// Epsilon extrapolation
// ---------------------------------------------------------------------------

/// Result of an epsilon -> 0 extrapolation, with the raw regulated sequence
/// attached for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationResult {
    pub value: Complex64,
    pub err_est: f64,
    /// False when the regulated sequence does not approach the extrapolated
    /// value monotonically.
    pub monotone: bool,
    pub sequence: Vec<(f64, Complex64)>,
}

/// Polynomial (Neville) extrapolation of f(eps) to eps = 0 over the
/// regularization schedule, assuming a leading error linear in eps. The error
/// estimate is the magnitude of the last extrapolation increment.
pub fn eps_extrapolate(
    f: &mut dyn FnMut(f64) -> Complex64,
    reg: &Regularization,
) -> Result<ExtrapolationResult> {
    if reg.schedule.len() < 3 {
        return Err(Error::BadSchedule("eps_extrapolate needs at least 3 levels".into()));
    }
    let seq: Vec<(f64, Complex64)> = reg.schedule.iter().map(|&e| (e, f(e))).collect();
    let depth = reg.extrapolation_order.max(1).min(seq.len() - 1);

    // Neville table toward eps = 0
    let mut col: Vec<Complex64> = seq.iter().map(|&(_, v)| v).collect();
    let eps: Vec<f64> = seq.iter().map(|&(e, _)| e).collect();
    let mut prev_diag = col[0];
    let mut diag = col[0];
    for order in 1..=depth {
        let mut next = Vec::with_capacity(col.len() - 1);
        for i in 0..col.len() - 1 {
            let e0 = eps[i];
            let e1 = eps[i + order];
            let v = (col[i + 1] * e0 - col[i] * e1) / (e0 - e1);
            next.push(v);
        }
        col = next;
        prev_diag = diag;
        diag = col[0];
    }
    let err_est = (diag - prev_diag).norm();

    // monotone approach of the raw sequence to the extrapolated value
    let mut monotone = true;
    let mut last = f64::INFINITY;
    for &(_, v) in &seq {
        let d = (v - diag).norm();
        if d > last * (1.0 + 1e-9) {
            monotone = false;
        }
        last = d;
    }
    Ok(ExtrapolationResult { value: diag, err_est, monotone, sequence: seq })
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

/// Tensor-product Gauss-Legendre over [a, b]^2, full rule vs half rule.
pub fn direct_double_integral(
    f: &dyn Fn(f64, f64) -> Complex64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let run = |n: usize| -> Complex64 {
        let (x, w) = gauss_legendre(n);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = Complex64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            for (xj, wj) in x.iter().zip(&w) {
                s += wi * wj * f(c + h * xi, c + h * xj);
            }
        }
        s * h * h
    };
    let n = spec.gauss_nodes.max(16);
    let full = run(n);
    let coarse = run(n / 2);
    let err = (full - coarse).norm();
    IntegralResult {
        value: full,
        err_est: err,
        evaluations: (n * n + (n / 2) * (n / 2)) as u64,
        converged: fixed_rule_converged(err, full.norm(), spec),
    }
}

/// Tensor-product Gauss-Legendre over [a, b]^4, full rule vs half rule.
/// Intended only for validation at modest accuracy.
pub fn direct_quadruple_integral(
    f: &dyn Fn(f64, f64, f64, f64) -> Complex64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let run = |n: usize| -> Complex64 {
        let (x, w) = gauss_legendre(n);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let pts: Vec<f64> = x.iter().map(|t| c + h * t).collect();
        let mut s = Complex64::new(0.0, 0.0);
        for (i1, w1) in w.iter().enumerate() {
            for (i2, w2) in w.iter().enumerate() {
                for (i3, w3) in w.iter().enumerate() {
                    for (i4, w4) in w.iter().enumerate() {
                        s += w1 * w2 * w3 * w4 * f(pts[i1], pts[i2], pts[i3], pts[i4]);
                    }
                }
            }
        }
        s * h.powi(4)
    };
    let n = spec.gauss_nodes.max(16);
    let full = run(n);
    let coarse = run(n / 2);
    let err = (full - coarse).norm();
    IntegralResult {
        value: full,
        err_est: err,
        evaluations: (n.pow(4) + (n / 2).pow(4)) as u64,
        converged: fixed_rule_converged(err, full.norm(), spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree-15 monomial on [-1,1]
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert_abs_diff_eq!(s, 2.0 / 15.0, epsilon = 1e-14);
        let total: f64 = w.iter().sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn weighted_xi_constant_kernel() {
        // kernel = 1, omega0 = 1, dtau = pi -> 2 (1 - cos(dtau)) = 4
        let one = |_: f64| Complex64::new(1.0, 0.0);
        let k = XiIntegrand::smooth_only(&one);
        let r = weighted_xi_integral(&k, 1.0, PI, &spec()).unwrap();
        assert_abs_diff_eq!(r.value.re, 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.value.im, 0.0, epsilon = 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn weighted_xi_delta_sifting() {
        let zero = |_: f64| Complex64::new(0.0, 0.0);
        let w = Complex64::new(0.3, -0.1);
        let r_loc = 1.0;
        let deltas = [DeltaTerm { location: r_loc, weight: w }];
        let k = XiIntegrand { smooth: &zero, pv_poles: &[], deltas: &deltas };
        // dtau > r: w (dtau - r) e^{-i omega0 r}
        let omega0 = 2.0;
        let dtau = 1.5;
        let r = weighted_xi_integral(&k, omega0, dtau, &spec()).unwrap();
        let expect = w * (dtau - r_loc) * Complex64::from_polar(1.0, -omega0 * r_loc);
        assert_abs_diff_eq!((r.value - expect).norm(), 0.0, epsilon = 1e-15);
        // dtau < r: no contribution
        let r = weighted_xi_integral(&k, omega0, 0.5, &spec()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn weighted_xi_pv_matches_eps_limit() {
        // kernel 1/(xi^2 - r^2) with r inside the window, PV route vs
        // eps-extrapolated i-epsilon route
        let rr = 0.6f64;
        let pv_kernel = move |xi: f64| Complex64::new(1.0 / (xi * xi - rr * rr), 0.0);
        let poles = [-rr, rr];
        let k = XiIntegrand { smooth: &pv_kernel, pv_poles: &poles, deltas: &[] };
        let pv = weighted_xi_integral(&k, 1.0, 1.0, &spec()).unwrap();

        let reg = Regularization::geometric(1e-3, 6).unwrap();
        let mut f = |eps: f64| {
            let kern = move |xi: f64| 1.0 / Complex64::new(xi * xi - rr * rr, -eps);
            let kk = XiIntegrand::smooth_only(&kern);
            weighted_xi_integral(&kk, 1.0, 1.0, &spec()).unwrap().value
        };
        let ex = eps_extrapolate(&mut f, &reg).unwrap();
        // the i-eps form limits to PV + i pi delta contributions; compare real
        // parts (the PV content)
        assert_abs_diff_eq!(pv.value.re, ex.value.re, epsilon = 1e-6);
    }

    #[test]
    fn phase_sum_constant_kernel() {
        let one = |_: f64| Complex64::new(1.0, 0.0);
        let omega0 = 1.3;
        let t = 2.0;
        let r = phase_sum_integral(&one, omega0, 0.0, t, -1, &spec()).unwrap();
        let c = Complex64::new(0.0, -omega0);
        let expect = (((c * t).exp() - 1.0) / c).powi(2);
        assert_abs_diff_eq!((r.value - expect).norm(), 0.0, epsilon = 1e-10);
        // omega0 = 0 -> T^2
        let r = phase_sum_integral(&one, 0.0, 0.0, t, -1, &spec()).unwrap();
        assert_abs_diff_eq!(r.value.re, t * t, epsilon = 1e-10);
    }

    #[test]
    fn phase_sum_shift_preserves_modulus() {
        let kern = |xi: f64| Complex64::new(1.0 / (xi * xi + 1.0), 0.2 * xi);
        let a = phase_sum_integral(&kern, 1.0, 0.0, 1.5, -1, &spec()).unwrap();
        let b = phase_sum_integral(&kern, 1.0, 2.0, 3.5, -1, &spec()).unwrap();
        assert_abs_diff_eq!(a.value.norm(), b.value.norm(), epsilon = 1e-9);
    }

    #[test]
    fn ordered_4d_box_volume() {
        let one = |_: f64, _: f64, _: f64, _: f64| Complex64::new(1.0, 0.0);
        let t = 1.7;
        let r = ordered_integral_4d(&one, &[], 0.0, t, &spec()).unwrap();
        assert_abs_diff_eq!(r.value.re, t.powi(4), epsilon = 1e-9);
    }

    #[test]
    fn ordered_4d_theta_volume() {
        // theta(t2 - t4) theta(t3 - t4) over [0, T]^4 -> T^4 / 3
        let one = |_: f64, _: f64, _: f64, _: f64| Complex64::new(1.0, 0.0);
        let t = 1.3;
        let r = ordered_integral_4d(&one, &[(1, 3), (2, 3)], 0.0, t, &spec()).unwrap();
        assert_abs_diff_eq!(r.value.re, t.powi(4) / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn ordered_4d_contradictory_constraints() {
        let one = |_: f64, _: f64, _: f64, _: f64| Complex64::new(1.0, 0.0);
        let r = ordered_integral_4d(&one, &[(0, 1), (1, 0)], 0.0, 1.0, &spec()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert_eq!(r.err_est, 0.0);
    }

    #[test]
    fn ordered_4d_matches_direct_box() {
        // smooth integrand, no constraints: simplex decomposition vs tensor rule
        let f = |a: f64, b: f64, c: f64, d: f64| {
            Complex64::from_polar(1.0, a - b + 0.5 * c) * (1.0 + a * d)
        };
        let s = spec();
        let simplex = ordered_integral_4d(&f, &[], 0.0, 1.0, &s).unwrap();
        let direct = direct_quadruple_integral(&f, 0.0, 1.0, &s);
        assert_abs_diff_eq!((simplex.value - direct.value).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn eps_extrapolate_linear_and_constant() {
        let reg = Regularization::geometric(1e-2, 5).unwrap();
        let c = Complex64::new(0.7, -0.3);
        let a = Complex64::new(2.0, 1.0);
        let mut lin = |e: f64| c + a * e;
        let r = eps_extrapolate(&mut lin, &reg).unwrap();
        assert_abs_diff_eq!((r.value - c).norm(), 0.0, epsilon = 1e-12);
        let mut cst = |_: f64| c;
        let r = eps_extrapolate(&mut cst, &reg).unwrap();
        assert_abs_diff_eq!((r.value - c).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.err_est, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eps_extrapolate_needs_three_levels() {
        let reg = Regularization::new(1e-2, vec![1e-2, 1e-3], 1).unwrap();
        let mut f = |_: f64| Complex64::new(1.0, 0.0);
        assert!(eps_extrapolate(&mut f, &reg).is_err());
    }

    #[test]
    fn sokhotski_plemelj_window() {
        // \int_{-1}^{1} (1 - xi^2)^2 / (xi - i eps)^2 dxi -> -16/3 as eps -> 0
        let reg = Regularization::geometric(1e-2, 7).unwrap();
        let s = spec();
        let mut f = |eps: f64| {
            let mut g = move |xi: f64| {
                let w = (1.0 - xi * xi).powi(2);
                w / Complex64::new(xi, -eps).powu(2)
            };
            adaptive_integral(&mut g, &[-1.0, 0.0, 1.0], &s).value
        };
        let r = eps_extrapolate(&mut f, &reg).unwrap();
        assert_abs_diff_eq!(r.value.re, -16.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.value.im, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn direct_double_separable_phase() {
        // \int\int e^{-i omega0 (u - v)} du dv over [0, T]^2 = |(1-e^{-i w T})/(i w)|^2
        let omega0 = 1.0;
        let t = 2.0;
        let f = move |u: f64, v: f64| Complex64::from_polar(1.0, -omega0 * (u - v));
        let r = direct_double_integral(&f, 0.0, t, &spec());
        let iw = Complex64::new(0.0, omega0);
        let expect = ((1.0 - (-iw * t).exp()) / iw).norm_sqr();
        assert_abs_diff_eq!(r.value.re, expect, epsilon = 1e-10);
        assert_abs_diff_eq!(r.value.im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn quadrature_spec_validation() {
        assert!(QuadratureSpec::new(1e-10, 1e-14, 100, 7).is_err());
        assert!(QuadratureSpec::new(0.0, 1e-14, 100, 16).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-14, 100, 16).is_ok());
    }
}
