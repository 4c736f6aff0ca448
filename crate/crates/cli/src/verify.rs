//! Built-in verification suites: the acceptance checks packaged behind the
//! `verify` subcommand, with a machine-readable JSON report.

use fermi_causality::asymptotics::{log_log_slope, wave_zone_disorder};
use fermi_causality::greens::{
    disorder_i, disorder_i_limit, feynman_free_ieps, feynman_free_split, wightman_free,
    wightman_free_limit, DisorderModel, SpacetimeInterval,
};
use fermi_causality::quadrature::{
    direct_double_integral, direct_quadruple_integral, eps_extrapolate, ordered_integral_4d,
    phase_sum_integral, weighted_xi_integral, XiIntegrand,
};
use fermi_causality::scenarios::{
    amplitude_free_a, scenario1_disorder, scenario3_disorder, scenario3_free, SystemParams,
};
use fermi_causality::{QuadratureSpec, Regularization};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    measured: String,
    tolerance: String,
    runtime_ms: f64,
}

#[derive(Serialize)]
struct Report {
    engine_version: &'static str,
    suite: String,
    all_passed: bool,
    checks: Vec<Check>,
}

fn check(
    out: &mut Vec<Check>,
    name: &str,
    tolerance: &str,
    f: impl FnOnce() -> (bool, String),
) {
    let t = Instant::now();
    let (pass, measured) = f();
    let c = Check {
        name: name.to_string(),
        pass,
        measured,
        tolerance: tolerance.to_string(),
        runtime_ms: t.elapsed().as_secs_f64() * 1e3,
    };
    println!("{} {}: {} (tol {})", c.name, if pass { "PASS" } else { "FAIL" }, c.measured, c.tolerance);
    out.push(c);
}

fn params(r: f64, dtau: f64, sigma2: f64) -> SystemParams {
    SystemParams::new(1.0, r, 1.0, 0.0, dtau, sigma2).unwrap()
}

/// Minimal deterministic generator for the randomized kernel grid.
struct Lcg(u64);

impl Lcg {
    fn next_unit(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}

fn suite_kernels(out: &mut Vec<Check>) {
    check(out, "kernel_symmetries_seeded_grid", "exact / 1e-13 rel", || {
        let mut rng = Lcg(42);
        for _ in 0..100 {
            let dt = rng.range(-5.0, 5.0);
            let r = rng.range(0.1, 5.0);
            let eps = 10f64.powf(rng.range(-6.0, -2.0));
            let s = rng.range(0.01, 10.0);
            let reg = Regularization::new(eps, vec![eps], 1).unwrap();
            let dm = DisorderModel { sigma2: s };
            let f = feynman_free_ieps(SpacetimeInterval { dt, radius: r }, &reg);
            if f != feynman_free_ieps(SpacetimeInterval { dt: -dt, radius: r }, &reg) {
                return (false, format!("Feynman evenness broken at dt={dt}, r={r}"));
            }
            let w = wightman_free(SpacetimeInterval { dt, radius: r }, &reg);
            if w != wightman_free(SpacetimeInterval { dt: -dt, radius: r }, &reg).conj() {
                return (false, format!("Wightman Hermiticity broken at dt={dt}, r={r}"));
            }
            let i1 = disorder_i(SpacetimeInterval { dt, radius: r }, &reg, &dm).value;
            let i2 = disorder_i(SpacetimeInterval { dt: -dt, radius: r }, &reg, &dm).value;
            if (i1 - i2).norm() > 1e-13 * i1.norm() {
                return (false, format!("I evenness broken at dt={dt}, r={r}"));
            }
            let id = disorder_i(
                SpacetimeInterval { dt, radius: r },
                &reg,
                &DisorderModel { sigma2: 2.0 * s },
            )
            .value;
            if (id - 2.0 * i1).norm() > 1e-13 * id.norm() {
                return (false, format!("sigma^2 linearity broken at dt={dt}, r={r}"));
            }
        }
        (true, "100-point grid clean".into())
    });

    check(out, "spacelike_I_purely_imaginary", "|Re| <= 1e-10 |Im|", || {
        let dm = DisorderModel { sigma2: 1.0 };
        let mut worst = 0.0f64;
        for &(dt, r) in &[(0.5, 2.0), (1.0, 3.0), (0.0, 1.5)] {
            let sched = Regularization::geometric(1e-4, 5).unwrap();
            let mut f = |e: f64| {
                let rg = Regularization::new(e, vec![e], 1).unwrap();
                disorder_i(SpacetimeInterval { dt, radius: r }, &rg, &dm).value
            };
            let ex = eps_extrapolate(&mut f, &sched).unwrap();
            if ex.value.im != 0.0 {
                worst = worst.max(ex.value.re.abs() / ex.value.im.abs());
            }
        }
        (worst <= 1e-10, format!("worst |Re/Im| {worst:.3e}"))
    });

    check(out, "sokhotski_plemelj_consistency", "<= 1e-8 rel", || {
        let qspec = QuadratureSpec::default();
        let r = 1.0;
        let dtau = 2.0;
        let smooth = |xi: f64| {
            feynman_free_split(SpacetimeInterval { dt: xi, radius: r })
                .unwrap()
                .smooth
        };
        let kv = feynman_free_split(SpacetimeInterval { dt: 0.0, radius: r }).unwrap();
        let poles = [-r, r];
        let kernel = XiIntegrand { smooth: &smooth, pv_poles: &poles, deltas: &kv.deltas };
        let split = weighted_xi_integral(&kernel, 1.0, dtau, &qspec).unwrap().value;
        let sched = Regularization::geometric(1e-3, 6).unwrap();
        let mut f = |eps: f64| {
            let rg = Regularization::new(eps, vec![eps], 1).unwrap();
            let sm =
                move |xi: f64| feynman_free_ieps(SpacetimeInterval { dt: xi, radius: r }, &rg);
            let k = XiIntegrand::smooth_only(&sm);
            weighted_xi_integral(&k, 1.0, dtau, &qspec).unwrap().value
        };
        let extr = eps_extrapolate(&mut f, &sched).unwrap();
        let rel = (split - extr.value).norm() / split.norm();
        (rel < 1e-8, format!("split vs ieps rel dev {rel:.3e}"))
    });
}

fn suite_quadrature(out: &mut Vec<Check>) {
    check(out, "reduction_oracle_4d", "<= 1e-6 rel", || {
        let eps = 1e-2;
        let reg = Regularization::new(eps, vec![eps], 1).unwrap();
        let qspec = QuadratureSpec { gauss_nodes: 24, ..QuadratureSpec::default() };
        let mut worst = 0.0f64;
        for &(r, dtau) in &[(2.0, 1.0), (5.0, 1.0), (5.0, 2.0)] {
            let g = |dt: f64| feynman_free_ieps(SpacetimeInterval { dt, radius: r }, &reg);
            let direct = direct_quadruple_integral(
                &|t1, t2, t3, t4| {
                    Complex64::from_polar(1.0, (t3 - t4) - (t1 - t2))
                        * g(t4 - t3).conj()
                        * g(t1 - t2)
                },
                0.0,
                dtau,
                &qspec,
            );
            let smooth = |xi: f64| g(xi);
            let k = XiIntegrand::smooth_only(&smooth);
            let reduced = weighted_xi_integral(&k, 1.0, dtau, &qspec)
                .unwrap()
                .value
                .norm_sqr();
            worst = worst.max((direct.value.re - reduced).abs() / reduced);
        }
        (worst < 1e-6, format!("worst rel dev {worst:.3e}"))
    });

    check(out, "simplex_partition", "<= 1e-9 rel", || {
        let qspec = QuadratureSpec::default();
        let f = |a: f64, b: f64, c: f64, d: f64| {
            Complex64::from_polar(1.0, a - b + 0.5 * c) * (1.0 + a * d)
        };
        let simplex = ordered_integral_4d(&f, &[], 0.0, 1.0, &qspec).unwrap();
        let direct = direct_quadruple_integral(&f, 0.0, 1.0, &qspec);
        let rel = (simplex.value - direct.value).norm() / direct.value.norm();
        (rel < 1e-9, format!("decomposed vs box rel dev {rel:.3e}"))
    });

    check(out, "phase_sum_reduction", "<= 1e-7 rel", || {
        let r = 3.0;
        let kernel =
            |xi: f64| wightman_free_limit(SpacetimeInterval { dt: xi, radius: r }).unwrap();
        let reduced =
            phase_sum_integral(&kernel, 1.0, 0.0, 1.0, -1, &QuadratureSpec::default()).unwrap();
        let direct = direct_double_integral(
            &|u, v| Complex64::from_polar(1.0, -(u + v)) * kernel(u - v),
            0.0,
            1.0,
            &QuadratureSpec { gauss_nodes: 48, ..QuadratureSpec::default() },
        );
        let rel = (reduced.value - direct.value).norm() / direct.value.norm();
        (rel < 1e-7, format!("reduced vs direct rel dev {rel:.3e}"))
    });
}

fn suite_causality(out: &mut Vec<Check>) {
    check(out, "heaviside_onset", "<= 1e-10 abs", || {
        let qspec = QuadratureSpec::default();
        let r = 2.0;
        let below = amplitude_free_a(&params(r, r * (1.0 - 1e-3), 0.0), &qspec).unwrap();
        let above = amplitude_free_a(&params(r, r * (1.0 + 1e-3), 0.0), &qspec).unwrap();
        let expect = Complex64::new(-(r * 1e-3) * r.cos() / (4.0 * PI * r), 0.0);
        let dev = (above.delta - expect).norm();
        (
            below.delta == Complex64::new(0.0, 0.0) && dev < 1e-10,
            format!("below-cone delta {:?}, sifted dev {dev:.3e}", below.delta),
        )
    });

    check(out, "free_inclusive_cancellation", "<= 1e-8 rel", || {
        let qspec = QuadratureSpec::default();
        let mut worst = 0.0f64;
        for &(r, dtau) in &[(2.0, 1.0), (3.0, 1.5), (5.0, 2.0)] {
            let res = scenario3_free(&params(r, dtau, 0.0), &qspec).unwrap();
            let largest = res
                .breakdown
                .entries
                .iter()
                .filter(|e| e.in_total)
                .map(|e| e.value.norm())
                .fold(0.0f64, f64::max);
            let residual = res.breakdown.get("noncausal_residual").unwrap().value.norm();
            worst = worst.max(residual / largest);
        }
        (worst < 1e-8, format!("worst residual rel {worst:.3e}"))
    });

    check(out, "disorder_breaks_cancellation", ">= 10x free residual", || {
        let qspec = QuadratureSpec::default();
        let reg = Regularization::default();
        let free = scenario3_free(&params(3.0, 1.5, 0.0), &qspec).unwrap();
        let dis = scenario3_disorder(&params(3.0, 1.5, 0.1), &reg, &qspec).unwrap();
        let fr = free.breakdown.get("noncausal_residual").unwrap().value.norm();
        let dr = dis.breakdown.get("noncausal_residual").unwrap().value.norm();
        let ratio = dr / fr.max(f64::MIN_POSITIVE);
        (ratio > 10.0, format!("disorder/free residual ratio {ratio:.2e}"))
    });
}

fn suite_wavezone(out: &mut Vec<Check>) {
    check(out, "wave_zone_disorder_limit", "<= 2e-2 rel", || {
        let qspec = QuadratureSpec::default();
        let r = 100.0;
        let dm = DisorderModel { sigma2: 1.0 };
        let mut worst = 0.0f64;
        let mut notes = Vec::new();
        for &dtau in &[1.0, 2.0, 5.0] {
            let smooth = |xi: f64| {
                disorder_i_limit(SpacetimeInterval { dt: xi, radius: r }, &dm).unwrap()
            };
            let k = XiIntegrand::smooth_only(&smooth);
            let integrated = weighted_xi_integral(&k, 1.0, dtau, &qspec).unwrap().value;
            let target = wave_zone_disorder(1.0, 1.0, dtau);
            let rel = (integrated - target).norm() / target.norm();
            worst = worst.max(rel);
            notes.push(format!("dtau={dtau}: |integrated| {:.2e} vs |closed form| {:.2e}", integrated.norm(), target.norm()));
        }
        (
            worst < 2e-2,
            format!(
                "worst rel dev {worst:.3e}; {}; finding: the integrated kernel decays as \
                 1/(omega0 r)^5 while the closed-form limit is r-independent — the two \
                 normalizations are mutually inconsistent",
                notes.join("; ")
            ),
        )
    });

    check(out, "precursor_scaling_exponent", "-4 +- 0.3", || {
        let qspec = QuadratureSpec::default();
        let pts: Vec<(f64, f64)> = [30.0, 100.0, 300.0]
            .iter()
            .map(|&r| {
                let a = amplitude_free_a(&params(r, 1.0, 0.0), &qspec).unwrap();
                (r, a.total().norm_sqr())
            })
            .collect();
        let slope = log_log_slope(&pts).unwrap();
        ((slope + 4.0).abs() < 0.3, format!("fitted slope {slope:.3}"))
    });

    check(out, "crossover_scaling_law", "1.0 +- 0.1 log-log slope", || {
        let qspec = QuadratureSpec::default();
        let reg = Regularization::default();
        let ratio_at = |r: f64, sigma2: f64| -> f64 {
            let res = scenario1_disorder(&params(r, 0.5 * r, sigma2), &reg, &qspec).unwrap();
            let free = res.breakdown.get("free_amplitude_sq").unwrap().value.re;
            let cross = res.breakdown.get("disorder_cross_G0_I").unwrap().value.re;
            cross.abs() / free
        };
        let mut pts = Vec::new();
        for &sigma2 in &[0.1, 0.2154, 0.4642, 1.0] {
            let (mut lo, mut hi) = (0.02f64.ln(), 50.0f64.ln());
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if ratio_at(mid.exp(), sigma2) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            pts.push((sigma2, (0.5 * (lo + hi)).exp()));
        }
        let slope = log_log_slope(&pts).unwrap();
        (
            (slope - 1.0).abs() < 0.1,
            format!(
                "measured slope {slope:.3}; finding: the engine's crossover scale grows as \
                 (sigma^2)^(1/3), not linearly — the free and disorder precursors fall as \
                 1/(omega0 r)^4 and 1/(omega0 r)^7 so their ratio scales as sigma^2/r^3"
            ),
        )
    });
}

pub fn run(suite: &str, report_path: &Path) -> ExitCode {
    let mut checks = Vec::new();
    match suite {
        "kernels" => suite_kernels(&mut checks),
        "quadrature" => suite_quadrature(&mut checks),
        "causality" => suite_causality(&mut checks),
        "wavezone" => suite_wavezone(&mut checks),
        "all" => {
            suite_kernels(&mut checks);
            suite_quadrature(&mut checks);
            suite_causality(&mut checks);
            suite_wavezone(&mut checks);
        }
        other => {
            eprintln!(
                "error: unknown suite '{other}'; expected kernels, quadrature, causality, wavezone or all"
            );
            return ExitCode::from(2);
        }
    }
    let all_passed = checks.iter().all(|c| c.pass);
    let report = Report {
        engine_version: env!("CARGO_PKG_VERSION"),
        suite: suite.to_string(),
        all_passed,
        checks,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    if let Err(e) = std::fs::write(report_path, json + "\n") {
        eprintln!("error: cannot write {}: {e}", report_path.display());
        return ExitCode::from(2);
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
