//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use henon_core::branch::{asymptotic_ratio, estimate_lambda_star, minimal_solution, IterOptions};
use henon_core::closed_forms::{
    bubble_residual, observed_rate, sobolev_constants, torsion_e_alpha, BubbleIntegral, BubbleParams,
};
use henon_core::domain::{ProblemSpec, RadialGrid};
use henon_core::kelvin::{beta_for_alpha, exterior_solve, kelvin_exponent, ExteriorSpec};
use henon_core::mountain_pass::{
    level_ordering_report, mp_second_radial, threshold_check, LevelReport, LevelSettings, MPConfig,
};
use henon_core::radial::{assemble_radial_operator, discrete_sobolev_minimum, discrete_torsion, principal_eigenpair};
use henon_core::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn torsion() -> Result<Outcome> {
    let (n, alpha) = (3, 2.0);
    let grid = RadialGrid::new(1000);
    let e = discrete_torsion(&assemble_radial_operator(grid, n), alpha)?;
    let err = grid
        .nodes()
        .iter()
        .zip(&e.values)
        .fold(0.0f64, |m, (r, v)| m.max((v - torsion_e_alpha(*r, n, alpha)).abs()));
    let e0 = e.values[0];
    outcome(
        err <= 1e-4 && (e0 - 0.05).abs() <= 1e-4 && torsion_e_alpha(0.0, n, alpha) == 0.05,
        format!("sup error {err:.3e}, e(0) = {e0:.8}"),
    )
}

fn eigenvalue() -> Result<Outcome> {
    let lam = |n: usize, m: usize| -> Result<f64> {
        Ok(principal_eigenpair(&assemble_radial_operator(RadialGrid::new(m), n), 0.0, 1e-13)?.lambda_1_alpha)
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, exact) in [(3, PI * PI), (1, PI * PI / 4.0)] {
        let (l1, l2, l4) = (lam(n, 500)?, lam(n, 1000)?, lam(n, 2000)?);
        let rel = (l4 - exact).abs() / exact;
        let ratio = (l2 - exact) / (l4 - exact);
        let coarse_ratio = (l1 - exact) / (l2 - exact);
        pass &= rel <= 1e-3 && (3.5..=4.5).contains(&ratio);
        detail.push(format!("N={n}: rel err {rel:.2e}, ratios {coarse_ratio:.3}, {ratio:.3}"));
    }
    outcome(pass, detail.join("; "))
}

fn lambda_star() -> Result<Outcome> {
    let b1 = estimate_lambda_star(3, 2.0, 3.0, 500, 1e-6)?;
    let b2 = estimate_lambda_star(3, 2.0, 3.0, 1000, 1e-6)?;
    let drift = (b2.mid() - b1.mid()).abs() / b2.mid();
    let pass = b2.lo >= 2.9630 && b2.hi <= b2.lambda_1_alpha / 3.0 && b2.lo < b2.hi && drift <= 0.01;
    outcome(
        pass,
        format!("[{:.7}, {:.7}] at M=1000, λ1/3 = {:.6}, midpoint drift {drift:.2e}", b2.lo, b2.hi, b2.lambda_1_alpha / 3.0),
    )
}

fn asymptotics() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    let factors = [1e-1, 1e-2, 1e-3, 1e-4];
    for alpha in [1.0, 5.0, 20.0] {
        let lo = estimate_lambda_star(3, alpha, 3.0, 1000, 1e-4)?.lo;
        let mut ratios = Vec::new();
        for f in factors {
            let spec = ProblemSpec::radial(3, alpha, 3.0, f * lo);
            ratios.push(asymptotic_ratio(&minimal_solution(&spec, 1000, &IterOptions::default())?)?);
        }
        let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
        let last = *ratios.last().unwrap();
        pass &= monotone && last <= 0.05;
        detail.push(format!("α={alpha}: {}", ratios.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(" ")));
    }
    outcome(pass, detail.join("; "))
}

fn bubble_exactness() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in [3, 4] {
        for alpha in [0.0, 1.0, 2.0] {
            for theta in [0.5, 1.0, 2.0] {
                let p = BubbleParams::new(n, alpha).with_theta(theta);
                for k in 1..=20 {
                    worst = worst.max(bubble_residual(0.1 * k as f64, &p).abs());
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("max residual {worst:.2e}"))
}

fn sobolev_consistency() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, alpha) in [(3, 0.0), (3, 2.0), (4, 1.0)] {
        let quad = sobolev_constants(n, alpha, 512)?.s_alpha;
        let disc = discrete_sobolev_minimum(n, alpha, 4000, 2.0)?.quotient;
        let rel = (disc - quad).abs() / quad;
        pass &= rel <= 0.02;
        detail.push(format!("({n},{alpha}): {quad:.5} vs {disc:.5} ({rel:.2e})"));
    }
    outcome(pass, detail.join("; "))
}

fn two_radial_solutions() -> Result<Outcome> {
    let lo = estimate_lambda_star(3, 2.0, 3.0, 1000, 1e-6)?.lo;
    let spec = ProblemSpec::radial(3, 2.0, 3.0, lo / 10.0);
    let pair = mp_second_radial(&spec, 1000, &MPConfig::default())?;
    let (lm, mp) = (&pair.local_min.record, &pair.mountain_pass);
    let pass = lm.energy < 0.0
        && mp.energy > 0.0
        && lm.residual_sup <= 1e-8
        && mp.residual_sup <= 1e-8
        && pair.separation > 1e-3;
    outcome(
        pass,
        format!(
            "J(local min) = {:.5e} (res {:.1e}), MP level {:.5e} (res {:.1e}), separation {:.3}",
            lm.energy, lm.residual_sup, mp.energy, mp.residual_sup, pair.separation
        ),
    )
}

fn expansions() -> Result<Outcome> {
    let eps = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, alpha) in [(7, 1.0), (6, 2.0), (3, 2.0)] {
        let p = BubbleParams::new(n, alpha);
        let mut parts = Vec::new();
        for which in [BubbleIntegral::Grad, BubbleIntegral::Crit, BubbleIntegral::Two] {
            let (expected, _) = which.rate(n, alpha);
            let slope = observed_rate(&p, which, &eps)?;
            let rel = (slope - expected).abs() / expected;
            pass &= rel <= 0.15;
            parts.push(format!("{} {slope:.3}/{expected:.3}", which.name()));
        }
        detail.push(format!("({n},{alpha}) {}", parts.join(" ")));
    }
    outcome(pass, detail.join("; "))
}

fn threshold() -> Result<Outcome> {
    let lo = estimate_lambda_star(3, 1.0, 7.0, 1000, 1e-6)?.lo;
    let rows = threshold_check(3, 1.0, lo / 10.0, &[1e-3, 1e-4], 1000, &MPConfig::default())?;
    let (a, b) = (rows[0].margin, rows[1].margin);
    outcome(
        a > 0.0 && b > a,
        format!("c0 = {:.5}, margin {a:.4} at ε=1e-3, {b:.4} at ε=1e-4", rows[0].c0),
    )
}

fn gap_between(report: &LevelReport) -> Option<(f64, f64, f64)> {
    let find = |class: &str| report.entries.iter().find(|e| e.class == class);
    let (r, a) = (find("radial")?, find("axial")?);
    Some((r.level, a.level, r.tolerance.max(a.tolerance)))
}

fn symmetry_breaking() -> Result<Outcome> {
    let settings = LevelSettings::default();
    let cfg = MPConfig::default();
    let hi = level_ordering_report(2, 20.0, 1e-3, 3.0, &[], true, &settings, &cfg)?;
    let lo = level_ordering_report(2, 0.0, 1e-3, 3.0, &[], true, &settings, &cfg)?;
    let (Some((r20, a20, t20)), Some((r0, a0, t0))) = (gap_between(&hi), gap_between(&lo)) else {
        return outcome(false, format!("missing entries: {:?} {:?}", hi.missing, lo.missing));
    };
    let broken = r20 - a20 > 3.0 * t20;
    let coincide = (r0 - a0).abs() <= t0.max(1e-9 * r0.abs());
    outcome(
        broken && coincide,
        format!(
            "α=20: radial {r20:.6e}, axial {a20:.6e}, tol {t20:.2e}; α=0: radial {r0:.10e}, axial {a0:.10e}, tol {t0:.2e}"
        ),
    )
}

fn multiplicity() -> Result<Outcome> {
    let report = level_ordering_report(4, 30.0, 1e-3, 2.0, &[2], true, &LevelSettings::default(), &MPConfig::default())?;
    let count = report.distinct_count();
    let listed = report
        .entries
        .iter()
        .map(|e| format!("{}{} {:.4e}", e.class, e.l.map(|l| format!("({l})")).unwrap_or_default(), e.level))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        count >= 3 && report.level_localmin.is_some_and(|l| l <= 0.0),
        format!("{count} distinct: {listed}"),
    )
}

fn kelvin() -> Result<Outcome> {
    let spec = ExteriorSpec { n: 3, beta: 0.0, p: 5.0, a: 0.05 };
    let alpha = kelvin_exponent(spec.n, spec.beta, spec.p);
    let identity = kelvin_exponent(3, beta_for_alpha(3, 5.0, alpha), 5.0) == alpha
        && [0.5, 1.0, 2.0, 7.25]
            .iter()
            .all(|&a| kelvin_exponent(3, beta_for_alpha(3, 5.0, a), 5.0) == a);
    let cfg = MPConfig::default();
    let mut residuals = Vec::new();
    let mut boundary = true;
    for m in [500, 1000, 2000] {
        let sol = exterior_solve(&spec, m, &cfg)?;
        let Some(first) = sol.solutions.first() else {
            return outcome(false, format!("no ball solution at M={m}: {:?}", sol.notes));
        };
        boundary &= first.exterior.radii[0] == 1.0
            && first.exterior.values[0] == spec.a
            && *first.ball_u.values.last().unwrap() == spec.a;
        residuals.push(first.exterior_residual);
    }
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = identity && boundary && ratios.iter().all(|r| (3.5..=4.5).contains(r));
    outcome(
        pass,
        format!(
            "identity {identity}, boundary {boundary}, residuals {:.2e} {:.2e} {:.2e}, ratios {:.3} {:.3}",
            residuals[0], residuals[1], residuals[2], ratios[0], ratios[1]
        ),
    )
}

fn main() {
    type Check = fn() -> Result<Outcome>;
    let checks: [(&str, Check, u64); 12] = [
        ("torsion closed form", torsion, 1),
        ("principal eigenvalue", eigenvalue, 5),
        ("lambda* bracket", lambda_star, 30),
        ("minimal branch asymptotics", asymptotics, 30),
        ("bubble exactness", bubble_exactness, 1),
        ("Sobolev constant consistency", sobolev_consistency, 60),
        ("two radial solutions", two_radial_solutions, 60),
        ("bubble energy expansions", expansions, 60),
        ("threshold below c0", threshold, 30),
        ("axial level below radial", symmetry_breaking, 300),
        ("multiplicity count", multiplicity, 600),
        ("Kelvin correspondence", kelvin, 10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "{} {:>2} {name}: {detail} [{:.2} s, budget {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {} of {} criteria passed", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
