//! Solver outputs against independently computed references.

use henon_core::branch::{estimate_lambda_star, minimal_solution, IterOptions};
use henon_core::domain::{ProblemSpec, RadialGrid};
use henon_core::mountain_pass::{mp_second_radial, MPConfig};
use henon_core::radial::assemble_radial_operator;

/// Ground state of −Δu = r^α u^p at λ = 0 by normalized nonlinear inverse
/// iteration; returns the Nehari level (½ − 1/(p+1)) Q^{(p+1)/(p−1)}.
fn nehari_level(n: usize, alpha: f64, p: f64, m: usize) -> f64 {
    let op = assemble_radial_operator(RadialGrid::new(m), n);
    let ra = op.r_alpha(alpha);
    let mut v = vec![1.0f64; op.dim()];
    for _ in 0..500 {
        let rhs: Vec<f64> = v.iter().zip(&ra).map(|(x, r)| r * x.powf(p)).collect();
        let next = op.solve(&rhs).unwrap();
        let s = next.iter().fold(0.0f64, |a, b| a.max(*b));
        let change = next.iter().zip(&v).fold(0.0f64, |a, (x, y)| a.max((x / s - y).abs()));
        v = next.iter().map(|x| x / s).collect();
        if change < 1e-13 {
            break;
        }
    }
    let mut full = v.clone();
    full.push(0.0);
    let pot: Vec<f64> = full.iter().zip(&ra).map(|(x, r)| r * x.abs().powf(p + 1.0)).collect();
    let q = op.dirichlet(&full) / op.integrate(&pot).powf(2.0 / (p + 1.0));
    (0.5 - 1.0 / (p + 1.0)) * q.powf((p + 1.0) / (p - 1.0))
}

#[test]
fn mountain_pass_at_zero_lambda_matches_nehari_level() {
    for (n, alpha, p) in [(3, 2.0, 3.0), (3, 0.0, 3.0), (4, 1.0, 2.0)] {
        let reference = nehari_level(n, alpha, p, 1000);
        let pair = mp_second_radial(&ProblemSpec::radial(n, alpha, p, 0.0), 1000, &MPConfig::default()).unwrap();
        let rel = (pair.level - reference).abs() / reference;
        assert!(rel < 1e-2, "N={n} α={alpha} p={p}: {} vs {reference}", pair.level);
    }
}

/// U'' = −U^p, U(0) = 1, U'(0) = 0, integrated by RK4 up to z.
fn shoot(p: f64, z: f64) -> f64 {
    let steps = 4000;
    let h = z / steps as f64;
    let f = |u: f64, du: f64| (du, -u.max(0.0).powf(p));
    let (mut u, mut du) = (1.0, 0.0);
    for _ in 0..steps {
        let k1 = f(u, du);
        let k2 = f(u + 0.5 * h * k1.0, du + 0.5 * h * k1.1);
        let k3 = f(u + 0.5 * h * k2.0, du + 0.5 * h * k2.1);
        let k4 = f(u + h * k3.0, du + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        du += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    u
}

#[test]
fn one_dimensional_lambda_star_matches_shooting() {
    // 1 + w(x) = s·U(x·√(λ s^{p−1})) with s = 1/U(z); λ(z) = z² U(z)^{p−1}.
    let p = 2.0;
    let lam = |z: f64| z * z * shoot(p, z).powf(p - 1.0);
    let (mut a, mut b) = (0.1, 1.5);
    assert!(shoot(p, b) > 0.0);
    for _ in 0..200 {
        let c = b - 0.618 * (b - a);
        let d = a + 0.618 * (b - a);
        if lam(c) > lam(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let reference = lam(0.5 * (a + b));
    let bracket = estimate_lambda_star(1, 0.0, p, 2000, 1e-7).unwrap();
    let rel = (bracket.mid() - reference).abs() / reference;
    assert!(rel < 1e-4, "{bracket:?} vs {reference}");
}

#[test]
fn critical_lambda_star_from_bubble_family() {
    // at p = 2*_α − 1 the bubbles 𝔲_θ solve the ball problem with boundary
    // value 𝔲_θ(1), so λ* = max_θ 𝔲_θ(1)^{p−1} = (N−2)(N+α)/4
    for (n, alpha) in [(3, 1.0), (3, 0.0)] {
        let nf = n as f64;
        let p = (nf + 2.0 + 2.0 * alpha) / (nf - 2.0);
        let reference = (nf - 2.0) * (nf + alpha) / 4.0;
        let b = estimate_lambda_star(n, alpha, p, 1000, 1e-7).unwrap();
        assert!((b.mid() - reference).abs() < 1e-3 * reference, "{b:?} vs {reference}");
    }
}

#[test]
fn mountain_pass_solution_lies_above_minimal() {
    let lo = estimate_lambda_star(3, 2.0, 3.0, 800, 1e-5).unwrap().lo;
    for f in [0.1, 0.5] {
        let spec = ProblemSpec::radial(3, 2.0, 3.0, f * lo);
        let w = minimal_solution(&spec, 800, &IterOptions::default()).unwrap();
        let pair = mp_second_radial(&spec, 800, &MPConfig::default()).unwrap();
        let a = spec.a();
        let v = pair.mountain_pass.field.values();
        for (vi, wi) in v.iter().zip(w.field.values()).take(800) {
            assert!(*vi > a * wi, "{vi} <= {}", a * wi);
        }
    }
}
