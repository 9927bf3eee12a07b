//! Explicit formulas: torsion functions, critical exponents, the extremal bubble
//! family, weighted Sobolev constants and integrals of cutoff bubbles.

use serde::{Deserialize, Serialize};

use crate::quadrature::{sphere_area, GaussLegendre};
use crate::{Error, Result};

/// Critical exponents 2*, 2*_α and (optionally) 2_l.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub two_star: f64,
    pub two_star_alpha: f64,
    pub two_l: Option<f64>,
}

/// 2* = 2N/(N−2), 2*_α = 2(N+α)/(N−2) for N ≥ 3 (infinite for N = 1, 2), and
/// 2_l = 2(l+1)/(l−1) when `l` is given.
pub fn critical_exponents(n: usize, alpha: f64, l: Option<usize>) -> CriticalExponents {
    let nf = n as f64;
    let (two_star, two_star_alpha) = if n >= 3 {
        (2.0 * nf / (nf - 2.0), 2.0 * (nf + alpha) / (nf - 2.0))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let two_l = l.map(|l| {
        let lf = l as f64;
        2.0 * (lf + 1.0) / (lf - 1.0)
    });
    CriticalExponents {
        two_star,
        two_star_alpha,
        two_l,
    }
}

/// Radial solution of −Δe = |x|^α in the unit ball with e = 0 on the boundary:
/// e_α(r) = (1 − r^{α+2}) / ((α+2)(N+α)).
pub fn torsion_e_alpha(r: f64, n: usize, alpha: f64) -> f64 {
    (1.0 - r.powf(alpha + 2.0)) / ((alpha + 2.0) * (n as f64 + alpha))
}

/// |e_α|_∞ = e_α(0).
pub fn e_alpha_max(n: usize, alpha: f64) -> f64 {
    1.0 / ((alpha + 2.0) * (n as f64 + alpha))
}

/// Lower bound (p−1)^{p−1} / (p^p |e|_∞) below which the problem is solvable.
pub fn lambda_star_lower(p: f64, e_sup: f64) -> f64 {
    (p - 1.0).powf(p - 1.0) / (p.powf(p) * e_sup)
}

/// Certified bounds on λ*: the solvability bound from the torsion function and
/// the nonexistence bound λ_{1,α}/p.
pub fn lambda_star_bounds(n: usize, alpha: f64, p: f64, lambda_1_alpha: f64) -> Result<(f64, f64)> {
    let lower = lambda_star_lower(p, e_alpha_max(n, alpha));
    let upper = lambda_1_alpha / p;
    if !(lower < upper) {
        return Err(Error::InconsistentBounds { lower, upper });
    }
    Ok((lower, upper))
}

/// Parameters of the bubble 𝔲_{α,θ} and of the cutoff bubble u_{α,ε}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub n: usize,
    pub alpha: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub cutoff_inner: f64,
}

impl BubbleParams {
    pub fn new(n: usize, alpha: f64) -> Self {
        Self {
            n,
            alpha,
            theta: 1.0,
            epsilon: 1.0,
            cutoff_inner: 0.5,
        }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidSpec(format!("bubbles need N >= 3, got {}", self.n)));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidSpec(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.theta > 0.0) || !(self.epsilon > 0.0) {
            return Err(Error::InvalidSpec("theta and epsilon must be positive".into()));
        }
        if !(self.cutoff_inner > 0.0 && self.cutoff_inner < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "cutoff plateau radius must lie in (0, 1), got {}",
                self.cutoff_inner
            )));
        }
        Ok(())
    }

    /// k = α + 2.
    fn k(&self) -> f64 {
        self.alpha + 2.0
    }

    /// q = (N−2)/(α+2).
    fn q(&self) -> f64 {
        (self.n as f64 - 2.0) / self.k()
    }

    fn cutoff_outer(&self) -> f64 {
        0.5 * (1.0 + self.cutoff_inner)
    }
}

/// 𝔲_{α,θ}(x) = [√(θ(N−2)(N+α)) / (θ + |x|^{α+2})]^{(N−2)/(α+2)}.
pub fn henon_bubble(x_norm: f64, params: &BubbleParams) -> f64 {
    bubble_with_derivatives(x_norm, params).0
}

/// (𝔲, 𝔲', 𝔲'') of the explicit bubble as functions of r = |x|.
pub fn bubble_with_derivatives(r: f64, params: &BubbleParams) -> (f64, f64, f64) {
    let nf = params.n as f64;
    let (k, q, theta) = (params.k(), params.q(), params.theta);
    let c = (theta * (nf - 2.0) * (nf + params.alpha)).sqrt();
    let rk = r.powf(k);
    let g = theta + rk;
    let u = (c / g).powf(q);
    // r^{k-1} and r^{k-2} = r^α, guarded at the origin
    let rk1 = if r > 0.0 { rk / r } else if k == 1.0 { 1.0 } else { 0.0 };
    let rk2 = r.powf(params.alpha);
    let du = -q * k * u * rk1 / g;
    let d2u = -q * k * u * ((k - 1.0) * rk2 / g - (q + 1.0) * k * rk1 * rk1 / (g * g));
    (u, du, d2u)
}

/// −Δ𝔲 − r^α 𝔲^{2*_α−1} from the analytic derivatives, r > 0.
pub fn bubble_residual(r: f64, params: &BubbleParams) -> f64 {
    let nf = params.n as f64;
    let (u, du, d2u) = bubble_with_derivatives(r, params);
    let pow = critical_exponents(params.n, params.alpha, None).two_star_alpha - 1.0;
    -(d2u + (nf - 1.0) / r * du) - r.powf(params.alpha) * u.powf(pow)
}

/// Constants of the critical bubble analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub n: usize,
    pub alpha: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k5: f64,
    pub s_alpha: f64,
    pub c0: f64,
    /// Relative change of S_α between `panels` and `panels/2`.
    pub quadrature_error: f64,
}

/// c_0 = S^{(N+α)/(α+2)} (α+2) / (2(N+α)).
pub fn c0_threshold(n: usize, alpha: f64, s_alpha: f64) -> f64 {
    let nf = n as f64;
    s_alpha.powf((nf + alpha) / (alpha + 2.0)) * (alpha + 2.0) / (2.0 * (nf + alpha))
}

/// Regime of the L² integral of the cutoff bubble relative to α = N − 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoRegime {
    Below,
    Borderline,
    Above,
}

pub fn two_regime(n: usize, alpha: f64) -> TwoRegime {
    let d = alpha - (n as f64 - 4.0);
    if d.abs() < 1e-12 {
        TwoRegime::Borderline
    } else if d < 0.0 {
        TwoRegime::Below
    } else {
        TwoRegime::Above
    }
}

const GAUSS_ORDER: usize = 16;

fn constants_at(n: usize, alpha: f64, panels: usize) -> (f64, f64, f64, f64) {
    let g = GaussLegendre::new(GAUSS_ORDER);
    let nf = n as f64;
    let k = alpha + 2.0;
    let omega = sphere_area(n);
    let e_crit = 2.0 * (nf + alpha) / k;
    // evaluate (1 + r^k)^{-e} as exp(-e·ln(1 + r^k)) for large r without overflow
    let tail = |r: f64, e: f64| (-e * (r.powf(k)).ln_1p()).exp();
    let k1 = (nf - 2.0).powi(2)
        * omega
        * g.half_line(panels, |r| r.powf(2.0 * alpha + 2.0 + nf - 1.0) * tail(r, e_crit));
    let k2_int = omega * g.half_line(panels, |r| r.powf(alpha + nf - 1.0) * tail(r, e_crit));
    let k2 = k2_int.powf((nf - 2.0) / (nf + alpha));
    let k3 = match two_regime(n, alpha) {
        TwoRegime::Below => {
            omega * g.half_line(panels, |r| r.powf(alpha + nf - 1.0) * tail(r, 2.0 * (nf - 2.0) / k))
        }
        TwoRegime::Borderline => omega / (nf - 2.0),
        TwoRegime::Above => {
            let params = BubbleParams::new(n, alpha);
            omega
                * g.graded(0.0, params.cutoff_outer(), 0.25, 4, |r| {
                    let c = cutoff(r, &params).0;
                    c * c * r.powf(alpha - nf + 3.0)
                })
        }
    };
    let k5 = omega
        * g.half_line(panels, |r| {
            r.powf(alpha + nf - 1.0) * tail(r, (nf + 2.0 + 2.0 * alpha) / k)
        });
    (k1, k2, k3, k5)
}

/// K1, K2, K3, K5, S_α = K1/K2 and c_0 by quadrature over [0, ∞) after the
/// substitution s = r/(1+r), on `panels` Gauss panels. The result is compared
/// with the same computation on `panels/2` panels.
pub fn sobolev_constants(n: usize, alpha: f64, panels: usize) -> Result<ConstantsTable> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("Sobolev constants need N >= 3, got {n}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidSpec(format!("alpha must be >= 0, got {alpha}")));
    }
    let panels = panels.max(4);
    let (k1, k2, k3, k5) = constants_at(n, alpha, panels);
    let (k1c, k2c, _, _) = constants_at(n, alpha, panels / 2);
    let s_alpha = k1 / k2;
    let quadrature_error = ((k1c / k2c) - s_alpha).abs() / s_alpha;
    if !(quadrature_error < 1e-8) || !s_alpha.is_finite() {
        return Err(Error::Quadrature(format!(
            "S_alpha not converged: relative change {quadrature_error:e} between {} and {panels} panels",
            panels / 2
        )));
    }
    Ok(ConstantsTable {
        n,
        alpha,
        k1,
        k2,
        k3,
        k5,
        s_alpha,
        c0: c0_threshold(n, alpha, s_alpha),
        quadrature_error,
    })
}

/// Radial C² cutoff: 1 on [0, ρ], 0 on [(1+ρ)/2, ∞), quintic smoothstep in
/// between. Returns (φ, φ').
pub fn cutoff(r: f64, params: &BubbleParams) -> (f64, f64) {
    let lo = params.cutoff_inner;
    let hi = params.cutoff_outer();
    if r <= lo {
        (1.0, 0.0)
    } else if r >= hi {
        (0.0, 0.0)
    } else {
        let w = hi - lo;
        let t = (r - lo) / w;
        let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
        (1.0 - s, -ds)
    }
}

/// U_ε(r) = ε^{q/2} (ε + r^k)^{−q} and its derivative.
fn scaled_bubble(r: f64, params: &BubbleParams) -> (f64, f64) {
    let (k, q, eps) = (params.k(), params.q(), params.epsilon);
    let rk = r.powf(k);
    let g = eps + rk;
    let u = eps.powf(0.5 * q) * g.powf(-q);
    let rk1 = if r > 0.0 { rk / r } else { 0.0 };
    (u, -q * k * u * rk1 / g)
}

/// The cutoff bubble u_{α,ε}(r) = φ(r) U_ε(r).
pub fn cutoff_bubble(r: f64, params: &BubbleParams) -> f64 {
    cutoff(r, params).0 * scaled_bubble(r, params).0
}

/// Which integral of the cutoff bubble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BubbleIntegral {
    /// ∫ |∇u|²
    Grad,
    /// ∫ |x|^α u^{2*_α}
    Crit,
    /// ∫ |x|^α u²
    Two,
    /// ∫ |x|^α u^{2*_α − 1}
    CritMinusOne,
}

impl BubbleIntegral {
    pub const ALL: [BubbleIntegral; 4] = [
        BubbleIntegral::Grad,
        BubbleIntegral::Crit,
        BubbleIntegral::Two,
        BubbleIntegral::CritMinusOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BubbleIntegral::Grad => "grad",
            BubbleIntegral::Crit => "crit",
            BubbleIntegral::Two => "two",
            BubbleIntegral::CritMinusOne => "crit_minus_one",
        }
    }

    /// Limit of the integral as ε → 0 (K1, K2' = K2^{2*_α/2}, 0, 0).
    pub fn limit(self, table: &ConstantsTable) -> f64 {
        let ts = critical_exponents(table.n, table.alpha, None).two_star_alpha;
        match self {
            BubbleIntegral::Grad => table.k1,
            BubbleIntegral::Crit => table.k2.powf(0.5 * ts),
            BubbleIntegral::Two | BubbleIntegral::CritMinusOne => 0.0,
        }
    }

    /// Rate of `integral − limit` as ε → 0: the exponent s in ε^s, and whether
    /// a |log ε| factor is present.
    pub fn rate(self, n: usize, alpha: f64) -> (f64, bool) {
        let nf = n as f64;
        let k = alpha + 2.0;
        let q = (nf - 2.0) / k;
        match self {
            BubbleIntegral::Grad => (q, false),
            BubbleIntegral::Crit => ((nf + alpha) / k, false),
            BubbleIntegral::Two => match two_regime(n, alpha) {
                TwoRegime::Below => (1.0, false),
                TwoRegime::Borderline => (1.0, true),
                TwoRegime::Above => (q, false),
            },
            BubbleIntegral::CritMinusOne => (0.5 * q, false),
        }
    }
}

/// Smallest admissible concentration radius ε^{1/(α+2)}.
const RESOLVABLE_SCALE: f64 = 1e-10;
const PANELS_PER_PIECE: usize = 4;

/// ∫_B of the requested quantity for u_{α,ε}, by graded radial quadrature.
pub fn bubble_integrals(params: &BubbleParams, which: BubbleIntegral) -> Result<f64> {
    params.check()?;
    let scale = params.epsilon.powf(1.0 / params.k());
    if scale < RESOLVABLE_SCALE {
        return Err(Error::Unresolved {
            scale,
            resolvable: RESOLVABLE_SCALE,
        });
    }
    let nf = params.n as f64;
    let alpha = params.alpha;
    let ts = critical_exponents(params.n, alpha, None).two_star_alpha;
    let g = GaussLegendre::new(GAUSS_ORDER);
    let integrand = |r: f64| -> f64 {
        let (phi, dphi) = cutoff(r, params);
        let (u, du) = scaled_bubble(r, params);
        let w = r.powf(nf - 1.0);
        match which {
            BubbleIntegral::Grad => {
                let d = dphi * u + phi * du;
                d * d * w
            }
            BubbleIntegral::Crit => (phi * u).powf(ts) * r.powf(alpha) * w,
            BubbleIntegral::Two => (phi * u).powi(2) * r.powf(alpha) * w,
            BubbleIntegral::CritMinusOne => (phi * u).powf(ts - 1.0) * r.powf(alpha) * w,
        }
    };
    let inner = params.cutoff_inner;
    let outer = params.cutoff_outer();
    let omega = sphere_area(params.n);
    let core = g.graded(0.0, inner, scale.min(0.5 * inner), PANELS_PER_PIECE, integrand);
    let shell = g.composite(inner, outer, 32, integrand);
    Ok(omega * (core + shell))
}

/// `bubble_integrals(params, which) − which.limit(..)` evaluated without
/// cancellation: the deviation is written as integrals over the cutoff shell and
/// the exterior of the ball, using that U_ε has the ε-independent whole-space
/// integrals K1 and K2'.
pub fn bubble_integral_deviation(params: &BubbleParams, which: BubbleIntegral) -> Result<f64> {
    match which {
        BubbleIntegral::Two | BubbleIntegral::CritMinusOne => bubble_integrals(params, which),
        BubbleIntegral::Grad | BubbleIntegral::Crit => {
            params.check()?;
            let nf = params.n as f64;
            let alpha = params.alpha;
            let ts = critical_exponents(params.n, alpha, None).two_star_alpha;
            let g = GaussLegendre::new(GAUSS_ORDER);
            let inner = params.cutoff_inner;
            let outer = params.cutoff_outer();
            let shell = |r: f64| -> f64 {
                let (phi, dphi) = cutoff(r, params);
                let (u, du) = scaled_bubble(r, params);
                let w = r.powf(nf - 1.0);
                match which {
                    BubbleIntegral::Grad => {
                        let d = dphi * u + phi * du;
                        (d * d - du * du) * w
                    }
                    _ => (phi.powf(ts) - 1.0) * u.powf(ts) * r.powf(alpha) * w,
                }
            };
            let outside = |r: f64| -> f64 {
                let (u, du) = scaled_bubble(r, params);
                let w = r.powf(nf - 1.0);
                match which {
                    BubbleIntegral::Grad => du * du * w,
                    _ => u.powf(ts) * r.powf(alpha) * w,
                }
            };
            let near = g.composite(inner, outer, 32, shell);
            // ∫_{outer}^∞ with r = outer / s, s ∈ (0, 1]
            let far = g.composite(0.0, 1.0, 64, |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                let r = outer / s;
                outside(r) * outer / (s * s)
            });
            Ok(sphere_area(params.n) * (near - far))
        }
    }
}

/// Least-squares slope of log|y| against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "slope needs at least two points");
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Observed rate of `which` over the ε list: slope of log|deviation| against
/// log ε, or against log(ε |log ε|) in the borderline L² regime.
pub fn observed_rate(params: &BubbleParams, which: BubbleIntegral, eps: &[f64]) -> Result<f64> {
    let (_, with_log) = which.rate(params.n, params.alpha);
    let mut xs = Vec::with_capacity(eps.len());
    let mut ys = Vec::with_capacity(eps.len());
    for &e in eps {
        let d = bubble_integral_deviation(&params.with_epsilon(e), which)?;
        xs.push(if with_log { e * e.ln().abs() } else { e });
        ys.push(d);
    }
    Ok(loglog_slope(&xs, &ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponents() {
        let e = critical_exponents(3, 1.0, None);
        assert_eq!((e.two_star, e.two_star_alpha), (6.0, 8.0));
        let e = critical_exponents(4, 0.0, None);
        assert_eq!((e.two_star, e.two_star_alpha), (4.0, 4.0));
        assert_eq!(critical_exponents(6, 0.0, Some(3)).two_l, Some(4.0));
        assert!(critical_exponents(2, 1.0, None).two_star.is_infinite());
    }

    #[test]
    fn torsion_values() {
        assert_eq!(torsion_e_alpha(1.0, 3, 2.0), 0.0);
        assert!((torsion_e_alpha(0.0, 3, 2.0) - 0.05).abs() < 1e-15);
        assert!((torsion_e_alpha(0.0, 1, 0.0) - 0.5).abs() < 1e-15);
        assert!((e_alpha_max(3, 0.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!(e_alpha_max(3, 1.5) < e_alpha_max(3, 0.0));
        // direct substitution for N = 1: e(x) = (1 − x²)/2
        for &x in &[0.1, 0.4, 0.9] {
            assert!((torsion_e_alpha(x, 1, 0.0) - 0.5 * (1.0 - x * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_bounds() {
        let lo = lambda_star_lower(3.0, e_alpha_max(3, 2.0));
        assert!((lo - 4.0 / 27.0 * 20.0).abs() < 1e-12);
        let (lo, hi) = lambda_star_bounds(1, 0.0, 2.0, (PI / 2.0).powi(2)).unwrap();
        assert!((lo - 0.5).abs() < 1e-14);
        assert!((hi - (PI / 2.0).powi(2) / 2.0).abs() < 1e-14);
        assert!(matches!(
            lambda_star_bounds(3, 2.0, 3.0, 1.0),
            Err(Error::InconsistentBounds { .. })
        ));
        // doubling (α+2)(N+α) doubles the lower bound
        let a = lambda_star_lower(2.5, 0.1);
        let b = lambda_star_lower(2.5, 0.05);
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn bubble_values() {
        let p = BubbleParams::new(3, 0.0);
        // [√3 / 1]^{1/2}
        assert!((henon_bubble(0.0, &p) - 3f64.powf(0.25)).abs() < 1e-14);
        // away from the origin the profile vanishes like θ^{(N−2)/(2k)}
        let ratio = henon_bubble(0.7, &p.with_theta(1e-12)) / henon_bubble(0.7, &p.with_theta(1e-16));
        assert!((ratio - 10.0).abs() < 1e-6);
        for &r in &[0.1, 0.5, 1.3, 2.0] {
            assert!(bubble_residual(r, &p.with_theta(2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_match_classical_sobolev_constant() {
        let t = sobolev_constants(3, 0.0, 512).unwrap();
        let classical = 3.0 * (PI / 2.0).powf(4.0 / 3.0);
        assert!((t.s_alpha - classical).abs() < 1e-9 * classical);
        let t4 = sobolev_constants(4, 0.0, 512).unwrap();
        assert!((t4.c0 - t4.s_alpha.powi(2) / 4.0).abs() < 1e-12 * t4.c0);
        for (n, a) in [(3, 0.0), (3, 2.0), (5, 1.0), (6, 2.0), (7, 1.0)] {
            let t = sobolev_constants(n, a, 512).unwrap();
            for v in [t.k1, t.k2, t.k3, t.k5] {
                assert!(v > 0.0 && v.is_finite());
            }
        }
    }

    #[test]
    fn c0_arithmetic() {
        let s: f64 = 7.0;
        assert!((c0_threshold(3, 1.0, s) - s.powf(4.0 / 3.0) * 3.0 / 8.0).abs() < 1e-12);
        assert!(c0_threshold(3, 1.0, 7.5) > c0_threshold(3, 1.0, 7.0));
    }

    #[test]
    fn cutoff_shape() {
        let p = BubbleParams::new(3, 0.0);
        assert_eq!(cutoff(0.3, &p), (1.0, 0.0));
        assert_eq!(cutoff(0.8, &p), (0.0, 0.0));
        let (v, d) = cutoff(0.625, &p);
        assert!((v - 0.5).abs() < 1e-14 && d < 0.0);
    }

    #[test]
    fn deviation_is_consistent_with_direct_integral() {
        let t = sobolev_constants(3, 2.0, 512).unwrap();
        let p = BubbleParams::new(3, 2.0).with_epsilon(1e-2);
        for which in [BubbleIntegral::Grad, BubbleIntegral::Crit] {
            let direct = bubble_integrals(&p, which).unwrap() - which.limit(&t);
            let dev = bubble_integral_deviation(&p, which).unwrap();
            assert!((direct - dev).abs() < 1e-8 * which.limit(&t), "{which:?}: {direct} vs {dev}");
        }
    }

    #[test]
    fn unresolved_scale_is_reported() {
        let p = BubbleParams::new(3, 0.0).with_epsilon(1e-30);
        assert!(matches!(
            bubble_integrals(&p, BubbleIntegral::Two),
            Err(Error::Unresolved { .. })
        ));
    }
}
