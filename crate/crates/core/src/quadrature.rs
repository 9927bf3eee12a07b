//! Gauss–Legendre rules and composite integration helpers.

use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over [a, b] with one application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule on `panels` equal sub-intervals of [a, b].
    pub fn composite<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                let hi = if k + 1 == panels { b } else { lo + h };
                self.integrate(lo, hi, &f)
            })
            .sum()
    }

    /// Integrate over [a, b] with breakpoints clustered geometrically around
    /// `scale`: [a, scale·2^-levels], …, [scale/2, scale], [scale, 2·scale], … up to b.
    /// Each geometric piece is split into `panels_per_piece` equal panels.
    pub fn graded<F: Fn(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        scale: f64,
        panels_per_piece: usize,
        f: F,
    ) -> f64 {
        let mut breaks = vec![a];
        let mut x = scale;
        let mut down = Vec::new();
        for _ in 0..60 {
            if x <= a {
                break;
            }
            down.push(x);
            x *= 0.5;
            if x < scale * 1e-12 {
                break;
            }
        }
        down.reverse();
        breaks.extend(down.into_iter().filter(|&t| t > a && t < b));
        let mut x = scale * 2.0;
        while x < b {
            if x > a {
                breaks.push(x);
            }
            x *= 2.0;
        }
        breaks.push(b);
        breaks.dedup_by(|p, q| (*p - *q).abs() <= f64::EPSILON * q.abs().max(1e-300));
        breaks
            .windows(2)
            .map(|w| self.composite(w[0], w[1], panels_per_piece, &f))
            .sum()
    }

    /// Integrate over [0, ∞) with the substitution s = r/(1+r) and a composite
    /// rule on `panels` panels in s.
    pub fn half_line<F: Fn(f64) -> f64>(&self, panels: usize, f: F) -> f64 {
        self.composite(0.0, 1.0, panels, |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - s;
            let r = s / one_minus;
            f(r) / (one_minus * one_minus)
        })
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Surface area of the unit sphere S^{n-1} ⊂ ℝ^n (n ≥ 1); ω_1 = 2 counts the two
/// endpoints of the interval.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n as f64 - 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let g = GaussLegendre::new(8);
        let w: f64 = g.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
        let v = g.integrate(0.0, 1.0, |x| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn half_line_algebraic_tail() {
        let g = GaussLegendre::new(8);
        // ∫_0^∞ dr / (1+r)^3 = 1/2
        let v = g.half_line(64, |r| (1.0 + r).powi(-3));
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn graded_resolves_narrow_peaks() {
        let g = GaussLegendre::new(10);
        let eps: f64 = 1e-6;
        // ∫_0^1 eps/(eps^2 + x^2) dx = atan(1/eps)
        let v = g.graded(0.0, 1.0, eps, 4, |x| eps / (eps * eps + x * x));
        assert!((v - (1.0 / eps).atan()).abs() < 1e-12);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }
}
