//! Radial finite-volume discretization of −Δ on the unit ball, linear solves,
//! the weighted principal eigenpair and the radial energy functional.
//!
//! Row i of the operator reads
//!
//! ```text
//! −[r_{i+½}^{N−1}(u_{i+1} − u_i) − r_{i−½}^{N−1}(u_i − u_{i−1})] / (h² r_i^{N−1})
//! ```
//!
//! with 2N(u_0 − u_1)/h² at the origin. Multiplying row i by the quadrature
//! weight w_i of [`RadialGrid::weights`] gives a symmetric matrix, so the
//! discrete energy below has exactly the operator residual as its gradient.

use serde::{Deserialize, Serialize};

use crate::domain::{ProblemSpec, RadialField, RadialGrid};
use crate::linalg::{dot, sup_norm, Tridiagonal};
use crate::quadrature::sphere_area;
use crate::{Error, Result};

/// Tridiagonal radial Laplacian on the unknowns r_0..r_M (Dirichlet at r = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct RadialOperator {
    pub grid: RadialGrid,
    pub n: usize,
    pub matrix: Tridiagonal,
    /// Quadrature weights on all M+2 nodes.
    pub weights: Vec<f64>,
}

pub fn assemble_radial_operator(grid: RadialGrid, n: usize) -> RadialOperator {
    assert!(n >= 1, "dimension must be positive");
    let m = grid.m();
    let h = grid.h();
    let size = grid.unknowns();
    let e = n as i32 - 1;
    let mut lower = vec![0.0; size];
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let nf = n as f64;
    diag[0] = 2.0 * nf / (h * h);
    upper[0] = -2.0 * nf / (h * h);
    for i in 1..=m {
        let ri = grid.r(i);
        let rm = (ri - 0.5 * h) / ri;
        let rp = (ri + 0.5 * h) / ri;
        let cm = rm.powi(e) / (h * h);
        let cp = rp.powi(e) / (h * h);
        lower[i] = -cm;
        diag[i] = cm + cp;
        upper[i] = if i < m { -cp } else { 0.0 };
    }
    RadialOperator {
        grid,
        n,
        matrix: Tridiagonal { lower, diag, upper },
        weights: grid.weights(n),
    }
}

impl RadialOperator {
    pub fn dim(&self) -> usize {
        self.grid.unknowns()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.apply(&u[..self.dim()])
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.matrix.solve(&rhs[..self.dim()])
    }

    /// r_i^α on every node (M+2 values).
    pub fn r_alpha(&self, alpha: f64) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.grid.r(i).powf(alpha)).collect()
    }

    /// Discrete Dirichlet form ω_N Σ r_{i+½}^{N−1}(u_{i+1} − u_i)²/h over all
    /// M+2 node values (the last one being the boundary value).
    pub fn dirichlet(&self, values: &[f64]) -> f64 {
        let h = self.grid.h();
        let e = self.n as i32 - 1;
        let s: f64 = values
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let rm = (i as f64 + 0.5) * h;
                rm.powi(e) * (w[1] - w[0]).powi(2) / h
            })
            .sum();
        sphere_area(self.n) * s
    }

    /// ω_N Σ w_i g_i over the M+2 nodes.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        sphere_area(self.n) * dot(&self.weights, g)
    }

    /// H¹ inner product ω_N uᵀ W A v on Dirichlet unknowns.
    pub fn h1_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let av = self.apply(v);
        sphere_area(self.n) * u.iter().zip(&av).zip(&self.weights).map(|((a, b), w)| a * b * w).sum::<f64>()
    }
}

/// Solve op·u = rhs with u(1) = 0.
pub fn solve_linear(op: &RadialOperator, rhs: &RadialField) -> Result<RadialField> {
    if rhs.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec("right-hand side is not finite".into()));
    }
    let u = op.solve(rhs.unknowns())?;
    Ok(RadialField::from_unknowns(op.grid, &u))
}

/// Discrete torsion function: op·e = r^α.
pub fn discrete_torsion(op: &RadialOperator, alpha: f64) -> Result<RadialField> {
    let rhs = RadialField {
        grid: op.grid,
        values: op.r_alpha(alpha),
    };
    solve_linear(op, &rhs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda_1_alpha: f64,
    /// Positive, normalized by ∫_B |x|^α φ² = 1.
    pub phi: RadialField,
    pub iterations: usize,
}

const EIGEN_CAP: usize = 10_000;

/// Smallest eigenvalue of op·φ = λ diag(r^α) φ by inverse power iteration.
pub fn principal_eigenpair(op: &RadialOperator, alpha: f64, tol: f64) -> Result<EigenPair> {
    assert!(tol > 0.0);
    let n = op.dim();
    let ra = op.r_alpha(alpha);
    let w = &op.weights;
    let mass = |u: &[f64]| -> f64 { (0..n).map(|i| w[i] * ra[i] * u[i] * u[i]).sum() };
    let mut phi: Vec<f64> = (0..n).map(|i| 1.0 - op.grid.r(i).powi(2)).collect();
    let mut lambda = f64::INFINITY;
    for it in 1..=EIGEN_CAP {
        let rhs: Vec<f64> = (0..n).map(|i| ra[i] * phi[i]).collect();
        let next = op.solve(&rhs)?;
        let norm = mass(&next).sqrt();
        phi = next.iter().map(|x| x / norm).collect();
        let a_phi = op.apply(&phi);
        let num: f64 = (0..n).map(|i| w[i] * phi[i] * a_phi[i]).sum();
        let new_lambda = num / mass(&phi);
        let converged = (new_lambda - lambda).abs() <= tol * new_lambda.abs();
        lambda = new_lambda;
        if converged {
            let scale = 1.0 / (sphere_area(op.n) * mass(&phi)).sqrt();
            let values: Vec<f64> = phi.iter().map(|x| x * scale).collect();
            return Ok(EigenPair {
                lambda_1_alpha: lambda,
                phi: RadialField::from_unknowns(op.grid, &values),
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: EIGEN_CAP,
        reason: "inverse power iteration did not settle".into(),
    })
}

/// Signed power |s|^{e−1} s.
pub fn signed_pow(s: f64, e: f64) -> f64 {
    s.abs().powf(e - 1.0) * s
}

/// The radial energy J_{λ,rad} and its gradient for one problem on one grid.
#[derive(Clone, Debug)]
pub struct RadialEnergy {
    pub op: RadialOperator,
    pub spec: ProblemSpec,
    pub a: f64,
    pub r_alpha: Vec<f64>,
}

impl RadialEnergy {
    pub fn new(spec: ProblemSpec, grid: RadialGrid) -> Self {
        let op = assemble_radial_operator(grid, spec.n);
        Self::with_operator(spec, op)
    }

    pub fn with_operator(spec: ProblemSpec, op: RadialOperator) -> Self {
        let r_alpha = op.r_alpha(spec.alpha);
        Self {
            a: spec.a(),
            op,
            spec,
            r_alpha,
        }
    }

    pub fn grid(&self) -> RadialGrid {
        self.op.grid
    }

    fn full(&self, v: &[f64]) -> Vec<f64> {
        let mut full = v[..self.op.dim()].to_vec();
        full.push(0.0);
        full
    }

    /// J on the unknown vector (boundary value implied).
    pub fn energy_unknowns(&self, v: &[f64]) -> f64 {
        let full = self.full(v);
        let p = self.spec.p;
        let pot: Vec<f64> = full
            .iter()
            .zip(&self.r_alpha)
            .map(|(x, ra)| ra * (x + self.a).abs().powf(p + 1.0))
            .collect();
        0.5 * self.op.dirichlet(&full) - self.op.integrate(&pot) / (p + 1.0)
    }

    /// op·v − r^α |v+a|^{p−1}(v+a) on the unknowns.
    pub fn residual_unknowns(&self, v: &[f64]) -> Vec<f64> {
        let av = self.op.apply(v);
        av.iter()
            .enumerate()
            .map(|(i, x)| x - self.r_alpha[i] * signed_pow(v[i] + self.a, self.spec.p))
            .collect()
    }

    /// Derivative of the nonlinearity, p r^α |v+a|^{p−1}, on the unknowns.
    pub fn nonlinearity_derivative(&self, v: &[f64]) -> Vec<f64> {
        (0..self.op.dim())
            .map(|i| self.spec.p * self.r_alpha[i] * (v[i] + self.a).abs().powf(self.spec.p - 1.0))
            .collect()
    }

    /// Newton correction: solves (op − diag(f'(v))) δ = −residual.
    pub fn newton_correction(&self, v: &[f64]) -> Result<Vec<f64>> {
        let res = self.residual_unknowns(v);
        let d = self.nonlinearity_derivative(v);
        let mut jac = self.op.matrix.clone();
        for (j, dj) in jac.diag.iter_mut().zip(&d) {
            *j -= dj;
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        Ok(jac.to_band().lu()?.solve(&rhs))
    }
}

/// J_{λ,rad}(v) = ½∫|∇v|² − 1/(p+1) ∫ |x|^α |v + a|^{p+1}.
pub fn energy_radial(v: &RadialField, spec: &ProblemSpec) -> f64 {
    RadialEnergy::new(*spec, v.grid).energy_unknowns(v.unknowns())
}

/// Discrete gradient op·v − |x|^α |v+a|^{p−1}(v+a); zero on the boundary node.
pub fn gradient_radial(v: &RadialField, spec: &ProblemSpec) -> RadialField {
    let res = RadialEnergy::new(*spec, v.grid).residual_unknowns(v.unknowns());
    RadialField::from_unknowns(v.grid, &res)
}

/// Sup-norm of the radial residual.
pub fn residual_sup(v: &RadialField, spec: &ProblemSpec) -> f64 {
    sup_norm(&gradient_radial(v, spec).values)
}

/// Discrete weighted Sobolev quotient
/// ∫|∇u|² / (∫|x|^α |u|^{2*_α})^{2/2*_α} of a Dirichlet field.
pub fn sobolev_quotient(op: &RadialOperator, alpha: f64, values: &[f64]) -> f64 {
    let ts = 2.0 * (op.n as f64 + alpha) / (op.n as f64 - 2.0);
    let ra = op.r_alpha(alpha);
    let pot: Vec<f64> = values.iter().zip(&ra).map(|(u, r)| r * u.abs().powf(ts)).collect();
    op.dirichlet(values) / op.integrate(&pot).powf(2.0 / ts)
}

/// Result of [`discrete_sobolev_minimum`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSobolev {
    pub quotient: f64,
    pub epsilon: f64,
    /// Concentration radius ε^{1/(α+2)} in units of h.
    pub radius_over_h: f64,
}

/// Minimizes the discrete Sobolev quotient on the ball over cutoff bubbles whose
/// concentration radius spans at least `min_cells` grid cells. Unconstrained
/// discrete minimization concentrates on a single cell and undershoots the
/// continuum constant, so the search is restricted to grid-resolved profiles.
pub fn discrete_sobolev_minimum(n: usize, alpha: f64, m: usize, min_cells: f64) -> Result<DiscreteSobolev> {
    use crate::closed_forms::{cutoff_bubble, BubbleParams};
    if n < 3 {
        return Err(Error::InvalidSpec(format!("Sobolev quotient needs N >= 3, got {n}")));
    }
    let grid = RadialGrid::new(m);
    let op = assemble_radial_operator(grid, n);
    let k = alpha + 2.0;
    let params = BubbleParams::new(n, alpha);
    let quotient_at = |log_eps: f64| -> f64 {
        let p = params.with_epsilon(log_eps.exp());
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| cutoff_bubble(r, &p)).collect();
        *values.last_mut().unwrap() = 0.0;
        sobolev_quotient(&op, alpha, &values)
    };
    // concentration radius δ = ε^{1/k} between min_cells·h and 1/4
    let lo = k * (min_cells * grid.h()).ln();
    let hi = k * 0.25f64.ln();
    if !(lo < hi) {
        return Err(Error::Unresolved {
            scale: min_cells * grid.h(),
            resolvable: 0.25,
        });
    }
    let (x, q) = golden_min(quotient_at, lo, hi, 1e-6);
    Ok(DiscreteSobolev {
        quotient: q,
        epsilon: x.exp(),
        radius_over_h: (x / k).exp() / grid.h(),
    })
}

/// Golden-section search of a unimodal function on [a, b].
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::torsion_e_alpha;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_stencil_is_standard() {
        let g = RadialGrid::new(9);
        let op = assemble_radial_operator(g, 1);
        let h2 = g.h() * g.h();
        for i in 1..g.m() {
            assert!((op.matrix.lower[i] * h2 + 1.0).abs() < 1e-12);
            assert!((op.matrix.diag[i] * h2 - 2.0).abs() < 1e-12);
            assert!((op.matrix.upper[i] * h2 + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parabola_gives_two_n() {
        for n in 1..=6 {
            let g = RadialGrid::new(200);
            let op = assemble_radial_operator(g, n);
            let u: Vec<f64> = g.nodes().iter().map(|r| 1.0 - r * r).collect();
            for (i, v) in op.apply(&u).iter().enumerate() {
                let hh = g.h() * g.h();
                assert!((v - 2.0 * n as f64).abs() < 10.0 * n as f64 * hh / g.r(i.max(1)).powi(2), "N={n} i={i} {v}");
            }
        }
    }

    #[test]
    fn m_matrix_sign_pattern() {
        for n in 1..=10 {
            for &m in &[8usize, 100, 10_000] {
                let op = assemble_radial_operator(RadialGrid::new(m), n);
                let t = &op.matrix;
                for i in 0..t.len() {
                    let off_l = if i > 0 { t.lower[i] } else { 0.0 };
                    let off_u = if i + 1 < t.len() { t.upper[i] } else { 0.0 };
                    assert!(off_l <= 0.0 && off_u <= 0.0);
                    let row = t.diag[i] + off_l + off_u;
                    assert!(row >= -1e-9 * t.diag[i], "N={n} M={m} row {i}: {row}");
                }
                let last = t.len() - 1;
                assert!(t.diag[last] + t.lower[last] > 0.0);
            }
        }
    }

    #[test]
    fn weighted_matrix_is_symmetric() {
        let g = RadialGrid::new(50);
        let op = assemble_radial_operator(g, 4);
        let w = &op.weights;
        for i in 0..g.m() {
            let a = w[i] * op.matrix.upper[i];
            let b = w[i + 1] * op.matrix.lower[i + 1];
            assert!((a - b).abs() < 1e-12 * a.abs());
        }
    }

    #[test]
    fn torsion_matches_closed_form() {
        let g = RadialGrid::new(400);
        let op = assemble_radial_operator(g, 3);
        let e = discrete_torsion(&op, 2.0).unwrap();
        for i in 0..g.len() {
            let exact = torsion_e_alpha(g.r(i), 3, 2.0);
            assert!((e.values[i] - exact).abs() < 1e-4);
        }
        let zero = solve_linear(&op, &RadialField::zeros(g)).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn eigenvalues_converge() {
        let op = assemble_radial_operator(RadialGrid::new(400), 1);
        let ep = principal_eigenpair(&op, 0.0, 1e-12).unwrap();
        assert!((ep.lambda_1_alpha - PI * PI / 4.0).abs() < 1e-4);
        let op = assemble_radial_operator(RadialGrid::new(400), 3);
        let ep = principal_eigenpair(&op, 0.0, 1e-12).unwrap();
        assert!((ep.lambda_1_alpha - PI * PI).abs() < 1e-3 * PI * PI);
        let vals = &ep.phi.values;
        assert!(vals[..vals.len() - 1].iter().all(|v| *v > 0.0));
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        let ra = op.r_alpha(0.0);
        let sq: Vec<f64> = vals.iter().zip(&ra).map(|(v, r)| v * v * r).collect();
        assert!((op.integrate(&sq) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_of_zero_field() {
        let spec = ProblemSpec::radial(3, 2.0, 3.0, 0.25);
        let g = RadialGrid::new(800);
        let j0 = energy_radial(&RadialField::zeros(g), &spec);
        let a = spec.a();
        let exact = -(a.powf(4.0) / 4.0) * 4.0 * PI / 5.0;
        assert!(j0 < 0.0);
        assert!((j0 - exact).abs() < 1e-4 * exact.abs());
    }

    #[test]
    fn gradient_matches_directional_derivative() {
        let spec = ProblemSpec::radial(3, 1.0, 3.0, 0.3);
        let g = RadialGrid::new(60);
        let en = RadialEnergy::new(spec, g);
        let v: Vec<f64> = (0..g.unknowns()).map(|i| (1.0 - g.r(i)).powi(2) * 0.7).collect();
        let d: Vec<f64> = (0..g.unknowns()).map(|i| (3.0 * g.r(i)).sin()).collect();
        let t = 1e-5;
        let plus: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let minus: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a - t * b).collect();
        let fd = (en.energy_unknowns(&plus) - en.energy_unknowns(&minus)) / (2.0 * t);
        let res = en.residual_unknowns(&v);
        let mut wres: Vec<f64> = res.iter().zip(&en.op.weights).map(|(r, w)| r * w).collect();
        wres.push(0.0);
        let mut full_d = d.clone();
        full_d.push(0.0);
        let exact = sphere_area(3) * dot(&wres, &full_d);
        assert!((fd - exact).abs() < 1e-7 * exact.abs());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, f) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6 && (f - 1.0).abs() < 1e-10);
    }
}
