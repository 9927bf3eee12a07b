//! Two-dimensional reductions of the ball problem.
//!
//! Both reduced classes live on a polar grid (r, φ) with r ∈ [0, 1] and φ in an
//! angular interval [0, Φ], carrying the measure C · r^{N−1} c(φ) dr dφ:
//!
//! - axial (functions of |x| and the angle θ to a fixed axis): Φ = π,
//!   c(θ) = sin^{N−2}θ, C = |S^{N−2}|;
//! - partial O(l) × O(N−l) (functions of s = |y|, t = |z|, with s = r cos φ,
//!   t = r sin φ): Φ = π/2, c(φ) = cos^{l−1}φ sin^{N−l−1}φ, C = |S^{l−1}||S^{N−l−1}|.
//!
//! The discrete Dirichlet form is a sum over grid edges. Radial edges carry
//! r_{i+½}^{N−1} s_j / h with s_j the exact integral of c over the angular cell
//! of node j, so profiles depending on r only reproduce the radial
//! discretization exactly. The origin is a single node joined to every node of
//! the first ring. The angular ends φ = 0, Φ get the natural (reflection)
//! closure of the variational form.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::{ProblemSpec, RadialField, RadialGrid, Symmetry};
use crate::linalg::{dot, sup_norm, BandMatrix, BorderedLu};
use crate::quadrature::{sphere_area, GaussLegendre};
use crate::radial::signed_pow;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanarClass {
    Axial,
    Quarter { l: usize },
}

impl PlanarClass {
    pub fn symmetry(self) -> Symmetry {
        match self {
            PlanarClass::Axial => Symmetry::Axial,
            PlanarClass::Quarter { l } => Symmetry::Partial(l),
        }
    }

    pub fn from_symmetry(s: Symmetry) -> Option<Self> {
        match s {
            Symmetry::Axial => Some(PlanarClass::Axial),
            Symmetry::Partial(l) => Some(PlanarClass::Quarter { l }),
            Symmetry::Radial => None,
        }
    }

    /// Upper end Φ of the angular interval.
    pub fn span(self) -> f64 {
        match self {
            PlanarClass::Axial => PI,
            PlanarClass::Quarter { .. } => 0.5 * PI,
        }
    }

    /// Angular density c(φ).
    pub fn density(self, n: usize, phi: f64) -> f64 {
        match self {
            PlanarClass::Axial => phi.sin().powi(n as i32 - 2),
            PlanarClass::Quarter { l } => phi.cos().powi(l as i32 - 1) * phi.sin().powi((n - l) as i32 - 1),
        }
    }

    /// Surface constant C.
    pub fn surface(self, n: usize) -> f64 {
        match self {
            PlanarClass::Axial => sphere_area(n - 1),
            PlanarClass::Quarter { l } => sphere_area(l) * sphere_area(n - l),
        }
    }
}

/// Polar grid: uniform radial nodes r_i = i h (i = 0..=Mr+1), angular nodes
/// 0 = φ_0 < … < φ_{Mφ} = Φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub class: PlanarClass,
    pub n: usize,
    pub radial: RadialGrid,
    pub angles: Vec<f64>,
}

impl PolarGrid {
    /// Angular nodes φ = Φ (ξ − κ sin(2πξ)/(2π)), ξ uniform; κ ∈ [0, 1) clusters
    /// nodes towards both ends (κ = 0 is uniform).
    pub fn new(class: PlanarClass, n: usize, mr: usize, mphi: usize, kappa: f64) -> Result<Self> {
        match class {
            PlanarClass::Axial if n < 2 => {
                return Err(Error::InvalidSpec("axial reduction needs N >= 2".into()));
            }
            PlanarClass::Quarter { l } if n < 4 || l >= n || n - l < 2 || n - l > l => {
                return Err(Error::InvalidSpec(format!(
                    "partial reduction needs N >= 4 and 2 <= N-l <= l, got N = {n}, l = {l}"
                )));
            }
            _ => {}
        }
        if mphi < 2 || !(0.0..1.0).contains(&kappa) {
            return Err(Error::InvalidSpec("angular grid needs Mphi >= 2 and 0 <= kappa < 1".into()));
        }
        let span = class.span();
        let angles = (0..=mphi)
            .map(|j| {
                let xi = j as f64 / mphi as f64;
                if j == mphi {
                    span
                } else {
                    span * (xi - kappa * (2.0 * PI * xi).sin() / (2.0 * PI))
                }
            })
            .collect();
        Ok(Self {
            class,
            n,
            radial: RadialGrid::new(mr),
            angles,
        })
    }

    pub fn mr(&self) -> usize {
        self.radial.m()
    }

    pub fn mphi(&self) -> usize {
        self.angles.len() - 1
    }

    /// Unknowns: the origin plus Mr × (Mφ+1) ring nodes.
    pub fn unknowns(&self) -> usize {
        1 + self.mr() * self.angles.len()
    }

    /// Index of ring node (i, j), 1 ≤ i ≤ Mr.
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.mr());
        1 + j * self.mr() + (i - 1)
    }

    /// (r, φ) of each unknown; the origin reports φ = 0.
    pub fn coords(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0)];
        for &phi in &self.angles {
            for i in 1..=self.mr() {
                out.push((self.radial.r(i), phi));
            }
        }
        out
    }

    /// Exact integrals of c over the angular cells of the nodes.
    pub fn angular_masses(&self) -> Vec<f64> {
        let g = GaussLegendre::new(12);
        let a = &self.angles;
        let m = a.len();
        (0..m)
            .map(|j| {
                let lo = if j == 0 { a[0] } else { 0.5 * (a[j - 1] + a[j]) };
                let hi = if j + 1 == m { a[m - 1] } else { 0.5 * (a[j] + a[j + 1]) };
                g.composite(lo, hi, 2, |phi| self.class.density(self.n, phi))
            })
            .collect()
    }

    /// Integrals of c between consecutive angular nodes.
    fn angular_edges(&self) -> Vec<f64> {
        let g = GaussLegendre::new(12);
        self.angles
            .windows(2)
            .map(|w| g.composite(w[0], w[1], 2, |phi| self.class.density(self.n, phi)))
            .collect()
    }
}

/// Node values on a [`PolarGrid`] (origin first, ring nodes with r inner).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    pub grid: PolarGrid,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: PolarGrid) -> Self {
        let n = grid.unknowns();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: PolarGrid, f: F) -> Self {
        let values = grid.coords().into_iter().map(|(r, phi)| f(r, phi)).collect();
        Self { grid, values }
    }

    /// Lift a radial field given on the same radial grid.
    pub fn lift(grid: PolarGrid, radial: &RadialField) -> Result<Self> {
        if radial.grid != grid.radial {
            return Err(Error::InvalidSpec("radial grid does not match the polar grid".into()));
        }
        let values = grid
            .coords()
            .iter()
            .enumerate()
            .map(|(k, _)| {
                if k == 0 {
                    radial.values[0]
                } else {
                    radial.values[1 + (k - 1) % grid.mr()]
                }
            })
            .collect();
        Ok(Self { grid, values })
    }

    /// (r, φ, value) rows including the Dirichlet ring r = 1.
    pub fn to_csv(&self) -> Result<String> {
        use crate::io::{csv_string, fmt_f64};
        let g = &self.grid;
        let mut rows = vec![vec![fmt_f64(0.0), fmt_f64(0.0), fmt_f64(self.values[0])]];
        for (j, &phi) in g.angles.iter().enumerate() {
            for i in 1..=g.mr() + 1 {
                let v = if i <= g.mr() { self.values[g.index(i, j)] } else { 0.0 };
                rows.push(vec![fmt_f64(g.radial.r(i)), fmt_f64(phi), fmt_f64(v)]);
            }
        }
        csv_string(&["r", "phi", "value"], &rows)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }
}

/// Edge of the Dirichlet form; `b = None` is a Dirichlet neighbour.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Edge {
    a: usize,
    b: Option<usize>,
    w: f64,
}

/// Assembled stiffness and lumped mass of one reduction.
#[derive(Clone, Debug)]
pub struct PlanarOperator {
    pub grid: PolarGrid,
    edges: Vec<Edge>,
    /// Lumped mass of each unknown (radial weight × angular cell integral).
    pub mass: Vec<f64>,
    /// Mass of the Dirichlet ring r = 1 (enters only constant terms).
    pub boundary_mass: f64,
    pub surface: f64,
}

pub fn assemble_planar_operator(grid: &PolarGrid) -> PlanarOperator {
    let n = grid.n;
    let mr = grid.mr();
    let h = grid.radial.h();
    let rw = grid.radial.weights(n);
    let s = grid.angular_masses();
    let ce = grid.angular_edges();
    let e = n as i32 - 1;
    let mut edges = Vec::new();
    let mut mass = vec![0.0; grid.unknowns()];
    mass[0] = rw[0] * s.iter().sum::<f64>();
    for (j, sj) in s.iter().enumerate() {
        for i in 0..=mr {
            let a = if i == 0 { 0 } else { grid.index(i, j) };
            let b = if i == mr { None } else { Some(grid.index(i + 1, j)) };
            let rm = (i as f64 + 0.5) * h;
            edges.push(Edge {
                a,
                b,
                w: rm.powi(e) * sj / h,
            });
            if i >= 1 {
                mass[a] = rw[i] * sj;
            }
        }
    }
    for (j, cj) in ce.iter().enumerate() {
        let dphi = grid.angles[j + 1] - grid.angles[j];
        for i in 1..=mr {
            let ri = grid.radial.r(i);
            edges.push(Edge {
                a: grid.index(i, j),
                b: Some(grid.index(i, j + 1)),
                w: h * ri.powi(n as i32 - 3) * cj / (dphi * dphi),
            });
        }
    }
    PlanarOperator {
        boundary_mass: rw[mr + 1] * s.iter().sum::<f64>(),
        surface: grid.class.surface(n),
        grid: grid.clone(),
        edges,
        mass,
    }
}

impl PlanarOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// Stiffness times u.
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for e in &self.edges {
            let ub = e.b.map_or(0.0, |b| u[b]);
            let d = e.w * (u[e.a] - ub);
            out[e.a] += d;
            if let Some(b) = e.b {
                out[b] -= d;
            }
        }
        out
    }

    /// Strong form: M⁻¹ K u, the discrete −Δu.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness_apply(u)
            .iter()
            .zip(&self.mass)
            .map(|(k, m)| k / m)
            .collect()
    }

    /// C uᵀ K u.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        self.surface
            * self
                .edges
                .iter()
                .map(|e| {
                    let d = u[e.a] - e.b.map_or(0.0, |b| u[b]);
                    e.w * d * d
                })
                .sum::<f64>()
    }

    /// C uᵀ K v.
    pub fn h1_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.surface * dot(u, &self.stiffness_apply(v))
    }

    /// C Σ m g over the unknowns.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        self.surface * dot(&self.mass, g)
    }

    /// LU of K − diag(shift), bordered by the origin unknown.
    pub fn factor(&self, shift: Option<&[f64]>) -> Result<BorderedLu> {
        let mr = self.grid.mr();
        let nb = self.dim() - 1;
        let mut band = BandMatrix::zeros(nb, mr, mr);
        let mut col = vec![0.0; nb];
        let mut corner = 0.0;
        for e in &self.edges {
            match (e.a, e.b) {
                (0, Some(b)) => {
                    corner += e.w;
                    band.add(b - 1, b - 1, e.w);
                    col[b - 1] -= e.w;
                }
                (a, Some(b)) => {
                    band.add(a - 1, a - 1, e.w);
                    band.add(b - 1, b - 1, e.w);
                    band.add(a - 1, b - 1, -e.w);
                    band.add(b - 1, a - 1, -e.w);
                }
                (0, None) => corner += e.w,
                (a, None) => band.add(a - 1, a - 1, e.w),
            }
        }
        if let Some(d) = shift {
            corner -= d[0];
            for k in 1..=nb {
                band.add(k - 1, k - 1, -d[k]);
            }
        }
        let row = col.clone();
        BorderedLu::new(band, col, row, corner)
    }

    /// rⁿ^α at every unknown.
    pub fn r_alpha(&self, alpha: f64) -> Vec<f64> {
        self.grid.coords().iter().map(|(r, _)| r.powf(alpha)).collect()
    }
}

/// Smallest eigenvalue of K φ = λ M diag(r^α) φ by inverse iteration.
pub fn principal_eigenvalue_planar(op: &PlanarOperator, alpha: f64, tol: f64) -> Result<f64> {
    let lu = op.factor(None)?;
    let ra = op.r_alpha(alpha);
    let weight: Vec<f64> = op.mass.iter().zip(&ra).map(|(m, r)| m * r).collect();
    let mut phi: Vec<f64> = op.grid.coords().iter().map(|(r, _)| 1.0 - r * r).collect();
    let mut lambda = f64::INFINITY;
    for it in 0..10_000 {
        let rhs: Vec<f64> = phi.iter().zip(&weight).map(|(p, w)| p * w).collect();
        let next = lu.solve(&rhs);
        let norm = next.iter().zip(&weight).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
        phi = next.iter().map(|x| x / norm).collect();
        let new = dot(&phi, &op.stiffness_apply(&phi));
        if (new - lambda).abs() <= tol * new {
            return Ok(new);
        }
        lambda = new;
        if it > 9_998 {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: 10_000,
        reason: "planar inverse iteration did not settle".into(),
    })
}

/// J_λ restricted to one planar class, with its gradient and Newton step.
#[derive(Clone, Debug)]
pub struct PlanarEnergy {
    pub op: PlanarOperator,
    pub spec: ProblemSpec,
    pub a: f64,
    pub r_alpha: Vec<f64>,
    precond: BorderedLu,
}

impl PlanarEnergy {
    pub fn new(spec: ProblemSpec, grid: &PolarGrid) -> Result<Self> {
        let class = PlanarClass::from_symmetry(spec.symmetry)
            .ok_or_else(|| Error::InvalidSpec("planar energy needs axial or partial symmetry".into()))?;
        if class != grid.class || spec.n != grid.n {
            return Err(Error::InvalidSpec("spec and polar grid disagree on class or dimension".into()));
        }
        spec.validate()?;
        let op = assemble_planar_operator(grid);
        let precond = op.factor(None)?;
        Ok(Self {
            r_alpha: op.r_alpha(spec.alpha),
            a: spec.a(),
            spec,
            op,
            precond,
        })
    }

    pub fn energy(&self, v: &[f64]) -> f64 {
        let p = self.spec.p;
        let pot: Vec<f64> = v
            .iter()
            .zip(&self.r_alpha)
            .map(|(x, ra)| ra * (x + self.a).abs().powf(p + 1.0))
            .collect();
        let boundary = self.op.surface * self.op.boundary_mass * self.a.powf(p + 1.0);
        0.5 * self.op.dirichlet(v) - (self.op.integrate(&pot) + boundary) / (p + 1.0)
    }

    /// M⁻¹ K v − r^α |v+a|^{p−1}(v+a).
    pub fn residual(&self, v: &[f64]) -> Vec<f64> {
        let av = self.op.apply(v);
        av.iter()
            .enumerate()
            .map(|(i, x)| x - self.r_alpha[i] * signed_pow(v[i] + self.a, self.spec.p))
            .collect()
    }

    /// H¹ representative of a residual: K⁻¹ (M r).
    pub fn precondition(&self, res: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = res.iter().zip(&self.op.mass).map(|(r, m)| r * m).collect();
        self.precond.solve(&rhs)
    }

    /// Solves (K − M diag(f'(v))) δ = −M·residual.
    pub fn newton_correction(&self, v: &[f64]) -> Result<Vec<f64>> {
        let p = self.spec.p;
        let shift: Vec<f64> = (0..v.len())
            .map(|i| self.op.mass[i] * p * self.r_alpha[i] * (v[i] + self.a).abs().powf(p - 1.0))
            .collect();
        let lu = self.op.factor(Some(&shift))?;
        let res = self.residual(v);
        let rhs: Vec<f64> = res.iter().zip(&self.op.mass).map(|(r, m)| -r * m).collect();
        Ok(lu.solve(&rhs))
    }
}

/// J on a [`Field2D`] for a spec with partial symmetry.
pub fn energy_partial(v: &Field2D, spec: &ProblemSpec) -> Result<f64> {
    if !matches!(spec.symmetry, Symmetry::Partial(_)) {
        return Err(Error::InvalidSpec("energy_partial needs Partial(l) symmetry".into()));
    }
    Ok(PlanarEnergy::new(*spec, &v.grid)?.energy(&v.values))
}

/// J on a [`Field2D`] for a spec with axial symmetry.
pub fn energy_axial(v: &Field2D, spec: &ProblemSpec) -> Result<f64> {
    if spec.symmetry != Symmetry::Axial {
        return Err(Error::InvalidSpec("energy_axial needs axial symmetry".into()));
    }
    Ok(PlanarEnergy::new(*spec, &v.grid)?.energy(&v.values))
}
