//! Saddle search by path deformation, and the drivers built on it.
//!
//! The engine works on any [`Functional`]: a discrete path between two fixed
//! endpoints is deformed by per-node descent steps along the preconditioned
//! gradient and re-tensioned by arclength, which drives the path towards a
//! minimax path. The path maximizer is then refined by a line search on the
//! adjacent segments and polished by Newton's method when the functional
//! provides a Jacobian solve.
//!
//! On top of the engine sit the radial local minimum, the radial
//! mountain-pass solution, the per-class mountain-pass levels and the
//! multiplicity report built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::branch::{minimal_solution, IterOptions};
use crate::closed_forms::{critical_exponents, cutoff, sobolev_constants, BubbleParams};
use crate::domain::{
    Classification, FieldData, Formulation, ProblemSpec, RadialField, RadialGrid, SolutionRecord, Symmetry,
};
use crate::exec::Exec;
use crate::linalg::{dot, sup_dist, sup_norm};
use crate::quadrature::{sphere_area, GaussLegendre};
use crate::radial::{
    assemble_radial_operator, golden_min, principal_eigenpair, residual_sup, RadialEnergy,
};
use crate::symmetry::{Field2D, PlanarClass, PlanarEnergy, PolarGrid};
use crate::{Error, Result};

/// A discretized functional with gradient, as consumed by [`mp_find`].
///
/// `residual` is the strong-form gradient; `precondition` maps it to the
/// Riesz representative for `inner`, so that the derivative of `energy` in
/// direction δ equals `inner(precondition(residual(v)), δ)`.
pub trait Functional: Sync {
    fn dim(&self) -> usize;
    fn energy(&self, v: &[f64]) -> f64;
    fn residual(&self, v: &[f64]) -> Vec<f64>;

    fn precondition(&self, res: &[f64]) -> Vec<f64> {
        res.to_vec()
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, v)
    }

    /// Magnitude against which residuals are judged (rounding in the
    /// residual grows with it).
    fn residual_scale(&self, _v: &[f64]) -> f64 {
        1.0
    }

    /// Newton step δ solving J''(v) δ = −J'(v), if available.
    fn newton_correction(&self, _v: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl Functional for RadialEnergy {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn energy(&self, v: &[f64]) -> f64 {
        self.energy_unknowns(v)
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        self.residual_unknowns(v)
    }

    fn precondition(&self, res: &[f64]) -> Vec<f64> {
        self.op.solve(res).expect("radial operator is an M-matrix")
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.op.h1_inner(u, v)
    }

    fn residual_scale(&self, v: &[f64]) -> f64 {
        1.0 + v
            .iter()
            .zip(&self.r_alpha)
            .fold(0.0f64, |m, (x, ra)| m.max(ra * (x + self.a).abs().powf(self.spec.p)))
    }

    fn newton_correction(&self, v: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(RadialEnergy::newton_correction(self, v))
    }
}

impl Functional for PlanarEnergy {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn energy(&self, v: &[f64]) -> f64 {
        PlanarEnergy::energy(self, v)
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        PlanarEnergy::residual(self, v)
    }

    fn precondition(&self, res: &[f64]) -> Vec<f64> {
        PlanarEnergy::precondition(self, res)
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.op.h1_inner(u, v)
    }

    fn residual_scale(&self, v: &[f64]) -> f64 {
        1.0 + v
            .iter()
            .zip(&self.r_alpha)
            .fold(0.0f64, |m, (x, ra)| m.max(ra * (x + self.a).abs().powf(self.spec.p)))
    }

    fn newton_correction(&self, v: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(PlanarEnergy::newton_correction(self, v))
    }
}

/// The double well x⁴ − 2x² in one variable.
#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleWell;

impl Functional for DoubleWell {
    fn dim(&self) -> usize {
        1
    }

    fn energy(&self, v: &[f64]) -> f64 {
        let x = v[0];
        x.powi(4) - 2.0 * x * x
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let x = v[0];
        vec![4.0 * x * x * x - 4.0 * x]
    }

    fn newton_correction(&self, v: &[f64]) -> Option<Result<Vec<f64>>> {
        let x = v[0];
        let h = 12.0 * x * x - 4.0;
        if h == 0.0 {
            return Some(Err(Error::SingularPivot(0)));
        }
        Some(Ok(vec![-(4.0 * x * x * x - 4.0 * x) / h]))
    }
}

/// Knobs of the path deformation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MPConfig {
    pub path_nodes: usize,
    /// Initial (and reset) step length of the preconditioned descent.
    pub descent_step: f64,
    pub max_deformations: usize,
    /// Residual sup-norm accepted at a critical point, relative to
    /// [`Functional::residual_scale`].
    pub grad_tol: f64,
    /// Relative margin above the endpoint energies below which the path maximum
    /// counts as collapsed.
    pub collapse_margin: f64,
    /// Sweeps between Newton attempts from the path maximizer.
    pub newton_every: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for MPConfig {
    fn default() -> Self {
        Self {
            path_nodes: 16,
            descent_step: 1.0,
            max_deformations: 2000,
            grad_tol: 1e-10,
            collapse_margin: 1e-9,
            newton_every: 10,
            exec: Exec::Parallel,
        }
    }
}

impl MPConfig {
    pub fn validate(&self) -> Result<()> {
        if self.path_nodes < 8 {
            return Err(Error::InvalidSpec(format!("path_nodes must be >= 8, got {}", self.path_nodes)));
        }
        if !(self.descent_step > 0.0) || !(self.grad_tol > 0.0) || self.newton_every == 0 {
            return Err(Error::InvalidSpec(
                "descent_step and grad_tol must be positive, newton_every nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of [`mp_find`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpResult {
    pub point: Vec<f64>,
    pub level: f64,
    pub residual_sup: f64,
    pub sweeps: usize,
    pub newton_iterations: usize,
    pub endpoint_energies: (f64, f64),
    /// Path maximum after every sweep (index 0 is the initial path).
    pub path_max: Vec<f64>,
    /// Final path, endpoints included.
    pub path: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
struct PathNode {
    v: Vec<f64>,
    e: f64,
    tau: f64,
}

fn axpy(v: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    v.iter().zip(d).map(|(x, y)| x + t * y).collect()
}

/// One backtracking descent step; the node's step length adapts and the
/// displacement stays below `reach` in the functional's norm.
fn descend<F: Functional>(f: &F, node: &mut PathNode, tau_max: f64, reach: f64) {
    let g = f.precondition(&f.residual(&node.v));
    let gg = f.inner(&g, &g);
    if !(gg > 0.0) {
        return;
    }
    let mut tau = node.tau.min(reach / gg.sqrt());
    for _ in 0..40 {
        let trial = axpy(&node.v, -tau, &g);
        let et = f.energy(&trial);
        if et <= node.e - 1e-4 * tau * gg {
            node.v = trial;
            node.e = et;
            node.tau = (1.5 * tau).min(tau_max);
            return;
        }
        tau *= 0.5;
    }
    node.tau = tau;
}

fn segment_length<F: Functional>(f: &F, path: &[PathNode]) -> f64 {
    path.windows(2)
        .map(|w| {
            let d: Vec<f64> = w[1].v.iter().zip(&w[0].v).map(|(a, b)| a - b).collect();
            f.inner(&d, &d).max(0.0).sqrt()
        })
        .sum()
}

/// Resample the path at equal arclength in the functional's inner product.
fn reparametrize<F: Functional>(f: &F, path: &[PathNode], exec: Exec) -> Vec<PathNode> {
    let n = path.len();
    let mut s = vec![0.0; n];
    for k in 1..n {
        let d: Vec<f64> = path[k].v.iter().zip(&path[k - 1].v).map(|(a, b)| a - b).collect();
        s[k] = s[k - 1] + f.inner(&d, &d).max(0.0).sqrt();
    }
    let total = s[n - 1];
    let mut seg = 0;
    let mut targets = Vec::with_capacity(n);
    for k in 0..n {
        let t = total * k as f64 / (n - 1) as f64;
        while seg + 2 < n && s[seg + 1] < t {
            seg += 1;
        }
        let len = s[seg + 1] - s[seg];
        let w = if len > 0.0 { ((t - s[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        targets.push((seg, w));
    }
    exec.map_range(n, |k| {
        if k == 0 || k == n - 1 {
            return path[k].clone();
        }
        let (seg, w) = targets[k];
        let v: Vec<f64> = path[seg]
            .v
            .iter()
            .zip(&path[seg + 1].v)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect();
        let e = f.energy(&v);
        PathNode {
            v,
            e,
            tau: path[seg].tau.min(path[seg + 1].tau),
        }
    })
}

fn argmax(path: &[PathNode]) -> (usize, f64) {
    path.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(im, em), (i, n)| if n.e > em { (i, n.e) } else { (im, em) })
}

/// Maximum of J along the polyline: the best node or segment midpoint,
/// refined by a line search on the adjacent segments.
fn path_level<F: Functional>(f: &F, path: &[PathNode], exec: Exec) -> (f64, Vec<f64>) {
    let mids: Vec<f64> = exec.map_range(path.len() - 1, |k| {
        let m: Vec<f64> = path[k].v.iter().zip(&path[k + 1].v).map(|(a, b)| 0.5 * (a + b)).collect();
        f.energy(&m)
    });
    let (i, ei) = argmax(path);
    let (k, ek) = mids
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(km, em), (k, e)| if *e > em { (k, *e) } else { (km, em) });
    let centre = if ek > ei { if path[k].e >= path[k + 1].e { k } else { k + 1 } } else { i };
    let point = refine_on_segments(f, path, centre);
    let e = f.energy(&point);
    let best = ei.max(ek);
    if e >= best {
        (e, point)
    } else if ek > ei {
        let m = path[k].v.iter().zip(&path[k + 1].v).map(|(a, b)| 0.5 * (a + b)).collect();
        (ek, m)
    } else {
        (ei, path[i].v.clone())
    }
}

/// Maximize J along the two path segments adjacent to node `i`.
fn refine_on_segments<F: Functional>(f: &F, path: &[PathNode], i: usize) -> Vec<f64> {
    let lo = if i > 0 { -1.0 } else { 0.0 };
    let hi = if i + 1 < path.len() { 1.0 } else { 0.0 };
    let at = |s: f64| -> Vec<f64> {
        if s >= 0.0 {
            path[i].v.iter().zip(&path[(i + 1).min(path.len() - 1)].v).map(|(a, b)| a + s * (b - a)).collect()
        } else {
            path[i].v.iter().zip(&path[i.saturating_sub(1)].v).map(|(a, b)| a - s * (b - a)).collect()
        }
    };
    let (s, _) = golden_min(|s| -f.energy(&at(s)), lo, hi, 1e-10);
    at(s)
}

/// Damped Newton iteration on the residual sup-norm. Iterates until the
/// residual stops decreasing; succeeds when it is at most
/// `tol · residual_scale`.
pub fn newton_refine<F: Functional>(f: &F, start: &[f64], tol: f64, cap: usize) -> Result<(Vec<f64>, usize)> {
    let mut v = start.to_vec();
    let mut r = sup_norm(&f.residual(&v));
    let mut its = 0;
    while its < cap && r > 0.0 {
        let delta = match f.newton_correction(&v) {
            Some(d) => d?,
            None if r <= tol * f.residual_scale(&v) => break,
            None => {
                return Err(Error::NoConvergence {
                    iterations: its,
                    reason: "functional provides no Newton step".into(),
                })
            }
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1.0 / 1024.0 {
            let trial = axpy(&v, t, &delta);
            let rt = sup_norm(&f.residual(&trial));
            if rt < r {
                v = trial;
                r = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        its += 1;
        if !accepted {
            break;
        }
    }
    let bound = tol * f.residual_scale(&v);
    if r <= bound {
        Ok((v, its))
    } else {
        Err(Error::NoConvergence {
            iterations: its,
            reason: format!("Newton stopped at residual {r:e} above {bound:e}"),
        })
    }
}

/// Mountain-pass saddle between `a` and `b` by path deformation.
///
/// Requires J(b) ≤ J(a). Endpoints never move. The path maximum is
/// nonincreasing from sweep to sweep: re-tensioning is kept only when it does
/// not raise the maximum.
pub fn mp_find<F: Functional>(f: &F, a: &[f64], b: &[f64], cfg: &MPConfig) -> Result<MpResult> {
    cfg.validate()?;
    if a.len() != f.dim() || b.len() != f.dim() {
        return Err(Error::Endpoints("endpoint length differs from the functional dimension".into()));
    }
    let ja = f.energy(a);
    let jb = f.energy(b);
    if !(jb <= ja) {
        return Err(Error::Endpoints(format!("need J(b) <= J(a), got J(a) = {ja:e}, J(b) = {jb:e}")));
    }
    let floor = ja.max(jb);
    let margin = cfg.collapse_margin * (1.0 + floor.abs());
    let n = cfg.path_nodes;
    let mut path: Vec<PathNode> = cfg.exec.map_range(n, |k| {
        let t = k as f64 / (n - 1) as f64;
        let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
        let e = if k == 0 {
            ja
        } else if k == n - 1 {
            jb
        } else {
            f.energy(&v)
        };
        PathNode {
            v,
            e,
            tau: cfg.descent_step,
        }
    });
    let tau_max = 8.0 * cfg.descent_step;
    let (mut top, mut top_point) = path_level(f, &path, cfg.exec);
    let mut history = vec![top];
    let mut last_error = None;
    for sweep in 1..=cfg.max_deformations {
        let before = path.clone();
        for _ in 0..12 {
            let reach = 0.5 * segment_length(f, &path) / (n - 1) as f64;
            cfg.exec.for_each_mut(&mut path[1..n - 1], |_, node| descend(f, node, tau_max, reach));
            let retensioned = reparametrize(f, &path, cfg.exec);
            let (level, point) = path_level(f, &retensioned, cfg.exec);
            if level <= top + 1e-12 * (1.0 + top.abs()) {
                path = retensioned;
                top = level;
                top_point = point;
                break;
            }
            // the deformed path rose somewhere: retry from the old path with shorter steps
            path = before.clone();
            for node in &mut path {
                node.tau *= 0.25;
            }
        }
        history.push(top);
        if !(top > floor + margin) {
            return Err(Error::LevelCollapse { level: top, floor });
        }
        if sweep % cfg.newton_every != 0 && sweep != cfg.max_deformations {
            continue;
        }
        let start = top_point.clone();
        let candidate = newton_refine(f, &start, cfg.grad_tol, 60);
        match candidate {
            Ok((point, its)) => {
                let level = f.energy(&point);
                let below_max = level <= top + 1e-8 * (1.0 + top.abs());
                if level > floor + margin && below_max {
                    let residual_sup = sup_norm(&f.residual(&point));
                    return Ok(MpResult {
                        point,
                        level,
                        residual_sup,
                        sweeps: sweep,
                        newton_iterations: its,
                        endpoint_energies: (ja, jb),
                        path_max: history,
                        path: path.into_iter().map(|p| p.v).collect(),
                    });
                }
                last_error = Some(format!(
                    "Newton reached a critical point at level {level:e} off the path maximum {top:e}"
                ));
            }
            Err(e) => last_error = Some(e.to_string()),
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_deformations,
        reason: last_error.unwrap_or_else(|| "deformation cap exceeded".into()),
    })
}

/// Radial local minimum near `start`, kept in the order interval
/// [0, `barrier`] during descent and polished by Newton.
pub fn local_min_refine(
    spec: &ProblemSpec,
    start: &RadialField,
    barrier: Option<&RadialField>,
    cfg: &MPConfig,
) -> Result<SolutionRecord> {
    spec.validate()?;
    let en = RadialEnergy::new(spec.with_symmetry(Symmetry::Radial), start.grid);
    let dim = en.dim();
    let upper: Vec<f64> = match barrier {
        Some(b) => b.unknowns().to_vec(),
        None => vec![f64::INFINITY; dim],
    };
    let project = |v: Vec<f64>| -> Vec<f64> { v.iter().zip(&upper).map(|(x, u)| x.clamp(0.0, *u)).collect() };
    let mut v = project(start.unknowns().to_vec());
    let mut e = en.energy(&v);
    let mut tau = cfg.descent_step;
    let mut its = 0;
    while its < cfg.max_deformations {
        let res = en.residual(&v);
        if sup_norm(&res) <= cfg.grad_tol * en.residual_scale(&v) {
            break;
        }
        let g = en.precondition(&res);
        let mut moved = false;
        while tau > 1e-12 {
            let trial = project(axpy(&v, -tau, &g));
            let et = en.energy(&trial);
            if et < e {
                v = trial;
                e = et;
                moved = true;
                tau = (1.5 * tau).min(8.0 * cfg.descent_step);
                break;
            }
            tau *= 0.5;
        }
        its += 1;
        // descent has stalled or is inside the quadratic basin: hand over to Newton
        if !moved || sup_norm(&en.residual(&v)) < 1e-6 * (1.0 + sup_norm(&v)) {
            break;
        }
    }
    let (v, newton_its) = newton_refine(&en, &v, cfg.grad_tol, 60)?;
    let interior = &v[..dim - 1];
    if spec.lambda > 0.0 && interior.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::BarrierViolated("local minimum is not positive".into()));
    }
    if let Some(b) = barrier {
        if interior.iter().zip(b.unknowns()).any(|(x, u)| !(*x < *u)) {
            return Err(Error::BarrierViolated(
                "local minimum escaped the upper barrier; lambda may be too close to lambda*".into(),
            ));
        }
    }
    let energy = en.energy(&v);
    if spec.lambda > 0.0 && !(energy < 0.0) {
        return Err(Error::BarrierViolated(format!("local minimum has energy {energy:e} >= 0")));
    }
    let field = RadialField::from_unknowns(start.grid, &v);
    Ok(SolutionRecord {
        spec: spec.with_symmetry(Symmetry::Radial),
        residual_sup: residual_sup(&field, &spec.with_symmetry(Symmetry::Radial)),
        field: FieldData::Radial(field),
        form: Formulation::Scaled,
        energy,
        classification: Classification::LocalMin,
        iterations: its + newton_its,
    })
}

/// Local minimum ṽ together with the barrier used and its distance to the
/// scaled minimal solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMinOutcome {
    pub record: SolutionRecord,
    /// λ' of the barrier a'·w_{λ'}; `None` at λ = 0.
    pub barrier_lambda: Option<f64>,
    /// sup |ṽ − a·w_min|.
    pub distance_to_minimal: f64,
}

/// Local minimum of the radial energy on an M-node grid, started from the
/// scaled minimal solution with barrier a'·w_{λ'} for some solvable λ' > λ.
pub fn local_min_radial(spec: &ProblemSpec, m: usize, cfg: &MPConfig) -> Result<LocalMinOutcome> {
    let spec = spec.with_symmetry(Symmetry::Radial);
    let grid = RadialGrid::new(m);
    if spec.lambda == 0.0 {
        let record = local_min_refine(&spec, &RadialField::zeros(grid), None, cfg)?;
        return Ok(LocalMinOutcome {
            record,
            barrier_lambda: None,
            distance_to_minimal: 0.0,
        });
    }
    let opts = IterOptions::default();
    let w = minimal_solution(&spec, m, &opts)?;
    let a = spec.a();
    let start = w.field.as_radial().expect("radial record").scaled(a);
    let mut lp = 2.0 * spec.lambda;
    let mut barrier = None;
    for _ in 0..40 {
        if let Ok(wp) = minimal_solution(&spec.with_lambda(lp), m, &opts) {
            barrier = Some((lp, wp.field.as_radial().expect("radial record").scaled(spec.with_lambda(lp).a())));
            break;
        }
        lp = 0.5 * (spec.lambda + lp);
    }
    let (lp, barrier) = barrier.ok_or_else(|| {
        Error::BarrierViolated("no solvable lambda' above lambda for the upper barrier".into())
    })?;
    let record = local_min_refine(&spec, &start, Some(&barrier), cfg)?;
    let distance_to_minimal = sup_dist(record.field.values(), &start.values);
    Ok(LocalMinOutcome {
        record,
        barrier_lambda: Some(lp),
        distance_to_minimal,
    })
}

/// Double `r` from 2 until J(base + r·dir) < J(base) − 1.
fn far_endpoint<F: Functional>(f: &F, base: &[f64], dir: &[f64]) -> Result<(f64, Vec<f64>)> {
    let target = f.energy(base) - 1.0;
    let mut r = 2.0;
    for _ in 0..60 {
        let b = axpy(base, r, dir);
        if f.energy(&b) < target {
            return Ok((r, b));
        }
        r *= 2.0;
    }
    Err(Error::Endpoints("no far endpoint with energy below J(base) - 1".into()))
}

/// The pair of radial solutions: local minimum and mountain pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialPair {
    pub local_min: LocalMinOutcome,
    pub mountain_pass: SolutionRecord,
    pub level: f64,
    /// R of the far endpoint.
    pub endpoint_scale: f64,
    pub sweeps: usize,
    /// sup |V − ṽ|.
    pub separation: f64,
}

fn radial_mp_record(spec: &ProblemSpec, grid: RadialGrid, mp: &MpResult) -> SolutionRecord {
    let field = RadialField::from_unknowns(grid, &mp.point);
    SolutionRecord {
        spec: *spec,
        residual_sup: residual_sup(&field, spec),
        field: FieldData::Radial(field),
        form: Formulation::Scaled,
        energy: mp.level,
        classification: Classification::MountainPass,
        iterations: mp.sweeps,
    }
}

/// Second radial solution: mountain pass between ṽ and R·ṽ (R·φ₁ when ṽ = 0).
pub fn mp_second_radial(spec: &ProblemSpec, m: usize, cfg: &MPConfig) -> Result<RadialPair> {
    let spec = spec.with_symmetry(Symmetry::Radial);
    let local = local_min_radial(&spec, m, cfg)?;
    let grid = RadialGrid::new(m);
    let en = RadialEnergy::new(spec, grid);
    let base = local.record.field.values()[..en.dim()].to_vec();
    let dir = if sup_norm(&base) > 0.0 {
        base.clone()
    } else {
        let op = assemble_radial_operator(grid, spec.n);
        principal_eigenpair(&op, spec.alpha, 1e-12)?.phi.unknowns().to_vec()
    };
    let scale = sup_norm(&dir);
    let dir: Vec<f64> = dir.iter().map(|x| x / scale).collect();
    let (r, b) = far_endpoint(&en, &base, &dir)?;
    let mp = mp_find(&en, &base, &b, cfg)?;
    if mp.point.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::BarrierViolated("mountain-pass solution is not positive".into()));
    }
    let record = radial_mp_record(&spec, grid, &mp);
    let separation = sup_dist(&mp.point, &base);
    Ok(RadialPair {
        level: mp.level,
        endpoint_scale: r,
        sweeps: mp.sweeps,
        separation,
        mountain_pass: record,
        local_min: local,
    })
}

/// Resolution of a planar mountain-pass run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarResolution {
    pub mr: usize,
    pub mphi: usize,
    /// Angular clustering towards the ends, in [0, 1).
    pub kappa: f64,
}

impl PlanarResolution {
    pub fn coarsened(self) -> Self {
        Self {
            mr: self.mr / 2,
            mphi: self.mphi / 2,
            kappa: self.kappa,
        }
    }
}

/// One mountain-pass solution in a planar class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarMp {
    pub record: SolutionRecord,
    pub level: f64,
    /// Label of the far-endpoint direction that produced the lowest level.
    pub direction: String,
    pub candidates: Vec<(String, Option<f64>)>,
}

/// Far-endpoint directions for a class: the radial profile plus bumps at the
/// distinguished angles, concentrated near the boundary at radial scale `width`.
fn planar_directions(grid: &PolarGrid, radial_dir: &[f64], width: f64) -> Vec<(String, Vec<f64>)> {
    let mr = grid.mr();
    let mut out = Vec::new();
    let lifted = Field2D::lift(
        grid.clone(),
        &RadialField::from_unknowns(grid.radial, radial_dir),
    )
    .expect("matching grids");
    out.push(("radial".to_string(), lifted.values));
    let centres: Vec<(String, f64)> = match grid.class {
        PlanarClass::Axial => vec![("axis".into(), 0.0)],
        PlanarClass::Quarter { .. } => vec![("phi=0".into(), 0.0), ("phi=pi/2".into(), grid.class.span())],
    };
    let r0 = (1.0 - 1.5 * width).max(0.5);
    for (name, c) in centres {
        let f = Field2D::from_fn(grid.clone(), |r, phi| {
            let d2 = r * r + r0 * r0 - 2.0 * r * r0 * (phi - c).cos();
            (1.0 - r).max(0.0) * (-d2 / (width * width)).exp()
        });
        let s = sup_norm(&f.values);
        out.push((name, f.values.iter().map(|x| x / s).collect()));
    }
    debug_assert!(out.iter().all(|(_, v)| v.len() == 1 + mr * grid.angles.len()));
    out
}

/// Mountain-pass level in a planar class: runs the deformation for every
/// candidate far endpoint and keeps the lowest level.
pub fn mp_planar(
    spec: &ProblemSpec,
    res: PlanarResolution,
    local_min: &RadialField,
    cfg: &MPConfig,
) -> Result<PlanarMp> {
    let class = PlanarClass::from_symmetry(spec.symmetry)
        .ok_or_else(|| Error::InvalidSpec("mp_planar needs axial or partial symmetry".into()))?;
    let grid = PolarGrid::new(class, spec.n, res.mr, res.mphi, res.kappa)?;
    if local_min.grid != grid.radial {
        return Err(Error::InvalidSpec("local minimum grid does not match the radial resolution".into()));
    }
    let en = PlanarEnergy::new(*spec, &grid)?;
    let base = Field2D::lift(grid.clone(), local_min)?.values;
    let radial_dir: Vec<f64> = if sup_norm(local_min.unknowns()) > 0.0 {
        local_min.unknowns().to_vec()
    } else {
        let op = assemble_radial_operator(grid.radial, spec.n);
        principal_eigenpair(&op, spec.alpha, 1e-12)?.phi.unknowns().to_vec()
    };
    let s = sup_norm(&radial_dir);
    let radial_dir: Vec<f64> = radial_dir.iter().map(|x| x / s).collect();
    let width = (2.0 / (spec.alpha + 2.0)).max(4.0 * grid.radial.h()).min(0.3);
    let dirs = planar_directions(&grid, &radial_dir, width);
    let inner_cfg = MPConfig {
        exec: cfg.exec,
        ..*cfg
    };
    let runs: Vec<(String, Result<MpResult>)> = dirs
        .into_iter()
        .map(|(name, d)| {
            let run = far_endpoint(&en, &base, &d).and_then(|(_, b)| mp_find(&en, &base, &b, &inner_cfg));
            (name, run)
        })
        .collect();
    let candidates: Vec<(String, Option<f64>)> =
        runs.iter().map(|(n, r)| (n.clone(), r.as_ref().ok().map(|m| m.level))).collect();
    let mut best: Option<(String, MpResult)> = None;
    let mut first_err = None;
    for (name, run) in runs {
        match run {
            Ok(mp) => {
                if best.as_ref().map_or(true, |(_, b)| mp.level < b.level) {
                    best = Some((name, mp));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let (direction, mp) = match best {
        Some(b) => b,
        None => return Err(first_err.expect("at least one candidate")),
    };
    let residual_sup = sup_norm(&en.residual(&mp.point));
    let field = Field2D {
        grid,
        values: mp.point.clone(),
    };
    Ok(PlanarMp {
        record: SolutionRecord {
            spec: *spec,
            field: FieldData::Planar(field),
            form: Formulation::Scaled,
            energy: mp.level,
            residual_sup,
            classification: Classification::MountainPass,
            iterations: mp.sweeps,
        },
        level: mp.level,
        direction,
        candidates,
    })
}

/// Resolution settings of a level report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSettings {
    /// Radial grid size of the radial runs.
    pub m: usize,
    pub planar: PlanarResolution,
    /// Whether to repeat every run at half resolution to estimate tolerances.
    pub estimate_tolerance: bool,
}

impl Default for LevelSettings {
    fn default() -> Self {
        Self {
            m: 800,
            planar: PlanarResolution {
                mr: 120,
                mphi: 48,
                kappa: 0.8,
            },
            estimate_tolerance: true,
        }
    }
}

/// One entry of a [`LevelReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEntry {
    /// "localmin", "radial", "axial" or "partial".
    pub class: String,
    pub l: Option<usize>,
    pub level: f64,
    pub residual: f64,
    /// |level − level at half resolution|, when estimated.
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelGap {
    pub first: String,
    pub second: String,
    pub gap: f64,
    pub threshold: f64,
    pub significant: bool,
}

/// Energy levels per symmetry class at one (α, λ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub p: f64,
    pub level_localmin: Option<f64>,
    pub level_radial: Option<f64>,
    pub level_partial: BTreeMap<usize, f64>,
    pub level_axial: Option<f64>,
    pub entries: Vec<LevelEntry>,
    pub pairwise_gaps: Vec<LevelGap>,
    /// Reasons for absent entries.
    pub missing: Vec<String>,
    /// Set when the radial mountain pass collapsed onto the local-minimum level.
    pub degenerate_minimum_ring: bool,
    /// No significant gap among the mountain-pass levels.
    pub degenerate: bool,
}

impl LevelReport {
    fn label(e: &LevelEntry) -> String {
        match e.l {
            Some(l) => format!("{}({l})", e.class),
            None => e.class.clone(),
        }
    }

    /// Number of entries pairwise separated by significant gaps (greedy count
    /// over entries sorted by level).
    pub fn distinct_count(&self) -> usize {
        let mut sorted: Vec<&LevelEntry> = self.entries.iter().collect();
        sorted.sort_by(|a, b| a.level.total_cmp(&b.level));
        let mut kept: Vec<&LevelEntry> = Vec::new();
        for e in sorted {
            let separated = kept.iter().all(|k| {
                (e.level - k.level).abs() > SIGNIFICANCE * e.tolerance.max(k.tolerance)
            });
            if separated {
                kept.push(e);
            }
        }
        kept.len()
    }

    /// Flat CSV: class, l, level, residual, tolerance.
    pub fn to_csv(&self) -> Result<String> {
        use crate::io::{csv_string, fmt_f64};
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.class.clone(),
                    e.l.map(|l| l.to_string()).unwrap_or_default(),
                    fmt_f64(e.level),
                    fmt_f64(e.residual),
                    fmt_f64(e.tolerance),
                ]
            })
            .collect();
        csv_string(&["class", "l", "level", "residual", "tolerance"], &rows)
    }
}

/// Gaps count as significant above this multiple of the larger tolerance.
pub const SIGNIFICANCE: f64 = 3.0;

fn radial_levels(spec: &ProblemSpec, m: usize, cfg: &MPConfig) -> (Result<LocalMinOutcome>, Result<RadialPair>) {
    match mp_second_radial(spec, m, cfg) {
        Ok(pair) => (Ok(pair.local_min.clone()), Ok(pair)),
        Err(e) => (local_min_radial(spec, m, cfg), Err(e)),
    }
}

/// Levels of the local minimum and of the mountain passes in the radial,
/// partial (for each l) and axial classes, with pairwise gap significance.
pub fn level_ordering_report(
    n: usize,
    alpha: f64,
    lambda: f64,
    p: f64,
    l_list: &[usize],
    with_axial: bool,
    settings: &LevelSettings,
    cfg: &MPConfig,
) -> Result<LevelReport> {
    let spec = ProblemSpec::radial(n, alpha, p, lambda);
    spec.validate()?;
    let mut entries = Vec::new();
    let mut missing = Vec::new();
    let mut ring = false;

    let fine = settings;
    let coarse = LevelSettings {
        m: settings.m / 2,
        planar: settings.planar.coarsened(),
        estimate_tolerance: false,
    };
    let (lm, pair) = radial_levels(&spec, fine.m, cfg);
    let (lm_c, pair_c) = if settings.estimate_tolerance {
        let (a, b) = radial_levels(&spec, coarse.m, cfg);
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    let tol_of = |fine: f64, coarse: Option<f64>| coarse.map_or(0.0, |c| (fine - c).abs());
    let local = match lm {
        Ok(lm) => {
            let c = lm_c.and_then(|r| r.ok()).map(|o| o.record.energy);
            entries.push(LevelEntry {
                class: "localmin".into(),
                l: None,
                level: lm.record.energy,
                residual: lm.record.residual_sup,
                tolerance: tol_of(lm.record.energy, c),
            });
            Some(lm)
        }
        Err(e) => {
            missing.push(format!("localmin: {e}"));
            None
        }
    };
    match pair {
        Ok(pair) => {
            let c = pair_c.and_then(|r| r.ok()).map(|o| o.level);
            entries.push(LevelEntry {
                class: "radial".into(),
                l: None,
                level: pair.level,
                residual: pair.mountain_pass.residual_sup,
                tolerance: tol_of(pair.level, c),
            });
        }
        Err(Error::LevelCollapse { .. }) => {
            ring = true;
            missing.push("radial: level collapse at the local minimum".into());
        }
        Err(e) => missing.push(format!("radial: {e}")),
    }

    let mut classes: Vec<Symmetry> = l_list.iter().map(|&l| Symmetry::Partial(l)).collect();
    if with_axial {
        classes.push(Symmetry::Axial);
    }
    if local.is_some() {
        // local minima on the planar radial grids
        let lm_fine = local_min_radial(&spec, fine.planar.mr, cfg);
        let lm_coarse = if settings.estimate_tolerance {
            Some(local_min_radial(&spec, coarse.planar.mr, cfg))
        } else {
            None
        };
        let run = |sym: Symmetry, res: PlanarResolution, lm: &Result<LocalMinOutcome>| -> Result<PlanarMp> {
            let lm = lm.as_ref().map_err(|e| Error::InvalidSpec(format!("local minimum: {e}")))?;
            let s = spec.with_symmetry(sym);
            s.validate()?;
            mp_planar(&s, res, lm.record.field.as_radial().expect("radial"), cfg)
        };
        for sym in classes {
            let (class, l) = match sym {
                Symmetry::Partial(l) => ("partial".to_string(), Some(l)),
                _ => ("axial".to_string(), None),
            };
            match run(sym, fine.planar, &lm_fine) {
                Ok(mp) => {
                    let c = lm_coarse
                        .as_ref()
                        .and_then(|lmc| run(sym, coarse.planar, lmc).ok())
                        .map(|m| m.level);
                    entries.push(LevelEntry {
                        class,
                        l,
                        level: mp.level,
                        residual: mp.record.residual_sup,
                        tolerance: tol_of(mp.level, c),
                    });
                }
                Err(e) => missing.push(format!("{class}{}: {e}", l.map(|l| format!("({l})")).unwrap_or_default())),
            }
        }
    } else {
        missing.push("planar classes: no local minimum".into());
    }

    let mut pairwise_gaps = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let (a, b) = (&entries[i], &entries[j]);
            let gap = (a.level - b.level).abs();
            let threshold = SIGNIFICANCE * a.tolerance.max(b.tolerance);
            pairwise_gaps.push(LevelGap {
                first: LevelReport::label(a),
                second: LevelReport::label(b),
                gap,
                threshold,
                significant: gap > threshold,
            });
        }
    }
    let degenerate = pairwise_gaps
        .iter()
        .filter(|g| g.first != "localmin" && g.second != "localmin")
        .all(|g| !g.significant);
    let level_of = |class: &str| entries.iter().find(|e| e.class == class).map(|e| e.level);
    Ok(LevelReport {
        n,
        alpha,
        lambda,
        p,
        level_localmin: level_of("localmin"),
        level_radial: level_of("radial"),
        level_partial: entries
            .iter()
            .filter_map(|e| e.l.map(|l| (l, e.level)))
            .collect(),
        level_axial: level_of("axial"),
        entries,
        pairwise_gaps,
        missing,
        degenerate_minimum_ring: ring,
        degenerate,
    })
}

/// One row of [`level_limit_lambda_zero`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub lambda: f64,
    pub level: f64,
    /// |m_λ − m_0|.
    pub gap: f64,
    /// λ^{1/(p−1)} (‖V‖^p_{L^p(r^α)} + λ^{p/(p−1)} |B|), the perturbation scale.
    pub perturbation_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    pub m: usize,
    pub level_zero: f64,
    pub rows: Vec<LimitRow>,
}

impl LimitTable {
    pub fn to_csv(&self) -> Result<String> {
        use crate::io::{csv_string, fmt_f64};
        let mut rows = vec![vec![fmt_f64(0.0), fmt_f64(self.level_zero), fmt_f64(0.0), fmt_f64(0.0)]];
        rows.extend(self.rows.iter().map(|r| {
            vec![
                fmt_f64(r.lambda),
                fmt_f64(r.level),
                fmt_f64(r.gap),
                fmt_f64(r.perturbation_scale),
            ]
        }));
        csv_string(&["lambda", "level", "gap", "perturbation_scale"], &rows)
    }
}

/// Radial mountain-pass levels along a decreasing λ list and at λ = 0.
pub fn level_limit_lambda_zero(
    n: usize,
    alpha: f64,
    p: f64,
    lambdas: &[f64],
    m: usize,
    cfg: &MPConfig,
) -> Result<LimitTable> {
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) || lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidSpec("lambda list must be positive and strictly decreasing".into()));
    }
    let spec0 = ProblemSpec::radial(n, alpha, p, 0.0);
    let zero = mp_second_radial(&spec0, m, cfg)?;
    let inner_cfg = MPConfig {
        exec: Exec::Sequential,
        ..*cfg
    };
    let runs = cfg.exec.map(lambdas, |&lam| mp_second_radial(&spec0.with_lambda(lam), m, &inner_cfg));
    let grid = RadialGrid::new(m);
    let op = assemble_radial_operator(grid, n);
    let ra = op.r_alpha(alpha);
    let ball = sphere_area(n) / n as f64;
    let mut rows = Vec::new();
    for (lam, run) in lambdas.iter().zip(runs) {
        let pair = run?;
        let v = pair.mountain_pass.field.values();
        let lp: Vec<f64> = v.iter().zip(&ra).map(|(x, r)| r * x.abs().powf(p)).collect();
        let a = lam.powf(1.0 / (p - 1.0));
        rows.push(LimitRow {
            lambda: *lam,
            level: pair.level,
            gap: (pair.level - zero.level).abs(),
            perturbation_scale: a * (op.integrate(&lp) + lam.powf(p / (p - 1.0)) * ball),
        });
    }
    Ok(LimitTable {
        n,
        alpha,
        p,
        m,
        level_zero: zero.level,
        rows,
    })
}

/// sup over t > 0 of the translated energy along t·u_{α,ε}, against c₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub epsilon: f64,
    pub sup_level: f64,
    pub t_star: f64,
    pub c0: f64,
    /// c₀ − sup_level.
    pub margin: f64,
}

/// Critical-exponent threshold check: with ṽ the radial local minimum at λ and
/// p = 2*_α − 1, evaluates
/// J(w) = ½‖w‖² − ∫ r^α [ (ṽ+a+w)^{p+1} − (ṽ+a)^{p+1} − (p+1)(ṽ+a)^p w ]/(p+1)
/// along w = t·u_{α,ε} and maximizes over t, for each ε.
pub fn threshold_check(
    n: usize,
    alpha: f64,
    lambda: f64,
    eps: &[f64],
    m: usize,
    cfg: &MPConfig,
) -> Result<Vec<ThresholdCheck>> {
    let p = critical_exponents(n, alpha, None).two_star_alpha - 1.0;
    let spec = ProblemSpec::radial(n, alpha, p, lambda);
    let local = local_min_radial(&spec, m, cfg)?;
    let vt = local.record.field.as_radial().expect("radial").clone();
    let a = spec.a();
    let table = sobolev_constants(n, alpha, 64)?;
    let g = GaussLegendre::new(16);
    let omega = sphere_area(n);
    let nf = n as f64;
    let run = |&e: &f64| -> Result<ThresholdCheck> {
        let params = BubbleParams::new(n, alpha).with_epsilon(e);
        let grad = crate::closed_forms::bubble_integrals(&params, crate::closed_forms::BubbleIntegral::Grad)?;
        let scale = e.powf(1.0 / (alpha + 2.0));
        let inner = params.cutoff_inner;
        let outer = 0.5 * (1.0 + inner);
        let k = alpha + 2.0;
        let q = (nf - 2.0) / k;
        let u = |r: f64| cutoff(r, &params).0 * e.powf(0.5 * q) * (e + r.powf(k)).powf(-q);
        // G(b, s) = [(b+s)^{p+1} − b^{p+1} − (p+1) b^p s]/(p+1) without cancellation
        let g_rem = |b: f64, s: f64| -> f64 {
            let x = s / b;
            if x.abs() < 1e-3 {
                let mut term = 1.0;
                let mut sum = 0.0;
                let mut c = p + 1.0;
                for j in 0..8 {
                    term *= c / (j as f64 + 1.0);
                    c -= 1.0;
                    if j >= 1 {
                        sum += term * x.powi(j as i32 + 1);
                    }
                }
                b.powf(p + 1.0) * sum / (p + 1.0)
            } else {
                b.powf(p + 1.0) * ((1.0 + x).powf(p + 1.0) - 1.0 - (p + 1.0) * x) / (p + 1.0)
            }
        };
        let potential = |t: f64| -> f64 {
            let f = |r: f64| -> f64 {
                let b = vt.interpolate(r) + a;
                r.powf(alpha) * g_rem(b, t * u(r)) * r.powf(nf - 1.0)
            };
            omega * (g.graded(0.0, inner, scale.min(0.5 * inner), 4, f) + g.composite(inner, outer, 32, f))
        };
        let j = |t: f64| 0.5 * t * t * grad - potential(t);
        // bracket the maximizer: J grows then decays to −∞
        let mut hi = 1.0;
        while j(2.0 * hi) > j(hi) {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::NoConvergence {
                    iterations: 20,
                    reason: "no maximum of J along the ray".into(),
                });
            }
        }
        let (t, neg) = golden_min(|t| -j(t), 0.0, 2.0 * hi, 1e-10);
        let sup_level = -neg;
        Ok(ThresholdCheck {
            epsilon: e,
            sup_level,
            t_star: t,
            c0: table.c0,
            margin: table.c0 - sup_level,
        })
    };
    cfg.exec.map(eps, run).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> MPConfig {
        MPConfig {
            exec: Exec::Sequential,
            ..MPConfig::default()
        }
    }

    #[test]
    fn double_well_saddle() {
        let mp = mp_find(&DoubleWell, &[-1.0], &[1.0], &cfg()).unwrap();
        assert!(mp.point[0].abs() <= 1e-6);
        assert!(mp.level.abs() <= 1e-8);
        assert_eq!(mp.path[0], vec![-1.0]);
        assert_eq!(mp.path.last().unwrap(), &vec![1.0]);
    }

    #[test]
    fn path_max_nonincreasing() {
        let spec = ProblemSpec::radial(3, 2.0, 3.0, 0.0);
        let en = RadialEnergy::new(spec, RadialGrid::new(200));
        let op = assemble_radial_operator(RadialGrid::new(200), 3);
        let phi = principal_eigenpair(&op, 2.0, 1e-12).unwrap().phi;
        let s = phi.sup_norm();
        let dir: Vec<f64> = phi.unknowns().iter().map(|x| x / s).collect();
        let zero = vec![0.0; en.dim()];
        let (_, b) = far_endpoint(&en, &zero, &dir).unwrap();
        let mp = mp_find(&en, &zero, &b, &cfg()).unwrap();
        assert!(mp.path_max.windows(2).all(|w| w[1] <= w[0]));
        assert!(mp.level > 0.0);
    }

    #[test]
    fn rejects_bad_endpoints_and_config() {
        assert!(matches!(mp_find(&DoubleWell, &[1.0], &[0.0], &cfg()), Err(Error::Endpoints(_))));
        let bad = MPConfig {
            path_nodes: 4,
            ..cfg()
        };
        assert!(mp_find(&DoubleWell, &[-1.0], &[1.0], &bad).is_err());
    }

    #[test]
    fn lambda_zero_local_min_is_origin() {
        let spec = ProblemSpec::radial(3, 1.0, 3.0, 0.0);
        let rec = local_min_refine(&spec, &RadialField::zeros(RadialGrid::new(50)), None, &cfg()).unwrap();
        assert_eq!(rec.energy, 0.0);
        assert_eq!(rec.field.sup_norm(), 0.0);
    }
}
