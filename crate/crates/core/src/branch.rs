//! Minimal solutions of −Δw = λ|x|^α(1+w)^p by monotone iteration, bracketing
//! of the extinction threshold λ*, and the small-λ asymptotics w ≈ λ e_α.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{e_alpha_max, lambda_star_lower};
use crate::domain::{Classification, FieldData, Formulation, ProblemSpec, RadialField, RadialGrid, SolutionRecord};
use crate::exec::Exec;
use crate::linalg::sup_norm;
use crate::radial::{assemble_radial_operator, discrete_torsion, principal_eigenpair, RadialEnergy, RadialOperator};
use crate::{Error, Result};

/// Knobs of the monotone iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterOptions {
    /// Stop when the sup-norm increment falls below this.
    pub tol: f64,
    pub cap: usize,
    /// Iterates above this sup-norm are treated as divergent.
    pub sup_cutoff: f64,
}

impl Default for IterOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            cap: 10_000,
            sup_cutoff: 1e6,
        }
    }
}

/// Shifted-form residual A w − λ r^α (1+w)^p on the unknowns.
fn shifted_residual(op: &RadialOperator, ra: &[f64], spec: &ProblemSpec, w: &[f64]) -> Vec<f64> {
    let aw = op.apply(w);
    aw.iter()
        .enumerate()
        .map(|(i, x)| x - spec.lambda * ra[i] * forcing_base(w[i], spec.p))
        .collect()
}

fn forcing_base(w: f64, p: f64) -> f64 {
    crate::radial::signed_pow(1.0 + w, p)
}

/// Slack allowed in the sub/supersolution and monotonicity checks.
fn slack(scale: f64) -> f64 {
    1e-9 * (1.0 + scale)
}

fn record(op: &RadialOperator, spec: &ProblemSpec, w: &[f64], iterations: usize) -> SolutionRecord {
    let ra = op.r_alpha(spec.alpha);
    let res = shifted_residual(op, &ra, spec, w);
    let en = RadialEnergy::with_operator(*spec, op.clone());
    let v: Vec<f64> = w.iter().map(|x| x * en.a).collect();
    SolutionRecord {
        spec: *spec,
        field: FieldData::Radial(RadialField::from_unknowns(op.grid, w)),
        form: Formulation::Shifted,
        energy: en.energy_unknowns(&v),
        residual_sup: sup_norm(&res),
        classification: Classification::Minimal,
        iterations,
    }
}

/// Monotone iteration w_{k+1} = A⁻¹(λ r^α (1+w_k)^p) from `lower`, optionally
/// checked against the supersolution `upper`.
pub fn monotone_iterate(
    spec: &ProblemSpec,
    lower: &RadialField,
    upper: Option<&RadialField>,
    opts: &IterOptions,
) -> Result<SolutionRecord> {
    let op = assemble_radial_operator(lower.grid, spec.n);
    monotone_iterate_with(&op, spec, lower, upper, opts)
}

/// [`monotone_iterate`] with a pre-assembled operator.
pub fn monotone_iterate_with(
    op: &RadialOperator,
    spec: &ProblemSpec,
    lower: &RadialField,
    upper: Option<&RadialField>,
    opts: &IterOptions,
) -> Result<SolutionRecord> {
    spec.validate()?;
    let ra = op.r_alpha(spec.alpha);
    let n = op.dim();
    let forcing_scale = |w: &[f64]| spec.lambda * (1.0 + sup_norm(w)).powf(spec.p);

    let mut w = lower.unknowns().to_vec();
    let res = shifted_residual(op, &ra, spec, &w);
    if res.iter().any(|r| *r > slack(forcing_scale(&w))) {
        return Err(Error::BarrierViolated("lower barrier is not a subsolution".into()));
    }
    if let Some(up) = upper {
        let u = up.unknowns();
        let res = shifted_residual(op, &ra, spec, u);
        if res.iter().any(|r| *r < -slack(forcing_scale(u))) {
            return Err(Error::BarrierViolated("upper barrier is not a supersolution".into()));
        }
        if w.iter().zip(u).any(|(a, b)| a > &(b + slack(0.0))) {
            return Err(Error::BarrierViolated("lower barrier exceeds upper barrier".into()));
        }
    }

    for k in 1..=opts.cap {
        let rhs: Vec<f64> = (0..n).map(|i| spec.lambda * ra[i] * forcing_base(w[i], spec.p)).collect();
        let next = op.solve(&rhs)?;
        let scale = sup_norm(&next);
        if !(scale <= opts.sup_cutoff) {
            return Err(Error::NoConvergence {
                iterations: k,
                reason: format!("sup-norm {scale:e} exceeded cutoff {:e}", opts.sup_cutoff),
            });
        }
        if next.iter().zip(&w).any(|(a, b)| *a < b - 1e-12 * (1.0 + scale)) {
            return Err(Error::BarrierViolated(format!("iterate {k} decreased somewhere")));
        }
        if let Some(up) = upper {
            if next.iter().zip(up.unknowns()).any(|(a, b)| *a > b + slack(scale)) {
                return Err(Error::BarrierViolated(format!("iterate {k} crossed the upper barrier")));
            }
        }
        let inc = next.iter().zip(&w).fold(0.0f64, |m, (a, b)| m.max(a - b));
        w = next;
        if inc <= opts.tol {
            let polished = newton_polish(op, spec, &w, opts)?;
            return Ok(record(op, spec, &polished.0, k + polished.1));
        }
    }
    // bounded and monotone but slow: finish with the monotone Newton iteration
    match newton_polish(op, spec, &w, opts) {
        Ok((w, it)) => Ok(record(op, spec, &w, opts.cap + it)),
        Err(_) => Err(Error::NoConvergence {
            iterations: opts.cap,
            reason: "iteration cap reached".into(),
        }),
    }
}

const NEWTON_CAP: usize = 300;

/// Monotone Newton iteration for the shifted problem starting from a
/// subsolution. Every linearization must stay positive definite (all
/// elimination pivots positive); losing positivity means λ lies beyond the
/// fold of the minimal branch on this grid.
pub fn newton_polish(
    op: &RadialOperator,
    spec: &ProblemSpec,
    start: &[f64],
    opts: &IterOptions,
) -> Result<(Vec<f64>, usize)> {
    let ra = op.r_alpha(spec.alpha);
    let n = op.dim();
    let p = spec.p;
    let mut w = start[..n].to_vec();
    for it in 1..=NEWTON_CAP {
        let res = shifted_residual(op, &ra, spec, &w);
        let mut jac = op.matrix.clone();
        for i in 0..n {
            jac.diag[i] -= spec.lambda * p * ra[i] * (1.0 + w[i]).abs().powf(p - 1.0);
        }
        if jac.pivots().iter().any(|q| !(*q > 0.0)) {
            return Err(Error::BarrierViolated("linearization lost positivity".into()));
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = jac.solve(&rhs)?;
        for (wi, d) in w.iter_mut().zip(&delta) {
            *wi += d;
        }
        let scale = sup_norm(&w);
        if !(scale <= opts.sup_cutoff) {
            return Err(Error::NoConvergence {
                iterations: it,
                reason: format!("Newton iterate sup-norm {scale:e} exceeded cutoff"),
            });
        }
        if sup_norm(&delta) <= 1e-12 * (1.0 + scale) {
            return Ok((w, it));
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_CAP,
        reason: "Newton polish did not converge".into(),
    })
}

/// Minimal solution at `spec` from the zero subsolution on an M-node grid.
pub fn minimal_solution(spec: &ProblemSpec, m: usize, opts: &IterOptions) -> Result<SolutionRecord> {
    let grid = RadialGrid::new(m);
    let op = assemble_radial_operator(grid, spec.n);
    let upper = default_upper_barrier(&op, spec)?;
    monotone_iterate_with(&op, spec, &RadialField::zeros(grid), upper.as_ref(), opts)
}

/// Supersolution t*·e_α with t* = 1/((p−1)|e_α|_∞), valid below the torsion
/// bound, or the barrier λ^{1/2} e_α when that one holds; `None` otherwise.
pub fn default_upper_barrier(op: &RadialOperator, spec: &ProblemSpec) -> Result<Option<RadialField>> {
    let e = discrete_torsion(op, spec.alpha)?;
    let e_sup = e.sup_norm();
    if spec.lambda <= lambda_star_lower(spec.p, e_sup) {
        let t = 1.0 / ((spec.p - 1.0) * e_sup);
        return Ok(Some(e.scaled(t)));
    }
    if upper_solution_holds(&e, spec, 2) {
        return Ok(Some(e.scaled(spec.lambda.sqrt())));
    }
    Ok(None)
}

fn upper_solution_holds(e: &RadialField, spec: &ProblemSpec, k: u32) -> bool {
    let lk = spec.lambda.powf(1.0 / k as f64);
    e.values
        .iter()
        .all(|ei| lk >= spec.lambda * (1.0 + lk * ei).powf(spec.p) * (1.0 - 1e-14))
}

/// Whether λ^{1/k} e_α is a supersolution: λ^{1/k} ≥ λ(1 + λ^{1/k} e_α)^p at
/// every node (the common factor r^α dropped), with the discrete torsion e_α.
pub fn upper_solution_check(spec: &ProblemSpec, k: u32, grid: RadialGrid) -> Result<bool> {
    assert!(k >= 2, "k must be at least 2");
    let op = assemble_radial_operator(grid, spec.n);
    let e = discrete_torsion(&op, spec.alpha)?;
    Ok(upper_solution_holds(&e, spec, k))
}

/// max over nodes r < 1 of |w/(λ e_α) − 1|, e_α the discrete torsion function.
pub fn asymptotic_ratio(record: &SolutionRecord) -> Result<f64> {
    let w = record
        .field
        .as_radial()
        .ok_or_else(|| Error::InvalidSpec("asymptotic ratio needs a radial record".into()))?;
    if record.form != Formulation::Shifted || !(record.spec.lambda > 0.0) {
        return Err(Error::InvalidSpec("asymptotic ratio needs a minimal w with lambda > 0".into()));
    }
    let op = assemble_radial_operator(w.grid, record.spec.n);
    let e = discrete_torsion(&op, record.spec.alpha)?;
    let lam = record.spec.lambda;
    Ok(w.unknowns()
        .iter()
        .zip(e.unknowns())
        .fold(0.0f64, |m, (wi, ei)| m.max((wi / (lam * ei) - 1.0).abs())))
}

/// Whether the discrete problem has a solution: monotone Newton from w = 0
/// converges with positive linearizations.
pub fn is_solvable(op: &RadialOperator, spec: &ProblemSpec, opts: &IterOptions) -> bool {
    newton_polish(op, spec, &vec![0.0; op.dim()], opts).is_ok()
}

/// Certified bracket for λ* on one grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaStarBracket {
    pub lo: f64,
    pub hi: f64,
    /// Torsion bound (p−1)^{p−1}/(p^p |e_α|_∞), solvable.
    pub lo0: f64,
    /// λ_{1,α}/p, not solvable.
    pub hi0: f64,
    pub lambda_1_alpha: f64,
    pub m: usize,
    pub bisections: usize,
}

impl LambdaStarBracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisection for λ* between the torsion lower bound and λ_{1,α}/p, the width
/// shrunk to `tol·(hi₀ − lo₀)`.
pub fn estimate_lambda_star(n: usize, alpha: f64, p: f64, m: usize, tol: f64) -> Result<LambdaStarBracket> {
    assert!(tol > 0.0);
    let probe = ProblemSpec::radial(n, alpha, p, 0.0);
    probe.validate()?;
    let grid = RadialGrid::new(m);
    let op = assemble_radial_operator(grid, n);
    let lambda_1 = principal_eigenpair(&op, alpha, 1e-12)?.lambda_1_alpha;
    let lo0 = lambda_star_lower(p, e_alpha_max(n, alpha));
    let hi0 = lambda_1 / p;
    if !(lo0 < hi0) {
        return Err(Error::InconsistentBounds { lower: lo0, upper: hi0 });
    }
    let opts = IterOptions::default();
    if !is_solvable(&op, &probe.with_lambda(lo0), &opts) {
        return Err(Error::InconsistentBounds { lower: lo0, upper: hi0 });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    let mut bisections = 0;
    while hi - lo > tol * (hi0 - lo0) {
        let mid = 0.5 * (lo + hi);
        if is_solvable(&op, &probe.with_lambda(mid), &opts) {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
    }
    Ok(LambdaStarBracket {
        lo,
        hi,
        lo0,
        hi0,
        lambda_1_alpha: lambda_1,
        m,
        bisections,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub lambda: f64,
    pub sup_norm: f64,
    pub energy: f64,
    pub ratio: f64,
    pub iterations: usize,
    pub record: SolutionRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchTable {
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    pub rows: Vec<BranchRow>,
    /// λ at which the trace stopped and why.
    pub truncated: Option<(f64, String)>,
    pub lambda_star_bracket: Option<(f64, f64)>,
}

impl BranchTable {
    pub fn to_csv(&self) -> Result<String> {
        use crate::io::{csv_string, fmt_f64};
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.lambda),
                    fmt_f64(r.sup_norm),
                    fmt_f64(r.energy),
                    fmt_f64(r.ratio),
                    r.iterations.to_string(),
                ]
            })
            .collect();
        csv_string(&["lambda", "sup_norm", "energy", "ratio", "iterations"], &rows)
    }
}

fn branch_row(record: SolutionRecord) -> Result<BranchRow> {
    let ratio = asymptotic_ratio(&record)?;
    Ok(BranchRow {
        lambda: record.spec.lambda,
        sup_norm: record.field.sup_norm(),
        energy: record.energy,
        ratio,
        iterations: record.iterations,
        record,
    })
}

/// Continuation along an increasing λ grid: each minimal solution is the
/// subsolution for the next λ.
pub fn trace_minimal_branch(n: usize, alpha: f64, p: f64, lambdas: &[f64], m: usize) -> Result<BranchTable> {
    let mut table = BranchTable {
        n,
        alpha,
        p,
        rows: Vec::new(),
        truncated: None,
        lambda_star_bracket: None,
    };
    if lambdas.is_empty() {
        return Ok(table);
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) || !(lambdas[0] > 0.0) {
        return Err(Error::InvalidSpec("lambda grid must be positive and increasing".into()));
    }
    let grid = RadialGrid::new(m);
    let op = assemble_radial_operator(grid, n);
    let opts = IterOptions::default();
    let mut lower = RadialField::zeros(grid);
    for &lam in lambdas {
        let spec = ProblemSpec::radial(n, alpha, p, lam);
        let upper = default_upper_barrier(&op, &spec)?;
        match monotone_iterate_with(&op, &spec, &lower, upper.as_ref(), &opts) {
            Ok(rec) => {
                lower = rec.field.as_radial().cloned().expect("radial record");
                table.rows.push(branch_row(rec)?);
            }
            Err(e) => {
                table.truncated = Some((lam, e.to_string()));
                break;
            }
        }
    }
    Ok(table)
}

/// Independent minimal solutions (Newton from zero) for each λ, run through
/// `exec`; rows that fail are skipped and reported in `truncated`.
pub fn sweep_minimal(n: usize, alpha: f64, p: f64, lambdas: &[f64], m: usize, exec: Exec) -> Result<BranchTable> {
    let grid = RadialGrid::new(m);
    let op = assemble_radial_operator(grid, n);
    let opts = IterOptions::default();
    let results = exec.map(lambdas, |&lam| {
        let spec = ProblemSpec::radial(n, alpha, p, lam);
        spec.validate()?;
        let (w, it) = newton_polish(&op, &spec, &vec![0.0; op.dim()], &opts)?;
        branch_row(record(&op, &spec, &w, it))
    });
    let mut table = BranchTable {
        n,
        alpha,
        p,
        rows: Vec::new(),
        truncated: None,
        lambda_star_bracket: None,
    };
    for (lam, r) in lambdas.iter().zip(results) {
        match r {
            Ok(row) => table.rows.push(row),
            Err(e) => {
                if table.truncated.is_none() {
                    table.truncated = Some((*lam, e.to_string()));
                }
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_forcing_is_fixed() {
        let spec = ProblemSpec::radial(3, 1.0, 2.0, 0.0);
        let rec = minimal_solution(&spec, 50, &IterOptions::default()).unwrap();
        assert!(rec.field.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn minimal_solution_dominates_lambda_torsion() {
        let spec = ProblemSpec::radial(3, 2.0, 3.0, 1.0);
        let rec = minimal_solution(&spec, 200, &IterOptions::default()).unwrap();
        let grid = RadialGrid::new(200);
        let e = discrete_torsion(&assemble_radial_operator(grid, 3), 2.0).unwrap();
        let w = rec.field.as_radial().unwrap();
        for i in 0..grid.m() + 1 {
            assert!(w.values[i] > spec.lambda * e.values[i]);
        }
        assert!(rec.residual_sup < 1e-8);
    }

    #[test]
    fn supersolution_check_near_upper_bound_fails() {
        let grid = RadialGrid::new(100);
        assert!(upper_solution_check(&ProblemSpec::radial(3, 1.0, 3.0, 1e-3), 2, grid).unwrap());
        assert!(!upper_solution_check(&ProblemSpec::radial(3, 1.0, 3.0, 9.0), 2, grid).unwrap());
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let t = trace_minimal_branch(3, 1.0, 2.0, &[], 50).unwrap();
        assert!(t.rows.is_empty() && t.truncated.is_none());
    }

    #[test]
    fn beyond_eigenvalue_bound_is_unsolvable() {
        let grid = RadialGrid::new(100);
        let op = assemble_radial_operator(grid, 3);
        let l1 = principal_eigenpair(&op, 0.0, 1e-12).unwrap().lambda_1_alpha;
        let spec = ProblemSpec::radial(3, 0.0, 2.0, l1 / 2.0 * 1.01);
        assert!(!is_solvable(&op, &spec, &IterOptions::default()));
    }
}
