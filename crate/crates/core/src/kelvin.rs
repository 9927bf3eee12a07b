//! Exterior problems −ΔU = U^p / |x|^β outside the unit ball, U = a on the
//! sphere, U → 0 at infinity, through the Kelvin transform
//! u(x) = U(x/|x|²)|x|^{2−N}, which turns them into the ball problem
//! −Δu = |x|^{α_eff} u^p, u = a on ∂B, with α_eff = −N − 2 + β + p(N−2).
//!
//! For a > 0 the ball problem is the scaled Hénon problem with u = a + v and
//! λ = a^{p−1}; for a = 0 it is the homogeneous problem at λ = 0.

use serde::{Deserialize, Serialize};

use crate::branch::{minimal_solution, IterOptions};
use crate::closed_forms::critical_exponents;
use crate::domain::{Formulation, ProblemSpec, RadialField, RadialGrid, SolutionRecord};
use crate::mountain_pass::{mp_second_radial, MPConfig};
use crate::{Error, Result};

/// (N, β, p, a) of an exterior problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    pub p: f64,
    pub a: f64,
}

impl ExteriorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidSpec(format!("exterior problems need N >= 3, got {}", self.n)));
        }
        if !(self.p > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidSpec(format!("need p > 0 and finite beta, got p = {}", self.p)));
        }
        if !(self.a >= 0.0) {
            return Err(Error::InvalidSpec(format!("boundary value a must be >= 0, got {}", self.a)));
        }
        Ok(())
    }

    pub fn alpha_eff(&self) -> f64 {
        kelvin_exponent(self.n, self.beta, self.p)
    }
}

/// Weight exponent of the transformed ball problem, −N − 2 + β + p(N−2).
pub fn kelvin_exponent(n: usize, beta: f64, p: f64) -> f64 {
    let nf = n as f64;
    -nf - 2.0 + beta + p * (nf - 2.0)
}

/// The β that [`kelvin_exponent`] maps to `alpha`.
pub fn beta_for_alpha(n: usize, p: f64, alpha: f64) -> f64 {
    let nf = n as f64;
    nf + 2.0 - p * (nf - 2.0) + alpha
}

/// Radial exterior profile on the reciprocal image R = 1/r of a ball grid,
/// ordered by increasing R (R = 1 first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorProfile {
    pub n: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// lim U(R) R^{N−2}, the ball value at the origin node.
    pub far_field: f64,
    /// The same limit by quadratic extrapolation from the first three
    /// interior ball nodes.
    pub far_field_extrapolated: f64,
    /// The ball grid the profile was pushed from.
    pub grid: RadialGrid,
}

impl ExteriorProfile {
    /// U(R) R^{N−2} at every node.
    pub fn decay_profile(&self) -> Vec<f64> {
        let e = self.n as i32 - 2;
        self.radii.iter().zip(&self.values).map(|(r, u)| u * r.powi(e)).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        use crate::io::{csv_string, fmt_f64};
        let rows: Vec<Vec<String>> = self
            .radii
            .iter()
            .zip(&self.values)
            .map(|(r, u)| vec![fmt_f64(*r), fmt_f64(*u)])
            .collect();
        csv_string(&["R", "value"], &rows)
    }
}

/// U(R) = u(1/R) R^{2−N} at R = 1/r_i for every ball node r_i > 0.
pub fn kelvin_push(u: &RadialField, n: usize) -> ExteriorProfile {
    let g = u.grid;
    let e = 2 - n as i32;
    let mut radii = Vec::with_capacity(g.len() - 1);
    let mut values = Vec::with_capacity(g.len() - 1);
    for i in (1..g.len()).rev() {
        let big = 1.0 / g.r(i);
        radii.push(big);
        values.push(u.values[i] * big.powi(e));
    }
    let v = &u.values;
    let far_field_extrapolated = if v.len() > 3 { 3.0 * v[1] - 3.0 * v[2] + v[3] } else { v[0] };
    ExteriorProfile {
        n,
        radii,
        values,
        far_field: v[0],
        far_field_extrapolated,
        grid: g,
    }
}

/// Inverse of [`kelvin_push`]: u(r) = U(1/r) r^{2−N}, origin from the far field.
pub fn kelvin_pull(profile: &ExteriorProfile) -> RadialField {
    let g = profile.grid;
    let e = profile.n as i32 - 2;
    let mut values = vec![0.0; g.len()];
    values[0] = profile.far_field;
    for (k, (big, u)) in profile.radii.iter().zip(&profile.values).enumerate() {
        let i = g.len() - 1 - k;
        values[i] = u * big.powi(e);
    }
    RadialField { grid: g, values }
}

/// −U'' − (N−1)/R U' − U^p R^{−β} at the interior exterior nodes with
/// R ≤ `r_max`, by three-point differences on the nonuniform grid. Returns
/// (R, residual) pairs.
pub fn exterior_residual(profile: &ExteriorProfile, spec: &ExteriorSpec, r_max: f64) -> Vec<(f64, f64)> {
    let x = &profile.radii;
    let u = &profile.values;
    let nf = spec.n as f64;
    (1..x.len() - 1)
        .filter(|&j| x[j] <= r_max)
        .map(|j| {
            let (hm, hp) = (x[j] - x[j - 1], x[j + 1] - x[j]);
            let d2 = 2.0 * (hm * u[j + 1] - (hm + hp) * u[j] + hp * u[j - 1]) / (hm * hp * (hm + hp));
            let d1 = (hm * hm * u[j + 1] + (hp * hp - hm * hm) * u[j] - hp * hp * u[j - 1]) / (hm * hp * (hm + hp));
            let res = -d2 - (nf - 1.0) / x[j] * d1 - u[j].max(0.0).powf(spec.p) * x[j].powf(-spec.beta);
            (x[j], res)
        })
        .collect()
}

/// One case of the exterior existence catalogue that the parameters satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeCase {
    pub label: String,
    pub statement: String,
}

/// Which catalogue cases apply to an exterior spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub spec: ExteriorSpec,
    pub alpha_eff: f64,
    /// p relative to the critical exponent 2*_{α_eff} − 1 of the ball problem.
    pub ball_growth: Option<String>,
    pub cases: Vec<RegimeCase>,
}

pub fn classify_regime(spec: &ExteriorSpec) -> Result<RegimeReport> {
    spec.validate()?;
    let nf = spec.n as f64;
    let (beta, p) = (spec.beta, spec.p);
    let alpha = spec.alpha_eff();
    let two_star = 2.0 * nf / (nf - 2.0);
    let mut cases = Vec::new();
    let mut add = |label: &str, statement: &str| {
        cases.push(RegimeCase {
            label: label.into(),
            statement: statement.into(),
        })
    };
    if spec.a == 0.0 {
        if beta <= 0.0 && p > (nf + 2.0 - 2.0 * beta) / (nf - 2.0) {
            add("a=0 (i)", "beta <= 0, p > (N+2-2beta)/(N-2): at least one positive radial solution");
        }
        if beta > 0.0 && beta <= 0.5 * (nf + 2.0) && p >= (nf + 2.0 - beta) / (nf - 2.0) && p != 1.0 {
            add("a=0 (ii)", "0 < beta <= (N+2)/2, p >= (N+2-beta)/(N-2): at least one positive radial solution");
        }
        if beta > 0.5 * (nf + 2.0) && p != 1.0 {
            add("a=0 (iii)", "beta > (N+2)/2, p > 0, p != 1: at least one positive radial solution");
        }
        if beta > 0.0 && p > 1.0 && p < two_star - 1.0 {
            add(
                "a=0 (v)",
                "1 < p < 2*-1: for beta large, at least [N/2]+1 non rotationally equivalent solutions",
            );
        }
    } else {
        if p > 1.0 && beta >= nf + 2.0 - p * (nf - 2.0) {
            add("a>0 (i)", "p > 1, beta >= N+2-p(N-2): a solution exists iff a is small enough");
        }
        if beta <= 0.0 && p > (nf + 2.0 - 2.0 * beta) / (nf - 2.0) {
            add("a>0 (ii)", "beta <= 0, p > (N+2-2beta)/(N-2): at least two radial solutions for a small");
        }
        if beta > 0.0 && p > 1.0 && p < two_star - 1.0 {
            add("a>0 (iii)", "1 < p < 2*-1: for beta large and a small, multiple positive solutions");
        }
    }
    let ball_growth = (alpha >= 0.0).then(|| {
        let crit = critical_exponents(spec.n, alpha, None).two_star_alpha - 1.0;
        if p < crit {
            "subcritical".to_string()
        } else if p == crit {
            "critical".to_string()
        } else {
            "supercritical".to_string()
        }
    });
    Ok(RegimeReport {
        spec: *spec,
        alpha_eff: alpha,
        ball_growth,
        cases,
    })
}

/// A ball solution u (with u = a on ∂B) and its exterior image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorPair {
    pub ball: SolutionRecord,
    /// u = a(1 + w) or a + v, the unknown of the transformed ball problem.
    pub ball_u: RadialField,
    pub exterior: ExteriorProfile,
    /// Sup of the exterior residual for R ≤ 4.
    pub exterior_residual: f64,
}

/// Solutions of one exterior problem obtained through the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorSolution {
    pub regime: RegimeReport,
    /// λ = a^{p−1} of the ball problem (0 when a = 0).
    pub lambda: f64,
    /// False when the ball problem has no minimal solution (a beyond the
    /// existence threshold).
    pub solvable: bool,
    pub solutions: Vec<ExteriorPair>,
    /// Why an expected second solution is absent.
    pub notes: Vec<String>,
}

/// Radius up to which exterior residuals are reported.
pub const RESIDUAL_WINDOW: f64 = 4.0;

fn pair(spec: &ExteriorSpec, record: SolutionRecord, u: RadialField) -> ExteriorPair {
    let exterior = kelvin_push(&u, spec.n);
    let exterior_residual = exterior_residual(&exterior, spec, RESIDUAL_WINDOW)
        .iter()
        .fold(0.0f64, |m, (_, r)| m.max(r.abs()));
    ExteriorPair {
        ball: record,
        ball_u: u,
        exterior,
        exterior_residual,
    }
}

/// Solve the exterior problem through the ball on an M-node grid.
pub fn exterior_solve(spec: &ExteriorSpec, m: usize, cfg: &MPConfig) -> Result<ExteriorSolution> {
    let regime = classify_regime(spec)?;
    let alpha = regime.alpha_eff;
    if alpha < 0.0 {
        let cases: Vec<&str> = regime.cases.iter().map(|c| c.label.as_str()).collect();
        return Err(Error::ExteriorRegime(format!(
            "alpha_eff = {alpha} < 0, i.e. beta < N+2-p(N-2) = {}; outside the regimes treated through the ball (cases: {})",
            beta_for_alpha(spec.n, spec.p, 0.0),
            if cases.is_empty() { "none".to_string() } else { cases.join(", ") }
        )));
    }
    if !(spec.p > 1.0) {
        return Err(Error::ExteriorRegime(format!(
            "p = {} <= 1: the sublinear exterior problems are not treated by the superlinear ball solvers",
            spec.p
        )));
    }
    let subcritical = regime.ball_growth.as_deref() == Some("subcritical");
    let mut notes = Vec::new();
    let mut solutions = Vec::new();
    if spec.a == 0.0 {
        if !subcritical {
            return Err(Error::ExteriorRegime(format!(
                "a = 0 needs p < 2*_alpha - 1 for the ball mountain pass, got a {} exponent",
                regime.ball_growth.clone().unwrap_or_default()
            )));
        }
        let ball_spec = ProblemSpec::radial(spec.n, alpha, spec.p, 0.0);
        let mp = mp_second_radial(&ball_spec, m, cfg)?;
        let u = mp.mountain_pass.field.as_radial().expect("radial").clone();
        solutions.push(pair(spec, mp.mountain_pass, u));
        return Ok(ExteriorSolution {
            regime,
            lambda: 0.0,
            solvable: true,
            solutions,
            notes,
        });
    }
    let lambda = spec.a.powf(spec.p - 1.0);
    let ball_spec = ProblemSpec::radial(spec.n, alpha, spec.p, lambda);
    ball_spec.validate()?;
    let minimal = match minimal_solution(&ball_spec, m, &IterOptions::default()) {
        Ok(r) => r,
        Err(Error::BarrierViolated(_)) | Err(Error::NoConvergence { .. }) => {
            notes.push(format!("no minimal solution at lambda = a^(p-1) = {lambda:e}: beyond lambda*"));
            return Ok(ExteriorSolution {
                regime,
                lambda,
                solvable: false,
                solutions,
                notes,
            });
        }
        Err(e) => return Err(e),
    };
    let w = minimal.field.as_radial().expect("radial");
    let u = RadialField {
        grid: w.grid,
        values: w.values.iter().map(|x| spec.a * (1.0 + x)).collect(),
    };
    solutions.push(pair(spec, minimal.clone(), u));
    if subcritical {
        match mp_second_radial(&ball_spec, m, cfg) {
            Ok(mp) => {
                let v = mp.mountain_pass.field.as_radial().expect("radial");
                debug_assert_eq!(mp.mountain_pass.form, Formulation::Scaled);
                let u = RadialField {
                    grid: v.grid,
                    values: v.values.iter().map(|x| spec.a + x).collect(),
                };
                solutions.push(pair(spec, mp.mountain_pass, u));
            }
            Err(e) => notes.push(format!("second solution not found: {e}")),
        }
    } else {
        notes.push(format!(
            "{} ball exponent: mountain pass not attempted",
            regime.ball_growth.clone().unwrap_or_default()
        ));
    }
    Ok(ExteriorSolution {
        regime,
        lambda,
        solvable: true,
        solutions,
        notes,
    })
}
