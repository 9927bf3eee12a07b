//! Problem specifications, radial grids and fields, and solution records.

use serde::{Deserialize, Serialize};

use crate::closed_forms::critical_exponents;
use crate::symmetry::Field2D;
use crate::{Error, Result};

/// Symmetry class in which a problem is posed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// Functions of |x| only.
    Radial,
    /// Functions invariant under O(l) × O(N−l), i.e. of (|y|, |z|) with x = (y, z).
    Partial(usize),
    /// Functions of |x| and of the angle to one fixed axis.
    Axial,
}

/// The tuple (N, α, p, λ, symmetry) defining one boundary-value problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct ProblemSpec {
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    pub lambda: f64,
    pub symmetry: Symmetry,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    #[serde(rename = "N")]
    n: usize,
    alpha: f64,
    p: f64,
    lambda: f64,
    symmetry: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
}

impl TryFrom<SpecRepr> for ProblemSpec {
    type Error = String;

    fn try_from(r: SpecRepr) -> std::result::Result<Self, String> {
        let symmetry = match (r.symmetry.to_ascii_lowercase().as_str(), r.l) {
            ("radial", _) => Symmetry::Radial,
            ("axial", _) => Symmetry::Axial,
            ("partial", Some(l)) => Symmetry::Partial(l),
            ("partial", None) => return Err("symmetry \"partial\" requires key \"l\"".into()),
            (other, _) => return Err(format!("unknown symmetry class {other:?}")),
        };
        Ok(Self {
            n: r.n,
            alpha: r.alpha,
            p: r.p,
            lambda: r.lambda,
            symmetry,
        })
    }
}

impl From<ProblemSpec> for SpecRepr {
    fn from(s: ProblemSpec) -> Self {
        let (symmetry, l) = match s.symmetry {
            Symmetry::Radial => ("radial", None),
            Symmetry::Axial => ("axial", None),
            Symmetry::Partial(l) => ("partial", Some(l)),
        };
        Self {
            n: s.n,
            alpha: s.alpha,
            p: s.p,
            lambda: s.lambda,
            symmetry: symmetry.to_string(),
            l,
        }
    }
}

impl ProblemSpec {
    pub fn radial(n: usize, alpha: f64, p: f64, lambda: f64) -> Self {
        Self {
            n,
            alpha,
            p,
            lambda,
            symmetry: Symmetry::Radial,
        }
    }

    pub fn with_symmetry(self, symmetry: Symmetry) -> Self {
        Self { symmetry, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// Boundary value of the scaled problem, a = λ^{1/(p−1)}.
    pub fn a(&self) -> f64 {
        a_from_lambda(self.lambda, self.p)
    }

    /// Check hypotheses and attach derived quantities.
    pub fn validate(&self) -> Result<ValidSpec> {
        let s = *self;
        if s.n == 0 {
            return Err(Error::InvalidSpec("dimension N must be at least 1".into()));
        }
        if !(s.alpha >= 0.0) || !s.alpha.is_finite() {
            return Err(Error::InvalidSpec(format!("alpha must be finite and >= 0, got {}", s.alpha)));
        }
        if !(s.p > 1.0) || !s.p.is_finite() {
            return Err(Error::InvalidSpec(format!("p must exceed 1, got {}", s.p)));
        }
        if !(s.lambda >= 0.0) || !s.lambda.is_finite() {
            return Err(Error::InvalidSpec(format!("lambda must be finite and >= 0, got {}", s.lambda)));
        }
        let l = match s.symmetry {
            Symmetry::Partial(l) => {
                if s.n < 4 {
                    return Err(Error::InvalidSpec(format!(
                        "partial symmetry O(l)xO(N-l) needs N >= 4, got N = {}",
                        s.n
                    )));
                }
                if l >= s.n || s.n - l < 2 || s.n - l > l {
                    return Err(Error::InvalidSpec(format!(
                        "partial symmetry needs 2 <= N-l <= l, got N = {}, l = {l}",
                        s.n
                    )));
                }
                Some(l)
            }
            _ => None,
        };
        let ex = critical_exponents(s.n, s.alpha, l);
        let radial_limit = ex.two_star_alpha - 1.0;
        if s.n >= 3 && s.symmetry == Symmetry::Radial && s.p > radial_limit * (1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "p = {} exceeds 2*_alpha - 1 = {radial_limit} for the radial problem",
                s.p
            )));
        }
        let critical = s.n >= 3 && (s.p - radial_limit).abs() <= 1e-12 * radial_limit;
        let flags = SpecFlags {
            radial_admissible: s.p <= radial_limit * (1.0 + 1e-12),
            radial_critical: critical,
            partial_growth_window: ex.two_l.map(|t| s.p < t - 1.0),
            partial_alpha_threshold: l.map(|l| s.alpha > partial_alpha_threshold(s.n, l)),
            below_sobolev: s.p < ex.two_star - 1.0,
        };
        Ok(ValidSpec {
            spec: s,
            a: s.a(),
            two_star: ex.two_star,
            two_star_alpha: ex.two_star_alpha,
            two_l: ex.two_l,
            flags,
        })
    }
}

/// Conservative validity threshold on α for the partially symmetric class:
/// max{(N+2)²/(2(N−2)), ((N−2)²+5)/(N−3)}. The sharp threshold is not explicit.
pub fn partial_alpha_threshold(n: usize, _l: usize) -> f64 {
    let nf = n as f64;
    let first = (nf + 2.0).powi(2) / (2.0 * (nf - 2.0));
    let second = ((nf - 2.0).powi(2) + 5.0) / (nf - 3.0);
    first.max(second)
}

/// Hypothesis flags recorded by [`ProblemSpec::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecFlags {
    /// p ≤ 2*_α − 1 (always true for N = 1, 2).
    pub radial_admissible: bool,
    /// p = 2*_α − 1 with N ≥ 3.
    pub radial_critical: bool,
    /// p < 2_l − 1, for partial symmetry only.
    pub partial_growth_window: Option<bool>,
    /// α above the conservative threshold, for partial symmetry only.
    pub partial_alpha_threshold: Option<bool>,
    /// p < 2* − 1 (needed for the axial / unrestricted class).
    pub below_sobolev: bool,
}

/// A validated spec with derived quantities attached.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidSpec {
    pub spec: ProblemSpec,
    pub a: f64,
    pub two_star: f64,
    pub two_star_alpha: f64,
    pub two_l: Option<f64>,
    pub flags: SpecFlags,
}

/// a = λ^{1/(p−1)}, so that a^{p−1} = λ.
pub fn a_from_lambda(lambda: f64, p: f64) -> f64 {
    debug_assert!(lambda >= 0.0 && p > 1.0);
    if lambda == 0.0 {
        0.0
    } else {
        lambda.powf(1.0 / (p - 1.0))
    }
}

/// Uniform grid r_i = i·h, i = 0..=M+1, h = 1/(M+1) on [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialGrid {
    m: usize,
}

impl RadialGrid {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "radial grid needs at least two interior nodes");
        Self { m }
    }

    /// Number of interior nodes M (the origin counts as interior).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.m as f64 + 1.0)
    }

    /// Total node count M + 2.
    pub fn len(&self) -> usize {
        self.m + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unknowns: nodes 0..=M (the node at r = 1 carries the boundary value).
    pub fn unknowns(&self) -> usize {
        self.m + 1
    }

    pub fn r(&self, i: usize) -> f64 {
        if i == self.m + 1 {
            1.0
        } else {
            i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.r(i)).collect()
    }

    /// Radial quadrature weights for ∫_0^1 g(r) r^{N−1} dr: trapezoid weights
    /// h·r_i^{N−1} in the interior, h/2 at r = 1, and the exact cell measure
    /// (h/2)^N / N at the origin.
    pub fn weights(&self, n: usize) -> Vec<f64> {
        let h = self.h();
        let nf = n as f64;
        (0..self.len())
            .map(|i| {
                if i == 0 {
                    (0.5 * h).powi(n as i32) / nf
                } else if i == self.m + 1 {
                    0.5 * h
                } else {
                    h * self.r(i).powi(n as i32 - 1)
                }
            })
            .collect()
    }
}

/// Node values on a [`RadialGrid`], boundary node included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: RadialGrid, f: F) -> Self {
        Self {
            grid,
            values: (0..grid.len()).map(|i| f(grid.r(i))).collect(),
        }
    }

    /// Dirichlet field from the unknown vector (nodes 0..=M); the node at r = 1 is 0.
    pub fn from_unknowns(grid: RadialGrid, unknowns: &[f64]) -> Self {
        assert_eq!(unknowns.len(), grid.unknowns());
        let mut values = unknowns.to_vec();
        values.push(0.0);
        Self { grid, values }
    }

    pub fn unknowns(&self) -> &[f64] {
        &self.values[..self.grid.unknowns()]
    }

    pub fn sup_norm(&self) -> f64 {
        crate::linalg::sup_norm(&self.values)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Piecewise-linear interpolation at r ∈ [0, 1].
    pub fn interpolate(&self, r: f64) -> f64 {
        let h = self.grid.h();
        let x = (r / h).clamp(0.0, self.grid.m as f64 + 1.0);
        let i = (x.floor() as usize).min(self.grid.m);
        let t = x - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// Which unknown a stored solution represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    /// w with −Δw = λ|x|^α (1 + w)^p.
    Shifted,
    /// v = a·w with −Δv = |x|^α |v + a|^{p−1}(v + a).
    Scaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Minimal,
    LocalMin,
    MountainPass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldData {
    Radial(RadialField),
    Planar(Field2D),
}

impl FieldData {
    pub fn values(&self) -> &[f64] {
        match self {
            FieldData::Radial(f) => &f.values,
            FieldData::Planar(f) => &f.values,
        }
    }

    pub fn as_radial(&self) -> Option<&RadialField> {
        match self {
            FieldData::Radial(f) => Some(f),
            FieldData::Planar(_) => None,
        }
    }

    pub fn as_planar(&self) -> Option<&Field2D> {
        match self {
            FieldData::Planar(f) => Some(f),
            FieldData::Radial(_) => None,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        crate::linalg::sup_norm(self.values())
    }
}

/// A converged solution. `energy` is always J_λ of the scaled unknown v.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub spec: ProblemSpec,
    pub field: FieldData,
    pub form: Formulation,
    pub energy: f64,
    pub residual_sup: f64,
    pub classification: Classification,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        let v = ProblemSpec::radial(3, 2.0, 3.0, 0.1).validate().unwrap();
        assert_eq!(v.two_star_alpha - 1.0, 9.0);
        assert!(v.flags.radial_admissible);

        let err = ProblemSpec::radial(3, 0.0, 1.0, 0.1).validate();
        assert!(matches!(err, Err(Error::InvalidSpec(_))));

        let s = ProblemSpec::radial(4, 5.0, 2.0, 0.05).with_symmetry(Symmetry::Partial(2));
        let v = s.validate().unwrap();
        assert_eq!(v.two_l, Some(6.0));
        assert_eq!(v.flags.partial_growth_window, Some(true));
    }

    #[test]
    fn validate_rejections() {
        let bad = [
            ProblemSpec::radial(3, -1.0, 3.0, 0.1),
            ProblemSpec::radial(3, 0.0, 3.0, -0.1),
            ProblemSpec::radial(3, 0.0, 6.0, 0.1),
            ProblemSpec::radial(3, 2.0, 3.0, 0.1).with_symmetry(Symmetry::Partial(2)),
            ProblemSpec::radial(5, 2.0, 3.0, 0.1).with_symmetry(Symmetry::Partial(2)),
            ProblemSpec::radial(6, 2.0, 3.0, 0.1).with_symmetry(Symmetry::Partial(5)),
            ProblemSpec::radial(0, 2.0, 3.0, 0.1),
        ];
        for s in bad {
            assert!(s.validate().is_err(), "{s:?} should be rejected");
        }
        // critical exponent is admissible and flagged
        let v = ProblemSpec::radial(3, 0.0, 5.0, 0.1).validate().unwrap();
        assert!(v.flags.radial_critical);
    }

    #[test]
    fn a_from_lambda_examples() {
        assert_eq!(a_from_lambda(1.0, 3.0), 1.0);
        assert!((a_from_lambda(0.25, 3.0) - 0.5).abs() < 1e-15);
        assert!((a_from_lambda(8.0, 4.0) - 2.0).abs() < 1e-15);
        assert_eq!(a_from_lambda(0.0, 2.0), 0.0);
    }

    #[test]
    fn json_round_trip_and_keys() {
        let s = ProblemSpec::radial(4, 5.0, 2.0, 0.05).with_symmetry(Symmetry::Partial(2));
        let js = serde_json::to_string(&s).unwrap();
        assert!(js.contains("\"N\":4") && js.contains("\"l\":2") && js.contains("\"partial\""));
        let back: ProblemSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        let r: ProblemSpec =
            serde_json::from_str(r#"{"N":3,"alpha":2,"p":3,"lambda":0.1,"symmetry":"radial"}"#).unwrap();
        assert_eq!(r, ProblemSpec::radial(3, 2.0, 3.0, 0.1));
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"N":4,"alpha":2,"p":3,"lambda":0.1,"symmetry":"partial"}"#).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = RadialGrid::new(9);
        assert_eq!(g.h(), 0.1);
        let nodes = g.nodes();
        assert_eq!(nodes[0], 0.0);
        assert_eq!(*nodes.last().unwrap(), 1.0);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        // ∫_0^1 r^2 dr = 1/3 with N = 3 weights
        let w = g.weights(3);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0 / 3.0).abs() < 2e-3);
    }

    #[test]
    fn interpolation_is_exact_for_linear_profiles() {
        let g = RadialGrid::new(20);
        let f = RadialField::from_fn(g, |r| 1.0 - r);
        for &r in &[0.0, 0.013, 0.5, 0.777, 1.0] {
            assert!((f.interpolate(r) - (1.0 - r)).abs() < 1e-14);
        }
    }
}
