//! Run configuration, dispatch and result emission for the `henon` binary.
//!
//! A run computes everything in memory first and only then writes its files,
//! each through an atomic rename, so a failed run leaves no partial output.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use henon_core::branch::{estimate_lambda_star, minimal_solution, sweep_minimal, IterOptions};
use henon_core::closed_forms::{
    bubble_residual, critical_exponents, observed_rate, sobolev_constants, BubbleIntegral, BubbleParams,
};
use henon_core::domain::{ProblemSpec, RadialGrid};
use henon_core::exec::Exec;
use henon_core::io::{csv_string, fmt_f64, radial_field_csv, write_atomic};
use henon_core::kelvin::{beta_for_alpha, exterior_solve, kelvin_exponent, ExteriorSpec};
use henon_core::mountain_pass::{
    level_limit_lambda_zero, level_ordering_report, mp_second_radial, LevelSettings, MPConfig, PlanarResolution,
};
use henon_core::radial::{assemble_radial_operator, principal_eigenpair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    Eig,
    Minimal,
    LambdaStar,
    Branch,
    Mp,
    Levels,
    Limit,
    BubbleCheck,
    Kelvin,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Eig => "eig",
            Command::Minimal => "minimal",
            Command::LambdaStar => "lambda-star",
            Command::Branch => "branch",
            Command::Mp => "mp",
            Command::Levels => "levels",
            Command::Limit => "limit",
            Command::BubbleCheck => "bubble-check",
            Command::Kelvin => "kelvin",
        }
    }
}

/// Everything a run needs. Problem parameters are flat; [`RunConfig::problem`]
/// and [`RunConfig::exterior`] assemble the specs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    pub lambda: Option<f64>,
    /// Partial symmetry classes for `levels`.
    pub l: Vec<usize>,
    /// Include the axial class in `levels`.
    pub axial: bool,
    pub beta: f64,
    /// Boundary value of the exterior problem.
    pub a: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub mr: usize,
    pub mphi: usize,
    pub kappa: f64,
    /// Residual tolerance of the solution checks.
    pub tol: f64,
    /// Relative width of the λ* bracket.
    pub bisection_tol: f64,
    /// λ grid for `branch` (increasing) and `limit` (decreasing). Empty means
    /// fractions of the certified lower end of the λ* bracket.
    pub lambdas: Vec<f64>,
    pub eps: Vec<f64>,
    pub thetas: Vec<f64>,
    pub output_dir: PathBuf,
    /// Seed of the random sample radii of `bubble-check`.
    pub seed: u64,
    pub sequential: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Constants,
            n: 3,
            alpha: 0.0,
            p: 3.0,
            lambda: None,
            l: Vec::new(),
            axial: true,
            beta: 0.0,
            a: 0.05,
            m: 1000,
            mr: 120,
            mphi: 48,
            kappa: 0.8,
            tol: 1e-8,
            bisection_tol: 1e-6,
            lambdas: Vec::new(),
            eps: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5],
            thetas: vec![0.5, 1.0, 2.0],
            output_dir: PathBuf::from("out"),
            seed: 0,
            sequential: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] henon_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Spec validation failures are configuration errors, not numerical ones.
fn spec_err(e: henon_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        for (name, v) in [("tol", self.tol), ("bisection_tol", self.bisection_tol)] {
            if !(v > 0.0) {
                return config_err(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.m < 2 || self.mr < 2 || self.mphi < 2 {
            return config_err("grid sizes M, mr, mphi must be >= 2");
        }
        if !(0.0..1.0).contains(&self.kappa) {
            return config_err(format!("kappa must lie in [0, 1), got {}", self.kappa));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return config_err("lambda grid entries must be > 0");
        }
        let needs_lambda = matches!(self.command, Command::Minimal | Command::Mp | Command::Levels);
        if needs_lambda && self.lambda.is_none() {
            return config_err(format!("{} needs --lambda", self.command.name()));
        }
        match self.command {
            Command::BubbleCheck => {
                if self.eps.len() < 2 || self.thetas.is_empty() {
                    return config_err("bubble-check needs at least two eps values and one theta");
                }
                if self.eps.iter().chain(&self.thetas).any(|x| !(*x > 0.0)) {
                    return config_err("eps and theta values must be > 0");
                }
            }
            Command::Kelvin => {
                self.exterior().validate().map_err(spec_err)?;
            }
            Command::Constants => {
                if self.n < 3 {
                    return config_err("constants need N >= 3");
                }
            }
            Command::Eig => {}
            _ => {
                self.problem(self.lambda.unwrap_or(0.0)).validate().map_err(spec_err)?;
            }
        }
        Ok(())
    }

    pub fn problem(&self, lambda: f64) -> ProblemSpec {
        ProblemSpec::radial(self.n, self.alpha, self.p, lambda)
    }

    pub fn exterior(&self) -> ExteriorSpec {
        ExteriorSpec {
            n: self.n,
            beta: self.beta,
            p: self.p,
            a: self.a,
        }
    }

    pub fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn mp_config(&self) -> MPConfig {
        MPConfig {
            exec: self.exec(),
            ..MPConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config: RunConfig,
    pub created_unix: u64,
    pub stages: Vec<StageTiming>,
    pub files: Vec<PathBuf>,
    pub checks: Vec<CheckResult>,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Files and checks accumulated by one command before anything is written.
#[derive(Default)]
struct Emission {
    files: Vec<(String, Vec<u8>)>,
    checks: Vec<CheckResult>,
    stages: Vec<StageTiming>,
}

impl Emission {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push(StageTiming {
            name: name.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    fn file(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.push((name.into(), body.into()));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        self.file(name, text);
        Ok(())
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.into(),
            pass,
            detail,
        });
    }
}

/// Validate, compute, then write every file and the manifest.
pub fn run(config: RunConfig) -> CliResult<RunManifest> {
    config.validate()?;
    let mut em = Emission::default();
    match config.command {
        Command::Constants => constants(&config, &mut em)?,
        Command::Eig => eig(&config, &mut em)?,
        Command::Minimal => minimal(&config, &mut em)?,
        Command::LambdaStar => lambda_star(&config, &mut em)?,
        Command::Branch => branch(&config, &mut em)?,
        Command::Mp => mp(&config, &mut em)?,
        Command::Levels => levels(&config, &mut em)?,
        Command::Limit => limit(&config, &mut em)?,
        Command::BubbleCheck => bubble_check(&config, &mut em)?,
        Command::Kelvin => kelvin(&config, &mut em)?,
    }
    let dir = config.output_dir.clone();
    let mut files: Vec<PathBuf> = em.files.iter().map(|(name, _)| dir.join(name)).collect();
    files.push(dir.join(MANIFEST_FILE));
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        stages: em.stages,
        files,
        checks: em.checks,
        config,
    };
    for (name, body) in &em.files {
        write_atomic(&dir.join(name), body)?;
    }
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

fn constants(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let table = em.stage("quadrature", || sobolev_constants(cfg.n, cfg.alpha, 512))?;
    let exps = critical_exponents(cfg.n, cfg.alpha, None);
    em.check(
        "quadrature_converged",
        table.quadrature_error < 1e-8,
        format!("relative change under panel halving {:.2e}", table.quadrature_error),
    );
    em.json(
        "constants.json",
        &serde_json::json!({ "constants": table, "critical_exponents": exps }),
    )
}

fn eig(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let op = assemble_radial_operator(RadialGrid::new(cfg.m), cfg.n);
    let pair = em.stage("inverse_iteration", || principal_eigenpair(&op, cfg.alpha, 1e-12))?;
    let positive = pair.phi.unknowns().iter().all(|x| *x > 0.0);
    em.check("eigenfunction_positive", positive, format!("lambda_1 = {}", pair.lambda_1_alpha));
    em.json(
        "eig.json",
        &serde_json::json!({
            "N": cfg.n, "alpha": cfg.alpha, "M": cfg.m,
            "lambda_1_alpha": pair.lambda_1_alpha, "iterations": pair.iterations,
        }),
    )?;
    em.file("eigenfunction.csv", radial_field_csv(&pair.phi)?);
    Ok(())
}

fn minimal(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let spec = cfg.problem(cfg.lambda.expect("validated"));
    let rec = em.stage("monotone_iteration", || minimal_solution(&spec, cfg.m, &IterOptions::default()))?;
    em.check(
        "residual",
        rec.residual_sup <= cfg.tol,
        format!("sup residual {:.3e} (tol {:.1e})", rec.residual_sup, cfg.tol),
    );
    em.json(
        "minimal.json",
        &serde_json::json!({
            "spec": spec, "energy": rec.energy, "sup_norm": rec.field.sup_norm(),
            "residual_sup": rec.residual_sup, "iterations": rec.iterations,
        }),
    )?;
    em.file("minimal.csv", radial_field_csv(rec.field.as_radial().expect("radial"))?);
    Ok(())
}

fn lambda_star(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let b = em.stage("bisection", || {
        estimate_lambda_star(cfg.n, cfg.alpha, cfg.p, cfg.m, cfg.bisection_tol)
    })?;
    em.check(
        "bracket_within_bounds",
        b.lo >= b.lo0 && b.hi <= b.hi0 && b.lo < b.hi,
        format!("[{}, {}] inside [{}, {}]", b.lo, b.hi, b.lo0, b.hi0),
    );
    em.json("lambda_star.json", &b)
}

fn lower_end(cfg: &RunConfig, em: &mut Emission) -> CliResult<f64> {
    let b = em.stage("bracket", || estimate_lambda_star(cfg.n, cfg.alpha, cfg.p, cfg.m, 1e-4))?;
    Ok(b.lo)
}

fn branch(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let lambdas = if cfg.lambdas.is_empty() {
        let lo = lower_end(cfg, em)?;
        (1..=19).map(|k| lo * k as f64 / 20.0).collect()
    } else {
        cfg.lambdas.clone()
    };
    let table = em.stage("sweep", || sweep_minimal(cfg.n, cfg.alpha, cfg.p, &lambdas, cfg.m, cfg.exec()))?;
    let mut rows: Vec<_> = table.rows.iter().collect();
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let increasing = rows.windows(2).all(|w| w[1].sup_norm > w[0].sup_norm);
    em.check(
        "branch_increasing",
        increasing && rows.len() == lambdas.len(),
        format!("{} of {} λ values solved", rows.len(), lambdas.len()),
    );
    em.file("branch.csv", table.to_csv()?);
    Ok(())
}

fn mp(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let spec = cfg.problem(cfg.lambda.expect("validated"));
    let pair = em.stage("mountain_pass", || mp_second_radial(&spec, cfg.m, &cfg.mp_config()))?;
    let (lm, mp) = (&pair.local_min.record, &pair.mountain_pass);
    em.check(
        "residuals",
        lm.residual_sup <= cfg.tol && mp.residual_sup <= cfg.tol,
        format!("local min {:.2e}, mountain pass {:.2e}", lm.residual_sup, mp.residual_sup),
    );
    em.check(
        "distinct_solutions",
        pair.separation > 1e-3 && mp.energy > lm.energy,
        format!("separation {:.4e}, levels {} < {}", pair.separation, lm.energy, mp.energy),
    );
    em.json(
        "mp.json",
        &serde_json::json!({
            "spec": spec, "local_min_energy": lm.energy, "mountain_pass_level": pair.level,
            "separation": pair.separation, "endpoint_scale": pair.endpoint_scale, "sweeps": pair.sweeps,
            "barrier_lambda": pair.local_min.barrier_lambda,
        }),
    )?;
    em.file("local_min.csv", radial_field_csv(lm.field.as_radial().expect("radial"))?);
    em.file("mountain_pass.csv", radial_field_csv(mp.field.as_radial().expect("radial"))?);
    Ok(())
}

fn levels(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let settings = LevelSettings {
        m: cfg.m,
        planar: PlanarResolution {
            mr: cfg.mr,
            mphi: cfg.mphi,
            kappa: cfg.kappa,
        },
        estimate_tolerance: true,
    };
    let report = em.stage("levels", || {
        level_ordering_report(
            cfg.n,
            cfg.alpha,
            cfg.lambda.expect("validated"),
            cfg.p,
            &cfg.l,
            cfg.axial,
            &settings,
            &cfg.mp_config(),
        )
    })?;
    em.check(
        "all_classes_resolved",
        report.missing.is_empty(),
        format!("{} entries, {} distinct, missing {:?}", report.entries.len(), report.distinct_count(), report.missing),
    );
    em.json("levels.json", &report)?;
    em.file("levels.csv", report.to_csv()?);
    Ok(())
}

fn limit(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let lambdas = if cfg.lambdas.is_empty() {
        let lo = lower_end(cfg, em)?;
        [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|f| f * lo).collect()
    } else {
        cfg.lambdas.clone()
    };
    let table = em.stage("limit", || {
        level_limit_lambda_zero(cfg.n, cfg.alpha, cfg.p, &lambdas, cfg.m, &cfg.mp_config())
    })?;
    let shrinking = table.rows.windows(2).all(|w| w[1].gap <= w[0].gap);
    em.check(
        "level_converges",
        shrinking,
        format!("gaps {:?}", table.rows.iter().map(|r| r.gap).collect::<Vec<_>>()),
    );
    em.file("limit.csv", table.to_csv()?);
    Ok(())
}

fn bubble_check(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    if cfg.n < 3 {
        return config_err("bubble-check needs N >= 3");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let radii: Vec<f64> = (0..20).map(|_| rng.gen_range(0.01..2.0)).collect();
    let base = BubbleParams::new(cfg.n, cfg.alpha);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &theta in &cfg.thetas {
        for &r in &radii {
            let res = bubble_residual(r, &base.with_theta(theta));
            worst = worst.max(res.abs());
            rows.push(vec![fmt_f64(theta), fmt_f64(r), fmt_f64(res)]);
        }
    }
    em.check("bubble_residual", worst <= cfg.tol, format!("max residual {worst:.2e}"));
    em.file("bubble_residuals.csv", csv_string(&["theta", "r", "residual"], &rows)?);
    let mut rate_rows = Vec::new();
    let mut all_close = true;
    for which in BubbleIntegral::ALL {
        let (expected, with_log) = which.rate(cfg.n, cfg.alpha);
        let observed = em.stage(which.name(), || observed_rate(&base, which, &cfg.eps))?;
        let rel = (observed - expected).abs() / expected;
        all_close &= rel <= 0.15;
        rate_rows.push(vec![
            which.name().to_string(),
            fmt_f64(expected),
            with_log.to_string(),
            fmt_f64(observed),
            fmt_f64(rel),
        ]);
    }
    em.check("expansion_rates", all_close, "log-log slopes within 15% of the expected exponents".into());
    em.file(
        "bubble_rates.csv",
        csv_string(&["integral", "expected", "log_factor", "observed", "relative_error"], &rate_rows)?,
    );
    Ok(())
}

fn kelvin(cfg: &RunConfig, em: &mut Emission) -> CliResult<()> {
    let spec = cfg.exterior();
    let alpha = kelvin_exponent(spec.n, spec.beta, spec.p);
    let round_trip = kelvin_exponent(spec.n, beta_for_alpha(spec.n, spec.p, alpha), spec.p);
    em.check("exponent_identity", round_trip == alpha, format!("alpha_eff = {alpha}"));
    let sol = em
        .stage("ball_solutions", || exterior_solve(&spec, cfg.m, &cfg.mp_config()))
        .map_err(|e| match e {
            henon_core::Error::ExteriorRegime(_) => spec_err(e),
            e => e.into(),
        })?;
    for (k, s) in sol.solutions.iter().enumerate() {
        let boundary = s.exterior.values[0] == *s.ball_u.values.last().expect("nonempty");
        em.check(
            &format!("boundary_preserved_{k}"),
            boundary,
            format!("U(1) = {}, residual {:.2e}", s.exterior.values[0], s.exterior_residual),
        );
        em.file(format!("kelvin_ball_{k}.csv"), radial_field_csv(&s.ball_u)?);
        em.file(format!("kelvin_exterior_{k}.csv"), s.exterior.to_csv()?);
    }
    em.json(
        "kelvin_regime.json",
        &serde_json::json!({
            "regime": sol.regime, "lambda": sol.lambda, "solvable": sol.solvable,
            "solutions": sol.solutions.len(), "notes": sol.notes,
            "far_fields": sol.solutions.iter().map(|s| s.exterior.far_field).collect::<Vec<_>>(),
        }),
    )
}
