use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use henon_cli::{run, CliError, Command, RunConfig};

/// Numerical laboratory for Hénon-type problems on the unit ball.
#[derive(Parser, Debug)]
#[command(name = "henon", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Partial symmetry class O(l)×O(N−l); repeatable.
    #[arg(long)]
    l: Vec<usize>,
    /// Leave the axial class out of `levels`.
    #[arg(long)]
    no_axial: bool,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    mr: Option<usize>,
    #[arg(long)]
    mphi: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated λ grid.
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    /// Comma-separated ε list.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Args {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        c.command = self.command;
        macro_rules! set {
            ($($field:ident <- $flag:ident),*) => {$(
                if let Some(v) = self.$flag { c.$field = v; }
            )*};
        }
        set!(n <- n, alpha <- alpha, p <- p, beta <- beta, a <- a, m <- m, mr <- mr, mphi <- mphi, tol <- tol, seed <- seed);
        if self.lambda.is_some() {
            c.lambda = self.lambda;
        }
        if let Some(out) = self.out {
            c.output_dir = out;
        }
        if !self.l.is_empty() {
            c.l = self.l;
        }
        if !self.lambdas.is_empty() {
            c.lambdas = self.lambdas;
        }
        if !self.eps.is_empty() {
            c.eps = self.eps;
        }
        c.axial &= !self.no_axial;
        c.sequential |= self.sequential;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Ok(t) = std::env::var("HENON_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                henon_core::exec::init_threads(n);
            }
            _ => {
                eprintln!("HENON_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(2);
            }
        }
    }
    let result = args.into_config().and_then(run);
    match result {
        Ok(manifest) => {
            for check in &manifest.checks {
                println!("{} {}: {}", if check.pass { "PASS" } else { "FAIL" }, check.name, check.detail);
            }
            for f in &manifest.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(manifest.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("henon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
