//! Command-line front end for the testbed: Young-function utilities, bump
//! scans, sparse-family construction/verification, and the experiment
//! runners.

use std::io::BufReader;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracbump::bump::{bump_log_comparison, bump_term_left, bump_term_right, BumpReport};
use fracbump::dyadic::{
    construct_sparse_family, enumerate_cubes, sparsity_verify, DyadicLattice, SparseFamily,
};
use fracbump::orlicz::{bp_membership, parse_young};
use fracbump::testbed::{
    self, band_limited_noise, parse_function, parse_scenario, trial_rng, OutputFormat, Scenario,
    ScenarioKind,
};
use fracbump::weights::parse_weight;
use fracbump::Result;

#[derive(Parser)]
#[command(
    name = "fracbump",
    version,
    about = "Two-weight bump testbed for fractional integral commutators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Cells per side (power of two, >= 8)
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    /// json or csv
    #[arg(long)]
    format: Option<String>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) -> Result<()> {
        if let Some(v) = self.grid {
            s.grid_n = v;
        }
        if let Some(v) = self.dim {
            s.dim = v;
        }
        if let Some(v) = self.half_width {
            s.half_width = v;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.p {
            s.p = v;
        }
        if let Some(v) = self.q {
            s.q = v;
        }
        if let Some(v) = self.m {
            s.m = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.trials {
            s.trials = v;
        }
        if let Some(v) = &self.out {
            s.out = Some(v.clone());
        }
        if let Some(v) = &self.format {
            s.format = match v.as_str() {
                "json" => OutputFormat::Json,
                "csv" => OutputFormat::Csv,
                other => {
                    return Err(fracbump::Error::invalid(format!(
                        "format must be json or csv, got {other}"
                    )))
                }
            };
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Young-function utilities
    Young {
        #[command(subcommand)]
        action: YoungAction,
    },
    /// Bump functionals for a configured weight pair
    Bump {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sparse-family construction and certification
    Sparse {
        #[command(subcommand)]
        action: SparseAction,
    },
    /// Empirical operator-norm (sufficiency) experiment
    Opnorm {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Necessity experiments
    Necessity {
        #[command(subcommand)]
        action: NecessityAction,
    },
    /// Bloom-converse experiment
    Bloom {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Kernel-separation experiment
    Kernel {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every module's invariant battery and all experiments
    VerifyAll {
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Subcommand)]
enum YoungAction {
    /// Evaluate A(t)
    Eval {
        #[arg(long)]
        young: String,
        #[arg(long)]
        t: f64,
    },
    /// Invert A at s
    Inverse {
        #[arg(long)]
        young: String,
        #[arg(long)]
        s: f64,
    },
    /// Complementary function with sample values
    Complement {
        #[arg(long)]
        young: String,
    },
    /// B_p / B_{p,q} membership with quadrature diagnostics
    Bp {
        #[arg(long)]
        young: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
    },
}

#[derive(Subcommand)]
enum SparseAction {
    /// Build a stopping-time family from seeded noise and write it out
    Build {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Verify a stored family file and print the certified eta
    Verify { path: String },
}

#[derive(Subcommand)]
enum NecessityAction {
    /// Extremal-function converse for the sparse operator
    Sparse {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Weak-type necessity pieces
    Weak {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(config: &str, kind: ScenarioKind, overrides: &Overrides) -> Result<Scenario> {
    let mut s = parse_scenario(config)?;
    if s.kind != kind {
        return Err(fracbump::Error::invalid(format!(
            "config kind is `{}`, expected `{}`",
            s.kind, kind
        )));
    }
    overrides.apply(&mut s)?;
    s.validate()?;
    Ok(s)
}

fn emit(result: &testbed::ExperimentResult) -> Result<bool> {
    for c in &result.checks {
        println!(
            "{} {}: value {:.6e}, bound {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    if let Some(path) = &result.scenario.out {
        testbed::write_result(result, path)?;
        println!("result written to {path}");
    } else {
        println!("{}", testbed::result_to_json(result)?);
    }
    Ok(result.passed)
}

fn print_report(rep: &BumpReport) {
    println!(
        "{}: sup {:.9e} at {}",
        rep.params.kind,
        rep.supremum,
        rep.argmax.as_deref().unwrap_or("-")
    );
}

fn execute() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Young { action } => {
            match action {
                YoungAction::Eval { young, t } => {
                    let y = parse_young(&young)?;
                    println!("{}", y.eval(t)?);
                }
                YoungAction::Inverse { young, s } => {
                    let y = parse_young(&young)?;
                    println!("{}", y.inverse(s)?);
                }
                YoungAction::Complement { young } => {
                    let y = parse_young(&young)?;
                    let conj = y.complementary()?;
                    println!("complement of {y} is {conj}");
                    for t in [0.5, 1.0, 2.0, 10.0, 100.0] {
                        println!("  A*({t}) = {:.12e}", conj.eval(t)?);
                    }
                }
                YoungAction::Bp { young, p, q } => {
                    let y = parse_young(&young)?;
                    let verdict = bp_membership(&y, p, q)?;
                    println!("{:?}", verdict.class);
                    println!(
                        "  growth ratio {:.6}, critical log slope {:.4}, quadrature convergent: {}",
                        verdict.diagnostics.growth_ratio,
                        verdict.diagnostics.log_slope,
                        verdict.diagnostics.convergent
                    );
                    for (t, v) in &verdict.diagnostics.partial_integrals {
                        println!("  int_1^{t:.3e} = {v:.6e}");
                    }
                }
            }
            Ok(true)
        }
        Command::Bump { config, overrides } => {
            let s = load(&config, ScenarioKind::Sufficiency, &overrides)?;
            let domain = s.domain()?;
            let mu = parse_weight(&s.mu)?.realize(domain)?;
            let nu = parse_weight(&s.nu)?.realize(domain)?;
            let b = parse_function(&s.b)?.realize(domain, s.seed)?;
            let cubes = enumerate_cubes(&DyadicLattice::new(domain), s.min_cells)?;
            let cmp = bump_log_comparison(&mu, &nu, s.p, s.q, s.alpha, s.m, s.delta, &cubes)?;
            print_report(&cmp.term1);
            print_report(&cmp.term2);
            print_report(&cmp.doubled);
            let pp = s.p / (s.p - 1.0);
            let ya = parse_young(&format!("powerlog(p={}, r={})", s.q, s.q - 1.0 + s.delta))?;
            let yb = parse_young(&format!(
                "powerlog(p={}, r={})",
                pp,
                (s.m as f64 + 1.0) * pp - 1.0 + s.delta
            ))?;
            let left = bump_term_left(&mu, &nu, &b, s.p, s.q, s.alpha, s.m, &ya, &yb, &cubes)?;
            let right = bump_term_right(&mu, &nu, &b, s.p, s.q, s.alpha, s.m, &ya, &yb, &cubes)?;
            print_report(&left);
            print_report(&right);
            if let Some(path) = &s.out {
                let payload = serde_json::json!({
                    "term1": cmp.term1, "term2": cmp.term2, "doubled": cmp.doubled,
                    "with_symbol_left": left, "with_symbol_right": right,
                });
                std::fs::write(path, serde_json::to_string_pretty(&payload)?)?;
                println!("reports written to {path}");
            }
            Ok(true)
        }
        Command::Sparse { action } => match action {
            SparseAction::Build { config, overrides } => {
                let s = load(&config, ScenarioKind::Sufficiency, &overrides)?;
                let domain = s.domain()?;
                let mut rng = trial_rng(s.seed, 0);
                let f = band_limited_noise(domain, &mut rng, 0.5);
                let fam = construct_sparse_family(&f, &DyadicLattice::new(domain), s.tau)?;
                let eta = sparsity_verify(&fam)?;
                println!(
                    "family: {} cubes, certified eta {:.6}",
                    fam.addresses().len(),
                    eta
                );
                if let Some(path) = &s.out {
                    let mut file = std::fs::File::create(path)?;
                    fam.write_text(&mut file)?;
                    println!("family written to {path}");
                }
                Ok(true)
            }
            SparseAction::Verify { path } => {
                let file = std::fs::File::open(&path)?;
                let fam = SparseFamily::read_text(&mut BufReader::new(file))?;
                let eta = sparsity_verify(&fam)?;
                println!(
                    "family: {} cubes, stored eta {:.6}, certified eta {:.6}",
                    fam.addresses().len(),
                    fam.eta(),
                    eta
                );
                Ok(eta >= 0.5)
            }
        },
        Command::Opnorm { config, overrides } => {
            let s = load(&config, ScenarioKind::Sufficiency, &overrides)?;
            emit(&testbed::run(&s)?)
        }
        Command::Necessity { action } => match action {
            NecessityAction::Sparse { config, overrides } => {
                let s = load(&config, ScenarioKind::SparseNecessity, &overrides)?;
                emit(&testbed::run(&s)?)
            }
            NecessityAction::Weak { config, overrides } => {
                let s = load(&config, ScenarioKind::WeakNecessity, &overrides)?;
                emit(&testbed::run(&s)?)
            }
        },
        Command::Bloom { config, overrides } => {
            let s = load(&config, ScenarioKind::Bloom, &overrides)?;
            emit(&testbed::run(&s)?)
        }
        Command::Kernel { config, overrides } => {
            let s = load(&config, ScenarioKind::KernelSep, &overrides)?;
            emit(&testbed::run(&s)?)
        }
        Command::VerifyAll { overrides } => {
            let mut s = Scenario::defaults(ScenarioKind::VerifyAll);
            overrides.apply(&mut s)?;
            emit(&testbed::run(&s)?)
        }
    }
}

fn main() -> ExitCode {
    match execute() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
