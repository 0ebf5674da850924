//! Line-oriented `key = value` scenario configs.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Domain;
use crate::testbed::noise::parse_function;
use crate::weights::parse_weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Sufficiency,
    SparseNecessity,
    WeakNecessity,
    Bloom,
    KernelSep,
    VerifyAll,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Option<ScenarioKind> {
        match s {
            "sufficiency" => Some(ScenarioKind::Sufficiency),
            "sparse-necessity" => Some(ScenarioKind::SparseNecessity),
            "weak-necessity" => Some(ScenarioKind::WeakNecessity),
            "bloom" => Some(ScenarioKind::Bloom),
            "kernel-sep" => Some(ScenarioKind::KernelSep),
            "verify-all" => Some(ScenarioKind::VerifyAll),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Sufficiency => "sufficiency",
            ScenarioKind::SparseNecessity => "sparse-necessity",
            ScenarioKind::WeakNecessity => "weak-necessity",
            ScenarioKind::Bloom => "bloom",
            ScenarioKind::KernelSep => "kernel-sep",
            ScenarioKind::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Fully-parameterized experiment description. Weight, symbol, and Young
/// entries are kept as grammar strings so a write/parse round trip is
/// exactly the identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub dim: usize,
    pub grid_n: usize,
    pub half_width: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub m: u32,
    pub delta: f64,
    pub seed: u64,
    pub trials: usize,
    pub mu: String,
    pub nu: String,
    pub lambda: String,
    pub b: String,
    /// Candidate weight for the Bloom recovery comparison (defaults to the
    /// canonical quotient when absent).
    pub eta_prime: Option<String>,
    /// Relative size of the multiplicative perturbation in the Bloom
    /// discriminator.
    pub epsilon: f64,
    pub tau: f64,
    pub min_cells: usize,
    pub tol_ineq: f64,
    pub tol_refine: f64,
    pub out: Option<String>,
    pub format: OutputFormat,
}

impl Scenario {
    pub fn defaults(kind: ScenarioKind) -> Scenario {
        Scenario {
            kind,
            dim: 1,
            grid_n: 128,
            half_width: 2.0,
            p: 2.0,
            q: 4.0,
            alpha: 0.25,
            m: 1,
            delta: 0.5,
            seed: 17,
            trials: 8,
            mu: "const(c=1)".into(),
            nu: "const(c=1)".into(),
            lambda: "const(c=1)".into(),
            b: "linear".into(),
            eta_prime: None,
            epsilon: 0.3,
            tau: 4.0,
            min_cells: 4,
            tol_ineq: 0.05,
            tol_refine: 1.5,
            out: None,
            format: OutputFormat::Json,
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::new(self.dim, self.half_width, self.grid_n)
    }

    /// Validates grammar entries and basic ranges.
    pub fn validate(&self) -> Result<()> {
        self.domain()?;
        parse_weight(&self.mu)?;
        parse_weight(&self.nu)?;
        parse_weight(&self.lambda)?;
        parse_function(&self.b)?;
        if let Some(e) = &self.eta_prime {
            parse_function(e)?;
        }
        if !(self.p > 1.0 && self.p <= self.q) {
            return Err(Error::invalid(format!(
                "need 1 < p <= q, got p={}, q={}",
                self.p, self.q
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < self.dim as f64) {
            return Err(Error::invalid(format!(
                "need 0 < alpha < dim, got alpha={}, dim={}",
                self.alpha, self.dim
            )));
        }
        if !(self.tau > 1.0) {
            return Err(Error::invalid("tau must exceed 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be positive"));
        }
        Ok(())
    }

    pub fn write_config(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "kind = {}", self.kind)?;
        writeln!(w, "dim = {}", self.dim)?;
        writeln!(w, "grid_n = {}", self.grid_n)?;
        writeln!(w, "half_width = {}", self.half_width)?;
        writeln!(w, "p = {}", self.p)?;
        writeln!(w, "q = {}", self.q)?;
        writeln!(w, "alpha = {}", self.alpha)?;
        writeln!(w, "m = {}", self.m)?;
        writeln!(w, "delta = {}", self.delta)?;
        writeln!(w, "seed = {}", self.seed)?;
        writeln!(w, "trials = {}", self.trials)?;
        writeln!(w, "mu = {}", self.mu)?;
        writeln!(w, "nu = {}", self.nu)?;
        writeln!(w, "lambda = {}", self.lambda)?;
        writeln!(w, "b = {}", self.b)?;
        if let Some(e) = &self.eta_prime {
            writeln!(w, "eta_prime = {e}")?;
        }
        writeln!(w, "epsilon = {}", self.epsilon)?;
        writeln!(w, "tau = {}", self.tau)?;
        writeln!(w, "min_cells = {}", self.min_cells)?;
        writeln!(w, "tol_ineq = {}", self.tol_ineq)?;
        writeln!(w, "tol_refine = {}", self.tol_refine)?;
        if let Some(o) = &self.out {
            writeln!(w, "out = {o}")?;
        }
        writeln!(
            w,
            "format = {}",
            match self.format {
                OutputFormat::Json => "json",
                OutputFormat::Csv => "csv",
            }
        )?;
        Ok(())
    }

    pub fn parse_config(text: &str) -> Result<Scenario> {
        let mut kind = None;
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (k, v) = line.split_once('=').ok_or(Error::Config {
                line: lineno,
                msg: format!("expected key = value, got `{line}`"),
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k == "kind" {
                kind = Some(ScenarioKind::parse(&v).ok_or(Error::Config {
                    line: lineno,
                    msg: format!("unknown kind `{v}`"),
                })?);
            } else {
                entries.push((lineno, k, v));
            }
        }
        let kind = kind.ok_or(Error::Config {
            line: 0,
            msg: "missing required key `kind`".into(),
        })?;
        let mut s = Scenario::defaults(kind);
        for (lineno, k, v) in entries {
            let bad = |what: &str| Error::Config {
                line: lineno,
                msg: format!("bad {what} value `{v}`"),
            };
            match k.as_str() {
                "dim" => s.dim = v.parse().map_err(|_| bad("dim"))?,
                "grid_n" => s.grid_n = v.parse().map_err(|_| bad("grid_n"))?,
                "half_width" => s.half_width = v.parse().map_err(|_| bad("half_width"))?,
                "p" => s.p = v.parse().map_err(|_| bad("p"))?,
                "q" => s.q = v.parse().map_err(|_| bad("q"))?,
                "alpha" => s.alpha = v.parse().map_err(|_| bad("alpha"))?,
                "m" => s.m = v.parse().map_err(|_| bad("m"))?,
                "delta" => s.delta = v.parse().map_err(|_| bad("delta"))?,
                "seed" => s.seed = v.parse().map_err(|_| bad("seed"))?,
                "trials" => s.trials = v.parse().map_err(|_| bad("trials"))?,
                "mu" => s.mu = v,
                "nu" => s.nu = v,
                "lambda" => s.lambda = v,
                "b" => s.b = v,
                "eta_prime" => s.eta_prime = Some(v),
                "epsilon" => s.epsilon = v.parse().map_err(|_| bad("epsilon"))?,
                "tau" => s.tau = v.parse().map_err(|_| bad("tau"))?,
                "min_cells" => s.min_cells = v.parse().map_err(|_| bad("min_cells"))?,
                "tol_ineq" => s.tol_ineq = v.parse().map_err(|_| bad("tol_ineq"))?,
                "tol_refine" => s.tol_refine = v.parse().map_err(|_| bad("tol_refine"))?,
                "out" => s.out = Some(v),
                "format" => {
                    s.format = match v.as_str() {
                        "json" => OutputFormat::Json,
                        "csv" => OutputFormat::Csv,
                        _ => return Err(bad("format")),
                    }
                }
                other => {
                    return Err(Error::Config {
                        line: lineno,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        s.validate()?;
        Ok(s)
    }
}

/// Reads and validates a scenario config file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Scenario::parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let s = Scenario::parse_config("kind = sufficiency\n").unwrap();
        assert_eq!(s.kind, ScenarioKind::Sufficiency);
        assert_eq!(s.grid_n, 128);
        assert_eq!(s.tau, 4.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Scenario::parse_config("kind = bloom\nwobble = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("wobble"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn round_trip_is_identity() {
        let mut s = Scenario::defaults(ScenarioKind::Bloom);
        s.mu = "power(a=0.5)".into();
        s.lambda = "power(a=0.25)".into();
        s.eta_prime = Some("powerabs(a=0.125)".into());
        s.alpha = 0.25;
        s.out = Some("bloom.json".into());
        let mut buf = Vec::new();
        s.write_config(&mut buf).unwrap();
        let back = Scenario::parse_config(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn validation_catches_bad_ranges() {
        let mut s = Scenario::defaults(ScenarioKind::Sufficiency);
        s.alpha = 1.5;
        assert!(s.validate().is_err());
        let mut s = Scenario::defaults(ScenarioKind::Sufficiency);
        s.p = 5.0; // p > q
        assert!(s.validate().is_err());
        let mut s = Scenario::defaults(ScenarioKind::Sufficiency);
        s.mu = "power(b=1)".into();
        assert!(s.validate().is_err());
    }
}
