//! Weight constructors and weight/oscillation-class diagnostics:
//! `A_{p,q}`, two-weight `A_p`, doubling, `BMO`, weighted `BMO`, `Osc(Phi)`.

use rayon::prelude::*;

use crate::bump::{BumpParams, BumpReport, CubeValue};
use crate::error::{Error, Result};
use crate::grid::{CubeRegion, Domain, GridFunction};
use crate::orlicz::{luxemburg_norm_values, require_arg, split_call, YoungFunction};

/// Declarative weight recipe, realized on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// Constant `c > 0`.
    Constant(f64),
    /// `|x|^a`, with `|x|` clipped below at `h/2` so the realization stays
    /// strictly positive and finite.
    Power(f64),
    /// Pointwise product of sub-specs.
    Product(Vec<WeightSpec>),
    /// Explicit per-cell values.
    Table(Vec<f64>),
}

impl WeightSpec {
    pub fn realize(&self, domain: Domain) -> Result<GridFunction> {
        let w = match self {
            WeightSpec::Constant(c) => {
                if !(*c > 0.0) {
                    return Err(Error::invalid(format!(
                        "constant weight must be positive, got {c}"
                    )));
                }
                GridFunction::constant(domain, *c)?
            }
            WeightSpec::Power(a) => {
                let h = domain.h();
                GridFunction::from_fn(domain, |x| {
                    let r = match x.len() {
                        1 => x[0].abs(),
                        _ => (x[0] * x[0] + x[1] * x[1]).sqrt(),
                    };
                    r.max(h / 2.0).powf(*a)
                })?
            }
            WeightSpec::Product(parts) => {
                let mut acc = GridFunction::constant(domain, 1.0)?;
                for part in parts {
                    let w = part.realize(domain)?;
                    acc = acc.zip_with(&w, |a, b| a * b)?;
                }
                acc
            }
            WeightSpec::Table(values) => GridFunction::from_values(domain, values.clone())?,
        };
        if !w.is_positive() {
            return Err(Error::invalid(
                "weight realization must be strictly positive",
            ));
        }
        Ok(w)
    }

    pub fn spec_string(&self) -> String {
        match self {
            WeightSpec::Constant(c) => format!("const(c={c})"),
            WeightSpec::Power(a) => format!("power(a={a})"),
            WeightSpec::Product(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.spec_string()).collect();
                format!("product[{}]", inner.join("*"))
            }
            WeightSpec::Table(v) => format!("table({} values)", v.len()),
        }
    }
}

/// Parses the config grammar: `const(c=...)`, `power(a=...)`,
/// `table(path=...)` (one value per line).
pub fn parse_weight(spec: &str) -> Result<WeightSpec> {
    let s = spec.trim();
    let (name, args) = split_call(s)?;
    match name {
        "const" => Ok(WeightSpec::Constant(require_arg(&args, "c", s)?)),
        "power" => Ok(WeightSpec::Power(require_arg(&args, "a", s)?)),
        "table" => {
            let path = args
                .iter()
                .find(|(k, _)| k == "path")
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::invalid(format!("table(...) needs path=: {s}")))?;
            let text = std::fs::read_to_string(&path)?;
            let values: Result<Vec<f64>> = text
                .lines()
                .map(|l| l.trim())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| {
                    l.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad weight table value: {l}")))
                })
                .collect();
            Ok(WeightSpec::Table(values?))
        }
        other => Err(Error::invalid(format!("unknown weight kind: {other}"))),
    }
}

fn check_weight(w: &GridFunction, what: &str) -> Result<()> {
    if !w.is_positive() {
        return Err(Error::invalid(format!("{what} must be strictly positive")));
    }
    Ok(())
}

fn scan<F>(cubes: &[CubeRegion], eval: F) -> Result<Vec<CubeValue>>
where
    F: Fn(&CubeRegion) -> f64 + Sync,
{
    let out: Vec<CubeValue> = cubes
        .par_iter()
        .map(|q| CubeValue {
            cube: q.label(),
            value: eval(q),
        })
        .collect();
    if let Some(cv) = out.iter().find(|cv| !cv.value.is_finite()) {
        return Err(Error::Experiment(format!(
            "non-finite scan value on cube {}",
            cv.cube
        )));
    }
    Ok(out)
}

/// `[w]_{A_{p,q}} = sup_Q (avg_Q w^q) (avg_Q w^{-p'})^{q/p'}`,
/// for `1 < p < q < inf`.
pub fn apq_constant(
    omega: &GridFunction,
    p: f64,
    q: f64,
    cubes: &[CubeRegion],
) -> Result<BumpReport> {
    if !(1.0 < p && p < q && q.is_finite()) {
        return Err(Error::invalid(format!(
            "A_(p,q) requires 1 < p < q < inf, got p={p}, q={q}"
        )));
    }
    check_weight(omega, "A_(p,q) weight")?;
    let pp = p / (p - 1.0);
    let per_cube = scan(cubes, |qq| {
        let cells = qq.cells();
        let n = cells.len() as f64;
        let a1 = cells.iter().map(|&i| omega.value(i).powf(q)).sum::<f64>() / n;
        let a2 = cells.iter().map(|&i| omega.value(i).powf(-pp)).sum::<f64>() / n;
        a1 * a2.powf(q / pp)
    })?;
    BumpReport::from_values(
        BumpParams {
            kind: "apq_constant".into(),
            p: Some(p),
            q: Some(q),
            ..Default::default()
        },
        per_cube,
    )
}

/// Two-weight Muckenhoupt quantity
/// `sup_Q (avg_Q mu) (avg_Q nu^{1-p'})^{p-1}`.
pub fn two_weight_ap_constant(
    mu: &GridFunction,
    nu: &GridFunction,
    p: f64,
    cubes: &[CubeRegion],
) -> Result<BumpReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!(
            "two-weight A_p requires 1 < p < inf, got {p}"
        )));
    }
    if mu.domain() != nu.domain() {
        return Err(Error::DomainMismatch(
            "two-weight pair domain mismatch".into(),
        ));
    }
    check_weight(mu, "mu")?;
    check_weight(nu, "nu")?;
    let pp = p / (p - 1.0);
    let per_cube = scan(cubes, |qq| {
        let cells = qq.cells();
        let n = cells.len() as f64;
        let a1 = cells.iter().map(|&i| mu.value(i)).sum::<f64>() / n;
        let a2 = cells
            .iter()
            .map(|&i| nu.value(i).powf(1.0 - pp))
            .sum::<f64>()
            / n;
        a1 * a2.powf(p - 1.0)
    })?;
    BumpReport::from_values(
        BumpParams {
            kind: "two_weight_ap_constant".into(),
            p: Some(p),
            ..Default::default()
        },
        per_cube,
    )
}

/// `sup_Q mu(2Q)/mu(Q)` over the cubes whose concentric double fits in the
/// domain. Errors when no cube in the list admits a double.
pub fn doubling_constant(mu: &GridFunction, cubes: &[CubeRegion]) -> Result<BumpReport> {
    check_weight(mu, "doubling weight")?;
    let mut per_cube = Vec::new();
    for qq in cubes {
        if let Some(big) = qq.doubled() {
            let mass = |region: &CubeRegion| -> f64 {
                region.cells().iter().map(|&i| mu.value(i)).sum::<f64>()
            };
            per_cube.push(CubeValue {
                cube: qq.label(),
                value: mass(&big) / mass(qq),
            });
        }
    }
    if per_cube.is_empty() {
        return Err(Error::GeometryMisfit(
            "no cube in the list has a grid-aligned double inside the domain".into(),
        ));
    }
    BumpReport::from_values(
        BumpParams {
            kind: "doubling_constant".into(),
            ..Default::default()
        },
        per_cube,
    )
}

/// `sup_Q avg_Q |b - b_Q|`.
pub fn bmo_norm_report(b: &GridFunction, cubes: &[CubeRegion]) -> Result<BumpReport> {
    let per_cube = scan(cubes, |qq| {
        let cells = qq.cells();
        let n = cells.len() as f64;
        let avg = cells.iter().map(|&i| b.value(i)).sum::<f64>() / n;
        cells.iter().map(|&i| (b.value(i) - avg).abs()).sum::<f64>() / n
    })?;
    BumpReport::from_values(
        BumpParams {
            kind: "bmo_norm".into(),
            ..Default::default()
        },
        per_cube,
    )
}

pub fn bmo_norm(b: &GridFunction, cubes: &[CubeRegion]) -> Result<f64> {
    Ok(bmo_norm_report(b, cubes)?.supremum)
}

/// `sup_Q eta(Q)^{-1} int_Q |b - b_Q|` with `eta(Q) = sum_Q eta h^dim`.
pub fn weighted_bmo_norm_report(
    b: &GridFunction,
    eta: &GridFunction,
    cubes: &[CubeRegion],
) -> Result<BumpReport> {
    if b.domain() != eta.domain() {
        return Err(Error::DomainMismatch("weighted BMO domain mismatch".into()));
    }
    check_weight(eta, "BMO weight eta")?;
    let per_cube = scan(cubes, |qq| {
        let cells = qq.cells();
        let n = cells.len() as f64;
        let avg = cells.iter().map(|&i| b.value(i)).sum::<f64>() / n;
        let osc: f64 = cells.iter().map(|&i| (b.value(i) - avg).abs()).sum();
        let eta_mass: f64 = cells.iter().map(|&i| eta.value(i)).sum();
        osc / eta_mass
    })?;
    BumpReport::from_values(
        BumpParams {
            kind: "weighted_bmo_norm".into(),
            ..Default::default()
        },
        per_cube,
    )
}

pub fn weighted_bmo_norm(
    b: &GridFunction,
    eta: &GridFunction,
    cubes: &[CubeRegion],
) -> Result<f64> {
    Ok(weighted_bmo_norm_report(b, eta, cubes)?.supremum)
}

/// `sup_Q ||b - b_Q||_{Phi,Q}` (Luxemburg norm per cube).
pub fn osc_phi_norm_report(
    b: &GridFunction,
    phi: &YoungFunction,
    cubes: &[CubeRegion],
) -> Result<BumpReport> {
    let per_cube = scan(cubes, |qq| {
        let cells = qq.cells();
        let n = cells.len() as f64;
        let avg = cells.iter().map(|&i| b.value(i)).sum::<f64>() / n;
        let dev: Vec<f64> = cells.iter().map(|&i| b.value(i) - avg).collect();
        luxemburg_norm_values(&dev, phi)
    })?;
    BumpReport::from_values(
        BumpParams {
            kind: "osc_phi_norm".into(),
            young: vec![phi.spec_string()],
            ..Default::default()
        },
        per_cube,
    )
}

pub fn osc_phi_norm(b: &GridFunction, phi: &YoungFunction, cubes: &[CubeRegion]) -> Result<f64> {
    Ok(osc_phi_norm_report(b, phi, cubes)?.supremum)
}
