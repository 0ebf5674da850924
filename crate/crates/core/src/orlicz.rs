//! Young functions, complementary functions, Luxemburg (Orlicz-average)
//! norms on cubes, and `B_p` / `B_{p,q}` membership.
//!
//! A Young function here is `A(t) = coeff * base(t)` with `base` drawn from a
//! tagged family: `t^p`, `t^p (log(e+t))^r`, `e^t - 1`, or a monotone table.
//! The power-log family admits `p = 1` with `r > 0` (the `L(log L)^r` scale);
//! plain powers require `p > 1`.

use std::f64::consts::E;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{CubeRegion, GridFunction};

/// Relative tolerance for Luxemburg-norm bisection.
const LUXEMBURG_REL_TOL: f64 = 1e-12;
/// Relative tolerance for numeric inversion.
const INVERSE_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
enum Family {
    Power {
        p: f64,
    },
    PowerLog {
        p: f64,
        r: f64,
    },
    ExpMinusOne,
    /// Strictly increasing samples, interpolated linearly in log-log space
    /// and extended beyond the ends by the terminal segment slopes.
    Tabulated {
        log_t: Vec<f64>,
        log_a: Vec<f64>,
    },
}

/// A member of the Young-function family, `A(t) = coeff * base(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungFunction {
    family: Family,
    coeff: f64,
}

impl YoungFunction {
    /// `t^p` with `p > 1`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::invalid(format!(
                "power family requires p > 1, got {p}"
            )));
        }
        Ok(YoungFunction {
            family: Family::Power { p },
            coeff: 1.0,
        })
    }

    /// `t^p (log(e+t))^r`. Requires `p > 1`, or `p = 1` with `r > 0`
    /// (the `L(log L)^r` scale).
    pub fn power_log(p: f64, r: f64) -> Result<Self> {
        if !p.is_finite() || !r.is_finite() {
            return Err(Error::invalid("powerlog parameters must be finite"));
        }
        if !(p > 1.0 || (p == 1.0 && r > 0.0)) {
            return Err(Error::invalid(format!(
                "powerlog requires p > 1, or p = 1 with r > 0; got p={p}, r={r}"
            )));
        }
        Ok(YoungFunction {
            family: Family::PowerLog { p, r },
            coeff: 1.0,
        })
    }

    /// `e^t - 1`.
    pub fn exp_minus_one() -> Self {
        YoungFunction {
            family: Family::ExpMinusOne,
            coeff: 1.0,
        }
    }

    /// Monotone samples `(t_i, a_i)`, both strictly increasing and positive.
    pub fn tabulated(ts: &[f64], values: &[f64]) -> Result<Self> {
        if ts.len() != values.len() || ts.len() < 2 {
            return Err(Error::invalid(
                "tabulated family needs at least two matched samples",
            ));
        }
        for w in ts.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::invalid(
                    "tabulated abscissae must be positive and strictly increasing",
                ));
            }
        }
        for w in values.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::invalid(
                    "tabulated values must be positive and strictly increasing",
                ));
            }
        }
        Ok(YoungFunction {
            family: Family::Tabulated {
                log_t: ts.iter().map(|t| t.ln()).collect(),
                log_a: values.iter().map(|a| a.ln()).collect(),
            },
            coeff: 1.0,
        })
    }

    /// Same family scaled by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("scale must be positive, got {c}")));
        }
        Ok(YoungFunction {
            family: self.family.clone(),
            coeff: self.coeff * c,
        })
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    /// Number of stored samples for tabulated families, 0 otherwise.
    pub fn table_len(&self) -> usize {
        match &self.family {
            Family::Tabulated { log_t, .. } => log_t.len(),
            _ => 0,
        }
    }

    /// Infallible evaluation for `t >= 0` (used by inner loops).
    pub(crate) fn at(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t == 0.0 {
            return 0.0;
        }
        let base = match &self.family {
            Family::Power { p } => t.powf(*p),
            Family::PowerLog { p, r } => t.powf(*p) * (E + t).ln().powf(*r),
            Family::ExpMinusOne => t.exp_m1(),
            Family::Tabulated { log_t, log_a } => interp_loglog(log_t, log_a, t.ln()).exp(),
        };
        self.coeff * base
    }

    /// `A(t)`; errors on negative `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::invalid(format!("eval requires t >= 0, got {t}")));
        }
        Ok(self.at(t))
    }

    /// The unique `t >= 0` with `A(t) = s`, to relative tolerance 1e-12.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if s < 0.0 || !s.is_finite() {
            return Err(Error::invalid(format!("inverse requires s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            Family::Power { p } => Ok((s / self.coeff).powf(1.0 / p)),
            Family::ExpMinusOne => Ok((s / self.coeff).ln_1p()),
            _ => {
                let mut hi = 1.0f64;
                let mut guard = 0;
                while self.at(hi) < s {
                    hi *= 2.0;
                    guard += 1;
                    if guard > 1100 {
                        return Err(Error::invalid("inverse bracket overflow"));
                    }
                }
                let mut lo = hi / 2.0;
                while lo > 0.0 && self.at(lo) > s {
                    lo /= 2.0;
                }
                debug_assert!(lo > 0.0);
                for _ in 0..200 {
                    if hi - lo <= INVERSE_REL_TOL * hi {
                        break;
                    }
                    let mid = (lo * hi).sqrt();
                    if self.at(mid) < s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok((lo * hi).sqrt())
            }
        }
    }

    /// The complementary function `A*(t) = sup_s (st - A(s))`.
    ///
    /// Power families get the calculus supremum in closed form. Power-log
    /// families with `p > 1` get the standard equivalent family
    /// `t^{p'} / (log(e+t))^{p'r/p}` (comparable to the exact conjugate up to
    /// fixed constants; see [`YoungFunction::conjugate_at`] for the exact
    /// value). Everything else is transformed numerically and returned as a
    /// table.
    pub fn complementary(&self) -> Result<YoungFunction> {
        match &self.family {
            Family::Power { p } => {
                let pp = p / (p - 1.0);
                let c = self.coeff.powf(1.0 - pp) * (p - 1.0) * p.powf(-pp);
                YoungFunction::power(pp)?.scaled(c)
            }
            Family::PowerLog { p, r } if *p > 1.0 => {
                let pp = p / (p - 1.0);
                let c = self.coeff.powf(1.0 - pp);
                YoungFunction::power_log(pp, -pp * r / p)?.scaled(c)
            }
            Family::Tabulated { log_t, .. } if log_t.len() < 64 => Err(Error::invalid(format!(
                "numeric complementary needs >= 64 samples, got {}",
                log_t.len()
            ))),
            _ => self.legendre_conjugate_tabulated(1e-4, 1e8, 512),
        }
    }

    /// Exact conjugate value `sup_{s>0} (st - A(s))` at a single point,
    /// by grid bracketing plus golden-section refinement of the concave
    /// objective.
    pub fn conjugate_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let obj = |s: f64| s * t - self.at(s);
        // Coarse log-grid argmax.
        let mut best_s = 0.0f64;
        let mut best = 0.0f64;
        let (lo, hi) = (1e-9f64, 1e9f64);
        let steps = 600;
        for k in 0..=steps {
            let s = lo * (hi / lo).powf(k as f64 / steps as f64);
            let v = obj(s);
            if v.is_finite() && v > best {
                best = v;
                best_s = s;
            }
        }
        if best_s == 0.0 {
            return 0.0;
        }
        // Golden-section polish on the bracketing decade.
        let mut a = best_s / 2.0;
        let mut b = best_s * 2.0;
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..120 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if obj(c) < obj(d) {
                a = c;
            } else {
                b = d;
            }
        }
        obj(0.5 * (a + b)).max(0.0)
    }

    /// Numeric Legendre transform sampled on a log grid.
    pub fn legendre_conjugate_tabulated(
        &self,
        t_lo: f64,
        t_hi: f64,
        nodes: usize,
    ) -> Result<YoungFunction> {
        if !(t_lo > 0.0 && t_hi > t_lo) || nodes < 16 {
            return Err(Error::invalid("bad Legendre grid"));
        }
        let mut ts = Vec::with_capacity(nodes);
        let mut vals = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let t = t_lo * (t_hi / t_lo).powf(k as f64 / (nodes - 1) as f64);
            let v = self.conjugate_at(t);
            if v > 0.0 && v.is_finite() {
                // Keep the table strictly increasing.
                if let Some(&last) = vals.last() {
                    if v <= last {
                        continue;
                    }
                }
                ts.push(t);
                vals.push(v);
            }
        }
        if ts.len() < 16 {
            return Err(Error::invalid(
                "Legendre transform degenerate on the requested grid",
            ));
        }
        YoungFunction::tabulated(&ts, &vals)
    }

    /// Sampled structural checks: `A(2t) >= 2 A(t)` (convexity surrogate)
    /// and `A(t)/t` nondecreasing with unbounded growth (superlinearity),
    /// on a log grid.
    pub fn sampled_young_check(&self) -> YoungSampleCheck {
        let lo: f64 = 1e-4;
        let hi: f64 = 1e6;
        let n = 64;
        let mut doubling_ok = true;
        let mut slope_ok = true;
        let mut prev_ratio = 0.0f64;
        let mut first_ratio = f64::INFINITY;
        let mut last_ratio = 0.0f64;
        for k in 0..=n {
            let t = lo * (hi / lo).powf(k as f64 / n as f64);
            let a = self.at(t);
            let a2 = self.at(2.0 * t);
            if a > 0.0 && a2.is_finite() && a2 < 2.0 * a * (1.0 - 1e-12) {
                doubling_ok = false;
            }
            let ratio = a / t;
            if k > 0 && ratio < prev_ratio * (1.0 - 1e-12) {
                slope_ok = false;
            }
            prev_ratio = ratio;
            first_ratio = first_ratio.min(ratio);
            last_ratio = last_ratio.max(ratio);
        }
        YoungSampleCheck {
            doubling_ok,
            superlinear_ok: slope_ok && last_ratio > 10.0 * first_ratio,
            zero_at_zero: self.at(0.0) == 0.0,
        }
    }

    /// Grammar string, e.g. `powerlog(p=2,r=1.5)`.
    pub fn spec_string(&self) -> String {
        let base = match &self.family {
            Family::Power { p } => format!("power(p={p})"),
            Family::PowerLog { p, r } => format!("powerlog(p={p},r={r})"),
            Family::ExpMinusOne => "expm1".to_string(),
            Family::Tabulated { log_t, .. } => format!("table({} samples)", log_t.len()),
        };
        if (self.coeff - 1.0).abs() < 1e-15 {
            base
        } else {
            format!("{base}*{}", self.coeff)
        }
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoungSampleCheck {
    pub doubling_ok: bool,
    pub superlinear_ok: bool,
    pub zero_at_zero: bool,
}

impl YoungSampleCheck {
    pub fn all_ok(&self) -> bool {
        self.doubling_ok && self.superlinear_ok && self.zero_at_zero
    }
}

fn interp_loglog(log_t: &[f64], log_a: &[f64], u: f64) -> f64 {
    let n = log_t.len();
    let seg = if u <= log_t[0] {
        0
    } else if u >= log_t[n - 1] {
        n - 2
    } else {
        match log_t.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    };
    let slope = (log_a[seg + 1] - log_a[seg]) / (log_t[seg + 1] - log_t[seg]);
    log_a[seg] + slope * (u - log_t[seg])
}

/// Luxemburg norm of raw samples under the normalized counting measure:
/// smallest `lambda` with `mean_i A(|v_i| / lambda) <= 1`.
pub fn luxemburg_norm_values(values: &[f64], young: &YoungFunction) -> f64 {
    luxemburg_core(values, |t| young.at(t))
}

/// Same as [`luxemburg_norm_values`] with an arbitrary gauge evaluator
/// (must be increasing with `a(0) = 0` and superlinear growth).
pub fn luxemburg_core(values: &[f64], a: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return 0.0;
    }
    let mean =
        |lambda: f64| -> f64 { values.iter().map(|v| a(v.abs() / lambda)).sum::<f64>() / n as f64 };
    let mut hi = max_abs;
    let mut guard = 0;
    while mean(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            break;
        }
    }
    let mut lo = hi / 2.0;
    guard = 0;
    while mean(lo) <= 1.0 {
        hi = lo;
        lo /= 2.0;
        guard += 1;
        if guard > 2000 || lo < 1e-300 {
            return 0.0;
        }
    }
    for _ in 0..200 {
        if hi - lo <= LUXEMBURG_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mean(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Orlicz average `||f||_{A,Q}` over the cells of a cube.
pub fn luxemburg_norm(f: &GridFunction, young: &YoungFunction, q: &CubeRegion) -> Result<f64> {
    if f.domain() != q.domain() {
        return Err(Error::DomainMismatch(
            "luxemburg_norm domain mismatch".into(),
        ));
    }
    let vals: Vec<f64> = q.cells().iter().map(|&i| f.value(i)).collect();
    if vals.is_empty() {
        return Err(Error::DegenerateCube("luxemburg_norm on empty cube".into()));
    }
    Ok(luxemburg_norm_values(&vals, young))
}

/// Outcome of a generalized-Hoelder comparison on one cube.
#[derive(Debug, Clone, Copy)]
pub struct HolderCheck {
    /// Max sampled `A^{-1}(t) B^{-1}(t) / C^{-1}(t)` over large `t`.
    pub kappa: f64,
    /// `||fg||_{C,Q} / (||f||_{A,Q} ||g||_{B,Q})`; 0 when `fg = 0` on `Q`.
    pub ratio: f64,
}

/// Checks `||fg||_{C,Q} <= 2 kappa ||f||_{A,Q} ||g||_{B,Q}` material:
/// reports the sampled compatibility constant `kappa` and the measured
/// ratio. Errors when the ratio is undefined (zero denominator with a
/// nonzero numerator).
pub fn generalized_holder_check(
    f: &GridFunction,
    g: &GridFunction,
    a: &YoungFunction,
    b: &YoungFunction,
    c: &YoungFunction,
    q: &CubeRegion,
) -> Result<HolderCheck> {
    let kappa = inverse_product_kappa(a, b, c)?;
    let cells = q.cells();
    let fv: Vec<f64> = cells.iter().map(|&i| f.value(i)).collect();
    let gv: Vec<f64> = cells.iter().map(|&i| g.value(i)).collect();
    let fg: Vec<f64> = fv.iter().zip(&gv).map(|(x, y)| x * y).collect();
    let num = luxemburg_norm_values(&fg, c);
    let den = luxemburg_norm_values(&fv, a) * luxemburg_norm_values(&gv, b);
    if den == 0.0 {
        if num == 0.0 {
            return Ok(HolderCheck { kappa, ratio: 0.0 });
        }
        return Err(Error::invalid(
            "generalized Hoelder: zero denominator with nonzero numerator",
        ));
    }
    Ok(HolderCheck {
        kappa,
        ratio: num / den,
    })
}

/// Max of `A^{-1}(t) B^{-1}(t) / C^{-1}(t)` over a log grid of large `t`.
pub fn inverse_product_kappa(
    a: &YoungFunction,
    b: &YoungFunction,
    c: &YoungFunction,
) -> Result<f64> {
    let mut kappa = 0.0f64;
    let n = 64;
    for k in 0..=n {
        let t = 1e2 * (1e8f64 / 1e2).powf(k as f64 / n as f64);
        let v = a.inverse(t)? * b.inverse(t)? / c.inverse(t)?;
        if !v.is_finite() {
            return Err(Error::IncompatibleYoung(
                "inverse product diverges on samples".into(),
            ));
        }
        kappa = kappa.max(v);
    }
    Ok(kappa)
}

/// Verdict of a `B_p` / `B_{p,q}` membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpClass {
    InBp,
    NotInBp,
    InBpq,
    NotInBpq,
}

/// Quadrature evidence behind a verdict.
#[derive(Debug, Clone)]
pub struct BpDiagnostics {
    /// `(T, int_1^T kernel)` at decade-like checkpoints.
    pub partial_integrals: Vec<(f64, f64)>,
    /// Geometric tail ratio of consecutive unit-log segments.
    pub growth_ratio: f64,
    /// Fitted slope of `log J_k` against `log k` on the tail (relevant in
    /// the critical-power regime).
    pub log_slope: f64,
    /// The quadrature-side convergence call.
    pub convergent: bool,
}

#[derive(Debug, Clone)]
pub struct BpVerdict {
    pub class: BpClass,
    pub diagnostics: BpDiagnostics,
}

impl BpVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self.class, BpClass::InBp | BpClass::InBpq)
    }
}

/// Classifies `A in B_p` (when `q` is `None`) or `A in B_{p,q}`.
///
/// Built-in power and power-log families are classified in closed form;
/// `e^t - 1` is never in any `B_p`; tabulated families are classified by the
/// quadrature diagnostic alone. The diagnostic integrals are always computed
/// and reported.
pub fn bp_membership(a: &YoungFunction, p: f64, q: Option<f64>) -> Result<BpVerdict> {
    if !(p > 1.0) {
        return Err(Error::invalid(format!("B_p requires p > 1, got {p}")));
    }
    if let Some(qv) = q {
        if qv < p {
            return Err(Error::invalid(format!(
                "B_(p,q) requires q >= p, got p={p}, q={qv}"
            )));
        }
    }
    // Kernel G(t) = A(t)^{q/p} / t^{q+1}, with q = p for plain B_p.
    let (num_pow, den_pow) = match q {
        None => (1.0, p),
        Some(qv) => (qv / p, qv),
    };
    let diagnostics = tail_quadrature(a, num_pow, den_pow);
    let member_closed = match &a.family {
        Family::Power { p: ap } => Some(*ap < p),
        Family::PowerLog { p: ap, r } => {
            // (q/p) ap vs q power balance reduces to ap < p, or ap = p with
            // (q/p) r < -1.
            Some(*ap < p || (*ap == p && num_pow * *r < -1.0))
        }
        Family::ExpMinusOne => Some(false),
        Family::Tabulated { .. } => None,
    };
    let member = member_closed.unwrap_or(diagnostics.convergent);
    let class = match (q.is_some(), member) {
        (false, true) => BpClass::InBp,
        (false, false) => BpClass::NotInBp,
        (true, true) => BpClass::InBpq,
        (true, false) => BpClass::NotInBpq,
    };
    Ok(BpVerdict { class, diagnostics })
}

/// Segment quadrature of `int_1^inf A(t)^{num_pow} / t^{den_pow} dt/t` over
/// unit-log segments `[e^k, e^{k+1}]`, with growth-ratio and critical-slope
/// classification.
fn tail_quadrature(a: &YoungFunction, num_pow: f64, den_pow: f64) -> BpDiagnostics {
    let kernel = |t: f64| -> f64 { a.at(t).powf(num_pow) / t.powf(den_pow) };
    let segments = 120usize;
    let mut j = Vec::with_capacity(segments);
    for k in 0..segments {
        // Simpson in u = log t: integrand G(e^u) (the 1/t of dt/t cancels).
        let (u0, u1) = (k as f64, k as f64 + 1.0);
        let m = 32;
        let hstep = (u1 - u0) / m as f64;
        let mut s = 0.0;
        for i in 0..m {
            let ua = u0 + i as f64 * hstep;
            let ub = ua + hstep;
            let um = 0.5 * (ua + ub);
            let (fa, fm, fb) = (kernel(ua.exp()), kernel(um.exp()), kernel(ub.exp()));
            s += (fa + 4.0 * fm + fb) * hstep / 6.0;
        }
        if !s.is_finite() {
            // Overflowing tail: unambiguously divergent.
            return BpDiagnostics {
                partial_integrals: partials(&j),
                growth_ratio: f64::INFINITY,
                log_slope: f64::INFINITY,
                convergent: false,
            };
        }
        j.push(s);
    }
    let growth_ratio = (j[segments - 1] / j[segments - 6]).powf(0.2);
    // Least-squares slope of ln J_k on ln k over the tail half.
    let lo = segments / 2;
    let pts: Vec<(f64, f64)> = (lo..segments)
        .filter(|&k| j[k] > 0.0)
        .map(|k| ((k as f64).ln(), j[k].ln()))
        .collect();
    let log_slope = if pts.len() > 4 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::NEG_INFINITY
    };
    let convergent = if growth_ratio <= 0.99 {
        true
    } else if growth_ratio >= 1.01 {
        false
    } else {
        log_slope < -1.02
    };
    BpDiagnostics {
        partial_integrals: partials(&j),
        growth_ratio,
        log_slope,
        convergent,
    }
}

fn partials(j: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    for (k, v) in j.iter().enumerate() {
        acc += v;
        if (k + 1) % 20 == 0 {
            out.push((((k + 1) as f64).exp(), acc));
        }
    }
    out
}

/// Parses the config grammar: `power(p=...)`, `powerlog(p=..., r=...)`,
/// `expm1`, `table(path=...)`.
pub fn parse_young(spec: &str) -> Result<YoungFunction> {
    let s = spec.trim();
    if s == "expm1" {
        return Ok(YoungFunction::exp_minus_one());
    }
    let (name, args) = split_call(s)?;
    match name {
        "power" => {
            let p = require_arg(&args, "p", s)?;
            YoungFunction::power(p)
        }
        "powerlog" => {
            let p = require_arg(&args, "p", s)?;
            let r = require_arg(&args, "r", s)?;
            YoungFunction::power_log(p, r)
        }
        "table" => {
            let path = args
                .iter()
                .find(|(k, _)| k == "path")
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::invalid(format!("table(...) needs path=: {s}")))?;
            let text = std::fs::read_to_string(&path)?;
            let mut ts = Vec::new();
            let mut vs = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let parts: Vec<&str> = line
                    .split([',', ' ', '\t'])
                    .filter(|p| !p.is_empty())
                    .collect();
                if parts.len() != 2 {
                    return Err(Error::invalid(format!("bad table line: {line}")));
                }
                ts.push(
                    parts[0]
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad number in table: {line}")))?,
                );
                vs.push(
                    parts[1]
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad number in table: {line}")))?,
                );
            }
            YoungFunction::tabulated(&ts, &vs)
        }
        other => Err(Error::invalid(format!("unknown young family: {other}"))),
    }
}

/// Splits `name(k=v, k=v)` into name and key-value pairs. Used by the young
/// and weight grammars.
pub(crate) fn split_call(s: &str) -> Result<(&str, Vec<(String, String)>)> {
    let open = s
        .find('(')
        .ok_or_else(|| Error::invalid(format!("expected name(args): {s}")))?;
    if !s.ends_with(')') {
        return Err(Error::invalid(format!("unbalanced parentheses: {s}")));
    }
    let name = &s[..open];
    let inner = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("expected key=value in {s}, got {part}")))?;
        args.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok((name, args))
}

pub(crate) fn require_arg(args: &[(String, String)], key: &str, ctx: &str) -> Result<f64> {
    args.iter()
        .find(|(k, _)| k == key)
        .ok_or_else(|| Error::invalid(format!("missing {key}= in {ctx}")))?
        .1
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("bad numeric {key}= in {ctx}")))
}
