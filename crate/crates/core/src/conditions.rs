//! Executable checkers for the existence and path-regularity conditions of
//! mixed moving averages `X(t) = ∫∫ f(x, t−u) Λ(dx, du)`.
//!
//! Every checker returns a [`ConditionReport`]: a headline verdict, the
//! sub-verdicts it was assembled from, any exponent fits, and a conclusion.
//! A positive conclusion is only drawn when every premise verdict is
//! definite; otherwise the report is `Indeterminate`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{trawl_ah_measure, KernelSpec};
use crate::measure::{DependenceMeasure, LevyMeasure, LogSide, MomentVerdict, VerdictStatus};
use crate::quad::QuadConfig;
use crate::stats::linreg;

const INF: f64 = f64::INFINITY;

/// Full process specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MMASpec {
    pub kernel: KernelSpec,
    pub levy: LevyMeasure,
    pub pi: DependenceMeasure,
    #[serde(default)]
    pub drift: f64,
}

impl MMASpec {
    pub fn new(kernel: KernelSpec, levy: LevyMeasure, pi: DependenceMeasure, drift: f64) -> Self {
        Self { kernel, levy, pi, drift }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.levy.validate()?;
        self.pi.validate()?;
        if !self.drift.is_finite() {
            return Err(Error::InvalidParameter("drift must be finite".into()));
        }
        self.kernel.check_compatible(&self.pi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    CadlagModificationExists,
    ContinuousModificationExists,
    AbsolutelyContinuousPaths,
    NoAbsoluteContinuity,
    NoCadlagModification,
    ExistenceHolds,
    ExistenceFails,
    Indeterminate,
}

impl Conclusion {
    pub fn is_definite(self) -> bool {
        self != Conclusion::Indeterminate
    }
}

/// A verdict that is either an integral verdict or a plain pass/fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Verdict {
    Moment(MomentVerdict),
    Boolean(bool),
}

impl Verdict {
    fn status(&self) -> Tri {
        match self {
            Verdict::Moment(m) => match m.status {
                VerdictStatus::Finite { .. } => Tri::Yes,
                VerdictStatus::Divergent { .. } => Tri::No,
                VerdictStatus::Inconclusive => Tri::Unknown,
            },
            Verdict::Boolean(b) => {
                if *b {
                    Tri::Yes
                } else {
                    Tri::No
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tri {
    Yes,
    No,
    Unknown,
}

fn all_of(items: &[Tri]) -> Tri {
    if items.iter().any(|t| *t == Tri::No) {
        Tri::No
    } else if items.iter().any(|t| *t == Tri::Unknown) {
        Tri::Unknown
    } else {
        Tri::Yes
    }
}

/// One named premise of a checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCondition {
    pub id: String,
    pub verdict: Verdict,
}

/// Least-squares fit of `log I(t)` against `log t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub id: String,
    pub target: f64,
    #[serde(with = "crate::ext::real")]
    pub slope: f64,
    #[serde(with = "crate::ext::real")]
    pub r2: f64,
    pub pass: bool,
    #[serde(with = "crate::ext::vec")]
    pub t: Vec<f64>,
    #[serde(with = "crate::ext::vec")]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_id: String,
    pub verdict: Verdict,
    pub conclusion: Conclusion,
    pub params: Params,
    pub evidence: Vec<SubCondition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<ExponentFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ConditionReport {
    fn new(id: &str, verdict: Verdict, conclusion: Conclusion, params: Params) -> Self {
        Self { condition_id: id.to_string(), verdict, conclusion, params, evidence: Vec::new(), fits: Vec::new(), flags: Vec::new() }
    }
    fn sub(&mut self, id: &str, v: Verdict) -> Tri {
        let t = v.status();
        self.evidence.push(SubCondition { id: id.to_string(), verdict: v });
        t
    }
    fn flag(&mut self, f: impl Into<String>) {
        self.flags.push(f.into());
    }
}

/// Numerical settings shared by all checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub quad: QuadConfig,
    /// Dyadic `t`-grid for exponent fits.
    #[serde(with = "crate::ext::vec")]
    pub t_grid: Vec<f64>,
    pub fit_tol: f64,
    pub r2_min: f64,
    pub slack: f64,
    pub eps_scan: Vec<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            t_grid: (11..=20).rev().map(|k| 2f64.powi(-k)).collect(),
            fit_tol: 0.05,
            r2_min: 0.99,
            slack: 0.01,
            eps_scan: vec![1.0, 0.5, 0.1, 0.01],
        }
    }
}

fn mv(v: MomentVerdict) -> Verdict {
    Verdict::Moment(v)
}

/// Product of two non-negative verdicts with `0·∞ = 0`.
fn times(a: &MomentVerdict, b: &MomentVerdict) -> MomentVerdict {
    match (a.value(), b.value()) {
        (Some(x), _) if x == 0.0 => MomentVerdict::finite(0.0, Vec::new()),
        (_, Some(y)) if y == 0.0 => MomentVerdict::finite(0.0, Vec::new()),
        (Some(x), Some(y)) => MomentVerdict::finite(x * y, Vec::new()),
        _ if a.is_inconclusive() || b.is_inconclusive() => MomentVerdict::inconclusive(Vec::new()),
        _ => MomentVerdict::divergent(0.0, Vec::new()),
    }
}

fn constant(c: f64) -> MomentVerdict {
    MomentVerdict::exact(c)
}

fn params_alpha_eps(alpha: f64, eps: f64, spec: &MMASpec) -> Params {
    Params {
        alpha: Some(alpha),
        epsilon: Some(eps),
        kappa: match spec.kernel {
            KernelSpec::PowerWeighted { kappa } => Some(kappa),
            _ => None,
        },
        ..Params::default()
    }
}

/// `(x^κ z ∧ 1)`-type inner integral for the power-weighted existence condition.
fn pw_existence_inner(lm: &LevyMeasure, kappa: f64, x: f64, z_lo: f64, cfg: &QuadConfig) -> f64 {
    let r = x.powf(-kappa).max(z_lo);
    let small = lm.partial_moment(1.0, z_lo, r, cfg).extended();
    let tail = lm.tail_mass(r);
    let lz = lm.log_moment_above(r, cfg).extended();
    let a = if small == 0.0 { 0.0 } else { x.powf(kappa - 1.0) * small };
    let b = if tail == 0.0 { 0.0 } else { (1.0 + kappa * x.ln()) * tail + lz };
    a + b.max(0.0) / x
}

/// Power-weighted `∫∫ [x^{κ−1} z 1(x^κ z ≤ 1) + (1 + log(x^κ z)) x^{−1} 1(x^κ z > 1)] λ(dz) π(dx)`
/// over jumps `z > z_lo`.
pub fn pw_existence_integral(spec: &MMASpec, kappa: f64, z_lo: f64, cfg: &QuadConfig) -> MomentVerdict {
    spec.pi.integrate(|x| pw_existence_inner(&spec.levy, kappa, x, z_lo, cfg), 0.0, INF, cfg)
}

/// Sufficient existence route through the logarithmically weighted π-moments.
fn pw_log_weighted(spec: &MMASpec, kappa: f64, checker: &CheckConfig) -> (MomentVerdict, MomentVerdict) {
    let bg = spec.levy.bg_indices(checker.slack);
    let (eta, beta) = (bg.eta, bg.beta);
    let p1 = eta.min(1.0) * kappa - 1.0;
    let side1 = if eta > 0.0 { LogSide::LogInvX } else { LogSide::None };
    let l1 = spec.pi.pi_log_weighted_moment(p1, side1, 0.0, 1.0, &checker.quad);
    let p2 = beta * kappa - 1.0;
    let side2 = if beta == 0.0 { LogSide::LogX } else { LogSide::None };
    let l2 = spec.pi.pi_log_weighted_moment(p2, side2, 1.0, INF, &checker.quad);
    (l1, l2)
}

/// Existence of the process.
pub fn check_existence(spec: &MMASpec, checker: &CheckConfig) -> Result<ConditionReport> {
    spec.validate()?;
    let cfg = &checker.quad;
    match &spec.kernel {
        KernelSpec::SupOU | KernelSpec::WellBalancedSupOU => {
            let id = if spec.kernel.is_continuous() { "existence.well_balanced" } else { "existence.supou" };
            let inv = spec.pi.pi_moment(-1.0, 0.0, INF, cfg);
            let lg = spec.levy.log_moment(cfg);
            let headline = inv.plus(&lg);
            let mut r = ConditionReport::new(id, mv(headline), Conclusion::Indeterminate, Params::default());
            let t1 = r.sub("pi.inverse_moment", mv(inv));
            let t2 = r.sub("levy.log_moment", mv(lg));
            r.conclusion = match all_of(&[t1, t2]) {
                Tri::Yes => Conclusion::ExistenceHolds,
                Tri::No => Conclusion::ExistenceFails,
                Tri::Unknown => Conclusion::Indeterminate,
            };
            Ok(r)
        }
        KernelSpec::Trawl { trawl_fn } => {
            let m = spec.pi.support().1;
            let v = constant(trawl_fn.integral_capped(INF, m));
            let mut r = ConditionReport::new("existence.trawl", mv(v.clone()), Conclusion::Indeterminate, Params::default());
            let t = r.sub("trawl.integral", mv(v));
            r.conclusion = match t {
                Tri::Yes => Conclusion::ExistenceHolds,
                Tri::No => Conclusion::ExistenceFails,
                Tri::Unknown => Conclusion::Indeterminate,
            };
            Ok(r)
        }
        KernelSpec::PowerWeighted { kappa } => Ok(check_existence_pw(spec, *kappa, checker)),
    }
}

fn check_existence_pw(spec: &MMASpec, kappa: f64, checker: &CheckConfig) -> ConditionReport {
    let cfg = &checker.quad;
    let bg = spec.levy.bg_indices(checker.slack);
    let params = Params { kappa: Some(kappa), beta: Some(bg.beta), eta: Some(bg.eta), ..Params::default() };
    let fv = spec.levy.partial_moment(1.0, 0.0, 1.0, cfg);
    let mean = spec.pi.pi_moment(kappa - 1.0, 0.0, INF, cfg);
    let mut r = ConditionReport::new("existence.power_weighted", Verdict::Boolean(false), Conclusion::Indeterminate, params);
    r.sub("levy.small_jump_first_moment", mv(fv.clone()));
    // the drift constant (m minus the small-jump mean in the finite-variation case) must be integrable
    let drift_needed = |eff: f64| eff != 0.0;

    if let Some(m1) = fv.value() {
        let full = pw_existence_integral(spec, kappa, 0.0, cfg);
        let t_full = r.sub("power_weighted.poisson_integral", mv(full.clone()));
        let t_mean = if drift_needed(spec.drift - m1) { r.sub("pi.mean_moment", mv(mean.clone())) } else { Tri::Yes };
        let mut outcome = all_of(&[t_full, t_mean]);
        if t_full == Tri::Unknown {
            let lg = spec.levy.log_moment(cfg);
            let (l1, l2) = pw_log_weighted(spec, kappa, checker);
            let t = all_of(&[r.sub("levy.log_moment", mv(lg)), r.sub("power_weighted.log_weighted_small_x", mv(l1)), r.sub("power_weighted.log_weighted_large_x", mv(l2))]);
            if t == Tri::Yes {
                outcome = all_of(&[Tri::Yes, t_mean]);
            } else {
                r.flag("sufficient_route_failed");
            }
        }
        r.verdict = mv(full);
        r.conclusion = match outcome {
            Tri::Yes => Conclusion::ExistenceHolds,
            Tri::No => Conclusion::ExistenceFails,
            Tri::Unknown => Conclusion::Indeterminate,
        };
        return r;
    }
    if fv.is_inconclusive() {
        r.flag("finite_variation_unknown");
        return r;
    }
    // infinite variation: compensated small jumps through the π-moment route, big jumps through the Poisson criterion
    let beta = bg.beta;
    let c1 = spec.pi.pi_moment(2.0 * kappa - 1.0, 0.0, 1.0, cfg);
    let c2 = spec.pi.pi_moment(beta.max(1.0) * kappa - 1.0, 1.0, INF, cfg);
    let big = pw_existence_integral(spec, kappa, 1.0, cfg);
    let t1 = r.sub("power_weighted.compensated_small_x", mv(c1));
    let t2 = r.sub("power_weighted.compensated_large_x", mv(c2));
    let t3 = r.sub("power_weighted.big_jump_poisson_integral", mv(big.clone()));
    let t4 = if drift_needed(spec.drift) { r.sub("pi.mean_moment", mv(mean)) } else { Tri::Yes };
    r.verdict = mv(big);
    r.conclusion = if t3 == Tri::No || t4 == Tri::No {
        Conclusion::ExistenceFails
    } else {
        match all_of(&[t1, t2, t3, t4]) {
            Tri::Yes => Conclusion::ExistenceHolds,
            Tri::No => {
                r.flag("sufficient_route_failed");
                Conclusion::Indeterminate
            }
            Tri::Unknown => Conclusion::Indeterminate,
        }
    };
    r
}

/// The envelope integral `∫∫∫_{z>1} (g(x,−u) z ∧ 1) π(dx) du λ(dz)`.
pub fn envelope_integral(spec: &MMASpec, cfg: &QuadConfig) -> MomentVerdict {
    let lm = &spec.levy;
    let tail1 = constant(lm.tail_mass(1.0));
    match &spec.kernel {
        KernelSpec::SupOU | KernelSpec::WellBalancedSupOU => {
            let sides = if spec.kernel.is_continuous() { 2.0 } else { 1.0 };
            let pi_mass = constant(spec.pi.total_mass());
            let inv = spec.pi.pi_moment(-1.0, 0.0, INF, cfg);
            let log_part = tail1.plus(&lm.log_moment(cfg));
            times(&pi_mass, &tail1).plus(&times(&inv, &log_part).scale(sides))
        }
        KernelSpec::Trawl { trawl_fn } => {
            let m = spec.pi.support().1;
            let sweep = constant(trawl_fn.a0().min(m) + trawl_fn.integral_capped(INF, m));
            times(&tail1, &sweep)
        }
        KernelSpec::PowerWeighted { kappa } => {
            let kappa = *kappa;
            let inner = |x: f64| {
                let r = x.powf(-kappa).max(1.0);
                let m1 = lm.partial_moment(1.0, 1.0, r, cfg).extended();
                let tail = lm.tail_mass(r);
                let lz = lm.log_moment_above(r, cfg).extended();
                let a = if m1 == 0.0 { 0.0 } else { (x.powf(kappa) + x.powf(kappa - 1.0)) * m1 };
                let b = if tail == 0.0 { 0.0 } else { (1.0 + (1.0 + kappa * x.ln()) / x) * tail + lz / x };
                a + b
            };
            spec.pi.integrate(inner, 0.0, INF, cfg)
        }
    }
}

/// Fits the growth exponent of `values` against `t`.
pub(crate) fn fit_exponent(id: &str, t: &[f64], values: &[f64], target: f64, checker: &CheckConfig) -> (ExponentFit, Tri) {
    let mut fit = ExponentFit { id: id.to_string(), target, slope: f64::NAN, r2: f64::NAN, pass: false, t: t.to_vec(), values: values.to_vec() };
    if values.iter().any(|v| !v.is_finite()) {
        return (fit, if values.iter().any(|v| v.is_nan()) { Tri::Unknown } else { Tri::No });
    }
    if values.iter().all(|v| *v == 0.0) && !t.is_empty() {
        fit.slope = INF;
        fit.r2 = 1.0;
        fit.pass = true;
        return (fit, Tri::Yes);
    }
    let pts: Vec<(f64, f64)> = t.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(t, v)| (t.ln(), v.ln())).collect();
    let distinct = {
        let mut ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.len()
    };
    if pts.len() < 3 || distinct < 3 {
        return (fit, Tri::Unknown);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let lr = linreg(&xs, &ys);
    fit.slope = lr.slope;
    fit.r2 = lr.r2;
    if lr.slope >= target - checker.fit_tol && lr.r2 >= checker.r2_min {
        fit.pass = true;
        (fit, Tri::Yes)
    } else if lr.r2 < checker.r2_min && lr.slope >= target - checker.fit_tol {
        (fit, Tri::Unknown)
    } else {
        (fit, Tri::No)
    }
}

fn increment_values(spec: &MMASpec, alpha: f64, checker: &CheckConfig) -> Result<Vec<f64>> {
    checker
        .t_grid
        .iter()
        .map(|&t| spec.kernel.increment_integral(&spec.pi, 0.0, t, alpha, &checker.quad).map(|v| v.extended()))
        .collect()
}

fn min_increment_values(spec: &MMASpec, alpha: f64, checker: &CheckConfig) -> Result<Vec<f64>> {
    checker
        .t_grid
        .iter()
        .map(|&t| {
            let mut worst: f64 = 0.0;
            for frac in [0.25, 0.5, 0.75] {
                let v = spec.kernel.min_increment_integral(&spec.pi, frac * t, t, alpha, &checker.quad)?.extended();
                if v.is_nan() {
                    return Ok(f64::NAN);
                }
                worst = worst.max(v);
            }
            Ok(worst)
        })
        .collect()
}

fn existence_gate(spec: &MMASpec, r: &mut ConditionReport, checker: &CheckConfig) -> Result<bool> {
    let ex = check_existence(spec, checker)?;
    let ok = ex.conclusion == Conclusion::ExistenceHolds;
    r.evidence.push(SubCondition { id: "existence".into(), verdict: Verdict::Boolean(ok) });
    if !ok {
        r.flag("existence_not_verified");
    }
    Ok(ok)
}

/// Sufficient conditions for a càdlàg modification.
pub fn check_cadlag(spec: &MMASpec, alpha: f64, epsilon: f64, checker: &CheckConfig) -> Result<ConditionReport> {
    check_regularity(spec, alpha, epsilon, checker, false)
}

/// Sufficient conditions for a continuous modification (continuous kernels only).
pub fn check_continuous(spec: &MMASpec, alpha: f64, epsilon: f64, checker: &CheckConfig) -> Result<ConditionReport> {
    if !spec.kernel.is_continuous() {
        return Err(Error::Incompatible("continuity checker needs a continuous kernel (well-balanced family)".into()));
    }
    check_regularity(spec, alpha, epsilon, checker, true)
}

fn check_regularity(spec: &MMASpec, alpha: f64, epsilon: f64, checker: &CheckConfig, continuous: bool) -> Result<ConditionReport> {
    spec.validate()?;
    if !(1.0..=2.0).contains(&alpha) || !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("need alpha in [1,2] and epsilon > 0".into()));
    }
    let cfg = &checker.quad;
    let id = if continuous { "continuous.theorem" } else { "cadlag.theorem" };
    let mut r = ConditionReport::new(id, Verdict::Boolean(false), Conclusion::Indeterminate, params_alpha_eps(alpha, epsilon, spec));
    if !existence_gate(spec, &mut r, checker)? {
        return Ok(r);
    }
    let pre = spec.levy.partial_moment(alpha, 0.0, 1.0, cfg);
    if r.sub("levy.small_jump_alpha_moment", mv(pre)) != Tri::Yes {
        r.flag("precondition_failed");
        return Ok(r);
    }
    let env = envelope_integral(spec, cfg);
    let t_env = r.sub(if continuous { "continuous.envelope_integral" } else { "cadlag.envelope_integral" }, mv(env));

    let inc = increment_values(spec, alpha, checker)?;
    let mut tris = vec![t_env];
    if continuous {
        let (fit, t) = fit_exponent("continuous.increment_rate", &checker.t_grid, &inc, 1.0 + epsilon, checker);
        r.fits.push(fit);
        tris.push(t);
    } else {
        let (fit, t) = fit_exponent("cadlag.increment_rate", &checker.t_grid, &inc, 0.5 + 0.5 * epsilon, checker);
        r.fits.push(fit);
        tris.push(t);
        let mins = min_increment_values(spec, alpha, checker)?;
        let (fit, t) = fit_exponent("cadlag.min_increment_rate", &checker.t_grid, &mins, 1.0 + epsilon, checker);
        r.fits.push(fit);
        tris.push(t);
    }
    let all = all_of(&tris);
    r.verdict = Verdict::Boolean(all == Tri::Yes);
    if all == Tri::Yes {
        r.conclusion = if continuous { Conclusion::ContinuousModificationExists } else { Conclusion::CadlagModificationExists };
    } else if all == Tri::No {
        r.flag("premise_failed");
    }
    Ok(r)
}

/// Family-specific sufficient conditions, scanning `ε` from large to small.
pub fn check_corollary_fastpath(spec: &MMASpec, checker: &CheckConfig) -> Result<ConditionReport> {
    spec.validate()?;
    let cfg = &checker.quad;
    let positive = if spec.kernel.is_continuous() { Conclusion::ContinuousModificationExists } else { Conclusion::CadlagModificationExists };
    match &spec.kernel {
        KernelSpec::Trawl { trawl_fn } => {
            let mut r = ConditionReport::new("fastpath.trawl_holder", Verdict::Boolean(false), Conclusion::Indeterminate, Params::default());
            if !existence_gate(spec, &mut r, checker)? {
                return Ok(r);
            }
            r.sub("trawl.non_increasing", Verdict::Boolean(trawl_fn.validate().is_ok()));
            match trawl_fn.holder() {
                Some(h) if trawl_fn.a0().is_finite() => {
                    r.sub("trawl.holder_metadata", Verdict::Boolean(true));
                    r.params.epsilon = Some(h.delta.min(1.0));
                    r.verdict = Verdict::Boolean(true);
                    r.conclusion = positive;
                }
                _ => {
                    r.sub("trawl.holder_metadata", Verdict::Boolean(false));
                    r.flag("missing_holder_metadata");
                }
            }
            Ok(r)
        }
        KernelSpec::SupOU | KernelSpec::WellBalancedSupOU => {
            let id = if spec.kernel.is_continuous() { "fastpath.well_balanced" } else { "fastpath.supou" };
            let mut r = ConditionReport::new(id, Verdict::Boolean(false), Conclusion::Indeterminate, Params::default());
            if !existence_gate(spec, &mut r, checker)? {
                return Ok(r);
            }
            let mut any_unknown = false;
            for &eps in &checker.eps_scan {
                let v = spec.pi.pi_moment(eps, 1.0, INF, cfg);
                let t = r.sub(&format!("pi.tail_moment[eps={eps}]"), mv(v.clone()));
                if t == Tri::Yes {
                    r.params.epsilon = Some(eps);
                    r.params.alpha = Some(2.0);
                    r.verdict = mv(v);
                    r.conclusion = positive;
                    return Ok(r);
                }
                any_unknown |= t == Tri::Unknown;
            }
            if !any_unknown {
                r.flag("premise_failed");
            }
            Ok(r)
        }
        KernelSpec::PowerWeighted { kappa } => {
            let kappa = *kappa;
            let mut r = ConditionReport::new("fastpath.power_weighted", Verdict::Boolean(false), Conclusion::Indeterminate, Params { kappa: Some(kappa), ..Params::default() });
            if !existence_gate(spec, &mut r, checker)? {
                return Ok(r);
            }
            let lg = spec.levy.log_moment(cfg);
            let (l1, l2) = pw_log_weighted(spec, kappa, checker);
            let bg = spec.levy.bg_indices(checker.slack);
            r.params.beta = Some(bg.beta);
            r.params.eta = Some(bg.eta);
            let base = all_of(&[r.sub("levy.log_moment", mv(lg)), r.sub("power_weighted.log_weighted_small_x", mv(l1)), r.sub("power_weighted.log_weighted_large_x", mv(l2))]);
            if base != Tri::Yes {
                if base == Tri::No {
                    r.flag("premise_failed");
                }
                return Ok(r);
            }
            let mut any_unknown = false;
            for &eps in &checker.eps_scan {
                let v = spec.pi.pi_moment(kappa + eps, 1.0, INF, cfg);
                let t = r.sub(&format!("pi.weighted_tail_moment[eps={eps}]"), mv(v.clone()));
                if t == Tri::Yes {
                    let e2 = eps / (kappa + 1.0);
                    r.params.epsilon = Some(e2);
                    r.params.alpha = Some(1.0 + e2);
                    r.verdict = mv(v);
                    r.conclusion = positive;
                    return Ok(r);
                }
                any_unknown |= t == Tri::Unknown;
            }
            if !any_unknown {
                r.flag("premise_failed");
            }
            Ok(r)
        }
    }
}

/// Absolute continuity of paths for the well-balanced family.
pub fn check_abs_continuity(spec: &MMASpec, checker: &CheckConfig) -> Result<ConditionReport> {
    if !spec.kernel.is_continuous() {
        return Err(Error::Incompatible("absolute-continuity checker needs the well-balanced family".into()));
    }
    spec.validate()?;
    let cfg = &checker.quad;
    let lm = &spec.levy;
    let mut r = ConditionReport::new("abs_continuity.well_balanced", Verdict::Boolean(false), Conclusion::Indeterminate, Params::default());
    if !existence_gate(spec, &mut r, checker)? {
        return Ok(r);
    }
    let big = times(&constant(spec.pi.total_mass()), &constant(lm.tail_mass(1.0)));
    let t_big = r.sub("abs_continuity.big_jump_mass", mv(big));
    let m2 = lm.partial_moment(2.0, 0.0, 1.0, cfg).extended();
    let inner = |x: f64| {
        if x <= 1.0 {
            x * m2
        } else {
            x * lm.partial_moment(2.0, 0.0, 1.0 / x, cfg).extended() + lm.partial_moment(1.0, 1.0 / x, 1.0, cfg).extended()
        }
    };
    let main = spec.pi.integrate(inner, 0.0, INF, cfg);
    let t_main = r.sub("abs_continuity.small_jump_integral", mv(main.clone()));
    r.verdict = mv(main);
    if let LevyMeasure::ParetoTail { alpha, cutoff } = *lm {
        if cutoff == 0.0 && alpha > 1.0 && alpha < 2.0 {
            r.params.alpha = Some(alpha);
            let iff = spec.pi.pi_moment(alpha - 1.0, 1.0, INF, cfg);
            let t = r.sub("abs_continuity.stable_iff", mv(iff.clone()));
            r.verdict = mv(iff);
            r.conclusion = match all_of(&[t, t_big]) {
                Tri::Yes => Conclusion::AbsolutelyContinuousPaths,
                _ if t == Tri::No => Conclusion::NoAbsoluteContinuity,
                _ => Conclusion::Indeterminate,
            };
            return Ok(r);
        }
    }
    match all_of(&[t_main, t_big]) {
        Tri::Yes => r.conclusion = Conclusion::AbsolutelyContinuousPaths,
        Tri::No => r.flag("premise_failed"),
        Tri::Unknown => {}
    }
    Ok(r)
}

/// Regimes in which no càdlàg modification can exist.
pub fn check_noncadlag(spec: &MMASpec, checker: &CheckConfig) -> Result<ConditionReport> {
    spec.validate()?;
    let cfg = &checker.quad;
    let lm = &spec.levy;
    let mut r = ConditionReport::new("noncadlag.point_intensity", Verdict::Boolean(false), Conclusion::Indeterminate, Params::default());
    if !existence_gate(spec, &mut r, checker)? {
        return Ok(r);
    }
    let unbounded = lm.has_unbounded_support();
    let t_unb = r.sub("levy.unbounded_support", Verdict::Boolean(unbounded));
    let t_main = match &spec.kernel {
        KernelSpec::SupOU | KernelSpec::WellBalancedSupOU => {
            r.condition_id = "noncadlag.infinite_pi_mass".into();
            let mass = spec.pi.total_mass();
            let v = if mass.is_infinite() { MomentVerdict::divergent(0.0, Vec::new()) } else { MomentVerdict::finite(mass, Vec::new()) };
            r.verdict = mv(v.clone());
            // an infinite mass is the premise, so the "bad" direction is Divergent
            invert(r.sub("pi.total_mass", mv(v)))
        }
        KernelSpec::Trawl { trawl_fn } => {
            r.condition_id = "noncadlag.trawl_swept_area".into();
            let m = spec.pi.support().1;
            let area = if m.is_finite() { m.min(trawl_fn.a0()) + trawl_fn.integral_capped(INF, m) } else { trawl_ah_measure(trawl_fn, 1.0) };
            let v = MomentVerdict::exact(area);
            r.verdict = mv(v.clone());
            invert(r.sub("trawl.swept_area", mv(v)))
        }
        KernelSpec::PowerWeighted { kappa } => {
            let kappa = *kappa;
            r.condition_id = "noncadlag.weighted_point_intensity".into();
            r.params.kappa = Some(kappa);
            let lemma = spec.pi.pi_moment(kappa, 1.0, INF, cfg);
            r.sub("pi.weighted_moment", mv(lemma));
            let fv = lm.partial_moment(1.0, 0.0, 1.0, cfg);
            let t_fv = r.sub("levy.small_jump_first_moment", mv(fv));
            let mut tris = vec![t_fv];
            let mut headline = None;
            for level in [1.0, 100.0] {
                let v = spec.pi.integrate(|x| lm.tail_mass(level * x.powf(-kappa)), 0.0, INF, cfg);
                headline.get_or_insert(v.clone());
                tris.push(invert(r.sub(&format!("weighted_point_intensity[r={level}]"), mv(v))));
            }
            r.verdict = mv(headline.expect("two levels"));
            all_of(&tris)
        }
    };
    let all = all_of(&[t_unb, t_main]);
    if all == Tri::Yes {
        r.conclusion = Conclusion::NoCadlagModification;
    } else if all == Tri::No {
        r.flag("premise_not_met");
    }
    Ok(r)
}

fn invert(t: Tri) -> Tri {
    match t {
        Tri::Yes => Tri::No,
        Tri::No => Tri::Yes,
        Tri::Unknown => Tri::Unknown,
    }
}

/// Outcome of running every applicable checker on one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub conclusion: Conclusion,
    pub reports: Vec<ConditionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Runs existence, fast path, the regularity theorem (with an `ε` scan when
/// the fast path is silent), absolute continuity and the negative checker.
pub fn classify(spec: &MMASpec, checker: &CheckConfig) -> Result<Classification> {
    classify_at(spec, checker, None)
}

/// [`classify`] with the regularity theorem evaluated only at a given `(α, ε)`.
pub fn classify_at(spec: &MMASpec, checker: &CheckConfig, at: Option<(f64, f64)>) -> Result<Classification> {
    let mut reports = Vec::new();
    let ex = check_existence(spec, checker)?;
    let ex_c = ex.conclusion;
    reports.push(ex);
    if ex_c != Conclusion::ExistenceHolds {
        return Ok(Classification { conclusion: ex_c, reports, flags: Vec::new() });
    }
    let fast = check_corollary_fastpath(spec, checker)?;
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    if fast.conclusion.is_definite() {
        if let (Some(a), Some(e)) = (fast.params.alpha, fast.params.epsilon) {
            candidates.push((a, e));
        } else if let Some(e) = fast.params.epsilon {
            candidates.push((2.0, e));
        }
    }
    reports.push(fast);
    if let Some(p) = at {
        candidates = vec![p];
    }
    for &eps in checker.eps_scan.iter().filter(|_| at.is_none()) {
        candidates.push(match spec.kernel {
            KernelSpec::PowerWeighted { kappa } => (1.0 + eps / (kappa + 1.0), eps / (kappa + 1.0)),
            _ => (2.0, eps),
        });
    }
    // Theorem-level α is free in [1,2]; lift it past the small-jump index when needed.
    let beta = spec.levy.bg_indices(checker.slack).beta;
    if at.is_none() && beta < 2.0 {
        candidates = candidates.into_iter().map(|(a, e)| (a.max(beta), e)).collect();
    }
    let mut positive = Conclusion::Indeterminate;
    let mut last = None;
    for (a, e) in candidates {
        let rep = if spec.kernel.is_continuous() { check_continuous(spec, a, e, checker)? } else { check_cadlag(spec, a, e, checker)? };
        let stop = rep.conclusion.is_definite() || rep.flags.iter().any(|f| f == "precondition_failed" || f == "existence_not_verified");
        let env_failed = rep.evidence.iter().any(|s| s.id.ends_with("envelope_integral") && s.verdict.status() != Tri::Yes);
        positive = rep.conclusion;
        last = Some(rep);
        if stop || env_failed {
            break;
        }
    }
    reports.extend(last);
    if spec.kernel.is_continuous() {
        reports.push(check_abs_continuity(spec, checker)?);
    }
    let neg = check_noncadlag(spec, checker)?;
    let negative = neg.conclusion;
    reports.push(neg);
    let mut flags = Vec::new();
    let conclusion = match (positive.is_definite(), negative.is_definite()) {
        (true, false) => positive,
        (false, true) => negative,
        (true, true) => {
            flags.push("inconsistent".to_string());
            Conclusion::Indeterminate
        }
        (false, false) => Conclusion::Indeterminate,
    };
    Ok(Classification { conclusion, reports, flags })
}
