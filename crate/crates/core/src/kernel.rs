//! The four kernel families `f(x, s)`, their envelopes, and the increment
//! integrals `∫∫ |f(x,t−u) − f(x,s−u)|^α π(dx) du`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{invalid, Error, Result};
use crate::measure::{DependenceMeasure, MomentVerdict};
use crate::quad::{self, QuadConfig};

/// Exponential tails beyond `e^{-TAIL_CUT}` are dropped from `u`-quadratures.
const TAIL_CUT: f64 = 60.0;

/// Hölder data `|a(t) − a(s)| ≤ C |t − s|^δ` for `s, t ∈ [0, t0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Holder {
    pub delta: f64,
    #[serde(rename = "const")]
    pub c: f64,
    #[serde(with = "crate::ext::real")]
    pub t0: f64,
}

/// A non-increasing, integrable trawl function `a` on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrawlFunction {
    /// `a(s) = e^{-rate·s}`.
    ExpDecay { rate: f64 },
    /// `a(s) = (1 + s/scale)^{-exponent}`, `exponent > 1`.
    PowerDecay { exponent: f64, scale: f64 },
    /// Linear interpolation through `(s_i, a_i)` with `s_0 = 0` and final value 0.
    Tabulated {
        grid: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        holder: Option<Holder>,
    },
    /// `a(s) = s^{-exponent} e^{-s}`, unbounded at 0, `exponent ∈ (0,1)`.
    SingularPower { exponent: f64 },
}

impl TrawlFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            TrawlFunction::ExpDecay { rate } if !(*rate > 0.0 && rate.is_finite()) => invalid("trawl rate must be positive"),
            TrawlFunction::PowerDecay { exponent, scale } if !(*exponent > 1.0 && *scale > 0.0 && exponent.is_finite() && scale.is_finite()) => {
                invalid("power trawl needs exponent > 1 and scale > 0")
            }
            TrawlFunction::SingularPower { exponent } if !(*exponent > 0.0 && *exponent < 1.0) => {
                invalid("singular trawl exponent must lie in (0,1)")
            }
            TrawlFunction::Tabulated { grid, holder } => {
                if grid.len() < 2 {
                    return invalid("tabulated trawl needs at least two grid points");
                }
                if grid[0].0 != 0.0 {
                    return invalid("tabulated trawl grid must start at s = 0");
                }
                for w in grid.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return invalid("tabulated trawl grid must be strictly increasing in s");
                    }
                    if w[1].1 > w[0].1 {
                        return Err(Error::InvalidParameter("trawl function must be non-increasing".into()));
                    }
                }
                if grid.iter().any(|p| !(p.1 >= 0.0 && p.1.is_finite() && p.0.is_finite())) {
                    return invalid("tabulated trawl values must be finite and non-negative");
                }
                if grid.last().map(|p| p.1) != Some(0.0) {
                    return invalid("tabulated trawl must end with value 0 to be integrable");
                }
                if let Some(h) = holder {
                    if !(h.delta > 0.0 && h.delta <= 1.0 && h.c >= 0.0 && h.t0 > 0.0) {
                        return invalid("holder needs delta in (0,1], const ≥ 0, t0 > 0");
                    }
                    for (i, p) in grid.iter().enumerate() {
                        for q in &grid[i + 1..] {
                            if q.0 > h.t0 {
                                break;
                            }
                            if (p.1 - q.1).abs() > h.c * (q.0 - p.0).powf(h.delta) * (1.0 + 1e-12) {
                                return invalid("supplied Hölder constant is violated by the grid");
                            }
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `a(s)` for `s ≥ 0`.
    pub fn value(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self {
            TrawlFunction::ExpDecay { rate } => (-rate * s).exp(),
            TrawlFunction::PowerDecay { exponent, scale } => (1.0 + s / scale).powf(-exponent),
            TrawlFunction::SingularPower { exponent } => {
                if s == 0.0 {
                    f64::INFINITY
                } else {
                    s.powf(-exponent) * (-s).exp()
                }
            }
            TrawlFunction::Tabulated { grid, .. } => {
                let i = grid.partition_point(|p| p.0 <= s);
                if i >= grid.len() {
                    return 0.0;
                }
                let (s0, a0) = grid[i - 1];
                let (s1, a1) = grid[i];
                a0 + (a1 - a0) * (s - s0) / (s1 - s0)
            }
        }
    }

    pub fn a0(&self) -> f64 {
        self.value(0.0)
    }

    /// `∫_0^h a(s) ds`.
    pub fn integral(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        match self {
            TrawlFunction::ExpDecay { rate } => -(-rate * h).exp_m1() / rate,
            TrawlFunction::PowerDecay { exponent, scale } => {
                if h.is_infinite() {
                    scale / (exponent - 1.0)
                } else {
                    scale / (exponent - 1.0) * -((1.0 - exponent) * (h / scale).ln_1p()).exp_m1()
                }
            }
            TrawlFunction::SingularPower { exponent } => {
                let a = 1.0 - exponent;
                if h.is_infinite() {
                    gamma(a)
                } else {
                    gamma(a) * gamma_lr(a, h)
                }
            }
            TrawlFunction::Tabulated { grid, .. } => {
                let mut total = 0.0;
                for w in grid.windows(2) {
                    let (s0, a0) = w[0];
                    let (s1, a1) = w[1];
                    if h <= s0 {
                        break;
                    }
                    let e = h.min(s1);
                    let ae = a0 + (a1 - a0) * (e - s0) / (s1 - s0);
                    total += 0.5 * (a0 + ae) * (e - s0);
                }
                total
            }
        }
    }

    pub fn total_integral(&self) -> f64 {
        self.integral(f64::INFINITY)
    }

    /// `sup { s ≥ 0 : a(s) ≥ x }`, or `None` when `a(0) < x`.
    pub fn inverse(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return Some(f64::INFINITY);
        }
        if self.a0() < x {
            return None;
        }
        Some(match self {
            TrawlFunction::ExpDecay { rate } => -x.ln() / rate,
            TrawlFunction::PowerDecay { exponent, scale } => scale * ((-x.ln() / exponent).exp_m1()),
            TrawlFunction::SingularPower { exponent } => {
                // solve −γ ln s − s = ln x, monotone in ln s
                let target = x.ln();
                let g = |ls: f64| -exponent * ls - ls.exp();
                let (mut lo, mut hi) = (-800.0_f64, 10.0_f64);
                while g(hi) > target {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if g(m) >= target {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                lo.exp()
            }
            TrawlFunction::Tabulated { grid, .. } => {
                let i = grid.iter().rposition(|p| p.1 >= x).expect("a0 ≥ x");
                if i + 1 == grid.len() {
                    return Some(grid[i].0);
                }
                let (s0, a0) = grid[i];
                let (s1, a1) = grid[i + 1];
                if a0 == a1 {
                    s1
                } else {
                    s0 + (a0 - x) / (a0 - a1) * (s1 - s0)
                }
            }
        })
    }

    /// `∫_0^h min(a(s), m) ds`.
    pub fn integral_capped(&self, h: f64, m: f64) -> f64 {
        if m >= self.a0() {
            return self.integral(h);
        }
        let s_star = self.inverse(m).unwrap_or(0.0);
        if h <= s_star {
            m * h
        } else {
            m * s_star + self.integral(h) - self.integral(s_star)
        }
    }

    /// Hölder data: analytic for parametric forms, user-supplied for tables.
    pub fn holder(&self) -> Option<Holder> {
        match self {
            TrawlFunction::ExpDecay { rate } => Some(Holder { delta: 1.0, c: *rate, t0: f64::INFINITY }),
            TrawlFunction::PowerDecay { exponent, scale } => Some(Holder { delta: 1.0, c: exponent / scale, t0: f64::INFINITY }),
            TrawlFunction::Tabulated { holder, .. } => *holder,
            TrawlFunction::SingularPower { .. } => None,
        }
    }
}

/// Kernel family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `e^{-xs} 1(s ≥ 0)`.
    #[serde(rename = "sup_ou")]
    SupOU,
    /// `e^{-x|s|}`.
    #[serde(rename = "well_balanced")]
    WellBalancedSupOU,
    /// `1(0 ≤ x ≤ a(s)) 1(s ≥ 0)`.
    Trawl { trawl_fn: TrawlFunction },
    /// `x^κ e^{-xs} 1(s ≥ 0)`.
    PowerWeighted { kappa: f64 },
}

/// Exceptional set `A` of an envelope pair; empty for all shipped families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionalSet {
    Empty,
}

/// `(A, g)` with `sup_{t∈[0,1]} f(x, t−u) ≤ g(x, −u)` off `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub exceptional_set: ExceptionalSet,
    kernel: KernelSpec,
}

impl EnvelopePair {
    pub fn g(&self, x: f64, s: f64) -> f64 {
        match &self.kernel {
            KernelSpec::SupOU => envelope_exp(x, s, 1.0, false),
            KernelSpec::WellBalancedSupOU => envelope_exp(x, s, 1.0, true),
            KernelSpec::PowerWeighted { kappa } => envelope_exp(x, s, x.powf(*kappa), false),
            KernelSpec::Trawl { .. } => {
                if s >= 0.0 {
                    self.kernel.evaluate(x, s)
                } else if s >= -1.0 {
                    self.kernel.evaluate(x, 0.0)
                } else {
                    0.0
                }
            }
        }
    }
}

fn envelope_exp(x: f64, s: f64, w: f64, two_sided: bool) -> f64 {
    if s >= 0.0 {
        w * (-x * s).exp()
    } else if s >= -1.0 {
        w
    } else if two_sided {
        w * (x * (s + 1.0)).exp()
    } else {
        0.0
    }
}

/// `1 − e^{−y}` without cancellation.
#[inline]
pub(crate) fn one_minus_exp(y: f64) -> f64 {
    -(-y).exp_m1()
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Trawl { trawl_fn } => trawl_fn.validate(),
            KernelSpec::PowerWeighted { kappa } if !(*kappa > 0.0 && kappa.is_finite()) => invalid("kappa must be positive"),
            _ => Ok(()),
        }
    }

    /// Weight `x^κ` (1 for the unweighted families).
    #[inline]
    pub fn weight(&self, x: f64) -> f64 {
        match self {
            KernelSpec::PowerWeighted { kappa } => x.powf(*kappa),
            _ => 1.0,
        }
    }

    pub fn is_trawl(&self) -> bool {
        matches!(self, KernelSpec::Trawl { .. })
    }

    pub fn trawl_fn(&self) -> Option<&TrawlFunction> {
        match self {
            KernelSpec::Trawl { trawl_fn } => Some(trawl_fn),
            _ => None,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, KernelSpec::WellBalancedSupOU)
    }

    /// `f(x, s)`.
    pub fn evaluate(&self, x: f64, s: f64) -> f64 {
        match self {
            KernelSpec::SupOU => {
                if s >= 0.0 {
                    (-x * s).exp()
                } else {
                    0.0
                }
            }
            KernelSpec::WellBalancedSupOU => (-x * s.abs()).exp(),
            KernelSpec::PowerWeighted { kappa } => {
                if s >= 0.0 {
                    x.powf(*kappa) * (-x * s).exp()
                } else {
                    0.0
                }
            }
            KernelSpec::Trawl { trawl_fn } => {
                if s >= 0.0 && x >= 0.0 && x <= trawl_fn.value(s) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn envelope(&self) -> EnvelopePair {
        EnvelopePair { exceptional_set: ExceptionalSet::Empty, kernel: self.clone() }
    }

    /// `∂f/∂s` for the well-balanced kernel.
    pub fn kernel_derivative(&self, x: f64, s: f64) -> Result<f64> {
        match self {
            KernelSpec::WellBalancedSupOU => {
                if s == 0.0 {
                    return invalid("the well-balanced kernel is not differentiable at s = 0");
                }
                Ok(-s.signum() * x * (-x * s.abs()).exp())
            }
            _ => Err(Error::Incompatible("kernel derivative is provided for the well-balanced family only".into())),
        }
    }

    fn require_lebesgue(&self, dm: &DependenceMeasure) -> Result<f64> {
        match dm {
            DependenceMeasure::Lebesgue { upper } => Ok(upper.unwrap_or(f64::INFINITY)),
            _ => Err(Error::Incompatible("trawl kernels require a Lebesgue dependence measure".into())),
        }
    }

    /// Checks the kernel / dependence-measure pairing.
    pub fn check_compatible(&self, dm: &DependenceMeasure) -> Result<()> {
        if self.is_trawl() {
            self.require_lebesgue(dm).map(|_| ())
        } else if dm.has_atom_at_zero() || matches!(dm, DependenceMeasure::Lebesgue { .. }) {
            Err(Error::Incompatible("exponential kernels need π on (0,∞) without mass at 0".into()))
        } else {
            Ok(())
        }
    }

    /// Per-`x` inner integral `∫_ℝ |f(x, h−u) − f(x, −u)|^α du` (non-trawl families).
    pub fn increment_inner(&self, x: f64, h: f64, alpha: f64, cfg: &QuadConfig) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let c = x * h;
        let d = one_minus_exp(c);
        match self {
            KernelSpec::SupOU | KernelSpec::PowerWeighted { .. } => {
                let base = (d.powf(alpha) + one_minus_exp(alpha * c)) / (alpha * x);
                base * self.weight(x).powf(alpha)
            }
            KernelSpec::WellBalancedSupOU => {
                if alpha == 2.0 {
                    // 2/x (1 − e^{−c}(1 + c)), series for small c
                    if c < 1e-3 {
                        return 2.0 / x * (c * c / 2.0 - c * c * c / 3.0 + c.powi(4) / 8.0);
                    }
                    return 2.0 / x * (1.0 - (-c).exp() * (1.0 + c));
                }
                let outer = 2.0 * d.powf(alpha) / (alpha * x);
                let mid = |v: f64| ((-v).exp() * one_minus_exp(c - 2.0 * v)).powf(alpha);
                let r = quad::adaptive(mid, 0.0, 0.5 * c, cfg.rel_tol.max(1e-12), 1e-300, 20_000);
                outer + 2.0 * r.value / x
            }
            KernelSpec::Trawl { .. } => f64::NAN,
        }
    }

    /// `∫∫ |f(x,t−u) − f(x,s−u)|^α π(dx) du`.
    pub fn increment_integral(&self, dm: &DependenceMeasure, s: f64, t: f64, alpha: f64, cfg: &QuadConfig) -> Result<MomentVerdict> {
        self.check_compatible(dm)?;
        let h = t - s;
        if h <= 0.0 {
            return Ok(MomentVerdict::finite(0.0, Vec::new()));
        }
        if let KernelSpec::Trawl { trawl_fn } = self {
            let m = self.require_lebesgue(dm)?;
            return Ok(MomentVerdict::exact(2.0 * trawl_fn.integral_capped(h, m)));
        }
        Ok(dm.integrate(|x| self.increment_inner(x, h, alpha, cfg), 0.0, f64::INFINITY, cfg))
    }

    /// Per-`x` inner integral of the pointwise minimum of the two increments.
    pub fn min_increment_inner(&self, x: f64, s: f64, t: f64, alpha: f64, cfg: &QuadConfig) -> f64 {
        if s <= 0.0 || t <= s {
            return 0.0;
        }
        let es = (-x * s).exp();
        let m_neg = (es * one_minus_exp(x * (t - s))).min(one_minus_exp(x * s));
        match self {
            KernelSpec::SupOU | KernelSpec::PowerWeighted { .. } => {
                let v = (m_neg.powf(alpha) + one_minus_exp(x * (t - s)).powf(alpha) * one_minus_exp(alpha * x * s)) / (alpha * x);
                v * self.weight(x).powf(alpha)
            }
            KernelSpec::WellBalancedSupOU => {
                let right = one_minus_exp(x * (t - s)).min((-x * (t - s)).exp() * one_minus_exp(x * s));
                let tails = (m_neg.powf(alpha) + right.powf(alpha)) / (alpha * x);
                let g = |u: f64| {
                    let fs = (-x * (s - u).abs()).exp();
                    let a = ((-x * (t - u).abs()).exp() - fs).abs();
                    let b = (fs - (-x * u).exp()).abs();
                    a.min(b).powf(alpha)
                };
                let tol = cfg.rel_tol.max(1e-12);
                let r1 = quad::adaptive(g, 0.0, s, tol, 1e-300, 20_000);
                let r2 = quad::adaptive(g, s, t, tol, 1e-300, 20_000);
                tails + r1.value + r2.value
            }
            KernelSpec::Trawl { .. } => f64::NAN,
        }
    }

    /// `∫∫ |f(x,t−u) − f(x,s−u)|^α ∧ |f(x,s−u) − f(x,−u)|^α π(dx) du`.
    pub fn min_increment_integral(&self, dm: &DependenceMeasure, s: f64, t: f64, alpha: f64, cfg: &QuadConfig) -> Result<MomentVerdict> {
        self.check_compatible(dm)?;
        if s <= 0.0 || t <= s {
            return Ok(MomentVerdict::finite(0.0, Vec::new()));
        }
        if let KernelSpec::Trawl { trawl_fn } = self {
            let m = self.require_lebesgue(dm)?;
            let a = |h: f64| trawl_fn.integral_capped(h, m);
            return Ok(MomentVerdict::exact((a(s) + a(t - s) - a(t)).max(0.0)));
        }
        Ok(dm.integrate(|x| self.min_increment_inner(x, s, t, alpha, cfg), 0.0, f64::INFINITY, cfg))
    }

    /// `∫_ℝ f(x, −u) du` per `x` (non-trawl).
    pub fn u_integral(&self, x: f64) -> f64 {
        match self {
            KernelSpec::SupOU => 1.0 / x,
            KernelSpec::WellBalancedSupOU => 2.0 / x,
            KernelSpec::PowerWeighted { kappa } => x.powf(kappa - 1.0),
            KernelSpec::Trawl { trawl_fn } => trawl_fn.inverse(x).unwrap_or(0.0),
        }
    }

    /// `∫_ℝ f(x, −u) f(x, Δ−u) du` per `x`, `Δ ≥ 0` (non-trawl).
    pub fn cov_u_integral(&self, x: f64, delta: f64) -> f64 {
        let delta = delta.abs();
        match self {
            KernelSpec::SupOU => (-x * delta).exp() / (2.0 * x),
            KernelSpec::WellBalancedSupOU => (-x * delta).exp() * (delta + 1.0 / x),
            KernelSpec::PowerWeighted { kappa } => x.powf(2.0 * kappa) * (-x * delta).exp() / (2.0 * x),
            KernelSpec::Trawl { trawl_fn } => trawl_fn.inverse(x).map(|l| (l - delta).max(0.0)).unwrap_or(0.0),
        }
    }

    /// `∫_{lo}^{hi} f(x, t−u) du` per `x`.
    pub fn window_u_integral(&self, x: f64, t: f64, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        // ∫ e^{−x(t−u)} over u ∈ (a, b] ⊂ (−∞, t]
        let left = |a: f64, b: f64| -> f64 {
            if !(b > a) {
                0.0
            } else {
                (-x * (t - b)).exp() * one_minus_exp(x * (b - a)) / x
            }
        };
        match self {
            KernelSpec::SupOU => left(lo, hi.min(t)),
            KernelSpec::PowerWeighted { .. } => self.weight(x) * left(lo, hi.min(t)),
            KernelSpec::WellBalancedSupOU => {
                let l = left(lo, hi.min(t));
                let (a, b) = (lo.max(t), hi);
                let r = if b > a { (-x * (a - t)).exp() * one_minus_exp(x * (b - a)) / x } else { 0.0 };
                l + r
            }
            KernelSpec::Trawl { trawl_fn } => match trawl_fn.inverse(x) {
                None => 0.0,
                Some(len) => {
                    let (a, b) = (lo.max(t - len), hi.min(t));
                    (b - a).max(0.0)
                }
            },
        }
    }

    /// `∫∫ f(x, −u) π(dx) du`, the multiplier of the drift `m`.
    pub fn mean_integral(&self, dm: &DependenceMeasure, cfg: &QuadConfig) -> Result<MomentVerdict> {
        self.check_compatible(dm)?;
        if let KernelSpec::Trawl { trawl_fn } = self {
            let m = self.require_lebesgue(dm)?;
            return Ok(MomentVerdict::exact(trawl_fn.integral_capped(f64::INFINITY, m)));
        }
        Ok(match self {
            KernelSpec::SupOU => dm.pi_moment(-1.0, 0.0, f64::INFINITY, cfg),
            KernelSpec::WellBalancedSupOU => dm.pi_moment(-1.0, 0.0, f64::INFINITY, cfg).scale(2.0),
            KernelSpec::PowerWeighted { kappa } => dm.pi_moment(kappa - 1.0, 0.0, f64::INFINITY, cfg),
            KernelSpec::Trawl { .. } => unreachable!(),
        })
    }

    /// `∫∫ f(x, −u) f(x, Δ−u) π(dx) du`.
    pub fn covariance_integral(&self, dm: &DependenceMeasure, delta: f64, cfg: &QuadConfig) -> Result<MomentVerdict> {
        self.check_compatible(dm)?;
        if let KernelSpec::Trawl { trawl_fn } = self {
            let m = self.require_lebesgue(dm)?;
            let d = delta.abs();
            let v = trawl_fn.integral_capped(f64::INFINITY, m) - trawl_fn.integral_capped(d, m);
            return Ok(MomentVerdict::exact(v.max(0.0)));
        }
        Ok(dm.integrate(|x| self.cov_u_integral(x, delta), 0.0, f64::INFINITY, cfg))
    }

    /// `∫_{(1,∞)}`-free envelope inner integral `∫_ℝ (g(x,−u) z ∧ 1) du` for `z > 1` (non-trawl).
    pub fn envelope_u_integral(&self, x: f64, z: f64) -> f64 {
        let y = self.weight(x) * z;
        let side = if y <= 1.0 { y / x } else { (1.0 + y.ln()) / x };
        let sides = if matches!(self, KernelSpec::WellBalancedSupOU) { 2.0 } else { 1.0 };
        y.min(1.0) + sides * side
    }

    /// Brute-force `u`-quadrature of the increment integral for one `x` (non-trawl).
    pub fn increment_inner_quadrature(&self, x: f64, s: f64, t: f64, alpha: f64, rel_tol: f64) -> f64 {
        let g = |u: f64| (self.evaluate(x, t - u) - self.evaluate(x, s - u)).abs().powf(alpha);
        self.u_quadrature(x, alpha, &[s, t], rel_tol, g)
    }

    /// Brute-force `u`-quadrature of the min-increment integral for one `x` (non-trawl).
    pub fn min_increment_inner_quadrature(&self, x: f64, s: f64, t: f64, alpha: f64, rel_tol: f64) -> f64 {
        let g = |u: f64| {
            let fs = self.evaluate(x, s - u);
            let a = (self.evaluate(x, t - u) - fs).abs();
            let b = (fs - self.evaluate(x, -u)).abs();
            a.min(b).powf(alpha)
        };
        self.u_quadrature(x, alpha, &[0.0, s, t], rel_tol, g)
    }

    fn u_quadrature<G: Fn(f64) -> f64>(&self, x: f64, alpha: f64, kinks: &[f64], rel_tol: f64, g: G) -> f64 {
        let reach = TAIL_CUT / (alpha * x);
        let lo = kinks.iter().cloned().fold(0.0, f64::min) - reach;
        let hi = if self.is_continuous() { kinks.iter().cloned().fold(0.0, f64::max) + reach } else { kinks.iter().cloned().fold(0.0, f64::max) };
        let mut pts = vec![lo];
        let mut ks: Vec<f64> = kinks.iter().cloned().filter(|k| *k > lo && *k < hi).collect();
        ks.push(0.0);
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        pts.extend(ks.into_iter().filter(|k| *k > lo && *k < hi));
        pts.push(hi);
        pts.windows(2).map(|w| quad::adaptive(&g, w[0], w[1], rel_tol, 1e-300, 200_000).value).sum()
    }

    /// 2-D quadrature of the increment integral, independent of the closed forms.
    pub fn increment_integral_2d(&self, dm: &DependenceMeasure, s: f64, t: f64, alpha: f64, cfg: &QuadConfig) -> Result<MomentVerdict> {
        self.check_compatible(dm)?;
        if let KernelSpec::Trawl { trawl_fn } = self {
            // layer cake in x: the u-sections of the two trawl sets are intervals of length a⁻¹(x)
            let m = self.require_lebesgue(dm)?.min(trawl_fn.a0());
            let h = t - s;
            let g = |x: f64| 2.0 * trawl_fn.inverse(x).unwrap_or(0.0).min(h);
            // the integrand kinks where a⁻¹(x) = h
            let knee = trawl_fn.value(h).clamp(0.0, m);
            return Ok(quad::improper(g, 0.0, knee, cfg).plus(&quad::improper(g, knee, m, cfg)));
        }
        Ok(dm.integrate(|x| self.increment_inner_quadrature(x, s, t, alpha, 0.1 * cfg.rel_tol), 0.0, f64::INFINITY, cfg))
    }

    /// 2-D quadrature of the min-increment integral, independent of the closed forms.
    pub fn min_increment_integral_2d(&self, dm: &DependenceMeasure, s: f64, t: f64, alpha: f64, cfg: &QuadConfig) -> Result<MomentVerdict> {
        self.check_compatible(dm)?;
        if let KernelSpec::Trawl { trawl_fn } = self {
            let m = self.require_lebesgue(dm)?.min(trawl_fn.a0());
            let g = |x: f64| {
                let l = trawl_fn.inverse(x).unwrap_or(0.0);
                let ind = |c: f64, u: f64| u >= c - l && u <= c;
                let mut pts = vec![-l, 0.0, s - l, s, t - l, t];
                pts.sort_by(f64::total_cmp);
                pts.windows(2)
                    .map(|w| {
                        let u = 0.5 * (w[0] + w[1]);
                        let a = ind(t, u) != ind(s, u);
                        let b = ind(s, u) != ind(0.0, u);
                        if a && b {
                            w[1] - w[0]
                        } else {
                            0.0
                        }
                    })
                    .sum::<f64>()
            };
            return Ok(quad::improper(g, 0.0, m, cfg));
        }
        Ok(dm.integrate(|x| self.min_increment_inner_quadrature(x, s, t, alpha, 0.1 * cfg.rel_tol), 0.0, f64::INFINITY, cfg))
    }
}

/// `|A^h|` for the trawl set swept over `[0, h]`: `h·a(0) + ∫a`.
pub fn trawl_ah_measure(tf: &TrawlFunction, h: f64) -> f64 {
    let a0 = tf.a0();
    let total = tf.total_integral();
    if a0.is_infinite() || total.is_infinite() {
        return f64::INFINITY;
    }
    h * a0 + total
}
