//! Lévy measures `λ` on `(0,∞)`, dependence measures `π` on `[0,∞)`, and the
//! finiteness verdicts produced by their moment functionals.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::quad::{self, QuadConfig};

/// Finite / Divergent / Inconclusive outcome of an improper integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VerdictStatus {
    Finite {
        #[serde(with = "crate::ext::real")]
        value: f64,
    },
    Divergent {
        #[serde(with = "crate::ext::real")]
        growth_exponent: f64,
    },
    Inconclusive,
}

/// A verdict plus the nested-domain partial integrals `(domain_bound, partial)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVerdict {
    #[serde(flatten)]
    pub status: VerdictStatus,
    #[serde(with = "crate::ext::pairs", default)]
    pub evidence: Vec<(f64, f64)>,
}

impl MomentVerdict {
    pub fn finite(value: f64, evidence: Vec<(f64, f64)>) -> Self {
        Self { status: VerdictStatus::Finite { value }, evidence }
    }
    pub fn divergent(growth_exponent: f64, evidence: Vec<(f64, f64)>) -> Self {
        Self { status: VerdictStatus::Divergent { growth_exponent }, evidence }
    }
    pub fn inconclusive(evidence: Vec<(f64, f64)>) -> Self {
        Self { status: VerdictStatus::Inconclusive, evidence }
    }
    /// Exact value with no evidence trail: `+∞` becomes Divergent, NaN Inconclusive.
    pub fn exact(v: f64) -> Self {
        if v.is_nan() {
            Self::inconclusive(Vec::new())
        } else if v.is_infinite() {
            Self::divergent(0.0, Vec::new())
        } else {
            Self::finite(v, Vec::new())
        }
    }
    pub fn is_finite(&self) -> bool {
        matches!(self.status, VerdictStatus::Finite { .. })
    }
    pub fn is_divergent(&self) -> bool {
        matches!(self.status, VerdictStatus::Divergent { .. })
    }
    pub fn is_inconclusive(&self) -> bool {
        matches!(self.status, VerdictStatus::Inconclusive)
    }
    pub fn value(&self) -> Option<f64> {
        match self.status {
            VerdictStatus::Finite { value } => Some(value),
            _ => None,
        }
    }
    /// `Finite → value`, `Divergent → +∞`, `Inconclusive → NaN`.
    pub fn extended(&self) -> f64 {
        match self.status {
            VerdictStatus::Finite { value } => value,
            VerdictStatus::Divergent { .. } => f64::INFINITY,
            VerdictStatus::Inconclusive => f64::NAN,
        }
    }
    /// Sum of two non-negative integrals.
    pub fn plus(&self, other: &MomentVerdict) -> MomentVerdict {
        let mut ev = self.evidence.clone();
        ev.extend_from_slice(&other.evidence);
        match (&self.status, &other.status) {
            (VerdictStatus::Divergent { growth_exponent: a }, VerdictStatus::Divergent { growth_exponent: b }) => {
                Self::divergent(a.max(*b), ev)
            }
            (VerdictStatus::Divergent { growth_exponent }, _) | (_, VerdictStatus::Divergent { growth_exponent }) => {
                Self::divergent(*growth_exponent, ev)
            }
            (VerdictStatus::Inconclusive, _) | (_, VerdictStatus::Inconclusive) => Self::inconclusive(ev),
            (VerdictStatus::Finite { value: a }, VerdictStatus::Finite { value: b }) => Self::finite(a + b, ev),
        }
    }
    /// Multiplies by a non-negative constant, with `0·∞ = 0`.
    pub fn scale(&self, c: f64) -> MomentVerdict {
        if c == 0.0 {
            return Self::finite(0.0, self.evidence.clone());
        }
        match self.status {
            VerdictStatus::Finite { value } if c.is_finite() => Self::finite(value * c, self.evidence.clone()),
            VerdictStatus::Finite { value } if value == 0.0 => Self::finite(0.0, self.evidence.clone()),
            VerdictStatus::Inconclusive => self.clone(),
            _ => Self::divergent(0.0, self.evidence.clone()),
        }
    }
}

/// Jump-size law of a compound Poisson Lévy measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpDist {
    Degenerate { value: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

/// The jump measure `λ` on `(0,∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyMeasure {
    /// `z^{-α-1} dz` on `(cutoff, ∞)`.
    ParetoTail { alpha: f64, cutoff: f64 },
    /// Gamma jump density with unit total mass.
    Gamma { shape: f64, rate: f64 },
    CompoundPoisson { rate: f64, jump_dist: JumpDist },
    /// `z^{-α-1} e^{-θz} dz` on `(0,∞)`.
    TemperedStable { alpha: f64, tempering: f64 },
    Atomic { atoms: Vec<(f64, f64)> },
}

/// Blumenthal–Getoor type indices of a Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgIndices {
    pub beta0: f64,
    pub beta: f64,
    #[serde(with = "crate::ext::real")]
    pub eta_inf: f64,
    pub eta: f64,
}

/// Cap used for `η` when `η∞ = +∞`.
pub const ETA_CAP: f64 = 10.0;

/// `∫_{lo}^{hi} x^e dx` with `0 ≤ lo ≤ hi ≤ ∞`.
pub(crate) fn power_integral(e: f64, lo: f64, hi: f64) -> MomentVerdict {
    if !(hi > lo) {
        return MomentVerdict::finite(0.0, Vec::new());
    }
    let q = e + 1.0;
    if q == 0.0 {
        if lo == 0.0 || hi.is_infinite() {
            return MomentVerdict::divergent(0.0, Vec::new());
        }
        return MomentVerdict::finite((hi / lo).ln(), Vec::new());
    }
    if q > 0.0 && hi.is_infinite() {
        return MomentVerdict::divergent(q, Vec::new());
    }
    if q < 0.0 && lo == 0.0 {
        return MomentVerdict::divergent(-q, Vec::new());
    }
    let hq = if hi.is_infinite() { 0.0 } else { hi.powf(q) };
    let lq = if lo == 0.0 { 0.0 } else { lo.powf(q) };
    MomentVerdict::finite((hq - lq) / q, Vec::new())
}

/// `∫_{lo}^{hi} x^p · Gamma(k, β)(dx)` for the normalized gamma density.
fn gamma_density_moment(k: f64, beta: f64, p: f64, lo: f64, hi: f64, cfg: &QuadConfig) -> MomentVerdict {
    if !(hi > lo) {
        return MomentVerdict::finite(0.0, Vec::new());
    }
    let a = k + p;
    if a <= 0.0 {
        if lo == 0.0 {
            return MomentVerdict::divergent(-a, Vec::new());
        }
        let dens = move |x: f64| x.powf(p) * gamma_pdf(k, beta, x);
        return quad::improper(dens, lo, hi, cfg);
    }
    let c = (ln_gamma(a) - ln_gamma(k) - p * beta.ln()).exp();
    let (xl, xh) = (beta * lo, beta * hi);
    let frac = if xl > a {
        upper_reg(a, xl) - upper_reg(a, xh)
    } else {
        lower_reg(a, xh) - lower_reg(a, xl)
    };
    MomentVerdict::finite(c * frac.max(0.0), Vec::new())
}

fn lower_reg(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(a, x)
    }
}

fn upper_reg(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma_ur(a, x)
    }
}

fn gamma_pdf(k: f64, beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (k * beta.ln() + (k - 1.0) * x.ln() - beta * x - ln_gamma(k)).exp()
}

/// Exponential integral `E1(x)` for `x > 0`.
fn e1(x: f64) -> f64 {
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        -0.577_215_664_901_532_9 - x.ln() - sum
    } else {
        upper_gamma_quad(0.0, x)
    }
}

/// `∫_x^∞ t^{s-1} e^{-t} dt` by quadrature, for `x ≥ 1`.
fn upper_gamma_quad(s: f64, x: f64) -> f64 {
    let w = 60.0 + 2.0 * s.abs();
    let f = |v: f64| (x + v).powf(s - 1.0) * (-v).exp();
    let r = quad::adaptive(f, 0.0, w, 1e-13, 1e-300, 100_000);
    (-x).exp() * r.value
}

/// Upper incomplete gamma `Γ(s, x)` for real `s` and `x > 0` (or `x = 0` with `s > 0`).
pub(crate) fn upper_gamma(s: f64, x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    if s > 0.0 {
        if x == 0.0 {
            return gamma(s);
        }
        return gamma(s) * gamma_ur(s, x);
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x >= 1.0 {
        return upper_gamma_quad(s, x);
    }
    // Γ(s, x) = (Γ(s+1, x) − x^s e^{−x}) / s
    if s == 0.0 {
        return e1(x);
    }
    (upper_gamma(s + 1.0, x) - x.powf(s) * (-x).exp()) / s
}

impl JumpDist {
    fn validate(&self) -> Result<()> {
        match *self {
            JumpDist::Degenerate { value } if !(value > 0.0 && value.is_finite()) => invalid("degenerate jump must be positive"),
            JumpDist::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => invalid("exponential jump rate must be positive"),
            JumpDist::Uniform { lo, hi } if !(lo >= 0.0 && hi > lo && hi.is_finite()) => invalid("uniform jumps need 0 ≤ lo < hi"),
            _ => Ok(()),
        }
    }
    fn prob_above(&self, r: f64) -> f64 {
        match *self {
            JumpDist::Degenerate { value } => f64::from(value > r),
            JumpDist::Exponential { rate } => (-rate * r.max(0.0)).exp(),
            JumpDist::Uniform { lo, hi } => ((hi - r.max(lo)) / (hi - lo)).clamp(0.0, 1.0),
        }
    }
}

impl LevyMeasure {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match self {
            LevyMeasure::ParetoTail { alpha, cutoff } => {
                pos(*alpha, "alpha")?;
                if !(*cutoff >= 0.0 && cutoff.is_finite()) {
                    return invalid("cutoff must be ≥ 0");
                }
                if *cutoff == 0.0 && *alpha >= 2.0 {
                    return invalid("ParetoTail with cutoff 0 needs alpha < 2 to integrate z² near 0");
                }
                Ok(())
            }
            LevyMeasure::Gamma { shape, rate } => {
                pos(*shape, "shape")?;
                pos(*rate, "rate")
            }
            LevyMeasure::CompoundPoisson { rate, jump_dist } => {
                pos(*rate, "rate")?;
                jump_dist.validate()
            }
            LevyMeasure::TemperedStable { alpha, tempering } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return invalid("tempered stable alpha must lie in (0,2)");
                }
                if !(*tempering >= 0.0 && tempering.is_finite()) {
                    return invalid("tempering must be ≥ 0");
                }
                Ok(())
            }
            LevyMeasure::Atomic { atoms } => {
                if atoms.is_empty() {
                    return invalid("atomic measure needs at least one atom");
                }
                for &(z, m) in atoms {
                    pos(z, "atom location")?;
                    pos(m, "atom mass")?;
                }
                Ok(())
            }
        }
    }

    /// `λ((r, ∞))`.
    pub fn tail_mass(&self, r: f64) -> f64 {
        match *self {
            LevyMeasure::ParetoTail { alpha, cutoff } => {
                let l = r.max(cutoff);
                if l == 0.0 {
                    f64::INFINITY
                } else {
                    l.powf(-alpha) / alpha
                }
            }
            LevyMeasure::Gamma { shape, rate } => upper_reg(shape, rate * r),
            LevyMeasure::CompoundPoisson { rate, ref jump_dist } => rate * jump_dist.prob_above(r),
            LevyMeasure::TemperedStable { alpha, tempering } => {
                if r <= 0.0 {
                    f64::INFINITY
                } else if tempering == 0.0 {
                    r.powf(-alpha) / alpha
                } else {
                    tempering.powf(alpha) * upper_gamma(-alpha, tempering * r)
                }
            }
            LevyMeasure::Atomic { ref atoms } => atoms.iter().filter(|(z, _)| *z > r).map(|(_, m)| m).sum(),
        }
    }

    /// `λ((lo, hi])`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let tl = self.tail_mass(lo);
        if tl.is_infinite() {
            return f64::INFINITY;
        }
        (tl - self.tail_mass(hi)).max(0.0)
    }

    /// Density with respect to Lebesgue measure (zero for atomic parts).
    pub fn density(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match *self {
            LevyMeasure::ParetoTail { alpha, cutoff } => {
                if z > cutoff {
                    z.powf(-alpha - 1.0)
                } else {
                    0.0
                }
            }
            LevyMeasure::Gamma { shape, rate } => gamma_pdf(shape, rate, z),
            LevyMeasure::CompoundPoisson { rate, ref jump_dist } => match *jump_dist {
                JumpDist::Degenerate { .. } => 0.0,
                JumpDist::Exponential { rate: mu } => rate * mu * (-mu * z).exp(),
                JumpDist::Uniform { lo, hi } => {
                    if z >= lo && z <= hi {
                        rate / (hi - lo)
                    } else {
                        0.0
                    }
                }
            },
            LevyMeasure::TemperedStable { alpha, tempering } => z.powf(-alpha - 1.0) * (-tempering * z).exp(),
            LevyMeasure::Atomic { .. } => 0.0,
        }
    }

    pub fn has_unbounded_support(&self) -> bool {
        match self {
            LevyMeasure::CompoundPoisson { jump_dist: JumpDist::Degenerate { .. } | JumpDist::Uniform { .. }, .. } => false,
            LevyMeasure::Atomic { .. } => false,
            _ => true,
        }
    }

    /// Is `λ` a finite measure?
    pub fn is_finite(&self) -> bool {
        self.tail_mass(0.0).is_finite()
    }

    /// `∫_{(lo,hi]} g(z) λ(dz)` for non-negative `g`.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, lo: f64, hi: f64, cfg: &QuadConfig) -> MomentVerdict {
        if !(hi > lo) {
            return MomentVerdict::finite(0.0, Vec::new());
        }
        match self {
            LevyMeasure::Atomic { atoms } => MomentVerdict::exact(
                atoms
                    .iter()
                    .filter(|(z, _)| *z > lo && *z <= hi)
                    .map(|&(z, m)| if m == 0.0 { 0.0 } else { m * g(z) })
                    .sum(),
            ),
            LevyMeasure::CompoundPoisson { rate, jump_dist: JumpDist::Degenerate { value } } => {
                MomentVerdict::exact(if *value > lo && *value <= hi { rate * g(*value) } else { 0.0 })
            }
            LevyMeasure::CompoundPoisson { jump_dist: JumpDist::Uniform { lo: a, hi: b }, .. } => {
                let (l, h) = (lo.max(*a), hi.min(*b));
                if !(h > l) {
                    return MomentVerdict::finite(0.0, Vec::new());
                }
                quad::improper(|z| g(z) * self.density(z), l, h, cfg)
            }
            LevyMeasure::ParetoTail { cutoff, .. } => {
                quad::improper(|z| g(z) * self.density(z), lo.max(*cutoff), hi, cfg)
            }
            _ => quad::improper(|z| g(z) * self.density(z), lo, hi, cfg),
        }
    }

    /// `∫_{(lo,hi]} z^p λ(dz)`.
    pub fn partial_moment(&self, p: f64, lo: f64, hi: f64, cfg: &QuadConfig) -> MomentVerdict {
        if !(hi > lo) {
            return MomentVerdict::finite(0.0, Vec::new());
        }
        match *self {
            LevyMeasure::ParetoTail { alpha, cutoff } => power_integral(p - alpha - 1.0, lo.max(cutoff), hi),
            LevyMeasure::Gamma { shape, rate } => gamma_density_moment(shape, rate, p, lo, hi, cfg),
            LevyMeasure::CompoundPoisson { rate, jump_dist: JumpDist::Exponential { rate: mu } } => {
                gamma_density_moment(1.0, mu, p, lo, hi, cfg).scale(rate)
            }
            LevyMeasure::CompoundPoisson { rate, jump_dist: JumpDist::Uniform { lo: a, hi: b } } => {
                power_integral(p, lo.max(a), hi.min(b)).scale(rate / (b - a))
            }
            LevyMeasure::TemperedStable { alpha, tempering } => {
                if tempering == 0.0 {
                    return power_integral(p - alpha - 1.0, lo, hi);
                }
                let s = p - alpha;
                if lo == 0.0 && s <= 0.0 {
                    return MomentVerdict::divergent(-s, Vec::new());
                }
                let v = tempering.powf(-s) * (upper_gamma(s, tempering * lo) - upper_gamma(s, tempering * hi));
                if v.is_finite() && v >= 0.0 {
                    MomentVerdict::finite(v, Vec::new())
                } else {
                    self.integrate(|z| z.powf(p), lo, hi, cfg)
                }
            }
            _ => self.integrate(|z| z.powf(p), lo, hi, cfg),
        }
    }

    /// `∫_{(1,∞)} log z λ(dz)`.
    pub fn log_moment(&self, cfg: &QuadConfig) -> MomentVerdict {
        match *self {
            LevyMeasure::ParetoTail { alpha, cutoff } => {
                let c = cutoff.max(1.0);
                MomentVerdict::finite(c.powf(-alpha) * (alpha * c.ln() + 1.0) / (alpha * alpha), Vec::new())
            }
            _ => self.integrate(|z| z.ln(), 1.0, f64::INFINITY, cfg),
        }
    }

    /// `∫_{(r,∞)} log z λ(dz)` for `r > 0`; may be negative when `r < 1`.
    pub fn log_moment_above(&self, r: f64, cfg: &QuadConfig) -> MomentVerdict {
        if let LevyMeasure::ParetoTail { alpha, cutoff } = *self {
            let c = cutoff.max(r);
            return MomentVerdict::finite(c.powf(-alpha) * (alpha * c.ln() + 1.0) / (alpha * alpha), Vec::new());
        }
        if r >= 1.0 {
            return self.integrate(|z| z.ln(), r, f64::INFINITY, cfg);
        }
        let below = self.integrate(|z| -z.ln(), r, 1.0, cfg);
        let above = self.log_moment(cfg);
        match (below.value(), above.value()) {
            (Some(b), Some(a)) => MomentVerdict::finite(a - b, Vec::new()),
            _ if above.is_divergent() => above,
            _ => MomentVerdict::inconclusive(Vec::new()),
        }
    }

    /// Blumenthal–Getoor index `β₀` at zero, the working `β`, the tail index `η∞`
    /// and the working `η`.
    pub fn bg_indices(&self, slack: f64) -> BgIndices {
        let finite_all = |eta_inf: f64| BgIndices {
            beta0: 0.0,
            beta: 0.0,
            eta_inf,
            eta: if eta_inf.is_infinite() { ETA_CAP } else { (eta_inf - slack).max(0.0) },
        };
        match *self {
            LevyMeasure::ParetoTail { alpha, cutoff } => {
                if cutoff == 0.0 {
                    BgIndices { beta0: alpha, beta: (alpha + slack).min(2.0), eta_inf: alpha, eta: (alpha - slack).max(0.0) }
                } else {
                    finite_all(alpha)
                }
            }
            LevyMeasure::TemperedStable { alpha, tempering } => {
                let (eta_inf, eta) = if tempering > 0.0 { (f64::INFINITY, ETA_CAP) } else { (alpha, (alpha - slack).max(0.0)) };
                BgIndices { beta0: alpha, beta: (alpha + slack).min(2.0), eta_inf, eta }
            }
            _ => finite_all(f64::INFINITY),
        }
    }

    /// Draws one jump from `λ` restricted to `(lo, hi]` and normalized.
    pub fn sample_conditional<R: Rng + ?Sized>(&self, lo: f64, hi: f64, rng: &mut R) -> f64 {
        match *self {
            LevyMeasure::ParetoTail { alpha, cutoff } => sample_pareto(alpha, lo.max(cutoff), hi, rng),
            LevyMeasure::TemperedStable { alpha, tempering } => loop {
                let z = sample_pareto(alpha, lo, hi, rng);
                if tempering == 0.0 || rng.random::<f64>() < (-tempering * (z - lo)).exp() {
                    break z;
                }
            },
            LevyMeasure::Gamma { shape, rate } => sample_gamma_window(shape, rate, lo, hi, rng),
            LevyMeasure::CompoundPoisson { ref jump_dist, .. } => match *jump_dist {
                JumpDist::Degenerate { value } => value,
                JumpDist::Exponential { rate } => {
                    let u: f64 = rng.random();
                    let fl = (-rate * lo).exp();
                    let fh = if hi.is_infinite() { 0.0 } else { (-rate * hi).exp() };
                    -(fl - u * (fl - fh)).ln() / rate
                }
                JumpDist::Uniform { lo: a, hi: b } => {
                    let (l, h) = (lo.max(a), hi.min(b));
                    l + (h - l) * rng.random::<f64>()
                }
            },
            LevyMeasure::Atomic { ref atoms } => {
                let sel: Vec<&(f64, f64)> = atoms.iter().filter(|(z, _)| *z > lo && *z <= hi).collect();
                let total: f64 = sel.iter().map(|(_, m)| m).sum();
                let mut u = rng.random::<f64>() * total;
                for (z, m) in &sel {
                    if u < *m {
                        return *z;
                    }
                    u -= m;
                }
                sel.last().map(|(z, _)| *z).unwrap_or(lo)
            }
        }
    }

    /// Poisson(`region_mass · λ̄(threshold)`) i.i.d. draws from `λ` on `(threshold, ∞)`.
    pub fn sample_jumps<R: Rng + ?Sized>(&self, threshold: f64, region_mass: f64, rng: &mut R) -> Result<Vec<f64>> {
        let tail = self.tail_mass(threshold);
        if !tail.is_finite() {
            return Err(Error::InfiniteIntensity(format!("λ̄({threshold}) is infinite")));
        }
        let mean = region_mass * tail;
        let n = poisson(mean, rng);
        Ok((0..n).map(|_| self.sample_conditional(threshold, f64::INFINITY, rng)).collect())
    }
}

/// Poisson draw; zero for a zero mean.
pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

fn sample_pareto<R: Rng + ?Sized>(alpha: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let tl = lo.powf(-alpha);
    let th = if hi.is_infinite() { 0.0 } else { hi.powf(-alpha) };
    (tl - u * (tl - th)).powf(-1.0 / alpha).min(hi)
}

fn sample_gamma_window<R: Rng + ?Sized>(k: f64, beta: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let p = lower_reg(k, beta * hi) - lower_reg(k, beta * lo);
    if p > 0.2 {
        let g = rand_distr::Gamma::new(k, 1.0 / beta).expect("valid gamma");
        loop {
            let z = g.sample(rng);
            if z > lo && z <= hi {
                return z;
            }
        }
    }
    // inverse CDF by bisection on the upper tail
    let ql = upper_reg(k, beta * lo);
    let qh = upper_reg(k, beta * hi);
    let target = ql - rng.random::<f64>() * (ql - qh);
    let (mut a, mut b) = (lo, if hi.is_finite() { hi } else { lo.max(1.0) * 2.0 });
    while upper_reg(k, beta * b) > target {
        b *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if upper_reg(k, beta * m) > target {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-14 * b {
            break;
        }
    }
    0.5 * (a + b)
}

/// The dependence measure `π` on `V ⊆ [0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DependenceMeasure {
    /// Normalized exponential density.
    ExpDensity { rate: f64 },
    /// Normalized gamma density.
    GammaDensity { shape: f64, rate: f64 },
    /// `x^{exponent} dx` on `(lo, hi]`; a missing `hi` means `∞`.
    PowerDensity {
        exponent: f64,
        lo: f64,
        #[serde(default, with = "crate::ext::real_opt", skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    /// Lebesgue measure on `[0, upper]`; a missing `upper` means `[0, ∞)`.
    Lebesgue {
        #[serde(default, with = "crate::ext::real_opt", skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
    },
    Atomic { atoms: Vec<(f64, f64)> },
}

/// Which logarithmic factor `1 + w(x)` to include in a weighted moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogSide {
    LogX,
    LogInvX,
    None,
}

impl DependenceMeasure {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match self {
            DependenceMeasure::ExpDensity { rate } => pos(*rate, "rate"),
            DependenceMeasure::GammaDensity { shape, rate } => {
                pos(*shape, "shape")?;
                pos(*rate, "rate")
            }
            DependenceMeasure::PowerDensity { exponent, lo, hi } => {
                if !exponent.is_finite() {
                    return invalid("exponent must be finite");
                }
                if !(*lo >= 0.0 && lo.is_finite()) {
                    return invalid("lo must be ≥ 0");
                }
                if let Some(h) = hi {
                    if !(*h > *lo) {
                        return invalid("hi must exceed lo");
                    }
                }
                Ok(())
            }
            DependenceMeasure::Lebesgue { upper } => match upper {
                Some(u) => pos(*u, "upper"),
                None => Ok(()),
            },
            DependenceMeasure::Atomic { atoms } => {
                if atoms.is_empty() {
                    return invalid("atomic measure needs at least one atom");
                }
                for &(x, m) in atoms {
                    if !(x >= 0.0 && x.is_finite()) {
                        return invalid("atom location must be ≥ 0");
                    }
                    pos(m, "atom mass")?;
                }
                Ok(())
            }
        }
    }

    /// Closure of the support as `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DependenceMeasure::ExpDensity { .. } | DependenceMeasure::GammaDensity { .. } => (0.0, f64::INFINITY),
            DependenceMeasure::PowerDensity { lo, hi, .. } => (*lo, hi.unwrap_or(f64::INFINITY)),
            DependenceMeasure::Lebesgue { upper } => (0.0, upper.unwrap_or(f64::INFINITY)),
            DependenceMeasure::Atomic { atoms } => {
                let lo = atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
                let hi = atoms.iter().map(|a| a.0).fold(0.0, f64::max);
                (lo, hi)
            }
        }
    }

    pub fn has_atom_at_zero(&self) -> bool {
        matches!(self, DependenceMeasure::Atomic { atoms } if atoms.iter().any(|a| a.0 == 0.0))
    }

    /// `π((lo, hi])`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if let DependenceMeasure::Atomic { atoms } = self {
            return atoms.iter().filter(|(x, _)| *x > lo && *x <= hi).map(|a| a.1).sum();
        }
        if lo < 0.0 {
            // include a potential left endpoint at 0
            return self.mass(0.0, hi);
        }
        self.pi_moment(0.0, lo, hi, &QuadConfig::default()).extended()
    }

    /// `π(V)`, possibly `+∞`.
    pub fn total_mass(&self) -> f64 {
        match self {
            DependenceMeasure::Atomic { atoms } => atoms.iter().map(|a| a.1).sum(),
            _ => self.mass(0.0, f64::INFINITY),
        }
    }

    /// Density with respect to Lebesgue measure.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            DependenceMeasure::ExpDensity { rate } => {
                if x >= 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            DependenceMeasure::GammaDensity { shape, rate } => gamma_pdf(shape, rate, x),
            DependenceMeasure::PowerDensity { exponent, lo, hi } => {
                if x > lo && x <= hi.unwrap_or(f64::INFINITY) {
                    x.powf(exponent)
                } else {
                    0.0
                }
            }
            DependenceMeasure::Lebesgue { upper } => {
                if x >= 0.0 && x <= upper.unwrap_or(f64::INFINITY) {
                    1.0
                } else {
                    0.0
                }
            }
            DependenceMeasure::Atomic { .. } => 0.0,
        }
    }

    /// `∫_{(lo,hi]} g(x) π(dx)` for non-negative `g` (atoms at `lo = 0` included when `lo < 0`).
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, lo: f64, hi: f64, cfg: &QuadConfig) -> MomentVerdict {
        if let DependenceMeasure::Atomic { atoms } = self {
            return MomentVerdict::exact(
                atoms.iter().filter(|(x, _)| *x > lo && *x <= hi).map(|&(x, m)| m * g(x)).sum(),
            );
        }
        let (s_lo, s_hi) = self.support();
        let (l, h) = (lo.max(s_lo).max(0.0), hi.min(s_hi));
        if !(h > l) {
            return MomentVerdict::finite(0.0, Vec::new());
        }
        quad::improper(|x| g(x) * self.density(x), l, h, cfg)
    }

    /// `∫_{(lo,hi]} x^p π(dx)`.
    pub fn pi_moment(&self, p: f64, lo: f64, hi: f64, cfg: &QuadConfig) -> MomentVerdict {
        match *self {
            DependenceMeasure::ExpDensity { rate } => gamma_density_moment(1.0, rate, p, lo.max(0.0), hi, cfg),
            DependenceMeasure::GammaDensity { shape, rate } => gamma_density_moment(shape, rate, p, lo.max(0.0), hi, cfg),
            DependenceMeasure::PowerDensity { exponent, lo: a, hi: b } => {
                power_integral(p + exponent, lo.max(a), hi.min(b.unwrap_or(f64::INFINITY)))
            }
            DependenceMeasure::Lebesgue { upper } => power_integral(p, lo.max(0.0), hi.min(upper.unwrap_or(f64::INFINITY))),
            DependenceMeasure::Atomic { .. } => self.integrate(|x| x.powf(p), lo, hi, cfg),
        }
    }

    /// `∫_{(lo,hi]} x^p (1 + w(x)) π(dx)` with `w = log x`, `log(1/x)` or `0`.
    pub fn pi_log_weighted_moment(&self, p: f64, side: LogSide, lo: f64, hi: f64, cfg: &QuadConfig) -> MomentVerdict {
        match side {
            LogSide::None => self.pi_moment(p, lo, hi, cfg),
            LogSide::LogX => self.integrate(|x| x.powf(p) * (1.0 + x.ln()), lo, hi, cfg),
            LogSide::LogInvX => self.integrate(|x| x.powf(p) * (1.0 - x.ln()), lo, hi, cfg),
        }
    }

    /// Draws one point from `π` restricted to `(0, m]` (or `[0, m]` for atoms at 0).
    pub fn sample_truncated<R: Rng + ?Sized>(&self, m: f64, rng: &mut R) -> f64 {
        match *self {
            DependenceMeasure::ExpDensity { rate } => {
                let u: f64 = rng.random();
                let fh = if m.is_infinite() { 0.0 } else { (-rate * m).exp() };
                -(1.0 - u * (1.0 - fh)).ln() / rate
            }
            DependenceMeasure::GammaDensity { shape, rate } => sample_gamma_window(shape, rate, 0.0, m, rng),
            DependenceMeasure::PowerDensity { exponent, lo, hi } => {
                let h = hi.unwrap_or(f64::INFINITY).min(m);
                let q = exponent + 1.0;
                let u: f64 = rng.random();
                if q == 0.0 {
                    (lo.ln() + u * (h / lo).ln()).exp()
                } else {
                    let lq = if lo == 0.0 { 0.0 } else { lo.powf(q) };
                    let hq = h.powf(q);
                    (lq + u * (hq - lq)).powf(1.0 / q)
                }
            }
            DependenceMeasure::Lebesgue { upper } => rng.random::<f64>() * upper.unwrap_or(f64::INFINITY).min(m),
            DependenceMeasure::Atomic { ref atoms } => {
                let sel: Vec<&(f64, f64)> = atoms.iter().filter(|(x, _)| *x <= m).collect();
                let total: f64 = sel.iter().map(|a| a.1).sum();
                let mut u = rng.random::<f64>() * total;
                for (x, w) in &sel {
                    if u < *w {
                        return *x;
                    }
                    u -= w;
                }
                sel.last().map(|a| a.0).unwrap_or(0.0)
            }
        }
    }

    /// `π([0, m])`.
    pub fn mass_up_to(&self, m: f64) -> f64 {
        self.mass(-1.0, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pareto() -> LevyMeasure {
        LevyMeasure::ParetoTail { alpha: 1.5, cutoff: 0.0 }
    }

    #[test]
    fn pareto_closed_forms() {
        let cfg = QuadConfig::default();
        let lm = pareto();
        assert!((lm.tail_mass(1.0) - 1.0 / 1.5).abs() < 1e-14);
        assert_eq!(lm.partial_moment(1.0, 1.0, f64::INFINITY, &cfg).value(), Some(2.0));
        assert!((lm.partial_moment(2.0, 0.0, 1.0, &cfg).value().unwrap() - 2.0).abs() < 1e-14);
        assert!(lm.partial_moment(1.0, 0.0, 1.0, &cfg).is_divergent());
        assert!((lm.log_moment(&cfg).value().unwrap() - 4.0 / 9.0).abs() < 1e-14);
        let bg = lm.bg_indices(0.01);
        assert_eq!((bg.beta0, bg.beta, bg.eta_inf, bg.eta), (1.5, 1.51, 1.5, 1.49));
    }

    #[test]
    fn small_cases() {
        let cfg = QuadConfig::default();
        let a = LevyMeasure::Atomic { atoms: vec![(2.0, 3.0)] };
        assert_eq!(a.tail_mass(1.0), 3.0);
        let e = LevyMeasure::Atomic { atoms: vec![(std::f64::consts::E, 1.0)] };
        assert!((e.log_moment(&cfg).value().unwrap() - 1.0).abs() < 1e-15);
        let g = LevyMeasure::Gamma { shape: 1.0, rate: 1.0 };
        assert!(g.tail_mass(1e9) < 1e-6);
        // ∫_1^∞ log z e^{-z} dz = E1(1)
        assert!((g.log_moment(&cfg).value().unwrap() - 0.219_383_934_395_520_3).abs() < 1e-9);
        let cp = LevyMeasure::CompoundPoisson { rate: 1.0, jump_dist: JumpDist::Degenerate { value: 1.0 } };
        let bg = cp.bg_indices(0.01);
        assert_eq!((bg.beta0, bg.beta, bg.eta_inf, bg.eta), (0.0, 0.0, f64::INFINITY, ETA_CAP));
        let bg = LevyMeasure::Gamma { shape: 2.0, rate: 1.0 }.bg_indices(0.01);
        assert_eq!((bg.beta0, bg.beta, bg.eta_inf), (0.0, 0.0, f64::INFINITY));
    }

    #[test]
    fn pi_examples() {
        let cfg = QuadConfig::default();
        let p = DependenceMeasure::PowerDensity { exponent: -1.0, lo: 1.0, hi: None };
        assert_eq!(p.pi_moment(-1.0, 1.0, f64::INFINITY, &cfg).value(), Some(1.0));
        assert!(p.pi_moment(0.0, 1.0, f64::INFINITY, &cfg).is_divergent());
        assert_eq!(p.total_mass(), f64::INFINITY);
        let a = DependenceMeasure::Atomic { atoms: vec![(1.0, 5.0)] };
        assert_eq!(a.pi_moment(-1.0, 0.0, f64::INFINITY, &cfg).value(), Some(5.0));
        let a1 = DependenceMeasure::Atomic { atoms: vec![(1.0, 1.0)] };
        assert_eq!(a1.pi_log_weighted_moment(3.0, LogSide::LogX, 0.0, f64::INFINITY, &cfg).value(), Some(1.0));
        assert!(p.pi_log_weighted_moment(0.0, LogSide::LogX, 1.0, f64::INFINITY, &cfg).is_divergent());
        let e = DependenceMeasure::ExpDensity { rate: 1.0 };
        let v = e.pi_log_weighted_moment(0.5, LogSide::LogInvX, 0.0, 1.0, &cfg).value().unwrap();
        // midpoint-rule oracle on a fine grid in log coordinates
        let n = 200_000;
        let (ya, yb) = ((1e-12f64).ln(), 0.0);
        let h = (yb - ya) / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = (ya + (i as f64 + 0.5) * h).exp();
                x.powf(0.5) * (1.0 - x.ln()) * (-x).exp() * x * h
            })
            .sum();
        assert!((v - oracle).abs() < 1e-6, "{v} vs {oracle}");
    }

    #[test]
    fn tempered_stable_tail_matches_quadrature() {
        let cfg = QuadConfig::default();
        for &(a, th) in &[(0.5, 1.0), (1.0, 2.0), (1.5, 0.5)] {
            let lm = LevyMeasure::TemperedStable { alpha: a, tempering: th };
            for &r in &[0.01, 0.3, 1.0, 4.0] {
                let q = quad::improper(|z| lm.density(z), r, f64::INFINITY, &cfg).value().unwrap();
                let t = lm.tail_mass(r);
                assert!((t - q).abs() < 1e-8 * q, "a={a} th={th} r={r}: {t} vs {q}");
            }
        }
    }

    #[test]
    fn gamma_moment_matches_quadrature() {
        let cfg = QuadConfig::default();
        let lm = LevyMeasure::Gamma { shape: 2.0, rate: 1.5 };
        for &(p, lo, hi) in &[(1.0, 0.0, 1.0), (2.0, 1.0, f64::INFINITY), (-0.5, 0.2, 7.0), (0.0, 3.0, 40.0)] {
            let c = lm.partial_moment(p, lo, hi, &cfg).value().unwrap();
            let q = lm.integrate(|z: f64| z.powf(p), lo, hi, &cfg).value().unwrap();
            assert!((c - q).abs() < 1e-8 * q.abs().max(1e-300), "{p} {lo} {hi}: {c} vs {q}");
        }
    }

    #[test]
    fn sampler_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(pareto().sample_jumps(1.0, 0.0, &mut rng).unwrap().is_empty());
        let a = LevyMeasure::Atomic { atoms: vec![(2.0, 3.0)] };
        assert!(a.sample_jumps(1.0, 1.0, &mut rng).unwrap().iter().all(|z| *z == 2.0));
        assert!(pareto().sample_jumps(0.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn pareto_sampler_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lm = pareto();
        let mut xs: Vec<f64> = (0..100_000).map(|_| lm.sample_conditional(1.0, f64::INFINITY, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let f = 1.0 - lm.tail_mass(z) / lm.tail_mass(1.0);
                ((i as f64 + 1.0) / n - f).abs().max((f - i as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.01, "KS {d}");
    }

    proptest! {
        #[test]
        fn tail_monotone(r1 in 1e-3f64..50.0, dr in 0.0f64..50.0, which in 0usize..5) {
            let lms = [
                pareto(),
                LevyMeasure::ParetoTail { alpha: 0.7, cutoff: 0.5 },
                LevyMeasure::Gamma { shape: 2.0, rate: 1.0 },
                LevyMeasure::TemperedStable { alpha: 1.2, tempering: 0.8 },
                LevyMeasure::CompoundPoisson { rate: 2.0, jump_dist: JumpDist::Exponential { rate: 0.5 } },
            ];
            let lm = &lms[which];
            prop_assert!(lm.tail_mass(r1) >= lm.tail_mass(r1 + dr) * (1.0 - 1e-12));
        }

        #[test]
        fn additivity(p in -0.4f64..2.5, a in 0.01f64..1.0, db in 0.1f64..5.0, dc in 0.1f64..5.0) {
            let cfg = QuadConfig::default();
            let lm = LevyMeasure::Gamma { shape: 1.5, rate: 1.0 };
            let (b, c) = (a + db, a + db + dc);
            let ab = lm.partial_moment(p, a, b, &cfg).value().unwrap();
            let bc = lm.partial_moment(p, b, c, &cfg).value().unwrap();
            let ac = lm.partial_moment(p, a, c, &cfg).value().unwrap();
            prop_assert!((ab + bc - ac).abs() <= 1e-10 * ac);
        }

        #[test]
        fn pareto_closed_form_vs_quadrature(p in 0.0f64..3.0, lo in 0.05f64..3.0, w in 0.1f64..20.0) {
            let cfg = QuadConfig::default();
            let lm = pareto();
            let c = lm.partial_moment(p, lo, lo + w, &cfg).value().unwrap();
            let q = quad::improper(|z| z.powf(p) * lm.density(z), lo, lo + w, &cfg).value().unwrap();
            prop_assert!((c - q).abs() <= 1e-8 * q);
        }
    }
}
