//! Adaptive Gauss–Kronrod quadrature and the nested-domain finiteness test
//! used for every improper moment integral in the crate.
//!
//! Integrals over `(lo, hi]` with an endpoint at `0` or `∞` are evaluated
//! decade by decade (`(b·10^{-k-1}, b·10^{-k}]` towards zero, `(a·10^k, a·10^{k+1}]`
//! towards infinity), each decade mapped to log-space so that power laws become
//! exponentials. The sequence of decade contributions then drives a
//! Finite / Divergent / Inconclusive decision.

use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::collections::BinaryHeap;

use crate::measure::{MomentVerdict, VerdictStatus};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budgets for quadrature and the divergence decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    /// Relative tolerance for each finite-interval adaptive integral.
    pub rel_tol: f64,
    /// Absolute tolerance floor for each finite-interval adaptive integral.
    pub abs_tol: f64,
    /// Integrand evaluation budget per improper integral.
    pub max_evals: usize,
    /// Number of decades explored towards an infinite or zero endpoint.
    pub max_levels: usize,
    /// Successive increments below this fraction of the running total mean convergence.
    pub converge_rtol: f64,
    /// Partial integrals above this value are declared divergent.
    pub blowup: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-300,
            max_evals: 1_000_000,
            max_levels: 40,
            converge_rtol: 1e-9,
            blowup: 1e12,
        }
    }
}

/// Result of a finite-interval adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        res_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    (res_k * h, ((res_k - res_g) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, abs_err: 0.0, evals: 0, converged: true };
    }
    let (v, e) = gk15(&f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    loop {
        if !total.is_finite() {
            return QuadResult { value: total, abs_err: f64::INFINITY, evals, converged: false };
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return QuadResult { value: total, abs_err: total_err, evals, converged: true };
        }
        if evals + 30 > max_evals {
            return QuadResult { value: total, abs_err: total_err, evals, converged: false };
        }
        let seg = heap.pop().expect("heap never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval exhausted at machine precision
            heap.push(seg);
            return QuadResult { value: total, abs_err: total_err, evals, converged: total_err <= 1e-6 * total.abs().max(abs_tol) };
        }
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        evals += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
        if total_err < 0.0 {
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
}

/// Integrates over `[a, b]` (both finite, `0 < a`) in log space, splitting into decades.
fn log_space<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cfg: &QuadConfig, budget: &Cell<usize>) -> Option<f64> {
    let g = |y: f64| {
        let x = y.exp();
        let v = f(x) * x;
        if v.is_nan() {
            0.0
        } else {
            v
        }
    };
    let r = adaptive(g, a.ln(), b.ln(), cfg.rel_tol, cfg.abs_tol, budget.get());
    budget.set(budget.get().saturating_sub(r.evals));
    if r.value == f64::INFINITY {
        return Some(f64::INFINITY);
    }
    if r.converged || r.abs_err <= 1e-7 * r.value.abs() {
        Some(r.value)
    } else {
        None
    }
}

/// Integral over a bounded interval `[a, b]`; linear space when `a == 0` is
/// impossible to avoid, log space otherwise.
pub fn finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Option<f64> {
    if b <= a {
        return Some(0.0);
    }
    let budget = Cell::new(cfg.max_evals);
    if a > 0.0 && b / a > 4.0 {
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let hi = (lo * 10.0).min(b);
            total += log_space(&f, lo, hi, cfg, &budget)?;
            lo = hi;
        }
        Some(total)
    } else {
        let r = adaptive(&f, a, b, cfg.rel_tol, cfg.abs_tol, cfg.max_evals);
        if r.converged || r.abs_err <= 1e-7 * r.value.abs() {
            Some(r.value)
        } else {
            None
        }
    }
}

enum Direction {
    ToZero,
    ToInfinity,
}

/// Nested-domain decision procedure for a one-sided improper integral.
fn nested<F: Fn(f64) -> f64>(f: &F, anchor: f64, dir: Direction, cfg: &QuadConfig, budget: &Cell<usize>) -> MomentVerdict {
    let mut total = 0.0_f64;
    let mut pieces: Vec<f64> = Vec::with_capacity(cfg.max_levels);
    let mut evidence = Vec::with_capacity(cfg.max_levels);
    for k in 0..cfg.max_levels {
        let (a, b, bound) = match dir {
            Direction::ToZero => {
                let b = anchor * 10f64.powi(-(k as i32));
                (b / 10.0, b, b / 10.0)
            }
            Direction::ToInfinity => {
                let a = anchor * 10f64.powi(k as i32);
                (a, a * 10.0, a * 10.0)
            }
        };
        if !(a > 0.0) || !b.is_finite() {
            break;
        }
        let piece = match log_space(f, a, b, cfg, budget) {
            Some(p) => p.abs(),
            None => return MomentVerdict::inconclusive(evidence),
        };
        total += piece;
        pieces.push(piece);
        evidence.push((bound, total));
        if !total.is_finite() || total > cfg.blowup {
            let growth = growth_exponent(&pieces);
            return MomentVerdict::divergent(growth, evidence);
        }
        let n = pieces.len();
        if n >= 3
            && pieces[n - 1] <= cfg.converge_rtol * total
            && pieces[n - 2] <= cfg.converge_rtol * total
        {
            return MomentVerdict::finite(total, evidence);
        }
        if budget.get() == 0 {
            return MomentVerdict::inconclusive(evidence);
        }
    }
    let n = pieces.len();
    if n < 6 {
        return MomentVerdict::inconclusive(evidence);
    }
    let ratios: Vec<f64> = (n - 5..n).map(|i| pieces[i] / pieces[i - 1]).collect();
    if ratios.iter().all(|r| *r >= 0.999) {
        return MomentVerdict::divergent(growth_exponent(&pieces), evidence);
    }
    let last3 = &ratios[2..];
    let rmax = last3.iter().cloned().fold(f64::MIN, f64::max);
    let rmin = last3.iter().cloned().fold(f64::MAX, f64::min);
    if rmin > 0.0 && rmax < 0.995 && rmax - rmin < 1e-3 {
        let r = last3[2];
        let tail = pieces[n - 1] * r / (1.0 - r);
        return MomentVerdict::finite(total + tail, evidence);
    }
    MomentVerdict::inconclusive(evidence)
}

fn growth_exponent(pieces: &[f64]) -> f64 {
    let n = pieces.len();
    if n < 2 || pieces[n - 2] <= 0.0 {
        return 0.0;
    }
    let k = n.min(4);
    let a = pieces[n - k];
    let b = pieces[n - 1];
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    (b / a).log10() / (k - 1) as f64
}

/// Integral of a non-negative `f` over `(lo, hi]` with `0 ≤ lo < hi ≤ ∞`, returning a verdict.
///
/// Endpoints at `0` or `∞` are handled by the nested-domain procedure.
/// Finite, strictly positive endpoints are integrated directly.
pub fn improper<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> MomentVerdict {
    if !(hi > lo) {
        return MomentVerdict::finite(0.0, Vec::new());
    }
    let budget = Cell::new(cfg.max_evals);
    let at_zero = lo <= 0.0;
    let at_inf = hi.is_infinite();
    match (at_zero, at_inf) {
        (false, false) => {
            let mut cfg2 = *cfg;
            cfg2.max_evals = budget.get();
            match finite(&f, lo, hi, &cfg2) {
                Some(v) if v.is_finite() => MomentVerdict::finite(v.abs(), vec![(hi, v.abs())]),
                Some(v) => MomentVerdict::divergent(0.0, vec![(hi, v)]),
                None => MomentVerdict::inconclusive(Vec::new()),
            }
        }
        (true, false) => nested(&f, hi, Direction::ToZero, cfg, &budget),
        (false, true) => nested(&f, lo, Direction::ToInfinity, cfg, &budget),
        (true, true) => {
            let left = nested(&f, 1.0, Direction::ToZero, cfg, &budget);
            let right = nested(&f, 1.0, Direction::ToInfinity, cfg, &budget);
            left.plus(&right)
        }
    }
}

/// Convenience: the value of a verdict known to be finite, or `None`.
pub fn finite_value(v: &MomentVerdict) -> Option<f64> {
    match v.status {
        VerdictStatus::Finite { value } => Some(value),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_exact() {
        let r = adaptive(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 1e-14, 10_000);
        assert!((r.value - 0.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn improper_power_laws() {
        let cfg = QuadConfig::default();
        let v = improper(|x: f64| x.powf(-2.5), 1.0, f64::INFINITY, &cfg);
        assert!((finite_value(&v).unwrap() - 1.0 / 1.5).abs() < 1e-9);
        let v = improper(|x: f64| x.powf(-0.5), 0.0, 1.0, &cfg);
        assert!((finite_value(&v).unwrap() - 2.0).abs() < 1e-9);
        let v = improper(|x: f64| 1.0 / x, 1.0, f64::INFINITY, &cfg);
        assert!(v.is_divergent());
        let v = improper(|x: f64| 1.0 / x, 0.0, 1.0, &cfg);
        assert!(v.is_divergent());
        let v = improper(|x: f64| x.ln() / x, 1.0, f64::INFINITY, &cfg);
        assert!(v.is_divergent());
    }

    #[test]
    fn slow_power_law_is_extrapolated() {
        let cfg = QuadConfig::default();
        // exponent -1.05: value 20, needs geometric tail extrapolation
        let v = improper(|x: f64| x.powf(-1.05), 1.0, f64::INFINITY, &cfg);
        let got = finite_value(&v).expect("finite");
        assert!((got - 20.0).abs() < 1e-6 * 20.0, "{got}");
    }

    #[test]
    fn exponential_peak_far_from_anchor() {
        let cfg = QuadConfig::default();
        let v = improper(|x: f64| (-(x / 300.0)).exp() / 300.0, 0.0, f64::INFINITY, &cfg);
        assert!((finite_value(&v).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn budget_exhaustion_is_inconclusive() {
        let cfg = QuadConfig { max_evals: 1, ..QuadConfig::default() };
        let v = improper(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &cfg);
        assert!(matches!(v.status, VerdictStatus::Inconclusive));
    }
}
