//! Sample paths through the split `Λ = Λ₁ + Λ₂`: an exact compound-Poisson
//! big-jump part (`z > 1`), a compensated small-jump part on `(ε, 1]`, an
//! optional Gaussian stand-in for the jumps below `ε`, and the drift constant.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_existence, CheckConfig, Conclusion, MMASpec};
use crate::error::{invalid, Error, Result};
use crate::kernel::KernelSpec;
use crate::measure::{poisson, LevyMeasure};
use crate::quad::QuadConfig;

const INF: f64 = f64::INFINITY;
/// Target for the adaptive past window.
pub const PAST_TARGET: f64 = 1e-6;
/// Largest past window the adaptive rule will pick.
pub const PAST_CAP: f64 = 1024.0;
/// Grids above this size are refused for Gaussian refinement (dense Cholesky).
pub const MAX_GAUSSIAN_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationParams {
    #[serde(default = "default_eps")]
    pub small_jump_eps: f64,
    /// `None` picks the window adaptively.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub past_window: Option<f64>,
    /// Upper truncation of `V`; mandatory when `π` has infinite mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_bound: Option<f64>,
    #[serde(default)]
    pub gaussian_refine: bool,
}

fn default_eps() -> f64 {
    1e-3
}

impl Default for TruncationParams {
    fn default() -> Self {
        Self { small_jump_eps: default_eps(), past_window: None, v_bound: None, gaussian_refine: false }
    }
}

impl TruncationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.small_jump_eps > 0.0 && self.small_jump_eps <= 1.0) {
            return invalid("small_jump_eps must lie in (0, 1]");
        }
        if let Some(t) = self.past_window {
            if !(t > 0.0 && t.is_finite()) {
                return invalid("past_window must be positive and finite");
            }
        }
        if let Some(m) = self.v_bound {
            if !(m > 0.0 && m.is_finite()) {
                return invalid("v_bound must be positive and finite");
            }
        }
        Ok(())
    }
}

/// One atom `(ξ, τ, ζ)` of the Poisson random measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonPoint {
    pub x: f64,
    pub tau: f64,
    pub z: f64,
}

/// Big and small jump points of one replica.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    pub big: Vec<PoissonPoint>,
    pub small: Vec<PoissonPoint>,
}

/// Pieces of [`truncation_error_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    #[serde(with = "crate::ext::real")]
    pub discarded: f64,
    #[serde(with = "crate::ext::real")]
    pub residual: f64,
    #[serde(with = "crate::ext::real")]
    pub past: f64,
    #[serde(with = "crate::ext::real")]
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub drift: f64,
    pub trunc: TruncationParams,
    #[serde(with = "crate::ext::real")]
    pub trunc_error_bound: f64,
    pub seed: u64,
    pub replica: u64,
}

/// Sidecar metadata written next to a path CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub seed: u64,
    pub replica: u64,
    pub n: usize,
    pub trunc: TruncationParams,
    pub error_bound: ErrorBound,
    pub drift: f64,
}

impl SamplePath {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,x1,x2\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(s, "{},{},{},{}", format_g(self.grid[i]), format_g(self.values[i]), format_g(self.x1[i]), format_g(self.x2[i]));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// C-style `%.12g`.
pub fn format_g(v: f64) -> String {
    format_g_prec(v, 12)
}

pub fn format_g_prec(v: f64, p: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = p.max(1);
    let sci = format!("{:.*e}", p - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let x: i32 = exp.parse().expect("exponent digits");
    if x < -4 || x >= p as i32 {
        let mant = strip_zeros(mant);
        let sign = if x < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", x.abs())
    } else {
        let decimals = (p as i32 - 1 - x).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => (0..n)
            .map(|i| {
                let w = i as f64 / (n - 1) as f64;
                t0 * (1.0 - w) + t1 * w
            })
            .collect(),
    }
}

fn sides(k: &KernelSpec) -> f64 {
    if k.is_continuous() {
        2.0
    } else {
        1.0
    }
}

/// Effective bound on the `x`-marks: user bound, support, and for trawls `a(0)`.
fn x_bound(spec: &MMASpec, trunc: &TruncationParams) -> f64 {
    let mut m = trunc.v_bound.unwrap_or(INF).min(spec.pi.support().1);
    if let KernelSpec::Trawl { trawl_fn } = &spec.kernel {
        m = m.min(trawl_fn.a0());
    }
    m
}

/// `∫∫_{u<t−T} f(x,t−u)² du` per `x` (both sides for the well-balanced kernel).
fn past_sq(k: &KernelSpec, x: f64, t_past: f64) -> f64 {
    let w = k.weight(x);
    sides(k) * w * w * (-2.0 * x * t_past).exp() / (2.0 * x)
}

/// `∫_{z>1} (c z ∧ 1) λ(dz)`.
fn capped_min(lm: &LevyMeasure, c: f64, cfg: &QuadConfig) -> f64 {
    if !(1.0 / c).is_finite() {
        return 0.0;
    }
    let r = (1.0 / c).max(1.0);
    let m1 = if r > 1.0 { c * lm.partial_moment(1.0, 1.0, r, cfg).extended() } else { 0.0 };
    m1 + lm.tail_mass(r)
}

/// `x ∫_{z>1} ∫_0^∞ (c z e^{−xs} ∧ 1) ds λ(dz)`, which does not depend on `x`.
fn capped_side(lm: &LevyMeasure, ln_c: f64, cfg: &QuadConfig) -> f64 {
    let c = ln_c.exp();
    if !(1.0 / c).is_finite() {
        return 0.0;
    }
    let r = (1.0 / c).max(1.0);
    let m1 = if r > 1.0 { c * lm.partial_moment(1.0, 1.0, r, cfg).extended() } else { 0.0 };
    let tail = lm.tail_mass(r);
    let big = if tail == 0.0 { 0.0 } else { (1.0 + ln_c) * tail + lm.log_moment_above(r, cfg).extended() };
    m1 + big
}

/// Sum of the discarded big-jump count, the small-jump residual variance (when
/// the Gaussian refinement is off) and the past-window contribution.
pub fn truncation_error_bound(spec: &MMASpec, trunc: &TruncationParams, t_past: f64, cfg: &QuadConfig) -> ErrorBound {
    let lm = &spec.levy;
    let pi = &spec.pi;
    let tail1 = lm.tail_mass(1.0);
    let small2 = lm.partial_moment(2.0, 0.0, 1.0, cfg).extended();
    let eps2 = lm.partial_moment(2.0, 0.0, trunc.small_jump_eps, cfg).extended();
    let mul = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
    let (discarded, residual, past) = match &spec.kernel {
        KernelSpec::Trawl { trawl_fn } => {
            let upper = pi.support().1;
            let sim_m = trunc.v_bound.unwrap_or(INF).min(upper);
            let full = trawl_fn.integral_capped(INF, upper);
            let kept = trawl_fn.integral_capped(INF, sim_m);
            let discarded = if sim_m.is_infinite() && trawl_fn.a0().is_infinite() { INF } else { mul(tail1, (full - kept).max(0.0)) };
            let residual = if trunc.gaussian_refine { 0.0 } else { mul(eps2, full) };
            let past_len = (full - trawl_fn.integral_capped(t_past, upper)).max(0.0);
            (discarded, residual, mul(small2 + tail1, past_len))
        }
        k => {
            let m = trunc.v_bound.unwrap_or(INF);
            let discarded = if m >= pi.support().1 {
                if pi.total_mass().is_infinite() {
                    INF
                } else {
                    0.0
                }
            } else if tail1 == 0.0 {
                0.0
            } else {
                pi.integrate(|x| capped_min(lm, k.weight(x), cfg) + sides(k) * capped_side(lm, k.weight(x).ln(), cfg) / x, m, INF, cfg).extended()
            };
            let residual = if trunc.gaussian_refine || eps2 == 0.0 {
                0.0
            } else {
                mul(eps2, pi.integrate(|x| k.cov_u_integral(x, 0.0), 0.0, INF, cfg).extended())
            };
            let p_small = if small2 == 0.0 { 0.0 } else { small2 * pi.integrate(|x| past_sq(k, x, t_past), 0.0, INF, cfg).extended() };
            let p_big = if tail1 == 0.0 {
                0.0
            } else {
                pi.integrate(|x| sides(k) * capped_side(lm, k.weight(x).ln() - x * t_past, cfg) / x, 0.0, INF, cfg).extended()
            };
            (discarded, residual, p_small + p_big)
        }
    };
    ErrorBound { discarded, residual, past, total: discarded + residual + past }
}

/// Smallest power-of-two past window with past term below [`PAST_TARGET`], capped at [`PAST_CAP`].
pub fn adaptive_past_window(spec: &MMASpec, trunc: &TruncationParams, cfg: &QuadConfig) -> f64 {
    let mut t = 1.0;
    while t < PAST_CAP {
        let b = truncation_error_bound(spec, trunc, t, cfg).past;
        if b.is_finite() && b < PAST_TARGET {
            break;
        }
        t *= 2.0;
    }
    t
}

/// Poisson points with marks in the truncated `V`, times in `window` and jumps in `(lo, hi]`.
pub fn generate_points<R: Rng + ?Sized>(
    spec: &MMASpec,
    window: (f64, f64),
    z_range: (f64, f64),
    trunc: &TruncationParams,
    rng: &mut R,
) -> Result<Vec<PoissonPoint>> {
    let m = x_bound(spec, trunc);
    let pi_mass = spec.pi.mass(-1.0, m);
    let len = (window.1 - window.0).max(0.0);
    if len == 0.0 {
        return Ok(Vec::new());
    }
    if !pi_mass.is_finite() {
        return Err(Error::InfiniteIntensity("π((0,M]) is infinite; set trunc.v_bound".into()));
    }
    let lam = spec.levy.mass(z_range.0, z_range.1);
    if !lam.is_finite() {
        return Err(Error::InfiniteIntensity(format!("λ(({}, {}]) is infinite; raise trunc.small_jump_eps", z_range.0, z_range.1)));
    }
    let n = poisson(pi_mass * len * lam, rng);
    Ok((0..n)
        .map(|_| {
            let x = spec.pi.sample_truncated(m, rng);
            let tau = window.0 + len * rng.random::<f64>();
            let z = spec.levy.sample_conditional(z_range.0, z_range.1, rng);
            PoissonPoint { x, tau, z }
        })
        .collect())
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    pub force: bool,
    pub quad: QuadConfig,
}

/// Precomputed, replica-independent parts of the path construction.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: MMASpec,
    grid: Vec<f64>,
    trunc: TruncationParams,
    window: (f64, f64),
    m: f64,
    comp_coef: f64,
    compensator: Vec<f64>,
    chol: Option<DMatrix<f64>>,
    drift: f64,
    bound: ErrorBound,
    quad: QuadConfig,
}

impl Simulator {
    pub fn new(spec: &MMASpec, grid: &[f64], trunc: &TruncationParams, opts: &SimOptions) -> Result<Self> {
        spec.validate()?;
        trunc.validate()?;
        if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] < w[0]) {
            return invalid("grid must be non-empty, finite and non-decreasing");
        }
        if !opts.force {
            let check = CheckConfig { quad: opts.quad.clone(), ..CheckConfig::default() };
            let ex = check_existence(spec, &check)?;
            if ex.conclusion != Conclusion::ExistenceHolds {
                return Err(Error::ExistenceFailed(format!("existence check concluded {:?}; use force to override", ex.conclusion)));
            }
        }
        let cfg = &opts.quad;
        let m = x_bound(spec, trunc);
        if !spec.pi.mass(-1.0, m).is_finite() {
            return Err(Error::InfiniteIntensity("π((0,M]) is infinite; set trunc.v_bound".into()));
        }
        let t_past = match trunc.past_window {
            Some(t) => t,
            None => adaptive_past_window(spec, trunc, cfg),
        };
        let resolved = TruncationParams { past_window: Some(t_past), ..*trunc };
        let (t_lo, t_hi) = (grid[0], grid[grid.len() - 1]);
        let future = if spec.kernel.is_continuous() { t_past } else { 0.0 };
        let window = (t_lo - t_past, t_hi + future);
        let eps = trunc.small_jump_eps;
        let comp_coef = spec.levy.partial_moment(1.0, eps, 1.0, cfg).extended();
        if !comp_coef.is_finite() {
            return Err(Error::InfiniteIntensity("∫_(ε,1] z λ(dz) is not finite".into()));
        }
        let drift = if spec.drift == 0.0 {
            0.0
        } else {
            match spec.kernel.mean_integral(&spec.pi, cfg)?.value() {
                Some(v) => spec.drift * v,
                None => return Err(Error::Degenerate("∫∫ f π du is not finite, so the drift constant is undefined".into())),
            }
        };
        let bound = truncation_error_bound(spec, &resolved, t_past, cfg);
        let mut sim = Simulator {
            spec: spec.clone(),
            grid: grid.to_vec(),
            trunc: resolved,
            window,
            m,
            comp_coef,
            compensator: Vec::new(),
            chol: None,
            drift,
            bound,
            quad: cfg.clone(),
        };
        sim.compensator = grid.iter().map(|&t| sim.compensator_at(t)).collect();
        if trunc.gaussian_refine {
            sim.chol = sim.gaussian_factor()?;
        }
        Ok(sim)
    }

    pub fn trunc(&self) -> &TruncationParams {
        &self.trunc
    }
    pub fn window(&self) -> (f64, f64) {
        self.window
    }
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn error_bound(&self) -> ErrorBound {
        self.bound
    }
    pub fn drift(&self) -> f64 {
        self.drift
    }
    pub fn spec(&self) -> &MMASpec {
        &self.spec
    }
    /// Effective `V` truncation used for the marks.
    pub fn v_bound(&self) -> f64 {
        self.m
    }

    /// `∫∫∫_{(ε,1]} f(x,t−u) z ν` over the simulation window.
    pub fn compensator_at(&self, t: f64) -> f64 {
        if self.comp_coef == 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.window;
        let spatial = match &self.spec.kernel {
            KernelSpec::Trawl { trawl_fn } => trawl_fn.integral_capped((t - lo).max(0.0), self.m),
            k => self.spec.pi.integrate(|x| k.window_u_integral(x, t, lo, hi), -1.0, self.m, &self.quad).extended(),
        };
        self.comp_coef * spatial
    }

    fn lag_cov(&self, delta: f64) -> f64 {
        match &self.spec.kernel {
            KernelSpec::Trawl { trawl_fn } => (trawl_fn.integral_capped(INF, self.m) - trawl_fn.integral_capped(delta, self.m)).max(0.0),
            k => self.spec.pi.integrate(|x| k.cov_u_integral(x, delta), -1.0, self.m, &self.quad).extended(),
        }
    }

    fn gaussian_factor(&self) -> Result<Option<DMatrix<f64>>> {
        let sigma2 = self.spec.levy.partial_moment(2.0, 0.0, self.trunc.small_jump_eps, &self.quad).extended();
        if sigma2 == 0.0 {
            return Ok(None);
        }
        let n = self.grid.len();
        if n > MAX_GAUSSIAN_GRID {
            return invalid(format!("gaussian refinement supports at most {MAX_GAUSSIAN_GRID} grid points"));
        }
        let mut cache: HashMap<u64, f64> = HashMap::new();
        let mut cov = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let d = (self.grid[i] - self.grid[j]).abs();
                let c = *cache.entry(d.to_bits()).or_insert_with(|| sigma2 * self.lag_cov(d));
                if !c.is_finite() {
                    return Err(Error::Degenerate("small-jump covariance is not finite".into()));
                }
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        let scale = (0..n).map(|i| cov[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut jitter = 0.0;
        for _ in 0..8 {
            let mut a = cov.clone();
            for i in 0..n {
                a[(i, i)] += jitter;
            }
            if let Some(ch) = a.cholesky() {
                return Ok(Some(ch.l()));
            }
            jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
        }
        Err(Error::Degenerate("gaussian covariance is not positive definite".into()))
    }

    /// Deterministic per-replica generator.
    pub fn rng(seed: u64, replica: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        rng
    }

    pub fn sample_points<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointSet> {
        let big = generate_points(&self.spec, self.window, (1.0, INF), &self.trunc, rng)?;
        let small = generate_points(&self.spec, self.window, (self.trunc.small_jump_eps, 1.0), &self.trunc, rng)?;
        Ok(PointSet { big, small })
    }

    fn shot(&self, pts: &[PoissonPoint], t: f64) -> f64 {
        pts.iter().filter(|p| p.x <= self.m).map(|p| self.spec.kernel.evaluate(p.x, t - p.tau) * p.z).sum()
    }

    /// `(X₁, X₂)` at arbitrary times from a point set, without the Gaussian part.
    /// Points with marks above this simulator's `V` bound are ignored.
    pub fn evaluate(&self, pts: &PointSet, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let x1 = times.iter().map(|&t| self.shot(&pts.small, t) - self.compensator_at(t)).collect();
        let x2 = times.iter().map(|&t| self.shot(&pts.big, t)).collect();
        (x1, x2)
    }

    pub fn path(&self, seed: u64, replica: u64) -> Result<SamplePath> {
        let mut rng = Self::rng(seed, replica);
        let pts = self.sample_points(&mut rng)?;
        let mut x1: Vec<f64> = self.grid.iter().zip(&self.compensator).map(|(&t, c)| self.shot(&pts.small, t) - c).collect();
        let x2: Vec<f64> = self.grid.iter().map(|&t| self.shot(&pts.big, t)).collect();
        if let Some(l) = &self.chol {
            let n = self.grid.len();
            let z = nalgebra::DVector::<f64>::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let g = l * z;
            for (a, b) in x1.iter_mut().zip(g.iter()) {
                *a += b;
            }
        }
        let values = x1.iter().zip(&x2).map(|(a, b)| a + b + self.drift).collect();
        Ok(SamplePath {
            grid: self.grid.clone(),
            values,
            x1,
            x2,
            drift: self.drift,
            trunc: self.trunc,
            trunc_error_bound: self.bound.total,
            seed,
            replica,
        })
    }

    /// Replicas `0..n`, computed in parallel and returned in index order.
    pub fn replicas(&self, seed: u64, n: u64) -> Result<Vec<SamplePath>> {
        (0..n).into_par_iter().map(|r| self.path(seed, r)).collect()
    }

    pub fn meta(&self, path: &SamplePath) -> PathMeta {
        PathMeta { seed: path.seed, replica: path.replica, n: path.grid.len(), trunc: self.trunc, error_bound: self.bound, drift: self.drift }
    }
}

/// One path on `grid` with replica index 0.
pub fn simulate_path(spec: &MMASpec, grid: &[f64], trunc: &TruncationParams, seed: u64, opts: &SimOptions) -> Result<SamplePath> {
    Simulator::new(spec, grid, trunc, opts)?.path(seed, 0)
}
