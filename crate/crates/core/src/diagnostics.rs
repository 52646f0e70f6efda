//! Monte Carlo experiments: supremum growth along a `V`-truncation ladder,
//! increment-tail and moment scaling of `X₁`, and an empirical Hölder readout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_noncadlag, classify, CheckConfig, Conclusion, MMASpec};
use crate::error::{invalid, Error, Result};
use crate::quad::QuadConfig;
use crate::simulation::{uniform_grid, SamplePath, SimOptions, Simulator, TruncationParams};
use crate::stats::{bootstrap_ci, linreg, mean, quantile, variance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagOptions {
    /// Skip the regime pre-check.
    pub force: bool,
    pub quad: QuadConfig,
    pub bootstrap: usize,
    /// Grid points on `[0, h]` for the supremum experiment.
    pub sup_grid: usize,
}

impl Default for DiagOptions {
    fn default() -> Self {
        Self { force: false, quad: QuadConfig::default(), bootstrap: 500, sup_grid: 257 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupDivergenceResult {
    pub h: f64,
    pub ladder: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub medians: Vec<f64>,
    pub iqrs: Vec<f64>,
    /// Medians of the largest single big-jump term, `max f(ξ, t*−τ)ζ`.
    pub point_max_medians: Vec<f64>,
    pub monotone_growth: bool,
    /// `(median_K − median_{K−1}) / |median_{K−1}|`.
    pub last_rung_rel_increase: f64,
    /// The big-jump supremum dominated the point maximum in every replica and rung.
    pub point_max_consistent: bool,
    /// Verdict of the non-càdlàg checker that gates the experiment.
    pub regime: Conclusion,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Supremum of `X` over `[0, h]` for each `V`-truncation level, with the levels
/// coupled through one point set simulated at the top of the ladder.
pub fn sup_divergence_experiment(
    spec: &MMASpec,
    h: f64,
    ladder: &[f64],
    replicas: usize,
    seed: u64,
    trunc: &TruncationParams,
    opts: &DiagOptions,
) -> Result<SupDivergenceResult> {
    if !(h > 0.0 && h.is_finite()) {
        return invalid("h must be positive");
    }
    if ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return invalid("ladder must be non-empty, finite and strictly increasing");
    }
    if replicas == 0 {
        return invalid("replicas must be positive");
    }
    let check = CheckConfig { quad: opts.quad.clone(), ..CheckConfig::default() };
    let regime = check_noncadlag(spec, &check)?.conclusion;
    if !opts.force && regime != Conclusion::NoCadlagModification {
        return Err(Error::RegimeMismatch("the spec is not flagged NoCadlagModification (use force)".into()));
    }
    let grid = uniform_grid(0.0, h, opts.sup_grid.max(2));
    let sim_opts = SimOptions { force: true, quad: opts.quad.clone() };
    let top = TruncationParams { v_bound: Some(ladder[ladder.len() - 1]), gaussian_refine: false, ..*trunc };
    let top_sim = Simulator::new(spec, &grid, &top, &sim_opts)?;
    let resolved = *top_sim.trunc();
    let rungs: Vec<Simulator> = ladder
        .iter()
        .map(|&m| Simulator::new(spec, &grid, &TruncationParams { v_bound: Some(m), ..resolved }, &sim_opts))
        .collect::<Result<_>>()?;

    // per replica: (sup X, sup X₂, point max) for every rung
    let per: Vec<Vec<(f64, f64, f64)>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = Simulator::rng(seed, r);
            let pts = top_sim.sample_points(&mut rng)?;
            Ok(rungs
                .iter()
                .map(|sim| {
                    let m = sim.v_bound();
                    let mut times = grid.clone();
                    times.extend(pts.big.iter().filter(|p| p.x <= m && p.tau >= 0.0 && p.tau <= h).map(|p| p.tau));
                    times.sort_by(f64::total_cmp);
                    let (x1, x2) = sim.evaluate(&pts, &times);
                    let sup = x1.iter().zip(&x2).map(|(a, b)| a + b + sim.drift()).fold(f64::NEG_INFINITY, f64::max);
                    let sup2 = x2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let pmax = pts
                        .big
                        .iter()
                        .filter(|p| p.x <= m && p.tau >= 0.0 && p.tau <= h)
                        .map(|p| {
                            let i = grid.partition_point(|&t| t < p.tau).min(grid.len() - 1);
                            spec.kernel.evaluate(p.x, grid[i] - p.tau) * p.z
                        })
                        .fold(0.0, f64::max);
                    (sup, sup2, pmax)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let k = ladder.len();
    let mut medians = Vec::with_capacity(k);
    let mut iqrs = Vec::with_capacity(k);
    let mut pm = Vec::with_capacity(k);
    for j in 0..k {
        let s = sorted(per.iter().map(|v| v[j].0).collect());
        medians.push(quantile(&s, 0.5));
        iqrs.push(quantile(&s, 0.75) - quantile(&s, 0.25));
        pm.push(quantile(&sorted(per.iter().map(|v| v[j].2).collect()), 0.5));
    }
    let consistent = per.iter().all(|v| v.iter().all(|(_, s2, p)| *s2 >= *p - 1e-12 * p.abs()));
    let last = if k >= 2 { (medians[k - 1] - medians[k - 2]) / medians[k - 2].abs() } else { 0.0 };
    Ok(SupDivergenceResult {
        h,
        ladder: ladder.to_vec(),
        replicas,
        seed,
        monotone_growth: medians.windows(2).all(|w| w[1] > w[0]),
        medians,
        iqrs,
        point_max_medians: pm,
        last_rung_rel_increase: last,
        point_max_consistent: consistent,
        regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    Fitted,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub quantity: String,
    pub t: Vec<f64>,
    pub estimate: Vec<f64>,
    pub stderr: Vec<f64>,
    #[serde(with = "crate::ext::real")]
    pub slope: f64,
    #[serde(with = "crate::ext::pairs")]
    pub slope_ci: Vec<(f64, f64)>,
    #[serde(with = "crate::ext::real")]
    pub r2: f64,
    /// Reference curve from the kernel integrals (unit constant).
    #[serde(with = "crate::ext::vec")]
    pub theory: Vec<f64>,
    #[serde(with = "crate::ext::real")]
    pub theory_slope: f64,
    /// Monte Carlo estimate divided by the reference curve.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "crate::ext::vec")]
    pub ratio: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_spread: Option<f64>,
    pub status: FitStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub largest_usable_y: Option<f64>,
    pub replicas: usize,
    pub seed: u64,
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return invalid("t grid must be finite and non-negative");
    }
    let mut d: Vec<f64> = t_grid.iter().cloned().filter(|t| *t > 0.0).collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    if d.len() < 3 {
        return Err(Error::Degenerate("degenerate fit: the t grid needs at least 3 distinct positive values".into()));
    }
    Ok(())
}

fn require_regular(spec: &MMASpec, opts: &DiagOptions) -> Result<()> {
    if opts.force {
        return Ok(());
    }
    let check = CheckConfig { quad: opts.quad.clone(), ..CheckConfig::default() };
    let c = classify(spec, &check)?.conclusion;
    if matches!(c, Conclusion::CadlagModificationExists | Conclusion::ContinuousModificationExists) {
        Ok(())
    } else {
        Err(Error::RegimeMismatch(format!("classification is {c:?} (use force)")))
    }
}

/// Log-log slope over positive entries; `NaN` when fewer than 3 remain.
fn loglog(t: &[f64], v: &[f64]) -> (f64, f64) {
    let (xs, ys): (Vec<f64>, Vec<f64>) = t.iter().zip(v).filter(|(t, v)| **t > 0.0 && **v > 0.0 && v.is_finite()).map(|(t, v)| (t.ln(), v.ln())).unzip();
    if xs.len() < 3 {
        return (f64::NAN, f64::NAN);
    }
    let f = linreg(&xs, &ys);
    (f.slope, f.r2)
}

fn union_grid(t_grid: &[f64], halves: bool) -> Vec<f64> {
    let mut g = vec![0.0];
    for &t in t_grid {
        g.push(t);
        if halves {
            g.push(t / 2.0);
        }
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn index_of(g: &[f64], t: f64) -> usize {
    g.iter().position(|&x| x == t).expect("time on grid")
}

/// Per-replica statistics of `X₁` on the union grid.
fn replicate_x1<F>(spec: &MMASpec, grid: &[f64], trunc: &TruncationParams, replicas: usize, seed: u64, opts: &DiagOptions, stat: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let sim = Simulator::new(spec, grid, trunc, &SimOptions { force: true, quad: opts.quad.clone() })?;
    (0..replicas as u64).into_par_iter().map(|r| sim.path(seed, r).map(|p| stat(&p.x1))).collect()
}

/// Percentile bootstrap of the log-log slope over replicas.
fn bootstrap_slope(t: &[f64], per: &[Vec<f64>], agg: impl Fn(&[f64]) -> f64, reps: usize, seed: u64) -> (f64, f64) {
    let n = per.len();
    let cols: Vec<Vec<f64>> = (0..t.len()).map(|j| per.iter().map(|v| v[j]).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let idx: Vec<f64> = (0..n).map(|i| i as f64).collect();
    bootstrap_ci(
        &idx,
        |sample| {
            let est: Vec<f64> = cols
                .iter()
                .map(|c| {
                    let picked: Vec<f64> = sample.iter().map(|&i| c[i as usize]).collect();
                    agg(&picked)
                })
                .collect();
            let s = loglog(t, &est).0;
            if s.is_nan() {
                f64::NEG_INFINITY
            } else {
                s
            }
        },
        reps,
        0.95,
        &mut rng,
    )
}

/// Scaling of `P(|X₁(t) − X₁(t/2)| ∧ |X₁(t/2) − X₁(0)| > y)` in `t`.
#[allow(clippy::too_many_arguments)]
pub fn increment_tail_scaling(
    spec: &MMASpec,
    alpha: f64,
    y: f64,
    t_grid: &[f64],
    replicas: usize,
    seed: u64,
    trunc: &TruncationParams,
    opts: &DiagOptions,
) -> Result<ScalingFit> {
    check_t_grid(t_grid)?;
    if !(y > 0.0) || replicas < 2 || !(1.0..=2.0).contains(&alpha) {
        return invalid("need y > 0, replicas ≥ 2 and alpha in [1, 2]");
    }
    require_regular(spec, opts)?;
    let ts: Vec<f64> = t_grid.iter().cloned().filter(|t| *t > 0.0).collect();
    let grid = union_grid(&ts, true);
    let idx: Vec<(usize, usize, usize)> = ts.iter().map(|&t| (index_of(&grid, 0.0), index_of(&grid, t / 2.0), index_of(&grid, t))).collect();
    let per = replicate_x1(spec, &grid, trunc, replicas, seed, opts, |x| {
        idx.iter().map(|&(a, b, c)| (x[c] - x[b]).abs().min((x[b] - x[a]).abs())).collect()
    })?;
    let n = replicas as f64;
    let frac = |c: &[f64]| c.iter().filter(|m| **m > y).count() as f64 / c.len() as f64;
    let estimate: Vec<f64> = (0..ts.len()).map(|j| frac(&per.iter().map(|v| v[j]).collect::<Vec<_>>())).collect();
    let stderr: Vec<f64> = estimate.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();

    let cfg = &opts.quad;
    let ma = spec.levy.partial_moment(alpha, 0.0, 1.0, cfg).extended();
    let theory: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let half = spec.kernel.increment_integral(&spec.pi, 0.0, t / 2.0, alpha, cfg)?.extended();
            let min = spec.kernel.min_increment_integral(&spec.pi, t / 2.0, t, alpha, cfg)?.extended();
            Ok(y.powf(-2.0 * alpha) * ma * ma * half * half + y.powf(-alpha) * ma * min)
        })
        .collect::<Result<_>>()?;
    let theory_slope = loglog(&ts, &theory).0;

    let largest = per.iter().flatten().cloned().fold(0.0, f64::max);
    if estimate.iter().all(|p| *p == 0.0) {
        return Ok(ScalingFit {
            quantity: "min_increment_tail_probability".into(),
            t: ts,
            estimate,
            stderr,
            slope: f64::NAN,
            slope_ci: vec![(f64::NAN, f64::NAN)],
            r2: f64::NAN,
            theory,
            theory_slope,
            ratio: Vec::new(),
            ratio_spread: None,
            status: FitStatus::Indeterminate,
            largest_usable_y: Some(largest),
            replicas,
            seed,
        });
    }
    let (slope, r2) = loglog(&ts, &estimate);
    let ci = bootstrap_slope(&ts, &per, frac, opts.bootstrap, seed);
    Ok(ScalingFit {
        quantity: "min_increment_tail_probability".into(),
        t: ts,
        estimate,
        stderr,
        slope,
        slope_ci: vec![ci],
        r2,
        theory,
        theory_slope,
        ratio: Vec::new(),
        ratio_spread: None,
        status: if slope.is_nan() { FitStatus::Indeterminate } else { FitStatus::Fitted },
        largest_usable_y: Some(largest),
        replicas,
        seed,
    })
}

/// Scaling of `E|X₁(t) − X₁(0)|^α` against `∫_(0,1] z^α λ(dz) · ∫∫ |f(x,t−u) − f(x,−u)|^α π(dx) du`.
pub fn moment_scaling(
    spec: &MMASpec,
    alpha: f64,
    t_grid: &[f64],
    replicas: usize,
    seed: u64,
    trunc: &TruncationParams,
    opts: &DiagOptions,
) -> Result<ScalingFit> {
    if !(1.0..=2.0).contains(&alpha) || replicas < 2 {
        return invalid("need alpha in [1, 2] and replicas ≥ 2");
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return invalid("t grid must be non-empty, finite and non-negative");
    }
    require_regular(spec, opts)?;
    let ts = t_grid.to_vec();
    let grid = union_grid(&ts, false);
    let idx: Vec<usize> = ts.iter().map(|&t| index_of(&grid, t)).collect();
    let i0 = index_of(&grid, 0.0);
    let per = replicate_x1(spec, &grid, trunc, replicas, seed, opts, |x| idx.iter().map(|&i| (x[i] - x[i0]).abs().powf(alpha)).collect())?;
    let n = replicas as f64;
    let cols: Vec<Vec<f64>> = (0..ts.len()).map(|j| per.iter().map(|v| v[j]).collect()).collect();
    let estimate: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let stderr: Vec<f64> = cols.iter().map(|c| (variance(c) / n).sqrt()).collect();
    let cfg = &opts.quad;
    let ma = spec.levy.partial_moment(alpha, 0.0, 1.0, cfg).extended();
    let theory: Vec<f64> = ts
        .iter()
        .map(|&t| spec.kernel.increment_integral(&spec.pi, 0.0, t, alpha, cfg).map(|v| ma * v.extended()))
        .collect::<Result<_>>()?;
    let ratio: Vec<f64> = estimate.iter().zip(&theory).map(|(e, th)| if *th > 0.0 { e / th } else { f64::NAN }).collect();
    let pos: Vec<f64> = ratio.iter().cloned().filter(|r| r.is_finite() && *r > 0.0).collect();
    let spread = if pos.is_empty() { None } else { Some(pos.iter().cloned().fold(0.0, f64::max) / pos.iter().cloned().fold(f64::INFINITY, f64::min)) };
    let (slope, r2) = loglog(&ts, &estimate);
    let ci = if slope.is_nan() { (f64::NAN, f64::NAN) } else { bootstrap_slope(&ts, &per, mean, opts.bootstrap, seed) };
    Ok(ScalingFit {
        quantity: "increment_moment".into(),
        theory_slope: loglog(&ts, &theory).0,
        t: ts,
        estimate,
        stderr,
        slope,
        slope_ci: vec![ci],
        r2,
        theory,
        ratio,
        ratio_spread: spread,
        status: if slope.is_nan() { FitStatus::Indeterminate } else { FitStatus::Fitted },
        largest_usable_y: None,
        replicas,
        seed,
    })
}

/// Log-log slope of `max_i |x(t_i + kΔ) − x(t_i)|` against `kΔ` over dyadic `k`.
pub fn holder_estimate(path: &SamplePath) -> Result<f64> {
    holder_estimate_values(&path.grid, &path.values)
}

pub fn holder_estimate_values(grid: &[f64], values: &[f64]) -> Result<f64> {
    let n = grid.len();
    if n < 256 || values.len() != n {
        return invalid("holder estimate needs at least 256 grid points");
    }
    let dt = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    if !(dt > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return invalid("holder estimate needs a uniform grid");
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut k = 1;
    while k <= n / 8 {
        let m = (0..n - k).map(|i| (values[i + k] - values[i]).abs()).fold(0.0, f64::max);
        if m > 0.0 {
            xs.push((k as f64 * dt).ln());
            ys.push(m.ln());
        }
        k *= 2;
    }
    if xs.len() < 3 {
        return Err(Error::Degenerate("path is constant on too many scales".into()));
    }
    Ok(linreg(&xs, &ys).slope)
}
